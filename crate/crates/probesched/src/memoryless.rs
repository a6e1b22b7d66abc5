//! Optimal memoryless probing frequencies and their analytic evaluation.
//!
//! A memoryless schedule draws a test i.i.d. from a distribution `q` at
//! every step, so the detection time of element `e` is geometric with
//! parameter `Q_e = sum_i pi_ei q_i` and expectation `1/Q_e`. All three
//! SUM objectives then equal `sum_e p_e / Q_e` and all three MAX
//! objectives equal `max_e p_e / Q_e`.
//!
//! [`solve_sum`] minimizes the SUM value over the probability simplex by
//! projected gradient descent with Barzilai-Borwein steps and an Armijo
//! backtracking line search; the objective diverges whenever a covered
//! element loses all probing rate, which the line search rejects, so all
//! `Q_e` stay positive throughout. Convergence requires both a
//! Kuhn-Tucker balance residual at most `tolerance` and a relative
//! objective change over the last ten iterations at most `tolerance`.
//!
//! [`solve_max`] maximizes `min_e Q_e / p_e` through an exact reduction:
//! scaling the optimal `x` of the covering program
//! `min sum(x), sum_i (pi_ei / p_e) x_i >= 1, x >= 0` onto the simplex
//! yields the optimal frequencies, and the covering value equals the MAX
//! objective value.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::ObjectiveReport;
use crate::instance::{Instance, WeightMode};
use crate::simplex::solve_covering;

/// Tests with frequency below this are treated as inactive by the
/// balance residual.
pub const ACTIVE_EPS: f64 = 1e-9;

/// Solver knobs. The seed is reserved for randomized solver variants and
/// unused by the deterministic ones.
#[derive(Debug, Clone, Copy)]
pub struct SolveConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 20_000,
            seed: 0,
        }
    }
}

/// A probability distribution over tests defining a memoryless schedule,
/// plus the objective value the producing solver achieved.
#[derive(Debug, Clone, PartialEq)]
pub struct Frequencies {
    pub q: Vec<f64>,
    pub value: Option<f64>,
}

impl Frequencies {
    pub fn new(q: Vec<f64>) -> Self {
        Self { q, value: None }
    }

    pub fn uniform(m: usize) -> Self {
        Self::new(vec![1.0 / m as f64; m])
    }

    /// Checks the distribution invariants against an instance: lengths
    /// match, entries non-negative, total within 1e-9 of one, and every
    /// element keeps positive probing rate.
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        if self.q.len() != instance.num_tests() {
            return Err(Error::Malformed(format!(
                "frequency vector has {} entries for {} tests",
                self.q.len(),
                instance.num_tests()
            )));
        }
        if self.q.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::Malformed("negative or non-finite frequency".into()));
        }
        let total: f64 = self.q.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Malformed(format!(
                "frequencies sum to {total}, expected 1"
            )));
        }
        for (e, rate) in coverage_rates(instance, &self.q).iter().enumerate() {
            if !(*rate > 0.0) {
                return Err(Error::Uncovered(instance.element_id(e).to_string()));
            }
        }
        Ok(())
    }
}

/// Per-element probing rate `Q_e = sum_i pi_ei q_i`.
pub fn coverage_rates(instance: &Instance, q: &[f64]) -> Vec<f64> {
    (0..instance.num_elements())
        .map(|e| {
            instance
                .covering(e)
                .iter()
                .map(|c| c.prob * q[c.test])
                .sum()
        })
        .collect()
}

/// Closed-form memoryless objective values and the per-element rates.
/// Elements with zero rate yield infinite values.
#[derive(Debug, Clone)]
pub struct MemorylessValues {
    /// `sum_e p_e / Q_e`: the common value of all three SUM objectives.
    pub sum_value: f64,
    /// `max_e p_e / Q_e`: the common value of all three MAX objectives.
    pub max_value: f64,
    pub rates: Vec<f64>,
}

pub fn eval_memoryless(instance: &Instance, q: &[f64]) -> MemorylessValues {
    let rates = coverage_rates(instance, q);
    let p = instance.weights();
    let mut sum_value = 0.0;
    let mut max_value = f64::NEG_INFINITY;
    for e in 0..instance.num_elements() {
        let v = if rates[e] > 0.0 {
            p[e] / rates[e]
        } else {
            f64::INFINITY
        };
        sum_value += v;
        max_value = max_value.max(v);
    }
    MemorylessValues {
        sum_value,
        max_value,
        rates,
    }
}

/// Full report for a memoryless schedule: the three objectives of each
/// family coincide, and every per-element statistic equals `1/Q_e`.
pub fn memoryless_report(instance: &Instance, q: &[f64]) -> ObjectiveReport {
    let values = eval_memoryless(instance, q);
    let expected: Vec<f64> = values
        .rates
        .iter()
        .map(|&r| if r > 0.0 { 1.0 / r } else { f64::INFINITY })
        .collect();
    ObjectiveReport {
        ee_et: values.sum_value,
        mt_ee: values.sum_value,
        ee_mt: values.sum_value,
        me_et: values.max_value,
        et_me: values.max_value,
        me_mt: values.max_value,
        mt: expected.clone(),
        et: expected,
        ee_t: None,
        me_t: None,
        uncovered: values
            .rates
            .iter()
            .enumerate()
            .filter(|(_, &r)| !(r > 0.0))
            .map(|(e, _)| e)
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Kuhn-Tucker balance residual
// ---------------------------------------------------------------------------

/// Balance magnitudes `r_i = sum_{e in s_i} pi_ei p_e / Q_e^2`, the
/// (negated) partials of the SUM objective. At the optimum they are equal
/// across tests with positive frequency and no larger on inactive tests.
fn balance_magnitudes(instance: &Instance, rates: &[f64]) -> Vec<f64> {
    let p = instance.weights();
    (0..instance.num_tests())
        .map(|i| {
            let test = instance.test(i);
            test.members()
                .iter()
                .enumerate()
                .map(|(k, &e)| test.prob(k) * p[e] / (rates[e] * rates[e]))
                .sum()
        })
        .collect()
}

/// Scaled optimality residual of the SUM convex program at `q`: the
/// spread of balance values over active tests, combined with the
/// complementary-slackness violation of inactive tests whose balance
/// value exceeds the active minimum. Zero at the optimum.
pub fn kkt_residual(instance: &Instance, q: &[f64]) -> f64 {
    let rates = coverage_rates(instance, q);
    let mags = balance_magnitudes(instance, &rates);
    kkt_residual_from(&mags, q)
}

fn kkt_residual_from(mags: &[f64], q: &[f64]) -> f64 {
    let scale = mags.iter().cloned().fold(0.0f64, f64::max);
    if scale <= 0.0 || !scale.is_finite() {
        return if scale.is_finite() {
            0.0
        } else {
            f64::INFINITY
        };
    }
    let mut active_min = f64::INFINITY;
    let mut active_max = f64::NEG_INFINITY;
    for (i, &m) in mags.iter().enumerate() {
        if q[i] > ACTIVE_EPS {
            active_min = active_min.min(m);
            active_max = active_max.max(m);
        }
    }
    if !active_min.is_finite() {
        return f64::INFINITY; // no active test at all
    }
    let spread = (active_max - active_min) / scale;
    let mut slackness = 0.0f64;
    for (i, &m) in mags.iter().enumerate() {
        if q[i] <= ACTIVE_EPS {
            slackness = slackness.max((m - active_min) / scale);
        }
    }
    spread.max(slackness)
}

// ---------------------------------------------------------------------------
// SUM solver: projected gradient with BB steps
// ---------------------------------------------------------------------------

/// Euclidean projection onto the probability simplex (sorting method).
/// The clamped output is renormalized: for large-magnitude inputs the
/// `x - theta` cancellation can drift the sum off one by far more than
/// an ulp, and a candidate that is not exactly on the simplex must never
/// reach the objective comparison.
pub(crate) fn project_simplex(x: &[f64]) -> Vec<f64> {
    let mut u = x.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let candidate = (cum - 1.0) / (j + 1) as f64;
        if uj - candidate > 0.0 {
            theta = candidate;
        }
    }
    let mut out: Vec<f64> = x.iter().map(|&v| (v - theta).max(0.0)).collect();
    let total: f64 = out.iter().sum();
    if total > 0.0 && total.is_finite() {
        for v in &mut out {
            *v /= total;
        }
    }
    out
}

fn ensure_coverage(instance: &Instance) -> Result<()> {
    for e in 0..instance.num_elements() {
        if !instance.covering(e).iter().any(|c| c.prob > 0.0) {
            return Err(Error::Uncovered(instance.element_id(e).to_string()));
        }
    }
    Ok(())
}

/// Minimizes `sum_e p_e / Q_e` over the simplex; weights are
/// SUM-normalized internally (the optimal `q` is scale-invariant).
/// Returns the frequencies with the achieved objective value.
pub fn solve_sum(instance: &Instance, config: &SolveConfig) -> Result<Frequencies> {
    let instance = instance.normalize(WeightMode::Sum)?;
    ensure_coverage(&instance)?;
    let m = instance.num_tests();
    if m == 0 {
        return Err(Error::EmptyInput("no tests to schedule".into()));
    }
    let p = instance.weights();

    let objective = |rates: &[f64]| -> f64 {
        let mut acc = 0.0;
        for (e, &r) in rates.iter().enumerate() {
            if !(r > 0.0) {
                return f64::INFINITY;
            }
            acc += p[e] / r;
        }
        acc
    };
    // gradient_i = -mags_i; descent direction is +mags.
    let gradient = |mags: &[f64]| -> Vec<f64> { mags.iter().map(|&m| -m).collect() };

    let mut q = vec![1.0 / m as f64; m];
    let mut rates = coverage_rates(&instance, &q);
    let mut f = objective(&rates);
    let mut history: VecDeque<f64> = VecDeque::with_capacity(11);
    let mut prev_q: Option<Vec<f64>> = None;
    let mut prev_grad: Option<Vec<f64>> = None;
    let mut alpha = 1.0;
    let mut last_residual = f64::INFINITY;

    for iteration in 0..=config.max_iterations {
        let mags = balance_magnitudes(&instance, &rates);
        let grad = gradient(&mags);
        let residual = kkt_residual_from(&mags, &q);
        last_residual = residual;

        let window_change = match history.front() {
            None => 0.0,
            Some(&old) => (old - f).abs() / f.abs().max(f64::MIN_POSITIVE),
        };
        if residual <= config.tolerance && window_change <= config.tolerance {
            return Ok(Frequencies { q, value: Some(f) });
        }
        if iteration == config.max_iterations {
            break;
        }

        // Barzilai-Borwein step length, safeguarded.
        if let (Some(pq), Some(pg)) = (&prev_q, &prev_grad) {
            let mut ss = 0.0;
            let mut sy = 0.0;
            for i in 0..m {
                let s = q[i] - pq[i];
                let y = grad[i] - pg[i];
                ss += s * s;
                sy += s * y;
            }
            if sy > 1e-18 {
                alpha = (ss / sy).clamp(1e-12, 1e12);
            }
        } else {
            let gmax = grad.iter().fold(0.0f64, |a, &g| a.max(g.abs()));
            alpha = if gmax > 0.0 { 1.0 / gmax } else { 1.0 };
        }
        prev_q = Some(q.clone());
        prev_grad = Some(grad.clone());

        // Non-monotone Armijo backtracking along the projection arc
        // (spectral projected gradient): sufficient decrease is measured
        // against the worst objective in the recent window, which lets
        // the BB step run at its natural length instead of zigzagging.
        let f_ref = history.iter().cloned().fold(f, f64::max);
        let mut accepted = false;
        let mut step = alpha;
        for _ in 0..80 {
            let candidate: Vec<f64> = project_simplex(
                &q.iter()
                    .zip(&grad)
                    .map(|(&x, &g)| x - step * g)
                    .collect::<Vec<_>>(),
            );
            let dir_dot: f64 = candidate
                .iter()
                .zip(&q)
                .zip(&grad)
                .map(|((&c, &x), &g)| g * (c - x))
                .sum();
            if dir_dot >= 0.0 {
                // Stationary or numerically dead step; enlarge once, then
                // let the convergence check settle it.
                step *= 10.0;
                if step > 1e14 {
                    break;
                }
                continue;
            }
            let cand_rates = coverage_rates(&instance, &candidate);
            let cand_f = objective(&cand_rates);
            if cand_f <= f_ref + 1e-4 * dir_dot {
                q = candidate;
                rates = cand_rates;
                f = cand_f;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No descent step found; the convergence gate decides on the
            // next pass whether we are done or stuck.
            history.push_back(f);
            if history.len() > 10 {
                history.pop_front();
            }
            continue;
        }
        history.push_back(f);
        if history.len() > 10 {
            history.pop_front();
        }
    }
    Err(Error::NoConvergence {
        iterations: config.max_iterations,
        residual: last_residual,
    })
}

// ---------------------------------------------------------------------------
// MAX solver: covering LP
// ---------------------------------------------------------------------------

/// Minimizes `max_e p_e / Q_e` over the simplex; weights are
/// MAX-normalized internally. Exact up to the simplex pivoting
/// arithmetic; ties between optimal distributions are resolved by the
/// pivot order, so only the value is contractual.
pub fn solve_max(instance: &Instance, config: &SolveConfig) -> Result<Frequencies> {
    let _ = config; // deterministic direct solve; no iteration knobs used
    let instance = instance.normalize(WeightMode::Max)?;
    ensure_coverage(&instance)?;
    let m = instance.num_tests();
    if m == 0 {
        return Err(Error::EmptyInput("no tests to schedule".into()));
    }
    let p = instance.weights();
    // Equilibrated covering form: sum_i pi_ei x_i >= p_e keeps every
    // matrix entry in (0, 1], which the simplex pricing wants; scaling
    // x onto the simplex turns the covering optimum into the optimal
    // frequencies and the covering value into the MAX objective value.
    let mut rows = vec![vec![0.0; m]; instance.num_elements()];
    for e in 0..instance.num_elements() {
        for c in instance.covering(e) {
            rows[e][c.test] = c.prob;
        }
    }
    let sol = solve_covering(&rows, p, m)?;
    let q: Vec<f64> = sol.x.iter().map(|&x| x / sol.value).collect();
    let values = eval_memoryless(&instance, &q);
    Ok(Frequencies {
        q,
        value: Some(values.max_value),
    })
}

// ---------------------------------------------------------------------------
// Subset restriction (seeding hook)
// ---------------------------------------------------------------------------

/// Lifts frequencies solved on a test-restricted instance back to the
/// full test list (zero on excluded tests), matching by test id.
pub fn expand_frequencies(
    full: &Instance,
    restricted: &Instance,
    freqs: &Frequencies,
) -> Result<Frequencies> {
    let mut q = vec![0.0; full.num_tests()];
    for (i, &qi) in freqs.q.iter().enumerate() {
        let id = restricted.test(i).id();
        let Some(j) = full.test_index(id) else {
            return Err(Error::Malformed(format!(
                "restricted test {id:?} missing from the full instance"
            )));
        };
        q[j] = qi;
    }
    Ok(Frequencies {
        q,
        value: freqs.value,
    })
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrequenciesFile {
    test_ids: Vec<String>,
    q: Vec<f64>,
}

/// Round to 12 significant digits, the file precision.
fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

impl Frequencies {
    pub fn from_json(text: &str, instance: &Instance) -> Result<Frequencies> {
        let file: FrequenciesFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("frequencies: {e}")))?;
        if file.test_ids.len() != file.q.len() {
            return Err(Error::Parse(
                "frequencies: test_ids and q lengths differ".into(),
            ));
        }
        let ids: std::collections::HashMap<&str, usize> = (0..instance.num_tests())
            .map(|t| (instance.test(t).id(), t))
            .collect();
        let mut q = vec![0.0; instance.num_tests()];
        let mut seen = vec![false; instance.num_tests()];
        for (id, &qi) in file.test_ids.iter().zip(&file.q) {
            let Some(&t) = ids.get(id.as_str()) else {
                return Err(Error::Parse(format!(
                    "frequencies reference unknown test {id:?}"
                )));
            };
            if seen[t] {
                return Err(Error::Parse(format!("duplicate test id {id:?}")));
            }
            seen[t] = true;
            q[t] = qi;
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::Parse(
                "frequencies file does not cover every test of the instance".into(),
            ));
        }
        Ok(Frequencies::new(q))
    }

    pub fn to_json(&self, instance: &Instance) -> String {
        let file = FrequenciesFile {
            test_ids: (0..instance.num_tests())
                .map(|t| instance.test(t).id().to_string())
                .collect(),
            q: self.q.iter().map(|&v| round_sig(v)).collect(),
        };
        serde_json::to_string_pretty(&file).expect("frequencies serialization")
    }

    pub fn read(path: &Path, instance: &Instance) -> Result<Frequencies> {
        Frequencies::from_json(&std::fs::read_to_string(path)?, instance)
    }

    pub fn write(&self, path: &Path, instance: &Instance) -> Result<()> {
        std::fs::write(path, self.to_json(instance) + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_clos, gen_lowerbound, gen_random, gen_singletons, WeightMode};

    fn cfg() -> SolveConfig {
        SolveConfig::default()
    }

    #[test]
    fn sum_singletons_square_root_law() {
        let inst = gen_singletons(&[0.5, 0.3, 0.2]).unwrap();
        let freqs = solve_sum(&inst, &cfg()).unwrap();
        let sqrt_sum: f64 = inst.weights().iter().map(|w| w.sqrt()).sum();
        for (e, &q) in freqs.q.iter().enumerate() {
            let expected = inst.weight(e).sqrt() / sqrt_sum;
            assert!((q - expected).abs() < 1e-4, "q[{e}] = {q}, want {expected}");
        }
        let value = freqs.value.unwrap();
        assert!((value - sqrt_sum * sqrt_sum).abs() / (sqrt_sum * sqrt_sum) < 1e-6);
        assert!((value - 2.8969).abs() < 1e-3);
    }

    #[test]
    fn sum_uniform_singletons_exact() {
        // The uniform start is already optimal and must be returned
        // untouched: value exactly n.
        let inst = gen_singletons(&[1.0; 4]).unwrap();
        let freqs = solve_sum(&inst, &cfg()).unwrap();
        assert_eq!(freqs.q, vec![0.25; 4]);
        assert_eq!(freqs.value.unwrap(), 4.0);
    }

    #[test]
    fn sum_single_forced_test() {
        // One test covering both elements: q is forced and every
        // detection takes exactly one probe, so the weighted value is 1.
        let inst = Instance::new(
            WeightMode::Sum,
            vec![("a".into(), 0.5), ("b".into(), 0.5)],
            vec![("t".into(), vec!["a".into(), "b".into()], None)],
        )
        .unwrap();
        let freqs = solve_sum(&inst, &cfg()).unwrap();
        assert_eq!(freqs.q, vec![1.0]);
        assert_eq!(freqs.value.unwrap(), 1.0);
    }

    #[test]
    fn sum_uncovered_element_errors() {
        let inst = Instance::new(
            WeightMode::Sum,
            vec![("a".into(), 0.5), ("b".into(), 0.5)],
            vec![("t".into(), vec!["a".into()], None)],
        )
        .unwrap();
        assert!(matches!(solve_sum(&inst, &cfg()), Err(Error::Uncovered(_))));
    }

    #[test]
    fn sum_boundary_optimum_clos() {
        // gen_clos(3, 2): the optimum drops the two short paths entirely
        // and achieves value 2.
        let inst = gen_clos(3, 2).unwrap();
        let freqs = solve_sum(&inst, &cfg()).unwrap();
        assert!((freqs.value.unwrap() - 2.0).abs() < 1e-4);
        assert!(kkt_residual(&inst.normalize(WeightMode::Sum).unwrap(), &freqs.q) <= 1e-6);
    }

    #[test]
    fn sum_symmetric_lowerbound_instance() {
        let inst = gen_lowerbound(6, 3, 10_000).unwrap();
        let freqs = solve_sum(&inst, &cfg()).unwrap();
        for &q in &freqs.q {
            assert!((q - 1.0 / 6.0).abs() < 1e-9);
        }
        assert!((freqs.value.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn max_singletons_proportional() {
        let inst = gen_singletons(&[1.0, 0.5, 0.25]).unwrap();
        let freqs = solve_max(&inst, &cfg()).unwrap();
        // q = p / sum(p), value = sum of MAX-normalized weights.
        let expected = [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
        for (q, want) in freqs.q.iter().zip(expected) {
            assert!((q - want).abs() < 1e-9);
        }
        assert!((freqs.value.unwrap() - 1.75).abs() < 1e-9);
    }

    #[test]
    fn max_uniform_singletons_exact() {
        let inst = gen_singletons(&[1.0; 4]).unwrap();
        let freqs = solve_max(&inst, &cfg()).unwrap();
        assert_eq!(freqs.q, vec![0.25; 4]);
        assert_eq!(freqs.value.unwrap(), 4.0);
    }

    #[test]
    fn max_single_covering_test() {
        let inst = Instance::new(
            WeightMode::Max,
            vec![("a".into(), 0.4), ("b".into(), 1.0)],
            vec![("t".into(), vec!["a".into(), "b".into()], None)],
        )
        .unwrap();
        let freqs = solve_max(&inst, &cfg()).unwrap();
        assert_eq!(freqs.q, vec![1.0]);
        assert_eq!(freqs.value.unwrap(), 1.0);
    }

    #[test]
    fn max_matches_sum_on_symmetric_clos() {
        let inst = gen_clos(3, 2).unwrap();
        let max = solve_max(&inst, &cfg()).unwrap();
        let sum = solve_sum(&inst, &cfg()).unwrap();
        assert!((max.value.unwrap() - 2.0).abs() < 1e-9);
        assert!((max.value.unwrap() - sum.value.unwrap()).abs() < 1e-4);
    }

    #[test]
    fn eval_uniform_singletons() {
        let inst = gen_singletons(&[1.0; 8]).unwrap();
        let q = vec![0.125; 8];
        let values = eval_memoryless(&inst, &q);
        assert_eq!(values.sum_value, 8.0);
        // MAX value under SUM weights: p_max / Q = 0.125 * 8.
        assert_eq!(values.max_value, 1.0);
        let max_inst = inst.normalize(WeightMode::Max).unwrap();
        assert_eq!(eval_memoryless(&max_inst, &q).max_value, 8.0);
    }

    #[test]
    fn eval_probabilistic_halving() {
        let mut detect = std::collections::HashMap::new();
        detect.insert("a".to_string(), 0.5);
        let inst = Instance::new(
            WeightMode::Sum,
            vec![("a".into(), 1.0)],
            vec![("t".into(), vec!["a".into()], Some(detect))],
        )
        .unwrap();
        let values = eval_memoryless(&inst, &[1.0]);
        assert_eq!(values.rates[0], 0.5);
        assert_eq!(values.sum_value, 2.0);
    }

    #[test]
    fn solvers_honor_detection_probabilities() {
        // Singleton tests where the first probe only detects half the
        // time: the SUM program sees effective weight 2*w on that
        // element (q proportional to sqrt(2*w)), and the MAX covering
        // needs twice the rate there.
        let mut half = std::collections::HashMap::new();
        half.insert("a".to_string(), 0.5);
        let inst = Instance::new(
            WeightMode::Sum,
            vec![("a".into(), 0.5), ("b".into(), 0.5)],
            vec![
                ("t0".into(), vec!["a".into()], Some(half)),
                ("t1".into(), vec!["b".into()], None),
            ],
        )
        .unwrap();

        // f(q) = 0.5/(0.5 q0) + 0.5/q1 = 1/q0 + 0.5/q1, so the optimum
        // is the square-root law over coefficients (1, 0.5).
        let sum = solve_sum(&inst, &cfg()).unwrap();
        let root_half = 0.5f64.sqrt();
        let want_q0 = 1.0 / (1.0 + root_half);
        assert!((sum.q[0] - want_q0).abs() < 1e-4, "{:?}", sum.q);
        let want_value = (1.0 + root_half) * (1.0 + root_half);
        assert!((sum.value.unwrap() - want_value).abs() < 1e-6 * want_value);

        let max = solve_max(&inst, &cfg()).unwrap();
        assert!((max.q[0] - 2.0 / 3.0).abs() < 1e-9, "{:?}", max.q);
        assert!((max.value.unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn kkt_residual_at_singleton_optimum() {
        let inst = gen_singletons(&[0.5, 0.3, 0.2]).unwrap();
        let sqrt_sum: f64 = inst.weights().iter().map(|w| w.sqrt()).sum();
        let q: Vec<f64> = inst.weights().iter().map(|w| w.sqrt() / sqrt_sum).collect();
        assert!(kkt_residual(&inst, &q) <= 1e-12);
    }

    #[test]
    fn kkt_residual_off_optimum() {
        let inst = gen_singletons(&[0.7, 0.2, 0.1]).unwrap();
        let q = vec![1.0 / 3.0; 3];
        assert!(kkt_residual(&inst, &q) > 0.1);
    }

    #[test]
    fn kkt_residual_single_test() {
        let inst = Instance::new(
            WeightMode::Sum,
            vec![("a".into(), 1.0)],
            vec![("t".into(), vec!["a".into()], None)],
        )
        .unwrap();
        assert_eq!(kkt_residual(&inst, &[1.0]), 0.0);
    }

    #[test]
    fn projection_is_simplex_point() {
        for x in [
            vec![0.2, 0.3, 0.5],
            vec![1.5, -0.2, 0.1],
            vec![-1.0, -2.0, 4.0],
            vec![0.0, 0.0],
        ] {
            let p = project_simplex(&x);
            assert!(p.iter().all(|&v| v >= 0.0));
            let total: f64 = p.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "{x:?} -> {p:?}");
        }
        // Interior points project to themselves.
        let p = project_simplex(&[0.25, 0.25, 0.5]);
        assert_eq!(p, vec![0.25, 0.25, 0.5]);
    }

    #[test]
    fn solver_beats_uniform_on_random_instances() {
        for seed in 0..10 {
            let inst = gen_random(4, 3, seed).unwrap();
            let freqs = solve_sum(&inst, &cfg()).unwrap();
            let uniform = eval_memoryless(&inst, &[1.0 / 3.0; 3]).sum_value;
            assert!(freqs.value.unwrap() <= uniform + 1e-9, "seed {seed}");
            let max = solve_max(&inst, &cfg()).unwrap();
            let max_inst = inst.normalize(WeightMode::Max).unwrap();
            let uniform_max = eval_memoryless(&max_inst, &[1.0 / 3.0; 3]).max_value;
            assert!(max.value.unwrap() <= uniform_max + 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn frequencies_file_round_trip() {
        let inst = gen_singletons(&[0.5, 0.3, 0.2]).unwrap();
        let freqs = solve_sum(&inst, &cfg()).unwrap();
        let text = freqs.to_json(&inst);
        let parsed = Frequencies::from_json(&text, &inst).unwrap();
        assert_eq!(parsed.to_json(&inst), text);
        parsed.validate(&inst).unwrap();
    }

    #[test]
    fn expand_restricted_frequencies() {
        let inst = gen_random(4, 3, 1).unwrap();
        let keep = [0usize, 2];
        let restricted = inst.restrict_tests(&keep).unwrap();
        let freqs = Frequencies::new(vec![0.75, 0.25]);
        let full = expand_frequencies(&inst, &restricted, &freqs).unwrap();
        assert_eq!(full.q, vec![0.75, 0.0, 0.25]);
    }
}
