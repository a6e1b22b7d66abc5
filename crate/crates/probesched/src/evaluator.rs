//! Exact evaluation of detection times and the six SUM/MAX objectives on
//! cyclic deterministic schedules, the probabilistic-test extension,
//! Monte-Carlo validation of memoryless schedules, and reverse-CDF export.
//!
//! Detection time counts probes including the detecting one: a failure at
//! slot `t` that is covered by the probe at slot `t` has detection time 1.
//! This makes the expected memoryless detection time exactly `1/Q_e` and
//! a round-robin over `n` uniform singletons score `Mt = n`,
//! `Et = (n+1)/2`. Failure epochs are probe-aligned: a failure "between"
//! probes is equivalent to one at the next slot.
//!
//! The six objective values of a report always satisfy
//! `EeMt >= MtEe >= EeEt` and `MeMt >= EtMe >= MeEt` exactly, not merely
//! up to rounding: weighted sums over elements accumulate in element
//! order (so pointwise-dominated terms yield dominated sums), and time
//! averages are computed anchored at the maximum of the averaged array
//! (the anchored correction sums non-positive terms, so the mean can
//! never exceed its max partner).

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

/// The two objective families: weighted average over elements (SUM) or
/// weighted maximum over elements (MAX).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveFamily {
    Sum,
    Max,
}

/// The six detection-time objectives, named element-operator first:
/// `EeMt` is the weighted sum over elements of the per-element maximum
/// over time, and so on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    EeEt,
    MtEe,
    EeMt,
    MeEt,
    EtMe,
    MeMt,
}

impl Objective {
    pub const ALL: [Objective; 6] = [
        Objective::EeEt,
        Objective::MtEe,
        Objective::EeMt,
        Objective::MeEt,
        Objective::EtMe,
        Objective::MeMt,
    ];

    pub fn family(self) -> ObjectiveFamily {
        match self {
            Objective::EeEt | Objective::MtEe | Objective::EeMt => ObjectiveFamily::Sum,
            Objective::MeEt | Objective::EtMe | Objective::MeMt => ObjectiveFamily::Max,
        }
    }

    /// CLI and CSV name.
    pub fn name(self) -> &'static str {
        match self {
            Objective::EeEt => "eeet",
            Objective::MtEe => "mtee",
            Objective::EeMt => "eemt",
            Objective::MeEt => "meet",
            Objective::EtMe => "etme",
            Objective::MeMt => "memt",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eeet" => Ok(Objective::EeEt),
            "mtee" => Ok(Objective::MtEe),
            "eemt" => Ok(Objective::EeMt),
            "meet" => Ok(Objective::MeEt),
            "etme" => Ok(Objective::EtMe),
            "memt" => Ok(Objective::MeMt),
            other => Err(Error::Parse(format!(
                "unknown objective {other:?} (expected eeet|mtee|eemt|meet|etme|memt)"
            ))),
        }
    }
}

// ---------------------------------------------------------------------------
// Cyclic schedules
// ---------------------------------------------------------------------------

/// Which construction produced a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    RTree,
    Kt,
    SetCover,
    Manual,
}

/// A finite test sequence repeated forever. Slots are test indices; an
/// idle slot (`None`) probes nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicSchedule {
    slots: Vec<Option<usize>>,
    provenance: Provenance,
    /// Set when a construction could not certify the cycle (the KT
    /// scheduler found no state repeat within its step budget).
    approximate: bool,
}

impl CyclicSchedule {
    pub fn new(slots: Vec<Option<usize>>, provenance: Provenance) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::EmptyInput("schedule cycle must be non-empty".into()));
        }
        Ok(Self {
            slots,
            provenance,
            approximate: false,
        })
    }

    pub fn from_tests(tests: Vec<usize>, provenance: Provenance) -> Result<Self> {
        Self::new(tests.into_iter().map(Some).collect(), provenance)
    }

    pub(crate) fn mark_approximate(mut self) -> Self {
        self.approximate = true;
        self
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction enforces N >= 1
    }

    pub fn slots(&self) -> &[Option<usize>] {
        &self.slots
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn approximate(&self) -> bool {
        self.approximate
    }

    /// Deterministic detection time for element `e` failing at slot `t`:
    /// the number of probes up to and including the first covering probe
    /// at slot >= t. `None` when the cycle never covers `e`.
    ///
    /// A test covers an element here when its detection probability is
    /// positive; use [`evaluate_probabilistic`] to account for
    /// probabilities below one.
    pub fn detection_time(&self, instance: &Instance, e: usize, t: usize) -> Option<u64> {
        let n = self.len();
        assert!(t < n, "failure epoch {t} out of cycle range 0..{n}");
        for h in 0..n {
            if let Some(test) = self.slots[(t + h) % n] {
                let covers = instance
                    .test(test)
                    .members()
                    .binary_search(&e)
                    .ok()
                    .map(|k| instance.test(test).prob(k) > 0.0)
                    .unwrap_or(false);
                if covers {
                    return Some(h as u64 + 1);
                }
            }
        }
        None
    }

    /// Per-element sorted slot lists of covering probes.
    pub fn occurrences(&self, instance: &Instance) -> Vec<Vec<usize>> {
        let mut occ = vec![Vec::new(); instance.num_elements()];
        for (t, slot) in self.slots.iter().enumerate() {
            if let Some(test) = *slot {
                let test = instance.test(test);
                for (k, &e) in test.members().iter().enumerate() {
                    if test.prob(k) > 0.0 {
                        occ[e].push(t);
                    }
                }
            }
        }
        occ
    }
}

// ---------------------------------------------------------------------------
// Objective reports
// ---------------------------------------------------------------------------

/// The six objective values of a schedule plus per-element and per-time
/// detection statistics. Values are in probe units; infinite entries are
/// flagged through `uncovered`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveReport {
    pub ee_et: f64,
    pub mt_ee: f64,
    pub ee_mt: f64,
    pub me_et: f64,
    pub et_me: f64,
    pub me_mt: f64,
    /// Per-element maximum over time of the expected detection time.
    pub mt: Vec<f64>,
    /// Per-element average over time of the expected detection time.
    pub et: Vec<f64>,
    /// Per-time weighted sum over elements, when retained.
    pub ee_t: Option<Vec<f64>>,
    /// Per-time weighted maximum over elements, when retained.
    pub me_t: Option<Vec<f64>>,
    /// Elements whose detection time is infinite under this schedule.
    pub uncovered: Vec<usize>,
}

impl ObjectiveReport {
    pub fn value(&self, objective: Objective) -> f64 {
        match objective {
            Objective::EeEt => self.ee_et,
            Objective::MtEe => self.mt_ee,
            Objective::EeMt => self.ee_mt,
            Objective::MeEt => self.me_et,
            Objective::EtMe => self.et_me,
            Objective::MeMt => self.me_mt,
        }
    }

    /// Checks the operator ordering chains, which hold exactly for every
    /// report this crate produces.
    pub fn ordering_holds(&self) -> bool {
        self.ee_mt >= self.mt_ee
            && self.mt_ee >= self.ee_et
            && self.me_mt >= self.et_me
            && self.et_me >= self.me_et
    }

    /// Flat CSV: one row per objective, one row per element with its
    /// Mt/Et statistics.
    pub fn to_csv(&self, instance: &Instance) -> String {
        let mut out = String::from("kind,name,value,mt,et\n");
        for objective in Objective::ALL {
            out.push_str(&format!(
                "objective,{},{},,\n",
                objective.name(),
                fmt_csv(self.value(objective))
            ));
        }
        for e in 0..instance.num_elements() {
            out.push_str(&format!(
                "element,{},,{},{}\n",
                instance.element_id(e),
                fmt_csv(self.mt[e]),
                fmt_csv(self.et[e])
            ));
        }
        out
    }
}

fn fmt_csv(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

/// Per-element summaries feeding a report: maximum and plain time-sum of
/// the expected detection row.
struct ElementStats {
    mt: Vec<f64>,
    time_sum: Vec<f64>,
}

/// Builds the report from per-element detection rows.
///
/// `fill_row(e, buf)` writes the expected detection time of element `e`
/// for every failure slot. Rows are consumed in element-index order and
/// the row pass runs once; `stats` must agree with the rows (maximum and
/// plain sum), which both row producers in this module guarantee.
fn combine(
    instance: &Instance,
    n_slots: usize,
    stats: &ElementStats,
    mut fill_row: impl FnMut(usize, &mut [f64]),
) -> ObjectiveReport {
    let n_elem = instance.num_elements();
    let p = instance.weights();
    let slots_f = n_slots as f64;

    let et: Vec<f64> = stats.time_sum.iter().map(|s| s / slots_f).collect();
    let mut ee_mt = 0.0;
    let mut me_mt = f64::NEG_INFINITY;
    for (&pe, &mt) in p.iter().zip(&stats.mt) {
        let weighted = pe * mt;
        ee_mt += weighted;
        me_mt = me_mt.max(weighted);
    }

    let mut ee_t = vec![0.0; n_slots];
    let mut me_t = vec![f64::NEG_INFINITY; n_slots];
    // Per-element time averages of the weighted rows, anchored at me_mt
    // so that me_et <= et_me <= me_mt comes out exact.
    let mut me_et = f64::NEG_INFINITY;
    let mut row = vec![0.0; n_slots];
    for e in 0..n_elem {
        fill_row(e, &mut row);
        let mut anchored = 0.0;
        for (t, &r) in row.iter().enumerate() {
            let weighted = p[e] * r;
            ee_t[t] += weighted;
            me_t[t] = me_t[t].max(weighted);
            anchored += weighted - me_mt;
        }
        me_et = me_et.max(me_mt + anchored / slots_f);
    }

    let mt_ee = ee_t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ee_et = anchored_mean(&ee_t, mt_ee);
    let et_me = anchored_mean(&me_t, me_mt);

    ObjectiveReport {
        ee_et,
        mt_ee,
        ee_mt,
        me_et,
        et_me,
        me_mt,
        mt: stats.mt.clone(),
        et,
        ee_t: Some(ee_t),
        me_t: Some(me_t),
        uncovered: Vec::new(),
    }
}

/// Mean of `xs` computed as `anchor + mean(xs - anchor)`. With the array
/// maximum as anchor every correction term is non-positive, so the
/// result never exceeds the anchor.
fn anchored_mean(xs: &[f64], anchor: f64) -> f64 {
    let sum: f64 = xs.iter().map(|x| x - anchor).sum();
    anchor + sum / xs.len() as f64
}

/// Report for a schedule leaving some elements undetectable: objectives
/// are infinite, per-element statistics stay finite where defined.
fn unreachable_report(uncovered: Vec<usize>, mt: Vec<f64>, et: Vec<f64>) -> ObjectiveReport {
    debug_assert!(!uncovered.is_empty());
    ObjectiveReport {
        ee_et: f64::INFINITY,
        mt_ee: f64::INFINITY,
        ee_mt: f64::INFINITY,
        me_et: f64::INFINITY,
        et_me: f64::INFINITY,
        me_mt: f64::INFINITY,
        mt,
        et,
        ee_t: None,
        me_t: None,
        uncovered,
    }
}

// ---------------------------------------------------------------------------
// Deterministic evaluation
// ---------------------------------------------------------------------------

/// Cyclic gap lengths of a sorted occurrence list in a cycle of `n`
/// slots. Gaps sum to `n`.
fn cyclic_gaps(occ: &[usize], n: usize) -> Vec<u64> {
    debug_assert!(!occ.is_empty());
    let mut gaps = Vec::with_capacity(occ.len());
    for w in occ.windows(2) {
        gaps.push((w[1] - w[0]) as u64);
    }
    gaps.push((n - occ[occ.len() - 1] + occ[0]) as u64);
    gaps
}

/// Max gap and the exact integer sum over slots of the detection time,
/// `sum_j g_j (g_j + 1) / 2`, both as f64.
fn gap_stats(occ: &[usize], n: usize) -> (f64, f64) {
    let mut max_gap = 0u64;
    let mut sum = 0.0;
    for g in cyclic_gaps(occ, n) {
        max_gap = max_gap.max(g);
        sum += (g * (g + 1) / 2) as f64;
    }
    (max_gap as f64, sum)
}

/// Writes the deterministic detection row of one element: `row[t]` is the
/// number of probes from slot `t` through the first covering slot.
fn detection_row(occ: &[usize], n: usize, row: &mut [f64]) {
    debug_assert!(!occ.is_empty());
    let mut k = 0usize;
    for (t, r) in row.iter_mut().enumerate() {
        while k < occ.len() && occ[k] < t {
            k += 1;
        }
        let next = if k < occ.len() { occ[k] } else { occ[0] + n };
        *r = (next - t + 1) as f64;
    }
}

/// Exact evaluation of all six objectives on a cyclic schedule.
///
/// Tests with detection probability below one are treated as certain
/// here (coverage is any positive probability); see
/// [`evaluate_probabilistic`] for the probability-aware expectation.
pub fn evaluate(instance: &Instance, schedule: &CyclicSchedule) -> ObjectiveReport {
    let n = schedule.len();
    let occ = schedule.occurrences(instance);
    let uncovered: Vec<usize> = (0..instance.num_elements())
        .filter(|&e| occ[e].is_empty())
        .collect();

    let mut stats = ElementStats {
        mt: vec![f64::INFINITY; instance.num_elements()],
        time_sum: vec![f64::INFINITY; instance.num_elements()],
    };
    for (e, occ_e) in occ.iter().enumerate() {
        if !occ_e.is_empty() {
            let (mt, sum) = gap_stats(occ_e, n);
            stats.mt[e] = mt;
            stats.time_sum[e] = sum;
        }
    }
    if !uncovered.is_empty() {
        let et = stats.time_sum.iter().map(|s| s / n as f64).collect();
        return unreachable_report(uncovered, stats.mt, et);
    }
    combine(instance, n, &stats, |e, row| detection_row(&occ[e], n, row))
}

/// Single-objective evaluation of a raw slot sequence; infinite when an
/// element is never covered. Cheaper than [`evaluate`] for the
/// element-aggregated objectives, used by the search loops.
pub fn objective_of_slots(
    instance: &Instance,
    slots: &[Option<usize>],
    objective: Objective,
) -> f64 {
    let n = slots.len();
    let mut occ = vec![Vec::new(); instance.num_elements()];
    for (t, slot) in slots.iter().enumerate() {
        if let Some(test) = *slot {
            let test = instance.test(test);
            for (k, &e) in test.members().iter().enumerate() {
                if test.prob(k) > 0.0 {
                    occ[e].push(t);
                }
            }
        }
    }
    if occ.iter().any(|o| o.is_empty()) {
        return f64::INFINITY;
    }
    let p = instance.weights();
    match objective {
        Objective::EeEt | Objective::EeMt | Objective::MeMt | Objective::MeEt => {
            let mut acc = 0.0;
            let mut max = f64::NEG_INFINITY;
            for e in 0..instance.num_elements() {
                let (mt, sum) = gap_stats(&occ[e], n);
                let x = match objective {
                    Objective::EeEt | Objective::MeEt => p[e] * (sum / n as f64),
                    _ => p[e] * mt,
                };
                acc += x;
                max = max.max(x);
            }
            match objective {
                Objective::EeEt | Objective::EeMt => acc,
                _ => max,
            }
        }
        Objective::MtEe | Objective::EtMe => {
            let mut profile = vec![
                if objective == Objective::MtEe {
                    0.0
                } else {
                    f64::NEG_INFINITY
                };
                n
            ];
            let mut row = vec![0.0; n];
            for e in 0..instance.num_elements() {
                detection_row(&occ[e], n, &mut row);
                for t in 0..n {
                    let weighted = p[e] * row[t];
                    if objective == Objective::MtEe {
                        profile[t] += weighted;
                    } else {
                        profile[t] = profile[t].max(weighted);
                    }
                }
            }
            if objective == Objective::MtEe {
                profile.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            } else {
                let max = profile.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                anchored_mean(&profile, max)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Probabilistic evaluation
// ---------------------------------------------------------------------------

/// Evaluation under per-probe detection probabilities.
///
/// For a failure of `e` at slot `t`, the k-th subsequent probe detects it
/// with its probe's probability, independently across probes. With
/// `rho_e` the per-cycle survival product, the expectation is
/// `(sum_k k P_k + rho_e N) / (1 - rho_e)` over one cycle. Elements with
/// `rho_e = 1` are undetectable and reported as infinite.
///
/// With all probabilities equal to one, the output equals [`evaluate`]
/// bit for bit. Cost is quadratic in the cycle length per element.
pub fn evaluate_probabilistic(instance: &Instance, schedule: &CyclicSchedule) -> ObjectiveReport {
    let n = schedule.len();
    let n_elem = instance.num_elements();

    // Per-element probe success probability at each slot.
    let mut pi = vec![vec![0.0f64; n]; n_elem];
    for (t, slot) in schedule.slots().iter().enumerate() {
        if let Some(test) = *slot {
            let test = instance.test(test);
            for (k, &e) in test.members().iter().enumerate() {
                pi[e][t] = test.prob(k);
            }
        }
    }
    let undetectable: Vec<usize> = (0..n_elem)
        .filter(|&e| {
            let rho: f64 = pi[e].iter().map(|p| 1.0 - p).product();
            !(rho < 1.0)
        })
        .collect();

    let expected_row = |e: usize, row: &mut [f64]| {
        let pe = &pi[e];
        for (t, r) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            let mut survive = 1.0;
            for k in 1..=n {
                let prob = pe[(t + k - 1) % n];
                acc += k as f64 * survive * prob;
                survive *= 1.0 - prob;
            }
            // `survive` is now the full-cycle survival; the geometric
            // tail over repeated cycles closes the expectation.
            *r = (acc + survive * n as f64) / (1.0 - survive);
        }
    };

    if !undetectable.is_empty() {
        let mut mt = vec![f64::INFINITY; n_elem];
        let mut et = vec![f64::INFINITY; n_elem];
        let mut row = vec![0.0; n];
        for e in 0..n_elem {
            if !undetectable.contains(&e) {
                expected_row(e, &mut row);
                mt[e] = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                et[e] = row.iter().sum::<f64>() / n as f64;
            }
        }
        return unreachable_report(undetectable, mt, et);
    }

    let mut stats = ElementStats {
        mt: vec![0.0; n_elem],
        time_sum: vec![0.0; n_elem],
    };
    let mut row = vec![0.0; n];
    for e in 0..n_elem {
        expected_row(e, &mut row);
        stats.mt[e] = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        stats.time_sum[e] = row.iter().sum();
    }
    // Vanishing probabilities can push a per-offset survival product to
    // exactly one even though the whole-cycle precheck passed; treat the
    // element as undetectable rather than feeding infinities onward.
    let overflowed: Vec<usize> = (0..n_elem).filter(|&e| !stats.mt[e].is_finite()).collect();
    if !overflowed.is_empty() {
        let et = stats.time_sum.iter().map(|s| s / n as f64).collect();
        return unreachable_report(overflowed, stats.mt, et);
    }
    combine(instance, n, &stats, expected_row)
}

// ---------------------------------------------------------------------------
// Monte-Carlo validation of memoryless schedules
// ---------------------------------------------------------------------------

/// Empirical per-element detection-time samples from a memoryless
/// schedule: each sample draws i.i.d. tests from `q` until every element
/// has been detected (honoring detection probabilities).
#[derive(Debug, Clone)]
pub struct SimulationStats {
    /// Per element, sorted ascending; one entry per sample.
    times: Vec<Vec<f64>>,
}

impl SimulationStats {
    pub fn mean(&self, e: usize) -> f64 {
        self.times[e].iter().sum::<f64>() / self.times[e].len() as f64
    }

    /// Empirical quantile: smallest sample value with at least a `p`
    /// fraction of samples at or below it, `p` in (0, 1].
    pub fn percentile(&self, e: usize, p: f64) -> f64 {
        assert!(p > 0.0 && p <= 1.0);
        let xs = &self.times[e];
        let rank = ((p * xs.len() as f64).ceil() as usize).clamp(1, xs.len());
        xs[rank - 1]
    }

    pub fn samples(&self, e: usize) -> &[f64] {
        &self.times[e]
    }
}

/// Draws `samples` failure epochs and measures the detection time of
/// every element under i.i.d. probing from `q`. Means converge to
/// `1/Q_e`.
pub fn simulate_memoryless(
    instance: &Instance,
    q: &[f64],
    samples: usize,
    seed: u64,
) -> Result<SimulationStats> {
    assert_eq!(q.len(), instance.num_tests());
    if samples == 0 {
        return Err(Error::EmptyInput(
            "simulation needs at least one sample".into(),
        ));
    }
    // Every element needs positive probing rate or the loop below cannot
    // terminate.
    for e in 0..instance.num_elements() {
        let rate: f64 = instance
            .covering(e)
            .iter()
            .map(|c| c.prob * q[c.test])
            .sum();
        if !(rate > 0.0) {
            return Err(Error::Uncovered(instance.element_id(e).to_string()));
        }
    }
    let mut cumulative = Vec::with_capacity(q.len());
    let mut acc = 0.0;
    for &qi in q {
        acc += qi;
        cumulative.push(acc);
    }
    let total = acc;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times = vec![Vec::with_capacity(samples); instance.num_elements()];
    let mut undetected = Vec::new();
    for _ in 0..samples {
        undetected.clear();
        undetected.extend(0..instance.num_elements());
        let mut step = 0u64;
        while !undetected.is_empty() {
            step += 1;
            let x: f64 = rng.random_range(0.0..total);
            let test_idx = cumulative.partition_point(|&c| c <= x).min(q.len() - 1);
            let test = instance.test(test_idx);
            undetected.retain(|&e| {
                if let Ok(k) = test.members().binary_search(&e) {
                    let p = test.prob(k);
                    if p >= 1.0 || rng.random_bool(p) {
                        times[e].push(step as f64);
                        return false;
                    }
                }
                true
            });
        }
    }
    for t in &mut times {
        t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    Ok(SimulationStats { times })
}

// ---------------------------------------------------------------------------
// Reverse CDF export
// ---------------------------------------------------------------------------

/// Writes `value,fraction_of_elements_at_least` rows, one per distinct
/// value, sorted descending.
pub fn export_cdf(values: &[f64], out: &mut dyn std::io::Write) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyInput(
            "cdf export needs at least one value".into(),
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EmptyInput(
            "cdf export requires finite values".into(),
        ));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    writeln!(out, "value,fraction_of_elements_at_least")?;
    let total = sorted.len() as f64;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        writeln!(out, "{},{}", fmt_csv(v), j as f64 / total)?;
        i = j;
    }
    Ok(())
}

pub fn export_cdf_to_path(values: &[f64], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    export_cdf(values, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Schedule file format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleFile {
    cycle: Vec<Option<String>>,
    provenance: Provenance,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    approximate: bool,
}

impl CyclicSchedule {
    pub fn from_json(text: &str, instance: &Instance) -> Result<CyclicSchedule> {
        let file: ScheduleFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("schedule: {e}")))?;
        let ids: HashMap<&str, usize> = (0..instance.num_tests())
            .map(|t| (instance.test(t).id(), t))
            .collect();
        let mut slots = Vec::with_capacity(file.cycle.len());
        for entry in &file.cycle {
            match entry {
                None => slots.push(None),
                Some(id) => match ids.get(id.as_str()) {
                    Some(&t) => slots.push(Some(t)),
                    None => {
                        return Err(Error::Parse(format!(
                            "schedule references unknown test {id:?}"
                        )))
                    }
                },
            }
        }
        let mut sched = CyclicSchedule::new(slots, file.provenance)?;
        sched.approximate = file.approximate;
        Ok(sched)
    }

    pub fn to_json(&self, instance: &Instance) -> String {
        let file = ScheduleFile {
            cycle: self
                .slots
                .iter()
                .map(|s| s.map(|t| instance.test(t).id().to_string()))
                .collect(),
            provenance: self.provenance,
            approximate: self.approximate,
        };
        serde_json::to_string_pretty(&file).expect("schedule serialization")
    }

    pub fn read(path: &Path, instance: &Instance) -> Result<CyclicSchedule> {
        CyclicSchedule::from_json(&std::fs::read_to_string(path)?, instance)
    }

    pub fn write(&self, path: &Path, instance: &Instance) -> Result<()> {
        std::fs::write(path, self.to_json(instance) + "\n")?;
        Ok(())
    }
}
