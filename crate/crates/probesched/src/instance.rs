//! Scheduling instances: elements with priorities, tests covering
//! element subsets, optional per-(test, element) detection probabilities.
//!
//! Element and test ids are opaque strings in files and are mapped to
//! dense integer indices internally; index order equals declaration
//! order, so constructions are reproducible.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use itertools::Itertools;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalization convention for element weights.
///
/// SUM objectives scale weights to sum to one; MAX objectives scale the
/// largest weight to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    Sum,
    Max,
}

/// Tolerance for checking that weights honor the declared mode.
pub const WEIGHT_MODE_TOL: f64 = 1e-12;

/// Test declaration for [`Instance::new`]: id, covered element ids, and
/// optional per-element detection probabilities.
pub type TestSpec = (String, Vec<String>, Option<HashMap<String, f64>>);

/// A single test: the subset of element indices it covers, with the
/// per-element detection probability (1 unless the instance declares a
/// probabilistic test).
#[derive(Debug, Clone, PartialEq)]
pub struct Test {
    id: String,
    members: Vec<usize>,
    detect_prob: Option<Vec<f64>>,
}

impl Test {
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Element indices covered by this test, ascending.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// Detection probability for the k-th member.
    pub fn prob(&self, k: usize) -> f64 {
        self.detect_prob.as_ref().map_or(1.0, |p| p[k])
    }
}

/// One (test, probability) pair covering an element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cover {
    pub test: usize,
    pub prob: f64,
}

/// An immutable scheduling instance. Safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    weight_mode: WeightMode,
    elements: Vec<String>,
    weights: Vec<f64>,
    tests: Vec<Test>,
    /// Per element: the tests covering it, with probabilities.
    covering: Vec<Vec<Cover>>,
}

impl Instance {
    /// Builds an instance from ids. Structural problems (duplicate ids,
    /// references to unknown elements) are hard errors; semantic problems
    /// (empty tests, uncovered elements, bad weights or probabilities)
    /// are reported by [`Instance::validate`] instead.
    pub fn new(
        weight_mode: WeightMode,
        elements: Vec<(String, f64)>,
        tests: Vec<TestSpec>,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(elements.len());
        for (i, (id, _)) in elements.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::Malformed(format!("duplicate element id {id:?}")));
            }
        }
        let mut seen_tests = HashMap::new();
        let mut built = Vec::with_capacity(tests.len());
        for (t, (id, members, probs)) in tests.into_iter().enumerate() {
            if seen_tests.insert(id.clone(), t).is_some() {
                return Err(Error::Malformed(format!("duplicate test id {id:?}")));
            }
            let mut idx = Vec::with_capacity(members.len());
            for m in &members {
                let Some(&e) = index.get(m) else {
                    return Err(Error::Malformed(format!(
                        "test {id:?} references unknown element {m:?}"
                    )));
                };
                idx.push(e);
            }
            idx.sort_unstable();
            if idx.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Malformed(format!(
                    "test {id:?} lists an element twice"
                )));
            }
            let detect_prob = match probs {
                None => None,
                Some(map) => {
                    let mut p = vec![1.0; idx.len()];
                    for (elem, prob) in map {
                        let Some(&e) = index.get(&elem) else {
                            return Err(Error::Malformed(format!(
                                "test {id:?} detect_prob references unknown element {elem:?}"
                            )));
                        };
                        let Ok(k) = idx.binary_search(&e) else {
                            return Err(Error::Malformed(format!(
                                "test {id:?} detect_prob references element {elem:?} it does not cover"
                            )));
                        };
                        p[k] = prob;
                    }
                    Some(p)
                }
            };
            built.push(Test {
                id,
                members: idx,
                detect_prob,
            });
        }
        let (elements, weights) = elements.into_iter().unzip();
        Ok(Self::from_parts(weight_mode, elements, weights, built))
    }

    /// Index-based constructor used by generators. Member indices must be
    /// in range, sorted, and unique.
    pub(crate) fn from_parts(
        weight_mode: WeightMode,
        elements: Vec<String>,
        weights: Vec<f64>,
        tests: Vec<Test>,
    ) -> Self {
        let mut covering = vec![Vec::new(); elements.len()];
        for (t, test) in tests.iter().enumerate() {
            for (k, &e) in test.members.iter().enumerate() {
                covering[e].push(Cover {
                    test: t,
                    prob: test.prob(k),
                });
            }
        }
        Self {
            weight_mode,
            elements,
            weights,
            tests,
            covering,
        }
    }

    pub(crate) fn make_test(id: String, members: Vec<usize>) -> Test {
        Test {
            id,
            members,
            detect_prob: None,
        }
    }

    pub fn weight_mode(&self) -> WeightMode {
        self.weight_mode
    }

    /// Number of elements.
    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Number of tests.
    pub fn num_tests(&self) -> usize {
        self.tests.len()
    }

    pub fn element_id(&self, e: usize) -> &str {
        &self.elements[e]
    }

    pub fn element_index(&self, id: &str) -> Option<usize> {
        self.elements.iter().position(|x| x == id)
    }

    pub fn test_index(&self, id: &str) -> Option<usize> {
        self.tests.iter().position(|x| x.id == id)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, e: usize) -> f64 {
        self.weights[e]
    }

    pub fn tests(&self) -> &[Test] {
        &self.tests
    }

    pub fn test(&self, t: usize) -> &Test {
        &self.tests[t]
    }

    /// Tests covering element `e` with their detection probabilities.
    pub fn covering(&self, e: usize) -> &[Cover] {
        &self.covering[e]
    }

    /// Number of tests covering element `e` with positive probability.
    pub fn coverage_count(&self, e: usize) -> usize {
        self.covering[e].iter().filter(|c| c.prob > 0.0).count()
    }

    /// Maximum coverage count over elements.
    pub fn max_coverage(&self) -> usize {
        (0..self.num_elements())
            .map(|e| self.coverage_count(e))
            .max()
            .unwrap_or(0)
    }

    /// True if any test declares a detection probability below one.
    pub fn is_probabilistic(&self) -> bool {
        self.tests.iter().any(|t| {
            t.detect_prob
                .as_ref()
                .is_some_and(|p| p.iter().any(|&x| x < 1.0))
        })
    }

    /// Semantic validation. Returns all violations; an empty report means
    /// the instance satisfies the model invariants.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (e, id) in self.elements.iter().enumerate() {
            if !(self.weights[e] > 0.0) || !self.weights[e].is_finite() {
                violations.push(Violation::NonPositiveWeight {
                    element: id.clone(),
                    weight: self.weights[e],
                });
            }
            if !self.covering[e].iter().any(|c| c.prob > 0.0) {
                violations.push(Violation::UncoveredElement {
                    element: id.clone(),
                });
            }
        }
        for test in &self.tests {
            if test.members.is_empty() {
                violations.push(Violation::EmptyTest {
                    test: test.id.clone(),
                });
            }
            if let Some(probs) = &test.detect_prob {
                for (k, &p) in probs.iter().enumerate() {
                    if !(p > 0.0 && p <= 1.0) {
                        violations.push(Violation::DetectProbOutOfRange {
                            test: test.id.clone(),
                            element: self.elements[test.members[k]].clone(),
                            prob: p,
                        });
                    }
                }
            }
        }
        let scale: f64 = match self.weight_mode {
            WeightMode::Sum => self.weights.iter().sum(),
            WeightMode::Max => self
                .weights
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max),
        };
        if (scale - 1.0).abs() > WEIGHT_MODE_TOL {
            violations.push(Violation::WeightModeMismatch {
                mode: self.weight_mode,
                scale,
            });
        }
        ValidationReport { violations }
    }

    /// Restriction to a subset of tests (all elements kept). Used to
    /// seed solvers with a pre-selected test pool; the caller is
    /// responsible for picking a subset that still covers every element.
    pub fn restrict_tests(&self, keep: &[usize]) -> Result<Instance> {
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.iter().any(|&t| t >= self.tests.len()) {
            return Err(Error::Malformed("test subset index out of range".into()));
        }
        if sorted.is_empty() {
            return Err(Error::EmptyInput("test subset is empty".into()));
        }
        let tests = sorted.iter().map(|&t| self.tests[t].clone()).collect();
        Ok(Instance::from_parts(
            self.weight_mode,
            self.elements.clone(),
            self.weights.clone(),
            tests,
        ))
    }

    /// Returns a copy with weights rescaled by a single positive factor
    /// so the mode's invariant holds exactly; relative weights unchanged.
    pub fn normalize(&self, mode: WeightMode) -> Result<Instance> {
        let scale: f64 = match mode {
            WeightMode::Sum => self.weights.iter().sum(),
            WeightMode::Max => self
                .weights
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max),
        };
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Malformed(
                "cannot normalize: weights sum or maximum is not positive".into(),
            ));
        }
        let mut out = self.clone();
        out.weight_mode = mode;
        for w in &mut out.weights {
            *w /= scale;
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Validation report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyTest {
        test: String,
    },
    UncoveredElement {
        element: String,
    },
    NonPositiveWeight {
        element: String,
        weight: f64,
    },
    DetectProbOutOfRange {
        test: String,
        element: String,
        prob: f64,
    },
    WeightModeMismatch {
        mode: WeightMode,
        scale: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyTest { test } => write!(f, "test {test:?} covers no elements"),
            Violation::UncoveredElement { element } => {
                write!(f, "element {element:?} uncovered by every test")
            }
            Violation::NonPositiveWeight { element, weight } => {
                write!(f, "element {element:?} has non-positive weight {weight}")
            }
            Violation::DetectProbOutOfRange {
                test,
                element,
                prob,
            } => write!(
                f,
                "test {test:?} detection probability {prob} for element {element:?} outside (0, 1]"
            ),
            Violation::WeightModeMismatch { mode, scale } => write!(
                f,
                "weights not {mode:?}-normalized (scale {scale}, expected 1)"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    /// Errors out unless the report is clean.
    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::Invalid(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Instance with one test per element. Weights are SUM-normalized.
pub fn gen_singletons(weights: &[f64]) -> Result<Instance> {
    if weights.is_empty() {
        return Err(Error::Generator(
            "singletons: need at least one element".into(),
        ));
    }
    let elements: Vec<String> = (0..weights.len()).map(|e| format!("e{e}")).collect();
    let tests = (0..weights.len())
        .map(|e| Instance::make_test(format!("t{e}"), vec![e]))
        .collect();
    Instance::from_parts(WeightMode::Sum, elements, weights.to_vec(), tests)
        .normalize(WeightMode::Sum)
}

/// Folded-Clos fabric generator.
///
/// The fabric has `levels` switch tiers with `radix` switches per tier
/// and full bipartite wiring between consecutive tiers, so each switch
/// has `radix` down-ports and `radix` up-ports. Elements are the
/// inter-tier links; probes run between tier-1 (leaf) switches, and the
/// tests are all simple valley-free up/down paths between distinct leaf
/// pairs, one per apex tier `h in 2..=levels` and per choice of
/// intermediate switches (the switch revisited on the way down must
/// differ from the one used on the way up at every shared tier).
///
/// Enumeration order is deterministic: leaf pairs ascending, apex
/// ascending, intermediate switch tuples in odometer order. Test ids
/// name the switch route, e.g. `t1s0/t2s1/t1s1`. Weights are uniform and
/// SUM-normalized.
pub fn gen_clos(levels: usize, radix: usize) -> Result<Instance> {
    if levels < 2 {
        return Err(Error::Generator(format!(
            "clos: need at least 2 levels, got {levels}"
        )));
    }
    if radix < 2 {
        return Err(Error::Generator(format!(
            "clos: need radix at least 2, got {radix}"
        )));
    }
    let r = radix;
    // Link between tier j switch a and tier j+1 switch b, j in 1..levels.
    let link = |j: usize, a: usize, b: usize| (j - 1) * r * r + a * r + b;
    let n = (levels - 1) * r * r;
    let elements: Vec<String> = (1..levels)
        .flat_map(|j| {
            (0..r).flat_map(move |a| (0..r).map(move |b| format!("t{j}s{a}-t{}s{b}", j + 1)))
        })
        .collect();
    debug_assert_eq!(elements.len(), n);

    let mut tests = Vec::new();
    for s in 0..r {
        for s2 in s + 1..r {
            for apex in 2..=levels {
                // up[0] is the tier-2 switch above the source leaf, up
                // ends at the apex; down mirrors it back to the sink.
                let shared = apex.saturating_sub(2); // tiers 2..apex-1 visited twice
                let mut odo = vec![0usize; (apex - 1) + shared];
                loop {
                    let up = &odo[..apex - 1];
                    let down = &odo[apex - 1..];
                    if down.iter().zip(up).all(|(d, u)| d != u) {
                        let mut members = Vec::new();
                        let mut route = vec![format!("t1s{s}")];
                        let mut lower = s;
                        for (j, &u) in up.iter().enumerate() {
                            members.push(link(j + 1, lower, u));
                            route.push(format!("t{}s{u}", j + 2));
                            lower = u;
                        }
                        // Descend: tiers apex-1 .. 2 use the `down`
                        // switches, tier 1 is the sink leaf.
                        let mut upper = lower;
                        for (k, &d) in down.iter().rev().enumerate() {
                            let j = apex - 1 - k; // link between tier j and j+1
                            members.push(link(j, d, upper));
                            route.push(format!("t{j}s{d}"));
                            upper = d;
                        }
                        members.push(link(1, s2, upper));
                        route.push(format!("t1s{s2}"));
                        members.sort_unstable();
                        members.dedup();
                        tests.push(Instance::make_test(route.join("/"), members));
                    }
                    // Odometer increment, last coordinate fastest.
                    let mut pos = odo.len();
                    loop {
                        if pos == 0 {
                            break;
                        }
                        pos -= 1;
                        odo[pos] += 1;
                        if odo[pos] < r {
                            break;
                        }
                        odo[pos] = 0;
                    }
                    if odo.iter().all(|&x| x == 0) {
                        break;
                    }
                }
            }
        }
    }
    if tests.is_empty() {
        return Err(Error::Generator("clos: parameters yield zero paths".into()));
    }
    Instance::from_parts(WeightMode::Sum, elements, vec![1.0; n], tests).normalize(WeightMode::Sum)
}

/// Combinatorial family in which every `ell`-subset of the `m` tests has
/// exactly one common element: one element per subset, covered precisely
/// by the tests in it. Uniform SUM-normalized weights.
pub fn gen_lowerbound(m: usize, ell: usize, cap: usize) -> Result<Instance> {
    if ell < 1 || 2 * ell > m {
        return Err(Error::Generator(format!(
            "lowerbound: need 1 <= ell <= m/2, got m={m} ell={ell}"
        )));
    }
    let n = binomial(m, ell)
        .filter(|&n| n <= cap)
        .ok_or_else(|| Error::CapExceeded(format!("lowerbound: C({m},{ell}) exceeds cap {cap}")))?;
    let mut elements = Vec::with_capacity(n);
    let mut members_of_test: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (e, subset) in (0..m).combinations(ell).enumerate() {
        let id = format!(
            "e{}",
            subset
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join("-")
        );
        elements.push(id);
        for &t in &subset {
            members_of_test[t].push(e);
        }
    }
    debug_assert_eq!(elements.len(), n);
    let tests = members_of_test
        .into_iter()
        .enumerate()
        .map(|(t, members)| Instance::make_test(format!("t{t}"), members))
        .collect();
    Instance::from_parts(WeightMode::Sum, elements, vec![1.0; n], tests).normalize(WeightMode::Sum)
}

fn binomial(m: usize, k: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(m - i)? / (i + 1);
    }
    Some(acc)
}

/// Random instance with `n` elements and `m` tests. Each test covers each
/// element independently with probability 1/2 (redrawn if empty); any
/// element left uncovered is added to a random test. Weights are drawn
/// uniformly from [0.5, 2) and SUM-normalized.
pub fn gen_random(n: usize, m: usize, seed: u64) -> Result<Instance> {
    if n == 0 || m == 0 {
        return Err(Error::Generator("random: need n >= 1 and m >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let mut members_of_test: Vec<Vec<usize>> = Vec::with_capacity(m);
    for _ in 0..m {
        loop {
            let members: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
            if !members.is_empty() {
                members_of_test.push(members);
                break;
            }
        }
    }
    for e in 0..n {
        if !members_of_test.iter().any(|t| t.contains(&e)) {
            let t = rng.random_range(0..m);
            members_of_test[t].push(e);
            members_of_test[t].sort_unstable();
        }
    }
    let elements = (0..n).map(|e| format!("e{e}")).collect();
    let tests = members_of_test
        .into_iter()
        .enumerate()
        .map(|(t, members)| Instance::make_test(format!("t{t}"), members))
        .collect();
    Instance::from_parts(WeightMode::Sum, elements, weights, tests).normalize(WeightMode::Sum)
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    weight_mode: WeightMode,
    elements: Vec<ElementFile>,
    tests: Vec<TestFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementFile {
    id: String,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TestFile {
    id: String,
    elements: Vec<String>,
    // Ordered so emitted files are byte-identical across runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    detect_prob: Option<BTreeMap<String, f64>>,
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Instance> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("instance: {e}")))?;
        Instance::new(
            file.weight_mode,
            file.elements
                .into_iter()
                .map(|e| (e.id, e.weight))
                .collect(),
            file.tests
                .into_iter()
                .map(|t| {
                    let probs = t.detect_prob.map(|m| m.into_iter().collect());
                    (t.id, t.elements, probs)
                })
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            weight_mode: self.weight_mode,
            elements: self
                .elements
                .iter()
                .zip(&self.weights)
                .map(|(id, &weight)| ElementFile {
                    id: id.clone(),
                    weight,
                })
                .collect(),
            tests: self
                .tests
                .iter()
                .map(|t| TestFile {
                    id: t.id.clone(),
                    elements: t
                        .members
                        .iter()
                        .map(|&e| self.elements[e].clone())
                        .collect(),
                    detect_prob: t.detect_prob.as_ref().map(|p| {
                        t.members
                            .iter()
                            .zip(p)
                            .map(|(&e, &prob)| (self.elements[e].clone(), prob))
                            .collect()
                    }),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("instance serialization")
    }

    pub fn read(path: &Path) -> Result<Instance> {
        Instance::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}
