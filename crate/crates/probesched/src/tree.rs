//! Tree schedules: map tests onto binary-tree nodes and read the cyclic
//! schedule off the leaves.
//!
//! A test mapped to level `L` with offset `o` occupies every slot
//! `t = o (mod 2^L)` of the level-N schedule, so it is probed at exact
//! period `2^L`. A mapping is feasible when no test's node is an
//! ancestor of another's (prefix-free), which is satisfiable
//! whenever the Kraft sum `sum 2^-L_i` is at most one.
//!
//! [`round_frequencies`] turns arbitrary probing frequencies into levels
//! by `L_i = ceil(log2(1/q_i))`, which keeps each test's realized
//! frequency within a factor of two of the request and never violates
//! the Kraft bound. [`r_tree`] draws K random mappings, scores the
//! level-`L_max` schedule of each on the requested objective, and keeps
//! the best.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::{objective_of_slots, CyclicSchedule, Objective, Provenance};
use crate::instance::Instance;
use crate::kt::KtState;

/// Deepest level a rounded frequency may occupy; cycles have at most
/// 2^20 slots. Tests rarer than 2^-20 are clamped, and dropped smallest
/// first if clamping pushes the Kraft sum above one.
pub const LEVEL_CAP: u32 = 20;

/// Assignment of tests to binary-tree nodes: level (root = 0) and offset
/// within the level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeMapping {
    /// (test index, level, offset), offset < 2^level.
    entries: Vec<(usize, u32, u64)>,
    max_level: u32,
}

impl TreeMapping {
    /// Builds a mapping after checking offsets and the prefix-free
    /// property.
    pub fn new(entries: Vec<(usize, u32, u64)>) -> Result<Self> {
        for &(test, level, offset) in &entries {
            if level > LEVEL_CAP {
                return Err(Error::Infeasible(format!(
                    "test {test} level {level} above cap {LEVEL_CAP}"
                )));
            }
            if offset >= 1u64 << level {
                return Err(Error::Infeasible(format!(
                    "test {test} offset {offset} out of range for level {level}"
                )));
            }
        }
        for (a, &(ta, la, oa)) in entries.iter().enumerate() {
            for &(tb, lb, ob) in entries.iter().skip(a + 1) {
                let (lo_level, lo_off, hi_off) = if la <= lb { (la, oa, ob) } else { (lb, ob, oa) };
                if hi_off & ((1u64 << lo_level) - 1) == lo_off {
                    return Err(Error::Infeasible(format!(
                        "tests {ta} and {tb} map to nested tree nodes"
                    )));
                }
            }
        }
        let max_level = entries.iter().map(|&(_, l, _)| l).max().unwrap_or(0);
        Ok(Self { entries, max_level })
    }

    pub fn entries(&self) -> &[(usize, u32, u64)] {
        &self.entries
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn kraft_sum(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, l, _)| (0.5f64).powi(l as i32))
            .sum()
    }
}

/// Levels assigned to each test by frequency rounding; `None` marks a
/// dropped test (zero frequency, or sacrificed to the level cap).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundedLevels {
    pub levels: Vec<Option<u32>>,
    pub warnings: Vec<String>,
}

/// `L_i = ceil(log2(1/q_i))`, snapping exact powers of two so that
/// `q = 2^-L` lands on level L. The rounded rate `2^-L_i` never exceeds
/// `q_i`, so the Kraft sum of the kept tests is at most one.
pub fn round_frequencies(q: &[f64]) -> RoundedLevels {
    let mut levels = Vec::with_capacity(q.len());
    let mut warnings = Vec::new();
    for (i, &qi) in q.iter().enumerate() {
        if !(qi > 0.0) {
            warnings.push(format!("test {i}: zero frequency, dropped"));
            levels.push(None);
            continue;
        }
        let raw = (1.0 / qi).log2();
        let snapped = if (raw - raw.round()).abs() < 1e-9 {
            raw.round()
        } else {
            raw.ceil()
        };
        let level = snapped.max(0.0) as u32;
        if level > LEVEL_CAP {
            warnings.push(format!(
                "test {i}: frequency {qi:.3e} below 2^-{LEVEL_CAP}, clamped"
            ));
            levels.push(Some(LEVEL_CAP));
        } else {
            levels.push(Some(level));
        }
    }
    // Clamping can only have raised the Kraft sum; restore feasibility by
    // dropping the rarest tests.
    let kraft = |levels: &[Option<u32>]| -> f64 {
        levels
            .iter()
            .flatten()
            .map(|&l| (0.5f64).powi(l as i32))
            .sum()
    };
    while kraft(&levels) > 1.0 + 1e-12 {
        let victim = q
            .iter()
            .enumerate()
            .filter(|(i, _)| levels[*i].is_some())
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .expect("non-empty levels while Kraft > 1");
        warnings.push(format!(
            "test {victim}: dropped to restore Kraft feasibility"
        ));
        levels[victim] = None;
    }
    RoundedLevels { levels, warnings }
}

/// Assigns tests to tree nodes level by level. At each level the tests
/// of that level are matched to available nodes; `pick` chooses which
/// nodes from the availability list and removes them.
fn map_levels(
    levels: &RoundedLevels,
    mut pick: impl FnMut(usize, &mut Vec<u64>) -> Vec<u64>,
) -> Result<TreeMapping> {
    let max_level = levels.levels.iter().flatten().copied().max().unwrap_or(0);
    let mut available: Vec<u64> = vec![0]; // root offset at level 0
    let mut entries = Vec::new();
    for level in 0..=max_level {
        let tests: Vec<usize> = levels
            .levels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Some(level))
            .map(|(i, _)| i)
            .collect();
        if tests.len() > available.len() {
            return Err(Error::Infeasible(format!(
                "level {level}: {} tests for {} available nodes (Kraft sum above one)",
                tests.len(),
                available.len()
            )));
        }
        if !tests.is_empty() {
            let chosen = pick(tests.len(), &mut available);
            debug_assert_eq!(chosen.len(), tests.len());
            for (&test, &offset) in tests.iter().zip(&chosen) {
                entries.push((test, level, offset));
            }
        }
        if level < max_level {
            // Children of the surviving nodes: offsets o and o + 2^level.
            let mut next = Vec::with_capacity(available.len() * 2);
            for &o in &available {
                next.push(o);
                next.push(o + (1u64 << level));
            }
            available = next;
        }
    }
    TreeMapping::new(entries)
}

/// Random mapping: at each level the tests of that level go to a
/// uniformly random choice of available nodes (a random bijection when
/// the level is full). Always succeeds when the Kraft sum is at most one.
pub fn map_random(levels: &RoundedLevels, seed: u64) -> Result<TreeMapping> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    map_levels(levels, |count, available| {
        available.shuffle(&mut rng);
        let chosen: Vec<u64> = available[..count].to_vec();
        available.drain(..count);
        chosen
    })
}

/// Deterministic mapping: ascending level, then ascending offset among
/// the available nodes. Useful for reproducible documentation runs.
pub fn map_canonical(levels: &RoundedLevels) -> Result<TreeMapping> {
    map_levels(levels, |count, available| {
        available.sort_unstable();
        let chosen: Vec<u64> = available[..count].to_vec();
        available.drain(..count);
        chosen
    })
}

/// The level-N schedule of a mapping: slot `t` probes the unique test
/// with `t = offset (mod 2^level)`, idle where no test claims the slot.
/// Level-N schedules of one mapping are consistent across N: doubling N
/// concatenates two copies and fills in deeper tests.
pub fn schedule_from_mapping(mapping: &TreeMapping, n: u32) -> Result<Vec<Option<usize>>> {
    if n < mapping.max_level() {
        return Err(Error::Infeasible(format!(
            "level-{n} schedule cannot hold a level-{} test",
            mapping.max_level()
        )));
    }
    if n > LEVEL_CAP {
        return Err(Error::Infeasible(format!(
            "level {n} above cap {LEVEL_CAP}"
        )));
    }
    let len = 1usize << n;
    let mut slots: Vec<Option<usize>> = vec![None; len];
    for &(test, level, offset) in mapping.entries() {
        let period = 1usize << level;
        let mut t = offset as usize;
        while t < len {
            debug_assert!(slots[t].is_none(), "prefix-free mapping cannot collide");
            slots[t] = Some(test);
            t += period;
        }
    }
    Ok(slots)
}

/// Policy for slots no test claims.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FillPolicy {
    /// Fill each idle slot with the test a Kuhn-Tucker step would pick
    /// given the schedule built so far (default: idle probes waste
    /// budget).
    KtStep,
    /// Keep idle slots as explicit no-op probes.
    Noop,
}

/// Resolves idle slots per the policy. The KT fill walks the cycle once
/// with fresh counters, applying assigned probes and greedily choosing a
/// test at each idle slot.
pub fn fill_idle_slots(
    instance: &Instance,
    mut slots: Vec<Option<usize>>,
    policy: FillPolicy,
) -> Vec<Option<usize>> {
    match policy {
        FillPolicy::Noop => slots,
        FillPolicy::KtStep => {
            let mut state = KtState::new(instance.num_elements());
            for slot in slots.iter_mut() {
                match *slot {
                    Some(test) => state.apply(instance, test),
                    None => {
                        let test = state.best_test(instance);
                        state.apply(instance, test);
                        *slot = Some(test);
                    }
                }
            }
            slots
        }
    }
}

/// Best-of-K randomized tree scheduler: rounds `q` to power-of-two
/// levels, draws `trials` random mappings (trial k uses `seed + k`),
/// scores each level-`L_max` schedule on `objective`, and returns the
/// best (ties to the lowest trial index).
///
/// Seed the frequencies from the SUM solver for SUM objectives and from
/// the MAX solver for MAX objectives.
pub fn r_tree(
    instance: &Instance,
    q: &[f64],
    objective: Objective,
    trials: usize,
    seed: u64,
    fill: FillPolicy,
) -> Result<CyclicSchedule> {
    if trials == 0 {
        return Err(Error::EmptyInput("r_tree needs at least one trial".into()));
    }
    let rounded = round_frequencies(q);
    if rounded.levels.iter().all(|l| l.is_none()) {
        return Err(Error::Infeasible("all tests dropped by rounding".into()));
    }
    let mut best: Option<(f64, Vec<Option<usize>>)> = None;
    for trial in 0..trials {
        let mapping = map_random(&rounded, seed.wrapping_add(trial as u64))?;
        let raw = schedule_from_mapping(&mapping, mapping.max_level())?;
        let slots = fill_idle_slots(instance, raw, fill);
        let value = objective_of_slots(instance, &slots, objective);
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, slots));
        }
    }
    let (_, slots) = best.expect("at least one trial ran");
    CyclicSchedule::new(slots, Provenance::RTree)
}

// ---------------------------------------------------------------------------
// Mapping debug file
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingFile {
    tests: Vec<MappingEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingEntry {
    id: String,
    level: u32,
    offset: u64,
}

impl TreeMapping {
    pub fn to_json(&self, instance: &Instance) -> String {
        let file = MappingFile {
            tests: self
                .entries
                .iter()
                .map(|&(test, level, offset)| MappingEntry {
                    id: instance.test(test).id().to_string(),
                    level,
                    offset,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("mapping serialization")
    }

    pub fn from_json(text: &str, instance: &Instance) -> Result<TreeMapping> {
        let file: MappingFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("mapping: {e}")))?;
        let mut entries = Vec::with_capacity(file.tests.len());
        for entry in file.tests {
            let Some(t) = instance.test_index(&entry.id) else {
                return Err(Error::Parse(format!(
                    "mapping references unknown test {:?}",
                    entry.id
                )));
            };
            entries.push((t, entry.level, entry.offset));
        }
        TreeMapping::new(entries)
    }
}
