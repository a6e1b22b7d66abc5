//! Brute-force ground truth for tiny instances: exact deterministic
//! optima per objective by exhaustive cycle enumeration, grid
//! verification of the memoryless optima, and exhaustive minimum set
//! cover. Everything here is deliberately simple and independent of the
//! production solvers so it can serve as their oracle.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::evaluator::{
    objective_of_slots, CyclicSchedule, Objective, ObjectiveFamily, Provenance,
};
use crate::instance::Instance;

/// Bounds for the exhaustive searches.
#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Longest cycle enumerated; `None` picks twice the minimum cover
    /// size, which keeps the search meaningful for gap experiments.
    pub max_len: Option<usize>,
    /// Enumeration abort threshold on m^max_len.
    pub node_cap: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            max_len: None,
            node_cap: 2_000_000,
        }
    }
}

/// True if `slots` is the lexicographically smallest among its rotations;
/// rotations of a cycle are the same schedule.
fn is_canonical_rotation(slots: &[usize]) -> bool {
    let n = slots.len();
    for shift in 1..n {
        for i in 0..n {
            match slots[(i + shift) % n].cmp(&slots[i]) {
                std::cmp::Ordering::Less => return false,
                std::cmp::Ordering::Greater => break,
                std::cmp::Ordering::Equal => continue,
            }
        }
    }
    true
}

/// Exact minimum of `objective` over all cycles of length 1..=max_len,
/// by exhaustive enumeration with rotation canonicalization.
pub fn det_optimum(
    instance: &Instance,
    objective: Objective,
    config: &OracleConfig,
) -> Result<(f64, CyclicSchedule)> {
    let m = instance.num_tests();
    if m == 0 {
        return Err(Error::EmptyInput("no tests".into()));
    }
    let max_len = match config.max_len {
        Some(len) => len,
        None => 2 * min_cover_size(instance)?,
    };
    if max_len == 0 {
        return Err(Error::EmptyInput("max_len must be at least 1".into()));
    }
    let nodes = (m as u64).checked_pow(max_len as u32);
    match nodes {
        Some(n) if n <= config.node_cap => {}
        _ => {
            return Err(Error::CapExceeded(format!(
                "det_optimum: {m}^{max_len} exceeds node cap {}",
                config.node_cap
            )))
        }
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut slots: Vec<Option<usize>> = Vec::new();
    for len in 1..=max_len {
        let mut seq = vec![0usize; len];
        loop {
            if is_canonical_rotation(&seq) {
                slots.clear();
                slots.extend(seq.iter().map(|&t| Some(t)));
                let value = objective_of_slots(instance, &slots, objective);
                if value.is_finite() && best.as_ref().is_none_or(|(b, _)| value < *b) {
                    best = Some((value, seq.clone()));
                }
            }
            // Odometer over test indices, last position fastest.
            let mut pos = len;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                seq[pos] += 1;
                if seq[pos] < m {
                    break;
                }
                seq[pos] = 0;
            }
            if seq.iter().all(|&t| t == 0) {
                break;
            }
        }
    }
    let (value, seq) = best.ok_or_else(|| {
        Error::Infeasible(format!(
            "no cycle of length <= {max_len} covers every element"
        ))
    })?;
    Ok((value, CyclicSchedule::from_tests(seq, Provenance::Manual)?))
}

/// Minimum of the closed-form memoryless objective over the simplex grid
/// `q_i = k_i / steps`. Upper-bounds the true optimum with a slack that
/// shrinks with the resolution.
pub fn memoryless_grid(
    instance: &Instance,
    family: ObjectiveFamily,
    resolution: f64,
) -> Result<f64> {
    let m = instance.num_tests();
    if m == 0 {
        return Err(Error::EmptyInput("no tests".into()));
    }
    if m > 4 {
        return Err(Error::CapExceeded(format!(
            "memoryless_grid supports at most 4 tests, got {m}"
        )));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::Generator("grid resolution must be in (0, 1]".into()));
    }
    let steps = (1.0 / resolution).round().max(1.0) as usize;
    let p = instance.weights();
    let mut best = f64::INFINITY;
    let mut q = vec![0.0; m];
    // All compositions of `steps` into m parts.
    let mut counts = vec![0usize; m];
    counts[m - 1] = steps;
    loop {
        for (qi, &count) in q.iter_mut().zip(&counts) {
            *qi = count as f64 / steps as f64;
        }
        let mut value: f64 = 0.0;
        let mut ok = true;
        for e in 0..instance.num_elements() {
            let rate: f64 = instance
                .covering(e)
                .iter()
                .map(|c| c.prob * q[c.test])
                .sum();
            if !(rate > 0.0) {
                ok = false;
                break;
            }
            match family {
                ObjectiveFamily::Sum => value += p[e] / rate,
                ObjectiveFamily::Max => value = value.max(p[e] / rate),
            }
        }
        if ok && value < best {
            best = value;
        }
        // Next composition: move one unit left-to-right odometer style.
        if counts[0] == steps {
            break;
        }
        let mut i = m - 1;
        while counts[i] == 0 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        let rest = counts[i] - 1;
        counts[i] = 0;
        counts[i - 1] += 1;
        counts[m - 1] = rest;
    }
    if best.is_infinite() {
        return Err(Error::Infeasible(
            "no grid point covers every element".into(),
        ));
    }
    Ok(best)
}

/// Exhaustive minimum set cover size; supports up to 20 tests.
pub fn min_cover_size(instance: &Instance) -> Result<usize> {
    let m = instance.num_tests();
    let n = instance.num_elements();
    if m > 20 {
        return Err(Error::CapExceeded(format!(
            "exhaustive cover search supports at most 20 tests, got {m}"
        )));
    }
    if n > 64 {
        return Err(Error::CapExceeded(format!(
            "exhaustive cover search supports at most 64 elements, got {n}"
        )));
    }
    let masks: Vec<u64> = (0..m)
        .map(|t| {
            instance
                .test(t)
                .members()
                .iter()
                .enumerate()
                .filter(|(k, _)| instance.test(t).prob(*k) > 0.0)
                .fold(0u64, |acc, (_, &e)| acc | (1 << e))
        })
        .collect();
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    for size in 1..=m {
        for combo in (0..m).combinations(size) {
            let mut acc = 0u64;
            for &t in &combo {
                acc |= masks[t];
            }
            if acc == full {
                return Ok(size);
            }
        }
    }
    Err(Error::Infeasible("no cover exists".into()))
}
