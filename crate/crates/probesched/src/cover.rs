//! Greedy set-cover baseline scheduler: pick the test covering the most
//! still-uncovered elements until everything is covered, then cycle
//! through the picks in selection order. With uniform priorities the
//! cycle length equals the cover size, which is also the schedule's
//! MAX-family worst-case value.

use crate::error::{Error, Result};
use crate::evaluator::{CyclicSchedule, Provenance};
use crate::instance::Instance;

/// Greedy cover as a cyclic schedule; ties break to the lowest test
/// index. Errors if some element is uncovered by every test.
pub fn set_cover_schedule(instance: &Instance) -> Result<CyclicSchedule> {
    let n = instance.num_elements();
    let mut covered = vec![false; n];
    let mut remaining = n;
    let mut picks = Vec::new();
    while remaining > 0 {
        let mut best: Option<(usize, usize)> = None; // (gain, test)
        for t in 0..instance.num_tests() {
            let test = instance.test(t);
            let gain = test
                .members()
                .iter()
                .enumerate()
                .filter(|(k, &e)| !covered[e] && test.prob(*k) > 0.0)
                .count();
            if gain > 0 && best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, t));
            }
        }
        let Some((_, t)) = best else {
            let e = covered.iter().position(|&c| !c).unwrap();
            return Err(Error::Uncovered(instance.element_id(e).to_string()));
        };
        picks.push(t);
        let test = instance.test(t);
        for (k, &e) in test.members().iter().enumerate() {
            if !covered[e] && test.prob(k) > 0.0 {
                covered[e] = true;
                remaining -= 1;
            }
        }
    }
    CyclicSchedule::from_tests(picks, Provenance::SetCover)
}
