//! The Kuhn-Tucker greedy scheduler: probe the test with the largest
//! priority-weighted squared staleness. Run off line it settles into a
//! cycle; run on line it adapts immediately when priorities change.

use probesched::evaluator::evaluate;
use probesched::instance::gen_singletons;
use probesched::kt::{kt_schedule, kt_step, KtState};

fn main() {
    let instance = gen_singletons(&[0.75, 0.25]).unwrap();
    let sched = kt_schedule(&instance, 1000).unwrap();
    let cycle: Vec<usize> = sched.slots().iter().map(|s| s.unwrap()).collect();
    let report = evaluate(&instance, &sched);
    println!(
        "priorities (0.75, 0.25): cycle {cycle:?}, EeEt = {}",
        report.ee_et
    );

    // On-line mode: feed steps by hand and flip the priorities midway.
    let before = gen_singletons(&[0.9, 0.05, 0.05]).unwrap();
    let after = gen_singletons(&[0.05, 0.9, 0.05]).unwrap();
    let mut state = KtState::new(3);
    let mut trace = Vec::new();
    for _ in 0..6 {
        trace.push(kt_step(&before, &mut state));
    }
    trace.push(usize::MAX); // marker: priorities flip here
    for _ in 0..6 {
        trace.push(kt_step(&after, &mut state));
    }
    let pretty: Vec<String> = trace
        .iter()
        .map(|&t| {
            if t == usize::MAX {
                "|flip|".to_string()
            } else {
                format!("t{t}")
            }
        })
        .collect();
    println!("on-line trace: {}", pretty.join(" "));
}
