//! Reverse CDFs of detection statistics: what fraction of elements still
//! waits at least x probes? Memoryless schedules are compared through
//! expected times and tail percentiles (Monte-Carlo checked against the
//! geometric closed form); deterministic schedules expose their
//! worst-case times directly.

use probesched::evaluator::{evaluate, export_cdf, simulate_memoryless};
use probesched::instance::gen_lowerbound;
use probesched::memoryless::{coverage_rates, solve_sum, SolveConfig};
use probesched::tree::{r_tree, FillPolicy};
use probesched::Objective;

fn print_cdf(label: &str, values: &[f64]) {
    let mut buf = Vec::new();
    export_cdf(values, &mut buf).unwrap();
    println!("{label}:");
    for line in String::from_utf8(buf).unwrap().lines() {
        println!("  {line}");
    }
}

fn main() {
    let instance = gen_lowerbound(6, 3, 10_000).unwrap();
    let freqs = solve_sum(&instance, &SolveConfig::default()).unwrap();
    let rates = coverage_rates(&instance, &freqs.q);

    let expected: Vec<f64> = rates.iter().map(|&r| 1.0 / r).collect();
    print_cdf("memoryless expected detection times", &expected);

    let stats = simulate_memoryless(&instance, &freqs.q, 50_000, 0).unwrap();
    let p99: Vec<f64> = (0..instance.num_elements())
        .map(|e| stats.percentile(e, 0.99))
        .collect();
    print_cdf("memoryless 99th percentiles (50k samples)", &p99);
    let analytic = (0.01f64.ln() / (1.0 - rates[0]).ln()).ceil();
    println!("  (geometric closed form: {analytic})");

    let sched = r_tree(
        &instance,
        &freqs.q,
        Objective::EeMt,
        32,
        0,
        FillPolicy::KtStep,
    )
    .unwrap();
    let report = evaluate(&instance, &sched);
    print_cdf("tree-schedule worst-case detection times", &report.mt);
}
