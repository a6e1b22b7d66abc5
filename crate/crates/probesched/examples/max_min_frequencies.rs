//! Worst-case-oriented frequencies: the MAX-family optimum equalizes the
//! weighted expected detection time of the bottleneck elements. On
//! singleton tests the optimal frequencies are proportional to the
//! priorities themselves (not their square roots) and the optimum equals
//! the priority sum.

use probesched::instance::{gen_singletons, Instance, WeightMode};
use probesched::memoryless::{coverage_rates, solve_max, SolveConfig};

fn main() {
    let instance = gen_singletons(&[1.0, 0.5, 0.25]).unwrap();
    let freqs = solve_max(&instance, &SolveConfig::default()).unwrap();
    println!("singletons, priorities 1.0 / 0.5 / 0.25 (max-normalized):");
    println!("  q = {:?}", freqs.q);
    println!(
        "  worst weighted expected detection = {}",
        freqs.value.unwrap()
    );

    // Subset tests: two overlapping probe paths and one lonely element.
    let instance = Instance::new(
        WeightMode::Max,
        vec![
            ("link1".into(), 1.0),
            ("link2".into(), 0.8),
            ("link3".into(), 0.2),
        ],
        vec![
            ("pathA".into(), vec!["link1".into(), "link2".into()], None),
            ("pathB".into(), vec!["link2".into(), "link3".into()], None),
            ("pathC".into(), vec!["link3".into()], None),
        ],
    )
    .unwrap();
    let freqs = solve_max(&instance, &SolveConfig::default()).unwrap();
    let rates = coverage_rates(&instance, &freqs.q);
    println!("\noverlapping paths:");
    for t in 0..instance.num_tests() {
        println!("  {}: q = {:.4}", instance.tests()[t].id(), freqs.q[t]);
    }
    for e in 0..instance.num_elements() {
        println!(
            "  {}: p/Q = {:.4}",
            instance.element_id(e),
            instance.weight(e) / rates[e]
        );
    }
    println!("  value = {:.4}", freqs.value.unwrap());
}
