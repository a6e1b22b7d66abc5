//! Optimal memoryless frequencies for singleton tests follow the
//! square-root law: probe each element proportionally to the square root
//! of its priority, for a total expected detection cost of
//! (sum of square roots)^2.

use probesched::instance::gen_singletons;
use probesched::memoryless::{solve_sum, SolveConfig};

fn main() {
    let weights = [0.5, 0.3, 0.2];
    let instance = gen_singletons(&weights).unwrap();
    let freqs = solve_sum(&instance, &SolveConfig::default()).unwrap();

    let sqrt_sum: f64 = instance.weights().iter().map(|w| w.sqrt()).sum();
    println!("priority   solver q   sqrt(p)/sum(sqrt(p))");
    for e in 0..instance.num_elements() {
        println!(
            "  {:>6.3}   {:>8.6}   {:>8.6}",
            instance.weight(e),
            freqs.q[e],
            instance.weight(e).sqrt() / sqrt_sum
        );
    }
    println!(
        "\nobjective: solver {:.6}, closed form {:.6}",
        freqs.value.unwrap(),
        sqrt_sum * sqrt_sum
    );
}
