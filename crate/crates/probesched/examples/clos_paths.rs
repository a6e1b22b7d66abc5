//! Folded-Clos fabric generation: inter-tier links are the monitored
//! elements, and every simple valley-free up/down path between leaf
//! switches is a probe. Higher apex tiers are enumerated too; that is
//! what covers the top-tier links.

use probesched::instance::gen_clos;

fn main() {
    for (levels, radix) in [(2usize, 2usize), (3, 2), (3, 3)] {
        let instance = gen_clos(levels, radix).unwrap();
        let report = instance.validate();
        println!(
            "clos(levels={levels}, radix={radix}): {} links, {} paths, validation {}",
            instance.num_elements(),
            instance.num_tests(),
            report
        );
        let max_cov = instance.max_coverage();
        let min_cov = (0..instance.num_elements())
            .map(|e| instance.coverage_count(e))
            .min()
            .unwrap();
        println!("  coverage per link: {min_cov}..={max_cov}");
    }

    println!("\npaths of clos(3, 2):");
    let instance = gen_clos(3, 2).unwrap();
    for test in instance.tests() {
        let links: Vec<&str> = test
            .members()
            .iter()
            .map(|&e| instance.element_id(e))
            .collect();
        println!("  {:<28} covers {}", test.id(), links.join(", "));
    }
}
