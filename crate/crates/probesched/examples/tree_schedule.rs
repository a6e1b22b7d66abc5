//! From probing frequencies to a deterministic cyclic schedule: round to
//! powers of two, map each test to a binary-tree node (no test an
//! ancestor of another), and read the level-N schedule off the leaves.
//! Each test lands at an exact power-of-two period, and level-N
//! schedules are prefixes of one another.

use probesched::tree::{map_canonical, map_random, round_frequencies, schedule_from_mapping};

fn render(slots: &[Option<usize>]) -> String {
    slots
        .iter()
        .map(|s| match s {
            Some(t) => (t + 1).to_string(),
            None => "x".to_string(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() {
    let q = [
        0.25, 0.25, 0.125, 0.125, 0.0625, 0.0625, 0.0625, 0.03125, 0.03125,
    ];
    let rounded = round_frequencies(&q);
    println!("levels: {:?}", rounded.levels);

    let mapping = map_canonical(&rounded).unwrap();
    println!("\ncanonical mapping (test -> level/offset):");
    for &(test, level, offset) in mapping.entries() {
        println!("  test {} -> level {level}, offset {offset}", test + 1);
    }
    println!("Kraft sum = {}", mapping.kraft_sum());

    println!("\nlevel-N schedules (consistent prefixes):");
    for n in 2..=5 {
        // Deeper tests than the level are simply not schedulable yet;
        // restrict the mapping to what fits.
        let fitting: Vec<_> = mapping
            .entries()
            .iter()
            .copied()
            .filter(|&(_, l, _)| l <= n)
            .collect();
        let partial = probesched::tree::TreeMapping::new(fitting).unwrap();
        let slots = schedule_from_mapping(&partial, n).unwrap();
        println!("  N={n}: {}", render(&slots));
    }

    println!("\nrandom mappings move the rare tests around:");
    for seed in 0..3 {
        let mapping = map_random(&rounded, seed).unwrap();
        let slots = schedule_from_mapping(&mapping, mapping.max_level()).unwrap();
        println!("  seed {seed}: {}", render(&slots));
    }
}
