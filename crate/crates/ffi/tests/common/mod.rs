use std::path::Path;

use kgmix::benchgen::{generate, BenchSpec};

/// Writes a small prepared benchmark into `dir`.
pub fn prepared(dir: &Path, seed: u64) {
    let spec = BenchSpec {
        n_entities: 60,
        n_relations: 6,
        n_triples: 600,
        seed,
        ..BenchSpec::default()
    };
    let bench = generate(&spec).unwrap();
    bench
        .graph
        .add_inverses()
        .unwrap()
        .save_prepared(dir)
        .unwrap();
}
