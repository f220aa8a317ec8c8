use gwin_core::AttributeTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform integers in `[-1000, 1000]`, one per vertex.
pub fn random_attrs(n: usize, seed: u64) -> Vec<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1000..=1000)).collect()
}

pub fn random_table(n: usize, seed: u64) -> AttributeTable {
    AttributeTable::new(n)
        .with_column("x", random_attrs(n, seed))
        .expect("column length matches")
}
