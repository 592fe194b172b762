//! Fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zerosum::{GroupSpec, Sequence};

/// Uniform random sequence of length `len` over `group`, reproducible from `seed`.
pub fn random_sequence(group: &GroupSpec, len: usize, seed: u64) -> Sequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx: Vec<usize> = (0..len).map(|_| rng.gen_range(0..group.order())).collect();
    Sequence::from_indices(group, &idx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_reproducible() {
        let g = GroupSpec::new(&[2, 2, 6]).unwrap();
        assert_eq!(random_sequence(&g, 20, 3), random_sequence(&g, 20, 3));
        assert_eq!(random_sequence(&g, 20, 3).len(), 20);
    }
}
