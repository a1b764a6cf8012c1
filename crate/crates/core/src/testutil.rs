//! Random instances shared by the unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{Channel, InputDistribution};
use crate::exponents::ExponentInputs;

pub fn example_one() -> ExponentInputs {
    ExponentInputs::new(
        Channel::new(vec![vec![0.5, 0.5], vec![1e-10, 1.0 - 1e-10]]).unwrap(),
        InputDistribution::binary(0.1).unwrap(),
    )
    .unwrap()
}

fn dirichlet_row(rng: &mut impl Rng, k: usize, zeros: bool) -> Vec<f64> {
    loop {
        let mut row: Vec<f64> = (0..k)
            .map(|_| {
                if zeros && rng.gen_bool(0.15) {
                    0.0
                } else {
                    -(1.0 - rng.gen::<f64>()).ln()
                }
            })
            .collect();
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            row.iter_mut().for_each(|v| *v /= total);
            return row;
        }
    }
}

/// Uniform-Dirichlet rows with occasional exact zeros.
pub fn random_channel(rng: &mut impl Rng, kx: usize, ky: usize) -> Channel {
    Channel::new((0..kx).map(|_| dirichlet_row(rng, ky, true)).collect()).unwrap()
}

pub fn random_full_support_channel(rng: &mut impl Rng, kx: usize, ky: usize) -> Channel {
    Channel::new((0..kx).map(|_| dirichlet_row(rng, ky, false)).collect()).unwrap()
}

/// Interior input distribution (every letter at least 2% mass).
pub fn random_distribution(rng: &mut impl Rng, k: usize) -> InputDistribution {
    let row = dirichlet_row(rng, k, false);
    let mixed: Vec<f64> = row.iter().map(|p| 0.02 + (1.0 - 0.02 * k as f64) * p).collect();
    let total: f64 = mixed.iter().sum();
    InputDistribution::new(mixed.iter().map(|p| p / total).collect()).unwrap()
}

pub fn random_instance(seed: u64, kx: usize, ky: usize) -> ExponentInputs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ch = random_channel(&mut rng, kx, ky);
    let q = random_distribution(&mut rng, kx);
    ExponentInputs::new(ch, q).unwrap()
}
