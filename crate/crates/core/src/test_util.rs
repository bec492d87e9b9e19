use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::evaluation::gaussian_matrix;
use crate::model_core::RealMatrix;

pub(crate) fn random_matrix(rows: usize, cols: usize, seed: u64) -> RealMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RealMatrix::new(gaussian_matrix(rows, cols, &mut rng)).unwrap()
}
