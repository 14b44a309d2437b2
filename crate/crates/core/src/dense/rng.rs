use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::DenseMatrix;

/// Seeded source of Gaussian deviates.
///
/// ChaCha8 keeps the stream identical across platforms for a given
/// `(seed, stream)` pair. Independent substreams let parallel work units
/// draw their own samples without depending on execution order.
#[derive(Clone, Debug)]
pub struct RngState {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngState { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

/// `m x n` matrix of i.i.d. N(0, 1) entries, filled in column-major order.
pub fn gaussian_matrix(m: usize, n: usize, rng: &mut RngState) -> DenseMatrix {
    let data: Vec<f64> = (0..m * n).map(|_| rng.standard_normal()).collect();
    DenseMatrix::from_col_major(m, n, data).expect("length matches by construction")
}
