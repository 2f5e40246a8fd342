//! Deterministic state-vector simulator.

mod gate;
mod qft;
mod state;

pub use gate::{Circuit, Gate, GateKind, Mat2};
pub use qft::{inverse_qft, qft};
pub use state::StateVector;
pub(crate) use state::sample_index;

use rand::SeedableRng;

/// Generator used for every sampled quantity: ChaCha8 seeded from a `u64`.
pub type SimRng = rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
