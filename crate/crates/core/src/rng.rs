//! Counter-based random substreams.
//!
//! Every random draw in the pipeline comes from a generator keyed by
//! `(master seed, role, sample index, feature index, circuit id)`. The key is
//! hashed with SHA-256 into a ChaCha seed, so results never depend on the
//! order in which parallel workers run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

/// What a substream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Couplings,
    States,
    Features,
    Split,
    Target,
    Experiment,
}

impl Role {
    fn tag(self) -> &'static [u8] {
        match self {
            Role::Couplings => b"couplings",
            Role::States => b"states",
            Role::Features => b"features",
            Role::Split => b"split",
            Role::Target => b"target",
            Role::Experiment => b"experiment",
        }
    }
}

/// Derives the generator for one `(role, sample, l, circuit)` cell.
pub fn substream(master: u64, role: Role, sample: u64, l: u64, circuit: u64) -> StreamRng {
    let mut h = Sha256::new();
    h.update(b"hamfeat/v1");
    h.update(master.to_le_bytes());
    h.update(role.tag());
    h.update(sample.to_le_bytes());
    h.update(l.to_le_bytes());
    h.update(circuit.to_le_bytes());
    let digest = h.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}
