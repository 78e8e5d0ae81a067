use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded generator used by every randomized routine.
pub type Rng64 = ChaCha8Rng;

/// Mixes a master seed with a stream id (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn seeded(seed: u64, stream: u64) -> Rng64 {
    Rng64::seed_from_u64(derive_seed(seed, stream))
}

pub(crate) fn uniform(rng: &mut Rng64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

pub(crate) fn log_uniform(rng: &mut Rng64, lo: f64, hi: f64) -> f64 {
    libm::exp(uniform(rng, libm::log(lo), libm::log(hi)))
}

pub(crate) fn coin(rng: &mut Rng64, p: f64) -> bool {
    rng.random::<f64>() < p
}
