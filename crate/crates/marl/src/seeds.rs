//! Independent random streams derived from one run seed.

/// Stream tags; each consumer of randomness draws from its own stream so
/// that adding or removing one (for example the teacher) leaves the others
/// untouched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Init = 1,
    Env = 2,
    Policy = 3,
    Teacher = 4,
    Buffer = 5,
    Eval = 6,
    Holdout = 7,
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, stream: Stream, index: u64) -> u64 {
    mix(mix(mix(seed) ^ stream as u64) ^ index)
}
