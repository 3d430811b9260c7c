//! Physical layer: BPSK over real unit-variance AWGN, hard-decision
//! demodulation, and the end-to-end packet pipeline
//! (CRC append → encode → modulate → noise → hard decision → decode → CRC check).
//!
//! Randomness is organized as keyed substreams: a 64-bit root seed plus a
//! small tuple of stream ids fully determines the noise sequence, so the
//! same `(seed, ids)` reproduces the same packet outcome regardless of
//! scheduling or worker count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::code::{CodeError, CodeSpec};
use crate::crc::{crc_append, crc_check, CrcError, CrcSpec};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PhyError {
    #[error("transmit power must be positive, got {0}")]
    NonPositivePower(String),
    #[error("code dimension K={k_dim} does not equal message bits {k} + CRC bits {c}")]
    DimensionMismatch { k_dim: usize, k: usize, c: usize },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Crc(#[from] CrcError),
}

/// A keyed, reproducible random stream: `(seed, ids)` → ChaCha12 state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    seed: u64,
    ids: [u64; 4],
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { seed, ids: [0; 4] }
    }

    /// Derive a child stream; the id tuple identifies e.g.
    /// `(user, k-index, P-index, trial)`.
    pub fn substream(&self, ids: [u64; 4]) -> Self {
        let mut mixed = [0u64; 4];
        for (slot, (a, b)) in mixed.iter_mut().zip(self.ids.iter().zip(ids.iter())) {
            *slot = splitmix64(a ^ splitmix64(*b));
        }
        RngStream {
            seed: self.seed,
            ids: mixed,
        }
    }

    /// Instantiate the generator for this stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut key = [0u8; 32];
        let mut state = self.seed;
        for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
            state = splitmix64(state ^ self.ids[i]);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha12Rng::from_seed(key)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// What happened to one packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketOutcome {
    /// CRC passed at the receiver (the `v_i(t)` indicator).
    pub reported_success: bool,
    /// The decoded CRC-appended word equals the transmitted one.
    pub genie_success: bool,
    /// CRC passed but the packet was in error.
    pub undetected: bool,
    /// Per-symbol power used.
    pub power_used: f64,
}

/// Map bits to antipodal symbols: `b ↦ (1-2b)·√P`; `‖out‖² = n·P`.
pub fn bpsk_modulate(bits: &[u8], power: f64) -> Result<Vec<f64>, PhyError> {
    if !(power > 0.0) {
        return Err(PhyError::NonPositivePower(format!("{power}")));
    }
    let amp = power.sqrt();
    Ok(bits
        .iter()
        .map(|&b| if b == 0 { amp } else { -amp })
        .collect())
}

/// Add independent zero-mean unit-variance Gaussian noise in place.
pub fn awgn(symbols: &mut [f64], stream: &RngStream) {
    let mut rng = stream.rng();
    for s in symbols.iter_mut() {
        let w: f64 = rng.sample(StandardNormal);
        *s += w;
    }
}

/// Sign detector: `>= 0 ↦ 0`, `< 0 ↦ 1`.
pub fn hard_decision(received: &[f64]) -> Vec<u8> {
    received.iter().map(|&x| u8::from(x < 0.0)).collect()
}

/// Run one packet through the full pipeline.
///
/// `code.k_dim()` must equal `msg.len() + crc.len()`. Genie success means
/// the decoded `k + c` bits match the transmitted CRC-appended word, which
/// guarantees `genie_success ⇒ reported_success` (re-checking correct bits
/// always passes).
pub fn transmit_packet(
    msg: &[u8],
    crc: &CrcSpec,
    code: &CodeSpec,
    power: f64,
    stream: &RngStream,
) -> Result<PacketOutcome, PhyError> {
    if code.k_dim() != msg.len() + crc.len() {
        return Err(PhyError::DimensionMismatch {
            k_dim: code.k_dim(),
            k: msg.len(),
            c: crc.len(),
        });
    }
    let word = crc_append(msg, crc);
    let codeword = code.encode(&word)?;
    let mut symbols = bpsk_modulate(&codeword, power)?;
    awgn(&mut symbols, stream);
    let decoded = code.decode(&hard_decision(&symbols))?;
    let reported_success = crc_check(&decoded, crc)?;
    let genie_success = decoded == word;
    Ok(PacketOutcome {
        reported_success,
        genie_success,
        undetected: reported_success && !genie_success,
        power_used: power,
    })
}
