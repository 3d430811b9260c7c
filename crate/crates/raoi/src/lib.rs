//! Status-update scheduling over short-blocklength coded broadcast links.
//!
//! A base station serves `M` users over a slotted broadcast channel. Each
//! transmission carries a `k`-bit message with a CRC appended, encoded by a
//! cyclic block code, BPSK-modulated and sent through real unit-variance AWGN.
//! The receiver syndrome-decodes and the CRC verdict drives the *reported*
//! age of information (RAoI): the age resets when the CRC passes, which may
//! differ from the true, genie-observed age when errors go undetected.
//!
//! The crate provides:
//!
//! - [`gf2`], [`crc`], [`code`]: GF(2) polynomial arithmetic, CRC
//!   encode/check and cyclic codes with syndrome-table decoding.
//! - [`phy`]: BPSK over AWGN with deterministic seeded noise streams and the
//!   end-to-end packet pipeline.
//! - [`tables`]: success-probability tables per `(k, P)` cell — Monte Carlo
//!   estimation, the finite-blocklength normal approximation (PPV), and a
//!   JSON import/export format for externally trained codes.
//! - [`policies`]: the stationary randomized policy (convex solve plus
//!   renewal analytics), the drift-plus-penalty policy and periodic
//!   round-robin, with lower-bound and ratio-bound calculators.
//! - [`sim`]: the slot-level episode engine producing long-run metrics.
//! - [`cli`]: the experiment runner behind the `raoi` binary.
//!
//! Every randomized computation is reproducible bit-exactly from a 64-bit
//! seed, independent of worker count. See the `examples/` directory for one
//! runnable example per capability.

pub mod cli;
pub mod code;
pub mod config;
pub mod crc;
pub mod gf2;
pub mod phy;
pub mod policies;
pub mod sim;
pub mod tables;

pub use code::CodeSpec;
pub use config::{ExperimentConfig, SystemConfig, UserConfig};
pub use crc::CrcSpec;
pub use gf2::Gf2Poly;
pub use phy::{PacketOutcome, RngStream};
pub use policies::{DppState, PrrParams, SlotAction, SrpSolution};
pub use sim::{Metrics, SimMode};
pub use tables::{DistortionModel, ErrorTable};
