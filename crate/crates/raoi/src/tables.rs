//! Per-`(k, P)` success-probability tables and the distortion model.
//!
//! An [`ErrorTable`] stores, for one user/code/CRC configuration, the
//! probability that a transmission of `k` message bits at power `P` is
//! reported successful (CRC verdict), truly successful (genie), and
//! reported-but-wrong (undetected). Tables come from three builders:
//!
//! - [`estimate_table`]: Monte Carlo over the full physical pipeline for
//!   cyclic codes with CRC;
//! - [`ppv_table`]: the finite-blocklength normal approximation for a real
//!   AWGN channel, with perfect error detection and no CRC overhead;
//! - [`load_table`]: JSON import, e.g. for externally trained codes.
//!
//! The JSON schema is `raoi-table/1`; see [`save_table`] / [`load_table`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use std::path::Path;
use thiserror::Error;

use crate::code::CodeSpec;
use crate::crc::CrcSpec;
use crate::phy::{transmit_packet, PhyError, RngStream};

#[derive(Debug, Error)]
pub enum TableError {
    #[error("table file not found: {0}")]
    MissingFile(String),
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("table invariant violated: {0}")]
    InvariantViolation(String),
    #[error("infeasible cell k={k}: k + c = {k_dim} exceeds n = {n}")]
    InfeasibleCell { k: usize, k_dim: usize, n: usize },
    #[error("power values must be positive, got {0}")]
    NonPositivePower(f64),
    #[error(transparent)]
    Phy(#[from] PhyError),
}

pub const TABLE_SCHEMA: &str = "raoi-table/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeFamily {
    Cyclic,
    Ppv,
    External,
}

/// How successes are detected and which verdict drives the RAoI reset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detection {
    /// CRC verdict; undetected errors falsely reset the reported age.
    Crc,
    /// Perfect detection, no CRC bits transmitted.
    Genie,
    /// CRC bits consume code dimension but detection is perfect.
    GenieCrcOverhead,
}

/// Success probabilities per `(k, P)` cell; row index = k, column index = P.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub schema: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub slot_symbols: usize,
    pub k_values: Vec<usize>,
    pub p_values: Vec<f64>,
    pub crc: CrcSpec,
    pub code_family: CodeFamily,
    pub detection: Detection,
    pub trials: u64,
    pub seed: u64,
    pub reported_success: Vec<Vec<f64>>,
    pub genie_success: Vec<Vec<f64>>,
    pub undetected: Vec<Vec<f64>>,
}

impl ErrorTable {
    pub fn k_index(&self, k: usize) -> Option<usize> {
        self.k_values.iter().position(|&v| v == k)
    }

    pub fn p_index(&self, p: f64) -> Option<usize> {
        self.p_values.iter().position(|&v| v == p)
    }

    /// The success probability the scheduling layer should use, per the
    /// table's detection mode.
    pub fn policy_success(&self, ki: usize, pi: usize) -> f64 {
        match self.detection {
            Detection::Crc => self.reported_success[ki][pi],
            Detection::Genie | Detection::GenieCrcOverhead => self.genie_success[ki][pi],
        }
    }

    pub fn validate(&self) -> Result<(), TableError> {
        if self.schema != TABLE_SCHEMA {
            return Err(TableError::SchemaMismatch(format!(
                "expected schema {TABLE_SCHEMA}, got {}",
                self.schema
            )));
        }
        if self.n > self.slot_symbols {
            return Err(TableError::InvariantViolation(format!(
                "n = {} exceeds slot capacity N = {}",
                self.n, self.slot_symbols
            )));
        }
        for &k in &self.k_values {
            if k + self.crc.len() > self.n {
                return Err(TableError::InvariantViolation(format!(
                    "k + c = {} exceeds n = {}",
                    k + self.crc.len(),
                    self.n
                )));
            }
        }
        let rows = self.k_values.len();
        let cols = self.p_values.len();
        for (name, m) in [
            ("reported_success", &self.reported_success),
            ("genie_success", &self.genie_success),
            ("undetected", &self.undetected),
        ] {
            if m.len() != rows || m.iter().any(|r| r.len() != cols) {
                return Err(TableError::SchemaMismatch(format!(
                    "{name} must be {rows}x{cols}"
                )));
            }
        }
        for ki in 0..rows {
            for pi in 0..cols {
                let rep = self.reported_success[ki][pi];
                let gen = self.genie_success[ki][pi];
                let und = self.undetected[ki][pi];
                for (name, v) in [("reported", rep), ("genie", gen), ("undetected", und)] {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(TableError::InvariantViolation(format!(
                            "{name}[{ki}][{pi}] = {v} outside [0, 1]"
                        )));
                    }
                }
                if gen > rep {
                    return Err(TableError::InvariantViolation(format!(
                        "genie_success[{ki}][{pi}] = {gen} exceeds reported_success = {rep}"
                    )));
                }
                if (und - (rep - gen)).abs() > 1e-12 {
                    return Err(TableError::InvariantViolation(format!(
                        "undetected[{ki}][{pi}] = {und} != reported - genie = {}",
                        rep - gen
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Monte Carlo estimation over the full pipeline for a cyclic code family.
///
/// Each `(k, P)` cell builds the `(n, k+c)` code once and runs `trials`
/// independent packets, one keyed substream `(k-index, P-index, trial)`
/// each, so the result is bit-identical for any worker count.
pub fn estimate_table(
    n: usize,
    slot_symbols: usize,
    k_values: &[usize],
    p_values: &[f64],
    crc: CrcSpec,
    detection: Detection,
    trials: u64,
    seed: u64,
) -> Result<ErrorTable, TableError> {
    assert!(trials >= 1);
    for &k in k_values {
        let k_dim = k + crc.len();
        if k_dim >= n {
            return Err(TableError::InfeasibleCell { k, k_dim, n });
        }
    }
    for &p in p_values {
        if p <= 0.0 {
            return Err(TableError::NonPositivePower(p));
        }
    }
    let root = RngStream::new(seed);
    let cells: Vec<(usize, usize)> = (0..k_values.len())
        .flat_map(|ki| (0..p_values.len()).map(move |pi| (ki, pi)))
        .collect();
    let results: Vec<Result<(f64, f64), TableError>> = cells
        .par_iter()
        .map(|&(ki, pi)| {
            let k = k_values[ki];
            let code = CodeSpec::build(n, k + crc.len())
                .map_err(PhyError::from)
                .map_err(TableError::from)?;
            let power = p_values[pi];
            let mut msg_rng = root.substream([u64::MAX, ki as u64, pi as u64, 0]).rng();
            let mut reported = 0u64;
            let mut genie = 0u64;
            for t in 0..trials {
                let msg: Vec<u8> = (0..k).map(|_| rand::Rng::random_range(&mut msg_rng, 0..2u8)).collect();
                let stream = root.substream([0, ki as u64, pi as u64, t]);
                let out = transmit_packet(&msg, &crc, &code, power, &stream)?;
                reported += u64::from(out.reported_success);
                genie += u64::from(out.genie_success);
            }
            Ok((reported as f64 / trials as f64, genie as f64 / trials as f64))
        })
        .collect();

    let rows = k_values.len();
    let cols = p_values.len();
    let mut reported_success = vec![vec![0.0; cols]; rows];
    let mut genie_success = vec![vec![0.0; cols]; rows];
    let mut undetected = vec![vec![0.0; cols]; rows];
    for (&(ki, pi), res) in cells.iter().zip(results) {
        let (rep, gen) = res?;
        let perfect = !matches!(detection, Detection::Crc);
        reported_success[ki][pi] = if perfect { gen } else { rep };
        genie_success[ki][pi] = gen;
        undetected[ki][pi] = if perfect { 0.0 } else { rep - gen };
    }

    let table = ErrorTable {
        schema: TABLE_SCHEMA.to_string(),
        n,
        slot_symbols,
        k_values: k_values.to_vec(),
        p_values: p_values.to_vec(),
        crc,
        code_family: CodeFamily::Cyclic,
        detection,
        trials,
        seed,
        reported_success,
        genie_success,
        undetected,
    };
    table.validate()?;
    Ok(table)
}

/// Standard normal tail probability via the complementary error function.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Finite-blocklength normal approximation for the real AWGN channel with
/// unit noise variance:
///
/// `ε_err(k, P) = Q((n·C(P) − k + ½·log₂ n) / sqrt(n·V(P)))`
///
/// with capacity `C(P) = ½·log₂(1 + P)` bits/symbol and dispersion
/// `V(P) = (log₂ e)²·P(P+2) / (2(P+1)²)` bits². The table assumes perfect
/// error detection and no CRC bits, so reported and genie success coincide.
pub fn ppv_table(
    n: usize,
    slot_symbols: usize,
    k_values: &[usize],
    p_values: &[f64],
) -> Result<ErrorTable, TableError> {
    for &p in p_values {
        if p <= 0.0 {
            return Err(TableError::NonPositivePower(p));
        }
    }
    let nf = n as f64;
    let log2e = std::f64::consts::LOG2_E;
    let mut success = vec![vec![0.0; p_values.len()]; k_values.len()];
    for (ki, &k) in k_values.iter().enumerate() {
        for (pi, &p) in p_values.iter().enumerate() {
            let cap = 0.5 * (1.0 + p).log2();
            let disp = log2e * log2e * p * (p + 2.0) / (2.0 * (p + 1.0) * (p + 1.0));
            let arg = (nf * cap - k as f64 + 0.5 * nf.log2()) / (nf * disp).sqrt();
            success[ki][pi] = (1.0 - q_function(arg)).clamp(0.0, 1.0);
        }
    }
    let table = ErrorTable {
        schema: TABLE_SCHEMA.to_string(),
        n,
        slot_symbols,
        k_values: k_values.to_vec(),
        p_values: p_values.to_vec(),
        crc: CrcSpec::none(),
        code_family: CodeFamily::Ppv,
        detection: Detection::Genie,
        trials: 0,
        seed: 0,
        reported_success: success.clone(),
        genie_success: success.clone(),
        undetected: vec![vec![0.0; p_values.len()]; k_values.len()],
        };
    table.validate()?;
    Ok(table)
}

pub fn save_table(table: &ErrorTable, path: &Path) -> Result<(), TableError> {
    table.validate()?;
    let json = serde_json::to_string_pretty(table).expect("table serializes");
    std::fs::write(path, json).map_err(|source| TableError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_table(path: &Path) -> Result<ErrorTable, TableError> {
    if !path.exists() {
        return Err(TableError::MissingFile(path.display().to_string()));
    }
    let text = std::fs::read_to_string(path).map_err(|source| TableError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let table: ErrorTable =
        serde_json::from_str(&text).map_err(|e| TableError::SchemaMismatch(e.to_string()))?;
    table.validate()?;
    Ok(table)
}

/// Distortion incurred by transmitting only `k` of the source's bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum DistortionModel {
    /// `d(k) = 2^(-k/alpha)`; strictly decreasing and convex in `k`.
    Exp2 { alpha: f64 },
    /// Externally supplied `(k, d(k))` pairs.
    External { values: Vec<(usize, f64)> },
}

impl Default for DistortionModel {
    fn default() -> Self {
        DistortionModel::Exp2 { alpha: 100.0 }
    }
}

impl DistortionModel {
    pub fn distortion(&self, k: usize) -> f64 {
        match self {
            DistortionModel::Exp2 { alpha } => (2.0f64).powf(-(k as f64) / alpha),
            DistortionModel::External { values } => values
                .iter()
                .find(|(kk, _)| *kk == k)
                .map(|(_, d)| *d)
                .unwrap_or_else(|| panic!("no distortion value for k = {k}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppv_matches_independent_evaluation() {
        // frozen values from a high-precision oracle evaluation of the
        // normal approximation: (n=15, k=10) at P=1 and P=4
        let t = ppv_table(15, 15, &[10], &[1.0, 4.0]).unwrap();
        let e1 = 1.0 - t.reported_success[0][0];
        let e4 = 1.0 - t.reported_success[0][1];
        assert!((e1 - 0.564).abs() < 2e-3, "eps(10,1) = {e1}");
        assert!((e4 - 0.0078).abs() < 5e-4, "eps(10,4) = {e4}");
    }

    #[test]
    fn ppv_degenerate_k_zero() {
        let t = ppv_table(15, 15, &[0], &[1.0]).unwrap();
        assert!(t.reported_success[0][0] > 0.99);
    }

    #[test]
    fn ppv_monotone_in_k_and_p() {
        let ks: Vec<usize> = (4..=11).collect();
        let ps = [1.0, 2.0, 3.0, 4.0];
        let t = ppv_table(15, 15, &ks, &ps).unwrap();
        for pi in 0..ps.len() {
            for ki in 1..ks.len() {
                assert!(t.reported_success[ki][pi] <= t.reported_success[ki - 1][pi]);
            }
        }
        for ki in 0..ks.len() {
            for pi in 1..ps.len() {
                assert!(t.reported_success[ki][pi] >= t.reported_success[ki][pi - 1]);
            }
        }
    }

    #[test]
    fn ppv_rejects_nonpositive_power() {
        assert!(matches!(
            ppv_table(15, 15, &[4], &[0.0]),
            Err(TableError::NonPositivePower(_))
        ));
    }

    #[test]
    fn estimate_noiseless_limit() {
        let t = estimate_table(
            7,
            7,
            &[3],
            &[1e6],
            CrcSpec::crc1(),
            Detection::Crc,
            200,
            9,
        )
        .unwrap();
        assert_eq!(t.reported_success[0][0], 1.0);
        assert_eq!(t.genie_success[0][0], 1.0);
    }

    #[test]
    fn estimate_is_deterministic() {
        let mk = || {
            estimate_table(
                15,
                15,
                &[6, 8],
                &[1.0, 2.0],
                CrcSpec::crc1(),
                Detection::Crc,
                2_000,
                1234,
            )
            .unwrap()
        };
        assert_eq!(mk(), mk());
    }

    #[test]
    fn estimate_matches_exact_coset_leader_probability() {
        // c=0, detection genie on the (7,4) code: compare the MC cell with
        // the exact enumeration sum_w L(w) p^w (1-p)^(7-w)
        let power = 1.0;
        let t = estimate_table(
            7,
            7,
            &[4],
            &[power],
            CrcSpec::none(),
            Detection::Genie,
            100_000,
            77,
        )
        .unwrap();
        let code = CodeSpec::build(7, 4).unwrap();
        let p = q_function(power.sqrt());
        let mut exact = 0.0;
        for s in 0..code.syndrome_count() {
            let w: i32 = code
                .coset_leader(s as u64)
                .iter()
                .map(|&b| i32::from(b))
                .sum();
            exact += p.powi(w) * (1.0 - p).powi(7 - w);
        }
        let rate = t.genie_success[0][0];
        let sigma = (exact * (1.0 - exact) / 100_000.0).sqrt();
        assert!((rate - exact).abs() <= 3.0 * sigma, "{rate} vs {exact}");
    }

    #[test]
    fn infeasible_cell_is_named() {
        let err = estimate_table(
            15,
            15,
            &[13],
            &[1.0],
            CrcSpec::crc3(),
            Detection::Crc,
            10,
            0,
        )
        .unwrap_err();
        assert!(matches!(err, TableError::InfeasibleCell { k: 13, .. }));
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        let t = ppv_table(15, 15, &[4, 5], &[1.0, 2.0]).unwrap();
        save_table(&t, &path).unwrap();
        let back = load_table(&path).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn load_rejects_invariant_violation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        let mut t = ppv_table(15, 15, &[4], &[1.0]).unwrap();
        t.genie_success[0][0] = 1.0;
        t.reported_success[0][0] = 0.5;
        let json = serde_json::to_string(&t).unwrap();
        std::fs::write(&path, json).unwrap();
        assert!(matches!(
            load_table(&path),
            Err(TableError::InvariantViolation(_))
        ));
    }

    #[test]
    fn load_rejects_unknown_code_family() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        let t = ppv_table(15, 15, &[4], &[1.0]).unwrap();
        let json = serde_json::to_string(&t)
            .unwrap()
            .replace("\"ppv\"", "\"turbo\"");
        std::fs::write(&path, json).unwrap();
        assert!(matches!(
            load_table(&path),
            Err(TableError::SchemaMismatch(_))
        ));
    }

    #[test]
    fn load_missing_file() {
        assert!(matches!(
            load_table(Path::new("/nonexistent/t.json")),
            Err(TableError::MissingFile(_))
        ));
    }

    #[test]
    fn distortion_defaults() {
        let d = DistortionModel::default();
        assert!((d.distortion(10) - 2.0f64.powf(-0.1)).abs() < 1e-12);
        assert_eq!(d.distortion(0), 1.0);
        assert!(d.distortion(4) > d.distortion(11));
    }
}
