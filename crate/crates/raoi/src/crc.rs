//! CRC error detection over GF(2).
//!
//! A `c`-bit CRC with generator `g(x)` of degree `c` encodes a message
//! `m(x)` as `p(x) = x^c m(x) + (x^c m(x) mod g(x))`; the receiver checks
//! that the received word is divisible by `g(x)`. An error polynomial that
//! is a nonzero multiple of `g(x)` passes undetected.
//!
//! `c = 0` (generator `1`) means "no CRC": appending is the identity and
//! every word checks clean. This is the configuration used with the
//! perfect-detection (PPV) pipeline.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::Gf2Poly;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CrcError {
    #[error("generator degree {got:?} does not match CRC length {c}")]
    DegreeMismatch { c: usize, got: Option<u32> },
    #[error("generator constant term must be 1")]
    EvenGenerator,
    #[error("word of {len} bits is too short for a {c}-bit CRC")]
    WordTooShort { len: usize, c: usize },
    #[error("invalid generator hex string: {0}")]
    BadHex(String),
}

/// CRC configuration: length in bits and generator polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CrcSpecRepr", into = "CrcSpecRepr")]
pub struct CrcSpec {
    c: usize,
    generator: Gf2Poly,
}

/// Wire form: generator as a hex integer, constant term = LSB
/// (`0x3` is `x+1`, `0xB` is `x^3+x+1`).
#[derive(Serialize, Deserialize)]
struct CrcSpecRepr {
    c: usize,
    poly_hex: String,
}

impl TryFrom<CrcSpecRepr> for CrcSpec {
    type Error = CrcError;
    fn try_from(r: CrcSpecRepr) -> Result<Self, CrcError> {
        let digits = r.poly_hex.trim_start_matches("0x").trim_start_matches("0X");
        let v = u64::from_str_radix(digits, 16).map_err(|_| CrcError::BadHex(r.poly_hex.clone()))?;
        CrcSpec::new(r.c, Gf2Poly(v))
    }
}

impl From<CrcSpec> for CrcSpecRepr {
    fn from(s: CrcSpec) -> Self {
        CrcSpecRepr {
            c: s.c,
            poly_hex: format!("{:#x}", s.generator.0),
        }
    }
}

impl CrcSpec {
    pub fn new(c: usize, generator: Gf2Poly) -> Result<Self, CrcError> {
        if generator.degree() != Some(c as u32) {
            return Err(CrcError::DegreeMismatch {
                c,
                got: generator.degree(),
            });
        }
        if generator.coeff(0) != 1 {
            return Err(CrcError::EvenGenerator);
        }
        Ok(CrcSpec { c, generator })
    }

    /// No CRC: zero check bits, generator `1`.
    pub fn none() -> Self {
        CrcSpec {
            c: 0,
            generator: Gf2Poly::ONE,
        }
    }

    /// `g(x) = x + 1` (parity bit).
    pub fn crc1() -> Self {
        CrcSpec::new(1, Gf2Poly(0x3)).unwrap()
    }

    /// `g(x) = x^3 + x + 1`.
    pub fn crc3() -> Self {
        CrcSpec::new(3, Gf2Poly(0xB)).unwrap()
    }

    pub fn len(&self) -> usize {
        self.c
    }

    pub fn is_none(&self) -> bool {
        self.c == 0
    }

    pub fn generator(&self) -> Gf2Poly {
        self.generator
    }

    pub fn poly_hex(&self) -> String {
        format!("{:#x}", self.generator.0)
    }
}

/// Append the CRC remainder bits to an MSB-first message.
pub fn crc_append(msg: &[u8], crc: &CrcSpec) -> Vec<u8> {
    if crc.c == 0 {
        return msg.to_vec();
    }
    let m = Gf2Poly::from_bits_msb(msg);
    let shifted = m.mul(Gf2Poly::monomial(crc.c as u32));
    let r = shifted.rem(crc.generator).expect("generator is nonzero");
    let mut out = msg.to_vec();
    out.extend(r.to_bits_msb(crc.c));
    out
}

/// True iff the word's polynomial is divisible by the generator.
pub fn crc_check(word: &[u8], crc: &CrcSpec) -> Result<bool, CrcError> {
    if word.len() <= crc.c {
        return Err(CrcError::WordTooShort {
            len: word.len(),
            c: crc.c,
        });
    }
    if crc.c == 0 {
        return Ok(true);
    }
    let p = Gf2Poly::from_bits_msb(word);
    Ok(p.rem(crc.generator).expect("generator is nonzero").is_zero())
}
