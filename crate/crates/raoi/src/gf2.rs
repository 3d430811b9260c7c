//! Polynomial arithmetic over GF(2).
//!
//! A polynomial is stored as a `u64` where bit `j` is the coefficient of
//! `x^j` (constant term at bit 0). Addition is XOR, multiplication is
//! carryless shift-and-XOR. Everything the CRC and cyclic-code layers need
//! fits comfortably below degree 32.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("division by the zero polynomial")]
    ZeroDivisor,
}

/// A binary polynomial; bit `j` of the inner value is the coefficient of `x^j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf2Poly(pub u64);

impl Gf2Poly {
    pub const ZERO: Gf2Poly = Gf2Poly(0);
    pub const ONE: Gf2Poly = Gf2Poly(1);

    /// `x^j`.
    pub fn monomial(j: u32) -> Self {
        Gf2Poly(1u64 << j)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Degree of the polynomial, `None` for the zero polynomial.
    pub fn degree(self) -> Option<u32> {
        if self.0 == 0 {
            None
        } else {
            Some(63 - self.0.leading_zeros())
        }
    }

    /// Coefficient of `x^j`.
    pub fn coeff(self, j: u32) -> u8 {
        ((self.0 >> j) & 1) as u8
    }

    /// Addition and subtraction coincide over GF(2).
    pub fn add(self, rhs: Gf2Poly) -> Gf2Poly {
        Gf2Poly(self.0 ^ rhs.0)
    }

    /// Carryless multiplication.
    pub fn mul(self, rhs: Gf2Poly) -> Gf2Poly {
        let mut acc = 0u64;
        let mut a = self.0;
        let mut shift = 0;
        while a != 0 {
            if a & 1 == 1 {
                acc ^= rhs.0 << shift;
            }
            a >>= 1;
            shift += 1;
        }
        Gf2Poly(acc)
    }

    /// Remainder of `self` modulo `g` by GF(2) long division.
    pub fn rem(self, g: Gf2Poly) -> Result<Gf2Poly, Gf2Error> {
        let gd = g.degree().ok_or(Gf2Error::ZeroDivisor)?;
        let mut r = self.0;
        while let Some(rd) = Gf2Poly(r).degree() {
            if rd < gd {
                break;
            }
            r ^= g.0 << (rd - gd);
        }
        Ok(Gf2Poly(r))
    }

    /// True iff `self` divides `other` exactly.
    pub fn divides(self, other: Gf2Poly) -> bool {
        match other.rem(self) {
            Ok(r) => r.is_zero(),
            Err(_) => false,
        }
    }

    /// Build a polynomial from bits given MSB-first: the first bit is the
    /// coefficient of `x^(len-1)`, the last bit the constant term.
    pub fn from_bits_msb(bits: &[u8]) -> Gf2Poly {
        let mut v = 0u64;
        for &b in bits {
            v = (v << 1) | u64::from(b & 1);
        }
        Gf2Poly(v)
    }

    /// Lowest `len` coefficients as MSB-first bits.
    pub fn to_bits_msb(self, len: usize) -> Vec<u8> {
        (0..len).rev().map(|j| self.coeff(j as u32)).collect()
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for j in (0..=self.degree().unwrap()).rev() {
            if self.coeff(j) == 1 {
                if !first {
                    write!(f, "+")?;
                }
                match j {
                    0 => write!(f, "1")?,
                    1 => write!(f, "x")?,
                    _ => write!(f, "x^{j}")?,
                }
                first = false;
            }
        }
        Ok(())
    }
}
