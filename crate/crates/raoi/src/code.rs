//! Cyclic block codes with systematic encoding and syndrome-table decoding.
//!
//! A cyclic `(n, K)` code is generated by a degree-`(n-K)` divisor `g(x)` of
//! `x^n + 1`. Encoding is systematic: the codeword for message `m` is
//! `[m ‖ r]` with `r = (x^{n-K} m(x)) mod g(x)`. Decoding computes the
//! syndrome `s = H r^T` against the parity-check matrix `H = [P^T | I]`,
//! XORs in the stored coset leader, and extracts the first `K` bits.
//!
//! All tie-breaks are deterministic: `find_generator` returns the divisor
//! with the smallest integer bit-pattern (constant term = LSB), and the
//! syndrome table is filled by enumerating error patterns in increasing
//! Hamming weight, ties broken by smallest integer value of the pattern
//! (LSB = bit 0 = leftmost codeword position).

use thiserror::Error;

use crate::gf2::Gf2Poly;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodeError {
    #[error("message dimension K={k_dim} must satisfy 1 <= K < n={n}")]
    BadDimensions { n: usize, k_dim: usize },
    #[error("no cyclic code: x^{n}+1 has no divisor of degree {degree}")]
    NoCyclicCode { n: usize, degree: usize },
    #[error("expected a word of {expected} bits, got {got}")]
    WrongLength { expected: usize, got: usize },
}

/// Smallest-bit-pattern divisor of `x^n + 1` with degree `n - K` and
/// constant term 1.
pub fn find_generator(n: usize, k_dim: usize) -> Result<Gf2Poly, CodeError> {
    if k_dim == 0 || k_dim >= n || n > 32 {
        return Err(CodeError::BadDimensions { n, k_dim });
    }
    let degree = n - k_dim;
    let target = Gf2Poly((1u64 << n) | 1); // x^n + 1
    let mut v = (1u64 << degree) | 1;
    while v < 1u64 << (degree + 1) {
        let g = Gf2Poly(v);
        if g.divides(target) {
            return Ok(g);
        }
        v += 2; // constant term stays 1
    }
    Err(CodeError::NoCyclicCode { n, degree })
}

/// A constructed `(n, K)` cyclic code with its decoding table.
#[derive(Debug, Clone)]
pub struct CodeSpec {
    n: usize,
    k_dim: usize,
    generator: Gf2Poly,
    /// Parity-check rows; bit `j` of `parity[l]` is `H[l][j]` with `j` the
    /// codeword position from the left.
    parity: Vec<u64>,
    /// Coset leader (as a position mask) per syndrome value.
    syndrome_table: Vec<u64>,
}

impl CodeSpec {
    /// Build the systematic code and fill the full syndrome table.
    pub fn build(n: usize, k_dim: usize) -> Result<Self, CodeError> {
        let generator = find_generator(n, k_dim)?;
        let r_len = n - k_dim;

        // P[i] = parity bits of the i-th unit message, MSB-first; H = [P^T | I].
        let mut p_rows = Vec::with_capacity(k_dim);
        for i in 0..k_dim {
            let mi = Gf2Poly::monomial((k_dim - 1 - i) as u32);
            let rem = mi
                .mul(Gf2Poly::monomial(r_len as u32))
                .rem(generator)
                .expect("generator is nonzero");
            p_rows.push(rem);
        }
        let mut parity = vec![0u64; r_len];
        for (l, row) in parity.iter_mut().enumerate() {
            for (i, p) in p_rows.iter().enumerate() {
                // coefficient of x^{r_len-1-l} in p_i, i.e. MSB-first column l
                if p.coeff((r_len - 1 - l) as u32) == 1 {
                    *row |= 1u64 << i;
                }
            }
            *row |= 1u64 << (k_dim + l);
        }

        let mut code = CodeSpec {
            n,
            k_dim,
            generator,
            parity,
            syndrome_table: vec![u64::MAX; 1 << r_len],
        };

        // Coset leaders: error patterns by increasing weight, ties by
        // smallest integer value (bit 0 = leftmost position).
        let mut remaining = 1usize << r_len;
        code.syndrome_table[0] = 0;
        remaining -= 1;
        'outer: for weight in 1..=n {
            for pattern in 0u64..1 << n {
                if pattern.count_ones() as usize != weight {
                    continue;
                }
                let s = code.syndrome_of_mask(pattern);
                if code.syndrome_table[s as usize] == u64::MAX {
                    code.syndrome_table[s as usize] = pattern;
                    remaining -= 1;
                    if remaining == 0 {
                        break 'outer;
                    }
                }
            }
        }
        debug_assert_eq!(remaining, 0);
        Ok(code)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Message dimension K (message-plus-CRC bits in the packet pipeline).
    pub fn k_dim(&self) -> usize {
        self.k_dim
    }

    pub fn generator(&self) -> Gf2Poly {
        self.generator
    }

    /// Parity-check matrix entry `H[row][col]`.
    pub fn parity_check(&self, row: usize, col: usize) -> u8 {
        ((self.parity[row] >> col) & 1) as u8
    }

    pub fn syndrome_count(&self) -> usize {
        self.syndrome_table.len()
    }

    /// Coset leader for a syndrome value, as MSB-first bits.
    pub fn coset_leader(&self, syndrome: u64) -> Vec<u8> {
        mask_to_bits(self.syndrome_table[syndrome as usize], self.n)
    }

    fn syndrome_of_mask(&self, word: u64) -> u64 {
        let mut s = 0u64;
        for (l, row) in self.parity.iter().enumerate() {
            s |= u64::from((word & row).count_ones() & 1) << l;
        }
        s
    }

    /// Syndrome of an MSB-first word.
    pub fn syndrome(&self, word: &[u8]) -> Result<u64, CodeError> {
        if word.len() != self.n {
            return Err(CodeError::WrongLength {
                expected: self.n,
                got: word.len(),
            });
        }
        Ok(self.syndrome_of_mask(bits_to_mask(word)))
    }

    /// Systematic encoding: `[m ‖ (x^{n-K} m(x)) mod g(x)]`.
    pub fn encode(&self, msg: &[u8]) -> Result<Vec<u8>, CodeError> {
        if msg.len() != self.k_dim {
            return Err(CodeError::WrongLength {
                expected: self.k_dim,
                got: msg.len(),
            });
        }
        let r_len = self.n - self.k_dim;
        let rem = Gf2Poly::from_bits_msb(msg)
            .mul(Gf2Poly::monomial(r_len as u32))
            .rem(self.generator)
            .expect("generator is nonzero");
        let mut out = msg.to_vec();
        out.extend(rem.to_bits_msb(r_len));
        Ok(out)
    }

    /// Syndrome decoding: correct with the coset leader, return the first
    /// `K` bits.
    pub fn decode(&self, received: &[u8]) -> Result<Vec<u8>, CodeError> {
        let s = self.syndrome(received)?;
        let corrected = bits_to_mask(received) ^ self.syndrome_table[s as usize];
        Ok(mask_to_bits(corrected, self.k_dim))
    }

    /// Minimum distance by enumerating all `2^K` codewords. Intended for
    /// the desk-scale dimensions this crate targets (`K <= 20` or so).
    pub fn min_distance(&self) -> usize {
        let mut d = self.n;
        for m in 1u64..1 << self.k_dim {
            let msg = mask_to_msg_bits(m, self.k_dim);
            let w = self
                .encode(&msg)
                .unwrap()
                .iter()
                .map(|&b| b as usize)
                .sum();
            d = d.min(w);
        }
        d
    }
}

/// Position mask (bit 0 = leftmost) from MSB-first bits.
fn bits_to_mask(bits: &[u8]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0u64, |m, (j, &b)| m | (u64::from(b & 1) << j))
}

fn mask_to_bits(mask: u64, len: usize) -> Vec<u8> {
    (0..len).map(|j| ((mask >> j) & 1) as u8).collect()
}

/// Message bits, MSB-first, from an integer enumeration index.
fn mask_to_msg_bits(v: u64, len: usize) -> Vec<u8> {
    (0..len).rev().map(|j| ((v >> j) & 1) as u8).collect()
}
