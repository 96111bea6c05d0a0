// SPDX-License-Identifier: Apache-2.0

//! Prime-field arithmetic and uniform symbol sampling.
//!
//! Every input, key and message in the system is a [`SymbolVector`] over a
//! prime field `F_q`. Elements are kept fully reduced; mixing moduli is an
//! error rather than a silent reduction.

use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

/// Errors raised by field operations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    /// Two operands live in different fields.
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },
    /// Vectors with unequal lengths or moduli were combined.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    /// The requested modulus is not a prime.
    #[error("invalid modulus {0}: not a prime")]
    InvalidModulus(u64),
    /// Symbol vectors must hold at least one symbol.
    #[error("symbol vectors must be non-empty")]
    EmptyVector,
}

/// Deterministic Miller-Rabin primality test, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// A validated prime modulus `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Modulus(u64);

impl Modulus {
    pub fn new(q: u64) -> Result<Self, FieldError> {
        if is_prime(q) {
            Ok(Modulus(q))
        } else {
            Err(FieldError::InvalidModulus(q))
        }
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }
}

impl<'de> Deserialize<'de> for Modulus {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let q = u64::deserialize(d)?;
        Modulus::new(q).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A residue modulo a prime, always in `[0, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    modulus: Modulus,
}

impl FieldElement {
    /// Builds an element, reducing `value` modulo `q`.
    pub fn new(value: u64, modulus: Modulus) -> Self {
        FieldElement {
            value: value % modulus.get(),
            modulus,
        }
    }

    pub fn zero(modulus: Modulus) -> Self {
        FieldElement { value: 0, modulus }
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> Modulus {
        self.modulus
    }

    /// Field addition. Fails when the operands belong to different fields.
    pub fn try_add(self, other: FieldElement) -> Result<FieldElement, FieldError> {
        if self.modulus != other.modulus {
            return Err(FieldError::ModulusMismatch {
                left: self.modulus.get(),
                right: other.modulus.get(),
            });
        }
        Ok(FieldElement {
            value: add_mod(self.value, other.value, self.modulus.get()),
            modulus: self.modulus,
        })
    }

    pub fn try_sub(self, other: FieldElement) -> Result<FieldElement, FieldError> {
        self.try_add(-other)
    }
}

impl std::ops::Neg for FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        FieldElement {
            value: neg_mod(self.value, self.modulus.get()),
            modulus: self.modulus,
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus)
    }
}

#[inline]
fn add_mod(a: u64, b: u64, q: u64) -> u64 {
    // Operands are reduced, so the u128 sum cannot overflow.
    ((a as u128 + b as u128) % q as u128) as u64
}

#[inline]
fn neg_mod(a: u64, q: u64) -> u64 {
    if a == 0 {
        0
    } else {
        q - a
    }
}

/// A fixed-length sequence of symbols over one prime field.
///
/// Serializes as a bare array of integers; the modulus travels separately in
/// whatever document embeds the vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolVector {
    modulus: Modulus,
    symbols: Vec<u64>,
}

impl SymbolVector {
    /// Builds a vector from raw values, reducing each modulo `q`.
    pub fn new(values: Vec<u64>, modulus: Modulus) -> Result<Self, FieldError> {
        if values.is_empty() {
            return Err(FieldError::EmptyVector);
        }
        let q = modulus.get();
        Ok(SymbolVector {
            modulus,
            symbols: values.into_iter().map(|v| v % q).collect(),
        })
    }

    /// Convenience constructor taking a raw modulus that is validated first.
    pub fn from_values(values: &[u64], q: u64) -> Result<Self, FieldError> {
        SymbolVector::new(values.to_vec(), Modulus::new(q)?)
    }

    pub fn zeros(len: usize, modulus: Modulus) -> Result<Self, FieldError> {
        SymbolVector::new(vec![0; len], modulus)
    }

    pub fn from_elements(elements: &[FieldElement]) -> Result<Self, FieldError> {
        let first = elements.first().ok_or(FieldError::EmptyVector)?;
        let modulus = first.modulus();
        let mut symbols = Vec::with_capacity(elements.len());
        for e in elements {
            if e.modulus() != modulus {
                return Err(FieldError::ModulusMismatch {
                    left: modulus.get(),
                    right: e.modulus().get(),
                });
            }
            symbols.push(e.value());
        }
        Ok(SymbolVector { modulus, symbols })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    /// Always false: vectors are non-empty by construction.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    #[inline]
    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    /// Raw reduced values.
    #[inline]
    pub fn values(&self) -> &[u64] {
        &self.symbols
    }

    pub fn get(&self, index: usize) -> Option<FieldElement> {
        self.symbols.get(index).map(|&value| FieldElement {
            value,
            modulus: self.modulus,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = FieldElement> + '_ {
        self.symbols.iter().map(move |&value| FieldElement {
            value,
            modulus: self.modulus,
        })
    }

    /// True when the vector has the given length and modulus.
    pub fn has_shape(&self, len: usize, modulus: Modulus) -> bool {
        self.symbols.len() == len && self.modulus == modulus
    }

    fn check_compatible(&self, other: &SymbolVector) -> Result<(), FieldError> {
        if self.modulus != other.modulus {
            return Err(FieldError::ShapeMismatch(format!(
                "modulus {} vs {}",
                self.modulus, other.modulus
            )));
        }
        if self.len() != other.len() {
            return Err(FieldError::ShapeMismatch(format!(
                "length {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }

    /// Elementwise field sum.
    pub fn try_add(&self, other: &SymbolVector) -> Result<SymbolVector, FieldError> {
        let mut out = self.clone();
        out.add_assign_checked(other)?;
        Ok(out)
    }

    /// In-place elementwise sum.
    pub fn add_assign_checked(&mut self, other: &SymbolVector) -> Result<(), FieldError> {
        self.check_compatible(other)?;
        let q = self.modulus.get();
        for (a, &b) in self.symbols.iter_mut().zip(&other.symbols) {
            *a = add_mod(*a, b, q);
        }
        Ok(())
    }

    /// Elementwise additive inverse.
    pub fn negated(&self) -> SymbolVector {
        let q = self.modulus.get();
        SymbolVector {
            modulus: self.modulus,
            symbols: self.symbols.iter().map(|&a| neg_mod(a, q)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.symbols.iter().all(|&s| s == 0)
    }

    /// Contiguous sub-vector `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> Result<SymbolVector, FieldError> {
        if len == 0 || start + len > self.len() {
            return Err(FieldError::ShapeMismatch(format!(
                "slice [{start}, {}) out of range for length {}",
                start + len,
                self.len()
            )));
        }
        Ok(SymbolVector {
            modulus: self.modulus,
            symbols: self.symbols[start..start + len].to_vec(),
        })
    }

    /// Concatenates vectors over the same field.
    pub fn concat(parts: &[SymbolVector]) -> Result<SymbolVector, FieldError> {
        let first = parts.first().ok_or(FieldError::EmptyVector)?;
        let mut symbols = Vec::with_capacity(parts.iter().map(SymbolVector::len).sum());
        for p in parts {
            if p.modulus != first.modulus {
                return Err(FieldError::ShapeMismatch(format!(
                    "modulus {} vs {}",
                    first.modulus, p.modulus
                )));
            }
            symbols.extend_from_slice(&p.symbols);
        }
        Ok(SymbolVector {
            modulus: first.modulus,
            symbols,
        })
    }
}

impl Serialize for SymbolVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.symbols.serialize(s)
    }
}

impl fmt::Display for SymbolVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ") mod {}", self.modulus)
    }
}

/// Elementwise sum of a sequence of vectors.
///
/// An empty sequence yields the all-zero vector of the supplied shape.
pub fn vec_sum(
    vectors: &[SymbolVector],
    len: usize,
    modulus: Modulus,
) -> Result<SymbolVector, FieldError> {
    let mut acc = SymbolVector::zeros(len, modulus)?;
    for v in vectors {
        acc.add_assign_checked(v)?;
    }
    Ok(acc)
}

/// Draws one uniform residue in `[0, q)` by rejection sampling.
pub fn sample_uniform_symbol<R: RngCore + ?Sized>(q: u64, rng: &mut R) -> u64 {
    // Largest multiple of q that fits; draws at or above it are rejected.
    let zone = u64::MAX - (u64::MAX % q);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % q;
        }
    }
}

/// Samples `len` independent uniform symbols over `F_q`.
pub fn sample_uniform_vector<R: RngCore + ?Sized>(
    len: usize,
    q: u64,
    rng: &mut R,
) -> Result<SymbolVector, FieldError> {
    let modulus = Modulus::new(q)?;
    sample_vector(len, modulus, rng)
}

/// Same as [`sample_uniform_vector`] with an already validated modulus.
pub fn sample_vector<R: RngCore + ?Sized>(
    len: usize,
    modulus: Modulus,
    rng: &mut R,
) -> Result<SymbolVector, FieldError> {
    if len == 0 {
        return Err(FieldError::EmptyVector);
    }
    let q = modulus.get();
    let symbols = (0..len).map(|_| sample_uniform_symbol(q, rng)).collect();
    Ok(SymbolVector { modulus, symbols })
}
