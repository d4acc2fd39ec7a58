//! Binary extension fields GF(2^m), 2 <= m <= 16, via log/antilog tables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("GF(2^{0}) is not supported (degree must be in 2..=16)")]
    UnsupportedDegree(u32),
}

/// Primitive polynomials indexed by degree, bit `i` holding the coefficient
/// of `x^i`.
const PRIMITIVE: [u32; 15] = [
    0b111, 0b1011, 0b10011, 0b100101, 0b1000011, 0b10001001, 0x11D, 0x211, 0x409, 0x805, 0x1053,
    0x201B, 0x4443, 0x8003, 0x1100B,
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Field {
    bits: u32,
    poly: u32,
    /// `exp[i] = x^i`, stored twice over so products need no reduction.
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl Field {
    pub fn new(bits: u32) -> Result<Self, FieldError> {
        if !(2..=16).contains(&bits) {
            return Err(FieldError::UnsupportedDegree(bits));
        }
        let poly = PRIMITIVE[bits as usize - 2];
        let order = (1usize << bits) - 1;
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; order + 1];
        let mut v: u32 = 1;
        for (i, slot) in exp.iter_mut().take(order).enumerate() {
            *slot = v as u16;
            log[v as usize] = i as u16;
            v <<= 1;
            if v >> bits != 0 {
                v ^= poly;
            }
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Field {
            bits,
            poly,
            exp,
            log,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    /// Number of elements `2^m`.
    pub fn size(&self) -> usize {
        1 << self.bits
    }

    /// True when `x` generates the multiplicative group, i.e. the reduction
    /// polynomial is primitive.
    pub fn is_primitive(&self) -> bool {
        let order = self.size() - 1;
        let mut seen = vec![false; self.size()];
        self.exp[..order].iter().all(|&e| {
            let fresh = e != 0 && !seen[e as usize];
            seen[e as usize] = true;
            fresh
        })
    }

    pub fn add(&self, a: u16, b: u16) -> u16 {
        a ^ b
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u16) -> Option<u16> {
        if a == 0 {
            return None;
        }
        let order = self.size() - 1;
        Some(self.exp[(order - self.log[a as usize] as usize) % order])
    }

    pub fn div(&self, a: u16, b: u16) -> Option<u16> {
        self.inv(b).map(|ib| self.mul(a, ib))
    }
}

/// Field used for payload coding. Symbols are one byte for GF(2^8) and two
/// big-endian bytes for GF(2^16).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldSpec {
    Gf256,
    #[default]
    Gf65536,
}

impl FieldSpec {
    pub fn bits(self) -> u32 {
        match self {
            FieldSpec::Gf256 => 8,
            FieldSpec::Gf65536 => 16,
        }
    }

    pub fn symbol_bytes(self) -> usize {
        self.bits() as usize / 8
    }

    pub fn field(self) -> Field {
        Field::new(self.bits()).expect("supported degree")
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldSpec::Gf256 => "GF(2^8)",
            FieldSpec::Gf65536 => "GF(2^16)",
        }
    }
}

/// Splits a payload into field symbols.
pub fn to_symbols(spec: FieldSpec, bytes: &[u8]) -> Vec<u16> {
    match spec {
        FieldSpec::Gf256 => bytes.iter().map(|&b| b as u16).collect(),
        FieldSpec::Gf65536 => bytes
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect(),
    }
}

pub fn from_symbols(spec: FieldSpec, symbols: &[u16]) -> Vec<u8> {
    match spec {
        FieldSpec::Gf256 => symbols.iter().map(|&s| s as u8).collect(),
        FieldSpec::Gf65536 => symbols.iter().flat_map(|s| s.to_be_bytes()).collect(),
    }
}
