//! Bitstrings over `n` qubits and the Fourier characters of `F_2^n`.
//!
//! Qubit `i` (1-based) is stored in bit `i - 1` of the integer, so the
//! integer value of a bitstring is also its index into a dense
//! probability vector.

use crate::error::{check_same_n, Error, Result};

/// Largest qubit count for which dense vectors are allowed.
pub const MAX_QUBITS: u32 = 26;

/// An `n`-bit outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: u64,
    n: u32,
}

impl BitString {
    pub fn new(bits: u64, n: u32) -> Result<Self> {
        check_qubits(n)?;
        if bits >> n != 0 {
            return Err(Error::Domain(format!("bits {bits:#b} do not fit in {n} qubits")));
        }
        Ok(Self { bits, n })
    }

    pub fn zeros(n: u32) -> Result<Self> {
        Self::new(0, n)
    }

    pub fn ones(n: u32) -> Result<Self> {
        check_qubits(n)?;
        Ok(Self { bits: (1u64 << n) - 1, n })
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn index(&self) -> usize {
        self.bits as usize
    }

    /// Value of qubit `i`, 1-based.
    pub fn bit(&self, i: u32) -> bool {
        debug_assert!(i >= 1 && i <= self.n);
        (self.bits >> (i - 1)) & 1 == 1
    }

    /// Most-significant qubit first, e.g. `"0101"`.
    pub fn to_bit_string(&self) -> String {
        format!("{:0width$b}", self.bits, width = self.n as usize)
    }

    /// Inverse of [`BitString::to_bit_string`].
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Domain("empty bitstring".into()));
        }
        if s.len() > MAX_QUBITS as usize {
            return Err(Error::Resource(format!("bitstring longer than {MAX_QUBITS} qubits")));
        }
        let mut bits = 0u64;
        for c in s.chars() {
            bits <<= 1;
            match c {
                '0' => {}
                '1' => bits |= 1,
                other => return Err(Error::Domain(format!("invalid character {other:?} in bitstring"))),
            }
        }
        Self::new(bits, s.len() as u32)
    }
}

/// Indicator of a subset `S` of the qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    mask: u64,
    n: u32,
}

impl SubsetMask {
    pub fn new(mask: u64, n: u32) -> Result<Self> {
        check_qubits(n)?;
        if mask >> n != 0 {
            return Err(Error::Domain(format!("mask {mask:#b} does not fit in {n} qubits")));
        }
        Ok(Self { mask, n })
    }

    /// Builds a mask from 1-based qubit labels.
    pub fn from_qubits(qubits: &[u32], n: u32) -> Result<Self> {
        let mut mask = 0u64;
        for &q in qubits {
            if q == 0 || q > n {
                return Err(Error::Domain(format!("qubit {q} outside 1..={n}")));
            }
            mask |= 1 << (q - 1);
        }
        Self::new(mask, n)
    }

    pub fn empty(n: u32) -> Result<Self> {
        Self::new(0, n)
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn weight(&self) -> u32 {
        self.mask.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    /// 1-based qubit labels in ascending order.
    pub fn qubits(&self) -> Vec<u32> {
        (1..=self.n).filter(|&q| (self.mask >> (q - 1)) & 1 == 1).collect()
    }
}

pub(crate) fn check_qubits(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("qubit count must be at least 1".into()));
    }
    if n > MAX_QUBITS {
        return Err(Error::Resource(format!("{n} qubits exceeds the dense cap of {MAX_QUBITS}")));
    }
    Ok(())
}

pub fn hamming_distance(x: BitString, y: BitString) -> Result<u32> {
    check_same_n(x.n, y.n)?;
    Ok((x.bits ^ y.bits).count_ones())
}

/// `(-1)^{|S ∩ x|}` as `+1` or `-1`.
pub fn fourier_character(s: SubsetMask, x: BitString) -> Result<i8> {
    check_same_n(s.n, x.n)?;
    Ok(character(s.mask, x.bits))
}

#[inline]
pub(crate) fn character(mask: u64, bits: u64) -> i8 {
    if (mask & bits).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}
