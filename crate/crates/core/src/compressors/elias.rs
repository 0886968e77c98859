//! Elias-gamma codes for positive integers.

use std::fmt;

use crate::error::{Error, Result};

/// A sequence of bits, most significant first within each codeword.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        BitString(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Parses a string of `'0'`/`'1'` characters.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Codec(format!("unexpected character `{other}`"))),
            })
            .collect::<Result<Vec<bool>>>()
            .map(BitString)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Length in bits of the gamma codeword for `v >= 1`: `2⌊log₂ v⌋ + 1`.
pub fn gamma_len(v: u64) -> u64 {
    debug_assert!(v >= 1);
    2 * u64::from(63 - v.leading_zeros()) + 1
}

/// Appends the gamma codeword of `v`: `⌊log₂ v⌋` zeros followed by `v` in binary.
pub fn gamma_encode_into(out: &mut BitString, v: u64) -> Result<()> {
    if v == 0 {
        return Err(Error::Codec("Elias-gamma cannot encode 0; shift values by one".into()));
    }
    let nbits = 63 - v.leading_zeros();
    for _ in 0..nbits {
        out.push(false);
    }
    for k in (0..=nbits).rev() {
        out.push((v >> k) & 1 == 1);
    }
    Ok(())
}

pub fn elias_encode(values: &[u64]) -> Result<BitString> {
    let mut out = BitString::new();
    for &v in values {
        gamma_encode_into(&mut out, v)?;
    }
    Ok(out)
}

pub fn elias_decode(bits: &BitString) -> Result<Vec<u64>> {
    let b = bits.bits();
    let mut pos = 0;
    let mut values = Vec::new();
    while pos < b.len() {
        let mut zeros = 0;
        while pos < b.len() && !b[pos] {
            zeros += 1;
            pos += 1;
        }
        if zeros > 63 {
            return Err(Error::Codec(format!("codeword prefix of {zeros} zeros overflows u64")));
        }
        if pos + zeros + 1 > b.len() {
            return Err(Error::Codec(format!("truncated codeword at bit {pos}")));
        }
        let mut v = 0u64;
        for &bit in &b[pos..pos + zeros + 1] {
            v = (v << 1) | u64::from(bit);
        }
        pos += zeros + 1;
        values.push(v);
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_codewords() {
        assert_eq!(elias_encode(&[1]).unwrap().to_string(), "1");
        assert_eq!(elias_encode(&[2]).unwrap().to_string(), "010");
        assert_eq!(elias_encode(&[4]).unwrap().to_string(), "00100");
        assert_eq!(elias_encode(&[5, 1]).unwrap().to_string(), "001011");
        assert_eq!(gamma_len(4), 5);
        assert_eq!(gamma_len(1), 1);
    }

    #[test]
    fn zero_and_malformed() {
        assert!(elias_encode(&[0]).is_err());
        assert!(elias_decode(&BitString::parse("001").unwrap()).is_err());
        assert!(elias_decode(&BitString::parse("0000").unwrap()).is_err());
        assert!(BitString::parse("012").is_err());
        assert_eq!(elias_decode(&BitString::new()).unwrap(), Vec::<u64>::new());
    }

    proptest! {
        #[test]
        fn roundtrip(values in proptest::collection::vec(1u64..=u64::MAX, 0..50)) {
            let enc = elias_encode(&values).unwrap();
            let len: u64 = values.iter().map(|&v| gamma_len(v)).sum();
            prop_assert_eq!(enc.len() as u64, len);
            prop_assert_eq!(elias_decode(&enc).unwrap(), values);
        }
    }
}
