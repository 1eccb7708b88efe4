//! Bit strings as written in configs and on the command line.

use crate::{LabError, Result};

/// Parses a string of `0` and `1` characters.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(LabError::arg(format!("'{c}' is not a bit"))),
        })
        .collect()
}

pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Big-endian value of a bit string of at most 64 bits.
pub fn bits_to_u64(bits: &[bool]) -> Result<u64> {
    if bits.len() > 64 {
        return Err(LabError::arg("bit string longer than 64 bits"));
    }
    Ok(bits.iter().fold(0u64, |acc, &b| acc << 1 | b as u64))
}

/// The `width`-bit big-endian string of `value`.
pub fn u64_to_bits(value: u64, width: usize) -> Vec<bool> {
    (0..width).rev().map(|i| i < 64 && value >> i & 1 == 1).collect()
}
