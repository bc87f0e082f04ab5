//! Bitstrings as integers. Character `q` of the text form is qubit `q`, and
//! qubit 0 is the most significant bit of the integer.

use crate::error::{Error, Result};

pub fn format_bits(index: usize, n: usize) -> String {
    (0..n)
        .map(|q| if index >> (n - 1 - q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub fn parse_bits(text: &str, n: usize) -> Result<usize> {
    if text.len() != n {
        return Err(Error::InvalidArgument(format!(
            "bitstring `{text}` has {} characters, expected {n}",
            text.len()
        )));
    }
    if n >= usize::BITS as usize {
        return Err(Error::InvalidArgument(format!("{n}-bit strings are not supported")));
    }
    text.chars().try_fold(0usize, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok(acc << 1 | 1),
        _ => Err(Error::InvalidArgument(format!("bitstring `{text}` contains `{ch}`"))),
    })
}
