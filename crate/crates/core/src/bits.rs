//! Basis-index and bitstring conventions.
//!
//! Qubit `k` is bit `k` of a basis index (qubit 0 is the least significant
//! bit). Rendered bitstrings put variable 0 leftmost. Every conversion between
//! the two goes through this module.

/// Bit values of `index` for variables `0..n`, variable 0 first.
pub fn index_to_bits(index: usize, n: usize) -> Vec<u8> {
    (0..n).map(|k| ((index >> k) & 1) as u8).collect()
}

/// Inverse of [`index_to_bits`]. Any nonzero entry counts as a set bit.
pub fn bits_to_index(bits: &[u8]) -> usize {
    bits.iter()
        .enumerate()
        .filter(|(_, &b)| b != 0)
        .fold(0usize, |acc, (k, _)| acc | (1 << k))
}

/// Renders `index` as an `n`-character string of `0`/`1`, variable 0 leftmost.
pub fn index_to_string(index: usize, n: usize) -> String {
    (0..n)
        .map(|k| if (index >> k) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Parses a string produced by [`index_to_string`]. Returns `None` on any
/// character other than `0` or `1`.
pub fn string_to_index(s: &str) -> Option<usize> {
    s.chars()
        .enumerate()
        .try_fold(0usize, |acc, (k, c)| match c {
            '0' => Some(acc),
            '1' => Some(acc | (1 << k)),
            _ => None,
        })
}

pub fn bits_to_string(bits: &[u8]) -> String {
    bits.iter()
        .map(|&b| if b != 0 { '1' } else { '0' })
        .collect()
}
