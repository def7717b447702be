//! Bit-string helpers shared by the hasher, the experiments and the CLI.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid character {found:?} at offset {offset}; only '0', '1' and whitespace are allowed")]
pub struct BitParseError {
    pub offset: usize,
    pub found: char,
}

/// Parses ASCII `0`/`1` characters, skipping whitespace.
pub fn parse_bits(text: &str) -> Result<Vec<bool>, BitParseError> {
    text.char_indices()
        .filter(|(_, ch)| !ch.is_whitespace())
        .map(|(offset, ch)| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            found => Err(BitParseError { offset, found }),
        })
        .collect()
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Expands bytes MSB-first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&byte| (0..8).rev().map(move |i| (byte >> i) & 1 == 1))
        .collect()
}

/// The `len`-bit big-endian expansion of `value`, used to enumerate strings in order.
pub fn u64_to_bits(value: u64, len: usize) -> Vec<bool> {
    (0..len).rev().map(|i| (value >> i) & 1 == 1).collect()
}

/// True if `bits` contains three consecutive ones.
pub fn contains_triple_one(bits: &[bool]) -> bool {
    bits.windows(3).any(|w| w.iter().all(|&b| b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_ignores_whitespace() {
        assert_eq!(
            parse_bits(" 10\n0 1\t").unwrap(),
            vec![true, false, false, true]
        );
        assert_eq!(parse_bits("").unwrap(), Vec::<bool>::new());
        assert_eq!(
            parse_bits("10x1"),
            Err(BitParseError {
                offset: 2,
                found: 'x'
            })
        );
    }

    #[test]
    fn bytes_are_msb_first() {
        assert_eq!(bits_to_string(&bytes_to_bits(&[0x97])), "10010111");
        assert_eq!(
            bits_to_string(&bytes_to_bits(&[0x00, 0xff])),
            "0000000011111111"
        );
        assert!(bytes_to_bits(&[]).is_empty());
        assert_eq!(bits_to_string(&u64_to_bits(5, 4)), "0101");
    }

    #[test]
    fn triple_one_detection() {
        assert!(contains_triple_one(&parse_bits("0111").unwrap()));
        assert!(!contains_triple_one(&parse_bits("1101101").unwrap()));
        assert!(!contains_triple_one(&[]));
    }
}
