//! Finalized hash values and their fixed-width serialization.
//!
//! A digest is the four residues `(a, b, c, d)` of the product matrix in
//! row-major order. Each entry is written big-endian in exactly `bits(p)`
//! bits, so a 256-bit prime gives 1024-bit digests and a 512-bit prime gives
//! 2048-bit digests. The hex form is the same bit string in 4-bit groups
//! (lowercase on output, either case on input).

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::matrix::{Mat2, MatrixError, ModMat, Modulus};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DigestError {
    #[error("digests use different moduli")]
    ParamsMismatch(#[from] MatrixError),
    #[error("expected {expected} {unit}, found {found}")]
    Width {
        expected: u64,
        found: u64,
        unit: &'static str,
    },
    #[error("invalid {radix} digit {found:?}")]
    Digit { radix: &'static str, found: char },
    #[error("entry {index} is not reduced modulo p")]
    Unreduced { index: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digest {
    matrix: ModMat,
}

impl Digest {
    pub fn identity(modulus: &Modulus) -> Self {
        Digest {
            matrix: ModMat::identity(modulus),
        }
    }

    pub fn from_matrix(matrix: ModMat) -> Self {
        Digest { matrix }
    }

    pub fn matrix(&self) -> &ModMat {
        &self.matrix
    }

    pub fn entries(&self) -> &Mat2<BigUint> {
        self.matrix.entries()
    }

    pub fn modulus(&self) -> &Modulus {
        self.matrix.modulus()
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_identity()
    }

    /// Hash of a concatenation: `self · other`.
    pub fn combine(&self, other: &Digest) -> Result<Digest, DigestError> {
        Ok(Digest {
            matrix: self.matrix.mat_mul(&other.matrix)?,
        })
    }

    /// Serialized length in bits.
    pub fn bit_len(&self) -> u64 {
        4 * self.modulus().bits()
    }

    fn packed(&self) -> BigUint {
        let w = self.modulus().bits();
        let m = self.entries();
        let mut acc = BigUint::zero();
        for e in [&m.a, &m.b, &m.c, &m.d] {
            acc <<= w;
            acc |= e;
        }
        acc
    }

    fn unpack(packed: BigUint, modulus: &Modulus) -> Result<Digest, DigestError> {
        let w = modulus.bits();
        let mask = (BigUint::one() << w) - 1u32;
        let mut fields: Vec<BigUint> = (0..4u64)
            .map(|i| (&packed >> (w * (3 - i))) & &mask)
            .collect();
        for (index, f) in fields.iter().enumerate() {
            if f >= modulus.value() {
                return Err(DigestError::Unreduced { index });
            }
        }
        let d = fields.pop().expect("four fields");
        let c = fields.pop().expect("four fields");
        let b = fields.pop().expect("four fields");
        let a = fields.pop().expect("four fields");
        Ok(Digest {
            matrix: ModMat::new(Mat2::new(a, b, c, d), modulus),
        })
    }

    /// `0`/`1` characters, `4 · bits(p)` of them.
    pub fn to_bit_string(&self) -> String {
        let width = self.bit_len() as usize;
        format!("{:0>width$}", self.packed().to_str_radix(2))
    }

    pub fn to_bits(&self) -> Vec<bool> {
        self.to_bit_string().bytes().map(|b| b == b'1').collect()
    }

    pub fn to_hex(&self) -> String {
        let width = self.modulus().bits() as usize;
        format!("{:0>width$}", self.packed().to_str_radix(16))
    }

    pub fn from_bit_string(text: &str, modulus: &Modulus) -> Result<Digest, DigestError> {
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(found) = cleaned.chars().find(|c| *c != '0' && *c != '1') {
            return Err(DigestError::Digit {
                radix: "binary",
                found,
            });
        }
        let expected = 4 * modulus.bits();
        if cleaned.len() as u64 != expected {
            return Err(DigestError::Width {
                expected,
                found: cleaned.len() as u64,
                unit: "bits",
            });
        }
        let packed = BigUint::parse_bytes(cleaned.as_bytes(), 2).expect("validated binary");
        Self::unpack(packed, modulus)
    }

    pub fn from_hex(text: &str, modulus: &Modulus) -> Result<Digest, DigestError> {
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(found) = cleaned.chars().find(|c| !c.is_ascii_hexdigit()) {
            return Err(DigestError::Digit {
                radix: "hex",
                found,
            });
        }
        let expected = modulus.bits();
        if cleaned.len() as u64 != expected {
            return Err(DigestError::Width {
                expected,
                found: cleaned.len() as u64,
                unit: "hex digits",
            });
        }
        let packed = BigUint::parse_bytes(cleaned.as_bytes(), 16).expect("validated hex");
        Self::unpack(packed, modulus)
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::IntMat;
    use crate::params::HashParams;
    use proptest::prelude::*;

    #[test]
    fn identity_layout_256() {
        let params = HashParams::preset("paper-256").unwrap();
        let d = Digest::identity(params.modulus());
        let bits = d.to_bit_string();
        assert_eq!(bits.len(), 1024);
        let expected = format!(
            "{}1{}{}{}1",
            "0".repeat(255),
            "0".repeat(256),
            "0".repeat(256),
            "0".repeat(255)
        );
        assert_eq!(bits, expected);
        assert_eq!(d.to_hex().len(), 256);
        assert_eq!(
            Digest::from_hex(&d.to_hex().to_uppercase(), params.modulus()).unwrap(),
            d
        );
    }

    #[test]
    fn width_512() {
        let params = HashParams::preset("paper-512").unwrap();
        let d = IntMat::from_i64(1, 2, 2, 5).reduce(params.modulus());
        let d = Digest::from_matrix(d);
        assert_eq!(d.to_bits().len(), 2048);
        assert_eq!(d.to_hex().len(), 512);
    }

    #[test]
    fn small_modulus_hex() {
        let p = Modulus::from(1009);
        let d = Digest::from_matrix(IntMat::from_i64(1, 2, 2, 5).reduce(&p));
        // 10-bit fields: 0000000001 0000000010 0000000010 0000000101
        assert_eq!(
            d.to_bit_string(),
            "0000000001000000001000000000100000000101"
        );
        assert_eq!(d.to_hex(), "0040200805");
    }

    #[test]
    fn parse_errors() {
        let p = Modulus::from(1009);
        assert!(matches!(
            Digest::from_hex("00402008", &p),
            Err(DigestError::Width { .. })
        ));
        assert!(matches!(
            Digest::from_hex("004020080g", &p),
            Err(DigestError::Digit { .. })
        ));
        // a = 1023 >= 1009
        assert!(matches!(
            Digest::from_hex("ffc0200805", &p),
            Err(DigestError::Unreduced { index: 0 })
        ));
        assert!(matches!(
            Digest::identity(&p).combine(&Digest::identity(&Modulus::from(1013))),
            Err(DigestError::ParamsMismatch(_))
        ));
    }

    proptest! {
        #[test]
        fn serialization_round_trips(a in 0u64..1009, b in 0u64..1009, c in 0u64..1009, d in 0u64..1009) {
            let p = Modulus::from(1009);
            let m = ModMat::new(Mat2::new(a.into(), b.into(), c.into(), d.into()), &p);
            let digest = Digest::from_matrix(m);
            prop_assert_eq!(Digest::from_hex(&digest.to_hex(), &p).unwrap(), digest.clone());
            prop_assert_eq!(Digest::from_bit_string(&digest.to_bit_string(), &p).unwrap(), digest);
        }
    }
}
