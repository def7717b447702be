//! Hash parameters: the prime modulus, its published presets, and
//! Miller–Rabin testing / generation of primes.

use std::fmt;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::matrix::{cookie_generator, Label, ModMat, Modulus};

/// 256-bit preset prime, decimal.
pub const PAPER_256: &str =
    "112130193533856809970443000822829414572933780556534369189742044710202716867171";

/// 512-bit preset prime, decimal.
pub const PAPER_512: &str = "125967099140123813315752220780255508336665456536865562994\
12073058759112539196792509169699422775197821869177859263195\
184957153059906758380302238329723774073";

/// Miller–Rabin rounds used when validating or generating primes.
pub const MR_ROUNDS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamsError {
    #[error("modulus {0} must be an odd integer greater than 13")]
    TooSmall(BigUint),
    #[error("modulus {0} is even")]
    Even(BigUint),
    #[error("modulus {0} failed the Miller-Rabin test")]
    Composite(BigUint),
    #[error("unknown preset {0:?} (expected paper-256 or paper-512)")]
    UnknownPreset(String),
    #[error("cannot parse {0:?} as a decimal integer")]
    Parse(String),
    #[error("cannot generate a prime of {0} bits (need at least 5)")]
    BitSize(u64),
}

/// Modulus plus the three hash generators reduced modulo it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashParams {
    modulus: Modulus,
    generators: [ModMat; 3],
    preset: Option<&'static str>,
}

impl HashParams {
    /// Validates `p` (odd, > 13, probable prime) and reduces the generators.
    pub fn new(p: BigUint) -> Result<Self, ParamsError> {
        Self::check_shape(&p)?;
        if !is_probable_prime(&p, MR_ROUNDS) {
            return Err(ParamsError::Composite(p));
        }
        Ok(Self::build(p, None))
    }

    /// Skips the primality test; the caller vouches for `p`.
    pub fn assume_prime(p: BigUint) -> Result<Self, ParamsError> {
        Self::check_shape(&p)?;
        Ok(Self::build(p, None))
    }

    pub fn from_u64(p: u64) -> Result<Self, ParamsError> {
        Self::new(BigUint::from(p))
    }

    pub fn from_decimal(s: &str) -> Result<Self, ParamsError> {
        Self::new(parse_decimal(s)?)
    }

    /// `paper-256` or `paper-512`.
    pub fn preset(name: &str) -> Result<Self, ParamsError> {
        let (key, digits) = match name {
            "paper-256" => ("paper-256", PAPER_256),
            "paper-512" => ("paper-512", PAPER_512),
            other => return Err(ParamsError::UnknownPreset(other.to_string())),
        };
        let p = parse_decimal(digits)?;
        Ok(Self::build(p, Some(key)))
    }

    pub const PRESET_NAMES: [&'static str; 2] = ["paper-256", "paper-512"];

    fn check_shape(p: &BigUint) -> Result<(), ParamsError> {
        if *p <= BigUint::from(13u32) {
            return Err(ParamsError::TooSmall(p.clone()));
        }
        if p.is_even() {
            return Err(ParamsError::Even(p.clone()));
        }
        Ok(())
    }

    fn build(p: BigUint, preset: Option<&'static str>) -> Self {
        let modulus = Modulus::new(p);
        let reduce = |l| {
            cookie_generator(l)
                .expect("hash generator")
                .reduce(&modulus)
        };
        let generators = [reduce(Label::A), reduce(Label::B), reduce(Label::C)];
        HashParams {
            modulus,
            generators,
            preset,
        }
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn preset_name(&self) -> Option<&'static str> {
        self.preset
    }

    /// Reduced generator matrix for `A`, `B` or `C`.
    pub fn generator(&self, label: Label) -> &ModMat {
        match label {
            Label::A => &self.generators[0],
            Label::B => &self.generators[1],
            Label::C => &self.generators[2],
            other => panic!("{other} is not a hash generator"),
        }
    }

    /// Serialized digest length in bits: four entries of `bits(p)` each.
    pub fn digest_bits(&self) -> u64 {
        4 * self.modulus.bits()
    }
}

impl fmt::Display for HashParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.preset {
            Some(name) => write!(f, "{name} ({} bits)", self.modulus.bits()),
            None => write!(f, "p = {} ({} bits)", self.modulus, self.modulus.bits()),
        }
    }
}

pub fn parse_decimal(s: &str) -> Result<BigUint, ParamsError> {
    let t = s.trim();
    BigUint::parse_bytes(t.as_bytes(), 10).ok_or_else(|| ParamsError::Parse(s.to_string()))
}

const SMALL_PRIMES: [u32; 15] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];

/// Miller–Rabin with `rounds` bases drawn from a fixed-seed generator, so the
/// answer for a given `n` never changes between runs.
pub fn is_probable_prime(n: &BigUint, rounds: usize) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &sp in &SMALL_PRIMES {
        let sp = BigUint::from(sp);
        if *n == sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().expect("n - 1 > 0");
    let d = &n_minus_one >> s;

    let mut rng = ChaCha20Rng::seed_from_u64(0x4d52_5f42_4153_4553);
    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n_minus_one);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'witness;
            }
            if x == one {
                return false;
            }
        }
        return false;
    }
    true
}

/// Draws odd candidates with the top bit set until one passes [`MR_ROUNDS`]
/// rounds of Miller–Rabin. Reproducible for a fixed seeded `rng`.
pub fn generate_prime<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> Result<BigUint, ParamsError> {
    if bits < 5 {
        return Err(ParamsError::BitSize(bits));
    }
    loop {
        let mut candidate = rng.gen_biguint(bits);
        candidate.set_bit(bits - 1, true);
        candidate.set_bit(0, true);
        if is_probable_prime(&candidate, MR_ROUNDS) {
            return Ok(candidate);
        }
    }
}

/// [`generate_prime`] driven by a ChaCha20 stream seeded with `seed`.
pub fn generate_prime_seeded(bits: u64, seed: u64) -> Result<BigUint, ParamsError> {
    generate_prime(bits, &mut ChaCha20Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_prime_and_sized() {
        let p256 = HashParams::preset("paper-256").unwrap();
        assert_eq!(p256.modulus().bits(), 256);
        assert_eq!(p256.digest_bits(), 1024);
        assert!(is_probable_prime(p256.modulus().value(), MR_ROUNDS));
        assert_eq!(p256.modulus().value().to_string(), PAPER_256);

        let p512 = HashParams::preset("paper-512").unwrap();
        assert_eq!(p512.modulus().bits(), 512);
        assert_eq!(p512.digest_bits(), 2048);
        assert!(is_probable_prime(p512.modulus().value(), MR_ROUNDS));
        assert!(HashParams::preset("paper-1024").is_err());
    }

    #[test]
    fn small_primes_and_composites() {
        let primes: Vec<u64> = (0..200u64)
            .filter(|&n| is_probable_prime(&BigUint::from(n), 20))
            .collect();
        let sieve: Vec<u64> = (0..200u64)
            .filter(|&n| n >= 2 && (2..n).all(|d| n % d != 0))
            .collect();
        assert_eq!(primes, sieve);
        // Carmichael numbers
        for n in [561u64, 1105, 1729, 2465, 2821, 6601, 8911] {
            assert!(!is_probable_prime(&BigUint::from(n), MR_ROUNDS), "{n}");
        }
        assert!(is_probable_prime(
            &BigUint::from(1_099_511_627_689u64),
            MR_ROUNDS
        ));
    }

    #[test]
    fn modulus_validation() {
        assert!(matches!(
            HashParams::from_u64(13),
            Err(ParamsError::TooSmall(_))
        ));
        assert!(matches!(
            HashParams::from_u64(1024),
            Err(ParamsError::Even(_))
        ));
        assert!(matches!(
            HashParams::from_u64(1001),
            Err(ParamsError::Composite(_))
        ));
        assert!(HashParams::assume_prime(BigUint::from(1001u32)).is_ok());
        assert!(HashParams::from_u64(17).is_ok());
        assert!(matches!(
            HashParams::from_decimal("12x"),
            Err(ParamsError::Parse(_))
        ));
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let p = generate_prime_seeded(64, 7).unwrap();
        assert_eq!(p.bits(), 64);
        assert_eq!(p, generate_prime_seeded(64, 7).unwrap());
        assert!(is_probable_prime(&p, MR_ROUNDS));
        assert!(generate_prime_seeded(3, 7).is_err());
    }
}
