//! 2×2 matrices over the integers and over `Z/pZ`.
//!
//! Integer matrices (`IntMat`) carry the exact products used by the analysis
//! and attack code. Residue matrices (`ModMat`) carry hash state; their
//! entries are always canonical, i.e. in `[0, p)`.
//!
//! The hash generators `A`, `B`, `C` have one entry equal to 2 and the others
//! in `{0, 1}`, so right-multiplying by them needs only modular additions.
//! [`mul_by_generator`] implements that schedule and records what it did in an
//! [`OpCounter`].

use std::collections::HashSet;
use std::fmt;
use std::ops::Mul;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: BigUint, right: BigUint },
    #[error("generator {0} has no add-only multiplication schedule")]
    UnknownGenerator(Label),
    #[error("duplicate generator label {0}")]
    DuplicateLabel(Label),
    #[error("generator {label} has determinant {det}, expected ±1")]
    NotUnimodular { label: Label, det: BigInt },
    #[error("generator set {0:?} is empty")]
    EmptySet(String),
}

/// Row-major 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T> Mat2<T> {
    pub const fn new(a: T, b: T, c: T, d: T) -> Self {
        Mat2 { a, b, c, d }
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> [&T; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Mat2<U> {
        Mat2::new(f(&self.a), f(&self.b), f(&self.c), f(&self.d))
    }
}

impl<T: fmt::Display> fmt::Display for Mat2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Matrix over the arbitrary-precision integers.
pub type IntMat = Mat2<BigInt>;

impl Mat2<BigInt> {
    pub fn identity() -> Self {
        Mat2::new(BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one())
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.c.is_zero() && self.d.is_one()
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    /// Exact inverse of a matrix with determinant ±1; `None` otherwise.
    pub fn unimodular_inverse(&self) -> Option<IntMat> {
        let det = self.det();
        if det.is_one() {
            Some(Mat2::new(
                self.d.clone(),
                -&self.b,
                -&self.c,
                self.a.clone(),
            ))
        } else if (-&det).is_one() {
            Some(Mat2::new(
                -&self.d,
                self.b.clone(),
                self.c.clone(),
                -&self.a,
            ))
        } else {
            None
        }
    }

    /// Largest absolute value among the four entries.
    pub fn max_abs_entry(&self) -> BigInt {
        self.entries()
            .into_iter()
            .map(|x| x.abs())
            .max()
            .expect("four entries")
    }

    /// Sum of the absolute values of the four entries.
    pub fn abs_entry_sum(&self) -> BigInt {
        self.entries().into_iter().map(|x| x.abs()).sum()
    }

    pub fn has_negative_entry(&self) -> bool {
        self.entries().into_iter().any(|x| x.is_negative())
    }

    /// Canonical reduction of every entry into `[0, p)`.
    pub fn reduce(&self, modulus: &Modulus) -> ModMat {
        let p = BigInt::from_biguint(Sign::Plus, modulus.value().clone());
        let red = |x: &BigInt| {
            let r = ((x % &p) + &p) % &p;
            r.to_biguint().expect("non-negative after reduction")
        };
        ModMat {
            m: self.map(red),
            modulus: modulus.clone(),
        }
    }
}

fn mul_generic<T>(lhs: &Mat2<T>, rhs: &Mat2<T>) -> Mat2<T>
where
    for<'a> &'a T: Mul<&'a T, Output = T>,
    T: std::ops::Add<Output = T>,
{
    Mat2::new(
        &lhs.a * &rhs.a + &lhs.b * &rhs.c,
        &lhs.a * &rhs.b + &lhs.b * &rhs.d,
        &lhs.c * &rhs.a + &lhs.d * &rhs.c,
        &lhs.c * &rhs.b + &lhs.d * &rhs.d,
    )
}

impl<'a> Mul<&'a IntMat> for &'a IntMat {
    type Output = IntMat;

    fn mul(self, rhs: &'a IntMat) -> IntMat {
        mul_generic(self, rhs)
    }
}

impl Mul for IntMat {
    type Output = IntMat;

    fn mul(self, rhs: IntMat) -> IntMat {
        mul_generic(&self, &rhs)
    }
}

/// Odd modulus shared between matrices, digests and hash parameters.
///
/// Equality compares values; clones share the allocation.
#[derive(Clone, Debug)]
pub struct Modulus {
    value: Arc<BigUint>,
    bits: u64,
}

impl Modulus {
    pub fn new(value: BigUint) -> Self {
        let bits = value.bits();
        Modulus {
            value: Arc::new(value),
            bits,
        }
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// Bit length of `p`; also the serialized width of one digest entry.
    pub fn bits(&self) -> u64 {
        self.bits
    }
}

impl PartialEq for Modulus {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.value, &other.value) || self.value == other.value
    }
}

impl Eq for Modulus {}

impl From<u64> for Modulus {
    fn from(p: u64) -> Self {
        Modulus::new(BigUint::from(p))
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value.fmt(f)
    }
}

/// Matrix over `Z/pZ` with canonical entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModMat {
    m: Mat2<BigUint>,
    modulus: Modulus,
}

impl ModMat {
    /// Builds a residue matrix, reducing each entry into `[0, p)`.
    pub fn new(entries: Mat2<BigUint>, modulus: &Modulus) -> Self {
        let p = modulus.value();
        ModMat {
            m: entries.map(|x| if x < p { x.clone() } else { x % p }),
            modulus: modulus.clone(),
        }
    }

    pub fn identity(modulus: &Modulus) -> Self {
        ModMat {
            m: Mat2::new(
                BigUint::one(),
                BigUint::zero(),
                BigUint::zero(),
                BigUint::one(),
            ),
            modulus: modulus.clone(),
        }
    }

    pub fn entries(&self) -> &Mat2<BigUint> {
        &self.m
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn is_identity(&self) -> bool {
        self.m.a.is_one() && self.m.b.is_zero() && self.m.c.is_zero() && self.m.d.is_one()
    }

    /// General product `self · rhs` with reduction.
    pub fn mat_mul(&self, rhs: &ModMat) -> Result<ModMat, MatrixError> {
        if self.modulus != rhs.modulus {
            return Err(MatrixError::ModulusMismatch {
                left: self.modulus.value().clone(),
                right: rhs.modulus.value().clone(),
            });
        }
        Ok(ModMat::new(mul_generic(&self.m, &rhs.m), &self.modulus))
    }

    /// Lifts the canonical residues to an integer matrix.
    pub fn to_int(&self) -> IntMat {
        self.m.map(|x| BigInt::from_biguint(Sign::Plus, x.clone()))
    }
}

impl fmt::Display for ModMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.m, self.modulus)
    }
}

/// Ring operation counts for one hashing session.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounter {
    /// Modular additions; the conditional subtraction of `p` is part of one addition.
    pub additions: u64,
    /// General ring multiplications.
    pub multiplications: u64,
}

impl OpCounter {
    /// Upper bound on additions per generator multiplication.
    pub const ADDITIONS_PER_GENERATOR_BOUND: u64 = 5;
}

/// Generator labels used throughout the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    A,
    B,
    C,
    X,
    Y,
}

impl Label {
    pub fn as_char(self) -> char {
        match self {
            Label::A => 'A',
            Label::B => 'B',
            Label::C => 'C',
            Label::X => 'X',
            Label::Y => 'Y',
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Renders a word over labels as a string such as `BAAB`.
pub fn word_to_string(word: &[Label]) -> String {
    word.iter().map(|l| l.as_char()).collect()
}

/// `A(k) = [[1, k], [0, 1]]`.
pub fn upper_unipotent(k: i64) -> IntMat {
    IntMat::from_i64(1, k, 0, 1)
}

/// `B(m) = [[1, 0], [m, 1]]`.
pub fn lower_unipotent(m: i64) -> IntMat {
    IntMat::from_i64(1, 0, m, 1)
}

/// The hash generators `A = [[1,2],[0,1]]`, `B = [[1,0],[2,1]]`, `C = [[2,1],[1,1]]`.
pub fn cookie_generator(label: Label) -> Option<IntMat> {
    match label {
        Label::A => Some(upper_unipotent(2)),
        Label::B => Some(lower_unipotent(2)),
        Label::C => Some(IntMat::from_i64(2, 1, 1, 1)),
        Label::X | Label::Y => None,
    }
}

fn add_mod(x: &mut BigUint, y: &BigUint, p: &BigUint) {
    *x += y;
    if &*x >= p {
        *x -= p;
    }
}

/// Right-multiplies `state` in place by the hash generator `gen`, using
/// modular additions only.
///
/// Each generator costs four additions: `A` and `B` double one column into the
/// other (two additions per row), and `C` maps a row `(x, y)` to
/// `(2x + y, x + y)` by first forming `x + y` and then adding `x` to it.
pub fn mul_by_generator(
    state: &mut ModMat,
    gen: Label,
    counter: &mut OpCounter,
) -> Result<(), MatrixError> {
    let p = state.modulus.value.clone();
    let m = &mut state.m;
    match gen {
        // [x, y]·A = [x, 2x + y]
        Label::A => {
            add_mod(&mut m.b, &m.a, &p);
            add_mod(&mut m.b, &m.a, &p);
            add_mod(&mut m.d, &m.c, &p);
            add_mod(&mut m.d, &m.c, &p);
        }
        // [x, y]·B = [x + 2y, y]
        Label::B => {
            add_mod(&mut m.a, &m.b, &p);
            add_mod(&mut m.a, &m.b, &p);
            add_mod(&mut m.c, &m.d, &p);
            add_mod(&mut m.c, &m.d, &p);
        }
        // [x, y]·C = [2x + y, x + y]
        Label::C => {
            add_mod(&mut m.b, &m.a, &p);
            add_mod(&mut m.a, &m.b, &p);
            add_mod(&mut m.d, &m.c, &p);
            add_mod(&mut m.c, &m.d, &p);
        }
        other => return Err(MatrixError::UnknownGenerator(other)),
    }
    counter.additions += 4;
    Ok(())
}

/// A named, ordered set of unimodular integer generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    name: String,
    members: Vec<(Label, IntMat)>,
}

impl GeneratorSet {
    pub fn new(
        name: impl Into<String>,
        members: Vec<(Label, IntMat)>,
    ) -> Result<Self, MatrixError> {
        let name = name.into();
        if members.is_empty() {
            return Err(MatrixError::EmptySet(name));
        }
        let mut seen = HashSet::new();
        for (label, m) in &members {
            if !seen.insert(*label) {
                return Err(MatrixError::DuplicateLabel(*label));
            }
            let det = m.det();
            if det.abs() != BigInt::one() {
                return Err(MatrixError::NotUnimodular { label: *label, det });
            }
        }
        Ok(GeneratorSet { name, members })
    }

    /// `{A, B, C}` of the cookie hash.
    pub fn cookie() -> Self {
        let members = [Label::A, Label::B, Label::C]
            .into_iter()
            .map(|l| (l, cookie_generator(l).expect("hash generator")))
            .collect();
        GeneratorSet::new("cookie", members).expect("valid preset")
    }

    /// `{A(k), B(m)}` labelled `A`, `B`.
    pub fn unipotent_pair(k: i64, m: i64) -> Self {
        GeneratorSet::new(
            format!("A({k})/B({m})"),
            vec![
                (Label::A, upper_unipotent(k)),
                (Label::B, lower_unipotent(m)),
            ],
        )
        .expect("unipotent matrices have determinant 1")
    }

    /// `{X, Y}` with `X = A(1)`, `Y = B(1)`.
    pub fn xy() -> Self {
        GeneratorSet::new(
            "X/Y",
            vec![
                (Label::X, upper_unipotent(1)),
                (Label::Y, lower_unipotent(1)),
            ],
        )
        .expect("valid preset")
    }

    /// Looks up a preset by its command-line name.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "cookie" | "abc" => Some(Self::cookie()),
            "zemor" | "a1b1" => Some(Self::unipotent_pair(1, 1)),
            "a2b2" => Some(Self::unipotent_pair(2, 2)),
            "a2bm2" => Some(Self::unipotent_pair(2, -2)),
            "xy" => Some(Self::xy()),
            _ => None,
        }
    }

    pub const PRESET_NAMES: [&'static str; 5] = ["cookie", "zemor", "a2b2", "a2bm2", "xy"];

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn members(&self) -> &[(Label, IntMat)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.members.iter().map(|(l, _)| *l)
    }

    pub fn get(&self, label: Label) -> Option<&IntMat> {
        self.members
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, m)| m)
    }

    /// Exact integer inverse of the member labelled `label`.
    pub fn generator_inverse(&self, label: Label) -> Option<IntMat> {
        self.get(label)
            .map(|m| m.unimodular_inverse().expect("members are unimodular"))
    }

    /// Product of the members named by `word`, left to right.
    pub fn evaluate(&self, word: &[Label]) -> Option<IntMat> {
        let mut acc = IntMat::identity();
        for l in word {
            acc = &acc * self.get(*l)?;
        }
        Some(acc)
    }
}
