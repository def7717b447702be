//! Cayley hashing with cookies.
//!
//! A bit string is hashed to a product of 2×2 matrices over `F_p`: 0 maps to
//! `A = [[1,2],[0,1]]`, 1 maps to `B = [[1,0],[2,1]]`, and after three 1s in a
//! row later 1s map to `C = [[2,1],[1,1]]` until three 0s in a row switch back.
//!
//! Besides the hash itself ([`hasher`], [`digest`]) the crate carries the
//! exact-integer experiments around it: freeness and growth of the generator
//! semigroups ([`analysis`]), preimage searches over the integers
//! ([`attacks`]) and a subset of the NIST STS randomness tests
//! ([`randomness`]).

pub mod analysis;
pub mod attacks;
pub mod bits;
pub mod digest;
pub mod hasher;
pub mod matrix;
pub mod params;
pub mod randomness;

pub use digest::{Digest, DigestError};
pub use hasher::{
    generator_sequence, h1_hash, hash_padded, hash_raw, CookieAutomaton, CookieHasher, Mode,
};
pub use matrix::{GeneratorSet, IntMat, Label, Mat2, MatrixError, ModMat, Modulus, OpCounter};
pub use params::{HashParams, ParamsError};
