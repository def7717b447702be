//! The streaming cookie hash.
//!
//! Bits are read left to right. A 0 is hashed to `A`, a 1 to `B`. Once three
//! 1s have been seen in a row, every later 1 is hashed to `C` until three 0s
//! in a row switch it back to `B`. The third 1 of the trigger is itself hashed
//! with `B`. Each new generator multiplies the running product on the right.
//!
//! [`CookieHasher::finalize_padded`] appends `000` first, which always
//! returns the automaton to normal mode, so padded digests compose:
//! `H(u ++ 000 ++ v) = H(u) · H(v)` where `H` pads.

use crate::digest::Digest;
use crate::matrix::{mul_by_generator, Label, ModMat, OpCounter};
use crate::params::HashParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Normal,
    Cookie,
}

/// Mode and run counters of the cookie rule, without the matrix product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CookieAutomaton {
    mode: Mode,
    ones_run: u64,
    zeros_run: u64,
}

impl Default for CookieAutomaton {
    fn default() -> Self {
        CookieAutomaton::new()
    }
}

impl CookieAutomaton {
    /// Trailing run length that flips the mode.
    pub const TRIGGER: u64 = 3;

    pub const fn new() -> Self {
        CookieAutomaton {
            mode: Mode::Normal,
            ones_run: 0,
            zeros_run: 0,
        }
    }

    /// Builds an arbitrary state. At most one run may be nonzero.
    pub fn with_state(mode: Mode, ones_run: u64, zeros_run: u64) -> Option<Self> {
        (ones_run == 0 || zeros_run == 0).then_some(CookieAutomaton {
            mode,
            ones_run,
            zeros_run,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn ones_run(&self) -> u64 {
        self.ones_run
    }

    pub fn zeros_run(&self) -> u64 {
        self.zeros_run
    }

    /// Consumes one bit and returns the generator it is hashed to.
    pub fn step(&mut self, bit: bool) -> Label {
        if bit {
            self.zeros_run = 0;
            self.ones_run += 1;
            let gen = match self.mode {
                Mode::Cookie => Label::C,
                Mode::Normal => Label::B,
            };
            if self.mode == Mode::Normal && self.ones_run >= Self::TRIGGER {
                self.mode = Mode::Cookie;
            }
            gen
        } else {
            self.ones_run = 0;
            self.zeros_run += 1;
            if self.mode == Mode::Cookie && self.zeros_run >= Self::TRIGGER {
                self.mode = Mode::Normal;
            }
            Label::A
        }
    }
}

/// Generators that a fresh hasher applies to `bits`, in order.
pub fn generator_sequence<I: IntoIterator<Item = bool>>(bits: I) -> Vec<Label> {
    let mut automaton = CookieAutomaton::new();
    bits.into_iter().map(|b| automaton.step(b)).collect()
}

/// Streaming hash state over `F_p`.
#[derive(Clone, Debug)]
pub struct CookieHasher<'p> {
    params: &'p HashParams,
    automaton: CookieAutomaton,
    product: ModMat,
    bits_absorbed: u64,
    counter: OpCounter,
}

impl<'p> CookieHasher<'p> {
    pub fn new(params: &'p HashParams) -> Self {
        CookieHasher {
            params,
            automaton: CookieAutomaton::new(),
            product: ModMat::identity(params.modulus()),
            bits_absorbed: 0,
            counter: OpCounter::default(),
        }
    }

    pub fn params(&self) -> &'p HashParams {
        self.params
    }

    pub fn mode(&self) -> Mode {
        self.automaton.mode()
    }

    pub fn automaton(&self) -> CookieAutomaton {
        self.automaton
    }

    pub fn bits_absorbed(&self) -> u64 {
        self.bits_absorbed
    }

    pub fn counter(&self) -> OpCounter {
        self.counter
    }

    pub fn product(&self) -> &ModMat {
        &self.product
    }

    pub fn absorb_bit(&mut self, bit: bool) {
        let gen = self.automaton.step(bit);
        self.apply(gen);
    }

    pub fn absorb_bits<I: IntoIterator<Item = bool>>(&mut self, bits: I) {
        for bit in bits {
            self.absorb_bit(bit);
        }
    }

    /// Absorbs each byte MSB-first.
    pub fn absorb_bytes(&mut self, bytes: &[u8]) {
        for &byte in bytes {
            for i in (0..8).rev() {
                self.absorb_bit((byte >> i) & 1 == 1);
            }
        }
    }

    fn apply(&mut self, gen: Label) {
        if self.bits_absorbed == 0 {
            // I · g = g: start from the generator itself.
            self.product = self.params.generator(gen).clone();
        } else {
            mul_by_generator(&mut self.product, gen, &mut self.counter)
                .expect("automaton only emits A, B, C");
        }
        self.bits_absorbed += 1;
    }

    /// Appends the `000` reset suffix.
    pub fn pad(&mut self) {
        self.absorb_bits([false; 3]);
    }

    /// Product so far, without padding.
    pub fn finalize_raw(&self) -> Digest {
        Digest::from_matrix(self.product.clone())
    }

    pub fn finalize_padded(mut self) -> Digest {
        self.pad();
        Digest::from_matrix(self.product)
    }
}

/// Padded cookie hash of a bit string.
pub fn hash_padded<I: IntoIterator<Item = bool>>(params: &HashParams, bits: I) -> Digest {
    let mut h = CookieHasher::new(params);
    h.absorb_bits(bits);
    h.finalize_padded()
}

/// Unpadded cookie hash of a bit string.
pub fn hash_raw<I: IntoIterator<Item = bool>>(params: &HashParams, bits: I) -> Digest {
    let mut h = CookieHasher::new(params);
    h.absorb_bits(bits);
    h.finalize_raw()
}

/// Two-generator hash: `A` for 0, `B` for 1, no cookie rule, no padding.
pub fn h1_hash<I: IntoIterator<Item = bool>>(params: &HashParams, bits: I) -> Digest {
    let mut product = ModMat::identity(params.modulus());
    let mut counter = OpCounter::default();
    for bit in bits {
        let gen = if bit { Label::B } else { Label::A };
        mul_by_generator(&mut product, gen, &mut counter).expect("A and B are hash generators");
    }
    Digest::from_matrix(product)
}
