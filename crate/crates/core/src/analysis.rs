//! Exact-integer experiments on the generator semigroups: freeness up to a
//! length, maximal and generic growth of entries, and the collision-free
//! length bound that growth implies.
//!
//! All enumerations walk words depth-first in the order of the set's members,
//! carrying prefix products, so each word costs one matrix multiplication.
//! Ties in arg-max reporting resolve to the lexicographically least word.

use std::collections::hash_map::{DefaultHasher, Entry};
use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::hash::{Hash, Hasher};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::hasher::{generator_sequence, CookieAutomaton};
use crate::matrix::{
    cookie_generator, lower_unipotent, upper_unipotent, GeneratorSet, IntMat, Label,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("enumeration needs {required} matrix multiplications, over the limit of {limit}")]
    ResourceLimit { required: u128, limit: u64 },
    #[error("length {0} must be even")]
    OddLength(usize),
    #[error("length {0} must be a multiple of 4")]
    NotMultipleOfFour(usize),
    #[error("growth needs at least one trial and a positive length")]
    EmptyExperiment,
}

/// Caps the number of matrix multiplications an enumeration may perform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResourceGuard {
    pub max_multiplications: u64,
}

impl ResourceGuard {
    pub const DEFAULT_LIMIT: u64 = 100_000_000;

    pub const fn unlimited() -> Self {
        ResourceGuard {
            max_multiplications: u64::MAX,
        }
    }

    pub(crate) fn check(&self, required: u128) -> Result<(), AnalysisError> {
        if required > self.max_multiplications as u128 {
            Err(AnalysisError::ResourceLimit {
                required,
                limit: self.max_multiplications,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for ResourceGuard {
    fn default() -> Self {
        ResourceGuard {
            max_multiplications: Self::DEFAULT_LIMIT,
        }
    }
}

/// Number of nonempty words of length at most `max_len` over `k` letters.
pub fn word_count(k: usize, max_len: usize) -> u128 {
    let k = k as u128;
    let mut total = 0u128;
    let mut level = 1u128;
    for _ in 0..max_len {
        level = level.saturating_mul(k);
        total = total.saturating_add(level);
    }
    total
}

/// Cookie hash of `bits` over the integers, before any reduction.
pub fn integer_hash(bits: &[bool]) -> IntMat {
    generator_sequence(bits.iter().copied())
        .into_iter()
        .fold(IntMat::identity(), |acc, l| {
            &acc * &cookie_generator(l).expect("hash generator")
        })
}

fn all_ones(n: usize) -> Vec<bool> {
    vec![true; n]
}

/// Two distinct words with the same integer product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollisionWitness {
    pub first: Vec<Label>,
    pub second: Vec<Label>,
    pub product: IntMat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreenessReport {
    pub set_name: String,
    pub max_len: usize,
    /// Nonempty words enumerated before stopping.
    pub words_checked: u64,
    pub witness: Option<CollisionWitness>,
}

impl FreenessReport {
    pub fn is_free(&self) -> bool {
        self.witness.is_none()
    }
}

impl fmt::Display for FreenessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            None => write!(
                f,
                "free up to length {} ({} words)",
                self.max_len, self.words_checked
            ),
            Some(w) => write!(
                f,
                "collision: {} = {} = {}",
                crate::matrix::word_to_string(&w.first),
                crate::matrix::word_to_string(&w.second),
                w.product
            ),
        }
    }
}

fn fingerprint(m: &IntMat) -> u64 {
    let mut h = DefaultHasher::new();
    m.hash(&mut h);
    h.finish()
}

/// Words are stored as (length, base-k digits) to keep the collision map small.
fn encode_word(digits: &[usize], k: usize) -> (u8, u128) {
    let code = digits
        .iter()
        .fold(0u128, |acc, &d| acc * k as u128 + d as u128);
    (digits.len() as u8, code)
}

fn decode_word(set: &GeneratorSet, (len, mut code): (u8, u128)) -> Vec<Label> {
    let k = set.len() as u128;
    let labels: Vec<Label> = set.labels().collect();
    let mut word = vec![labels[0]; len as usize];
    for slot in word.iter_mut().rev() {
        *slot = labels[(code % k) as usize];
        code /= k;
    }
    word
}

/// Enumerates every nonempty word of length at most `max_len` and looks for
/// two with equal integer products.
pub fn freeness_check(
    set: &GeneratorSet,
    max_len: usize,
    guard: ResourceGuard,
) -> Result<FreenessReport, AnalysisError> {
    let k = set.len();
    guard.check(word_count(k, max_len))?;
    assert!(
        (k as f64).powi(max_len as i32) < 2f64.powi(120),
        "word codes fit in u128"
    );

    let gens: Vec<&IntMat> = set.members().iter().map(|(_, m)| m).collect();
    let mut seen: HashMap<u64, (u8, u128)> = HashMap::new();
    // Distinct matrices that share a fingerprint.
    let mut spill: HashMap<IntMat, (u8, u128)> = HashMap::new();
    let mut words_checked = 0u64;

    let mut digits: Vec<usize> = Vec::with_capacity(max_len);
    let mut products: Vec<IntMat> = vec![IntMat::identity()];
    let mut next: Vec<usize> = vec![0];

    while let Some(&choice) = next.last() {
        let depth = digits.len();
        if depth == max_len || choice == k {
            next.pop();
            if digits.pop().is_some() {
                products.pop();
                *next.last_mut().expect("parent frame") += 1;
            }
            continue;
        }
        let product = products.last().expect("prefix product") * gens[choice];
        digits.push(choice);
        words_checked += 1;

        let code = encode_word(&digits, k);
        match seen.entry(fingerprint(&product)) {
            Entry::Vacant(slot) => {
                slot.insert(code);
            }
            Entry::Occupied(slot) => {
                let earlier = decode_word(set, *slot.get());
                let earlier_product = set.evaluate(&earlier).expect("labels from set");
                if earlier_product == product {
                    return Ok(FreenessReport {
                        set_name: set.name().to_string(),
                        max_len,
                        words_checked,
                        witness: Some(CollisionWitness {
                            first: earlier,
                            second: decode_word(set, code),
                            product,
                        }),
                    });
                }
                if let Some(other) = spill.get(&product) {
                    return Ok(FreenessReport {
                        set_name: set.name().to_string(),
                        max_len,
                        words_checked,
                        witness: Some(CollisionWitness {
                            first: decode_word(set, *other),
                            second: decode_word(set, code),
                            product,
                        }),
                    });
                }
                spill.insert(product.clone(), code);
            }
        }
        products.push(product);
        next.push(0);
    }

    Ok(FreenessReport {
        set_name: set.name().to_string(),
        max_len,
        words_checked,
        witness: None,
    })
}

/// Largest entry over all words of one length, with the least maximizing word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxGrowth {
    pub length: usize,
    pub max_entry: BigInt,
    pub word: Vec<Label>,
}

/// Exact maximum of `max_abs_entry` over all words of length `n` in `set`.
pub fn exhaustive_max_growth(
    set: &GeneratorSet,
    n: usize,
    guard: ResourceGuard,
) -> Result<MaxGrowth, AnalysisError> {
    Ok(exhaustive_max_growth_upto(set, n, guard)?
        .pop()
        .expect("length n row"))
}

/// [`exhaustive_max_growth`] for every length `0..=n` in one traversal.
pub fn exhaustive_max_growth_upto(
    set: &GeneratorSet,
    n: usize,
    guard: ResourceGuard,
) -> Result<Vec<MaxGrowth>, AnalysisError> {
    guard.check(word_count(set.len(), n))?;
    let gens: Vec<(Label, &IntMat)> = set.members().iter().map(|(l, m)| (*l, m)).collect();
    let mut best: Vec<Option<MaxGrowth>> = vec![None; n + 1];
    best[0] = Some(MaxGrowth {
        length: 0,
        max_entry: BigInt::one(),
        word: Vec::new(),
    });

    let mut word: Vec<Label> = Vec::with_capacity(n);
    let mut products = vec![IntMat::identity()];
    let mut next = vec![0usize];
    while let Some(&choice) = next.last() {
        if word.len() == n || choice == gens.len() {
            next.pop();
            if word.pop().is_some() {
                products.pop();
                *next.last_mut().expect("parent frame") += 1;
            }
            continue;
        }
        let (label, g) = gens[choice];
        let product = products.last().expect("prefix product") * g;
        word.push(label);
        let entry = product.max_abs_entry();
        let slot = &mut best[word.len()];
        if slot.as_ref().is_none_or(|b| entry > b.max_entry) {
            *slot = Some(MaxGrowth {
                length: word.len(),
                max_entry: entry,
                word: word.clone(),
            });
        }
        products.push(product);
        next.push(0);
    }
    Ok(best
        .into_iter()
        .map(|b| b.expect("every length visited"))
        .collect())
}

/// Largest entry of `(A(2)B(2))^(n/2)`: `e_0 = 1`, `e_1 = 2`,
/// `e_n = 2 e_(n-1) + e_(n-2)`.
pub fn exact_largest_entry_a2b2(n: usize) -> Result<BigUint, AnalysisError> {
    if n % 2 == 1 {
        return Err(AnalysisError::OddLength(n));
    }
    let (mut prev, mut cur) = (BigUint::one(), BigUint::from(2u32));
    if n == 0 {
        return Ok(prev);
    }
    for _ in 1..n {
        let next = &cur * 2u32 + &prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Largest entry of the integer hash of `1^n`.
pub fn cookie_max_entry(n: usize) -> BigInt {
    integer_hash(&all_ones(n)).max_abs_entry()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllOnesRow {
    pub length: usize,
    pub all_ones_max: BigInt,
    pub exhaustive_max: BigInt,
    /// Least bit string reaching `exhaustive_max`.
    pub witness: Vec<bool>,
}

impl AllOnesRow {
    /// The all-ones string is a maximizer (ties allowed).
    pub fn all_ones_attains(&self) -> bool {
        self.all_ones_max >= self.exhaustive_max
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllOnesReport {
    pub rows: Vec<AllOnesRow>,
}

impl AllOnesReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(AllOnesRow::all_ones_attains)
    }

    pub fn counterexamples(&self) -> impl Iterator<Item = &AllOnesRow> {
        self.rows.iter().filter(|r| !r.all_ones_attains())
    }
}

/// For every `n` in `1..=max_len`, compares the all-ones string against the
/// exhaustive maximum over all `2^n` bit strings under the cookie hash over Z.
pub fn proposition2_check(
    max_len: usize,
    guard: ResourceGuard,
) -> Result<AllOnesReport, AnalysisError> {
    guard.check(word_count(2, max_len))?;
    let mut best: Vec<Option<(BigInt, Vec<bool>)>> = vec![None; max_len + 1];

    let mut bits: Vec<bool> = Vec::with_capacity(max_len);
    let mut stack: Vec<(CookieAutomaton, IntMat)> =
        vec![(CookieAutomaton::new(), IntMat::identity())];
    let mut next = vec![0u8];
    while let Some(&choice) = next.last() {
        if bits.len() == max_len || choice == 2 {
            next.pop();
            if bits.pop().is_some() {
                stack.pop();
                *next.last_mut().expect("parent frame") += 1;
            }
            continue;
        }
        let bit = choice == 1;
        let (mut automaton, prefix) = stack.last().cloned().expect("prefix state");
        let gen = automaton.step(bit);
        let product = &prefix * &cookie_generator(gen).expect("hash generator");
        bits.push(bit);
        let entry = product.max_abs_entry();
        let slot = &mut best[bits.len()];
        if slot.as_ref().is_none_or(|(m, _)| entry > *m) {
            *slot = Some((entry, bits.clone()));
        }
        stack.push((automaton, product));
        next.push(0);
    }

    let rows = best
        .into_iter()
        .enumerate()
        .skip(1)
        .map(|(n, b)| {
            let (exhaustive_max, witness) = b.expect("every length visited");
            AllOnesRow {
                length: n,
                all_ones_max: cookie_max_entry(n),
                exhaustive_max,
                witness,
            }
        })
        .collect();
    Ok(AllOnesReport { rows })
}

/// `log2 |x|` for a nonzero big integer, accurate to f64 precision.
pub fn log2_abs(x: &BigInt) -> f64 {
    let mag = x.magnitude();
    let bits = mag.bits();
    if bits <= 64 {
        return (mag.to_u64().expect("fits") as f64).log2();
    }
    let top = (mag >> (bits - 64)).to_u64().expect("64 bits");
    (top as f64).log2() + (bits - 64) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowthMode {
    ExhaustiveMax,
    Random,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthRow {
    pub length: usize,
    pub trials: usize,
    /// `log2` of the exact maximum (exhaustive) or the mean of
    /// `log2(max entry) / length` over trials (random).
    pub value: f64,
    pub fitted_base: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    pub set_name: String,
    pub mode: GrowthMode,
    pub seed: Option<u64>,
    pub rows: Vec<GrowthRow>,
}

impl GrowthReport {
    pub fn to_csv(&self) -> String {
        let column = match self.mode {
            GrowthMode::ExhaustiveMax => "max_entry_bits",
            GrowthMode::Random => "mean_log2_per_letter",
        };
        let mut out = format!("length,trials,{column},fitted_base\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{:.9},{:.9}",
                r.length, r.trials, r.value, r.fitted_base
            )
            .expect("write to string");
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = match self.mode {
            GrowthMode::ExhaustiveMax => format!("exhaustive max growth, set {}\n", self.set_name),
            GrowthMode::Random => format!(
                "random growth, set {}, seed {}\n",
                self.set_name,
                self.seed.unwrap_or_default()
            ),
        };
        for r in &self.rows {
            writeln!(
                out,
                "  n = {:>5}  trials = {:>5}  growth base ≈ {:.4}",
                r.length, r.trials, r.fitted_base
            )
            .expect("write to string");
        }
        out
    }
}

/// Per-length exact maxima for `lengths`, as a report.
pub fn exhaustive_growth_report(
    set: &GeneratorSet,
    lengths: &[usize],
    guard: ResourceGuard,
) -> Result<GrowthReport, AnalysisError> {
    let top = lengths.iter().copied().max().unwrap_or(0);
    let all = exhaustive_max_growth_upto(set, top, guard)?;
    let rows = lengths
        .iter()
        .filter(|&&n| n > 0)
        .map(|&n| {
            let bits = log2_abs(&all[n].max_entry);
            GrowthRow {
                length: n,
                trials: 1,
                value: bits,
                fitted_base: 2f64.powf(bits / n as f64),
            }
        })
        .collect();
    Ok(GrowthReport {
        set_name: set.name().to_string(),
        mode: GrowthMode::ExhaustiveMax,
        seed: None,
        rows,
    })
}

/// Per-trial generator: ChaCha8 seeded with `seed`, stream `trial`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `log2(max entry) / n` of one uniformly random word.
fn random_trial(set: &GeneratorSet, n: usize, seed: u64, trial: u64) -> f64 {
    let mut rng = trial_rng(seed, trial);
    let members = set.members();
    let mut acc = IntMat::identity();
    for _ in 0..n {
        let (_, g) = &members[rng.gen_range(0..members.len())];
        acc = &acc * g;
    }
    log2_abs(&acc.max_abs_entry()) / n as f64
}

/// Generic growth: mean over `trials` random words of length `n` of
/// `log2(max entry) / n`, reported as the base `2^mean`.
///
/// Trial `i` draws from its own stream, and the mean is summed in trial order,
/// so the report does not depend on the thread count.
pub fn random_growth(
    set: &GeneratorSet,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<GrowthReport, AnalysisError> {
    random_growth_sweep(set, &[n], trials, seed)
}

/// [`random_growth`] over several lengths; rows share the seed.
pub fn random_growth_sweep(
    set: &GeneratorSet,
    lengths: &[usize],
    trials: usize,
    seed: u64,
) -> Result<GrowthReport, AnalysisError> {
    if trials == 0 || lengths.is_empty() || lengths.contains(&0) {
        return Err(AnalysisError::EmptyExperiment);
    }
    let rows = lengths
        .iter()
        .map(|&n| {
            let per_trial: Vec<f64> = (0..trials as u64)
                .into_par_iter()
                .map(|t| random_trial(set, n, seed, t))
                .collect();
            let mean = per_trial.iter().sum::<f64>() / trials as f64;
            GrowthRow {
                length: n,
                trials,
                value: mean,
                fitted_base: 2f64.powf(mean),
            }
        })
        .collect();
    Ok(GrowthReport {
        set_name: set.name().to_string(),
        mode: GrowthMode::Random,
        seed: Some(seed),
        rows,
    })
}

fn abba_block() -> IntMat {
    let a = upper_unipotent(2);
    let b = lower_unipotent(-2);
    &(&(&a * &b) * &b) * &a
}

/// Largest absolute entry of `(A(2) B(-2) B(-2) A(2))^(n/4)`.
pub fn abba_growth_check(n: usize) -> Result<BigInt, AnalysisError> {
    if !n.is_multiple_of(4) {
        return Err(AnalysisError::NotMultipleOfFour(n));
    }
    let block = abba_block();
    let mut acc = IntMat::identity();
    for _ in 0..n / 4 {
        acc = &acc * &block;
    }
    Ok(acc.max_abs_entry())
}

/// Per-letter growth of `(ABBA)^(n/4)` fitted between `n_min` and `n_max`.
pub fn abba_growth_rate(n_min: usize, n_max: usize) -> Result<f64, AnalysisError> {
    let lo = abba_growth_check(n_min)?;
    let hi = abba_growth_check(n_max)?;
    let span = (n_max - n_min) as f64;
    Ok(2f64.powf((log2_abs(&hi) - log2_abs(&lo)) / span))
}

/// `(3 + √5) / 2`, the per-bit growth of the all-ones cookie hash.
pub fn golden_rate() -> f64 {
    (3.0 + 5f64.sqrt()) / 2.0
}

/// Largest `k` with `((3+√5)/2)^k <= p`: no two distinct bit strings shorter
/// than this can collide modulo `p`.
///
/// Exact for every `p`: with `φ² = (3+√5)/2` and even-index Lucas numbers
/// `L_2k = φ^2k + φ^-2k`, for `k >= 1` we have `φ^2k <= p` iff `L_2k <= p`.
pub fn collision_bound(p: &BigUint) -> u64 {
    // L_0 = 2, L_2 = 3, L_2(k+1) = 3 L_2k - L_2(k-1)
    let mut prev = BigUint::from(2u32);
    let mut cur = BigUint::from(3u32);
    let mut k = 0u64;
    while cur <= *p {
        k += 1;
        let next = &cur * 3u32 - &prev;
        prev = cur;
        cur = next;
    }
    k
}

/// [`collision_bound`] for `p = 2^bits`.
pub fn collision_bound_bits(bits: u64) -> u64 {
    collision_bound(&(BigUint::one() << bits))
}

/// `floor(bits / log2(rate))` for an arbitrary per-letter growth rate.
pub fn collision_bound_with_rate(bits: f64, rate: f64) -> u64 {
    assert!(rate > 1.0, "growth rate must exceed 1");
    (bits / rate.log2()).floor() as u64
}
