//! Preimage searches over the integers.
//!
//! For a product `W` of `A(2)` and `B(2)`, exactly one of `W·A⁻¹`, `W·B⁻¹`
//! has a smaller sum of absolute entries, so peeling generators off the right
//! recovers the word greedily. With the cookie generators that uniqueness
//! fails, and [`backtrack_preimage_3gen`] has to branch. It also has to keep
//! every candidate suffix realizable by the cookie automaton, which it does by
//! carrying the set of automaton states that can precede the suffix.

use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use thiserror::Error;

use crate::analysis::{word_count, AnalysisError, ResourceGuard};
use crate::digest::Digest;
use crate::hasher::{CookieAutomaton, CookieHasher, Mode};
use crate::matrix::{cookie_generator, GeneratorSet, IntMat, Label};
use crate::params::HashParams;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttackError {
    #[error("not in the semigroup: {reason} after {steps} descent steps")]
    NotInSemigroup { steps: usize, reason: &'static str },
    #[error("greedy descent needs a two-generator set, got {0}")]
    SetSize(usize),
    #[error(transparent)]
    Resource(#[from] AnalysisError),
}

/// Greedy entry-sum descent over a two-generator set.
pub fn greedy_preimage(set: &GeneratorSet, target: &IntMat) -> Result<Vec<Label>, AttackError> {
    if set.len() != 2 {
        return Err(AttackError::SetSize(set.len()));
    }
    let inverses: Vec<(Label, IntMat)> = set
        .labels()
        .map(|l| (l, set.generator_inverse(l).expect("member")))
        .collect();

    let mut w = target.clone();
    let mut reversed = Vec::new();
    while !w.is_identity() {
        let steps = reversed.len();
        if w.has_negative_entry() {
            return Err(AttackError::NotInSemigroup {
                steps,
                reason: "negative entry",
            });
        }
        let sum = w.abs_entry_sum();
        let mut smaller = inverses
            .iter()
            .map(|(l, inv)| (*l, &w * inv))
            .filter(|(_, cand)| cand.abs_entry_sum() < sum);
        let (label, next) = match (smaller.next(), smaller.next()) {
            (Some(only), None) => only,
            (None, _) => {
                return Err(AttackError::NotInSemigroup {
                    steps,
                    reason: "no generator decreases the entry sum",
                })
            }
            (Some(_), Some(_)) => {
                return Err(AttackError::NotInSemigroup {
                    steps,
                    reason: "both generators decrease the entry sum",
                })
            }
        };
        reversed.push(label);
        w = next;
    }
    reversed.reverse();
    debug_assert_eq!(set.evaluate(&reversed).as_ref(), Some(target));
    Ok(reversed)
}

/// Recovers the bit string (`A` ↦ 0, `B` ↦ 1) of a product of `A(2)`, `B(2)`.
pub fn greedy_preimage_2gen(target: &IntMat) -> Result<Vec<bool>, AttackError> {
    let set = GeneratorSet::unipotent_pair(2, 2);
    let word = greedy_preimage(&set, target)?;
    let bits: Vec<bool> = word.iter().map(|l| *l == Label::B).collect();
    if set.evaluate(&word).as_ref() != Some(target) {
        return Err(AttackError::NotInSemigroup {
            steps: word.len(),
            reason: "recovered word does not re-hash to the target",
        });
    }
    Ok(bits)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(Vec<bool>),
    Exhausted,
    BudgetHit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub backtracks: u64,
    /// Deepest DFS stack reached.
    pub max_frontier: usize,
    /// Nodes with at least two generators that decrease the entry sum.
    pub branching_nodes: u64,
    /// Nodes where some generator decreased the entry sum.
    pub descent_nodes: u64,
    pub elapsed: Duration,
    pub outcome: SearchOutcome,
}

impl SearchStats {
    pub fn found(&self) -> Option<&[bool]> {
        match &self.outcome {
            SearchOutcome::Found(bits) => Some(bits),
            _ => None,
        }
    }

    /// Fraction of descent nodes where the entry-sum rule was ambiguous.
    pub fn branching_fraction(&self) -> f64 {
        if self.descent_nodes == 0 {
            0.0
        } else {
            self.branching_nodes as f64 / self.descent_nodes as f64
        }
    }

    /// One-line summary without timing, stable across runs.
    pub fn summary_line(&self) -> String {
        let outcome = match &self.outcome {
            SearchOutcome::Found(bits) => format!("found {} bits", bits.len()),
            SearchOutcome::Exhausted => "exhausted".to_string(),
            SearchOutcome::BudgetHit => "budget hit".to_string(),
        };
        format!(
            "{outcome}; nodes={} backtracks={} max_depth={} branching={}/{}",
            self.nodes_expanded,
            self.backtracks,
            self.max_frontier,
            self.branching_nodes,
            self.descent_nodes
        )
    }
}

impl fmt::Display for SearchStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary_line())
    }
}

/// Automaton state with run lengths capped at the trigger, which loses nothing
/// because the rule only asks whether a run has reached three.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Capped {
    cookie: bool,
    ones: u8,
    zeros: u8,
}

const STATES: usize = 32;

impl Capped {
    fn index(self) -> usize {
        (self.cookie as usize) << 4 | (self.ones as usize) << 2 | self.zeros as usize
    }

    fn from_index(i: usize) -> Option<Capped> {
        let s = Capped {
            cookie: i & 16 != 0,
            ones: ((i >> 2) & 3) as u8,
            zeros: (i & 3) as u8,
        };
        (s.ones == 0 || s.zeros == 0).then_some(s)
    }

    fn step(self, bit: bool) -> (Label, Capped) {
        let mode = if self.cookie {
            Mode::Cookie
        } else {
            Mode::Normal
        };
        let mut a = CookieAutomaton::with_state(mode, self.ones as u64, self.zeros as u64)
            .expect("valid capped state");
        let label = a.step(bit);
        let cap = |x: u64| x.min(CookieAutomaton::TRIGGER) as u8;
        (
            label,
            Capped {
                cookie: a.mode() == Mode::Cookie,
                ones: cap(a.ones_run()),
                zeros: cap(a.zeros_run()),
            },
        )
    }
}

/// Transition table and the reverse image used to prepend letters.
struct ReverseAutomaton {
    trans: [[Option<(Label, usize)>; 2]; STATES],
    fresh: usize,
    all: u32,
}

impl ReverseAutomaton {
    fn new() -> Self {
        let mut trans = [[None; 2]; STATES];
        let mut all = 0u32;
        for (i, row) in trans.iter_mut().enumerate() {
            if let Some(s) = Capped::from_index(i) {
                all |= 1 << i;
                for bit in [false, true] {
                    let (label, next) = s.step(bit);
                    row[bit as usize] = Some((label, next.index()));
                }
            }
        }
        let fresh = Capped {
            cookie: false,
            ones: 0,
            zeros: 0,
        }
        .index();
        ReverseAutomaton { trans, fresh, all }
    }

    /// States from which `letter` is emitted and the automaton lands in `after`.
    fn prepend(&self, letter: Label, after: u32) -> u32 {
        let bit = letter != Label::A;
        let mut before = 0u32;
        for (i, row) in self.trans.iter().enumerate() {
            if let Some((l, next)) = row[bit as usize] {
                if l == letter && after & (1 << next) != 0 {
                    before |= 1 << i;
                }
            }
        }
        before
    }
}

struct Search<'a> {
    automaton: &'a ReverseAutomaton,
    inverses: Vec<(Label, IntMat)>,
    max_len: usize,
    budget: u64,
    stats: SearchStats,
    suffix: Vec<bool>,
}

enum Step {
    Found,
    Dead,
    Budget,
}

impl Search<'_> {
    fn visit(&mut self, w: &IntMat, states: u32) -> Step {
        if self.stats.nodes_expanded >= self.budget {
            return Step::Budget;
        }
        self.stats.nodes_expanded += 1;
        self.stats.max_frontier = self.stats.max_frontier.max(self.suffix.len());
        if w.is_identity() && states & (1 << self.automaton.fresh) != 0 {
            return Step::Found;
        }
        if self.suffix.len() == self.max_len {
            return Step::Dead;
        }

        let sum = w.abs_entry_sum();
        let mut decreasing = 0;
        let mut options: Vec<(Label, IntMat, u32)> = Vec::with_capacity(3);
        for (label, inv) in &self.inverses {
            let cand = w * inv;
            if cand.abs_entry_sum() >= sum {
                continue;
            }
            decreasing += 1;
            if cand.has_negative_entry() {
                continue;
            }
            let before = self.automaton.prepend(*label, states);
            if before != 0 {
                options.push((*label, cand, before));
            }
        }
        if decreasing > 0 {
            self.stats.descent_nodes += 1;
        }
        if decreasing > 1 {
            self.stats.branching_nodes += 1;
        }

        for (label, cand, before) in options {
            self.suffix.push(label != Label::A);
            match self.visit(&cand, before) {
                Step::Found => return Step::Found,
                Step::Budget => return Step::Budget,
                Step::Dead => {
                    self.suffix.pop();
                    self.stats.backtracks += 1;
                }
            }
        }
        Step::Dead
    }
}

/// Default node budget for the backtracking search.
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

/// Depth-first entry-sum descent over `{A, B, C}`, trying `A`, `B`, `C` in
/// that order at each node and backtracking on dead ends. Only suffixes the
/// cookie automaton can emit from a fresh start are accepted, so any result
/// is a bit string whose integer cookie hash equals `target`.
pub fn backtrack_preimage_3gen(target: &IntMat, max_len: usize, node_budget: u64) -> SearchStats {
    let start = Instant::now();
    let automaton = ReverseAutomaton::new();
    let cookie = GeneratorSet::cookie();
    let mut search = Search {
        automaton: &automaton,
        inverses: cookie
            .labels()
            .map(|l| (l, cookie.generator_inverse(l).expect("member")))
            .collect(),
        max_len,
        budget: node_budget,
        stats: SearchStats {
            nodes_expanded: 0,
            backtracks: 0,
            max_frontier: 0,
            branching_nodes: 0,
            descent_nodes: 0,
            elapsed: Duration::ZERO,
            outcome: SearchOutcome::Exhausted,
        },
        suffix: Vec::new(),
    };
    let outcome = match search.visit(target, automaton.all) {
        Step::Found => {
            let mut bits = std::mem::take(&mut search.suffix);
            bits.reverse();
            let rehash = crate::analysis::integer_hash(&bits);
            assert_eq!(&rehash, target, "search returned a non-preimage");
            SearchOutcome::Found(bits)
        }
        Step::Dead => SearchOutcome::Exhausted,
        Step::Budget => SearchOutcome::BudgetHit,
    };
    let mut stats = search.stats;
    stats.outcome = outcome;
    stats.elapsed = start.elapsed();
    stats
}

/// Tries every bit string of length `min_len..=max_len` in length-then-
/// lexicographic order and returns the first whose unpadded hash is `target`.
pub fn brute_force_preimage(
    target: &Digest,
    params: &HashParams,
    min_len: usize,
    max_len: usize,
    guard: ResourceGuard,
) -> Result<Option<Vec<bool>>, AttackError> {
    guard.check(word_count(2, max_len))?;
    if target.modulus() != params.modulus() {
        return Ok(None);
    }
    if min_len == 0 && target.is_identity() {
        return Ok(Some(Vec::new()));
    }
    // One DFS; the first hit at each depth is the least string of that length.
    let mut best: Option<Vec<bool>> = None;
    let mut bits: Vec<bool> = Vec::with_capacity(max_len);
    let mut stack = vec![CookieHasher::new(params)];
    let mut next = vec![0u8];
    let mut depth_limit = max_len;
    while let Some(&choice) = next.last() {
        if bits.len() == depth_limit || choice == 2 {
            next.pop();
            if bits.pop().is_some() {
                stack.pop();
                *next.last_mut().expect("parent frame") += 1;
            }
            continue;
        }
        let mut h = stack.last().expect("prefix state").clone();
        let bit = choice == 1;
        h.absorb_bit(bit);
        bits.push(bit);
        if bits.len() >= min_len && h.product() == target.matrix() {
            let shorter = best.as_ref().is_none_or(|b| bits.len() < b.len());
            if shorter {
                best = Some(bits.clone());
                depth_limit = bits.len();
            }
        }
        stack.push(h);
        next.push(0);
    }
    Ok(best)
}

/// Sum of absolute entries, exposed for reporting descent traces.
pub fn entry_sum(m: &IntMat) -> BigInt {
    m.abs_entry_sum()
}

/// Integer product of `A(2)`/`B(2)` for a bit string (0 ↦ `A`, 1 ↦ `B`).
pub fn two_generator_product(bits: &[bool]) -> IntMat {
    let a = cookie_generator(Label::A).expect("A");
    let b = cookie_generator(Label::B).expect("B");
    bits.iter().fold(IntMat::identity(), |acc, &bit| {
        &acc * if bit { &b } else { &a }
    })
}
