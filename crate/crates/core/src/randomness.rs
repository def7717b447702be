//! Five tests from NIST SP 800-22 (frequency, block frequency, runs, longest
//! run of ones, cumulative sums), digest streams to feed them, and export of
//! sequences in the ASCII format read by the reference `assess` tool.
//!
//! Statistics, parameter tables and summation bounds follow the reference C
//! implementation, so P-values agree with it to floating-point accuracy.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;
use thiserror::Error;

use crate::analysis::trial_rng;
use crate::bits::{parse_bits, BitParseError};
use crate::digest::Digest;
use crate::hasher::hash_padded;
use crate::params::HashParams;

/// Significance level: a sequence passes when `P >= ALPHA`.
pub const ALPHA: f64 = 0.01;

/// Default block length for the block frequency test.
pub const DEFAULT_BLOCK_SIZE: usize = 128;

#[derive(Debug, Error)]
pub enum RandomnessError {
    #[error("{test} needs at least {min} bits, got {len}")]
    TooShort {
        test: &'static str,
        min: usize,
        len: usize,
    },
    #[error("block size {block} is invalid for a sequence of {len} bits")]
    BlockSize { block: usize, len: usize },
    #[error(transparent)]
    Parse(#[from] BitParseError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitSequence {
    bits: Vec<bool>,
}

impl BitSequence {
    pub fn new(bits: Vec<bool>) -> Self {
        BitSequence { bits }
    }

    pub fn from_ascii(text: &str) -> Result<Self, RandomnessError> {
        Ok(BitSequence::new(parse_bits(text)?))
    }

    pub fn to_ascii(&self) -> String {
        crate::bits::bits_to_string(&self.bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    fn require(&self, test: &'static str, min: usize) -> Result<usize, RandomnessError> {
        let len = self.len();
        if len < min {
            Err(RandomnessError::TooShort { test, min, len })
        } else {
            Ok(len)
        }
    }
}

impl From<Vec<bool>> for BitSequence {
    fn from(bits: Vec<bool>) -> Self {
        BitSequence::new(bits)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The runs test's frequency prerequisite failed; reported with `P = 0`.
    PrerequisiteFailed,
}

impl Verdict {
    fn from_p(p: f64) -> Self {
        if p >= ALPHA {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::PrerequisiteFailed => "prerequisite_failed",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestReport {
    pub test: &'static str,
    pub param: String,
    pub statistic: f64,
    pub p_value: f64,
    pub verdict: Verdict,
}

impl TestReport {
    fn new(test: &'static str, param: String, statistic: f64, p_value: f64) -> Self {
        TestReport {
            test,
            param,
            statistic,
            p_value,
            verdict: Verdict::from_p(p_value),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub const CSV_HEADER: &'static str = "test,param,statistic,p_value,verdict";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.test,
            self.param,
            self.statistic,
            self.p_value,
            self.verdict.as_str()
        )
    }
}

impl fmt::Display for TestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.csv_line())
    }
}

/// Regularized upper incomplete gamma `Q(a, x)`.
fn igamc(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        gamma_ur(a, x)
    }
}

/// Standard normal CDF.
fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Frequency (monobit) test.
pub fn monobit(seq: &BitSequence) -> Result<TestReport, RandomnessError> {
    let n = seq.require("monobit", 100)?;
    let sum = 2 * seq.ones() as i64 - n as i64;
    let s_obs = (sum.abs() as f64) / (n as f64).sqrt();
    let p = erfc(s_obs / std::f64::consts::SQRT_2);
    Ok(TestReport::new("monobit", format!("n={n}"), s_obs, p))
}

/// Frequency within blocks of `block` bits; trailing bits are discarded.
pub fn block_frequency(seq: &BitSequence, block: usize) -> Result<TestReport, RandomnessError> {
    let n = seq.require("block_frequency", 100)?;
    if block == 0 || block > n {
        return Err(RandomnessError::BlockSize { block, len: n });
    }
    let blocks = n / block;
    let sum: f64 = seq.bits[..blocks * block]
        .chunks_exact(block)
        .map(|chunk| {
            let pi = chunk.iter().filter(|&&b| b).count() as f64 / block as f64;
            (pi - 0.5) * (pi - 0.5)
        })
        .sum();
    let chi2 = 4.0 * block as f64 * sum;
    let p = igamc(blocks as f64 / 2.0, chi2 / 2.0);
    Ok(TestReport::new(
        "block_frequency",
        format!("M={block}"),
        chi2,
        p,
    ))
}

/// Runs test, with the frequency prerequisite `|π − ½| <= 2/√n`.
pub fn runs_test(seq: &BitSequence) -> Result<TestReport, RandomnessError> {
    let n = seq.require("runs", 100)?;
    let pi = seq.ones() as f64 / n as f64;
    let tau = 2.0 / (n as f64).sqrt();
    if (pi - 0.5).abs() > tau {
        return Ok(TestReport {
            test: "runs",
            param: format!("n={n}"),
            statistic: pi,
            p_value: 0.0,
            verdict: Verdict::PrerequisiteFailed,
        });
    }
    let runs = 1 + seq.bits.windows(2).filter(|w| w[0] != w[1]).count();
    let v = runs as f64;
    let nf = n as f64;
    let num = (v - 2.0 * nf * pi * (1.0 - pi)).abs();
    let den = 2.0 * (2.0 * nf).sqrt() * pi * (1.0 - pi);
    let p = erfc(num / den);
    Ok(TestReport::new("runs", format!("n={n}"), v, p))
}

/// Longest run of ones in a block, with the reference parameter table:
/// `M = 8` below 6272 bits, `M = 128` below 750000 bits, else `M = 10^4`.
pub fn longest_run_of_ones(seq: &BitSequence) -> Result<TestReport, RandomnessError> {
    let n = seq.require("longest_run", 128)?;
    let (block, first, probs): (usize, usize, &[f64]) = if n < 6272 {
        (8, 1, &[0.21484375, 0.3671875, 0.23046875, 0.1875])
    } else if n < 750_000 {
        (
            128,
            4,
            &[
                0.1174035788,
                0.242955959,
                0.249363483,
                0.17517706,
                0.102701071,
                0.112398847,
            ],
        )
    } else {
        (
            10_000,
            10,
            &[0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727],
        )
    };
    let k = probs.len() - 1;
    let blocks = n / block;
    let mut counts = vec![0u64; probs.len()];
    for chunk in seq.bits[..blocks * block].chunks_exact(block) {
        let mut run = 0usize;
        let mut longest = 0usize;
        for &b in chunk {
            run = if b { run + 1 } else { 0 };
            longest = longest.max(run);
        }
        let category = longest.clamp(first, first + k) - first;
        counts[category] += 1;
    }
    let nb = blocks as f64;
    let chi2: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&c, &pi)| {
            let expected = nb * pi;
            (c as f64 - expected).powi(2) / expected
        })
        .sum();
    let p = igamc(k as f64 / 2.0, chi2 / 2.0);
    Ok(TestReport::new(
        "longest_run",
        format!("M={block}"),
        chi2,
        p,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Cumulative sums test in one direction.
pub fn cumulative_sums(
    seq: &BitSequence,
    direction: Direction,
) -> Result<TestReport, RandomnessError> {
    let n = seq.require("cumulative_sums", 100)?;
    let step = |b: &bool| if *b { 1i64 } else { -1 };
    let excursion = |it: &mut dyn Iterator<Item = &bool>| {
        let mut s = 0i64;
        let mut z = 0i64;
        for b in it {
            s += step(b);
            z = z.max(s.abs());
        }
        z
    };
    let z = match direction {
        Direction::Forward => excursion(&mut seq.bits.iter()),
        Direction::Backward => excursion(&mut seq.bits.iter().rev()),
    };
    let p = cusum_p_value(n as i64, z);
    let (test, param) = match direction {
        Direction::Forward => ("cumulative_sums", "forward"),
        Direction::Backward => ("cumulative_sums", "backward"),
    };
    Ok(TestReport::new(test, param.to_string(), z as f64, p))
}

fn cusum_p_value(n: i64, z: i64) -> f64 {
    if z == 0 {
        return 1.0;
    }
    let sqrt_n = (n as f64).sqrt();
    let zf = z as f64;
    // integer division truncates toward zero, as in the reference code
    let mut sum1 = 0.0;
    let mut k = (-n / z + 1) / 4;
    while k <= (n / z - 1) / 4 {
        let kf = k as f64;
        sum1 += normal_cdf((4.0 * kf + 1.0) * zf / sqrt_n);
        sum1 -= normal_cdf((4.0 * kf - 1.0) * zf / sqrt_n);
        k += 1;
    }
    let mut sum2 = 0.0;
    let mut k = (-n / z - 3) / 4;
    while k <= (n / z - 1) / 4 {
        let kf = k as f64;
        sum2 += normal_cdf((4.0 * kf + 3.0) * zf / sqrt_n);
        sum2 -= normal_cdf((4.0 * kf + 1.0) * zf / sqrt_n);
        k += 1;
    }
    (1.0 - sum1 + sum2).clamp(0.0, 1.0)
}

/// All built-in tests on one sequence, in a fixed order; cumulative sums
/// contributes a forward and a backward report.
pub fn builtin_suite(seq: &BitSequence, block: usize) -> Result<Vec<TestReport>, RandomnessError> {
    Ok(vec![
        monobit(seq)?,
        block_frequency(seq, block)?,
        runs_test(seq)?,
        longest_run_of_ones(seq)?,
        cumulative_sums(seq, Direction::Forward)?,
        cumulative_sums(seq, Direction::Backward)?,
    ])
}

/// Per-test pass counts over a batch of sequences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PassTally {
    pub test: String,
    pub passed: usize,
    pub total: usize,
}

/// Runs [`builtin_suite`] on every sequence and tallies passes per test.
pub fn batch_pass_rates(
    seqs: &[BitSequence],
    block: usize,
) -> Result<Vec<PassTally>, RandomnessError> {
    let reports: Vec<Vec<TestReport>> = seqs
        .par_iter()
        .map(|s| builtin_suite(s, block))
        .collect::<Result<_, _>>()?;
    let Some(first) = reports.first() else {
        return Ok(Vec::new());
    };
    Ok((0..first.len())
        .map(|i| PassTally {
            test: format!("{}[{}]", first[i].test, first[i].param),
            passed: reports.iter().filter(|r| r[i].passed()).count(),
            total: reports.len(),
        })
        .collect())
}

/// How to turn seeded random inputs into test sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamConfig {
    /// Number of digests to produce.
    pub digests: usize,
    /// Length of each random input before padding.
    pub input_bits: usize,
    pub seed: u64,
    /// Concatenate whole digests until each sequence has at least this many
    /// bits; `None` keeps one digest per sequence.
    pub sequence_bits: Option<usize>,
}

impl StreamConfig {
    /// Digests needed for `sequences` sequences of at least `sequence_bits` bits.
    pub fn digests_for(sequences: usize, sequence_bits: usize, digest_bits: u64) -> usize {
        sequences * sequence_bits.div_ceil(digest_bits as usize)
    }
}

#[derive(Clone, Debug)]
pub struct HashStream {
    pub digests: Vec<Digest>,
    pub sequences: Vec<BitSequence>,
}

/// Random input `index`: `input_bits` bits from stream `index` of `seed`.
pub fn seeded_input(seed: u64, index: u64, input_bits: usize) -> Vec<bool> {
    let mut rng = trial_rng(seed, index);
    let mut bits = Vec::with_capacity(input_bits);
    while bits.len() < input_bits {
        let word: u64 = rng.gen();
        let take = (input_bits - bits.len()).min(64);
        bits.extend((0..take).map(|i| (word >> (63 - i)) & 1 == 1));
    }
    bits
}

/// Hashes seeded random inputs (padded) and serializes the digests into test
/// sequences. Trailing digests that do not fill a whole sequence are kept in
/// `digests` but not in `sequences`.
pub fn hash_stream_generate(params: &HashParams, config: StreamConfig) -> HashStream {
    let digests: Vec<Digest> = (0..config.digests as u64)
        .into_par_iter()
        .map(|i| hash_padded(params, seeded_input(config.seed, i, config.input_bits)))
        .collect();
    let per_sequence = match config.sequence_bits {
        None => 1,
        Some(bits) => bits.div_ceil(params.digest_bits() as usize).max(1),
    };
    let sequences = digests
        .chunks_exact(per_sequence)
        .map(|group| BitSequence::new(group.iter().flat_map(Digest::to_bits).collect()))
        .collect();
    HashStream { digests, sequences }
}

/// File name for sequence `index`.
pub fn export_file_name(index: usize) -> String {
    format!("data_{index}.txt")
}

/// Writes each sequence as ASCII `0`/`1` followed by one newline, to
/// `dir/data_<index>.txt` with zero-based indices. Creates `dir` if needed.
pub fn sts_export(sequences: &[BitSequence], dir: &Path) -> Result<Vec<PathBuf>, RandomnessError> {
    if sequences.is_empty() {
        return Ok(Vec::new());
    }
    fs::create_dir_all(dir)?;
    sequences
        .iter()
        .enumerate()
        .map(|(i, seq)| {
            let path = dir.join(export_file_name(i));
            let mut text = seq.to_ascii();
            text.push('\n');
            fs::write(&path, text)?;
            Ok(path)
        })
        .collect()
}

/// Reads a sequence written by [`sts_export`] (whitespace ignored).
pub fn read_sequence(path: &Path) -> Result<BitSequence, RandomnessError> {
    BitSequence::from_ascii(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> BitSequence {
        BitSequence::from_ascii(s).unwrap()
    }

    fn alternating(n: usize) -> BitSequence {
        BitSequence::new((0..n).map(|i| i % 2 == 1).collect())
    }

    fn constant(n: usize, bit: bool) -> BitSequence {
        BitSequence::new(vec![bit; n])
    }

    const MANUAL_100: &str = "1100100100001111110110101010001000100001011010001100001000110100110001001100011001100010100010111000";
    const MANUAL_128: &str = "11001100000101010110110001001100111000000000001001001101010100010001001111010110100000001101011111001100111001101101100010110010";

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn manual_worked_examples() {
        let s = seq(MANUAL_100);
        assert!(close(monobit(&s).unwrap().p_value, 0.109599, 1e-6));
        assert!(close(
            block_frequency(&s, 10).unwrap().p_value,
            0.706438,
            1e-6
        ));
        assert!(close(runs_test(&s).unwrap().p_value, 0.500798, 1e-6));
        assert!(close(
            cumulative_sums(&s, Direction::Forward).unwrap().p_value,
            0.219194,
            1e-6
        ));
        assert!(close(
            cumulative_sums(&s, Direction::Backward).unwrap().p_value,
            0.114866,
            1e-6
        ));
        let l = longest_run_of_ones(&seq(MANUAL_128)).unwrap();
        // the manual rounds the category probabilities to four places
        assert!(close(l.statistic, 4.882605, 5e-4), "{}", l.statistic);
        assert!(close(l.p_value, 0.180598, 1e-4), "{}", l.p_value);
    }

    #[test]
    fn monobit_extremes() {
        let r = monobit(&alternating(1000)).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let r = monobit(&constant(1000, true)).unwrap();
        assert!(r.p_value < 1e-30);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(matches!(
            monobit(&alternating(99)),
            Err(RandomnessError::TooShort {
                min: 100,
                len: 99,
                ..
            })
        ));
    }

    #[test]
    fn block_frequency_extremes() {
        let r = block_frequency(&alternating(1000), 20).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(block_frequency(&constant(1000, false), 20).unwrap().p_value < 1e-30);
        assert!(block_frequency(&alternating(1000), 0).is_err());
        assert!(block_frequency(&alternating(1000), 1001).is_err());
    }

    #[test]
    fn runs_extremes() {
        let r = runs_test(&alternating(1000)).unwrap();
        assert_eq!(r.statistic, 1000.0);
        assert!(r.p_value < 1e-30);
        assert_eq!(r.verdict, Verdict::Fail);

        let mut half: Vec<bool> = (0..500).map(|i| i % 2 == 1).collect();
        half.extend(std::iter::repeat_n(true, 500));
        let r = runs_test(&BitSequence::new(half)).unwrap();
        assert_ne!(r.verdict, Verdict::Pass);

        let r = runs_test(&constant(1000, true)).unwrap();
        assert_eq!(r.verdict, Verdict::PrerequisiteFailed);
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn cusum_extremes() {
        let r = cumulative_sums(&alternating(1000), Direction::Forward).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!(r.p_value > 0.99);
        let r = cumulative_sums(&constant(1000, true), Direction::Backward).unwrap();
        assert!(r.p_value < 1e-30);
    }

    #[test]
    fn longest_run_extremes() {
        let r = longest_run_of_ones(&constant(1024, false)).unwrap();
        assert!(r.p_value < 1e-10);
        assert!(matches!(
            longest_run_of_ones(&constant(127, false)),
            Err(RandomnessError::TooShort { min: 128, .. })
        ));
        assert_eq!(
            longest_run_of_ones(&constant(6272, false)).unwrap().param,
            "M=128"
        );
        assert_eq!(
            longest_run_of_ones(&constant(750_000, false))
                .unwrap()
                .param,
            "M=10000"
        );
    }

    #[test]
    fn verdict_threshold_is_inclusive() {
        assert_eq!(Verdict::from_p(0.01), Verdict::Pass);
        assert_eq!(Verdict::from_p(0.009_999_999), Verdict::Fail);
    }

    #[test]
    fn stream_sizes() {
        let params = HashParams::preset("paper-256").unwrap();
        let one = hash_stream_generate(
            &params,
            StreamConfig {
                digests: 1,
                input_bits: 1000,
                seed: 1,
                sequence_bits: None,
            },
        );
        assert_eq!(one.sequences.len(), 1);
        assert_eq!(one.sequences[0].len(), 1024);
        assert_eq!(StreamConfig::digests_for(1, 1_000_000, 1024), 977);
        assert_eq!(977 * 1024, 1_000_448);

        let grouped = hash_stream_generate(
            &params,
            StreamConfig {
                digests: 7,
                input_bits: 64,
                seed: 2,
                sequence_bits: Some(3000),
            },
        );
        assert_eq!(grouped.sequences.len(), 2);
        assert_eq!(grouped.sequences[0].len(), 3072);
        let again = hash_stream_generate(
            &params,
            StreamConfig {
                digests: 7,
                input_bits: 64,
                seed: 2,
                sequence_bits: Some(3000),
            },
        );
        assert_eq!(grouped.sequences, again.sequences);
    }

    #[test]
    fn seeded_inputs_are_stable() {
        let a = seeded_input(3, 0, 130);
        assert_eq!(a.len(), 130);
        assert_eq!(a, seeded_input(3, 0, 130));
        assert_ne!(a, seeded_input(3, 1, 130));
        assert_eq!(&seeded_input(3, 0, 200)[..130], &a[..]);
    }

    #[test]
    fn export_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        assert!(sts_export(&[], dir.path()).unwrap().is_empty());
        let seqs: Vec<BitSequence> = (0..100).map(|i| alternating(100 + i)).collect();
        let paths = sts_export(&seqs, dir.path()).unwrap();
        assert_eq!(paths.len(), 100);
        let mut names: Vec<String> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        let mut expected: Vec<String> = (0..100).map(export_file_name).collect();
        expected.sort();
        assert_eq!(names, expected);
        for (seq, path) in seqs.iter().zip(&paths) {
            assert_eq!(&read_sequence(path).unwrap(), seq);
            assert!(fs::read_to_string(path).unwrap().ends_with('\n'));
        }
    }
}
