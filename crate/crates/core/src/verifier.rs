//! Exhaustive and sampled verification of erasure-pattern families.
//!
//! An MR-type pattern picks one column from every wide column plus `h`
//! further columns among the remaining `n - g`; an SD-type pattern does the
//! same but picks the same position `j` in every wide column. A code has the
//! property when the selected columns of `H` are independent for every
//! pattern of the family.
//!
//! Patterns are indexed: the designated choice is the most significant part
//! (position tuple read as base-`(r+1)` digits, group 0 first) and the
//! lexicographic rank of the extra columns is the least significant part.
//! Enumeration, sampling and counterexample ordering all use this index, so
//! serial and parallel runs agree exactly.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::{CodeInstance, LocalCodeParams};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("column {index} out of range for n = {n}")]
    OutOfRange { index: usize, n: usize },
    #[error("column {0} appears twice in the pattern")]
    RepeatedColumn(usize),
    #[error("pattern has {len} columns, more than g + h = {max}")]
    TooLarge { len: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Mr,
    Sd,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Mr => "mr",
            Family::Sd => "sd",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternClass {
    MrType,
    /// Zero-based position shared by all groups.
    SdType(usize),
    Arbitrary,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErasurePattern {
    /// Sorted, distinct, zero-based column indices.
    pub columns: Vec<usize>,
    pub class: PatternClass,
}

impl ErasurePattern {
    pub fn arbitrary(mut columns: Vec<usize>) -> Self {
        columns.sort_unstable();
        ErasurePattern {
            columns,
            class: PatternClass::Arbitrary,
        }
    }
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Lexicographic unranking of `k`-subsets of `0..n`.
pub fn unrank_combination(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        let left = k - slot - 1;
        let mut c = next;
        loop {
            let count = binomial((n - c - 1) as u64, left as u64);
            if rank < count {
                break;
            }
            rank -= count;
            c += 1;
        }
        out.push(c);
        next = c + 1;
    }
    out
}

/// The indexed pattern family of one parameter set.
#[derive(Debug, Clone, Copy)]
pub struct PatternSpace {
    params: LocalCodeParams,
    family: Family,
    extras: u128,
}

impl PatternSpace {
    pub fn new(params: &LocalCodeParams, family: Family) -> Self {
        PatternSpace {
            params: *params,
            family,
            extras: binomial((params.n - params.g) as u64, params.h as u64),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// `(r+1)^g * C(n-g, h)` or `(r+1) * C(n-g, h)`.
    pub fn len(&self) -> u128 {
        let s = self.params.group_size() as u128;
        match self.family {
            Family::Mr => s.pow(self.params.g as u32) * self.extras,
            Family::Sd => s * self.extras,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pattern(&self, index: u128) -> ErasurePattern {
        let p = &self.params;
        let s = p.group_size() as u128;
        let (mut choice, extra_rank) = (index / self.extras, index % self.extras);
        let (positions, class) = match self.family {
            Family::Mr => {
                let mut positions = vec![0usize; p.g];
                for slot in positions.iter_mut().rev() {
                    *slot = (choice % s) as usize;
                    choice /= s;
                }
                (positions, PatternClass::MrType)
            }
            Family::Sd => {
                let j = choice as usize;
                (vec![j; p.g], PatternClass::SdType(j))
            }
        };
        let chosen: Vec<usize> = positions
            .iter()
            .enumerate()
            .map(|(i, &j)| p.column(i, j))
            .collect();
        let remaining: Vec<usize> = (0..p.n).filter(|c| !chosen.contains(c)).collect();
        let mut columns = chosen;
        columns.extend(
            unrank_combination(remaining.len(), p.h, extra_rank)
                .into_iter()
                .map(|i| remaining[i]),
        );
        columns.sort_unstable();
        ErasurePattern { columns, class }
    }

    pub fn iter(&self) -> impl Iterator<Item = ErasurePattern> + '_ {
        (0..self.len()).map(move |i| self.pattern(i))
    }
}

pub fn enumerate_mr_patterns(params: &LocalCodeParams) -> impl Iterator<Item = ErasurePattern> {
    let space = PatternSpace::new(params, Family::Mr);
    (0..space.len()).map(move |i| space.pattern(i))
}

pub fn enumerate_sd_patterns(params: &LocalCodeParams) -> impl Iterator<Item = ErasurePattern> {
    let space = PatternSpace::new(params, Family::Sd);
    (0..space.len()).map(move |i| space.pattern(i))
}

fn validate(instance: &CodeInstance, columns: &[usize]) -> Result<(), VerifyError> {
    let p = instance.params();
    if columns.len() > p.g + p.h {
        return Err(VerifyError::TooLarge {
            len: columns.len(),
            max: p.g + p.h,
        });
    }
    let mut seen = vec![false; p.n];
    for &c in columns {
        if c >= p.n {
            return Err(VerifyError::OutOfRange { index: c, n: p.n });
        }
        if std::mem::replace(&mut seen[c], true) {
            return Err(VerifyError::RepeatedColumn(c));
        }
    }
    Ok(())
}

/// Whether the columns of `H` at `columns` are linearly independent.
pub fn columns_independent(instance: &CodeInstance, columns: &[usize]) -> bool {
    if columns.is_empty() {
        return true;
    }
    let sub = instance
        .parity_check()
        .select_columns(columns)
        .expect("columns validated");
    sub.rank() == columns.len()
}

/// True iff the pattern's columns of `H` are independent.
pub fn check_pattern(
    instance: &CodeInstance,
    pattern: &ErasurePattern,
) -> Result<bool, VerifyError> {
    validate(instance, &pattern.columns)?;
    Ok(columns_independent(instance, &pattern.columns))
}

/// Same verdict as [`check_pattern`], computed after discarding every
/// column that is alone in its wide column together with that group's
/// indicator row (the only row where such a column has a one among the
/// pattern's columns).
pub fn check_pattern_pruned(
    instance: &CodeInstance,
    pattern: &ErasurePattern,
) -> Result<bool, VerifyError> {
    validate(instance, &pattern.columns)?;
    let p = instance.params();
    let mut per_group = vec![0usize; p.g];
    for &c in &pattern.columns {
        per_group[p.group_of(c).0] += 1;
    }
    let kept: Vec<usize> = pattern
        .columns
        .iter()
        .copied()
        .filter(|&c| per_group[p.group_of(c).0] > 1)
        .collect();
    if kept.is_empty() {
        return Ok(true);
    }
    let rows: Vec<usize> = (0..p.g)
        .filter(|&i| per_group[i] > 1)
        .chain(p.g..p.g + p.h)
        .collect();
    let sub = instance
        .parity_check()
        .select_rows(&rows)
        .and_then(|m| m.select_columns(&kept))
        .expect("indices validated");
    Ok(sub.rank() == kept.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Sample { seed: u64, count: u64 },
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exhaustive => write!(f, "exhaustive"),
            Mode::Sample { seed, count } => write!(f, "sample(count={count}, seed={seed})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub mode: Mode,
    pub parallel: bool,
    /// Use [`check_pattern_pruned`] instead of [`check_pattern`].
    pub prune: bool,
}

impl VerifyOptions {
    pub fn exhaustive() -> Self {
        VerifyOptions {
            mode: Mode::Exhaustive,
            parallel: true,
            prune: false,
        }
    }

    pub fn sample(seed: u64, count: u64) -> Self {
        VerifyOptions {
            mode: Mode::Sample { seed, count },
            ..Self::exhaustive()
        }
    }

    pub fn serial(mut self) -> Self {
        self.parallel = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    /// Pattern index (exhaustive) or draw number (sample).
    pub position: u64,
    pub pattern: ErasurePattern,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub family: Family,
    pub mode: String,
    pub family_size: String,
    pub patterns_checked: u64,
    pub passed: bool,
    pub failing: u64,
    pub first_counterexample: Option<Counterexample>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl PartialEq for VerificationReport {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family
            && self.mode == other.mode
            && self.family_size == other.family_size
            && self.patterns_checked == other.patterns_checked
            && self.passed == other.passed
            && self.failing == other.failing
            && self.first_counterexample == other.first_counterexample
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {} patterns checked, {} failing -> {}",
            self.family,
            self.mode,
            self.patterns_checked,
            self.failing,
            if self.passed { "PASS" } else { "FAIL" }
        )?;
        if let Some(c) = &self.first_counterexample {
            write!(
                f,
                " (first counterexample #{}: columns {:?})",
                c.position, c.pattern.columns
            )?;
        }
        Ok(())
    }
}

/// Runs every pattern of the selected positions and merges the results.
pub fn verify(
    instance: &CodeInstance,
    family: Family,
    options: &VerifyOptions,
) -> VerificationReport {
    let start = Instant::now();
    let space = PatternSpace::new(instance.params(), family);
    let check = |pattern: &ErasurePattern| {
        let ok = if options.prune {
            check_pattern_pruned(instance, pattern)
        } else {
            check_pattern(instance, pattern)
        };
        ok.expect("enumerated patterns are well-formed")
    };

    let indices: Vec<u128> = match options.mode {
        Mode::Exhaustive => Vec::new(),
        Mode::Sample { seed, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| rng.random_range(0..space.len()))
                .collect()
        }
    };
    let total = match options.mode {
        Mode::Exhaustive => {
            u64::try_from(space.len()).expect("family too large for exhaustive mode")
        }
        Mode::Sample { count, .. } => count,
    };
    let index_at = |pos: u64| match options.mode {
        Mode::Exhaustive => pos as u128,
        Mode::Sample { .. } => indices[pos as usize],
    };
    let failure = |pos: u64| {
        let pattern = space.pattern(index_at(pos));
        (!check(&pattern)).then_some((pos, pattern))
    };

    let (failing, first) = if options.parallel {
        (0..total)
            .into_par_iter()
            .filter_map(failure)
            .map(|(pos, pattern)| (1u64, Some((pos, pattern))))
            .reduce(
                || (0, None),
                |(ca, a), (cb, b)| {
                    let first = match (a, b) {
                        (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
                        (a, b) => a.or(b),
                    };
                    (ca + cb, first)
                },
            )
    } else {
        let mut failing = 0;
        let mut first = None;
        for pos in 0..total {
            if let Some(hit) = failure(pos) {
                failing += 1;
                first.get_or_insert(hit);
            }
        }
        (failing, first)
    };

    VerificationReport {
        family,
        mode: options.mode.to_string(),
        family_size: space.len().to_string(),
        patterns_checked: total,
        passed: failing == 0,
        failing,
        first_counterexample: first.map(|(position, pattern)| Counterexample { position, pattern }),
        elapsed: start.elapsed(),
    }
}

pub fn verify_mr(instance: &CodeInstance, mode: Mode) -> VerificationReport {
    verify(
        instance,
        Family::Mr,
        &VerifyOptions {
            mode,
            ..VerifyOptions::exhaustive()
        },
    )
}

pub fn verify_sd(instance: &CodeInstance, mode: Mode) -> VerificationReport {
    verify(
        instance,
        Family::Sd,
        &VerifyOptions {
            mode,
            ..VerifyOptions::exhaustive()
        },
    )
}

/// Exhaustive count of failing MR-type patterns.
pub fn mr_census(instance: &CodeInstance) -> VerificationReport {
    verify_mr(instance, Mode::Exhaustive)
}
