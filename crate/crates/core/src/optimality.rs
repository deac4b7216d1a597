//! Optimality certification.
//!
//! A decoding matrix is optimal exactly when every column is a permutation
//! of the alphabet, except in two regimes (`n = 2`, and `d = 2` with even
//! `n`) where one column may be arbitrary. [`oracle_enumerate`] checks this
//! independently by scoring every matrix of a small game.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Pow};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::{
    all_permutations, apply_column_permutations, majority_strategy, matrix_at, DecodingMatrix,
    EnumerationCap, GameParams, Letter, MatrixFile, RandomizedStrategy,
};
use crate::rational::{to_fraction_string, ExactRational};
use crate::value::normalize_total;

/// Default limit on the number of matrices the oracle may score.
pub const DEFAULT_ORACLE_CAP: u64 = 20_000_000;

/// Default number of optimizers the oracle keeps.
pub const DEFAULT_RETAIN_LIMIT: usize = 100_000;

/// Which characterization of optimal strategies applies to a game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OptimalityClass {
    /// `d = 1` or `n = 1`.
    Trivial,
    /// `n > 2` and either `d > 2` or `n` odd: every column a permutation.
    General,
    /// `n = 2`, `d >= 2`: at most one non-permutation column.
    NEquals2,
    /// `d = 2`, even `n > 2`: at most one non-permutation column.
    BinaryEvenN,
}

impl fmt::Display for OptimalityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Trivial => "Trivial",
            Self::General => "General",
            Self::NEquals2 => "NEquals2",
            Self::BinaryEvenN => "BinaryEvenN",
        })
    }
}

pub fn classify(params: GameParams) -> OptimalityClass {
    let (n, d) = (params.n(), params.d());
    if n == 1 || d == 1 {
        OptimalityClass::Trivial
    } else if n == 2 {
        OptimalityClass::NEquals2
    } else if d == 2 && n % 2 == 0 {
        OptimalityClass::BinaryEvenN
    } else {
        OptimalityClass::General
    }
}

pub(crate) fn is_permutation_column(column: &[Letter], d: usize) -> bool {
    let mut seen = vec![false; d];
    column.len() == d
        && column
            .iter()
            .all(|l| l.index() < d && !std::mem::replace(&mut seen[l.index()], true))
}

fn bad_columns(g: &DecodingMatrix) -> usize {
    let d = g.params().alphabet();
    (0..g.params().len())
        .filter(|&j| !is_permutation_column(&g.column(j), d))
        .count()
}

/// Every column of `g` is a permutation of the alphabet.
pub fn satisfies_property1(g: &DecodingMatrix) -> bool {
    bad_columns(g) == 0
}

/// At most one column of `g` fails to be a permutation.
pub fn satisfies_property2(g: &DecodingMatrix) -> bool {
    bad_columns(g) <= 1
}

/// Theorem-based verdict, no enumeration involved.
pub fn is_optimal(g: &DecodingMatrix) -> bool {
    match classify(g.params()) {
        OptimalityClass::Trivial => is_optimal_trivial(g),
        OptimalityClass::General => satisfies_property1(g),
        OptimalityClass::NEquals2 | OptimalityClass::BinaryEvenN => satisfies_property2(g),
    }
}

// For d = 1 the single matrix is optimal. For n = 1 the value is the fraction
// of letters that appear in the one column, so optimal means a permutation.
fn is_optimal_trivial(g: &DecodingMatrix) -> bool {
    g.params().d() == 1 || satisfies_property1(g)
}

/// A mixture is optimal iff each of its components is.
pub fn randomized_is_optimal(r: &RandomizedStrategy) -> bool {
    r.components().iter().all(|(_, m)| is_optimal(m))
}

/// Where a count of optimal matrices comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountBasis {
    /// `(d!)^n`, the general-regime theorem.
    Theorem,
    /// Matrices with at most one non-permutation column,
    /// `(d!)^n + n (d^d - d!) (d!)^(n-1)`; a derived formula confirmed by the
    /// oracle on small games.
    DerivedProperty2,
    /// `d = 1`: the only matrix.
    SingleMatrix,
    /// `n = 1` with `d > 1`: no formula is claimed; use the oracle.
    Unavailable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalCount {
    pub count: Option<BigUint>,
    pub basis: CountBasis,
}

fn factorial(d: u32) -> BigUint {
    (1..=d).map(BigUint::from).product()
}

/// Number of optimal deterministic decoding matrices.
pub fn count_optimal(params: GameParams) -> OptimalCount {
    let (n, d) = (params.n(), params.d());
    let perms = factorial(d);
    let (count, basis) = match classify(params) {
        OptimalityClass::Trivial if d == 1 => (Some(BigUint::one()), CountBasis::SingleMatrix),
        OptimalityClass::Trivial => (None, CountBasis::Unavailable),
        OptimalityClass::General => (Some(Pow::pow(&perms, n)), CountBasis::Theorem),
        OptimalityClass::NEquals2 | OptimalityClass::BinaryEvenN => {
            let all_columns: BigUint = Pow::pow(BigUint::from(d), d);
            let one_bad = BigUint::from(n) * (all_columns - &perms) * Pow::pow(&perms, n - 1);
            (Some(Pow::pow(&perms, n) + one_bad), CountBasis::DerivedProperty2)
        }
    };
    OptimalCount { count, basis }
}

/// Images of `g` under every tuple of column relabelings.
pub fn column_permutation_orbit(g: &DecodingMatrix) -> Vec<DecodingMatrix> {
    let params = g.params();
    let perms = all_permutations(params.d());
    let n = params.len();
    let mut choice = vec![0usize; n];
    let mut out = Vec::new();
    loop {
        let tuple: Vec<_> = choice.iter().map(|&i| perms[i].clone()).collect();
        out.push(apply_column_permutations(g, &tuple).expect("tuple has the right shape"));
        let Some(p) = (0..n).rev().find(|&p| choice[p] + 1 < perms.len()) else {
            return out;
        };
        choice[p] += 1;
        choice[p + 1..].fill(0);
    }
}

/// Every optimal matrix of a general-regime game: the orbit of the majority
/// strategy.
pub fn majority_orbit(params: GameParams) -> Vec<DecodingMatrix> {
    column_permutation_orbit(&majority_strategy(params))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub params: GameParams,
    pub max_value: ExactRational,
    pub optimizer_count: BigUint,
    /// Optimizers in enumeration order; `None` when more than the retain
    /// limit were found.
    pub optimizers: Option<Vec<DecodingMatrix>>,
}

/// Wire form of an [`OracleResult`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleJson {
    pub n: u32,
    pub d: u32,
    pub max_value: String,
    pub count: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub optimizers: Option<Vec<MatrixFile>>,
}

impl OracleResult {
    pub fn to_wire(&self) -> OracleJson {
        OracleJson {
            n: self.params.n(),
            d: self.params.d(),
            max_value: to_fraction_string(&self.max_value),
            count: self.optimizer_count.to_string(),
            optimizers: self
                .optimizers
                .as_ref()
                .map(|v| v.iter().cloned().map(MatrixFile::from).collect()),
        }
    }
}

#[derive(Debug, Clone)]
struct Partial {
    best: u64,
    count: u64,
    // matrix indices, ascending; None once over the limit
    hits: Option<Vec<u64>>,
}

impl Partial {
    fn empty() -> Self {
        Self {
            best: 0,
            count: 0,
            hits: Some(Vec::new()),
        }
    }

    fn merge(self, other: Self, limit: usize) -> Self {
        use std::cmp::Ordering::*;
        match self.best.cmp(&other.best) {
            Greater => self,
            Less => other,
            Equal => {
                let hits = match (self.hits, other.hits) {
                    (Some(mut a), Some(b)) if a.len() + b.len() <= limit => {
                        a.extend(b);
                        a.sort_unstable();
                        Some(a)
                    }
                    _ => None,
                };
                Self {
                    best: self.best,
                    count: self.count + other.count,
                    hits,
                }
            }
        }
    }
}

// Matrices per parallel work unit.
const ORACLE_CHUNK: u64 = 1 << 12;

/// Scores every decoding matrix of the game by word enumeration and reports
/// the maximum value and every matrix attaining it.
pub fn oracle_enumerate(params: GameParams) -> Result<OracleResult> {
    oracle_enumerate_with(params, EnumerationCap::new(DEFAULT_ORACLE_CAP), DEFAULT_RETAIN_LIMIT)
}

pub fn oracle_enumerate_with(
    params: GameParams,
    cap: EnumerationCap,
    retain_limit: usize,
) -> Result<OracleResult> {
    let total = cap.admit("matrix space", &params.matrix_space_size())?;
    let (n, d) = (params.len(), params.alphabet());
    // The word space is tiny whenever the matrix space passes the cap.
    let words: Vec<Letter> = crate::game::iterate_words(params, EnumerationCap::unlimited())?
        .flat_map(|w| w.letters().to_vec())
        .collect();

    let score = |cells: &[Letter]| -> u64 {
        words
            .chunks_exact(n)
            .map(|x| {
                cells
                    .chunks_exact(n)
                    .map(|row| row.iter().zip(x).filter(|(a, b)| a == b).count())
                    .max()
                    .unwrap() as u64
            })
            .sum()
    };

    let chunks = total.div_ceil(ORACLE_CHUNK);
    let result = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * ORACLE_CHUNK;
            let end = (start + ORACLE_CHUNK).min(total);
            let mut cells = matrix_at(params, start).cells().to_vec();
            let mut part = Partial::empty();
            for index in start..end {
                let s = score(&cells);
                if s > part.best || part.count == 0 {
                    part = Partial {
                        best: s,
                        count: 1,
                        hits: Some(vec![index]),
                    };
                } else if s == part.best {
                    part.count += 1;
                    if let Some(h) = part.hits.as_mut() {
                        if h.len() < retain_limit {
                            h.push(index);
                        } else {
                            part.hits = None;
                        }
                    }
                }
                crate::game::advance(&mut cells, d as u32);
            }
            part
        })
        .reduce(Partial::empty, |a, b| {
            if a.count == 0 {
                b
            } else if b.count == 0 {
                a
            } else {
                a.merge(b, retain_limit)
            }
        });

    Ok(OracleResult {
        params,
        max_value: normalize_total(params, result.best),
        optimizer_count: result.count.into(),
        optimizers: result
            .hits
            .map(|h| h.into_iter().map(|i| matrix_at(params, i)).collect()),
    })
}
