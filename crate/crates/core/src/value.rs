//! Exact strategy values.
//!
//! The value of a decoding matrix `f` under Alice's best response is
//!
//! ```text
//! Value(f) = 1/(n d^n) * sum over words x of max_y Sim(f_y, x)
//! ```
//!
//! Enumeration over the word space evaluates this for a concrete matrix.
//! The optimal value for arbitrary `(n, d)` is the value of the majority
//! strategy, `E[max letter multiplicity] / n`, which is computed without
//! enumeration by counting words whose letter multiplicities all stay below
//! a threshold.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{
    agreement, word_at, EncodingFunction, EnumerationCap, GameParams, Letter, RandomizedStrategy,
};
use crate::game::DecodingMatrix;
use crate::rational::{to_decimal, to_fraction_string, ExactRational};

/// How a reported value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ValueMethod {
    WordEnumeration,
    MultiplicityDP,
    Lemma4Formula,
    Lemma5Formula,
}

impl ValueMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::WordEnumeration => "WordEnumeration",
            Self::MultiplicityDP => "MultiplicityDP",
            Self::Lemma4Formula => "Lemma4Formula",
            Self::Lemma5Formula => "Lemma5Formula",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueReport {
    pub params: GameParams,
    pub value: ExactRational,
    pub method: ValueMethod,
}

/// Wire form of a [`ValueReport`].
#[derive(Debug, Clone, Serialize, serde::Deserialize, PartialEq, Eq)]
pub struct ValueReportJson {
    pub n: u32,
    pub d: u32,
    pub value: String,
    pub decimal: String,
    pub method: String,
}

impl ValueReport {
    pub fn to_wire(&self, digits: usize) -> ValueReportJson {
        ValueReportJson {
            n: self.params.n(),
            d: self.params.d(),
            value: to_fraction_string(&self.value),
            decimal: to_decimal(&self.value, digits),
            method: self.method.as_str().to_string(),
        }
    }
}

// Words per parallel work unit when scanning large word spaces.
const SCAN_CHUNK: u64 = 1 << 14;

/// Sum over words in `start..end` of `max_y Sim(f_y, x)`.
///
/// Keeps a running agreement count per row and updates it only at the
/// positions the lexicographic odometer touches.
fn scan_best_response(f: &DecodingMatrix, start: u64, end: u64) -> u128 {
    let params = f.params();
    let (n, d) = (params.len(), params.alphabet());
    // rows_with[j * d + c] = rows whose column j holds letter c
    let mut rows_with: Vec<Vec<usize>> = vec![Vec::new(); n * d];
    for (y, row) in f.rows().enumerate() {
        for (j, l) in row.iter().enumerate() {
            rows_with[j * d + l.index()].push(y);
        }
    }
    let mut word = word_at(params, start).letters().to_vec();
    let mut agree: Vec<usize> = f.rows().map(|r| agreement(r, &word)).collect();
    let mut total = 0u128;
    for i in start..end {
        total += *agree.iter().max().unwrap() as u128;
        if i + 1 == end {
            break;
        }
        for p in (0..n).rev() {
            let old = word[p].index();
            let new = if old + 1 < d { old + 1 } else { 0 };
            for &y in &rows_with[p * d + old] {
                agree[y] -= 1;
            }
            for &y in &rows_with[p * d + new] {
                agree[y] += 1;
            }
            word[p] = Letter::new(new as u32);
            if new != 0 {
                break;
            }
        }
    }
    total
}

fn chunked<F>(count: u64, scan: F) -> u128
where
    F: Fn(u64, u64) -> u128 + Sync,
{
    if count <= SCAN_CHUNK {
        return scan(0, count);
    }
    let chunks = count.div_ceil(SCAN_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| scan(c * SCAN_CHUNK, ((c + 1) * SCAN_CHUNK).min(count)))
        .sum()
}

/// `sum_x max_y Sim(f_y, x)` over the full word space.
pub fn best_response_total(f: &DecodingMatrix, cap: EnumerationCap) -> Result<u128> {
    let count = cap.admit("word space", &f.params().word_space_size())?;
    Ok(chunked(count, |a, b| scan_best_response(f, a, b)))
}

/// Same total restricted to the words with lexicographic index in `start..end`.
pub fn best_response_total_range(f: &DecodingMatrix, start: u64, end: u64) -> u128 {
    scan_best_response(f, start, end)
}

/// Converts an agreement total into a value: `total / (n d^n)`.
pub(crate) fn normalize_total(params: GameParams, total: impl Into<BigUint>) -> ExactRational {
    let denom = params.word_space_size() * BigUint::from(params.n());
    ExactRational::new(BigInt::from(total.into()), BigInt::from(denom))
}

/// Value of `f` against Alice's best response, by word enumeration under the
/// default cap.
pub fn strategy_value(f: &DecodingMatrix) -> Result<ExactRational> {
    strategy_value_capped(f, EnumerationCap::default())
}

pub fn strategy_value_capped(f: &DecodingMatrix, cap: EnumerationCap) -> Result<ExactRational> {
    Ok(normalize_total(f.params(), best_response_total(f, cap)?))
}

pub fn strategy_value_report(f: &DecodingMatrix, cap: EnumerationCap) -> Result<ValueReport> {
    Ok(ValueReport {
        params: f.params(),
        value: strategy_value_capped(f, cap)?,
        method: ValueMethod::WordEnumeration,
    })
}

/// Average success of Alice playing `enc` against Bob playing `f`.
pub fn pair_value(enc: &EncodingFunction, f: &DecodingMatrix) -> Result<ExactRational> {
    pair_value_capped(enc, f, EnumerationCap::default())
}

pub fn pair_value_capped(
    enc: &EncodingFunction,
    f: &DecodingMatrix,
    cap: EnumerationCap,
) -> Result<ExactRational> {
    let table = match enc {
        EncodingFunction::BestResponse => return strategy_value_capped(f, cap),
        EncodingFunction::Explicit(table) => table,
    };
    let params = f.params();
    if table.params() != params {
        return Err(Error::InvalidEncoding(format!(
            "encoding for {} used with a matrix for {}",
            table.params(),
            params
        )));
    }
    let count = cap.admit("word space", &params.word_space_size())?;
    let total = chunked(count, |a, b| {
        let mut sum = 0u128;
        for (i, x) in crate::game::Words::range(params, a, b).enumerate() {
            let y = table.encode_index(a + i as u64);
            sum += agreement(f.row(y.index()), x.letters()) as u128;
        }
        sum
    });
    Ok(normalize_total(params, total))
}

/// `sum_i w_i * Value(f_i)`.
pub fn randomized_value(r: &RandomizedStrategy) -> Result<ExactRational> {
    randomized_value_capped(r, EnumerationCap::default())
}

pub fn randomized_value_capped(
    r: &RandomizedStrategy,
    cap: EnumerationCap,
) -> Result<ExactRational> {
    let mut total = ExactRational::zero();
    for (w, f) in r.components() {
        total += w * strategy_value_capped(f, cap)?;
    }
    Ok(total)
}

const SHARED_PASCAL_ROWS: usize = 200;
static PASCAL: OnceLock<Vec<Vec<BigUint>>> = OnceLock::new();

fn pascal_rows(n_max: usize) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut row = vec![BigUint::one(); n + 1];
        for k in 1..n {
            row[k] = &rows[n - 1][k - 1] + &rows[n - 1][k];
        }
        rows.push(row);
    }
    rows
}

/// Runs `f` with a Pascal triangle covering rows `0..=n_max`. Rows up to 200
/// come from a shared table built once.
fn with_binomials<R>(n_max: usize, f: impl FnOnce(&[Vec<BigUint>]) -> R) -> R {
    if n_max <= SHARED_PASCAL_ROWS {
        f(PASCAL.get_or_init(|| pascal_rows(SHARED_PASCAL_ROWS)))
    } else {
        f(&pascal_rows(n_max))
    }
}

/// `C(n, k)`, zero for `k > n`.
pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    with_binomials(n as usize, |c| c[n as usize][k as usize].clone())
}

/// One letter step of the bounded-multiplicity DP:
/// `next[p] = sum_{k <= min(cap, p)} C(p, k) * prev[p - k]`.
fn add_letter(prev: &[BigUint], cap: usize, binom: &[Vec<BigUint>], reach: usize) -> Vec<BigUint> {
    let len = prev.len();
    let mut next = vec![BigUint::zero(); len];
    for (p, slot) in next.iter_mut().enumerate().take(reach.min(len - 1) + 1) {
        let mut acc = BigUint::zero();
        for k in 0..=cap.min(p) {
            let base = &prev[p - k];
            if !base.is_zero() {
                acc += &binom[p][k] * base;
            }
        }
        *slot = acc;
    }
    next
}

/// Number of words of length `n` over `d` letters in which no letter occurs
/// more than `m` times.
pub fn count_words_with_multiplicity_at_most(params: GameParams, m: u32) -> BigUint {
    let (n, d) = (params.len(), params.alphabet());
    let m = m as usize;
    if m >= n {
        return params.word_space_size();
    }
    if m.saturating_mul(d) < n {
        return BigUint::zero();
    }
    with_binomials(n, |binom| {
        let mut dp = vec![BigUint::zero(); n + 1];
        dp[0] = BigUint::one();
        for letters in 1..d {
            dp = add_letter(&dp, m, binom, letters * m);
        }
        // last letter: only length n is needed
        (0..=m.min(n))
            .map(|k| &binom[n][k] * &dp[n - k])
            .sum()
    })
}

/// `W(m)` for `m = 0..=n`: the number of words whose largest letter
/// multiplicity is exactly `m`.
pub fn max_multiplicity_distribution(params: GameParams) -> Vec<BigUint> {
    let n = params.n();
    let at_most: Vec<BigUint> = (0..=n)
        .into_par_iter()
        .map(|m| count_words_with_multiplicity_at_most(params, m))
        .collect();
    let mut w = vec![BigUint::zero(); n as usize + 1];
    for m in 1..=n as usize {
        w[m] = &at_most[m] - &at_most[m - 1];
    }
    w
}

/// Exact optimal value of the `(n, d)` game: `sum_m m W(m) / (n d^n)`.
pub fn optimal_value(params: GameParams) -> ExactRational {
    let w = max_multiplicity_distribution(params);
    let total: BigUint = w
        .iter()
        .enumerate()
        .map(|(m, count)| count * BigUint::from(m))
        .sum();
    normalize_total(params, total)
}

pub fn optimal_value_report(params: GameParams) -> ValueReport {
    ValueReport {
        params,
        value: optimal_value(params),
        method: ValueMethod::MultiplicityDP,
    }
}

/// Optimal values for every `1 <= n <= n_max`, `1 <= d <= d_max`;
/// `table[n-1][d-1]` holds the `(n, d)` value.
///
/// One multiplicity DP per threshold `m` serves all cells at once: after
/// adding `i` letters, entry `p` counts the length-`p` words over `i` letters
/// with every multiplicity at most `m`. The expected maximum multiplicity is
/// then `n - sum_{m<n} A_m(n, d) / d^n`.
pub fn optimal_value_table(n_max: u32, d_max: u32) -> Result<Vec<Vec<ExactRational>>> {
    GameParams::new(n_max, d_max)?;
    let (nm, dm) = (n_max as usize, d_max as usize);
    let zero_grid = || vec![vec![BigUint::zero(); dm]; nm];
    let at_most_sums = with_binomials(nm, |binom| {
        (1..nm)
            .into_par_iter()
            .map(|m| {
                let mut grid = zero_grid();
                let mut dp = vec![BigUint::zero(); nm + 1];
                dp[0] = BigUint::one();
                for letters in 1..=dm {
                    dp = add_letter(&dp, m, binom, letters * m);
                    for p in (m + 1)..=nm {
                        grid[p - 1][letters - 1] = dp[p].clone();
                    }
                }
                grid
            })
            .reduce(zero_grid, |mut a, b| {
                for (ra, rb) in a.iter_mut().zip(b) {
                    for (x, y) in ra.iter_mut().zip(rb) {
                        *x += y;
                    }
                }
                a
            })
    });
    let mut table = Vec::with_capacity(nm);
    for n in 1..=n_max {
        let row = (1..=d_max)
            .map(|d| {
                let space: BigUint = Pow::pow(BigUint::from(d), n);
                let full = &space * BigUint::from(n);
                let sum = &at_most_sums[n as usize - 1][d as usize - 1];
                ExactRational::new(BigInt::from(full.clone() - sum), BigInt::from(full))
            })
            .collect();
        table.push(row);
    }
    Ok(table)
}

/// Value of every optimal strategy when `n = 2`:
/// `(1*d + 1/2*(d-1)*d) / d^2`, i.e. `(d+1)/(2d)`.
pub fn lemma4_value(d: u32) -> Result<ExactRational> {
    if d == 0 {
        return Err(Error::Domain("alphabet size must be at least 1".into()));
    }
    let d = ExactRational::from_integer(d.into());
    let half = ExactRational::new(1.into(), 2.into());
    Ok((&d + half * (&d - ExactRational::one()) * &d) / (&d * &d))
}

/// Value of every optimal strategy for the binary alphabet and even `n`:
/// `2^-n * sum_k C(n,k) max(k, n-k) / n`.
pub fn lemma5_value(n: u32) -> Result<ExactRational> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::Domain(format!(
            "the binary even-length formula needs an even n >= 2, got {n}"
        )));
    }
    let sum: BigUint = (0..=n)
        .map(|k| binomial(n, k) * BigUint::from(k.max(n - k)))
        .sum();
    let denom = Pow::pow(BigUint::from(2u32), n) * BigUint::from(n);
    Ok(ExactRational::new(sum.into(), denom.into()))
}

pub fn lemma4_report(d: u32) -> Result<ValueReport> {
    Ok(ValueReport {
        params: GameParams::new(2, d)?,
        value: lemma4_value(d)?,
        method: ValueMethod::Lemma4Formula,
    })
}

pub fn lemma5_report(n: u32) -> Result<ValueReport> {
    Ok(ValueReport {
        params: GameParams::new(n, 2)?,
        value: lemma5_value(n)?,
        method: ValueMethod::Lemma5Formula,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{
        best_response_encode_with, iterate_words, majority_strategy, ExplicitEncoding, TieBreak,
    };
    use crate::rational::ratio;

    fn p(n: u32, d: u32) -> GameParams {
        GameParams::new(n, d).unwrap()
    }

    fn m(rows: &[&str]) -> DecodingMatrix {
        DecodingMatrix::from_digit_rows(rows).unwrap()
    }

    /// Direct evaluation of the defining sum, row by row.
    fn naive_value(f: &DecodingMatrix) -> ExactRational {
        let params = f.params();
        let total: usize = iterate_words(params, EnumerationCap::default())
            .unwrap()
            .map(|x| f.rows().map(|r| agreement(r, x.letters())).max().unwrap())
            .sum();
        normalize_total(params, BigUint::from(total))
    }

    /// Brute-force histogram of the largest letter multiplicity.
    fn naive_distribution(params: GameParams) -> Vec<BigUint> {
        let mut w = vec![BigUint::zero(); params.len() + 1];
        for x in iterate_words(params, EnumerationCap::default()).unwrap() {
            let mut counts = vec![0usize; params.alphabet()];
            for l in x.letters() {
                counts[l.index()] += 1;
            }
            w[*counts.iter().max().unwrap()] += 1u32;
        }
        w
    }

    #[test]
    fn strategy_value_examples() {
        assert_eq!(strategy_value(&majority_strategy(p(2, 2))).unwrap(), ratio(3, 4));
        assert_eq!(strategy_value(&m(&["00", "00"])).unwrap(), ratio(1, 2));
        assert_eq!(strategy_value(&majority_strategy(p(2, 3))).unwrap(), ratio(2, 3));
    }

    #[test]
    fn incremental_scan_matches_naive_sum() {
        for rows in [
            vec!["012", "120", "201"],
            vec!["000", "000", "012"],
            vec!["0101", "1100"],
            vec!["2", "2", "1"],
        ] {
            let f = m(&rows);
            assert_eq!(strategy_value(&f).unwrap(), naive_value(&f), "{rows:?}");
        }
    }

    #[test]
    fn scan_is_independent_of_partitioning() {
        let f = m(&["0120", "1201", "2012"]);
        let whole = best_response_total(&f, EnumerationCap::default()).unwrap();
        let split: u128 = [(0, 1), (1, 30), (30, 31), (31, 81)]
            .iter()
            .map(|&(a, b)| best_response_total_range(&f, a, b))
            .sum();
        assert_eq!(whole, split);

        // large enough to take the parallel path
        let big = majority_strategy(p(9, 4));
        let total = best_response_total(&big, EnumerationCap::default()).unwrap();
        let serial = best_response_total_range(&big, 0, 4u64.pow(9));
        assert_eq!(total, serial);
    }

    #[test]
    fn strategy_value_refuses_large_spaces() {
        let f = majority_strategy(p(20, 4));
        assert!(matches!(strategy_value(&f), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn pair_value_examples() {
        let maj = majority_strategy(p(2, 2));
        assert_eq!(pair_value(&EncodingFunction::BestResponse, &maj).unwrap(), ratio(3, 4));

        let params = p(3, 2);
        let maj = majority_strategy(params);
        let constant = ExplicitEncoding::new(params, vec![Letter::new(0); 8]).unwrap();
        assert_eq!(
            pair_value(&EncodingFunction::Explicit(constant), &maj).unwrap(),
            ratio(1, 2)
        );

        let wrong = ExplicitEncoding::new(p(2, 2), vec![Letter::new(0); 4]).unwrap();
        assert!(pair_value(&EncodingFunction::Explicit(wrong), &maj).is_err());
    }

    #[test]
    fn tie_breaking_never_changes_the_value() {
        for (n, d) in [(1, 2), (2, 2), (3, 2), (4, 2), (2, 3), (3, 3), (4, 3)] {
            let params = p(n, d);
            let samples = [
                majority_strategy(params),
                crate::game::matrix_at(params, 5),
                crate::game::matrix_at(params, 1234 % (d as u64).pow(d * n)),
            ];
            for f in samples {
                let high = ExplicitEncoding::from_fn(params, EnumerationCap::default(), |x| {
                    best_response_encode_with(&f, x, TieBreak::Highest).unwrap()
                })
                .unwrap();
                assert_eq!(
                    pair_value(&EncodingFunction::Explicit(high), &f).unwrap(),
                    strategy_value(&f).unwrap()
                );
            }
        }
    }

    #[test]
    fn randomized_value_examples() {
        let params = p(2, 2);
        let opt = majority_strategy(params);
        let flat = m(&["00", "00"]);
        let single = RandomizedStrategy::new(vec![(ratio(1, 1), opt.clone())]).unwrap();
        assert_eq!(randomized_value(&single).unwrap(), ratio(3, 4));
        let mix =
            RandomizedStrategy::new(vec![(ratio(1, 2), opt), (ratio(1, 2), flat)]).unwrap();
        assert_eq!(randomized_value(&mix).unwrap(), ratio(5, 8));

        let a = majority_strategy(p(3, 2));
        let b = m(&["010", "101"]);
        let mix = RandomizedStrategy::new(vec![(ratio(1, 2), a.clone()), (ratio(1, 2), b)])
            .unwrap();
        assert_eq!(randomized_value(&mix).unwrap(), strategy_value(&a).unwrap());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), BigUint::from(6u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
        assert_eq!(
            binomial(100, 50).to_string(),
            "100891344545564193334812497256"
        );
        // beyond the shared triangle
        assert_eq!(binomial(201, 1), BigUint::from(201u32));
        assert_eq!(binomial(201, 200), BigUint::from(201u32));
    }

    #[test]
    fn multiplicity_distribution_matches_brute_force() {
        for n in 1..=6 {
            for d in 1..=6 {
                let params = p(n, d);
                let w = max_multiplicity_distribution(params);
                assert_eq!(w, naive_distribution(params), "(n={n}, d={d})");
                assert_eq!(w.iter().sum::<BigUint>(), params.word_space_size());
            }
        }
    }

    #[test]
    fn optimal_value_examples() {
        for d in 1..=12 {
            assert_eq!(optimal_value(p(2, d)), ratio(d + 1, 2 * d));
        }
        assert_eq!(optimal_value(p(4, 2)), ratio(11, 16));
        for k in 1..=9 {
            assert_eq!(optimal_value(p(1, k)), ratio(1, 1));
            assert_eq!(optimal_value(p(k, 1)), ratio(1, 1));
        }
    }

    #[test]
    fn lemma4_examples() {
        assert_eq!(lemma4_value(2).unwrap(), ratio(3, 4));
        assert_eq!(lemma4_value(1).unwrap(), ratio(1, 1));
        assert_eq!(lemma4_value(100).unwrap(), ratio(101, 200));
        assert!(lemma4_value(0).is_err());
    }

    #[test]
    fn lemma5_examples() {
        assert_eq!(lemma5_value(2).unwrap(), lemma4_value(2).unwrap());
        assert_eq!(lemma5_value(4).unwrap(), ratio(11, 16));
        assert_eq!(lemma5_value(100).unwrap(), optimal_value(p(100, 2)));
        assert!(matches!(lemma5_value(5), Err(Error::Domain(_))));
        assert!(lemma5_value(0).is_err());
    }

    #[test]
    fn table_agrees_with_single_cells() {
        let table = optimal_value_table(9, 7).unwrap();
        assert_eq!(table.len(), 9);
        for (i, row) in table.iter().enumerate() {
            assert_eq!(row.len(), 7);
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, optimal_value(p(i as u32 + 1, j as u32 + 1)));
            }
        }
        assert!(optimal_value_table(0, 3).is_err());
    }

    #[test]
    fn report_wire_format() {
        let wire = optimal_value_report(p(2, 2)).to_wire(12);
        let json = serde_json::to_value(&wire).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"n": 2, "d": 2, "value": "3/4", "decimal": "0.75", "method": "MultiplicityDP"})
        );
    }
}
