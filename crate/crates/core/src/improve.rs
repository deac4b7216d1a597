//! Value-preserving local improvement of decoding matrices and the witness
//! words that certify strict losses.
//!
//! A single step moves a duplicated letter in some column to a letter that is
//! absent from that column. Such a step never lowers the value, so repeating
//! it until every column is a permutation turns any matrix into one with the
//! optimal value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, StepCondition};
use crate::game::{DecodingMatrix, EnumerationCap, Letter, MatrixFile, Word};
use crate::optimality::{is_permutation_column, satisfies_property1};
use crate::rational::{to_fraction_string, ExactRational};
use crate::value::strategy_value_capped;

/// One application of the improvement step: cell `(row, column)` changes
/// from `from` to `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImprovementStep {
    #[serde(rename = "j")]
    pub column: usize,
    #[serde(rename = "y")]
    pub row: usize,
    pub from: Letter,
    pub to: Letter,
}

impl ImprovementStep {
    pub fn apply(&self, f: &DecodingMatrix) -> Result<DecodingMatrix> {
        f.check_index(self.row, self.column)?;
        if f.get(self.row, self.column) != self.from {
            return Err(Error::Precondition(format!(
                "cell ({}, {}) holds {}, step expects {}",
                self.row,
                self.column,
                f.get(self.row, self.column),
                self.from
            )));
        }
        lemma1_step(f, self.column, self.row, self.to)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationTrace {
    pub initial: DecodingMatrix,
    pub steps: Vec<ImprovementStep>,
    pub final_matrix: DecodingMatrix,
    /// Value of the initial matrix followed by the value after each step.
    /// Present only when the word space fits the enumeration cap.
    pub values: Option<Vec<ExactRational>>,
}

impl NormalizationTrace {
    /// Re-applies the steps to the initial matrix.
    pub fn replay(&self) -> Result<DecodingMatrix> {
        self.steps
            .iter()
            .try_fold(self.initial.clone(), |m, step| step.apply(&m))
    }

    pub fn to_wire(&self) -> TraceJson {
        TraceJson {
            initial: self.initial.clone().into(),
            steps: self.steps.clone(),
            final_matrix: self.final_matrix.clone().into(),
            values: self
                .values
                .as_ref()
                .map(|v| v.iter().map(to_fraction_string).collect()),
        }
    }
}

/// Wire form of a [`NormalizationTrace`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceJson {
    pub initial: MatrixFile,
    pub steps: Vec<ImprovementStep>,
    #[serde(rename = "final")]
    pub final_matrix: MatrixFile,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub values: Option<Vec<String>>,
}

/// Sets `f[y1][j] = a`, provided no row holds `a` in column `j` and the
/// letter being replaced also appears in another row of that column.
pub fn lemma1_step(f: &DecodingMatrix, j: usize, y1: usize, a: Letter) -> Result<DecodingMatrix> {
    f.check_index(y1, j)?;
    let params = f.params();
    if a.value() >= params.d() {
        return Err(Error::LetterOutOfRange {
            value: a.value().into(),
            d: params.d(),
        });
    }
    let column = f.column(j);
    let reject = |condition| Error::StepPrecondition {
        column: j,
        row: y1,
        condition,
    };
    if column.contains(&a) {
        return Err(reject(StepCondition::TargetLetterPresent));
    }
    let b = column[y1];
    if !column.iter().enumerate().any(|(y, &l)| y != y1 && l == b) {
        return Err(reject(StepCondition::SourceLetterUnique));
    }
    Ok(f.with_cell(y1, j, a))
}

/// The next step the normalization would take in column `j`, if any: the
/// smallest absent letter goes to the lowest-index row holding a duplicated
/// letter.
fn next_step(f: &DecodingMatrix, j: usize) -> Option<ImprovementStep> {
    let d = f.params().alphabet();
    let column = f.column(j);
    let mut counts = vec![0usize; d];
    for l in &column {
        counts[l.index()] += 1;
    }
    let missing = counts.iter().position(|&c| c == 0)?;
    let row = column.iter().position(|l| counts[l.index()] > 1)?;
    Some(ImprovementStep {
        column: j,
        row,
        from: column[row],
        to: Letter::new(missing as u32),
    })
}

/// Repeats the improvement step column by column, left to right, until
/// every column is a permutation. Values are recorded when the word space
/// fits `cap`.
pub fn normalize_to_property1(f: &DecodingMatrix, cap: EnumerationCap) -> NormalizationTrace {
    let mut current = f.clone();
    let mut steps = Vec::new();
    for j in 0..f.params().len() {
        while let Some(step) = next_step(&current, j) {
            current = lemma1_step(&current, step.column, step.row, step.to)
                .expect("normalization only takes admissible steps");
            steps.push(step);
        }
    }
    debug_assert!(satisfies_property1(&current));

    let values = strategy_value_capped(f, cap).ok().map(|first| {
        let mut values = vec![first];
        let mut m = f.clone();
        for step in &steps {
            m = m.with_cell(step.row, step.column, step.to);
            values.push(strategy_value_capped(&m, cap).expect("same word space as the first"));
        }
        values
    });
    NormalizationTrace {
        initial: f.clone(),
        steps,
        final_matrix: current,
        values,
    }
}

/// A word that loses one point of approximation when `g[y1][j]` is
/// overwritten with `g[y2][j]`.
///
/// Position `j` carries `g[y1][j]`. The remaining positions, in increasing
/// order, copy `g[y1]` on the first `floor((n-1)/2)` of them and `g[y2]` on
/// the rest. For even `n` the last remaining position instead takes the
/// smallest letter different from both rows' letters there.
pub fn lemma3_witness(g: &DecodingMatrix, j: usize, y1: usize, y2: usize) -> Result<Word> {
    let params = g.params();
    let (n, d) = (params.len(), params.d());
    if n <= 2 || d < 2 || (d == 2 && n % 2 == 0) {
        return Err(Error::Domain(format!(
            "strict-loss witnesses need n > 2 and either d > 2 or odd n; got {params}"
        )));
    }
    g.check_index(y1, j)?;
    g.check_index(y2, j)?;
    if y1 == y2 {
        return Err(Error::Precondition("the two rows must differ".into()));
    }
    if !satisfies_property1(g) {
        return Err(Error::Precondition(
            "every column of the matrix must be a permutation".into(),
        ));
    }
    let others: Vec<usize> = (0..n).filter(|&p| p != j).collect();
    let head = (n - 1) / 2;
    let mut x = vec![Letter::new(0); n];
    x[j] = g.get(y1, j);
    for (i, &p) in others.iter().enumerate() {
        x[p] = if i < head { g.get(y1, p) } else { g.get(y2, p) };
    }
    if n % 2 == 0 {
        let last = *others.last().unwrap();
        let taken = [g.get(y1, last), g.get(y2, last)];
        x[last] = (0..d)
            .map(Letter::new)
            .find(|l| !taken.contains(l))
            .expect("d > 2 leaves a free letter");
    }
    Ok(Word::new(x))
}

/// For the binary alphabet with even `n > 2` and a matrix with at least two
/// constant columns: a word that no row agrees with in more than `n/2 - 1`
/// positions.
///
/// The first two constant columns `j1 < j2` get their missing letters. On the
/// remaining positions, where the two rows differ the word follows row 0 for
/// the first `n/2 - 1` such positions and row 1 afterwards; where the rows
/// agree it copies their common letter only as long as neither row would
/// exceed `n/2 - 1` agreements, and takes the other letter otherwise.
pub fn lemma5_witness(f: &DecodingMatrix) -> Result<Word> {
    let params = f.params();
    let n = params.len();
    if params.d() != 2 || n <= 2 || n % 2 == 1 {
        return Err(Error::Domain(format!(
            "needs d = 2 and even n > 2; got {params}"
        )));
    }
    let bad: Vec<usize> = (0..n)
        .filter(|&j| !is_permutation_column(&f.column(j), 2))
        .collect();
    let [j1, j2, ..] = bad[..] else {
        return Err(Error::Precondition(format!(
            "matrix has {} non-permutation column(s); at least two are needed",
            bad.len()
        )));
    };
    let flip = |l: Letter| Letter::new(1 - l.value());
    let budget = n / 2 - 1;
    let mut x = vec![Letter::new(0); n];
    x[j1] = flip(f.get(0, j1));
    x[j2] = flip(f.get(0, j2));

    let rest: Vec<usize> = (0..n).filter(|&p| p != j1 && p != j2).collect();
    let (mut agree0, mut agree1) = (0, 0);
    for &p in &rest {
        let (a, b) = (f.get(0, p), f.get(1, p));
        if a != b {
            if agree0 < budget {
                x[p] = a;
                agree0 += 1;
            } else {
                x[p] = b;
                agree1 += 1;
            }
        }
    }
    let mut spare = budget - agree0.max(agree1);
    for &p in &rest {
        let a = f.get(0, p);
        if a == f.get(1, p) {
            if spare > 0 {
                x[p] = a;
                spare -= 1;
            } else {
                x[p] = flip(a);
            }
        }
    }
    Ok(Word::new(x))
}
