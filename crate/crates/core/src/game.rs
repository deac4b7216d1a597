//! Game parameters, words, decoding matrices and the canonical strategies.
//!
//! Letters are 0-based throughout the library. A decoding matrix stores Bob's
//! answer `f(y, j)` for every message `y` and question index `j`; Alice's side
//! is either an explicit table or the best response to the matrix.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Pow, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::ExactRational;

/// Default limit on the number of words a single enumeration may visit.
pub const DEFAULT_WORD_CAP: u64 = 100_000_000;

/// Upper bound on how many items an exhaustive scan may visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EnumerationCap(Option<u64>);

impl EnumerationCap {
    pub const fn new(limit: u64) -> Self {
        Self(Some(limit))
    }

    pub const fn unlimited() -> Self {
        Self(None)
    }

    pub fn limit(&self) -> Option<u64> {
        self.0
    }

    /// Returns `size` as a machine integer if it is within the cap.
    pub(crate) fn admit(&self, what: &'static str, size: &BigUint) -> Result<u64> {
        let refuse = |cap| Error::CapExceeded {
            what,
            size: size.clone(),
            cap,
        };
        match self.0 {
            Some(cap) if *size > BigUint::from(cap) => Err(refuse(cap)),
            _ => size.to_u64().ok_or_else(|| refuse(u64::MAX)),
        }
    }
}

impl Default for EnumerationCap {
    fn default() -> Self {
        Self::new(DEFAULT_WORD_CAP)
    }
}

/// The pair `(n, d)`: word length and alphabet size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GameParams {
    n: u32,
    d: u32,
}

impl GameParams {
    pub fn new(n: u32, d: u32) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidParams {
                n: n.into(),
                d: d.into(),
            });
        }
        Ok(Self { n, d })
    }

    /// Word length.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Alphabet size.
    pub fn d(&self) -> u32 {
        self.d
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn alphabet(&self) -> usize {
        self.d as usize
    }

    /// `d^n`
    pub fn word_space_size(&self) -> BigUint {
        Pow::pow(BigUint::from(self.d), self.n)
    }

    /// `d^(d*n)`, the number of decoding matrices.
    pub fn matrix_space_size(&self) -> BigUint {
        Pow::pow(BigUint::from(self.d), u64::from(self.d) * u64::from(self.n))
    }

    /// `d = 1` or `n = 1`.
    pub fn is_degenerate(&self) -> bool {
        self.n == 1 || self.d == 1
    }
}

impl fmt::Display for GameParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, d={})", self.n, self.d)
    }
}

/// A letter of the alphabet `{0, ..., d-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Letter(u32);

impl Letter {
    pub const fn new(value: u32) -> Self {
        Self(value)
    }

    pub fn checked(value: i64, d: u32) -> Result<Self> {
        if value < 0 || value >= i64::from(d) {
            return Err(Error::LetterOutOfRange { value, d });
        }
        Ok(Self(value as u32))
    }

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// The letter as written in the `{1, ..., d}` alphabet.
    pub fn one_based(self) -> u32 {
        self.0 + 1
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A string of letters; Alice's input or one row of a decoding matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Self { letters }
    }

    /// Builds a word and checks it against `params`.
    pub fn for_game(params: GameParams, values: &[u32]) -> Result<Self> {
        if values.len() != params.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: params.len(),
            });
        }
        let letters = values
            .iter()
            .map(|&v| Letter::checked(v.into(), params.d()))
            .collect::<Result<_>>()?;
        Ok(Self { letters })
    }

    /// Parses a compact digit string such as `"0120"`.
    pub fn from_digits(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(Letter)
                    .ok_or_else(|| Error::MalformedMatrix(format!("not a digit: {c:?}")))
            })
            .collect::<Result<_>>()
            .map(Self::new)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_valid_for(&self, params: GameParams) -> bool {
        self.len() == params.len() && self.letters.iter().all(|l| l.0 < params.d())
    }

    /// Position of this word in the lexicographic enumeration of the word space.
    pub fn index_in(&self, params: GameParams) -> u64 {
        self.letters
            .iter()
            .fold(0u64, |acc, l| acc * u64::from(params.d()) + u64::from(l.0))
    }

    /// Renders the word in the `{1, ..., d}` alphabet.
    pub fn one_based(&self) -> String {
        join_letters(self.letters.iter().map(|l| l.one_based()))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join_letters(self.letters.iter().map(|l| l.0)))
    }
}

/// Digits are concatenated when every letter is a single digit, otherwise
/// comma-separated.
pub(crate) fn join_letters(values: impl Iterator<Item = u32> + Clone) -> String {
    if values.clone().all(|v| v < 10) {
        values.map(|v| char::from_digit(v, 10).unwrap()).collect()
    } else {
        values.map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Number of positions in which two equal-length strings agree.
pub fn agreement(a: &[Letter], b: &[Letter]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x == y).count()
}

/// `Sim(z, x)`: the number of positions in which `z` and `x` agree.
pub fn sim(z: &Word, x: &Word) -> Result<usize> {
    if z.len() != x.len() {
        return Err(Error::LengthMismatch {
            left: z.len(),
            right: x.len(),
        });
    }
    Ok(agreement(&z.letters, &x.letters))
}

/// Bob's decoding table: row `y` is the string he answers from after
/// receiving message `y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "MatrixFile", into = "MatrixFile")]
pub struct DecodingMatrix {
    params: GameParams,
    // row-major, d rows of n letters
    cells: Vec<Letter>,
}

impl DecodingMatrix {
    /// Builds a matrix from `d` rows of `n` 0-based letters.
    pub fn new(params: GameParams, rows: &[Vec<u32>]) -> Result<Self> {
        let rows: Vec<Vec<i64>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| i64::from(v)).collect())
            .collect();
        Self::from_raw(params, &rows)
    }

    fn from_raw(params: GameParams, rows: &[Vec<i64>]) -> Result<Self> {
        if rows.len() != params.alphabet() {
            return Err(Error::MalformedMatrix(format!(
                "expected {} rows, found {}",
                params.d(),
                rows.len()
            )));
        }
        let mut cells = Vec::with_capacity(params.alphabet() * params.len());
        for (y, row) in rows.iter().enumerate() {
            if row.len() != params.len() {
                return Err(Error::MalformedMatrix(format!(
                    "row {y} has {} entries, expected {}",
                    row.len(),
                    params.n()
                )));
            }
            for &v in row {
                cells.push(Letter::checked(v, params.d())?);
            }
        }
        Ok(Self { params, cells })
    }

    /// Builds a matrix from compact digit rows, e.g. `["012", "120", "201"]`.
    /// `d` is the number of rows and `n` the row length.
    pub fn from_digit_rows(rows: &[&str]) -> Result<Self> {
        let n = rows.first().map_or(0, |r| r.chars().count());
        let params = GameParams::new(n as u32, rows.len() as u32)?;
        let parsed = rows
            .iter()
            .map(|r| {
                Word::from_digits(r).map(|w| w.letters.iter().map(|l| i64::from(l.0)).collect())
            })
            .collect::<Result<Vec<Vec<i64>>>>()?;
        Self::from_raw(params, &parsed)
    }

    pub(crate) fn from_cells(params: GameParams, cells: Vec<Letter>) -> Self {
        debug_assert_eq!(cells.len(), params.alphabet() * params.len());
        Self { params, cells }
    }

    pub fn params(&self) -> GameParams {
        self.params
    }

    pub fn row(&self, y: usize) -> &[Letter] {
        let n = self.params.len();
        &self.cells[y * n..(y + 1) * n]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[Letter]> + '_ {
        self.cells.chunks_exact(self.params.len())
    }

    pub fn row_word(&self, y: usize) -> Word {
        Word::new(self.row(y).to_vec())
    }

    pub fn get(&self, y: usize, j: usize) -> Letter {
        self.cells[y * self.params.len() + j]
    }

    pub fn column(&self, j: usize) -> Vec<Letter> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Copy of the matrix with cell `(y, j)` replaced.
    pub fn with_cell(&self, y: usize, j: usize, letter: Letter) -> Self {
        let mut out = self.clone();
        out.cells[y * self.params.len() + j] = letter;
        out
    }

    pub(crate) fn cells(&self) -> &[Letter] {
        &self.cells
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.rows().map(|r| r.iter().map(|l| l.0).collect()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::MalformedMatrix(e.to_string()))
    }

    pub fn check_index(&self, y: usize, j: usize) -> Result<()> {
        if y >= self.params.alphabet() || j >= self.params.len() {
            return Err(Error::IndexOutOfRange(format!(
                "cell ({y}, {j}) outside a {}x{} matrix",
                self.params.d(),
                self.params.n()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for DecodingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .map(|r| join_letters(r.iter().map(|l| l.0)))
            .collect();
        f.write_str(&rows.join(" "))
    }
}

/// On-disk form: `{"n": .., "d": .., "rows": [[..], ..]}` with 0-based letters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub n: u32,
    pub d: u32,
    pub rows: Vec<Vec<i64>>,
}

impl TryFrom<MatrixFile> for DecodingMatrix {
    type Error = Error;

    fn try_from(file: MatrixFile) -> Result<Self> {
        let params = GameParams::new(file.n, file.d)?;
        Self::from_raw(params, &file.rows)
    }
}

impl From<DecodingMatrix> for MatrixFile {
    fn from(m: DecodingMatrix) -> Self {
        Self {
            n: m.params.n(),
            d: m.params.d(),
            rows: m
                .rows()
                .map(|r| r.iter().map(|l| i64::from(l.0)).collect())
                .collect(),
        }
    }
}

/// Which row wins when several rows approximate a word equally well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    Lowest,
    Highest,
}

/// Alice's best response: the lowest-index row maximizing `Sim(f_y, x)`.
pub fn best_response_encode(f: &DecodingMatrix, x: &Word) -> Result<Letter> {
    best_response_encode_with(f, x, TieBreak::Lowest)
}

pub fn best_response_encode_with(f: &DecodingMatrix, x: &Word, tie: TieBreak) -> Result<Letter> {
    if !x.is_valid_for(f.params()) {
        return Err(Error::Precondition(format!(
            "word {x} is not a word of the game {}",
            f.params()
        )));
    }
    Ok(Letter(best_row(f, x.letters(), tie) as u32))
}

pub(crate) fn best_row(f: &DecodingMatrix, x: &[Letter], tie: TieBreak) -> usize {
    let mut best = 0;
    let mut best_sim = None;
    for (y, row) in f.rows().enumerate() {
        let s = agreement(row, x);
        let better = match (best_sim, tie) {
            (None, _) => true,
            (Some(b), TieBreak::Lowest) => s > b,
            (Some(b), TieBreak::Highest) => s >= b,
        };
        if better {
            best = y;
            best_sim = Some(s);
        }
    }
    best
}

/// Identity decoding: Bob answers every question with the letter received.
/// Paired with the best response, Alice sends her word's most frequent letter.
pub fn majority_strategy(params: GameParams) -> DecodingMatrix {
    let cells = (0..params.d())
        .flat_map(|y| std::iter::repeat_n(Letter(y), params.len()))
        .collect();
    DecodingMatrix::from_cells(params, cells)
}

/// A bijection on `{0, ..., d-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LetterPermutation {
    images: Vec<Letter>,
}

impl LetterPermutation {
    pub fn new(images: &[u32]) -> Result<Self> {
        let d = images.len();
        let mut seen = vec![false; d];
        for &v in images {
            let v = v as usize;
            if v >= d || std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a bijection on {d} letters"
                )));
            }
        }
        Ok(Self {
            images: images.iter().map(|&v| Letter(v)).collect(),
        })
    }

    pub fn identity(d: u32) -> Self {
        Self {
            images: (0..d).map(Letter).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, letter: Letter) -> Letter {
        self.images[letter.index()]
    }

    /// `self ∘ inner`: first `inner`, then `self`.
    pub fn compose(&self, inner: &Self) -> Self {
        Self {
            images: inner.images.iter().map(|&l| self.apply(l)).collect(),
        }
    }

    pub fn images(&self) -> &[Letter] {
        &self.images
    }
}

/// All `d!` permutations of `d` letters in lexicographic order of their images.
pub fn all_permutations(d: u32) -> Vec<LetterPermutation> {
    let mut current: Vec<u32> = (0..d).collect();
    let mut out = Vec::new();
    loop {
        out.push(LetterPermutation {
            images: current.iter().map(|&v| Letter(v)).collect(),
        });
        // next lexicographic permutation
        let Some(i) = (1..current.len()).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..current.len())
            .rev()
            .find(|&j| current[j] > current[i - 1])
            .unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
    }
}

/// Relabels column `j` of `g` through `perms[j]`.
pub fn apply_column_permutations(
    g: &DecodingMatrix,
    perms: &[LetterPermutation],
) -> Result<DecodingMatrix> {
    let params = g.params();
    if perms.len() != params.len() {
        return Err(Error::InvalidPermutation(format!(
            "expected {} permutations, found {}",
            params.n(),
            perms.len()
        )));
    }
    if let Some(p) = perms.iter().find(|p| p.size() != params.alphabet()) {
        return Err(Error::InvalidPermutation(format!(
            "permutation of {} letters used in a game with d={}",
            p.size(),
            params.d()
        )));
    }
    let n = params.len();
    let cells = g
        .cells()
        .iter()
        .enumerate()
        .map(|(i, &l)| perms[i % n].apply(l))
        .collect();
    Ok(DecodingMatrix::from_cells(params, cells))
}

/// Lexicographic stream over a contiguous range of the word space.
#[derive(Debug, Clone)]
pub struct Words {
    params: GameParams,
    next: u64,
    end: u64,
    current: Vec<Letter>,
}

impl Words {
    /// Words with lexicographic indices in `start..end`.
    pub fn range(params: GameParams, start: u64, end: u64) -> Self {
        Self {
            params,
            next: start,
            end,
            current: word_at(params, start).letters,
        }
    }
}

impl Iterator for Words {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.next >= self.end {
            return None;
        }
        let out = Word::new(self.current.clone());
        self.next += 1;
        if self.next < self.end {
            advance(&mut self.current, self.params.d());
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Words {}

/// Steps a lexicographic odometer; returns the lowest position that changed.
pub(crate) fn advance(letters: &mut [Letter], d: u32) -> usize {
    for p in (0..letters.len()).rev() {
        if letters[p].0 + 1 < d {
            letters[p].0 += 1;
            return p;
        }
        letters[p].0 = 0;
    }
    0
}

/// The word with lexicographic index `index` (letter 0 smallest).
pub fn word_at(params: GameParams, mut index: u64) -> Word {
    let d = u64::from(params.d());
    let mut letters = vec![Letter(0); params.len()];
    for slot in letters.iter_mut().rev() {
        if index == 0 {
            break;
        }
        *slot = Letter((index % d) as u32);
        index /= d;
    }
    Word::new(letters)
}

/// All `d^n` words in lexicographic order, refusing word spaces above `cap`.
pub fn iterate_words(params: GameParams, cap: EnumerationCap) -> Result<Words> {
    let count = cap.admit("word space", &params.word_space_size())?;
    Ok(Words::range(params, 0, count))
}

/// Lexicographic stream of decoding matrices in row-major order.
#[derive(Debug, Clone)]
pub struct Matrices {
    params: GameParams,
    next: u64,
    end: u64,
    current: Vec<Letter>,
}

impl Matrices {
    pub fn range(params: GameParams, start: u64, end: u64) -> Self {
        Self {
            params,
            next: start,
            end,
            current: matrix_at(params, start).cells,
        }
    }
}

impl Iterator for Matrices {
    type Item = DecodingMatrix;

    fn next(&mut self) -> Option<DecodingMatrix> {
        if self.next >= self.end {
            return None;
        }
        let out = DecodingMatrix::from_cells(self.params, self.current.clone());
        self.next += 1;
        if self.next < self.end {
            advance(&mut self.current, self.params.d());
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Matrices {}

/// The matrix with row-major lexicographic index `index`.
pub fn matrix_at(params: GameParams, mut index: u64) -> DecodingMatrix {
    let d = u64::from(params.d());
    let mut cells = vec![Letter(0); params.alphabet() * params.len()];
    for slot in cells.iter_mut().rev() {
        if index == 0 {
            break;
        }
        *slot = Letter((index % d) as u32);
        index /= d;
    }
    DecodingMatrix::from_cells(params, cells)
}

/// All `d^(d*n)` decoding matrices, refusing spaces above `cap`.
pub fn iterate_matrices(params: GameParams, cap: EnumerationCap) -> Result<Matrices> {
    let count = cap.admit("matrix space", &params.matrix_space_size())?;
    Ok(Matrices::range(params, 0, count))
}

/// Alice's encoding: an explicit total table or the best response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EncodingFunction {
    BestResponse,
    Explicit(ExplicitEncoding),
}

/// A total map from words to letters, indexed by lexicographic word index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitEncoding {
    params: GameParams,
    table: Vec<Letter>,
}

impl ExplicitEncoding {
    pub fn new(params: GameParams, table: Vec<Letter>) -> Result<Self> {
        let expected = params.word_space_size();
        if BigUint::from(table.len()) != expected {
            return Err(Error::InvalidEncoding(format!(
                "table covers {} words, the word space has {expected}",
                table.len()
            )));
        }
        if let Some(l) = table.iter().find(|l| l.0 >= params.d()) {
            return Err(Error::LetterOutOfRange {
                value: l.0.into(),
                d: params.d(),
            });
        }
        Ok(Self { params, table })
    }

    /// Tabulates `encode` over every word.
    pub fn from_fn(
        params: GameParams,
        cap: EnumerationCap,
        mut encode: impl FnMut(&Word) -> Letter,
    ) -> Result<Self> {
        let table = iterate_words(params, cap)?.map(|w| encode(&w)).collect();
        Self::new(params, table)
    }

    pub fn params(&self) -> GameParams {
        self.params
    }

    pub fn encode(&self, x: &Word) -> Letter {
        self.table[x.index_in(self.params) as usize]
    }

    pub(crate) fn encode_index(&self, index: u64) -> Letter {
        self.table[index as usize]
    }
}

/// A probability distribution over decoding matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedStrategy {
    components: Vec<(ExactRational, DecodingMatrix)>,
}

impl RandomizedStrategy {
    pub fn new(components: Vec<(ExactRational, DecodingMatrix)>) -> Result<Self> {
        use num_traits::Zero;
        let Some((_, first)) = components.first() else {
            return Err(Error::InvalidRandomized("no components".into()));
        };
        let params = first.params();
        let mut total = ExactRational::zero();
        for (w, m) in &components {
            if *w <= ExactRational::zero() {
                return Err(Error::InvalidRandomized(format!("non-positive weight {w}")));
            }
            if m.params() != params {
                return Err(Error::InvalidRandomized(format!(
                    "mixed games {} and {}",
                    params,
                    m.params()
                )));
            }
            total += w;
        }
        if !total.is_one() {
            return Err(Error::InvalidRandomized(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Self { components })
    }

    pub fn params(&self) -> GameParams {
        self.components[0].1.params()
    }

    pub fn components(&self) -> &[(ExactRational, DecodingMatrix)] {
        &self.components
    }
}
