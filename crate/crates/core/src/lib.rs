//! Classical random access codes over a `d`-letter alphabet.
//!
//! Alice receives a uniformly random word of `n` letters and sends one
//! letter; Bob, asked for a uniformly random position, answers from a fixed
//! decoding matrix. This crate evaluates such strategies exactly, improves
//! any strategy to an optimal one, certifies optimality, and computes the
//! optimal success probability for every `(n, d)`.

pub mod error;
pub mod game;
pub mod improve;
pub mod optimality;
pub mod rational;
pub mod value;

pub use error::{Error, Result, StepCondition};
pub use game::{
    apply_column_permutations, best_response_encode, iterate_words, majority_strategy, sim,
    DecodingMatrix, EncodingFunction, EnumerationCap, ExplicitEncoding, GameParams, Letter,
    LetterPermutation, RandomizedStrategy, Word,
};
pub use improve::{
    lemma1_step, lemma3_witness, lemma5_witness, normalize_to_property1, ImprovementStep,
    NormalizationTrace,
};
pub use optimality::{
    classify, count_optimal, is_optimal, oracle_enumerate, satisfies_property1,
    satisfies_property2, OptimalityClass, OracleResult,
};
pub use rational::ExactRational;
pub use value::{
    lemma4_value, lemma5_value, optimal_value, optimal_value_table, pair_value, randomized_value,
    strategy_value, ValueMethod, ValueReport,
};
