use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigUint;
use serde::Serialize;

use racopt::game::MatrixFile;
use racopt::optimality::{oracle_enumerate_with, DEFAULT_ORACLE_CAP, DEFAULT_RETAIN_LIMIT};
use racopt::rational::{to_decimal, to_fraction_string};
use racopt::value::{optimal_value_report, strategy_value_report, ValueReport};
use racopt::{
    classify, count_optimal, is_optimal, lemma3_witness, lemma5_witness, normalize_to_property1,
    optimal_value, optimal_value_table, satisfies_property1, satisfies_property2,
    DecodingMatrix, EnumerationCap, ExactRational, GameParams, Word,
};

use crate::{Cli, Command, Format, GlobalOpts, WitnessCommand};

const TABLE_BOUND: u32 = 1000;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Cap(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => 2,
            Self::Cap(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Input(m) | Self::Cap(m) => f.write_str(m),
        }
    }
}

impl From<racopt::Error> for CliError {
    fn from(e: racopt::Error) -> Self {
        match e {
            racopt::Error::CapExceeded { .. } => Self::Cap(format!("{e} (use --force or --cap)")),
            other => Self::Input(other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

impl GlobalOpts {
    fn word_cap(&self) -> EnumerationCap {
        if self.force {
            EnumerationCap::unlimited()
        } else {
            EnumerationCap::new(self.cap)
        }
    }

    fn oracle_cap(&self) -> EnumerationCap {
        if self.force {
            EnumerationCap::unlimited()
        } else {
            EnumerationCap::new(DEFAULT_ORACLE_CAP)
        }
    }

    fn exact(&self, r: &ExactRational) -> String {
        format!("{} ({})", to_fraction_string(r), to_decimal(r, self.digits))
    }
}

pub fn run(cli: &Cli) -> Result<String> {
    let g = &cli.global;
    match &cli.command {
        Command::Value { file } => {
            let f = load(file)?;
            Ok(render_report(g, &strategy_value_report(&f, g.word_cap())?))
        }
        Command::OptimalValue { n, d, table } => match table.as_deref() {
            Some(&[n_max, d_max]) => optimal_table(g, n_max, d_max),
            _ => {
                let params = params(n.unwrap(), d.unwrap())?;
                Ok(render_report(g, &optimal_value_report(params)))
            }
        },
        Command::Check { file } => check(g, &load(file)?),
        Command::Improve { file } => improve(g, &load(file)?),
        Command::Count { n, d, oracle } => count(g, params(*n, *d)?, *oracle),
        Command::Witness(w) => witness(g, w),
    }
}

fn load(path: &Path) -> Result<DecodingMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    DecodingMatrix::from_json(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn params(n: u32, d: u32) -> Result<GameParams> {
    Ok(GameParams::new(n, d)?)
}

fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Rows in the 1-based alphabet, space separated.
fn human_matrix(m: &DecodingMatrix) -> String {
    (0..m.params().alphabet())
        .map(|y| m.row_word(y).one_based())
        .collect::<Vec<_>>()
        .join(" ")
}

fn render_report(g: &GlobalOpts, report: &ValueReport) -> String {
    let wire = report.to_wire(g.digits);
    match g.format {
        Format::Text => format!("{}\n", g.exact(&report.value)),
        Format::Json => json(&wire),
        Format::Csv => format!(
            "n,d,value,decimal,method\n{},{},{},{},{}\n",
            wire.n, wire.d, wire.value, wire.decimal, wire.method
        ),
    }
}

#[derive(Serialize)]
struct TableJson {
    n_max: u32,
    d_max: u32,
    /// `values[n-1][d-1]`
    values: Vec<Vec<String>>,
}

fn optimal_table(g: &GlobalOpts, n_max: u32, d_max: u32) -> Result<String> {
    if !(1..=TABLE_BOUND).contains(&n_max) || !(1..=TABLE_BOUND).contains(&d_max) {
        return Err(CliError::Input(format!(
            "table bounds must lie in 1..={TABLE_BOUND}, got {n_max} x {d_max}"
        )));
    }
    let table = optimal_value_table(n_max, d_max)?;
    let mut out = String::new();
    match g.format {
        Format::Csv => {
            out.push_str("n\\d");
            for d in 1..=d_max {
                write!(out, ",{d}").unwrap();
            }
            out.push('\n');
            for (i, row) in table.iter().enumerate() {
                write!(out, "{}", i + 1).unwrap();
                for v in row {
                    write!(out, ",{}", to_fraction_string(v)).unwrap();
                }
                out.push('\n');
            }
        }
        Format::Json => {
            out = json(&TableJson {
                n_max,
                d_max,
                values: table
                    .iter()
                    .map(|row| row.iter().map(to_fraction_string).collect())
                    .collect(),
            });
        }
        Format::Text => {
            for (i, row) in table.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    writeln!(out, "n={} d={}: {}", i + 1, j + 1, g.exact(v)).unwrap();
                }
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct CheckJson {
    n: u32,
    d: u32,
    regime: String,
    property1: bool,
    property2: bool,
    optimal: bool,
    optimal_value: String,
    value: Option<String>,
    gap: Option<String>,
}

fn check(g: &GlobalOpts, f: &DecodingMatrix) -> Result<String> {
    let params = f.params();
    let regime = classify(params);
    let best = optimal_value(params);
    // the gap is reported only when the word space fits the cap
    let value = racopt::value::strategy_value_capped(f, g.word_cap()).ok();
    let gap = value.as_ref().map(|v| &best - v);
    let report = CheckJson {
        n: params.n(),
        d: params.d(),
        regime: regime.to_string(),
        property1: satisfies_property1(f),
        property2: satisfies_property2(f),
        optimal: is_optimal(f),
        optimal_value: to_fraction_string(&best),
        value: value.as_ref().map(to_fraction_string),
        gap: gap.as_ref().map(to_fraction_string),
    };
    Ok(match g.format {
        Format::Json => json(&report),
        Format::Csv => format!(
            "n,d,regime,property1,property2,optimal,optimal_value,value,gap\n{},{},{},{},{},{},{},{},{}\n",
            report.n,
            report.d,
            report.regime,
            report.property1,
            report.property2,
            report.optimal,
            report.optimal_value,
            report.value.as_deref().unwrap_or(""),
            report.gap.as_deref().unwrap_or(""),
        ),
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "regime: {}", report.regime).unwrap();
            writeln!(out, "property 1: {}", report.property1).unwrap();
            writeln!(out, "property 2: {}", report.property2).unwrap();
            writeln!(out, "optimal: {}", report.optimal).unwrap();
            writeln!(out, "optimal value: {}", g.exact(&best)).unwrap();
            match (&value, &gap) {
                (Some(v), Some(gap)) => {
                    writeln!(out, "value: {}", g.exact(v)).unwrap();
                    writeln!(out, "gap: {}", g.exact(gap)).unwrap();
                }
                _ => writeln!(out, "value: not computed (word space exceeds the cap)").unwrap(),
            }
            out
        }
    })
}

fn improve(g: &GlobalOpts, f: &DecodingMatrix) -> Result<String> {
    let trace = normalize_to_property1(f, g.word_cap());
    Ok(match g.format {
        Format::Json => json(&trace.to_wire()),
        Format::Csv => {
            let mut out = String::from("step,j,y,from,to,value\n");
            let value_at = |i: usize| {
                trace
                    .values
                    .as_ref()
                    .map(|v| to_fraction_string(&v[i]))
                    .unwrap_or_default()
            };
            writeln!(out, "0,,,,,{}", value_at(0)).unwrap();
            for (i, s) in trace.steps.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    i + 1,
                    s.column,
                    s.row,
                    s.from,
                    s.to,
                    value_at(i + 1)
                )
                .unwrap();
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "initial: {}", human_matrix(&trace.initial)).unwrap();
            for (i, s) in trace.steps.iter().enumerate() {
                writeln!(
                    out,
                    "step {}: row {}, column {}: {} -> {}",
                    i + 1,
                    s.row + 1,
                    s.column + 1,
                    s.from.one_based(),
                    s.to.one_based()
                )
                .unwrap();
            }
            writeln!(out, "final: {}", human_matrix(&trace.final_matrix)).unwrap();
            match &trace.values {
                Some(values) => {
                    let rendered: Vec<_> = values.iter().map(to_fraction_string).collect();
                    writeln!(out, "values: {}", rendered.join(" -> ")).unwrap();
                    writeln!(out, "final value: {}", g.exact(values.last().unwrap())).unwrap();
                }
                None => writeln!(out, "values: not computed (word space exceeds the cap)").unwrap(),
            }
            out
        }
    })
}

#[derive(Serialize)]
struct CountJson {
    n: u32,
    d: u32,
    regime: String,
    count: Option<String>,
    basis: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_count: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_max_value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<String>,
}

fn count(g: &GlobalOpts, params: GameParams, with_oracle: bool) -> Result<String> {
    let counted = count_optimal(params);
    let oracle = if with_oracle {
        Some(oracle_enumerate_with(params, g.oracle_cap(), DEFAULT_RETAIN_LIMIT)?)
    } else {
        None
    };
    let verdict = oracle.as_ref().map(|o| match &counted.count {
        Some(c) if *c == o.optimizer_count => "AGREE",
        Some(_) => "DISAGREE",
        None => "NO-FORMULA",
    });
    let report = CountJson {
        n: params.n(),
        d: params.d(),
        regime: classify(params).to_string(),
        count: counted.count.as_ref().map(BigUint::to_string),
        basis: format!("{:?}", counted.basis),
        oracle_count: oracle.as_ref().map(|o| o.optimizer_count.to_string()),
        oracle_max_value: oracle.as_ref().map(|o| to_fraction_string(&o.max_value)),
        verdict: verdict.map(str::to_string),
    };
    Ok(match g.format {
        Format::Json => json(&report),
        Format::Csv => format!(
            "n,d,regime,count,basis,oracle_count,oracle_max_value,verdict\n{},{},{},{},{},{},{},{}\n",
            report.n,
            report.d,
            report.regime,
            report.count.as_deref().unwrap_or(""),
            report.basis,
            report.oracle_count.as_deref().unwrap_or(""),
            report.oracle_max_value.as_deref().unwrap_or(""),
            report.verdict.as_deref().unwrap_or(""),
        ),
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "regime: {}", report.regime).unwrap();
            match &report.count {
                Some(c) => writeln!(out, "count: {c} ({})", report.basis).unwrap(),
                None => writeln!(out, "count: no closed form for this game").unwrap(),
            }
            if let Some(o) = &oracle {
                writeln!(out, "oracle count: {}", o.optimizer_count).unwrap();
                writeln!(out, "oracle max value: {}", g.exact(&o.max_value)).unwrap();
                writeln!(out, "verdict: {}", verdict.unwrap()).unwrap();
            }
            out
        }
    })
}

#[derive(Serialize)]
struct WitnessJson {
    kind: &'static str,
    matrix: MatrixFile,
    word: Vec<u32>,
    best_agreement: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    best_agreement_after_merge: Option<usize>,
}

fn best_agreement(f: &DecodingMatrix, x: &Word) -> usize {
    f.rows()
        .map(|r| racopt::game::agreement(r, x.letters()))
        .max()
        .unwrap_or(0)
}

fn witness(g: &GlobalOpts, cmd: &WitnessCommand) -> Result<String> {
    let (kind, f, x, after) = match cmd {
        WitnessCommand::Merge {
            file,
            column,
            row,
            other_row,
        } => {
            let f = load(file)?;
            let x = lemma3_witness(&f, *column, *row, *other_row)?;
            let merged = f.with_cell(*row, *column, f.get(*other_row, *column));
            let after = best_agreement(&merged, &x);
            ("merge", f, x, Some(after))
        }
        WitnessCommand::Binary { file } => {
            let f = load(file)?;
            let x = lemma5_witness(&f)?;
            ("binary", f, x, None)
        }
    };
    let report = WitnessJson {
        kind,
        matrix: f.clone().into(),
        word: x.letters().iter().map(|l| l.value()).collect(),
        best_agreement: best_agreement(&f, &x),
        best_agreement_after_merge: after,
    };
    Ok(match g.format {
        Format::Json => json(&report),
        Format::Csv => format!(
            "kind,word,best_agreement,best_agreement_after_merge\n{},{},{},{}\n",
            kind,
            report
                .word
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(" "),
            report.best_agreement,
            after.map(|a| a.to_string()).unwrap_or_default()
        ),
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "witness: {}", x.one_based()).unwrap();
            writeln!(out, "best agreement: {}", report.best_agreement).unwrap();
            if let Some(a) = after {
                writeln!(out, "best agreement after merge: {a}").unwrap();
            }
            out
        }
    })
}
