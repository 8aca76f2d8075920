//! Golden-corpus evaluation: one JSON object per line, each pairing a
//! sentence with the call (or outcome) it must resolve to.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use speakable::matching::ValueCache;
use speakable::{resolve, ArgValue, CollectionValue, Registry, ResolutionResult, TypeDescriptor};

/// Numeric tolerance when comparing arguments.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Expected {
    Call { command: String, args: Vec<Json> },
    Outcome(Outcome),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    NoMatch,
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub sentence: String,
    pub expected: Expected,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Parse JSON Lines; blank lines are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<(usize, CorpusEntry)>, CorpusError> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: CorpusEntry = serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        entries.push((i + 1, entry));
    }
    Ok(entries)
}

pub fn load_corpus(path: &Path) -> Result<Vec<(usize, CorpusEntry)>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_corpus(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub line: usize,
    pub sentence: String,
    pub expected: Expected,
    pub actual: String,
    pub score: String,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub entries: Vec<Verdict>,
}

impl Report {
    pub fn is_perfect(&self) -> bool {
        self.correct == self.total
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_perfect() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self, show_scores: bool) -> String {
        let width = self.entries.iter().map(|v| v.sentence.len()).max().unwrap_or(8).max(8);
        let mut out = String::new();
        for v in &self.entries {
            let mark = if v.correct { "ok  " } else { "FAIL" };
            let _ = write!(out, "{mark} {:>4}  {:<width$}  {}", v.line, v.sentence, v.actual);
            if show_scores {
                let _ = write!(out, "  [score {}]", v.score);
            }
            if !v.correct {
                let _ = write!(out, "  (expected {})", describe_expected(&v.expected));
            }
            out.push('\n');
        }
        let _ = writeln!(out, "accuracy: {}/{} = {:.3}", self.correct, self.total, self.accuracy);
        out
    }
}

fn describe_expected(expected: &Expected) -> String {
    match expected {
        Expected::Call { command, args } => {
            let args: Vec<String> = args.iter().map(Json::to_string).collect();
            format!("{command}({})", args.join(", "))
        }
        Expected::Outcome(Outcome::NoMatch) => "no_match".into(),
        Expected::Outcome(Outcome::Ambiguous) => "ambiguous".into(),
    }
}

fn json_order(a: &Json, b: &Json) -> Ordering {
    match (a, b) {
        (Json::Number(x), Json::Number(y)) => x
            .as_f64()
            .unwrap_or(f64::NAN)
            .total_cmp(&y.as_f64().unwrap_or(f64::NAN)),
        (Json::Number(_), _) => Ordering::Less,
        (_, Json::Number(_)) => Ordering::Greater,
        _ => a.to_string().cmp(&b.to_string()),
    }
}

fn json_equal(a: &Json, b: &Json) -> bool {
    match (a, b) {
        (Json::Number(x), Json::Number(y)) => match (x.as_f64(), y.as_f64()) {
            (Some(x), Some(y)) => (x - y).abs() <= TOLERANCE,
            _ => false,
        },
        (Json::Array(x), Json::Array(y)) => {
            let mut x = x.clone();
            let mut y = y.clone();
            x.sort_by(json_order);
            y.sort_by(json_order);
            x.len() == y.len() && x.iter().zip(&y).all(|(a, b)| json_equal(a, b))
        }
        _ => a == b,
    }
}

/// Comparable JSON form of an argument: ranges and "all" are expanded.
fn materialize(value: &ArgValue, descriptor: &TypeDescriptor, cache: &mut ValueCache) -> Json {
    match value {
        ArgValue::Collection(CollectionValue::All) => {
            let element = match descriptor {
                TypeDescriptor::CollectionOf { element, .. } => element.as_ref(),
                other => other,
            };
            let values = cache.all_values(element).unwrap_or_default();
            Json::Array(values.iter().map(ArgValue::to_json).collect())
        }
        other => other.to_json(),
    }
}

fn check(registry: &Registry, result: &ResolutionResult, expected: &Expected) -> bool {
    match (expected, result) {
        (Expected::Outcome(Outcome::NoMatch), ResolutionResult::NoMatch { .. }) => true,
        (Expected::Outcome(Outcome::Ambiguous), ResolutionResult::Ambiguous(_)) => true,
        (Expected::Call { command, args }, ResolutionResult::Resolved(call)) => {
            let Some(spec) = registry.get(&call.command_id) else {
                return false;
            };
            if *command != call.command_id || args.len() != call.arguments.len() {
                return false;
            }
            let mut cache = ValueCache::new();
            call.arguments
                .iter()
                .zip(&spec.parameters)
                .zip(args)
                .all(|((actual, parameter), want)| {
                    json_equal(&materialize(actual, &parameter.descriptor, &mut cache), want)
                })
        }
        _ => false,
    }
}

fn describe_actual(result: &ResolutionResult) -> String {
    match result {
        ResolutionResult::Resolved(call) => call.signature(),
        ResolutionResult::Ambiguous(calls) => {
            let options: Vec<String> = calls.iter().map(|c| c.signature()).collect();
            format!("ambiguous: {}", options.join(" | "))
        }
        ResolutionResult::NoMatch { .. } => "no_match".into(),
    }
}

fn result_score(result: &ResolutionResult) -> String {
    match result {
        ResolutionResult::Resolved(call) => call.score.to_string(),
        ResolutionResult::Ambiguous(calls) => calls.first().map(|c| c.score.to_string()).unwrap_or_default(),
        ResolutionResult::NoMatch { best_score, .. } => best_score.to_string(),
    }
}

/// Resolve every entry and compare with its expectation.
pub fn evaluate(registry: &Registry, entries: &[(usize, CorpusEntry)]) -> Report {
    let verdicts: Vec<Verdict> = entries
        .iter()
        .map(|(line, entry)| {
            let result = resolve(registry, &entry.sentence).result;
            Verdict {
                line: *line,
                sentence: entry.sentence.clone(),
                expected: entry.expected.clone(),
                actual: describe_actual(&result),
                score: result_score(&result),
                correct: check(registry, &result, &entry.expected),
            }
        })
        .collect();
    let correct = verdicts.iter().filter(|v| v.correct).count();
    let total = verdicts.len();
    Report {
        total,
        correct,
        accuracy: if total == 0 { 1.0 } else { correct as f64 / total as f64 },
        entries: verdicts,
    }
}
