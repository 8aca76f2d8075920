//! End-to-end resolution of a sentence against a registry.
//!
//! Fallback patterns are tried first, in registration order; the first one
//! matching the whole sentence wins outright. Otherwise every command is
//! type-matched, survivors are scored, and the best one is picked, with
//! extra/optional words consulted on ties or when every score is below the
//! registry threshold. Resolving never runs a handler; [`execute`] does.

use std::fmt;

use serde::Serialize;
use serde_json::Value as Json;

use crate::error::ExecuteError;
use crate::matching::{match_parameters, ArgumentBinding, MatchCandidate, MatchedBy, ValueCache};
use crate::model::{CommandSpec, Registry, TypeDescriptor};
use crate::scoring::{score_command, tie_break_adjust, Score, ScoredCandidate, WordSet};
use crate::text::{parse_number, tokenize};
use crate::value::{ArgValue, CollectionValue};

/// Most candidates listed in an ambiguous result.
pub const MAX_AMBIGUOUS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Via {
    FallbackRegex,
    Similarity,
}

/// A command together with the arguments to call it with.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedCall {
    pub command_id: String,
    pub arguments: Vec<ArgValue>,
    pub score: Score,
    pub via: Via,
}

impl ResolvedCall {
    /// `Light.setBrightness(2, 30)`
    pub fn signature(&self) -> String {
        let args: Vec<String> = self.arguments.iter().map(ToString::to_string).collect();
        format!("{}({})", self.command_id, args.join(", "))
    }
}

impl fmt::Display for ResolvedCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [score {}]", self.signature(), self.score)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResolutionResult {
    Resolved(ResolvedCall),
    /// Equally good candidates, best first.
    Ambiguous(Vec<ResolvedCall>),
    NoMatch {
        best_score: Score,
        best_command: Option<String>,
    },
}

impl ResolutionResult {
    pub fn resolved(&self) -> Option<&ResolvedCall> {
        match self {
            ResolutionResult::Resolved(call) => Some(call),
            _ => None,
        }
    }

    pub fn is_no_match(&self) -> bool {
        matches!(self, ResolutionResult::NoMatch { .. })
    }

    pub fn is_ambiguous(&self) -> bool {
        matches!(self, ResolutionResult::Ambiguous(_))
    }
}

impl fmt::Display for ResolutionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResolutionResult::Resolved(call) => write!(f, "{call}"),
            ResolutionResult::Ambiguous(calls) => {
                write!(f, "ambiguous between ")?;
                for (i, c) in calls.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", c.signature())?;
                }
                write!(f, " [score {}]", calls[0].score)
            }
            ResolutionResult::NoMatch {
                best_score,
                best_command,
            } => match best_command {
                Some(id) => write!(f, "no match (best {id} [score {best_score}])"),
                None => write!(f, "no match"),
            },
        }
    }
}

/// Result of [`resolve`] plus any warnings collected along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    pub result: ResolutionResult,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TokenTrace {
    pub raw: String,
    pub stem: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub number: Option<f64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub quoted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FallbackTrace {
    pub command: String,
    pub pattern: String,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BindingTrace {
    pub parameter: String,
    pub value: Json,
    pub tokens: Vec<usize>,
    pub matched_by: MatchedBy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommandTrace {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eliminated: Option<String>,
    pub bindings: Vec<BindingTrace>,
    pub command_words: Vec<String>,
    pub sentence_words: Vec<String>,
    pub variants: Vec<Vec<String>>,
    pub best_variant: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<Score>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjusted_score: Option<Score>,
}

/// Everything the engine looked at for one sentence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplainReport {
    pub sentence: String,
    pub threshold: f64,
    pub fallback: Vec<FallbackTrace>,
    pub similarity_consulted: bool,
    pub tokens: Vec<TokenTrace>,
    pub commands: Vec<CommandTrace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tie_break: Option<String>,
    pub outcome: String,
    pub warnings: Vec<String>,
}

impl ExplainReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn word_list(v: &[String]) -> String {
    format!("{{{}}}", v.join(", "))
}

impl fmt::Display for ExplainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sentence: {:?}", self.sentence)?;
        writeln!(f, "threshold: {}", self.threshold)?;
        for fb in &self.fallback {
            writeln!(
                f,
                "fallback {} /{}/: {}",
                fb.command,
                fb.pattern,
                if fb.matched { "matched" } else { "no match" }
            )?;
        }
        if !self.similarity_consulted {
            writeln!(f, "similarity matching: skipped")?;
        } else {
            let stems: Vec<&str> = self.tokens.iter().map(|t| t.stem.as_str()).collect();
            writeln!(f, "stems: [{}]", stems.join(", "))?;
            for c in &self.commands {
                match &c.eliminated {
                    Some(reason) => writeln!(f, "  {}: eliminated ({reason})", c.id)?,
                    None => {
                        write!(
                            f,
                            "  {}: score {}",
                            c.id,
                            c.score.map(|s| format!("{s:?}")).unwrap_or_default()
                        )?;
                        if let Some(a) = c.adjusted_score {
                            write!(f, ", adjusted {a:?}")?;
                        }
                        writeln!(f)?;
                        for b in &c.bindings {
                            writeln!(
                                f,
                                "    {} = {} via {:?} at {:?}",
                                b.parameter, b.value, b.matched_by, b.tokens
                            )?;
                        }
                        writeln!(f, "    W_M = {}", word_list(&c.command_words))?;
                        writeln!(f, "    W_S = {}", word_list(&c.sentence_words))?;
                        if c.variants.len() > 1 {
                            let v: Vec<String> = c.variants.iter().map(|v| word_list(v)).collect();
                            writeln!(f, "    variants = {}", v.join(" "))?;
                            writeln!(f, "    best variant = {}", word_list(&c.best_variant))?;
                        }
                    }
                }
            }
            if let Some(reason) = &self.tie_break {
                writeln!(f, "tie-break: {reason}")?;
            }
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        write!(f, "outcome: {}", self.outcome)
    }
}

struct Survivor<'r> {
    spec: &'r CommandSpec,
    candidate: MatchCandidate,
    scored: ScoredCandidate,
}

fn call_of(s: &Survivor<'_>, score: Score) -> ResolvedCall {
    ResolvedCall {
        command_id: s.candidate.command_id.clone(),
        arguments: s.candidate.arguments(),
        score,
        via: Via::Similarity,
    }
}

fn bindings_trace(spec: &CommandSpec, bindings: &[ArgumentBinding]) -> Vec<BindingTrace> {
    bindings
        .iter()
        .map(|b| BindingTrace {
            parameter: spec.parameters[b.parameter].ident.clone(),
            value: b.value.to_json(),
            tokens: b.consumed.iter().copied().collect(),
            matched_by: b.matched_by,
        })
        .collect()
}

fn list(set: &WordSet) -> Vec<String> {
    set.iter().cloned().collect()
}

fn pick(survivors: &[Survivor<'_>], threshold: f64) -> (ResolutionResult, Option<String>) {
    let Some(top) = survivors.iter().map(|s| s.scored.score).max() else {
        return (
            ResolutionResult::NoMatch {
                best_score: Score::ZERO,
                best_command: None,
            },
            None,
        );
    };
    let effective_winners = |indices: &[usize]| -> Vec<usize> {
        let best = indices
            .iter()
            .map(|&i| survivors[i].scored.effective())
            .max()
            .unwrap_or(Score::ZERO);
        indices
            .iter()
            .copied()
            .filter(|&i| survivors[i].scored.effective() == best)
            .collect()
    };
    let ambiguous = |winners: &[usize], score: &dyn Fn(usize) -> Score| {
        ResolutionResult::Ambiguous(
            winners
                .iter()
                .take(MAX_AMBIGUOUS)
                .map(|&i| call_of(&survivors[i], score(i)))
                .collect(),
        )
    };
    let tied: Vec<usize> = (0..survivors.len())
        .filter(|&i| survivors[i].scored.score == top)
        .collect();

    if top.reaches(threshold) {
        if tied.len() == 1 {
            return (ResolutionResult::Resolved(call_of(&survivors[tied[0]], top)), None);
        }
        let winners = effective_winners(&tied);
        let result = if winners.len() == 1 {
            ResolutionResult::Resolved(call_of(&survivors[winners[0]], top))
        } else {
            ambiguous(&winners, &|_| top)
        };
        return (result, Some(format!("{} commands tied at {top:?}", tied.len())));
    }

    let all: Vec<usize> = (0..survivors.len()).collect();
    let winners = effective_winners(&all);
    let best = survivors[winners[0]].scored.effective();
    let note = Some(format!("top score {top:?} is below the threshold"));
    if best.reaches(threshold) {
        let result = if winners.len() == 1 {
            ResolutionResult::Resolved(call_of(&survivors[winners[0]], best))
        } else {
            ambiguous(&winners, &|i| survivors[i].scored.effective())
        };
        return (result, note);
    }
    let best_score = best.max(top);
    let best_command = survivors
        .iter()
        .find(|s| s.scored.score.max(s.scored.effective()) == best_score)
        .filter(|_| best_score > Score::ZERO)
        .map(|s| s.candidate.command_id.clone());
    (
        ResolutionResult::NoMatch {
            best_score,
            best_command,
        },
        note,
    )
}

fn run(registry: &Registry, sentence: &str) -> (Resolution, ExplainReport) {
    let trimmed = sentence.trim();
    let mut report = ExplainReport {
        sentence: sentence.to_string(),
        threshold: registry.threshold(),
        fallback: Vec::new(),
        similarity_consulted: false,
        tokens: Vec::new(),
        commands: Vec::new(),
        tie_break: None,
        outcome: String::new(),
        warnings: Vec::new(),
    };

    for spec in registry.commands() {
        let Some(regex) = spec.fallback_regex() else {
            continue;
        };
        let captures = regex.captures(trimmed);
        report.fallback.push(FallbackTrace {
            command: spec.id.clone(),
            pattern: spec.fallback_pattern.clone().unwrap_or_default(),
            matched: captures.is_some(),
        });
        if let Some(captures) = captures {
            let arguments = captures
                .iter()
                .skip(1)
                .map(|m| m.map_or(ArgValue::Absent, |m| ArgValue::Text(m.as_str().to_string())))
                .collect();
            let call = ResolvedCall {
                command_id: spec.id.clone(),
                arguments,
                score: Score::ONE,
                via: Via::FallbackRegex,
            };
            report.outcome = ResolutionResult::Resolved(call.clone()).to_string();
            let resolution = Resolution {
                result: ResolutionResult::Resolved(call),
                warnings: Vec::new(),
            };
            return (resolution, report);
        }
    }

    report.similarity_consulted = true;
    let tokens = tokenize(sentence);
    report.tokens = tokens
        .iter()
        .map(|t| TokenTrace {
            raw: t.raw.clone(),
            stem: t.stem.clone(),
            number: t.numeric_value,
            quoted: t.quoted,
        })
        .collect();

    let mut cache = ValueCache::new();
    let mut warnings = Vec::new();
    let mut survivors: Vec<Survivor<'_>> = Vec::new();
    let mut trace_index: Vec<usize> = Vec::new();

    for (index, spec) in registry.commands().iter().enumerate() {
        let mut trace = CommandTrace {
            id: spec.id.clone(),
            eliminated: None,
            bindings: Vec::new(),
            command_words: spec.identifier_stems(),
            sentence_words: Vec::new(),
            variants: Vec::new(),
            best_variant: Vec::new(),
            score: None,
            adjusted_score: None,
        };
        match match_parameters(spec, &tokens, &mut cache) {
            Err(elimination) => {
                if let crate::matching::Elimination::ProviderFailure { .. } = &elimination {
                    warnings.push(format!("{}: {elimination}", spec.id));
                }
                trace.eliminated = Some(elimination.to_string());
            }
            Ok(bindings) => {
                let bound = bindings
                    .iter()
                    .filter(|b| b.matched_by != MatchedBy::Absent)
                    .map(|b| b.parameter);
                let rules = registry.applicable_synonyms(spec, bound);
                let scored = score_command(spec, &tokens, &bindings, &rules);
                for rule in &scored.variants.dropped {
                    warnings.push(format!(
                        "{}: synonym rule {:?} -> {:?} ignored, variant limit reached",
                        spec.id, rule.of, rule.is
                    ));
                }
                trace.bindings = bindings_trace(spec, &bindings);
                trace.command_words = list(&scored.command_words);
                trace.sentence_words = list(&scored.sentence_words);
                trace.variants = scored.variants.sets.iter().map(list).collect();
                trace.best_variant = list(&scored.best_variant);
                trace.score = Some(scored.score);
                trace_index.push(report.commands.len());
                survivors.push(Survivor {
                    spec,
                    candidate: MatchCandidate {
                        command: index,
                        command_id: spec.id.clone(),
                        bindings,
                    },
                    scored,
                });
            }
        }
        report.commands.push(trace);
    }

    // Extra and optional words only count on ties or when nothing reaches
    // the threshold.
    if let Some(top) = survivors.iter().map(|s| s.scored.score).max() {
        let tied = survivors.iter().filter(|s| s.scored.score == top).count();
        let below = !top.reaches(registry.threshold());
        if tied > 1 || below {
            let mut subject: Vec<(&CommandSpec, ScoredCandidate)> = survivors
                .iter()
                .filter(|s| below || s.scored.score == top)
                .map(|s| (s.spec, s.scored.clone()))
                .collect();
            tie_break_adjust(&mut subject);
            for (spec, adjusted) in subject {
                if let Some(i) = survivors.iter().position(|s| std::ptr::eq(s.spec, spec)) {
                    survivors[i].scored.adjusted_score = adjusted.adjusted_score;
                    report.commands[trace_index[i]].adjusted_score = adjusted.adjusted_score;
                }
            }
        }
    }

    let (result, tie_break) = pick(&survivors, registry.threshold());
    report.tie_break = tie_break;
    report.outcome = result.to_string();
    report.warnings = warnings.clone();
    (Resolution { result, warnings }, report)
}

/// Map a sentence to a command call, without executing anything.
pub fn resolve(registry: &Registry, sentence: &str) -> Resolution {
    run(registry, sentence).0
}

/// Trace of how [`resolve`] treats a sentence.
pub fn explain(registry: &Registry, sentence: &str) -> ExplainReport {
    run(registry, sentence).1
}

/// Turn a raw fallback capture into the parameter's type where possible.
fn coerce(spec: &CommandSpec, index: usize, value: ArgValue) -> Result<ArgValue, ExecuteError> {
    let parameter = &spec.parameters[index];
    let ArgValue::Text(text) = &value else {
        return Ok(value);
    };
    let failed = || ExecuteError::HandlerError {
        id: spec.id.clone(),
        message: format!(
            "{:?} is not a valid {} for {}",
            text,
            parameter.descriptor.kind(),
            parameter.ident
        ),
    };
    match parameter.descriptor {
        TypeDescriptor::Integer => {
            let n = parse_number(text.trim()).ok_or_else(failed)?;
            if n.fract() != 0.0 {
                return Err(failed());
            }
            Ok(ArgValue::Integer(n as i64))
        }
        TypeDescriptor::Real => parse_number(text.trim()).map(ArgValue::Real).ok_or_else(failed),
        _ => Ok(value),
    }
}

/// Invoke the handler of a resolved call once.
pub fn execute_call(registry: &Registry, call: &ResolvedCall) -> Result<Option<String>, ExecuteError> {
    let spec = registry
        .get(&call.command_id)
        .ok_or_else(|| ExecuteError::UnknownCommand(call.command_id.clone()))?;
    let mut cache = ValueCache::new();
    let mut arguments = Vec::with_capacity(call.arguments.len());
    for (index, value) in call.arguments.iter().cloned().enumerate() {
        let value = match value {
            ArgValue::Collection(CollectionValue::All) => {
                let element = match &spec.parameters[index].descriptor {
                    TypeDescriptor::CollectionOf { element, .. } => element.as_ref(),
                    other => other,
                };
                let values = cache.all_values(element).map_err(|e| ExecuteError::HandlerError {
                    id: spec.id.clone(),
                    message: format!("could not list all values: {e}"),
                })?;
                ArgValue::Collection(CollectionValue::List(values))
            }
            v if call.via == Via::FallbackRegex => coerce(spec, index, v)?,
            v => v,
        };
        arguments.push(value);
    }
    (spec.handler)(&arguments).map_err(|e| ExecuteError::HandlerError {
        id: spec.id.clone(),
        message: e.to_string(),
    })
}

/// Execute a resolution; only [`ResolutionResult::Resolved`] can run.
pub fn execute(registry: &Registry, result: &ResolutionResult) -> Result<Option<String>, ExecuteError> {
    match result {
        ResolutionResult::Resolved(call) => execute_call(registry, call),
        _ => Err(ExecuteError::NotResolved),
    }
}
