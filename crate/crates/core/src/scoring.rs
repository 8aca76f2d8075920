//! Jaccard similarity between a command's name words and the words of a
//! sentence that were not used as argument values.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::matching::ArgumentBinding;
use crate::model::{CommandSpec, SynonymRule};
use crate::text::{stem, TokenSequence};

/// Set of stems; ordered so reports are reproducible.
pub type WordSet = BTreeSet<String>;

/// Upper bound on the number of synonym variants of one command name.
pub const MAX_VARIANTS: usize = 256;

/// Exact similarity score in `[0, 1]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Score(Ratio<u64>);

impl Score {
    pub const ZERO: Score = Score(Ratio::new_raw(0, 1));
    pub const ONE: Score = Score(Ratio::new_raw(1, 1));

    /// `numerator / denominator`, with `0 / 0` defined as zero.
    pub fn new(numerator: u64, denominator: u64) -> Self {
        if denominator == 0 {
            Score::ZERO
        } else {
            Score(Ratio::new(numerator, denominator))
        }
    }

    pub fn numerator(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denominator(&self) -> u64 {
        *self.0.denom()
    }

    pub fn to_f64(self) -> f64 {
        self.numerator() as f64 / self.denominator() as f64
    }

    /// Whether the score reaches a floating-point threshold.
    pub fn reaches(self, threshold: f64) -> bool {
        self.to_f64() >= threshold
    }
}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}", self.to_f64())
    }
}

impl fmt::Debug for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator(), self.denominator())
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format!("{}/{}", self.numerator(), self.denominator()))
    }
}

/// `|a ∩ b| / |a ∪ b|`; two empty sets score zero.
pub fn jaccard(a: &WordSet, b: &WordSet) -> Score {
    let common = a.intersection(b).count();
    let union = a.len() + b.len() - common;
    Score::new(common as u64, union as u64)
}

/// Stems of the command name, and stems of the sentence minus every token
/// consumed by an argument.
pub fn build_word_sets(spec: &CommandSpec, tokens: &TokenSequence, bindings: &[ArgumentBinding]) -> (WordSet, WordSet) {
    let command: WordSet = spec.identifier_stems().into_iter().collect();
    let consumed: BTreeSet<usize> = bindings.iter().flat_map(|b| b.consumed.iter().copied()).collect();
    let sentence: WordSet = tokens
        .iter()
        .enumerate()
        .filter(|(i, _)| !consumed.contains(i))
        .map(|(_, t)| t.stem.clone())
        .collect();
    (command, sentence)
}

/// Alternative forms of a command's word set under synonym substitution.
#[derive(Debug, Clone, PartialEq)]
pub struct Variants {
    /// Distinct variants; the unmodified set comes first.
    pub sets: Vec<WordSet>,
    /// Rules left out to respect [`MAX_VARIANTS`].
    pub dropped: Vec<SynonymRule>,
}

/// Every combination of keeping each word or replacing it by one of its
/// synonyms. Rules are admitted in order while the combination count stays
/// within [`MAX_VARIANTS`]; a rule that would exceed it is dropped whole.
pub fn synonym_variants(command_words: &WordSet, rules: &[&SynonymRule]) -> Variants {
    let words: Vec<&String> = command_words.iter().collect();
    let mut choices: Vec<Vec<String>> = words.iter().map(|w| vec![(*w).clone()]).collect();
    let mut dropped = Vec::new();
    let mut total: usize = 1;

    for rule in rules {
        let of = stem(&rule.of);
        let Some(slot) = words.iter().position(|w| **w == of) else {
            continue;
        };
        let fresh: Vec<String> = rule
            .is
            .iter()
            .map(|w| stem(w))
            .filter(|s| !choices[slot].contains(s))
            .fold(Vec::new(), |mut acc, s| {
                if !acc.contains(&s) {
                    acc.push(s);
                }
                acc
            });
        if fresh.is_empty() {
            continue;
        }
        let current = choices[slot].len();
        let grown = total / current * (current + fresh.len());
        if grown > MAX_VARIANTS {
            dropped.push((*rule).clone());
            continue;
        }
        total = grown;
        choices[slot].extend(fresh);
    }

    let mut sets: Vec<WordSet> = Vec::with_capacity(total);
    let mut picks = vec![0usize; choices.len()];
    loop {
        let set: WordSet = picks.iter().enumerate().map(|(i, &p)| choices[i][p].clone()).collect();
        if !sets.contains(&set) {
            sets.push(set);
        }
        // Odometer increment, last word fastest.
        let mut i = picks.len();
        loop {
            if i == 0 {
                return Variants { sets, dropped };
            }
            i -= 1;
            picks[i] += 1;
            if picks[i] < choices[i].len() {
                break;
            }
            picks[i] = 0;
        }
    }
}

/// Similarity of one matched command with the sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    pub command_words: WordSet,
    pub sentence_words: WordSet,
    pub variants: Variants,
    pub score: Score,
    pub best_variant: WordSet,
    pub adjusted_score: Option<Score>,
}

impl ScoredCandidate {
    /// Adjusted score when present, otherwise the plain score.
    pub fn effective(&self) -> Score {
        self.adjusted_score.unwrap_or(self.score)
    }
}

/// Maximum Jaccard index over all synonym variants of the command name.
pub fn score_command(
    spec: &CommandSpec,
    tokens: &TokenSequence,
    bindings: &[ArgumentBinding],
    rules: &[&SynonymRule],
) -> ScoredCandidate {
    let (command_words, sentence_words) = build_word_sets(spec, tokens, bindings);
    let variants = synonym_variants(&command_words, rules);
    let mut best: Option<(Score, &WordSet)> = None;
    for variant in &variants.sets {
        let s = jaccard(variant, &sentence_words);
        if best.is_none_or(|(b, _)| s > b) {
            best = Some((s, variant));
        }
    }
    let (score, best_variant) = match best {
        Some((s, v)) => (s, v.clone()),
        None => (Score::ZERO, command_words.clone()),
    };
    ScoredCandidate {
        command_words,
        sentence_words,
        variants,
        score,
        best_variant,
        adjusted_score: None,
    }
}

/// Re-score with the command's extra words added and its optional words
/// removed when the sentence lacks them.
pub fn adjusted_score(spec: &CommandSpec, candidate: &ScoredCandidate) -> Score {
    let mut words = candidate.best_variant.clone();
    words.extend(spec.extra_words.iter().map(|w| stem(w)));
    for optional in &spec.optional_words {
        let s = stem(optional);
        if !candidate.sentence_words.contains(&s) {
            words.remove(&s);
        }
    }
    jaccard(&words, &candidate.sentence_words)
}

/// Attach adjusted scores to `tied` and order them best first. The sort is
/// stable, so equal candidates keep their relative order.
pub fn tie_break_adjust(tied: &mut [(&CommandSpec, ScoredCandidate)]) {
    for (spec, candidate) in tied.iter_mut() {
        candidate.adjusted_score = Some(adjusted_score(spec, candidate));
    }
    tied.sort_by_key(|c| std::cmp::Reverse(c.1.effective()));
}
