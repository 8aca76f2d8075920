//! Binding sentence tokens to command parameters by name, type and position.
//!
//! Every parameter is bound in two passes. The first pass looks for the
//! parameter's name directly followed by a compatible value ("number 1",
//! "named 'front'"). The second pass takes the leftmost unconsumed
//! compatible value; parameters of the same kind therefore bind left to
//! right in declaration order. A token is consumed by at most one binding.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::Serialize;

use crate::error::ProviderError;
use crate::model::{CommandSpec, EnumConstant, ParameterSpec, TokenMapper, TypeDescriptor, ValueProvider};
use crate::text::{stem, Token, TokenSequence};
use crate::value::{ArgValue, CollectionValue, MappedValue};

/// How an argument was located in the sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchedBy {
    NameAdjacency,
    TypeOnly,
    Position,
    AllKeyword,
    Range,
    /// Optional parameter left unbound.
    Absent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArgumentBinding {
    /// Index into the command's parameter list.
    pub parameter: usize,
    pub value: ArgValue,
    pub consumed: BTreeSet<usize>,
    pub matched_by: MatchedBy,
}

/// A command whose mandatory parameters could all be bound.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchCandidate {
    pub command: usize,
    pub command_id: String,
    pub bindings: Vec<ArgumentBinding>,
}

impl MatchCandidate {
    pub fn consumed(&self) -> BTreeSet<usize> {
        self.bindings.iter().flat_map(|b| b.consumed.iter().copied()).collect()
    }

    pub fn arguments(&self) -> Vec<ArgValue> {
        self.bindings.iter().map(|b| b.value.clone()).collect()
    }
}

/// Why a command was dropped before scoring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Elimination {
    MissingParameter(String),
    ProviderFailure { parameter: String, message: String },
}

impl std::fmt::Display for Elimination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Elimination::MissingParameter(p) => write!(f, "no value for mandatory parameter {p}"),
            Elimination::ProviderFailure { parameter, message } => {
                write!(f, "value source of {parameter} failed: {message}")
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Phrase {
    lower: Vec<String>,
    stems: Vec<String>,
}

impl Phrase {
    fn new(text: &str) -> Self {
        let lower: Vec<String> = text.split_whitespace().map(str::to_lowercase).collect();
        let stems = lower.iter().map(|w| stem(w)).collect();
        Self { lower, stems }
    }

    fn len(&self) -> usize {
        self.lower.len()
    }
}

#[derive(Debug)]
struct PreparedValues(Vec<(String, Phrase)>);

struct PreparedMapping(Vec<(String, Phrase, MappedValue)>);

/// Per-resolution cache of provider and mapper results, so one sentence sees
/// a single consistent snapshot of every value source.
#[derive(Default)]
pub struct ValueCache {
    values: HashMap<usize, Result<Arc<PreparedValues>, ProviderError>>,
    mappings: HashMap<usize, Result<Arc<PreparedMapping>, ProviderError>>,
}

fn source_key<T: ?Sized>(source: &Arc<T>) -> usize {
    Arc::as_ptr(source) as *const () as usize
}

impl ValueCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn values(&mut self, provider: &Arc<dyn ValueProvider>) -> Result<Arc<PreparedValues>, ProviderError> {
        self.values
            .entry(source_key(provider))
            .or_insert_with(|| {
                let mut seen = BTreeSet::new();
                let values = provider
                    .values()?
                    .into_iter()
                    .filter(|v| !v.trim().is_empty() && seen.insert(v.clone()))
                    .map(|v| {
                        let phrase = Phrase::new(&v);
                        (v, phrase)
                    })
                    .collect();
                Ok(Arc::new(PreparedValues(values)))
            })
            .clone()
    }

    fn mapping(&mut self, mapper: &Arc<dyn TokenMapper>) -> Result<Arc<PreparedMapping>, ProviderError> {
        self.mappings
            .entry(source_key(mapper))
            .or_insert_with(|| {
                let mut seen = BTreeSet::new();
                let entries = mapper
                    .entries()?
                    .into_iter()
                    .filter(|(k, _)| !k.trim().is_empty() && seen.insert(k.to_lowercase()))
                    .map(|(k, v)| {
                        let phrase = Phrase::new(&k);
                        (k.to_lowercase(), phrase, v)
                    })
                    .collect();
                Ok(Arc::new(PreparedMapping(entries)))
            })
            .clone()
    }

    /// Every value of an enumerable descriptor, for expanding "all".
    pub fn all_values(&mut self, descriptor: &TypeDescriptor) -> Result<Vec<ArgValue>, ProviderError> {
        Ok(match descriptor {
            TypeDescriptor::Enumeration(constants) => {
                constants.iter().map(|c| ArgValue::Enum(c.name.clone())).collect()
            }
            TypeDescriptor::BoundedString(provider) => self
                .values(provider)?
                .0
                .iter()
                .map(|(v, _)| ArgValue::Text(v.clone()))
                .collect(),
            TypeDescriptor::MappedObject(mapper) => self
                .mapping(mapper)?
                .0
                .iter()
                .map(|(k, _, v)| ArgValue::Object {
                    key: k.clone(),
                    value: v.clone(),
                })
                .collect(),
            _ => Vec::new(),
        })
    }
}

/// Tokens available for binding.
struct Cursor<'a> {
    tokens: &'a [Token],
    consumed: &'a BTreeSet<usize>,
}

impl<'a> Cursor<'a> {
    fn free(&self, index: usize) -> Option<&'a Token> {
        if self.consumed.contains(&index) {
            None
        } else {
            self.tokens.get(index)
        }
    }

    /// Length of `phrase` matched at `start`, comparing quoted tokens by
    /// their lowercase form and the rest by stem.
    fn phrase_at(&self, start: usize, phrase: &Phrase) -> Option<usize> {
        if phrase.len() == 0 {
            return None;
        }
        for k in 0..phrase.len() {
            let token = self.free(start + k)?;
            let equal = if token.quoted {
                token.lower == phrase.lower[k]
            } else {
                token.stem == phrase.stems[k]
            };
            if !equal {
                return None;
            }
        }
        Some(phrase.len())
    }

    fn stems_at(&self, start: usize, stems: &[String]) -> bool {
        !stems.is_empty()
            && stems
                .iter()
                .enumerate()
                .all(|(k, s)| self.free(start + k).is_some_and(|t| t.stem == *s))
    }
}

/// Pick the single longest match; several distinct values of equal length
/// make the token ambiguous and nothing is bound.
fn unique_longest<T>(matches: Vec<(usize, T)>) -> Option<(usize, T)> {
    let longest = matches.iter().map(|(len, _)| *len).max()?;
    let mut best: Vec<(usize, T)> = matches.into_iter().filter(|(len, _)| *len == longest).collect();
    if best.len() == 1 {
        best.pop()
    } else {
        None
    }
}

fn enum_at(constants: &[EnumConstant], cursor: &Cursor<'_>, start: usize) -> Option<(ArgValue, usize)> {
    let matches: Vec<(usize, &EnumConstant)> = constants
        .iter()
        .filter_map(|c| {
            let stems: Vec<String> = c.words.iter().map(|w| stem(w)).collect();
            cursor.stems_at(start, &stems).then_some((stems.len(), c))
        })
        .collect();
    unique_longest(matches).map(|(len, c)| (ArgValue::Enum(c.name.clone()), len))
}

/// Match one scalar value of `descriptor` starting exactly at `start`.
fn scalar_at(
    descriptor: &TypeDescriptor,
    cursor: &Cursor<'_>,
    start: usize,
    cache: &mut ValueCache,
) -> Result<Option<(ArgValue, usize)>, ProviderError> {
    let Some(token) = cursor.free(start) else {
        return Ok(None);
    };
    Ok(match descriptor {
        TypeDescriptor::Integer => token.integer_value().map(|n| (ArgValue::Integer(n), 1)),
        TypeDescriptor::Real => token.numeric_value.map(|x| (ArgValue::Real(x), 1)),
        TypeDescriptor::Enumeration(constants) => enum_at(constants, cursor, start),
        TypeDescriptor::BoundedString(provider) => {
            let values = cache.values(provider)?;
            let matches = values
                .0
                .iter()
                .filter_map(|(v, phrase)| cursor.phrase_at(start, phrase).map(|len| (len, v)))
                .collect();
            unique_longest(matches).map(|(len, v)| (ArgValue::Text(v.clone()), len))
        }
        TypeDescriptor::MappedObject(mapper) => {
            let mapping = cache.mapping(mapper)?;
            let matches = mapping
                .0
                .iter()
                .filter_map(|(k, phrase, v)| cursor.phrase_at(start, phrase).map(|len| (len, (k, v))))
                .collect();
            unique_longest(matches).map(|(len, (k, v))| {
                (
                    ArgValue::Object {
                        key: k.clone(),
                        value: v.clone(),
                    },
                    len,
                )
            })
        }
        TypeDescriptor::CollectionOf { .. } | TypeDescriptor::Text => None,
    })
}

/// A collection value found in the sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectionMatch {
    pub value: CollectionValue,
    pub consumed: BTreeSet<usize>,
    pub matched_by: MatchedBy,
}

fn collection_at(
    element: &TypeDescriptor,
    allow_ranges: bool,
    cursor: &Cursor<'_>,
    start: usize,
    command_stems: &[String],
    cache: &mut ValueCache,
) -> Result<Option<CollectionMatch>, ProviderError> {
    let Some(first) = cursor.free(start) else {
        return Ok(None);
    };

    // `<n> to <m>`, inclusive.
    if allow_ranges {
        if let (Some(low), Some(sep), Some(high)) = (
            first.integer_value(),
            cursor.free(start + 1),
            cursor.free(start + 2).and_then(Token::integer_value),
        ) {
            if sep.lower == "to" && !first.comma_after && low <= high {
                return Ok(Some(CollectionMatch {
                    value: CollectionValue::Range { low, high },
                    consumed: (start..start + 3).collect(),
                    matched_by: MatchedBy::Range,
                }));
            }
        }
    }

    // `v (, v)* ((,)? and v)?`
    if let Some((value, len)) = scalar_at(element, cursor, start, cache)? {
        let mut values = vec![value];
        let mut consumed: BTreeSet<usize> = (start..start + len).collect();
        let mut end = start + len;
        loop {
            let last = &cursor.tokens[end - 1];
            let next = cursor.free(end);
            if last.comma_after {
                if let Some((v, l)) = scalar_at(element, cursor, end, cache)? {
                    values.push(v);
                    consumed.extend(end..end + l);
                    end += l;
                    continue;
                }
            }
            if next.is_some_and(|t| t.lower == "and") {
                if let Some((v, l)) = scalar_at(element, cursor, end + 1, cache)? {
                    values.push(v);
                    consumed.extend(end..end + 1 + l);
                }
            }
            break;
        }
        let mut unique: Vec<ArgValue> = Vec::with_capacity(values.len());
        for v in values {
            if !unique.contains(&v) {
                unique.push(v);
            }
        }
        return Ok(Some(CollectionMatch {
            value: CollectionValue::List(unique),
            consumed,
            matched_by: MatchedBy::TypeOnly,
        }));
    }

    // "all" next to a word of the command's name.
    if first.lower == "all" && element.is_enumerable() {
        let near_command_word = [start.checked_sub(1), Some(start + 1)]
            .into_iter()
            .flatten()
            .filter_map(|i| cursor.tokens.get(i))
            .any(|t| command_stems.contains(&t.stem));
        if near_command_word {
            return Ok(Some(CollectionMatch {
                value: CollectionValue::All,
                consumed: BTreeSet::from([start]),
                matched_by: MatchedBy::AllKeyword,
            }));
        }
    }
    Ok(None)
}

struct Found {
    value: ArgValue,
    consumed: BTreeSet<usize>,
    shape: Option<MatchedBy>,
}

fn value_at(
    descriptor: &TypeDescriptor,
    cursor: &Cursor<'_>,
    start: usize,
    command_stems: &[String],
    cache: &mut ValueCache,
) -> Result<Option<Found>, ProviderError> {
    if let TypeDescriptor::CollectionOf { element, allow_ranges } = descriptor {
        return Ok(
            collection_at(element, *allow_ranges, cursor, start, command_stems, cache)?.map(|m| Found {
                value: ArgValue::Collection(m.value),
                consumed: m.consumed,
                shape: (m.matched_by != MatchedBy::TypeOnly).then_some(m.matched_by),
            }),
        );
    }
    Ok(scalar_at(descriptor, cursor, start, cache)?.map(|(value, len)| Found {
        value,
        consumed: (start..start + len).collect(),
        shape: None,
    }))
}

/// Stem sequences a parameter can be referred to by: its own name words,
/// and the same with parameter-local synonyms substituted.
fn name_forms(parameter: &ParameterSpec) -> Vec<Vec<String>> {
    let base: Vec<String> = parameter.name.iter().map(|w| stem(w)).collect();
    let mut forms = vec![base.clone()];
    for rule in &parameter.synonyms {
        let of = stem(&rule.of);
        for (i, word) in base.iter().enumerate() {
            if *word != of {
                continue;
            }
            for alt in &rule.is {
                let mut form = base.clone();
                form[i] = stem(alt);
                if !forms.contains(&form) {
                    forms.push(form);
                }
            }
        }
    }
    forms
}

/// Ordering of the type-only pass: enumerations before mapped objects and
/// provider-backed strings, then numbers, then collections.
fn kind_rank(descriptor: &TypeDescriptor) -> u8 {
    match descriptor {
        TypeDescriptor::Enumeration(_) => 0,
        TypeDescriptor::MappedObject(_) => 1,
        TypeDescriptor::BoundedString(_) => 2,
        TypeDescriptor::Integer | TypeDescriptor::Real => 3,
        TypeDescriptor::CollectionOf { .. } => 4,
        TypeDescriptor::Text => 5,
    }
}

fn same_kind(a: &TypeDescriptor, b: &TypeDescriptor) -> bool {
    (a.is_numeric() && b.is_numeric()) || a.kind() == b.kind() && !a.is_numeric()
}

/// Bind every parameter of `spec` against `tokens`.
///
/// Fails when a mandatory parameter finds no value, or when a value source
/// needed for the decision fails.
pub fn match_parameters(
    spec: &CommandSpec,
    tokens: &TokenSequence,
    cache: &mut ValueCache,
) -> Result<Vec<ArgumentBinding>, Elimination> {
    let command_stems = spec.identifier_stems();
    let mut consumed: BTreeSet<usize> = BTreeSet::new();
    let mut bindings: Vec<Option<ArgumentBinding>> = vec![None; spec.parameters.len()];
    let provider_failure = |p: &ParameterSpec, e: ProviderError| Elimination::ProviderFailure {
        parameter: p.ident.clone(),
        message: e.0,
    };

    // Name followed by value.
    for (index, parameter) in spec.parameters.iter().enumerate() {
        if matches!(parameter.descriptor, TypeDescriptor::Text) {
            continue;
        }
        let forms = name_forms(parameter);
        'search: for start in 0..tokens.len() {
            for form in &forms {
                let cursor = Cursor {
                    tokens: &tokens.tokens,
                    consumed: &consumed,
                };
                if !cursor.stems_at(start, form) {
                    continue;
                }
                let value_start = start + form.len();
                let found = value_at(&parameter.descriptor, &cursor, value_start, &command_stems, cache)
                    .map_err(|e| provider_failure(parameter, e))?;
                if let Some(found) = found {
                    let mut used = found.consumed;
                    // A name word that is also part of the command name keeps
                    // counting towards the similarity score.
                    used.extend((start..value_start).filter(|i| !command_stems.contains(&tokens.tokens[*i].stem)));
                    consumed.extend(used.iter().copied());
                    bindings[index] = Some(ArgumentBinding {
                        parameter: index,
                        value: found.value,
                        consumed: used,
                        matched_by: MatchedBy::NameAdjacency,
                    });
                    break 'search;
                }
            }
        }
    }

    // Leftmost compatible value, in kind order then declaration order.
    let mut remaining: Vec<usize> = (0..spec.parameters.len()).filter(|i| bindings[*i].is_none()).collect();
    remaining.sort_by_key(|i| kind_rank(&spec.parameters[*i].descriptor));
    for index in remaining {
        let parameter = &spec.parameters[index];
        let mut bound = None;
        for start in 0..tokens.len() {
            let cursor = Cursor {
                tokens: &tokens.tokens,
                consumed: &consumed,
            };
            let found = value_at(&parameter.descriptor, &cursor, start, &command_stems, cache)
                .map_err(|e| provider_failure(parameter, e))?;
            if let Some(found) = found {
                bound = Some(found);
                break;
            }
        }
        bindings[index] = Some(match bound {
            Some(found) => {
                let positional = spec
                    .parameters
                    .iter()
                    .enumerate()
                    .any(|(j, other)| j != index && same_kind(&other.descriptor, &parameter.descriptor));
                let matched_by = found.shape.unwrap_or(if positional {
                    MatchedBy::Position
                } else {
                    MatchedBy::TypeOnly
                });
                consumed.extend(found.consumed.iter().copied());
                ArgumentBinding {
                    parameter: index,
                    value: found.value,
                    consumed: found.consumed,
                    matched_by,
                }
            }
            None if parameter.mandatory => {
                return Err(Elimination::MissingParameter(parameter.ident.clone()));
            }
            None => ArgumentBinding {
                parameter: index,
                value: ArgValue::Absent,
                consumed: BTreeSet::new(),
                matched_by: MatchedBy::Absent,
            },
        });
    }

    Ok(bindings
        .into_iter()
        .map(|b| b.expect("every parameter visited"))
        .collect())
}

/// Match a single token against an enumeration.
pub fn match_enum_token<'a>(constants: &'a [EnumConstant], token: &Token) -> Option<&'a EnumConstant> {
    let found: Vec<&EnumConstant> = constants
        .iter()
        .filter(|c| c.words.len() == 1 && stem(&c.words[0]) == token.stem)
        .collect();
    match found.as_slice() {
        [one] => Some(one),
        _ => None,
    }
}

/// Match a single token against the values of a provider.
pub fn match_bounded_string(
    provider: &Arc<dyn ValueProvider>,
    token: &Token,
    cache: &mut ValueCache,
) -> Result<Option<String>, ProviderError> {
    let consumed = BTreeSet::new();
    let tokens = std::slice::from_ref(token);
    let cursor = Cursor {
        tokens,
        consumed: &consumed,
    };
    let descriptor = TypeDescriptor::BoundedString(provider.clone());
    Ok(scalar_at(&descriptor, &cursor, 0, cache)?.and_then(|(v, len)| match v {
        ArgValue::Text(s) if len == 1 => Some(s),
        _ => None,
    }))
}

/// Match a single token against the keys of a mapper.
pub fn match_mapped_object(
    mapper: &Arc<dyn TokenMapper>,
    token: &Token,
    cache: &mut ValueCache,
) -> Result<Option<(String, MappedValue)>, ProviderError> {
    let consumed = BTreeSet::new();
    let tokens = std::slice::from_ref(token);
    let cursor = Cursor {
        tokens,
        consumed: &consumed,
    };
    let descriptor = TypeDescriptor::MappedObject(mapper.clone());
    Ok(scalar_at(&descriptor, &cursor, 0, cache)?.and_then(|(v, len)| match v {
        ArgValue::Object { key, value } if len == 1 => Some((key, value)),
        _ => None,
    }))
}

/// Find the leftmost collection value at or after `start_hint`.
///
/// `command_stems` are the stems of the command name, next to which the
/// word "all" selects every value.
pub fn match_collection(
    descriptor: &TypeDescriptor,
    tokens: &TokenSequence,
    start_hint: usize,
    command_stems: &[String],
    cache: &mut ValueCache,
) -> Result<Option<CollectionMatch>, ProviderError> {
    let TypeDescriptor::CollectionOf { element, allow_ranges } = descriptor else {
        return Ok(None);
    };
    let consumed = BTreeSet::new();
    let cursor = Cursor {
        tokens: &tokens.tokens,
        consumed: &consumed,
    };
    for start in start_hint..tokens.len() {
        if let Some(m) = collection_at(element, *allow_ranges, &cursor, start, command_stems, cache)? {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ProviderError;
    use crate::model::{FixedMapping, ParameterSpec};
    use crate::text::tokenize;
    use proptest::prelude::*;

    fn position() -> TypeDescriptor {
        TypeDescriptor::enumeration(&["LEFT", "MIDDLE", "RIGHT"])
    }

    fn colors() -> TypeDescriptor {
        TypeDescriptor::mapped_by(
            FixedMapping::default()
                .with("red", (255u8, 0u8, 0u8))
                .with("green", (0u8, 255u8, 0u8))
                .with("blue", (0u8, 0u8, 255u8)),
        )
    }

    fn bind(spec: &CommandSpec, sentence: &str) -> Result<Vec<ArgumentBinding>, Elimination> {
        match_parameters(spec, &tokenize(sentence), &mut ValueCache::new())
    }

    fn light(method: &str) -> CommandSpec {
        let mut spec = CommandSpec::new("LightService", method);
        spec.id = format!("Light.{method}");
        spec
    }

    #[test]
    fn number_by_name() {
        let spec = light("turnOn").param(ParameterSpec::new("number", TypeDescriptor::Integer));
        let b = bind(&spec, "turn on light number 1").unwrap();
        assert_eq!(b[0].value, ArgValue::Integer(1));
        assert_eq!(b[0].matched_by, MatchedBy::NameAdjacency);
        assert_eq!(b[0].consumed, BTreeSet::from([3, 4]));

        let b = bind(&spec, "turn on light 1").unwrap();
        assert_eq!(b[0].matched_by, MatchedBy::TypeOnly);
        assert_eq!(b[0].consumed, BTreeSet::from([3]));
    }

    #[test]
    fn mandatory_parameter_missing() {
        let spec = light("turnOn").param(ParameterSpec::new("number", TypeDescriptor::Integer));
        assert_eq!(
            bind(&spec, "turn on light"),
            Err(Elimination::MissingParameter("number".into()))
        );

        let spec = light("turnOn").param(ParameterSpec::new("number", TypeDescriptor::Integer).optional());
        let b = bind(&spec, "turn on light").unwrap();
        assert_eq!(b[0].value, ArgValue::Absent);
        assert_eq!(b[0].matched_by, MatchedBy::Absent);
    }

    #[test]
    fn enum_parameter() {
        let spec = light("turnOn").param(ParameterSpec::new("position", position()));
        let b = bind(&spec, "turn on the left light").unwrap();
        assert_eq!(b[0].value, ArgValue::Enum("LEFT".into()));
        assert!(bind(&spec, "turn on the dark light").is_err());
    }

    #[test]
    fn enum_token() {
        let constants = match position() {
            TypeDescriptor::Enumeration(c) => c,
            _ => unreachable!(),
        };
        let tok = |s: &str| tokenize(s).tokens.remove(0);
        assert_eq!(match_enum_token(&constants, &tok("left")).unwrap().name, "LEFT");
        assert!(match_enum_token(&constants, &tok("dark")).is_none());
        let state = match TypeDescriptor::enumeration(&["ON", "OFF"]) {
            TypeDescriptor::Enumeration(c) => c,
            _ => unreachable!(),
        };
        assert_eq!(match_enum_token(&state, &tok("on")).unwrap().name, "ON");
    }

    #[test]
    fn multi_word_enum_constants() {
        let spec = light("turnOn").param(ParameterSpec::new(
            "room",
            TypeDescriptor::enumeration(&["LIVING_ROOM", "KITCHEN"]),
        ));
        let b = bind(&spec, "turn on the living room light").unwrap();
        assert_eq!(b[0].value, ArgValue::Enum("LIVING_ROOM".into()));
        assert_eq!(b[0].consumed, BTreeSet::from([3, 4]));
        assert!(bind(&spec, "turn on the living light").is_err());
    }

    #[test]
    fn bounded_strings() {
        let provider: Arc<dyn ValueProvider> = Arc::new(crate::model::FixedValues(vec!["front".into(), "back".into()]));
        let mut cache = ValueCache::new();
        let tok = |s: &str| tokenize(s).tokens.remove(0);
        assert_eq!(
            match_bounded_string(&provider, &tok("front"), &mut cache)
                .unwrap()
                .as_deref(),
            Some("front")
        );
        assert_eq!(match_bounded_string(&provider, &tok("side"), &mut cache).unwrap(), None);

        let spec = light("turnOn").param(ParameterSpec::new("name", TypeDescriptor::BoundedString(provider)));
        let b = bind(&spec, "turn on the light named 'front'").unwrap();
        assert_eq!(b[0].value, ArgValue::Text("front".into()));
        assert_eq!(b[0].matched_by, MatchedBy::NameAdjacency);
        // "named" is not part of the command name, so it is consumed too.
        assert_eq!(b[0].consumed, BTreeSet::from([4, 5]));
        let b = bind(&spec, "turn on the front light").unwrap();
        assert_eq!(b[0].matched_by, MatchedBy::TypeOnly);
    }

    #[test]
    fn quoted_tokens_compare_unstemmed() {
        let spec = light("turnOn").param(ParameterSpec::new("name", TypeDescriptor::values(&["lights"])));
        // Unquoted: stems agree.
        assert!(bind(&spec, "turn on the light").is_ok());
        // Quoted: the exact lowercase form is required.
        assert!(bind(&spec, "turn on 'light'").is_err());
        assert!(bind(&spec, "turn on 'Lights'").is_ok());
    }

    #[test]
    fn ambiguous_provider_values_do_not_bind() {
        let spec = light("turnOn").param(ParameterSpec::new("name", TypeDescriptor::values(&["lamp", "lamps"])));
        assert!(bind(&spec, "turn on lamp").is_err());
    }

    #[test]
    fn provider_failure_eliminates() {
        let failing = || -> Result<Vec<String>, ProviderError> { Err(ProviderError::new("offline")) };
        let spec = light("turnOn").param(ParameterSpec::new("name", TypeDescriptor::provided_by(failing)));
        let err = bind(&spec, "turn on front").unwrap_err();
        assert_eq!(
            err,
            Elimination::ProviderFailure {
                parameter: "name".into(),
                message: "offline".into()
            }
        );
    }

    #[test]
    fn provider_called_once_per_cache() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        let calls = Arc::new(AtomicUsize::new(0));
        let counter = calls.clone();
        let provider = move || -> Result<Vec<String>, ProviderError> {
            counter.fetch_add(1, Ordering::SeqCst);
            Ok(vec!["front".into()])
        };
        let spec = light("turnOn").param(ParameterSpec::new("name", TypeDescriptor::provided_by(provider)));
        let mut cache = ValueCache::new();
        let tokens = tokenize("turn on the front light named front");
        match_parameters(&spec, &tokens, &mut cache).unwrap();
        match_parameters(&spec, &tokens, &mut cache).unwrap();
        assert_eq!(calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn mapped_objects() {
        let mapper = match colors() {
            TypeDescriptor::MappedObject(m) => m,
            _ => unreachable!(),
        };
        let mut cache = ValueCache::new();
        let tok = |s: &str| tokenize(s).tokens.remove(0);
        let (key, value) = match_mapped_object(&mapper, &tok("green"), &mut cache)
            .unwrap()
            .unwrap();
        assert_eq!(key, "green");
        assert_eq!(value.downcast_ref::<(u8, u8, u8)>(), Some(&(0, 255, 0)));
        assert!(match_mapped_object(&mapper, &tok("chartreuse"), &mut cache)
            .unwrap()
            .is_none());
        let (key, _) = match_mapped_object(&mapper, &tok("reds"), &mut cache).unwrap().unwrap();
        assert_eq!(key, "red");
    }

    #[test]
    fn two_parameters_of_distinct_types() {
        let spec = light("setColor")
            .param(ParameterSpec::new("number", TypeDescriptor::Integer))
            .param(ParameterSpec::new("color", colors()));
        let b = bind(&spec, "set light 3 to blue").unwrap();
        assert_eq!(b[0].value, ArgValue::Integer(3));
        assert_eq!(b[1].value.as_str(), Some("blue"));
        let b = bind(&spec, "I would like yellow color for light 4");
        assert!(b.is_err(), "yellow is not in this mapper");
        let b = bind(&spec, "I would like red color for light 4").unwrap();
        assert_eq!(b[0].value, ArgValue::Integer(4));
    }

    #[test]
    fn same_type_parameters() {
        let spec = light("setBrightness")
            .param(ParameterSpec::new("light", TypeDescriptor::Integer))
            .param(ParameterSpec::new("brightness", TypeDescriptor::Real));

        let b = bind(&spec, "set light 1 to brightness 50").unwrap();
        assert_eq!(b[0].value, ArgValue::Integer(1));
        assert_eq!(b[1].value, ArgValue::Real(50.0));
        assert_eq!(b[0].matched_by, MatchedBy::NameAdjacency);
        assert_eq!(b[1].matched_by, MatchedBy::NameAdjacency);
        // Both name words belong to the command name and stay in the sentence.
        assert_eq!(b[0].consumed, BTreeSet::from([2]));
        assert_eq!(b[1].consumed, BTreeSet::from([5]));

        let b = bind(&spec, "set brightness of light number 2 to 30").unwrap();
        assert_eq!(b[0].value, ArgValue::Integer(2));
        assert_eq!(b[1].value, ArgValue::Real(30.0));
        assert_eq!(b[0].matched_by, MatchedBy::Position);
        assert_eq!(b[1].matched_by, MatchedBy::Position);

        // Named arguments win regardless of their order in the sentence.
        let b = bind(&spec, "set brightness 70 for light 3").unwrap();
        assert_eq!(b[0].value, ArgValue::Integer(3));
        assert_eq!(b[1].value, ArgValue::Real(70.0));
    }

    #[test]
    fn parameter_synonyms_name_the_parameter() {
        let spec = light("setBrightness")
            .param(ParameterSpec::new("light", TypeDescriptor::Integer))
            .param(ParameterSpec::new("brightness", TypeDescriptor::Real).synonym("brightness", ["level"]));
        let b = bind(&spec, "set level 40 on light 2").unwrap();
        assert_eq!(b[1].value, ArgValue::Real(40.0));
        assert_eq!(b[1].matched_by, MatchedBy::NameAdjacency);
        assert_eq!(b[0].value, ArgValue::Integer(2));
    }

    #[test]
    fn collections() {
        let ints = TypeDescriptor::integer_ranges();
        let stems = vec!["light".to_string(), "dim".to_string()];
        let mut cache = ValueCache::new();
        let m = match_collection(&ints, &tokenize("dim lights 1, 7 and 9"), 0, &stems, &mut cache)
            .unwrap()
            .unwrap();
        assert_eq!(
            m.value,
            CollectionValue::List(vec![ArgValue::Integer(1), ArgValue::Integer(7), ArgValue::Integer(9)])
        );
        assert_eq!(m.consumed, BTreeSet::from([2, 3, 4, 5]));

        let m = match_collection(&ints, &tokenize("dim lights 6 to 10"), 0, &stems, &mut cache)
            .unwrap()
            .unwrap();
        assert_eq!(m.value, CollectionValue::Range { low: 6, high: 10 });
        assert_eq!(m.matched_by, MatchedBy::Range);

        let positions = TypeDescriptor::collection_of(position());
        let m = match_collection(
            &positions,
            &tokenize("dim the left and middle light"),
            0,
            &stems,
            &mut cache,
        )
        .unwrap()
        .unwrap();
        assert_eq!(
            m.value,
            CollectionValue::List(vec![ArgValue::Enum("LEFT".into()), ArgValue::Enum("MIDDLE".into())])
        );

        let m = match_collection(&positions, &tokenize("dim all lights"), 0, &stems, &mut cache)
            .unwrap()
            .unwrap();
        assert_eq!(m.value, CollectionValue::All);
        assert_eq!(m.matched_by, MatchedBy::AllKeyword);
        // Integers cannot be enumerated.
        assert!(
            match_collection(&ints, &tokenize("dim all lights"), 0, &stems, &mut cache)
                .unwrap()
                .is_none()
        );
        // "all" away from the command words is an ordinary word.
        assert!(
            match_collection(&positions, &tokenize("dim it all"), 0, &stems, &mut cache)
                .unwrap()
                .is_none()
        );
    }

    #[test]
    fn ranges_need_numbers_on_both_sides() {
        let ints = TypeDescriptor::integer_ranges();
        let stems = vec!["light".to_string()];
        let mut cache = ValueCache::new();
        let m = match_collection(&ints, &tokenize("set light 1 to brightness 50"), 0, &stems, &mut cache)
            .unwrap()
            .unwrap();
        assert_eq!(m.value, CollectionValue::List(vec![ArgValue::Integer(1)]));
        // Without range support, "6 to 10" is just the list [6].
        let plain = TypeDescriptor::collection_of(TypeDescriptor::Integer);
        let m = match_collection(&plain, &tokenize("dim lights 6 to 10"), 0, &stems, &mut cache)
            .unwrap()
            .unwrap();
        assert_eq!(m.value, CollectionValue::List(vec![ArgValue::Integer(6)]));
        // Descending bounds are not a range.
        let m = match_collection(&ints, &tokenize("dim 9 to 3"), 0, &stems, &mut cache)
            .unwrap()
            .unwrap();
        assert_eq!(m.value, CollectionValue::List(vec![ArgValue::Integer(9)]));
    }

    #[test]
    fn list_duplicates_collapse() {
        let spec = light("dim").param(ParameterSpec::new("lights", TypeDescriptor::integer_ranges()));
        let b = bind(&spec, "dim lights 2, 2 and 3").unwrap();
        assert_eq!(
            b[0].value,
            ArgValue::Collection(CollectionValue::List(vec![ArgValue::Integer(2), ArgValue::Integer(3)]))
        );
    }

    #[test]
    fn name_adjacency_beats_type_only() {
        // The value after the name is to the right of another candidate value.
        let spec = light("turnOn").param(ParameterSpec::new("number", TypeDescriptor::Integer));
        for sentence in ["turn on 5 light number 3", "at 9 turn on number 3", "number 3 then 4"] {
            let b = bind(&spec, sentence).unwrap();
            assert_eq!(b[0].value, ArgValue::Integer(3), "{sentence}");
            assert_eq!(b[0].matched_by, MatchedBy::NameAdjacency, "{sentence}");
        }
    }

    fn arbitrary_descriptor() -> impl Strategy<Value = TypeDescriptor> {
        prop_oneof![
            Just(TypeDescriptor::Integer),
            Just(TypeDescriptor::Real),
            Just(position()),
            Just(colors()),
            Just(TypeDescriptor::values(&["front", "back"])),
            Just(TypeDescriptor::integer_ranges()),
            Just(TypeDescriptor::collection_of(position())),
        ]
    }

    fn arbitrary_sentence() -> impl Strategy<Value = String> {
        let word = prop::sample::select(vec![
            "turn",
            "on",
            "light",
            "lights",
            "number",
            "1",
            "7",
            "30",
            "to",
            "and",
            "left",
            "middle",
            "green",
            "red",
            "front",
            "all",
            "dim",
            "the",
            "named",
            "brightness",
            "value",
            "six",
            "10,",
        ]);
        prop::collection::vec(word, 0..14).prop_map(|w| w.join(" "))
    }

    proptest! {
        #[test]
        fn bindings_are_disjoint_complete_and_deterministic(
            descriptors in prop::collection::vec(arbitrary_descriptor(), 1..4),
            sentence in arbitrary_sentence(),
        ) {
            let names = ["number", "value", "lights", "brightness"];
            let mut spec = light("act");
            for (i, d) in descriptors.into_iter().enumerate() {
                spec = spec.param(ParameterSpec::new(names[i], d));
            }
            let tokens = tokenize(&sentence);
            let first = match_parameters(&spec, &tokens, &mut ValueCache::new());
            let second = match_parameters(&spec, &tokens, &mut ValueCache::new());
            prop_assert_eq!(&first, &second);
            if let Ok(bindings) = first {
                prop_assert_eq!(bindings.len(), spec.parameters.len());
                let mut seen = BTreeSet::new();
                for b in &bindings {
                    prop_assert!(b.matched_by != MatchedBy::Absent);
                    for i in &b.consumed {
                        prop_assert!(*i < tokens.len());
                        prop_assert!(seen.insert(*i), "token {} consumed twice", i);
                    }
                }
            }
        }
    }
}
