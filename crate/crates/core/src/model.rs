//! Command metadata and the registry that holds it.
//!
//! A [`CommandSpec`] describes one callable: the class and method identifiers
//! it is reached through, its typed parameters, hint words, scoped synonyms,
//! an optional fallback pattern and the handler to invoke. Specs are added to
//! a [`RegistryBuilder`], which is then frozen into an immutable [`Registry`].

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use regex::Regex;
use serde::Serialize;

use crate::error::{ProviderError, RegistryError};
use crate::text::{split_identifier, stem};
use crate::value::{ArgValue, MappedValue};

/// Suffixes stripped from class identifiers unless a registry overrides them.
pub const DEFAULT_STRIPPABLE_SUFFIXES: [&str; 4] = ["Service", "Controller", "Manager", "Impl"];

pub const DEFAULT_THRESHOLD: f64 = 0.2;

/// Remove one implementation-oriented suffix (`LightService` -> `Light`).
///
/// Never returns an empty name.
pub fn strip_implementation_suffix(class_name: &str) -> &str {
    strip_suffix_with(class_name, &DEFAULT_STRIPPABLE_SUFFIXES)
}

fn strip_suffix_with<'a, S: AsRef<str>>(class_name: &'a str, suffixes: &[S]) -> &'a str {
    for suffix in suffixes {
        if let Some(rest) = class_name.strip_suffix(suffix.as_ref()) {
            if !rest.is_empty() && rest.chars().any(char::is_alphanumeric) {
                return rest;
            }
        }
    }
    class_name
}

/// Level at which a synonym substitution applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynonymScope {
    Global,
    Class,
    Command,
    Parameter,
}

/// `of` may be replaced by any word of `is` while matching.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SynonymRule {
    pub of: String,
    pub is: Vec<String>,
    pub scope: SynonymScope,
}

impl SynonymRule {
    pub fn new<I, S>(of: &str, is: I, scope: SynonymScope) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            of: of.to_lowercase(),
            is: is.into_iter().map(|s| s.as_ref().to_lowercase()).collect(),
            scope,
        }
    }

    fn validate(&self) -> Result<(), String> {
        if self.is.is_empty() {
            return Err(format!("synonym of {:?} lists no alternatives", self.of));
        }
        for word in std::iter::once(&self.of).chain(&self.is) {
            if !is_single_word(word) {
                return Err(format!("synonym word {word:?} is not a single lowercase word"));
            }
        }
        if self.is.iter().all(|w| *w == self.of) {
            return Err(format!("synonym of {:?} only lists itself", self.of));
        }
        Ok(())
    }
}

fn is_single_word(word: &str) -> bool {
    !word.is_empty() && !word.chars().any(char::is_whitespace) && word.to_lowercase() == word
}

/// Source of the currently valid values of a string parameter.
///
/// Evaluated once per resolution, so the set may change between sentences.
pub trait ValueProvider: Send + Sync {
    fn values(&self) -> Result<Vec<String>, ProviderError>;
}

/// A fixed list of valid values.
#[derive(Debug, Clone)]
pub struct FixedValues(pub Vec<String>);

impl ValueProvider for FixedValues {
    fn values(&self) -> Result<Vec<String>, ProviderError> {
        Ok(self.0.clone())
    }
}

impl<F> ValueProvider for F
where
    F: Fn() -> Result<Vec<String>, ProviderError> + Send + Sync,
{
    fn values(&self) -> Result<Vec<String>, ProviderError> {
        self()
    }
}

/// Maps surface words to domain objects (`"green"` -> a color value).
pub trait TokenMapper: Send + Sync {
    fn entries(&self) -> Result<Vec<(String, MappedValue)>, ProviderError>;
}

/// A constant word-to-object table.
#[derive(Clone, Default)]
pub struct FixedMapping(pub Vec<(String, MappedValue)>);

impl FixedMapping {
    pub fn with<T: std::any::Any + Send + Sync>(mut self, key: &str, value: T) -> Self {
        self.0.push((key.to_lowercase(), Arc::new(value)));
        self
    }
}

impl TokenMapper for FixedMapping {
    fn entries(&self) -> Result<Vec<(String, MappedValue)>, ProviderError> {
        Ok(self.0.clone())
    }
}

/// One constant of an enumeration, with the words it is spoken as.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnumConstant {
    pub name: String,
    pub words: Vec<String>,
}

impl EnumConstant {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            words: split_identifier(name),
        }
    }
}

/// Value space of a parameter.
#[derive(Clone)]
pub enum TypeDescriptor {
    Integer,
    Real,
    Enumeration(Vec<EnumConstant>),
    BoundedString(Arc<dyn ValueProvider>),
    MappedObject(Arc<dyn TokenMapper>),
    CollectionOf {
        element: Box<TypeDescriptor>,
        allow_ranges: bool,
    },
    /// Free text. Never bound by similarity matching, only by fallback
    /// pattern capture groups.
    Text,
}

impl TypeDescriptor {
    pub fn enumeration<S: AsRef<str>>(constants: &[S]) -> Self {
        TypeDescriptor::Enumeration(constants.iter().map(|c| EnumConstant::new(c.as_ref())).collect())
    }

    pub fn values<S: AsRef<str>>(values: &[S]) -> Self {
        TypeDescriptor::BoundedString(Arc::new(FixedValues(
            values.iter().map(|v| v.as_ref().to_string()).collect(),
        )))
    }

    pub fn provided_by(provider: impl ValueProvider + 'static) -> Self {
        TypeDescriptor::BoundedString(Arc::new(provider))
    }

    pub fn mapped_by(mapper: impl TokenMapper + 'static) -> Self {
        TypeDescriptor::MappedObject(Arc::new(mapper))
    }

    pub fn collection_of(element: TypeDescriptor) -> Self {
        TypeDescriptor::CollectionOf {
            element: Box::new(element),
            allow_ranges: false,
        }
    }

    /// Collection of integers that also accepts `<n> to <m>` ranges.
    pub fn integer_ranges() -> Self {
        TypeDescriptor::CollectionOf {
            element: Box::new(TypeDescriptor::Integer),
            allow_ranges: true,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            TypeDescriptor::Integer => "integer",
            TypeDescriptor::Real => "real",
            TypeDescriptor::Enumeration(_) => "enumeration",
            TypeDescriptor::BoundedString(_) => "bounded-string",
            TypeDescriptor::MappedObject(_) => "mapped-object",
            TypeDescriptor::CollectionOf { .. } => "collection",
            TypeDescriptor::Text => "text",
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, TypeDescriptor::Integer | TypeDescriptor::Real)
    }

    /// Whether the full value set can be listed (needed for "all").
    pub fn is_enumerable(&self) -> bool {
        matches!(
            self,
            TypeDescriptor::Enumeration(_) | TypeDescriptor::BoundedString(_) | TypeDescriptor::MappedObject(_)
        )
    }

    fn validate(&self) -> Result<(), String> {
        match self {
            TypeDescriptor::Enumeration(constants) => {
                if constants.is_empty() {
                    return Err("enumeration has no constants".into());
                }
                if constants.iter().any(|c| c.words.is_empty()) {
                    return Err("enumeration constant without words".into());
                }
            }
            TypeDescriptor::CollectionOf { element, allow_ranges } => {
                if matches!(**element, TypeDescriptor::CollectionOf { .. }) {
                    return Err("collection of collections".into());
                }
                if *allow_ranges && !matches!(**element, TypeDescriptor::Integer) {
                    return Err("ranges are only allowed for integer collections".into());
                }
                if matches!(**element, TypeDescriptor::Text) {
                    return Err("collection of free text".into());
                }
                element.validate()?;
            }
            _ => {}
        }
        Ok(())
    }
}

impl fmt::Debug for TypeDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeDescriptor::Enumeration(constants) => {
                let names: Vec<&str> = constants.iter().map(|c| c.name.as_str()).collect();
                write!(f, "Enumeration{names:?}")
            }
            TypeDescriptor::CollectionOf { element, allow_ranges } => {
                write!(f, "CollectionOf({element:?}, ranges={allow_ranges})")
            }
            other => f.write_str(other.kind()),
        }
    }
}

/// One parameter of a command.
#[derive(Debug, Clone)]
pub struct ParameterSpec {
    pub ident: String,
    pub name: Vec<String>,
    pub descriptor: TypeDescriptor,
    pub synonyms: Vec<SynonymRule>,
    pub mandatory: bool,
}

impl ParameterSpec {
    pub fn new(ident: &str, descriptor: TypeDescriptor) -> Self {
        Self {
            ident: ident.to_string(),
            name: split_identifier(ident),
            descriptor,
            synonyms: Vec::new(),
            mandatory: true,
        }
    }

    pub fn optional(mut self) -> Self {
        self.mandatory = false;
        self
    }

    pub fn synonym<I, S>(mut self, of: &str, is: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.synonyms.push(SynonymRule::new(of, is, SynonymScope::Parameter));
        self
    }
}

/// Outcome of a handler: an optional message for the user.
pub type HandlerResult = Result<Option<String>, Box<dyn std::error::Error + Send + Sync>>;

/// Callable bound to a command, invoked with one value per parameter.
pub type Handler = Arc<dyn Fn(&[ArgValue]) -> HandlerResult + Send + Sync>;

/// Metadata of one callable command.
#[derive(Clone)]
pub struct CommandSpec {
    /// Empty until registration, which derives `Class.method` when unset.
    pub id: String,
    pub class_ident: String,
    pub method_ident: String,
    pub class_words: Vec<String>,
    pub method_words: Vec<String>,
    pub parameters: Vec<ParameterSpec>,
    pub extra_words: Vec<String>,
    pub optional_words: Vec<String>,
    pub synonyms: Vec<SynonymRule>,
    pub fallback_pattern: Option<String>,
    pub(crate) fallback_regex: Option<Regex>,
    pub handler: Handler,
}

impl CommandSpec {
    pub fn new(class_ident: &str, method_ident: &str) -> Self {
        let class = strip_implementation_suffix(class_ident);
        Self {
            id: String::new(),
            class_ident: class_ident.to_string(),
            method_ident: method_ident.to_string(),
            class_words: split_identifier(class),
            method_words: split_identifier(method_ident),
            parameters: Vec::new(),
            extra_words: Vec::new(),
            optional_words: Vec::new(),
            synonyms: Vec::new(),
            fallback_pattern: None,
            fallback_regex: None,
            handler: Arc::new(|_: &[ArgValue]| Ok(None)),
        }
    }

    pub fn id(mut self, id: &str) -> Self {
        self.id = id.to_string();
        self
    }

    pub fn param(mut self, parameter: ParameterSpec) -> Self {
        self.parameters.push(parameter);
        self
    }

    pub fn extra_words<I: IntoIterator<Item = S>, S: AsRef<str>>(mut self, words: I) -> Self {
        self.extra_words
            .extend(words.into_iter().map(|w| w.as_ref().to_lowercase()));
        self
    }

    pub fn optional_words<I: IntoIterator<Item = S>, S: AsRef<str>>(mut self, words: I) -> Self {
        self.optional_words
            .extend(words.into_iter().map(|w| w.as_ref().to_lowercase()));
        self
    }

    /// Command-local synonym.
    pub fn synonym<I, S>(mut self, of: &str, is: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.synonyms.push(SynonymRule::new(of, is, SynonymScope::Command));
        self
    }

    /// Regular expression matched against the whole sentence before any
    /// similarity matching; capture groups become the arguments.
    pub fn fallback(mut self, pattern: &str) -> Self {
        self.fallback_pattern = Some(pattern.to_string());
        self
    }

    pub fn handler<F>(mut self, handler: F) -> Self
    where
        F: Fn(&[ArgValue]) -> HandlerResult + Send + Sync + 'static,
    {
        self.handler = Arc::new(handler);
        self
    }

    /// Class name after suffix stripping, as used in ids (`Light`).
    pub fn class_name(&self) -> String {
        let mut name = String::new();
        for word in &self.class_words {
            let mut chars = word.chars();
            if let Some(first) = chars.next() {
                name.extend(first.to_uppercase());
                name.push_str(chars.as_str());
            }
        }
        name
    }

    /// Stems of the class and method words.
    pub fn identifier_stems(&self) -> Vec<String> {
        let mut stems: Vec<String> = Vec::new();
        for word in self.class_words.iter().chain(&self.method_words) {
            let s = stem(word);
            if !stems.contains(&s) {
                stems.push(s);
            }
        }
        stems
    }

    pub fn fallback_regex(&self) -> Option<&Regex> {
        self.fallback_regex.as_ref()
    }

    fn validate(&mut self) -> Result<(), RegistryError> {
        let id = self.id.clone();
        let invalid = |reason: String| RegistryError::invalid(&id, reason);
        for (what, words) in [("class", &self.class_words), ("method", &self.method_words)] {
            if words.is_empty() {
                return Err(invalid(format!("{what} name has no words")));
            }
        }
        for word in self.extra_words.iter().chain(&self.optional_words) {
            if !is_single_word(word) {
                return Err(invalid(format!("hint word {word:?} is not a single lowercase word")));
            }
        }
        if let Some(word) = self.extra_words.iter().find(|w| self.optional_words.contains(w)) {
            return Err(invalid(format!("{word:?} is both an extra and an optional word")));
        }
        for rule in &self.synonyms {
            rule.validate().map_err(&invalid)?;
            if rule.scope == SynonymScope::Parameter {
                return Err(invalid("parameter-local synonym attached to a command".into()));
            }
        }
        let mut seen = HashSet::new();
        for p in &self.parameters {
            if p.name.is_empty() {
                return Err(invalid("parameter without a name".into()));
            }
            if !seen.insert(&p.ident) {
                return Err(invalid(format!("duplicate parameter {:?}", p.ident)));
            }
            p.descriptor
                .validate()
                .map_err(|r| invalid(format!("parameter {}: {r}", p.ident)))?;
            for rule in &p.synonyms {
                rule.validate().map_err(&invalid)?;
                if rule.scope != SynonymScope::Parameter {
                    return Err(invalid(format!("parameter {} has a non-parameter synonym", p.ident)));
                }
            }
        }
        if let Some(pattern) = &self.fallback_pattern {
            let anchored = format!("(?is)^(?:{pattern})$");
            let regex =
                Regex::new(&anchored).map_err(|e| invalid(format!("fallback pattern does not compile: {e}")))?;
            let groups = regex.captures_len() - 1;
            if groups != self.parameters.len() {
                return Err(invalid(format!(
                    "fallback pattern has {groups} capture groups for {} parameters",
                    self.parameters.len()
                )));
            }
            self.fallback_regex = Some(regex);
        }
        Ok(())
    }
}

impl fmt::Debug for CommandSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CommandSpec")
            .field("id", &self.id)
            .field("class_words", &self.class_words)
            .field("method_words", &self.method_words)
            .field("parameters", &self.parameters)
            .field("extra_words", &self.extra_words)
            .field("optional_words", &self.optional_words)
            .field("synonyms", &self.synonyms)
            .field("fallback_pattern", &self.fallback_pattern)
            .finish_non_exhaustive()
    }
}

/// Mutable registry under construction.
pub struct RegistryBuilder {
    commands: Vec<CommandSpec>,
    global_synonyms: Vec<SynonymRule>,
    class_synonyms: BTreeMap<String, Vec<SynonymRule>>,
    suffixes: Vec<String>,
    threshold: f64,
}

impl Default for RegistryBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl RegistryBuilder {
    pub fn new() -> Self {
        Self {
            commands: Vec::new(),
            global_synonyms: Vec::new(),
            class_synonyms: BTreeMap::new(),
            suffixes: DEFAULT_STRIPPABLE_SUFFIXES.iter().map(|s| s.to_string()).collect(),
            threshold: DEFAULT_THRESHOLD,
        }
    }

    /// Replace the set of strippable class-name suffixes. Affects commands
    /// registered afterwards.
    pub fn strippable_suffixes<I: IntoIterator<Item = S>, S: Into<String>>(mut self, suffixes: I) -> Self {
        self.suffixes = suffixes.into_iter().map(Into::into).collect();
        self
    }

    pub fn threshold(mut self, threshold: f64) -> Result<Self, RegistryError> {
        check_threshold(threshold)?;
        self.threshold = threshold;
        Ok(self)
    }

    /// Synonym applying to every command in the registry.
    pub fn global_synonym<I, S>(&mut self, of: &str, is: I) -> Result<(), RegistryError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let rule = SynonymRule::new(of, is, SynonymScope::Global);
        rule.validate().map_err(|r| RegistryError::invalid("<global>", r))?;
        self.global_synonyms.push(rule);
        Ok(())
    }

    /// Synonym applying to every command of one class. `class_ident` may be
    /// given with or without its implementation suffix.
    pub fn class_synonym<I, S>(&mut self, class_ident: &str, of: &str, is: I) -> Result<(), RegistryError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let rule = SynonymRule::new(of, is, SynonymScope::Class);
        rule.validate().map_err(|r| RegistryError::invalid(class_ident, r))?;
        let key = split_identifier(strip_suffix_with(class_ident, &self.suffixes)).join(" ");
        self.class_synonyms.entry(key).or_default().push(rule);
        Ok(())
    }

    pub fn register(&mut self, mut spec: CommandSpec) -> Result<&CommandSpec, RegistryError> {
        spec.class_words = split_identifier(strip_suffix_with(&spec.class_ident, &self.suffixes));
        spec.method_words = split_identifier(&spec.method_ident);
        if spec.id.is_empty() {
            spec.id = format!("{}.{}", spec.class_name(), spec.method_ident);
        }
        if self.commands.iter().any(|c| c.id == spec.id) {
            return Err(RegistryError::DuplicateId(spec.id));
        }
        spec.validate()?;
        self.commands.push(spec);
        Ok(self.commands.last().expect("just pushed"))
    }

    pub fn len(&self) -> usize {
        self.commands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commands.is_empty()
    }

    pub fn freeze(self) -> Registry {
        Registry {
            commands: self.commands.into(),
            global_synonyms: self.global_synonyms.into(),
            class_synonyms: Arc::new(self.class_synonyms),
            threshold: self.threshold,
        }
    }
}

fn check_threshold(threshold: f64) -> Result<(), RegistryError> {
    if (0.0..=1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(RegistryError::InvalidThreshold(threshold))
    }
}

/// Immutable, shareable set of commands.
#[derive(Clone)]
pub struct Registry {
    commands: Arc<[CommandSpec]>,
    global_synonyms: Arc<[SynonymRule]>,
    class_synonyms: Arc<BTreeMap<String, Vec<SynonymRule>>>,
    threshold: f64,
}

impl Registry {
    pub fn builder() -> RegistryBuilder {
        RegistryBuilder::new()
    }

    pub fn commands(&self) -> &[CommandSpec] {
        &self.commands
    }

    pub fn get(&self, id: &str) -> Option<&CommandSpec> {
        self.commands.iter().find(|c| c.id == id)
    }

    pub fn len(&self) -> usize {
        self.commands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commands.is_empty()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// A copy of this registry using another threshold.
    pub fn with_threshold(&self, threshold: f64) -> Result<Registry, RegistryError> {
        check_threshold(threshold)?;
        Ok(Registry {
            threshold,
            ..self.clone()
        })
    }

    pub fn global_synonyms(&self) -> &[SynonymRule] {
        &self.global_synonyms
    }

    pub fn class_synonyms(&self, spec: &CommandSpec) -> &[SynonymRule] {
        self.class_synonyms
            .get(&spec.class_words.join(" "))
            .map_or(&[], Vec::as_slice)
    }

    /// Synonym rules covering a command, in declaration order: global, class,
    /// command, then parameter-local rules of the given parameters.
    pub fn applicable_synonyms<'a>(
        &'a self,
        spec: &'a CommandSpec,
        bound_parameters: impl IntoIterator<Item = usize>,
    ) -> Vec<&'a SynonymRule> {
        let mut rules: Vec<&SynonymRule> = self
            .global_synonyms
            .iter()
            .chain(self.class_synonyms(spec))
            .chain(&spec.synonyms)
            .collect();
        for index in bound_parameters {
            if let Some(p) = spec.parameters.get(index) {
                rules.extend(&p.synonyms);
            }
        }
        rules
    }
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("commands", &self.commands.iter().map(|c| &c.id).collect::<Vec<_>>())
            .field("threshold", &self.threshold)
            .finish()
    }
}
