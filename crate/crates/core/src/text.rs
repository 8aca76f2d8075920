//! Sentence and identifier analysis: splitting, lowercasing, stemming and
//! numeral recognition.
//!
//! Identifier words and sentence words go through the same [`stem`] so that
//! both sides of a comparison collapse to identical forms.

use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};
use serde::Serialize;

/// One analyzed word or number of a sentence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Token {
    pub raw: String,
    pub lower: String,
    pub stem: String,
    pub numeric_value: Option<f64>,
    /// The token was enclosed in quotation marks.
    pub quoted: bool,
    /// A comma directly followed this token; used by the list grammar.
    pub comma_after: bool,
}

impl Token {
    pub fn new(raw: &str, quoted: bool) -> Self {
        let lower = raw.to_lowercase();
        let stem = stem(&lower);
        let numeric_value = parse_number(&lower);
        Self {
            raw: raw.to_string(),
            lower,
            stem,
            numeric_value,
            quoted,
            comma_after: false,
        }
    }

    /// Integer value of the token, if it is a whole number.
    pub fn integer_value(&self) -> Option<i64> {
        self.numeric_value
            .filter(|v| v.fract() == 0.0 && v.abs() < 9.0e15)
            .map(|v| v as i64)
    }
}

/// An analyzed sentence.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TokenSequence {
    pub tokens: Vec<Token>,
    pub raw_sentence: String,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Token> {
        self.tokens.get(index)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Token> {
        self.tokens.iter()
    }
}

fn stemmer() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

/// Stem a lowercase English word.
///
/// The Porter-family stemmer is applied until the output stops changing, so
/// `stem(stem(w)) == stem(w)` holds for every input.
pub fn stem(word: &str) -> String {
    if word.is_empty() {
        return String::new();
    }
    let mut current = word.to_string();
    // Each pass never lengthens the word, so this settles quickly.
    for _ in 0..8 {
        let next = stemmer().stem(&current).into_owned();
        if next.is_empty() || next == current {
            break;
        }
        current = next;
    }
    current
}

const UNITS: [&str; 21] = [
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
    "twenty",
];

const TENS: [(&str, u32); 7] = [
    ("thirty", 30),
    ("forty", 40),
    ("fifty", 50),
    ("sixty", 60),
    ("seventy", 70),
    ("eighty", 80),
    ("ninety", 90),
];

/// Recognize an unsigned decimal literal or a single English number word.
pub fn parse_number(token: &str) -> Option<f64> {
    let lower = token.to_lowercase();
    if let Some(n) = UNITS.iter().position(|w| *w == lower) {
        return Some(n as f64);
    }
    if let Some((_, n)) = TENS.iter().find(|(w, _)| *w == lower) {
        return Some(f64::from(*n));
    }
    let (int_part, frac_part) = match lower.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (lower.as_str(), None),
    };
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if let Some(f) = frac_part {
        if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
    }
    lower.parse::<f64>().ok()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Lower,
    Upper,
    Digit,
    Other,
}

fn classify(c: char) -> CharClass {
    if c.is_ascii_digit() {
        CharClass::Digit
    } else if c.is_uppercase() {
        CharClass::Upper
    } else if c.is_alphabetic() {
        CharClass::Lower
    } else {
        CharClass::Other
    }
}

/// Split a camelCase, PascalCase, snake_case or SCREAMING_CASE identifier
/// into lowercase words. Acronym runs stay together and digit runs become
/// words of their own: `setHDMIInput2` gives `set hdmi input 2`.
pub fn split_identifier(ident: &str) -> Vec<String> {
    let chars: Vec<char> = ident.chars().collect();
    let mut words = Vec::new();
    let mut current = String::new();

    for (i, &c) in chars.iter().enumerate() {
        let class = classify(c);
        if class == CharClass::Other {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            continue;
        }
        if let Some(&prev) = current.chars().last().as_ref() {
            let prev_class = classify(prev);
            let next_class = chars.get(i + 1).map(|&n| classify(n));
            let boundary = match (prev_class, class) {
                (CharClass::Lower, CharClass::Upper) => true,
                (CharClass::Digit, CharClass::Lower | CharClass::Upper) => true,
                (CharClass::Lower | CharClass::Upper, CharClass::Digit) => true,
                // "HDMIInput": the last capital of a run starts the next word.
                (CharClass::Upper, CharClass::Upper) => next_class == Some(CharClass::Lower),
                _ => false,
            };
            if boundary {
                words.push(std::mem::take(&mut current));
            }
        }
        current.push(c);
    }
    if !current.is_empty() {
        words.push(current);
    }
    words.into_iter().map(|w| w.to_lowercase()).collect()
}

fn is_quote(c: char) -> bool {
    matches!(c, '\'' | '"' | '`' | '‘' | '’' | '“' | '”')
}

/// Split a sentence into analyzed tokens.
///
/// Whitespace, hyphens and other punctuation separate tokens. A comma marks
/// the preceding token with `comma_after`. Quotation marks opening at a word
/// start and closing at a word end flag every enclosed token as `quoted`;
/// an apostrophe between letters ("don't") stays inside the word, and a
/// decimal point between digits stays inside the number.
pub fn tokenize(sentence: &str) -> TokenSequence {
    let chars: Vec<char> = sentence.chars().collect();
    let mut tokens: Vec<Token> = Vec::new();
    let mut current = String::new();
    let mut in_quote = false;
    let mut current_quoted = false;

    let flush = |current: &mut String, quoted: bool, tokens: &mut Vec<Token>| {
        if !current.is_empty() {
            tokens.push(Token::new(current, quoted));
            current.clear();
        }
    };

    for (i, &c) in chars.iter().enumerate() {
        let prev = i.checked_sub(1).map(|p| chars[p]);
        let next = chars.get(i + 1).copied();
        if c.is_alphanumeric() {
            if current.is_empty() {
                current_quoted = in_quote;
            }
            current.push(c);
            continue;
        }
        let between = |pred: fn(&char) -> bool| prev.as_ref().is_some_and(pred) && next.as_ref().is_some_and(pred);
        if c == '.' && !current.is_empty() && between(char::is_ascii_digit) {
            current.push(c);
            continue;
        }
        if c == '\'' && !current.is_empty() && between(|ch| ch.is_alphabetic()) {
            current.push(c);
            continue;
        }
        flush(&mut current, current_quoted, &mut tokens);
        if is_quote(c) {
            in_quote = !in_quote;
        } else if c == ',' {
            if let Some(last) = tokens.last_mut() {
                last.comma_after = true;
            }
        }
    }
    flush(&mut current, current_quoted, &mut tokens);

    TokenSequence {
        tokens,
        raw_sentence: sentence.to_string(),
    }
}
