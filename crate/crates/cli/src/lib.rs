//! Front ends for the speakable command mapper: an interactive REPL over the
//! demo home and an evaluator for golden sentence corpora.

pub mod corpus;
pub mod repl;
