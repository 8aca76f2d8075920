//! Map single natural-language command sentences onto registered, typed
//! commands.
//!
//! Commands are described by their class and method identifiers, typed
//! parameters and a few optional hints (extra words, optional words, scoped
//! synonyms, fallback patterns). A sentence is resolved by first trying the
//! fallback patterns, then binding parameters by name and type, and finally
//! ranking the remaining commands by the Jaccard index between the command's
//! name words and the sentence's leftover words.
//!
//! ```
//! use speakable::{resolve, CommandSpec, ParameterSpec, RegistryBuilder, TypeDescriptor};
//!
//! let mut builder = RegistryBuilder::new();
//! builder.register(CommandSpec::new("LightService", "turnOn")).unwrap();
//! builder
//!     .register(
//!         CommandSpec::new("LightService", "turnOn")
//!             .id("Light.turnOn#2")
//!             .param(ParameterSpec::new("number", TypeDescriptor::Integer)),
//!     )
//!     .unwrap();
//! let registry = builder.freeze();
//!
//! let call = resolve(&registry, "turn on light number 1").result;
//! assert_eq!(call.resolved().unwrap().signature(), "Light.turnOn#2(1)");
//! ```

pub mod demo;
pub mod engine;
pub mod error;
pub mod matching;
pub mod model;
pub mod scoring;
pub mod text;
pub mod value;

pub use engine::{
    execute, execute_call, explain, resolve, ExplainReport, Resolution, ResolutionResult, ResolvedCall, Via,
};
pub use error::{ExecuteError, ProviderError, RegistryError};
pub use model::{
    CommandSpec, FixedMapping, FixedValues, ParameterSpec, Registry, RegistryBuilder, SynonymRule, SynonymScope,
    TokenMapper, TypeDescriptor, ValueProvider,
};
pub use scoring::Score;
pub use value::{ArgValue, CollectionValue};
