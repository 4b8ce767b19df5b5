//! Finite ranked interpretations: direct evaluation and bounded
//! counter-model search.

pub mod model;
pub mod refute;
pub mod soundness;

pub use model::RankedInterpretation;
pub use refute::{find_model, refute, Refuter};
pub use soundness::{check_soundness, derived_facts, SoundnessReport};
