//! Reasoning with typicality in SROEL(⊓,×).
//!
//! A knowledge base is parsed from the `.kbt` format ([`syntax`]),
//! normalized ([`normalize`]), translated to Datalog and materialized
//! ([`calculus`]). Rational closure ranks for simple knowledge bases live in
//! [`closure`]; [`ranked`] evaluates finite ranked interpretations directly
//! and searches for small counter-models.

pub mod calculus;
pub mod closure;
pub mod error;
pub mod kb;
pub mod normalize;
pub mod ranked;
pub mod syntax;

pub use error::{Result, SroelError};
pub use kb::{Axiom, BoxKind, Concept, KnowledgeBase, Query, Signature, ValidationReport, Violation, ViolationKind};
pub use syntax::{parse_concept, parse_kb, parse_query, print_kb, ParseError};
