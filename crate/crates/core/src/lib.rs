//! Core of the versioned lambda calculus: resources, syntax, type checking
//! and evaluation.
//!
//! Values may carry several versions at once. The type system tracks, per
//! variable, which versions a computation needs, and rejects programs that
//! extract a version not every participating value provides.

pub mod context;
pub mod eval;
pub mod resource;
pub mod syntax;
pub mod typeck;

pub use context::{Assumption, ContextError, TypingContext};
pub use resource::{Label, Resource};
pub use syntax::{Term, Type, Versioned};
