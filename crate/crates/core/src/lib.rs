//! Workbench for finite universal algebra: signatures and their
//! equivalence, absolutely free term algebras, finite algebras with
//! explicit operation tables, clones of term operations, recovery of a
//! type's arity multiset from category-level data, and probes that
//! distinguish categories of algebras.

pub mod cli;
pub mod clone;
pub mod finalg;
pub mod functor_probe;
pub mod recovery;
pub mod signature;
pub mod term;
