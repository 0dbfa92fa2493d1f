//! Operation signatures: ordered lists of named symbols with finite arities.
//!
//! Two signatures are equivalent when some bijection between their symbols
//! preserves arities, i.e. when their arity multisets coincide. Names and
//! declaration order never matter for equivalence.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("duplicate symbol name: {0}")]
    DuplicateSymbol(String),
}

/// One operation symbol: a name and a nonnegative arity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpSymbol {
    pub name: String,
    pub arity: usize,
}

/// An ordered signature. Symbol names are pairwise distinct; order is
/// preserved from construction and is the order used everywhere downstream
/// (term enumeration, operation tables, JSON).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSignature")]
pub struct Signature {
    symbols: Vec<OpSymbol>,
}

#[derive(Deserialize)]
struct RawSignature {
    symbols: Vec<OpSymbol>,
}

impl TryFrom<RawSignature> for Signature {
    type Error = SignatureError;

    fn try_from(raw: RawSignature) -> Result<Self, SignatureError> {
        Signature::new(raw.symbols)
    }
}

impl Signature {
    pub fn new(symbols: Vec<OpSymbol>) -> Result<Self, SignatureError> {
        for (i, sym) in symbols.iter().enumerate() {
            if symbols[..i].iter().any(|s| s.name == sym.name) {
                return Err(SignatureError::DuplicateSymbol(sym.name.clone()));
            }
        }
        Ok(Signature { symbols })
    }

    /// Convenience constructor from `(name, arity)` pairs.
    pub fn from_pairs<S: Into<String>>(
        pairs: impl IntoIterator<Item = (S, usize)>,
    ) -> Result<Self, SignatureError> {
        Signature::new(
            pairs
                .into_iter()
                .map(|(name, arity)| OpSymbol { name: name.into(), arity })
                .collect(),
        )
    }

    pub fn symbols(&self) -> &[OpSymbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn arity(&self, op: usize) -> usize {
        self.symbols[op].arity
    }

    pub fn name(&self, op: usize) -> &str {
        &self.symbols[op].name
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn max_arity(&self) -> Option<usize> {
        self.symbols.iter().map(|s| s.arity).max()
    }

    /// The arity multiset, as a sorted vector. This is the complete
    /// equivalence invariant.
    pub fn arity_multiset(&self) -> Vec<usize> {
        let mut arities: Vec<usize> = self.symbols.iter().map(|s| s.arity).collect();
        arities.sort_unstable();
        arities
    }

    /// Equivalence of signatures: an arity-preserving bijection of symbols
    /// exists, regardless of names or order.
    pub fn is_equivalent_to(&self, other: &Signature) -> bool {
        self.arity_multiset() == other.arity_multiset()
    }
}
