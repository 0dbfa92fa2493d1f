//! Finitary operations on a finite carrier: support analysis, the
//! term-generated clone fragment of an algebra, and a coarse rank estimate
//! for the class of algebras over a signature.
//!
//! A support of a `k`-ary operation is a coordinate set it factors through.
//! Supports of an operation on a nonempty carrier are closed under superset
//! and intersection, so a unique minimal support exists: the essential
//! coordinates. The essential rank is its size.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::finalg::{EvalError, FiniteAlgebra};
use crate::signature::Signature;
use crate::term::{enumerate_terms, Basis, Term, TermError};

/// Hard ceiling on flat table sizes (`carrier^arity`).
pub const MAX_TABLE_ENTRIES: usize = 1 << 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CloneError {
    #[error("carrier must be nonempty")]
    EmptyCarrier,
    #[error("operation table needs {expected} entries, found {found}")]
    TableLength { expected: usize, found: usize },
    #[error("table entry {value} outside carrier of size {carrier}")]
    EntryOutOfRange { value: usize, carrier: usize },
    #[error("table of arity {arity} over carrier {carrier} exceeds {MAX_TABLE_ENTRIES} entries")]
    TableTooLarge { arity: usize, carrier: usize },
    #[error(transparent)]
    Enumeration(#[from] TermError),
    #[error(transparent)]
    Evaluation(#[from] EvalError),
}

/// A `k`-ary operation on `{0,..,n-1}` as a flat value vector, indexed with
/// the leftmost argument most significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OperationTable {
    arity: usize,
    carrier: usize,
    values: Vec<usize>,
}

impl OperationTable {
    pub fn new(arity: usize, carrier: usize, values: Vec<usize>) -> Result<Self, CloneError> {
        if carrier == 0 {
            return Err(CloneError::EmptyCarrier);
        }
        let mut expected = 1usize;
        for _ in 0..arity {
            expected = expected
                .checked_mul(carrier)
                .filter(|&l| l <= MAX_TABLE_ENTRIES)
                .ok_or(CloneError::TableTooLarge { arity, carrier })?;
        }
        if values.len() != expected {
            return Err(CloneError::TableLength { expected, found: values.len() });
        }
        if let Some(&value) = values.iter().find(|&&v| v >= carrier) {
            return Err(CloneError::EntryOutOfRange { value, carrier });
        }
        Ok(OperationTable { arity, carrier, values })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn carrier(&self) -> usize {
        self.carrier
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn value(&self, args: &[usize]) -> usize {
        debug_assert_eq!(args.len(), self.arity);
        self.values[args.iter().fold(0, |acc, &a| acc * self.carrier + a)]
    }

    fn stride(&self, coord: usize) -> usize {
        self.carrier.pow((self.arity - 1 - coord) as u32)
    }

    /// Whether the operation factors through the coordinates in `coords`:
    /// any two argument tuples agreeing there get equal values.
    pub fn is_support(&self, coords: &BTreeSet<usize>) -> bool {
        let coords: Vec<usize> = coords.iter().copied().filter(|&c| c < self.arity).collect();
        // Group tuples by their projection onto `coords` and demand one
        // value per group.
        let mut groups: HashMap<usize, usize> = HashMap::new();
        for (idx, &v) in self.values.iter().enumerate() {
            let key = coords
                .iter()
                .fold(0, |acc, &c| acc * self.carrier + (idx / self.stride(c)) % self.carrier);
            match groups.get(&key) {
                None => {
                    groups.insert(key, v);
                }
                Some(&first) if first == v => {}
                Some(_) => return false,
            }
        }
        true
    }

    /// The essential coordinates: those along which the value changes
    /// somewhere. This is the unique minimal support.
    pub fn minimal_support(&self) -> BTreeSet<usize> {
        let mut essential = BTreeSet::new();
        for c in 0..self.arity {
            let stride = self.stride(c);
            'coord: for idx in 0..self.values.len() {
                if (idx / stride) % self.carrier != 0 {
                    continue;
                }
                for v in 1..self.carrier {
                    if self.values[idx + v * stride] != self.values[idx] {
                        essential.insert(c);
                        break 'coord;
                    }
                }
            }
        }
        essential
    }

    pub fn essential_rank(&self) -> usize {
        self.minimal_support().len()
    }
}

/// One distinct operation of the clone fragment, paired with the first term
/// that generated it in enumeration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CloneEntry {
    pub term: Term,
    pub table: OperationTable,
}

/// The distinct `m`-ary term operations induced by terms of depth at most
/// `depth`, in order of first generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CloneFragment {
    basis: Basis,
    depth: usize,
    entries: Vec<CloneEntry>,
}

impl CloneFragment {
    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn entries(&self) -> &[CloneEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains_table(&self, table: &OperationTable) -> bool {
        self.entries.iter().any(|e| &e.table == table)
    }
}

/// Evaluates every term of depth at most `depth` over `basis` variables to
/// its operation table, keeping one entry per distinct table.
pub fn generate_clone_fragment(
    alg: &FiniteAlgebra,
    basis: Basis,
    depth: usize,
    cap: usize,
) -> Result<CloneFragment, CloneError> {
    let terms = enumerate_terms(alg.signature(), basis, depth, cap)?;
    let mut seen: HashMap<Vec<usize>, ()> = HashMap::new();
    let mut entries = Vec::new();
    for term in terms {
        let table = alg.term_operation_table(&term, basis)?;
        if seen.insert(table.values().to_vec(), ()).is_none() {
            entries.push(CloneEntry { term, table });
        }
    }
    Ok(CloneFragment { basis, depth, entries })
}

/// How many variables term operations over a signature can genuinely need.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankEstimate {
    Finite(usize),
    CountablyInfinite,
}

/// Constants-only signatures (or empty ones) need no variables; purely
/// unary ones never combine two; any symbol of arity >= 2 nests into terms
/// of unbounded essential rank.
pub fn variety_rank_estimate(sig: &Signature) -> RankEstimate {
    match sig.max_arity() {
        None | Some(0) => RankEstimate::Finite(0),
        Some(1) => RankEstimate::Finite(1),
        Some(_) => RankEstimate::CountablyInfinite,
    }
}
