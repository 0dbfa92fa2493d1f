//! Recovers a signature's arity multiset from a finite fragment of its free
//! algebra, using only data visible to category-level probes: which elements
//! are basis elements, which elements some endomorphism sends to which, and
//! on which basis coordinates an element's induced operation depends.
//!
//! The pipeline never looks inside elements. Everything runs through the
//! [`FreeAlgebraOracle`] trait; the term-backed implementation answers
//! `maps_onto` by one-way matching and `depends_only_on` by variable
//! containment, but any oracle with the same laws (reflexive and transitive
//! `maps_onto`, superset-monotone `depends_only_on`) yields the same
//! classes, representatives, and ranks.
//!
//! Fragments are enumeration prefixes: all terms to some effective depth.
//! When the requested depth does not fit the term budget the builder steps
//! the depth down (never below 1, so every symbol stays witnessed); class
//! structure at a stabilized basis is unaffected because depth-1 terms
//! already include a most-general element per symbol.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::signature::Signature;
use crate::term::{enumerate_term_levels, match_term, Basis, Term, TermError};

/// Default ceiling on fragment size. Class computation costs up to
/// `|Y|^2` matching queries, which keeps desk-scale runs comfortably fast
/// at this size.
pub const DEFAULT_FRAGMENT_BUDGET: usize = 5_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RecoveryError {
    #[error("no class element maps onto every other; basis or depth too small")]
    NoGeneralRepresentative,
    #[error("term fragment exceeds budget of {0} terms even at depth 1")]
    CapExceeded(usize),
    #[error("fragment depth must be at least 1")]
    DepthTooSmall,
}

/// Opaque id of one free-algebra element, valid for the oracle that issued
/// it. Ids follow enumeration order but carry no structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementHandle(usize);

impl ElementHandle {
    pub fn new(index: usize) -> ElementHandle {
        ElementHandle(index)
    }

    pub fn index(self) -> usize {
        self.0
    }
}

/// The category-level view of a free-algebra fragment.
pub trait FreeAlgebraOracle {
    fn basis_size(&self) -> usize;

    /// Every element, in the oracle's fixed order.
    fn elements(&self) -> Vec<ElementHandle>;

    fn is_basis_element(&self, h: ElementHandle) -> bool;

    /// Whether some endomorphism of the free algebra sends `from` to `to`.
    /// Reflexive and transitive.
    fn maps_onto(&self, from: ElementHandle, to: ElementHandle) -> bool;

    /// Whether the element's induced operation factors through the given
    /// basis coordinates. Monotone under superset; always true on the full
    /// coordinate set.
    fn depends_only_on(&self, h: ElementHandle, coords: &BTreeSet<usize>) -> bool;
}

/// Term-backed oracle: the enumeration prefix of the free algebra on
/// `basis` variables, to the largest depth whose term count fits the
/// budget.
pub struct TermFragment {
    sig: Signature,
    basis: Basis,
    depth: usize,
    terms: Vec<Term>,
}

impl TermFragment {
    pub fn build(
        sig: &Signature,
        basis: Basis,
        depth: usize,
        budget: usize,
    ) -> Result<TermFragment, RecoveryError> {
        if depth == 0 {
            return Err(RecoveryError::DepthTooSmall);
        }
        let mut effective = depth;
        loop {
            match enumerate_term_levels(sig, basis, effective, budget) {
                Ok(levels) => {
                    return Ok(TermFragment {
                        sig: sig.clone(),
                        basis,
                        depth: effective,
                        terms: levels.into_iter().flatten().collect(),
                    });
                }
                Err(TermError::CapExceeded(_)) if effective > 1 => effective -= 1,
                Err(_) => return Err(RecoveryError::CapExceeded(budget)),
            }
        }
    }

    /// Depth actually enumerated; at most the requested depth.
    pub fn effective_depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The term behind a handle. Diagnostics and tests only; recovery code
    /// must not look here.
    pub fn term(&self, h: ElementHandle) -> &Term {
        &self.terms[h.0]
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }
}

impl FreeAlgebraOracle for TermFragment {
    fn basis_size(&self) -> usize {
        self.basis.size()
    }

    fn elements(&self) -> Vec<ElementHandle> {
        (0..self.terms.len()).map(ElementHandle).collect()
    }

    fn is_basis_element(&self, h: ElementHandle) -> bool {
        self.terms[h.0].is_var()
    }

    fn maps_onto(&self, from: ElementHandle, to: ElementHandle) -> bool {
        match_term(&self.terms[from.0], &self.terms[to.0], self.basis).is_some()
    }

    fn depends_only_on(&self, h: ElementHandle, coords: &BTreeSet<usize>) -> bool {
        // The induced operation of a term moves exactly with its variables.
        self.terms[h.0].vars().is_subset(coords)
    }
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Partition of the non-basis elements into the equivalence closure of the
/// `maps_onto` relation. Classes are listed by smallest member, members in
/// handle order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SClasses {
    classes: Vec<Vec<ElementHandle>>,
}

impl SClasses {
    pub fn classes(&self) -> &[Vec<ElementHandle>] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Connected components of the symmetric closure of `maps_onto` over the
/// non-basis elements. Pairs already connected are not queried again; that
/// skips only edges inside a component, which cannot change the partition.
pub fn compute_classes<O: FreeAlgebraOracle>(oracle: &O) -> SClasses {
    let ys: Vec<ElementHandle> = oracle
        .elements()
        .into_iter()
        .filter(|&h| !oracle.is_basis_element(h))
        .collect();
    let mut uf = UnionFind::new(ys.len());
    for i in 0..ys.len() {
        for j in (i + 1)..ys.len() {
            if uf.find(i) == uf.find(j) {
                continue;
            }
            if oracle.maps_onto(ys[i], ys[j]) || oracle.maps_onto(ys[j], ys[i]) {
                uf.union(i, j);
            }
        }
    }

    let mut order: Vec<usize> = Vec::new();
    let mut classes: Vec<Vec<ElementHandle>> = Vec::new();
    for (i, &y) in ys.iter().enumerate() {
        let root = uf.find(i);
        match order.iter().position(|&r| r == root) {
            Some(c) => classes[c].push(y),
            None => {
                order.push(root);
                classes.push(vec![y]);
            }
        }
    }
    SClasses { classes }
}

/// The first class member that maps onto every member. Such an element
/// represents the class's head symbol applied to distinct variables; its
/// absence signals a fragment too small for this class.
pub fn most_general_representative<O: FreeAlgebraOracle>(
    oracle: &O,
    class: &[ElementHandle],
) -> Result<ElementHandle, RecoveryError> {
    class
        .iter()
        .copied()
        .find(|&h| class.iter().all(|&z| oracle.maps_onto(h, z)))
        .ok_or(RecoveryError::NoGeneralRepresentative)
}

/// Size of the minimal coordinate set the element's operation factors
/// through, found by dropping coordinates one at a time. Monotonicity of
/// `depends_only_on` makes the greedy drop exact.
pub fn representative_essential_rank<O: FreeAlgebraOracle>(
    oracle: &O,
    h: ElementHandle,
) -> usize {
    let mut support: BTreeSet<usize> = (0..oracle.basis_size()).collect();
    for v in 0..oracle.basis_size() {
        let mut candidate = support.clone();
        candidate.remove(&v);
        if oracle.depends_only_on(h, &candidate) {
            support = candidate;
        }
    }
    support.len()
}

/// One recovered class: how many fragment elements it holds, its
/// most-general representative, and that representative's essential rank
/// (the recovered arity).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassReport {
    pub size: usize,
    pub rank: usize,
    pub representative: ElementHandle,
}

/// Classes, representatives and ranks of one fragment, computed purely
/// through oracle queries.
pub fn analyze_oracle<O: FreeAlgebraOracle>(
    oracle: &O,
) -> Result<Vec<ClassReport>, RecoveryError> {
    compute_classes(oracle)
        .classes()
        .iter()
        .map(|class| {
            let representative = most_general_representative(oracle, class)?;
            Ok(ClassReport {
                size: class.len(),
                rank: representative_essential_rank(oracle, representative),
                representative,
            })
        })
        .collect()
}

/// Result of recovery: the arity multiset read off one fragment, with the
/// per-class evidence and the fragment parameters used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveredType {
    arities: Vec<usize>,
    basis: usize,
    depth: usize,
    classes: Vec<ClassReport>,
}

impl RecoveredType {
    /// Recovered arity multiset, sorted ascending.
    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn basis(&self) -> usize {
        self.basis
    }

    /// Effective fragment depth of the final iteration.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn classes(&self) -> &[ClassReport] {
        &self.classes
    }

    /// The recovered data as a signature with synthetic names.
    pub fn to_signature(&self) -> Signature {
        Signature::from_pairs(
            self.arities
                .iter()
                .enumerate()
                .map(|(i, &a)| (format!("op{i}"), a)),
        )
        .expect("synthetic names are distinct")
    }
}

/// Single-shot recovery at a fixed basis size.
pub fn recover_type_at(
    sig: &Signature,
    basis: usize,
    depth: usize,
    budget: usize,
) -> Result<RecoveredType, RecoveryError> {
    let fragment = TermFragment::build(sig, Basis::new(basis), depth, budget)?;
    let classes = analyze_oracle(&fragment)?;
    let mut arities: Vec<usize> = classes.iter().map(|c| c.rank).collect();
    arities.sort_unstable();
    Ok(RecoveredType {
        arities,
        basis,
        depth: fragment.effective_depth(),
        classes,
    })
}

/// Adaptive recovery: starts from a single basis variable and doubles the
/// basis whenever the fragment shows it may be too small — some class has
/// no most-general representative, or a representative's rank reaches the
/// basis size (a larger basis might reveal a larger rank). On stabilization
/// every rank is below the basis size, which guarantees the basis held
/// enough distinct variables for every symbol.
pub fn recover_type_with_budget(
    sig: &Signature,
    depth: usize,
    budget: usize,
) -> Result<RecoveredType, RecoveryError> {
    if depth == 0 {
        return Err(RecoveryError::DepthTooSmall);
    }
    let mut basis = 1usize;
    loop {
        match recover_type_at(sig, basis, depth, budget) {
            Ok(recovered) => {
                if recovered.classes().iter().any(|c| c.rank == basis) {
                    basis *= 2;
                    continue;
                }
                return Ok(recovered);
            }
            Err(RecoveryError::NoGeneralRepresentative) => {
                basis *= 2;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Adaptive recovery with the default fragment budget.
pub fn recover_type(sig: &Signature, depth: usize) -> Result<RecoveredType, RecoveryError> {
    recover_type_with_budget(sig, depth, DEFAULT_FRAGMENT_BUDGET)
}

/// Recovers the type and compares it with the original arity multiset.
pub fn verify_roundtrip(sig: &Signature, depth: usize) -> Result<bool, RecoveryError> {
    Ok(recover_type(sig, depth)?.arities() == sig.arity_multiset())
}
