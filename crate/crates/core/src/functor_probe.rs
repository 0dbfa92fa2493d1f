//! Category-level probes that separate algebra categories without reading
//! carriers or operation tables from the outside: whether every surjection
//! onto a fixed object splits, whether every self-map of it is injective,
//! and whether hom-sets out of the rank-1 free object track carriers
//! naturally.
//!
//! Over a constants-only type the rank-1 free algebra is finite, so these
//! probes run exhaustively. Its surjections always split (any choice of
//! preimages fixing the constants is a homomorphism), while its self-map
//! that folds the generator onto a constant is not injective; categories
//! whose free objects lack one of these traits cannot be equivalent to it.

use serde::Serialize;
use thiserror::Error;

use crate::finalg::{Assignment, EvalError, FiniteAlgebra};
use crate::signature::Signature;
use crate::term::Term;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProbeError {
    #[error("symbol {symbol} has arity {arity}; the rank-1 free algebra is finite only for constants-only signatures")]
    NonConstantSymbol { symbol: String, arity: usize },
}

/// The rank-1 free algebra over a constants-only signature: one element per
/// constant (in symbol order), then the generator.
pub fn free_rank1_constants_only(sig: &Signature) -> Result<FiniteAlgebra, ProbeError> {
    if let Some(op) = (0..sig.len()).find(|&op| sig.arity(op) > 0) {
        return Err(ProbeError::NonConstantSymbol {
            symbol: sig.name(op).to_string(),
            arity: sig.arity(op),
        });
    }
    let k = sig.len();
    let tables: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
    Ok(FiniteAlgebra::from_tables(sig.clone(), k + 1, tables)
        .expect("constant tables are valid by construction"))
}

/// Outcome of the split-surjection probe, with the first failing
/// surjection when the property fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EpiSectionReport {
    pub holds: bool,
    pub witness: Option<EpiWitness>,
}

/// A surjection onto the probed object that no homomorphism back sections.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EpiWitness {
    pub pool_index: usize,
    pub map: Vec<usize>,
}

/// Checks that every surjective homomorphism from a pool algebra onto
/// `target` has a section: a homomorphism back whose composite with the
/// surjection is the identity.
pub fn every_epi_has_section(
    target: &FiniteAlgebra,
    pool: &[FiniteAlgebra],
) -> Result<EpiSectionReport, crate::finalg::AlgebraError> {
    for (pool_index, source) in pool.iter().enumerate() {
        let sections: Vec<Vec<usize>> = target.homomorphisms_to(source)?.collect();
        for h in source.homomorphisms_to(target)? {
            if !is_surjective(&h, target.carrier()) {
                continue;
            }
            let sectioned = sections
                .iter()
                .any(|g| (0..target.carrier()).all(|y| h[g[y]] == y));
            if !sectioned {
                return Ok(EpiSectionReport {
                    holds: false,
                    witness: Some(EpiWitness { pool_index, map: h }),
                });
            }
        }
    }
    Ok(EpiSectionReport { holds: true, witness: None })
}

fn is_surjective(map: &[usize], codomain: usize) -> bool {
    let mut hit = vec![false; codomain];
    for &v in map {
        hit[v] = true;
    }
    hit.into_iter().all(|b| b)
}

/// Outcome of the injective-endomorphism probe, with the first
/// non-injective self-map when the property fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonoReport {
    pub holds: bool,
    pub witness: Option<Vec<usize>>,
}

/// Checks that every endomorphism of the algebra is injective.
pub fn all_endos_mono(alg: &FiniteAlgebra) -> MonoReport {
    let endos = alg
        .homomorphisms_to(alg)
        .expect("an algebra shares its own signature");
    for h in endos {
        if !is_injective(&h) {
            return MonoReport { holds: false, witness: Some(h) };
        }
    }
    MonoReport { holds: true, witness: None }
}

fn is_injective(map: &[usize]) -> bool {
    let mut seen = vec![false; map.len()];
    for &v in map {
        if v >= map.len() || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

/// A homomorphism out of the rank-1 free algebra, identified by the
/// generator's image. Composing with a term is evaluation at that image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorHom {
    image: usize,
}

impl GeneratorHom {
    pub fn image(&self) -> usize {
        self.image
    }

    /// The image of a one-variable term under this homomorphism.
    pub fn apply(&self, alg: &FiniteAlgebra, term: &Term) -> Result<usize, EvalError> {
        alg.evaluate(term, &Assignment::new(vec![self.image]))
    }
}

/// The bijection between homomorphisms out of the rank-1 free algebra and
/// carrier elements: one homomorphism per element.
pub fn hom_set_bijection(alg: &FiniteAlgebra) -> Vec<GeneratorHom> {
    (0..alg.carrier()).map(|image| GeneratorHom { image }).collect()
}

/// Checks that the hom-set bijection is natural along `map`: for every
/// generator image and every sample term, pushing the evaluation through
/// `map` agrees with evaluating at the mapped image. Holds exactly when
/// `map` commutes with the sampled term operations.
pub fn naturality_check(
    a: &FiniteAlgebra,
    b: &FiniteAlgebra,
    map: &[usize],
    samples: &[Term],
) -> Result<bool, EvalError> {
    for hom in hom_set_bijection(a) {
        for term in samples {
            let through_a = map[hom.apply(a, term)?];
            let through_b =
                GeneratorHom { image: map[hom.image()] }.apply(b, term)?;
            if through_a != through_b {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
