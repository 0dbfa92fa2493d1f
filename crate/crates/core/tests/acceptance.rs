//! Acceptance gate: ten end-to-end criteria, each a separate test that
//! prints one PASS line. Random inputs come from fixed-seed generators so
//! runs are reproducible; every derived value is checked against an
//! independent route (exhaustive scan, brute-force enumeration, pointwise
//! recomputation, or a second fragment).

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ualg::clone::OperationTable;
use ualg::finalg::{is_homomorphism, FiniteAlgebra};
use ualg::functor_probe::{
    all_endos_mono, every_epi_has_section, free_rank1_constants_only, hom_set_bijection,
    naturality_check,
};
use ualg::recovery::{
    recover_type, recover_type_at, representative_essential_rank, verify_roundtrip,
    ElementHandle, FreeAlgebraOracle, DEFAULT_FRAGMENT_BUDGET,
};
use ualg::signature::Signature;
use ualg::term::{dependence_witness, enumerate_terms, Basis, Term};

fn random_signature(rng: &mut ChaCha8Rng) -> Signature {
    let count = rng.gen_range(1..=6);
    Signature::from_pairs((0..count).map(|i| (format!("s{i}"), rng.gen_range(0..=3usize))))
        .unwrap()
}

fn random_algebra(rng: &mut ChaCha8Rng, sig: &Signature, carrier: usize) -> FiniteAlgebra {
    let tables = (0..sig.len())
        .map(|op| {
            let len = carrier.pow(sig.arity(op) as u32);
            (0..len).map(|_| rng.gen_range(0..carrier)).collect()
        })
        .collect();
    FiniteAlgebra::from_tables(sig.clone(), carrier, tables).unwrap()
}

fn random_term(rng: &mut ChaCha8Rng, sig: &Signature, basis: usize, depth: usize) -> Term {
    if depth == 0 || sig.is_empty() || rng.gen_bool(0.3) {
        return Term::Var(rng.gen_range(0..basis));
    }
    let op = rng.gen_range(0..sig.len());
    let args = (0..sig.arity(op))
        .map(|_| random_term(rng, sig, basis, depth - 1))
        .collect();
    Term::App(op, args)
}

#[test]
fn criterion_01_roundtrip_on_random_signatures() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    for i in 0..100 {
        let sig = random_signature(&mut rng);
        assert!(
            verify_roundtrip(&sig, 2).unwrap(),
            "round-trip failed for signature {i}: {:?}",
            sig.arity_multiset()
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}, bound is 30s");
    println!("criterion 01 (100 random signatures recover their arity multiset in {elapsed:?}): PASS");
}

#[test]
fn criterion_02_inequivalent_signatures_separated() {
    let explicit = [
        (vec![("f", 2)], vec![("g", 1), ("h", 1)]),
        (vec![("c", 0)], vec![]),
        (vec![("f", 2), ("c", 0)], vec![("f", 2), ("c", 0), ("d", 0)]),
        (vec![("t", 3)], vec![("f", 2), ("g", 2)]),
    ];
    for (left, right) in explicit {
        let l = Signature::from_pairs(left).unwrap();
        let r = Signature::from_pairs(right).unwrap();
        assert!(!l.is_equivalent_to(&r));
        let rl = recover_type(&l, 2).unwrap();
        let rr = recover_type(&r, 2).unwrap();
        assert_ne!(rl.arities(), rr.arities());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut separated = 0;
    while separated < 50 {
        let a = random_signature(&mut rng);
        let b = random_signature(&mut rng);
        if a.arity_multiset() == b.arity_multiset() {
            continue;
        }
        let ra = recover_type(&a, 2).unwrap();
        let rb = recover_type(&b, 2).unwrap();
        assert_eq!(ra.arities(), a.arity_multiset(), "left failed to round-trip");
        assert_eq!(rb.arities(), b.arity_multiset(), "right failed to round-trip");
        assert_ne!(ra.arities(), rb.arities());
        separated += 1;
    }
    println!("criterion 02 (4 explicit + 50 random inequivalent pairs separated): PASS");
}

#[test]
fn criterion_03_minimal_support_matches_exhaustive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for case in 0..200 {
        let carrier = rng.gen_range(1..=3usize);
        let arity = rng.gen_range(0..=3usize);
        let values = (0..carrier.pow(arity as u32))
            .map(|_| rng.gen_range(0..carrier))
            .collect();
        let table = OperationTable::new(arity, carrier, values).unwrap();

        let subsets: Vec<BTreeSet<usize>> = (0..1usize << arity)
            .map(|mask| (0..arity).filter(|c| mask >> c & 1 == 1).collect())
            .collect();
        let supports: Vec<&BTreeSet<usize>> =
            subsets.iter().filter(|s| table.is_support(s)).collect();

        // Exhaustive route: the smallest support, which must be contained
        // in every support for minimality to be well defined.
        let least = supports
            .iter()
            .min_by_key(|s| s.len())
            .copied()
            .expect("full coordinate set is always a support");
        assert_eq!(&table.minimal_support(), least, "case {case}");
        assert_eq!(table.essential_rank(), least.len(), "case {case}");
        for s in &supports {
            assert!(least.is_subset(s), "case {case}: non-unique minimum");
        }

        // Filter laws: closed under superset and intersection.
        for s in &supports {
            for t in &subsets {
                if s.is_subset(t) {
                    assert!(table.is_support(t), "case {case}: superset closure");
                }
            }
        }
        for s in &supports {
            for t in &supports {
                let meet: BTreeSet<usize> = s.intersection(t).copied().collect();
                assert!(table.is_support(&meet), "case {case}: intersection closure");
            }
        }
    }
    println!("criterion 03 (200 random tables: minimal support equals exhaustive scan, filter laws hold): PASS");
}

/// Oracle over a single element whose dependence answers come from
/// substitution witnesses instead of variable containment.
struct SingleTerm<'a> {
    sig: &'a Signature,
    term: &'a Term,
    basis: Basis,
}

impl FreeAlgebraOracle for SingleTerm<'_> {
    fn basis_size(&self) -> usize {
        self.basis.size()
    }

    fn elements(&self) -> Vec<ElementHandle> {
        vec![ElementHandle::new(0)]
    }

    fn is_basis_element(&self, _h: ElementHandle) -> bool {
        false
    }

    fn maps_onto(&self, _from: ElementHandle, _to: ElementHandle) -> bool {
        true
    }

    fn depends_only_on(&self, _h: ElementHandle, coords: &BTreeSet<usize>) -> bool {
        dependence_witness(self.sig, self.term, coords, self.basis).is_none()
    }
}

#[test]
fn criterion_04_dependence_witnesses_match_variable_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let basis = Basis::new(3);
    for case in 0..200 {
        let sig = random_signature(&mut rng);
        let term = random_term(&mut rng, &sig, basis.size(), 2);
        let vars = term.vars();

        let oracle = SingleTerm { sig: &sig, term: &term, basis };
        let rank = representative_essential_rank(&oracle, ElementHandle::new(0));
        assert_eq!(rank, vars.len(), "case {case}: rank through witnesses");

        // A separating witness for every proper subset of the variables,
        // and none once all variables are pinned.
        let var_list: Vec<usize> = vars.iter().copied().collect();
        for mask in 0..(1usize << var_list.len()) - 1 {
            let agree: BTreeSet<usize> = var_list
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &v)| v)
                .collect();
            let (s1, s2) = dependence_witness(&sig, &term, &agree, basis)
                .unwrap_or_else(|| panic!("case {case}: no witness for {agree:?}"));
            assert_ne!(s1.apply(&term), s2.apply(&term), "case {case}: witness separates");
            for &v in &agree {
                assert_eq!(s1.image(v), s2.image(v), "case {case}: witness agrees on {v}");
            }
        }
        assert!(dependence_witness(&sig, &term, &vars, basis).is_none(), "case {case}");
    }
    println!("criterion 04 (200 random terms: essential rank equals variable count, witnesses check out): PASS");
}

#[test]
fn criterion_05_term_tables_compose_pointwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let basis = Basis::new(2);
    let mut composites = 0;
    for _ in 0..20 {
        let sig = loop {
            let s = random_signature(&mut rng);
            if (0..s.len()).any(|op| s.arity(op) >= 1) {
                break s;
            }
        };
        let carrier = rng.gen_range(2..=3);
        let alg = random_algebra(&mut rng, &sig, carrier);
        for _ in 0..10 {
            let op = loop {
                let op = rng.gen_range(0..sig.len());
                if sig.arity(op) >= 1 {
                    break op;
                }
            };
            let subterms: Vec<Term> = (0..sig.arity(op))
                .map(|_| random_term(&mut rng, &sig, basis.size(), 1))
                .collect();
            let composite = Term::App(op, subterms.clone());

            let whole = alg.term_operation_table(&composite, basis).unwrap();
            let parts: Vec<OperationTable> = subterms
                .iter()
                .map(|s| alg.term_operation_table(s, basis).unwrap())
                .collect();
            for idx in 0..whole.values().len() {
                let args: Vec<usize> = parts.iter().map(|p| p.values()[idx]).collect();
                assert_eq!(
                    whole.values()[idx],
                    alg.op_value(op, &args),
                    "composite {composite:?} at index {idx}"
                );
            }
            composites += 1;
        }
    }
    assert!(composites >= 200);
    println!("criterion 05 (20 random algebras, {composites} composite terms evaluate pointwise): PASS");
}

#[test]
fn criterion_06_hom_search_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for case in 0..50 {
        let sig = random_signature(&mut rng);
        let ca = rng.gen_range(1..=3);
        let a = random_algebra(&mut rng, &sig, ca);
        let cb = rng.gen_range(1..=3);
        let b = random_algebra(&mut rng, &sig, cb);

        let found: Vec<Vec<usize>> = a.homomorphisms_to(&b).unwrap().collect();

        let mut brute: Vec<Vec<usize>> = Vec::new();
        let total = b.carrier().pow(a.carrier() as u32);
        for code in 0..total {
            let mut map = vec![0usize; a.carrier()];
            let mut rest = code;
            for slot in (0..a.carrier()).rev() {
                map[slot] = rest % b.carrier();
                rest /= b.carrier();
            }
            if is_homomorphism(&a, &b, &map) {
                brute.push(map);
            }
        }
        assert_eq!(found, brute, "case {case}");
    }
    println!("criterion 06 (50 random algebra pairs: hom search equals brute-force filter): PASS");
}

#[test]
fn criterion_07_hom_sets_track_carriers_naturally() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut homs_checked = 0;
    for case in 0..20 {
        let sig = random_signature(&mut rng);
        let ca = rng.gen_range(1..=3);
        let a = random_algebra(&mut rng, &sig, ca);
        let cb = rng.gen_range(1..=3);
        let b = random_algebra(&mut rng, &sig, cb);

        assert_eq!(hom_set_bijection(&a).len(), a.carrier(), "case {case}");
        assert_eq!(hom_set_bijection(&b).len(), b.carrier(), "case {case}");

        // Exhaustive depth-2 samples when they fit; otherwise every
        // depth-1 term plus random depth-2 composites.
        let samples = match enumerate_terms(&sig, Basis::new(1), 2, 10_000) {
            Ok(v) => v,
            Err(_) => {
                let mut v = enumerate_terms(&sig, Basis::new(1), 1, 10_000).unwrap();
                v.extend((0..20).map(|_| random_term(&mut rng, &sig, 1, 2)));
                v
            }
        };
        for h in a.homomorphisms_to(&b).unwrap() {
            assert!(
                naturality_check(&a, &b, &h, &samples).unwrap(),
                "case {case}: hom {h:?} not natural"
            );
            homs_checked += 1;
        }
        // Endomorphisms always include the identity, so every case
        // contributes at least one hom.
        for h in a.homomorphisms_to(&a).unwrap() {
            assert!(
                naturality_check(&a, &a, &h, &samples).unwrap(),
                "case {case}: endo {h:?} not natural"
            );
            homs_checked += 1;
        }
    }
    assert!(homs_checked >= 20);
    println!("criterion 07 (20 random pairs: hom-set sizes match carriers, {homs_checked} homs natural): PASS");
}

#[test]
fn criterion_08_free_point_probe() {
    let sig = Signature::from_pairs([("c", 0)]).unwrap();
    let free = free_rank1_constants_only(&sig).unwrap();

    let endo = all_endos_mono(&free);
    assert!(!endo.holds);
    assert_eq!(endo.witness, Some(vec![0, 0]), "generator folds onto the constant");

    let mut pool = Vec::new();
    for carrier in 1..=3 {
        for c_val in 0..carrier {
            pool.push(
                FiniteAlgebra::from_tables(sig.clone(), carrier, vec![vec![c_val]]).unwrap(),
            );
        }
    }
    let epi = every_epi_has_section(&free, &pool).unwrap();
    assert!(epi.holds, "witness: {:?}", epi.witness);
    println!("criterion 08 (rank-1 free point: every surjection splits, generator collapse is non-injective): PASS");
}

#[test]
fn criterion_09_recovery_stable_under_growth() {
    let mut rng = ChaCha8Rng::seed_from_u64(101); // same signature stream as criterion 01
    for i in 0..100 {
        let sig = random_signature(&mut rng);
        let base = recover_type(&sig, 2).unwrap();
        let deeper = recover_type(&sig, 3).unwrap();
        assert_eq!(base.arities(), deeper.arities(), "signature {i}: depth bump changed answer");
        let wider =
            recover_type_at(&sig, base.basis() + 1, 2, DEFAULT_FRAGMENT_BUDGET).unwrap();
        assert_eq!(base.arities(), wider.arities(), "signature {i}: basis bump changed answer");
    }
    println!("criterion 09 (100 signatures: answers stable under depth and basis growth): PASS");
}

fn run_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ualg"))
        .args(args)
        .current_dir(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests"))
        .output()
        .expect("binary runs")
}

#[test]
fn criterion_10_cli_output_is_byte_deterministic() {
    let cases: &[&[&str]] = &[
        &["equiv", "--left", "fixtures/fgc.sig", "--right", "fixtures/perm.sig"],
        &["recover", "--sig", "fixtures/fgc.sig", "--depth", "2"],
        &["rank", "--sig", "fixtures/fgc.sig"],
        &["support", "--alg", "fixtures/xor.json", "--term", "(f x0 x1)", "--basis", "2"],
        &["clone", "--alg", "fixtures/xor.json", "--basis", "2", "--depth", "2"],
        &["homs", "--from", "fixtures/xor.json", "--to", "fixtures/xor.json", "--list"],
        &["probe-free", "--sig", "fixtures/c.sig", "--pool", "fixtures/pool"],
        &["eval", "--alg", "fixtures/xor.json", "--term", "(f x0 (f x0 x1))", "--assign", "x0=1,x1=0"],
    ];
    for args in cases {
        let first = run_cli(args);
        let second = run_cli(args);
        assert!(!first.stdout.is_empty(), "{args:?} produced no output");
        assert!(first.stdout.ends_with(b"\n"), "{args:?} output not newline-terminated");
        assert_eq!(first.stdout, second.stdout, "{args:?} nondeterministic stdout");
        assert_eq!(first.status.code(), second.status.code(), "{args:?} nondeterministic exit");
        assert_eq!(
            first.stdout.iter().filter(|&&b| b == b'\n').count(),
            1,
            "{args:?} not a single line"
        );
    }
    println!("criterion 10 (8 CLI invocations byte-identical across runs): PASS");
}
