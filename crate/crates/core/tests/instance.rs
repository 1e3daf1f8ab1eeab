use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ccmax::instance::{
    brute_force_opt, evaluate, random_instance, Assignment, CCInstance, Constraint, ConstraintKind, OrPattern,
    ProblemKind,
};
use ccmax::Error;

/// Constraint semantics written out directly, +1 = true.
fn oracle_value(inst: &CCInstance, x: &[i8]) -> f64 {
    inst.constraints()
        .iter()
        .filter(|c| {
            let (a, b) = (x[c.i] == 1, x[c.j] == 1);
            match c.kind {
                ConstraintKind::Xor { parity } => (a != b) == (parity < 0),
                ConstraintKind::Or(OrPattern::Oo) => a || b,
                ConstraintKind::Or(OrPattern::No) => !a || b,
                ConstraintKind::Or(OrPattern::On) => a || !b,
                ConstraintKind::Or(OrPattern::Nn) => !a || !b,
            }
        })
        .map(|c| c.weight)
        .sum()
}

/// Exhaustive search over masks from the top down, independent of the
/// library's combination order.
fn oracle_opt(inst: &CCInstance) -> f64 {
    let n = inst.n();
    (0..1u64 << n)
        .rev()
        .filter(|m| m.count_ones() as usize == inst.k())
        .map(|m| {
            let x: Vec<i8> = (0..n).map(|i| if m >> i & 1 == 1 { 1 } else { -1 }).collect();
            oracle_value(inst, &x)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn problems() -> impl Strategy<Value = ProblemKind> {
    prop_oneof![Just(ProblemKind::Cut), Just(ProblemKind::TwoLin), Just(ProblemKind::TwoSat), Just(ProblemKind::Kvc)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn brute_force_matches_reversed_enumeration(seed in any::<u64>(), problem in problems(), n in 2usize..11, m in 1usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = (seed as usize) % (n + 1);
        let inst = random_instance(problem, n, k, m, &mut rng).unwrap();
        let (a, v) = brute_force_opt(&inst).unwrap();
        prop_assert_eq!(a.count_true(), k);
        prop_assert!((oracle_value(&inst, a.values()) - v).abs() < 1e-12);
        prop_assert!((oracle_opt(&inst) - v).abs() < 1e-9);
    }

    #[test]
    fn evaluate_matches_semantics(seed in any::<u64>(), problem in problems(), n in 2usize..16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(problem, n, n / 2, 3 * n, &mut rng).unwrap();
        let signs: Vec<i8> = (0..n).map(|i| if (seed >> (i % 64)) & 1 == 1 { 1 } else { -1 }).collect();
        let v = evaluate(&inst, &Assignment::new(signs.clone()).unwrap()).unwrap();
        prop_assert!((v - oracle_value(&inst, &signs)).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip(seed in any::<u64>(), problem in problems(), n in 2usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(problem, n, n / 3, 2 * n, &mut rng).unwrap();
        let back = CCInstance::parse(&inst.to_text()).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(back.to_text(), inst.to_text());
    }
}

#[test]
fn sign_convention_on_single_clauses() {
    // x1 ∨ ¬x2 is violated only by x1 = false, x2 = true
    let c = Constraint { i: 0, j: 1, weight: 1.0, kind: ConstraintKind::Or(OrPattern::On) };
    let inst = CCInstance::new(ProblemKind::TwoSat, 2, 1, vec![c]).unwrap();
    let v = |s: &str| evaluate(&inst, &Assignment::parse_sign_string(s).unwrap()).unwrap();
    assert_eq!(v("+-"), 1.0);
    assert_eq!(v("-+"), 0.0);
    assert_eq!(v("++"), 1.0);
    assert_eq!(v("--"), 1.0);
}

#[test]
fn brute_force_refuses_large_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let inst = random_instance(ProblemKind::Cut, 29, 14, 30, &mut rng).unwrap();
    assert!(matches!(brute_force_opt(&inst), Err(Error::Guard(_))));
}

#[test]
fn ties_resolve_to_smallest_sign_string() {
    // only pairs agreeing on x1, x2 satisfy the constraint; several 2-sets tie
    let c = Constraint { i: 0, j: 1, weight: 1.0, kind: ConstraintKind::Xor { parity: 1 } };
    let inst = CCInstance::new(ProblemKind::TwoLin, 4, 2, vec![c]).unwrap();
    let (a, v) = brute_force_opt(&inst).unwrap();
    assert_eq!(v, 1.0);
    // lexicographic over sign vectors with -1 < +1
    let best: Vec<Vec<i8>> = (0..16u32)
        .filter(|m| m.count_ones() == 2)
        .map(|m| (0..4).map(|i| if m >> i & 1 == 1 { 1 } else { -1 }).collect::<Vec<i8>>())
        .filter(|x| oracle_value(&inst, x) == 1.0)
        .collect();
    assert_eq!(a.values(), best.iter().min().unwrap().as_slice());
    assert_eq!(a.to_sign_string(), "--++");
}

#[test]
fn parse_reports_line_numbers() {
    let bad = "ccmax v1\nproblem cut\nvars 3\ncard 1\nc 1 2 1 x-\nc 1 9 1 x-\n";
    match CCInstance::parse(bad) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
        other => panic!("unexpected {other:?}"),
    }
    let wrong_tag = "ccmax v1\nproblem cut\nvars 3\ncard 1\nc 1 2 1 oo\n";
    assert!(CCInstance::parse(wrong_tag).is_err());
    assert!(CCInstance::parse("ccmax v1\nproblem cut\nvars 3\ncard 1\n").is_err());
}
