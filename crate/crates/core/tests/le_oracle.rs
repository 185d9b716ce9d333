mod common;

use foleval::metrics::logic::{le_outcome, le_score, LeConfig, LeMode};
use foleval::parse_str;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn d2() -> LeConfig {
    LeConfig {
        domain_size: 2,
        ..LeConfig::default()
    }
}

#[test]
fn matches_exhaustive_enumerator_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let (g, c) = common::le_pair(&mut rng);
        assert!(common::ground_atoms(&g, &c, 2).len() <= 10);
        let (agree, total) = common::agreement_oracle(&g, &c, 2);
        let out = le_outcome(&g, &c, &d2()).unwrap();
        assert_eq!(out.mode, LeMode::Exhaustive);
        assert_eq!((out.agreeing, out.interpretations), (agree, total), "{g:?} vs {c:?}");
        assert_eq!(out.score, agree as f64 / total as f64);
    }
}

#[test]
fn quantifier_swap_by_hand() {
    let g = parse_str("∀x (P(x) → Q(x))").unwrap();
    let c = parse_str("∃x (P(x) → Q(x))").unwrap();
    assert_eq!(common::agreement_oracle(&g, &c, 2), (10, 16));
    assert_eq!(le_score(&g, &c, &d2()).unwrap(), 10.0 / 16.0);
}

#[test]
fn classical_equivalences_score_one() {
    let pairs = [
        ("¬(P ∧ Q)", "¬P ∨ ¬Q"),
        ("¬(P(alice) ∨ Q(bob))", "¬P(alice) ∧ ¬Q(bob)"),
        ("¬∀x P(x)", "∃x ¬P(x)"),
        ("P(alice) → Q(alice)", "¬Q(alice) → ¬P(alice)"),
        ("∀x (P(x) → Q(x))", "∀x (¬Q(x) → ¬P(x))"),
        ("P ∧ Q", "Q ∧ P"),
        ("∀x (P(x) ∨ R(x, alice))", "∀x (R(x, alice) ∨ P(x))"),
        ("P → Q", "¬P ∨ Q"),
        ("P ⊕ Q", "¬(P ↔ Q)"),
    ];
    for (a, b) in pairs {
        let (fa, fb) = (parse_str(a).unwrap(), parse_str(b).unwrap());
        for d in 1..=3 {
            let cfg = LeConfig {
                domain_size: d,
                ..LeConfig::default()
            };
            assert_eq!(le_score(&fa, &fb, &cfg).unwrap(), 1.0, "{a} vs {b} at d={d}");
        }
        assert_eq!(
            common::agreement_oracle(&fa, &fb, 2).0,
            common::agreement_oracle(&fa, &fb, 2).1
        );
    }
}

#[test]
fn negation_disagrees_everywhere() {
    let g = parse_str("∀x (P(x) → Q(x))").unwrap();
    let c = parse_str("¬∀x (P(x) → Q(x))").unwrap();
    assert_eq!(le_score(&g, &c, &d2()).unwrap(), 0.0);
}

#[test]
fn sampled_mode_is_seeded() {
    let g = parse_str("∀x ∀y (R(x, y) → R(y, x)) ∧ ∀x (P(x) ∨ Q(x))").unwrap();
    let c = parse_str("∀x ∀y (R(x, y) ∨ R(y, x)) ∧ ∀x (P(x) ∧ Q(x))").unwrap();
    let cfg = LeConfig {
        domain_size: 4,
        ..LeConfig::default()
    };
    let a = le_outcome(&g, &c, &cfg).unwrap();
    assert_eq!(a.mode, LeMode::Sampled);
    assert_eq!(a.interpretations, cfg.sample_count as u64);
    assert_eq!(le_outcome(&g, &c, &cfg).unwrap(), a);
    assert!(a.score > 0.0 && a.score < 1.0);
}
