use foleval_web::{normalize_json, perturb_json, perturbation_kinds, score_pair_json};
use serde_json::Value;

fn json(s: Result<String, String>) -> Value {
    serde_json::from_str(&s.expect("export succeeds")).unwrap()
}

#[test]
fn normalize_prints_both_notations() {
    let v = json(normalize_json("forall x (Eel(x) -> Fish(x))"));
    assert_eq!(v["unicode"], "∀x (Eel(x) → Fish(x))");
    assert_eq!(v["ascii"], "forall x (Eel(x) -> Fish(x))");
    assert_eq!(v["total_operators"], 2);
    assert_eq!(v["operators"]["implies"], 1);
    let again = json(normalize_json(v["unicode"].as_str().unwrap()));
    assert_eq!(again, v);
}

#[test]
fn normalize_reports_syntax_errors() {
    let err = normalize_json("∀x (P(x) →").unwrap_err();
    assert!(!err.is_empty());
}

#[test]
fn perturb_matches_the_library() {
    let v = json(perturb_json("op-negation", "∀x (¬W(x, C) → A(x, C))"));
    assert_eq!(v["kind"], "op-negation");
    assert_eq!(v["applied"], true);
    assert_eq!(v["result"], "∀x (W(x, C) → ¬A(x, C))");

    let v = json(perturb_json("op-andor", "P → Q"));
    assert_eq!((v["applied"].as_bool(), v["sites"].as_u64()), (Some(false), Some(0)));
    assert!(v["result"].is_null());

    assert!(perturb_json("op-shuffle", "P").unwrap_err().contains("op-shuffle"));
    assert_eq!(
        perturbation_kinds(),
        ["op-quantifier", "op-negation", "op-andor", "t-operator", "t-variable"]
    );
}

#[test]
fn scoring_a_pair_covers_all_metrics() {
    let same = json(score_pair_json("∀x (Eel(x) → Fish(x))", "∀x (Eel(x) → Fish(x))"));
    let rows = same.as_array().unwrap();
    let ids: Vec<&str> = rows.iter().map(|r| r["metric"].as_str().unwrap()).collect();
    assert_eq!(ids, ["BL", "RO", "ME", "LE", "BS", "SP"]);
    assert!(rows.iter().all(|r| r["normalized"] == 1.0));

    let swapped = json(score_pair_json("∀x (Eel(x) → Fish(x))", "∃x (Eel(x) → Fish(x))"));
    assert!(swapped
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["normalized"].as_f64().unwrap() < 1.0));
    assert!(score_pair_json(" ", "P").is_err());
}
