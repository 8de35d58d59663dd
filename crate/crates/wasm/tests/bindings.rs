use hctqa_wasm::{catalog_json, generate_json, score_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn catalog_lists_every_domain_with_templates() {
    let c = parse(catalog_json().unwrap());
    let domains = c["domains"].as_array().unwrap();
    assert_eq!(domains.len(), 7);
    assert!(domains.iter().all(|d| !d["templates"].as_array().unwrap().is_empty()));
}

#[test]
fn generate_returns_table_and_questions() {
    let c = parse(catalog_json().unwrap());
    let tpl = c["domains"][0]["templates"][0].as_str().unwrap().to_string();
    let name = c["domains"][0]["name"].as_str().unwrap().to_string();
    let a = generate_json(&name, &tpl, 5).unwrap();
    assert_eq!(a, generate_json(&name, &tpl, 5).unwrap());
    let g = parse(a);
    assert!(g["html"].as_str().unwrap().contains("<table"));
    let qs = g["questions"].as_array().unwrap();
    assert!(!qs.is_empty());
    for q in qs {
        let s = parse(score_json(q["answer"].as_str().unwrap(), q["answer"].as_str().unwrap()).unwrap());
        assert_eq!(s["cc"], 1);
    }
}

#[test]
fn unknown_template_is_an_error() {
    assert!(generate_json("food", "nope", 1).unwrap_err().contains("nope"));
}

#[test]
fn partial_answer_scores_below_one() {
    let s = parse(score_json("Apple || 300", "Apple").unwrap());
    assert_eq!(s["f1_display"], "0.66");
    assert_eq!(s["cc"], 0);
    assert!(score_json("no answer", "x").is_err());
}
