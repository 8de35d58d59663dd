//! Browser bindings: list layouts, generate one table with its questions,
//! score a typed answer. Each export has a plain twin returning
//! `Result<String, String>` so it can be exercised off the browser.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use hctqa::dataset::{generate_table, RunConfig};
use hctqa::domains::{self, Domain};
use hctqa::eval::{f1_display, normalize_answer, score};
use hctqa::nl::ParsedTemplates;
use hctqa::pivot::{render, Format};
use hctqa::tablegen::expand_generic;

fn domain(name: &str) -> Result<Domain, String> {
    domains::load(name).map_err(|e| e.to_string())
}

/// `{"domains": [{"name", "templates": [..]}]}` for every built-in domain.
pub fn catalog_json() -> Result<String, String> {
    let mut out = Vec::new();
    for name in domains::names() {
        let d = domain(name)?;
        let tpls = expand_generic(&d.table_template, &d.vocab).map_err(|e| e.to_string())?;
        let names: Vec<&str> = tpls.iter().map(|t| t.name.as_str()).collect();
        out.push(json!({"name": name, "templates": names}));
    }
    Ok(json!({ "domains": out }).to_string())
}

/// One table of `template` in `domain`, with its HTML rendering, base
/// table, metadata and one question per applicable template id.
pub fn generate_json(domain_name: &str, template: &str, seed: u64) -> Result<String, String> {
    let d = domain(domain_name)?;
    let tpls = expand_generic(&d.table_template, &d.vocab).map_err(|e| e.to_string())?;
    let tpl = tpls
        .iter()
        .find(|t| t.name == template)
        .ok_or_else(|| format!("`{domain_name}` has no table template `{template}`"))?;
    let parsed = ParsedTemplates::new(d.nl.clone(), &d.vocab).map_err(|e| e.to_string())?;
    let cfg = RunConfig { seed, ..RunConfig::new(vec![d.clone()]) };
    let t = generate_table(&d, &parsed, tpl, 1, &cfg).map_err(|e| e.to_string())?;
    let questions: Vec<Value> = t
        .records
        .iter()
        .map(|r| {
            json!({
                "qa_id": r.qa_id,
                "template_id": r.template_id,
                "question": r.question,
                "sql": r.sql,
                "answer": r.answer,
            })
        })
        .collect();
    let metadata = t.records.first().map(|r| {
        r.metadata
            .iter()
            .filter(|(k, _)| k.starts_with("table."))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect::<serde_json::Map<_, _>>()
    });
    Ok(json!({
        "table_id": t.table_id,
        "html": render(&t.hct, Format::Html),
        "rows": t.rel.rows.len(),
        "metadata": metadata,
        "not_applicable": t.not_applicable,
        "questions": questions,
    })
    .to_string())
}

/// `{"f1", "f1_display", "precision", "recall", "cc"}` for one answer.
pub fn score_json(truth: &str, prediction: &str) -> Result<String, String> {
    let decimals = hctqa::DEFAULT_DECIMALS;
    let s = score(&normalize_answer(prediction, decimals), &normalize_answer(truth, decimals))
        .map_err(|e| e.to_string())?;
    Ok(json!({
        "f1": s.f1,
        "f1_display": f1_display(s.f1),
        "precision": s.precision,
        "recall": s.recall,
        "cc": s.cc,
    })
    .to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn catalog() -> Result<String, JsError> {
    js(catalog_json())
}

/// Seeds above 2^53 lose precision in JavaScript, so the seed is an f64
/// truncated to an integer.
#[wasm_bindgen]
pub fn generate(domain: &str, template: &str, seed: f64) -> Result<String, JsError> {
    js(generate_json(domain, template, seed.max(0.0) as u64))
}

#[wasm_bindgen]
pub fn score_answer(truth: &str, prediction: &str) -> Result<String, JsError> {
    js(score_json(truth, prediction))
}
