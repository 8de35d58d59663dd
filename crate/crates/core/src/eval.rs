//! Answer normalization, F1 / complete-containment scoring, property-sliced
//! reports and question similarity.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::num::Fixed;

/// Separator the prompt asks models to put between values.
pub const PREDICTION_SEPARATOR: &str = " || ";

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Atom {
    /// Units at the configured number of decimals.
    Num(i64),
    Text(String),
}

/// Normalized values with multiplicities.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueMultiset {
    counts: BTreeMap<Atom, usize>,
}

impl ValueMultiset {
    pub fn from_atoms<I: IntoIterator<Item = Atom>>(atoms: I) -> Self {
        let mut counts = BTreeMap::new();
        for a in atoms {
            *counts.entry(a).or_insert(0) += 1;
        }
        ValueMultiset { counts }
    }

    pub fn len(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn intersection_size(&self, other: &Self) -> usize {
        self.counts.iter().map(|(a, n)| (*n).min(other.counts.get(a).copied().unwrap_or(0))).sum()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Atom, usize)> {
        self.counts.iter().map(|(a, n)| (a, *n))
    }
}

fn atom(raw: &str, decimals: u8) -> Option<Atom> {
    let t = raw.trim().trim_matches(|c: char| c == '"' || c == '\'' || c == '`').trim_end_matches('.').trim();
    if t.is_empty() {
        return None;
    }
    if let Some(n) = Fixed::parse(t) {
        return Some(Atom::Num(n.rescale(decimals).units()));
    }
    Some(Atom::Text(t.to_lowercase()))
}

/// Splits a prediction or ground-truth string into atomic values.
///
/// Text containing ` || ` is split on it alone (numbers may then carry
/// thousands separators); anything else is read as a ground-truth string
/// with `,` between fields and `;` between tuples.
pub fn normalize_answer(text: &str, decimals: u8) -> ValueMultiset {
    let t = text.trim();
    if t.eq_ignore_ascii_case("no answer") {
        return ValueMultiset::default();
    }
    let atoms: Vec<Atom> = if t.contains(PREDICTION_SEPARATOR.trim()) {
        t.split("||").filter_map(|p| atom(p, decimals)).collect()
    } else {
        t.split([',', ';']).filter_map(|p| atom(p, decimals)).collect()
    };
    ValueMultiset::from_atoms(atoms)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub cc: u8,
}

pub fn score(pred: &ValueMultiset, truth: &ValueMultiset) -> Result<Score> {
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let hit = pred.intersection_size(truth) as f64;
    let precision = if pred.is_empty() { 0.0 } else { hit / pred.len() as f64 };
    let recall = hit / truth.len() as f64;
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Ok(Score { precision, recall, f1, cc: u8::from(hit as usize == truth.len()) })
}

/// F1 as shown in reports: truncated, not rounded, to two decimals
/// (2/3 reads 0.66).
pub fn f1_display(f1: f64) -> String {
    // the epsilon keeps exact values such as 0.29 from dropping a digit
    format!("{:.2}", ((f1 + 1e-9) * 100.0).floor() / 100.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredRecord {
    pub qa_id: String,
    pub f1: f64,
    pub cc: u8,
    pub prediction: String,
    pub template_id: u8,
    pub domain: String,
    pub metadata: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// `overall`, `template`, `domain`, or a metadata key.
    pub group: String,
    pub key: String,
    pub count: usize,
    pub f1: f64,
    pub cc: f64,
}

fn meta_key(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Mean F1 / CC overall, then per template, domain and metadata value.
pub fn report(records: &[ScoredRecord]) -> Vec<ReportRow> {
    if records.is_empty() {
        return Vec::new();
    }
    let mut groups: BTreeMap<(String, String), (usize, f64, f64)> = BTreeMap::new();
    let mut add = |g: &str, k: String, r: &ScoredRecord| {
        let e = groups.entry((g.to_string(), k)).or_insert((0, 0.0, 0.0));
        e.0 += 1;
        e.1 += r.f1;
        e.2 += r.cc as f64;
    };
    for r in records {
        add("template", format!("{:02}", r.template_id), r);
        add("domain", r.domain.clone(), r);
        for (k, v) in &r.metadata {
            add(k, meta_key(v), r);
        }
    }
    let n = records.len() as f64;
    let mut out = vec![ReportRow {
        group: "overall".into(),
        key: "all".into(),
        count: records.len(),
        f1: records.iter().map(|r| r.f1).sum::<f64>() / n,
        cc: records.iter().map(|r| r.cc as f64).sum::<f64>() / n,
    }];
    for ((group, key), (count, f1, cc)) in groups {
        out.push(ReportRow { group, key, count, f1: f1 / count as f64, cc: cc / count as f64 });
    }
    out
}

/// Report rows as CSV text.
pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["group", "key", "count", "f1", "cc"]).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.group.clone(),
            r.key.clone(),
            r.count.to_string(),
            format!("{:.4}", r.f1),
            format!("{:.4}", r.cc),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn word_set(q: &str) -> BTreeSet<String> {
    q.split_whitespace().map(str::to_lowercase).collect()
}

/// Mean pairwise word-level Jaccard similarity.
pub fn question_similarity<S: AsRef<str>>(questions: &[S]) -> Result<f64> {
    if questions.len() < 2 {
        return Err(Error::TooFewQuestions);
    }
    let sets: Vec<BTreeSet<String>> = questions.iter().map(|q| word_set(q.as_ref())).collect();
    // intern words so pair loops compare integers
    let mut ids: HashMap<&str, u32> = HashMap::new();
    let interned: Vec<Vec<u32>> = sets
        .iter()
        .map(|s| {
            s.iter()
                .map(|w| {
                    let next = ids.len() as u32;
                    *ids.entry(w.as_str()).or_insert(next)
                })
                .collect::<BTreeSet<u32>>()
                .into_iter()
                .collect()
        })
        .collect();
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..interned.len() {
        for j in i + 1..interned.len() {
            let (a, b) = (&interned[i], &interned[j]);
            let (mut x, mut y, mut inter) = (0, 0, 0usize);
            while x < a.len() && y < b.len() {
                match a[x].cmp(&b[y]) {
                    std::cmp::Ordering::Less => x += 1,
                    std::cmp::Ordering::Greater => y += 1,
                    std::cmp::Ordering::Equal => {
                        inter += 1;
                        x += 1;
                        y += 1;
                    }
                }
            }
            let union = a.len() + b.len() - inter;
            total += if union == 0 { 1.0 } else { inter as f64 / union as f64 };
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}
