//! End-to-end generation: every domain, individual template and replica gets
//! its own random stream, so output bytes never depend on scheduling.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::annotate::{annotate_question, annotate_table, metadata};
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::eval::{self, ScoredRecord};
use crate::nl::{question, ParsedTemplates};
use crate::pivot::{file_stems, pivot, render, render_relational_html, Format, HctTable};
use crate::query::{format_answer, ground_truth, instantiate, render_sql, QueryInstance, TEMPLATE_IDS};
use crate::tablegen::{expand_generic, generate_relational, IndividualTableTemplate, RelationalTable};
use crate::Stream;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub domains: Vec<Domain>,
    pub formats: Vec<Format>,
    /// Instances drawn per template id and table.
    pub questions_per_template: usize,
    pub templates: Vec<u8>,
    pub decimals: u8,
    pub workers: usize,
}

impl RunConfig {
    pub fn new(domains: Vec<Domain>) -> Self {
        RunConfig {
            seed: 42,
            domains,
            formats: vec![Format::Html],
            questions_per_template: 1,
            templates: TEMPLATE_IDS.collect(),
            decimals: crate::DEFAULT_DECIMALS,
            workers: 1,
        }
    }
}

/// The random stream of one table instance.
pub fn instance_stream(seed: u64, domain: &str, template: &str, replica: usize) -> Stream {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for part in [domain.as_bytes(), template.as_bytes()] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    h.update((replica as u64).to_le_bytes());
    Stream::from_seed(h.finalize().into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaRecord {
    pub qa_id: String,
    pub table_id: String,
    pub domain: String,
    pub template_id: u8,
    pub question: String,
    pub sql: String,
    pub answer: String,
    pub metadata: BTreeMap<String, Value>,
    /// Rendered artifacts, relative to the output directory, keyed by format.
    pub files: BTreeMap<String, String>,
    pub query: QueryInstance,
}

#[derive(Clone, Debug)]
pub struct TableInstance {
    pub table_id: String,
    pub domain: String,
    pub template: IndividualTableTemplate,
    pub replica: usize,
    pub rel: RelationalTable,
    pub hct: HctTable,
    /// (relative path, contents)
    pub artifacts: Vec<(String, String)>,
    pub records: Vec<QaRecord>,
    /// Template ids with no instance on this table.
    pub not_applicable: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aborted {
    pub domain: String,
    pub table_id: String,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainCounts {
    pub domain: String,
    pub tables: usize,
    pub aborted: usize,
    pub qa_pairs: usize,
    /// QA pairs per template id.
    pub per_template: BTreeMap<u8, usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub decimals: u8,
    pub formats: Vec<Format>,
    pub domains: Vec<DomainCounts>,
    pub tables: usize,
    pub qa_pairs: usize,
    pub aborted: Vec<Aborted>,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub tables: Vec<TableInstance>,
    pub manifest: Manifest,
}

impl Dataset {
    pub fn records(&self) -> impl Iterator<Item = &QaRecord> {
        self.tables.iter().flat_map(|t| t.records.iter())
    }
}

struct Job<'a> {
    domain: &'a Domain,
    templates: &'a ParsedTemplates,
    tpl: &'a IndividualTableTemplate,
    replica: usize,
}

/// Generates one table instance and every applicable question on it.
pub fn generate_table(
    domain: &Domain,
    templates: &ParsedTemplates,
    tpl: &IndividualTableTemplate,
    replica: usize,
    cfg: &RunConfig,
) -> Result<TableInstance> {
    let mut rng = instance_stream(cfg.seed, &domain.name, &tpl.name, replica);
    let rel = generate_relational(tpl, &domain.vocab, cfg.decimals, &mut rng)?;
    let hct = pivot(&rel, tpl, cfg.decimals, &mut rng)?;
    let (hct_stem, db_stem) = file_stems(&tpl.name, replica);
    let table_id = format!("{}_{replica}", tpl.name);

    let mut artifacts = Vec::new();
    let mut files = BTreeMap::new();
    for f in &cfg.formats {
        let path = format!("{}/tables/{hct_stem}.{}", domain.name, f.extension());
        files.insert(format!("{f:?}").to_lowercase(), path.clone());
        artifacts.push((path, render(&hct, *f)));
    }
    let db_path = format!("{}/tables/{db_stem}.html", domain.name);
    files.insert("db".into(), db_path.clone());
    artifacts.push((db_path, render_relational_html(&rel, &hct.title)));

    let table_props = annotate_table(&hct, tpl);
    let mut records = Vec::new();
    let mut not_applicable = Vec::new();
    for &id in &cfg.templates {
        if !templates.supports(id) {
            not_applicable.push(id);
            continue;
        }
        for k in 0..cfg.questions_per_template {
            let q = match instantiate(id, &rel, &hct, cfg.decimals, &mut rng) {
                Ok(q) => q,
                Err(Error::NotApplicable(_)) => {
                    if k == 0 {
                        not_applicable.push(id);
                    }
                    break;
                }
                Err(e) => return Err(e),
            };
            let answer = format_answer(&ground_truth(&q, &rel)?);
            let text = question(templates, &q, &domain.vocab, &mut rng)?;
            let qp = annotate_question(&q, &rel, tpl);
            records.push(QaRecord {
                qa_id: format!("{}/{table_id}/q{id:02}_{k}", domain.name),
                table_id: table_id.clone(),
                domain: domain.name.clone(),
                template_id: id,
                question: text,
                sql: render_sql(&q),
                answer,
                metadata: metadata(&table_props, &qp),
                files: files.clone(),
                query: q,
            });
        }
    }
    Ok(TableInstance {
        table_id,
        domain: domain.name.clone(),
        template: tpl.clone(),
        replica,
        rel,
        hct,
        artifacts,
        records,
        not_applicable,
    })
}

fn run_jobs(jobs: &[Job<'_>], cfg: &RunConfig) -> Vec<Result<TableInstance>> {
    let one = |j: &Job<'_>| generate_table(j.domain, j.templates, j.tpl, j.replica, cfg);
    #[cfg(feature = "parallel")]
    if cfg.workers > 1 {
        use rayon::prelude::*;
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build() {
            return pool.install(|| jobs.par_iter().map(one).collect());
        }
    }
    jobs.iter().map(one).collect()
}

/// Generates the whole dataset in memory. A table that fails is logged and
/// listed in the manifest; the run continues.
pub fn generate_dataset(cfg: &RunConfig) -> Result<Dataset> {
    if cfg.workers == 0 {
        return Err(Error::InvalidTemplate("workers must be at least 1".into()));
    }
    let mut prepared = Vec::new();
    for d in &cfg.domains {
        let templates = ParsedTemplates::new(d.nl.clone(), &d.vocab)?;
        let tpls = expand_generic(&d.table_template, &d.vocab)?;
        prepared.push((d, templates, tpls));
    }
    let mut jobs = Vec::new();
    for (d, templates, tpls) in &prepared {
        for tpl in tpls {
            for replica in 0..tpl.replica {
                jobs.push(Job { domain: d, templates, tpl, replica });
            }
        }
    }
    let results = run_jobs(&jobs, cfg);

    let mut manifest = Manifest {
        seed: cfg.seed,
        decimals: cfg.decimals,
        formats: cfg.formats.clone(),
        ..Manifest::default()
    };
    let mut counts: Vec<DomainCounts> = cfg
        .domains
        .iter()
        .map(|d| DomainCounts { domain: d.name.clone(), ..DomainCounts::default() })
        .collect();
    let mut tables = Vec::new();
    for (job, res) in jobs.iter().zip(results) {
        let c = counts
            .iter_mut()
            .find(|c| c.domain == job.domain.name)
            .expect("every job belongs to a configured domain");
        match res {
            Ok(t) => {
                c.tables += 1;
                c.qa_pairs += t.records.len();
                for r in &t.records {
                    *c.per_template.entry(r.template_id).or_insert(0) += 1;
                }
                tables.push(t);
            }
            Err(e) => {
                let table_id = format!("{}_{}", job.tpl.name, job.replica);
                log::warn!("{}: table {table_id} aborted: {e}", job.domain.name);
                c.aborted += 1;
                manifest.aborted.push(Aborted {
                    domain: job.domain.name.clone(),
                    table_id,
                    error: e.to_string(),
                });
            }
        }
    }
    manifest.tables = tables.len();
    manifest.qa_pairs = counts.iter().map(|c| c.qa_pairs).sum();
    manifest.domains = counts;
    Ok(Dataset { tables, manifest })
}

pub const RECORDS_FILE: &str = "qa.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes artifacts, `qa.jsonl` and `manifest.json` under `out`.
pub fn write_dataset(ds: &Dataset, out: &Path) -> Result<()> {
    for t in &ds.tables {
        for (rel_path, contents) in &t.artifacts {
            write(&out.join(rel_path), contents)?;
        }
    }
    let mut lines = String::new();
    for r in ds.records() {
        lines.push_str(&serde_json::to_string(r)?);
        lines.push('\n');
    }
    write(&out.join(RECORDS_FILE), &lines)?;
    write(&out.join(MANIFEST_FILE), &(serde_json::to_string_pretty(&ds.manifest)? + "\n"))
}

pub fn read_records(path: &Path) -> Result<Vec<QaRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub qa_id: String,
    pub raw_text: String,
}

pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRun {
    pub scored: Vec<ScoredRecord>,
    /// Records with no prediction.
    pub missing: Vec<String>,
    /// Predictions naming no known record; excluded from the means.
    pub unknown: Vec<String>,
    pub report: Vec<eval::ReportRow>,
}

pub fn score_run(records: &[QaRecord], predictions: &[Prediction], decimals: u8) -> Result<ScoreRun> {
    let by_id: BTreeMap<&str, &QaRecord> = records.iter().map(|r| (r.qa_id.as_str(), r)).collect();
    let mut scored = Vec::new();
    let mut unknown = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for p in predictions {
        let Some(r) = by_id.get(p.qa_id.as_str()) else {
            unknown.push(p.qa_id.clone());
            continue;
        };
        seen.insert(p.qa_id.as_str());
        let s = eval::score(
            &eval::normalize_answer(&p.raw_text, decimals),
            &eval::normalize_answer(&r.answer, decimals),
        )?;
        scored.push(ScoredRecord {
            qa_id: p.qa_id.clone(),
            f1: s.f1,
            cc: s.cc,
            prediction: p.raw_text.clone(),
            template_id: r.template_id,
            domain: r.domain.clone(),
            metadata: r.metadata.clone(),
        });
    }
    let missing =
        records.iter().filter(|r| !seen.contains(r.qa_id.as_str())).map(|r| r.qa_id.clone()).collect();
    let report = eval::report(&scored);
    Ok(ScoreRun { scored, missing, unknown, report })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub qa_pairs: usize,
    pub tables: usize,
    pub per_domain: BTreeMap<String, usize>,
    pub per_template: BTreeMap<u8, usize>,
    pub mean_question_words: f64,
    pub mean_answer_values: f64,
    /// Mean pairwise word-level Jaccard similarity over a sample of questions.
    pub question_similarity: Option<f64>,
}

/// Dataset statistics; similarity is taken over at most `sample` questions
/// drawn with a fixed seed.
pub fn stats(records: &[QaRecord], sample: usize) -> Stats {
    let mut per_domain = BTreeMap::new();
    let mut per_template = BTreeMap::new();
    let mut tables = std::collections::BTreeSet::new();
    for r in records {
        *per_domain.entry(r.domain.clone()).or_insert(0) += 1;
        *per_template.entry(r.template_id).or_insert(0) += 1;
        tables.insert((&r.domain, &r.table_id));
    }
    let n = records.len().max(1) as f64;
    let words: usize = records.iter().map(|r| r.question.split_whitespace().count()).sum();
    let values: usize = records.iter().map(|r| eval::normalize_answer(&r.answer, 2).len()).sum();
    let mut questions: Vec<&str> = records.iter().map(|r| r.question.as_str()).collect();
    if questions.len() > sample {
        let mut rng = Stream::seed_from_u64(0);
        questions.shuffle(&mut rng);
        questions.truncate(sample);
    }
    Stats {
        qa_pairs: records.len(),
        tables: tables.len(),
        per_domain,
        per_template,
        mean_question_words: words as f64 / n,
        mean_answer_values: values as f64 / n,
        question_similarity: eval::question_similarity(&questions).ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::load;
    use crate::query::oracle::oracle_evaluate;

    fn small() -> RunConfig {
        let mut d = load("food").unwrap();
        d.table_template.replica = 1;
        d.table_template.shuffle.truncate(1);
        RunConfig::new(vec![d])
    }

    #[test]
    fn streams_depend_on_every_part() {
        use rand::RngCore;
        let mut a = instance_stream(1, "food", "t", 0);
        let mut b = instance_stream(1, "food", "t", 1);
        let mut c = instance_stream(1, "foo", "dt", 0);
        let mut a2 = instance_stream(1, "food", "t", 0);
        let x = a.next_u64();
        assert_eq!(x, a2.next_u64());
        assert_ne!(x, b.next_u64());
        assert_ne!(x, c.next_u64());
    }

    #[test]
    fn records_reverify_against_the_oracle() {
        let ds = generate_dataset(&small()).unwrap();
        assert!(ds.manifest.aborted.is_empty());
        assert!(ds.manifest.qa_pairs > 0);
        for t in &ds.tables {
            for r in &t.records {
                assert_eq!(format_answer(&oracle_evaluate(&r.query, &t.rel).unwrap()), r.answer);
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let mut cfg = small();
        let one = generate_dataset(&cfg).unwrap();
        cfg.workers = 3;
        let three = generate_dataset(&cfg).unwrap();
        let a: Vec<_> = one.records().cloned().collect();
        let b: Vec<_> = three.records().cloned().collect();
        assert_eq!(a, b);
        assert_eq!(one.manifest, three.manifest);
    }

    #[test]
    fn failing_tables_are_isolated() {
        let mut cfg = small();
        let mut broken = cfg.domains[0].clone();
        broken.name = "broken".into();
        // a question template that cannot cover the table attributes
        broken.nl.templates.insert(1, vec!["What is the amount of_$Item ?".into()]);
        cfg.domains.push(broken);
        let ds = generate_dataset(&cfg).unwrap();
        let good = &ds.manifest.domains[0];
        let bad = &ds.manifest.domains[1];
        assert_eq!(good.aborted, 0);
        assert!(bad.aborted > 0);
        assert_eq!(ds.manifest.aborted.len(), bad.aborted);
    }

    #[test]
    fn scoring_ground_truth_is_perfect() {
        let ds = generate_dataset(&small()).unwrap();
        let records: Vec<QaRecord> = ds.records().cloned().collect();
        let preds: Vec<Prediction> = records
            .iter()
            .map(|r| Prediction { qa_id: r.qa_id.clone(), raw_text: r.answer.clone() })
            .collect();
        let run = score_run(&records, &preds, 2).unwrap();
        assert_eq!(run.report[0].f1, 1.0);
        assert_eq!(run.report[0].cc, 1.0);
        let empty = score_run(&records, &[], 2).unwrap();
        assert!(empty.scored.is_empty() && empty.report.is_empty());
        assert_eq!(empty.missing.len(), records.len());
    }

    #[test]
    fn unknown_prediction_ids_are_listed() {
        let run = score_run(&[], &[Prediction { qa_id: "x".into(), raw_text: "1".into() }], 2).unwrap();
        assert_eq!(run.unknown, vec!["x".to_string()]);
    }
}
