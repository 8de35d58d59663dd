use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use hctqa::dataset::{self, RunConfig, MANIFEST_FILE, RECORDS_FILE};
use hctqa::domains::{self, Domain};
use hctqa::eval;
use hctqa::pivot::Format;

/// stdout may be a closed pipe (`| head`); losing output there is fine.
macro_rules! say {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "hctqa", version, about = "Synthetic human-centric table QA generator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate tables, questions, answers and metadata.
    Generate {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
        /// Built-in domain name or a directory holding semantics.json,
        /// table_template.json and nl_templates.json. Defaults to all built-ins.
        #[arg(long = "domain")]
        domains: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "html")]
        formats: Vec<String>,
        #[arg(long, default_value_t = hctqa::DEFAULT_DECIMALS)]
        decimals: u8,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 1)]
        questions_per_template: usize,
    },
    /// Score predictions ({"qa_id", "raw_text"} per line) against a dataset.
    Score {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        /// Where to write the report CSV; scored records go next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = hctqa::DEFAULT_DECIMALS)]
        decimals: u8,
    },
    /// Print dataset statistics as JSON.
    Stats {
        #[arg(long)]
        dataset: PathBuf,
        /// Questions sampled for the similarity statistic.
        #[arg(long, default_value_t = 2000)]
        sample: usize,
    },
}

fn load_domain(spec: &str) -> Result<Domain> {
    let dir = Path::new(spec);
    if !dir.is_dir() {
        return domains::load(spec).with_context(|| format!("loading domain `{spec}`"));
    }
    let read = |f: &str| {
        fs::read_to_string(dir.join(f)).with_context(|| format!("reading {}", dir.join(f).display()))
    };
    let name = dir.file_name().and_then(|n| n.to_str()).unwrap_or("domain").to_string();
    Ok(Domain::from_json_strs(
        &name,
        &read("semantics.json")?,
        &read("table_template.json")?,
        &read("nl_templates.json")?,
    )?)
}

fn generate(cfg: RunConfig, out: &Path) -> Result<ExitCode> {
    let ds = dataset::generate_dataset(&cfg)?;
    dataset::write_dataset(&ds, out)?;
    let m = &ds.manifest;
    say!("{} tables, {} QA pairs written to {}", m.tables, m.qa_pairs, out.display());
    for d in &m.domains {
        say!("  {:<14} tables {:>4}  qa {:>5}  aborted {}", d.domain, d.tables, d.qa_pairs, d.aborted);
    }
    if m.aborted.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for a in &m.aborted {
            eprintln!("aborted {} / {}: {}", a.domain, a.table_id, a.error);
        }
        Ok(ExitCode::FAILURE)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate {
            seed,
            out,
            domains: names,
            formats,
            decimals,
            workers,
            questions_per_template,
        } => {
            if workers == 0 {
                bail!("--workers must be at least 1");
            }
            let specs: Vec<String> =
                if names.is_empty() { domains::names().map(String::from).collect() } else { names };
            let domains = specs.iter().map(|s| load_domain(s)).collect::<Result<Vec<_>>>()?;
            let formats = formats.iter().map(|f| f.parse::<Format>()).collect::<hctqa::Result<Vec<_>>>()?;
            let cfg = RunConfig {
                seed,
                formats,
                decimals,
                workers,
                questions_per_template,
                ..RunConfig::new(domains)
            };
            generate(cfg, &out)
        }
        Command::Score { dataset: dir, predictions, out, decimals } => {
            let records = dataset::read_records(&dir.join(RECORDS_FILE))?;
            let preds = dataset::read_predictions(&predictions)?;
            let run = dataset::score_run(&records, &preds, decimals)?;
            let csv = eval::report_csv(&run.report);
            let _ = write!(std::io::stdout(), "{csv}");
            say!("scored {}, missing {}, unknown {}", run.scored.len(), run.missing.len(), run.unknown.len());
            for id in &run.unknown {
                say!("unknown qa_id {id}");
            }
            if let Some(path) = out {
                fs::write(&path, &csv).with_context(|| format!("writing {}", path.display()))?;
                let mut lines = String::new();
                for r in &run.scored {
                    lines.push_str(&serde_json::to_string(r)?);
                    lines.push('\n');
                }
                let scored = path.with_extension("scored.jsonl");
                fs::write(&scored, lines).with_context(|| format!("writing {}", scored.display()))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Stats { dataset: dir, sample } => {
            if !dir.join(MANIFEST_FILE).exists() {
                bail!("{} has no {MANIFEST_FILE}", dir.display());
            }
            let records = dataset::read_records(&dir.join(RECORDS_FILE))?;
            say!("{}", serde_json::to_string_pretty(&dataset::stats(&records, sample))?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
