//! `quasinormal`: run operator checks, worked exhibits and the random corpus,
//! writing a JSON report.
//!
//! Exit status: 0 when every expectation is met, 1 on an unexpected verdict,
//! 2 on configuration or build errors.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use quasinormal::corpus::CorpusConfig;
use quasinormal::verdict::Report;
use quasinormal::Error;

use config::{parse_dims, parse_list, Entry, OperatorSpec, RunConfig, TreeSpec};

#[derive(Parser)]
#[command(
    name = "quasinormal",
    version,
    about = "Numerical checks for quasinormal operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Probe seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol_abs: Option<f64>,
    #[arg(long)]
    tol_rel: Option<f64>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave the timestamp out of the report, for byte-reproducible output.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check predicates on an operator.
    Check {
        /// JSON run configuration; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Catalog exhibit such as `prz3:n=4`.
        #[arg(long)]
        exhibit: Option<String>,
        /// Square matrix as JSON rows; entries are reals or `[re, im]`.
        #[arg(long)]
        matrix: Option<String>,
        /// Tree shift as a JSON tree spec.
        #[arg(long)]
        tree: Option<String>,
        /// Predicate, repeatable: quasinormal, normality, power_identity:N,
        /// hyponormal, paranormal, paranormal_window, ths1, paran2, moment,
        /// prop_ws:N, quasinormal_tree, power_corollary:N:K.
        #[arg(long = "predicate")]
        predicates: Vec<String>,
        /// embry, ths1 or exhibit.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        nmax: Option<u32>,
        #[arg(long)]
        probes: Option<usize>,
        /// Section sizes for prz1, comma separated.
        #[arg(long = "N")]
        dims: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a catalog exhibit with its expectations.
    Exhibit {
        name: String,
        /// Section sizes for prz1, comma separated.
        #[arg(long = "N")]
        dims: Option<String>,
        #[arg(long)]
        probes: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Structural invariants over a seeded random-matrix corpus.
    Corpus {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Inclusive dimension range such as `2..6`.
        #[arg(long, default_value = "2..6")]
        dims: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_timestamp: bool,
    },
}

fn apply_common(cfg: &mut RunConfig, c: &Common) {
    if let Some(s) = c.seed {
        cfg.probes.seed = s;
    }
    if let Some(a) = c.tol_abs {
        cfg.tolerance.abs_tol = a;
    }
    if let Some(r) = c.tol_rel {
        cfg.tolerance.rel_tol = r;
    }
    if let Some(o) = &c.out {
        cfg.output = Some(o.display().to_string());
    }
}

fn operator_from_flags(
    exhibit: Option<String>,
    matrix: Option<String>,
    tree: Option<String>,
) -> Result<Option<OperatorSpec>, Error> {
    let given = [exhibit.is_some(), matrix.is_some(), tree.is_some()];
    if given.iter().filter(|g| **g).count() > 1 {
        return Err(Error::InvalidParameter(
            "give at most one of --exhibit, --matrix, --tree".into(),
        ));
    }
    if let Some(e) = exhibit {
        return Ok(Some(OperatorSpec::Exhibit(e)));
    }
    if let Some(m) = matrix {
        let rows: Vec<Vec<Entry>> =
            serde_json::from_str(&m).map_err(|e| Error::Parse(format!("--matrix: {e}")))?;
        return Ok(Some(OperatorSpec::Matrix(rows)));
    }
    if let Some(t) = tree {
        let spec: TreeSpec =
            serde_json::from_str(&t).map_err(|e| Error::Parse(format!("--tree: {e}")))?;
        return Ok(Some(OperatorSpec::Tree(spec)));
    }
    Ok(None)
}

fn empty_config(operator: OperatorSpec) -> RunConfig {
    RunConfig::from_json(&serde_json::json!({ "operator": operator }).to_string())
        .expect("minimal config parses")
}

fn build(command: Command) -> Result<(Report, Option<PathBuf>, bool), Error> {
    match command {
        Command::Check {
            config,
            exhibit,
            matrix,
            tree,
            predicates,
            suite,
            nmax,
            probes,
            dims,
            common,
        } => {
            let op = operator_from_flags(exhibit, matrix, tree)?;
            let mut cfg = match (config, op) {
                (Some(path), op) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| {
                        Error::Parse(format!("cannot read {}: {e}", path.display()))
                    })?;
                    let mut cfg = RunConfig::from_json(&text)?;
                    if let Some(op) = op {
                        cfg.operator = op;
                    }
                    cfg
                }
                (None, Some(op)) => empty_config(op),
                (None, None) => {
                    return Err(Error::InvalidParameter(
                        "no operator: give --config, --exhibit, --matrix or --tree".into(),
                    ))
                }
            };
            cfg.predicates.extend(predicates);
            if suite.is_some() {
                cfg.suite = suite;
            }
            if let Some(n) = nmax {
                cfg.nmax = n;
            }
            if let Some(p) = probes {
                cfg.probes.num_probes = p;
            }
            if let Some(d) = dims {
                cfg.dims = Some(parse_list(&d)?);
            }
            apply_common(&mut cfg, &common);
            let out = cfg.output.clone().map(PathBuf::from);
            Ok((run::run_config(&cfg)?, out, common.no_timestamp))
        }
        Command::Exhibit {
            name,
            dims,
            probes,
            common,
        } => {
            let mut cfg = empty_config(OperatorSpec::Exhibit(name));
            cfg.suite = Some("exhibit".into());
            if let Some(d) = dims {
                cfg.dims = Some(parse_list(&d)?);
            }
            if let Some(p) = probes {
                cfg.probes.num_probes = p;
            }
            apply_common(&mut cfg, &common);
            Ok((run::run_config(&cfg)?, common.out, common.no_timestamp))
        }
        Command::Corpus {
            seed,
            count,
            dims,
            out,
            no_timestamp,
        } => {
            let (lo, hi) = parse_dims(&dims)?;
            let cfg = CorpusConfig::new(seed, count, lo..=hi);
            Ok((run::corpus_report(&cfg), out, no_timestamp))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut report, out, no_timestamp) = match build(cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if !no_timestamp {
        report.metadata.timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
    }
    let text = report.to_json_string();
    match &out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    for line in report.summary_lines() {
        eprintln!("{line}");
    }
    ExitCode::from(run::exit_code(&report) as u8)
}
