//! `gre`: entropy measures, the generalized relative entropy and exact
//! nearest-neighbor search over histogram files.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gre_core::io::{histogram_files, read_histogram, read_joint_table};
use gre_core::selfcheck::{self, SelfCheckConfig};
use gre_core::{
    cross_entropy, gre_breakdown, gre_lower_bound_distinct, gre_upper_bound, kl_divergence,
    mutual_information, normalize, shannon_entropy, Error, GreParams, MetricIndex, NumericPolicy,
    ProbVector,
};
use serde_json::json;

use output::{fmt_f64, num, Format, Report};

#[derive(Debug, Parser)]
#[command(name = "gre", version, about = "Entropy measures and a bounded distance between histograms")]
struct Cli {
    #[command(flatten)]
    config: CliConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CliConfig {
    /// Control parameter of the distance, > 1.
    #[arg(long = "k", global = true, allow_negative_numbers = true, default_value_t = 2.0)]
    pub k: f64,
    /// Logarithm base, > 1.
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = 2.0)]
    pub base: f64,
    /// Added to denominators of cross entropy, KL and mutual information.
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = 1e-12)]
    pub epsilon: f64,
    /// L-infinity tolerance under which two distributions count as equal.
    #[arg(long = "equality-tol", global = true, allow_negative_numbers = true, default_value_t = 1e-12)]
    pub equality_tol: f64,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Shannon entropy of a histogram.
    Entropy { file: PathBuf },
    /// Cross entropy H(P, Q).
    Cross { p: PathBuf, q: PathBuf },
    /// Relative entropy D(P || Q).
    Kl { p: PathBuf, q: PathBuf },
    /// Mutual information of a joint table.
    Mi { joint: PathBuf },
    /// Generalized relative entropy with its breakdown.
    Gre { p: PathBuf, q: PathBuf },
    /// Nearest histograms in a directory to a query histogram.
    Knn {
        dir: PathBuf,
        query: PathBuf,
        #[arg(short = 'n', default_value_t = 1)]
        n: usize,
        /// Also write the built index as a JSON snapshot.
        #[arg(long)]
        save_index: Option<PathBuf>,
    },
    /// Randomized verification of the metric axioms and bounds.
    Selfcheck {
        /// Random triples per (k, s) configuration.
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
    },
}

enum Failure {
    Input(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl CliConfig {
    fn policy(&self) -> Result<NumericPolicy, Error> {
        NumericPolicy::new(self.epsilon, self.base, self.equality_tol)
    }

    fn params(&self) -> Result<GreParams, Error> {
        GreParams::new(self.k, self.policy()?)
    }
}

fn load(path: &Path) -> Result<ProbVector, Error> {
    normalize(&read_histogram(path)?).map_err(|e| Error::Parse {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

fn load_pair(p: &Path, q: &Path) -> Result<(ProbVector, ProbVector), Failure> {
    let (a, b) = (load(p)?, load(q)?);
    if a.dim() != b.dim() {
        return Err(Failure::Input(format!(
            "dimension mismatch: {} has {} components, {} has {}",
            p.display(),
            a.dim(),
            q.display(),
            b.dim()
        )));
    }
    Ok((a, b))
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let config = &cli.config;
    // validates every flag up front, whatever the command
    let params = config.params()?;
    let policy = *params.policy();
    let report = match &cli.command {
        Command::Entropy { file } => {
            let p = load(file)?;
            Report::new("shannon_entropy", num(shannon_entropy(&p, &policy)), config)
                .field("components", json!(p.dim()))
        }
        Command::Cross { p, q } => {
            let (a, b) = load_pair(p, q)?;
            Report::new("cross_entropy", num(cross_entropy(&a, &b, &policy)?), config)
        }
        Command::Kl { p, q } => {
            let (a, b) = load_pair(p, q)?;
            Report::new("kl_divergence", num(kl_divergence(&a, &b, &policy)?), config)
        }
        Command::Mi { joint } => {
            let j = read_joint_table(joint)?;
            Report::new("mutual_information", num(mutual_information(&j, &policy)), config)
                .field("rows", json!(j.rows()))
                .field("cols", json!(j.cols()))
        }
        Command::Gre { p, q } => {
            let (a, b) = load_pair(p, q)?;
            let d = gre_breakdown(&a, &b, &params)?;
            let (lo, hi) = (gre_lower_bound_distinct(&params), gre_upper_bound(&params));
            Report::new("gre_distance", num(d.total), config)
                .field("forward_sum", num(d.forward_sum))
                .field("backward_sum", num(d.backward_sum))
                .field("r_term", num(d.r_term))
                .field("bounds", json!({ "lower_exclusive": lo, "upper": hi }))
                .plain_line(format!("bounds: ({}, {}]", fmt_f64(lo), fmt_f64(hi)))
        }
        Command::Knn { dir, query, n, save_index } => {
            let files = histogram_files(dir)?;
            if files.is_empty() {
                return Err(Failure::Input(format!(
                    "{}: no .csv or .json histograms found",
                    dir.display()
                )));
            }
            let mut items = Vec::with_capacity(files.len());
            for f in &files {
                let id = f.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
                items.push((id, load(f)?));
            }
            let q = load(query)?;
            if q.dim() != items[0].1.dim() {
                return Err(Failure::Input(format!(
                    "dimension mismatch: {} has {} components, histograms in {} have {}",
                    query.display(),
                    q.dim(),
                    dir.display(),
                    items[0].1.dim()
                )));
            }
            let index = MetricIndex::build_seeded(items, params, config.seed).map_err(|e| match e {
                Error::DimensionMismatch { left, right } => Failure::Input(format!(
                    "{}: histograms have mixed dimensions ({left} and {right})",
                    dir.display()
                )),
                other => other.into(),
            })?;
            if let Some(path) = save_index {
                index.save(path)?;
            }
            let (hits, stats) = index.knn_with_stats(&q, *n)?;
            let mut report = Report::new(
                "knn",
                json!(hits
                    .iter()
                    .map(|h| json!({ "id": h.id, "distance": num(h.distance) }))
                    .collect::<Vec<_>>()),
                config,
            )
            .field("n", json!(n))
            .field("items", json!(index.len()))
            .field("visited_nodes", json!(stats.visited_nodes));
            for (rank, h) in hits.iter().enumerate() {
                report = report.plain_line(format!("{}\t{}\t{}", rank + 1, h.id, fmt_f64(h.distance)));
            }
            report
        }
        Command::Selfcheck { trials } => {
            let report = selfcheck::run(&SelfCheckConfig {
                trials: *trials,
                seed: config.seed,
                policy,
                ..SelfCheckConfig::default()
            })?;
            let text = match config.format {
                Format::Plain => report.to_string(),
                Format::Json => Report::new("selfcheck", json!(report.violations()), config)
                    .field("k", json!(report.ks))
                    .field("dims", json!(report.dims))
                    .field("seed", json!(report.seed))
                    .field("trials", json!(report.trials))
                    .field("suites", json!(report.suites))
                    .field("passed", json!(report.passed()))
                    .render(Format::Json),
            };
            return if report.passed() {
                Ok(text)
            } else {
                Err(Failure::Violation(text))
            };
        }
    };
    Ok(report.render(config.format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Violation(text)) => {
            println!("{text}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
