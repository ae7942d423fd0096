//! Batch front end for `kwidth-core`: loads or generates operators, runs a
//! command and writes one report.

pub mod commands;
pub mod io;
pub mod report;
pub mod source;

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use kwidth_core::widths::SearchConfig;
use serde_json::{json, Value};

use crate::commands::WidthMethod;
use crate::report::{Format, Report, Status};
use crate::source::SourceRequest;

#[derive(Debug, Parser)]
#[command(name = "kwidth", version, about = "Kolmogorov numbers and degrees-of-freedom curves of linear channels")]
pub struct Cli {
    /// Worker threads (0: one per core). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Matrix file: JSON document, or a `.csv`/`.txt` numeric grid.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Generated channel, e.g. `timefreq_limiter,size=256,w=0.1`.
    #[arg(long)]
    pub channel: Option<String>,
    /// p1 | p2 | pinf; overrides the file.
    #[arg(long)]
    pub domain_norm: Option<String>,
    #[arg(long)]
    pub codomain_norm: Option<String>,
    #[arg(long)]
    pub domain_weights: Option<PathBuf>,
    #[arg(long)]
    pub codomain_weights: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random restarts of the subspace search.
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct LevelArgs {
    /// Levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// `lo:hi:steps`, evenly spaced and inclusive.
    #[arg(long)]
    pub eps_grid: Option<String>,
}

impl LevelArgs {
    fn levels(&self) -> Result<Vec<f64>> {
        let mut out = self.eps.clone();
        if let Some(g) = &self.eps_grid {
            out.extend(commands::parse_grid(g)?);
        }
        Ok(out)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kolmogorov numbers d_1..d_k with bounds.
    Widths {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Number of widths (default: min(rows, cols)).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value_t = WidthMethod::Auto)]
        method: WidthMethod,
    },
    /// Jump points of N(ε) and N sampled on levels.
    Dof {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        levels: LevelArgs,
        /// Number of jump points (default: min(rows, cols)).
        #[arg(long)]
        k: Option<usize>,
    },
    /// d_n of growing column truncations.
    Ladder {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Truncation sizes, strictly increasing.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
        ms: Vec<usize>,
        /// Convergence threshold on the last relative gap.
        #[arg(long, default_value_t = 1e-3)]
        rtol: f64,
        /// Known limit; the finest certified rung otherwise.
        #[arg(long)]
        limit: Option<f64>,
    },
    /// Seeded checks of the s-number axioms.
    AxiomsSelftest {
        #[command(flatten)]
        run: RunArgs,
        /// ℓ2 instances per axiom.
        #[arg(long, default_value_t = 50)]
        instances: usize,
        /// Mixed-norm instances per axiom.
        #[arg(long, default_value_t = 20)]
        mixed: usize,
    },
    /// N(ε) of the time–frequency limiter against 2W·size.
    #[command(name = "demo-2wt")]
    Demo2wt {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        levels: LevelArgs,
        #[arg(long, default_value_t = 256)]
        size: usize,
        #[arg(long, default_value_t = 0.1)]
        bandwidth: f64,
    },
}

impl SourceArgs {
    fn request(&self) -> SourceRequest {
        SourceRequest {
            input: self.input.clone(),
            channel: self.channel.clone(),
            domain_norm: self.domain_norm.clone(),
            codomain_norm: self.codomain_norm.clone(),
            domain_weights: self.domain_weights.clone(),
            codomain_weights: self.codomain_weights.clone(),
        }
    }
}

impl RunArgs {
    fn search(&self) -> SearchConfig {
        SearchConfig { restarts: self.restarts, ..SearchConfig::with_seed(self.seed) }
    }

    /// Config block shared by every command; `--threads` and `--out` are
    /// left out because they do not affect results.
    fn config(&self, command: &str, extra: Value) -> Value {
        let mut base = json!({ "command": command, "seed": self.seed, "restarts": self.restarts, "format": self.format.name() });
        if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
            b.extend(e);
        }
        base
    }
}

fn merge(a: Value, b: Value) -> Value {
    match (a, b) {
        (Value::Object(mut x), Value::Object(y)) => {
            x.extend(y);
            Value::Object(x)
        }
        (x, _) => x,
    }
}

fn execute(cmd: &Command) -> Result<(Report, Format, Option<PathBuf>)> {
    let (report, run) = match cmd {
        Command::Widths { source, run, k, method } => {
            let res = source.request().resolve()?;
            let k = k.unwrap_or(res.op.rows().min(res.op.cols()));
            let config = run.config("widths", merge(res.config.clone(), json!({ "k": k, "method": method.name() })));
            (commands::widths(&res.op, k, *method, &run.search(), config)?, run)
        }
        Command::Dof { source, run, levels, k } => {
            let res = source.request().resolve()?;
            let k = k.unwrap_or(res.op.rows().min(res.op.cols()));
            let eps = levels.levels()?;
            let config = run.config("dof", merge(res.config.clone(), json!({ "k": k, "eps": eps })));
            (commands::dof(&res.op, k, &eps, &run.search(), config)?, run)
        }
        Command::Ladder { source, run, n, ms, rtol, limit } => {
            let res = source.request().resolve()?;
            let config = run.config("ladder", merge(res.config.clone(), json!({ "n": n, "ms": ms, "rtol": rtol, "limit": limit })));
            (commands::ladder(&res, *n, ms, *rtol, *limit, &run.search(), config)?, run)
        }
        Command::AxiomsSelftest { run, instances, mixed } => {
            let config = run.config("axioms-selftest", json!({ "instances": instances, "mixed": mixed }));
            (commands::axioms(*instances, *mixed, run.seed, &run.search(), config)?, run)
        }
        Command::Demo2wt { run, levels, size, bandwidth } => {
            let mut eps = levels.levels()?;
            if eps.is_empty() {
                eps.push(0.5);
            }
            let config = run.config("demo-2wt", json!({ "size": size, "bandwidth": bandwidth, "eps": eps }));
            (commands::demo_2wt(*size, *bandwidth, &eps, config)?, run)
        }
    };
    Ok((report, run.format, run.out.clone()))
}

/// Runs a parsed command line and reports its exit status.
pub fn run(cli: &Cli) -> Result<Status> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build()?;
    let (report, format, out) = pool.install(|| execute(&cli.command))?;
    if report.rows.is_empty() && matches!(cli.command, Command::Widths { .. }) {
        bail!("no widths were computed");
    }
    report.emit(format, out.as_deref())?;
    Ok(report.status)
}
