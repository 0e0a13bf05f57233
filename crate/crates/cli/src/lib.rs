//! Command-line front end: `run`, `compare` and `sweep`.
//!
//! Every command reads a JSON [`RunConfig`], writes one CSV and echoes the
//! resolved config next to it as `<out>.config.json`. Nothing is written
//! when the config is rejected or an episode fails.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use robust_duel::harness::{mean_std, run_all, run_policy, sweep_budget};
use robust_duel::{Error, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "robust-duel", version, about = "Dueling bandit simulations under adversarial label flips")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the first configured policy and write per-round statistics.
    Run(Common),
    /// Run every configured policy and write mean/std cumulative regret.
    Compare(Common),
    /// Final cumulative regret for each corruption budget.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ascending budgets, e.g. `20,40,60`.
        #[arg(long)]
        budgets: String,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides `base_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Run(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Run(e) if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Run(e) if e.is_numerical() => write!(f, "numerical failure: {e}"),
            CliError::Run(e) => write!(f, "config error: {e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

/// Parses and validates a config document, filling every default.
pub fn load_config(path: &Path, seed: Option<u64>) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut cfg: RunConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        cfg.base_seed = s;
    }
    cfg.resolved().map_err(|e| CliError::Config(e.to_string()))
}

/// Parses `--budgets`: ascending nonnegative integers no larger than `t`.
pub fn parse_budgets(text: &str, t: usize) -> Result<Vec<u64>, CliError> {
    let budgets = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Config(format!("budget {s:?} is not a nonnegative integer")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if budgets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config(format!("budgets must be strictly ascending: {text}")));
    }
    if let Some(&c) = budgets.iter().find(|&&c| c > t as u64) {
        return Err(CliError::Config(format!("budget {c} exceeds t = {t}")));
    }
    Ok(budgets)
}

/// Six significant digits, shortest decimal form.
pub fn fmt_num(x: f64) -> String {
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    format!("{rounded}")
}

fn push_row(out: &mut String, cells: impl IntoIterator<Item = String>) {
    let row: Vec<String> = cells.into_iter().collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

pub fn run_csv(cfg: &RunConfig) -> Result<String, CliError> {
    let runs = run_policy(cfg, &cfg.policies[0])?;
    let col = |f: &dyn Fn(&robust_duel::RunResult) -> Vec<f64>| -> Result<_, CliError> {
        let traces: Vec<Vec<f64>> = runs.iter().map(f).collect();
        let refs: Vec<&[f64]> = traces.iter().map(Vec::as_slice).collect();
        Ok(mean_std(&refs)?)
    };
    let inst = col(&|r| r.instant_regret.clone())?;
    let cum = col(&|r| r.cum_regret.clone())?;
    let flips = col(&|r| r.flips_used.iter().map(|&f| f as f64).collect())?;
    let weight = col(&|r| r.weight.clone())?;

    let mut out = String::new();
    push_row(
        &mut out,
        ["round", "instant_regret", "cum_regret_mean", "cum_regret_std", "flips_used_mean", "weight_mean"]
            .map(String::from),
    );
    for i in 0..cfg.t {
        push_row(
            &mut out,
            [
                (i + 1).to_string(),
                fmt_num(inst.mean[i]),
                fmt_num(cum.mean[i]),
                fmt_num(cum.std[i]),
                fmt_num(flips.mean[i]),
                fmt_num(weight.mean[i]),
            ],
        );
    }
    Ok(out)
}

pub fn compare_csv(cfg: &RunConfig) -> Result<String, CliError> {
    if cfg.policies.len() < 2 {
        return Err(CliError::Config("compare needs at least two policies".into()));
    }
    let stats = run_all(cfg)?
        .iter()
        .map(|rs| robust_duel::aggregate(rs))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = String::new();
    let mut header = vec!["round".to_string()];
    for p in &cfg.policies {
        header.push(format!("{}_mean", p.name));
        header.push(format!("{}_std", p.name));
    }
    push_row(&mut out, header);
    for i in 0..cfg.t {
        let mut row = vec![(i + 1).to_string()];
        for s in &stats {
            row.push(fmt_num(s.mean[i]));
            row.push(fmt_num(s.std[i]));
        }
        push_row(&mut out, row);
    }
    Ok(out)
}

pub fn sweep_csv(cfg: &RunConfig, budgets: &[u64]) -> Result<String, CliError> {
    let rows = sweep_budget(cfg, budgets)?;
    let mut out = String::new();
    let mut header = vec!["c".to_string()];
    for p in &cfg.policies {
        header.push(format!("{}_final_mean", p.name));
        header.push(format!("{}_final_std", p.name));
    }
    push_row(&mut out, header);
    for r in rows {
        let mut row = vec![r.budget.to_string()];
        for (m, s) in r.finals {
            row.push(fmt_num(m));
            row.push(fmt_num(s));
        }
        push_row(&mut out, row);
    }
    Ok(out)
}

/// `<out>.config.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

fn write_outputs(out: &Path, csv: &str, cfg: &RunConfig) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(cfg).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(out, csv).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let side = sidecar_path(out);
    fs::write(&side, json + "\n").map_err(|e| CliError::Io(format!("{}: {e}", side.display())))
}

type CsvFn = Box<dyn Fn(&RunConfig) -> Result<String, CliError>>;

pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let (common, csv_of): (&Common, CsvFn) = match &cli.command {
        Command::Run(c) => (c, Box::new(run_csv)),
        Command::Compare(c) => (c, Box::new(compare_csv)),
        Command::Sweep { common, budgets } => {
            let budgets = budgets.clone();
            (
                common,
                Box::new(move |cfg: &RunConfig| sweep_csv(cfg, &parse_budgets(&budgets, cfg.t)?)),
            )
        }
    };
    let cfg = load_config(&common.config, common.seed)?;
    let csv = csv_of(&cfg)?;
    write_outputs(&common.out, &csv, &cfg)?;
    let mut msg = String::new();
    let _ = write!(msg, "wrote {} rows to {}", csv.lines().count() - 1, common.out.display());
    Ok(msg)
}

/// Runs the parsed command and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let quiet = match &cli.command {
        Command::Run(c) | Command::Compare(c) | Command::Sweep { common: c, .. } => c.quiet,
    };
    match execute(&cli) {
        Ok(msg) => {
            if !quiet {
                eprintln!("{msg}");
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
