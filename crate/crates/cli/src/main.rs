//! `srps`: exact values, simulations, and limit-law samples for
//! semi-restricted Rock-Paper-Scissors, with machine-readable output.

use std::collections::hash_map::DefaultHasher;
use std::fs::File;
use std::hash::{Hash, Hasher};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use srps::limit::{self, LimitRep};
use srps::montecarlo::{self, ExperimentConfig};
use srps::solver;
use srps::stats::Moments;
use srps::verify::{self, Level};

/// Exact solves use the two-layer sweep; past this the cube walk stops
/// being a desk-scale computation.
const SOLVE_CAP: u64 = 2000;
/// Full-table CSV export holds the whole cube in memory.
const TABLE_EXPORT_CAP: u64 = 200;
/// Upper bound on reference draws for the simulate KS column.
const KS_DRAW_CAP: u64 = 1_000_000;

#[derive(Parser)]
#[command(
    name = "srps",
    version,
    about = "Semi-restricted Rock-Paper-Scissors laboratory"
)]
struct Cli {
    /// Cap the worker thread count (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact optimal expected score V(n,n,n) by backward induction.
    Solve {
        #[arg(long)]
        n: u64,
        /// Also export the full value table as CSV (needs n <= 200).
        #[arg(long)]
        table_out: Option<PathBuf>,
    },
    /// Simulate many games of a strategy pair and print summary JSON.
    Simulate {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        games: u64,
        /// Restricted player: greedy-r | cyclic-r
        #[arg(long)]
        r: String,
        /// Unrestricted player: greedy-n | rock-then-greedy-n | uniform-n
        #[arg(long)]
        nn: String,
        #[arg(long)]
        seed: u64,
        /// Record per-game stopping-time diagnostics.
        #[arg(long)]
        diagnostics: bool,
        /// Write per-game diagnostic records as CSV (needs --diagnostics).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw from the limit distribution of S_n/sqrt(n).
    LimitSample {
        /// tl2 | a | b | c | d | erock
        #[arg(long)]
        rep: String,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        /// Print summary JSON instead of one draw per line.
        #[arg(long)]
        summary: bool,
    },
    /// Print the closed-form constants of the limit distribution.
    Constants,
    /// Run the verification suite; nonzero exit on any failing check.
    Verify {
        #[arg(long, value_enum, default_value_t = VerifyLevel::Quick)]
        level: VerifyLevel,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyLevel {
    Quick,
    Full,
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> CliError {
        CliError::Runtime(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Rounds to 9 significant digits so printed numbers diff cleanly across
/// runs without trailing float noise.
fn sig9(x: f64) -> serde_json::Value {
    if !x.is_finite() {
        return serde_json::Value::Null;
    }
    let rounded: f64 = if x == 0.0 {
        0.0
    } else {
        format!("{x:.8e}").parse().unwrap()
    };
    json!(rounded)
}

fn derive_seed(master: u64, tag: &str) -> u64 {
    let mut h = DefaultHasher::new();
    master.hash(&mut h);
    tag.hash(&mut h);
    h.finish()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .expect("thread pool is configured before first use");
    }
    match run(cli.cmd) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Cmd) -> Result<ExitCode, CliError> {
    match cmd {
        Cmd::Solve { n, table_out } => solve(n, table_out),
        Cmd::Simulate {
            n,
            games,
            r,
            nn,
            seed,
            diagnostics,
            out,
        } => simulate(n, games, r, nn, seed, diagnostics, out),
        Cmd::LimitSample {
            rep,
            count,
            seed,
            summary,
        } => limit_sample(&rep, count, seed, summary),
        Cmd::Constants => {
            let c = limit::constants();
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "mean": sig9(c.mean),
                    "second_moment": sig9(c.second_moment),
                    "variance": sig9(c.variance),
                    "win_prob": sig9(c.win_prob),
                    "e_r": sig9(c.e_r),
                    "e_cos_theta": sig9(c.e_cos_theta),
                }))
                .unwrap()
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { level, seed } => verify_cmd(level, seed),
    }
}

fn solve(n: u64, table_out: Option<PathBuf>) -> Result<ExitCode, CliError> {
    if n > SOLVE_CAP {
        return Err(usage(format!(
            "--n {n} exceeds the exact-solve cap {SOLVE_CAP}"
        )));
    }
    let value = if let Some(path) = table_out {
        if n > TABLE_EXPORT_CAP {
            return Err(usage(format!(
                "--table-out requires n <= {TABLE_EXPORT_CAP} (full cube export)"
            )));
        }
        let table = solver::compute_value_table(n).map_err(|e| CliError::Runtime(e.to_string()))?;
        let mut w = BufWriter::new(File::create(&path)?);
        table.write_csv(&mut w)?;
        w.flush()?;
        table.optimal_value()
    } else {
        solver::optimal_value(n).map_err(|e| CliError::Runtime(e.to_string()))?
    };
    let per_sqrt = if n > 0 {
        value / (n as f64).sqrt()
    } else {
        0.0
    };
    println!(
        "{}",
        json!({"n": n, "value": sig9(value), "value_per_sqrt_n": sig9(per_sqrt)})
    );
    Ok(ExitCode::SUCCESS)
}

fn simulate(
    n: u64,
    games: u64,
    r: String,
    nn: String,
    seed: u64,
    diagnostics: bool,
    out: Option<PathBuf>,
) -> Result<ExitCode, CliError> {
    if games == 0 {
        return Err(usage("--games must be positive"));
    }
    if out.is_some() && !diagnostics {
        return Err(usage(
            "--out writes per-game diagnostics; pass --diagnostics as well",
        ));
    }
    let cfg = ExperimentConfig {
        n,
        games,
        strategy_r: r,
        strategy_n: nn,
        master_seed: seed,
        record_diagnostics: diagnostics,
    };
    let stats = montecarlo::run_experiment(&cfg).map_err(|e| match e {
        montecarlo::McError::UnknownStrategy(name) => {
            usage(format!("unknown strategy name `{name}`"))
        }
        other => CliError::Runtime(other.to_string()),
    })?;

    let ks_vs_limit = if n > 0 {
        let count = games.min(KS_DRAW_CAP) as usize;
        let mut draws = limit::sample_batch(LimitRep::A, count, derive_seed(seed, "ks-vs-limit"));
        draws.sort_unstable_by(|a, b| a.total_cmp(b));
        let scaled = stats.scaled_scores_sorted();
        montecarlo::ks_distance(&scaled, &draws)
            .ok()
            .map(sig9)
            .unwrap_or(serde_json::Value::Null)
    } else {
        serde_json::Value::Null
    };

    let mut report = json!({
        "config": &stats.config,
        "count": stats.count(),
        "mean": sig9(stats.mean()),
        "variance": sig9(stats.variance()),
        "std_error": sig9(stats.std_error()),
        "p_r_wins": sig9(stats.p_r_wins()),
        "p_draw": sig9(stats.p_draw()),
        "p_n_wins": sig9(stats.p_n_wins()),
        "mean_t1": sig9(stats.mean_t1()),
        "mean_t2": sig9(stats.mean_t2()),
        "ks_vs_limit": ks_vs_limit,
    });
    if let Some(diag) = stats.diagnostics.as_ref() {
        let esn_gap = montecarlo::esn_consistency(&stats, n).expect("diagnostics recorded");
        let t1s = montecarlo::t1_scaling(&stats, n).expect("diagnostics recorded");
        let l1_scaled = if n > 0 {
            diag.mean_abs_l1_residual() / (n as f64).powf(1.0 / 3.0)
        } else {
            0.0
        };
        report["t0"] = json!(diag.t0);
        report["esn_gap"] = sig9(esn_gap);
        report["esn_gap_se"] = sig9(diag.esn_gap_std_error());
        report["t1_scaling"] = sig9(t1s);
        report["l1_residual_scaled"] = sig9(l1_scaled);
    }
    println!("{}", serde_json::to_string_pretty(&report).unwrap());

    if let Some(path) = out {
        let diag = stats.diagnostics.as_ref().expect("checked above");
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(
            w,
            "game,final_score,t1,t2,s_t0,x1,x2,x3,x_max,l1_residual,t1_before_t0"
        )?;
        for (g, rec) in diag.records.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                g,
                rec.final_score,
                rec.t1,
                rec.t2,
                rec.s_t0,
                rec.x[0],
                rec.x[1],
                rec.x[2],
                rec.x_max,
                rec.l1_residual,
                rec.t1_before_t0
            )?;
        }
        w.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}

fn limit_sample(rep: &str, count: usize, seed: u64, summary: bool) -> Result<ExitCode, CliError> {
    let rep = LimitRep::parse(rep).ok_or_else(|| {
        usage(format!(
            "unknown representation `{rep}` (tl2|a|b|c|d|erock)"
        ))
    })?;
    if count == 0 {
        return Err(usage("--count must be positive"));
    }
    let draws = limit::sample_batch(rep, count, seed);
    if summary {
        let mut m = Moments::new();
        m.extend(draws.iter().copied());
        let p_negative = draws.iter().filter(|&&x| x < 0.0).count() as f64 / count as f64;
        let p_zero = draws.iter().filter(|&&x| x == 0.0).count() as f64 / count as f64;
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "rep": rep.name(),
                "count": count,
                "mean": sig9(m.mean()),
                "variance": sig9(m.variance()),
                "p_negative": sig9(p_negative),
                "p_zero_atom": sig9(p_zero),
            }))
            .unwrap()
        );
    } else {
        let mut stdout = BufWriter::new(std::io::stdout().lock());
        for x in draws {
            writeln!(stdout, "{x:.8e}")?;
        }
        stdout.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}

fn verify_cmd(level: VerifyLevel, seed: u64) -> Result<ExitCode, CliError> {
    let level = match level {
        VerifyLevel::Quick => Level::Quick,
        VerifyLevel::Full => Level::Full,
    };
    eprintln!(
        "building verification artifacts ({})...",
        match level {
            Level::Quick => "quick, ~1 minute",
            Level::Full => "full, several minutes",
        }
    );
    let outcomes = verify::run_suite(level, seed);
    let mut failed = 0;
    for o in &outcomes {
        println!("{o}");
        if !o.passed {
            failed += 1;
        }
    }
    println!(
        "{} of {} checks passed",
        outcomes.len() - failed,
        outcomes.len()
    );
    if failed > 0 {
        Ok(ExitCode::FAILURE)
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
