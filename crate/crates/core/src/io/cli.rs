//! The `hubo-factor` command line.
//!
//! Exit codes: 0 when factors were found (or a verification passed), 1 when
//! not, 2 on usage or input errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::model::{build_plain_hubo, default_bits, FactorLayout};
use crate::quadratize::{quadratize_model, verify_reduction};
use crate::search::{factor, FactorOptions, Method, SolveReport};
use crate::solvers::{exact_histogram, histogram, sample_sa_vars, AnnealSchedule, DEFAULT_VAR_LIMIT};

use super::{decimal, save_coo, save_model};

pub const EXIT_FOUND: i32 = 0;
pub const EXIT_NOT_FOUND: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "hubo-factor",
    version,
    about = "Factor bi-primes by minimizing (pq - N)^2 over binary encodings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Factor N with one of the solving methods.
    Factor(FactorArgs),
    /// Check that a quadratized model has the same minima as its original.
    Verify(VerifyArgs),
    /// Print the energy distribution of a solve.
    Histogram(HistogramArgs),
}

fn parse_big(s: &str) -> std::result::Result<BigInt, String> {
    decimal::parse(s)
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Number to factor.
    #[arg(long = "n", value_parser = parse_big)]
    n: BigInt,
    /// Bits per factor [default: bit length of floor(sqrt(N))].
    #[arg(long)]
    bits: Option<u32>,
    /// Pin the least significant bit of both factors to 1.
    #[arg(long)]
    fix_lsb: bool,
    #[arg(long, default_value = "exact")]
    method: Method,
    /// Annealing sweeps per restart.
    #[arg(long, default_value_t = AnnealSchedule::default().sweeps)]
    sweeps: u64,
    #[arg(long, default_value_t = AnnealSchedule::default().restarts)]
    restarts: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest variable count accepted by exhaustive solvers.
    #[arg(long, default_value_t = DEFAULT_VAR_LIMIT)]
    var_limit: usize,
}

impl ModelArgs {
    fn schedule(&self) -> AnnealSchedule {
        AnnealSchedule {
            sweeps: self.sweeps,
            restarts: self.restarts,
            seed: self.seed,
            ..AnnealSchedule::default()
        }
    }

    fn bits(&self) -> u32 {
        self.bits.unwrap_or_else(|| default_bits(&self.n))
    }
}

#[derive(Debug, Args)]
struct FactorArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Block stride for range search [default: 2^bits].
    #[arg(long, value_parser = parse_big)]
    stride: Option<BigInt>,
    /// Worker threads for block search and annealing.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    block_workers: u64,
    /// Stop range search after this many blocks.
    #[arg(long)]
    max_blocks: Option<u64>,
    /// Write the solved model as JSON (quadratized methods include the
    /// reduction ledger).
    #[arg(long)]
    emit_model: Option<PathBuf>,
    /// Write the original HUBO as JSON (useful with `verify`).
    #[arg(long)]
    emit_original: Option<PathBuf>,
    /// Write a quadratic model as `i j coeff` lines.
    #[arg(long)]
    emit_coo: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    original: PathBuf,
    /// Quadratized model carrying its reduction ledger.
    #[arg(long)]
    reduced: PathBuf,
    /// Enumerate original assignments up to this many variables, sample above.
    #[arg(long, default_value_t = 20)]
    exhaustive_limit: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct HistogramArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Print comma-separated values.
    #[arg(long)]
    csv: bool,
    /// Show only the lowest this many energies.
    #[arg(long)]
    top: Option<usize>,
}

/// Runs the CLI with process arguments, writing to stdout and stderr.
pub fn main_exit_code() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_FOUND };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Factor(a) => cmd_factor(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Histogram(a) => cmd_histogram(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|source| Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn cmd_factor(a: FactorArgs, out: &mut dyn Write) -> Result<i32> {
    let opts = FactorOptions {
        method: a.model.method,
        bits: Some(a.model.bits()),
        fix_lsb: a.model.fix_lsb,
        stride: a.stride.clone(),
        workers: a.block_workers as usize,
        schedule: a.model.schedule(),
        var_limit: a.model.var_limit,
        max_blocks: a.max_blocks,
        ..FactorOptions::default()
    };
    let outcome = factor(&a.model.n, &opts)?;
    let mut report = outcome.report;
    // Trust nothing that has not been multiplied out here.
    let verified = match (&report.p, &report.q) {
        (Some(p), Some(q)) => report.found && p * q == a.model.n,
        _ => false,
    };
    if !verified {
        report.found = false;
        report.p = None;
        report.q = None;
    }

    if let Some(path) = &a.emit_original {
        if let Some(m) = &outcome.model {
            save_model(m, None, path)?;
        }
    }
    let solved = match &outcome.reduced {
        Some((r, l)) => Some((r, Some(l))),
        None => outcome.model.as_ref().map(|m| (m, None)),
    };
    if let Some(path) = &a.emit_model {
        if let Some((m, l)) = solved {
            save_model(m, l, path)?;
        }
    }
    if let Some(path) = &a.emit_coo {
        if let Some((m, _)) = solved {
            save_coo(&m.poly, m.num_vars, path)?;
        }
    }

    let text = if a.json {
        super::report_to_json(&report)
    } else {
        render_report(&report)
    };
    write_out(out, &text)?;
    Ok(if report.found { EXIT_FOUND } else { EXIT_NOT_FOUND })
}

fn opt(v: &Option<BigInt>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// Plain-text rendering of a report.
pub fn render_report(r: &SolveReport) -> String {
    let mut s = String::new();
    let yes_no = |b: bool| if b { "yes" } else { "no" };
    s += &format!("N = {}\n", r.big_n);
    s += &format!("method: {}\n", r.method);
    s += &format!("bits per factor: {} (fix-lsb: {})\n", r.bits, yes_no(r.fix_lsb));
    s += &format!("qubits: {} (ancillas: {})\n", r.qubits, r.ancillas);
    if let Some(b) = &r.block {
        s += &format!(
            "block: i={} j={} stride={} (S_i={}, S_j={}; {} searched)\n",
            b.i,
            b.j,
            b.stride,
            b.s_i(),
            b.s_j(),
            r.blocks_searched
        );
    }
    for st in &r.stages {
        s += &format!(
            "stage level {}: step ({}, {}) -> ({}, {}) energy {}{}\n",
            st.level,
            st.p_step,
            st.q_step,
            st.p_acc,
            st.q_acc,
            st.energy,
            if st.ties > 1 {
                format!(" [{} tied]", st.ties)
            } else {
                String::new()
            }
        );
    }
    if r.energy_paper.is_some() || r.energy_full.is_some() {
        s += &format!(
            "energy: {} (paper) / {} (full), expected {}\n",
            opt(&r.energy_paper),
            opt(&r.energy_full),
            opt(&r.expected_gme)
        );
    }
    match (&r.p, &r.q) {
        (Some(p), Some(q)) if r.found => {
            s += &format!("p={p} q={q} (multiplicity {})\n", r.multiplicity);
        }
        _ => {
            s += "not found\n";
            if let Some(e) = &r.best_excess {
                s += &format!("best block excess: {e}\n");
            }
        }
    }
    s
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let (original, _) = super::load_model(&a.original)?;
    let (reduced, ledger) = super::load_model(&a.reduced)?;
    let Some(ledger) = ledger else {
        return Err(Error::InvalidLayout(format!(
            "{} has no reduction ledger",
            a.reduced.display()
        )));
    };
    let report = verify_reduction(&original, &reduced, &ledger, a.exhaustive_limit)?;
    let text = if a.json {
        let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
        s.push('\n');
        s
    } else {
        let mut s = format!(
            "{}: {} original assignments checked ({:?})\n",
            if report.passed { "passed" } else { "FAILED" },
            report.checked,
            report.mode
        );
        s += &format!(
            "minimum: {} (original) / {} (reduced)\n",
            report.original_minimum, report.reduced_minimum
        );
        if let Some(c) = &report.counterexample {
            s += &format!(
                "counterexample {}: original {} but reduced minimum {}\n",
                c.assignment, c.original_energy, c.reduced_minimum
            );
        }
        s
    };
    write_out(out, &text)?;
    Ok(if report.passed { EXIT_FOUND } else { EXIT_NOT_FOUND })
}

fn cmd_histogram(a: HistogramArgs, out: &mut dyn Write) -> Result<i32> {
    let m = &a.model;
    let layout = if m.fix_lsb {
        FactorLayout::odd(m.bits())
    } else {
        FactorLayout::plain(m.bits())
    };
    let hubo = build_plain_hubo(&m.n, &layout)?;
    let (model, anneal) = match m.method {
        Method::Exact => (hubo, false),
        Method::Sa => (hubo, true),
        Method::QuboExact => (quadratize_model(&hubo)?.0, false),
        Method::QuboSa => (quadratize_model(&hubo)?.0, true),
        other => {
            return Err(Error::InvalidSchedule(format!(
                "histogram supports exact, sa, qubo-exact and qubo-sa, not {other}"
            )))
        }
    };
    let table = if anneal {
        histogram(&sample_sa_vars(&model.poly, model.num_vars, &m.schedule(), 1)?)
    } else {
        exact_histogram(&model.poly, model.num_vars, m.var_limit)?
    };
    let rows = table.iter().take(a.top.unwrap_or(usize::MAX));
    let mut s = String::new();
    if a.csv {
        s += "energy,count\n";
        for (e, c) in rows {
            s += &format!("{e},{c}\n");
        }
    } else {
        let width = table.keys().map(|e| e.to_string().len()).max().unwrap_or(6).max(6);
        s += &format!("{:>width$}  count\n", "energy");
        for (e, c) in rows {
            s += &format!("{:>width$}  {c}\n", e.to_string());
        }
    }
    write_out(out, &s)?;
    Ok(EXIT_FOUND)
}
