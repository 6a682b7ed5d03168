//! Solving strategies on top of the models and minimizers: whole-model
//! solves, block search and bitwise decomposition, all reported through
//! [`SolveReport`].

mod blocks;
mod decomp;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_plain_hubo, default_bits, FactorLayout, FactorModel};
use crate::quadratize::{quadratize_model, ReductionLedger};
use crate::solvers::{enumerate_lowest, sample_sa_vars, AnnealSchedule, Sample, DEFAULT_VAR_LIMIT};

pub use blocks::{
    default_block_plan, factor_pairs, is_nontrivial_factorization, normalize_pair, parallel_block_map, solve_block,
    BlockCoord, BlockPlan, BlockResult, BlockScan, BlockSolver,
};
pub use decomp::{decompose_solve, DecompResult, DecompStage, DEFAULT_BRANCH_BUDGET};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Sa,
    Range,
    Decomp,
    QuboExact,
    QuboSa,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Exact,
        Method::Sa,
        Method::Range,
        Method::Decomp,
        Method::QuboExact,
        Method::QuboSa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Sa => "sa",
            Method::Range => "range",
            Method::Decomp => "decomp",
            Method::QuboExact => "qubo-exact",
            Method::QuboSa => "qubo-sa",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorOptions {
    pub method: Method,
    /// Bits per factor; `None` uses [`default_bits`].
    pub bits: Option<u32>,
    pub fix_lsb: bool,
    /// Block stride for range search; `None` means `2^bits`.
    pub stride: Option<BigInt>,
    /// Threads for block search and annealing restarts.
    pub workers: usize,
    pub schedule: AnnealSchedule,
    pub var_limit: usize,
    pub branch_budget: usize,
    pub max_blocks: Option<u64>,
    /// Solve range blocks by annealing instead of enumeration.
    pub anneal_blocks: bool,
}

impl Default for FactorOptions {
    fn default() -> Self {
        FactorOptions {
            method: Method::Exact,
            bits: None,
            fix_lsb: false,
            stride: None,
            workers: 1,
            schedule: AnnealSchedule::default(),
            var_limit: DEFAULT_VAR_LIMIT,
            branch_budget: DEFAULT_BRANCH_BUDGET,
            max_blocks: None,
            anneal_blocks: false,
        }
    }
}

impl FactorOptions {
    pub fn new(method: Method) -> Self {
        FactorOptions {
            method,
            ..Default::default()
        }
    }
}

/// Outcome of one factoring attempt.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    #[serde(with = "crate::io::decimal")]
    pub big_n: BigInt,
    pub method: Method,
    pub bits: u32,
    pub fix_lsb: bool,
    pub found: bool,
    /// Smaller factor; set only when `p * q = N` was checked.
    #[serde(with = "crate::io::decimal::option")]
    pub p: Option<BigInt>,
    #[serde(with = "crate::io::decimal::option")]
    pub q: Option<BigInt>,
    /// Minimizing assignments that decode to the factorization (`pq` and
    /// `qp` count separately).
    pub multiplicity: u64,
    /// Lowest energy seen, constant term dropped.
    #[serde(with = "crate::io::decimal::option")]
    pub energy_paper: Option<BigInt>,
    /// Lowest energy seen including the constant; zero on a factorization.
    #[serde(with = "crate::io::decimal::option")]
    pub energy_full: Option<BigInt>,
    /// Closed-form target for `energy_paper`.
    #[serde(with = "crate::io::decimal::option")]
    pub expected_gme: Option<BigInt>,
    /// Model variables, ancillas included.
    pub qubits: usize,
    pub ancillas: usize,
    /// Distinct assignments returned by the minimizer.
    pub samples: u64,
    pub block: Option<BlockCoord>,
    pub blocks_searched: u64,
    /// Excess of the best block when nothing was found.
    #[serde(with = "crate::io::decimal::option")]
    pub best_excess: Option<BigInt>,
    pub stages: Vec<DecompStage>,
}

impl SolveReport {
    fn empty(big_n: &BigInt, method: Method, bits: u32, fix_lsb: bool) -> Self {
        SolveReport {
            big_n: big_n.clone(),
            method,
            bits,
            fix_lsb,
            found: false,
            p: None,
            q: None,
            multiplicity: 0,
            energy_paper: None,
            energy_full: None,
            expected_gme: None,
            qubits: 0,
            ancillas: 0,
            samples: 0,
            block: None,
            blocks_searched: 0,
            best_excess: None,
            stages: Vec::new(),
        }
    }

    /// Records factors only if they multiply to `N`.
    fn set_factors(&mut self, pair: Option<(BigInt, BigInt)>) {
        match pair {
            Some((p, q)) if is_nontrivial_factorization(&self.big_n, &p, &q) => {
                self.found = true;
                self.p = Some(p);
                self.q = Some(q);
            }
            _ => {
                self.found = false;
                self.p = None;
                self.q = None;
            }
        }
    }
}

/// Everything a solve produced, for callers that want more than the report.
#[derive(Clone, Debug)]
pub struct FactorOutcome {
    pub report: SolveReport,
    /// Minimizer output sorted by energy; empty for range and decomposition.
    pub samples: Vec<Sample>,
    /// The HUBO that was solved (for range search, the hit or best block).
    pub model: Option<FactorModel>,
    pub reduced: Option<(FactorModel, ReductionLedger)>,
}

fn layout_for(bits: u32, fix_lsb: bool) -> FactorLayout {
    if fix_lsb {
        FactorLayout::odd(bits)
    } else {
        FactorLayout::plain(bits)
    }
}

/// Number of lowest assignments kept by exact whole-model solves.
const KEEP_EXACT: usize = 16;

fn minimize(model: &FactorModel, opts: &FactorOptions, anneal: bool) -> Result<Vec<Sample>> {
    if anneal {
        sample_sa_vars(&model.poly, model.num_vars, &opts.schedule, opts.workers)
    } else {
        enumerate_lowest(&model.poly, model.num_vars, opts.var_limit, KEEP_EXACT)
    }
}

/// Fills energies and factors from whole-model samples.
fn analyze(report: &mut SolveReport, model: &FactorModel, samples: &[Sample]) -> Result<()> {
    report.qubits = model.num_vars;
    report.ancillas = model.ancilla_count();
    report.samples = samples.len() as u64;
    report.expected_gme = Some(model.expected_gme());
    let Some(best) = samples.first() else {
        return Ok(());
    };
    report.energy_paper = Some(best.energy_paper.clone());
    report.energy_full = Some(best.energy_full.clone());
    if !best.energy_full.is_zero() {
        return Ok(());
    }
    let pair = factor_pairs(model, samples)?
        .into_iter()
        .find(|(p, q)| is_nontrivial_factorization(&model.big_n, p, q));
    if let Some((p, q)) = &pair {
        let mut count = 0;
        for s in samples.iter().filter(|s| s.energy_full == best.energy_full) {
            let (a, b) = model.decode(&s.assignment)?;
            if normalize_pair(a, b) == (p.clone(), q.clone()) {
                count += s.occurrences;
            }
        }
        report.multiplicity = count;
    }
    report.set_factors(pair);
    Ok(())
}

/// Factors `N` with the chosen method.
pub fn factor(big_n: &BigInt, opts: &FactorOptions) -> Result<FactorOutcome> {
    let bits = opts.bits.unwrap_or_else(|| default_bits(big_n));
    let mut report = SolveReport::empty(big_n, opts.method, bits, opts.fix_lsb);
    let mut outcome = FactorOutcome {
        report: report.clone(),
        samples: Vec::new(),
        model: None,
        reduced: None,
    };
    match opts.method {
        Method::Exact | Method::Sa => {
            let model = build_plain_hubo(big_n, &layout_for(bits, opts.fix_lsb))?;
            let samples = minimize(&model, opts, opts.method == Method::Sa)?;
            analyze(&mut report, &model, &samples)?;
            outcome.samples = samples;
            outcome.model = Some(model);
        }
        Method::QuboExact | Method::QuboSa => {
            let model = build_plain_hubo(big_n, &layout_for(bits, opts.fix_lsb))?;
            let (reduced, ledger) = quadratize_model(&model)?;
            let samples = minimize(&reduced, opts, opts.method == Method::QuboSa)?;
            analyze(&mut report, &reduced, &samples)?;
            outcome.samples = samples;
            outcome.model = Some(model);
            outcome.reduced = Some((reduced, ledger));
        }
        Method::Range => {
            let plan = default_block_plan(big_n, bits, opts.stride.as_ref());
            let mut plan = plan.peekable();
            if plan.peek().is_none() {
                return Err(Error::NoBlocksInPlan);
            }
            let solver = if opts.anneal_blocks {
                BlockSolver::Anneal(opts.schedule.clone())
            } else {
                BlockSolver::Exact
            };
            let scan = range_search(big_n, bits, opts.fix_lsb, plan, &solver, opts.workers, opts.max_blocks)?;
            report.blocks_searched = scan.searched;
            report.qubits = 2 * layout_for(bits, opts.fix_lsb).free_bits() as usize;
            let result = scan.hit.as_ref().or(scan.best.as_ref());
            if let Some(r) = result {
                report.block = Some(r.coord.clone());
                report.energy_paper = Some(r.min_paper.clone());
                report.energy_full = Some(r.best.energy_full.clone());
                report.expected_gme = Some(r.expected_gme.clone());
                report.multiplicity = r.minimizers;
                outcome.model = Some(crate::model::build_range_hubo(
                    big_n,
                    &r.coord.layout(bits, opts.fix_lsb),
                )?);
            }
            match &scan.hit {
                Some(hit) => report.set_factors(hit.factors.clone()),
                None => report.best_excess = scan.best.as_ref().map(|b| b.excess.clone()),
            }
        }
        Method::Decomp => {
            if *big_n < BigInt::from(4) {
                return Err(Error::NumberTooSmall(big_n.clone()));
            }
            let r = decompose_solve(big_n, bits, opts.branch_budget)?;
            report.qubits = 4;
            if let Some(last) = r.stages.last() {
                report.energy_full = Some(last.energy.clone());
            }
            report.stages = r.stages;
            report.multiplicity = u64::from(r.factors.is_some());
            report.set_factors(r.factors);
        }
    }
    outcome.report = report;
    Ok(outcome)
}

/// Scans `plan` for the first block whose minimum reaches its closed-form
/// target. The result does not depend on `workers`.
pub fn range_search(
    big_n: &BigInt,
    bits: u32,
    fix_lsb: bool,
    plan: impl Iterator<Item = BlockCoord> + Send,
    solver: &BlockSolver,
    workers: usize,
    max_blocks: Option<u64>,
) -> Result<BlockScan> {
    let scan = parallel_block_map(plan, workers, max_blocks, |c| {
        solve_block(big_n, bits, fix_lsb, c, solver)
    })?;
    if scan.searched == 0 {
        return Err(Error::NoBlocksInPlan);
    }
    Ok(scan)
}
