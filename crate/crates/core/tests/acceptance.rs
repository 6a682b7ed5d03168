//! End-to-end acceptance checks. Runs without the libtest harness so each
//! check prints one PASS/FAIL line; exits non-zero if any check fails.
//!
//! Reference values come from independent arithmetic in this file (trial
//! division, direct products, brute force over factor ranges), never from
//! the library under test.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use hubo_factor::io::cli;
use hubo_factor::io::{load_model, report_from_json, save_model};
use hubo_factor::model::build_range_hubo;
use hubo_factor::quadratize::{quadratize_model, reduce_cubic, reduce_quartic, verify_reduction, GadgetKind};
use hubo_factor::search::{
    decompose_solve, default_block_plan, range_search, solve_block, BlockCoord, BlockSolver, SolveReport,
    DEFAULT_BRANCH_BUDGET,
};
use hubo_factor::solvers::{enumerate_exact, enumerate_exact_vars, exact_minimum};
use hubo_factor::{build_plain_hubo, Assignment, BinaryPolynomial, FactorLayout, VarId};
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = (&'static str, &'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn big(v: impl Into<BigInt>) -> BigInt {
    v.into()
}

fn primes_below(limit: u64) -> Vec<u64> {
    (2..limit)
        .filter(|&n| (2..).take_while(|d| d * d <= n).all(|d| n % d != 0))
        .collect()
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn bit_len(v: u64) -> u32 {
    64 - v.leading_zeros()
}

/// Runs the CLI in-process and returns (exit code, stdout).
fn cli_out(args: &[String]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hubo-factor".to_string()).chain(args.iter().cloned());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).expect("utf-8 output"))
}

fn args(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn cli_report(a: &str) -> Result<(i32, SolveReport), String> {
    let (code, out) = cli_out(&args(&format!("{a} --json")));
    let report = report_from_json(&out).map_err(|e| format!("bad JSON from `{a}`: {e}"))?;
    Ok((code, report))
}

fn semiprime_sweep() -> Outcome {
    let primes = primes_below(5000);
    let mut count = 0u32;
    let mut max_vars = 0;
    for (i, &p) in primes.iter().enumerate().skip(1) {
        if p * p > 10_000 {
            break;
        }
        for &q in &primes[i..] {
            let n = p * q;
            if n > 10_000 {
                break;
            }
            // the smallest symmetric width that holds the larger factor
            let bits = bit_len(q);
            max_vars = max_vars.max(2 * bits);
            let (code, r) = cli_report(&format!("factor --n {n} --bits {bits} --method exact"))?;
            ensure!(code == 0, "N={n}: exit code {code}");
            ensure!(
                r.p == Some(big(p)) && r.q == Some(big(q)),
                "N={n}: got {:?} x {:?}",
                r.p,
                r.q
            );
            let target = -(big(n) * big(n));
            ensure!(
                r.energy_paper == Some(target.clone()),
                "N={n}: minimum {:?} != {target}",
                r.energy_paper
            );
            ensure!(r.energy_full == Some(big(0)), "N={n}: full minimum {:?}", r.energy_full);
            count += 1;
        }
    }
    ensure!(count == 1956, "expected 1956 semiprimes, found {count}");
    Ok(format!(
        "{count} semiprimes, minimum -N^2 each, up to {max_vars} variables"
    ))
}

const N_A: u64 = 102_454_763;

fn headline_a_range() -> Outcome {
    ensure!(
        10_111 * 10_133 == N_A && is_prime(10_111) && is_prime(10_133),
        "bad reference pair"
    );
    let start = Instant::now();
    let scan = range_search(
        &big(N_A),
        6,
        false,
        default_block_plan(&big(N_A), 6, Some(&big(64))),
        &BlockSolver::Exact,
        1,
        None,
    )
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let hit = scan.hit.ok_or("no hit")?;
    ensure!(hit.coord == BlockCoord::new(157, 158, 64), "hit block {:?}", hit.coord);
    ensure!(
        hit.factors == Some((big(10_111), big(10_133))),
        "factors {:?}",
        hit.factors
    );
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!(
        "hit (157, 158) after {} blocks in {:.2}s",
        scan.searched,
        elapsed.as_secs_f64()
    ))
}

fn headline_a_anneal() -> Outcome {
    let mut tried = Vec::new();
    for seed in 0..20u64 {
        let (code, r) = cli_report(&format!(
            "factor --n {N_A} --bits 14 --fix-lsb --method sa --seed {seed}"
        ))?;
        ensure!(r.qubits == 26, "expected 26 variables, got {}", r.qubits);
        tried.push(seed);
        if code == 0 {
            ensure!(
                r.p == Some(big(10_111)) && r.q == Some(big(10_133)),
                "wrong factors {:?} {:?}",
                r.p,
                r.q
            );
            return Ok(format!(
                "26-variable HUBO factored with seed {seed} (runs tried: {})",
                tried.len()
            ));
        }
    }
    Err("no success in 20 seeded runs".into())
}

const N_B: u64 = 1_000_070_001_221;

fn headline_b() -> Outcome {
    ensure!(1_000_033u64 * 1_000_037 == N_B, "bad reference pair");
    let coord = BlockCoord::new(1, 1, 1_000_000);
    let start = Instant::now();
    let block = solve_block(&big(N_B), 6, false, &coord, &BlockSolver::Exact).map_err(|e| e.to_string())?;
    let block_time = start.elapsed();
    let r = big(N_B) - big(1_000_000u64) * big(1_000_000u64);
    ensure!(r == big(70_001_221), "residual {r}");
    let target = -(big(70_001_221) * big(70_001_221));
    ensure!(target == big(-4_900_170_941_490_841i64), "reference square");
    ensure!(block.min_paper == target, "block minimum {}", block.min_paper);
    ensure!(
        block.factors == Some((big(1_000_033), big(1_000_037))),
        "factors {:?}",
        block.factors
    );
    ensure!(block_time < Duration::from_secs(1), "block solve took {block_time:?}");

    let start = Instant::now();
    let scan = range_search(
        &big(N_B),
        6,
        false,
        default_block_plan(&big(N_B), 6, Some(&big(1_000_000))),
        &BlockSolver::Exact,
        1,
        None,
    )
    .map_err(|e| e.to_string())?;
    let plan_time = start.elapsed();
    let hit = scan.hit.ok_or("plan found no hit")?;
    ensure!(hit.coord == coord, "plan hit {:?}", hit.coord);
    ensure!(plan_time < Duration::from_secs(300), "plan took {plan_time:?}");
    Ok(format!(
        "block (1,1) minimum {target}; block {:.3}s, plan {:.3}s ({} blocks)",
        block_time.as_secs_f64(),
        plan_time.as_secs_f64(),
        scan.searched
    ))
}

/// min over ancillas of `gadget + shift`, for every assignment of `sources`.
fn gadget_table(gadget: &BinaryPolynomial, shift: &BigInt, sources: &[VarId], ancillas: &[VarId]) -> Vec<BigInt> {
    let mut out = Vec::new();
    for s in 0..1u64 << sources.len() {
        let mut best: Option<BigInt> = None;
        for a in 0..1u64 << ancillas.len() {
            let mut asg = Assignment::zeros(0);
            for (k, v) in sources.iter().enumerate() {
                asg.set(*v, s >> k & 1 == 1);
            }
            for (k, v) in ancillas.iter().enumerate() {
                asg.set(*v, a >> k & 1 == 1);
            }
            let e = gadget.evaluate(&asg).unwrap() + shift;
            if best.as_ref().is_none_or(|b| e < *b) {
                best = Some(e);
            }
        }
        out.push(best.unwrap());
    }
    out
}

fn gadget_soundness() -> Outcome {
    let xyz = [VarId(0), VarId(1), VarId(2)];
    for c in [-7i64, -1, 1, 5, 1 << 40] {
        let (g, rec) = reduce_cubic(&xyz, &big(c), VarId(3)).map_err(|e| e.to_string())?;
        let expected: Vec<BigInt> = (0..8u64).map(|s| big(c) * big((s == 7) as i64)).collect();
        ensure!(
            gadget_table(&g, &rec.constant_shift, &xyz, &rec.ancillas) == expected,
            "cubic c={c} table mismatch"
        );
    }
    let abcd = [VarId(0), VarId(1), VarId(2), VarId(3)];
    for c in [1i64, 3, 256, 1 << 50] {
        let (g, rec) = reduce_quartic(&abcd, &big(c), VarId(4)).map_err(|e| e.to_string())?;
        ensure!(rec.ancillas.len() == 7, "quartic ancillas {}", rec.ancillas.len());
        let expected: Vec<BigInt> = (0..16u64).map(|s| big(c) * big((s == 15) as i64)).collect();
        ensure!(
            gadget_table(&g, &rec.constant_shift, &abcd, &rec.ancillas) == expected,
            "quartic c={c} table mismatch"
        );
    }

    let mut models = 0;
    let mut joint = 0;
    for n in 4u64..=100 {
        let semiprime = primes_below(51).iter().any(|&p| n % p == 0 && is_prime(n / p));
        if !semiprime {
            continue;
        }
        for bits in 1..=3u32 {
            for fix_lsb in [false, true] {
                if fix_lsb && (n % 2 == 0 || bits < 2) {
                    continue;
                }
                let layout = if fix_lsb {
                    FactorLayout::odd(bits)
                } else {
                    FactorLayout::plain(bits)
                };
                let hubo = build_plain_hubo(&big(n), &layout).map_err(|e| e.to_string())?;
                let (qubo, ledger) = quadratize_model(&hubo).map_err(|e| e.to_string())?;
                // brute-force reference: min (pq - N)^2 over the layout's range
                let lo = if fix_lsb { 1 } else { 0 };
                let step = if fix_lsb { 2 } else { 1 };
                let hi = 1u64 << bits;
                let mut reference: Option<u64> = None;
                for p in (lo..hi).step_by(step) {
                    for q in (lo..hi).step_by(step) {
                        let d = (p * q).abs_diff(n);
                        reference = Some(reference.map_or(d * d, |r| r.min(d * d)));
                    }
                }
                let reference = big(reference.unwrap());
                let (hubo_min, _) = exact_minimum(&hubo.poly, 24).map_err(|e| e.to_string())?;
                // all original assignments, each with an exact minimum over the ancillas
                let v = verify_reduction(&hubo, &qubo, &ledger, 20).map_err(|e| e.to_string())?;
                ensure!(
                    v.passed,
                    "N={n} bits={bits}: verification failed {:?}",
                    v.counterexample
                );
                ensure!(
                    hubo_min == reference && v.original_minimum == reference && v.reduced_minimum == reference,
                    "N={n} bits={bits} fix_lsb={fix_lsb}: hubo {hubo_min}, qubo {}, reference {reference}",
                    v.reduced_minimum
                );
                if qubo.num_vars <= 24 {
                    let (qubo_min, _) = exact_minimum(&qubo.poly, 24).map_err(|e| e.to_string())?;
                    ensure!(
                        qubo_min == reference,
                        "N={n} bits={bits}: joint qubo minimum {qubo_min}"
                    );
                    joint += 1;
                }
                models += 1;
            }
        }
    }
    Ok(format!(
        "cubic 8x2 and quartic 16x128 tables exact; {models} semiprime models equal ({joint} also by joint enumeration)"
    ))
}

fn ancilla_counts() -> Outcome {
    let mut seen = Vec::new();
    for n in 2..=5u32 {
        let big_n = (big(1) << (2 * n)) - 1;
        let m = build_plain_hubo(&big_n, &FactorLayout::plain(n)).map_err(|e| e.to_string())?;
        let (_, ledger) = quadratize_model(&m).map_err(|e| e.to_string())?;
        let quartic = ledger.ancillas_of(GadgetKind::QuarticPos);
        let expected = (7 * n * n * (n - 1) * (n - 1) / 4) as usize;
        ensure!(
            quartic == expected,
            "n={n}: {quartic} quartic ancillas, expected {expected}"
        );
        seen.push(quartic);
    }
    let m = build_plain_hubo(&big(15), &FactorLayout::odd(3)).map_err(|e| e.to_string())?;
    let (_, ledger) = quadratize_model(&m).map_err(|e| e.to_string())?;
    ensure!(
        ledger.ancilla_count() == 11,
        "N=15 odd: {} ancillas",
        ledger.ancilla_count()
    );
    Ok(format!(
        "quartic ancillas {seen:?} for n=2..5; 11 for N=15 with fixed LSB"
    ))
}

fn quadratized_fifteen() -> Outcome {
    let hubo = build_plain_hubo(&big(15), &FactorLayout::odd(3)).map_err(|e| e.to_string())?;
    let (qubo, ledger) = quadratize_model(&hubo).map_err(|e| e.to_string())?;
    let h = enumerate_exact_vars(&hubo.poly, hubo.num_vars, 26).map_err(|e| e.to_string())?;
    let q = enumerate_exact(&qubo.poly, 26).map_err(|e| e.to_string())?;
    ensure!(q[0].assignment.len() == 15, "expected 15 variables");
    ensure!(h[0].energy_full == q[0].energy_full, "full minima differ");
    ensure!(
        q[0].energy_paper == &h[0].energy_paper - &ledger.total_shift,
        "reduced {} != hubo {} - shift {}",
        q[0].energy_paper,
        h[0].energy_paper,
        ledger.total_shift
    );
    let mut pair = qubo.decode(&q[0].assignment).map_err(|e| e.to_string())?;
    if pair.0 > pair.1 {
        pair = (pair.1, pair.0);
    }
    ensure!(pair == (big(3), big(5)), "decoded {pair:?}");
    // the published minimum
    ensure!(
        q[0].energy_paper == big(-2756),
        "minimum {} differs from -2756",
        q[0].energy_paper
    );
    Ok(format!(
        "reduced minimum {} = {} - {} (shift); decodes to 3 x 5",
        q[0].energy_paper, h[0].energy_paper, ledger.total_shift
    ))
}

fn decomposition_trace() -> Outcome {
    let r = decompose_solve(&big(15), 3, DEFAULT_BRANCH_BUDGET).map_err(|e| e.to_string())?;
    let steps: Vec<(BigInt, BigInt)> = r.stages.iter().map(|s| (s.p_step.clone(), s.q_step.clone())).collect();
    let expected = vec![(big(4), big(4)), (big(0), big(0)), (big(-1), big(1))];
    ensure!(steps == expected, "stage values {steps:?}");
    ensure!(r.factors == Some((big(3), big(5))), "result {:?}", r.factors);
    Ok("stages (4,4) -> (0,0) -> (-1,1), result (3,5)".into())
}

fn decomposition_property() -> Outcome {
    let primes = primes_below(64);
    let mut pool = Vec::new();
    for (i, &p) in primes.iter().enumerate() {
        for &q in &primes[i..] {
            if p * q < 4 {
                continue;
            }
            let bits = bit_len(q);
            match decompose_solve(&big(p * q), bits, DEFAULT_BRANCH_BUDGET) {
                Ok(r) if r.unique_minima => pool.push((p, q, bits, r)),
                _ => {}
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    pool.shuffle(&mut rng);
    pool.truncate(50);
    let checked = pool.len();
    let failures: Vec<String> = pool
        .iter()
        .filter(|(p, q, _, r)| !matches!(&r.factors, Some((a, b)) if a * b == big(p * q)))
        .map(|(p, q, bits, r)| {
            let last = r.stages.last().unwrap();
            format!("{p}x{q} (n={bits}) ended at {}x{}", last.p_acc, last.q_acc)
        })
        .collect();
    ensure!(
        checked >= 50,
        "only {checked} semiprimes have unique stage minima; failures: {failures:?}"
    );
    ensure!(
        failures.is_empty(),
        "{} of {checked} failed: {failures:?}",
        failures.len()
    );
    Ok(format!("{checked} semiprimes with unique stage minima factored"))
}

fn determinism() -> Outcome {
    let commands = [
        format!("factor --n {N_A} --bits 14 --fix-lsb --method sa --seed 3 --sweeps 2000 --restarts 8"),
        format!(
            "factor --n {N_A} --bits 14 --fix-lsb --method sa --seed 3 --sweeps 2000 --restarts 8 --block-workers 3"
        ),
        "factor --n 15 --bits 3 --fix-lsb --method qubo-sa --seed 9 --sweeps 500 --restarts 4 --json".into(),
        "factor --n 143 --bits 4 --method decomp".into(),
        "factor --n 15 --bits 3 --method exact --json".into(),
        "histogram --n 15 --bits 3 --fix-lsb --method qubo-exact".into(),
    ];
    let mut outputs = Vec::new();
    for c in &commands {
        let a = cli_out(&args(c));
        let b = cli_out(&args(c));
        ensure!(a == b, "output of `{c}` differs between runs");
        outputs.push(a.1);
    }
    ensure!(outputs[0] == outputs[1], "annealing output depends on worker count");

    for (n, stride, coord) in [
        (N_A, 64u64, BlockCoord::new(157, 158, 64)),
        (N_B, 1_000_000, BlockCoord::new(1, 1, 1_000_000)),
    ] {
        let run = |workers| {
            range_search(
                &big(n),
                6,
                false,
                default_block_plan(&big(n), 6, Some(&big(stride))),
                &BlockSolver::Exact,
                workers,
                None,
            )
        };
        let one = run(1).map_err(|e| e.to_string())?;
        let four = run(4).map_err(|e| e.to_string())?;
        ensure!(one == four, "N={n}: 1 and 4 workers disagree");
        let hit = one.hit.ok_or("no hit")?;
        ensure!(hit.coord == coord, "N={n}: hit {:?}", hit.coord);
    }
    Ok(format!(
        "{} commands byte-identical on rerun; range search same with 1 and 4 workers",
        commands.len()
    ))
}

fn precision_guard() -> Outcome {
    let (p, q) = (1_024_693u64, 1_024_697u64);
    ensure!(is_prime(p) && is_prime(q), "planted factors are not prime");
    let n = p * q;
    ensure!(
        n as f64 > 1.049e12 && (n as f64) < 1.051e12,
        "N={n} is not near 1.05e12"
    );
    let coord = BlockCoord::new(p / 64, q / 64, 64);
    let model = build_range_hubo(&big(n), &coord.layout(6, false)).map_err(|e| e.to_string())?;
    let scale = model.poly.abs_bound();
    ensure!(
        scale.bits() > 53,
        "energies fit in a double; the check would prove nothing"
    );

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("model.json");
    save_model(&model, None, &path).map_err(|e| e.to_string())?;
    let (loaded, _) = load_model(&path).map_err(|e| e.to_string())?;
    ensure!(loaded == model, "model changed across save/load");

    let samples = enumerate_exact(&loaded.poly, 26).map_err(|e| e.to_string())?;
    let best = &samples[0];
    let residual = big(n) - coord.s_i() * coord.s_j();
    ensure!(
        best.energy_paper == -(&residual * &residual),
        "minimum {}",
        best.energy_paper
    );
    ensure!(best.energy_full == big(0), "full minimum {}", best.energy_full);
    let (a, b) = loaded.decode(&best.assignment).map_err(|e| e.to_string())?;
    let pair = if a <= b { (a, b) } else { (b, a) };
    ensure!(pair == (big(p), big(q)), "decoded {pair:?}");
    Ok(format!(
        "N={n}: {}-bit energy scale, exact minimum {} after save/load, factors {p} x {q}",
        scale.bits(),
        best.energy_paper
    ))
}

fn main() {
    let checks: [Check; 11] = [
        ("1", "small-semiprime sweep", semiprime_sweep),
        ("2a", "102,454,763 by range search", headline_a_range),
        ("2b", "102,454,763 by annealing", headline_a_anneal),
        ("3", "1,000,070,001,221 block and plan", headline_b),
        ("4", "gadget soundness", gadget_soundness),
        ("5", "ancilla counts", ancilla_counts),
        ("6", "quadratized N=15 minimum", quadratized_fifteen),
        ("7a", "decomposition trace for 15", decomposition_trace),
        ("7b", "decomposition with unique stage minima", decomposition_property),
        ("8", "determinism and worker independence", determinism),
        ("9", "exact arithmetic near 1.05e12", precision_guard),
    ];
    let mut failed = 0;
    for (id, name, check) in checks {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {id:>3} {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:>3} {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
