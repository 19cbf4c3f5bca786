//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report is always shown:
//! `cargo test -p betacount --test acceptance`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;
use std::process::{Command as Process, ExitCode};
use std::time::{Duration, Instant};

use betacount::cli::{execute, Cli, Format};
use betacount::counting::{count_by_interval_oracle, count_prefixes, normalized_count};
use betacount::density::{apply_p, integral, iterate_f_n, l1_distance, PiecewiseConstant};
use betacount::garsia::{build_nu_n, exact_entropy};
use betacount::numeric::{uniform_point, Backend, FloatBeta, Limits, QuadBeta};
use betacount::random_beta::{bound_check, choice_tree_count, McParams};
use clap::Parser;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;

// Pinned tolerances.
const FLOAT_TOL: f64 = 1e-10;
const POINTWISE_TOL: f64 = 1e-9;
const INTEGRAL_TOL: f64 = 1e-12;
const GAP_MARGIN: f64 = 0.01;
const BOUND_SLACK: f64 = 0.05;
const BOUND_FRACTION: f64 = 0.95;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(stream);
    r
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// The exact golden-ratio base plus five random float bases.
#[allow(clippy::large_enum_variant)]
enum AnyBeta {
    Quad(QuadBeta),
    Float(FloatBeta),
}

fn mixed_bases() -> Vec<AnyBeta> {
    let mut r = rng(1);
    let mut out = vec![AnyBeta::Quad(QuadBeta::golden())];
    for _ in 0..5 {
        let b = r.random_range(1.01..1.99);
        out.push(AnyBeta::Float(FloatBeta::with_tolerance(b, FLOAT_TOL).unwrap()));
    }
    out
}

/// Draw a point and depth until neither computation sits within the float
/// tolerance of a window endpoint, then compare `lhs` and `rhs`.
fn compare_on_instance<B: Backend>(
    beta: &B,
    r: &mut ChaCha8Rng,
    lhs: impl Fn(&B::Num, usize) -> (BigUint, bool),
    rhs: impl Fn(&B::Num, usize) -> (BigUint, bool),
) -> (bool, usize) {
    let mut resampled = 0;
    loop {
        let x = uniform_point(beta, r);
        let n = r.random_range(1..=14);
        let (a, near_a) = lhs(&x, n);
        let (b, near_b) = rhs(&x, n);
        if near_a || near_b {
            resampled += 1;
            continue;
        }
        return (a == b, resampled);
    }
}

fn over_mixed_instances(
    lhs_rhs: &dyn Fn(&AnyBeta, &mut ChaCha8Rng) -> (bool, usize),
    stream: u64,
) -> (usize, usize) {
    let bases = mixed_bases();
    let mut r = rng(stream);
    let (mut mismatches, mut resampled) = (0, 0);
    for i in 0..200 {
        let (ok, re) = lhs_rhs(&bases[i % bases.len()], &mut r);
        mismatches += usize::from(!ok);
        resampled += re;
    }
    (mismatches, resampled)
}

fn oracle_equivalence() -> Outcome {
    let limits = Limits::default();
    fn one<B: Backend>(beta: &B, r: &mut ChaCha8Rng, limits: &Limits) -> (bool, usize) {
        compare_on_instance(
            beta,
            r,
            |x, n| {
                let c = count_prefixes(x, n, beta, limits).unwrap();
                (c.count, c.near_boundary)
            },
            |x, n| {
                let o = count_by_interval_oracle(x, n, beta, limits).unwrap();
                (BigUint::from(o.count), o.near_boundary)
            },
        )
    }
    let (mismatches, resampled) = over_mixed_instances(
        &|b, r| match b {
            AnyBeta::Quad(q) => one(q, r, &limits),
            AnyBeta::Float(f) => one(f, r, &limits),
        },
        2,
    );
    check(mismatches == 0, format!("200 instances, {mismatches} mismatches, {resampled} resampled"))
}

fn transfer_iterates_match_counts() -> Outcome {
    let limits = Limits::default();
    fn worst<B: Backend>(beta: &B, limits: &Limits, stream: u64, exact: bool) -> (usize, f64) {
        let iterates: Vec<_> = (0..=12).map(|n| iterate_f_n(beta, n, limits).unwrap()).collect();
        let mut r = rng(stream);
        let (mut bad, mut max_err) = (0, 0.0f64);
        let mut done = 0;
        while done < 100 {
            let x = uniform_point(beta, &mut r);
            let n = r.random_range(1..=12);
            let c = count_prefixes(&x, n, beta, limits).unwrap();
            if c.near_boundary {
                continue;
            }
            done += 1;
            let from_count = normalized_count(beta, n, &c.count);
            let from_p = iterates[n].evaluate(beta, &x);
            if exact {
                bad += usize::from(beta.cmp(&from_count, &from_p) != Ordering::Equal);
            } else {
                let err = (beta.to_f64(&from_count) - beta.to_f64(&from_p)).abs();
                max_err = max_err.max(err);
                bad += usize::from(err > POINTWISE_TOL);
            }
        }
        (bad, max_err)
    }
    let (bad_q, _) = worst(&QuadBeta::golden(), &limits, 3, true);
    let (bad_f, err) = worst(&FloatBeta::with_tolerance(1.8, FLOAT_TOL).unwrap(), &limits, 4, false);
    check(
        bad_q == 0 && bad_f == 0,
        format!("golden: {bad_q}/100 inexact; 1.8: {bad_f}/100 beyond {POINTWISE_TOL:e} (max err {err:.2e})"),
    )
}

fn normalization() -> Outcome {
    let limits = Limits::default();
    let g = QuadBeta::golden();
    let exact_bad: Vec<usize> = (0..=12)
        .filter(|&n| integral(&iterate_f_n(&g, n, &limits).unwrap(), &g) != g.one())
        .collect();
    let mut worst = 0.0f64;
    for b in [1.3, 1.5, 1.8, 1.93] {
        let f = FloatBeta::with_tolerance(b, FLOAT_TOL).unwrap();
        for n in 0..=10 {
            worst = worst.max((integral(&iterate_f_n(&f, n, &limits).unwrap(), &f) - 1.0).abs());
        }
    }
    check(
        exact_bad.is_empty() && worst <= INTEGRAL_TOL,
        format!("golden n<=12 inexact at {exact_bad:?}; float n<=10 max |1 - integral| = {worst:.2e}"),
    )
}

/// Random step function on `I_β` with values `k/16`, `k < 64`.
fn random_step<B: Backend>(beta: &B, r: &mut ChaCha8Rng) -> PiecewiseConstant<B::Num> {
    let pieces = r.random_range(1..=12);
    let mut bps: Vec<B::Num> = (1..pieces).map(|_| uniform_point(beta, r)).collect();
    bps.push(beta.zero());
    bps.push(beta.i_beta_right());
    bps.sort_by(|a, b| beta.total_cmp(a, b));
    bps.dedup_by(|a, b| beta.cmp(a, b) == Ordering::Equal);
    let values = (1..bps.len()).map(|_| beta.from_rational(&rat(r.random_range(0..64), 16))).collect();
    PiecewiseConstant::new(beta, bps, values).unwrap()
}

/// Union of both grids with the midpoint of every cell.
fn common_midpoints<B: Backend>(
    beta: &B,
    f: &PiecewiseConstant<B::Num>,
    g: &PiecewiseConstant<B::Num>,
) -> (Vec<B::Num>, Vec<B::Num>) {
    let mut bps: Vec<B::Num> = f.breakpoints().iter().chain(g.breakpoints()).cloned().collect();
    bps.sort_by(|a, b| beta.total_cmp(a, b));
    bps.dedup_by(|a, b| beta.cmp(a, b) == Ordering::Equal);
    let mids = bps.windows(2).map(|w| beta.half(&beta.add(&w[0], &w[1]))).collect();
    (bps, mids)
}

fn pointwise_sum<B: Backend>(
    beta: &B,
    f: &PiecewiseConstant<B::Num>,
    g: &PiecewiseConstant<B::Num>,
) -> PiecewiseConstant<B::Num> {
    let (bps, mids) = common_midpoints(beta, f, g);
    let values = mids.iter().map(|m| beta.add(&f.evaluate(beta, m), &g.evaluate(beta, m))).collect();
    PiecewiseConstant::new(beta, bps, values).unwrap()
}

/// Failures of monotonicity, homogeneity, integral preservation and L1
/// non-expansion over 50 random pairs each.
fn operator_failures<B: Backend>(beta: &B, stream: u64, slack: f64) -> [usize; 4] {
    let limits = Limits::default();
    let mut r = rng(stream);
    let le = |a: &B::Num, b: &B::Num| {
        if beta.is_exact() {
            beta.le(a, b)
        } else {
            beta.to_f64(a) <= beta.to_f64(b) + slack
        }
    };
    let eq = |a: &B::Num, b: &B::Num| le(a, b) && le(b, a);
    let mut fails = [0usize; 4];
    for _ in 0..50 {
        let f = random_step(beta, &mut r);
        let h = random_step(beta, &mut r);
        let g = pointwise_sum(beta, &f, &h);
        let (pf, pg) = (apply_p(&f, beta, &limits).unwrap(), apply_p(&g, beta, &limits).unwrap());
        let (_, mids) = common_midpoints(beta, &pf, &pg);
        fails[0] += usize::from(!mids.iter().all(|m| le(&pf.evaluate(beta, m), &pg.evaluate(beta, m))));

        let c = beta.from_rational(&rat(r.random_range(1..50), r.random_range(1..20)));
        let p_cf = apply_p(&f.scale(beta, &c), beta, &limits).unwrap();
        let c_pf = pf.scale(beta, &c);
        fails[1] += usize::from(!eq(&l1_distance(&p_cf, &c_pf, beta, &limits).unwrap(), &beta.zero()));

        fails[2] += usize::from(!eq(&integral(&pf, beta), &integral(&f, beta)));

        let k = random_step(beta, &mut r);
        let pk = apply_p(&k, beta, &limits).unwrap();
        let before = l1_distance(&f, &k, beta, &limits).unwrap();
        let after = l1_distance(&pf, &pk, beta, &limits).unwrap();
        fails[3] += usize::from(!le(&after, &before));
    }
    fails
}

fn operator_properties() -> Outcome {
    let exact = operator_failures(&QuadBeta::golden(), 5, 0.0);
    let float = operator_failures(&FloatBeta::with_tolerance(1.8, FLOAT_TOL).unwrap(), 6, INTEGRAL_TOL);
    check(
        exact.iter().chain(&float).all(|&c| c == 0),
        format!("failures [monotone, homogeneous, integral, L1]: golden {exact:?}, 1.8 {float:?}"),
    )
}

fn hitting_number_integral() -> Outcome {
    let limits = Limits::default();
    fn one<B: Backend>(beta: &B, r: &mut ChaCha8Rng, limits: &Limits) -> (bool, usize) {
        compare_on_instance(
            beta,
            r,
            |x, n| (choice_tree_count(x, n, beta, limits).unwrap(), false),
            |x, n| {
                let c = count_prefixes(x, n, beta, limits).unwrap();
                (c.count, c.near_boundary)
            },
        )
    }
    let (mismatches, resampled) = over_mixed_instances(
        &|b, r| match b {
            AnyBeta::Quad(q) => one(q, r, &limits),
            AnyBeta::Float(f) => one(f, r, &limits),
        },
        7,
    );
    let g = QuadBeta::golden();
    let fixture = choice_tree_count(&g.one(), 2, &g, &limits).unwrap();
    check(
        mismatches == 0 && fixture == BigUint::from(3u32),
        format!("200 instances, {mismatches} mismatches, {resampled} resampled; golden x=1 n=2 gives {fixture}"),
    )
}

fn entropy_fixtures() -> Outcome {
    let limits = Limits::default();
    let g = QuadBeta::golden();
    let ln2_once: BTreeMap<u64, BigRational> = [(2, rat(1, 1))].into();
    let mut problems = Vec::new();
    if exact_entropy(&build_nu_n(&g, 1, &limits).unwrap()) != ln2_once {
        problems.push("golden level 1".to_string());
    }
    for b in [1.2, 1.5, 1.8] {
        let f = FloatBeta::with_tolerance(b, FLOAT_TOL).unwrap();
        if exact_entropy(&build_nu_n(&f, 1, &limits).unwrap()) != ln2_once {
            problems.push(format!("{b} level 1"));
        }
    }
    let m3 = build_nu_n(&g, 3, &limits).unwrap();
    let mut masses = m3.masses();
    masses.sort();
    let expected: Vec<BigRational> = std::iter::repeat_n(rat(1, 8), 6).chain([rat(1, 4)]).collect();
    if masses != expected || exact_entropy(&m3) != [(2, rat(11, 4))].into() {
        problems.push(format!("golden level 3: {} atoms", m3.len()));
    }
    for n in 1..=16 {
        let atoms = build_nu_n(&g, n, &limits).unwrap().len();
        let ok = if n <= 2 { atoms == 1 << n } else { atoms < 1 << n };
        if !ok {
            problems.push(format!("|D_{n}| = {atoms}"));
        }
    }
    check(problems.is_empty(), format!("problems: {problems:?}"))
}

fn golden_gap() -> Outcome {
    let limits = Limits::default();
    let g = QuadBeta::golden();
    let mut r = rng(8);
    let n = 18;
    let total: f64 = (0..100)
        .map(|_| {
            let c = count_prefixes(&uniform_point(&g, &mut r), n, &g, &limits).unwrap();
            c.count.to_f64().unwrap().ln() / n as f64
        })
        .sum();
    let mean = total / 100.0;
    let bound = (2.0 / g.beta_f64()).ln() - GAP_MARGIN;
    check(mean <= bound, format!("mean rate {mean:.6} vs ln(2/beta) - {GAP_MARGIN} = {bound:.6}"))
}

fn growth_lower_bound() -> Outcome {
    let limits = Limits::default();
    let params = McParams::new(10_000, 10_000, 42);
    let mut lines = Vec::new();
    let mut all = true;
    let mut record = |name: String, rep: betacount::random_beta::BoundReport| {
        let min_margin = rep.samples.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
        all &= rep.fraction >= BOUND_FRACTION;
        lines.push(format!(
            "{name}: c={:.4}±{:.1e} fraction={:.2} min margin={min_margin:.4}",
            rep.c_beta, rep.c_beta_std_error, rep.fraction
        ));
    };
    let g = QuadBeta::golden();
    record("golden".into(), bound_check(&g, 50, 18, &params, BOUND_SLACK, &limits).map_err(|e| e.to_string())?);
    for b in [1.3, 1.5, 1.8] {
        let f = FloatBeta::with_tolerance(b, FLOAT_TOL).unwrap();
        record(b.to_string(), bound_check(&f, 50, 18, &params, BOUND_SLACK, &limits).map_err(|e| e.to_string())?);
    }
    check(all, lines.join("; "))
}

fn window_mass() -> Outcome {
    let limits = Limits::default();
    let g = QuadBeta::golden();
    let mut r = rng(9);
    let mut bad = 0;
    for (n, m) in [(4usize, 10usize), (6, 12)] {
        let nu = build_nu_n(&g, m, &limits).unwrap();
        let ell = g.prefix_window(n);
        for _ in 0..20 {
            let x = uniform_point(&g, &mut r);
            let mass = nu.mass_in(&g, &g.sub(&x, &ell), &g.add(&x, &ell));
            let count = count_prefixes(&x, n, &g, &limits).unwrap().count;
            let share = BigRational::new(count.into(), (BigUint::from(1u32) << n).into());
            bad += usize::from(mass < share);
        }
    }
    check(bad == 0, format!("40 windows, {bad} below N_n/2^n"))
}

fn determinism() -> Outcome {
    let cases: [&[&str]; 3] = [
        &["simulate", "--beta", "1.8", "--orbits", "200", "--steps", "2000", "--seed", "42"],
        &["bound", "--beta-quad", "1,1", "--n", "14", "--samples", "10", "--orbits", "50", "--steps", "1000"],
        &["diagnose", "--beta", "1.5", "--n-max", "14", "--samples", "10", "--seed", "3"],
    ];
    let mut differing = Vec::new();
    for args in cases {
        let cli = Cli::try_parse_from(std::iter::once("betacount").chain(args.iter().copied())).unwrap();
        let cfg = cli.common.config().unwrap().unwrap();
        let in_pool = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| execute(&cfg, &cli.command).unwrap().render(Format::Csv))
        };
        let reference = in_pool(1);
        let binary = |threads: &str| {
            Process::new(env!("CARGO_BIN_EXE_betacount"))
                .args(args)
                .args(["--format", "csv"])
                .env("RAYON_NUM_THREADS", threads)
                .output()
                .unwrap()
                .stdout
        };
        let same = reference == in_pool(4) && reference == in_pool(1) && reference == binary("1") && reference == binary("3");
        if !same {
            differing.push(args[0]);
        }
    }
    check(differing.is_empty(), format!("simulate/bound/diagnose across 1-4 threads; differing: {differing:?}"))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "prefix count equals interval oracle", budget: Duration::from_secs(60), run: oracle_equivalence },
        Criterion { id: 2, name: "operator iterates match normalized counts", budget: Duration::from_secs(60), run: transfer_iterates_match_counts },
        Criterion { id: 3, name: "densities integrate to one", budget: Duration::from_secs(60), run: normalization },
        Criterion { id: 4, name: "operator monotone, linear, mass-preserving, L1-contracting", budget: Duration::from_secs(60), run: operator_properties },
        Criterion { id: 5, name: "hitting-number integral equals prefix count", budget: Duration::from_secs(60), run: hitting_number_integral },
        Criterion { id: 6, name: "entropy and sum-set fixtures", budget: Duration::from_secs(60), run: entropy_fixtures },
        Criterion { id: 7, name: "golden-ratio growth gap", budget: Duration::from_secs(120), run: golden_gap },
        Criterion { id: 8, name: "growth lower bound from switch frequency", budget: Duration::from_secs(600), run: growth_lower_bound },
        Criterion { id: 9, name: "window mass dominates prefix share", budget: Duration::from_secs(60), run: window_mass },
        Criterion { id: 10, name: "seeded output is byte-identical", budget: Duration::from_secs(60), run: determinism },
    ];
    let mut failed = 0;
    let mut err = std::io::stderr().lock();
    for c in criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(d) if elapsed <= c.budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {}s budget", c.budget.as_secs())),
            Err(d) => (false, d),
        };
        failed += usize::from(!pass);
        let _ = writeln!(
            err,
            "criterion {:>2} {} [{}] ({:.1}s): {detail}",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            c.name,
            elapsed.as_secs_f64()
        );
    }
    let _ = writeln!(err, "acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
