//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::f64::consts::PI;
use std::fs;
use std::sync::Arc;
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use singular_fractional::cli::{run_command, Command, RunConfig};
use singular_fractional::continuation::{
    estimate_limit, run_continuation, uniqueness_probe, ContinuationOptions, ContinuationReport,
    EpsSchedule,
};
use singular_fractional::extension::{
    calibrate_cs, cylinder_energy, extend_field, extension_profile, YGridPolicy,
};
use singular_fractional::geometry::{Domain, EigenBasis};
use singular_fractional::monotone::{build_supersolution, solve_regularized, SolveOptions};
use singular_fractional::nonlinearity::SingularRhs;
use singular_fractional::spectral::{apply_fractional, hs_norm_sq, max_abs};
use singular_fractional::{FracExponent, GridField, SpectralField};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn interval() -> Domain {
    Domain::interval(PI).unwrap()
}

fn half() -> FracExponent {
    FracExponent::new(0.5, 0.5).unwrap()
}

/// Continuation runs shared by several criteria.
struct Runs {
    line: ContinuationReport,
    square: ContinuationReport,
    line_time: Duration,
    square_time: Duration,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn eigen_identities() -> Verdict {
    let t = Instant::now();
    let b = EigenBasis::with_resolution(interval(), 16, 1).unwrap();
    let mut worst = 0.0f64;
    for s in [0.25, 0.5, 0.75] {
        for k in 0..16 {
            let phi = SpectralField::unit(b.clone(), k).unwrap();
            let out = apply_fractional(&phi, s).unwrap();
            let expect = ((k + 1) as f64).powf(2.0 * s);
            for (j, &c) in out.coeffs().iter().enumerate() {
                let target = if j == k { expect } else { 0.0 };
                worst = worst.max((c - target).abs() / expect);
            }
        }
    }
    let el = t.elapsed();
    verdict(
        worst <= 1e-12 && el < Duration::from_secs(1),
        format!("max relative error {worst:.2e}, {el:.2?}"),
    )
}

fn classical_reduction() -> Verdict {
    let t = Instant::now();
    let spec = FracExponent::new(1.0, 0.5).unwrap();
    let b = EigenBasis::with_resolution(interval(), 256, 1).unwrap();
    let g = SingularRhs::new(0.5, 1.0).unwrap();
    let w = build_supersolution(&b, 1.0, &g, 1e-8).unwrap();
    let exact = GridField::from_fn(b.grid().clone(), |x| x[0] * (PI - x[0]) / 2.0);
    let poisson = w.sup_distance(&exact).unwrap();

    // the regularized solve is compared at N = 1024, where the truncation
    // error of the sine expansion (about N^{-2}) is below the tolerance
    let b = EigenBasis::with_resolution(interval(), 1024, 1).unwrap();
    let r = solve_regularized(&b, spec, 1.0, None, &SolveOptions::default()).unwrap();
    let u = r.solution().values();
    let fd = common::fd_classical(u.len() - 1);
    let newton = (1..u.len() - 1)
        .map(|i| (u[i] - fd[i - 1]).abs())
        .fold(0.0, f64::max);
    let el = t.elapsed();
    verdict(
        poisson <= 1e-4 && r.converged() && newton <= 1e-6 && el < Duration::from_secs(10),
        format!(
            "Poisson (N=256) {poisson:.2e}, finite differences (N=1024) {newton:.2e}, {el:.2?}"
        ),
    )
}

fn bracketing() -> Verdict {
    let t = Instant::now();
    let b = EigenBasis::with_resolution(interval(), 128, 1).unwrap();
    let opts = SolveOptions::default();
    let mut failures = Vec::new();
    let mut worst_gap = 0.0f64;
    for s in [0.25, 0.5, 0.75] {
        for p in [0.3, 0.5, 0.9] {
            for eps in [0.5, 0.1] {
                let spec = FracExponent::new(s, p).unwrap();
                let r = solve_regularized(&b, spec, eps, None, &opts).unwrap();
                let c = &r.bracket.certificates;
                worst_gap = worst_gap.max(r.bracket.gap);
                let ok = r.converged()
                    && c.ascending()
                    && c.descending()
                    && c.confined()
                    && r.bracket.gap <= 10.0 * opts.tol_inner;
                if !ok {
                    failures.push(format!("(s={s}, p={p}, eps={eps})"));
                }
            }
        }
    }
    let el = t.elapsed();
    verdict(
        failures.is_empty() && el < Duration::from_secs(120),
        format!(
            "18 solves, worst gap {worst_gap:.2e}, {el:.2?} {}",
            failures.join(" ")
        ),
    )
}

fn worst_pair_margin(r: &ContinuationReport) -> f64 {
    r.pairs
        .iter()
        .map(|p| (-p.lower_margin).max(p.upper_margin))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn ordering(runs: &Runs) -> Verdict {
    let ok =
        |r: &ContinuationReport| r.truncated.is_none() && r.completed() == 15 && r.ordering_holds();
    let total = runs.line_time + runs.square_time;
    verdict(
        ok(&runs.line) && ok(&runs.square) && total < Duration::from_secs(600),
        format!(
            "worst margin interval {:.2e} square {:.2e}, {:.2?} + {:.2?}",
            worst_pair_margin(&runs.line),
            worst_pair_margin(&runs.square),
            runs.line_time,
            runs.square_time
        ),
    )
}

fn uniform_bound(runs: &Runs) -> Verdict {
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, r) in [("interval", &runs.line), ("square", &runs.square)] {
        let est = estimate_limit(r).unwrap();
        ok &= r.uniform_bound_holds()
            && est.within_envelope
            && est.interior_positive()
            && (est.tail_bound - 3.0517578125e-5).abs() < 1e-15;
        detail.push(format!(
            "{name}: sup {:.6}, tail bound {:.3e}, interior min {:.2e}",
            r.sup_trace.last().unwrap(),
            est.tail_bound,
            est.interior_min
        ));
    }
    verdict(ok, detail.join("; "))
}

fn energy(runs: &Runs) -> Verdict {
    let worst = |r: &ContinuationReport| {
        r.energy
            .iter()
            .map(|e| e.relative_defect)
            .fold(0.0, f64::max)
    };
    let (a, b) = (worst(&runs.line), worst(&runs.square));
    let ok = a <= 1e-6
        && b <= 1e-6
        && runs.line.energy_chain_holds()
        && runs.square.energy_chain_holds();
    let bound = runs.line.energy.last().unwrap().bound_unit;
    verdict(
        ok,
        format!("worst defect interval {a:.2e} square {b:.2e}, last bound {bound:.6}"),
    )
}

fn extension() -> Verdict {
    let t = Instant::now();
    let policy = YGridPolicy::default();
    let b = EigenBasis::with_resolution(interval(), 16, 1).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for s in [0.25, 0.5, 0.75] {
        let cal = calibrate_cs(&b, s, 5, &policy).unwrap();
        ok &= cal.passed();
        if s == 0.5 {
            ok &= (cal.c_s - 1.0).abs() <= 1e-2;
        }
        detail.push(format!(
            "s={s}: c_s {:.5} spread {:.1e}",
            cal.c_s, cal.spread
        ));
    }

    let mut profile_err = 0.0f64;
    for i in 0..5 {
        let lambda = b.eigenvalue(i);
        let prof = extension_profile(lambda, 0.5, &policy.grid_for(lambda).unwrap()).unwrap();
        for (y, th) in prof.y.iter().zip(&prof.theta) {
            profile_err = profile_err.max((th - (-lambda.sqrt() * y).exp()).abs());
        }
    }
    ok &= profile_err <= 1e-6;

    let mut runner = TestRunner::deterministic();
    let strategy = proptest::collection::vec(-1.0f64..1.0, 8);
    let mut energy_err = 0.0f64;
    for s in [0.25, 0.5, 0.75] {
        let c_s = common::extension_constant(s);
        for _ in 0..4 {
            let c = strategy.new_tree(&mut runner).unwrap().current();
            let u = SpectralField::new(b.clone(), [c, vec![0.0; 8]].concat()).unwrap();
            let e = cylinder_energy(&extend_field(&u, s, &policy).unwrap()).unwrap();
            let hs = hs_norm_sq(&u, s).unwrap();
            energy_err = energy_err.max((e - c_s * hs).abs() / (c_s * hs));
        }
    }
    ok &= energy_err <= 1e-2;
    let el = t.elapsed();
    detail.push(format!(
        "profile error {profile_err:.1e}, energy error {energy_err:.1e}, {el:.2?}"
    ));
    verdict(ok && el < Duration::from_secs(30), detail.join("; "))
}

fn uniqueness(basis: &Arc<EigenBasis>) -> Verdict {
    let opts = ContinuationOptions::default();
    let a = EpsSchedule::default();
    let b = EpsSchedule::ending_at(a.last(), 0.4).unwrap();
    let (probe, ra, _) = uniqueness_probe(basis, half(), &a, &b, &opts, &opts, 0.0).unwrap();
    let fresh_opts = ContinuationOptions {
        warm_start: false,
        ..opts
    };
    let fresh = run_continuation(basis, half(), &a, &fresh_opts).unwrap();
    let warm_fresh = ra
        .limit
        .as_ref()
        .unwrap()
        .sup_distance(fresh.limit.as_ref().unwrap())
        .unwrap();
    let ok = probe.both_completed
        && probe.sup_difference <= 2.0 * a.last()
        && warm_fresh <= 10.0 * opts.solve.tol_inner;
    verdict(
        ok,
        format!(
            "schedules differ by {:.2e} (bound {:.2e}), warm vs fresh {warm_fresh:.2e}",
            probe.sup_difference,
            2.0 * a.last()
        ),
    )
}

fn limit_residual(runs: &Runs) -> Verdict {
    let coarse = max_abs(&runs.line.limit_residual);
    let b = EigenBasis::with_resolution(interval(), 256, 1).unwrap();
    let fine = run_continuation(
        &b,
        half(),
        &EpsSchedule::default(),
        &ContinuationOptions::default(),
    )
    .unwrap();
    let fine = max_abs(&fine.limit_residual);
    let ratio = fine / coarse;
    verdict(
        coarse <= 1e-3 && ratio <= 0.7,
        format!("N=128 {coarse:.2e}, N=256 {fine:.2e}, ratio {ratio:.2}"),
    )
}

fn determinism() -> Verdict {
    let cfg = RunConfig::new(interval());
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = run_command(Command::Continue, &cfg, a.path()).unwrap();
    let rb = run_command(Command::Continue, &cfg, b.path()).unwrap();
    let mut files = vec!["manifest.json".to_string()];
    files.extend(ra.manifest.files.iter().map(|e| e.path.clone()));
    let differing: Vec<&String> = files
        .iter()
        .filter(|f| fs::read(ra.dir.join(f)).unwrap() != fs::read(rb.dir.join(f)).unwrap())
        .collect();
    verdict(
        differing.is_empty() && ra.manifest == rb.manifest,
        format!("{} files compared, {} differ", files.len(), differing.len()),
    )
}

fn main() {
    let line_basis = EigenBasis::with_resolution(interval(), 128, 1).unwrap();
    let square_basis =
        EigenBasis::tensor_with_resolution(Domain::rectangle(PI, PI).unwrap(), &[12, 12], 1)
            .unwrap();
    let opts = ContinuationOptions::default();
    let sched = EpsSchedule::default();
    let (line, line_time) = timed(|| run_continuation(&line_basis, half(), &sched, &opts).unwrap());
    let (square, square_time) =
        timed(|| run_continuation(&square_basis, half(), &sched, &opts).unwrap());
    let runs = Runs {
        line,
        square,
        line_time,
        square_time,
    };

    let results = [
        ("eigen-identities", eigen_identities()),
        ("classical reduction", classical_reduction()),
        ("bracketing", bracketing()),
        ("ordering", ordering(&runs)),
        ("uniform bound and limit", uniform_bound(&runs)),
        ("energy identity", energy(&runs)),
        ("extension equivalence", extension()),
        ("uniqueness probe", uniqueness(&line_basis)),
        ("limit weak residual", limit_residual(&runs)),
        ("determinism", determinism()),
    ];
    let mut failed = 0;
    for (i, (name, v)) in results.iter().enumerate() {
        println!(
            "criterion {:>2} {:<24} {}  {}",
            i + 1,
            name,
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
        failed += usize::from(!v.passed);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
