//! Command pipelines. Each command runs its module pipeline, turns every
//! check into a named [`Certificate`], and writes its data files, a
//! `report.json`, a `failure.json` when a certificate fails, and a manifest.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use super::artifacts::{Manifest, RunDir};
use super::config::RunConfig;
use crate::continuation::{self, ContinuationReport, EpsSchedule, StepRecord};
use crate::error::{Error, Result};
use crate::extension::{self, Calibration};
use crate::field::{GridField, SpectralField};
use crate::geometry::EigenBasis;
use crate::monotone::{self, SolveReport};
use crate::spectral::{self, FracExponent};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CERTIFICATE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Relative tolerance of the extension energy checks.
pub const ENERGY_MATCH_TOL: f64 = 1e-2;
/// Bound on orthonormality and round-trip defects.
pub const BASIS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    BasisCheck,
    SolveEps,
    Continue,
    ValidateExtension,
    UniquenessProbe,
    /// Every stage above, in order, into one run directory.
    Report,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::BasisCheck,
        Command::SolveEps,
        Command::Continue,
        Command::ValidateExtension,
        Command::UniquenessProbe,
        Command::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::BasisCheck => "basis-check",
            Command::SolveEps => "solve-eps",
            Command::Continue => "continue",
            Command::ValidateExtension => "validate-extension",
            Command::UniquenessProbe => "uniqueness-probe",
            Command::Report => "report",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command `{s}`")))
    }
}

/// One pass/fail check with the measured value and its bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub bound: Option<f64>,
    pub detail: String,
}

impl Certificate {
    fn at_most(name: String, value: f64, bound: f64) -> Self {
        Certificate {
            name,
            passed: value <= bound,
            value: Some(value),
            bound: Some(bound),
            detail: String::new(),
        }
    }

    fn flag(name: String, passed: bool, detail: impl Into<String>) -> Self {
        Certificate {
            name,
            passed,
            value: None,
            bound: None,
            detail: detail.into(),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// Contents of `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config_echo: RunConfig,
    pub certificates: Vec<Certificate>,
    pub traces: BTreeMap<String, Value>,
    pub limit: Option<Value>,
    pub calibration: Option<Calibration>,
}

/// Contents of `failure.json`.
#[derive(Debug, Clone, Serialize)]
pub struct FailureRecord {
    pub command: Command,
    pub certificate: Certificate,
    pub failed_count: usize,
}

#[derive(Debug)]
pub struct Outcome {
    pub command: Command,
    pub dir: PathBuf,
    pub report: RunReport,
    pub manifest: Manifest,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.report.certificates.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Certificate> {
        self.report.certificates.iter().find(|c| !c.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_OK
        } else {
            EXIT_CERTIFICATE
        }
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    basis: Arc<EigenBasis>,
    spec: FracExponent,
    dir: RunDir,
    prefix: &'static str,
    stage: &'static str,
    report: RunReport,
}

impl Ctx<'_> {
    fn path(&self, file: &str) -> String {
        format!("{}{file}", self.prefix)
    }

    fn name(&self, check: &str) -> String {
        format!("{}/{check}", self.stage)
    }

    fn push(&mut self, c: Certificate) {
        self.report.certificates.push(c);
    }

    fn trace(&mut self, value: Value) {
        self.report.traces.insert(self.stage.to_string(), value);
    }

    fn fail(&mut self, check: &str, err: &Error) {
        let name = self.name(check);
        self.push(Certificate::flag(name, false, err.to_string()));
    }
}

/// Validates `cfg`, runs `command` into `<out>/<command>` and writes the
/// artifacts. Certificate failures are reported in the outcome; only
/// configuration and IO problems are errors.
pub fn run_command(command: Command, cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    cfg.validate()?;
    let basis = cfg.basis()?;
    let spec = cfg.exponent()?;
    let root = out.join(command.name());
    let dir = RunDir::create(&root)?;
    let mut ctx = Ctx {
        cfg,
        basis,
        spec,
        dir,
        prefix: "",
        stage: command.name(),
        report: RunReport {
            config_echo: cfg.clone(),
            certificates: Vec::new(),
            traces: BTreeMap::new(),
            limit: None,
            calibration: None,
        },
    };
    let stages: &[Command] = match command {
        Command::Report => &Command::ALL[..5],
        _ => std::slice::from_ref(&command),
    };
    for &stage in stages {
        ctx.stage = stage.name();
        if command == Command::Report {
            ctx.prefix = match stage {
                Command::BasisCheck => "basis-check/",
                Command::SolveEps => "solve-eps/",
                Command::Continue => "continue/",
                Command::ValidateExtension => "validate-extension/",
                _ => "uniqueness-probe/",
            };
        }
        match stage {
            Command::BasisCheck => basis_check(&mut ctx)?,
            Command::SolveEps => solve_eps(&mut ctx)?,
            Command::Continue => continue_run(&mut ctx)?,
            Command::ValidateExtension => validate_extension(&mut ctx)?,
            Command::UniquenessProbe => uniqueness(&mut ctx)?,
            Command::Report => unreachable!("report is not a stage"),
        }
    }

    let Ctx {
        mut dir, report, ..
    } = ctx;
    dir.write_json("report.json", &report)?;
    if let Some(first) = report.certificates.iter().find(|c| !c.passed) {
        let record = FailureRecord {
            command,
            certificate: first.clone(),
            failed_count: report.certificates.iter().filter(|c| !c.passed).count(),
        };
        dir.write_json("failure.json", &record)?;
    }
    let manifest = dir.finish()?;
    Ok(Outcome {
        command,
        dir: root,
        report,
        manifest,
    })
}

fn basis_check(ctx: &mut Ctx<'_>) -> Result<()> {
    let b = ctx.basis.clone();
    let ortho = b.orthonormality_defect();
    let c = Certificate::at_most(ctx.name("orthonormality"), ortho, BASIS_TOL);
    ctx.push(c);

    // analyze ∘ synthesize on a fixed decaying coefficient vector
    let coeffs: Vec<f64> = (0..b.len())
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } / (1.0 + i as f64))
        .collect();
    let c = SpectralField::new(b.clone(), coeffs)?;
    let back = b.analyze(&c.synthesize())?;
    let round = c
        .coeffs()
        .iter()
        .zip(back.coeffs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let cert = Certificate::at_most(ctx.name("round-trip"), round, BASIS_TOL);
    ctx.push(cert);

    let boundary = (0..b.len())
        .flat_map(|i| {
            let f = b.mode_field(i);
            let g = f.grid().clone();
            (0..g.len())
                .filter(move |&n| g.is_boundary(n))
                .map(move |n| f.values()[n].abs())
        })
        .fold(0.0, f64::max);
    let cert = Certificate::at_most(ctx.name("boundary-zero"), boundary, 0.0);
    ctx.push(cert);
    // tied eigenvalues may differ in the last bit
    let sorted = b
        .modes()
        .windows(2)
        .all(|w| w[1].eigenvalue >= w[0].eigenvalue * (1.0 - 1e-12));
    let cert = Certificate::flag(
        ctx.name("eigenvalues-sorted"),
        sorted && b.eigenvalue(0) > 0.0,
        "",
    );
    ctx.push(cert);

    let dim = b.domain().dim();
    let mut header: Vec<&str> = vec!["i", "k1"];
    if dim == 2 {
        header.push("k2");
    }
    header.push("lambda");
    let rows = b.modes().iter().enumerate().map(|(i, m)| {
        let mut row = vec![(i + 1) as f64];
        row.extend(m.index.iter().map(|&k| k as f64));
        row.push(m.eigenvalue);
        row
    });
    let path = ctx.path("eigenvalues.csv");
    ctx.dir.write_table(&path, &header, rows)?;

    let shown = b.len().min(4);
    let grid = b.grid().clone();
    let fields: Vec<GridField> = (0..shown).map(|i| b.mode_field(i)).collect();
    let names = ["phi1", "phi2", "phi3", "phi4"];
    let mut header: Vec<&str> = if dim == 1 { vec!["x"] } else { vec!["x", "y"] };
    header.extend(&names[..shown]);
    let rows = (0..grid.len()).map(|n| {
        let mut row = grid.coords(n);
        row.extend(fields.iter().map(|f| f.values()[n]));
        row
    });
    let path = ctx.path("modes.csv");
    ctx.dir.write_table(&path, &header, rows)?;

    ctx.trace(json!({
        "modes": b.len(),
        "nodes": grid.nodes_per_axis(),
        "orthonormality_defect": ortho,
        "round_trip_defect": round,
        "eigenvalues": b.eigenvalues().collect::<Vec<_>>(),
    }));
    Ok(())
}

fn solve_certificates(ctx: &mut Ctx<'_>, tag: &str, r: &SolveReport) -> Vec<Certificate> {
    let opts = ctx.cfg.solve_options();
    let b = &r.bracket;
    let name = |check: &str| ctx.name(&format!("{tag}{check}"));
    let mut out = vec![
        Certificate::flag(
            name("converged"),
            b.converged,
            format!("{} iterations", b.iterations),
        ),
        Certificate::at_most(name("gap"), b.gap, 10.0 * opts.tol_inner),
        Certificate::at_most(
            name("ascending"),
            b.certificates.ascending_margin,
            opts.tol_pos,
        ),
        Certificate::at_most(
            name("descending"),
            b.certificates.descending_margin,
            opts.tol_pos,
        ),
        Certificate::at_most(
            name("confined"),
            b.certificates.confinement_margin,
            opts.tol_pos,
        ),
        Certificate::at_most(name("positivity"), -r.interior_min, opts.tol_pos),
        Certificate::at_most(
            name("energy-identity"),
            r.energy.relative_defect,
            opts.energy_tol,
        ),
        Certificate::flag(name("below-supersolution"), r.below_supersolution, ""),
    ];
    if let Some(fp) = &b.fast_path {
        out.push(Certificate::flag(
            name("fast-path"),
            true,
            format!("certified: {}", fp.certified),
        ));
    }
    out
}

fn solve_summary(r: &SolveReport) -> Value {
    let b = &r.bracket;
    json!({
        "eps": r.eps,
        "warm_start": r.warm_start,
        "iterations": b.iterations,
        "gap": b.gap,
        "converged": b.converged,
        "final_mu": b.trace.last().map(|t| t.mu),
        "ordering": b.certificates,
        "residual_max": b.residual_max,
        "energy": r.energy,
        "interior_min": r.interior_min,
        "sup_norm": r.solution().sup_norm(),
    })
}

fn iteration_rows(r: &SolveReport) -> impl Iterator<Item = Vec<f64>> + '_ {
    r.bracket
        .trace
        .iter()
        .map(|t| vec![t.iter as f64, t.mu, t.change_lower, t.change_upper, t.gap])
}

const ITERATION_HEADER: [&str; 5] = ["iter", "mu", "change_lower", "change_upper", "gap"];

fn solve_eps(ctx: &mut Ctx<'_>) -> Result<()> {
    let eps = ctx.cfg.solver.eps;
    let opts = ctx.cfg.solve_options();
    let r = match monotone::solve_regularized(&ctx.basis, ctx.spec, eps, None, &opts) {
        Ok(r) => r,
        Err(e) => {
            ctx.fail("solve", &e);
            ctx.trace(json!({ "eps": eps, "error": e.to_string() }));
            return Ok(());
        }
    };
    let certs = solve_certificates(ctx, "", &r);
    ctx.report.certificates.extend(certs);

    let u = r.solution();
    let rhs = u.map(|v| (eps + v.max(0.0)).powf(-ctx.spec.p));
    let m = opts.test_modes.min(ctx.basis.len());
    let residual = spectral::weak_residual(&ctx.basis, u, &rhs, ctx.spec.s, m)?;
    let res_max = spectral::max_abs(&residual);
    let cert = Certificate::at_most(ctx.name("weak-residual"), res_max, 10.0 * opts.tol_inner)
        .with_detail(format!("{m} test modes"));
    ctx.push(cert);

    for (file, field) in [("solution.csv", u), ("supersolution.csv", &r.supersolution)] {
        let path = ctx.path(file);
        ctx.dir.write_csv(&path, field)?;
    }
    let path = ctx.path("iterations.csv");
    ctx.dir
        .write_table(&path, &ITERATION_HEADER, iteration_rows(&r))?;
    let mut summary = solve_summary(&r);
    summary["weak_residual"] = json!(residual);
    summary["trace"] = json!(r.bracket.trace);
    ctx.trace(summary);
    Ok(())
}

/// Runs the configured continuation, writing each step as it is accepted.
fn run_schedule(
    ctx: &mut Ctx<'_>,
    sched: &EpsSchedule,
    warm_start: bool,
    step_dir: Option<&str>,
) -> Result<ContinuationReport> {
    let mut opts = ctx.cfg.continuation_options();
    opts.warm_start = warm_start;
    let prefix = step_dir.map(|d| ctx.path(d));
    let basis = ctx.basis.clone();
    let dir = &mut ctx.dir;
    let mut observer = |k: usize, step: &StepRecord| -> Result<()> {
        if let Some(p) = &prefix {
            dir.write_csv(&format!("{p}u_{k:02}.csv"), step.report.solution())?;
            dir.write_table(
                &format!("{p}iterations_{k:02}.csv"),
                &ITERATION_HEADER,
                iteration_rows(&step.report),
            )?;
        }
        Ok(())
    };
    continuation::run_continuation_observed(&basis, ctx.spec, sched, &opts, &mut observer)
}

fn continue_run(ctx: &mut Ctx<'_>) -> Result<()> {
    let sched = ctx.cfg.schedule()?;
    let tol = ctx.cfg.tolerances;
    let rep = match run_schedule(ctx, &sched, ctx.cfg.solver.warm_start, Some("steps/")) {
        Ok(r) => r,
        Err(e) => {
            ctx.fail("run", &e);
            return Ok(());
        }
    };
    let completed = Certificate::flag(
        ctx.name("completed"),
        rep.truncated.is_none(),
        rep.truncated.clone().unwrap_or_default(),
    );
    ctx.push(completed);
    for (k, step) in rep.steps.iter().enumerate() {
        let opts = ctx.cfg.solve_options();
        let cert = Certificate::flag(
            ctx.name(&format!("solve-{k:02}")),
            step.report.certified(&opts),
            format!(
                "eps = {:e}, {} iterations",
                step.eps, step.report.bracket.iterations
            ),
        );
        ctx.push(cert);
        if k > 0 {
            let p = rep.pairs[k - 1];
            let margin = (-p.lower_margin).max(p.upper_margin);
            let cert =
                Certificate::at_most(ctx.name(&format!("ordering-{k:02}")), margin, p.tol_pos)
                    .with_detail(format!("delta = {:e}, eps = {:e}", p.delta, p.eps));
            ctx.push(cert);
            let cert = Certificate::at_most(
                ctx.name(&format!("sandwich-{k:02}")),
                p.increment,
                p.envelope + 2.0 * p.tol_pos,
            );
            ctx.push(cert);
        }
    }
    let cert = Certificate::flag(ctx.name("uniform-bound"), rep.uniform_bound_holds(), "");
    ctx.push(cert);
    let cert = Certificate::flag(ctx.name("energy-chain"), rep.energy_chain_holds(), "");
    ctx.push(cert);

    if let Some(limit) = &rep.limit {
        let res_max = spectral::max_abs(&rep.limit_residual);
        let cert =
            Certificate::at_most(ctx.name("limit-residual"), res_max, tol.limit_residual_tol);
        ctx.push(cert);
        let cert = Certificate::flag(
            ctx.name("limit-positive"),
            limit.interior_min() > 0.0,
            format!("interior min {:e}", limit.interior_min()),
        );
        ctx.push(cert);
        let path = ctx.path("limit.csv");
        ctx.dir.write_csv(&path, limit)?;
        let path = ctx.path("limit_residual.csv");
        ctx.dir.write_table(
            &path,
            &["j", "residual"],
            rep.limit_residual
                .iter()
                .enumerate()
                .map(|(j, r)| vec![(j + 1) as f64, *r]),
        )?;
        let est = continuation::estimate_limit(&rep).ok();
        ctx.report.limit = Some(json!({
            "eps_k": rep.steps.last().map(|s| s.eps),
            "tail_bound": est.as_ref().map(|e| e.tail_bound),
            "within_envelope": est.as_ref().map(|e| e.within_envelope),
            "increments_nonincreasing": est.as_ref().map(|e| e.increments_nonincreasing),
            "sup_norm": limit.sup_norm(),
            "interior_min": limit.interior_min(),
            "residual": rep.limit_residual,
            "residual_max": res_max,
            "residual_tol": tol.limit_residual_tol,
            "refine": rep.options.limit_refine,
        }));
    }

    let rows = rep.steps.iter().enumerate().map(|(k, s)| {
        let (inc, lo, hi) = match k.checked_sub(1).map(|j| rep.pairs[j]) {
            Some(p) => (p.increment, p.lower_margin, p.upper_margin),
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        vec![
            k as f64,
            s.eps,
            rep.sup_trace[k],
            s.report.interior_min,
            s.report.bracket.iterations as f64,
            inc,
            lo,
            hi,
            s.report.energy.hs_norm_sq,
            s.report.energy.pairing,
            s.report.energy.bound_unit,
        ]
    });
    let path = ctx.path("continuation.csv");
    ctx.dir.write_table(
        &path,
        &[
            "k",
            "eps",
            "sup_norm",
            "interior_min",
            "iterations",
            "increment",
            "lower_margin",
            "upper_margin",
            "hs_norm_sq",
            "pairing",
            "bound_unit",
        ],
        rows,
    )?;
    ctx.trace(json!({
        "schedule": rep.schedule,
        "options": rep.options,
        "truncated": rep.truncated,
        "steps": rep.steps.iter().map(|s| {
            let mut v = solve_summary(&s.report);
            v["restarted"] = json!(s.restarted);
            v
        }).collect::<Vec<_>>(),
        "pairs": rep.pairs,
        "sup_trace": rep.sup_trace,
        "energy": rep.energy,
    }));
    Ok(())
}

fn validate_extension(ctx: &mut Ctx<'_>) -> Result<()> {
    let s = ctx.spec.s;
    let policy = ctx.cfg.policy();
    let b = ctx.basis.clone();
    if s >= 1.0 {
        let cert = Certificate::flag(
            ctx.name("calibration"),
            false,
            "the extension needs 0 < s < 1",
        );
        ctx.push(cert);
        return Ok(());
    }
    let cal = match extension::calibrate_cs(&b, s, ctx.cfg.validator.calibrate_modes, &policy) {
        Ok(c) => c,
        Err(e) => {
            ctx.fail("calibration", &e);
            return Ok(());
        }
    };
    let cert = Certificate::at_most(
        ctx.name("calibration-spread"),
        cal.spread,
        extension::SPREAD_TOLERANCE,
    )
    .with_detail(format!("c_s = {}", cal.c_s));
    ctx.push(cert);

    // energy proportionality on a fixed field with decaying coefficients
    let coeffs: Vec<f64> = (0..b.len())
        .map(|i| if i % 3 == 1 { -1.0 } else { 1.0 } / (1.0 + i as f64))
        .collect();
    let u = SpectralField::new(b.clone(), coeffs)?;
    let ext = extension::extend_field(&u, s, &policy)?;
    let cyl = extension::cylinder_energy(&ext)?;
    let hs2 = spectral::hs_norm_sq(&u, s)?;
    let energy_rel = (cyl - cal.c_s * hs2).abs() / (cal.c_s * hs2);
    let cert = Certificate::at_most(
        ctx.name("energy-proportionality"),
        energy_rel,
        ENERGY_MATCH_TOL,
    );
    ctx.push(cert);
    let trace_err = ext.trace().sup_distance(&u.synthesize())?;
    let cert = Certificate::at_most(ctx.name("trace"), trace_err, 0.0);
    ctx.push(cert);

    // the chain for a regularized solution: cylinder energy / c_s = ⟨g(u), u⟩
    let eps = ctx.cfg.solver.eps;
    let chain = match monotone::solve_regularized(&b, ctx.spec, eps, None, &ctx.cfg.solve_options())
    {
        Ok(r) => {
            let ext = extension::extend_field(r.coeffs(), s, &policy)?;
            let lhs = extension::cylinder_energy(&ext)? / cal.c_s;
            let rel = (lhs - r.energy.pairing).abs() / r.energy.pairing.abs();
            let cert =
                Certificate::at_most(ctx.name("solution-energy-chain"), rel, ENERGY_MATCH_TOL)
                    .with_detail(format!("eps = {eps:e}"));
            ctx.push(cert);
            json!({ "eps": eps, "cylinder_over_cs": lhs, "pairing": r.energy.pairing, "relative": rel })
        }
        Err(e) => {
            ctx.fail("solution-energy-chain", &e);
            Value::Null
        }
    };

    let shown = cal.ratios.len();
    let profiles = (0..shown)
        .map(|i| {
            let l = b.eigenvalue(i);
            extension::extension_profile(l, s, &policy.grid_for(l)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = profiles
        .iter()
        .all(|p| p.theta.windows(2).all(|w| w[1] <= w[0]));
    let cert = Certificate::flag(ctx.name("profiles-monotone"), monotone, "");
    ctx.push(cert);
    let mut header = vec!["y".to_string()];
    header.extend((1..=shown).map(|i| format!("theta{i}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = profiles[0].y.iter().map(|&y| {
        let mut row = vec![y];
        row.extend(profiles.iter().map(|p| p.value_at(y)));
        row
    });
    let path = ctx.path("profiles.csv");
    ctx.dir.write_table(&path, &header, rows)?;
    let path = ctx.path("flux_ratios.csv");
    ctx.dir.write_table(
        &path,
        &["i", "lambda", "ratio"],
        cal.ratios
            .iter()
            .enumerate()
            .map(|(i, r)| vec![(i + 1) as f64, b.eigenvalue(i), *r]),
    )?;

    ctx.trace(json!({
        "s": s,
        "policy": policy,
        "energy_proportionality": { "cylinder": cyl, "cs_hs_norm_sq": cal.c_s * hs2, "relative": energy_rel },
        "solution_energy_chain": chain,
    }));
    ctx.report.calibration = Some(cal);
    Ok(())
}

fn uniqueness(ctx: &mut Ctx<'_>) -> Result<()> {
    let sched_a = ctx.cfg.schedule()?;
    let eps_k = sched_a.last();
    let tol_inner = ctx.cfg.tolerances.tol_inner;
    let sched_b = match EpsSchedule::ending_at(eps_k, ctx.cfg.probe.ratio) {
        Ok(s) => s,
        Err(e) => {
            ctx.fail("schedule", &e);
            return Ok(());
        }
    };
    let opts = ctx.cfg.continuation_options();
    let probe = continuation::uniqueness_probe(
        &ctx.basis, ctx.spec, &sched_a, &sched_b, &opts, &opts, eps_k,
    );
    let (probe, ra, rb) = match probe {
        Ok(t) => t,
        Err(e) => {
            ctx.fail("schedules", &e);
            return Ok(());
        }
    };
    let cert = Certificate::at_most(ctx.name("schedules"), probe.sup_difference, probe.bound)
        .with_detail(if probe.both_completed {
            String::new()
        } else {
            "a schedule was truncated".to_string()
        });
    let cert = Certificate {
        passed: probe.passed(),
        ..cert
    };
    ctx.push(cert);

    let fresh = run_schedule(ctx, &sched_a, !opts.warm_start, None)?;
    let fresh_diff = match (&ra.limit, &fresh.limit) {
        (Some(a), Some(f)) if fresh.truncated.is_none() && ra.truncated.is_none() => {
            a.sup_distance(f)?
        }
        _ => f64::INFINITY,
    };
    let cert = Certificate::at_most(ctx.name("warm-vs-fresh"), fresh_diff, 10.0 * tol_inner);
    ctx.push(cert);

    for (file, rep) in [
        ("limit_a.csv", &ra),
        ("limit_b.csv", &rb),
        ("limit_fresh.csv", &fresh),
    ] {
        if let Some(l) = &rep.limit {
            let path = ctx.path(file);
            ctx.dir.write_csv(&path, l)?;
        }
    }
    ctx.trace(json!({
        "probe": probe,
        "schedule_a": sched_a,
        "schedule_b": sched_b,
        "fresh_difference": if fresh_diff.is_finite() { Some(fresh_diff) } else { None },
        "fresh_bound": 10.0 * tol_inner,
    }));
    Ok(())
}
