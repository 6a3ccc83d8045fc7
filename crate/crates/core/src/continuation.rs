//! ε-continuation towards the singular limit.
//!
//! Each solve at `ε < δ` starts its ascending sequence from `u_δ`, which is
//! a subsolution because `(δ + r)^{-p} ≤ (ε + r)^{-p}`. Every consecutive
//! pair is checked against both ordering inequalities
//! `u_ε ≥ u_δ` and `ε + u_ε ≤ δ + u_δ`, whose combination gives the tail
//! bound `‖u − u_{ε_K}‖_∞ ≤ ε_K` for the limit.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::GridField;
use crate::geometry::EigenBasis;
use crate::monotone::{self, EnergyDiagnostics, SolveOptions, SolveReport};
use crate::spectral::{self, FracExponent};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsSchedule {
    pub eps0: f64,
    pub ratio: f64,
    pub steps: usize,
}

impl Default for EpsSchedule {
    fn default() -> Self {
        EpsSchedule {
            eps0: 0.5,
            ratio: 0.5,
            steps: 14,
        }
    }
}

impl EpsSchedule {
    pub fn new(eps0: f64, ratio: f64, steps: usize) -> Result<Self> {
        let s = EpsSchedule { eps0, ratio, steps };
        s.validate()?;
        Ok(s)
    }

    /// The geometric schedule with the given ratio whose last value is
    /// `eps_end` and whose first value is the largest one below 1.
    pub fn ending_at(eps_end: f64, ratio: f64) -> Result<Self> {
        if !(eps_end > 0.0 && eps_end < 1.0) {
            return Err(Error::InvalidParameter {
                name: "eps_end",
                value: eps_end,
                bound: "0 < eps_end < 1",
            });
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidParameter {
                name: "ratio",
                value: ratio,
                bound: "0 < ratio < 1",
            });
        }
        let k = (eps_end.ln() / ratio.ln()).ceil() as i32 - 1;
        let steps = k.max(0) as usize;
        EpsSchedule::new(eps_end / ratio.powi(steps as i32), ratio, steps)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps0 > 0.0 && self.eps0 < 1.0) {
            return Err(Error::InvalidParameter {
                name: "eps0",
                value: self.eps0,
                bound: "0 < eps0 < 1",
            });
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::InvalidParameter {
                name: "ratio",
                value: self.ratio,
                bound: "0 < ratio < 1",
            });
        }
        Ok(())
    }

    /// `ε_k = eps0 · ratio^k` for `k = 0..=steps`.
    pub fn values(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|k| self.eps0 * self.ratio.powi(k as i32))
            .collect()
    }

    pub fn last(&self) -> f64 {
        self.eps0 * self.ratio.powi(self.steps as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOptions {
    pub solve: SolveOptions,
    /// Start each solve from the previous solution instead of 0.
    pub warm_start: bool,
    /// Test modes for the limit residual.
    pub limit_test_modes: usize,
    /// Grid refinement factor used to evaluate the limit residual.
    pub limit_refine: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            solve: SolveOptions::default(),
            warm_start: true,
            limit_test_modes: 10,
            limit_refine: 4,
        }
    }
}

/// Ordering certificate for one consecutive pair `δ = ε_k > ε = ε_{k+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairCertificate {
    pub delta: f64,
    pub eps: f64,
    /// `min(u_ε − u_δ)`; must be `≥ −tol_pos`.
    pub lower_margin: f64,
    /// `max((ε + u_ε) − (δ + u_δ))`; must be `≤ tol_pos`.
    pub upper_margin: f64,
    /// `‖u_ε − u_δ‖_∞`.
    pub increment: f64,
    /// `δ − ε`.
    pub envelope: f64,
    pub tol_pos: f64,
}

impl PairCertificate {
    pub fn monotone(&self) -> bool {
        self.lower_margin >= -self.tol_pos
    }

    pub fn shifted_monotone(&self) -> bool {
        self.upper_margin <= self.tol_pos
    }

    /// `‖u_ε − u_δ‖_∞ ≤ (δ − ε) + 2 tol_pos`.
    pub fn sandwich(&self) -> bool {
        self.increment <= self.envelope + 2.0 * self.tol_pos
    }

    pub fn holds(&self) -> bool {
        self.monotone() && self.shifted_monotone() && self.sandwich()
    }

    fn hard_violation(&self) -> bool {
        self.lower_margin < -10.0 * self.tol_pos || self.upper_margin > 10.0 * self.tol_pos
    }
}

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub eps: f64,
    pub report: SolveReport,
    /// The solve started from 0 although warm starts were requested.
    pub restarted: bool,
}

#[derive(Debug, Clone)]
pub struct ContinuationReport {
    pub exponent: FracExponent,
    pub schedule: EpsSchedule,
    pub options: ContinuationOptions,
    pub steps: Vec<StepRecord>,
    pub pairs: Vec<PairCertificate>,
    /// `‖u_{ε_k}‖_∞` per completed step.
    pub sup_trace: Vec<f64>,
    pub energy: Vec<EnergyDiagnostics>,
    /// Why the run stopped early, if it did.
    pub truncated: Option<String>,
    pub limit: Option<GridField>,
    pub limit_residual: Vec<f64>,
}

impl ContinuationReport {
    pub fn completed(&self) -> usize {
        self.steps.len()
    }

    pub fn eps_values(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.eps).collect()
    }

    pub fn increments(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.increment).collect()
    }

    pub fn ordering_holds(&self) -> bool {
        self.pairs.iter().all(PairCertificate::holds)
    }

    /// Sup-norm trace nondecreasing (within `tol_pos`), finite, and bounded
    /// by `‖u_{ε_K}‖_∞ + eps0`.
    pub fn uniform_bound_holds(&self) -> bool {
        let tol = self.options.solve.tol_pos;
        let Some(&last) = self.sup_trace.last() else {
            return false;
        };
        self.sup_trace.iter().all(|v| v.is_finite())
            && self.sup_trace.windows(2).all(|w| w[1] >= w[0] - tol)
            && self
                .sup_trace
                .iter()
                .all(|&v| v <= last + self.schedule.eps0)
    }

    /// Energy chain `Σ λ^s u_i² = ⟨(ε+u)^{-p}, u⟩ ≤ ⟨(ε+u)^{1-p}, 1⟩ ≤
    /// ⟨(1+u)^{1-p}, 1⟩`, each step, with the last side bounded by
    /// `|Ω| (1 + ‖u_{ε_K}‖_∞)^{1-p}` uniformly along the schedule.
    pub fn energy_chain_holds(&self) -> bool {
        let tol = self.options.solve.energy_tol;
        let Some(&sup) = self.sup_trace.last() else {
            return false;
        };
        let measure = self
            .steps
            .first()
            .map(|s| s.report.solution().grid().weights().iter().sum::<f64>())
            .unwrap_or(0.0);
        let cap = measure * (1.0 + sup).powf(1.0 - self.exponent.p);
        self.energy.iter().all(|e| {
            let slack = tol * e.bound_unit.abs().max(1.0);
            e.relative_defect <= tol
                && e.pairing <= e.bound_eps + slack
                && e.bound_eps <= e.bound_unit + slack
                && e.bound_unit <= cap + slack
        })
    }

    pub fn solves_certified(&self) -> bool {
        self.steps
            .iter()
            .all(|s| s.report.certified(&self.options.solve))
    }

    pub fn passed(&self) -> bool {
        self.truncated.is_none()
            && self.solves_certified()
            && self.ordering_holds()
            && self.uniform_bound_holds()
            && self.energy_chain_holds()
    }
}

/// Runs the regularized solves along `sched`, certifying the ordering lemma
/// on each consecutive pair.
pub fn run_continuation(
    basis: &Arc<EigenBasis>,
    spec: FracExponent,
    sched: &EpsSchedule,
    opts: &ContinuationOptions,
) -> Result<ContinuationReport> {
    run_continuation_observed(basis, spec, sched, opts, &mut |_, _| Ok(()))
}

/// [`run_continuation`] calling `observer(k, step)` as soon as step `k` is
/// accepted, e.g. to persist partial results. An observer error aborts the
/// run.
pub fn run_continuation_observed(
    basis: &Arc<EigenBasis>,
    spec: FracExponent,
    sched: &EpsSchedule,
    opts: &ContinuationOptions,
    observer: &mut dyn FnMut(usize, &StepRecord) -> Result<()>,
) -> Result<ContinuationReport> {
    sched.validate()?;
    opts.solve.validate()?;
    let tol_pos = opts.solve.tol_pos;
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut pairs = Vec::new();
    let mut truncated = None;
    let mut force_fresh = false;

    for eps in sched.values() {
        let warm = match steps.last() {
            Some(prev) if opts.warm_start && !force_fresh => Some(prev.report.solution()),
            _ => None,
        };
        let restarted = opts.warm_start && !steps.is_empty() && warm.is_none();
        let report = match monotone::solve_regularized(basis, spec, eps, warm, &opts.solve) {
            Ok(r) if r.converged() => r,
            Ok(r) => {
                truncated = Some(format!(
                    "solve at eps = {eps:e} did not converge in {} iterations (gap {:e})",
                    r.bracket.iterations, r.bracket.gap
                ));
                break;
            }
            Err(e) => {
                truncated = Some(format!("solve at eps = {eps:e} failed: {e}"));
                break;
            }
        };
        force_fresh = false;
        if let Some(prev) = steps.last() {
            let cert = pair_certificate(prev, eps, report.solution(), tol_pos)?;
            force_fresh = cert.hard_violation();
            pairs.push(cert);
        }
        let record = StepRecord {
            eps,
            report,
            restarted,
        };
        observer(steps.len(), &record)?;
        steps.push(record);
    }

    let sup_trace = steps
        .iter()
        .map(|s| s.report.solution().sup_norm())
        .collect();
    let energy = steps.iter().map(|s| s.report.energy).collect();
    let (limit, limit_residual) = match steps.last() {
        Some(last) => {
            let coeffs = last.report.coeffs();
            let residual = limit_residual(
                basis,
                coeffs.coeffs(),
                spec,
                opts.limit_test_modes,
                opts.limit_refine,
                tol_pos,
            )?;
            (Some(last.report.solution().clone()), residual)
        }
        None => (None, Vec::new()),
    };

    Ok(ContinuationReport {
        exponent: spec,
        schedule: *sched,
        options: *opts,
        steps,
        pairs,
        sup_trace,
        energy,
        truncated,
        limit,
        limit_residual,
    })
}

fn pair_certificate(
    prev: &StepRecord,
    eps: f64,
    u_eps: &GridField,
    tol_pos: f64,
) -> Result<PairCertificate> {
    let delta = prev.eps;
    let u_delta = prev.report.solution();
    let diff = u_eps.zip_map(u_delta, |a, b| a - b)?;
    let lower_margin = diff.values().iter().copied().fold(f64::INFINITY, f64::min);
    let upper_margin = diff
        .values()
        .iter()
        .map(|d| d + eps - delta)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(PairCertificate {
        delta,
        eps,
        lower_margin,
        upper_margin,
        increment: diff.sup_norm(),
        envelope: delta - eps,
        tol_pos,
    })
}

/// Weak residual of the singular equation `(-Δ)^s u = u^{-p}` for the
/// expansion with coefficients `coeffs`, tested against the first `m`
/// modes. The expansion is resampled on a grid refined by `refine` so the
/// pairing `⟨u^{-p}, φ_j⟩` is integrated more accurately than the solver's
/// own quadrature; `u` is floored at `floor` on interior nodes.
pub fn limit_residual(
    basis: &Arc<EigenBasis>,
    coeffs: &[f64],
    spec: FracExponent,
    m: usize,
    refine: usize,
    floor: f64,
) -> Result<Vec<f64>> {
    let fine = if refine > 1 {
        basis.refined(refine)?
    } else {
        basis.clone()
    };
    let c = crate::field::SpectralField::new(fine.clone(), coeffs.to_vec())?;
    let u = c.synthesize();
    let grid = u.grid().clone();
    let mut rhs = vec![0.0; grid.len()];
    for &n in grid.interior() {
        rhs[n] = u.values()[n].max(floor).powf(-spec.p);
    }
    let rhs = GridField::new(grid, rhs)?;
    spectral::weak_residual(&fine, &u, &rhs, spec.s, m.min(fine.len()))
}

/// Limit candidate with its certified tail bound and increment diagnostics.
#[derive(Debug, Clone)]
pub struct LimitEstimate {
    pub field: GridField,
    /// `ε_K`: `‖u − u_{ε_K}‖_∞ ≤ ε_K` by the ordering inequalities.
    pub tail_bound: f64,
    pub increments: Vec<f64>,
    pub envelope: Vec<f64>,
    /// Increments within their `δ − ε` envelopes (plus `2 tol_pos`).
    pub within_envelope: bool,
    /// Increments nonincreasing along the schedule (within `tol_pos`).
    pub increments_nonincreasing: bool,
    pub interior_min: f64,
}

impl LimitEstimate {
    pub fn interior_positive(&self) -> bool {
        self.interior_min > 0.0
    }
}

pub fn estimate_limit(report: &ContinuationReport) -> Result<LimitEstimate> {
    if report.completed() < 3 {
        return Err(Error::Continuation(format!(
            "limit estimate needs at least 3 completed steps, have {}",
            report.completed()
        )));
    }
    let tol = report.options.solve.tol_pos;
    let last = report.steps.last().expect("non-empty");
    let field = last.report.solution().clone();
    let increments = report.increments();
    let envelope: Vec<f64> = report.pairs.iter().map(|p| p.envelope).collect();
    Ok(LimitEstimate {
        interior_min: field.interior_min(),
        field,
        tail_bound: last.eps,
        within_envelope: report.pairs.iter().all(PairCertificate::sandwich),
        increments_nonincreasing: increments.windows(2).all(|w| w[1] <= w[0] + tol),
        increments,
        envelope,
    })
}

/// Result of comparing two independent continuation runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeResult {
    pub eps_end_a: f64,
    pub eps_end_b: f64,
    pub sup_difference: f64,
    /// `max(2 ε_K, 10 tol_inner)`.
    pub bound: f64,
    pub both_completed: bool,
}

impl ProbeResult {
    pub fn passed(&self) -> bool {
        self.both_completed && self.sup_difference <= self.bound
    }
}

/// Runs two continuations ending at the same `ε_K` and compares limits.
///
/// Schedules whose ends differ are accepted only when both ends are at or
/// below `tol_match`.
#[allow(clippy::too_many_arguments)]
pub fn uniqueness_probe(
    basis: &Arc<EigenBasis>,
    spec: FracExponent,
    sched_a: &EpsSchedule,
    sched_b: &EpsSchedule,
    opts_a: &ContinuationOptions,
    opts_b: &ContinuationOptions,
    tol_match: f64,
) -> Result<(ProbeResult, ContinuationReport, ContinuationReport)> {
    let (ea, eb) = (sched_a.last(), sched_b.last());
    let same_end = (ea - eb).abs() <= 1e-12 * ea.max(eb);
    if !same_end && !(ea <= tol_match && eb <= tol_match) {
        return Err(Error::Continuation(format!(
            "schedule ends differ: {ea:e} vs {eb:e}"
        )));
    }
    let ra = run_continuation(basis, spec, sched_a, opts_a)?;
    let rb = run_continuation(basis, spec, sched_b, opts_b)?;
    let both_completed = ra.truncated.is_none() && rb.truncated.is_none();
    let sup_difference = match (&ra.limit, &rb.limit) {
        (Some(a), Some(b)) => a.sup_distance(b)?,
        _ => f64::INFINITY,
    };
    let tol_inner = opts_a.solve.tol_inner.max(opts_b.solve.tol_inner);
    let probe = ProbeResult {
        eps_end_a: ea,
        eps_end_b: eb,
        sup_difference,
        bound: (2.0 * ea.max(eb)).max(10.0 * tol_inner),
        both_completed,
    };
    Ok((probe, ra, rb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use std::f64::consts::PI;

    #[test]
    fn default_schedule_end() {
        let s = EpsSchedule::default();
        assert_eq!(s.values().len(), 15);
        assert!((s.last() - 3.0517578125e-5).abs() < 1e-18);
    }

    #[test]
    fn schedule_validation() {
        assert!(EpsSchedule::new(1.0, 0.5, 3).is_err());
        assert!(EpsSchedule::new(0.5, 1.0, 3).is_err());
        assert!(EpsSchedule::new(0.5, 0.0, 3).is_err());
    }

    #[test]
    fn ending_at_matches_end_and_stays_below_one() {
        let target = EpsSchedule::default().last();
        let b = EpsSchedule::ending_at(target, 0.4).unwrap();
        assert!((b.last() - target).abs() <= 1e-15 * target);
        assert!(b.eps0 < 1.0 && b.eps0 > 0.4);
        assert_eq!(b.steps, 11);
    }

    #[test]
    fn single_value_schedule_is_a_plain_solve() {
        let basis = EigenBasis::with_resolution(Domain::interval(PI).unwrap(), 32, 1).unwrap();
        let spec = FracExponent::new(0.5, 0.5).unwrap();
        let opts = ContinuationOptions::default();
        let sched = EpsSchedule::new(0.5, 0.5, 0).unwrap();
        let rep = run_continuation(&basis, spec, &sched, &opts).unwrap();
        let direct = monotone::solve_regularized(&basis, spec, 0.5, None, &opts.solve).unwrap();
        assert_eq!(rep.completed(), 1);
        assert!(rep.pairs.is_empty());
        assert_eq!(
            rep.limit.as_ref().unwrap().values(),
            direct.solution().values()
        );
        assert!(estimate_limit(&rep).is_err());
    }

    #[test]
    fn probe_rejects_mismatched_ends() {
        let basis = EigenBasis::with_resolution(Domain::interval(PI).unwrap(), 8, 1).unwrap();
        let spec = FracExponent::new(0.5, 0.5).unwrap();
        let o = ContinuationOptions::default();
        let a = EpsSchedule::new(0.5, 0.5, 3).unwrap();
        let b = EpsSchedule::new(0.5, 0.5, 4).unwrap();
        assert!(uniqueness_probe(&basis, spec, &a, &b, &o, &o, 1e-6).is_err());
    }
}
