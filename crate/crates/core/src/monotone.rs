//! Regularized solves by shifted monotone iteration between a subsolution
//! and a supersolution.
//!
//! With `μ` dominating `|g'|` on the bracket, the map
//! `T(u) = ((-Δ)^s + μ)^{-1} (g(u) + μ u)` is order preserving, so iterating
//! from the subsolution gives a nondecreasing sequence and iterating from the
//! supersolution a nonincreasing one. Both run in lockstep; the distance
//! between them bounds the distance of either to the solution in between.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_s, Error, Result};
use crate::field::{sup_diff, GridField, SpectralField};
use crate::geometry::EigenBasis;
use crate::nonlinearity::{Nonlinearity, SingularRhs};
use crate::spectral::{self, FracExponent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftPolicy {
    /// One shift from the subsolution's interior minimum.
    Fixed,
    /// Shift recomputed every step from the ascending iterate's interior
    /// minimum, which only grows.
    BracketAware,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FastPath {
    Off,
    /// Under-relaxed Picard `u ← (1-ω)u + ω (-Δ)^{-s} g(u)` to produce a
    /// candidate, which is then certified by monotone sweeps from a tight
    /// bracket around it.
    RelaxedPicard {
        omega: f64,
        max_iter: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol_inner: f64,
    pub max_iter: usize,
    pub shift: ShiftPolicy,
    /// Multiplier on the Lipschitz bound when choosing `μ`.
    pub shift_safety: f64,
    pub tol_pos: f64,
    pub test_modes: usize,
    pub energy_tol: f64,
    pub fast_path: FastPath,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol_inner: 1e-10,
            max_iter: 200_000,
            shift: ShiftPolicy::BracketAware,
            shift_safety: 1.1,
            tol_pos: 1e-8,
            test_modes: 10,
            energy_tol: 1e-6,
            fast_path: FastPath::Off,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value: v,
                    bound: "> 0",
                })
            }
        };
        positive("tol_inner", self.tol_inner)?;
        positive("tol_pos", self.tol_pos)?;
        positive("energy_tol", self.energy_tol)?;
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iter",
                value: 0.0,
                bound: ">= 1",
            });
        }
        if !(self.shift_safety >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "shift_safety",
                value: self.shift_safety,
                bound: ">= 1",
            });
        }
        if let FastPath::RelaxedPicard { omega, .. } = self.fast_path {
            if !(omega > 0.0 && omega <= 1.0) {
                return Err(Error::InvalidParameter {
                    name: "omega",
                    value: omega,
                    bound: "0 < omega <= 1",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    pub mu: f64,
    pub change_lower: f64,
    pub change_upper: f64,
    pub gap: f64,
}

/// In-run ordering certificates with worst observed margins.
///
/// Margins are signed so that `margin <= tol_pos` means the property holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderingCertificates {
    pub tol_pos: f64,
    /// `max_k max(u^k − u^{k+1})` over the ascending run.
    pub ascending_margin: f64,
    /// `max_k max(u^{k+1} − u^k)` over the descending run.
    pub descending_margin: f64,
    /// Worst of `sub − u^k`, `u^k − super` over both runs and of
    /// `lower − upper`.
    pub confinement_margin: f64,
}

impl OrderingCertificates {
    fn new(tol_pos: f64) -> Self {
        OrderingCertificates {
            tol_pos,
            ascending_margin: f64::NEG_INFINITY,
            descending_margin: f64::NEG_INFINITY,
            confinement_margin: f64::NEG_INFINITY,
        }
    }

    pub fn ascending(&self) -> bool {
        self.ascending_margin <= self.tol_pos
    }

    pub fn descending(&self) -> bool {
        self.descending_margin <= self.tol_pos
    }

    pub fn confined(&self) -> bool {
        self.confinement_margin <= self.tol_pos
    }

    pub fn all(&self) -> bool {
        self.ascending() && self.descending() && self.confined()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FastPathRecord {
    pub picard_iterations: usize,
    pub picard_change: f64,
    /// Half-width multiplier of the certified bracket `candidate ± η w₁`.
    pub eta: f64,
    pub certified: bool,
}

/// Result of one two-sided monotone iteration.
#[derive(Debug, Clone)]
pub struct BracketReport {
    pub lower: GridField,
    pub upper: GridField,
    pub lower_coeffs: SpectralField,
    /// `max(upper − lower)`.
    pub gap: f64,
    pub iterations: usize,
    pub trace: Vec<IterRecord>,
    pub certificates: OrderingCertificates,
    pub residual_max: f64,
    pub energy_defect: f64,
    pub converged: bool,
    pub fast_path: Option<FastPathRecord>,
}

impl BracketReport {
    /// Two-sided agreement: gap within `10 · tol_inner`.
    pub fn agrees(&self, tol_inner: f64) -> bool {
        self.gap <= 10.0 * tol_inner
    }
}

/// Outcome of [`compare_order`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Leq,
    Geq,
    Equal,
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub order: Order,
    /// `min(u − v)` over nodes.
    pub min_diff: f64,
    /// `max(u − v)` over nodes.
    pub max_diff: f64,
}

impl Comparison {
    /// The most violating signed difference for the reported relation.
    pub fn margin(&self) -> f64 {
        match self.order {
            Order::Geq => self.min_diff,
            Order::Leq => self.max_diff,
            Order::Equal => self.min_diff.abs().max(self.max_diff.abs()),
            Order::Incomparable => self.min_diff,
        }
    }
}

/// Nodewise classification of `u` against `v` with tolerance `tol`.
pub fn compare_order(u: &GridField, v: &GridField, tol: f64) -> Result<Comparison> {
    u.same_grid(v)?;
    let (min_diff, max_diff) = u.values().iter().zip(v.values()).fold(
        (f64::INFINITY, f64::NEG_INFINITY),
        |(lo, hi), (a, b)| {
            let d = a - b;
            (lo.min(d), hi.max(d))
        },
    );
    let order = if min_diff >= -tol && max_diff <= tol {
        Order::Equal
    } else if min_diff >= -tol {
        Order::Geq
    } else if max_diff <= tol {
        Order::Leq
    } else {
        Order::Incomparable
    };
    Ok(Comparison {
        order,
        min_diff,
        max_diff,
    })
}

/// The supersolution `w` solving `(-Δ)^s w = ε^{-p}`.
pub fn build_supersolution(
    basis: &Arc<EigenBasis>,
    s: f64,
    g: &SingularRhs,
    tol_pos: f64,
) -> Result<GridField> {
    if !(g.eps > 0.0) {
        return Err(Error::InvalidParameter {
            name: "eps",
            value: g.eps,
            bound: "eps > 0 for the supersolution",
        });
    }
    let rhs = GridField::constant(basis.grid().clone(), g.eps.powf(-g.p));
    let w = spectral::solve_shifted(&basis.analyze(&rhs)?, s, 0.0)?.synthesize();
    let min = w.interior_min();
    if min < -tol_pos {
        return Err(Error::Positivity { min, tol: tol_pos });
    }
    Ok(w)
}

struct Stepper<'a> {
    basis: &'a Arc<EigenBasis>,
    symbol: Vec<f64>,
    g: &'a dyn Nonlinearity,
    interior: &'a [usize],
}

impl<'a> Stepper<'a> {
    fn new(basis: &'a Arc<EigenBasis>, s: f64, g: &'a dyn Nonlinearity) -> Self {
        Stepper {
            basis,
            symbol: spectral::symbol(basis, s),
            g,
            interior: basis.grid().interior(),
        }
    }

    fn nodal_g(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; u.len()];
        for &n in self.interior {
            out[n] = self.g.eval(u[n])?;
        }
        Ok(out)
    }

    /// `T_μ(u)`: returns (coefficients, nodal values).
    fn shifted(&self, u: &[f64], mu: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut rhs = self.nodal_g(u)?;
        for &n in self.interior {
            rhs[n] += mu * u[n];
        }
        let mut c = self.basis.project(&rhs, self.basis.len());
        for (ci, l) in c.iter_mut().zip(&self.symbol) {
            *ci /= l + mu;
        }
        let nodal = self.basis.synthesize_values(&c);
        Ok((c, nodal))
    }

    fn mu(&self, lower: &[f64], safety: f64) -> Result<f64> {
        let min = self
            .interior
            .iter()
            .map(|&n| lower[n])
            .fold(f64::INFINITY, f64::min)
            .max(0.0);
        Ok(match self.g.lipschitz_bound(min)? {
            Some(l) => safety * l,
            None => {
                return Err(Error::Bracket(
                    "nonlinearity provides no Lipschitz bound for the shift".into(),
                ))
            }
        })
    }

    /// First-mode residual `λ_1^s v_1 − ⟨g(v), φ_1⟩` and the scale of the pairing.
    fn first_residual(&self, v: &[f64]) -> Result<(f64, f64)> {
        let c = self.basis.project(v, 1)[0];
        let pg = self.basis.project(&self.nodal_g(v)?, 1)[0];
        Ok((self.symbol[0] * c - pg, pg.abs()))
    }

    fn residual_max(&self, coeffs: &[f64], nodal: &[f64], m: usize) -> Result<f64> {
        let pg = self.basis.project(&self.nodal_g(nodal)?, m);
        Ok(coeffs
            .iter()
            .zip(&self.symbol)
            .zip(pg)
            .map(|((c, l), r)| (l * c - r).abs())
            .fold(0.0, f64::max))
    }

    /// Relative defect of `Σ λ^s c² = ⟨g(u), u⟩`.
    fn energy_defect(&self, coeffs: &[f64], nodal: &[f64]) -> Result<f64> {
        let hs: f64 = coeffs
            .iter()
            .zip(&self.symbol)
            .map(|(c, l)| l * c * c)
            .sum();
        let gu = self.nodal_g(nodal)?;
        let pairing: f64 = self
            .interior
            .iter()
            .map(|&n| self.basis.grid().weights()[n] * gu[n] * nodal[n])
            .sum();
        let scale = hs.abs().max(pairing.abs());
        Ok(if scale == 0.0 {
            0.0
        } else {
            (hs - pairing).abs() / scale
        })
    }

    fn linear_inverse(&self, rhs: &[f64]) -> Vec<f64> {
        let mut c = self.basis.project(rhs, self.basis.len());
        for (ci, l) in c.iter_mut().zip(&self.symbol) {
            *ci /= l;
        }
        self.basis.synthesize_values(&c)
    }
}

fn max_of(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Runs the ascending and descending monotone sequences from `sub` and
/// `sup` until their gap is within `tol_inner` (and the energy identity of
/// the lower limit holds to `energy_tol`), or the budget is exhausted.
///
/// A non-converged run is returned as a report with `converged == false`.
pub fn monotone_iterate(
    basis: &Arc<EigenBasis>,
    s: f64,
    g: &dyn Nonlinearity,
    sub: &GridField,
    sup: &GridField,
    opts: &SolveOptions,
) -> Result<BracketReport> {
    check_s(s)?;
    opts.validate()?;
    sub.same_grid(sup)?;
    basis.analyze(sub)?; // grid check against the basis
    let tol = opts.tol_pos;
    let hard = 10.0 * tol;
    let m = opts.test_modes.min(basis.len()).max(1);
    let stepper = Stepper::new(basis, s, g);

    let order = compare_order(sub, sup, tol)?;
    if order.max_diff > tol {
        return Err(Error::Bracket(format!(
            "sub exceeds super by {:e}",
            order.max_diff
        )));
    }
    let (r_sub, scale_sub) = stepper.first_residual(sub.values())?;
    if r_sub > tol * (1.0 + scale_sub) {
        return Err(Error::Bracket(format!(
            "sub is not a subsolution: first-mode residual {r_sub:e} > 0"
        )));
    }
    let (r_sup, scale_sup) = stepper.first_residual(sup.values())?;
    if r_sup < -tol * (1.0 + scale_sup) {
        return Err(Error::Bracket(format!(
            "super is not a supersolution: first-mode residual {r_sup:e} < 0"
        )));
    }

    let mut certs = OrderingCertificates::new(tol);
    let mut lo = sub.values().to_vec();
    let mut hi = sup.values().to_vec();
    let mut fast_record = None;

    if let FastPath::RelaxedPicard { omega, max_iter } = opts.fast_path {
        let (rec, bracket) = fast_candidate(&stepper, sub, sup, omega, max_iter, opts)?;
        if let Some((l, h)) = bracket {
            lo = l;
            hi = h;
        }
        fast_record = Some(rec);
    }

    let mut lo_c = basis.project(&lo, basis.len());
    let mut trace = Vec::new();
    let mut gap = max_of(&hi, &lo);
    let mut energy_defect =
        stepper.energy_defect(&lo_c, &stepper.basis.synthesize_values(&lo_c))?;
    let mut converged = gap <= opts.tol_inner
        && stepper.residual_max(&lo_c, &lo, 1)? <= opts.tol_inner * (1.0 + scale_sub)
        && energy_defect <= opts.energy_tol;
    let fixed_mu = stepper.mu(&lo, opts.shift_safety)?;
    let mut iterations = 0;

    while !converged && iterations < opts.max_iter {
        let mu = match opts.shift {
            ShiftPolicy::Fixed => fixed_mu,
            ShiftPolicy::BracketAware => stepper.mu(&lo, opts.shift_safety)?,
        };
        let (new_lo_c, new_lo) = stepper.shifted(&lo, mu)?;
        let (_, new_hi) = stepper.shifted(&hi, mu)?;
        iterations += 1;

        let asc = max_of(&lo, &new_lo);
        let desc = max_of(&new_hi, &hi);
        let conf = max_of(sub.values(), &new_lo)
            .max(max_of(&new_hi, sup.values()))
            .max(max_of(&new_lo, &new_hi));
        certs.ascending_margin = certs.ascending_margin.max(asc);
        certs.descending_margin = certs.descending_margin.max(desc);
        certs.confinement_margin = certs.confinement_margin.max(conf);
        for (what, margin) in [
            ("ascending sequence decreased", asc),
            ("descending sequence increased", desc),
            ("iterate left the bracket", conf),
        ] {
            if margin > hard {
                return Err(Error::Ordering {
                    what,
                    iteration: iterations,
                    margin,
                    limit: hard,
                });
            }
        }

        let change_lower = sup_diff(&new_lo, &lo);
        let change_upper = sup_diff(&new_hi, &hi);
        lo = new_lo;
        lo_c = new_lo_c;
        hi = new_hi;
        gap = max_of(&hi, &lo);
        trace.push(IterRecord {
            iter: iterations,
            mu,
            change_lower,
            change_upper,
            gap,
        });
        if gap <= opts.tol_inner {
            energy_defect = stepper.energy_defect(&lo_c, &lo)?;
            converged = energy_defect <= opts.energy_tol;
        }
    }
    if certs.ascending_margin == f64::NEG_INFINITY {
        // no steps taken; the bracket itself is the certificate
        certs.ascending_margin = 0.0;
        certs.descending_margin = 0.0;
        certs.confinement_margin = max_of(&lo, &hi).max(max_of(sub.values(), &lo));
    }

    let residual_max = stepper.residual_max(&lo_c, &lo, m)?;
    let grid = basis.grid().clone();
    Ok(BracketReport {
        lower: GridField::new(grid.clone(), lo)?,
        upper: GridField::new(grid, hi)?,
        lower_coeffs: SpectralField::new(basis.clone(), lo_c)?,
        gap,
        iterations,
        trace,
        certificates: certs,
        residual_max,
        energy_defect,
        converged,
        fast_path: fast_record,
    })
}

type Bracket = (Vec<f64>, Vec<f64>);

/// Relaxed Picard candidate, then the tightest bracket `candidate ± η w₁`
/// (with `w₁ = (-Δ)^{-s} 1 > 0`) that one monotone sweep from each end
/// certifies and that sits inside `[sub, sup]`.
fn fast_candidate(
    stepper: &Stepper<'_>,
    sub: &GridField,
    sup: &GridField,
    omega: f64,
    max_iter: usize,
    opts: &SolveOptions,
) -> Result<(FastPathRecord, Option<Bracket>)> {
    let tol = opts.tol_pos;
    let mut u = sub.values().to_vec();
    let mut change = f64::INFINITY;
    let mut iters = 0;
    while iters < max_iter && change > opts.tol_inner {
        let target = stepper.linear_inverse(&stepper.nodal_g(&u)?);
        let next: Vec<f64> = u
            .iter()
            .zip(&target)
            .map(|(a, b)| (1.0 - omega) * a + omega * b)
            .collect();
        change = sup_diff(&next, &u);
        u = next;
        iters += 1;
    }
    let mut record = FastPathRecord {
        picard_iterations: iters,
        picard_change: change,
        eta: 0.0,
        certified: false,
    };
    if !change.is_finite() {
        return Ok((record, None));
    }
    let ones = vec![1.0; u.len()];
    let w1 = stepper.linear_inverse(&ones);
    let w1_max = w1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut eta = 10.0 * (change + opts.tol_inner) / w1_max.max(f64::MIN_POSITIVE);
    for _ in 0..48 {
        let lo: Vec<f64> = u.iter().zip(&w1).map(|(a, w)| a - eta * w).collect();
        let hi: Vec<f64> = u.iter().zip(&w1).map(|(a, w)| a + eta * w).collect();
        let inside = max_of(sub.values(), &lo) <= tol && max_of(&hi, sup.values()) <= tol;
        if inside {
            let mu = stepper.mu(&lo, opts.shift_safety)?;
            let (_, t_lo) = stepper.shifted(&lo, mu)?;
            let (_, t_hi) = stepper.shifted(&hi, mu)?;
            if max_of(&lo, &t_lo) <= tol && max_of(&t_hi, &hi) <= tol {
                record.eta = eta;
                record.certified = true;
                return Ok((record, Some((lo, hi))));
            }
        }
        eta *= 2.0;
    }
    Ok((record, None))
}

/// Energy bookkeeping for a regularized solution `u_ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyDiagnostics {
    /// `Σ λ_i^s u_i²`.
    pub hs_norm_sq: f64,
    /// `⟨(ε+u)^{-p}, u⟩`.
    pub pairing: f64,
    pub relative_defect: f64,
    /// `⟨(ε+u)^{1-p}, 1⟩`.
    pub bound_eps: f64,
    /// `⟨(1+u)^{1-p}, 1⟩`.
    pub bound_unit: f64,
}

pub fn energy_diagnostics(
    solution: &SpectralField,
    nodal: &GridField,
    s: f64,
    g: &SingularRhs,
) -> Result<EnergyDiagnostics> {
    let grid = nodal.grid();
    let hs_norm_sq = spectral::hs_norm_sq(solution, s)?;
    let mut pairing = 0.0;
    for &n in grid.interior() {
        let u = nodal.values()[n];
        pairing += grid.weights()[n] * g.eval_g(u)? * u;
    }
    let clamp = |u: f64| u.max(0.0);
    let bound_eps = nodal.map(|u| (g.eps + clamp(u)).powf(1.0 - g.p)).integral();
    let bound_unit = nodal.map(|u| (1.0 + clamp(u)).powf(1.0 - g.p)).integral();
    let scale = hs_norm_sq.abs().max(pairing.abs());
    Ok(EnergyDiagnostics {
        hs_norm_sq,
        pairing,
        relative_defect: if scale > 0.0 {
            (hs_norm_sq - pairing).abs() / scale
        } else {
            0.0
        },
        bound_eps,
        bound_unit,
    })
}

/// One regularized solve with its bracket, energy and positivity checks.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub eps: f64,
    pub exponent: FracExponent,
    pub warm_start: bool,
    pub bracket: BracketReport,
    pub supersolution: GridField,
    pub energy: EnergyDiagnostics,
    pub interior_min: f64,
    /// Solution below the supersolution within `tol_pos`.
    pub below_supersolution: bool,
}

impl SolveReport {
    /// The ascending limit, taken as `u_ε`.
    pub fn solution(&self) -> &GridField {
        &self.bracket.lower
    }

    pub fn coeffs(&self) -> &SpectralField {
        &self.bracket.lower_coeffs
    }

    pub fn converged(&self) -> bool {
        self.bracket.converged
    }

    pub fn positive(&self, tol_pos: f64) -> bool {
        self.interior_min > -tol_pos
    }

    /// Every post-condition of a regularized solve.
    pub fn certified(&self, opts: &SolveOptions) -> bool {
        self.converged()
            && self.bracket.agrees(opts.tol_inner)
            && self.bracket.certificates.all()
            && self.positive(opts.tol_pos)
            && self.energy.relative_defect <= opts.energy_tol
            && self.below_supersolution
    }
}

/// Solves `(-Δ)^s u = (ε+u)^{-p}` between `warm` (or 0) and the
/// supersolution for this `ε`.
pub fn solve_regularized(
    basis: &Arc<EigenBasis>,
    spec: FracExponent,
    eps: f64,
    warm: Option<&GridField>,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let g = SingularRhs::new(spec.p, eps)?;
    let sup = build_supersolution(basis, spec.s, &g, opts.tol_pos)?;
    let zero;
    let sub = match warm {
        Some(w) => w,
        None => {
            zero = GridField::zeros(basis.grid().clone());
            &zero
        }
    };
    let bracket = monotone_iterate(basis, spec.s, &g, sub, &sup, opts)?;
    let energy = energy_diagnostics(&bracket.lower_coeffs, &bracket.lower, spec.s, &g)?;
    let interior_min = bracket.lower.interior_min();
    let below = compare_order(&bracket.lower, &sup, opts.tol_pos)?.max_diff <= opts.tol_pos;
    Ok(SolveReport {
        eps,
        exponent: spec,
        warm_start: warm.is_some(),
        bracket,
        supersolution: sup,
        energy,
        interior_min,
        below_supersolution: below,
    })
}
