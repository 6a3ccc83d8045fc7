//! Independent realization of `(-Δ)^s` through the weighted extension
//! `div(y^{1-2s} ∇U) = 0` on the half-cylinder `Ω × (0, ∞)`.
//!
//! Separation of variables gives `U(x, y) = Σ u_i φ_i(x) θ_i(y)` with
//! `(y^{1-2s} θ')' = λ_i y^{1-2s} θ`, `θ(0) = 1`, `θ` decaying. Each profile
//! is solved by finite volumes on a graded grid `y_j = Y (j/M)^γ`; cell
//! conductances use the exact integral of `y^{2s-1}` so that the local
//! behaviour `θ ≈ 1 − c y^{2s}` is captured without differencing the layer.
//! The weighted flux `−lim y^{1-2s} θ'` is read off by fitting `c y^{2s}` on
//! the first nodes.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GridField, SpectralField};
use crate::geometry::EigenBasis;

/// Minimum `Y_max √λ` for a profile solve.
pub const MIN_ADEQUACY: f64 = 8.0;

/// Graded nodes `y_j = Y_max (j/M)^γ`, `j = 0..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct YGrid {
    nodes: Vec<f64>,
    grading: f64,
}

impl YGrid {
    pub fn graded(y_max: f64, intervals: usize, grading: f64) -> Result<Self> {
        if !(y_max > 0.0 && y_max.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "y_max",
                value: y_max,
                bound: "y_max > 0",
            });
        }
        if intervals < 8 {
            return Err(Error::InvalidParameter {
                name: "intervals",
                value: intervals as f64,
                bound: "at least 8 intervals",
            });
        }
        if !(grading >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "grading",
                value: grading,
                bound: "grading >= 1",
            });
        }
        let m = intervals as f64;
        let nodes = (0..=intervals)
            .map(|j| {
                if j == intervals {
                    y_max
                } else {
                    y_max * (j as f64 / m).powf(grading)
                }
            })
            .collect();
        Ok(YGrid { nodes, grading })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn y_max(&self) -> f64 {
        *self.nodes.last().expect("non-empty")
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// How per-mode y-grids are laid out: `Y_max = decay_scale / √λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YGridPolicy {
    pub intervals: usize,
    pub grading: f64,
    pub decay_scale: f64,
    /// Nodes used by the flux fit.
    pub fit_nodes: usize,
}

impl Default for YGridPolicy {
    fn default() -> Self {
        YGridPolicy {
            intervals: 4096,
            grading: 3.0,
            decay_scale: 20.0,
            fit_nodes: 6,
        }
    }
}

impl YGridPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.decay_scale < MIN_ADEQUACY {
            return Err(Error::InvalidParameter {
                name: "decay_scale",
                value: self.decay_scale,
                bound: "decay_scale >= 8",
            });
        }
        if self.fit_nodes < 2 || self.fit_nodes >= self.intervals {
            return Err(Error::InvalidParameter {
                name: "fit_nodes",
                value: self.fit_nodes as f64,
                bound: "2 <= fit_nodes < intervals",
            });
        }
        YGrid::graded(1.0, self.intervals, self.grading).map(|_| ())
    }

    pub fn grid_for(&self, lambda: f64) -> Result<YGrid> {
        YGrid::graded(
            self.decay_scale / lambda.sqrt(),
            self.intervals,
            self.grading,
        )
    }
}

/// Samples of one extension profile `θ(y)` together with its deficit
/// `1 − θ`, which is solved for directly to keep small values accurate.
#[derive(Debug, Clone)]
pub struct Profile {
    pub lambda: f64,
    pub y: Vec<f64>,
    pub theta: Vec<f64>,
    pub deficit: Vec<f64>,
    conductance: Vec<f64>,
    mass: Vec<f64>,
}

impl Profile {
    /// Linear interpolation of `θ` at height `y` (0 beyond the grid).
    pub fn value_at(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 1.0;
        }
        let j = self.y.partition_point(|&v| v <= y);
        if j >= self.y.len() {
            return 0.0;
        }
        let (y0, y1) = (self.y[j - 1], self.y[j]);
        let t = (y - y0) / (y1 - y0);
        (1.0 - t) * self.theta[j - 1] + t * self.theta[j]
    }

    /// `∫ y^{1-2s} (θ'² + λ θ²) dy` with the scheme's own conductances and
    /// cell masses.
    pub fn energy(&self) -> f64 {
        let grad: f64 = self
            .theta
            .windows(2)
            .zip(&self.conductance)
            .map(|(w, k)| k * (w[1] - w[0]).powi(2))
            .sum();
        let bulk: f64 = self
            .theta
            .iter()
            .zip(&self.mass)
            .map(|(t, m)| t * t * m)
            .sum();
        grad + self.lambda * bulk
    }

    /// Least-squares fit of `1 − θ ≈ c y^{2s}` on the first `q` nodes after
    /// the origin; returns `(c, relative rms misfit)`.
    pub fn layer_fit(&self, s: f64, q: usize) -> (f64, f64) {
        let pts = 1..=q.min(self.y.len() - 1);
        let (mut num, mut den) = (0.0, 0.0);
        for j in pts.clone() {
            let t = self.y[j].powf(2.0 * s);
            num += t * self.deficit[j];
            den += t * t;
        }
        let c = num / den;
        let (mut res, mut nrm) = (0.0, 0.0);
        for j in pts {
            let t = self.y[j].powf(2.0 * s);
            res += (self.deficit[j] - c * t).powi(2);
            nrm += self.deficit[j].powi(2);
        }
        (c, if nrm > 0.0 { (res / nrm).sqrt() } else { 0.0 })
    }
}

fn check_open_s(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "s",
            value: s,
            bound: "0 < s < 1 for the extension",
        })
    }
}

/// Solves `θ'' + ((1-2s)/y) θ' − λ θ = 0`, `θ(0) = 1`, `θ(Y_max) = 0`.
pub fn extension_profile(lambda: f64, s: f64, ygrid: &YGrid) -> Result<Profile> {
    check_open_s(s)?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda,
            bound: "lambda > 0",
        });
    }
    let adequacy = ygrid.y_max() * lambda.sqrt();
    if adequacy < MIN_ADEQUACY {
        return Err(Error::Extension(format!(
            "truncation inadequate: Y_max sqrt(lambda) = {adequacy:.3} < {MIN_ADEQUACY}"
        )));
    }
    let y = ygrid.nodes();
    let m = y.len() - 1;
    let two_s = 2.0 * s;
    let two_m = 2.0 - two_s;
    // conductance of cell [y_j, y_{j+1}]: 1 / ∫ y^{2s-1} dy
    let conductance: Vec<f64> = y
        .windows(2)
        .map(|w| two_s / (w[1].powf(two_s) - w[0].powf(two_s)))
        .collect();
    // dual-cell masses ∫ y^{1-2s} dy around each node
    let mass: Vec<f64> = (0..=m)
        .map(|j| {
            let lo = if j == 0 { 0.0 } else { 0.5 * (y[j - 1] + y[j]) };
            let hi = if j == m {
                y[m]
            } else {
                0.5 * (y[j] + y[j + 1])
            };
            (hi.powf(two_m) - lo.powf(two_m)) / two_m
        })
        .collect();

    // Unknowns d_j = 1 − θ_j for j = 1..m-1 with d_0 = 0, d_m = 1.
    // Row j: −k_{j-1} d_{j-1} + (k_{j-1} + k_j + λ m_j) d_j − k_j d_{j+1} = λ m_j
    let n = m - 1;
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for r in 0..n {
        let j = r + 1;
        let (kl, kr) = (conductance[j - 1], conductance[j]);
        sub[r] = -kl;
        diag[r] = kl + kr + lambda * mass[j];
        sup[r] = -kr;
        rhs[r] = lambda * mass[j];
    }
    rhs[n - 1] += conductance[m - 1]; // d_m = 1
    let interior = thomas(&sub, &diag, &sup, &rhs);

    let mut deficit = Vec::with_capacity(m + 1);
    deficit.push(0.0);
    deficit.extend(interior);
    deficit.push(1.0);
    let theta = deficit.iter().map(|d| 1.0 - d).collect();
    Ok(Profile {
        lambda,
        y: y.to_vec(),
        theta,
        deficit,
        conductance,
        mass,
    })
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / den;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// `U(x, y) = Σ u_i φ_i(x) θ_i(y)` on the truncated half-cylinder.
#[derive(Debug, Clone)]
pub struct CylinderField {
    basis: Arc<EigenBasis>,
    s: f64,
    coeffs: Vec<f64>,
    profiles: Vec<Option<Profile>>,
}

impl CylinderField {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn profile(&self, i: usize) -> Option<&Profile> {
        self.profiles.get(i).and_then(Option::as_ref)
    }

    fn profile_checked(&self, i: usize) -> Result<&Profile> {
        self.profile(i)
            .ok_or_else(|| Error::Extension(format!("missing profile for mode {i}")))
    }

    /// `U(·, 0)`: reproduces `synthesize(u)`.
    pub fn trace(&self) -> GridField {
        self.slice(0.0)
    }

    /// `U(·, y)` on the base grid.
    pub fn slice(&self, y: f64) -> GridField {
        let c: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &u)| match self.profile(i) {
                Some(p) if u != 0.0 => u * p.value_at(y),
                _ => 0.0,
            })
            .collect();
        SpectralField::new(self.basis.clone(), c)
            .expect("finite coefficients")
            .synthesize()
    }
}

/// Extends `u` into the cylinder, solving one profile per nonzero mode.
pub fn extend_field(u: &SpectralField, s: f64, policy: &YGridPolicy) -> Result<CylinderField> {
    check_open_s(s)?;
    policy.validate()?;
    let basis = u.basis().clone();
    let profiles = u
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            if c == 0.0 {
                Ok(None)
            } else {
                let lambda = basis.eigenvalue(i);
                extension_profile(lambda, s, &policy.grid_for(lambda)?).map(Some)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CylinderField {
        basis,
        s,
        coeffs: u.coeffs().to_vec(),
        profiles,
    })
}

/// Largest acceptable relative misfit of the layer fit.
pub const FIT_TOLERANCE: f64 = 1e-2;

/// Weighted Neumann data `−lim y^{1-2s} ∂_y U` per mode: `2s c_i u_i`.
pub fn extract_flux(field: &CylinderField, fit_nodes: usize) -> Result<SpectralField> {
    let s = field.s;
    let mut out = vec![0.0; field.coeffs.len()];
    for (i, &u) in field.coeffs.iter().enumerate() {
        if u == 0.0 {
            continue;
        }
        let (c, misfit) = field.profile_checked(i)?.layer_fit(s, fit_nodes);
        if !(misfit <= FIT_TOLERANCE) {
            return Err(Error::Extension(format!(
                "unresolved boundary layer in mode {i}: fit misfit {misfit:e}"
            )));
        }
        out[i] = 2.0 * s * c * u;
    }
    SpectralField::new(field.basis.clone(), out)
}

/// `∫_C y^{1-2s} |∇U|² dx dy = Σ u_i² ∫ y^{1-2s} (θ_i'² + λ_i θ_i²) dy`.
pub fn cylinder_energy(field: &CylinderField) -> Result<f64> {
    field
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, &u)| u != 0.0)
        .map(|(i, &u)| Ok(u * u * field.profile_checked(i)?.energy()))
        .sum()
}

/// Mode-independence of the flux-to-symbol ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub s: f64,
    /// Mean of `flux_i / λ_i^s` over the calibrated modes.
    pub c_s: f64,
    /// `max_i |ratio_i − c_s| / c_s`.
    pub spread: f64,
    pub ratios: Vec<f64>,
}

pub const SPREAD_TOLERANCE: f64 = 1e-2;

impl Calibration {
    pub fn passed(&self) -> bool {
        self.spread <= SPREAD_TOLERANCE
    }
}

/// Calibrates the extension constant from unit single-mode inputs on the
/// first `modes` modes.
pub fn calibrate_cs(
    basis: &Arc<EigenBasis>,
    s: f64,
    modes: usize,
    policy: &YGridPolicy,
) -> Result<Calibration> {
    if modes < 3 || modes > basis.len() {
        return Err(Error::InvalidParameter {
            name: "modes",
            value: modes as f64,
            bound: "3 <= modes <= basis size",
        });
    }
    let ratios = (0..modes)
        .map(|i| {
            let unit = SpectralField::unit(basis.clone(), i)?;
            let flux = extract_flux(&extend_field(&unit, s, policy)?, policy.fit_nodes)?;
            Ok(flux.coeffs()[i] / basis.eigenvalue(i).powf(s))
        })
        .collect::<Result<Vec<f64>>>()?;
    let c_s = ratios.iter().sum::<f64>() / modes as f64;
    let spread = ratios
        .iter()
        .map(|r| (r - c_s).abs() / c_s)
        .fold(0.0, f64::max);
    Ok(Calibration {
        s,
        c_s,
        spread,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use std::f64::consts::PI;

    #[test]
    fn graded_grid_shape() {
        let g = YGrid::graded(2.0, 10, 3.0).unwrap();
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.y_max(), 2.0);
        assert!((g.nodes()[5] - 2.0 * 0.125).abs() < 1e-15);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        assert!(YGrid::graded(2.0, 10, 0.5).is_err());
    }

    #[test]
    fn profile_boundary_values_and_monotone() {
        let g = YGrid::graded(20.0 / 3.0, 2000, 3.0).unwrap();
        let p = extension_profile(9.0, 0.3, &g).unwrap();
        assert_eq!(p.theta[0], 1.0);
        assert_eq!(*p.theta.last().unwrap(), 0.0);
        assert!(p.theta.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn inadequate_truncation_rejected() {
        let g = YGrid::graded(1.0, 100, 3.0).unwrap();
        assert!(extension_profile(16.0, 0.5, &g).is_err()); // 1·4 < 8
        assert!(extension_profile(64.0, 0.5, &g).is_ok());
        assert!(extension_profile(64.0, 1.0, &g).is_err());
    }

    #[test]
    fn zero_field_extends_to_zero() {
        let b = EigenBasis::with_resolution(Domain::interval(PI).unwrap(), 8, 1).unwrap();
        let u = SpectralField::zeros(b);
        let policy = YGridPolicy::default();
        let ext = extend_field(&u, 0.4, &policy).unwrap();
        assert_eq!(cylinder_energy(&ext).unwrap(), 0.0);
        assert!(extract_flux(&ext, 6)
            .unwrap()
            .coeffs()
            .iter()
            .all(|&c| c == 0.0));
        assert_eq!(ext.trace().sup_norm(), 0.0);
    }

    #[test]
    fn calibrate_needs_three_modes() {
        let b = EigenBasis::with_resolution(Domain::interval(PI).unwrap(), 8, 1).unwrap();
        assert!(calibrate_cs(&b, 0.5, 2, &YGridPolicy::default()).is_err());
    }
}
