//! The spectral fractional Laplacian on a truncated eigenbasis.
//!
//! `(-Δ)^s` acts diagonally: coefficient `i` is multiplied by `λ_i^s`.
//! Shifted inverses, the `H^s_0` norm and weak-form residuals are all exact
//! diagonal algebra on the coefficient vector.

use serde::{Deserialize, Serialize};

use crate::error::{check_s, Error, Result};
use crate::field::{GridField, SpectralField};
use crate::geometry::EigenBasis;

/// Exponents of the singular problem `(-Δ)^s u = u^{-p}`.
///
/// `s = 1` is admitted so the classical Laplacian can serve as an oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracExponent {
    pub s: f64,
    pub p: f64,
}

impl FracExponent {
    pub fn new(s: f64, p: f64) -> Result<Self> {
        check_s(s)?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p,
                bound: "0 < p < 1",
            });
        }
        Ok(FracExponent { s, p })
    }
}

/// `λ_i^s` for every mode of the basis.
pub fn symbol(basis: &EigenBasis, s: f64) -> Vec<f64> {
    basis.eigenvalues().map(|l| l.powf(s)).collect()
}

pub fn apply_fractional(u: &SpectralField, s: f64) -> Result<SpectralField> {
    check_s(s)?;
    let coeffs = u
        .coeffs()
        .iter()
        .zip(u.basis().eigenvalues())
        .map(|(&c, l)| l.powf(s) * c)
        .collect();
    Ok(SpectralField::from_parts(u.basis().clone(), coeffs))
}

/// Solves `((-Δ)^s + mu) u = h` on the truncated space.
pub fn solve_shifted(h: &SpectralField, s: f64, mu: f64) -> Result<SpectralField> {
    check_s(s)?;
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "mu",
            value: mu,
            bound: "mu >= 0",
        });
    }
    let coeffs = h
        .coeffs()
        .iter()
        .zip(h.basis().eigenvalues())
        .map(|(&c, l)| c / (l.powf(s) + mu))
        .collect();
    Ok(SpectralField::from_parts(h.basis().clone(), coeffs))
}

/// `‖u‖_{H^s_0} = (Σ λ_i^s c_i²)^{1/2}`.
pub fn hs_norm(u: &SpectralField, s: f64) -> Result<f64> {
    Ok(hs_norm_sq(u, s)?.sqrt())
}

pub fn hs_norm_sq(u: &SpectralField, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(u.coeffs()
        .iter()
        .zip(u.basis().eigenvalues())
        .map(|(&c, l)| l.powf(s) * c * c)
        .sum())
}

/// Weak-form residual against the first `m` eigenfunctions:
/// entry `j` is `λ_j^s u_j − ⟨rhs, φ_j⟩`.
///
/// The pairing uses interior nodes only, so `rhs` may be singular on the
/// boundary.
pub fn weak_residual(
    basis: &std::sync::Arc<EigenBasis>,
    u: &GridField,
    rhs: &GridField,
    s: f64,
    m: usize,
) -> Result<Vec<f64>> {
    check_s(s)?;
    if m > basis.len() {
        return Err(Error::LengthMismatch {
            expected: basis.len(),
            got: m,
        });
    }
    u.same_grid(rhs)?;
    if let Some((node, value)) = rhs.first_nonfinite_interior() {
        return Err(Error::NonFinite { node, value });
    }
    let coeffs = basis.analyze(u)?;
    let pairing = basis.project(rhs.values(), m);
    Ok(coeffs
        .coeffs()
        .iter()
        .zip(basis.eigenvalues())
        .zip(pairing)
        .map(|((&c, l), r)| l.powf(s) * c - r)
        .collect())
}

/// Largest absolute entry, e.g. of a residual vector.
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
