//! Right-hand sides `g(r)`: the regularized singular family `(ε + r)^{-p}`
//! and a generic interface certified against the blowup/monotonicity
//! conditions by sampling.

use serde::Serialize;

use crate::error::{Error, Result};

/// A nonlinearity `r ↦ g(r)` usable by the monotone iteration.
pub trait Nonlinearity {
    fn eval(&self, r: f64) -> Result<f64>;

    /// Supremum of `|g'|` on `[lower, ∞)`, if known.
    fn lipschitz_bound(&self, _lower: f64) -> Result<Option<f64>> {
        Ok(None)
    }

    /// Required excess of `g(1e-12)` over `g(1)` for the blowup check.
    fn blowup_margin(&self) -> f64 {
        10.0
    }
}

/// `g(r) = (ε + max(r, 0))^{-p}`; `ε = 0` is the singular limit `r^{-p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularRhs {
    pub p: f64,
    pub eps: f64,
}

impl SingularRhs {
    pub fn new(p: f64, eps: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p,
                bound: "0 < p < 1",
            });
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "eps",
                value: eps,
                bound: "eps >= 0",
            });
        }
        Ok(SingularRhs { p, eps })
    }

    pub fn limit(p: f64) -> Result<Self> {
        SingularRhs::new(p, 0.0)
    }

    /// Value at `r`; negative `r` (spectral undershoot) is clamped to zero.
    pub fn eval_g(&self, r: f64) -> Result<f64> {
        let base = self.eps + r.max(0.0);
        if base <= 0.0 || r.is_nan() {
            return Err(Error::SingularEvaluation(r));
        }
        Ok(base.powf(-self.p))
    }

    /// `p (ε + lower)^{-(p+1)}`, the supremum of `|g'|` on `[lower, ∞)`.
    pub fn lipschitz(&self, lower: f64) -> Result<f64> {
        let base = self.eps + lower;
        if !(base > 0.0) || lower < 0.0 {
            return Err(Error::InvalidParameter {
                name: "eps + lower",
                value: base,
                bound: "eps + lower > 0 with lower >= 0",
            });
        }
        Ok(self.p * base.powf(-(self.p + 1.0)))
    }
}

impl Nonlinearity for SingularRhs {
    fn eval(&self, r: f64) -> Result<f64> {
        self.eval_g(r)
    }

    fn lipschitz_bound(&self, lower: f64) -> Result<Option<f64>> {
        self.lipschitz(lower).map(Some)
    }
}

/// Wraps a closure as a [`Nonlinearity`] with an optional Lipschitz bound.
pub struct RuleFn<F> {
    f: F,
    lipschitz: Option<f64>,
    margin: f64,
}

impl<F: Fn(f64) -> f64> RuleFn<F> {
    pub fn new(f: F) -> Self {
        RuleFn {
            f,
            lipschitz: None,
            margin: 10.0,
        }
    }

    /// Declares a global bound on `|g'|`.
    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }
}

impl<F: Fn(f64) -> f64> Nonlinearity for RuleFn<F> {
    fn eval(&self, r: f64) -> Result<f64> {
        let v = (self.f)(r);
        if v.is_nan() {
            Err(Error::NonFinite { node: 0, value: v })
        } else {
            Ok(v)
        }
    }

    fn lipschitz_bound(&self, _lower: f64) -> Result<Option<f64>> {
        Ok(self.lipschitz)
    }

    fn blowup_margin(&self) -> f64 {
        self.margin
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub r_lo: f64,
    pub r_hi: f64,
    pub g_lo: f64,
    pub g_hi: f64,
}

/// Outcome of [`verify_g1_g2`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct G1G2Report {
    /// Blowup at the origin: `g(1e-12) > g(1) + margin`.
    pub blowup: bool,
    pub g_near_zero: f64,
    pub g_at_one: f64,
    /// `g` nonincreasing on every sampled consecutive pair.
    pub nonincreasing: bool,
    pub violations: Vec<Witness>,
}

impl G1G2Report {
    pub fn passed(&self) -> bool {
        self.blowup && self.nonincreasing
    }
}

pub const SAMPLE_LO: f64 = 1e-12;
pub const SAMPLE_HI: f64 = 1e6;

/// Samples `g` on a geometric grid over `[1e-12, 1e6]` and checks blowup at
/// the origin and monotone nonincrease.
pub fn verify_g1_g2(g: &dyn Nonlinearity, samples: usize) -> Result<G1G2Report> {
    if samples < 2 {
        return Err(Error::InvalidParameter {
            name: "samples",
            value: samples as f64,
            bound: "samples >= 2",
        });
    }
    let ratio = (SAMPLE_HI / SAMPLE_LO).ln() / (samples - 1) as f64;
    let rs: Vec<f64> = (0..samples)
        .map(|i| {
            if i == samples - 1 {
                SAMPLE_HI
            } else {
                SAMPLE_LO * (ratio * i as f64).exp()
            }
        })
        .collect();
    let gs = rs.iter().map(|&r| g.eval(r)).collect::<Result<Vec<_>>>()?;
    let violations: Vec<Witness> = rs
        .windows(2)
        .zip(gs.windows(2))
        .filter(|(_, gw)| gw[1] > gw[0])
        .map(|(rw, gw)| Witness {
            r_lo: rw[0],
            r_hi: rw[1],
            g_lo: gw[0],
            g_hi: gw[1],
        })
        .collect();
    let g_near_zero = gs[0];
    let g_at_one = g.eval(1.0)?;
    Ok(G1G2Report {
        blowup: g_near_zero > g_at_one + g.blowup_margin(),
        g_near_zero,
        g_at_one,
        nonincreasing: violations.is_empty(),
        violations,
    })
}
