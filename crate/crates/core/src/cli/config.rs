//! Run configuration: a TOML document whose sections map onto the solver,
//! continuation and validator options. Unknown keys are rejected and every
//! value is checked before any solve starts.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::continuation::{ContinuationOptions, EpsSchedule};
use crate::error::{Error, Result};
use crate::extension::YGridPolicy;
use crate::geometry::{Domain, EigenBasis, Grid};
use crate::monotone::{FastPath, ShiftPolicy, SolveOptions};
use crate::spectral::FracExponent;

/// Mode count on the interval when none is configured.
pub const DEFAULT_INTERVAL_MODES: usize = 128;
/// Per-axis mode count on the rectangle when none is configured.
pub const DEFAULT_RECTANGLE_MODES: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: Domain,
    #[serde(default)]
    pub discretization: Discretization,
    #[serde(default)]
    pub exponents: Exponents,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default)]
    pub validator: Validator,
    #[serde(default)]
    pub probe: Probe,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("runs")
}

/// Mode selection and grid. `n_modes` takes the lowest eigenvalues;
/// `modes_per_axis` takes the full tensor set. At most one may be given;
/// with neither, intervals use the lowest 128 modes and rectangles the
/// 12 × 12 tensor set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes_per_axis: Option<Vec<usize>>,
    /// Explicit grid nodes per axis (boundary included).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<usize>>,
    /// Multiple of the coarsest admissible grid when `nodes` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oversample: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exponents {
    pub s: f64,
    pub p: f64,
}

impl Default for Exponents {
    fn default() -> Self {
        Exponents { s: 0.5, p: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schedule {
    pub eps0: f64,
    pub ratio: f64,
    pub steps: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        let d = EpsSchedule::default();
        Schedule {
            eps0: d.eps0,
            ratio: d.ratio,
            steps: d.steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tol_inner: f64,
    pub tol_pos: f64,
    pub energy_tol: f64,
    pub limit_residual_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let d = SolveOptions::default();
        Tolerances {
            tol_inner: d.tol_inner,
            tol_pos: d.tol_pos,
            energy_tol: d.energy_tol,
            limit_residual_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Solver {
    /// `ε` of the single solve run by `solve-eps`.
    pub eps: f64,
    pub max_iter: usize,
    pub shift: ShiftPolicy,
    pub shift_safety: f64,
    pub test_modes: usize,
    pub warm_start: bool,
    pub limit_test_modes: usize,
    pub limit_refine: usize,
}

impl Default for Solver {
    fn default() -> Self {
        let s = SolveOptions::default();
        let c = ContinuationOptions::default();
        Solver {
            eps: 0.1,
            max_iter: s.max_iter,
            shift: s.shift,
            shift_safety: s.shift_safety,
            test_modes: s.test_modes,
            warm_start: c.warm_start,
            limit_test_modes: c.limit_test_modes,
            limit_refine: c.limit_refine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Validator {
    pub intervals: usize,
    pub grading: f64,
    /// `Y_max √λ` for each mode.
    pub decay_scale: f64,
    pub fit_nodes: usize,
    pub calibrate_modes: usize,
}

impl Default for Validator {
    fn default() -> Self {
        let y = YGridPolicy::default();
        Validator {
            intervals: y.intervals,
            grading: y.grading,
            decay_scale: y.decay_scale,
            fit_nodes: y.fit_nodes,
            calibrate_modes: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Probe {
    /// Ratio of the second schedule, which ends at the same `ε_K`.
    pub ratio: f64,
}

impl Default for Probe {
    fn default() -> Self {
        Probe { ratio: 0.4 }
    }
}

impl RunConfig {
    /// Defaults everywhere except the domain.
    pub fn new(domain: Domain) -> Self {
        RunConfig {
            domain,
            discretization: Discretization::default(),
            exponents: Exponents::default(),
            schedule: Schedule::default(),
            tolerances: Tolerances::default(),
            solver: Solver::default(),
            validator: Validator::default(),
            probe: Probe::default(),
            output_dir: default_output(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks every field against the preconditions of the module that
    /// consumes it, including building the basis.
    pub fn validate(&self) -> Result<()> {
        self.exponent()?;
        self.schedule()?;
        self.solve_options().validate()?;
        self.policy().validate()?;
        let t = &self.tolerances;
        if !(t.limit_residual_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "limit_residual_tol",
                value: t.limit_residual_tol,
                bound: "> 0",
            });
        }
        if !(self.solver.eps > 0.0 && self.solver.eps.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "solver.eps",
                value: self.solver.eps,
                bound: "eps > 0",
            });
        }
        if !(self.probe.ratio > 0.0 && self.probe.ratio < 1.0) {
            return Err(Error::InvalidParameter {
                name: "probe.ratio",
                value: self.probe.ratio,
                bound: "0 < ratio < 1",
            });
        }
        if self.solver.limit_refine == 0 || self.solver.limit_test_modes == 0 {
            return Err(Error::Config(
                "solver.limit_refine and solver.limit_test_modes must be >= 1".into(),
            ));
        }
        let basis = self.basis()?;
        let v = self.validator.calibrate_modes;
        if v < 3 || v > basis.len() {
            return Err(Error::InvalidParameter {
                name: "validator.calibrate_modes",
                value: v as f64,
                bound: "3 <= calibrate_modes <= mode count",
            });
        }
        Ok(())
    }

    pub fn exponent(&self) -> Result<FracExponent> {
        FracExponent::new(self.exponents.s, self.exponents.p)
    }

    pub fn schedule(&self) -> Result<EpsSchedule> {
        let s = &self.schedule;
        EpsSchedule::new(s.eps0, s.ratio, s.steps)
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol_inner: self.tolerances.tol_inner,
            max_iter: self.solver.max_iter,
            shift: self.solver.shift,
            shift_safety: self.solver.shift_safety,
            tol_pos: self.tolerances.tol_pos,
            test_modes: self.solver.test_modes,
            energy_tol: self.tolerances.energy_tol,
            fast_path: FastPath::Off,
        }
    }

    pub fn continuation_options(&self) -> ContinuationOptions {
        ContinuationOptions {
            solve: self.solve_options(),
            warm_start: self.solver.warm_start,
            limit_test_modes: self.solver.limit_test_modes,
            limit_refine: self.solver.limit_refine,
        }
    }

    pub fn policy(&self) -> YGridPolicy {
        let v = &self.validator;
        YGridPolicy {
            intervals: v.intervals,
            grading: v.grading,
            decay_scale: v.decay_scale,
            fit_nodes: v.fit_nodes,
        }
    }

    pub fn basis(&self) -> Result<Arc<EigenBasis>> {
        let d = &self.discretization;
        let dim = self.domain.dim();
        let per_axis = |name: &'static str, v: &Vec<usize>| {
            if v.len() == dim {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "discretization.{name} needs {dim} entries, got {}",
                    v.len()
                )))
            }
        };
        if d.nodes.is_some() && d.oversample.is_some() {
            return Err(Error::Config(
                "discretization: give either `nodes` or `oversample`, not both".into(),
            ));
        }
        let oversample = d.oversample.unwrap_or(1);
        if oversample == 0 {
            return Err(Error::InvalidParameter {
                name: "discretization.oversample",
                value: 0.0,
                bound: ">= 1",
            });
        }
        let grid = match &d.nodes {
            Some(n) => {
                per_axis("nodes", n)?;
                Some(Arc::new(Grid::uniform(&self.domain, n)?))
            }
            None => None,
        };
        match (d.n_modes, &d.modes_per_axis) {
            (Some(_), Some(_)) => Err(Error::Config(
                "discretization: give either `n_modes` or `modes_per_axis`, not both".into(),
            )),
            (Some(n), None) => match grid {
                Some(g) => EigenBasis::new(self.domain, n, g),
                None => EigenBasis::with_resolution(self.domain, n, oversample),
            },
            (None, Some(k)) => {
                per_axis("modes_per_axis", k)?;
                match grid {
                    Some(g) => EigenBasis::tensor(self.domain, k, g),
                    None => EigenBasis::tensor_with_resolution(self.domain, k, oversample),
                }
            }
            (None, None) => match (self.domain, grid) {
                (Domain::Interval { .. }, Some(g)) => {
                    EigenBasis::new(self.domain, DEFAULT_INTERVAL_MODES, g)
                }
                (Domain::Interval { .. }, None) => {
                    EigenBasis::with_resolution(self.domain, DEFAULT_INTERVAL_MODES, oversample)
                }
                (Domain::Rectangle { .. }, g) => {
                    let k = [DEFAULT_RECTANGLE_MODES; 2];
                    match g {
                        Some(g) => EigenBasis::tensor(self.domain, &k, g),
                        None => EigenBasis::tensor_with_resolution(self.domain, &k, oversample),
                    }
                }
            },
        }
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::from_toml_str(&text)
}
