//! The two faces of every unknown: nodal values on a grid and coefficients
//! in an eigenbasis.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{EigenBasis, Grid};

/// Nodal values on a [`Grid`].
#[derive(Debug, Clone)]
pub struct GridField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(GridField { grid, values })
    }

    pub(crate) fn from_parts(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        GridField { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        GridField::from_parts(grid, vec![0.0; n])
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let n = grid.len();
        GridField::from_parts(grid, vec![c; n])
    }

    /// Samples `f` at every node's coordinates.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|n| f(&grid.coords(n))).collect();
        GridField::from_parts(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &GridField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?} vs {:?} nodes",
                self.grid.nodes_per_axis(),
                other.grid.nodes_per_axis()
            )))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField::from_parts(
            self.grid.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn zip_map(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> Result<GridField> {
        self.same_grid(other)?;
        Ok(GridField::from_parts(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &GridField) -> Result<f64> {
        self.same_grid(other)?;
        Ok(sup_diff(&self.values, &other.values))
    }

    /// Minimum over interior nodes (`+∞` if there are none).
    pub fn interior_min(&self) -> f64 {
        self.grid
            .interior()
            .iter()
            .map(|&n| self.values[n])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Full-grid quadrature `∫ f dx`.
    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    /// First interior node carrying a non-finite value.
    pub fn first_nonfinite_interior(&self) -> Option<(usize, f64)> {
        self.grid
            .interior()
            .iter()
            .map(|&n| (n, self.values[n]))
            .find(|(_, v)| !v.is_finite())
    }
}

pub(crate) fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Coefficients `c_1..c_N` in an [`EigenBasis`].
#[derive(Debug, Clone)]
pub struct SpectralField {
    basis: Arc<EigenBasis>,
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn new(basis: Arc<EigenBasis>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() > basis.len() {
            return Err(Error::LengthMismatch {
                expected: basis.len(),
                got: coeffs.len(),
            });
        }
        if let Some((i, &v)) = coeffs.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { node: i, value: v });
        }
        Ok(SpectralField { basis, coeffs })
    }

    pub fn zeros(basis: Arc<EigenBasis>) -> Self {
        let n = basis.len();
        SpectralField {
            basis,
            coeffs: vec![0.0; n],
        }
    }

    /// Unit coefficient vector `e_i` (0-based `i`).
    pub fn unit(basis: Arc<EigenBasis>, i: usize) -> Result<Self> {
        let mut c = vec![0.0; basis.len()];
        *c.get_mut(i).ok_or(Error::LengthMismatch {
            expected: basis.len(),
            got: i + 1,
        })? = 1.0;
        Ok(SpectralField { basis, coeffs: c })
    }

    pub(crate) fn from_parts(basis: Arc<EigenBasis>, coeffs: Vec<f64>) -> Self {
        SpectralField { basis, coeffs }
    }

    pub fn basis(&self) -> &Arc<EigenBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn synthesize(&self) -> GridField {
        GridField::from_parts(
            self.basis.grid().clone(),
            self.basis.synthesize_values(&self.coeffs),
        )
    }
}
