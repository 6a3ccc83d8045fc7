//! Boxes with closed-form Dirichlet eigenpairs, uniform quadrature grids and
//! the nodal/modal transforms between them.
//!
//! Only the interval `(0, L)` and the rectangle `(0, Lx) × (0, Ly)` are
//! supported: on these the eigenpairs of `-Δ` are known exactly, so every
//! fractional power of the operator is exact on the truncated basis.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GridField, SpectralField};

/// Minimum number of grid nodes per unit of the largest per-axis mode index.
pub const NODES_PER_MODE_INDEX: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Domain {
    Interval { length: f64 },
    Rectangle { lx: f64, ly: f64 },
}

impl Domain {
    pub fn interval(length: f64) -> Result<Self> {
        let d = Domain::Interval { length };
        d.validate()?;
        Ok(d)
    }

    pub fn rectangle(lx: f64, ly: f64) -> Result<Self> {
        let d = Domain::Rectangle { lx, ly };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, l) in self.named_lengths() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value: l,
                    bound: "length > 0",
                });
            }
        }
        Ok(())
    }

    fn named_lengths(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Domain::Interval { length } => vec![("length", length)],
            Domain::Rectangle { lx, ly } => vec![("lx", lx), ("ly", ly)],
        }
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.named_lengths().into_iter().map(|(_, l)| l).collect()
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Rectangle { .. } => 2,
        }
    }

    pub fn measure(&self) -> f64 {
        self.lengths().iter().product()
    }
}

/// One axis of a tensor grid: uniform nodes on `[0, length]` with composite
/// trapezoid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub length: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Axis {
    fn uniform(length: f64, n: usize) -> Self {
        let h = length / (n - 1) as f64;
        let nodes = (0..n)
            .map(|i| if i == n - 1 { length } else { i as f64 * h })
            .collect();
        let weights = (0..n)
            .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
            .collect();
        Axis {
            length,
            nodes,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.len() - 1) as f64
    }
}

/// Tensor-product grid. Flat node index is row-major with the first axis
/// outermost: `idx = ix * ny + iy`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
    weights: Vec<f64>,
    interior: Vec<usize>,
}

impl Grid {
    /// Uniform grid with `nodes[a]` nodes (boundary included) on axis `a`.
    pub fn uniform(domain: &Domain, nodes: &[usize]) -> Result<Self> {
        domain.validate()?;
        let lengths = domain.lengths();
        if nodes.len() != lengths.len() {
            return Err(Error::LengthMismatch {
                expected: lengths.len(),
                got: nodes.len(),
            });
        }
        if let Some(&n) = nodes.iter().find(|&&n| n < 3) {
            return Err(Error::InvalidParameter {
                name: "nodes",
                value: n as f64,
                bound: "at least 3 nodes per axis",
            });
        }
        let axes: Vec<Axis> = lengths
            .iter()
            .zip(nodes)
            .map(|(&l, &n)| Axis::uniform(l, n))
            .collect();

        let total: usize = nodes.iter().product();
        let mut weights = Vec::with_capacity(total);
        let mut interior = Vec::new();
        for idx in 0..total {
            let mut w = 1.0;
            let mut inside = true;
            let mut rem = idx;
            for axis in axes.iter().rev() {
                let i = rem % axis.len();
                rem /= axis.len();
                w *= axis.weights[i];
                inside &= i != 0 && i != axis.len() - 1;
            }
            weights.push(w);
            if inside {
                interior.push(idx);
            }
        }
        Ok(Grid {
            axes,
            weights,
            interior,
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn nodes_per_axis(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::len).collect()
    }

    /// Quadrature weights, one per node.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Flat indices of nodes not on the boundary, in increasing order.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        self.interior.binary_search(&idx).is_err()
    }

    /// Per-axis indices of a flat node index.
    pub fn multi_index(&self, idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        let mut rem = idx;
        for (a, axis) in self.axes.iter().enumerate().rev() {
            out[a] = rem % axis.len();
            rem /= axis.len();
        }
        out
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .zip(&self.axes)
            .map(|(&i, axis)| axis.nodes[i])
            .collect()
    }

    /// Largest grid spacing over the axes.
    pub fn spacing(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).fold(0.0, f64::max)
    }

    /// Quadrature `Σ w f` over all nodes.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Quadrature restricted to interior nodes; boundary values are never read.
    pub fn integrate_interior(&self, values: &[f64]) -> f64 {
        self.interior
            .iter()
            .map(|&n| self.weights[n] * values[n])
            .sum()
    }
}

/// A Dirichlet eigenmode: per-axis wave numbers and eigenvalue of `-Δ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mode {
    pub index: Vec<usize>,
    pub eigenvalue: f64,
}

/// Truncated Dirichlet eigensystem `{λ_i, φ_i}` of `-Δ` sampled on a grid.
///
/// Samples are stored for interior nodes only; every eigenfunction is
/// exactly zero on the boundary nodes.
#[derive(Debug)]
pub struct EigenBasis {
    domain: Domain,
    grid: Arc<Grid>,
    modes: Vec<Mode>,
    // modes.len() × grid.interior().len(), row per mode
    samples: Vec<f64>,
    weighted: Vec<f64>,
}

impl EigenBasis {
    /// Builds the first `n_modes` eigenpairs, sorted by eigenvalue with ties
    /// broken lexicographically by wave-number tuple.
    pub fn new(domain: Domain, n_modes: usize, grid: Arc<Grid>) -> Result<Arc<Self>> {
        domain.validate()?;
        if n_modes == 0 {
            return Err(Error::InvalidParameter {
                name: "n_modes",
                value: 0.0,
                bound: "n_modes >= 1",
            });
        }
        let modes = lowest_modes(&domain.lengths(), n_modes);
        EigenBasis::from_modes(domain, modes, grid)
    }

    /// Builds the full tensor-product set `{k_a ≤ counts[a]}`, sorted by
    /// eigenvalue like [`EigenBasis::new`].
    ///
    /// Unlike the lowest-`N` selection, the truncated resolvent of a tensor
    /// set is a product of 1D kernels, which keeps its undershoot near
    /// corners at the 1D level.
    pub fn tensor(domain: Domain, counts: &[usize], grid: Arc<Grid>) -> Result<Arc<Self>> {
        domain.validate()?;
        if counts.len() != domain.dim() || counts.contains(&0) {
            return Err(Error::InvalidParameter {
                name: "counts",
                value: counts.len() as f64,
                bound: "one positive count per axis",
            });
        }
        EigenBasis::from_modes(domain, tensor_modes(&domain.lengths(), counts), grid)
    }

    /// [`EigenBasis::tensor`] on the coarsest grid meeting the resolution
    /// bound, times `oversample`.
    pub fn tensor_with_resolution(
        domain: Domain,
        counts: &[usize],
        oversample: usize,
    ) -> Result<Arc<Self>> {
        domain.validate()?;
        let nodes: Vec<usize> = counts
            .iter()
            .map(|&k| (NODES_PER_MODE_INDEX * oversample.max(1) * k + 1).max(3))
            .collect();
        let grid = Arc::new(Grid::uniform(&domain, &nodes)?);
        EigenBasis::tensor(domain, counts, grid)
    }

    fn from_modes(domain: Domain, modes: Vec<Mode>, grid: Arc<Grid>) -> Result<Arc<Self>> {
        let lengths = domain.lengths();
        if grid.dim() != lengths.len()
            || grid
                .axes()
                .iter()
                .zip(&lengths)
                .any(|(a, &l)| (a.length - l).abs() > 1e-14 * l)
        {
            return Err(Error::GridMismatch("grid does not cover the domain".into()));
        }
        let n_modes = modes.len();
        for a in 0..lengths.len() {
            let max_index = modes.iter().map(|m| m.index[a]).max().unwrap_or(0);
            let required = NODES_PER_MODE_INDEX * max_index;
            let nodes = grid.axes()[a].len();
            if nodes < required {
                return Err(Error::Unresolved {
                    modes: n_modes,
                    axis: a,
                    max_index,
                    required,
                    nodes,
                });
            }
        }

        let interior = grid.interior();
        let n_int = interior.len();
        let mut samples = vec![0.0; modes.len() * n_int];
        // per-axis 1D tables: table[a][k-1][i] = sqrt(2/L) sin(kπ x_i / L)
        let tables: Vec<Vec<Vec<f64>>> = grid
            .axes()
            .iter()
            .enumerate()
            .map(|(a, axis)| {
                let kmax = modes.iter().map(|m| m.index[a]).max().unwrap_or(1);
                let norm = (2.0 / axis.length).sqrt();
                (1..=kmax)
                    .map(|k| {
                        axis.nodes
                            .iter()
                            .map(|&x| norm * (k as f64 * PI * x / axis.length).sin())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        for (i, mode) in modes.iter().enumerate() {
            let row = &mut samples[i * n_int..(i + 1) * n_int];
            for (slot, &n) in row.iter_mut().zip(interior) {
                let mi = grid.multi_index(n);
                *slot = mode
                    .index
                    .iter()
                    .enumerate()
                    .map(|(a, &k)| tables[a][k - 1][mi[a]])
                    .product();
            }
        }
        let weights = grid.weights();
        let mut weighted = samples.clone();
        for row in weighted.chunks_mut(n_int) {
            for (v, &n) in row.iter_mut().zip(interior) {
                *v *= weights[n];
            }
        }
        Ok(Arc::new(EigenBasis {
            domain,
            grid,
            modes,
            samples,
            weighted,
        }))
    }

    /// Builds a basis on the coarsest uniform grid meeting the resolution
    /// bound, scaled by `oversample` (≥ 1) nodes-per-mode-index multiples.
    pub fn with_resolution(domain: Domain, n_modes: usize, oversample: usize) -> Result<Arc<Self>> {
        domain.validate()?;
        let modes = lowest_modes(&domain.lengths(), n_modes.max(1));
        let nodes: Vec<usize> = (0..domain.dim())
            .map(|a| {
                let kmax = modes.iter().map(|m| m.index[a]).max().unwrap_or(1);
                (NODES_PER_MODE_INDEX * oversample.max(1) * kmax + 1).max(3)
            })
            .collect();
        let grid = Arc::new(Grid::uniform(&domain, &nodes)?);
        EigenBasis::new(domain, n_modes, grid)
    }

    /// The same modes sampled on a grid refined by an integer factor per axis.
    pub fn refined(&self, factor: usize) -> Result<Arc<Self>> {
        let nodes: Vec<usize> = self
            .grid
            .nodes_per_axis()
            .iter()
            .map(|&n| (n - 1) * factor.max(1) + 1)
            .collect();
        let grid = Arc::new(Grid::uniform(&self.domain, &nodes)?);
        EigenBasis::from_modes(self.domain, self.modes.clone(), grid)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn eigenvalue(&self, i: usize) -> f64 {
        self.modes[i].eigenvalue
    }

    pub fn eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.modes.iter().map(|m| m.eigenvalue)
    }

    /// Nodal samples of `φ_i` on every grid node (zeros on the boundary).
    pub fn mode_field(&self, i: usize) -> GridField {
        let n_int = self.grid.interior().len();
        let mut values = vec![0.0; self.grid.len()];
        for (k, &n) in self.grid.interior().iter().enumerate() {
            values[n] = self.samples[i * n_int + k];
        }
        GridField::from_parts(self.grid.clone(), values)
    }

    fn check_grid(&self, f: &GridField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, f.grid()) || *self.grid == **f.grid() {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "field sampled on {:?} nodes, basis on {:?}",
                f.grid().nodes_per_axis(),
                self.grid.nodes_per_axis()
            )))
        }
    }

    /// Quadrature projections `∫ f φ_i dx` for `i < n`, reading interior
    /// nodes only.
    pub(crate) fn project(&self, values: &[f64], n: usize) -> Vec<f64> {
        let interior = self.grid.interior();
        let n_int = interior.len();
        let f: Vec<f64> = interior.iter().map(|&k| values[k]).collect();
        self.weighted
            .chunks(n_int)
            .take(n)
            .map(|row| row.iter().zip(&f).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Coefficients `u_i = ∫ f φ_i dx` by interior trapezoid quadrature.
    pub fn analyze(self: &Arc<Self>, f: &GridField) -> Result<SpectralField> {
        self.check_grid(f)?;
        let coeffs = self.project(f.values(), self.len());
        SpectralField::new(self.clone(), coeffs)
    }

    /// Nodal values of `Σ c_i φ_i`; boundary nodes are exactly zero.
    pub fn synthesize(&self, c: &SpectralField) -> Result<GridField> {
        if c.len() > self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: c.len(),
            });
        }
        Ok(GridField::from_parts(
            self.grid.clone(),
            self.synthesize_values(c.coeffs()),
        ))
    }

    /// `max_{i,j} |⟨φ_i, φ_j⟩ − δ_ij|` under the grid quadrature.
    pub fn orthonormality_defect(&self) -> f64 {
        let n_int = self.grid.interior().len();
        let mut worst = 0.0f64;
        for (i, wi) in self.weighted.chunks(n_int).enumerate() {
            for (j, sj) in self.samples.chunks(n_int).enumerate().skip(i) {
                let dot: f64 = wi.iter().zip(sj).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    pub(crate) fn synthesize_values(&self, coeffs: &[f64]) -> Vec<f64> {
        let interior = self.grid.interior();
        let n_int = interior.len();
        let mut acc = vec![0.0; n_int];
        for (row, &c) in self.samples.chunks(n_int).zip(coeffs) {
            if c != 0.0 {
                for (a, &phi) in acc.iter_mut().zip(row) {
                    *a += c * phi;
                }
            }
        }
        let mut values = vec![0.0; self.grid.len()];
        for (&n, a) in interior.iter().zip(acc) {
            values[n] = a;
        }
        values
    }
}

fn lowest_modes(lengths: &[f64], n: usize) -> Vec<Mode> {
    let eig = |idx: &[usize]| -> f64 {
        idx.iter()
            .zip(lengths)
            .map(|(&k, &l)| (k as f64 * PI / l).powi(2))
            .sum()
    };
    let mut cands: Vec<Mode> = match lengths.len() {
        1 => (1..=n)
            .map(|k| Mode {
                index: vec![k],
                eigenvalue: eig(&[k]),
            })
            .collect(),
        _ => {
            let mut v = Vec::with_capacity(n * n);
            for j in 1..=n {
                for k in 1..=n {
                    v.push(Mode {
                        index: vec![j, k],
                        eigenvalue: eig(&[j, k]),
                    });
                }
            }
            v
        }
    };
    sort_modes(&mut cands);
    cands.truncate(n);
    cands
}

fn tensor_modes(lengths: &[f64], counts: &[usize]) -> Vec<Mode> {
    let mut modes = vec![Vec::new()];
    for &c in counts {
        modes = modes
            .into_iter()
            .flat_map(|idx: Vec<usize>| {
                (1..=c).map(move |k| {
                    let mut next = idx.clone();
                    next.push(k);
                    next
                })
            })
            .collect();
    }
    let mut modes: Vec<Mode> = modes
        .into_iter()
        .map(|index| Mode {
            eigenvalue: index
                .iter()
                .zip(lengths)
                .map(|(&k, &l)| (k as f64 * PI / l).powi(2))
                .sum(),
            index,
        })
        .collect();
    sort_modes(&mut modes);
    modes
}

fn sort_modes(cands: &mut [Mode]) {
    cands.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
    // eigenvalues equal up to rounding form one tie group, ordered by index
    let mut start = 0;
    while start < cands.len() {
        let base = cands[start].eigenvalue;
        let mut end = start + 1;
        while end < cands.len() && cands[end].eigenvalue - base <= 1e-12 * base {
            end += 1;
        }
        cands[start..end].sort_by(|a, b| a.index.cmp(&b.index));
        start = end;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_interval(n_modes: usize) -> Arc<EigenBasis> {
        EigenBasis::with_resolution(Domain::interval(PI).unwrap(), n_modes, 1).unwrap()
    }

    #[test]
    fn weights_sum_to_measure() {
        let d = Domain::rectangle(2.0, 0.7).unwrap();
        let g = Grid::uniform(&d, &[17, 9]).unwrap();
        let total: f64 = g.weights().iter().sum();
        assert!((total - d.measure()).abs() <= 1e-12 * d.measure());
        assert_eq!(g.interior().len(), 15 * 7);
    }

    #[test]
    fn first_interval_mode() {
        let b = unit_interval(4);
        assert!((b.eigenvalue(0) - 1.0).abs() < 1e-15);
        let phi = b.mode_field(0);
        for (n, &v) in phi.values().iter().enumerate() {
            let x = b.grid().coords(n)[0];
            assert!((v - (2.0 / PI).sqrt() * x.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn square_ordering_and_ties() {
        let d = Domain::rectangle(PI, PI).unwrap();
        let b = EigenBasis::with_resolution(d, 6, 1).unwrap();
        let idx: Vec<Vec<usize>> = b.modes().iter().map(|m| m.index.clone()).collect();
        assert_eq!(
            idx,
            vec![
                vec![1, 1],
                vec![1, 2],
                vec![2, 1],
                vec![2, 2],
                vec![1, 3],
                vec![3, 1]
            ]
        );
        assert_eq!(b.eigenvalue(0), 2.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Domain::interval(0.0).is_err());
        assert!(Domain::rectangle(1.0, -2.0).is_err());
        let d = Domain::interval(1.0).unwrap();
        let g = Arc::new(Grid::uniform(&d, &[33]).unwrap());
        assert!(matches!(
            EigenBasis::new(d, 9, g.clone()),
            Err(Error::Unresolved { .. })
        ));
        assert!(EigenBasis::new(d, 8, g.clone()).is_ok());
        assert!(EigenBasis::new(d, 0, g).is_err());
    }

    #[test]
    fn boundary_samples_are_exact_zero() {
        let b = EigenBasis::with_resolution(Domain::rectangle(1.0, 2.0).unwrap(), 10, 1).unwrap();
        for i in 0..b.len() {
            let f = b.mode_field(i);
            for n in 0..b.grid().len() {
                if b.grid().is_boundary(n) {
                    assert_eq!(f.values()[n], 0.0);
                }
            }
        }
    }

    #[test]
    fn grid_mismatch_detected() {
        let b = unit_interval(4);
        let other = Arc::new(Grid::uniform(b.domain(), &[40]).unwrap());
        let f = GridField::zeros(other);
        assert!(matches!(b.analyze(&f), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn tensor_set_is_full_box() {
        let d = Domain::rectangle(PI, PI).unwrap();
        let b = EigenBasis::tensor_with_resolution(d, &[3, 2], 1).unwrap();
        assert_eq!(b.len(), 6);
        assert_eq!(b.grid().nodes_per_axis(), vec![13, 9]);
        assert!(b.modes().iter().all(|m| m.index[0] <= 3 && m.index[1] <= 2));
        assert!(b
            .modes()
            .windows(2)
            .all(|w| w[1].eigenvalue >= w[0].eigenvalue));
        // lowest-N would take (1,3) before (3,2)
        assert_eq!(b.modes().last().unwrap().index, vec![3, 2]);
        assert!(b.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn tensor_rejects_bad_counts() {
        let d = Domain::rectangle(1.0, 1.0).unwrap();
        assert!(EigenBasis::tensor_with_resolution(d, &[3], 1).is_err());
        assert!(EigenBasis::tensor_with_resolution(d, &[3, 0], 1).is_err());
        let coarse = Arc::new(Grid::uniform(&d, &[9, 9]).unwrap());
        assert!(matches!(
            EigenBasis::tensor(d, &[3, 3], coarse),
            Err(Error::Unresolved { .. })
        ));
    }
}
