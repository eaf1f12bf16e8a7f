//! Uniform grids on `[0, 1]`, nodal fields and the quadratures shared by every module.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::model::{InitialData, SelectionProfile};

/// Minimum number of cells that must fall inside the selection window.
pub const MIN_WINDOW_CELLS: f64 = 4.0;

/// `n_cells` equal cells on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n_cells: usize,
}

impl Grid {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(invalid("n_cells", "need at least one cell"));
        }
        Ok(Self { n_cells })
    }

    /// A grid that puts at least [`MIN_WINDOW_CELLS`] cells inside `[0, eps]`.
    pub fn resolving(n_cells: usize, eps: f64) -> Result<Self> {
        let grid = Self::new(n_cells)?;
        grid.check_resolves(eps)?;
        Ok(grid)
    }

    pub fn check_resolves(&self, eps: f64) -> Result<()> {
        let cells = eps * self.n_cells as f64;
        // Tolerate the rounding in e.g. 0.01 * 400.
        if cells < MIN_WINDOW_CELLS * (1.0 - 1e-12) {
            return Err(Error::UnresolvedWindow { eps, cells });
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.n_cells as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.node(i)).collect()
    }

    /// Trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n_cells {
            0.5 * self.h()
        } else {
            self.h()
        }
    }

    /// Index of the cell containing `x` (the last cell owns `x = 1`).
    pub fn cell_of(&self, x: f64) -> usize {
        ((x * self.n_cells as f64).floor().max(0.0) as usize).min(self.n_cells - 1)
    }
}

/// Nodal values on a [`Grid`], read as the continuous piecewise-linear interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::GridMismatch {
                left: grid.n_cells(),
                right: values.len().saturating_sub(1),
            });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteField { node });
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_nodes());
        Self { grid, values }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n_nodes()).map(|i| f(grid.node(i))).collect();
        Self { grid, values }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.n_nodes()],
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Trapezoid approximation of `int f dx` (exact for the interpolant).
    pub fn mass(&self) -> f64 {
        trapezoid(&self.values, self.grid.h())
    }

    /// Discrete L2 norm, consistent with [`inner_product`].
    pub fn norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        trapezoid(&sq, self.grid.h()).sqrt()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Value of the piecewise-linear interpolant at `x` in `[0, 1]`.
    pub fn value_at(&self, x: f64) -> f64 {
        let i = self.grid.cell_of(x);
        let xl = self.grid.node(i);
        let w = ((x - xl) / self.grid.h()).clamp(0.0, 1.0);
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// Exact integral of the piecewise-linear interpolant over `[a, b]`, clipped to `[0, 1]`.
    pub fn integral_over(&self, a: f64, b: f64) -> f64 {
        let a = a.max(0.0);
        let b = b.min(1.0);
        if b <= a {
            return 0.0;
        }
        let first = self.grid.cell_of(a);
        let last = self.grid.cell_of(b);
        let mut total = 0.0;
        for cell in first..=last {
            let lo = self.grid.node(cell).max(a);
            let hi = self.grid.node(cell + 1).min(b);
            if hi > lo {
                total += 0.5 * (hi - lo) * (self.value_at(lo) + self.value_at(hi));
            }
        }
        total
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Field) -> Result<Field> {
        same_grid(self, other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(Field::from_vec_unchecked(self.grid, values))
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field::from_vec_unchecked(self.grid, self.values.iter().map(|v| c * v).collect())
    }

    /// Discrete L2 distance.
    pub fn distance(&self, other: &Field) -> Result<f64> {
        Ok(self.add_scaled(-1.0, other)?.norm())
    }
}

fn same_grid(f: &Field, g: &Field) -> Result<()> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch {
            left: f.grid.n_cells(),
            right: g.grid.n_cells(),
        });
    }
    Ok(())
}

/// Composite trapezoid rule for equispaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// Trapezoid approximation of `int f g dx`.
pub fn inner_product(f: &Field, g: &Field) -> Result<f64> {
    same_grid(f, g)?;
    let prod: Vec<f64> = f.values.iter().zip(&g.values).map(|(a, b)| a * b).collect();
    Ok(trapezoid(&prod, f.grid.h()))
}

/// `int s f dx` with cells split at the profile breakpoints, exact for the
/// piecewise-linear interpolant of `f`.
pub fn weighted_mass(s: &SelectionProfile, f: &Field) -> f64 {
    s.pieces()
        .filter(|&(_, _, v)| v != 0.0)
        .map(|(a, b, v)| v * f.integral_over(a, b))
        .sum()
}

/// Nodal realization of the initial datum.
pub fn realize_initial(data: &InitialData, grid: Grid) -> Result<Field> {
    data.validate()?;
    match *data {
        InitialData::Samples(ref f) => {
            if f.grid() != grid {
                return Err(Error::GridMismatch {
                    left: f.grid().n_cells(),
                    right: grid.n_cells(),
                });
            }
            Ok(f.clone())
        }
        InitialData::Constant(c) => Ok(Field::constant(grid, c)),
        InitialData::Random { seed, lower, upper } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values = (0..grid.n_nodes())
                .map(|_| rng.gen_range(lower..upper))
                .collect();
            Ok(Field::from_vec_unchecked(grid, values))
        }
        InitialData::Dirac(z) => {
            let i = (z * grid.n_cells() as f64).round() as usize;
            let mut values = vec![0.0; grid.n_nodes()];
            values[i] = 1.0 / grid.weight(i);
            Ok(Field::from_vec_unchecked(grid, values))
        }
    }
}
