//! Model coefficients, the piecewise-constant selection profile and initial data.

use crate::error::{invalid, Result};
use crate::field::Field;

/// Trait space on which a computation lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainSpec {
    /// The unit interval with homogeneous Neumann conditions. Used by fem and spectral.
    BoundedUnit,
    /// The whole real line; only the heat-kernel bounds use it.
    WholeLine,
}

/// Scalar coefficients of the model.
///
/// `q0`/`q1` are the birth rates before/after the selected output reaches `rho0`,
/// `d` the death rate, `mu` the mutation (diffusion) rate and `eps` the selection
/// half-width. The growth rate `b = q0 - d` is only available through [`ModelParams::b`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub q0: f64,
    pub q1: f64,
    pub d: f64,
    pub mu: f64,
    pub eps: f64,
    pub rho0: f64,
    pub s0: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            q0: 2.0,
            q1: 0.0,
            d: 0.0,
            mu: 1.0,
            eps: 0.1,
            rho0: 1.0,
            s0: 1.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("q0", self.q0),
            ("q1", self.q1),
            ("d", self.d),
            ("mu", self.mu),
            ("eps", self.eps),
            ("rho0", self.rho0),
            ("s0", self.s0),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(invalid(name, format!("{v} is not finite")));
            }
        }
        if self.d < 0.0 {
            return Err(invalid("d", "death rate must be nonnegative"));
        }
        if self.mu <= 0.0 {
            return Err(invalid("mu", "mutation rate must be positive"));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(invalid("eps", format!("{} is outside (0, 1]", self.eps)));
        }
        if self.rho0 <= 0.0 {
            return Err(invalid("rho0", "threshold must be positive"));
        }
        if self.s0 < 0.0 {
            return Err(invalid("s0", "selection amplitude must be nonnegative"));
        }
        Ok(())
    }

    /// Net growth rate before the threshold, `q0 - d`.
    pub fn b(&self) -> f64 {
        self.q0 - self.d
    }

    /// Birth rate as a function of the selected output.
    pub fn birth_rate(&self, rho: f64) -> f64 {
        if rho <= self.rho0 {
            self.q0
        } else {
            self.q1
        }
    }

    /// Canonical selection profile on the unit interval: `s0` on `[0, eps]`.
    pub fn profile(&self) -> SelectionProfile {
        SelectionProfile::indicator(self.eps, self.s0)
    }

    /// `int s dx` for the canonical profile.
    pub fn selection_integral(&self) -> f64 {
        self.eps * self.s0
    }
}

/// Piecewise-constant, nonnegative selection function.
///
/// Piece `i` covers `[breakpoints[i], breakpoints[i + 1]]` with amplitude `values[i]`;
/// the function vanishes outside `[breakpoints[0], breakpoints[last]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl SelectionProfile {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 {
            return Err(invalid(
                "breakpoints",
                "need exactly one more breakpoint than values",
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("breakpoints", "must be strictly increasing"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("values", "amplitudes must be finite and nonnegative"));
        }
        Ok(Self { breakpoints, values })
    }

    /// `s0` on `[0, eps]`, zero elsewhere.
    pub fn indicator(eps: f64, s0: f64) -> Self {
        Self {
            breakpoints: vec![0.0, eps],
            values: vec![s0],
        }
    }

    /// `s0` on `[-eps, eps]`, the whole-line window.
    pub fn symmetric_indicator(eps: f64, s0: f64) -> Self {
        Self {
            breakpoints: vec![-eps, eps],
            values: vec![s0],
        }
    }

    /// The identically zero profile.
    pub fn zero() -> Self {
        Self::indicator(1.0, 0.0)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(left, right, value)` for every piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.breakpoints[i], self.breakpoints[i + 1], v))
    }

    /// Right-continuous point evaluation (the value at an interior breakpoint is the
    /// right piece's, the last breakpoint belongs to the last piece).
    pub fn value_at(&self, x: f64) -> f64 {
        let last = self.breakpoints.len() - 1;
        if x < self.breakpoints[0] || x > self.breakpoints[last] {
            return 0.0;
        }
        for (a, b, v) in self.pieces() {
            if x >= a && x < b {
                return v;
            }
        }
        self.values[self.values.len() - 1]
    }

    /// `int_a^b s dx`.
    pub fn integral_over(&self, a: f64, b: f64) -> f64 {
        self.pieces()
            .map(|(l, r, v)| v * (r.min(b) - l.max(a)).max(0.0))
            .sum()
    }

    /// `int s dx` over the whole support.
    pub fn integral(&self) -> f64 {
        self.pieces().map(|(l, r, v)| v * (r - l)).sum()
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Left and right ends of the support.
    pub fn support(&self) -> (f64, f64) {
        (self.breakpoints[0], self.breakpoints[self.breakpoints.len() - 1])
    }

    /// True when the profile is two-piece on the unit interval: `s0` on `[0, eps]`.
    pub fn as_left_indicator(&self) -> Option<(f64, f64)> {
        if self.values.len() == 1 && self.breakpoints[0] == 0.0 && self.breakpoints[1] <= 1.0 {
            Some((self.breakpoints[1], self.values[0]))
        } else {
            None
        }
    }
}

/// Initial population density.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Samples(Field),
    Constant(f64),
    /// i.i.d. uniform node values on `[lower, upper)`, reproducible from `seed`.
    Random { seed: u64, lower: f64, upper: f64 },
    /// Unit point mass at `z`.
    Dirac(f64),
}

impl InitialData {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InitialData::Samples(ref f) => {
                if f.values().iter().any(|v| *v < 0.0) {
                    return Err(invalid("initial", "sampled density must be nonnegative"));
                }
            }
            InitialData::Constant(c) => {
                if !(c.is_finite() && c >= 0.0) {
                    return Err(invalid("init_value", "constant must be finite and nonnegative"));
                }
            }
            InitialData::Random { lower, upper, .. } => {
                if !(lower >= 0.0 && lower < upper && upper.is_finite()) {
                    return Err(invalid("init_lower", "need 0 <= lower < upper"));
                }
            }
            InitialData::Dirac(z) => {
                if !(z > 0.0 && z < 1.0) {
                    return Err(invalid("dirac_z", format!("{z} is outside (0, 1)")));
                }
            }
        }
        Ok(())
    }
}
