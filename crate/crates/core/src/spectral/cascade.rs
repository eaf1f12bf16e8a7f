use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::asymptotic::v0_value;
use crate::error::Result;
use crate::field::{inner_product, realize_initial, Field, Grid};
use crate::model::{InitialData, SelectionProfile};

/// `int_a^b cos(m pi x) dx`
fn cos_integral(m: i64, a: f64, b: f64) -> f64 {
    if m == 0 {
        b - a
    } else {
        let mp = m as f64 * PI;
        ((mp * b).sin() - (mp * a).sin()) / mp
    }
}

/// `M_ik = <s v_i, v_k>` for the homogeneous Neumann modes `v_0 = 1`,
/// `v_k = sqrt(2) cos(k pi x)`, integrated in closed form piece by piece.
pub fn overlap_matrix(s: &SelectionProfile, count: usize) -> DMatrix<f64> {
    let norm = |k: usize| if k == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
    DMatrix::from_fn(count, count, |i, k| {
        let (ii, kk) = (i as i64, k as i64);
        s.pieces()
            .map(|(a, b, v)| {
                let (a, b) = (a.max(0.0), b.min(1.0));
                if b <= a {
                    return 0.0;
                }
                v * norm(i) * norm(k) * 0.5 * (cos_integral(ii - kk, a, b) + cos_integral(ii + kk, a, b))
            })
            .sum()
    })
}

/// `<n_I, v_k>` for `k < count`; exact for constants, grid inner products otherwise.
pub fn cosine_mode_coefficients(initial: &InitialData, grid: Grid, count: usize) -> Result<Vec<f64>> {
    if let InitialData::Constant(c) = *initial {
        let mut out = vec![0.0; count];
        out[0] = c;
        return Ok(out);
    }
    if let InitialData::Dirac(z) = *initial {
        return Ok((0..count).map(|k| v0_value(k, z)).collect());
    }
    let field = realize_initial(initial, grid)?;
    (0..count)
        .map(|k| inner_product(&field, &Field::from_fn(grid, |x| v0_value(k, x))))
        .collect()
}

/// Coefficients `gamma_{j,k}(t)` of the cascade on the requested times.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeSolution {
    pub times: Vec<f64>,
    /// `gamma[j][i][k]` at `times[i]`.
    pub gamma: Vec<Vec<Vec<f64>>>,
}

impl CascadeSolution {
    /// `|N_j(t_i)|_{L2}` (the modes are orthonormal).
    pub fn norm(&self, j: usize, i: usize) -> f64 {
        self.gamma[j][i].iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// Solves `G_j' + diag(lambda) G_j = (rate I - M) G_{j-1}`, `G_j(0) = 0` for `j >= 1`,
/// `G_0(0) = initial_modes`, with `lambda_k = (k pi)^2` (time measured in units of
/// `1/mu`). The block lower-triangular system is propagated with its exact matrix
/// exponential between consecutive requested times.
pub fn modal_cascade(
    initial_modes: &[f64],
    m: &DMatrix<f64>,
    rate: f64,
    order: usize,
    times: &[f64],
) -> CascadeSolution {
    let kc = initial_modes.len();
    let dim = (order + 1) * kc;
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    for j in 0..=order {
        for k in 0..kc {
            a[(j * kc + k, j * kc + k)] = -(k as f64 * PI).powi(2);
        }
        if j > 0 {
            for r in 0..kc {
                for c in 0..kc {
                    let id = if r == c { rate } else { 0.0 };
                    a[(j * kc + r, (j - 1) * kc + c)] = id - m[(r, c)];
                }
            }
        }
    }
    let mut y = DVector::<f64>::zeros(dim);
    for k in 0..kc {
        y[k] = initial_modes[k];
    }
    let mut cache: HashMap<u64, DMatrix<f64>> = HashMap::new();
    let mut gamma = vec![Vec::with_capacity(times.len()); order + 1];
    let mut t_prev = 0.0;
    for &t in times {
        let dt = t - t_prev;
        if dt != 0.0 {
            let prop = cache
                .entry(dt.to_bits())
                .or_insert_with(|| (&a * dt).exp());
            y = &*prop * &y;
        }
        t_prev = t;
        for (j, g) in gamma.iter_mut().enumerate() {
            g.push(y.rows(j * kc, kc).iter().cloned().collect());
        }
    }
    CascadeSolution {
        times: times.to_vec(),
        gamma,
    }
}
