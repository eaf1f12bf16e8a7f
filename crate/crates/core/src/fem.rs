//! P1 finite elements in trait, implicit Euler in time, with the selected-output
//! feedback `rho(t) = int_0^t int s n` and the birth-rate switch at the threshold.
//!
//! The output counter is accumulated with the rule matched to implicit Euler,
//! `rho_{n+1} = rho_n + dt * int s n_{n+1}`. With that pairing the column sums of the
//! step matrix reproduce `Delta(mass + rho) = dt (Q - d) mass_{n+1}` exactly, so the
//! balance identity of the continuous model holds to round-off.

use crate::error::{Error, Result};
use crate::field::{realize_initial, weighted_mass, Field, Grid};
use crate::model::{InitialData, ModelParams, SelectionProfile};
use crate::roots;
use crate::tridiag::{Tridiagonal, TridiagonalLu};

/// Which mass matrix the time stepping uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MassMatrix {
    #[default]
    Consistent,
    /// Row-sum lumping of both the mass and the selection matrix. Keeps `1^T M` and
    /// `1^T S`, so mass, output and the balance identity are unchanged, and the step
    /// matrix is an M-matrix for every `dt`.
    Lumped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FemConfig {
    pub grid: Grid,
    pub dt: f64,
    pub t_max: f64,
    pub snapshot_times: Vec<f64>,
    pub stop_at_threshold: bool,
    pub mass: MassMatrix,
}

impl FemConfig {
    pub fn new(grid: Grid, dt: f64, t_max: f64) -> Self {
        Self {
            grid,
            dt,
            t_max,
            snapshot_times: Vec::new(),
            stop_at_threshold: false,
            mass: MassMatrix::Consistent,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(crate::error::invalid("dt", "time step must be positive"));
        }
        if !(self.t_max > 0.0) {
            return Err(crate::error::invalid("t_max", "horizon must be positive"));
        }
        if self.snapshot_times.iter().any(|t| !(*t >= 0.0)) {
            return Err(crate::error::invalid(
                "snapshot_times",
                "snapshot times must be nonnegative",
            ));
        }
        Ok(())
    }
}

/// Branch of the birth rate that drove an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QRegime {
    BeforeThreshold,
    AfterThreshold,
}

impl QRegime {
    pub fn index(self) -> u8 {
        match self {
            QRegime::BeforeThreshold => 0,
            QRegime::AfterThreshold => 1,
        }
    }

    pub fn rate(self, params: &ModelParams) -> f64 {
        match self {
            QRegime::BeforeThreshold => params.q0,
            QRegime::AfterThreshold => params.q1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord {
    pub times: Vec<f64>,
    pub rho_series: Vec<f64>,
    pub mass_series: Vec<f64>,
    /// Regime of the interval ending at `times[i]` (the first entry repeats the second).
    pub q_regime_series: Vec<QRegime>,
    pub threshold_time: Option<f64>,
    pub snapshots: Vec<(f64, Field)>,
    /// Smallest nodal value seen at any recorded time.
    pub min_value: f64,
    pub final_state: Field,
}

impl SimulationRecord {
    pub fn final_rho(&self) -> f64 {
        *self.rho_series.last().unwrap()
    }

    /// `rho` at time `t`, linear between recorded points.
    pub fn rho_at(&self, t: f64) -> f64 {
        interpolate(&self.times, &self.rho_series, t)
    }

    pub fn snapshot_at(&self, t: f64) -> Option<&Field> {
        self.snapshots
            .iter()
            .find(|(ts, _)| (ts - t).abs() <= 1e-9 * t.abs().max(1.0))
            .map(|(_, f)| f)
    }

    pub fn is_rho_nondecreasing(&self) -> bool {
        self.rho_series.windows(2).all(|w| w[1] >= w[0])
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let idx = xs.partition_point(|v| *v < x);
    if idx >= xs.len() {
        return ys[ys.len() - 1];
    }
    let (x0, x1) = (xs[idx - 1], xs[idx]);
    let w = if x1 > x0 { (x - x0) / (x1 - x0) } else { 1.0 };
    ys[idx - 1] + w * (ys[idx] - ys[idx - 1])
}

/// Mass `M`, stiffness `K` (already multiplied by `mu`) and selection `S` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrices {
    pub mass: Tridiagonal,
    pub stiffness: Tridiagonal,
    pub selection: Tridiagonal,
    pub profile: SelectionProfile,
}

impl OperatorMatrices {
    pub fn lumped(&self) -> OperatorMatrices {
        OperatorMatrices {
            mass: self.mass.lumped(),
            stiffness: self.stiffness.clone(),
            selection: self.selection.lumped(),
            profile: self.profile.clone(),
        }
    }

    /// `M + dt (K + S + (d - q) M)`.
    pub fn step_matrix(&self, q: f64, d: f64, dt: f64) -> Tridiagonal {
        self.mass
            .scaled(1.0 + dt * (d - q))
            .add_scaled(dt, &self.stiffness)
            .add_scaled(dt, &self.selection)
    }
}

/// Assembles the P1 matrices. Cells cut by a profile breakpoint are split so the
/// selection matrix is exact (Simpson's rule on each sub-piece).
pub fn assemble(grid: Grid, params: &ModelParams, s: &SelectionProfile) -> Result<OperatorMatrices> {
    params.validate()?;
    if s.sup() > 0.0 {
        let (lo, hi) = s.support();
        grid.check_resolves(hi.min(1.0) - lo.max(0.0))?;
    }
    let n = grid.n_nodes();
    let h = grid.h();
    let mut mass = Tridiagonal::zeros(n);
    let mut stiffness = Tridiagonal::zeros(n);
    let mut selection = Tridiagonal::zeros(n);
    for cell in 0..grid.n_cells() {
        let (i, j) = (cell, cell + 1);
        mass.add(i, i, h / 3.0);
        mass.add(j, j, h / 3.0);
        mass.add(i, j, h / 6.0);
        mass.add(j, i, h / 6.0);
        let k = params.mu / h;
        stiffness.add(i, i, k);
        stiffness.add(j, j, k);
        stiffness.add(i, j, -k);
        stiffness.add(j, i, -k);
    }
    for (a, b, v) in s.pieces() {
        let (a, b) = (a.max(0.0), b.min(1.0));
        if v == 0.0 || b <= a {
            continue;
        }
        for cell in grid.cell_of(a)..=grid.cell_of(b) {
            let xl = grid.node(cell);
            let lo = xl.max(a);
            let hi = (xl + h).min(b);
            if hi <= lo {
                continue;
            }
            let phi = |x: f64| [(xl + h - x) / h, (x - xl) / h];
            let pts = [lo, 0.5 * (lo + hi), hi];
            let wts = [1.0, 4.0, 1.0];
            let mut local = [[0.0; 2]; 2];
            for (x, w) in pts.iter().zip(wts) {
                let p = phi(*x);
                for (r, row) in local.iter_mut().enumerate() {
                    for (c, v) in row.iter_mut().enumerate() {
                        *v += w * p[r] * p[c];
                    }
                }
            }
            let scale = v * (hi - lo) / 6.0;
            for (r, row) in local.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    selection.add(cell + r, cell + c, scale * v);
                }
            }
        }
    }
    Ok(OperatorMatrices {
        mass,
        stiffness,
        selection,
        profile: s.clone(),
    })
}

/// One implicit Euler step with the birth rate frozen at `Q(rho)`.
pub fn step(
    state: &Field,
    rho: f64,
    params: &ModelParams,
    matrices: &OperatorMatrices,
    dt: f64,
) -> Result<(Field, f64)> {
    let q = params.birth_rate(rho);
    let lu = matrices.step_matrix(q, params.d, dt).factor()?;
    Ok(apply_step(state, rho, matrices, &lu, dt))
}

fn apply_step(
    state: &Field,
    rho: f64,
    matrices: &OperatorMatrices,
    lu: &TridiagonalLu,
    dt: f64,
) -> (Field, f64) {
    let rhs = matrices.mass.mul_vec(state.values());
    let next = Field::from_vec_unchecked(state.grid(), lu.solve(&rhs));
    let rho_next = rho + dt * weighted_mass(&matrices.profile, &next);
    (next, rho_next)
}

/// Incremental driver behind [`run`]; keeps the state so a horizon can be extended
/// without recomputing the past.
pub struct Simulation {
    params: ModelParams,
    matrices: OperatorMatrices,
    dt: f64,
    snapshot_times: Vec<f64>,
    state: Field,
    rho: f64,
    t: f64,
    regular_steps: u64,
    total_steps: usize,
    regime: QRegime,
    lu_before: TridiagonalLu,
    lu_after: TridiagonalLu,
    record: SimulationRecord,
}

impl Simulation {
    pub fn new(initial: &InitialData, params: &ModelParams, config: &FemConfig) -> Result<Self> {
        config.validate()?;
        let state = realize_initial(initial, config.grid)?;
        let consistent = assemble(config.grid, params, &params.profile())?;
        let matrices = match config.mass {
            MassMatrix::Consistent => consistent,
            MassMatrix::Lumped => consistent.lumped(),
        };
        let lu_before = matrices.step_matrix(params.q0, params.d, config.dt).factor()?;
        let lu_after = matrices.step_matrix(params.q1, params.d, config.dt).factor()?;
        let mut snapshot_times = config.snapshot_times.clone();
        snapshot_times.sort_by(f64::total_cmp);
        let record = SimulationRecord {
            times: vec![0.0],
            rho_series: vec![0.0],
            mass_series: vec![state.mass()],
            q_regime_series: vec![QRegime::BeforeThreshold],
            threshold_time: None,
            snapshots: Vec::new(),
            min_value: state.min(),
            final_state: state.clone(),
        };
        let mut sim = Self {
            params: *params,
            matrices,
            dt: config.dt,
            snapshot_times,
            state,
            rho: 0.0,
            t: 0.0,
            regular_steps: 0,
            total_steps: 0,
            regime: QRegime::BeforeThreshold,
            lu_before,
            lu_after,
            record,
        };
        sim.take_snapshot_if_due();
        Ok(sim)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn state(&self) -> &Field {
        &self.state
    }

    pub fn threshold_time(&self) -> Option<f64> {
        self.record.threshold_time
    }

    pub fn record(&self) -> &SimulationRecord {
        &self.record
    }

    pub fn into_record(mut self) -> SimulationRecord {
        self.record.final_state = self.state;
        self.record
    }

    fn take_snapshot_if_due(&mut self) {
        let t = self.t;
        let due = self
            .snapshot_times
            .iter()
            .any(|s| (s - t).abs() <= 1e-12 * s.abs().max(1.0));
        let taken = self.record.snapshot_at(t).is_some();
        if due && !taken {
            self.record.snapshots.push((t, self.state.clone()));
        }
    }

    fn next_stop(&self, t_end: f64) -> f64 {
        let grid_next = (self.regular_steps + 1) as f64 * self.dt;
        let mut next = grid_next.min(t_end);
        for &s in &self.snapshot_times {
            if s > self.t * (1.0 + 1e-15) + 1e-300 && s < next {
                next = s;
            }
        }
        next
    }

    fn push(&mut self) {
        self.record.times.push(self.t);
        self.record.rho_series.push(self.rho);
        self.record.mass_series.push(self.state.mass());
        self.record.q_regime_series.push(self.regime);
        self.record.min_value = self.record.min_value.min(self.state.min());
        self.take_snapshot_if_due();
    }

    /// Advances to `t_end`; with `stop_at_threshold` returns early at the crossing.
    pub fn advance_until(&mut self, t_end: f64, stop_at_threshold: bool) -> Result<()> {
        while self.t < t_end * (1.0 - 1e-14) {
            if stop_at_threshold && self.record.threshold_time.is_some() {
                return Ok(());
            }
            let target = self.next_stop(t_end);
            let tau = target - self.t;
            let regular = (tau - self.dt).abs() <= 1e-12 * self.dt;
            let q = self.regime.rate(&self.params);
            let (next, rho_next) = if regular {
                let lu = match self.regime {
                    QRegime::BeforeThreshold => &self.lu_before,
                    QRegime::AfterThreshold => &self.lu_after,
                };
                apply_step(&self.state, self.rho, &self.matrices, lu, tau)
            } else {
                let lu = self.matrices.step_matrix(q, self.params.d, tau).factor()?;
                apply_step(&self.state, self.rho, &self.matrices, &lu, tau)
            };
            self.total_steps += 1;
            if next.values().iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState {
                    step: self.total_steps,
                    t: target,
                });
            }
            if self.regime == QRegime::BeforeThreshold && rho_next >= self.params.rho0 {
                let tau_star = self.crossing_substep(tau, q, rho_next)?;
                let lu = self.matrices.step_matrix(q, self.params.d, tau_star).factor()?;
                let (at_cross, rho_cross) =
                    apply_step(&self.state, self.rho, &self.matrices, &lu, tau_star);
                self.state = at_cross;
                self.rho = rho_cross;
                self.t += tau_star;
                if (self.t - target).abs() <= 1e-12 * self.dt {
                    self.t = target;
                    if target == (self.regular_steps + 1) as f64 * self.dt {
                        self.regular_steps += 1;
                    }
                }
                self.record.threshold_time = Some(self.t);
                self.push();
                self.regime = QRegime::AfterThreshold;
                continue;
            }
            self.state = next;
            self.rho = rho_next;
            self.t = target;
            if target == (self.regular_steps + 1) as f64 * self.dt {
                self.regular_steps += 1;
            }
            self.push();
        }
        Ok(())
    }

    /// Length of the implicit Euler sub-step that lands `rho` on the threshold.
    fn crossing_substep(&self, tau: f64, q: f64, rho_full: f64) -> Result<f64> {
        let rho0 = self.params.rho0;
        if rho_full == rho0 {
            return Ok(tau);
        }
        let g = |sub: f64| -> f64 {
            if sub <= 0.0 {
                return self.rho - rho0;
            }
            match self.matrices.step_matrix(q, self.params.d, sub).factor() {
                Ok(lu) => apply_step(&self.state, self.rho, &self.matrices, &lu, sub).1 - rho0,
                Err(_) => f64::NAN,
            }
        };
        roots::illinois(g, 0.0, tau, 1e-15 * tau, 1e-14 * rho0)
    }
}

/// Runs the model from `initial` over `[0, config.t_max]`.
pub fn run(initial: &InitialData, params: &ModelParams, config: &FemConfig) -> Result<SimulationRecord> {
    let mut sim = Simulation::new(initial, params, config)?;
    sim.advance_until(config.t_max, config.stop_at_threshold)?;
    Ok(sim.into_record())
}

/// Quadrature rule for the time integral in the balance diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BalanceRule {
    /// `dt (Q - d) mass_{n+1}`, the rule the solver's output counter uses.
    Matched,
    /// `dt (Q - d) (mass_n + mass_{n+1}) / 2`.
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceResidual {
    /// Largest per-interval residual.
    pub max_step: f64,
    /// Largest per-interval residual divided by the interval length.
    pub max_rate: f64,
}

/// Discrete form of `[mass + rho]_{t1}^{t2} = int (Q - d) mass dt`.
pub fn discrete_balance_residual(
    record: &SimulationRecord,
    params: &ModelParams,
    rule: BalanceRule,
) -> BalanceResidual {
    let mut out = BalanceResidual {
        max_step: 0.0,
        max_rate: 0.0,
    };
    for i in 1..record.times.len() {
        let dt = record.times[i] - record.times[i - 1];
        if dt <= 0.0 {
            continue;
        }
        let rate = record.q_regime_series[i].rate(params) - params.d;
        let m = match rule {
            BalanceRule::Matched => record.mass_series[i],
            BalanceRule::Trapezoid => 0.5 * (record.mass_series[i] + record.mass_series[i - 1]),
        };
        let change = (record.mass_series[i] + record.rho_series[i])
            - (record.mass_series[i - 1] + record.rho_series[i - 1]);
        let r = (change - dt * rate * m).abs();
        out.max_step = out.max_step.max(r);
        out.max_rate = out.max_rate.max(r / dt);
    }
    out
}

/// Horizon policy of [`time_to_threshold_numeric`].
pub const THRESHOLD_START_HORIZON: f64 = 8.0;
pub const THRESHOLD_HORIZON_CAP: f64 = 8192.0;

/// Time at which `rho` reaches `rho0`, doubling the horizon until it does.
pub fn time_to_threshold_numeric(
    initial: &InitialData,
    params: &ModelParams,
    grid: Grid,
    dt: f64,
) -> Result<f64> {
    time_to_threshold_with(initial, params, &FemConfig::new(grid, dt, THRESHOLD_START_HORIZON))
}

/// As [`time_to_threshold_numeric`] with full control over the configuration;
/// `config.t_max` is the first horizon tried.
pub fn time_to_threshold_with(
    initial: &InitialData,
    params: &ModelParams,
    config: &FemConfig,
) -> Result<f64> {
    let mut sim = Simulation::new(initial, params, config)?;
    let mut horizon = config.t_max;
    loop {
        sim.advance_until(horizon, true)?;
        if let Some(t) = sim.threshold_time() {
            return Ok(t);
        }
        // Without net growth mass + rho cannot increase, so it bounds rho forever.
        if params.b() <= 0.0 && sim.state().mass() + sim.rho() < params.rho0 {
            return Err(Error::ThresholdUnreachable {
                rho0: params.rho0,
                horizon,
            });
        }
        if horizon >= THRESHOLD_HORIZON_CAP {
            return Err(Error::ThresholdUnreachable {
                rho0: params.rho0,
                horizon,
            });
        }
        horizon *= 2.0;
    }
}

/// Richardson extrapolation (first order in time) of the threshold time from runs
/// at `dt` and `dt / 2`.
pub fn time_to_threshold_extrapolated(
    initial: &InitialData,
    params: &ModelParams,
    config: &FemConfig,
) -> Result<f64> {
    let coarse = time_to_threshold_with(initial, params, config)?;
    let mut half = config.clone();
    half.dt *= 0.5;
    let fine = time_to_threshold_with(initial, params, &half)?;
    Ok(2.0 * fine - coarse)
}
