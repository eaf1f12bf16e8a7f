//! `simulate`, `spectrum` and `sweep`.

use std::path::PathBuf;

use anyhow::{Context, Result};
use gcselect_core::asymptotics::{t_threshold_large_mu, t_threshold_narrow_eps, t_threshold_small_mu};
use gcselect_core::fem::{self, FemConfig};
use gcselect_core::green::{bounds_bounded, DiracSetup};
use gcselect_core::spectral::{
    eigs_asymptotic, eigs_exact, overlap_matrix, time_to_threshold_spectral, ModalCoefficients,
};
use gcselect_core::{realize_initial, weighted_mass, DomainSpec, InitialData};
use rayon::prelude::*;

use crate::config::{InitKind, RunConfig};
use crate::output::{sci, sci_opt, write_csv};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateReport {
    pub threshold_time: Option<f64>,
    pub files: Vec<PathBuf>,
}

pub fn fem_config(cfg: &RunConfig) -> Result<FemConfig> {
    let mut fc = FemConfig::new(cfg.grid()?, cfg.dt, cfg.t_max);
    fc.snapshot_times = cfg.snapshot_times.clone();
    fc.stop_at_threshold = cfg.stop_at_threshold;
    fc.mass = cfg.mass_matrix;
    Ok(fc)
}

pub fn simulate(cfg: &RunConfig) -> Result<SimulateReport> {
    let fc = fem_config(cfg)?;
    let rec = fem::run(&cfg.initial_data(), &cfg.params, &fc).context("simulation failed")?;
    let mut files = Vec::new();
    let rows = (0..rec.times.len()).map(|i| {
        vec![
            sci(rec.times[i]),
            sci(rec.rho_series[i]),
            sci(rec.mass_series[i]),
            rec.q_regime_series[i].index().to_string(),
        ]
    });
    files.push(write_csv(&cfg.out, "timeseries.csv", &["t", "rho", "mass", "q_regime"], rows)?);
    for (t, field) in &rec.snapshots {
        let grid = field.grid();
        let rows = field
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| vec![sci(grid.node(i)), sci(*v)]);
        files.push(write_csv(&cfg.out, &format!("snapshot_{}.csv", sci(*t)), &["x", "n"], rows)?);
    }
    Ok(SimulateReport {
        threshold_time: rec.threshold_time,
        files,
    })
}

pub fn spectrum(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let grid = cfg.grid()?;
    let exact = eigs_exact(&cfg.params, cfg.modes, grid).context("exact eigenpairs")?;
    let asym = eigs_asymptotic(&cfg.params, cfg.modes, grid).context("asymptotic eigenpairs")?;
    let rows = exact.iter().zip(&asym).map(|(e, a)| {
        vec![
            e.k.to_string(),
            sci(e.lambda),
            sci(a.lambda_eps),
            sci((e.lambda - a.lambda_eps).abs()),
        ]
    });
    let mut files = vec![write_csv(
        &cfg.out,
        "spectrum.csv",
        &["k", "lambda_exact", "lambda_asym", "abs_gap"],
        rows,
    )?];
    for pair in &exact {
        let rows = pair
            .vector
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| vec![sci(grid.node(i)), sci(*v)]);
        files.push(write_csv(&cfg.out, &format!("eigvec_{}.csv", pair.k), &["x", "v"], rows)?);
    }
    Ok(files)
}

/// One row of `sweep_<axis>.csv`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub t_fem: Option<f64>,
    pub t_spectral: Option<f64>,
    pub t_narrow_eps: Option<f64>,
    pub t_small_mu: Option<f64>,
    pub t_large_mu: Option<f64>,
    pub t_l: Option<f64>,
    pub t_u: Option<f64>,
    pub errors: Vec<String>,
}

impl SweepRow {
    fn record<T, E: std::fmt::Display>(&mut self, what: &str, r: std::result::Result<T, E>) -> Option<T> {
        r.map_err(|e| self.errors.push(format!("{what}: {e}"))).ok()
    }

    fn fields(&self) -> Vec<String> {
        vec![
            sci(self.axis_value),
            sci_opt(self.t_fem),
            sci_opt(self.t_spectral),
            sci_opt(self.t_narrow_eps),
            sci_opt(self.t_small_mu),
            sci_opt(self.t_large_mu),
            sci_opt(self.t_l),
            sci_opt(self.t_u),
            self.errors.join("; "),
        ]
    }
}

pub const SWEEP_HEADER: [&str; 9] = [
    "axis_value",
    "t_fem",
    "t_spectral",
    "t_narrow_eps",
    "t_small_mu",
    "t_large_mu",
    "t_l",
    "t_u",
    "errors",
];

/// Every estimate at one axis value. Estimators outside their regime are left empty.
pub fn sweep_point(cfg: &RunConfig, value: f64) -> SweepRow {
    let mut row = SweepRow {
        axis_value: value,
        ..Default::default()
    };
    let mut params = cfg.params;
    cfg.axis.apply(&mut params, value);
    if let Err(e) = params.validate() {
        row.errors.push(e.to_string());
        return row;
    }
    let mut probe = cfg.clone();
    probe.params = params;
    let Some(fc) = row.record("grid", fem_config(&probe)) else {
        return row;
    };
    let initial = cfg.initial_data();
    row.t_fem = row.record("fem", fem::time_to_threshold_with(&initial, &params, &fc));

    let spectral = eigs_exact(&params, cfg.modes, fc.grid).and_then(|pairs| {
        let coeffs = ModalCoefficients::new(&initial, &pairs, params.b(), fc.grid)?;
        time_to_threshold_spectral(&coeffs, params.rho0)
    });
    row.t_spectral = row.record("spectral", spectral);

    let (n_mass, s_overlap) = match initial {
        InitialData::Dirac(z) => (1.0, if z < params.eps { params.s0 } else { 0.0 }),
        _ => match realize_initial(&initial, fc.grid) {
            Ok(f) => (f.mass(), weighted_mass(&params.profile(), &f)),
            Err(e) => {
                row.errors.push(format!("initial: {e}"));
                return row;
            }
        },
    };
    let in_regime = |r: gcselect_core::Result<gcselect_core::asymptotics::ThresholdEstimate>| {
        r.map(|e| e.validity.in_regime.then_some(e.t_est))
    };
    row.t_narrow_eps = row
        .record("narrow_eps", in_regime(t_threshold_narrow_eps(&params, n_mass)))
        .flatten();
    row.t_small_mu = row
        .record("small_mu", in_regime(t_threshold_small_mu(&params, s_overlap)))
        .flatten();
    let m00 = overlap_matrix(&params.profile(), 1)[(0, 0)];
    row.t_large_mu = row
        .record("large_mu", in_regime(t_threshold_large_mu(&params, n_mass, m00)))
        .flatten();

    if cfg.init == InitKind::Dirac {
        let bounds = DiracSetup::new(cfg.dirac_z, params, DomainSpec::BoundedUnit)
            .and_then(|setup| bounds_bounded(&setup, params.rho0));
        if let Some(bp) = row.record("bounds", bounds) {
            row.t_l = Some(bp.t_l);
            row.t_u = bp.t_u;
        }
    }
    row
}

/// Thread pool capped at `jobs` workers (rayon's default when `None`).
pub fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

pub fn sweep(cfg: &RunConfig, jobs: Option<usize>) -> Result<(PathBuf, Vec<SweepRow>)> {
    let values = cfg.sweep_values()?;
    let rows: Vec<SweepRow> =
        pool(jobs)?.install(|| values.par_iter().map(|v| sweep_point(cfg, *v)).collect());
    let path = write_csv(
        &cfg.out,
        &format!("sweep_{}.csv", cfg.axis.name()),
        &SWEEP_HEADER,
        rows.iter().map(SweepRow::fields),
    )?;
    Ok((path, rows))
}
