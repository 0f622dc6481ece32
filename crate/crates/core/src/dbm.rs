//! Matrix Dyson Brownian motion and the Ornstein–Uhlenbeck flow.
//!
//! - `dbm`: `dW_t = dB_t / √N`;
//! - `ou`:  `dŴ_t = −Ŵ_t/2 dt + dB̂_t / √N`, which keeps the GOE/GUE law
//!   invariant.
//!
//! `B` is a Hermitian Brownian motion of the matching class: off-diagonal
//! `E|dB_ab|² = dt` (with `E dB_ab² = 0` in the complex class) and real
//! diagonal variance `(2/β) dt`. Both flows are simulated at the matrix
//! level; eigenvectors are recomputed at checkpoints.

use faer::Mat;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{HermitianMatrix, Observable, SymmetryClass, WignerSpec};
use crate::error::{config, domain, Error, Result};
use crate::momentflow::Rates;
use crate::overlaps::{phi_unchecked, wick_moment, MomentSpec, PhaseVector};
use crate::pool::with_workers;
use crate::rng::{stream, Purpose};
use crate::spectral::{eigensolve, EigenSystem};
use crate::stats::ComplexAccumulator;

/// Smallest eigenvalue gap accepted by [`environment_rates`].
pub const RATE_GAP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMode {
    Dbm,
    Ou,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub dt: f64,
    pub horizon: f64,
    pub mode: FlowMode,
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= self.horizon && self.horizon.is_finite()) {
            return config(format!("flow needs 0 < dt ≤ T, got dt = {}, T = {}", self.dt, self.horizon));
        }
        Ok(())
    }
}

/// One path of a matrix flow: current matrix, time and random cursor.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub matrix: HermitianMatrix,
    pub time: f64,
    rng: ChaCha8Rng,
}

impl FlowState {
    /// Starts path `path` from `matrix`; increments are keyed by `(seed, path)`.
    pub fn new(matrix: HermitianMatrix, seed: u64, path: u64) -> Self {
        Self {
            matrix,
            time: 0.0,
            rng: stream(seed, Purpose::Increment, path),
        }
    }

    pub fn class(&self) -> SymmetryClass {
        self.matrix.class()
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }
}

/// Advances the flow by `dt`. The update writes `W_ab` and `W_ba` from a
/// single draw, so the output is exactly Hermitian.
pub fn flow_step(mut state: FlowState, dt: f64, mode: FlowMode) -> Result<FlowState> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return domain(format!("time step must be finite and non-negative, got {dt}"));
    }
    if dt == 0.0 {
        return Ok(state);
    }
    let n = state.n();
    let noise = (dt / n as f64).sqrt();
    let diag_noise = noise * (2.0 / state.class().beta_f64()).sqrt();
    let damp = match mode {
        FlowMode::Dbm => 1.0,
        FlowMode::Ou => 1.0 - dt / 2.0,
    };
    let rng = &mut state.rng;
    match &mut state.matrix {
        HermitianMatrix::Real(w) => {
            for j in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                w.write(j, j, damp * w.read(j, j) + diag_noise * z);
                for i in j + 1..n {
                    let z: f64 = rng.sample(StandardNormal);
                    let v = damp * w.read(i, j) + noise * z;
                    w.write(i, j, v);
                    w.write(j, i, v);
                }
            }
        }
        HermitianMatrix::Complex(w) => {
            for j in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                w.write(j, j, Complex64::new(damp * w.read(j, j).re + diag_noise * z, 0.0));
                for i in j + 1..n {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    let v = w.read(i, j) * damp + Complex64::new(re, im) * (noise * std::f64::consts::FRAC_1_SQRT_2);
                    w.write(i, j, v);
                    w.write(j, i, v.conj());
                }
            }
        }
    }
    state.time += dt;
    Ok(state)
}

/// Runs the flow up to `target` in steps of at most `max_dt`.
pub fn advance_to(mut state: FlowState, target: f64, max_dt: f64, mode: FlowMode) -> Result<FlowState> {
    if !(max_dt > 0.0) {
        return domain("maximal step must be positive");
    }
    while state.time < target {
        let remaining = target - state.time;
        let h = remaining.min(max_dt);
        state = flow_step(state, h, mode)?;
        if remaining <= max_dt {
            state.time = target;
        }
    }
    Ok(state)
}

/// Jump rates `c_ij = 1 / (N (λ_i − λ_j)²)` of the eigenvector moment flow.
pub fn environment_rates(es: &EigenSystem) -> Result<Rates<f64>> {
    let gap = es.min_gap();
    if gap < RATE_GAP {
        return domain(format!("eigenvalue gap {gap:e} below {RATE_GAP:e}; resample the environment"));
    }
    let n = es.n() as f64;
    let l = es.eigenvalues();
    Ok(Rates::from_fn(es.n(), |i, j| 1.0 / (n * (l[i] - l[j]).powi(2))))
}

/// `{0} ∪ {N^{−1+ε} 2^k : k = 0, …, levels − 1}`.
pub fn geometric_grid(n: usize, epsilon: f64, levels: usize) -> Vec<f64> {
    let base = (n as f64).powf(-1.0 + epsilon);
    std::iter::once(0.0).chain((0..levels).map(|k| base * 2f64.powi(k as i32))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxationSetup {
    pub wigner: WignerSpec,
    pub times: Vec<f64>,
    pub specs: Vec<MomentSpec>,
    pub n_samples: usize,
    /// Largest step of the DBM integrator; `None` jumps between grid
    /// times in one (exact-in-law) Gaussian step.
    pub max_dt: Option<f64>,
    pub phase_seed: u64,
    pub workers: Option<usize>,
}

/// One `(t, moment)` cell of a relaxation report. Moments of interest are
/// real in expectation; `empirical` and `predicted` are real parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxationRow {
    pub t: f64,
    pub moment_id: String,
    pub empirical: f64,
    pub std_error: f64,
    pub predicted: f64,
}

impl RelaxationRow {
    pub fn deviation(&self) -> f64 {
        (self.empirical - self.predicted).abs()
    }
}

/// Deviation trend of one moment along the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendNote {
    pub moment_id: String,
    pub deviations: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// No deviation exceeds the one at `t = 0` by more than four combined
    /// standard errors.
    pub non_increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxationReport {
    pub rows: Vec<RelaxationRow>,
    pub trends: Vec<TrendNote>,
}

impl RelaxationReport {
    pub fn row(&self, t: f64, moment_id: &str) -> Option<&RelaxationRow> {
        self.rows.iter().find(|r| r.t == t && r.moment_id == moment_id)
    }
}

/// DBM relaxation of overlap moments from a (typically non-Gaussian)
/// Wigner ensemble: at each grid time, the empirical moments against
/// their Gaussian-field values.
pub fn relaxation_experiment(setup: &RelaxationSetup, observables: &[Observable]) -> Result<RelaxationReport> {
    let n = setup.wigner.n;
    setup.wigner.validate()?;
    if setup.times.first() != Some(&0.0) || setup.times.windows(2).any(|w| w[1] <= w[0]) {
        return config("relaxation grid must start at 0 and increase strictly");
    }
    if setup.n_samples < 2 {
        return config("relaxation needs at least two samples");
    }
    let class = setup.wigner.class;
    let predicted = setup
        .specs
        .iter()
        .map(|s| wick_moment(&s.factors, observables, class))
        .collect::<Result<Vec<_>>>()?;
    for s in &setup.specs {
        for f in &s.factors {
            if f.i >= n || f.j >= n || observables[f.observable].n() != n {
                return domain(format!("moment '{}' does not fit dimension {n}", s.label));
            }
        }
    }
    let scales: Vec<f64> = observables.iter().map(|o| (n as f64 / o.norm_sq()).sqrt()).collect();
    let grid = setup.times.len();
    let paths: Vec<Vec<Vec<Complex64>>> = with_workers(setup.workers, || {
        (0..setup.n_samples as u64)
            .into_par_iter()
            .map(|p| {
                let mut state = FlowState::new(setup.wigner.sample_at(p)?, setup.wigner.seed, p);
                let mut out = Vec::with_capacity(grid);
                for (k, &t) in setup.times.iter().enumerate() {
                    let step = setup.max_dt.unwrap_or(f64::INFINITY);
                    state = advance_to(state, t, step, FlowMode::Dbm)?;
                    let es = eigensolve(&state.matrix)?;
                    if !es.is_simple() {
                        return Err(Error::Numeric(format!("path {p}: degenerate spectrum at t = {t}")));
                    }
                    let phases = PhaseVector::sample(n, class, &mut stream(setup.phase_seed, Purpose::Phases, p * grid as u64 + k as u64));
                    out.push(
                        setup
                            .specs
                            .iter()
                            .map(|s| {
                                s.factors
                                    .iter()
                                    .map(|f| phi_unchecked(&es, &phases, &observables[f.observable], f.i, f.j, scales[f.observable]))
                                    .product()
                            })
                            .collect(),
                    );
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut rows = Vec::new();
    for (k, &t) in setup.times.iter().enumerate() {
        for (m, s) in setup.specs.iter().enumerate() {
            let mut acc = ComplexAccumulator::new();
            for path in &paths {
                acc.push(path[k][m]);
            }
            rows.push(RelaxationRow {
                t,
                moment_id: s.label.clone(),
                empirical: acc.mean().re,
                std_error: acc.std_error(),
                predicted: predicted[m].re,
            });
        }
    }
    let trends = setup
        .specs
        .iter()
        .map(|s| {
            let mine: Vec<&RelaxationRow> = rows.iter().filter(|r| r.moment_id == s.label).collect();
            let d0 = mine[0].deviation();
            let se0 = mine[0].std_error;
            TrendNote {
                moment_id: s.label.clone(),
                deviations: mine.iter().map(|r| r.deviation()).collect(),
                std_errors: mine.iter().map(|r| r.std_error).collect(),
                non_increasing: mine.iter().all(|r| r.deviation() <= d0 + 4.0 * (se0 * se0 + r.std_error * r.std_error).sqrt()),
            }
        })
        .collect();
    Ok(RelaxationReport { rows, trends })
}

/// Entry pool statistics of a sampled matrix: off-diagonal mean and
/// `N · E|w_ab|²`.
pub fn off_diagonal_pool(ws: &[HermitianMatrix]) -> (Complex64, f64, usize) {
    let mut acc = ComplexAccumulator::new();
    let mut second = 0.0;
    for w in ws {
        let n = w.n() as f64;
        for v in w.off_diagonal() {
            acc.push(v);
            second += n * v.norm_sqr();
        }
    }
    let count = acc.count();
    (acc.mean(), second / count.max(1) as f64, count)
}

/// `W_t − W_0` as a matrix, for increment statistics.
pub fn difference(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    if a.n() != b.n() || a.class() != b.class() {
        return domain("matrices differ in shape or class");
    }
    Ok(match (a, b) {
        (HermitianMatrix::Real(x), HermitianMatrix::Real(y)) => HermitianMatrix::Real(Mat::from_fn(x.nrows(), x.ncols(), |i, j| x.read(i, j) - y.read(i, j))),
        _ => HermitianMatrix::complex_from_fn(a.n(), |i, j| a.get(i, j) - b.get(i, j)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::eigensolve;

    #[test]
    fn zero_step_is_identity() {
        let w = WignerSpec::gue(8, 1).sample_at(0).unwrap();
        let s = FlowState::new(w.clone(), 1, 0);
        for mode in [FlowMode::Dbm, FlowMode::Ou] {
            let t = flow_step(s.clone(), 0.0, mode).unwrap();
            assert_eq!(t.matrix.to_complex(), w.to_complex());
            assert_eq!(t.time, 0.0);
        }
    }

    #[test]
    fn hermitian_along_the_flow() {
        for class in [SymmetryClass::Real, SymmetryClass::Complex] {
            let w = WignerSpec::new(20, class, crate::ensembles::EntryLaw::Gaussian, 3).sample_at(0).unwrap();
            let mut s = FlowState::new(w, 3, 0);
            for mode in [FlowMode::Dbm, FlowMode::Ou] {
                for _ in 0..5 {
                    s = flow_step(s, 0.01, mode).unwrap();
                    assert_eq!(s.matrix.max_asymmetry(), 0.0);
                }
            }
        }
    }

    #[test]
    fn dbm_increment_variance() {
        let n = 60;
        let t = 0.3;
        for class in [SymmetryClass::Real, SymmetryClass::Complex] {
            let mut diffs = Vec::new();
            for p in 0..20 {
                let w0 = HermitianMatrix::zeros(n, class);
                let s = advance_to(FlowState::new(w0.clone(), 9, p), t, 0.05, FlowMode::Dbm).unwrap();
                diffs.push(difference(&s.matrix, &w0).unwrap());
            }
            let (mean, second, count) = off_diagonal_pool(&diffs);
            // N·Var(entry) = t; relative SE of a Gaussian second moment ≈ √(2/count).
            let se = t * (2.0 / count as f64).sqrt();
            assert!((second - t).abs() < 5.0 * se, "{class:?}: {second}");
            assert!(mean.norm() < 5.0 * (t / n as f64 / count as f64).sqrt());
        }
    }

    #[test]
    fn rates_from_environment() {
        let es = EigenSystem::from_parts(vec![0.0, 1.0], &Mat::from_fn(2, 2, |i, j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }), SymmetryClass::Real).unwrap();
        let r = environment_rates(&es).unwrap();
        assert_eq!(*r.get(0, 1), 0.5);
        assert_eq!(r.get(0, 1), r.get(1, 0));
        let w = WignerSpec::goe(30, 2).sample_at(0).unwrap();
        let es = eigensolve(&w).unwrap();
        let r = environment_rates(&es).unwrap();
        let s = 3.0;
        let scaled = EigenSystem::from_parts(es.eigenvalues().iter().map(|x| x * s).collect(), &es.frame(), SymmetryClass::Real).unwrap();
        let r2 = environment_rates(&scaled).unwrap();
        assert!((r2.get(3, 7) * s * s - r.get(3, 7)).abs() < 1e-12 * r.get(3, 7));
        let degenerate = EigenSystem::from_parts(vec![0.0, 0.0], &es.frame().submatrix(0, 0, 2, 2).to_owned(), SymmetryClass::Real).unwrap();
        assert!(environment_rates(&degenerate).is_err());
    }

    #[test]
    fn grid_shape() {
        let g = geometric_grid(256, 0.5, 3);
        assert_eq!(g, vec![0.0, 1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0]);
    }

    #[test]
    fn params_validation() {
        assert!(FlowParams { dt: 0.1, horizon: 1.0, mode: FlowMode::Ou }.validate().is_ok());
        assert!(FlowParams { dt: 2.0, horizon: 1.0, mode: FlowMode::Ou }.validate().is_err());
        assert!(FlowParams { dt: 0.0, horizon: 1.0, mode: FlowMode::Dbm }.validate().is_err());
    }
}
