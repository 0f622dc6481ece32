use faer::{Mat, Side};
use serde::Serialize;

use super::config::StateSpace;
use super::operator::SparseOperator;
use super::scalar::Scalar;
use crate::error::{config, domain, Error, Result};

/// Largest dimension handled by the exact (eigendecomposition) route.
pub const EXACT_DIM_LIMIT: usize = 2000;

/// Stability bound for the explicit integrator: `dt · ‖op‖_∞ ≤ 0.1`.
const RK4_STEP_BOUND: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Integrator {
    /// Classical fourth-order Runge–Kutta with fixed step.
    Rk4 { dt: f64 },
    /// `exp(t·op)` through the eigendecomposition of the π-symmetrized
    /// operator; requires a π-reversible operator.
    Exact,
}

/// `g_t` at the requested checkpoints together with its norms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub linf: Vec<f64>,
    /// `(Σ_x π(x) g_t(x)²)^{1/2}`.
    pub l2_pi: Vec<f64>,
}

impl FlowTrajectory {
    /// `‖g_t‖_∞ ≤ ‖g_0‖_∞ (1 + tol)` at every checkpoint.
    pub fn linf_contracts(&self, tol: f64) -> bool {
        self.linf.iter().all(|&v| v <= self.linf[0] * (1.0 + tol) + tol)
    }

    /// Largest `‖g_t‖_∞ / ‖g_0‖_∞` along the trajectory.
    pub fn linf_ratio(&self) -> f64 {
        if self.linf[0] == 0.0 {
            return 1.0;
        }
        self.linf.iter().fold(0.0f64, |m, &v| m.max(v / self.linf[0]))
    }

    pub fn l2_nonincreasing(&self, tol: f64) -> bool {
        self.l2_pi.windows(2).all(|w| w[1] <= w[0] * (1.0 + tol) + tol)
    }

    /// `max_t ‖g_t − g_0‖_∞`.
    pub fn max_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|s| s.iter().zip(&self.states[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}

/// `π(x)` as floats, in state order.
pub fn pi_weights(space: &StateSpace) -> Vec<f64> {
    (0..space.len()).map(|k| f64::from_biguint(&space.pi(k))).collect()
}

fn norms(g: &[f64], pi: &[f64]) -> (f64, f64) {
    let linf = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let l2 = g.iter().zip(pi).map(|(v, p)| p * v * v).sum::<f64>().sqrt();
    (linf, l2)
}

/// Solves `∂_t g = op g` from `g0` and records `g` at each checkpoint.
pub fn flow_evolve(op: &SparseOperator<f64>, pi: &[f64], g0: &[f64], checkpoints: &[f64], integrator: Integrator) -> Result<FlowTrajectory> {
    let dim = op.dim();
    if g0.len() != dim || pi.len() != dim {
        return domain(format!("initial data / weights do not match the {dim}-dimensional operator"));
    }
    if checkpoints.is_empty() || checkpoints.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || checkpoints.windows(2).any(|w| w[1] < w[0]) {
        return config("checkpoints must be a non-empty, non-decreasing list of times ≥ 0");
    }
    let states = match integrator {
        Integrator::Rk4 { dt } => rk4(op, g0, checkpoints, dt)?,
        Integrator::Exact => exact(op, pi, g0, checkpoints)?,
    };
    let (linf, l2_pi) = states.iter().map(|g| norms(g, pi)).unzip();
    Ok(FlowTrajectory {
        times: checkpoints.to_vec(),
        states,
        linf,
        l2_pi,
    })
}

fn rk4(op: &SparseOperator<f64>, g0: &[f64], checkpoints: &[f64], dt: f64) -> Result<Vec<Vec<f64>>> {
    let norm = op.inf_norm();
    if !(dt > 0.0) || dt * norm > RK4_STEP_BOUND {
        return config(format!("step dt = {dt} violates dt·‖op‖_∞ ≤ {RK4_STEP_BOUND} (‖op‖_∞ = {norm})"));
    }
    let axpy = |x: &[f64], a: f64, y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(u, v)| u + a * v).collect() };
    let mut g = g0.to_vec();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(checkpoints.len());
    for &target in checkpoints {
        while t < target {
            let h = dt.min(target - t);
            let k1 = op.apply(&g)?;
            let k2 = op.apply(&axpy(&g, h / 2.0, &k1))?;
            let k3 = op.apply(&axpy(&g, h / 2.0, &k2))?;
            let k4 = op.apply(&axpy(&g, h, &k3))?;
            for (idx, v) in g.iter_mut().enumerate() {
                *v += h / 6.0 * (k1[idx] + 2.0 * k2[idx] + 2.0 * k3[idx] + k4[idx]);
            }
            t = if target - t <= dt { target } else { t + h };
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("flow diverged before t = {target}")));
        }
        out.push(g.clone());
    }
    Ok(out)
}

fn exact(op: &SparseOperator<f64>, pi: &[f64], g0: &[f64], checkpoints: &[f64]) -> Result<Vec<Vec<f64>>> {
    let dim = op.dim();
    if dim > EXACT_DIM_LIMIT {
        return config(format!("exact evolution is limited to dimension {EXACT_DIM_LIMIT}, got {dim}"));
    }
    if pi.iter().any(|p| !(*p > 0.0)) {
        return domain("reversible weights must be positive");
    }
    let root: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    // D^{1/2} op D^{−1/2} is symmetric when op is π-reversible.
    let mut s = Mat::<f64>::zeros(dim, dim);
    for (r, c, v) in op.triplets() {
        s.write(r, c, root[r] * v / root[c]);
    }
    let scale = op.inf_norm().max(1.0);
    for r in 0..dim {
        for c in r + 1..dim {
            if (s.read(r, c) - s.read(c, r)).abs() > 1e-10 * scale {
                return domain("operator is not reversible with respect to the given weights");
            }
        }
    }
    let evd = s.selfadjoint_eigendecomposition(Side::Lower);
    let lam = evd.s().column_vector();
    let v = evd.u();
    let h: Vec<f64> = (0..dim).map(|r| root[r] * g0[r]).collect();
    let coeff: Vec<f64> = (0..dim).map(|k| (0..dim).map(|r| v.read(r, k) * h[r]).sum()).collect();
    let mut out = Vec::with_capacity(checkpoints.len());
    for &t in checkpoints {
        let w: Vec<f64> = (0..dim).map(|k| coeff[k] * (t * lam.read(k)).exp()).collect();
        let g: Vec<f64> = (0..dim).map(|r| (0..dim).map(|k| v.read(r, k) * w[k]).sum::<f64>() / root[r]).collect();
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric(format!("exact evolution overflowed at t = {t}")));
        }
        out.push(g);
    }
    Ok(out)
}
