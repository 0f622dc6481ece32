use serde::Serialize;
use serde_json::Value;

use faer::Mat;
use num_complex::Complex64;

use super::resolvent::{observable_in_eigenbasis, resolvent_trace_product, ResolventFactor, SpectralPoint};
use super::{EigenSystem, SemicircleModel};
use crate::ensembles::Observable;
use crate::error::{domain, Result};

/// One diagnostic outcome, serialized as a JSON record.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticRecord {
    pub check: String,
    pub parameters: Value,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RigidityReport {
    pub max_scaled_deviation: f64,
    /// 0-based index attaining the maximum.
    pub argmax: usize,
    pub threshold: f64,
    pub pass: bool,
}

/// `max_i N^{2/3} î^{1/3} |λ_i − γ_i|` with `î = min(i, N − i + 1)` (1-based),
/// against precomputed classical locations.
pub fn rigidity_statistic(eigenvalues: &[f64], quantiles: &[f64]) -> Result<(f64, usize)> {
    let n = eigenvalues.len();
    if quantiles.len() != n || n == 0 {
        return domain(format!("rigidity needs {} quantiles, got {}", n, quantiles.len()));
    }
    let nf = n as f64;
    let mut best = (0.0f64, 0usize);
    for (k, (l, g)) in eigenvalues.iter().zip(quantiles).enumerate() {
        let i = k + 1;
        let ihat = i.min(n - i + 1) as f64;
        let s = nf.powf(2.0 / 3.0) * ihat.powf(1.0 / 3.0) * (l - g).abs();
        if s > best.0 {
            best = (s, k);
        }
    }
    Ok(best)
}

/// Rigidity event check: passes when the scaled deviation is at most `N^ξ`.
pub fn rigidity_check(es: &EigenSystem, model: &SemicircleModel, xi: f64) -> Result<RigidityReport> {
    rigidity_against(es, &model.quantiles(es.n()), xi)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EthReport {
    pub max_scaled_overlap: f64,
    pub argmax: (usize, usize),
    pub bulk_lo: usize,
    pub bulk_hi: usize,
}

/// Rigidity against a precomputed table of classical locations.
pub fn rigidity_against(es: &EigenSystem, quantiles: &[f64], xi: f64) -> Result<RigidityReport> {
    let (stat, argmax) = rigidity_statistic(es.eigenvalues(), quantiles)?;
    let threshold = (es.n() as f64).powf(xi);
    Ok(RigidityReport {
        max_scaled_deviation: stat,
        argmax,
        threshold,
        pass: stat <= threshold,
    })
}

/// Inclusive 0-based bulk range `δN ≤ k+1 ≤ (1−δ)N`.
fn bulk_range(n: usize, bulk_fraction: f64) -> Result<(usize, usize)> {
    if !(bulk_fraction > 0.0 && bulk_fraction < 0.5) {
        return domain(format!("bulk fraction must lie in (0, 1/2), got {bulk_fraction}"));
    }
    let nf = n as f64;
    let lo = ((bulk_fraction * nf).ceil() as usize).max(1) - 1;
    let hi = (((1.0 - bulk_fraction) * nf).floor() as usize).min(n).saturating_sub(1);
    if n == 0 || lo > hi {
        return domain("bulk window is empty");
    }
    Ok((lo, hi))
}

/// `max √(N/⟨Å²⟩) |⟨u_i, Å u_j⟩|` over bulk indices `δN ≤ i, j ≤ (1−δ)N` (1-based).
pub fn eth_check(es: &EigenSystem, a: &Observable, bulk_fraction: f64) -> Result<EthReport> {
    a.require_nontrivial()?;
    bulk_range(es.n(), bulk_fraction)?;
    eth_from_rotated(&observable_in_eigenbasis(es, a), a.norm_sq(), bulk_fraction)
}

/// [`eth_check`] from `M = U* Å U`.
pub fn eth_from_rotated(m: &Mat<Complex64>, norm_sq: f64, bulk_fraction: f64) -> Result<EthReport> {
    let n = m.nrows();
    let (lo, hi) = bulk_range(n, bulk_fraction)?;
    if !(norm_sq > 0.0) {
        return domain("observable has ⟨Å²⟩ = 0");
    }
    let scale = (n as f64 / norm_sq).sqrt();
    let mut best = (0.0f64, (lo, lo));
    for j in lo..=hi {
        for i in lo..=hi {
            let v = m.read(i, j).norm() * scale;
            if v > best.0 {
                best = (v, (i, j));
            }
        }
    }
    Ok(EthReport {
        max_scaled_overlap: best.0,
        argmax: best.1,
        bulk_lo: lo,
        bulk_hi: hi,
    })
}

/// `⟨Im G(z) Å Im G(z) Å⟩ / ⟨Å²⟩`.
pub fn two_resolvent_ratio(es: &EigenSystem, a: &Observable, point: SpectralPoint) -> Result<f64> {
    let v = resolvent_trace_product(es, &[ResolventFactor::imaginary(point, a), ResolventFactor::imaginary(point, a)])?;
    Ok(v.re / a.norm_sq())
}

/// [`two_resolvent_ratio`] at several points, sharing `M = U* Å U`:
/// `(1/N) Σ_ij Im g_i |M_ij|² Im g_j / ⟨Å²⟩`.
pub fn two_resolvent_ratios(es: &EigenSystem, a: &Observable, points: &[SpectralPoint]) -> Result<Vec<f64>> {
    a.require_nontrivial()?;
    let m = observable_in_eigenbasis(es, a);
    Ok(ratios_from_rotated(es.eigenvalues(), &m, a.norm_sq(), points))
}

fn ratios_from_rotated(lam: &[f64], m: &Mat<Complex64>, norm_sq: f64, points: &[SpectralPoint]) -> Vec<f64> {
    let n = lam.len();
    points
        .iter()
        .map(|p| {
            let d: Vec<f64> = lam.iter().map(|l| p.eta / ((l - p.energy).powi(2) + p.eta * p.eta)).collect();
            let mut acc = 0.0;
            for j in 0..n {
                for i in 0..n {
                    acc += d[i] * m.read(i, j).norm_sqr() * d[j];
                }
            }
            acc / n as f64 / norm_sq
        })
        .collect()
}

/// Rigidity, two-resolvent ratios and (optionally) the ETH statistic of one
/// sample, sharing a single rotation of `Å` into the eigenbasis.
#[derive(Debug, Clone, Serialize)]
pub struct SampleDiagnostics {
    pub rigidity: RigidityReport,
    pub two_resolvent: Vec<f64>,
    pub eth: Option<EthReport>,
}

pub fn sample_diagnostics(
    es: &EigenSystem,
    a: &Observable,
    quantiles: &[f64],
    xi: f64,
    points: &[SpectralPoint],
    eth_bulk: Option<f64>,
) -> Result<SampleDiagnostics> {
    a.require_nontrivial()?;
    let rigidity = rigidity_against(es, quantiles, xi)?;
    let m = observable_in_eigenbasis(es, a);
    let two_resolvent = ratios_from_rotated(es.eigenvalues(), &m, a.norm_sq(), points);
    let eth = eth_bulk.map(|d| eth_from_rotated(&m, a.norm_sq(), d)).transpose()?;
    Ok(SampleDiagnostics { rigidity, two_resolvent, eth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{HermitianMatrix, SymmetryClass};
    use crate::spectral::eigensolve;

    #[test]
    fn zero_matrix_rigidity() {
        let w = HermitianMatrix::zeros(4, SymmetryClass::Real);
        let es = eigensolve(&w).unwrap();
        let model = SemicircleModel::new(0.0).unwrap();
        let q = model.quantiles(4);
        let expect = (0..4)
            .map(|k| {
                let i = k + 1;
                4f64.powf(2.0 / 3.0) * (i.min(4 - i + 1) as f64).powf(1.0 / 3.0) * q[k].abs()
            })
            .fold(0.0, f64::max);
        let r = rigidity_check(&es, &model, 0.05).unwrap();
        assert!((r.max_scaled_deviation - expect).abs() < 1e-12);
        assert!(!r.pass);
    }

    #[test]
    fn exact_quantiles_give_zero_deviation() {
        let model = SemicircleModel::new(0.5).unwrap();
        let q = model.quantiles(16);
        let (s, _) = rigidity_statistic(&q, &q).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn eth_two_by_two() {
        let w = HermitianMatrix::real_from_fn(2, |i, j| if i == j { 0.0 } else { 1.0 });
        let es = eigensolve(&w).unwrap();
        let a = Observable::from_real_diagonal(&[1.0, -1.0], "A").unwrap();
        // δ = 0.4: the bulk window 0.8 ≤ i ≤ 1.2 keeps only i = 1.
        let r = eth_check(&es, &a, 0.4).unwrap();
        // ⟨u_1, A u_1⟩ = 0 for u_1 = (1, −1)/√2
        assert!(r.max_scaled_overlap < 1e-15);
        // full off-diagonal overlap by hand: ⟨u_1, A u_2⟩ = ±1, scaled √2
        let v = es.overlap(&a, 0, 1).norm() * (2.0f64 / a.norm_sq()).sqrt();
        assert!((v - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn eth_rejects_trivial_observable() {
        let w = HermitianMatrix::real_from_fn(4, |i, j| if i == j { i as f64 } else { 0.0 });
        let es = eigensolve(&w).unwrap();
        let zero = Observable::from_real_diagonal(&[0.0; 4], "0").unwrap();
        assert!(eth_check(&es, &zero, 0.1).is_err());
    }

    #[test]
    fn batched_two_resolvent_matches_product() {
        use crate::ensembles::{make_observable, ObservableKind, WignerSpec};
        let w = WignerSpec::goe(40, 3).sample_at(0).unwrap();
        let es = eigensolve(&w).unwrap();
        let a = make_observable(&ObservableKind::DiagSigns { block: None }, 40, "A").unwrap();
        let pts = [SpectralPoint::new(0.0, 0.2).unwrap(), SpectralPoint::new(-0.7, 0.05).unwrap()];
        let batch = two_resolvent_ratios(&es, &a, &pts).unwrap();
        for (p, b) in pts.iter().zip(&batch) {
            assert!((two_resolvent_ratio(&es, &a, *p).unwrap() - b).abs() < 1e-10);
        }
        let full = eth_check(&es, &a, 0.1).unwrap();
        let m = observable_in_eigenbasis(&es, &a);
        let (i, j) = full.argmax;
        let direct = es.overlap(&a, i, j).norm() * (40.0 / a.norm_sq()).sqrt();
        assert!((direct - full.max_scaled_overlap).abs() < 1e-10);
        assert_eq!(eth_from_rotated(&m, a.norm_sq(), 0.1).unwrap().argmax, full.argmax);
    }
}
