use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::EigenSystem;
use crate::ensembles::Observable;
use crate::error::{domain, Result};

/// Spectral parameter `z = E + iη` attached to flow time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub energy: f64,
    pub eta: f64,
    pub time: f64,
}

impl SpectralPoint {
    pub fn new(energy: f64, eta: f64) -> Result<Self> {
        Self::at_time(energy, eta, 0.0)
    }

    pub fn at_time(energy: f64, eta: f64, time: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return domain(format!("spectral point needs η > 0, got {eta}"));
        }
        if !(time >= 0.0) {
            return domain(format!("spectral point needs t ≥ 0, got {time}"));
        }
        Ok(Self { energy, eta, time })
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.energy, self.eta)
    }
}

/// Whether a factor is `G(z)` or `Im G(z) = (G − G*)/(2i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResolventKind {
    Plain,
    Imaginary,
}

#[derive(Debug, Clone, Copy)]
pub struct ResolventFactor<'a> {
    pub point: SpectralPoint,
    pub kind: ResolventKind,
    pub observable: &'a Observable,
}

impl<'a> ResolventFactor<'a> {
    pub fn plain(point: SpectralPoint, observable: &'a Observable) -> Self {
        Self {
            point,
            kind: ResolventKind::Plain,
            observable,
        }
    }

    pub fn imaginary(point: SpectralPoint, observable: &'a Observable) -> Self {
        Self {
            point,
            kind: ResolventKind::Imaginary,
            observable,
        }
    }

    fn diagonal(&self, eigenvalues: &[f64]) -> Vec<Complex64> {
        let z = self.point.z();
        eigenvalues
            .iter()
            .map(|&l| match self.kind {
                ResolventKind::Plain => 1.0 / (l - z),
                ResolventKind::Imaginary => {
                    let d = l - self.point.energy;
                    Complex64::new(self.point.eta / (d * d + self.point.eta * self.point.eta), 0.0)
                }
            })
            .collect()
    }
}

/// `U* Å U`, the traceless observable in the eigenbasis.
pub fn observable_in_eigenbasis(es: &EigenSystem, obs: &Observable) -> Mat<Complex64> {
    let u = es.frame();
    let au = if let Some(d) = obs.traceless_diagonal() {
        Mat::from_fn(u.nrows(), u.ncols(), |i, j| u.read(i, j) * d[i])
    } else {
        obs.traceless() * &u
    };
    u.adjoint() * &au
}

/// `⟨G(z_1) Å_1 ⋯ G(z_k) Å_k⟩` (with `Im G` where marked), evaluated in the
/// eigenbasis of `es`.
pub fn resolvent_trace_product(es: &EigenSystem, factors: &[ResolventFactor<'_>]) -> Result<Complex64> {
    if factors.is_empty() {
        return domain("resolvent product needs at least one factor");
    }
    let n = es.n();
    for f in factors {
        if f.observable.n() != n {
            return domain(format!("observable '{}' has dimension {}, expected {n}", f.observable.label(), f.observable.n()));
        }
        f.observable.require_nontrivial()?;
    }
    let lambda = es.eigenvalues();
    // Running product D_1 M_1 D_2 M_2 ⋯
    let mut acc: Option<Mat<Complex64>> = None;
    for f in factors {
        let d = f.diagonal(lambda);
        let m = observable_in_eigenbasis(es, f.observable);
        let dm = Mat::from_fn(n, n, |i, j| d[i] * m.read(i, j));
        acc = Some(match acc {
            None => dm,
            Some(prev) => &prev * &dm,
        });
    }
    let p = acc.expect("non-empty");
    let tr: Complex64 = (0..n).map(|i| p.read(i, i)).sum();
    Ok(tr / n as f64)
}
