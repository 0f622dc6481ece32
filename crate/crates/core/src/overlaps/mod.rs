//! Rescaled eigenvector overlaps `Φ_N(A, i, j)` and their Gaussian-field
//! limit.
//!
//! `Φ_N(A,i,j) = √(N/⟨Å²⟩) [⟨e^{iθ_i} u_i, A e^{iθ_j} u_j⟩ − ⟨A⟩ δ_ij]` where
//! the `θ_i` are fresh uniform phases (`±1` in the real class). The limit
//! field is centered Gaussian with
//!
//! `E Φ(A,i,j) Φ(B,k,l) = [δ_kj δ_li + (2/β − 1) δ_ki δ_lj] ⟨ÅB̊⟩ / √(⟨Å²⟩⟨B̊²⟩)`.
//!
//! Non-Hermitian observables reduce to Hermitian ones by polarization; only
//! Hermitian observables are supported here.

mod haar;
mod montecarlo;
mod wick;

pub use haar::{haar_frame, HaarFrames};
pub use montecarlo::{
    estimate_moments, haar_frame_moments, mc_mixed_moments, reports_from_values, sample_values, spec_hash, FrameSource, McOptions, MomentReport,
    WignerFrames,
};
pub use wick::wick_moment;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::{Observable, SymmetryClass};
use crate::error::{domain, Result};
use crate::spectral::EigenSystem;

/// Uniform random phases `e^{iθ_i}` attached to the eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    phases: Vec<Complex64>,
}

impl PhaseVector {
    pub fn trivial(n: usize) -> Self {
        Self {
            phases: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    pub fn sample<R: Rng + ?Sized>(n: usize, class: SymmetryClass, rng: &mut R) -> Self {
        let phases = (0..n)
            .map(|_| match class {
                SymmetryClass::Real => Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0),
                SymmetryClass::Complex => Complex64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU),
            })
            .collect();
        Self { phases }
    }

    pub fn from_phases(phases: Vec<Complex64>) -> Result<Self> {
        if phases.iter().any(|p| (p.norm() - 1.0).abs() > 1e-12) {
            return domain("phases must have unit modulus");
        }
        Ok(Self { phases })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn get(&self, i: usize) -> Complex64 {
        self.phases[i]
    }
}

/// One factor `Φ(A_observable, i, j)` of a moment; indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OverlapIndex {
    pub observable: usize,
    pub i: usize,
    pub j: usize,
}

impl OverlapIndex {
    pub fn new(observable: usize, i: usize, j: usize) -> Self {
        Self { observable, i, j }
    }
}

/// A labelled product of overlap factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MomentSpec {
    pub label: String,
    pub factors: Vec<OverlapIndex>,
}

impl MomentSpec {
    pub fn new(label: impl Into<String>, factors: Vec<OverlapIndex>) -> Self {
        Self {
            label: label.into(),
            factors,
        }
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }
}

/// Bulk index window `δN ≤ i ≤ (1−δ)N` (1-based), exposed with 0-based indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BulkWindow {
    pub delta: f64,
}

impl Default for BulkWindow {
    fn default() -> Self {
        Self { delta: 0.1 }
    }
}

impl BulkWindow {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return domain(format!("bulk fraction must lie in (0, 1/2), got {delta}"));
        }
        Ok(Self { delta })
    }

    pub fn contains(&self, i: usize, n: usize) -> bool {
        let k = (i + 1) as f64;
        let nf = n as f64;
        i < n && self.delta * nf <= k && k <= (1.0 - self.delta) * nf
    }

    /// Inclusive 0-based range of bulk indices, if non-empty.
    pub fn range(&self, n: usize) -> Option<(usize, usize)> {
        let lo = (0..n).find(|&i| self.contains(i, n))?;
        let hi = (0..n).rev().find(|&i| self.contains(i, n))?;
        Some((lo, hi))
    }
}

/// Default bulk index: `⌊N/2⌋` converted to 0-based.
pub fn default_bulk_index(n: usize) -> usize {
    (n / 2).saturating_sub(1)
}

fn check_index(es: &EigenSystem, i: usize) -> Result<()> {
    if i >= es.n() {
        return domain(format!("eigenvector index {i} out of range for N = {}", es.n()));
    }
    Ok(())
}

/// `Φ_N(A, i, j)` for the phased eigenbasis. Satisfies
/// `phi(A,i,j) = conj(phi(A,j,i))` exactly and is real for `i = j`.
pub fn phi(es: &EigenSystem, phases: &PhaseVector, a: &Observable, i: usize, j: usize) -> Result<Complex64> {
    check_index(es, i)?;
    check_index(es, j)?;
    if phases.len() != es.n() || a.n() != es.n() {
        return domain("phase vector / observable dimension does not match the eigensystem");
    }
    a.require_nontrivial()?;
    let scale = (es.n() as f64 / a.norm_sq()).sqrt();
    Ok(phi_unchecked(es, phases, a, i, j, scale))
}

pub(crate) fn phi_unchecked(es: &EigenSystem, phases: &PhaseVector, a: &Observable, i: usize, j: usize, scale: f64) -> Complex64 {
    if i == j {
        // |e^{iθ}|² = 1 and ⟨u, A u⟩ − ⟨A⟩ = ⟨u, Å u⟩ for a unit vector.
        return Complex64::new(es.overlap(a, i, i).re * scale, 0.0);
    }
    if i > j {
        return phi_unchecked(es, phases, a, j, i, scale).conj();
    }
    phases.get(i).conj() * phases.get(j) * es.overlap(a, i, j) * scale
}

/// `⟨ÅB̊⟩ / √(⟨Å²⟩⟨B̊²⟩)`.
pub fn normalized_correlation(a: &Observable, b: &Observable) -> Result<f64> {
    a.require_nontrivial()?;
    b.require_nontrivial()?;
    Ok(a.traceless_inner(b)? / (a.norm_sq() * b.norm_sq()).sqrt())
}

/// Limit covariance `E Φ(A,i,j) Φ(B,k,l)`.
pub fn theoretical_cov(a: &Observable, (i, j): (usize, usize), b: &Observable, (k, l): (usize, usize), class: SymmetryClass) -> Result<f64> {
    let rho = normalized_correlation(a, b)?;
    let d = |x: usize, y: usize| if x == y { 1.0 } else { 0.0 };
    let kron = d(k, j) * d(l, i) + (2.0 / class.beta_f64() - 1.0) * d(k, i) * d(l, j);
    Ok(kron * rho)
}
