//! Eigendecomposition, semicircle reference quantities, resolvent products
//! and the rigidity / ETH diagnostics.

mod diagnostics;
mod resolvent;
mod semicircle;

pub use diagnostics::{
    eth_check, eth_from_rotated, rigidity_against, rigidity_check, rigidity_statistic, sample_diagnostics, two_resolvent_ratio, two_resolvent_ratios, DiagnosticRecord,
    EthReport, RigidityReport, SampleDiagnostics,
};
pub use resolvent::{observable_in_eigenbasis, resolvent_trace_product, ResolventFactor, ResolventKind, SpectralPoint};
pub use semicircle::SemicircleModel;

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::ensembles::{HermitianMatrix, SymmetryClass};
use crate::error::{Error, Result};

/// Gap below which a spectrum is treated as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-12;

/// Sorted spectral decomposition of one Hermitian matrix.
///
/// Eigenvectors are stored column-major; the largest-magnitude component of
/// each column is real and positive.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    vectors: Vec<Complex64>,
    n: usize,
    class: SymmetryClass,
}

impl EigenSystem {
    /// Builds an eigensystem from explicit data (e.g. a Haar frame or
    /// synthetic eigenvalues). Columns of `frame` are the eigenvectors.
    pub fn from_parts(eigenvalues: Vec<f64>, frame: &Mat<Complex64>, class: SymmetryClass) -> Result<Self> {
        let n = frame.nrows();
        if frame.ncols() != n || eigenvalues.len() != n {
            return Err(Error::Domain(format!(
                "eigensystem shape mismatch: {} eigenvalues, frame {}x{}",
                eigenvalues.len(),
                n,
                frame.ncols()
            )));
        }
        let mut vectors = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                vectors.push(frame.read(i, j));
            }
        }
        Ok(Self {
            eigenvalues,
            vectors,
            n,
            class,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn class(&self) -> SymmetryClass {
        self.class
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// The eigenvector `u_i` (0-based).
    pub fn vector(&self, i: usize) -> &[Complex64] {
        &self.vectors[i * self.n..(i + 1) * self.n]
    }

    pub fn frame(&self) -> Mat<Complex64> {
        Mat::from_fn(self.n, self.n, |i, j| self.vectors[j * self.n + i])
    }

    pub fn min_gap(&self) -> f64 {
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_simple(&self) -> bool {
        self.min_gap() >= DEGENERACY_GAP
    }

    /// `max_i ‖W u_i − λ_i u_i‖_max`.
    pub fn residual(&self, w: &HermitianMatrix) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            let u = self.vector(i);
            for a in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (b, ub) in u.iter().enumerate() {
                    acc += w.get(a, b) * ub;
                }
                worst = worst.max((acc - u[a] * self.eigenvalues[i]).norm());
            }
        }
        worst
    }

    /// `max |U*U − Id|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let ip = inner(self.vector(i), self.vector(j));
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).norm());
            }
        }
        worst
    }

    /// `⟨u_i, Å u_j⟩` for the traceless part of `obs`.
    pub fn overlap(&self, obs: &crate::ensembles::Observable, i: usize, j: usize) -> Complex64 {
        let ui = self.vector(i);
        let uj = self.vector(j);
        if let Some(d) = obs.traceless_diagonal() {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..self.n {
                acc += ui[a].conj() * uj[a] * d[a];
            }
            acc
        } else {
            inner(ui, &obs.apply_traceless(uj))
        }
    }
}

/// `⟨x, y⟩ = Σ conj(x_a) y_a`.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Rotates each column so its largest-magnitude component is real positive.
fn fix_phases(vectors: &mut [Complex64], n: usize) {
    for col in vectors.chunks_mut(n) {
        let mut best = 0usize;
        let mut best_abs = -1.0f64;
        for (a, x) in col.iter().enumerate() {
            let m = x.norm();
            if m > best_abs {
                best_abs = m;
                best = a;
            }
        }
        if best_abs > 0.0 {
            let rot = col[best].conj() / best_abs;
            for x in col.iter_mut() {
                *x *= rot;
            }
            col[best] = Complex64::new(col[best].re, 0.0);
        }
    }
}

/// Eigendecomposition with ascending eigenvalues and the phase convention above.
pub fn eigensolve(w: &HermitianMatrix) -> Result<EigenSystem> {
    w.check_hermitian()?;
    let n = w.n();
    let (eigenvalues, mut vectors) = match w {
        HermitianMatrix::Real(m) => {
            let evd = m.selfadjoint_eigendecomposition(Side::Lower);
            let s = evd.s().column_vector();
            let u = evd.u();
            let vals: Vec<f64> = (0..n).map(|i| s.read(i)).collect();
            let mut vecs = Vec::with_capacity(n * n);
            for j in 0..n {
                for i in 0..n {
                    vecs.push(Complex64::new(u.read(i, j), 0.0));
                }
            }
            (vals, vecs)
        }
        HermitianMatrix::Complex(m) => {
            let evd = m.selfadjoint_eigendecomposition(Side::Lower);
            let s = evd.s().column_vector();
            let u = evd.u();
            let vals: Vec<f64> = (0..n).map(|i| s.read(i).re).collect();
            let mut vecs = Vec::with_capacity(n * n);
            for j in 0..n {
                for i in 0..n {
                    vecs.push(u.read(i, j));
                }
            }
            (vals, vecs)
        }
    };
    if eigenvalues.iter().any(|x| !x.is_finite()) || vectors.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::Numeric("eigensolver produced non-finite output".into()));
    }
    if eigenvalues.windows(2).any(|p| p[1] < p[0]) {
        return Err(Error::Numeric("eigenvalues not sorted ascending".into()));
    }
    fix_phases(&mut vectors, n);
    Ok(EigenSystem {
        eigenvalues,
        vectors,
        n,
        class: w.class(),
    })
}
