use faer::Mat;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::ensembles::SymmetryClass;
use crate::rng::{stream, Purpose};

/// Draws a Haar-distributed orthogonal (real class) or unitary (complex
/// class) matrix: QR of a Ginibre matrix, then `Q ← Q · diag(r_ii / |r_ii|)`
/// so that the factorization is unique and the law is exactly Haar.
pub fn haar_frame<R: Rng + ?Sized>(n: usize, class: SymmetryClass, rng: &mut R) -> Mat<Complex64> {
    match class {
        SymmetryClass::Real => {
            let g = Mat::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
            let qr = g.qr();
            let q = qr.compute_q();
            let r = qr.compute_r();
            Mat::from_fn(n, n, |i, j| {
                let s = if r.read(j, j) < 0.0 { -1.0 } else { 1.0 };
                Complex64::new(q.read(i, j) * s, 0.0)
            })
        }
        SymmetryClass::Complex => {
            let g = Mat::<faer::complex_native::c64>::from_fn(n, n, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                faer::complex_native::c64::new(re, im)
            });
            let qr = g.qr();
            let q = qr.compute_q();
            let r = qr.compute_r();
            let rot: Vec<Complex64> = (0..n)
                .map(|j| {
                    let d = r.read(j, j);
                    let d = Complex64::new(d.re, d.im);
                    if d.norm() > 0.0 {
                        d / d.norm()
                    } else {
                        Complex64::new(1.0, 0.0)
                    }
                })
                .collect();
            Mat::from_fn(n, n, |i, j| {
                let x = q.read(i, j);
                Complex64::new(x.re, x.im) * rot[j]
            })
        }
    }
}

/// Frame source whose sample `index` is a Haar frame keyed by `(seed, index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaarFrames {
    pub n: usize,
    pub class: SymmetryClass,
    pub seed: u64,
}

impl HaarFrames {
    pub fn new(n: usize, class: SymmetryClass, seed: u64) -> Self {
        Self { n, class, seed }
    }

    pub fn frame_at(&self, index: u64) -> Mat<Complex64> {
        haar_frame(self.n, self.class, &mut stream(self.seed, Purpose::Frame, index))
    }
}
