use num_complex::Complex64;

use crate::error::{domain, Result};

/// Semicircle law of variance `1 + t`, the spectral density of `W + B_t/√N`
/// for a standard Wigner matrix `W`.
///
/// `ρ_t(x) = √(4(1+t) − x²) / (2π(1+t))` on `[−2√(1+t), 2√(1+t)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemicircleModel {
    time: f64,
}

const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
    0.236_926_885_056_189_08,
];

impl SemicircleModel {
    pub fn new(time: f64) -> Result<Self> {
        if !(time.is_finite() && time >= 0.0) {
            return domain(format!("semicircle time must be a finite t ≥ 0, got {time}"));
        }
        Ok(Self { time })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn variance(&self) -> f64 {
        1.0 + self.time
    }

    /// Right edge `2√(1+t)`.
    pub fn edge(&self) -> f64 {
        2.0 * self.variance().sqrt()
    }

    pub fn density(&self, x: f64) -> f64 {
        let r2 = 4.0 * self.variance();
        if x * x >= r2 {
            0.0
        } else {
            (r2 - x * x).sqrt() / (2.0 * std::f64::consts::PI * self.variance())
        }
    }

    /// Mass density in the angle `φ` of `x = −r cos φ`: `(2/π) sin² φ`,
    /// smooth where `ρ_t` has square-root edges.
    fn angular_density(phi: f64) -> f64 {
        2.0 / std::f64::consts::PI * phi.sin().powi(2)
    }

    fn gauss_legendre(a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        GL_NODES
            .iter()
            .zip(GL_WEIGHTS.iter())
            .map(|(x, w)| w * Self::angular_density(mid + half * x))
            .sum::<f64>()
            * half
    }

    fn adaptive(a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let mid = 0.5 * (a + b);
        let left = Self::gauss_legendre(a, mid);
        let right = Self::gauss_legendre(mid, b);
        if depth == 0 || (left + right - whole).abs() <= tol {
            return left + right;
        }
        Self::adaptive(a, mid, left, 0.5 * tol, depth - 1) + Self::adaptive(mid, b, right, 0.5 * tol, depth - 1)
    }

    /// `∫_{−∞}^x ρ_t` by adaptive Gauss–Legendre quadrature in the angle variable.
    pub fn cdf(&self, x: f64) -> f64 {
        let r = self.edge();
        if x <= -r {
            return 0.0;
        }
        if x >= r {
            return 1.0;
        }
        let phi = (-x / r).acos();
        Self::adaptive(0.0, phi, Self::gauss_legendre(0.0, phi), 1e-15, 30)
    }

    /// Stieltjes transform `m_t(z) = ∫ ρ_t(x)/(x − z) dx`, the root of
    /// `(1+t) m² + z m + 1 = 0` with `Im m · Im z > 0`.
    pub fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 || !z.im.is_finite() || !z.re.is_finite() {
            return domain(format!("Stieltjes transform needs Im z ≠ 0, got {z}"));
        }
        let v = self.variance();
        let disc = (z * z - 4.0 * v).sqrt();
        // Larger root first for accuracy, the other from the root product 1/v.
        let r1 = (-z - disc) / (2.0 * v);
        let r2 = (-z + disc) / (2.0 * v);
        let big = if r1.norm() >= r2.norm() { r1 } else { r2 };
        let small = 1.0 / (v * big);
        let m = if big.im * z.im > 0.0 { big } else { small };
        Ok(m)
    }

    /// Classical location `γ_i` with `∫_{−∞}^{γ_i} ρ_t = i/N`, for `1 ≤ i ≤ N`.
    pub fn quantile(&self, i: usize, n: usize) -> Result<f64> {
        if n == 0 || i == 0 || i > n {
            return domain(format!("quantile index must satisfy 1 ≤ i ≤ N, got i = {i}, N = {n}"));
        }
        Ok(self.invert_cdf(i as f64 / n as f64))
    }

    /// All quantiles `γ_1, …, γ_N`.
    pub fn quantiles(&self, n: usize) -> Vec<f64> {
        // γ_{N−i} = −γ_i; the lower half is found left to right, each search
        // starting at the previous location.
        let mut q = vec![0.0; n];
        let mut lo = -self.edge();
        for i in 1..=n / 2 {
            let g = self.invert_from(i as f64 / n as f64, lo);
            q[i - 1] = g;
            lo = g;
        }
        for i in n / 2 + 1..=n {
            q[i - 1] = if i == n { self.edge() } else { -q[n - i - 1] };
        }
        q
    }

    fn invert_cdf(&self, p: f64) -> f64 {
        self.invert_from(p, -self.edge())
    }

    fn invert_from(&self, p: f64, start: f64) -> f64 {
        let r = self.edge();
        if p >= 1.0 {
            return r;
        }
        if p <= 0.0 {
            return -r;
        }
        if (p - 0.5).abs() < 1e-16 {
            return 0.0;
        }
        let (mut lo, mut hi) = (start.max(-r), r);
        while hi - lo > 1e-11 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed-form semicircle distribution function, independent of the quadrature.
    fn cdf_closed(t: f64, x: f64) -> f64 {
        let r = 2.0 * (1.0 + t).sqrt();
        let x = x.clamp(-r, r);
        0.5 + x * (r * r - x * x).sqrt() / (std::f64::consts::PI * r * r) + (x / r).asin() / std::f64::consts::PI
    }

    #[test]
    fn median_is_zero() {
        let m = SemicircleModel::new(0.0).unwrap();
        assert_eq!(m.quantile(50, 100).unwrap(), 0.0);
        assert_eq!(m.quantile(100, 100).unwrap(), 2.0);
    }

    #[test]
    fn stieltjes_at_i() {
        let m = SemicircleModel::new(0.0).unwrap();
        let v = m.stieltjes(Complex64::new(0.0, 1.0)).unwrap();
        let expect = Complex64::new(0.0, (5f64.sqrt() - 1.0) / 2.0);
        assert!((v - expect).norm() < 1e-15);
        assert!(m.stieltjes(Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn stieltjes_residual_and_branch() {
        for t in [0.0, 0.3, 2.0] {
            let m = SemicircleModel::new(t).unwrap();
            for &(re, im) in &[(0.0, 1e-3), (1.5, -0.2), (-2.5, 0.01), (10.0, 5.0), (0.3, -1e-6), (-1.0, 1e-9)] {
                let z = Complex64::new(re, im);
                let s = m.stieltjes(z).unwrap();
                let res = (1.0 + t) * s * s + z * s + 1.0;
                assert!(res.norm() < 1e-12, "t={t} z={z} res={res}");
                assert!(s.im * z.im > 0.0);
            }
        }
    }

    #[test]
    fn density_has_unit_mass() {
        for t in [0.0, 0.5, 3.0] {
            let m = SemicircleModel::new(t).unwrap();
            assert!((m.cdf(m.edge() * (1.0 - 1e-15)) - 1.0).abs() < 1e-8);
            assert!((m.cdf(0.0) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_matches_closed_form() {
        for t in [0.0, 1.0] {
            let m = SemicircleModel::new(t).unwrap();
            let r = m.edge();
            for k in 0..=40 {
                let x = -r + 2.0 * r * k as f64 / 40.0;
                assert!((m.cdf(x) - cdf_closed(t, x)).abs() < 1e-11, "t={t} x={x}");
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let m = SemicircleModel::new(0.25).unwrap();
        let n = 64;
        for (k, g) in m.quantiles(n).iter().enumerate() {
            let p = (k + 1) as f64 / n as f64;
            assert!((cdf_closed(0.25, *g) - p).abs() < 1e-8, "i={} γ={g}", k + 1);
        }
        assert!(m.quantile(0, n).is_err());
        assert!(m.quantile(n + 1, n).is_err());
    }

    #[test]
    fn negative_time_rejected() {
        assert!(SemicircleModel::new(-0.1).is_err());
    }
}
