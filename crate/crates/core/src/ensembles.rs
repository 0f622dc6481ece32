//! Wigner ensembles and deterministic test observables.
//!
//! A [`WignerSpec`] fixes the dimension, symmetry class, entry law and seed;
//! [`WignerSpec::sample_at`] draws the matrix for one Monte-Carlo sample
//! index. Off-diagonal entries are `N^{-1/2} χ_od` with `E χ_od = 0`,
//! `E|χ_od|^2 = 1` (and `E χ_od^2 = 0` in the complex class); diagonal
//! entries are real with variance `diag_variance / N`.

use std::fmt;
use std::str::FromStr;

use faer::Mat;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::rng::{self, Purpose};

/// Dyson index: real symmetric (β = 1) or complex Hermitian (β = 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum SymmetryClass {
    Real,
    Complex,
}

impl SymmetryClass {
    pub fn beta(self) -> u8 {
        match self {
            SymmetryClass::Real => 1,
            SymmetryClass::Complex => 2,
        }
    }

    pub fn beta_f64(self) -> f64 {
        self.beta() as f64
    }
}

impl TryFrom<u8> for SymmetryClass {
    type Error = Error;

    fn try_from(beta: u8) -> Result<Self> {
        match beta {
            1 => Ok(SymmetryClass::Real),
            2 => Ok(SymmetryClass::Complex),
            other => config(format!("Dyson index must be 1 or 2, got {other}")),
        }
    }
}

impl From<SymmetryClass> for u8 {
    fn from(c: SymmetryClass) -> u8 {
        c.beta()
    }
}

/// Entry distribution family.
///
/// In the complex class `Uniform` is a uniform phase times a real Rademacher
/// sign, which keeps `E χ^2 = 0`; complex `Rademacher` is rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryLaw {
    Gaussian,
    Rademacher,
    Uniform,
}

impl EntryLaw {
    pub fn name(self) -> &'static str {
        match self {
            EntryLaw::Gaussian => "gaussian",
            EntryLaw::Rademacher => "rademacher",
            EntryLaw::Uniform => "uniform",
        }
    }

    fn check_class(self, class: SymmetryClass) -> Result<()> {
        if self == EntryLaw::Rademacher && class == SymmetryClass::Complex {
            return config("complex rademacher violates E χ² = 0; use 'uniform' for a non-Gaussian complex law");
        }
        Ok(())
    }

    /// Unit-variance real draw.
    fn real<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            EntryLaw::Gaussian => rng.sample(StandardNormal),
            EntryLaw::Rademacher => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            EntryLaw::Uniform => (2.0 * rng.gen::<f64>() - 1.0) * 3f64.sqrt(),
        }
    }

    /// Draw with `E|χ|^2 = 1`, `E χ^2 = 0`.
    fn complex<R: Rng + ?Sized>(self, rng: &mut R) -> Complex64 {
        match self {
            EntryLaw::Gaussian => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
            EntryLaw::Uniform | EntryLaw::Rademacher => {
                let theta = rng.gen::<f64>() * std::f64::consts::TAU;
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                Complex64::from_polar(sign, theta)
            }
        }
    }
}

impl FromStr for EntryLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(EntryLaw::Gaussian),
            "rademacher" => Ok(EntryLaw::Rademacher),
            "uniform" => Ok(EntryLaw::Uniform),
            other => config(format!("unsupported entry law '{other}'")),
        }
    }
}

impl fmt::Display for EntryLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerSpec {
    pub n: usize,
    pub class: SymmetryClass,
    pub law: EntryLaw,
    pub seed: u64,
    /// `E χ_d^2`; `None` means the Gaussian-ensemble value `2/β`.
    pub diag_variance: Option<f64>,
}

impl WignerSpec {
    pub fn new(n: usize, class: SymmetryClass, law: EntryLaw, seed: u64) -> Self {
        Self {
            n,
            class,
            law,
            seed,
            diag_variance: None,
        }
    }

    pub fn goe(n: usize, seed: u64) -> Self {
        Self::new(n, SymmetryClass::Real, EntryLaw::Gaussian, seed)
    }

    pub fn gue(n: usize, seed: u64) -> Self {
        Self::new(n, SymmetryClass::Complex, EntryLaw::Gaussian, seed)
    }

    pub fn diagonal_variance(&self) -> f64 {
        self.diag_variance.unwrap_or(2.0 / self.class.beta_f64())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return config(format!("matrix dimension must be at least 2, got {}", self.n));
        }
        if let Some(v) = self.diag_variance {
            if !(v.is_finite() && v >= 0.0) {
                return config(format!("diagonal variance must be finite and non-negative, got {v}"));
            }
        }
        self.law.check_class(self.class)
    }

    /// The matrix of Monte-Carlo sample `index` (sample 0 is [`sample_wigner`]).
    pub fn sample_at(&self, index: u64) -> Result<HermitianMatrix> {
        self.sample_attempt(index, 0)
    }

    /// Redraw used when sample `index` has to be rejected.
    pub fn sample_attempt(&self, index: u64, attempt: u64) -> Result<HermitianMatrix> {
        self.validate()?;
        let mut rng = rng::retry_stream(self.seed, Purpose::Matrix, index, attempt);
        Ok(self.draw(&mut rng))
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> HermitianMatrix {
        let n = self.n;
        let scale = 1.0 / (n as f64).sqrt();
        let dscale = (self.diagonal_variance()).sqrt() * scale;
        match self.class {
            SymmetryClass::Real => {
                let mut w = Mat::<f64>::zeros(n, n);
                for j in 0..n {
                    w.write(j, j, dscale * self.law.real(rng));
                    for i in j + 1..n {
                        let x = scale * self.law.real(rng);
                        w.write(i, j, x);
                        w.write(j, i, x);
                    }
                }
                HermitianMatrix::Real(w)
            }
            SymmetryClass::Complex => {
                let mut w = Mat::<Complex64>::zeros(n, n);
                for j in 0..n {
                    w.write(j, j, Complex64::new(dscale * self.law.real(rng), 0.0));
                    for i in j + 1..n {
                        let x = self.law.complex(rng) * scale;
                        w.write(i, j, x);
                        w.write(j, i, x.conj());
                    }
                }
                HermitianMatrix::Complex(w)
            }
        }
    }
}

/// Draws the Wigner matrix determined by `spec` (sample index 0).
pub fn sample_wigner(spec: &WignerSpec) -> Result<HermitianMatrix> {
    spec.sample_at(0)
}

/// Dense Hermitian matrix, stored real when the class allows it.
#[derive(Debug, Clone)]
pub enum HermitianMatrix {
    Real(Mat<f64>),
    Complex(Mat<Complex64>),
}

impl HermitianMatrix {
    pub fn n(&self) -> usize {
        match self {
            HermitianMatrix::Real(m) => m.nrows(),
            HermitianMatrix::Complex(m) => m.nrows(),
        }
    }

    pub fn class(&self) -> SymmetryClass {
        match self {
            HermitianMatrix::Real(_) => SymmetryClass::Real,
            HermitianMatrix::Complex(_) => SymmetryClass::Complex,
        }
    }

    pub fn real_from_fn(n: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        HermitianMatrix::Real(Mat::from_fn(n, n, f))
    }

    pub fn complex_from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        HermitianMatrix::Complex(Mat::from_fn(n, n, f))
    }

    pub fn zeros(n: usize, class: SymmetryClass) -> Self {
        match class {
            SymmetryClass::Real => HermitianMatrix::Real(Mat::zeros(n, n)),
            SymmetryClass::Complex => HermitianMatrix::Complex(Mat::zeros(n, n)),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self {
            HermitianMatrix::Real(m) => Complex64::new(m.read(i, j), 0.0),
            HermitianMatrix::Complex(m) => m.read(i, j),
        }
    }

    pub fn to_complex(&self) -> Mat<Complex64> {
        match self {
            HermitianMatrix::Real(m) => Mat::from_fn(m.nrows(), m.ncols(), |i, j| Complex64::new(m.read(i, j), 0.0)),
            HermitianMatrix::Complex(m) => m.clone(),
        }
    }

    /// `max |W_ij - conj(W_ji)|`.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max(self.get(i, j).norm());
            }
        }
        worst
    }

    /// Checks `W = W*` to `1e-12` relative to the largest entry.
    pub fn check_hermitian(&self) -> Result<()> {
        let tol = 1e-12 * self.max_abs().max(1.0);
        let asym = self.max_asymmetry();
        if asym > tol || !asym.is_finite() {
            return domain(format!("matrix is not Hermitian (max |W - W*| = {asym:e})"));
        }
        Ok(())
    }

    /// Off-diagonal entries `w_ab`, `a > b`, as a flat pool.
    pub fn off_diagonal(&self) -> Vec<Complex64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for b in 0..n {
            for a in b + 1..n {
                out.push(self.get(a, b));
            }
        }
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|a| self.get(a, a).re).collect()
    }
}

/// Catalog of deterministic test observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservableKind {
    /// `A = diag(s_1, …, s_N)` with `s_a = +1` when `⌊a / block⌋` is even,
    /// `-1` otherwise. The default block `⌊N/2⌋` gives `diag(+…+, −…−)`.
    DiagSigns { block: Option<usize> },
    /// `Σ_{α∈I} e_α e_α* − |I|/N` for the coordinate set `I = {0, …, size−1}`
    /// or an explicit index list.
    RankProjector {
        size: Option<usize>,
        indices: Option<Vec<usize>>,
    },
    /// Symmetrized GOE/GUE-like draw `(G + G*)/2`.
    RandomHermitian { class: SymmetryClass, seed: u64 },
}

/// A Hermitian test matrix with its traceless part cached.
#[derive(Debug, Clone)]
pub struct Observable {
    label: String,
    matrix: Mat<Complex64>,
    traceless: Mat<Complex64>,
    mean: f64,
    norm_sq: f64,
    /// Diagonal of `Å` when the observable is diagonal (enables O(N) overlaps).
    diagonal: Option<Vec<f64>>,
}

impl Observable {
    pub fn new(matrix: Mat<Complex64>, label: impl Into<String>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return domain("observable must be a non-empty square matrix");
        }
        let scale = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| matrix.read(i, j).norm())
            .fold(1.0f64, f64::max);
        for i in 0..n {
            for j in 0..=i {
                let d = (matrix.read(i, j) - matrix.read(j, i).conj()).norm();
                if d > 1e-12 * scale {
                    return domain(format!("observable is not Hermitian at ({i},{j}): defect {d:e}"));
                }
            }
        }
        let mean = (0..n).map(|a| matrix.read(a, a).re).sum::<f64>() / n as f64;
        let traceless = Mat::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(matrix.read(i, i).re - mean, 0.0)
            } else {
                matrix.read(i, j)
            }
        });
        let norm_sq = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| traceless.read(i, j).norm_sqr())
            .sum::<f64>()
            / n as f64;
        let is_diag = (0..n).all(|i| (0..n).all(|j| i == j || matrix.read(i, j) == Complex64::new(0.0, 0.0)));
        let diagonal = is_diag.then(|| (0..n).map(|a| traceless.read(a, a).re).collect());
        Ok(Self {
            label: label.into(),
            matrix,
            traceless,
            mean,
            norm_sq,
            diagonal,
        })
    }

    pub fn from_real_diagonal(diag: &[f64], label: impl Into<String>) -> Result<Self> {
        let n = diag.len();
        let m = Mat::from_fn(n, n, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { Complex64::new(0.0, 0.0) });
        Self::new(m, label)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.matrix
    }

    /// `Å = A − ⟨A⟩`.
    pub fn traceless(&self) -> &Mat<Complex64> {
        &self.traceless
    }

    /// `⟨A⟩ = N^{-1} Tr A`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `⟨Å²⟩`.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn traceless_diagonal(&self) -> Option<&[f64]> {
        self.diagonal.as_deref()
    }

    /// Errors when `⟨Å²⟩` vanishes (to relative machine precision).
    pub fn require_nontrivial(&self) -> Result<()> {
        if self.norm_sq <= 1e-28 * (1.0 + self.mean * self.mean) {
            return domain(format!(
                "observable '{}' has ⟨Å²⟩ = 0 (finite-rank/trivial observable)",
                self.label
            ));
        }
        Ok(())
    }

    /// `⟨Å B̊⟩`, real for Hermitian arguments.
    pub fn traceless_inner(&self, other: &Observable) -> Result<f64> {
        let n = self.n();
        if other.n() != n {
            return domain(format!("observable dimensions differ: {} vs {}", n, other.n()));
        }
        if let (Some(a), Some(b)) = (&self.diagonal, &other.diagonal) {
            return Ok(a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / n as f64);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.traceless.read(i, j) * other.traceless.read(j, i);
            }
        }
        Ok(acc.re / n as f64)
    }

    /// `Å v`.
    pub fn apply_traceless(&self, v: &[Complex64]) -> Vec<Complex64> {
        if let Some(d) = &self.diagonal {
            return d.iter().zip(v).map(|(a, x)| x * a).collect();
        }
        let n = self.n();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            let vj = v[j];
            if vj == Complex64::new(0.0, 0.0) {
                continue;
            }
            let col = self.traceless.col(j);
            for (i, o) in out.iter_mut().enumerate() {
                *o += col.read(i) * vj;
            }
        }
        out
    }

    /// Shifted copy `A + c·Id`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        let n = self.n();
        let m = Mat::from_fn(n, n, |i, j| {
            let x = self.matrix.read(i, j);
            if i == j {
                x + c
            } else {
                x
            }
        });
        Self::new(m, format!("{}+{c}", self.label))
    }
}

/// Builds an observable of the requested kind on `C^n`.
pub fn make_observable(kind: &ObservableKind, n: usize, label: impl Into<String>) -> Result<Observable> {
    if n == 0 {
        return domain("observable dimension must be positive");
    }
    let label = label.into();
    match kind {
        ObservableKind::DiagSigns { block } => {
            let block = block.unwrap_or((n / 2).max(1));
            if block == 0 {
                return domain("diag_signs block size must be positive");
            }
            let diag: Vec<f64> = (0..n).map(|a| if (a / block) % 2 == 0 { 1.0 } else { -1.0 }).collect();
            Observable::from_real_diagonal(&diag, label)
        }
        ObservableKind::RankProjector { size, indices } => {
            let set: Vec<usize> = match (indices, size) {
                (Some(idx), _) => idx.clone(),
                (None, Some(s)) => (0..*s).collect(),
                (None, None) => return domain("rank_projector needs `size` or `indices`"),
            };
            if set.is_empty() || set.len() > n {
                return domain(format!("rank_projector needs 1 ≤ |I| ≤ N, got |I| = {} with N = {n}", set.len()));
            }
            let mut diag = vec![-(set.len() as f64) / n as f64; n];
            for &a in &set {
                if a >= n {
                    return domain(format!("rank_projector index {a} out of range for N = {n}"));
                }
                diag[a] += 1.0;
            }
            let mut seen = set.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != set.len() {
                return domain("rank_projector indices must be distinct");
            }
            Observable::from_real_diagonal(&diag, label)
        }
        ObservableKind::RandomHermitian { class, seed } => {
            let mut rng = rng::stream(*seed, Purpose::Observable, 0);
            let g = match class {
                SymmetryClass::Real => Mat::from_fn(n, n, |_, _| {
                    let x: f64 = rng.sample(StandardNormal);
                    Complex64::new(x, 0.0)
                }),
                SymmetryClass::Complex => Mat::from_fn(n, n, |_, _| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                }),
            };
            let scale = 0.5 / (n as f64).sqrt();
            let m = Mat::from_fn(n, n, |i, j| (g.read(i, j) + g.read(j, i).conj()) * scale);
            Observable::new(m, label)
        }
    }
}

/// Empirical `(N·E|w|^2, N·E w^2)` over the off-diagonal entries of one matrix.
pub fn off_diagonal_moments(w: &HermitianMatrix) -> (f64, Complex64, usize) {
    let pool = w.off_diagonal();
    let n = w.n() as f64;
    let k = pool.len() as f64;
    let abs2 = pool.iter().map(|x| x.norm_sqr()).sum::<f64>() / k * n;
    let sq = pool.iter().map(|x| x * x).sum::<Complex64>() / k * n;
    (abs2, sq, pool.len())
}
