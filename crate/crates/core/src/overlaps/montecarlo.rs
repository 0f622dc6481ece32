use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{phi_unchecked, wick_moment, BulkWindow, HaarFrames, MomentSpec, PhaseVector};
use crate::ensembles::{Observable, SymmetryClass, WignerSpec};
use crate::error::{domain, Error, Result};
use crate::pool::with_workers;
use crate::rng::{stream, Purpose};
use crate::spectral::{eigensolve, EigenSystem};
use crate::stats::ComplexAccumulator;

/// Resampling budget for near-degenerate spectra.
const MAX_ATTEMPTS: u64 = 8;

/// Something that yields one orthonormal eigenbasis per sample index.
pub trait FrameSource: Sync {
    fn n(&self) -> usize;
    fn class(&self) -> SymmetryClass;
    fn eigensystem(&self, index: u64) -> Result<EigenSystem>;
}

/// Eigenbases of independent Wigner matrices.
#[derive(Debug, Clone)]
pub struct WignerFrames {
    pub spec: WignerSpec,
}

impl FrameSource for WignerFrames {
    fn n(&self) -> usize {
        self.spec.n
    }

    fn class(&self) -> SymmetryClass {
        self.spec.class
    }

    fn eigensystem(&self, index: u64) -> Result<EigenSystem> {
        for attempt in 0..MAX_ATTEMPTS {
            let es = eigensolve(&self.spec.sample_attempt(index, attempt)?)?;
            if es.is_simple() {
                return Ok(es);
            }
            log::debug!("sample {index}: degenerate spectrum, resampling");
        }
        Err(Error::Numeric(format!("sample {index}: degenerate spectrum after {MAX_ATTEMPTS} attempts")))
    }
}

impl FrameSource for HaarFrames {
    fn n(&self) -> usize {
        self.n
    }

    fn class(&self) -> SymmetryClass {
        self.class
    }

    /// The eigenvalues are placeholders (`0, 1, …, N−1`); only the frame
    /// carries information.
    fn eigensystem(&self, index: u64) -> Result<EigenSystem> {
        let vals = (0..self.n).map(|i| i as f64).collect();
        EigenSystem::from_parts(vals, &self.frame_at(index), self.class)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McOptions {
    pub n_samples: usize,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    pub window: BulkWindow,
    pub phase_seed: u64,
}

impl McOptions {
    pub fn new(n_samples: usize, phase_seed: u64) -> Self {
        Self {
            n_samples,
            workers: None,
            window: BulkWindow::default(),
            phase_seed,
        }
    }
}

/// Empirical moment paired with its Gaussian-field prediction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub label: String,
    pub spec_hash: String,
    pub spec: MomentSpec,
    pub empirical: Complex64,
    pub std_error: f64,
    pub predicted: Complex64,
    pub n_samples: usize,
}

impl MomentReport {
    /// `|empirical − predicted| ≤ k·SE + bias`.
    pub fn within(&self, k: f64, bias: f64) -> bool {
        (self.empirical - self.predicted).norm() <= k * self.std_error + bias
    }

    pub fn csv_header() -> [&'static str; 8] {
        ["spec_hash", "p", "empirical_re", "empirical_im", "std_error", "predicted_re", "predicted_im", "n_samples"]
    }

    pub fn csv_record(&self) -> [String; 8] {
        [
            self.spec_hash.clone(),
            self.spec.order().to_string(),
            self.empirical.re.to_string(),
            self.empirical.im.to_string(),
            self.std_error.to_string(),
            self.predicted.re.to_string(),
            self.predicted.im.to_string(),
            self.n_samples.to_string(),
        ]
    }
}

/// Short stable hash of a moment specification.
pub fn spec_hash(spec: &MomentSpec) -> String {
    let bytes = serde_json::to_vec(spec).expect("moment spec serializes");
    let digest = Sha256::digest(bytes);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn validate(specs: &[MomentSpec], observables: &[Observable], n: usize, window: Option<BulkWindow>) -> Result<()> {
    for s in specs {
        if s.factors.is_empty() {
            return domain(format!("moment '{}' has no factors", s.label));
        }
        for f in &s.factors {
            let Some(obs) = observables.get(f.observable) else {
                return domain(format!("moment '{}': unknown observable id {}", s.label, f.observable));
            };
            if obs.n() != n {
                return domain(format!("observable '{}' has dimension {}, expected {n}", obs.label(), obs.n()));
            }
            obs.require_nontrivial()?;
            for idx in [f.i, f.j] {
                if idx >= n {
                    return domain(format!("moment '{}': index {idx} out of range for N = {n}", s.label));
                }
                if let Some(w) = window {
                    if !w.contains(idx, n) {
                        return domain(format!("moment '{}': index {idx} outside the bulk window (δ = {})", s.label, w.delta));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Per-sample values `∏ Φ` for every spec: `values[sample][spec]`.
///
/// Sample `k` uses frame `k` of the source and phases keyed by
/// `(phase_seed, k)`; output does not depend on the worker count.
pub fn sample_values(source: &dyn FrameSource, specs: &[MomentSpec], observables: &[Observable], opts: &McOptions) -> Result<Vec<Vec<Complex64>>> {
    let n = source.n();
    validate(specs, observables, n, None)?;
    let scales: Vec<f64> = observables.iter().map(|o| (n as f64 / o.norm_sq()).sqrt()).collect();
    let class = source.class();
    with_workers(opts.workers, || {
        (0..opts.n_samples as u64)
            .into_par_iter()
            .map(|k| {
                let es = source.eigensystem(k)?;
                let phases = PhaseVector::sample(n, class, &mut stream(opts.phase_seed, Purpose::Phases, k));
                Ok(specs
                    .iter()
                    .map(|s| {
                        s.factors
                            .iter()
                            .map(|f| phi_unchecked(&es, &phases, &observables[f.observable], f.i, f.j, scales[f.observable]))
                            .product()
                    })
                    .collect())
            })
            .collect::<Result<Vec<Vec<Complex64>>>>()
    })?
}

/// Aggregates per-sample values into reports, in sample order.
pub fn reports_from_values(specs: &[MomentSpec], values: &[Vec<Complex64>], predicted: &[Complex64]) -> Result<Vec<MomentReport>> {
    if predicted.len() != specs.len() {
        return domain("one prediction per moment spec is required");
    }
    if values.len() < 2 {
        return domain("at least two samples are required");
    }
    let mut accs = vec![ComplexAccumulator::new(); specs.len()];
    for row in values {
        if row.len() != specs.len() {
            return domain("sample row length does not match the spec list");
        }
        for (acc, &v) in accs.iter_mut().zip(row) {
            acc.push(v);
        }
    }
    Ok(specs
        .iter()
        .zip(accs)
        .zip(predicted)
        .map(|((s, acc), &p)| MomentReport {
            label: s.label.clone(),
            spec_hash: spec_hash(s),
            spec: s.clone(),
            empirical: acc.mean(),
            std_error: acc.std_error(),
            predicted: p,
            n_samples: acc.count(),
        })
        .collect())
}

/// Monte-Carlo estimate of each spec against its Wick prediction.
pub fn estimate_moments(source: &dyn FrameSource, specs: &[MomentSpec], observables: &[Observable], opts: &McOptions) -> Result<Vec<MomentReport>> {
    if opts.n_samples < 100 {
        return domain(format!("at least 100 samples are required, got {}", opts.n_samples));
    }
    validate(specs, observables, source.n(), Some(opts.window))?;
    let predicted = specs
        .iter()
        .map(|s| wick_moment(&s.factors, observables, source.class()))
        .collect::<Result<Vec<_>>>()?;
    let values = sample_values(source, specs, observables, opts)?;
    reports_from_values(specs, &values, &predicted)
}

/// Mixed overlap moments over eigenbases of the given Wigner ensemble.
/// All indices must lie in the bulk window.
pub fn mc_mixed_moments(specs: &[MomentSpec], observables: &[Observable], wigner: &WignerSpec, opts: &McOptions) -> Result<Vec<MomentReport>> {
    wigner.validate()?;
    estimate_moments(&WignerFrames { spec: wigner.clone() }, specs, observables, opts)
}

/// The same estimator over Haar-distributed frames.
pub fn haar_frame_moments(specs: &[MomentSpec], observables: &[Observable], n: usize, class: SymmetryClass, seed: u64, opts: &McOptions) -> Result<Vec<MomentReport>> {
    estimate_moments(&HaarFrames::new(n, class, seed), specs, observables, opts)
}
