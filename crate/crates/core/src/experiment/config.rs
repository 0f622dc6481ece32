use std::collections::HashSet;
use std::path::{Path, PathBuf};

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ensembles::{make_observable, EntryLaw, Observable, ObservableKind, SymmetryClass, WignerSpec};
use crate::error::{Error, Result};
use crate::momentflow::{cardinality, ExchangeCounting, STATE_BUDGET};
use crate::overlaps::{BulkWindow, MomentSpec, OverlapIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Covariance,
    MixedMoments,
    KernelCheck,
    FlowRelaxation,
    EthCheck,
    LocalLaw,
    HaarOracle,
}

impl ExperimentKind {
    fn needs_ensemble(self) -> bool {
        self != Self::KernelCheck
    }

    fn needs_moments(self) -> bool {
        matches!(self, Self::Covariance | Self::MixedMoments | Self::HaarOracle | Self::FlowRelaxation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub n: usize,
    pub beta: SymmetryClass,
    #[serde(default = "gaussian")]
    pub law: EntryLaw,
    #[serde(default)]
    pub diag_variance: Option<f64>,
}

fn gaussian() -> EntryLaw {
    EntryLaw::Gaussian
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSection {
    pub label: String,
    #[serde(flatten)]
    pub kind: ObservableKind,
}

/// `factors = [["A", i, j], ...]` with 0-based indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentSection {
    pub label: String,
    pub factors: Vec<(String, usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSection {
    pub samples: usize,
    pub bulk_delta: f64,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self { samples: 2000, bulk_delta: 0.1 }
    }
}

/// Moment checks pass when `|empirical − predicted| ≤ sigma·SE + bias_c/N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcceptanceSection {
    pub sigma: f64,
    pub bias_c: f64,
}

impl Default for AcceptanceSection {
    fn default() -> Self {
        Self { sigma: 4.0, bias_c: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub n: usize,
    pub sites: usize,
    #[serde(default = "three")]
    pub evaluations: usize,
    #[serde(default)]
    pub counting: ExchangeCounting,
    #[serde(default = "hundred")]
    pub negativity_trials: usize,
    #[serde(default)]
    pub export_operator: bool,
}

fn three() -> usize {
    3
}

fn hundred() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelaxationSection {
    /// Grid `{0} ∪ {N^{−1+ε} 2^k : k < levels}`.
    pub epsilon: f64,
    pub levels: usize,
    pub max_dt: Option<f64>,
    pub require_non_increasing: bool,
}

impl Default for RelaxationSection {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            levels: 3,
            max_dt: None,
            require_non_increasing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsSection {
    /// Observable label; the first declared observable when absent.
    pub observable: Option<String>,
    pub samples: usize,
    pub xi: f64,
    pub bulk_fraction: f64,
    pub eta_exponent: f64,
    pub energies: Vec<f64>,
    pub pass_fraction: f64,
    pub eth_constant: f64,
    pub two_resolvent_factor: f64,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self {
            observable: None,
            samples: 100,
            xi: 0.3,
            bulk_fraction: 0.1,
            eta_exponent: -0.9,
            energies: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            pass_fraction: 0.95,
            eth_constant: 4.0,
            two_resolvent_factor: 1.5,
        }
    }
}

/// One experiment run, as read from a TOML document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub ensemble: Option<EnsembleSection>,
    #[serde(default)]
    pub observables: Vec<ObservableSection>,
    #[serde(default)]
    pub moments: Vec<MomentSection>,
    #[serde(default)]
    pub monte_carlo: MonteCarloSection,
    #[serde(default)]
    pub acceptance: AcceptanceSection,
    #[serde(default)]
    pub kernel: Option<KernelSection>,
    #[serde(default)]
    pub relaxation: RelaxationSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
}

/// Command-line overrides applied on top of the document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if o.workers.is_some() {
            self.workers = o.workers;
        }
        if let Some(p) = &o.out {
            self.output = Some(p.clone());
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// 16 hex digits of the SHA-256 of the resolved document, with the
    /// output path and worker count left out (neither changes results).
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("output");
            m.remove("workers");
        }
        let digest = Sha256::digest(v.to_string().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn wigner(&self) -> Option<WignerSpec> {
        self.ensemble.as_ref().map(|e| WignerSpec {
            n: e.n,
            class: e.beta,
            law: e.law,
            seed: self.seed,
            diag_variance: e.diag_variance,
        })
    }

    /// Checks every cross-reference and range and builds the objects the
    /// runner needs. Any failure is a configuration error.
    pub fn prepare(&self) -> Result<Prepared> {
        self.prepare_inner().map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        })
    }

    fn prepare_inner(&self) -> Result<Prepared> {
        if self.workers == Some(0) {
            return invalid("workers must be positive");
        }
        let kind = self.experiment;
        if kind == ExperimentKind::KernelCheck {
            let Some(k) = &self.kernel else {
                return invalid("kernel-check needs a [kernel] section");
            };
            check_kernel(k)?;
            return Ok(Prepared {
                wigner: None,
                observables: Vec::new(),
                specs: Vec::new(),
                diagnostic_observable: 0,
            });
        }
        let wigner = match (kind.needs_ensemble(), self.wigner()) {
            (true, None) => return invalid(format!("{kind:?} needs an [ensemble] section")),
            (_, w) => w,
        };
        let n = wigner.as_ref().map_or(0, |w| w.n);
        if let Some(w) = &wigner {
            w.validate()?;
        }
        let mut labels = HashSet::new();
        let mut observables = Vec::new();
        for o in &self.observables {
            if o.label.is_empty() || !labels.insert(o.label.as_str()) {
                return invalid(format!("observable label '{}' is empty or repeated", o.label));
            }
            let obs = make_observable(&o.kind, n, o.label.clone())?;
            obs.require_nontrivial()?;
            observables.push(obs);
        }
        let window = BulkWindow::new(self.monte_carlo.bulk_delta)?;
        let specs = self.moment_specs(&observables, n, window)?;
        if kind.needs_moments() && specs.is_empty() {
            return invalid(format!("{kind:?} needs at least one [[moments]] entry"));
        }
        match kind {
            ExperimentKind::Covariance | ExperimentKind::MixedMoments | ExperimentKind::HaarOracle => {
                if self.monte_carlo.samples < 100 {
                    return invalid(format!("monte_carlo.samples must be at least 100, got {}", self.monte_carlo.samples));
                }
            }
            ExperimentKind::FlowRelaxation => self.check_relaxation()?,
            _ => {}
        }
        if kind == ExperimentKind::Covariance {
            if let Some(s) = specs.iter().find(|s| s.order() != 2) {
                return invalid(format!("covariance moments have two factors; '{}' has {}", s.label, s.order()));
            }
        }
        if !(self.acceptance.sigma > 0.0 && self.acceptance.bias_c >= 0.0) {
            return invalid("acceptance needs sigma > 0 and bias_c ≥ 0");
        }
        let mut diagnostic_observable = 0;
        if matches!(kind, ExperimentKind::EthCheck | ExperimentKind::LocalLaw) {
            if observables.is_empty() {
                return invalid(format!("{kind:?} needs at least one observable"));
            }
            if let Some(l) = &self.diagnostics.observable {
                diagnostic_observable = observables
                    .iter()
                    .position(|o| o.label() == l)
                    .ok_or_else(|| Error::Config(format!("unknown observable '{l}' in [diagnostics]")))?;
            }
            self.check_diagnostics(n)?;
        }
        Ok(Prepared {
            wigner,
            observables,
            specs,
            diagnostic_observable,
        })
    }

    fn moment_specs(&self, observables: &[Observable], n: usize, window: BulkWindow) -> Result<Vec<MomentSpec>> {
        let mut labels = HashSet::new();
        let mut specs = Vec::new();
        for m in &self.moments {
            if m.label.is_empty() || !labels.insert(m.label.as_str()) {
                return invalid(format!("moment label '{}' is empty or repeated", m.label));
            }
            if m.factors.is_empty() {
                return invalid(format!("moment '{}' has no factors", m.label));
            }
            let mut factors = Vec::new();
            for (obs, i, j) in &m.factors {
                let id = observables
                    .iter()
                    .position(|o| o.label() == obs)
                    .ok_or_else(|| Error::Config(format!("moment '{}': unknown observable '{obs}'", m.label)))?;
                for idx in [*i, *j] {
                    if !window.contains(idx, n) {
                        return invalid(format!("moment '{}': index {idx} outside the bulk window (δ = {}, N = {n})", m.label, window.delta));
                    }
                }
                factors.push(OverlapIndex::new(id, *i, *j));
            }
            specs.push(MomentSpec::new(m.label.clone(), factors));
        }
        Ok(specs)
    }

    fn check_relaxation(&self) -> Result<()> {
        let r = &self.relaxation;
        if !(r.epsilon > 0.0 && r.epsilon < 1.0) {
            return invalid(format!("relaxation.epsilon must lie in (0, 1), got {}", r.epsilon));
        }
        if r.levels == 0 {
            return invalid("relaxation.levels must be positive");
        }
        if matches!(r.max_dt, Some(d) if !(d > 0.0 && d.is_finite())) {
            return invalid("relaxation.max_dt must be positive");
        }
        if self.monte_carlo.samples < 2 {
            return invalid("relaxation needs at least two samples");
        }
        Ok(())
    }

    fn check_diagnostics(&self, n: usize) -> Result<()> {
        let d = &self.diagnostics;
        if d.samples == 0 {
            return invalid("diagnostics.samples must be positive");
        }
        if !(d.bulk_fraction > 0.0 && d.bulk_fraction < 0.5) {
            return invalid(format!("diagnostics.bulk_fraction must lie in (0, 1/2), got {}", d.bulk_fraction));
        }
        if !(d.pass_fraction > 0.0 && d.pass_fraction <= 1.0) {
            return invalid("diagnostics.pass_fraction must lie in (0, 1]");
        }
        if !(d.eta_exponent < 0.0 && d.eta_exponent > -1.0) {
            return invalid(format!("diagnostics.eta_exponent must lie in (−1, 0), got {}", d.eta_exponent));
        }
        if self.experiment == ExperimentKind::LocalLaw && d.energies.is_empty() {
            return invalid("local-law needs at least one energy");
        }
        if let Some(e) = d.energies.iter().find(|e| !(e.abs() < 2.0)) {
            return invalid(format!("energy {e} is outside the spectrum (−2, 2)"));
        }
        if !(d.eth_constant > 0.0 && d.two_resolvent_factor > 0.0 && d.xi > 0.0) {
            return invalid("diagnostics thresholds must be positive");
        }
        if n < 4 {
            return invalid("diagnostics need N ≥ 4");
        }
        Ok(())
    }
}

fn check_kernel(k: &KernelSection) -> Result<()> {
    if k.n == 0 || k.sites < 2 {
        return invalid("kernel needs n ≥ 1 and sites ≥ 2");
    }
    if k.evaluations == 0 {
        return invalid("kernel.evaluations must be positive");
    }
    let card = cardinality(k.sites, k.n);
    if card.to_u64().map_or(true, |c| c > STATE_BUDGET) {
        return Err(Error::Resource {
            what: format!("configuration space (sites = {}, n = {})", k.sites, k.n),
            cardinality: card.to_string(),
            budget: STATE_BUDGET,
        });
    }
    Ok(())
}

/// Objects built from a validated configuration.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub wigner: Option<WignerSpec>,
    pub observables: Vec<Observable>,
    pub specs: Vec<MomentSpec>,
    /// Index into `observables` used by the spectral diagnostics.
    pub diagnostic_observable: usize,
}
