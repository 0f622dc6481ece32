//! Batch experiments driven by a TOML document.
//!
//! [`run`] validates the whole configuration before touching the output
//! directory, then dispatches to one of the suites and writes CSV/JSON
//! artifacts. Every CSV row and JSON report carries the configuration hash.

mod config;

pub use config::{
    AcceptanceSection, DiagnosticsSection, EnsembleSection, ExperimentConfig, ExperimentKind, KernelSection, MomentSection, MonteCarloSection,
    ObservableSection, Overrides, Prepared, RelaxationSection,
};

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use num_traits::Signed;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::dbm::{geometric_grid, relaxation_experiment, RelaxationSetup};
use crate::error::{Error, Result};
use crate::momentflow::{
    ansatz_values, build_generator, kernel_check, negativity_check, random_rational, random_traces, reversibility_check, PairFilter, PairReport,
    Rates, StateSpace,
};
use crate::overlaps::{estimate_moments, FrameSource, HaarFrames, McOptions, MomentReport, WignerFrames};
use crate::pool::with_workers;
use crate::rng::{stream, Purpose};
use crate::spectral::{sample_diagnostics, DiagnosticRecord, SemicircleModel, SpectralPoint};

/// One acceptance line. Only enforced checks decide the exit code.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub enforced: bool,
}

impl Check {
    fn enforced(name: impl Into<String>, statistic: f64, threshold: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            statistic,
            threshold,
            pass,
            enforced: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub config_hash: String,
    pub checks: Vec<Check>,
    /// Records that could not be evaluated (e.g. a sample whose spectrum
    /// stayed degenerate after resampling).
    pub numeric_failures: usize,
    pub artifacts: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().filter(|c| c.enforced).all(|c| c.pass)
    }

    /// 0 pass, 1 acceptance failure, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        if self.numeric_failures > 0 {
            3
        } else if self.passed() {
            0
        } else {
            1
        }
    }
}

/// Exit code of a failed run: 3 for numeric failures, 2 otherwise.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Numeric(_) => 3,
        _ => 2,
    }
}

/// Structured error report, as printed by the command-line runner.
pub fn error_report(e: &Error) -> serde_json::Value {
    let kind = match e {
        Error::Config(_) => "config",
        Error::Domain(_) => "domain",
        Error::Numeric(_) => "numeric",
        Error::Resource { .. } => "resource",
        Error::Io(_) => "io",
    };
    json!({ "error": kind, "message": e.to_string(), "exit_code": error_exit_code(e) })
}

/// Loads, overrides and runs a configuration file.
pub fn run_file(path: &Path, overrides: &Overrides) -> Result<RunOutcome> {
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.apply(overrides);
    run(&cfg)
}

struct Artifacts {
    dir: PathBuf,
    hash: String,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let path = self.dir.join(name);
        let f = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(f, value).map_err(|e| Error::Io(e.into()))?;
        self.written.push(path);
        Ok(())
    }

    /// Writes a CSV whose first column is the configuration hash.
    fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(csv_io)?;
        let mut head = vec!["config_hash"];
        head.extend_from_slice(header);
        w.write_record(&head).map_err(csv_io)?;
        for row in rows {
            let mut r = vec![self.hash.clone()];
            r.extend(row);
            w.write_record(&r).map_err(csv_io)?;
        }
        w.flush()?;
        self.written.push(path);
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::new(std::io::ErrorKind::Other, e))
}

/// Runs one experiment. Nothing is written unless the configuration
/// validates.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let prepared = cfg.prepare()?;
    let hash = cfg.hash();
    let resolved = json!({ "config_hash": hash, "config": cfg });
    log::info!("resolved config: {resolved}");
    log::info!("seed {} hash {hash}", cfg.seed);
    let dir = cfg.output_dir();
    fs::create_dir_all(&dir)?;
    let mut art = Artifacts {
        dir,
        hash: hash.clone(),
        written: Vec::new(),
    };
    art.json("resolved_config.json", &resolved)?;
    let result = match cfg.experiment {
        ExperimentKind::Covariance | ExperimentKind::MixedMoments => moments(cfg, &prepared, &mut art),
        ExperimentKind::HaarOracle => haar_oracle(cfg, &prepared, &mut art),
        ExperimentKind::KernelCheck => kernel(cfg, &mut art),
        ExperimentKind::FlowRelaxation => relaxation(cfg, &prepared, &mut art),
        ExperimentKind::EthCheck | ExperimentKind::LocalLaw => diagnostics(cfg, &prepared, &mut art),
    };
    let (checks, numeric_failures) = match result {
        Ok(v) => v,
        Err(e) => {
            art.json("error.json", &error_report(&e))?;
            return Err(e);
        }
    };
    let mut outcome = RunOutcome {
        config_hash: hash,
        checks,
        numeric_failures,
        artifacts: Vec::new(),
    };
    art.json(
        "summary.json",
        &json!({
            "config_hash": outcome.config_hash,
            "experiment": cfg.experiment,
            "seed": cfg.seed,
            "checks": outcome.checks,
            "numeric_failures": outcome.numeric_failures,
            "passed": outcome.passed(),
            "exit_code": outcome.exit_code(),
        }),
    )?;
    outcome.artifacts = art.written;
    Ok(outcome)
}

type Checks = (Vec<Check>, usize);

fn mc_options(cfg: &ExperimentConfig) -> McOptions {
    let mut o = McOptions::new(cfg.monte_carlo.samples, cfg.seed);
    o.workers = cfg.workers;
    o.window.delta = cfg.monte_carlo.bulk_delta;
    o
}

fn report_rows<'a>(source: Option<&'a str>, reports: &'a [MomentReport]) -> impl Iterator<Item = Vec<String>> + 'a {
    reports.iter().map(move |r| {
        let mut row = vec![r.label.clone()];
        row.extend(source.map(str::to_string));
        row.extend(r.csv_record());
        row
    })
}

fn moments(cfg: &ExperimentConfig, p: &Prepared, art: &mut Artifacts) -> Result<Checks> {
    let wigner = p.wigner.as_ref().expect("validated");
    let reports = estimate_moments(&WignerFrames { spec: wigner.clone() }, &p.specs, &p.observables, &mc_options(cfg))?;
    let mut header = vec!["label"];
    header.extend(MomentReport::csv_header());
    art.csv("moments.csv", &header, report_rows(None, &reports))?;
    art.json("moments.json", &json!({ "config_hash": art.hash, "reports": reports }))?;
    let bias = cfg.acceptance.bias_c / wigner.n as f64;
    let checks = reports
        .iter()
        .map(|r| {
            let threshold = cfg.acceptance.sigma * r.std_error + bias;
            let dev = (r.empirical - r.predicted).norm();
            Check::enforced(&r.label, dev, threshold, dev <= threshold)
        })
        .collect();
    Ok((checks, 0))
}

fn haar_oracle(cfg: &ExperimentConfig, p: &Prepared, art: &mut Artifacts) -> Result<Checks> {
    let wigner = p.wigner.as_ref().expect("validated");
    let opts = mc_options(cfg);
    let wig = estimate_moments(&WignerFrames { spec: wigner.clone() }, &p.specs, &p.observables, &opts)?;
    let haar = estimate_moments(&HaarFrames::new(wigner.n, wigner.class, cfg.seed), &p.specs, &p.observables, &opts)?;
    let mut header = vec!["label", "source"];
    header.extend(MomentReport::csv_header());
    let rows: Vec<Vec<String>> = report_rows(Some("wigner"), &wig).chain(report_rows(Some("haar"), &haar)).collect();
    art.csv("moments.csv", &header, rows)?;
    art.json("moments.json", &json!({ "config_hash": art.hash, "wigner": wig, "haar": haar }))?;
    let checks = wig
        .iter()
        .zip(&haar)
        .map(|(w, h)| {
            let threshold = cfg.acceptance.sigma * (w.std_error.powi(2) + h.std_error.powi(2)).sqrt();
            let dev = (w.empirical - h.empirical).norm();
            Check::enforced(&w.label, dev, threshold, dev <= threshold)
        })
        .collect();
    Ok((checks, 0))
}

fn pair_rows<'a>(check: &'a str, evaluation: &'a str, reports: &'a [PairReport]) -> impl Iterator<Item = Vec<String>> + 'a {
    reports.iter().map(move |r| {
        vec![
            check.to_string(),
            evaluation.to_string(),
            r.pair.0.to_string(),
            r.pair.1.to_string(),
            r.residual_zero.to_string(),
            r.max_residual.to_string(),
        ]
    })
}

fn kernel(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Checks> {
    let k = cfg.kernel.as_ref().expect("validated");
    let space = StateSpace::enumerate(k.sites, k.n)?;
    let mut evaluations = Vec::new();
    for e in 0..k.evaluations {
        let traces = random_traces(2 * k.n, &mut stream(cfg.seed, Purpose::Indeterminate, e as u64));
        let values = ansatz_values(&space, &traces)?;
        evaluations.push(kernel_check(&space, &values, k.counting)?);
    }
    let reversibility = reversibility_check(&space, k.counting)?;
    let mut rng = stream(cfg.seed, Purpose::InitialData, 0);
    let rates = Rates::from_fn(k.sites, |_, _| random_rational(&mut rng, 5, 13).abs());
    let negativity = negativity_check(&space, &rates, k.counting, k.negativity_trials, &mut rng)?;

    let labels: Vec<String> = (0..k.evaluations).map(|e| e.to_string()).collect();
    let mut rows: Vec<Vec<String>> = Vec::new();
    for (e, reps) in evaluations.iter().enumerate() {
        rows.extend(pair_rows("kernel", &labels[e], reps));
    }
    rows.extend(pair_rows("reversibility", "", &reversibility));
    art.csv("kernel.csv", &["check", "evaluation", "i", "j", "residual_zero", "max_residual"], rows)?;
    art.json(
        "kernel_report.json",
        &json!({
            "config_hash": art.hash,
            "states": space.len(),
            "counting": k.counting,
            "kernel": evaluations,
            "reversibility": reversibility,
            "negativity": negativity,
        }),
    )?;
    if k.export_operator {
        let op = build_generator(&space, &Rates::uniform(k.sites), &PairFilter::all(), k.counting)?;
        let path = art.dir.join("generator.coo");
        op.write_coo(BufWriter::new(File::create(&path)?))?;
        art.written.push(path);
    }
    let kernel_max = evaluations.iter().flatten().map(|r| r.max_residual).fold(0.0, f64::max);
    let rev_max = reversibility.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    Ok((
        vec![
            Check::enforced("kernel", kernel_max, 0.0, evaluations.iter().flatten().all(|r| r.residual_zero)),
            Check::enforced("reversibility", rev_max, 0.0, reversibility.iter().all(|r| r.residual_zero)),
            Check::enforced("negativity", negativity.max_form, 0.0, negativity.all_nonpositive),
        ],
        0,
    ))
}

fn relaxation(cfg: &ExperimentConfig, p: &Prepared, art: &mut Artifacts) -> Result<Checks> {
    let wigner = p.wigner.clone().expect("validated");
    let r = &cfg.relaxation;
    let setup = RelaxationSetup {
        times: geometric_grid(wigner.n, r.epsilon, r.levels),
        wigner,
        specs: p.specs.clone(),
        n_samples: cfg.monte_carlo.samples,
        max_dt: r.max_dt,
        phase_seed: cfg.seed,
        workers: cfg.workers,
    };
    let report = relaxation_experiment(&setup, &p.observables)?;
    art.csv(
        "relaxation.csv",
        &["t", "moment_id", "empirical", "std_error", "predicted"],
        report
            .rows
            .iter()
            .map(|row| vec![row.t.to_string(), row.moment_id.clone(), row.empirical.to_string(), row.std_error.to_string(), row.predicted.to_string()]),
    )?;
    art.json("relaxation.json", &json!({ "config_hash": art.hash, "times": setup.times, "trends": report.trends }))?;
    let checks = report
        .trends
        .iter()
        .map(|t| {
            // Largest excess of a later deviation over the initial one, in
            // units of the combined standard error.
            let excess = t
                .deviations
                .iter()
                .zip(&t.std_errors)
                .map(|(d, s)| (d - t.deviations[0]) / (s * s + t.std_errors[0].powi(2)).sqrt().max(f64::MIN_POSITIVE))
                .fold(f64::NEG_INFINITY, f64::max);
            Check {
                name: format!("trend:{}", t.moment_id),
                statistic: excess,
                threshold: 4.0,
                pass: t.non_increasing,
                enforced: r.require_non_increasing,
            }
        })
        .collect();
    Ok((checks, 0))
}

struct DiagRow {
    check: &'static str,
    sample: usize,
    energy: Option<f64>,
    record: DiagnosticRecord,
}

fn diagnostics(cfg: &ExperimentConfig, p: &Prepared, art: &mut Artifacts) -> Result<Checks> {
    let wigner = p.wigner.clone().expect("validated");
    let d = &cfg.diagnostics;
    let n = wigner.n;
    let nf = n as f64;
    let a = &p.observables[p.diagnostic_observable];
    let local_law = cfg.experiment == ExperimentKind::LocalLaw;
    let quantiles = if local_law { SemicircleModel::new(0.0)?.quantiles(n) } else { vec![0.0; n] };
    let eta = nf.powf(d.eta_exponent);
    let points = if local_law {
        d.energies.iter().map(|&e| SpectralPoint::new(e, eta)).collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let eth_bulk = (!local_law).then_some(d.bulk_fraction);
    let frames = WignerFrames { spec: wigner };
    let per_sample = with_workers(cfg.workers, || {
        (0..d.samples as u64)
            .into_par_iter()
            .map(|k| frames.eigensystem(k).and_then(|es| sample_diagnostics(&es, a, &quantiles, d.xi, &points, eth_bulk)))
            .collect::<Vec<_>>()
    })?;

    let eth_threshold = d.eth_constant * nf.ln().sqrt();
    let mut rows = Vec::new();
    let mut failures = 0;
    for (k, res) in per_sample.into_iter().enumerate() {
        let s = match res {
            Ok(s) => s,
            Err(e @ Error::Numeric(_)) => {
                log::warn!("sample {k}: {e}");
                failures += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        if local_law {
            let r = s.rigidity;
            rows.push(DiagRow {
                check: "rigidity",
                sample: k,
                energy: None,
                record: DiagnosticRecord {
                    check: "rigidity".into(),
                    parameters: json!({ "sample": k, "xi": d.xi, "argmax": r.argmax }),
                    statistic: r.max_scaled_deviation,
                    threshold: r.threshold,
                    pass: r.pass,
                },
            });
            for (pt, ratio) in points.iter().zip(&s.two_resolvent) {
                rows.push(DiagRow {
                    check: "two_resolvent",
                    sample: k,
                    energy: Some(pt.energy),
                    record: DiagnosticRecord {
                        check: "two_resolvent".into(),
                        parameters: json!({ "sample": k, "energy": pt.energy, "eta": pt.eta }),
                        statistic: *ratio,
                        threshold: d.two_resolvent_factor,
                        pass: *ratio <= d.two_resolvent_factor,
                    },
                });
            }
        }
        if let Some(e) = s.eth {
            rows.push(DiagRow {
                check: "eth",
                sample: k,
                energy: None,
                record: DiagnosticRecord {
                    check: "eth".into(),
                    parameters: json!({ "sample": k, "bulk_fraction": d.bulk_fraction, "argmax": e.argmax }),
                    statistic: e.max_scaled_overlap,
                    threshold: eth_threshold,
                    pass: e.max_scaled_overlap <= eth_threshold,
                },
            });
        }
    }
    art.csv(
        "diagnostics.csv",
        &["check", "sample", "energy", "statistic", "threshold", "pass"],
        rows.iter().map(|r| {
            vec![
                r.check.to_string(),
                r.sample.to_string(),
                r.energy.map(|e| e.to_string()).unwrap_or_default(),
                r.record.statistic.to_string(),
                r.record.threshold.to_string(),
                r.record.pass.to_string(),
            ]
        }),
    )?;
    let records: Vec<&DiagnosticRecord> = rows.iter().map(|r| &r.record).collect();
    art.json("diagnostics.json", &json!({ "config_hash": art.hash, "records": records }))?;

    let fraction = |check: &str| {
        let mine: Vec<_> = rows.iter().filter(|r| r.check == check).collect();
        mine.iter().filter(|r| r.record.pass).count() as f64 / d.samples as f64
    };
    let mut checks = Vec::new();
    if local_law {
        let f = fraction("rigidity");
        checks.push(Check::enforced("rigidity_fraction", f, d.pass_fraction, f >= d.pass_fraction));
        let worst = rows.iter().filter(|r| r.check == "two_resolvent").map(|r| r.record.statistic).fold(0.0, f64::max);
        let all = rows.iter().filter(|r| r.check == "two_resolvent").all(|r| r.record.pass);
        checks.push(Check::enforced("two_resolvent_max", worst, d.two_resolvent_factor, all));
    } else {
        let f = fraction("eth");
        checks.push(Check::enforced("eth_fraction", f, d.pass_fraction, f >= d.pass_fraction));
    }
    Ok((checks, failures))
}
