//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release --test acceptance`; append `-- 4 9` to
//! run selected criteria only. The process exits nonzero when any
//! criterion fails.

use std::time::Instant;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Signed;
use rand::Rng;
use rayon::prelude::*;

use wigner_lab::dbm::{advance_to, environment_rates, geometric_grid, off_diagonal_pool, relaxation_experiment, FlowMode, FlowState, RelaxationSetup};
use wigner_lab::ensembles::{make_observable, EntryLaw, Observable, ObservableKind, SymmetryClass, WignerSpec};
use wigner_lab::momentflow::{
    ansatz_values, build_generator, chi_values, flow_evolve, kernel_check, negativity_check, perfect_matchings, pi_weights, random_rational,
    random_traces, reversibility_check, verify_chi_expansion, ExchangeCounting, Integrator, PairFilter, Rates, StateSpace,
};
use wigner_lab::overlaps::{reports_from_values, sample_values, wick_moment, HaarFrames, McOptions, MomentReport, MomentSpec, OverlapIndex, WignerFrames};
use wigner_lab::rng::{stream, Purpose};
use wigner_lab::spectral::{eigensolve, sample_diagnostics, SemicircleModel, SpectralPoint};

type Q = BigRational;

const SPACES: [(usize, usize); 5] = [(3, 1), (4, 1), (3, 2), (4, 2), (3, 3)];
const COUNTING: ExchangeCounting = ExchangeCounting::Symmetric;

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn report(id: u32, pass: bool, detail: String) -> Outcome {
    println!("criterion {id:>2} {} {detail}", if pass { "PASS" } else { "FAIL" });
    Outcome { id, pass, detail }
}

fn spaces() -> Vec<StateSpace> {
    SPACES.iter().map(|&(s, n)| StateSpace::enumerate(s, n).unwrap()).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut pairs = 0;
    let mut bad = Vec::new();
    for space in spaces() {
        for e in 0..3u64 {
            let traces = random_traces(2 * space.n(), &mut stream(101, Purpose::Indeterminate, e));
            let values = ansatz_values(&space, &traces).unwrap();
            for r in kernel_check(&space, &values, COUNTING).unwrap() {
                pairs += 1;
                if !r.residual_zero {
                    bad.push(format!("({},{}) pair {:?} at {}", r.sites, r.n, r.pair, r.witness.unwrap_or_default()));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(1, bad.is_empty() && secs < 60.0, format!("{pairs} pair checks, {} nonzero residuals, {secs:.2}s (limit 60s)", bad.len()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rev_bad = 0;
    let mut max_form = f64::NEG_INFINITY;
    let mut neg_ok = true;
    for (k, space) in spaces().iter().enumerate() {
        rev_bad += reversibility_check(space, COUNTING).unwrap().iter().filter(|r| !r.residual_zero).count();
        let mut rng = stream(202, Purpose::Indeterminate, k as u64);
        let rates: Rates<Q> = Rates::from_fn(space.n_sites(), |_, _| random_rational(&mut rng, 4, 11).abs());
        let neg = negativity_check(space, &rates, COUNTING, 100, &mut rng).unwrap();
        max_form = max_form.max(neg.max_form);
        neg_ok &= neg.all_nonpositive;
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        2,
        rev_bad == 0 && neg_ok && secs < 60.0,
        format!("{rev_bad} non-reversible pairs, max <f, Lf>_pi = {max_form:.3e} over 5 x 100 trials, {secs:.2}s (limit 60s)"),
    )
}

fn criterion_3() -> Outcome {
    let mut stationary = 0;
    let mut failures = Vec::new();
    for space in spaces() {
        if space.n() <= 2 {
            for pm in perfect_matchings(2 * space.n()).unwrap() {
                let values: Vec<Q> = chi_values(&space, &pm).unwrap();
                if kernel_check(&space, &values, COUNTING).unwrap().iter().all(|r| r.residual_zero) {
                    stationary += 1;
                } else {
                    failures.push(format!("chi {pm:?} on ({}, {})", space.n_sites(), space.n()));
                }
            }
        }
        let traces = random_traces(2 * space.n(), &mut stream(303, Purpose::Indeterminate, space.len() as u64));
        if let Err(e) = verify_chi_expansion(&space, &traces) {
            failures.push(e.to_string());
        }
    }
    report(3, failures.is_empty(), format!("{stationary} stationary chi functions, expansion checked on 5 spaces, failures: {failures:?}"))
}

/// Specs shared by criteria 4 to 8; `i` and `j` are bulk indices.
fn moment_specs(i: usize, j: usize) -> Vec<MomentSpec> {
    let f = OverlapIndex::new;
    vec![
        MomentSpec::new("diag_second", vec![f(0, i, i); 2]),
        MomentSpec::new("offdiag_abs2", vec![f(0, i, j), f(0, j, i)]),
        MomentSpec::new("offdiag_square", vec![f(0, i, j); 2]),
        MomentSpec::new("diag_fourth", vec![f(0, i, i); 4]),
        MomentSpec::new("mixed_third", vec![f(0, i, i), f(2, i, j), f(2, j, i)]),
        MomentSpec::new("cross_AB", vec![f(0, i, i), f(1, i, i)]),
        MomentSpec::new("diag_second_B", vec![f(1, i, i); 2]),
        MomentSpec::new("cross_ij", vec![f(0, i, i), f(0, j, j)]),
        MomentSpec::new("diag_second_j", vec![f(0, j, j); 2]),
    ]
}

fn observables(n: usize) -> Vec<Observable> {
    vec![
        make_observable(&ObservableKind::DiagSigns { block: None }, n, "A").unwrap(),
        make_observable(&ObservableKind::DiagSigns { block: Some(n / 4) }, n, "B").unwrap(),
        make_observable(&ObservableKind::RankProjector { size: Some(n / 3), indices: None }, n, "P").unwrap(),
    ]
}

struct ClassRun {
    class: SymmetryClass,
    wigner: Vec<MomentReport>,
    haar: Vec<MomentReport>,
}

fn class_run(class: SymmetryClass, n: usize, m: usize, obs: &[Observable], specs: &[MomentSpec]) -> ClassRun {
    let opts = McOptions::new(m, 404 + class.beta() as u64);
    let predicted: Vec<Complex64> = specs.iter().map(|s| wick_moment(&s.factors, obs, class).unwrap()).collect();
    let wig = WignerFrames {
        spec: WignerSpec::new(n, class, EntryLaw::Gaussian, 40 + class.beta() as u64),
    };
    let wv = sample_values(&wig, specs, obs, &opts).unwrap();
    let hv = sample_values(&HaarFrames::new(n, class, 50 + class.beta() as u64), specs, obs, &opts).unwrap();
    ClassRun {
        class,
        wigner: reports_from_values(specs, &wv, &predicted).unwrap(),
        haar: reports_from_values(specs, &hv, &predicted).unwrap(),
    }
}

fn get<'a>(r: &'a [MomentReport], label: &str) -> &'a MomentReport {
    r.iter().find(|x| x.label == label).unwrap()
}

fn within(r: &MomentReport, target: Complex64, bias: f64) -> (bool, String) {
    let dev = (r.empirical - target).norm();
    let tol = 4.0 * r.std_error + bias;
    (
        dev <= tol,
        format!("{} = {:.4}{:+.4}i vs {:.4} (|dev| {dev:.4}, tol {tol:.4})", r.label, r.empirical.re, r.empirical.im, target.re),
    )
}

fn class_name(c: SymmetryClass) -> &'static str {
    match c {
        SymmetryClass::Real => "GOE",
        SymmetryClass::Complex => "GUE",
    }
}

fn criterion_4(runs: &[ClassRun], n: usize) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for run in runs {
        let (ok, s) = within(get(&run.wigner, "diag_second"), Complex64::new(2.0 / run.class.beta() as f64, 0.0), 10.0 / n as f64);
        pass &= ok;
        parts.push(format!("{}: {s}", class_name(run.class)));
    }
    report(4, pass, parts.join("; "))
}

fn criterion_5(runs: &[ClassRun], n: usize) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for run in runs {
        let checks = match run.class {
            SymmetryClass::Complex => vec![
                within(get(&run.wigner, "offdiag_abs2"), Complex64::new(1.0, 0.0), 10.0 / n as f64),
                within(get(&run.wigner, "offdiag_square"), Complex64::new(0.0, 0.0), 0.0),
            ],
            SymmetryClass::Real => vec![within(get(&run.wigner, "offdiag_square"), Complex64::new(1.0, 0.0), 10.0 / n as f64)],
        };
        for (ok, s) in checks {
            pass &= ok;
            parts.push(format!("{}: {s}", class_name(run.class)));
        }
    }
    report(5, pass, parts.join("; "))
}

fn criterion_6(runs: &[ClassRun], n: usize) -> Outcome {
    let goe = runs.iter().find(|r| r.class == SymmetryClass::Real).unwrap();
    let fourth = get(&goe.wigner, "diag_fourth");
    let third = get(&goe.wigner, "mixed_third");
    let (a, sa) = within(fourth, Complex64::new(12.0, 0.0), 40.0 / n as f64);
    let (b, sb) = within(third, third.predicted, 0.0);
    report(6, a && b, format!("GOE: {sa}; {sb}"))
}

/// Empirical correlation `E XY / √(E X² E Y²)` and its standard error.
fn correlation(r: &[MomentReport], cross: &str, x2: &str, y2: &str) -> (f64, f64) {
    let norm = (get(r, x2).empirical.re * get(r, y2).empirical.re).sqrt();
    let c = get(r, cross);
    (c.empirical.re / norm, c.std_error / norm)
}

fn criterion_7(runs: &[ClassRun]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for run in runs {
        for (cross, x2, y2) in [("cross_AB", "diag_second", "diag_second_B"), ("cross_ij", "diag_second", "diag_second_j")] {
            let (c, se) = correlation(&run.wigner, cross, x2, y2);
            pass &= c.abs() <= 4.0 * se;
            parts.push(format!("{} {cross}: corr {c:+.4} (4 SE {:.4})", class_name(run.class), 4.0 * se));
        }
    }
    report(7, pass, parts.join("; "))
}

fn criterion_8(runs: &[ClassRun]) -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_label = String::new();
    let mut count = 0;
    let mut pass = true;
    for run in runs {
        for (w, h) in run.wigner.iter().zip(&run.haar) {
            let z = (w.empirical - h.empirical).norm() / (w.std_error.powi(2) + h.std_error.powi(2)).sqrt();
            count += 1;
            pass &= z <= 4.0;
            if z > worst {
                worst = z;
                worst_label = format!("{} {}", class_name(run.class), w.label);
            }
        }
    }
    report(8, pass, format!("{count} Wigner/Haar comparisons, largest gap {worst:.2} combined SE ({worst_label}), limit 4"))
}

fn criterion_9() -> Outcome {
    let n = 512;
    let nf = n as f64;
    let samples = 100u64;
    let eth_samples = 20u64;
    let a = make_observable(&ObservableKind::DiagSigns { block: None }, n, "A").unwrap();
    let quantiles = SemicircleModel::new(0.0).unwrap().quantiles(n);
    let eta = nf.powf(-0.9);
    let points: Vec<SpectralPoint> = [-1.0, -0.5, 0.0, 0.5, 1.0].iter().map(|&e| SpectralPoint::new(e, eta).unwrap()).collect();
    let eth_threshold = 4.0 * nf.ln().sqrt();
    let mut pass = true;
    let mut parts = Vec::new();
    for class in [SymmetryClass::Real, SymmetryClass::Complex] {
        let frames = WignerFrames {
            spec: WignerSpec::new(n, class, EntryLaw::Gaussian, 90 + class.beta() as u64),
        };
        let diags: Vec<_> = (0..samples)
            .into_par_iter()
            .map(|k| {
                let es = wigner_lab::overlaps::FrameSource::eigensystem(&frames, k).unwrap();
                sample_diagnostics(&es, &a, &quantiles, 0.3, &points, (k < eth_samples).then_some(0.1)).unwrap()
            })
            .collect();
        let rigid = diags.iter().filter(|d| d.rigidity.pass).count() as f64 / samples as f64;
        let ratios: Vec<f64> = diags.iter().flat_map(|d| d.two_resolvent.iter().copied()).collect();
        let over = ratios.iter().filter(|&&r| r > 1.5).count();
        let worst = ratios.iter().copied().fold(0.0, f64::max);
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let eth: Vec<f64> = diags.iter().filter_map(|d| d.eth.map(|e| e.max_scaled_overlap)).collect();
        let eth_frac = eth.iter().filter(|&&v| v <= eth_threshold).count() as f64 / eth.len() as f64;
        pass &= rigid >= 0.95 && over == 0 && eth_frac >= 0.95;
        parts.push(format!(
            "{}: rigidity {:.0}% within N^0.3; two-resolvent {over}/{} evaluations above 1.5 (max {worst:.2}, mean {mean:.2}); ETH {:.0}% within {eth_threshold:.2}",
            class_name(class),
            100.0 * rigid,
            ratios.len(),
            100.0 * eth_frac
        ));
    }
    report(9, pass, parts.join("; "))
}

fn criterion_10() -> Outcome {
    // OU moment preservation on pooled off-diagonal entries.
    let n = 128;
    let paths = 40u64;
    let spec = WignerSpec::goe(n, 1010);
    let finals: Vec<_> = (0..paths)
        .into_par_iter()
        .map(|p| {
            let st = FlowState::new(spec.sample_at(p).unwrap(), 1011, p);
            advance_to(st, 0.5, 1e-3, FlowMode::Ou).unwrap().matrix
        })
        .collect();
    let (mean, second, count) = off_diagonal_pool(&finals);
    let mean_rel = mean.norm() * (n as f64).sqrt();
    let var_rel = (second - 1.0).abs();
    let ou_ok = mean_rel <= 1e-2 && var_rel <= 1e-2;

    // L∞ behaviour of the short-range flow and stationarity of χ data.
    let mut runs = 0;
    let mut contracting = 0;
    let mut worst_ratio = 0.0f64;
    let mut max_drift = 0.0f64;
    for (sites, order) in [(4, 1), (5, 1), (4, 2), (5, 2)] {
        let space = StateSpace::enumerate(sites, order).unwrap();
        let es = eigensolve(&WignerSpec::goe(sites, 1020 + sites as u64).sample_at(0).unwrap()).unwrap();
        let rates = environment_rates(&es).unwrap();
        let pi = pi_weights(&space);
        let short = build_generator(&space, &rates, &PairFilter::short_range(1, None), COUNTING).unwrap();
        let checkpoints = [0.0, 0.05, 0.2, 1.0, 5.0];
        for trial in 0..5u64 {
            let mut rng = stream(1030, Purpose::InitialData, (sites * 100 + order * 10) as u64 + trial);
            let g0: Vec<f64> = (0..space.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let traj = flow_evolve(&short, &pi, &g0, &checkpoints, Integrator::Exact).unwrap();
            runs += 1;
            if traj.linf_contracts(1e-9) {
                contracting += 1;
            }
            worst_ratio = worst_ratio.max(traj.linf_ratio());
        }
        if order <= 2 {
            let full = build_generator(&space, &rates, &PairFilter::all(), COUNTING).unwrap();
            let dt = 0.09 / full.inf_norm();
            for pm in perfect_matchings(2 * order).unwrap() {
                let chi: Vec<f64> = chi_values(&space, &pm).unwrap();
                let traj = flow_evolve(&full, &pi, &chi, &[0.0, 0.5, 1.0], Integrator::Rk4 { dt }).unwrap();
                max_drift = max_drift.max(traj.max_drift());
            }
        }
    }
    let linf_ok = contracting == runs;
    let chi_ok = max_drift <= 1e-8;
    report(
        10,
        ou_ok && linf_ok && chi_ok,
        format!(
            "OU pool of {count} entries: |mean| sqrt(N) = {mean_rel:.2e}, |N E|w|^2 - 1| = {var_rel:.2e} (limit 1e-2) [{}]; \
             short-range L-inf contraction on {contracting}/{runs} runs, worst ||g_t||/||g_0|| = {worst_ratio:.4} [{}]; \
             chi drift {max_drift:.2e} (limit 1e-8) [{}]",
            ok(ou_ok),
            ok(linf_ok),
            ok(chi_ok)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "fails"
    }
}

fn criterion_11() -> Outcome {
    let n = 256;
    let i = n / 2 - 1;
    let obs = vec![make_observable(&ObservableKind::DiagSigns { block: None }, n, "A").unwrap()];
    let setup = RelaxationSetup {
        wigner: WignerSpec::new(n, SymmetryClass::Real, EntryLaw::Rademacher, 1111),
        times: geometric_grid(n, 0.5, 1),
        specs: vec![MomentSpec::new("diag_fourth", vec![OverlapIndex::new(0, i, i); 4])],
        n_samples: 1000,
        max_dt: None,
        phase_seed: 1112,
        workers: None,
    };
    let rep = relaxation_experiment(&setup, &obs).unwrap();
    let t1 = setup.times[1];
    let r0 = rep.row(0.0, "diag_fourth").unwrap();
    let r1 = rep.row(t1, "diag_fourth").unwrap();
    let limit = r0.deviation() + 4.0 * (r0.std_error.powi(2) + r1.std_error.powi(2)).sqrt();
    report(
        11,
        r1.deviation() <= limit,
        format!(
            "deviation from 12 at t = 0: {:.3} (SE {:.3}); at t = {t1:.4}: {:.3} (SE {:.3}); limit {limit:.3}",
            r0.deviation(),
            r0.std_error,
            r1.deviation(),
            r1.std_error
        ),
    )
}

fn main() {
    let start = Instant::now();
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: u32| selected.is_empty() || selected.contains(&k);
    let mut out = Vec::new();
    if wanted(1) {
        out.push(criterion_1());
    }
    if wanted(2) {
        out.push(criterion_2());
    }
    if wanted(3) {
        out.push(criterion_3());
    }
    if (4..=8).any(wanted) {
        let n = 256;
        let obs = observables(n);
        let specs = moment_specs(n / 2 - 1, n / 2);
        let runs: Vec<ClassRun> = [SymmetryClass::Complex, SymmetryClass::Real].iter().map(|&c| class_run(c, n, 2000, &obs, &specs)).collect();
        let shared: [(u32, &dyn Fn() -> Outcome); 5] = [
            (4, &|| criterion_4(&runs, n)),
            (5, &|| criterion_5(&runs, n)),
            (6, &|| criterion_6(&runs, n)),
            (7, &|| criterion_7(&runs)),
            (8, &|| criterion_8(&runs)),
        ];
        out.extend(shared.iter().filter(|(k, _)| wanted(*k)).map(|(_, f)| f()));
    }
    if wanted(9) {
        out.push(criterion_9());
    }
    if wanted(10) {
        out.push(criterion_10());
    }
    if wanted(11) {
        out.push(criterion_11());
    }

    let failed: Vec<u32> = out.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    println!(
        "acceptance: {}/{} criteria pass in {:.0}s",
        out.len() - failed.len(),
        out.len(),
        start.elapsed().as_secs_f64()
    );
    for o in out.iter().filter(|o| !o.pass) {
        eprintln!("criterion {} failed: {}", o.id, o.detail);
    }
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
