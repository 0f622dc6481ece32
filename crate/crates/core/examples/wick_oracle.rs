//! Wick predictions for overlap moments and the same moments on Haar frames.

use wigner_lab::ensembles::{make_observable, ObservableKind, SymmetryClass};
use wigner_lab::overlaps::{estimate_moments, wick_moment, HaarFrames, McOptions, MomentSpec, OverlapIndex};

fn main() -> wigner_lab::Result<()> {
    let n = 96;
    let obs = vec![make_observable(&ObservableKind::DiagSigns { block: None }, n, "A")?];
    let f = OverlapIndex::new;
    let specs = vec![
        MomentSpec::new("second", vec![f(0, 10, 10); 2]),
        MomentSpec::new("fourth", vec![f(0, 10, 10); 4]),
        MomentSpec::new("sixth", vec![f(0, 10, 10); 6]),
        MomentSpec::new("abs2", vec![f(0, 10, 11), f(0, 11, 10)]),
    ];
    for class in [SymmetryClass::Real, SymmetryClass::Complex] {
        println!("beta = {}", class.beta());
        for s in &specs {
            println!("  {:<7} wick {:+.3}", s.label, wick_moment(&s.factors, &obs, class)?.re);
        }
        for r in estimate_moments(&HaarFrames::new(n, class, 3), &specs, &obs, &McOptions::new(1000, 4))? {
            println!("  {:<7} haar {:+.3} +- {:.3}", r.label, r.empirical.re, r.std_error);
        }
    }
    Ok(())
}
