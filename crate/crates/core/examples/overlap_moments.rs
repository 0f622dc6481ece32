//! Monte Carlo moments of rescaled overlaps against the Gaussian prediction.

use wigner_lab::ensembles::{make_observable, EntryLaw, ObservableKind, SymmetryClass, WignerSpec};
use wigner_lab::overlaps::{estimate_moments, McOptions, MomentSpec, OverlapIndex, WignerFrames};

fn main() -> wigner_lab::Result<()> {
    let n = 128;
    let class = SymmetryClass::Real;
    let obs = vec![
        make_observable(&ObservableKind::DiagSigns { block: None }, n, "A")?,
        make_observable(&ObservableKind::RankProjector { size: Some(n / 3), indices: None }, n, "P")?,
    ];
    let (i, j) = (n / 2 - 1, n / 2);
    let f = OverlapIndex::new;
    let specs = vec![
        MomentSpec::new("diag_second", vec![f(0, i, i); 2]),
        MomentSpec::new("offdiag_square", vec![f(0, i, j); 2]),
        MomentSpec::new("diag_fourth", vec![f(0, i, i); 4]),
        MomentSpec::new("cross_AP", vec![f(0, i, i), f(1, i, i)]),
    ];
    let frames = WignerFrames {
        spec: WignerSpec::new(n, class, EntryLaw::Gaussian, 11),
    };
    for r in estimate_moments(&frames, &specs, &obs, &McOptions::new(500, 12))? {
        println!("{:<15} {:+.4} +- {:.4}   predicted {:+.4}", r.label, r.empirical.re, r.std_error, r.predicted.re);
    }
    Ok(())
}
