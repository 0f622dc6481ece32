//! Fourth moment of a diagonal overlap for a Rademacher matrix along Dyson
//! Brownian motion, on a geometric time grid.

use wigner_lab::dbm::{geometric_grid, relaxation_experiment, RelaxationSetup};
use wigner_lab::ensembles::{make_observable, EntryLaw, ObservableKind, SymmetryClass, WignerSpec};
use wigner_lab::overlaps::{MomentSpec, OverlapIndex};

fn main() -> wigner_lab::Result<()> {
    let n = 96;
    let i = n / 2 - 1;
    let obs = vec![make_observable(&ObservableKind::DiagSigns { block: None }, n, "A")?];
    let setup = RelaxationSetup {
        wigner: WignerSpec::new(n, SymmetryClass::Real, EntryLaw::Rademacher, 21),
        times: geometric_grid(n, 0.5, 3),
        specs: vec![MomentSpec::new("diag_fourth", vec![OverlapIndex::new(0, i, i); 4])],
        n_samples: 300,
        max_dt: None,
        phase_seed: 22,
        workers: None,
    };
    for row in relaxation_experiment(&setup, &obs)?.rows {
        println!("t = {:.4}  {:.3} +- {:.3}  (Gaussian value {:.0})", row.t, row.empirical, row.std_error, row.predicted);
    }
    Ok(())
}
