//! Samples a GUE matrix, diagonalizes it and compares the spectrum with the
//! semicircle quantiles.

use wigner_lab::ensembles::WignerSpec;
use wigner_lab::spectral::{eigensolve, rigidity_check, SemicircleModel};

fn main() -> wigner_lab::Result<()> {
    let n = 400;
    let w = WignerSpec::gue(n, 7).sample_at(0)?;
    let es = eigensolve(&w)?;
    println!("residual {:.2e}, orthonormality defect {:.2e}", es.residual(&w), es.orthonormality_defect());

    let model = SemicircleModel::new(0.0)?;
    let q = model.quantiles(n);
    for i in [0, n / 4, n / 2, 3 * n / 4, n - 1] {
        println!("lambda_{i:<3} = {:+.4}   gamma = {:+.4}", es.eigenvalues()[i], q[i]);
    }
    let rig = rigidity_check(&es, &model, 0.3)?;
    println!("rigidity statistic {:.2} at index {} (threshold {:.2})", rig.max_scaled_deviation, rig.argmax, rig.threshold);
    Ok(())
}
