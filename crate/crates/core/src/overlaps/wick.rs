use num_complex::Complex64;

use super::{theoretical_cov, OverlapIndex};
use crate::ensembles::{Observable, SymmetryClass};
use crate::error::{domain, Result};
use crate::momentflow::perfect_matchings;

/// Limit-field moment `E ∏_k Φ(A_k, i_k, j_k)` by Isserlis' theorem: zero for
/// an odd number of factors, otherwise a sum over perfect matchings of the
/// factors of products of pairwise covariances.
pub fn wick_moment(factors: &[OverlapIndex], observables: &[Observable], class: SymmetryClass) -> Result<Complex64> {
    for f in factors {
        let Some(obs) = observables.get(f.observable) else {
            return domain(format!("unknown observable id {}", f.observable));
        };
        obs.require_nontrivial()?;
    }
    let p = factors.len();
    if p % 2 == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // Pairwise covariance table, reused across matchings.
    let mut cov = vec![0.0f64; p * p];
    for a in 0..p {
        for b in a + 1..p {
            let fa = factors[a];
            let fb = factors[b];
            let c = theoretical_cov(&observables[fa.observable], (fa.i, fa.j), &observables[fb.observable], (fb.i, fb.j), class)?;
            cov[a * p + b] = c;
            cov[b * p + a] = c;
        }
    }
    let mut total = 0.0;
    for pm in perfect_matchings(p)? {
        total += pm.pairs().map(|(a, b)| cov[a * p + b]).product::<f64>();
    }
    Ok(Complex64::new(total, 0.0))
}
