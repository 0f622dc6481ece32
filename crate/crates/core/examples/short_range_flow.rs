//! Evolves random data and a pairing function under the moment flow with
//! rates taken from a GOE spectrum.

use rand::Rng;
use wigner_lab::dbm::environment_rates;
use wigner_lab::ensembles::WignerSpec;
use wigner_lab::momentflow::{build_generator, chi_values, flow_evolve, perfect_matchings, pi_weights, ExchangeCounting, Integrator, PairFilter, StateSpace};
use wigner_lab::rng::{stream, Purpose};
use wigner_lab::spectral::eigensolve;

fn main() -> wigner_lab::Result<()> {
    let (sites, n) = (5, 2);
    let space = StateSpace::enumerate(sites, n)?;
    let es = eigensolve(&WignerSpec::goe(sites, 5).sample_at(0)?)?;
    let rates = environment_rates(&es)?;
    let pi = pi_weights(&space);
    let counting = ExchangeCounting::Symmetric;

    let short = build_generator(&space, &rates, &PairFilter::short_range(1, None), counting)?;
    let mut rng = stream(6, Purpose::InitialData, 0);
    let g0: Vec<f64> = (0..space.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let traj = flow_evolve(&short, &pi, &g0, &[0.0, 0.1, 1.0, 10.0], Integrator::Exact)?;
    println!("short range: sup-norm ratio {:.4}, L2 non-increasing {}", traj.linf_ratio(), traj.l2_nonincreasing(1e-12));

    let full = build_generator(&space, &rates, &PairFilter::all(), counting)?;
    for pm in perfect_matchings(2 * n)? {
        let chi: Vec<f64> = chi_values(&space, &pm)?;
        let traj = flow_evolve(&full, &pi, &chi, &[0.0, 1.0], Integrator::Exact)?;
        println!("pairing {pm:?}: drift {:.2e}", traj.max_drift());
    }
    Ok(())
}
