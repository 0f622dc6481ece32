//! Exact checks of the moment flow generator over rationals: the trace
//! ansatz is annihilated by every pair generator, each pair generator is
//! reversible, and the full generator is nonpositive.

use num_traits::Signed;
use wigner_lab::momentflow::{
    ansatz_values, kernel_check, negativity_check, random_rational, random_traces, reversibility_check, ExchangeCounting, Rates, StateSpace,
};
use wigner_lab::rng::{stream, Purpose};

fn main() -> wigner_lab::Result<()> {
    let counting = ExchangeCounting::Symmetric;
    for (sites, n) in [(3, 1), (4, 2), (3, 3)] {
        let space = StateSpace::enumerate(sites, n)?;
        let traces = random_traces(2 * n, &mut stream(1, Purpose::Indeterminate, 0));
        let values = ansatz_values(&space, &traces)?;
        let zero = kernel_check(&space, &values, counting)?.iter().all(|r| r.residual_zero);
        let rev = reversibility_check(&space, counting)?.iter().all(|r| r.residual_zero);

        let mut rng = stream(2, Purpose::InitialData, 0);
        let rates: Rates<_> = Rates::from_fn(sites, |_, _| random_rational(&mut rng, 4, 11).abs());
        let neg = negativity_check(&space, &rates, counting, 50, &mut rng)?;
        println!(
            "sites {sites} n {n}: {} states, ansatz in kernel {zero}, reversible {rev}, max <f, Lf> {:.3e}",
            space.len(),
            neg.max_form
        );
    }
    Ok(())
}
