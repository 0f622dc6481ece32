//! Ornstein-Uhlenbeck flow keeps the GOE entry distribution, while plain
//! Dyson Brownian motion spreads it.

use wigner_lab::dbm::{advance_to, off_diagonal_pool, FlowMode, FlowState};
use wigner_lab::ensembles::WignerSpec;

fn main() -> wigner_lab::Result<()> {
    let n = 64;
    let spec = WignerSpec::goe(n, 31);
    for mode in [FlowMode::Ou, FlowMode::Dbm] {
        let finals = (0..20u64)
            .map(|p| Ok(advance_to(FlowState::new(spec.sample_at(p)?, 32, p), 1.0, 1e-2, mode)?.matrix))
            .collect::<wigner_lab::Result<Vec<_>>>()?;
        let (mean, second, count) = off_diagonal_pool(&finals);
        println!("{mode:?}: {count} entries, mean {:.2e}, N E|w|^2 = {second:.3}", mean.norm());
    }
    Ok(())
}
