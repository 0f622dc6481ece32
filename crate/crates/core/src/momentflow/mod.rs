//! Colored eigenvector moment flow on particle configurations.
//!
//! A configuration `x ∈ [N]^{2n}` lists the sites of `2n` particles; `Λⁿ`
//! keeps those with every occupation `n_i(x)` even. The generator is
//! `ℒ = Σ_{i<j} c_ij ℒ_ij` with `ℒ_ij = ℳ_ij − ℰ_ij`:
//!
//! - `ℳ_ij f(x) = (n_j+1)/(n_i−1) Σ_{a≠b} [f(m^{ij}_{ab} x) − f(x)] + (i ↔ j)`,
//!   where `m^{ij}_{ab}` moves particles `a, b` from `i` to `j`;
//! - `ℰ_ij f(x)` sums `f(s_{ab} x) − f(x)` over ordered pairs `a ≠ b` with
//!   `{x_a, x_b} = {i, j}`, `s_{ab}` exchanging the two particles.
//!
//! Sites are 0-based throughout. Exact checks run over `BigRational`.

mod ansatz;
mod config;
mod evolve;
mod graph;
mod kernel;
mod matching;
mod operator;
mod scalar;

pub use ansatz::{
    ansatz_f, ansatz_scaled, chi, chi_coefficients, expand_f_in_chi, in_edge_stab, in_g_stab, in_stab, is_edge_pairing, pairing_weight,
    phi_normalizer, verify_chi_expansion, ChiExpansion,
};
pub use config::{apply_move_m, apply_move_s, cardinality, pi_measure, sqrt_pi, Configuration, StateSpace, STATE_BUDGET};
pub use evolve::{flow_evolve, pi_weights, FlowTrajectory, Integrator, EXACT_DIM_LIMIT};
pub use graph::{ConfigGraph, TraceTable};
pub use kernel::{
    ansatz_values, chi_values, kernel_check, negativity_check, random_rational, random_traces, reversibility_check, NegativityReport, PairReport,
};
pub use matching::{double_factorial, perfect_matchings, Matching, PerfectMatchings, MAX_MATCHING_SIZE};
pub use operator::{averaging_op, build_generator, pair_generator, pi_inner, ExchangeCounting, PairFilter, Rates, SparseOperator};
pub use scalar::Scalar;
