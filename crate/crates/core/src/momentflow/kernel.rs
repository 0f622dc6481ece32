use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use super::ansatz::{ansatz_scaled, chi};
use super::config::StateSpace;
use super::graph::{ConfigGraph, TraceTable};
use super::matching::Matching;
use super::operator::{build_generator, pair_generator, pi_inner, ExchangeCounting, PairFilter, Rates};
use super::scalar::Scalar;
use crate::error::Result;

type Q = BigRational;

/// One line of a kernel or reversibility report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub n: usize,
    pub sites: usize,
    pub pair: (usize, usize),
    pub residual_zero: bool,
    /// Largest `|residual|`, as a float for display.
    pub max_residual: f64,
    /// First configuration with a nonzero residual.
    pub witness: Option<String>,
}

/// `ℒ_ij f` for every pair `i < j`, one report per pair.
pub fn kernel_check<T: Scalar>(space: &StateSpace, values: &[T], counting: ExchangeCounting) -> Result<Vec<PairReport>> {
    let mut out = Vec::new();
    for i in 0..space.n_sites() {
        for j in i + 1..space.n_sites() {
            let l = pair_generator::<T>(space, i, j, counting)?;
            let res = l.apply(values)?;
            let witness = res.iter().position(|r| !r.is_zero()).map(|k| space.state(k).to_string());
            out.push(PairReport {
                n: space.n(),
                sites: space.n_sites(),
                pair: (i, j),
                residual_zero: witness.is_none(),
                max_residual: res.iter().map(|r| r.to_f64().abs()).fold(0.0, f64::max),
                witness,
            });
        }
    }
    Ok(out)
}

/// Random rational in `[-bound, bound]` with denominator up to `den`,
/// never zero.
pub fn random_rational<R: Rng + ?Sized>(rng: &mut R, bound: i64, den: i64) -> Q {
    loop {
        let d = rng.gen_range(1..=den);
        let n = rng.gen_range(-bound * d..=bound * d);
        if n != 0 {
            return Q::new(BigInt::from(n), BigInt::from(d));
        }
    }
}

/// A symmetric table of random rational trace values `⟨A_a A_b⟩`.
pub fn random_traces<R: Rng + ?Sized>(size: usize, rng: &mut R) -> TraceTable<Q> {
    TraceTable::from_fn(size, |_, _| random_rational(rng, 5, 97))
}

/// `N^{n/2} F` on every configuration, edge `k` labelled `k`.
pub fn ansatz_values<T: Scalar>(space: &StateSpace, traces: &TraceTable<T>) -> Result<Vec<T>> {
    space
        .states()
        .iter()
        .map(|x| ansatz_scaled(&ConfigGraph::new(x.clone())?, traces))
        .collect()
}

/// `χ_Π` on every configuration.
pub fn chi_values<T: Scalar>(space: &StateSpace, pm: &Matching) -> Result<Vec<T>> {
    space.states().iter().map(|x| chi(pm, x)).collect()
}

/// Exact π-self-adjointness of each `ℒ_ij`, checked entrywise as detailed
/// balance `π(x) ℒ(x, y) = π(y) ℒ(y, x)`; this is equivalent to
/// `⟨f, ℒ g⟩_π = ⟨ℒ f, g⟩_π` for all `f, g`.
pub fn reversibility_check(space: &StateSpace, counting: ExchangeCounting) -> Result<Vec<PairReport>> {
    let pis: Vec<Q> = (0..space.len()).map(|k| Q::from_biguint(&space.pi(k))).collect();
    let mut out = Vec::new();
    for i in 0..space.n_sites() {
        for j in i + 1..space.n_sites() {
            let l = pair_generator::<Q>(space, i, j, counting)?;
            let mut worst = 0.0f64;
            let mut witness = None;
            for (r, c, v) in l.triplets() {
                let d = &pis[r] * v - &pis[c] * l.get(c, r);
                if !d.is_zero() {
                    worst = worst.max(d.to_f64().abs());
                    witness.get_or_insert_with(|| format!("{} -> {}", space.state(r), space.state(c)));
                }
            }
            out.push(PairReport {
                n: space.n(),
                sites: space.n_sites(),
                pair: (i, j),
                residual_zero: witness.is_none(),
                max_residual: worst,
                witness,
            });
        }
    }
    Ok(out)
}

/// Summary of `⟨f, ℒ f⟩_π` over random rational `f`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativityReport {
    pub n: usize,
    pub sites: usize,
    pub trials: usize,
    /// Largest value of the quadratic form seen.
    pub max_form: f64,
    pub all_nonpositive: bool,
}

/// `⟨f, ℒ f⟩_π ≤ 0` for `trials` random rational `f`, with `ℒ = Σ c_ij ℒ_ij`.
pub fn negativity_check<R: Rng + ?Sized>(space: &StateSpace, rates: &Rates<Q>, counting: ExchangeCounting, trials: usize, rng: &mut R) -> Result<NegativityReport> {
    let l = build_generator(space, rates, &PairFilter::all(), counting)?;
    let mut max_form = f64::NEG_INFINITY;
    let mut ok = true;
    for _ in 0..trials {
        let f: Vec<Q> = (0..space.len()).map(|_| random_rational(rng, 10, 50)).collect();
        let form = pi_inner(space, &f, &l.apply(&f)?);
        ok &= form <= Q::zero();
        max_form = max_form.max(form.to_f64());
    }
    Ok(NegativityReport {
        n: space.n(),
        sites: space.n_sites(),
        trials,
        max_form,
        all_nonpositive: ok,
    })
}
