use serde::Serialize;

use super::config::{sqrt_pi, Configuration, StateSpace};
use super::graph::{ConfigGraph, TraceTable};
use super::matching::{perfect_matchings, Matching};
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// `N^{n/2} F(x, A)`: the ansatz observable without its `N`-scaling, so
/// that it is exact over the rationals.
///
/// Each edge class `e = {k, ℓ}` contributes `2^{n(e)/2·1_{k=ℓ}}` times the
/// sum over perfect matchings of its occurrences of `∏ ⟨A_p A_q⟩`; the
/// product is divided by `∏_i (n_i − 1)!!`. Odd edge classes give zero.
pub fn ansatz_scaled<T: Scalar>(g: &ConfigGraph, traces: &TraceTable<T>) -> Result<T> {
    let mut value = T::one();
    for (key, occ) in g.blocks() {
        let m = occ.len();
        if m % 2 == 1 {
            return Ok(T::zero());
        }
        let mut sum = T::zero();
        for pm in perfect_matchings(m)? {
            let mut term = T::one();
            for (p, q) in pm.pairs() {
                term = term * traces.get(g.labels()[occ[p]], g.labels()[occ[q]])?.clone();
            }
            sum = sum + term;
        }
        if key.0 == key.1 {
            sum = sum * T::from_ratio(1 << (m / 2), 1);
        }
        value = value * sum;
    }
    Ok(value / T::from_biguint(&sqrt_pi(g.config())?))
}

/// `F(x, A)` for a matrix of dimension `n_dim`.
pub fn ansatz_f(g: &ConfigGraph, traces: &TraceTable<f64>, n_dim: f64) -> Result<f64> {
    Ok(ansatz_scaled(g, traces)? / n_dim.powf(g.n_edges() as f64 / 2.0))
}

/// `Π ∈ Stab(x)`: `x_{Π(a)} = x_a` for every position.
pub fn in_stab(pm: &Matching, x: &Configuration) -> bool {
    let s = x.sites();
    (0..s.len()).all(|a| s[pm.partner(a)] == s[a])
}

/// `χ_Π(x) = 1_{Π ∈ Stab(x)} / √π(x)`.
pub fn chi<T: Scalar>(pm: &Matching, x: &Configuration) -> Result<T> {
    if in_stab(pm, x) {
        Ok(T::one() / T::from_biguint(&sqrt_pi(x)?))
    } else {
        Ok(T::zero())
    }
}

/// Edge `q` that `Π` maps edge `p` onto, if it maps the edge to an edge.
fn edge_image(pm: &Matching, p: usize) -> Option<usize> {
    let (a, b) = (pm.partner(2 * p), pm.partner(2 * p + 1));
    (a / 2 == b / 2 && a / 2 != p).then_some(a / 2)
}

/// `Π` pairs every edge with another edge (the matchings carrying `F`).
pub fn is_edge_pairing(pm: &Matching) -> bool {
    (0..pm.size() / 2).all(|p| edge_image(pm, p).is_some())
}

/// `Π ∈ ℰ-Stab(B)` for the block with edge occurrences `block`: on the
/// block's positions `Π` stabilizes `x` and sends each edge to another edge
/// of the block. Positions outside the block are ignored.
pub fn in_edge_stab(pm: &Matching, g: &ConfigGraph, block: &[usize]) -> bool {
    let s = g.config().sites();
    block.iter().all(|&p| match edge_image(pm, p) {
        Some(q) => block.contains(&q) && [2 * p, 2 * p + 1].iter().all(|&a| s[pm.partner(a)] == s[a]),
        None => false,
    })
}

/// `Π ∈ 𝒢-Stab(x)`: the restriction to every block is in its `ℰ-Stab`.
pub fn in_g_stab(pm: &Matching, g: &ConfigGraph) -> bool {
    g.blocks().values().all(|b| in_edge_stab(pm, g, b))
}

/// `∏ ⟨A_p A_q⟩` over the edge pairs `(p, q)` of an edge-pairing matching;
/// this is `∏_i 𝒜(Π|_{B_i} · B_i)` for `Π ∈ 𝒢-Stab`.
pub fn pairing_weight<T: Scalar>(pm: &Matching, labels: &[usize], traces: &TraceTable<T>) -> Result<T> {
    let mut w = T::one();
    for p in 0..labels.len() {
        match edge_image(pm, p) {
            Some(q) if p < q => w = w * traces.get(labels[p], labels[q])?.clone(),
            Some(_) => {}
            None => return Ok(T::zero()),
        }
    }
    Ok(w)
}

/// Expansion of `N^{n/2} F` at one configuration.
#[derive(Debug, Clone, Serialize)]
pub struct ChiExpansion<T> {
    pub config: Configuration,
    /// `(Π, ∏ 𝒜)` for every `Π ∈ 𝒢-Stab(x)`.
    pub terms: Vec<(String, T)>,
    /// `|ℰ-Stab(B_e)|` for each block key.
    pub edge_stab_sizes: Vec<((usize, usize), usize)>,
    pub reconstruction: T,
    pub ansatz: T,
    pub g_stab_in_stab: bool,
}

impl<T: Scalar> ChiExpansion<T> {
    pub fn matches(&self) -> bool {
        self.reconstruction == self.ansatz
    }
}

/// Rewrites `N^{n/2} F(x)` as `Σ_{Π ∈ 𝒢-Stab(x)} [∏ 𝒜] / √π(x)` by
/// enumerating `PM[2n]`, and records whether `𝒢-Stab(x) ⊆ Stab(x)`.
pub fn expand_f_in_chi<T: Scalar>(g: &ConfigGraph, traces: &TraceTable<T>) -> Result<ChiExpansion<T>> {
    let x = g.config();
    let root = T::from_biguint(&sqrt_pi(x)?);
    let mut terms = Vec::new();
    let mut total = T::zero();
    let mut subset = true;
    for pm in perfect_matchings(x.len())? {
        if in_g_stab(&pm, g) {
            subset &= in_stab(&pm, x);
            let w = pairing_weight(&pm, g.labels(), traces)?;
            total = total + w.clone();
            terms.push((pm.to_string(), w));
        }
    }
    let mut edge_stab_sizes = Vec::new();
    for (key, block) in g.blocks() {
        let positions: Vec<usize> = block.iter().flat_map(|&p| [2 * p, 2 * p + 1]).collect();
        let local = ConfigGraph::new(Configuration::new(positions.iter().map(|&a| x.sites()[a]).collect()))?;
        let all: Vec<usize> = (0..block.len()).collect();
        let count = perfect_matchings(positions.len())?.filter(|pm| in_edge_stab(pm, &local, &all)).count();
        edge_stab_sizes.push((key, count));
    }
    Ok(ChiExpansion {
        config: x.clone(),
        terms,
        edge_stab_sizes,
        reconstruction: total / root,
        ansatz: ansatz_scaled(g, traces)?,
        g_stab_in_stab: subset,
    })
}

/// Configuration-independent coefficients `c_Π` with
/// `N^{n/2} F = Σ_Π c_Π χ_Π` on all of `Λⁿ` (edge `k` labelled `k`).
pub fn chi_coefficients<T: Scalar>(n: usize, traces: &TraceTable<T>) -> Result<Vec<(Matching, T)>> {
    let labels: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    for pm in perfect_matchings(2 * n)? {
        if is_edge_pairing(&pm) {
            let c = pairing_weight(&pm, &labels, traces)?;
            out.push((pm, c));
        }
    }
    Ok(out)
}

/// Checks the expansion on every configuration of `space`: local
/// reconstruction, `𝒢-Stab ⊆ Stab`, and the global `χ` combination.
/// Returns the number of configurations checked; a mismatch names `x`.
pub fn verify_chi_expansion<T: Scalar>(space: &StateSpace, traces: &TraceTable<T>) -> Result<usize> {
    let coeffs = chi_coefficients(space.n(), traces)?;
    for x in space.states() {
        let g = ConfigGraph::new(x.clone())?;
        let e = expand_f_in_chi(&g, traces)?;
        if !e.g_stab_in_stab {
            return Err(Error::Numeric(format!("𝒢-Stab ⊄ Stab at x = {x}")));
        }
        if !e.matches() {
            return Err(Error::Numeric(format!("χ reconstruction differs from F at x = {x}")));
        }
        let mut global = T::zero();
        for (pm, c) in &coeffs {
            global = global + c.clone() * chi::<T>(pm, x)?;
        }
        if global != e.ansatz {
            return Err(Error::Numeric(format!("global χ expansion differs from F at x = {x}")));
        }
    }
    Ok(space.len())
}

/// `Φ_A = ∏_k √(⟨A_k²⟩ / N)`, the natural size of an `n`-fold overlap product.
pub fn phi_normalizer(norm_sqs: &[f64], n_dim: f64) -> f64 {
    norm_sqs.iter().map(|a| (a / n_dim).sqrt()).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn generic(size: usize) -> TraceTable<BigRational> {
        // Distinct primes keep the trace indeterminates algebraically apart.
        let primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73];
        TraceTable::from_fn(size, |a, b| q(primes[(a * size + b) % primes.len()], primes[(b * 7 + a + 3) % primes.len()]))
    }

    #[test]
    fn figure_value() {
        // Edges {j,j}×2 (A₀,A₁) and {k,ℓ}×4 (A₂..A₅); F = 2/(27N³)⟨A₀A₁⟩(Σ three pairings).
        let x = Configuration::new(vec![0, 0, 0, 0, 1, 2, 2, 1, 1, 2, 1, 2]);
        let g = ConfigGraph::new(x).unwrap();
        let t = generic(6);
        let tr = |a, b| t.get(a, b).unwrap().clone();
        let expected = q(2, 27) * tr(0, 1) * (tr(2, 3) * tr(4, 5) + tr(2, 4) * tr(3, 5) + tr(2, 5) * tr(3, 4));
        assert_eq!(ansatz_scaled(&g, &t).unwrap(), expected);
        let e = expand_f_in_chi(&g, &t).unwrap();
        assert!(e.matches() && e.g_stab_in_stab);
    }

    #[test]
    fn four_particles_on_one_site() {
        let g = ConfigGraph::new(Configuration::new(vec![4, 4, 4, 4])).unwrap();
        let t = generic(2);
        let v = ansatz_scaled(&g, &t).unwrap();
        assert_eq!(v, q(2, 3) * t.get(0, 1).unwrap().clone());
        let f = ansatz_f(&g, &TraceTable::from_fn(2, |_, _| 1.0), 10.0).unwrap();
        assert!((f - 2.0 / 30.0).abs() < 1e-15);
        let e = expand_f_in_chi(&g, &t).unwrap();
        // Two edge pairings, each with two internal choices.
        assert_eq!(e.edge_stab_sizes, vec![((4, 4), 2)]);
        assert_eq!(e.terms.len(), 2);
        assert_eq!(e.reconstruction, v);
    }

    #[test]
    fn odd_edge_classes_vanish() {
        let t = generic(2);
        let g = ConfigGraph::new(Configuration::new(vec![0, 1, 0, 1])).unwrap();
        assert!(!ansatz_scaled(&g, &t).unwrap().is_zero());
        let odd = ConfigGraph::new(Configuration::new(vec![0, 1, 1, 2, 2, 0])).unwrap();
        let e = expand_f_in_chi(&odd, &generic(3)).unwrap();
        assert!(e.ansatz.is_zero() && e.reconstruction.is_zero());
        assert!(e.edge_stab_sizes.iter().all(|&(_, c)| c == 0));
        let single = ConfigGraph::new(Configuration::new(vec![3, 3])).unwrap();
        assert!(ansatz_scaled(&single, &generic(1)).unwrap().is_zero());
    }

    #[test]
    fn figure_two_subset_exhaustive() {
        let x = Configuration::new(vec![0, 0, 0, 0, 1, 2, 1, 2]);
        let g = ConfigGraph::new(x.clone()).unwrap();
        let e = expand_f_in_chi(&g, &generic(4)).unwrap();
        assert!(e.g_stab_in_stab && e.matches());
        assert_eq!(perfect_matchings(8).unwrap().count(), 105);
        assert_eq!(pi_of(&x), 9);
    }

    fn pi_of(x: &Configuration) -> u64 {
        use num_traits::ToPrimitive;
        super::super::config::pi_measure(x).unwrap().to_u64().unwrap()
    }

    #[test]
    fn expansion_on_whole_spaces() {
        for (ns, n) in [(3, 1), (3, 2), (4, 2), (3, 3)] {
            let s = StateSpace::enumerate(ns, n).unwrap();
            assert_eq!(verify_chi_expansion(&s, &generic(n)).unwrap(), s.len());
        }
    }

    #[test]
    fn missing_trace_entry() {
        let g = ConfigGraph::new(Configuration::new(vec![0, 0, 0, 0])).unwrap();
        let mut t = TraceTable::<BigRational>::empty(2);
        t.set(0, 0, BigRational::one());
        assert!(ansatz_scaled(&g, &t).is_err());
    }

    #[test]
    fn normalizer() {
        assert!((phi_normalizer(&[1.0, 4.0], 4.0) - 0.5).abs() < 1e-15);
    }
}
