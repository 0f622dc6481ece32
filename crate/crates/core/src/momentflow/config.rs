use std::collections::HashMap;

use num_bigint::{BigUint, ToBigUint};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::matching::double_factorial;
use crate::error::{domain, Error, Result};

/// Largest configuration space that will be enumerated.
pub const STATE_BUDGET: u64 = 1_000_000;

/// A tuple `x ∈ [N]^{2n}` of particle sites (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Configuration {
    sites: Vec<usize>,
}

impl Configuration {
    pub fn new(sites: Vec<usize>) -> Self {
        Self { sites }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// `n` with `|x| = 2n`.
    pub fn order(&self) -> usize {
        self.sites.len() / 2
    }

    pub fn occupation(&self, site: usize) -> usize {
        self.sites.iter().filter(|&&s| s == site).count()
    }

    /// Occupied sites with their counts, ascending by site.
    pub fn occupations(&self) -> Vec<(usize, usize)> {
        let mut s = self.sites.clone();
        s.sort_unstable();
        let mut out: Vec<(usize, usize)> = Vec::new();
        for x in s {
            match out.last_mut() {
                Some((site, c)) if *site == x => *c += 1,
                _ => out.push((x, 1)),
            }
        }
        out
    }

    /// Membership in `Λⁿ`: even length and every occupation even.
    pub fn is_even(&self) -> bool {
        self.sites.len() % 2 == 0 && self.occupations().iter().all(|&(_, c)| c % 2 == 0)
    }

    pub fn l1_distance(&self, other: &Configuration) -> usize {
        self.sites.iter().zip(&other.sites).map(|(a, b)| a.abs_diff(*b)).sum()
    }
}

impl std::fmt::Display for Configuration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("(")?;
        for (k, s) in self.sites.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str(")")
    }
}

/// `√π(x) = ∏_i (n_i(x) − 1)!!`, an integer.
pub fn sqrt_pi(x: &Configuration) -> Result<BigUint> {
    let mut out = BigUint::from(1u32);
    for (site, c) in x.occupations() {
        if c % 2 == 1 {
            return domain(format!("site {site} of {x} has odd occupation {c}"));
        }
        out *= double_factorial(c as i64 - 1).to_biguint().expect("non-negative");
    }
    Ok(out)
}

/// Reversible measure `π(x) = ∏_i [(n_i(x) − 1)!!]²`.
pub fn pi_measure(x: &Configuration) -> Result<BigUint> {
    let s = sqrt_pi(x)?;
    Ok(&s * &s)
}

/// `m^{ij}_{ab} x`: moves particles `a, b` from site `i` to `j` if both sit at `i`.
pub fn apply_move_m(x: &Configuration, a: usize, b: usize, i: usize, j: usize) -> Configuration {
    let mut y = x.clone();
    if x.sites[a] == i && x.sites[b] == i {
        y.sites[a] = j;
        y.sites[b] = j;
    }
    y
}

/// `s^{ij}_{ab} x`: exchanges `a` (at `i`) and `b` (at `j`).
pub fn apply_move_s(x: &Configuration, a: usize, b: usize, i: usize, j: usize) -> Configuration {
    let mut y = x.clone();
    if x.sites[a] == i && x.sites[b] == j {
        y.sites[a] = j;
        y.sites[b] = i;
    }
    y
}

/// `|Λⁿ|` on `N` sites: `2^{−N} Σ_k C(N,k) (N − 2k)^{2n}`.
pub fn cardinality(n_sites: usize, n: usize) -> BigUint {
    use num_bigint::BigInt;
    let mut total = BigInt::zero();
    let mut binom = BigInt::from(1);
    for k in 0..=n_sites {
        let base = BigInt::from(n_sites as i64 - 2 * k as i64);
        total += &binom * num_traits::pow(base, 2 * n);
        binom = binom * BigInt::from((n_sites - k) as u64) / BigInt::from((k + 1) as u64);
    }
    let out: BigInt = total >> n_sites;
    out.to_biguint().expect("count is non-negative")
}

/// Enumerated `Λⁿ` in lexicographic order with an index.
#[derive(Debug, Clone)]
pub struct StateSpace {
    n_sites: usize,
    n: usize,
    states: Vec<Configuration>,
    index: HashMap<Configuration, usize>,
    sqrt_pi: Vec<BigUint>,
}

impl StateSpace {
    pub fn enumerate(n_sites: usize, n: usize) -> Result<Self> {
        Self::with_budget(n_sites, n, STATE_BUDGET)
    }

    pub fn with_budget(n_sites: usize, n: usize, budget: u64) -> Result<Self> {
        if n_sites == 0 || n == 0 {
            return domain("configuration spaces need at least one site and one particle pair");
        }
        let card = cardinality(n_sites, n);
        if card.to_u64().map_or(true, |c| c > budget) {
            return Err(Error::Resource {
                what: format!("configuration space on {n_sites} sites with n = {n}"),
                cardinality: card.to_string(),
                budget,
            });
        }
        let mut states = Vec::with_capacity(card.to_usize().unwrap_or(0));
        let mut cur = Vec::with_capacity(2 * n);
        let mut occ = vec![0usize; n_sites];
        fill(n_sites, 2 * n, &mut cur, &mut occ, 0, &mut states);
        let index = states.iter().enumerate().map(|(k, x)| (x.clone(), k)).collect();
        let sqrt_pi = states.iter().map(|x| sqrt_pi(x).expect("enumerated states are even")).collect();
        Ok(Self {
            n_sites,
            n,
            states,
            index,
            sqrt_pi,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Configuration] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &Configuration {
        &self.states[k]
    }

    pub fn index_of(&self, x: &Configuration) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn sqrt_pi(&self, k: usize) -> &BigUint {
        &self.sqrt_pi[k]
    }

    pub fn pi(&self, k: usize) -> BigUint {
        &self.sqrt_pi[k] * &self.sqrt_pi[k]
    }
}

/// Depth-first lexicographic fill, pruned when the remaining slots cannot
/// repair the odd occupations.
fn fill(n_sites: usize, len: usize, cur: &mut Vec<usize>, occ: &mut [usize], odd: usize, out: &mut Vec<Configuration>) {
    let remaining = len - cur.len();
    if remaining == 0 {
        if odd == 0 {
            out.push(Configuration::new(cur.clone()));
        }
        return;
    }
    for s in 0..n_sites {
        let next_odd = if occ[s] % 2 == 0 { odd + 1 } else { odd - 1 };
        if next_odd > remaining - 1 || (remaining - 1 - next_odd) % 2 == 1 {
            continue;
        }
        cur.push(s);
        occ[s] += 1;
        fill(n_sites, len, cur, occ, next_odd, out);
        occ[s] -= 1;
        cur.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(n_sites: usize, n: usize) -> Vec<Configuration> {
        let len = 2 * n;
        let total = n_sites.pow(len as u32);
        (0..total)
            .map(|mut c| {
                let mut v = vec![0; len];
                for p in (0..len).rev() {
                    v[p] = c % n_sites;
                    c /= n_sites;
                }
                Configuration::new(v)
            })
            .filter(|x| x.is_even())
            .collect()
    }

    #[test]
    fn small_spaces() {
        let s = StateSpace::enumerate(2, 1).unwrap();
        assert_eq!(s.states(), &[Configuration::new(vec![0, 0]), Configuration::new(vec![1, 1])]);
        assert_eq!(StateSpace::enumerate(2, 2).unwrap().len(), 8);
        for n in 1..4 {
            assert_eq!(StateSpace::enumerate(1, n).unwrap().len(), 1);
        }
    }

    #[test]
    fn enumeration_matches_brute_force_and_formula() {
        for (ns, n) in [(2, 2), (3, 1), (3, 2), (4, 2), (3, 3), (5, 2)] {
            let s = StateSpace::enumerate(ns, n).unwrap();
            assert_eq!(s.states(), brute(ns, n).as_slice(), "({ns},{n})");
            assert_eq!(cardinality(ns, n), BigUint::from(s.len()));
        }
    }

    #[test]
    fn budget_is_enforced() {
        match StateSpace::with_budget(10, 4, 1000) {
            Err(Error::Resource { cardinality: c, .. }) => assert_eq!(c, cardinality(10, 4).to_string()),
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn reversible_measure_values() {
        let fig = Configuration::new(vec![0, 0, 0, 0, 1, 2, 1, 2]);
        assert_eq!(pi_measure(&fig).unwrap(), BigUint::from(9u32));
        assert_eq!(pi_measure(&Configuration::new(vec![4, 4])).unwrap(), BigUint::from(1u32));
        assert_eq!(pi_measure(&Configuration::new(vec![1; 6])).unwrap(), BigUint::from(225u32));
        assert!(pi_measure(&Configuration::new(vec![0, 1])).is_err());
    }

    #[test]
    fn moves() {
        let x = Configuration::new(vec![3, 3]);
        assert_eq!(apply_move_m(&x, 0, 1, 3, 5).sites(), &[5, 5]);
        let y = Configuration::new(vec![3, 4]);
        assert_eq!(apply_move_m(&y, 0, 1, 3, 5), y);
        assert_eq!(apply_move_s(&y, 0, 1, 3, 4).sites(), &[4, 3]);
    }
}
