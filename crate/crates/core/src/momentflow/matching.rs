//! Perfect matchings of `{0, …, m−1}`.

use std::fmt;

use crate::error::{Error, Result};

/// Largest ground set accepted by [`perfect_matchings`]; `15!! ≈ 2·10^6`.
pub const MAX_MATCHING_SIZE: usize = 16;

/// A perfect matching stored as a partner table (`partner[partner[a]] == a`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    partner: Vec<usize>,
}

impl Matching {
    /// Builds a matching from unordered pairs; every element of `0..m`
    /// must appear exactly once.
    pub fn from_pairs(m: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut partner = vec![usize::MAX; m];
        for &(a, b) in pairs {
            if a >= m || b >= m || a == b || partner[a] != usize::MAX || partner[b] != usize::MAX {
                return Err(Error::Domain(format!("invalid matching pair ({a}, {b}) on {m} points")));
            }
            partner[a] = b;
            partner[b] = a;
        }
        if partner.iter().any(|&p| p == usize::MAX) {
            return Err(Error::Domain(format!("pairs do not cover all {m} points")));
        }
        Ok(Self { partner })
    }

    pub fn size(&self) -> usize {
        self.partner.len()
    }

    pub fn partner(&self, a: usize) -> usize {
        self.partner[a]
    }

    /// Pairs `(a, b)` with `a < b`, ordered by `a`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.partner.iter().enumerate().filter(|(a, &b)| *a < b).map(|(a, &b)| (a, b))
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (a, b)) in self.pairs().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "({a},{b})")?;
        }
        f.write_str("}")
    }
}

/// `(m − 1)!! = (m−1)(m−3)⋯`; `(−1)!! = 0!! = 1`.
pub fn double_factorial(m: i64) -> u128 {
    let mut out = 1u128;
    let mut k = m;
    while k > 1 {
        out *= k as u128;
        k -= 2;
    }
    out
}

/// Lazy enumeration of all `(m−1)!!` perfect matchings.
///
/// A matching is encoded by choices `c_0, c_1, …`: at step `s` the smallest
/// unmatched element is paired with the `c_s`-th smallest remaining one.
/// Odometer order over the choices gives a deterministic sequence.
#[derive(Debug, Clone)]
pub struct PerfectMatchings {
    m: usize,
    choices: Vec<usize>,
    done: bool,
}

impl PerfectMatchings {
    fn decode(&self) -> Matching {
        let mut remaining: Vec<usize> = (0..self.m).collect();
        let mut partner = vec![0usize; self.m];
        for &c in &self.choices {
            let a = remaining.remove(0);
            let b = remaining.remove(c);
            partner[a] = b;
            partner[b] = a;
        }
        Matching { partner }
    }

    fn advance(&mut self) {
        // radix of step s is m − 1 − 2s
        for s in (0..self.choices.len()).rev() {
            let radix = self.m - 1 - 2 * s;
            if self.choices[s] + 1 < radix {
                self.choices[s] += 1;
                return;
            }
            self.choices[s] = 0;
        }
        self.done = true;
    }
}

impl Iterator for PerfectMatchings {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        if self.done {
            return None;
        }
        let out = self.decode();
        self.advance();
        Some(out)
    }
}

/// All perfect matchings of `{0, …, m−1}`. Odd `m` yields nothing (the empty
/// sum); `m = 0` yields the single empty matching.
pub fn perfect_matchings(m: usize) -> Result<PerfectMatchings> {
    if m > MAX_MATCHING_SIZE {
        return Err(Error::Resource {
            what: format!("PM[{m}]"),
            cardinality: double_factorial(m as i64 - 1).to_string(),
            budget: double_factorial(MAX_MATCHING_SIZE as i64 - 1) as u64,
        });
    }
    Ok(PerfectMatchings {
        m,
        choices: vec![0; m / 2],
        done: m % 2 == 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn counts() {
        assert_eq!(perfect_matchings(0).unwrap().count(), 1);
        assert_eq!(perfect_matchings(2).unwrap().count(), 1);
        assert_eq!(perfect_matchings(4).unwrap().count(), 3);
        assert_eq!(perfect_matchings(6).unwrap().count(), 15);
        assert_eq!(perfect_matchings(3).unwrap().count(), 0);
        assert_eq!(perfect_matchings(1).unwrap().count(), 0);
        assert!(perfect_matchings(18).is_err());
    }

    #[test]
    fn matchings_are_distinct_involutions() {
        for m in [2usize, 4, 6, 8, 10] {
            let all: Vec<Matching> = perfect_matchings(m).unwrap().collect();
            assert_eq!(all.len() as u128, double_factorial(m as i64 - 1));
            let set: HashSet<_> = all.iter().cloned().collect();
            assert_eq!(set.len(), all.len());
            for pm in &all {
                for a in 0..m {
                    assert_ne!(pm.partner(a), a);
                    assert_eq!(pm.partner(pm.partner(a)), a);
                }
            }
        }
    }

    #[test]
    fn deterministic_order() {
        let first: Vec<String> = perfect_matchings(4).unwrap().map(|p| p.to_string()).collect();
        assert_eq!(first, vec!["{(0,1) (2,3)}", "{(0,2) (1,3)}", "{(0,3) (1,2)}"]);
    }

    #[test]
    fn from_pairs_validates() {
        assert!(Matching::from_pairs(4, &[(0, 1), (2, 3)]).is_ok());
        assert!(Matching::from_pairs(4, &[(0, 1), (1, 3)]).is_err());
        assert!(Matching::from_pairs(4, &[(0, 1)]).is_err());
    }
}
