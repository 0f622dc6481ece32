use std::collections::BTreeMap;
use std::io::Write;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::config::{Configuration, StateSpace};
use super::scalar::Scalar;
use crate::error::{domain, Result};

/// Row-compressed sparse matrix indexed by a [`StateSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator<T> {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Scalar> SparseOperator<T> {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed
    /// and exact zeros dropped.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, T)>) -> Self {
        let mut rows: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); dim];
        for (r, c, v) in triplets {
            let e = rows[r].entry(c).or_insert_with(T::zero);
            *e = e.clone() + v;
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                if !v.is_zero() {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, vals }
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_triplets(dim, std::iter::empty())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, &T)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], &self.vals[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.row(r).find(|(k, _)| *k == c).map_or_else(T::zero, |(_, v)| v.clone())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &T)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn apply(&self, f: &[T]) -> Result<Vec<T>> {
        if f.len() != self.dim {
            return domain(format!("vector of length {} applied to a {}-dimensional operator", f.len(), self.dim));
        }
        Ok((0..self.dim)
            .map(|r| self.row(r).fold(T::zero(), |acc, (c, v)| acc + v.clone() * f[c].clone()))
            .collect())
    }

    /// `Σ_k w_k · op_k` over operators of equal dimension.
    pub fn linear_combination<'a>(dim: usize, terms: impl IntoIterator<Item = (T, &'a SparseOperator<T>)>) -> Self {
        let mut trip = Vec::new();
        for (w, op) in terms {
            debug_assert_eq!(op.dim, dim);
            trip.extend(op.triplets().map(|(r, c, v)| (r, c, w.clone() * v.clone())));
        }
        Self::from_triplets(dim, trip)
    }

    pub fn to_f64(&self) -> SparseOperator<f64> {
        SparseOperator {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self.vals.iter().map(Scalar::to_f64).collect(),
        }
    }

    /// `max_r Σ_c |op_rc|`.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v.to_f64().abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl SparseOperator<BigRational> {
    /// Coordinate list, one `row col numerator denominator` line per entry.
    pub fn write_coo<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (r, c, v) in self.triplets() {
            writeln!(out, "{r} {c} {} {}", v.numer(), v.denom())?;
        }
        Ok(())
    }
}

/// Symmetric jump rates `c_ij` over sites.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates<T> {
    n_sites: usize,
    values: Vec<T>,
}

impl<T: Scalar> Rates<T> {
    pub fn uniform(n_sites: usize) -> Self {
        Self::from_fn(n_sites, |_, _| T::one())
    }

    /// Rates from `f(i, j)` for `i < j`, mirrored.
    pub fn from_fn(n_sites: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut values = vec![T::zero(); n_sites * n_sites];
        for i in 0..n_sites {
            for j in i + 1..n_sites {
                let v = f(i, j);
                values[i * n_sites + j] = v.clone();
                values[j * n_sites + i] = v;
            }
        }
        Self { n_sites, values }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.values[i * self.n_sites + j]
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..self.n_sites {
            for j in i + 1..self.n_sites {
                if self.get(i, j) <= &T::zero() {
                    return domain(format!("rate c_{i}{j} must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// How the exchange term `ℰ_ij` counts a particle pair `{a, b}` sitting on
/// `{i, j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExchangeCounting {
    /// Both orientations `(a, b)` and `(b, a)`, as for `ℳ_ij`. This is the
    /// weight for which the ansatz and all `χ_Π` are in the kernel.
    #[default]
    Symmetric,
    /// Only the orientation with `x_a = i`, `x_b = j`.
    SingleOrientation,
}

/// `ℒ_ij = ℳ_ij − ℰ_ij` on the state space, with integer/rational entries.
pub fn pair_generator<T: Scalar>(space: &StateSpace, i: usize, j: usize, counting: ExchangeCounting) -> Result<SparseOperator<T>> {
    let ns = space.n_sites();
    if i == j || i >= ns || j >= ns {
        return domain(format!("invalid site pair ({i}, {j}) on {ns} sites"));
    }
    let mut trip = Vec::new();
    for (r, x) in space.states().iter().enumerate() {
        push_pair_row(space, r, x, i, j, counting, &T::one(), &mut trip);
    }
    Ok(SparseOperator::from_triplets(space.len(), trip))
}

#[allow(clippy::too_many_arguments)]
fn push_pair_row<T: Scalar>(
    space: &StateSpace,
    r: usize,
    x: &Configuration,
    i: usize,
    j: usize,
    counting: ExchangeCounting,
    rate: &T,
    trip: &mut Vec<(usize, usize, T)>,
) {
    let s = x.sites();
    let ni = x.occupation(i) as i64;
    let nj = x.occupation(j) as i64;
    let len = s.len();
    // ℳ: ordered pairs at i move to j with weight (n_j+1)/(n_i−1), and back.
    for (from, to, nf, nt) in [(i, j, ni, nj), (j, i, nj, ni)] {
        if nf < 2 {
            continue;
        }
        let w = rate.clone() * T::from_ratio(nt + 1, nf - 1);
        for a in 0..len {
            for b in 0..len {
                if a != b && s[a] == from && s[b] == from {
                    let mut y = s.to_vec();
                    y[a] = to;
                    y[b] = to;
                    let c = space.index_of(&Configuration::new(y)).expect("m-moves stay in Λⁿ");
                    trip.push((r, c, w.clone()));
                    trip.push((r, r, -w.clone()));
                }
            }
        }
    }
    // ℰ: exchanges between i and j, entering with a minus sign.
    for a in 0..len {
        for b in 0..len {
            let fires = match counting {
                ExchangeCounting::Symmetric => a != b && ((s[a] == i && s[b] == j) || (s[a] == j && s[b] == i)),
                ExchangeCounting::SingleOrientation => s[a] == i && s[b] == j,
            };
            if fires {
                let mut y = s.to_vec();
                y.swap(a, b);
                let c = space.index_of(&Configuration::new(y)).expect("s-moves preserve occupations");
                trip.push((r, c, -rate.clone()));
                trip.push((r, r, rate.clone()));
            }
        }
    }
}

/// Which pairs enter [`build_generator`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairFilter {
    /// Keep only `|i − j| ≤ range`.
    pub range: Option<usize>,
    /// Keep only `i, j` in this site window.
    pub window: Option<Vec<usize>>,
}

impl PairFilter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn short_range(range: usize, window: Option<Vec<usize>>) -> Self {
        Self { range: Some(range), window }
    }

    pub fn admits(&self, i: usize, j: usize) -> bool {
        self.range.map_or(true, |l| i.abs_diff(j) <= l)
            && self.window.as_ref().map_or(true, |w| w.contains(&i) && w.contains(&j))
    }
}

/// `Σ_{i<j} c_ij ℒ_ij` over the admitted pairs.
pub fn build_generator<T: Scalar>(space: &StateSpace, rates: &Rates<T>, filter: &PairFilter, counting: ExchangeCounting) -> Result<SparseOperator<T>> {
    if rates.n_sites() != space.n_sites() {
        return domain(format!("rates cover {} sites, space has {}", rates.n_sites(), space.n_sites()));
    }
    if filter.range == Some(0) {
        return domain("range limit must be at least 1");
    }
    rates.validate()?;
    let ns = space.n_sites();
    let mut trip = Vec::new();
    for (r, x) in space.states().iter().enumerate() {
        for i in 0..ns {
            for j in i + 1..ns {
                if filter.admits(i, j) {
                    push_pair_row(space, r, x, i, j, counting, rates.get(i, j), &mut trip);
                }
            }
        }
    }
    Ok(SparseOperator::from_triplets(space.len(), trip))
}

/// Diagonal operator `Av(x; K, y) = (1/K) #{k ∈ [K, 2K−1] : ‖x − y‖₁ ≤ k}`.
pub fn averaging_op<T: Scalar>(space: &StateSpace, y: &Configuration, k: usize) -> Result<SparseOperator<T>> {
    if k == 0 {
        return domain("averaging scale K must be at least 1");
    }
    if y.len() != 2 * space.n() {
        return domain(format!("center {y} has the wrong length"));
    }
    let trip = space.states().iter().enumerate().map(|(r, x)| {
        let d = x.l1_distance(y);
        let count = (k..2 * k).filter(|&j| d <= j).count();
        (r, r, T::from_ratio(count as i64, k as i64))
    });
    Ok(SparseOperator::from_triplets(space.len(), trip))
}

/// `⟨f, g⟩_π = Σ_x π(x) f(x) g(x)`.
pub fn pi_inner<T: Scalar>(space: &StateSpace, f: &[T], g: &[T]) -> T {
    (0..space.len()).fold(T::zero(), |acc, k| acc + T::from_biguint(&space.pi(k)) * f[k].clone() * g[k].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    type Q = BigRational;

    #[test]
    fn hand_assembled_two_sites() {
        let s = StateSpace::enumerate(2, 1).unwrap();
        let l = pair_generator::<Q>(&s, 0, 1, ExchangeCounting::Symmetric).unwrap();
        let two = Q::from_ratio(2, 1);
        assert_eq!(l.get(0, 1), two);
        assert_eq!(l.get(0, 0), -two.clone());
        assert_eq!(l.get(1, 0), two);
    }

    #[test]
    fn constants_are_annihilated() {
        let s = StateSpace::enumerate(3, 2).unwrap();
        let ones = vec![Q::from_ratio(1, 1); s.len()];
        for counting in [ExchangeCounting::Symmetric, ExchangeCounting::SingleOrientation] {
            let l = build_generator::<Q>(&s, &Rates::uniform(3), &PairFilter::all(), counting).unwrap();
            assert!(l.apply(&ones).unwrap().iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn short_range_filter() {
        let s = StateSpace::enumerate(4, 1).unwrap();
        let full = build_generator::<Q>(&s, &Rates::uniform(4), &PairFilter::all(), ExchangeCounting::Symmetric).unwrap();
        let near = build_generator::<Q>(&s, &Rates::uniform(4), &PairFilter::short_range(1, None), ExchangeCounting::Symmetric).unwrap();
        let x03 = s.index_of(&Configuration::new(vec![0, 0])).unwrap();
        let y33 = s.index_of(&Configuration::new(vec![3, 3])).unwrap();
        assert!(!full.get(x03, y33).is_zero());
        assert!(near.get(x03, y33).is_zero());
        let win = build_generator::<Q>(&s, &Rates::uniform(4), &PairFilter::short_range(3, Some(vec![1, 2])), ExchangeCounting::Symmetric).unwrap();
        assert!(win.row(x03).all(|(_, v)| v.is_zero()));
        assert!(build_generator::<Q>(&s, &Rates::uniform(4), &PairFilter::short_range(0, None), ExchangeCounting::Symmetric).is_err());
    }

    #[test]
    fn averaging_entries() {
        let s = StateSpace::enumerate(6, 1).unwrap();
        let y = Configuration::new(vec![0, 0]);
        let av = averaging_op::<Q>(&s, &y, 3).unwrap();
        let entry = |x: Vec<usize>| av.get(s.index_of(&Configuration::new(x.clone())).unwrap(), s.index_of(&Configuration::new(x)).unwrap());
        assert_eq!(entry(vec![0, 0]), Q::from_ratio(1, 1));
        assert_eq!(entry(vec![1, 1]), Q::from_ratio(1, 1)); // distance 2 < K
        assert_eq!(entry(vec![2, 2]), Q::from_ratio(2, 3)); // distance 4
        assert_eq!(entry(vec![3, 3]), Q::from_ratio(0, 1)); // distance 6 > 2K−1
        let s1 = StateSpace::enumerate(4, 1).unwrap();
        let av1 = averaging_op::<Q>(&s1, &y, 2).unwrap();
        let k = s1.index_of(&Configuration::new(vec![1, 1])).unwrap();
        assert_eq!(av1.get(k, k), Q::from_ratio(1, 1)); // distance = K
        let y01 = Configuration::new(vec![0, 1]);
        let av2 = averaging_op::<Q>(&s1, &y01, 2).unwrap();
        let k = s1.index_of(&Configuration::new(vec![2, 2])).unwrap();
        assert_eq!(av2.get(k, k), Q::from_ratio(1, 2)); // distance 3 = 2K−1
    }

    #[test]
    fn coo_export() {
        let s = StateSpace::enumerate(2, 1).unwrap();
        let l = pair_generator::<Q>(&s, 0, 1, ExchangeCounting::Symmetric).unwrap();
        let mut buf = Vec::new();
        l.write_coo(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 0 -2 1\n0 1 2 1\n1 0 2 1\n1 1 -2 1\n");
    }
}
