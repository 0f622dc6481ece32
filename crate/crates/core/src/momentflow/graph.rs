use std::collections::BTreeMap;

use super::config::Configuration;
use super::scalar::Scalar;
use crate::error::{domain, Result};

/// Edge-labelled multigraph of a configuration: edge `k` joins
/// `x_{2k}, x_{2k+1}` and carries observable label `labels[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigGraph {
    config: Configuration,
    labels: Vec<usize>,
}

impl ConfigGraph {
    /// Edge `k` labelled by observable `k`.
    pub fn new(config: Configuration) -> Result<Self> {
        let n = config.order();
        Self::with_labels(config, (0..n).collect())
    }

    pub fn with_labels(config: Configuration, labels: Vec<usize>) -> Result<Self> {
        if config.len() % 2 == 1 {
            return domain(format!("configuration {config} has odd length"));
        }
        if labels.len() != config.order() {
            return domain(format!("{} labels for {} edges", labels.len(), config.order()));
        }
        Ok(Self { config, labels })
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn n_edges(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Edge `k` as the ordered pair `(x_{2k}, x_{2k+1})`.
    pub fn edge(&self, k: usize) -> (usize, usize) {
        let s = self.config.sites();
        (s[2 * k], s[2 * k + 1])
    }

    /// Unordered key `{k, ℓ}` of edge `k`.
    pub fn edge_key(&self, k: usize) -> (usize, usize) {
        let (a, b) = self.edge(k);
        (a.min(b), a.max(b))
    }

    /// Blocks `B_e`: for every distinct edge, the occurrences in order.
    pub fn blocks(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut out: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for k in 0..self.n_edges() {
            out.entry(self.edge_key(k)).or_default().push(k);
        }
        out
    }

    /// `n(e)` for the edge key `e`.
    pub fn multiplicity(&self, e: (usize, usize)) -> usize {
        (0..self.n_edges()).filter(|&k| self.edge_key(k) == e).count()
    }

    /// Flattening the edges in order recovers the configuration.
    pub fn flatten(&self) -> Configuration {
        Configuration::new((0..self.n_edges()).flat_map(|k| {
            let (a, b) = self.edge(k);
            [a, b]
        }).collect())
    }
}

/// Symmetric table of `⟨A_a A_b⟩` values indexed by observable label.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable<T> {
    size: usize,
    entries: Vec<Option<T>>,
}

impl<T: Scalar> TraceTable<T> {
    pub fn empty(size: usize) -> Self {
        Self {
            size,
            entries: vec![None; size * size],
        }
    }

    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut t = Self::empty(size);
        for a in 0..size {
            for b in a..size {
                t.set(a, b, f(a, b));
            }
        }
        t
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn set(&mut self, a: usize, b: usize, value: T) {
        self.entries[a * self.size + b] = Some(value.clone());
        self.entries[b * self.size + a] = Some(value);
    }

    pub fn get(&self, a: usize, b: usize) -> Result<&T> {
        if a >= self.size || b >= self.size {
            return domain(format!("trace entry ⟨A_{a} A_{b}⟩ outside a {0}×{0} table", self.size));
        }
        match &self.entries[a * self.size + b] {
            Some(v) => Ok(v),
            None => domain(format!("missing trace entry ⟨A_{a} A_{b}⟩")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_graph_blocks() {
        // (j,j,j,j,k,ℓ,k,ℓ) with j=0, k=1, ℓ=2.
        let g = ConfigGraph::new(Configuration::new(vec![0, 0, 0, 0, 1, 2, 2, 1])).unwrap();
        let b = g.blocks();
        assert_eq!(b.len(), 2);
        assert_eq!(b[&(0, 0)], vec![0, 1]);
        assert_eq!(b[&(1, 2)], vec![2, 3]);
        assert_eq!(g.multiplicity((1, 2)), 2);
        assert_eq!(&g.flatten(), g.config());
        let total: usize = b.values().map(|v| 2 * v.len()).sum();
        assert_eq!(total, g.config().len());
    }

    #[test]
    fn missing_trace_is_an_error() {
        let mut t = TraceTable::<f64>::empty(3);
        t.set(0, 2, 1.5);
        assert_eq!(*t.get(2, 0).unwrap(), 1.5);
        assert!(t.get(1, 1).is_err());
        assert!(t.get(3, 0).is_err());
    }
}
