//! Simple undirected graphs as dense symmetric boolean matrices.

use serde::{Deserialize, Serialize};

/// Number of unordered pairs `i < j` among `n` nodes.
#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of pair `(i, j)`, `i < j`, in row-major upper-triangular order.
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Iterates `(i, j)` with `i < j` in row-major upper-triangular order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    nodes: usize,
    adj: Vec<bool>,
}

impl Graph {
    pub fn empty(nodes: usize) -> Self {
        Graph {
            nodes,
            adj: vec![false; nodes * nodes],
        }
    }

    pub fn complete(nodes: usize) -> Self {
        let mut g = Self::empty(nodes);
        for (i, j) in pairs(nodes) {
            g.set_edge(i, j, true);
        }
        g
    }

    pub fn from_edges(nodes: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::empty(nodes);
        for &(i, j) in edges {
            g.set_edge(i, j, true);
        }
        g
    }

    /// Reads the upper triangle of a 0/1 matrix; the diagonal is ignored.
    pub fn from_upper_bits(nodes: usize, bits: impl IntoIterator<Item = bool>) -> Self {
        let mut g = Self::empty(nodes);
        for ((i, j), b) in pairs(nodes).zip(bits) {
            g.set_edge(i, j, b);
        }
        g
    }

    #[inline]
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.nodes + j]
    }

    /// Sets the symmetric pair; self-loops are ignored.
    #[inline]
    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        if i == j {
            return;
        }
        self.adj[i * self.nodes + j] = present;
        self.adj[j * self.nodes + i] = present;
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i * self.nodes..(i + 1) * self.nodes]
            .iter()
            .filter(|&&b| b)
            .count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.nodes).map(|i| self.degree(i)).collect()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes).filter(move |&j| self.has_edge(i, j))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        pairs(self.nodes).filter(move |&(i, j)| self.has_edge(i, j))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn upper_bits(&self) -> Vec<bool> {
        pairs(self.nodes).map(|(i, j)| self.has_edge(i, j)).collect()
    }

    /// Number of edges present in both graphs.
    pub fn overlap(&self, other: &Graph) -> usize {
        assert_eq!(self.nodes, other.nodes);
        self.edges().filter(|&(i, j)| other.has_edge(i, j)).count()
    }

    /// Relabels nodes so that node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.nodes);
        let mut g = Graph::empty(self.nodes);
        for (i, j) in self.edges() {
            g.set_edge(perm[i], perm[j], true);
        }
        g
    }
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Graph({} nodes, edges: ", self.nodes)?;
        f.debug_list().entries(self.edges()).finish()?;
        write!(f, ")")
    }
}

/// Upper-triangular packing of a bit vector over all pairs, one bit per pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackedBits {
    len: usize,
    words: Vec<u64>,
}

impl PackedBits {
    pub fn pack(bits: impl ExactSizeIterator<Item = bool>) -> Self {
        let len = bits.len();
        let mut words = vec![0u64; len.div_ceil(64)];
        for (idx, b) in bits.enumerate() {
            if b {
                words[idx / 64] |= 1 << (idx % 64);
            }
        }
        PackedBits { len, words }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, idx: usize) -> bool {
        (self.words[idx / 64] >> (idx % 64)) & 1 == 1
    }

    /// Calls `f` with the index of every set bit.
    pub fn for_each_set(&self, mut f: impl FnMut(usize)) {
        for (w, &word) in self.words.iter().enumerate() {
            let mut rest = word;
            while rest != 0 {
                let bit = rest.trailing_zeros() as usize;
                f(w * 64 + bit);
                rest &= rest - 1;
            }
        }
    }
}
