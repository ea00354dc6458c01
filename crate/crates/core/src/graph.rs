//! Dense 0/1 matrices for the manoeuvre and engagement networks.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::ModelError;
use crate::model::Side;

/// Symmetric adjacency matrix with an empty diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Adjacency {
    n: usize,
    bits: Vec<bool>,
}

impl Adjacency {
    pub fn empty(n: usize) -> Self {
        Adjacency {
            n,
            bits: vec![false; n * n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut adj = Self::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                adj.insert(i, j);
            }
        }
        adj
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, ModelError> {
        let mut adj = Self::empty(n);
        for &(i, j) in edges {
            adj.check(i)?;
            adj.check(j)?;
            if i == j {
                return Err(ModelError::SelfLoop(i));
            }
            adj.insert(i, j);
        }
        Ok(adj)
    }

    /// Builds from a full row-major matrix, rejecting asymmetric entries and
    /// self loops.
    pub fn from_matrix(rows: &[Vec<u8>]) -> Result<Self, ModelError> {
        let n = rows.len();
        let mut adj = Self::empty(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::Dimension {
                    what: "adjacency row",
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v == 0 {
                    continue;
                }
                if i == j {
                    return Err(ModelError::SelfLoop(i));
                }
                if rows[j][i] == 0 {
                    return Err(ModelError::Asymmetric(i.min(j), i.max(j)));
                }
                adj.insert(i, j);
            }
        }
        Ok(adj)
    }

    /// Uniform random simple graph with exactly `links` edges.
    pub fn random<R: Rng + ?Sized>(n: usize, links: usize, rng: &mut R) -> Result<Self, ModelError> {
        let capacity = pair_count(n);
        if links > capacity {
            return Err(ModelError::Infeasible {
                requested: links,
                capacity,
            });
        }
        let mut adj = Self::empty(n);
        for k in rand::seq::index::sample(rng, capacity, links) {
            let (i, j) = pair_from_index(n, k);
            adj.insert(i, j);
        }
        Ok(adj)
    }

    fn check(&self, i: usize) -> Result<(), ModelError> {
        if i >= self.n {
            return Err(ModelError::NodeOutOfRange {
                side: Side::Blue,
                index: i,
                size: self.n,
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    /// Returns `true` if the edge was absent.
    pub fn insert(&mut self, i: usize, j: usize) -> bool {
        assert!(i != j, "self loop at {i}");
        let fresh = !self.contains(i, j);
        self.bits[i * self.n + j] = true;
        self.bits[j * self.n + i] = true;
        fresh
    }

    /// Returns `true` if the edge was present.
    pub fn remove(&mut self, i: usize, j: usize) -> bool {
        let present = self.contains(i, j);
        self.bits[i * self.n + j] = false;
        self.bits[j * self.n + i] = false;
        present
    }

    pub fn degree(&self, i: usize) -> usize {
        self.bits[i * self.n..(i + 1) * self.n].iter().filter(|&&b| b).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.bits[i * self.n..(i + 1) * self.n]
            .iter()
            .enumerate()
            .filter_map(|(j, &b)| b.then_some(j))
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count() / 2
    }

    /// Edges as `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n)
                .filter(move |&j| self.contains(i, j))
                .map(move |j| (i, j))
        })
    }

    /// Unordered pairs `i < j` without an edge.
    pub fn vacancies(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n)
                .filter(move |&j| !self.contains(i, j))
                .map(move |j| (i, j))
        })
    }

    pub fn vacancy_count(&self) -> usize {
        pair_count(self.n) - self.edge_count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    /// Relabels nodes so that node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = Self::empty(self.n);
        for (i, j) in self.edges() {
            out.insert(perm[i], perm[j]);
        }
        out
    }
}

/// Bipartite Blue x Red engagement matrix. Entry `(b, r)` means Blue node `b`
/// and Red node `r` fire at each other.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Engagement {
    n_blue: usize,
    n_red: usize,
    bits: Vec<bool>,
}

impl Engagement {
    pub fn empty(n_blue: usize, n_red: usize) -> Self {
        Engagement {
            n_blue,
            n_red,
            bits: vec![false; n_blue * n_red],
        }
    }

    pub fn from_links(n_blue: usize, n_red: usize, links: &[(usize, usize)]) -> Result<Self, ModelError> {
        let mut e = Self::empty(n_blue, n_red);
        for &(b, r) in links {
            if b >= n_blue {
                return Err(ModelError::NodeOutOfRange {
                    side: Side::Blue,
                    index: b,
                    size: n_blue,
                });
            }
            if r >= n_red {
                return Err(ModelError::NodeOutOfRange {
                    side: Side::Red,
                    index: r,
                    size: n_red,
                });
            }
            e.insert(b, r);
        }
        Ok(e)
    }

    pub fn from_matrix(rows: &[Vec<u8>], n_red: usize) -> Result<Self, ModelError> {
        let mut e = Self::empty(rows.len(), n_red);
        for (b, row) in rows.iter().enumerate() {
            if row.len() != n_red {
                return Err(ModelError::Dimension {
                    what: "engagement row",
                    expected: n_red,
                    found: row.len(),
                });
            }
            for (r, &v) in row.iter().enumerate() {
                if v != 0 {
                    e.insert(b, r);
                }
            }
        }
        Ok(e)
    }

    /// `links` distinct pairs drawn uniformly from the `n_blue * n_red` slots.
    pub fn random<R: Rng + ?Sized>(n_blue: usize, n_red: usize, links: usize, rng: &mut R) -> Result<Self, ModelError> {
        let capacity = n_blue * n_red;
        if links > capacity {
            return Err(ModelError::Infeasible {
                requested: links,
                capacity,
            });
        }
        let mut e = Self::empty(n_blue, n_red);
        for k in rand::seq::index::sample(rng, capacity, links) {
            e.bits[k] = true;
        }
        Ok(e)
    }

    pub fn n_blue(&self) -> usize {
        self.n_blue
    }

    pub fn n_red(&self) -> usize {
        self.n_red
    }

    #[inline]
    pub fn contains(&self, b: usize, r: usize) -> bool {
        self.bits[b * self.n_red + r]
    }

    pub fn insert(&mut self, b: usize, r: usize) -> bool {
        let fresh = !self.contains(b, r);
        self.bits[b * self.n_red + r] = true;
        fresh
    }

    pub fn remove(&mut self, b: usize, r: usize) -> bool {
        let present = self.contains(b, r);
        self.bits[b * self.n_red + r] = false;
        present
    }

    pub fn link_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn vacancy_count(&self) -> usize {
        self.bits.len() - self.link_count()
    }

    /// Number of Red nodes engaged with Blue node `b`.
    pub fn blue_degree(&self, b: usize) -> usize {
        self.bits[b * self.n_red..(b + 1) * self.n_red]
            .iter()
            .filter(|&&x| x)
            .count()
    }

    /// Number of Blue nodes engaged with Red node `r`.
    pub fn red_degree(&self, r: usize) -> usize {
        (0..self.n_blue).filter(|&b| self.contains(b, r)).count()
    }

    pub fn degree(&self, side: Side, node: usize) -> usize {
        match side {
            Side::Blue => self.blue_degree(node),
            Side::Red => self.red_degree(node),
        }
    }

    /// Links as `(blue, red)` pairs in row-major order.
    pub fn links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(move |(k, &x)| x.then_some((k / self.n_red, k % self.n_red)))
    }

    pub fn vacancies(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(move |(k, &x)| (!x).then_some((k / self.n_red, k % self.n_red)))
    }

    pub fn permuted(&self, blue_perm: &[usize], red_perm: &[usize]) -> Self {
        let mut out = Self::empty(self.n_blue, self.n_red);
        for (b, r) in self.links() {
            out.insert(blue_perm[b], red_perm[r]);
        }
        out
    }
}

/// Number of unordered pairs of `n` nodes.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Maps `k` in `0..pair_count(n)` to the `k`-th pair `(i, j)`, `i < j`, in
/// row-major order of the upper triangle.
fn pair_from_index(n: usize, mut k: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row = n - i - 1;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
        i += 1;
    }
}
