//! Connectivity masks on a 1-D ring of units.
//!
//! Units are indexed `0..N` around a ring; distance between two units is
//! the shorter way round. All three builders produce exactly `N·K/2`
//! undirected edges with no self-loops and no duplicates.

use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};

/// Undirected adjacency over `n` ring-ordered units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityMask {
    n: usize,
    adj: Vec<Vec<u32>>,
}

/// Circular distance between units `i` and `j` on a ring of `n`.
pub fn ring_distance(n: usize, i: usize, j: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(n - d)
}

impl ConnectivityMask {
    /// Build a mask from an explicit edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut set = EdgeSet::new(n);
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Dimension {
                    expected: n,
                    got: a.max(b) + 1,
                });
            }
            if a == b {
                return Err(Error::Infeasible(format!("self-edge at unit {a}")));
            }
            if !set.insert(a, b) {
                return Err(Error::Infeasible(format!("duplicate edge {a}-{b}")));
            }
        }
        Ok(set.into_mask())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbours(&self, i: usize) -> &[u32] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&(j as u32)).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(i, nb)| {
            nb.iter()
                .map(move |&j| (i, j as usize))
                .filter(|&(i, j)| i < j)
        })
    }

    /// Mask with units renamed through `perm` (unit `i` becomes `perm[i]`).
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: perm.len(),
            });
        }
        let edges: Vec<_> = self.edges().map(|(a, b)| (perm[a], perm[b])).collect();
        Self::from_edges(self.n, &edges)
    }

    /// Write one `i j` line per edge (`i < j`).
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for (i, j) in self.edges() {
            writeln!(out, "{i} {j}")?;
        }
        Ok(())
    }

    pub fn mean_edge_distance(&self) -> f64 {
        let m = self.edge_count();
        if m == 0 {
            return 0.0;
        }
        let total: usize = self.edges().map(|(i, j)| ring_distance(self.n, i, j)).sum();
        total as f64 / m as f64
    }
}

/// Growable edge set with O(1) membership, used while building.
struct EdgeSet {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    adj: Vec<Vec<u32>>,
}

impl EdgeSet {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        EdgeSet {
            n,
            words,
            bits: vec![0; n * words],
            adj: vec![Vec::new(); n],
        }
    }

    fn contains(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    fn flip(&mut self, a: usize, b: usize) {
        self.bits[a * self.words + b / 64] ^= 1 << (b % 64);
        self.bits[b * self.words + a / 64] ^= 1 << (a % 64);
    }

    fn insert(&mut self, a: usize, b: usize) -> bool {
        if a == b || self.contains(a, b) {
            return false;
        }
        self.flip(a, b);
        self.adj[a].push(b as u32);
        self.adj[b].push(a as u32);
        true
    }

    fn remove(&mut self, a: usize, b: usize) -> bool {
        if !self.contains(a, b) {
            return false;
        }
        self.flip(a, b);
        for (x, y) in [(a, b), (b, a)] {
            let pos = self.adj[x].iter().position(|&v| v as usize == y).unwrap();
            self.adj[x].swap_remove(pos);
        }
        true
    }

    fn degree(&self, a: usize) -> usize {
        self.adj[a].len()
    }

    fn into_mask(mut self) -> ConnectivityMask {
        for nb in &mut self.adj {
            nb.sort_unstable();
        }
        ConnectivityMask {
            n: self.n,
            adj: self.adj,
        }
    }
}

fn check_even_k(n: usize, k: usize) -> Result<()> {
    if !k.is_multiple_of(2) {
        return Err(Error::constraint("K even", format!("K = {k}")));
    }
    if k >= n {
        return Err(Error::Infeasible(format!("K = {k} must be below N = {n}")));
    }
    Ok(())
}

/// `N·K/2` distinct edges drawn uniformly from all unordered pairs.
pub fn build_flat_random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<ConnectivityMask> {
    check_even_k(n, k)?;
    let target = n * k / 2;
    let pairs = n * (n - 1) / 2;
    let mut set = EdgeSet::new(n);
    if 2 * target <= pairs {
        while set.adj.iter().map(Vec::len).sum::<usize>() / 2 < target {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            set.insert(a, b);
        }
    } else {
        // Dense request: pick the pairs to leave out instead.
        let mut excluded = EdgeSet::new(n);
        let mut dropped = 0;
        while dropped < pairs - target {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if excluded.insert(a, b) {
                dropped += 1;
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                if !excluded.contains(a, b) {
                    set.insert(a, b);
                }
            }
        }
    }
    Ok(set.into_mask())
}

/// Each unit draws `K/2` new partners with probability proportional to
/// `exp(-dist²/(2σ²))`, skipping itself and units it is already joined to.
pub fn build_gaussian<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    sigma: f64,
    rng: &mut R,
) -> Result<ConnectivityMask> {
    if !(sigma > 0.0) {
        return Err(Error::constraint("sigma_c > 0", format!("sigma_c = {sigma}")));
    }
    check_even_k(n, k)?;
    let half = n / 2;
    let kernel = |d: usize| -> f64 {
        let d = d as f64;
        (-(d * d - 1.0) / (2.0 * sigma * sigma)).exp()
    };
    // Offsets 1..=N/2, weighted by how many units sit at that distance.
    let weights: Vec<f64> = (1..=half)
        .map(|d| {
            let mult = if 2 * d == n { 1.0 } else { 2.0 };
            mult * kernel(d)
        })
        .collect();
    let offsets = WeightedIndex::new(&weights).map_err(|e| Error::Infeasible(e.to_string()))?;

    let mut set = EdgeSet::new(n);
    for i in 0..n {
        let mut drawn = 0;
        let mut misses = 0;
        while drawn < k / 2 {
            if set.degree(i) >= n - 1 {
                return Err(Error::Infeasible(format!("unit {i} has no free partners")));
            }
            if misses < 256 {
                let d = offsets.sample(rng) + 1;
                let j = if 2 * d == n || rng.random_bool(0.5) {
                    (i + d) % n
                } else {
                    (i + n - d) % n
                };
                if set.insert(i, j) {
                    drawn += 1;
                    misses = 0;
                } else {
                    misses += 1;
                }
            } else {
                // Rejection stalls when the near field is saturated: draw
                // exactly over the remaining partners instead.
                let free: Vec<usize> = (0..n).filter(|&j| j != i && !set.contains(i, j)).collect();
                let dmin = free.iter().map(|&j| ring_distance(n, i, j)).min().unwrap() as f64;
                let w: Vec<f64> = free
                    .iter()
                    .map(|&j| {
                        let d = ring_distance(n, i, j) as f64;
                        (-(d * d - dmin * dmin) / (2.0 * sigma * sigma)).exp()
                    })
                    .collect();
                let pick = WeightedIndex::new(&w)
                    .map_err(|e| Error::Infeasible(e.to_string()))?
                    .sample(rng);
                set.insert(i, free[pick]);
                drawn += 1;
                misses = 0;
            }
        }
    }
    Ok(set.into_mask())
}

/// Ring lattice joining every unit to its `K` nearest neighbours.
pub fn ring_lattice(n: usize, k: usize) -> Result<ConnectivityMask> {
    check_even_k(n, k)?;
    let mut set = EdgeSet::new(n);
    for offset in 1..=k / 2 {
        for i in 0..n {
            set.insert(i, (i + offset) % n);
        }
    }
    Ok(set.into_mask())
}

/// Watts–Strogatz rewiring of the `K`-nearest-neighbour ring lattice.
///
/// Offsets are swept in order 1, 2, …, K/2; at each offset every unit's
/// clockwise edge is considered once and, with probability `p_rewire`,
/// its far end is moved to a uniformly chosen unit that is neither the
/// unit itself nor already joined to it.
pub fn build_small_world<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    p_rewire: f64,
    rng: &mut R,
) -> Result<ConnectivityMask> {
    if !(0.0..=1.0).contains(&p_rewire) {
        return Err(Error::constraint(
            "p_rewire in [0, 1]",
            format!("p_rewire = {p_rewire}"),
        ));
    }
    check_even_k(n, k)?;
    if 2 * k >= n {
        return Err(Error::Infeasible(format!("small-world needs K < N/2, got K = {k}, N = {n}")));
    }
    let mut set = EdgeSet::new(n);
    for offset in 1..=k / 2 {
        for i in 0..n {
            set.insert(i, (i + offset) % n);
        }
    }
    if p_rewire == 0.0 {
        return Ok(set.into_mask());
    }
    for offset in 1..=k / 2 {
        for i in 0..n {
            let j = (i + offset) % n;
            if !rng.random_bool(p_rewire) || set.degree(i) >= n - 1 {
                continue;
            }
            let target = loop {
                let t = rng.random_range(0..n);
                if t != i && !set.contains(i, t) {
                    break t;
                }
            };
            set.remove(i, j);
            set.insert(i, target);
        }
    }
    Ok(set.into_mask())
}

/// Mean over units of the fraction of neighbour pairs that are themselves
/// joined. Units with fewer than two neighbours contribute zero.
pub fn clustering_coefficient(mask: &ConnectivityMask) -> Result<f64> {
    let n = mask.n();
    if n == 0 {
        return Err(Error::Infeasible("empty mask".into()));
    }
    let mut mark = vec![false; n];
    let mut total = 0.0;
    for i in 0..n {
        let nb = mask.neighbours(i);
        let deg = nb.len();
        if deg < 2 {
            continue;
        }
        for &a in nb {
            mark[a as usize] = true;
        }
        let mut links = 0usize;
        for &a in nb {
            links += mask
                .neighbours(a as usize)
                .iter()
                .filter(|&&b| mark[b as usize])
                .count();
        }
        for &a in nb {
            mark[a as usize] = false;
        }
        let pairs = (deg * (deg - 1)) as f64;
        total += links as f64 / pairs;
    }
    Ok(total / n as f64)
}
