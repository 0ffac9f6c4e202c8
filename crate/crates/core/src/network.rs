use crate::error::{Error, Result};
use crate::params::NetParams;
use crate::topology::ConnectivityMask;

/// One end of an undirected synapse as seen from a unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub to: u32,
    pub edge: u32,
}

/// Symmetric, partially connected network of binary units.
///
/// Each undirected synapse carries a single weight, so `W_ij = W_ji` holds
/// by construction. Deleted synapses are dropped from the adjacency lists
/// and their weight is zeroed.
#[derive(Debug, Clone)]
pub struct Network {
    params: NetParams,
    adj: Vec<Vec<Link>>,
    ends: Vec<(u32, u32)>,
    weights: Vec<f64>,
    alive: Vec<bool>,
    live: Vec<u32>,
    original_edges: usize,
    comp_gain: Vec<f64>,
    transmission: Vec<f64>,
}

impl Network {
    pub fn new(params: NetParams, mask: &ConnectivityMask) -> Result<Self> {
        if mask.n() != params.n {
            return Err(Error::Dimension {
                expected: params.n,
                got: mask.n(),
            });
        }
        let n = params.n;
        let mut adj = vec![Vec::new(); n];
        let mut ends = Vec::with_capacity(mask.edge_count());
        for (i, j) in mask.edges() {
            let e = ends.len() as u32;
            ends.push((i as u32, j as u32));
            adj[i].push(Link { to: j as u32, edge: e });
            adj[j].push(Link { to: i as u32, edge: e });
        }
        let m = ends.len();
        Ok(Network {
            params,
            adj,
            ends,
            weights: vec![0.0; m],
            alive: vec![true; m],
            live: (0..m as u32).collect(),
            original_edges: m,
            comp_gain: vec![1.0; n],
            transmission: vec![1.0; n],
        })
    }

    pub fn params(&self) -> &NetParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn links(&self, i: usize) -> &[Link] {
        &self.adj[i]
    }

    pub fn edge_ends(&self, edge: usize) -> (usize, usize) {
        let (a, b) = self.ends[edge];
        (a as usize, b as usize)
    }

    pub fn edge_weight(&self, edge: usize) -> f64 {
        self.weights[edge]
    }

    #[cfg(test)]
    pub(crate) fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    /// Adjacency and gains borrowed alongside mutable weights.
    #[allow(clippy::type_complexity)]
    pub(crate) fn split_for_learning(&mut self) -> (&[Vec<Link>], &mut [f64], &[f64], &[f64]) {
        (&self.adj, &mut self.weights, &self.transmission, &self.comp_gain)
    }

    /// Weight between `i` and `j`; zero where there is no live synapse.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adj[i]
            .iter()
            .find(|l| l.to as usize == j)
            .map_or(0.0, |l| self.weights[l.edge as usize])
    }

    /// Ids of all synapses still present.
    pub fn live_edges(&self) -> &[u32] {
        &self.live
    }

    pub fn is_alive(&self, edge: usize) -> bool {
        self.alive[edge]
    }

    pub fn original_edge_count(&self) -> usize {
        self.original_edges
    }

    pub fn live_edge_count(&self) -> usize {
        self.live.len()
    }

    /// Fraction of the original synapses removed so far.
    pub fn deletion_fraction(&self) -> f64 {
        if self.original_edges == 0 {
            return 0.0;
        }
        1.0 - self.live.len() as f64 / self.original_edges as f64
    }

    /// Remove the synapse at position `slot` of the live list.
    pub(crate) fn remove_live(&mut self, slot: usize) {
        let e = self.live.swap_remove(slot) as usize;
        self.alive[e] = false;
        self.weights[e] = 0.0;
        let (a, b) = self.ends[e];
        for u in [a, b] {
            let list = &mut self.adj[u as usize];
            let pos = list.iter().position(|l| l.edge as usize == e).unwrap();
            list.swap_remove(pos);
        }
    }

    /// Current connectivity (live synapses only).
    pub fn mask(&self) -> ConnectivityMask {
        let edges: Vec<_> = self
            .live
            .iter()
            .map(|&e| {
                let (a, b) = self.ends[e as usize];
                (a as usize, b as usize)
            })
            .collect();
        ConnectivityMask::from_edges(self.n(), &edges).expect("live edges form a valid mask")
    }

    pub fn comp_gain(&self) -> &[f64] {
        &self.comp_gain
    }

    pub fn set_comp_gain(&mut self, gains: &[f64]) -> Result<()> {
        if gains.len() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                got: gains.len(),
            });
        }
        if gains.iter().any(|g| !(*g >= 0.0)) {
            return Err(Error::constraint("c_i >= 0", "negative or NaN gain"));
        }
        self.comp_gain.copy_from_slice(gains);
        Ok(())
    }

    pub fn transmission(&self) -> &[f64] {
        &self.transmission
    }

    pub(crate) fn transmission_mut(&mut self) -> &mut [f64] {
        &mut self.transmission
    }

    /// Largest |W_ij − W_ji| over all pairs; always zero with shared
    /// per-edge storage but kept as an explicit check for callers.
    pub fn symmetry_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n() {
            for l in &self.adj[i] {
                let back = self.weight(l.to as usize, i);
                worst = worst.max((self.weights[l.edge as usize] - back).abs());
            }
        }
        worst
    }

    /// True when every nonzero weight sits on a live synapse.
    pub fn weights_within_mask(&self) -> bool {
        self.weights
            .iter()
            .zip(&self.alive)
            .all(|(&w, &a)| a || w == 0.0)
    }
}

/// Fresh network: zero weights, unit gains and full transmission.
pub fn make_network(params: NetParams, mask: &ConnectivityMask) -> Result<Network> {
    Network::new(params, mask)
}
