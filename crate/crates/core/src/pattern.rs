use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::params::NetParams;

/// Binary activity vector with a fixed number of active units.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    bits: Vec<bool>,
    active: Vec<u32>,
}

impl Pattern {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        let active = bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as u32)
            .collect();
        Pattern { bits, active }
    }

    /// Pattern of length `n` with ones at `active` (indices must be distinct).
    pub fn from_active(n: usize, active: &[usize]) -> Self {
        let mut bits = vec![false; n];
        for &i in active {
            bits[i] = true;
        }
        Self::from_bits(bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Indices of the active units, ascending.
    pub fn active(&self) -> &[u32] {
        &self.active
    }

    pub fn popcount(&self) -> usize {
        self.active.len()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }
}

/// Draw `count` independent patterns, each with exactly round(p·N) ones at
/// uniformly chosen positions.
pub fn generate_patterns<R: Rng + ?Sized>(
    count: usize,
    params: &NetParams,
    rng: &mut R,
) -> Result<Vec<Pattern>> {
    if count < 1 {
        return Err(Error::constraint("count >= 1", format!("count = {count}")));
    }
    let ones = params.active_count();
    if ones == 0 {
        return Err(Error::constraint(
            "round(p*N) > 0",
            format!("p = {}, N = {}", params.coding_rate, params.n),
        ));
    }
    let patterns: Vec<Pattern> = (0..count)
        .map(|_| random_pattern(params.n, ones, rng))
        .collect();
    for (i, a) in patterns.iter().enumerate() {
        if patterns[..i].iter().any(|b| b == a) {
            log::warn!("generated pattern {i} duplicates an earlier pattern");
        }
    }
    Ok(patterns)
}

pub(crate) fn random_pattern<R: Rng + ?Sized>(n: usize, ones: usize, rng: &mut R) -> Pattern {
    let mut idx = index::sample(rng, n, ones).into_vec();
    idx.sort_unstable();
    Pattern::from_active(n, &idx)
}
