//! Synaptic compensation.
//!
//! Global compensation scales every neuron's input by `1 + κ·d/(1 − d)`
//! using the known deletion level. Local compensation follows Horn et al.:
//! each neuron compares its mean squared field in stored-pattern attractors
//! before and after damage, net of the field it sees in random states, and
//! sets its own gain so that `c²·ŵ = 1`. It never sees the deletion level
//! or the connectivity.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{converge, input_field, make_cue, RetrievalSettings};
use crate::error::{Error, Result};
use crate::network::Network;
use crate::pattern::{random_pattern, Pattern};

/// Lower and upper clamp on the squared strength estimate.
pub const W_SQ_MIN: f64 = 0.01;
pub const W_SQ_MAX: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatsKind {
    Noise,
    Signal,
    Postmorbid,
}

/// Per-neuron mean squared input field over a set of converged states.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldStats {
    pub mean_sq_field: Vec<f64>,
    pub kind: StatsKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    None,
    Global,
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemorySet {
    FirstSet,
    LatestSet,
    RandomSet,
}

/// Where the full-strength signal term of the estimator comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalReference {
    /// Per-pattern captures taken once, right after each pattern is stored.
    Stored,
    /// Re-measured before every lesion step.
    Refreshed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompensationPolicy {
    pub strategy: Strategy,
    pub memory_set: MemorySet,
    pub set_size: usize,
    pub kappa: f64,
    /// Random states used for the noise term; `None` means `set_size`.
    pub noise_pattern_count: Option<usize>,
    pub signal_reference: SignalReference,
}

impl Default for CompensationPolicy {
    fn default() -> Self {
        CompensationPolicy {
            strategy: Strategy::Local,
            memory_set: MemorySet::RandomSet,
            set_size: 10,
            kappa: 1.0,
            noise_pattern_count: None,
            signal_reference: SignalReference::Stored,
        }
    }
}

impl CompensationPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.set_size < 1 {
            return Err(Error::constraint("set_size >= 1", "got 0"));
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(Error::constraint("0 <= kappa <= 1", format!("got {}", self.kappa)));
        }
        if self.noise_pattern_count == Some(0) {
            return Err(Error::constraint("noise_pattern_count >= 1", "got 0"));
        }
        Ok(())
    }

    pub fn noise_count(&self) -> usize {
        self.noise_pattern_count.unwrap_or(self.set_size)
    }
}

/// Set every gain to `1 + κ·d/(1 − d)`.
pub fn global_compensate(net: &mut Network, d: f64, kappa: f64) -> Result<()> {
    if !(0.0..1.0).contains(&d) {
        return Err(Error::constraint("0 <= d < 1", format!("got {d}")));
    }
    let c = 1.0 + kappa * d / (1.0 - d);
    let gains = vec![c; net.n()];
    net.set_comp_gain(&gains)
}

/// Cue each pattern (or, for noise, a fresh random pattern of the same
/// activity), let the network settle and average `h_i²` over the set.
pub fn measure_field_stats<R: Rng + ?Sized>(
    net: &Network,
    patterns: &[Pattern],
    kind: StatsKind,
    settings: &RetrievalSettings,
    rng: &mut R,
) -> Result<FieldStats> {
    if patterns.is_empty() {
        return Err(Error::constraint("patterns non-empty", "empty measurement set"));
    }
    let n = net.n();
    let params = net.params();
    let mut acc = vec![0.0; n];
    for p in patterns {
        if p.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: p.len(),
            });
        }
        let probe = match kind {
            StatsKind::Noise => random_pattern(n, p.popcount(), rng),
            _ => p.clone(),
        };
        let (start, ext) = make_cue(&probe, settings.flip_fraction, params, rng)?;
        let r = converge(net, &start, &ext, settings.max_sweeps, rng)?;
        let h = input_field(net, &r.state)?;
        for (a, x) in acc.iter_mut().zip(h) {
            *a += x * x;
        }
    }
    let k = patterns.len() as f64;
    acc.iter_mut().for_each(|a| *a /= k);
    Ok(FieldStats {
        mean_sq_field: acc,
        kind,
    })
}

/// Indices into the storage history of the patterns feeding the estimator.
pub fn select_memory_set<R: Rng + ?Sized>(
    stored: usize,
    policy: &CompensationPolicy,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if stored == 0 {
        return Err(Error::constraint("pattern history non-empty", "nothing stored"));
    }
    let k = policy.set_size.min(stored);
    Ok(match policy.memory_set {
        MemorySet::FirstSet => (0..k).collect(),
        MemorySet::LatestSet => (stored - k..stored).collect(),
        MemorySet::RandomSet => {
            let mut idx = sample(rng, stored, k).into_vec();
            idx.sort_unstable();
            idx
        }
    })
}

/// Scale a signal capture taken at `gains` up to full synaptic strength,
/// using `c²ŵ = 1`: `c_i² · ⟨S_i²⟩`.
pub fn refer_to_full_strength(stats: &FieldStats, gains: &[f64]) -> Result<FieldStats> {
    if stats.mean_sq_field.len() != gains.len() {
        return Err(Error::Dimension {
            expected: gains.len(),
            got: stats.mean_sq_field.len(),
        });
    }
    Ok(FieldStats {
        mean_sq_field: stats
            .mean_sq_field
            .iter()
            .zip(gains)
            .map(|(s, c)| c * c * s)
            .collect(),
        kind: StatsKind::Signal,
    })
}

/// Full-strength signal captures, one per stored pattern.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SignalBank {
    per_pattern: Vec<Vec<f64>>,
}

impl SignalBank {
    pub fn new() -> Self {
        SignalBank::default()
    }

    pub fn len(&self) -> usize {
        self.per_pattern.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_pattern.is_empty()
    }

    /// Capture the newly stored `patterns`, in storage order.
    pub fn record<R: Rng + ?Sized>(
        &mut self,
        net: &Network,
        patterns: &[Pattern],
        settings: &RetrievalSettings,
        rng: &mut R,
    ) -> Result<()> {
        for p in patterns {
            let s = measure_field_stats(net, std::slice::from_ref(p), StatsKind::Signal, settings, rng)?;
            self.per_pattern
                .push(refer_to_full_strength(&s, net.comp_gain())?.mean_sq_field);
        }
        Ok(())
    }

    /// Mean capture over `indices`.
    pub fn reference(&self, indices: &[usize]) -> Result<FieldStats> {
        let first = indices
            .first()
            .ok_or_else(|| Error::constraint("selection non-empty", "no patterns selected"))?;
        let n = self
            .per_pattern
            .get(*first)
            .ok_or_else(|| Error::constraint("selection within stored history", format!("index {first}")))?
            .len();
        let mut acc = vec![0.0; n];
        for &i in indices {
            let row = self.per_pattern.get(i).ok_or_else(|| {
                Error::constraint("selection within stored history", format!("index {i}"))
            })?;
            for (a, x) in acc.iter_mut().zip(row) {
                *a += x;
            }
        }
        acc.iter_mut().for_each(|a| *a /= indices.len() as f64);
        Ok(FieldStats {
            mean_sq_field: acc,
            kind: StatsKind::Signal,
        })
    }
}

/// The two reference terms of the estimator, taken before a lesion step.
#[derive(Debug, Clone, PartialEq)]
pub struct Premorbid {
    pub noise: FieldStats,
    /// Signal term referred to full synaptic strength.
    pub signal: FieldStats,
}

/// Noise stats over `count` random states with the activity of `like`.
pub fn capture_noise<R: Rng + ?Sized>(
    net: &Network,
    like: &Pattern,
    count: usize,
    settings: &RetrievalSettings,
    rng: &mut R,
) -> Result<FieldStats> {
    let probes = vec![like.clone(); count];
    measure_field_stats(net, &probes, StatsKind::Noise, settings, rng)
}

/// Measure both reference terms now: signal over `selection`, referred to
/// full strength through the current gains, plus noise.
pub fn capture_premorbid<R: Rng + ?Sized>(
    net: &Network,
    selection: &[Pattern],
    noise_count: usize,
    settings: &RetrievalSettings,
    rng: &mut R,
) -> Result<Premorbid> {
    let measured = measure_field_stats(net, selection, StatsKind::Signal, settings, rng)?;
    let signal = refer_to_full_strength(&measured, net.comp_gain())?;
    let noise = capture_noise(net, &selection[0], noise_count, settings, rng)?;
    Ok(Premorbid { noise, signal })
}

/// Output of the per-neuron strength estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    /// Estimated surviving input strength `ŵ′`, after clamping.
    pub w_hat: Vec<f64>,
    pub gains: Vec<f64>,
    /// Neurons with no pre-morbid signal; their gain is left as it was.
    pub flagged: Vec<usize>,
}

/// Horn's estimator from field statistics alone:
/// `ŵ′² = (⟨h²⟩ − ⟨R²⟩) / (c²⟨S²⟩)`, clamped, then `c′ = 1/√ŵ′`.
/// `gains` are the gains in force while `postmorbid` was measured.
pub fn estimate_strength(premorbid: &Premorbid, postmorbid: &FieldStats, gains: &[f64]) -> Result<Estimate> {
    let n = postmorbid.mean_sq_field.len();
    for len in [
        premorbid.noise.mean_sq_field.len(),
        premorbid.signal.mean_sq_field.len(),
        gains.len(),
    ] {
        if len != n {
            return Err(Error::Dimension { expected: n, got: len });
        }
    }
    let mut w_hat = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    let mut flagged = Vec::new();
    for (i, &c) in gains.iter().enumerate() {
        let s = premorbid.signal.mean_sq_field[i];
        if !(s > 0.0) {
            flagged.push(i);
            w_hat.push(1.0 / (c * c));
            out.push(c);
            continue;
        }
        let h = postmorbid.mean_sq_field[i];
        let r = premorbid.noise.mean_sq_field[i];
        let w_sq = ((h - r) / (c * c * s)).clamp(W_SQ_MIN, W_SQ_MAX);
        let w = w_sq.sqrt();
        w_hat.push(w);
        out.push(1.0 / w.sqrt());
    }
    Ok(Estimate {
        w_hat,
        gains: out,
        flagged,
    })
}

/// Re-measure the selected patterns after damage and reset every gain from
/// the estimator. Only field statistics and each neuron's own gain reach
/// the estimator.
pub fn local_compensate<R: Rng + ?Sized>(
    net: &mut Network,
    premorbid: Option<&Premorbid>,
    selection: &[Pattern],
    settings: &RetrievalSettings,
    rng: &mut R,
) -> Result<Estimate> {
    let premorbid = premorbid.ok_or(Error::MissingPremorbid)?;
    let post = measure_field_stats(net, selection, StatsKind::Postmorbid, settings, rng)?;
    let est = estimate_strength(premorbid, &post, net.comp_gain())?;
    if !est.flagged.is_empty() {
        log::warn!(
            "{} neurons have no pre-morbid signal; gains left unchanged",
            est.flagged.len()
        );
    }
    net.set_comp_gain(&est.gains)?;
    Ok(est)
}
