//! Scripted experiments.
//!
//! Each experiment is a pure function of an [`ExperimentConfig`]: trials get
//! their own random streams forked from the master seed, run in parallel and
//! are reduced in trial order, so the output does not depend on scheduling.

mod capacity;
pub mod config;
pub mod curve;
mod deletion;
mod gradient;
mod tau;

pub use capacity::{estimate_capacity, run_capacity_vs_clustering, CapacityEstimate};
pub use config::{
    CapacitySpec, Connectivity, ConnectivitySpec, Experiment, ExperimentConfig, GradientSpec, LesionKind,
    LesionSpec, PatternSpec, Preset, RunSpec, TauSpec,
};
pub use curve::{collapse_point, first_below, mean, spearman, stddev, CurveResult, Row, Series, Snapshot, Trace};
pub use deletion::{run_deletion_baseline, run_robustness};
pub use gradient::run_set_gradient;
pub use tau::{profile_shape, run_lesion_snapshot, run_tau_experiment, ProfileShape};

use rand::SeedableRng;
use rayon::prelude::*;

use crate::compensation::{
    capture_noise, capture_premorbid, global_compensate, local_compensate, select_memory_set, CompensationPolicy,
    Premorbid, SignalBank, SignalReference, Strategy,
};
use crate::dynamics::{overlap, retrieve, RetrievalSettings};
use crate::error::Result;
use crate::network::Network;
use crate::pattern::Pattern;
use crate::rng::SimRng;

/// Dispatch on `config.experiment`.
pub fn run(config: &ExperimentConfig) -> Result<CurveResult> {
    match config.experiment {
        Experiment::DeletionBaseline => run_deletion_baseline(config),
        Experiment::SetGradient => run_set_gradient(config),
        Experiment::Capacity => run_capacity_vs_clustering(config),
        Experiment::Robustness => run_robustness(config),
        Experiment::Tau => run_tau_experiment(config),
        Experiment::LesionSnapshot => run_lesion_snapshot(config),
    }
}

/// Stream `lane` of trial `trial`. Lanes separate the parts of a trial
/// (setup, lesioning, ...) so that paired runs can share one of them.
pub(crate) fn lane(seed: u64, trial: usize, lane: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed ^ lane.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(trial as u64 + 1);
    rng
}

pub(crate) fn run_trials<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}

/// Overlap of each pattern's retrieval with the pattern itself.
pub(crate) fn overlaps(
    net: &Network,
    patterns: &[Pattern],
    settings: &RetrievalSettings,
    rng: &mut SimRng,
) -> Result<Vec<f64>> {
    patterns
        .iter()
        .map(|p| Ok(overlap(p, &retrieve(net, p, settings, rng)?.state.s, net.params())))
        .collect()
}

pub(crate) fn mean_overlap(
    net: &Network,
    patterns: &[Pattern],
    settings: &RetrievalSettings,
    rng: &mut SimRng,
) -> Result<f64> {
    Ok(mean(&overlaps(net, patterns, settings, rng)?))
}

/// Wraps lesion steps with the configured compensation.
pub(crate) struct Compensator {
    policy: CompensationPolicy,
    settings: RetrievalSettings,
    bank: SignalBank,
}

impl Compensator {
    pub fn new(policy: CompensationPolicy, settings: RetrievalSettings) -> Self {
        Compensator {
            policy,
            settings,
            bank: SignalBank::new(),
        }
    }

    pub fn none(settings: RetrievalSettings) -> Self {
        Compensator::new(
            CompensationPolicy {
                strategy: Strategy::None,
                ..CompensationPolicy::default()
            },
            settings,
        )
    }

    fn uses_bank(&self) -> bool {
        self.policy.strategy == Strategy::Local && self.policy.signal_reference == SignalReference::Stored
    }

    /// Take the reference captures of patterns that were just stored.
    pub fn record(&mut self, net: &Network, new: &[Pattern], rng: &mut SimRng) -> Result<()> {
        if self.uses_bank() {
            self.bank.record(net, new, &self.settings, rng)?;
        }
        Ok(())
    }

    /// Run `lesion` between the pre- and post-morbid measurements.
    /// `stored` is the storage history, oldest first.
    pub fn step<F>(&mut self, net: &mut Network, stored: &[Pattern], rng: &mut SimRng, lesion: F) -> Result<()>
    where
        F: FnOnce(&mut Network, &mut SimRng) -> Result<()>,
    {
        match self.policy.strategy {
            Strategy::None => lesion(net, rng),
            Strategy::Global => {
                lesion(net, rng)?;
                global_compensate(net, net.deletion_fraction(), self.policy.kappa)
            }
            Strategy::Local => {
                let idx = select_memory_set(stored.len(), &self.policy, rng)?;
                let selection: Vec<Pattern> = idx.iter().map(|&i| stored[i].clone()).collect();
                let pre = match self.policy.signal_reference {
                    SignalReference::Stored => Premorbid {
                        noise: capture_noise(net, &selection[0], self.policy.noise_count(), &self.settings, rng)?,
                        signal: self.bank.reference(&idx)?,
                    },
                    SignalReference::Refreshed => {
                        capture_premorbid(net, &selection, self.policy.noise_count(), &self.settings, rng)?
                    }
                };
                lesion(net, rng)?;
                local_compensate(net, Some(&pre), &selection, &self.settings, rng)?;
                Ok(())
            }
        }
    }
}

/// Fresh network under `conn`, with `count` patterns generated and stored.
pub(crate) fn trained_network(
    cfg: &ExperimentConfig,
    conn: &ConnectivitySpec,
    count: usize,
    rng: &mut SimRng,
) -> Result<(Network, Vec<Pattern>)> {
    let mask = conn.build(&cfg.net, rng)?;
    let mut net = crate::network::make_network(cfg.net, &mask)?;
    let patterns = crate::pattern::generate_patterns(count, &cfg.net, rng)?;
    crate::learning::store_patterns(&mut net, &patterns, &cfg.learning, rng)?;
    Ok((net, patterns))
}

/// Deletion levels `step, 2·step, …` up to and including `max`.
pub(crate) fn deletion_grid(step: f64, max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 1u32;
    loop {
        let d = (f64::from(k) * step).min(max);
        // keep grid values identical across runs and free of float drift
        let d = (d * 1e9).round() / 1e9;
        out.push(d);
        if d >= max - 1e-12 {
            break;
        }
        k += 1;
    }
    out
}
