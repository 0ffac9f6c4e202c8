use serde::{Deserialize, Serialize};

use crate::compensation::{CompensationPolicy, MemorySet, Strategy};
use crate::dynamics::RetrievalSettings;
use crate::error::{Error, Result};
use crate::learning::LearningSchedule;
use crate::params::NetParams;
use crate::pathology::{TauRate, TauSettings};
use crate::rng::SimRng;
use crate::topology::{build_flat_random, build_gaussian, build_small_world, ConnectivityMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    DeletionBaseline,
    SetGradient,
    Capacity,
    Robustness,
    Tau,
    LesionSnapshot,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::DeletionBaseline,
        Experiment::SetGradient,
        Experiment::Capacity,
        Experiment::Robustness,
        Experiment::Tau,
        Experiment::LesionSnapshot,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::DeletionBaseline => "deletion_baseline",
            Experiment::SetGradient => "set_gradient",
            Experiment::Capacity => "capacity",
            Experiment::Robustness => "robustness",
            Experiment::Tau => "tau",
            Experiment::LesionSnapshot => "lesion_snapshot",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Desk,
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    FlatRandom,
    Gaussian,
    SmallWorld,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LesionKind {
    Deletion,
    Tau,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectivitySpec {
    pub strategy: Connectivity,
    /// Gaussian width in units; `None` means `K/4`.
    pub sigma: Option<f64>,
    pub p_rewire: f64,
}

impl ConnectivitySpec {
    pub fn gaussian() -> Self {
        ConnectivitySpec {
            strategy: Connectivity::Gaussian,
            sigma: None,
            p_rewire: 0.01,
        }
    }

    pub fn with_strategy(&self, strategy: Connectivity) -> Self {
        ConnectivitySpec {
            strategy,
            ..self.clone()
        }
    }

    pub fn sigma_for(&self, k: usize) -> f64 {
        self.sigma.unwrap_or(k as f64 / 4.0)
    }

    pub fn build(&self, params: &NetParams, rng: &mut SimRng) -> Result<ConnectivityMask> {
        match self.strategy {
            Connectivity::FlatRandom => build_flat_random(params.n, params.k, rng),
            Connectivity::Gaussian => build_gaussian(params.n, params.k, self.sigma_for(params.k), rng),
            Connectivity::SmallWorld => build_small_world(params.n, params.k, self.p_rewire, rng),
        }
    }

    pub fn label(&self) -> String {
        match self.strategy {
            Connectivity::FlatRandom => "flat_random".into(),
            Connectivity::Gaussian => "gaussian".into(),
            Connectivity::SmallWorld => format!("small_world/p_rewire={}", self.p_rewire),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternSpec {
    /// Patterns stored in single-set experiments.
    pub count: usize,
    /// Sets in the alternating store/lesion protocol.
    pub sets: usize,
    pub per_set: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LesionSpec {
    pub kind: LesionKind,
    /// Last deletion level of a progressive deletion run.
    pub max_deletion: f64,
    /// Final deletion levels of the set-gradient protocol.
    pub final_deletions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauSpec {
    pub rate: TauRate,
    pub sigma_spread: f64,
    pub sigma_lesion: f64,
    pub amplitude: f64,
    pub step_size: Option<usize>,
    pub jitter: bool,
    pub revisit_units: bool,
    pub seeds: usize,
    /// Stop once this many centres have been added.
    pub max_units: usize,
    /// Run the enhanced rate alongside the standard one on shared seeds.
    pub compare_rates: bool,
    /// `units_considered` values at which transmission is recorded.
    pub snapshots: Vec<usize>,
}

impl TauSpec {
    pub fn settings(&self) -> TauSettings {
        TauSettings {
            rate: self.rate,
            sigma_spread: self.sigma_spread,
            sigma_lesion: self.sigma_lesion,
            amplitude: self.amplitude,
            step_size: self.step_size,
            jitter: self.jitter,
            revisit_units: self.revisit_units,
        }
    }

    fn from_settings(t: TauSettings) -> Self {
        TauSpec {
            rate: t.rate,
            sigma_spread: t.sigma_spread,
            sigma_lesion: t.sigma_lesion,
            amplitude: t.amplitude,
            step_size: t.step_size,
            jitter: t.jitter,
            revisit_units: t.revisit_units,
            seeds: 3,
            max_units: 800,
            compare_rates: true,
            snapshots: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradientSpec {
    pub memory_sets: Vec<MemorySet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitySpec {
    /// Rewiring probabilities of the small-world sweep.
    pub p_rewire: Vec<f64>,
    /// Also measure flat-random and Gaussian networks.
    pub include_reference: bool,
    pub threshold: f64,
    pub max_patterns: usize,
    /// Load at which retrieval times are averaged.
    pub timing_load: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub id: String,
    pub trials: usize,
    pub seed: u64,
    pub out_dir: Option<String>,
}

/// Everything an experiment needs; each run is a pure function of this.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub net: NetParams,
    pub connectivity: ConnectivitySpec,
    pub patterns: PatternSpec,
    pub learning: LearningSchedule,
    pub retrieval: RetrievalSettings,
    pub lesion: LesionSpec,
    pub tau: TauSpec,
    pub compensation: CompensationPolicy,
    pub gradient: GradientSpec,
    pub capacity: CapacitySpec,
    pub run: RunSpec,
}

impl ExperimentConfig {
    pub fn preset(experiment: Experiment, preset: Preset) -> Self {
        let desk = preset == Preset::Desk;
        let mut cfg = ExperimentConfig {
            experiment,
            net: if desk { NetParams::desk() } else { NetParams::paper() },
            connectivity: ConnectivitySpec::gaussian(),
            patterns: PatternSpec {
                count: 10,
                sets: 5,
                per_set: if desk { 4 } else { 6 },
            },
            learning: LearningSchedule::default(),
            retrieval: RetrievalSettings::default(),
            lesion: LesionSpec {
                kind: LesionKind::Deletion,
                max_deletion: 0.9,
                final_deletions: vec![0.35],
            },
            tau: TauSpec::from_settings(TauSettings::default()),
            compensation: CompensationPolicy::default(),
            gradient: GradientSpec {
                memory_sets: vec![MemorySet::FirstSet, MemorySet::LatestSet, MemorySet::RandomSet],
            },
            capacity: CapacitySpec {
                p_rewire: vec![0.01, 0.03, 0.1, 0.3, 0.9],
                include_reference: true,
                threshold: 0.8,
                max_patterns: if desk { 60 } else { 150 },
                timing_load: 10,
            },
            run: RunSpec {
                id: experiment.id().into(),
                trials: 10,
                seed: 1,
                out_dir: None,
            },
        };
        match experiment {
            Experiment::SetGradient => {
                cfg.connectivity = cfg.connectivity.with_strategy(Connectivity::FlatRandom);
                cfg.compensation.set_size = cfg.patterns.per_set;
                if !desk {
                    cfg.lesion.final_deletions = vec![0.35, 0.45];
                }
            }
            Experiment::Capacity => {
                cfg.connectivity = cfg.connectivity.with_strategy(Connectivity::SmallWorld);
            }
            Experiment::Robustness => {
                cfg.connectivity = cfg.connectivity.with_strategy(Connectivity::SmallWorld);
                cfg.compensation.strategy = Strategy::None;
                // K = 0.125 N
                cfg.net.k = cfg.net.n / 8;
            }
            Experiment::Tau | Experiment::LesionSnapshot => {
                cfg.net.n = 800;
                cfg.net.k = 100;
                cfg.tau.max_units = cfg.net.n;
                cfg.tau.snapshots = vec![cfg.net.n];
            }
            Experiment::DeletionBaseline => {}
        }
        cfg
    }

    /// Check every parameter invariant, reporting the first violated one.
    pub fn validate(&self) -> Result<()> {
        self.net.validate()?;
        self.learning.validate()?;
        self.compensation.validate()?;
        if self.run.trials < 1 {
            return Err(Error::constraint("trials >= 1", "got 0"));
        }
        if self.retrieval.max_sweeps < 1 {
            return Err(Error::constraint("max_sweeps >= 1", "got 0"));
        }
        if !(0.0..=1.0).contains(&self.retrieval.flip_fraction) {
            return Err(Error::constraint(
                "flip_fraction in [0, 1]",
                format!("got {}", self.retrieval.flip_fraction),
            ));
        }
        if let Some(s) = self.connectivity.sigma {
            if !(s > 0.0) {
                return Err(Error::constraint("sigma_c > 0", format!("got {s}")));
            }
        }
        if !(0.0..=1.0).contains(&self.connectivity.p_rewire) {
            return Err(Error::constraint(
                "p_rewire in [0, 1]",
                format!("got {}", self.connectivity.p_rewire),
            ));
        }
        if self.patterns.count < 1 || self.patterns.per_set < 1 {
            return Err(Error::constraint("pattern count >= 1", "empty pattern set"));
        }
        if self.experiment == Experiment::SetGradient && self.patterns.sets < 3 {
            return Err(Error::constraint(
                "pattern sets >= 3",
                format!("got {}", self.patterns.sets),
            ));
        }
        if !(0.0..1.0).contains(&self.lesion.max_deletion) {
            return Err(Error::constraint(
                "max_deletion in [0, 1)",
                format!("got {}", self.lesion.max_deletion),
            ));
        }
        if let Some(d) = self.lesion.final_deletions.iter().find(|d| !(0.0..1.0).contains(*d)) {
            return Err(Error::constraint("final deletion in [0, 1)", format!("got {d}")));
        }
        crate::pathology::TauState::new(self.net.n, &self.tau.settings())?;
        if self.tau.seeds < 1 || self.tau.seeds > self.net.n {
            return Err(Error::constraint(
                "1 <= tau seeds <= N",
                format!("got {}", self.tau.seeds),
            ));
        }
        if self.gradient.memory_sets.is_empty() {
            return Err(Error::constraint("memory_sets non-empty", "no policy to run"));
        }
        if !(self.capacity.threshold >= 0.0 && self.capacity.threshold < 1.0) {
            return Err(Error::constraint(
                "capacity threshold in [0, 1)",
                format!("got {}", self.capacity.threshold),
            ));
        }
        if self.capacity.max_patterns < 1 {
            return Err(Error::constraint("max_patterns >= 1", "got 0"));
        }
        if let Some(p) = self.capacity.p_rewire.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::constraint("p_rewire in [0, 1]", format!("got {p}")));
        }
        Ok(())
    }
}
