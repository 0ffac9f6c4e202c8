use crate::compensation::{CompensationPolicy, MemorySet, Strategy};
use crate::error::Result;
use crate::harness::config::{ExperimentConfig, LesionKind};
use crate::harness::curve::{mean, CurveResult, Snapshot, Trace};
use crate::harness::gradient::run_set_gradient;
use crate::harness::{lane, mean_overlap, run_trials, trained_network, Compensator};
use crate::network::make_network;
use crate::pathology::{tau_profile_snapshot, tau_seed, tau_step, TauRate, TauState};

fn rate_name(r: TauRate) -> &'static str {
    match r {
        TauRate::Standard => "standard",
        TauRate::Enhanced => "enhanced",
    }
}

fn rates(cfg: &ExperimentConfig) -> Vec<TauRate> {
    if cfg.tau.compare_rates {
        vec![TauRate::Standard, TauRate::Enhanced]
    } else {
        vec![cfg.tau.rate]
    }
}

/// Tau lesioning with local random-set compensation. Per trial and rate,
/// overlap is traced against `units_considered` (series
/// `overlap/<rate>`); rates share topology, patterns and random streams.
/// Transmission is recorded the first time `units_considered` reaches each
/// configured snapshot value. With at least three pattern sets configured
/// the set-gradient protocol is repeated under tau (series `gradient/...`).
pub fn run_tau_experiment(cfg: &ExperimentConfig) -> Result<CurveResult> {
    cfg.validate()?;
    let policy = CompensationPolicy {
        strategy: Strategy::Local,
        memory_set: MemorySet::RandomSet,
        ..cfg.compensation
    };
    let rates = rates(cfg);
    let per_trial = run_trials(cfg.run.trials, |t| {
        let (net, patterns) = trained_network(cfg, &cfg.connectivity, cfg.patterns.count, &mut lane(cfg.run.seed, t, 0))?;
        let mut out = Vec::new();
        for &rate in &rates {
            let mut net = net.clone();
            let mut rng = lane(cfg.run.seed, t, 1);
            let settings = crate::pathology::TauSettings {
                rate,
                ..cfg.tau.settings()
            };
            let mut tau = TauState::new(cfg.net.n, &settings)?;
            tau_seed(&net, &mut tau, cfg.tau.seeds, &mut rng)?;
            let mut comp = Compensator::new(policy, cfg.retrieval);
            comp.record(&net, &patterns, &mut rng)?;
            let mut points = vec![(0.0, mean_overlap(&net, &patterns, &cfg.retrieval, &mut rng)?)];
            let mut snaps = Vec::new();
            let mut pending: Vec<usize> = cfg.tau.snapshots.clone();
            pending.sort_unstable();
            pending.dedup();
            while tau.units_considered() < cfg.tau.max_units {
                comp.step(&mut net, &patterns, &mut rng, |net, rng| tau_step(net, &mut tau, rng))?;
                let u = tau.units_considered();
                points.push((u as f64, mean_overlap(&net, &patterns, &cfg.retrieval, &mut rng)?));
                while pending.first().is_some_and(|&s| s <= u) {
                    pending.remove(0);
                    snaps.push(Snapshot {
                        series: rate_name(rate).into(),
                        trial: t,
                        units_considered: u,
                        transmission: tau_profile_snapshot(&net),
                    });
                }
            }
            out.push((
                Trace {
                    series: format!("overlap/{}", rate_name(rate)),
                    trial: t,
                    points,
                },
                snaps,
            ));
        }
        Ok(out)
    })?;
    let mut traces = Vec::new();
    let mut snapshots = Vec::new();
    for (trace, snaps) in per_trial.into_iter().flatten() {
        traces.push(trace);
        snapshots.extend(snaps);
    }
    let mut result = CurveResult::from_traces(cfg.clone(), traces);
    result.snapshots = snapshots;

    if cfg.patterns.sets >= 3 {
        let mut g = cfg.clone();
        g.lesion.kind = LesionKind::Tau;
        g.gradient.memory_sets = vec![MemorySet::RandomSet];
        g.compensation = CompensationPolicy {
            set_size: cfg.patterns.per_set,
            ..policy
        };
        let grad = run_set_gradient(&g)?;
        for mut s in grad.series {
            s.name = format!("gradient/{}", s.name);
            result.series.push(s);
        }
        for mut t in grad.traces {
            t.series = format!("gradient/{}", t.series);
            result.traces.push(t);
        }
    }
    Ok(result)
}

/// Tau damage alone on an untrained network: mean transmission against
/// `units_considered` and per-unit snapshots, for each rate.
pub fn run_lesion_snapshot(cfg: &ExperimentConfig) -> Result<CurveResult> {
    cfg.validate()?;
    let rates = rates(cfg);
    let per_trial = run_trials(cfg.run.trials, |t| {
        let mask = cfg.connectivity.build(&cfg.net, &mut lane(cfg.run.seed, t, 0))?;
        let base = make_network(cfg.net, &mask)?;
        let mut out = Vec::new();
        for &rate in &rates {
            let mut net = base.clone();
            let mut rng = lane(cfg.run.seed, t, 1);
            let settings = crate::pathology::TauSettings {
                rate,
                ..cfg.tau.settings()
            };
            let mut tau = TauState::new(cfg.net.n, &settings)?;
            tau_seed(&net, &mut tau, cfg.tau.seeds, &mut rng)?;
            let mut points = vec![(0.0, 1.0)];
            let mut snaps = Vec::new();
            let mut pending: Vec<usize> = cfg.tau.snapshots.clone();
            pending.sort_unstable();
            pending.dedup();
            while tau.units_considered() < cfg.tau.max_units {
                tau_step(&mut net, &mut tau, &mut rng)?;
                let u = tau.units_considered();
                points.push((u as f64, mean(net.transmission())));
                while pending.first().is_some_and(|&s| s <= u) {
                    pending.remove(0);
                    snaps.push(Snapshot {
                        series: rate_name(rate).into(),
                        trial: t,
                        units_considered: u,
                        transmission: tau_profile_snapshot(&net),
                    });
                }
            }
            out.push((
                Trace {
                    series: format!("mean_transmission/{}", rate_name(rate)),
                    trial: t,
                    points,
                },
                snaps,
            ));
        }
        Ok(out)
    })?;
    let mut traces = Vec::new();
    let mut snapshots = Vec::new();
    for (trace, snaps) in per_trial.into_iter().flatten() {
        traces.push(trace);
        snapshots.extend(snaps);
    }
    let mut result = CurveResult::from_traces(cfg.clone(), traces);
    result.snapshots = snapshots;
    Ok(result)
}

/// Shape of one overlap trace around its largest one-step decline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileShape {
    /// Index of the first point after the decline.
    pub drop_index: usize,
    /// x of that point.
    pub drop_at: f64,
    pub drop_size: f64,
    /// Mean of all points before the decline.
    pub pre_drop_mean: f64,
    /// Value right after the decline.
    pub post_drop: f64,
    /// Largest value after the decline.
    pub best_after: f64,
    pub final_value: f64,
}

impl ProfileShape {
    pub fn recovers(&self, margin: f64) -> bool {
        self.best_after > self.post_drop + margin
    }

    /// Final value as a fraction of the pre-drop mean.
    pub fn final_fraction(&self) -> f64 {
        self.final_value / self.pre_drop_mean
    }
}

/// `None` for traces with fewer than two points.
pub fn profile_shape(points: &[(f64, f64)]) -> Option<ProfileShape> {
    if points.len() < 2 {
        return None;
    }
    let (mut idx, mut size) = (1, f64::NEG_INFINITY);
    for i in 1..points.len() {
        let d = points[i - 1].1 - points[i].1;
        if d > size {
            size = d;
            idx = i;
        }
    }
    let before: Vec<f64> = points[..idx].iter().map(|p| p.1).collect();
    let best_after = points[idx..].iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Some(ProfileShape {
        drop_index: idx,
        drop_at: points[idx].0,
        drop_size: size,
        pre_drop_mean: mean(&before),
        post_drop: points[idx].1,
        best_after,
        final_value: points[points.len() - 1].1,
    })
}
