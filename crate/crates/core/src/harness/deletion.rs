use crate::compensation::Strategy;
use crate::error::Result;
use crate::harness::config::{Connectivity, ExperimentConfig};
use crate::harness::curve::{CurveResult, Trace};
use crate::harness::{deletion_grid, lane, mean_overlap, run_trials, trained_network, Compensator};
use crate::network::Network;
use crate::pathology::delete_synapses;
use crate::pattern::Pattern;
use crate::rng::SimRng;

/// Progressive deletion from the current level, measuring mean overlap at
/// `d = 0` and after every step of the grid.
fn deletion_curve(
    net: &mut Network,
    patterns: &[Pattern],
    comp: &mut Compensator,
    cfg: &ExperimentConfig,
    rng: &mut SimRng,
) -> Result<Vec<(f64, f64)>> {
    comp.record(net, patterns, rng)?;
    let mut points = vec![(0.0, mean_overlap(net, patterns, &cfg.retrieval, rng)?)];
    for d in deletion_grid(cfg.net.deletion_step, cfg.lesion.max_deletion) {
        comp.step(net, patterns, rng, |net, rng| delete_synapses(net, d, rng))?;
        points.push((d, mean_overlap(net, patterns, &cfg.retrieval, rng)?));
    }
    Ok(points)
}

fn strategy_name(s: Strategy) -> &'static str {
    match s {
        Strategy::None => "none",
        Strategy::Global => "global",
        Strategy::Local => "local",
    }
}

/// Mean overlap over deletion level, without compensation and with the
/// configured strategy, on the same trained network per trial.
pub fn run_deletion_baseline(cfg: &ExperimentConfig) -> Result<CurveResult> {
    cfg.validate()?;
    let mut strategies = vec![Strategy::None];
    if cfg.compensation.strategy != Strategy::None {
        strategies.push(cfg.compensation.strategy);
    }
    let per_trial = run_trials(cfg.run.trials, |t| {
        let (net, patterns) = trained_network(cfg, &cfg.connectivity, cfg.patterns.count, &mut lane(cfg.run.seed, t, 0))?;
        strategies
            .iter()
            .map(|&s| {
                let mut net = net.clone();
                let policy = crate::compensation::CompensationPolicy {
                    strategy: s,
                    ..cfg.compensation
                };
                let mut comp = Compensator::new(policy, cfg.retrieval);
                let points = deletion_curve(&mut net, &patterns, &mut comp, cfg, &mut lane(cfg.run.seed, t, 1))?;
                Ok(Trace {
                    series: strategy_name(s).into(),
                    trial: t,
                    points,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(CurveResult::from_traces(cfg.clone(), per_trial.into_iter().flatten().collect()))
}

/// Uncompensated deletion on the configured small-world network against a
/// flat-random network of the same size.
pub fn run_robustness(cfg: &ExperimentConfig) -> Result<CurveResult> {
    cfg.validate()?;
    let small_world = cfg.connectivity.with_strategy(Connectivity::SmallWorld);
    let flat = cfg.connectivity.with_strategy(Connectivity::FlatRandom);
    let per_trial = run_trials(cfg.run.trials, |t| {
        [("small_world", &small_world), ("flat_random", &flat)]
            .into_iter()
            .map(|(name, conn)| {
                let (mut net, patterns) =
                    trained_network(cfg, conn, cfg.patterns.count, &mut lane(cfg.run.seed, t, 0))?;
                let mut comp = Compensator::none(cfg.retrieval);
                let points = deletion_curve(&mut net, &patterns, &mut comp, cfg, &mut lane(cfg.run.seed, t, 1))?;
                Ok(Trace {
                    series: name.into(),
                    trial: t,
                    points,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(CurveResult::from_traces(cfg.clone(), per_trial.into_iter().flatten().collect()))
}
