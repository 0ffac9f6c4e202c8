use crate::compensation::{CompensationPolicy, MemorySet};
use crate::error::Result;
use crate::harness::config::{ExperimentConfig, LesionKind};
use crate::harness::curve::{mean, CurveResult, Series, Trace};
use crate::harness::{lane, overlaps, run_trials, Compensator};
use crate::learning::store_patterns;
use crate::network::{make_network, Network};
use crate::pathology::{delete_synapses, tau_seed, tau_step, TauState};
use crate::pattern::{generate_patterns, Pattern};
use crate::rng::SimRng;

pub(crate) fn policy_name(m: MemorySet) -> &'static str {
    match m {
        MemorySet::FirstSet => "first_set",
        MemorySet::LatestSet => "latest_set",
        MemorySet::RandomSet => "random_set",
    }
}

/// Alternate storing one set and lesioning, so that after set `k` of `S`
/// the damage has reached `(k+1)/S` of `final_level` (deletion fraction,
/// or tau centres added). Returns mean overlap per set at the end.
pub(crate) fn alternate(
    cfg: &ExperimentConfig,
    mut net: Network,
    sets: &[Vec<Pattern>],
    memory_set: MemorySet,
    final_level: f64,
    rng: &mut SimRng,
) -> Result<Vec<f64>> {
    let policy = CompensationPolicy {
        memory_set,
        ..cfg.compensation
    };
    let mut comp = Compensator::new(policy, cfg.retrieval);
    let mut tau = match cfg.lesion.kind {
        LesionKind::Tau => {
            let mut t = TauState::new(cfg.net.n, &cfg.tau.settings())?;
            tau_seed(&net, &mut t, cfg.tau.seeds, rng)?;
            Some(t)
        }
        LesionKind::Deletion => None,
    };
    let mut stored: Vec<Pattern> = Vec::new();
    // requested deletion level; the realised fraction is rounded to whole synapses
    let mut level = 0.0f64;
    let s = sets.len() as f64;
    for (k, set) in sets.iter().enumerate() {
        store_patterns(&mut net, set, &cfg.learning, rng)?;
        comp.record(&net, set, rng)?;
        stored.extend(set.iter().cloned());
        let target = final_level * (k + 1) as f64 / s;
        match tau.as_mut() {
            None => {
                let target = (target * 1e9).round() / 1e9;
                while level < target - 1e-9 {
                    level = (level + cfg.net.deletion_step).min(target);
                    comp.step(&mut net, &stored, rng, |net, rng| delete_synapses(net, level, rng))?;
                }
            }
            Some(tau) => {
                while (tau.units_considered() as f64) < target {
                    comp.step(&mut net, &stored, rng, |net, rng| tau_step(net, tau, rng))?;
                }
            }
        }
    }
    sets.iter()
        .map(|set| Ok(mean(&overlaps(&net, set, &cfg.retrieval, rng)?)))
        .collect()
}

/// Alternating store/lesion protocol for every memory-set policy and final
/// damage level. Series `per_set/<policy>/final=<level>` hold recall by set
/// index (1 = oldest); `overall/<policy>` holds recall over all sets
/// against the final level.
///
/// Under tau lesioning the final level is `tau.max_units`.
pub fn run_set_gradient(cfg: &ExperimentConfig) -> Result<CurveResult> {
    cfg.validate()?;
    let levels: Vec<f64> = match cfg.lesion.kind {
        LesionKind::Deletion => cfg.lesion.final_deletions.clone(),
        LesionKind::Tau => vec![cfg.tau.max_units as f64],
    };
    let per_trial = run_trials(cfg.run.trials, |t| {
        let mut setup = lane(cfg.run.seed, t, 0);
        let mask = cfg.connectivity.build(&cfg.net, &mut setup)?;
        let net = make_network(cfg.net, &mask)?;
        let all = generate_patterns(cfg.patterns.sets * cfg.patterns.per_set, &cfg.net, &mut setup)?;
        let sets: Vec<Vec<Pattern>> = all.chunks(cfg.patterns.per_set).map(<[Pattern]>::to_vec).collect();
        let mut out = Vec::new();
        for &m in &cfg.gradient.memory_sets {
            for &level in &levels {
                let per_set = alternate(cfg, net.clone(), &sets, m, level, &mut lane(cfg.run.seed, t, 1))?;
                out.push((m, level, per_set));
            }
        }
        Ok(out)
    })?;

    let mut traces = Vec::new();
    for (t, runs) in per_trial.iter().enumerate() {
        for (m, level, per_set) in runs {
            traces.push(Trace {
                series: format!("per_set/{}/final={}", policy_name(*m), level),
                trial: t,
                points: per_set.iter().enumerate().map(|(i, &y)| ((i + 1) as f64, y)).collect(),
            });
        }
        for &m in &cfg.gradient.memory_sets {
            traces.push(Trace {
                series: format!("overall/{}", policy_name(m)),
                trial: t,
                points: runs
                    .iter()
                    .filter(|r| r.0 == m)
                    .map(|(_, level, per_set)| (*level, mean(per_set)))
                    .collect(),
            });
        }
    }
    let mut result = CurveResult::from_traces(cfg.clone(), traces);
    result.series.sort_by_key(series_rank);
    Ok(result)
}

fn series_rank(s: &Series) -> (bool, String) {
    (s.name.starts_with("overall"), s.name.clone())
}
