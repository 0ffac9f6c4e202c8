use crate::dynamics::{overlap, retrieve, RetrievalSettings};
use crate::error::{Error, Result};
use crate::harness::config::{Connectivity, ConnectivitySpec, ExperimentConfig};
use crate::harness::curve::{mean, row, CurveResult, Series, Trace};
use crate::harness::{lane, run_trials};
use crate::learning::{store_patterns, LearningSchedule};
use crate::network::{make_network, Network};
use crate::pattern::generate_patterns;
use crate::rng::SimRng;
use crate::topology::clustering_coefficient;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityEstimate {
    /// Patterns stored before recall fell below threshold twice in a row.
    pub capacity: usize,
    /// Mean sweeps to settle over all retrievals at the timing load.
    pub retrieval_time: f64,
}

/// Store patterns one at a time into `net`, recalling every stored pattern
/// after each addition. Capacity is the count stored before the mean
/// overlap drops below `threshold` on two consecutive additions, or
/// `max_patterns` if that never happens.
///
/// Storage continues past the capacity point until `timing_load` patterns
/// are in, so the retrieval time is always measured at that load.
#[allow(clippy::too_many_arguments)]
pub fn estimate_capacity(
    net: &mut Network,
    schedule: &LearningSchedule,
    retrieval: &RetrievalSettings,
    threshold: f64,
    max_patterns: usize,
    timing_load: usize,
    rng: &mut SimRng,
) -> Result<CapacityEstimate> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::constraint("capacity threshold in [0, 1)", format!("got {threshold}")));
    }
    if timing_load < 1 || timing_load > max_patterns {
        return Err(Error::constraint(
            "1 <= timing_load <= max_patterns",
            format!("timing_load = {timing_load}, max_patterns = {max_patterns}"),
        ));
    }
    let params = *net.params();
    let pool = generate_patterns(max_patterns, &params, rng)?;
    let mut below = 0;
    let mut capacity = None;
    let mut retrieval_time = f64::NAN;
    for m in 1..=max_patterns {
        store_patterns(net, &pool[m - 1..m], schedule, rng)?;
        let mut total = 0.0;
        let mut sweeps = 0usize;
        for p in &pool[..m] {
            let r = retrieve(net, p, retrieval, rng)?;
            total += overlap(p, &r.state.s, &params);
            sweeps += r.retrieval_time;
        }
        if m == timing_load {
            retrieval_time = sweeps as f64 / m as f64;
        }
        if capacity.is_none() {
            if total / (m as f64) < threshold {
                below += 1;
                if below == 2 {
                    capacity = Some(m - 2);
                }
            } else {
                below = 0;
            }
        }
        if capacity.is_some() && m >= timing_load {
            break;
        }
    }
    Ok(CapacityEstimate {
        capacity: capacity.unwrap_or(max_patterns),
        retrieval_time,
    })
}

/// Capacity and retrieval time across small-world rewiring probabilities,
/// plus flat-random and Gaussian references, against measured clustering.
///
/// Series: `capacity/<family>` and `retrieval_time/<family>`, x = mean
/// clustering coefficient. Traces hold one point per trial under
/// `capacity/<label>` and `retrieval_time/<label>`.
pub fn run_capacity_vs_clustering(cfg: &ExperimentConfig) -> Result<CurveResult> {
    cfg.validate()?;
    let mut nets: Vec<ConnectivitySpec> = cfg
        .capacity
        .p_rewire
        .iter()
        .map(|&p| ConnectivitySpec {
            strategy: Connectivity::SmallWorld,
            p_rewire: p,
            ..cfg.connectivity.clone()
        })
        .collect();
    if cfg.capacity.include_reference {
        nets.push(cfg.connectivity.with_strategy(Connectivity::FlatRandom));
        nets.push(cfg.connectivity.with_strategy(Connectivity::Gaussian));
    }
    let per_trial = run_trials(cfg.run.trials, |t| {
        nets.iter()
            .map(|conn| {
                let mut rng = lane(cfg.run.seed, t, 0);
                let mask = conn.build(&cfg.net, &mut rng)?;
                let c = clustering_coefficient(&mask)?;
                let mut net = make_network(cfg.net, &mask)?;
                let est = estimate_capacity(
                    &mut net,
                    &cfg.learning,
                    &cfg.retrieval,
                    cfg.capacity.threshold,
                    cfg.capacity.max_patterns,
                    cfg.capacity.timing_load,
                    &mut rng,
                )?;
                Ok((c, est))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut traces = Vec::new();
    let mut series: Vec<Series> = Vec::new();
    for (i, conn) in nets.iter().enumerate() {
        let family = match conn.strategy {
            Connectivity::FlatRandom => "flat_random",
            Connectivity::Gaussian => "gaussian",
            Connectivity::SmallWorld => "small_world",
        };
        let cs: Vec<f64> = per_trial.iter().map(|r| r[i].0).collect();
        let x = mean(&cs);
        for (metric, get) in [
            ("capacity", (|e: &CapacityEstimate| e.capacity as f64) as fn(&CapacityEstimate) -> f64),
            ("retrieval_time", |e: &CapacityEstimate| e.retrieval_time),
        ] {
            let ys: Vec<f64> = per_trial.iter().map(|r| get(&r[i].1)).collect();
            for (t, (&c, &y)) in cs.iter().zip(&ys).enumerate() {
                traces.push(Trace {
                    series: format!("{metric}/{}", conn.label()),
                    trial: t,
                    points: vec![(c, y)],
                });
            }
            let name = format!("{metric}/{family}");
            match series.iter_mut().find(|s| s.name == name) {
                Some(s) => s.rows.push(row(x, &ys)),
                None => series.push(Series {
                    name,
                    rows: vec![row(x, &ys)],
                }),
            }
        }
    }
    for s in &mut series {
        s.rows.sort_by(|a, b| a.x.total_cmp(&b.x));
    }
    Ok(CurveResult {
        config: cfg.clone(),
        series,
        traces,
        snapshots: Vec::new(),
    })
}
