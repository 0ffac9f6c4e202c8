//! Acceptance criteria at desk scale. Each test prints one PASS/FAIL line
//! to stderr (bypassing output capture) and then asserts.

use std::io::Write;

use atrophy::compensation::{capture_premorbid, local_compensate, select_memory_set, CompensationPolicy, MemorySet};
use atrophy::dynamics::{overlap, retrieve, RetrievalSettings};
use atrophy::harness::{
    collapse_point, first_below, mean, profile_shape, run_capacity_vs_clustering, run_deletion_baseline,
    run_set_gradient, run_tau_experiment, spearman, Connectivity, Experiment, ExperimentConfig, Preset,
};
use atrophy::learning::{store_patterns, LearningSchedule};
use atrophy::pathology::{delete_synapses, tau_seed, tau_step, TauSettings, TauState};
use atrophy::rng::seeded;
use atrophy::topology::{build_gaussian, build_small_world, clustering_coefficient, ring_lattice, ConnectivityMask};
use atrophy::{generate_patterns, make_network, NetParams, Pattern};

fn report(criterion: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {criterion:>2} [{verdict}] {name}: {detail}");
}

/// Brute-force clustering: for every unit, count connected pairs among its
/// neighbours by direct adjacency lookups.
fn triangle_clustering(mask: &ConnectivityMask) -> f64 {
    let n = mask.n();
    let mut total = 0.0;
    for i in 0..n {
        let nb = mask.neighbours(i);
        let k = nb.len();
        if k < 2 {
            continue;
        }
        let mut links = 0usize;
        for a in 0..k {
            for b in a + 1..k {
                if mask.has_edge(nb[a] as usize, nb[b] as usize) {
                    links += 1;
                }
            }
        }
        total += links as f64 / (k * (k - 1) / 2) as f64;
    }
    total / n as f64
}

#[test]
fn criterion_01_small_world_clustering() {
    let values: Vec<f64> = (0..5u64)
        .map(|s| clustering_coefficient(&build_small_world(1600, 200, 0.01, &mut seeded(s)).unwrap()).unwrap())
        .collect();
    let pass = values.iter().all(|c| (c - 0.73).abs() <= 0.05);
    report(1, "small-world clustering 0.73 +- 0.05", pass, &format!("{values:.4?}"));
    assert!(pass);
}

#[test]
fn criterion_02_ring_lattice_clustering() {
    let mask = ring_lattice(20, 4).unwrap();
    let brute = triangle_clustering(&mask);
    let c = clustering_coefficient(&mask).unwrap();
    let pass = (c - 0.5).abs() < 1e-12 && (brute - 0.5).abs() < 1e-12;
    report(2, "ring lattice clustering = 0.5", pass, &format!("library {c}, triangle count {brute}"));
    assert!(pass);
}

#[test]
fn criterion_03_storage_fidelity() {
    let params = NetParams::desk();
    let settings = RetrievalSettings::default();
    let mut per_trial = Vec::new();
    for t in 0..10u64 {
        let mut rng = seeded(300 + t);
        let mask = build_gaussian(params.n, params.k, params.k as f64 / 4.0, &mut rng).unwrap();
        let mut net = make_network(params, &mask).unwrap();
        let pats = generate_patterns(10, &params, &mut rng).unwrap();
        store_patterns(&mut net, &pats, &LearningSchedule::default(), &mut rng).unwrap();
        let m: Vec<f64> = pats
            .iter()
            .map(|p| overlap(p, &retrieve(&net, p, &settings, &mut rng).unwrap().state.s, &params))
            .collect();
        per_trial.push(mean(&m));
    }
    let m = mean(&per_trial);
    let pass = m >= 0.9;
    report(3, "storage fidelity mean overlap >= 0.9", pass, &format!("mean {m:.3}, per trial {per_trial:.2?}"));
    assert!(pass);
}

#[test]
fn criterion_04_compensation_extends_function() {
    let mut cfg = ExperimentConfig::preset(Experiment::DeletionBaseline, Preset::Desk);
    cfg.run.seed = 4;
    let r = run_deletion_baseline(&cfg).unwrap();
    let level = |name: &str| -> Vec<f64> {
        r.traces_of(name)
            .iter()
            .map(|t| first_below(&t.points, 0.5).unwrap_or(1.0))
            .collect()
    };
    let (off, on) = (level("none"), level("local"));
    let ratio = mean(&on) / mean(&off);
    let pass = ratio >= 1.3;
    report(
        4,
        "collapse level with local compensation >= 1.3x without",
        pass,
        &format!("without {:.3}, with {:.3}, ratio {ratio:.3}", mean(&off), mean(&on)),
    );
    assert!(pass);
}

fn gradient_config() -> ExperimentConfig {
    let cfg = ExperimentConfig::preset(Experiment::SetGradient, Preset::Desk);
    assert_eq!(cfg.connectivity.strategy, Connectivity::FlatRandom);
    cfg
}

#[test]
fn criterion_05_memory_set_policy_ordering() {
    let mut cfg = gradient_config();
    cfg.run.seed = 5;
    cfg.gradient.memory_sets = vec![MemorySet::FirstSet, MemorySet::RandomSet];
    cfg.lesion.final_deletions = (0..=12).map(|i| 0.55 + 0.025 * i as f64).collect();
    let r = run_set_gradient(&cfg).unwrap();
    let collapse = |name: &str| -> Vec<f64> {
        r.traces_of(name)
            .iter()
            .map(|t| collapse_point(&t.points, 0.5).unwrap_or(1.0))
            .collect()
    };
    let first = collapse("overall/first_set");
    let random = collapse("overall/random_set");
    let wins = first.iter().zip(&random).filter(|(f, r)| f < r).count();
    let pass = wins >= 8;
    report(
        5,
        "first-set collapses before random-set in >= 8/10 trials",
        pass,
        &format!("{wins}/10; first {first:.3?}; random {random:.3?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_06_remote_vs_recent_gradient() {
    let mut cfg = gradient_config();
    cfg.run.seed = 6;
    cfg.gradient.memory_sets = vec![MemorySet::RandomSet];
    cfg.lesion.final_deletions = vec![0.35];
    let r = run_set_gradient(&cfg).unwrap();
    let rhos: Vec<f64> = r
        .traces_of("per_set/random_set/final=0.35")
        .iter()
        .map(|t| {
            let (x, y): (Vec<f64>, Vec<f64>) = t.points.iter().copied().unzip();
            spearman(&x, &y)
        })
        .filter(|r| !r.is_nan())
        .collect();
    let m = mean(&rhos);
    let pass = m < 0.0;
    report(6, "per-set recall falls with recency (mean Spearman < 0)", pass, &format!("mean rho {m:.3} over {} trials", rhos.len()));
    assert!(pass);
}

#[test]
fn criterion_07_connectivity_trade_off() {
    let mut cfg = ExperimentConfig::preset(Experiment::Capacity, Preset::Desk);
    cfg.run.seed = 7;
    cfg.capacity.p_rewire = vec![0.01, 0.9];
    cfg.capacity.include_reference = false;
    let r = run_capacity_vs_clustering(&cfg).unwrap();
    let get = |name: &str| -> Vec<f64> { r.traces_of(name).iter().map(|t| t.points[0].1).collect() };
    let (cap_lo, cap_hi) = (get("capacity/small_world/p_rewire=0.01"), get("capacity/small_world/p_rewire=0.9"));
    let (time_lo, time_hi) = (
        get("retrieval_time/small_world/p_rewire=0.01"),
        get("retrieval_time/small_world/p_rewire=0.9"),
    );
    let cap_ok = cap_lo.iter().zip(&cap_hi).filter(|(a, b)| a < b).count();
    let time_ok = time_lo.iter().zip(&time_hi).filter(|(a, b)| a > b).count();
    let pass = cap_ok >= 8 && time_ok >= 8;
    report(
        7,
        "capacity(0.01) < capacity(0.9) and time(0.01) > time(0.9), >= 8/10 each",
        pass,
        &format!(
            "capacity {cap_ok}/10 (means {:.1} vs {:.1}), time {time_ok}/10 (means {:.2} vs {:.2})",
            mean(&cap_lo),
            mean(&cap_hi),
            mean(&time_lo),
            mean(&time_hi)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_tau_profile_shape() {
    let mut cfg = ExperimentConfig::preset(Experiment::Tau, Preset::Desk);
    cfg.run.seed = 8;
    cfg.patterns.sets = 0;
    cfg.tau.snapshots.clear();
    let r = run_tau_experiment(&cfg).unwrap();
    let standard: Vec<_> = r
        .traces_of("overlap/standard")
        .iter()
        .map(|t| profile_shape(&t.points).unwrap())
        .collect();
    let enhanced: Vec<_> = r
        .traces_of("overlap/enhanced")
        .iter()
        .map(|t| profile_shape(&t.points).unwrap())
        .collect();
    let shape_ok = |s: &atrophy::harness::ProfileShape| {
        s.drop_size > 0.4 && s.recovers(0.0) && s.final_value > 0.0 && s.final_fraction() < 0.6
    };
    let shaped = standard.iter().filter(|s| shape_ok(s)).count();
    let earlier = standard.iter().zip(&enhanced).filter(|(s, e)| e.drop_at < s.drop_at).count();
    let pass = shaped == standard.len() && earlier == standard.len();
    let detail = standard
        .iter()
        .zip(&enhanced)
        .map(|(s, e)| {
            format!(
                "[drop {:.2} at {} (enh {}), pre {:.2}, best after {:.2}, final {:.2}]",
                s.drop_size, s.drop_at, e.drop_at, s.pre_drop_mean, s.best_after, s.final_value
            )
        })
        .collect::<Vec<_>>()
        .join(" ");
    report(
        8,
        "tau: one-step drop > 0.4, recovery, final in (0, 60%) of pre-drop; enhanced drops earlier",
        pass,
        &format!("shape {shaped}/10, enhanced earlier {earlier}/10 {detail}"),
    );
    assert!(pass);
}

#[test]
fn criterion_09_strength_estimator_oracle() {
    let params = NetParams::desk();
    let settings = RetrievalSettings::default();
    let policy = CompensationPolicy::default();
    let mut lines = Vec::new();
    let mut pass = true;
    for d in [0.1, 0.2, 0.3] {
        let mut means = Vec::new();
        for t in 0..4u64 {
            let mut rng = seeded(900 + t);
            let mask = build_gaussian(params.n, params.k, params.k as f64 / 4.0, &mut rng).unwrap();
            let mut net = make_network(params, &mask).unwrap();
            let pats = generate_patterns(10, &params, &mut rng).unwrap();
            store_patterns(&mut net, &pats, &LearningSchedule::default(), &mut rng).unwrap();
            let idx = select_memory_set(pats.len(), &policy, &mut rng).unwrap();
            let sel: Vec<Pattern> = idx.iter().map(|&i| pats[i].clone()).collect();
            let pre = capture_premorbid(&net, &sel, policy.noise_count(), &settings, &mut rng).unwrap();
            delete_synapses(&mut net, d, &mut rng).unwrap();
            let est = local_compensate(&mut net, Some(&pre), &sel, &settings, &mut rng).unwrap();
            means.push(mean(&est.w_hat));
        }
        let m = mean(&means);
        pass &= (m - (1.0 - d)).abs() <= 0.1;
        lines.push(format!("d={d}: mean w' {m:.3} (target {:.1})", 1.0 - d));
    }
    report(9, "mean estimated w' within 0.1 of 1-d", pass, &lines.join(", "));
    assert!(pass);
}

#[test]
fn criterion_10_invariant_suite() {
    let params = NetParams {
        n: 400,
        k: 50,
        ..NetParams::desk()
    };
    let settings = RetrievalSettings::default();
    let mut rng = seeded(10);
    let mask = build_gaussian(params.n, params.k, 12.5, &mut rng).unwrap();
    let mut net = make_network(params, &mask).unwrap();
    let pats = generate_patterns(5, &params, &mut rng).unwrap();
    let mut failures: Vec<String> = Vec::new();
    let symmetric = |net: &atrophy::Network| -> bool {
        let exact = (0..net.n()).all(|i| {
            net.links(i)
                .iter()
                .all(|l| net.weight(i, l.to as usize) == net.weight(l.to as usize, i))
        });
        exact && net.symmetry_error() == 0.0 && net.weights_within_mask()
    };
    let check_symmetry = |net: &atrophy::Network, after: &str, failures: &mut Vec<String>| {
        if !symmetric(net) {
            failures.push(format!("asymmetric weights after {after}"));
        }
    };

    store_patterns(&mut net, &pats, &LearningSchedule::default(), &mut rng).unwrap();
    check_symmetry(&net, "storage", &mut failures);
    let policy = CompensationPolicy {
        set_size: 5,
        ..CompensationPolicy::default()
    };
    let pre = capture_premorbid(&net, &pats, policy.noise_count(), &settings, &mut rng).unwrap();
    delete_synapses(&mut net, 0.2, &mut rng).unwrap();
    check_symmetry(&net, "deletion", &mut failures);
    local_compensate(&mut net, Some(&pre), &pats, &settings, &mut rng).unwrap();
    check_symmetry(&net, "compensation", &mut failures);

    let mut tau = TauState::new(params.n, &TauSettings::default()).unwrap();
    tau_seed(&net, &mut tau, 3, &mut rng).unwrap();
    let weights_before: Vec<f64> = (0..net.original_edge_count()).map(|e| net.edge_weight(e)).collect();
    let mut prev = net.transmission().to_vec();
    for _ in 0..60 {
        tau_step(&mut net, &mut tau, &mut rng).unwrap();
        let now = net.transmission();
        if now.iter().zip(&prev).any(|(a, b)| a > b || *a < 0.0 || *a > 1.0) {
            failures.push("transmission increased or left [0, 1]".into());
            break;
        }
        prev = now.to_vec();
    }
    let weights_after: Vec<f64> = (0..net.original_edge_count()).map(|e| net.edge_weight(e)).collect();
    if weights_before != weights_after {
        failures.push("tau lesioning changed weights".into());
    }
    check_symmetry(&net, "tau lesioning", &mut failures);

    let p = &pats[0];
    if (overlap(p, p.bits(), &params) - 1.0).abs() > 1e-12 {
        failures.push("overlap(xi, xi) != 1".into());
    }
    if overlap(p, &vec![false; params.n], &params) != 0.0 {
        failures.push("overlap(xi, 0) != 0".into());
    }
    let unit = params.coding_rate * (1.0 - params.coding_rate) * params.n as f64;
    let mut state = vec![false; params.n];
    let mut last = 0.0;
    for i in 0..params.n {
        state[i] = true;
        let m = overlap(p, &state, &params);
        let expected = (p.get(i) as u8 as f64 - params.coding_rate) / unit;
        if ((m - last) - expected).abs() > 1e-12 {
            failures.push(format!("per-bit overlap delta wrong at unit {i}"));
            break;
        }
        last = m;
    }

    let mut cfg = ExperimentConfig::preset(Experiment::DeletionBaseline, Preset::Desk);
    cfg.net = params;
    cfg.run.trials = 2;
    cfg.patterns.count = 4;
    cfg.compensation.set_size = 4;
    cfg.net.deletion_step = 0.1;
    cfg.lesion.max_deletion = 0.3;
    let csv = |cfg: &ExperimentConfig| {
        let mut buf = Vec::new();
        run_deletion_baseline(cfg).unwrap().write_csv(&mut buf).unwrap();
        buf
    };
    let (a, b) = (csv(&cfg), csv(&cfg));
    if a != b {
        failures.push("reruns differ".into());
    }
    cfg.run.seed += 1;
    if csv(&cfg) == a {
        failures.push("different seeds gave identical output".into());
    }

    let pass = failures.is_empty();
    report(
        10,
        "symmetry, overlap identities, monotone transmission, byte-identical reruns",
        pass,
        &if pass { "all hold".to_string() } else { failures.join("; ") },
    );
    assert!(pass);
}
