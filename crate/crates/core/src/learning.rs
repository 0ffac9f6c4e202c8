//! Activity-dependent storage.
//!
//! Each pattern is presented several times through external inputs of
//! strength `e_learn` on its active units. While a pair of connected units
//! has kept its states unchanged for at least `coincidence_window`
//! consecutive sweeps, every further sweep adds
//! `(γ/N)(S_i − p)(S_j − p)` to their shared weight.
//!
//! Only pairs with at least one active endpoint change any field, so those
//! are updated as they happen. Pairs where both units are silent are
//! tallied from the per-unit stability counters and written when the
//! streak ends (a flip or the end of a presentation); the final weights
//! are the same either way.

use rand::Rng;
use serde::{Deserialize, Serialize};

use rand::seq::SliceRandom;

use crate::dynamics::{decide, ExternalInput, Rule};
use crate::error::{Error, Result};
use crate::network::Network;
use crate::params::NetParams;
use crate::pattern::Pattern;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningSchedule {
    pub presentations_per_pattern: usize,
    pub sweeps_per_presentation: usize,
    /// Sweeps a pair must stay unchanged before its weight moves.
    pub coincidence_window: usize,
    /// Divide each increment by `sqrt(c_i c_j)`, so that new learning lands
    /// at baseline strength on the compensated synapse rather than being
    /// amplified by gains set for earlier damage.
    pub gain_scaled: bool,
}

impl Default for LearningSchedule {
    fn default() -> Self {
        LearningSchedule {
            presentations_per_pattern: 10,
            sweeps_per_presentation: 31,
            coincidence_window: 5,
            gain_scaled: true,
        }
    }
}

impl LearningSchedule {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("presentations_per_pattern >= 1", self.presentations_per_pattern),
            ("sweeps_per_presentation >= 1", self.sweeps_per_presentation),
            ("coincidence_window >= 1", self.coincidence_window),
        ] {
            if v < 1 {
                return Err(Error::constraint(name, format!("got {v}")));
            }
        }
        Ok(())
    }

    /// Weight updates a pair receives per presentation when both units
    /// stay put from the first sweep on.
    pub fn updates_per_presentation(&self) -> usize {
        (self.sweeps_per_presentation + 1).saturating_sub(self.coincidence_window)
    }
}

/// `(γ/N)(S_i − p)(S_j − p)`.
pub fn hebbian_increment(si: bool, sj: bool, params: &NetParams) -> f64 {
    let p = params.coding_rate;
    let a = si as u8 as f64 - p;
    let b = sj as u8 as f64 - p;
    params.gamma / params.n as f64 * a * b
}

/// Store `patterns` in order, each through the full presentation schedule.
pub fn store_patterns<R: Rng + ?Sized>(
    net: &mut Network,
    patterns: &[Pattern],
    schedule: &LearningSchedule,
    rng: &mut R,
) -> Result<()> {
    schedule.validate()?;
    for p in patterns {
        if p.len() != net.n() {
            return Err(Error::Dimension {
                expected: net.n(),
                got: p.len(),
            });
        }
    }
    let mut learner = Learner::new(net);
    for p in patterns {
        for _ in 0..schedule.presentations_per_pattern {
            learner.present(net, p, schedule, rng);
        }
    }
    Ok(())
}

struct Learner {
    s: Vec<bool>,
    h: Vec<f64>,
    order: Vec<u32>,
    stable: Vec<usize>,
    flipped: Vec<bool>,
    changed: Vec<u32>,
}

impl Learner {
    fn new(net: &Network) -> Self {
        let n = net.n();
        Learner {
            s: vec![false; n],
            h: vec![0.0; n],
            order: (0..n as u32).collect(),
            stable: vec![0; n],
            flipped: vec![false; n],
            changed: Vec::new(),
        }
    }

    fn present<R: Rng + ?Sized>(
        &mut self,
        net: &mut Network,
        pattern: &Pattern,
        schedule: &LearningSchedule,
        rng: &mut R,
    ) {
        let params = *net.params();
        let window = schedule.coincidence_window;
        let p = params.coding_rate;
        let base = params.gamma / params.n as f64;
        let both_off = base * p * p;
        let theta = params.theta;
        let rule = Rule::for_params(&params);
        let ext = ExternalInput::on_pattern(pattern, params.e_learn).e;

        self.s.iter_mut().for_each(|b| *b = false);
        self.h.iter_mut().for_each(|h| *h = 0.0);
        self.stable.iter_mut().for_each(|r| *r = 0);

        let (adj, weights, trans, gain) = net.split_for_learning();
        let scale = |i: usize, j: usize| {
            if schedule.gain_scaled {
                1.0 / (gain[i] * gain[j]).sqrt()
            } else {
                1.0
            }
        };
        let (s, h, stable, flipped) = (&mut self.s, &mut self.h, &mut self.stable, &mut self.flipped);

        for _ in 0..schedule.sweeps_per_presentation {
            self.changed.clear();
            self.order.shuffle(rng);
            for &i in &self.order {
                let i = i as usize;
                let fire = decide(rule, gain[i] * h[i] + ext[i] - theta, rng);
                if fire == s[i] {
                    continue;
                }
                if fire {
                    // Silent pairs broken by this unit switching on get their
                    // pending updates before the field sees the weight.
                    for l in &adj[i] {
                        let j = l.to as usize;
                        if s[j] || flipped[j] {
                            continue;
                        }
                        let hits = (stable[i].min(stable[j]) + 1).saturating_sub(window);
                        if hits > 0 {
                            weights[l.edge as usize] += hits as f64 * both_off * scale(i, j);
                        }
                    }
                }
                s[i] = fire;
                flipped[i] = true;
                self.changed.push(i as u32);
                let delta = if fire { trans[i] } else { -trans[i] };
                for l in &adj[i] {
                    h[l.to as usize] += weights[l.edge as usize] * delta;
                }
            }

            for (r, f) in stable.iter_mut().zip(flipped.iter_mut()) {
                if *f {
                    *r = 0;
                    *f = false;
                } else {
                    *r += 1;
                }
            }

            // Pairs with an active endpoint: apply now so fields stay exact.
            for i in 0..s.len() {
                if !s[i] || stable[i] < window {
                    continue;
                }
                for l in &adj[i] {
                    let j = l.to as usize;
                    if stable[j] < window || (s[j] && j < i) {
                        continue;
                    }
                    let sj = if s[j] { 1.0 - p } else { -p };
                    let inc = base * (1.0 - p) * sj * scale(i, j);
                    weights[l.edge as usize] += inc;
                    h[j] += inc * trans[i];
                    if s[j] {
                        h[i] += inc * trans[j];
                    }
                }
            }
        }

        // End of presentation closes every remaining silent-pair streak.
        for (i, links) in adj.iter().enumerate() {
            if s[i] {
                continue;
            }
            for l in links {
                let j = l.to as usize;
                if j < i || s[j] {
                    continue;
                }
                let hits = (stable[i].min(stable[j]) + 1).saturating_sub(window);
                if hits > 0 {
                    weights[l.edge as usize] += hits as f64 * both_off * scale(i, j);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{overlap, raw_field, retrieve, RetrievalSettings, Sweeper};
    use crate::network::make_network;
    use crate::pattern::generate_patterns;
    use crate::rng::seeded;
    use crate::topology::{build_flat_random, build_gaussian};

    #[test]
    fn increment_values() {
        let p = NetParams::paper();
        let both = hebbian_increment(true, true, &p);
        assert!((both - 0.025 / 1600.0 * 0.81).abs() < 1e-18);
        assert!((both - 1.2656e-5).abs() < 1e-9);
        let mixed = hebbian_increment(true, false, &p);
        assert!((mixed + 1.4063e-6).abs() < 1e-9);
        assert!((mixed - hebbian_increment(false, true, &p)).abs() < 1e-20);
    }

    #[test]
    fn window_gate_blocks_short_streaks() {
        let params = NetParams {
            n: 200,
            k: 20,
            ..NetParams::desk()
        };
        let mask = build_flat_random(200, 20, &mut seeded(1)).unwrap();
        let mut net = make_network(params, &mask).unwrap();
        let pats = generate_patterns(2, &params, &mut seeded(2)).unwrap();
        let sched = LearningSchedule {
            presentations_per_pattern: 3,
            sweeps_per_presentation: 4,
            coincidence_window: 5,
            gain_scaled: false,
        };
        store_patterns(&mut net, &pats, &sched, &mut seeded(3)).unwrap();
        assert!(net.live_edges().iter().all(|&e| net.edge_weight(e as usize) == 0.0));
    }

    /// Slow reference: per-edge counters updated every sweep.
    fn reference_store(net: &mut Network, pats: &[Pattern], sched: &LearningSchedule, seed: u64) {
        let params = *net.params();
        let mut rng = seeded(seed);
        let m = net.original_edge_count();
        let mut sw = Sweeper::new(net, vec![false; net.n()]);
        for pat in pats {
            for _ in 0..sched.presentations_per_pattern {
                let ext = ExternalInput::on_pattern(pat, params.e_learn);
                sw.clear();
                let mut counter = vec![0usize; m];
                let mut prev = sw.s.clone();
                for _ in 0..sched.sweeps_per_presentation {
                    sw.h_raw = raw_field(net, &sw.s);
                    sw.sweep(net, &ext.e, Rule::for_params(&params), &mut rng);
                    for &e in net.live_edges().to_vec().iter() {
                        let e = e as usize;
                        let (i, j) = net.edge_ends(e);
                        if sw.s[i] == prev[i] && sw.s[j] == prev[j] {
                            counter[e] += 1;
                        } else {
                            counter[e] = 0;
                        }
                        if counter[e] >= sched.coincidence_window {
                            let g = net.comp_gain();
                            let sc = if sched.gain_scaled { 1.0 / (g[i] * g[j]).sqrt() } else { 1.0 };
                            net.weights_mut()[e] += hebbian_increment(sw.s[i], sw.s[j], &params) * sc;
                        }
                    }
                    prev = sw.s.clone();
                }
            }
        }
    }

    #[test]
    fn matches_per_edge_reference() {
        let params = NetParams {
            n: 120,
            k: 12,
            ..NetParams::desk()
        };
        let mask = build_flat_random(120, 12, &mut seeded(5)).unwrap();
        let pats = generate_patterns(3, &params, &mut seeded(6)).unwrap();
        let sched = LearningSchedule {
            presentations_per_pattern: 2,
            sweeps_per_presentation: 12,
            coincidence_window: 3,
            gain_scaled: true,
        };
        let mut fast = make_network(params, &mask).unwrap();
        let mut gains = vec![1.0; 120];
        gains[3] = 1.7;
        gains[50] = 2.2;
        fast.set_comp_gain(&gains).unwrap();
        let mut slow = fast.clone();
        store_patterns(&mut fast, &pats, &sched, &mut seeded(7)).unwrap();
        reference_store(&mut slow, &pats, &sched, 7);
        for e in 0..fast.original_edge_count() {
            let (a, b) = (fast.edge_weight(e), slow.edge_weight(e));
            assert!((a - b).abs() < 1e-15, "edge {e}: {a} vs {b}");
        }
    }

    #[test]
    fn learned_weights_follow_covariance_rule() {
        // Low noise and desk-sized weights: the presented state tracks the pattern.
        let params = NetParams {
            n: 200,
            k: 24,
            temperature: 0.001,
            gamma: 0.025 * 200.0 / 800.0,
            ..NetParams::desk()
        };
        let mask = build_flat_random(200, 24, &mut seeded(1)).unwrap();
        let mut net = make_network(params, &mask).unwrap();
        let pats = generate_patterns(5, &params, &mut seeded(2)).unwrap();
        store_patterns(&mut net, &pats, &LearningSchedule::default(), &mut seeded(3)).unwrap();
        assert_eq!(net.symmetry_error(), 0.0);
        assert!(net.weights_within_mask());
        let p = params.coding_rate;
        let (mut sxy, mut sxx, mut syy, mut sx, mut sy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let m = net.original_edge_count() as f64;
        for e in 0..net.original_edge_count() {
            let (i, j) = net.edge_ends(e);
            let x: f64 = pats
                .iter()
                .map(|q| (q.get(i) as u8 as f64 - p) * (q.get(j) as u8 as f64 - p))
                .sum();
            let y = net.edge_weight(e);
            sxy += x * y;
            sxx += x * x;
            syy += y * y;
            sx += x;
            sy += y;
        }
        let cov = sxy / m - sx / m * sy / m;
        let r = cov / ((sxx / m - (sx / m).powi(2)).sqrt() * (syy / m - (sy / m).powi(2)).sqrt());
        assert!(r > 0.95, "correlation {r}");
    }

    #[test]
    fn single_pattern_is_recalled() {
        let params = NetParams::desk();
        let mut total = 0.0;
        for seed in 0..10 {
            let mask = build_gaussian(params.n, params.k, 25.0, &mut seeded(seed)).unwrap();
            let mut net = make_network(params, &mask).unwrap();
            let mut rng = seeded(seed + 50);
            let pats = generate_patterns(1, &params, &mut rng).unwrap();
            store_patterns(&mut net, &pats, &LearningSchedule::default(), &mut rng).unwrap();
            let r = retrieve(&net, &pats[0], &RetrievalSettings::default(), &mut rng).unwrap();
            total += overlap(&pats[0], &r.state.s, &params);
        }
        assert!(total / 10.0 >= 0.95, "mean overlap {}", total / 10.0);
    }

    #[test]
    fn storage_order_has_small_effect() {
        // Light load, low noise: presented states match their patterns.
        let params = NetParams {
            temperature: 0.001,
            ..NetParams::desk()
        };
        let mask = build_flat_random(params.n, params.k, &mut seeded(1)).unwrap();
        let pats = generate_patterns(5, &params, &mut seeded(2)).unwrap();
        let mut a = make_network(params, &mask).unwrap();
        let mut b = a.clone();
        store_patterns(&mut a, &pats, &LearningSchedule::default(), &mut seeded(3)).unwrap();
        let rev: Vec<_> = pats.iter().rev().cloned().collect();
        store_patterns(&mut b, &rev, &LearningSchedule::default(), &mut seeded(3)).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for e in 0..a.original_edge_count() {
            num += (a.edge_weight(e) - b.edge_weight(e)).powi(2);
            den += a.edge_weight(e).powi(2);
        }
        assert!((num / den).sqrt() < 0.05, "relative rms {}", (num / den).sqrt());
    }

    #[test]
    fn rejects_bad_inputs() {
        let params = NetParams::desk();
        let mask = build_flat_random(params.n, params.k, &mut seeded(1)).unwrap();
        let mut net = make_network(params, &mask).unwrap();
        let wrong = Pattern::from_active(10, &[1]);
        assert!(store_patterns(&mut net, &[wrong], &LearningSchedule::default(), &mut seeded(1)).is_err());
        let bad = LearningSchedule {
            coincidence_window: 0,
            ..LearningSchedule::default()
        };
        assert!(bad.validate().is_err());
    }
}
