//! Damage: uniform synaptic deletion and cascading tau lesions.
//!
//! Tau lesions never remove synapses. Each lesion centre multiplies the
//! output transmission of nearby units by `1 − A·exp(−δ²/(2σ²))`, and new
//! centres appear near old ones, so damage spreads along the ring.

use std::io::Write;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Network;
use crate::topology::ring_distance;

/// Remove uniformly chosen live synapses until `d` of the original count
/// is gone.
pub fn delete_synapses<R: Rng + ?Sized>(net: &mut Network, d: f64, rng: &mut R) -> Result<()> {
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::Lesion(format!("deletion fraction {d} outside [0, 1]")));
    }
    let original = net.original_edge_count();
    let target_removed = (d * original as f64).round() as usize;
    let removed = original - net.live_edge_count();
    if target_removed < removed {
        return Err(Error::Lesion(format!(
            "deletion fraction {d} is below the current level {:.4}",
            net.deletion_fraction()
        )));
    }
    for _ in removed..target_removed {
        let slot = rng.random_range(0..net.live_edge_count());
        net.remove_live(slot);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauRate {
    Standard,
    /// Squared per-step multiplier and doubled spreading width.
    Enhanced,
}

/// Lesion options fixed at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauSettings {
    pub rate: TauRate,
    /// Spread of new centres around their parent (standard-rate value).
    pub sigma_spread: f64,
    pub sigma_lesion: f64,
    /// Peak attenuation at a centre, per step.
    pub amplitude: f64,
    /// Centres activated per step; `None` means `max(1, N/100)`.
    pub step_size: Option<usize>,
    /// Scale each unit's attenuation by a uniform draw in [0, 2).
    pub jitter: bool,
    /// Reserved: revisit units until fully blocked. Not implemented.
    pub revisit_units: bool,
}

impl Default for TauSettings {
    fn default() -> Self {
        TauSettings {
            rate: TauRate::Standard,
            sigma_spread: 4.0,
            sigma_lesion: 2.0,
            amplitude: 0.5,
            step_size: None,
            jitter: false,
            revisit_units: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauState {
    centres: Vec<u32>,
    sigma_spread: f64,
    sigma_lesion: f64,
    amplitude: f64,
    rate: TauRate,
    step_size: usize,
    jitter: bool,
    units_considered: usize,
}

impl TauState {
    pub fn new(n: usize, settings: &TauSettings) -> Result<Self> {
        if settings.revisit_units {
            return Err(Error::constraint(
                "revisit_units = false",
                "revisiting units until full blocking is not implemented",
            ));
        }
        if !(settings.sigma_lesion > 0.0) {
            return Err(Error::constraint("sigma_lesion > 0", format!("got {}", settings.sigma_lesion)));
        }
        if !(settings.sigma_spread > 0.0) {
            return Err(Error::constraint("sigma_spread > 0", format!("got {}", settings.sigma_spread)));
        }
        if !(0.0..=1.0).contains(&settings.amplitude) {
            return Err(Error::constraint("0 <= A <= 1", format!("got {}", settings.amplitude)));
        }
        let step_size = settings.step_size.unwrap_or((n / 100).max(1));
        if step_size < 1 {
            return Err(Error::constraint("z >= 1", "got 0"));
        }
        let sigma_spread = match settings.rate {
            TauRate::Standard => settings.sigma_spread,
            TauRate::Enhanced => 2.0 * settings.sigma_spread,
        };
        Ok(TauState {
            centres: Vec::new(),
            sigma_spread,
            sigma_lesion: settings.sigma_lesion,
            amplitude: settings.amplitude,
            rate: settings.rate,
            step_size,
            jitter: settings.jitter,
            units_considered: 0,
        })
    }

    pub fn centres(&self) -> &[u32] {
        &self.centres
    }

    pub fn units_considered(&self) -> usize {
        self.units_considered
    }

    pub fn step_size(&self) -> usize {
        self.step_size
    }

    pub fn sigma_spread(&self) -> f64 {
        self.sigma_spread
    }

    pub fn rate(&self) -> TauRate {
        self.rate
    }

    /// Multiplier applied to a unit at ring distance `delta` from a new
    /// centre, before squaring or jitter.
    pub fn damping(&self, delta: f64) -> f64 {
        1.0 - self.amplitude * (-delta * delta / (2.0 * self.sigma_lesion * self.sigma_lesion)).exp()
    }
}

/// Choose `n_seeds` distinct initial centres. Transmission is untouched.
pub fn tau_seed<R: Rng + ?Sized>(
    net: &Network,
    tau: &mut TauState,
    n_seeds: usize,
    rng: &mut R,
) -> Result<()> {
    if n_seeds < 1 || n_seeds > net.n() {
        return Err(Error::Lesion(format!(
            "need 1 <= n_seeds <= {}, got {n_seeds}",
            net.n()
        )));
    }
    if !tau.centres.is_empty() {
        return Err(Error::Lesion("lesion centres already seeded".into()));
    }
    tau.centres = sample(rng, net.n(), n_seeds)
        .into_iter()
        .map(|i| i as u32)
        .collect();
    Ok(())
}

/// One cascade step: spawn up to `z` new centres next to existing ones and
/// damp transmission around each of them.
pub fn tau_step<R: Rng + ?Sized>(net: &mut Network, tau: &mut TauState, rng: &mut R) -> Result<()> {
    if tau.centres.is_empty() {
        return Err(Error::Lesion("no lesion centres; seed first".into()));
    }
    let n = net.n();
    let half = (n / 2).max(1);
    let spread = Normal::new(0.0, tau.sigma_spread).expect("sigma_spread validated");
    let picked = sample(rng, tau.centres.len(), tau.step_size.min(tau.centres.len()));
    let mut fresh = Vec::with_capacity(picked.len());
    for k in picked.iter() {
        let parent = tau.centres[k] as usize;
        let dist = spread.sample(rng).abs().round().clamp(1.0, half as f64) as usize;
        let child = if rng.random_bool(0.5) {
            (parent + dist) % n
        } else {
            (parent + n - dist % n) % n
        };
        fresh.push(child as u32);
    }

    let t = net.transmission_mut();
    for &c in &fresh {
        for (u, tu) in t.iter_mut().enumerate() {
            let delta = ring_distance(n, u, c as usize) as f64;
            let mut f = if tau.jitter {
                let a = (tau.amplitude * rng.random_range(0.0..2.0)).min(1.0);
                1.0 - a * (-delta * delta / (2.0 * tau.sigma_lesion * tau.sigma_lesion)).exp()
            } else {
                tau.damping(delta)
            };
            if tau.rate == TauRate::Enhanced {
                f *= f;
            }
            *tu *= f;
        }
    }
    tau.units_considered += fresh.len();
    tau.centres.extend(fresh);
    Ok(())
}

/// Copy of the per-unit output transmission.
pub fn tau_profile_snapshot(net: &Network) -> Vec<f64> {
    net.transmission().to_vec()
}

/// Write `unit_index,transmission` rows.
pub fn write_transmission_csv<W: Write>(mut out: W, transmission: &[f64]) -> Result<()> {
    writeln!(out, "unit_index,transmission")?;
    for (i, t) in transmission.iter().enumerate() {
        writeln!(out, "{i},{t}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::make_network;
    use crate::params::NetParams;
    use crate::rng::seeded;
    use crate::topology::{build_flat_random, build_gaussian};
    use proptest::prelude::*;

    fn desk_net(seed: u64) -> Network {
        let p = NetParams::desk();
        let mask = build_gaussian(p.n, p.k, 25.0, &mut seeded(seed)).unwrap();
        make_network(p, &mask).unwrap()
    }

    #[test]
    fn deletion_counts() {
        let mut net = desk_net(1);
        let m = net.original_edge_count();
        assert_eq!(m, 40000);
        delete_synapses(&mut net, 0.0, &mut seeded(2)).unwrap();
        assert_eq!(net.live_edge_count(), m);
        delete_synapses(&mut net, 0.5, &mut seeded(2)).unwrap();
        assert_eq!(net.live_edge_count(), 20000);
        delete_synapses(&mut net, 0.5, &mut seeded(2)).unwrap();
        assert_eq!(net.live_edge_count(), 20000);
        assert!(delete_synapses(&mut net, 0.4, &mut seeded(2)).is_err());
        assert!(delete_synapses(&mut net, 1.1, &mut seeded(2)).is_err());
        delete_synapses(&mut net, 1.0, &mut seeded(2)).unwrap();
        assert_eq!(net.live_edge_count(), 0);
    }

    #[test]
    fn paper_scale_deletion_count() {
        let p = NetParams::paper();
        let mask = build_flat_random(p.n, p.k, &mut seeded(1)).unwrap();
        let mut net = make_network(p, &mask).unwrap();
        delete_synapses(&mut net, 0.5, &mut seeded(3)).unwrap();
        assert_eq!(net.original_edge_count(), 160_000);
        assert_eq!(net.live_edge_count(), 80_000);
    }

    #[test]
    fn deleted_synapses_vanish_from_both_sides() {
        let mut net = desk_net(4);
        for e in 0..net.original_edge_count() {
            net.weights_mut()[e] = 0.001 * (e % 7) as f64;
        }
        delete_synapses(&mut net, 0.3, &mut seeded(5)).unwrap();
        assert_eq!(net.symmetry_error(), 0.0);
        assert!(net.weights_within_mask());
        let live: usize = (0..net.n()).map(|i| net.links(i).len()).sum();
        assert_eq!(live, 2 * net.live_edge_count());
        for e in 0..net.original_edge_count() {
            if !net.is_alive(e) {
                assert_eq!(net.edge_weight(e), 0.0);
                let (a, b) = net.edge_ends(e);
                assert!(!net.mask().has_edge(a, b));
            }
        }
    }

    #[test]
    fn seeding_is_bookkeeping_only() {
        let net = desk_net(1);
        let mut tau = TauState::new(net.n(), &TauSettings::default()).unwrap();
        assert_eq!(tau.step_size(), 8);
        assert!(tau_profile_snapshot(&net).iter().all(|&t| t == 1.0));
        tau_seed(&net, &mut tau, 3, &mut seeded(9)).unwrap();
        assert_eq!(tau.centres().len(), 3);
        assert!(tau_profile_snapshot(&net).iter().all(|&t| t == 1.0));
        assert!(tau_seed(&net, &mut tau, 1, &mut seeded(9)).is_err());

        let mut again = TauState::new(net.n(), &TauSettings::default()).unwrap();
        tau_seed(&net, &mut again, 3, &mut seeded(9)).unwrap();
        assert_eq!(again.centres(), tau.centres());

        let mut all = TauState::new(net.n(), &TauSettings::default()).unwrap();
        tau_seed(&net, &mut all, net.n(), &mut seeded(1)).unwrap();
        let mut c = all.centres().to_vec();
        c.sort_unstable();
        assert_eq!(c, (0..net.n() as u32).collect::<Vec<_>>());
        let mut none = TauState::new(net.n(), &TauSettings::default()).unwrap();
        assert!(tau_seed(&net, &mut none, net.n() + 1, &mut seeded(1)).is_err());
        assert!(tau_seed(&net, &mut none, 0, &mut seeded(1)).is_err());
    }

    #[test]
    fn settings_are_checked() {
        let bad = TauSettings {
            revisit_units: true,
            ..TauSettings::default()
        };
        assert!(TauState::new(800, &bad).is_err());
        let bad = TauSettings {
            sigma_lesion: 0.0,
            ..TauSettings::default()
        };
        assert!(TauState::new(800, &bad).is_err());
        let enhanced = TauState::new(
            800,
            &TauSettings {
                rate: TauRate::Enhanced,
                ..TauSettings::default()
            },
        )
        .unwrap();
        assert_eq!(enhanced.sigma_spread(), 8.0);
        let mut net = desk_net(1);
        let mut empty = TauState::new(800, &TauSettings::default()).unwrap();
        assert!(tau_step(&mut net, &mut empty, &mut seeded(1)).is_err());
    }

    #[test]
    fn kernel_values() {
        let tau = TauState::new(800, &TauSettings::default()).unwrap();
        assert_eq!(tau.damping(0.0), 0.5);
        assert!(tau.damping(10.0) >= 1.0 - 0.5 * (-12.5f64).exp());
        assert!((tau.damping(10.0) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn single_centre_profile() {
        let mut net = desk_net(1);
        let settings = TauSettings {
            step_size: Some(1),
            ..TauSettings::default()
        };
        let mut tau = TauState::new(net.n(), &settings).unwrap();
        tau_seed(&net, &mut tau, 1, &mut seeded(2)).unwrap();
        tau_step(&mut net, &mut tau, &mut seeded(3)).unwrap();
        assert_eq!(tau.centres().len(), 2);
        assert_eq!(tau.units_considered(), 1);
        let c = tau.centres()[1] as usize;
        let t = tau_profile_snapshot(&net);
        assert!((t[c] - 0.5).abs() < 1e-12);
        for (u, &tu) in t.iter().enumerate() {
            if ring_distance(net.n(), u, c) >= 10 {
                assert!((tu - 1.0).abs() < 1e-5);
            }
        }
        // Synapses are never removed by tau damage.
        assert_eq!(net.live_edge_count(), net.original_edge_count());
    }

    #[test]
    fn enhanced_blocks_faster() {
        let mut worse = 0;
        for seed in 0..10 {
            let mut means = Vec::new();
            for rate in [TauRate::Standard, TauRate::Enhanced] {
                let mut net = desk_net(1);
                let s = TauSettings {
                    rate,
                    ..TauSettings::default()
                };
                let mut tau = TauState::new(net.n(), &s).unwrap();
                let mut rng = seeded(seed);
                tau_seed(&net, &mut tau, 3, &mut rng).unwrap();
                while tau.units_considered() < 200 {
                    tau_step(&mut net, &mut tau, &mut rng).unwrap();
                }
                means.push(net.transmission().iter().sum::<f64>() / net.n() as f64);
            }
            if means[1] < means[0] {
                worse += 1;
            }
        }
        assert_eq!(worse, 10);
    }

    #[test]
    fn long_run_leaves_undamaged_regions() {
        let mut net = desk_net(1);
        let mut tau = TauState::new(net.n(), &TauSettings::default()).unwrap();
        let mut rng = seeded(4);
        tau_seed(&net, &mut tau, 3, &mut rng).unwrap();
        while tau.units_considered() < net.n() {
            tau_step(&mut net, &mut tau, &mut rng).unwrap();
        }
        let t = net.transmission();
        assert!(t.iter().any(|&x| x > 0.999));
        assert!(t.iter().any(|&x| x < 0.01));
    }

    #[test]
    fn transmission_csv() {
        let mut buf = Vec::new();
        write_transmission_csv(&mut buf, &[1.0, 0.25]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "unit_index,transmission\n0,1\n1,0.25\n");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn transmission_never_increases(seed in 0u64..1000, enhanced in any::<bool>(), jitter in any::<bool>()) {
            let p = NetParams { n: 200, k: 20, ..NetParams::desk() };
            let mask = build_flat_random(200, 20, &mut seeded(seed)).unwrap();
            let mut net = make_network(p, &mask).unwrap();
            let s = TauSettings {
                rate: if enhanced { TauRate::Enhanced } else { TauRate::Standard },
                jitter,
                ..TauSettings::default()
            };
            let mut tau = TauState::new(200, &s).unwrap();
            let mut rng = seeded(seed + 1);
            tau_seed(&net, &mut tau, 2, &mut rng).unwrap();
            let mut prev = tau_profile_snapshot(&net);
            for _ in 0..15 {
                let before = tau.centres().len();
                tau_step(&mut net, &mut tau, &mut rng).unwrap();
                prop_assert!(tau.centres().len() - before <= tau.step_size());
                let now = tau_profile_snapshot(&net);
                for (a, b) in prev.iter().zip(&now) {
                    prop_assert!(*b <= *a && *b >= 0.0 && *b <= 1.0);
                }
                prev = now;
            }
        }

        #[test]
        fn deletion_is_exact(d1 in 0.0f64..0.5, extra in 0.0f64..0.5, seed in 0u64..1000) {
            let p = NetParams { n: 200, k: 20, ..NetParams::desk() };
            let mask = build_flat_random(200, 20, &mut seeded(seed)).unwrap();
            let mut net = make_network(p, &mask).unwrap();
            let m = net.original_edge_count();
            delete_synapses(&mut net, d1, &mut seeded(seed)).unwrap();
            prop_assert_eq!(m - net.live_edge_count(), (d1 * m as f64).round() as usize);
            delete_synapses(&mut net, d1 + extra, &mut seeded(seed)).unwrap();
            prop_assert_eq!(m - net.live_edge_count(), ((d1 + extra) * m as f64).round() as usize);
            prop_assert_eq!(net.symmetry_error(), 0.0);
        }
    }
}
