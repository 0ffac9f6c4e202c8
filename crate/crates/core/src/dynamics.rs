//! Retrieval dynamics and the overlap measure.
//!
//! Units are updated asynchronously in a fresh random order every sweep.
//! A unit fires with probability `σ((h_i + e_i − θ)/T)`; at `T = 0` this is
//! plain thresholding. Fields are maintained incrementally: when unit `j`
//! flips, only the fields of its neighbours change.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::error::{Error, Result};
use crate::network::Network;
use crate::params::NetParams;
use crate::pattern::Pattern;

/// Binary network activity plus the number of sweeps run to reach it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkState {
    pub s: Vec<bool>,
    pub sweep_count: usize,
}

impl NetworkState {
    pub fn zeros(n: usize) -> Self {
        NetworkState {
            s: vec![false; n],
            sweep_count: 0,
        }
    }

    pub fn from_pattern(p: &Pattern) -> Self {
        NetworkState {
            s: p.bits().to_vec(),
            sweep_count: 0,
        }
    }

    pub fn active_count(&self) -> usize {
        self.s.iter().filter(|&&b| b).count()
    }
}

/// Per-unit external drive.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalInput {
    pub e: Vec<f64>,
}

impl ExternalInput {
    pub fn zeros(n: usize) -> Self {
        ExternalInput { e: vec![0.0; n] }
    }

    /// `strength` on the active units of `p`, zero elsewhere.
    pub fn on_pattern(p: &Pattern, strength: f64) -> Self {
        let mut e = vec![0.0; p.len()];
        for &i in p.active() {
            e[i as usize] = strength;
        }
        ExternalInput { e }
    }
}

/// Field `h_i = c_i · Σ_j W_ij · t_j · S_j` over live synapses.
pub fn input_field(net: &Network, state: &NetworkState) -> Result<Vec<f64>> {
    check_len(net.n(), state.s.len())?;
    let raw = raw_field(net, &state.s);
    Ok(raw
        .iter()
        .zip(net.comp_gain())
        .map(|(h, c)| c * h)
        .collect())
}

pub(crate) fn raw_field(net: &Network, s: &[bool]) -> Vec<f64> {
    let t = net.transmission();
    (0..net.n())
        .map(|i| {
            net.links(i)
                .iter()
                .filter(|l| s[l.to as usize])
                .map(|l| net.edge_weight(l.edge as usize) * t[l.to as usize])
                .sum()
        })
        .collect()
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}

/// Logistic probability of firing for net drive `x` at temperature `t`.
pub fn fire_probability(x: f64, t: f64) -> f64 {
    1.0 / (1.0 + (-x / t).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Rule {
    Stochastic(f64),
    Deterministic,
}

impl Rule {
    pub(crate) fn for_params(p: &NetParams) -> Self {
        if p.temperature > 0.0 {
            Rule::Stochastic(p.temperature)
        } else {
            Rule::Deterministic
        }
    }
}

/// Firing decision for net drive `x`. Draws are skipped once the logistic
/// saturates in double precision.
#[inline]
pub(crate) fn decide<R: Rng + ?Sized>(rule: Rule, x: f64, rng: &mut R) -> bool {
    match rule {
        Rule::Deterministic => x > 0.0,
        Rule::Stochastic(temp) => {
            let z = x / temp;
            if z > 40.0 {
                true
            } else if z < -40.0 {
                false
            } else {
                rng.random::<f64>() < 1.0 / (1.0 + (-z).exp())
            }
        }
    }
}

/// Working state for repeated sweeps: activity, raw fields
/// (`Σ W t S`, before the gain) and scratch buffers.
#[derive(Debug, Clone)]
pub(crate) struct Sweeper {
    pub s: Vec<bool>,
    pub h_raw: Vec<f64>,
    order: Vec<u32>,
    pub changed: Vec<u32>,
}

impl Sweeper {
    pub fn new(net: &Network, s: Vec<bool>) -> Self {
        let h_raw = if s.iter().any(|&b| b) {
            raw_field(net, &s)
        } else {
            vec![0.0; s.len()]
        };
        Sweeper {
            order: (0..s.len() as u32).collect(),
            changed: Vec::new(),
            s,
            h_raw,
        }
    }

    /// Reset to the all-off state.
    #[cfg(test)]
    pub fn clear(&mut self) {
        self.s.iter_mut().for_each(|b| *b = false);
        self.h_raw.iter_mut().for_each(|h| *h = 0.0);
        self.changed.clear();
    }

    pub fn drive(&self, net: &Network, ext: &[f64], i: usize) -> f64 {
        net.comp_gain()[i] * self.h_raw[i] + ext[i] - net.params().theta
    }

    /// One asynchronous sweep; records flipped units in `changed`.
    pub fn sweep<R: Rng + ?Sized>(&mut self, net: &Network, ext: &[f64], rule: Rule, rng: &mut R) {
        self.changed.clear();
        self.order.shuffle(rng);
        let gain = net.comp_gain();
        let theta = net.params().theta;
        let t = net.transmission();
        for k in 0..self.order.len() {
            let i = self.order[k] as usize;
            let fire = decide(rule, gain[i] * self.h_raw[i] + ext[i] - theta, rng);
            if fire != self.s[i] {
                self.s[i] = fire;
                self.changed.push(i as u32);
                let delta = if fire { t[i] } else { -t[i] };
                for l in net.links(i) {
                    self.h_raw[l.to as usize] += net.edge_weight(l.edge as usize) * delta;
                }
            }
        }
    }

    /// Zero-temperature image of the current state.
    pub fn project(&self, net: &Network, ext: &[f64], out: &mut Vec<bool>) {
        out.clear();
        out.extend((0..self.s.len()).map(|i| self.drive(net, ext, i) > 0.0));
    }
}

fn sweep_once<R: Rng + ?Sized>(
    net: &Network,
    state: &NetworkState,
    external: &ExternalInput,
    rule: Rule,
    rng: &mut R,
) -> Result<NetworkState> {
    check_len(net.n(), state.s.len())?;
    check_len(net.n(), external.e.len())?;
    let mut sw = Sweeper::new(net, state.s.clone());
    sw.sweep(net, &external.e, rule, rng);
    Ok(NetworkState {
        s: sw.s,
        sweep_count: state.sweep_count + 1,
    })
}

/// One stochastic asynchronous sweep at the network temperature.
pub fn update_sweep<R: Rng + ?Sized>(
    net: &Network,
    state: &NetworkState,
    external: &ExternalInput,
    rng: &mut R,
) -> Result<NetworkState> {
    let t = net.params().temperature;
    if !(t > 0.0) {
        return Err(Error::constraint(
            "T > 0",
            "use update_sweep_deterministic for the zero-temperature limit",
        ));
    }
    sweep_once(net, state, external, Rule::Stochastic(t), rng)
}

/// Zero-temperature sweep: each unit fires iff `h_i + e_i > θ`.
pub fn update_sweep_deterministic<R: Rng + ?Sized>(
    net: &Network,
    state: &NetworkState,
    external: &ExternalInput,
    rng: &mut R,
) -> Result<NetworkState> {
    sweep_once(net, state, external, Rule::Deterministic, rng)
}

/// Noisy cue: a copy of `pattern` with `flip_fraction` of its ones moved to
/// random off positions. Retrieval starts from silence, with `e_retrieve`
/// applied to the cue's active units.
pub fn make_cue<R: Rng + ?Sized>(
    pattern: &Pattern,
    flip_fraction: f64,
    params: &NetParams,
    rng: &mut R,
) -> Result<(NetworkState, ExternalInput)> {
    let cue = corrupt(pattern, flip_fraction, rng)?;
    Ok((
        NetworkState::zeros(pattern.len()),
        ExternalInput::on_pattern(&cue, params.e_retrieve),
    ))
}

/// Relocate `round(flip_fraction · popcount)` ones to random zero positions.
pub fn corrupt<R: Rng + ?Sized>(pattern: &Pattern, flip_fraction: f64, rng: &mut R) -> Result<Pattern> {
    if !(0.0..1.0).contains(&flip_fraction) {
        return Err(Error::constraint(
            "flip_fraction in [0, 1)",
            format!("flip_fraction = {flip_fraction}"),
        ));
    }
    let moved = (flip_fraction * pattern.popcount() as f64).round() as usize;
    if moved == 0 {
        return Ok(pattern.clone());
    }
    let zeros: Vec<usize> = (0..pattern.len()).filter(|&i| !pattern.get(i)).collect();
    let moved = moved.min(zeros.len());
    let drop: Vec<u32> = pattern
        .active()
        .choose_multiple(rng, moved)
        .copied()
        .collect();
    let mut bits = pattern.bits().to_vec();
    for i in drop {
        bits[i as usize] = false;
    }
    for &i in zeros.choose_multiple(rng, moved) {
        bits[i] = true;
    }
    Ok(Pattern::from_bits(bits))
}

/// How cues are built and how long a retrieval may run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrievalSettings {
    pub flip_fraction: f64,
    pub max_sweeps: usize,
}

impl Default for RetrievalSettings {
    fn default() -> Self {
        RetrievalSettings {
            flip_fraction: 0.1,
            max_sweeps: 100,
        }
    }
}

/// Outcome of running the dynamics from a cue.
#[derive(Debug, Clone, PartialEq)]
pub struct Retrieval {
    pub state: NetworkState,
    /// Full sweeps executed.
    pub retrieval_time: usize,
    pub converged: bool,
}

/// Sweep until the zero-temperature image of the state has stayed the
/// same for two consecutive sweeps, or `max_sweeps` is reached.
///
/// At `T > 0` raw states keep flickering, so stability is judged on the
/// thresholded image while the sweeps themselves stay stochastic.
pub fn converge<R: Rng + ?Sized>(
    net: &Network,
    state: &NetworkState,
    external: &ExternalInput,
    max_sweeps: usize,
    rng: &mut R,
) -> Result<Retrieval> {
    check_len(net.n(), state.s.len())?;
    check_len(net.n(), external.e.len())?;
    if max_sweeps < 1 {
        return Err(Error::constraint("max_sweeps >= 1", "max_sweeps = 0"));
    }
    let rule = Rule::for_params(net.params());
    let mut sw = Sweeper::new(net, state.s.clone());
    let mut prev = Vec::with_capacity(net.n());
    let mut next = Vec::with_capacity(net.n());
    sw.project(net, &external.e, &mut prev);
    let mut stable = 0;
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_sweeps {
        sw.sweep(net, &external.e, rule, rng);
        sweeps += 1;
        sw.project(net, &external.e, &mut next);
        if next == prev {
            stable += 1;
            if stable >= 2 {
                converged = true;
                break;
            }
        } else {
            stable = 0;
            std::mem::swap(&mut prev, &mut next);
        }
    }
    Ok(Retrieval {
        state: NetworkState {
            s: sw.s,
            sweep_count: state.sweep_count + sweeps,
        },
        retrieval_time: sweeps,
        converged,
    })
}

/// Cue the network with a corrupted copy of `pattern` and let it settle.
pub fn retrieve<R: Rng + ?Sized>(
    net: &Network,
    pattern: &Pattern,
    settings: &RetrievalSettings,
    rng: &mut R,
) -> Result<Retrieval> {
    let (start, ext) = make_cue(pattern, settings.flip_fraction, net.params(), rng)?;
    converge(net, &start, &ext, settings.max_sweeps, rng)
}

/// Overlap `m = Σ_i (ξ_i − p) S_i / (p(1 − p)N)`.
pub fn overlap(pattern: &Pattern, state: &[bool], params: &NetParams) -> f64 {
    assert_eq!(pattern.len(), state.len(), "overlap: length mismatch");
    let p = params.coding_rate;
    let n = pattern.len() as f64;
    let mut sum = 0.0;
    for (&xi, &s) in pattern.bits().iter().zip(state) {
        if s {
            sum += if xi { 1.0 - p } else { -p };
        }
    }
    sum / (p * (1.0 - p) * n)
}

/// `−½ Σ_ij W_ij t_i t_j S_i S_j + θ Σ_i S_i`.
pub fn energy(net: &Network, s: &[bool]) -> f64 {
    let t = net.transmission();
    let mut pair = 0.0;
    let mut active = 0usize;
    for i in 0..net.n() {
        if !s[i] {
            continue;
        }
        active += 1;
        for l in net.links(i) {
            let j = l.to as usize;
            if s[j] {
                pair += net.edge_weight(l.edge as usize) * t[i] * t[j];
            }
        }
    }
    -0.5 * pair + net.params().theta * active as f64
}
