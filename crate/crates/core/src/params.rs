use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Network-wide constants shared by learning, retrieval and lesioning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetParams {
    /// Unit count.
    pub n: usize,
    /// Connections per unit at construction.
    pub k: usize,
    /// Firing threshold.
    pub theta: f64,
    /// Noise temperature of the logistic update.
    pub temperature: f64,
    /// Learning-rate constant.
    pub gamma: f64,
    /// External input strength while learning.
    pub e_learn: f64,
    /// External input strength while retrieving.
    pub e_retrieve: f64,
    /// Fraction of active units in a pattern.
    pub coding_rate: f64,
    /// Deletion step, as a fraction of the original synapse count.
    pub deletion_step: f64,
}

impl NetParams {
    /// Full-size values used for replication runs (1600 units, 200 connections).
    pub fn paper() -> Self {
        NetParams {
            n: 1600,
            k: 200,
            theta: 0.048,
            temperature: 0.005,
            gamma: 0.025,
            e_learn: 0.065,
            e_retrieve: 0.035,
            coding_rate: 0.1,
            deletion_step: 0.01,
        }
    }

    /// Reduced size for quick runs (800 units, 100 connections, same K/N).
    pub fn desk() -> Self {
        NetParams {
            n: 800,
            k: 100,
            ..Self::paper()
        }
    }

    /// Number of active units in every generated pattern.
    pub fn active_count(&self) -> usize {
        (self.coding_rate * self.n as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.coding_rate;
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::constraint("0 < p < 0.5", format!("p = {p}")));
        }
        if self.n < 2 {
            return Err(Error::constraint("N >= 2", format!("N = {}", self.n)));
        }
        if self.k == 0 || self.k > self.n - 1 {
            return Err(Error::constraint(
                "0 < K <= N-1",
                format!("K = {}, N = {}", self.k, self.n),
            ));
        }
        if !(self.theta > self.e_retrieve) {
            return Err(Error::constraint(
                "theta > e_retrieve",
                format!("theta = {}, e_retrieve = {}", self.theta, self.e_retrieve),
            ));
        }
        if !(self.e_learn > self.theta) {
            return Err(Error::constraint(
                "e_learn > theta",
                format!("e_learn = {}, theta = {}", self.e_learn, self.theta),
            ));
        }
        if !(self.deletion_step > 0.0 && self.deletion_step <= 1.0) {
            return Err(Error::constraint(
                "delta_d in (0, 1]",
                format!("delta_d = {}", self.deletion_step),
            ));
        }
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(Error::constraint(
                "T >= 0",
                format!("T = {}", self.temperature),
            ));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::constraint("gamma > 0", format!("gamma = {}", self.gamma)));
        }
        Ok(())
    }
}

impl Default for NetParams {
    fn default() -> Self {
        Self::paper()
    }
}
