use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub x: f64,
    pub mean: f64,
    pub stddev: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub rows: Vec<Row>,
}

/// One trial's raw points for one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub series: String,
    pub trial: usize,
    pub points: Vec<(f64, f64)>,
}

/// Per-unit transmission recorded during a tau run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub series: String,
    pub trial: usize,
    pub units_considered: usize,
    pub transmission: Vec<f64>,
}

/// Output of one experiment: trial-averaged series plus the raw traces
/// they were reduced from.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveResult {
    pub config: ExperimentConfig,
    pub series: Vec<Series>,
    pub traces: Vec<Trace>,
    pub snapshots: Vec<Snapshot>,
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (`n − 1` denominator); zero for one value.
pub fn stddev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

pub fn row(x: f64, values: &[f64]) -> Row {
    Row {
        x,
        mean: mean(values),
        stddev: stddev(values),
        n: values.len(),
    }
}

/// Ranks starting at 1, ties sharing their average rank.
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation; NaN when either side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "spearman needs paired samples");
    let (rx, ry) = (ranks(xs), ranks(ys));
    let (mx, my) = (mean(&rx), mean(&ry));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// First `x` whose value is below `level`, if any.
pub fn first_below(points: &[(f64, f64)], level: f64) -> Option<f64> {
    points.iter().find(|p| p.1 < level).map(|p| p.0)
}

/// First `x` from which every remaining value is below `level`, if any.
pub fn collapse_point(points: &[(f64, f64)], level: f64) -> Option<f64> {
    let last_above = points.iter().rposition(|p| p.1 >= level);
    match last_above {
        None => points.first().map(|p| p.0),
        Some(i) => points.get(i + 1).map(|p| p.0),
    }
}

impl CurveResult {
    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    /// Traces of one series, in trial order.
    pub fn traces_of(&self, name: &str) -> Vec<&Trace> {
        let mut t: Vec<_> = self.traces.iter().filter(|t| t.series == name).collect();
        t.sort_by_key(|t| t.trial);
        t
    }

    /// Build averaged series from traces whose x values line up across
    /// trials. Series appear in first-seen order, rows in x order.
    pub fn from_traces(config: ExperimentConfig, traces: Vec<Trace>) -> Self {
        let mut order: Vec<String> = Vec::new();
        let mut by_series: BTreeMap<String, BTreeMap<u64, (f64, Vec<f64>)>> = BTreeMap::new();
        for t in &traces {
            if !by_series.contains_key(&t.series) {
                order.push(t.series.clone());
            }
            let rows = by_series.entry(t.series.clone()).or_default();
            for &(x, y) in &t.points {
                rows.entry(x.to_bits()).or_insert_with(|| (x, Vec::new())).1.push(y);
            }
        }
        let series = order
            .into_iter()
            .map(|name| {
                let mut rows: Vec<Row> = by_series[&name].values().map(|(x, ys)| row(*x, ys)).collect();
                rows.sort_by(|a, b| a.x.total_cmp(&b.x));
                Series { name, rows }
            })
            .collect();
        CurveResult {
            config,
            series,
            traces,
            snapshots: Vec::new(),
        }
    }

    /// `series,x,mean,stddev,n`
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "series,x,mean,stddev,n")?;
        for s in &self.series {
            for r in &s.rows {
                writeln!(out, "{},{},{},{},{}", s.name, r.x, r.mean, r.stddev, r.n)?;
            }
        }
        Ok(())
    }

    /// `series,trial,x,value`
    pub fn write_traces_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "series,trial,x,value")?;
        for t in &self.traces {
            for (x, y) in &t.points {
                writeln!(out, "{},{},{},{}", t.series, t.trial, x, y)?;
            }
        }
        Ok(())
    }

    /// `series,trial,units_considered,unit_index,transmission`
    pub fn write_snapshots_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "series,trial,units_considered,unit_index,transmission")?;
        for s in &self.snapshots {
            for (i, t) in s.transmission.iter().enumerate() {
                writeln!(out, "{},{},{},{},{}", s.series, s.trial, s.units_considered, i, t)?;
            }
        }
        Ok(())
    }
}
