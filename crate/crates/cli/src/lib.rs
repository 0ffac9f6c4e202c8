//! Config resolution, output files and plotting behind the `atrophy` binary.

pub mod svg;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use atrophy::harness::{CurveResult, Experiment, ExperimentConfig, Preset};

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "ATROPHY_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    /// Bad file, unknown key, type mismatch or violated invariant.
    Config(String),
    /// The experiment or output writing failed.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Flag values that win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out_dir: Option<String>,
}

/// Experiment named by the file's top-level `experiment` key, if any.
pub fn experiment_in(text: &str) -> Result<Option<Experiment>, CliError> {
    let table: toml::Table = text.parse().map_err(|e| CliError::Config(format!("{e}")))?;
    match table.get("experiment") {
        None => Ok(None),
        Some(v) => v
            .clone()
            .try_into()
            .map(Some)
            .map_err(|e| CliError::Config(format!("experiment: {e}"))),
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Preset defaults, then the file, then the flags. Unknown keys, type
/// mismatches and violated invariants are all config errors.
pub fn resolve_config(
    experiment: Experiment,
    preset: Preset,
    file: Option<&str>,
    overrides: &Overrides,
) -> Result<ExperimentConfig, CliError> {
    let base = ExperimentConfig::preset(experiment, preset);
    let mut table = toml::Table::try_from(&base).map_err(|e| CliError::Runtime(format!("serialising preset: {e}")))?;
    if let Some(text) = file {
        let over: toml::Table = text.parse().map_err(|e| CliError::Config(format!("{e}")))?;
        merge(&mut table, over);
    }
    table.insert("experiment".into(), toml::Value::String(experiment.id().into()));
    let mut cfg: ExperimentConfig = table.try_into().map_err(|e| CliError::Config(format!("{e}")))?;
    if let Some(s) = overrides.seed {
        cfg.run.seed = s;
    }
    if let Some(t) = overrides.trials {
        cfg.run.trials = t;
    }
    if let Some(d) = &overrides.out_dir {
        cfg.run.out_dir = Some(d.clone());
    }
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

/// Resolved config as TOML, preceded by a comment naming the seed.
pub fn manifest(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let body = toml::to_string(cfg).map_err(|e| CliError::Runtime(format!("serialising config: {e}")))?;
    Ok(format!("# atrophy run manifest\n# experiment = {}, seed = {}\n\n{body}", cfg.experiment.id(), cfg.run.seed))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
}

/// Write `<id>.csv`, `<id>_traces.csv`, `<id>_manifest.toml`, plus
/// `<id>_snapshots.csv` when there are snapshots and one SVG per panel when
/// `plot` is set. Returns the paths written.
pub fn write_outputs(result: &CurveResult, dir: &Path, plot: bool) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("creating {}: {e}", dir.display())))?;
    let id = &result.config.run.id;
    let runtime = |e: atrophy::Error| CliError::Runtime(e.to_string());
    let mut written = Vec::new();

    let mut buf = Vec::new();
    result.write_csv(&mut buf).map_err(runtime)?;
    let path = dir.join(format!("{id}.csv"));
    write_file(&path, &buf)?;
    written.push(path);

    buf.clear();
    result.write_traces_csv(&mut buf).map_err(runtime)?;
    let path = dir.join(format!("{id}_traces.csv"));
    write_file(&path, &buf)?;
    written.push(path);

    if !result.snapshots.is_empty() {
        buf.clear();
        result.write_snapshots_csv(&mut buf).map_err(runtime)?;
        let path = dir.join(format!("{id}_snapshots.csv"));
        write_file(&path, &buf)?;
        written.push(path);
    }

    let path = dir.join(format!("{id}_manifest.toml"));
    write_file(&path, manifest(&result.config)?.as_bytes())?;
    written.push(path);

    if plot {
        for panel in svg::panels(result) {
            let path = dir.join(format!("{id}{}.svg", panel.suffix));
            svg::render_panel(&panel, &path)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Output directory: the flag, then the environment, then `run.out_dir`,
/// then `out`.
pub fn out_dir(cfg: &ExperimentConfig, flag: Option<&str>) -> PathBuf {
    if let Some(d) = flag {
        return PathBuf::from(d);
    }
    if let Ok(d) = std::env::var(OUT_DIR_ENV) {
        if !d.is_empty() {
            return PathBuf::from(d);
        }
    }
    PathBuf::from(cfg.run.out_dir.as_deref().unwrap_or("out"))
}
