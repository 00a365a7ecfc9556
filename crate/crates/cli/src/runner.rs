//! `run`: config resolution, sweep expansion, execution and persistence.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use recoherence::bath::DECOHERENCE_NORMALIZATION;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{self, RunConfig, Scenario};
use crate::error::{CliError, CliResult};
use crate::examples;
use crate::scenario::{self, num, Artifact, Outcome, Summary};
use crate::sweep::Sweep;

/// Environment variable naming the root under which relative output
/// directories are placed.
pub const OUT_ROOT_VAR: &str = "RECOHERENCE_OUT";

#[derive(Debug, Clone, Default)]
pub struct RunRequest {
    pub scenario: Option<Scenario>,
    pub config: Option<PathBuf>,
    pub example: Option<String>,
    pub out: Option<PathBuf>,
    pub sweep: Option<String>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
}

/// Where a run landed and what it produced.
#[derive(Debug)]
pub struct RunReport {
    pub dir: PathBuf,
    pub points: Vec<Outcome>,
}

const KERNEL_CONVENTION: &str =
    "rho(q,q') *= exp(-kappa (q-q')^2) with kappa = eps^2 * int h^2 dk / 8 = eps^2 / (4 cutoff)";
const MASS_KERNEL: &str = "M = 1 + eps^2 K with K = int h^2 / (k^2 + m^2) dk over the full line";
const AMPLITUDE_CONVENTION: &str =
    "alpha_k = +-i eps h(k) / sqrt(2 omega_k), density normalization, J = exp(-c eps^2 D)";

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    scenario: &'static str,
    seed: u64,
    wall_time_seconds: f64,
    decoherence_normalization: f64,
    conventions: Conventions,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepRecord>,
    points: Vec<PointRecord<'a>>,
    outputs: Vec<OutputRecord>,
    config: toml::Value,
}

#[derive(Serialize)]
struct Conventions {
    kernel: &'static str,
    mass_kernel: &'static str,
    amplitudes: &'static str,
}

#[derive(Serialize)]
struct SweepRecord {
    key: String,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct PointRecord<'a> {
    index: usize,
    directory: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    summary: &'a Summary,
    diagnostics: &'a Summary,
}

#[derive(Serialize)]
struct OutputRecord {
    path: String,
    bytes: usize,
    sha256: String,
}

fn load(req: &RunRequest) -> CliResult<RunConfig> {
    let mut cfg = match (&req.config, &req.example) {
        (Some(_), Some(_)) => return Err(CliError::Validation("give --config or --example, not both".into())),
        (Some(path), None) => {
            let text = fs::read_to_string(path).map_err(CliError::io(path))?;
            config::parse(&text, path)?
        }
        (None, Some(name)) => {
            let ex = examples::find(name)
                .ok_or_else(|| CliError::Validation(format!("no example named `{name}`; see list-examples")))?;
            config::parse(ex.text, Path::new(ex.file))?
        }
        (None, None) => {
            let s = req
                .scenario
                .ok_or_else(|| CliError::Validation("give --scenario, --config or --example".into()))?;
            config::parse(&format!("scenario = \"{}\"", s.name()), Path::new("<defaults>"))?
        }
    };
    if let Some(s) = req.scenario {
        if s != cfg.scenario {
            return Err(CliError::Validation(format!(
                "--scenario {} contradicts the config's scenario {}",
                s.name(),
                cfg.scenario.name()
            )));
        }
    }
    if let Some(seed) = req.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn output_dir(req: &RunRequest, cfg: &RunConfig) -> PathBuf {
    if let Some(o) = &req.out {
        return o.clone();
    }
    let rel = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(cfg.scenario.name()));
    match std::env::var_os(OUT_ROOT_VAR) {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(rel),
        _ => rel,
    }
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(CliError::io(path))
}

/// Writes next to the target, then renames over it.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let tmp = path.with_extension("toml.partial");
    write_file(&tmp, bytes)?;
    fs::rename(&tmp, path).map_err(CliError::io(path))
}

fn write_point(dir: &Path, artifacts: &[Artifact]) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    artifacts
        .iter()
        .try_for_each(|a| write_file(&dir.join(&a.name), &a.bytes))
}

pub fn run(req: &RunRequest) -> CliResult<RunReport> {
    let started = Instant::now();
    let cfg = load(req)?;
    let dir = output_dir(req, &cfg);
    let sweep = match (&req.sweep, &cfg.sweep) {
        (Some(flag), _) => Some(Sweep::parse(flag, cfg.scenario)?),
        (None, Some(c)) => Some(Sweep::from_config(c, cfg.scenario)?),
        (None, None) => None,
    };
    let mut base = RunConfig {
        sweep: None,
        ..cfg.clone()
    };
    base.out = None;
    let echo = toml::Value::try_from(&cfg).map_err(|e| CliError::Validation(format!("config echo: {e}")))?;
    let tree = toml::Value::try_from(&base).map_err(|e| CliError::Validation(format!("config echo: {e}")))?;

    // every point is validated before any of them runs
    let configs: Vec<(Option<f64>, RunConfig)> = match &sweep {
        None => vec![(None, base)],
        Some(s) => s
            .values
            .iter()
            .map(|v| Ok((Some(*v), config::from_value(s.apply(&tree, *v)?)?)))
            .collect::<CliResult<_>>()?,
    };
    let plans = configs
        .iter()
        .enumerate()
        .map(|(i, (v, c))| {
            scenario::prepare(c).map_err(|e| match (e, v) {
                (CliError::Validation(m), Some(v)) => CliError::Validation(format!("sweep point {i} ({v}): {m}")),
                (e, _) => e,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let point_dir = |i: usize| -> PathBuf {
        match sweep {
            Some(_) => dir.join(format!("point_{i:04}")),
            None => dir.clone(),
        }
    };
    let workers = req.workers.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Validation(format!("worker pool: {e}")))?;
    log::info!("running {} point(s) of {}", plans.len(), cfg.scenario.name());
    let outcomes: Vec<Outcome> = pool.install(|| {
        plans
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let out = scenario::execute(p)?;
                write_point(&point_dir(i), &out.artifacts)?;
                Ok(out)
            })
            .collect::<CliResult<_>>()
    })?;

    let mut outputs = Vec::new();
    for (i, o) in outcomes.iter().enumerate() {
        let rel = point_dir(i)
            .strip_prefix(&dir)
            .map(Path::to_path_buf)
            .unwrap_or_default();
        for a in &o.artifacts {
            outputs.push(OutputRecord {
                path: rel.join(&a.name).to_string_lossy().into_owned(),
                bytes: a.bytes.len(),
                sha256: digest(&a.bytes),
            });
        }
    }
    if let Some(s) = &sweep {
        let index = index_csv(s, &outcomes);
        write_file(&dir.join(&index.name), &index.bytes)?;
        outputs.push(OutputRecord {
            path: index.name.clone(),
            bytes: index.bytes.len(),
            sha256: digest(&index.bytes),
        });
    }
    let points = outcomes
        .iter()
        .enumerate()
        .map(|(i, o)| PointRecord {
            index: i,
            directory: point_dir(i)
                .strip_prefix(&dir)
                .unwrap_or(Path::new(""))
                .to_string_lossy()
                .into_owned(),
            value: configs[i].0,
            summary: &o.summary,
            diagnostics: &o.diagnostics,
        })
        .collect();
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        scenario: cfg.scenario.name(),
        seed: cfg.seed,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        decoherence_normalization: DECOHERENCE_NORMALIZATION,
        conventions: Conventions {
            kernel: KERNEL_CONVENTION,
            mass_kernel: MASS_KERNEL,
            amplitudes: AMPLITUDE_CONVENTION,
        },
        sweep: sweep.as_ref().map(|s| SweepRecord {
            key: s.key(),
            values: s.values.clone(),
        }),
        points,
        outputs,
        config: echo,
    };
    let text = toml::to_string_pretty(&manifest).map_err(|e| CliError::Numerical(format!("manifest: {e}")))?;
    write_atomic(&dir.join("manifest.toml"), text.as_bytes())?;
    Ok(RunReport { dir, points: outcomes })
}

/// One row per sweep point: its directory, swept value and summary.
fn index_csv(sweep: &Sweep, outcomes: &[Outcome]) -> Artifact {
    let mut keys: Vec<&String> = outcomes.iter().flat_map(|o| o.summary.keys()).collect();
    keys.sort();
    keys.dedup();
    let key = sweep.key();
    let mut header = vec!["point", "directory", key.as_str()];
    header.extend(keys.iter().map(|k| k.as_str()));
    let rows = outcomes.iter().zip(&sweep.values).enumerate().map(|(i, (o, v))| {
        let mut row = vec![i.to_string(), format!("point_{i:04}"), num(*v)];
        row.extend(
            keys.iter()
                .map(|k| o.summary.get(*k).map(|x| num(*x)).unwrap_or_default()),
        );
        row
    });
    Artifact::csv("index.csv", &header, rows)
}
