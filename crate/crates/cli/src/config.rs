//! Run configuration as read from TOML.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use recoherence::{BathSpec, BlochState, CouplingSchedule};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Dephasing,
    Oscillator,
    Spinboson,
    Sudden,
    OracleCompare,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Dephasing => "dephasing",
            Scenario::Oscillator => "oscillator",
            Scenario::Spinboson => "spinboson",
            Scenario::Sudden => "sudden",
            Scenario::OracleCompare => "oracle-compare",
        }
    }

    /// Table holding this scenario's own keys; bare sweep keys resolve here.
    pub fn block(self) -> &'static str {
        match self {
            Scenario::OracleCompare => "oracle",
            other => other.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub bath: BathConfig,
    pub schedule: Option<ScheduleConfig>,
    #[serde(default = "defaults::sample_dt")]
    pub sample_dt: f64,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub dephasing: DephasingConfig,
    #[serde(default)]
    pub oscillator: OscillatorConfig,
    #[serde(default)]
    pub spinboson: SpinBosonConfig,
    #[serde(default)]
    pub sudden: SuddenConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    pub mass: f64,
    pub cutoff: f64,
}

impl Default for BathConfig {
    fn default() -> Self {
        Self {
            mass: 10.0,
            cutoff: 0.01,
        }
    }
}

impl BathConfig {
    pub fn build(&self) -> CliResult<BathSpec<f64>> {
        BathSpec::new(self.mass, self.cutoff).map_err(invalid("bath"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default)]
    pub start: f64,
    pub segments: Vec<SegmentConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SegmentConfig {
    SmoothRamp { duration: f64, to: f64 },
    LinearRamp { duration: f64, to: f64 },
    Hold { duration: f64 },
    Step { to: f64 },
}

impl ScheduleConfig {
    pub fn build(&self) -> CliResult<CouplingSchedule<f64>> {
        let mut b = CouplingSchedule::starting_at(self.start);
        for seg in &self.segments {
            b = match *seg {
                SegmentConfig::SmoothRamp { duration, to } => b.smooth_ramp(duration, to),
                SegmentConfig::LinearRamp { duration, to } => b.linear_ramp(duration, to),
                SegmentConfig::Hold { duration } => b.hold(duration),
                SegmentConfig::Step { to } => b.step(to),
            };
        }
        b.build().map_err(invalid("schedule"))
    }
}

/// Sweep stored in the config; the command-line flag replaces it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub key: String,
    /// `a:b:n` with `pi` allowed in the bounds.
    pub range: Option<String>,
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorChoice {
    Exact,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DephasingConfig {
    pub initial: [f64; 3],
    pub analytic: bool,
    pub oracle: bool,
    pub oracle_dt: f64,
    pub integrator: IntegratorChoice,
    pub decouple: Option<DecoupleConfig>,
}

/// Sudden switch-off of the coupling, optionally followed by a slow
/// attempt to recouple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoupleConfig {
    pub eps_max: f64,
    pub t_hold: f64,
    pub t_after: f64,
    pub recouple_ramp: Option<f64>,
    pub recouple_hold: Option<f64>,
}

impl Default for DephasingConfig {
    fn default() -> Self {
        Self {
            initial: [1.0, 0.0, 0.0],
            analytic: true,
            oracle: true,
            oracle_dt: 0.01,
            integrator: IntegratorChoice::Exact,
            decouple: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub center: f64,
    #[serde(default)]
    pub momentum: f64,
    pub width: f64,
    /// Complex weight as `[re, im]`.
    #[serde(default = "defaults::unit_weight")]
    pub weight: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub q_min: f64,
    pub q_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OscillatorConfig {
    pub omega: f64,
    /// Coupling held fixed when no schedule is given.
    pub eps: f64,
    pub packets: Vec<PacketConfig>,
    pub grid: GridConfig,
    /// Frames written besides the recombination frame.
    pub times: Vec<f64>,
    /// Packet pair whose meeting time gets its own frame; empty for none.
    pub recombine: Vec<usize>,
    /// Also write the full `ρ(q, q')` of every frame.
    pub write_matrix: bool,
}

impl Default for OscillatorConfig {
    fn default() -> Self {
        let packet = |center| PacketConfig {
            center,
            momentum: 0.0,
            width: 0.25,
            weight: defaults::unit_weight(),
        };
        Self {
            omega: 1.0,
            eps: 0.5,
            packets: vec![packet(-4.0), packet(4.0)],
            grid: GridConfig {
                q_min: -12.0,
                q_max: 12.0,
                points: 2048,
            },
            times: vec![0.0],
            recombine: vec![0, 1],
            write_matrix: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpinBosonConfig {
    pub omega: f64,
    pub initial: [f64; 3],
    /// Dressed overlap fixing a constant coupling when no schedule is given.
    pub target_overlap: f64,
    pub duration: f64,
}

impl Default for SpinBosonConfig {
    fn default() -> Self {
        Self {
            omega: 0.5,
            initial: [0.0, 0.0, 1.0],
            target_overlap: 0.1,
            duration: 130.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolutionChoice {
    Ideal,
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuddenConfig {
    pub theta: f64,
    pub t0: f64,
    pub t_final: f64,
    pub initial: [f64; 3],
    /// Coupling before the flip; derived from `target_overlap` when absent.
    pub eps: Option<f64>,
    pub target_overlap: f64,
    pub evolution: EvolutionChoice,
    pub ramp: f64,
    pub dt: f64,
}

impl Default for SuddenConfig {
    fn default() -> Self {
        Self {
            theta: PI,
            t0: 0.0,
            t_final: 20.0,
            initial: [1.0, 0.0, 0.0],
            eps: None,
            target_overlap: 0.5,
            evolution: EvolutionChoice::Ideal,
            ramp: 30.0,
            dt: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleTask {
    /// Evolve and write the reduced spin trace.
    Trace,
    /// Same modes through the Fock oracle and the mode-resolved equations.
    OdeMatch,
    /// Dressed overlap at zero tunneling, then the tunneling frequency.
    Renormalization,
    /// Single-mode fit of the decoherence normalization.
    Calibrate,
    /// Closed-form coherent overlaps against truncated Fock vectors.
    Overlaps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub task: OracleTask,
    pub fock_dim: usize,
    /// Time step; `0.02 / max frequency` when absent.
    pub dt: Option<f64>,
    pub omega: f64,
    pub initial: [f64; 3],
    pub freqs: Option<Vec<f64>>,
    pub couplings: Option<Vec<f64>>,
    /// Bath momenta with quadrature weights; modes inherit the bath profile.
    pub momenta: Option<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
    /// Number of modes drawn from the bath density with the run seed.
    pub surrogate: Option<usize>,
    pub calibration: CalibrationConfig,
    pub pairs: usize,
    pub max_modes: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            task: OracleTask::Trace,
            fock_dim: 8,
            dt: None,
            omega: 0.0,
            initial: [1.0, 0.0, 0.0],
            freqs: None,
            couplings: None,
            momenta: None,
            weights: None,
            surrogate: None,
            calibration: CalibrationConfig::default(),
            pairs: 50,
            max_modes: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    pub mode_freq: f64,
    pub coupling: f64,
    pub eps: f64,
    pub fock_dim: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            mode_freq: 5.0,
            coupling: 1.0,
            eps: 1.2,
            fock_dim: 16,
        }
    }
}

pub fn bloch(v: [f64; 3], what: &str) -> CliResult<BlochState<f64>> {
    BlochState::new(v, 0.0).map_err(invalid(what))
}

/// Parses TOML text, reporting line and field on failure.
pub fn parse(text: &str, origin: &Path) -> CliResult<RunConfig> {
    toml::from_str(text).map_err(|e| CliError::Validation(format!("{}: {e}", origin.display())))
}

/// Converts a possibly edited TOML tree back into a config.
pub fn from_value(value: toml::Value) -> CliResult<RunConfig> {
    value
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Validation(e.to_string()))
}

mod defaults {
    pub fn sample_dt() -> f64 {
        0.1
    }

    pub fn unit_weight() -> [f64; 2] {
        [1.0, 0.0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse("scenario = \"sudden\"", Path::new("x")).unwrap();
        assert_eq!(c.scenario, Scenario::Sudden);
        assert_eq!(c.sudden, SuddenConfig::default());
        assert_eq!(c.bath, BathConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse("scenario = \"sudden\"\n[sudden]\nthetta = 1.0\n", Path::new("cfg.toml")).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("thetta") && msg.contains("line 3"), "{msg}");
        assert!(parse("scenario = \"dephasing\"\ncolour = 1\n", Path::new("x")).is_err());
    }

    #[test]
    fn schedule_segments_build() {
        let text = r#"
            scenario = "dephasing"
            [schedule]
            segments = [
              { kind = "smooth-ramp", duration = 15.0, to = 2.0 },
              { kind = "hold", duration = 10.0 },
              { kind = "step", to = 0.0 },
            ]
        "#;
        let s = parse(text, Path::new("x")).unwrap().schedule.unwrap().build().unwrap();
        assert_eq!(s.duration(), 25.0);
        assert!(s.has_steps());
        let bad = text.replace("to = 2.0", "to = 2.0, slope = 1");
        assert!(parse(&bad, Path::new("x")).is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let c = parse(
            "scenario = \"oracle-compare\"\n[oracle]\ntask = \"calibrate\"\n",
            Path::new("x"),
        )
        .unwrap();
        let back = from_value(toml::Value::try_from(&c).unwrap()).unwrap();
        assert_eq!(c, back);
    }
}
