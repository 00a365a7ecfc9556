//! Exactly solvable decoherence models with a massive scalar bath.
//!
//! A spin, an oscillator or a tunneling two-level system is coupled to a
//! 1-D massive field. Bath dressing that follows the system adiabatically
//! suppresses its reduced coherence reversibly; radiation emitted by sudden
//! changes removes it for good. The crate evaluates the closed forms and
//! checks them against exact mode-resolved and Fock-space evolution.

// Kronrod tables are quoted at full published precision; `!(x > 0)` rejects NaN.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod bloch;
pub mod coherent;
pub mod dephasing;
pub mod error;
pub mod fock;
pub mod forced;
pub mod num;
pub mod oscillator;
pub mod quadrature;
pub mod spin_boson;
pub mod sudden;

pub use bath::{
    adiabaticity_metric, decoherence_exponent, spectral_integral, BathSpec, CouplingSchedule, GridSpec, ModeGrid,
    SpectralReport, DECOHERENCE_NORMALIZATION,
};
pub use bloch::BlochState;
pub use coherent::{
    adiabatic_branch_amplitudes, displace, pairwise_log_overlap, Branch, BranchAmplitudes, OverlapFactor,
};
pub use dephasing::{run_analytic, run_ode_oracle, run_sudden_decouple, DephasingTrace, TraceSample};
pub use error::{Error, Result};
pub use fock::{
    calibrate_normalization, evolve as evolve_fock, partial_trace_spin, FockState, OracleConfig, OracleTrace,
};
pub use forced::{ForcedModes, Integrator};
pub use num::Real;
pub use oscillator::{
    evolve_reduced, fringe_visibility, renormalization, GaussianPacket, OscillatorSpec, PositionDensityMatrix,
    PositionGrid, RenormalizationReport,
};
pub use spin_boson::{renormalized_splitting, run_adiabatic, SpinBosonSpec};
pub use sudden::{
    apply_sudden_rotation, overlap_table, theta_sweep, OverlapTable, RotationEvent, SuddenOutcome, SuddenSetup,
};

pub type BathSpecF64 = BathSpec<f64>;
pub type CouplingScheduleF64 = CouplingSchedule<f64>;
pub type BlochStateF64 = BlochState<f64>;
pub type BranchAmplitudesF64 = BranchAmplitudes<f64>;
pub type OscillatorSpecF64 = OscillatorSpec<f64>;
pub type PositionDensityMatrixF64 = PositionDensityMatrix<f64>;
pub type SpinBosonSpecF64 = SpinBosonSpec<f64>;
pub type SuddenSetupF64 = SuddenSetup<f64>;
pub type OracleConfigF64 = OracleConfig<f64>;
pub type FockStateF64 = FockState<f64>;
pub type DephasingTraceF64 = DephasingTrace<f64>;
