//! Coherent-state wave-packet dynamics in the rotating Morse oscillator and
//! phase-space sensitivity analysis.
//!
//! The crate is organised bottom-up:
//!
//! * [`special`] – generalized Laguerre polynomials with real upper index,
//!   log-gamma and uniform quadrature rules.
//! * [`rotor`] – molecule parameters, the rotating Morse effective potential,
//!   the j-dependent equilibrium geometry and the expansion constants.
//! * [`eigen`] – bound states and energies of the expanded Hamiltonian.
//! * [`coherent`] – SU(2) coherent-state weights, spectral time evolution,
//!   classical/revival periods and density peak detection.
//! * [`phase_space`] – Wigner fields, marginals, purity and overlaps.
//! * [`sensitivity`] – classical action, sub-Planck tile areas, j-scans,
//!   minima and the tile/action scaling fit.
//! * [`rotation`] – phase-space rotation generated by the weight operator and
//!   rotation-angle estimation.
//!
//! All quantities are in atomic units (ħ = mₑ = e = 1): lengths in bohr,
//! energies in hartree, times in ħ/hartree.
//!
//! Data-parallel loops go through [`Exec`]; with the `parallel` feature
//! disabled every loop runs sequentially and produces identical results.

pub mod coherent;
pub mod eigen;
pub mod error;
pub mod exec;
pub mod phase_space;
pub mod rotation;
pub mod rotor;
pub mod sensitivity;
pub mod special;

pub use coherent::{
    cs_weights, detect_peaks, evolve, fractional_revival_count, periods, su2_weights,
    CoherentStateSpec, Peak, Periods, TimeFraction, WavePacket,
};
pub use eigen::{eigen_energy, num_bound_states, EigenBasis, EigenState};
pub use error::{Error, ErrorKind, Result};
pub use exec::Exec;
pub use phase_space::{overlap_position, overlap_wigner, wigner, WignerField, WignerResolution};
pub use rotation::{apply_rotation, extra_rotation, find_angle, AngleEstimate};
pub use rotor::{EquilibriumBranch, MoleculeParams, RotorConstants};
pub use sensitivity::{
    classical_action, find_minima, scaling_fit, sensitivity_scan, tile_area, ScalingFit,
    SensitivityRecord,
};
pub use special::{laguerre, ln_gamma, QuadratureGrid, QuadratureKind};

/// Library version recorded in emitted file headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
