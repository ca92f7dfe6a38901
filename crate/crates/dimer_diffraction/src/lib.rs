//! Elastic and inelastic diffraction of weakly bound dimers from
//! nano-fabricated transmission gratings.
//!
//! The library solves the rotational bound-state spectrum of a two-body
//! cluster, computes point-particle and dimer transmission functions
//! through a trapezoidal-bar grating in the eikonal approximation, and
//! assembles relative diffraction intensities and angular patterns for
//! all open elastic and inelastic channels.

pub mod bound_states;
pub mod config;
pub mod engine;
pub mod error;
pub mod grating;
pub mod kinematics;
pub mod output;
pub mod pattern;
pub mod potential;
pub mod special;
pub mod units;

pub use bound_states::{
    form_factor, solve_bound_states, solve_bound_states_with, transition_energy, BoundState,
    DimerSpecies, SolverOptions,
};
pub use config::RunConfig;
pub use engine::{
    pi_function, DiffractionEngine, QuadratureSpec, SweepEntry, SweepResult, TransitionChannel,
};
pub use grating::{
    open_interval, phase_shift, pp_diffraction_amplitudes, transmission_pp, ConstituentBeam,
    GratingGeometry, VdwCoupling,
};
pub use kinematics::{
    diffraction_angle, momentum_transfer, thermal_populations, validate_regime, BeamSpec,
};
pub use pattern::{peak_width, synthesize, Pattern, Peak};
pub use potential::RadialPotential;
