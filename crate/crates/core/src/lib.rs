//! A charged particle squeezed onto an axially symmetric surface `z = S(rho)`
//! in a static vector potential.
//!
//! The reduced tangential Hamiltonian carries the geometric potential
//! `-(H^2 - K)/2` and an imaginary coupling `ie A3 H` between the normal field
//! component and the mean curvature. This crate evaluates the surface geometry,
//! discretises that operator for each azimuthal channel, computes its
//! (generally non-Hermitian) spectrum and propagates states with
//! Crank-Nicolson to expose the norm growth or decay the coupling produces.

pub mod error;
pub mod fields;
pub mod geometry;
pub mod grid;
pub mod operator;
pub mod solver;
pub mod tridiag;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use fields::{
    coupling_profile, divergence, is_coulomb_gauge, project_to_frame, FieldSource, FrameComponents,
    GammaInterval, GaugeReport, VectorPotentialSpec,
};
pub use geometry::{
    curvature_potential, eval_geometry, frame_vectors, scale_factors, DerivativeSource, Frame,
    GeometrySample, ProfileShape, ScaleFactors, SurfaceProfile,
};
pub use grid::RadialGrid;
pub use operator::{
    build_tangential, decoupling_check, normal_energy, DecouplingReport, NormalChannel, OperatorMode,
    TangentialOperator,
};
pub use solver::{
    eigen_solve, evolve, hermiticity_report, total_energy, CombinedLevel, EvolutionTrace,
    HermiticityReport, Spectrum,
};
