//! Numerical toolbox for the kinetic p-Laplace equation with nonlocal diffusion.
//!
//! The crate is organized around the constructive objects of the theory:
//!
//! * [`exponents`] — exact rational algebra for every scaling exponent,
//!   admissible range and interpolation index (`q`, `rho`, `A`, `B`, `Gamma`,
//!   `Q`, `theta_1`, `theta_2`).
//! * [`geometry`] — the kinetic translation group on `R^{1+2d}`, its
//!   anisotropic dilations and the scaling actions on sampled fields.
//! * [`traj`] — critical kinetic trajectories built from the forcing pair
//!   `r^beta sin(log r)`, `r^beta cos(log r)`, their matrix factors and the
//!   checkers for the structural properties (M1)-(M4).
//! * [`fracops`] — fractional velocity operators in Gagliardo (increment) and
//!   Bessel (Fourier multiplier) form, the adjoint nonlocal divergence, Riesz
//!   potentials, the fractional antidivergence and far-field decay estimators.
//! * [`kernels`] — the kinetic mollifier `K_tau` and every derived kernel
//!   family, with norm-scaling and weak-norm checkers.
//! * [`representation`] — kinetic convolutions, manufactured structural
//!   pairs, both representation-formula residuals, the Fourier-characteristics
//!   oracle for the `p = 2` evolution and Gagliardo--Nirenberg ratios.
//! * [`critical`] — the synthetic-family checker for critical integration of
//!   kernel families via real interpolation.
//! * [`report`] / [`suites`] — suite configuration, slope fitting and
//!   machine-readable report emission for the CLI.
//!
//! Grid-based numerics are implemented for velocity dimension `d = 1`
//! (total dimension `1 + 2d = 3`); the exact exponent algebra supports any
//! `d >= 1`.

pub mod critical;
pub mod error;
pub mod exponents;
pub mod fourier1d;
pub mod fracops;
pub mod geometry;
pub mod grid;
pub mod kernels;
pub mod oracle;
pub mod quad;
pub mod report;
pub mod representation;
pub mod special;
pub mod suites;
pub mod traj;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
