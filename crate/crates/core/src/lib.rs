//! Orbital integrals, Fourier transforms and trace pairings on the
//! deformation of a reductive group to its Cartan motion group.
//!
//! The crate is organized bottom-up:
//!
//! * [`lie_model`]: matrix realizations of `(G, K)`, polar factorization and
//!   the deformed group laws.
//! * [`root_character`]: root data, exact formal characters, determinant and
//!   discrete-series character formulas.
//! * [`quadrature`]: deterministic tensor-product quadrature.
//! * [`motion_group`]: the Cartan motion group `K ⋉ 𝔭`, its orbital
//!   integrals and Fourier transform.
//! * [`deformation`]: orbital integrals on `G_t` and their `t → 0` limit.
//! * [`pairing`]: trace pairings with discrete-series classes and the
//!   formal-degree scaling law.
//! * [`cli`]: configuration, experiments and reports.

pub mod cli;
pub mod deformation;
pub mod lie_model;
pub mod motion_group;
pub mod pairing;
pub mod quadrature;
pub mod root_character;
