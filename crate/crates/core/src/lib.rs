//! Proper orthogonal decomposition reduced-order models for the periodic 1D
//! viscous Burgers equation.
//!
//! The full-order model is an IMEX HDG/DG discretisation (upwind DG
//! convection, hybridised interior-penalty diffusion, Crank-Nicolson /
//! Adams-Bashforth in time) on a uniform periodic mesh with a modal Legendre
//! basis. Its snapshots feed a method-of-snapshots POD; the reduced model
//! replaces the upwind flux by a central flux so that every operator can be
//! assembled offline, and optionally adds a convective jump penalty and a
//! mode-dependent eddy viscosity as closure terms.
//!
//! Pipeline: [`fom::run_fom`] → [`pod::build_basis`] → [`rom::build_offline`]
//! → [`rom::run_rom`] → [`metrics::error_series`].

pub mod cli;
pub mod config;
pub mod discretization;
pub mod error;
pub mod fom;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod pod;
pub mod rom;

pub use discretization::{FeField, Mesh1D, SkeletonField};
pub use error::{Error, Result};
