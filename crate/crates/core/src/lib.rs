//! Numerical laboratory for sharp weighted L^p log-Sobolev inequalities on
//! open convex cones, their extremal families, the Hopf-Lax semigroup and its
//! Hamilton-Jacobi structure, weighted hypercontractivity, and a 1D
//! optimal-transport replay of the entropy estimates.
//!
//! Everything is organised around a handful of domain types: [`Cone`] and
//! [`Weight`] describe the geometry, [`TestFunction`] the functions the
//! inequalities are evaluated on, and the quadrature module supplies the
//! weighted integration the functionals are built from.

// `!(x > a)` guards reject NaN along with out-of-range values; keep them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod cone;
pub mod constants;
pub mod error;
pub mod functionals;
pub mod hopflax;
pub mod hyper;
pub mod quadrature;
pub mod special;
pub mod testfn;
pub mod transport;
pub mod weight;

pub use cone::{Cone, ConeKind};
pub use constants::{GaussianExtremal, IndicatorExtremal, ProofConstants, SharpConstant};
pub use error::CoreError;
pub use functionals::{DeficitReport, EntropyRoute, FdPolicy, Tolerances};
pub use hopflax::{GridField, HlMethod, HopfLaxRun, InfConvolution, Membership};
pub use hyper::{HyperConfig, HyperReport};
pub use quadrature::{ConeMass, GridRule, MassMethod, Quadrature, RadialRule};
pub use testfn::{TailBound, TestFunction};
pub use transport::{ChainReport, Density1D, Grid1, TransportMap1D};
pub use weight::{Weight, WeightCertificate, WeightKind};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CoreError>;
