//! Higher-order mean curvatures, Newton transformations and flux identities
//! for compact hypersurfaces with boundary in Euclidean space, hyperbolic
//! space (hyperboloid model) and the round sphere.
//!
//! The pieces fit together as follows:
//!
//! - [`symfun`]: elementary symmetric functions, Newton transformations and
//!   the bordered / shifted expansions used along the boundary.
//! - [`ambient`]: the three model spaces and their Killing and conformal fields.
//! - [`immersion`]: chart-based hypersurfaces, shape operator, `H_r`, `div T_r`.
//! - [`boundary`]: the frame `(ν, N, η, ξ)` along `∂M` and the pointwise identities.
//! - [`quadrature`]: Gauss–Legendre integration over `M`, `∂M`, `D` and `Ω`.
//! - [`flux`]: flux formulas, volume bounds and `H_r` estimates.
//! - [`catalog`]: closed-form caps and minimal disks addressed by descriptor strings.

pub mod ambient;
pub mod boundary;
pub mod catalog;
pub mod chart;
pub mod error;
pub mod flux;
pub mod immersion;
pub mod jet;
pub mod linalg;
pub mod quadrature;
pub mod symfun;

pub use ambient::{conformal_residual, AmbientField, AmbientSpace, FieldKind, SpaceKind};
pub use boundary::{
    build_frame, identity_sr, identity_umbilic, BoundaryConfig, BoundaryFrame, HypersurfaceP,
};
pub use catalog::{AnalyticReference, CatalogEntry};
pub use error::{Error, Result};
pub use flux::{FluxOptions, FluxReport};
pub use immersion::{CurvatureData, DerivativeMode, Immersion, Orientation, ParamBox};
pub use quadrature::{QuadratureRule, RegionSpec, SolidRegion};
pub use symfun::{elem_sym, newton_transforms, NewtonSeq, SymCoeffs};
