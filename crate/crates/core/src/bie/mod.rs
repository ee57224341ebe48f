//! Boundary integral route from DN data to the scattering transform.

pub mod scatter;
pub mod single_layer;
pub mod truncate;

pub use scatter::{
    radial_scattering_from_dn, scattering_at, scattering_from_dn, solve_boundary_psi, BieOptions, BoundaryTrace,
    ScatteringGrid,
};
pub use single_layer::{boundary_kernel, single_layer_matrix, BoundaryQuadrature, DiagonalRule, SingleLayerTable};
pub use truncate::{truncate_scattering, SymmetryFill, TruncationSpec, DEFAULT_R1};
