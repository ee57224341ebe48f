//! Forward simulation of DN matrices on the unit disk.

pub mod bessel;
pub mod dn;
pub mod fem;
pub mod mesh;
pub mod radial;

pub use dn::{add_noise, dn_homogeneous, DNMatrix};
pub use fem::{assemble_dn, nodal_values};
pub use mesh::DiskMesh;
pub use radial::dn_radial;
