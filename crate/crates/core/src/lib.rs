//! Circle-angle Willmore energies on triangle meshes.
//!
//! The angle `beta(e)` of an interior edge is the external intersection
//! angle of the circumcircles of its two triangles. From it this crate
//! builds the conformal Willmore energy `W`, the quadratic energy `W2` and
//! its valence-weighted form `W2w`, minimizes them with a limited-memory
//! quasi-Newton method, and analyses the edge graph through the quadratic
//! programs whose solutions predict the angles of a minimizer.
//!
//! ```
//! use willmore_core::{energy, mesh};
//!
//! let ico = mesh::icosahedron();
//! let topo = mesh::build_topology(&ico).unwrap();
//! let w2 = energy::energy(&ico, &topo, energy::EnergyKind::W2).unwrap();
//! assert!(w2.value.abs() < 1e-9);
//! ```

// `!(x > 0.0)` style checks are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod energy;
mod error;
pub mod linalg;
pub mod mesh;
pub mod optimize;
pub mod qp;

pub use error::{Error, Result};

pub use diagnostics::{DiagnosticsReport, SphereFit};
pub use energy::{AngleVector, EnergyKind, EnergyValue, GradientField};
pub use mesh::{EdgeRecord, GraphData, MeshTopology, TriangleMesh};
pub use optimize::{OptimizationConfig, OptimizationResult, Status, TraceRecord};
pub use qp::{PredictedType, QPReport};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Triangles whose area is below this multiple of the squared longest edge
/// are degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;
