//! Boundary parametrizations, quadrature meshes, and the two boundary
//! measures: Σ (induced Lebesgue) and λ (Leray-Levi), both computed per node
//! from pulled-back forms on analytic tangent frames.

pub mod cache;
pub mod charts;
pub mod forms;
mod mesh;
pub mod quadrature;
mod report;

pub use charts::{atlas, local_patch, Chart, ChartKind, PhiMap, ATLAS_VERSION};
pub use mesh::{
    cl_constant, frame_orientation, leray_levi_density, parametrize, parametrize_charts,
    sample_boundary_points, sigma_density, solve_node, BoundaryMesh, MeshOptions, NodeGeometry,
    PulledBackForm, LEVI_SCALE, LEVI_SIGN,
};
pub use quadrature::QuadratureRule;
pub use report::{density_ratio_report, mesh_diagnostics, DensityRatioReport, MeshDiagnostics};
