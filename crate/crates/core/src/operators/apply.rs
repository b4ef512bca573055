use super::function::BoundaryFunction;
use super::kernels::KernelKind;
use crate::boundary::BoundaryMesh;
use crate::cpoint::{CPoint2, C64};
use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::geometry::DomainSpec;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct InteriorValue {
    pub value: C64,
    pub nearest_node_distance: f64,
    /// The evaluation point is closer to the mesh than its largest cell, so
    /// the quadrature is not resolving the kernel.
    pub near_mesh: bool,
}

fn check_len(mesh: &BoundaryMesh, f: &BoundaryFunction) -> Result<()> {
    if f.len() != mesh.len() {
        return Err(LabError::DimensionMismatch {
            expected: mesh.len(),
            got: f.len(),
        });
    }
    Ok(())
}

/// Quadrature value of the integral of `f` against `kernel` at interior `z`.
pub fn apply_interior(
    kernel: KernelKind,
    d: &DomainSpec,
    mesh: &BoundaryMesh,
    f: &BoundaryFunction,
    z: &CPoint2,
    exec: Exec,
) -> Result<InteriorValue> {
    check_len(mesh, f)?;
    let rho = d.rho(z)?;
    if rho >= 0.0 {
        return Err(LabError::NotInterior { rho });
    }
    let nearest = mesh
        .nodes
        .iter()
        .map(|w| w.dist(z))
        .fold(f64::INFINITY, f64::min);
    let near_mesh = nearest <= mesh.max_cell_diameter();
    if near_mesh {
        log::debug!(
            "interior evaluation at distance {nearest:.3e} from the mesh (cell size {:.3e})",
            mesh.max_cell_diameter()
        );
    }
    let terms = exec.try_map(mesh.len(), |i| {
        if f.values[i] == C64::new(0.0, 0.0) {
            return Ok(C64::new(0.0, 0.0));
        }
        Ok::<_, LabError>(f.values[i] * kernel.weighted(mesh, i, z)?)
    })?;
    let value = exec.sum_c(terms.len(), |i| terms[i]);
    Ok(InteriorValue {
        value,
        nearest_node_distance: nearest,
        near_mesh,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OffSupportValue {
    pub value: C64,
    /// Σ |K|·|f|·weight: the absolutely convergent majorant.
    pub abs_sum: f64,
    pub support_distance: f64,
}

/// Kernel integral of `f` (supported on `support`) at the boundary node
/// `node`, which must lie at distance ≥ `delta` from the support.
pub fn apply_boundary_offsupport(
    kernel: KernelKind,
    mesh: &BoundaryMesh,
    f: &BoundaryFunction,
    support: &[bool],
    node: usize,
    delta: f64,
) -> Result<OffSupportValue> {
    check_len(mesh, f)?;
    if support.len() != mesh.len() {
        return Err(LabError::DimensionMismatch {
            expected: mesh.len(),
            got: support.len(),
        });
    }
    let z = mesh.nodes[node];
    let mut distance = f64::INFINITY;
    let mut value = C64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for j in (0..mesh.len()).filter(|&j| support[j]) {
        distance = distance.min(mesh.nodes[j].dist(&z));
    }
    if distance < delta {
        return Err(LabError::SupportDistance {
            distance,
            required: delta,
        });
    }
    for j in (0..mesh.len()).filter(|&j| support[j]) {
        if f.values[j] == C64::new(0.0, 0.0) {
            continue;
        }
        let t = f.values[j] * kernel.weighted(mesh, j, &z)?;
        value += t;
        abs_sum += t.norm();
    }
    Ok(OffSupportValue {
        value,
        abs_sum,
        support_distance: distance,
    })
}
