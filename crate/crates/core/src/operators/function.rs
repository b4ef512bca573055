use crate::boundary::BoundaryMesh;
use crate::cpoint::{CPoint2, C64};
use crate::error::{LabError, Result};

/// Complex samples of a function at the nodes of a mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFunction {
    pub values: Vec<C64>,
}

impl BoundaryFunction {
    pub fn new(mesh: &BoundaryMesh, values: Vec<C64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(LabError::DimensionMismatch {
                expected: mesh.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::InvalidParameter(
                "non-finite function value".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn from_fn(mesh: &BoundaryMesh, f: impl Fn(&CPoint2) -> C64) -> Result<Self> {
        Self::new(mesh, mesh.nodes.iter().map(f).collect())
    }

    pub fn zeros(mesh: &BoundaryMesh) -> Self {
        Self {
            values: vec![C64::new(0.0, 0.0); mesh.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// z₁^a z₂^b
pub fn monomial(a: u32, b: u32) -> impl Fn(&CPoint2) -> C64 {
    move |p| p.z1.powu(a) * p.z2.powu(b)
}
