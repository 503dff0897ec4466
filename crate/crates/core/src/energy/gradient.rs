use super::{EnergyKind, Functional};
use crate::error::Result;
use crate::mesh::{MeshTopology, TriangleMesh};
use crate::Vec3;

/// One gradient vector per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField(pub Vec<Vec3>);

impl GradientField {
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|g| g.norm_squared()).sum::<f64>().sqrt()
    }

    /// Sum of all vectors; vanishes for translation-invariant energies.
    pub fn sum(&self) -> Vec3 {
        self.0.iter().sum()
    }

    /// `sum_v p_v x g_v`; vanishes for rotation-invariant energies.
    pub fn torque(&self, positions: &[Vec3]) -> Vec3 {
        positions.iter().zip(&self.0).map(|(p, g)| p.cross(g)).sum()
    }
}

/// How the optimizer obtains gradients.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GradientMode {
    #[default]
    Analytic,
    /// Central differences with step `relative_step * bbox_diagonal`. Slow; an oracle.
    FiniteDifference { relative_step: f64 },
}

/// Analytic gradient. For `W`, edges with angle below `w_threshold`
/// contribute nothing.
pub fn gradient(
    mesh: &TriangleMesh,
    topology: &MeshTopology,
    kind: EnergyKind,
    w_threshold: f64,
) -> Result<GradientField> {
    let f = Functional::new(topology, kind, w_threshold)?;
    Ok(GradientField(
        f.evaluate(&mesh.positions, topology)?.gradient,
    ))
}

/// Central finite differences of the energy value.
pub fn finite_difference_gradient(
    mesh: &TriangleMesh,
    topology: &MeshTopology,
    kind: EnergyKind,
    relative_step: f64,
) -> Result<GradientField> {
    let f = Functional::new(topology, kind, 0.0)?;
    fd_with(
        &f,
        &mesh.positions,
        topology,
        relative_step * mesh.bbox_diagonal(),
    )
}

pub(crate) fn fd_with(
    f: &Functional,
    positions: &[Vec3],
    topology: &MeshTopology,
    h: f64,
) -> Result<GradientField> {
    let mut work = positions.to_vec();
    let mut grad = vec![Vec3::zeros(); positions.len()];
    for v in 0..positions.len() {
        for axis in 0..3 {
            let orig = work[v][axis];
            work[v][axis] = orig + h;
            let plus = f.value(&work, topology)?;
            work[v][axis] = orig - h;
            let minus = f.value(&work, topology)?;
            work[v][axis] = orig;
            grad[v][axis] = (plus - minus) / (2.0 * h);
        }
    }
    Ok(GradientField(grad))
}
