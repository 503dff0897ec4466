use crate::error::{Error, Result};
use crate::Vec3;

/// Inversion in the sphere `|p - center| = radius`.
pub fn sphere_inversion(positions: &[Vec3], center: &Vec3, radius: f64) -> Result<Vec<Vec3>> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "inversion radius must be positive, got {radius}"
        )));
    }
    positions
        .iter()
        .enumerate()
        .map(|(vertex, p)| {
            let d = p - center;
            let d2 = d.norm_squared();
            if d2 == 0.0 {
                Err(Error::VertexAtCenter { vertex })
            } else {
                Ok(center + d * (radius * radius / d2))
            }
        })
        .collect()
}
