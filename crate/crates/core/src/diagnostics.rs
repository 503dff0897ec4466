//! Geometric verdicts on realizations: sphere fit, convex position, the
//! Delaunay property on the sphere and torus radii.

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::energy::{angle_vector, energy_w, energy_w2, energy_w2w};
use crate::error::{Error, Result};
use crate::mesh::{bbox_diagonal, incidence_and_weights, MeshTopology, TorusGrid, TriangleMesh};
use crate::Vec3;

/// Default relative sphere deviation below which a realization counts as inscribed.
pub const INSCRIBED_TOLERANCE: f64 = 1e-4;
/// Default signed-distance tolerance, relative to the bounding-box diagonal.
pub const CONVEX_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereFit {
    pub center: Vec3,
    pub radius: f64,
    /// `max_v | |p_v - center| - radius | / radius`.
    pub max_deviation: f64,
}

/// Algebraic least-squares sphere: minimizes
/// `sum (|p|^2 - 2 c.p - k)^2` over `c` and `k = r^2 - |c|^2`.
pub fn fit_sphere(points: &[Vec3]) -> Result<SphereFit> {
    if points.len() < 4 {
        return Err(Error::DegenerateInput(format!(
            "sphere fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    // work in centered, scaled coordinates for conditioning
    let origin: Vec3 = points.iter().sum::<Vec3>() / points.len() as f64;
    let scale = bbox_diagonal(points);
    if scale == 0.0 {
        return Err(Error::DegenerateInput("all points coincide".into()));
    }
    let local: Vec<Vec3> = points.iter().map(|p| (p - origin) / scale).collect();
    let a = DMatrix::from_fn(
        local.len(),
        4,
        |r, c| if c < 3 { 2.0 * local[r][c] } else { 1.0 },
    );
    let b = DVector::from_iterator(local.len(), local.iter().map(|p| p.norm_squared()));
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-10 * smax {
        return Err(Error::DegenerateInput("points are coplanar".into()));
    }
    let sol = svd
        .solve(&b, 1e-14 * smax)
        .map_err(|e| Error::DegenerateInput(e.to_string()))?;
    let c = Vec3::new(sol[0], sol[1], sol[2]);
    let r2 = sol[3] + c.norm_squared();
    if !(r2 > 0.0) {
        return Err(Error::DegenerateInput(
            "no real sphere fits the points".into(),
        ));
    }
    let center = origin + c * scale;
    let radius = r2.sqrt() * scale;
    let max_deviation = points
        .iter()
        .map(|p| ((p - center).norm() - radius).abs() / radius)
        .fold(0.0, f64::max);
    Ok(SphereFit {
        center,
        radius,
        max_deviation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityCheck {
    pub convex: bool,
    /// Faces with some other vertex strictly in front of their plane.
    pub violating_faces: Vec<usize>,
}

/// True iff every vertex lies behind or on every face plane, up to
/// `tolerance * bbox_diagonal`.
pub fn is_convex_position(mesh: &TriangleMesh) -> Result<bool> {
    Ok(convexity(mesh, CONVEX_TOLERANCE)?.convex)
}

pub fn convexity(mesh: &TriangleMesh, tolerance: f64) -> Result<ConvexityCheck> {
    let tol = tolerance * mesh.bbox_diagonal();
    let mut violating = Vec::new();
    for (f, face) in mesh.faces.iter().enumerate() {
        let [a, b, c] = face.map(|v| mesh.positions[v]);
        if crate::mesh::is_degenerate_triangle(&a, &b, &c) {
            return Err(Error::DegenerateTriangle { face: *face });
        }
        let n = (b - a).cross(&(c - a)).normalize();
        let outside = mesh
            .positions
            .iter()
            .enumerate()
            .any(|(v, p)| !face.contains(&v) && (p - a).dot(&n) > tol);
        if outside {
            violating.push(f);
        }
    }
    Ok(ConvexityCheck {
        convex: violating.is_empty(),
        violating_faces: violating,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelaunayCheck {
    pub delaunay: bool,
    pub inscribed: bool,
    pub convex: bool,
    pub sphere_deviation: f64,
    pub violating_faces: Vec<usize>,
}

/// An inscribed triangulation is Delaunay on its sphere exactly when it is
/// in convex position.
pub fn is_delaunay_on_sphere(
    mesh: &TriangleMesh,
    topology: &MeshTopology,
    tolerance: f64,
) -> Result<DelaunayCheck> {
    if !topology.is_closed() {
        return Err(Error::BoundaryPresent {
            count: topology.boundary_edge_count(),
        });
    }
    let deviation = fit_sphere(&mesh.positions).map_or(f64::INFINITY, |f| f.max_deviation);
    let inscribed = deviation < tolerance;
    let conv = convexity(mesh, CONVEX_TOLERANCE)?;
    Ok(DelaunayCheck {
        delaunay: inscribed && conv.convex,
        inscribed,
        convex: conv.convex,
        sphere_deviation: deviation,
        violating_faces: conv.violating_faces,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Circle {
    center: Vec3,
    normal: Vec3,
    radius: f64,
}

impl Circle {
    fn distance(&self, p: &Vec3) -> f64 {
        let d = p - self.center;
        let h = d.dot(&self.normal);
        let rho = (d - self.normal * h).norm();
        ((rho - self.radius).powi(2) + h * h).sqrt()
    }
}

/// Best-fit plane, then an algebraic circle fit inside it.
fn fit_circle(points: &[Vec3]) -> Result<Circle> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput("circle fit needs 3 points".into()));
    }
    let centroid: Vec3 = points.iter().sum::<Vec3>() / points.len() as f64;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let order = {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        idx
    };
    let normal: Vec3 = eig.eigenvectors.column(order[0]).into();
    let u: Vec3 = eig.eigenvectors.column(order[2]).into();
    let v = normal.cross(&u);

    let a = DMatrix::from_fn(points.len(), 3, |r, c| {
        let d = points[r] - centroid;
        match c {
            0 => 2.0 * d.dot(&u),
            1 => 2.0 * d.dot(&v),
            _ => 1.0,
        }
    });
    let b = DVector::from_iterator(
        points.len(),
        points.iter().map(|p| {
            let d = p - centroid;
            d.dot(&u).powi(2) + d.dot(&v).powi(2)
        }),
    );
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::DegenerateInput(e.to_string()))?;
    let r2 = sol[2] + sol[0] * sol[0] + sol[1] * sol[1];
    if !(r2 > 0.0) {
        return Err(Error::DegenerateInput(
            "points do not lie near a circle".into(),
        ));
    }
    Ok(Circle {
        center: centroid + u * sol[0] + v * sol[1],
        normal,
        radius: r2.sqrt(),
    })
}

fn check_grid(mesh: &TriangleMesh, topology: &MeshTopology, grid: TorusGrid) -> Result<()> {
    if mesh.vertex_count() != grid.major * grid.minor || grid.major < 3 || grid.minor < 3 {
        return Err(Error::GridMismatch(format!(
            "{} vertices do not form a {} x {} grid",
            mesh.vertex_count(),
            grid.major,
            grid.minor
        )));
    }
    let adj = topology.neighbors();
    for a in 0..grid.major {
        for b in 0..grid.minor {
            let v = grid.index(a, b);
            for w in [grid.index(a + 1, b), grid.index(a, b + 1)] {
                if adj[v].binary_search(&w).is_err() {
                    return Err(Error::GridMismatch(format!(
                        "vertices {v} and {w} should be adjacent"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Ratio of major to minor radius of a torus with generator connectivity.
///
/// Each minor loop (fixed `a`) is fitted with a circle; a circle through
/// the loop centers gives the center circle and major radius. The minor
/// radius is the mean vertex distance to that center circle.
pub fn torus_radii_ratio(
    mesh: &TriangleMesh,
    topology: &MeshTopology,
    grid: TorusGrid,
) -> Result<f64> {
    check_grid(mesh, topology, grid)?;
    let mut centers = Vec::with_capacity(grid.major);
    for a in 0..grid.major {
        let ring: Vec<Vec3> = (0..grid.minor)
            .map(|b| mesh.positions[grid.index(a, b)])
            .collect();
        centers.push(fit_circle(&ring)?.center);
    }
    let core = fit_circle(&centers)?;
    let minor =
        mesh.positions.iter().map(|p| core.distance(p)).sum::<f64>() / mesh.vertex_count() as f64;
    Ok(core.radius / minor)
}

/// Options for [`report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub inscribed_tolerance: f64,
    pub torus_grid: Option<TorusGrid>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            inscribed_tolerance: INSCRIBED_TOLERANCE,
            torus_grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
    pub energy_w: Option<f64>,
    pub energy_w2: Option<f64>,
    pub energy_w2w: Option<f64>,
    pub sphere_center: Option<[f64; 3]>,
    pub sphere_radius: Option<f64>,
    pub sphere_dev: Option<f64>,
    pub convex: bool,
    pub inscribed: bool,
    pub delaunay: bool,
    pub beta_min: Option<f64>,
    pub beta_max: Option<f64>,
    /// First quartile, median, third quartile.
    pub beta_quartiles: Option<[f64; 3]>,
    pub torus_ratio: Option<f64>,
    /// Parts of the report that could not be computed.
    pub errors: Vec<String>,
}

impl DiagnosticsReport {
    /// One `key: value` line per finding.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.12e}"));
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(": ");
            out.push_str(&v);
            out.push('\n');
        };
        line("vertices", self.vertices.to_string());
        line("edges", self.edges.to_string());
        line("faces", self.faces.to_string());
        line(
            "euler_characteristic",
            self.euler_characteristic.to_string(),
        );
        line("energy_w", opt(self.energy_w));
        line("energy_w2", opt(self.energy_w2));
        line("energy_w2w", opt(self.energy_w2w));
        line(
            "sphere_center",
            self.sphere_center.map_or_else(
                || "n/a".into(),
                |c| format!("{:.12e} {:.12e} {:.12e}", c[0], c[1], c[2]),
            ),
        );
        line("sphere_radius", opt(self.sphere_radius));
        line("sphere_dev", opt(self.sphere_dev));
        line("convex", self.convex.to_string());
        line("inscribed", self.inscribed.to_string());
        line("delaunay", self.delaunay.to_string());
        line("beta_min", opt(self.beta_min));
        line("beta_max", opt(self.beta_max));
        line(
            "beta_quartiles",
            self.beta_quartiles.map_or_else(
                || "n/a".into(),
                |q| format!("{:.12e} {:.12e} {:.12e}", q[0], q[1], q[2]),
            ),
        );
        line("torus_ratio", opt(self.torus_ratio));
        for e in &self.errors {
            line("error", e.clone());
        }
        out
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Gathers energies, sphere fit and convexity verdicts. Parts that fail
/// are recorded in `errors` instead of aborting the report.
pub fn report(
    mesh: &TriangleMesh,
    topology: &MeshTopology,
    options: &ReportOptions,
) -> DiagnosticsReport {
    let mut errors = Vec::new();
    let mut note = |what: &str, e: Error| errors.push(format!("{what}: {e}"));

    let closed = topology.is_closed();
    let graph = if closed {
        incidence_and_weights(topology).ok()
    } else {
        None
    };
    let energy_w = energy_w(mesh, topology)
        .map_err(|e| note("energy_w", e))
        .ok()
        .map(|e| e.value);
    let (energy_w2, energy_w2w) = if closed {
        (
            energy_w2(mesh, topology, graph.as_ref())
                .map_err(|e| note("energy_w2", e))
                .ok()
                .map(|e| e.value),
            energy_w2w(mesh, topology, graph.as_ref())
                .map_err(|e| note("energy_w2w", e))
                .ok()
                .map(|e| e.value),
        )
    } else {
        (None, None)
    };

    let fit = fit_sphere(&mesh.positions)
        .map_err(|e| note("sphere_fit", e))
        .ok();
    let inscribed = fit.is_some_and(|f| f.max_deviation < options.inscribed_tolerance);
    let convex = convexity(mesh, CONVEX_TOLERANCE)
        .map_err(|e| note("convex", e))
        .map(|c| c.convex)
        .unwrap_or(false);

    let (beta_min, beta_max, beta_quartiles) = match angle_vector(mesh, topology) {
        Ok(angles) if !angles.is_empty() => {
            let mut v = angles.values.clone();
            v.sort_by(f64::total_cmp);
            (
                v.first().copied(),
                v.last().copied(),
                Some([quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75)]),
            )
        }
        Ok(_) => (None, None, None),
        Err(e) => {
            note("angles", e);
            (None, None, None)
        }
    };

    let torus_ratio = options.torus_grid.and_then(|grid| {
        torus_radii_ratio(mesh, topology, grid)
            .map_err(|e| note("torus_ratio", e))
            .ok()
    });

    DiagnosticsReport {
        vertices: topology.vertex_count,
        edges: topology.edges.len(),
        faces: topology.face_count,
        euler_characteristic: topology.euler_characteristic,
        energy_w,
        energy_w2,
        energy_w2w,
        sphere_center: fit.map(|f| [f.center.x, f.center.y, f.center.z]),
        sphere_radius: fit.map(|f| f.radius),
        sphere_dev: fit.map(|f| f.max_deviation),
        convex,
        inscribed,
        delaunay: closed && inscribed && convex,
        beta_min,
        beta_max,
        beta_quartiles,
        torus_ratio,
        errors,
    }
}
