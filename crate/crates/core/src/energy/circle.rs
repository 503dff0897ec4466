//! Circumcircles and the intersection angle of neighboring circumcircles.

use crate::error::{Error, Result};
use crate::mesh::{is_degenerate_triangle, EdgeRecord};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circumcircle {
    pub center: Vec3,
    pub radius: f64,
    /// Unit normal of the triangle `(p, q, r)`, right-hand oriented.
    pub normal: Vec3,
}

impl Circumcircle {
    /// Unit tangent at `point`, circulating counterclockwise about `normal`.
    pub fn tangent_at(&self, point: &Vec3) -> Vec3 {
        self.normal.cross(&(point - self.center))
    }
}

pub fn circumcircle(p: &Vec3, q: &Vec3, r: &Vec3) -> Result<Circumcircle> {
    if is_degenerate_triangle(p, q, r) {
        return Err(Error::DegenerateInput(
            "triangle is (nearly) collinear".into(),
        ));
    }
    let a = q - p;
    let b = r - p;
    let n = a.cross(&b);
    let n2 = n.norm_squared();
    let offset = (n.cross(&a) * b.norm_squared() + b.cross(&n) * a.norm_squared()) / (2.0 * n2);
    Ok(Circumcircle {
        center: p + offset,
        radius: offset.norm(),
        normal: n / n2.sqrt(),
    })
}

/// Intersection angle of the circumcircles of `(i, j, k)` and `(j, i, l)`,
/// measured between their oriented tangents at `v_i`. Zero when the
/// circles coincide.
pub fn beta_from_points(pi: &Vec3, pj: &Vec3, pk: &Vec3, pl: &Vec3) -> Result<f64> {
    let c1 = circumcircle(pi, pj, pk)?;
    let c2 = circumcircle(pj, pi, pl)?;
    let t1 = c1.tangent_at(pi);
    let t2 = c2.tangent_at(pi);
    Ok(t1.cross(&t2).norm().atan2(t1.dot(&t2)))
}

/// Intersection angle for an interior mesh edge.
pub fn beta(edge: &EdgeRecord, positions: &[Vec3]) -> Result<f64> {
    let (i, j, k, l) = edge.interior().ok_or(Error::BoundaryEdge(edge.i, edge.j))?;
    for face in [[i, j, k], [j, i, l]] {
        let [a, b, c] = face.map(|v| &positions[v]);
        if is_degenerate_triangle(a, b, c) {
            return Err(Error::DegenerateTriangle { face });
        }
    }
    beta_from_points(&positions[i], &positions[j], &positions[k], &positions[l])
}

/// Cosine of the intersection angle from the cross-ratio form, with its
/// gradient with respect to `(v_i, v_j, v_k, v_l)`.
///
/// With the quad `i, l, j, k` and sides `a = l - i`, `b = j - l`,
/// `c = k - j`, `d = i - k`:
/// `cos = ((a.c)(b.d) - (a.b)(c.d) - (b.c)(d.a)) / (|a||b||c||d|)`.
pub fn cos_beta_with_gradient(pi: &Vec3, pj: &Vec3, pk: &Vec3, pl: &Vec3) -> (f64, [Vec3; 4]) {
    let a = pl - pi;
    let b = pj - pl;
    let c = pk - pj;
    let d = pi - pk;
    let (ab, ac, ad) = (a.dot(&b), a.dot(&c), a.dot(&d));
    let (bc, bd, cd) = (b.dot(&c), b.dot(&d), c.dot(&d));
    let (aa, bb, cc, dd) = (
        a.norm_squared(),
        b.norm_squared(),
        c.norm_squared(),
        d.norm_squared(),
    );
    let q = (aa * bb * cc * dd).sqrt();
    let p = ac * bd - ab * cd - bc * ad;
    let cos = p / q;

    let ga = (c * bd - b * cd - d * bc) / q - a * (cos / aa);
    let gb = (d * ac - a * cd - c * ad) / q - b * (cos / bb);
    let gc = (a * bd - d * ab - b * ad) / q - c * (cos / cc);
    let gd = (b * ac - c * ab - a * bc) / q - d * (cos / dd);

    // a = l - i, b = j - l, c = k - j, d = i - k
    let gi = gd - ga;
    let gj = gb - gc;
    let gk = gc - gd;
    let gl = ga - gb;
    (cos, [gi, gj, gk, gl])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn right_triangle_circumcircle() {
        let c = circumcircle(&Vec3::zeros(), &Vec3::x(), &Vec3::y()).unwrap();
        assert_relative_eq!(c.center, Vec3::new(0.5, 0.5, 0.0), epsilon = 1e-15);
        assert_relative_eq!(c.radius, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(c.normal, Vec3::z(), epsilon = 1e-15);
    }

    #[test]
    fn equilateral_circumradius() {
        let h = 3.0f64.sqrt() / 2.0;
        let c = circumcircle(&Vec3::zeros(), &Vec3::x(), &Vec3::new(0.5, h, 0.0)).unwrap();
        assert_relative_eq!(c.radius, 1.0 / 3.0f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn circumcircle_passes_through_vertices() {
        let (p, q, r) = (
            Vec3::new(0.3, -1.2, 0.7),
            Vec3::new(2.0, 0.1, -0.4),
            Vec3::new(-0.5, 0.9, 1.3),
        );
        let c = circumcircle(&p, &q, &r).unwrap();
        for v in [p, q, r] {
            assert_relative_eq!((v - c.center).norm(), c.radius, max_relative = 1e-12);
            assert!((v - c.center).dot(&c.normal).abs() < 1e-12);
        }
    }

    #[test]
    fn collinear_is_degenerate() {
        let err = circumcircle(&Vec3::zeros(), &Vec3::x(), &(Vec3::x() * 2.0)).unwrap_err();
        assert!(matches!(err, Error::DegenerateInput(_)));
    }

    #[test]
    fn cocircular_square_has_zero_angle() {
        let b = beta_from_points(
            &Vec3::zeros(),
            &Vec3::new(1.0, 1.0, 0.0),
            &Vec3::new(0.0, 1.0, 0.0),
            &Vec3::new(1.0, 0.0, 0.0),
        )
        .unwrap();
        assert!(b.abs() < 1e-14, "{b}");
    }

    #[test]
    fn planar_kite_matches_inscribed_angle_oracle() {
        let (i, j, k, l) = (
            Vec3::zeros(),
            Vec3::x(),
            Vec3::new(0.5, 1.0, 0.0),
            Vec3::new(0.5, -1.0, 0.0),
        );
        // triangle angle at k, from the law of cosines
        let angle_at = |apex: Vec3, u: Vec3, v: Vec3| {
            let (a, b) = (u - apex, v - apex);
            (a.dot(&b) / (a.norm() * b.norm())).acos()
        };
        let alpha_k = angle_at(k, i, j);
        let alpha_l = angle_at(l, j, i);
        assert_relative_eq!(alpha_k, 0.6f64.acos(), epsilon = 1e-15);
        let expected = PI - alpha_k - alpha_l;
        assert_relative_eq!(expected, 1.2870022175865687, epsilon = 1e-13);
        assert_relative_eq!(
            beta_from_points(&i, &j, &k, &l).unwrap(),
            expected,
            epsilon = 1e-13
        );
    }

    #[test]
    fn cross_ratio_form_matches_tangent_construction() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let mut pt = || Vec3::new(rng.random(), rng.random(), rng.random()) * 2.0;
            let (i, j, k, l) = (pt(), pt(), pt(), pt());
            let b = beta_from_points(&i, &j, &k, &l).unwrap();
            let (cos, _) = cos_beta_with_gradient(&i, &j, &k, &l);
            assert_relative_eq!(cos, b.cos(), epsilon = 1e-11);
        }
    }

    #[test]
    fn cos_gradient_matches_finite_differences() {
        let pts = [
            Vec3::new(0.1, 0.2, -0.3),
            Vec3::new(1.1, -0.2, 0.4),
            Vec3::new(0.6, 1.0, 0.2),
            Vec3::new(0.4, -0.9, -0.1),
        ];
        let (_, grad) = cos_beta_with_gradient(&pts[0], &pts[1], &pts[2], &pts[3]);
        let h = 1e-6;
        for v in 0..4 {
            for axis in 0..3 {
                let mut plus = pts;
                let mut minus = pts;
                plus[v][axis] += h;
                minus[v][axis] -= h;
                let fp = cos_beta_with_gradient(&plus[0], &plus[1], &plus[2], &plus[3]).0;
                let fm = cos_beta_with_gradient(&minus[0], &minus[1], &minus[2], &minus[3]).0;
                assert_relative_eq!(grad[v][axis], (fp - fm) / (2.0 * h), epsilon = 1e-8);
            }
        }
    }
}
