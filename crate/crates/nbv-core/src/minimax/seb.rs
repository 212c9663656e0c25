//! Exact smallest enclosing ball in 3D.
//!
//! Pivot scheme: keep the exact minimal ball of a support set of at most four
//! points; while some input point lies outside, recompute the exact ball of
//! support ∪ {farthest outside point}. Each pivot strictly grows the radius,
//! so the loop terminates, and a ball that is minimal for a subset while
//! containing the whole set is the minimal ball of the set.

use crate::geom::Vec3;
use nalgebra::Matrix3;

#[derive(Debug, Clone, Copy)]
pub struct Ball {
    pub center: Vec3,
    pub radius: f64,
}

impl Ball {
    fn point(p: Vec3) -> Self {
        Ball { center: p, radius: 0.0 }
    }

    fn through_pair(a: Vec3, b: Vec3) -> Self {
        Ball {
            center: (a + b) * 0.5,
            radius: (a - b).norm() * 0.5,
        }
    }

    /// Ball with the triangle's circumcircle as a great circle. None when the
    /// points are (nearly) collinear.
    fn through_triple(a: Vec3, b: Vec3, c: Vec3) -> Option<Self> {
        let u = b - a;
        let v = c - a;
        let n = u.cross(&v);
        let scale2 = u.norm_squared().max(v.norm_squared());
        if n.norm_squared() <= scale2 * scale2 * 1e-24 {
            return None;
        }
        let m = Matrix3::from_rows(&[
            (2.0 * u).transpose(),
            (2.0 * v).transpose(),
            n.transpose(),
        ]);
        let rhs = Vec3::new(u.norm_squared() + 2.0 * u.dot(&a), v.norm_squared() + 2.0 * v.dot(&a), n.dot(&a));
        let center = m.lu().solve(&rhs)?;
        Some(Ball { center, radius: (center - a).norm() })
    }

    /// Circumsphere of a tetrahedron. None when (nearly) coplanar.
    fn through_quad(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> Option<Self> {
        let u = b - a;
        let v = c - a;
        let w = d - a;
        let det = u.dot(&v.cross(&w));
        let scale = u.norm().max(v.norm()).max(w.norm());
        if det.abs() <= scale * scale * scale * 1e-12 {
            return None;
        }
        let m = Matrix3::from_rows(&[
            (2.0 * u).transpose(),
            (2.0 * v).transpose(),
            (2.0 * w).transpose(),
        ]);
        let rhs = Vec3::new(
            u.norm_squared() + 2.0 * u.dot(&a),
            v.norm_squared() + 2.0 * v.dot(&a),
            w.norm_squared() + 2.0 * w.dot(&a),
        );
        let center = m.lu().solve(&rhs)?;
        Some(Ball { center, radius: (center - a).norm() })
    }

    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        (p - self.center).norm() <= self.radius + tol
    }
}

/// Exact minimal enclosing ball of at most five points, by enumerating every
/// boundary-support subset of size 1..4 and keeping the smallest candidate
/// that encloses all inputs.
fn ball_of_few(pts: &[Vec3]) -> Ball {
    debug_assert!(!pts.is_empty() && pts.len() <= 5);
    let tol = pts
        .iter()
        .map(|p| p.norm())
        .fold(1.0f64, f64::max)
        * 1e-10;
    let mut best: Option<Ball> = None;
    let mut consider = |b: Ball| {
        if pts.iter().all(|p| b.contains(p, tol))
            && best.map_or(true, |cur| b.radius < cur.radius)
        {
            best = Some(b);
        }
    };
    let n = pts.len();
    for i in 0..n {
        consider(Ball::point(pts[i]));
        for j in i + 1..n {
            consider(Ball::through_pair(pts[i], pts[j]));
            for k in j + 1..n {
                if let Some(b) = Ball::through_triple(pts[i], pts[j], pts[k]) {
                    consider(b);
                }
                for l in k + 1..n {
                    if let Some(b) = Ball::through_quad(pts[i], pts[j], pts[k], pts[l]) {
                        consider(b);
                    }
                }
            }
        }
    }
    best.expect("at least the all-pairs diameter ball encloses few points")
}

/// Exact smallest enclosing ball of `pts`. Empty input yields a zero ball at
/// the origin.
pub fn smallest_enclosing_ball(pts: &[Vec3]) -> Ball {
    if pts.is_empty() {
        return Ball { center: Vec3::zeros(), radius: 0.0 };
    }
    let tol = pts.iter().map(|p| p.norm()).fold(1.0f64, f64::max) * 1e-10;
    let mut support: Vec<Vec3> = vec![pts[0]];
    let mut ball = Ball::point(pts[0]);
    let mut pivots = 0u32;
    loop {
        pivots += 1;
        assert!(pivots < 10_000, "enclosing-ball pivot failed to converge");
        // Farthest point outside the current ball, if any.
        let mut worst: Option<(f64, usize)> = None;
        for (i, p) in pts.iter().enumerate() {
            let d = (p - ball.center).norm();
            if d > ball.radius + tol && worst.map_or(true, |(w, _)| d > w) {
                worst = Some((d, i));
            }
        }
        let Some((_, far)) = worst else {
            return ball;
        };
        let mut cand = support.clone();
        cand.push(pts[far]);
        let grown = ball_of_few(&cand);
        // Shrink the support back to the boundary points of the new ball.
        support = cand
            .into_iter()
            .filter(|p| ((p - grown.center).norm() - grown.radius).abs() <= tol.max(grown.radius * 1e-9))
            .collect();
        if support.len() > 4 {
            support.truncate(4);
        }
        debug_assert!(grown.radius >= ball.radius - tol);
        ball = grown;
    }
}
