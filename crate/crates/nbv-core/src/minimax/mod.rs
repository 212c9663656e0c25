//! Smallest spherical cap containing a set of unit directions.
//!
//! The cap center ("minimax point") minimizes the maximum angular distance to
//! the set Q, equivalently maximizes g(μ) = min_{q∈Q} μᵀq. Its antipode (the
//! "maximin point") maximizes the minimum angular distance and is the
//! clearest direction away from all of Q. Two regimes:
//!
//! * Q inside an open hemisphere (g* > 0): the cap center is the direction of
//!   the Euclidean smallest enclosing ball center of Q, solved exactly.
//! * Wider than a hemisphere (g* ≤ 0): multi-start projected subgradient
//!   ascent of g with an exact active-set finisher, bounded at 200 steps per
//!   start with step halving.
//!
//! The regime switch tests the exact candidate against a 1e-6 threshold, so a
//! true optimum inside (0, 1e-6] is solved by the iterative path; both paths
//! meet the same answer there.
//!
//! Sets larger than 8192 directions are first thinned to one representative
//! per cell of a 32×64 angular grid, and the thinned set is solved with a
//! cheaper fixed-budget ascent. Survivors are members of Q, so the answer is
//! a real direction of the full set and errs by at most the cell width;
//! below the threshold the exact pipeline is unchanged.

mod seb;

pub use seb::{smallest_enclosing_ball, Ball};

use crate::geom::Vec3;

/// Near-tie window for candidate selection, in radians (0.1°).
const TIE_WINDOW: f64 = 0.1 * std::f64::consts::PI / 180.0;
/// Sub-hemisphere acceptance threshold on the plane distance e.
const SUB_HEMISPHERE_MIN_E: f64 = 1e-6;
/// Above this many directions Q is angularly thinned before solving.
const REDUCE_ABOVE: usize = 8192;

#[derive(Debug, Clone, Copy)]
pub struct CapSolution {
    /// Optimized plane normal n*: toward the cap center in the
    /// sub-hemisphere regime, away from it otherwise.
    pub normal: Vec3,
    /// Plane distance from the sphere center, in [0, 1].
    pub e: f64,
    /// Center of the smallest cap containing Q.
    pub minimax_point: Vec3,
    /// Antipode of the minimax point: the clearest sight-line direction.
    pub maximin_point: Vec3,
    /// True when Q fits in an open hemisphere (solved exactly).
    pub sub_hemisphere: bool,
}

fn g_min_dot(q: &[Vec3], mu: &Vec3) -> f64 {
    q.iter().map(|p| mu.dot(p)).fold(f64::INFINITY, f64::min)
}

fn g_min_dot_arg(q: &[Vec3], mu: &Vec3) -> (f64, usize) {
    let mut best = f64::INFINITY;
    let mut arg = 0usize;
    for (i, p) in q.iter().enumerate() {
        let d = mu.dot(p);
        if d < best {
            best = d;
            arg = i;
        }
    }
    (best, arg)
}

/// Deterministic angular thinning: keep the first direction landing in each
/// cell of an nz×nphi latitude-longitude grid, in input order.
fn bin_reduce(q: &[Vec3], nz: usize, nphi: usize) -> Vec<Vec3> {
    let mut seen = vec![false; nz * nphi];
    let mut out = Vec::new();
    for p in q {
        let iz = ((((p.z + 1.0) / 2.0) * nz as f64) as usize).min(nz - 1);
        let phi = p.y.atan2(p.x) + std::f64::consts::PI;
        let ip = ((phi / std::f64::consts::TAU) * nphi as f64) as usize;
        let cell = iz * nphi + ip.min(nphi - 1);
        if !seen[cell] {
            seen[cell] = true;
            out.push(*p);
        }
    }
    out
}

/// Deterministic near-uniform sphere directions (golden-spiral layout).
fn spiral_direction(i: usize, k: usize) -> Vec3 {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    let z = 1.0 - (2.0 * i as f64 + 1.0) / k as f64;
    let rad = (1.0 - z * z).max(0.0).sqrt();
    let phi = golden * i as f64;
    Vec3::new(rad * phi.cos(), rad * phi.sin(), z)
}

/// Projected subgradient ascent on g from `start`; at most `max_iters`
/// accepted or rejected steps with halving on failure.
fn polish(q: &[Vec3], start: Vec3, max_iters: usize) -> (Vec3, f64) {
    let mut mu = start;
    let mut val = g_min_dot(q, &mu);
    let mut step = 0.5f64;
    for _ in 0..max_iters {
        if step < 1e-9 {
            break;
        }
        let (_, active) = g_min_dot_arg(q, &mu);
        let a = q[active];
        // Tangent direction toward the active (worst) point.
        let dir = a - mu * mu.dot(&a);
        if dir.norm() < 1e-14 {
            break;
        }
        let cand = (mu + dir * step).normalize();
        let cval = g_min_dot(q, &cand);
        if cval > val {
            mu = cand;
            val = cval;
            step *= 1.3;
        } else {
            step *= 0.5;
        }
    }
    (mu, val)
}

/// Exact stationary candidates from a near-active constraint set: the
/// optimum equalizes dot products over its active points, so try the
/// bisector of every active pair and the equalizing axis of every triple.
fn active_set_candidates(q: &[Vec3], mu: &Vec3, val: f64, margin: f64, out: &mut Vec<Vec3>) {
    let mut active: Vec<Vec3> = Vec::new();
    for p in q {
        if mu.dot(p) <= val + margin {
            active.push(*p);
            if active.len() >= 8 {
                break;
            }
        }
    }
    for (i, a) in active.iter().enumerate() {
        out.push(*a);
        for (j, b) in active.iter().enumerate().skip(i + 1) {
            let s = a + b;
            if s.norm() > 1e-12 {
                out.push(s.normalize());
            }
            for c in active.iter().skip(j + 1) {
                let x = (a - b).cross(&(b - c));
                if x.norm() > 1e-12 {
                    let x = x.normalize();
                    out.push(x);
                    out.push(-x);
                }
            }
        }
    }
}

/// Polish followed by exact snapping. The active set is identified at several
/// margins because a partially converged μ separates truly active points by
/// more than floating-point noise.
fn polish_and_snap(q: &[Vec3], start: Vec3) -> (Vec3, f64) {
    let (mut mu, mut val) = polish(q, start, 200);
    let mut exact = Vec::new();
    for _ in 0..3 {
        exact.clear();
        for margin in [1e-7, 1e-4, 1e-2, 0.1] {
            active_set_candidates(q, &mu, val, margin, &mut exact);
        }
        // Among (near-)equal-value snaps keep the one closest to the current
        // μ, so distinct starts converging to distinct optima stay distinct.
        let mut best_v = val;
        for c in &exact {
            best_v = best_v.max(g_min_dot(q, c));
        }
        if best_v <= val {
            break;
        }
        let mut best_c = mu;
        let mut best_near = f64::NEG_INFINITY;
        for c in &exact {
            let v = g_min_dot(q, c);
            if v >= best_v - 1e-12 {
                let near = c.dot(&mu);
                if near > best_near {
                    best_near = near;
                    best_c = *c;
                }
            }
        }
        mu = best_c;
        val = g_min_dot(q, &mu);
        let (m2, v2) = polish(q, mu, 200);
        if v2 > val {
            mu = m2;
            val = v2;
        }
    }
    (mu, val)
}

/// Solves the smallest-cap program for `q`. `init_orientation` is the known
/// unoccluded sight-line direction (from the projection center toward the
/// observing view); with an empty `q` the maximin point is exactly that
/// direction, and it breaks near-ties (within 0.1°) otherwise.
pub fn solve_minimax_cap(q: &[Vec3], init_orientation: &Vec3) -> CapSolution {
    let init = init_orientation.normalize();
    assert!(init.x.is_finite() && init.y.is_finite() && init.z.is_finite());
    if q.is_empty() {
        return CapSolution {
            normal: -init,
            e: 1.0,
            minimax_point: -init,
            maximin_point: init,
            sub_hemisphere: true,
        };
    }

    let thinned;
    let (q, large) = if q.len() > REDUCE_ABOVE {
        thinned = bin_reduce(q, 32, 64);
        (&thinned[..], true)
    } else {
        (q, false)
    };

    // Exact sub-hemisphere solve via the enclosing ball of Q.
    let ball = smallest_enclosing_ball(q);
    if ball.center.norm() > 1e-9 {
        let u = ball.center.normalize();
        let h = g_min_dot(q, &u);
        if h > SUB_HEMISPHERE_MIN_E {
            return CapSolution {
                normal: u,
                e: h.min(1.0),
                minimax_point: u,
                maximin_point: -u,
                sub_hemisphere: true,
            };
        }
    }

    // Super-hemisphere regime: multi-start ascent.
    let mut starts: Vec<Vec3> = vec![init, -init];
    let mean: Vec3 = q.iter().sum();
    if mean.norm() > 1e-9 {
        starts.push(mean.normalize());
        starts.push(-mean.normalize());
    }
    let k = if large { 1024 } else { 4096 };
    let mut coarse: Vec<(f64, usize)> = (0..k)
        .map(|i| (g_min_dot(q, &spiral_direction(i, k)), i))
        .collect();
    coarse.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    for &(_, i) in coarse.iter().take(3) {
        starts.push(spiral_direction(i, k));
    }

    let mut candidates: Vec<(Vec3, f64)> = Vec::new();
    for s in starts {
        candidates.push(if large { polish(q, s, 120) } else { polish_and_snap(q, s) });
    }

    let top = candidates
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let top_angle = top.clamp(-1.0, 1.0).acos();
    // Near-ties resolve toward the known-clear direction: smallest angle
    // between the maximin point (−μ) and init, i.e. smallest μ·init.
    let mut best = candidates[0];
    let mut best_tie = f64::INFINITY;
    for &(mu, v) in &candidates {
        if v.clamp(-1.0, 1.0).acos() <= top_angle + TIE_WINDOW {
            let tie = mu.dot(&init);
            if tie < best_tie {
                best_tie = tie;
                best = (mu, v);
            }
        }
    }

    let (mu, val) = best;
    CapSolution {
        normal: -mu,
        e: val.abs().min(1.0),
        minimax_point: mu,
        maximin_point: -mu,
        sub_hemisphere: false,
    }
}

#[cfg(test)]
mod tests;
