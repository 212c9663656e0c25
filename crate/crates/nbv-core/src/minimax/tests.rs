use super::*;
use crate::geom::angle_between;
use nalgebra::Rotation3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Test-side direction sampler, written independently of the solver's
/// internal scan: stratified z with an irrational azimuth increment.
fn sample_dir(i: usize, n: usize) -> Vec3 {
    let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
    let rad = (1.0 - z * z).max(0.0).sqrt();
    let phi = 2.0 * std::f64::consts::PI * ((i as f64 * 0.618_033_988_749_894_9) % 1.0);
    Vec3::new(rad * phi.cos(), rad * phi.sin(), z)
}

/// Brute-force maximin: the sampled direction with the greatest minimum
/// angular distance to Q. Returns (direction, that angle).
fn brute_maximin(q: &[Vec3], samples: usize) -> (Vec3, f64) {
    let mut best = (Vec3::new(0.0, 0.0, 1.0), f64::NEG_INFINITY);
    for i in 0..samples {
        let s = sample_dir(i, samples);
        let worst = q.iter().map(|p| s.dot(p)).fold(f64::NEG_INFINITY, f64::max);
        let min_angle = worst.clamp(-1.0, 1.0).acos();
        if min_angle > best.1 {
            best = (s, min_angle);
        }
    }
    best
}

fn min_angle_to_set(dir: &Vec3, q: &[Vec3]) -> f64 {
    q.iter()
        .map(|p| angle_between(dir, p))
        .fold(f64::INFINITY, f64::min)
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Random unit vectors within `half_angle` of `axis`.
fn random_cone(rng: &mut ChaCha8Rng, axis: &Vec3, half_angle: f64, n: usize) -> Vec<Vec3> {
    let perp1 = crate::geom::any_perpendicular(axis);
    let perp2 = axis.cross(&perp1);
    (0..n)
        .map(|_| {
            let t = rng.gen_range(0.0..half_angle);
            let ph = rng.gen_range(0.0..std::f64::consts::TAU);
            (axis * t.cos() + (perp1 * ph.cos() + perp2 * ph.sin()) * t.sin()).normalize()
        })
        .collect()
}

const DEG: f64 = std::f64::consts::PI / 180.0;

#[test]
fn single_direction_caps_at_itself() {
    let q = [Vec3::new(0.0, 0.0, 1.0)];
    let sol = solve_minimax_cap(&q, &Vec3::new(1.0, 0.0, 0.0));
    assert!((sol.minimax_point - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-9);
    assert!((sol.maximin_point - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-9);
    assert!((sol.e - 1.0).abs() < 1e-9);
    assert!(sol.sub_hemisphere);
}

#[test]
fn orthogonal_pair_caps_at_the_bisector() {
    let q = [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
    let sol = solve_minimax_cap(&q, &Vec3::new(0.0, 0.0, 1.0));
    let want = Vec3::new(0.7071, 0.7071, 0.0);
    assert!((sol.minimax_point - want).norm() < 1e-4);
    assert!((sol.e - 0.7071).abs() < 1e-4);
    assert!(sol.sub_hemisphere);
    assert_eq!(sol.normal, sol.minimax_point);
}

#[test]
fn equator_cross_with_south_pole_clears_through_the_north_pole() {
    let q = [
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(-1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, -1.0, 0.0),
        Vec3::new(0.0, 0.0, -1.0),
    ];
    let sol = solve_minimax_cap(&q, &Vec3::new(1.0, 1.0, 1.0).normalize());
    assert!(!sol.sub_hemisphere);
    assert!(
        angle_between(&sol.maximin_point, &Vec3::new(0.0, 0.0, 1.0)) < 1.0 * DEG,
        "maximin {:?}",
        sol.maximin_point
    );
    let min_angle = min_angle_to_set(&sol.maximin_point, &q);
    assert!((min_angle - 90.0 * DEG).abs() < 1.0 * DEG);
    assert_eq!(sol.normal, sol.maximin_point);
}

#[test]
fn empty_set_keeps_the_original_sight_line() {
    let init = Vec3::new(0.3, -0.5, 0.8).normalize();
    let sol = solve_minimax_cap(&[], &init);
    assert!((sol.maximin_point - init).norm() < 1e-12);
    assert_eq!(sol.maximin_point, -sol.minimax_point);
}

#[test]
fn maximin_is_exactly_the_antipode() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let n = rng.gen_range(1..40);
        let q: Vec<Vec3> = (0..n).map(|_| random_unit(&mut rng)).collect();
        let sol = solve_minimax_cap(&q, &random_unit(&mut rng));
        assert_eq!(sol.maximin_point, -sol.minimax_point);
        assert!(sol.e >= 0.0 && sol.e <= 1.0);
    }
}

#[test]
fn cone_inputs_use_the_exact_sub_hemisphere_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..30 {
        let axis = random_unit(&mut rng);
        let n = rng.gen_range(1..80);
        let q = random_cone(&mut rng, &axis, 60.0 * DEG, n);
        let sol = solve_minimax_cap(&q, &random_unit(&mut rng));
        assert!(sol.sub_hemisphere);
        assert!(sol.e > 0.0);
        // e is the cosine of the cap's angular radius.
        let worst = q
            .iter()
            .map(|p| angle_between(&sol.minimax_point, p))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((sol.e - worst.cos()).abs() < 1e-9);
        assert_eq!(sol.normal, sol.minimax_point);
    }
}

#[test]
fn spread_inputs_use_the_super_hemisphere_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        // A simplex hull containing the origin plus noise directions.
        let t = 1.0 / 3f64.sqrt();
        let mut q = vec![
            Vec3::new(t, t, t),
            Vec3::new(t, -t, -t),
            Vec3::new(-t, t, -t),
            Vec3::new(-t, -t, t),
        ];
        for _ in 0..rng.gen_range(0..30) {
            q.push(random_unit(&mut rng));
        }
        let sol = solve_minimax_cap(&q, &random_unit(&mut rng));
        assert!(!sol.sub_hemisphere);
        assert_eq!(sol.normal, sol.maximin_point);
    }
}

#[test]
fn solution_tracks_the_brute_force_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..40 {
        let n = rng.gen_range(1..=60);
        let q: Vec<Vec3> = if case % 2 == 0 {
            let axis = random_unit(&mut rng);
            let half = rng.gen_range(10.0..80.0) * DEG;
            random_cone(&mut rng, &axis, half, n)
        } else {
            (0..n).map(|_| random_unit(&mut rng)).collect()
        };
        let sol = solve_minimax_cap(&q, &random_unit(&mut rng));
        let got = min_angle_to_set(&sol.maximin_point, &q);
        let (_, brute) = brute_maximin(&q, 20_000);
        assert!(
            got >= brute - 1.0 * DEG,
            "case {case}: solver {:.4}° vs brute {:.4}°",
            got / DEG,
            brute / DEG
        );
    }
}

#[test]
fn rotating_the_problem_rotates_the_answer() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for case in 0..30 {
        let n = rng.gen_range(3..40);
        let q: Vec<Vec3> = if case % 2 == 0 {
            let axis = random_unit(&mut rng);
            random_cone(&mut rng, &axis, 70.0 * DEG, n)
        } else {
            (0..n).map(|_| random_unit(&mut rng)).collect()
        };
        let init = random_unit(&mut rng);
        let rot = Rotation3::from_euler_angles(
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        );
        let a = solve_minimax_cap(&q, &init);
        let qr: Vec<Vec3> = q.iter().map(|p| rot * p).collect();
        let b = solve_minimax_cap(&qr, &(rot * init));
        let ang = angle_between(&(rot * a.minimax_point), &b.minimax_point);
        if ang > 1e-6 {
            // Ties: equally good optima may swap; the values must agree.
            let va = min_angle_to_set(&a.maximin_point, &q);
            let vb = min_angle_to_set(&b.maximin_point, &qr);
            assert!(
                (va - vb).abs() < 1e-9,
                "case {case}: angle gap {ang}, values {va} vs {vb}"
            );
        }
    }
}

#[test]
fn near_ties_resolve_toward_the_known_clear_direction() {
    // Antipodal pair: every direction on the orthogonal great circle is
    // optimal; the tie must resolve to the initial sight line.
    let q = [Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)];
    let init = Vec3::new(0.0, 1.0, 0.0);
    let sol = solve_minimax_cap(&q, &init);
    assert!(angle_between(&sol.maximin_point, &init) < 0.2 * DEG);

    // Four-point equator cross: exactly two optima (±z); pick the init side.
    let q = [
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(-1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, -1.0, 0.0),
    ];
    let up = solve_minimax_cap(&q, &Vec3::new(0.05, 0.02, 1.0).normalize());
    assert!(up.maximin_point.z > 0.99);
    let down = solve_minimax_cap(&q, &Vec3::new(0.3, 0.2, -0.9).normalize());
    assert!(down.maximin_point.z < -0.99);
}

#[test]
fn huge_direction_sets_are_thinned_but_stay_near_the_optimum() {
    // 30 k directions covering most of the sphere except a cone-shaped gap:
    // far over the thinning threshold, with a known clear direction.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let gap = Vec3::new(0.3, -0.5, 0.8).normalize();
    let gap_half = 35.0 * DEG;
    let mut q = Vec::new();
    while q.len() < 30_000 {
        let v = random_unit(&mut rng);
        if angle_between(&v, &gap) > gap_half {
            q.push(v);
        }
    }
    let init = Vec3::new(0.0, 0.0, 1.0);
    let sol = solve_minimax_cap(&q, &init);
    assert!(!sol.sub_hemisphere);
    // The clear cone is ~35° wide; the thinned solve must land well inside
    // it. Allow a few degrees for the 32×64 grid and the bounded ascent.
    assert!(
        angle_between(&sol.maximin_point, &gap) < 8.0 * DEG,
        "maximin missed the gap by {}°",
        angle_between(&sol.maximin_point, &gap) / DEG
    );
    let achieved = min_angle_to_set(&sol.maximin_point, &q);
    let (_, brute) = brute_maximin(&q, 4096);
    assert!(
        achieved > brute - 5.0 * DEG,
        "achieved {}° vs brute {}°",
        achieved / DEG,
        brute / DEG
    );

    // Determinism: the same input yields bit-identical output.
    let again = solve_minimax_cap(&q, &init);
    assert_eq!(sol.maximin_point, again.maximin_point);
    assert_eq!(sol.e, again.e);
}

#[test]
fn thinning_keeps_members_of_the_input_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let q: Vec<Vec3> = (0..20_000).map(|_| random_unit(&mut rng)).collect();
    let thinned = bin_reduce(&q, 32, 64);
    assert!(thinned.len() <= 32 * 64);
    assert!(thinned.len() > 1000, "thinned too aggressively: {}", thinned.len());
    for v in thinned.iter().take(50) {
        assert!(q.iter().any(|p| p == v));
    }
    // Every input direction is angularly near some survivor.
    for p in q.iter().step_by(997) {
        let near = thinned
            .iter()
            .map(|t| angle_between(t, p))
            .fold(f64::INFINITY, f64::min);
        assert!(near < 8.0 * DEG, "orphan direction {}° from all survivors", near / DEG);
    }
}
