//! Randomized property checks for the geometry layer: branch monodromy,
//! traced-line residuals, turning-point symmetry closure and quadrature
//! convergence.

mod common;

use common::{props, SplitMix64};
use num_complex::Complex64 as C64;
use ptwkb::potential::{Momentum, ProblemParams};
use ptwkb::quad::{action_integral, continue_sqrt_along, SqrtAnchor};
use ptwkb::turning_points;

fn circle(center: C64, radius: f64, n: usize) -> Vec<C64> {
    let mut pts: Vec<C64> = (0..=n)
        .map(|k| center + C64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    pts.push(pts[0]);
    pts
}

#[test]
fn branch_loop_monodromy_random_samples() {
    let mut rng = SplitMix64(0x5eed_0001);
    props::check_branch_loops(&mut rng, 10).unwrap();
}

#[test]
fn branch_loop_around_two_turning_points_returns() {
    // A loop enclosing exactly a conjugate pair of simple turning points.
    let p = ProblemParams::new(3.0, 0.5);
    let e = C64::new(1.0, 0.0);
    let m = Momentum::new(p, e);
    let set = turning_points(&p, e);
    let a = set.points[0];
    let b = set
        .points
        .iter()
        .copied()
        .find(|&q| (q - a.conj()).norm() < 1e-9 && (q - a).norm() > 1e-9)
        .expect("conjugate partner");
    let center = 0.5 * (a + b);
    let r = 0.5 * (a - b).norm() + 0.22;
    let inside = set
        .points
        .iter()
        .filter(|&&q| (q - center).norm() < r)
        .count();
    assert_eq!(inside, 2, "loop radius encloses exactly the pair");
    let loop_pts = circle(center, r, 192);
    let seed = m.p(loop_pts[0]).sqrt();
    let after = continue_sqrt_along(&m, &loop_pts, seed);
    assert!(
        (after - seed).norm() < 1e-6 * (1.0 + seed.norm()),
        "determination must return around two simple zeros"
    );
}

#[test]
fn line_kind_residuals_random_configurations() {
    let mut rng = SplitMix64(0x5eed_0002);
    props::check_line_kind_residuals(&mut rng, 4).unwrap();
}

#[test]
fn turning_point_symmetry_closure_hundred_samples() {
    let mut rng = SplitMix64(0x5eed_0003);
    props::check_turning_point_closure(&mut rng, 100).unwrap();
}

#[test]
fn quadrature_convergence_random_pairs() {
    let mut rng = SplitMix64(0x5eed_0004);
    props::check_quadrature_convergence(&mut rng, 8).unwrap();
}

#[test]
fn action_antisymmetry_and_path_independence_random() {
    let mut rng = SplitMix64(0x5eed_0005);
    let mut checked = 0;
    while checked < 6 {
        let p = ProblemParams::new(rng.range(-2.0, 3.5), rng.range(-0.4, 0.8));
        let e = rng.range(0.5, 4.0);
        let m = Momentum::new(p, C64::new(e, 0.0));
        let a = C64::new(rng.range(-2.2, 2.2), rng.range(0.8, 2.4));
        let b = C64::new(rng.range(-2.2, 2.2), rng.range(0.8, 2.4));
        if (a - b).norm() < 0.5 {
            continue;
        }
        let Ok(fwd) = action_integral(&m, a, b, &[], SqrtAnchor::Principal) else {
            continue;
        };
        let back = action_integral(&m, b, a, &[], SqrtAnchor::AtEnd(fwd.anchor.sqrt_value)).unwrap();
        assert!(
            (fwd.value + back.value).norm() < 1e-8 * (1.0 + fwd.value.norm()),
            "antisymmetry violated at ({}, {}, {e})",
            p.alpha,
            p.l
        );
        // A perpendicular bump smaller than the segment's clearance from
        // every turning point keeps the two routes homotopic.
        let set = turning_points(&p, C64::new(e, 0.0));
        let seg = b - a;
        let mut clearance = f64::INFINITY;
        for &tp in &set.points {
            let t = (((tp - a) * seg.conj()).re / seg.norm_sqr()).clamp(0.0, 1.0);
            clearance = clearance.min((tp - (a + seg * t)).norm());
        }
        if clearance < 0.08 {
            continue;
        }
        let normal = seg * C64::new(0.0, 1.0) / seg.norm();
        let mid = 0.5 * (a + b) + normal * (0.3 * clearance);
        let Ok(detour) = action_integral(&m, a, b, &[mid], SqrtAnchor::AtStart(fwd.anchor.sqrt_value))
        else {
            continue;
        };
        assert!(
            (fwd.value - detour.value).norm() < 1e-8 * (1.0 + fwd.value.norm()),
            "path dependence at ({}, {}, {e}): {} vs {}",
            p.alpha,
            p.l,
            fwd.value,
            detour.value
        );
        checked += 1;
    }
}
