//! Shared property-check bodies used by both the geometry suite and the
//! acceptance gate.

use super::SplitMix64;
use num_complex::Complex64 as C64;
use ptwkb::potential::{Momentum, ProblemParams};
use ptwkb::quad::{action_integral_tol, continue_sqrt_along, SqrtAnchor};
use ptwkb::stokes::{build_graph, LineKind};
use ptwkb::turning_points;

fn nearest_sqrt(p: C64, reference: C64) -> C64 {
    let r = p.sqrt();
    if (r - reference).norm() <= (r + reference).norm() {
        r
    } else {
        -r
    }
}

fn circle(center: C64, radius: f64, n: usize) -> Vec<C64> {
    let mut pts: Vec<C64> = (0..=n)
        .map(|k| center + C64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    pts.push(pts[0]);
    pts
}

/// Continuing `P^(1/2)` around one simple turning point negates the
/// determination; around none it returns.
pub fn check_branch_loops(rng: &mut SplitMix64, samples: usize) -> Result<(), String> {
    let mut done = 0;
    while done < samples {
        let p = ProblemParams::new(rng.range(-4.0, 5.0), rng.range(-0.45, 1.2));
        let e = rng.range(0.4, 6.0);
        let m = Momentum::new(p, C64::new(e, 0.0));
        let set = turning_points(&p, C64::new(e, 0.0));
        let i = (rng.next_u64() as usize) % set.points.len();
        if set.multiplicities[i] != 1 {
            continue;
        }
        let tp = set.points[i];
        let mut min_other = tp.norm();
        for (j, &q) in set.points.iter().enumerate() {
            if j != i {
                min_other = min_other.min((q - tp).norm());
            }
        }
        let r = 0.35 * min_other;
        if r < 1e-3 {
            continue;
        }
        let loop_pts = circle(tp, r, 96);
        let seed = m.p(loop_pts[0]).sqrt();
        let after = continue_sqrt_along(&m, &loop_pts, seed);
        if (after + seed).norm() > 1e-6 * (1.0 + seed.norm()) {
            return Err(format!(
                "no sign flip around a simple turning point at ({}, {}, {e})",
                p.alpha, p.l
            ));
        }
        let base = tp + C64::from_polar(0.55 * min_other, rng.range(0.0, 6.28));
        let trivial = circle(base, 0.1 * min_other, 64);
        let seed2 = m.p(trivial[0]).sqrt();
        let after2 = continue_sqrt_along(&m, &trivial, seed2);
        if (after2 - seed2).norm() > 1e-7 * (1.0 + seed2.norm()) {
            return Err(format!(
                "determination failed to return around an empty loop at ({}, {}, {e})",
                p.alpha, p.l
            ));
        }
        done += 1;
    }
    Ok(())
}

/// Along every traced line the defining functional stays below
/// `1e-6 (1 + |running integral|)`.
pub fn check_line_kind_residuals(rng: &mut SplitMix64, configs: usize) -> Result<(), String> {
    for _ in 0..configs {
        let p = ProblemParams::new(rng.range(-3.0, 4.0), rng.range(-0.45, 0.9));
        let e = rng.range(0.5, 4.0);
        let g = build_graph(&p, C64::new(e, 0.0)).map_err(|e| e.to_string())?;
        let m = Momentum::new(p, C64::new(e, 0.0));
        for line in g.lines.iter().filter(|l| l.points.len() > 8) {
            let mut s = {
                let raw = m.p(line.points[1]).sqrt();
                let dir = C64::from_polar(1.0, line.emission_angle);
                let rot = match line.kind {
                    LineKind::Stokes => C64::new(0.0, 1.0),
                    LineKind::AntiStokes => C64::new(1.0, 0.0),
                };
                let mut best = (f64::INFINITY, raw);
                for &sg in &[1.0, -1.0] {
                    for &mg in &[1.0, -1.0] {
                        let sv = sg * raw;
                        let d = mg * rot * sv.conj() / sv.norm();
                        if (d - dir).norm() < best.0 {
                            best = ((d - dir).norm(), sv);
                        }
                    }
                }
                best.1
            };
            let mut w = C64::new(0.0, 0.0);
            for win in line.points[1..].windows(2) {
                let sm = nearest_sqrt(m.p(0.5 * (win[0] + win[1])), s);
                let s1 = nearest_sqrt(m.p(win[1]), sm);
                w += (win[1] - win[0]) / 6.0 * (s + 4.0 * sm + s1);
                s = s1;
                let err = match line.kind {
                    LineKind::Stokes => w.re.abs(),
                    LineKind::AntiStokes => w.im.abs(),
                };
                if err > 1e-6 * (1.0 + w.norm()) {
                    return Err(format!(
                        "kind residual {err:.2e} at ({}, {}, {e}), origin {}",
                        p.alpha, p.l, line.origin
                    ));
                }
            }
        }
    }
    Ok(())
}

/// The turning-point multiset is closed under conjugation and negation, with
/// the right total multiplicity.
pub fn check_turning_point_closure(rng: &mut SplitMix64, samples: usize) -> Result<(), String> {
    for _ in 0..samples {
        let p = ProblemParams::new(rng.range(-6.0, 8.0), rng.range(-2.0, 2.0));
        let e = rng.range(-8.0, 8.0);
        let set = turning_points(&p, C64::new(e, 0.0));
        let expected = if p.centrifugal_free() { 6 } else { 8 };
        if set.count_with_multiplicity() != expected {
            return Err(format!(
                "expected {expected} zeros at ({}, {}, {e})",
                p.alpha, p.l
            ));
        }
        for &x in &set.points {
            if !set.points.iter().any(|&y| (y - x.conj()).norm() < 1e-7)
                || !set.points.iter().any(|&y| (y + x).norm() < 1e-7)
            {
                return Err(format!(
                    "symmetry closure fails at ({}, {}, {e})",
                    p.alpha, p.l
                ));
            }
        }
    }
    Ok(())
}

/// Halving the quadrature tolerance moves an action integral by less than
/// its reported error estimate.
pub fn check_quadrature_convergence(rng: &mut SplitMix64, samples: usize) -> Result<(), String> {
    let mut done = 0;
    while done < samples {
        let p = ProblemParams::new(rng.range(-3.0, 4.0), rng.range(-0.4, 0.9));
        let e = rng.range(0.5, 5.0);
        let m = Momentum::new(p, C64::new(e, 0.0));
        let a = C64::new(rng.range(-2.0, 2.0), rng.range(0.6, 2.2));
        let b = C64::new(rng.range(-2.0, 2.0), rng.range(0.6, 2.2));
        if (a - b).norm() < 0.3 {
            continue;
        }
        let Ok(coarse) = action_integral_tol(&m, a, b, &[], SqrtAnchor::Principal, 1e-9) else {
            continue;
        };
        let fine = action_integral_tol(
            &m,
            a,
            b,
            &[],
            SqrtAnchor::AtStart(coarse.anchor.sqrt_value),
            0.5e-9,
        )
        .map_err(|e| e.to_string())?;
        let diff = (coarse.value - fine.value).norm();
        if diff > coarse.error_estimate.max(1e-12 * (1.0 + coarse.value.norm())) {
            return Err(format!(
                "tolerance halving moved omega by {diff:.3e} (estimate {:.3e})",
                coarse.error_estimate
            ));
        }
        done += 1;
    }
    Ok(())
}
