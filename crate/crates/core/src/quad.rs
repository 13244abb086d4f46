//! Branch-continued action integrals `omega(a, b) = int_a^b P(t)^(1/2) dt`.
//!
//! `P^(1/2)` has no globally consistent determination once eight turning
//! points are present, so no global cuts are used: every integral carries its
//! own branch anchor and the square root is continued continuously along the
//! concrete path. Endpoints at turning points are integrable
//! (`(x - x0)^(m/2)` locally) and handled by a parameter substitution that
//! kills the derivative at the singular end.

use crate::error::{Error, Result};
use crate::potential::Momentum;
use crate::turning::turning_points;
use crate::C64;
use serde::{Deserialize, Serialize};

/// Relative clearance a path must keep from turning points and from the
/// origin (when the centrifugal term makes `x = 0` singular).
pub const CLEARANCE_REL: f64 = 2e-3;

/// Absolute quadrature tolerance, relative to the integral scale.
const QUAD_TOL_REL: f64 = 1e-13;

const MAX_DEPTH: usize = 38;

/// The determination of `P^(1/2)` at a reference point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchAnchor {
    pub point: C64,
    pub sqrt_value: C64,
}

/// How to seed the square-root branch for an integral.
#[derive(Debug, Clone, Copy)]
pub enum SqrtAnchor {
    /// Principal square root at the first point of the path where `P != 0`.
    Principal,
    /// A known value of `P^(1/2)` at the path start.
    AtStart(C64),
    /// A known value of `P^(1/2)` at the path end (the integral is computed
    /// backwards and negated, so the determination matches at the end).
    AtEnd(C64),
}

/// An evaluated action integral.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionValue {
    pub value: C64,
    /// The polyline actually integrated along.
    pub path: Vec<C64>,
    pub anchor: BranchAnchor,
    pub error_estimate: f64,
}

/// `omega(a, b)` along `a -> hints -> b`, with clearance checking against all
/// turning points and the origin. Fails with [`Error::PathTooClose`] when the
/// route passes an obstacle without a hint to steer around it.
pub fn action_integral(
    m: &Momentum,
    a: C64,
    b: C64,
    hints: &[C64],
    anchor: SqrtAnchor,
) -> Result<ActionValue> {
    action_integral_tol(m, a, b, hints, anchor, QUAD_TOL_REL)
}

/// [`action_integral`] with an explicit quadrature tolerance.
pub fn action_integral_tol(
    m: &Momentum,
    a: C64,
    b: C64,
    hints: &[C64],
    anchor: SqrtAnchor,
    tol_rel: f64,
) -> Result<ActionValue> {
    let tps = turning_points(&m.params, m.energy);
    let mut path = Vec::with_capacity(hints.len() + 2);
    path.push(a);
    path.extend_from_slice(hints);
    path.push(b);
    let clearance = CLEARANCE_REL * (1.0 + m.scale());
    check_clearance(m, &path, &tps.points, clearance)?;
    integrate_polyline_tol(m, &path, anchor, &tps.points, tol_rel)
}

/// Like [`action_integral`] but inserts perpendicular detour waypoints
/// automatically when the straight route runs too close to an obstacle.
pub(crate) fn action_integral_auto(
    m: &Momentum,
    a: C64,
    b: C64,
    anchor: SqrtAnchor,
    obstacles: &[C64],
) -> Result<ActionValue> {
    // Working clearance well above the hard minimum: the integrand has a
    // square-root kink at every turning point and quadrature converges
    // slowly on paths that graze one. In cramped configurations (nearly
    // coincident turning points) the detour budget can run out; the straight
    // route is then integrated anyway and the adaptive subdivision absorbs
    // the kink.
    let clearance = 0.035 * (1.0 + m.scale());
    let mut path = vec![a, b];
    for _ in 0..10 {
        match worst_violation(&path, obstacles, m, clearance) {
            None => return integrate_polyline_tol(m, &path, anchor, obstacles, ENGINE_TOL_REL),
            Some((seg, obstacle, foot)) => {
                let dir = path[seg + 1] - path[seg];
                let n = (dir * C64::new(0.0, 1.0)) / dir.norm();
                // Step to whichever side moves away from the obstacle.
                let side = if (foot - obstacle).re * n.re + (foot - obstacle).im * n.im >= 0.0 {
                    1.0
                } else {
                    -1.0
                };
                let waypoint = obstacle + n * (2.5 * clearance * side);
                path.insert(seg + 1, waypoint);
            }
        }
    }
    integrate_polyline_tol(m, &[a, b], anchor, obstacles, ENGINE_TOL_REL)
}

/// Tolerance for the engine's continuation integrals: their values carry the
/// large far-field exponents, while the quantisation condition needs the
/// small tp-to-tp differences to absolute accuracy.
pub(crate) const ENGINE_TOL_REL: f64 = 3e-15;

/// Integrate along an explicit polyline without clearance checks (callers
/// that construct geometrically safe paths, e.g. arcs beyond every turning
/// point, use this directly).
pub(crate) fn integrate_polyline(
    m: &Momentum,
    path: &[C64],
    anchor: SqrtAnchor,
    turning: &[C64],
) -> Result<ActionValue> {
    integrate_polyline_tol(m, path, anchor, turning, QUAD_TOL_REL)
}

pub(crate) fn integrate_polyline_tol(
    m: &Momentum,
    path: &[C64],
    anchor: SqrtAnchor,
    turning: &[C64],
    tol_rel: f64,
) -> Result<ActionValue> {
    assert!(path.len() >= 2);
    let (forward, seed) = match anchor {
        SqrtAnchor::AtEnd(s) => (false, Some(s)),
        SqrtAnchor::AtStart(s) => (true, Some(s)),
        SqrtAnchor::Principal => (true, None),
    };
    let pts: Vec<C64> = if forward {
        path.to_vec()
    } else {
        path.iter().rev().copied().collect()
    };

    let tp_tol = 1e-7 * (1.0 + m.scale());
    let mut total = C64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut s_carry: Option<C64> = seed;
    let mut anchor_out: Option<BranchAnchor> = None;

    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        if (p - q).norm() == 0.0 {
            continue;
        }
        let p_is_tp = turning.iter().any(|&t| (t - p).norm() < tp_tol);
        let q_is_tp = turning.iter().any(|&t| (t - q).norm() < tp_tol);
        let (val, e, s_end, first_anchor) =
            segment_integral(m, p, q, p_is_tp, q_is_tp, s_carry, tol_rel)?;
        total += val;
        err += e;
        s_carry = Some(s_end);
        if anchor_out.is_none() {
            anchor_out = Some(first_anchor);
        }
    }

    let value = if forward { total } else { -total };
    Ok(ActionValue {
        value,
        path: path.to_vec(),
        anchor: anchor_out.unwrap_or(BranchAnchor {
            point: path[0],
            sqrt_value: C64::new(0.0, 0.0),
        }),
        error_estimate: err,
    })
}

/// Continue `P^(1/2)` from `seed` at `poly[0]` along the polyline; returns the
/// determination at the last point. Used for monodromy checks and for seeding
/// integrals whose anchor lives elsewhere.
pub fn continue_sqrt_along(m: &Momentum, poly: &[C64], seed: C64) -> C64 {
    let mut s = seed;
    for w in poly.windows(2) {
        s = continue_on_segment(m, w[0], w[1], s);
    }
    s
}

fn continue_on_segment(m: &Momentum, p: C64, q: C64, s0: C64) -> C64 {
    // Subdivide until the argument of P turns by < 0.7 rad per piece.
    fn rec(m: &Momentum, p: C64, q: C64, s0: C64, depth: usize) -> C64 {
        let pp = m.p(p);
        let pq = m.p(q);
        let turn = if pp.norm() == 0.0 || pq.norm() == 0.0 {
            std::f64::consts::PI // force subdivision near zeros
        } else {
            (pq / pp).arg().abs()
        };
        if turn < 0.7 || depth >= 48 {
            nearest_sqrt(pq, s0)
        } else {
            let mid = 0.5 * (p + q);
            let sm = rec(m, p, mid, s0, depth + 1);
            rec(m, mid, q, sm, depth + 1)
        }
    }
    rec(m, p, q, s0, 0)
}

/// The square root of `p_val` on the branch closest to `reference`.
pub(crate) fn nearest_sqrt(p_val: C64, reference: C64) -> C64 {
    let r = p_val.sqrt();
    if (r - reference).norm() <= (r + reference).norm() {
        r
    } else {
        -r
    }
}

/// One straight segment with optional turning-point endpoints.
///
/// Returns `(integral, error_estimate, sqrt_at_q, anchor_used)`.
#[allow(clippy::too_many_arguments)]
fn segment_integral(
    m: &Momentum,
    p: C64,
    q: C64,
    p_is_tp: bool,
    q_is_tp: bool,
    seed: Option<C64>,
    tol_rel: f64,
) -> Result<(C64, f64, C64, BranchAnchor)> {
    // Parameter map u in [0,1] -> t in [0,1] that kills sqrt kinks at
    // whichever endpoints are turning points.
    let map = |u: f64| -> (f64, f64) {
        match (p_is_tp, q_is_tp) {
            (false, false) => (u, 1.0),
            (true, false) => (u * u, 2.0 * u),
            (false, true) => (1.0 - (1.0 - u) * (1.0 - u), 2.0 * (1.0 - u)),
            (true, true) => (u * u * (3.0 - 2.0 * u), 6.0 * u * (1.0 - u)),
        }
    };
    let dx = q - p;
    let x_of = |u: f64| -> (C64, f64) {
        let (t, dt) = map(u);
        (p + dx * t, dt)
    };

    // Branch lattice: continuous sqrt values on a refinement of [0,1].
    let mut knots: Vec<(f64, C64)> = Vec::with_capacity(96);
    let n0 = 48usize;
    let seed_u = if p_is_tp { 1.0 / n0 as f64 } else { 0.0 };
    let (x_seed, _) = x_of(seed_u);
    let s_seed = match seed {
        Some(s) => nearest_sqrt(m.p(x_seed), s),
        None => m.p(x_seed).sqrt(),
    };
    let anchor = BranchAnchor {
        point: x_seed,
        sqrt_value: s_seed,
    };
    knots.push((seed_u, s_seed));
    let mut s_prev = s_seed;
    let mut u_prev = seed_u;
    for k in 1..=n0 {
        let u = seed_u + (1.0 - seed_u) * k as f64 / n0 as f64;
        let poly = [x_of(u_prev).0, x_of(u).0];
        s_prev = continue_on_segment(m, poly[0], poly[1], s_prev);
        knots.push((u, s_prev));
        u_prev = u;
    }

    // Adaptive Simpson inside each branch-safe cell.
    let f = |u: f64, s_hint: C64| -> (C64, C64) {
        let (x, dt) = x_of(u);
        let s = nearest_sqrt(m.p(x), s_hint);
        (s * dx * dt, s)
    };

    let rough: f64 = knots
        .iter()
        .map(|&(_, s)| s.norm())
        .fold(0.0, f64::max)
        * dx.norm();
    let tol = tol_rel * (1.0 + rough);

    let mut total = C64::new(0.0, 0.0);
    let mut err_total = 0.0;

    // The piece [0, seed_u] at a turning-point start: integrand vanishes like
    // u^2 there; a single Simpson panel against 0 endpoint value is plenty.
    if p_is_tp && seed_u > 0.0 {
        let (f1, s1) = f(seed_u, s_seed);
        let (fm, _) = f(0.5 * seed_u, s1);
        total += seed_u / 6.0 * (4.0 * fm + f1); // f(0) = 0
    }

    for w in knots.windows(2) {
        let (u0, s0) = w[0];
        let (u1, s1) = w[1];
        let (v, e) = simpson(&f, u0, u1, s0, s1, tol / knots.len() as f64, MAX_DEPTH);
        total += v;
        err_total += e;
    }

    let s_end = if q_is_tp {
        // Multiplicity is unknown here; report the continued value at the
        // last lattice point instead of exactly 0.
        knots.last().unwrap().1
    } else {
        knots.last().unwrap().1
    };
    let _ = s_end;
    Ok((total, err_total, knots.last().unwrap().1, anchor))
}

#[allow(clippy::too_many_arguments)]
fn simpson(
    f: &impl Fn(f64, C64) -> (C64, C64),
    a: f64,
    b: f64,
    sa: C64,
    sb: C64,
    tol: f64,
    depth: usize,
) -> (C64, f64) {
    let (fa, _) = f(a, sa);
    let (fb, _) = f(b, sb);
    let sm_hint = 0.5 * (sa + sb);
    let (fm, sm) = f(0.5 * (a + b), sm_hint);
    simpson_rec(f, a, b, fa, fm, fb, sa, sm, sb, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64, C64) -> (C64, C64),
    a: f64,
    b: f64,
    fa: C64,
    fm: C64,
    fb: C64,
    sa: C64,
    sm: C64,
    sb: C64,
    tol: f64,
    depth: usize,
) -> (C64, f64) {
    let h = b - a;
    let whole = h / 6.0 * (fa + 4.0 * fm + fb);
    let ml = 0.5 * (a + 0.5 * (a + b));
    let mr = 0.5 * (0.5 * (a + b) + b);
    let (fml, sml) = f(ml, 0.5 * (sa + sm));
    let (fmr, smr) = f(mr, 0.5 * (sm + sb));
    let left = h / 12.0 * (fa + 4.0 * fml + fm);
    let right = h / 12.0 * (fm + 4.0 * fmr + fb);
    let delta = (left + right - whole).norm();
    if delta < 15.0 * tol || depth == 0 {
        (left + right + (left + right - whole) / 15.0, delta / 15.0)
    } else {
        let (vl, el) = simpson_rec(
            f,
            a,
            0.5 * (a + b),
            fa,
            fml,
            fm,
            sa,
            sml,
            sm,
            tol * 0.5,
            depth - 1,
        );
        let (vr, er) = simpson_rec(
            f,
            0.5 * (a + b),
            b,
            fm,
            fmr,
            fb,
            sm,
            smr,
            sb,
            tol * 0.5,
            depth - 1,
        );
        (vl + vr, el + er)
    }
}

fn check_clearance(
    m: &Momentum,
    path: &[C64],
    turning: &[C64],
    clearance: f64,
) -> Result<()> {
    let mut obstacles: Vec<C64> = turning.to_vec();
    if !m.params.centrifugal_free() {
        obstacles.push(C64::new(0.0, 0.0));
    }
    match worst_violation(path, &obstacles, m, clearance) {
        None => Ok(()),
        Some((_, obstacle, _)) => Err(Error::PathTooClose {
            from: path[0],
            to: *path.last().unwrap(),
            obstacle,
            clearance,
        }),
    }
}

/// Worst clearance violation over all segments: `(segment index, obstacle,
/// nearest point on segment)`. Obstacles within a knot tolerance of a segment
/// endpoint are skipped for that segment (paths legitimately start and end at
/// turning points).
fn worst_violation(
    path: &[C64],
    obstacles: &[C64],
    m: &Momentum,
    clearance: f64,
) -> Option<(usize, C64, C64)> {
    let endpoint_tol = 1e-7 * (1.0 + m.scale());
    let mut worst: Option<(f64, usize, C64, C64)> = None;
    for (k, w) in path.windows(2).enumerate() {
        let (p, q) = (w[0], w[1]);
        for &o in obstacles {
            if (o - p).norm() < endpoint_tol || (o - q).norm() < endpoint_tol {
                continue;
            }
            let (d, foot) = dist_point_segment(o, p, q);
            if d < clearance {
                match worst {
                    Some((dw, ..)) if dw <= d => {}
                    _ => worst = Some((d, k, o, foot)),
                }
            }
        }
    }
    worst.map(|(_, k, o, f)| (k, o, f))
}

fn dist_point_segment(o: C64, p: C64, q: C64) -> (f64, C64) {
    let d = q - p;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return ((o - p).norm(), p);
    }
    let t = (((o - p) * d.conj()).re / len2).clamp(0.0, 1.0);
    let foot = p + d * t;
    ((o - foot).norm(), foot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::ProblemParams;

    fn momentum(alpha: f64, l: f64, e: f64) -> Momentum {
        Momentum::new(ProblemParams::new(alpha, l), C64::new(e, 0.0))
    }

    #[test]
    fn zero_for_coincident_endpoints() {
        let m = momentum(3.0, 0.5, 1.0);
        let a = C64::new(2.0, 1.0);
        let v = action_integral(&m, a, a, &[], SqrtAnchor::Principal).unwrap();
        assert!(v.value.norm() < 1e-14);
    }

    #[test]
    fn antisymmetry_with_shared_branch() {
        let m = momentum(3.0, 0.5, 1.0);
        let a = C64::new(1.9, 0.8);
        let b = C64::new(0.4, 1.7);
        let fwd = action_integral(&m, a, b, &[], SqrtAnchor::Principal).unwrap();
        let back =
            action_integral(&m, b, a, &[], SqrtAnchor::AtEnd(fwd.anchor.sqrt_value)).unwrap();
        assert!(
            (fwd.value + back.value).norm() < 1e-9 * (1.0 + fwd.value.norm()),
            "omega(a,b) = {}, omega(b,a) = {}",
            fwd.value,
            back.value
        );
    }

    #[test]
    fn known_integral_real_segment() {
        // alpha = 0, l = 0, E = 1 on [0, 1]: int_0^1 sqrt(1 - t^6) dt, checked
        // against a plain real-axis Simpson rule with the endpoint kink
        // removed by t = 1 - (1 - u)^2.
        let m = momentum(0.0, 0.0, 1.0);
        let v = action_integral(
            &m,
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            &[],
            SqrtAnchor::Principal,
        )
        .unwrap();
        let g = |u: f64| {
            let t = 1.0 - (1.0 - u) * (1.0 - u);
            (1.0 - t.powi(6)).max(0.0).sqrt() * 2.0 * (1.0 - u)
        };
        let n = 20_000;
        let h = 1.0 / n as f64;
        let mut expect = g(0.0) + g(1.0);
        for k in 1..n {
            expect += g(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        expect *= h / 3.0;
        assert!(
            (v.value.re - expect).abs() < 1e-9,
            "got {} want {}",
            v.value.re,
            expect
        );
        assert!(v.value.im.abs() < 1e-10);
    }

    #[test]
    fn path_independence_homotopic() {
        let m = momentum(3.0, 0.5, 1.0);
        let a = C64::new(2.2, 0.4);
        let b = C64::new(-0.3, 2.2);
        let direct = action_integral(&m, a, b, &[C64::new(1.4, 1.7)], SqrtAnchor::Principal)
            .unwrap();
        let detour = action_integral(
            &m,
            a,
            b,
            &[C64::new(2.4, 1.8), C64::new(1.0, 2.6)],
            SqrtAnchor::AtStart(direct.anchor.sqrt_value),
        )
        .unwrap();
        assert!(
            (direct.value - detour.value).norm() < 1e-9 * (1.0 + direct.value.norm()),
            "direct {} detour {}",
            direct.value,
            detour.value
        );
    }

    #[test]
    fn clearance_error_without_hint() {
        let m = momentum(3.0, 0.5, 1.0);
        // A path straight through the origin (singular for l = 0.5).
        let r = action_integral(
            &m,
            C64::new(-1.0, -1.0),
            C64::new(1.0, 1.0),
            &[],
            SqrtAnchor::Principal,
        );
        assert!(matches!(r, Err(Error::PathTooClose { .. })));
    }

    #[test]
    fn monodromy_around_turning_points() {
        let m = momentum(3.0, 0.5, 1.0);
        let tps = turning_points(&m.params, m.energy);
        // Loop around exactly one simple turning point: determination flips.
        let tp = tps.points[0];
        let r = 0.3 * (1.0 + m.scale()) * 0.2;
        let n = 64;
        let mut loop_pts: Vec<C64> = (0..=n)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                tp + C64::from_polar(r, th)
            })
            .collect();
        loop_pts.push(loop_pts[0]);
        let seed = m.p(loop_pts[0]).sqrt();
        let after = continue_sqrt_along(&m, &loop_pts, seed);
        assert!(
            (after + seed).norm() < 1e-6 * (1.0 + seed.norm()),
            "expected sign flip: seed {seed}, after {after}"
        );

        // Loop enclosing no turning point: determination returns.
        let base = C64::new(0.9, 0.9);
        let mut far: Vec<C64> = (0..=n)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                base + C64::from_polar(0.05, th)
            })
            .collect();
        far.push(far[0]);
        let seed2 = m.p(far[0]).sqrt();
        let after2 = continue_sqrt_along(&m, &far, seed2);
        assert!((after2 - seed2).norm() < 1e-8 * (1.0 + seed2.norm()));
    }
}
