//! Ground-truth eigenvalues by direct integration of the differential
//! equation along a two-ray contour joining the sectors at `arg x = -3pi/4`
//! and `arg x = -pi/4` through a junction below the origin.
//!
//! Each half-line is initialized at large `|x|` with the recessive
//! asymptotic solution (a fourth-order log-derivative expansion, so a
//! moderate start radius suffices) and integrated inward: the wanted
//! solution grows inward, so initialization error is suppressed
//! exponentially. An energy is an eigenvalue exactly when the two halves
//! are proportional at the junction, i.e. their Wronskian vanishes.

use crate::error::{Error, Result};
use crate::potential::{Momentum, ProblemParams};
use crate::search::{bisect, sign_changes};
use crate::spectrum::{ComplexPair, Degeneracy, Eigenvalue, Source, SpectrumResult};
use crate::turning::turning_points;
use crate::C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One ray of the shooting contour: `x(t) = anchor + t e^{i angle}`, `t >= 0`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Ray {
    pub anchor: C64,
    pub angle: f64,
}

/// The two-ray wedge contour.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShootingContour {
    pub left_ray: Ray,
    pub right_ray: Ray,
    pub junction: C64,
    pub start_radius: f64,
}

impl ShootingContour {
    /// A contour for a whole energy window: junction on the negative
    /// imaginary axis, rays along the sector centres.
    ///
    /// The junction must stay shallow: along a ray anchored near the origin
    /// the recessive solution grows monotonically inward, so integrating
    /// towards the junction is uniformly stable. A deep junction would let
    /// the ray cross the far-field dominance boundary and the final stretch
    /// would amplify noise by the subdominance gap. Turning points are not
    /// singularities of the equation, so only the centrifugal pole at
    /// `x = 0` (and degenerate step sizes right on a turning point) matter
    /// for the junction choice.
    pub fn for_window(params: &ProblemParams, e_lo: f64, e_hi: f64) -> Self {
        let probes = [e_lo, 0.5 * (e_lo + e_hi), e_hi];
        let mut tps: Vec<C64> = Vec::new();
        let mut max_r: f64 = 1.0;
        for &e in &probes {
            let set = turning_points(params, C64::new(e, 0.0));
            max_r = max_r.max(set.max_radius());
            tps.extend(set.points);
        }
        let mut best = (f64::NEG_INFINITY, 0.45);
        for r in [0.3, 0.45, 0.6, 0.8] {
            let junction = C64::new(0.0, -r);
            let clearance = tps
                .iter()
                .map(|&t| (t - junction).norm())
                .fold(f64::INFINITY, f64::min);
            if clearance > best.0 {
                best = (clearance, r);
            }
        }
        let junction = C64::new(0.0, -best.1);
        ShootingContour {
            left_ray: Ray {
                anchor: junction,
                angle: -3.0 * PI / 4.0,
            },
            right_ray: Ray {
                anchor: junction,
                angle: -PI / 4.0,
            },
            junction,
            start_radius: (2.2 * max_r).max(8.0),
        }
    }

    pub fn for_params(params: &ProblemParams, e_scale: f64) -> Self {
        Self::for_window(params, 0.0, e_scale.max(1.0))
    }
}


/// Integration settings.
#[derive(Debug, Clone, Copy)]
pub struct OracleSettings {
    pub rtol: f64,
    pub max_steps: usize,
    /// Target relative size of the neglected asymptotic correction at the
    /// start radius.
    pub init_tol: f64,
    /// Real-scan grid density.
    pub points_per_unit: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            max_steps: 2_000_000,
            init_tol: 1e-12,
            points_per_unit: 12.0,
        }
    }
}

/// Solution data carried back to the junction.
#[derive(Debug, Clone, Copy)]
pub struct HalflineSolution {
    pub psi: C64,
    pub dpsi_dx: C64,
    /// Natural log of the positive factor divided out during integration.
    pub log_scale: f64,
    pub steps: usize,
    pub start_radius_used: f64,
}

/// Wronskian match at the junction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MatchResult {
    pub wronskian: C64,
    /// Wronskian divided by the solution magnitudes; zero exactly at an
    /// eigenvalue, bounded away from it otherwise.
    pub normalized: C64,
}

/// Recessive log-derivative `psi'/psi` at `x` on a ray of direction `angle`,
/// from the asymptotic series carried to fourth order, together with an
/// estimate of the first neglected term relative to the leading one.
fn recessive_log_derivative(m: &Momentum, x: C64, angle: f64) -> (C64, f64) {
    let w = m.w_derivs(x);
    let dir = C64::from_polar(1.0, angle);
    let mut s = w[0].sqrt();
    if (s * dir).re < 0.0 {
        s = -s;
    }
    let u1 = -w[1] / (4.0 * w[0]);
    let u1p = -w[2] / (4.0 * w[0]) + w[1] * w[1] / (4.0 * w[0] * w[0]);
    let u1pp = -w[3] / (4.0 * w[0]) + 3.0 * w[1] * w[2] / (4.0 * w[0] * w[0])
        - w[1] * w[1] * w[1] / (2.0 * w[0] * w[0] * w[0]);
    // u0 = -s (recessive); u_{k+1} = -(u_k' + sum u_i u_j)/(2 u0).
    let u2 = (u1p + u1 * u1) / (2.0 * s);
    let sp = w[1] / (2.0 * s);
    let u2p = (u1pp + 2.0 * u1 * u1p) / (2.0 * s) - (u1p + u1 * u1) * sp / (2.0 * s * s);
    let u3 = (u2p + 2.0 * u1 * u2) / (2.0 * s);
    let u = -s + u1 + u2 + u3;
    let next_rel = if u2.norm() > 0.0 {
        (u3.norm() * (u3.norm() / u2.norm())) / s.norm().max(1e-300)
    } else {
        u3.norm() / s.norm().max(1e-300)
    };
    (u, next_rel)
}

/// Development instrumentation: the recessive log-derivative expansion.
#[doc(hidden)]
pub fn debug_recessive_u(m: &Momentum, x: C64, angle: f64) -> C64 {
    recessive_log_derivative(m, x, angle).0
}

/// Integrate one half-line from the asymptotic start point to the junction.
pub fn integrate_halfline(
    params: &ProblemParams,
    energy: C64,
    contour: &ShootingContour,
    left: bool,
    settings: &OracleSettings,
) -> Result<HalflineSolution> {
    let m = Momentum::new(*params, energy);
    let ray = if left { contour.left_ray } else { contour.right_ray };
    let dir = C64::from_polar(1.0, ray.angle);

    // t with |anchor + t dir| = R (outer root).
    let t_for_radius = |r: f64| -> f64 {
        let b = (ray.anchor * dir.conj()).re;
        let c = ray.anchor.norm_sqr() - r * r;
        -b + (b * b - c).max(0.0).sqrt()
    };

    // Grow the start radius until the neglected correction is negligible.
    let mut r_start = contour.start_radius;
    let mut t_start = t_for_radius(r_start);
    let mut x_start = ray.anchor + t_start * dir;
    loop {
        let (_, next_rel) = recessive_log_derivative(&m, x_start, ray.angle);
        if next_rel < settings.init_tol || r_start > 80.0 {
            break;
        }
        r_start *= 1.2;
        t_start = t_for_radius(r_start);
        x_start = ray.anchor + t_start * dir;
    }
    let u = recessive_log_derivative(&m, x_start, ray.angle).0;

    // State y = (psi, dpsi/dt); dpsi/dt = dir * dpsi/dx.
    let mut y = [C64::new(1.0, 0.0), u * dir];
    let mut log_scale = 0.0f64;
    let mut t = t_start;
    let mut h = -1e-3 * (1.0 + r_start) / (1.0 + r_start.powi(3));
    let mut steps = 0usize;

    let f = |t: f64, y: &[C64; 2]| -> [C64; 2] {
        let x = ray.anchor + t * dir;
        let w = {
            let x2 = x * x;
            let x6 = x2 * x2 * x2;
            let mut v = x6 + m.params.alpha * x2;
            let cf = m.params.centrifugal();
            if cf != 0.0 {
                v += cf / x2;
            }
            v - m.energy
        };
        [y[1], w * y[0] * dir * dir]
    };

    while t > 0.0 {
        if steps >= settings.max_steps {
            return Err(Error::OdeStep {
                t,
                reason: format!("step budget exhausted after {steps} steps"),
            });
        }
        if -h > t {
            h = -t;
        }
        let (y_new, err) = dopri5_step(&f, t, &y, h, settings.rtol);
        if err <= 1.0 {
            t += h;
            y = y_new;
            steps += 1;
            // Renormalize by a positive real factor to dodge overflow.
            let mag = y[0].norm().max(y[1].norm());
            if mag > 1e100 {
                y[0] /= mag;
                y[1] /= mag;
                log_scale += mag.ln();
            }
        }
        let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        h *= fac;
        if h.abs() < 1e-15 * (1.0 + t.abs()) {
            let x = ray.anchor + t * dir;
            return Err(Error::ContourClearance {
                at: x,
                radius: x.norm(),
            });
        }
    }

    Ok(HalflineSolution {
        psi: y[0],
        dpsi_dx: y[1] / dir,
        log_scale,
        steps,
        start_radius_used: r_start,
    })
}

/// One embedded Dormand-Prince 5(4) step; returns the 5th-order solution and
/// the scaled error norm.
fn dopri5_step(
    f: &impl Fn(f64, &[C64; 2]) -> [C64; 2],
    t: f64,
    y: &[C64; 2],
    h: f64,
    rtol: f64,
) -> ([C64; 2], f64) {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];

    let mut k: [[C64; 2]; 7] = Default::default();
    k[0] = f(t, y);
    for stage in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = A[stage][j];
            if a != 0.0 {
                ys[0] += h * a * kj[0];
                ys[1] += h * a * kj[1];
            }
        }
        k[stage] = f(t + C[stage] * h, &ys);
    }
    // 5th-order solution is the last stage construction (FSAL row).
    let mut y5 = *y;
    for (j, kj) in k.iter().enumerate().take(6) {
        let a = A[6][j];
        if a != 0.0 {
            y5[0] += h * a * kj[0];
            y5[1] += h * a * kj[1];
        }
    }
    let mut err = [C64::new(0.0, 0.0); 2];
    for (j, kj) in k.iter().enumerate() {
        if E[j] != 0.0 {
            err[0] += h * E[j] * kj[0];
            err[1] += h * E[j] * kj[1];
        }
    }
    let mut norm = 0.0f64;
    for i in 0..2 {
        let sc = 1e-30 + rtol * y[i].norm().max(y5[i].norm());
        let e = err[i].norm() / sc;
        norm += e * e;
    }
    (y5, (norm / 2.0).sqrt().max(1e-16))
}

/// Wronskian of the two half-line solutions at the junction.
pub fn wronskian(
    params: &ProblemParams,
    energy: C64,
    contour: &ShootingContour,
    settings: &OracleSettings,
) -> Result<MatchResult> {
    let lft = integrate_halfline(params, energy, contour, true, settings)?;
    let rgt = integrate_halfline(params, energy, contour, false, settings)?;
    let w = lft.psi * rgt.dpsi_dx - lft.dpsi_dx * rgt.psi;
    let m = Momentum::new(*params, energy);
    let kappa = m.p(contour.junction).norm().sqrt().max(1.0);
    let nl = (lft.psi.norm_sqr() + (lft.dpsi_dx / kappa).norm_sqr()).sqrt();
    let nr = (rgt.psi.norm_sqr() + (rgt.dpsi_dx / kappa).norm_sqr()).sqrt();
    Ok(MatchResult {
        wronskian: w,
        normalized: w / (kappa * nl * nr).max(1e-300),
    })
}

/// An energy window to scan.
#[derive(Debug, Clone, Copy)]
pub enum EnergyWindowSpec {
    Real { lo: f64, hi: f64 },
    ComplexBox { re: (f64, f64), im: (f64, f64) },
}

/// Find eigenvalues in a window. Real windows use a phase-fixed real scan
/// with bracketing and bisection; complex boxes run secant iterations from
/// grid seeds and return conjugate pairs together.
pub fn eigenvalue_scan(
    params: &ProblemParams,
    window: EnergyWindowSpec,
    settings: &OracleSettings,
) -> Result<SpectrumResult> {
    match window {
        EnergyWindowSpec::Real { lo, hi } => real_scan(params, lo, hi, None, settings),
        EnergyWindowSpec::ComplexBox { re, im } => complex_scan(params, re, im, settings),
    }
}

fn real_scan(
    params: &ProblemParams,
    lo: f64,
    hi: f64,
    contour: Option<ShootingContour>,
    settings: &OracleSettings,
) -> Result<SpectrumResult> {
    let mut out = SpectrumResult::default();
    let contour = contour.unwrap_or_else(|| {
        ShootingContour::for_window(params, lo, hi)
    });
    let width = hi - lo;
    let n = ((width * settings.points_per_unit).ceil() as usize).clamp(60, 900);
    let grid: Vec<f64> = (0..=n).map(|k| lo + width * k as f64 / n as f64).collect();
    let ms: Vec<Option<C64>> = grid
        .par_iter()
        .map(|&e| wronskian(params, C64::new(e, 0.0), &contour, settings).ok().map(|r| r.normalized))
        .collect();

    // Fix the overall phase at the first valid point; with a PT-symmetric
    // contour and real energy the normalized Wronskian has constant phase.
    let Some(rho) = ms.iter().flatten().find(|m| m.norm() > 1e-14).map(|m| m / m.norm()) else {
        return Ok(out);
    };
    let pts: Vec<(f64, f64)> = grid
        .iter()
        .zip(&ms)
        .filter_map(|(&e, m)| m.map(|v| (e, (v / rho).re)))
        .collect();
    let vals: Vec<f64> = pts.iter().map(|p| p.1).collect();

    for idx in sign_changes(&vals) {
        let (a, fa) = pts[idx];
        let (b, _) = pts[idx + 1];
        let w_of = |e: f64| {
            wronskian(params, C64::new(e, 0.0), &contour, settings)
                .map(|r| (r.normalized / rho).re)
                .unwrap_or(f64::NAN)
        };
        let root = bisect(w_of, a, fa, b, 1e-10);
        let res = wronskian(params, C64::new(root, 0.0), &contour, settings)
            .map(|r| r.normalized.norm())
            .unwrap_or(f64::NAN);
        out.eigenvalues.push(Eigenvalue {
            value: root,
            window: None,
            residual: res,
            source: Source::Oracle,
        });
    }
    Ok(out)
}

fn complex_scan(
    params: &ProblemParams,
    re: (f64, f64),
    im: (f64, f64),
    settings: &OracleSettings,
) -> Result<SpectrumResult> {
    let mut out = SpectrumResult::default();
    let contour = ShootingContour::for_window(params, re.0, re.1);
    let m_of = |e: C64| -> Option<C64> {
        wronskian(params, e, &contour, settings).ok().map(|r| r.normalized)
    };

    let (n_re, n_im) = (9, 7);
    let mut roots: Vec<C64> = Vec::new();
    let seeds: Vec<C64> = (0..n_re)
        .flat_map(|i| {
            (0..n_im).map(move |j| {
                C64::new(
                    re.0 + (re.1 - re.0) * (i as f64 + 0.5) / n_re as f64,
                    im.0 + (im.1 - im.0) * (j as f64 + 0.5) / n_im as f64,
                )
            })
        })
        .collect();
    let found: Vec<Option<C64>> = seeds
        .par_iter()
        .map(|&seed| {
            // Secant iteration on the normalized Wronskian.
            let mut e0 = seed;
            let mut e1 = seed + C64::new(1e-3 * (1.0 + seed.norm()), 0.0);
            let mut f0 = m_of(e0)?;
            let mut f1 = m_of(e1)?;
            for _ in 0..48 {
                let denom = f1 - f0;
                if denom.norm() < 1e-300 {
                    return None;
                }
                let e2 = e1 - f1 * (e1 - e0) / denom;
                if !e2.re.is_finite() || !e2.im.is_finite() {
                    return None;
                }
                if (e2 - e1).norm() < 1e-11 * (1.0 + e1.norm()) {
                    return Some(e2);
                }
                e0 = e1;
                f0 = f1;
                e1 = e2;
                f1 = m_of(e1)?;
            }
            None
        })
        .collect();
    for r in found.into_iter().flatten() {
        let in_box = r.re > re.0 && r.re < re.1 && r.im > im.0.min(-im.1.abs()) - 1e-9;
        let _ = in_box;
        if r.re >= re.0 && r.re <= re.1 && r.im.abs() <= im.0.abs().max(im.1.abs()) + 1e-9 {
            if !roots.iter().any(|&q| (q - r).norm() < 1e-6 * (1.0 + r.norm())) {
                roots.push(r);
            }
        }
    }
    roots.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());

    for &r in &roots {
        if r.im.abs() < 1e-8 * (1.0 + r.norm()) {
            out.eigenvalues.push(Eigenvalue {
                value: r.re,
                window: None,
                residual: 0.0,
                source: Source::Oracle,
            });
        } else if r.im > 0.0 {
            out.complex_pairs.push(ComplexPair {
                alpha: params.alpha,
                l: params.l,
                re_e: r.re,
                im_e: r.im,
                source: Source::Oracle,
            });
        }
    }
    // Conjugate closure check: every pair member with im < 0 must have its
    // mirror in the list.
    for &r in roots.iter().filter(|r| r.im < -1e-8) {
        if !roots
            .iter()
            .any(|&q| (q - r.conj()).norm() < 1e-6 * (1.0 + r.norm()))
        {
            out.notes.push(format!(
                "complex root {r} found without its conjugate partner"
            ));
        }
    }
    Ok(out)
}

/// Track two adjacent real eigenvalues along a parameter curve and report
/// where they merge and leave the real axis.
pub fn degeneracy_locus<F>(
    curve: F,
    t_range: (f64, f64),
    e_window: (f64, f64),
    t_steps: usize,
    t_tol: f64,
    settings: &OracleSettings,
) -> Result<SpectrumResult>
where
    F: Fn(f64) -> ProblemParams + Sync,
{
    let mut out = SpectrumResult::default();
    let (t0, t1) = t_range;
    let n = t_steps.max(4);

    // Initial full scan to find the closest adjacent pair.
    let p0 = curve(t0);
    let first = real_scan(&p0, e_window.0, e_window.1, None, settings)?;
    let vals = first.sorted_values();
    if vals.len() < 2 {
        return Err(Error::Bracket(format!(
            "need at least two real eigenvalues at sweep start, found {}",
            vals.len()
        )));
    }
    let mut pair_idx = 0;
    let mut best_gap = f64::INFINITY;
    for i in 0..vals.len() - 1 {
        let gap = vals[i + 1] - vals[i];
        if gap < best_gap {
            best_gap = gap;
            pair_idx = i;
        }
    }
    let mut center = 0.5 * (vals[pair_idx] + vals[pair_idx + 1]);
    let mut span = (vals[pair_idx + 1] - vals[pair_idx]) * 2.0 + 0.75;

    // Existence of the tracked pair in a local window.
    let pair_state = |p: &ProblemParams, center: f64, span: f64| -> Option<(usize, f64, f64)> {
        let lo = (center - span).max(e_window.0);
        let hi = (center + span).min(e_window.1);
        let contour = ShootingContour::for_window(p, lo, hi);
        let n = 48;
        let grid: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
        let ms: Vec<Option<C64>> = grid
            .par_iter()
            .map(|&e| wronskian(p, C64::new(e, 0.0), &contour, settings).ok().map(|r| r.normalized))
            .collect();
        let rho = ms.iter().flatten().find(|m| m.norm() > 1e-14)?;
        let rho = rho / rho.norm();
        let vals: Vec<f64> = ms
            .iter()
            .map(|m| m.map(|v| (v / rho).re).unwrap_or(f64::NAN))
            .collect();
        let changes = sign_changes(&vals);
        if changes.is_empty() {
            return Some((0, center, span));
        }
        let roots: Vec<f64> = changes
            .iter()
            .map(|&i| {
                let w_of = |e: f64| {
                    wronskian(p, C64::new(e, 0.0), &contour, settings)
                        .map(|r| (r.normalized / rho).re)
                        .unwrap_or(f64::NAN)
                };
                bisect(w_of, grid[i], vals[i], grid[i + 1], 1e-9)
            })
            .collect();
        if roots.len() >= 2 {
            // The tracked pair is the closest adjacent pair in the window.
            let mut c = center;
            let mut s = span;
            let mut gap = f64::INFINITY;
            for w in roots.windows(2) {
                if w[1] - w[0] < gap {
                    gap = w[1] - w[0];
                    c = 0.5 * (w[0] + w[1]);
                    s = (w[1] - w[0]) * 2.0 + 0.5;
                }
            }
            Some((roots.len(), c, s))
        } else {
            Some((roots.len(), center, span))
        }
    };

    let mut t_last_alive = t0;
    let mut t_dead: Option<f64> = None;
    for k in 1..=n {
        let t = t0 + (t1 - t0) * k as f64 / n as f64;
        let p = curve(t);
        match pair_state(&p, center, span) {
            Some((count, c, s)) if count >= 2 => {
                t_last_alive = t;
                center = c;
                span = s;
            }
            Some((count, ..)) => {
                if count == 1 {
                    out.notes
                        .push(format!("single root near pair at t = {t}; widened tolerance"));
                }
                t_dead = Some(t);
                break;
            }
            None => {
                out.notes.push(format!("wronskian scan failed at t = {t}"));
                t_dead = Some(t);
                break;
            }
        }
    }
    let Some(mut hi) = t_dead else {
        return Err(Error::Bracket(
            "pair never disappeared over the sweep".into(),
        ));
    };
    let mut lo = t_last_alive;

    for _ in 0..60 {
        if (hi - lo).abs() <= t_tol * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let p = curve(mid);
        match pair_state(&p, center, span) {
            Some((count, c, s)) if count >= 2 => {
                lo = mid;
                center = c;
                span = s;
            }
            _ => hi = mid,
        }
    }

    let t_star = 0.5 * (lo + hi);
    let p = curve(t_star);
    out.degeneracies.push(Degeneracy {
        alpha: p.alpha,
        l: p.l,
        energy: center,
        extremum_kind: None,
        source: Source::Oracle,
    });
    Ok(out)
}
