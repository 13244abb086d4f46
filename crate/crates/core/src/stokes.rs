//! Stokes geometry: lines of constant `Re` or `Im` of the running action
//! integral, traced from each turning point, and their assembly into a graph.
//!
//! Conventions for the large-|x| structure of `P ~ -x^6`: growth/decay of the
//! WKB exponentials is governed by `Re(x^4)`, giving eight sectors of width
//! pi/4. Sector `S_k` is centred on `arg x = -pi/2 + k pi/4`, so the
//! quantisation contour ends in `S_(-1)` (centre `-3pi/4`) and `S_1` (centre
//! `-pi/4`). Stokes lines escape along sector centres, anti-Stokes lines
//! along sector boundaries.

use crate::error::{Error, Result};
use crate::potential::{Momentum, ProblemParams};
use crate::quad::nearest_sqrt;
use crate::turning::{turning_points, TurningPointSet};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineKind {
    /// `Re int P^(1/2) = 0`: one solution maximally dominant; crossing one
    /// changes the subdominant coefficient.
    Stokes,
    /// `Im int P^(1/2) = 0`: both solutions oscillatory; crossing one
    /// exchanges dominance.
    AntiStokes,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Terminus {
    /// Escaped to `|x| = infinity` inside the given sector.
    Sector { index: i8, angle: f64 },
    /// Flowed into another turning point (index into the turning-point set).
    TurningPoint(usize),
    /// Flowed into the centrifugal singularity at `x = 0`.
    OriginSingularity,
}

/// A traced Stokes or anti-Stokes line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StokesLine {
    pub origin: usize,
    pub kind: LineKind,
    pub emission_angle: f64,
    pub points: Vec<C64>,
    pub terminus: Terminus,
    pub asymptotic_angle: Option<f64>,
    /// Stokes multiplier attached to lines of kind `Stokes`: `i` from a
    /// simple turning point, `sqrt(2) i` from a double zero.
    pub multiplier: Option<C64>,
}

/// The full traced geometry at one `(alpha, l, E)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StokesGraph {
    pub params: ProblemParams,
    pub energy: C64,
    pub turning_points: TurningPointSet,
    pub lines: Vec<StokesLine>,
    pub sector_count: usize,
    /// Pairs of turning points joined by an anti-Stokes line.
    pub anti_stokes_links: Vec<(usize, usize)>,
    /// Escape radius used while tracing; the reference circle for crossing
    /// order lives just outside it.
    pub escape_radius: f64,
}

/// Topological summary used to compare configurations across energies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    line_codes: Vec<(u8, i8)>,
    multiplicities: Vec<usize>,
    link_count: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct TraceConfig {
    pub escape_radius: f64,
    pub capture_radius: f64,
    pub seed_offset: f64,
    pub step_rel: f64,
    pub max_steps: usize,
    pub level_tol: f64,
}

impl TraceConfig {
    pub fn for_structure(m: &Momentum, set: &TurningPointSet) -> Self {
        let scale = m.scale().max(set.max_radius());
        let escape = 2.0 * (1.0 + set.max_radius());
        Self {
            escape_radius: escape,
            capture_radius: 1e-4 * (1.0 + scale),
            seed_offset: 1e-3 * (1.0 + scale),
            step_rel: 0.08,
            max_steps: 60_000,
            level_tol: 1e-9,
        }
    }
}

/// Multiplier for a Stokes line from a turning point of the given
/// multiplicity (first-order theory): `i` for simple, `sqrt(2) i` for double.
pub fn stokes_multiplier(multiplicity: usize) -> C64 {
    match multiplicity {
        1 => C64::new(0.0, 1.0),
        2 => C64::new(0.0, std::f64::consts::SQRT_2),
        m => C64::new(0.0, (m as f64).sqrt()), // not used for m > 2
    }
}

/// Sector index from an asymptotic angle: `S_k` is centred on
/// `-pi/2 + k pi/4`; indices are normalized to `-2 ..= 5`.
pub fn sector_of_angle(theta: f64) -> i8 {
    let k = ((theta + PI / 2.0) / (PI / 4.0)).round() as i64;
    (((k + 2).rem_euclid(8)) - 2) as i8
}

/// Centre angle of sector `k`.
pub fn sector_center(k: i8) -> f64 {
    wrap_angle(-PI / 2.0 + k as f64 * PI / 4.0)
}

pub(crate) fn wrap_angle(t: f64) -> f64 {
    let mut a = t.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Emission directions of lines of the given kind from a turning point of
/// multiplicity `m`: the local model `P ~ C (x - x0)^m` gives `m + 2`
/// directions of each kind, alternating in angle.
pub fn emission_angles(m: &Momentum, x0: C64, multiplicity: usize, kind: LineKind) -> Vec<f64> {
    let c = match multiplicity {
        1 => m.dp(x0),
        2 => 0.5 * m.d2p(x0),
        n => {
            // Central finite difference of order n as a fallback; turning
            // points of multiplicity > 2 do not occur for this potential.
            let h = 1e-4 * (1.0 + x0.norm());
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..=n {
                let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
                let binom = (0..n).fold(1.0, |b, j| b * (n - j) as f64 / (j + 1) as f64);
                let _ = binom;
                acc += sign * choose(n, k) * m.p(x0 + (k as f64 - n as f64 / 2.0) * h);
            }
            acc / h.powi(n as i32)
        }
    };
    let phi = c.arg();
    let q = (multiplicity + 2) as f64;
    let mut out = Vec::with_capacity(multiplicity + 2);
    for k in 0..(multiplicity + 2) {
        let theta = match kind {
            LineKind::AntiStokes => (2.0 * k as f64 * PI - phi) / q,
            LineKind::Stokes => ((2.0 * k as f64 + 1.0) * PI - phi) / q,
        };
        out.push(wrap_angle(theta));
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

fn choose(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Trace a single line. The public wrapper recomputes the turning-point set;
/// [`build_graph`] uses the internal variant to share it.
pub fn trace_line(
    params: &ProblemParams,
    energy: C64,
    origin: usize,
    kind: LineKind,
    initial_direction: f64,
) -> Result<StokesLine> {
    let set = turning_points(params, energy);
    let m = Momentum::new(*params, energy);
    let cfg = TraceConfig::for_structure(&m, &set);
    trace_line_with(&m, &set, origin, kind, initial_direction, &cfg)
}

pub(crate) fn trace_line_with(
    m: &Momentum,
    set: &TurningPointSet,
    origin: usize,
    kind: LineKind,
    direction: f64,
    cfg: &TraceConfig,
) -> Result<StokesLine> {
    let x0 = set.points[origin];
    let mult = set.multiplicities[origin];
    let singular_origin = !m.params.centrifugal_free();

    // Seed just off the turning point along the emission direction, far
    // enough that the local sqrt is resolvable, but never a sizable fraction
    // of the gap to the nearest other structure.
    let mut min_other = f64::INFINITY;
    for (j, &p) in set.points.iter().enumerate() {
        if j != origin {
            min_other = min_other.min((p - x0).norm());
        }
    }
    if singular_origin {
        min_other = min_other.min(x0.norm());
    }
    let eps = cfg.seed_offset.min(0.1 * min_other).max(1e-12);

    let dir0 = C64::from_polar(1.0, direction);
    let mut x = x0 + eps * dir0;

    // Local model: w(x) ~ sqrt(C) * 2/(m+2) * (x - x0)^((m+2)/2); numerically
    // w_seed = s(x_seed) * (x_seed - x0) * 2/(m+2). Pick the sqrt sign whose
    // marching direction points outward.
    let p_seed = m.p(x);
    let mut s = p_seed.sqrt();
    let rot = match kind {
        LineKind::AntiStokes => C64::new(1.0, 0.0),
        LineKind::Stokes => C64::new(0.0, 1.0),
    };
    let march;
    {
        // four candidates: sqrt sign x march sign
        let mut best = (f64::INFINITY, s, 1.0);
        for &ssign in &[1.0, -1.0] {
            for &msign in &[1.0, -1.0] {
                let sv = ssign * s;
                let d = msign * rot * sv.conj() / sv.norm();
                let score = (d - dir0).norm();
                if score < best.0 {
                    best = (score, sv, msign);
                }
            }
        }
        s = best.1;
        march = best.2;
    }
    let mut w = s * (x - x0) * (2.0 / (mult as f64 + 2.0));
    // The defining functional should vanish along the line; absorb the tiny
    // seed offset as the level target.
    let target = defining(kind, w);

    let mut points = vec![x0, x];
    let mut steps = 0usize;
    let escape2 = cfg.escape_radius * 1.25;

    loop {
        steps += 1;
        if steps > cfg.max_steps {
            return Err(Error::TruncatedLine {
                origin,
                steps,
                radius: x.norm(),
            });
        }

        // Distances to obstacles control the step.
        let mut d_min = f64::INFINITY;
        let mut nearest_tp = usize::MAX;
        for (j, &p) in set.points.iter().enumerate() {
            let d = (x - p).norm();
            if d < d_min {
                d_min = d;
                nearest_tp = j;
            }
        }
        let d_origin = x.norm();
        if singular_origin {
            d_min = d_min.min(d_origin);
        }

        // Termination checks (skip self-capture until we have left the seed
        // neighbourhood).
        let travelled = steps > 8;
        if travelled && nearest_tp != usize::MAX && (x - set.points[nearest_tp]).norm() < cfg.capture_radius
            && !(nearest_tp == origin && steps < 32)
        {
            points.push(set.points[nearest_tp]);
            return Ok(finish(
                origin,
                kind,
                direction,
                points,
                Terminus::TurningPoint(nearest_tp),
                mult,
            ));
        }
        if singular_origin && d_origin < cfg.capture_radius.max(1e-3 * (1.0 + m.scale()) * 0.1) {
            points.push(C64::new(0.0, 0.0));
            return Ok(finish(
                origin,
                kind,
                direction,
                points,
                Terminus::OriginSingularity,
                mult,
            ));
        }
        if x.norm() > escape2 {
            let angle = x.arg();
            return Ok(finish(
                origin,
                kind,
                direction,
                points,
                Terminus::Sector {
                    index: sector_of_angle(angle),
                    angle,
                },
                mult,
            ));
        }

        let h = (cfg.step_rel * d_min).min(cfg.step_rel * 2.0 * (1.0 + m.scale()));

        // RK4 predictor on the unit direction field.
        let f_dir = |xp: C64, s_hint: C64| -> (C64, C64) {
            let sv = nearest_sqrt(m.p(xp), s_hint);
            (march * rot * sv.conj() / sv.norm().max(1e-300), sv)
        };
        let (k1, s1) = f_dir(x, s);
        let (k2, s2) = f_dir(x + 0.5 * h * k1, s1);
        let (k3, s3) = f_dir(x + 0.5 * h * k2, s2);
        let (k4, s4) = f_dir(x + h * k3, s3);
        let _ = s4;
        let mut x_new = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        // Running integral increment via Simpson on the chord.
        let s_mid = nearest_sqrt(m.p(0.5 * (x + x_new)), s);
        let mut s_new = nearest_sqrt(m.p(x_new), s_mid);
        let mut dw = (x_new - x) / 6.0 * (s + 4.0 * s_mid + s_new);
        let mut w_new = w + dw;

        // Corrector: project back onto the level set.
        let mut ok = false;
        for _ in 0..4 {
            let err = defining(kind, w_new) - target;
            let wscale = 1.0 + w_new.norm();
            if err.abs() <= cfg.level_tol * wscale {
                ok = true;
                break;
            }
            // delta w must cancel the defining part without moving along it.
            let dwc = match kind {
                LineKind::AntiStokes => C64::new(0.0, -err),
                LineKind::Stokes => C64::new(-err, 0.0),
            };
            let dx = dwc / s_new;
            x_new += dx;
            let s_corr = nearest_sqrt(m.p(x_new), s_new);
            dw += 0.5 * (s_new + s_corr) * dx;
            s_new = s_corr;
            w_new = w + dw;
        }
        if !ok {
            let err = (defining(kind, w_new) - target).abs();
            if err > 1e-4 * (1.0 + w_new.norm()) {
                return Err(Error::DegenerateTracing { origin, at: x_new });
            }
        }

        x = x_new;
        s = s_new;
        w = w_new;
        points.push(x);
    }
}

fn defining(kind: LineKind, w: C64) -> f64 {
    match kind {
        LineKind::Stokes => w.re,
        LineKind::AntiStokes => w.im,
    }
}

fn finish(
    origin: usize,
    kind: LineKind,
    emission_angle: f64,
    points: Vec<C64>,
    terminus: Terminus,
    multiplicity: usize,
) -> StokesLine {
    let asymptotic_angle = match terminus {
        Terminus::Sector { angle, .. } => Some(angle),
        _ => None,
    };
    StokesLine {
        origin,
        kind,
        emission_angle,
        points,
        terminus,
        asymptotic_angle,
        multiplier: match kind {
            LineKind::Stokes => Some(stokes_multiplier(multiplicity)),
            LineKind::AntiStokes => None,
        },
    }
}

/// Trace every emitted line from every turning point and assemble the graph.
/// Output ordering is deterministic: lines sorted by (origin, kind, emission
/// angle).
pub fn build_graph(params: &ProblemParams, energy: C64) -> Result<StokesGraph> {
    let set = turning_points(params, energy);
    let m = Momentum::new(*params, energy);
    let cfg = TraceConfig::for_structure(&m, &set);

    let mut lines: Vec<StokesLine> = Vec::new();
    for (i, (&x0, &mult)) in set.points.iter().zip(&set.multiplicities).enumerate() {
        for kind in [LineKind::Stokes, LineKind::AntiStokes] {
            for theta in emission_angles(&m, x0, mult, kind) {
                let line = trace_line_with(&m, &set, i, kind, theta, &cfg)?;
                lines.push(line);
            }
        }
    }

    lines.sort_by(|a, b| {
        (a.origin, kind_rank(a.kind), a.emission_angle)
            .partial_cmp(&(b.origin, kind_rank(b.kind), b.emission_angle))
            .unwrap()
    });

    let mut links: Vec<(usize, usize)> = lines
        .iter()
        .filter(|l| l.kind == LineKind::AntiStokes)
        .filter_map(|l| match l.terminus {
            Terminus::TurningPoint(j) if j != l.origin => {
                Some((l.origin.min(j), l.origin.max(j)))
            }
            _ => None,
        })
        .collect();
    links.sort_unstable();
    links.dedup();

    Ok(StokesGraph {
        params: *params,
        energy,
        turning_points: set,
        lines,
        sector_count: 8,
        anti_stokes_links: links,
        escape_radius: cfg.escape_radius,
    })
}

fn kind_rank(k: LineKind) -> u8 {
    match k {
        LineKind::Stokes => 0,
        LineKind::AntiStokes => 1,
    }
}

impl StokesGraph {
    pub fn fingerprint(&self) -> Fingerprint {
        let mut line_codes: Vec<(u8, i8)> = self
            .lines
            .iter()
            .map(|l| {
                let code = match l.terminus {
                    Terminus::Sector { index, .. } => index,
                    Terminus::TurningPoint(_) => 50,
                    Terminus::OriginSingularity => 60,
                };
                (kind_rank(l.kind), code)
            })
            .collect();
        line_codes.sort_unstable();
        let mut multiplicities = self.turning_points.multiplicities.clone();
        multiplicities.sort_unstable();
        Fingerprint {
            line_codes,
            multiplicities,
            link_count: self.anti_stokes_links.len(),
        }
    }
}
