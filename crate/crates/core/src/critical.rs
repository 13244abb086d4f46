//! Critical energies and the organisation of the `(alpha, l)` plane.
//!
//! Two kinds of special energy organise the turning-point structure:
//!
//! * coalescence energies, where two turning points merge into a double zero
//!   (found in closed form: the discriminant of the reduced polynomial is a
//!   quadratic in `E^2`);
//! * alignment energies, where the turning points on the real axis line up
//!   vertically with the off-axis ones (no closed form is available, so they
//!   are located by bracketed bisection on the alignment defect).
//!
//! The map `E -> -E` rotates the turning-point set by `pi/2` (`y -> -y` in
//! `y = x^2`), so only the `E >= 0` side is computed; the negative side is
//! its mirror.

use crate::poly;
use crate::potential::{l_prime, Momentum, ProblemParams};
use crate::stokes::build_graph;
use crate::C64;
use serde::{Deserialize, Serialize};

/// Special energies organising one row of the configuration tables. All
/// values are magnitudes: the structure at `-E` mirrors the one at `+E`.
/// Fields are absent when the corresponding transition does not occur for
/// this `(alpha, l)`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CriticalEnergies {
    /// Coalescence energy (double zero). For rows with two coalescences this
    /// is the outer (larger) one.
    pub e_prime: Option<f64>,
    /// Alignment energy for rows with `l >= 0`.
    pub e_double_prime: Option<f64>,
    /// Alignment energy for the `-1/2 < l < 0` row at `alpha > 0`.
    pub e_triple_prime: Option<f64>,
    /// Inner (smaller) coalescence energy where a second pair of double
    /// zeros forms (`alpha < 0`, `-1/2 < l < 0`).
    pub e_zero: Option<f64>,
    /// Diagnostics for absent fields (failed brackets etc.).
    pub notes: Vec<String>,
}

impl CriticalEnergies {
    /// Ascending positive critical energies for window construction.
    pub fn ascending(&self) -> Vec<f64> {
        let mut v: Vec<f64> = [self.e_zero, self.e_prime, self.e_double_prime, self.e_triple_prime]
            .iter()
            .flatten()
            .copied()
            .filter(|e| *e > 0.0)
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * (1.0 + b.abs()));
        v
    }
}

/// Open regions of the `(alpha, l)` plane (and their boundaries) named by the
/// sequence of turning-point arrangements met as `E` varies. The letters
/// match the region map emitted by the CLI. Everything is symmetric about
/// `l = -1/2`; points below the axis are classified via their mirror.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// `alpha < 0`, `0 < l < l'`.
    E,
    /// `alpha < 0`, `-1/2 <= l < 0`.
    F,
    /// `alpha < 0`, `l > l'`.
    G,
    /// `alpha >= 0`, `l > l'`.
    H,
    /// `alpha >= 0`, `0 < l < l'`.
    I,
    /// `alpha >= 0`, `-1/2 <= l < 0`.
    J,
    BoundaryEF,
    BoundaryEG,
    BoundaryHI,
    BoundaryIJ,
}

impl Region {
    pub fn is_boundary(&self) -> bool {
        matches!(
            self,
            Region::BoundaryEF | Region::BoundaryEG | Region::BoundaryHI | Region::BoundaryIJ
        )
    }
}

/// A classified parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub region: Region,
    /// The spectrum is known to be entirely real here (`alpha < 4 + |2l+1|`).
    pub real_spectrum: bool,
    /// The spectrum is known to be real and positive here
    /// (`alpha < 4 - |2l+1|`).
    pub positive_spectrum: bool,
}

/// One cell of the configuration tables: a region row plus a signed energy
/// column. Column 0 is `E = 0`; odd columns are the open intervals between
/// consecutive critical energies, even columns the critical energies
/// themselves, positive for `E > 0` and mirrored for `E < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigurationId {
    pub region: Region,
    pub column: i8,
}

impl std::fmt::Display for ConfigurationId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}/{}", self.region, self.column)
    }
}

const L_TOL: f64 = 1e-12;

/// Classify `(alpha, l)` into a region of the parameter plane by sign tests
/// on `alpha`, `l` and `l - l'(alpha)`, after folding `l < -1/2` through the
/// mirror `l -> -1 - l`.
pub fn classify_region(params: &ProblemParams) -> RegionLabel {
    let alpha = params.alpha;
    let l = if params.l < -0.5 { -1.0 - params.l } else { params.l };
    let lp = l_prime(alpha);
    let tol = L_TOL * (1.0 + l.abs().max(lp.abs()));

    let region = if alpha >= 0.0 {
        if (l - lp).abs() <= tol && lp > tol {
            Region::BoundaryHI
        } else if l.abs() <= tol {
            // At alpha = 0, l' = 0: the two boundaries coincide; report IJ.
            Region::BoundaryIJ
        } else if l > lp {
            Region::H
        } else if l > 0.0 {
            Region::I
        } else {
            Region::J
        }
    } else if (l - lp).abs() <= tol {
        Region::BoundaryEG
    } else if l.abs() <= tol {
        Region::BoundaryEF
    } else if l > lp {
        Region::G
    } else if l > 0.0 {
        Region::E
    } else {
        Region::F
    };

    let t = 2.0 * params.l + 1.0;
    RegionLabel {
        region,
        real_spectrum: alpha < 4.0 + t.abs(),
        positive_spectrum: alpha < 4.0 - t.abs(),
    }
}

/// Positive energies at which the reduced polynomial acquires a repeated
/// root away from `y = 0` (turning points coalesce into a double zero).
/// Ascending; may be empty; may contain `0` exactly on the `l = l'` line for
/// `alpha < 0`.
fn coalescence_energies(params: &ProblemParams) -> Vec<f64> {
    let a = params.alpha;
    let lam = params.centrifugal();
    let mut out = Vec::new();
    if params.centrifugal_free() {
        // Cubic y^3 + a y - E: discriminant -4a^3 - 27E^2.
        if a < 0.0 {
            out.push((-4.0 * a * a * a / 27.0).sqrt());
        }
        return out;
    }
    // Quartic y^4 + a y^2 - E y + lam: discriminant is even in E,
    //   disc(E) = -27 u^2 + c2 u + c0 with u = E^2.
    let c2 = 4.0 * a * (36.0 * lam - a * a);
    let c0 = 16.0 * lam * (4.0 * lam - a * a).powi(2);
    let disc = c2 * c2 + 108.0 * c0;
    if disc < 0.0 {
        return out;
    }
    let sq = disc.sqrt();
    for u in [(c2 - sq) / 54.0, (c2 + sq) / 54.0] {
        if u >= -1e-14 * (1.0 + c2.abs()) {
            out.push(u.max(0.0).sqrt());
        }
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out.dedup_by(|x, y| (*x - *y).abs() < 1e-12 * (1.0 + y.abs()));
    out
}

/// Split the `y` roots at a real energy into the values relevant for the
/// alignment predicate: positive real roots give turning points on the real
/// axis at `sqrt(y)`; complex roots give off-axis quadruples with
/// `|Re x| = Re sqrt(y)`.
fn root_classes(params: &ProblemParams, e: f64) -> (Vec<f64>, Vec<f64>) {
    let m = Momentum::new(*params, C64::new(e, 0.0));
    let ys = poly::roots(&m.reduced_poly());
    let mut reals = Vec::new();
    let mut quad_re = Vec::new();
    for y in ys {
        let tol = 1e-9 * (1.0 + y.norm());
        if y.im.abs() <= tol {
            if y.re > tol {
                reals.push(y.re.sqrt());
            }
            // negative real y: turning points on the imaginary axis, never
            // part of a real-part alignment
        } else if y.im > 0.0 {
            quad_re.push(y.sqrt().re);
        }
    }
    reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    quad_re.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (reals, quad_re)
}

/// Alignment defects: differences between real-axis turning points and the
/// real parts of the off-axis quadruple. `None` when the classes are absent.
fn alignment_defects(params: &ProblemParams, e: f64) -> Vec<Option<f64>> {
    let (reals, quads) = root_classes(params, e);
    let Some(&q) = quads.last() else {
        return vec![None, None];
    };
    let outer = reals.last().map(|&r| r - q);
    let inner = if reals.len() >= 2 {
        reals.first().map(|&r| r - q)
    } else {
        None
    };
    vec![outer, inner]
}

/// First `E > start` where any alignment defect changes sign; bisected to
/// `1e-9` relative.
fn alignment_energy(params: &ProblemParams, start: f64, notes: &mut Vec<String>) -> Option<f64> {
    let scale = 1.0 + start.abs();
    let eps = 1e-6 * scale;
    let mut lo = start + eps;
    let d0 = alignment_defects(params, lo);
    // Coincidence right at the start: when the freshly split real pair
    // straddles the off-axis real part, the alignment happened exactly at
    // the coalescence (the l = l' configuration).
    if let (Some(outer), Some(inner)) = (d0[0], d0[1]) {
        if outer.signum() != inner.signum() {
            return Some(start);
        }
    }
    if d0.iter().flatten().any(|d| d.abs() < 1e-9 * scale) {
        return Some(start);
    }
    let mut prev = d0;
    let mut e = lo;
    let cap = 1e6;
    let mut hit: Option<(usize, f64, f64)> = None;
    while e < cap {
        let next = (e * 1.18).max(e + 0.05 * scale);
        let cur = alignment_defects(params, next);
        for k in 0..2 {
            if let (Some(a), Some(b)) = (prev[k], cur[k]) {
                if a.signum() != b.signum() {
                    hit = Some((k, e, next));
                    break;
                }
            }
        }
        if hit.is_some() {
            break;
        }
        prev = cur;
        lo = e;
        e = next;
    }
    let _ = lo;
    let (k, mut a, mut b) = match hit {
        Some(h) => h,
        None => {
            notes.push(format!(
                "no alignment bracket above E = {start:.6} (scanned to {cap:.0})"
            ));
            return None;
        }
    };
    let fa = alignment_defects(params, a)[k]?;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= 1e-9 * (1.0 + mid.abs()) {
            return Some(mid);
        }
        match alignment_defects(params, mid)[k] {
            Some(fm) => {
                if fm.signum() == fa.signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            None => {
                notes.push("alignment class vanished during bisection".into());
                return None;
            }
        }
    }
    Some(0.5 * (a + b))
}

/// The critical energies organising the row of the configuration tables that
/// `(alpha, l)` selects.
pub fn critical_energies(params: &ProblemParams) -> CriticalEnergies {
    let label = classify_region(params);
    let mut out = CriticalEnergies::default();
    let coal = coalescence_energies(params);

    match label.region {
        Region::I | Region::H | Region::E | Region::G | Region::BoundaryHI | Region::BoundaryEG => {
            // One coalescence (possibly at E = 0 exactly on l = l', alpha<0),
            // then an alignment above it.
            out.e_prime = coal.last().copied();
            match out.e_prime {
                Some(ep) => {
                    out.e_double_prime = alignment_energy(params, ep, &mut out.notes);
                }
                None => out
                    .notes
                    .push("no coalescence energy found for an l > 0 row".into()),
            }
        }
        Region::BoundaryIJ => {
            if params.alpha >= 0.0 {
                out.e_double_prime = alignment_energy(params, 0.0, &mut out.notes);
            }
        }
        Region::BoundaryEF => {
            out.e_prime = coal.last().copied();
        }
        Region::F => {
            match coal.len() {
                2 => {
                    out.e_zero = Some(coal[0]);
                    out.e_prime = Some(coal[1]);
                }
                1 => out.e_prime = Some(coal[0]),
                _ => out.notes.push(format!(
                    "expected two coalescence energies in region F, found {}",
                    coal.len()
                )),
            }
        }
        Region::J => {
            out.e_triple_prime = alignment_energy(params, 0.0, &mut out.notes);
        }
    }
    out
}

/// Tolerance for deciding that an energy sits on a critical value.
pub const ENERGY_BOUNDARY_TOL: f64 = 1e-9;

/// Relative width of the band above an alignment energy inside which the
/// column assignment defers to the Stokes-graph topology (the structural
/// change lags the alignment energy).
const DEFERRAL_BAND_REL: f64 = 0.08;

/// The table cell for `(alpha, l, E)`: region row plus signed energy column.
///
/// Just above the alignment energy the turning points have already lined up
/// but the Stokes topology has not yet switched; inside a band above it the
/// column is therefore decided by comparing graph fingerprints rather than
/// by the energy comparison alone.
pub fn classify_configuration(params: &ProblemParams, energy: f64) -> ConfigurationId {
    let label = classify_region(params);
    let crit = critical_energies(params);
    let cs = crit.ascending();
    let tol = ENERGY_BOUNDARY_TOL * (1.0 + energy.abs());

    let column_raw = column_for(&cs, energy, tol);

    // Deferral band applies just above the top critical energy (the
    // alignment one) on either sign side.
    let align = crit.e_double_prime.or(crit.e_triple_prime);
    if let Some(c) = align {
        if cs.last().map(|&top| (top - c).abs() < 1e-9 * (1.0 + c)) == Some(true) {
            let band = DEFERRAL_BAND_REL * (1.0 + c);
            let above = energy.abs() - c;
            if above > tol && above < band {
                let below_ref = pick_probe(&cs, cs.len() as i8 * 2 - 1, energy.signum());
                let fp_here = build_graph(params, C64::new(energy, 0.0)).map(|g| g.fingerprint());
                let fp_below =
                    build_graph(params, C64::new(below_ref, 0.0)).map(|g| g.fingerprint());
                if let (Ok(a), Ok(b)) = (fp_here, fp_below) {
                    if a == b {
                        // Still the pre-alignment topology.
                        let inner = (cs.len() as i8) * 2 - 1;
                        return ConfigurationId {
                            region: label.region,
                            column: inner * energy.signum() as i8,
                        };
                    }
                }
            }
        }
    }

    ConfigurationId {
        region: label.region,
        column: column_raw,
    }
}

fn column_for(cs: &[f64], energy: f64, tol: f64) -> i8 {
    if energy.abs() <= tol {
        return 0;
    }
    let sign = if energy > 0.0 { 1i8 } else { -1i8 };
    let e = energy.abs();
    let mut below = 0i8;
    for (i, &c) in cs.iter().enumerate() {
        if (e - c).abs() <= tol.max(ENERGY_BOUNDARY_TOL * (1.0 + c)) {
            return sign * (2 * (i as i8 + 1));
        }
        if e > c {
            below = i as i8 + 1;
        }
    }
    sign * (2 * below + 1)
}

/// A probe energy inside the (signed) column `col` given the ascending
/// critical list.
pub(crate) fn pick_probe(cs: &[f64], col: i8, sign: f64) -> f64 {
    let k = col.unsigned_abs() as usize; // odd: interval index 2j+1
    let j = (k - 1) / 2;
    let lo = if j == 0 { 0.0 } else { cs[j - 1] };
    let hi = cs.get(j).copied();
    let e = match hi {
        Some(h) => 0.5 * (lo + h),
        None => lo + 1.0 + 0.5 * lo,
    };
    e * sign.signum()
}
