//! Turning points of `P(x) = E - V(x)`.
//!
//! Roots are found for the reduced polynomial in `y = x^2` (a quartic, or a
//! cubic when the centrifugal term vanishes) and then split into `x = +-sqrt(y)`.
//! Solving in `y` halves the degree and makes the `x -> -x` symmetry of the
//! root set exact by construction.

use crate::poly;
use crate::potential::{Momentum, ProblemParams};
use crate::C64;
use serde::{Deserialize, Serialize};

/// Zeros of `P` with multiplicities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TurningPointSet {
    pub points: Vec<C64>,
    pub multiplicities: Vec<usize>,
    /// Set when two distinct clusters sit within ten merge radii of each
    /// other: the configuration is close to degenerate and multiplicity
    /// assignment is ill-conditioned there.
    pub degenerate_warning: bool,
}

impl TurningPointSet {
    pub fn count_with_multiplicity(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Largest |x| over the set.
    pub fn max_radius(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Index of the point nearest to `x`, with its distance.
    pub fn nearest(&self, x: C64) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, &p) in self.points.iter().enumerate() {
            let d = (x - p).norm();
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }
}

/// Relative radius within which roots are merged into a multiple zero.
pub const CLUSTER_RADIUS_REL: f64 = 1e-6;

/// All turning points at the given energy.
///
/// Generic parameters give eight points (four `y` roots, two square roots
/// each); when `l(l+1) = 0` the `x^-2` term vanishes identically and there
/// are six. For real inputs the set is closed under both `x -> -x` and
/// `x -> conj(x)`.
pub fn turning_points(params: &ProblemParams, energy: C64) -> TurningPointSet {
    let m = Momentum::new(*params, energy);
    let y_roots = poly::roots(&m.reduced_poly());

    let mut xs: Vec<C64> = Vec::with_capacity(2 * y_roots.len());
    for &y in &y_roots {
        let s = y.sqrt(); // principal branch; the pair is symmetric anyway
        xs.push(s);
        xs.push(-s);
    }

    // Newton polish in x against x^2 P(x) (degree 8 with even powers only).
    for x in xs.iter_mut() {
        if x.norm() == 0.0 {
            continue;
        }
        *x = polish_x(&m, *x);
    }

    // Enforce exact +-x pairing after polishing: keep the representative with
    // non-negative real part (ties by imaginary part) and mirror it.
    let n_pairs = xs.len() / 2;
    for k in 0..n_pairs {
        let (a, b) = (xs[2 * k], xs[2 * k + 1]);
        let rep = if (a.re, a.im) >= (0.0, 0.0) { a } else { b };
        xs[2 * k] = rep;
        xs[2 * k + 1] = -rep;
    }

    let scale = m.scale();
    let merge = CLUSTER_RADIUS_REL * (1.0 + scale);
    let (points, multiplicities, degenerate_warning) = poly::cluster(&xs, merge);

    let mut set = TurningPointSet {
        points,
        multiplicities,
        degenerate_warning,
    };
    sort_canonical(&mut set);
    set
}

fn polish_x(m: &Momentum, start: C64) -> C64 {
    // Newton on f(x) = x^2 P(x); df = 2x P + x^2 P'.
    let mut x = start;
    for _ in 0..3 {
        let f = m.x2p(x);
        let df = 2.0 * x * m.p(x) + x * x * m.dp(x);
        if df.norm() < 1e-280 {
            break;
        }
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.norm() < 1e-16 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

/// Deterministic ordering: by angle from the positive real axis, then radius.
fn sort_canonical(set: &mut TurningPointSet) {
    let mut idx: Vec<usize> = (0..set.points.len()).collect();
    idx.sort_by(|&i, &j| {
        let (a, b) = (set.points[i], set.points[j]);
        (a.arg(), a.norm())
            .partial_cmp(&(b.arg(), b.norm()))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    set.points = idx.iter().map(|&i| set.points[i]).collect();
    set.multiplicities = idx.iter().map(|&i| set.multiplicities[i]).collect();
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(alpha: f64, l: f64) -> ProblemParams {
        ProblemParams::new(alpha, l)
    }

    #[test]
    fn pure_sextic_sixth_roots_of_unity() {
        // alpha = 0, l = 0, E = 1: P = 1 - x^6.
        let set = turning_points(&params(0.0, 0.0), C64::new(1.0, 0.0));
        assert_eq!(set.count_with_multiplicity(), 6);
        for &x in &set.points {
            let sixth = x.powu(6);
            assert!((sixth - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
        assert!(set.multiplicities.iter().all(|&m| m == 1));
    }

    #[test]
    fn generic_eight_points_closed_under_symmetries() {
        let set = turning_points(&params(3.0, 0.5), C64::new(1.0, 0.0));
        assert_eq!(set.count_with_multiplicity(), 8);
        for &x in &set.points {
            assert!(
                set.points.iter().any(|&y| (y - x.conj()).norm() < 1e-9),
                "not conjugation closed at {x}"
            );
            assert!(
                set.points.iter().any(|&y| (y + x).norm() < 1e-9),
                "not negation closed at {x}"
            );
        }
    }

    #[test]
    fn residuals_bounded() {
        let cases = [
            (3.0, 0.5, 1.0),
            (-5.0, 0.25, 7.0),
            (3.0, 0.5, -10.0),
            (0.0, 0.0, 30.0),
            (8.0, -0.3, 2.0),
        ];
        for &(a, l, e) in &cases {
            let p = params(a, l);
            let m = Momentum::new(p, C64::new(e, 0.0));
            let set = turning_points(&p, C64::new(e, 0.0));
            let tol = 1e-10
                * (1.0_f64)
                    .max(e.abs())
                    .max(a.abs())
                    .max(p.centrifugal().abs());
            for &x in &set.points {
                assert!(
                    m.x2p(x).norm() <= tol,
                    "residual {} at {x} for ({a},{l},{e})",
                    m.x2p(x).norm()
                );
            }
        }
    }

    #[test]
    fn l_mirror_invariance() {
        let e = C64::new(2.5, 0.0);
        let s1 = turning_points(&params(2.0, 0.7), e);
        let s2 = turning_points(&params(2.0, -1.7), e);
        assert_eq!(s1.points.len(), s2.points.len());
        for (&a, &b) in s1.points.iter().zip(&s2.points) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn double_zero_detected_at_critical_energy() {
        // E' for (alpha = 3, l = 0.5) solves the discriminant condition
        // u^2 - 8u - 16 = 0 with u = E^2, i.e. E' = sqrt(4 + 4 sqrt(2)).
        let e_prime = (4.0 + 4.0 * 2.0_f64.sqrt()).sqrt();
        assert!((e_prime - 3.1075).abs() < 5e-4);
        let set = turning_points(&params(3.0, 0.5), C64::new(e_prime, 0.0));
        assert!(
            set.multiplicities.iter().any(|&m| m == 2),
            "expected a double zero, got {:?}",
            set.multiplicities
        );
        assert_eq!(set.count_with_multiplicity(), 8);
    }

    #[test]
    fn slightly_off_critical_is_simple() {
        let e_prime = (4.0 + 4.0 * 2.0_f64.sqrt()).sqrt();
        let set = turning_points(&params(3.0, 0.5), C64::new(e_prime + 1e-3, 0.0));
        assert!(set.multiplicities.iter().all(|&m| m == 1));
    }
}
