//! The potential `V(x) = x^6 + alpha x^2 + l(l+1)/x^2` and the momentum
//! function `P(x) = E - V(x)`.

use crate::C64;
use serde::{Deserialize, Serialize};

/// A point of the `(alpha, l)` parameter plane together with its affine
/// recoordinatization
///
/// ```text
///     alpha_pm = (alpha - 4 +- (2l + 1)) / 8 .
/// ```
///
/// The problem depends on `l` only through `l(l+1)`, so everything is
/// invariant under the mirror `l -> -1 - l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub alpha: f64,
    pub l: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
}

impl ProblemParams {
    pub fn new(alpha: f64, l: f64) -> Self {
        let alpha_plus = (alpha - 4.0 + (2.0 * l + 1.0)) / 8.0;
        let alpha_minus = (alpha - 4.0 - (2.0 * l + 1.0)) / 8.0;
        Self {
            alpha,
            l,
            alpha_plus,
            alpha_minus,
        }
    }

    /// Inverse of the `alpha_pm` map:
    /// `alpha = 4(1 + a+ + a-)`, `l = [4(a+ - a-) - 1]/2`.
    pub fn from_alpha_pm(alpha_plus: f64, alpha_minus: f64) -> Self {
        let alpha = 4.0 * (1.0 + alpha_plus + alpha_minus);
        let l = (4.0 * (alpha_plus - alpha_minus) - 1.0) / 2.0;
        Self::new(alpha, l)
    }

    /// The centrifugal strength `l(l+1)`.
    pub fn centrifugal(&self) -> f64 {
        self.l * (self.l + 1.0)
    }

    /// True when the `x^-2` term vanishes identically (`l = 0` or `l = -1`),
    /// leaving six turning points instead of eight.
    pub fn centrifugal_free(&self) -> bool {
        self.centrifugal() == 0.0
    }

    /// The mirror point `l -> -1 - l`, which describes the same problem.
    pub fn mirror_l(&self) -> Self {
        Self::new(self.alpha, -1.0 - self.l)
    }
}

/// The critical angular momentum: for `l` below it the turning points that
/// coalesce with increasing `|E|` sit inside the remaining ones, for `l`
/// above it outside, and at `l_prime` they line up with them.
pub fn l_prime(alpha: f64) -> f64 {
    -0.5 + (1.0 + alpha * alpha).sqrt() / 2.0
}

/// `P(x) = E - V(x)` for fixed parameters and (possibly complex) energy.
#[derive(Debug, Clone, Copy)]
pub struct Momentum {
    pub params: ProblemParams,
    pub energy: C64,
}

impl Momentum {
    pub fn new(params: ProblemParams, energy: C64) -> Self {
        Self { params, energy }
    }

    /// `P(x) = E - x^6 - alpha x^2 - l(l+1)/x^2`.
    pub fn p(&self, x: C64) -> C64 {
        let x2 = x * x;
        let x6 = x2 * x2 * x2;
        let mut v = x6 + self.params.alpha * x2;
        let cf = self.params.centrifugal();
        if cf != 0.0 {
            v += cf / x2;
        }
        self.energy - v
    }

    /// `dP/dx = -6x^5 - 2 alpha x + 2 l(l+1)/x^3`.
    pub fn dp(&self, x: C64) -> C64 {
        let x2 = x * x;
        let x3 = x2 * x;
        let mut d = -6.0 * x2 * x3 - 2.0 * self.params.alpha * x;
        let cf = self.params.centrifugal();
        if cf != 0.0 {
            d += 2.0 * cf / x3;
        }
        d
    }

    /// `d^2P/dx^2 = -30x^4 - 2 alpha - 6 l(l+1)/x^4`.
    pub fn d2p(&self, x: C64) -> C64 {
        let x2 = x * x;
        let x4 = x2 * x2;
        let mut d = -30.0 * x4 - 2.0 * self.params.alpha;
        let cf = self.params.centrifugal();
        if cf != 0.0 {
            d += -6.0 * cf / x4;
        }
        d
    }

    /// `W(x) = V(x) - E = -P(x)` and its first four x-derivatives, used by
    /// the shooting solver's asymptotic initialization.
    pub fn w_derivs(&self, x: C64) -> [C64; 5] {
        let a = self.params.alpha;
        let cf = self.params.centrifugal();
        let x2 = x * x;
        let x3 = x2 * x;
        let x4 = x2 * x2;
        let x5 = x4 * x;
        let x6 = x4 * x2;
        let mut w = [
            x6 + a * x2 - self.energy,
            6.0 * x5 + 2.0 * a * x,
            30.0 * x4 + 2.0 * a,
            120.0 * x3,
            360.0 * x2,
        ];
        if cf != 0.0 {
            w[0] += cf / x2;
            w[1] += -2.0 * cf / x3;
            w[2] += 6.0 * cf / x4;
            w[3] += -24.0 * cf / x5;
            w[4] += 120.0 * cf / x6;
        }
        w
    }

    /// Coefficients (ascending in `y = x^2`) of the reduced turning-point
    /// polynomial `x^2 P(x) = -(y^4 + alpha y^2 - E y + l(l+1))`.
    ///
    /// When `l(l+1) = 0` the physical polynomial is the cubic
    /// `y^3 + alpha y - E` instead (the spurious root `y = 0` is dropped).
    pub fn reduced_poly(&self) -> Vec<C64> {
        let a = C64::new(self.params.alpha, 0.0);
        let cf = C64::new(self.params.centrifugal(), 0.0);
        let e = self.energy;
        if self.params.centrifugal_free() {
            vec![-e, a, C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
        } else {
            vec![cf, -e, a, C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
        }
    }

    /// `x^2 P(x)`, the residual polynomial used to validate turning points.
    pub fn x2p(&self, x: C64) -> C64 {
        let x2 = x * x;
        let x4 = x2 * x2;
        self.energy * x2 - x4 * x4 - self.params.alpha * x4
            - C64::new(self.params.centrifugal(), 0.0)
    }

    /// Characteristic length scale of the turning-point structure.
    pub fn scale(&self) -> f64 {
        let e = self.energy.norm();
        let a = self.params.alpha.abs();
        let cf = self.params.centrifugal().abs();
        (1.0_f64).max(e.powf(1.0 / 6.0)).max(a.sqrt().sqrt()).max(cf.powf(0.125))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_pm_forward() {
        let p = ProblemParams::new(3.0, 0.5);
        assert!((p.alpha_plus - (3.0 - 4.0 + 2.0) / 8.0).abs() < 1e-15);
        assert!((p.alpha_minus - (3.0 - 4.0 - 2.0) / 8.0).abs() < 1e-15);
    }

    #[test]
    fn alpha_pm_round_trip() {
        for &(a, l) in &[(3.0, 0.5), (-5.0, 1.25), (0.1, -0.49), (12.0, 3.0)] {
            let p = ProblemParams::new(a, l);
            let q = ProblemParams::from_alpha_pm(p.alpha_plus, p.alpha_minus);
            assert!((q.alpha - a).abs() <= 1e-14 * (1.0 + a.abs()));
            assert!((q.l - l).abs() <= 1e-14 * (1.0 + l.abs()));
        }
    }

    #[test]
    fn l_prime_values() {
        assert!(l_prime(0.0).abs() < 1e-15);
        // (sqrt(10) - 1)/2
        let expect = (10.0_f64.sqrt() - 1.0) / 2.0;
        assert!((l_prime(3.0) - expect).abs() < 1e-14);
        assert!((l_prime(3.0) - 1.0811).abs() < 1e-4);
        assert!((l_prime(-3.0) - l_prime(3.0)).abs() < 1e-15);
    }

    #[test]
    fn p_conjugation_symmetry() {
        // For real E, alpha, l: P(conj x) = conj(P(x)).
        let m = Momentum::new(ProblemParams::new(3.0, 0.5), C64::new(1.0, 0.0));
        for &x in &[
            C64::new(0.7, 0.3),
            C64::new(-1.2, 0.9),
            C64::new(0.1, -2.0),
        ] {
            let lhs = m.p(x.conj());
            let rhs = m.p(x).conj();
            assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn w_derivs_match_finite_differences() {
        let m = Momentum::new(ProblemParams::new(1.5, 0.3), C64::new(2.0, 0.0));
        let x = C64::new(0.9, 0.4);
        let h = 1e-5;
        let w = m.w_derivs(x);
        for k in 1..5 {
            let fd = (m.w_derivs(x + C64::new(h, 0.0))[k - 1]
                - m.w_derivs(x - C64::new(h, 0.0))[k - 1])
                / (2.0 * h);
            assert!(
                (fd - w[k]).norm() < 1e-5 * (1.0 + w[k].norm()),
                "derivative order {k}"
            );
        }
    }
}
