//! Dense complex polynomial root finding (Durand-Kerner with Newton polish).
//!
//! Degrees here are tiny (3 or 4 for the reduced turning-point polynomial),
//! so a simultaneous-iteration solver plus a few Newton steps per root is
//! both simple and accurate to near machine precision.

use crate::C64;

/// Evaluate `p(x)` for coefficients in ascending order (`coeffs[k]` is the
/// coefficient of `x^k`).
pub fn eval(coeffs: &[C64], x: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Evaluate `p'(x)`.
pub fn eval_deriv(coeffs: &[C64], x: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (k, &c) in coeffs.iter().enumerate().skip(1).rev() {
        acc = acc * x + c * k as f64;
    }
    acc
}

/// All roots of a complex polynomial, coefficients ascending, leading
/// coefficient nonzero. Roots are polished with Newton iterations and
/// returned sorted by (re, im) for determinism.
pub fn roots(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    assert!(n >= 1, "constant polynomial has no roots");
    let lead = coeffs[n];
    assert!(lead.norm() > 0.0, "leading coefficient must be nonzero");

    // Monic normalization.
    let monic: Vec<C64> = coeffs.iter().map(|&c| c / lead).collect();

    // Cauchy-style radius bound for initial guesses.
    let radius = 1.0
        + monic[..n]
            .iter()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max);

    // Durand-Kerner simultaneous iteration from a de-symmetrized circle.
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            C64::from_polar(radius * 0.8, theta)
        })
        .collect();

    for _ in 0..200 {
        let mut max_step = 0.0_f64;
        for i in 0..n {
            let num = eval(&monic, z[i]);
            let mut den = C64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    den *= z[i] - z[j];
                }
            }
            if den.norm() == 0.0 {
                // Coincident iterates: nudge apart and retry next sweep.
                z[i] += C64::new(1e-8 * (1.0 + radius), 1e-8);
                continue;
            }
            let step = num / den;
            z[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-14 * (1.0 + radius) {
            break;
        }
    }

    // Newton polish against the original (non-monic) coefficients.
    for zi in z.iter_mut() {
        *zi = newton_polish(coeffs, *zi, 4);
    }

    z.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    z
}

/// A few Newton steps; stops early on stagnation or a vanishing derivative
/// (multiple roots are handled by the caller's clustering pass).
pub fn newton_polish(coeffs: &[C64], start: C64, iters: usize) -> C64 {
    let mut x = start;
    for _ in 0..iters {
        let f = eval(coeffs, x);
        let df = eval_deriv(coeffs, x);
        if df.norm() < 1e-300 {
            break;
        }
        let step = f / df;
        x -= step;
        if step.norm() < 1e-16 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

/// Group nearly-coincident roots. Returns `(representatives, multiplicities,
/// ill_conditioned)` where `ill_conditioned` flags clusters that have another
/// root within ten cluster radii but outside the merge radius.
pub fn cluster(roots: &[C64], merge_radius: f64) -> (Vec<C64>, Vec<usize>, bool) {
    let mut reps: Vec<C64> = Vec::new();
    let mut mults: Vec<usize> = Vec::new();
    for &r in roots {
        match reps
            .iter()
            .position(|&c| (c - r).norm() <= merge_radius)
        {
            Some(i) => {
                // Running centroid of the cluster.
                let m = mults[i] as f64;
                reps[i] = (reps[i] * m + r) / (m + 1.0);
                mults[i] += 1;
            }
            None => {
                reps.push(r);
                mults.push(1);
            }
        }
    }
    let mut ill = false;
    for i in 0..reps.len() {
        for j in (i + 1)..reps.len() {
            let d = (reps[i] - reps[j]).norm();
            if d <= 10.0 * merge_radius {
                ill = true;
            }
        }
    }
    (reps, mults, ill)
}
