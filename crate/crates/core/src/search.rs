//! Small 1-D search utilities shared by the spectral searches.

/// Bisect a bracketed sign change to `tol_rel * (1 + |x|)`.
/// `fa` must have the opposite sign of `f(b)`.
pub fn bisect<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    tol_rel: f64,
) -> f64 {
    debug_assert!(fa != 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= tol_rel * (1.0 + mid.abs()) {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Golden-section refinement of an interior extremum bracketed by
/// `(a, m, b)` with `f(m)` below (minimize=true) or above both ends.
/// Returns `(x, f(x))`.
pub fn golden<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    minimize: bool,
    tol_rel: f64,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let sign = if minimize { 1.0 } else { -1.0 };
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = sign * f(x1);
    let mut f2 = sign * f(x2);
    for _ in 0..120 {
        if (hi - lo).abs() <= tol_rel * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = sign * f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = sign * f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, sign * f1.min(f2) * sign)
}

/// Indices `i` such that `values[i]` and `values[i+1]` have opposite signs.
pub fn sign_changes(values: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 0..values.len().saturating_sub(1) {
        if values[i] != 0.0 && values[i + 1] != 0.0 && values[i].signum() != values[i + 1].signum()
        {
            out.push(i);
        }
    }
    out
}

/// Interior local extrema of a sampled function: `(index, is_minimum)`.
pub fn local_extrema(values: &[f64]) -> Vec<(usize, bool)> {
    let mut out = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        if values[i] < values[i - 1] && values[i] < values[i + 1] {
            out.push((i, true));
        } else if values[i] > values[i - 1] && values[i] > values[i + 1] {
            out.push((i, false));
        }
    }
    out
}

/// Solve the 3x3 linear system `a x = b` by Gaussian elimination with
/// partial pivoting; `None` if singular.
pub fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut m = [[0.0f64; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3] = b[i];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| {
            m[i][col]
                .abs()
                .partial_cmp(&m[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = [0.0f64; 3];
    for i in (0..3).rev() {
        let mut s = m[i][3];
        for k in (i + 1)..3 {
            s -= m[i][k] * x[k];
        }
        x[i] = s / m[i][i];
    }
    Some(x)
}
