//! Flat-file output: CSV rows with fixed ordering and 12-significant-digit
//! floats (so identical inputs give byte-identical files), plus JSON via
//! serde for the structured types.

use crate::spectrum::SpectrumResult;
use crate::stokes::StokesGraph;
use crate::turning::TurningPointSet;

/// A float with 12 significant digits, scientific notation.
pub fn fmt_sig(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.11e}")
    }
}

pub fn spectrum_csv(res: &SpectrumResult) -> String {
    let mut out = String::from("alpha,l,energy,window,residual,source\n");
    for e in &res.eigenvalues {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            "", // filled by the caller when sweeping; single-point rows leave alpha/l to eigenvalue context
            "",
            fmt_sig(e.value),
            e.window.map(|w| w.to_string()).unwrap_or_default(),
            fmt_sig(e.residual),
            e.source,
        ));
    }
    out
}

/// Eigenvalue rows with explicit parameters.
pub fn spectrum_csv_with_params(alpha: f64, l: f64, res: &SpectrumResult) -> String {
    let mut out = String::from("alpha,l,energy,window,residual,source\n");
    for e in &res.eigenvalues {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_sig(alpha),
            fmt_sig(l),
            fmt_sig(e.value),
            e.window.map(|w| w.to_string()).unwrap_or_default(),
            fmt_sig(e.residual),
            e.source,
        ));
    }
    for p in &res.complex_pairs {
        out.push_str(&format!(
            "{},{},{}+{}i,complex-pair,,{}\n",
            fmt_sig(p.alpha),
            fmt_sig(p.l),
            fmt_sig(p.re_e),
            fmt_sig(p.im_e),
            p.source,
        ));
    }
    out
}

pub fn degeneracies_csv(res: &SpectrumResult) -> String {
    let mut out =
        String::from("alpha,l,alpha_plus,alpha_minus,energy,extremum_kind,source\n");
    for d in &res.degeneracies {
        let p = crate::potential::ProblemParams::new(d.alpha, d.l);
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_sig(d.alpha),
            fmt_sig(d.l),
            fmt_sig(p.alpha_plus),
            fmt_sig(p.alpha_minus),
            fmt_sig(d.energy),
            d.extremum_kind.map(|k| k.to_string()).unwrap_or_default(),
            d.source,
        ));
    }
    out
}

pub fn cusps_csv(res: &SpectrumResult) -> String {
    let mut out = String::from(
        "alpha_plus,alpha_minus,alpha,l,energy,q_residual,dq_residual,d2q_residual\n",
    );
    for c in &res.cusps {
        let p = crate::potential::ProblemParams::new(c.alpha, c.l);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt_sig(p.alpha_plus),
            fmt_sig(p.alpha_minus),
            fmt_sig(c.alpha),
            fmt_sig(c.l),
            fmt_sig(c.energy),
            fmt_sig(c.residuals[0]),
            fmt_sig(c.residuals[1]),
            fmt_sig(c.residuals[2]),
        ));
    }
    out
}

pub fn turning_points_csv(set: &TurningPointSet) -> String {
    let mut out = String::from("re,im,multiplicity\n");
    for (p, m) in set.points.iter().zip(&set.multiplicities) {
        out.push_str(&format!("{},{},{}\n", fmt_sig(p.re), fmt_sig(p.im), m));
    }
    out
}

pub fn graph_json(graph: &StokesGraph) -> serde_json::Result<String> {
    serde_json::to_string_pretty(graph)
}

pub fn spectrum_json(res: &SpectrumResult) -> serde_json::Result<String> {
    serde_json::to_string_pretty(res)
}
