//! Spectral scans of the PT-symmetric sextic eigenvalue problem
//! `-psi'' + (x^6 + alpha x^2 + l(l+1)/x^2) psi = E psi` on the lateral
//! contour, with CSV/JSON/SVG emission.

mod config;
mod svg;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use num_complex::Complex64 as C64;
use ptwkb::oracle::{self, EnergyWindowSpec, OracleSettings};
use ptwkb::quantise::{self, CuspSearch, DegeneracySearch};
use ptwkb::report;
use ptwkb::stokes::{build_graph, LineKind};
use ptwkb::{l_prime, ProblemParams};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "ptwkb",
    about = "WKB and shooting-method spectra of a PT-symmetric sextic oscillator",
    version
)]
struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turning points of P(x) = E - V(x) at one parameter point.
    TurningPoints(PointArgs),
    /// Trace the Stokes geometry and emit it as JSON or SVG.
    StokesGraph(PointArgs),
    /// WKB eigenvalues from the quantisation condition.
    Spectrum(SpectrumArgs),
    /// Degeneracy sweep: fixed alpha_plus, alpha_minus swept.
    Degeneracies(DegeneracyArgs),
    /// Cusp search over a box in the (alpha_plus, alpha_minus) plane.
    Cusps(CuspArgs),
    /// Direct shooting-method eigenvalues (ground truth).
    Oracle(SpectrumArgs),
    /// Run WKB and the shooting solver on identical inputs side by side.
    Compare(CompareArgs),
    /// Region map of the (alpha, l) plane with thresholds and lattice.
    RegionMap(RegionMapArgs),
}

#[derive(clap::Args)]
struct PointArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    l: Option<f64>,
    #[arg(long, short = 'E')]
    energy: Option<f64>,
    #[arg(long, value_parser = ["csv", "json", "svg"])]
    format: Option<String>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SpectrumArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    emin: Option<f64>,
    #[arg(long)]
    emax: Option<f64>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct DegeneracyArgs {
    #[arg(long)]
    alpha_plus: Option<f64>,
    /// Sweep range, e.g. --minus-range 0.5,1.3
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    minus_range: Option<(f64, f64)>,
    #[arg(long)]
    emax: Option<f64>,
    #[arg(long)]
    t_steps: Option<usize>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also run the shooting-method pair tracker on the same sweep.
    #[arg(long)]
    with_oracle: bool,
}

#[derive(clap::Args)]
struct CuspArgs {
    /// Box, e.g. --box 0,4x0,4 for 0 < alpha_pm < 4.
    #[arg(long = "box", value_parser = parse_box)]
    search_box: Option<((f64, f64), (f64, f64))>,
    #[arg(long)]
    emax: Option<f64>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct CompareArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    emin: Option<f64>,
    #[arg(long)]
    emax: Option<f64>,
    /// Degeneracy-overlay mode: fixed alpha_plus with a swept alpha_minus.
    #[arg(long)]
    alpha_plus: Option<f64>,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    minus_range: Option<(f64, f64)>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json", "svg"])]
    format: Option<String>,
}

#[derive(clap::Args)]
struct RegionMapArgs {
    /// Bounds alpha_lo,alpha_hi e.g. --alpha-range=-8,12
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    alpha_range: Option<(f64, f64)>,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    l_range: Option<(f64, f64)>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "svg"])]
    format: Option<String>,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected lo,hi".into());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    if !(lo < hi) {
        return Err("expected lo < hi".into());
    }
    Ok((lo, hi))
}

fn parse_box(s: &str) -> Result<((f64, f64), (f64, f64)), String> {
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() != 2 {
        return Err("expected plo,phi x mlo,mhi".into());
    }
    Ok((parse_pair(parts[0])?, parse_pair(parts[1])?))
}

fn main() {
    // Worker-pool size from the environment.
    if let Ok(n) = std::env::var("PTWKB_WORKERS") {
        if let Ok(n) = n.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => config::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => config::FileConfig::default(),
    };

    match cli.command {
        Command::TurningPoints(a) => turning_points_cmd(a, &file),
        Command::StokesGraph(a) => stokes_graph_cmd(a, &file),
        Command::Spectrum(a) => spectrum_cmd(a, &file, false),
        Command::Oracle(a) => spectrum_cmd(a, &file, true),
        Command::Degeneracies(a) => degeneracies_cmd(a, &file),
        Command::Cusps(a) => cusps_cmd(a, &file),
        Command::Compare(a) => compare_cmd(a, &file),
        Command::RegionMap(a) => region_map_cmd(a, &file),
    }
}

fn emit(output: Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(p) => {
            std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
            eprintln!("wrote {}", p.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn params_from(alpha: Option<f64>, l: Option<f64>, file: &config::FileConfig) -> Result<ProblemParams> {
    if let (Some(ap), Some(am)) = (file.alpha_plus, file.alpha_minus) {
        if alpha.is_none() && l.is_none() && file.alpha.is_none() && file.l.is_none() {
            return Ok(ProblemParams::from_alpha_pm(ap, am));
        }
    }
    let alpha = config::pick(alpha, file.alpha).context("missing --alpha")?;
    let l = config::pick(l, file.l).context("missing --l")?;
    Ok(ProblemParams::new(alpha, l))
}

fn turning_points_cmd(a: PointArgs, file: &config::FileConfig) -> Result<()> {
    let p = params_from(a.alpha, a.l, file)?;
    let e = config::pick(a.energy, file.energy).context("missing --energy")?;
    let set = ptwkb::turning_points(&p, C64::new(e, 0.0));
    let out = config::pick(a.output, file.output.clone());
    match config::pick(a.format, file.format.clone()).as_deref().unwrap_or("csv") {
        "json" => emit(out, &(serde_json::to_string_pretty(&set)? + "\n")),
        _ => emit(out, &report::turning_points_csv(&set)),
    }
}

fn stokes_graph_cmd(a: PointArgs, file: &config::FileConfig) -> Result<()> {
    let p = params_from(a.alpha, a.l, file)?;
    let e = config::pick(a.energy, file.energy).context("missing --energy")?;
    let graph = build_graph(&p, C64::new(e, 0.0))?;
    match a.format.as_deref().unwrap_or("svg") {
        "json" => emit(a.output, &(report::graph_json(&graph)? + "\n")),
        "svg" => {
            let r = graph.escape_radius * 1.02;
            let mut canvas = svg::Canvas::new(640.0, 640.0, -r, -r, r, r);
            canvas.axes();
            for line in &graph.lines {
                match line.kind {
                    LineKind::Stokes => {
                        canvas.polyline(&line.points, svg::STOKES_STROKE, 1.3, None)
                    }
                    LineKind::AntiStokes => {
                        canvas.polyline(&line.points, svg::ANTI_STROKE, 1.1, Some(svg::ANTI_DASH))
                    }
                }
            }
            for (tp, m) in graph
                .turning_points
                .points
                .iter()
                .zip(&graph.turning_points.multiplicities)
            {
                canvas.circle(*tp, 2.5 + 1.5 * (*m as f64 - 1.0), svg::TP_FILL);
            }
            canvas.text(
                C64::new(-r * 0.98, r * 0.9),
                &format!("alpha={} l={} E={}", p.alpha, p.l, e),
                13.0,
            );
            emit(a.output, &canvas.finish())
        }
        other => bail!("format {other} not supported for stokes-graph"),
    }
}

fn default_emin(p: &ProblemParams) -> f64 {
    let crit = ptwkb::critical_energies(p);
    -1.2 * crit.ascending().last().copied().unwrap_or(0.0) - 5.0
}

fn spectrum_cmd(a: SpectrumArgs, file: &config::FileConfig, use_oracle: bool) -> Result<()> {
    let p = params_from(a.alpha, a.l, file)?;
    let emax = config::pick(a.emax, file.emax).context("missing --emax")?;
    let emin = config::pick(a.emin, file.emin).unwrap_or_else(|| default_emin(&p));
    let res = if use_oracle {
        oracle::eigenvalue_scan(
            &p,
            EnergyWindowSpec::Real { lo: emin, hi: emax },
            &OracleSettings::default(),
        )?
    } else {
        let cond = quantise::quantisation_condition(&p)?;
        quantise::find_eigenvalues(&cond, emin, emax)?
    };
    match a.format.as_deref().unwrap_or("csv") {
        "json" => emit(a.output, &(report::spectrum_json(&res)? + "\n")),
        _ => emit(a.output, &report::spectrum_csv_with_params(p.alpha, p.l, &res)),
    }
}

fn degeneracies_cmd(a: DegeneracyArgs, file: &config::FileConfig) -> Result<()> {
    let ap = config::pick(a.alpha_plus, file.alpha_plus).context("missing --alpha-plus")?;
    let (lo, hi) = config::pick(a.minus_range, file.minus_range).context("missing --minus-range")?;
    let emax = config::pick(a.emax, file.emax).unwrap_or(25.0);
    let mut opts = DegeneracySearch::default();
    if let Some(t) = config::pick(a.t_steps, file.t_steps) {
        opts.t_steps = t;
    }
    if let Some(g) = file.e_grid {
        opts.e_grid = g;
    }
    let mut res = quantise::find_degeneracies(
        |am| ProblemParams::from_alpha_pm(ap, am),
        (lo, hi),
        (-emax, emax),
        &opts,
    )?;
    if a.with_oracle {
        match oracle::degeneracy_locus(
            |am| ProblemParams::from_alpha_pm(ap, am),
            (lo, hi),
            (-emax, emax),
            opts.t_steps,
            2e-3,
            &OracleSettings::default(),
        ) {
            Ok(o) => res.merge(o),
            Err(e) => res.notes.push(format!("oracle tracker: {e}")),
        }
    }
    match a.format.as_deref().unwrap_or("csv") {
        "json" => emit(a.output, &(report::spectrum_json(&res)? + "\n")),
        _ => emit(a.output, &report::degeneracies_csv(&res)),
    }
}

fn cusps_cmd(a: CuspArgs, file: &config::FileConfig) -> Result<()> {
    let (pr, mr) = match (a.search_box, file.plus_range, file.minus_range) {
        (Some(b), _, _) => b,
        (None, Some(p), Some(m)) => (p, m),
        _ => bail!("missing --box"),
    };
    let emax = config::pick(a.emax, file.emax).unwrap_or(25.0);
    let res = quantise::find_cusps(pr, mr, emax, &CuspSearch::default())?;
    match a.format.as_deref().unwrap_or("csv") {
        "json" => emit(a.output, &(report::spectrum_json(&res)? + "\n")),
        _ => emit(a.output, &report::cusps_csv(&res)),
    }
}

fn compare_cmd(a: CompareArgs, file: &config::FileConfig) -> Result<()> {
    if let (Some(ap), Some(mr)) = (
        config::pick(a.alpha_plus, file.alpha_plus),
        config::pick(a.minus_range, file.minus_range),
    ) {
        return compare_degeneracies(a, ap, mr, file);
    }
    // Spectrum comparison at a single parameter point.
    let p = params_from(a.alpha, a.l, file)?;
    let emax = config::pick(a.emax, file.emax).context("missing --emax")?;
    let emin = config::pick(a.emin, file.emin).unwrap_or_else(|| default_emin(&p));
    let cond = quantise::quantisation_condition(&p)?;
    let wkb = quantise::find_eigenvalues(&cond, emin, emax)?.sorted_values();
    let orc = oracle::eigenvalue_scan(
        &p,
        EnergyWindowSpec::Real { lo: emin, hi: emax },
        &OracleSettings::default(),
    )?
    .sorted_values();
    let mut out = String::from("alpha,l,n,e_wkb,e_oracle,rel_err\n");
    for i in 0..wkb.len().max(orc.len()) {
        let w = wkb.get(i);
        let o = orc.get(i);
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            report::fmt_sig(p.alpha),
            report::fmt_sig(p.l),
            i + 1,
            w.map(|v| report::fmt_sig(*v)).unwrap_or_default(),
            o.map(|v| report::fmt_sig(*v)).unwrap_or_default(),
            match (w, o) {
                (Some(w), Some(o)) => report::fmt_sig((w - o) / o),
                _ => String::new(),
            }
        ));
    }
    emit(a.output, &out)
}

fn compare_degeneracies(
    a: CompareArgs,
    ap: f64,
    (lo, hi): (f64, f64),
    file: &config::FileConfig,
) -> Result<()> {
    let emax = config::pick(a.emax, file.emax).unwrap_or(25.0);
    let wkb = quantise::find_degeneracies(
        |am| ProblemParams::from_alpha_pm(ap, am),
        (lo, hi),
        (-emax, emax),
        &DegeneracySearch::default(),
    )?;
    let orc = oracle::degeneracy_locus(
        |am| ProblemParams::from_alpha_pm(ap, am),
        (lo, hi),
        (-emax, emax),
        24,
        2e-3,
        &OracleSettings::default(),
    )
    .unwrap_or_default();

    match a.format.as_deref().unwrap_or("csv") {
        "svg" => {
            // Overlay in the (alpha_plus, alpha_minus) plane: oracle locus as
            // line ticks, WKB detections as crosses.
            let mut canvas = svg::Canvas::new(520.0, 520.0, ap - 1.0, lo - 0.2, ap + 1.0, hi + 0.2);
            canvas.axes();
            for d in &orc.degeneracies {
                let q = ProblemParams::new(d.alpha, d.l);
                canvas.polyline(
                    &[
                        C64::new(q.alpha_plus - 0.06, q.alpha_minus),
                        C64::new(q.alpha_plus + 0.06, q.alpha_minus),
                    ],
                    svg::ANTI_STROKE,
                    1.6,
                    None,
                );
            }
            for d in &wkb.degeneracies {
                let q = ProblemParams::new(d.alpha, d.l);
                canvas.cross(C64::new(q.alpha_plus, q.alpha_minus), 4.0, "#c22f2f");
            }
            canvas.text(
                C64::new(ap - 0.95, hi + 0.1),
                &format!("degeneracies at alpha_plus = {ap}"),
                12.0,
            );
            emit(a.output, &canvas.finish())
        }
        "json" => {
            let mut merged = wkb;
            merged.merge(orc);
            emit(a.output, &(report::spectrum_json(&merged)? + "\n"))
        }
        _ => {
            let mut out = String::from("source,alpha_plus,alpha_minus,alpha,l,energy,extremum_kind\n");
            for (src, set) in [("wkb", &wkb), ("oracle", &orc)] {
                for d in &set.degeneracies {
                    let q = ProblemParams::new(d.alpha, d.l);
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        src,
                        report::fmt_sig(q.alpha_plus),
                        report::fmt_sig(q.alpha_minus),
                        report::fmt_sig(d.alpha),
                        report::fmt_sig(d.l),
                        report::fmt_sig(d.energy),
                        d.extremum_kind.map(|k| k.to_string()).unwrap_or_default()
                    ));
                }
            }
            emit(a.output, &out)
        }
    }
}

fn region_map_cmd(a: RegionMapArgs, file: &config::FileConfig) -> Result<()> {
    let (a0, a1) = config::pick(a.alpha_range, file.plus_range).unwrap_or((-8.0, 12.0));
    let (l0, l1) = config::pick(a.l_range, file.minus_range).unwrap_or((-4.0, 3.0));
    match a.format.as_deref().unwrap_or("svg") {
        "csv" => {
            // Sampled region labels.
            let mut out = String::from("alpha,l,region,real_spectrum,positive_spectrum\n");
            let n = 60;
            for i in 0..=n {
                for j in 0..=n {
                    let alpha = a0 + (a1 - a0) * i as f64 / n as f64;
                    let l = l0 + (l1 - l0) * j as f64 / n as f64;
                    let lab = ptwkb::classify_region(&ProblemParams::new(alpha, l));
                    out.push_str(&format!(
                        "{},{},{:?},{},{}\n",
                        report::fmt_sig(alpha),
                        report::fmt_sig(l),
                        lab.region,
                        lab.real_spectrum,
                        lab.positive_spectrum
                    ));
                }
            }
            emit(a.output, &out)
        }
        _ => {
            let mut canvas = svg::Canvas::new(640.0, 520.0, a0, l0, a1, l1);
            canvas.axes();
            let n = 400;
            let sample = |f: &dyn Fn(f64) -> f64| -> Vec<C64> {
                (0..=n)
                    .map(|k| {
                        let alpha = a0 + (a1 - a0) * k as f64 / n as f64;
                        C64::new(alpha, f(alpha))
                    })
                    .collect()
            };
            // Solid structural boundaries: l = 0, alpha = 0, l = +-l' and the
            // mirror about l = -1/2.
            canvas.polyline(&sample(&|_| 0.0), "#1b1b1b", 1.2, None);
            canvas.polyline(&sample(&|_| -1.0), "#1b1b1b", 1.2, None);
            canvas.polyline(
                &[C64::new(0.0, l0), C64::new(0.0, l1)],
                "#1b1b1b",
                1.2,
                None,
            );
            canvas.polyline(&sample(&|al| l_prime(al)), "#1b1b1b", 1.2, None);
            canvas.polyline(&sample(&|al| -1.0 - l_prime(al)), "#1b1b1b", 1.2, None);
            // Reality / positivity thresholds alpha = 4 +- |2l+1| (dashed).
            let thr = |sign: f64| -> Vec<C64> {
                (0..=n)
                    .map(|k| {
                        let l = l0 + (l1 - l0) * k as f64 / n as f64;
                        C64::new(4.0 + sign * (2.0 * l + 1.0).abs(), l)
                    })
                    .collect()
            };
            canvas.polyline(&thr(1.0), "#c22f2f", 1.2, Some("7,4"));
            canvas.polyline(&thr(-1.0), "#c22f2f", 1.2, Some("7,4"));
            // Dotted integer alpha_pm lattice.
            for k in -6..=6 {
                let lat = |pm: f64| -> Vec<C64> {
                    (0..=n)
                        .map(|j| {
                            let l = l0 + (l1 - l0) * j as f64 / n as f64;
                            // alpha_pm = k  =>  alpha = 8k + 4 -+ (2l+1)
                            C64::new(8.0 * k as f64 + 4.0 - pm * (2.0 * l + 1.0), l)
                        })
                        .collect()
                };
                canvas.polyline(&lat(1.0), "#999", 0.7, Some("2,4"));
                canvas.polyline(&lat(-1.0), "#999", 0.7, Some("2,4"));
            }
            canvas.text(C64::new(a0 + 0.3, l1 - 0.25), "solid: structure boundaries; dashed: reality/positivity; dotted: integer lattice", 10.0);
            emit(a.output, &canvas.finish())
        }
    }
}
