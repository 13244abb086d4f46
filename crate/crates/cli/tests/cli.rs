use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ptwkb"))
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("ptwkb-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn turning_points_csv_is_deterministic() {
    let run = || {
        let out = bin()
            .args(["turning-points", "--alpha", "3", "--l", "0.5", "-E", "1"])
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a, b, "identical config must give byte-identical output");
    assert!(a.starts_with("re,im,multiplicity\n"));
    assert_eq!(a.lines().count(), 9); // header + 8 points
}

#[test]
fn stokes_graph_svg_has_both_line_styles() {
    let path = tmp("graph.svg");
    let out = bin()
        .args([
            "stokes-graph",
            "--alpha",
            "3",
            "--l",
            "0.5",
            "-E",
            "1",
            "--format",
            "svg",
            "-o",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let svg = std::fs::read_to_string(&path).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert!(svg.contains("stroke-dasharray"), "anti-Stokes lines dashed");
    assert!(svg.contains("<circle"), "turning points plotted");
    assert!(!svg.contains("href"), "self-contained");
    std::fs::remove_file(&path).ok();
}

#[test]
fn spectrum_positive_for_pure_sextic() {
    let out = bin()
        .args(["spectrum", "--alpha", "0", "--l", "0", "--emax", "30"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut n = 0;
    for line in text.lines().skip(1) {
        let e: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(e > 0.0, "nonpositive eigenvalue in {line}");
        n += 1;
    }
    assert!(n >= 3, "expected at least three levels below 30, got {n}");
}

#[test]
fn region_map_svg_and_csv() {
    let svg_path = tmp("map.svg");
    let out = bin()
        .args(["region-map", "-o"])
        .arg(&svg_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.contains("stroke-dasharray=\"7,4\""), "threshold dashes");
    assert!(svg.contains("stroke-dasharray=\"2,4\""), "lattice dots");
    std::fs::remove_file(&svg_path).ok();

    let out = bin()
        .args(["region-map", "--format", "csv", "--alpha-range", "-2,4", "--l-range", "-1,1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("alpha,l,region,real_spectrum,positive_spectrum\n"));
    // symmetric about l = -1/2: regions at l and -1-l match
    assert!(text.contains(",I,") || text.contains(",J,"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let cfg_path = tmp("config.json");
    std::fs::write(&cfg_path, r#"{"alpha": 3.0, "l": 0.5, "energy": 1.0}"#).unwrap();
    let out = bin()
        .args(["turning-points", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let from_cfg = String::from_utf8(out.stdout).unwrap();

    // flag overrides the file's energy
    let out = bin()
        .args(["turning-points", "--config"])
        .arg(&cfg_path)
        .args(["-E", "2.0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let overridden = String::from_utf8(out.stdout).unwrap();
    assert_ne!(from_cfg, overridden);
    std::fs::remove_file(&cfg_path).ok();
}

#[test]
fn invalid_config_exits_nonzero() {
    let out = bin()
        .args(["spectrum", "--alpha", "1"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("missing"), "stderr: {err}");
}
