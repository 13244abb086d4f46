use num_complex::Complex64 as C64;
use ptwkb::potential::{Momentum, ProblemParams};
use ptwkb::quad::{action_integral_tol, continue_sqrt_along, SqrtAnchor};
use ptwkb::quantise::*;
use ptwkb::stokes::build_graph;

fn main() {
    let p = ProblemParams::new(3.0, 0.5);
    let energy = 2.89;
    let e_c = C64::new(energy, 0.0);
    let g = build_graph(&p, e_c).unwrap();
    let seq = crossing_sequence(&g).unwrap();
    let tp = &g.turning_points.points;
    let chain: Vec<C64> = seq.anchor_chain.iter().map(|&i| tp[i]).collect();
    println!("chain: {:?}", chain.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>());
    let m = Momentum::new(p, e_c);

    // route 1: straight
    let r1 = action_integral_tol(&m, chain[0], chain[1], &[], SqrtAnchor::Principal, 1e-14).unwrap();
    // route 2: dogleg below-left, same homotopy class, anchor-matched
    let w = 0.5 * (chain[0] + chain[1]) + C64::new(-0.25, -0.35);
    let r2 = action_integral_tol(&m, chain[0], chain[1], &[w], SqrtAnchor::AtStart(r1.anchor.sqrt_value), 1e-14).unwrap();
    // route 3: two-leg composition with explicit midpoint
    let mid = 0.5 * (chain[0] + chain[1]) + C64::new(0.12, -0.22);
    let r3a = action_integral_tol(&m, chain[0], mid, &[], SqrtAnchor::AtStart(r1.anchor.sqrt_value), 1e-14).unwrap();
    let s_mid = continue_sqrt_along(&m, &[r3a.anchor.point, mid], r3a.anchor.sqrt_value);
    let r3b = action_integral_tol(&m, mid, chain[1], &[], SqrtAnchor::AtStart(s_mid), 1e-14).unwrap();
    println!("route1 {:.12}  est {:.1e}", r1.value, r1.error_estimate);
    println!("route2 {:.12}  est {:.1e}", r2.value, r2.error_estimate);
    println!("route3 {:.12}", r3a.value + r3b.value);
    // engine's value
    for ev in &seq.events {
        if let CrossingEvent::Reanchor { from, to, omega } = ev {
            println!("engine omega {from}->{to}: {:.12}", omega.value);
        }
    }
    // distances from the straight chord to other turning points
    let seg = chain[1] - chain[0];
    for (i, &t) in tp.iter().enumerate() {
        let tproj = (((t - chain[0]) * seg.conj()).re / seg.norm_sqr()).clamp(0.0, 1.0);
        let d = (t - (chain[0] + seg * tproj)).norm();
        if d < 0.4 { println!("chord near tp[{i}] = {t:.4}: dist {d:.4}"); }
    }
}
