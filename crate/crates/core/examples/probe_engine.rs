use ptwkb::potential::ProblemParams;
use ptwkb::quantise::*;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let cusps = find_cusps((1.2, 3.8), (0.55, 1.4), 7.0, &CuspSearch::default()).unwrap();
    println!("cusp search ({:.0}s): {} found", t0.elapsed().as_secs_f64(), cusps.cusps.len());
    for c in &cusps.cusps {
        let p = ProblemParams::new(c.alpha, c.l);
        println!("  cusp (a+={:.4}, a-={:.4}) E={:+.5} residuals [{:.1e},{:.1e},{:.1e}]",
            p.alpha_plus, p.alpha_minus, c.energy, c.residuals[0], c.residuals[1], c.residuals[2]);
    }
}
