//! Scalar curvature of Darboux III against its closed form, and the
//! constant curvature of the sphere/hyperbolic Kepler–Coulomb space.

use bertrand::catalog::{preset, Overrides};
use bertrand::geometry::{conformal_factor, scalar_curvature};

fn main() -> bertrand::Result<()> {
    let delta = 0.05;
    let mut o = Overrides::default();
    o.set("delta", delta)?;
    let d3 = preset("darboux_iii", &o)?;
    let prof = conformal_factor(&d3)?;
    println!("Darboux III, delta = {delta}, N = 3 (domain r < {:.4})", prof.domain().hi);
    println!("{:>6} {:>12} {:>14} {:>14}", "r", "f", "R", "closed form");
    for i in 1..=6 {
        let r = 0.5 * i as f64;
        let closed = 24.0 * delta * (1.0 - delta * r * r) / (1.0 - 2.0 * delta * r * r).powi(3);
        println!("{r:>6.2} {:>12.8} {:>14.8} {closed:>14.8}", prof.f(r), scalar_curvature(&d3, r)?);
    }

    for kappa in [0.1, -0.1] {
        let mut o = Overrides::default();
        o.set("kappa", kappa)?;
        let s = preset("sphere_hyperbolic_kc", &o)?;
        let rs: Vec<f64> = [0.2, 1.0, 2.0, 3.0].iter().map(|&r| scalar_curvature(&s, r).unwrap()).collect();
        println!("sphere/hyperbolic kappa = {kappa:+}: R = {rs:.10?}");
    }
    Ok(())
}
