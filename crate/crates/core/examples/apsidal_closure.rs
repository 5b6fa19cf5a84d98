//! Apsidal angles over a grid of bounded orbits on curved Bertrand spaces,
//! and the closure of one orbit after its rational number of periods.

use bertrand::catalog::{preset, Overrides};
use bertrand::dynamics::{bounded_orbit_grid, closure_check, orbit_data, pericentre_state};

fn main() -> bertrand::Result<()> {
    for (name, key, value) in [("sphere_hyperbolic_kc", "kappa", 0.1), ("darboux_iii", "delta", 0.05), ("taub_nut", "delta", 0.05)] {
        let mut o = Overrides::default();
        o.set(key, value)?;
        let s = preset(name, &o)?;
        let grid = bounded_orbit_grid(&s, &[0.6, 1.0, 1.4], &[0.2, 0.5, 0.8])?;
        let angles: Vec<f64> = grid.iter().map(|&(e, l2)| orbit_data(&s, e, l2).unwrap().apsidal_angle).collect();
        let lo = angles.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = angles.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (e, l2) = grid[4];
        let rep = closure_check(&s, &pericentre_state(&s, e, l2)?, 1e-5)?;
        println!(
            "{name:<22} dphi/pi = {:.12} (spread {:.1e}); closes after {} radial periods, return distance {:.1e}",
            angles[0] / std::f64::consts::PI,
            hi - lo,
            rep.radial_periods,
            rep.return_distance
        );
    }
    Ok(())
}
