//! Integrates a Kepler orbit for 1000 radial periods and reports the drift of
//! the energy and of the squared angular momentum.

use bertrand::catalog::{preset, Overrides};
use bertrand::dynamics::{bounded_orbit_grid, integrate, orbit_data, pericentre_state};

fn main() -> bertrand::Result<()> {
    let s = preset("euclidean_kc", &Overrides::default())?;
    let (energy, l2) = bounded_orbit_grid(&s, &[1.0], &[0.6])?[0];
    let orbit = orbit_data(&s, energy, l2)?;
    println!(
        "E = {energy:.6}, L2 = {l2:.6}, r in [{:.6}, {:.6}], radial period {:.6}",
        orbit.r_min, orbit.r_max, orbit.radial_period
    );
    let x0 = pericentre_state(&s, energy, l2)?;
    for tol in [1e-8, 1e-10, 1e-12] {
        let traj = integrate(&s, &x0, 1000.0 * orbit.radial_period, tol)?;
        println!(
            "tol {tol:.0e}: max |dH/H| = {:.2e}, max |dL2/L2| = {:.2e}, {} accepted steps",
            traj.max_energy_drift(),
            traj.max_l2_drift(),
            traj.stats.accepted
        );
    }
    Ok(())
}
