use std::f64::consts::PI;

use bertrand::catalog::{preset, Overrides, PRESET_NAMES};
use bertrand::dynamics::{
    bounded_orbit_grid, circular_orbit, circular_state, closure_check, integrate, measured_apsidal_angle,
    orbit_data, pericentre_state,
};
use bertrand::geometry::{conformal_factor, BertrandSpace, Family};
use bertrand::Error;

fn defaults(name: &str) -> BertrandSpace {
    preset(name, &Overrides::default()).unwrap()
}

/// Radii spread over the interior of the domain (capped at 4).
fn interior_radii(s: &BertrandSpace, count: usize) -> Vec<f64> {
    let d = conformal_factor(s).unwrap().domain();
    let hi = d.hi.min(4.0);
    let lo = d.lo.max(0.05 * hi);
    (1..=count).map(|i| lo + (hi - lo) * i as f64 / (count + 1) as f64).collect()
}

/// Radii spread over the part of the domain that carries circular orbits.
/// On the curved Type I presets the attraction stops at the equator and
/// circular orbits end there.
fn orbit_radii(s: &BertrandSpace, count: usize) -> Vec<f64> {
    let scan = interior_radii(s, 400);
    let hi = scan.iter().copied().take_while(|&r| circular_orbit(s, r).is_ok()).last().unwrap();
    let lo = scan[0];
    (1..=count).map(|i| lo + (hi - lo) * i as f64 / (count + 1) as f64).collect()
}

fn bertrand_angle(s: &BertrandSpace) -> f64 {
    match s.family {
        Family::TypeI(p) => PI / p.beta.value(),
        Family::TypeII(p) => PI / (2.0 * p.gamma.value()),
    }
}

#[test]
fn apsidal_angle_is_the_bertrand_value_on_every_preset() {
    for name in PRESET_NAMES {
        let s = defaults(name);
        let want = bertrand_angle(&s);
        let grid = bounded_orbit_grid(&s, &orbit_radii(&s, 3), &[0.15, 0.5, 0.85]).unwrap();
        for (e, l2) in grid {
            let got = orbit_data(&s, e, l2).unwrap().apsidal_angle;
            assert!((got - want).abs() < 1e-8, "{name}: quadrature angle {got} vs {want} at E={e}, L2={l2}");
        }
    }
}

#[test]
fn measured_apsidal_angle_agrees_with_quadrature() {
    for name in PRESET_NAMES {
        let s = defaults(name);
        let radii = orbit_radii(&s, 2);
        for (e, l2) in bounded_orbit_grid(&s, &radii, &[0.3, 0.7]).unwrap() {
            let quad = orbit_data(&s, e, l2).unwrap().apsidal_angle;
            let x0 = pericentre_state(&s, e, l2).unwrap();
            let measured = measured_apsidal_angle(&s, &x0, 4, 1e-12).unwrap();
            assert!((measured - quad).abs() < 1e-7, "{name}: measured {measured} vs quadrature {quad}");
        }
    }
}

#[test]
fn circular_orbits_are_stable_on_every_preset() {
    for name in PRESET_NAMES {
        let s = defaults(name);
        let mut found = 0;
        for r0 in interior_radii(&s, 40) {
            match circular_orbit(&s, r0) {
                Ok(c) => {
                    assert!(c.stable, "{name}: circular orbit at r0 = {r0} has V_eff'' = {}", c.curvature);
                    found += 1;
                }
                Err(Error::NoCircularOrbit { .. }) => {}
                Err(e) => panic!("{name}: {e}"),
            }
        }
        assert!(found >= 10, "{name}: only {found} circular orbits");
    }
}

#[test]
fn circular_state_keeps_its_radius() {
    for name in PRESET_NAMES {
        let s = defaults(name);
        let r0 = orbit_radii(&s, 1)[0];
        let x0 = circular_state(&s, r0).unwrap();
        let period = 2.0 * PI * r0 / x0.p[1].abs();
        let traj = integrate(&s, &x0, period, 1e-12).unwrap();
        let worst = traj.states.iter().map(|x| (x.radius() - r0).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-7 * r0, "{name}: radius wanders by {worst:e}");
    }
}

#[test]
fn every_preset_orbit_closes() {
    for name in PRESET_NAMES {
        let s = defaults(name);
        let (e, l2) = bounded_orbit_grid(&s, &orbit_radii(&s, 1), &[0.5]).unwrap()[0];
        let rep = closure_check(&s, &pericentre_state(&s, e, l2).unwrap(), 1e-5).unwrap();
        assert!(rep.closed, "{name}: return distance {:e}", rep.return_distance);
    }
}
