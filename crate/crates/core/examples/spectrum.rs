//! Flat-space anchors: the radial Direct spectrum of the oscillator and of
//! the Coulomb problem against their closed forms.

use bertrand::catalog::{preset, Overrides};
use bertrand::quantum::{spectrum, QuantizationScheme, RadialGrid};

fn main() -> bertrand::Result<()> {
    let osc = preset("euclidean_oscillator", &Overrides::default())?;
    let omega = (2.0 * osc.family.coupling()).sqrt();
    let grid = RadialGrid::for_space(&osc, 2000)?;
    println!("oscillator, {} nodes on [{:.0e}, {:.3}]", grid.n_nodes, grid.r_start, grid.r_end);
    for l in 0..3 {
        let sp = spectrum(&osc, QuantizationScheme::DirectSchrodinger, l, &grid, 3)?;
        for (n, e) in sp.eigenvalues.iter().enumerate() {
            let exact = omega * (2 * n as u32 + l) as f64 + 1.5 * omega;
            println!("  l={l} n={n}: {e:.9} exact {exact:.9} err {:.1e}", (e - exact).abs());
        }
    }

    let kc = preset("euclidean_kc", &Overrides::default())?;
    let a = kc.family.coupling();
    let grid = RadialGrid::for_space(&kc, 2000)?;
    println!("Coulomb, {} nodes on [{:.0e}, {:.1}] ({:?})", grid.n_nodes, grid.r_start, grid.r_end, grid.spacing);
    for l in 0..3 {
        let sp = spectrum(&kc, QuantizationScheme::DirectSchrodinger, l, &grid, 3)?;
        for (n, e) in sp.eigenvalues.iter().enumerate() {
            let exact = -a * a / (2.0 * ((n as u32 + l + 1) as f64).powi(2));
            println!("  l={l} n={n}: {e:.9} exact {exact:.9} err {:.1e}", (e - exact).abs());
        }
    }
    Ok(())
}
