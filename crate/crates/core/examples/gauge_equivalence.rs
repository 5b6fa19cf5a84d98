//! Direct Schrodinger and conformal Laplace–Beltrami quantizations of
//! Darboux III: eigenvalues, gauge-mapped eigenfunctions and the operator
//! residual under refinement.

use bertrand::catalog::{preset, Overrides};
use bertrand::geometry::conformal_factor;
use bertrand::quantum::{
    compare_spectra, eigenfunction_gauge_error, interior_bumps, operator_gauge_residual, spectrum, QuantizationScheme,
    RadialGrid,
};

fn main() -> bertrand::Result<()> {
    let mut o = Overrides::default();
    o.set("delta", 0.05)?;
    o.set("B", 3.0)?;
    let s = preset("darboux_iii", &o)?;
    let profile = conformal_factor(&s)?;
    let grid = RadialGrid::for_space(&s, 8000)?;
    for l in 0..3 {
        let d = spectrum(&s, QuantizationScheme::DirectSchrodinger, l, &grid, 4)?;
        let c = spectrum(&s, QuantizationScheme::ConformalLB, l, &grid, 4)?;
        let cmp = compare_spectra(&d, &c, 1e-6)?;
        let ef = (0..4).map(|i| eigenfunction_gauge_error(&d, &c, &profile, i).unwrap()).fold(0.0, f64::max);
        println!("l={l}: E = {:.8?}, max |E_D - E_CLB| = {:.1e}, eigenfunction error {ef:.1e}", d.eigenvalues, cmp.max_abs_diff);
    }
    let mut g = grid.with_nodes(1001)?;
    let mut prev: Option<f64> = None;
    for _ in 0..3 {
        let res = operator_gauge_residual(&s, 1, &g, &interior_bumps(&g))?;
        match prev {
            Some(p) => println!("operator residual at {} nodes: {res:.3e} (ratio {:.2})", g.n_nodes, p / res),
            None => println!("operator residual at {} nodes: {res:.3e}", g.n_nodes),
        }
        prev = Some(res);
        g = g.refined();
    }
    Ok(())
}
