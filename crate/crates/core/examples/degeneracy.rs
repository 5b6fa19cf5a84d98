//! Cross-l clusters of the Direct spectrum of Darboux III and the split they
//! show under the Laplace–Beltrami quantization.

use bertrand::catalog::{preset, Overrides};
use bertrand::quantum::{
    degeneracy_report_per_level, level_gap, level_tolerances, spectra_over_l, QuantizationScheme, RadialGrid, Spacing,
};

fn main() -> bertrand::Result<()> {
    let mut o = Overrides::default();
    o.set("delta", 0.05)?;
    o.set("B", 3.0)?;
    let s = preset("darboux_iii", &o)?;
    let ls = [0, 1, 2, 3];
    let r_end = RadialGrid::for_space(&s, 64)?.r_end;
    let fine = RadialGrid::new(1e-10, r_end, 16_001, Spacing::Uniform)?;
    let coarse = fine.with_nodes(8_001)?;
    let direct = spectra_over_l(&s, QuantizationScheme::DirectSchrodinger, &ls, &fine, 5)?;
    let tols = level_tolerances(&direct, &spectra_over_l(&s, QuantizationScheme::DirectSchrodinger, &ls, &coarse, 5)?)?;
    let lb = spectra_over_l(&s, QuantizationScheme::LaplaceBeltrami, &ls, &fine, 5)?;
    let report = degeneracy_report_per_level(&direct, &tols)?;
    println!("{:>12} {:>20} {:>10} {:>10} {:>10}", "E", "(n, l)", "gap", "tol", "LB gap");
    for c in &report.clusters {
        let members: Vec<(usize, u32)> = c.members.iter().map(|m| (m.n, m.l)).collect();
        let lb_gap = level_gap(&lb, &members).unwrap();
        println!(
            "{:>12.6} {:>20} {:>10.2e} {:>10.2e} {:>10.2e}",
            c.energy,
            format!("{members:?}"),
            c.gap,
            c.tolerance,
            lb_gap
        );
    }
    Ok(())
}
