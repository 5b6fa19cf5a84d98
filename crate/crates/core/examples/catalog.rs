//! Lists the presets with their metric and Hamiltonian, then the dual pairs.

use bertrand::catalog::{describe, stackel_pairs, Overrides, PRESET_NAMES};

fn main() -> bertrand::Result<()> {
    for name in PRESET_NAMES {
        let p = describe(name, &Overrides::default())?;
        println!("{:<30} [{}] {}", p.name, p.table_ref, p.description);
    }
    println!();
    for pair in stackel_pairs()? {
        println!(
            "{:<3} {:<22} <-> {:<30} A = {:>5}  B = {:>4}  C = {:>6}",
            pair.row, pair.type_i, pair.type_ii, pair.coupling_a, pair.coupling_b, pair.aux_c
        );
    }
    Ok(())
}
