//! Maps a Type I system to its Type II dual and checks the coupling-constant
//! identity at random phase points.

use bertrand::geometry::{RationalExponent, TypeIParams};
use bertrand::stackel::{map_ii_to_i, residual_sweep, StackelDescriptor};

fn main() -> bertrand::Result<()> {
    let type_i = TypeIParams { beta: RationalExponent::new(1, 1)?, kappa: -0.1, xi: 0.0, coupling_a: -1.0 };
    let desc = StackelDescriptor::new(type_i, 0.5, -0.1);
    let ii = desc.type_ii;
    println!(
        "Type I beta = {}, kappa = {}, B = {}, C = {}  ->  Type II gamma = {}, lambda^2 = {}, delta = {}",
        type_i.beta, type_i.kappa, desc.aux_b, desc.aux_c, ii.gamma, ii.lambda_sq, ii.delta
    );
    let (back, b, c) = map_ii_to_i(&ii, type_i.coupling_a);
    println!("round trip exact: {}", back == type_i && b == desc.aux_b && c == desc.aux_c);
    let sweep = residual_sweep(&desc, 3, 1000, 0)?;
    println!("1000 samples: max |residual| = {:.2e}, mean {:.2e}", sweep.max_abs, sweep.mean_abs);
    Ok(())
}
