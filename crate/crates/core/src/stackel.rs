//! Coupling-constant duality between the two families.
//!
//! With `H_0 = T_I + B` and `U = V_I/A + C`, the quotient `H_0 / U` is the
//! Type II Hamiltonian for `γ = β/2`, `λ² = -κ`, `δ = -C/2` and coupling `B`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::PhasePoint;
use crate::error::{Error, Result};
use crate::geometry::{conformal_factor, profile_at, BertrandSpace, Family, TypeIIParams, TypeIParams};

/// A Type I system together with the two shift constants of the transform
/// and the Type II system it maps to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StackelDescriptor {
    pub type_i: TypeIParams,
    /// Constant added to the free Type I Hamiltonian.
    pub aux_b: f64,
    /// Constant added to the normalised Type I potential.
    pub aux_c: f64,
    pub type_ii: TypeIIParams,
}

impl StackelDescriptor {
    pub fn new(type_i: TypeIParams, aux_b: f64, aux_c: f64) -> Self {
        Self {
            type_i,
            aux_b,
            aux_c,
            type_ii: map_i_to_ii(&type_i, aux_b, aux_c),
        }
    }

    pub fn from_type_ii(type_ii: TypeIIParams, coupling_a: f64) -> Self {
        let (type_i, aux_b, aux_c) = map_ii_to_i(&type_ii, coupling_a);
        Self {
            type_i,
            aux_b,
            aux_c,
            type_ii,
        }
    }
}

/// The time-coefficient shift `ξ` is carried over unchanged as `χ`.
pub fn map_i_to_ii(params: &TypeIParams, b: f64, c: f64) -> TypeIIParams {
    TypeIIParams {
        gamma: params.beta.halved(),
        // 0.0 - x keeps a zero parameter +0.0
        lambda_sq: 0.0 - params.kappa,
        delta: 0.0 - 0.5 * c,
        chi: params.xi,
        coupling_b: b,
    }
}

/// Inverse of [`map_i_to_ii`]; returns `(params, B, C)`.
pub fn map_ii_to_i(params: &TypeIIParams, coupling_a: f64) -> (TypeIParams, f64, f64) {
    let type_i = TypeIParams {
        beta: params.gamma.doubled(),
        kappa: 0.0 - params.lambda_sq,
        xi: params.chi,
        coupling_a,
    };
    (type_i, params.coupling_b, 0.0 - 2.0 * params.delta)
}

/// Signed residual `((T_I + B)/(V_I/A + C) - H_II) / max(|H_II|, 1e-14)`.
pub fn identity_residual(desc: &StackelDescriptor, state: &PhasePoint) -> Result<f64> {
    let dim = state.dim();
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("dimension {dim} < 2")));
    }
    let r = state.radius();
    let space_i = BertrandSpace::new(dim, Family::TypeI(desc.type_i))?;
    let space_ii = BertrandSpace::new(dim, Family::TypeII(desc.type_ii))?;
    let prof_i = profile_at(&space_i, r)?;
    let a = desc.type_i.coupling_a;
    if a == 0.0 {
        return Err(Error::DivisionByZero("Type I coupling A = 0".into()));
    }
    let p2: f64 = state.p.iter().map(|x| x * x).sum();
    let denom = prof_i.potential(r) / a + desc.aux_c;
    if denom == 0.0 {
        return Err(Error::DivisionByZero(format!("V_I/A + C = 0 at r = {r}")));
    }
    // U = 0 is where Q vanishes, i.e. an edge of the Type II domain
    let prof_ii = profile_at(&space_ii, r)?;
    let quotient = (prof_i.kinetic_coefficient(r) * p2 + desc.aux_b) / denom;
    let h_ii = prof_ii.kinetic_coefficient(r) * p2 + prof_ii.potential(r);
    Ok((quotient - h_ii) / h_ii.abs().max(1e-14))
}

/// Summary of [`residual_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualSweep {
    pub samples: usize,
    pub seed: u64,
    pub max_abs: f64,
    pub mean_abs: f64,
    /// Radius of the sample with the largest residual.
    pub worst_radius: f64,
}

/// Evaluates [`identity_residual`] at `samples` phase points drawn with a
/// ChaCha8 generator seeded by `seed`. Radii come from the central 96% of
/// the Type II domain window (its first 5 length units if unbounded),
/// momenta componentwise from `[-1.5, 1.5]`.
pub fn residual_sweep(desc: &StackelDescriptor, dim: usize, samples: usize, seed: u64) -> Result<ResidualSweep> {
    let space_ii = BertrandSpace::new(dim, Family::TypeII(desc.type_ii))?;
    let d = conformal_factor(&space_ii)?.domain();
    let hi = if d.hi.is_finite() { d.hi } else { d.lo + 5.0 };
    let (lo, hi) = (d.lo + 0.02 * (hi - d.lo), hi - 0.02 * (hi - d.lo));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ResidualSweep {
        samples: 0,
        seed,
        max_abs: 0.0,
        mean_abs: 0.0,
        worst_radius: f64::NAN,
    };
    let mut attempts = 0usize;
    while out.samples < samples {
        attempts += 1;
        if attempts > 100 * samples.max(1) {
            return Err(Error::InvalidParameter(
                "could not draw phase points where both Hamiltonians are defined".into(),
            ));
        }
        let r = rng.random_range(lo..hi);
        let mut dir: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-3 {
            continue;
        }
        dir.iter_mut().for_each(|x| *x *= r / norm);
        let p = (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect();
        let state = PhasePoint::new(dir, p)?;
        let res = match identity_residual(desc, &state) {
            Ok(v) => v.abs(),
            Err(Error::DomainViolation { .. }) | Err(Error::DivisionByZero(_)) => continue,
            Err(e) => return Err(e),
        };
        if res > out.max_abs || out.samples == 0 {
            out.max_abs = res;
            out.worst_radius = state.radius();
        }
        out.mean_abs += res;
        out.samples += 1;
    }
    if samples > 0 {
        out.mean_abs /= samples as f64;
    }
    Ok(out)
}
