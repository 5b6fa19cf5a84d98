//! Named Bertrand systems: the Kepler–Coulomb family and its dual oscillators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BertrandSpace, Family, RationalExponent, TypeIIParams, TypeIParams};
use crate::stackel::StackelDescriptor;

/// Preset identifiers, in table order (Type I column first).
pub const PRESET_NAMES: [&str; 10] = [
    "euclidean_kc",
    "sphere_hyperbolic_kc",
    "inverse_square_kc",
    "type2b_kc",
    "taub_nut",
    "darboux_iv",
    "euclidean_oscillator",
    "darboux_iii",
    "sphere_hyperbolic_oscillator",
    "type2b2_oscillator",
];

/// Values of the free parameters when no override is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PresetDefaults {
    pub kappa: f64,
    pub lambda: f64,
    pub delta: f64,
    pub coupling_a: f64,
    pub coupling_b: f64,
    pub dim: usize,
    pub hbar: f64,
}

impl Default for PresetDefaults {
    fn default() -> Self {
        Self {
            kappa: 0.1,
            lambda: 0.1,
            delta: 0.05,
            coupling_a: -1.0,
            coupling_b: 0.5,
            dim: 3,
            hbar: 1.0,
        }
    }
}

/// Explicit parameter values; `None` falls back to [`PresetDefaults`].
///
/// `lambda` is the table's λ, so the space gets `λ² = lambda²`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub kappa: Option<f64>,
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    #[serde(alias = "A")]
    pub coupling_a: Option<f64>,
    #[serde(alias = "B")]
    pub coupling_b: Option<f64>,
    #[serde(alias = "N")]
    pub dim: Option<usize>,
    pub hbar: Option<f64>,
}

impl Overrides {
    /// Sets a parameter by name (`kappa`, `lambda`, `delta`, `A`, `B`, `N`,
    /// `hbar`, or the field names).
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "kappa" => &mut self.kappa,
            "lambda" => &mut self.lambda,
            "delta" => &mut self.delta,
            "A" | "a" | "coupling_a" => &mut self.coupling_a,
            "B" | "b" | "coupling_b" => &mut self.coupling_b,
            "hbar" => &mut self.hbar,
            "N" | "dim" => {
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(invalid("*", format!("dimension {value} is not a positive integer")));
                }
                self.dim = Some(value as usize);
                return Ok(());
            }
            other => return Err(invalid("*", format!("unknown parameter `{other}`"))),
        };
        *slot = Some(value);
        Ok(())
    }

    fn given(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (name, set) in [
            ("kappa", self.kappa.is_some()),
            ("lambda", self.lambda.is_some()),
            ("delta", self.delta.is_some()),
            ("A", self.coupling_a.is_some()),
            ("B", self.coupling_b.is_some()),
        ] {
            if set {
                out.push(name);
            }
        }
        out
    }
}

/// A named system with its table label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub space: BertrandSpace,
    pub description: &'static str,
    pub table_ref: &'static str,
}

struct Entry {
    name: &'static str,
    description: &'static str,
    table_ref: &'static str,
    /// Parameters that may be overridden besides `N` and `hbar`.
    free: &'static [&'static str],
}

const ENTRIES: [Entry; 10] = [
    Entry { name: "euclidean_kc", description: "Kepler-Coulomb on Euclidean space", table_ref: "Type I 1A (beta=1, kappa=0)", free: &["A"] },
    Entry { name: "sphere_hyperbolic_kc", description: "Kepler-Coulomb on the sphere (kappa>0) or hyperbolic space (kappa<0)", table_ref: "Type I 1B (beta=1, kappa)", free: &["kappa", "A"] },
    Entry { name: "inverse_square_kc", description: "KC system with beta=2 on a conformally flat space", table_ref: "Type I 2A (beta=2, kappa=0)", free: &["A"] },
    Entry { name: "type2b_kc", description: "KC system with beta=2 and curvature parameter kappa", table_ref: "Type I 2B (beta=2, kappa)", free: &["kappa", "A"] },
    Entry { name: "taub_nut", description: "Oscillator on a Taub-NUT space", table_ref: "Type II 1A (gamma=1/2, lambda=0, delta)", free: &["delta", "B"] },
    Entry { name: "darboux_iv", description: "Oscillator on a Darboux IV space", table_ref: "Type II 1B (gamma=1/2, lambda, delta)", free: &["lambda", "delta", "B"] },
    Entry { name: "euclidean_oscillator", description: "Isotropic oscillator on Euclidean space", table_ref: "Type II 2A.1 (gamma=1, lambda=0, delta=0)", free: &["B"] },
    Entry { name: "darboux_iii", description: "Oscillator on a Darboux III space", table_ref: "Type II 2A.2 (gamma=1, lambda=0, delta)", free: &["delta", "B"] },
    Entry { name: "sphere_hyperbolic_oscillator", description: "Oscillator on the sphere or hyperbolic space, delta=lambda", table_ref: "Type II 2B.1 (gamma=1, lambda, delta=lambda)", free: &["lambda", "B"] },
    Entry { name: "type2b2_oscillator", description: "Oscillator with gamma=1 and independent lambda, delta", table_ref: "Type II 2B.2 (gamma=1, lambda, delta)", free: &["lambda", "delta", "B"] },
];

fn invalid(preset: &str, reason: String) -> Error {
    Error::InvalidOverride {
        preset: preset.to_string(),
        reason,
    }
}

fn exponent(n: u32, d: u32) -> RationalExponent {
    RationalExponent::new(n, d).expect("table exponents are valid")
}

/// [`preset_with`] using [`PresetDefaults::default`].
pub fn preset(name: &str, overrides: &Overrides) -> Result<BertrandSpace> {
    preset_with(name, &PresetDefaults::default(), overrides)
}

/// Builds the named space. Overriding a parameter the table fixes for that
/// preset (e.g. `kappa` on `euclidean_kc`) is an error.
pub fn preset_with(name: &str, defaults: &PresetDefaults, overrides: &Overrides) -> Result<BertrandSpace> {
    Ok(describe_with(name, defaults, overrides)?.space)
}

/// [`preset`] together with its description and table label.
pub fn describe(name: &str, overrides: &Overrides) -> Result<Preset> {
    describe_with(name, &PresetDefaults::default(), overrides)
}

pub fn describe_with(name: &str, defaults: &PresetDefaults, overrides: &Overrides) -> Result<Preset> {
    let entry = ENTRIES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
    for p in overrides.given() {
        if !entry.free.contains(&p) {
            return Err(invalid(name, format!("`{p}` is fixed for this preset")));
        }
    }
    let pick = |o: Option<f64>, d: f64, label: &str| -> Result<f64> {
        let v = o.unwrap_or(d);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(invalid(name, format!("`{label}` = {v} is not finite")))
        }
    };
    let kappa = pick(overrides.kappa, defaults.kappa, "kappa")?;
    let lambda = pick(overrides.lambda, defaults.lambda, "lambda")?;
    let delta = pick(overrides.delta, defaults.delta, "delta")?;
    let a = pick(overrides.coupling_a, defaults.coupling_a, "A")?;
    let b = pick(overrides.coupling_b, defaults.coupling_b, "B")?;
    let hbar = pick(overrides.hbar, defaults.hbar, "hbar")?;
    let dim = overrides.dim.unwrap_or(defaults.dim);

    let type_i = |beta: u32, kappa: f64| {
        Family::TypeI(TypeIParams {
            beta: exponent(beta, 1),
            kappa,
            xi: 0.0,
            coupling_a: a,
        })
    };
    let type_ii = |gamma: RationalExponent, lambda_sq: f64, delta: f64| {
        Family::TypeII(TypeIIParams {
            gamma,
            lambda_sq,
            delta,
            chi: 0.0,
            coupling_b: b,
        })
    };
    let half = exponent(1, 2);
    let one = exponent(1, 1);
    let family = match name {
        "euclidean_kc" => type_i(1, 0.0),
        "sphere_hyperbolic_kc" => type_i(1, kappa),
        "inverse_square_kc" => type_i(2, 0.0),
        "type2b_kc" => type_i(2, kappa),
        "taub_nut" => type_ii(half, 0.0, delta),
        "darboux_iv" => type_ii(half, lambda * lambda, delta),
        "euclidean_oscillator" => type_ii(one, 0.0, 0.0),
        "darboux_iii" => type_ii(one, 0.0, delta),
        "sphere_hyperbolic_oscillator" => type_ii(one, lambda * lambda, lambda),
        "type2b2_oscillator" => type_ii(one, lambda * lambda, delta),
        _ => unreachable!("entry table and match agree"),
    };
    let space = BertrandSpace::with_hbar(dim, family, hbar).map_err(|e| invalid(name, e.to_string()))?;
    Ok(Preset {
        name: entry.name,
        space,
        description: entry.description,
        table_ref: entry.table_ref,
    })
}

/// A Kepler–Coulomb preset and its dual oscillator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StackelPair {
    /// Row label (`1A`, `1B`, `2A`, `2B`).
    pub row: &'static str,
    pub type_i: &'static str,
    pub type_ii: &'static str,
    /// Overrides that make `type_i` the exact image of `type_ii`.
    pub type_i_overrides: Overrides,
    pub coupling_a: f64,
    pub coupling_b: f64,
    pub aux_c: f64,
    pub descriptor: StackelDescriptor,
}

/// Every row pairing, built from the oscillator side with the given
/// defaults: `κ = −λ²` and `C = −2δ`.
pub fn stackel_pairs_with(defaults: &PresetDefaults) -> Result<Vec<StackelPair>> {
    let rows = [
        ("1A", "euclidean_kc", "taub_nut"),
        ("1B", "sphere_hyperbolic_kc", "darboux_iv"),
        ("2A", "inverse_square_kc", "euclidean_oscillator"),
        ("2A", "inverse_square_kc", "darboux_iii"),
        ("2B", "type2b_kc", "sphere_hyperbolic_oscillator"),
        ("2B", "type2b_kc", "type2b2_oscillator"),
    ];
    rows.iter()
        .map(|&(row, i_name, ii_name)| {
            let ii = preset_with(ii_name, defaults, &Overrides::default())?;
            let Family::TypeII(params) = ii.family else {
                unreachable!("oscillator presets are Type II")
            };
            let descriptor = StackelDescriptor::from_type_ii(params, defaults.coupling_a);
            let mut type_i_overrides = Overrides::default();
            if ENTRIES.iter().any(|e| e.name == i_name && e.free.contains(&"kappa")) {
                type_i_overrides.kappa = Some(descriptor.type_i.kappa);
            }
            Ok(StackelPair {
                row,
                type_i: i_name,
                type_ii: ii_name,
                type_i_overrides,
                coupling_a: defaults.coupling_a,
                coupling_b: descriptor.aux_b,
                aux_c: descriptor.aux_c,
                descriptor,
            })
        })
        .collect()
}

pub fn stackel_pairs() -> Result<Vec<StackelPair>> {
    stackel_pairs_with(&PresetDefaults::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{hamiltonian, PhasePoint};
    use crate::geometry::scalar_curvature;
    use crate::stackel::identity_residual;

    fn with(pairs: &[(&str, f64)]) -> Overrides {
        let mut o = Overrides::default();
        for &(k, v) in pairs {
            o.set(k, v).unwrap();
        }
        o
    }

    fn h(space: &BertrandSpace, r: f64, pr: f64, pt: f64) -> f64 {
        let x = PhasePoint::new(vec![r, 0.0, 0.0], vec![pr, pt, 0.0]).unwrap();
        hamiltonian(space, &x).unwrap()
    }

    #[test]
    fn darboux_iii_closed_form() {
        let s = preset("darboux_iii", &with(&[("delta", 0.1)])).unwrap();
        for &(r, pr, pt) in &[(0.3, 0.2, -0.5), (1.1, 1.0, 0.4), (2.0, -0.7, 0.1)] {
            let p2: f64 = pr * pr + pt * pt;
            let q: f64 = 1.0 - 0.2 * r * r;
            let want = p2 / (2.0 * q) + 0.5 * r * r / q;
            assert!((h(&s, r, pr, pt) - want).abs() <= 1e-13 * want.abs());
        }
    }

    #[test]
    fn sphere_oscillator_reading_of_lambda() {
        let lambda: f64 = 0.2;
        let s = preset("sphere_hyperbolic_oscillator", &with(&[("lambda", lambda)])).unwrap();
        let prof = s.profile().unwrap();
        for &r in &[0.1, 0.7, 1.5, 2.1] {
            let direct = 0.5 * (1.0 + lambda * r * r).powi(2);
            let table = r * r * (r.powi(-2) - lambda * lambda * r * r).powi(2) / (2.0 * (1.0 / r - lambda * r).powi(2));
            assert!((prof.kinetic_coefficient(r) - direct).abs() < 1e-13);
            assert!((direct - table).abs() < 1e-13);
        }
    }

    #[test]
    fn taub_nut_closed_form() {
        let s = preset("taub_nut", &with(&[("delta", 0.3)])).unwrap();
        let (r, pr, pt) = (0.9, 0.4, 0.8);
        let p2 = pr * pr + pt * pt;
        let want = r * p2 / (2.0 * (1.0 - 0.6 * r)) + 0.5 * r / (1.0 - 0.6 * r);
        assert!((h(&s, r, pr, pt) - want).abs() < 1e-13 * want.abs());
    }

    #[test]
    fn curvature_sign_follows_kappa_and_lambda() {
        for (name, key) in [("sphere_hyperbolic_kc", "kappa"), ("sphere_hyperbolic_oscillator", "lambda")] {
            for (v, sign) in [(0.1, 1.0), (-0.1, -1.0)] {
                let s = preset(name, &with(&[(key, v)])).unwrap();
                let r = scalar_curvature(&s, 0.8).unwrap();
                assert_eq!(r.signum(), sign, "{name} {key}={v}");
            }
            let s = preset(name, &with(&[(key, 0.0)])).unwrap();
            assert!(scalar_curvature(&s, 0.8).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(preset("kepler", &Overrides::default()), Err(Error::UnknownPreset(_))));
        assert!(matches!(
            preset("euclidean_kc", &with(&[("kappa", 0.1)])),
            Err(Error::InvalidOverride { .. })
        ));
        assert!(matches!(
            preset("sphere_hyperbolic_oscillator", &with(&[("delta", 0.1)])),
            Err(Error::InvalidOverride { .. })
        ));
        assert!(matches!(
            preset("darboux_iii", &with(&[("delta", f64::NAN)])),
            Err(Error::InvalidOverride { .. })
        ));
        assert!(matches!(
            preset("darboux_iii", &with(&[("N", 1.0)])),
            Err(Error::InvalidOverride { .. })
        ));
        assert!(Overrides::default().set("mu", 1.0).is_err());
    }

    #[test]
    fn every_name_resolves() {
        for name in PRESET_NAMES {
            let p = describe(name, &Overrides::default()).unwrap();
            assert_eq!(p.name, name);
            assert!(p.space.profile().is_ok());
        }
    }

    #[test]
    fn pairs_are_dual() {
        let pairs = stackel_pairs().unwrap();
        let rows: Vec<&str> = pairs.iter().map(|p| p.row).collect();
        assert_eq!(rows, ["1A", "1B", "2A", "2A", "2B", "2B"]);
        for pair in &pairs {
            let i = preset(pair.type_i, &pair.type_i_overrides).unwrap();
            assert_eq!(i.family, Family::TypeI(pair.descriptor.type_i));
            let ii = preset(pair.type_ii, &Overrides::default()).unwrap();
            assert_eq!(ii.family, Family::TypeII(pair.descriptor.type_ii));
            let x = PhasePoint::new(vec![0.7, 0.2, -0.1], vec![0.3, -0.5, 0.9]).unwrap();
            assert!(identity_residual(&pair.descriptor, &x).unwrap().abs() < 1e-13, "{}", pair.type_ii);
        }
        assert_eq!(pairs[0].aux_c, -0.1);
        assert_eq!(pairs[2].aux_c, 0.0);
    }
}
