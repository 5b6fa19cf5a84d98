//! Conformally flat Bertrand spaces.
//!
//! Every space carries a metric `g = f(r)^2 dq^2` on an N-dimensional
//! manifold. The Type I family is built from `P(r) = r^(1-β) + κ r^(1+β)`
//! with `f = 1/|P|`; the Type II family from `x = r^(2γ)`,
//! `Q = 1 - 2δx + λ²x²`, `M = 1 - λ²x²` with `f² = r^(2γ-2) Q / M²`.
//! Both forms are algebraically identical to the textbook expressions but
//! evaluate the flat members exactly (`f = 1`, all derivatives `0`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;

/// Positive rational exponent `num/den` kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RationalExponent {
    num: u32,
    den: u32,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl RationalExponent {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidParameter(format!(
                "exponent {num}/{den} must be a positive rational"
            )));
        }
        let g = gcd(num as u64, den as u64) as u32;
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub fn integer(n: u32) -> Result<Self> {
        Self::new(n, 1)
    }

    pub fn num(&self) -> u32 {
        self.num
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `self / 2`, exact.
    pub fn halved(&self) -> Self {
        let (num, den) = (self.num as u64, 2 * self.den as u64);
        let g = gcd(num, den);
        Self {
            num: (num / g) as u32,
            den: (den / g) as u32,
        }
    }

    /// `2 * self`, exact.
    pub fn doubled(&self) -> Self {
        let (num, den) = (2 * self.num as u64, self.den as u64);
        let g = gcd(num, den);
        Self {
            num: (num / g) as u32,
            den: (den / g) as u32,
        }
    }
}

impl fmt::Display for RationalExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for RationalExponent {
    type Err = Error;

    /// Accepts `p`, `p/q`, or a terminating decimal such as `1.5`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("`{s}` is not a positive rational"));
        if let Some((n, d)) = s.split_once('/') {
            let n: u32 = n.trim().parse().map_err(|_| bad())?;
            let d: u32 = d.trim().parse().map_err(|_| bad())?;
            return Self::new(n, d);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.len() > 6 || !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let scale = 10u32.pow(frac.len() as u32);
            let int: u32 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
            let frac: u32 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
            return Self::new(int * scale + frac, scale);
        }
        Self::new(s.parse().map_err(|_| bad())?, 1)
    }
}

impl TryFrom<String> for RationalExponent {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<RationalExponent> for String {
    fn from(e: RationalExponent) -> String {
        e.to_string()
    }
}

/// `r^e`, using repeated multiplication for integer exponents so that
/// flat-space members evaluate exactly.
pub(crate) fn rpow(r: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e.fract() == 0.0 && e.abs() <= 64.0 {
        r.powi(e as i32)
    } else {
        r.powf(e)
    }
}

/// Kepler–Coulomb-type family `(β; κ, ξ)` with potential strength `A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeIParams {
    pub beta: RationalExponent,
    pub kappa: f64,
    pub xi: f64,
    pub coupling_a: f64,
}

/// Oscillator-type family `(γ; λ², δ, χ)` with potential strength `B`.
///
/// Only `λ²` is stored; it may be negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeIIParams {
    pub gamma: RationalExponent,
    pub lambda_sq: f64,
    pub delta: f64,
    pub chi: f64,
    pub coupling_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Family {
    #[serde(rename = "I")]
    TypeI(TypeIParams),
    #[serde(rename = "II")]
    TypeII(TypeIIParams),
}

impl Family {
    pub fn is_type_i(&self) -> bool {
        matches!(self, Family::TypeI(_))
    }

    /// The potential strength of the family (`A` or `B`).
    pub fn coupling(&self) -> f64 {
        match self {
            Family::TypeI(p) => p.coupling_a,
            Family::TypeII(p) => p.coupling_b,
        }
    }
}

/// A Bertrand space: family parameters, dimension `N >= 2` and `ħ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BertrandSpace {
    pub dim: usize,
    pub family: Family,
    pub hbar: f64,
}

impl BertrandSpace {
    pub fn new(dim: usize, family: Family) -> Result<Self> {
        Self::with_hbar(dim, family, 1.0)
    }

    pub fn with_hbar(dim: usize, family: Family, hbar: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!("dimension N = {dim} < 2")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("hbar = {hbar} must be positive")));
        }
        Ok(Self { dim, family, hbar })
    }

    pub fn type_i(dim: usize, params: TypeIParams) -> Result<Self> {
        Self::new(dim, Family::TypeI(params))
    }

    pub fn type_ii(dim: usize, params: TypeIIParams) -> Result<Self> {
        Self::new(dim, Family::TypeII(params))
    }

    pub fn profile(&self) -> Result<RadialProfile> {
        conformal_factor(self)
    }
}

/// Open interval `(lo, hi)`; `hi` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialDomain {
    pub lo: f64,
    pub hi: f64,
}

impl RadialDomain {
    pub fn contains(&self, r: f64) -> bool {
        r > self.lo && r < self.hi
    }

    pub fn is_compact(&self) -> bool {
        self.hi.is_finite()
    }

    /// `r = 1` when inside, otherwise a point well inside the window.
    pub fn reference_point(&self) -> f64 {
        if self.contains(1.0) {
            1.0
        } else if !self.hi.is_finite() {
            2.0 * self.lo
        } else if self.lo == 0.0 {
            0.5 * self.hi
        } else {
            0.5 * (self.lo + self.hi)
        }
    }

    pub fn check(&self, r: f64) -> Result<()> {
        if self.contains(r) {
            Ok(())
        } else {
            Err(Error::DomainViolation {
                r,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }
}

/// Evaluators for the conformal factor and the radial functions of a space
/// restricted to one positivity window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    family: Family,
    domain: RadialDomain,
}

/// `P`, `P'`, `P''` for Type I.
fn type_i_poly(p: &TypeIParams, r: f64) -> (f64, f64, f64) {
    let b = p.beta.value();
    let k = p.kappa;
    let big = k * rpow(r, 1.0 + b);
    let small = rpow(r, 1.0 - b);
    let value = small + big;
    let d1 = (1.0 - b) * rpow(r, -b) + k * (1.0 + b) * rpow(r, b);
    let d2 = -b * (1.0 - b) * rpow(r, -b - 1.0) + k * b * (1.0 + b) * rpow(r, b - 1.0);
    (value, d1, d2)
}

/// Values and r-derivatives of `x = r^(2γ)`, `Q` and `M` for Type II.
struct TypeIIParts {
    x: f64,
    dx: f64,
    ddx: f64,
    q: f64,
    dq: f64,
    ddq: f64,
    m: f64,
    dm: f64,
    ddm: f64,
}

fn type_ii_parts(p: &TypeIIParams, r: f64) -> TypeIIParts {
    let g2 = 2.0 * p.gamma.value();
    let l2 = p.lambda_sq;
    let d = p.delta;
    let x = rpow(r, g2);
    let dx = g2 * x / r;
    let ddx = g2 * (g2 - 1.0) * x / (r * r);
    let q = 1.0 - 2.0 * d * x + l2 * x * x;
    let dq_dx = -2.0 * d + 2.0 * l2 * x;
    let dq = dq_dx * dx;
    let ddq = 2.0 * l2 * dx * dx + dq_dx * ddx;
    let m = 1.0 - l2 * x * x;
    let dm = -2.0 * l2 * x * dx;
    let ddm = -2.0 * l2 * (dx * dx + x * ddx);
    TypeIIParts {
        x,
        dx,
        ddx,
        q,
        dq,
        ddq,
        m,
        dm,
        ddm,
    }
}

impl RadialProfile {
    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn domain(&self) -> RadialDomain {
        self.domain
    }

    pub fn f_squared(&self, r: f64) -> f64 {
        match &self.family {
            Family::TypeI(p) => {
                let (v, _, _) = type_i_poly(p, r);
                1.0 / (v * v)
            }
            Family::TypeII(p) => {
                let t = type_ii_parts(p, r);
                rpow(r, 2.0 * p.gamma.value() - 2.0) * t.q / (t.m * t.m)
            }
        }
    }

    pub fn f(&self, r: f64) -> f64 {
        match &self.family {
            Family::TypeI(p) => {
                let (v, _, _) = type_i_poly(p, r);
                1.0 / v.abs()
            }
            Family::TypeII(p) => {
                let t = type_ii_parts(p, r);
                rpow(r, p.gamma.value() - 1.0) * t.q.sqrt() / t.m.abs()
            }
        }
    }

    /// First and second derivatives of `ln f`.
    pub fn log_derivatives(&self, r: f64) -> (f64, f64) {
        match &self.family {
            Family::TypeI(p) => {
                let (v, d1, d2) = type_i_poly(p, r);
                let u = d1 / v;
                (-u, -d2 / v + u * u)
            }
            Family::TypeII(p) => {
                let g = p.gamma.value();
                let t = type_ii_parts(p, r);
                let qr = t.dq / t.q;
                let mr = t.dm / t.m;
                let g1 = (g - 1.0) / r + 0.5 * qr - mr;
                let g2 = -(g - 1.0) / (r * r) + 0.5 * (t.ddq / t.q - qr * qr) - (t.ddm / t.m - mr * mr);
                (g1, g2)
            }
        }
    }

    pub fn f_prime(&self, r: f64) -> f64 {
        self.f(r) * self.log_derivatives(r).0
    }

    pub fn f_double_prime(&self, r: f64) -> f64 {
        let (g1, g2) = self.log_derivatives(r);
        self.f(r) * (g2 + g1 * g1)
    }

    /// `f`, `f'`, `f''` in one pass.
    pub fn derivatives(&self, r: f64) -> (f64, f64, f64) {
        let f = self.f(r);
        let (g1, g2) = self.log_derivatives(r);
        (f, f * g1, f * (g2 + g1 * g1))
    }

    /// Scalar curvature of `g = f² dq²` in dimension `dim`, no domain check.
    pub fn curvature(&self, dim: usize, r: f64) -> f64 {
        let (f, f1, f2) = self.derivatives(r);
        curvature_from_derivatives(dim, r, f, f1, f2)
    }

    /// Kinetic coefficient `1/(2f²)` multiplying `p²` in the Hamiltonian.
    pub fn kinetic_coefficient(&self, r: f64) -> f64 {
        match &self.family {
            Family::TypeI(p) => {
                let (v, _, _) = type_i_poly(p, r);
                0.5 * v * v
            }
            Family::TypeII(p) => {
                let t = type_ii_parts(p, r);
                rpow(r, 2.0 - 2.0 * p.gamma.value()) * t.m * t.m / (2.0 * t.q)
            }
        }
    }

    /// Central potential `V(r)` of the Hamiltonian (without additive constants).
    pub fn potential(&self, r: f64) -> f64 {
        match &self.family {
            Family::TypeI(p) => {
                let b = p.beta.value();
                p.coupling_a * (rpow(r, -b) - p.kappa * rpow(r, b))
            }
            Family::TypeII(p) => {
                let t = type_ii_parts(p, r);
                p.coupling_b * t.x / t.q
            }
        }
    }

    pub fn potential_prime(&self, r: f64) -> f64 {
        match &self.family {
            Family::TypeI(p) => {
                let b = p.beta.value();
                -p.coupling_a * b * (rpow(r, -b - 1.0) + p.kappa * rpow(r, b - 1.0))
            }
            Family::TypeII(p) => {
                let t = type_ii_parts(p, r);
                p.coupling_b * (t.dx / t.q - t.x * t.dq / (t.q * t.q))
            }
        }
    }

    pub fn potential_double_prime(&self, r: f64) -> f64 {
        match &self.family {
            Family::TypeI(p) => {
                let b = p.beta.value();
                -p.coupling_a
                    * b
                    * (-(b + 1.0) * rpow(r, -b - 2.0) + p.kappa * (b - 1.0) * rpow(r, b - 2.0))
            }
            Family::TypeII(p) => {
                let t = type_ii_parts(p, r);
                let q = t.q;
                p.coupling_b
                    * (t.ddx / q - 2.0 * t.dx * t.dq / (q * q) - t.x * t.ddq / (q * q)
                        + 2.0 * t.x * t.dq * t.dq / (q * q * q))
            }
        }
    }

    /// `U'(r) = 1/(r² f(r))`.
    pub fn green_function_derivative(&self, r: f64) -> f64 {
        1.0 / (r * r * self.f(r))
    }

    /// `D = r^(-2γ) + λ² r^(2γ) - 2δ` for Type II spaces.
    pub fn type_ii_d(&self, r: f64) -> Option<f64> {
        match &self.family {
            Family::TypeII(p) => {
                let t = type_ii_parts(p, r);
                Some(t.q / t.x)
            }
            Family::TypeI(_) => None,
        }
    }
}

pub(crate) fn curvature_from_derivatives(dim: usize, r: f64, f: f64, f1: f64, f2: f64) -> f64 {
    let n = dim as f64;
    let num = (n - 4.0) * f1 * f1 + f * (2.0 * f2 + 2.0 * (n - 1.0) * f1 / r);
    -(n - 1.0) * num / (f * f * f * f)
}

fn is_positive_finite(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

/// Positive radii where one of the metric factors vanishes.
fn breakpoints(family: &Family) -> Vec<f64> {
    let mut pts = Vec::new();
    match family {
        Family::TypeI(p) => {
            // P = r^(1-β)(1 + κ r^(2β))
            if p.kappa < 0.0 {
                pts.push((-1.0 / p.kappa).powf(0.5 / p.beta.value()));
            }
        }
        Family::TypeII(p) => {
            let mut xs = Vec::new();
            let (l2, d) = (p.lambda_sq, p.delta);
            if l2 == 0.0 {
                if d > 0.0 {
                    xs.push(1.0 / (2.0 * d));
                }
            } else {
                let disc = d * d - l2;
                if disc >= 0.0 {
                    let s = disc.sqrt();
                    xs.push((d - s) / l2);
                    xs.push((d + s) / l2);
                }
                if l2 > 0.0 {
                    xs.push(1.0 / l2.sqrt());
                }
            }
            let inv = 0.5 / p.gamma.value();
            pts.extend(xs.into_iter().filter(|x| *x > 0.0 && x.is_finite()).map(|x| x.powf(inv)));
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
    pts
}

fn params_finite(family: &Family) -> bool {
    match family {
        Family::TypeI(p) => p.kappa.is_finite() && p.xi.is_finite() && p.coupling_a.is_finite(),
        Family::TypeII(p) => {
            p.lambda_sq.is_finite() && p.delta.is_finite() && p.chi.is_finite() && p.coupling_b.is_finite()
        }
    }
}

/// Open intervals of `r > 0` on which `f²` is positive and finite.
pub fn positivity_windows(space: &BertrandSpace) -> Result<Vec<RadialDomain>> {
    if !params_finite(&space.family) {
        return Err(Error::EmptyDomain("non-finite parameters".into()));
    }
    let cuts = breakpoints(&space.family);
    let mut edges = vec![0.0];
    edges.extend(cuts.iter().copied());
    edges.push(f64::INFINITY);
    let probe = RadialProfile {
        family: space.family,
        domain: RadialDomain {
            lo: 0.0,
            hi: f64::INFINITY,
        },
    };
    let mut windows = Vec::new();
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let sample = if lo == 0.0 {
            if hi.is_finite() { 0.5 * hi } else { 1.0 }
        } else if hi.is_finite() {
            (lo * hi).sqrt()
        } else {
            2.0 * lo
        };
        if is_positive_finite(probe.f_squared(sample)) {
            windows.push(RadialDomain { lo, hi });
        }
    }
    if windows.is_empty() {
        return Err(Error::EmptyDomain(format!(
            "no positivity window for {:?}",
            space.family
        )));
    }
    Ok(windows)
}

/// Builds the conformal factor of `space` on its reference positivity window.
///
/// The window containing `r = 1` is preferred; otherwise the first window
/// (closest to the origin) on which `f²` is positive and finite.
pub fn conformal_factor(space: &BertrandSpace) -> Result<RadialProfile> {
    let windows = positivity_windows(space)?;
    let chosen = windows
        .iter()
        .find(|d| d.contains(1.0))
        .unwrap_or(&windows[0]);
    Ok(RadialProfile {
        family: space.family,
        domain: *chosen,
    })
}

/// Conformal factor on the positivity window that contains `r`.
pub fn profile_at(space: &BertrandSpace, r: f64) -> Result<RadialProfile> {
    let windows = positivity_windows(space)?;
    let domain = windows.iter().find(|d| d.contains(r)).copied().ok_or(Error::DomainViolation {
        r,
        lo: windows[0].lo,
        hi: windows[windows.len() - 1].hi,
    })?;
    Ok(RadialProfile {
        family: space.family,
        domain,
    })
}

/// Scalar curvature `R(r)` of the spatial metric.
pub fn scalar_curvature(space: &BertrandSpace, r: f64) -> Result<f64> {
    let profile = conformal_factor(space)?;
    profile.domain.check(r)?;
    Ok(profile.curvature(space.dim, r))
}

const GREEN_REL_TOL: f64 = 1e-13;
const GREEN_ABS_TOL: f64 = 1e-14;

/// Radial Green function `U(r) = ∫ dr / (r² f)`.
///
/// Integration constants: Type II uses `U(r_ref) = -sgn(W) √D(r_ref) / γ`
/// so that `γ² U² = D`; Type I with `κ = 0` uses `U(∞) = 0`; any other
/// Type I space uses `U(r_ref) = 0`.
pub fn green_function(space: &BertrandSpace, r: f64) -> Result<f64> {
    let profile = conformal_factor(space)?;
    green_function_on(&profile, r)
}

pub fn green_function_on(profile: &RadialProfile, r: f64) -> Result<f64> {
    let domain = profile.domain;
    domain.check(r)?;
    let integrand = |s: f64| profile.green_function_derivative(s);
    let r_ref = domain.reference_point();
    match &profile.family {
        Family::TypeI(p) if p.kappa == 0.0 && domain.hi.is_infinite() => {
            // tail ∫_r^∞ in u = ln(s/r); the integrand decays like e^{-βu}
            let b = p.beta.value();
            let u_max = (60.0 / b).min(700.0);
            let tail = integrate_adaptive(
                |u: f64| {
                    let s = r * u.exp();
                    s * integrand(s)
                },
                0.0,
                u_max,
                GREEN_REL_TOL,
                GREEN_ABS_TOL,
            )?;
            Ok(-tail)
        }
        Family::TypeI(_) => integrate_adaptive(integrand, r_ref, r, GREEN_REL_TOL, GREEN_ABS_TOL),
        Family::TypeII(p) => {
            let d_ref = profile.type_ii_d(r_ref).expect("type II");
            let t = type_ii_parts(p, r_ref);
            let anchor = -t.m.signum() * d_ref.sqrt() / p.gamma.value();
            let delta = integrate_adaptive(integrand, r_ref, r, GREEN_REL_TOL, GREEN_ABS_TOL)?;
            Ok(anchor + delta)
        }
    }
}

/// Intrinsic Kepler–Coulomb and oscillator potentials `(c·U, c/U²)`, where
/// `c` is the space's own coupling constant.
pub fn intrinsic_potentials(space: &BertrandSpace, r: f64) -> Result<(f64, f64)> {
    let u = green_function(space, r)?;
    let c = space.family.coupling();
    if u == 0.0 {
        return Err(Error::DivisionByZero(format!(
            "Green function vanishes at r = {r}; oscillator potential undefined"
        )));
    }
    Ok((c * u, c / (u * u)))
}

/// Coefficient `V_t` in the time part `-dt² / V_t` of the Lorentzian metric.
pub fn lorentzian_time_coefficient(space: &BertrandSpace, r: f64) -> Result<f64> {
    let profile = conformal_factor(space)?;
    profile.domain.check(r)?;
    let coef = match &space.family {
        Family::TypeI(p) => {
            let b = p.beta.value();
            (rpow(r, -b) - p.kappa * rpow(r, b)) + p.xi
        }
        Family::TypeII(p) => {
            let d = profile.type_ii_d(r).expect("type II");
            if d == 0.0 {
                return Err(Error::DivisionByZero(format!("D(r) = 0 at r = {r}")));
            }
            1.0 / d + p.chi
        }
    };
    if coef == 0.0 {
        return Err(Error::DivisionByZero(format!(
            "time coefficient vanishes at r = {r}"
        )));
    }
    Ok(coef)
}

/// Spatial and temporal metric components `(f², -1/V_t)` at `r`.
pub fn metric_components(space: &BertrandSpace, r: f64) -> Result<(f64, f64)> {
    let coef = lorentzian_time_coefficient(space, r)?;
    let profile = conformal_factor(space)?;
    Ok((profile.f_squared(r), -1.0 / coef))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn type_i(beta: (u32, u32), kappa: f64) -> BertrandSpace {
        BertrandSpace::type_i(
            3,
            TypeIParams {
                beta: RationalExponent::new(beta.0, beta.1).unwrap(),
                kappa,
                xi: 0.0,
                coupling_a: 1.0,
            },
        )
        .unwrap()
    }

    fn type_ii(gamma: (u32, u32), lambda_sq: f64, delta: f64) -> BertrandSpace {
        BertrandSpace::type_ii(
            3,
            TypeIIParams {
                gamma: RationalExponent::new(gamma.0, gamma.1).unwrap(),
                lambda_sq,
                delta,
                chi: 0.0,
                coupling_b: 1.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn rational_exponent_reduces_and_parses() {
        let e = RationalExponent::new(6, 4).unwrap();
        assert_eq!((e.num(), e.den()), (3, 2));
        assert_eq!("3/2".parse::<RationalExponent>().unwrap(), e);
        assert_eq!("1.5".parse::<RationalExponent>().unwrap(), e);
        assert_eq!(e.halved(), RationalExponent::new(3, 4).unwrap());
        assert_eq!(e.halved().doubled(), e);
        assert!(RationalExponent::new(0, 1).is_err());
        assert!("-1".parse::<RationalExponent>().is_err());
    }

    #[test]
    fn flat_type_i_is_exactly_one() {
        let p = conformal_factor(&type_i((1, 1), 0.0)).unwrap();
        for r in [0.01, 0.3, 1.0, 7.0, 123.456] {
            assert_eq!(p.f(r), 1.0);
            assert_eq!(p.f_prime(r), 0.0);
            assert_eq!(p.f_double_prime(r), 0.0);
        }
        assert_eq!(p.domain(), RadialDomain { lo: 0.0, hi: f64::INFINITY });
    }

    #[test]
    fn darboux_iii_value_at_one() {
        let p = conformal_factor(&type_ii((1, 1), 0.0, 0.1)).unwrap();
        assert!((p.f_squared(1.0) - 0.8).abs() < 1e-15);
        assert!((p.f(1.0) - 0.894_427_190_999_915_9).abs() < 1e-15);
        assert!((p.domain().hi - 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn taub_nut_factor() {
        // kinetic coefficient r/(2(1-2δr)) = 1/(2f²)
        let p = conformal_factor(&type_ii((1, 2), 0.0, 0.1)).unwrap();
        assert!((p.f_squared(2.0) - 0.6 / 2.0).abs() < 1e-15);
        assert!((p.kinetic_coefficient(2.0) - 2.0 / (2.0 * 0.6)).abs() < 1e-14);
        assert!((p.domain().hi - 5.0).abs() < 1e-12);
    }

    #[test]
    fn negative_kappa_window_prefers_r_one() {
        // breakpoint at r = 10^{1/2} > 1: window (0, √10)
        let p = conformal_factor(&type_i((1, 1), -0.1)).unwrap();
        assert_eq!(p.domain().lo, 0.0);
        assert!((p.domain().hi - 10f64.sqrt()).abs() < 1e-13);
        // breakpoint below 1: the outer window contains r = 1
        let p = conformal_factor(&type_i((1, 1), -4.0)).unwrap();
        assert!((p.domain().lo - 0.5).abs() < 1e-15);
        assert!(p.domain().hi.is_infinite());
        assert!(p.f(1.0) > 0.0);
    }

    #[test]
    fn sphere_oscillator_removable_point_bounds_window() {
        let lambda: f64 = 0.1;
        let p = conformal_factor(&type_ii((1, 1), lambda * lambda, lambda)).unwrap();
        assert!((p.domain().hi - 10f64.sqrt()).abs() < 1e-12);
        for r in [0.2, 1.0, 2.5, 3.0] {
            let expected = 1.0 / (1.0 + lambda * r * r);
            assert!((p.f(r) - expected).abs() < 1e-12 * expected, "r = {r}");
        }
    }

    #[test]
    fn non_finite_parameters_have_empty_domain() {
        let s = type_i((1, 1), f64::NAN);
        assert!(matches!(conformal_factor(&s), Err(Error::EmptyDomain(_))));
    }

    #[test]
    fn curvature_outside_domain_is_rejected() {
        let s = type_ii((1, 1), 0.0, 0.1);
        assert!(matches!(
            scalar_curvature(&s, 3.0),
            Err(Error::DomainViolation { .. })
        ));
    }

    #[test]
    fn lorentzian_coefficients() {
        let mut s = type_i((1, 1), 0.2);
        assert!((lorentzian_time_coefficient(&s, 1.0).unwrap() - 0.8).abs() < 1e-15);
        let flat_osc = type_ii((1, 1), 0.0, 0.0);
        assert!((lorentzian_time_coefficient(&flat_osc, 2.0).unwrap() - 4.0).abs() < 1e-14);
        // β = 1, κ = 0, ξ = -1: V_t = 1/r - 1 vanishes at r = 1
        if let Family::TypeI(p) = &mut s.family {
            p.kappa = 0.0;
            p.xi = -1.0;
        }
        assert!(matches!(
            lorentzian_time_coefficient(&s, 1.0),
            Err(Error::DivisionByZero(_))
        ));
    }

    #[test]
    fn flat_contraction_limit_recovers_minkowski_time() {
        for eps in [1e-2, 1e-4, 1e-6] {
            let s = BertrandSpace::type_i(
                3,
                TypeIParams {
                    beta: RationalExponent::integer(1).unwrap(),
                    kappa: 0.0,
                    xi: 1.0 / (eps * eps),
                    coupling_a: 1.0,
                },
            )
            .unwrap();
            for r in [0.5, 1.0, 4.0] {
                let (gs, gt) = metric_components(&s, r).unwrap();
                assert_eq!(gs, 1.0);
                // t -> t/ε rescales g_tt by 1/ε²
                let g_tt = gt / (eps * eps);
                assert!((g_tt + 1.0).abs() < 2.0 * eps * eps / r, "eps {eps} r {r}: {g_tt}");
            }
        }
    }

    #[test]
    fn green_function_flat_kc_is_minus_one_over_r() {
        let s = type_i((1, 1), 0.0);
        for r in [0.1, 0.5, 1.0, 3.0, 20.0] {
            let u = green_function(&s, r).unwrap();
            assert!((u + 1.0 / r).abs() < 1e-11 * (1.0 / r), "r {r}: {u}");
        }
    }

    #[test]
    fn intrinsic_potentials_flat_cases() {
        let s = type_i((1, 1), 0.0);
        let (kc, _) = intrinsic_potentials(&s, 2.0).unwrap();
        assert!((kc + 0.5).abs() < 1e-12);
        let s = type_ii((1, 1), 0.0, 0.0);
        let (_, osc) = intrinsic_potentials(&s, 2.0).unwrap();
        assert!((osc - 4.0).abs() < 1e-11);
    }

    #[test]
    fn green_function_zero_at_reference_is_division_by_zero() {
        let s = type_i((1, 1), 0.1);
        assert!(matches!(
            intrinsic_potentials(&s, 1.0),
            Err(Error::DivisionByZero(_))
        ));
    }
}
