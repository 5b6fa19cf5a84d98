//! Classical motion under `H = p²/(2f²) + V(r)`.
//!
//! The radial reduction uses `V_eff(r) = L² K(r)/r² + V(r)` with the kinetic
//! coefficient `K = 1/(2f²)`; along an orbit `dr/dt = 2K p_r` and
//! `dφ/dt = 2K L / r²`, so `dφ/dr = L / (r² p_r)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{conformal_factor, BertrandSpace, RadialProfile};
use crate::ode::{Dop853, IntegrationStats, OdeSystem};
use crate::quadrature::GaussLegendre;

/// Cartesian position and conjugate momentum in N dimensions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasePoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.len() != p.len() || q.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "position has {} components, momentum {}",
                q.len(),
                p.len()
            )));
        }
        Ok(Self { q, p })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn radius(&self) -> f64 {
        norm(&self.q)
    }

    fn to_flat(&self) -> Vec<f64> {
        let mut y = self.q.clone();
        y.extend_from_slice(&self.p);
        y
    }

    fn from_flat(y: &[f64]) -> Self {
        let n = y.len() / 2;
        Self {
            q: y[..n].to_vec(),
            p: y[n..].to_vec(),
        }
    }

    pub fn distance(&self, other: &PhasePoint) -> f64 {
        self.q
            .iter()
            .zip(&other.q)
            .chain(self.p.iter().zip(&other.p))
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Sampled trajectory with relative drift of `H` and `L²` at each sample.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub energy_drift: Vec<f64>,
    pub l2_drift: Vec<f64>,
    #[serde(skip)]
    pub stats: IntegrationStats,
}

impl Trajectory {
    pub fn max_energy_drift(&self) -> f64 {
        self.energy_drift.iter().fold(0.0, |m, &d| m.max(d))
    }

    pub fn max_l2_drift(&self) -> f64 {
        self.l2_drift.iter().fold(0.0, |m, &d| m.max(d))
    }

    pub fn last(&self) -> &PhasePoint {
        self.states.last().expect("trajectory has at least one sample")
    }
}

/// Energy, angular momentum, turning radii and apsidal angle of a bounded orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialOrbitData {
    pub energy: f64,
    pub l2: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub apsidal_angle: f64,
    pub radial_period: f64,
}

/// Hamiltonian vector field of a Bertrand space on the flat state `[q, p]`.
#[derive(Debug, Clone, Copy)]
pub struct HamiltonianSystem {
    profile: RadialProfile,
    dim: usize,
}

impl HamiltonianSystem {
    pub fn new(space: &BertrandSpace) -> Result<Self> {
        Ok(Self {
            profile: conformal_factor(space)?,
            dim: space.dim,
        })
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    fn check_state(&self, state: &PhasePoint) -> Result<f64> {
        if state.dim() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "state has dimension {}, space has N = {}",
                state.dim(),
                self.dim
            )));
        }
        let r = state.radius();
        self.profile.domain().check(r)?;
        Ok(r)
    }

    pub fn energy(&self, state: &PhasePoint) -> Result<f64> {
        let r = self.check_state(state)?;
        Ok(self.profile.kinetic_coefficient(r) * dot(&state.p, &state.p) + self.profile.potential(r))
    }

    /// `dq/dt = 2K p`, `dp/dt = -(K' p² + V') q / r` with `K' = -2K (ln f)'`.
    fn vector_field(&self, q: &[f64], p: &[f64], dq: &mut [f64], dp: &mut [f64]) -> bool {
        let r = norm(q);
        if !self.profile.domain().contains(r) {
            return false;
        }
        let k = self.profile.kinetic_coefficient(r);
        let (g1, _) = self.profile.log_derivatives(r);
        let dk = -2.0 * k * g1;
        let dv = self.profile.potential_prime(r);
        let p2 = dot(p, p);
        let radial = -(dk * p2 + dv) / r;
        for i in 0..q.len() {
            dq[i] = 2.0 * k * p[i];
            dp[i] = radial * q[i];
        }
        dq.iter().chain(dp.iter()).all(|v| v.is_finite())
    }

    pub fn effective_potential(&self, l2: f64, r: f64) -> f64 {
        l2 * self.profile.kinetic_coefficient(r) / (r * r) + self.profile.potential(r)
    }

    /// `p_r² = (E - V)/K - L²/r²`.
    fn radial_momentum_sq(&self, energy: f64, l2: f64, r: f64) -> f64 {
        (energy - self.profile.potential(r)) / self.profile.kinetic_coefficient(r) - l2 / (r * r)
    }
}

impl OdeSystem for HamiltonianSystem {
    fn dim(&self) -> usize {
        2 * self.dim
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> bool {
        let n = self.dim;
        let (q, p) = y.split_at(n);
        let (dq, dp) = dy.split_at_mut(n);
        self.vector_field(q, p, dq, dp)
    }
}

pub fn hamiltonian(space: &BertrandSpace, state: &PhasePoint) -> Result<f64> {
    HamiltonianSystem::new(space)?.energy(state)
}

pub fn equations_of_motion(space: &BertrandSpace, state: &PhasePoint) -> Result<(Vec<f64>, Vec<f64>)> {
    let sys = HamiltonianSystem::new(space)?;
    sys.check_state(state)?;
    let n = state.dim();
    let mut dq = vec![0.0; n];
    let mut dp = vec![0.0; n];
    if !sys.vector_field(&state.q, &state.p, &mut dq, &mut dp) {
        return Err(Error::DomainViolation {
            r: state.radius(),
            lo: sys.profile.domain().lo,
            hi: sys.profile.domain().hi,
        });
    }
    Ok((dq, dp))
}

/// Angular momentum bivector `L_ij = q_i p_j - q_j p_i` and `L² = ½ Σ L_ij²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngularMomentum {
    pub tensor: Vec<Vec<f64>>,
    pub l2: f64,
}

pub fn angular_momentum(state: &PhasePoint) -> AngularMomentum {
    let n = state.dim();
    let mut tensor = vec![vec![0.0; n]; n];
    let mut l2 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let l = state.q[i] * state.p[j] - state.q[j] * state.p[i];
            tensor[i][j] = l;
            if i < j {
                l2 += l * l;
            }
        }
    }
    AngularMomentum { tensor, l2 }
}

fn relative_drift(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        value.abs()
    } else {
        ((value - reference) / reference).abs()
    }
}

/// Integrates Hamilton's equations to `t_end` with local tolerance `tol`.
pub fn integrate(space: &BertrandSpace, initial: &PhasePoint, t_end: f64, tol: f64) -> Result<Trajectory> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let sys = HamiltonianSystem::new(space)?;
    integrate_system(&sys, initial, t_end, tol)
}

fn integrate_system(sys: &HamiltonianSystem, initial: &PhasePoint, t_end: f64, tol: f64) -> Result<Trajectory> {
    let e0 = sys.energy(initial)?;
    let l0 = angular_momentum(initial).l2;
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        energy_drift: Vec::new(),
        l2_drift: Vec::new(),
        stats: IntegrationStats::default(),
    };
    let stepper = Dop853::new(tol);
    let stats = stepper.integrate(sys, 0.0, &initial.to_flat(), t_end, |t, y| {
        let state = PhasePoint::from_flat(y);
        let r = state.radius();
        let e = sys.profile.kinetic_coefficient(r) * dot(&state.p, &state.p) + sys.profile.potential(r);
        let l2 = angular_momentum(&state).l2;
        traj.times.push(t);
        traj.energy_drift.push(relative_drift(e, e0));
        traj.l2_drift.push(relative_drift(l2, l0));
        traj.states.push(state);
    })?;
    traj.stats = stats;
    Ok(traj)
}

pub fn effective_potential(space: &BertrandSpace, l2: f64, r: f64) -> Result<f64> {
    let sys = HamiltonianSystem::new(space)?;
    sys.profile.domain().check(r)?;
    Ok(sys.effective_potential(l2, r))
}

const SCAN_POINTS: usize = 4000;

/// Log-spaced scan radii covering the domain.
fn scan_radii(sys: &HamiltonianSystem) -> Vec<f64> {
    let d = sys.profile.domain();
    let r_ref = d.reference_point();
    let lo = if d.lo > 0.0 { d.lo * (1.0 + 1e-9) } else { 1e-9 * r_ref.min(d.hi) };
    let hi = if d.hi.is_finite() { d.hi * (1.0 - 1e-9) } else { 1e9 * r_ref };
    let (a, b) = (lo.ln(), hi.ln());
    (0..SCAN_POINTS)
        .map(|i| (a + (b - a) * i as f64 / (SCAN_POINTS - 1) as f64).exp())
        .filter(|r| d.contains(*r))
        .collect()
}

/// Golden-section refinement of a minimum bracketed by `[a, b]`.
fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Bisection for a sign change of `f` on `[a, b]`.
fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= 1e-15 * m.abs() {
            return m;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

const RULE_LEVELS: usize = 8;

/// Gauss–Legendre rule with `32·2^level` nodes, built once per process.
fn gauss_rule(level: usize) -> &'static GaussLegendre {
    static RULES: [OnceLock<GaussLegendre>; RULE_LEVELS] = [const { OnceLock::new() }; RULE_LEVELS];
    RULES[level].get_or_init(|| GaussLegendre::new(32 << level))
}

impl HamiltonianSystem {
    /// Minimum of `V_eff` over the domain scan, refined by golden section.
    fn well_bottom(&self, l2: f64) -> Option<(f64, f64)> {
        let radii = scan_radii(self);
        let values: Vec<f64> = radii.iter().map(|&r| self.effective_potential(l2, r)).collect();
        let (imin, _) = values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())?;
        let a = radii[imin.saturating_sub(1)];
        let b = radii[(imin + 1).min(radii.len() - 1)];
        Some(golden_min(|r| self.effective_potential(l2, r), a, b))
    }

    fn turning_points(&self, energy: f64, l2: f64) -> Result<(f64, f64)> {
        let no_orbit = Error::NoBoundedOrbit { energy, l2 };
        let radii = scan_radii(self);
        let (r_star, v_min) = self.well_bottom(l2).ok_or(no_orbit.clone())?;
        let gap = energy - v_min;
        let scale = energy.abs().max(v_min.abs()).max(1e-300);
        if gap.abs() <= 1e-10 * scale {
            return Err(Error::DegenerateOrbit { energy, l2 });
        }
        if gap < 0.0 {
            return Err(no_orbit);
        }
        let excess = |r: f64| energy - self.effective_potential(l2, r);
        let split = radii.partition_point(|&r| r < r_star);
        let left = radii[..split].iter().rev().find(|&&r| excess(r) < 0.0).copied();
        let right = radii[split..].iter().find(|&&r| excess(r) < 0.0).copied();
        let (Some(left), Some(right)) = (left, right) else {
            return Err(no_orbit);
        };
        let r_minus = bisect(excess, left, r_star);
        let r_plus = bisect(excess, r_star, right);
        if r_plus - r_minus <= 1e-8 * r_star {
            return Err(Error::DegenerateOrbit { energy, l2 });
        }
        Ok((r_minus, r_plus))
    }

    /// `∫ g(r) / p_r(r) dr` between the turning points via
    /// `r = m + h sin θ`, which removes the inverse-square-root endpoints.
    fn turning_point_integral<G: Fn(f64) -> f64>(
        &self,
        energy: f64,
        l2: f64,
        r_minus: f64,
        r_plus: f64,
        g: G,
    ) -> Result<f64> {
        let mid = 0.5 * (r_plus + r_minus);
        let half = 0.5 * (r_plus - r_minus);
        // Residual values at the located roots are subtracted linearly so the
        // integrand sees exact zeros at both ends.
        let eps_minus = self.radial_momentum_sq(energy, l2, r_minus);
        let eps_plus = self.radial_momentum_sq(energy, l2, r_plus);
        let eval = |level: usize| {
            gauss_rule(level).integrate(
                |theta: f64| {
                    let (s, c) = theta.sin_cos();
                    let r = mid + half * s;
                    let lin = 0.5 * (eps_minus * (1.0 - s) + eps_plus * (1.0 + s));
                    let pr = (self.radial_momentum_sq(energy, l2, r) - lin).abs().sqrt();
                    g(r) * half * c / pr
                },
                -0.5 * PI,
                0.5 * PI,
            )
        };
        // The integrand is analytic in θ; refinement stops at the first
        // agreement, otherwise the best-agreeing pair wins if it is close.
        let mut prev = eval(0);
        let mut best = (f64::INFINITY, prev);
        for level in 1..RULE_LEVELS {
            let next = eval(level);
            let diff = (next - prev).abs() / next.abs().max(1.0);
            if diff <= 1e-12 {
                return Ok(next);
            }
            if diff < best.0 {
                best = (diff, next);
            }
            prev = next;
        }
        if best.0 <= 1e-9 {
            return Ok(best.1);
        }
        Err(Error::QuadratureFailure(format!(
            "turning-point integral unresolved for E = {energy}, L^2 = {l2}"
        )))
    }

    pub fn orbit_data(&self, energy: f64, l2: f64) -> Result<RadialOrbitData> {
        let (r_min, r_max) = self.turning_points(energy, l2)?;
        let l = l2.sqrt();
        let apsidal = self.turning_point_integral(energy, l2, r_min, r_max, |r| l / (r * r))?;
        let half_period = self.turning_point_integral(energy, l2, r_min, r_max, |r| {
            0.5 / self.profile.kinetic_coefficient(r)
        })?;
        Ok(RadialOrbitData {
            energy,
            l2,
            r_min,
            r_max,
            apsidal_angle: apsidal,
            radial_period: 2.0 * half_period,
        })
    }
}

pub fn turning_points(space: &BertrandSpace, energy: f64, l2: f64) -> Result<(f64, f64)> {
    HamiltonianSystem::new(space)?.turning_points(energy, l2)
}

/// Azimuth swept between consecutive pericentre and apocentre.
pub fn apsidal_angle(space: &BertrandSpace, energy: f64, l2: f64) -> Result<f64> {
    Ok(orbit_data(space, energy, l2)?.apsidal_angle)
}

pub fn orbit_data(space: &BertrandSpace, energy: f64, l2: f64) -> Result<RadialOrbitData> {
    HamiltonianSystem::new(space)?.orbit_data(energy, l2)
}

/// Planar initial condition at the pericentre of the orbit `(E, L²)`.
pub fn pericentre_state(space: &BertrandSpace, energy: f64, l2: f64) -> Result<PhasePoint> {
    let (r_min, _) = turning_points(space, energy, l2)?;
    let mut q = vec![0.0; space.dim];
    let mut p = vec![0.0; space.dim];
    q[0] = r_min;
    p[1] = l2.sqrt() / r_min;
    PhasePoint::new(q, p)
}

/// Circular orbit through radius `r0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircularOrbit {
    pub r0: f64,
    pub l2: f64,
    pub energy: f64,
    pub stable: bool,
    /// `V_eff''(r0)`.
    pub curvature: f64,
}

pub fn circular_orbit(space: &BertrandSpace, r0: f64) -> Result<CircularOrbit> {
    let sys = HamiltonianSystem::new(space)?;
    let prof = sys.profile;
    prof.domain().check(r0)?;
    let k = prof.kinetic_coefficient(r0);
    let (g1, g2) = prof.log_derivatives(r0);
    // φ = K/r² = ½ e^{-2h}, h = ln(f r)
    let h1 = g1 + 1.0 / r0;
    let h2 = g2 - 1.0 / (r0 * r0);
    let phi = k / (r0 * r0);
    let dphi = -2.0 * h1 * phi;
    let ddphi = (4.0 * h1 * h1 - 2.0 * h2) * phi;
    let l2 = -prof.potential_prime(r0) / dphi;
    if !(l2 >= 0.0 && l2.is_finite()) {
        return Err(Error::NoCircularOrbit { r0, l2 });
    }
    let energy = sys.effective_potential(l2, r0);
    let curvature = l2 * ddphi + prof.potential_double_prime(r0);
    Ok(CircularOrbit {
        r0,
        l2,
        energy,
        stable: curvature > 0.0,
        curvature,
    })
}

/// Planar initial condition on the circular orbit through `r0`.
pub fn circular_state(space: &BertrandSpace, r0: f64) -> Result<PhasePoint> {
    let c = circular_orbit(space, r0)?;
    let mut q = vec![0.0; space.dim];
    let mut p = vec![0.0; space.dim];
    q[0] = r0;
    p[1] = c.l2.sqrt() / r0;
    PhasePoint::new(q, p)
}

/// Smallest-denominator `p/q` with `q <= cap` and `|x - p/q| <= tol`.
pub fn rational_approximation(x: f64, cap: u32, tol: f64) -> Option<(u64, u32)> {
    (1..=cap).find_map(|q| {
        let p = (x * q as f64).round();
        (p >= 0.0 && (x - p / q as f64).abs() <= tol).then_some((p as u64, q))
    })
}

pub const CLOSURE_DENOMINATOR_CAP: u32 = 32;
const RATIONAL_TOL: f64 = 1e-7;
const CLOSURE_INTEGRATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosureReport {
    pub closed: bool,
    pub radial_periods: u32,
    /// Numerator of `Δφ/π ≈ p/q`.
    pub winding: u64,
    pub return_distance: f64,
    pub orbit: RadialOrbitData,
}

/// Integrates through the `q` radial periods implied by `Δφ/π ≈ p/q` and
/// measures the phase-space distance back to the start.
pub fn closure_check(space: &BertrandSpace, initial: &PhasePoint, tol: f64) -> Result<ClosureReport> {
    let sys = HamiltonianSystem::new(space)?;
    let energy = sys.energy(initial)?;
    let l2 = angular_momentum(initial).l2;
    let orbit = sys.orbit_data(energy, l2)?;
    let ratio = orbit.apsidal_angle / PI;
    let (winding, periods) = rational_approximation(ratio, CLOSURE_DENOMINATOR_CAP, RATIONAL_TOL)
        .ok_or(Error::NotClosedWithinCap {
            ratio,
            cap: CLOSURE_DENOMINATOR_CAP,
        })?;
    let traj = integrate_system(
        &sys,
        initial,
        periods as f64 * orbit.radial_period,
        CLOSURE_INTEGRATION_TOL,
    )?;
    let return_distance = traj.last().distance(initial);
    Ok(ClosureReport {
        closed: return_distance < tol,
        radial_periods: periods,
        winding,
        return_distance,
        orbit,
    })
}

/// Orthonormal basis of the orbital plane spanned by `q` and `p`.
fn orbit_plane(state: &PhasePoint) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = state.radius();
    let e1: Vec<f64> = state.q.iter().map(|x| x / r).collect();
    let along = dot(&state.p, &e1);
    let mut e2: Vec<f64> = state.p.iter().zip(&e1).map(|(p, e)| p - along * e).collect();
    let n2 = norm(&e2);
    if n2 <= 1e-14 * norm(&state.p).max(1e-300) {
        return Err(Error::InvalidParameter("radial motion has no orbital plane".into()));
    }
    e2.iter_mut().for_each(|x| *x /= n2);
    Ok((e1, e2))
}

fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Apsidal angle measured on an integrated trajectory: half the mean azimuth
/// advance between successive pericentre passages. Pericentres are sign
/// changes of `q·p` located by quadratic interpolation and polished with
/// secant iterations on single integrator steps.
pub fn measured_apsidal_angle(
    space: &BertrandSpace,
    initial: &PhasePoint,
    passages: usize,
    tol: f64,
) -> Result<f64> {
    let sys = HamiltonianSystem::new(space)?;
    let energy = sys.energy(initial)?;
    let l2 = angular_momentum(initial).l2;
    let orbit = sys.orbit_data(energy, l2)?;
    let t_end = (passages as f64 + 1.25) * orbit.radial_period;
    let traj = integrate_system(&sys, initial, t_end, tol)?;
    let (e1, e2) = orbit_plane(initial)?;
    let raw = |s: &PhasePoint| dot(&s.q, &e2).atan2(dot(&s.q, &e1));

    let mut unwrapped = Vec::with_capacity(traj.states.len());
    let mut acc = raw(&traj.states[0]);
    unwrapped.push(acc);
    for w in traj.states.windows(2) {
        acc += wrap_angle(raw(&w[1]) - raw(&w[0]));
        unwrapped.push(acc);
    }

    let stepper = Dop853::new(tol);
    let flat: Vec<Vec<f64>> = traj.states.iter().map(|s| s.to_flat()).collect();
    let radial = |s: &PhasePoint| dot(&s.q, &s.p);
    let sign: Vec<f64> = traj.states.iter().map(radial).collect();
    let mut peri_angles = Vec::new();
    for i in 0..sign.len().saturating_sub(1) {
        if !(sign[i] < 0.0 && sign[i + 1] >= 0.0) {
            continue;
        }
        let (t0, t1) = (traj.times[i], traj.times[i + 1]);
        let mut guess = t0 + (t1 - t0) * sign[i] / (sign[i] - sign[i + 1]);
        if i > 0 {
            if let Some(tq) = quadratic_root(
                [traj.times[i - 1], t0, t1],
                [sign[i - 1], sign[i], sign[i + 1]],
            ) {
                guess = tq;
            }
        }
        let at = |tau: f64| -> Option<PhasePoint> {
            stepper
                .single_step(&sys, t0, &flat[i], tau - t0)
                .map(|y| PhasePoint::from_flat(&y))
        };
        let (mut a, mut fa) = (t0, sign[i]);
        let mut b = guess.clamp(t0, t1);
        let mut state_b = at(b).ok_or(Error::StepSizeUnderflow { t: b, h: b - t0 })?;
        let mut fb = radial(&state_b);
        for _ in 0..40 {
            if fb == 0.0 || (b - a).abs() <= 1e-15 * b.abs().max(1.0) {
                break;
            }
            let next = b - fb * (b - a) / (fb - fa);
            if !next.is_finite() {
                break;
            }
            a = b;
            fa = fb;
            b = next.clamp(t0, t1);
            state_b = at(b).ok_or(Error::StepSizeUnderflow { t: b, h: b - t0 })?;
            fb = radial(&state_b);
        }
        let angle = unwrapped[i] + wrap_angle(raw(&state_b) - raw(&traj.states[i]));
        peri_angles.push(angle);
    }
    if peri_angles.len() < 2 {
        return Err(Error::NoBoundedOrbit { energy, l2 });
    }
    let advances: Vec<f64> = peri_angles.windows(2).map(|w| 0.5 * (w[1] - w[0])).collect();
    Ok(advances.iter().sum::<f64>() / advances.len() as f64)
}

/// Root in `[x1, x2]` of the parabola through three samples.
fn quadratic_root(x: [f64; 3], y: [f64; 3]) -> Option<f64> {
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let c2 = (d12 - d01) / (x[2] - x[0]);
    // y(t) = y1 + b (t - x1) + c2 (t - x1)(t - x2)
    let b = d12;
    let (qa, qb, qc) = (c2, b - c2 * (x[2] - x[1]), y[1]);
    let s = if qa.abs() < 1e-300 {
        -qc / qb
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let r1 = (-qb + sq) / (2.0 * qa);
        let r2 = (-qb - sq) / (2.0 * qa);
        let span = x[2] - x[1];
        if (0.0..=span).contains(&r1) {
            r1
        } else {
            r2
        }
    };
    let t = x[1] + s;
    (t >= x[1] && t <= x[2]).then_some(t)
}

/// `(E, L²)` pairs of bounded orbits: `L²` from circular orbits at `radii`,
/// `E` at the given `fractions` of the way from the well bottom to the
/// lower rim of the effective-potential well (capped at `|E_c| + 1` above
/// the bottom when the well is unbounded).
pub fn bounded_orbit_grid(space: &BertrandSpace, radii: &[f64], fractions: &[f64]) -> Result<Vec<(f64, f64)>> {
    let sys = HamiltonianSystem::new(space)?;
    let scan = scan_radii(&sys);
    let mut out = Vec::with_capacity(radii.len() * fractions.len());
    for &r0 in radii {
        let c = circular_orbit(space, r0)?;
        let veff = |r: f64| sys.effective_potential(c.l2, r);
        let left_rim = scan.iter().filter(|&&r| r < r0).map(|&r| veff(r)).fold(f64::NEG_INFINITY, f64::max);
        let right_rim = scan.iter().filter(|&&r| r > r0).map(|&r| veff(r)).fold(f64::NEG_INFINITY, f64::max);
        let rim = left_rim.min(right_rim);
        let top = rim.min(c.energy + c.energy.abs() + 1.0);
        for &s in fractions {
            out.push((c.energy + s * (top - c.energy), c.l2));
        }
    }
    Ok(out)
}
