//! Radial eigenproblems for three quantizations of `H = p²/(2f²) + V`.
//!
//! Every scheme is discretized from the weak form
//! `∫ [ħ²/2 · p ψ'² + q ψ²] dr = E ∫ w ψ² dr` in a computational variable
//! `s` (`s = r` or `s = ln r`) with nodes equally spaced in `s`, midpoint
//! values of `p`, and Dirichlet conditions at both ends of the grid. This
//! gives a symmetric tridiagonal stiffness matrix and a diagonal mass.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{conformal_factor, BertrandSpace, Family, RadialProfile};
use crate::parallel;
use crate::tridiag::{GeneralizedTridiagonal, SymTridiagonal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantizationScheme {
    /// Position factors ordered to the left of `p̂²`.
    #[serde(alias = "direct")]
    DirectSchrodinger,
    #[serde(alias = "lb")]
    LaplaceBeltrami,
    /// Laplace–Beltrami shifted by the conformal curvature term.
    #[serde(alias = "clb")]
    ConformalLB,
}

impl QuantizationScheme {
    pub const ALL: [QuantizationScheme; 3] = [
        QuantizationScheme::DirectSchrodinger,
        QuantizationScheme::LaplaceBeltrami,
        QuantizationScheme::ConformalLB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QuantizationScheme::DirectSchrodinger => "direct-schrodinger",
            QuantizationScheme::LaplaceBeltrami => "laplace-beltrami",
            QuantizationScheme::ConformalLB => "conformal-lb",
        }
    }

    /// Powers of `f` in the kinetic coefficient and in the mass weight.
    fn exponents(self, dim: usize) -> (i32, i32) {
        match self {
            QuantizationScheme::DirectSchrodinger => (0, 2),
            _ => (dim as i32 - 2, dim as i32),
        }
    }
}

impl fmt::Display for QuantizationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QuantizationScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "direct" | "direct-schrodinger" | "directschrodinger" => Ok(Self::DirectSchrodinger),
            "lb" | "laplace-beltrami" | "laplacebeltrami" => Ok(Self::LaplaceBeltrami),
            "clb" | "conformal-lb" | "conformallb" => Ok(Self::ConformalLB),
            other => Err(Error::InvalidParameter(format!(
                "unknown quantization scheme `{other}` (expected direct, lb or clb)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Uniform,
    Logarithmic,
}

impl FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Spacing::Uniform),
            "log" | "logarithmic" => Ok(Spacing::Logarithmic),
            other => Err(Error::InvalidParameter(format!("unknown grid spacing `{other}`"))),
        }
    }
}

pub const MIN_NODES: usize = 64;
/// Offset of the grid ends from the origin and from a finite domain edge.
pub const EDGE_OFFSET: f64 = 1e-6;
pub const TYPE_I_BOX: f64 = 200.0;
pub const TYPE_II_BOX: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_start: f64,
    pub r_end: f64,
    pub n_nodes: usize,
    pub spacing: Spacing,
}

impl RadialGrid {
    pub fn new(r_start: f64, r_end: f64, n_nodes: usize, spacing: Spacing) -> Result<Self> {
        if n_nodes < MIN_NODES {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {MIN_NODES} nodes, got {n_nodes}"
            )));
        }
        if !(r_start > 0.0 && r_end > r_start && r_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid ends must satisfy 0 < r_start < r_end < inf, got [{r_start}, {r_end}]"
            )));
        }
        Ok(Self {
            r_start,
            r_end,
            n_nodes,
            spacing,
        })
    }

    /// Default grid: just inside the domain at the origin side, just inside a
    /// finite edge or at a box radius otherwise; logarithmic for Type I.
    pub fn for_space(space: &BertrandSpace, n_nodes: usize) -> Result<Self> {
        let profile = conformal_factor(space)?;
        let d = profile.domain();
        let (spacing, reach) = match space.family {
            Family::TypeI(_) => (Spacing::Logarithmic, TYPE_I_BOX),
            // f blows up at the origin when γ < 1
            Family::TypeII(p) if p.gamma.value() < 1.0 => (Spacing::Logarithmic, TYPE_II_BOX),
            Family::TypeII(_) => (Spacing::Uniform, TYPE_II_BOX),
        };
        let r_start = d.lo + EDGE_OFFSET;
        let r_end = if d.hi.is_finite() { d.hi - EDGE_OFFSET } else { d.lo + reach };
        Self::new(r_start, r_end, n_nodes, spacing)
    }

    pub fn with_nodes(&self, n_nodes: usize) -> Result<Self> {
        Self::new(self.r_start, self.r_end, n_nodes, self.spacing)
    }

    /// Grid with half the spacing; its nodes contain the current ones.
    pub fn refined(&self) -> Self {
        Self {
            n_nodes: 2 * self.n_nodes - 1,
            ..*self
        }
    }

    fn to_s(&self, r: f64) -> f64 {
        match self.spacing {
            Spacing::Uniform => r,
            Spacing::Logarithmic => r.ln(),
        }
    }

    fn to_r(&self, s: f64) -> f64 {
        match self.spacing {
            Spacing::Uniform => s,
            Spacing::Logarithmic => s.exp(),
        }
    }

    /// `dr/ds`.
    fn jacobian(&self, r: f64) -> f64 {
        match self.spacing {
            Spacing::Uniform => 1.0,
            Spacing::Logarithmic => r,
        }
    }

    /// `∫ r^{-a} ds` over the cell `[r0, r1]`.
    fn inverse_power_integral(&self, a: i32, r0: f64, r1: f64) -> f64 {
        let af = a as f64;
        match (self.spacing, a) {
            (Spacing::Uniform, 1) => (r1 / r0).ln(),
            (Spacing::Uniform, _) => (r0.powi(1 - a) - r1.powi(1 - a)) / (af - 1.0),
            (Spacing::Logarithmic, 0) => (r1 / r0).ln(),
            (Spacing::Logarithmic, _) => (r0.powi(-a) - r1.powi(-a)) / af,
        }
    }

    pub fn step(&self) -> f64 {
        (self.to_s(self.r_end) - self.to_s(self.r_start)) / (self.n_nodes - 1) as f64
    }

    fn s_at(&self, i: f64) -> f64 {
        let (a, b) = (self.to_s(self.r_start), self.to_s(self.r_end));
        a + (b - a) * i / (self.n_nodes - 1) as f64
    }

    /// All nodes including both Dirichlet ends.
    pub fn nodes(&self) -> Vec<f64> {
        let n = self.n_nodes;
        let mut r: Vec<f64> = (0..n).map(|i| self.to_r(self.s_at(i as f64))).collect();
        r[0] = self.r_start;
        r[n - 1] = self.r_end;
        r
    }

    fn midpoints(&self) -> Vec<f64> {
        (0..self.n_nodes - 1).map(|i| self.to_r(self.s_at(i as f64 + 0.5))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
}

/// Discrete generalized problem `K ψ = E M ψ` on the interior grid nodes.
#[derive(Debug, Clone)]
pub struct RadialEigenproblem {
    pub scheme: QuantizationScheme,
    pub l: u32,
    pub dim: usize,
    pub hbar: f64,
    pub stiffness: SymTridiagonal,
    pub mass: Vec<f64>,
    pub grid: RadialGrid,
    /// Interior nodes (the unknowns).
    pub nodes: Vec<f64>,
}

impl RadialEigenproblem {
    /// `M⁻¹ K v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.stiffness
            .mul_vec(v)
            .into_iter()
            .zip(&self.mass)
            .map(|(k, m)| k / m)
            .collect()
    }
}

/// `(p, q, w)` of the weak form at radius `r`.
fn weak_form_coefficients(
    profile: &RadialProfile,
    scheme: QuantizationScheme,
    dim: usize,
    l: u32,
    hbar: f64,
    r: f64,
) -> (f64, f64, f64) {
    let (kin, pot) = scheme.exponents(dim);
    let n = dim as i32;
    let f = profile.f(r);
    let p = r.powi(n - 1) * f.powi(kin);
    let w = r.powi(n - 1) * f.powi(pot);
    let lf = l as f64;
    let centrifugal = 0.5 * hbar * hbar * lf * (lf + (dim as f64) - 2.0) * r.powi(n - 3) * f.powi(kin);
    let mut q = centrifugal + w * profile.potential(r);
    if scheme == QuantizationScheme::ConformalLB && dim > 2 {
        let nf = dim as f64;
        q += hbar * hbar * (nf - 2.0) * profile.curvature(dim, r) * w / (8.0 * (nf - 1.0));
    }
    (p, q, w)
}

pub fn build_radial_operator(
    space: &BertrandSpace,
    scheme: QuantizationScheme,
    l: u32,
    grid: &RadialGrid,
) -> Result<RadialEigenproblem> {
    let profile = conformal_factor(space)?;
    let domain = profile.domain();
    domain.check(grid.r_start)?;
    domain.check(grid.r_end)?;
    let hbar = space.hbar;
    let dim = space.dim;
    let r = grid.nodes();
    let mids = grid.midpoints();
    let ds = grid.step();
    let c = 0.5 * hbar * hbar / (ds * ds);
    // Cell coefficients are harmonic means of p/J over each cell with the
    // power of r integrated exactly, which resolves the origin layer.
    let power = match grid.spacing {
        Spacing::Uniform => dim as i32 - 1,
        Spacing::Logarithmic => dim as i32 - 2,
    };
    let p_mid: Vec<f64> = mids
        .iter()
        .enumerate()
        .map(|(j, &rm)| {
            let smooth = weak_form_coefficients(&profile, scheme, dim, l, hbar, rm).0
                / (grid.jacobian(rm) * rm.powi(power));
            smooth * ds / grid.inverse_power_integral(power, r[j], r[j + 1])
        })
        .collect();
    let m = grid.n_nodes - 2;
    let mut diag = Vec::with_capacity(m);
    let mut off = Vec::with_capacity(m - 1);
    let mut mass = Vec::with_capacity(m);
    for i in 1..=m {
        let (_, q, w) = weak_form_coefficients(&profile, scheme, dim, l, hbar, r[i]);
        let jac = grid.jacobian(r[i]);
        diag.push(c * (p_mid[i - 1] + p_mid[i]) + q * jac);
        mass.push(w * jac);
        if i < m {
            off.push(-c * p_mid[i]);
        }
    }
    if let Some(i) = mass.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::IllConditioned(format!(
            "mass weight {} at r = {}",
            mass[i],
            r[i + 1]
        )));
    }
    if !diag.iter().chain(&off).all(|v| v.is_finite()) {
        return Err(Error::IllConditioned("non-finite stiffness entry".into()));
    }
    Ok(RadialEigenproblem {
        scheme,
        l,
        dim,
        hbar,
        stiffness: SymTridiagonal::new(diag, off)?,
        mass,
        grid: *grid,
        nodes: r[1..=m].to_vec(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub scheme: QuantizationScheme,
    pub l: u32,
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
    /// Mass-orthonormal eigenvectors on `nodes`, sign fixed so the first
    /// significant component is positive.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    #[serde(skip)]
    pub nodes: Vec<f64>,
    pub grid: RadialGrid,
    pub boundary: BoundaryCondition,
}

impl Spectrum {
    pub fn without_vectors(mut self) -> Self {
        self.eigenvectors = None;
        self
    }
}

fn fix_sign(v: &mut [f64]) {
    let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-3 * peak) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Lowest `k` eigenpairs.
pub fn solve_spectrum(problem: &RadialEigenproblem, k: usize) -> Result<Spectrum> {
    let size = problem.mass.len();
    if k == 0 || k > size {
        return Err(Error::InvalidParameter(format!(
            "requested {k} eigenvalues from a problem of size {size}"
        )));
    }
    let solver = GeneralizedTridiagonal::new(&problem.stiffness, &problem.mass)?;
    let mut eigenvalues = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for i in 0..k {
        let e = solver.eigenvalue(i)?;
        if !e.is_finite() {
            return Err(Error::ConvergenceFailure(format!("eigenvalue {i} is {e}")));
        }
        let mut v = solver.eigenvector(e)?;
        fix_sign(&mut v);
        eigenvalues.push(e);
        vectors.push(v);
    }
    Ok(Spectrum {
        scheme: problem.scheme,
        l: problem.l,
        dim: problem.dim,
        eigenvalues,
        eigenvectors: Some(vectors),
        nodes: problem.nodes.clone(),
        grid: problem.grid,
        boundary: BoundaryCondition::Dirichlet,
    })
}

pub fn spectrum(
    space: &BertrandSpace,
    scheme: QuantizationScheme,
    l: u32,
    grid: &RadialGrid,
    k: usize,
) -> Result<Spectrum> {
    solve_spectrum(&build_radial_operator(space, scheme, l, grid)?, k)
}

/// Spectra for several `l` on a shared grid, solved concurrently.
pub fn spectra_over_l(
    space: &BertrandSpace,
    scheme: QuantizationScheme,
    ls: &[u32],
    grid: &RadialGrid,
    k: usize,
) -> Result<Vec<Spectrum>> {
    parallel::map(ls, |&l| spectrum(space, scheme, l, grid, k)).into_iter().collect()
}

/// Multiplies node values by `f^{(2-N)/2}`.
pub fn gauge_transform_eigenfunction(phi: &[f64], nodes: &[f64], profile: &RadialProfile, dim: usize) -> Vec<f64> {
    if dim == 2 {
        return phi.to_vec();
    }
    let e = (2.0 - dim as f64) / 2.0;
    phi.iter().zip(nodes).map(|(v, &r)| v * profile.f(r).powf(e)).collect()
}

/// Largest deviation between the `index`-th conformal eigenfunction and the
/// gauge-transformed direct one, relative to the sup norm of the former.
/// Both are unit vectors in their own mass norm and the gauge map is an
/// isometry between those norms, so only a global sign is aligned.
pub fn eigenfunction_gauge_error(
    direct: &Spectrum,
    conformal: &Spectrum,
    profile: &RadialProfile,
    index: usize,
) -> Result<f64> {
    if direct.nodes != conformal.nodes {
        return Err(Error::LengthMismatch("spectra live on different grids".into()));
    }
    let pick = |s: &Spectrum| -> Result<Vec<f64>> {
        s.eigenvectors
            .as_ref()
            .and_then(|v| v.get(index))
            .cloned()
            .ok_or_else(|| Error::LengthMismatch(format!("no eigenvector {index}")))
    };
    let mapped = gauge_transform_eigenfunction(&pick(direct)?, &direct.nodes, profile, direct.dim);
    let target = pick(conformal)?;
    let dot: f64 = mapped.iter().zip(&target).map(|(a, b)| a * b).sum();
    let sign = if dot < 0.0 { -1.0 } else { 1.0 };
    let peak = target.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let worst = mapped
        .iter()
        .zip(&target)
        .map(|(a, b)| (b - sign * a).abs())
        .fold(0.0, f64::max);
    Ok(worst / peak)
}

/// Smooth bump `exp(1 - 1/(1 - t²))`, `t = (r - center)/half_width`, zero
/// outside `|t| < 1`.
pub fn bump(center: f64, half_width: f64) -> impl Fn(f64) -> f64 {
    move |r| {
        let t = (r - center) / half_width;
        if t.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - t * t)).exp()
        }
    }
}

/// Bumps centred at 1/4, 1/2 and 3/4 of the grid in the computational
/// variable, each reaching halfway to the nearer grid end.
pub fn interior_bumps(grid: &RadialGrid) -> Vec<impl Fn(f64) -> f64> {
    [0.25, 0.5, 0.75]
        .iter()
        .map(|&t| {
            let c = grid.to_r(grid.s_at(t * (grid.n_nodes - 1) as f64));
            bump(c, 0.5 * (c - grid.r_start).min(grid.r_end - c))
        })
        .collect()
}

/// `max_χ ‖Ĥ_CLB χ - f^{(2-N)/2} Ĥ (f^{(N-2)/2} χ)‖∞ / ‖χ‖∞` with both
/// operators taken as `M⁻¹K` on the same grid.
pub fn operator_gauge_residual<F: Fn(f64) -> f64>(
    space: &BertrandSpace,
    l: u32,
    grid: &RadialGrid,
    test_functions: &[F],
) -> Result<f64> {
    let direct = build_radial_operator(space, QuantizationScheme::DirectSchrodinger, l, grid)?;
    let conformal = build_radial_operator(space, QuantizationScheme::ConformalLB, l, grid)?;
    let profile = conformal_factor(space)?;
    let ones = vec![1.0; direct.nodes.len()];
    let g = gauge_transform_eigenfunction(&ones, &direct.nodes, &profile, space.dim);
    let mut worst: f64 = 0.0;
    for chi in test_functions {
        let v: Vec<f64> = direct.nodes.iter().map(|&r| chi(r)).collect();
        let norm = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if norm == 0.0 {
            continue;
        }
        let hc = conformal.apply(&v);
        let u: Vec<f64> = v.iter().zip(&g).map(|(x, gi)| x / gi).collect();
        let hd = direct.apply(&u);
        let diff = hc
            .iter()
            .zip(hd.iter().zip(&g))
            .map(|(a, (b, gi))| (a - gi * b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(diff / norm);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelDifference {
    pub index: usize,
    pub a: f64,
    pub b: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumComparison {
    pub l: u32,
    pub levels: Vec<LevelDifference>,
    pub max_abs_diff: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn compare_spectra(a: &Spectrum, b: &Spectrum, tol: f64) -> Result<SpectrumComparison> {
    if a.l != b.l || a.eigenvalues.len() != b.eigenvalues.len() {
        return Err(Error::LengthMismatch(format!(
            "(l = {}, k = {}) vs (l = {}, k = {})",
            a.l,
            a.eigenvalues.len(),
            b.l,
            b.eigenvalues.len()
        )));
    }
    let levels: Vec<LevelDifference> = a
        .eigenvalues
        .iter()
        .zip(&b.eigenvalues)
        .enumerate()
        .map(|(index, (&x, &y))| {
            let abs_diff = (x - y).abs();
            LevelDifference {
                index,
                a: x,
                b: y,
                abs_diff,
                rel_diff: abs_diff / x.abs().max(y.abs()).max(f64::MIN_POSITIVE),
            }
        })
        .collect();
    let max_abs_diff = levels.iter().fold(0.0f64, |m, d| m.max(d.abs_diff));
    Ok(SpectrumComparison {
        l: a.l,
        levels,
        max_abs_diff,
        tolerance: tol,
        passed: max_abs_diff <= tol,
    })
}

/// Richardson estimate `|E_h - E_2h| / 3` of the error of each level of
/// `fine`, whose grid spacing is half that of `coarse`.
pub fn discretization_error(fine: &Spectrum, coarse: &Spectrum) -> Result<Vec<f64>> {
    let cmp = compare_spectra(fine, coarse, 0.0)?;
    Ok(cmp.levels.iter().map(|d| d.abs_diff / 3.0).collect())
}

pub const DEGENERACY_SAFETY: f64 = 50.0;

/// Degeneracy tolerance of every level: `50 ×` its estimated
/// discretization error, indexed as `[l position][n]`.
pub fn level_tolerances(fine: &[Spectrum], coarse: &[Spectrum]) -> Result<Vec<Vec<f64>>> {
    if fine.len() != coarse.len() {
        return Err(Error::LengthMismatch("different numbers of l values".into()));
    }
    fine.iter()
        .zip(coarse)
        .map(|(f, c)| Ok(discretization_error(f, c)?.iter().map(|e| DEGENERACY_SAFETY * e).collect()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    /// Radial index within its `l` spectrum.
    pub n: usize,
    pub l: u32,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub energy: f64,
    /// Largest tolerance among the members.
    pub tolerance: f64,
    /// Largest minus smallest member energy.
    pub gap: f64,
    pub members: Vec<Level>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyReport {
    /// Uniform tolerance, or `None` when tolerances were per level.
    pub tolerance: Option<f64>,
    pub clusters: Vec<Cluster>,
}

impl DegeneracyReport {
    pub fn multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.members.len()).collect()
    }
}

/// Groups levels whose energies chain together within `tol`; only groups
/// that mix different `l` are reported.
pub fn degeneracy_report(spectra: &[Spectrum], tol: f64) -> DegeneracyReport {
    let mut report = cluster_levels(spectra, |_| tol);
    report.tolerance = Some(tol);
    report
}

/// As [`degeneracy_report`], with a tolerance per level laid out like the
/// output of [`level_tolerances`]. Neighbours join when their gap is within
/// the larger of their two tolerances.
pub fn degeneracy_report_per_level(spectra: &[Spectrum], tolerances: &[Vec<f64>]) -> Result<DegeneracyReport> {
    if tolerances.len() != spectra.len()
        || spectra.iter().zip(tolerances).any(|(s, t)| t.len() != s.eigenvalues.len())
    {
        return Err(Error::LengthMismatch("tolerances do not match the spectra".into()));
    }
    let position: Vec<u32> = spectra.iter().map(|s| s.l).collect();
    Ok(cluster_levels(spectra, |lv| {
        let i = position.iter().position(|&l| l == lv.l).unwrap_or(0);
        tolerances[i][lv.n]
    }))
}

fn cluster_levels(spectra: &[Spectrum], tol_of: impl Fn(&Level) -> f64) -> DegeneracyReport {
    let mut levels: Vec<Level> = spectra
        .iter()
        .flat_map(|s| {
            s.eigenvalues
                .iter()
                .enumerate()
                .map(move |(n, &energy)| Level { n, l: s.l, energy })
        })
        .collect();
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..=levels.len() {
        if i < levels.len() {
            let link = tol_of(&levels[i]).max(tol_of(&levels[i - 1]));
            if levels[i].energy - levels[i - 1].energy <= link {
                continue;
            }
        }
        let group = &levels[start..i];
        let first_l = group[0].l;
        if group.iter().any(|lv| lv.l != first_l) {
            let lo = group[0].energy;
            let hi = group[group.len() - 1].energy;
            clusters.push(Cluster {
                energy: group.iter().map(|lv| lv.energy).sum::<f64>() / group.len() as f64,
                tolerance: group.iter().map(&tol_of).fold(0.0, f64::max),
                gap: hi - lo,
                members: group.to_vec(),
            });
        }
        start = i;
    }
    DegeneracyReport {
        tolerance: None,
        clusters,
    }
}

/// Spread of the energies of the given `(n, l)` levels in `spectra`.
pub fn level_gap(spectra: &[Spectrum], members: &[(usize, u32)]) -> Option<f64> {
    let energies: Option<Vec<f64>> = members
        .iter()
        .map(|&(n, l)| {
            spectra
                .iter()
                .find(|s| s.l == l)
                .and_then(|s| s.eigenvalues.get(n).copied())
        })
        .collect();
    let e = energies?;
    let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(hi - lo)
}
