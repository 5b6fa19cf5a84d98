//! Symmetric tridiagonal matrices and the generalized problem `K x = λ M x`
//! with diagonal positive `M`.
//!
//! Eigenvalues come from Sturm-sequence bisection, eigenvectors from inverse
//! iteration with a pivoted tridiagonal LU.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix stored as its diagonal and first
/// super-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::InvalidParameter(format!(
                "tridiagonal with {} diagonal and {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..n - 1 {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        y
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE / f64::EPSILON;
        let mut count = 0;
        let mut d = self.diag[0] - x;
        for i in 0..self.len() {
            if i > 0 {
                d = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / d;
            }
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// The `index`-th smallest eigenvalue (zero based) by bisection.
    pub fn eigenvalue(&self, index: usize) -> Result<f64> {
        if index >= self.len() {
            return Err(Error::InvalidParameter(format!(
                "eigenvalue {index} requested from a {}x{} matrix",
                self.len(),
                self.len()
            )));
        }
        let (mut lo, mut hi) = self.gershgorin();
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::ConvergenceFailure("non-finite Gershgorin bounds".into()));
        }
        let pad = f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        lo -= pad;
        hi += pad;
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Unit eigenvector for the (accurate) eigenvalue `lambda` by inverse
    /// iteration.
    pub fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>> {
        let n = self.len();
        let size = lambda.abs().max(f64::MIN_POSITIVE);
        let shift = lambda + 4.0 * f64::EPSILON * size;
        let lu = TridiagonalLu::factor(self, shift, f64::EPSILON * size);
        // deterministic start with components in every direction
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.754_877_666).sin()).collect();
        normalize(&mut x);
        for _ in 0..8 {
            let mut y = lu.solve(&x);
            if !y.iter().all(|v| v.is_finite()) {
                return Err(Error::ConvergenceFailure("inverse iteration overflow".into()));
            }
            normalize(&mut y);
            let change = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b).abs().min((a + b).abs()))
                .fold(0.0, f64::max);
            x = y;
            if change < 1e-13 {
                break;
            }
        }
        // residual against the magnitude of the terms that produce it
        let ax = self.mul_vec(&x);
        let abs_x: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        let magnitude = SymTridiagonal {
            diag: self.diag.iter().map(|d| d.abs() + lambda.abs()).collect(),
            off: self.off.iter().map(|o| o.abs()).collect(),
        }
        .mul_vec(&abs_x);
        let residual: f64 = ax.iter().zip(&x).map(|(a, v)| (a - lambda * v).powi(2)).sum::<f64>().sqrt();
        let reference: f64 = magnitude.iter().map(|m| m * m).sum::<f64>().sqrt();
        if !(residual <= 1e-8 * reference) {
            return Err(Error::ConvergenceFailure(format!(
                "eigenvector residual {residual:e} for eigenvalue {lambda}"
            )));
        }
        Ok(x)
    }
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= n);
}

/// LU factors of `T - σI` with partial pivoting (row swaps between
/// neighbours give a second super-diagonal).
struct TridiagonalLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(t: &SymTridiagonal, sigma: f64, floor: f64) -> Self {
        let n = t.len();
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swapped = vec![false; n];
        // current row i holds (a, b, c) in columns (i, i+1, i+2)
        let mut a = t.diag[0] - sigma;
        let mut b = if n > 1 { t.off[0] } else { 0.0 };
        let mut c = 0.0;
        for i in 0..n {
            if i + 1 == n {
                u0[i] = if a.abs() < floor { floor } else { a };
                break;
            }
            let sub = t.off[i];
            let next_diag = t.diag[i + 1] - sigma;
            let next_off = if i + 2 < n { t.off[i + 1] } else { 0.0 };
            if sub.abs() > a.abs() {
                // pivot row is the next one
                swapped[i] = true;
                u0[i] = sub;
                u1[i] = next_diag;
                u2[i] = next_off;
                let m = a / sub;
                mult[i] = m;
                a = b - m * next_diag;
                b = c - m * next_off;
            } else {
                let piv = if a.abs() < floor { floor } else { a };
                u0[i] = piv;
                u1[i] = b;
                u2[i] = c;
                let m = sub / piv;
                mult[i] = m;
                a = next_diag - m * b;
                b = next_off - m * c;
            }
            c = 0.0;
        }
        Self {
            u0,
            u1,
            u2,
            mult,
            swapped,
        }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut y = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= self.mult[i] * y[i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
        x
    }
}

/// Eigenpairs of `K x = λ M x` for symmetric tridiagonal `K` and positive
/// diagonal `M`.
#[derive(Debug, Clone)]
pub struct GeneralizedTridiagonal {
    scaled: SymTridiagonal,
    inv_sqrt_mass: Vec<f64>,
}

impl GeneralizedTridiagonal {
    pub fn new(stiffness: &SymTridiagonal, mass: &[f64]) -> Result<Self> {
        if mass.len() != stiffness.len() {
            return Err(Error::InvalidParameter("mass and stiffness sizes differ".into()));
        }
        if let Some(bad) = mass.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::IllConditioned(format!("mass entry {bad}")));
        }
        let inv: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
        let diag = stiffness.diag.iter().zip(&inv).map(|(k, s)| k * s * s).collect();
        let off = stiffness
            .off
            .iter()
            .enumerate()
            .map(|(i, k)| k * inv[i] * inv[i + 1])
            .collect();
        Ok(Self {
            scaled: SymTridiagonal::new(diag, off)?,
            inv_sqrt_mass: inv,
        })
    }

    pub fn eigenvalue(&self, index: usize) -> Result<f64> {
        self.scaled.eigenvalue(index)
    }

    /// `M`-orthonormal eigenvector.
    pub fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>> {
        let y = self.scaled.eigenvector(lambda)?;
        Ok(y.iter().zip(&self.inv_sqrt_mass).map(|(v, s)| v * s).collect())
    }
}
