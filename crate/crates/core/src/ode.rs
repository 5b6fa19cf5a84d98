//! Explicit embedded Runge–Kutta 8(5) integrator (Dormand–Prince DOP853)
//! with PI step-size control and rejection of steps that leave the
//! admissible region of the system.

use crate::error::{Error, Result};

/// Right-hand side of `y' = F(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;

    /// Writes `F(t, y)` into `dy`. Returns `false` when `y` is outside the
    /// region where the system is defined; the integrator then shrinks the step.
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> bool;
}

const STAGES: usize = 12;
const C: [f64; 12] = [0.0, 0.05260015195876773, 0.0789002279381516, 0.1183503419072274, 0.2816496580927726, 0.3333333333333333, 0.25, 0.3076923076923077, 0.6512820512820513, 0.6, 0.8571428571428571, 1.0];
const A: [[f64; 12]; 12] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0, 0.0],
    [0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0, 0.0, 0.0],
    [-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0, 0.0],
    [2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303, 0.6433927460157636, 0.0],
];
const B: [f64; 12] = [0.054293734116568765, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, 0.3111643669578199, -0.1521609496625161, 0.20136540080403034, 0.04471061572777259];
const E5: [f64; 13] = [0.01312004499419488, 0.0, 0.0, 0.0, 0.0, -1.2251564463762044, -0.4957589496572502, 1.6643771824549864, -0.35032884874997366, 0.3341791187130175, 0.08192320648511571, -0.022355307863886294, 0.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dop853 {
    pub rtol: f64,
    pub atol: f64,
    pub safety: f64,
    pub min_factor: f64,
    pub max_factor: f64,
    /// Weight of the previous error in the PI controller.
    pub pi_beta: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub domain_rejections: usize,
    pub rhs_evaluations: usize,
}

impl Dop853 {
    pub fn new(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            safety: 0.9,
            min_factor: 0.2,
            max_factor: 6.0,
            pi_beta: 0.04,
            max_steps: 50_000_000,
        }
    }

    fn scale(&self, y: &[f64], y_new: &[f64], out: &mut [f64]) {
        for ((s, a), b) in out.iter_mut().zip(y).zip(y_new) {
            *s = self.atol + self.rtol * a.abs().max(b.abs());
        }
    }

    /// Stage evaluation for one step of size `h`. Returns `false` if any
    /// stage left the admissible region.
    fn attempt<S: OdeSystem>(
        &self,
        sys: &S,
        t: f64,
        y: &[f64],
        h: f64,
        k: &mut [Vec<f64>],
        y_stage: &mut [f64],
        y_new: &mut [f64],
    ) -> bool {
        let n = y.len();
        for s in 1..STAGES {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            let (done, rest) = k.split_at_mut(s);
            let _ = done;
            if !sys.rhs(t + C[s] * h, y_stage, &mut rest[0]) {
                return false;
            }
        }
        for i in 0..n {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(STAGES) {
                acc += B[j] * kj[i];
            }
            y_new[i] = y[i] + h * acc;
        }
        let (_, last) = k.split_at_mut(STAGES);
        sys.rhs(t + h, y_new, &mut last[0])
    }

    /// Componentwise maximum of the embedded 5th-order error estimate
    /// relative to each component's tolerance.
    fn error_norm(&self, k: &[Vec<f64>], h: f64, scale: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..scale.len() {
            let mut a5 = 0.0;
            for j in 0..=STAGES {
                a5 += E5[j] * k[j][i];
            }
            worst = worst.max(h.abs() * (a5 / scale[i]).abs());
        }
        worst
    }

    fn initial_step<S: OdeSystem>(&self, sys: &S, t: f64, y: &[f64], f0: &[f64], span: f64) -> f64 {
        let n = y.len();
        let mut scale = vec![0.0; n];
        self.scale(y, y, &mut scale);
        let rms = |v: &[f64]| {
            (v.iter().zip(&scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n as f64).sqrt()
        };
        let d0 = rms(y);
        let d1 = rms(f0);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(span);
        let mut y1 = vec![0.0; n];
        let mut f1 = vec![0.0; n];
        loop {
            for i in 0..n {
                y1[i] = y[i] + h0 * f0[i];
            }
            if sys.rhs(t + h0, &y1, &mut f1) {
                break;
            }
            h0 *= 0.1;
            if h0 < 1e-300 {
                return span.min(1e-6);
            }
        }
        let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
        let d2 = rms(&diff) / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1).min(span)
    }

    /// Integrates from `t0` to `t_end`, calling `observer(t, y)` at the start
    /// and after every accepted step. The final step lands on `t_end` exactly.
    pub fn integrate<S, O>(
        &self,
        sys: &S,
        t0: f64,
        y0: &[f64],
        t_end: f64,
        mut observer: O,
    ) -> Result<IntegrationStats>
    where
        S: OdeSystem,
        O: FnMut(f64, &[f64]),
    {
        let n = sys.dim();
        assert_eq!(y0.len(), n, "state length does not match system dimension");
        let mut stats = IntegrationStats::default();
        let mut y = y0.to_vec();
        let mut t = t0;
        let mut k = vec![vec![0.0; n]; STAGES + 1];
        if !sys.rhs(t, &y, &mut k[0]) {
            return Err(Error::StepSizeUnderflow { t, h: 0.0 });
        }
        stats.rhs_evaluations += 1;
        observer(t, &y);
        if t_end <= t0 {
            return Ok(stats);
        }
        let mut h = self.initial_step(sys, t, &y, &k[0].clone(), t_end - t0);
        let mut y_stage = vec![0.0; n];
        let mut y_new = vec![0.0; n];
        let mut scale = vec![0.0; n];
        let mut err_prev: f64 = 1e-4;
        let mut rejected_last = false;
        let expo = 1.0 / 6.0 - 0.75 * self.pi_beta;

        while t < t_end {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::StepSizeUnderflow { t, h });
            }
            let mut last = false;
            if t + h >= t_end || t + 1.01 * h >= t_end {
                h = t_end - t;
                last = true;
            }
            if h <= 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::StepSizeUnderflow { t, h });
            }
            let ok = self.attempt(sys, t, &y, h, &mut k, &mut y_stage, &mut y_new);
            stats.rhs_evaluations += STAGES;
            if !ok || y_new.iter().any(|v| !v.is_finite()) {
                stats.rejected += 1;
                stats.domain_rejections += 1;
                h *= 0.25;
                rejected_last = true;
                if h <= 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepSizeUnderflow { t, h });
                }
                continue;
            }
            self.scale(&y, &y_new, &mut scale);
            let err = self.error_norm(&k, h, &scale);
            if err <= 1.0 {
                stats.accepted += 1;
                t = if last { t_end } else { t + h };
                y.copy_from_slice(&y_new);
                let f_new = k[STAGES].clone();
                k[0].copy_from_slice(&f_new);
                observer(t, &y);
                let err_c = err.max(1e-10);
                let mut factor = self.safety * err_c.powf(-expo) * err_prev.powf(self.pi_beta);
                factor = factor.clamp(self.min_factor, self.max_factor);
                if rejected_last {
                    factor = factor.min(1.0);
                }
                err_prev = err.max(1e-4);
                rejected_last = false;
                h *= factor;
            } else {
                stats.rejected += 1;
                let factor = (self.safety * err.powf(-expo)).max(self.min_factor);
                h *= factor;
                rejected_last = true;
            }
        }
        Ok(stats)
    }

    /// One step of size `h` from `(t, y)` without error control, or `None`
    /// if a stage left the admissible region.
    pub fn single_step<S: OdeSystem>(&self, sys: &S, t: f64, y: &[f64], h: f64) -> Option<Vec<f64>> {
        let n = sys.dim();
        let mut k = vec![vec![0.0; n]; STAGES + 1];
        if !sys.rhs(t, y, &mut k[0]) {
            return None;
        }
        let mut y_stage = vec![0.0; n];
        let mut y_new = vec![0.0; n];
        if self.attempt(sys, t, y, h, &mut k, &mut y_stage, &mut y_new) {
            Some(y_new)
        } else {
            None
        }
    }
}
