//! Dormand–Prince 5(4) with Hairer's continuous extension.

use super::{IntegratorConfig, Trajectory, VectorField};
use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense output.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// Work arrays for one step.
pub(crate) struct Stepper {
    n: usize,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    pub(crate) y_new: Vec<f64>,
    pub(crate) err: Vec<f64>,
}

impl Stepper {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            n,
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            y_new: vec![0.0; n],
            err: vec![0.0; n],
        }
    }

    /// Attempts a step of size `h` from `(t, y)`; `k[0]` must hold `f(t, y)`.
    /// Leaves the solution in `y_new`, the error estimate in `err` and
    /// `f(t + h, y_new)` in `k[6]`.
    pub(crate) fn attempt(&mut self, f: &dyn VectorField, t: f64, y: &[f64], h: f64) {
        let n = self.n;
        let stage = |tmp: &mut Vec<f64>, k: &[Vec<f64>; 7], w: &[(usize, f64)]| {
            for i in 0..n {
                let mut acc = 0.0;
                for &(j, a) in w {
                    acc += a * k[j][i];
                }
                tmp[i] = y[i] + h * acc;
            }
        };
        stage(&mut self.tmp, &self.k, &[(0, A21)]);
        f.eval(t + C2 * h, &self.tmp, &mut self.k[1]);
        stage(&mut self.tmp, &self.k, &[(0, A31), (1, A32)]);
        f.eval(t + C3 * h, &self.tmp, &mut self.k[2]);
        stage(&mut self.tmp, &self.k, &[(0, A41), (1, A42), (2, A43)]);
        f.eval(t + C4 * h, &self.tmp, &mut self.k[3]);
        stage(&mut self.tmp, &self.k, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
        f.eval(t + C5 * h, &self.tmp, &mut self.k[4]);
        stage(&mut self.tmp, &self.k, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        f.eval(t + h, &self.tmp, &mut self.k[5]);
        stage(&mut self.y_new, &self.k, &[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)]);
        f.eval(t + h, &self.y_new, &mut self.k[6]);
        for i in 0..n {
            let k = &self.k;
            self.err[i] = h
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
        }
    }

    /// Appends the five dense-output coefficient vectors of the last attempt.
    fn dense(&self, y: &[f64], h: f64, out: &mut Vec<f64>) {
        let n = self.n;
        let k = &self.k;
        let base = out.len();
        out.resize(base + 5 * n, 0.0);
        for i in 0..n {
            let ydiff = self.y_new[i] - y[i];
            let bspl = h * k[0][i] - ydiff;
            out[base + i] = y[i];
            out[base + n + i] = ydiff;
            out[base + 2 * n + i] = bspl;
            out[base + 3 * n + i] = ydiff - h * k[6][i] - bspl;
            out[base + 4 * n + i] = h
                * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
        }
    }

    fn swap_fsal(&mut self) {
        self.k.swap(0, 6);
    }

    pub(crate) fn set_initial_derivative(&mut self, f: &dyn VectorField, t: f64, y: &[f64]) {
        f.eval(t, y, &mut self.k[0]);
    }
}

/// Largest per-component ratio `|vᵢ| / (abs_tol + rel_tol·|yᵢ|)`.
fn scaled_norm(v: &[f64], y0: &[f64], y1: &[f64], cfg: &IntegratorConfig) -> f64 {
    (0..v.len())
        .map(|i| {
            let sk = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs());
            (v[i] / sk).abs()
        })
        .fold(0.0, f64::max)
}

fn initial_step(f: &dyn VectorField, t: f64, y: &[f64], f0: &[f64], cfg: &IntegratorConfig) -> f64 {
    let n = y.len();
    let d0 = scaled_norm(y, y, y, cfg);
    let d1 = scaled_norm(f0, y, y, cfg);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = (0..n).map(|i| y[i] + h0 * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    f.eval(t + h0, &y1, &mut f1);
    let diff: Vec<f64> = (0..n).map(|i| f1[i] - f0[i]).collect();
    let d2 = scaled_norm(&diff, y, y, cfg) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(cfg.max_step).max(cfg.min_step)
}

/// Adaptive integration from `(t0, y0)` to `t_end`.
pub(crate) fn solve(
    f: &dyn VectorField,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let n = f.dim();
    if y0.len() != n {
        return Err(Error::validation(format!(
            "initial state has {} components, field expects {}",
            y0.len(),
            n
        )));
    }
    if !(t_end > t0) {
        return Err(Error::validation("integration end time must exceed the start time"));
    }
    if !y0.iter().all(|v| v.is_finite()) {
        return Err(Error::validation("initial state must be finite"));
    }
    if !f.admissible(y0) {
        return Err(Error::validation("initial state outside the admissible region"));
    }

    let mut traj = Trajectory::start(n, t0, y0);
    let mut st = Stepper::new(n);
    st.set_initial_derivative(f, t0, y0);
    let mut h = initial_step(f, t0, y0, &st.k[0].clone(), cfg);
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut steps = 0usize;
    let mut last_rejected = false;
    let span = t_end - t0;

    while t < t_end {
        if steps >= cfg.max_steps {
            return Err(Error::MaxSteps(cfg.max_steps));
        }
        steps += 1;
        h = h.min(cfg.max_step);
        let remaining = t_end - t;
        if h >= remaining || remaining - h < 1e-12 * span {
            h = remaining;
        }

        st.attempt(f, t, &y, h);
        let finite = st.y_new.iter().all(|v| v.is_finite());
        let admissible = finite && f.admissible(&st.y_new);
        let err = if finite {
            scaled_norm(&st.err, &y, &st.y_new, cfg)
        } else {
            f64::INFINITY
        };

        if admissible && err <= 1.0 {
            let mut dense = Vec::with_capacity(5 * n);
            st.dense(&y, h, &mut dense);
            t = if h == remaining { t_end } else { t + h };
            y.copy_from_slice(&st.y_new);
            traj.push(t, &y, dense);
            st.swap_fsal();

            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > cfg.divergence_norm {
                return Err(Error::Divergence {
                    t,
                    norm,
                    partial: Box::new(traj),
                });
            }
            let mut fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
            };
            if last_rejected {
                fac = fac.min(1.0);
            }
            last_rejected = false;
            h *= fac;
        } else {
            last_rejected = true;
            h *= if !admissible && err <= 1.0 {
                0.5
            } else if err.is_finite() {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0)
            } else {
                FAC_MIN
            };
            if h < cfg.min_step && h < t_end - t {
                return Err(Error::Stiffness { t, step: h });
            }
        }
    }
    Ok(traj)
}
