use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingDirection {
    Positive,
    Negative,
    Both,
}

/// Hyperplane `normal · y = offset` with a crossing direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionConfig {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub direction: CrossingDirection,
    /// Crossings before this time are ignored.
    pub transient_skip: f64,
    /// Bound on `|normal · y − offset|` at reported crossings.
    pub refine_tol: f64,
    /// Crossings with `|n̂ · ẏ| < tangency_tol · |ẏ|` are flagged.
    pub tangency_tol: f64,
}

impl SectionConfig {
    /// `y_component = 0`, upward, after `transient_skip`.
    pub fn coordinate(dim: usize, component: usize, transient_skip: f64) -> Self {
        let mut normal = vec![0.0; dim];
        normal[component] = 1.0;
        Self {
            normal,
            offset: 0.0,
            direction: CrossingDirection::Positive,
            transient_skip,
            refine_tol: 1e-10,
            tangency_tol: 1e-6,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.normal.len() != dim {
            return Err(Error::validation(format!(
                "section normal has {} components, trajectory has {}",
                self.normal.len(),
                dim
            )));
        }
        let n2: f64 = self.normal.iter().map(|v| v * v).sum();
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::validation("section normal must be nonzero"));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::validation("refine_tol must be positive"));
        }
        if !(self.tangency_tol >= 0.0) || !self.offset.is_finite() {
            return Err(Error::validation("invalid section parameters"));
        }
        Ok(())
    }

    /// Orthonormal basis of the plane directions, from Gram–Schmidt on the
    /// coordinate axes.
    pub fn plane_basis(&self) -> Vec<Vec<f64>> {
        let dim = self.normal.len();
        let norm = self.normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut basis: Vec<Vec<f64>> = vec![self.normal.iter().map(|v| v / norm).collect()];
        for k in 0..dim {
            let mut e = vec![0.0; dim];
            e[k] = 1.0;
            for b in &basis {
                let p: f64 = e.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in e.iter_mut().zip(b) {
                    *x -= p * y;
                }
            }
            let len = e.iter().map(|v| v * v).sum::<f64>().sqrt();
            if len > 1e-8 {
                basis.push(e.iter().map(|v| v / len).collect());
            }
            if basis.len() == dim {
                break;
            }
        }
        basis.remove(0);
        basis
    }

    fn residual(&self, y: &[f64]) -> f64 {
        self.normal.iter().zip(y).map(|(n, v)| n * v).sum::<f64>() - self.offset
    }

    fn accepts(&self, ga: f64, gb: f64) -> bool {
        let up = ga < 0.0 && gb >= 0.0;
        let down = ga > 0.0 && gb <= 0.0;
        match self.direction {
            CrossingDirection::Positive => up,
            CrossingDirection::Negative => down,
            CrossingDirection::Both => up || down,
        }
    }
}

/// Crossings of a trajectory with a section, in plane coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnMap {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    /// `normal · y − offset` at each crossing.
    pub residuals: Vec<f64>,
    pub tangential: Vec<bool>,
    /// Window searched for crossings.
    pub t_start: f64,
    pub t_end: f64,
    pub diagnostic: Option<String>,
}

impl ReturnMap {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Drops all but the last `n` crossings.
    pub fn trailing(&self, n: usize) -> ReturnMap {
        let k = self.len().saturating_sub(n);
        ReturnMap {
            times: self.times[k..].to_vec(),
            points: self.points[k..].to_vec(),
            residuals: self.residuals[k..].to_vec(),
            tangential: self.tangential[k..].to_vec(),
            t_start: self.times.get(k).copied().unwrap_or(self.t_start),
            t_end: self.t_end,
            diagnostic: self.diagnostic.clone(),
        }
    }
}

const SUBDIVISIONS: usize = 4;

/// All directed crossings after the transient, refined on the dense output.
pub fn poincare_section(traj: &Trajectory, section: &SectionConfig) -> Result<ReturnMap> {
    section.validate(traj.dim())?;
    let basis = section.plane_basis();
    let nhat: Vec<f64> = {
        let n = section.normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        section.normal.iter().map(|v| v / n).collect()
    };
    let t_start = traj.t_start().max(section.transient_skip);
    let mut map = ReturnMap {
        times: Vec::new(),
        points: Vec::new(),
        residuals: Vec::new(),
        tangential: Vec::new(),
        t_start,
        t_end: traj.t_end(),
        diagnostic: None,
    };

    for seg in 0..traj.segment_count() {
        let (ta, tb) = (traj.times()[seg], traj.times()[seg + 1]);
        if tb < t_start {
            continue;
        }
        let g = |theta: f64| section.residual(&traj.eval_segment(seg, theta));
        let mut th_a = 0.0;
        let mut ga = g(0.0);
        for k in 1..=SUBDIVISIONS {
            let th_b = k as f64 / SUBDIVISIONS as f64;
            let gb = g(th_b);
            if section.accepts(ga, gb) {
                let th = refine(&g, th_a, th_b, ga, gb, section.refine_tol);
                let t = ta + th * (tb - ta);
                if t >= t_start && map.times.last().is_none_or(|&last| t > last) {
                    let y = traj.eval_segment(seg, th);
                    let dy = traj.eval_segment_derivative(seg, th);
                    let speed = dy.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let normal_speed: f64 = nhat.iter().zip(&dy).map(|(n, v)| n * v).sum();
                    map.times.push(t);
                    map.residuals.push(section.residual(&y));
                    map.tangential
                        .push(normal_speed.abs() < section.tangency_tol * speed || speed == 0.0);
                    map.points.push(
                        basis
                            .iter()
                            .map(|b| b.iter().zip(&y).map(|(u, v)| u * v).sum())
                            .collect(),
                    );
                }
            }
            th_a = th_b;
            ga = gb;
        }
    }
    if map.is_empty() {
        map.diagnostic = Some("no crossings found after the transient".into());
    } else if map.tangential.iter().any(|&t| t) {
        map.diagnostic = Some("some crossings are nearly tangential to the section".into());
    }
    Ok(map)
}

/// Illinois regula falsi on a sign-changing bracket.
fn refine(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut ga: f64, mut gb: f64, tol: f64) -> f64 {
    if gb == 0.0 {
        return b;
    }
    let mut side = 0i8;
    let mut best = b;
    for _ in 0..200 {
        let c = if gb != ga { (a * gb - b * ga) / (gb - ga) } else { 0.5 * (a + b) };
        let c = if c > a.min(b) && c < a.max(b) { c } else { 0.5 * (a + b) };
        let gc = g(c);
        best = c;
        if gc.abs() <= 0.01 * tol || (b - a).abs() < 1e-15 {
            break;
        }
        if (gc > 0.0) == (gb > 0.0) {
            b = c;
            gb = gc;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            ga = gc;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        }
    }
    best
}
