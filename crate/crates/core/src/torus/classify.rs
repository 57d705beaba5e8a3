use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::section::ReturnMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttractorLabel {
    Equilibrium,
    LimitCycle,
    Torus2,
    Unclassified,
}

/// Thresholds of the classification rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    /// Distance below which two return points coincide.
    pub cluster_tol: f64,
    /// Largest map period recognised as a limit cycle.
    pub max_period: usize,
    /// Curve-fit scatter bound, relative to the curve diameter.
    pub scatter_ratio: f64,
    pub min_crossings: usize,
    /// Trailing crossings used by the closed-curve test.
    pub window: usize,
    /// Trailing crossings used by the periodicity test.
    pub cycle_window: usize,
    /// Silence at the end of the run, in time units, meaning crossings stopped.
    pub quiet_time: f64,
    /// Fourier order of the closed-curve fit.
    pub harmonics: usize,
    /// Largest angular gap allowed between consecutive points on the curve.
    pub max_angle_gap: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            cluster_tol: 1e-6,
            max_period: 8,
            scatter_ratio: 0.05,
            min_crossings: 50,
            window: 400,
            cycle_window: 32,
            quiet_time: 50.0,
            harmonics: 6,
            max_angle_gap: PI / 3.0,
        }
    }
}

/// Star-shaped closed curve `c + R(φ)(cos φ u + sin φ v) + Σ Hₖ(φ) wₖ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedCurve {
    pub centroid: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub normals: Vec<Vec<f64>>,
    /// Fourier coefficients `[a₀, a₁, b₁, …]` of `R`.
    pub radius: Vec<f64>,
    /// Fourier coefficients of each `Hₖ`.
    pub heights: Vec<Vec<f64>>,
}

fn fourier_row(phi: f64, order: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(2 * order + 1);
    row.push(1.0);
    for k in 1..=order {
        let kf = k as f64;
        row.push((kf * phi).cos());
        row.push((kf * phi).sin());
    }
    row
}

fn fourier_eval(coeffs: &[f64], phi: f64) -> f64 {
    let order = (coeffs.len() - 1) / 2;
    fourier_row(phi, order)
        .iter()
        .zip(coeffs)
        .map(|(a, b)| a * b)
        .sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

impl ClosedCurve {
    pub fn eval(&self, phi: f64) -> Vec<f64> {
        let r = fourier_eval(&self.radius, phi);
        let (s, c) = phi.sin_cos();
        let mut p: Vec<f64> = (0..self.centroid.len())
            .map(|i| self.centroid[i] + r * (c * self.u[i] + s * self.v[i]))
            .collect();
        for (w, h) in self.normals.iter().zip(&self.heights) {
            let hv = fourier_eval(h, phi);
            for i in 0..p.len() {
                p[i] += hv * w[i];
            }
        }
        p
    }

    pub fn sample(&self, n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|k| self.eval(2.0 * PI * k as f64 / n as f64)).collect()
    }

    pub fn diameter(&self) -> f64 {
        max_pairwise_distance(&self.sample(256))
    }
}

fn max_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            m = m.max(dist(&points[i], &points[j]));
        }
    }
    m
}

/// Symmetric Hausdorff distance between two closed curves, on `n` samples each.
pub fn hausdorff_distance(a: &ClosedCurve, b: &ClosedCurve, n: usize) -> f64 {
    let (pa, pb) = (a.sample(n), b.sample(n));
    let directed = |x: &[Vec<f64>], y: &[Vec<f64>]| {
        x.iter()
            .map(|p| y.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0f64, f64::max)
    };
    directed(&pa, &pb).max(directed(&pb, &pa))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorClass {
    pub label: AttractorLabel,
    pub crossings: usize,
    /// Map period for limit cycles.
    pub cluster_count: Option<usize>,
    /// RMS distance of return points from the fitted curve.
    pub scatter: Option<f64>,
    pub scatter_max: Option<f64>,
    pub diameter: Option<f64>,
    /// Mean angle advance per return, in turns.
    pub rotation_number: Option<f64>,
    /// `2π / mean return time`.
    pub return_frequency: Option<f64>,
    /// `2π min(ρ, 1 − ρ) / mean return time`.
    pub modulation_frequency: Option<f64>,
    pub reason: String,
    pub curve: Option<ClosedCurve>,
}

impl AttractorClass {
    fn new(label: AttractorLabel, crossings: usize, reason: impl Into<String>) -> Self {
        Self {
            label,
            crossings,
            cluster_count: None,
            scatter: None,
            scatter_max: None,
            diameter: None,
            rotation_number: None,
            return_frequency: None,
            modulation_frequency: None,
            reason: reason.into(),
            curve: None,
        }
    }
}

/// Smallest `k ≤ max_period` with `|pᵢ₊ₖ − pᵢ| ≤ tol` throughout the window.
fn map_period(points: &[Vec<f64>], cfg: &ClassifyConfig) -> Option<usize> {
    (1..=cfg.max_period.min(points.len().saturating_sub(1))).find(|&k| {
        (0..points.len() - k).all(|i| dist(&points[i], &points[i + k]) <= cfg.cluster_tol)
    })
}

struct CurveFit {
    curve: ClosedCurve,
    rms: f64,
    max: f64,
    max_gap: f64,
    rotation: f64,
}

fn fit_closed_curve(points: &[Vec<f64>], harmonics: usize) -> Option<CurveFit> {
    let n = points.len();
    let d = points[0].len();
    if d < 2 {
        return None;
    }
    let centroid: Vec<f64> = (0..d)
        .map(|i| points.iter().map(|p| p[i]).sum::<f64>() / n as f64)
        .collect();
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for p in points {
        for i in 0..d {
            for j in 0..d {
                cov[(i, j)] += (p[i] - centroid[i]) * (p[j] - centroid[j]);
            }
        }
    }
    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let axis = |k: usize| -> Vec<f64> { eig.eigenvectors.column(order[k]).iter().copied().collect() };
    let (u, v) = (axis(0), axis(1));
    let normals: Vec<Vec<f64>> = (2..d).map(axis).collect();

    let mut phis = Vec::with_capacity(n);
    let mut radii = Vec::with_capacity(n);
    let mut heights: Vec<Vec<f64>> = vec![Vec::with_capacity(n); normals.len()];
    for p in points {
        let q: Vec<f64> = p.iter().zip(&centroid).map(|(a, b)| a - b).collect();
        let (a, b) = (dot(&q, &u), dot(&q, &v));
        phis.push(b.atan2(a));
        radii.push(a.hypot(b));
        for (k, w) in normals.iter().enumerate() {
            heights[k].push(dot(&q, w));
        }
    }

    let order_k = harmonics.min((n.saturating_sub(1)) / 4).max(1);
    let cols = 2 * order_k + 1;
    if n < cols + 1 {
        return None;
    }
    let design = DMatrix::from_fn(n, cols, |r, c| fourier_row(phis[r], order_k)[c]);
    let svd = design.clone().svd(true, true);
    let fit = |y: &[f64]| -> Option<Vec<f64>> {
        let rhs = DVector::from_column_slice(y);
        svd.solve(&rhs, 1e-12).ok().map(|x| x.iter().copied().collect())
    };
    let radius = fit(&radii)?;
    let hcoeffs: Vec<Vec<f64>> = heights.iter().map(|h| fit(h)).collect::<Option<_>>()?;

    let mut sq = 0.0;
    let mut mx: f64 = 0.0;
    for i in 0..n {
        let dr = radii[i] - fourier_eval(&radius, phis[i]);
        let mut e2 = dr * dr;
        for (k, h) in hcoeffs.iter().enumerate() {
            e2 += (heights[k][i] - fourier_eval(h, phis[i])).powi(2);
        }
        sq += e2;
        mx = mx.max(e2.sqrt());
    }

    let mut sorted = phis.clone();
    sorted.sort_by(f64::total_cmp);
    let mut max_gap = sorted[0] + 2.0 * PI - sorted[n - 1];
    for w in sorted.windows(2) {
        max_gap = max_gap.max(w[1] - w[0]);
    }

    // Mean signed advance, taken in the sense of the dominant direction.
    let incs: Vec<f64> = phis
        .windows(2)
        .map(|w| (w[1] - w[0]).rem_euclid(2.0 * PI))
        .collect();
    let mean = incs.iter().sum::<f64>() / incs.len().max(1) as f64;
    let rotation = mean / (2.0 * PI);

    Some(CurveFit {
        curve: ClosedCurve {
            centroid,
            u,
            v,
            normals,
            radius,
            heights: hcoeffs,
        },
        rms: (sq / n as f64).sqrt(),
        max: mx,
        max_gap,
        rotation,
    })
}

/// Labels the attractor behind a return map.
///
/// Crossings that stop well before the end of the run mean an equilibrium.
/// Otherwise the trailing window is tested for a period-`k` cycle in the map
/// (`k ≤ max_period`) and then for a closed invariant curve.
pub fn classify_attractor(map: &ReturnMap, cfg: &ClassifyConfig) -> AttractorClass {
    let n = map.len();
    let mean_gap = if n >= 2 {
        (map.times[n - 1] - map.times[0]) / (n - 1) as f64
    } else {
        f64::INFINITY
    };
    let last = map.times.last().copied().unwrap_or(map.t_start);
    let silence = map.t_end - last;
    if silence > cfg.quiet_time && (n < 2 || silence > 5.0 * mean_gap) {
        return AttractorClass::new(
            AttractorLabel::Equilibrium,
            n,
            format!("crossings stop {silence:.3} time units before the end of the run"),
        );
    }
    if n < cfg.min_crossings {
        return AttractorClass::new(
            AttractorLabel::Unclassified,
            n,
            format!("only {} crossings, need {}", n, cfg.min_crossings),
        );
    }

    let window = map.trailing(cfg.window.max(cfg.min_crossings));
    let points = &window.points;
    let m = points.len();
    let period = (window.times[m - 1] - window.times[0]) / (m - 1) as f64;
    let mut out = AttractorClass::new(AttractorLabel::Unclassified, n, "");
    out.return_frequency = Some(2.0 * PI / period);

    let tail = &points[m.saturating_sub(cfg.cycle_window.max(cfg.max_period + 1))..];
    if let Some(k) = map_period(tail, cfg) {
        out.label = AttractorLabel::LimitCycle;
        out.cluster_count = Some(k);
        out.reason = format!("trailing returns repeat with period {k} within {:e}", cfg.cluster_tol);
        return out;
    }

    match fit_closed_curve(points, cfg.harmonics) {
        Some(fit) => {
            let diameter = fit.curve.diameter();
            out.scatter = Some(fit.rms);
            out.scatter_max = Some(fit.max);
            out.diameter = Some(diameter);
            out.rotation_number = Some(fit.rotation);
            out.modulation_frequency =
                Some(2.0 * PI * fit.rotation.min(1.0 - fit.rotation) / period);
            let thin = fit.rms <= cfg.scatter_ratio * diameter;
            let covered = fit.max_gap <= cfg.max_angle_gap;
            if thin && covered {
                out.label = AttractorLabel::Torus2;
                out.reason = format!(
                    "returns lie on a closed curve: scatter {:.3e} vs diameter {:.3e}",
                    fit.rms, diameter
                );
            } else if !covered {
                out.reason = format!(
                    "returns leave an angular gap of {:.3} rad around their centroid",
                    fit.max_gap
                );
            } else {
                out.reason = format!(
                    "closed-curve fit too thick: scatter {:.3e} vs diameter {:.3e}",
                    fit.rms, diameter
                );
            }
            out.curve = Some(fit.curve);
        }
        None => out.reason = "closed-curve fit failed".into(),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_from(points: Vec<Vec<f64>>, dt: f64) -> ReturnMap {
        let n = points.len();
        let times: Vec<f64> = (0..n).map(|k| (k + 1) as f64 * dt).collect();
        ReturnMap {
            t_end: times.last().copied().unwrap_or(0.0) + dt,
            times,
            residuals: vec![0.0; n],
            tangential: vec![false; n],
            points,
            t_start: 0.0,
            diagnostic: None,
        }
    }

    fn golden_circle(n: usize) -> Vec<Vec<f64>> {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        (0..n)
            .map(|k| {
                let a = 2.0 * PI * g * k as f64;
                vec![a.cos(), a.sin(), 0.0]
            })
            .collect()
    }

    #[test]
    fn golden_rotation_is_a_torus() {
        let c = classify_attractor(&map_from(golden_circle(300), 2.0 * PI), &ClassifyConfig::default());
        assert_eq!(c.label, AttractorLabel::Torus2);
        assert!(c.scatter.unwrap() < 1e-10);
        assert!((c.diameter.unwrap() - 2.0).abs() < 1e-6);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let rho = c.rotation_number.unwrap();
        // The orientation of the fitted plane fixes whether ρ or 1 − ρ is seen.
        assert!((rho - g).abs() < 1e-4 || (rho - (1.0 - g)).abs() < 1e-4, "{rho}");
    }

    #[test]
    fn converging_fixed_point_is_a_limit_cycle() {
        let pts: Vec<Vec<f64>> = (0..300)
            .map(|k| {
                let e = 0.5f64.powi(k);
                vec![1.0 + e, 2.0 - e, 0.5 * e]
            })
            .collect();
        let c = classify_attractor(&map_from(pts, 6.0), &ClassifyConfig::default());
        assert_eq!(c.label, AttractorLabel::LimitCycle);
        assert_eq!(c.cluster_count, Some(1));
    }

    #[test]
    fn period_three_cycle() {
        let base = [vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![-1.0, -1.0, 0.5]];
        let pts: Vec<Vec<f64>> = (0..120).map(|k| base[k % 3].clone()).collect();
        let c = classify_attractor(&map_from(pts, 6.0), &ClassifyConfig::default());
        assert_eq!(c.label, AttractorLabel::LimitCycle);
        assert_eq!(c.cluster_count, Some(3));
    }

    #[test]
    fn terminated_crossings_mean_equilibrium() {
        let mut m = map_from(golden_circle(5), 1.0);
        m.t_end = 500.0;
        let c = classify_attractor(&m, &ClassifyConfig::default());
        assert_eq!(c.label, AttractorLabel::Equilibrium);
        let mut empty = map_from(vec![], 1.0);
        empty.t_end = 500.0;
        assert_eq!(classify_attractor(&empty, &ClassifyConfig::default()).label, AttractorLabel::Equilibrium);
    }

    #[test]
    fn too_few_crossings_are_unclassified() {
        let c = classify_attractor(&map_from(golden_circle(10), 1.0), &ClassifyConfig::default());
        assert_eq!(c.label, AttractorLabel::Unclassified);
    }

    #[test]
    fn scattered_cloud_is_not_a_torus() {
        // Deterministic pseudo-random cloud filling a ball.
        let mut s: u64 = 12345;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let pts: Vec<Vec<f64>> = (0..300).map(|_| vec![next(), next(), next()]).collect();
        let c = classify_attractor(&map_from(pts, 6.0), &ClassifyConfig::default());
        assert_eq!(c.label, AttractorLabel::Unclassified);
    }

    #[test]
    fn thresholds_separate_calibration_cases_by_ten() {
        // Noisy circle at 0.5% of the diameter still passes with margin 10.
        let mut s: u64 = 7;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let pts: Vec<Vec<f64>> = golden_circle(300)
            .into_iter()
            .map(|p| vec![p[0] + 0.01 * next(), p[1] + 0.01 * next(), 0.01 * next()])
            .collect();
        let c = classify_attractor(&map_from(pts, 6.0), &ClassifyConfig::default());
        assert_eq!(c.label, AttractorLabel::Torus2);
        assert!(c.scatter.unwrap() * 10.0 < 0.05 * c.diameter.unwrap());
    }

    #[test]
    fn hausdorff_distance_of_shifted_circles() {
        let c = classify_attractor(&map_from(golden_circle(300), 6.0), &ClassifyConfig::default());
        let a = c.curve.unwrap();
        let mut b = a.clone();
        b.centroid[2] += 0.1;
        assert!((hausdorff_distance(&a, &b, 200) - 0.1).abs() < 1e-9);
        assert!(hausdorff_distance(&a, &a, 200) < 1e-12);
    }
}
