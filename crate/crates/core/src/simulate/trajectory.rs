use crate::error::{Error, Result};

/// Accepted steps of an integration together with their dense-output
/// polynomials. Segment `i` covers `[times[i], times[i + 1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    dense: Vec<f64>,
}

impl Trajectory {
    pub(crate) fn start(dim: usize, t0: f64, y0: &[f64]) -> Self {
        Self {
            dim,
            times: vec![t0],
            states: y0.to_vec(),
            dense: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, t: f64, y: &[f64], dense: Vec<f64>) {
        debug_assert_eq!(dense.len(), 5 * self.dim);
        self.times.push(t);
        self.states.extend_from_slice(y);
        self.dense.extend(dense);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored states (one more than the number of steps).
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory has an initial point")
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.times.iter().copied().zip(self.states.chunks(self.dim))
    }

    pub fn segment_count(&self) -> usize {
        self.times.len() - 1
    }

    /// Index of the segment containing `t`, clamped to the valid range.
    pub fn segment_index(&self, t: f64) -> usize {
        let n = self.segment_count();
        if n == 0 {
            return 0;
        }
        let k = self.times.partition_point(|&s| s <= t);
        k.saturating_sub(1).min(n - 1)
    }

    fn coeffs(&self, seg: usize) -> &[f64] {
        &self.dense[seg * 5 * self.dim..(seg + 1) * 5 * self.dim]
    }

    /// Dense output on segment `seg` at local fraction `theta ∈ [0, 1]`.
    pub fn eval_segment(&self, seg: usize, theta: f64) -> Vec<f64> {
        let n = self.dim;
        let c = self.coeffs(seg);
        let t1 = 1.0 - theta;
        (0..n)
            .map(|i| {
                c[i] + theta * (c[n + i] + t1 * (c[2 * n + i] + theta * (c[3 * n + i] + t1 * c[4 * n + i])))
            })
            .collect()
    }

    /// Time derivative of the dense output on segment `seg`.
    pub fn eval_segment_derivative(&self, seg: usize, theta: f64) -> Vec<f64> {
        let n = self.dim;
        let c = self.coeffs(seg);
        let h = self.times[seg + 1] - self.times[seg];
        let t1 = 1.0 - theta;
        let d3 = 1.0 - 2.0 * theta;
        let d4 = theta * (2.0 - 3.0 * theta);
        let d5 = 2.0 * theta * t1 * (1.0 - 2.0 * theta);
        (0..n)
            .map(|i| (c[n + i] + d3 * c[2 * n + i] + d4 * c[3 * n + i] + d5 * c[4 * n + i]) / h)
            .collect()
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let seg = self.segment_index(t);
        let (a, b) = (self.times[seg], self.times[seg + 1]);
        (seg, ((t - a) / (b - a)).clamp(0.0, 1.0))
    }

    /// State at time `t`, clamped to the integration interval.
    pub fn interpolate(&self, t: f64) -> Vec<f64> {
        if self.segment_count() == 0 {
            return self.state(0).to_vec();
        }
        let (seg, theta) = self.locate(t);
        self.eval_segment(seg, theta)
    }

    pub fn interpolate_derivative(&self, t: f64) -> Vec<f64> {
        if self.segment_count() == 0 {
            return vec![0.0; self.dim];
        }
        let (seg, theta) = self.locate(t);
        self.eval_segment_derivative(seg, theta)
    }

    /// Samples one component on a uniform grid of `n` points over `[t0, t1]`.
    pub fn resample(&self, component: usize, t0: f64, t1: f64, n: usize) -> Result<Vec<f64>> {
        if component >= self.dim {
            return Err(Error::validation(format!(
                "component {} out of range for a {}-dimensional trajectory",
                component, self.dim
            )));
        }
        if !(t0 >= self.t_start() && t1 <= self.t_end() && t1 > t0) || n < 2 {
            return Err(Error::validation("resampling window outside the trajectory"));
        }
        let dt = (t1 - t0) / (n - 1) as f64;
        Ok((0..n)
            .map(|k| self.interpolate(t0 + dt * k as f64)[component])
            .collect())
    }

    /// Restriction to times `≥ t`, keeping whole segments.
    pub fn tail_from(&self, t: f64) -> Trajectory {
        let seg = self.segment_index(t);
        let n = self.dim;
        Trajectory {
            dim: n,
            times: self.times[seg..].to_vec(),
            states: self.states[seg * n..].to_vec(),
            dense: self.dense[seg * 5 * n..].to_vec(),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.states.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}
