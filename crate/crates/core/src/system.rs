//! The symmetric pair of coupled oscillators
//!
//! ```text
//! ẍ + δ₁ẋ + Ωx + f̂₁(x, ẋ, y, ẏ) = 0
//! ÿ + δ₂ẏ + y  + f̂₂(x, ẋ, y, ẏ) = 0
//! ```
//!
//! with cubic `f̂₁` odd in `(x, ẋ)` and even in `(y, ẏ)`, and `f̂₂` the other way round.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::poly::{degree, monomial_value, Exponent, Monomial, PolyVectorField};
use crate::versal::{oscillator_linear_part, physical_perturbation, PhysicalParams};

#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorSystem {
    pub mu: PhysicalParams,
    f1: BTreeMap<Exponent, f64>,
    f2: BTreeMap<Exponent, f64>,
}

impl OscillatorSystem {
    /// `f1`, `f2` are lists of `(exponent over (x, ẋ, y, ẏ), coefficient)`.
    pub fn new(
        mu: PhysicalParams,
        f1: impl IntoIterator<Item = (Exponent, f64)>,
        f2: impl IntoIterator<Item = (Exponent, f64)>,
    ) -> Result<Self> {
        if ![mu.omega, mu.delta1, mu.delta2].iter().all(|v| v.is_finite()) {
            return Err(Error::validation("physical parameters must be finite"));
        }
        let collect = |which: usize, terms: &mut dyn Iterator<Item = (Exponent, f64)>| {
            let mut map = BTreeMap::new();
            for (e, v) in terms {
                if !v.is_finite() {
                    return Err(Error::validation("cubic coefficients must be finite"));
                }
                if degree(&e) != 3 {
                    return Err(Error::validation(format!(
                        "term {} of f{} is not cubic",
                        Monomial(e),
                        which
                    )));
                }
                let slow_odd = (e[0] + e[1]) % 2 == 1;
                let fast_odd = (e[2] + e[3]) % 2 == 1;
                let ok = if which == 1 {
                    slow_odd && !fast_odd
                } else {
                    fast_odd && !slow_odd
                };
                if !ok {
                    return Err(Error::validation(format!(
                        "term {} of f{} breaks the reflection symmetry",
                        Monomial(e),
                        which
                    )));
                }
                *map.entry(e).or_insert(0.0) += v;
            }
            map.retain(|_, v| *v != 0.0);
            Ok(map)
        };
        let f1 = collect(1, &mut f1.into_iter())?;
        let f2 = collect(2, &mut f2.into_iter())?;
        Ok(Self { mu, f1, f2 })
    }

    pub fn linear(mu: PhysicalParams) -> Self {
        Self {
            mu,
            f1: BTreeMap::new(),
            f2: BTreeMap::new(),
        }
    }

    /// `ẍ + δ₁ẋ + Ωx + (x + ẋ)(x² + y²) = 0`,
    /// `ÿ + δ₂ẏ + y + (y + ẏ)(−0.2x² + y²) = 0`.
    pub fn duffing_van_der_pol(mu: PhysicalParams) -> Self {
        Self::new(
            mu,
            [
                ([3, 0, 0, 0], 1.0),
                ([1, 0, 2, 0], 1.0),
                ([2, 1, 0, 0], 1.0),
                ([0, 1, 2, 0], 1.0),
            ],
            [
                ([2, 0, 1, 0], -0.2),
                ([0, 0, 3, 0], 1.0),
                ([2, 0, 0, 1], -0.2),
                ([0, 0, 2, 1], 1.0),
            ],
        )
        .expect("static system is symmetric")
    }

    /// The worked example at `(Ω, δ₁, δ₂) = (0.3, −0.2, −0.25)`.
    pub fn worked_example() -> Self {
        Self::duffing_van_der_pol(PhysicalParams::new(0.3, -0.2, -0.25))
    }

    pub fn f1_terms(&self) -> impl Iterator<Item = (Exponent, f64)> + '_ {
        self.f1.iter().map(|(&e, &v)| (e, v))
    }

    pub fn f2_terms(&self) -> impl Iterator<Item = (Exponent, f64)> + '_ {
        self.f2.iter().map(|(&e, &v)| (e, v))
    }

    pub fn with_params(&self, mu: PhysicalParams) -> Self {
        Self { mu, ..self.clone() }
    }

    /// Cubic part `(0, −f̂₁, 0, −f̂₂)` of the first-order system.
    pub fn cubic_field(&self) -> PolyVectorField {
        let mut f = PolyVectorField::new();
        for (e, v) in self.f1_terms() {
            f.add_term(1, e, -v);
        }
        for (e, v) in self.f2_terms() {
            f.add_term(3, e, -v);
        }
        f
    }

    /// `A₀ + C(μ)`.
    pub fn linear_matrix(&self) -> DMatrix<f64> {
        oscillator_linear_part() + physical_perturbation(self.mu)
    }

    pub fn rhs(&self, y: &[f64; 4]) -> [f64; 4] {
        let f1: f64 = self.f1.iter().map(|(e, v)| v * monomial_value(e, y)).sum();
        let f2: f64 = self.f2.iter().map(|(e, v)| v * monomial_value(e, y)).sum();
        let mu = &self.mu;
        [
            y[1],
            -mu.omega * y[0] - mu.delta1 * y[1] - f1,
            y[3],
            -y[2] - mu.delta2 * y[3] - f2,
        ]
    }
}
