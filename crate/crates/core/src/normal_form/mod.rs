//! Cubic Poincaré normal form of the symmetric oscillator pair.
//!
//! The cubic terms `F` are split as `F = ad_{A₀}(h) + R`, where `ad_{A₀}(h)`
//! is removed by the change `x = y + h(y)` and `R` lies in a chosen complement
//! of the bracket range. Reading `R` in the structured basis gives the
//! coefficients `φ_{j,kl}` of
//!
//! ```text
//! ẏ₁ = y₂
//! ẏ₂ = [α₁ + φ₁,₁₀y₁² + φ₁,₀₁r²]y₁ + [α₂ + φ₂,₁₀y₁² + φ₂,₀₁r²]y₂
//! ṙ  = [α₃ + φ₃,₁₀y₁² + φ₃,₀₁r²]r
//! θ̇  = 1 + φ₄,₁₀y₁² + φ₄,₀₁r²
//! ```

mod complement;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use complement::{
    structured_basis, ComplementRegistry, FischerOrthogonal, PoincareSpan, ResonantComplement,
    SimplifiedSpan, DEFAULT_COMPLEMENT,
};

use crate::error::{Error, Result};
use crate::poly::{CubicFieldSpace, PolyVectorField};
use crate::system::OscillatorSystem;
use crate::versal::{oscillator_linear_part, UnfoldingPoint};

/// Names of the eight cubic coefficients, in storage order.
pub const COEFF_NAMES: [&str; 8] = [
    "phi1_10", "phi1_01", "phi2_10", "phi2_01", "phi3_10", "phi3_01", "phi4_10", "phi4_01",
];

/// Coefficients of the cubic truncation, plus the averaged Hopf–Hopf
/// cross coefficients `c` and `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFormCoeffs {
    /// `phi[j - 1] = [φ_{j,10}, φ_{j,01}]`.
    pub phi: [[f64; 2]; 4],
    pub c: f64,
    pub d: f64,
}

impl NormalFormCoeffs {
    /// Builds the coefficient set with `c`, `d` from the averaging rule.
    pub fn new(phi: [[f64; 2]; 4]) -> Self {
        let mut out = Self { phi, c: 0.0, d: 0.0 };
        let (c, d) = averaged_hh_coefficients(&out);
        out.c = c;
        out.d = d;
        out
    }

    pub fn zero() -> Self {
        Self::new([[0.0; 2]; 4])
    }

    /// From the flat order of [`COEFF_NAMES`].
    pub fn from_flat(v: [f64; 8]) -> Self {
        Self::new([[v[0], v[1]], [v[2], v[3]], [v[4], v[5]], [v[6], v[7]]])
    }

    pub fn flat(&self) -> [f64; 8] {
        let p = &self.phi;
        [p[0][0], p[0][1], p[1][0], p[1][1], p[2][0], p[2][1], p[3][0], p[3][1]]
    }

    /// `φ_{j,10}`, `j` one-based.
    pub fn phi_10(&self, j: usize) -> f64 {
        self.phi[j - 1][0]
    }

    /// `φ_{j,01}`, `j` one-based.
    pub fn phi_01(&self, j: usize) -> f64 {
        self.phi[j - 1][1]
    }

    pub fn is_finite(&self) -> bool {
        self.flat().iter().all(|v| v.is_finite()) && self.c.is_finite() && self.d.is_finite()
    }

    /// Right-hand side of the truncated three-dimensional normal form at `(y₁, y₂, r)`.
    pub fn rhs(&self, alpha: &UnfoldingPoint, s: &[f64; 3]) -> [f64; 3] {
        let (y1, y2, r) = (s[0], s[1], s[2]);
        let (q, r2) = (y1 * y1, r * r);
        [
            y2,
            (alpha.alpha1 + self.phi_10(1) * q + self.phi_01(1) * r2) * y1
                + (alpha.alpha2 + self.phi_10(2) * q + self.phi_01(2) * r2) * y2,
            (alpha.alpha3 + self.phi_10(3) * q + self.phi_01(3) * r2) * r,
        ]
    }

    /// Jacobian of [`Self::rhs`].
    pub fn jacobian(&self, alpha: &UnfoldingPoint, s: &[f64; 3]) -> [[f64; 3]; 3] {
        let (y1, y2, r) = (s[0], s[1], s[2]);
        let (q, r2) = (y1 * y1, r * r);
        let g1 = alpha.alpha1 + self.phi_10(1) * q + self.phi_01(1) * r2;
        let g2 = alpha.alpha2 + self.phi_10(2) * q + self.phi_01(2) * r2;
        let g3 = alpha.alpha3 + self.phi_10(3) * q + self.phi_01(3) * r2;
        [
            [0.0, 1.0, 0.0],
            [
                g1 + 2.0 * self.phi_10(1) * q + 2.0 * self.phi_10(2) * y1 * y2,
                g2,
                2.0 * r * (self.phi_01(1) * y1 + self.phi_01(2) * y2),
            ],
            [2.0 * self.phi_10(3) * y1 * r, 0.0, g3 + 2.0 * self.phi_01(3) * r2],
        ]
    }

    /// Phase velocity `θ̇ = 1 + φ₄`.
    pub fn phase_rate(&self, y1: f64, r: f64) -> f64 {
        1.0 + self.phi_10(4) * y1 * y1 + self.phi_01(4) * r * r
    }

    /// The cubic terms as a Cartesian field in `(y₁, y₂, y₃, y₄)`,
    /// with `z = y₃ − iy₄` and no nonlinear terms in `ẏ₁`.
    pub fn cartesian_cubic_field(&self) -> PolyVectorField {
        let space = CubicFieldSpace::equivariant();
        let basis = structured_basis(&space, false).expect("structured basis");
        let v = basis * DVector::from_row_slice(&self.flat());
        space.from_vector(&v).pruned(0.0)
    }
}

/// `c = φ₃,₁₀ / 2`, `d = φ₂,₀₁ / 2`: the cross terms of the two amplitude
/// equations after averaging `y₁² = ρ² cos² φ` and `y₂² ∝ sin² φ` over the slow phase.
pub fn averaged_hh_coefficients(coeffs: &NormalFormCoeffs) -> (f64, f64) {
    (0.5 * coeffs.phi_10(3), 0.5 * coeffs.phi_01(2))
}

/// Result of one homological solve.
#[derive(Debug, Clone)]
pub struct HomologicalSolution {
    /// Generator `h` of the change `x = y + h(y)`.
    pub transform: PolyVectorField,
    pub resonant_remainder: PolyVectorField,
    /// `max |ad(h) + R − F|` over coefficients.
    pub residual: f64,
    /// Name of the complement that `resonant_remainder` lies in.
    pub complement: String,
}

/// Solves the homological equation in the default (Fischer) complement.
pub fn homological_solve(cubic_field: &PolyVectorField, tol: f64) -> Result<HomologicalSolution> {
    let registry = ComplementRegistry::default();
    let complement = registry.get(DEFAULT_COMPLEMENT)?;
    homological_solve_with(cubic_field, complement.as_ref(), tol)
}

/// Splits `F = ad_{A₀}(h) + R` with `R` in the given complement and `h` of
/// minimum norm.
pub fn homological_solve_with(
    cubic_field: &PolyVectorField,
    complement: &dyn ResonantComplement,
    tol: f64,
) -> Result<HomologicalSolution> {
    cubic_field.check_invariants()?;
    if !cubic_field.is_cubic() {
        return Err(Error::validation(
            "homological solve expects homogeneous cubic terms only",
        ));
    }
    let space = CubicFieldSpace::equivariant();
    let n = space.dimension();
    let bracket = space.bracket_matrix(&oscillator_linear_part())?;
    let basis = complement.basis(&space, &bracket)?;
    let k = basis.ncols();

    let mut system = DMatrix::zeros(n, n + k);
    system.columns_mut(0, n).copy_from(&bracket);
    system.columns_mut(n, k).copy_from(&basis);
    let rhs = space.to_vector(cubic_field)?;

    let svd = system.clone().svd(true, true);
    let eps = 1e-10 * svd.singular_values.max();
    let solve = |b: &DVector<f64>| {
        svd.solve(b, eps)
            .map_err(|e| Error::numerical(format!("homological least squares failed: {e}")))
    };
    let mut x = solve(&rhs)?;
    // One refinement step.
    let correction = solve(&(&rhs - &system * &x))?;
    x += correction;

    let h = x.rows(0, n).into_owned();
    let coords = x.rows(n, k).into_owned();
    let remainder = &basis * &coords;
    let residual = (&bracket * &h + &remainder - &rhs).amax();
    if !(residual <= tol) {
        return Err(Error::numerical(format!(
            "homological residual {residual:e} exceeds tolerance {tol:e}"
        )));
    }
    Ok(HomologicalSolution {
        transform: space.from_vector(&h),
        resonant_remainder: space.from_vector(&remainder),
        residual,
        complement: complement.name().to_string(),
    })
}

/// Coordinates of a field in a structured resonant span, and the norm of its
/// component orthogonal to that span.
pub fn span_coordinates(field: &PolyVectorField, with_y1_terms: bool) -> Result<([f64; 8], f64)> {
    let space = CubicFieldSpace::equivariant();
    let basis = structured_basis(&space, with_y1_terms)?;
    let v = space.to_vector(field)?;
    let coords = basis
        .clone()
        .svd(true, true)
        .solve(&v, 1e-14)
        .map_err(|e| Error::numerical(format!("span projection failed: {e}")))?;
    let defect = (&basis * &coords - &v).norm();
    let mut out = [0.0; 8];
    out.copy_from_slice(coords.as_slice());
    Ok((out, defect))
}

/// Applies `(y₁, y₂, z) ↦ (y₁, y₂ + φ₂y₁, z)` to Poincaré-span coordinates.
///
/// With `φ₂ = a y₁² + b|z|²` the new variable `w = y₂ + φ₂y₁` obeys
/// `ẇ = φ₁y₁ + (4a y₁² + 2b|z|²) w` up to quintic terms, so only the two
/// `φ₂` coefficients change.
pub fn eliminate_y1_terms(poincare: [f64; 8]) -> [f64; 8] {
    let mut out = poincare;
    out[2] *= 4.0;
    out[3] *= 2.0;
    out
}

/// Cubic normal-form coefficients of an oscillator system, evaluated at `μ = 0`.
pub fn reduce_to_normal_form(system: &OscillatorSystem) -> Result<NormalFormCoeffs> {
    reduce_with(system, &ComplementRegistry::default().get(DEFAULT_COMPLEMENT)?)
}

/// As [`reduce_to_normal_form`] with an explicit complement strategy. The
/// returned coefficients do not depend on the choice.
pub fn reduce_with(
    system: &OscillatorSystem,
    complement: &std::sync::Arc<dyn ResonantComplement>,
) -> Result<NormalFormCoeffs> {
    let field = system.cubic_field();
    let tol = 1e-10 * field.max_abs_coefficient().max(1.0);
    let sol = homological_solve_with(&field, complement.as_ref(), tol)?;
    // Bring an arbitrary complement back to the Poincaré span before the shift.
    let remainder = if complement.name() == "fischer" || complement.name() == "poincare" {
        sol.resonant_remainder
    } else {
        homological_solve_with(&sol.resonant_remainder, &PoincareSpan, tol)?.resonant_remainder
    };
    let (coords, defect) = span_coordinates(&remainder, true)?;
    if defect > tol {
        return Err(Error::numerical(format!(
            "remainder leaves the resonant span by {defect:e}"
        )));
    }
    Ok(NormalFormCoeffs::from_flat(eliminate_y1_terms(coords)))
}
