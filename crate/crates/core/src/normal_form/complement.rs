//! Choices of complement to the range of the homological operator.
//!
//! The cubic normal form is only defined up to the complement in which the
//! surviving terms are kept. Each choice is a [`ResonantComplement`]; a
//! [`ComplementRegistry`] resolves them by name at runtime.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::poly::{CubicFieldSpace, Exponent};

/// Name of the complement used when none is requested.
pub const DEFAULT_COMPLEMENT: &str = "fischer";

pub trait ResonantComplement: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    /// Columns spanning a complement of `range(bracket)` in `space` coordinates.
    fn basis(&self, space: &CubicFieldSpace, bracket: &DMatrix<f64>) -> Result<DMatrix<f64>>;
}

/// Orthogonal complement of the range under the Fischer inner product
/// `⟨y^a, y^b⟩ = a! δ_ab`. With this weighting the complement is spanned by
/// fields commuting with the transposed linear part.
#[derive(Debug, Default)]
pub struct FischerOrthogonal;

impl ResonantComplement for FischerOrthogonal {
    fn name(&self) -> &'static str {
        "fischer"
    }

    fn description(&self) -> &'static str {
        "orthogonal complement of the bracket range under the Fischer inner product"
    }

    fn basis(&self, space: &CubicFieldSpace, bracket: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        // v ⟂_G range(L)  ⇔  Lᵀ G v = 0  ⇔  v ∈ G⁻¹ ker(Lᵀ).
        let svd = bracket.clone().svd(true, false);
        let u = svd
            .u
            .as_ref()
            .ok_or_else(|| Error::numerical("SVD did not return left singular vectors"))?;
        let smax = svd.singular_values.max();
        let null: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] < 1e-10 * smax)
            .collect();
        let w = space.fischer_weights();
        let mut b = DMatrix::zeros(space.dimension(), null.len());
        for (k, &i) in null.iter().enumerate() {
            for r in 0..space.dimension() {
                b[(r, k)] = u[(r, i)] / w[r];
            }
        }
        Ok(b)
    }
}

/// The span of the Poincaré form
/// `(φ₂y₁, φ₁y₁ + φ₂y₂, (φ₃ + iφ₄)z)` with `φ_j` linear in `y₁²` and `|z|²`.
#[derive(Debug, Default)]
pub struct PoincareSpan;

impl ResonantComplement for PoincareSpan {
    fn name(&self) -> &'static str {
        "poincare"
    }

    fn description(&self) -> &'static str {
        "explicit span (phi2 y1, phi1 y1 + phi2 y2, (phi3 + i phi4) z)"
    }

    fn basis(&self, space: &CubicFieldSpace, _bracket: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        structured_basis(space, true)
    }
}

/// The span after the shift `y₂ ↦ y₂ + φ₂y₁`, which leaves `ẏ₁ = y₂` free of
/// nonlinear terms: `(0, φ₁y₁ + φ₂y₂, (φ₃ + iφ₄)z)`.
#[derive(Debug, Default)]
pub struct SimplifiedSpan;

impl ResonantComplement for SimplifiedSpan {
    fn name(&self) -> &'static str {
        "simplified"
    }

    fn description(&self) -> &'static str {
        "explicit span (0, phi1 y1 + phi2 y2, (phi3 + i phi4) z)"
    }

    fn basis(&self, space: &CubicFieldSpace, _bracket: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        structured_basis(space, false)
    }
}

/// The eight structured resonant fields, one column per coefficient in the
/// order `φ₁,₁₀ φ₁,₀₁ φ₂,₁₀ φ₂,₀₁ φ₃,₁₀ φ₃,₀₁ φ₄,₁₀ φ₄,₀₁`.
///
/// `with_y1_terms` selects whether `φ₂` also multiplies `y₁` in the first
/// component.
pub fn structured_basis(space: &CubicFieldSpace, with_y1_terms: bool) -> Result<DMatrix<f64>> {
    const Y1SQ: [u8; 4] = [2, 0, 0, 0];
    const R2: [[u8; 4]; 2] = [[0, 0, 2, 0], [0, 0, 0, 2]];
    // `factor` is y1^2 or the pair (y3^2, y4^2) making |z|^2.
    let factors: [Vec<Exponent>; 2] = [vec![Y1SQ], R2.to_vec()];
    let times = |f: &Exponent, var: usize| -> Exponent {
        let mut e = *f;
        e[var] += 1;
        e
    };

    let mut cols: Vec<Vec<(usize, Exponent, f64)>> = Vec::with_capacity(8);
    // φ1: (0, φ1 y1)
    for fac in &factors {
        cols.push(fac.iter().map(|f| (1, times(f, 0), 1.0)).collect());
    }
    // φ2: (φ2 y1, φ2 y2)
    for fac in &factors {
        let mut col: Vec<_> = fac.iter().map(|f| (1, times(f, 1), 1.0)).collect();
        if with_y1_terms {
            col.extend(fac.iter().map(|f| (0, times(f, 0), 1.0)));
        }
        cols.push(col);
    }
    // φ3: (φ3 y3, φ3 y4)
    for fac in &factors {
        let mut col: Vec<_> = fac.iter().map(|f| (2, times(f, 2), 1.0)).collect();
        col.extend(fac.iter().map(|f| (3, times(f, 3), 1.0)));
        cols.push(col);
    }
    // φ4: (φ4 y4, −φ4 y3)
    for fac in &factors {
        let mut col: Vec<_> = fac.iter().map(|f| (2, times(f, 3), 1.0)).collect();
        col.extend(fac.iter().map(|f| (3, times(f, 2), -1.0)));
        cols.push(col);
    }

    let mut b = DMatrix::zeros(space.dimension(), cols.len());
    for (k, col) in cols.iter().enumerate() {
        for &(c, e, v) in col {
            let i = space
                .index_of(c, e)
                .ok_or_else(|| Error::numerical("structured resonant term outside the equivariant space"))?;
            b[(i, k)] += v;
        }
    }
    Ok(b)
}

/// Name-indexed collection of complement strategies.
#[derive(Clone)]
pub struct ComplementRegistry {
    entries: Vec<Arc<dyn ResonantComplement>>,
}

impl ComplementRegistry {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    /// Registers a strategy, replacing any existing one with the same name.
    pub fn register(&mut self, complement: Arc<dyn ResonantComplement>) {
        self.entries.retain(|c| c.name() != complement.name());
        self.entries.push(complement);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ResonantComplement>> {
        self.entries
            .iter()
            .find(|c| c.name() == name)
            .cloned()
            .ok_or_else(|| {
                Error::validation(format!(
                    "unknown complement `{}` (available: {})",
                    name,
                    self.names().join(", ")
                ))
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|c| c.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn ResonantComplement>> {
        self.entries.iter()
    }
}

impl Default for ComplementRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(FischerOrthogonal));
        r.register(Arc::new(PoincareSpan));
        r.register(Arc::new(SimplifiedSpan));
        r
    }
}

impl std::fmt::Debug for ComplementRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ComplementRegistry")
            .field("entries", &self.names())
            .finish()
    }
}
