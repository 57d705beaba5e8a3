//! Polynomial vector fields on `R⁴` with the reflection symmetries of the
//! coupled oscillator pair.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Exponents of `y₁^a y₂^b y₃^c y₄^d`.
pub type Exponent = [u8; 4];

pub fn degree(e: &Exponent) -> u32 {
    e.iter().map(|&k| k as u32).sum()
}

/// Fischer weight `a! b! c! d!` of a monomial.
pub fn fischer_weight(e: &Exponent) -> f64 {
    e.iter()
        .map(|&k| (1..=k as u64).product::<u64>() as f64)
        .product()
}

/// True if a monomial in `component` is compatible with both reflections
/// `(y₁,y₂) ↦ −(y₁,y₂)` and `(y₃,y₄) ↦ −(y₃,y₄)`.
pub fn is_equivariant(component: usize, e: &Exponent) -> bool {
    let slow = (e[0] + e[1]) % 2;
    let fast = (e[2] + e[3]) % 2;
    match component {
        0 | 1 => slow == 1 && fast == 0,
        2 | 3 => slow == 0 && fast == 1,
        _ => false,
    }
}

/// Sparse polynomial vector field in the state `(y₁, y₂, y₃, y₄)`.
///
/// Terms are keyed by zero-based component index and exponent. Zero
/// coefficients are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolyVectorField {
    terms: BTreeMap<(usize, Exponent), f64>,
}

impl PolyVectorField {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, Exponent, f64)>) -> Self {
        let mut f = Self::new();
        for (c, e, v) in terms {
            f.add_term(c, e, v);
        }
        f
    }

    pub fn add_term(&mut self, component: usize, exponent: Exponent, coefficient: f64) {
        assert!(component < 4, "component index out of range");
        let entry = self.terms.entry((component, exponent)).or_insert(0.0);
        *entry += coefficient;
        if *entry == 0.0 {
            self.terms.remove(&(component, exponent));
        }
    }

    pub fn coefficient(&self, component: usize, exponent: Exponent) -> f64 {
        self.terms.get(&(component, exponent)).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, Exponent, f64)> + '_ {
        self.terms.iter().map(|(&(c, e), &v)| (c, e, v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Only degree-1 and degree-3 monomials, each equivariant under both reflections.
    pub fn check_invariants(&self) -> Result<()> {
        for (c, e, _) in self.terms() {
            let d = degree(&e);
            if d != 1 && d != 3 {
                return Err(Error::validation(format!(
                    "monomial {} in component {} has degree {}; only degrees 1 and 3 are allowed",
                    Monomial(e),
                    c + 1,
                    d
                )));
            }
            if !is_equivariant(c, &e) {
                return Err(Error::validation(format!(
                    "monomial {} in component {} breaks the reflection symmetry",
                    Monomial(e),
                    c + 1
                )));
            }
        }
        Ok(())
    }

    pub fn is_cubic(&self) -> bool {
        self.terms().all(|(_, e, _)| degree(&e) == 3)
    }

    pub fn eval(&self, y: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (c, e, v) in self.terms() {
            out[c] += v * monomial_value(&e, y);
        }
        out
    }

    /// Lie bracket with a linear field: `Dh(y)·Ay − A h(y)`.
    ///
    /// This is the homological operator: a near-identity change `x = y + h(y)`
    /// removes `ad_A(h)` from the nonlinear terms.
    pub fn linear_bracket(&self, a: &DMatrix<f64>) -> PolyVectorField {
        assert_eq!(a.shape(), (4, 4));
        let mut out = PolyVectorField::new();
        for (c, e, v) in self.terms() {
            // Dh · Ay
            for k in 0..4 {
                if e[k] == 0 {
                    continue;
                }
                let mut reduced = e;
                reduced[k] -= 1;
                for l in 0..4 {
                    let akl = a[(k, l)];
                    if akl != 0.0 {
                        let mut ex = reduced;
                        ex[l] += 1;
                        out.add_term(c, ex, v * e[k] as f64 * akl);
                    }
                }
            }
            // − A h
            for j in 0..4 {
                let ajc = a[(j, c)];
                if ajc != 0.0 {
                    out.add_term(j, e, -v * ajc);
                }
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> PolyVectorField {
        PolyVectorField::from_terms(self.terms().map(|(c, e, v)| (c, e, v * s)))
    }

    pub fn sub(&self, other: &PolyVectorField) -> PolyVectorField {
        let mut out = self.clone();
        for (c, e, v) in other.terms() {
            out.add_term(c, e, -v);
        }
        out
    }

    pub fn add(&self, other: &PolyVectorField) -> PolyVectorField {
        let mut out = self.clone();
        for (c, e, v) in other.terms() {
            out.add_term(c, e, v);
        }
        out
    }

    /// Drops coefficients with magnitude at most `eps`.
    pub fn pruned(&self, eps: f64) -> PolyVectorField {
        PolyVectorField::from_terms(self.terms().filter(|t| t.2.abs() > eps))
    }
}

pub fn monomial_value(e: &Exponent, y: &[f64; 4]) -> f64 {
    e.iter()
        .zip(y)
        .map(|(&k, &x)| x.powi(k as i32))
        .product()
}

/// Display helper: `y1^3 y3^2`.
pub struct Monomial(pub Exponent);

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &p) in self.0.iter().enumerate() {
            if p == 0 {
                continue;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if p == 1 {
                write!(f, "y{}", k + 1)?;
            } else {
                write!(f, "y{}^{}", k + 1, p)?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// All exponents of a given total degree in four variables, lexicographically
/// descending.
pub fn exponents_of_degree(d: u8) -> Vec<Exponent> {
    let mut out = Vec::new();
    for a in (0..=d).rev() {
        for b in (0..=d - a).rev() {
            for c in (0..=d - a - b).rev() {
                out.push([a, b, c, d - a - b - c]);
            }
        }
    }
    out
}

/// Coordinates for the space of equivariant homogeneous cubic vector fields.
///
/// The basis is the 40 pairs `(component, exponent)` that survive the two
/// reflections; fields are mapped to coefficient vectors in that order.
#[derive(Debug, Clone)]
pub struct CubicFieldSpace {
    basis: Vec<(usize, Exponent)>,
    index: BTreeMap<(usize, Exponent), usize>,
}

impl CubicFieldSpace {
    pub fn equivariant() -> Self {
        let basis: Vec<(usize, Exponent)> = (0..4)
            .flat_map(|c| {
                exponents_of_degree(3)
                    .into_iter()
                    .filter(move |e| is_equivariant(c, e))
                    .map(move |e| (c, e))
            })
            .collect();
        let index = basis.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        Self { basis, index }
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[(usize, Exponent)] {
        &self.basis
    }

    pub fn index_of(&self, component: usize, exponent: Exponent) -> Option<usize> {
        self.index.get(&(component, exponent)).copied()
    }

    pub fn to_vector(&self, field: &PolyVectorField) -> Result<DVector<f64>> {
        let mut v = DVector::zeros(self.dimension());
        for (c, e, x) in field.terms() {
            let i = self.index_of(c, e).ok_or_else(|| {
                Error::validation(format!(
                    "term {} in component {} is not an equivariant cubic",
                    Monomial(e),
                    c + 1
                ))
            })?;
            v[i] = x;
        }
        Ok(v)
    }

    pub fn from_vector(&self, v: &DVector<f64>) -> PolyVectorField {
        PolyVectorField::from_terms(
            self.basis
                .iter()
                .zip(v.iter())
                .filter(|(_, &x)| x != 0.0)
                .map(|(&(c, e), &x)| (c, e, x)),
        )
    }

    /// Matrix of `h ↦ Dh·Ay − Ah` restricted to this space.
    pub fn bracket_matrix(&self, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.dimension();
        let mut m = DMatrix::zeros(n, n);
        for (j, &(c, e)) in self.basis.iter().enumerate() {
            let image = PolyVectorField::from_terms([(c, e, 1.0)]).linear_bracket(a);
            let col = self.to_vector(&image)?;
            m.set_column(j, &col);
        }
        Ok(m)
    }

    /// Diagonal Fischer weights of the basis.
    pub fn fischer_weights(&self) -> DVector<f64> {
        DVector::from_iterator(self.dimension(), self.basis.iter().map(|(_, e)| fischer_weight(e)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::versal::oscillator_linear_part;

    #[test]
    fn equivariant_cubic_space_has_forty_fields() {
        let s = CubicFieldSpace::equivariant();
        assert_eq!(s.dimension(), 40);
        assert_eq!(exponents_of_degree(3).len(), 20);
    }

    #[test]
    fn rejects_symmetry_breaking_and_even_terms() {
        let f = PolyVectorField::from_terms([(1, [2, 0, 0, 0], 1.0)]);
        assert!(f.check_invariants().is_err());
        let f = PolyVectorField::from_terms([(1, [1, 0, 1, 1], 1.0)]);
        assert!(f.check_invariants().is_ok());
        let f = PolyVectorField::from_terms([(1, [1, 0, 1, 0], 1.0), (3, [0, 0, 0, 3], 1.0)]);
        assert!(f.check_invariants().is_err());
    }

    #[test]
    fn bracket_of_resonant_term_vanishes_only_when_commuting() {
        let a = oscillator_linear_part();
        // (0, y1^3) is not in the range but it is also not in the kernel.
        let f = PolyVectorField::from_terms([(1, [3, 0, 0, 0], 1.0)]);
        let g = f.linear_bracket(&a);
        // D(0,y1^3)·(y2,0,y4,-y3) = (0, 3 y1^2 y2); A h = (y1^3, 0, 0, 0).
        assert_eq!(g.coefficient(1, [2, 1, 0, 0]), 3.0);
        assert_eq!(g.coefficient(0, [3, 0, 0, 0]), -1.0);
        // The rotation-invariant field (y3, y4)|z|^2 commutes with the rotation.
        let r = PolyVectorField::from_terms([
            (2, [0, 0, 3, 0], 1.0),
            (2, [0, 0, 1, 2], 1.0),
            (3, [0, 0, 2, 1], 1.0),
            (3, [0, 0, 0, 3], 1.0),
        ]);
        assert!(r.linear_bracket(&a).is_zero());
    }

    #[test]
    fn bracket_agrees_with_pointwise_derivative() {
        let a = oscillator_linear_part();
        let h = PolyVectorField::from_terms([
            (0, [1, 0, 2, 0], 0.7),
            (1, [2, 1, 0, 0], -1.3),
            (2, [1, 1, 1, 0], 0.4),
            (3, [0, 2, 0, 1], 2.0),
        ]);
        let g = h.linear_bracket(&a);
        let y = [0.3, -0.7, 1.1, 0.5];
        let ay: Vec<f64> = (0..4).map(|i| (0..4).map(|j| a[(i, j)] * y[j]).sum()).collect();
        // Directional derivative by a five-point stencil (exact for cubics).
        let eps = 1e-2;
        let at = |s: f64| {
            let p = [y[0] + s * ay[0], y[1] + s * ay[1], y[2] + s * ay[2], y[3] + s * ay[3]];
            h.eval(&p)
        };
        let (p1, m1, p2, m2) = (at(eps), at(-eps), at(2.0 * eps), at(-2.0 * eps));
        let hy = h.eval(&y);
        let gy = g.eval(&y);
        for i in 0..4 {
            let d = (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * eps);
            let ah: f64 = (0..4).map(|j| a[(i, j)] * hy[j]).sum();
            assert!((d - ah - gy[i]).abs() < 1e-12, "component {i}");
        }
    }

    #[test]
    fn fischer_weights() {
        assert_eq!(fischer_weight(&[3, 0, 0, 0]), 6.0);
        assert_eq!(fischer_weight(&[2, 1, 0, 0]), 2.0);
        assert_eq!(fischer_weight(&[1, 0, 1, 1]), 1.0);
    }

    #[test]
    fn monomial_display() {
        assert_eq!(Monomial([3, 0, 0, 0]).to_string(), "y1^3");
        assert_eq!(Monomial([1, 0, 2, 0]).to_string(), "y1 y3^2");
    }
}
