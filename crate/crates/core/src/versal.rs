//! Linear theory of the singular matrix: codimension of a Jordan structure,
//! the commutator (orbit tangent) operator, centralizers, the real miniversal
//! family and the physical-to-unfolding parameter map.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative threshold below which a singular value counts as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// One distinct eigenvalue and the sizes of its Jordan blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanEntry {
    pub eigenvalue: Complex64,
    /// Block orders, largest first.
    pub block_sizes: Vec<usize>,
}

/// Declared Jordan structure of a matrix.
///
/// The structure is always supplied by the caller; it is never inferred from
/// a numerical matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanSpec {
    entries: Vec<JordanEntry>,
}

impl JordanSpec {
    pub fn new(entries: Vec<JordanEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::validation("Jordan spec has no eigenvalues"));
        }
        for (i, e) in entries.iter().enumerate() {
            if e.block_sizes.is_empty() {
                return Err(Error::validation(format!(
                    "eigenvalue {} has no Jordan blocks",
                    e.eigenvalue
                )));
            }
            if e.block_sizes.contains(&0) {
                return Err(Error::validation("Jordan block sizes must be positive"));
            }
            if e.block_sizes.windows(2).any(|w| w[0] < w[1]) {
                return Err(Error::validation(format!(
                    "block sizes for eigenvalue {} are not sorted descending: {:?}",
                    e.eigenvalue, e.block_sizes
                )));
            }
            if !(e.eigenvalue.re.is_finite() && e.eigenvalue.im.is_finite()) {
                return Err(Error::validation("eigenvalues must be finite"));
            }
            for other in &entries[..i] {
                if other.eigenvalue == e.eigenvalue {
                    return Err(Error::validation(format!(
                        "eigenvalue {} listed more than once",
                        e.eigenvalue
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    /// Parses `"0:2; i:1; -i:1"` style text: `eigenvalue:block,block,...`
    /// entries separated by semicolons.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (k, part) in text.split(';').enumerate() {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let loc = format!("entry {}", k + 1);
            let (ev, blocks) = part
                .split_once(':')
                .ok_or_else(|| Error::parse(&loc, "expected `eigenvalue:blocks`"))?;
            let eigenvalue = parse_complex(ev).map_err(|m| Error::parse(&loc, m))?;
            let block_sizes = blocks
                .split(',')
                .map(|b| {
                    b.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::parse(&loc, format!("bad block size `{}`", b.trim())))
                })
                .collect::<Result<Vec<_>>>()?;
            entries.push(JordanEntry {
                eigenvalue,
                block_sizes,
            });
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[JordanEntry] {
        &self.entries
    }

    /// Matrix dimension `n`, the total of all block sizes.
    pub fn dimension(&self) -> usize {
        self.entries.iter().flat_map(|e| e.block_sizes.iter()).sum()
    }

    /// The block-diagonal Jordan matrix, ones on the superdiagonal of each block.
    pub fn jordan_matrix(&self) -> DMatrix<Complex64> {
        let n = self.dimension();
        let mut m = DMatrix::zeros(n, n);
        let mut at = 0;
        for e in &self.entries {
            for &b in &e.block_sizes {
                for i in 0..b {
                    m[(at + i, at + i)] = e.eigenvalue;
                    if i + 1 < b {
                        m[(at + i, at + i + 1)] = Complex64::new(1.0, 0.0);
                    }
                }
                at += b;
            }
        }
        m
    }
}

/// Arnold's codimension `d = Σ_i Σ_j (2j − 1) n_ij`.
pub fn codimension(spec: &JordanSpec) -> usize {
    spec.entries
        .iter()
        .map(|e| {
            e.block_sizes
                .iter()
                .enumerate()
                .map(|(j, &n)| (2 * j + 1) * n)
                .sum::<usize>()
        })
        .sum()
}

/// Parses a complex scalar such as `0`, `-2.5`, `i`, `-i`, `3i`, `1+2i`, `1-0.5i`.
pub fn parse_complex(text: &str) -> std::result::Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty number".into());
    }
    let bad = || format!("cannot parse `{}` as a complex number", text.trim());
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split the real part off at the last sign that does not belong to an exponent.
    let bytes = body.as_bytes();
    let mut split = 0;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = k;
            break;
        }
    }
    let (re_txt, im_txt) = body.split_at(split);
    let re = if re_txt.is_empty() {
        0.0
    } else {
        re_txt.parse::<f64>().map_err(|_| bad())?
    };
    let im = match im_txt {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(Complex64::new(re, im))
}

/// A square matrix over the real or the complex field.
#[derive(Debug, Clone, PartialEq)]
pub enum SquareMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

impl SquareMatrix {
    pub fn dimension(&self) -> usize {
        match self {
            SquareMatrix::Real(m) => m.nrows(),
            SquareMatrix::Complex(m) => m.nrows(),
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, SquareMatrix::Real(_))
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        match self {
            SquareMatrix::Real(m) => m.map(|x| Complex64::new(x, 0.0)),
            SquareMatrix::Complex(m) => m.clone(),
        }
    }

    /// Parses one matrix row per non-empty line, entries separated by
    /// whitespace or commas. Lines starting with `#` are comments. Any entry
    /// with an imaginary unit makes the whole matrix complex.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        let mut complex = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    complex |= t.ends_with('i') || t.ends_with('j');
                    parse_complex(t).map_err(|m| Error::parse(format!("line {}", lineno + 1), m))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let n = rows.len();
        if n == 0 {
            return Err(Error::parse("line 1", "matrix file is empty"));
        }
        if let Some((k, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::parse(
                format!("row {}", k + 1),
                format!("expected {} entries for a square matrix, found {}", n, r.len()),
            ));
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Ok(if complex {
            SquareMatrix::Complex(m)
        } else {
            SquareMatrix::Real(m.map(|z| z.re))
        })
    }
}

fn ensure_square<T: nalgebra::Scalar>(a: &DMatrix<T>) -> Result<usize> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::validation(format!(
            "expected a nonempty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

/// Matrix of `S ↦ SA − AS` on column-major `vec(S)`.
///
/// The result is `n² × n²`; its null space is the centralizer of `A` and its
/// range is the tangent space to the similarity orbit of `A`.
pub fn commutator_operator<T: ComplexField>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = ensure_square(a)?;
    let mut k = DMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let row = i + n * j;
            // (SA)_ij = Σ_l S_il A_lj
            for l in 0..n {
                k[(row, i + n * l)] += a[(l, j)].clone();
            }
            // (AS)_ij = Σ_m A_im S_mj
            for m in 0..n {
                k[(row, m + n * j)] -= a[(i, m)].clone();
            }
        }
    }
    Ok(k)
}

/// Singular values sorted in decreasing order.
pub fn singular_values<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank: singular values `σ < tol · σ_max` count as zero.
pub fn numerical_rank<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, tol: f64) -> usize {
    let sv = singular_values(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s >= tol * smax).count()
}

/// Nullity of the commutator operator of `a`, i.e. the centralizer dimension.
pub fn commutator_nullity<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, tol: f64) -> Result<usize> {
    let k = commutator_operator(a)?;
    Ok(k.ncols() - numerical_rank(&k, tol))
}

/// Orthonormal basis of a centralizer together with the rank diagnostics
/// that produced it.
#[derive(Debug, Clone)]
pub struct Centralizer<T: ComplexField> {
    pub basis: Vec<DMatrix<T>>,
    /// Singular values of the commutator operator, largest first.
    pub singular_values: Vec<f64>,
    /// Set when some singular value lies within a factor of ten of the rank
    /// threshold, so the dimension could change under a small perturbation.
    pub warning: Option<String>,
}

impl<T: ComplexField> Centralizer<T> {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.warning.is_some()
    }
}

/// Orthonormal (Frobenius) basis of `{B : BA = AB}`.
pub fn centralizer_basis<T: ComplexField<RealField = f64>>(
    a: &DMatrix<T>,
    tol: f64,
) -> Result<Centralizer<T>> {
    if !(tol > 0.0) {
        return Err(Error::validation("rank tolerance must be positive"));
    }
    let n = ensure_square(a)?;
    let k = commutator_operator(a)?;
    let svd = k.svd(false, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::numerical("SVD did not return right singular vectors"))?;
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sv.iter().copied().fold(0.0_f64, f64::max);

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&x, &y| sv[y].total_cmp(&sv[x]));
    let sorted: Vec<f64> = order.iter().map(|&i| sv[i]).collect();

    let is_null = |s: f64| smax == 0.0 || s < tol * smax;
    let mut warning = None;
    if smax > 0.0 {
        if let Some(s) = sorted
            .iter()
            .find(|&&s| s / smax > tol / 10.0 && s / smax < tol * 10.0)
        {
            warning = Some(format!(
                "singular value {:e} (relative {:e}) within a factor of 10 of the rank threshold {:e}",
                s,
                s / smax,
                tol
            ));
        }
    }

    let basis = order
        .iter()
        .filter(|&&i| is_null(sv[i]))
        .map(|&i| {
            // Row i of V^H is the conjugate of the i-th right singular vector.
            DMatrix::from_fn(n, n, |r, c| v_t[(i, r + n * c)].clone().conjugate())
        })
        .collect();

    Ok(Centralizer {
        basis,
        singular_values: sorted,
        warning,
    })
}

/// `‖BA − AB‖_F`.
pub fn commutation_residual<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
    (b * a - a * b).norm()
}

/// Physical parameters `(Ω, δ₁, δ₂)` of the oscillator pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub omega: f64,
    pub delta1: f64,
    pub delta2: f64,
}

impl PhysicalParams {
    pub fn new(omega: f64, delta1: f64, delta2: f64) -> Self {
        Self {
            omega,
            delta1,
            delta2,
        }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn norm(&self) -> f64 {
        (self.omega.powi(2) + self.delta1.powi(2) + self.delta2.powi(2)).sqrt()
    }
}

/// Unfolding parameters `(α₁, α₂, α₃)` of the three-parameter family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnfoldingPoint {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
}

impl UnfoldingPoint {
    pub fn new(alpha1: f64, alpha2: f64, alpha3: f64) -> Self {
        Self {
            alpha1,
            alpha2,
            alpha3,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha1, self.alpha2, self.alpha3]
    }

    pub fn norm(&self) -> f64 {
        self.as_array().iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|a| a.is_finite())
    }
}

/// Leading-order parameter map `α₁ = −Ω`, `α₂ = −δ₁`, `α₃ = −δ₂/2`.
pub fn physical_to_unfolding(mu: PhysicalParams) -> UnfoldingPoint {
    UnfoldingPoint::new(-mu.omega, -mu.delta1, -0.5 * mu.delta2)
}

/// Inverse of [`physical_to_unfolding`].
pub fn unfolding_to_physical(alpha: UnfoldingPoint) -> PhysicalParams {
    PhysicalParams::new(-alpha.alpha1, -alpha.alpha2, -2.0 * alpha.alpha3)
}

/// Linear part of the first-order oscillator system in real Jordan form,
/// state order `(x, ẋ, y, ẏ)`.
pub fn oscillator_linear_part() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, -1.0, 0.0,
        ],
    )
}

/// Physical perturbation `C(μ)` of [`oscillator_linear_part`].
pub fn physical_perturbation(mu: PhysicalParams) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(4, 4);
    c[(1, 0)] = -mu.omega;
    c[(1, 1)] = -mu.delta1;
    c[(3, 3)] = -mu.delta2;
    c
}

/// Complex Jordan form of the singular linear part: a nilpotent 2-block and `±i`.
pub fn complex_jordan_form() -> DMatrix<Complex64> {
    singular_jordan_spec().jordan_matrix()
}

/// Jordan structure `{0: [2], i: [1], −i: [1]}`.
pub fn singular_jordan_spec() -> JordanSpec {
    JordanSpec::new(vec![
        JordanEntry {
            eigenvalue: Complex64::new(0.0, 0.0),
            block_sizes: vec![2],
        },
        JordanEntry {
            eigenvalue: Complex64::new(0.0, 1.0),
            block_sizes: vec![1],
        },
        JordanEntry {
            eigenvalue: Complex64::new(0.0, -1.0),
            block_sizes: vec![1],
        },
    ])
    .expect("static spec is valid")
}

/// One matrix entry of a deformation family: `base[row, col] + Σ multiplier · α_index`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slot {
    pub row: usize,
    pub col: usize,
    pub terms: Vec<(usize, f64)>,
}

/// Affine matrix family `A(α) = base + Σ_slots`, zero-based indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationFamily {
    pub base: DMatrix<f64>,
    pub slots: Vec<Slot>,
    pub parameter_count: usize,
}

impl DeformationFamily {
    pub fn evaluate(&self, params: &[f64]) -> Result<DMatrix<f64>> {
        if params.len() != self.parameter_count {
            return Err(Error::validation(format!(
                "family takes {} parameters, got {}",
                self.parameter_count,
                params.len()
            )));
        }
        let mut m = self.base.clone();
        for s in &self.slots {
            for &(p, w) in &s.terms {
                m[(s.row, s.col)] += w * params[p];
            }
        }
        Ok(m)
    }

    /// `∂A/∂α_p` for each parameter.
    pub fn directions(&self) -> Vec<DMatrix<f64>> {
        let n = self.base.nrows();
        (0..self.parameter_count)
            .map(|p| {
                let mut d = DMatrix::zeros(n, n);
                for s in &self.slots {
                    for &(q, w) in &s.terms {
                        if q == p {
                            d[(s.row, s.col)] += w;
                        }
                    }
                }
                d
            })
            .collect()
    }

    /// Rank of `[orbit tangent basis | parameter directions]`.
    ///
    /// Equals `n²` exactly when the family is transversal to the similarity
    /// orbit of its base, i.e. versal.
    pub fn transversality_rank(&self, tol: f64) -> Result<usize> {
        let n = ensure_square(&self.base)?;
        let k = commutator_operator(&self.base)?;
        let svd = k.svd(true, false);
        let u = svd
            .u
            .as_ref()
            .ok_or_else(|| Error::numerical("SVD did not return left singular vectors"))?;
        let smax = svd.singular_values.max();
        let tangent: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| smax > 0.0 && svd.singular_values[i] >= tol * smax)
            .collect();
        let dirs = self.directions();
        let mut m = DMatrix::zeros(n * n, tangent.len() + dirs.len());
        for (c, &i) in tangent.iter().enumerate() {
            m.set_column(c, &u.column(i));
        }
        for (c, d) in dirs.iter().enumerate() {
            for j in 0..n {
                for i in 0..n {
                    m[(i + n * j, tangent.len() + c)] = d[(i, j)];
                }
            }
        }
        Ok(numerical_rank(&m, tol))
    }
}

/// The real Arnold normal forms of the singular linear part.
///
/// Returns the four-parameter miniversal family and the three-parameter
/// family obtained by fixing the imaginary part of the fast pair at `±i`
/// through a time rescaling.
pub fn miniversal_deformation() -> (DeformationFamily, DeformationFamily) {
    let base = DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, -1.0, //
            0.0, 0.0, 1.0, 0.0,
        ],
    );
    let common = vec![
        Slot {
            row: 1,
            col: 0,
            terms: vec![(0, 1.0)],
        },
        Slot {
            row: 1,
            col: 1,
            terms: vec![(1, 1.0)],
        },
        Slot {
            row: 2,
            col: 2,
            terms: vec![(2, 1.0)],
        },
        Slot {
            row: 3,
            col: 3,
            terms: vec![(2, 1.0)],
        },
    ];
    let mut four = common.clone();
    four.push(Slot {
        row: 2,
        col: 3,
        terms: vec![(3, -1.0)],
    });
    four.push(Slot {
        row: 3,
        col: 2,
        terms: vec![(3, 1.0)],
    });
    (
        DeformationFamily {
            base: base.clone(),
            slots: four,
            parameter_count: 4,
        },
        DeformationFamily {
            base,
            slots: common,
            parameter_count: 3,
        },
    )
}

/// The three-parameter unfolded linear part `A₀(α)`.
pub fn unfolded_matrix(alpha: UnfoldingPoint) -> DMatrix<f64> {
    miniversal_deformation()
        .1
        .evaluate(&alpha.as_array())
        .expect("three parameters")
}

/// Eigenvalues of a real square matrix from its real Schur form.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    m.clone().complex_eigenvalues().iter().copied().collect()
}

/// Largest pointwise distance under the best pairing of two spectra of
/// equal size (exhaustive over permutations, intended for n ≤ 8).
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spectra must have equal size");
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let d = p
            .iter()
            .enumerate()
            .map(|(i, &j)| (a[i] - b[j]).norm())
            .fold(0.0, f64::max);
        best = best.min(d);
    });
    best
}

fn permute(p: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn codimension_of_singular_part_is_four() {
        assert_eq!(codimension(&singular_jordan_spec()), 4);
    }

    #[test]
    fn codimension_of_scalar_matrix_is_n_squared() {
        let spec = JordanSpec::parse("2.5:1,1,1").unwrap();
        assert_eq!(codimension(&spec), 9);
    }

    #[test]
    fn codimension_of_mixed_blocks() {
        let spec = JordanSpec::parse("0:2,1").unwrap();
        assert_eq!(codimension(&spec), 5);
        let k = commutator_nullity(&spec.jordan_matrix(), DEFAULT_RANK_TOL).unwrap();
        assert_eq!(k, 5);
    }

    #[test]
    fn rejects_malformed_specs() {
        assert!(JordanSpec::parse("0:1,2").is_err());
        assert!(JordanSpec::parse("0:2; 0:1").is_err());
        assert!(JordanSpec::parse("0:").is_err());
        assert!(JordanSpec::parse("1:0").is_err());
        assert!(JordanSpec::parse("").is_err());
    }

    #[test]
    fn parses_complex_literals() {
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("+i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("2.5i").unwrap(), c(0.0, 2.5));
        assert_eq!(parse_complex("1-2i").unwrap(), c(1.0, -2.0));
        assert_eq!(parse_complex("1e-3+1e2i").unwrap(), c(1e-3, 100.0));
        assert_eq!(parse_complex("-0.5").unwrap(), c(-0.5, 0.0));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn zero_matrix_commutes_with_everything() {
        let z = DMatrix::<f64>::zeros(3, 3);
        let k = commutator_operator(&z).unwrap();
        assert_eq!(k.shape(), (9, 9));
        assert!(k.iter().all(|&x| x == 0.0));
        assert_eq!(commutator_nullity(&z, DEFAULT_RANK_TOL).unwrap(), 9);
    }

    #[test]
    fn commutator_operator_matches_direct_product() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0, 0.0, 1.0, -2.0]);
        let s = DMatrix::from_row_slice(3, 3, &[0.3, -1.0, 2.0, 1.0, 0.0, 0.7, -0.2, 0.4, 1.1]);
        let k = commutator_operator(&a).unwrap();
        let vs = nalgebra::DVector::from_column_slice(s.as_slice());
        let lhs = &k * vs;
        let rhs = &s * &a - &a * &s;
        for (x, y) in lhs.iter().zip(rhs.as_slice()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn complex_jordan_form_has_nullity_four_and_rank_twelve() {
        let k = commutator_operator(&complex_jordan_form()).unwrap();
        assert_eq!(numerical_rank(&k, DEFAULT_RANK_TOL), 12);
        assert_eq!(commutator_nullity(&complex_jordan_form(), DEFAULT_RANK_TOL).unwrap(), 4);
    }

    #[test]
    fn diagonal_matrix_centralizer_is_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -2.0, 3.5, 0.25]));
        let z = centralizer_basis(&a, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(z.dimension(), 4);
        for b in &z.basis {
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        assert!(b[(i, j)].abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn centralizer_of_complex_jordan_form_matches_pattern() {
        let a = complex_jordan_form();
        let z = centralizer_basis(&a, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(z.dimension(), 4);
        assert!(!z.is_degenerate());
        for b in &z.basis {
            assert!(commutation_residual(&a, b) < 1e-12);
            for i in 0..4 {
                for j in 0..4 {
                    let allowed = i == j || (i, j) == (0, 1);
                    if !allowed {
                        assert!(b[(i, j)].norm() < 1e-12, "entry ({i},{j}) = {}", b[(i, j)]);
                    }
                }
            }
            assert!((b[(0, 0)] - b[(1, 1)]).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_centralizer_is_everything() {
        let z = centralizer_basis(&DMatrix::<f64>::identity(3, 3), DEFAULT_RANK_TOL).unwrap();
        assert_eq!(z.dimension(), 9);
    }

    #[test]
    fn nilpotent_block_centralizer_is_polynomial_in_n() {
        let spec = JordanSpec::parse("0:3").unwrap();
        let a = spec.jordan_matrix().map(|z| z.re);
        let z = centralizer_basis(&a, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(z.dimension(), 3);
        let powers = [DMatrix::identity(3, 3), a.clone(), &a * &a];
        for p in &powers {
            // Residual of the orthogonal projection onto the basis span.
            let mut r = p.clone();
            for b in &z.basis {
                let coef = b.dot(p);
                r -= b * coef;
            }
            assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn ambiguous_rank_is_flagged() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 1.0, 1.0 + 1e-10]));
        let z = centralizer_basis(&a, 1e-10).unwrap();
        assert!(z.is_degenerate());
    }

    #[test]
    fn four_parameter_family_is_transversal() {
        let (four, three) = miniversal_deformation();
        assert_eq!(four.evaluate(&[0.0; 4]).unwrap(), four.base);
        assert_eq!(four.transversality_rank(DEFAULT_RANK_TOL).unwrap(), 16);
        assert_eq!(three.transversality_rank(DEFAULT_RANK_TOL).unwrap(), 15);
    }

    #[test]
    fn three_parameter_family_pattern() {
        let m = unfolded_matrix(UnfoldingPoint::new(0.1, 0.2, 0.3));
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 0.0, 0.1, 0.2, 0.0, 0.0, 0.0, 0.0, 0.3, -1.0, 0.0, 0.0, 1.0, 0.3,
            ],
        );
        assert_eq!(m, expected);
        let (four, _) = miniversal_deformation();
        let m4 = four.evaluate(&[0.0, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(m4[(2, 3)], -1.5);
        assert_eq!(m4[(3, 2)], 1.5);
    }

    #[test]
    fn parameter_map_matches_worked_example() {
        let a = physical_to_unfolding(PhysicalParams::new(0.3, -0.2, -0.25));
        assert_eq!(a, UnfoldingPoint::new(-0.3, 0.2, 0.125));
        assert_eq!(physical_to_unfolding(PhysicalParams::zero()), UnfoldingPoint::new(0.0, 0.0, 0.0));
        assert_eq!(unfolding_to_physical(a), PhysicalParams::new(0.3, -0.2, -0.25));
    }

    #[test]
    fn parses_square_matrices() {
        let m = SquareMatrix::parse("# A\n1 2\n3, 4\n").unwrap();
        assert_eq!(m, SquareMatrix::Real(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0])));
        let m = SquareMatrix::parse("i 0\n0 -i\n").unwrap();
        assert!(!m.is_real());
        assert!(SquareMatrix::parse("1 2\n3\n").is_err());
    }

    #[test]
    fn spectrum_distance_finds_best_pairing() {
        let a = [c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)];
        let b = [c(0.0, -1.0), c(1.0, 1e-3), c(0.0, 1.0)];
        assert!((spectrum_distance(&a, &b) - 1e-3).abs() < 1e-15);
    }
}
