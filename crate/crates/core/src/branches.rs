//! Closed-form bifurcation objects of the truncated normal form.
//!
//! All formulas are leading order. Cross-checks are against the cubic
//! truncation, never against the full oscillator system.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal_form::NormalFormCoeffs;
use crate::versal::{eigenvalues, UnfoldingPoint};

/// Relative tolerance `|αⱼ| ≤ tol·‖α‖` for treating a coordinate as zero.
pub const DEFAULT_STRATUM_TOL: f64 = 1e-6;

/// Relative threshold below which a determinant counts as zero.
const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StratumKind {
    InteriorStable,
    InteriorOther,
    WallP,
    WallH0,
    WallH1,
    AxisBT,
    AxisPH,
    AxisHH,
    Origin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumLabel {
    pub kind: StratumKind,
    /// Sign of each `αⱼ`, 0 where it is treated as zero.
    pub signs: [i8; 3],
}

impl std::fmt::Display for StratumLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: String = self
            .signs
            .iter()
            .map(|&v| match v {
                1 => '+',
                -1 => '-',
                _ => '0',
            })
            .collect();
        write!(f, "{:?} ({})", self.kind, s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchKind {
    Trivial,
    P,
    H0,
    H1,
    MixedModePH,
    Torus2HH,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criticality {
    Supercritical,
    Subcritical,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub kind: BranchKind,
    /// Canonical nonnegative amplitudes (`y1`, `r`, `rho`).
    pub amplitudes: BTreeMap<String, f64>,
    /// Leading-order angular frequencies.
    pub frequencies: BTreeMap<String, f64>,
    pub exists: bool,
    pub criticality: Criticality,
    pub stability: Stability,
    /// Number of symmetric copies represented (`±y₁`).
    pub multiplicity: u32,
    /// Determinants, radicands and Jacobian data.
    pub diagnostics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl Branch {
    fn new(kind: BranchKind) -> Self {
        Self {
            kind,
            amplitudes: BTreeMap::new(),
            frequencies: BTreeMap::new(),
            exists: false,
            criticality: Criticality::Degenerate,
            stability: Stability::Undetermined,
            multiplicity: 1,
            diagnostics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn amp(mut self, name: &str, v: f64) -> Self {
        self.amplitudes.insert(name.to_string(), v);
        self
    }

    fn diag(mut self, name: &str, v: f64) -> Self {
        self.diagnostics.insert(name.to_string(), v);
        self
    }

    pub fn amplitude(&self, name: &str) -> Option<f64> {
        self.amplitudes.get(name).copied()
    }
}

fn supercritical_if_negative(coef: f64) -> Criticality {
    if coef < 0.0 {
        Criticality::Supercritical
    } else if coef > 0.0 {
        Criticality::Subcritical
    } else {
        Criticality::Degenerate
    }
}

/// `sqrt` of a radicand, `None` when it is negative or not finite.
fn real_root(radicand: f64) -> Option<f64> {
    (radicand.is_finite() && radicand >= 0.0).then(|| radicand.sqrt())
}

/// Eigenvalues of the linear part: `α₂/2 ± sqrt(α₁ + (α₂/2)²)` and `α₃ ± i`.
pub fn linear_eigenvalues(alpha: UnfoldingPoint) -> [Complex64; 4] {
    let half = 0.5 * alpha.alpha2;
    let disc = alpha.alpha1 + half * half;
    let (l1, l2) = if disc >= 0.0 {
        let s = disc.sqrt();
        (Complex64::new(half + s, 0.0), Complex64::new(half - s, 0.0))
    } else {
        let s = (-disc).sqrt();
        (Complex64::new(half, s), Complex64::new(half, -s))
    };
    [
        l1,
        l2,
        Complex64::new(alpha.alpha3, 1.0),
        Complex64::new(alpha.alpha3, -1.0),
    ]
}

/// Places `alpha` in the stratified picture of primary bifurcations.
pub fn classify_stratum(alpha: UnfoldingPoint, tol: f64) -> Result<StratumLabel> {
    if !(tol > 0.0) {
        return Err(Error::validation("stratum tolerance must be positive"));
    }
    if !alpha.is_finite() {
        return Err(Error::validation("unfolding parameters must be finite"));
    }
    let a = alpha.as_array();
    let scale = alpha.norm();
    let mut signs = [0i8; 3];
    for j in 0..3 {
        if a[j].abs() > tol * scale {
            signs[j] = if a[j] > 0.0 { 1 } else { -1 };
        }
    }
    let zero = signs.map(|s| s == 0);
    let kind = match zero {
        [false, false, false] => {
            if signs.iter().all(|&s| s < 0) {
                StratumKind::InteriorStable
            } else {
                StratumKind::InteriorOther
            }
        }
        [true, false, false] => StratumKind::WallP,
        [false, true, false] => StratumKind::WallH0,
        [false, false, true] => StratumKind::WallH1,
        [true, true, false] => StratumKind::AxisBT,
        [true, false, true] => StratumKind::AxisPH,
        [false, true, true] => StratumKind::AxisHH,
        [true, true, true] => StratumKind::Origin,
    };
    Ok(StratumLabel { kind, signs })
}

/// Hopf branch `r = sqrt(−α₃/φ₃,₀₁)` with period near `2π`.
pub fn branch_h1(alpha3: f64, coeffs: &NormalFormCoeffs, alpha1: f64, alpha2: f64) -> Branch {
    let phi = coeffs.phi_01(3);
    let mut b = Branch::new(BranchKind::H1);
    b.criticality = supercritical_if_negative(phi);
    if phi == 0.0 {
        b.notes
            .push("phi3_01 vanishes: degenerate Hopf bifurcation, amplitude not determined at cubic order".into());
        return b;
    }
    let radicand = -alpha3 / phi;
    b = b.diag("radicand", radicand);
    if let Some(r) = real_root(radicand) {
        b.exists = true;
        b = b.amp("r", r);
        b.frequencies
            .insert("fast".into(), coeffs.phase_rate(0.0, r));
        b.stability = if b.criticality == Criticality::Supercritical && alpha1 < 0.0 && alpha2 < 0.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        };
    }
    b
}

/// Pitchfork pair `y₁ = ±sqrt(−α₁/φ₁,₁₀)`.
pub fn branch_p(alpha1: f64, coeffs: &NormalFormCoeffs, alpha2: f64, alpha3: f64) -> Branch {
    let phi = coeffs.phi_10(1);
    let mut b = Branch::new(BranchKind::P);
    b.multiplicity = 2;
    b.criticality = supercritical_if_negative(phi);
    if phi == 0.0 {
        b.notes
            .push("phi1_10 vanishes: degenerate pitchfork, amplitude not determined at cubic order".into());
        return b;
    }
    let radicand = -alpha1 / phi;
    b = b.diag("radicand", radicand);
    if let Some(y1) = real_root(radicand) {
        b.exists = true;
        b = b.amp("y1", y1);
        b.stability = if b.criticality == Criticality::Supercritical && alpha2 < 0.0 && alpha3 < 0.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        };
    }
    b
}

/// Slow Hopf branch `ρ = sqrt(−4α₂/φ₂,₁₀)` in the invariant `(y₁, y₂)` plane.
///
/// Stability within the plane follows the criticality; transversally the
/// `r = 0` direction is attracting when `α₃ < 0`.
pub fn branch_h0(alpha1: f64, alpha2: f64, coeffs: &NormalFormCoeffs) -> Result<Branch> {
    if !(alpha1 < 0.0) {
        return Err(Error::Domain(format!(
            "slow Hopf branch needs alpha1 < 0 (got {alpha1})"
        )));
    }
    let freq2 = -alpha1 - (0.5 * alpha2).powi(2);
    if !(freq2 > 0.0) {
        return Err(Error::Domain(format!(
            "eigenvalues at alpha = ({alpha1}, {alpha2}) are not complex; no slow rotation"
        )));
    }
    let phi = coeffs.phi_10(2);
    let mut b = Branch::new(BranchKind::H0);
    b.criticality = supercritical_if_negative(phi);
    b.frequencies.insert("slow".into(), freq2.sqrt());
    if phi == 0.0 {
        b.notes
            .push("phi2_10 vanishes: degenerate Hopf bifurcation, amplitude not determined at cubic order".into());
        return Ok(b);
    }
    let radicand = -4.0 * alpha2 / phi;
    b = b.diag("radicand", radicand);
    if let Some(rho) = real_root(radicand) {
        b.exists = true;
        b = b.amp("rho", rho);
        b.notes
            .push("frequency correction b*rho^2 not computed".into());
    }
    Ok(b)
}

/// Like [`branch_h0`] but with the transverse stability verdict; `None`
/// outside the domain of the slow rotation.
fn branch_h0_full(alpha: UnfoldingPoint, coeffs: &NormalFormCoeffs) -> Option<Branch> {
    let mut b = branch_h0(alpha.alpha1, alpha.alpha2, coeffs).ok()?;
    if b.exists {
        b.stability = if b.criticality == Criticality::Supercritical && alpha.alpha3 < 0.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        };
    }
    Some(b)
}

fn spectrum_stability(ev: &[Complex64], scale: f64) -> Stability {
    let eps = 1e-10 * scale.max(1e-300);
    let max_re = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if max_re < -eps {
        Stability::Stable
    } else if max_re > eps {
        Stability::Unstable
    } else {
        Stability::Undetermined
    }
}

fn jacobian_spectrum(coeffs: &NormalFormCoeffs, alpha: &UnfoldingPoint, s: &[f64; 3]) -> Vec<Complex64> {
    let j = coeffs.jacobian(alpha, s);
    let m = DMatrix::from_fn(3, 3, |r, c| j[r][c]);
    eigenvalues(&m)
}

fn jacobian_scale(coeffs: &NormalFormCoeffs, alpha: &UnfoldingPoint, s: &[f64; 3]) -> f64 {
    let j = coeffs.jacobian(alpha, s);
    j.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn is_degenerate(det: f64, scale: f64) -> bool {
    det.abs() <= DEGENERACY_TOL * scale || !det.is_finite()
}

/// Solutions of the pitchfork–Hopf amplitude system
/// `0 = [α₁ + φ₁,₁₀y₁² + φ₁,₀₁r²]y₁`, `0 = [α₃ + φ₃,₁₀y₁² + φ₃,₀₁r²]r`.
///
/// Returns trivial, P, H₁ and mixed mode in that order. Stability comes
/// from the Jacobian of the three-dimensional truncated normal form at
/// `α₂ = alpha2`.
pub fn ph_branches(alpha1: f64, alpha3: f64, coeffs: &NormalFormCoeffs, alpha2: f64) -> Vec<Branch> {
    let (p110, p101) = (coeffs.phi_10(1), coeffs.phi_01(1));
    let (p310, p301) = (coeffs.phi_10(3), coeffs.phi_01(3));
    let delta1 = p110 * p301 - p310 * p101;
    let scale = (p110 * p301).abs().max((p310 * p101).abs());
    let degenerate = is_degenerate(delta1, scale) || p110 * p301 == 0.0;
    let alpha = UnfoldingPoint::new(alpha1, alpha2, alpha3);

    let candidates: [(BranchKind, f64, f64); 4] = [
        (BranchKind::Trivial, 0.0, 0.0),
        (BranchKind::P, -alpha1 / p110, 0.0),
        (BranchKind::H1, 0.0, -alpha3 / p301),
        (
            BranchKind::MixedModePH,
            (alpha3 * p101 - alpha1 * p301) / delta1,
            (alpha1 * p310 - alpha3 * p110) / delta1,
        ),
    ];

    candidates
        .iter()
        .map(|&(kind, q, r2)| {
            let mut b = Branch::new(kind)
                .diag("y1_squared", q)
                .diag("r_squared", r2)
                .diag("delta1", delta1);
            b.criticality = match kind {
                BranchKind::Trivial => Criticality::Supercritical,
                BranchKind::P => supercritical_if_negative(p110),
                BranchKind::H1 => supercritical_if_negative(p301),
                _ => {
                    if degenerate {
                        Criticality::Degenerate
                    } else {
                        Criticality::Supercritical
                    }
                }
            };
            if kind == BranchKind::MixedModePH {
                b.notes.push(
                    "secondary branch: Hopf bifurcation from P, pitchfork of cycles from H1".into(),
                );
                if p110 * p301 < 0.0 {
                    b.notes.push(
                        "a tertiary 2-torus may bifurcate from this branch (higher order, not computed)"
                            .into(),
                    );
                }
                if degenerate {
                    b.notes.push("nondegeneracy Delta1 != 0, phi1_10 phi3_01 != 0 fails".into());
                }
            }
            let strict = kind == BranchKind::MixedModePH;
            let ok = |v: f64| v.is_finite() && if strict { v > 0.0 } else { v >= 0.0 };
            let needed = match kind {
                BranchKind::Trivial => true,
                BranchKind::P => ok(q) && p110 != 0.0,
                BranchKind::H1 => ok(r2) && p301 != 0.0,
                BranchKind::MixedModePH => !degenerate && ok(q) && ok(r2),
                _ => unreachable!(),
            };
            if needed {
                let (y1, r) = (q.max(0.0).sqrt(), r2.max(0.0).sqrt());
                b.exists = true;
                b = b.amp("y1", y1).amp("r", r);
                if y1 > 0.0 {
                    b.multiplicity = 2;
                }
                if r > 0.0 {
                    b.frequencies.insert("fast".into(), coeffs.phase_rate(y1, r));
                }
                let s = [y1, 0.0, r];
                let ev = jacobian_spectrum(coeffs, &alpha, &s);
                let scale = jacobian_scale(coeffs, &alpha, &s);
                b.stability = spectrum_stability(&ev, scale);
                let max_re = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
                b = b.diag("jacobian_max_real_part", max_re);
            }
            b
        })
        .collect()
}

/// Solutions of the averaged Hopf–Hopf amplitude system
/// `ṙ = r[α₃ + cρ² + φ₃,₀₁r²]`, `ρ̇ = ρ[α₂/2 + φ₂,₁₀ρ²/8 + dr²]`.
///
/// Returns trivial, H₁, H₀ and the 2-torus family. Stability is that of the
/// amplitude system.
pub fn hh_branches(alpha2: f64, alpha3: f64, coeffs: &NormalFormCoeffs) -> Vec<Branch> {
    let (p210, p301) = (coeffs.phi_10(2), coeffs.phi_01(3));
    let (c, d) = (coeffs.c, coeffs.d);
    let delta2 = 0.125 * p210 * p301 - c * d;
    let scale = (0.125 * p210 * p301).abs().max((c * d).abs());
    let degenerate = is_degenerate(delta2, scale);

    let candidates: [(BranchKind, f64, f64); 4] = [
        (BranchKind::Trivial, 0.0, 0.0),
        (BranchKind::H1, -alpha3 / p301, 0.0),
        (BranchKind::H0, 0.0, -4.0 * alpha2 / p210),
        (
            BranchKind::Torus2HH,
            (0.5 * alpha2 * c - 0.125 * alpha3 * p210) / delta2,
            (alpha3 * d - 0.5 * alpha2 * p301) / delta2,
        ),
    ];

    candidates
        .iter()
        .map(|&(kind, r2, rho2)| {
            let mut b = Branch::new(kind)
                .diag("r_squared", r2)
                .diag("rho_squared", rho2)
                .diag("delta2", delta2);
            b.criticality = match kind {
                BranchKind::Trivial => Criticality::Supercritical,
                BranchKind::H1 => supercritical_if_negative(p301),
                BranchKind::H0 => supercritical_if_negative(p210),
                _ => {
                    if degenerate {
                        Criticality::Degenerate
                    } else {
                        Criticality::Supercritical
                    }
                }
            };
            if kind == BranchKind::Torus2HH {
                b.notes
                    .push("two-frequency solutions on an invariant 2-torus".into());
                if degenerate {
                    b.notes.push("nondegeneracy Delta2 != 0 fails".into());
                }
            }
            let strict = kind == BranchKind::Torus2HH;
            let ok = |v: f64| v.is_finite() && if strict { v > 0.0 } else { v >= 0.0 };
            let exists = match kind {
                BranchKind::Trivial => true,
                BranchKind::H1 => ok(r2) && p301 != 0.0,
                BranchKind::H0 => ok(rho2) && p210 != 0.0,
                BranchKind::Torus2HH => !degenerate && ok(r2) && ok(rho2),
                _ => unreachable!(),
            };
            if exists {
                let (r, rho) = (r2.max(0.0).sqrt(), rho2.max(0.0).sqrt());
                b.exists = true;
                b = b.amp("r", r).amp("rho", rho);
                if r > 0.0 {
                    b.frequencies.insert(
                        "fast".into(),
                        1.0 + coeffs.phi_01(4) * r * r + 0.5 * coeffs.phi_10(4) * rho * rho,
                    );
                }
                let j = hh_amplitude_jacobian(alpha2, alpha3, coeffs, r, rho);
                let tr = j[0][0] + j[1][1];
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                let s = j.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
                let eps = 1e-10 * s;
                b.stability = if det > eps * s && tr < -eps {
                    Stability::Stable
                } else if det < -eps * s || tr > eps {
                    Stability::Unstable
                } else {
                    Stability::Undetermined
                };
                b = b.diag("jacobian_trace", tr).diag("jacobian_det", det);
            }
            b
        })
        .collect()
}

/// Jacobian of the averaged amplitude system in `(r, ρ)`.
pub fn hh_amplitude_jacobian(
    alpha2: f64,
    alpha3: f64,
    coeffs: &NormalFormCoeffs,
    r: f64,
    rho: f64,
) -> [[f64; 2]; 2] {
    let (p210, p301) = (coeffs.phi_10(2), coeffs.phi_01(3));
    let (c, d) = (coeffs.c, coeffs.d);
    let g = alpha3 + c * rho * rho + p301 * r * r;
    let h = 0.5 * alpha2 + 0.125 * p210 * rho * rho + d * r * r;
    [
        [g + 2.0 * p301 * r * r, 2.0 * c * r * rho],
        [2.0 * d * r * rho, h + 0.25 * p210 * rho * rho],
    ]
}

/// Residual of the averaged amplitude equations at `(r, ρ)`.
pub fn hh_residual(alpha2: f64, alpha3: f64, coeffs: &NormalFormCoeffs, r: f64, rho: f64) -> [f64; 2] {
    [
        r * (alpha3 + coeffs.c * rho * rho + coeffs.phi_01(3) * r * r),
        rho * (0.5 * alpha2 + 0.125 * coeffs.phi_10(2) * rho * rho + coeffs.d * r * r),
    ]
}

/// Residual of the pitchfork–Hopf amplitude equations at `(y₁, r)`.
pub fn ph_residual(alpha1: f64, alpha3: f64, coeffs: &NormalFormCoeffs, y1: f64, r: f64) -> [f64; 2] {
    let q = y1 * y1;
    let r2 = r * r;
    [
        (alpha1 + coeffs.phi_10(1) * q + coeffs.phi_01(1) * r2) * y1,
        (alpha3 + coeffs.phi_10(3) * q + coeffs.phi_01(3) * r2) * r,
    ]
}

/// A line `a₂α₂ + a₃α₃ = 0` in the `(α₂, α₃)` plane where the 2-torus
/// family meets a primary Hopf branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusLocus {
    /// Which primary branch the torus bifurcates from (`H1` or `H0`).
    pub from: BranchKind,
    pub coeff_alpha2: f64,
    pub coeff_alpha3: f64,
    /// Set when the line collapses onto a coordinate axis or is undefined.
    pub degenerate: bool,
    pub description: String,
}

impl TorusLocus {
    /// Point at signed arc length `s` along the line.
    pub fn point_at(&self, s: f64) -> Option<(f64, f64)> {
        let n = self.coeff_alpha2.hypot(self.coeff_alpha3);
        (n > 0.0).then(|| (s * self.coeff_alpha3 / n, -s * self.coeff_alpha2 / n))
    }

    pub fn contains(&self, alpha2: f64, alpha3: f64, tol: f64) -> bool {
        (self.coeff_alpha2 * alpha2 + self.coeff_alpha3 * alpha3).abs() <= tol
    }

    /// Amplitudes `(r, ρ)` of the primary cycle at the bifurcation point.
    pub fn boundary_state(&self, alpha2: f64, alpha3: f64, coeffs: &NormalFormCoeffs) -> (f64, f64) {
        match self.from {
            BranchKind::H1 => ((-alpha3 / coeffs.phi_01(3)).max(0.0).sqrt(), 0.0),
            _ => (0.0, (-4.0 * alpha2 / coeffs.phi_10(2)).max(0.0).sqrt()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusLoci {
    pub from_h1: TorusLocus,
    pub from_h0: TorusLocus,
}

/// Secondary torus bifurcation lines: `α₃d = α₂φ₃,₀₁/2` on the H₁ side,
/// `α₂c = α₃φ₂,₁₀/4` on the H₀ side.
pub fn torus_loci(coeffs: &NormalFormCoeffs) -> TorusLoci {
    let (p210, p301) = (coeffs.phi_10(2), coeffs.phi_01(3));
    let (c, d) = (coeffs.c, coeffs.d);
    let h1 = TorusLocus {
        from: BranchKind::H1,
        coeff_alpha2: -0.5 * p301,
        coeff_alpha3: d,
        degenerate: d == 0.0 || p301 == 0.0,
        description: "alpha3 d = alpha2 phi3_01 / 2, rho = 0, r = sqrt(-alpha3 / phi3_01)".into(),
    };
    let h0 = TorusLocus {
        from: BranchKind::H0,
        coeff_alpha2: c,
        coeff_alpha3: -0.25 * p210,
        degenerate: c == 0.0 || p210 == 0.0,
        description: "alpha2 c = alpha3 phi2_10 / 4, rho = sqrt(-4 alpha2 / phi2_10), r = 0".into(),
    };
    TorusLoci { from_h1: h1, from_h0: h0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NfEquilibrium {
    /// `(y₁, y₂, r)` with `r ≥ 0`.
    pub state: [f64; 3],
    /// Jacobian eigenvalues as `[re, im]`.
    pub eigenvalues: Vec<[f64; 2]>,
    pub stability: Stability,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: [f64; 3],
    pub from_catalog: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NfEquilibria {
    pub equilibria: Vec<NfEquilibrium>,
    pub failures: Vec<SeedFailure>,
}

const POLISH_TOL: f64 = 1e-13;
const POLISH_ITERS: usize = 60;

fn max_abs(v: &[f64; 3]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn polish(coeffs: &NormalFormCoeffs, alpha: &UnfoldingPoint, seed: [f64; 3]) -> std::result::Result<[f64; 3], String> {
    let mut s = seed;
    for _ in 0..POLISH_ITERS {
        let f = coeffs.rhs(alpha, &s);
        if max_abs(&f) <= POLISH_TOL {
            return Ok(s);
        }
        let j = coeffs.jacobian(alpha, &s);
        let m = Matrix3::from_fn(|r, c| j[r][c]);
        let step = m
            .lu()
            .solve(&Vector3::new(f[0], f[1], f[2]))
            .ok_or_else(|| "singular Jacobian".to_string())?;
        for k in 0..3 {
            s[k] -= step[k];
        }
        if !s.iter().all(|v| v.is_finite()) || max_abs(&s) > 1e8 {
            return Err("iterates diverged".into());
        }
    }
    let f = coeffs.rhs(alpha, &s);
    if max_abs(&f) <= 1e-10 {
        Ok(s)
    } else {
        Err(format!("no convergence, residual {:e}", max_abs(&f)))
    }
}

/// All equilibria of the truncated three-dimensional normal form with
/// `r ≥ 0`, polished from catalog seeds and a grid.
pub fn equilibria_of_truncated_nf(alpha: UnfoldingPoint, coeffs: &NormalFormCoeffs) -> NfEquilibria {
    let mut seeds: Vec<([f64; 3], bool)> = Vec::new();
    let mut extent: f64 = 0.0;
    for b in ph_branches(alpha.alpha1, alpha.alpha3, coeffs, alpha.alpha2) {
        let q = b.diagnostics.get("y1_squared").copied().unwrap_or(0.0);
        let r2 = b.diagnostics.get("r_squared").copied().unwrap_or(0.0);
        if q.is_finite() && r2.is_finite() && q >= 0.0 && r2 >= 0.0 {
            let (y1, r) = (q.sqrt(), r2.sqrt());
            extent = extent.max(y1).max(r);
            seeds.push(([y1, 0.0, r], true));
            if y1 > 0.0 {
                seeds.push(([-y1, 0.0, r], true));
            }
        }
    }
    let span = (2.0 * extent).max(0.1);
    for i in 0..=8 {
        for k in 0..=4 {
            let y1 = -span + 2.0 * span * i as f64 / 8.0;
            let r = span * k as f64 / 4.0;
            seeds.push(([y1, 0.0, r], false));
        }
    }

    let mut equilibria: Vec<NfEquilibrium> = Vec::new();
    let mut failures = Vec::new();
    for (seed, from_catalog) in seeds {
        match polish(coeffs, &alpha, seed) {
            Ok(mut s) => {
                s[2] = s[2].abs();
                let tol = 1e-8 * max_abs(&s).max(1.0);
                let dup = equilibria.iter().any(|e| {
                    (0..3).all(|k| (e.state[k] - s[k]).abs() <= tol)
                });
                if !dup {
                    let ev = jacobian_spectrum(coeffs, &alpha, &s);
                    let scale = jacobian_scale(coeffs, &alpha, &s);
                    equilibria.push(NfEquilibrium {
                        state: s,
                        eigenvalues: ev.iter().map(|z| [z.re, z.im]).collect(),
                        stability: spectrum_stability(&ev, scale),
                        residual: max_abs(&coeffs.rhs(&alpha, &s)),
                    });
                }
            }
            Err(reason) => failures.push(SeedFailure {
                seed,
                from_catalog,
                reason,
            }),
        }
    }
    equilibria.sort_by(|a, b| {
        a.state
            .iter()
            .zip(b.state.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    NfEquilibria { equilibria, failures }
}

/// Every closed-form object at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchCatalog {
    pub alpha: UnfoldingPoint,
    pub stratum: StratumLabel,
    /// Linear eigenvalues as `[re, im]`.
    pub eigenvalues: Vec<[f64; 2]>,
    pub pitchfork: Branch,
    pub hopf_fast: Branch,
    /// Absent when `α₁ ≥ 0` or the slow pair is real.
    pub hopf_slow: Option<Branch>,
    pub pitchfork_hopf: Vec<Branch>,
    pub hopf_hopf: Vec<Branch>,
    pub torus_loci: TorusLoci,
    pub notes: Vec<String>,
}

pub fn branch_catalog(alpha: UnfoldingPoint, coeffs: &NormalFormCoeffs, stratum_tol: f64) -> Result<BranchCatalog> {
    if !coeffs.is_finite() {
        return Err(Error::validation("normal form coefficients must be finite"));
    }
    let stratum = classify_stratum(alpha, stratum_tol)?;
    let (a1, a2, a3) = (alpha.alpha1, alpha.alpha2, alpha.alpha3);
    let mut notes = Vec::new();
    if stratum.kind == StratumKind::AxisBT {
        notes.push("Bogdanov-Takens axis: secondary homoclinic and heteroclinic structure not computed".into());
    }
    let hopf_slow = branch_h0_full(alpha, coeffs);
    if hopf_slow.is_none() {
        notes.push("slow Hopf branch undefined: requires alpha1 < 0 and a complex slow pair".into());
    }
    Ok(BranchCatalog {
        alpha,
        stratum,
        eigenvalues: linear_eigenvalues(alpha).iter().map(|z| [z.re, z.im]).collect(),
        pitchfork: branch_p(a1, coeffs, a2, a3),
        hopf_fast: branch_h1(a3, coeffs, a1, a2),
        hopf_slow,
        pitchfork_hopf: ph_branches(a1, a3, coeffs, a2),
        hopf_hopf: hh_branches(a2, a3, coeffs),
        torus_loci: torus_loci(coeffs),
        notes,
    })
}
