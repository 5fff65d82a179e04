//! Input operator B, controllability Grammian, and resolvent regularization.
//!
//! The control space U carries modes 2..N; the worked input operator couples
//! the control's first coordinate into state modes 1 and 2:
//!
//! Bu = 2u₂e₁ + Σ_{i≥2} u_i e_i,   B*v = (2v₁+v₂, v₃, …),   ‖B‖ = √5
//!
//! (BB* has top block [[4,2],[2,1]] with eigenvalues {5, 0}).
//!
//! The Grammian K₀ᵃ = ∫₀ᵃ P_q(a−ν)BB*P_q*(a−ν)dν is assembled by composite
//! trapezoid — the integrand is continuous and vanishes at ν = a for q > 1,
//! so no endpoint treatment is needed — and the regularized resolvent
//! R(β,K) = (βI+K)⁻¹ is a direct SPD factorization per solve with
//! ‖R(β,K)‖ ≤ 1/β. The indicator ‖βR(β,K)v‖ → 0 as β → 0 is the numerical
//! face of linear approximate controllability.

use crate::solution_families::{Families, FamilyError};
use crate::spectral_basis::SpectralVector;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, thiserror::Error)]
pub enum ControlError {
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("regularization parameter must be positive, got {0}")]
    NonPositiveBeta(f64),
    #[error("SPD factorization broke down (matrix not positive definite)")]
    FactorizationFailure,
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Control-space element; for the worked operator the coordinates are the
/// coefficients on modes 2..N.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlVector {
    pub coeffs: Vec<f64>,
}

impl ControlVector {
    pub fn zeros(dim: usize) -> Self {
        ControlVector { coeffs: vec![0.0; dim] }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

/// The input-operator slot. `Example` is the worked √5-norm operator; `Zero`
/// and `Custom` exist for diagnostics and alternative couplings.
#[derive(Debug, Clone)]
pub enum BOperator {
    /// Bu = 2u₂e₁ + Σ_{i≥2} u_i e_i on N modes (control dimension N−1).
    Example,
    /// Zero operator with the same shape as `Example`.
    Zero,
    /// Arbitrary N×d matrix acting on a d-dimensional control space.
    Custom(DMatrix<f64>),
}

impl BOperator {
    /// Control-space dimension for a state truncated to `n_modes`.
    pub fn control_dim(&self, n_modes: usize) -> usize {
        match self {
            BOperator::Example | BOperator::Zero => n_modes.saturating_sub(1),
            BOperator::Custom(m) => m.ncols(),
        }
    }

    /// Dense matrix of the operator on `n_modes` state modes.
    pub fn matrix(&self, n_modes: usize) -> DMatrix<f64> {
        match self {
            BOperator::Example => {
                let d = self.control_dim(n_modes);
                let mut m = DMatrix::zeros(n_modes, d);
                if n_modes >= 2 {
                    m[(0, 0)] = 2.0; // 2u₂ into e₁
                    m[(1, 0)] = 1.0; // u₂ into e₂
                    for i in 2..n_modes {
                        m[(i, i - 1)] = 1.0; // u_i into e_i, i ≥ 3
                    }
                }
                m
            }
            BOperator::Zero => DMatrix::zeros(n_modes, self.control_dim(n_modes)),
            BOperator::Custom(m) => {
                assert_eq!(m.nrows(), n_modes, "custom B has wrong state dimension");
                m.clone()
            }
        }
    }

    /// Bu.
    pub fn apply(&self, u: &ControlVector, n_modes: usize) -> SpectralVector {
        let m = self.matrix(n_modes);
        assert_eq!(u.len(), m.ncols(), "control vector has wrong dimension");
        let out = m * DVector::from_column_slice(&u.coeffs);
        SpectralVector::from_coeffs(out.iter().copied().collect())
    }

    /// B*v, the adjoint: ⟨Bu, v⟩ = ⟨u, B*v⟩ exactly.
    pub fn apply_star(&self, v: &SpectralVector) -> ControlVector {
        let m = self.matrix(v.len());
        let out = m.transpose() * DVector::from_column_slice(&v.coeffs);
        ControlVector { coeffs: out.iter().copied().collect() }
    }

    /// Operator norm (largest singular value) of the truncated matrix.
    pub fn norm(&self, n_modes: usize) -> f64 {
        let m = self.matrix(n_modes);
        if m.ncols() == 0 || m.nrows() == 0 {
            return 0.0;
        }
        m.singular_values()[0]
    }
}

/// Bu for the worked operator.
pub fn apply_b(b: &BOperator, u: &ControlVector, n_modes: usize) -> SpectralVector {
    b.apply(u, n_modes)
}

/// B*v for the worked operator.
pub fn apply_b_star(b: &BOperator, v: &SpectralVector) -> ControlVector {
    b.apply_star(v)
}

/// ‖B‖ of the worked operator on N ≥ 2 modes; equals √5 for every N.
pub fn operator_norm_b(n_modes: usize) -> Result<f64, ControlError> {
    if n_modes < 2 {
        return Err(ControlError::Invalid(format!(
            "the worked operator needs N ≥ 2, got {n_modes}"
        )));
    }
    Ok(BOperator::Example.norm(n_modes))
}

/// Finite-dimensional Grammian K₀ᵃ with its assembly metadata.
#[derive(Debug, Clone)]
pub struct GrammianMatrix {
    k: DMatrix<f64>,
    pub horizon: f64,
    pub quad_nodes: usize,
}

impl GrammianMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn dim(&self) -> usize {
        self.k.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.k[(i, j)]
    }

    /// max |K − Kᵀ| (zero by construction).
    pub fn symmetry_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.k.nrows() {
            for j in 0..self.k.ncols() {
                d = d.max((self.k[(i, j)] - self.k[(j, i)]).abs());
            }
        }
        d
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.k
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn apply(&self, v: &SpectralVector) -> SpectralVector {
        let out = &self.k * DVector::from_column_slice(&v.coeffs);
        SpectralVector::from_coeffs(out.iter().copied().collect())
    }
}

/// K₀ᵃ = ∫₀ᵃ P_q(a−ν)BB*P_q*(a−ν)dν by composite trapezoid on n_quad panels.
/// P_q is real diagonal here, so P_q* = P_q and the (n,m) entry reduces to
/// (BB*)_{nm}·∫₀ᵃ p_n(s)p_m(s)ds.
pub fn grammian(
    families: &Families,
    b: &BOperator,
    horizon: f64,
    n_quad: usize,
) -> Result<GrammianMatrix, ControlError> {
    if !(horizon > 0.0) {
        return Err(ControlError::Invalid(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    if n_quad < 16 {
        return Err(ControlError::Invalid(format!(
            "n_quad must be ≥ 16, got {n_quad}"
        )));
    }
    let n = families.modes();
    let bm = b.matrix(n);
    let bbt = &bm * bm.transpose();

    // I_{nm} = ∫₀ᵃ p_n(s) p_m(s) ds, trapezoid over s (p vanishes at s = 0)
    let h = horizon / n_quad as f64;
    let mut p = vec![0.0; n];
    let mut integrals = DMatrix::<f64>::zeros(n, n);
    for i in 0..=n_quad {
        let s = i as f64 * h;
        for (m, pm) in p.iter_mut().enumerate() {
            *pm = families.pq_factor(m + 1, s)?;
        }
        let w = if i == 0 || i == n_quad { 0.5 * h } else { h };
        for r in 0..n {
            for c in r..n {
                integrals[(r, c)] += w * p[r] * p[c];
            }
        }
    }
    let mut k = DMatrix::zeros(n, n);
    for r in 0..n {
        for c in r..n {
            let v = bbt[(r, c)] * integrals[(r, c)];
            k[(r, c)] = v;
            k[(c, r)] = v;
        }
    }
    Ok(GrammianMatrix {
        k,
        horizon,
        quad_nodes: n_quad,
    })
}

/// x = R(β, K)v = (βI + K)⁻¹v by Cholesky; ‖x‖ ≤ ‖v‖/β.
pub fn resolvent_apply(
    beta: f64,
    k: &GrammianMatrix,
    v: &SpectralVector,
) -> Result<SpectralVector, ControlError> {
    if !(beta > 0.0) {
        return Err(ControlError::NonPositiveBeta(beta));
    }
    if v.len() != k.dim() {
        return Err(ControlError::Invalid(format!(
            "vector dimension {} ≠ Grammian dimension {}",
            v.len(),
            k.dim()
        )));
    }
    let mut shifted = k.k.clone();
    for i in 0..shifted.nrows() {
        shifted[(i, i)] += beta;
    }
    let chol = shifted
        .cholesky()
        .ok_or(ControlError::FactorizationFailure)?;
    let x = chol.solve(&DVector::from_column_slice(&v.coeffs));
    Ok(SpectralVector::from_coeffs(x.iter().copied().collect()))
}

/// ‖β·R(β,K)v‖ along a strictly decreasing positive β-sequence. Decay toward
/// zero is the strong-operator-topology criterion for linear approximate
/// controllability on the truncated space.
pub fn linear_controllability_indicator(
    k: &GrammianMatrix,
    v: &SpectralVector,
    betas: &[f64],
) -> Result<Vec<f64>, ControlError> {
    if betas.is_empty() {
        return Err(ControlError::Invalid("betas must be non-empty".into()));
    }
    for w in betas.windows(2) {
        if !(w[1] < w[0]) {
            return Err(ControlError::Invalid(format!(
                "betas must be strictly decreasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    if !(betas[betas.len() - 1] > 0.0) {
        return Err(ControlError::Invalid("betas must be positive".into()));
    }
    betas
        .iter()
        .map(|&beta| Ok(resolvent_apply(beta, k, v)?.scale(beta).norm()))
        .collect()
}
