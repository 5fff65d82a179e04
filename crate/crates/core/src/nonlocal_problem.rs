//! Problem instances and the empirical hypothesis checks.
//!
//! The worked nonlinearities act pointwise in physical space:
//!
//! g(θ, τ, s) = e^τ / (√2 + |s|)            Lipschitz ≤ e/2 in s on τ ∈ [0,1]
//! f(θ, s, w) = e^{−θ}|s| / ((3+e^θ)(1+|s|)) + w
//!
//! where w carries the already-accumulated Volterra integral ∫₀^θ g dτ. The
//! first term of f is bounded by 1/4; with the worked g on horizon 1 the
//! Volterra term stays below (e−1)/√2 pointwise. Nonlocal maps are finite
//! sums φ(z) = Σ aᵢ z(θᵢ) over prescribed times, linear with sup-norm
//! Lipschitz constant Σ|aᵢ|.
//!
//! The checker reports *empirical lower bounds* on Lipschitz constants: it
//! can flag a declared constant as violated, never certify one.

use crate::control_operators::BOperator;
use crate::mild_solver::Trajectory;
use crate::solution_families::FamilyConfig;
use crate::spectral_basis::{BasisConfig, SpectralVector};
use std::f64::consts::SQRT_2;

#[derive(Debug, Clone, thiserror::Error)]
pub enum ProblemError {
    #[error("invalid problem specification: {0}")]
    Invalid(String),
    #[error("nonlocal time outside the horizon: {0}")]
    TimeOutOfRange(String),
}

/// Registry of forcing nonlinearities f(θ, state, volterra) → state,
/// evaluated pointwise on collocation samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FSlot {
    Zero,
    /// The worked instance: e^{−θ}|s|/((3+e^θ)(1+|s|)) + w.
    Example,
    /// Unbounded diagnostic, f = s (violates the uniform-bound hypothesis).
    Identity,
}

impl FSlot {
    pub fn eval(&self, theta: f64, state: &[f64], volterra: &[f64], out: &mut [f64]) {
        match self {
            FSlot::Zero => out.fill(0.0),
            FSlot::Example => {
                let damp = (-theta).exp() / (3.0 + theta.exp());
                for ((o, &s), &w) in out.iter_mut().zip(state).zip(volterra) {
                    *o = damp * s.abs() / (1.0 + s.abs()) + w;
                }
            }
            FSlot::Identity => out.copy_from_slice(state),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FSlot::Zero => "zero",
            FSlot::Example => "example",
            FSlot::Identity => "identity",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, ProblemError> {
        match name {
            "zero" => Ok(FSlot::Zero),
            "example" => Ok(FSlot::Example),
            "identity" => Ok(FSlot::Identity),
            other => Err(ProblemError::Invalid(format!(
                "unknown f registry entry '{other}' (expected zero|example|identity)"
            ))),
        }
    }
}

/// Registry of Volterra kernels g(θ, τ, state) → state, pointwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GSlot {
    Zero,
    /// The worked instance: e^τ/(√2 + |s|).
    Example,
    /// Constant kernel, a quadrature diagnostic (w(θ) = θ·c exactly under
    /// the trapezoid rule).
    Constant(f64),
}

impl GSlot {
    pub fn eval(&self, _theta: f64, tau: f64, state: &[f64], out: &mut [f64]) {
        match self {
            GSlot::Zero => out.fill(0.0),
            GSlot::Example => {
                let num = tau.exp();
                for (o, &s) in out.iter_mut().zip(state) {
                    *o = num / (SQRT_2 + s.abs());
                }
            }
            GSlot::Constant(c) => out.fill(*c),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GSlot::Zero => "zero",
            GSlot::Example => "example",
            GSlot::Constant(_) => "constant",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, ProblemError> {
        match name {
            "zero" => Ok(GSlot::Zero),
            "example" => Ok(GSlot::Example),
            other => Err(ProblemError::Invalid(format!(
                "unknown g registry entry '{other}' (expected zero|example)"
            ))),
        }
    }
}

/// Pointwise worked g on a sample array.
pub fn example_g(theta: f64, tau: f64, state: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; state.len()];
    GSlot::Example.eval(theta, tau, state, &mut out);
    out
}

/// Pointwise worked f on sample arrays.
pub fn example_f(theta: f64, state: &[f64], volterra: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; state.len()];
    FSlot::Example.eval(theta, state, volterra, &mut out);
    out
}

/// Finite-sum nonlocal map: times θᵢ with weights; φ(z) = Σ aᵢ z(θᵢ).
#[derive(Debug, Clone, PartialEq)]
pub struct NonlocalWeights {
    pub times: Vec<f64>,
    pub weights: Vec<f64>,
}

impl NonlocalWeights {
    pub fn new(times: Vec<f64>, weights: Vec<f64>) -> Self {
        NonlocalWeights { times, weights }
    }

    pub fn empty() -> Self {
        NonlocalWeights { times: vec![], weights: vec![] }
    }

    /// Σ|aᵢ|, the sup-norm Lipschitz constant of the map.
    pub fn lipschitz(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    pub fn validate(&self, horizon: f64) -> Result<(), ProblemError> {
        if self.times.len() != self.weights.len() {
            return Err(ProblemError::Invalid(format!(
                "{} times vs {} weights",
                self.times.len(),
                self.weights.len()
            )));
        }
        for &t in &self.times {
            if !(0.0..=horizon).contains(&t) {
                return Err(ProblemError::TimeOutOfRange(format!(
                    "θᵢ = {t} outside [0, {horizon}]"
                )));
            }
        }
        Ok(())
    }

    /// Σ aᵢ z(θᵢ), coefficient-wise, with each θᵢ snapped to the nearest
    /// trajectory node (always within h/2 on a uniform grid).
    pub fn apply(&self, traj: &Trajectory) -> Result<SpectralVector, ProblemError> {
        let horizon = traj.horizon();
        self.validate(horizon)?;
        let mut out = SpectralVector::zeros(traj.modes());
        for (&t, &w) in self.times.iter().zip(&self.weights) {
            let k = traj.nearest_node(t);
            out.axpy(w, traj.state(k));
        }
        Ok(out)
    }
}

/// φ(z) = Σ aᵢ z(θᵢ).
pub fn nonlocal_phi(w: &NonlocalWeights, traj: &Trajectory) -> Result<SpectralVector, ProblemError> {
    w.apply(traj)
}

/// ψ(z) = Σ γᵢ z(θᵢ).
pub fn nonlocal_psi(w: &NonlocalWeights, traj: &Trajectory) -> Result<SpectralVector, ProblemError> {
    w.apply(traj)
}

/// Constants declared for a problem instance; the hypothesis checker
/// validates these against sampled estimates.
#[derive(Debug, Clone, Copy)]
pub struct DeclaredConstants {
    /// Lipschitz of f in the state argument.
    pub c1: f64,
    /// Lipschitz of f in the Volterra argument.
    pub c2: f64,
    /// Lipschitz of g in the state argument.
    pub c3: f64,
    /// Lipschitz of φ (sup-norm over trajectories).
    pub d1: f64,
    /// Lipschitz of ψ.
    pub d2: f64,
    /// Uniform bound on ‖f‖ in the state norm.
    pub m_bound: f64,
}

impl DeclaredConstants {
    pub fn validate(&self) -> Result<(), ProblemError> {
        for (name, v) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("d1", self.d1),
            ("d2", self.d2),
            ("m_bound", self.m_bound),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(ProblemError::Invalid(format!(
                    "declared constant {name} must be finite and ≥ 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// A full problem instance: spectrum, input operator, nonlinearities,
/// nonlocal maps, initial data, horizon, and declared constants.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub family: FamilyConfig,
    pub input_op: BOperator,
    pub f: FSlot,
    pub g: GSlot,
    pub phi: NonlocalWeights,
    pub psi: NonlocalWeights,
    pub z0: SpectralVector,
    pub z1: SpectralVector,
    pub horizon: f64,
    pub constants: DeclaredConstants,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<(), ProblemError> {
        self.family
            .validate()
            .map_err(|e| ProblemError::Invalid(e.to_string()))?;
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(ProblemError::Invalid(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        let n = self.family.basis.modes;
        if self.z0.len() != n || self.z1.len() != n {
            return Err(ProblemError::Invalid(format!(
                "z0/z1 must carry {n} coefficients, got {}/{}",
                self.z0.len(),
                self.z1.len()
            )));
        }
        self.phi.validate(self.horizon)?;
        self.psi.validate(self.horizon)?;
        self.constants.validate()?;
        Ok(())
    }

    pub fn basis(&self) -> &BasisConfig {
        &self.family.basis
    }
}

/// Empirical Lipschitz lower bound: max over sampled pairs of
/// ‖F(x)−F(x′)‖ / dist(x, x′). Degenerate pairs are skipped.
pub fn estimate_lipschitz<X>(
    map: impl Fn(&X) -> Vec<f64>,
    dist: impl Fn(&X, &X) -> f64,
    mut sampler: impl FnMut() -> X,
    n_samples: usize,
) -> f64 {
    let mut best = 0.0f64;
    for _ in 0..n_samples {
        let x = sampler();
        let y = sampler();
        let d = dist(&x, &y);
        if d == 0.0 || !d.is_finite() {
            continue;
        }
        let fx = map(&x);
        let fy = map(&y);
        let num = fx
            .iter()
            .zip(&fy)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        best = best.max(num / d);
    }
    best
}

/// Outcome of the mild-solution smallness condition M(d₁+d₂) < 1.
#[derive(Debug, Clone, Copy)]
pub struct ContractionCheck {
    pub passed: bool,
    /// 1 − M(d₁+d₂); positive iff the condition holds.
    pub margin: f64,
}

/// The contraction condition of the existence theorem: pass iff
/// M(d₁+d₂) < 1; the margin is 1 − M(d₁+d₂).
pub fn check_contraction(m: f64, d1: f64, d2: f64) -> ContractionCheck {
    let product = m * (d1 + d2);
    ContractionCheck {
        passed: product < 1.0,
        margin: 1.0 - product,
    }
}

/// Empirical sup of ‖f(θ, state, volterra)‖ (grid-quadrature L² norm) over
/// sampled inputs; a lower bound on the true uniform bound, used to validate
/// a declared m_bound and to flag unbounded nonlinearities.
pub fn check_uniform_bound(
    f: &FSlot,
    basis: &BasisConfig,
    mut sampler: impl FnMut() -> (f64, Vec<f64>, Vec<f64>),
    n_samples: usize,
) -> f64 {
    let mut out = vec![0.0; basis.colloc];
    let mut sup = 0.0f64;
    for _ in 0..n_samples {
        let (theta, state, volterra) = sampler();
        f.eval(theta, &state, &volterra, &mut out);
        sup = sup.max(crate::spectral_basis::grid_norm(basis, &out));
    }
    sup
}
