//! Mild-solution fixed point z = G₁z + G₂z by Picard iteration.
//!
//! On the uniform grid θ_k = ka/n_t the map is
//!
//! (Gz)(θ_k) = C_q(θ_k)[z₀−φ(z)] + S_q(θ_k)[z₁−ψ(z)]
//!           + Σ_quad P_q(θ_k−ν_j)[f(ν_j, z(ν_j), w(ν_j)) + B u_β(ν_j)]
//!
//! with w the trapezoid-accumulated Volterra integral of g and u_β the
//! resolvent-regularized feedback control
//!
//! u_β(θ) = B*P_q(a−θ)·R(β,K₀ᵃ)·[z_d − C_q(a)(z₀−φ(z)) − S_q(a)(z₁−ψ(z))
//!            − ∫₀ᵃ P_q(a−ν)f(ν, z(ν), w(ν))dν].
//!
//! The bracket is assembled once per sweep from the current iterate, the
//! resolvent applied once, and the result propagated per node. The
//! P_q-convolution is the product trapezoidal rule: the forcing is
//! reconstructed piecewise-linearly and integrated against the exact kernel
//! moments Θ₀, Θ₁ (tables at offsets (k−j)h per mode), which keeps the
//! O(N·n_t) precompute / O(N·n_t²) sweep costs and delivers O(h²) accuracy
//! even though the kernel derivative blows up at the vanishing endpoint.
//!
//! Picard replaces the nonconstructive fixed-point argument; when the
//! smallness condition is violated the iteration may legitimately fail to
//! converge, which is a reported state rather than a crash.

use crate::control_operators::{resolvent_apply, ControlError, ControlVector, GrammianMatrix};
use crate::mittag_leffler::gamma;
use crate::nonlocal_problem::{check_contraction, ContractionCheck, ProblemError, ProblemSpec};
use crate::solution_families::{Families, FamilyError};
use crate::spectral_basis::{collocation_grid, SpectralVector};

#[derive(Debug, Clone, thiserror::Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("iteration diverged: {0}")]
    Divergence(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Convolution quadrature; product trapezoid is the only scheme.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Quadrature {
    #[default]
    ProductTrapezoid,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Time nodes: uniform grid θ_k = ka/n_t, k = 0..=n_t.
    pub n_t: usize,
    /// Sup-norm fixed-point tolerance.
    pub fp_tol: f64,
    /// Picard iteration cap.
    pub max_iter: usize,
    pub quad: Quadrature,
}

impl SolverConfig {
    pub fn new(n_t: usize) -> Self {
        SolverConfig {
            n_t,
            fp_tol: 1e-8,
            max_iter: 100,
            quad: Quadrature::ProductTrapezoid,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.n_t < 16 {
            return Err(SolverError::InvalidConfig(format!(
                "n_t must be ≥ 16, got {}",
                self.n_t
            )));
        }
        if !(self.fp_tol > 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "fp_tol must be positive, got {}",
                self.fp_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(SolverError::InvalidConfig("max_iter must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Time-gridded sequence of states with the supremum norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: Vec<f64>,
    states: Vec<SpectralVector>,
}

impl Trajectory {
    pub fn new(grid: Vec<f64>, states: Vec<SpectralVector>) -> Result<Self, SolverError> {
        if grid.is_empty() || grid.len() != states.len() {
            return Err(SolverError::GridMismatch(format!(
                "{} grid nodes vs {} states",
                grid.len(),
                states.len()
            )));
        }
        if grid[0] != 0.0 {
            return Err(SolverError::GridMismatch(format!(
                "grid must start at 0, got {}",
                grid[0]
            )));
        }
        if grid.len() > 1 {
            let h = grid[1] - grid[0];
            if !(h > 0.0) {
                return Err(SolverError::GridMismatch("grid must be increasing".into()));
            }
            for (k, &t) in grid.iter().enumerate() {
                let want = k as f64 * h;
                if (t - want).abs() > 1e-9 * (1.0 + want.abs()) {
                    return Err(SolverError::GridMismatch(format!(
                        "node {k} = {t} breaks uniform spacing {h}"
                    )));
                }
            }
        }
        let dim = states[0].len();
        if states.iter().any(|s| s.len() != dim) {
            return Err(SolverError::GridMismatch(
                "states carry inconsistent dimensions".into(),
            ));
        }
        Ok(Trajectory { grid, states })
    }

    /// Constant-in-time trajectory, the Picard seed.
    pub fn constant(grid: Vec<f64>, state: SpectralVector) -> Result<Self, SolverError> {
        let states = vec![state; grid.len()];
        Trajectory::new(grid, states)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn states(&self) -> &[SpectralVector] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &SpectralVector {
        &self.states[k]
    }

    pub fn nodes(&self) -> usize {
        self.grid.len()
    }

    pub fn modes(&self) -> usize {
        self.states[0].len()
    }

    pub fn horizon(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn step(&self) -> f64 {
        if self.grid.len() > 1 {
            self.grid[1] - self.grid[0]
        } else {
            0.0
        }
    }

    /// Index of the grid node nearest to t (grid is uniform).
    pub fn nearest_node(&self, t: f64) -> usize {
        if self.grid.len() == 1 {
            return 0;
        }
        let k = (t / self.step()).round();
        (k.max(0.0) as usize).min(self.grid.len() - 1)
    }

    /// ‖z‖_C = max_k ‖z(θ_k)‖.
    pub fn sup_norm(&self) -> f64 {
        self.states.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// max_k ‖z(θ_k) − w(θ_k)‖ over the shared grid.
    pub fn sup_distance(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| a.sub(b).norm())
            .fold(0.0, f64::max)
    }

    pub fn terminal(&self) -> &SpectralVector {
        self.states.last().unwrap()
    }

    pub fn is_finite(&self) -> bool {
        self.states.iter().all(|s| s.is_finite())
    }
}

/// Result of a fixed-point solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub trajectory: Trajectory,
    /// Feedback control at each grid node, recomputed from the returned
    /// trajectory.
    pub control: Vec<ControlVector>,
    pub iterations: usize,
    /// Sup-norm of the last Picard update.
    pub final_update: f64,
    /// Sup-norm of every Picard update, in iteration order.
    pub update_history: Vec<f64>,
    /// ‖z − G(z)‖_C of the returned trajectory.
    pub residual: f64,
    /// Whether sup_k ‖u_β(θ_k)‖ ≤ (1/β)(L₄ + L₅‖z‖_C) held with the
    /// measured constants.
    pub lemma2_ok: bool,
    pub converged: bool,
    /// The smallness condition M(d₁+d₂) < 1 at solve time (warn-only).
    pub contraction: ContractionCheck,
}

impl SolveReport {
    /// ∫₀ᵃ ‖u_β(θ)‖² dθ by trapezoid on the solve grid.
    pub fn control_energy(&self) -> f64 {
        let grid = self.trajectory.grid();
        if grid.len() < 2 {
            return 0.0;
        }
        let h = grid[1] - grid[0];
        let mut e = 0.0;
        for (k, u) in self.control.iter().enumerate() {
            let w = if k == 0 || k == grid.len() - 1 { 0.5 } else { 1.0 };
            e += w * u.norm().powi(2);
        }
        e * h
    }
}

/// Precomputed discretization of one problem on one grid: family tables at
/// the node offsets, product-integration weights, and the synthesis matrix.
/// Immutable after construction; one solve per β can share it.
pub struct Workspace {
    problem: ProblemSpec,
    families: Families,
    grid: Vec<f64>,
    h: f64,
    /// e_n(y_m), n × Ny.
    emat: Vec<Vec<f64>>,
    /// C_q(θ_k) diagonal, node × mode.
    cq_tab: Vec<Vec<f64>>,
    /// S_q(θ_k) diagonal, node × mode.
    sq_tab: Vec<Vec<f64>>,
    /// P_q(mh) diagonal, offset × mode.
    pq_tab: Vec<Vec<f64>>,
    /// Product-trapezoid weights per mode at offsets 1..=n_t.
    wl: Vec<Vec<f64>>,
    wr: Vec<Vec<f64>>,
}

impl Workspace {
    pub fn new(problem: &ProblemSpec, n_t: usize) -> Result<Self, SolverError> {
        problem.validate()?;
        if n_t == 0 {
            return Err(SolverError::InvalidConfig("n_t must be ≥ 1".into()));
        }
        let families = Families::new(problem.family.clone())?;
        let n = families.modes();
        let a = problem.horizon;
        let h = a / n_t as f64;
        let grid: Vec<f64> = (0..=n_t).map(|k| k as f64 * h).collect();

        let basis = &problem.family.basis;
        let ygrid = collocation_grid(basis);
        let mut emat = vec![vec![0.0; basis.colloc]; n];
        for (i, row) in emat.iter_mut().enumerate() {
            for (m, &y) in ygrid.iter().enumerate() {
                row[m] =
                    crate::spectral_basis::eigenfunction_at(basis, i + 1, y).map_err(FamilyError::from)?;
            }
        }

        let mut cq_tab = vec![vec![0.0; n]; n_t + 1];
        let mut sq_tab = vec![vec![0.0; n]; n_t + 1];
        let mut pq_tab = vec![vec![0.0; n]; n_t + 1];
        for (k, &theta) in grid.iter().enumerate() {
            for m in 0..n {
                cq_tab[k][m] = families.cq_factor(m + 1, theta)?;
                sq_tab[k][m] = families.sq_factor(m + 1, theta)?;
                pq_tab[k][m] = families.pq_factor(m + 1, theta)?;
            }
        }

        let mut wl = vec![vec![0.0; n_t + 1]; n];
        let mut wr = vec![vec![0.0; n_t + 1]; n];
        for m in 0..n {
            let mut th0_prev = 0.0;
            let mut th1_prev = 0.0;
            for j in 1..=n_t {
                let s = j as f64 * h;
                let th0 = families.theta0_factor(m + 1, s)?;
                let th1 = families.theta1_factor(m + 1, s)?;
                let da = th0 - th0_prev;
                let db = (th1 - th1_prev) / h;
                wl[m][j] = j as f64 * da - db;
                wr[m][j] = db - (j as f64 - 1.0) * da;
                th0_prev = th0;
                th1_prev = th1;
            }
        }

        Ok(Workspace {
            problem: problem.clone(),
            families,
            grid,
            h,
            emat,
            cq_tab,
            sq_tab,
            pq_tab,
            wl,
            wr,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn families(&self) -> &Families {
        &self.families
    }

    fn n_t(&self) -> usize {
        self.grid.len() - 1
    }

    fn modes(&self) -> usize {
        self.families.modes()
    }

    fn check_traj(&self, traj: &Trajectory) -> Result<(), SolverError> {
        if traj.nodes() != self.grid.len() || traj.modes() != self.modes() {
            return Err(SolverError::GridMismatch(format!(
                "trajectory {}×{} does not match workspace {}×{}",
                traj.nodes(),
                traj.modes(),
                self.grid.len(),
                self.modes()
            )));
        }
        Ok(())
    }

    fn synthesize(&self, v: &SpectralVector) -> Vec<f64> {
        let ny = self.emat[0].len();
        let mut out = vec![0.0; ny];
        for (row, &c) in self.emat.iter().zip(&v.coeffs) {
            if c != 0.0 {
                for (o, &e) in out.iter_mut().zip(row) {
                    *o += c * e;
                }
            }
        }
        out
    }

    fn analyze(&self, samples: &[f64]) -> SpectralVector {
        let hq = self.problem.family.basis.quad_weight();
        let coeffs = self
            .emat
            .iter()
            .map(|row| hq * row.iter().zip(samples).map(|(e, s)| e * s).sum::<f64>())
            .collect();
        SpectralVector::from_coeffs(coeffs)
    }

    fn node_samples(&self, traj: &Trajectory) -> Vec<Vec<f64>> {
        traj.states().iter().map(|s| self.synthesize(s)).collect()
    }

    /// w(θ_k) = trapezoid over τ ∈ [0, θ_k] of g(θ_k, τ, z(τ)), pointwise on
    /// the collocation grid; w(θ_0) = 0.
    fn volterra_from_samples(&self, samples: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let ny = self.emat[0].len();
        let n_t = self.n_t();
        let g = &self.problem.g;
        let mut w = vec![vec![0.0; ny]; n_t + 1];
        let mut gbuf = vec![0.0; ny];
        for (k, wk) in w.iter_mut().enumerate().skip(1) {
            let theta = self.grid[k];
            for (j, sample) in samples.iter().enumerate().take(k + 1) {
                g.eval(theta, self.grid[j], sample, &mut gbuf);
                let wt = if j == 0 || j == k { 0.5 * self.h } else { self.h };
                for (a, &gv) in wk.iter_mut().zip(&gbuf) {
                    *a += wt * gv;
                }
            }
        }
        w
    }

    /// f(θ_j, z(θ_j), w(θ_j)) projected back to coefficients, per node.
    fn forcing_coeffs(
        &self,
        samples: &[Vec<f64>],
        volterra: &[Vec<f64>],
    ) -> Vec<SpectralVector> {
        let ny = self.emat[0].len();
        let mut fbuf = vec![0.0; ny];
        samples
            .iter()
            .zip(volterra)
            .zip(self.grid.iter())
            .map(|((s, w), &theta)| {
                self.problem.f.eval(theta, s, w, &mut fbuf);
                self.analyze(&fbuf)
            })
            .collect()
    }

    /// Product-trapezoid convolution Σ_quad P_q(θ_k−ν_j)·F_j at node k.
    fn convolve_at(&self, forcing: &[SpectralVector], k: usize) -> SpectralVector {
        let n = self.modes();
        let mut out = SpectralVector::zeros(n);
        if k == 0 {
            return out;
        }
        for m in 0..n {
            let wl = &self.wl[m];
            let wr = &self.wr[m];
            let mut acc = forcing[0].coeffs[m] * wr[k];
            for i in 1..k {
                acc += forcing[i].coeffs[m] * (wr[k - i] + wl[k - i + 1]);
            }
            acc += forcing[k].coeffs[m] * wl[1];
            out.coeffs[m] = acc;
        }
        out
    }

    fn diag_apply(&self, tab: &[f64], v: &SpectralVector) -> SpectralVector {
        SpectralVector::from_coeffs(
            tab.iter().zip(&v.coeffs).map(|(d, c)| d * c).collect(),
        )
    }

    /// The feedback control for the current iterate: bracket once, resolvent
    /// once, then B*P_q(a−θ_k) propagation per node.
    pub fn feedback_control(
        &self,
        traj: &Trajectory,
        k_gram: &GrammianMatrix,
        beta: f64,
        z_d: &SpectralVector,
    ) -> Result<Vec<ControlVector>, SolverError> {
        self.check_traj(traj)?;
        let samples = self.node_samples(traj);
        let volterra = self.volterra_from_samples(&samples);
        let forcing = self.forcing_coeffs(&samples, &volterra);
        self.feedback_from_forcing(traj, &forcing, k_gram, beta, z_d)
    }

    fn feedback_from_forcing(
        &self,
        traj: &Trajectory,
        forcing: &[SpectralVector],
        k_gram: &GrammianMatrix,
        beta: f64,
        z_d: &SpectralVector,
    ) -> Result<Vec<ControlVector>, SolverError> {
        let n_t = self.n_t();
        let phi = self.problem.phi.apply(traj)?;
        let psi = self.problem.psi.apply(traj)?;
        let y0 = self.problem.z0.sub(&phi);
        let y1 = self.problem.z1.sub(&psi);

        let mut bracket = z_d.clone();
        bracket.axpy(-1.0, &self.diag_apply(&self.cq_tab[n_t], &y0));
        bracket.axpy(-1.0, &self.diag_apply(&self.sq_tab[n_t], &y1));
        bracket.axpy(-1.0, &self.convolve_at(forcing, n_t));

        let r = resolvent_apply(beta, k_gram, &bracket)?;

        let b = &self.problem.input_op;
        Ok((0..=n_t)
            .map(|k| b.apply_star(&self.diag_apply(&self.pq_tab[n_t - k], &r)))
            .collect())
    }

    /// One application of G with a prescribed control trajectory.
    pub fn apply_with_control(
        &self,
        traj: &Trajectory,
        control: &[ControlVector],
    ) -> Result<Trajectory, SolverError> {
        self.check_traj(traj)?;
        if control.len() != self.grid.len() {
            return Err(SolverError::GridMismatch(format!(
                "{} control nodes vs {} grid nodes",
                control.len(),
                self.grid.len()
            )));
        }
        let samples = self.node_samples(traj);
        let volterra = self.volterra_from_samples(&samples);
        let forcing = self.forcing_coeffs(&samples, &volterra);
        self.assemble(traj, &forcing, control)
    }

    fn assemble(
        &self,
        traj: &Trajectory,
        forcing: &[SpectralVector],
        control: &[ControlVector],
    ) -> Result<Trajectory, SolverError> {
        let n = self.modes();
        let phi = self.problem.phi.apply(traj)?;
        let psi = self.problem.psi.apply(traj)?;
        let y0 = self.problem.z0.sub(&phi);
        let y1 = self.problem.z1.sub(&psi);
        let b = &self.problem.input_op;

        let total: Vec<SpectralVector> = forcing
            .iter()
            .zip(control)
            .map(|(f, u)| f.add(&b.apply(u, n)))
            .collect();

        let states = (0..self.grid.len())
            .map(|k| {
                let mut z = self.diag_apply(&self.cq_tab[k], &y0);
                z.axpy(1.0, &self.diag_apply(&self.sq_tab[k], &y1));
                z.axpy(1.0, &self.convolve_at(&total, k));
                z
            })
            .collect();
        Trajectory::new(self.grid.clone(), states)
    }

    /// One Picard sweep with feedback control: returns (Gz, u_β(z)).
    pub fn sweep(
        &self,
        traj: &Trajectory,
        k_gram: &GrammianMatrix,
        beta: f64,
        z_d: &SpectralVector,
    ) -> Result<(Trajectory, Vec<ControlVector>), SolverError> {
        self.check_traj(traj)?;
        let samples = self.node_samples(traj);
        let volterra = self.volterra_from_samples(&samples);
        let forcing = self.forcing_coeffs(&samples, &volterra);
        let control = self.feedback_from_forcing(traj, &forcing, k_gram, beta, z_d)?;
        let next = self.assemble(traj, &forcing, &control)?;
        Ok((next, control))
    }

    /// Volterra accumulations of the trajectory as collocation samples.
    pub fn volterra(&self, traj: &Trajectory) -> Result<Vec<Vec<f64>>, SolverError> {
        self.check_traj(traj)?;
        let samples = self.node_samples(traj);
        Ok(self.volterra_from_samples(&samples))
    }

    /// sup_k ‖u(θ_k)‖ ≤ (1/β)(L₄ + L₅‖z‖_C) with the explicit constants
    ///
    /// L₄ = (M_B M a^{q−1}/Γ(q))[‖z_d‖ + MȲ + (M a^q/Γ(q))‖m‖_∞]
    /// L₅ = (M_B M² a^{2q−1}/Γ(q)²)(C₁ + aC₂C₃),   Ȳ evaluated per trajectory.
    pub fn lemma2_bound_ok(
        &self,
        traj: &Trajectory,
        control: &[ControlVector],
        beta: f64,
        z_d: &SpectralVector,
    ) -> Result<bool, SolverError> {
        let q = self.problem.family.q;
        let a = self.problem.horizon;
        let m = self.problem.family.bound_m;
        let mb = self.problem.input_op.norm(self.modes());
        let gq = gamma(q);
        let c = &self.problem.constants;

        let phi = self.problem.phi.apply(traj)?;
        let psi = self.problem.psi.apply(traj)?;
        let ybar = self.problem.z0.norm() + phi.norm() + self.problem.z1.norm() + psi.norm();

        let l4 = (mb * m * a.powf(q - 1.0) / gq)
            * (z_d.norm() + m * ybar + (m * a.powf(q) / gq) * c.m_bound);
        let l5 = (mb * m * m * a.powf(2.0 * q - 1.0) / (gq * gq)) * (c.c1 + a * c.c2 * c.c3);
        let cap = (l4 + l5 * traj.sup_norm()) / beta;

        let sup_u = control.iter().map(|u| u.norm()).fold(0.0, f64::max);
        Ok(sup_u <= cap * (1.0 + 1e-9) + 1e-12)
    }
}

/// Volterra accumulations w(θ_k) of a trajectory (collocation samples).
pub fn volterra_accumulate(
    problem: &ProblemSpec,
    traj: &Trajectory,
) -> Result<Vec<Vec<f64>>, SolverError> {
    Workspace::new(problem, traj.nodes() - 1)?.volterra(traj)
}

/// Feedback control u_β for a given iterate.
pub fn feedback_control(
    problem: &ProblemSpec,
    k_gram: &GrammianMatrix,
    beta: f64,
    traj: &Trajectory,
    z_d: &SpectralVector,
) -> Result<Vec<ControlVector>, SolverError> {
    Workspace::new(problem, traj.nodes() - 1)?.feedback_control(traj, k_gram, beta, z_d)
}

/// One application of the full map G (with feedback control).
pub fn apply_g(
    problem: &ProblemSpec,
    k_gram: &GrammianMatrix,
    beta: f64,
    traj: &Trajectory,
    z_d: &SpectralVector,
) -> Result<Trajectory, SolverError> {
    let ws = Workspace::new(problem, traj.nodes() - 1)?;
    let (next, _) = ws.sweep(traj, k_gram, beta, z_d)?;
    Ok(next)
}

/// ‖z − G(z)‖_C, the discrete defect of the mild-solution equation.
pub fn residual(
    problem: &ProblemSpec,
    k_gram: &GrammianMatrix,
    beta: f64,
    traj: &Trajectory,
    z_d: &SpectralVector,
) -> Result<f64, SolverError> {
    Ok(apply_g(problem, k_gram, beta, traj, z_d)?.sup_distance(traj))
}

/// Picard iteration z^{m+1} = G(z^m) from the constant seed z⁰ ≡ z₀.
/// Non-convergence within max_iter is a reported state; NaN or overflow in
/// the iterates is an error.
pub fn solve_fixed_point(
    problem: &ProblemSpec,
    k_gram: &GrammianMatrix,
    beta: f64,
    z_d: &SpectralVector,
    cfg: &SolverConfig,
) -> Result<SolveReport, SolverError> {
    cfg.validate()?;
    let ws = Workspace::new(problem, cfg.n_t)?;
    solve_fixed_point_with(&ws, k_gram, beta, z_d, cfg)
}

/// Fixed-point solve on a prebuilt workspace; β-sweeps share the kernel
/// tables this way.
pub fn solve_fixed_point_with(
    ws: &Workspace,
    k_gram: &GrammianMatrix,
    beta: f64,
    z_d: &SpectralVector,
    cfg: &SolverConfig,
) -> Result<SolveReport, SolverError> {
    cfg.validate()?;
    if ws.n_t() != cfg.n_t {
        return Err(SolverError::GridMismatch(format!(
            "workspace has n_t = {}, config wants {}",
            ws.n_t(),
            cfg.n_t
        )));
    }
    let problem = ws.problem();
    let contraction = check_contraction(
        problem.family.bound_m,
        problem.constants.d1,
        problem.constants.d2,
    );

    let mut z = Trajectory::constant(ws.grid().to_vec(), problem.z0.clone())?;
    let mut iterations = 0usize;
    let mut final_update = f64::INFINITY;
    let mut update_history = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        let (next, _) = ws.sweep(&z, k_gram, beta, z_d)?;
        iterations += 1;
        if !next.is_finite() {
            return Err(SolverError::Divergence(format!(
                "non-finite iterate at sweep {iterations}"
            )));
        }
        final_update = next.sup_distance(&z);
        update_history.push(final_update);
        z = next;
        if final_update <= cfg.fp_tol {
            converged = true;
            break;
        }
    }

    // Residual sweep also yields the control consistent with the returned z.
    let (gz, control) = ws.sweep(&z, k_gram, beta, z_d)?;
    let residual = gz.sup_distance(&z);
    let lemma2_ok = ws.lemma2_bound_ok(&z, &control, beta, z_d)?;

    Ok(SolveReport {
        trajectory: z,
        control,
        iterations,
        final_update,
        update_history,
        residual,
        lemma2_ok,
        converged,
        contraction,
    })
}
