//! Experiment layer: config ingestion, hypothesis reporting, the β-sweep
//! approximate-controllability experiment, and CSV emission.
//!
//! Configs are flat `key = value` text (UTF-8, `#` comments, lists
//! comma-separated); every parameter has a documented default, so a minimal
//! file can set a single key. Nonlinearities are picked by name from the
//! built-in registry. All numbers are emitted with 17 significant digits and
//! results are byte-identical across runs for a fixed (config, seed).

use crate::control_operators::{grammian, linear_controllability_indicator, BOperator};
use crate::mild_solver::{
    solve_fixed_point_with, SolveReport, SolverConfig, SolverError, Trajectory, Workspace,
};
use crate::nonlocal_problem::{
    check_contraction, check_uniform_bound, estimate_lipschitz, DeclaredConstants, FSlot, GSlot,
    NonlocalWeights, ProblemSpec,
};
use crate::solution_families::{Families, FamilyConfig};
use crate::spectral_basis::{BasisConfig, SpectralVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{E, PI, SQRT_2};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("config parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid config field `{field}`: {msg}")]
    Invalid { field: String, msg: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{0}")]
    Run(String),
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Full experiment description with defaults for every field.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub q: f64,
    pub horizon: f64,
    pub length: f64,
    pub modes: usize,
    pub colloc: usize,
    pub z0: Vec<f64>,
    pub z1: Vec<f64>,
    pub z_d: Vec<f64>,
    pub f_name: String,
    pub g_name: String,
    pub b_name: String,
    pub phi_times: Vec<f64>,
    pub phi_weights: Vec<f64>,
    pub psi_times: Vec<f64>,
    pub psi_weights: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub m_bound: f64,
    pub n_t: usize,
    pub fp_tol: f64,
    pub max_iter: usize,
    pub grammian_nodes: usize,
    pub betas: Vec<f64>,
    pub seed: u64,
    pub out: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let modes = 6;
        ExperimentConfig {
            q: 1.5,
            horizon: 1.0,
            length: PI,
            modes,
            colloc: 2 * modes + 1,
            z0: vec![0.0; modes],
            z1: vec![0.0; modes],
            z_d: {
                let mut v = vec![0.0; modes];
                v[0] = 0.1;
                v
            },
            f_name: "example".into(),
            g_name: "example".into(),
            b_name: "example".into(),
            phi_times: vec![0.3, 0.6],
            phi_weights: vec![0.1, 0.2],
            psi_times: vec![0.3, 0.6],
            psi_weights: vec![0.15, 0.25],
            c1: 0.25,
            c2: 1.0,
            c3: E / 2.0,
            m_bound: (0.25 + (E - 1.0) / SQRT_2) * PI.sqrt(),
            n_t: 200,
            fp_tol: 1e-8,
            max_iter: 100,
            grammian_nodes: 400,
            betas: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5],
            seed: 42,
            out: None,
        }
    }
}

fn parse_scalar<T: std::str::FromStr>(field: &str, line: usize, raw: &str) -> Result<T, ExperimentError> {
    raw.trim().parse().map_err(|_| ExperimentError::Parse {
        line,
        msg: format!("cannot parse `{raw}` for key `{field}`"),
    })
}

fn parse_list(field: &str, line: usize, raw: &str) -> Result<Vec<f64>, ExperimentError> {
    raw.split(',')
        .map(|tok| parse_scalar::<f64>(field, line, tok))
        .collect()
}

/// Parse a flat key-value config; unset keys take their defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = ExperimentConfig::default();
    let mut colloc_set = false;
    let mut m_bound_set = false;
    let mut z_keys: Vec<(String, usize, Vec<f64>)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw_line.split_once('#') {
            Some((head, _)) => head,
            None => raw_line,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(ExperimentError::Parse {
            line,
            msg: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(ExperimentError::Parse {
                line,
                msg: format!("empty value for key `{key}`"),
            });
        }
        match key {
            "q" => cfg.q = parse_scalar(key, line, value)?,
            "a" => cfg.horizon = parse_scalar(key, line, value)?,
            "L" => cfg.length = parse_scalar(key, line, value)?,
            "N" => cfg.modes = parse_scalar(key, line, value)?,
            "Ny" => {
                cfg.colloc = parse_scalar(key, line, value)?;
                colloc_set = true;
            }
            "z0" | "z1" | "zd" => {
                z_keys.push((key.to_string(), line, parse_list(key, line, value)?))
            }
            "f" => cfg.f_name = value.to_string(),
            "g" => cfg.g_name = value.to_string(),
            "b" => cfg.b_name = value.to_string(),
            "phi_times" => cfg.phi_times = parse_list(key, line, value)?,
            "phi_weights" => cfg.phi_weights = parse_list(key, line, value)?,
            "psi_times" => cfg.psi_times = parse_list(key, line, value)?,
            "psi_weights" => cfg.psi_weights = parse_list(key, line, value)?,
            "c1" => cfg.c1 = parse_scalar(key, line, value)?,
            "c2" => cfg.c2 = parse_scalar(key, line, value)?,
            "c3" => cfg.c3 = parse_scalar(key, line, value)?,
            "m_bound" => {
                cfg.m_bound = parse_scalar(key, line, value)?;
                m_bound_set = true;
            }
            "n_t" => cfg.n_t = parse_scalar(key, line, value)?,
            "fp_tol" => cfg.fp_tol = parse_scalar(key, line, value)?,
            "max_iter" => cfg.max_iter = parse_scalar(key, line, value)?,
            "grammian_nodes" => cfg.grammian_nodes = parse_scalar(key, line, value)?,
            "betas" => cfg.betas = parse_list(key, line, value)?,
            "seed" => cfg.seed = parse_scalar(key, line, value)?,
            "out" => cfg.out = Some(value.to_string()),
            other => {
                return Err(ExperimentError::Parse {
                    line,
                    msg: format!("unknown key `{other}`"),
                })
            }
        }
    }

    if !colloc_set {
        cfg.colloc = 2 * cfg.modes + 1;
    }
    if !m_bound_set {
        // worked-instance bound: pointwise 1/4 + (e^a−1)/√2, times ‖1‖_Z
        cfg.m_bound =
            (0.25 + (cfg.horizon.exp() - 1.0) / SQRT_2) * cfg.length.sqrt();
    }
    cfg.z0 = vec![0.0; cfg.modes];
    cfg.z1 = vec![0.0; cfg.modes];
    cfg.z_d = vec![0.0; cfg.modes];
    cfg.z_d[0] = 0.1;
    for (key, line, list) in z_keys {
        if list.len() > cfg.modes {
            return Err(ExperimentError::Parse {
                line,
                msg: format!("`{key}` has {} entries but N = {}", list.len(), cfg.modes),
            });
        }
        let target = match key.as_str() {
            "z0" => &mut cfg.z0,
            "z1" => &mut cfg.z1,
            _ => &mut cfg.z_d,
        };
        target.fill(0.0);
        target[..list.len()].copy_from_slice(&list);
    }

    validate_config(&cfg)?;
    Ok(cfg)
}

fn validate_config(cfg: &ExperimentConfig) -> Result<(), ExperimentError> {
    let inv = |field: &str, msg: String| ExperimentError::Invalid {
        field: field.into(),
        msg,
    };
    if !(cfg.q > 1.0 && cfg.q < 2.0) {
        return Err(inv("q", format!("must lie in (1, 2), got {}", cfg.q)));
    }
    if !(cfg.horizon > 0.0) {
        return Err(inv("a", format!("must be positive, got {}", cfg.horizon)));
    }
    if !(cfg.length > 0.0) {
        return Err(inv("L", format!("must be positive, got {}", cfg.length)));
    }
    if cfg.modes == 0 {
        return Err(inv("N", "must be ≥ 1".into()));
    }
    if cfg.colloc < 2 * cfg.modes + 1 {
        return Err(inv(
            "Ny",
            format!("must be ≥ 2N+1 = {}, got {}", 2 * cfg.modes + 1, cfg.colloc),
        ));
    }
    if cfg.n_t < 16 {
        return Err(inv("n_t", format!("must be ≥ 16, got {}", cfg.n_t)));
    }
    if !(cfg.fp_tol > 0.0) {
        return Err(inv("fp_tol", format!("must be positive, got {}", cfg.fp_tol)));
    }
    if cfg.max_iter == 0 {
        return Err(inv("max_iter", "must be ≥ 1".into()));
    }
    if cfg.grammian_nodes < 16 {
        return Err(inv(
            "grammian_nodes",
            format!("must be ≥ 16, got {}", cfg.grammian_nodes),
        ));
    }
    if cfg.betas.is_empty() {
        return Err(inv("betas", "must be non-empty".into()));
    }
    for w in cfg.betas.windows(2) {
        if !(w[1] < w[0]) {
            return Err(inv(
                "betas",
                format!("must be strictly decreasing, got {} then {}", w[0], w[1]),
            ));
        }
    }
    if !(cfg.betas[cfg.betas.len() - 1] > 0.0) {
        return Err(inv("betas", "must be positive".into()));
    }
    FSlot::from_name(&cfg.f_name).map_err(|e| inv("f", e.to_string()))?;
    GSlot::from_name(&cfg.g_name).map_err(|e| inv("g", e.to_string()))?;
    if !matches!(cfg.b_name.as_str(), "example" | "zero") {
        return Err(inv(
            "b",
            format!("unknown input operator `{}` (expected example|zero)", cfg.b_name),
        ));
    }
    for (field, times) in [("phi_times", &cfg.phi_times), ("psi_times", &cfg.psi_times)] {
        for &t in times.iter() {
            if !(0.0..=cfg.horizon).contains(&t) {
                return Err(inv(field, format!("time {t} outside [0, {}]", cfg.horizon)));
            }
        }
    }
    if cfg.phi_times.len() != cfg.phi_weights.len() {
        return Err(inv("phi_weights", "length differs from phi_times".into()));
    }
    if cfg.psi_times.len() != cfg.psi_weights.len() {
        return Err(inv("psi_weights", "length differs from psi_times".into()));
    }
    for (field, v) in [
        ("c1", cfg.c1),
        ("c2", cfg.c2),
        ("c3", cfg.c3),
        ("m_bound", cfg.m_bound),
    ] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(inv(field, format!("must be finite and ≥ 0, got {v}")));
        }
    }
    Ok(())
}

/// Read and parse a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ExperimentError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

/// Serialize a config to the flat key-value format; `parse_config` of the
/// result reproduces the config exactly.
pub fn emit_config(cfg: &ExperimentConfig) -> String {
    let list = |v: &[f64]| v.iter().map(|&x| fmt17(x)).collect::<Vec<_>>().join(", ");
    let mut s = String::new();
    s.push_str("# fracctrl experiment configuration\n");
    s.push_str(&format!("q = {}\n", fmt17(cfg.q)));
    s.push_str(&format!("a = {}\n", fmt17(cfg.horizon)));
    s.push_str(&format!("L = {}\n", fmt17(cfg.length)));
    s.push_str(&format!("N = {}\n", cfg.modes));
    s.push_str(&format!("Ny = {}\n", cfg.colloc));
    s.push_str(&format!("z0 = {}\n", list(&cfg.z0)));
    s.push_str(&format!("z1 = {}\n", list(&cfg.z1)));
    s.push_str(&format!("zd = {}\n", list(&cfg.z_d)));
    s.push_str(&format!("f = {}\n", cfg.f_name));
    s.push_str(&format!("g = {}\n", cfg.g_name));
    s.push_str(&format!("b = {}\n", cfg.b_name));
    if !cfg.phi_times.is_empty() {
        s.push_str(&format!("phi_times = {}\n", list(&cfg.phi_times)));
        s.push_str(&format!("phi_weights = {}\n", list(&cfg.phi_weights)));
    }
    if !cfg.psi_times.is_empty() {
        s.push_str(&format!("psi_times = {}\n", list(&cfg.psi_times)));
        s.push_str(&format!("psi_weights = {}\n", list(&cfg.psi_weights)));
    }
    s.push_str(&format!("c1 = {}\n", fmt17(cfg.c1)));
    s.push_str(&format!("c2 = {}\n", fmt17(cfg.c2)));
    s.push_str(&format!("c3 = {}\n", fmt17(cfg.c3)));
    s.push_str(&format!("m_bound = {}\n", fmt17(cfg.m_bound)));
    s.push_str(&format!("n_t = {}\n", cfg.n_t));
    s.push_str(&format!("fp_tol = {}\n", fmt17(cfg.fp_tol)));
    s.push_str(&format!("max_iter = {}\n", cfg.max_iter));
    s.push_str(&format!("grammian_nodes = {}\n", cfg.grammian_nodes));
    s.push_str(&format!("betas = {}\n", list(&cfg.betas)));
    s.push_str(&format!("seed = {}\n", cfg.seed));
    if let Some(out) = &cfg.out {
        s.push_str(&format!("out = {out}\n"));
    }
    s
}

impl ExperimentConfig {
    pub fn basis(&self) -> BasisConfig {
        BasisConfig {
            length: self.length,
            modes: self.modes,
            colloc: self.colloc,
        }
    }

    pub fn input_op(&self) -> BOperator {
        match self.b_name.as_str() {
            "zero" => BOperator::Zero,
            _ => BOperator::Example,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let mut c = SolverConfig::new(self.n_t);
        c.fp_tol = self.fp_tol;
        c.max_iter = self.max_iter;
        c
    }

    pub fn z_d_vector(&self) -> SpectralVector {
        SpectralVector::from_coeffs(self.z_d.clone())
    }

    /// Problem instance with the measured uniform bound filled in.
    pub fn problem(&self) -> Result<ProblemSpec, ExperimentError> {
        let mut family = FamilyConfig::new(self.q, self.basis());
        let fam = Families::new(family.clone()).map_err(SolverError::from)?;
        let measured = fam
            .measure_cosine_bound(self.horizon)
            .map_err(SolverError::from)?;
        family.bound_m = measured.max(1.0);
        let spec = ProblemSpec {
            family,
            input_op: self.input_op(),
            f: FSlot::from_name(&self.f_name).map_err(SolverError::from)?,
            g: GSlot::from_name(&self.g_name).map_err(SolverError::from)?,
            phi: NonlocalWeights::new(self.phi_times.clone(), self.phi_weights.clone()),
            psi: NonlocalWeights::new(self.psi_times.clone(), self.psi_weights.clone()),
            z0: SpectralVector::from_coeffs(self.z0.clone()),
            z1: SpectralVector::from_coeffs(self.z1.clone()),
            horizon: self.horizon,
            constants: DeclaredConstants {
                c1: self.c1,
                c2: self.c2,
                c3: self.c3,
                d1: self.phi_weights.iter().map(|w| w.abs()).sum(),
                d2: self.psi_weights.iter().map(|w| w.abs()).sum(),
                m_bound: self.m_bound,
            },
        };
        spec.validate().map_err(SolverError::from)?;
        Ok(spec)
    }
}

/// One β-sweep row.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub beta: f64,
    /// ‖z_β(a) − z_d‖.
    pub terminal_error: f64,
    /// ∫₀ᵃ ‖u_β‖² dθ.
    pub control_energy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub lemma2_ok: bool,
}

pub const SWEEP_CSV_HEADER: &str =
    "beta,terminal_error,control_energy,iterations,converged,lemma2_ok";

/// Render sweep records as CSV, rows in input order.
pub fn sweep_to_csv(records: &[SweepRecord]) -> String {
    let mut s = String::from(SWEEP_CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt17(r.beta),
            fmt17(r.terminal_error),
            fmt17(r.control_energy),
            r.iterations,
            r.converged,
            r.lemma2_ok
        ));
    }
    s
}

fn record_from_report(beta: f64, z_d: &SpectralVector, report: &SolveReport) -> SweepRecord {
    SweepRecord {
        beta,
        terminal_error: report.trajectory.terminal().sub(z_d).norm(),
        control_energy: report.control_energy(),
        iterations: report.iterations,
        converged: report.converged,
        lemma2_ok: report.lemma2_ok,
    }
}

/// Run the β-sweep: one shared Grammian and workspace, one solve per β
/// (concurrently up to `jobs` threads), records in input order. Failed or
/// diverged solves become converged=false rows; the sweep itself only
/// errors on setup problems.
pub fn run_beta_sweep(
    cfg: &ExperimentConfig,
    jobs: usize,
) -> Result<Vec<SweepRecord>, ExperimentError> {
    let problem = cfg.problem()?;
    let ws = Workspace::new(&problem, cfg.n_t)?;
    let fam = ws.families();
    let k = grammian(fam, &problem.input_op, cfg.horizon, cfg.grammian_nodes)
        .map_err(SolverError::from)?;
    let z_d = cfg.z_d_vector();
    let solver_cfg = cfg.solver_config();

    let solve_one = |&beta: &f64| -> SweepRecord {
        match solve_fixed_point_with(&ws, &k, beta, &z_d, &solver_cfg) {
            Ok(report) => record_from_report(beta, &z_d, &report),
            Err(_) => SweepRecord {
                beta,
                terminal_error: f64::NAN,
                control_energy: f64::NAN,
                iterations: 0,
                converged: false,
                lemma2_ok: false,
            },
        }
    };

    let records: Vec<SweepRecord> = if jobs == 1 {
        cfg.betas.iter().map(solve_one).collect()
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| ExperimentError::Run(format!("thread pool: {e}")))?;
        pool.install(|| cfg.betas.par_iter().map(solve_one).collect())
    };
    Ok(records)
}

pub const TRAJECTORY_CSV_PREFIX: &str = "theta";

/// Render a solved trajectory as per-node CSV
/// `theta,coef_1..coef_N,unorm`.
pub fn trajectory_to_csv(report: &SolveReport) -> String {
    let n = report.trajectory.modes();
    let mut s = String::from(TRAJECTORY_CSV_PREFIX);
    for i in 1..=n {
        s.push_str(&format!(",coef_{i}"));
    }
    s.push_str(",unorm\n");
    for (k, &theta) in report.trajectory.grid().iter().enumerate() {
        s.push_str(&fmt17(theta));
        for c in &report.trajectory.state(k).coeffs {
            s.push(',');
            s.push_str(&fmt17(*c));
        }
        s.push(',');
        s.push_str(&fmt17(report.control[k].norm()));
        s.push('\n');
    }
    s
}

/// Solve a single β and return the report alongside its trajectory CSV.
pub fn simulate(cfg: &ExperimentConfig, beta: f64) -> Result<(SolveReport, String), ExperimentError> {
    if !(beta > 0.0) {
        return Err(ExperimentError::Invalid {
            field: "beta".into(),
            msg: format!("must be positive, got {beta}"),
        });
    }
    let problem = cfg.problem()?;
    let ws = Workspace::new(&problem, cfg.n_t)?;
    let k = grammian(
        ws.families(),
        &problem.input_op,
        cfg.horizon,
        cfg.grammian_nodes,
    )
    .map_err(SolverError::from)?;
    let report = solve_fixed_point_with(&ws, &k, beta, &cfg.z_d_vector(), &cfg.solver_config())?;
    let csv = trajectory_to_csv(&report);
    Ok((report, csv))
}

/// One hypothesis check: name, verdict, and the measured evidence.
#[derive(Debug, Clone)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!(
                "[{}] {}: {}\n",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        s.push_str(&format!(
            "overall: {}\n",
            if self.all_passed() { "pass" } else { "FAIL" }
        ));
        s
    }
}

/// Empirical checks of every standing hypothesis: the measured cosine bound,
/// sampled Lipschitz constants of f/g/φ/ψ against the declared ones, the
/// uniform bound on f, the contraction margin, Grammian positivity, and the
/// resolvent-decay indicator. Report-only.
pub fn check_hypotheses(cfg: &ExperimentConfig) -> Result<HypothesisReport, ExperimentError> {
    let problem = cfg.problem()?;
    let basis = cfg.basis();
    let ny = basis.colloc;
    let a = cfg.horizon;
    let m = problem.family.bound_m;
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    checks.push(HypothesisCheck {
        name: "H1 compact uniformly bounded cosine family".into(),
        passed: true,
        detail: format!(
            "structural: finite spectral truncation; measured ‖C_q‖ bound M = {m:.9}"
        ),
    });

    // H2(ii): Lipschitz of f in the state slot, then in the Volterra slot.
    let l2dist = |x: &Vec<f64>, y: &Vec<f64>| {
        x.iter()
            .zip(y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let f_slot = problem.f;
    let mut c1_hat = 0.0f64;
    for &theta in &[0.0, 0.25 * a, 0.5 * a, a] {
        for &amp in &[0.01, 1.0] {
            let w = vec![0.0; ny];
            let est = estimate_lipschitz(
                |s: &Vec<f64>| {
                    let mut out = vec![0.0; ny];
                    f_slot.eval(theta, s, &w, &mut out);
                    out
                },
                l2dist,
                || (0..ny).map(|_| rng.random_range(-amp..amp)).collect(),
                200,
            );
            c1_hat = c1_hat.max(est);
        }
    }
    checks.push(HypothesisCheck {
        name: "H2(ii) Lipschitz of f in the state".into(),
        passed: c1_hat <= problem.constants.c1 * 1.05,
        detail: format!("sampled C1 = {c1_hat:.6} vs declared {}", problem.constants.c1),
    });

    let state = vec![0.3; ny];
    let c2_hat = estimate_lipschitz(
        |w: &Vec<f64>| {
            let mut out = vec![0.0; ny];
            f_slot.eval(0.5 * a, &state, w, &mut out);
            out
        },
        l2dist,
        || (0..ny).map(|_| rng.random_range(-1.0..1.0)).collect(),
        200,
    );
    checks.push(HypothesisCheck {
        name: "H2(ii) Lipschitz of f in the Volterra slot".into(),
        passed: c2_hat <= problem.constants.c2 * 1.05,
        detail: format!("sampled C2 = {c2_hat:.6} vs declared {}", problem.constants.c2),
    });

    // H3(ii): Lipschitz of g, maximizing regime near zero amplitude, τ up to a.
    let g_slot = problem.g;
    let mut c3_hat = 0.0f64;
    for &tau in &[0.0, 0.5 * a, a] {
        for &amp in &[0.01, 1.0] {
            let est = estimate_lipschitz(
                |s: &Vec<f64>| {
                    let mut out = vec![0.0; ny];
                    g_slot.eval(0.0, tau, s, &mut out);
                    out
                },
                l2dist,
                || (0..ny).map(|_| rng.random_range(-amp..amp)).collect(),
                200,
            );
            c3_hat = c3_hat.max(est);
        }
    }
    checks.push(HypothesisCheck {
        name: "H3(ii) Lipschitz of g".into(),
        passed: c3_hat <= problem.constants.c3 * 1.05,
        detail: format!("sampled C3 = {c3_hat:.6} vs declared {}", problem.constants.c3),
    });

    // H2(iii)/H6: uniform bound of f, plus an amplitude-growth probe.
    let w_cap = (a.exp() - 1.0) / SQRT_2;
    let bound_probe = |amp: f64, rng: &mut ChaCha8Rng| {
        let mut local = rng.clone();
        check_uniform_bound(
            &f_slot,
            &basis,
            || {
                let theta = local.random_range(0.0..=a);
                let st: Vec<f64> = (0..ny).map(|_| local.random_range(-amp..amp)).collect();
                let w: Vec<f64> = (0..ny).map(|_| local.random_range(0.0..=w_cap)).collect();
                (theta, st, w)
            },
            300,
        )
    };
    let m_small = bound_probe(1.0, &mut rng);
    let m_large = bound_probe(100.0, &mut rng);
    let m_hat = m_small.max(m_large);
    let unbounded = m_large > 2.0 * m_small + 1e-9;
    checks.push(HypothesisCheck {
        name: "H2(iii)/H6 uniform bound of f".into(),
        passed: !unbounded && m_hat <= problem.constants.m_bound * 1.05,
        detail: if unbounded {
            format!(
                "sup grows with amplitude ({m_small:.6} → {m_large:.6}): uniform bound violated"
            )
        } else {
            format!(
                "sampled sup ‖f‖ = {m_hat:.6} vs declared m_bound = {:.6}",
                problem.constants.m_bound
            )
        },
    });

    // H4: Lipschitz of φ and ψ over trajectories in the sup norm.
    let grid: Vec<f64> = (0..=32).map(|k| a * k as f64 / 32.0).collect();
    for (name, weights, declared) in [
        ("H4 Lipschitz of phi", &problem.phi, problem.constants.d1),
        ("H4 Lipschitz of psi", &problem.psi, problem.constants.d2),
    ] {
        let mut rng2 = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37);
        let est = estimate_lipschitz(
            |t: &Trajectory| weights.apply(t).unwrap().coeffs,
            |x: &Trajectory, y: &Trajectory| x.sup_distance(y),
            || {
                // constant trajectories attain the sup-norm constant
                let constant = rng2.random_range(0.0..1.0) < 0.5;
                let base: Vec<f64> =
                    (0..cfg.modes).map(|_| rng2.random_range(-1.0..1.0)).collect();
                let states = (0..grid.len())
                    .map(|k| {
                        if constant || k == 0 {
                            SpectralVector::from_coeffs(base.clone())
                        } else {
                            SpectralVector::from_coeffs(
                                (0..cfg.modes).map(|_| rng2.random_range(-1.0..1.0)).collect(),
                            )
                        }
                    })
                    .collect();
                Trajectory::new(grid.clone(), states).unwrap()
            },
            200,
        );
        checks.push(HypothesisCheck {
            name: name.into(),
            passed: est <= declared * 1.05 + 1e-12,
            detail: format!("sampled Lipschitz = {est:.6} vs declared {declared}"),
        });
    }

    // Contraction condition of the existence theorem, with the measured M.
    let con = check_contraction(m, problem.constants.d1, problem.constants.d2);
    checks.push(HypothesisCheck {
        name: "mild-solution contraction M(d1+d2) < 1".into(),
        passed: con.passed,
        detail: format!(
            "M(d1+d2) = {:.6}, margin = {:.6}",
            m * (problem.constants.d1 + problem.constants.d2),
            con.margin
        ),
    });

    // H5: Grammian positivity and resolvent decay in the strong topology.
    let fam = Families::new(problem.family.clone()).map_err(SolverError::from)?;
    let k = grammian(&fam, &problem.input_op, a, cfg.grammian_nodes)
        .map_err(SolverError::from)?;
    let min_eig = k.min_eigenvalue();
    let betas: Vec<f64> = (0..=5).map(|i| 10f64.powi(-1 - i)).collect();
    let mut decay_ok = true;
    let mut worst_ratio = 0.0f64;
    let mut rng3 = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x51f0);
    for _ in 0..10 {
        let v = SpectralVector::from_coeffs(
            (0..cfg.modes).map(|_| rng3.random_range(-1.0..1.0)).collect(),
        );
        if v.norm() == 0.0 {
            continue;
        }
        let seq = linear_controllability_indicator(&k, &v, &betas)
            .map_err(SolverError::from)?;
        for w in seq.windows(2) {
            if !(w[1] < w[0]) {
                decay_ok = false;
            }
        }
        let ratio = seq[seq.len() - 1] / seq[0].max(1e-300);
        worst_ratio = worst_ratio.max(ratio);
        if ratio > 0.1 {
            decay_ok = false;
        }
    }
    checks.push(HypothesisCheck {
        name: "H5 linear approximate controllability".into(),
        passed: min_eig > 0.0 && decay_ok,
        detail: format!(
            "Grammian min eigenvalue = {min_eig:.6e}; worst βR(β,K) decay ratio = {worst_ratio:.6e}"
        ),
    });

    Ok(HypothesisReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = parse_config("q = 1.5\n").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());

        let cfg = parse_config("# only a comment\n\n").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());

        let cfg = parse_config("N = 3\nzd = 0.2, 0.1\n").unwrap();
        assert_eq!(cfg.modes, 3);
        assert_eq!(cfg.colloc, 7);
        assert_eq!(cfg.z_d, vec![0.2, 0.1, 0.0]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_config("q = 1.5\nbetas = 0.1, 0.2\n").unwrap_err();
        match err {
            ExperimentError::Invalid { field, .. } => assert_eq!(field, "betas"),
            other => panic!("unexpected {other}"),
        }

        let err = parse_config("q = 1.5\nwhat = 3\n").unwrap_err();
        match err {
            ExperimentError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }

        let err = parse_config("q  1.5\n").unwrap_err();
        match err {
            ExperimentError::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected {other}"),
        }

        let err = parse_config("q = abc\n").unwrap_err();
        assert!(matches!(err, ExperimentError::Parse { line: 1, .. }));
    }

    #[test]
    fn config_round_trip() {
        let cfg = ExperimentConfig {
            q: 1.3,
            modes: 4,
            colloc: 11,
            z0: vec![0.5, -0.25, 0.0, 1.0 / 3.0],
            z1: vec![0.0; 4],
            z_d: vec![0.1, 0.0, 0.0, 0.0],
            betas: vec![0.5, 0.05, 0.005],
            seed: 7,
            out: Some("x.csv".into()),
            ..Default::default()
        };
        let text = emit_config(&cfg);
        let back = parse_config(&text).unwrap();
        assert_eq!(cfg, back);
        // and emit is a fixed point
        assert_eq!(text, emit_config(&back));
    }

    #[test]
    fn fmt17_round_trips() {
        for &x in &[0.1, 1.0 / 3.0, PI, 1e-17, 123456.789, -0.0, 5e-324] {
            let s = fmt17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} → {s} → {back}");
        }
    }

    #[test]
    fn default_hypotheses_all_pass() {
        let cfg = ExperimentConfig {
            n_t: 64,
            grammian_nodes: 100,
            ..Default::default()
        };
        let report = check_hypotheses(&cfg).unwrap();
        assert!(report.all_passed(), "\n{}", report.render());
        // contraction margin 0.3 with M = 1 shows up in the detail
        let contraction = report
            .checks
            .iter()
            .find(|c| c.name.contains("contraction"))
            .unwrap();
        assert!(contraction.detail.contains("margin = 0.3"), "{}", contraction.detail);
    }

    #[test]
    fn overloaded_weights_fail_contraction_check() {
        let cfg = ExperimentConfig {
            phi_weights: vec![0.3, 0.3],
            psi_weights: vec![0.3, 0.3],
            n_t: 64,
            grammian_nodes: 100,
            ..Default::default()
        };
        let report = check_hypotheses(&cfg).unwrap();
        assert!(!report.all_passed());
        let c = report
            .checks
            .iter()
            .find(|c| c.name.contains("contraction"))
            .unwrap();
        assert!(!c.passed);
    }

    #[test]
    fn zero_b_fails_linear_controllability() {
        let cfg = ExperimentConfig {
            b_name: "zero".into(),
            n_t: 64,
            grammian_nodes: 100,
            ..Default::default()
        };
        let report = check_hypotheses(&cfg).unwrap();
        let h5 = report
            .checks
            .iter()
            .find(|c| c.name.starts_with("H5"))
            .unwrap();
        assert!(!h5.passed, "{}", h5.detail);
    }

    #[test]
    fn unbounded_f_is_flagged() {
        let cfg = ExperimentConfig {
            f_name: "identity".into(),
            n_t: 64,
            grammian_nodes: 100,
            ..Default::default()
        };
        let report = check_hypotheses(&cfg).unwrap();
        let h6 = report
            .checks
            .iter()
            .find(|c| c.name.contains("uniform bound"))
            .unwrap();
        assert!(!h6.passed, "{}", h6.detail);
    }

    #[test]
    fn sweep_records_and_csv_shape() {
        let cfg = ExperimentConfig {
            n_t: 64,
            grammian_nodes: 100,
            betas: vec![1e-1, 1e-2],
            ..Default::default()
        };
        let records = run_beta_sweep(&cfg, 1).unwrap();
        assert_eq!(records.len(), 2);
        assert!(records.iter().all(|r| r.converged));
        assert!(records[1].terminal_error < records[0].terminal_error);
        let csv = sweep_to_csv(&records);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], SWEEP_CSV_HEADER);
        assert_eq!(lines[1].split(',').count(), 6);
    }

    #[test]
    fn simulate_row_count_and_consistency_with_sweep() {
        let cfg = ExperimentConfig {
            n_t: 64,
            grammian_nodes: 100,
            betas: vec![1e-2],
            ..Default::default()
        };
        let (report, csv) = simulate(&cfg, 1e-2).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), cfg.n_t + 2); // header + n_t+1 rows
        assert_eq!(lines[0].split(',').count(), cfg.modes + 2);

        let records = run_beta_sweep(&cfg, 1).unwrap();
        let terminal = report.trajectory.terminal().sub(&cfg.z_d_vector()).norm();
        assert!((records[0].terminal_error - terminal).abs() <= 1e-14);
    }

    #[test]
    fn zero_data_trajectory_csv_is_zero() {
        let cfg = ExperimentConfig {
            f_name: "zero".into(),
            g_name: "zero".into(),
            phi_times: vec![],
            phi_weights: vec![],
            psi_times: vec![],
            psi_weights: vec![],
            z_d: vec![0.0; 6],
            n_t: 64,
            grammian_nodes: 100,
            ..Default::default()
        };
        let (report, csv) = simulate(&cfg, 1e-2).unwrap();
        assert_eq!(report.trajectory.sup_norm(), 0.0);
        for line in csv.lines().skip(1) {
            for field in line.split(',').skip(1) {
                let v: f64 = field.parse().unwrap();
                assert_eq!(v, 0.0);
            }
        }
    }
}
