//! Truncated Dirichlet sine basis of the state space Z = L²(0, L).
//!
//! e_n(y) = √(2/L) sin(nπy/L),  μ_n = (nπ/L)²,  n = 1..N
//!
//! The generator acts mode-wise as multiplication by −μ_n, so states live as
//! coefficient vectors against {e_n}. Pointwise nonlinearities are handled
//! pseudo-spectrally: synthesize to the uniform interior collocation grid
//! y_m = mL/(Ny+1), apply the map, project back by composite-trapezoid
//! quadrature. With Ny ≥ 2N+1 the discrete sine orthogonality makes the
//! round trip exact on the truncated span (up to f64 roundoff).
//!
//! Two readings of the spectrum coexist in the source material (eigenvalues
//! −n²π² against eigenvectors normalized on [0, π]); parameterizing by L
//! makes both reachable: L = π gives μ_n = n², L = 1 gives μ_n = n²π².

use std::f64::consts::PI;

#[derive(Debug, Clone, thiserror::Error)]
pub enum SpectralError {
    #[error("invalid basis configuration: {0}")]
    InvalidConfig(String),
    #[error("mode index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Geometry and truncation of the sine basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisConfig {
    /// Interval length L > 0; default π.
    pub length: f64,
    /// Number of retained modes N ≥ 1.
    pub modes: usize,
    /// Interior collocation points Ny ≥ 2N+1.
    pub colloc: usize,
}

impl BasisConfig {
    pub fn new(length: f64, modes: usize) -> Self {
        BasisConfig {
            length,
            modes,
            colloc: 2 * modes + 1,
        }
    }

    pub fn validate(&self) -> Result<(), SpectralError> {
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(SpectralError::InvalidConfig(format!(
                "length must be positive, got {}",
                self.length
            )));
        }
        if self.modes == 0 {
            return Err(SpectralError::InvalidConfig("modes must be ≥ 1".into()));
        }
        if self.colloc < 2 * self.modes + 1 {
            return Err(SpectralError::InvalidConfig(format!(
                "colloc must be ≥ 2N+1 = {}, got {}",
                2 * self.modes + 1,
                self.colloc
            )));
        }
        Ok(())
    }

    /// Quadrature weight of the interior trapezoid rule, L/(Ny+1).
    pub fn quad_weight(&self) -> f64 {
        self.length / (self.colloc + 1) as f64
    }
}

impl Default for BasisConfig {
    fn default() -> Self {
        BasisConfig::new(PI, 6)
    }
}

/// State as coefficients against the orthonormal {e_n}.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVector {
    pub coeffs: Vec<f64>,
}

impl SpectralVector {
    pub fn zeros(n: usize) -> Self {
        SpectralVector { coeffs: vec![0.0; n] }
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        SpectralVector { coeffs }
    }

    /// Unit coefficient on mode n (1-based) in an N-dimensional truncation.
    pub fn unit(n_modes: usize, n: usize) -> Self {
        let mut v = SpectralVector::zeros(n_modes);
        v.coeffs[n - 1] = 1.0;
        v
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Parseval norm on the truncated space: (Σ c_n²)^{1/2}.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SpectralVector) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn scale(&self, s: f64) -> SpectralVector {
        SpectralVector {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &SpectralVector) -> SpectralVector {
        SpectralVector {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &SpectralVector) -> SpectralVector {
        SpectralVector {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// self += s · other
    pub fn axpy(&mut self, s: f64, other: &SpectralVector) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

/// μ_n = (nπ/L)², the Dirichlet eigenvalue of −∂²_y; the generator acts as
/// multiplication by −μ_n on mode n.
pub fn eigenvalue(cfg: &BasisConfig, n: usize) -> Result<f64, SpectralError> {
    if n < 1 || n > cfg.modes {
        return Err(SpectralError::IndexOutOfRange(format!(
            "mode {n} outside 1..={}",
            cfg.modes
        )));
    }
    let k = n as f64 * PI / cfg.length;
    Ok(k * k)
}

/// e_n(y) = √(2/L) sin(nπy/L).
pub fn eigenfunction_at(cfg: &BasisConfig, n: usize, y: f64) -> Result<f64, SpectralError> {
    if n < 1 || n > cfg.modes {
        return Err(SpectralError::IndexOutOfRange(format!(
            "mode {n} outside 1..={}",
            cfg.modes
        )));
    }
    if !(0.0..=cfg.length).contains(&y) {
        return Err(SpectralError::Domain(format!(
            "y = {y} outside [0, {}]",
            cfg.length
        )));
    }
    Ok((2.0 / cfg.length).sqrt() * (n as f64 * PI * y / cfg.length).sin())
}

/// The uniform interior collocation grid y_m = mL/(Ny+1), m = 1..Ny.
pub fn collocation_grid(cfg: &BasisConfig) -> Vec<f64> {
    let h = cfg.length / (cfg.colloc + 1) as f64;
    (1..=cfg.colloc).map(|m| m as f64 * h).collect()
}

/// Coefficients → samples on the collocation grid.
pub fn synthesize(
    cfg: &BasisConfig,
    v: &SpectralVector,
    grid: &[f64],
) -> Result<Vec<f64>, SpectralError> {
    if v.len() != cfg.modes {
        return Err(SpectralError::Shape(format!(
            "coefficient length {} ≠ modes {}",
            v.len(),
            cfg.modes
        )));
    }
    if grid.len() != cfg.colloc {
        return Err(SpectralError::Shape(format!(
            "grid length {} ≠ colloc {}",
            grid.len(),
            cfg.colloc
        )));
    }
    let scale = (2.0 / cfg.length).sqrt();
    let mut out = vec![0.0; grid.len()];
    for (out_m, &y) in out.iter_mut().zip(grid) {
        let mut s = 0.0;
        for (i, c) in v.coeffs.iter().enumerate() {
            s += c * ((i + 1) as f64 * PI * y / cfg.length).sin();
        }
        *out_m = scale * s;
    }
    Ok(out)
}

/// Samples on the collocation grid → coefficients, by composite-trapezoid
/// projection (endpoints vanish under Dirichlet conditions).
pub fn analyze(cfg: &BasisConfig, samples: &[f64]) -> Result<SpectralVector, SpectralError> {
    if samples.len() != cfg.colloc {
        return Err(SpectralError::Shape(format!(
            "sample length {} ≠ colloc {}",
            samples.len(),
            cfg.colloc
        )));
    }
    let h = cfg.quad_weight();
    let scale = (2.0 / cfg.length).sqrt();
    let grid = collocation_grid(cfg);
    let mut coeffs = vec![0.0; cfg.modes];
    for (i, c) in coeffs.iter_mut().enumerate() {
        let mut s = 0.0;
        for (&f, &y) in samples.iter().zip(&grid) {
            s += f * ((i + 1) as f64 * PI * y / cfg.length).sin();
        }
        *c = h * scale * s;
    }
    Ok(SpectralVector::from_coeffs(coeffs))
}

/// L²(0, L) inner product of two sample arrays under the grid quadrature.
pub fn grid_inner(cfg: &BasisConfig, a: &[f64], b: &[f64]) -> f64 {
    cfg.quad_weight() * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

/// Grid-quadrature L² norm of a sample array.
pub fn grid_norm(cfg: &BasisConfig, samples: &[f64]) -> f64 {
    grid_inner(cfg, samples, samples).sqrt()
}
