//! Gamma function and friends in plain f64.
//!
//! Lanczos approximation (g = 7, n = 9, the Godfrey/Boost coefficient set)
//! with reflection for arguments below 1/2. The reciprocal 1/Γ is exposed
//! separately because it is entire: the asymptotic Mittag-Leffler series
//! walks through the poles of Γ at non-positive integers, where 1/Γ is
//! simply zero.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut s = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        s += c / (x + i as f64);
    }
    s
}

/// sin(πx) computed through the nearest integer, exact near the zeros.
pub fn sin_pi(x: f64) -> f64 {
    let m = x.round();
    let r = x - m;
    let s = (PI * r).sin();
    if (m as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

/// Γ(x) for real x, |relative error| ~ 1e-14 away from the poles.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x) Γ(1-x) = π / sin(πx)
        PI / (sin_pi(x) * gamma(1.0 - x))
    } else {
        let z = x - 1.0;
        let t = z + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
    }
}

/// 1/Γ(x), entire; returns 0 at non-positive integers.
pub fn recip_gamma(x: f64) -> f64 {
    if x >= 0.5 {
        1.0 / gamma(x)
    } else {
        // 1/Γ(x) = sin(πx) Γ(1−x) / π
        sin_pi(x) * gamma(1.0 - x) / PI
    }
}

/// ln Γ(x) for x > 0, Stirling beyond 12 and the Lanczos Γ below.
/// Used only for cheap magnitude scans, ~1e-12 relative accuracy.
pub fn ln_gamma_f64(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 12.0 {
        gamma(x).abs().ln()
    } else {
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln()
            + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
    }
}
