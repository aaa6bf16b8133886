//! Conjugate times, geodesic-loop lengths and the resulting upper bounds on the
//! injectivity radius of `St(n, p)` under the β-metric.

mod witness;

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::skewlin::SkewMatrix;

pub use witness::{
    build_witness, verify_witness, witness_residual, witness_residual_canonical,
    witness_residual_fd, ConjugateWitness,
};

const SCAN_STEP: f64 = 1e-3;
const BISECTION_STEPS: usize = 80;

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidBeta(beta))
    }
}

/// `F(β, t) = sin t + ((1 − β)/β) t cos t`. Has the sign of
/// `sin t / t + ((1 − β)/β) cos t` for `t > 0`.
pub fn f_sign(beta: f64, t: f64) -> f64 {
    t.sin() + (1.0 - beta) / beta * t * t.cos()
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest `t > 0` with `sin t / t + ((1 − β)/β) cos t = 0`.
///
/// Scans `F(β, ·)` on `(0, 3π/2]` for the first sign change and bisects. For
/// `β = 1` the root is exactly `π`.
pub fn solve_t_root(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if beta == 1.0 {
        return Ok(PI);
    }
    let end = 3.0 * FRAC_PI_2;
    let f = |t: f64| f_sign(beta, t);
    let mut prev = SCAN_STEP;
    let mut k = 2;
    loop {
        let t = (k as f64 * SCAN_STEP).min(end);
        if f(t) <= 0.0 {
            return Ok(bisect(f, prev, t));
        }
        if t >= end {
            // F(β, 3π/2) = -1 for every β, so the scan always stops above.
            return Err(Error::NoConvergence);
        }
        prev = t;
        k += 1;
    }
}

/// `(β₁, β₂)`: `β₁` is the smallest root of
/// `sin(√β π)/(√β π) + ((1 − β)/β) cos(√β π)`, where `√(2β)π = t^r_β √2`, and
/// `β₂ = (1 − (√2/π) tan(π/√2))⁻¹`, where `t^r_β √2 = π`.
pub fn beta_thresholds() -> (f64, f64) {
    static CACHE: OnceLock<(f64, f64)> = OnceLock::new();
    *CACHE.get_or_init(|| {
        let g = |b: f64| f_sign(b, b.sqrt() * PI);
        let mut prev = SCAN_STEP;
        let mut k = 2;
        let beta1 = loop {
            let b = k as f64 * SCAN_STEP;
            if g(b) <= 0.0 {
                break bisect(g, prev, b);
            }
            prev = b;
            k += 1;
        };
        let beta2 = 1.0 / (1.0 - SQRT_2 / PI * (PI / SQRT_2).tan());
        (beta1, beta2)
    })
}

/// Which term of `min{√(2β)π, π, t^r_β √2}` is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    LoopLimited,
    ConjugateLimited,
    PiLimited,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::LoopLimited => "LoopLimited",
            Regime::ConjugateLimited => "ConjugateLimited",
            Regime::PiLimited => "PiLimited",
        }
    }
}

/// Upper bound on the injectivity radius with its ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub beta: f64,
    pub n: usize,
    pub p: usize,
    pub t_root: f64,
    /// Upper bound on the length of the shortest geodesic loop.
    pub loop_bound: f64,
    /// `min{t^r_β, π} √2`; only defined when `2 ≤ p ≤ n − 2`.
    pub conj_bound: Option<f64>,
    pub inj_upper: f64,
    pub regime: Regime,
}

fn check_np(n: usize, p: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidDims {
            n,
            p,
            reason: "n must be at least 2",
        });
    }
    if p == 0 || p > n {
        return Err(Error::InvalidDims {
            n,
            p,
            reason: "p must satisfy 1 <= p <= n",
        });
    }
    Ok(())
}

/// Length of the shortest known geodesic loop: exact for `p = 1`, `p = n` and
/// `β = 1/2`, an upper bound otherwise.
pub fn loop_length_bound(beta: f64, n: usize, p: usize) -> Result<f64> {
    check_beta(beta)?;
    check_np(n, p)?;
    let two_pi = 2.0 * PI;
    Ok(if p == 1 || beta == 0.5 {
        two_pi
    } else if p == n {
        (2.0 * beta).sqrt() * two_pi
    } else {
        (2.0 * beta).sqrt().min(1.0) * two_pi
    })
}

/// Upper bound `î_β` on the injectivity radius of `St_β(n, p)`.
pub fn inj_upper_bound(beta: f64, n: usize, p: usize) -> Result<BoundReport> {
    check_beta(beta)?;
    check_np(n, p)?;
    let t_root = solve_t_root(beta)?;
    let loop_bound = loop_length_bound(beta, n, p)?;
    let half_loop = 0.5 * loop_bound;
    let sqrt_2b = (2.0 * beta).sqrt();

    let (conj_bound, inj_upper, regime) = if p == 1 {
        (None, PI, Regime::PiLimited)
    } else if p == n {
        (None, sqrt_2b * PI, Regime::LoopLimited)
    } else if p == n - 1 {
        let regime = if sqrt_2b < 1.0 && beta != 0.5 {
            Regime::LoopLimited
        } else {
            Regime::PiLimited
        };
        (None, half_loop, regime)
    } else {
        let conj = t_root.min(PI) * SQRT_2;
        let (b1, b2) = beta_thresholds();
        let regime = if beta <= b1 {
            Regime::LoopLimited
        } else if beta <= b2 {
            Regime::ConjugateLimited
        } else {
            Regime::PiLimited
        };
        (Some(conj), half_loop.min(conj), regime)
    };

    Ok(BoundReport {
        beta,
        n,
        p,
        t_root,
        loop_bound,
        conj_bound,
        inj_upper,
        regime,
    })
}

/// Selects one of the closed forms for the first `m` columns of the
/// derivative of `exp(tΩ) I exp(−tΨ)` in the preparatory lemmas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaKind {
    /// Canonical: `Ω̆ = [[−wD, D], [D, 0]]`.
    L41,
    /// Noncanonical: as `L41` with `Ψ̆ = αwD`.
    L42,
    /// Euclidean: `Ω̆ = [[D, 0], [0, 0]]`, `Ψ̆ = D/2`.
    L43,
}

/// Top and bottom `m×m` blocks of the lemma closed forms.
pub fn lemma_blocks(
    kind: LemmaKind,
    t: f64,
    w: f64,
    alpha: f64,
    d: &SkewMatrix,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if t == 0.0 {
        return Err(Error::ZeroTime);
    }
    let (s, c) = t.sin_cos();
    let dm = d.as_matrix();
    let (top, bottom) = match kind {
        LemmaKind::L41 => (-0.5 * w * (s / t + c), 0.5 * (-w + 2.0 / t) * s),
        LemmaKind::L42 => (
            -0.5 * w * (s / t + c + 2.0 * alpha * c),
            0.5 * (-w + 2.0 / t - 2.0 * alpha * w) * s,
        ),
        LemmaKind::L43 => (s / (2.0 * t), 0.0),
    };
    Ok((dm * top, dm * bottom))
}
