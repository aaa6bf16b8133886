#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use stiefel_inj::{expm_skew, haar_rotation, SkewMatrix, TangentAH};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[0, 1]`,
/// from Newton's method on the Legendre three-term recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

/// `∫₀¹ exp((1 − σ)S) E exp(σS) dσ` by 32-node Gauss-Legendre quadrature.
pub fn dexp_quadrature(s: &DMatrix<f64>, e: &DMatrix<f64>) -> DMatrix<f64> {
    let n = s.nrows();
    let mut acc = DMatrix::zeros(n, n);
    for (sigma, w) in gauss_legendre(32) {
        let left = expm_skew(&SkewMatrix::project(&(s * (1.0 - sigma)))).unwrap();
        let right = expm_skew(&SkewMatrix::project(&(s * sigma))).unwrap();
        acc += left.as_matrix() * e * right.as_matrix() * w;
    }
    acc
}

pub fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Random skew matrix with spectral norm exactly `norm`.
pub fn skew_with_norm<R: Rng + ?Sized>(dim: usize, norm: f64, rng: &mut R) -> SkewMatrix {
    let s = SkewMatrix::project(&gaussian(dim, dim, rng));
    let current = s.spectral_norm().unwrap();
    s.scale(norm / current)
}

/// Random tangent vector at a random frame.
pub fn tangent<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> TangentAH {
    let a = SkewMatrix::project(&gaussian(p, p, rng));
    let h = gaussian(n - p, p, rng);
    TangentAH::new(a, h, haar_rotation(n, rng)).unwrap()
}

/// `Q · blockdiag(R(θ₁), …, ±1 …) · Qᵀ` with prescribed plane angles; angles
/// equal to π produce exact -1 eigenvalue pairs.
pub fn rotation_with_angles<R: Rng + ?Sized>(
    dim: usize,
    angles: &[f64],
    rng: &mut R,
) -> DMatrix<f64> {
    assert!(2 * angles.len() <= dim);
    let mut d = DMatrix::<f64>::identity(dim, dim);
    for (k, &a) in angles.iter().enumerate() {
        let (s, c) = a.sin_cos();
        let (i, j) = (2 * k, 2 * k + 1);
        d[(i, i)] = c;
        d[(j, j)] = c;
        d[(i, j)] = -s;
        d[(j, i)] = s;
    }
    let q = haar_rotation(dim, rng);
    q.as_matrix() * d * q.as_matrix().transpose()
}

/// β-norm of an ambient tangent `z` at `x`: `β‖xᵀz‖² + ‖(I − xxᵀ)z‖²`.
pub fn ambient_norm(beta: f64, x: &DMatrix<f64>, z: &DMatrix<f64>) -> f64 {
    let a = x.transpose() * z;
    let normal = z - x * &a;
    (beta * a.norm_squared() + normal.norm_squared()).sqrt()
}
