//! Cyclic Jacobi eigensolver for Hermitian matrices.
//!
//! Skew-symmetric and orthogonal matrices have (nearly) zero or constant
//! diagonals, which defeats the diagonal-relative deflation tests of
//! QR-type Schur solvers. Jacobi sweeps only ever mix off-diagonal entries with
//! each other, so the off-diagonal mass decays to true zero regardless of the
//! diagonal magnitudes.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::tolerance::TOL;

pub(crate) type C64 = Complex<f64>;

const MAX_SWEEPS: usize = 60;

/// Eigen-decomposition `A = Z diag(values) Z^H` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub(crate) struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

fn off_diagonal_norm(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Diagonalizes a Hermitian matrix. Only the upper triangle and the real part
/// of the diagonal are trusted; the input is symmetrized first.
pub(crate) fn hermitian_eigen(a: &DMatrix<C64>) -> Result<HermitianEigen> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());

    let mut a = {
        let mut h = a.clone();
        for i in 0..n {
            h[(i, i)] = C64::new(a[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let v = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
        h
    };
    let mut z = DMatrix::<C64>::identity(n, n);

    let scale = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if n <= 1 || scale == 0.0 {
        return Ok(HermitianEigen {
            values: (0..n).map(|i| a[(i, i)].re).collect(),
            vectors: z,
        });
    }
    let threshold = TOL.jacobi * scale;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                rotate(&mut a, &mut z, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > 1e-13 * scale {
        return Err(Error::NoConvergence);
    }

    Ok(HermitianEigen {
        values: (0..n).map(|i| a[(i, i)].re).collect(),
        vectors: z,
    })
}

/// One two-sided Jacobi rotation annihilating `a[(p, q)]`.
///
/// With `a_pq = r e^{i phi}`, the unitary `J = diag(1, e^{-i phi}) R(c, s)` acts
/// on columns `p, q`, where `R` is the real rotation that diagonalizes
/// `[[a_pp, r], [r, a_qq]]`.
fn rotate(a: &mut DMatrix<C64>, z: &mut DMatrix<C64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 || r < f64::MIN_POSITIVE {
        return;
    }
    let phase = apq / r;
    let phase_conj = phase.conj();

    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.is_finite() {
        let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
        sgn / (theta.abs() + theta.hypot(1.0))
    } else {
        0.0
    };
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;

    // J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
    let j_pp = C64::new(c, 0.0);
    let j_pq = C64::new(s, 0.0);
    let j_qp = phase_conj * (-s);
    let j_qq = phase_conj * c;

    let n = a.nrows();
    // A <- A J
    for k in 0..n {
        let x = a[(k, p)];
        let y = a[(k, q)];
        a[(k, p)] = x * j_pp + y * j_qp;
        a[(k, q)] = x * j_pq + y * j_qq;
    }
    // A <- J^H A
    for k in 0..n {
        let x = a[(p, k)];
        let y = a[(q, k)];
        a[(p, k)] = j_pp.conj() * x + j_qp.conj() * y;
        a[(q, k)] = j_pq.conj() * x + j_qq.conj() * y;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(app - t * r, 0.0);
    a[(q, q)] = C64::new(aqq + t * r, 0.0);

    for k in 0..n {
        let x = z[(k, p)];
        let y = z[(k, q)];
        z[(k, p)] = x * j_pp + y * j_qp;
        z[(k, q)] = x * j_pq + y * j_qq;
    }
}

/// Real symmetric eigen-decomposition through the Hermitian solver.
pub(crate) fn symmetric_eigen(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let ac = a.map(|x| C64::new(x, 0.0));
    let eig = hermitian_eigen(&ac)?;
    Ok((eig.values, eig.vectors.map(|x| x.re)))
}

/// Hermitian decomposition of `i S` for a real skew-symmetric `S`.
///
/// `S z = -i lambda z` for every eigenpair `(lambda, z)`.
pub(crate) fn skew_eigen(s: &DMatrix<f64>) -> Result<HermitianEigen> {
    let h = s.map(|x| C64::new(0.0, x));
    hermitian_eigen(&h)
}

/// Orthonormal basis (columns) of the range of a symmetric projector, picked
/// by pivoted Gram-Schmidt on its columns.
pub(crate) fn projector_basis(proj: &DMatrix<f64>, rank: usize) -> DMatrix<f64> {
    let n = proj.nrows();
    let mut basis = DMatrix::<f64>::zeros(n, rank);
    let mut cols: Vec<nalgebra::DVector<f64>> =
        (0..proj.ncols()).map(|j| proj.column(j).into_owned()).collect();
    for k in 0..rank {
        let (best, _) = cols
            .iter()
            .enumerate()
            .map(|(j, c)| (j, c.norm_squared()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let mut v = cols[best].clone();
        for i in 0..k {
            let b = basis.column(i);
            let d = b.dot(&v);
            v -= b * d;
        }
        let nv = v.norm();
        if nv > 0.0 {
            v /= nv;
        }
        basis.set_column(k, &v);
        for c in cols.iter_mut() {
            let d = v.dot(c);
            *c -= &v * d;
        }
    }
    basis
}
