//! Structured kernels on skew-symmetric matrices and rotations: exponential,
//! principal logarithm, Fréchet derivative of the exponential, and Haar
//! sampling on `SO(n)`.

mod eigen;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tolerance::TOL;

pub(crate) use eigen::{projector_basis, skew_eigen, symmetric_eigen, C64};

/// Real square matrix with `S = -S^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix(DMatrix<f64>);

impl SkewMatrix {
    /// Validates skew-symmetry within [`TOL.skew`](crate::Tolerances::skew) and
    /// stores the exact projection `(S - S^T) / 2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let defect = (&m + m.transpose()).amax();
        if !(defect <= TOL.skew) {
            return Err(Error::NotSkew { defect });
        }
        Ok(Self::project(&m))
    }

    /// Skew part `(M - M^T) / 2` of an arbitrary square matrix.
    pub fn project(m: &DMatrix<f64>) -> Self {
        Self((m - m.transpose()) * 0.5)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    /// Builds `S` from its strict upper triangle, read row by row.
    pub fn from_upper(dim: usize, upper: &[f64]) -> Result<Self> {
        let expected = dim * dim.saturating_sub(1) / 2;
        if upper.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{} upper-triangle entries for dim {dim}, expected {expected}",
                upper.len()
            )));
        }
        let mut m = DMatrix::zeros(dim, dim);
        let mut k = 0;
        for i in 0..dim {
            for j in (i + 1)..dim {
                m[(i, j)] = upper[k];
                m[(j, i)] = -upper[k];
                k += 1;
            }
        }
        Ok(Self(m))
    }

    /// The elementary generator `E_21 - E_12` padded to `dim`.
    pub fn generator(dim: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(j, i)] = 1.0;
        m[(i, j)] = -1.0;
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn scale(&self, a: f64) -> Self {
        Self(&self.0 * a)
    }

    pub fn add(&self, other: &SkewMatrix) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "skew add {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(Self(&self.0 + &other.0))
    }

    pub fn norm_fro(&self) -> f64 {
        self.0.norm()
    }

    /// Nonnegative rotation angles of the real canonical form, largest first.
    /// The spectral norm of `S` is the first entry.
    pub fn angles(&self) -> Result<Vec<f64>> {
        let eig = skew_eigen(&self.0)?;
        let mut pos: Vec<f64> = eig.values.into_iter().filter(|v| *v >= 0.0).collect();
        pos.sort_by(|a, b| b.total_cmp(a));
        pos.truncate(self.dim() / 2);
        Ok(pos)
    }

    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(self.angles()?.first().copied().unwrap_or(0.0))
    }
}

/// Special orthogonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation(DMatrix<f64>);

impl Rotation {
    /// Validates `||Q^T Q - I||_F <= 1e-12` and `det Q > 0`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let n = m.nrows();
        let defect = (m.transpose() * &m - DMatrix::<f64>::identity(n, n)).norm();
        let det = if n == 0 { 1.0 } else { m.determinant() };
        if !(defect <= TOL.orthogonality) || !(det > 0.0) {
            return Err(Error::NotSpecialOrthogonal { defect, det });
        }
        Ok(Self(m))
    }

    pub(crate) fn new_unchecked(m: DMatrix<f64>) -> Self {
        debug_assert!(m.is_square());
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// `blockdiag(a, b)`.
    pub fn block_diag(a: &Rotation, b: &Rotation) -> Self {
        let (n1, n2) = (a.dim(), b.dim());
        let mut m = DMatrix::zeros(n1 + n2, n1 + n2);
        m.view_mut((0, 0), (n1, n1)).copy_from(&a.0);
        m.view_mut((n1, n1), (n2, n2)).copy_from(&b.0);
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Group product `self * other`.
    pub fn compose(&self, other: &Rotation) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "rotation product {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(Self(&self.0 * &other.0))
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.dim();
        (self.0.transpose() * &self.0 - DMatrix::<f64>::identity(n, n)).norm()
    }
}

/// Value and directional derivative of the matrix exponential.
#[derive(Debug, Clone, PartialEq)]
pub struct FrechetResult {
    pub value: DMatrix<f64>,
    pub derivative: DMatrix<f64>,
}

/// How `logm_so` treats eigenvalues at -1, where the minimizer is not unique.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogPolicy {
    /// Pair the -1 eigenvectors in canonical-form order and give each pair angle +π.
    #[default]
    Canonical,
    /// Fail with `NegativeEigenvalueAmbiguity` when an eigenvalue is within
    /// `TOL.minus_one_strict` of -1.
    Strict,
}

/// `exp(S)` for skew `S`, through the spectral decomposition of the Hermitian
/// matrix `iS`: `exp(S) = Z diag(e^{-i lambda}) Z^H`.
pub fn expm_skew(s: &SkewMatrix) -> Result<Rotation> {
    let n = s.dim();
    if n == 0 || s.0.iter().all(|&x| x == 0.0) {
        return Ok(Rotation::identity(n));
    }
    let eig = skew_eigen(&s.0)?;
    let z = &eig.vectors;
    let mut scaled = z.clone();
    for (j, &lam) in eig.values.iter().enumerate() {
        let f = C64::new(lam.cos(), -lam.sin());
        for i in 0..n {
            scaled[(i, j)] *= f;
        }
    }
    let e = scaled * z.adjoint();
    Ok(Rotation::new_unchecked(e.map(|x| x.re)))
}

/// Stable `theta / sin(theta)` from `c = cos(theta)`, `theta` in `[0, pi)`.
fn angle_over_sine(c: f64) -> f64 {
    let c = c.clamp(-1.0, 1.0);
    if c >= 0.0 {
        let u = 1.0 - c;
        if u == 0.0 {
            return 1.0;
        }
        let theta = 2.0 * (0.5 * u).sqrt().asin();
        theta / (u * (2.0 - u)).sqrt()
    } else {
        let w = 1.0 + c;
        let theta = std::f64::consts::PI - 2.0 * (0.5 * w).sqrt().asin();
        theta / (w * (2.0 - w)).sqrt()
    }
}

/// Principal skew logarithm of a rotation.
///
/// Writing `C = (Q + Q^T)/2` and `K = (Q - Q^T)/2`, the two commute and on each
/// rotation plane of angle `theta` they act as `cos(theta) I` and
/// `sin(theta) J`, so `log Q = g(C) K` with `g(cos t) = t / sin t`. That
/// formula breaks down near angle π, so the eigenspace of `C` close to -1 is
/// split off and handled plane by plane, with exact -1 eigenvalues paired.
pub fn logm_so(q: &Rotation, policy: LogPolicy) -> Result<SkewMatrix> {
    let n = q.dim();
    if n <= 1 {
        return Ok(SkewMatrix::zeros(n));
    }
    let qm = &q.0;
    let c = (qm + qm.transpose()) * 0.5;
    let k = (qm - qm.transpose()) * 0.5;

    let (cvals, cvecs) = symmetric_eigen(&c)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cvals[a].total_cmp(&cvals[b]));

    // Eigenvalues of C at or below -1 + NEAR_GAP go to the near-pi block; the
    // block boundary is pushed past clusters so no rotation plane is split.
    const NEAR_GAP: f64 = 1e-2;
    const CLUSTER: f64 = 1e-8;
    let mut near = 0;
    while near < n && cvals[order[near]] <= -1.0 + NEAR_GAP {
        near += 1;
    }
    while near > 0 && near < n && cvals[order[near]] - cvals[order[near - 1]] <= CLUSTER {
        near += 1;
    }

    let mut log = DMatrix::<f64>::zeros(n, n);

    if near < n {
        let mut g = DMatrix::<f64>::zeros(n, n);
        for &j in &order[near..] {
            let v = cvecs.column(j);
            g += (v * v.transpose()) * angle_over_sine(cvals[j]);
        }
        log += g * &k;
    }

    if near > 0 {
        if near % 2 == 1 {
            return Err(Error::NotSpecialOrthogonal {
                defect: q.orthogonality_defect(),
                det: qm.determinant(),
            });
        }
        let mut w = DMatrix::<f64>::zeros(n, near);
        for (col, &j) in order[..near].iter().enumerate() {
            w.set_column(col, &cvecs.column(j));
        }
        let qw = w.transpose() * qm * &w;
        let lw = log_near_pi(&qw, policy)?;
        log += &w * lw * w.transpose();
    }

    Ok(SkewMatrix::project(&log))
}

/// Logarithm of a rotation whose eigenvalues all have angle close to π.
fn log_near_pi(qw: &DMatrix<f64>, policy: LogPolicy) -> Result<DMatrix<f64>> {
    let k = qw.nrows();
    let kw = (qw - qw.transpose()) * 0.5;
    // Eigenvalues of i K_W are -sin(angle) = sin(delta) with delta = pi - |angle|
    // small, so distinct planes stay separated.
    let eig = skew_eigen(&kw)?;

    let merge = TOL.minus_one_merge;
    let mut planes: Vec<(DVector<f64>, DVector<f64>)> = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| eig.values[b].total_cmp(&eig.values[a]));

    let mut min_distance = f64::INFINITY;
    for &j in &idx {
        let lam = eig.values[j];
        if lam <= merge || planes.len() * 2 + 2 > k {
            continue;
        }
        let z = eig.vectors.column(j);
        let mut x = DVector::from_iterator(k, z.iter().map(|c| c.re));
        let mut y = DVector::from_iterator(k, z.iter().map(|c| c.im));
        for (a, b) in &planes {
            x -= a * a.dot(&x) + b * b.dot(&x);
            y -= a * a.dot(&y) + b * b.dot(&y);
        }
        let nx = x.norm();
        if nx == 0.0 {
            continue;
        }
        x /= nx;
        y -= &x * x.dot(&y);
        let ny = y.norm();
        if ny == 0.0 {
            continue;
        }
        y /= ny;
        planes.push((x, y));
    }

    let mut out = DMatrix::<f64>::zeros(k, k);
    let mut used = DMatrix::<f64>::zeros(k, k);
    for (x, y) in &planes {
        // Angle of Q_W in the oriented plane (x, y).
        let qx = qw * x;
        let qy = qw * y;
        let cos = 0.5 * (x.dot(&qx) + y.dot(&qy));
        let sin = 0.5 * (y.dot(&qx) - x.dot(&qy));
        let angle = sin.atan2(cos);
        let distance = (cos + 1.0).hypot(sin);
        min_distance = min_distance.min(distance);
        let angle = if distance <= merge {
            std::f64::consts::PI
        } else {
            angle
        };
        out += (y * x.transpose() - x * y.transpose()) * angle;
        used += x * x.transpose() + y * y.transpose();
    }

    let rest = k - 2 * planes.len();
    if rest > 0 {
        min_distance = 0.0;
        let proj = DMatrix::<f64>::identity(k, k) - used;
        let basis = projector_basis(&proj, rest);
        for pair in 0..rest / 2 {
            let a = basis.column(2 * pair);
            let b = basis.column(2 * pair + 1);
            out += (b * a.transpose() - a * b.transpose()) * std::f64::consts::PI;
        }
    }

    if policy == LogPolicy::Strict && min_distance <= TOL.minus_one_strict {
        return Err(Error::NegativeEigenvalueAmbiguity {
            distance: min_distance,
        });
    }
    Ok(out)
}

/// Fréchet derivative of the exponential at `S` along `E`, read off the
/// top-right block of `exp([[S, E], [0, S]])`.
pub fn dexpm(s: &SkewMatrix, e: &SkewMatrix) -> Result<FrechetResult> {
    dexpm_general(s.as_matrix(), e.as_matrix())
}

pub(crate) fn dexpm_general(s: &DMatrix<f64>, e: &DMatrix<f64>) -> Result<FrechetResult> {
    let n = s.nrows();
    if !s.is_square() || e.shape() != s.shape() {
        return Err(Error::DimensionMismatch(format!(
            "dexpm base {:?} vs direction {:?}",
            s.shape(),
            e.shape()
        )));
    }
    if n == 0 {
        return Ok(FrechetResult {
            value: DMatrix::zeros(0, 0),
            derivative: DMatrix::zeros(0, 0),
        });
    }
    let mut big = DMatrix::<f64>::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(s);
    big.view_mut((n, n), (n, n)).copy_from(s);
    big.view_mut((0, n), (n, n)).copy_from(e);
    let ex = big.exp();
    Ok(FrechetResult {
        value: ex.view((0, 0), (n, n)).into_owned(),
        derivative: ex.view((0, n), (n, n)).into_owned(),
    })
}

/// Haar-distributed element of `SO(dim)`: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`, then one column negated if the
/// determinant is negative.
pub fn haar_rotation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Rotation {
    if dim == 0 {
        return Rotation::identity(0);
    }
    let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    Rotation::new_unchecked(q)
}
