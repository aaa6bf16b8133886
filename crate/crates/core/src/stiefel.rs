//! Stiefel manifold `St(n, p)` under the β-family of metrics
//! `g(ξ, ξ) = β‖A‖² + ‖H‖²`.
//!
//! Points are represented as `X = Q I_{n×p}` for a frame `Q ∈ SO(n)`, tangent
//! vectors as `ξ = Q [A; H]`. For `β ≠ 1/2` the total space is `SO(n) × SO(p)`
//! with projection `φ(Q, V) = Q I_{n×p} Vᵀ`; for `β = 1/2` it is `SO(n)` alone
//! and `φ(Q) = Q I_{n×p}`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::skewlin::{expm_skew, haar_rotation, logm_so, LogPolicy, Rotation, SkewMatrix};
use crate::tolerance::TOL;

/// Metric parameter `β > 0` and the derived `α = 1/(2β) − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaParam {
    beta: f64,
    alpha: f64,
}

impl BetaParam {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidBeta(beta));
        }
        Ok(Self {
            beta,
            alpha: 0.5 / beta - 1.0,
        })
    }

    pub fn canonical() -> Self {
        Self {
            beta: 0.5,
            alpha: 0.0,
        }
    }

    pub fn euclidean() -> Self {
        Self {
            beta: 1.0,
            alpha: -0.5,
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `β = 1/2` exactly; selects the `SO(n)` total space.
    pub fn is_canonical(&self) -> bool {
        self.beta == 0.5
    }

    pub fn is_euclidean(&self) -> bool {
        self.beta == 1.0
    }

    /// For `β ≤ 1/2` the total-space metric is Riemannian; above it is only
    /// pseudo-Riemannian.
    pub fn total_space_riemannian(&self) -> bool {
        self.beta <= 0.5
    }
}

fn check_dims(n: usize, p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::InvalidDims {
            n,
            p,
            reason: "p must be at least 1",
        });
    }
    if p > n {
        return Err(Error::InvalidDims {
            n,
            p,
            reason: "p must not exceed n",
        });
    }
    Ok(())
}

/// `I_{n×p}`: the first `p` columns of the identity.
pub fn identity_frame(n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::identity(n, p)
}

/// Point on `St(n, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelPoint(DMatrix<f64>);

impl StiefelPoint {
    pub fn new(x: DMatrix<f64>) -> Result<Self> {
        check_dims(x.nrows(), x.ncols())?;
        let p = x.ncols();
        let defect = (x.transpose() * &x - DMatrix::<f64>::identity(p, p)).norm();
        if !(defect <= TOL.stiefel) {
            return Err(Error::NotStiefel { defect });
        }
        Ok(Self(x))
    }

    pub fn base(n: usize, p: usize) -> Result<Self> {
        check_dims(n, p)?;
        Ok(Self(identity_frame(n, p)))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn p(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn distance_fro(&self, other: &StiefelPoint) -> f64 {
        (&self.0 - &other.0).norm()
    }
}

/// Tangent vector `ξ = Q [A; H]` at `X = Q I_{n×p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentAH {
    a: SkewMatrix,
    h: DMatrix<f64>,
    frame: Rotation,
}

impl TangentAH {
    pub fn new(a: SkewMatrix, h: DMatrix<f64>, frame: Rotation) -> Result<Self> {
        let p = a.dim();
        let n = frame.dim();
        check_dims(n, p)?;
        if h.nrows() != n - p || h.ncols() != p {
            return Err(Error::DimensionMismatch(format!(
                "H is {}x{}, expected {}x{}",
                h.nrows(),
                h.ncols(),
                n - p,
                p
            )));
        }
        let u = Self { a, h, frame };
        let x = u.frame.as_matrix().columns(0, p);
        let xi = u.ambient();
        let s = x.transpose() * &xi;
        let defect = (&s + s.transpose()).norm();
        if !(defect <= TOL.tangent) {
            return Err(Error::NotTangent { defect });
        }
        Ok(u)
    }

    /// Tangent vector at `I_{n×p}`.
    pub fn at_base(a: SkewMatrix, h: DMatrix<f64>) -> Result<Self> {
        let n = a.dim() + h.nrows();
        Self::new(a, h, Rotation::identity(n))
    }

    pub fn zero(n: usize, p: usize) -> Result<Self> {
        check_dims(n, p)?;
        Ok(Self {
            a: SkewMatrix::zeros(p),
            h: DMatrix::zeros(n - p, p),
            frame: Rotation::identity(n),
        })
    }

    pub fn n(&self) -> usize {
        self.frame.dim()
    }

    pub fn p(&self) -> usize {
        self.a.dim()
    }

    pub fn a(&self) -> &SkewMatrix {
        &self.a
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn frame(&self) -> &Rotation {
        &self.frame
    }

    /// `X = Q I_{n×p}`.
    pub fn base_point(&self) -> StiefelPoint {
        StiefelPoint(self.frame.as_matrix().columns(0, self.p()).into_owned())
    }

    /// Ambient `n×p` representative `Q [A; H]`.
    pub fn ambient(&self) -> DMatrix<f64> {
        let (n, p) = (self.n(), self.p());
        let mut stacked = DMatrix::zeros(n, p);
        stacked.view_mut((0, 0), (p, p)).copy_from(self.a.as_matrix());
        stacked.view_mut((p, 0), (n - p, p)).copy_from(&self.h);
        self.frame.as_matrix() * stacked
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            a: self.a.scale(s),
            h: &self.h * s,
            frame: self.frame.clone(),
        }
    }

    pub fn norm(&self, mp: &BetaParam) -> f64 {
        (mp.beta * self.a.as_matrix().norm_squared() + self.h.norm_squared()).sqrt()
    }

    /// Rescales to unit β-norm.
    pub fn normalized(&self, mp: &BetaParam) -> Result<Self> {
        let nrm = self.norm(mp);
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::ZeroTangent);
        }
        Ok(self.scale(1.0 / nrm))
    }
}

/// Pair `(Ω, Ψ)` in the Lie algebra of the total space. `psi` is `None` in
/// canonical mode. Also used for arbitrary total-space tangent vectors such as
/// componentwise logarithms, which need not be horizontal.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalLift {
    pub omega: SkewMatrix,
    pub psi: Option<SkewMatrix>,
    pub p: usize,
}

impl HorizontalLift {
    pub fn n(&self) -> usize {
        self.omega.dim()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            omega: self.omega.scale(s),
            psi: self.psi.as_ref().map(|m| m.scale(s)),
            p: self.p,
        }
    }

    /// Group exponential `(exp Ω, exp Ψ)` at the identity.
    pub fn exp(&self) -> Result<TotalSpaceElement> {
        Ok(TotalSpaceElement {
            q: expm_skew(&self.omega)?,
            v: match &self.psi {
                Some(psi) => Some(expm_skew(psi)?),
                None => None,
            },
            p: self.p,
        })
    }
}

/// Group element `(Q, V)`; `v` is `None` in canonical mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalSpaceElement {
    pub q: Rotation,
    pub v: Option<Rotation>,
    pub p: usize,
}

impl TotalSpaceElement {
    pub fn identity(mp: &BetaParam, n: usize, p: usize) -> Self {
        Self {
            q: Rotation::identity(n),
            v: (!mp.is_canonical()).then(|| Rotation::identity(p)),
            p,
        }
    }

    /// Componentwise principal logarithm.
    pub fn log(&self, policy: LogPolicy) -> Result<HorizontalLift> {
        Ok(HorizontalLift {
            omega: logm_so(&self.q, policy)?,
            psi: match &self.v {
                Some(v) => Some(logm_so(v, policy)?),
                None => None,
            },
            p: self.p,
        })
    }
}

/// `g(u, v) = β tr(A_uᵀ A_v) + tr(H_uᵀ H_v)`.
pub fn metric_inner(mp: &BetaParam, u: &TangentAH, v: &TangentAH) -> Result<f64> {
    if u.n() != v.n() || u.p() != v.p() {
        return Err(Error::DimensionMismatch(format!(
            "tangent vectors on St({}, {}) and St({}, {})",
            u.n(),
            u.p(),
            v.n(),
            v.p()
        )));
    }
    if (u.frame.as_matrix() - v.frame.as_matrix()).amax() > TOL.orthogonality {
        return Err(Error::DimensionMismatch(
            "tangent vectors at different frames".into(),
        ));
    }
    Ok(mp.beta * u.a.as_matrix().dot(v.a.as_matrix()) + u.h.dot(&v.h))
}

/// Total-space pairing `½ tr(Ω_uᵀ Ω_v) + 1/(2α) tr(Ψ_uᵀ Ψ_v)`. In canonical
/// mode only the first term is present.
pub fn total_space_inner(mp: &BetaParam, u: &HorizontalLift, v: &HorizontalLift) -> Result<f64> {
    if u.n() != v.n() || u.p != v.p {
        return Err(Error::DimensionMismatch("total-space vectors differ in shape".into()));
    }
    let mut acc = 0.5 * u.omega.as_matrix().dot(v.omega.as_matrix());
    if let (Some(a), Some(b)) = (&u.psi, &v.psi) {
        if mp.alpha != 0.0 {
            acc += 0.5 / mp.alpha * a.as_matrix().dot(b.as_matrix());
        }
    }
    Ok(acc)
}

/// `Ω = [[2βA, −Hᵀ], [H, 0]]`, `Ψ = −(1 − 2β) A`; canonical `Ω = [[A, −Hᵀ], [H, 0]]`.
pub fn horizontal_lift(mp: &BetaParam, u: &TangentAH) -> HorizontalLift {
    let (n, p) = (u.n(), u.p());
    let a_scale = if mp.is_canonical() { 1.0 } else { 2.0 * mp.beta };
    let mut om = DMatrix::zeros(n, n);
    om.view_mut((0, 0), (p, p))
        .copy_from(&(u.a.as_matrix() * a_scale));
    om.view_mut((p, 0), (n - p, p)).copy_from(&u.h);
    om.view_mut((0, p), (p, n - p)).copy_from(&(-u.h.transpose()));
    let psi = (!mp.is_canonical()).then(|| u.a.scale(-(1.0 - 2.0 * mp.beta)));
    HorizontalLift {
        omega: SkewMatrix::project(&om),
        psi,
        p,
    }
}

/// Geodesic `t ↦ Q exp(tΩ) I_{n×p} exp(t(1 − 2β)A)`.
pub fn exp_stiefel(mp: &BetaParam, u: &TangentAH, t: f64) -> Result<StiefelPoint> {
    let lift = horizontal_lift(mp, u).scale(t);
    let g = lift.exp()?;
    let g = TotalSpaceElement {
        q: u.frame.compose(&g.q)?,
        ..g
    };
    Ok(project_to_stiefel(&g))
}

/// `φ(Q, V) = Q I_{n×p} Vᵀ`, or `Q I_{n×p}` in canonical mode.
pub fn project_to_stiefel(g: &TotalSpaceElement) -> StiefelPoint {
    let cols = g.q.as_matrix().columns(0, g.p);
    let x = match &g.v {
        Some(v) => cols * v.as_matrix().transpose(),
        None => cols.into_owned(),
    };
    StiefelPoint(x)
}

/// Fiber element over `exp_stiefel(u, ρ)` built from given stabilizer factors:
/// `(Q exp(ρΩ) blockdiag(R₁, R₂), exp(ρΨ) R₁)`. `r1` is ignored in canonical
/// mode, where the stabilizer is `blockdiag(I_p, R₂)`.
pub fn fiber_element_with(
    mp: &BetaParam,
    u: &TangentAH,
    rho: f64,
    r1: &Rotation,
    r2: &Rotation,
) -> Result<TotalSpaceElement> {
    let (n, p) = (u.n(), u.p());
    if r2.dim() != n - p || (!mp.is_canonical() && r1.dim() != p) {
        return Err(Error::DimensionMismatch(format!(
            "stabilizer factors of dims ({}, {}) for St({n}, {p})",
            r1.dim(),
            r2.dim()
        )));
    }
    let lift = horizontal_lift(mp, u).scale(rho);
    let e = lift.exp()?;
    let qe = u.frame.compose(&e.q)?;
    Ok(match e.v {
        Some(ev) => TotalSpaceElement {
            q: qe.compose(&Rotation::block_diag(r1, r2))?,
            v: Some(ev.compose(r1)?),
            p,
        },
        None => TotalSpaceElement {
            q: qe.compose(&Rotation::block_diag(&Rotation::identity(p), r2))?,
            v: None,
            p,
        },
    })
}

/// Random fiber element with Haar-distributed stabilizer. `R₁` is drawn before
/// `R₂`; canonical mode draws only `R₂`.
pub fn fiber_element<R: Rng + ?Sized>(
    mp: &BetaParam,
    u: &TangentAH,
    rho: f64,
    rng: &mut R,
) -> Result<TotalSpaceElement> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidRadius(rho));
    }
    let (n, p) = (u.n(), u.p());
    let r1 = if mp.is_canonical() {
        Rotation::identity(p)
    } else {
        haar_rotation(p, rng)
    };
    let r2 = haar_rotation(n - p, rng);
    fiber_element_with(mp, u, rho, &r1, &r2)
}

/// Length of `t ↦ φ(exp(tΞ))` on `[0, 1]`:
/// `sqrt(β‖Ω₁₁ − Ψ‖² + ‖Ω₂₁‖²)`, canonical `sqrt(½‖Ω₁₁‖² + ‖Ω₂₁‖²)`.
pub fn curve_length(mp: &BetaParam, xi: &HorizontalLift) -> Result<f64> {
    let (n, p) = (xi.n(), xi.p);
    if p > n {
        return Err(Error::DimensionMismatch(format!("p = {p} exceeds n = {n}")));
    }
    let om = xi.omega.as_matrix();
    let o11 = om.view((0, 0), (p, p));
    let o21_sq = om.view((p, 0), (n - p, p)).norm_squared();
    let top = if mp.is_canonical() {
        0.5 * o11.norm_squared()
    } else {
        let psi = xi.psi.as_ref().ok_or_else(|| {
            Error::DimensionMismatch("noncanonical length needs a V component".into())
        })?;
        if psi.dim() != p {
            return Err(Error::DimensionMismatch(format!(
                "Psi has dim {}, expected {p}",
                psi.dim()
            )));
        }
        mp.beta * (o11 - psi.as_matrix()).norm_squared()
    };
    Ok((top + o21_sq).sqrt())
}
