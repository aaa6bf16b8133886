use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::skewlin::{dexpm, expm_skew, Rotation, SkewMatrix};
use crate::stiefel::{horizontal_lift, BetaParam, TangentAH};

use super::solve_t_root;

/// A geodesic direction `ξ` and a Jacobi-field seed `ξ̆` whose exponential
/// differential vanishes at `t_conj`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateWitness {
    pub mp: BetaParam,
    pub n: usize,
    pub p: usize,
    /// `A = 0`, `H = [[I₂, 0], [0, 0]]`; norm `√2`.
    pub xi: TangentAH,
    pub xibreve: TangentAH,
    pub t_conj: f64,
    pub w: f64,
    /// `‖DExp(t_conj ξ; ξ̆)‖_F`, filled in by [`verify_witness`].
    pub residual: Option<f64>,
}

fn d2() -> DMatrix<f64> {
    SkewMatrix::generator(2, 0, 1).into_inner()
}

fn padded(rows: usize, cols: usize, block: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    m.view_mut((0, 0), (2, 2)).copy_from(block);
    m
}

/// Builds the conjugate-point witness on `St(n, p)`, `2 ≤ p ≤ n − 2`, at the
/// root `t^r_β` or, with `use_pi_branch`, at `t = π` with `w = 0`.
pub fn build_witness(
    mp: &BetaParam,
    n: usize,
    p: usize,
    use_pi_branch: bool,
) -> Result<ConjugateWitness> {
    if p < 2 || p + 2 > n {
        return Err(Error::InvalidDims {
            n,
            p,
            reason: "conjugate witness needs 2 <= p <= n - 2",
        });
    }
    let beta = mp.beta();
    let alpha = mp.alpha();
    let d = d2();

    let xi = TangentAH::at_base(SkewMatrix::zeros(p), padded(n - p, p, &DMatrix::identity(2, 2)))?;

    let (t_conj, w, a_breve, h_breve) = if use_pi_branch {
        (PI, 0.0, DMatrix::zeros(p, p), padded(n - p, p, &d))
    } else if mp.is_euclidean() {
        (PI, 0.0, padded(p, p, &(&d * 0.5)), DMatrix::zeros(n - p, p))
    } else {
        let t = solve_t_root(beta)?;
        let w = 2.0 / ((1.0 + 2.0 * alpha) * t);
        (
            t,
            w,
            padded(p, p, &(&d * (-w / (2.0 * beta)))),
            padded(n - p, p, &d),
        )
    };
    let xibreve = TangentAH::at_base(SkewMatrix::project(&a_breve), h_breve)?;

    Ok(ConjugateWitness {
        mp: *mp,
        n,
        p,
        xi,
        xibreve,
        t_conj,
        w,
        residual: None,
    })
}

fn frame_times(wit: &ConjugateWitness, m: DMatrix<f64>) -> DMatrix<f64> {
    wit.xi.frame().as_matrix() * m
}

/// `d/dε Q exp(tΩ + εΩ̆) I_{n×p} exp(−tΨ − εΨ̆)` at `ε = 0`, by the product
/// rule with [`dexpm`] for both factors. In canonical mode the `Ψ` factor is
/// absent.
pub fn witness_residual(wit: &ConjugateWitness) -> Result<f64> {
    let (p, t) = (wit.p, wit.t_conj);
    let lift = horizontal_lift(&wit.mp, &wit.xi);
    let seed = horizontal_lift(&wit.mp, &wit.xibreve);

    let d1 = dexpm(&lift.omega.scale(t), &seed.omega)?;
    let d1_cols = d1.derivative.columns(0, p).into_owned();
    let total = match (&lift.psi, &seed.psi) {
        (Some(psi), Some(psi_b)) => {
            let d2 = dexpm(&psi.scale(-t), &psi_b.scale(-1.0))?;
            let e_cols = d1.value.columns(0, p).into_owned();
            d1_cols * d2.value + e_cols * d2.derivative
        }
        _ => d1_cols,
    };
    Ok(frame_times(wit, total).norm())
}

/// Canonical-mode formula `‖Q · Dexp(tΩ; Ω̆) I_{n×p}‖_F` with the canonical
/// lifts, regardless of `wit.mp`.
pub fn witness_residual_canonical(wit: &ConjugateWitness) -> Result<f64> {
    let mp = BetaParam::canonical();
    let lift = horizontal_lift(&mp, &wit.xi);
    let seed = horizontal_lift(&mp, &wit.xibreve);
    let d = dexpm(&lift.omega.scale(wit.t_conj), &seed.omega)?;
    Ok(frame_times(wit, d.derivative.columns(0, wit.p).into_owned()).norm())
}

/// Central difference in `ε` of the same curve, step `h`.
pub fn witness_residual_fd(wit: &ConjugateWitness, h: f64) -> Result<f64> {
    let (p, t) = (wit.p, wit.t_conj);
    let lift = horizontal_lift(&wit.mp, &wit.xi);
    let seed = horizontal_lift(&wit.mp, &wit.xibreve);
    let eval = |eps: f64| -> Result<DMatrix<f64>> {
        let q = expm_skew(&lift.omega.scale(t).add(&seed.omega.scale(eps))?)?;
        let cols = q.as_matrix().columns(0, p).into_owned();
        Ok(match (&lift.psi, &seed.psi) {
            (Some(psi), Some(psi_b)) => {
                let v = expm_skew(&psi.scale(-t).add(&psi_b.scale(-eps))?)?;
                cols * v.as_matrix()
            }
            _ => cols,
        })
    };
    let fd = (eval(h)? - eval(-h)?) / (2.0 * h);
    Ok(frame_times(wit, fd).norm())
}

/// Computes the residual, stores it in the witness and returns it.
pub fn verify_witness(wit: &mut ConjugateWitness) -> Result<f64> {
    let r = witness_residual(wit)?;
    wit.residual = Some(r);
    Ok(r)
}

impl ConjugateWitness {
    /// Length of the geodesic up to `t_conj`: `t_conj · √2`.
    pub fn geodesic_length(&self) -> f64 {
        self.t_conj * std::f64::consts::SQRT_2
    }

    /// Same witness expressed at another frame `Q`.
    pub fn with_frame(&self, frame: Rotation) -> Result<Self> {
        let move_to = |u: &TangentAH| TangentAH::new(u.a().clone(), u.h().clone(), frame.clone());
        Ok(Self {
            xi: move_to(&self.xi)?,
            xibreve: move_to(&self.xibreve)?,
            residual: None,
            ..self.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skewlin::haar_rotation;
    use crate::stiefel::metric_inner;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn canonical_witness_time() {
        let w = build_witness(&BetaParam::canonical(), 4, 2, false).unwrap();
        assert!((w.geodesic_length() / PI - 0.91326189159122).abs() < 1e-9);
        let norm2 = metric_inner(&w.mp, &w.xi, &w.xi).unwrap();
        assert_eq!(norm2, 2.0);
    }

    #[test]
    fn euclidean_witness_shape() {
        let w = build_witness(&BetaParam::euclidean(), 5, 2, false).unwrap();
        assert_eq!(w.t_conj, PI);
        assert_eq!(w.xibreve.h().norm(), 0.0);
    }

    #[test]
    fn pi_branch() {
        for beta in [0.3, 0.5, 1.0, 1.4] {
            let w = build_witness(&BetaParam::new(beta).unwrap(), 5, 2, true).unwrap();
            assert_eq!(w.t_conj, PI);
            assert_eq!(w.w, 0.0);
        }
    }

    #[test]
    fn residuals_vanish() {
        for beta in [0.25, 0.5, 0.75, 1.0, 1.25] {
            let mp = BetaParam::new(beta).unwrap();
            for (n, p) in [(4, 2), (6, 3)] {
                for pi_branch in [false, true] {
                    let mut w = build_witness(&mp, n, p, pi_branch).unwrap();
                    let r = verify_witness(&mut w).unwrap();
                    assert!(r <= 1e-9, "beta {beta} ({n},{p}) {pi_branch}: {r}");
                    assert_eq!(w.residual, Some(r));
                    let fd = witness_residual_fd(&w, 1e-6).unwrap();
                    assert!((fd - r).abs() <= 1e-6);
                }
            }
        }
    }

    #[test]
    fn perturbed_time_is_detected() {
        for beta in [0.25, 0.5, 0.75, 1.0, 1.25] {
            let mut w = build_witness(&BetaParam::new(beta).unwrap(), 5, 3, false).unwrap();
            w.t_conj *= 1.01;
            assert!(verify_witness(&mut w).unwrap() > 1e-4);
        }
    }

    #[test]
    fn canonical_paths_agree() {
        let w = build_witness(&BetaParam::canonical(), 6, 3, false).unwrap();
        let mut shifted = w.clone();
        shifted.t_conj *= 0.9;
        for wit in [&w, &shifted] {
            let a = witness_residual(wit).unwrap();
            let b = witness_residual_canonical(wit).unwrap();
            assert!((a - b).abs() <= 1e-10);
        }
        assert!(witness_residual(&shifted).unwrap() > 1e-3);
    }

    #[test]
    fn frame_does_not_change_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = build_witness(&BetaParam::new(0.75).unwrap(), 5, 2, false).unwrap();
        let moved = w.with_frame(haar_rotation(5, &mut rng)).unwrap();
        assert!(witness_residual(&moved).unwrap() <= 1e-9);
    }

    #[test]
    fn rejects_out_of_scope_dims() {
        let mp = BetaParam::canonical();
        assert!(build_witness(&mp, 3, 2, false).is_err());
        assert!(build_witness(&mp, 5, 1, false).is_err());
    }
}
