//! Randomized certificate that a radius `ρ` exceeds the injectivity radius.
//!
//! Each trial draws a unit tangent `ξ`, a random point `G` of the fiber above
//! `Exp(ρξ)`, takes the componentwise principal logarithm `Ξ` of `G`, and
//! measures the projected curve `t ↦ φ(exp(tΞ))`. A curve strictly shorter than
//! `ρ` between the same endpoints shows that the geodesic `t ↦ Exp(tξ)` stops
//! minimizing before `ρ`.

mod sweep;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::skewlin::{LogPolicy, SkewMatrix};
use crate::stiefel::{
    curve_length, exp_stiefel, fiber_element, BetaParam, HorizontalLift, StiefelPoint, TangentAH,
    TotalSpaceElement,
};
use crate::tolerance::TOL;

pub use sweep::{
    cell_seed, iterations_profile, run_sweep, run_sweep_serial, ProfilePoint, SweepGrid,
};
#[cfg(feature = "parallel")]
pub use sweep::run_sweep_parallel;

/// Raw draws whose norm falls below this are discarded and redrawn.
const DEGENERATE_NORM: f64 = 1e-300;

/// Outcome of one certificate run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateRecord {
    pub n: usize,
    pub p: usize,
    pub beta: f64,
    pub rho: f64,
    pub found: bool,
    /// Trials performed, including the successful one.
    pub iterations: u64,
    /// `L_Ξ` of the shortcut when `found`.
    pub witness_length: Option<f64>,
    pub seed: u64,
    /// `β ≤ 1/2`. Above, the total space is pseudo-Riemannian and a run that
    /// hits the cap is weaker evidence.
    pub total_space_riemannian: bool,
    /// Tangent draws rejected for having (numerically) zero norm.
    pub degenerate_draws: u64,
}

/// Random stream of trial `trial` within a run keyed by `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws `A` (strict upper triangle, row by row) and `H` (row by row) with
/// i.i.d. standard normal entries, then scales to unit β-norm. Returns the
/// tangent and the number of degenerate draws that were discarded.
pub fn sample_unit_tangent_counted<R: Rng + ?Sized>(
    mp: &BetaParam,
    n: usize,
    p: usize,
    rng: &mut R,
) -> Result<(TangentAH, u64)> {
    if p == 0 || p > n {
        return Err(Error::InvalidDims {
            n,
            p,
            reason: "p must satisfy 1 <= p <= n",
        });
    }
    if n == p && p == 1 {
        return Err(Error::InvalidDims {
            n,
            p,
            reason: "St(1, 1) has no nonzero tangent vectors",
        });
    }
    let mut rejected = 0;
    loop {
        let upper: Vec<f64> = (0..p * (p - 1) / 2)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        let h = DMatrix::<f64>::from_row_iterator(
            n - p,
            p,
            (0..(n - p) * p).map(|_| rng.sample::<f64, _>(StandardNormal)),
        );
        let u = TangentAH::at_base(SkewMatrix::from_upper(p, &upper)?, h)?;
        if u.norm(mp) < DEGENERATE_NORM {
            rejected += 1;
            continue;
        }
        return Ok((u.normalized(mp)?, rejected));
    }
}

/// Unit tangent at `I_{n×p}` from the Gaussian construction.
pub fn sample_unit_tangent<R: Rng + ?Sized>(
    mp: &BetaParam,
    n: usize,
    p: usize,
    rng: &mut R,
) -> Result<TangentAH> {
    Ok(sample_unit_tangent_counted(mp, n, p, rng)?.0)
}

/// Everything one trial computes, for independent re-checking.
#[derive(Debug, Clone)]
pub struct TrialReplay {
    pub xi: TangentAH,
    pub endpoint: StiefelPoint,
    pub fiber: TotalSpaceElement,
    pub log: HorizontalLift,
    pub length: f64,
    pub shorter: bool,
}

struct TrialOutcome {
    xi: TangentAH,
    fiber: TotalSpaceElement,
    log: HorizontalLift,
    length: f64,
    rejected: u64,
}

fn run_trial(
    mp: &BetaParam,
    n: usize,
    p: usize,
    rho: f64,
    seed: u64,
    trial: u64,
    policy: LogPolicy,
) -> Result<TrialOutcome> {
    let mut rng = trial_rng(seed, trial);
    let (xi, rejected) = sample_unit_tangent_counted(mp, n, p, &mut rng)?;
    let fiber = fiber_element(mp, &xi, rho, &mut rng)?;
    let log = fiber.log(policy)?;
    let length = curve_length(mp, &log)?;
    Ok(TrialOutcome {
        xi,
        fiber,
        log,
        length,
        rejected,
    })
}

fn is_shorter(length: f64, rho: f64) -> bool {
    length < rho - TOL.certificate_slack
}

fn check_run(n: usize, p: usize, rho: f64) -> Result<()> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidRadius(rho));
    }
    if n < 2 || p == 0 || p > n {
        return Err(Error::InvalidDims {
            n,
            p,
            reason: "need n >= 2 and 1 <= p <= n",
        });
    }
    Ok(())
}

/// Re-runs trial `trial` (0-based) of the run keyed by `seed`.
pub fn replay_trial(
    mp: &BetaParam,
    n: usize,
    p: usize,
    rho: f64,
    seed: u64,
    trial: u64,
    policy: LogPolicy,
) -> Result<TrialReplay> {
    check_run(n, p, rho)?;
    let out = run_trial(mp, n, p, rho, seed, trial, policy)?;
    let endpoint = exp_stiefel(mp, &out.xi, rho)?;
    Ok(TrialReplay {
        shorter: is_shorter(out.length, rho),
        xi: out.xi,
        endpoint,
        fiber: out.fiber,
        log: out.log,
        length: out.length,
    })
}

/// Runs up to `max_iterations` trials with the canonical logarithm policy.
pub fn run_certificate(
    mp: &BetaParam,
    n: usize,
    p: usize,
    rho: f64,
    max_iterations: u64,
    seed: u64,
) -> Result<CertificateRecord> {
    run_certificate_with(mp, n, p, rho, max_iterations, seed, LogPolicy::Canonical)
}

pub fn run_certificate_with(
    mp: &BetaParam,
    n: usize,
    p: usize,
    rho: f64,
    max_iterations: u64,
    seed: u64,
    policy: LogPolicy,
) -> Result<CertificateRecord> {
    check_run(n, p, rho)?;
    let mut record = CertificateRecord {
        n,
        p,
        beta: mp.beta(),
        rho,
        found: false,
        iterations: 0,
        witness_length: None,
        seed,
        total_space_riemannian: mp.total_space_riemannian(),
        degenerate_draws: 0,
    };
    for trial in 0..max_iterations {
        let out = run_trial(mp, n, p, rho, seed, trial, policy)?;
        record.iterations = trial + 1;
        record.degenerate_draws += out.rejected;
        if is_shorter(out.length, rho) {
            record.found = true;
            record.witness_length = Some(out.length);
            break;
        }
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjugate::inj_upper_bound;
    use crate::skewlin::Rotation;
    use crate::stiefel::{fiber_element_with, horizontal_lift, metric_inner, project_to_stiefel};

    #[test]
    fn unit_norm() {
        let mut rng = trial_rng(1, 0);
        for beta in [0.2, 0.5, 1.3] {
            let mp = BetaParam::new(beta).unwrap();
            for (n, p) in [(4, 2), (5, 1), (3, 3)] {
                let u = sample_unit_tangent(&mp, n, p, &mut rng).unwrap();
                assert!((metric_inner(&mp, &u, &u).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_case_has_empty_a() {
        let mut rng = trial_rng(2, 0);
        let u = sample_unit_tangent(&BetaParam::canonical(), 4, 1, &mut rng).unwrap();
        assert_eq!(u.a().dim(), 1);
        assert_eq!(u.a().norm_fro(), 0.0);
        assert!((u.h().norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ambient_mean_is_centered() {
        let mp = BetaParam::canonical();
        let mut rng = trial_rng(3, 0);
        let draws = 10_000;
        let mut sum = DMatrix::<f64>::zeros(4, 2);
        let mut sq = DMatrix::<f64>::zeros(4, 2);
        for _ in 0..draws {
            let x = sample_unit_tangent(&mp, 4, 2, &mut rng).unwrap().ambient();
            sq += x.component_mul(&x);
            sum += x;
        }
        let nf = draws as f64;
        for i in 0..4 {
            for j in 0..2 {
                let mean = sum[(i, j)] / nf;
                let var = sq[(i, j)] / nf - mean * mean;
                if var == 0.0 {
                    assert_eq!(mean, 0.0);
                    continue;
                }
                assert!(mean.abs() <= 3.0 * (var / nf).sqrt(), "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn canonical_cell_above_bound_is_found() {
        let mp = BetaParam::canonical();
        let rho = inj_upper_bound(0.5, 4, 2).unwrap().inj_upper + 0.05;
        let rec = run_certificate(&mp, 4, 2, rho, 1_000_000, 42).unwrap();
        assert!(rec.found);
        assert!(rec.witness_length.unwrap() < rho);
        assert!(rec.total_space_riemannian);
    }

    #[test]
    fn canonical_cell_at_bound_hits_cap() {
        let mp = BetaParam::canonical();
        let rho = inj_upper_bound(0.5, 4, 2).unwrap().inj_upper;
        let rec = run_certificate(&mp, 4, 2, rho, 20_000, 42).unwrap();
        assert!(!rec.found);
        assert_eq!(rec.iterations, 20_000);
        assert_eq!(rec.witness_length, None);
    }

    #[test]
    fn tiny_radius_never_certifies() {
        for beta in [0.3, 0.5, 1.2] {
            let rec = run_certificate(&BetaParam::new(beta).unwrap(), 4, 2, 0.01, 10_000, 5).unwrap();
            assert!(!rec.found);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let mp = BetaParam::new(0.8).unwrap();
        let a = run_certificate(&mp, 4, 2, 3.5, 500, 9).unwrap();
        let b = run_certificate(&mp, 4, 2, 3.5, 500, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn found_certificate_replays() {
        let mp = BetaParam::new(0.3).unwrap();
        let rho = inj_upper_bound(0.3, 4, 2).unwrap().inj_upper + 0.1;
        let rec = run_certificate(&mp, 4, 2, rho, 100_000, 11).unwrap();
        assert!(rec.found);
        let rep = replay_trial(&mp, 4, 2, rho, 11, rec.iterations - 1, LogPolicy::Canonical).unwrap();
        assert!(rep.shorter);
        assert!((rep.length - rec.witness_length.unwrap()).abs() <= 1e-10);
        let shortcut_end = project_to_stiefel(&rep.log.exp().unwrap());
        assert!(shortcut_end.distance_fro(&rep.endpoint) <= 1e-9);
    }

    #[test]
    fn identity_stabilizer_gives_rho() {
        let mut rng = trial_rng(4, 0);
        for beta in [0.3, 0.5, 1.2] {
            let mp = BetaParam::new(beta).unwrap();
            let u = sample_unit_tangent(&mp, 5, 2, &mut rng).unwrap();
            let rho = 1.2;
            let g = fiber_element_with(&mp, &u, rho, &Rotation::identity(2), &Rotation::identity(3))
                .unwrap();
            let lift_angle = horizontal_lift(&mp, &u).scale(rho).omega.spectral_norm().unwrap();
            assert!(lift_angle < std::f64::consts::PI);
            let l = curve_length(&mp, &g.log(LogPolicy::Canonical).unwrap()).unwrap();
            assert!((l - rho).abs() <= 1e-10);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let mp = BetaParam::canonical();
        assert!(run_certificate(&mp, 4, 2, 0.0, 10, 0).is_err());
        assert!(run_certificate(&mp, 4, 5, 1.0, 10, 0).is_err());
        let rec = run_certificate(&mp, 4, 2, 1.0, 0, 0).unwrap();
        assert_eq!(rec.iterations, 0);
    }
}
