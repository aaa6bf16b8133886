//! Geodesics, conjugate points and injectivity-radius bounds on the Stiefel
//! manifold `St(n, p)` under the one-parameter β-metric family, plus a
//! randomized search for short curves between geodesic endpoints.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
pub mod conjugate;
pub mod error;
pub mod skewlin;
pub mod stiefel;
pub mod tolerance;

pub use certificate::{
    cell_seed, iterations_profile, replay_trial, run_certificate, run_certificate_with, run_sweep,
    run_sweep_serial, sample_unit_tangent, CertificateRecord, ProfilePoint, SweepGrid, TrialReplay,
};
#[cfg(feature = "parallel")]
pub use certificate::run_sweep_parallel;
pub use conjugate::{
    beta_thresholds, build_witness, f_sign, inj_upper_bound, lemma_blocks, loop_length_bound,
    solve_t_root, verify_witness, BoundReport, ConjugateWitness, LemmaKind, Regime,
};
pub use error::{Error, Result};
pub use skewlin::{
    dexpm, expm_skew, haar_rotation, logm_so, FrechetResult, LogPolicy, Rotation, SkewMatrix,
};
pub use stiefel::{
    curve_length, exp_stiefel, fiber_element, fiber_element_with, horizontal_lift, metric_inner,
    project_to_stiefel, total_space_inner, BetaParam, HorizontalLift, StiefelPoint, TangentAH,
    TotalSpaceElement,
};
pub use tolerance::{Tolerances, TOL};
