use serde::Serialize;

use crate::conjugate::inj_upper_bound;
use crate::error::{Error, Result};
use crate::skewlin::LogPolicy;
use crate::stiefel::BetaParam;

use super::{run_certificate_with, CertificateRecord};

/// Grid of `(β, ρ = î_β + offset)` cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub betas: Vec<f64>,
    pub rho_offsets: Vec<f64>,
    pub max_iterations: u64,
    pub n: usize,
    pub p: usize,
    pub master_seed: u64,
    #[serde(skip)]
    pub policy: LogPolicy,
}

impl SweepGrid {
    /// β from 0.1 to 1.5 in steps of 0.05, offsets `{0, 0.05}`, cap `10⁵`.
    pub fn figure1(n: usize, p: usize, master_seed: u64) -> Self {
        Self {
            betas: (0..=28).map(|k| (10 + 5 * k) as f64 / 100.0).collect(),
            rho_offsets: vec![0.0, 0.05],
            max_iterations: 100_000,
            n,
            p,
            master_seed,
            policy: LogPolicy::Canonical,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.betas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::DimensionMismatch(
                "sweep betas must be strictly increasing".into(),
            ));
        }
        for &b in &self.betas {
            BetaParam::new(b)?;
        }
        if let Some(&bad) = self.rho_offsets.iter().find(|o| !o.is_finite()) {
            return Err(Error::InvalidRadius(bad));
        }
        Ok(())
    }

    /// Cells in output order: β-major, offset-minor.
    fn cells(&self) -> Vec<(usize, usize)> {
        (0..self.betas.len())
            .flat_map(|b| (0..self.rho_offsets.len()).map(move |o| (b, o)))
            .collect()
    }

    fn run_cell(&self, (bi, oi): (usize, usize)) -> Result<CertificateRecord> {
        let beta = self.betas[bi];
        let mp = BetaParam::new(beta)?;
        let rho = inj_upper_bound(beta, self.n, self.p)?.inj_upper + self.rho_offsets[oi];
        run_certificate_with(
            &mp,
            self.n,
            self.p,
            rho,
            self.max_iterations,
            cell_seed(self.master_seed, bi as u64, oi as u64),
            self.policy,
        )
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sweep cell `(beta_index, offset_index)`.
pub fn cell_seed(master: u64, beta_index: u64, offset_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ beta_index) ^ offset_index.rotate_left(32))
}

/// One record per cell, computed on the calling thread.
pub fn run_sweep_serial(grid: &SweepGrid) -> Result<Vec<CertificateRecord>> {
    grid.validate()?;
    grid.cells().into_iter().map(|c| grid.run_cell(c)).collect()
}

/// One record per cell, cells spread over the rayon pool. Output order and
/// contents match [`run_sweep_serial`].
#[cfg(feature = "parallel")]
pub fn run_sweep_parallel(grid: &SweepGrid) -> Result<Vec<CertificateRecord>> {
    use rayon::prelude::*;
    grid.validate()?;
    grid.cells()
        .into_par_iter()
        .map(|c| grid.run_cell(c))
        .collect()
}

/// Parallel when the `parallel` feature is enabled, serial otherwise.
pub fn run_sweep(grid: &SweepGrid) -> Result<Vec<CertificateRecord>> {
    #[cfg(feature = "parallel")]
    {
        run_sweep_parallel(grid)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_sweep_serial(grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub delta: f64,
    pub rho: f64,
    pub iterations: u64,
    pub found: bool,
}

/// Iterations needed at `ρ = î_β + δ` for each `δ`, every run keyed by `seed`.
pub fn iterations_profile(
    mp: &BetaParam,
    n: usize,
    p: usize,
    deltas: &[f64],
    cap: u64,
    seed: u64,
) -> Result<Vec<ProfilePoint>> {
    if let Some(&bad) = deltas.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(Error::InvalidRadius(bad));
    }
    let bound = inj_upper_bound(mp.beta(), n, p)?.inj_upper;
    deltas
        .iter()
        .map(|&delta| {
            let rho = bound + delta;
            let rec = run_certificate_with(mp, n, p, rho, cap, seed, LogPolicy::Canonical)?;
            Ok(ProfilePoint {
                delta,
                rho,
                iterations: rec.iterations,
                found: rec.found,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::run_certificate;

    fn small_grid() -> SweepGrid {
        SweepGrid {
            betas: vec![0.3, 0.5, 1.1],
            rho_offsets: vec![0.0, 0.3],
            max_iterations: 300,
            n: 4,
            p: 2,
            master_seed: 17,
            policy: LogPolicy::Canonical,
        }
    }

    #[test]
    fn figure1_grid_shape() {
        let g = SweepGrid::figure1(4, 2, 0);
        assert_eq!(g.betas.len(), 29);
        assert_eq!(g.betas[0], 0.1);
        assert_eq!(g.betas[28], 1.5);
        assert_eq!(g.betas[8], 0.5);
        g.validate().unwrap();
    }

    #[test]
    fn single_cell_matches_run_certificate() {
        let grid = SweepGrid {
            betas: vec![0.5],
            rho_offsets: vec![0.2],
            ..small_grid()
        };
        let recs = run_sweep_serial(&grid).unwrap();
        let rho = inj_upper_bound(0.5, 4, 2).unwrap().inj_upper + 0.2;
        let direct = run_certificate(&BetaParam::canonical(), 4, 2, rho, 300, cell_seed(17, 0, 0))
            .unwrap();
        assert_eq!(recs, vec![direct]);
    }

    #[test]
    fn order_and_determinism() {
        let grid = small_grid();
        let a = run_sweep_serial(&grid).unwrap();
        let b = run_sweep(&grid).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        assert_eq!(a[1].beta, 0.3);
        assert_eq!(a[2].beta, 0.5);
        assert!(a[3].rho > a[2].rho);
    }

    #[test]
    fn seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for b in 0..40 {
            for o in 0..4 {
                assert!(seen.insert(cell_seed(1, b, o)));
            }
        }
        assert_ne!(cell_seed(1, 0, 0), cell_seed(2, 0, 0));
    }

    #[test]
    fn rejects_unsorted_betas() {
        let grid = SweepGrid {
            betas: vec![0.5, 0.3],
            ..small_grid()
        };
        assert!(run_sweep(&grid).is_err());
    }

    #[test]
    fn profile_edge_cases() {
        let mp = BetaParam::canonical();
        assert!(iterations_profile(&mp, 4, 2, &[], 10, 0).unwrap().is_empty());
        assert!(iterations_profile(&mp, 4, 2, &[-1.0], 10, 0).is_err());
        let pts = iterations_profile(&mp, 4, 2, &[10.0], 1000, 0).unwrap();
        assert!(pts[0].found && pts[0].iterations <= 10);
    }
}
