//! Full certificate sweep on St(4, 2) with the default grid, printed as a table.

use std::time::Instant;

use stiefel_inj::{run_sweep, SweepGrid};

fn main() {
    let grid = SweepGrid::figure1(4, 2, 2024);
    let start = Instant::now();
    let records = run_sweep(&grid).expect("valid grid");
    let trials: u64 = records.iter().map(|r| r.iterations).sum();
    println!("{:>6} {:>10} {:>6} {:>8}", "beta", "rho", "found", "iters");
    for r in &records {
        println!("{:>6.2} {:>10.6} {:>6} {:>8}", r.beta, r.rho, r.found, r.iterations);
    }
    let secs = start.elapsed().as_secs_f64();
    println!("{trials} trials in {secs:.1}s");
}
