//! Single-threaded CPU cost of the engine as a function of the altered
//! intensity: each extra unit of intensity means proportionally more jumps
//! to draw and value, so the cost is linear, `t = c + b rho'`.

use cdo_pricer::mc::SimConfig;
use cdo_pricer::sweep::{fit_timing, measure_timing_reps, write_timing_file};
use cdo_pricer::{standard_tranches, Contract, LossSpec, ModelParams};

fn main() {
    let real = ModelParams::new(0.05, 10.0).unwrap();
    let cfg = SimConfig {
        n_paths: 1_000_000,
        seed: 42,
        chunk_size: 65_536,
        real,
        altered: real,
        contract: Contract::new(5.0, 0.0, 4).unwrap(),
        tranches: standard_tranches(),
        loss_spec: LossSpec::Exponential,
    };
    let rhos = [0.05, 0.5, 1.0, 2.0, 4.0, 6.0];
    let n_paths = 1_000_000;
    let samples = measure_timing_reps(&cfg, &rhos, n_paths, 3).unwrap();
    for (rho, secs) in &samples {
        println!("rho' = {rho:>5.2}: {secs:>7.3} s per 1e6 paths");
    }
    let tm = fit_timing(&samples).unwrap();
    println!("\nfit: t = {:.4} + {:.4} rho'   R^2 = {:.6}", tm.c, tm.b, tm.r_squared);
    println!(
        "cost ratio of simulating at rho' = 0.25 vs 0.05: {:.3}",
        tm.cost(0.25) / tm.cost(0.05)
    );
    let path = write_timing_file(std::path::Path::new("out"), &samples, &tm, cfg.seed, n_paths).unwrap();
    println!("wrote {}", path.display());
}
