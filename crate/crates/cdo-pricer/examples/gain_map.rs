//! 2-D gain map over the reweighting parameters with the fitted CPU-cost
//! model: how many paths (and how much CPU time) a measure change saves,
//! per tranche, and where the optimum sits.

use cdo_pricer::mc::SimConfig;
use cdo_pricer::sweep::{fit_timing, measure_timing_reps, sweep_2d, write_map_files, MapSpec};
use cdo_pricer::{standard_tranches, Contract, LossSpec, ModelParams};

fn main() {
    let real = ModelParams::new(0.05, 10.0).unwrap();
    let cfg = SimConfig {
        n_paths: 100_000,
        seed: 42,
        chunk_size: 65_536,
        real,
        altered: real,
        contract: Contract::new(5.0, 0.0, 4).unwrap(),
        tranches: standard_tranches(),
        loss_spec: LossSpec::Exponential,
    };

    let samples = measure_timing_reps(&cfg, &[0.05, 0.5, 1.0, 2.0, 4.0, 6.0], 2_000_000, 3).unwrap();
    let tm = fit_timing(&samples).unwrap();
    println!("cost model t = {:.4} + {:.4} rho'  (R^2 = {:.5})\n", tm.c, tm.b, tm.r_squared);

    let map = sweep_2d(&MapSpec::default_grid(42), &cfg, Some(&tm)).unwrap();

    println!("path-count gain G_num for the super senior tranche");
    println!("rows: lambda/lambda' = 1..10 (down), cols: rho'/rho = 1..10 (across)");
    let t = 5;
    for j in 0..10 {
        let row: Vec<String> =
            (0..10).map(|i| format!("{:>7.1}", map.cell(i, j).g_num[t])).collect();
        println!("{}", row.join(" "));
    }

    println!("\nper-tranche optima:");
    for o in &map.optima {
        let g = o.g_num.as_ref().unwrap();
        let t = o.g_time.as_ref().unwrap();
        println!(
            "  [{:.2},{:.2}]  G_num {:>5.1} at (rho'={:.2}, 1/lam'={:.2})   G_time {:>5.1} at (rho'={:.2}, 1/lam'={:.2})",
            o.tranche.attachment(),
            o.tranche.detachment(),
            g.value,
            g.rho_alt,
            g.mu_alt,
            t.value,
            t.rho_alt,
            t.mu_alt
        );
    }

    let files = write_map_files(std::path::Path::new("out"), &map, ',').unwrap();
    println!("\nwrote {} files under out/", files.len());
}
