//! Variance reduction by measure change: simulate under an altered
//! parameter set, reweight by the likelihood ratio, and compare the
//! estimator spread against the plain run — with the exact (closed-form)
//! variance alongside.

use cdo_pricer::mc::{run_simulation, SimConfig};
use cdo_pricer::{
    variance_report, Contract, LossSpec, MeasurePair, ModelParams, SeriesControl, Tranche, BP,
};

fn run(cfg: &SimConfig, label: &str) -> (f64, f64) {
    let res = run_simulation(cfg).unwrap();
    let ss = &res.stats[0];
    println!(
        "{label:<34} mean {:>8.4} bp   sd {:>8.2} bp   se {:>6.4} bp",
        ss.def_leg.weighted_mean() * BP,
        ss.def_leg.weighted_sd() * BP,
        ss.def_leg.std_error() * BP
    );
    (ss.def_leg.weighted_mean(), ss.def_leg.weighted_variance())
}

fn main() {
    let real = ModelParams::new(0.05, 10.0).unwrap();
    let ss = Tranche::new(0.3, 1.0).unwrap();
    let mut cfg = SimConfig {
        n_paths: 1_000_000,
        seed: 42,
        chunk_size: 65_536,
        real,
        altered: real,
        contract: Contract::new(5.0, 0.0, 4).unwrap(),
        tranches: vec![ss],
        loss_spec: LossSpec::Exponential,
    };
    let ctl = SeriesControl::default();

    println!("super senior [0.30, 1.00] default leg, 1e6 paths\n");
    let (_, var_base) = run(&cfg, "plain (real measure)");

    // boost the mean jump size to 0.28: senior levels get hit far more often
    cfg.altered = ModelParams::from_mean_jump(0.05, 0.28).unwrap();
    let (_, var_jump) = run(&cfg, "reweighted (1/lambda' = 0.28)");

    // boost the intensity instead
    cfg.altered = ModelParams::new(0.22, 10.0).unwrap();
    let (_, var_rho) = run(&cfg, "reweighted (rho' = 0.22)");

    println!();
    println!("variance ratio, jump-size change: {:.3}", var_jump / var_base);
    println!("variance ratio, intensity change: {:.3}", var_rho / var_base);

    let rep = variance_report(
        &ss,
        5.0,
        &MeasurePair::new(real, ModelParams::from_mean_jump(0.05, 0.28).unwrap()),
        &ctl,
    )
    .unwrap();
    let base = variance_report(&ss, 5.0, &MeasurePair::identity(real), &ctl).unwrap();
    println!(
        "exact ratio at 1/lambda' = 0.28 : {:.3}  (gain {:.1}x in paths)",
        rep.variance_altered / base.variance_altered,
        base.variance_altered / rep.variance_altered
    );
}
