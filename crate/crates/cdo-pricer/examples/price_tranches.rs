//! Exact tranche pricing with the analytic engine: per-tranche default leg,
//! premium annuity and fair spread for the standard tranche set.

use cdo_pricer::{
    def_pv, fair_spread, prem_pv_1bp, standard_tranches, Contract, ModelParams, QuadControl,
    SeriesControl, BP,
};

fn main() {
    let params = ModelParams::new(0.05, 10.0).unwrap();
    let contract = Contract::new(5.0, 0.0, 4).unwrap();
    let ctl = SeriesControl::default();
    let quad = QuadControl::default();

    println!("rho = {}, 1/lambda = {}, M = {}y, r = {}", 0.05, 0.1, 5.0, 0.0);
    println!("{:>6} {:>6} {:>14} {:>12} {:>14}", "a", "d", "defPV [bp]", "premPV1bp", "spread [bp]");
    for tr in standard_tranches() {
        let d = def_pv(&tr, &contract, &params, &ctl, &quad).unwrap();
        let p = prem_pv_1bp(&tr, &contract, &params, &ctl, &quad).unwrap();
        println!(
            "{:>6.2} {:>6.2} {:>14.4} {:>12.6} {:>14.4}",
            tr.attachment(),
            tr.detachment(),
            d * BP,
            p,
            fair_spread(d, p).unwrap()
        );
    }

    // the index tranche has a closed form: both legs share the factor
    // 1 - exp(-cM) with c = rho/(lambda+1), so the spread is 1e4 c
    println!("\nindex spread closed form: {:.4} bp", 1e4 * 0.05 / 11.0);
}
