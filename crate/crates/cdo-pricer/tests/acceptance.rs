//! Acceptance suite: every shipped claim about the engine, checked at its
//! stated tolerance. One test per criterion, each printing a pass line
//! with the measured numbers. The CPU-cost criterion lives in the
//! dedicated `timing` test binary so its clock stays clean.
//!
//! Standard parameters throughout: rho = 0.05/yr, 1/lambda = 0.1, M = 5y,
//! r = 0, zero recovery.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cdo_pricer::mc::{run_simulation, run_simulation_serial, SimConfig};
use cdo_pricer::sweep::{fit_timing, measure_timing_reps, sweep_2d, MapSpec};
use cdo_pricer::{
    def_pv, expected_def, phi, phi0, prem_pv_1bp, standard_tranches, variance_report,
    weighted_second_moment, Contract, LossSpec, MeasurePair, ModelParams, QuadControl,
    SeriesControl, Tranche, BP,
};

const RHO: f64 = 0.05;
const LAMBDA: f64 = 10.0;
const M: f64 = 5.0;

fn params() -> ModelParams {
    ModelParams::new(RHO, LAMBDA).unwrap()
}

fn contract() -> Contract {
    Contract::new(M, 0.0, 4).unwrap()
}

fn ctl() -> SeriesControl {
    SeriesControl::default()
}

fn quad() -> QuadControl {
    QuadControl::default()
}

fn base_cfg(n_paths: u64, seed: u64) -> SimConfig {
    SimConfig {
        n_paths,
        seed,
        chunk_size: 65_536,
        real: params(),
        altered: params(),
        contract: contract(),
        tranches: standard_tranches(),
        loss_spec: LossSpec::Exponential,
    }
}

#[test]
fn criterion_1_index_closed_forms() {
    let t0 = Instant::now();
    let ix = Tranche::new(0.0, 1.0).unwrap();
    let d = def_pv(&ix, &contract(), &params(), &ctl(), &quad()).unwrap();
    let p = prem_pv_1bp(&ix, &contract(), &params(), &ctl(), &quad()).unwrap();
    // independent closed forms: defPV = 1 - exp(-rho M/(lambda+1)),
    // premPV1bp = (lambda+1)/rho (1 - exp(-rho M/(lambda+1)))
    let c = RHO / (LAMBDA + 1.0);
    let d_expect = -(-c * M).exp_m1();
    let p_expect = d_expect / c;
    let d_rel = (d / d_expect - 1.0).abs();
    let p_rel = (p / p_expect - 1.0).abs();
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(d_rel <= 1e-6, "defPV off by {d_rel:.2e} relative");
    assert!(p_rel <= 1e-6, "premPV1bp off by {p_rel:.2e} relative");
    assert!(elapsed < 1.0, "took {elapsed:.3}s");
    println!(
        "[criterion 1] PASS: index defPV {:.4} bp (rel {:.1e}), premPV1bp {:.6} (rel {:.1e}), {:.3}s",
        d * BP,
        d_rel,
        p,
        p_rel,
        elapsed
    );
}

#[test]
fn criterion_2_super_senior_default_leg() {
    let t0 = Instant::now();
    let ss = Tranche::new(0.3, 1.0).unwrap();
    let d_bp = def_pv(&ss, &contract(), &params(), &ctl(), &quad()).unwrap() * BP;
    let elapsed = t0.elapsed().as_secs_f64();
    // published level 6.8 bp carries Monte Carlo noise of about 0.1 bp plus
    // grid effects; the tolerance is deliberately generous
    assert!((d_bp - 6.8).abs() <= 0.3, "super senior defPV {d_bp:.3} bp");
    assert!(elapsed < 1.0, "took {elapsed:.3}s");
    println!("[criterion 2] PASS: super senior defPV {d_bp:.3} bp within 6.8 +- 0.3 bp, {elapsed:.3}s");
}

#[test]
fn criterion_3_first_passage_series_vs_monte_carlo() {
    let t0 = Instant::now();
    // independent brute-force oracle: simulate compound Poisson paths under
    // the real measure, record the first-passage time of each level, and
    // compare hit frequencies with the series over a 5x5 grid
    let levels: Vec<f64> = (0..5).map(|i| 0.05 + 0.95 * i as f64 / 4.0).collect();
    let horizons: Vec<f64> = (1..=5).map(f64::from).collect();
    let n_paths = 1_000_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(31415926);
    let mut hits = [[0u64; 5]; 5];
    for _ in 0..n_paths {
        let mut t = 0.0;
        let mut d = 0.0;
        let mut passage = [f64::INFINITY; 5];  // per-level first crossing
        let mut next_level = 0;
        loop {
            t += -rng.gen::<f64>().ln() / RHO;
            if t >= M || next_level == 5 {
                break;
            }
            d += -rng.gen::<f64>().ln() / LAMBDA;
            while next_level < 5 && d >= levels[next_level] {
                passage[next_level] = t;
                next_level += 1;
            }
        }
        for (i, p) in passage.iter().enumerate() {
            for (j, m) in horizons.iter().enumerate() {
                if p < m {
                    hits[i][j] += 1;
                }
            }
        }
    }
    let mut ok_cells = 0;
    let mut worst = 0.0f64;
    for (i, h) in levels.iter().enumerate() {
        for (j, m) in horizons.iter().enumerate() {
            let exact = phi0(*h, *m, &params(), &ctl()).unwrap();
            let est = hits[i][j] as f64 / n_paths as f64;
            let se = (exact * (1.0 - exact) / n_paths as f64).sqrt();
            let devs = (exact - est).abs() / se;
            worst = worst.max(devs);
            if devs <= 4.0 {
                ok_cells += 1;
            }
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(ok_cells >= 24, "only {ok_cells}/25 cells within 4 se (worst {worst:.2})");
    assert!(elapsed < 60.0, "took {elapsed:.1}s");
    println!(
        "[criterion 3] PASS: first-passage probabilities, {ok_cells}/25 cells within 4 se (worst {worst:.2} se), {elapsed:.1}s"
    );
}

#[test]
fn criterion_4_importance_sampling_unbiasedness() {
    let t0 = Instant::now();
    let alters = [
        ModelParams::from_mean_jump(0.05, 0.28).unwrap(),
        ModelParams::new(0.22, 10.0).unwrap(),
        ModelParams::new(0.25, 5.0).unwrap(),
    ];
    let mut worst = 0.0f64;
    for alt in alters {
        let mut cfg = base_cfg(1_000_000, 42);
        cfg.altered = alt;
        let res = run_simulation(&cfg).unwrap();
        for ts in &res.stats {
            let exact = expected_def(&ts.tranche, M, &params(), &ctl()).unwrap();
            let devs = (ts.def_leg.weighted_mean() - exact).abs() / ts.def_leg.std_error();
            worst = worst.max(devs);
            assert!(
                devs <= 3.0,
                "tranche {} at rho'={} lambda'={}: {devs:.2} se",
                ts.tranche.label(),
                alt.rho(),
                alt.lambda()
            );
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "took {elapsed:.1}s");
    println!(
        "[criterion 4] PASS: weighted means match the exact default legs for 7 tranches x 3 measures (worst {worst:.2} se), {elapsed:.1}s"
    );
}

#[test]
fn criterion_5_variance_reduction_levels() {
    let ss = Tranche::new(0.3, 1.0).unwrap();
    let ix = Tranche::new(0.0, 1.0).unwrap();
    let base = run_simulation(&base_cfg(1_000_000, 42)).unwrap();
    let var_base_ss = base.stats[5].def_leg.weighted_variance();
    let var_base_ix = base.stats[6].def_leg.weighted_variance();

    // altered mean jump 0.28 at real intensity: super senior
    let mut cfg = base_cfg(1_000_000, 42);
    cfg.altered = ModelParams::from_mean_jump(0.05, 0.28).unwrap();
    let res = run_simulation(&cfg).unwrap();
    let ratio_ss = res.stats[5].def_leg.weighted_variance() / var_base_ss;
    assert!(
        (ratio_ss - 0.14).abs() <= 0.03,
        "super senior variance ratio {ratio_ss:.4} outside 0.14 +- 0.03"
    );
    let rep_ss = variance_report(&ss, M, &cfg.measure_pair(), &ctl()).unwrap();
    let emp_vs_exact_ss =
        (res.stats[5].def_leg.weighted_variance() / rep_ss.variance_altered - 1.0).abs();
    assert!(emp_vs_exact_ss <= 0.05, "empirical vs exact variance off {emp_vs_exact_ss:.3}");

    // altered intensity 0.22 at real jump size: index tranche
    let mut cfg = base_cfg(1_000_000, 42);
    cfg.altered = ModelParams::new(0.22, 10.0).unwrap();
    let res = run_simulation(&cfg).unwrap();
    let ratio_ix = res.stats[6].def_leg.weighted_variance() / var_base_ix;
    assert!(
        (ratio_ix - 0.32).abs() <= 0.05,
        "index variance ratio {ratio_ix:.4} outside 0.32 +- 0.05"
    );
    let rep_ix = variance_report(&ix, M, &cfg.measure_pair(), &ctl()).unwrap();
    let emp_vs_exact_ix =
        (res.stats[6].def_leg.weighted_variance() / rep_ix.variance_altered - 1.0).abs();
    assert!(emp_vs_exact_ix <= 0.05, "empirical vs exact variance off {emp_vs_exact_ix:.3}");

    println!(
        "[criterion 5] PASS: variance ratios {ratio_ss:.3} (target 0.14 +- 0.03) and {ratio_ix:.3} (target 0.32 +- 0.05); empirical vs exact within {:.1}% and {:.1}%",
        emp_vs_exact_ss * 100.0,
        emp_vs_exact_ix * 100.0
    );
}

#[test]
fn criterion_6_phase_transition() {
    let ss = Tranche::new(0.3, 1.0).unwrap();
    // at and past the boundary the weighted second moment is infinite
    for lam_alt in [2.0 * LAMBDA, 2.5 * LAMBDA] {
        let mp = MeasurePair::new(params(), ModelParams::new(RHO, lam_alt).unwrap());
        assert_eq!(
            weighted_second_moment(&ss, M, &mp, &ctl()).unwrap(),
            f64::INFINITY,
            "lambda' = {lam_alt} must diverge"
        );
    }
    // just inside the boundary it is finite, and the truncated series is
    // monotone increasing and Cauchy in the term cap
    let mp = MeasurePair::new(params(), ModelParams::new(RHO, 1.95 * LAMBDA).unwrap());
    let full = weighted_second_moment(&ss, M, &mp, &ctl()).unwrap();
    assert!(full.is_finite());
    let partial = |n_terms: usize| -> f64 {
        // partial sums of the defining series, assembled from gamma slices
        let nu = 2.0 * LAMBDA - 1.95 * LAMBDA;
        let kappa = RHO * RHO * LAMBDA * LAMBDA * M / (RHO * 1.95 * LAMBDA);
        let pref = (-(2.0 * RHO - RHO) * M).exp();
        let a = ss.attachment();
        let mut c_n = pref;
        let mut sum = 0.0;
        for n in 1..=n_terms {
            let nf = n as f64;
            c_n *= kappa / (nf * if n > 1 { nf - 1.0 } else { 1.0 });
            let bracket = cdo_pricer::gamma_slice(n as u32, nu + 2.0, ss.ha(), f64::INFINITY)
                .unwrap()
                - 2.0 * (1.0 - a)
                    * cdo_pricer::gamma_slice(n as u32, nu + 1.0, ss.ha(), f64::INFINITY).unwrap()
                + (1.0 - a)
                    * (1.0 - a)
                    * cdo_pricer::gamma_slice(n as u32, nu, ss.ha(), f64::INFINITY).unwrap();
            // far past convergence the coefficient underflows while the
            // raw slices overflow; those terms are below 1e-60 of the sum
            if c_n == 0.0 || !bracket.is_finite() {
                break;
            }
            sum += c_n * bracket;
        }
        sum
    };
    let caps = [64usize, 128, 256, 512, 1024, 2048, 4096];
    let sums: Vec<f64> = caps.iter().map(|&n| partial(n)).collect();
    assert!(sums[0] > 0.0);
    for w in sums.windows(2) {
        // terms are nonnegative, so growth is monotone up to the rounding
        // noise of the converged tail
        assert!(
            w[1] >= w[0] * (1.0 - 1e-13),
            "partial sums must be nondecreasing: {} then {}",
            w[0],
            w[1]
        );
    }
    let cauchy = (sums[6] - sums[5]).abs() / sums[6];
    assert!(cauchy <= 1e-12, "series must be Cauchy in the cap, tail {cauchy:.2e}");
    assert!(
        (sums[6] / full - 1.0).abs() <= 1e-6,
        "partial sums must approach the shipped value"
    );

    // empirical companion past the boundary: the running sample variance
    // keeps growing with the sample size
    let mut cfg = base_cfg(0, 42);
    cfg.altered = ModelParams::new(RHO, 2.5 * LAMBDA).unwrap();
    cfg.tranches = vec![ss];
    let mut vars = Vec::new();
    for n in [10_000u64, 100_000, 1_000_000] {
        cfg.n_paths = n;
        let res = run_simulation(&cfg).unwrap();
        vars.push(res.stats[0].def_leg.weighted_variance());
    }
    assert!(
        vars[0] < vars[1] && vars[1] < vars[2],
        "sample variance must keep growing: {vars:?}"
    );
    println!(
        "[criterion 6] PASS: divergence flagged at lambda' >= 2 lambda; finite at 1.95 lambda ({full:.4e}); running variance grows {:.3e} -> {:.3e} -> {:.3e}",
        vars[0], vars[1], vars[2]
    );
}

#[test]
fn criterion_7_gain_map_optima() {
    let t0 = Instant::now();
    let cfg = base_cfg(100_000, 42);
    let samples = measure_timing_reps(&cfg, &[0.05, 0.5, 1.0, 2.0, 4.0, 6.0], 2_000_000, 3).unwrap();
    let tm = fit_timing(&samples).unwrap();
    let map = sweep_2d(&MapSpec::default_grid(42), &cfg, Some(&tm)).unwrap();

    let ss = &map.optima[5];
    let g = ss.g_num.as_ref().expect("path-gain optimum");
    let g_rho_ratio = g.rho_alt / RHO;
    let g_mu_ratio = g.mu_alt / 0.1;
    assert!(g.value >= 25.0, "super senior path gain {:.1} below 25", g.value);
    assert!(
        (g_rho_ratio - 5.6).abs() <= 1.0 && (g_mu_ratio - 3.8).abs() <= 1.0,
        "path-gain optimum at ({g_rho_ratio:.1}, {g_mu_ratio:.1}), expected within one cell of (5.6, 3.8)"
    );

    let t = ss.g_time.as_ref().expect("time-gain optimum");
    let t_rho_ratio = t.rho_alt / RHO;
    let t_mu_ratio = t.mu_alt / 0.1;
    assert!(
        (t_rho_ratio - 3.2).abs() <= 1.0 && (t_mu_ratio - 3.4).abs() <= 1.0,
        "time-gain optimum at ({t_rho_ratio:.1}, {t_mu_ratio:.1}), expected within one cell of (3.2, 3.4)"
    );
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 1800.0, "took {elapsed:.0}s");
    println!(
        "[criterion 7] PASS: super senior G_num {:.1} at ratios ({g_rho_ratio:.0}, {g_mu_ratio:.0}); G_time {:.1} at ({t_rho_ratio:.0}, {t_mu_ratio:.0}); cost model c={:.3} b={:.3} R^2={:.4}; {elapsed:.0}s",
        g.value, t.value, tm.c, tm.b, tm.r_squared
    );
}

#[test]
fn criterion_9_property_suite() {
    // reproducibility: bit-identical statistics, thread-count independent
    let cfg = base_cfg(50_000, 7);
    let a = run_simulation(&cfg).unwrap();
    let b = run_simulation(&cfg).unwrap();
    let serial = run_simulation_serial(&cfg).unwrap();
    assert_eq!(a, b, "repeat run must be bit-identical");
    assert_eq!(a, serial, "serial run must be bit-identical");

    // chunk-size changes only regroup floating point sums
    let mut cfg1 = base_cfg(200_000, 7);
    cfg1.altered = ModelParams::new(0.22, 10.0).unwrap();
    let mut cfg2 = cfg1.clone();
    cfg2.chunk_size = 7_777;
    let r1 = run_simulation(&cfg1).unwrap();
    let r2 = run_simulation(&cfg2).unwrap();
    let mut worst_chunk = 0.0f64;
    for (x, y) in r1.stats.iter().zip(&r2.stats) {
        worst_chunk = worst_chunk.max(
            (x.def_leg.weighted_mean() - y.def_leg.weighted_mean()).abs()
                / x.def_leg.weighted_mean().abs(),
        );
    }
    assert!(worst_chunk <= 1e-10, "chunk regrouping moved a mean by {worst_chunk:.2e}");

    // per-path weight audit against the closed form
    let mp = MeasurePair::new(params(), ModelParams::new(0.3, 4.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_audit = 0.0f64;
    for _ in 0..10_000 {
        let path = cdo_pricer::mc::generate_path(&mut rng, &mp, M).unwrap();
        let audit = path.recompute_weight(M, &mp).unwrap();
        worst_audit = worst_audit.max((path.rn_weight - audit).abs() / audit);
    }
    assert!(worst_audit <= 1e-12, "weight audit drift {worst_audit:.2e}");

    // interior residual of the passage equation falls at second order
    let tight = SeriesControl { abs_tol: 1e-14, max_terms: 4096 };
    let residual = |step: f64| -> f64 {
        let r = 0.03;
        let p = params();
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let h = 0.3 + 0.2 * f64::from(i);
                let hm = 1.0 + 1.25 * f64::from(j);
                let f = |dh: f64, dm: f64| phi(h + dh, hm + dm, r, &p, &tight).unwrap();
                let mixed = (f(step, step) - f(-step, step) - f(step, -step) + f(-step, -step))
                    / (4.0 * step * step);
                let dm = (f(0.0, step) - f(0.0, -step)) / (2.0 * step);
                let dh = (f(step, 0.0) - f(-step, 0.0)) / (2.0 * step);
                worst = worst
                    .max((mixed + LAMBDA * dm + (RHO + r) * dh + LAMBDA * r * f(0.0, 0.0)).abs());
            }
        }
        worst
    };
    let coarse = residual(0.02);
    let fine = residual(0.01);
    assert!(fine <= coarse / 2.5, "residual must fall at second order: {coarse:.2e} -> {fine:.2e}");

    // premium leg is continuous at zero rate
    let ss = Tranche::new(0.3, 1.0).unwrap();
    let p0 = prem_pv_1bp(&ss, &Contract::new(M, 0.0, 4).unwrap(), &params(), &ctl(), &quad())
        .unwrap();
    let pe = prem_pv_1bp(&ss, &Contract::new(M, 1e-8, 4).unwrap(), &params(), &ctl(), &quad())
        .unwrap();
    let rate_cont = (p0 / pe - 1.0).abs();
    assert!(rate_cont <= 1e-6, "rate continuity off by {rate_cont:.2e}");

    // default legs add across contiguous tranches
    let c_r = Contract::new(M, 0.02, 4).unwrap();
    let parts: f64 = standard_tranches()[..6]
        .iter()
        .map(|t| def_pv(t, &c_r, &params(), &ctl(), &quad()).unwrap())
        .sum();
    let whole = def_pv(&Tranche::new(0.0, 1.0).unwrap(), &c_r, &params(), &ctl(), &quad()).unwrap();
    let additivity = (parts / whole - 1.0).abs();
    assert!(additivity <= 1e-7, "tranche additivity off by {additivity:.2e}");

    // mean carried weight estimates one
    let mut cfg = base_cfg(1_000_000, 42);
    cfg.altered = ModelParams::new(0.25, 5.0).unwrap();
    let res = run_simulation(&cfg).unwrap();
    let w_dev = (res.weights.weighted_mean() - 1.0).abs() / res.weights.std_error();
    assert!(w_dev <= 3.0, "mean weight off by {w_dev:.2} se");

    println!(
        "[criterion 9] PASS: bit-identical reruns; chunk regrouping <= {worst_chunk:.1e}; weight audit <= {worst_audit:.1e}; residual {coarse:.1e} -> {fine:.1e} under halving; rate continuity {rate_cont:.1e}; additivity {additivity:.1e}; mean weight {w_dev:.2} se"
    );
}
