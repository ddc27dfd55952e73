//! Command-line front end: pricing, simulation, sweeps, maps, timing and
//! the cross-validation suite.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{FileFormat, RunConfig};
use crate::error::{Error, Result};
use crate::mc::{loss_surface, run_simulation, SimConfig, SurfaceSpec};
use crate::model::{fair_spread, ModelParams, Tranche, BP};
use crate::pricer::{def_pv, phi, phi0, prem_pv_1bp, QuadControl, SeriesControl};
use crate::reweight::{expected_def, phase_boundary, variance_report, MeasurePair};
use crate::sweep::{
    fit_timing, measure_timing_reps, sweep_1d, sweep_2d, write_map_files, write_sweep_files,
    write_timing_file, MapSpec, SweepAxis,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_DIVERGENT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "cdo-pricer",
    version,
    about = "Price CDO tranches under a compound Poisson loss model, analytically and by importance-sampled Monte Carlo"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON run configuration; defaults describe the standard calm-market setup.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory for emitted files.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Override the Monte Carlo seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Override the Monte Carlo path count.
    #[arg(long, global = true)]
    pub paths: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Delimiter for tabular output files.
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,

    /// Treat a divergent altered measure as an error (exit code 4).
    #[arg(long, global = true)]
    pub strict_divergence: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Tsv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AxisArg {
    /// Sweep the altered mean jump size 1/lambda'.
    MeanJump,
    /// Sweep the altered intensity rho'.
    Intensity,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact per-tranche leg values and fair spreads from the analytic engine.
    Price,
    /// Monte Carlo leg statistics under the configured (possibly altered) measure.
    Simulate,
    /// 1-D sweep of a reweighting parameter; writes per-tranche plot files.
    Sweep {
        #[arg(long, value_enum, default_value = "mean-jump")]
        axis: AxisArg,
        /// First swept value (defaults: 0.1 for mean-jump, 0.05 for intensity).
        #[arg(long)]
        from: Option<f64>,
        /// Last swept value (defaults: 1.0 for mean-jump, 0.5 for intensity).
        #[arg(long)]
        to: Option<f64>,
        #[arg(long, default_value_t = 24)]
        steps: usize,
    },
    /// 2-D gain map over (rho'/rho, lambda/lambda') with per-tranche optima.
    Map {
        #[arg(long, default_value_t = 10)]
        rho_cells: usize,
        #[arg(long, default_value_t = 10)]
        mu_cells: usize,
        /// Paths per map cell.
        #[arg(long)]
        cell_paths: Option<u64>,
        /// Skip the CPU-cost fit and the time-gain map.
        #[arg(long)]
        no_timing: bool,
    },
    /// Measure single-threaded CPU cost per path count across intensities
    /// and fit the linear cost model.
    Timing {
        /// Comma-separated altered intensities.
        #[arg(long, value_name = "LIST")]
        rhos: Option<String>,
    },
    /// Time-resolved histogram of the simulated portfolio loss.
    Surface {
        #[arg(long, default_value_t = 50)]
        time_bins: usize,
        #[arg(long, default_value_t = 100)]
        loss_bins: usize,
    },
    /// Run the cross-oracle validation suite (series vs Monte Carlo,
    /// boundary values, measure-change identities).
    Validate {
        /// Run with impossible tolerances; every check must then fail.
        #[arg(long, hide = true)]
        self_test: bool,
    },
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Json(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match run_inner(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.mc.seed = seed;
    }
    if let Some(paths) = cli.paths {
        cfg.mc.paths = paths;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if let Some(fmt) = cli.format {
        cfg.output.format = match fmt {
            FormatArg::Csv => FileFormat::Csv,
            FormatArg::Tsv => FileFormat::Tsv,
        };
    }
    Ok(cfg)
}

fn install_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // first caller wins; later attempts only matter in tests
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn run_inner(cli: Cli) -> Result<i32> {
    install_threads(cli.threads);
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Price => cmd_price(&cfg),
        Command::Simulate => cmd_simulate(&cfg, cli.strict_divergence),
        Command::Sweep { axis, from, to, steps } => cmd_sweep(&cfg, *axis, *from, *to, *steps),
        Command::Map { rho_cells, mu_cells, cell_paths, no_timing } => {
            cmd_map(&cfg, *rho_cells, *mu_cells, *cell_paths, *no_timing)
        }
        Command::Timing { rhos } => cmd_timing(&cfg, rhos.as_deref()),
        Command::Surface { time_bins, loss_bins } => cmd_surface(&cfg, *time_bins, *loss_bins),
        Command::Validate { self_test } => {
            let scale = if *self_test { 0.0 } else { 1.0 };
            let checks = run_validation(scale);
            let mut ok = true;
            for c in &checks {
                println!("{}", c.render());
                ok &= c.pass;
            }
            println!(
                "{} of {} checks passed",
                checks.iter().filter(|c| c.pass).count(),
                checks.len()
            );
            Ok(if ok { EXIT_OK } else { EXIT_VALIDATION })
        }
    }
}

fn cmd_price(cfg: &RunConfig) -> Result<i32> {
    let tranches = cfg.tranches.resolve()?;
    let ctl = SeriesControl::default();
    let quad = QuadControl::default();
    println!("analytic tranche prices  (maturity {}y, rate {})", cfg.contract.maturity(), cfg.contract.rate());
    println!("{:>6} {:>6} {:>14} {:>14} {:>12}", "a", "d", "defPV [bp]", "premPV1bp", "spread [bp]");
    for tr in &tranches {
        let d = def_pv(tr, &cfg.contract, &cfg.model, &ctl, &quad)?;
        let p = prem_pv_1bp(tr, &cfg.contract, &cfg.model, &ctl, &quad)?;
        let s = fair_spread(d, p)?;
        println!(
            "{:>6.2} {:>6.2} {:>14.4} {:>14.6} {:>12.4}",
            tr.attachment(),
            tr.detachment(),
            d * BP,
            p,
            s
        );
    }
    Ok(EXIT_OK)
}

fn divergence_warning(mp: &MeasurePair) -> bool {
    let pb = phase_boundary(mp);
    if !pb.finite {
        eprintln!(
            "warning: divergent measure change: altered mean jump {:.4} is not above half the \
             real mean jump {:.4} (margin 2 lambda - lambda' = {:.4} <= 0); the reweighted \
             estimator has infinite variance",
            mp.altered.mu(),
            mp.real.mu(),
            pb.margin
        );
    }
    !pb.finite
}

fn cmd_simulate(cfg: &RunConfig, strict: bool) -> Result<i32> {
    let sim = cfg.sim_config()?;
    let divergent = divergence_warning(&sim.measure_pair());
    let res = run_simulation(&sim)?;
    let ctl = SeriesControl::default();
    let overlay = sim.contract.rate() == 0.0 && sim.loss_spec == crate::model::LossSpec::Exponential;
    println!(
        "simulated {} paths, seed {}  (rho'={}, 1/lambda'={:.4})",
        res.n_paths,
        res.seed,
        sim.altered.rho(),
        sim.altered.mu()
    );
    println!(
        "{:>6} {:>6} {:>13} {:>10} {:>13} {:>11} {:>13}",
        "a", "d", "def [bp]", "se [bp]", "prem", "se", "analytic def"
    );
    for ts in &res.stats {
        let analytic = if overlay {
            format!("{:>13.4}", expected_def(&ts.tranche, sim.contract.maturity(), &sim.real, &ctl)? * BP)
        } else {
            format!("{:>13}", "-")
        };
        println!(
            "{:>6.2} {:>6.2} {:>13.4} {:>10.4} {:>13.6} {:>11.6} {}",
            ts.tranche.attachment(),
            ts.tranche.detachment(),
            ts.def_leg.weighted_mean() * BP,
            ts.def_leg.std_error() * BP,
            ts.prem_leg.weighted_mean(),
            ts.prem_leg.std_error(),
            analytic
        );
    }
    println!(
        "mean path weight {:.6} +- {:.6}  (estimates 1)",
        res.weights.weighted_mean(),
        res.weights.std_error()
    );
    if divergent && strict {
        return Ok(EXIT_DIVERGENT);
    }
    Ok(EXIT_OK)
}

fn cmd_sweep(
    cfg: &RunConfig,
    axis: AxisArg,
    from: Option<f64>,
    to: Option<f64>,
    steps: usize,
) -> Result<i32> {
    if steps < 2 {
        return Err(Error::Config("sweep needs at least 2 steps".into()));
    }
    let (axis, lo_default, hi_default) = match axis {
        AxisArg::MeanJump => (SweepAxis::MeanJump, 0.10, 1.0),
        AxisArg::Intensity => (SweepAxis::Intensity, 0.05, 0.5),
    };
    let lo = from.unwrap_or(lo_default);
    let hi = to.unwrap_or(hi_default);
    if lo.is_nan() || hi.is_nan() || lo <= 0.0 || hi <= lo {
        return Err(Error::Config(format!("invalid sweep range [{lo}, {hi}]")));
    }
    let values: Vec<f64> = (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect();
    let sim = cfg.sim_config()?;
    let sweep = sweep_1d(axis, &values, &sim)?;
    let files = write_sweep_files(&cfg.output.dir, &sweep)?;
    for (t, tr) in sweep.tranches.iter().enumerate() {
        let best = sweep
            .points
            .iter()
            .min_by(|a, b| a.per_tranche[t].def_sd.total_cmp(&b.per_tranche[t].def_sd))
            .expect("nonempty sweep");
        println!(
            "tranche {:>12}: sd(Xdef) minimal at {} = {:.4} ({:.2} bp)",
            tr.label(),
            sweep.axis.label(),
            best.value,
            best.per_tranche[t].def_sd * BP
        );
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(EXIT_OK)
}

fn cmd_map(
    cfg: &RunConfig,
    rho_cells: usize,
    mu_cells: usize,
    cell_paths: Option<u64>,
    no_timing: bool,
) -> Result<i32> {
    let sim = cfg.sim_config()?;
    let spec = MapSpec {
        rho_ratios: (1..=rho_cells).map(|i| i as f64).collect(),
        mu_ratios: (1..=mu_cells).map(|i| i as f64).collect(),
        n_paths: cell_paths.unwrap_or(100_000),
        seed: cfg.mc.seed,
    };
    let timing = if no_timing {
        None
    } else {
        // long samples and a median over repetitions keep the fit clear of
        // the scheduler-tick granularity of the process CPU clock
        let samples = measure_timing_reps(&sim, &[0.05, 0.5, 1.0, 2.0, 4.0, 6.0], 2_000_000, 3)?;
        let tm = fit_timing(&samples)?;
        println!(
            "cost model: t = {:.4} + {:.4} rho'  (R^2 = {:.5})",
            tm.c, tm.b, tm.r_squared
        );
        Some(tm)
    };
    let map = sweep_2d(&spec, &sim, timing.as_ref())?;
    println!(
        "{:>6} {:>6} {:>10} {:>8} {:>8} {:>8} {:>10} {:>8} {:>8}",
        "a", "d", "G_num", "rho'", "1/lam'", "G_time", "rho'", "1/lam'", ""
    );
    for o in &map.optima {
        let g = o.g_num.as_ref();
        let t = o.g_time.as_ref();
        println!(
            "{:>6.2} {:>6.2} {:>10.2} {:>8.3} {:>8.3} {:>8} {:>10} {:>8}",
            o.tranche.attachment(),
            o.tranche.detachment(),
            g.map_or(f64::NAN, |o| o.value),
            g.map_or(f64::NAN, |o| o.rho_alt),
            g.map_or(f64::NAN, |o| o.mu_alt),
            t.map_or("-".into(), |o| format!("{:.2}", o.value)),
            t.map_or("-".into(), |o| format!("{:.3}", o.rho_alt)),
            t.map_or("-".into(), |o| format!("{:.3}", o.mu_alt)),
        );
    }
    let files = write_map_files(&cfg.output.dir, &map, cfg.output.format.delimiter())?;
    println!("wrote {} files to {}", files.len(), cfg.output.dir.display());
    Ok(EXIT_OK)
}

fn cmd_timing(cfg: &RunConfig, rhos: Option<&str>) -> Result<i32> {
    let rhos: Vec<f64> = match rhos {
        Some(list) => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad intensity {s:?}: {e}")))
            })
            .collect::<Result<_>>()?,
        None => vec![0.05, 0.5, 1.0, 2.0, 4.0, 6.0],
    };
    let sim = cfg.sim_config()?;
    let n_paths = cfg.mc.paths;
    let samples = measure_timing_reps(&sim, &rhos, n_paths, 3)?;
    let tm = fit_timing(&samples)?;
    for (rho, secs) in &samples {
        println!("rho' = {rho:>6.2}: {secs:>8.3} s");
    }
    println!(
        "fit over {} paths: t = {:.4} + {:.4} rho'   R^2 = {:.6}",
        n_paths, tm.c, tm.b, tm.r_squared
    );
    let path = write_timing_file(&cfg.output.dir, &samples, &tm, cfg.mc.seed, n_paths)?;
    println!("wrote {}", path.display());
    Ok(EXIT_OK)
}

fn cmd_surface(cfg: &RunConfig, time_bins: usize, loss_bins: usize) -> Result<i32> {
    let sim = cfg.sim_config()?;
    let surf = loss_surface(&sim, &SurfaceSpec { time_bins, loss_bins })?;
    std::fs::create_dir_all(&cfg.output.dir)?;
    let path = cfg.output.dir.join("loss_surface.dat");
    let mut out = String::new();
    out.push_str(&format!(
        "# generated by cdo-pricer v{} seed={} paths={}\n",
        env!("CARGO_PKG_VERSION"),
        sim.seed,
        sim.n_paths
    ));
    out.push_str("# rows: time bins (right edge), columns: loss bins; zero-loss mass excluded\n");
    for t in 0..surf.time_bins {
        out.push_str(&format!("{:.4}", surf.time_edges[t + 1]));
        for l in 0..surf.loss_bins {
            out.push_str(&format!(" {:.6e}", surf.prob(t, l)));
        }
        out.push('\n');
    }
    std::fs::write(&path, out)?;
    println!(
        "wrote {} ({} x {} bins, terminal nonzero-loss mass {:.4})",
        path.display(),
        time_bins,
        loss_bins,
        surf.column_mass(time_bins - 1)
    );
    Ok(EXIT_OK)
}

/// One validation check outcome.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn render(&self) -> String {
        format!(
            "[{}] {:<34} measured {: >12.4e}  tol {: >9.2e}  {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance,
            self.detail
        )
    }
}

fn check(name: &'static str, measured: f64, tolerance: f64, detail: String) -> CheckResult {
    CheckResult { name, pass: measured.abs() <= tolerance, measured, tolerance, detail }
}

/// Cross-oracle validation suite. `tol_scale` multiplies every tolerance;
/// 1 is the shipped baseline, 0 forces every check to fail (harness
/// self-test).
pub fn run_validation(tol_scale: f64) -> Vec<CheckResult> {
    let params = ModelParams::new(0.05, 10.0).expect("params");
    let contract = crate::model::Contract::new(5.0, 0.0, 4).expect("contract");
    let ctl = SeriesControl::default();
    let quad = QuadControl::default();
    let tranches = crate::model::standard_tranches();
    let m = contract.maturity();
    let mut checks = Vec::new();

    // boundary values of the first-passage transform
    let v = phi(0.5, 0.0, 0.03, &params, &ctl).expect("phi");
    checks.push(check("phi boundary M=0", v, 1e-15 * tol_scale, "phi(h,0) = 0".into()));
    let limit = 0.625 * -(-0.4f64).exp_m1();
    let v = phi(0.0, 5.0, 0.03, &params, &ctl).expect("phi") - limit;
    checks.push(check(
        "phi boundary h=0",
        v,
        1e-10 * tol_scale,
        "continuous extension at the origin".into(),
    ));

    // zero-rate series consistency across a grid
    let mut worst: f64 = 0.0;
    for i in 1..=10 {
        for j in 1..=10 {
            let h = 0.1 * f64::from(i);
            let hm = 0.5 * f64::from(j);
            let a = phi(h, hm, 0.0, &params, &ctl).expect("phi");
            let b = phi0(h, hm, &params, &ctl).expect("phi0");
            worst = worst.max((a - b).abs());
        }
    }
    checks.push(check(
        "phi vs phi0 at r=0",
        worst,
        2.0 * ctl.abs_tol * tol_scale,
        "10x10 grid of (h, M)".into(),
    ));

    // interior PDE residual, second-order convergence under grid halving
    let residual = |step: f64| -> f64 {
        let r = 0.03;
        let tight = SeriesControl { abs_tol: 1e-14, ..ctl };
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let h = 0.3 + 0.2 * f64::from(i);
                let hm = 1.0 + 1.25 * f64::from(j);
                let f = |dh: f64, dm: f64| phi(h + dh, hm + dm, r, &params, &tight).expect("phi");
                let mixed = (f(step, step) - f(-step, step) - f(step, -step) + f(-step, -step))
                    / (4.0 * step * step);
                let dm = (f(0.0, step) - f(0.0, -step)) / (2.0 * step);
                let dh = (f(step, 0.0) - f(-step, 0.0)) / (2.0 * step);
                worst = worst
                    .max((mixed + 10.0 * dm + (0.05 + r) * dh + 10.0 * r * f(0.0, 0.0)).abs());
            }
        }
        worst
    };
    let coarse = residual(0.02);
    let fine = residual(0.01);
    checks.push(check(
        "passage PDE residual",
        fine,
        (coarse / 2.5).max(1e-9) * tol_scale,
        format!("grid halving: {coarse:.2e} -> {fine:.2e}"),
    ));

    // closed forms for the index tranche
    let ix = Tranche::new(0.0, 1.0).expect("tranche");
    let d = def_pv(&ix, &contract, &params, &ctl, &quad).expect("def_pv");
    let d_expect = -(-0.25f64 / 11.0).exp_m1();
    checks.push(check(
        "index defPV closed form",
        d / d_expect - 1.0,
        1e-7 * tol_scale,
        format!("{:.4} bp", d * BP),
    ));
    let p = prem_pv_1bp(&ix, &contract, &params, &ctl, &quad).expect("prem_pv");
    checks.push(check(
        "index premPV closed form",
        p / (d_expect * 220.0) - 1.0,
        1e-7 * tol_scale,
        format!("{p:.6}"),
    ));

    // gamma-slice series vs transform quadrature, every preset tranche
    let mut worst: f64 = 0.0;
    for tr in &tranches {
        let series = expected_def(tr, m, &params, &ctl).expect("series");
        let transform = def_pv(tr, &contract, &params, &ctl, &quad).expect("def_pv");
        worst = worst.max((series / transform - 1.0).abs());
    }
    checks.push(check(
        "series vs transform defPV",
        worst,
        1e-6 * tol_scale,
        "all preset tranches".into(),
    ));

    // Monte Carlo vs analytic, unweighted and reweighted
    let sim = SimConfig {
        n_paths: 400_000,
        seed: 20240607,
        chunk_size: 65_536,
        real: params,
        altered: params,
        contract,
        tranches: tranches.clone(),
        loss_spec: crate::model::LossSpec::Exponential,
    };
    let res = run_simulation(&sim).expect("simulation");
    let mut worst_se: f64 = 0.0;
    for ts in &res.stats {
        let analytic = expected_def(&ts.tranche, m, &params, &ctl).expect("series");
        worst_se = worst_se
            .max((ts.def_leg.weighted_mean() - analytic).abs() / ts.def_leg.std_error().max(1e-300));
    }
    checks.push(check(
        "unweighted MC vs analytic",
        worst_se,
        4.0 * tol_scale,
        "max deviation in standard errors".into(),
    ));

    let mut sim_rw = sim.clone();
    sim_rw.altered = ModelParams::new(0.25, 5.0).expect("params");
    let res_rw = run_simulation(&sim_rw).expect("simulation");
    let mut worst_se: f64 = 0.0;
    for ts in &res_rw.stats {
        let analytic = expected_def(&ts.tranche, m, &params, &ctl).expect("series");
        worst_se = worst_se
            .max((ts.def_leg.weighted_mean() - analytic).abs() / ts.def_leg.std_error().max(1e-300));
    }
    checks.push(check(
        "reweighted MC vs analytic",
        worst_se,
        4.0 * tol_scale,
        format!("rho'={}, lambda'={}", 0.25, 5.0),
    ));
    checks.push(check(
        "mean path weight is 1",
        (res_rw.weights.weighted_mean() - 1.0) / res_rw.weights.std_error().max(1e-300),
        4.0 * tol_scale,
        "in standard errors".into(),
    ));

    // per-path weight audit against the closed form
    let mp = sim_rw.measure_pair();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let path = crate::mc::generate_path(&mut rng, &mp, m).expect("path");
        let audit = path.recompute_weight(m, &mp).expect("audit");
        worst = worst.max((path.rn_weight - audit).abs() / audit);
    }
    checks.push(check(
        "path weight audit",
        worst,
        1e-12 * tol_scale,
        "jump-by-jump vs closed form, 1e4 paths".into(),
    ));

    // analytic vs empirical estimator variance at the published optimum
    let ss = Tranche::new(0.3, 1.0).expect("tranche");
    let mp = MeasurePair::new(params, ModelParams::from_mean_jump(0.05, 0.28).expect("params"));
    let rep = variance_report(&ss, m, &mp, &ctl).expect("variance");
    let mut sim_var = sim.clone();
    sim_var.n_paths = 1_000_000;
    sim_var.altered = mp.altered;
    sim_var.tranches = vec![ss];
    let res_var = run_simulation(&sim_var).expect("simulation");
    let emp = res_var.stats[0].def_leg.weighted_variance();
    checks.push(check(
        "analytic vs empirical variance",
        emp / rep.variance_altered - 1.0,
        0.05 * tol_scale,
        "reweighted default leg, 1e6 paths".into(),
    ));

    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_suite_passes_at_baseline() {
        for c in run_validation(1.0) {
            assert!(c.pass, "{}", c.render());
        }
    }

    #[test]
    fn validation_self_test_reports_failures() {
        let checks = run_validation(0.0);
        let failed = checks.iter().filter(|c| !c.pass).count();
        // every check with a nonzero measurement must fail; only the
        // identically-zero boundary value can survive a zero tolerance
        assert!(failed >= checks.len() - 1, "only {failed} of {} failed", checks.len());
        assert!(failed >= 1);
    }

    #[test]
    fn cli_parses_subcommands_and_globals() {
        use clap::Parser;
        let cli = Cli::parse_from([
            "cdo-pricer",
            "simulate",
            "--paths",
            "1000",
            "--seed",
            "7",
            "--strict-divergence",
        ]);
        assert!(matches!(cli.command, Command::Simulate));
        assert_eq!(cli.paths, Some(1000));
        assert_eq!(cli.seed, Some(7));
        assert!(cli.strict_divergence);
    }
}
