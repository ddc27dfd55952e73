//! Parameter sweeps, gain maps and the CPU-cost model.
//!
//! The payoff of a measure change is summarized two ways: the path-count
//! gain `G_num = sigma^2 / sigma'^2` (how many fewer paths reach the same
//! precision) and the wall-cost gain
//! `G_time = G_num * cost(rho) / cost(rho')`, where the per-run cost is
//! linear in the altered intensity, `t = c + b rho'`, because every extra
//! unit of intensity adds proportionally many jumps to generate and value.

use std::fs::File;
use std::io::{BufWriter, Write as IoWrite};
use std::path::Path as FsPath;

use crate::error::{Error, Result};
use crate::mc::{run_simulation, run_simulation_serial, SimConfig};
use crate::model::{ModelParams, Tranche, BP};
use crate::pricer::SeriesControl;
use crate::reweight::{phase_boundary, variance_report};
use crate::LossSpec;

/// Fitted linear CPU-cost model `t = c + b rho'` (seconds per fixed path
/// count as a function of the altered intensity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingModel {
    /// Per-run fixed cost, seconds.
    pub c: f64,
    /// Marginal cost per unit intensity, seconds/(events/year).
    pub b: f64,
    /// Coefficient of determination of the fit.
    pub r_squared: f64,
}

impl TimingModel {
    pub fn cost(&self, rho: f64) -> f64 {
        self.c + self.b * rho
    }
}

/// Path-count gain of a measure change: `sigma^2 / sigma'^2`.
pub fn gain_num(sigma2_base: f64, sigma2_alt: f64) -> Result<f64> {
    if sigma2_alt == 0.0 {
        return Err(Error::DivisionByZero("altered variance is zero".into()));
    }
    if sigma2_base.is_nan() || sigma2_base < 0.0 || sigma2_alt.is_nan() || sigma2_alt < 0.0 {
        return Err(Error::Domain("variances must be nonnegative".into()));
    }
    Ok(sigma2_base / sigma2_alt)
}

/// Computational-time gain: the path-count gain discounted by the CPU cost
/// ratio of simulating at the altered intensity,
/// `G_time = (sigma^2/sigma'^2) (c + b rho) / (c + b rho')`.
/// Reduces to `(sigma^2/sigma'^2) (rho/rho')` for a pure per-jump cost.
pub fn gain_time(
    sigma2_base: f64,
    sigma2_alt: f64,
    tm: &TimingModel,
    rho_base: f64,
    rho_alt: f64,
) -> Result<f64> {
    if !tm.c.is_finite() || !tm.b.is_finite() || (tm.c == 0.0 && tm.b == 0.0) {
        return Err(Error::DegenerateFit("timing model is not fitted".into()));
    }
    let denom = tm.cost(rho_alt);
    if denom == 0.0 {
        return Err(Error::DivisionByZero("altered-cost denominator is zero".into()));
    }
    Ok(gain_num(sigma2_base, sigma2_alt)? * tm.cost(rho_base) / denom)
}

/// Least-squares fit of the linear cost model to `(rho', seconds)` samples.
pub fn fit_timing(samples: &[(f64, f64)]) -> Result<TimingModel> {
    let mut xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if xs.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "timing fit needs >= 3 distinct intensities, got {}",
            xs.len()
        )));
    }
    let n = samples.len() as f64;
    let mean_x = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mean_y = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mean_x).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mean_x) * (s.1 - mean_y)).sum();
    let b = sxy / sxx;
    let c = mean_y - b * mean_x;
    let ss_res: f64 = samples.iter().map(|s| (s.1 - (c + b * s.0)).powi(2)).sum();
    let ss_tot: f64 = samples.iter().map(|s| (s.1 - mean_y).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    // measured costs are nonnegative; shave fit noise at the origin
    Ok(TimingModel { c: c.max(0.0), b: b.max(0.0), r_squared })
}

/// Process CPU time, seconds.
pub fn cpu_time_seconds() -> f64 {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: plain syscall writing into the stack-allocated timespec.
    unsafe {
        libc::clock_gettime(libc::CLOCK_PROCESS_CPUTIME_ID, &mut ts);
    }
    ts.tv_sec as f64 + ts.tv_nsec as f64 * 1e-9
}

/// Measure the single-threaded CPU cost of the engine at each altered
/// intensity, at a fixed path count. Returns `(rho', seconds)` samples.
pub fn measure_timing(base: &SimConfig, rho_alts: &[f64], n_paths: u64) -> Result<Vec<(f64, f64)>> {
    measure_timing_reps(base, rho_alts, n_paths, 1)
}

/// [`measure_timing`] with the median of `reps` repetitions per intensity,
/// damping scheduler-tick quantization of the CPU clock.
pub fn measure_timing_reps(
    base: &SimConfig,
    rho_alts: &[f64],
    n_paths: u64,
    reps: usize,
) -> Result<Vec<(f64, f64)>> {
    if reps == 0 {
        return Err(Error::Config("timing needs at least one repetition".into()));
    }
    // warm-up pass so allocator and code paths are hot
    let mut warm = base.clone();
    warm.n_paths = (n_paths / 50).max(1);
    run_simulation_serial(&warm)?;

    // interleave repetition rounds so slow host periods hit every
    // intensity alike instead of biasing one sample
    let mut times = vec![Vec::with_capacity(reps); rho_alts.len()];
    for _ in 0..reps {
        for (i, &rho_alt) in rho_alts.iter().enumerate() {
            let mut cfg = base.clone();
            cfg.n_paths = n_paths;
            cfg.altered = ModelParams::new(rho_alt, base.real.lambda())?;
            let t0 = cpu_time_seconds();
            run_simulation_serial(&cfg)?;
            times[i].push(cpu_time_seconds() - t0);
        }
    }
    Ok(rho_alts
        .iter()
        .zip(&mut times)
        .map(|(&rho_alt, t)| {
            t.sort_by(f64::total_cmp);
            (rho_alt, t[reps / 2])
        })
        .collect())
}

/// Swept reweighting parameter of a 1-D scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Vary the altered mean jump size `1/lambda'`, intensity fixed.
    MeanJump,
    /// Vary the altered intensity `rho'`, jump size fixed.
    Intensity,
}

impl SweepAxis {
    pub fn label(&self) -> &'static str {
        match self {
            SweepAxis::MeanJump => "mean_jump",
            SweepAxis::Intensity => "intensity",
        }
    }
}

/// Monte Carlo and analytic summaries of one tranche at one sweep point.
#[derive(Debug, Clone)]
pub struct LegCurve {
    pub def_mean: f64,
    pub def_sd: f64,
    pub def_se: f64,
    pub prem_mean: f64,
    pub prem_sd: f64,
    pub prem_se: f64,
    /// Exact default-leg mean (zero-rate exponential runs only).
    pub analytic_def_mean: Option<f64>,
    /// Exact standard deviation of the reweighted default-leg estimator.
    pub analytic_def_sd: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub value: f64,
    pub divergent: bool,
    pub per_tranche: Vec<LegCurve>,
}

#[derive(Debug, Clone)]
pub struct Sweep1d {
    pub axis: SweepAxis,
    pub tranches: Vec<Tranche>,
    pub points: Vec<CurvePoint>,
    pub n_paths: u64,
    pub seed: u64,
}

fn altered_for(axis: SweepAxis, value: f64, real: &ModelParams) -> Result<ModelParams> {
    match axis {
        SweepAxis::MeanJump => ModelParams::from_mean_jump(real.rho(), value),
        SweepAxis::Intensity => ModelParams::new(value, real.lambda()),
    }
}

fn analytic_overlay_applies(cfg: &SimConfig) -> bool {
    cfg.contract.rate() == 0.0 && cfg.loss_spec == LossSpec::Exponential
}

/// Scan one altered parameter, simulating every point with common random
/// numbers and overlaying the closed-form mean and estimator deviation
/// where they exist.
pub fn sweep_1d(axis: SweepAxis, values: &[f64], base: &SimConfig) -> Result<Sweep1d> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let ctl = SeriesControl::default();
    let overlay = analytic_overlay_applies(base);
    let m = base.contract.maturity();
    let mut points = Vec::with_capacity(values.len());
    for &value in values {
        let mut cfg = base.clone();
        cfg.altered = altered_for(axis, value, &base.real)?;
        let mp = cfg.measure_pair();
        let divergent = !phase_boundary(&mp).finite;
        let res = run_simulation(&cfg)?;
        let per_tranche = res
            .stats
            .iter()
            .map(|ts| {
                let (analytic_def_mean, analytic_def_sd) = if overlay {
                    let rep = variance_report(&ts.tranche, m, &mp, &ctl)?;
                    let sd = rep.finite.then(|| rep.variance_altered.sqrt());
                    (Some(rep.mean), sd)
                } else {
                    (None, None)
                };
                Ok(LegCurve {
                    def_mean: ts.def_leg.weighted_mean(),
                    def_sd: ts.def_leg.weighted_sd(),
                    def_se: ts.def_leg.std_error(),
                    prem_mean: ts.prem_leg.weighted_mean(),
                    prem_sd: ts.prem_leg.weighted_sd(),
                    prem_se: ts.prem_leg.std_error(),
                    analytic_def_mean,
                    analytic_def_sd,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        points.push(CurvePoint { value, divergent, per_tranche });
    }
    Ok(Sweep1d {
        axis,
        tranches: base.tranches.clone(),
        points,
        n_paths: base.n_paths,
        seed: base.seed,
    })
}

/// Grid request for a 2-D gain map over the reweighting parameters.
#[derive(Debug, Clone)]
pub struct MapSpec {
    /// Intensity multipliers `rho'/rho`.
    pub rho_ratios: Vec<f64>,
    /// Jump-size multipliers `mu'/mu = lambda/lambda'`.
    pub mu_ratios: Vec<f64>,
    pub n_paths: u64,
    pub seed: u64,
}

impl MapSpec {
    /// The standard 10x10 unit-step ratio grid at 1e5 paths per cell.
    pub fn default_grid(seed: u64) -> Self {
        Self {
            rho_ratios: (1..=10).map(f64::from).collect(),
            mu_ratios: (1..=10).map(f64::from).collect(),
            n_paths: 100_000,
            seed,
        }
    }
}

/// One evaluated map cell.
#[derive(Debug, Clone)]
pub struct MapCell {
    pub rho_alt: f64,
    pub mu_alt: f64,
    pub divergent: bool,
    /// Per-tranche weighted default-leg mean.
    pub mean: Vec<f64>,
    /// Per-tranche weighted default-leg variance.
    pub variance: Vec<f64>,
    pub se: Vec<f64>,
    pub g_num: Vec<f64>,
    pub g_time: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
pub struct Optimum {
    pub rho_alt: f64,
    pub mu_alt: f64,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct TrancheOptima {
    pub tranche: Tranche,
    pub base_mean: f64,
    pub base_sd: f64,
    pub g_num: Option<Optimum>,
    pub g_time: Option<Optimum>,
}

#[derive(Debug, Clone)]
pub struct GainMap {
    pub rho_ratios: Vec<f64>,
    pub mu_ratios: Vec<f64>,
    pub tranches: Vec<Tranche>,
    pub baseline_mean: Vec<f64>,
    pub baseline_variance: Vec<f64>,
    /// Cells in rho-major order: `cells[i * mu_ratios.len() + j]`.
    pub cells: Vec<MapCell>,
    pub optima: Vec<TrancheOptima>,
    pub n_paths: u64,
    pub seed: u64,
}

impl GainMap {
    pub fn cell(&self, rho_idx: usize, mu_idx: usize) -> &MapCell {
        &self.cells[rho_idx * self.mu_ratios.len() + mu_idx]
    }
}

/// Fill a gain map: one baseline run at the real parameters and one run per
/// cell, all with common random numbers so the unaltered cell reproduces
/// the baseline exactly and neighbouring cells stay comparable.
pub fn sweep_2d(
    spec: &MapSpec,
    base: &SimConfig,
    timing: Option<&TimingModel>,
) -> Result<GainMap> {
    if spec.rho_ratios.is_empty() || spec.mu_ratios.is_empty() {
        return Err(Error::Config("map needs at least one ratio per axis".into()));
    }
    if spec.rho_ratios.iter().chain(&spec.mu_ratios).any(|&r| r.is_nan() || r <= 0.0) {
        return Err(Error::Config("map ratios must be positive".into()));
    }
    let mut cfg = base.clone();
    cfg.n_paths = spec.n_paths;
    cfg.seed = spec.seed;
    cfg.altered = cfg.real;
    let baseline = run_simulation(&cfg)?;
    let baseline_mean: Vec<f64> =
        baseline.stats.iter().map(|t| t.def_leg.weighted_mean()).collect();
    let baseline_variance: Vec<f64> =
        baseline.stats.iter().map(|t| t.def_leg.weighted_variance()).collect();

    let rho = base.real.rho();
    let mu = base.real.mu();
    let mut cells = Vec::with_capacity(spec.rho_ratios.len() * spec.mu_ratios.len());
    for &ri in &spec.rho_ratios {
        for &mj in &spec.mu_ratios {
            let rho_alt = rho * ri;
            let mu_alt = mu * mj;
            cfg.altered = ModelParams::from_mean_jump(rho_alt, mu_alt)?;
            let divergent = !phase_boundary(&cfg.measure_pair()).finite;
            let res = run_simulation(&cfg)?;
            let mean: Vec<f64> = res.stats.iter().map(|t| t.def_leg.weighted_mean()).collect();
            let variance: Vec<f64> =
                res.stats.iter().map(|t| t.def_leg.weighted_variance()).collect();
            let se: Vec<f64> = res.stats.iter().map(|t| t.def_leg.std_error()).collect();
            let g_num: Vec<f64> = baseline_variance
                .iter()
                .zip(&variance)
                .map(|(b, v)| if *v > 0.0 { b / v } else { f64::NAN })
                .collect();
            let g_time = timing
                .map(|tm| -> Result<Vec<f64>> {
                    baseline_variance
                        .iter()
                        .zip(&variance)
                        .map(|(b, v)| gain_time(*b, *v, tm, rho, rho_alt))
                        .collect()
                })
                .transpose()?;
            cells.push(MapCell { rho_alt, mu_alt, divergent, mean, variance, se, g_num, g_time });
        }
    }

    let optima = base
        .tranches
        .iter()
        .enumerate()
        .map(|(t, tr)| {
            let pick = |field: &dyn Fn(&MapCell) -> Option<f64>| -> Option<Optimum> {
                let mut best: Option<Optimum> = None;
                for cell in cells.iter().filter(|c| !c.divergent) {
                    if let Some(v) = field(cell) {
                        if v.is_finite() && best.is_none_or(|b| v > b.value) {
                            best =
                                Some(Optimum { rho_alt: cell.rho_alt, mu_alt: cell.mu_alt, value: v });
                        }
                    }
                }
                best
            };
            TrancheOptima {
                tranche: *tr,
                base_mean: baseline_mean[t],
                base_sd: baseline_variance[t].sqrt(),
                g_num: pick(&|c: &MapCell| Some(c.g_num[t])),
                g_time: pick(&|c: &MapCell| c.g_time.as_ref().map(|g| g[t])),
            }
        })
        .collect();

    Ok(GainMap {
        rho_ratios: spec.rho_ratios.clone(),
        mu_ratios: spec.mu_ratios.clone(),
        tranches: base.tranches.clone(),
        baseline_mean,
        baseline_variance,
        cells,
        optima,
        n_paths: spec.n_paths,
        seed: spec.seed,
    })
}

fn provenance(seed: u64, n_paths: u64) -> String {
    format!(
        "# generated by cdo-pricer v{} seed={} paths={}",
        env!("CARGO_PKG_VERSION"),
        seed,
        n_paths
    )
}

/// Write one whitespace-delimited plot file per tranche curve.
pub fn write_sweep_files(dir: &FsPath, sweep: &Sweep1d) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (t, tr) in sweep.tranches.iter().enumerate() {
        let name = format!(
            "sweep_{}_tranche_{:03}_{:03}.dat",
            sweep.axis.label(),
            (tr.attachment() * 100.0).round() as u32,
            (tr.detachment() * 100.0).round() as u32
        );
        let path = dir.join(name);
        let mut f = BufWriter::new(File::create(&path)?);
        writeln!(f, "{}", provenance(sweep.seed, sweep.n_paths))?;
        writeln!(f, "# tranche [{}, {}]", tr.attachment(), tr.detachment())?;
        writeln!(
            f,
            "# value def_mean_bp def_sd_bp def_se_bp prem_mean prem_sd prem_se analytic_def_bp analytic_def_sd_bp divergent"
        )?;
        for p in &sweep.points {
            let c = &p.per_tranche[t];
            writeln!(
                f,
                "{:.6} {:.6} {:.6} {:.6} {:.8} {:.8} {:.8} {} {} {}",
                p.value,
                c.def_mean * BP,
                c.def_sd * BP,
                c.def_se * BP,
                c.prem_mean,
                c.prem_sd,
                c.prem_se,
                c.analytic_def_mean.map_or("nan".into(), |v| format!("{:.6}", v * BP)),
                c.analytic_def_sd.map_or("nan".into(), |v| format!("{:.6}", v * BP)),
                u8::from(p.divergent)
            )?;
        }
        written.push(path);
    }
    Ok(written)
}

fn write_grid(
    f: &mut impl IoWrite,
    map: &GainMap,
    get: impl Fn(&MapCell) -> f64,
) -> Result<()> {
    write!(f, "{:>10}", 0.0)?;
    for r in &map.rho_ratios {
        write!(f, " {r:>10.4}")?;
    }
    writeln!(f)?;
    for (j, mj) in map.mu_ratios.iter().enumerate() {
        write!(f, "{mj:>10.4}")?;
        for i in 0..map.rho_ratios.len() {
            write!(f, " {:>10.4}", get(map.cell(i, j)))?;
        }
        writeln!(f)?;
    }
    Ok(())
}

/// Write per-tranche gain grids (and the optimum table) for a 2-D map.
/// Grid files carry a header row of `rho'/rho` ratios and a header column
/// of `lambda/lambda'` ratios.
pub fn write_map_files(
    dir: &FsPath,
    map: &GainMap,
    delimiter: char,
) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (t, tr) in map.tranches.iter().enumerate() {
        let tag = format!(
            "tranche_{:03}_{:03}",
            (tr.attachment() * 100.0).round() as u32,
            (tr.detachment() * 100.0).round() as u32
        );
        let path = dir.join(format!("map_gnum_{tag}.dat"));
        let mut f = BufWriter::new(File::create(&path)?);
        writeln!(f, "{}", provenance(map.seed, map.n_paths))?;
        writeln!(f, "# G_num grid; header row rho'/rho, header column lambda/lambda'")?;
        write_grid(&mut f, map, |c| c.g_num[t])?;
        written.push(path);

        if map.cells.first().is_some_and(|c| c.g_time.is_some()) {
            let path = dir.join(format!("map_gtime_{tag}.dat"));
            let mut f = BufWriter::new(File::create(&path)?);
            writeln!(f, "{}", provenance(map.seed, map.n_paths))?;
            writeln!(f, "# G_time grid; header row rho'/rho, header column lambda/lambda'")?;
            write_grid(&mut f, map, |c| c.g_time.as_ref().map_or(f64::NAN, |g| g[t]))?;
            written.push(path);
        }
    }

    let d = delimiter;
    let path = dir.join("map_optima.csv");
    let mut f = BufWriter::new(File::create(&path)?);
    writeln!(f, "{}", provenance(map.seed, map.n_paths))?;
    writeln!(
        f,
        "a{d}d{d}def_mean_bp{d}def_sd_bp{d}gnum_rho{d}gnum_mu{d}gnum{d}gtime_rho{d}gtime_mu{d}gtime"
    )?;
    for opt in &map.optima {
        let fmt_opt = |o: &Option<Optimum>| match o {
            Some(o) => format!("{:.4}{d}{:.4}{d}{:.3}", o.rho_alt, o.mu_alt, o.value),
            None => format!("nan{d}nan{d}nan"),
        };
        writeln!(
            f,
            "{:.2}{d}{:.2}{d}{:.3}{d}{:.2}{d}{}{d}{}",
            opt.tranche.attachment(),
            opt.tranche.detachment(),
            opt.base_mean * BP,
            opt.base_sd * BP,
            fmt_opt(&opt.g_num),
            fmt_opt(&opt.g_time),
        )?;
    }
    written.push(path);
    Ok(written)
}

/// Write the timing samples and the fitted cost model.
pub fn write_timing_file(
    dir: &FsPath,
    samples: &[(f64, f64)],
    model: &TimingModel,
    seed: u64,
    n_paths: u64,
) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("timing.dat");
    let mut f = BufWriter::new(File::create(&path)?);
    writeln!(f, "{}", provenance(seed, n_paths))?;
    writeln!(
        f,
        "# fit: t = c + b rho'  c={:.6} b={:.6} r_squared={:.6}",
        model.c, model.b, model.r_squared
    )?;
    writeln!(f, "# rho_alt cpu_seconds")?;
    for (rho, secs) in samples {
        writeln!(f, "{rho:.4} {secs:.6}")?;
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{standard_tranches, Contract};
    use approx::assert_relative_eq;

    fn base_cfg(n_paths: u64) -> SimConfig {
        SimConfig {
            n_paths,
            seed: 4242,
            chunk_size: 16384,
            real: ModelParams::new(0.05, 10.0).unwrap(),
            altered: ModelParams::new(0.05, 10.0).unwrap(),
            contract: Contract::new(5.0, 0.0, 4).unwrap(),
            tranches: standard_tranches(),
            loss_spec: LossSpec::Exponential,
        }
    }

    #[test]
    fn gain_num_basics() {
        assert_relative_eq!(gain_num(2.0, 2.0).unwrap(), 1.0);
        assert_relative_eq!(gain_num(4.0, 1.0).unwrap(), 4.0);
        assert!(gain_num(1.0, 0.0).is_err());
    }

    #[test]
    fn gain_time_arithmetic() {
        // pure per-jump cost: reduces to the intensity ratio
        let tm = TimingModel { c: 0.0, b: 2.0, r_squared: 1.0 };
        assert_relative_eq!(gain_time(4.0, 1.0, &tm, 0.05, 0.10).unwrap(), 2.0);
        // equal intensities: equals the path gain
        assert_relative_eq!(gain_time(4.0, 1.0, &tm, 0.05, 0.05).unwrap(), 4.0);
        let flat = TimingModel { c: 0.0, b: 0.0, r_squared: 1.0 };
        assert!(gain_time(4.0, 1.0, &flat, 0.05, 0.1).is_err());
    }

    #[test]
    fn fit_timing_recovers_exact_line() {
        let samples: Vec<(f64, f64)> =
            [0.05, 0.5, 1.0, 2.0, 4.0].iter().map(|&x| (x, 1.1 + 5.57 * x)).collect();
        let tm = fit_timing(&samples).unwrap();
        assert_relative_eq!(tm.c, 1.1, max_relative = 1e-10);
        assert_relative_eq!(tm.b, 5.57, max_relative = 1e-10);
        assert!(tm.r_squared > 0.999999);
    }

    #[test]
    fn fit_timing_refuses_degenerate_designs() {
        assert!(fit_timing(&[(0.05, 1.0), (0.5, 2.0)]).is_err());
        assert!(fit_timing(&[(0.5, 1.0), (0.5, 2.0), (0.5, 3.0)]).is_err());
    }

    #[test]
    fn sweep_1d_shapes_and_overlays() {
        let cfg = base_cfg(20_000);
        let values = [0.1, 0.28, 0.5];
        let sweep = sweep_1d(SweepAxis::MeanJump, &values, &cfg).unwrap();
        assert_eq!(sweep.points.len(), 3);
        for p in &sweep.points {
            assert!(!p.divergent);
            assert_eq!(p.per_tranche.len(), 7);
            for c in &p.per_tranche {
                // zero rate + exponential spec: overlays must be present
                let mean = c.analytic_def_mean.unwrap();
                assert!(c.analytic_def_sd.unwrap() > 0.0);
                assert!((c.def_mean - mean).abs() <= 6.0 * c.def_se.max(1e-9));
            }
        }
    }

    #[test]
    fn sweep_1d_flags_divergent_values() {
        let cfg = base_cfg(5_000);
        let sweep = sweep_1d(SweepAxis::MeanJump, &[0.04], &cfg).unwrap();
        assert!(sweep.points[0].divergent);
        assert!(sweep.points[0].per_tranche[5].analytic_def_sd.is_none());
    }

    #[test]
    fn map_unaltered_cell_gains_exactly_one() {
        let cfg = base_cfg(20_000);
        let spec = MapSpec {
            rho_ratios: vec![1.0, 3.0],
            mu_ratios: vec![1.0, 3.0],
            n_paths: 20_000,
            seed: 4242,
        };
        let map = sweep_2d(&spec, &cfg, None).unwrap();
        for g in &map.cell(0, 0).g_num {
            assert_eq!(*g, 1.0, "self-comparison of the unaltered cell");
        }
        assert_eq!(map.cells.len(), 4);
        assert!(map.optima.iter().all(|o| o.g_num.is_some()));
        assert!(map.optima.iter().all(|o| o.g_time.is_none()));
    }

    #[test]
    fn map_with_timing_keeps_gtime_below_gnum_at_higher_intensity() {
        let cfg = base_cfg(20_000);
        let spec = MapSpec {
            rho_ratios: vec![1.0, 4.0],
            mu_ratios: vec![1.0, 3.0],
            n_paths: 20_000,
            seed: 4242,
        };
        let tm = TimingModel { c: 1.0, b: 5.0, r_squared: 1.0 };
        let map = sweep_2d(&spec, &cfg, Some(&tm)).unwrap();
        for (i, _) in map.rho_ratios.iter().enumerate().skip(1) {
            for j in 0..map.mu_ratios.len() {
                let cell = map.cell(i, j);
                let gt = cell.g_time.as_ref().unwrap();
                for (g_t, g_n) in gt.iter().zip(&cell.g_num) {
                    assert!(
                        *g_t <= *g_n + 1e-12,
                        "time gain cannot exceed path gain when paths get dearer"
                    );
                }
            }
        }
        assert!(map.optima[5].g_time.is_some());
    }

    #[test]
    fn map_all_divergent_has_no_optima() {
        let cfg = base_cfg(2_000);
        let spec = MapSpec {
            rho_ratios: vec![1.0, 2.0],
            mu_ratios: vec![0.3, 0.4], // altered mean jump below half the real one
            n_paths: 2_000,
            seed: 1,
        };
        let map = sweep_2d(&spec, &cfg, None).unwrap();
        assert!(map.cells.iter().all(|c| c.divergent));
        assert!(map.optima.iter().all(|o| o.g_num.is_none()));
    }

    #[test]
    fn file_writers_emit_provenance() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = base_cfg(2_000);
        let sweep = sweep_1d(SweepAxis::Intensity, &[0.05, 0.1], &cfg).unwrap();
        let files = write_sweep_files(dir.path(), &sweep).unwrap();
        assert_eq!(files.len(), 7);
        let body = std::fs::read_to_string(&files[0]).unwrap();
        assert!(body.starts_with("# generated by cdo-pricer v"));
        assert!(body.contains("seed=4242"));

        let spec =
            MapSpec { rho_ratios: vec![1.0, 2.0], mu_ratios: vec![1.0], n_paths: 2_000, seed: 7 };
        let tm = TimingModel { c: 1.0, b: 5.0, r_squared: 1.0 };
        let map = sweep_2d(&spec, &cfg, Some(&tm)).unwrap();
        let files = write_map_files(dir.path(), &map, ',').unwrap();
        // per tranche: gnum + gtime grids, plus one optima table
        assert_eq!(files.len(), 15);
        let optima = std::fs::read_to_string(files.last().unwrap()).unwrap();
        assert!(optima.lines().count() >= 9);

        let tf = write_timing_file(
            dir.path(),
            &[(0.05, 1.4), (0.5, 3.9)],
            &TimingModel { c: 1.1, b: 5.57, r_squared: 0.999 },
            7,
            1000,
        )
        .unwrap();
        assert!(std::fs::read_to_string(tf).unwrap().contains("r_squared=0.999"));
    }
}
