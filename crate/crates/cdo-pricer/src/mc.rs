//! Importance-sampled Monte Carlo engine.
//!
//! Paths of the default process are generated under an altered parameter
//! set; each path carries the likelihood ratio of the real measure with
//! respect to the altered one, accumulated jump by jump during generation.
//! Weighted averages of the discretized leg values then estimate the
//! real-measure present values with a variance set by the altered dynamics.
//!
//! Determinism: paths are drawn in fixed 32-path sub-blocks, each consuming
//! its own stream of a counter-based generator keyed by the run seed, and
//! reduction chunks are aligned to sub-blocks. Results are therefore
//! bit-identical for a fixed `(seed, n_paths, chunk_size)` regardless of
//! thread count, and changing the chunk size only reorders floating-point
//! reductions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{loss_from_default_unchecked, Contract, LossSpec, ModelParams, Tranche};
use crate::reweight::{self, MeasurePair};
use crate::stats::WeightedStats;

/// One simulated scenario: ordered jump times, jump sizes and the
/// accumulated likelihood-ratio weight.
#[derive(Debug, Clone, Default)]
pub struct Path {
    /// Strictly increasing jump times in `(0, M)`.
    pub jump_times: Vec<f64>,
    /// Positive jump sizes of the default process.
    pub jump_sizes: Vec<f64>,
    /// Likelihood ratio dP/dP' of the path statistics, accumulated
    /// multiplicatively during generation.
    pub rn_weight: f64,
}

impl Path {
    pub fn len(&self) -> usize {
        self.jump_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jump_times.is_empty()
    }

    /// Terminal default level: the sum of all jump sizes.
    pub fn total_default(&self) -> f64 {
        self.jump_sizes.iter().sum()
    }

    /// Closed-form recomputation of the weight from the path totals; used
    /// to audit the jump-by-jump accumulation.
    pub fn recompute_weight(&self, m: f64, mp: &MeasurePair) -> Result<f64> {
        reweight::rn_weight(self.len() as u64, self.total_default(), m, mp)
    }
}

/// Paths drawn consecutively from one random stream; reduction chunks are
/// aligned to this unit so the draw consumed by a path never depends on the
/// chunk size.
pub const PATHS_PER_STREAM: u64 = 32;

/// Simulation request.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n_paths: u64,
    pub seed: u64,
    /// Paths per reduction unit, rounded up internally to a multiple of
    /// [`PATHS_PER_STREAM`]; affects only rounding-level grouping of the
    /// floating-point sums.
    pub chunk_size: u64,
    pub real: ModelParams,
    pub altered: ModelParams,
    pub contract: Contract,
    pub tranches: Vec<Tranche>,
    pub loss_spec: LossSpec,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be >= 1".into()));
        }
        if self.chunk_size == 0 {
            return Err(Error::Config("chunk_size must be >= 1".into()));
        }
        Ok(())
    }

    pub fn measure_pair(&self) -> MeasurePair {
        MeasurePair::new(self.real, self.altered)
    }
}

/// Per-tranche weighted statistics of both legs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrancheStats {
    pub tranche: Tranche,
    pub def_leg: WeightedStats,
    pub prem_leg: WeightedStats,
}

/// Outcome of a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub stats: Vec<TrancheStats>,
    /// Statistics of the carried weights themselves (as the observable, at
    /// unit weight); their mean estimates 1 under a correct measure change.
    pub weights: WeightedStats,
    pub n_paths: u64,
    pub seed: u64,
}

/// Jump sampler under the altered measure with jump-by-jump weight
/// accumulation.
pub struct PathGenerator {
    m: f64,
    arrival: Exp<f64>,
    size: Exp<f64>,
    ln_jump_ratio: f64,
    d_rho: f64,
    d_lambda: f64,
    /// Weight of a jump-free path, `exp(-(rho - rho') M)`.
    w_empty: f64,
}

impl PathGenerator {
    pub fn new(mp: &MeasurePair, m: f64) -> Result<Self> {
        if !m.is_finite() || m <= 0.0 {
            return Err(Error::Domain(format!("horizon must be positive, got {m}")));
        }
        let arrival = Exp::new(mp.altered.rho())
            .map_err(|e| Error::Domain(format!("arrival rate: {e}")))?;
        let size = Exp::new(mp.altered.lambda())
            .map_err(|e| Error::Domain(format!("jump size rate: {e}")))?;
        let d_rho = mp.real.rho() - mp.altered.rho();
        Ok(Self {
            m,
            arrival,
            size,
            ln_jump_ratio: (mp.real.rho() * mp.real.lambda()
                / (mp.altered.rho() * mp.altered.lambda()))
            .ln(),
            d_rho,
            d_lambda: mp.real.lambda() - mp.altered.lambda(),
            w_empty: (-d_rho * m).exp(),
        })
    }

    /// Fill `path` with a fresh scenario drawn from `rng`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, path: &mut Path) {
        path.jump_times.clear();
        path.jump_sizes.clear();
        let mut t = 0.0;
        let mut t_prev = 0.0;
        let mut ln_w = 0.0;
        loop {
            t += self.arrival.sample(rng);
            if t >= self.m {
                break;
            }
            let j = self.size.sample(rng);
            ln_w += self.ln_jump_ratio - self.d_rho * (t - t_prev) - self.d_lambda * j;
            t_prev = t;
            path.jump_times.push(t);
            path.jump_sizes.push(j);
        }
        if path.jump_times.is_empty() {
            path.rn_weight = self.w_empty;
            return;
        }
        // no further events between the last jump and maturity
        ln_w -= self.d_rho * (self.m - t_prev);
        path.rn_weight = ln_w.exp();
    }
}

/// Generate one path on a caller-provided random stream.
pub fn generate_path<R: Rng + ?Sized>(rng: &mut R, mp: &MeasurePair, m: f64) -> Result<Path> {
    let gen = PathGenerator::new(mp, m)?;
    let mut path = Path::default();
    gen.sample_into(rng, &mut path);
    Ok(path)
}

/// Payment-date discounting precomputed for a contract.
#[derive(Debug, Clone)]
pub struct ValuationGrid {
    k_max: usize,
    dt: f64,
    /// `disc[k] = exp(-r t_k)`, index 0 unused.
    disc: Vec<f64>,
    /// `prefix[k] = sum_{j<=k} disc[j]`, `prefix[0] = 0`.
    prefix: Vec<f64>,
}

impl ValuationGrid {
    pub fn new(contract: &Contract) -> Self {
        let k_max = contract.grid_len();
        let dt = contract.grid_dt();
        let mut disc = vec![0.0; k_max + 1];
        let mut prefix = vec![0.0; k_max + 1];
        for k in 1..=k_max {
            disc[k] = (-contract.rate() * dt * k as f64).exp();
            prefix[k] = prefix[k - 1] + disc[k];
        }
        Self { k_max, dt, disc, prefix }
    }

    /// Premium-leg value per unit spread of an untouched unit-width
    /// tranche: `dt sum_k disc[k]`.
    pub fn unit_annuity(&self) -> f64 {
        self.dt * self.prefix[self.k_max]
    }

    #[inline]
    fn grid_index(&self, t: f64) -> usize {
        ((t / self.dt).ceil() as usize).clamp(1, self.k_max)
    }
}

/// Grid-ready jump data shared by all tranches of one path: the payment
/// date covering each jump and the post-jump portfolio loss.
fn build_events(path: &Path, grid: &ValuationGrid, spec: LossSpec, events: &mut Vec<(u32, f64)>) {
    events.clear();
    let mut d_cum = 0.0;
    for (t, j) in path.jump_times.iter().zip(&path.jump_sizes) {
        d_cum += j;
        events.push((grid.grid_index(*t) as u32, loss_from_default_unchecked(d_cum, spec)));
    }
}

/// Discretized leg values for one path, all tranches at once:
///
/// ```text
/// Xdef  = sum_k exp(-r t_k) (loss_k - loss_{k-1})
/// Xprem = dt sum_k exp(-r t_k) ON_k
/// ```
fn value_events(
    events: &[(u32, f64)],
    grid: &ValuationGrid,
    tranches: &[Tranche],
    out: &mut [(f64, f64)],
) {
    let s_end = grid.prefix[grid.k_max];
    for (tr, slot) in tranches.iter().zip(out.iter_mut()) {
        if events.is_empty() {
            *slot = (0.0, grid.dt * tr.width() * s_end);
            continue;
        }
        let mut xdef = 0.0;
        let mut loss_sum = 0.0;
        let mut prev_ell = 0.0;
        let mut prev_k = 1usize;
        for &(k, l) in events {
            let k = k as usize;
            let ell = tr.loss_unchecked(l);
            loss_sum += prev_ell * (grid.prefix[k - 1] - grid.prefix[prev_k - 1]);
            xdef += grid.disc[k] * (ell - prev_ell);
            prev_ell = ell;
            prev_k = k;
        }
        loss_sum += prev_ell * (s_end - grid.prefix[prev_k - 1]);
        *slot = (xdef, grid.dt * (tr.width() * s_end - loss_sum));
    }
}

/// Leg values interleaved per tranche: `[def_0, prem_0, def_1, prem_1, ..]`.
/// `annuities[t]` must hold the untouched-tranche premium value.
fn value_events_flat(
    events: &[(u32, f64)],
    grid: &ValuationGrid,
    tranches: &[Tranche],
    annuities: &[f64],
    out: &mut [f64],
) {
    if events.is_empty() {
        for (t, ann) in annuities.iter().enumerate() {
            out[2 * t] = 0.0;
            out[2 * t + 1] = *ann;
        }
        return;
    }
    let s_end = grid.prefix[grid.k_max];
    for (t, tr) in tranches.iter().enumerate() {
        let mut xdef = 0.0;
        let mut loss_sum = 0.0;
        let mut prev_ell = 0.0;
        let mut prev_k = 1usize;
        for &(k, l) in events {
            let k = k as usize;
            let ell = tr.loss_unchecked(l);
            loss_sum += prev_ell * (grid.prefix[k - 1] - grid.prefix[prev_k - 1]);
            xdef += grid.disc[k] * (ell - prev_ell);
            prev_ell = ell;
            prev_k = k;
        }
        loss_sum += prev_ell * (s_end - grid.prefix[prev_k - 1]);
        out[2 * t] = xdef;
        out[2 * t + 1] = grid.dt * (tr.width() * s_end - loss_sum);
    }
}

/// Value one path on the contract's payment grid, returning per-tranche
/// `(Xdef, Xprem)`.
pub fn value_path(
    path: &Path,
    tranches: &[Tranche],
    contract: &Contract,
    spec: LossSpec,
) -> Vec<(f64, f64)> {
    let grid = ValuationGrid::new(contract);
    let mut events = Vec::with_capacity(path.len());
    build_events(path, &grid, spec, &mut events);
    let mut out = vec![(0.0, 0.0); tranches.len()];
    value_events(&events, &grid, tranches, &mut out);
    out
}

/// Flat per-chunk sums: `[sum wx | sum (wx)^2 | sum x | sum x^2]`, each
/// block holding one slot per tranche leg.
struct RawSums {
    n_legs: usize,
    sums: Vec<f64>,
}

impl RawSums {
    fn new(n_legs: usize) -> Self {
        Self { n_legs, sums: vec![0.0; 4 * n_legs] }
    }

    fn reset(&mut self) {
        self.sums.fill(0.0);
    }

    #[inline]
    fn push(&mut self, vals: &[f64], w: f64) {
        let n = self.n_legs;
        debug_assert_eq!(vals.len(), n);
        let (swx, rest) = self.sums.split_at_mut(n);
        let (swx2, rest) = rest.split_at_mut(n);
        let (sx, sx2) = rest.split_at_mut(n);
        for (((&x, a), b), (c, d)) in vals
            .iter()
            .zip(swx.iter_mut())
            .zip(swx2.iter_mut())
            .zip(sx.iter_mut().zip(sx2.iter_mut()))
        {
            let wx = w * x;
            *a += wx;
            *b += wx * wx;
            *c += x;
            *d += x * x;
        }
    }

    fn leg(&self, i: usize, n: u64, sw: f64) -> WeightedStats {
        let m = self.n_legs;
        WeightedStats::from_sums(
            n,
            self.sums[i],
            self.sums[m + i],
            self.sums[2 * m + i],
            self.sums[3 * m + i],
            sw,
        )
    }
}

struct GroupAcc {
    legs: Vec<WeightedStats>,
    weights: WeightedStats,
}

/// Iterate paths of `[lo, hi)` in stream order, reusing one generator per
/// 32-path sub-block. `lo` must be sub-block aligned (the final group may
/// end mid-block at `n_paths`).
fn for_each_path<F: FnMut(&Path)>(seed: u64, lo: u64, hi: u64, gen: &PathGenerator, mut visit: F) {
    let template = ChaCha8Rng::seed_from_u64(seed);
    let mut path = Path::default();
    let mut i = lo;
    while i < hi {
        let mut rng = template.clone();
        rng.set_stream(i / PATHS_PER_STREAM);
        let block_end = (i - i % PATHS_PER_STREAM + PATHS_PER_STREAM).min(hi);
        while i < block_end {
            gen.sample_into(&mut rng, &mut path);
            visit(&path);
            i += 1;
        }
    }
}

fn simulate_range(cfg: &SimConfig, grid: &ValuationGrid, lo: u64, hi: u64) -> GroupAcc {
    let n_tr = cfg.tranches.len();
    let gen = PathGenerator::new(&cfg.measure_pair(), cfg.contract.maturity())
        .expect("validated config");
    let mut events: Vec<(u32, f64)> = Vec::new();
    let mut vals = vec![0.0; 2 * n_tr];
    let annuities: Vec<f64> =
        cfg.tranches.iter().map(|tr| grid.dt * tr.width() * grid.prefix[grid.k_max]).collect();

    let mut group = GroupAcc {
        legs: vec![WeightedStats::new(); 2 * n_tr],
        weights: WeightedStats::new(),
    };
    let chunk = effective_chunk_size(cfg.chunk_size);
    let mut raw = RawSums::new(2 * n_tr);
    let mut chunk_start = lo;
    while chunk_start < hi {
        let chunk_end = (chunk_start + chunk).min(hi);
        raw.reset();
        let mut sw = 0.0;
        let mut sw2 = 0.0;
        for_each_path(cfg.seed, chunk_start, chunk_end, &gen, |path| {
            build_events(path, grid, cfg.loss_spec, &mut events);
            value_events_flat(&events, grid, &cfg.tranches, &annuities, &mut vals);
            let w = path.rn_weight;
            raw.push(&vals, w);
            sw += w;
            sw2 += w * w;
        });
        let n = chunk_end - chunk_start;
        for (i, acc) in group.legs.iter_mut().enumerate() {
            acc.merge(&raw.leg(i, n, sw));
        }
        group
            .weights
            .merge(&WeightedStats::from_sums(n, sw, sw2, sw, sw2, n as f64));
        chunk_start = chunk_end;
    }
    group
}

/// Reduction chunk size aligned up to whole sub-blocks.
fn effective_chunk_size(chunk_size: u64) -> u64 {
    chunk_size.div_ceil(PATHS_PER_STREAM) * PATHS_PER_STREAM
}

fn group_ranges(n_paths: u64, chunk_size: u64) -> Vec<(u64, u64)> {
    // fixed grouping of whole chunks into at most 512 jobs, independent of
    // the executing thread count
    let chunk = effective_chunk_size(chunk_size);
    let n_chunks = n_paths.div_ceil(chunk);
    let n_groups = n_chunks.min(512);
    let chunks_per_group = n_chunks.div_ceil(n_groups);
    let mut ranges = Vec::with_capacity(n_groups as usize);
    let mut start = 0u64;
    while start < n_paths {
        let end = (start + chunks_per_group * chunk).min(n_paths);
        ranges.push((start, end));
        start = end;
    }
    ranges
}

fn collect_result(cfg: &SimConfig, groups: Vec<GroupAcc>) -> SimResult {
    let n_tr = cfg.tranches.len();
    let mut legs = vec![WeightedStats::new(); 2 * n_tr];
    let mut weights = WeightedStats::new();
    for g in &groups {
        for (acc, part) in legs.iter_mut().zip(&g.legs) {
            acc.merge(part);
        }
        weights.merge(&g.weights);
    }
    let stats = cfg
        .tranches
        .iter()
        .enumerate()
        .map(|(t, tr)| TrancheStats {
            tranche: *tr,
            def_leg: legs[2 * t],
            prem_leg: legs[2 * t + 1],
        })
        .collect();
    SimResult { stats, weights, n_paths: cfg.n_paths, seed: cfg.seed }
}

/// Run the simulation across the available threads.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let grid = ValuationGrid::new(&cfg.contract);
    let groups: Vec<GroupAcc> = group_ranges(cfg.n_paths, cfg.chunk_size)
        .into_par_iter()
        .map(|(lo, hi)| simulate_range(cfg, &grid, lo, hi))
        .collect();
    Ok(collect_result(cfg, groups))
}

/// Run the simulation on the calling thread only; produces bit-identical
/// statistics to [`run_simulation`] and a clean CPU-cost profile.
pub fn run_simulation_serial(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let grid = ValuationGrid::new(&cfg.contract);
    let groups: Vec<GroupAcc> = group_ranges(cfg.n_paths, cfg.chunk_size)
        .into_iter()
        .map(|(lo, hi)| simulate_range(cfg, &grid, lo, hi))
        .collect();
    Ok(collect_result(cfg, groups))
}

/// Binning request for the loss surface.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceSpec {
    pub time_bins: usize,
    pub loss_bins: usize,
}

/// Time-resolved histogram of the portfolio loss over the path ensemble.
/// The zero-loss mass is excluded, so column sums stay at or below one.
#[derive(Debug, Clone)]
pub struct LossSurface {
    pub time_bins: usize,
    pub loss_bins: usize,
    /// Right edges of the time bins.
    pub time_edges: Vec<f64>,
    /// Loss bin edges over (0, 1].
    pub loss_edges: Vec<f64>,
    /// Path-visit probabilities, time-major: `probs[t * loss_bins + l]`.
    pub probs: Vec<f64>,
}

impl LossSurface {
    pub fn prob(&self, t_bin: usize, l_bin: usize) -> f64 {
        self.probs[t_bin * self.loss_bins + l_bin]
    }

    /// Total nonzero-loss probability in one time column.
    pub fn column_mass(&self, t_bin: usize) -> f64 {
        self.probs[t_bin * self.loss_bins..(t_bin + 1) * self.loss_bins].iter().sum()
    }
}

/// Histogram the loss at the right edge of each time bin over a fresh path
/// ensemble drawn with the same seeding discipline as [`run_simulation`].
pub fn loss_surface(cfg: &SimConfig, spec: &SurfaceSpec) -> Result<LossSurface> {
    cfg.validate()?;
    if spec.time_bins == 0 || spec.loss_bins == 0 {
        return Err(Error::Config("surface bins must be >= 1".into()));
    }
    let m = cfg.contract.maturity();
    let tb = spec.time_bins;
    let lb = spec.loss_bins;
    let counts: Vec<u64> = group_ranges(cfg.n_paths, cfg.chunk_size)
        .into_par_iter()
        .map(|(lo, hi)| {
            let gen = PathGenerator::new(&cfg.measure_pair(), m).expect("validated config");
            let mut counts = vec![0u64; tb * lb];
            for_each_path(cfg.seed, lo, hi, &gen, |path| {
                let mut ji = 0;
                let mut d_cum = 0.0;
                let mut l_cur = 0.0;
                for (t_bin, counts_row) in counts.chunks_mut(lb).enumerate() {
                    let edge = m * (t_bin + 1) as f64 / tb as f64;
                    while ji < path.len() && path.jump_times[ji] <= edge {
                        d_cum += path.jump_sizes[ji];
                        ji += 1;
                    }
                    if ji > 0 {
                        l_cur = loss_from_default_unchecked(d_cum, cfg.loss_spec);
                    }
                    if l_cur > 0.0 {
                        let bin = ((l_cur * lb as f64) as usize).min(lb - 1);
                        counts_row[bin] += 1;
                    }
                }
            });
            counts
        })
        .reduce(
            || vec![0u64; tb * lb],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            },
        );
    let norm = 1.0 / cfg.n_paths as f64;
    Ok(LossSurface {
        time_bins: tb,
        loss_bins: lb,
        time_edges: (0..=tb).map(|j| m * j as f64 / tb as f64).collect(),
        loss_edges: (0..=lb).map(|j| j as f64 / lb as f64).collect(),
        probs: counts.into_iter().map(|c| c as f64 * norm).collect(),
    })
}
