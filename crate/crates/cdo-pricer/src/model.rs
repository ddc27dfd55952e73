//! Domain types and tranche cashflow arithmetic for the compound Poisson
//! loss model.
//!
//! The default driver is a compound Poisson process: events arrive with
//! intensity `rho` (events/year) and each event wipes out an exponentially
//! distributed fraction of the portfolio with mean `mu = 1/lambda`. The
//! portfolio loss is a transform of the cumulative default level `D`:
//! exponential (`L = 1 - exp(-D)`) by default, or linear (`L = min(D, 1)`).
//!
//! All values are fractions of total notional; conversion to basis points
//! (x 10^4) happens only in reporting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Basis points per unit notional fraction.
pub const BP: f64 = 1e4;

/// Intensity and jump-size parameters of the default process, for either
/// the real or an altered measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelParams")]
pub struct ModelParams {
    /// Event intensity, events/year.
    rho: f64,
    /// Inverse mean jump size, 1/(fraction of notional).
    lambda: f64,
}

#[derive(Deserialize)]
struct RawModelParams {
    rho: f64,
    lambda: f64,
}

impl TryFrom<RawModelParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawModelParams) -> Result<Self> {
        ModelParams::new(raw.rho, raw.lambda)
    }
}

impl ModelParams {
    pub fn new(rho: f64, lambda: f64) -> Result<Self> {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::Domain(format!("intensity rho must be > 0, got {rho}")));
        }
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::Domain(format!("jump rate lambda must be > 0, got {lambda}")));
        }
        Ok(Self { rho, lambda })
    }

    /// Construct from the mean jump size `mu = 1/lambda`.
    pub fn from_mean_jump(rho: f64, mu: f64) -> Result<Self> {
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::Domain(format!("mean jump size must be > 0, got {mu}")));
        }
        Self::new(rho, 1.0 / mu)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Mean jump size `mu = 1/lambda`, fraction of notional per event.
    pub fn mu(&self) -> f64 {
        1.0 / self.lambda
    }
}

/// Contract-level terms shared by every tranche of a deal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawContract")]
pub struct Contract {
    /// Maturity in years.
    maturity: f64,
    /// Continuously compounded flat discount rate, per year.
    rate: f64,
    /// Payment grid density (4 = quarterly).
    periods_per_year: u32,
}

#[derive(Deserialize)]
struct RawContract {
    maturity: f64,
    rate: f64,
    periods_per_year: u32,
}

impl TryFrom<RawContract> for Contract {
    type Error = Error;

    fn try_from(raw: RawContract) -> Result<Self> {
        Contract::new(raw.maturity, raw.rate, raw.periods_per_year)
    }
}

impl Contract {
    pub fn new(maturity: f64, rate: f64, periods_per_year: u32) -> Result<Self> {
        if !maturity.is_finite() || maturity <= 0.0 {
            return Err(Error::Domain(format!("maturity must be > 0, got {maturity}")));
        }
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::Domain(format!("rate must be >= 0, got {rate}")));
        }
        if periods_per_year == 0 {
            return Err(Error::Domain("periods_per_year must be >= 1".into()));
        }
        Ok(Self { maturity, rate, periods_per_year })
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn periods_per_year(&self) -> u32 {
        self.periods_per_year
    }

    /// Number of payment dates on the equally spaced grid `t_1..t_k = M`.
    pub fn grid_len(&self) -> usize {
        (self.maturity * f64::from(self.periods_per_year)).ceil().max(1.0) as usize
    }

    /// Grid spacing `M / k_max`.
    pub fn grid_dt(&self) -> f64 {
        self.maturity / self.grid_len() as f64
    }
}

/// Attachment/detachment pair with the derived log-levels of the default
/// process at which the loss enters and exhausts the tranche.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct Tranche {
    a: f64,
    d: f64,
    ha: f64,
    hd: f64,
}

impl Tranche {
    pub fn new(a: f64, d: f64) -> Result<Self> {
        if a.is_nan() || !(0.0..1.0).contains(&a) {
            return Err(Error::Domain(format!("attachment must lie in [0,1), got {a}")));
        }
        if d.is_nan() || d <= a || d > 1.0 {
            return Err(Error::Domain(format!("detachment must lie in ({a},1], got {d}")));
        }
        Ok(Self { a, d, ha: log_level(a)?, hd: log_level(d)? })
    }

    pub fn attachment(&self) -> f64 {
        self.a
    }

    pub fn detachment(&self) -> f64 {
        self.d
    }

    /// Log-level of the attachment point, `-ln(1-a)`.
    pub fn ha(&self) -> f64 {
        self.ha
    }

    /// Log-level of the detachment point; `+inf` when `d = 1`.
    pub fn hd(&self) -> f64 {
        self.hd
    }

    /// Tranche width `d - a`.
    pub fn width(&self) -> f64 {
        self.d - self.a
    }

    /// Loss absorbed by this tranche at portfolio loss `l`:
    /// `min(l,d) - min(l,a)`.
    pub fn loss(&self, l: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&l) {
            return Err(Error::Domain(format!("portfolio loss must lie in [0,1], got {l}")));
        }
        Ok(self.loss_unchecked(l))
    }

    #[inline]
    pub(crate) fn loss_unchecked(&self, l: f64) -> f64 {
        l.min(self.d) - l.min(self.a)
    }

    /// Outstanding notional at portfolio loss `l`: `(d - a) - loss(l)`.
    pub fn outstanding(&self, l: f64) -> Result<f64> {
        Ok(self.width() - self.loss(l)?)
    }

    /// Short display form, e.g. `[0.30,1.00]`.
    pub fn label(&self) -> String {
        format!("[{:.2},{:.2}]", self.a, self.d)
    }
}

impl TryFrom<(f64, f64)> for Tranche {
    type Error = Error;

    fn try_from((a, d): (f64, f64)) -> Result<Self> {
        Tranche::new(a, d)
    }
}

impl From<Tranche> for (f64, f64) {
    fn from(t: Tranche) -> Self {
        (t.a, t.d)
    }
}

/// The standard tranche set: equity, three mezzanine slices, senior,
/// super senior and the full index.
pub fn standard_tranches() -> Vec<Tranche> {
    [
        (0.00, 0.03),
        (0.03, 0.07),
        (0.07, 0.10),
        (0.10, 0.15),
        (0.15, 0.30),
        (0.30, 1.00),
        (0.00, 1.00),
    ]
    .into_iter()
    .map(|(a, d)| Tranche::new(a, d).expect("preset tranche"))
    .collect()
}

/// Mapping from the cumulative default level to the portfolio loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossSpec {
    /// `L = 1 - exp(-D)`; keeps the loss in [0,1) for any default level.
    #[default]
    Exponential,
    /// `L = min(D, 1)`.
    Linear,
}

/// Log-level `-ln(1-x)` of a notional fraction; `+inf` at `x = 1`.
pub fn log_level(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("log_level argument must lie in [0,1], got {x}")));
    }
    if x == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-(-x).ln_1p())
}

/// Portfolio loss produced by a cumulative default level `d_level >= 0`.
pub fn loss_from_default(d_level: f64, spec: LossSpec) -> Result<f64> {
    if d_level.is_nan() || d_level < 0.0 {
        return Err(Error::Domain(format!("default level must be >= 0, got {d_level}")));
    }
    Ok(loss_from_default_unchecked(d_level, spec))
}

#[inline]
pub(crate) fn loss_from_default_unchecked(d_level: f64, spec: LossSpec) -> f64 {
    match spec {
        LossSpec::Exponential => -(-d_level).exp_m1(),
        LossSpec::Linear => d_level.min(1.0),
    }
}

/// Fair running spread in basis points for zero-upfront quoting:
/// `10^4 * def_pv / prem_pv_1bp`, with both legs in notional-fraction units.
pub fn fair_spread(def_pv: f64, prem_pv_1bp: f64) -> Result<f64> {
    if prem_pv_1bp == 0.0 {
        return Err(Error::DivisionByZero("premium leg PV is zero".into()));
    }
    if prem_pv_1bp.is_nan() || prem_pv_1bp < 0.0 {
        return Err(Error::Domain(format!(
            "premium leg PV must be positive, got {prem_pv_1bp}"
        )));
    }
    Ok(BP * def_pv / prem_pv_1bp)
}
