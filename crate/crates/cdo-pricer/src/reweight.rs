//! Closed-form diagnostics for the reweighted estimator at zero rate.
//!
//! Simulating under an altered parameter set and reweighting by the
//! likelihood ratio `R` leaves means unchanged but replaces the estimator
//! variance by `var'(R X) = E(R X^2) - (E X)^2`. For the default leg both
//! expectations reduce to sums of integrals of the form
//! `integral e^{-nu h} h^{n-1} dh` against the joint law of the jump count
//! and the terminal default level, so the whole variance surface is
//! available in closed form — including its divergence boundary: the
//! leading integrand decays like `exp(-(2 lambda - lambda') h)`, so the
//! second moment is finite only while `2 lambda - lambda' > 0`, i.e. while
//! the altered mean jump size stays above half the real one.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

/// Regularized lower incomplete gamma with closed domain edges.
fn reg_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        gamma_lr(a, x)
    }
}

/// Regularized upper incomplete gamma with closed domain edges.
fn reg_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else {
        gamma_ur(a, x)
    }
}

use crate::error::{Error, Result};
use crate::model::{ModelParams, Tranche};
use crate::pricer::SeriesControl;
use crate::quad;

/// Real and altered parameter sets of a measure change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurePair {
    pub real: ModelParams,
    pub altered: ModelParams,
}

impl MeasurePair {
    pub fn new(real: ModelParams, altered: ModelParams) -> Self {
        Self { real, altered }
    }

    /// Measure change that leaves the dynamics untouched.
    pub fn identity(real: ModelParams) -> Self {
        Self { real, altered: real }
    }
}

/// Finiteness predicate for the reweighted second moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseBoundary {
    /// Whether the dominant integral converges: `2 lambda - lambda' > 0`.
    pub finite: bool,
    /// Margin `2 lambda - lambda'`; the altered mean jump size crosses the
    /// divergence boundary where this hits zero.
    pub margin: f64,
    /// Margin `2 lambda - lambda' + 1` of the weaker condition that already
    /// keeps the `e^{-h}`-weighted integral finite.
    pub weak_margin: f64,
}

/// Variance of the reweighted default-leg estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceReport {
    /// `E(Xdef)` under the real measure.
    pub mean: f64,
    /// `E(R Xdef^2)`; `+inf` past the divergence boundary.
    pub second_moment_weighted: f64,
    /// `var'(R Xdef) = E(R Xdef^2) - mean^2`.
    pub variance_altered: f64,
    /// Whether the variance is finite.
    pub finite: bool,
    /// Series terms consumed by the second-moment evaluation.
    pub terms_used: usize,
}

/// Likelihood ratio of the real measure with respect to the altered one
/// for a path with `n_jumps` jumps and terminal default level `d_total`:
///
/// ```text
/// R = (rho lambda / (rho' lambda'))^{n} exp(-(rho - rho') M - (lambda - lambda') D)
/// ```
pub fn rn_weight(n_jumps: u64, d_total: f64, m: f64, mp: &MeasurePair) -> Result<f64> {
    if !d_total.is_finite() || d_total < 0.0 {
        return Err(Error::Domain(format!("total default must be >= 0, got {d_total}")));
    }
    if !m.is_finite() || m < 0.0 {
        return Err(Error::Domain(format!("horizon must be >= 0, got {m}")));
    }
    if (n_jumps == 0) != (d_total == 0.0) {
        return Err(Error::Domain(format!(
            "default level must be zero exactly when the jump count is zero (n={n_jumps}, D={d_total})"
        )));
    }
    let (r, a) = (&mp.real, &mp.altered);
    let ln_ratio = (r.rho() * r.lambda() / (a.rho() * a.lambda())).ln();
    let ln_w = n_jumps as f64 * ln_ratio - (r.rho() - a.rho()) * m
        - (r.lambda() - a.lambda()) * d_total;
    Ok(ln_w.exp())
}

/// Joint density of the jump count and the terminal default level:
/// `f(n, h) = exp(-lambda h - rho M) (rho M lambda)^n h^{n-1} / (n! (n-1)!)`.
///
/// The distribution is defective: summed over `n >= 1` and integrated over
/// `h > 0` it carries mass `1 - exp(-rho M)`, the probability of at least
/// one jump.
pub fn joint_density(n: u32, h: f64, m: f64, params: &ModelParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("joint density needs a jump count >= 1".into()));
    }
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::Domain(format!("level must be positive and finite, got {h}")));
    }
    if !m.is_finite() || m <= 0.0 {
        return Err(Error::Domain(format!("horizon must be positive, got {m}")));
    }
    let nf = f64::from(n);
    let ln_f = -params.lambda() * h - params.rho() * m
        + nf * (params.rho() * m * params.lambda()).ln()
        + (nf - 1.0) * h.ln()
        - ln_gamma(nf + 1.0)
        - ln_gamma(nf);
    Ok(ln_f.exp())
}

/// `integral_l^u e^{-nu h} h^{n-1} dh`.
///
/// For `nu > 0` this is `(n-1)!/nu^n [P(n, nu u) - P(n, nu l)]` with the
/// regularized lower incomplete gamma `P`, assembled in log space. A
/// half-infinite integral with `nu <= 0` diverges; that is signalled by a
/// `+inf` return value, not an error.
pub fn gamma_slice(n: u32, nu: f64, l: f64, u: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("gamma_slice needs n >= 1".into()));
    }
    if l.is_nan() || u.is_nan() || l < 0.0 {
        return Err(Error::Domain(format!("invalid slice bounds [{l}, {u}]")));
    }
    if u < l {
        return Err(Error::Domain(format!("inverted slice bounds [{l}, {u}]")));
    }
    if !nu.is_finite() {
        return Err(Error::Domain(format!("invalid decay rate {nu}")));
    }
    if l == u {
        // covers the empty [inf, inf] slice of a detached upper level
        return Ok(0.0);
    }
    let nf = f64::from(n);
    if u.is_infinite() {
        if nu <= 0.0 {
            return Ok(f64::INFINITY);
        }
        let q = reg_q(nf, nu * l);
        return Ok((ln_gamma(nf) - nf * nu.ln() + q.ln()).exp());
    }
    if nu > 0.0 {
        let pl = reg_p(nf, nu * l);
        let delta = if pl < 0.5 {
            reg_p(nf, nu * u) - pl
        } else {
            reg_q(nf, nu * l) - reg_q(nf, nu * u)
        };
        return Ok((ln_gamma(nf) - nf * nu.ln() + delta.max(0.0).ln()).exp());
    }
    if nu == 0.0 {
        let up = (nf * u.ln() - nf.ln()).exp();
        let lo = if l == 0.0 { 0.0 } else { (nf * l.ln() - nf.ln()).exp() };
        return Ok(up - lo);
    }
    // growing integrand on a finite interval
    quad::integrate(|h| Ok((-nu * h + (nf - 1.0) * h.ln().max(-1e300)).exp()), l, u, 1e-12)
}

/// Natural log of [`gamma_slice`] for positive decay rates; `-inf` when the
/// slice is empty.
fn ln_gamma_slice_pos(nf: f64, nu: f64, l: f64, u: f64) -> f64 {
    if l >= u {
        return f64::NEG_INFINITY;
    }
    if u.is_infinite() {
        return ln_gamma(nf) - nf * nu.ln() + reg_q(nf, nu * l).ln();
    }
    let pl = reg_p(nf, nu * l);
    let delta = if pl < 0.5 {
        reg_p(nf, nu * u) - pl
    } else {
        reg_q(nf, nu * l) - reg_q(nf, nu * u)
    };
    ln_gamma(nf) - nf * nu.ln() + delta.max(0.0).ln()
}

/// Expected default-leg payout at zero rate, from the joint law of the
/// jump count and terminal default level:
///
/// ```text
/// E(Xdef) = (1-a) I[1] - I[e^{-h}] + (d-a) I[beyond detachment]
/// ```
///
/// where each bracket is a sum of gamma slices over the jump count. Agrees
/// with the transform pricer's default leg at `r = 0`.
pub fn expected_def(tr: &Tranche, m: f64, params: &ModelParams, ctl: &SeriesControl) -> Result<f64> {
    if !m.is_finite() || m <= 0.0 {
        return Err(Error::Domain(format!("horizon must be positive, got {m}")));
    }
    let (a, d) = (tr.attachment(), tr.detachment());
    let (ha, hd) = (tr.ha(), tr.hd());
    let lam = params.lambda();
    let x = params.rho() * m;
    let ln_xlam = (x * lam).ln();

    let mut sum = 0.0;
    let mut ln_cn = -x; // ln of e^{-x} (x lam)^n / (n! (n-1)!), built incrementally
    let mut pois = (-x).exp();
    for n in 1..=ctl.max_terms {
        let nf = n as f64;
        ln_cn += ln_xlam - nf.ln() - if n > 1 { (nf - 1.0).ln() } else { 0.0 };
        pois *= x / nf;

        let mut term = (1.0 - a) * (ln_cn + ln_gamma_slice_pos(nf, lam, ha, hd)).exp();
        term -= (ln_cn + ln_gamma_slice_pos(nf, lam + 1.0, ha, hd)).exp();
        if hd.is_finite() {
            term += (d - a) * (ln_cn + ln_gamma_slice_pos(nf, lam, hd, f64::INFINITY)).exp();
        }
        sum += term;

        // each slice is bounded by Gamma(n)/lambda^n, so the remainder is
        // bounded by a Poisson tail with weight (1-a) + 1 + (d-a) <= 3
        if nf + 2.0 > x {
            let tail = 3.0 * pois * x / (nf + 1.0) * ((nf + 2.0) / (nf + 2.0 - x));
            if tail < ctl.abs_tol {
                return Ok(sum);
            }
            if n == ctl.max_terms {
                return Err(Error::NonConvergence { terms: n, tail, tol: ctl.abs_tol });
            }
        }
    }
    Err(Error::NonConvergence { terms: ctl.max_terms, tail: f64::NAN, tol: ctl.abs_tol })
}

/// `E(R Xdef^2)` at zero rate, or `+inf` past the divergence boundary.
///
/// The product `R(n, h) f(n, h)` keeps the gamma-slice shape with decay
/// rates shifted to `2 lambda - lambda' (+ 0, 1, 2)` and coefficient base
/// `rho^2 lambda^2 M / (rho' lambda')`:
///
/// ```text
/// E(R X^2) = sum_n C_n [ S(nu+2) - 2(1-a) S(nu+1) + (1-a)^2 S(nu) + (d-a)^2 S_tail(nu) ]
/// ```
pub fn weighted_second_moment(
    tr: &Tranche,
    m: f64,
    mp: &MeasurePair,
    ctl: &SeriesControl,
) -> Result<f64> {
    weighted_second_moment_detail(tr, m, mp, ctl).map(|(v, _)| v)
}

pub(crate) fn weighted_second_moment_detail(
    tr: &Tranche,
    m: f64,
    mp: &MeasurePair,
    ctl: &SeriesControl,
) -> Result<(f64, usize)> {
    if !m.is_finite() || m <= 0.0 {
        return Err(Error::Domain(format!("horizon must be positive, got {m}")));
    }
    let (rho, lam) = (mp.real.rho(), mp.real.lambda());
    let (rho_a, lam_a) = (mp.altered.rho(), mp.altered.lambda());
    let nu = 2.0 * lam - lam_a;
    // every tranche keeps a half-infinite integral with decay rate nu and a
    // strictly positive weight, so divergence is decided by nu alone
    if nu <= 0.0 {
        return Ok((f64::INFINITY, 0));
    }
    let (a, d) = (tr.attachment(), tr.detachment());
    let (ha, hd) = (tr.ha(), tr.hd());
    let kappa = rho * rho * lam * lam * m / (rho_a * lam_a);
    let ln_kappa = kappa.ln();
    let pref = -(2.0 * rho - rho_a) * m;

    let mut sum = 0.0;
    let mut ln_cn = pref;
    let mut ln_tail_term = pref + (kappa / nu).ln(); // ln e^{pref} (kappa/nu)^n / n!
    for n in 1..=ctl.max_terms {
        let nf = n as f64;
        ln_cn += ln_kappa - nf.ln() - if n > 1 { (nf - 1.0).ln() } else { 0.0 };
        if n > 1 {
            ln_tail_term += (kappa / nu).ln() - nf.ln();
        }

        let mut term = (ln_cn + ln_gamma_slice_pos(nf, nu + 2.0, ha, hd)).exp();
        term -= 2.0 * (1.0 - a) * (ln_cn + ln_gamma_slice_pos(nf, nu + 1.0, ha, hd)).exp();
        term += (1.0 - a) * (1.0 - a) * (ln_cn + ln_gamma_slice_pos(nf, nu, ha, hd)).exp();
        if hd.is_finite() {
            term += (d - a) * (d - a)
                * (ln_cn + ln_gamma_slice_pos(nf, nu, hd, f64::INFINITY)).exp();
        }
        sum += term;
        if sum.is_infinite() {
            // saturated the float range on the way to a finite but
            // astronomically large value
            return Ok((f64::INFINITY, n));
        }

        // slices bounded by Gamma(n)/nu^n, weights bounded by 5
        if nf + 2.0 > kappa / nu {
            let geom = (nf + 2.0) / (nf + 2.0 - kappa / nu);
            let tail = 5.0 * (ln_tail_term + (kappa / nu).ln() - (nf + 1.0).ln()).exp() * geom;
            if tail < ctl.abs_tol {
                return Ok((sum, n));
            }
            if n == ctl.max_terms {
                return Err(Error::NonConvergence { terms: n, tail, tol: ctl.abs_tol });
            }
        }
    }
    Err(Error::NonConvergence { terms: ctl.max_terms, tail: f64::NAN, tol: ctl.abs_tol })
}

/// Assemble mean, weighted second moment and the altered-measure variance
/// of the default-leg estimator for one tranche.
pub fn variance_report(
    tr: &Tranche,
    m: f64,
    mp: &MeasurePair,
    ctl: &SeriesControl,
) -> Result<VarianceReport> {
    let mean = expected_def(tr, m, &mp.real, ctl)?;
    let (w2, terms_used) = weighted_second_moment_detail(tr, m, mp, ctl)?;
    let variance_altered = if w2.is_finite() { (w2 - mean * mean).max(0.0) } else { f64::INFINITY };
    Ok(VarianceReport {
        mean,
        second_moment_weighted: w2,
        variance_altered,
        finite: variance_altered.is_finite(),
        terms_used,
    })
}

/// Divergence predicate of the measure change: the reweighted second moment
/// is finite only while `2 lambda - lambda' > 0`, i.e. while the altered
/// mean jump size is below twice the real one.
pub fn phase_boundary(mp: &MeasurePair) -> PhaseBoundary {
    let margin = 2.0 * mp.real.lambda() - mp.altered.lambda();
    PhaseBoundary { finite: margin > 0.0, margin, weak_margin: margin + 1.0 }
}
