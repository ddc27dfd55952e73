//! Exact pricing of the default and premium legs.
//!
//! Both legs reduce to integrals of the first-passage transform
//! `phi_r(h, M) = E[exp(-r T_h) 1(T_h < M)]` of the default process against
//! the density `exp(-h)` of loss levels:
//!
//! ```text
//! defPV       = integral over [ha, hd] of phi_r(h, M) exp(-h) dh
//! premPV1bp   = (d - a) annuity(r, M)
//!             - integral over [ha, hd] of chi_r(h, M) exp(-h) dh
//! ```
//!
//! where `chi_r(h, M) = (phi_r - exp(-rM) phi_0)/r` is the expected
//! discounted time the contract spends after the first passage of level `h`.
//! Grouping the premium leg this way removes the removable `1/r`
//! singularity, so a single code path covers every `r >= 0` and the `r = 0`
//! limit `chi_0(h, M) = E(M - T_h)^+` exactly.
//!
//! For the compound Poisson driver, `phi_r` has a double-series expansion
//! whose outer index follows the jump count and whose inner index counts
//! sub-level marks; all series here are evaluated with incremental log-space
//! recurrences and truncated against a rigorous Poisson-tail bound.

use crate::error::{Error, Result};
use crate::model::{Contract, ModelParams, Tranche};
use crate::quad;

/// Truncation control for the first-passage series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    /// Absolute truncation tolerance for the series tail.
    pub abs_tol: f64,
    /// Hard cap on the outer series index.
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self { abs_tol: 1e-12, max_terms: 4096 }
    }
}

/// Control for the level integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadControl {
    /// Relative quadrature tolerance.
    pub rel_tol: f64,
    /// Upper cut for half-infinite level integrals; beyond this the
    /// `exp(-h)` weight is below machine epsilon relative to the scale.
    pub h_cap: f64,
}

impl Default for QuadControl {
    fn default() -> Self {
        Self { rel_tol: 1e-9, h_cap: 36.0 }
    }
}

#[inline]
fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn check_phi_args(h: f64, m: f64, r: f64) -> Result<()> {
    if h.is_nan() || h < 0.0 {
        return Err(Error::Domain(format!("level h must be >= 0, got {h}")));
    }
    if !m.is_finite() || m < 0.0 {
        return Err(Error::Domain(format!("horizon M must be finite and >= 0, got {m}")));
    }
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Domain(format!("rate must be finite and >= 0, got {r}")));
    }
    Ok(())
}

/// Discounted first-passage transform `phi_r(h, M)`.
///
/// Evaluates the double series
///
/// ```text
/// phi_r(h, M) = rho/(rho + r) exp(-lambda h - (rho + r) M)
///               sum_{n>=1} ((rho+r) M)^n / n!
///               sum_{k=0}^{n-1} (lambda rho h / (rho+r))^k / k!
/// ```
///
/// truncated once the Poisson tail bound on the remainder falls below
/// `ctl.abs_tol`. At `h = 0` this returns the continuous boundary extension
/// `rho/(rho+r) (1 - exp(-(rho+r) M))`.
pub fn phi(h: f64, m: f64, r: f64, params: &ModelParams, ctl: &SeriesControl) -> Result<f64> {
    check_phi_args(h, m, r)?;
    if m == 0.0 {
        return Ok(0.0);
    }
    if h.is_infinite() {
        return Ok(0.0);
    }
    let rho = params.rho();
    let lambda = params.lambda();
    let x = (rho + r) * m;
    let y = lambda * rho * h / (rho + r);
    let ln_x = x.ln();
    let ln_y = if y > 0.0 { y.ln() } else { f64::NEG_INFINITY };
    // ln of rho/(rho+r) e^{-lambda h - x}
    let ln_pref = (rho / (rho + r)).ln() - lambda * h - x;

    let mut ln_outer = f64::NEG_INFINITY; // ln x^n/n!, starts at n=1 below
    let mut ln_inner_sum = 0.0; // ln sum_{k<n} y^k/k!, = 0 at n=1
    let mut ln_inner_term = 0.0; // ln y^{n-1}/(n-1)!
    let mut sum = 0.0;

    for n in 1..=ctl.max_terms {
        let nf = n as f64;
        ln_outer = if n == 1 { ln_x } else { ln_outer + ln_x - nf.ln() };
        sum += (ln_pref + ln_outer + ln_inner_sum).exp();

        // Remainder after n outer terms, bounded by the inner sum's limit
        // e^y and a geometric bound on the Poisson tail.
        if nf + 2.0 > x {
            let ln_next = ln_outer + ln_x - (nf + 1.0).ln();
            let geom = (nf + 2.0) / (nf + 2.0 - x);
            let ln_tail = ln_pref + y + ln_next + geom.ln();
            if ln_tail < ctl.abs_tol.ln() {
                return Ok(sum);
            }
            if n == ctl.max_terms {
                return Err(Error::NonConvergence {
                    terms: n,
                    tail: ln_tail.exp(),
                    tol: ctl.abs_tol,
                });
            }
        }

        // Extend the inner sum to k = n for the next outer term.
        if y > 0.0 {
            ln_inner_term += ln_y - nf.ln();
            ln_inner_sum = ln_add_exp(ln_inner_sum, ln_inner_term);
        }
    }
    Err(Error::NonConvergence { terms: ctl.max_terms, tail: f64::NAN, tol: ctl.abs_tol })
}

/// First-passage probability `phi_0(h, M) = P(T_h < M)`.
///
/// Evaluated from its own probabilistic arrangement: the jump count is
/// Poisson with mean `rho M`, and given `n` jumps the level `h` is passed
/// exactly when an independent Poisson mark count of mean `lambda h` stays
/// below `n`.
pub fn phi0(h: f64, m: f64, params: &ModelParams, ctl: &SeriesControl) -> Result<f64> {
    check_phi_args(h, m, 0.0)?;
    if m == 0.0 || h.is_infinite() {
        return Ok(0.0);
    }
    let x = params.rho() * m;
    let z = params.lambda() * h;

    let mut outer = (-x).exp(); // Poisson pmf at n, running
    let mut inner_pmf = (-z).exp(); // Poisson pmf of the mark count at k = n-1
    let mut inner_cdf = 0.0; // P(marks <= n-1)
    let mut sum = 0.0;

    for n in 1..=ctl.max_terms {
        let nf = n as f64;
        outer *= x / nf;
        inner_cdf += inner_pmf; // extend marks CDF to n-1
        inner_pmf *= z / nf;
        sum += outer * inner_cdf;

        if nf + 2.0 > x {
            let tail = outer * x / (nf + 1.0) * ((nf + 2.0) / (nf + 2.0 - x));
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

/// Expected discounted time spent after first passage of level `h`:
///
/// ```text
/// chi_r(h, M) = E integral_{min(T_h, M)}^{M} exp(-r s) ds
///             = (phi_r(h, M) - exp(-rM) phi_0(h, M)) / r
/// ```
///
/// computed from the cancellation-free series
/// `1/(rho+r) sum_{n>=1} q^n P(N_x >= n+1) P(marks <= n-1)` with
/// `q = rho/(rho+r)`, `x = (rho+r) M` and marks of mean `lambda h`; at
/// `r = 0` this is `E (M - T_h)^+` exactly.
pub fn post_passage_annuity(
    h: f64,
    m: f64,
    r: f64,
    params: &ModelParams,
    ctl: &SeriesControl,
) -> Result<f64> {
    check_phi_args(h, m, r)?;
    if m == 0.0 || h.is_infinite() {
        return Ok(0.0);
    }
    let rho = params.rho();
    let x = (rho + r) * m;
    let z = params.lambda() * h;
    let q = rho / (rho + r);

    let mut qn = 1.0;
    let mut pois = (-x).exp(); // pmf of N_x at n
    let mut upper_tail = -(-x).exp_m1(); // P(N_x >= n+1), starts at n = 0
    let mut inner_pmf = (-z).exp();
    let mut inner_cdf = 0.0;
    let mut sum = 0.0;

    for n in 1..=ctl.max_terms {
        let nf = n as f64;
        qn *= q;
        pois *= x / nf;
        upper_tail = (upper_tail - pois).max(0.0); // P(N_x >= n+1)
        inner_cdf += inner_pmf;
        inner_pmf *= z / nf;
        sum += qn * upper_tail * inner_cdf;

        // sum_{j>n} P(N >= j+1) <= x P(N >= n+1)
        let tail = x * upper_tail / (rho + r);
        if tail < ctl.abs_tol {
            return Ok(sum / (rho + r));
        }
        if n == ctl.max_terms {
            return Err(Error::NonConvergence { terms: n, tail, tol: ctl.abs_tol });
        }
    }
    Err(Error::NonConvergence { terms: ctl.max_terms, tail: f64::NAN, tol: ctl.abs_tol })
}

fn level_bounds(tr: &Tranche, q: &QuadControl) -> (f64, f64) {
    (tr.ha(), tr.hd().min(q.h_cap))
}

/// Present value of the default leg:
/// `integral over [ha, min(hd, h_cap)] of phi_r(h, M) exp(-h) dh`.
pub fn def_pv(
    tr: &Tranche,
    c: &Contract,
    params: &ModelParams,
    ctl: &SeriesControl,
    q: &QuadControl,
) -> Result<f64> {
    let (lo, hi) = level_bounds(tr, q);
    if lo >= hi {
        return Ok(0.0);
    }
    quad::integrate(
        |h| Ok(phi(h, c.maturity(), c.rate(), params, ctl)? * (-h).exp()),
        lo,
        hi,
        q.rel_tol,
    )
}

/// Present value of the premium leg per unit spread (continuous payment):
/// `(d-a) annuity(r, M) - integral of chi_r(h, M) exp(-h) dh`.
pub fn prem_pv_1bp(
    tr: &Tranche,
    c: &Contract,
    params: &ModelParams,
    ctl: &SeriesControl,
    q: &QuadControl,
) -> Result<f64> {
    let m = c.maturity();
    let r = c.rate();
    let ann = if r > 0.0 { -(-r * m).exp_m1() / r } else { m };
    let (lo, hi) = level_bounds(tr, q);
    let lost = if lo >= hi {
        0.0
    } else {
        quad::integrate(
            |h| Ok(post_passage_annuity(h, m, r, params, ctl)? * (-h).exp()),
            lo,
            hi,
            q.rel_tol,
        )?
    };
    Ok((tr.width() * ann - lost).max(0.0))
}
