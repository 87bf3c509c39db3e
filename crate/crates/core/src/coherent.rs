//! Truncated Fock-expansion coefficients of the initial nonlinear coherent
//! state.
//!
//! The field starts in `|alpha, f> = N sum_n alpha^n / (sqrt(n!) [f(n)]!) |n>`
//! with `alpha = |alpha| e^{i phi}`. The moduli span hundreds of orders of
//! magnitude before normalization, so everything runs in the log domain:
//! `ln |C_n| = n ln|alpha| - ln(n!)/2 - ln [f(n)]!`, rescaled by the running
//! maximum, exponentiated, and finally renormalized so the truncated norm is
//! exactly 1.

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearitySpec;

/// Default hard cap on the truncation order; reaching it signals a divergent
/// expansion (e.g. a Gilmore-Perelomov state at `|alpha| >= 1` slipping past
/// validation).
pub const DEFAULT_TRUNCATION_CAP: u32 = 100_000;

/// How far below the tail tolerance a single term must fall before the scan
/// may stop extending the series.
const TERM_SLACK: f64 = 1e-3;
/// Bound required of the geometric remainder estimate beyond the scan.
const REMAINDER_SLACK: f64 = 1e-2;
/// Weight ratios must drop below this before the remainder extrapolation is
/// trusted.
const MAX_TAIL_RATIO: f64 = 0.999;
/// Consecutive negligible terms required before the scan stops.
const SETTLE_TERMS: usize = 10;

/// Parameters of the initial field state.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldParams {
    alpha_mag: f64,
    alpha_phase: f64,
    f_spec: NonlinearitySpec,
}

impl FieldParams {
    /// Validate and build field parameters.
    ///
    /// Gilmore-Perelomov states are defined in the interior of the unit disk,
    /// so `alpha_mag < 1` is required for that family; `Unit`,
    /// Barut-Girardello and tabulated functions accept any finite magnitude.
    pub fn new(alpha_mag: f64, alpha_phase: f64, f_spec: NonlinearitySpec) -> Result<Self> {
        f_spec.validate()?;
        if !(alpha_mag.is_finite() && alpha_mag >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "|alpha| = {alpha_mag} must be a finite nonnegative real"
            )));
        }
        if !alpha_phase.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "alpha phase = {alpha_phase} must be finite"
            )));
        }
        if matches!(f_spec, NonlinearitySpec::GilmorePerelomov { .. }) && alpha_mag >= 1.0 {
            return Err(Error::InvalidSpec(format!(
                "Gilmore-Perelomov states require |alpha| < 1, got {alpha_mag}"
            )));
        }
        Ok(Self {
            alpha_mag,
            alpha_phase,
            f_spec,
        })
    }

    pub fn alpha_mag(&self) -> f64 {
        self.alpha_mag
    }

    pub fn alpha_phase(&self) -> f64 {
        self.alpha_phase
    }

    pub fn f_spec(&self) -> &NonlinearitySpec {
        &self.f_spec
    }
}

/// Truncated, normalized expansion `{C_n}` of the initial field state over
/// `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    coeffs: Vec<Complex64>,
    moduli: Vec<f64>,
    alpha_phase: f64,
    tail_bound: f64,
}

impl CoefficientVector {
    /// Coefficients `C_0..C_{n_max}`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Moduli `|C_n|` as constructed, before the phases were applied; they
    /// do not depend on the phase of `alpha`.
    pub fn moduli(&self) -> &[f64] {
        &self.moduli
    }

    /// Largest retained Fock index.
    pub fn n_max(&self) -> u32 {
        (self.coeffs.len() - 1) as u32
    }

    /// Phase of `alpha` the expansion was built with; `arg C_n = n * phase`.
    pub fn alpha_phase(&self) -> f64 {
        self.alpha_phase
    }

    /// Estimated probability mass discarded by the truncation.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// `sum |C_n|^2` over the retained range.
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Initial mean photon number `sum n |C_n|^2`, which is also the
    /// conserved excitation number of the coupled system.
    pub fn excitation_number(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum()
    }
}

/// Log-domain scan of the squared-modulus series, rescaled by the running
/// maximum so the partial sums stay representable.
struct SeriesScan {
    /// `t_n = 2 ln |c_n|` (unnormalized).
    log_weights: Vec<f64>,
    /// Running maximum of `t_n`.
    log_scale: f64,
    /// Geometric bound on the mass beyond the scanned range, same scale.
    remainder: f64,
    /// Same bound weighted by `(n+1)^2`.
    remainder_weighted: f64,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!(
            "tail tolerance eps = {eps} must lie in (0, 1)"
        )))
    }
}

/// Extend the series until ten consecutive terms are negligible against both
/// tail criteria and the extrapolated remainder is bounded.
fn scan_series(params: &FieldParams, eps: f64, cap: u32) -> Result<SeriesScan> {
    let ln_alpha2 = 2.0 * params.alpha_mag.ln();
    let f = params.f_spec();

    let mut log_weights = Vec::new();
    let mut log_scale = f64::NEG_INFINITY;
    let mut total = 0.0f64;
    let mut settled = 0usize;
    let mut remainder = 0.0;
    let mut remainder_weighted = 0.0;

    let mut n: u32 = 0;
    loop {
        // t_n = 2 ln|c_n| = 2n ln|alpha| - ln(n!) - 2 ln [f(n)]!
        let t =
            n as f64 * ln_alpha2 - ln_gamma(n as f64 + 1.0) - 2.0 * f.log_f_factorial(n)?;
        if t > log_scale {
            let shift = if log_scale.is_finite() {
                (log_scale - t).exp()
            } else {
                0.0
            };
            total *= shift;
            log_scale = t;
        }
        let w = (t - log_scale).exp();
        total += w;
        log_weights.push(t);

        // A term counts as settled once its (n+1)^2-weighted mass is far
        // below the tolerance and the remainder past it extrapolates to
        // something negligible under the observed decay ratio.
        let nf = n as f64;
        let negligible = (nf + 1.0) * (nf + 1.0) * w <= eps * TERM_SLACK * total;
        let mut ok = false;
        if negligible && n >= 1 {
            let ratio = (t - log_weights[n as usize - 1]).exp();
            if ratio < MAX_TAIL_RATIO {
                let (rem, rem_w) = geometric_remainder(nf, w, ratio);
                if rem_w <= eps * REMAINDER_SLACK * total {
                    remainder = rem;
                    remainder_weighted = rem_w;
                    ok = true;
                }
            }
        }
        settled = if ok { settled + 1 } else { 0 };
        if settled >= SETTLE_TERMS {
            return Ok(SeriesScan {
                log_weights,
                log_scale,
                remainder,
                remainder_weighted,
            });
        }
        if n >= cap {
            return Err(Error::Convergence(format!(
                "coefficient series did not settle within {cap} terms \
                 (|alpha| = {}, f = {:?}); the expansion may be divergent",
                params.alpha_mag, params.f_spec
            )));
        }
        n += 1;
    }
}

/// Geometric bound on `sum_{k>=1} (n+1+k)^2 w r^k` and its unweighted
/// counterpart, for the last scanned index `n`, weight `w` and ratio `r`.
fn geometric_remainder(n: f64, w: f64, r: f64) -> (f64, f64) {
    let q = 1.0 - r;
    let s0 = r / q;
    let s1 = r / (q * q);
    let s2 = r * (1.0 + r) / (q * q * q);
    let rem = w * s0;
    let rem_w = w * ((n + 1.0) * (n + 1.0) * s0 + 2.0 * (n + 1.0) * s1 + s2);
    (rem, rem_w)
}

/// Outcome of the truncation search: order plus the tail estimate at it.
struct Truncation {
    n_max: u32,
    tail_bound: f64,
}

/// Smallest order whose plain and `(n+1)^2`-weighted normalized tails both
/// fall below `eps`.
fn select_order(scan: &SeriesScan, eps: f64) -> Truncation {
    let len = scan.log_weights.len();
    // Suffix sums accumulate smallest-first for accuracy.
    let mut tail = vec![0.0f64; len + 1];
    let mut tail_weighted = vec![0.0f64; len + 1];
    tail[len] = scan.remainder;
    tail_weighted[len] = scan.remainder_weighted;
    for k in (0..len).rev() {
        let w = (scan.log_weights[k] - scan.log_scale).exp();
        let kf = k as f64;
        tail[k] = tail[k + 1] + w;
        tail_weighted[k] = tail_weighted[k + 1] + (kf + 1.0) * (kf + 1.0) * w;
    }
    let grand_total = tail[0];
    for n in 0..len {
        if tail[n + 1] < eps * grand_total && tail_weighted[n + 1] < eps * grand_total {
            return Truncation {
                n_max: n as u32,
                tail_bound: tail[n + 1] / grand_total,
            };
        }
    }
    // The scan's stop rule guarantees the last candidate qualifies.
    Truncation {
        n_max: (len - 1) as u32,
        tail_bound: tail[len] / grand_total,
    }
}

/// Smallest truncation order `N` such that both the tail mass
/// `sum_{n>N} |C_n|^2` and the weighted tail `sum_{n>N} (n+1)^2 |C_n|^2`
/// stay below `eps`, so that photon-number second moments also converge.
pub fn truncation_order(params: &FieldParams, eps: f64) -> Result<u32> {
    truncation_order_with_cap(params, eps, DEFAULT_TRUNCATION_CAP)
}

/// [`truncation_order`] with an explicit hard cap on the series length.
pub fn truncation_order_with_cap(params: &FieldParams, eps: f64, cap: u32) -> Result<u32> {
    check_eps(eps)?;
    if params.alpha_mag == 0.0 {
        return Ok(0);
    }
    let scan = scan_series(params, eps, cap)?;
    Ok(select_order(&scan, eps).n_max)
}

/// Build the truncated, normalized coefficient vector of the initial state.
pub fn coefficients(params: &FieldParams, eps: f64) -> Result<CoefficientVector> {
    coefficients_with_cap(params, eps, DEFAULT_TRUNCATION_CAP)
}

/// [`coefficients`] with an explicit hard cap on the series length.
pub fn coefficients_with_cap(
    params: &FieldParams,
    eps: f64,
    cap: u32,
) -> Result<CoefficientVector> {
    check_eps(eps)?;
    if params.alpha_mag == 0.0 {
        return Ok(CoefficientVector {
            coeffs: vec![Complex64::new(1.0, 0.0)],
            moduli: vec![1.0],
            alpha_phase: params.alpha_phase,
            tail_bound: 0.0,
        });
    }
    let scan = scan_series(params, eps, cap)?;
    let truncation = select_order(&scan, eps);
    let n_keep = truncation.n_max as usize + 1;

    // Moduli under a common scale; the scale cancels in the renormalization.
    let mut moduli: Vec<f64> = scan.log_weights[..n_keep]
        .iter()
        .map(|t| (0.5 * (t - scan.log_scale)).exp())
        .collect();
    let norm: f64 = moduli.iter().map(|m| m * m).sum::<f64>().sqrt();
    for m in &mut moduli {
        *m /= norm;
    }

    let phi = params.alpha_phase;
    let coeffs = moduli
        .iter()
        .enumerate()
        .map(|(n, m)| {
            let (sin, cos) = (n as f64 * phi).sin_cos();
            Complex64::new(m * cos, m * sin)
        })
        .collect();
    Ok(CoefficientVector {
        coeffs,
        moduli,
        alpha_phase: phi,
        tail_bound: truncation.tail_bound,
    })
}
