//! Closed-form observables of the evolved atom-field state.
//!
//! Everything here is evaluated from the printed series over the initial
//! coefficients, not from [`crate::dynamics::EvolvedState`], so that the two
//! modules stay independently testable against each other and against the
//! oracle. Sums run to the coefficient vector's truncation order; the
//! truncation criterion already keeps the `n^2`-weighted tail below the
//! requested tolerance.

use num_complex::Complex64;

use crate::coherent::CoefficientVector;
use crate::dynamics::{rabi_frequency, sin_ratio, CouplingParams};
use crate::error::{Error, Result};

/// Relative bound on the imaginary residue tolerated when a quadrature
/// series must come out real.
const REALITY_TOL: f64 = 1e-10;

/// One evaluated time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableSample {
    /// Scaled time.
    pub tau: f64,
    /// Mean photon number.
    pub mean_n: f64,
    /// Atomic population inversion, `P(e2) - P(g)`.
    pub s_z: f64,
    /// Mandel Q; `None` where the mean photon number vanishes.
    pub mandel_q: Option<f64>,
    /// Squeezing parameter of the first quadrature.
    pub s1: f64,
    /// Squeezing parameter of the second quadrature.
    pub s2: f64,
    /// Departure of the closed-form branch populations from unit norm.
    pub norm_residual: f64,
}

/// Per-sector kernel shared by the diagonal observables: weight, squared
/// couplings and the oscillation factors at `tau`.
struct Sector {
    w: f64,
    nf: f64,
    g2n: f64,
    g2n1: f64,
    beta2: f64,
    cos2: f64,
    /// `sin^2(Omega tau) / Omega^2` with its `Omega = 0` limit `tau^2`.
    s2: f64,
}

fn sectors<'a>(
    coeffs: &'a CoefficientVector,
    coupling: &'a CouplingParams,
    tau: f64,
) -> impl Iterator<Item = Result<Sector>> + 'a {
    let g = coupling.g_spec();
    let beta = coupling.beta();
    coeffs.coeffs().iter().enumerate().map(move |(n, c)| {
        let nf = n as f64;
        let g2n = if n == 0 {
            0.0
        } else {
            let gn = g.eval(n as u32)?;
            gn * gn
        };
        let gn1 = g.eval(n as u32 + 1)?;
        let g2n1 = gn1 * gn1;
        let beta2 = beta * beta;
        let omega = (nf * g2n + beta2 * (nf + 1.0) * g2n1).sqrt();
        let s = sin_ratio(omega, tau);
        Ok(Sector {
            w: c.norm_sqr(),
            nf,
            g2n,
            g2n1,
            beta2,
            cos2: (omega * tau).cos().powi(2),
            s2: s * s,
        })
    })
}

/// Mean photon number:
/// `sum |C_n|^2 [n cos^2 + sin^2 (n(n-1)g^2(n) + beta^2(n+1)^2 g^2(n+1)) / Omega_n^2]`.
pub fn mean_photon_number(
    coeffs: &CoefficientVector,
    coupling: &CouplingParams,
    tau: f64,
) -> Result<f64> {
    let mut acc = 0.0;
    for sector in sectors(coeffs, coupling, tau) {
        let s = sector?;
        let exchanged = s.nf * (s.nf - 1.0) * s.g2n + s.beta2 * (s.nf + 1.0).powi(2) * s.g2n1;
        acc += s.w * (s.nf * s.cos2 + s.s2 * exchanged);
    }
    Ok(acc)
}

/// Atomic population inversion:
/// `sum |C_n|^2 sin^2 (n g^2(n) - beta^2 (n+1) g^2(n+1)) / Omega_n^2`.
pub fn atomic_inversion(
    coeffs: &CoefficientVector,
    coupling: &CouplingParams,
    tau: f64,
) -> Result<f64> {
    let mut acc = 0.0;
    for sector in sectors(coeffs, coupling, tau) {
        let s = sector?;
        acc += s.w * s.s2 * (s.nf * s.g2n - s.beta2 * (s.nf + 1.0) * s.g2n1);
    }
    Ok(acc)
}

/// Second moment of the photon number:
/// `sum |C_n|^2 {n^2 cos^2 + sin^2 (n(n-1)^2 g^2(n) + beta^2(n+1)^3 g^2(n+1)) / Omega_n^2}`.
pub fn mean_photon_number_squared(
    coeffs: &CoefficientVector,
    coupling: &CouplingParams,
    tau: f64,
) -> Result<f64> {
    let mut acc = 0.0;
    for sector in sectors(coeffs, coupling, tau) {
        let s = sector?;
        let exchanged =
            s.nf * (s.nf - 1.0).powi(2) * s.g2n + s.beta2 * (s.nf + 1.0).powi(3) * s.g2n1;
        acc += s.w * (s.nf * s.nf * s.cos2 + s.s2 * exchanged);
    }
    Ok(acc)
}

/// Mandel parameter `Q = (<n^2> - <n>^2)/<n> - 1`, or `None` where the mean
/// photon number vanishes (the vacuum before any emission) rather than a
/// division by zero.
pub fn mandel_q(
    coeffs: &CoefficientVector,
    coupling: &CouplingParams,
    tau: f64,
) -> Result<Option<f64>> {
    let mean = mean_photon_number(coeffs, coupling, tau)?;
    if mean == 0.0 {
        return Ok(None);
    }
    let second = mean_photon_number_squared(coeffs, coupling, tau)?;
    Ok(Some((second - mean * mean) / mean - 1.0))
}

/// Closed-form branch populations `(P(e1), P(g), P(e2))`.
pub fn branch_populations(
    coeffs: &CoefficientVector,
    coupling: &CouplingParams,
    tau: f64,
) -> Result<(f64, f64, f64)> {
    let mut p_e1 = 0.0;
    let mut p_g = 0.0;
    let mut p_e2 = 0.0;
    for sector in sectors(coeffs, coupling, tau) {
        let s = sector?;
        p_e1 += s.w * s.cos2;
        p_g += s.w * s.s2 * s.beta2 * (s.nf + 1.0) * s.g2n1;
        p_e2 += s.w * s.s2 * s.nf * s.g2n;
    }
    Ok((p_e1, p_g, p_e2))
}

fn assert_real(z: Complex64) -> Result<f64> {
    if z.im.abs() <= REALITY_TOL * (1.0 + z.re.abs()) {
        Ok(z.re)
    } else {
        Err(Error::RealityViolation { re: z.re, im: z.im })
    }
}

/// First-order field correlation `B1`, the phase-stripped `<a>`.
///
/// The coefficients carry `e^{i n phi}`, so the `C_n^* C_{n+1}` pairs each
/// contribute `e^{i phi}`; the leading `e^{-i phi}` cancels it and the sum
/// must come out real.
pub fn b1(coeffs: &CoefficientVector, coupling: &CouplingParams, tau: f64) -> Result<f64> {
    let g = coupling.g_spec();
    let beta2 = coupling.beta() * coupling.beta();
    let c = coeffs.coeffs();
    let mut acc = Complex64::new(0.0, 0.0);

    let mut omega_next = rabi_frequency(coupling, 0)?;
    for n in 0..c.len().saturating_sub(1) {
        let nf = n as f64;
        let omega_n = omega_next;
        omega_next = rabi_frequency(coupling, n as u32 + 1)?;
        let gn = if n == 0 { 0.0 } else { g.eval(n as u32)? };
        let gn1 = g.eval(n as u32 + 1)?;
        let gn2 = g.eval(n as u32 + 2)?;
        let cross = (nf + 1.0).sqrt()
            * ((omega_n * tau).cos() * (omega_next * tau).cos()
                + sin_ratio(omega_n, tau)
                    * sin_ratio(omega_next, tau)
                    * gn1
                    * (nf * gn + beta2 * (nf + 2.0) * gn2));
        acc += c[n].conj() * c[n + 1] * cross;
    }
    let phase = Complex64::from_polar(1.0, -coeffs.alpha_phase());
    assert_real(phase * acc)
}

/// Second-order field correlation `B2`, the phase-stripped `<a^2>`.
pub fn b2(coeffs: &CoefficientVector, coupling: &CouplingParams, tau: f64) -> Result<f64> {
    let g = coupling.g_spec();
    let beta2 = coupling.beta() * coupling.beta();
    let c = coeffs.coeffs();
    let mut acc = Complex64::new(0.0, 0.0);

    for n in 0..c.len().saturating_sub(2) {
        let nf = n as f64;
        let omega_n = rabi_frequency(coupling, n as u32)?;
        let omega_n2 = rabi_frequency(coupling, n as u32 + 2)?;
        let gn = if n == 0 { 0.0 } else { g.eval(n as u32)? };
        let gn1 = g.eval(n as u32 + 1)?;
        let gn2 = g.eval(n as u32 + 2)?;
        let gn3 = g.eval(n as u32 + 3)?;
        let root = ((nf + 1.0) * (nf + 2.0)).sqrt();
        let cross = root
            * ((omega_n * tau).cos() * (omega_n2 * tau).cos()
                + sin_ratio(omega_n, tau)
                    * sin_ratio(omega_n2, tau)
                    * (nf * gn * gn2 + beta2 * (nf + 3.0) * gn1 * gn3));
        acc += c[n].conj() * c[n + 2] * cross;
    }
    let phase = Complex64::from_polar(1.0, -2.0 * coeffs.alpha_phase());
    assert_real(phase * acc)
}

/// Quadrature squeezing parameters `(S1, S2)` at coherent-state phase `phi`:
/// `S1 = 2(B0 - B2) + 4 cos^2(phi) (B2 - B1^2)` and the `sin^2` counterpart,
/// with `B0` the mean photon number. Values in `(-1, 0)` indicate
/// fluctuations below the vacuum level in that quadrature.
pub fn squeezing(
    coeffs: &CoefficientVector,
    coupling: &CouplingParams,
    phi: f64,
    tau: f64,
) -> Result<(f64, f64)> {
    let b0 = mean_photon_number(coeffs, coupling, tau)?;
    let b1 = b1(coeffs, coupling, tau)?;
    let b2 = b2(coeffs, coupling, tau)?;
    let common = 2.0 * (b0 - b2);
    let excess = b2 - b1 * b1;
    let s1 = common + 4.0 * phi.cos().powi(2) * excess;
    let s2 = common + 4.0 * phi.sin().powi(2) * excess;
    Ok((s1, s2))
}

/// Evaluate every observable of one time point.
pub fn sample(
    coeffs: &CoefficientVector,
    coupling: &CouplingParams,
    phi: f64,
    tau: f64,
) -> Result<ObservableSample> {
    let mean_n = mean_photon_number(coeffs, coupling, tau)?;
    let s_z = atomic_inversion(coeffs, coupling, tau)?;
    let mandel_q = mandel_q(coeffs, coupling, tau)?;
    let (s1, s2) = squeezing(coeffs, coupling, phi, tau)?;
    let (p_e1, p_g, p_e2) = branch_populations(coeffs, coupling, tau)?;
    Ok(ObservableSample {
        tau,
        mean_n,
        s_z,
        mandel_q,
        s1,
        s2,
        norm_residual: 1.0 - (p_e1 + p_g + p_e2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::{coefficients, FieldParams};
    use crate::dynamics::evolve;
    use crate::nonlinearity::NonlinearitySpec;

    fn canonical(alpha: f64, phi: f64) -> CoefficientVector {
        coefficients(
            &FieldParams::new(alpha, phi, NonlinearitySpec::Unit).unwrap(),
            1e-12,
        )
        .unwrap()
    }

    fn vacuum() -> CoefficientVector {
        canonical(0.0, 0.0)
    }

    fn gp_state() -> (CoefficientVector, CouplingParams) {
        let spec = NonlinearitySpec::gilmore_perelomov(1.5).unwrap();
        let coeffs = coefficients(
            &FieldParams::new(0.9, std::f64::consts::FRAC_PI_2, spec.clone()).unwrap(),
            1e-12,
        )
        .unwrap();
        let coupling = CouplingParams::new(spec, 0.01).unwrap();
        (coeffs, coupling)
    }

    fn unit_coupling(beta: f64) -> CouplingParams {
        CouplingParams::new(NonlinearitySpec::Unit, beta).unwrap()
    }

    #[test]
    fn mean_photon_number_at_tau_zero() {
        let coeffs = canonical(2.0, 0.0);
        let mean = mean_photon_number(&coeffs, &unit_coupling(0.3), 0.0).unwrap();
        assert!((mean - coeffs.excitation_number()).abs() < 1e-14);
    }

    #[test]
    fn vacuum_mean_photon_number_is_sine_squared() {
        let coeffs = vacuum();
        let coupling = unit_coupling(0.3);
        for tau in [0.0, 0.7, 3.0, 11.0] {
            let mean = mean_photon_number(&coeffs, &coupling, tau).unwrap();
            assert!((mean - (0.3 * tau).sin().powi(2)).abs() < 1e-13);
        }
    }

    #[test]
    fn gp_initial_mean_photon_number() {
        let (coeffs, coupling) = gp_state();
        let mean = mean_photon_number(&coeffs, &coupling, 0.0).unwrap();
        assert!((mean - 12.7895).abs() < 1e-4);
        assert!((mean - 3.0 * 0.81 / 0.19).abs() < 1e-6);
    }

    #[test]
    fn inversion_starts_at_zero_exactly() {
        let (coeffs, coupling) = gp_state();
        assert_eq!(atomic_inversion(&coeffs, &coupling, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn vacuum_inversion_is_spontaneous_emission() {
        let coeffs = vacuum();
        let g = NonlinearitySpec::barut_girardello(0.5).unwrap();
        let beta = 0.7;
        let coupling = CouplingParams::new(g.clone(), beta).unwrap();
        let g1 = g.eval(1).unwrap();
        for tau in [0.2, 1.0, 4.4, 19.0] {
            let sz = atomic_inversion(&coeffs, &coupling, tau).unwrap();
            assert!((sz + (beta * g1 * tau).sin().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn beta_zero_inversion_is_two_level_and_nonnegative() {
        let coeffs = canonical(2.0, 0.0);
        let g = NonlinearitySpec::barut_girardello(0.5).unwrap();
        let coupling = CouplingParams::new(g.clone(), 0.0).unwrap();
        for tau in [0.4, 1.9, 6.0] {
            let sz = atomic_inversion(&coeffs, &coupling, tau).unwrap();
            let expected: f64 = coeffs
                .coeffs()
                .iter()
                .enumerate()
                .skip(1)
                .map(|(n, c)| {
                    let theta = (n as f64).sqrt() * g.eval(n as u32).unwrap() * tau;
                    c.norm_sqr() * theta.sin().powi(2)
                })
                .sum();
            assert!(sz >= 0.0);
            assert!((sz - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn vacuum_second_moment_is_sine_squared() {
        let coeffs = vacuum();
        let coupling = unit_coupling(0.8);
        for tau in [0.3, 2.2, 8.0] {
            let second = mean_photon_number_squared(&coeffs, &coupling, tau).unwrap();
            assert!((second - (0.8 * tau).sin().powi(2)).abs() < 1e-13);
        }
    }

    #[test]
    fn second_moment_at_tau_zero() {
        let coeffs = canonical(2.0, 0.0);
        let second = mean_photon_number_squared(&coeffs, &unit_coupling(0.1), 0.0).unwrap();
        let expected: f64 = coeffs
            .coeffs()
            .iter()
            .enumerate()
            .map(|(n, c)| (n as f64).powi(2) * c.norm_sqr())
            .sum();
        assert!((second - expected).abs() < 1e-12);
    }

    #[test]
    fn mandel_q_poissonian_for_canonical_states() {
        for alpha in [0.5, 2.0, 8.0] {
            let coeffs = canonical(alpha, 0.0);
            for coupling in [unit_coupling(0.3), unit_coupling(0.0)] {
                let q = mandel_q(&coeffs, &coupling, 0.0).unwrap().unwrap();
                assert!(q.abs() < 1e-10, "alpha = {alpha}: Q = {q:e}");
            }
        }
    }

    #[test]
    fn mandel_q_super_poissonian_for_gp() {
        let (coeffs, coupling) = gp_state();
        let q = mandel_q(&coeffs, &coupling, 0.0).unwrap().unwrap();
        assert!((q - 4.2632).abs() < 1e-4);
        assert!((q - 0.81 / 0.19).abs() < 1e-6);
    }

    #[test]
    fn mandel_q_sub_poissonian_for_bg() {
        // Independent series: <n^2> = |alpha|^2 exactly for f = sqrt(n),
        // <n> from the Bessel-series ratio.
        let alpha: f64 = 2.0;
        let spec = NonlinearitySpec::barut_girardello(0.5).unwrap();
        let coeffs = coefficients(
            &FieldParams::new(alpha, 0.0, spec.clone()).unwrap(),
            1e-12,
        )
        .unwrap();
        let coupling = CouplingParams::new(spec, 0.1).unwrap();
        let q = mandel_q(&coeffs, &coupling, 0.0).unwrap().unwrap();
        assert!(q < 0.0);

        let x = alpha * alpha;
        let mut total = 0.0f64;
        let mut mean = 0.0f64;
        let mut second = 0.0f64;
        let mut term = 1.0f64;
        for n in 0..60 {
            if n > 0 {
                let nf = n as f64;
                term *= x / (nf * nf);
            }
            total += term;
            mean += n as f64 * term;
            second += (n as f64).powi(2) * term;
        }
        mean /= total;
        second /= total;
        let expected = (second - mean * mean) / mean - 1.0;
        assert!((q - expected).abs() < 1e-10);
        assert!((second - x).abs() < 1e-10);
    }

    #[test]
    fn mandel_q_undefined_at_vacuum() {
        let coeffs = vacuum();
        assert_eq!(mandel_q(&coeffs, &unit_coupling(0.3), 0.0).unwrap(), None);
        // any nonzero time has emitted field, so Q becomes defined
        assert!(mandel_q(&coeffs, &unit_coupling(0.3), 0.4)
            .unwrap()
            .is_some());
    }

    #[test]
    fn b1_b2_of_initial_coherent_state() {
        for phi in [0.0, 1.1] {
            let alpha = 1.7;
            let coeffs = canonical(alpha, phi);
            let coupling = unit_coupling(0.2);
            assert!((b1(&coeffs, &coupling, 0.0).unwrap() - alpha).abs() < 1e-10);
            assert!((b2(&coeffs, &coupling, 0.0).unwrap() - alpha * alpha).abs() < 1e-9);
        }
    }

    #[test]
    fn b1_b2_vanish_for_vacuum() {
        let coeffs = vacuum();
        let coupling = unit_coupling(0.5);
        for tau in [0.0, 1.0, 6.0] {
            assert_eq!(b1(&coeffs, &coupling, tau).unwrap(), 0.0);
            assert_eq!(b2(&coeffs, &coupling, tau).unwrap(), 0.0);
        }
    }

    #[test]
    fn squeezing_zero_for_initial_coherent_state() {
        for phi in [0.0, 0.9, std::f64::consts::FRAC_PI_2] {
            let coeffs = canonical(2.0, phi);
            let (s1, s2) = squeezing(&coeffs, &unit_coupling(0.3), phi, 0.0).unwrap();
            assert!(s1.abs() < 1e-10);
            assert!(s2.abs() < 1e-10);
        }
    }

    #[test]
    fn vacuum_squeezing_follows_mean_photon_number() {
        let coeffs = vacuum();
        let coupling = unit_coupling(0.4);
        for tau in [0.5, 2.0, 9.0] {
            let b0 = mean_photon_number(&coeffs, &coupling, tau).unwrap();
            let (s1, s2) = squeezing(&coeffs, &coupling, 0.3, tau).unwrap();
            assert!((s1 - 2.0 * b0).abs() < 1e-12);
            assert!((s2 - 2.0 * b0).abs() < 1e-12);
            assert!(s1 >= 0.0);
        }
    }

    #[test]
    fn phi_rotation_swaps_quadratures() {
        let (coeffs, coupling) = gp_state();
        let phi = 0.7;
        for tau in [0.9, 4.2, 17.0] {
            let (s1, s2) = squeezing(&coeffs, &coupling, phi, tau).unwrap();
            let (r1, r2) = squeezing(
                &coeffs,
                &coupling,
                std::f64::consts::FRAC_PI_2 - phi,
                tau,
            )
            .unwrap();
            let scale = 1.0 + s1.abs().max(s2.abs());
            assert!((s1 - r2).abs() < 1e-12 * scale);
            assert!((s2 - r1).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn uncertainty_product_respected() {
        let (coeffs, coupling) = gp_state();
        for k in 0..120 {
            let tau = k as f64 * 0.4;
            let (s1, s2) =
                squeezing(&coeffs, &coupling, std::f64::consts::FRAC_PI_2, tau).unwrap();
            assert!((s1 + 1.0) * (s2 + 1.0) >= 1.0 - 1e-10, "tau = {tau}");
        }
    }

    #[test]
    fn excitation_number_conserved_through_branches() {
        let (coeffs, coupling) = gp_state();
        let reference = coeffs.excitation_number();
        for tau in [0.0, 0.9, 5.5, 23.0, 48.0] {
            let state = evolve(&coeffs, &coupling, tau).unwrap();
            assert!(
                (state.excitation_number() - reference).abs() < 1e-12,
                "tau = {tau}"
            );
        }
    }

    #[test]
    fn norm_residual_stays_tiny() {
        let (coeffs, coupling) = gp_state();
        for tau in [0.0, 1.3, 7.7, 31.0] {
            let s = sample(&coeffs, &coupling, std::f64::consts::FRAC_PI_2, tau).unwrap();
            assert!(s.norm_residual.abs() < 1e-12);
        }
    }

    #[test]
    fn q_zero_at_tau_zero_for_unit_f_regardless_of_g() {
        let coeffs = canonical(2.0, 0.0);
        for g in [
            NonlinearitySpec::Unit,
            NonlinearitySpec::gilmore_perelomov(1.5).unwrap(),
            NonlinearitySpec::barut_girardello(0.5).unwrap(),
        ] {
            let coupling = CouplingParams::new(g, 0.25).unwrap();
            let q = mandel_q(&coeffs, &coupling, 0.0).unwrap().unwrap();
            assert!(q.abs() < 1e-10);
        }
    }
}
