//! Closed-form time evolution of the coupled atom-field state at resonance.
//!
//! The atom starts in its middle level `|e1>` with the field in the prepared
//! coherent state, and each excitation sector evolves independently: the
//! amplitude on `|e1,n>` oscillates at the generalized Rabi frequency
//! `Omega_n = sqrt(n g^2(n) + beta^2 (n+1) g^2(n+1))`, feeding the
//! `|g,n+1>` and `|e2,n-1>` branches. Time is the scaled `tau` (physical
//! time times the upper-transition coupling); `beta` is the ratio of the
//! lower- to upper-transition couplings.
//!
//! The overall free-evolution phase per sector is unobservable in every
//! reported quantity and is omitted from the stored amplitudes; the
//! [`crate::oracle`] module carries it explicitly with an arbitrary test
//! frequency to confirm the cancellation.

use num_complex::Complex64;

use crate::coherent::CoefficientVector;
use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearitySpec;

/// Atom-field coupling: the intensity function `g(n)` and the
/// adjacent-transition coupling ratio `beta`.
///
/// `beta = 0` reduces to a two-level atom on the upper transition;
/// `beta = 1` is the equal-dipole case.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingParams {
    g_spec: NonlinearitySpec,
    beta: f64,
}

impl CouplingParams {
    pub fn new(g_spec: NonlinearitySpec, beta: f64) -> Result<Self> {
        g_spec.validate()?;
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "beta = {beta} must be a finite nonnegative real"
            )));
        }
        Ok(Self { g_spec, beta })
    }

    pub fn g_spec(&self) -> &NonlinearitySpec {
        &self.g_spec
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Generalized Rabi frequency `Omega_n = sqrt(n g^2(n) + beta^2 (n+1)
/// g^2(n+1))` of the excitation sector seeded by `|e1,n>`.
///
/// At `n = 0` the first summand is identically zero, so `g(0)` is never
/// evaluated.
pub fn rabi_frequency(coupling: &CouplingParams, n: u32) -> Result<f64> {
    let g = coupling.g_spec();
    let first = if n == 0 {
        0.0
    } else {
        let gn = g.eval(n)?;
        n as f64 * gn * gn
    };
    let gn1 = g.eval(n + 1)?;
    let beta = coupling.beta();
    Ok((first + beta * beta * (n as f64 + 1.0) * gn1 * gn1).sqrt())
}

/// `sin(omega tau)/omega`, with the `omega = 0` limit `tau`.
///
/// The degenerate case only arises for the `n = 0` sector at `beta = 0`.
pub(crate) fn sin_ratio(omega: f64, tau: f64) -> f64 {
    if omega == 0.0 {
        tau
    } else {
        (omega * tau).sin() / omega
    }
}

/// The evolved atom-field state at scaled time `tau`, stored per branch.
///
/// Index `n` runs over the seeding Fock component: `a_e1[n]` rides on
/// `|e1,n>`, `a_g[n]` on `|g,n+1>`, and `a_e2[n]` on `|e2,n-1>` (so
/// `a_e2[0]` is identically zero).
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedState {
    a_e1: Vec<Complex64>,
    a_g: Vec<Complex64>,
    a_e2: Vec<Complex64>,
    tau: f64,
}

impl EvolvedState {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn n_max(&self) -> u32 {
        (self.a_e1.len() - 1) as u32
    }

    /// Amplitudes on `|e1,n>` for `n = 0..=n_max`.
    pub fn a_e1(&self) -> &[Complex64] {
        &self.a_e1
    }

    /// Amplitudes on `|g,n+1>` for `n = 0..=n_max`.
    pub fn a_g(&self) -> &[Complex64] {
        &self.a_g
    }

    /// Amplitudes on `|e2,n-1>` for `n = 0..=n_max`; the `n = 0` slot is
    /// always zero.
    pub fn a_e2(&self) -> &[Complex64] {
        &self.a_e2
    }

    /// Total squared norm across the three branches.
    pub fn norm_sqr(&self) -> f64 {
        self.a_e1
            .iter()
            .chain(&self.a_g)
            .chain(&self.a_e2)
            .map(|z| z.norm_sqr())
            .sum()
    }

    /// Probability of finding the atom in `|e1>`.
    pub fn population_e1(&self) -> f64 {
        self.a_e1.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Probability of finding the atom in the ground state.
    pub fn population_g(&self) -> f64 {
        self.a_g.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Probability of finding the atom in the upper state `|e2>`.
    pub fn population_e2(&self) -> f64 {
        self.a_e2.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Mean photon number from branch bookkeeping: the `|g,n+1>` branch
    /// holds one photon more than its seed, the `|e2,n-1>` branch one less.
    pub fn mean_photon_number(&self) -> f64 {
        let mut acc = 0.0;
        for n in 0..self.a_e1.len() {
            let nf = n as f64;
            acc += nf * self.a_e1[n].norm_sqr()
                + (nf + 1.0) * self.a_g[n].norm_sqr()
                + (nf - 1.0) * self.a_e2[n].norm_sqr();
        }
        acc
    }

    /// Conserved excitation number `<n> + P(e2) - P(g)`.
    pub fn excitation_number(&self) -> f64 {
        self.mean_photon_number() + self.population_e2() - self.population_g()
    }
}

/// Evolve the initial `|e1> ⊗ sum C_n |n>` state to scaled time `tau`.
///
/// Per sector `n`:
/// `a_e1 = C_n cos(Omega_n tau)`,
/// `a_g  = -i C_n beta sqrt(n+1) g(n+1) sin(Omega_n tau)/Omega_n`,
/// `a_e2 = -i C_n sqrt(n) g(n) sin(Omega_n tau)/Omega_n`.
pub fn evolve(
    coeffs: &CoefficientVector,
    coupling: &CouplingParams,
    tau: f64,
) -> Result<EvolvedState> {
    let g = coupling.g_spec();
    let beta = coupling.beta();
    let len = coeffs.coeffs().len();
    let mut a_e1 = Vec::with_capacity(len);
    let mut a_g = Vec::with_capacity(len);
    let mut a_e2 = Vec::with_capacity(len);
    let minus_i = Complex64::new(0.0, -1.0);

    for (n, &c) in coeffs.coeffs().iter().enumerate() {
        let nf = n as f64;
        let gn = if n == 0 { 0.0 } else { g.eval(n as u32)? };
        let gn1 = g.eval(n as u32 + 1)?;
        let omega = (nf * gn * gn + beta * beta * (nf + 1.0) * gn1 * gn1).sqrt();
        let s = sin_ratio(omega, tau);
        a_e1.push(c * (omega * tau).cos());
        a_g.push(minus_i * c * (beta * (nf + 1.0).sqrt() * gn1 * s));
        a_e2.push(minus_i * c * (nf.sqrt() * gn * s));
    }
    Ok(EvolvedState {
        a_e1,
        a_g,
        a_e2,
        tau,
    })
}
