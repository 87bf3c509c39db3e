//! Independent brute-force verifier.
//!
//! Builds the resonant interaction Hamiltonian on the truncated atom⊗field
//! basis and integrates the Schrödinger equation directly. The Hamiltonian
//! conserves the excitation number, so the basis splits into sectors
//! `{|e2,n-1>, |e1,n>, |g,n+1>}` that are diagonalized numerically (the
//! eigenvalues come out as `0, ±Omega_n`, but nothing here assumes the
//! closed-form solution — that is the point of the oracle). A fixed-step
//! fourth-order integrator over the full matrix is kept as a second opinion.
//!
//! Unlike the closed-form path, the oracle carries the free-evolution phase
//! with an arbitrary test frequency `omega0`; every reported observable must
//! come out independent of it.

use nalgebra::{DMatrix, Matrix2, Matrix3, SymmetricEigen};
use num_complex::Complex64;

use crate::coherent::CoefficientVector;
use crate::dynamics::CouplingParams;
use crate::error::{Error, Result};
use crate::observables::ObservableSample;

const EIGEN_EPS: f64 = 1e-14;
const EIGEN_MAX_ITER: usize = 1024;

/// The three atomic levels of the cascade configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomLevel {
    /// Ground state `|g>`.
    Ground,
    /// Middle level `|e1>`, the initial state of the atom.
    FirstExcited,
    /// Upper level `|e2>`.
    SecondExcited,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; 3] = [
        AtomLevel::Ground,
        AtomLevel::FirstExcited,
        AtomLevel::SecondExcited,
    ];

    /// Eigenvalue of the inversion operator `S_z = |e2><e2| - |g><g|`.
    pub fn s_z(self) -> f64 {
        match self {
            AtomLevel::Ground => -1.0,
            AtomLevel::FirstExcited => 0.0,
            AtomLevel::SecondExcited => 1.0,
        }
    }

    fn offset(self) -> usize {
        match self {
            AtomLevel::Ground => 0,
            AtomLevel::FirstExcited => 1,
            AtomLevel::SecondExcited => 2,
        }
    }
}

/// Index of `|level, n>` in the flattened basis.
pub fn basis_index(level: AtomLevel, n: u32) -> usize {
    3 * n as usize + level.offset()
}

/// Full state vector on the truncated basis `{|g,n>, |e1,n>, |e2,n> :
/// n = 0..=n_max+1}`, evolved by direct integration.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleState {
    amplitudes: Vec<Complex64>,
    field_dim: usize,
    tau: f64,
    omega0: f64,
}

impl OracleState {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Number of Fock states kept per atomic level.
    pub fn field_dim(&self) -> usize {
        self.field_dim
    }

    /// Amplitude of `|level, n>`; zero outside the stored range.
    pub fn amplitude(&self, level: AtomLevel, n: u32) -> Complex64 {
        if (n as usize) < self.field_dim {
            self.amplitudes[basis_index(level, n)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Coupling strengths of excitation sector `m`: `|e1,m>` to `|e2,m-1>` and
/// to `|g,m+1>`.
fn sector_couplings(coupling: &CouplingParams, m: u32) -> Result<(f64, f64)> {
    let g = coupling.g_spec();
    let upper = if m == 0 {
        0.0
    } else {
        (m as f64).sqrt() * g.eval(m)?
    };
    let lower = coupling.beta() * (m as f64 + 1.0).sqrt() * g.eval(m + 1)?;
    Ok((upper, lower))
}

/// Interaction Hamiltonian at resonance on the truncated basis, in units of
/// the upper-transition coupling (entries are dimensionless).
///
/// Nonzero elements: `<e2,n-1|H|e1,n> = sqrt(n) g(n)` and
/// `<g,n+1|H|e1,n> = beta sqrt(n+1) g(n+1)`, plus Hermitian conjugates.
pub fn build_hamiltonian(coupling: &CouplingParams, n_max: u32) -> Result<DMatrix<f64>> {
    let field_dim = n_max as usize + 2;
    let dim = 3 * field_dim;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for n in 1..=n_max + 1 {
        let g = coupling.g_spec().eval(n)?;
        let elem = (n as f64).sqrt() * g;
        let i = basis_index(AtomLevel::SecondExcited, n - 1);
        let j = basis_index(AtomLevel::FirstExcited, n);
        h[(i, j)] = elem;
        h[(j, i)] = elem;
    }
    for n in 0..=n_max {
        let g = coupling.g_spec().eval(n + 1)?;
        let elem = coupling.beta() * (n as f64 + 1.0).sqrt() * g;
        let i = basis_index(AtomLevel::Ground, n + 1);
        let j = basis_index(AtomLevel::FirstExcited, n);
        h[(i, j)] = elem;
        h[(j, i)] = elem;
    }
    Ok(h)
}

/// Evolve one sector by numeric diagonalization: given the real symmetric
/// sector matrix spectrum `(eigenvalues, eigenvectors)`, the seed position
/// `k` within the sector and the seed amplitude, return the sector
/// amplitudes at `tau`.
fn propagate_sector(
    eigenvalues: &[f64],
    eigenvectors: &dyn Fn(usize, usize) -> f64,
    dim: usize,
    seed_pos: usize,
    seed: Complex64,
    tau: f64,
) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for (j, &lambda) in eigenvalues.iter().enumerate() {
        let weight = seed * eigenvectors(seed_pos, j) * Complex64::from_polar(1.0, -lambda * tau);
        for (i, slot) in out.iter_mut().enumerate() {
            *slot += weight * eigenvectors(i, j);
        }
    }
    out
}

/// Integrate the initial `|e1> ⊗ sum C_n |n>` state to `tau` by per-sector
/// numeric diagonalization, then apply the free-evolution phases
/// `e^{-i omega0 (s_z + n) tau}` of the Schrödinger picture.
pub fn integrate(
    initial: &CoefficientVector,
    coupling: &CouplingParams,
    tau: f64,
    omega0: f64,
) -> Result<OracleState> {
    let n_max = initial.n_max();
    let field_dim = n_max as usize + 2;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 3 * field_dim];

    for (m, &seed) in initial.coeffs().iter().enumerate() {
        let m = m as u32;
        let (a, b) = sector_couplings(coupling, m)?;
        if m == 0 {
            // two-state sector {|e1,0>, |g,1>}
            let h = Matrix2::new(0.0, b, b, 0.0);
            let eig = SymmetricEigen::try_new(h, EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(|| {
                Error::Convergence("eigensolver failed on a 2x2 sector".into())
            })?;
            let vecs = eig.eigenvectors;
            let evolved = propagate_sector(
                eig.eigenvalues.as_slice(),
                &|i, j| vecs[(i, j)],
                2,
                0,
                seed,
                tau,
            );
            amplitudes[basis_index(AtomLevel::FirstExcited, 0)] += evolved[0];
            amplitudes[basis_index(AtomLevel::Ground, 1)] += evolved[1];
        } else {
            // three-state sector {|e2,m-1>, |e1,m>, |g,m+1>}
            let h = Matrix3::new(0.0, a, 0.0, a, 0.0, b, 0.0, b, 0.0);
            let eig = SymmetricEigen::try_new(h, EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(|| {
                Error::Convergence(format!("eigensolver failed on sector {m}"))
            })?;
            let vecs = eig.eigenvectors;
            let evolved = propagate_sector(
                eig.eigenvalues.as_slice(),
                &|i, j| vecs[(i, j)],
                3,
                1,
                seed,
                tau,
            );
            amplitudes[basis_index(AtomLevel::SecondExcited, m - 1)] += evolved[0];
            amplitudes[basis_index(AtomLevel::FirstExcited, m)] += evolved[1];
            amplitudes[basis_index(AtomLevel::Ground, m + 1)] += evolved[2];
        }
    }

    apply_free_phases(&mut amplitudes, field_dim, omega0, tau);
    Ok(OracleState {
        amplitudes,
        field_dim,
        tau,
        omega0,
    })
}

/// Second-opinion integrator: fixed-step fourth-order Runge-Kutta over the
/// full Hamiltonian matrix, using its sparsity pattern for the products.
pub fn integrate_rk4(
    initial: &CoefficientVector,
    coupling: &CouplingParams,
    tau: f64,
    omega0: f64,
    steps: usize,
) -> Result<OracleState> {
    if steps == 0 {
        return Err(Error::InvalidSpec("rk4 integration needs steps >= 1".into()));
    }
    let n_max = initial.n_max();
    let field_dim = n_max as usize + 2;
    let h = build_hamiltonian(coupling, n_max)?;
    let nonzero: Vec<(usize, usize, f64)> = (0..h.nrows())
        .flat_map(|i| (0..h.ncols()).map(move |j| (i, j)))
        .filter(|&(i, j)| h[(i, j)] != 0.0)
        .map(|(i, j)| (i, j, h[(i, j)]))
        .collect();

    let dim = 3 * field_dim;
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    for (n, &c) in initial.coeffs().iter().enumerate() {
        psi[basis_index(AtomLevel::FirstExcited, n as u32)] = c;
    }

    // psi' = -i H psi
    let rhs = |state: &[Complex64], out: &mut Vec<Complex64>| {
        out.clear();
        out.resize(dim, Complex64::new(0.0, 0.0));
        for &(i, j, v) in &nonzero {
            out[i] += Complex64::new(0.0, -v) * state[j];
        }
    };

    let dt = tau / steps as f64;
    let mut k1 = Vec::new();
    let mut k2 = Vec::new();
    let mut k3 = Vec::new();
    let mut k4 = Vec::new();
    let mut stage = vec![Complex64::new(0.0, 0.0); dim];
    for _ in 0..steps {
        rhs(&psi, &mut k1);
        for i in 0..dim {
            stage[i] = psi[i] + 0.5 * dt * k1[i];
        }
        rhs(&stage, &mut k2);
        for i in 0..dim {
            stage[i] = psi[i] + 0.5 * dt * k2[i];
        }
        rhs(&stage, &mut k3);
        for i in 0..dim {
            stage[i] = psi[i] + dt * k3[i];
        }
        rhs(&stage, &mut k4);
        for i in 0..dim {
            psi[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
    }

    apply_free_phases(&mut psi, field_dim, omega0, tau);
    Ok(OracleState {
        amplitudes: psi,
        field_dim,
        tau,
        omega0,
    })
}

fn apply_free_phases(amplitudes: &mut [Complex64], field_dim: usize, omega0: f64, tau: f64) {
    for n in 0..field_dim {
        for level in AtomLevel::ALL {
            let phase = -omega0 * (level.s_z() + n as f64) * tau;
            amplitudes[basis_index(level, n as u32)] *= Complex64::from_polar(1.0, phase);
        }
    }
}

/// Compute every observable by direct summation over the raw amplitudes.
///
/// The quadratures use the rotating-frame operator `A = a e^{i omega0 tau}`,
/// which cancels the free-evolution phase at resonance; the results are
/// therefore independent of the `omega0` the state was integrated with.
pub fn observables_from_state(state: &OracleState) -> ObservableSample {
    let mut norm = 0.0;
    let mut mean_n = 0.0;
    let mut second = 0.0;
    let mut s_z = 0.0;
    let mut a_exp = Complex64::new(0.0, 0.0);
    let mut a2_exp = Complex64::new(0.0, 0.0);

    for level in AtomLevel::ALL {
        for n in 0..state.field_dim as u32 {
            let amp = state.amplitude(level, n);
            let p = amp.norm_sqr();
            let nf = n as f64;
            norm += p;
            mean_n += nf * p;
            second += nf * nf * p;
            s_z += level.s_z() * p;
            a_exp += amp.conj() * state.amplitude(level, n + 1) * (nf + 1.0).sqrt();
            a2_exp +=
                amp.conj() * state.amplitude(level, n + 2) * ((nf + 1.0) * (nf + 2.0)).sqrt();
        }
    }

    let rot = Complex64::from_polar(1.0, state.omega0 * state.tau);
    let a_rot = a_exp * rot;
    let a2_rot = a2_exp * rot * rot;
    let s1 = 2.0 * a2_rot.re + 2.0 * mean_n - 4.0 * a_rot.re * a_rot.re;
    let s2 = -2.0 * a2_rot.re + 2.0 * mean_n - 4.0 * a_rot.im * a_rot.im;
    let mandel_q = if mean_n == 0.0 {
        None
    } else {
        Some((second - mean_n * mean_n) / mean_n - 1.0)
    };

    ObservableSample {
        tau: state.tau,
        mean_n,
        s_z,
        mandel_q,
        s1,
        s2,
        norm_residual: 1.0 - norm,
    }
}
