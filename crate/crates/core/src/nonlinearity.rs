//! Intensity functions `f(n)`, `g(n)` and their log-factorials.
//!
//! An intensity function deforms the bosonic ladder operators, `A = a f(n)`,
//! and enters every formula of the simulator through two quantities: the
//! pointwise value `f(n)` for `n >= 1` and the log-factorial
//! `ln [f(n)]! = ln f(1) + ... + ln f(n)` (empty for `n = 0`). `n = 0` is
//! never a valid evaluation point; the factorial convention starts at `f(1)`,
//! which also sidesteps the `1/sqrt(0)` singularity of the Gilmore-Perelomov
//! family at `kappa = 1/2`.

use std::fs;
use std::path::Path;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Smallest Bargmann index accepted for the SU(1,1) families.
pub const MIN_KAPPA: f64 = 0.5;

/// A choice of intensity function, evaluable at photon numbers `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearitySpec {
    /// `f(n) = 1`: intensity-independent.
    Unit,
    /// Gilmore-Perelomov: `f(n) = 1/sqrt(n + 2*kappa - 1)`.
    GilmorePerelomov { kappa: f64 },
    /// Barut-Girardello: `f(n) = sqrt(n + 2*kappa - 1)`, the pointwise
    /// inverse of the Gilmore-Perelomov function at equal `kappa`.
    BarutGirardello { kappa: f64 },
    /// Values `f(1)..f(N)` supplied as a table.
    Tabulated(TabulatedFn),
}

impl NonlinearitySpec {
    /// Gilmore-Perelomov spec, validating `kappa >= 1/2`.
    pub fn gilmore_perelomov(kappa: f64) -> Result<Self> {
        check_kappa(kappa)?;
        Ok(Self::GilmorePerelomov { kappa })
    }

    /// Barut-Girardello spec, validating `kappa >= 1/2`.
    pub fn barut_girardello(kappa: f64) -> Result<Self> {
        check_kappa(kappa)?;
        Ok(Self::BarutGirardello { kappa })
    }

    /// Tabulated spec from the values `f(1)..f(N)`.
    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        Ok(Self::Tabulated(TabulatedFn::new(values)?))
    }

    /// Tabulated spec parsed from the text table format (see
    /// [`TabulatedFn::parse`]).
    pub fn from_table_str(text: &str) -> Result<Self> {
        Ok(Self::Tabulated(TabulatedFn::parse(text)?))
    }

    /// Tabulated spec read from a file in the text table format.
    pub fn from_table_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| {
            Error::InvalidSpec(format!("cannot read table {}: {e}", path.display()))
        })?;
        Self::from_table_str(&text)
    }

    /// Validate the spec parameters without evaluating anything.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Unit | Self::Tabulated(_) => Ok(()),
            Self::GilmorePerelomov { kappa } | Self::BarutGirardello { kappa } => {
                check_kappa(*kappa)
            }
        }
    }

    /// Evaluate the intensity function at `n >= 1`.
    pub fn eval(&self, n: u32) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain { n });
        }
        match self {
            Self::Unit => Ok(1.0),
            Self::GilmorePerelomov { kappa } => {
                check_kappa(*kappa)?;
                Ok((n as f64 + 2.0 * kappa - 1.0).sqrt().recip())
            }
            Self::BarutGirardello { kappa } => {
                check_kappa(*kappa)?;
                Ok((n as f64 + 2.0 * kappa - 1.0).sqrt())
            }
            Self::Tabulated(table) => table.value(n),
        }
    }

    /// `ln [f(n)]! = sum_{k=1..n} ln f(k)`, with the empty product giving 0
    /// at `n = 0`.
    ///
    /// The SU(1,1) families use the closed form
    /// `ln [f(n)]! = ±(ln Γ(n + 2κ) − ln Γ(2κ))/2`; tabulated functions use
    /// prefix sums precomputed at construction.
    pub fn log_f_factorial(&self, n: u32) -> Result<f64> {
        match self {
            Self::Unit => Ok(0.0),
            Self::GilmorePerelomov { kappa } => {
                check_kappa(*kappa)?;
                Ok(-0.5 * ln_gamma_ratio(n, *kappa))
            }
            Self::BarutGirardello { kappa } => {
                check_kappa(*kappa)?;
                Ok(0.5 * ln_gamma_ratio(n, *kappa))
            }
            Self::Tabulated(table) => table.log_prefix(n),
        }
    }
}

/// `ln Γ(n + 2κ) − ln Γ(2κ)`, i.e. `ln[(2κ)(2κ+1)...(2κ+n-1)]`.
fn ln_gamma_ratio(n: u32, kappa: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    ln_gamma(n as f64 + 2.0 * kappa) - ln_gamma(2.0 * kappa)
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa.is_finite() && kappa >= MIN_KAPPA {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!(
            "Bargmann index kappa = {kappa} must be a finite real >= 1/2"
        )))
    }
}

/// A tabulated intensity function covering `n = 1..=N` contiguously with
/// strictly positive values.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedFn {
    values: Vec<f64>,
    log_prefix: Vec<f64>,
}

impl TabulatedFn {
    /// Build from the values `f(1)..f(N)`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSpec(
                "tabulated intensity function needs at least one entry".into(),
            ));
        }
        for (k, v) in values.iter().enumerate() {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "tabulated value f({}) = {v} must be strictly positive",
                    k + 1
                )));
            }
        }
        let mut log_prefix = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        for v in &values {
            acc += v.ln();
            log_prefix.push(acc);
        }
        Ok(Self { values, log_prefix })
    }

    /// Parse the text table format: one `n value` pair per line, `n` strictly
    /// increasing from 1 with no gaps, `#` starting a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (n_str, v_str) = match (fields.next(), fields.next(), fields.next()) {
                (Some(n), Some(v), None) => (n, v),
                _ => {
                    return Err(Error::InvalidSpec(format!(
                        "table line {}: expected `n value`, got {raw:?}",
                        lineno + 1
                    )))
                }
            };
            let n: u32 = n_str.parse().map_err(|_| {
                Error::InvalidSpec(format!("table line {}: bad index {n_str:?}", lineno + 1))
            })?;
            let v: f64 = v_str.parse().map_err(|_| {
                Error::InvalidSpec(format!("table line {}: bad value {v_str:?}", lineno + 1))
            })?;
            let expected = values.len() as u32 + 1;
            if n != expected {
                return Err(Error::InvalidSpec(format!(
                    "table line {}: expected n = {expected}, got {n} (entries must cover 1..N contiguously)",
                    lineno + 1
                )));
            }
            values.push(v);
        }
        Self::new(values)
    }

    /// Largest tabulated `n`.
    pub fn len(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn value(&self, n: u32) -> Result<f64> {
        self.values
            .get(n as usize - 1)
            .copied()
            .ok_or(Error::Domain { n })
    }

    fn log_prefix(&self, n: u32) -> Result<f64> {
        if n == 0 {
            return Ok(0.0);
        }
        // A factorial past the table fails at the first missing point, the
        // same error a term-by-term product of `value(k)` would surface.
        self.log_prefix
            .get(n as usize - 1)
            .copied()
            .ok_or(Error::Domain { n: self.len() + 1 })
    }
}
