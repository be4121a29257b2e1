//! Benchmark signal generators with known dynamical invariants.
//!
//! Random sources use `ChaCha8Rng` seeded from an explicit 64-bit seed;
//! Gaussian draws use `rand_distr::StandardNormal` (ziggurat). Both are pinned
//! through `Cargo.lock`, so generated series are stable across builds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "snake_case")]
pub enum System {
    Logistic { r: f64 },
    Henon { a: f64, b: f64 },
    Lorenz { sigma: f64, rho: f64, beta: f64, dt: f64 },
    /// `period` in samples.
    Sine { period: f64 },
    WhiteNoise { seed: u64 },
    Ar1 { phi: f64, seed: u64 },
}

impl System {
    pub fn henon_canonical() -> Self {
        System::Henon { a: 1.4, b: 0.3 }
    }

    pub fn lorenz_canonical(dt: f64) -> Self {
        System::Lorenz {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
            dt,
        }
    }

    /// Samples per unit of model time (1 for maps and noise).
    pub fn sampling_rate(&self) -> f64 {
        match self {
            System::Lorenz { dt, .. } => 1.0 / dt,
            _ => 1.0,
        }
    }

    fn default_x0(&self) -> Vec<f64> {
        match self {
            System::Logistic { .. } => vec![0.3],
            System::Henon { .. } => vec![0.0, 0.0],
            System::Lorenz { .. } => vec![1.0, 1.0, 1.0],
            System::Sine { .. } => vec![0.0],
            System::WhiteNoise { .. } | System::Ar1 { .. } => vec![0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    #[serde(flatten)]
    pub system: System,
    pub n: usize,
    /// Initial state; `None` selects the system's documented default.
    pub x0: Option<Vec<f64>>,
    pub transient: usize,
    /// Sampling rate stamped on the output; defaults to the system's own.
    pub sampling_rate: Option<f64>,
}

impl SystemSpec {
    pub fn new(system: System, n: usize) -> Self {
        Self {
            system,
            n,
            x0: None,
            transient: 0,
            sampling_rate: None,
        }
    }

    pub fn with_transient(mut self, transient: usize) -> Self {
        self.transient = transient;
        self
    }

    pub fn with_x0(mut self, x0: Vec<f64>) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn with_sampling_rate(mut self, rate: f64) -> Self {
        self.sampling_rate = Some(rate);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.n == 0 {
            return bad("sample count n must be positive".into());
        }
        let x0 = self.x0.clone().unwrap_or_else(|| self.system.default_x0());
        match self.system {
            System::Logistic { r } => {
                if !(r > 0.0 && r <= 4.0) {
                    return bad(format!("logistic r must lie in (0, 4], got {r}"));
                }
                if x0.len() != 1 || !(x0[0] > 0.0 && x0[0] < 1.0) {
                    return bad(format!("logistic x0 must lie in (0, 1), got {x0:?}"));
                }
            }
            System::Henon { a, b } => {
                if !a.is_finite() || !b.is_finite() || x0.len() != 2 {
                    return bad("henon needs finite a, b and a 2-element x0".into());
                }
            }
            System::Lorenz {
                sigma,
                rho,
                beta,
                dt,
            } => {
                if !(dt > 0.0 && dt.is_finite()) {
                    return bad(format!("lorenz dt must be positive, got {dt}"));
                }
                if ![sigma, rho, beta].iter().all(|v| v.is_finite()) || x0.len() != 3 {
                    return bad("lorenz needs finite parameters and a 3-element x0".into());
                }
            }
            System::Sine { period } => {
                if !(period > 0.0 && period.is_finite()) {
                    return bad(format!("sine period must be positive, got {period}"));
                }
            }
            System::WhiteNoise { .. } => {}
            System::Ar1 { phi, .. } => {
                if !(phi.abs() < 1.0) {
                    return bad(format!("ar1 phi must lie in (-1, 1), got {phi}"));
                }
            }
        }
        if let Some(rate) = self.sampling_rate {
            if !(rate > 0.0 && rate.is_finite()) {
                return bad(format!("sampling rate must be positive, got {rate}"));
            }
        }
        Ok(())
    }
}

/// Logistic-map slope `x ↦ r − 2 r x`.
pub fn derivative_logistic(r: f64) -> impl Fn(f64) -> f64 + Copy {
    move |x| r - 2.0 * r * x
}

pub fn lorenz_field(s: [f64; 3], sigma: f64, rho: f64, beta: f64) -> [f64; 3] {
    [
        sigma * (s[1] - s[0]),
        s[0] * (rho - s[2]) - s[1],
        s[0] * s[1] - beta * s[2],
    ]
}

fn rk4_step(s: [f64; 3], dt: f64, f: impl Fn([f64; 3]) -> [f64; 3]) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], h: f64| [a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]];
    let k1 = f(s);
    let k2 = f(add(s, k1, dt / 2.0));
    let k3 = f(add(s, k2, dt / 2.0));
    let k4 = f(add(s, k3, dt));
    [
        s[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        s[2] + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

/// Generates `n` recorded samples after discarding `transient` samples.
/// The first recorded sample is the state after the transient (the initial
/// condition itself when `transient == 0`).
pub fn generate(spec: &SystemSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let x0 = spec.x0.clone().unwrap_or_else(|| spec.system.default_x0());
    let total = spec.transient + spec.n;
    let mut out = Vec::with_capacity(spec.n);
    let mut record = |step: usize, v: f64| -> Result<()> {
        if !v.is_finite() {
            return Err(Error::Divergent(step));
        }
        if step >= spec.transient {
            out.push(v);
        }
        Ok(())
    };

    match spec.system {
        System::Logistic { r } => {
            let mut x = x0[0];
            for step in 0..total {
                record(step, x)?;
                x = r * x * (1.0 - x);
            }
        }
        System::Henon { a, b } => {
            let (mut x, mut y) = (x0[0], x0[1]);
            for step in 0..total {
                record(step, x)?;
                let nx = 1.0 - a * x * x + y;
                y = b * x;
                x = nx;
            }
        }
        System::Lorenz {
            sigma,
            rho,
            beta,
            dt,
        } => {
            let mut s = [x0[0], x0[1], x0[2]];
            for step in 0..total {
                record(step, s[0])?;
                s = rk4_step(s, dt, |u| lorenz_field(u, sigma, rho, beta));
            }
        }
        System::Sine { period } => {
            let w = std::f64::consts::TAU / period;
            for step in 0..total {
                record(step, (w * step as f64 + x0[0]).sin())?;
            }
        }
        System::WhiteNoise { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for step in 0..total {
                record(step, StandardNormal.sample(&mut rng))?;
            }
        }
        System::Ar1 { phi, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut x = x0[0];
            for step in 0..total {
                record(step, x)?;
                let e: f64 = StandardNormal.sample(&mut rng);
                x = phi * x + e;
            }
        }
    }
    let rate = spec
        .sampling_rate
        .unwrap_or_else(|| spec.system.sampling_rate());
    TimeSeries::new(out, rate)
}
