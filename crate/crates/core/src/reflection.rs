//! The Skorokhod reflection map and the queueing processes built on it.
//!
//! The regulator of a path Γ is `Ψ(Γ)(t) = sup_{0≤s≤t} (−Γ(s))₊` and the
//! reflection is `Φ(Γ) = Γ + Ψ(Γ)`: the minimal nondecreasing pushing that
//! keeps the path nonnegative. For step paths both maps are computed exactly
//! over the attained segment values; for grid paths they are running maxima
//! over the grid, which agrees bit for bit with the exact map whenever the
//! grid contains every jump epoch.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::distributions::InterarrivalModel;
use crate::path::{GridPath, StepPath};
use crate::samplers::ConditionedRow;
use crate::{Result, SimError};

// ============================================================================
// Reflection map
// ============================================================================

/// Paths the Skorokhod map applies to.
pub trait Reflect: Sized {
    /// The regulator `Ψ(Γ)`: nondecreasing, nonnegative, starting at `(−Γ(0))₊`.
    fn regulator(&self) -> Self;
    /// The reflection `Φ(Γ) = Γ + Ψ(Γ)`: nonnegative and ≥ Γ pointwise.
    fn reflect(&self) -> Self;
}

impl Reflect for StepPath {
    fn regulator(&self) -> Self {
        // Running max of (−value)₊ over the attained segments. If a jump sits
        // at epoch 0 the initial value is never attained, but keeping the same
        // epoch set means the first post-jump value overrides it anyway.
        let attained_initial = if self.jump_epochs().first().copied() == Some(0.0) {
            -self.post_jump_values()[0]
        } else {
            -self.initial_value()
        };
        let mut running = attained_initial.max(0.0);
        let initial = running;
        let values: Vec<f64> = self
            .post_jump_values()
            .iter()
            .map(|&v| {
                running = running.max(-v);
                running
            })
            .collect();
        StepPath::new(initial, self.horizon(), self.jump_epochs().to_vec(), values)
            .expect("regulator of a valid path is valid")
    }

    fn reflect(&self) -> Self {
        let psi = self.regulator();
        let values: Vec<f64> = self
            .post_jump_values()
            .iter()
            .zip(psi.post_jump_values().iter())
            .map(|(&g, &p)| g + p)
            .collect();
        StepPath::new(
            self.initial_value() + psi.initial_value(),
            self.horizon(),
            self.jump_epochs().to_vec(),
            values,
        )
        .expect("reflection of a valid path is valid")
    }
}

impl Reflect for GridPath {
    fn regulator(&self) -> Self {
        let mut running = 0.0_f64;
        let values: Vec<f64> = self
            .values()
            .iter()
            .map(|&v| {
                running = running.max(-v);
                running
            })
            .collect();
        GridPath::new(self.horizon(), values).expect("same shape as input")
    }

    fn reflect(&self) -> Self {
        let psi = self.regulator();
        let values: Vec<f64> =
            self.values().iter().zip(psi.values().iter()).map(|(&g, &p)| g + p).collect();
        GridPath::new(self.horizon(), values).expect("same shape as input")
    }
}

// ============================================================================
// Service model
// ============================================================================

/// A unit-mean service-time family with known variance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ServiceModel {
    /// Exponential with mean 1 (variance 1).
    Exponential,
    /// Deterministic 1 (variance 0).
    Deterministic,
    /// Lognormal with mean exactly 1 and the given variance.
    LogNormal { variance: f64 },
}

impl ServiceModel {
    pub fn log_normal(variance: f64) -> Result<Self> {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(SimError::InvalidModel(format!(
                "lognormal variance must be > 0, got {variance}"
            )));
        }
        Ok(Self::LogNormal { variance })
    }

    pub fn mean(&self) -> f64 {
        1.0
    }

    pub fn variance(&self) -> f64 {
        match self {
            Self::Exponential => 1.0,
            Self::Deterministic => 0.0,
            Self::LogNormal { variance } => *variance,
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Exponential => loop {
                let u: f64 = rng.random();
                if u > 0.0 {
                    return -(-u).ln_1p();
                }
            },
            Self::Deterministic => 1.0,
            Self::LogNormal { variance } => {
                // mean 1 pins the log-scale parameters: v = ln(1+σ²), m = −v/2.
                let v = (1.0 + variance).ln();
                let z: f64 = rng.sample(StandardNormal);
                (-0.5 * v + v.sqrt() * z).exp()
            }
        }
    }

    pub fn sample_vec<R: Rng>(&self, count: usize, rng: &mut R) -> Vec<f64> {
        (0..count).map(|_| self.sample(rng)).collect()
    }
}

// ============================================================================
// Transitory-queue netput and workload
// ============================================================================

/// Customer-indexed netput of the conditioned queue:
/// `Γ_n(t) = (1/n) Σ_{i≤⌊nt⌋} ν_i − Σ_{i≤⌊nt⌋} ξ_i` on `t ∈ [0, 1]`,
/// a step path with jumps at `i/n` of size `νᵢ/n − ξᵢ`.
pub fn netput_gamma_n(row: &ConditionedRow, services: &[f64]) -> Result<StepPath> {
    let n = row.n();
    if services.len() != n {
        return Err(SimError::Shape(format!(
            "need one service time per arrival: {} arrivals, {} services",
            n,
            services.len()
        )));
    }
    if services.iter().any(|&v| !(v.is_finite() && v >= 0.0)) {
        return Err(SimError::Data("service times must be nonnegative and finite".into()));
    }
    let n_f = n as f64;
    let epochs: Vec<f64> = (1..=n).map(|i| i as f64 / n_f).collect();
    let mut values = Vec::with_capacity(n);
    let mut acc = 0.0;
    for (nu, xi) in services.iter().zip(row.xi()[..n].iter()) {
        acc += nu / n_f - xi;
        values.push(acc);
    }
    StepPath::new(0.0, 1.0, epochs, values)
}

/// Workload path `Φ(Γ_n)` of the conditioned queue.
pub fn workload(row: &ConditionedRow, services: &[f64]) -> Result<StepPath> {
    Ok(netput_gamma_n(row, services)?.reflect())
}

// ============================================================================
// Heavy-traffic comparator
// ============================================================================

/// A conventional single-server queue at heavy traffic: arrival rate `n`,
/// service rate `n − θ√n`, i.i.d. unit-mean interarrival times, and service
/// times scaled to mean `n/(n − θ√n)`.
#[derive(Clone, Debug)]
pub struct HeavyTrafficSpec {
    pub theta: f64,
    pub n: usize,
    pub arrival: InterarrivalModel,
    pub service: ServiceModel,
}

impl HeavyTrafficSpec {
    pub fn new(
        theta: f64,
        n: usize,
        arrival: InterarrivalModel,
        service: ServiceModel,
    ) -> Result<Self> {
        if n == 0 {
            return Err(SimError::Domain("need n >= 1".into()));
        }
        if !theta.is_finite() || n as f64 - theta * (n as f64).sqrt() <= 0.0 {
            return Err(SimError::Domain(format!(
                "need n − θ√n > 0, got n={n} θ={theta}"
            )));
        }
        if (arrival.mean() - 1.0).abs() > 1e-9 {
            return Err(SimError::InvalidModel(format!(
                "heavy-traffic arrivals must have mean 1, got {}",
                arrival.mean()
            )));
        }
        Ok(Self { theta, n, arrival, service })
    }

    pub fn arrival_rate(&self) -> f64 {
        self.n as f64
    }

    pub fn service_rate(&self) -> f64 {
        self.n as f64 - self.theta * (self.n as f64).sqrt()
    }

    /// The mean each service draw is scaled to: `n / (n − θ√n)`.
    pub fn service_mean(&self) -> f64 {
        self.n as f64 / self.service_rate()
    }

    /// `n^{3/2} (1/μ_n − 1/λ_n)`, the quantity whose limit is θ.
    pub fn scaled_drift(&self) -> f64 {
        let n = self.n as f64;
        n.powf(1.5) * (1.0 / self.service_rate() - 1.0 / self.arrival_rate())
    }
}

/// Heavy-traffic netput assembled from explicit draws.
///
/// The displayed form is (centered services) − (centered interarrivals)
/// plus the drift term `nt(1/μ_n − 1/λ_n)`; the three affine-in-t pieces
/// cancel identically, leaving the pure step path
/// `(1/n) Σ_{i≤⌊nt⌋} (νᵢ − ξᵢ)`, so the drift enters only through the
/// inflated service mean.
pub fn ht_netput_from_draws(services: &[f64], interarrivals: &[f64]) -> Result<StepPath> {
    if services.len() != interarrivals.len() || services.is_empty() {
        return Err(SimError::Shape(format!(
            "need equally many services and interarrivals (>= 1), got {} and {}",
            services.len(),
            interarrivals.len()
        )));
    }
    let n = services.len();
    let n_f = n as f64;
    let epochs: Vec<f64> = (1..=n).map(|i| i as f64 / n_f).collect();
    let mut values = Vec::with_capacity(n);
    let mut acc = 0.0;
    for (nu, xi) in services.iter().zip(interarrivals.iter()) {
        acc += (nu - xi) / n_f;
        values.push(acc);
    }
    StepPath::new(0.0, 1.0, epochs, values)
}

/// Netput of the heavy-traffic queue on `t ∈ [0, 1]`, with unconditioned
/// i.i.d. draws: services scaled to mean `n/(n − θ√n)`, interarrivals from
/// the unit-mean arrival model.
pub fn ht_netput<R: Rng>(spec: &HeavyTrafficSpec, rng: &mut R) -> StepPath {
    let n = spec.n;
    let scale = spec.service_mean();
    let services: Vec<f64> = (0..n).map(|_| scale * spec.service.sample(rng)).collect();
    let interarrivals: Vec<f64> = (0..n).map(|_| spec.arrival.sample(rng)).collect();
    ht_netput_from_draws(&services, &interarrivals).expect("equal lengths by construction")
}
