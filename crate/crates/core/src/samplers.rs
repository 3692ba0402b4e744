//! Generation of conditioned arrival data.
//!
//! Two routes produce arrivals conditioned on exactly `n` events in `[0, T]`:
//!
//! * the ordered-statistics route, exact for the (possibly nonhomogeneous)
//!   Poisson family: given the count, event epochs are distributed as the
//!   order statistics of `n` i.i.d. draws from `Γ(t)/Γ(T)`;
//! * plain rejection for a general renewal family: draw i.i.d. interarrival
//!   times and accept when the first `n` fit inside the horizon and the
//!   `(n+1)`-st overshoots it.
//!
//! Rejection is exactly correct but slow when `n` is far from `T/E[ξ]`; the
//! acceptance estimator and the `max_attempts` guard keep that failure mode
//! loud instead of silent. For an exponential model, choosing rate `n/T`
//! leaves the conditioned law unchanged and puts the acceptance probability
//! at its maximum, on the order of `1/sqrt(n)`.

use rand::Rng;

use crate::distributions::{InterarrivalModel, TimeHorizon};
use crate::quadrature::adaptive_simpson;
use crate::stats::{self, KsResult};
use crate::{Result, SimError};

// ============================================================================
// Data types
// ============================================================================

/// One row of the conditioned triangular array: `n + 1` interarrival times
/// `ξ₁, …, ξ_{n+1}` with `ξ₁ + … + ξ_n ≤ T < ξ₁ + … + ξ_{n+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionedRow {
    n: usize,
    horizon: f64,
    xi: Vec<f64>,
}

impl ConditionedRow {
    pub fn new(n: usize, horizon: TimeHorizon, xi: Vec<f64>) -> Result<Self> {
        let t = horizon.value();
        if n == 0 {
            return Err(SimError::Domain("conditioned row needs n >= 1".into()));
        }
        if xi.len() != n + 1 {
            return Err(SimError::Shape(format!(
                "row for n={n} needs {} interarrival times, got {}",
                n + 1,
                xi.len()
            )));
        }
        if xi.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(SimError::Data("interarrival times must be positive and finite".into()));
        }
        let mut sum = 0.0;
        for (i, &x) in xi.iter().enumerate() {
            let next = sum + x;
            if next <= sum {
                // Positive in exact arithmetic but lost to rounding; treat as a tie.
                return Err(SimError::Data("partial sums must be strictly increasing".into()));
            }
            sum = next;
            if i + 1 == n && sum > t {
                return Err(SimError::Data(format!("sum of first {n} times exceeds horizon {t}")));
            }
        }
        if sum <= t {
            return Err(SimError::Data(format!(
                "sum of all {} times must exceed horizon {t}",
                n + 1
            )));
        }
        Ok(Self { n, horizon: t, xi })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// All `n + 1` interarrival times.
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    /// Partial sums `S₁, …, S_{n+1}` (sequential left-to-right summation).
    pub fn partial_sums(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.xi.len());
        let mut sum = 0.0;
        for &x in &self.xi {
            sum += x;
            out.push(sum);
        }
        out
    }

    /// The `n` arrival epochs `S₁, …, S_n` inside the horizon.
    pub fn arrival_epochs(&self) -> Vec<f64> {
        let mut out = self.partial_sums();
        out.pop();
        out
    }
}

/// Event epochs of a Poisson process conditioned on `n` events in `[0, T]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionedPoissonSample {
    n: usize,
    horizon: f64,
    epochs: Vec<f64>,
}

impl ConditionedPoissonSample {
    pub fn new(horizon: TimeHorizon, epochs: Vec<f64>) -> Result<Self> {
        let t = horizon.value();
        if epochs.is_empty() {
            return Err(SimError::Domain("conditioned Poisson sample needs n >= 1".into()));
        }
        if epochs.iter().any(|&e| !(e > 0.0 && e < t)) {
            return Err(SimError::Domain("epochs must lie strictly inside (0, horizon)".into()));
        }
        let strictly_increasing =
            |w: &[f64]| w[0].partial_cmp(&w[1]) == Some(std::cmp::Ordering::Less);
        if epochs.windows(2).any(|w| !strictly_increasing(w)) {
            return Err(SimError::Domain("epochs must be strictly increasing".into()));
        }
        Ok(Self { n: epochs.len(), horizon: t, epochs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn epochs(&self) -> &[f64] {
        &self.epochs
    }

    /// Number of epochs at or before `t`.
    pub fn count_through(&self, t: f64) -> usize {
        self.epochs.partition_point(|&e| e <= t)
    }
}

/// An unconditioned renewal draw on `[0, T]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RenewalSample {
    pub epochs: Vec<f64>,
    pub count: usize,
}

/// Monte Carlo estimate of the conditioning-event probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcceptanceEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

// ============================================================================
// Samplers
// ============================================================================

/// Draw an i.i.d. renewal sequence until the partial sum leaves `[0, T]`;
/// returns the arrival epochs inside the horizon and their count `A(T)`.
pub fn sample_iid_renewal<R: Rng>(
    model: &InterarrivalModel,
    horizon: TimeHorizon,
    rng: &mut R,
) -> RenewalSample {
    let t = horizon.value();
    let mut epochs = Vec::new();
    let mut sum = 0.0;
    loop {
        sum += model.sample(rng);
        if sum > t {
            break;
        }
        epochs.push(sum);
    }
    let count = epochs.len();
    RenewalSample { epochs, count }
}

/// Exact conditioned-Poisson sampler via the ordered-statistics route:
/// `n` i.i.d. inverse-transform draws from `Γ(t)/Γ(T)`, sorted.
///
/// Floating-point ties in the sorted epochs (a measure-zero event) are
/// resolved by redrawing the whole sample.
pub fn sample_conditioned_poisson_os<R: Rng>(
    model: &InterarrivalModel,
    n: usize,
    horizon: TimeHorizon,
    rng: &mut R,
) -> Result<ConditionedPoissonSample> {
    let rate_fn = match model {
        InterarrivalModel::PoissonRateFn(r) => r,
        _ => {
            return Err(SimError::InvalidModel(
                "ordered-statistics sampling needs the Poisson rate-function family".into(),
            ))
        }
    };
    if n == 0 {
        return Err(SimError::Domain("need n >= 1".into()));
    }
    let t = horizon.value();
    if t > rate_fn.support_end() {
        return Err(SimError::InvalidModel(format!(
            "horizon {t} exceeds the rate function's support end {}",
            rate_fn.support_end()
        )));
    }
    let total = rate_fn.cumulative(t);
    if total <= 0.0 {
        return Err(SimError::InvalidModel("rate function has zero mass on the horizon".into()));
    }

    const MAX_REDRAWS: usize = 100;
    for _ in 0..MAX_REDRAWS {
        let mut epochs: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                rate_fn.inverse_cumulative(u * total)
            })
            .collect();
        epochs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let interior = epochs[0] > 0.0 && *epochs.last().unwrap() < t;
        let strict = epochs.windows(2).all(|w| w[1] > w[0]);
        if interior && strict {
            return ConditionedPoissonSample::new(horizon, epochs);
        }
    }
    Err(SimError::InvalidModel(
        "could not draw strictly increasing interior epochs; \
         the rate function concentrates too much mass at single points"
            .into(),
    ))
}

/// Rejection sampler for a conditioned renewal row: draw i.i.d. interarrival
/// times and accept once `S_n ≤ T < S_{n+1}`. Returns the accepted row and
/// the number of attempts it took.
pub fn sample_conditioned_renewal_rejection<R: Rng>(
    model: &InterarrivalModel,
    n: usize,
    horizon: TimeHorizon,
    rng: &mut R,
    max_attempts: u64,
) -> Result<(ConditionedRow, u64)> {
    if n == 0 {
        return Err(SimError::Domain("need n >= 1".into()));
    }
    if max_attempts == 0 {
        return Err(SimError::Domain("need max_attempts >= 1".into()));
    }
    let t = horizon.value();
    let mut xi = Vec::with_capacity(n + 1);

    for attempt in 1..=max_attempts {
        xi.clear();
        let mut sum = 0.0;
        let mut overshoot = false;
        for _ in 0..n {
            let x = model.sample(rng);
            sum += x;
            xi.push(x);
            if sum > t {
                overshoot = true;
                break;
            }
        }
        if overshoot {
            continue;
        }
        let last = model.sample(rng);
        if sum + last > t {
            xi.push(last);
            match ConditionedRow::new(n, horizon, std::mem::take(&mut xi)) {
                Ok(row) => return Ok((row, attempt)),
                // Rounding tie inside the row; treat like a rejection and redraw.
                Err(SimError::Data(_)) => {
                    xi = Vec::with_capacity(n + 1);
                    continue;
                }
                Err(e) => return Err(e),
            }
        }
    }
    Err(SimError::AcceptanceTooLow { attempts: max_attempts, estimate: 0.0 })
}

/// Monte Carlo estimate of `P(A(T) = n)` with its binomial standard error.
pub fn estimate_acceptance<R: Rng>(
    model: &InterarrivalModel,
    n: usize,
    horizon: TimeHorizon,
    rng: &mut R,
    reps: usize,
) -> Result<AcceptanceEstimate> {
    if reps == 0 {
        return Err(SimError::Domain("need reps >= 1".into()));
    }
    let t = horizon.value();
    let mut hits = 0_u64;
    for _ in 0..reps {
        let mut sum = 0.0;
        let mut count = 0_usize;
        // Count arrivals, stopping as soon as the answer is determined.
        loop {
            sum += model.sample(rng);
            if sum > t {
                break;
            }
            count += 1;
            if count > n {
                break;
            }
        }
        if count == n {
            hits += 1;
        }
    }
    let p = hits as f64 / reps as f64;
    let std_error = (p * (1.0 - p) / reps as f64).sqrt();
    Ok(AcceptanceEstimate { estimate: p, std_error })
}

// ============================================================================
// Conditional mean
// ============================================================================

/// The conditional-mean integral
/// `μ_n = ∫₀ᵀ (1 − Λ*(u)/Λ*(T))ⁿ du`,
/// evaluated by adaptive quadrature to absolute tolerance 1e-10.
///
/// Requires `F(T) < 1` so the integrated hazard is finite at the horizon.
/// For an exponential model the integrand is `(1 − u/T)ⁿ`, giving
/// `μ_n = T/(n+1)` regardless of the rate, and the integral equals the
/// conditional mean `E[ξ₁ | A(T) = n]` exactly. That identity rests on the
/// deterministic time change being exact, which singles out the
/// constant-hazard family: for other families the integral and the Monte
/// Carlo conditional mean visibly disagree at small n, so cross-checks
/// against sampled rows are meaningful for the exponential family only.
pub fn conditional_mean_mu_n(
    model: &InterarrivalModel,
    n: usize,
    horizon: TimeHorizon,
) -> Result<f64> {
    let t = horizon.value();
    if n == 0 {
        return Ok(t);
    }
    let lambda_t = model.integrated_hazard(t)?;
    if lambda_t <= 0.0 {
        return Err(SimError::InvalidModel(
            "integrated hazard vanishes at the horizon; the conditioning event is degenerate"
                .into(),
        ));
    }
    let power = n as i32;
    let integrand = |u: f64| {
        let lam = model.integrated_hazard(u).expect("u <= T has finite hazard integral");
        (1.0 - lam / lambda_t).max(0.0).powi(power)
    };
    Ok(adaptive_simpson(&integrand, 0.0, t, 1e-10))
}

// ============================================================================
// Exchangeability diagnostic
// ============================================================================

/// Two-sample KS test between the empirical laws of coordinates `i` and `j`
/// (1-based, both ≤ n) across conditioned rows. Exchangeability of the first
/// `n` coordinates predicts non-rejection.
pub fn exchangeability_diagnostic(
    rows: &[ConditionedRow],
    i: usize,
    j: usize,
) -> Result<KsResult> {
    if rows.len() < 2 {
        return Err(SimError::InsufficientData(format!(
            "exchangeability diagnostic needs at least 2 rows, got {}",
            rows.len()
        )));
    }
    let n = rows[0].n();
    let horizon = rows[0].horizon();
    if rows.iter().any(|r| r.n() != n || r.horizon() != horizon) {
        return Err(SimError::Shape("all rows must share the same n and horizon".into()));
    }
    if i == 0 || j == 0 || i > n || j > n {
        return Err(SimError::Domain(format!("coordinates must lie in 1..={n}, got ({i}, {j})")));
    }
    let a: Vec<f64> = rows.iter().map(|r| r.xi()[i - 1]).collect();
    let b: Vec<f64> = rows.iter().map(|r| r.xi()[j - 1]).collect();
    stats::ks_two_sample(&a, &b)
}
