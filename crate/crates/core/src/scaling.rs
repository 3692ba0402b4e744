//! Fluid and diffusion scalings of conditioned arrival data.
//!
//! From a conditioned row we build three cadlag paths — the partial-sum path
//! indexed by customer fraction, the counting path indexed by clock time, and
//! the generalized inverse of the partial sums — plus the √n-scaled
//! fluctuation paths whose finite-n law is compared against Brownian-bridge
//! targets. Conditioning on exactly `n` arrivals in the horizon ties the
//! scaled counting fluctuation to zero at the right endpoint, which is the
//! signature all the distributional tests look for.

use crate::distributions::InterarrivalModel;
use crate::path::{GridPath, StepPath};
use crate::samplers::{ConditionedPoissonSample, ConditionedRow};

/// Normalization applied to the centered interarrival times.
///
/// `SqrtN` multiplies the deviations by √n, which makes the squared sum
/// concentrate at 1 and matches the √n scaling of the counting fluctuation;
/// it is the normalization every test in this crate uses. `InvSqrtN` divides
/// by √n instead and is kept only so the two conventions can be compared
/// side by side in diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhiScaling {
    SqrtN,
    InvSqrtN,
}

/// The centered-and-scaled interarrival array `φᵢ` with its three summary
/// diagnostics.
#[derive(Clone, Debug)]
pub struct PhiDiagnostics {
    pub phi: Vec<f64>,
    pub sum: f64,
    pub sum_sq: f64,
    pub max_abs: f64,
}

/// Partial-sum path `t ↦ S_{⌊nt⌋}` on `t ∈ [0, 1]`, jumps at `i/n`.
pub fn partial_sum_path(row: &ConditionedRow) -> StepPath {
    let n = row.n();
    let epochs: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
    let mut values = row.partial_sums();
    values.pop(); // only the first n sums live on [0, 1]
    StepPath::new(0.0, 1.0, epochs, values).expect("valid row yields a valid path")
}

/// Counting path `A_n(t) = max{m ≤ n : S_m ≤ t}` on `[0, T]`; by the
/// conditioning event, `A_n(T) = n`.
pub fn counting_path(row: &ConditionedRow) -> StepPath {
    let n = row.n();
    let epochs = row.arrival_epochs();
    let values: Vec<f64> = (1..=n).map(|m| m as f64).collect();
    StepPath::new(0.0, row.horizon(), epochs, values).expect("valid row yields a valid path")
}

/// Right-continuous generalized inverse of the partial-sum path:
/// `S_n⁻¹(t) = inf{p ∈ [0, 1] : S_{⌊np⌋} > t}`, capped at 1 once `t`
/// passes the last renewal (the infimum is over an empty set there).
///
/// Since `S_{⌊np⌋}` first exceeds `t` at `p = (A_n(t)+1)/n`, the inverse is
/// a step path with value `(m+1)/n` on `[S_m, S_{m+1})`.
pub fn inverse_path(row: &ConditionedRow) -> StepPath {
    let n = row.n();
    let n_f = n as f64;
    let epochs = row.arrival_epochs();
    let values: Vec<f64> = (1..=n)
        .map(|m| if m == n { 1.0 } else { (m as f64 + 1.0) / n_f })
        .collect();
    StepPath::new(1.0 / n_f, row.horizon(), epochs, values)
        .expect("valid row yields a valid path")
}

/// Centered, scaled interarrival array over the first `n` coordinates,
/// with the summary diagnostics `Σφ`, `Σφ²`, and `max|φ|`.
pub fn phi_array(row: &ConditionedRow, mu_n: f64, scaling: PhiScaling) -> PhiDiagnostics {
    let n = row.n() as f64;
    let factor = match scaling {
        PhiScaling::SqrtN => n.sqrt(),
        PhiScaling::InvSqrtN => 1.0 / n.sqrt(),
    };
    let phi: Vec<f64> = row.xi()[..row.n()].iter().map(|&x| factor * (x - mu_n)).collect();
    let sum: f64 = phi.iter().sum();
    let sum_sq: f64 = phi.iter().map(|p| p * p).sum();
    let max_abs = phi.iter().fold(0.0_f64, |acc, p| acc.max(p.abs()));
    PhiDiagnostics { phi, sum, sum_sq, max_abs }
}

/// Diffusion-scaled counting fluctuation `√n (A_n(uT)/n − u)` sampled on a
/// uniform grid over `u ∈ [0, 1]`.
///
/// The endpoint is exactly zero for every row: `A_n(T) = n` by conditioning.
pub fn diffusion_scaled_counting(row: &ConditionedRow, grid_size: usize) -> GridPath {
    let n = row.n() as f64;
    let sqrt_n = n.sqrt();
    let t = row.horizon();
    let sums = row.arrival_epochs();
    let m = grid_size.max(1);
    let mut values = Vec::with_capacity(m + 1);
    let mut arrived = 0usize; // arrivals with S_k <= current epoch
    for i in 0..=m {
        let u = i as f64 / m as f64;
        let clock = u * t;
        while arrived < sums.len() && sums[arrived] <= clock {
            arrived += 1;
        }
        values.push(sqrt_n * (arrived as f64 / n - u));
    }
    // Guard the tie-down against any rounding in u·T at the endpoint.
    values[m] = sqrt_n * (sums.len() as f64 / n - 1.0);
    GridPath::new(1.0, values).expect("grid_size >= 1")
}

/// Diffusion-scaled conditioned-Poisson fluctuation
/// `(count of epochs ≤ t − n F(t)) / √n` on a uniform grid over `[0, T]`,
/// with `F(t) = Γ(t)/Γ(T)` taken from the model.
pub fn diffusion_scaled_conditioned_poisson(
    sample: &ConditionedPoissonSample,
    model: &InterarrivalModel,
    grid_size: usize,
) -> crate::Result<GridPath> {
    let horizon = crate::distributions::TimeHorizon::new(sample.horizon())?;
    let n = sample.n() as f64;
    let sqrt_n = n.sqrt();
    let m = grid_size.max(1);
    let mut values = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let t = i as f64 / m as f64 * sample.horizon();
        let f = model.conditioned_cdf(t, horizon)?;
        let count = sample.count_through(t) as f64;
        values.push((count - n * f) / sqrt_n);
    }
    GridPath::new(sample.horizon(), values)
}
