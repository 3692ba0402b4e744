//! Interarrival distributions and their derived functionals.
//!
//! Every family exposes the CDF `F`, density `f`, hazard `λ*(t) = f/(1−F)`,
//! integrated hazard `Λ*(t)`, and inverse CDF. The integrated hazard is the
//! quantity the conditional-mean integral is built from, so it uses closed
//! forms everywhere: `Λ*(t) = −ln(1−F(t))` holds for any continuous family,
//! and each branch below reduces to that identity through its own `F`.

use crate::special::{
    inverse_regularized_lower_gamma, ln_gamma, regularized_lower_gamma, regularized_upper_gamma,
};
use crate::{Result, SimError};

/// The fixed observation horizon `T > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeHorizon(f64);

impl TimeHorizon {
    pub fn new(t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(SimError::Domain(format!("horizon must be positive and finite, got {t}")));
        }
        Ok(Self(t))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Which functional of the distribution to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Functional {
    Cdf,
    Density,
    Hazard,
    IntegratedHazard,
    InverseCdf,
}

// ============================================================================
// Piecewise-constant rate functions
// ============================================================================

/// A nonnegative piecewise-constant rate `γ` on `[0, end]`, with its exact
/// cumulative integral `Γ(t) = ∫₀ᵗ γ(s) ds`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseConstantRate {
    /// Segment boundaries `0 = b₀ < b₁ < … < b_k`.
    boundaries: Vec<f64>,
    /// Rate on `[bᵢ, bᵢ₊₁)`; length `k`.
    rates: Vec<f64>,
    /// Cumulative integral at each boundary; `cum[0] = 0`.
    cum: Vec<f64>,
}

impl PiecewiseConstantRate {
    pub fn new(boundaries: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if boundaries.len() != rates.len() + 1 {
            return Err(SimError::InvalidModel(
                "rate function needs boundaries.len() == rates.len() + 1".into(),
            ));
        }
        if boundaries[0] != 0.0 {
            return Err(SimError::InvalidModel("rate function must start at 0".into()));
        }
        let strictly_increasing =
            |w: &[f64]| w[0].partial_cmp(&w[1]) == Some(std::cmp::Ordering::Less);
        if boundaries.windows(2).any(|w| !strictly_increasing(w) || !w[1].is_finite()) {
            return Err(SimError::InvalidModel(
                "rate boundaries must be finite and strictly increasing".into(),
            ));
        }
        if rates.iter().any(|&r| !(r.is_finite() && r >= 0.0)) {
            return Err(SimError::InvalidModel("rates must be finite and nonnegative".into()));
        }
        let mut cum = Vec::with_capacity(boundaries.len());
        cum.push(0.0);
        for i in 0..rates.len() {
            let add = rates[i] * (boundaries[i + 1] - boundaries[i]);
            cum.push(cum[i] + add);
        }
        if *cum.last().unwrap() <= 0.0 {
            return Err(SimError::InvalidModel("rate function integrates to zero".into()));
        }
        Ok(Self { boundaries, rates, cum })
    }

    /// A single constant rate on `[0, end]`.
    pub fn homogeneous(rate: f64, end: f64) -> Result<Self> {
        Self::new(vec![0.0, end], vec![rate])
    }

    /// Discretize an arbitrary rate function by its midpoint values on
    /// `segments` equal pieces of `[0, end]`.
    ///
    /// Midpoint sampling makes the cumulative integral exact at the segment
    /// boundaries whenever the underlying rate is affine, so e.g. a ramp rate
    /// reproduces its quadratic cumulative exactly on the boundary grid.
    pub fn from_rate_fn<F: Fn(f64) -> f64>(rate: F, segments: usize, end: f64) -> Result<Self> {
        if segments == 0 || !(end.is_finite() && end > 0.0) {
            return Err(SimError::InvalidModel("need segments >= 1 and end > 0".into()));
        }
        let h = end / segments as f64;
        let boundaries: Vec<f64> = (0..=segments).map(|i| i as f64 * h).collect();
        let rates: Vec<f64> = (0..segments).map(|i| rate((i as f64 + 0.5) * h)).collect();
        Self::new(boundaries, rates)
    }

    pub fn support_end(&self) -> f64 {
        *self.boundaries.last().unwrap()
    }

    pub fn segment_count(&self) -> usize {
        self.rates.len()
    }

    /// Γ(end), the total mass.
    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// γ(t); zero outside `[0, end)`.
    pub fn rate(&self, t: f64) -> f64 {
        if t < 0.0 || t >= self.support_end() {
            return 0.0;
        }
        let idx = match self.boundaries.binary_search_by(|b| b.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        self.rates[idx.min(self.rates.len() - 1)]
    }

    /// Γ(t) = ∫₀ᵗ γ; clamped to `[0, total]` outside the support.
    pub fn cumulative(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.support_end() {
            return self.total();
        }
        let idx = match self.boundaries.binary_search_by(|b| b.partial_cmp(&t).unwrap()) {
            Ok(i) => return self.cum[i],
            Err(i) => i - 1,
        };
        self.cum[idx] + self.rates[idx] * (t - self.boundaries[idx])
    }

    /// Left-continuous generalized inverse of Γ: smallest `t` with `Γ(t) ≥ g`.
    pub fn inverse_cumulative(&self, g: f64) -> f64 {
        if g <= 0.0 {
            return 0.0;
        }
        if g > self.total() {
            return self.support_end();
        }
        // First boundary index with cum >= g; g then lies in the segment
        // just before it, which must have positive rate.
        let idx = self.cum.partition_point(|&c| c < g);
        let seg = idx - 1;
        self.boundaries[seg] + (g - self.cum[seg]) / self.rates[seg]
    }
}

// ============================================================================
// Interarrival model
// ============================================================================

/// A parametric nonnegative interarrival distribution with a density.
#[derive(Clone, Debug, PartialEq)]
pub enum InterarrivalModel {
    /// Exponential with the given rate.
    Exponential { rate: f64 },
    /// Uniform on `(0, upper)`.
    Uniform { upper: f64 },
    /// Gamma with shape `k` and scale `s`.
    Gamma { shape: f64, scale: f64 },
    /// The event-epoch distribution of a nonhomogeneous Poisson process with
    /// piecewise-constant rate `γ`, normalized over the rate's support:
    /// `F(t) = Γ(t)/Γ(end)`.
    PoissonRateFn(PiecewiseConstantRate),
}

impl InterarrivalModel {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(SimError::InvalidModel(format!("exponential rate must be > 0, got {rate}")));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn uniform(upper: f64) -> Result<Self> {
        if !(upper.is_finite() && upper > 0.0) {
            return Err(SimError::InvalidModel(format!("uniform upper must be > 0, got {upper}")));
        }
        Ok(Self::Uniform { upper })
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0 && scale.is_finite() && scale > 0.0) {
            return Err(SimError::InvalidModel(format!(
                "gamma needs shape > 0 and scale > 0, got shape={shape} scale={scale}"
            )));
        }
        Ok(Self::Gamma { shape, scale })
    }

    pub fn poisson_rate_fn(rate_fn: PiecewiseConstantRate) -> Self {
        Self::PoissonRateFn(rate_fn)
    }

    /// Mean interarrival time (finite for every supported family).
    pub fn mean(&self) -> f64 {
        match self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Uniform { upper } => upper / 2.0,
            Self::Gamma { shape, scale } => shape * scale,
            Self::PoissonRateFn(r) => {
                // ∫₀^end (1 − Γ(t)/Γ(end)) dt, piecewise linear in Γ.
                let total = r.total();
                let mut acc = 0.0;
                for i in 0..r.rates.len() {
                    let (a, b) = (r.boundaries[i], r.boundaries[i + 1]);
                    let (ga, gb) = (r.cum[i], r.cum[i + 1]);
                    acc += (b - a) * (1.0 - 0.5 * (ga + gb) / total);
                }
                acc
            }
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Self::Exponential { rate } => 1.0 / (rate * rate),
            Self::Uniform { upper } => upper * upper / 12.0,
            Self::Gamma { shape, scale } => shape * scale * scale,
            Self::PoissonRateFn(r) => {
                // E[X²] = ∫ t² γ(t)/Γ(end) dt, exact per segment.
                let total = r.total();
                let mut second = 0.0;
                for i in 0..r.rates.len() {
                    let (a, b) = (r.boundaries[i], r.boundaries[i + 1]);
                    second += r.rates[i] * (b * b * b - a * a * a) / 3.0 / total;
                }
                let mean = self.mean();
                second - mean * mean
            }
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Self::Exponential { rate } => 1.0 - (-rate * t).exp(),
            Self::Uniform { upper } => (t / upper).min(1.0),
            Self::Gamma { shape, scale } => regularized_lower_gamma(*shape, t / scale),
            Self::PoissonRateFn(r) => r.cumulative(t) / r.total(),
        }
    }

    pub fn density(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match self {
            Self::Exponential { rate } => rate * (-rate * t).exp(),
            Self::Uniform { upper } => {
                if t <= *upper {
                    1.0 / upper
                } else {
                    0.0
                }
            }
            Self::Gamma { shape, scale } => {
                if t == 0.0 {
                    // Finite only for shape >= 1.
                    return match shape.partial_cmp(&1.0).unwrap() {
                        std::cmp::Ordering::Less => f64::INFINITY,
                        std::cmp::Ordering::Equal => 1.0 / scale,
                        std::cmp::Ordering::Greater => 0.0,
                    };
                }
                let x = t / scale;
                ((shape - 1.0) * x.ln() - x - ln_gamma(*shape)).exp() / scale
            }
            Self::PoissonRateFn(r) => r.rate(t) / r.total(),
        }
    }

    /// Hazard `λ*(t) = f(t)/(1−F(t))`; errors where the survival is zero.
    pub fn hazard(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(SimError::Domain(format!("hazard needs t >= 0, got {t}")));
        }
        match self {
            Self::Exponential { rate } => Ok(*rate),
            Self::Uniform { upper } => {
                if t >= *upper {
                    Err(SimError::Domain(format!("survival is zero at t={t} (upper={upper})")))
                } else {
                    Ok(1.0 / (upper - t))
                }
            }
            Self::Gamma { shape, scale } => {
                let q = regularized_upper_gamma(*shape, t / scale);
                if q <= 0.0 {
                    return Err(SimError::Domain(format!("survival underflowed to zero at t={t}")));
                }
                Ok(self.density(t) / q)
            }
            Self::PoissonRateFn(r) => {
                let remaining = r.total() - r.cumulative(t);
                if remaining <= 0.0 {
                    return Err(SimError::Domain(format!(
                        "survival is zero at t={t} (support ends at {})",
                        r.support_end()
                    )));
                }
                Ok(r.rate(t) / remaining)
            }
        }
    }

    /// Integrated hazard `Λ*(t) = ∫₀ᵗ λ*(s) ds`, in closed form per family.
    pub fn integrated_hazard(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(SimError::Domain(format!("integrated hazard needs t >= 0, got {t}")));
        }
        match self {
            Self::Exponential { rate } => Ok(rate * t),
            Self::Uniform { upper } => {
                if t >= *upper {
                    Err(SimError::Domain(format!("integrated hazard diverges at t={t} >= {upper}")))
                } else {
                    Ok(-(-t / upper).ln_1p())
                }
            }
            Self::Gamma { shape, scale } => {
                let q = regularized_upper_gamma(*shape, t / scale);
                if q <= 0.0 {
                    return Err(SimError::Domain(format!("survival underflowed to zero at t={t}")));
                }
                Ok(-q.ln())
            }
            Self::PoissonRateFn(r) => {
                let frac = r.cumulative(t) / r.total();
                if frac >= 1.0 {
                    return Err(SimError::Domain(format!(
                        "integrated hazard diverges at t={t} (support ends at {})",
                        r.support_end()
                    )));
                }
                Ok(-(-frac).ln_1p())
            }
        }
    }

    /// Inverse CDF at `u ∈ [0, 1)`.
    pub fn inverse_cdf(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(SimError::Domain(format!("inverse cdf needs u in [0,1), got {u}")));
        }
        Ok(match self {
            Self::Exponential { rate } => -(-u).ln_1p() / rate,
            Self::Uniform { upper } => u * upper,
            Self::Gamma { shape, scale } => scale * inverse_regularized_lower_gamma(*shape, u),
            Self::PoissonRateFn(r) => r.inverse_cumulative(u * r.total()),
        })
    }

    /// Dispatch on [`Functional`]; the argument is `t` for everything except
    /// `InverseCdf`, where it is the probability `u`.
    pub fn eval(&self, which: Functional, arg: f64) -> Result<f64> {
        match which {
            Functional::Cdf => {
                if arg < 0.0 {
                    return Err(SimError::Domain(format!("cdf needs t >= 0, got {arg}")));
                }
                Ok(self.cdf(arg))
            }
            Functional::Density => {
                if arg < 0.0 {
                    return Err(SimError::Domain(format!("density needs t >= 0, got {arg}")));
                }
                Ok(self.density(arg))
            }
            Functional::Hazard => self.hazard(arg),
            Functional::IntegratedHazard => self.integrated_hazard(arg),
            Functional::InverseCdf => self.inverse_cdf(arg),
        }
    }

    /// Draw one variate by inverse transform. Redraws the (measure-zero)
    /// `u = 0` case so the result is strictly positive.
    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> f64 {
        loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                let x = self.inverse_cdf(u).expect("u in (0,1)");
                if x > 0.0 {
                    return x;
                }
            }
        }
    }

    /// The horizon-normalized CDF `Γ(t)/Γ(T)` of event epochs for the
    /// nonhomogeneous-Poisson family. Errors for other families.
    pub fn conditioned_cdf(&self, t: f64, horizon: TimeHorizon) -> Result<f64> {
        match self {
            Self::PoissonRateFn(r) => {
                let total = r.cumulative(horizon.value());
                if total <= 0.0 {
                    return Err(SimError::InvalidModel(
                        "rate function has zero mass on the horizon".into(),
                    ));
                }
                Ok((r.cumulative(t) / total).clamp(0.0, 1.0))
            }
            _ => Err(SimError::InvalidModel(
                "horizon-normalized cdf is defined for the Poisson rate-function family only".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_simpson;

    fn all_models() -> Vec<InterarrivalModel> {
        vec![
            InterarrivalModel::exponential(2.0).unwrap(),
            InterarrivalModel::uniform(1.0).unwrap(),
            InterarrivalModel::gamma(2.5, 0.4).unwrap(),
            InterarrivalModel::poisson_rate_fn(
                PiecewiseConstantRate::new(vec![0.0, 0.3, 1.0], vec![1.0, 3.0]).unwrap(),
            ),
        ]
    }

    #[test]
    fn exponential_closed_forms() {
        let m = InterarrivalModel::exponential(2.0).unwrap();
        assert!((m.cdf(1.0) - (1.0 - (-2.0_f64).exp())).abs() < 1e-15);
        assert!((m.integrated_hazard(3.0).unwrap() - 6.0).abs() < 1e-15);
        assert!((m.hazard(0.7).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_hazard_value() {
        let m = InterarrivalModel::uniform(1.0).unwrap();
        assert!((m.hazard(0.5).unwrap() - 2.0).abs() < 1e-15);
        assert!(m.hazard(1.0).is_err());
        assert!(m.integrated_hazard(1.0).is_err());
    }

    #[test]
    fn eval_dispatch_matches_methods() {
        let m = InterarrivalModel::gamma(2.0, 1.5).unwrap();
        assert_eq!(m.eval(Functional::Cdf, 0.8).unwrap(), m.cdf(0.8));
        assert_eq!(m.eval(Functional::Density, 0.8).unwrap(), m.density(0.8));
        assert_eq!(m.eval(Functional::InverseCdf, 0.3).unwrap(), m.inverse_cdf(0.3).unwrap());
        assert!(m.eval(Functional::InverseCdf, 1.0).is_err());
        assert!(m.eval(Functional::Cdf, -0.1).is_err());
    }

    #[test]
    fn integrated_hazard_matches_log_survival() {
        // Λ*(t) = −ln(1 − F(t)) wherever F(t) < 1.
        for m in all_models() {
            for &t in &[0.05, 0.2, 0.45, 0.8] {
                let lam = m.integrated_hazard(t).unwrap();
                let expected = -(1.0 - m.cdf(t)).ln();
                assert!((lam - expected).abs() < 1e-10, "{m:?} t={t}: {lam} vs {expected}");
            }
        }
    }

    #[test]
    fn integrated_hazard_matches_hazard_quadrature() {
        // Independent check: integrate λ* numerically and compare.
        for m in all_models() {
            let lam = m.integrated_hazard(0.6).unwrap();
            let quad = adaptive_simpson(&|s| m.hazard(s).unwrap(), 0.0, 0.6, 1e-11);
            assert!((lam - quad).abs() < 1e-9, "{m:?}: {lam} vs {quad}");
        }
    }

    #[test]
    fn inverse_cdf_roundtrip() {
        for m in all_models() {
            for i in 1..40 {
                let t0 = m.inverse_cdf(i as f64 / 40.0 * 0.95).unwrap();
                let u = m.cdf(t0);
                let t1 = m.inverse_cdf(u).unwrap();
                assert!((t1 - t0).abs() < 1e-9, "{m:?} t0={t0} t1={t1}");
            }
        }
    }

    #[test]
    fn piecewise_rate_cumulative_and_inverse() {
        let r = PiecewiseConstantRate::new(vec![0.0, 0.5, 1.0], vec![2.0, 0.0]).unwrap();
        assert_eq!(r.cumulative(0.25), 0.5);
        assert_eq!(r.cumulative(0.75), 1.0); // flat segment contributes nothing
        assert_eq!(r.total(), 1.0);
        assert_eq!(r.inverse_cumulative(0.5), 0.25);
        // Mass at the flat plateau maps to the left endpoint of the jump.
        assert_eq!(r.inverse_cumulative(1.0), 0.5);
    }

    #[test]
    fn midpoint_ramp_is_exact_at_boundaries() {
        // γ(t) = 2t has Γ(t) = t²; midpoint discretization reproduces it
        // exactly at every boundary.
        let r = PiecewiseConstantRate::from_rate_fn(|t| 2.0 * t, 1000, 1.0).unwrap();
        for &t in &[0.1, 0.5, 0.8, 1.0] {
            assert!((r.cumulative(t) - t * t).abs() < 1e-14, "t={t}");
        }
        let m = InterarrivalModel::poisson_rate_fn(r);
        let horizon = TimeHorizon::new(1.0).unwrap();
        assert!((m.conditioned_cdf(0.5, horizon).unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn conditioned_cdf_rejects_other_families() {
        let m = InterarrivalModel::exponential(1.0).unwrap();
        assert!(m.conditioned_cdf(0.5, TimeHorizon::new(1.0).unwrap()).is_err());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(InterarrivalModel::exponential(0.0).is_err());
        assert!(InterarrivalModel::uniform(-1.0).is_err());
        assert!(InterarrivalModel::gamma(1.0, f64::NAN).is_err());
        assert!(PiecewiseConstantRate::new(vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(PiecewiseConstantRate::new(vec![0.1, 1.0], vec![1.0]).is_err());
        assert!(TimeHorizon::new(0.0).is_err());
    }

    #[test]
    fn mean_of_each_family() {
        assert!((all_models()[0].mean() - 0.5).abs() < 1e-15);
        assert!((all_models()[1].mean() - 0.5).abs() < 1e-15);
        assert!((all_models()[2].mean() - 1.0).abs() < 1e-15);
        // Piecewise model: mean = ∫ (1 − F) dt computed by quadrature.
        let m = all_models().pop().unwrap();
        let quad = adaptive_simpson(&|t| 1.0 - m.cdf(t), 0.0, 1.0, 1e-12);
        assert!((m.mean() - quad).abs() < 1e-10);
    }
}
