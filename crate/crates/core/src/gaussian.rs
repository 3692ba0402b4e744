//! The Gaussian limit objects: Brownian motion, the Brownian bridge, the
//! time-changed bridge, and the independent difference of a motion and a
//! bridge, each sampled exactly in distribution at grid points together with
//! its closed-form covariance.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::distributions::{InterarrivalModel, TimeHorizon};
use crate::path::GridPath;
use crate::{Result, SimError};

/// Which Gaussian path to generate.
#[derive(Clone, Debug)]
pub enum GaussianKind {
    /// Zero-drift Brownian motion with diffusion coefficient `sigma`, on [0, 1].
    BrownianMotion { sigma: f64 },
    /// Standard Brownian bridge on [0, 1], pinned to 0 at both endpoints.
    Bridge,
    /// Bridge evaluated through the horizon-normalized CDF of the model:
    /// `B(F(t))` on the model's own time axis `[0, horizon]`.
    BridgeTimeChange { model: InterarrivalModel, horizon: f64 },
    /// Independent `BrownianMotion { sigma }` minus a standard bridge, on [0, 1].
    BmMinusBridge { sigma: f64 },
}

/// A Gaussian path request: the kind plus the grid resolution.
#[derive(Clone, Debug)]
pub struct GaussianPathSpec {
    pub kind: GaussianKind,
    pub grid_size: usize,
}

impl GaussianPathSpec {
    pub fn new(kind: GaussianKind, grid_size: usize) -> Result<Self> {
        if grid_size == 0 {
            return Err(SimError::Domain("grid size must be >= 1".into()));
        }
        if let GaussianKind::BrownianMotion { sigma } | GaussianKind::BmMinusBridge { sigma } =
            &kind
        {
            if !(sigma.is_finite() && *sigma > 0.0) {
                return Err(SimError::Domain(format!("sigma must be > 0, got {sigma}")));
            }
        }
        if let GaussianKind::BridgeTimeChange { horizon, .. } = &kind {
            if !(horizon.is_finite() && *horizon > 0.0) {
                return Err(SimError::Domain(format!("horizon must be > 0, got {horizon}")));
            }
        }
        Ok(Self { kind, grid_size })
    }
}

fn brownian_values<R: Rng>(sigma: f64, m: usize, rng: &mut R) -> Vec<f64> {
    let step_sd = sigma * (1.0 / m as f64).sqrt();
    let mut values = Vec::with_capacity(m + 1);
    values.push(0.0);
    let mut w = 0.0;
    for _ in 0..m {
        let z: f64 = rng.sample(StandardNormal);
        w += step_sd * z;
        values.push(w);
    }
    values
}

fn bridge_values<R: Rng>(m: usize, rng: &mut R) -> Vec<f64> {
    let w = brownian_values(1.0, m, rng);
    let w1 = w[m];
    w.iter()
        .enumerate()
        .map(|(i, &wi)| wi - (i as f64 / m as f64) * w1)
        .collect()
}

/// Sample one Gaussian path, exact in distribution at the grid points.
///
/// The bridge comes from endpoint subtraction of a unit Brownian motion, so
/// both endpoints are exactly zero. The time-changed bridge samples the
/// underlying motion at the (nondecreasing) image points `F(tᵢ)` directly
/// rather than resampling a uniform-grid bridge.
pub fn sample_gaussian_path<R: Rng>(spec: &GaussianPathSpec, rng: &mut R) -> Result<GridPath> {
    let m = spec.grid_size;
    match &spec.kind {
        GaussianKind::BrownianMotion { sigma } => GridPath::new(1.0, brownian_values(*sigma, m, rng)),
        GaussianKind::Bridge => GridPath::new(1.0, bridge_values(m, rng)),
        GaussianKind::BmMinusBridge { sigma } => {
            let w = brownian_values(*sigma, m, rng);
            let b = bridge_values(m, rng);
            GridPath::new(1.0, w.iter().zip(b.iter()).map(|(x, y)| x - y).collect())
        }
        GaussianKind::BridgeTimeChange { model, horizon } => {
            let horizon = TimeHorizon::new(*horizon)?;
            let t_end = horizon.value();
            let images: Vec<f64> = (0..=m)
                .map(|i| model.conditioned_cdf(i as f64 / m as f64 * t_end, horizon))
                .collect::<Result<_>>()?;
            if images.windows(2).any(|w| w[1] < w[0]) {
                return Err(SimError::InvalidModel("time change must be nondecreasing".into()));
            }
            // Brownian motion observed at the image points, then extended to
            // time 1 if F(T) falls short of it.
            let mut w = Vec::with_capacity(m + 1);
            w.push(0.0);
            let mut acc = 0.0;
            for pair in images.windows(2) {
                let dv = pair[1] - pair[0];
                if dv > 0.0 {
                    let z: f64 = rng.sample(StandardNormal);
                    acc += dv.sqrt() * z;
                }
                w.push(acc);
            }
            let last = *images.last().unwrap();
            let w1 = if last < 1.0 {
                let z: f64 = rng.sample(StandardNormal);
                acc + (1.0 - last).sqrt() * z
            } else {
                acc
            };
            let values = images.iter().zip(w.iter()).map(|(&u, &wu)| wu - u * w1).collect();
            GridPath::new(t_end, values)
        }
    }
}

/// Closed-form covariance of the requested Gaussian path at `(s, t)`
/// (symmetrized, so argument order does not matter).
pub fn covariance(spec: &GaussianPathSpec, s: f64, t: f64) -> Result<f64> {
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    let check_unit = |lo: f64, hi: f64| -> Result<()> {
        if lo < 0.0 || hi > 1.0 {
            return Err(SimError::Domain(format!("({lo}, {hi}) outside [0, 1]")));
        }
        Ok(())
    };
    match &spec.kind {
        GaussianKind::BrownianMotion { sigma } => {
            check_unit(lo, hi)?;
            Ok(sigma * sigma * lo)
        }
        GaussianKind::Bridge => {
            check_unit(lo, hi)?;
            Ok(lo * (1.0 - hi))
        }
        GaussianKind::BmMinusBridge { sigma } => {
            check_unit(lo, hi)?;
            Ok(sigma * sigma * lo + lo * (1.0 - hi))
        }
        GaussianKind::BridgeTimeChange { model, horizon } => {
            let horizon = TimeHorizon::new(*horizon)?;
            if lo < 0.0 || hi > horizon.value() {
                return Err(SimError::Domain(format!(
                    "({lo}, {hi}) outside [0, {}]",
                    horizon.value()
                )));
            }
            let f_lo = model.conditioned_cdf(lo, horizon)?;
            let f_hi = model.conditioned_cdf(hi, horizon)?;
            Ok(f_lo * (1.0 - f_hi))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::PiecewiseConstantRate;
    use crate::stats::moment_diagnostics;
    use crate::stream::RandomStream;

    fn sample_many(spec: &GaussianPathSpec, seed: u64, count: usize) -> Vec<GridPath> {
        (0..count)
            .map(|r| {
                let mut rng = RandomStream::new(seed, r as u64).rng();
                sample_gaussian_path(spec, &mut rng).unwrap()
            })
            .collect()
    }

    #[test]
    fn bridge_is_pinned_exactly() {
        let spec = GaussianPathSpec::new(GaussianKind::Bridge, 64).unwrap();
        for path in sample_many(&spec, 31, 200) {
            assert_eq!(path.values()[0], 0.0);
            assert_eq!(path.values()[64], 0.0);
        }
    }

    #[test]
    fn bridge_midpoint_variance() {
        let spec = GaussianPathSpec::new(GaussianKind::Bridge, 16).unwrap();
        let paths = sample_many(&spec, 32, 20_000);
        let stats = moment_diagnostics(&paths, &[0.5]).unwrap();
        assert!(stats.means[0].abs() < 3.0 * stats.mean_std_errors[0]);
        assert!(
            (stats.variances[0] - 0.25).abs() < 3.0 * stats.variance_std_errors[0],
            "var={}",
            stats.variances[0]
        );
    }

    #[test]
    fn bm_minus_bridge_endpoint_variance_is_sigma_sq() {
        // The bridge contributes nothing at t = 1, so only σ² remains.
        let spec = GaussianPathSpec::new(GaussianKind::BmMinusBridge { sigma: 1.0 }, 16).unwrap();
        let paths = sample_many(&spec, 33, 20_000);
        let stats = moment_diagnostics(&paths, &[1.0]).unwrap();
        assert!(
            (stats.variances[0] - 1.0).abs() < 3.0 * stats.variance_std_errors[0],
            "var={}",
            stats.variances[0]
        );
    }

    #[test]
    fn empirical_covariances_match_closed_forms() {
        let specs = [
            GaussianPathSpec::new(GaussianKind::BrownianMotion { sigma: 2.0 }, 20).unwrap(),
            GaussianPathSpec::new(GaussianKind::Bridge, 20).unwrap(),
            GaussianPathSpec::new(GaussianKind::BmMinusBridge { sigma: 0.7 }, 20).unwrap(),
        ];
        let grid = [0.2, 0.4, 0.6, 0.8, 1.0];
        for (k, spec) in specs.iter().enumerate() {
            let paths = sample_many(spec, 34 + k as u64, 10_000);
            let stats = moment_diagnostics(&paths, &grid).unwrap();
            for i in 0..grid.len() {
                assert!(
                    stats.means[i].abs() <= 3.5 * stats.mean_std_errors[i] + 1e-12,
                    "kind {k}: mean at {} is {}",
                    grid[i],
                    stats.means[i]
                );
                for j in i..grid.len() {
                    let target = covariance(spec, grid[i], grid[j]).unwrap();
                    let (cov, se) = stats.cross_covariance(i, j);
                    assert!(
                        (cov - target).abs() < 3.5 * se.max(1e-6),
                        "kind {k}: cov({}, {}) = {cov} vs {target}",
                        grid[i],
                        grid[j]
                    );
                }
            }
        }
    }

    #[test]
    fn covariance_closed_form_examples() {
        let bridge = GaussianPathSpec::new(GaussianKind::Bridge, 8).unwrap();
        assert_eq!(covariance(&bridge, 0.5, 0.5).unwrap(), 0.25);
        let bm = GaussianPathSpec::new(GaussianKind::BrownianMotion { sigma: 2.0 }, 8).unwrap();
        assert!((covariance(&bm, 0.9, 0.3).unwrap() - 1.2).abs() < 1e-15);

        // Quadratic time change F(t) = t²: pinned at the right endpoint.
        let ramp = PiecewiseConstantRate::from_rate_fn(|t| 2.0 * t, 1000, 1.0).unwrap();
        let tc = GaussianPathSpec::new(
            GaussianKind::BridgeTimeChange {
                model: InterarrivalModel::poisson_rate_fn(ramp),
                horizon: 1.0,
            },
            8,
        )
        .unwrap();
        assert_eq!(covariance(&tc, 0.5, 1.0).unwrap(), 0.0);
        assert!((covariance(&tc, 0.5, 0.8).unwrap() - 0.25 * (1.0 - 0.64)).abs() < 1e-12);
    }

    #[test]
    fn time_changed_bridge_is_pinned_and_has_bridge_marginals() {
        let ramp = PiecewiseConstantRate::from_rate_fn(|t| 2.0 * t, 1000, 1.0).unwrap();
        let spec = GaussianPathSpec::new(
            GaussianKind::BridgeTimeChange {
                model: InterarrivalModel::poisson_rate_fn(ramp),
                horizon: 1.0,
            },
            20,
        )
        .unwrap();
        let paths = sample_many(&spec, 35, 15_000);
        for p in &paths {
            assert_eq!(p.values()[0], 0.0);
            assert_eq!(p.values()[20], 0.0);
        }
        let stats = moment_diagnostics(&paths, &[0.5]).unwrap();
        // Var = F(0.5)(1 − F(0.5)) = 0.25 · 0.75
        assert!(
            (stats.variances[0] - 0.1875).abs() < 3.0 * stats.variance_std_errors[0],
            "var={}",
            stats.variances[0]
        );
    }

    #[test]
    fn spec_validation() {
        assert!(GaussianPathSpec::new(GaussianKind::Bridge, 0).is_err());
        assert!(GaussianPathSpec::new(GaussianKind::BrownianMotion { sigma: 0.0 }, 8).is_err());
        let bridge = GaussianPathSpec::new(GaussianKind::Bridge, 8).unwrap();
        assert!(covariance(&bridge, -0.1, 0.5).is_err());
        assert!(covariance(&bridge, 0.5, 1.2).is_err());
    }

    #[test]
    fn sampling_is_reproducible() {
        let spec = GaussianPathSpec::new(GaussianKind::BmMinusBridge { sigma: 1.3 }, 32).unwrap();
        let a = sample_gaussian_path(&spec, &mut RandomStream::new(77, 5).rng()).unwrap();
        let b = sample_gaussian_path(&spec, &mut RandomStream::new(77, 5).rng()).unwrap();
        assert_eq!(a, b);
    }
}
