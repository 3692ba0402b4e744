//! Statistical test kernel: Kolmogorov–Smirnov (one- and two-sample),
//! Pearson chi-square with tail pooling, and pointwise ensemble moments.
//!
//! Hypothesis tests report p-values meant to be compared against the level
//! 0.001; distribution-proximity comparisons elsewhere use raw KS distances
//! instead because their null holds only in the limit.

use crate::path::GridPath;
use crate::special::regularized_upper_gamma;
use crate::{Result, SimError};

/// Outcome of a KS test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Outcome of a chi-square goodness-of-fit test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: usize,
}

/// Survival function of the Kolmogorov distribution,
/// `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2 k² λ²)`,
/// truncated once terms drop below 1e-12.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100_000u64 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn check_finite(samples: &[f64]) -> Result<()> {
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(SimError::Data("samples must be finite".into()));
    }
    Ok(())
}

/// One-sample KS test of `samples` against the CDF `target`.
///
/// `D = sup_x |F_N(x) − F(x)|` over the sample points (both step sides);
/// the p-value uses the asymptotic Kolmogorov distribution at `√N · D`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], target_cdf: F) -> Result<KsResult> {
    if samples.len() < 5 {
        return Err(SimError::InsufficientData(format!(
            "one-sample KS needs at least 5 samples, got {}",
            samples.len()
        )));
    }
    check_finite(samples)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = target_cdf(x);
        if !(0.0..=1.0).contains(&f) {
            return Err(SimError::Data(format!("target cdf returned {f} at {x}")));
        }
        d = d.max((i as f64 / n - f).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    Ok(KsResult { statistic: d, p_value: kolmogorov_sf(n.sqrt() * d) })
}

/// Two-sample KS test with the asymptotic p-value at effective size
/// `ab/(a+b)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.len() < 5 || b.len() < 5 {
        return Err(SimError::InsufficientData(format!(
            "two-sample KS needs at least 5 samples per side, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    check_finite(a)?;
    check_finite(b)?;
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());

    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0_f64;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let n_eff = na * nb / (na + nb);
    Ok(KsResult { statistic: d, p_value: kolmogorov_sf(n_eff.sqrt() * d) })
}

/// Pearson chi-square against the cell probabilities `expected`.
///
/// Tail bins are pooled inward until every expected count reaches 5, the
/// usual validity rule; `dof = pooled bins − 1` and the p-value comes from
/// the regularized upper incomplete gamma.
pub fn chi_square_gof(counts: &[u64], expected: &[f64]) -> Result<ChiSquareResult> {
    if counts.is_empty() {
        return Err(SimError::Data("empty histogram".into()));
    }
    if counts.len() != expected.len() {
        return Err(SimError::Shape(format!(
            "{} count bins vs {} expected probabilities",
            counts.len(),
            expected.len()
        )));
    }
    if expected.iter().any(|&p| !(p.is_finite() && p >= 0.0)) {
        return Err(SimError::Data("expected probabilities must be nonnegative".into()));
    }
    let p_sum: f64 = expected.iter().sum();
    if (p_sum - 1.0).abs() > 1e-9 {
        return Err(SimError::Data(format!("expected probabilities sum to {p_sum}, not 1")));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(SimError::Data("histogram holds no observations".into()));
    }
    let n = total as f64;

    // Pool from the left tail, then from the right, until expected counts
    // reach 5.
    let mut obs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let mut exp: Vec<f64> = expected.iter().map(|&p| p * n).collect();
    let pool = |obs: &mut Vec<f64>, exp: &mut Vec<f64>| {
        while exp.len() > 1 && exp[0] < 5.0 {
            let (o, e) = (obs.remove(0), exp.remove(0));
            obs[0] += o;
            exp[0] += e;
        }
    };
    pool(&mut obs, &mut exp);
    obs.reverse();
    exp.reverse();
    pool(&mut obs, &mut exp);

    if exp.len() < 2 {
        return Err(SimError::Data("fewer than 2 bins remain after pooling".into()));
    }
    if exp.iter().any(|&e| e <= 0.0) {
        return Err(SimError::Data("a pooled bin still has zero expected count".into()));
    }

    let stat: f64 = obs
        .iter()
        .zip(exp.iter())
        .map(|(&o, &e)| {
            let diff = o - e;
            diff * diff / e
        })
        .sum();
    let dof = exp.len() - 1;
    let p_value = regularized_upper_gamma(dof as f64 / 2.0, stat / 2.0);
    Ok(ChiSquareResult { statistic: stat, p_value, dof })
}

// ============================================================================
// Ensemble moments
// ============================================================================

/// Pointwise ensemble summaries of grid paths at selected epochs, with the
/// per-point samples retained for downstream KS tests.
#[derive(Clone, Debug)]
pub struct ScaledEnsembleStats {
    pub t_points: Vec<f64>,
    pub means: Vec<f64>,
    /// Standard error of each mean.
    pub mean_std_errors: Vec<f64>,
    pub variances: Vec<f64>,
    /// Distribution-free standard error of each variance (fourth-moment form).
    pub variance_std_errors: Vec<f64>,
    /// `samples[k][r]` = value of path `r` at `t_points[k]`.
    pub samples: Vec<Vec<f64>>,
}

impl ScaledEnsembleStats {
    /// Sample covariance between the values at `t_points[i]` and
    /// `t_points[j]`, with a moment-based standard error.
    pub fn cross_covariance(&self, i: usize, j: usize) -> (f64, f64) {
        let (a, b) = (&self.samples[i], &self.samples[j]);
        let n = a.len() as f64;
        let (ma, mb) = (self.means[i], self.means[j]);
        let mut cov = 0.0;
        for (x, y) in a.iter().zip(b.iter()) {
            cov += (x - ma) * (y - mb);
        }
        cov /= n - 1.0;
        // Spread of the per-sample products around the covariance.
        let mut var_prod = 0.0;
        for (x, y) in a.iter().zip(b.iter()) {
            let p = (x - ma) * (y - mb) - cov;
            var_prod += p * p;
        }
        var_prod /= n - 1.0;
        (cov, (var_prod / n).sqrt())
    }
}

/// Compute pointwise means and variances of an ensemble of grid paths at the
/// requested epochs (which must sit on the common grid).
pub fn moment_diagnostics(paths: &[GridPath], t_points: &[f64]) -> Result<ScaledEnsembleStats> {
    if paths.len() < 100 {
        return Err(SimError::InsufficientData(format!(
            "moment diagnostics need at least 100 paths, got {}",
            paths.len()
        )));
    }
    let first = &paths[0];
    if paths.iter().any(|p| p.grid_size() != first.grid_size() || p.horizon() != first.horizon()) {
        return Err(SimError::Shape("all paths must share one grid".into()));
    }
    let indices: Vec<usize> =
        t_points.iter().map(|&t| first.index_at(t)).collect::<Result<_>>()?;

    let n = paths.len() as f64;
    let mut samples: Vec<Vec<f64>> = indices
        .iter()
        .map(|&idx| paths.iter().map(|p| p.values()[idx]).collect())
        .collect();
    let mut means = Vec::with_capacity(indices.len());
    let mut mean_ses = Vec::with_capacity(indices.len());
    let mut variances = Vec::with_capacity(indices.len());
    let mut var_ses = Vec::with_capacity(indices.len());
    for col in samples.iter_mut() {
        let mean = col.iter().sum::<f64>() / n;
        let mut m2 = 0.0;
        let mut m4 = 0.0;
        for &x in col.iter() {
            let d = x - mean;
            m2 += d * d;
            m4 += d * d * d * d;
        }
        let var = m2 / (n - 1.0);
        let m2n = m2 / n;
        let m4n = m4 / n;
        means.push(mean);
        mean_ses.push((var / n).sqrt());
        variances.push(var);
        var_ses.push(((m4n - m2n * m2n).max(0.0) / n).sqrt());
    }
    Ok(ScaledEnsembleStats {
        t_points: t_points.to_vec(),
        means,
        mean_std_errors: mean_ses,
        variances,
        variance_std_errors: var_ses,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::RandomStream;
    use rand::Rng;

    #[test]
    fn ks_one_sample_single_point_mass() {
        // Five copies of 0.5 against Uniform[0,1]: ECDF jumps 0→1 at 0.5.
        let res = ks_one_sample(&[0.5; 5], |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((res.statistic - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_one_sample_deciles_enumeration_oracle() {
        // Nine deciles 0.1..0.9 against Uniform[0,1]. Brute-force the sup
        // over both step sides at every sample point and freeze it.
        let samples: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        let n = samples.len() as f64;
        let mut brute = 0.0_f64;
        for (i, &x) in samples.iter().enumerate() {
            brute = brute.max((i as f64 / n - x).abs());
            brute = brute.max(((i + 1) as f64 / n - x).abs());
        }
        assert!((brute - 0.1).abs() < 1e-15, "enumeration oracle gives {brute}");

        let res = ks_one_sample(&samples, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((res.statistic - brute).abs() < 1e-15);
    }

    #[test]
    fn ks_one_sample_null_calibration() {
        // Fed its own null, the level-0.001 test should reject ≤ 0.5% of
        // 1000 meta-replications.
        let mut rejections = 0;
        for rep in 0..1000u64 {
            let mut rng = RandomStream::new(1000, rep).rng();
            let samples: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
            let res = ks_one_sample(&samples, |x| x.clamp(0.0, 1.0)).unwrap();
            if res.p_value <= 0.001 {
                rejections += 1;
            }
        }
        assert!(rejections <= 5, "{rejections} rejections out of 1000");
    }

    #[test]
    fn ks_two_sample_degenerate_cases() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let res = ks_two_sample(&a, &a).unwrap();
        assert_eq!(res.statistic, 0.0);
        assert!(res.p_value > 0.999);

        let zeros = [0.0; 20];
        let ones = [1.0; 20];
        let res = ks_two_sample(&zeros, &ones).unwrap();
        assert_eq!(res.statistic, 1.0);
        assert!(res.p_value < 1e-3);
    }

    #[test]
    fn ks_two_sample_handles_ties_across_samples() {
        let a = [1.0, 1.0, 4.0, 4.0, 7.0];
        let b = [1.0, 1.0, 1.0, 4.0, 7.0];
        // ECDF gap just after 1: |2/5 − 3/5| = 0.2
        let res = ks_two_sample(&a, &b).unwrap();
        assert!((res.statistic - 0.2).abs() < 1e-15);
    }

    #[test]
    fn ks_two_sample_null_calibration() {
        let mut rejections = 0;
        for rep in 0..1000u64 {
            let mut rng = RandomStream::new(2000, rep).rng();
            let a: Vec<f64> = (0..600).map(|_| rng.random::<f64>()).collect();
            let b: Vec<f64> = (0..400).map(|_| rng.random::<f64>()).collect();
            if ks_two_sample(&a, &b).unwrap().p_value <= 0.001 {
                rejections += 1;
            }
        }
        assert!(rejections <= 5, "{rejections} rejections out of 1000");
    }

    #[test]
    fn ks_rejects_bad_input() {
        assert!(ks_one_sample(&[0.1, 0.2], |x| x).is_err());
        assert!(ks_one_sample(&[0.1, 0.2, f64::NAN, 0.4, 0.5], |x| x).is_err());
        assert!(ks_two_sample(&[1.0; 5], &[1.0; 4]).is_err());
    }

    #[test]
    fn chi_square_exact_fit_and_power() {
        // Counts exactly proportional to the probabilities: statistic 0, p 1.
        let counts = [250u64, 500, 250];
        let probs = [0.25, 0.5, 0.25];
        let res = chi_square_gof(&counts, &probs).unwrap();
        assert_eq!(res.statistic, 0.0);
        assert!((res.p_value - 1.0).abs() < 1e-12);
        assert_eq!(res.dof, 2);

        // Negative control: expected vector shifted by one bin.
        let shifted = [0.5, 0.25, 0.25];
        let res = chi_square_gof(&counts, &shifted).unwrap();
        assert!(res.p_value < 1e-6, "p={}", res.p_value);
    }

    #[test]
    fn chi_square_pools_thin_tails() {
        // First and last bins have expected counts < 5 and must merge inward.
        let counts = [1u64, 30, 40, 29, 0];
        let probs = [0.004, 0.3, 0.4, 0.292, 0.004];
        let res = chi_square_gof(&counts, &probs).unwrap();
        assert_eq!(res.dof, 2); // 5 bins pooled down to 3
        assert!(res.p_value > 0.001);
    }

    #[test]
    fn chi_square_null_calibration() {
        let probs = [0.2, 0.3, 0.3, 0.2];
        let mut rejections = 0;
        for rep in 0..1000u64 {
            let mut rng = RandomStream::new(3000, rep).rng();
            let mut counts = [0u64; 4];
            for _ in 0..800 {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (k, &p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        counts[k] += 1;
                        break;
                    }
                }
            }
            if chi_square_gof(&counts, &probs).unwrap().p_value <= 0.001 {
                rejections += 1;
            }
        }
        assert!(rejections <= 5, "{rejections} rejections out of 1000");
    }

    #[test]
    fn chi_square_rejects_bad_input() {
        assert!(chi_square_gof(&[], &[]).is_err());
        assert!(chi_square_gof(&[1, 2], &[0.4, 0.4]).is_err());
        assert!(chi_square_gof(&[0, 0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn moment_diagnostics_on_known_ensemble() {
        // Deterministic paths: value at t is (r − mean) scaled, so the
        // variance at each point is known exactly.
        let paths: Vec<GridPath> = (0..200)
            .map(|r| {
                let offset = (r as f64 - 99.5) / 100.0;
                GridPath::from_fn(1.0, 4, |t| offset * t).unwrap()
            })
            .collect();
        let stats = moment_diagnostics(&paths, &[0.5, 1.0]).unwrap();
        assert!(stats.means[0].abs() < 1e-12);
        assert!(stats.means[1].abs() < 1e-12);
        // Var of offset = (1/100²)·Var(r − 99.5) over 0..200, r uniform grid.
        let var_offset = (0..200)
            .map(|r| ((r as f64 - 99.5) / 100.0).powi(2))
            .sum::<f64>()
            / 199.0;
        assert!((stats.variances[1] - var_offset).abs() < 1e-12);
        assert!((stats.variances[0] - var_offset * 0.25).abs() < 1e-12);
        // Perfectly correlated at the two points.
        let (cov, _) = stats.cross_covariance(0, 1);
        assert!((cov - var_offset * 0.5).abs() < 1e-12);
    }

    #[test]
    fn moment_diagnostics_validation() {
        let paths: Vec<GridPath> =
            (0..99).map(|_| GridPath::from_fn(1.0, 4, |t| t).unwrap()).collect();
        assert!(moment_diagnostics(&paths, &[0.5]).is_err());
        let paths: Vec<GridPath> =
            (0..100).map(|_| GridPath::from_fn(1.0, 4, |t| t).unwrap()).collect();
        assert!(moment_diagnostics(&paths, &[0.3]).is_err()); // off-grid epoch
    }
}
