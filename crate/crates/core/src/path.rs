//! Path representations: cadlag step functions and uniform-grid samples.

use crate::{Result, SimError};

// ============================================================================
// StepPath
// ============================================================================

/// A right-continuous piecewise-constant function on `[0, horizon]`.
///
/// The path equals `initial_value` on `[0, jump_epochs[0])` and
/// `post_jump_values[i]` on `[jump_epochs[i], jump_epochs[i+1])`. Evaluation
/// at a jump epoch returns the post-jump value.
#[derive(Clone, Debug, PartialEq)]
pub struct StepPath {
    initial_value: f64,
    horizon: f64,
    jump_epochs: Vec<f64>,
    post_jump_values: Vec<f64>,
}

impl StepPath {
    pub fn new(
        initial_value: f64,
        horizon: f64,
        jump_epochs: Vec<f64>,
        post_jump_values: Vec<f64>,
    ) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(SimError::Domain(format!("horizon must be > 0, got {horizon}")));
        }
        if jump_epochs.len() != post_jump_values.len() {
            return Err(SimError::Shape(format!(
                "jump_epochs has {} entries, post_jump_values has {}",
                jump_epochs.len(),
                post_jump_values.len()
            )));
        }
        if !initial_value.is_finite() || post_jump_values.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Data("step path values must be finite".into()));
        }
        if let Some(&first) = jump_epochs.first() {
            if first < 0.0 || *jump_epochs.last().unwrap() > horizon {
                return Err(SimError::Domain("jump epochs must lie in [0, horizon]".into()));
            }
        }
        // partial_cmp form also rejects NaN epochs.
        let strictly_increasing =
            |w: &[f64]| w[0].partial_cmp(&w[1]) == Some(std::cmp::Ordering::Less);
        if jump_epochs.windows(2).any(|w| !strictly_increasing(w)) {
            return Err(SimError::Domain("jump epochs must be strictly increasing".into()));
        }
        Ok(Self { initial_value, horizon, jump_epochs, post_jump_values })
    }

    /// A constant path.
    pub fn constant(value: f64, horizon: f64) -> Result<Self> {
        Self::new(value, horizon, Vec::new(), Vec::new())
    }

    pub fn initial_value(&self) -> f64 {
        self.initial_value
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn jump_epochs(&self) -> &[f64] {
        &self.jump_epochs
    }

    pub fn post_jump_values(&self) -> &[f64] {
        &self.post_jump_values
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(SimError::Domain(format!(
                "t={t} outside [0, {}]",
                self.horizon
            )));
        }
        Ok(())
    }

    /// Number of jumps at or before `t`.
    fn jumps_through(&self, t: f64) -> usize {
        self.jump_epochs.partition_point(|&e| e <= t)
    }

    /// Right-continuous evaluation.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        let k = self.jumps_through(t);
        Ok(if k == 0 { self.initial_value } else { self.post_jump_values[k - 1] })
    }

    /// `sup_{0 <= s <= t} (−path(s))₊`, computed exactly over the attained
    /// segment values in `[0, t]`.
    pub fn sup_neg(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        let k = self.jumps_through(t);
        // The initial value is attained unless a jump sits at epoch 0.
        let mut sup = if self.jump_epochs.first().copied() == Some(0.0) {
            0.0_f64.max(-self.post_jump_values[0])
        } else {
            0.0_f64.max(-self.initial_value)
        };
        for &v in &self.post_jump_values[..k] {
            sup = sup.max(-v);
        }
        Ok(sup)
    }

    /// Exact supremum of `|path(s) − slope·s|` over `s ∈ [0, horizon]`.
    ///
    /// On each constant segment the gap to an affine function is extremal at
    /// the segment ends, so a scan over jump epochs is exact.
    pub fn sup_abs_linear_gap(&self, slope: f64) -> f64 {
        let mut sup = 0.0_f64;
        let mut value = self.initial_value;
        let mut left = 0.0;
        for (i, &epoch) in self.jump_epochs.iter().enumerate() {
            sup = sup.max((value - slope * left).abs());
            sup = sup.max((value - slope * epoch).abs());
            value = self.post_jump_values[i];
            left = epoch;
        }
        sup = sup.max((value - slope * left).abs());
        sup.max((value - slope * self.horizon).abs())
    }
}

// ============================================================================
// GridPath
// ============================================================================

/// A function sampled at the uniform grid `{ i·horizon/m : i = 0..=m }`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPath {
    horizon: f64,
    values: Vec<f64>,
}

impl GridPath {
    pub fn new(horizon: f64, values: Vec<f64>) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(SimError::Domain(format!("horizon must be > 0, got {horizon}")));
        }
        if values.len() < 2 {
            return Err(SimError::Shape("grid path needs at least grid size 1".into()));
        }
        Ok(Self { horizon, values })
    }

    /// Fill a grid of size `m` by evaluating `f` at each epoch.
    pub fn from_fn<F: FnMut(f64) -> f64>(horizon: f64, m: usize, mut f: F) -> Result<Self> {
        if m == 0 {
            return Err(SimError::Shape("grid size must be >= 1".into()));
        }
        let values = (0..=m).map(|i| f(i as f64 * horizon / m as f64)).collect();
        Self::new(horizon, values)
    }

    /// Sample a step path at the grid epochs of a size-`m` grid.
    pub fn sample_step(path: &StepPath, m: usize) -> Result<Self> {
        Self::from_fn(path.horizon(), m, |t| path.eval(t).expect("grid epoch in domain"))
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Grid size `m`; the path holds `m + 1` values.
    pub fn grid_size(&self) -> usize {
        self.values.len() - 1
    }

    pub fn epoch(&self, i: usize) -> f64 {
        i as f64 * self.horizon / self.grid_size() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index of the grid point sitting exactly at `t` (to 1e-12 absolute).
    pub fn index_at(&self, t: f64) -> Result<usize> {
        let m = self.grid_size() as f64;
        let i = (t / self.horizon * m).round();
        if i < 0.0 || i > m || (self.epoch(i as usize) - t).abs() > 1e-12 {
            return Err(SimError::Domain(format!("t={t} is not a grid epoch")));
        }
        Ok(i as usize)
    }
}
