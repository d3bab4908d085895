use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Linear,
    /// Right-continuous step function.
    Step,
}

/// A function on `[0, 1]` given by its values on a grid `0 = t_0 < ... < t_m = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
    interpolation: Interpolation,
}

impl PathFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, interpolation: Interpolation) -> Self {
        assert_eq!(grid.len(), values.len(), "grid and values differ in length");
        assert!(grid.len() >= 2, "need at least two grid points");
        debug_assert!(grid.windows(2).all(|w| w[0] < w[1]));
        Self {
            grid,
            values,
            interpolation,
        }
    }

    /// Values on the uniform grid `k / m`, `k = 0..=m`.
    pub fn uniform(values: Vec<f64>, interpolation: Interpolation) -> Self {
        let m = values.len() - 1;
        let grid = (0..=m).map(|k| k as f64 / m as f64).collect();
        Self::new(grid, values, interpolation)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Value at `t`, clamped to `[0, 1]`.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(self.grid[0], self.grid[self.grid.len() - 1]);
        // index of the last grid point <= t
        let k = self.grid.partition_point(|&g| g <= t).saturating_sub(1);
        if self.grid[k] == t || k + 1 == self.grid.len() {
            return self.values[k];
        }
        match self.interpolation {
            Interpolation::Step => self.values[k],
            Interpolation::Linear => {
                let (t0, t1) = (self.grid[k], self.grid[k + 1]);
                let w = (t - t0) / (t1 - t0);
                self.values[k] + w * (self.values[k + 1] - self.values[k])
            }
        }
    }

    /// Index of the grid point nearest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        let k = self.grid.partition_point(|&g| g < t);
        if k == 0 {
            0
        } else if k == self.grid.len() {
            k - 1
        } else if (self.grid[k] - t) < (t - self.grid[k - 1]) {
            k
        } else {
            k - 1
        }
    }
}
