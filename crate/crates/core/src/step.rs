//! Right-continuous piecewise-constant paths with left limits.
//!
//! Every counting process, weight trajectory and estimated curve in the crate
//! is a [`StepPath`]. Evaluation at `t` returns the value of the last jump at
//! or before `t`; [`StepPath::eval_left`] returns the value of the last jump
//! strictly before `t`, which is what predictable integrands need.

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct StepPath<T = f64> {
    initial: T,
    jump_times: Vec<f64>,
    values: Vec<T>,
}

impl<T: Clone> StepPath<T> {
    pub fn constant(value: T) -> Self {
        Self { initial: value, jump_times: Vec::new(), values: Vec::new() }
    }

    /// Builds a path from parallel jump/value lists.
    ///
    /// Returns `None` unless `jump_times` is strictly increasing, finite and
    /// the same length as `values`.
    pub fn new(initial: T, jump_times: Vec<f64>, values: Vec<T>) -> Option<Self> {
        if jump_times.len() != values.len() {
            return None;
        }
        if jump_times.iter().any(|t| !t.is_finite()) {
            return None;
        }
        if jump_times.windows(2).any(|w| w[0] >= w[1]) {
            return None;
        }
        Some(Self { initial, jump_times, values })
    }

    /// Appends a jump. Panics if `time` does not exceed the last jump time.
    pub fn push(&mut self, time: f64, value: T) {
        if let Some(&last) = self.jump_times.last() {
            assert!(time > last, "jump at {time} not after last jump {last}");
        }
        self.jump_times.push(time);
        self.values.push(value);
    }

    pub fn initial(&self) -> &T {
        &self.initial
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.jump_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jump_times.is_empty()
    }

    pub fn last_value(&self) -> &T {
        self.values.last().unwrap_or(&self.initial)
    }

    pub fn eval(&self, t: f64) -> &T {
        let idx = self.jump_times.partition_point(|&s| s <= t);
        if idx == 0 {
            &self.initial
        } else {
            &self.values[idx - 1]
        }
    }

    pub fn eval_left(&self, t: f64) -> &T {
        let idx = self.jump_times.partition_point(|&s| s < t);
        if idx == 0 {
            &self.initial
        } else {
            &self.values[idx - 1]
        }
    }

    pub fn map<U: Clone>(&self, mut f: impl FnMut(&T) -> U) -> StepPath<U> {
        StepPath {
            initial: f(&self.initial),
            jump_times: self.jump_times.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Pointwise combination of two paths over the union of their jump times.
    pub fn zip_with<U: Clone, V: Clone>(
        &self,
        other: &StepPath<U>,
        mut f: impl FnMut(&T, &U) -> V,
    ) -> StepPath<V> {
        let mut out = StepPath::constant(f(&self.initial, &other.initial));
        let (a, b) = (&self.jump_times, &other.jump_times);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let t = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) => x.min(y),
                (Some(&x), None) => x,
                (None, Some(&y)) => y,
                (None, None) => unreachable!(),
            };
            if i < a.len() && a[i] == t {
                i += 1;
            }
            if j < b.len() && b[j] == t {
                j += 1;
            }
            let left = if i == 0 { &self.initial } else { &self.values[i - 1] };
            let right = if j == 0 { &other.initial } else { &other.values[j - 1] };
            out.push(t, f(left, right));
        }
        out
    }
}

impl<T: Clone + PartialEq> StepPath<T> {
    /// Drops jumps that do not change the value.
    pub fn simplify(&self) -> Self {
        let mut out = StepPath::constant(self.initial.clone());
        for (t, v) in self.jump_times.iter().zip(&self.values) {
            if v != out.last_value() {
                out.push(*t, v.clone());
            }
        }
        out
    }
}

impl StepPath<f64> {
    pub fn product(&self, other: &StepPath<f64>) -> StepPath<f64> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Caps every value at `bound`; returns the path and the number of capped values.
    pub fn capped(&self, bound: f64) -> (StepPath<f64>, usize) {
        let mut count = 0;
        let path = self.map(|&v| {
            if v > bound {
                count += 1;
                bound
            } else {
                v
            }
        });
        (path, count)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(self.initial, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(self.initial, f64::min)
    }
}
