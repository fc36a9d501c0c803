//! Composite Gauss–Legendre quadrature.

use alloc::vec::Vec;

// 8-point rule on [-1, 1]; symmetric, so only the positive nodes are listed.
const NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn gauss8(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for (x, w) in NODES.iter().zip(&WEIGHTS) {
        sum += w * (f(mid - half * x) + f(mid + half * x));
    }
    half * sum
}

/// `int_a^b f` using `panels` equal sub-intervals.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * h;
            let hi = if k + 1 == panels { b } else { lo + h };
            gauss8(&f, lo, hi)
        })
        .sum()
}

/// Antiderivative `F(t) = int_0^t f` of a smooth function, tabulated on an
/// equispaced grid over `[0, upper]` and completed by one more Gauss rule
/// inside the cell containing `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeTable {
    step: f64,
    values: Vec<f64>,
}

impl CumulativeTable {
    pub fn new(f: &impl Fn(f64) -> f64, upper: f64, cells: usize) -> Self {
        let cells = cells.max(1);
        let step = upper / cells as f64;
        let mut values = Vec::with_capacity(cells + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for k in 0..cells {
            acc += gauss8(f, k as f64 * step, (k + 1) as f64 * step);
            values.push(acc);
        }
        Self { step, values }
    }

    pub fn eval(&self, f: &impl Fn(f64) -> f64, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let k = ((t / self.step) as usize).min(self.values.len() - 1);
        let lo = k as f64 * self.step;
        if t == lo {
            return self.values[k];
        }
        self.values[k] + gauss8(f, lo, t)
    }
}
