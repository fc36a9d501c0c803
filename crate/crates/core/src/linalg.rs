//! Small dense symmetric solves.

use alloc::vec::Vec;

/// Relative pivot tolerance used for rank decisions.
pub const RANK_TOL: f64 = 1e-12;

/// Diagonally pivoted `L D L^T` factorisation `P^T G P = L D L^T` of a
/// symmetric positive semi-definite matrix stored row-major, with `L` unit
/// lower triangular.
///
/// Factorisation stops at the first pivot below `tol` times the largest
/// pivot, so `rank` reveals numerical rank and the ratio of extreme pivots is
/// a cheap condition estimate. Avoiding square roots keeps one-dimensional
/// solves exact divisions.
#[derive(Debug, Clone)]
pub struct PivotedLdl {
    p: usize,
    /// Strict lower part holds `L`, the diagonal holds `D`.
    l: Vec<f64>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedLdl {
    pub fn factor(gram: &[f64], p: usize, tol: f64) -> Self {
        assert_eq!(gram.len(), p * p);
        let mut a = gram.to_vec();
        let mut perm: Vec<usize> = (0..p).collect();
        let mut max_pivot = 0.0f64;
        let mut rank = 0;
        for k in 0..p {
            let (mut piv, mut best) = (k, a[k * p + k]);
            for j in k + 1..p {
                if a[j * p + j] > best {
                    piv = j;
                    best = a[j * p + j];
                }
            }
            if k == 0 {
                max_pivot = best;
            }
            if !(best > tol * max_pivot) || !(best > 0.0) || !best.is_finite() {
                break;
            }
            if piv != k {
                perm.swap(k, piv);
                for c in 0..p {
                    a.swap(k * p + c, piv * p + c);
                }
                for r in 0..p {
                    a.swap(r * p + k, r * p + piv);
                }
            }
            let d = a[k * p + k];
            for i in k + 1..p {
                let cik = a[i * p + k];
                for j in k + 1..=i {
                    a[i * p + j] -= cik * a[j * p + k] / d;
                }
            }
            for i in k + 1..p {
                for j in i + 1..p {
                    a[i * p + j] = a[j * p + i];
                }
                a[i * p + k] /= d;
            }
            rank = k + 1;
        }
        Self { p, l: a, perm, rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.p
    }

    /// Original indices of columns left out of the leading full-rank block.
    pub fn dependent_columns(&self) -> Vec<usize> {
        let mut out = self.perm[self.rank..].to_vec();
        out.sort_unstable();
        out
    }

    /// Solves `G x = b`; `None` when the matrix is numerically singular.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        if !self.is_full_rank() {
            return None;
        }
        let p = self.p;
        let mut y: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..p {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * p + k] * y[k];
            }
            y[i] = s;
        }
        for i in 0..p {
            y[i] /= self.l[i * p + i];
        }
        for i in (0..p).rev() {
            let mut s = y[i];
            for k in i + 1..p {
                s -= self.l[k * p + i] * y[k];
            }
            y[i] = s;
        }
        let mut x = alloc::vec![0.0; p];
        for (k, &i) in self.perm.iter().enumerate() {
            x[i] = y[k];
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn solves_spd_system() {
        let g = vec![4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let b = vec![1.0, -2.0, 0.5];
        let x = PivotedLdl::factor(&g, 3, RANK_TOL).solve(&b).unwrap();
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| g[i * 3 + j] * x[j]).sum::<f64>() - b[i];
            assert!(r.abs() < 1e-14);
        }
    }

    #[test]
    fn detects_rank_deficiency() {
        // second column is twice the first
        let g = vec![1.0, 2.0, 0.0, 2.0, 4.0, 0.0, 0.0, 0.0, 1.0];
        let f = PivotedLdl::factor(&g, 3, RANK_TOL);
        assert_eq!(f.rank(), 2);
        assert!(f.solve(&[1.0, 1.0, 1.0]).is_none());
        assert_eq!(f.dependent_columns().len(), 1);

        let zero = vec![0.0; 4];
        assert_eq!(PivotedLdl::factor(&zero, 2, RANK_TOL).rank(), 0);
    }
}
