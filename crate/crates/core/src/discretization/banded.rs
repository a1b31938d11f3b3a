//! Banded LU with partial pivoting, and a complex tridiagonal solver.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real banded matrix with `kl` sub- and `ku` super-diagonals, stored with
/// `kl` extra super-diagonals for fill-in from row interchanges.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandedMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    /// Adds `v` at `(i, j)`; the entry must lie inside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku && i < self.n && j < self.n,
            "entry ({i}, {j}) outside band"
        );
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl || j >= self.n {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Infinity norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular(k));
            }
            pivots[k] = p;
            let right = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=right {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=right {
                        let kj = self.data[self.idx(k, j)];
                        let ij = self.idx(i, j);
                        self.data[ij] -= l * kj;
                    }
                }
            }
        }
        Ok(BandedLu { m: self, pivots })
    }
}

/// LU factors of a [`BandedMatrix`].
#[derive(Debug, Clone)]
pub struct BandedLu {
    m: BandedMatrix,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let m = &self.m;
        let n = m.n;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + m.kl).min(n - 1) {
                    b[i] -= m.data[m.idx(i, k)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + m.kl + m.ku).min(n - 1) {
                s -= m.data[m.idx(k, j)] * b[j];
            }
            b[k] = s / m.data[m.idx(k, k)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Ratio of largest to smallest pivot magnitude; a cheap indicator of
    /// near-singularity.
    pub fn pivot_ratio(&self) -> f64 {
        let m = &self.m;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for k in 0..m.n {
            let v = m.data[m.idx(k, k)].abs();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        hi / lo
    }
}

/// Tridiagonal system with complex entries, factored without pivoting.
///
/// Intended for matrices with positive-definite Hermitian part such as
/// `M + i tau A`, for which elimination without pivoting is stable.
#[derive(Debug, Clone)]
pub struct ComplexTridiagonal {
    sub: Vec<Complex64>,
    inv_diag: Vec<Complex64>,
    sup_scaled: Vec<Complex64>,
}

impl ComplexTridiagonal {
    pub fn factor(sub: &[Complex64], diag: &[Complex64], sup: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        let mut inv_diag = vec![Complex64::new(0.0, 0.0); n];
        let mut sup_scaled = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
        let mut prev = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let d = if i == 0 {
                diag[0]
            } else {
                diag[i] - sub[i - 1] * prev
            };
            if d.norm() == 0.0 || !d.re.is_finite() || !d.im.is_finite() {
                return Err(Error::Singular(i));
            }
            inv_diag[i] = d.inv();
            if i + 1 < n {
                prev = sup[i] * inv_diag[i];
                sup_scaled[i] = prev;
            }
        }
        Ok(ComplexTridiagonal {
            sub: sub.to_vec(),
            inv_diag,
            sup_scaled,
        })
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = b.len();
        b[0] *= self.inv_diag[0];
        for i in 1..n {
            b[i] = (b[i] - self.sub[i - 1] * b[i - 1]) * self.inv_diag[i];
        }
        for i in (0..n - 1).rev() {
            let next = b[i + 1];
            b[i] -= self.sup_scaled[i] * next;
        }
    }
}
