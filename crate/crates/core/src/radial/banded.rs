//! Symmetric banded matrices with an unpivoted `LDLᵀ` factorization, used
//! for inertia counts and shifted solves.

use alloc::vec;
use alloc::vec::Vec;

/// Lower band of a symmetric matrix: `band[i * (p + 1) + d]` holds
/// `a[i][i - d]` for `d ≤ p`.
#[derive(Debug, Clone)]
pub struct SymBand {
    n: usize,
    p: usize,
    band: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, p: usize) -> Self {
        Self { n, p, band: vec![0.0; n * (p + 1)] }
    }

    /// Adds `v` at `(i, j)` (and its mirror); `|i - j| ≤ p`.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(hi - lo <= self.p);
        self.band[hi * (self.p + 1) + (hi - lo)] += v;
    }

    #[cfg(test)]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        if hi - lo > self.p {
            0.0
        } else {
            self.band[hi * (self.p + 1) + (hi - lo)]
        }
    }

    pub fn factor(&self) -> Ldl {
        let (n, p) = (self.n, self.p);
        let w = p + 1;
        // l[i * w + d] = L[i][i - d] for d ≥ 1
        let mut l = vec![0.0; n * w];
        let mut d = vec![0.0; n];
        let scale = self.band.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(f64::MIN_POSITIVE);
        for i in 0..n {
            let lo = i.saturating_sub(p);
            // row i of L times D, columns lo..i
            for j in lo..i {
                let mut s = self.band[i * w + (i - j)];
                let klo = lo.max(j.saturating_sub(p));
                for k in klo..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)] * d[k];
                }
                l[i * w + (i - j)] = s / d[j];
            }
            let mut s = self.band[i * w];
            for k in lo..i {
                let lik = l[i * w + (i - k)];
                s -= lik * lik * d[k];
            }
            if s == 0.0 {
                s = f64::EPSILON * scale;
            }
            d[i] = s;
        }
        Ldl { n, p, l, d }
    }
}

#[derive(Debug, Clone)]
pub struct Ldl {
    n: usize,
    p: usize,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl Ldl {
    /// Number of negative pivots, i.e. negative eigenvalues.
    pub fn negative_count(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, p) = (self.n, self.p);
        let w = p + 1;
        let mut x = rhs.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(p);
            let mut s = x[i];
            for k in lo..i {
                s -= self.l[i * w + (i - k)] * x[k];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let hi = (i + p).min(n - 1);
            let mut s = x[i];
            for k in (i + 1)..=hi {
                s -= self.l[k * w + (k - i)] * x[k];
            }
            x[i] = s;
        }
        x
    }
}
