//! McMurchie–Davidson Hermite expansion coefficients and Coulomb tables.

#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use super::boys::{boys_array, MAX_ORDER};

/// Largest Cartesian power on the bra side of a 1D expansion.
pub const MAX_I: usize = 1;
/// Largest Cartesian power on the ket side (kinetic integrals need `l + 2`).
pub const MAX_J: usize = 3;
const MAX_T: usize = MAX_I + MAX_J + 1;

/// `E[i][j][t]`: coefficient of the Hermite Gaussian `Λ_t` in the product
/// `x_A^i x_B^j exp(-a x_A² - b x_B²)`.
#[derive(Debug, Clone, Copy)]
pub struct Hermite1d {
    pub e: [[[f64; MAX_T]; MAX_J + 1]; MAX_I + 1],
}

impl Hermite1d {
    /// `ab` is the separation `A - B` along this axis.
    pub fn new(i_max: usize, j_max: usize, a: f64, b: f64, ab: f64) -> Self {
        debug_assert!(i_max <= MAX_I && j_max <= MAX_J);
        let p = a + b;
        let mu = a * b / p;
        let pa = -b / p * ab;
        let pb = a / p * ab;
        let half_p = 0.5 / p;
        let mut e = [[[0.0; MAX_T]; MAX_J + 1]; MAX_I + 1];
        e[0][0][0] = (-mu * ab * ab).exp();
        let get = |row: &[f64; MAX_T], t: isize| -> f64 {
            if t < 0 || t as usize >= MAX_T {
                0.0
            } else {
                row[t as usize]
            }
        };
        for i in 0..i_max {
            let prev = e[i][0];
            for t in 0..=(i + 1) {
                let ti = t as isize;
                e[i + 1][0][t] = half_p * get(&prev, ti - 1) + pa * get(&prev, ti) + (t + 1) as f64 * get(&prev, ti + 1);
            }
        }
        for i in 0..=i_max {
            for j in 0..j_max {
                let prev = e[i][j];
                for t in 0..=(i + j + 1) {
                    let ti = t as isize;
                    e[i][j + 1][t] =
                        half_p * get(&prev, ti - 1) + pb * get(&prev, ti) + (t + 1) as f64 * get(&prev, ti + 1);
                }
            }
        }
        Self { e }
    }
}

const DIM: usize = MAX_ORDER + 1;

/// Hermite Coulomb integrals `R_{tuv}` (order zero) for `t + u + v ≤ l`.
#[derive(Debug, Clone)]
pub struct CoulombTable {
    r: [[[f64; DIM]; DIM]; DIM],
}

impl CoulombTable {
    /// `alpha` is the reduced exponent, `pq` the separation of the two
    /// Hermite centers.
    pub fn new(l: usize, alpha: f64, pq: [f64; 3]) -> Self {
        debug_assert!(l <= MAX_ORDER);
        let x2 = pq[0] * pq[0] + pq[1] * pq[1] + pq[2] * pq[2];
        let mut f = [0.0; DIM];
        boys_array(alpha * x2, &mut f[..=l]);
        // work[n][t][u][v], filled from the highest auxiliary order down
        let mut work = [[[[0.0; DIM]; DIM]; DIM]; DIM];
        let mut scale = 1.0;
        for n in 0..=l {
            work[n][0][0][0] = scale * f[n];
            scale *= -2.0 * alpha;
        }
        for n in (0..l).rev() {
            let top = l - n;
            for s in 1..=top {
                for t in 0..=s {
                    for u in 0..=(s - t) {
                        let v = s - t - u;
                        let val = if t > 0 {
                            let lower = if t > 1 { (t - 1) as f64 * work[n + 1][t - 2][u][v] } else { 0.0 };
                            lower + pq[0] * work[n + 1][t - 1][u][v]
                        } else if u > 0 {
                            let lower = if u > 1 { (u - 1) as f64 * work[n + 1][t][u - 2][v] } else { 0.0 };
                            lower + pq[1] * work[n + 1][t][u - 1][v]
                        } else {
                            let lower = if v > 1 { (v - 1) as f64 * work[n + 1][t][u][v - 2] } else { 0.0 };
                            lower + pq[2] * work[n + 1][t][u][v - 1]
                        };
                        work[n][t][u][v] = val;
                    }
                }
            }
        }
        Self { r: work[0] }
    }

    #[inline]
    pub fn get(&self, t: usize, u: usize, v: usize) -> f64 {
        self.r[t][u][v]
    }
}
