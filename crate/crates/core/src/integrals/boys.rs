//! Boys function `F_m(x) = ∫₀¹ t^{2m} exp(-x t²) dt`.

#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

/// Highest order the Coulomb recursions request (`4 l_max + 2` for `l ≤ 1`).
pub const MAX_ORDER: usize = 6;

/// Beyond this argument `F_0` equals `½√(π/x)` to below 1e-22.
const ASYMPTOTIC_X: f64 = 50.0;

pub fn boys(m: usize, x: f64) -> f64 {
    let mut out = [0.0; MAX_ORDER + 1];
    boys_array(x, &mut out[..=m]);
    out[m]
}

/// Fills `out[m] = F_m(x)` for `m < out.len()`.
///
/// For moderate `x` the top order comes from the convergent series
/// `F_M(x) = e^{-x} Σ_k (2x)^k / ((2M+1)(2M+3)…(2M+2k+1))` and lower orders
/// follow by downward recursion; for large `x` the asymptotic `F_0` seeds the
/// (then stable) upward recursion.
pub fn boys_array(x: f64, out: &mut [f64]) {
    let top = out.len() - 1;
    if x <= 0.0 {
        for (m, o) in out.iter_mut().enumerate() {
            *o = 1.0 / (2 * m + 1) as f64;
        }
        return;
    }
    let ex = (-x).exp();
    if x < ASYMPTOTIC_X {
        let mut term = 1.0 / (2 * top + 1) as f64;
        let mut sum = term;
        let mut k = 1usize;
        loop {
            term *= 2.0 * x / (2 * top + 2 * k + 1) as f64;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            k += 1;
        }
        out[top] = ex * sum;
        for m in (0..top).rev() {
            out[m] = (2.0 * x * out[m + 1] + ex) / (2 * m + 1) as f64;
        }
    } else {
        out[0] = 0.5 * (core::f64::consts::PI / x).sqrt();
        for m in 0..top {
            out[m + 1] = ((2 * m + 1) as f64 * out[m] - ex) / (2.0 * x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Gauss-Legendre (5 point) on many panels: independent of the
    /// series used above.
    fn quadrature(m: usize, x: f64) -> f64 {
        let nodes = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        let weights = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let panels = 2000;
        let h = 1.0 / panels as f64;
        let mut s = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (n, w) in nodes.iter().zip(&weights) {
                let t = mid + 0.5 * h * n;
                s += 0.5 * h * w * t.powi(2 * m as i32) * (-x * t * t).exp();
            }
        }
        s
    }

    #[test]
    fn zero_argument() {
        assert_eq!(boys(0, 0.0), 1.0);
        for m in 0..=MAX_ORDER {
            assert!((boys(m, 0.0) - 1.0 / (2 * m + 1) as f64).abs() < 1e-16);
        }
    }

    #[test]
    fn f0_at_one() {
        // frozen from the quadrature oracle below
        assert!((boys(0, 1.0) - 0.746_824_132_812_427).abs() < 1e-13);
        assert!((quadrature(0, 1.0) - 0.746_824_132_812_427).abs() < 1e-14);
    }

    #[test]
    fn matches_quadrature_over_range() {
        for &x in &[1e-8, 0.3, 1.0, 4.5, 12.0, 29.0, 49.9, 50.1, 80.0, 300.0] {
            for m in 0..=MAX_ORDER {
                let q = quadrature(m, x);
                let b = boys(m, x);
                assert!((q - b).abs() < 1e-13, "m={m} x={x} boys={b} quad={q}");
            }
        }
    }
}
