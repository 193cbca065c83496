//! Small dense-polynomial helpers shared by the kernel, approximation and
//! integer accumulation code.

use crate::MAX_DEGREE;

/// Binomial coefficients `C(n, k)` for `0 ≤ k ≤ n ≤ MAX_DEGREE`.
pub const BINOMIAL: [[i64; MAX_DEGREE + 1]; MAX_DEGREE + 1] = binomial_table();

const fn binomial_table() -> [[i64; MAX_DEGREE + 1]; MAX_DEGREE + 1] {
    let mut t = [[0i64; MAX_DEGREE + 1]; MAX_DEGREE + 1];
    let mut n = 0;
    while n <= MAX_DEGREE {
        t[n][0] = 1;
        let mut k = 1;
        while k <= n {
            t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0 };
            k += 1;
        }
        n += 1;
    }
    t
}

/// Evaluates `Σ c_i x^i` by Horner's scheme.
#[inline]
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Evaluates the derivative of `Σ c_i x^i`.
#[inline]
pub fn horner_derivative(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for (i, &c) in coeffs.iter().enumerate().skip(1).rev() {
        acc = acc * x + c * i as f64;
    }
    acc
}

/// Re-expands `p(x) = Σ c_i x^i` about `h`, i.e. replaces the coefficients
/// by those of `x ↦ p(x + h)`.
pub fn taylor_shift(coeffs: &mut [f64], h: f64) {
    let n = coeffs.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            coeffs[j] += h * coeffs[j + 1];
        }
    }
}

/// Rescales the argument: replaces `p(x)` by `p(s·x)`.
pub fn scale_argument(coeffs: &mut [f64], s: f64) {
    let mut f = 1.0;
    for c in coeffs.iter_mut() {
        *c *= f;
        f *= s;
    }
}

/// Values `P̃_0(s), …, P̃_n(s)` of the shifted Legendre polynomials
/// `P̃_i(s) = P_i(2s − 1)`, written into `out[..=n]`.
#[inline]
pub fn shifted_legendre_values(s: f64, out: &mut [f64]) {
    let x = 2.0 * s - 1.0;
    let n = out.len();
    if n == 0 {
        return;
    }
    out[0] = 1.0;
    if n > 1 {
        out[1] = x;
    }
    for i in 1..n.saturating_sub(1) {
        let fi = i as f64;
        out[i + 1] = ((2.0 * fi + 1.0) * x * out[i] - fi * out[i - 1]) / (fi + 1.0);
    }
}

/// Converts shifted Legendre coefficients to monomial coefficients in `s`.
pub fn legendre_to_monomial(leg: &[f64], mono: &mut [f64]) {
    mono.iter_mut().for_each(|m| *m = 0.0);
    for (n, &c) in leg.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        // P̃_n(s) = Σ_k (−1)^{n+k} C(n,k) C(n+k,k) s^k
        for k in 0..=n {
            let sign = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
            mono[k] += c * sign * binom_f64(n, k) * binom_f64(n + k, k);
        }
    }
}

/// Converts monomial coefficients in `s` to shifted Legendre coefficients.
pub fn monomial_to_legendre(mono: &[f64], leg: &mut [f64]) {
    leg.iter_mut().for_each(|m| *m = 0.0);
    for (d, &c) in mono.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        // s^d = Σ_i (2i+1) d!² / ((d−i)! (d+i+1)!) P̃_i(s)
        for i in 0..=d {
            let mut a = (2 * i + 1) as f64;
            for j in (d - i + 1)..=d {
                a *= j as f64;
            }
            for j in (d + 1)..=(d + i + 1) {
                a /= j as f64;
            }
            leg[i] += c * a;
        }
    }
}

fn binom_f64(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for j in 0..k {
        r = r * (n - j) as f64 / (j + 1) as f64;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(BINOMIAL[6], [1, 6, 15, 20, 15, 6, 1]);
        assert_eq!(BINOMIAL[3][2], 3);
        assert_eq!(BINOMIAL[0][0], 1);
    }

    #[test]
    fn shift_matches_direct_evaluation() {
        let p = [0.5, -1.25, 3.0, 0.75, -0.125];
        let mut q = p;
        taylor_shift(&mut q, 0.3);
        for &x in &[-1.0, 0.0, 0.2, 1.7] {
            assert!((horner(&q, x) - horner(&p, x + 0.3)).abs() < 1e-12);
        }
    }

    #[test]
    fn legendre_conversions_round_trip() {
        let mono = [0.3, -1.0, 2.5, 0.0, -4.0, 1.5, 0.25];
        let mut leg = [0.0; 7];
        let mut back = [0.0; 7];
        monomial_to_legendre(&mono, &mut leg);
        legendre_to_monomial(&leg, &mut back);
        for (a, b) in mono.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
        let mut vals = [0.0; 7];
        for &s in &[0.0, 0.21, 0.5, 1.0] {
            shifted_legendre_values(s, &mut vals);
            let via_leg: f64 = leg.iter().zip(&vals).map(|(c, p)| c * p).sum();
            assert!((via_leg - horner(&mono, s)).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative() {
        let p = [1.0, 2.0, 3.0];
        assert_eq!(horner_derivative(&p, 2.0), 2.0 + 6.0 * 2.0);
    }
}
