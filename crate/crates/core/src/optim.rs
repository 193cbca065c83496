//! Nelder–Mead simplex minimization.

use alloc::vec;
use alloc::vec::Vec;

/// Termination settings for [`nelder_mead`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    /// Stop once `max f − min f` over the simplex is at most this.
    pub f_tol: f64,
    /// ... and the largest vertex distance from the best vertex is at most this.
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { initial_step: 0.25, f_tol: 1e-13, x_tol: 1e-10, max_iter: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with the standard reflection/expansion/
/// contraction/shrink coefficients (1, 2, ½, ½).
pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let n = x0.len();
    if n == 0 {
        return Minimum { x: Vec::new(), f: f(x0), iterations: 0, converged: true };
    }
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| sanitize(f(v))).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    for iter in 0..opts.max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| core::mem::take(&mut simplex[i])).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let size = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= opts.f_tol && size <= opts.x_tol {
            return Minimum { x: simplex.swap_remove(0), f: values[0], iterations: iter, converged: true };
        }

        for j in 0..n {
            centroid[j] = simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64;
        }
        let worst = &simplex[n];
        for j in 0..n {
            trial[j] = centroid[j] + (centroid[j] - worst[j]);
        }
        let fr = sanitize(f(&trial));
        if fr < values[0] {
            for j in 0..n {
                trial2[j] = centroid[j] + 2.0 * (centroid[j] - worst[j]);
            }
            let fe = sanitize(f(&trial2));
            if fe < fr {
                simplex[n].copy_from_slice(&trial2);
                values[n] = fe;
            } else {
                simplex[n].copy_from_slice(&trial);
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n].copy_from_slice(&trial);
            values[n] = fr;
            continue;
        }
        // Contraction, outside if the reflection improved on the worst.
        let outside = fr < values[n];
        for j in 0..n {
            trial2[j] = if outside {
                centroid[j] + 0.5 * (trial[j] - centroid[j])
            } else {
                centroid[j] + 0.5 * (worst[j] - centroid[j])
            };
        }
        let fc = sanitize(f(&trial2));
        if fc < if outside { fr } else { values[n] } {
            simplex[n].copy_from_slice(&trial2);
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            for j in 0..n {
                simplex[i][j] = best[j] + 0.5 * (simplex[i][j] - best[j]);
            }
            values[i] = sanitize(f(&simplex[i]));
        }
    }
    let (i, &fbest) = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("simplex is non-empty");
    Minimum { x: simplex.swap_remove(i), f: fbest, iterations: opts.max_iter, converged: false }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions { max_iter: 20_000, ..Default::default() };
        let m = nelder_mead(f, &[-1.2, 1.0], &opts);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{:?}", m.x);
    }

    #[test]
    fn one_dimensional_quadratic() {
        let m = nelder_mead(|x| (x[0] - 0.3).powi(2), &[2.0], &NelderMeadOptions::default());
        assert!((m.x[0] - 0.3).abs() < 1e-9);
    }

    #[test]
    fn nan_is_treated_as_infinite() {
        let m = nelder_mead(
            |x| if x[0] < 0.0 { f64::NAN } else { (x[0] - 1.0).powi(2) },
            &[0.1],
            &NelderMeadOptions::default(),
        );
        assert!((m.x[0] - 1.0).abs() < 1e-8);
    }
}
