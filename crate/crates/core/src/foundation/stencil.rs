//! Finite-difference weights and local polynomial reconstruction.

use nalgebra::{DMatrix, DVector};

/// Fornberg's algorithm: weights for derivatives `0..=max_order` at `x0` from
/// samples at `xs`. `w[m][j]` multiplies `f(xs[j])` in the m-th derivative.
pub fn fornberg_weights(x0: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Least-squares polynomial of degree `degree` through `(xs, ys)`, evaluated at `x`.
/// Abscissae are shifted to `x` so the answer is the constant coefficient.
pub fn poly_fit_eval(xs: &[f64], ys: &[f64], degree: usize, x: f64) -> f64 {
    let cols = (degree + 1).min(xs.len());
    let scale = xs.iter().map(|&t| (t - x).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let rows: Vec<Vec<f64>> = xs
        .iter()
        .map(|&t| {
            let u = (t - x) / scale;
            (0..cols).scan(1.0, |p, _| {
                let v = *p;
                *p *= u;
                Some(v)
            })
            .collect()
        })
        .collect();
    let coef = least_squares(&rows, ys);
    coef[0]
}

/// Solves `min ‖A c − y‖₂` through the SVD, dropping singular values at
/// round-off level. `a` is given row-major.
pub fn least_squares(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let (m, n) = (a.len(), a[0].len());
    let matrix = DMatrix::from_fn(m, n, |i, j| a[i][j]);
    let rhs = DVector::from_column_slice(y);
    let svd = matrix.svd(true, true);
    let cutoff = svd.singular_values.max() * f64::EPSILON * m.max(n) as f64;
    svd.solve(&rhs, cutoff).expect("both singular bases were computed").iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_first_derivative_weights() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 1);
        assert!((w[1][0] + 0.5).abs() < 1e-15);
        assert!(w[1][1].abs() < 1e-15);
        assert!((w[1][2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn poly_fit_reproduces_cubic() {
        let xs: Vec<f64> = (1..9).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 - 2.0 * x + x * x * x).collect();
        assert!((poly_fit_eval(&xs, &ys, 4, 0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn least_squares_exact_system() {
        let a = vec![vec![1.0, 1.0], vec![1.0, 2.0], vec![1.0, 3.0]];
        let c = least_squares(&a, &[3.0, 5.0, 7.0]);
        assert!((c[0] - 1.0).abs() < 1e-12 && (c[1] - 2.0).abs() < 1e-12);
    }
}
