//! Lag polynomials in the backshift operator, stored densely by power.

use nalgebra::DMatrix;

/// `1 - c_1 z - ... - c_n z^n`
pub fn lag_polynomial(coefficients: &[f64]) -> Vec<f64> {
    let mut poly = Vec::with_capacity(coefficients.len() + 1);
    poly.push(1.0);
    poly.extend(coefficients.iter().map(|c| -c));
    poly
}

/// `1 - c_1 z^s - ... - c_n z^{ns}`
pub fn seasonal_lag_polynomial(coefficients: &[f64], season: usize) -> Vec<f64> {
    let mut poly = vec![0.0; coefficients.len() * season + 1];
    poly[0] = 1.0;
    for (k, c) in coefficients.iter().enumerate() {
        poly[(k + 1) * season] = -c;
    }
    poly
}

pub fn multiply(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `(1 - z)^d (1 - z^s)^D`
pub fn differencing_polynomial(d: usize, seasonal_d: usize, season: usize) -> Vec<f64> {
    let mut poly = vec![1.0];
    for _ in 0..d {
        poly = multiply(&poly, &[1.0, -1.0]);
    }
    for _ in 0..seasonal_d {
        poly = multiply(&poly, &seasonal_lag_polynomial(&[1.0], season));
    }
    poly
}

/// Nonzero terms `(lag, -poly[lag])` for lags >= 1, i.e. the coefficients on
/// the right-hand side when the polynomial equation is solved for the
/// newest value.
pub fn rhs_terms(poly: &[f64]) -> Vec<(usize, f64)> {
    poly.iter()
        .enumerate()
        .skip(1)
        .filter(|(_, c)| **c != 0.0)
        .map(|(lag, c)| (lag, -c))
        .collect()
}

/// Largest modulus among the reciprocal roots of `1 - c_1 z - ... - c_n z^n`.
/// The polynomial has all roots outside the unit circle iff this is below 1.
pub fn max_inverse_root(coefficients: &[f64]) -> f64 {
    let n = coefficients.len();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return coefficients[0].abs();
    }
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for (j, c) in coefficients.iter().enumerate() {
        companion[(0, j)] = *c;
    }
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    companion
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Durbin-Levinson map from partial autocorrelations in (-1, 1) to the
/// coefficients of a stationary (or invertible) lag polynomial.
pub fn pacf_to_coefficients(partials: &[f64]) -> Vec<f64> {
    let mut coefs: Vec<f64> = Vec::with_capacity(partials.len());
    for (k, &r) in partials.iter().enumerate() {
        let prev = coefs.clone();
        for j in 0..k {
            coefs[j] = prev[j] - r * prev[k - 1 - j];
        }
        coefs.push(r);
    }
    coefs
}

/// Inverse of [`pacf_to_coefficients`]; `None` if the polynomial is not
/// stationary.
pub fn coefficients_to_pacf(coefficients: &[f64]) -> Option<Vec<f64>> {
    let mut coefs = coefficients.to_vec();
    let mut partials = vec![0.0; coefs.len()];
    for k in (0..coefs.len()).rev() {
        let r = coefs[k];
        if !(r.abs() < 1.0) {
            return None;
        }
        partials[k] = r;
        let denom = 1.0 - r * r;
        let prev = coefs.clone();
        for j in 0..k {
            coefs[j] = (prev[j] + r * prev[k - 1 - j]) / denom;
        }
        coefs.truncate(k);
    }
    Some(partials)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differencing_polynomials() {
        assert_eq!(differencing_polynomial(1, 0, 0), vec![1.0, -1.0]);
        assert_eq!(differencing_polynomial(2, 0, 0), vec![1.0, -2.0, 1.0]);
        assert_eq!(differencing_polynomial(1, 1, 3), vec![1.0, -1.0, 0.0, -1.0, 1.0]);
    }

    #[test]
    fn pacf_round_trip() {
        let partials = [0.5, -0.3, 0.8, 0.1];
        let coefs = pacf_to_coefficients(&partials);
        assert!(max_inverse_root(&coefs) < 1.0);
        let back = coefficients_to_pacf(&coefs).unwrap();
        for (a, b) in partials.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(coefficients_to_pacf(&[1.2]).is_none());
        assert!(coefficients_to_pacf(&[0.5, 0.6]).is_none());
    }

    #[test]
    fn inverse_roots() {
        // 1 - 0.5z: root at 2
        assert!((max_inverse_root(&[0.5]) - 0.5).abs() < 1e-12);
        // (1 - 0.5z)(1 - 0.25z) = 1 - 0.75z + 0.125z^2
        assert!((max_inverse_root(&[0.75, -0.125]) - 0.5).abs() < 1e-9);
        // random walk has a unit root
        assert!((max_inverse_root(&[1.0]) - 1.0).abs() < 1e-12);
    }
}
