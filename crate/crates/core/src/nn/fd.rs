use crate::error::{Error, Result};

/// Central-difference gradient `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn finite_diff_gradient<F>(mut f: F, x: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!(
            "finite-difference step must be > 0, got {h}"
        )));
    }
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let xi = probe[i];
        probe[i] = xi + h;
        let plus = f(&probe);
        probe[i] = xi - h;
        let minus = f(&probe);
        probe[i] = xi;
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square() {
        let g = finite_diff_gradient(|x| x[0] * x[0], &[3.0], 1e-5).unwrap();
        assert!((g[0] - 6.0).abs() < 1e-6);
    }

    #[test]
    fn constant_is_zero() {
        let g = finite_diff_gradient(|_| 4.2, &[1.0, -2.0, 3.0], 1e-5).unwrap();
        assert_eq!(g, vec![0.0; 3]);
    }

    #[test]
    fn tanh_derivative() {
        let g = finite_diff_gradient(|x| x[0].tanh(), &[0.5], 1e-5).unwrap();
        // 1 - tanh^2(0.5) by calculator
        assert!((g[0] - 0.786_447_732_965_927_4).abs() < 1e-6);
    }

    #[test]
    fn rejects_nonpositive_step() {
        assert!(matches!(
            finite_diff_gradient(|x| x[0], &[1.0], 0.0),
            Err(Error::Config(_))
        ));
        assert!(finite_diff_gradient(|x| x[0], &[1.0], -1e-3).is_err());
    }
}
