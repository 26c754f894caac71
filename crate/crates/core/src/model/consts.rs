//! Chernoff-bound exponents and the capacity-scaling constant.

use crate::error::{Error, Result};

/// `(1+eps)·ln(1+eps) − eps`, the exponent of the multiplicative Chernoff tail.
pub fn beta(eps: f64) -> Result<f64> {
    if !(eps > -1.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("beta requires eps > -1, got {eps}")));
    }
    // ln_1p keeps precision for small eps.
    Ok((1.0 + eps) * eps.ln_1p() - eps)
}

/// Capacity scaling applied to every grid edge before randomized rounding: `beta(1) / 6`.
pub fn lambda() -> f64 {
    (2.0 * std::f64::consts::LN_2 - 1.0) / 6.0
}

/// `exp(−beta(eps)·mu)`: bound on `Pr[X ≥ (1+eps)·mu]` for a sum of independent
/// `[0,1]` variables with mean at most `mu`.
pub fn chernoff_tail(mu: f64, eps: f64) -> Result<f64> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::Domain(format!("chernoff_tail requires mu >= 0, got {mu}")));
    }
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("chernoff_tail requires eps > 0, got {eps}")));
    }
    Ok((-beta(eps)? * mu).exp())
}

/// `(e/alpha)^(alpha·mu)`: the simplified form of the tail for `X ≥ alpha·mu`, `alpha > 1`.
pub fn chernoff_tail_ratio(mu: f64, alpha: f64) -> Result<f64> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::Domain(format!("requires mu >= 0, got {mu}")));
    }
    if !(alpha > 1.0) {
        return Err(Error::Domain(format!("requires alpha > 1, got {alpha}")));
    }
    Ok((std::f64::consts::E / alpha).powf(alpha * mu))
}

/// Union bound on a source lying in an overloaded rectangle of the first quadrant:
/// `Σ_{x,y≥1} x·y·(λe)^(x+y) = (λe)² / (1−λe)⁴`.
pub fn rectangle_overload_bound() -> f64 {
    let q = lambda() * std::f64::consts::E;
    q * q / (1.0 - q).powi(4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_closed_forms() {
        assert_eq!(beta(0.0).unwrap(), 0.0);
        let b1 = beta(1.0).unwrap();
        assert!((b1 - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-12);
        assert!((b1 - 0.386_294_4).abs() < 1e-7);
    }

    #[test]
    fn beta_rejects_out_of_domain() {
        assert!(beta(-1.0).is_err());
        assert!(beta(-2.0).is_err());
        assert!(beta(f64::NAN).is_err());
    }

    #[test]
    fn observation_bounds_on_positive_samples() {
        for eps in [0.1, 0.5, 0.9] {
            let b = beta(eps).unwrap();
            assert!(eps * eps / 2.0 >= b, "upper bound at {eps}");
            assert!(b >= 2.0 * eps * eps / (4.2 + eps), "lower bound at {eps}");
        }
    }

    #[test]
    fn lambda_value() {
        let l = lambda();
        assert!((l - 0.064_382_4).abs() < 1e-7);
        assert!((15.53..=15.55).contains(&(1.0 / l)));
        assert!(l * std::f64::consts::E < 0.2);
        // 2λk with k = 6 ln d equals 2·β(1)·ln d.
        let d: f64 = 256.0;
        let k = 6.0 * d.ln();
        assert!((2.0 * l * k - 2.0 * beta(1.0).unwrap() * d.ln()).abs() < 1e-12);
    }

    #[test]
    fn chernoff_special_cases() {
        assert_eq!(chernoff_tail(0.0, 1.0).unwrap(), 1.0);
        for mu in [0.0, 0.3, 2.0, 17.0] {
            let v = chernoff_tail_ratio(mu, std::f64::consts::E).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert!(chernoff_tail(-1.0, 1.0).is_err());
        assert!(chernoff_tail(1.0, 0.0).is_err());
        assert!(chernoff_tail_ratio(1.0, 1.0).is_err());
    }

    #[test]
    fn chernoff_at_scaled_mean() {
        // exp(−β(1)·λk) with λ = β(1)/6 is exp(−β(1)²·k/6), which is weaker than exp(−k/6).
        let k = 6.0 * 256f64.ln();
        let v = chernoff_tail(lambda() * k, 1.0).unwrap();
        let b1 = beta(1.0).unwrap();
        assert!((v - (-b1 * b1 * k / 6.0).exp()).abs() < 1e-12);
        assert!(v > (-k / 6.0).exp());
    }

    #[test]
    fn rectangle_bound_small() {
        assert!(rectangle_overload_bound() <= 0.07);
    }
}
