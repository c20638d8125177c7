use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};

use serde::{Deserialize, Serialize};

use super::{invalid, QuadratureError};

/// Tunable parameters `(α, λ, T₀)` of the ATGJ weight function.
///
/// `α` shapes the tail, `λ` sets the radial scale together with the
/// reference temperature `T₀`. With `α = (π/2)λ` the weight tends to the
/// Maxwellian `exp(−|ξ|²/T₀)` as `λ → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    alpha: f64,
    lambda: f64,
    t0: f64,
}

impl WeightParams {
    pub fn new(alpha: f64, lambda: f64, t0: f64) -> Result<Self, QuadratureError> {
        for (name, value) in [("alpha", alpha), ("lambda", lambda), ("T0", t0)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(name, value, "must be finite and > 0"));
            }
        }
        Ok(Self { alpha, lambda, t0 })
    }

    /// Parameters on the Maxwellian-matched line `α = (π/2)λ`.
    pub fn maxwellian_matched(lambda: f64, t0: f64) -> Result<Self, QuadratureError> {
        Self::new(FRAC_PI_2 * lambda, lambda, t0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// True when `α = (π/2)λ` to a relative tolerance of 1e-12.
    pub fn is_maxwellian_matched(&self) -> bool {
        let target = FRAC_PI_2 * self.lambda;
        (self.alpha - target).abs() <= 1e-12 * target
    }

    /// Radial length scale `λT₀`.
    pub fn scale(&self) -> f64 {
        self.lambda * self.t0
    }

    /// Closed-form plane integral of the weight, `π²λT₀ / (2(α+1))`.
    pub fn total_mass(&self) -> f64 {
        std::f64::consts::PI.powi(2) * self.scale() / (2.0 * (self.alpha + 1.0))
    }

    /// Weight as a function of the squared speed `|ξ|²`.
    pub fn weight_at_speed_sq(&self, speed_sq: f64) -> f64 {
        let chi = speed_sq / self.scale();
        // ln(1 − (2/π)atan χ) through ln_1p keeps the large-α powers accurate
        // for small χ, where the base is within a few ulps of one.
        let log_base = (-FRAC_2_PI * chi.atan()).ln_1p();
        (self.alpha * log_base).exp() / (1.0 + chi * chi)
    }

    pub fn weight(&self, xi_x: f64, xi_y: f64) -> f64 {
        self.weight_at_speed_sq(xi_x * xi_x + xi_y * xi_y)
    }
}

/// `ω_{α,λ}(ξ_x, ξ_y)`.
pub fn weight_function(xi_x: f64, xi_y: f64, p: &WeightParams) -> f64 {
    p.weight(xi_x, xi_y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn origin_is_one() {
        for p in [
            WeightParams::new(0.5, 1.0, 1.0).unwrap(),
            WeightParams::maxwellian_matched(500.0, 1.0).unwrap(),
            WeightParams::new(20.0, 40.0 / std::f64::consts::PI + 20.0, 1.0).unwrap(),
        ] {
            assert_eq!(weight_function(0.0, 0.0, &p), 1.0);
        }
    }

    #[test]
    fn unit_chi_value() {
        // chi = 1: atan(1) = pi/4, so the base is 1/2 and the denominator 2.
        let p = WeightParams::new(3.0, 5.0, 1.0).unwrap();
        let xi = 5.0f64.sqrt();
        assert_relative_eq!(
            p.weight(xi, 0.0),
            0.5f64.powi(3) / 2.0,
            max_relative = 1e-14
        );
        let p = WeightParams::new(7.3, 2.0, 1.5).unwrap();
        let r = 3.0f64.sqrt();
        assert_relative_eq!(
            p.weight(r / 2f64.sqrt(), r / 2f64.sqrt()),
            0.5f64.powf(7.3) / 2.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn matched_large_lambda_near_maxwellian() {
        let p = WeightParams::maxwellian_matched(500.0, 1.0).unwrap();
        let w = p.weight(1.0, 0.0);
        let e = (-1.0f64).exp();
        assert!(((w - e) / e).abs() < 2e-3, "{w} vs {e}");
    }

    #[test]
    fn matched_flag() {
        assert!(WeightParams::maxwellian_matched(5.0, 1.0)
            .unwrap()
            .is_maxwellian_matched());
        assert!(
            !WeightParams::new(20.0, 40.0 / std::f64::consts::PI + 20.0, 1.0)
                .unwrap()
                .is_maxwellian_matched()
        );
    }

    #[test]
    fn rejects_non_positive() {
        assert!(WeightParams::new(0.0, 1.0, 1.0).is_err());
        assert!(WeightParams::new(1.0, -1.0, 1.0).is_err());
        assert!(WeightParams::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn offset_alpha_sides_of_the_gaussian() {
        // alpha above the matched line sits inside the Maxwellian at moderate
        // speeds, below the line it sits outside.
        let lambda = 50.0;
        let above = WeightParams::new(FRAC_PI_2 * lambda + 2.0, lambda, 1.0).unwrap();
        let below = WeightParams::new(FRAC_PI_2 * lambda - 2.0, lambda, 1.0).unwrap();
        for s in [0.5f64, 1.0, 1.5] {
            let gauss = (-s * s).exp();
            assert!(above.weight(s, 0.0) < gauss);
            assert!(below.weight(s, 0.0) > gauss);
        }
    }
}
