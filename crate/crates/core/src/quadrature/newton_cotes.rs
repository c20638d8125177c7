use super::velocity_set::{RuleKind, VelocitySet};
use super::{invalid, QuadratureError};

/// Composite-Simpson tensor grid of `m × m` nodes on `[−U, U]²`.
/// Node order is x-major: `k = i·m + j` with `ξ = (x_i, y_j)`.
pub fn newton_cotes_set(m: usize, half_width: f64) -> Result<VelocitySet, QuadratureError> {
    if m < 3 || m % 2 == 0 {
        return Err(invalid(
            "M",
            m as f64,
            "composite Simpson needs an odd count >= 3",
        ));
    }
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(invalid(
            "U",
            half_width,
            "half-width must be finite and > 0",
        ));
    }
    let h = 2.0 * half_width / (m - 1) as f64;
    let coords: Vec<f64> = (0..m).map(|i| -half_width + h * i as f64).collect();
    let weights: Vec<f64> = (0..m)
        .map(|i| {
            let c = if i == 0 || i == m - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect();

    let mut xi_x = Vec::with_capacity(m * m);
    let mut xi_y = Vec::with_capacity(m * m);
    let mut w = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            xi_x.push(coords[i]);
            xi_y.push(coords[j]);
            w.push(weights[i] * weights[j]);
        }
    }
    Ok(VelocitySet::from_parts(
        RuleKind::NewtonCotes {
            points_per_axis: m,
            half_width,
        },
        xi_x,
        xi_y,
        w.clone(),
        w,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn node_count() {
        assert_eq!(newton_cotes_set(201, 4.0).unwrap().len(), 40401);
        assert_eq!(newton_cotes_set(161, 4.0).unwrap().len(), 25921);
    }

    #[test]
    fn constants_are_exact() {
        let vs = newton_cotes_set(3, 1.0).unwrap();
        assert!((vs.integrate_plain(|_, _| 1.0).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian() {
        let vs = newton_cotes_set(101, 6.0).unwrap();
        let v = vs.integrate_plain(|x, y| (-(x * x + y * y)).exp()).unwrap();
        assert!((v - PI).abs() < 1e-8, "{}", v - PI);
    }

    #[test]
    fn raw_equals_effective() {
        let vs = newton_cotes_set(7, 2.0).unwrap();
        assert_eq!(vs.raw_weights(), vs.effective_weights());
        assert!(vs.params().is_none());
    }

    #[test]
    fn even_count_rejected() {
        assert!(newton_cotes_set(200, 4.0).is_err());
        assert!(newton_cotes_set(1, 4.0).is_err());
        assert!(newton_cotes_set(5, 0.0).is_err());
    }
}
