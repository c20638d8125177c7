use std::f64::consts::FRAC_PI_2;

use super::jacobi::{jacobi_recurrence, RecurrenceCoeffs};
use super::tridiag::eigen_first_components;
use super::weight::WeightParams;
use super::{invalid, QuadratureError, RADIAL_NODE_LIMIT};

/// Gauss–Jacobi rule for the weight `(1−r)^α` on `[0, 1]`, together with the
/// mapped radii `R_i = sqrt(λT₀ tan(π r_i / 2))`. Nodes ascend.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialRule {
    pub params: WeightParams,
    pub nodes: Vec<f64>,
    pub radii: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `Σ w_r,i · f(r_i)`, approximating `∫₀¹ (1−r)^α f(r) dr`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&r, &w)| w * f(r))
            .sum()
    }
}

/// `R(r) = sqrt(λT₀ tan(πr/2))` for `r ∈ (0, 1)`.
pub fn radial_map(r: f64, lambda: f64, t0: f64) -> Result<f64, QuadratureError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(QuadratureError::Domain(r));
    }
    if r > RADIAL_NODE_LIMIT {
        return Err(QuadratureError::NodeAtBoundary(r));
    }
    if !(lambda > 0.0 && t0 > 0.0) {
        return Err(invalid("lambda*T0", lambda * t0, "must be > 0"));
    }
    Ok((lambda * t0 * (FRAC_PI_2 * r).tan()).sqrt())
}

/// Golub–Welsch: nodes are the eigenvalues of the Jacobi matrix, weights the
/// squared first eigenvector components times the zeroth moment.
///
/// The matrix is assembled directly on `[0, 1]` (`(J + I)/2`), so nodes close
/// to `r = 0` do not lose digits to the `(e + 1)/2` shift. The zeroth moment
/// `Γ(α+1)/Γ(α+2)` is used in its exact form `1/(α+1)`.
pub fn golub_welsch(
    coeffs: &RecurrenceCoeffs,
    p: &WeightParams,
) -> Result<RadialRule, QuadratureError> {
    if coeffs.beta != 0.0 {
        return Err(invalid(
            "beta",
            coeffs.beta,
            "radial rule requires beta = 0",
        ));
    }
    if coeffs.alpha != p.alpha() {
        return Err(invalid(
            "alpha",
            coeffs.alpha,
            "recurrence alpha differs from weight alpha",
        ));
    }
    let n = coeffs.order();
    let diag: Vec<f64> = coeffs.diag_plus_one.iter().map(|a| 0.5 * a).collect();
    let off: Vec<f64> = coeffs.offdiag.iter().map(|b| 0.5 * b).collect();
    let (nodes, first) =
        eigen_first_components(&diag, &off).ok_or(QuadratureError::Eigensolver {
            order: n,
            alpha: p.alpha(),
        })?;

    let zeroth_moment = 1.0 / (p.alpha() + 1.0);
    let weights: Vec<f64> = first.iter().map(|v| v * v * zeroth_moment).collect();

    let radii = nodes
        .iter()
        .map(|&r| radial_map(r, p.lambda(), p.t0()))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(RadialRule {
        params: *p,
        nodes,
        radii,
        weights,
    })
}

/// Recurrence plus Golub–Welsch for `n` radial nodes.
pub fn radial_rule(n: usize, p: &WeightParams) -> Result<RadialRule, QuadratureError> {
    let coeffs = jacobi_recurrence(n, p.alpha(), 0.0)?;
    golub_welsch(&coeffs, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// ∫₀¹ r^m (1−r)^α dr = B(m+1, α+1) = m! / ((α+1)(α+2)…(α+m+1)).
    fn beta_moment(m: u32, alpha: f64) -> f64 {
        (0..=m).fold(1.0, |acc, j| {
            let num = if j == 0 { 1.0 } else { j as f64 };
            acc * num / (alpha + 1.0 + j as f64)
        })
    }

    #[test]
    fn one_point_rules() {
        let r = radial_rule(1, &WeightParams::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert_relative_eq!(r.nodes[0], 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(r.weights[0], 0.5, max_relative = 1e-15);
    }

    #[test]
    fn unit_weight_midpoint() {
        // alpha must be > 0 for WeightParams; the alpha = 0 case goes through
        // the recurrence directly.
        let c = jacobi_recurrence(1, 0.0, 0.0).unwrap();
        let (nodes, first) = eigen_first_components(&[0.5 * c.diag_plus_one[0]], &[0.0]).unwrap();
        assert_eq!(nodes[0], 0.5);
        assert_eq!(first[0].powi(2), 1.0);
    }

    #[test]
    fn normalization_and_exactness() {
        for &alpha in &[0.5, 1.0, FRAC_PI_2 * 5.0, FRAC_PI_2 * 500.0] {
            let p = WeightParams::new(alpha, 5.0, 1.0).unwrap();
            for n in 1..=10usize {
                let rule = radial_rule(n, &p).unwrap();
                let total: f64 = rule.weights.iter().sum();
                assert_relative_eq!(total, 1.0 / (alpha + 1.0), max_relative = 1e-13);
                for m in 0..(2 * n as u32) {
                    let exact = beta_moment(m, alpha);
                    let got = rule.integrate(|r| r.powi(m as i32));
                    assert!(
                        ((got - exact) / exact).abs() < 1e-11,
                        "n={n} alpha={alpha} m={m}: {got} vs {exact}"
                    );
                }
                let m = 2 * n as u32;
                let exact = beta_moment(m, alpha);
                let got = rule.integrate(|r| r.powi(m as i32));
                assert!(
                    ((got - exact) / exact).abs() > 1e-13,
                    "degree 2n should not be exact"
                );
            }
        }
    }

    #[test]
    fn nodes_confined_and_increasing() {
        let p = WeightParams::maxwellian_matched(5.0, 1.0).unwrap();
        let rule = radial_rule(20, &p).unwrap();
        assert!(rule.nodes.iter().all(|&r| r > 0.0 && r < 1.0));
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(rule.radii.windows(2).all(|w| w[0] < w[1]));
        assert!(rule.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn radial_map_values() {
        assert_relative_eq!(
            radial_map(0.5, 1.0, 1.0).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            radial_map(2.0 / 3.0, 5.0, 1.0).unwrap(),
            2.942830956,
            max_relative = 1e-9
        );
        assert!(radial_map(1e-12, 1.0, 1.0).unwrap() < 1e-5);
        assert!(matches!(
            radial_map(0.0, 1.0, 1.0),
            Err(QuadratureError::Domain(_))
        ));
        assert!(matches!(
            radial_map(1.2, 1.0, 1.0),
            Err(QuadratureError::Domain(_))
        ));
        assert!(matches!(
            radial_map(1.0 - 1e-16, 1.0, 1.0),
            Err(QuadratureError::NodeAtBoundary(_))
        ));
    }

    #[test]
    fn mismatched_alpha_rejected() {
        let c = jacobi_recurrence(3, 2.0, 0.0).unwrap();
        let p = WeightParams::new(3.0, 1.0, 1.0).unwrap();
        assert!(golub_welsch(&c, &p).is_err());
        let c = jacobi_recurrence(3, 3.0, 0.5).unwrap();
        assert!(golub_welsch(&c, &p).is_err());
    }
}
