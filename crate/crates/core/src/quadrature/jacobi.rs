use super::{invalid, QuadratureError};

/// Three-term recurrence coefficients of the orthonormal Jacobi polynomials
/// for the weight `(1−x)^α (1+x)^β` on `[−1, 1]`.
///
/// `diag[k]` and `offdiag[k]` are the Jacobi-matrix entries `a_k` and `b_k`
/// (`offdiag[0]` is unused and kept at zero). `diag_plus_one[k] = 1 + a_k`
/// is evaluated without the cancellation that `1 + a_k` suffers when `α` is
/// large; the radial rule builds its `[0, 1]` matrix from it.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceCoeffs {
    pub alpha: f64,
    pub beta: f64,
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub diag_plus_one: Vec<f64>,
}

impl RecurrenceCoeffs {
    pub fn order(&self) -> usize {
        self.diag.len()
    }
}

pub fn jacobi_recurrence(
    n: usize,
    alpha: f64,
    beta: f64,
) -> Result<RecurrenceCoeffs, QuadratureError> {
    if n == 0 {
        return Err(invalid("n", 0.0, "order must be >= 1"));
    }
    if !(alpha.is_finite() && alpha > -1.0) {
        return Err(invalid("alpha", alpha, "must be finite and > -1"));
    }
    if !(beta.is_finite() && beta > -1.0) {
        return Err(invalid("beta", beta, "must be finite and > -1"));
    }

    let ab = alpha + beta;
    let mut diag = Vec::with_capacity(n);
    let mut offdiag = Vec::with_capacity(n);
    let mut diag_plus_one = Vec::with_capacity(n);

    for k in 0..n {
        let kf = k as f64;
        if k == 0 {
            diag.push((beta - alpha) / (ab + 2.0));
            diag_plus_one.push((2.0 * beta + 2.0) / (ab + 2.0));
            offdiag.push(0.0);
            continue;
        }
        let s = 2.0 * kf + ab;
        let denom = s * (s + 2.0);
        diag.push((beta * beta - alpha * alpha) / denom);
        // s(s+2) + β² − α² = (s − α)(s + α) + 2s + β²
        diag_plus_one.push(((2.0 * kf + beta) * (s + alpha) + 2.0 * s + beta * beta) / denom);

        let b_sq = if k == 1 {
            // (k + α + β) cancels against (2k + α + β − 1) at k = 1.
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            let num = 4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab);
            let den = s * s * (s + 1.0) * (s - 1.0);
            num / den
        };
        offdiag.push(b_sq.sqrt());
    }

    Ok(RecurrenceCoeffs {
        alpha,
        beta,
        diag,
        offdiag,
        diag_plus_one,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn first_diagonal_entry() {
        let c = jacobi_recurrence(1, 2.0, 0.0).unwrap();
        assert_relative_eq!(c.diag[0], -0.5, max_relative = 1e-15);
        let c = jacobi_recurrence(1, 0.0, 0.0).unwrap();
        assert_eq!(c.diag[0], 0.0);
    }

    #[test]
    fn legendre_offdiagonal() {
        let c = jacobi_recurrence(2, 0.0, 0.0).unwrap();
        assert_relative_eq!(c.offdiag[1], 1.0 / 3f64.sqrt(), max_relative = 1e-15);
        // Legendre: b_k = k / sqrt(4k^2 - 1)
        let c = jacobi_recurrence(6, 0.0, 0.0).unwrap();
        for k in 1..6 {
            let kf = k as f64;
            assert_relative_eq!(
                c.offdiag[k],
                kf / (4.0 * kf * kf - 1.0).sqrt(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn shifted_diagonal_matches_direct_sum() {
        for &(alpha, beta) in &[(0.5, 0.0), (3.0, 0.0), (0.3, -0.4), (2.0, 1.5)] {
            let c = jacobi_recurrence(8, alpha, beta).unwrap();
            for k in 0..8 {
                assert_relative_eq!(c.diag_plus_one[k], 1.0 + c.diag[k], max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn shifted_diagonal_keeps_precision_for_large_alpha() {
        // For alpha = 785 the leading diagonal is 1 - 2/787.4; the shifted
        // value must be 2/(alpha + 2) to full precision.
        let alpha = std::f64::consts::FRAC_PI_2 * 500.0;
        let c = jacobi_recurrence(3, alpha, 0.0).unwrap();
        assert_relative_eq!(
            c.diag_plus_one[0],
            2.0 / (alpha + 2.0),
            max_relative = 1e-15
        );
    }

    #[test]
    fn alpha_plus_beta_minus_one_is_finite() {
        let c = jacobi_recurrence(4, -0.5, -0.5).unwrap();
        assert!(c.offdiag.iter().all(|b| b.is_finite()));
        // Chebyshev first kind: b_1 = 1/sqrt(2), b_k = 1/2.
        assert_relative_eq!(c.offdiag[1], 0.5f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(c.offdiag[2], 0.5, max_relative = 1e-14);
    }

    #[test]
    fn positive_offdiagonal() {
        let c = jacobi_recurrence(12, 7.85, 0.0).unwrap();
        assert!(c.offdiag[1..].iter().all(|&b| b > 0.0));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(jacobi_recurrence(0, 1.0, 0.0).is_err());
        assert!(jacobi_recurrence(3, -1.0, 0.0).is_err());
        assert!(jacobi_recurrence(3, 1.0, -2.0).is_err());
    }
}
