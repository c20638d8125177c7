use std::f64::consts::PI;
use std::io::{self, Write};

use super::profile::{extract_centerline, LineKind, MacroField};
use super::{CaseError, CavityCase};

/// Steady conduction temperature in the unit square with the lid `y = 1`
/// at `t_hot` and the other walls at `t_cold`, by the sine series
///
/// `T = T_c + ΔT Σ_k (2/(kπ)) (1 − cos kπ) sin(kπx) sinh(kπy)/sinh(kπ)`
///
/// truncated after `terms` terms. The sinh ratio is evaluated as
/// `e^{kπ(y−1)} (1 − e^{−2kπy}) / (1 − e^{−2kπ})`, which cannot overflow.
/// Near the lid the truncated series shows Gibbs overshoot unless
/// `terms · (1 − y) ≳ 1`.
pub fn laplace_oracle(x: f64, y: f64, t_hot: f64, t_cold: f64, terms: usize) -> f64 {
    let mut sum = 0.0;
    for k in (1..=terms).step_by(2) {
        // 1 − cos kπ is 2 for odd k and 0 for even k.
        let a = k as f64 * PI;
        let ratio = (a * (y - 1.0)).exp() * -(-2.0 * a * y).exp_m1() / -(-2.0 * a).exp_m1();
        sum += 4.0 / a * (a * x).sin() * ratio;
    }
    t_cold + (t_hot - t_cold) * sum
}

/// Centerline temperatures of a cavity run against [`laplace_oracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub terms: usize,
    /// `(line, x, y, T, T_oracle)` per sample.
    pub samples: Vec<(LineKind, f64, f64, f64, f64)>,
    pub max_abs_error: f64,
    /// Max error divided by `T_h − T_c`.
    pub max_relative_error: f64,
}

pub fn oracle_report(
    field: &MacroField,
    cavity: &CavityCase,
    terms: usize,
) -> Result<OracleReport, CaseError> {
    let mut samples = Vec::new();
    for line in [LineKind::Horizontal, LineKind::Vertical] {
        let p = extract_centerline(field, line)?;
        for (i, &[x, y]) in p.points.iter().enumerate() {
            let exact = laplace_oracle(
                x / cavity.length,
                y / cavity.length,
                cavity.t_hot,
                cavity.t_cold,
                terms,
            );
            samples.push((line, x, y, p.temperature[i], exact));
        }
    }
    let max_abs_error = samples
        .iter()
        .map(|s| (s.3 - s.4).abs())
        .fold(0.0, f64::max);
    Ok(OracleReport {
        terms,
        max_abs_error,
        max_relative_error: max_abs_error / (cavity.t_hot - cavity.t_cold).abs(),
        samples,
    })
}

impl OracleReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "line,x,y,T,T_oracle,error")?;
        for (line, x, y, t, exact) in &self.samples {
            writeln!(
                out,
                "{},{x:.16e},{y:.16e},{t:.16e},{exact:.16e},{:.16e}",
                line.label(),
                t - exact
            )?;
        }
        Ok(())
    }
}
