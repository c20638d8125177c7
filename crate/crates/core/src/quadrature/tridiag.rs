//! Symmetric tridiagonal eigensolver (implicit-shift QL) that tracks only
//! the first component of each eigenvector, which is all Golub–Welsch needs.

const MAX_SWEEPS: usize = 60;

/// Eigenvalues (ascending) and the first eigenvector components of the
/// symmetric tridiagonal matrix with diagonal `diag` and off-diagonal
/// `offdiag[1..]` (`offdiag[i]` couples rows `i − 1` and `i`).
///
/// Returns `None` when an eigenvalue fails to converge within the sweep
/// budget.
pub fn eigen_first_components(diag: &[f64], offdiag: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    assert_eq!(
        offdiag.len(),
        n,
        "offdiag must have the same length as diag"
    );
    let mut d = diag.to_vec();
    // e[i] couples d[i] and d[i + 1]; e[n - 1] is workspace.
    let mut e: Vec<f64> = (0..n)
        .map(|i| if i + 1 < n { offdiag[i + 1] } else { 0.0 })
        .collect();
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return None;
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;

            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    Some((
        order.iter().map(|&i| d[i]).collect(),
        order.iter().map(|&i| z[i]).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn dense_oracle(diag: &[f64], off: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = diag.len();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = diag[i];
            if i > 0 {
                m[(i, i - 1)] = off[i];
                m[(i - 1, i)] = off[i];
            }
        }
        let eig = SymmetricEigen::new(m);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|j| (eig.eigenvalues[j], eig.eigenvectors[(0, j)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.into_iter().unzip()
    }

    #[test]
    fn matches_dense_eigensolver() {
        let diag = [0.3, -1.2, 2.5, 0.0, 1.1, -0.4, 0.9];
        let off = [0.0, 0.7, 0.05, 1.3, 0.2, 0.8, 0.6];
        let (vals, first) = eigen_first_components(&diag, &off).unwrap();
        let (ref_vals, ref_sq) = dense_oracle(&diag, &off);
        for j in 0..diag.len() {
            assert!((vals[j] - ref_vals[j]).abs() < 1e-13);
            assert!((first[j].powi(2) - ref_sq[j]).abs() < 1e-13);
        }
        let norm: f64 = first.iter().map(|z| z * z).sum();
        assert!((norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_matrix_is_returned_sorted() {
        let (vals, first) = eigen_first_components(&[3.0, 1.0, 2.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(vals, vec![1.0, 2.0, 3.0]);
        assert_eq!(
            first.iter().map(|z| z.abs()).collect::<Vec<_>>(),
            vec![0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn single_entry() {
        let (vals, first) = eigen_first_components(&[0.25], &[0.0]).unwrap();
        assert_eq!(vals, vec![0.25]);
        assert_eq!(first, vec![1.0]);
    }

    #[test]
    fn legendre_two_point_nodes() {
        let b = 1.0 / 3f64.sqrt();
        let (vals, first) = eigen_first_components(&[0.0, 0.0], &[0.0, b]).unwrap();
        assert!((vals[0] + b).abs() < 1e-15 && (vals[1] - b).abs() < 1e-15);
        assert!((first[0].powi(2) - 0.5).abs() < 1e-15);
    }
}
