use crate::error::{Error, Result};

/// Largest dimension accepted by [`dense_symmetric_eigenvalues`].
pub const EIGEN_CAP: usize = 500;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a dense symmetric matrix, sorted ascending.
pub fn dense_symmetric_eigenvalues(m: &[Vec<f64>]) -> Result<Vec<f64>> {
    if m.len() > EIGEN_CAP {
        return Err(Error::SpectrumCap {
            dim: m.len(),
            cap: EIGEN_CAP,
        });
    }
    Ok(dense_symmetric_eigen(m, false)?.0)
}

/// Cyclic Jacobi eigendecomposition.
///
/// Returns ascending eigenvalues and, when requested, the matching
/// eigenvectors as columns (`vectors[i][k]` is component `i` of vector `k`).
pub fn dense_symmetric_eigen(m: &[Vec<f64>], vectors: bool) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = m.len();
    if let Some(row) = m.iter().find(|r| r.len() != n) {
        return Err(Error::dim("eigensolver row", n, row.len()));
    }
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NaN("eigensolver input".into()));
    }
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut v: Vec<Vec<f64>> = if vectors {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect()
    } else {
        Vec::new()
    };
    let norm = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| 2.0 * a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * norm || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                if vectors {
                    for row in v.iter_mut() {
                        let (vp, vq) = (row[p], row[q]);
                        row[p] = c * vp - s * vq;
                        row[q] = s * vp + c * vq;
                    }
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = idx.iter().map(|&i| a[i][i]).collect();
    if vectors {
        v = v
            .iter()
            .map(|row| idx.iter().map(|&k| row[k]).collect())
            .collect();
    }
    Ok((values, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let d = vec![
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ];
        assert_eq!(
            dense_symmetric_eigenvalues(&d).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        let s = dense_symmetric_eigenvalues(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!((s[0] + 1.0).abs() < 1e-15 && (s[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cap_is_enforced() {
        let big = vec![vec![0.0; EIGEN_CAP + 1]; EIGEN_CAP + 1];
        assert!(matches!(
            dense_symmetric_eigenvalues(&big),
            Err(Error::SpectrumCap { .. })
        ));
    }

    #[test]
    fn vectors_reconstruct() {
        let m = vec![
            vec![2.0, -1.0, 0.5],
            vec![-1.0, 0.0, 3.0],
            vec![0.5, 3.0, 1.0],
        ];
        let (w, v) = dense_symmetric_eigen(&m, true).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| v[i][k] * w[k] * v[j][k]).sum();
                assert!((r - m[i][j]).abs() < 1e-13);
            }
        }
    }
}
