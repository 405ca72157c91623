use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{dense_symmetric_eigen, SparseSymmetric};
use crate::scalar::Real;

#[derive(Debug, Clone)]
enum Block<T> {
    Diagonal {
        start: usize,
        inv: Vec<T>,
    },
    Dense {
        start: usize,
        size: usize,
        inv: Vec<T>,
    },
    Identity,
}

/// Inverse of the block diagonal of `|M|`, where `|·|` is the matrix
/// absolute value `V|Λ|Vᵀ` of each diagonal block.
#[derive(Debug, Clone)]
pub struct BlockJacobi<T> {
    dim: usize,
    blocks: Vec<Block<T>>,
    /// One entry per block that had to be replaced by the identity.
    pub warnings: Vec<String>,
}

pub fn block_jacobi_precond<T: Real>(
    m: &SparseSymmetric<T>,
    blocks: &[Range<usize>],
) -> Result<BlockJacobi<T>> {
    let mut next = 0;
    for b in blocks {
        if b.start != next || b.end < b.start {
            return Err(Error::Config(format!(
                "block partition must be contiguous, found {b:?} after index {next}"
            )));
        }
        next = b.end;
    }
    if next != m.dim {
        return Err(Error::dim("block partition", m.dim, next));
    }
    let mut out = BlockJacobi {
        dim: m.dim,
        blocks: Vec::with_capacity(blocks.len()),
        warnings: Vec::new(),
    };
    for (k, range) in blocks.iter().enumerate() {
        let size = range.len();
        if size == 0 {
            continue;
        }
        let start = range.start;
        let mut dense = vec![vec![0.0f64; size]; size];
        let mut diagonal = true;
        for j in range.clone() {
            for (i, a) in m.col(j) {
                if i < range.end {
                    let a = a.f64();
                    dense[i - start][j - start] = a;
                    dense[j - start][i - start] = a;
                    if i != j && a != 0.0 {
                        diagonal = false;
                    }
                }
            }
        }
        let block = if diagonal {
            let d: Vec<f64> = (0..size).map(|i| dense[i][i].abs()).collect();
            let inv: Vec<T> = d.iter().map(|&v| T::of(1.0 / v)).collect();
            if d.iter().all(|&v| v > 0.0) && inv.iter().all(|v| v.is_finite()) {
                Some(Block::Diagonal { start, inv })
            } else {
                None
            }
        } else {
            let (w, vecs) = dense_symmetric_eigen(&dense, true)?;
            let a: Vec<f64> = w.iter().map(|v| v.abs()).collect();
            let max = a.iter().cloned().fold(0.0, f64::max);
            let min = a.iter().cloned().fold(f64::INFINITY, f64::min);
            if max > 0.0 && min > size as f64 * f64::EPSILON * max {
                let mut inv = vec![T::zero(); size * size];
                for i in 0..size {
                    for j in 0..size {
                        let s: f64 = (0..size).map(|l| vecs[i][l] * vecs[j][l] / a[l]).sum();
                        inv[i * size + j] = T::of(s);
                    }
                }
                Some(Block::Dense { start, size, inv })
            } else {
                None
            }
        };
        match block {
            Some(b) => out.blocks.push(b),
            None => {
                let msg = format!("block {k} ({range:?}) is singular; replaced by identity");
                log::debug!("{msg}");
                out.warnings.push(msg);
                out.blocks.push(Block::Identity);
            }
        }
    }
    Ok(out)
}

impl<T: Real> BlockJacobi<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `y = P⁻¹ x`.
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        y.copy_from_slice(x);
        for b in &self.blocks {
            match b {
                Block::Diagonal { start, inv } => {
                    for (k, s) in inv.iter().enumerate() {
                        y[start + k] = x[start + k] * *s;
                    }
                }
                Block::Dense { start, size, inv } => {
                    for i in 0..*size {
                        let row = &inv[i * size..(i + 1) * size];
                        y[start + i] = row
                            .iter()
                            .zip(&x[*start..start + size])
                            .fold(T::zero(), |acc, (a, b)| acc + *a * *b);
                    }
                }
                Block::Identity => {}
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{minres, MinresOptions};

    #[test]
    fn diagonal_blocks_are_exact() {
        let m = SparseSymmetric::<f64>::from_dense(&[vec![4.0, 0.0], vec![0.0, -2.0]]);
        let p = block_jacobi_precond(&m, &[0..1, 1..2]).unwrap();
        let mut y = [0.0; 2];
        p.apply(&[1.0, 1.0], &mut y);
        assert_eq!(y, [0.25, 0.5]);
        let (x, rep) = minres(
            |a: &[f64], b: &mut [f64]| b.copy_from_slice(&m.mul_vec(a)),
            &[4.0, 2.0],
            |a: &[f64], b: &mut [f64]| p.apply(a, b),
            &MinresOptions::default(),
        )
        .unwrap();
        // Preconditioned spectrum {1, −1}.
        assert_eq!(rep.iterations, 2);
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_block_becomes_identity() {
        let m = SparseSymmetric::<f64>::from_dense(&[vec![4.0, 0.0], vec![0.0, 0.0]]);
        let p = block_jacobi_precond(&m, &[0..1, 1..2]).unwrap();
        assert_eq!(p.warnings.len(), 1);
        let mut y = [0.0; 2];
        p.apply(&[1.0, 3.0], &mut y);
        assert_eq!(y, [0.25, 3.0]);
    }

    #[test]
    fn dense_block_uses_absolute_value() {
        let m = SparseSymmetric::<f64>::from_dense(&[vec![0.0, 2.0], vec![2.0, 0.0]]);
        let p = block_jacobi_precond(&m, &[0..2]).unwrap();
        let mut y = [0.0; 2];
        p.apply(&[1.0, 0.0], &mut y);
        assert!((y[0] - 0.5).abs() < 1e-15 && y[1].abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_partition() {
        let m = SparseSymmetric::<f64>::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(block_jacobi_precond(&m, &[0..1]).is_err());
        assert!(block_jacobi_precond(&m, &[1..2, 0..1]).is_err());
    }
}
