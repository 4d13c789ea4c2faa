//! Small dense linear algebra on row-major square matrices.

use nalgebra::{DMatrix, SymmetricEigen};

use super::TensorError;
use crate::jet::Jet3;

/// Pivots with magnitude below this are treated as singular.
pub const SINGULAR_PIVOT: f64 = 1e-12;

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn invert(n: usize, a: &[f64]) -> Result<Vec<f64>, TensorError> {
    assert_eq!(a.len(), n * n, "matrix size");
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let (p, pivot) = (col..n)
            .map(|r| (r, m[r * n + col]))
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .unwrap();
        if pivot.abs() < SINGULAR_PIVOT {
            return Err(TensorError::Singular { pivot: pivot.abs() });
        }
        if p != col {
            for k in 0..n {
                m.swap(p * n + k, col * n + k);
                inv.swap(p * n + k, col * n + k);
            }
        }
        let scale = 1.0 / pivot;
        for k in 0..n {
            m[col * n + k] *= scale;
            inv[col * n + k] *= scale;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * n + col];
            if f == 0.0 {
                continue;
            }
            for k in 0..n {
                m[r * n + k] -= f * m[col * n + k];
                inv[r * n + k] -= f * inv[col * n + k];
            }
        }
    }
    Ok(inv)
}

/// Smallest pivot magnitude met during elimination, a cheap conditioning probe.
pub fn min_pivot(n: usize, a: &[f64]) -> f64 {
    let mut m = a.to_vec();
    let mut smallest = f64::INFINITY;
    for col in 0..n {
        let (p, pivot) = (col..n)
            .map(|r| (r, m[r * n + col]))
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .unwrap();
        smallest = smallest.min(pivot.abs());
        if pivot == 0.0 {
            return 0.0;
        }
        for k in 0..n {
            m.swap(p * n + k, col * n + k);
        }
        for r in col + 1..n {
            let f = m[r * n + col] / pivot;
            for k in col..n {
                m[r * n + k] -= f * m[col * n + k];
            }
        }
    }
    smallest
}

/// Inverse of a matrix of jets.
///
/// With `M = M0 + N`, where `M0` holds the point values and `N` has no
/// constant term, `M⁻¹ = Σ_{k≤3} (−M0⁻¹ N)^k M0⁻¹` is exact through third
/// order because `N` is nilpotent in the truncated algebra.
pub fn invert_jets(n: usize, a: &[Jet3]) -> Result<Vec<Jet3>, TensorError> {
    assert_eq!(a.len(), n * n, "matrix size");
    let values: Vec<f64> = a.iter().map(|j| j.value()).collect();
    let inv0 = invert(n, &values)?;
    let proto = a[0].zero_like();
    // B = −M0⁻¹ N as jets.
    let nil: Vec<Jet3> = a
        .iter()
        .map(|j| {
            let mut c = j.clone();
            c = c - j.value();
            c
        })
        .collect();
    let inv0_j: Vec<Jet3> = inv0.iter().map(|&v| proto.constant_like(v)).collect();
    let matmul = |x: &[Jet3], y: &[Jet3]| -> Vec<Jet3> {
        let mut out = vec![proto.clone(); n * n];
        for i in 0..n {
            for k in 0..n {
                let xik = &x[i * n + k];
                if xik.coeffs().iter().all(|&c| c == 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j].add_assign_product(xik, &y[k * n + j]);
                }
            }
        }
        out
    };
    let b: Vec<Jet3> = matmul(&inv0_j, &nil).into_iter().map(|j| -j).collect();
    // inv = M0⁻¹ + B M0⁻¹ + B² M0⁻¹ + B³ M0⁻¹, evaluated by Horner.
    let mut acc = inv0_j.clone();
    for _ in 0..3 {
        let t = matmul(&b, &acc);
        acc = t
            .iter()
            .zip(&inv0_j)
            .map(|(x, y)| x + y)
            .collect();
    }
    Ok(acc)
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(n: usize, a: &[f64]) -> Vec<f64> {
    let m = DMatrix::from_row_slice(n, n, a);
    let sym = (&m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Eigenvalues of `g⁻¹ t` for symmetric `t` and positive-definite `g`,
/// ascending. `None` if `g` is not positive definite.
pub fn generalized_eigenvalues(n: usize, t: &[f64], g: &[f64]) -> Option<Vec<f64>> {
    let gm = DMatrix::from_row_slice(n, n, g);
    let chol = gm.cholesky()?;
    let l = chol.l();
    let linv = l.try_inverse()?;
    let tm = DMatrix::from_row_slice(n, n, t);
    let s = &linv * tm * linv.transpose();
    let sym = (&s + s.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    Some(ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_permuted_matrix() {
        let a = [0.0, 2.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 3.0];
        let inv = invert(3, &a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| a[i * 3 + k] * inv[k * 3 + j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_is_rejected() {
        let a = [1.0, 2.0, 2.0, 4.0];
        assert!(matches!(invert(2, &a), Err(TensorError::Singular { .. })));
    }

    #[test]
    fn jet_inverse_matches_product_identity() {
        let pts = Jet3::seed_point(&[0.2, -0.1]).unwrap();
        let (x, y) = (&pts[0], &pts[1]);
        let m = vec![
            2.0 + x * y,
            x.sin(),
            x.sin(),
            1.0 + y * y * y + x,
        ];
        let inv = invert_jets(2, &m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut s = m[0].zero_like();
                for k in 0..2 {
                    s.add_assign_product(&m[i * 2 + k], &inv[k * 2 + j]);
                }
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((s.value() - target).abs() < 1e-14);
                assert!(s.coeffs()[1..].iter().all(|c| c.abs() < 1e-13));
            }
        }
    }

    #[test]
    fn eigenvalues() {
        let ev = symmetric_eigenvalues(2, &[2.0, 1.0, 1.0, 2.0]);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
        let gev = generalized_eigenvalues(2, &[4.0, 0.0, 0.0, 9.0], &[2.0, 0.0, 0.0, 3.0]).unwrap();
        assert!((gev[0] - 2.0).abs() < 1e-12 && (gev[1] - 3.0).abs() < 1e-12);
    }
}
