//! Quaternion multiplication matrices on `ℝ⁴ ≅ ℍ` (basis `1, e₁, e₂, e₃`).

/// `ε_{abc}` for indices in `0..3`.
pub fn levi_civita(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Hamilton product.
pub fn qmul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

fn basis(n: usize) -> [f64; 4] {
    let mut e = [0.0; 4];
    e[n] = 1.0;
    e
}

/// Matrix of `x ↦ e_{a+1} x`, as `M[m][n]` with `(e x)_m = Σ_n M[m][n] x_n`.
pub fn left_mul(a: usize) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for n in 0..4 {
        let col = qmul(basis(a + 1), basis(n));
        for (row, v) in col.iter().enumerate() {
            m[row][n] = *v;
        }
    }
    m
}

/// Matrix of `x ↦ x e_{a+1}`.
pub fn right_mul(a: usize) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for n in 0..4 {
        let col = qmul(basis(n), basis(a + 1));
        for (row, v) in col.iter().enumerate() {
            m[row][n] = *v;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matmul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
        let mut c = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        c
    }

    #[test]
    fn imaginary_units_square_to_minus_one() {
        for a in 0..3 {
            for m in [left_mul(a), right_mul(a)] {
                let sq = matmul(&m, &m);
                for (i, row) in sq.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        assert_eq!(*v, if i == j { -1.0 } else { 0.0 });
                    }
                }
            }
        }
    }

    #[test]
    fn left_and_right_multiplications_commute() {
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(matmul(&left_mul(a), &right_mul(b)), matmul(&right_mul(b), &left_mul(a)));
            }
        }
    }
}
