//! Small dense linear algebra, generic over [`Scalar`] so that the same
//! elimination code serves floats and exact rationals.

use crate::scalar::{one, zero, Scalar};

pub type Mat4<T> = [[T; 4]; 4];

pub fn mat4_from_fn<T>(mut f: impl FnMut(usize, usize) -> T) -> Mat4<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| f(i, j)))
}

pub fn identity<T: Scalar>() -> Mat4<T> {
    mat4_from_fn(|i, j| if i == j { one() } else { zero() })
}

pub fn transpose<T: Scalar>(m: &Mat4<T>) -> Mat4<T> {
    mat4_from_fn(|i, j| m[j][i].clone())
}

pub fn mat_mul<T: Scalar>(a: &Mat4<T>, b: &Mat4<T>) -> Mat4<T> {
    mat4_from_fn(|i, j| (0..4).fold(zero(), |acc: T, k| acc + a[i][k].clone() * b[k][j].clone()))
}

pub fn mat_vec<T: Scalar>(a: &Mat4<T>, v: &[T; 4]) -> [T; 4] {
    std::array::from_fn(|i| (0..4).fold(zero(), |acc: T, k| acc + a[i][k].clone() * v[k].clone()))
}

pub fn max_abs<T: Scalar>(m: &Mat4<T>) -> f64 {
    m.iter().flatten().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
}

/// Symmetric bilinear form value `x^T m y`.
pub fn bilinear<T: Scalar>(m: &Mat4<T>, x: &[T; 4], y: &[T; 4]) -> T {
    let my = mat_vec(m, y);
    (0..4).fold(zero(), |acc: T, i| acc + x[i].clone() * my[i].clone())
}

fn pivot_row<T: Scalar>(rows: &[Vec<T>], col: usize, from: usize) -> Option<usize> {
    let mut best: Option<usize> = None;
    for r in from..rows.len() {
        if rows[r][col].is_zero() {
            continue;
        }
        match best {
            Some(b) if rows[b][col].abs() >= rows[r][col].abs() => {}
            _ => best = Some(r),
        }
    }
    best
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det<T: Scalar>(m: &Mat4<T>) -> T {
    let mut rows: Vec<Vec<T>> = m.iter().map(|r| r.to_vec()).collect();
    let mut d: T = one();
    for col in 0..4 {
        let Some(p) = pivot_row(&rows, col, col) else {
            return zero();
        };
        if p != col {
            rows.swap(p, col);
            d = -d;
        }
        let pivot = rows[col][col].clone();
        d = d * pivot.clone();
        for r in col + 1..4 {
            let factor = rows[r][col].clone() / pivot.clone();
            if factor.is_zero() {
                continue;
            }
            for c in col..4 {
                let v = rows[col][c].clone() * factor.clone();
                rows[r][c] = rows[r][c].clone() - v;
            }
        }
    }
    d
}

/// Inverse by Gauss-Jordan elimination; `None` when the matrix is singular
/// (exactly, or below `1e-300` pivot magnitude for floats).
pub fn inverse<T: Scalar>(m: &Mat4<T>) -> Option<Mat4<T>> {
    let mut rows: Vec<Vec<T>> = (0..4)
        .map(|i| {
            let mut r = m[i].to_vec();
            r.extend((0..4).map(|j| if i == j { one() } else { zero() }));
            r
        })
        .collect();
    for col in 0..4 {
        let p = pivot_row(&rows, col, col)?;
        if rows[p][col].to_f64().abs() < 1e-300 && !rows[p][col].is_negligible() {
            return None;
        }
        rows.swap(p, col);
        let pivot = rows[col][col].clone();
        for c in 0..8 {
            rows[col][c] = rows[col][c].clone() / pivot.clone();
        }
        for r in 0..4 {
            if r == col || rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col].clone();
            for c in 0..8 {
                let v = rows[col][c].clone() * factor.clone();
                rows[r][c] = rows[r][c].clone() - v;
            }
        }
    }
    Some(mat4_from_fn(|i, j| rows[i][j + 4].clone()))
}

/// Reduced row echelon form in place; returns the pivot columns.
///
/// Entries whose magnitude is negligible (see [`Scalar::is_negligible`])
/// are treated as zero, which makes the float version rank-revealing at
/// roughly `1e-12` relative to unit-scale inputs.
pub fn rref<T: Scalar>(rows: &mut [Vec<T>]) -> Vec<usize> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n_cols {
        if r == n_rows {
            break;
        }
        let Some(p) = pivot_row(rows, col, r) else {
            continue;
        };
        if rows[p][col].is_negligible() {
            for row in rows.iter_mut().skip(r) {
                row[col] = zero();
            }
            continue;
        }
        rows.swap(p, r);
        let pivot = rows[r][col].clone();
        for c in 0..n_cols {
            rows[r][c] = rows[r][c].clone() / pivot.clone();
        }
        for i in 0..n_rows {
            if i == r || rows[i][col].is_zero() {
                continue;
            }
            let factor = rows[i][col].clone();
            for c in 0..n_cols {
                let v = rows[r][c].clone() * factor.clone();
                rows[i][c] = rows[i][c].clone() - v;
            }
            rows[i][col] = zero();
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

/// Basis of the null space of a `rows x n` matrix, one vector per free column.
pub fn null_space<T: Scalar>(matrix: &[Vec<T>], n: usize) -> Vec<Vec<T>> {
    let mut rows: Vec<Vec<T>> = matrix.to_vec();
    let pivots = rref(&mut rows);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![zero::<T>(); n];
            v[f] = one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -rows[r][f].clone();
            }
            v
        })
        .collect()
}

/// Solves `a x = b` for square `a` by Gaussian elimination with partial
/// pivoting. Returns `None` for a singular system.
pub fn solve<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let n = b.len();
    let mut rows: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for col in 0..n {
        let p = pivot_row(&rows, col, col)?;
        rows.swap(p, col);
        let pivot = rows[col][col].clone();
        for r in col + 1..n {
            let factor = rows[r][col].clone() / pivot.clone();
            if factor.is_zero() {
                continue;
            }
            for c in col..=n {
                let v = rows[col][c].clone() * factor.clone();
                rows[r][c] = rows[r][c].clone() - v;
            }
        }
    }
    let mut x = vec![zero::<T>(); n];
    for i in (0..n).rev() {
        let mut acc = rows[i][n].clone();
        for j in i + 1..n {
            acc = acc - rows[i][j].clone() * x[j].clone();
        }
        if rows[i][i].is_zero() {
            return None;
        }
        x[i] = acc / rows[i][i].clone();
    }
    Some(x)
}

/// Columns of the returned matrix form a `g`-orthonormal frame obtained by
/// Gram-Schmidt on `e_1, ..., e_4` in index order.
pub fn gram_schmidt(g: &Mat4<f64>) -> Option<Mat4<f64>> {
    let mut frame: Vec<[f64; 4]> = Vec::with_capacity(4);
    for i in 0..4 {
        let mut v = [0.0; 4];
        v[i] = 1.0;
        for f in &frame {
            let proj = bilinear(g, &v, f);
            for k in 0..4 {
                v[k] -= proj * f[k];
            }
        }
        let n2 = bilinear(g, &v, &v);
        if !(n2 > 0.0) {
            return None;
        }
        let n = n2.sqrt();
        frame.push(v.map(|x| x / n));
    }
    Some(mat4_from_fn(|i, j| frame[j][i]))
}

/// Leading principal minors `m_1, ..., m_4`.
pub fn leading_minors<T: Scalar>(m: &Mat4<T>) -> [T; 4] {
    std::array::from_fn(|k| {
        let n = k + 1;
        let sub: Mat4<T> = mat4_from_fn(|i, j| {
            if i < n && j < n {
                m[i][j].clone()
            } else if i == j {
                one()
            } else {
                zero()
            }
        });
        det(&sub)
    })
}
