//! Small exact linear algebra over the rationals.

use crate::exactmath::Rat;

/// Row rank by Gaussian elimination.
pub fn rank(rows: &[Vec<Rat>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut m: Vec<Vec<Rat>> = rows.to_vec();
    let mut r = 0;
    for col in 0..ncols {
        let Some(pivot) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, pivot);
        let inv = m[r][col].recip().expect("pivot is nonzero");
        for i in 0..m.len() {
            if i != r && !m[i][col].is_zero() {
                let factor = &m[i][col] * &inv;
                for j in col..ncols {
                    let t = &factor * &m[r][j];
                    m[i][j] -= &t;
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Determinant of a square matrix.
pub fn det(mat: &[Vec<Rat>]) -> Rat {
    let n = mat.len();
    let mut m: Vec<Vec<Rat>> = mat.to_vec();
    let mut sign = 1i32;
    let mut acc = Rat::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&i| !m[i][col].is_zero()) else {
            return Rat::zero();
        };
        if pivot != col {
            m.swap(col, pivot);
            sign = -sign;
        }
        acc *= &m[col][col];
        let inv = m[col][col].recip().expect("pivot is nonzero");
        for i in (col + 1)..n {
            if m[i][col].is_zero() {
                continue;
            }
            let factor = &m[i][col] * &inv;
            for j in col..n {
                let t = &factor * &m[col][j];
                m[i][j] -= &t;
            }
        }
    }
    if sign < 0 {
        -acc
    } else {
        acc
    }
}

/// Solves the square system A x = b, or `None` when A is singular.
pub fn solve(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let n = a.len();
    let mut m: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&i| !m[i][col].is_zero())?;
        m.swap(col, pivot);
        let inv = m[col][col].recip().expect("pivot is nonzero");
        for j in col..=n {
            m[col][j] = &m[col][j] * &inv;
        }
        for i in 0..n {
            if i != col && !m[i][col].is_zero() {
                let factor = m[i][col].clone();
                for j in col..=n {
                    let t = &factor * &m[col][j];
                    m[i][j] -= &t;
                }
            }
        }
    }
    Some(m.into_iter().map(|mut row| row.pop().unwrap()).collect())
}

/// A nonzero vector orthogonal to all the given rows, or `None` when the
/// rows already span the full space.
pub fn kernel_vector(rows: &[Vec<Rat>], ncols: usize) -> Option<Vec<Rat>> {
    let mut m: Vec<Vec<Rat>> = rows.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(pivot) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, pivot);
        let inv = m[r][col].recip().expect("pivot is nonzero");
        for j in 0..ncols {
            m[r][j] = &m[r][j] * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][col].is_zero() {
                let factor = m[i][col].clone();
                for j in 0..ncols {
                    let t = &factor * &m[r][j];
                    m[i][j] -= &t;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let free = (0..ncols).find(|c| !pivots.contains(c))?;
    let mut v = vec![Rat::zero(); ncols];
    v[free] = Rat::one();
    for (row, &pc) in pivots.iter().enumerate() {
        v[pc] = -&m[row][free];
    }
    Some(v)
}
