//! Dense exact linear algebra over complex rationals, plus the small
//! complex-double routines used by the numeric paths (root finding,
//! eigenvectors, determinants).

use crate::rational::{C64, CQ};
use std::ops::Mul;

/// Row-major dense matrix over `CQ`.
#[derive(Clone, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<CQ>,
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat {
            rows,
            cols,
            data: vec![CQ::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = CQ::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<CQ>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c));
        QMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn column(&self, j: usize) -> Vec<CQ> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<CQ> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn transpose(&self) -> QMat {
        let mut t = QMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &QMat) -> QMat {
        assert_eq!(self.cols, rhs.rows);
        let mut out = QMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = &self[(i, l)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let prod = a * &rhs[(l, j)];
                    out[(i, j)] += &prod;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[CQ]) -> Vec<CQ> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![CQ::zero(); self.rows];
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !self[(i, j)].is_zero() && !v[j].is_zero() {
                    let prod = &self[(i, j)] * &v[j];
                    out[i] += &prod;
                }
            }
        }
        out
    }

    pub fn sub(&self, rhs: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *a -= b;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn scale(&self, c: &CQ) -> QMat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= c;
        }
        out
    }

    pub fn to_c64(&self) -> Vec<Vec<C64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].to_c64()).collect())
            .collect()
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = self[(r, c)].inv();
            for j in c..self.cols {
                self[(r, j)] *= &inv;
            }
            for i in 0..self.rows {
                if i != r && !self[(i, c)].is_zero() {
                    let factor = self[(i, c)].clone();
                    for j in c..self.cols {
                        let sub = &factor * &self[(r, j)];
                        self[(i, j)] -= &sub;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of the right nullspace, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<CQ>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![CQ::zero(); self.cols];
            v[free] = CQ::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -&m[(r, free)];
            }
            basis.push(v);
        }
        basis
    }

    /// Solve `self * X = rhs` exactly. Returns `None` when inconsistent.
    /// For underdetermined systems free variables are set to zero.
    pub fn solve(&self, rhs: &QMat) -> Option<QMat> {
        assert_eq!(self.rows, rhs.rows);
        let mut aug = QMat::zeros(self.rows, self.cols + rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..rhs.cols {
                aug[(i, self.cols + j)] = rhs[(i, j)].clone();
            }
        }
        let pivots = aug.rref();
        // A pivot in the augmented part means the system is inconsistent.
        if pivots.iter().any(|&c| c >= self.cols) {
            return None;
        }
        let mut x = QMat::zeros(self.cols, rhs.cols);
        for (r, &pc) in pivots.iter().enumerate() {
            for j in 0..rhs.cols {
                x[(pc, j)] = aug[(r, self.cols + j)].clone();
            }
        }
        Some(x)
    }

    pub fn det(&self) -> CQ {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = CQ::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[(i, c)].is_zero()) else {
                return CQ::zero();
            };
            if p != c {
                m.swap_rows(c, p);
                det = -det;
            }
            det *= &m[(c, c)].clone();
            let inv = m[(c, c)].inv();
            for i in c + 1..n {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let factor = (&m[(i, c)]).mul(&inv);
                for j in c..n {
                    let sub = &factor * &m[(c, j)];
                    m[(i, j)] -= &sub;
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for QMat {
    type Output = CQ;
    fn index(&self, (i, j): (usize, usize)) -> &CQ {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut CQ {
        &mut self.data[i * self.cols + j]
    }
}

impl std::fmt::Debug for QMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Complex-double helpers
// ---------------------------------------------------------------------------

pub fn cmat_matvec(m: &[Vec<C64>], v: &[C64]) -> Vec<C64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn cmat_matmul(a: &[Vec<C64>], b: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let n = a.len();
    let p = b[0].len();
    let m = b.len();
    let mut out = vec![vec![C64::new(0.0, 0.0); p]; n];
    for i in 0..n {
        for l in 0..m {
            let al = a[i][l];
            for j in 0..p {
                out[i][j] += al * b[l][j];
            }
        }
    }
    out
}

/// Solve a square complex system by partial-pivot elimination.
pub fn csolve(a: &[Vec<C64>], b: &[C64]) -> Option<Vec<C64>> {
    let n = a.len();
    let mut m: Vec<Vec<C64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for c in 0..n {
        let (p, mag) = (c..n)
            .map(|i| (i, m[i][c].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if mag < 1e-300 {
            return None;
        }
        m.swap(c, p);
        let piv = m[c][c];
        for i in 0..n {
            if i == c {
                continue;
            }
            let f = m[i][c] / piv;
            if f.norm() == 0.0 {
                continue;
            }
            for j in c..=n {
                let s = m[c][j];
                m[i][j] -= f * s;
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

pub fn cdet(a: &[Vec<C64>]) -> C64 {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = C64::new(1.0, 0.0);
    for c in 0..n {
        let (p, mag) = (c..n)
            .map(|i| (i, m[i][c].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if mag == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if p != c {
            m.swap(c, p);
            det = -det;
        }
        det *= m[c][c];
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            for j in c..n {
                let s = m[c][j];
                m[i][j] -= f * s;
            }
        }
    }
    det
}

/// A unit-norm kernel vector of `a`, assumed to be (numerically) rank
/// deficient by one. Elimination with full column bookkeeping, then back
/// substitution on the free column.
pub fn cnullvec(a: &[Vec<C64>]) -> Vec<C64> {
    let n = a.len();
    let mut m = a.to_vec();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == n {
            break;
        }
        let (p, mag) = (r..n)
            .map(|i| (i, m[i][c].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        // Rank decisions at double precision; the caller refines by
        // inverse iteration afterwards.
        let scale: f64 = m.iter().flat_map(|row| row.iter().map(|z| z.norm())).fold(0.0, f64::max);
        if mag <= 1e-10 * (1.0 + scale) {
            continue;
        }
        m.swap(r, p);
        let piv = m[r][c];
        for j in 0..n {
            m[r][j] /= piv;
        }
        for i in 0..n {
            if i != r {
                let f = m[i][c];
                for j in 0..n {
                    let s = m[r][j];
                    m[i][j] -= f * s;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let pivot_set: std::collections::HashSet<usize> = pivot_cols.iter().copied().collect();
    let free = (0..n).find(|c| !pivot_set.contains(c)).unwrap_or(n - 1);
    let mut v = vec![C64::new(0.0, 0.0); n];
    v[free] = C64::new(1.0, 0.0);
    for (row, &pc) in pivot_cols.iter().enumerate() {
        v[pc] = -m[row][free];
    }
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter().map(|z| z / norm).collect()
}

/// All roots of a complex polynomial (coefficients low to high) by the
/// Aberth-Ehrlich iteration.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let mut c = coeffs.to_vec();
    while let Some(last) = c.last() {
        if last.norm() < 1e-300 && c.len() > 1 {
            c.pop();
        } else {
            break;
        }
    }
    let deg = c.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let eval = |z: C64, c: &[C64]| -> (C64, C64) {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for &ck in c.iter().rev() {
            dp = dp * z + p;
            p = p * z + ck;
        }
        (p, dp)
    };
    // Initial guesses on a circle sized by the Cauchy bound.
    let lead = c[deg].norm();
    let radius = 1.0
        + c[..deg]
            .iter()
            .map(|ck| ck.norm() / lead)
            .fold(0.0, f64::max);
    let mut roots: Vec<C64> = (0..deg)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * (i as f64) / (deg as f64) + 0.4;
            C64::from_polar(radius * 0.7, theta)
        })
        .collect();
    for _ in 0..200 {
        let mut max_step = 0.0f64;
        let snapshot = roots.clone();
        for i in 0..deg {
            let z = snapshot[i];
            let (p, dp) = eval(z, &c);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = p / dp;
            let sum: C64 = (0..deg)
                .filter(|&j| j != i)
                .map(|j| (z - snapshot[j]).finv())
                .sum();
            let denom = C64::new(1.0, 0.0) - newton * sum;
            let step = newton / denom;
            roots[i] = z - step;
            max_step = max_step.max(step.norm() / (1.0 + z.norm()));
        }
        if max_step < 1e-15 {
            break;
        }
    }
    // Newton polish.
    for r in roots.iter_mut() {
        for _ in 0..5 {
            let (p, dp) = eval(*r, &c);
            if dp.norm() == 0.0 {
                break;
            }
            *r -= p / dp;
        }
    }
    roots
}

/// Characteristic polynomial coefficients (low to high) of a complex matrix
/// by the Faddeev-LeVerrier recursion. Fine at the small dimensions used
/// for joint spectra.
pub fn char_poly(a: &[Vec<C64>]) -> Vec<C64> {
    let n = a.len();
    let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
    coeffs[n] = C64::new(1.0, 0.0);
    let mut m = vec![vec![C64::new(0.0, 0.0); n]; n];
    let mut c_prev = C64::new(1.0, 0.0);
    for k in 1..=n {
        // M_k = A * M_{k-1} + c_{n-k+1} * I
        let am = if k == 1 {
            let mut id = vec![vec![C64::new(0.0, 0.0); n]; n];
            for i in 0..n {
                id[i][i] = C64::new(1.0, 0.0);
            }
            id
        } else {
            let mut am = cmat_matmul(a, &m);
            for i in 0..n {
                am[i][i] += c_prev;
            }
            am
        };
        let tr: C64 = cmat_matmul(a, &am).iter().enumerate().map(|(i, r)| r[i]).sum();
        let ck = -tr / (k as f64);
        coeffs[n - k] = ck;
        c_prev = ck;
        m = am;
    }
    coeffs
}
