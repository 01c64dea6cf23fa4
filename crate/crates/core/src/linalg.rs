//! Dense square matrices over a [`Scalar`], exact PSD certification for
//! rational matrices and floating-point eigenvalue estimates.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Float, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};

/// Square matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for row in self.data.chunks(self.dim.max(1)) {
            list.entry(&row);
        }
        list.finish()
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![T::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let dim = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::Dimension(format!("row {i} has {} entries, expected {dim}", r.len())));
        }
        Ok(Matrix { dim, data: rows.into_iter().flatten().collect() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.dim + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.dim.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn check_symmetric(&self) -> Result<()> {
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                if self.get(i, j) != self.get(j, i) {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        self.check_symmetric().is_ok()
    }

    /// `Pᵀ M P` for the permutation sending new index `i` to old `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.dim);
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.set(i, j, self.get(perm[i], perm[j]).clone());
            }
        }
        m
    }

    pub fn scaled(&self, c: &T) -> Self {
        Matrix { dim: self.dim, data: self.data.iter().map(|x| x.clone() * c.clone()).collect() }
    }

    /// `xᵀ M x`
    pub fn quadratic_form(&self, x: &[T]) -> T {
        let mut acc = T::zero();
        for i in 0..self.dim {
            if x[i].is_zero() {
                continue;
            }
            let mut row = T::zero();
            for j in 0..self.dim {
                row = row + self.get(i, j).clone() * x[j].clone();
            }
            acc = acc + x[i].clone() * row;
        }
        acc
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { dim: self.dim, data: self.data.iter().map(f).collect() }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(|x| x.to_f64_lossy())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.to_f64_lossy().abs()).fold(0.0, f64::max)
    }
}

/// Outcome of the exact positive-semidefiniteness test.
#[derive(Clone, Debug, PartialEq)]
pub enum PsdOutcome {
    /// Positive semidefinite. `pivots` lists, for every index that was
    /// eliminated, the leading principal minor (of the integer-scaled
    /// matrix) it produced; indices whose row vanished are absent.
    Psd { pivots: Vec<(usize, BigInt)> },
    /// Not PSD: `witness` satisfies `witnessᵀ M witness = value < 0`.
    NotPsd { witness: Vec<Rational>, value: Rational },
}

impl PsdOutcome {
    pub fn is_psd(&self) -> bool {
        matches!(self, PsdOutcome::Psd { .. })
    }
}

/// Exact PSD test by symmetric fraction-free (Bareiss) elimination.
///
/// The matrix is first scaled by the lcm of its denominators. Pivots run
/// along the diagonal in order: a negative pivot, or a zero pivot whose row is
/// not identically zero, refutes PSD; a zero row is dropped.
pub fn psd_check_exact(m: &Matrix<Rational>) -> Result<PsdOutcome> {
    m.check_symmetric()?;
    let d = m.dim();
    let lcm = m.data.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let mut a: Vec<Vec<BigInt>> = (0..d)
        .map(|i| (0..d).map(|j| (m.get(i, j) * Rational::from_integer(lcm.clone())).to_integer()).collect())
        .collect();
    let mut alive = vec![true; d];
    let mut kept: Vec<usize> = Vec::new();
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    for p in 0..d {
        let piv = a[p][p].clone();
        if piv.is_negative() {
            let mut idx = kept.clone();
            idx.push(p);
            return Ok(negative_pivot_witness(m, &idx));
        }
        if piv.is_zero() {
            if let Some(j) = (p + 1..d).find(|&j| alive[j] && !a[p][j].is_zero()) {
                return Ok(zero_pivot_witness(m, &kept, p, j));
            }
            alive[p] = false;
            continue;
        }
        for i in p + 1..d {
            if !alive[i] {
                continue;
            }
            for j in i..d {
                if !alive[j] {
                    continue;
                }
                let v = (&piv * &a[i][j] - &a[i][p] * &a[p][j]) / &prev;
                a[i][j] = v.clone();
                a[j][i] = v;
            }
        }
        prev = piv.clone();
        kept.push(p);
        pivots.push((p, piv));
    }
    Ok(PsdOutcome::Psd { pivots })
}

fn submatrix(m: &Matrix<Rational>, rows: &[usize], cols: &[usize]) -> Vec<Vec<Rational>> {
    rows.iter().map(|&i| cols.iter().map(|&j| m.get(i, j).clone()).collect()).collect()
}

/// Solves `a x = b` for a nonsingular rational matrix.
fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Vec<Rational> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero()).expect("nonsingular system");
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r == c || a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] / &a[c][c];
            for k in c..n {
                let t = &f * &a[c][k];
                a[r][k] -= t;
            }
            let t = &f * &b[c];
            b[r] -= t;
        }
    }
    (0..n).map(|i| &b[i] / &a[i][i]).collect()
}

/// `idx` has positive leading minors except the last, which is negative;
/// `x = M_I⁻¹ e_last` then gives `xᵀ M x = det(M_I') / det(M_I) < 0`.
fn negative_pivot_witness(m: &Matrix<Rational>, idx: &[usize]) -> PsdOutcome {
    let k = idx.len();
    let mut e = vec![Rational::zero(); k];
    e[k - 1] = Rational::one();
    let sol = solve(submatrix(m, idx, idx), e);
    finish_witness(m, idx.iter().copied().zip(sol))
}

/// The Schur complement on `{p, j}` has a zero diagonal entry at `p` and a
/// nonzero off-diagonal entry, so it is indefinite.
fn zero_pivot_witness(m: &Matrix<Rational>, kept: &[usize], p: usize, j: usize) -> PsdOutcome {
    let mk = submatrix(m, kept, kept);
    let col = |c: usize| -> Vec<Rational> { kept.iter().map(|&i| m.get(i, c).clone()).collect() };
    let zp = if kept.is_empty() { vec![] } else { solve(mk.clone(), col(p)) };
    let zj = if kept.is_empty() { vec![] } else { solve(mk, col(j)) };
    let dot = |r: usize, z: &[Rational]| -> Rational {
        kept.iter().zip(z).map(|(&i, zi)| m.get(r, i) * zi).fold(Rational::zero(), |a, b| a + b)
    };
    let s_pj = m.get(p, j) - dot(p, &zj);
    let s_jj = m.get(j, j) - dot(j, &zj);
    // y = (t, 1) on (p, j) gives yᵀ S y = 2 t s_pj + s_jj = -1
    let t = -(s_jj + Rational::one()) / (Rational::from_integer(BigInt::from(2)) * s_pj);
    let mut entries: Vec<(usize, Rational)> = kept
        .iter()
        .enumerate()
        .map(|(a, &i)| (i, -(&t * &zp[a] + &zj[a])))
        .collect();
    entries.push((p, t));
    entries.push((j, Rational::one()));
    finish_witness(m, entries.into_iter())
}

fn finish_witness(m: &Matrix<Rational>, entries: impl Iterator<Item = (usize, Rational)>) -> PsdOutcome {
    let mut x = vec![Rational::zero(); m.dim()];
    for (i, v) in entries {
        x[i] = v;
    }
    let value = m.quadratic_form(&x);
    debug_assert!(value.is_negative(), "witness must be negative");
    PsdOutcome::NotPsd { witness: x, value }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues<F: Float>(m: &Matrix<F>) -> Vec<F> {
    let n = m.dim;
    let mut a: Vec<Vec<F>> = (0..n).map(|i| (0..n).map(|j| m.data[i * n + j]).collect()).collect();
    let two = F::one() + F::one();
    for _sweep in 0..100 {
        let off: F = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .fold(F::zero(), |s, (i, j)| s + a[i][j] * a[i][j]);
        let scale: F = (0..n).fold(F::zero(), |s, i| s + a[i][i] * a[i][i]);
        if off <= F::epsilon() * F::epsilon() * scale || off == F::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == F::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (two * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt());
                let c = F::one() / (t * t + F::one()).sqrt();
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
            }
        }
    }
    let mut ev: Vec<F> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

/// Smallest eigenvalue, computed in `f64`.
pub fn min_eigenvalue_float<T: Scalar>(m: &Matrix<T>) -> Result<f64> {
    m.check_symmetric()?;
    Ok(symmetric_eigenvalues(&m.to_f64()).first().copied().unwrap_or(0.0))
}

/// Rounds approximate entries to multiples of `1/denominator` after
/// symmetrising `(i, j)` and `(j, i)` by averaging.
pub fn rationalize(values: &[Vec<f64>], denominator: u64) -> Result<Matrix<Rational>> {
    if denominator == 0 {
        return Err(Error::Parse("denominator must be positive".into()));
    }
    let d = values.len();
    for (i, row) in values.iter().enumerate() {
        if row.len() != d {
            return Err(Error::Dimension(format!("row {i} has {} entries, expected {d}", row.len())));
        }
        if let Some(j) = row.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: i, col: j });
        }
    }
    let den = Rational::from_integer(BigInt::from(denominator));
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let mut m = Matrix::zeros(d);
    for i in 0..d {
        for j in i..d {
            let x = Rational::from_float(values[i][j]).expect("finite");
            let y = Rational::from_float(values[j][i]).expect("finite");
            let avg = (x + y) * &half;
            let r = Rational::new(crate::scalar::round_half_away(&(avg * &den)), den.to_integer());
            m.set(i, j, r.clone());
            m.set(j, i, r);
        }
    }
    Ok(m)
}

/// Writes a rational matrix as `scale × integers` with the largest scale
/// that keeps every entry integral.
pub fn factor_scale(m: &Matrix<Rational>) -> (Rational, Vec<Vec<BigInt>>) {
    let lcm = m.data.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = m.data.iter().map(|x| (x * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let g = if g.is_zero() { BigInt::one() } else { g };
    let scale = Rational::new(g.clone(), lcm);
    let rows = ints.chunks(m.dim.max(1)).map(|r| r.iter().map(|x| x / &g).collect()).collect();
    (scale, rows)
}

pub fn from_scaled_ints(scale: &Rational, rows: &[Vec<BigInt>]) -> Result<Matrix<Rational>> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|x| Rational::from_integer(x.clone()) * scale).collect())
        .collect();
    Matrix::from_rows(rows)
}

/// Parses the text matrix format: a header line `d p/q`, then `d` rows of
/// `d` integers; entry = `p/q × integer`.
pub fn parse_matrix_text(text: &str) -> Result<Matrix<Rational>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let mut h = header.split_whitespace();
    let d: usize = h
        .next()
        .and_then(|x| x.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad matrix header {header:?}")))?;
    let scale = parse_rational(h.next().unwrap_or("1"))?;
    let mut rows = Vec::with_capacity(d);
    for (r, line) in lines.enumerate() {
        let row: Vec<BigInt> = line
            .split_whitespace()
            .map(|t| t.parse::<BigInt>().map_err(|_| Error::Parse(format!("row {}: bad integer {t:?}", r + 1))))
            .collect::<Result<_>>()?;
        if row.len() != d {
            return Err(Error::Dimension(format!("row {} has {} entries, expected {d}", r + 1, row.len())));
        }
        rows.push(row);
    }
    if rows.len() != d {
        return Err(Error::Dimension(format!("{} rows, expected {d}", rows.len())));
    }
    from_scaled_ints(&scale, &rows)
}

pub fn write_matrix_text(m: &Matrix<Rational>) -> String {
    let (scale, rows) = factor_scale(m);
    let mut out = format!("{} {}/{}\n", m.dim(), scale.numer(), scale.denom());
    for r in rows {
        let line: Vec<String> = r.iter().map(|x| format!("{x:>7}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Renders the matrix with `p/q` entries, one row per line.
pub fn display_rational(m: &Matrix<Rational>) -> String {
    m.rows()
        .iter()
        .map(|r| r.iter().map(format_rational).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Smallest eigenvalue bound check helper used by the reports: the guard
/// band below which float and exact answers are not compared.
pub fn eigen_guard_band(m: &Matrix<Rational>) -> f64 {
    1e-6 * m.max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn rm(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()).unwrap()
    }

    #[test]
    fn identity_is_psd() {
        assert!(psd_check_exact(&Matrix::<Rational>::identity(3)).unwrap().is_psd());
    }

    #[test]
    fn indefinite_two_by_two() {
        let m = rm(&[&[1, 2], &[2, 1]]);
        match psd_check_exact(&m).unwrap() {
            PsdOutcome::NotPsd { witness, value } => {
                assert!(value < Rational::zero());
                assert_eq!(m.quadratic_form(&witness), value);
            }
            other => panic!("expected NotPsd, got {other:?}"),
        }
        assert_eq!(m.quadratic_form(&[int(1), int(-1)]), int(-2));
    }

    #[test]
    fn zero_rows_are_skipped() {
        let m = rm(&[&[0, 0, 0], &[0, 2, 1], &[0, 1, 1]]);
        assert!(psd_check_exact(&m).unwrap().is_psd());
        let singular = rm(&[&[1, 1], &[1, 1]]);
        assert!(psd_check_exact(&singular).unwrap().is_psd());
    }

    #[test]
    fn zero_pivot_with_nonzero_row() {
        let m = rm(&[&[1, 1, 0], &[1, 1, 1], &[0, 1, 5]]);
        match psd_check_exact(&m).unwrap() {
            PsdOutcome::NotPsd { witness, value } => {
                assert!(value < Rational::zero());
                assert_eq!(m.quadratic_form(&witness), value);
            }
            other => panic!("expected NotPsd, got {other:?}"),
        }
        let m = rm(&[&[0, 1], &[1, 3]]);
        assert!(!psd_check_exact(&m).unwrap().is_psd());
    }

    #[test]
    fn negative_diagonal() {
        let m = rm(&[&[2, 1, 0], &[1, 1, 0], &[0, 0, -1]]);
        assert!(!psd_check_exact(&m).unwrap().is_psd());
    }

    #[test]
    fn rejects_asymmetric() {
        let m = rm(&[&[1, 2], &[3, 1]]);
        assert!(matches!(psd_check_exact(&m), Err(Error::NotSymmetric { .. })));
        assert!(min_eigenvalue_float(&m).is_err());
    }

    #[test]
    fn jacobi_small() {
        let m = rm(&[&[1, 2], &[2, 1]]);
        let ev = symmetric_eigenvalues(&m.to_f64());
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
        let m = rm(&[&[4, 1, 0], &[1, 3, 1], &[0, 1, 2]]);
        let ev = symmetric_eigenvalues(&m.to_f64());
        let trace: f64 = ev.iter().sum();
        assert!((trace - 9.0).abs() < 1e-12);
        assert!((min_eigenvalue_float(&m).unwrap() - ev[0]).abs() < 1e-15);
    }

    #[test]
    fn rationalize_examples() {
        let m = rationalize(&[vec![0.4434]], 10_000).unwrap();
        assert_eq!(*m.get(0, 0), rat(4434, 10_000));
        let e = 1e-7;
        let m = rationalize(&[vec![1.0, 0.25 + e], vec![0.25 - e, 1.0]], 100).unwrap();
        assert_eq!(*m.get(0, 1), rat(1, 4));
        assert_eq!(*m.get(1, 0), rat(1, 4));
        assert!(rationalize(&[vec![f64::NAN]], 10).is_err());
        assert!(rationalize(&[vec![1.0, 2.0]], 10).is_err());
    }

    #[test]
    fn matrix_text_roundtrip() {
        let m = Matrix::from_rows(vec![vec![rat(3, 5000), rat(-6, 5000)], vec![rat(-6, 5000), rat(9, 10_000)]]).unwrap();
        let text = write_matrix_text(&m);
        assert!(text.starts_with("2 3/10000\n"));
        assert_eq!(parse_matrix_text(&text).unwrap(), m);
        assert!(parse_matrix_text("2 1/1\n1 2\n3").is_err());
    }
}
