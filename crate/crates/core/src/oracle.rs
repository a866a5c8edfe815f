//! Dense, definition-level matrices for the cosine transforms and the
//! auxiliary matrices used by the factorizations.
//!
//! All transforms are unnormalized. Rows are indexed by frequency `k` and
//! columns by sample `n`, so `dct2_matrix(n)` has a row of ones on top and
//! `y = C x` is the usual forward transform. Everything here is O(N^2) and
//! exists to be obviously correct, not fast.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::ops::{Index, Mul};

use crate::error::{Error, Result};

/// Row-major dense matrix of finite `f64` entries.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row vectors. All rows must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::LengthMismatch {
                expected: cols,
                got: bad.len(),
            });
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i] } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "dimension mismatch in apply");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest absolute entrywise difference. Shapes must agree.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch in max_abs_diff"
        );
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Block-diagonal matrix `diag(a, b)`.
    pub fn block_diag(a: &DenseMatrix, b: &DenseMatrix) -> Self {
        let mut out = Self::zeros(a.rows + b.rows, a.cols + b.cols);
        for i in 0..a.rows {
            for j in 0..a.cols {
                out.set(i, j, a[(i, j)]);
            }
        }
        for i in 0..b.rows {
            for j in 0..b.cols {
                out.set(a.rows + i, a.cols + j, b[(i, j)]);
            }
        }
        out
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;

    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                // permutations and triangular factors are mostly zeros
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// `cos(pi * num / den)` evaluated after reducing the angle into
/// `[0, pi/2]`, so that the special angles 0, pi/4, pi/3 and pi/2 come out
/// exact and angles close to pi/2 keep full relative precision.
pub fn cos_pi_ratio(num: i64, den: i64) -> f64 {
    assert!(den > 0, "denominator must be positive");
    let period = 2 * den;
    let mut num = num.rem_euclid(period);
    if num > den {
        num = period - num;
    }
    let mut sign = 1.0;
    if 2 * num > den {
        sign = -1.0;
        num = den - num;
    }
    let value = if num == 0 {
        1.0
    } else if 2 * num == den {
        0.0
    } else if 3 * num == den {
        0.5
    } else if 4 * num == den {
        FRAC_1_SQRT_2
    } else if 4 * num > den {
        (PI * (den - 2 * num) as f64 / (2 * den) as f64).sin()
    } else {
        (PI * num as f64 / den as f64).cos()
    };
    sign * value
}

fn check_positive(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::ZeroLength)
    } else {
        Ok(())
    }
}

fn check_even(n: usize) -> Result<()> {
    check_positive(n)?;
    if n % 2 == 1 {
        Err(Error::OddLength(n))
    } else {
        Ok(())
    }
}

/// DCT-II: entry `(k, n) = cos(pi (2n+1) k / 2N)`.
pub fn dct2_matrix(n: usize) -> Result<DenseMatrix> {
    check_positive(n)?;
    let den = 2 * n as i64;
    Ok(DenseMatrix::from_fn(n, n, |k, j| {
        cos_pi_ratio((2 * j as i64 + 1) * k as i64, den)
    }))
}

/// DCT-III, the transpose of [`dct2_matrix`].
pub fn dct3_matrix(n: usize) -> Result<DenseMatrix> {
    Ok(dct2_matrix(n)?.transpose())
}

/// DCT-IV: entry `(k, n) = cos(pi (2n+1)(2k+1) / 4N)`.
pub fn dct4_matrix(n: usize) -> Result<DenseMatrix> {
    check_positive(n)?;
    let den = 4 * n as i64;
    Ok(DenseMatrix::from_fn(n, n, |k, j| {
        cos_pi_ratio((2 * j as i64 + 1) * (2 * k as i64 + 1), den)
    }))
}

/// Recursive subtraction matrix: lower triangular, first column
/// `(-1)^i / 2`, remaining entries `(-1)^(i-j)` on and below the diagonal.
pub fn r_matrix(n: usize) -> Result<DenseMatrix> {
    check_positive(n)?;
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        if j > i {
            return 0.0;
        }
        let s = if (i - j) % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 {
            s * 0.5
        } else {
            s
        }
    }))
}

/// The diagonal of [`d_matrix`]: `2 cos((2k+1) pi / 4N)`.
pub fn d_entries(n: usize) -> Result<Vec<f64>> {
    check_positive(n)?;
    let den = 4 * n as i64;
    Ok((0..n as i64)
        .map(|k| 2.0 * cos_pi_ratio(2 * k + 1, den))
        .collect())
}

pub fn d_matrix(n: usize) -> Result<DenseMatrix> {
    Ok(DenseMatrix::diagonal(&d_entries(n)?))
}

/// Order reversal.
pub fn j_matrix(n: usize) -> Result<DenseMatrix> {
    check_positive(n)?;
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        if i + j == n - 1 {
            1.0
        } else {
            0.0
        }
    }))
}

/// Butterfly `[[I, J], [J, -I]]` in half-size blocks.
pub fn b_matrix(n: usize) -> Result<DenseMatrix> {
    check_even(n)?;
    let h = n / 2;
    Ok(DenseMatrix::from_fn(n, n, |i, j| match (i < h, j < h) {
        (true, true) => (i == j) as u8 as f64,
        (true, false) => (i + j == n - 1) as u8 as f64,
        (false, true) => (i + j == n - 1) as u8 as f64,
        (false, false) => -((i == j) as u8 as f64),
    }))
}

/// Output interleave of the even/odd split: half-size result `i` lands on
/// output `2i`, and `N/2 + i` lands on `2i + 1`.
pub fn p_matrix(n: usize) -> Result<DenseMatrix> {
    check_even(n)?;
    let h = n / 2;
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        let target = if j < h { 2 * j } else { 2 * (j - h) + 1 };
        (i == target) as u8 as f64
    }))
}

/// Matrix identities tying the transforms together. Each has a residual,
/// the max-abs difference between its two sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Identity {
    /// `C4 = R C2 D`.
    Dct4Factorization,
    /// `C4 C4` is a multiple of the identity.
    Involution,
    /// `C2_N = P blockdiag(C2_{N/2}, C4_{N/2} J) B`, even `N` only.
    EvenOddSplit,
    /// `C4 = D C3 R^T`.
    TransposedDct4,
    /// `C3 = C2^T`.
    Dct3Transpose,
}

impl Identity {
    pub const ALL: [Identity; 5] = [
        Identity::Dct4Factorization,
        Identity::Involution,
        Identity::EvenOddSplit,
        Identity::TransposedDct4,
        Identity::Dct3Transpose,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::Dct4Factorization => "dct4-factorization",
            Identity::Involution => "dct4-involution",
            Identity::EvenOddSplit => "even-odd-split",
            Identity::TransposedDct4 => "dct4-transposed-factorization",
            Identity::Dct3Transpose => "dct3-transpose",
        }
    }

    pub fn applies(self, n: usize) -> bool {
        n > 0 && (self != Identity::EvenOddSplit || n.is_multiple_of(2))
    }

    pub fn residual(self, n: usize) -> Result<f64> {
        let c4 = || dct4_matrix(n);
        Ok(match self {
            Identity::Dct4Factorization => {
                let rhs = &(&r_matrix(n)? * &dct2_matrix(n)?) * &d_matrix(n)?;
                c4()?.max_abs_diff(&rhs)
            }
            Identity::Involution => {
                let c = c4()?;
                let scale = involution_scale() * n as f64 / 2.0;
                (&c * &c).max_abs_diff(&DenseMatrix::identity(n).scaled(scale))
            }
            Identity::EvenOddSplit => {
                check_even(n)?;
                let h = n / 2;
                let lower = &dct4_matrix(h)? * &j_matrix(h)?;
                let mid = DenseMatrix::block_diag(&dct2_matrix(h)?, &lower);
                let rhs = &(&p_matrix(n)? * &mid) * &b_matrix(n)?;
                dct2_matrix(n)?.max_abs_diff(&rhs)
            }
            Identity::TransposedDct4 => {
                let rhs = &(&d_matrix(n)? * &dct3_matrix(n)?) * &r_matrix(n)?.transpose();
                c4()?.max_abs_diff(&rhs)
            }
            Identity::Dct3Transpose => dct3_matrix(n)?.max_abs_diff(&dct2_matrix(n)?.transpose()),
        })
    }
}

/// `C4 C4 = s (N/2) I`, with `s` measured once at `N = 2`.
pub fn involution_scale() -> f64 {
    let c = dct4_matrix(2).expect("positive length");
    (&c * &c)[(0, 0)]
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn close(a: &DenseMatrix, b: &DenseMatrix, tol: f64) {
        let err = a.max_abs_diff(b);
        assert!(err < tol, "max error {err:e}\n{a:?}\n{b:?}");
    }

    #[test]
    fn zero_length_rejected() {
        assert!(matches!(dct2_matrix(0), Err(Error::ZeroLength)));
        assert!(dct3_matrix(0).is_err());
        assert!(dct4_matrix(0).is_err());
        assert!(r_matrix(0).is_err());
        assert!(d_matrix(0).is_err());
        assert!(j_matrix(0).is_err());
    }

    #[test]
    fn odd_length_rejected_for_butterfly_and_permutation() {
        assert!(matches!(b_matrix(3), Err(Error::OddLength(3))));
        assert!(matches!(p_matrix(5), Err(Error::OddLength(5))));
    }

    #[test]
    fn small_dct2() {
        assert_eq!(dct2_matrix(1).unwrap().entries(), &[1.0]);
        let c = FRAC_1_SQRT_2;
        let two = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![c, -c]]).unwrap();
        close(&dct2_matrix(2).unwrap(), &two, TOL);
        let c6 = (PI / 6.0).cos();
        let three = DenseMatrix::from_rows(&[
            vec![1.0, 1.0, 1.0],
            vec![c6, 0.0, -c6],
            vec![0.5, -1.0, 0.5],
        ])
        .unwrap();
        close(&dct2_matrix(3).unwrap(), &three, TOL);
        // the zero is exact
        assert_eq!(dct2_matrix(3).unwrap()[(1, 1)], 0.0);
    }

    #[test]
    fn dct3_is_transpose() {
        assert_eq!(dct3_matrix(1).unwrap().entries(), &[1.0]);
        for n in 1..12 {
            assert_eq!(dct3_matrix(n).unwrap(), dct2_matrix(n).unwrap().transpose());
        }
        // rows of C2 are orthogonal, so C2 C3 is diagonal
        let p = &dct2_matrix(4).unwrap() * &dct3_matrix(4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(p[(i, j)].abs() < TOL);
                }
            }
        }
        assert!((p[(0, 0)] - 4.0).abs() < TOL);
        for i in 1..4 {
            assert!((p[(i, i)] - 2.0).abs() < TOL);
        }
    }

    #[test]
    fn small_dct4() {
        assert!((dct4_matrix(1).unwrap()[(0, 0)] - (PI / 4.0).cos()).abs() < TOL);
        let (a, b) = ((PI / 8.0).cos(), (3.0 * PI / 8.0).cos());
        let two = DenseMatrix::from_rows(&[vec![a, b], vec![b, -a]]).unwrap();
        close(&dct4_matrix(2).unwrap(), &two, TOL);
    }

    #[test]
    fn dct4_via_dct2_at_four() {
        let lhs = dct4_matrix(4).unwrap();
        let rhs = &(&r_matrix(4).unwrap() * &dct2_matrix(4).unwrap()) * &d_matrix(4).unwrap();
        close(&lhs, &rhs, TOL);
    }

    #[test]
    fn recursive_subtractions() {
        assert_eq!(r_matrix(1).unwrap().entries(), &[0.5]);
        let three = DenseMatrix::from_rows(&[
            vec![0.5, 0.0, 0.0],
            vec![-0.5, 1.0, 0.0],
            vec![0.5, -1.0, 1.0],
        ])
        .unwrap();
        assert_eq!(r_matrix(3).unwrap(), three);
        let r2 = r_matrix(2).unwrap();
        let det = r2[(0, 0)] * r2[(1, 1)] - r2[(0, 1)] * r2[(1, 0)];
        assert_eq!(det, 0.5);
    }

    #[test]
    fn diagonal_scales() {
        assert!((d_matrix(1).unwrap()[(0, 0)] - 2f64.sqrt()).abs() < TOL);
        let d2 = d_entries(2).unwrap();
        assert!((d2[0] - 2.0 * (PI / 8.0).cos()).abs() < TOL);
        assert!((d2[1] - 2.0 * (3.0 * PI / 8.0).cos()).abs() < TOL);
        let d4 = d_entries(4).unwrap();
        assert!(d4.iter().all(|&d| d > 0.0));
        assert!(d4.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn reversal_and_butterfly() {
        let j2 = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(j_matrix(2).unwrap(), j2);
        let b2 = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        assert_eq!(b_matrix(2).unwrap(), b2);
    }

    #[test]
    fn even_odd_split_at_four() {
        let upper = dct2_matrix(2).unwrap();
        let lower = &dct4_matrix(2).unwrap() * &j_matrix(2).unwrap();
        let mid = DenseMatrix::block_diag(&upper, &lower);
        let rhs = &(&p_matrix(4).unwrap() * &mid) * &b_matrix(4).unwrap();
        close(&dct2_matrix(4).unwrap(), &rhs, TOL);
    }

    #[test]
    fn permutation_orientation() {
        // the transpose reading of the interleave breaks the split identity
        let upper = dct2_matrix(4).unwrap();
        let lower = &dct4_matrix(4).unwrap() * &j_matrix(4).unwrap();
        let mid = DenseMatrix::block_diag(&upper, &lower);
        let wrong = &(&p_matrix(8).unwrap().transpose() * &mid) * &b_matrix(8).unwrap();
        assert!(dct2_matrix(8).unwrap().max_abs_diff(&wrong) > 0.1);
    }

    #[test]
    fn identities_hold() {
        assert!((involution_scale() - 1.0).abs() < 1e-15);
        for id in Identity::ALL {
            for n in 1..=16 {
                if id.applies(n) {
                    assert!(id.residual(n).unwrap() < 1e-12, "{} at {n}", id.name());
                }
            }
        }
        assert!(!Identity::EvenOddSplit.applies(5));
        assert!(Identity::EvenOddSplit.residual(5).is_err());
        assert_eq!(Identity::Dct3Transpose.residual(9).unwrap(), 0.0);
    }

    #[test]
    fn special_angles_exact() {
        assert_eq!(cos_pi_ratio(1, 2), 0.0);
        assert_eq!(cos_pi_ratio(3, 2), 0.0);
        assert_eq!(cos_pi_ratio(1, 3), 0.5);
        assert_eq!(cos_pi_ratio(2, 3), -0.5);
        assert_eq!(cos_pi_ratio(2, 1), 1.0);
        assert_eq!(cos_pi_ratio(1, 1), -1.0);
        assert_eq!(cos_pi_ratio(-1, 4), FRAC_1_SQRT_2);
        for num in -40..40 {
            for den in 1..13 {
                let want = (PI * num as f64 / den as f64).cos();
                assert!((cos_pi_ratio(num, den) - want).abs() < 1e-14);
            }
        }
    }
}
