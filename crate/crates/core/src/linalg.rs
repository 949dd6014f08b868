//! Dense complex matrices at working precision: products, adjoints, Cholesky, LU
//! determinants and a cyclic Jacobi eigensolver for Hermitian matrices.

use std::ops::{Index, IndexMut};

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::mp::Precision;

#[derive(Clone, Debug)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    prec: Precision,
    data: Vec<Complex>,
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex;
    fn index(&self, (r, c): (usize, usize)) -> &Complex {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex {
        &mut self.data[r * self.cols + c]
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize, prec: Precision) -> Self {
        CMatrix { rows, cols, prec, data: vec![prec.czero(); rows * cols] }
    }

    pub fn identity(n: usize, prec: Precision) -> Self {
        let mut m = Self::zeros(n, n, prec);
        for i in 0..n {
            m[(i, i)] = prec.creal(&prec.one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, prec: Precision, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(Complex::with_val(prec.bits(), f(r, c)));
            }
        }
        CMatrix { rows, cols, prec, data }
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[Float], prec: Precision) -> Self {
        let mut m = Self::zeros(values.len(), values.len(), prec);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = prec.creal(v);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn mul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, other.cols, self.prec);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = Complex::with_val(self.prec.bits(), a * &other[(k, j)]);
                    out[(i, j)] += prod;
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, self.prec, |r, c| self[(c, r)].clone().conj())
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip(other, |a, b| Complex::with_val(a.prec().0, a + b))
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip(other, |a, b| Complex::with_val(a.prec().0, a - b))
    }

    fn zip(&self, other: &CMatrix, f: impl Fn(&Complex, &Complex) -> Complex) -> Result<CMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "shape {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect();
        Ok(CMatrix { rows: self.rows, cols: self.cols, prec: self.prec, data })
    }

    pub fn frobenius_norm(&self) -> Float {
        let mut acc = self.prec.zero();
        for z in &self.data {
            acc += Float::with_val(self.prec.bits(), z.norm_ref());
        }
        acc.sqrt()
    }

    /// Columns `range` as a new matrix.
    pub fn columns(&self, cols: &[usize]) -> CMatrix {
        CMatrix::from_fn(self.rows, cols.len(), self.prec, |r, c| self[(r, cols[c])].clone())
    }

    pub fn column(&self, c: usize) -> Vec<Complex> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn from_columns(columns: &[Vec<Complex>], rows: usize, prec: Precision) -> CMatrix {
        CMatrix::from_fn(rows, columns.len(), prec, |r, c| columns[c][r].clone())
    }

    /// Largest deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> Float {
        let mut worst = self.prec.zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let d = Complex::with_val(self.prec.bits(), &self[(i, j)] - self[(j, i)].clone().conj());
                let a = Float::with_val(self.prec.bits(), d.abs_ref());
                if a > worst {
                    worst = a;
                }
            }
        }
        worst
    }

    /// Lower-triangular `L` with `self = L L^*`. Fails unless Hermitian positive definite.
    pub fn cholesky(&self) -> Result<CMatrix> {
        if !self.is_square() {
            return Err(Error::NotPositiveDefinite("matrix is not square".into()));
        }
        let n = self.rows;
        let scale = self.frobenius_norm();
        let sym_tol = Float::with_val(self.prec.bits(), &scale * self.prec.residual_tol()) + self.prec.residual_tol();
        if self.hermitian_defect() > sym_tol {
            return Err(Error::NotPositiveDefinite("matrix is not Hermitian".into()));
        }
        let mut l = CMatrix::zeros(n, n, self.prec);
        for j in 0..n {
            let mut d = Float::with_val(self.prec.bits(), self[(j, j)].real());
            for k in 0..j {
                d -= Float::with_val(self.prec.bits(), l[(j, k)].norm_ref());
            }
            if d <= 0 {
                return Err(Error::NotPositiveDefinite(format!("non-positive pivot at {j}")));
            }
            let djj = d.sqrt();
            l[(j, j)] = self.prec.creal(&djj);
            for i in (j + 1)..n {
                let mut s = self[(i, j)].clone();
                for k in 0..j {
                    let t = Complex::with_val(self.prec.bits(), &l[(i, k)] * l[(j, k)].clone().conj());
                    s -= t;
                }
                l[(i, j)] = s / &djj;
            }
        }
        Ok(l)
    }

    /// `ln det` of a Hermitian positive-definite matrix via Cholesky.
    pub fn log_det_hpd(&self) -> Result<Float> {
        let l = self.cholesky()?;
        let mut acc = self.prec.zero();
        for i in 0..self.rows {
            acc += Float::with_val(self.prec.bits(), l[(i, i)].real()).ln();
        }
        Ok(acc * 2u32)
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> Result<Complex> {
        if !self.is_square() {
            return Err(Error::Dimension("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = self.prec.creal(&self.prec.one());
        for k in 0..n {
            let mut piv = k;
            let mut best = Float::with_val(self.prec.bits(), a[(k, k)].abs_ref());
            for r in (k + 1)..n {
                let v = Float::with_val(self.prec.bits(), a[(r, k)].abs_ref());
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best.is_zero() {
                return Ok(self.prec.czero());
            }
            if piv != k {
                for c in 0..n {
                    let tmp = a[(k, c)].clone();
                    a[(k, c)] = a[(piv, c)].clone();
                    a[(piv, c)] = tmp;
                }
                det = -det;
            }
            let pivot = a[(k, k)].clone();
            det *= &pivot;
            for r in (k + 1)..n {
                let f = Complex::with_val(self.prec.bits(), &a[(r, k)] / &pivot);
                if f.is_zero() {
                    continue;
                }
                for c in k..n {
                    let t = Complex::with_val(self.prec.bits(), &f * &a[(k, c)]);
                    a[(r, c)] -= t;
                }
            }
        }
        Ok(det)
    }

    /// Inverse of a lower-triangular matrix.
    pub fn lower_triangular_inverse(&self) -> Result<CMatrix> {
        let n = self.rows;
        let mut inv = CMatrix::zeros(n, n, self.prec);
        for j in 0..n {
            for i in j..n {
                let mut s = if i == j { self.prec.creal(&self.prec.one()) } else { self.prec.czero() };
                for k in j..i {
                    let t = Complex::with_val(self.prec.bits(), &self[(i, k)] * &inv[(k, j)]);
                    s -= t;
                }
                if self[(i, i)].is_zero() {
                    return Err(Error::Dimension("singular triangular matrix".into()));
                }
                inv[(i, j)] = s / &self[(i, i)];
            }
        }
        Ok(inv)
    }

    /// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
    /// Returns eigenvalues in ascending order and the matching orthonormal eigenvectors
    /// as columns.
    pub fn hermitian_eigen(&self) -> Result<(Vec<Float>, CMatrix)> {
        if !self.is_square() {
            return Err(Error::Dimension("eigen-decomposition of a non-square matrix".into()));
        }
        let n = self.rows;
        let bits = self.prec.bits();
        let mut a = self.clone();
        let mut v = CMatrix::identity(n, self.prec);
        let scale = self.frobenius_norm();
        let eps = Float::with_val(bits, Float::with_val(bits, 1) >> (bits as i32 - 4));
        let stop = Float::with_val(bits, &scale * &eps);
        for _sweep in 0..100 {
            let mut off = Float::new(bits);
            for p in 0..n {
                for q in (p + 1)..n {
                    off += Float::with_val(bits, a[(p, q)].norm_ref());
                }
            }
            if off.sqrt() <= stop {
                let mut pairs: Vec<(Float, usize)> =
                    (0..n).map(|i| (Float::with_val(bits, a[(i, i)].real()), i)).collect();
                pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite eigenvalues"));
                let order: Vec<usize> = pairs.iter().map(|p| p.1).collect();
                let vals = pairs.into_iter().map(|p| p.0).collect();
                return Ok((vals, v.columns(&order)));
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)].clone();
                    let mag = Float::with_val(bits, apq.abs_ref());
                    if mag.is_zero() {
                        continue;
                    }
                    // phase = apq / |apq|
                    let phase = Complex::with_val(bits, &apq / &mag);
                    let app = Float::with_val(bits, a[(p, p)].real());
                    let aqq = Float::with_val(bits, a[(q, q)].real());
                    let theta = Float::with_val(bits, &aqq - &app) / (Float::with_val(bits, &mag * 2u32));
                    let root = (Float::with_val(bits, theta.square_ref()) + 1u32).sqrt();
                    let t = if theta >= 0 {
                        Float::with_val(bits, 1) / (Float::with_val(bits, &theta + &root))
                    } else {
                        Float::with_val(bits, -1) / (Float::with_val(bits, &root - &theta))
                    };
                    let c = Float::with_val(bits, 1) / (Float::with_val(bits, t.square_ref()) + 1u32).sqrt();
                    let s = Float::with_val(bits, &t * &c);
                    // W = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] acting on coordinates (p, q)
                    let phase_conj = phase.clone().conj();
                    let w_pp = self.prec.creal(&c);
                    let w_pq = self.prec.creal(&s);
                    let w_qp = Complex::with_val(bits, &phase_conj * &s) * -1i32;
                    let w_qq = Complex::with_val(bits, &phase_conj * &c);
                    // A <- A W (columns)
                    for r in 0..n {
                        let arp = a[(r, p)].clone();
                        let arq = a[(r, q)].clone();
                        a[(r, p)] = Complex::with_val(bits, &arp * &w_pp) + Complex::with_val(bits, &arq * &w_qp);
                        a[(r, q)] = Complex::with_val(bits, &arp * &w_pq) + Complex::with_val(bits, &arq * &w_qq);
                        let vrp = v[(r, p)].clone();
                        let vrq = v[(r, q)].clone();
                        v[(r, p)] = Complex::with_val(bits, &vrp * &w_pp) + Complex::with_val(bits, &vrq * &w_qp);
                        v[(r, q)] = Complex::with_val(bits, &vrp * &w_pq) + Complex::with_val(bits, &vrq * &w_qq);
                    }
                    // A <- W^* A (rows)
                    let (cw_pp, cw_pq, cw_qp, cw_qq) = (
                        w_pp.clone().conj(),
                        w_pq.clone().conj(),
                        w_qp.clone().conj(),
                        w_qq.clone().conj(),
                    );
                    for col in 0..n {
                        let apc = a[(p, col)].clone();
                        let aqc = a[(q, col)].clone();
                        a[(p, col)] = Complex::with_val(bits, &cw_pp * &apc) + Complex::with_val(bits, &cw_qp * &aqc);
                        a[(q, col)] = Complex::with_val(bits, &cw_pq * &apc) + Complex::with_val(bits, &cw_qq * &aqc);
                    }
                    a[(p, q)] = self.prec.czero();
                    a[(q, p)] = self.prec.czero();
                    let dp = Float::with_val(bits, a[(p, p)].real());
                    let dq = Float::with_val(bits, a[(q, q)].real());
                    a[(p, p)] = self.prec.creal(&dp);
                    a[(q, q)] = self.prec.creal(&dq);
                }
            }
        }
        Err(Error::NoConvergence("Jacobi sweeps exhausted".into()))
    }
}

/// Hermitian inner product `x^* y`.
pub fn cdot(x: &[Complex], y: &[Complex], prec: Precision) -> Complex {
    let mut acc = prec.czero();
    for (a, b) in x.iter().zip(y) {
        acc += Complex::with_val(prec.bits(), a.clone().conj() * b);
    }
    acc
}
