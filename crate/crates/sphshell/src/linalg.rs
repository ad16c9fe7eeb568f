//! Dense complex linear algebra on row-major `ndarray` matrices, backed by
//! the system BLAS/LAPACK (zgetrf/zgetrs/zgemm).
//!
//! LAPACK is column-major; a row-major matrix is its own transpose in
//! column-major storage, so factorizations are taken of A^T and solves use
//! `trans = 'T'`.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

extern "C" {
    fn zgetrf_(
        m: *const i32,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        ipiv: *mut i32,
        info: *mut i32,
    );
    fn zgetrs_(
        trans: *const u8,
        n: *const i32,
        nrhs: *const i32,
        a: *const Complex64,
        lda: *const i32,
        ipiv: *const i32,
        b: *mut Complex64,
        ldb: *const i32,
        info: *mut i32,
    );
    fn zgemm_(
        transa: *const u8,
        transb: *const u8,
        m: *const i32,
        n: *const i32,
        k: *const i32,
        alpha: *const Complex64,
        a: *const Complex64,
        lda: *const i32,
        b: *const Complex64,
        ldb: *const i32,
        beta: *const Complex64,
        c: *mut Complex64,
        ldc: *const i32,
    );
}

/// LU factorization of a square matrix, reusable across right-hand sides.
pub struct LuFactors {
    n: usize,
    a: Vec<Complex64>,
    ipiv: Vec<i32>,
    rcond_proxy: f64,
}

/// Factor a square row-major matrix.
pub fn lu_factor(a: &Array2<Complex64>) -> Result<LuFactors> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return Err(Error::Dimension(format!("lu_factor needs a square matrix, got {rows}x{cols}")));
    }
    let n = rows;
    let mut storage: Vec<Complex64> =
        a.as_slice().ok_or_else(|| Error::Dimension("matrix must be contiguous".into()))?.to_vec();
    let mut ipiv = vec![0i32; n];
    let mut info = 0i32;
    let ni = n as i32;
    unsafe {
        zgetrf_(&ni, &ni, storage.as_mut_ptr(), &ni, ipiv.as_mut_ptr(), &mut info);
    }
    if info > 0 {
        return Err(Error::Dimension(format!("matrix is singular (zero pivot at {info})")));
    }
    if info < 0 {
        return Err(Error::Dimension(format!("zgetrf: illegal argument {}", -info)));
    }
    // Diagonal-of-U ratio as a cheap conditioning proxy.
    let mut dmin = f64::INFINITY;
    let mut dmax = 0.0f64;
    for i in 0..n {
        let d = storage[i * n + i].norm();
        dmin = dmin.min(d);
        dmax = dmax.max(d);
    }
    let rcond_proxy = if dmax > 0.0 { dmin / dmax } else { 0.0 };
    Ok(LuFactors { n, a: storage, ipiv, rcond_proxy })
}

impl LuFactors {
    pub fn n(&self) -> usize {
        self.n
    }

    /// min |U_ii| / max |U_ii| of the factorization: 0 means singular,
    /// values near machine epsilon indicate severe ill-conditioning.
    pub fn rcond_proxy(&self) -> f64 {
        self.rcond_proxy
    }

    /// Solve A x = b for a single right-hand side, in place.
    pub fn solve_in_place(&self, rhs: &mut [Complex64]) -> Result<()> {
        if rhs.len() != self.n {
            return Err(Error::Dimension(format!(
                "rhs length {} does not match matrix size {}",
                rhs.len(),
                self.n
            )));
        }
        let ni = self.n as i32;
        let one = 1i32;
        let mut info = 0i32;
        unsafe {
            zgetrs_(
                b"T".as_ptr(),
                &ni,
                &one,
                self.a.as_ptr(),
                &ni,
                self.ipiv.as_ptr(),
                rhs.as_mut_ptr(),
                &ni,
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::Dimension(format!("zgetrs: illegal argument {}", -info)));
        }
        Ok(())
    }

    /// Solve A X = B where B is (n, k) row-major; returns X with the same
    /// shape.
    pub fn solve_columns(&self, b: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        let (rows, k) = b.dim();
        if rows != self.n {
            return Err(Error::Dimension(format!(
                "rhs has {rows} rows but the matrix is {0}x{0}",
                self.n
            )));
        }
        // Transposed copy: column-major n x k.
        let mut bt: Vec<Complex64> = Vec::with_capacity(self.n * k);
        for j in 0..k {
            for i in 0..self.n {
                bt.push(b[[i, j]]);
            }
        }
        let ni = self.n as i32;
        let ki = k as i32;
        let mut info = 0i32;
        unsafe {
            zgetrs_(
                b"T".as_ptr(),
                &ni,
                &ki,
                self.a.as_ptr(),
                &ni,
                self.ipiv.as_ptr(),
                bt.as_mut_ptr(),
                &ni,
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::Dimension(format!("zgetrs: illegal argument {}", -info)));
        }
        let mut x = Array2::zeros((self.n, k));
        for j in 0..k {
            for i in 0..self.n {
                x[[i, j]] = bt[j * self.n + i];
            }
        }
        Ok(x)
    }
}

/// C = A B for row-major matrices.
pub fn matmul(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let (m, ka) = a.dim();
    let (kb, n) = b.dim();
    if ka != kb {
        return Err(Error::Dimension(format!("matmul: {m}x{ka} times {kb}x{n}")));
    }
    let mut c = Array2::<Complex64>::zeros((m, n));
    if m == 0 || n == 0 || ka == 0 {
        return Ok(c);
    }
    let a_slice = a.as_slice().ok_or_else(|| Error::Dimension("matmul: a not contiguous".into()))?;
    let b_slice = b.as_slice().ok_or_else(|| Error::Dimension("matmul: b not contiguous".into()))?;
    let alpha = Complex64::new(1.0, 0.0);
    let beta = Complex64::new(0.0, 0.0);
    let (mi, ni, ki) = (m as i32, n as i32, ka as i32);
    // Row-major product via C^T = B^T A^T in column-major terms.
    unsafe {
        zgemm_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &ni,
            &mi,
            &ki,
            &alpha,
            b_slice.as_ptr(),
            &ni,
            a_slice.as_ptr(),
            &ki,
            &beta,
            c.as_slice_mut().expect("freshly allocated").as_mut_ptr(),
            &ni,
        );
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn small_solve() {
        let a = array![[c(2.0, 0.0), c(1.0, 1.0)], [c(0.0, -1.0), c(3.0, 0.0)]];
        let mut b = vec![c(1.0, 0.0), c(0.0, 2.0)];
        let lu = lu_factor(&a).unwrap();
        lu.solve_in_place(&mut b).unwrap();
        // Residual check.
        let r0 = a[[0, 0]] * b[0] + a[[0, 1]] * b[1] - c(1.0, 0.0);
        let r1 = a[[1, 0]] * b[0] + a[[1, 1]] * b[1] - c(0.0, 2.0);
        assert!(r0.norm() < 1e-14 && r1.norm() < 1e-14);
    }

    #[test]
    fn random_solve_and_matmul_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 40;
        let a = Array2::from_shape_fn((n, n), |_| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let x_true = Array2::from_shape_fn((n, 3), |_| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let b = matmul(&a, &x_true).unwrap();
        let lu = lu_factor(&a).unwrap();
        let x = lu.solve_columns(&b).unwrap();
        let mut worst = 0.0f64;
        for (xa, xb) in x.iter().zip(x_true.iter()) {
            worst = worst.max((xa - xb).norm());
        }
        assert!(worst < 1e-11, "worst component error {worst}");
        assert!(lu.rcond_proxy() > 1e-6);
    }

    #[test]
    fn matmul_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = Array2::from_shape_fn((5, 7), |_| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let b = Array2::from_shape_fn((7, 4), |_| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let fast = matmul(&a, &b).unwrap();
        for i in 0..5 {
            for j in 0..4 {
                let mut acc = c(0.0, 0.0);
                for k in 0..7 {
                    acc += a[[i, k]] * b[[k, j]];
                }
                assert!((acc - fast[[i, j]]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = array![[c(1.0, 0.0), c(2.0, 0.0)], [c(2.0, 0.0), c(4.0, 0.0)]];
        assert!(lu_factor(&a).is_err());
    }

    #[test]
    fn dimension_mismatches() {
        let a = Array2::<Complex64>::zeros((2, 3));
        assert!(lu_factor(&a).is_err());
        let b = Array2::<Complex64>::eye(3);
        let bb = Array2::<Complex64>::zeros((4, 2));
        let lu = lu_factor(&b).unwrap();
        assert!(lu.solve_columns(&bb).is_err());
    }
}
