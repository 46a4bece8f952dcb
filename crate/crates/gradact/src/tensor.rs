//! Dense row-major f64 tensors and the handful of matrix ops the toy models
//! need. Nothing clever: contiguous storage, shape checks at the public
//! boundary, and inner loops written so the compiler can vectorize them.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("shape mismatch in {op}: lhs {lhs:?}, rhs {rhs:?}")]
pub struct ShapeError {
    pub op: &'static str,
    pub lhs: Vec<usize>,
    pub rhs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Tensor {
        let n = shape.iter().product();
        Tensor { shape: shape.to_vec(), data: vec![0.0; n] }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Tensor, ShapeError> {
        if shape.iter().product::<usize>() != data.len() {
            return Err(ShapeError { op: "from_vec", lhs: shape.to_vec(), rhs: vec![data.len()] });
        }
        Ok(Tensor { shape: shape.to_vec(), data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rows(&self) -> usize {
        assert_eq!(self.shape.len(), 2, "rows() on non-matrix");
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        assert_eq!(self.shape.len(), 2, "cols() on non-matrix");
        self.shape[1]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.cols();
        &mut self.data[i * c..(i + 1) * c]
    }

    /// NaN guard, active in debug builds only.
    #[inline]
    pub fn debug_check_finite(&self, what: &str) {
        debug_assert!(
            self.data.iter().all(|v| v.is_finite()),
            "non-finite value after {what}"
        );
    }
}

/// c = a . b for a [m,k] and b [k,n].
///
/// Inner dimension is blocked by four so each pass over a row of `c` folds
/// in four rows of `b`, quartering the `c` traffic per multiply-add.
pub fn matmul(a: &Tensor, b: &Tensor) -> Tensor {
    assert_eq!(a.cols(), b.rows(), "matmul inner dims");
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    let mut c = Tensor::zeros(&[m, n]);
    for i in 0..m {
        let a_row = a.row(i);
        let c_row = c.row_mut(i);
        let mut kk = 0;
        while kk + 4 <= k {
            let (a0, a1, a2, a3) = (a_row[kk], a_row[kk + 1], a_row[kk + 2], a_row[kk + 3]);
            let (b0, b1, b2, b3) = (b.row(kk), b.row(kk + 1), b.row(kk + 2), b.row(kk + 3));
            for ((((cv, &v0), &v1), &v2), &v3) in
                c_row.iter_mut().zip(b0).zip(b1).zip(b2).zip(b3)
            {
                *cv += a0 * v0 + a1 * v1 + a2 * v2 + a3 * v3;
            }
            kk += 4;
        }
        while kk < k {
            let aik = a_row[kk];
            for (cv, &bv) in c_row.iter_mut().zip(b.row(kk)) {
                *cv += aik * bv;
            }
            kk += 1;
        }
    }
    c
}

/// c = a . b^T for a [m,n] and b [k,n]; rows of both are contiguous.
///
/// Materializes b^T and reuses the blocked [`matmul`] kernel: the transpose
/// is O(kn) against the O(mkn) product and the streaming kernel beats
/// per-element dot products on every shape the models use.
pub fn matmul_bt(a: &Tensor, b: &Tensor) -> Tensor {
    assert_eq!(a.cols(), b.cols(), "matmul_bt inner dims");
    matmul(a, &transpose(b))
}

/// b^T for a 2-D tensor.
pub fn transpose(b: &Tensor) -> Tensor {
    let (r, c) = (b.rows(), b.cols());
    let mut t = Tensor::zeros(&[c, r]);
    for i in 0..r {
        let row = b.row(i);
        for (j, &v) in row.iter().enumerate() {
            t.data_mut()[j * r + i] = v;
        }
    }
    t
}

/// c = a^T . b for a [m,k] and b [m,n]; accumulates row outer products,
/// four at a time so each `c` row pass folds in four `b` rows.
pub fn matmul_at_b(a: &Tensor, b: &Tensor) -> Tensor {
    assert_eq!(a.rows(), b.rows(), "matmul_at_b inner dims");
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    let mut c = Tensor::zeros(&[k, n]);
    let mut i = 0;
    while i + 4 <= m {
        let (b0, b1, b2, b3) = (b.row(i), b.row(i + 1), b.row(i + 2), b.row(i + 3));
        for kk in 0..k {
            let (a0, a1, a2, a3) = (
                a.data()[i * k + kk],
                a.data()[(i + 1) * k + kk],
                a.data()[(i + 2) * k + kk],
                a.data()[(i + 3) * k + kk],
            );
            let c_row = c.row_mut(kk);
            for ((((cv, &v0), &v1), &v2), &v3) in
                c_row.iter_mut().zip(b0).zip(b1).zip(b2).zip(b3)
            {
                *cv += a0 * v0 + a1 * v1 + a2 * v2 + a3 * v3;
            }
        }
        i += 4;
    }
    while i < m {
        let a_row = a.row(i);
        let b_row = b.row(i);
        for (kk, &av) in a_row.iter().enumerate().take(k) {
            for (cv, &bv) in c.row_mut(kk).iter_mut().zip(b_row) {
                *cv += av * bv;
            }
        }
        i += 1;
    }
    c
}

/// y = x . w with shape validation at the public boundary.
pub fn linear_fwd(x: &Tensor, w: &Tensor) -> Result<Tensor, ShapeError> {
    if x.shape().len() != 2 || w.shape().len() != 2 || x.cols() != w.rows() {
        return Err(ShapeError { op: "linear_fwd", lhs: x.shape().to_vec(), rhs: w.shape().to_vec() });
    }
    let y = matmul(x, w);
    y.debug_check_finite("linear_fwd");
    Ok(y)
}

/// Backward of y = x . w: dx = dy . w^T and dw = x^T . dy.
pub fn linear_bwd(x: &Tensor, w: &Tensor, dy: &Tensor) -> Result<(Tensor, Tensor), ShapeError> {
    if x.cols() != w.rows() || dy.rows() != x.rows() || dy.cols() != w.cols() {
        return Err(ShapeError { op: "linear_bwd", lhs: x.shape().to_vec(), rhs: dy.shape().to_vec() });
    }
    let dx = matmul_bt(dy, w);
    let dw = matmul_at_b(x, dy);
    dx.debug_check_finite("linear_bwd/dx");
    dw.debug_check_finite("linear_bwd/dw");
    Ok((dx, dw))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(shape: &[usize], data: &[f64]) -> Tensor {
        Tensor::from_vec(shape, data.to_vec()).unwrap()
    }

    #[test]
    fn identity_passthrough() {
        let x = t(&[1, 2], &[1.0, 0.0]);
        let eye = t(&[2, 2], &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(linear_fwd(&x, &eye).unwrap().data(), &[1.0, 0.0]);
    }

    #[test]
    fn weight_gradient_is_outer_product() {
        let x = t(&[1, 2], &[1.0, 2.0]);
        let w = t(&[2, 1], &[0.0, 0.0]);
        let dy = t(&[1, 1], &[3.0]);
        let (_, dw) = linear_bwd(&x, &w, &dy).unwrap();
        assert_eq!(dw.shape(), &[2, 1]);
        assert_eq!(dw.data(), &[3.0, 6.0]);
    }

    #[test]
    fn matmul_agrees_with_naive_triple_loop() {
        let a = t(&[2, 3], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = t(&[3, 2], &[7.0, 8.0, 9.0, 10.0, 11.0, 12.0]);
        let c = matmul(&a, &b);
        let mut expected = [0.0; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..3 {
                    expected[i * 2 + j] += a.data()[i * 3 + k] * b.data()[k * 2 + j];
                }
            }
        }
        assert_eq!(c.data(), &expected[..]);
    }

    #[test]
    fn transposed_variants_agree_with_matmul() {
        // summation trees differ between the kernels, so compare within ulps
        let close = |x: &Tensor, y: &Tensor| {
            assert_eq!(x.shape(), y.shape());
            for (&u, &v) in x.data().iter().zip(y.data()) {
                assert!((u - v).abs() < 1e-12, "{u} vs {v}");
            }
        };
        let a = t(&[2, 3], &[1.0, -2.0, 3.0, 0.5, 5.0, -6.0]);
        let b = t(&[4, 3], &[7.0, 8.0, 9.0, 1.0, -1.0, 2.0, 0.0, 3.0, 4.0, -2.0, 6.0, 5.0]);
        // a . b^T via explicit transpose
        let mut bt = Tensor::zeros(&[3, 4]);
        for i in 0..4 {
            for j in 0..3 {
                bt.data_mut()[j * 4 + i] = b.data()[i * 3 + j];
            }
        }
        close(&matmul_bt(&a, &b), &matmul(&a, &bt));

        let c = t(&[2, 4], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let mut at = Tensor::zeros(&[3, 2]);
        for i in 0..2 {
            for j in 0..3 {
                at.data_mut()[j * 2 + i] = a.data()[i * 3 + j];
            }
        }
        close(&matmul_at_b(&a, &c), &matmul(&at, &c));
    }

    #[test]
    fn dot_handles_remainders() {
        for n in [1usize, 3, 4, 5, 8, 11] {
            let a: Vec<f64> = (0..n).map(|i| i as f64 + 0.5).collect();
            let b: Vec<f64> = (0..n).map(|i| 2.0 - i as f64).collect();
            let expected: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            let at = t(&[1, n], &a);
            let bt = t(&[1, n], &b);
            let got = matmul_bt(&at, &bt).data()[0];
            assert!((got - expected).abs() < 1e-12, "n={n}: {got} vs {expected}");
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let x = t(&[1, 2], &[1.0, 2.0]);
        let w = t(&[3, 1], &[1.0, 2.0, 3.0]);
        assert!(linear_fwd(&x, &w).is_err());
        let dy = t(&[2, 1], &[1.0, 1.0]);
        assert!(linear_bwd(&x, &w, &dy).is_err());
        assert!(Tensor::from_vec(&[2, 2], vec![0.0; 3]).is_err());
    }
}
