//! Small dense linear-algebra helpers shared by the graph, solver and
//! synthetic-data code. ndarray is the storage type everywhere; nalgebra is
//! only used where a factorization (QR, SVD) is needed.

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub(crate) fn to_nalgebra(a: ArrayView2<'_, f64>) -> DMatrix<f64> {
    let (rows, cols) = a.dim();
    DMatrix::from_fn(rows, cols, |i, j| a[[i, j]])
}

pub(crate) fn from_nalgebra(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Orthonormal `rows x cols` matrix from the QR factorization of a Gaussian
/// random matrix. Requires `rows >= cols`.
pub fn random_orthonormal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    assert!(rows >= cols, "random_orthonormal needs rows >= cols");
    let g = DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    from_nalgebra(&q)
}

/// Solution of the orthogonal Procrustes problem `max Tr(U^T A)` subject to
/// `U^T U = I`: with the thin SVD `A = M S N^T`, returns `M N^T`.
pub fn procrustes(a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let (rows, cols) = a.dim();
    if rows < cols {
        return Err(Error::Dimension(format!(
            "procrustes target is {rows}x{cols}; need at least as many rows as columns"
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(
            "non-finite entry in procrustes target".into(),
        ));
    }
    let svd = to_nalgebra(a).svd(true, true);
    let (m, nt) = match (svd.u, svd.v_t) {
        (Some(m), Some(nt)) => (m, nt),
        _ => return Err(Error::Numeric("svd did not return singular vectors".into())),
    };
    Ok(from_nalgebra(&(m * nt)))
}

/// Singular values of `a`, descending.
pub fn singular_values(a: ArrayView2<'_, f64>) -> Vec<f64> {
    let mut s: Vec<f64> = to_nalgebra(a).singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// `max |U^T U - I|` over all entries.
pub fn orthonormality_defect(u: ArrayView2<'_, f64>) -> f64 {
    let gram = u.t().dot(&u);
    gram.indexed_iter()
        .map(|((i, j), g)| (g - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_orthonormal_has_orthonormal_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_orthonormal(9, 4, &mut rng);
        assert_eq!(u.dim(), (9, 4));
        assert!(orthonormality_defect(u.view()) < 1e-12);
    }

    #[test]
    fn procrustes_of_zero_is_still_orthonormal() {
        let a = Array2::<f64>::zeros((5, 3));
        let u = procrustes(a.view()).unwrap();
        assert!(orthonormality_defect(u.view()) < 1e-10);
    }

    #[test]
    fn procrustes_rejects_wide_and_non_finite() {
        assert!(procrustes(Array2::<f64>::zeros((2, 3)).view()).is_err());
        let a = array![[f64::NAN, 0.0], [0.0, 1.0]];
        assert!(matches!(procrustes(a.view()), Err(Error::Numeric(_))));
    }
}
