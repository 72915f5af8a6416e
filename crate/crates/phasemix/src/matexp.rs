//! Matrix exponential via scaling-and-squaring with a Padé(13) rational core
//! (Higham 2005). The matrices here are small sub-intensity blocks, so the
//! implementation favors robustness over blocking tricks.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Padé(13,13) numerator coefficients.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371_920_351_148_152;

fn one_norm(a: &DMatrix<f64>) -> f64 {
    let mut max = 0.0f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|v| v.abs()).sum();
        max = max.max(s);
    }
    max
}

/// Compute exp(A) for a square real matrix.
pub fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::MatexpFailure("matrix is not square".into()));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if n == 1 {
        return Ok(DMatrix::from_element(1, 1, a[(0, 0)].exp()));
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::MatexpFailure("matrix has non-finite entries".into()));
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    if squarings > 60 {
        return Err(Error::MatexpFailure(format!(
            "norm {norm:.3e} requires {squarings} squarings"
        )));
    }
    let a_scaled = a / 2f64.powi(squarings as i32);

    let eye = DMatrix::identity(n, n);
    let a2 = &a_scaled * &a_scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let w1 = &a6 * PADE13[13] + &a4 * PADE13[11] + &a2 * PADE13[9];
    let w2 = &w1 * &a6 + &a6 * PADE13[7] + &a4 * PADE13[5] + &a2 * PADE13[3] + &eye * PADE13[1];
    let u = &a_scaled * w2;
    let v1 = &a6 * PADE13[12] + &a4 * PADE13[10] + &a2 * PADE13[8];
    let v = &v1 * &a6 + &a6 * PADE13[6] + &a4 * PADE13[4] + &a2 * PADE13[2] + &eye * PADE13[0];

    let p = &v + &u;
    let q = &v - &u;
    let lu = q.lu();
    let mut result = lu
        .solve(&p)
        .ok_or_else(|| Error::MatexpFailure("Pade denominator is singular".into()))?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    if result.iter().any(|v| !v.is_finite()) {
        return Err(Error::MatexpFailure(
            "result contains non-finite entries".into(),
        ));
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) {
        assert_eq!(a.shape(), b.shape());
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                assert!(
                    (a[(i, j)] - b[(i, j)]).abs() < tol,
                    "entry ({i},{j}): {} vs {}",
                    a[(i, j)],
                    b[(i, j)]
                );
            }
        }
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = DMatrix::<f64>::zeros(3, 3);
        close(&expm(&z).unwrap(), &DMatrix::identity(3, 3), 1e-14);
    }

    #[test]
    fn exp_of_diagonal() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -2.0]));
        let e = expm(&d).unwrap();
        let want = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            (-1.0f64).exp(),
            (-2.0f64).exp(),
        ]));
        close(&e, &want, 1e-14);
    }

    #[test]
    fn exp_of_jordan_block() {
        // exp([[a,1],[0,a]]) = e^a [[1,1],[0,1]]
        let a = -0.5;
        let m = DMatrix::from_row_slice(2, 2, &[a, 1.0, 0.0, a]);
        let e = expm(&m).unwrap();
        let ea = a.exp();
        let want = DMatrix::from_row_slice(2, 2, &[ea, ea, 0.0, ea]);
        close(&e, &want, 1e-14);
    }

    #[test]
    fn large_norm_requires_scaling() {
        let m = DMatrix::from_row_slice(2, 2, &[-120.0, 120.0, 0.0, -120.0]);
        let e = expm(&m).unwrap();
        // Row sums of e^{Lambda t} stay in [0, 1] for sub-intensity matrices.
        let ones = nalgebra::DVector::from_element(2, 1.0);
        let tail = &e * ones;
        assert!(tail[0] >= 0.0 && tail[0] <= 1.0);
        assert!(tail[1] >= 0.0 && tail[1] <= 1.0);
    }

    #[test]
    fn semigroup_property() {
        let m = DMatrix::from_row_slice(3, 3, &[-2.0, 1.0, 0.5, 0.3, -1.5, 0.2, 0.0, 0.7, -1.0]);
        let e1 = expm(&m).unwrap();
        let e2 = expm(&(&m * 2.0)).unwrap();
        close(&(&e1 * &e1), &e2, 1e-12);
    }
}
