//! q-arithmetic primitives, series coefficients and the global tolerance policy.
//!
//! Everything downstream is an operator-norm statement with an explicit
//! tolerance, so plain `f64` arithmetic is enough here. The tolerance policy
//! lives in [`QParams`]: truncated q^N-type operators have entries of size
//! q^(d-m) past the interior cut, and relation defects caused purely by the
//! cut-off must not be reported as failures.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScalarsError {
    #[error("q must lie in (0,1), got {0}")]
    QOutOfRange(f64),
    #[error("truncation dimension must be >= 4, got {0}")]
    DimTooSmall(usize),
    #[error("interior margin {margin} must be smaller than the dimension {dim}")]
    MarginTooLarge { margin: usize, dim: usize },
    #[error("tolerance {tol} is below the truncation floor {floor}")]
    TolBelowFloor { tol: f64, floor: f64 },
}

/// Deformation parameter, truncation sizes and tolerance for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QParams {
    pub q: f64,
    /// Cut-off dimension of every tensor factor.
    pub trunc_dim: usize,
    /// Basis indices reserved at the truncation boundary; interior
    /// compressions keep factor indices below `trunc_dim - interior_margin`.
    pub interior_margin: usize,
    pub tol: f64,
}

/// `max(1e-10, 10 * q^(2(d-m)))`; the floor every tolerance must respect.
pub fn tol_policy(q: f64, trunc_dim: usize, interior_margin: usize) -> f64 {
    let exponent = 2.0 * (trunc_dim - interior_margin) as f64;
    (10.0 * q.powf(exponent)).max(1e-10)
}

impl QParams {
    /// Parameters with the default tolerance given by [`tol_policy`].
    pub fn new(q: f64, trunc_dim: usize, interior_margin: usize) -> Result<Self, ScalarsError> {
        let tol = tol_policy(q, trunc_dim, interior_margin);
        Self::with_tol(q, trunc_dim, interior_margin, tol)
    }

    pub fn with_tol(
        q: f64,
        trunc_dim: usize,
        interior_margin: usize,
        tol: f64,
    ) -> Result<Self, ScalarsError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(ScalarsError::QOutOfRange(q));
        }
        if trunc_dim < 4 {
            return Err(ScalarsError::DimTooSmall(trunc_dim));
        }
        if interior_margin >= trunc_dim {
            return Err(ScalarsError::MarginTooLarge {
                margin: interior_margin,
                dim: trunc_dim,
            });
        }
        let floor = tol_policy(q, trunc_dim, interior_margin);
        if tol < floor {
            return Err(ScalarsError::TolBelowFloor { tol, floor });
        }
        Ok(QParams {
            q,
            trunc_dim,
            interior_margin,
            tol,
        })
    }

    /// Same q, different truncation data, tolerance recomputed by policy.
    pub fn resized(&self, trunc_dim: usize, interior_margin: usize) -> Result<Self, ScalarsError> {
        Self::new(self.q, trunc_dim, interior_margin)
    }
}

/// The symmetric q-integer `[a]_q = (q^a - q^{-a}) / (q - q^{-1})`.
pub fn q_int(a: i64, q: f64) -> f64 {
    let af = a as f64;
    (q.powf(af) - q.powf(-af)) / (q - 1.0 / q)
}

/// l-th coefficient of the binomial expansion of sqrt(1-x), scaled by q^{2l}:
/// `q^{2l} (2l)! / (4^l (l!)^2 (2l-1))`.
///
/// With these coefficients, `sqrt(1-x) = -sum_l c_l (x/q^2)^l ...` reads as
/// `sqrt(1 - q^2 y) = -sum_l sqrt_series_coeff(l, q) y^l`; the factorial
/// ratio is accumulated incrementally so no intermediate overflows.
pub fn sqrt_series_coeff(l: u32, q: f64) -> f64 {
    // ratio_l = (2l)! / (4^l (l!)^2) satisfies ratio_0 = 1,
    // ratio_{l} = ratio_{l-1} * (2l-1) / (2l).
    let mut ratio = 1.0_f64;
    for k in 1..=l {
        ratio *= (2.0 * k as f64 - 1.0) / (2.0 * k as f64);
    }
    q.powi(2 * l as i32) * ratio / (2.0 * l as f64 - 1.0)
}

/// Highest-weight ladder coefficients:
/// `A1[0] = -q^{-2n+1} [n]_q`, `A1[n] = -q [n]_q`, `A1[i] = -q^{n-i+1} [i]_q`,
/// `A2[i] = -q^{3i-2n+1} [n-i]_q` for `1 <= i <= n-1`.
///
/// `A2` is indexed so that `a2[i]` is meaningful for `1 <= i <= n-1`
/// (index 0 is unused and set to NaN-free 0).
pub fn hw_coefficients(n: u32, q: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rank parameter must be >= 1");
    let nf = n as i64;
    let mut a1 = vec![0.0; n as usize + 1];
    let mut a2 = vec![0.0; n as usize];
    a1[0] = -q.powi((-2 * nf + 1) as i32) * q_int(nf, q);
    a1[n as usize] = -q * q_int(nf, q);
    for i in 1..n as usize {
        a1[i] = -q.powi((nf - i as i64 + 1) as i32) * q_int(i as i64, q);
        a2[i] = -q.powi((3 * i as i64 - 2 * nf + 1) as i32) * q_int(nf - i as i64, q);
    }
    (a1, a2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn q_int_definition_collapses_at_one() {
        for &q in &[0.3, 0.5, 0.7, 0.9] {
            assert!((q_int(1, q) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn q_int_two_factors() {
        for &q in &[0.3, 0.5, 0.7] {
            assert!((q_int(2, q) - (q + 1.0 / q)).abs() < 1e-13);
        }
    }

    #[test]
    fn q_int_three_at_half() {
        // direct evaluation of the defining quotient
        assert!((q_int(3, 0.5) - 5.25).abs() < 1e-12);
    }

    #[test]
    fn q_int_is_odd() {
        for a in -6..=6i64 {
            for &q in &[0.3, 0.55, 0.8] {
                assert!((q_int(a, q) + q_int(-a, q)).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn sqrt_coeff_low_orders() {
        // l = 0: 0!/(1*1*(-1)) = -1
        assert!((sqrt_series_coeff(0, 0.5) + 1.0).abs() < 1e-15);
        // l = 1: q^2 * 2/(4*1*1) = q^2/2
        for &q in &[0.3, 0.5, 0.7] {
            assert!((sqrt_series_coeff(1, q) - q * q / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sqrt_series_partial_sums_converge_on_grid() {
        // sqrt(1-x) = -sum_l coeff_l(sqrt(x)) for x in [0, q^2]; the residual
        // must decay monotonically in the cutoff.
        let q: f64 = 0.7;
        for step in 0..=20 {
            let x = q * q * step as f64 / 20.0;
            let sq = x.sqrt();
            let mut prev = f64::INFINITY;
            for cutoff in [2u32, 4, 8, 16, 32] {
                let mut sum = 0.0;
                for l in 0..=cutoff {
                    sum += sqrt_series_coeff(l, sq);
                }
                let residual = ((1.0 - x).sqrt() + sum).abs();
                assert!(residual <= prev + 1e-15);
                prev = residual;
            }
            assert!(prev < 1e-6, "residual {prev} too large at x={x}");
        }
    }

    #[test]
    fn hw_coefficients_rank_one() {
        let q = 0.5;
        let (a1, _) = hw_coefficients(1, q);
        assert!((a1[0] + 1.0 / q).abs() < 1e-14);
        assert!((a1[1] + q).abs() < 1e-14);
    }

    #[test]
    fn hw_coefficients_rank_two_interior() {
        // A1^1 = -q^2 [1]_q = -0.25 at q = 0.5
        let (a1, _) = hw_coefficients(2, 0.5);
        assert!((a1[1] + 0.25).abs() < 1e-14);
    }

    #[test]
    fn hw_coefficients_all_negative() {
        for n in 1..=6u32 {
            for &q in &[0.3, 0.5, 0.7] {
                let (a1, a2) = hw_coefficients(n, q);
                for &v in &a1 {
                    assert!(v < 0.0 && v.is_finite());
                }
                for &v in a2.iter().skip(1) {
                    assert!(v < 0.0 && v.is_finite());
                }
            }
        }
    }

    #[test]
    fn params_reject_bad_input() {
        assert!(QParams::new(1.0, 16, 6).is_err());
        assert!(QParams::new(0.5, 3, 1).is_err());
        assert!(QParams::new(0.5, 8, 8).is_err());
        assert!(QParams::with_tol(0.5, 16, 6, 1e-14).is_err());
        assert!(QParams::new(0.5, 16, 6).is_ok());
    }

    proptest! {
        #[test]
        fn q_int_odd_property(a in -12i64..12, q in 0.05f64..0.95) {
            let s = q_int(a, q) + q_int(-a, q);
            prop_assert!(s.abs() < 1e-9);
        }

        #[test]
        fn tol_floor_respected(q in 0.05f64..0.95, d in 6usize..24, m in 0usize..6) {
            let p = QParams::new(q, d, m).unwrap();
            prop_assert!(p.tol >= 1e-10);
            prop_assert!(p.tol >= q.powf(2.0*(d - m) as f64) * 10.0 - 1e-25);
        }
    }
}
