//! Natural cubic regression spline basis with knots at covariate
//! quantiles and an integrated-squared-second-derivative penalty.
//!
//! Coefficients parameterize the spline by its values at the knots.
//! Second derivatives at interior knots follow from the natural
//! boundary conditions via `B d = D b`, giving the penalty `D'B^-1 D`
//! whose null space is exactly the linear functions. Evaluation beyond
//! the boundary knots extrapolates linearly.

use nalgebra::{DMatrix, DVector};

use super::GamError;

#[derive(Debug, Clone)]
pub struct SplineBasis {
    knots: Vec<f64>,
    /// k x k map from knot values to knot second derivatives; first and
    /// last rows are zero (natural conditions).
    curvature: DMatrix<f64>,
    penalty: DMatrix<f64>,
}

impl SplineBasis {
    /// Builds a k-function basis with knots at the quantiles of `x`.
    pub fn new(x: &[f64], k: usize) -> Result<SplineBasis, GamError> {
        if k < 3 {
            return Err(GamError::BasisTooSmall { k });
        }
        let mut unique: Vec<f64> = x.to_vec();
        unique.sort_by(|a, b| a.partial_cmp(b).expect("finite covariate"));
        unique.dedup();
        let m = unique.len();
        if m < k {
            return Err(GamError::InsufficientDistinctValues { have: m, need: k });
        }
        let knots: Vec<f64> = (0..k).map(|i| unique[i * (m - 1) / (k - 1)]).collect();
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();

        let interior = k - 2;
        let mut b = DMatrix::zeros(interior, interior);
        let mut d = DMatrix::zeros(interior, k);
        for r in 0..interior {
            b[(r, r)] = (h[r] + h[r + 1]) / 3.0;
            if r + 1 < interior {
                b[(r, r + 1)] = h[r + 1] / 6.0;
                b[(r + 1, r)] = h[r + 1] / 6.0;
            }
            d[(r, r)] = 1.0 / h[r];
            d[(r, r + 1)] = -1.0 / h[r] - 1.0 / h[r + 1];
            d[(r, r + 2)] = 1.0 / h[r + 1];
        }
        let chol = b.clone().cholesky().expect("B is positive definite");
        let b_inv_d = chol.solve(&d);

        let mut curvature = DMatrix::zeros(k, k);
        for r in 0..interior {
            for c in 0..k {
                curvature[(r + 1, c)] = b_inv_d[(r, c)];
            }
        }
        let mut penalty = d.transpose() * &b_inv_d;
        // symmetrize away rounding noise
        penalty = (&penalty + penalty.transpose()) * 0.5;

        Ok(SplineBasis {
            knots,
            curvature,
            penalty,
        })
    }

    pub fn k(&self) -> usize {
        self.knots.len()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn penalty(&self) -> &DMatrix<f64> {
        &self.penalty
    }

    fn h(&self, j: usize) -> f64 {
        self.knots[j + 1] - self.knots[j]
    }

    /// Basis function values at one point (a length-k row).
    pub fn row(&self, x: f64) -> DVector<f64> {
        let k = self.k();
        let mut row = DVector::zeros(k);
        let first = self.knots[0];
        let last = self.knots[k - 1];
        if x <= first {
            row[0] = 1.0;
            let slope = self.boundary_slope_row(true);
            return row + slope * (x - first);
        }
        if x >= last {
            row[k - 1] = 1.0;
            let slope = self.boundary_slope_row(false);
            return row + slope * (x - last);
        }
        let j = self.knots.partition_point(|&t| t <= x) - 1;
        let h = self.h(j);
        let below = self.knots[j + 1] - x;
        let above = x - self.knots[j];
        let c_minus = (below.powi(3) / h - h * below) / 6.0;
        let c_plus = (above.powi(3) / h - h * above) / 6.0;
        row[j] = below / h;
        row[j + 1] = above / h;
        for c in 0..k {
            row[c] += c_minus * self.curvature[(j, c)] + c_plus * self.curvature[(j + 1, c)];
        }
        row
    }

    /// Gradient of the spline value with respect to coefficients, taken
    /// at a boundary knot; defines the linear extrapolation.
    fn boundary_slope_row(&self, left: bool) -> DVector<f64> {
        let k = self.k();
        let mut slope = DVector::zeros(k);
        if left {
            let h = self.h(0);
            slope[0] = -1.0 / h;
            slope[1] = 1.0 / h;
            for c in 0..k {
                slope[c] -= h / 6.0 * self.curvature[(1, c)];
            }
        } else {
            let h = self.h(k - 2);
            slope[k - 1] = 1.0 / h;
            slope[k - 2] = -1.0 / h;
            for c in 0..k {
                slope[c] += h / 6.0 * self.curvature[(k - 2, c)];
            }
        }
        slope
    }

    /// n x k model matrix over the given points.
    pub fn design(&self, xs: &[f64]) -> DMatrix<f64> {
        let k = self.k();
        let mut design = DMatrix::zeros(xs.len(), k);
        for (i, &x) in xs.iter().enumerate() {
            let row = self.row(x);
            for c in 0..k {
                design[(i, c)] = row[c];
            }
        }
        design
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(matches!(
            SplineBasis::new(&grid(30, 0.0, 1.0), 2),
            Err(GamError::BasisTooSmall { k: 2 })
        ));
        assert!(matches!(
            SplineBasis::new(&[1.0, 2.0, 2.0, 1.0], 4),
            Err(GamError::InsufficientDistinctValues { have: 2, need: 4 })
        ));
    }

    #[test]
    fn knots_sit_at_quantiles() {
        let x = grid(101, 0.0, 10.0);
        let basis = SplineBasis::new(&x, 5).unwrap();
        assert_eq!(basis.knots(), [0.0, 2.5, 5.0, 7.5, 10.0]);
        for pair in basis.knots().windows(2) {
            assert!(pair[0] < pair[1]);
        }
    }

    #[test]
    fn penalty_is_symmetric_positive_semidefinite() {
        let x = grid(40, -2.0, 3.0);
        let basis = SplineBasis::new(&x, 8).unwrap();
        let s = basis.penalty();
        for i in 0..8 {
            for j in 0..8 {
                assert!((s[(i, j)] - s[(j, i)]).abs() < 1e-12);
            }
        }
        let eigen = s.clone().symmetric_eigenvalues();
        for &ev in eigen.iter() {
            assert!(ev >= -1e-10, "negative eigenvalue {ev}");
        }
        // exactly two null directions: constants and linears
        let near_zero = eigen.iter().filter(|&&ev| ev.abs() < 1e-8).count();
        assert_eq!(near_zero, 2);
    }

    #[test]
    fn penalty_annihilates_linear_coefficients() {
        let x = grid(25, 0.0, 5.0);
        let basis = SplineBasis::new(&x, 7).unwrap();
        let s = basis.penalty();
        for (a, b) in [(1.0, 0.0), (0.0, 2.0), (-3.0, 0.7)] {
            let beta = DVector::from_iterator(7, basis.knots().iter().map(|&t| a + b * t));
            let quad = (beta.transpose() * s * &beta)[(0, 0)];
            assert!(quad.abs() < 1e-8, "penalty on linear = {quad}");
        }
        // a genuinely curved coefficient vector is penalized
        let beta = DVector::from_iterator(7, basis.knots().iter().map(|&t| t * t));
        let quad = (beta.transpose() * s * &beta)[(0, 0)];
        assert!(quad > 1e-6);
    }

    #[test]
    fn reproduces_constants_and_linears_everywhere() {
        let x = grid(30, 0.0, 6.0);
        let basis = SplineBasis::new(&x, 6).unwrap();
        let ones = DVector::from_element(6, 1.0);
        let linear = DVector::from_iterator(6, basis.knots().iter().map(|&t| 2.0 - 0.5 * t));
        // interior, at knots, and beyond both boundaries
        for &p in grid(50, -2.0, 8.0).iter() {
            let row = basis.row(p);
            assert!((row.dot(&ones) - 1.0).abs() < 1e-10, "constant at {p}");
            assert!(
                (row.dot(&linear) - (2.0 - 0.5 * p)).abs() < 1e-10,
                "linear at {p}"
            );
        }
    }

    #[test]
    fn interpolates_knot_values_exactly() {
        let x = grid(40, 0.0, 1.0);
        let basis = SplineBasis::new(&x, 6).unwrap();
        // evaluated at a knot, the basis row is the matching unit vector
        for (j, &t) in basis.knots().iter().enumerate() {
            let row = basis.row(t);
            for c in 0..6 {
                let expected = if c == j { 1.0 } else { 0.0 };
                assert!((row[c] - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn least_squares_reproduces_a_cubic_at_the_knots() {
        // with knots at every distinct site the design interpolates, so
        // a least-squares fit passes through arbitrary cubic values
        let sites = grid(6, 0.0, 2.0);
        let mut x = Vec::new();
        for &s in &sites {
            for _ in 0..4 {
                x.push(s);
            }
        }
        let basis = SplineBasis::new(&x, 6).unwrap();
        let design = basis.design(&x);
        let cubic = |t: f64| 1.0 + 2.0 * t - t * t + 0.5 * t * t * t;
        let y = DVector::from_iterator(x.len(), x.iter().map(|&t| cubic(t)));
        let xtx = design.transpose() * &design;
        let xty = design.transpose() * &y;
        let beta = xtx.cholesky().unwrap().solve(&xty);
        let fitted = design * beta;
        for (f, o) in fitted.iter().zip(y.iter()) {
            assert!((f - o).abs() < 1e-6, "residual {}", f - o);
        }
    }

    #[test]
    fn extrapolation_is_linear() {
        let x = grid(30, 0.0, 1.0);
        let basis = SplineBasis::new(&x, 5).unwrap();
        let beta = DVector::from_iterator(5, basis.knots().iter().map(|&t| (3.0 * t).sin()));
        let value = |p: f64| basis.row(p).dot(&beta);
        // beyond each boundary, finite differences of the value are constant
        for (a, b, c) in [(-1.0, -0.6, -0.2), (1.2, 1.6, 2.0)] {
            let d1 = (value(b) - value(a)) / (b - a);
            let d2 = (value(c) - value(b)) / (c - b);
            assert!((d1 - d2).abs() < 1e-9, "slopes {d1} vs {d2}");
        }
    }
}
