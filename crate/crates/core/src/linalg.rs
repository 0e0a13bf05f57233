//! Small dense linear algebra for the covariance bookkeeping.
//!
//! Vectors are plain `&[f64]` / `Vec<f64>`. Matrices are symmetric by
//! construction: the only ways to build a [`SymMat`] are the symmetric
//! constructors below and [`SymMat::rank_one_add`].

#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};

/// Pivots at or below this value are rejected by [`Cholesky::new`].
pub const PIVOT_FLOOR: f64 = 1e-14;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Dense symmetric `d x d` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat {
    dim: usize,
    data: Vec<f64>,
}

impl SymMat {
    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = scale;
        }
        Self { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn diag(entries: &[f64]) -> Self {
        let dim = entries.len();
        let mut data = vec![0.0; dim * dim];
        for (i, &e) in entries.iter().enumerate() {
            data[i * dim + i] = e;
        }
        Self { dim, data }
    }

    /// Builds a matrix from rows, rejecting input that is not square or not
    /// symmetric to 1e-12 relative tolerance. The stored matrix is the exact
    /// symmetrization `(m + m^T) / 2`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        for r in rows {
            check_dim(dim, r.len())?;
        }
        let scale = rows
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1.0);
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let (a, b) = (rows[i][j], rows[j][i]);
                if !a.is_finite() || (a - b).abs() > 1e-12 * scale {
                    return Err(Error::InvalidConfig(format!(
                        "matrix entry ({i},{j}) is not symmetric/finite"
                    )));
                }
                data[i * dim + j] = 0.5 * (a + b);
            }
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, v.len())?;
        Ok(self.data.chunks(self.dim).map(|row| dot(row, v)).collect())
    }

    /// `v^T m v`.
    pub fn quad_form(&self, v: &[f64]) -> Result<f64> {
        Ok(dot(&self.mul_vec(v)?, v))
    }

    /// Returns `self + c * v v^T`. Requires `c >= 0` so the result dominates
    /// `self` in the Loewner order.
    pub fn rank_one_add(&self, v: &[f64], c: f64) -> Result<Self> {
        check_dim(self.dim, v.len())?;
        debug_assert!(c >= 0.0, "rank-one coefficient must be nonnegative");
        let mut out = self.clone();
        if c == 0.0 {
            return Ok(out);
        }
        let n = self.dim;
        for i in 0..n {
            let ci = c * v[i];
            for j in i..n {
                let inc = ci * v[j];
                out.data[i * n + j] += inc;
                if j != i {
                    out.data[j * n + i] += inc;
                }
            }
        }
        Ok(out)
    }

    /// Entrywise `self - other + shift * I`.
    pub fn sub_shifted(&self, other: &SymMat, shift: f64) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(&other.data) {
            *o -= b;
        }
        for i in 0..self.dim {
            out.data[i * self.dim + i] += shift;
        }
        Ok(out)
    }

    pub fn cholesky(&self) -> Result<Cholesky> {
        Cholesky::new(self)
    }
}

/// Lower-triangular factor `L` with `L L^T = m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    pub fn new(m: &SymMat) -> Result<Self> {
        let n = m.dim;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = m.get(j, j);
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            // also rejects NaN
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(diag > PIVOT_FLOOR) {
                return Err(Error::NotPositiveDefinite {
                    pivot: j,
                    value: diag,
                });
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = m.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Self { dim: n, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.dim + j]
    }

    /// Returns `L L^T`.
    pub fn reconstruct(&self) -> SymMat {
        let n = self.dim;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..=j).map(|k| self.lower(i, k) * self.lower(j, k)).sum();
                data[i * n + j] = s;
                data[j * n + i] = s;
            }
        }
        SymMat { dim: n, data }
    }

    /// Solves `L y = b` in place.
    fn forward(&self, b: &mut [f64]) {
        let n = self.dim;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.lower[i * n + k] * b[k];
            }
            b[i] = s / self.lower[i * n + i];
        }
    }

    /// Solves `m x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, b.len())?;
        let n = self.dim;
        let mut x = b.to_vec();
        self.forward(&mut x);
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.lower[k * n + i] * x[k];
            }
            x[i] = s / self.lower[i * n + i];
        }
        Ok(x)
    }

    /// `||v||_{m^{-1}} = sqrt(v^T m^{-1} v)`, computed as `||L^{-1} v||_2`.
    pub fn elliptical_norm(&self, v: &[f64]) -> Result<f64> {
        check_dim(self.dim, v.len())?;
        let mut y = v.to_vec();
        self.forward(&mut y);
        Ok(norm2(&y))
    }
}

/// True when `a - b + tol * I` is positive definite, i.e. `a ⪰ b` up to `tol`.
pub fn loewner_geq(a: &SymMat, b: &SymMat, tol: f64) -> Result<bool> {
    match a.sub_shifted(b, tol)?.cholesky() {
        Ok(_) => Ok(true),
        Err(Error::NotPositiveDefinite { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn spd(n: usize, lambda: f64, vs: &[Vec<f64>]) -> SymMat {
        vs.iter().fold(SymMat::scaled_identity(n, lambda), |m, v| {
            m.rank_one_add(v, 1.0).unwrap()
        })
    }

    #[test]
    fn cholesky_examples() {
        let l = SymMat::diag(&[4.0, 1.0]).cholesky().unwrap();
        assert_eq!(l.reconstruct(), SymMat::diag(&[4.0, 1.0]));
        assert_eq!(l.lower(0, 0), 2.0);
        assert_eq!(l.lower(1, 1), 1.0);

        let l = SymMat::identity(3).cholesky().unwrap();
        assert_eq!(l.reconstruct(), SymMat::identity(3));

        let m = SymMat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let l = m.cholesky().unwrap();
        assert_abs_diff_eq!(l.lower(0, 0), std::f64::consts::SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(l.lower(1, 0), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(l.lower(1, 1), 1.22474, epsilon = 1e-5);
        assert_eq!(l.lower(0, 1), 0.0);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = SymMat::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            m.cholesky(),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
        assert!(matches!(
            SymMat::diag(&[1.0, 0.0]).cholesky(),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn from_rows_rejects_asymmetric() {
        assert!(SymMat::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).is_err());
        assert!(SymMat::from_rows(&[vec![1.0, 0.5]]).is_err());
    }

    #[test]
    fn solve_examples() {
        let id = SymMat::identity(2).cholesky().unwrap();
        assert_eq!(id.solve(&[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);

        let d = SymMat::diag(&[4.0, 1.0]).cholesky().unwrap();
        assert_eq!(d.solve(&[4.0, 1.0]).unwrap(), vec![1.0, 1.0]);

        let m = SymMat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let x = m.cholesky().unwrap().solve(&[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(x[0], 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x[1], 1.0 / 3.0, epsilon = 1e-14);

        assert_eq!(
            id.solve(&[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 3
            })
        );
    }

    #[test]
    fn elliptical_norm_examples() {
        let id = SymMat::identity(2).cholesky().unwrap();
        assert_abs_diff_eq!(id.elliptical_norm(&[3.0, 4.0]).unwrap(), 5.0, epsilon = 1e-14);

        let d = SymMat::diag(&[4.0, 1.0]).cholesky().unwrap();
        assert_abs_diff_eq!(d.elliptical_norm(&[2.0, 0.0]).unwrap(), 1.0, epsilon = 1e-14);

        let m = SymMat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let n = m.cholesky().unwrap().elliptical_norm(&[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(n, (2.0f64 / 3.0).sqrt(), epsilon = 1e-14);
        assert!(id.elliptical_norm(&[1.0]).is_err());
    }

    #[test]
    fn rank_one_add_examples() {
        let m = SymMat::identity(2).rank_one_add(&[2.0, 0.0], 0.25).unwrap();
        assert_eq!(m, SymMat::diag(&[2.0, 1.0]));

        let m0 = SymMat::from_rows(&[vec![3.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        assert_eq!(m0.rank_one_add(&[5.0, 7.0], 0.0).unwrap(), m0);

        let m = SymMat::diag(&[1.0, 1.0]).rank_one_add(&[1.0, 1.0], 1.0).unwrap();
        assert_eq!(m.rows(), vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
    }

    fn spd_case() -> impl Strategy<Value = (SymMat, Vec<f64>)> {
        (1usize..6).prop_flat_map(|n| {
            (
                1e-3f64..2.0,
                prop::collection::vec(prop::collection::vec(-1.0f64..1.0, n), 0..8),
                prop::collection::vec(-3.0f64..3.0, n),
            )
                .prop_map(move |(lambda, vs, x)| (spd(n, lambda, &vs), x))
        })
    }

    proptest! {
        #[test]
        fn norm_squared_matches_solve((m, v) in spd_case()) {
            let f = m.cholesky().unwrap();
            let n = f.elliptical_norm(&v).unwrap();
            let q = dot(&v, &f.solve(&v).unwrap());
            prop_assert!((n * n - q).abs() <= 1e-9 * q.abs().max(1e-300) + 1e-300);
        }

        #[test]
        fn reconstruction_round_trips((m, _v) in spd_case()) {
            let r = m.cholesky().unwrap().reconstruct();
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    prop_assert!((r.get(i, j) - m.get(i, j)).abs() <= 1e-10 * (1.0 + m.max_abs()));
                }
            }
        }

        #[test]
        fn solve_inverts_product((m, x) in spd_case()) {
            let b = m.mul_vec(&x).unwrap();
            let y = m.cholesky().unwrap().solve(&b).unwrap();
            for (a, e) in y.iter().zip(&x) {
                prop_assert!((a - e).abs() <= 1e-8);
            }
            let back = m.mul_vec(&y).unwrap();
            let resid = norm2(&sub(&back, &b));
            prop_assert!(resid <= 1e-10 * (1.0 + norm2(&b)));
        }

        #[test]
        fn rank_one_add_dominates((m, v) in spd_case(), c in 0.0f64..3.0, u in prop::collection::vec(-1.0f64..1.0, 6)) {
            let r = m.rank_one_add(&v, c).unwrap();
            let u = &u[..m.dim()];
            let nu = norm2(u);
            prop_assume!(nu > 1e-6);
            let u: Vec<f64> = u.iter().map(|x| x / nu).collect();
            prop_assert!(r.quad_form(&u).unwrap() >= m.quad_form(&u).unwrap() - 1e-12);
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    prop_assert_eq!(r.get(i, j), r.get(j, i));
                }
            }
        }
    }
}
