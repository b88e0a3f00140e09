//! LU factorization with partial pivoting for complex matrices.

use crate::{C64, CMat, CVec, Error, Result};

/// Packed LU factors of a square matrix, with the row permutation.
pub struct LuFactors {
    lu: CMat,
    perm: Vec<usize>,
    /// Smallest pivot magnitude encountered; a proxy for conditioning.
    pub min_pivot: f64,
}

impl LuFactors {
    pub fn new(a: &CMat) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "LU of non-square {}x{} matrix",
                a.nrows(),
                a.ncols()
            )));
        }
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let mut imax = k;
            let mut vmax = lu[[k, k]].norm();
            for i in k + 1..n {
                let v = lu[[i, k]].norm();
                if v > vmax {
                    vmax = v;
                    imax = i;
                }
            }
            if imax != k {
                perm.swap(k, imax);
                for j in 0..n {
                    let tmp = lu[[k, j]];
                    lu[[k, j]] = lu[[imax, j]];
                    lu[[imax, j]] = tmp;
                }
            }
            let pivot = lu[[k, k]];
            min_pivot = min_pivot.min(pivot.norm());
            if pivot.norm() == 0.0 {
                // Exactly singular: leave the zero pivot; solves against this
                // column will fail loudly through min_pivot.
                continue;
            }
            for i in k + 1..n {
                let f = lu[[i, k]] / pivot;
                lu[[i, k]] = f;
                for j in k + 1..n {
                    let sub = f * lu[[k, j]];
                    lu[[i, j]] -= sub;
                }
            }
        }
        Ok(Self { lu, perm, min_pivot })
    }

    pub fn solve(&self, b: &CVec) -> Result<CVec> {
        let n = self.lu.nrows();
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "solve: matrix dim {n}, rhs dim {}",
                b.len()
            )));
        }
        let mut x = CVec::zeros(n);
        for i in 0..n {
            let mut s = b[self.perm[i]];
            for j in 0..i {
                s -= self.lu[[i, j]] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[[i, j]] * x[j];
            }
            let d = self.lu[[i, i]];
            if d.norm() == 0.0 {
                return Err(Error::SingularPairing { pivot: 0.0 });
            }
            x[i] = s / d;
        }
        Ok(x)
    }
}

/// Solve `A x = b` for a single right-hand side.
pub fn lu_solve(a: &CMat, b: &CVec) -> Result<CVec> {
    LuFactors::new(a)?.solve(b)
}

/// Matrix inverse via LU; errors on (numerically) singular input.
pub fn inverse(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let fac = LuFactors::new(a)?;
    let scale = super::frob_norm(a).max(1.0);
    if fac.min_pivot < 1e-14 * scale {
        return Err(Error::SingularPairing {
            pivot: fac.min_pivot,
        });
    }
    let mut inv = CMat::zeros((n, n));
    for j in 0..n {
        let mut e = CVec::zeros(n);
        e[j] = C64::new(1.0, 0.0);
        let col = fac.solve(&e)?;
        for i in 0..n {
            inv[[i, j]] = col[i];
        }
    }
    Ok(inv)
}
