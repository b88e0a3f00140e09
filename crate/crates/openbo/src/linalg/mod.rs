//! Dense complex linear algebra for small non-Hermitian problems.
//!
//! Everything here works with the *bilinear* pairing `⟨l, r⟩ = Σ_i l_i r_i`
//! (no conjugation): for a non-Hermitian matrix the left eigenvectors are
//! rows `l` with `l·A = λ·l`, and the spectral resolution reads
//! `A = Σ_n λ_n |r_n⟩⟨l_n|` once `⟨l_m, r_n⟩ = δ_mn`.

mod eig;
mod propagate;
mod roots;
mod solve;

pub use eig::{biorthonormalize, eig_general, EigOptions, Spectrum};
pub use propagate::{propagate, propagate_trace};
pub use roots::{solve_cubic, solve_quadratic, solve_quartic};
pub use solve::{inverse, lu_solve, LuFactors};

use crate::{C64, CMat, CVec};

/// Frobenius norm.
pub fn frob_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Bilinear pairing Σ_i l_i r_i (no conjugation).
pub fn pair(l: &CVec, r: &CVec) -> C64 {
    l.iter().zip(r.iter()).map(|(a, b)| a * b).sum()
}

/// Sesquilinear inner product Σ_i conj(a_i) b_i.
pub fn inner(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}
