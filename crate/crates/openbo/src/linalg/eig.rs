//! General complex eigensolver with left eigenvectors.
//!
//! Small problems (n ≤ 4) go through the characteristic polynomial
//! (Faddeev–LeVerrier) and closed-form roots, then inverse iteration.
//! Larger problems use Householder–Hessenberg reduction and explicitly
//! shifted QR with Givens rotations (complex Schur form), with eigenvectors
//! recovered by back-substitution.
//!
//! Right eigenvectors are unit-norm columns of `R`; left eigenvectors are
//! the rows of `R⁻¹`, so `⟨l_m, r_n⟩ = δ_mn` holds exactly in the bilinear
//! pairing and the resolution `A = Σ λ_n r_n l_nᵀ` is numerically tight.

use crate::{C64, CMat, CVec, Error, Result};

use super::solve::{inverse, LuFactors};
use super::{frob_norm, inner, pair, vec_norm};
use super::roots::{solve_cubic, solve_quadratic, solve_quartic};

/// Controls for [`eig_general`].
#[derive(Clone, Copy, Debug)]
pub struct EigOptions {
    /// Residual target: require `‖A r - λ r‖ ≤ tol·‖A‖_F` per pair.
    pub tol: f64,
    /// Refuse spectra whose minimal eigenvalue gap is below
    /// `degeneracy_threshold·‖A‖_F` (labels would be ambiguous).
    pub strict: bool,
    /// Relative gap threshold used in strict mode.
    pub degeneracy_threshold: f64,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            strict: false,
            degeneracy_threshold: 1e-8,
        }
    }
}

/// Full bilinear eigendecomposition of a square complex matrix.
pub struct Spectrum {
    /// Eigenvalues, sorted by (Re, Im) for reproducibility.
    pub values: Vec<C64>,
    /// Unit-norm right eigenvectors, same order as `values`.
    pub rights: Vec<CVec>,
    /// Left eigenvectors (rows of the inverse of the right matrix):
    /// `l·A = λ l` and `⟨l_m, r_n⟩ = δ_mn`.
    pub lefts: Vec<CVec>,
    /// Minimal pairwise eigenvalue distance.
    pub gap: f64,
}

impl Spectrum {
    /// Index of the eigenvalue closest to `z`.
    pub fn closest(&self, z: C64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (i, v) in self.values.iter().enumerate() {
            let d = (v - z).norm();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        best
    }
}

/// Characteristic polynomial coefficients (monic, descending order) via
/// Faddeev–LeVerrier. Only used for n ≤ 4.
fn char_poly(a: &CMat) -> Vec<C64> {
    let n = a.nrows();
    let mut coeffs = vec![C64::new(1.0, 0.0)];
    let mut m = CMat::eye(n);
    for k in 1..=n {
        m = a.dot(&m);
        let tr: C64 = (0..n).map(|i| m[[i, i]]).sum();
        let c = -tr / (k as f64);
        coeffs.push(c);
        for i in 0..n {
            m[[i, i]] += c;
        }
    }
    coeffs
}

fn eigenvalues_small(a: &CMat) -> Vec<C64> {
    let c = char_poly(a);
    match a.nrows() {
        1 => vec![-c[1]],
        2 => solve_quadratic(c[0], c[1], c[2]).to_vec(),
        3 => solve_cubic(c[0], c[1], c[2], c[3]).to_vec(),
        4 => solve_quartic(c[0], c[1], c[2], c[3], c[4]).to_vec(),
        _ => unreachable!(),
    }
}

/// Deterministic start vector for inverse iteration (splitmix-style hash).
fn seeded_vector(n: usize, seed: u64) -> CVec {
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    let mut next = move || {
        state ^= state >> 30;
        state = state.wrapping_mul(0xbf58476d1ce4e5b9);
        state ^= state >> 27;
        state = state.wrapping_mul(0x94d049bb133111eb);
        state ^= state >> 31;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    CVec::from_shape_fn(n, |_| C64::new(next(), next()))
}

fn residual(a: &CMat, lam: C64, v: &CVec) -> f64 {
    let av = a.dot(v);
    let mut s = 0.0;
    for i in 0..v.len() {
        s += (av[i] - lam * v[i]).norm_sqr();
    }
    s.sqrt()
}

/// Inverse iteration with Rayleigh-quotient refinement for one eigenvalue
/// estimate. Returns (possibly improved eigenvalue, unit right vector).
fn inverse_iteration(a: &CMat, lam0: C64, seed: u64, scale: f64, tol: f64) -> Result<(C64, CVec)> {
    let n = a.nrows();
    let mut lam = lam0;
    let mut v = seeded_vector(n, seed);
    let nv = vec_norm(&v);
    v.mapv_inplace(|z| z / nv);
    let mut best: Option<(f64, C64, CVec)> = None;
    for it in 0..12 {
        // Slightly off-shift so the factorization never hits an exact zero.
        let sigma = lam + C64::new(1e-12 * scale, 1e-12 * scale);
        let mut shifted = a.clone();
        for i in 0..n {
            shifted[[i, i]] -= sigma;
        }
        let fac = LuFactors::new(&shifted)?;
        let x = match fac.solve(&v) {
            Ok(x) => x,
            Err(_) => {
                // Exactly singular even with the off-shift: nudge more.
                lam += C64::new(1e-9 * scale, 0.0);
                continue;
            }
        };
        let nx = vec_norm(&x);
        if !nx.is_finite() || nx == 0.0 {
            lam += C64::new(1e-9 * scale, 0.0);
            continue;
        }
        v = x.mapv(|z| z / nx);
        let r = residual(a, lam, &v);
        if best.as_ref().is_none_or(|(rb, _, _)| r < *rb) {
            best = Some((r, lam, v.clone()));
        }
        if r <= tol {
            return Ok((lam, v));
        }
        if it >= 2 {
            // Rayleigh refinement once the direction has settled.
            let av = a.dot(&v);
            let num = inner(&v, &av);
            let den = inner(&v, &v);
            lam = num / den;
        }
    }
    let (r, lam, v) = best.unwrap();
    if r <= tol {
        Ok((lam, v))
    } else {
        Err(Error::ConvergenceFailure {
            residual: r,
            iterations: 12,
        })
    }
}

/// Householder reduction to upper Hessenberg form; returns (H, Q) with
/// `A = Q H Q†`.
fn hessenberg(a: &CMat) -> (CMat, CMat) {
    let n = a.nrows();
    let mut h = a.clone();
    let mut q = CMat::eye(n);
    for k in 0..n.saturating_sub(2) {
        // Reflect column k below the subdiagonal to a multiple of e1.
        let mut x = CVec::zeros(n - k - 1);
        for i in 0..n - k - 1 {
            x[i] = h[[k + 1 + i, k]];
        }
        let xnorm = vec_norm(&x);
        if xnorm < 1e-300 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vn = vec_norm(&v);
        if vn < 1e-300 {
            continue;
        }
        v.mapv_inplace(|z| z / vn);
        // Apply P = I - 2 v v† on rows k+1.. and columns k+1.. of H, and on Q.
        for j in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for i in 0..v.len() {
                dot += v[i].conj() * h[[k + 1 + i, j]];
            }
            for i in 0..v.len() {
                let sub = 2.0 * v[i] * dot;
                h[[k + 1 + i, j]] -= sub;
            }
        }
        for i in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for j in 0..v.len() {
                dot += h[[i, k + 1 + j]] * v[j];
            }
            for j in 0..v.len() {
                let sub = 2.0 * dot * v[j].conj();
                h[[i, k + 1 + j]] -= sub;
            }
        }
        for i in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for j in 0..v.len() {
                dot += q[[i, k + 1 + j]] * v[j];
            }
            for j in 0..v.len() {
                let sub = 2.0 * dot * v[j].conj();
                q[[i, k + 1 + j]] -= sub;
            }
        }
    }
    (h, q)
}

/// Eigenvalue of the 2×2 block closest to its bottom-right entry
/// (Wilkinson shift).
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr = a + d;
    let det = a * d - b * c;
    let [l1, l2] = solve_quadratic(C64::new(1.0, 0.0), -tr, det);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Explicit-shift QR on a Hessenberg matrix, accumulating the unitary into
/// `z`. Returns the (upper triangular) Schur factor in place of `h`.
fn qr_schur(h: &mut CMat, z: &mut CMat) -> Result<()> {
    let n = h.nrows();
    let norm = frob_norm(h).max(1e-300);
    let eps = f64::EPSILON;
    let mut m = n;
    let mut iters_block = 0usize;
    let max_iters = 60 * n;
    let mut total = 0usize;
    while m > 1 {
        // Deflate when the trailing subdiagonal of the active block is tiny.
        let s = h[[m - 1, m - 2]].norm();
        if s <= eps * (h[[m - 1, m - 1]].norm() + h[[m - 2, m - 2]].norm() + norm * 1e-2) * 10.0 {
            h[[m - 1, m - 2]] = C64::new(0.0, 0.0);
            m -= 1;
            iters_block = 0;
            continue;
        }
        total += 1;
        iters_block += 1;
        if total > max_iters {
            return Err(Error::ConvergenceFailure {
                residual: s / norm,
                iterations: total,
            });
        }
        let mut sigma = wilkinson_shift(
            h[[m - 2, m - 2]],
            h[[m - 2, m - 1]],
            h[[m - 1, m - 2]],
            h[[m - 1, m - 1]],
        );
        if iters_block.is_multiple_of(12) {
            // Ad-hoc exceptional shift to break rare cycling.
            sigma += C64::new(1.5 * s, 0.5 * s);
        }
        // One explicit-shift QR sweep on the active block [0, m).
        for i in 0..m {
            h[[i, i]] -= sigma;
        }
        let mut rots: Vec<(C64, C64)> = Vec::with_capacity(m - 1);
        for k in 0..m - 1 {
            let a = h[[k, k]];
            let b = h[[k + 1, k]];
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (c, srot) = if r < 1e-300 {
                (C64::new(1.0, 0.0), C64::new(0.0, 0.0))
            } else {
                (a / r, b / r)
            };
            rots.push((c, srot));
            for j in k..n {
                let hk = h[[k, j]];
                let hk1 = h[[k + 1, j]];
                h[[k, j]] = c.conj() * hk + srot.conj() * hk1;
                h[[k + 1, j]] = -srot * hk + c * hk1;
            }
        }
        for (k, (c, srot)) in rots.iter().enumerate() {
            for i in 0..(k + 2).min(m) {
                let hk = h[[i, k]];
                let hk1 = h[[i, k + 1]];
                h[[i, k]] = hk * c + hk1 * srot;
                h[[i, k + 1]] = -hk * srot.conj() + hk1 * c.conj();
            }
            for i in 0..n {
                let zk = z[[i, k]];
                let zk1 = z[[i, k + 1]];
                z[[i, k]] = zk * c + zk1 * srot;
                z[[i, k + 1]] = -zk * srot.conj() + zk1 * c.conj();
            }
        }
        for i in 0..m {
            h[[i, i]] += sigma;
        }
    }
    Ok(())
}

/// Right eigenvectors of an upper triangular matrix by back-substitution,
/// rotated back through `z`.
fn triangular_eigvecs(t: &CMat, z: &CMat) -> Vec<(C64, CVec)> {
    let n = t.nrows();
    let norm = frob_norm(t).max(1e-300);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lam = t[[i, i]];
        let mut y = CVec::zeros(n);
        y[i] = C64::new(1.0, 0.0);
        for j in (0..i).rev() {
            let mut s = C64::new(0.0, 0.0);
            for k in j + 1..=i {
                s += t[[j, k]] * y[k];
            }
            let mut d = t[[j, j]] - lam;
            if d.norm() < 1e-14 * norm {
                // Degenerate diagonal entry: perturb so the substitution
                // stays bounded (the vector is refined by residual checks).
                d = C64::new(1e-14 * norm, 1e-14 * norm);
            }
            y[j] = -s / d;
        }
        let v = z.dot(&y);
        let nv = vec_norm(&v);
        out.push((lam, v.mapv(|w| w / nv)));
    }
    out
}

/// Eigendecomposition with left and right eigenvectors.
///
/// Eigenvalues are sorted by (Re, Im). Right vectors have unit Euclidean
/// norm; left vectors are the rows of the inverse of the right-vector
/// matrix, so biorthonormality is exact and a defective basis surfaces as
/// [`Error::SingularPairing`]. In strict mode a spectrum whose minimal gap
/// falls below `degeneracy_threshold·‖A‖_F` is rejected as
/// [`Error::NearDegenerate`].
pub fn eig_general(a: &CMat, opts: &EigOptions) -> Result<Spectrum> {
    let n = a.nrows();
    if a.ncols() != n || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "eig of {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = frob_norm(a).max(1e-300);
    let tol_abs = opts.tol * scale;

    let mut pairs: Vec<(C64, CVec)> = if n <= 4 {
        let vals = eigenvalues_small(a);
        let mut pairs = Vec::with_capacity(n);
        for (i, lam) in vals.into_iter().enumerate() {
            let (lam, v) = inverse_iteration(a, lam, 0x5eed_0000u64 + i as u64, scale, tol_abs)?;
            pairs.push((lam, v));
        }
        pairs
    } else {
        let (mut h, mut z) = hessenberg(a);
        qr_schur(&mut h, &mut z)?;
        let mut pairs = triangular_eigvecs(&h, &z);
        // Polish any pair whose residual is above target.
        for (i, (lam, v)) in pairs.iter_mut().enumerate() {
            if residual(a, *lam, v) > tol_abs {
                let (l2, v2) = inverse_iteration(a, *lam, 0xbeef_0000u64 + i as u64, scale, tol_abs)?;
                *lam = l2;
                *v = v2;
            }
        }
        pairs
    };

    pairs.sort_by(|(x, _), (y, _)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));

    for (lam, v) in &pairs {
        let r = residual(a, *lam, v);
        if r > tol_abs {
            return Err(Error::ConvergenceFailure {
                residual: r / scale,
                iterations: 0,
            });
        }
    }

    // Trace consistency: Σλ must match tr(A).
    let tr: C64 = (0..n).map(|i| a[[i, i]]).sum();
    let sum: C64 = pairs.iter().map(|(l, _)| *l).sum();
    if (tr - sum).norm() > 1e-8 * scale.max(1.0) {
        return Err(Error::ConvergenceFailure {
            residual: (tr - sum).norm() / scale,
            iterations: 0,
        });
    }

    let mut gap = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            gap = gap.min((pairs[i].0 - pairs[j].0).norm());
        }
    }
    if opts.strict && gap < opts.degeneracy_threshold * scale {
        return Err(Error::NearDegenerate {
            gap,
            threshold: opts.degeneracy_threshold * scale,
        });
    }

    let mut rmat = CMat::zeros((n, n));
    for (j, (_, v)) in pairs.iter().enumerate() {
        for i in 0..n {
            rmat[[i, j]] = v[i];
        }
    }
    let rinv = inverse(&rmat)?;
    let lefts: Vec<CVec> = (0..n).map(|i| rinv.row(i).to_owned()).collect();

    Ok(Spectrum {
        values: pairs.iter().map(|(l, _)| *l).collect(),
        rights: pairs.into_iter().map(|(_, v)| v).collect(),
        lefts,
        gap,
    })
}

/// Rescale a set of left vectors against given right vectors so that the
/// bilinear pairing matrix becomes the identity. The right vectors are left
/// untouched; the lefts are recombined by the inverse pairing matrix (for
/// true eigenvector inputs with distinct eigenvalues this is a per-vector
/// rescaling up to numerical noise).
pub fn biorthonormalize(rights: &[CVec], lefts: &[CVec]) -> Result<Vec<CVec>> {
    let n = rights.len();
    if lefts.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "biorthonormalize: {} rights vs {} lefts",
            n,
            lefts.len()
        )));
    }
    let mut s = CMat::zeros((n, n));
    for (m, l) in lefts.iter().enumerate() {
        for (k, r) in rights.iter().enumerate() {
            s[[m, k]] = pair(l, r);
        }
    }
    let sinv = inverse(&s)?;
    let dim = lefts[0].len();
    let mut out = Vec::with_capacity(n);
    for m in 0..n {
        let mut l = CVec::zeros(dim);
        for k in 0..n {
            let w = sinv[[m, k]];
            for i in 0..dim {
                l[i] += w * lefts[k][i];
            }
        }
        out.push(l);
    }
    Ok(out)
}
