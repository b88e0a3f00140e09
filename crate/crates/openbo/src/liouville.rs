//! Vectorization of density matrices and the doubled-space generator.
//!
//! A density matrix ρ on an N-dimensional space is flattened row-major into
//! a ket |Φ⟩ on the doubled space (component (m,n) ↦ index m·N + n; the
//! second factor is the "ancilla" copy). Under this map
//!
//!   Aρ  ↦ (A ⊗ I)|Φ⟩,    ρB ↦ (I ⊗ Bᵀ)|Φ⟩,
//!
//! so the full master equation ∂ρ = −i[H,ρ] + 𝓛ρ becomes a Schrödinger-like
//! equation i∂|Φ⟩ = H_T|Φ⟩ with the non-Hermitian
//!
//!   H_T = H ⊗ I − I ⊗ Hᵀ + i·vec(𝓛).
//!
//! For Hermitian H the ancilla block is −conj(H): the ancilla copy evolves
//! under the complex-conjugated dynamics, which is what makes the
//! Born-Oppenheimer treatment of the pair (system, ancilla) work out.

use crate::linalg::propagate;
use crate::{C64, CMat, CVec, Error, Result};

/// Kronecker product a ⊗ b.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = CMat::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij.norm() == 0.0 {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Row-major flattening ρ ↦ |Φ⟩, component (m,n) at index m·N + n.
pub fn vectorize(rho: &CMat) -> CVec {
    let n = rho.nrows();
    CVec::from_shape_fn(n * n, |k| rho[[k / n, k % n]])
}

/// Inverse of [`vectorize`]; the length must be a perfect square.
pub fn devectorize(phi: &CVec) -> Result<CMat> {
    let len = phi.len();
    let n = (len as f64).sqrt().round() as usize;
    if n * n != len {
        return Err(Error::DimensionMismatch(format!(
            "devectorize: length {len} is not a perfect square"
        )));
    }
    Ok(CMat::from_shape_fn((n, n), |(i, j)| phi[i * n + j]))
}

/// Operator acting on the ancilla copy: entrywise complex conjugate.
pub fn ancilla_conjugate(op: &CMat) -> CMat {
    op.mapv(|z| z.conj())
}

/// tr(op·rho).
pub fn expectation(op: &CMat, rho: &CMat) -> C64 {
    let m = op.dot(rho);
    (0..m.nrows()).map(|i| m[[i, i]]).sum()
}

/// Dissipative part of a master equation.
pub enum Dissipation {
    /// Σ_k (γ_k/2)(2 J_k ρ J_k† − {J_k†J_k, ρ}), rates γ_k ≥ 0.
    Lindblad(Vec<(f64, CMat)>),
    /// Symmetric quadratic form CρD + DρC − ½{DC + CD, ρ} with Hermitian
    /// C, D. Not of Lindblad form in general (positivity is only
    /// approximate), which is exactly the regime the validity measure is
    /// for.
    QuadraticPair { c: CMat, d: CMat },
}

fn hermiticity_error(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (a[[i, j]] - a[[j, i]].conj()).norm_sqr();
        }
    }
    s.sqrt()
}

impl Dissipation {
    /// Structural validation: nonnegative rates, Hermitian quadratic pair.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Dissipation::Lindblad(terms) => {
                for (k, (rate, jump)) in terms.iter().enumerate() {
                    if *rate < 0.0 || !rate.is_finite() {
                        return Err(Error::InvalidModel(format!(
                            "Lindblad rate {k} is {rate}"
                        )));
                    }
                    if jump.nrows() != dim || jump.ncols() != dim {
                        return Err(Error::DimensionMismatch(format!(
                            "jump operator {k} is {}x{}, system dim {dim}",
                            jump.nrows(),
                            jump.ncols()
                        )));
                    }
                }
            }
            Dissipation::QuadraticPair { c, d } => {
                for (name, m) in [("C", c), ("D", d)] {
                    if m.nrows() != dim || m.ncols() != dim {
                        return Err(Error::DimensionMismatch(format!(
                            "{name} is {}x{}, system dim {dim}",
                            m.nrows(),
                            m.ncols()
                        )));
                    }
                    let scale = crate::linalg::frob_norm(m).max(1.0);
                    if hermiticity_error(m) > 1e-10 * scale {
                        return Err(Error::InvalidModel(format!(
                            "{name} is not Hermitian"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// 𝓛ρ evaluated with plain matrix products (no doubled space).
    pub fn apply(&self, rho: &CMat) -> CMat {
        match self {
            Dissipation::Lindblad(terms) => {
                let mut out = CMat::zeros(rho.dim());
                for (rate, j) in terms {
                    let jd = j.t().mapv(|z| z.conj());
                    let jdj = jd.dot(j);
                    let term = j.dot(rho).dot(&jd).mapv(|z| 2.0 * z)
                        - rho.dot(&jdj)
                        - jdj.dot(rho);
                    out = out + term.mapv(|z| z * (rate / 2.0));
                }
                out
            }
            Dissipation::QuadraticPair { c, d } => {
                let dc = d.dot(c);
                let cd = c.dot(d);
                let anti = &dc + &cd;
                c.dot(rho).dot(d) + d.dot(rho).dot(c)
                    - (anti.dot(rho) + rho.dot(&anti)).mapv(|z| 0.5 * z)
            }
        }
    }

    /// The dissipator as a doubled-space block: `i·vec(𝓛)`, the
    /// anti-Hermitian contribution to the effective Hamiltonian.
    pub fn doubled_block(&self, dim: usize) -> CMat {
        let eye = CMat::eye(dim);
        let i = C64::new(0.0, 1.0);
        match self {
            Dissipation::Lindblad(terms) => {
                let mut out = CMat::zeros((dim * dim, dim * dim));
                for (rate, j) in terms {
                    let jd = j.t().mapv(|z| z.conj());
                    let jdj = jd.dot(j);
                    let jump_part = kron(j, &j.mapv(|z| z.conj()));
                    let sys = kron(&jdj, &eye);
                    let anc = kron(&eye, &jdj.t().to_owned());
                    out = out
                        + jump_part.mapv(|z| i * *rate * z)
                        - (sys + anc).mapv(|z| i * (*rate / 2.0) * z);
                }
                out
            }
            Dissipation::QuadraticPair { c, d } => {
                let dt = d.t().to_owned();
                let ct = c.t().to_owned();
                let anti = d.dot(c) + c.dot(d);
                let cross = kron(c, &dt) + kron(d, &ct);
                let sys = kron(&anti, &eye) + kron(&eye, &anti.t().to_owned());
                (cross - sys.mapv(|z| 0.5 * z)).mapv(|z| i * z)
            }
        }
    }
}

/// Effective doubled-space Hamiltonian split into its pieces.
pub struct EffectiveGenerator {
    /// H ⊗ I (system block).
    pub system: CMat,
    /// −I ⊗ Hᵀ (ancilla block; −I ⊗ conj(H) for Hermitian H).
    pub ancilla: CMat,
    /// i·vec(𝓛) (dissipative block).
    pub dissipative: CMat,
    /// Sum of the three.
    pub matrix: CMat,
}

/// Assemble H_T = H ⊗ I − I ⊗ Hᵀ + i·vec(𝓛) for a given system Hamiltonian.
pub fn effective_generator(h: &CMat, diss: &Dissipation) -> Result<EffectiveGenerator> {
    let dim = h.nrows();
    if h.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian is {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    diss.validate(dim)?;
    let eye = CMat::eye(dim);
    let system = kron(h, &eye);
    let ancilla = kron(&eye, &h.t().to_owned()).mapv(|z| -z);
    let dissipative = diss.doubled_block(dim);
    let matrix = &system + &ancilla + &dissipative;
    Ok(EffectiveGenerator {
        system,
        ancilla,
        dissipative,
        matrix,
    })
}

fn master_rhs(h: &CMat, diss: &Dissipation, rho: &CMat) -> CMat {
    let comm = h.dot(rho) - rho.dot(h);
    comm.mapv(|z| C64::new(0.0, -1.0) * z) + diss.apply(rho)
}

/// Integrate ∂ρ = −i[H(t),ρ] + 𝓛ρ directly on the matrix (RK4, fixed step).
/// This route never touches the doubled space and serves as an independent
/// cross-check of [`evolve_vectorized`].
pub fn evolve_direct(
    rho0: &CMat,
    mut h_of_t: impl FnMut(f64) -> CMat,
    diss: &Dissipation,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<CMat> {
    if steps == 0 {
        return Err(Error::InvalidModel("evolve_direct with zero steps".into()));
    }
    diss.validate(rho0.nrows())?;
    let dt = (t1 - t0) / steps as f64;
    let mut rho = rho0.clone();
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let h1 = h_of_t(t);
        let h2 = h_of_t(t + 0.5 * dt);
        let h3 = h_of_t(t + dt);
        let k1 = master_rhs(&h1, diss, &rho);
        let k2 = master_rhs(&h2, diss, &(&rho + &k1.mapv(|z| z * (0.5 * dt))));
        let k3 = master_rhs(&h2, diss, &(&rho + &k2.mapv(|z| z * (0.5 * dt))));
        let k4 = master_rhs(&h3, diss, &(&rho + &k3.mapv(|z| z * dt)));
        rho = &rho
            + &(k1 + k2.mapv(|z| 2.0 * z) + k3.mapv(|z| 2.0 * z) + k4).mapv(|z| z * (dt / 6.0));
        if rho.iter().any(|z| !z.re.is_finite() || z.norm() > 1e12) {
            return Err(Error::StepOverflow { t: t + dt });
        }
    }
    Ok(rho)
}

/// Integrate the same master equation through the doubled space: vectorize,
/// propagate under H_T, devectorize.
pub fn evolve_vectorized(
    rho0: &CMat,
    mut h_of_t: impl FnMut(f64) -> CMat,
    diss: &Dissipation,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<CMat> {
    let dim = rho0.nrows();
    diss.validate(dim)?;
    let eye = CMat::eye(dim);
    let l_diss = diss.doubled_block(dim);
    let phi0 = vectorize(rho0);
    let phi = propagate(
        |t| {
            let h = h_of_t(t);
            kron(&h, &eye) - kron(&eye, &h.t().to_owned()) + &l_diss
        },
        &phi0,
        t0,
        t1,
        steps,
    )?;
    devectorize(&phi)
}
