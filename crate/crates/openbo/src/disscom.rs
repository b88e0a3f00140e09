//! Dissipative position monitoring of a harmonic particle.
//!
//! A particle whose position is continuously monitored picks up the
//! (non-Lindblad) generator
//!
//!   𝓛ρ = γ₁(2xρx − ρx² − x²ρ) + γ₂(xpρ + ρpx − xρp − pρx),
//!
//! the second group being the friction-like cross term. With C = √γ₁·x and
//! D = √γ₁·x − (γ₂/√γ₁)·p the same generator takes the symmetric quadratic
//! form CρD + DρC − ½{DC + CD, ρ} *as an operator identity on [x,p] = i*;
//! in a truncated oscillator ladder basis the identity holds on the
//! interior block only (the top two ladder states feel the truncation of
//! the commutator), which is why the direct γ-form below is the normative
//! one and the quadratic pair serves as a cross-check.
//!
//! Everything is in oscillator units (ħ = m = ω = 1).

use crate::liouville::{expectation, kron, Dissipation};
use crate::bo::{validity_report, Channel, ValidityReport};
use crate::{C64, CMat, CVec, Error, Result};

/// Ladder-basis position and momentum matrices on `n_max` states:
/// x = (a + a†)/√2, p = i(a† − a)/√2.
pub fn xp_matrices(n_max: usize) -> (CMat, CMat) {
    let mut x = CMat::zeros((n_max, n_max));
    let mut p = CMat::zeros((n_max, n_max));
    for n in 1..n_max {
        let c = (n as f64).sqrt() / 2f64.sqrt();
        x[[n - 1, n]] = C64::new(c, 0.0);
        x[[n, n - 1]] = C64::new(c, 0.0);
        p[[n - 1, n]] = C64::new(0.0, -c);
        p[[n, n - 1]] = C64::new(0.0, c);
    }
    (x, p)
}

/// The monitoring pair C = √γ₁·x, D = √γ₁·x − (γ₂/√γ₁)·p.
pub fn build_cd(gamma1: f64, gamma2: f64, n_max: usize) -> Result<(CMat, CMat)> {
    if gamma1 <= 0.0 || !gamma1.is_finite() {
        return Err(Error::InvalidModel(format!(
            "monitoring rate gamma1 must be positive, got {gamma1}"
        )));
    }
    if gamma2 < 0.0 || !gamma2.is_finite() {
        return Err(Error::InvalidModel(format!(
            "cross rate gamma2 must be nonnegative, got {gamma2}"
        )));
    }
    let (x, p) = xp_matrices(n_max);
    let s = gamma1.sqrt();
    let c = x.mapv(|z| z * s);
    let d = &c - &p.mapv(|z| z * (gamma2 / s));
    Ok((c, d))
}

/// Direct action of the monitoring generator (the normative form).
pub fn disscom_rhs(rho: &CMat, gamma1: f64, gamma2: f64) -> CMat {
    let n = rho.nrows();
    let (x, p) = xp_matrices(n);
    let x2 = x.dot(&x);
    let xp = x.dot(&p);
    let px = p.dot(&x);
    let t1 = (x.dot(rho).dot(&x).mapv(|z| 2.0 * z) - rho.dot(&x2) - x2.dot(rho))
        .mapv(|z| z * gamma1);
    let t2 = (xp.dot(rho) + rho.dot(&px) - x.dot(rho).dot(&p) - p.dot(rho).dot(&x))
        .mapv(|z| z * gamma2);
    t1 + t2
}

/// Doubled-space dissipative block `L_C = i·vec(𝓛)` built from the direct
/// γ-form (exact at every truncation, including the edge states).
pub fn build_lc(gamma1: f64, gamma2: f64, n_max: usize) -> CMat {
    let (x, p) = xp_matrices(n_max);
    let eye = CMat::eye(n_max);
    let x2 = x.dot(&x);
    let xp = x.dot(&p);
    let px = p.dot(&x);
    let g1 = kron(&x, &x.t().to_owned()).mapv(|z| 2.0 * z)
        - kron(&eye, &x2.t().to_owned())
        - kron(&x2, &eye);
    let g2 = kron(&xp, &eye) + kron(&eye, &px.t().to_owned())
        - kron(&x, &p.t().to_owned())
        - kron(&p, &x.t().to_owned());
    (g1.mapv(|z| z * gamma1) + g2.mapv(|z| z * gamma2)).mapv(|z| C64::new(0.0, 1.0) * z)
}

/// Doubled-space basis vector |Λ_mn⟩ = vec(|χ_m⟩⟨χ_n|) for arbitrary
/// internal states χ given as kets.
pub fn doubled_basis_vector(chi_m: &CVec, chi_n: &CVec) -> CVec {
    let n = chi_m.len();
    CVec::from_shape_fn(n * n, |k| chi_m[k / n] * chi_n[k % n].conj())
}

/// Sesquilinear matrix element ⟨Λ_bra| L_C |Λ_ket⟩ of the dissipative
/// block between doubled basis states.
pub fn lc_matrix_element(lc: &CMat, bra: &CVec, ket: &CVec) -> C64 {
    let lk = lc.dot(ket);
    bra.iter().zip(lk.iter()).map(|(b, v)| b.conj() * v).sum()
}

/// Parameters of the monitored-oscillator validity analysis.
pub struct DisscomParams {
    pub gamma1: f64,
    pub gamma2: f64,
    /// Ladder truncation.
    pub n_max: usize,
}

impl Default for DisscomParams {
    fn default() -> Self {
        Self {
            gamma1: 0.01,
            gamma2: 0.002,
            n_max: 16,
        }
    }
}

/// First-order validity analysis of the monitoring coupling against the
/// free oscillator ladder.
///
/// The unperturbed doubled states are Λ_mn = |m⟩⟨n| with energies
/// E_mn = m − n (the ancilla copy contributes with opposite sign; the
/// constant zero-point halves cancel). Channels out of the stationary
/// ground state Λ_00 that change m − n have a finite gap |m − n|; channels
/// within the degenerate m = n manifold have no gap and belong to the
/// slow sector itself, so they are excluded here. Only interior ladder
/// states (m, n ≤ n_max − 3) are reported, since the truncation corrupts
/// the top of the ladder.
pub fn disscom_validity(params: &DisscomParams) -> Result<ValidityReport> {
    if params.n_max < 4 {
        return Err(Error::InvalidModel(format!(
            "n_max = {} too small for an interior block",
            params.n_max
        )));
    }
    let n = params.n_max;
    let lc = build_lc(params.gamma1, params.gamma2, n);
    let basis: Vec<CVec> = (0..n)
        .map(|k| {
            let mut v = CVec::zeros(n);
            v[k] = C64::new(1.0, 0.0);
            v
        })
        .collect();
    let ground = doubled_basis_vector(&basis[0], &basis[0]);
    let interior = n - 2;
    let mut channels = Vec::new();
    for m in 0..interior {
        for k in 0..interior {
            if m == k {
                continue; // degenerate manifold: no gap, handled at zeroth order
            }
            let target = doubled_basis_vector(&basis[m], &basis[k]);
            let num = lc_matrix_element(&lc, &target, &ground);
            let den = C64::new(m as f64 - k as f64, 0.0);
            channels.push(Channel {
                from: 0,
                to: m * n + k,
                label: format!("(0,0)->({m},{k})"),
                numerator: num,
                denominator: den,
            });
        }
    }
    validity_report(channels, 1e-10)
}

/// Convenience: the monitoring generator as a [`Dissipation`] quadratic
/// pair (cross-check route; differs from the γ-form only on the truncation
/// edge).
pub fn disscom_dissipation(gamma1: f64, gamma2: f64, n_max: usize) -> Result<Dissipation> {
    let (c, d) = build_cd(gamma1, gamma2, n_max)?;
    Ok(Dissipation::QuadraticPair { c, d })
}

/// tr(σ)·… helper: expectation of x in a state, real part.
pub fn mean_x(rho: &CMat) -> f64 {
    let (x, _) = xp_matrices(rho.nrows());
    expectation(&x, rho).re
}
