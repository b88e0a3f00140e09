//! Fixed-step RK4 propagation of `i ∂_t ψ = G(t) ψ`.
//!
//! The generator may be non-Hermitian (decaying modes are the whole point),
//! so the norm is not conserved; a hard overflow guard catches runaway
//! growth from antidamped modes or absurd step sizes.

use crate::{C64, CMat, CVec, Error, Result};

const OVERFLOW_LIMIT: f64 = 1e12;

fn rhs(g: &CMat, psi: &CVec) -> CVec {
    g.dot(psi).mapv(|z| C64::new(0.0, -1.0) * z)
}

fn rk4_step(gen: &mut dyn FnMut(f64) -> CMat, t: f64, dt: f64, psi: &CVec) -> CVec {
    let g1 = gen(t);
    let g2 = gen(t + 0.5 * dt);
    let g3 = gen(t + dt);
    let k1 = rhs(&g1, psi);
    let k2 = rhs(&g2, &(psi + &k1.mapv(|z| z * (0.5 * dt))));
    let k3 = rhs(&g2, &(psi + &k2.mapv(|z| z * (0.5 * dt))));
    let k4 = rhs(&g3, &(psi + &k3.mapv(|z| z * dt)));
    psi + &(k1 + k2.mapv(|z| 2.0 * z) + k3.mapv(|z| 2.0 * z) + k4).mapv(|z| z * (dt / 6.0))
}

/// Propagate from `t0` to `t1` in `steps` equal RK4 steps.
pub fn propagate(
    mut gen: impl FnMut(f64) -> CMat,
    psi0: &CVec,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<CVec> {
    if steps == 0 {
        return Err(Error::InvalidModel("propagate with zero steps".into()));
    }
    let dt = (t1 - t0) / steps as f64;
    let mut psi = psi0.clone();
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        psi = rk4_step(&mut gen, t, dt, &psi);
        if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite() || z.norm() > OVERFLOW_LIMIT)
        {
            return Err(Error::StepOverflow { t: t + dt });
        }
    }
    Ok(psi)
}

/// Like [`propagate`], but record `samples` states at evenly spaced times
/// (the initial state included, the final state last). `steps` must be a
/// multiple of `samples` for the sample times to land on step boundaries;
/// it is rounded up if not.
pub fn propagate_trace(
    mut gen: impl FnMut(f64) -> CMat,
    psi0: &CVec,
    t0: f64,
    t1: f64,
    steps: usize,
    samples: usize,
) -> Result<Vec<(f64, CVec)>> {
    if steps == 0 || samples == 0 {
        return Err(Error::InvalidModel(
            "propagate_trace needs steps ≥ 1 and samples ≥ 1".into(),
        ));
    }
    let per = steps.div_ceil(samples);
    let steps = per * samples;
    let dt = (t1 - t0) / steps as f64;
    let mut psi = psi0.clone();
    let mut out = Vec::with_capacity(samples + 1);
    out.push((t0, psi.clone()));
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        psi = rk4_step(&mut gen, t, dt, &psi);
        if psi.iter().any(|z| !z.re.is_finite() || z.norm() > OVERFLOW_LIMIT) {
            return Err(Error::StepOverflow { t: t + dt });
        }
        if (k + 1) % per == 0 {
            out.push((t0 + (k + 1) as f64 * dt, psi.clone()));
        }
    }
    Ok(out)
}
