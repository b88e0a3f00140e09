//! Born-Oppenheimer structure over slow coordinates.
//!
//! The fast problem supplies, at each slow point, a complete biorthonormal
//! level set {E_n, |r_n⟩, ⟨l_n|} of a (generally non-Hermitian) effective
//! Hamiltonian. From its parametric derivatives this module builds:
//!
//! * the diagonal connection A_j(n) = i⟨l_n|∂_j r_n⟩ (enters the covariant
//!   slow momentum k_j − A_j),
//! * the scalar geometric term F(n) = −(1/2M) Σ_{m≠n} Σ_j w_j
//!   ⟨l_n|∂_j r_m⟩⟨l_m|∂_j r_n⟩,
//! * the off-diagonal kinetic couplings O(n,m) = −(1/2M)(2 Σ_j w_j
//!   ⟨l_n|∂_j r_m⟩ ∂_j + Σ_j w_j ⟨l_n|∂_j² r_m⟩),
//! * a first-order validity measure: the largest |coupling/energy-gap|
//!   ratio over the transition channels fed to it.
//!
//! The coordinate weights w_j carry the metric of the slow sector. For a
//! density-matrix problem the ancilla coordinate enters the kinetic energy
//! with the opposite sign (it is the image of a complex-conjugated copy),
//! which is represented here by w = (+1, −1, …) rather than by complex
//! coordinates.
//!
//! Derivatives are central finite differences on a 3-point stencil per
//! coordinate; the provider is responsible for supplying a gauge-smooth
//! level set. For a raw matrix-valued fast Hamiltonian,
//! [`EigenBundle::from_matrix_fn`] produces such a set by eigenvalue
//! tracking plus a positive-real-overlap gauge.

use crate::linalg::{eig_general, pair, vec_norm, EigOptions};
use crate::{C64, CMat, CVec, Error, Result};

/// Complete level set of the fast problem at one slow point.
#[derive(Clone)]
pub struct LevelSet {
    pub energies: Vec<C64>,
    /// Right eigenvectors (kets).
    pub rights: Vec<CVec>,
    /// Left eigenvectors (bilinear rows, ⟨l_m, r_n⟩ = δ_mn).
    pub lefts: Vec<CVec>,
}

impl LevelSet {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Worst-case deviation of ⟨l_m, r_n⟩ from δ_mn.
    pub fn pairing_error(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for m in 0..n {
            for k in 0..n {
                let want = if m == k { 1.0 } else { 0.0 };
                worst = worst.max((pair(&self.lefts[m], &self.rights[k]) - want).norm());
            }
        }
        worst
    }
}

/// Fix the gauge of a level set in place: rotate each right vector so its
/// largest-magnitude component is real and positive, adjusting the left so
/// the pairing stays 1.
pub fn gauge_anchor(set: &mut LevelSet) {
    for (r, l) in set.rights.iter_mut().zip(set.lefts.iter_mut()) {
        let mut imax = 0;
        let mut vmax = 0.0;
        for (i, z) in r.iter().enumerate() {
            if z.norm() > vmax {
                vmax = z.norm();
                imax = i;
            }
        }
        if vmax == 0.0 {
            continue;
        }
        let phase = r[imax] / vmax;
        r.mapv_inplace(|z| z / phase);
        l.mapv_inplace(|z| z * phase);
    }
}

/// Reorder and re-gauge `new` so it continues `reference`: levels are
/// matched by the largest bilinear overlap |⟨l_ref, r_new⟩|, then each right
/// vector is rotated so that overlap is real and positive.
pub fn align_to(reference: &LevelSet, new: &LevelSet) -> Result<LevelSet> {
    let n = reference.len();
    if new.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "level count changed: {} vs {}",
            n,
            new.len()
        )));
    }
    let mut taken = vec![false; n];
    let mut order = vec![0usize; n];
    for m in 0..n {
        let mut best = None;
        let mut vbest = -1.0;
        for k in 0..n {
            if taken[k] {
                continue;
            }
            let ov = pair(&reference.lefts[m], &new.rights[k]).norm();
            if ov > vbest {
                vbest = ov;
                best = Some(k);
            }
        }
        let k = best.ok_or(Error::SingularPairing { pivot: 0.0 })?;
        if vbest < 1e-8 {
            return Err(Error::NearDegenerate {
                gap: vbest,
                threshold: 1e-8,
            });
        }
        taken[k] = true;
        order[m] = k;
    }
    let mut out = LevelSet {
        energies: Vec::with_capacity(n),
        rights: Vec::with_capacity(n),
        lefts: Vec::with_capacity(n),
    };
    for m in 0..n {
        let k = order[m];
        let ov = pair(&reference.lefts[m], &new.rights[k]);
        let phase = ov / ov.norm();
        out.energies.push(new.energies[k]);
        out.rights.push(new.rights[k].mapv(|z| z / phase));
        out.lefts.push(new.lefts[k].mapv(|z| z * phase));
    }
    Ok(out)
}

/// Level sets sampled over an ordered list of slow points, with a gauge and
/// level labelling that are smooth along the list.
pub struct EigenBundle {
    pub points: Vec<Vec<f64>>,
    pub sets: Vec<LevelSet>,
}

impl EigenBundle {
    /// Sample an analytic (already smooth) provider.
    pub fn from_levels_fn(
        f: impl Fn(&[f64]) -> Result<LevelSet>,
        points: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let sets = points
            .iter()
            .map(|p| f(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { points, sets })
    }

    /// Diagonalize a matrix-valued fast Hamiltonian along the point list,
    /// tracking levels by overlap and gauging by the positive-real-overlap
    /// rule (the first point gets the largest-component-real anchor gauge).
    pub fn from_matrix_fn(
        f: impl Fn(&[f64]) -> Result<CMat>,
        points: Vec<Vec<f64>>,
        opts: &EigOptions,
    ) -> Result<Self> {
        let mut sets: Vec<LevelSet> = Vec::with_capacity(points.len());
        for p in &points {
            let sp = eig_general(&f(p)?, opts)?;
            let mut set = LevelSet {
                energies: sp.values,
                rights: sp.rights,
                lefts: sp.lefts,
            };
            match sets.last() {
                None => gauge_anchor(&mut set),
                Some(prev) => set = align_to(prev, &set)?,
            }
            sets.push(set);
        }
        Ok(Self { points, sets })
    }

    /// Largest jump of any right eigenvector between consecutive points —
    /// a direct check that tracking and gauge fixing produced a smooth
    /// bundle (should scale linearly with the grid spacing).
    pub fn max_step(&self) -> f64 {
        let mut worst = 0.0f64;
        for w in self.sets.windows(2) {
            for (a, b) in w[0].rights.iter().zip(w[1].rights.iter()) {
                worst = worst.max(vec_norm(&(b - a)));
            }
        }
        worst
    }
}

/// Parametric derivatives of a level set at one point, contracted with the
/// left vectors of the center set:
/// `d1[n][m][j] = ⟨l_n|∂_j r_m⟩`, `d2[n][m][j] = ⟨l_n|∂_j² r_m⟩`.
pub struct StencilOps {
    pub energies: Vec<C64>,
    pub d1: Vec<Vec<Vec<C64>>>,
    pub d2: Vec<Vec<Vec<C64>>>,
    pub ncoords: usize,
}

/// Central finite differences of a gauge-smooth level provider around
/// `point`, with step `h` in every coordinate.
pub fn stencil_ops(
    f: impl Fn(&[f64]) -> Result<LevelSet>,
    point: &[f64],
    h: f64,
) -> Result<StencilOps> {
    let center = f(point)?;
    stencil_ops_with_center(f, point, h, center)
}

fn stencil_ops_with_center(
    f: impl Fn(&[f64]) -> Result<LevelSet>,
    point: &[f64],
    h: f64,
    center: LevelSet,
) -> Result<StencilOps> {
    let nc = point.len();
    let nl = center.len();
    let mut d1 = vec![vec![vec![C64::new(0.0, 0.0); nc]; nl]; nl];
    let mut d2 = vec![vec![vec![C64::new(0.0, 0.0); nc]; nl]; nl];
    for j in 0..nc {
        let mut pp = point.to_vec();
        let mut pm = point.to_vec();
        pp[j] += h;
        pm[j] -= h;
        let sp = f(&pp)?;
        let sm = f(&pm)?;
        if sp.len() != nl || sm.len() != nl {
            return Err(Error::DimensionMismatch(
                "level count varies across the stencil".into(),
            ));
        }
        for m in 0..nl {
            let rp = &sp.rights[m];
            let rm = &sm.rights[m];
            let rc = &center.rights[m];
            for n in 0..nl {
                let ln = &center.lefts[n];
                let mut s1 = C64::new(0.0, 0.0);
                let mut s2 = C64::new(0.0, 0.0);
                for i in 0..rc.len() {
                    s1 += ln[i] * (rp[i] - rm[i]);
                    s2 += ln[i] * (rp[i] - 2.0 * rc[i] + rm[i]);
                }
                d1[n][m][j] = s1 / (2.0 * h);
                d2[n][m][j] = s2 / (h * h);
            }
        }
    }
    Ok(StencilOps {
        energies: center.energies,
        d1,
        d2,
        ncoords: nc,
    })
}

/// Same, but the provider is a raw matrix. Every stencil point is
/// diagonalized and put in the anchor gauge (largest component real and
/// positive), which is smooth in a neighborhood as long as the dominant
/// component does not change; overlaps with the center are used only to
/// match level labels. Re-phasing neighbors against the center instead
/// would parallel-transport the gauge and silently zero the diagonal
/// connection.
pub fn stencil_ops_from_matrix(
    f: impl Fn(&[f64]) -> Result<CMat>,
    point: &[f64],
    h: f64,
    opts: &EigOptions,
) -> Result<StencilOps> {
    let anchored = |p: &[f64]| -> Result<LevelSet> {
        let sp = eig_general(&f(p)?, opts)?;
        let mut set = LevelSet {
            energies: sp.values,
            rights: sp.rights,
            lefts: sp.lefts,
        };
        gauge_anchor(&mut set);
        Ok(set)
    };
    let center = anchored(point)?;
    let center_ref = center.clone();
    stencil_ops_with_center(
        move |p: &[f64]| {
            let set = anchored(p)?;
            match_order(&center_ref, set)
        },
        point,
        h,
        center,
    )
}

/// Permute `new` so level m has the largest |⟨l_ref_m, r_new⟩|, without
/// touching the gauge.
fn match_order(reference: &LevelSet, new: LevelSet) -> Result<LevelSet> {
    let n = reference.len();
    if new.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "level count changed: {} vs {}",
            n,
            new.len()
        )));
    }
    let mut taken = vec![false; n];
    let mut out = LevelSet {
        energies: Vec::with_capacity(n),
        rights: Vec::with_capacity(n),
        lefts: Vec::with_capacity(n),
    };
    for m in 0..n {
        let mut best = None;
        let mut vbest = -1.0;
        for k in 0..n {
            if taken[k] {
                continue;
            }
            let ov = pair(&reference.lefts[m], &new.rights[k]).norm();
            if ov > vbest {
                vbest = ov;
                best = Some(k);
            }
        }
        let k = best.ok_or(Error::SingularPairing { pivot: 0.0 })?;
        taken[k] = true;
        out.energies.push(new.energies[k]);
        out.rights.push(new.rights[k].clone());
        out.lefts.push(new.lefts[k].clone());
    }
    Ok(out)
}

impl StencilOps {
    /// Diagonal connection A_j(n) = i⟨l_n|∂_j r_n⟩.
    pub fn connection(&self, n: usize) -> Vec<C64> {
        (0..self.ncoords)
            .map(|j| C64::new(0.0, 1.0) * self.d1[n][n][j])
            .collect()
    }

    /// Scalar geometric term
    /// F(n) = −(1/2M) Σ_{m≠n} Σ_j w_j ⟨l_n|∂_j r_m⟩⟨l_m|∂_j r_n⟩.
    pub fn geometric_scalar(&self, n: usize, mass: f64, weights: &[f64]) -> C64 {
        let nl = self.energies.len();
        let mut s = C64::new(0.0, 0.0);
        for m in 0..nl {
            if m == n {
                continue;
            }
            for j in 0..self.ncoords {
                s += weights[j] * self.d1[n][m][j] * self.d1[m][n][j];
            }
        }
        -s / (2.0 * mass)
    }

    /// Matrix element of the kinetic coupling O(n,m) on a plane wave
    /// e^{i k·x} in the slow coordinates:
    /// −(1/2M)(2 Σ_j w_j ⟨l_n|∂_j r_m⟩ (i k_j) + Σ_j w_j ⟨l_n|∂_j² r_m⟩).
    pub fn coupling_plane_wave(
        &self,
        n: usize,
        m: usize,
        k: &[f64],
        mass: f64,
        weights: &[f64],
    ) -> C64 {
        let i = C64::new(0.0, 1.0);
        let mut s = C64::new(0.0, 0.0);
        for j in 0..self.ncoords {
            s += weights[j] * (2.0 * self.d1[n][m][j] * i * k[j] + self.d2[n][m][j]);
        }
        -s / (2.0 * mass)
    }

    /// Zeroth-order band energy of level `n` carried by a plane wave with
    /// slow momenta `k`: Σ_j w_j (k_j − A_j)²/(2M) + E_n.
    pub fn band_energy(&self, n: usize, k: &[f64], mass: f64, weights: &[f64]) -> C64 {
        let a = self.connection(n);
        let mut kin = C64::new(0.0, 0.0);
        for j in 0..self.ncoords {
            let d = C64::new(k[j], 0.0) - a[j];
            kin += weights[j] * d * d;
        }
        kin / (2.0 * mass) + self.energies[n]
    }
}

/// One perturbative transition channel: a coupling numerator against an
/// energy denominator.
#[derive(Clone, Debug)]
pub struct Channel {
    pub from: usize,
    pub to: usize,
    pub label: String,
    pub numerator: C64,
    pub denominator: C64,
}

impl Channel {
    pub fn ratio(&self) -> f64 {
        self.numerator.norm() / self.denominator.norm()
    }
}

/// Outcome of the first-order validity analysis.
pub struct ValidityReport {
    pub channels: Vec<Channel>,
    /// max |numerator/denominator| over channels; small ⇒ the band is a
    /// good adiabatic description.
    pub gamma: f64,
    /// Index (into `channels`) of the dominant channel.
    pub dominant: Option<usize>,
}

/// Assemble a validity report, guarding against untrustworthy channels
/// whose denominator is below `guard` while the numerator is not
/// correspondingly small.
pub fn validity_report(channels: Vec<Channel>, guard: f64) -> Result<ValidityReport> {
    let mut gamma = 0.0f64;
    let mut dominant = None;
    for (i, ch) in channels.iter().enumerate() {
        let den = ch.denominator.norm();
        if den < guard {
            if ch.numerator.norm() < guard * 1e-3 {
                // 0/0-type channel (symmetry-protected): skip.
                continue;
            }
            return Err(Error::SmallDenominator {
                denominator: den,
                guard,
                channel: ch.label.clone(),
            });
        }
        let r = ch.ratio();
        if r > gamma {
            gamma = r;
            dominant = Some(i);
        }
    }
    Ok(ValidityReport {
        channels,
        gamma,
        dominant,
    })
}

/// Discrete Fourier component of uniformly spaced periodic samples:
/// (1/N) Σ_k f_k exp(−i·c·2πk/N).
pub fn fourier_component(samples: &[C64], c: i64) -> C64 {
    let n = samples.len() as f64;
    let mut s = C64::new(0.0, 0.0);
    for (k, f) in samples.iter().enumerate() {
        let ang = -(c as f64) * 2.0 * std::f64::consts::PI * (k as f64) / n;
        s += f * C64::new(ang.cos(), ang.sin());
    }
    s / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::f64::consts::PI;

    /// Two-level Hermitian field: n̂(φ)·σ at polar angle θ.
    fn spin_matrix(theta: f64, phi: f64) -> CMat {
        let (st, ct) = theta.sin_cos();
        array![
            [
                C64::new(ct, 0.0),
                C64::new(st * phi.cos(), -st * phi.sin())
            ],
            [
                C64::new(st * phi.cos(), st * phi.sin()),
                C64::new(-ct, 0.0)
            ],
        ]
    }

    #[test]
    fn connection_matches_closed_form() {
        // Upper level of n̂·σ: A_φ = −sin²(θ/2) in the gauge where the
        // first (largest) component is real.
        let theta = PI / 3.0;
        let ops = stencil_ops_from_matrix(
            |p: &[f64]| Ok(spin_matrix(theta, p[0])),
            &[0.4],
            1e-4,
            &EigOptions::default(),
        )
        .unwrap();
        // Level order is sorted by Re(E): index 1 is the +1 eigenvalue.
        let a = ops.connection(1);
        let want = -(theta / 2.0).sin().powi(2);
        assert!((a[0] - C64::new(want, 0.0)).norm() < 1e-7, "A = {}", a[0]);
    }

    #[test]
    fn step_halving_consistency() {
        let theta = PI / 3.0;
        let f = |p: &[f64]| Ok(spin_matrix(theta, p[0]));
        let o1 = stencil_ops_from_matrix(f, &[1.1], 1e-4, &EigOptions::default()).unwrap();
        let o2 = stencil_ops_from_matrix(f, &[1.1], 5e-5, &EigOptions::default()).unwrap();
        for n in 0..2 {
            for m in 0..2 {
                assert!((o1.d1[n][m][0] - o2.d1[n][m][0]).norm() < 1e-5);
                assert!((o1.d2[n][m][0] - o2.d2[n][m][0]).norm() < 1e-4);
            }
        }
    }

    #[test]
    fn bundle_is_smooth() {
        let theta = 0.7;
        let pts: Vec<Vec<f64>> = (0..200).map(|k| vec![2.0 * PI * k as f64 / 200.0]).collect();
        let bundle = EigenBundle::from_matrix_fn(
            |p: &[f64]| Ok(spin_matrix(theta, p[0])),
            pts,
            &EigOptions::default(),
        )
        .unwrap();
        // Grid spacing ~0.0314; eigenvectors vary on the O(1) scale.
        assert!(bundle.max_step() < 0.05, "max step {}", bundle.max_step());
        for set in &bundle.sets {
            assert!(set.pairing_error() < 1e-10);
        }
    }

    #[test]
    fn geometric_scalar_two_level() {
        // For n̂·σ with coordinate φ: ⟨l_±|∂_φ r_∓⟩ magnitudes are sin θ/2,
        // so F(n) = −(1/2M)·(⟨l_n|∂r_m⟩⟨l_m|∂r_n⟩).
        let theta = PI / 3.0;
        let ops = stencil_ops_from_matrix(
            |p: &[f64]| Ok(spin_matrix(theta, p[0])),
            &[0.9],
            1e-4,
            &EigOptions::default(),
        )
        .unwrap();
        let mass = 2.0;
        let f = ops.geometric_scalar(1, mass, &[1.0]);
        let cross = ops.d1[1][0][0] * ops.d1[0][1][0];
        assert!((f + cross / (2.0 * mass)).norm() < 1e-12);
        // |⟨l_+|∂_φ r_-⟩| = sin θ / 2 for the Hermitian two-level field.
        assert!((ops.d1[1][0][0].norm() - theta.sin() / 2.0).abs() < 1e-6);
    }

    #[test]
    fn fourier_component_picks_harmonics() {
        let n = 64;
        let samples: Vec<C64> = (0..n)
            .map(|k| {
                let x = 2.0 * PI * k as f64 / n as f64;
                C64::new(0.0, 0.0)
                    + C64::new((3.0 * x).cos(), (3.0 * x).sin()) * C64::new(2.0, 0.5)
                    + C64::new((-x).cos(), (-x).sin())
            })
            .collect();
        assert!((fourier_component(&samples, 3) - C64::new(2.0, 0.5)).norm() < 1e-12);
        assert!((fourier_component(&samples, -1) - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(fourier_component(&samples, 0).norm() < 1e-12);
    }
}
