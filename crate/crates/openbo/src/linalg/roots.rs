//! Closed-form roots of low-degree complex polynomials, Newton-polished.

use crate::C64;

fn newton_polish(coeffs: &[C64], mut x: C64, iters: usize) -> C64 {
    // coeffs in descending degree order, leading coefficient nonzero.
    for _ in 0..iters {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for &c in coeffs {
            dp = dp * x + p;
            p = p * x + c;
        }
        if dp.norm() < 1e-300 {
            break;
        }
        let step = p / dp;
        x -= step;
        if step.norm() < 1e-16 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

/// Roots of `a x² + b x + c` with `a ≠ 0`.
///
/// Uses the cancellation-free form: the large root from the stable sign of
/// the discriminant square root, the small one from `c/(a x_large)`.
pub fn solve_quadratic(a: C64, b: C64, c: C64) -> [C64; 2] {
    let disc = (b * b - 4.0 * a * c).sqrt();
    // Pick the sign that avoids cancellation in -b ± disc.
    let q = if (b.conj() * disc).re >= 0.0 {
        -0.5 * (b + disc)
    } else {
        -0.5 * (b - disc)
    };
    if q.norm() == 0.0 {
        return [C64::new(0.0, 0.0), -b / a];
    }
    [q / a, c / q]
}

/// Roots of `a x³ + b x² + c x + d` with `a ≠ 0` (Cardano + Newton polish).
pub fn solve_cubic(a: C64, b: C64, c: C64, d: C64) -> [C64; 3] {
    let b = b / a;
    let c = c / a;
    let d = d / a;
    // Depress: x = t - b/3, t³ + p t + q = 0.
    let shift = -b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;

    let omega = C64::new(-0.5, 0.75f64.sqrt());
    let ts: [C64; 3] = if p.norm() < 1e-30 && q.norm() < 1e-30 {
        [C64::new(0.0, 0.0); 3]
    } else {
        let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        // Choose the branch of ±s that does not cancel against -q/2.
        let u3 = if ((-q / 2.0).conj() * s).re >= 0.0 {
            -q / 2.0 + s
        } else {
            -q / 2.0 - s
        };
        if u3.norm() < 1e-30 {
            // p ≠ 0 impossible here since u3 = 0 forces p³ = -27 q²/4 … q²/4·… ;
            // fall back to the pure-cube case t³ = -q.
            let t0 = (-q).powf(1.0 / 3.0);
            [t0, omega * t0, omega * omega * t0]
        } else {
            let u = u3.powf(1.0 / 3.0);
            let root = |u: C64| u - p / (3.0 * u);
            [root(u), root(omega * u), root(omega * omega * u)]
        }
    };

    let coeffs = [C64::new(1.0, 0.0), b, c, d];
    let mut out = [C64::new(0.0, 0.0); 3];
    for (i, t) in ts.iter().enumerate() {
        out[i] = newton_polish(&coeffs, t + shift, 8);
    }
    out
}

/// Roots of `a x⁴ + b x³ + c x² + d x + e` with `a ≠ 0`
/// (Ferrari factorization + Newton polish).
pub fn solve_quartic(a: C64, b: C64, c: C64, d: C64, e: C64) -> [C64; 4] {
    let b = b / a;
    let c = c / a;
    let d = d / a;
    let e = e / a;
    // Depress: x = y - b/4, y⁴ + p y² + q y + r = 0.
    let shift = -b / 4.0;
    let b2 = b * b;
    let p = c - 3.0 * b2 / 8.0;
    let q = d - b * c / 2.0 + b2 * b / 8.0;
    let r = e - b * d / 4.0 + b2 * c / 16.0 - 3.0 * b2 * b2 / 256.0;

    let ys: [C64; 4] = if q.norm() < 1e-14 * (1.0 + p.norm() + r.norm().sqrt()) {
        // Biquadratic: y² solves z² + p z + r.
        let [z1, z2] = solve_quadratic(C64::new(1.0, 0.0), p, r);
        let s1 = z1.sqrt();
        let s2 = z2.sqrt();
        [s1, -s1, s2, -s2]
    } else {
        // (y² + u y + v)(y² - u y + w) with U = u² a root of
        // U³ + 2p U² + (p² - 4r) U - q² = 0; take the largest U so u ≠ 0.
        let us = solve_cubic(
            C64::new(1.0, 0.0),
            2.0 * p,
            p * p - 4.0 * r,
            -q * q,
        );
        let bigu = us
            .iter()
            .copied()
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .unwrap();
        let u = bigu.sqrt();
        let w = (p + bigu + q / u) / 2.0;
        let v = (p + bigu - q / u) / 2.0;
        let [y1, y2] = solve_quadratic(C64::new(1.0, 0.0), u, v);
        let [y3, y4] = solve_quadratic(C64::new(1.0, 0.0), -u, w);
        [y1, y2, y3, y4]
    };

    let coeffs = [C64::new(1.0, 0.0), b, c, d, e];
    let mut out = [C64::new(0.0, 0.0); 4];
    for (i, y) in ys.iter().enumerate() {
        out[i] = newton_polish(&coeffs, y + shift, 8);
    }
    out
}
