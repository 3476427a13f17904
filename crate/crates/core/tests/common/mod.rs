//! Independent numerical oracles for the closed forms. Nothing here calls into the
//! library's special functions.

#![allow(dead_code)]

use std::f64::consts::PI;

use quadrature::double_exponential;

/// Double-exponential quadrature with a relative target: the integrand is first scaled by
/// its largest magnitude on a coarse sample of the interval.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let scale = (1..64)
        .map(|i| f(a + (b - a) * i as f64 / 64.0).abs())
        .fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return double_exponential::integrate(f, a, b, 1e-14).integral;
    }
    scale * double_exponential::integrate(|x| f(x) / scale, a, b, 1e-14).integral
}

/// Integral of `f` over `[a, b]`, split at the given interior points.
pub fn integrate_pieces(f: impl Fn(f64) -> f64 + Copy, cuts: &[f64]) -> f64 {
    cuts.windows(2).map(|w| integrate(f, w[0], w[1])).sum()
}

/// `Gamma(a, x) = int_x^inf t^{a-1} e^{-t} dt` by quadrature after `t = x e^u`, which turns
/// the integrand into the smooth `(x e^u)^a exp(-x e^u)`.
pub fn upper_gamma_by_quadrature(a: f64, x: f64) -> f64 {
    let f = move |u: f64| {
        let t = x * u.exp();
        (a * t.ln() - t).exp()
    };
    // Past t = 800 the integrand is below e^-700 for every shape we test.
    let end = (800f64 / x).ln().max(1.0);
    let mut cuts = vec![0.0];
    // Put a breakpoint where t = 1 and near the peak of t^a e^-t so each piece is gentle.
    for t in [1.0, a.abs().max(1.0), 40.0] {
        let u = (t / x).ln();
        if u > *cuts.last().unwrap() && u < end {
            cuts.push(u);
        }
    }
    cuts.push(end);
    integrate_pieces(f, &cuts)
}

/// `E[max(D, nu)^{-beta}]` for `D` the distance to the nearest point of a density-`lambda`
/// PPP, by integrating against the nearest-point density `2 pi lambda r e^{-pi lambda r^2}`.
pub fn psi_by_quadrature(lambda: f64, nu: f64, beta: f64) -> f64 {
    let density = move |r: f64| 2.0 * PI * lambda * r * (-PI * lambda * r * r).exp();
    let inside = integrate(move |r| nu.powf(-beta) * density(r), 0.0, nu);
    // r = nu e^u on the outer part.
    let outer = move |u: f64| {
        let r = nu * u.exp();
        r.powf(-beta) * density(r) * r
    };
    let scale = (1.0 / (PI * lambda)).sqrt().max(nu);
    let end = ((scale * 40.0) / nu).ln().max(1.0);
    let knee = (scale / nu).ln();
    let cuts: Vec<f64> = if knee > 0.0 && knee < end {
        vec![0.0, knee, end]
    } else {
        vec![0.0, end]
    };
    inside + integrate_pieces(outer, &cuts)
}

/// Campbell mean `int max(r, nu)^{-beta} 2 pi lambda r dr` over the plane.
pub fn isotropic_gain_by_quadrature(lambda: f64, nu: f64, beta: f64) -> f64 {
    let inside = integrate(move |r| nu.powf(-beta) * 2.0 * PI * lambda * r, 0.0, nu);
    // r = nu e^u on the outer part; the integrand decays like e^{(2 - beta) u}.
    let outer = move |u: f64| {
        let r = nu * u.exp();
        r.powf(-beta) * 2.0 * PI * lambda * r * r
    };
    let end = 36.0 / (beta - 2.0);
    let cuts: Vec<f64> = (0..=6).map(|k| end * k as f64 / 6.0).collect();
    inside + integrate_pieces(outer, &cuts)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}
