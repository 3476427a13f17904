//! Closed forms: mean harvested power, the nearest-beacon gain `psi`, power-outage
//! bounds, the interference-limited threshold `mu_tilde`, `kappa`, and the
//! nearest-neighbour distance CCDF.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::propagation::MptMode;

/// Identifies which closed form produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    MeanPowerIsotropic,
    MeanPowerDirected,
    Psi,
    PowerOutageBound,
    MuTilde,
    Kappa,
    NearestDistanceCcdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticValue {
    pub value: f64,
    pub formula: Formula,
}

impl AnalyticValue {
    fn checked(value: f64, formula: Formula) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(AnalyticValue { value, formula })
        } else {
            Err(Error::Domain(format!("{formula:?} evaluated to {value}")))
        }
    }
}

fn check_mpt(lambda_p: f64, nu: f64, beta: f64) -> Result<()> {
    if !(beta > 2.0) {
        return Err(Error::DivergentIntegral(format!(
            "mean beacon power needs beta > 2, got {beta}"
        )));
    }
    // The model requires nu > 1, but the formulas hold for any positive cutoff.
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::invalid(format!("nu must be positive, got {nu}")));
    }
    if !(lambda_p >= 0.0) || !lambda_p.is_finite() {
        return Err(Error::invalid(format!("lambda_p must be non-negative, got {lambda_p}")));
    }
    Ok(())
}

/// `E[sum_T max(|T|, nu)^{-beta}]` over a density-`lambda_p` PPP.
fn isotropic_gain(lambda_p: f64, nu: f64, beta: f64) -> f64 {
    PI * beta * nu.powf(2.0 - beta) * lambda_p / (beta - 2.0)
}

pub fn mean_power_isotropic(q: f64, lambda_p: f64, nu: f64, beta: f64) -> Result<f64> {
    check_mpt(lambda_p, nu, beta)?;
    if !(q >= 0.0) {
        return Err(Error::invalid(format!("q must be non-negative, got {q}")));
    }
    Ok(q * isotropic_gain(lambda_p, nu, beta))
}

/// Expected cutoff gain to the nearest beacon, `E[max(D, nu)^{-beta}]`.
pub fn psi(lambda_p: f64, nu: f64, beta: f64) -> Result<f64> {
    check_mpt(lambda_p, nu, beta)?;
    if lambda_p == 0.0 {
        return Ok(0.0);
    }
    let x = PI * lambda_p * nu * nu;
    let inside = nu.powf(-beta) * -(-x).exp_m1();
    let outside = (PI * lambda_p).powf(0.5 * beta) * upper_incomplete_gamma(1.0 - 0.5 * beta, x)?;
    Ok(inside + outside)
}

pub fn mean_power_directed(q: f64, lambda_p: f64, nu: f64, beta: f64, z_m: f64, z_s: f64) -> Result<f64> {
    if !(z_s > 0.0 && z_m >= z_s) && !(z_s == 0.0 && z_m > 0.0) {
        return Err(Error::invalid(format!(
            "need z_m >= z_s >= 0, got z_m={z_m}, z_s={z_s}"
        )));
    }
    mean_power_isotropic(q, lambda_p, nu, beta)?;
    let total = isotropic_gain(lambda_p, nu, beta);
    let nearest = psi(lambda_p, nu, beta)?;
    Ok(q * (z_s * total + (z_m - z_s) * nearest))
}

pub fn mean_power(
    mode: MptMode,
    q: f64,
    lambda_p: f64,
    nu: f64,
    beta: f64,
    z_m: f64,
    z_s: f64,
) -> Result<AnalyticValue> {
    match mode {
        MptMode::Isotropic => AnalyticValue::checked(
            mean_power_isotropic(q, lambda_p, nu, beta)?,
            Formula::MeanPowerIsotropic,
        ),
        MptMode::Directed => AnalyticValue::checked(
            mean_power_directed(q, lambda_p, nu, beta, z_m, z_s)?,
            Formula::MeanPowerDirected,
        ),
    }
}

/// Nearest-beacon upper bound on `Pr(P < p)`. Only valid while a single beacon at the
/// cutoff distance can deliver `p`.
pub fn power_outage_bound(p: f64, q: f64, lambda_p: f64, beta: f64, nu: f64, mode: MptMode, z_m: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::invalid(format!("power threshold must be positive, got {p}")));
    }
    if !(lambda_p >= 0.0) {
        return Err(Error::invalid(format!("lambda_p must be non-negative, got {lambda_p}")));
    }
    let q_eff = match mode {
        MptMode::Isotropic => q,
        MptMode::Directed => z_m * q,
    };
    if q_eff * nu.powf(-beta) < p {
        return Err(Error::BoundInapplicable(format!(
            "peak single-beacon power {} is below the threshold {p}",
            q_eff * nu.powf(-beta)
        )));
    }
    Ok((-PI * lambda_p * (q_eff / p).powf(2.0 / beta)).exp())
}

/// Interference-limited threshold from the BS received-power constraint.
pub fn mu_tilde(p_b: f64, eta: f64, alpha: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!("eta must lie in (0, 1), got {eta}")));
    }
    if !(p_b > 0.0) {
        return Err(Error::Domain(format!("p_b must be positive, got {p_b}")));
    }
    Ok((2.0 * PI / (1.0 / eta).ln()).powf(0.5 * alpha) / p_b)
}

pub fn kappa(omega: f64, sigma2: f64, nu: f64, beta: f64, mu: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    Ok(omega * sigma2 * nu.powf(beta) / mu)
}

/// `Pr(nearest point of a density-lambda PPP is farther than r)`.
pub fn nearest_distance_ccdf(lambda: f64, r: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !(r >= 0.0) {
        return Err(Error::invalid(format!(
            "need lambda, r >= 0, got lambda={lambda}, r={r}"
        )));
    }
    Ok((-PI * lambda * r * r).exp())
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_ITER: usize = 2000;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Complete gamma function (Lanczos, reflection below 1/2).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = LANCZOS[0];
        let t = x + LANCZOS_G + 0.5;
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// Lower incomplete gamma by its power series; `a > 0`.
fn lower_series(a: f64, x: f64) -> Result<f64> {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            return Ok(sum * (a * x.ln() - x).exp());
        }
    }
    Err(Error::Convergence(format!(
        "lower incomplete gamma series at a={a}, x={x}"
    )))
}

/// Upper incomplete gamma by Legendre's continued fraction (modified Lentz).
fn upper_continued_fraction(a: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok((a * x.ln() - x).exp() * h);
        }
    }
    Err(Error::Convergence(format!(
        "incomplete gamma continued fraction at a={a}, x={x}"
    )))
}

/// Exponential integral `E1(x)` by its series; `0 < x < ~2`.
fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..MAX_ITER {
        term *= -x / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// `Gamma(a, x) = int_x^inf t^{a-1} e^{-t} dt` for any real `a` and `x > 0`
/// (`x = 0` is allowed for `a > 0`).
pub fn upper_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    if !a.is_finite() || !x.is_finite() {
        return Err(Error::Domain(format!("non-finite argument a={a}, x={x}")));
    }
    if x < 0.0 || (x == 0.0 && a <= 0.0) {
        return Err(Error::Domain(format!("Gamma(a, x) undefined at a={a}, x={x}")));
    }
    if x == 0.0 {
        return Ok(gamma(a));
    }
    if a > 0.0 {
        return if x < a + 1.0 {
            Ok(gamma(a) - lower_series(a, x)?)
        } else {
            upper_continued_fraction(a, x)
        };
    }
    if x >= 1.0 {
        return upper_continued_fraction(a, x);
    }
    // Lift to a shape in [0, 1), then recur down with
    // Gamma(s, x) = (Gamma(s + 1, x) - x^s e^{-x}) / s.
    let steps = (-a).ceil();
    let base = a + steps;
    let mut value = if base == 0.0 {
        e1_series(x)
    } else {
        gamma(base) - lower_series(base, x)?
    };
    let mut s = base;
    for _ in 0..steps as usize {
        s -= 1.0;
        value = (value - (s * x.ln() - x).exp()) / s;
    }
    Ok(value)
}
