//! ∫₀ᴿ J₀(cr)e^{iκr}dr by panel quadrature (small c) or by subtracting an
//! asymptotic tail from the infinite integral (large c).

use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_PI_4, PI};

use super::fresnel;
use crate::quad::Rule;
use crate::Error;

/// Smallest (c−κ)R for which the asymptotic tail is used.
const MIN_TAIL_PHASE: f64 = 40.0;

/// Which evaluation path [`bessel_osc_integral`] takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Quadrature,
    Asymptotic,
}

/// Regime selection: asymptotic only when c ≥ 2π·threshold and the
/// phase (c−κ)R is large, which also keeps c ≈ κ out of it.
pub fn regime_for(r: f64, c: f64, kappa: f64, threshold: f64) -> Regime {
    if c >= 2.0 * PI * threshold && (c - kappa) * r >= MIN_TAIL_PHASE {
        Regime::Asymptotic
    } else {
        Regime::Quadrature
    }
}

pub fn bessel_osc_integral(r: f64, c: f64, kappa: f64, threshold: f64) -> Result<C64, Error> {
    if !(r > 0.0) || !(c >= 0.0) {
        return Err(Error::Domain(format!("bessel integral needs R > 0, c ≥ 0 (R={r}, c={c})")));
    }
    match regime_for(r, c, kappa, threshold) {
        Regime::Quadrature => Ok(by_quadrature(r, c, kappa)),
        Regime::Asymptotic => by_asymptotics(r, c, kappa),
    }
}

/// Gauss–Legendre on panels one period of the fastest phase wide.
pub fn by_quadrature(r: f64, c: f64, kappa: f64) -> C64 {
    thread_local! {
        static RULE: Rule = Rule::new(20);
    }
    let panels = ((c + kappa) * r / (2.0 * PI)).ceil() as usize + 1;
    let width = r / panels as f64;
    RULE.with(|rule| {
        let mut acc = C64::new(0.0, 0.0);
        for p in 0..panels {
            let lo = p as f64 * width;
            for (x, w) in rule.on(lo, lo + width) {
                acc += w * libm::j0(c * x) * C64::from_polar(1.0, kappa * x);
            }
        }
        acc
    })
}

/// ∫₀^∞ J₀(cr)e^{iκr}dr = 1/√(c²−κ²) for c > κ.
pub fn infinite_integral(c: f64, kappa: f64) -> f64 {
    1.0 / (c * c - kappa * kappa).sqrt()
}

/// I∞ minus (1/c)∫_{cR}^∞ J₀(z)e^{iκz/c}dz, with J₀ replaced by its Hankel
/// expansion through z^{-7/2}.
pub fn by_asymptotics(r: f64, c: f64, kappa: f64) -> Result<C64, Error> {
    if (c - kappa).abs() <= 1e-6 * kappa || (c - kappa) * r < MIN_TAIL_PHASE {
        return Err(Error::Domain(format!(
            "asymptotic regime needs c well above κ (c={c}, κ={kappa}, R={r})"
        )));
    }
    let z0 = c * r;
    let pp = 1.0 + kappa / c;
    let pm = kappa / c - 1.0;
    let kp = fresnel::tails(pp, z0)?;
    let km = fresnel::tails(pm, z0)?;
    // J₀(z) ≈ √(2/πz)·[e^{iχ}(P+iQ) + e^{−iχ}(P−iQ)]/2, χ = z − π/4,
    // P = 1 − 9/(128z²), Q = −1/(8z) + 75/(1024z³).
    let i = C64::new(0.0, 1.0);
    let coef = [C64::new(1.0, 0.0), -i / 8.0, C64::new(-9.0 / 128.0, 0.0), i * 75.0 / 1024.0];
    let mut plus = C64::new(0.0, 0.0);
    let mut minus = C64::new(0.0, 0.0);
    for k in 0..4 {
        plus += coef[k] * kp[k];
        minus += coef[k].conj() * km[k];
    }
    let tail = (2.0 / PI).sqrt()
        * 0.5
        * (C64::from_polar(1.0, -FRAC_PI_4) * plus + C64::from_polar(1.0, FRAC_PI_4) * minus);
    Ok(infinite_integral(c, kappa) - tail / c)
}
