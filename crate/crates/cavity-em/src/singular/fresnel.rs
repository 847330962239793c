//! Fresnel-type tails ∫_{R0}^∞ e^{ipz} z^{-ν} dz for large p·R0.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::Error;

/// Smallest p·R0 for which the asymptotic forms are trusted.
pub const MIN_PHASE: f64 = 20.0;

/// Auxiliary functions f, g of the Fresnel integrals, large-argument series.
pub fn fresnel_fg(t: f64) -> (f64, f64) {
    let u = PI * t * t;
    let u2 = 1.0 / (u * u);
    let f = (1.0 - 3.0 * u2 + 105.0 * u2 * u2) / (PI * t);
    let g = (1.0 - 15.0 * u2 + 945.0 * u2 * u2) / (PI * PI * t * t * t);
    (f, g)
}

/// Fresnel cosine and sine integrals C(t), S(t) for t ≫ 1.
pub fn fresnel_cs(t: f64) -> (f64, f64) {
    let (f, g) = fresnel_fg(t);
    let (s, c) = (0.5 * PI * t * t).sin_cos();
    (0.5 + f * s - g * c, 0.5 - f * c - g * s)
}

/// ∫_{R0}^∞ e^{ipz}/√z dz for p > 0.
///
/// Uses √(π/(2p))·(1 + i − 2C(t) − 2iS(t)) with t = √(2pR0/π); the bracket
/// collapses to 2(g + i f)e^{ipR0}, which avoids cancelling the leading ½.
pub fn fresnel_tail(p: f64, r0: f64) -> Result<C64, Error> {
    if !(p > 0.0) || !(r0 > 0.0) || p * r0 < MIN_PHASE {
        return Err(Error::Domain(format!(
            "fresnel_tail needs p > 0 and p·R0 ≥ {MIN_PHASE}, got p={p}, R0={r0}"
        )));
    }
    let t = (2.0 * p * r0 / PI).sqrt();
    let (f, g) = fresnel_fg(t);
    let phase = C64::from_polar(1.0, p * r0);
    Ok((PI / (2.0 * p)).sqrt() * 2.0 * C64::new(g, f) * phase)
}

/// ∫_{R0}^∞ e^{ipz}/z^{3/2} dz = 2e^{ipR0}/√R0 + 2ip·∫_{R0}^∞ e^{ipz}/√z dz.
pub fn fresnel_tail_32(p: f64, r0: f64) -> Result<C64, Error> {
    let k = fresnel_tail(p, r0)?;
    Ok(2.0 * C64::from_polar(1.0, p * r0) / r0.sqrt() + C64::new(0.0, 2.0 * p) * k)
}

/// K_{1/2}, K_{3/2}, K_{5/2}, K_{7/2} for real p ≠ 0 (negative p by conjugation).
pub(crate) fn tails(p: f64, r0: f64) -> Result<[C64; 4], Error> {
    let ap = p.abs();
    let mut k = [C64::new(0.0, 0.0); 4];
    k[0] = fresnel_tail(ap, r0)?;
    let e = C64::from_polar(1.0, ap * r0);
    let mut nu = 0.5;
    for i in 1..4 {
        // K_{ν+1} = (ip K_ν + R0^{-ν} e^{ipR0}) / ν
        k[i] = (C64::new(0.0, ap) * k[i - 1] + e * r0.powf(-nu)) / nu;
        nu += 1.0;
    }
    if p < 0.0 {
        for v in k.iter_mut() {
            *v = v.conj();
        }
    }
    Ok(k)
}
