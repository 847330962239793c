//! Scattered far field and backscatter radar cross section.
//!
//! Above the ground plane the scattered field is E^s = 2∫_Γ (ẑ×E)×∇_y g dy.
//! With |x| → ∞ along x̂, ∇_y g → −iκ₀x̂·e^{iκ₀|x|}/(4π|x|)·e^{−iκ₀x̂·y}, so
//! E^s ≈ A·e^{iκ₀r}/r with A = (iκ₀/2π)·x̂ × (−Ẽ₂, Ẽ₁, 0), where Ẽ_l is the
//! aperture transform ∫_Γ E_l e^{−iκ₀x̂·y} dy, available in closed form for
//! every mode.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::modal::ApertureField;
use crate::tbc::{cos_exp_integral, sin_exp_integral};
use crate::Error;

fn cross(u: [f64; 3], v: [C64; 3]) -> [C64; 3] {
    [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
}

/// Far-field amplitude A along the unit direction `dir` (dir₃ > 0).
pub fn far_field(field: &ApertureField, dir: [f64; 3], a: f64, b: f64, kappa0: f64) -> Result<[C64; 3], Error> {
    let len = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    if !(dir[2] > 0.0) || (len - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("observation direction {dir:?} is not a unit vector with x₃ > 0")));
    }
    let (g1, g2) = (-kappa0 * dir[0], -kappa0 * dir[1]);
    let s = &field.sets;
    let cx: Vec<C64> = (0..=s.m).map(|m| cos_exp_integral(m, g1, a)).collect();
    let sx: Vec<C64> = (0..=s.m).map(|m| sin_exp_integral(m, g1, a)).collect();
    let cy: Vec<C64> = (0..=s.n).map(|n| cos_exp_integral(n, g2, b)).collect();
    let sy: Vec<C64> = (0..=s.n).map(|n| sin_exp_integral(n, g2, b)).collect();
    let t1: C64 = s.set1.iter().zip(&field.e1).map(|((m, n), e)| e * cx[m] * sy[n]).sum();
    let t2: C64 = s.set2.iter().zip(&field.e2).map(|((m, n), e)| e * sx[m] * cy[n]).sum();
    let v = [-t2, t1, C64::new(0.0, 0.0)];
    let pre = C64::new(0.0, kappa0 / (2.0 * PI));
    Ok(cross(dir, v).map(|c| pre * c))
}

/// Spherical unit vectors (θ̂, φ̂) at polar angle θ, azimuth φ.
pub fn spherical_basis(theta: f64, phi: f64) -> ([f64; 3], [f64; 3]) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    ([ct * cp, ct * sp, -st], [-sp, cp, 0.0])
}

/// Backscatter direction −d = (sinθcosφ, sinθsinφ, cosθ).
pub fn backscatter_direction(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// σ = 4π|A·e|² for a unit-amplitude incident wave.
pub fn sigma(amp: &[C64; 3], e: [f64; 3]) -> f64 {
    let proj: C64 = (0..3).map(|i| amp[i] * e[i]).sum();
    4.0 * PI * proj.norm_sqr()
}

pub fn to_db(sigma: f64, wavelength: f64) -> f64 {
    10.0 * (sigma / (wavelength * wavelength)).log10()
}

/// One backscatter evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RcsSample {
    pub theta: f64,
    pub phi: f64,
    pub alpha: f64,
    /// Co-polarized σ for the configured α.
    pub sigma: f64,
    pub sigma_over_lambda2: f64,
    /// θ̂θ̂ and φ̂φ̂ backscatter in dB relative to λ².
    pub sigma_tt_db: f64,
    pub sigma_pp_db: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modal::ModeIndexSets;
    use crate::quad::Rule;

    #[test]
    fn zero_field_radiates_nothing() {
        let f = ApertureField::zeros(ModeIndexSets::new(2, 2).unwrap());
        let a = far_field(&f, [0.0, 0.0, 1.0], 1.0, 1.0, 2.0 * PI).unwrap();
        assert!(a.iter().all(|v| v.norm() == 0.0));
        assert!(far_field(&f, [1.0, 0.0, 0.0], 1.0, 1.0, 2.0 * PI).is_err());
    }

    #[test]
    fn single_mode_against_quadrature() {
        let sets = ModeIndexSets::new(1, 1).unwrap();
        let mut f = ApertureField::zeros(sets);
        f.e1[sets.set1.flatten(0, 1).unwrap()] = C64::new(1.0, 0.0);
        let k = 2.0 * PI;
        let dir = backscatter_direction(0.4, 0.3);
        let amp = far_field(&f, dir, 1.0, 1.5, k).unwrap();
        let rule = Rule::new(40);
        let mut t1 = C64::new(0.0, 0.0);
        for (x, wx) in rule.on(0.0, 1.0) {
            for (y, wy) in rule.on(0.0, 1.5) {
                t1 += wx * wy * (PI * y / 1.5).sin() * C64::from_polar(1.0, -k * (dir[0] * x + dir[1] * y));
            }
        }
        let want = cross(dir, [C64::new(0.0, 0.0), t1, C64::new(0.0, 0.0)]).map(|c| C64::new(0.0, k / (2.0 * PI)) * c);
        for i in 0..3 {
            assert!((amp[i] - want[i]).norm() < 1e-12 * t1.norm());
        }
        let dot: C64 = (0..3).map(|i| amp[i] * dir[i]).sum();
        assert!(dot.norm() < 1e-14 * t1.norm());
    }

    #[test]
    fn basis_is_orthonormal() {
        let (t, p) = spherical_basis(0.7, 1.1);
        let d = backscatter_direction(0.7, 1.1);
        let dot = |u: [f64; 3], v: [f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        assert!(dot(t, p).abs() < 1e-15 && dot(t, d).abs() < 1e-15 && dot(p, d).abs() < 1e-15);
        assert!((dot(t, t) - 1.0).abs() < 1e-15);
    }
}
