//! Discretized transparent boundary condition on the aperture.
//!
//! Projecting the first two tangential TBC components onto the E₁ and E₂
//! modes, with a backward difference for ∂₃, gives
//!
//!   E₁,J + (−I − F₁ − H₁)E₁,J+1 − G₁E₂,J+1 + I₁E₃,J+1 = g₁
//!   E₂,J − H₂E₁,J+1 + (−I − F₂ − G₂)E₂,J+1 + I₂E₃,J+1 = g₂
//!
//! and the surface divergence gives E₃,J + F₃E₁,J+1 + G₃E₂,J+1 − E₃,J+1 = 0.
//! The ∂g integrals are reduced by parts to the cos·cos Gram I₃; boundary
//! terms drop because each test function carries a sine factor that
//! vanishes on the edges it is differentiated across.
//!
//! Sign of the nonlocal operator: the aperture representation
//! E^s = 2∫(ẑ×E)×∇_y g gives ∇×E^s = +2κ₀²∫(ẑ×E)·G₀, so ẑ×∇×E picks up
//! −2κ₀²∫E_t g. The blocks F, G, H below carry that sign; with the opposite
//! one the scattered field is an incoming wave and a lossless cavity
//! absorbs the scattered power instead of radiating it.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::config::IncidentWave;
use crate::modal::{ModeIndexSets, ModeSet};
use crate::singular::GramTensor;
use crate::Error;

/// ∫₀^len e^{iμx} dx, written so μ → 0 is regular.
fn exp_integral(mu: f64, len: f64) -> C64 {
    let half = 0.5 * mu * len;
    let sinc = if half.abs() < 1e-8 { 1.0 - half * half / 6.0 } else { half.sin() / half };
    C64::from_polar(len * sinc, half)
}

/// ∫₀^len cos(kπx/len)e^{iγx} dx.
pub fn cos_exp_integral(k: usize, gamma: f64, len: f64) -> C64 {
    let w = k as f64 * PI / len;
    0.5 * (exp_integral(gamma + w, len) + exp_integral(gamma - w, len))
}

/// ∫₀^len sin(kπx/len)e^{iγx} dx.
pub fn sin_exp_integral(k: usize, gamma: f64, len: f64) -> C64 {
    let w = k as f64 * PI / len;
    (exp_integral(gamma + w, len) - exp_integral(gamma - w, len)) / C64::new(0.0, 2.0)
}

/// Dense TBC blocks; `i1`, `i2`, `f3`, `g3` are the sparse coupling blocks
/// stored densely.
#[derive(Clone, Debug)]
pub struct TbcSystem {
    pub sets: ModeIndexSets,
    pub h: f64,
    pub kappa0: f64,
    pub f1: DMatrix<C64>,
    pub g1: DMatrix<C64>,
    pub h1: DMatrix<C64>,
    pub f2: DMatrix<C64>,
    pub g2: DMatrix<C64>,
    pub h2: DMatrix<C64>,
    pub i1: DMatrix<C64>,
    pub i2: DMatrix<C64>,
    pub f3: DMatrix<C64>,
    pub g3: DMatrix<C64>,
}

/// Row weight h/q for E₁ rows: q = ab/2 at m = 0, ab/4 otherwise.
fn q1(m: usize, a: f64, b: f64) -> f64 {
    if m == 0 {
        0.5 * a * b
    } else {
        0.25 * a * b
    }
}

/// Row weight for E₂ rows: ab/2 at n = 0, ab/4 otherwise.
fn q2(n: usize, a: f64, b: f64) -> f64 {
    if n == 0 {
        0.5 * a * b
    } else {
        0.25 * a * b
    }
}

fn block(rows: &ModeSet, cols: &ModeSet, f: impl Fn((usize, usize), (usize, usize)) -> C64 + Sync) -> DMatrix<C64> {
    let (nr, nc) = (rows.len(), cols.len());
    let row_idx: Vec<(usize, usize)> = rows.iter().collect();
    let col_idx: Vec<(usize, usize)> = cols.iter().collect();
    // nalgebra is column-major: build each column in parallel
    let data: Vec<C64> = col_idx
        .par_iter()
        .flat_map_iter(|&k| row_idx.iter().map(move |&mn| (mn, k)).collect::<Vec<_>>())
        .map(|(mn, k)| f(mn, k))
        .collect();
    DMatrix::from_vec(nr, nc, data)
}

/// Assembles every matrix block from the Gram tensors.
pub fn assemble_tbc(gram: &GramTensor, sets: &ModeIndexSets, h: f64) -> Result<TbcSystem, Error> {
    if gram.m != sets.m || gram.n != sets.n {
        return Err(Error::Dimension(format!(
            "Gram tensor is ({},{}), mode sets are ({},{})",
            gram.m, gram.n, sets.m, sets.n
        )));
    }
    let (a, b, k0) = (gram.a, gram.b, gram.kappa);
    let (s1, s2, s3) = (&sets.set1, &sets.set2, &sets.set3);
    let pi2 = PI * PI;
    let f1 = block(s1, s1, |(m, n), (k1, k2)| (-h / q1(m, a, b) * 2.0 * k0 * k0) * gram.i1.get(m, n, k1, k2));
    let g1 = block(s1, s2, |(m, n), (k1, k2)| {
        (-h / q1(m, a, b) * 2.0 * (k1 * n) as f64 * pi2 / (a * b)) * gram.i3.get(m, n, k1, k2)
    });
    let h1 = block(s1, s1, |(m, n), (k1, k2)| {
        (h / q1(m, a, b) * 2.0 * (k2 * n) as f64 * pi2 / (b * b)) * gram.i3.get(m, n, k1, k2)
    });
    let f2 = block(s2, s2, |(m, n), (k1, k2)| (-h / q2(n, a, b) * 2.0 * k0 * k0) * gram.i2.get(m, n, k1, k2));
    let g2 = block(s2, s2, |(m, n), (k1, k2)| {
        (h / q2(n, a, b) * 2.0 * (k1 * m) as f64 * pi2 / (a * a)) * gram.i3.get(m, n, k1, k2)
    });
    let h2 = block(s2, s1, |(m, n), (k1, k2)| {
        (-h / q2(n, a, b) * 2.0 * (k2 * m) as f64 * pi2 / (a * b)) * gram.i3.get(m, n, k1, k2)
    });
    let diag = |rows: &ModeSet, cols: &ModeSet, w: &dyn Fn(usize, usize) -> f64| {
        let mut x = DMatrix::zeros(rows.len(), cols.len());
        for (i, (m, n)) in rows.iter().enumerate() {
            if let Some(j) = cols.flatten(m, n) {
                x[(i, j)] = C64::new(w(m, n), 0.0);
            }
        }
        x
    };
    let wm = |m: usize, _: usize| m as f64 * PI * h / a;
    let wn = |_: usize, n: usize| n as f64 * PI * h / b;
    Ok(TbcSystem {
        sets: *sets,
        h,
        kappa0: k0,
        f1,
        g1,
        h1,
        f2,
        g2,
        h2,
        // rows with m = 0 (resp. n = 0) have no set3 partner and stay zero
        i1: diag(s1, s3, &wm),
        i2: diag(s2, s3, &wn),
        f3: diag(s3, s1, &wm),
        g3: diag(s3, s2, &wn),
    })
}

/// Incident right-hand sides g₁ over set1 and g₂ over set2.
pub fn incident_rhs(wave: &IncidentWave, sets: &ModeIndexSets, a: f64, b: f64, h: f64) -> (Vec<C64>, Vec<C64>) {
    let i = C64::new(0.0, 1.0);
    let [p1, p2, p3] = wave.p;
    let c1 = 2.0 * i * (wave.alpha1 * p3 + wave.beta * p1);
    let c2 = 2.0 * i * (wave.alpha2 * p3 + wave.beta * p2);
    let g1 = sets
        .set1
        .iter()
        .map(|(m, n)| {
            let gt = cos_exp_integral(m, wave.alpha1, a) * sin_exp_integral(n, wave.alpha2, b);
            h / q1(m, a, b) * c1 * gt
        })
        .collect();
    let g2 = sets
        .set2
        .iter()
        .map(|(m, n)| {
            let gt = sin_exp_integral(m, wave.alpha1, a) * cos_exp_integral(n, wave.alpha2, b);
            h / q2(n, a, b) * c2 * gt
        })
        .collect();
    (g1, g2)
}
