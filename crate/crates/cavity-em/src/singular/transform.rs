//! Convolution grid, closed-form transforms of the aperture modes, and the
//! transform of the truncated kernel.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;

use super::bessel::bessel_osc_integral;
use crate::Error;

/// Aperture samples per axis that the default grid guarantees.
pub const DEFAULT_APERTURE_SAMPLES: usize = 318;

/// ∫₀^len e^{−2πiξy} e^{ikπy/len} dy, written as len·e^{iφ/2}·sinc(φ/2) so
/// the resonant limit w → 0 needs no special case.
pub fn mode_transform_1d(xi: f64, k: i64, len: f64) -> C64 {
    let w = -2.0 * PI * xi + k as f64 * PI / len;
    let half = 0.5 * w * len;
    let sinc = if half.abs() < 1e-8 { 1.0 - half * half / 6.0 } else { half.sin() / half };
    C64::from_polar(len * sinc, half)
}

/// Fourier transform of e^{i(k₁πy₁/a + k₂πy₂/b)} restricted to [0,a]×[0,b].
pub fn rect_mode_transform(xi1: f64, xi2: f64, k1: i64, k2: i64, a: f64, b: f64) -> C64 {
    mode_transform_1d(xi1, k1, a) * mode_transform_1d(xi2, k2, b)
}

/// Periodic grid for the aperture convolution.
///
/// The kernel is truncated at R = √2·max(a,b) ≥ the aperture diameter. The
/// period P_i = L·a_i/N_i ≥ a_i + R keeps periodic images of the
/// convolution off the aperture, and node n·P_i/L lands on the aperture
/// sample n·a_i/N_i.
#[derive(Clone, Debug, PartialEq)]
pub struct FftGrid {
    pub l: usize,
    pub na: usize,
    pub nb: usize,
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub p1: f64,
    pub p2: f64,
}

impl FftGrid {
    pub fn new(l: usize, a: f64, b: f64, m: usize, n: usize) -> Result<Self, Error> {
        let r = 2f64.sqrt() * a.max(b);
        let na = (l as f64 * a / (a + r)).floor() as usize;
        let nb = (l as f64 * b / (b + r)).floor() as usize;
        // the outer trapezoid sums use FFTs of length 2N_i and need N_i > mode count
        if na <= m.max(1) || nb <= n.max(1) {
            return Err(Error::Domain(format!(
                "quad_grid {l} too small for (M,N)=({m},{n}): {na}x{nb} aperture samples"
            )));
        }
        Ok(FftGrid { l, na, nb, a, b, r, p1: l as f64 * a / na as f64, p2: l as f64 * b / nb as f64 })
    }

    /// Smallest grid giving at least [`DEFAULT_APERTURE_SAMPLES`] aperture
    /// samples per axis, and never below 16·max(M,N).
    pub fn default_size(a: f64, b: f64, m: usize, n: usize) -> usize {
        let r = 2f64.sqrt() * a.max(b);
        let floor = 16 * m.max(n);
        let mut l = (DEFAULT_APERTURE_SAMPLES as f64 * (a.min(b) + r) / a.min(b)).floor() as usize;
        while (l as f64 * a / (a + r)).floor() < DEFAULT_APERTURE_SAMPLES as f64
            || (l as f64 * b / (b + r)).floor() < DEFAULT_APERTURE_SAMPLES as f64
        {
            l += 1;
        }
        l.max(floor)
    }

    /// Signed frequency index of FFT bin `i`.
    pub fn freq(&self, i: usize) -> i64 {
        if i < (self.l + 1) / 2 {
            i as i64
        } else {
            i as i64 - self.l as i64
        }
    }
}

/// Ĝ(ξ) = ∫ g(z)·1{|z|≤R} e^{−2πiξ·z} dz = ½∫₀ᴿ J₀(2π|ξ|r)e^{iκr}dr on the
/// grid frequencies ξ = (j₁/P₁, j₂/P₂), stored in FFT bin order.
#[derive(Clone, Debug)]
pub struct KernelTable {
    pub grid: FftGrid,
    pub kappa: f64,
    pub values: Vec<C64>,
}

impl KernelTable {
    pub fn new(grid: &FftGrid, kappa: f64, threshold: f64) -> Result<Self, Error> {
        let l = grid.l;
        let half = l / 2;
        let isotropic = grid.p1 == grid.p2;
        // the transform is even in each frequency, so one quadrant suffices;
        // with equal periods it depends on j₁²+j₂² alone
        let key = |j1: u64, j2: u64| if isotropic { (j1 * j1 + j2 * j2, 0) } else { (j1, j2) };
        let mut keys: Vec<(u64, u64)> = Vec::with_capacity((half + 1) * (half + 1));
        for j1 in 0..=half as u64 {
            for j2 in 0..=half as u64 {
                if isotropic && j2 > j1 {
                    continue;
                }
                keys.push(key(j1, j2));
            }
        }
        keys.sort_unstable();
        keys.dedup();
        let vals: Vec<C64> = keys
            .par_iter()
            .map(|&(u, v)| {
                let xi = if isotropic {
                    (u as f64).sqrt() / grid.p1
                } else {
                    (u as f64 / grid.p1).hypot(v as f64 / grid.p2)
                };
                bessel_osc_integral(grid.r, 2.0 * PI * xi, kappa, threshold).map(|v| 0.5 * v)
            })
            .collect::<Result<_, _>>()?;
        let mut values = vec![C64::new(0.0, 0.0); l * l];
        for i1 in 0..l {
            let j1 = grid.freq(i1).unsigned_abs();
            for i2 in 0..l {
                let j2 = grid.freq(i2).unsigned_abs();
                let k = keys.binary_search(&key(j1, j2)).expect("key enumerated above");
                values[i1 * l + i2] = vals[k];
            }
        }
        Ok(KernelTable { grid: grid.clone(), kappa, values })
    }

    /// Value at signed frequency indices.
    pub fn at(&self, j1: i64, j2: i64) -> C64 {
        let l = self.grid.l as i64;
        self.values[(j1.rem_euclid(l) * l + j2.rem_euclid(l)) as usize]
    }
}
