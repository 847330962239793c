//! Gram integrals ∫_Γ∫_Γ φ(x) g(x−y) ψ(y) dy dx of aperture modes.
//!
//! The exponential family e^{i(mπx₁/a + nπx₂/b)} is computed first: the inner
//! integral is a convolution evaluated spectrally on [`FftGrid`], the outer
//! one a trapezoid sum done by zero-padded FFTs. The trigonometric families
//! follow by expanding cos/sin into exponentials.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::transform::{mode_transform_1d, FftGrid, KernelTable};
use crate::Error;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Dense 4-index array T[(m,n)][(k₁,k₂)] over {0..M}×{0..N} on both sides.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    pub m: usize,
    pub n: usize,
    pub data: Vec<C64>,
}

impl Tensor4 {
    pub fn zeros(m: usize, n: usize) -> Self {
        let s = (m + 1) * (n + 1);
        Tensor4 { m, n, data: vec![ZERO; s * s] }
    }

    #[inline]
    pub fn idx(&self, m: usize, n: usize, k1: usize, k2: usize) -> usize {
        let w = self.n + 1;
        ((m * w + n) * (self.m + 1) + k1) * w + k2
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize, k1: usize, k2: usize) -> C64 {
        self.data[self.idx(m, n, k1, k2)]
    }

    /// Largest |T − Tᵀ| relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut big = 0.0f64;
        for m in 0..=self.m {
            for n in 0..=self.n {
                for k1 in 0..=self.m {
                    for k2 in 0..=self.n {
                        let v = self.get(m, n, k1, k2);
                        big = big.max(v.norm());
                        worst = worst.max((v - self.get(k1, k2, m, n)).norm());
                    }
                }
            }
        }
        if big == 0.0 {
            0.0
        } else {
            worst / big
        }
    }

    fn symmetrize(&mut self) {
        for m in 0..=self.m {
            for n in 0..=self.n {
                for k1 in 0..=self.m {
                    for k2 in 0..=self.n {
                        let (i, j) = (self.idx(m, n, k1, k2), self.idx(k1, k2, m, n));
                        if i < j {
                            let v = 0.5 * (self.data[i] + self.data[j]);
                            self.data[i] = v;
                            self.data[j] = v;
                        }
                    }
                }
            }
        }
    }

    pub fn scale(&mut self, s: C64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }
}

/// Trigonometric Gram tensors.
///
/// `i1`: cos(mπx₁/a)sin(nπx₂/b) on both sides, `i2`: sin·cos, `i3`: cos·cos.
#[derive(Clone, Debug, PartialEq)]
pub struct GramTensor {
    pub m: usize,
    pub n: usize,
    pub kappa: f64,
    pub a: f64,
    pub b: f64,
    pub quad_grid: usize,
    pub i1: Tensor4,
    pub i2: Tensor4,
    pub i3: Tensor4,
}

/// Exponential-mode Gram E[(m,n)][(k₁,k₂)] for m,k₁ ∈ −M..M, n,k₂ ∈ −N..N.
///
/// Only k₁,k₂ ≥ 0 is stored. The map x ↦ (a−x₁, x₂) on both integration
/// variables gives E[(m,n)][(k₁,k₂)] = (−1)^{m+k₁} E[(−m,n)][(−k₁,k₂)], and
/// likewise along the second axis.
#[derive(Clone, Debug)]
pub struct ExpGram {
    pub m: usize,
    pub n: usize,
    data: Vec<C64>,
}

impl ExpGram {
    pub fn get(&self, m: i64, n: i64, k1: i64, k2: i64) -> C64 {
        let (mm, nn) = (self.m as i64, self.n as i64);
        let mut sign = 1.0;
        let (mut m, mut n, mut k1, mut k2) = (m, n, k1, k2);
        if k1 < 0 {
            if (m + k1) % 2 != 0 {
                sign = -sign;
            }
            m = -m;
            k1 = -k1;
        }
        if k2 < 0 {
            if (n + k2) % 2 != 0 {
                sign = -sign;
            }
            n = -n;
            k2 = -k2;
        }
        let i = ((k1 * (nn + 1) + k2) * (2 * mm + 1) + (m + mm)) * (2 * nn + 1) + (n + nn);
        sign * self.data[i as usize]
    }
}

struct Plans {
    l: Arc<dyn Fft<f64>>,
    two_na: Arc<dyn Fft<f64>>,
    two_nb: Arc<dyn Fft<f64>>,
}

/// Exponential Gram by FFT convolution and FFT trapezoid sums.
pub fn exp_gram(m: usize, n: usize, kernel: &KernelTable) -> Result<ExpGram, Error> {
    let g = &kernel.grid;
    if g.na <= m || g.nb <= n {
        return Err(Error::Domain(format!("grid {} too small for (M,N)=({m},{n})", g.l)));
    }
    let (l, na, nb) = (g.l, g.na, g.nb);
    let mut planner = FftPlanner::new();
    let plans = Plans {
        l: planner.plan_fft_inverse(l),
        two_na: planner.plan_fft_inverse(2 * na),
        two_nb: planner.plan_fft_inverse(2 * nb),
    };
    let xi1: Vec<f64> = (0..l).map(|i| g.freq(i) as f64 / g.p1).collect();
    let xi2: Vec<f64> = (0..l).map(|i| g.freq(i) as f64 / g.p2).collect();
    let norm = 1.0 / (g.p1 * g.p2);
    let block = (2 * m + 1) * (2 * n + 1);
    let mut data = vec![ZERO; (m + 1) * (n + 1) * block];

    for k2 in 0..=n {
        let phi2: Vec<C64> = xi2.iter().map(|&x| mode_transform_1d(x, k2 as i64, g.b)).collect();
        // T[j₁][n₂] = Σ_{j₂} Ĝ(j₁,j₂)Φ₂(j₂)e^{2πi j₂ n₂/L}, n₂ ∈ 0..=N_b
        let t: Vec<C64> = (0..l)
            .into_par_iter()
            .flat_map_iter(|i1| {
                let mut buf: Vec<C64> =
                    (0..l).map(|i2| kernel.values[i1 * l + i2] * phi2[i2]).collect();
                plans.l.process(&mut buf);
                buf.truncate(nb + 1);
                buf.into_iter()
            })
            .collect();
        let blocks: Vec<Vec<C64>> = (0..=m)
            .into_par_iter()
            .map(|k1| {
                let phi1: Vec<C64> =
                    xi1.iter().map(|&x| norm * mode_transform_1d(x, k1 as i64, g.a)).collect();
                let conv = inner_samples(&t, &phi1, l, na, nb, &plans);
                outer_sums(&conv, m, n, na, nb, g.a / na as f64, g.b / nb as f64, &plans)
            })
            .collect();
        for (k1, b) in blocks.into_iter().enumerate() {
            let off = (k1 * (n + 1) + k2) * block;
            data[off..off + block].copy_from_slice(&b);
        }
    }
    Ok(ExpGram { m, n, data })
}

/// Convolution samples at aperture nodes, row-major (N_a+1)×(N_b+1).
fn inner_samples(t: &[C64], phi1: &[C64], l: usize, na: usize, nb: usize, p: &Plans) -> Vec<C64> {
    let mut out = vec![ZERO; (na + 1) * (nb + 1)];
    let mut buf = vec![ZERO; l];
    for c in 0..=nb {
        for i1 in 0..l {
            buf[i1] = phi1[i1] * t[i1 * (nb + 1) + c];
        }
        p.l.process(&mut buf);
        for r in 0..=na {
            out[r * (nb + 1) + c] = buf[r];
        }
    }
    out
}

/// Σ trapezoid weights · e^{imπ n₁/N_a} e^{inπ n₂/N_b} · f(n₁,n₂) for all
/// |m| ≤ M, |n| ≤ N, laid out [(m+M)(2N+1) + n+N].
#[allow(clippy::too_many_arguments)]
fn outer_sums(f: &[C64], m: usize, n: usize, na: usize, nb: usize, d1: f64, d2: f64, p: &Plans) -> Vec<C64> {
    let trap = |i: usize, last: usize, d: f64| if i == 0 || i == last { 0.5 * d } else { d };
    let wn = 2 * n + 1;
    let mut rows = vec![ZERO; (na + 1) * wn];
    let mut buf = vec![ZERO; 2 * nb];
    for r in 0..=na {
        buf.iter_mut().for_each(|v| *v = ZERO);
        for c in 0..=nb {
            buf[c] = trap(c, nb, d2) * f[r * (nb + 1) + c];
        }
        p.two_nb.process(&mut buf);
        for (j, nn) in (-(n as i64)..=n as i64).enumerate() {
            rows[r * wn + j] = buf[nn.rem_euclid(2 * nb as i64) as usize];
        }
    }
    let mut out = vec![ZERO; (2 * m + 1) * wn];
    let mut buf = vec![ZERO; 2 * na];
    for j in 0..wn {
        buf.iter_mut().for_each(|v| *v = ZERO);
        for r in 0..=na {
            buf[r] = trap(r, na, d1) * rows[r * wn + j];
        }
        p.two_na.process(&mut buf);
        for (i, mm) in (-(m as i64)..=m as i64).enumerate() {
            out[i * wn + j] = buf[mm.rem_euclid(2 * na as i64) as usize];
        }
    }
    out
}

/// cos(kθ) = Σ_s ½e^{iskθ}, sin(kθ) = Σ_s (s/2i)e^{iskθ}.
#[derive(Clone, Copy)]
enum Trig {
    Cos,
    Sin,
}

impl Trig {
    fn vanishes(self, k: i64) -> bool {
        matches!(self, Trig::Sin) && k == 0
    }

    fn weight(self, s: i64) -> C64 {
        match self {
            Trig::Cos => C64::new(0.5, 0.0),
            Trig::Sin => C64::new(0.0, -0.5 * s as f64),
        }
    }
}

/// Expands one trigonometric pattern into 16 exponential entries per value,
/// then symmetrizes: the trapezoid outer sum and the exact inner transform
/// are not mirror images, so the raw result is only symmetric to grid
/// accuracy.
fn trig_family(e: &ExpGram, p1: Trig, p2: Trig) -> Tensor4 {
    let (mm, nn) = (e.m, e.n);
    let mut t = Tensor4::zeros(mm, nn);
    let s = [1i64, -1];
    t.data.par_chunks_mut((mm + 1) * (nn + 1)).enumerate().for_each(|(row, out)| {
        let (m, n) = ((row / (nn + 1)) as i64, (row % (nn + 1)) as i64);
        for k1 in 0..=mm as i64 {
            for k2 in 0..=nn as i64 {
                // sin(0·θ) ≡ 0, and reflecting x₁ ↦ a−x₁ in both variables
                // multiplies the integrand by (−1)^{m+k₁} (same on axis 2);
                // keep these zeros exact rather than rounding residue
                if p1.vanishes(m) || p1.vanishes(k1) || p2.vanishes(n) || p2.vanishes(k2) || (m + k1) % 2 != 0 || (n + k2) % 2 != 0 {
                    continue;
                }
                let mut v = ZERO;
                for &s1 in &s {
                    for &s2 in &s {
                        let w12 = p1.weight(s1) * p2.weight(s2);
                        for &s3 in &s {
                            for &s4 in &s {
                                let w = w12 * p1.weight(s3) * p2.weight(s4);
                                v += w * e.get(s1 * m, s2 * n, s3 * k1, s4 * k2);
                            }
                        }
                    }
                }
                out[(k1 as usize) * (nn + 1) + k2 as usize] = v;
            }
        }
    });
    t.symmetrize();
    t
}

/// Gram tensors of the three trigonometric families.
pub fn trig_gram(e: &ExpGram, kernel: &KernelTable) -> GramTensor {
    let g = &kernel.grid;
    GramTensor {
        m: e.m,
        n: e.n,
        kappa: kernel.kappa,
        a: g.a,
        b: g.b,
        quad_grid: g.l,
        i1: trig_family(e, Trig::Cos, Trig::Sin),
        i2: trig_family(e, Trig::Sin, Trig::Cos),
        i3: trig_family(e, Trig::Cos, Trig::Cos),
    }
}

impl GramTensor {
    /// Full FFT path: kernel table, exponential Gram, trigonometric families.
    pub fn compute(m: usize, n: usize, kappa: f64, a: f64, b: f64, quad_grid: usize, threshold: f64) -> Result<Self, Error> {
        let grid = FftGrid::new(quad_grid, a, b, m, n)?;
        let kernel = KernelTable::new(&grid, kappa, threshold)?;
        let e = exp_gram(m, n, &kernel)?;
        Ok(trig_gram(&e, &kernel))
    }

    /// Builds the trigonometric tensors from any exponential-mode evaluator.
    pub fn from_exp(
        m: usize,
        n: usize,
        kappa: f64,
        a: f64,
        b: f64,
        quad_grid: usize,
        e: &ExpGram,
    ) -> Self {
        GramTensor {
            m,
            n,
            kappa,
            a,
            b,
            quad_grid,
            i1: trig_family(e, Trig::Cos, Trig::Sin),
            i2: trig_family(e, Trig::Sin, Trig::Cos),
            i3: trig_family(e, Trig::Cos, Trig::Cos),
        }
    }
}

impl ExpGram {
    /// Wraps values given for every signed index; only k₁,k₂ ≥ 0 is kept.
    pub fn from_fn(m: usize, n: usize, f: impl Fn(i64, i64, i64, i64) -> C64) -> Self {
        let block = (2 * m + 1) * (2 * n + 1);
        let mut data = vec![ZERO; (m + 1) * (n + 1) * block];
        for k1 in 0..=m as i64 {
            for k2 in 0..=n as i64 {
                let off = (k1 as usize * (n + 1) + k2 as usize) * block;
                let mut i = off;
                for mm in -(m as i64)..=m as i64 {
                    for nn in -(n as i64)..=n as i64 {
                        data[i] = f(mm, nn, k1, k2);
                        i += 1;
                    }
                }
            }
        }
        ExpGram { m, n, data }
    }
}
