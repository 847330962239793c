//! Per-mode vertical finite-difference systems and their elimination.
//!
//! Each Fourier mode obeys E'' + (κ² − (mπ/a)² − (nπ/b)²)E = 0 in x₃. The
//! standard three-point stencil gives a tridiagonal matrix with unit
//! off-diagonals and diagonal −2 + d, d = h²(κ² − k_t²). Forward elimination
//! leaves u_J·E_J + E_{J+1} = 0 in the last row, so the last pivot u_J is
//! all the aperture system needs; the other pivots are kept for recovering
//! the interior.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::config::{CavityConfig, Depth};
use crate::modal::{ApertureField, ModeIndexSets, VolumeField};
use crate::Error;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Pivots closer to zero than this, relative to the diagonal scale, are
/// treated as a resonance.
pub const RESONANCE_TOL: f64 = 1e-12;

/// Bottom closure of a vertical system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Pattern {
    /// E₀ = 0: first diagonal −2 + d.
    Dirichlet,
    /// E₀ = E₁: first diagonal −1 + d.
    Neumann,
    /// First diagonal given explicitly (top layer above an interface).
    FirstDiagonal(C64),
}

/// Complex value held as mantissa·2^exp so long pivot products neither
/// overflow nor underflow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mant: C64,
    pub exp: i32,
}

impl Scaled {
    pub const ONE: Scaled = Scaled { mant: ONE, exp: 0 };

    pub fn mul(self, z: C64) -> Scaled {
        let mut m = self.mant * z;
        let mut e = self.exp;
        let mag = m.re.abs().max(m.im.abs());
        if mag != 0.0 && mag.is_finite() {
            let k = mag.log2().floor() as i32;
            m = m * 2f64.powi(-k);
            e += k;
        }
        Scaled { mant: m, exp: e }
    }

    pub fn recip(self) -> Scaled {
        let r = ONE / self.mant;
        Scaled { mant: r, exp: -self.exp }.mul(ONE)
    }

    /// Plain value; underflows to zero and overflows to infinity.
    pub fn value(self) -> C64 {
        let e = self.exp.clamp(-2000, 2000);
        if e < -1074 {
            return ZERO;
        }
        // split so 2^e never overflows on its own
        let (e1, e2) = (e / 2, e - e / 2);
        self.mant * 2f64.powi(e1) * 2f64.powi(e2)
    }
}

/// Forward sweep of one tridiagonal system.
#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    /// u₁..u_J.
    pub pivots: Vec<C64>,
}

impl Sweep {
    pub fn last(&self) -> C64 {
        *self.pivots.last().expect("J ≥ 1")
    }

    /// det = ∏ u_j.
    pub fn det(&self) -> Scaled {
        self.pivots.iter().fold(Scaled::ONE, |s, &u| s.mul(u))
    }

    /// (J,1) entry of L⁻¹ for L with subdiagonal 1/u_j: ∏_{j<J}(−1/u_j).
    pub fn l_inv_last_first(&self) -> C64 {
        let n = self.pivots.len();
        self.pivots[..n - 1].iter().fold(Scaled::ONE, |s, &u| s.mul(-ONE / u)).value()
    }

    /// First solution component when the right-hand side is −e_J·t:
    /// (−1)^J t / det = t·∏(−1/u_j).
    pub fn first_from_top(&self) -> C64 {
        self.pivots.iter().fold(Scaled::ONE, |s, &u| s.mul(-ONE / u)).value()
    }

    /// Solves the system for a right-hand side given as sparse (row, value)
    /// entries; rows are 0-based.
    pub fn solve(&self, rhs: &[(usize, C64)]) -> Vec<C64> {
        let n = self.pivots.len();
        let mut y = vec![ZERO; n];
        for &(i, v) in rhs {
            y[i] += v;
        }
        for j in 1..n {
            y[j] = y[j] - y[j - 1] / self.pivots[j - 1];
        }
        let mut x = vec![ZERO; n];
        x[n - 1] = y[n - 1] / self.pivots[n - 1];
        for j in (0..n - 1).rev() {
            x[j] = (y[j] - x[j + 1]) / self.pivots[j];
        }
        x
    }
}

/// Forward sweep of the J×J matrix with off-diagonals 1, diagonal −2 + d and
/// the first diagonal set by `pattern`. `d` is the scaled shift h²(κ² − k_t²).
pub fn tridiag_lu_lastpivot(pattern: Pattern, d: C64, j: usize, mode: (usize, usize)) -> Result<Sweep, Error> {
    if j < 1 {
        return Err(Error::Domain("vertical system needs J ≥ 1".into()));
    }
    let diag = C64::new(-2.0, 0.0) + d;
    let first = match pattern {
        Pattern::Dirichlet => diag,
        Pattern::Neumann => C64::new(-1.0, 0.0) + d,
        Pattern::FirstDiagonal(v) => v,
    };
    let tol = RESONANCE_TOL * diag.norm().max(2.0);
    let mut pivots = Vec::with_capacity(j);
    let mut u = first;
    for row in 0..j {
        if row > 0 {
            u = diag - ONE / u;
        }
        if !(u.norm() >= tol) {
            return Err(Error::Resonance { m: mode.0, n: mode.1, row, pivot: u.norm() });
        }
        pivots.push(u);
    }
    Ok(Sweep { pivots })
}

/// How the tangential components are matched across a layer interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InterfaceClosure {
    /// One-sided differences with the h²/2 curvature correction on both
    /// sides; with equal media it reproduces the homogeneous stencil.
    #[default]
    SecondOrder,
    /// Plain one-sided differences.
    FirstOrder,
}

/// Per-mode sweeps retained for interior recovery.
#[derive(Clone, Debug)]
struct ModeSweeps {
    /// E₁/E₂ system next to the aperture (Dirichlet, or A₃ when layered).
    tan: Option<Sweep>,
    /// E₃ system next to the aperture (Neumann, or A₄ when layered).
    nor: Option<Sweep>,
    /// Layered: bottom-layer Dirichlet and Neumann sweeps.
    bottom: Option<(Sweep, Option<Sweep>)>,
    w1: C64,
    w3: C64,
}

#[derive(Clone, Debug)]
pub struct LayerData {
    /// ε₁/ε₂ (top over bottom).
    pub rho: C64,
    pub i_top: usize,
    pub closure: InterfaceClosure,
    /// Coupling scalars d₁ over set1 and d₂ over set2 (zero off set3).
    pub d1: Vec<C64>,
    pub d2: Vec<C64>,
    /// det(U₄) over set3.
    pub det_u4: Vec<Scaled>,
    /// (I,1) entry of L₃⁻¹ over set1 and set2.
    pub l_tilde1: Vec<C64>,
    pub l_tilde2: Vec<C64>,
}

/// Last pivots at the aperture and the E₃ coupling of the layered case.
#[derive(Clone, Debug)]
pub struct DtnTable {
    pub sets: ModeIndexSets,
    pub h: f64,
    pub j: usize,
    /// R₁ (or R₄) over set1, R₂ (R₅) over set2, R₃ (R₆) over set3.
    pub r1: Vec<C64>,
    pub r2: Vec<C64>,
    pub r3: Vec<C64>,
    /// s = −l̃·d over set1 and set2; zero for a homogeneous cavity.
    pub s1: Vec<C64>,
    pub s2: Vec<C64>,
    pub layered: Option<LayerData>,
    sweeps: Vec<ModeSweeps>,
}

fn shift(h: f64, kappa0: f64, eps: C64, m: usize, n: usize, a: f64, b: f64) -> C64 {
    let kt2 = (m as f64 * PI / a).powi(2) + (n as f64 * PI / b).powi(2);
    h * h * (kappa0 * kappa0 * eps - kt2)
}

impl DtnTable {
    fn sweep_at(&self, m: usize, n: usize) -> &ModeSweeps {
        &self.sweeps[m * (self.sets.n + 1) + n]
    }

    /// Homogeneous cavity: Dirichlet sweeps for E₁/E₂, Neumann for E₃.
    pub fn homogeneous(cfg: &CavityConfig, sets: &ModeIndexSets) -> Result<Self, Error> {
        let Depth::Homogeneous { .. } = cfg.depth else {
            return Err(Error::Domain("homogeneous DtN table needs a homogeneous cavity".into()));
        };
        let (h, j, eps) = (cfg.h(), cfg.j, cfg.eps[0]);
        let all: Vec<(usize, usize)> = (0..=sets.m).flat_map(|m| (0..=sets.n).map(move |n| (m, n))).collect();
        let sweeps: Vec<ModeSweeps> = all
            .par_iter()
            .map(|&(m, n)| -> Result<ModeSweeps, Error> {
                let d = shift(h, cfg.kappa0, eps, m, n, cfg.a, cfg.b);
                let tan = if m + n > 0 { Some(tridiag_lu_lastpivot(Pattern::Dirichlet, d, j, (m, n))?) } else { None };
                let nor = if m > 0 && n > 0 { Some(tridiag_lu_lastpivot(Pattern::Neumann, d, j, (m, n))?) } else { None };
                Ok(ModeSweeps { tan, nor, bottom: None, w1: ZERO, w3: ZERO })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self::finish(sets, h, j, sweeps, None))
    }

    /// Two layers: bottom sweeps with ε₂, top sweeps with ε₁ whose first
    /// diagonals carry the interface closure.
    pub fn layered(cfg: &CavityConfig, sets: &ModeIndexSets, closure: InterfaceClosure) -> Result<Self, Error> {
        let Depth::Layered { .. } = cfg.depth else {
            return Err(Error::Domain("layered DtN table needs a layered cavity".into()));
        };
        let i_top = cfg.i_top.ok_or_else(|| Error::config("I_top", "layered cavity needs I_top"))?;
        let (h, j) = (cfg.h(), cfg.j);
        let (e1, e2) = (cfg.eps[0], cfg.eps[1]);
        let rho = e1 / e2;
        let all: Vec<(usize, usize)> = (0..=sets.m).flat_map(|m| (0..=sets.n).map(move |n| (m, n))).collect();
        let sweeps: Vec<ModeSweeps> = all
            .par_iter()
            .map(|&(m, n)| -> Result<ModeSweeps, Error> {
                if m + n == 0 {
                    return Ok(ModeSweeps { tan: None, nor: None, bottom: None, w1: ZERO, w3: ZERO });
                }
                let d1 = shift(h, cfg.kappa0, e1, m, n, cfg.a, cfg.b);
                let d2 = shift(h, cfg.kappa0, e2, m, n, cfg.a, cfg.b);
                let bt = tridiag_lu_lastpivot(Pattern::Dirichlet, d2, j, (m, n))?;
                let w1 = match closure {
                    InterfaceClosure::SecondOrder => 2.0 + ONE / bt.last() - 0.5 * (d1 + d2),
                    InterfaceClosure::FirstOrder => 2.0 + ONE / bt.last(),
                };
                let tan = tridiag_lu_lastpivot(Pattern::FirstDiagonal(ONE / w1 - 2.0 + d1), d1, i_top, (m, n))?;
                let (bn, nor, w3) = if m > 0 && n > 0 {
                    let bn = tridiag_lu_lastpivot(Pattern::Neumann, d2, j, (m, n))?;
                    let w3 = match closure {
                        InterfaceClosure::SecondOrder => 1.0 - 0.5 * d1 + rho * (1.0 + ONE / bn.last() - 0.5 * d2),
                        InterfaceClosure::FirstOrder => 1.0 + rho * (1.0 + ONE / bn.last()),
                    };
                    let nor = tridiag_lu_lastpivot(Pattern::FirstDiagonal(ONE / w3 - 2.0 + d1), d1, i_top, (m, n))?;
                    (Some(bn), Some(nor), w3)
                } else {
                    (None, None, ZERO)
                };
                Ok(ModeSweeps { tan: Some(tan), nor, bottom: Some((bt, bn)), w1, w3 })
            })
            .collect::<Result<_, _>>()?;

        let mut t = Self::finish(sets, h, j, sweeps, None);
        let (s1set, s2set, s3set) = (sets.set1, sets.set2, sets.set3);
        let mut d1v = vec![ZERO; s1set.len()];
        let mut d2v = vec![ZERO; s2set.len()];
        let mut lt1 = vec![ZERO; s1set.len()];
        let mut lt2 = vec![ZERO; s2set.len()];
        let mut det = vec![Scaled::ONE; s3set.len()];
        let mut s1 = vec![ZERO; s1set.len()];
        let mut s2 = vec![ZERO; s2set.len()];
        for (i, (m, n)) in s3set.iter().enumerate() {
            det[i] = t.sweep_at(m, n).nor.as_ref().expect("set3 mode").det();
        }
        // d_l = (ρ−1)·(mπh/a or nπh/b)/w₁ · (1/w₃) · (−1)^I/det(U₄), the
        // factor by which u₃ at the aperture enters the first A₃ row
        let coupling = |m: usize, n: usize, k: f64| -> C64 {
            let s = t.sweep_at(m, n);
            let nor = s.nor.as_ref().expect("set3 mode");
            (rho - 1.0) * k / s.w1 / s.w3 * nor.first_from_top()
        };
        for (i, (m, n)) in s1set.iter().enumerate() {
            lt1[i] = t.sweep_at(m, n).tan.as_ref().unwrap().l_inv_last_first();
            if m > 0 {
                d1v[i] = coupling(m, n, m as f64 * PI * h / cfg.a);
            }
            s1[i] = -lt1[i] * d1v[i];
        }
        for (i, (m, n)) in s2set.iter().enumerate() {
            lt2[i] = t.sweep_at(m, n).tan.as_ref().unwrap().l_inv_last_first();
            if n > 0 {
                d2v[i] = coupling(m, n, n as f64 * PI * h / cfg.b);
            }
            s2[i] = -lt2[i] * d2v[i];
        }
        t.s1 = s1;
        t.s2 = s2;
        t.layered = Some(LayerData { rho, i_top, closure, d1: d1v, d2: d2v, det_u4: det, l_tilde1: lt1, l_tilde2: lt2 });
        Ok(t)
    }

    fn finish(sets: &ModeIndexSets, h: f64, j: usize, sweeps: Vec<ModeSweeps>, layered: Option<LayerData>) -> Self {
        let w = sets.n + 1;
        let last = |s: &Option<Sweep>| s.as_ref().expect("mode in set").last();
        let r1 = sets.set1.iter().map(|(m, n)| last(&sweeps[m * w + n].tan)).collect();
        let r2 = sets.set2.iter().map(|(m, n)| last(&sweeps[m * w + n].tan)).collect();
        let r3 = sets.set3.iter().map(|(m, n)| last(&sweeps[m * w + n].nor)).collect();
        DtnTable {
            sets: *sets,
            h,
            j,
            r1,
            r2,
            r3,
            s1: vec![ZERO; sets.set1.len()],
            s2: vec![ZERO; sets.set2.len()],
            layered,
            sweeps,
        }
    }

    /// Builds the table matching the config's layer count.
    pub fn for_config(cfg: &CavityConfig, sets: &ModeIndexSets, closure: InterfaceClosure) -> Result<Self, Error> {
        match cfg.depth {
            Depth::Homogeneous { .. } => Self::homogeneous(cfg, sets),
            Depth::Layered { .. } => Self::layered(cfg, sets, closure),
        }
    }

    /// E₃ one node below the aperture for each set3 mode, from the last
    /// elimination row of the E₃ system.
    pub fn e3_below(&self, field: &ApertureField) -> Vec<C64> {
        field.e3.iter().zip(&self.r3).map(|(e, r)| -e / r).collect()
    }

    /// Back-substitutes every mode's vertical profile from the aperture values.
    pub fn recover_interior(&self, field: &ApertureField, a: f64, b: f64) -> VolumeField {
        let s = &self.sets;
        let e3_top = |m: usize, n: usize| s.set3.flatten(m, n).map_or(ZERO, |i| field.e3[i]);
        let tangential = |set: &crate::modal::ModeSet, vals: &[C64], k_of: &dyn Fn(usize, usize) -> f64, dl: Option<&[C64]>| {
            set.iter()
                .enumerate()
                .map(|(i, (m, n))| {
                    let sw = self.sweep_at(m, n);
                    let top = vals[i];
                    let tan = sw.tan.as_ref().unwrap();
                    match (&sw.bottom, &self.layered) {
                        (None, _) | (_, None) => {
                            let x = tan.solve(&[(tan.pivots.len() - 1, -top)]);
                            [vec![ZERO], x, vec![top]].concat()
                        }
                        (Some((bt, _)), Some(ld)) => {
                            let t3 = e3_top(m, n);
                            let ni = tan.pivots.len();
                            let x = tan.solve(&[(ni - 1, -top), (0, -dl.unwrap()[i] * t3)]);
                            let u3_0 = match &sw.nor {
                                Some(nor) => nor.first_from_top() * t3 / sw.w3,
                                None => ZERO,
                            };
                            let iface = (x[0] + (ld.rho - 1.0) * k_of(m, n) * u3_0) / sw.w1;
                            let v = bt.solve(&[(bt.pivots.len() - 1, -iface)]);
                            [vec![ZERO], v, vec![iface], x, vec![top]].concat()
                        }
                    }
                })
                .collect::<Vec<_>>()
        };
        let h = self.h;
        let km = move |m: usize, _: usize| m as f64 * PI * h / a;
        let kn = move |_: usize, n: usize| n as f64 * PI * h / b;
        let ld = self.layered.as_ref();
        let e1 = tangential(&s.set1, &field.e1, &km, ld.map(|l| l.d1.as_slice()));
        let e2 = tangential(&s.set2, &field.e2, &kn, ld.map(|l| l.d2.as_slice()));
        let mut iface_top = vec![];
        let e3 = s
            .set3
            .iter()
            .enumerate()
            .map(|(i, (m, n))| {
                let sw = self.sweep_at(m, n);
                let top = field.e3[i];
                let nor = sw.nor.as_ref().unwrap();
                let x = nor.solve(&[(nor.pivots.len() - 1, -top)]);
                match (&sw.bottom, ld) {
                    (Some((_, Some(bn))), Some(ld)) => {
                        let u3_0 = x[0] / sw.w3;
                        iface_top.push(u3_0);
                        let below = ld.rho * u3_0;
                        let v = bn.solve(&[(bn.pivots.len() - 1, -below)]);
                        [vec![v[0]], v, vec![below], x, vec![top]].concat()
                    }
                    _ => [vec![x[0]], x, vec![top]].concat(),
                }
            })
            .collect();
        VolumeField { sets: *s, e1, e2, e3, interface: ld.map(|_| (self.j + 1, iface_top)) }
    }
}
