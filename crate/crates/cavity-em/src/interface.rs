//! The aperture-only linear system and its dense solve.
//!
//! Substituting E_J = −R⁻¹E_{J+1} (+ R⁻¹𝒟E₃,J+1 in the layered case) into
//! the TBC rows leaves a square system in the aperture coefficients alone:
//!
//!   ⎡ −R₁⁻¹−I−F₁−H₁   −G₁             I₁+R₁⁻¹𝒟₁ ⎤
//!   ⎢ −H₂             −R₂⁻¹−I−F₂−G₂   I₂+R₂⁻¹𝒟₂ ⎥
//!   ⎣ F₃              G₃              −I−R₃⁻¹   ⎦

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64 as C64;

use crate::modal::{ApertureField, ModeIndexSets};
use crate::tbc::TbcSystem;
use crate::vertical::DtnTable;
use crate::Error;

/// Pivot threshold relative to the largest matrix entry.
pub const SINGULAR_TOL: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct InterfaceSystem {
    pub sets: ModeIndexSets,
    pub matrix: DMatrix<C64>,
}

pub fn assemble_interface(tbc: &TbcSystem, dtn: &DtnTable) -> Result<InterfaceSystem, Error> {
    let sets = tbc.sets;
    if dtn.sets != sets {
        return Err(Error::Dimension("TBC and DtN tables use different mode sets".into()));
    }
    let (l1, l2, l3) = (sets.set1.len(), sets.set2.len(), sets.set3.len());
    let n = l1 + l2 + l3;
    let mut a = DMatrix::<C64>::zeros(n, n);
    let one = C64::new(1.0, 0.0);
    {
        let mut b = a.view_mut((0, 0), (l1, l1));
        b -= &tbc.f1;
        b -= &tbc.h1;
    }
    a.view_mut((0, l1), (l1, l2)).copy_from(&(-&tbc.g1));
    a.view_mut((0, l1 + l2), (l1, l3)).copy_from(&tbc.i1);
    a.view_mut((l1, 0), (l2, l1)).copy_from(&(-&tbc.h2));
    {
        let mut b = a.view_mut((l1, l1), (l2, l2));
        b -= &tbc.f2;
        b -= &tbc.g2;
    }
    a.view_mut((l1, l1 + l2), (l2, l3)).copy_from(&tbc.i2);
    a.view_mut((l1 + l2, 0), (l3, l1)).copy_from(&tbc.f3);
    a.view_mut((l1 + l2, l1), (l3, l2)).copy_from(&tbc.g3);
    for i in 0..l1 {
        a[(i, i)] -= one + one / dtn.r1[i];
    }
    for i in 0..l2 {
        a[(l1 + i, l1 + i)] -= one + one / dtn.r2[i];
    }
    for i in 0..l3 {
        a[(l1 + l2 + i, l1 + l2 + i)] -= one + one / dtn.r3[i];
    }
    // layered coupling R⁻¹𝒟: 𝒟 maps row (m,n) to the set3 column (m,n);
    // rows without a set3 partner are the deleted m=0 / n=0 columns
    for (i, (m, nn)) in sets.set1.iter().enumerate() {
        if let Some(j) = sets.set3.flatten(m, nn) {
            a[(i, l1 + l2 + j)] += dtn.s1[i] / dtn.r1[i];
        }
    }
    for (i, (m, nn)) in sets.set2.iter().enumerate() {
        if let Some(j) = sets.set3.flatten(m, nn) {
            a[(l1 + i, l1 + l2 + j)] += dtn.s2[i] / dtn.r2[i];
        }
    }
    Ok(InterfaceSystem { sets, matrix: a })
}

/// LU factors kept for repeated right-hand sides.
#[derive(Clone, Debug)]
pub struct FactoredSystem {
    pub sets: ModeIndexSets,
    lu: LU<C64, Dyn, Dyn>,
    /// Rough 1-norm condition estimate.
    pub condition: f64,
    norm1: f64,
}

fn norm1(a: &DMatrix<C64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

impl InterfaceSystem {
    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rhs(&self, g1: &[C64], g2: &[C64]) -> DVector<C64> {
        let n = self.order();
        let mut b = DVector::zeros(n);
        b.rows_mut(0, g1.len()).copy_from_slice(g1);
        b.rows_mut(g1.len(), g2.len()).copy_from_slice(g2);
        b
    }

    /// Dense LU with partial pivoting.
    pub fn factor(&self) -> Result<FactoredSystem, Error> {
        let big = self.matrix.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let nrm = norm1(&self.matrix);
        let lu = self.matrix.clone().lu();
        let u_min = (0..self.order()).map(|i| lu.u()[(i, i)].norm()).fold(f64::INFINITY, f64::min);
        if !(u_min > SINGULAR_TOL * big) {
            return Err(Error::Singular(u_min / big));
        }
        let mut f = FactoredSystem { sets: self.sets, lu, condition: f64::NAN, norm1: nrm };
        f.condition = f.estimate_condition();
        Ok(f)
    }
}

impl FactoredSystem {
    pub fn solve_vec(&self, b: &DVector<C64>) -> DVector<C64> {
        self.lu.solve(b).expect("factor checked nonsingular")
    }

    pub fn solve(&self, g1: &[C64], g2: &[C64]) -> ApertureField {
        let n = self.sets.order();
        let mut b = DVector::zeros(n);
        b.rows_mut(0, g1.len()).copy_from_slice(g1);
        b.rows_mut(g1.len(), g2.len()).copy_from_slice(g2);
        let x = self.solve_vec(&b);
        ApertureField::from_stacked(self.sets, x.as_slice()).expect("order matches")
    }

    /// ‖A‖₁ times a lower bound on ‖A⁻¹‖₁ from a few probe vectors.
    fn estimate_condition(&self) -> f64 {
        let n = self.sets.order();
        let probes = [
            DVector::from_fn(n, |i, _| C64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0)),
            DVector::from_fn(n, |i, _| C64::from_polar(1.0, 0.7 * i as f64)),
            DVector::from_fn(n, |i, _| C64::new(1.0 + i as f64 / n as f64, 0.0)),
        ];
        let inv = probes
            .iter()
            .map(|p| {
                let x = self.solve_vec(p);
                x.iter().map(|v| v.norm()).sum::<f64>() / p.iter().map(|v| v.norm()).sum::<f64>()
            })
            .fold(0.0, f64::max);
        self.norm1 * inv
    }
}

/// ‖Ax − b‖₂/‖b‖₂.
pub fn residual(system: &InterfaceSystem, x: &ApertureField, b: &DVector<C64>) -> f64 {
    let xv = DVector::from_vec(x.stacked());
    let r = &system.matrix * xv - b;
    r.norm() / b.norm()
}
