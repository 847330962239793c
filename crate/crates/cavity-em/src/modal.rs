//! Truncated mode sets, their flattened orderings, and field synthesis.
//!
//! E₁ ~ cos(mπx₁/a)sin(nπx₂/b) over {0..M}×{1..N}, E₂ ~ sin·cos over
//! {1..M}×{0..N}, E₃ ~ sin·sin over {1..M}×{1..N}. Every set is flattened
//! with m as the outer index and n as the inner one.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::Error;

/// One of the three index sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModeSet {
    pub m0: usize,
    pub m1: usize,
    pub n0: usize,
    pub n1: usize,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        (self.m1 + 1 - self.m0) * (self.n1 + 1 - self.n0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, m: usize, n: usize) -> bool {
        (self.m0..=self.m1).contains(&m) && (self.n0..=self.n1).contains(&n)
    }

    pub fn flatten(&self, m: usize, n: usize) -> Option<usize> {
        self.contains(m, n).then(|| (m - self.m0) * (self.n1 + 1 - self.n0) + (n - self.n0))
    }

    pub fn unflatten(&self, i: usize) -> Option<(usize, usize)> {
        let w = self.n1 + 1 - self.n0;
        (i < self.len()).then(|| (self.m0 + i / w, self.n0 + i % w))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.m0..=self.m1).flat_map(move |m| (self.n0..=self.n1).map(move |n| (m, n)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModeIndexSets {
    pub m: usize,
    pub n: usize,
    pub set1: ModeSet,
    pub set2: ModeSet,
    pub set3: ModeSet,
}

impl ModeIndexSets {
    pub fn new(m: usize, n: usize) -> Result<Self, Error> {
        if m < 1 || n < 1 {
            return Err(Error::Domain(format!("mode counts must be ≥ 1, got ({m},{n})")));
        }
        Ok(ModeIndexSets {
            m,
            n,
            set1: ModeSet { m0: 0, m1: m, n0: 1, n1: n },
            set2: ModeSet { m0: 1, m1: m, n0: 0, n1: n },
            set3: ModeSet { m0: 1, m1: m, n0: 1, n1: n },
        })
    }

    /// Order of the aperture system, 3MN + M + N.
    pub fn order(&self) -> usize {
        self.set1.len() + self.set2.len() + self.set3.len()
    }
}

/// Modal coefficients of the total field on the aperture.
#[derive(Clone, Debug, PartialEq)]
pub struct ApertureField {
    pub sets: ModeIndexSets,
    pub e1: Vec<C64>,
    pub e2: Vec<C64>,
    pub e3: Vec<C64>,
}

impl ApertureField {
    pub fn zeros(sets: ModeIndexSets) -> Self {
        let z = C64::new(0.0, 0.0);
        ApertureField {
            sets,
            e1: vec![z; sets.set1.len()],
            e2: vec![z; sets.set2.len()],
            e3: vec![z; sets.set3.len()],
        }
    }

    /// Splits a stacked (E₁; E₂; E₃) vector.
    pub fn from_stacked(sets: ModeIndexSets, x: &[C64]) -> Result<Self, Error> {
        let (l1, l2) = (sets.set1.len(), sets.set2.len());
        if x.len() != sets.order() {
            return Err(Error::Dimension(format!("aperture vector {} vs order {}", x.len(), sets.order())));
        }
        Ok(ApertureField { sets, e1: x[..l1].to_vec(), e2: x[l1..l1 + l2].to_vec(), e3: x[l1 + l2..].to_vec() })
    }

    pub fn stacked(&self) -> Vec<C64> {
        [self.e1.as_slice(), &self.e2, &self.e3].concat()
    }

    /// Largest |self − other| over all coefficients, relative to the largest |other|.
    pub fn rel_diff(&self, other: &ApertureField) -> f64 {
        let (x, y) = (self.stacked(), other.stacked());
        let big = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let d = x.iter().zip(&y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        d / big
    }
}

/// Evaluates (E₁, E₂, E₃) at an aperture point.
pub fn synthesize_aperture(field: &ApertureField, x1: f64, x2: f64, a: f64, b: f64) -> Result<[C64; 3], Error> {
    if !(0.0..=a).contains(&x1) || !(0.0..=b).contains(&x2) {
        return Err(Error::Domain(format!("point ({x1}, {x2}) outside the aperture")));
    }
    let cs1: Vec<(f64, f64)> = (0..=field.sets.m).map(|m| (m as f64 * PI * x1 / a).sin_cos()).collect();
    let cs2: Vec<(f64, f64)> = (0..=field.sets.n).map(|n| (n as f64 * PI * x2 / b).sin_cos()).collect();
    let sum = |set: &ModeSet, c: &[C64], f: &dyn Fn(usize, usize) -> f64| -> C64 {
        set.iter().zip(c).map(|((m, n), v)| v * f(m, n)).sum()
    };
    let s = &field.sets;
    Ok([
        sum(&s.set1, &field.e1, &|m, n| cs1[m].1 * cs2[n].0),
        sum(&s.set2, &field.e2, &|m, n| cs1[m].0 * cs2[n].1),
        sum(&s.set3, &field.e3, &|m, n| cs1[m].0 * cs2[n].0),
    ])
}

/// max over set3 of |−(mπ/a)E₁ − (nπ/b)E₂ + ∂₃E₃|, the modal surface divergence.
pub fn discrete_divergence_residual(field: &ApertureField, de3: &[C64], a: f64, b: f64) -> Result<f64, Error> {
    let s = &field.sets;
    if de3.len() != s.set3.len() {
        return Err(Error::Dimension(format!("∂₃E₃ has {} entries, set3 has {}", de3.len(), s.set3.len())));
    }
    let mut worst = 0.0f64;
    for (i, (m, n)) in s.set3.iter().enumerate() {
        let e1 = field.e1[s.set1.flatten(m, n).expect("set3 ⊂ set1")];
        let e2 = field.e2[s.set2.flatten(m, n).expect("set3 ⊂ set2")];
        let r = -(m as f64 * PI / a) * e1 - (n as f64 * PI / b) * e2 + de3[i];
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// Vertical profiles of every mode, from the cavity bottom (index 0) to the
/// aperture (last index).
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeField {
    pub sets: ModeIndexSets,
    pub e1: Vec<Vec<C64>>,
    pub e2: Vec<Vec<C64>>,
    pub e3: Vec<Vec<C64>>,
    /// Layered case: node index of the interface, and the top-side E₃ limit
    /// there (the profile stores the bottom-side value).
    pub interface: Option<(usize, Vec<C64>)>,
}
