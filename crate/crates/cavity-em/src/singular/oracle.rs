//! Independent reference for the Gram tensors by direct quadrature.
//!
//! With z = x − y the double aperture integral becomes ∫ g(z)·C₁(z₁)C₂(z₂) dz
//! where C_i are exact 1D cross-correlations of the modes. Polar coordinates
//! about z = 0 cancel the 1/|z| singularity; the rectangle [−a,a]×[−b,b] is
//! split into 8 triangles on which the integrand is smooth.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;

use super::gram::{ExpGram, GramTensor};
use crate::quad::Rule;
use crate::Error;

/// ∫ over y ∈ [0,len] ∩ [−z, len−z] of e^{iμ(y+z)}e^{iνy} dy.
fn correlation(z: f64, mu: f64, nu: f64, len: f64) -> C64 {
    let lo = (-z).max(0.0);
    let hi = (len - z).min(len);
    if hi <= lo {
        return C64::new(0.0, 0.0);
    }
    let s = mu + nu;
    let base = C64::from_polar(1.0, mu * z);
    let h = 0.5 * s * (hi - lo);
    let sinc = if h.abs() < 1e-8 { 1.0 } else { h.sin() / h };
    base * C64::from_polar((hi - lo) * sinc, 0.5 * s * (hi + lo))
}

struct Nodes {
    z1: Vec<f64>,
    z2: Vec<f64>,
    w: Vec<C64>,
}

fn polar_nodes(order: usize, kappa: f64, a: f64, b: f64) -> Nodes {
    let rule = Rule::new(order);
    let corner = b.atan2(a);
    let mut nodes = Nodes { z1: vec![], z2: vec![], w: vec![] };
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            for (t0, t1, side_a) in [(0.0, corner, true), (corner, 0.5 * PI, false)] {
                for (t, wt) in rule.on(t0, t1) {
                    let reach = if side_a { a / t.cos() } else { b / t.sin() };
                    for (r, wr) in rule.on(0.0, reach) {
                        nodes.z1.push(s1 * r * t.cos());
                        nodes.z2.push(s2 * r * t.sin());
                        nodes.w.push(wt * wr * C64::from_polar(1.0 / (4.0 * PI), kappa * r));
                    }
                }
            }
        }
    }
    nodes
}

fn exp_at_order(m: usize, n: usize, kappa: f64, a: f64, b: f64, order: usize) -> ExpGram {
    let nodes = polar_nodes(order, kappa, a, b);
    let (mi, ni) = (m as i64, n as i64);
    let table = |count: i64, z: &[f64], len: f64| -> Vec<Vec<C64>> {
        let mut out = vec![];
        for p in -count..=count {
            for k in 0..=count {
                let (mu, nu) = (p as f64 * PI / len, k as f64 * PI / len);
                out.push(z.iter().map(|&z| correlation(z, mu, nu, len)).collect());
            }
        }
        out
    };
    let c1 = table(mi, &nodes.z1, a);
    let c2 = table(ni, &nodes.z2, b);
    let mut vals = vec![];
    let keys: Vec<(i64, i64, i64, i64)> = (-mi..=mi)
        .flat_map(|p| (-ni..=ni).flat_map(move |q| (0..=mi).flat_map(move |k1| (0..=ni).map(move |k2| (p, q, k1, k2)))))
        .collect();
    keys.par_iter()
        .map(|&(p, q, k1, k2)| {
            let x = &c1[((p + mi) * (mi + 1) + k1) as usize];
            let y = &c2[((q + ni) * (ni + 1) + k2) as usize];
            nodes.w.iter().zip(x).zip(y).map(|((w, x), y)| w * x * y).sum::<C64>()
        })
        .collect_into_vec(&mut vals);
    let lookup = |p: i64, q: i64, k1: i64, k2: i64| {
        let i = (((p + mi) * (2 * ni + 1) + (q + ni)) * (mi + 1) + k1) * (ni + 1) + k2;
        vals[i as usize]
    };
    ExpGram::from_fn(m, n, lookup)
}

/// Exponential Gram by polar quadrature, refined until two orders agree
/// to `tol` relative to the largest entry.
pub fn oracle_exp(m: usize, n: usize, kappa: f64, a: f64, b: f64, tol: f64) -> Result<ExpGram, Error> {
    let mut order = 24 + 4 * m.max(n);
    let mut prev = exp_at_order(m, n, kappa, a, b, order);
    while order <= 160 {
        order += 16;
        let next = exp_at_order(m, n, kappa, a, b, order);
        let (mi, ni) = (m as i64, n as i64);
        let mut diff = 0.0f64;
        let mut big = 0.0f64;
        for p in -mi..=mi {
            for q in -ni..=ni {
                for k1 in 0..=mi {
                    for k2 in 0..=ni {
                        let v = next.get(p, q, k1, k2);
                        big = big.max(v.norm());
                        diff = diff.max((v - prev.get(p, q, k1, k2)).norm());
                    }
                }
            }
        }
        if diff <= tol * big {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Domain(format!("oracle did not reach tolerance {tol:e}")))
}

/// Reference trigonometric Gram tensors; `quad_grid` is recorded as 0.
pub fn oracle_gram(m: usize, n: usize, kappa: f64, a: f64, b: f64, tol: f64) -> Result<GramTensor, Error> {
    let e = oracle_exp(m, n, kappa, a, b, tol)?;
    Ok(GramTensor::from_exp(m, n, kappa, a, b, 0, &e))
}
