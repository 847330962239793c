//! End-to-end driver: Gram tensors, assembly, one factorization, and a
//! backscatter sweep that reuses it for every incidence angle.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use crate::config::{CavityConfig, IncidentWave};
use crate::farfield::{backscatter_direction, far_field, sigma, spherical_basis, to_db, RcsSample};
use crate::interface::{assemble_interface, FactoredSystem, InterfaceSystem};
use crate::modal::{discrete_divergence_residual, ApertureField, ModeIndexSets};
use crate::singular::{cache, GramTensor};
use crate::tbc::{assemble_tbc, incident_rhs, TbcSystem};
use crate::vertical::{DtnTable, InterfaceClosure};
use crate::Error;

/// Gram tensors for `cfg`, read from `cache_dir` when a matching file exists
/// and written back after a fresh computation. Returns whether it was a hit.
pub fn gram_for(cfg: &CavityConfig, cache_dir: Option<&Path>) -> Result<(GramTensor, bool), Error> {
    let key = cache::CacheKey {
        m: cfg.m,
        n: cfg.n,
        kappa: cfg.kappa0,
        a: cfg.a,
        b: cfg.b,
        quad_grid: cfg.quad_grid,
    };
    if let Some(dir) = cache_dir {
        if let Some(g) = cache::load(dir, &key) {
            return Ok((g, true));
        }
    }
    let g = GramTensor::compute(cfg.m, cfg.n, cfg.kappa0, cfg.a, cfg.b, cfg.quad_grid, cfg.regime_threshold)?;
    if let Some(dir) = cache_dir {
        cache::store(dir, &g)?;
    }
    Ok((g, false))
}

/// Assembled and factored aperture system for one cavity.
#[derive(Debug)]
pub struct Solver {
    pub cfg: CavityConfig,
    pub sets: ModeIndexSets,
    pub tbc: TbcSystem,
    pub dtn: DtnTable,
    pub system: InterfaceSystem,
    pub factored: FactoredSystem,
}

impl Solver {
    pub fn new(cfg: &CavityConfig, gram: &GramTensor, closure: InterfaceClosure) -> Result<Self, Error> {
        let sets = ModeIndexSets::new(cfg.m, cfg.n)?;
        let mismatch = (gram.a - cfg.a).abs() > 1e-12 * cfg.a
            || (gram.b - cfg.b).abs() > 1e-12 * cfg.b
            || (gram.kappa - cfg.kappa0).abs() > 1e-12 * cfg.kappa0;
        if mismatch {
            return Err(Error::Dimension("Gram tensors were computed for a different aperture or wavenumber".into()));
        }
        let tbc = assemble_tbc(gram, &sets, cfg.h())?;
        let dtn = DtnTable::for_config(cfg, &sets, closure)?;
        let system = assemble_interface(&tbc, &dtn)?;
        let factored = system.factor()?;
        Ok(Solver { cfg: cfg.clone(), sets, tbc, dtn, system, factored })
    }

    pub fn wave(&self, alpha: f64, theta: f64) -> Result<IncidentWave, Error> {
        IncidentWave::new(alpha, theta, self.cfg.phi_deg.to_radians(), self.cfg.kappa0)
    }

    /// Aperture coefficients for one incident wave.
    pub fn solve(&self, wave: &IncidentWave) -> ApertureField {
        let (g1, g2) = incident_rhs(wave, &self.sets, self.cfg.a, self.cfg.b, self.cfg.h());
        self.factored.solve(&g1, &g2)
    }

    /// Discrete surface divergence at the aperture, relative to the size of
    /// its largest term. The third block row enforces it, so this measures
    /// the solve's backward error.
    pub fn divergence_residual(&self, field: &ApertureField) -> f64 {
        let s = &self.sets;
        let below = self.dtn.e3_below(field);
        let h = self.cfg.h();
        let de3: Vec<C64> = field.e3.iter().zip(&below).map(|(t, b)| (t - b) / h).collect();
        let abs = discrete_divergence_residual(field, &de3, self.cfg.a, self.cfg.b).expect("sizes match");
        let mut scale = 0.0f64;
        for (i, (m, n)) in s.set3.iter().enumerate() {
            let e1 = field.e1[s.set1.flatten(m, n).unwrap()];
            let e2 = field.e2[s.set2.flatten(m, n).unwrap()];
            scale = scale
                .max((m as f64 * PI / self.cfg.a * e1).norm())
                .max((n as f64 * PI / self.cfg.b * e2).norm())
                .max(de3[i].norm());
        }
        if scale == 0.0 {
            0.0
        } else {
            abs / scale
        }
    }

    /// Backscatter at incidence θ (radians). σ_θθ and σ_φφ come from the α = 0
    /// and α = π/2 solves; the configured α is their linear combination.
    pub fn backscatter(&self, theta: f64) -> Result<RcsSample, Error> {
        let phi = self.cfg.phi_deg.to_radians();
        let alpha = self.cfg.alpha_deg.to_radians();
        let dir = backscatter_direction(theta, phi);
        let (t_hat, p_hat) = spherical_basis(theta, phi);
        let (a, b, k) = (self.cfg.a, self.cfg.b, self.cfg.kappa0);
        let amp_t = far_field(&self.solve(&self.wave(0.0, theta)?), dir, a, b, k)?;
        let amp_p = far_field(&self.solve(&self.wave(0.5 * PI, theta)?), dir, a, b, k)?;
        let (sa, ca) = alpha.sin_cos();
        let amp: [C64; 3] = [0, 1, 2].map(|i| ca * amp_t[i] + sa * amp_p[i]);
        let pol = [0, 1, 2].map(|i| ca * t_hat[i] + sa * p_hat[i]);
        let lam = self.cfg.wavelength();
        let s = sigma(&amp, pol);
        Ok(RcsSample {
            theta,
            phi,
            alpha,
            sigma: s,
            sigma_over_lambda2: s / (lam * lam),
            sigma_tt_db: to_db(sigma(&amp_t, t_hat), lam),
            sigma_pp_db: to_db(sigma(&amp_p, p_hat), lam),
        })
    }

    /// Backscatter over the configured θ sweep, in parallel.
    pub fn sweep(&self) -> Result<Vec<RcsSample>, Error> {
        self.cfg.theta.angles_deg().par_iter().map(|t| self.backscatter(t.to_radians())).collect()
    }
}

/// Wall-clock seconds spent in each stage.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Timings {
    pub singular: f64,
    pub assemble: f64,
    pub solve: f64,
    pub rcs: f64,
}

#[derive(Debug)]
pub struct RunOutput {
    pub samples: Vec<RcsSample>,
    pub timings: Timings,
    pub cache_hit: bool,
    pub condition: f64,
}

/// Runs every stage for one config.
pub fn run(cfg: &CavityConfig, cache_dir: Option<&Path>) -> Result<RunOutput, Error> {
    let mut t = Timings::default();
    let clock = Instant::now();
    let (gram, cache_hit) = gram_for(cfg, cache_dir)?;
    t.singular = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let sets = ModeIndexSets::new(cfg.m, cfg.n)?;
    let tbc = assemble_tbc(&gram, &sets, cfg.h())?;
    let dtn = DtnTable::for_config(cfg, &sets, InterfaceClosure::default())?;
    let system = assemble_interface(&tbc, &dtn)?;
    t.assemble = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let factored = system.factor()?;
    t.solve = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let solver = Solver { cfg: cfg.clone(), sets, tbc, dtn, system, factored };
    let samples = solver.sweep()?;
    t.rcs = clock.elapsed().as_secs_f64();
    Ok(RunOutput { samples, timings: t, cache_hit, condition: solver.factored.condition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    const CFG: &str = "a = 0.5\nb = 0.5\nc = 0.3\neps_re_1 = 2\neps_im_1 = 0.5\nkappa0 = 6.283185307179586\n\
                       M = 2\nN = 2\nJ = 60\ntheta_start_deg = 0\ntheta_end_deg = 30\ntheta_step_deg = 10\nquad_grid = 128\n";

    #[test]
    fn normal_incidence_on_square_is_polarization_blind() {
        let cfg = parse_config(CFG).unwrap();
        let (g, hit) = gram_for(&cfg, None).unwrap();
        assert!(!hit);
        let s = Solver::new(&cfg, &g, InterfaceClosure::default()).unwrap();
        let r = s.backscatter(0.0).unwrap();
        assert!((r.sigma_tt_db - r.sigma_pp_db).abs() < 1e-9, "{r:?}");
        assert!(r.sigma_tt_db.is_finite());
        let f = s.solve(&s.wave(0.0, 0.3).unwrap());
        assert!(s.divergence_residual(&f) < 1e-10);
    }

    #[test]
    fn second_run_hits_the_cache() {
        let cfg = parse_config(CFG).unwrap();
        let dir = std::env::temp_dir().join(format!("cavity-em-pipeline-{}", std::process::id()));
        let (g, hit) = gram_for(&cfg, Some(&dir)).unwrap();
        assert!(!hit);
        let (g2, hit2) = gram_for(&cfg, Some(&dir)).unwrap();
        assert!(hit2);
        assert_eq!(g, g2);
        let out = run(&cfg, Some(&dir)).unwrap();
        assert_eq!(out.samples.len(), 3);
        assert!(out.cache_hit);
        std::fs::remove_dir_all(&dir).ok();
    }
}
