//! CSV output and the small-instance self-check behind `--verify`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use cavity_em::config::parse_config;
use cavity_em::farfield::RcsSample;
use cavity_em::pipeline::Solver;
use cavity_em::singular::bessel::{by_asymptotics, by_quadrature};
use cavity_em::singular::oracle::oracle_gram;
use cavity_em::singular::GramTensor;
use cavity_em::vertical::InterfaceClosure;

pub const CSV_HEADER: &str = "theta_deg,phi_deg,alpha_deg,sigma,sigma_over_lambda2,rcs_tt_db,rcs_pp_db";

/// CSV text for a sweep, rows ordered by θ. Floats use the shortest
/// representation that round-trips.
pub fn csv_string(samples: &[RcsSample]) -> Result<String, String> {
    if samples.is_empty() {
        return Err("no samples".into());
    }
    let mut rows: Vec<&RcsSample> = samples.iter().collect();
    rows.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.theta.to_degrees(),
            s.phi.to_degrees(),
            s.alpha.to_degrees(),
            s.sigma,
            s.sigma_over_lambda2,
            s.sigma_tt_db,
            s.sigma_pp_db
        )
        .expect("writing to a String");
    }
    Ok(out)
}

pub fn emit_csv(samples: &[RcsSample], path: &Path) -> Result<(), String> {
    let text = csv_string(samples)?;
    std::fs::write(path, text).map_err(|e| format!("writing {}: {e}", path.display()))
}

/// One line of the `--verify` report.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.value <= self.limit
    }
}

fn worst_gram_error(fft: &GramTensor, oracle: &GramTensor) -> f64 {
    let pairs = [(&fft.i1, &oracle.i1), (&fft.i2, &oracle.i2), (&fft.i3, &oracle.i3)];
    let mut worst = 0.0f64;
    for (f, o) in pairs {
        let floor = 1e-12 * o.data.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (x, y) in f.data.iter().zip(&o.data) {
            worst = worst.max((x - y).norm() / y.norm().max(floor));
        }
    }
    worst
}

/// Oracle comparisons on instances that finish in a few seconds.
pub fn verify() -> Result<Vec<Check>, String> {
    let e = |e: cavity_em::Error| e.to_string();
    let k = 2.0 * PI;
    let r = 2f64.sqrt();
    let mut checks = vec![];

    let mut worst = 0.0f64;
    for f in [9.0, 10.0, 11.0] {
        let c = 2.0 * PI * f;
        let q = by_quadrature(r, c, k);
        let a = by_asymptotics(r, c, k).map_err(e)?;
        worst = worst.max((q - a).norm() / q.norm());
    }
    checks.push(Check { name: "bessel_regimes_agree", value: worst, limit: 1e-5 });

    let (m, n, a, b) = (2, 2, 0.5, 0.5);
    let fft = GramTensor::compute(m, n, k, a, b, 512, 10.0).map_err(e)?;
    let oracle = oracle_gram(m, n, k, a, b, 1e-9).map_err(e)?;
    checks.push(Check { name: "gram_fft_vs_oracle", value: worst_gram_error(&fft, &oracle), limit: 1e-3 });

    let cfg = parse_config(
        "a = 0.5\nb = 0.5\nc = 0.4\neps_re_1 = 2\neps_im_1 = 0.1\nkappa0 = 6.283185307179586\n\
         M = 2\nN = 2\nJ = 200\ntheta_deg = 0\nquad_grid = 512\n",
    )
    .map_err(e)?;
    let s = Solver::new(&cfg, &fft, InterfaceClosure::default()).map_err(e)?;
    let rcs = s.backscatter(0.0).map_err(e)?;
    checks.push(Check { name: "normal_incidence_tt_eq_pp_db", value: (rcs.sigma_tt_db - rcs.sigma_pp_db).abs(), limit: 1e-6 });
    let field = s.solve(&s.wave(0.0, 0.4).map_err(e)?);
    checks.push(Check { name: "divergence_residual", value: s.divergence_residual(&field), limit: 1e-10 });
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(theta_deg: f64) -> RcsSample {
        RcsSample {
            theta: theta_deg.to_radians(),
            phi: 0.0,
            alpha: 0.0,
            sigma: 2.0,
            sigma_over_lambda2: 2.0,
            sigma_tt_db: 3.0,
            sigma_pp_db: 3.5,
        }
    }

    #[test]
    fn rows_are_sorted_by_theta() {
        let text = csv_string(&[sample(20.0), sample(0.0), sample(10.0)]).unwrap();
        let thetas: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(thetas.len(), 3);
        assert!(thetas.windows(2).all(|w| w[0] < w[1]));
        assert!((thetas[2] - 20.0).abs() < 1e-12);
    }

    #[test]
    fn check_passes_at_the_limit() {
        assert!(Check { name: "x", value: 1e-6, limit: 1e-6 }.pass());
        assert!(!Check { name: "x", value: f64::NAN, limit: 1.0 }.pass());
    }
}
