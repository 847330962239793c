//! Solver inputs: cavity geometry, media, incident wave, truncation.
//!
//! The config file is flat `key = value` text; `#` starts a comment. Length
//! values may carry a `lambda` (or `λ`) suffix meaning multiples of the
//! free-space wavelength 2π/κ₀.

use num_complex::Complex64 as C64;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::singular::transform::FftGrid;
use crate::Error;

const KEYS: &[&str] = &[
    "a",
    "b",
    "c",
    "c1",
    "c2",
    "eps_re_1",
    "eps_im_1",
    "eps_re_2",
    "eps_im_2",
    "kappa0",
    "wavelength",
    "M",
    "N",
    "J",
    "I_top",
    "alpha_deg",
    "theta_deg",
    "theta_start_deg",
    "theta_end_deg",
    "theta_step_deg",
    "phi_deg",
    "quad_grid",
    "regime_threshold",
];

/// Relative tolerance on equal vertical spacing across layers.
pub const SPACING_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Depth {
    Homogeneous { c: f64 },
    /// `c1` is the top layer (adjacent to the aperture), `c2` the bottom one.
    Layered { c1: f64, c2: f64 },
}

/// Incidence angles in degrees. A range is half-open, `[start, end)`.
#[derive(Clone, Debug, PartialEq)]
pub enum ThetaSweep {
    Single(f64),
    Range { start: f64, end: f64, step: f64 },
}

impl ThetaSweep {
    pub fn angles_deg(&self) -> Vec<f64> {
        match *self {
            ThetaSweep::Single(t) => vec![t],
            ThetaSweep::Range { start, end, step } => {
                let count = ((end - start) / step - 1e-9).ceil().max(0.0) as usize;
                (0..count).map(|i| start + i as f64 * step).collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CavityConfig {
    pub a: f64,
    pub b: f64,
    pub depth: Depth,
    /// Relative permittivities, top layer first.
    pub eps: Vec<C64>,
    pub kappa0: f64,
    pub m: usize,
    pub n: usize,
    /// Interior nodes of the (bottom) layer.
    pub j: usize,
    /// Interior nodes of the top layer, layered case only.
    pub i_top: Option<usize>,
    pub alpha_deg: f64,
    pub theta: ThetaSweep,
    pub phi_deg: f64,
    pub quad_grid: usize,
    pub regime_threshold: f64,
}

impl CavityConfig {
    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.kappa0
    }

    pub fn is_layered(&self) -> bool {
        matches!(self.depth, Depth::Layered { .. })
    }

    pub fn total_depth(&self) -> f64 {
        match self.depth {
            Depth::Homogeneous { c } => c,
            Depth::Layered { c1, c2 } => c1 + c2,
        }
    }

    /// Vertical grid spacing, shared by both layers.
    pub fn h(&self) -> f64 {
        match self.depth {
            Depth::Homogeneous { c } => c / (self.j + 1) as f64,
            Depth::Layered { c2, .. } => c2 / (self.j + 1) as f64,
        }
    }

    /// Checks every invariant; [`parse_config`] calls this before returning.
    pub fn validate(&self) -> Result<(), Error> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, format!("{key} must be positive, got {v}")))
            }
        };
        positive("a", self.a)?;
        positive("b", self.b)?;
        positive("kappa0", self.kappa0)?;
        if self.m < 1 {
            return Err(Error::config("M", "M must be at least 1"));
        }
        if self.n < 1 {
            return Err(Error::config("N", "N must be at least 1"));
        }
        if self.j < 1 {
            return Err(Error::config("J", "J must be at least 1"));
        }
        match self.depth {
            Depth::Homogeneous { c } => {
                positive("c", c)?;
                if self.eps.len() != 1 {
                    return Err(Error::config("eps_re_2", "homogeneous cavity takes one permittivity"));
                }
                if self.i_top.is_some() {
                    return Err(Error::config("I_top", "I_top is only valid for a layered cavity"));
                }
            }
            Depth::Layered { c1, c2 } => {
                positive("c1", c1)?;
                positive("c2", c2)?;
                if self.eps.len() != 2 {
                    return Err(Error::config("eps_re_2", "layered cavity needs two permittivities"));
                }
                let i = self.i_top.ok_or_else(|| Error::config("I_top", "layered cavity needs I_top"))?;
                if i < 1 {
                    return Err(Error::config("I_top", "I_top must be at least 1"));
                }
                let (hb, ht) = (c2 / (self.j + 1) as f64, c1 / (i + 1) as f64);
                if (hb - ht).abs() > SPACING_TOL * hb.max(ht) {
                    return Err(Error::config(
                        "I_top",
                        format!("layer spacings differ: c2/(J+1) = {hb}, c1/(I_top+1) = {ht}"),
                    ));
                }
            }
        }
        for (l, e) in self.eps.iter().enumerate() {
            if !(e.re.is_finite() && e.im.is_finite()) || e.norm() == 0.0 || e.im < 0.0 {
                return Err(Error::config(
                    &format!("eps_re_{}", l + 1),
                    format!("permittivity must be finite, nonzero, with Im ≥ 0, got {e}"),
                ));
            }
        }
        let thetas = self.theta.angles_deg();
        if thetas.is_empty() {
            return Err(Error::config("theta_step_deg", "theta sweep is empty"));
        }
        if let ThetaSweep::Range { step, .. } = self.theta {
            if !(step > 0.0) {
                return Err(Error::config("theta_step_deg", "theta step must be positive"));
            }
        }
        for t in thetas {
            if !(0.0..=90.0).contains(&t) {
                return Err(Error::config("theta_deg", format!("θ must lie in [0°, 90°], got {t}")));
            }
        }
        if !(self.regime_threshold >= 0.0) {
            return Err(Error::config("regime_threshold", "must be nonnegative"));
        }
        FftGrid::new(self.quad_grid, self.a, self.b, self.m, self.n)
            .map_err(|e| Error::config("quad_grid", e.to_string()))?;
        Ok(())
    }

    /// Config text that parses back to an identical value (shortest
    /// round-trip float formatting, absolute lengths).
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("a", fmt(self.a));
        kv("b", fmt(self.b));
        match self.depth {
            Depth::Homogeneous { c } => kv("c", fmt(c)),
            Depth::Layered { c1, c2 } => {
                kv("c1", fmt(c1));
                kv("c2", fmt(c2));
            }
        }
        for (l, e) in self.eps.iter().enumerate() {
            kv(&format!("eps_re_{}", l + 1), fmt(e.re));
            kv(&format!("eps_im_{}", l + 1), fmt(e.im));
        }
        kv("kappa0", fmt(self.kappa0));
        kv("M", self.m.to_string());
        kv("N", self.n.to_string());
        kv("J", self.j.to_string());
        if let Some(i) = self.i_top {
            kv("I_top", i.to_string());
        }
        kv("alpha_deg", fmt(self.alpha_deg));
        match self.theta {
            ThetaSweep::Single(t) => kv("theta_deg", fmt(t)),
            ThetaSweep::Range { start, end, step } => {
                kv("theta_start_deg", fmt(start));
                kv("theta_end_deg", fmt(end));
                kv("theta_step_deg", fmt(step));
            }
        }
        kv("phi_deg", fmt(self.phi_deg));
        kv("quad_grid", self.quad_grid.to_string());
        kv("regime_threshold", fmt(self.regime_threshold));
        s
    }
}

fn fmt(v: f64) -> String {
    // `{:?}` is shortest round-trip and keeps a decimal point or exponent
    format!("{v:?}")
}

/// A length value, possibly in wavelengths.
#[derive(Clone, Copy)]
struct Length {
    value: f64,
    in_lambda: bool,
}

fn parse_length(key: &str, raw: &str) -> Result<Length, Error> {
    let t = raw.trim();
    let (num, in_lambda) = if let Some(x) = t.strip_suffix("lambda") {
        (x.trim(), true)
    } else if let Some(x) = t.strip_suffix('λ') {
        (x.trim(), true)
    } else {
        (t, false)
    };
    Ok(Length { value: parse_f64(key, num)?, in_lambda })
}

fn parse_f64(key: &str, raw: &str) -> Result<f64, Error> {
    raw.trim()
        .parse::<f64>()
        .map_err(|_| Error::config(key, format!("expected a number, got `{}`", raw.trim())))
}

fn parse_usize(key: &str, raw: &str) -> Result<usize, Error> {
    raw.trim()
        .parse::<usize>()
        .map_err(|_| Error::config(key, format!("expected a nonnegative integer, got `{}`", raw.trim())))
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<CavityConfig, Error> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::config("<line>", format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(Error::config(k, "unknown key"));
        }
        if map.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(Error::config(k, "key given twice"));
        }
    }
    let get = |k: &str| map.get(k).map(String::as_str);
    let need = |k: &str| get(k).ok_or_else(|| Error::config(k, "missing required key"));
    let exclusive = |x: &str, y: &str| {
        if get(x).is_some() && get(y).is_some() {
            Err(Error::config(y, format!("`{x}` and `{y}` are mutually exclusive")))
        } else {
            Ok(())
        }
    };

    exclusive("kappa0", "wavelength")?;
    let kappa0 = match (get("kappa0"), get("wavelength")) {
        (Some(v), _) => parse_f64("kappa0", v)?,
        (None, Some(v)) => {
            let wl = parse_f64("wavelength", v)?;
            if !(wl > 0.0) {
                return Err(Error::config("wavelength", "wavelength must be positive"));
            }
            2.0 * PI / wl
        }
        (None, None) => return Err(Error::config("kappa0", "missing required key (or `wavelength`)")),
    };
    let lambda = 2.0 * PI / kappa0;
    let length = |k: &str| -> Result<f64, Error> {
        let l = parse_length(k, need(k)?)?;
        Ok(if l.in_lambda { l.value * lambda } else { l.value })
    };

    exclusive("c", "c1")?;
    exclusive("c", "c2")?;
    let depth = if get("c").is_some() {
        Depth::Homogeneous { c: length("c")? }
    } else if get("c1").is_some() || get("c2").is_some() {
        Depth::Layered { c1: length("c1")?, c2: length("c2")? }
    } else {
        return Err(Error::config("c", "missing required key (or `c1`, `c2`)"));
    };
    let eps_of = |l: usize| -> Result<C64, Error> {
        let re = parse_f64(&format!("eps_re_{l}"), need(&format!("eps_re_{l}"))?)?;
        let im = match get(&format!("eps_im_{l}")) {
            Some(v) => parse_f64(&format!("eps_im_{l}"), v)?,
            None => 0.0,
        };
        Ok(C64::new(re, im))
    };
    let mut eps = vec![eps_of(1)?];
    if get("eps_re_2").is_some() || get("eps_im_2").is_some() {
        eps.push(eps_of(2)?);
    }
    if matches!(depth, Depth::Layered { .. }) && eps.len() == 1 {
        return Err(Error::config("eps_re_2", "missing required key for a layered cavity"));
    }

    for x in ["theta_start_deg", "theta_end_deg", "theta_step_deg"] {
        exclusive("theta_deg", x)?;
    }
    let theta = match get("theta_deg") {
        Some(v) => ThetaSweep::Single(parse_f64("theta_deg", v)?),
        None => ThetaSweep::Range {
            start: parse_f64("theta_start_deg", need("theta_start_deg")?)?,
            end: parse_f64("theta_end_deg", need("theta_end_deg")?)?,
            step: parse_f64("theta_step_deg", need("theta_step_deg")?)?,
        },
    };
    let opt_f64 = |k: &str, default: f64| get(k).map_or(Ok(default), |v| parse_f64(k, v));

    let a = length("a")?;
    let b = length("b")?;
    let m = parse_usize("M", need("M")?)?;
    let n = parse_usize("N", need("N")?)?;
    let quad_grid = match get("quad_grid") {
        Some(v) => parse_usize("quad_grid", v)?,
        None if a > 0.0 && b > 0.0 => FftGrid::default_size(a, b, m, n),
        None => 0,
    };
    let cfg = CavityConfig {
        a,
        b,
        depth,
        eps,
        kappa0,
        m,
        n,
        j: parse_usize("J", need("J")?)?,
        i_top: get("I_top").map(|v| parse_usize("I_top", v)).transpose()?,
        alpha_deg: opt_f64("alpha_deg", 0.0)?,
        theta,
        phi_deg: opt_f64("phi_deg", 0.0)?,
        quad_grid,
        regime_threshold: opt_f64("regime_threshold", 10.0)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Plane wave E^inc = p·e^{iq·x} with q = κ₀d, plus its mirror image in the
/// ground plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IncidentWave {
    pub alpha: f64,
    pub theta: f64,
    pub phi: f64,
    pub kappa0: f64,
    /// q = (α₁, α₂, −β), β ≥ 0.
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: f64,
    pub p: [f64; 3],
}

impl IncidentWave {
    pub fn new(alpha: f64, theta: f64, phi: f64, kappa0: f64) -> Result<Self, Error> {
        if !(0.0..=0.5 * PI).contains(&theta) {
            return Err(Error::Domain(format!("incidence angle θ={theta} outside [0, π/2]")));
        }
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let (sa, ca) = alpha.sin_cos();
        let theta_hat = [ct * cp, ct * sp, -st];
        let phi_hat = [-sp, cp, 0.0];
        let p = [0, 1, 2].map(|i| ca * theta_hat[i] + sa * phi_hat[i]);
        Ok(IncidentWave {
            alpha,
            theta,
            phi,
            kappa0,
            alpha1: -kappa0 * st * cp,
            alpha2: -kappa0 * st * sp,
            beta: kappa0 * ct,
            p,
        })
    }

    pub fn q(&self) -> [f64; 3] {
        [self.alpha1, self.alpha2, -self.beta]
    }

    /// Reflected polarization (−p₁, −p₂, p₃).
    pub fn p_reflected(&self) -> [f64; 3] {
        [-self.p[0], -self.p[1], self.p[2]]
    }

    /// Reflected wavevector (α₁, α₂, β).
    pub fn q_reflected(&self) -> [f64; 3] {
        [self.alpha1, self.alpha2, self.beta]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "a = 1\nb = 1\nc = 3\neps_re_1 = 1\neps_im_1 = 0\nkappa0 = 6.283185307179586\n\
                         M = 3\nN = 3\nJ = 1000\nalpha_deg = 0\ntheta_deg = 0\nphi_deg = 0\n";

    #[test]
    fn small_homogeneous() {
        let c = parse_config(SMALL).unwrap();
        assert_eq!(c.depth, Depth::Homogeneous { c: 3.0 });
        assert_eq!(c.quad_grid, 768);
        assert_eq!(c.regime_threshold, 10.0);
        assert!((c.h() - 3.0 / 1001.0).abs() < 1e-16);
    }

    #[test]
    fn layered_in_wavelengths() {
        let text = "a = 1 lambda\nb = 1λ\nc1 = 1 lambda\nc2 = 2 lambda\neps_re_1 = 7\neps_im_1 = 1.5\n\
                    eps_re_2 = 3\neps_im_2 = 0.05\nwavelength = 0.5\nM = 2\nN = 2\nJ = 1999\nI_top = 999\n\
                    alpha_deg = 90\ntheta_start_deg = 0\ntheta_end_deg = 50\ntheta_step_deg = 0.5\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.depth, Depth::Layered { c1: 0.5, c2: 1.0 });
        assert_eq!(c.eps, vec![C64::new(7.0, 1.5), C64::new(3.0, 0.05)]);
        assert_eq!(c.theta.angles_deg().len(), 100);
    }

    #[test]
    fn misaligned_layers_rejected() {
        let text = "a=1\nb=1\nc1=1\nc2=2\neps_re_1=1\neps_re_2=1\nkappa0=6\nM=1\nN=1\nJ=1000\nI_top=2000\ntheta_deg=0\n";
        let e = parse_config(text).unwrap_err().to_string();
        assert!(e.contains("I_top"), "{e}");
    }

    #[test]
    fn errors_name_the_key() {
        let bad = SMALL.replace("a = 1\n", "a = -1\n");
        assert!(parse_config(&bad).unwrap_err().to_string().contains("a must be positive"));
        let bad = SMALL.replace("M = 3\n", "");
        assert!(parse_config(&bad).unwrap_err().to_string().contains("`M`"));
        let bad = format!("{SMALL}depth = 3\n");
        assert!(parse_config(&bad).unwrap_err().to_string().contains("unknown key"));
        let bad = SMALL.replace("J = 1000", "J = ten");
        assert!(parse_config(&bad).unwrap_err().to_string().contains("`J`"));
    }

    #[test]
    fn normal_incidence() {
        let w = IncidentWave::new(0.0, 0.0, 0.0, 2.0 * PI).unwrap();
        assert_eq!(w.q(), [-0.0, -0.0, -2.0 * PI]);
        assert_eq!(w.beta, 2.0 * PI);
    }

    #[test]
    fn oblique_incidence() {
        let w = IncidentWave::new(0.0, PI / 6.0, 0.0, 2.0 * PI).unwrap();
        assert!((w.alpha1 + PI).abs() < 1e-14);
        assert_eq!(w.alpha2, -0.0);
        assert!((w.beta - PI * 3f64.sqrt()).abs() < 1e-14);
        assert!(IncidentWave::new(0.0, 2.0, 0.0, 1.0).is_err());
    }
}
