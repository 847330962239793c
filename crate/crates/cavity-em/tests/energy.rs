//! Energy balance for a lossless cavity: the power scattered into the upper
//! half space equals the interference term with the specularly reflected
//! wave, ∫|A|²dΩ = (4π/κ₀)·Im(p_r·A(q̂_r)).

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use cavity_em::config::parse_config;
use cavity_em::farfield::far_field;
use cavity_em::pipeline::{gram_for, Solver};
use cavity_em::quad::Rule;
use cavity_em::vertical::InterfaceClosure;

fn balance(cfg_text: &str, alpha: f64, theta: f64) -> (f64, f64) {
    let cfg = parse_config(cfg_text).unwrap();
    let (gram, _) = gram_for(&cfg, None).unwrap();
    let s = Solver::new(&cfg, &gram, InterfaceClosure::default()).unwrap();
    let wave = s.wave(alpha, theta).unwrap();
    let field = s.solve(&wave);
    let (a, b, k) = (cfg.a, cfg.b, cfg.kappa0);
    let rule = Rule::new(48);
    let mut power = 0.0;
    // split θ at 0.5 so the near-grazing lobe is resolved
    for (lo, hi) in [(0.0, 0.5), (0.5, 1.0), (1.0, 0.5 * PI)] {
        for (t, wt) in rule.on(lo, hi) {
            for (p, wp) in Rule::new(96).on(0.0, 2.0 * PI) {
                let dir = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
                if dir[2] <= 0.0 {
                    continue;
                }
                let amp = far_field(&field, dir, a, b, k).unwrap();
                power += wt * wp * t.sin() * amp.iter().map(|v| v.norm_sqr()).sum::<f64>();
            }
        }
    }
    let qr = wave.q_reflected().map(|v| v / k);
    let pr = wave.p_reflected();
    let amp = far_field(&field, qr, a, b, k).unwrap();
    let proj: C64 = (0..3).map(|i| pr[i] * amp[i]).sum();
    (power, 4.0 * PI / k * proj.im)
}

#[test]
fn lossless_cavity_conserves_energy() {
    let text = "a = 1 lambda\nb = 0.8 lambda\nc = 1.3 lambda\neps_re_1 = 1\neps_im_1 = 0\nwavelength = 1\n\
                M = 6\nN = 6\nJ = 2000\ntheta_deg = 0\n";
    for (alpha, theta) in [(0.0, 0.0), (0.3, 0.5), (PI / 2.0, 0.9)] {
        let (p, ext) = balance(text, alpha, theta);
        let rel = (p - ext).abs() / p;
        println!("α={alpha:.2} θ={theta:.2}: scattered {p:.6e}, extinction {ext:.6e}, rel {rel:.3e}");
        assert!(p > 0.0 && rel < 1e-3, "α={alpha} θ={theta}: {p} vs {ext}");
    }
}

#[test]
fn lossy_fill_absorbs_power() {
    let text = "a = 1 lambda\nb = 0.8 lambda\nc = 1.3 lambda\neps_re_1 = 2\neps_im_1 = 0.5\nwavelength = 1\n\
                M = 6\nN = 6\nJ = 2000\ntheta_deg = 0\n";
    let (p, ext) = balance(text, 0.3, 0.5);
    println!("lossy: scattered {p:.6e}, extinction {ext:.6e}");
    // extinction = scattered + absorbed, absorbed > 0
    assert!(ext > p * (1.0 + 1e-3), "{p} vs {ext}");
}
