use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use cavity_em::config::parse_config;
use cavity_em::interface::residual;
use cavity_em::modal::ModeSet;
use cavity_em::pipeline::{gram_for, run, Solver};
use cavity_em::tbc::incident_rhs;
use cavity_em::vertical::InterfaceClosure;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Builds the full volumetric finite-difference system (every node of every
/// mode, aperture rows from the TBC blocks) without any elimination, solves
/// it densely and compares with the compressed aperture solve.
#[test]
fn compressed_solve_matches_full_volume_system() {
    let text = "a = 1\nb = 0.8\nc = 0.6\neps_re_1 = 2.5\neps_im_1 = 0.4\nkappa0 = 6.283185307179586\n\
                M = 2\nN = 2\nJ = 30\ntheta_deg = 0\nquad_grid = 256\n";
    let cfg = parse_config(text).unwrap();
    let (gram, _) = gram_for(&cfg, None).unwrap();
    let s = Solver::new(&cfg, &gram, InterfaceClosure::default()).unwrap();
    let sets = s.sets;
    let (j, h) = (cfg.j, cfg.h());
    let nodes = j + 1; // nodes 1..=J+1; node 0 is eliminated by the bottom condition
    let (l1, l2, l3) = (sets.set1.len(), sets.set2.len(), sets.set3.len());
    let off = [0, l1, l1 + l2];
    let at = |blk: usize, i: usize, node: usize| (off[blk] + i) * nodes + node - 1;
    let total = (l1 + l2 + l3) * nodes;
    let mut a = DMatrix::<C64>::zeros(total, total);
    let mut rhs = DVector::<C64>::zeros(total);
    let eps = cfg.eps[0];
    let shift = |m: usize, n: usize| {
        let kt2 = (m as f64 * PI / cfg.a).powi(2) + (n as f64 * PI / cfg.b).powi(2);
        h * h * (cfg.kappa0 * cfg.kappa0 * eps - kt2)
    };

    let wave = s.wave(0.4, 0.5).unwrap();
    let (g1, g2) = incident_rhs(&wave, &sets, cfg.a, cfg.b, h);
    let sets_of: [&ModeSet; 3] = [&sets.set1, &sets.set2, &sets.set3];
    for blk in 0..3 {
        for (i, (m, n)) in sets_of[blk].iter().enumerate() {
            let d = shift(m, n);
            for node in 1..=j {
                let r = at(blk, i, node);
                a[(r, r)] = d - 2.0;
                if node > 1 {
                    a[(r, at(blk, i, node - 1))] = ONE;
                } else if blk == 2 {
                    // E₃ bottom: E₃,₀ = E₃,₁
                    a[(r, r)] += ONE;
                }
                a[(r, at(blk, i, node + 1))] = ONE;
            }
        }
    }
    let top = j + 1;
    let t = &s.tbc;
    for p in 0..l1 {
        let r = at(0, p, top);
        a[(r, at(0, p, j))] = ONE;
        a[(r, r)] -= ONE;
        for q in 0..l1 {
            a[(r, at(0, q, top))] -= t.f1[(p, q)] + t.h1[(p, q)];
        }
        for q in 0..l2 {
            a[(r, at(1, q, top))] -= t.g1[(p, q)];
        }
        for q in 0..l3 {
            a[(r, at(2, q, top))] += t.i1[(p, q)];
        }
        rhs[r] = g1[p];
    }
    for p in 0..l2 {
        let r = at(1, p, top);
        a[(r, at(1, p, j))] = ONE;
        a[(r, r)] -= ONE;
        for q in 0..l1 {
            a[(r, at(0, q, top))] -= t.h2[(p, q)];
        }
        for q in 0..l2 {
            a[(r, at(1, q, top))] -= t.f2[(p, q)] + t.g2[(p, q)];
        }
        for q in 0..l3 {
            a[(r, at(2, q, top))] += t.i2[(p, q)];
        }
        rhs[r] = g2[p];
    }
    for p in 0..l3 {
        let r = at(2, p, top);
        a[(r, at(2, p, j))] = ONE;
        a[(r, r)] -= ONE;
        for q in 0..l1 {
            a[(r, at(0, q, top))] += t.f3[(p, q)];
        }
        for q in 0..l2 {
            a[(r, at(1, q, top))] += t.g3[(p, q)];
        }
    }
    let x = a.lu().solve(&rhs).unwrap();

    let field = s.solve(&wave);
    let vol = s.dtn.recover_interior(&field, cfg.a, cfg.b);
    let big = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for (blk, (vals, profiles)) in [(&field.e1, &vol.e1), (&field.e2, &vol.e2), (&field.e3, &vol.e3)].into_iter().enumerate() {
        for i in 0..vals.len() {
            worst = worst.max((x[at(blk, i, top)] - vals[i]).norm());
            for node in 1..=top {
                worst = worst.max((x[at(blk, i, node)] - profiles[i][node]).norm());
            }
            if blk < 2 {
                assert_eq!(profiles[i][0], ZERO);
            } else {
                assert_eq!(profiles[i][0], profiles[i][1]);
            }
        }
    }
    println!("full system vs compressed: {:.3e}", worst / big);
    assert!(worst <= 1e-10 * big, "{}", worst / big);
}

#[test]
fn one_factorization_serves_every_angle() {
    let text = "a = 1 lambda\nb = 1 lambda\nc = 1.5 lambda\neps_re_1 = 4\neps_im_1 = 1\nwavelength = 1\n\
                M = 3\nN = 3\nJ = 300\ntheta_deg = 0\nphi_deg = 30\n";
    let cfg = parse_config(text).unwrap();
    let (gram, _) = gram_for(&cfg, None).unwrap();
    let s = Solver::new(&cfg, &gram, InterfaceClosure::default()).unwrap();
    let fresh = s.system.matrix.clone().lu();
    for deg in [0.0, 10.0, 25.5, 47.0, 80.0] {
        let wave = s.wave(0.2, f64::to_radians(deg)).unwrap();
        let (g1, g2) = incident_rhs(&wave, &s.sets, cfg.a, cfg.b, cfg.h());
        let b = s.system.rhs(&g1, &g2);
        let reused = s.solve(&wave);
        let direct = fresh.solve(&b).unwrap();
        let x = DVector::from_vec(reused.stacked());
        let rel = (&x - &direct).norm() / direct.norm();
        assert!(rel <= 1e-13, "θ={deg}: {rel}");
        assert!(residual(&s.system, &reused, &b) <= 1e-12);
        assert!(s.divergence_residual(&reused) <= 1e-10);
    }
}

/// Two-layer cavity with the layer ratio of the coated example: a lossy
/// high-permittivity layer on top of a low-loss one, h = λ/1000.
#[test]
fn layered_cavity_runs_end_to_end() {
    let text = "a = 1 lambda\nb = 1 lambda\nc1 = 1 lambda\nc2 = 2 lambda\neps_re_1 = 7\neps_im_1 = 1.5\n\
                eps_re_2 = 3\neps_im_2 = 0.05\nwavelength = 1\nM = 2\nN = 2\nJ = 1999\nI_top = 999\n\
                alpha_deg = 0\ntheta_start_deg = 0\ntheta_end_deg = 60\ntheta_step_deg = 15\nquad_grid = 384\n";
    let cfg = parse_config(text).unwrap();
    assert!((cfg.h() - 1e-3).abs() < 1e-15);
    let out = run(&cfg, None).unwrap();
    assert_eq!(out.samples.len(), 4);
    assert!(out.samples.iter().all(|r| r.sigma_tt_db.is_finite() && r.sigma_pp_db.is_finite()));
    assert!((out.samples[0].sigma_tt_db - out.samples[0].sigma_pp_db).abs() < 1e-6);
    assert!(out.condition.is_finite());

    // tangential fields are continuous across the interface and vanish at the bottom
    let (gram, _) = gram_for(&cfg, None).unwrap();
    let s = Solver::new(&cfg, &gram, InterfaceClosure::default()).unwrap();
    let field = s.solve(&s.wave(0.0, 0.3).unwrap());
    assert!(s.divergence_residual(&field) <= 1e-10);
    let vol = s.dtn.recover_interior(&field, cfg.a, cfg.b);
    let (iface, _) = vol.interface.clone().unwrap();
    assert_eq!(iface, cfg.j + 1);
    for prof in vol.e1.iter().chain(&vol.e2) {
        assert_eq!(prof.len(), cfg.j + 1 + cfg.i_top.unwrap() + 2);
        assert_eq!(prof[0], ZERO);
        let step = (prof[iface + 1] - prof[iface]).norm();
        let scale = prof.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(step <= 0.05 * scale, "jump {step} vs {scale}");
    }
}
