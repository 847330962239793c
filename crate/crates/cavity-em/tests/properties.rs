use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::f64::consts::PI;

use cavity_em::config::{parse_config, IncidentWave};
use cavity_em::modal::{synthesize_aperture, ApertureField, ModeIndexSets};
use cavity_em::singular::bessel::bessel_osc_integral;
use cavity_em::singular::fresnel::fresnel_tail;
use cavity_em::tbc::incident_rhs;

fn field_from(sets: ModeIndexSets, seed: &[f64]) -> ApertureField {
    let x: Vec<C64> = (0..sets.order())
        .map(|i| C64::new(seed[i % seed.len()] * (i as f64 + 1.0).sin(), seed[(i + 1) % seed.len()]))
        .collect();
    ApertureField::from_stacked(sets, &x).unwrap()
}

proptest! {
    #[test]
    fn flatten_unflatten_is_a_bijection(m in 1usize..12, n in 1usize..12) {
        let sets = ModeIndexSets::new(m, n).unwrap();
        prop_assert_eq!(sets.order(), 3 * m * n + m + n);
        for set in [sets.set1, sets.set2, sets.set3] {
            for i in 0..set.len() {
                let (mm, nn) = set.unflatten(i).unwrap();
                prop_assert_eq!(set.flatten(mm, nn), Some(i));
            }
            prop_assert!(set.unflatten(set.len()).is_none());
        }
        prop_assert!(sets.set1.flatten(0, 0).is_none());
        prop_assert!(sets.set3.flatten(0, 1).is_none());
    }

    #[test]
    fn synthesis_is_linear(
        seed_u in prop::collection::vec(-1.0f64..1.0, 4),
        seed_v in prop::collection::vec(-1.0f64..1.0, 4),
        s in -3.0f64..3.0,
        x1 in 0.0f64..1.0,
        x2 in 0.0f64..0.7,
    ) {
        let sets = ModeIndexSets::new(3, 2).unwrap();
        let (u, v) = (field_from(sets, &seed_u), field_from(sets, &seed_v));
        let w: Vec<C64> = u.stacked().iter().zip(v.stacked()).map(|(p, q)| p * s + q).collect();
        let w = ApertureField::from_stacked(sets, &w).unwrap();
        let eu = synthesize_aperture(&u, x1, x2, 1.0, 0.7).unwrap();
        let ev = synthesize_aperture(&v, x1, x2, 1.0, 0.7).unwrap();
        let ew = synthesize_aperture(&w, x1, x2, 1.0, 0.7).unwrap();
        for i in 0..3 {
            prop_assert!((ew[i] - (eu[i] * s + ev[i])).norm() < 1e-12);
        }
    }

    #[test]
    fn config_round_trips_through_text(
        a in 0.2f64..3.0,
        b in 0.2f64..3.0,
        c in 0.1f64..4.0,
        er in 1.0f64..10.0,
        ei in 0.0f64..2.0,
        m in 1usize..5,
        n in 1usize..5,
        j in 1usize..400,
        alpha in 0.0f64..90.0,
        theta in 0.0f64..89.0,
    ) {
        let text = format!(
            "a = {a}\nb = {b}\nc = {c}\neps_re_1 = {er}\neps_im_1 = {ei}\nkappa0 = 6.283185307179586\n\
             M = {m}\nN = {n}\nJ = {j}\nalpha_deg = {alpha}\ntheta_deg = {theta}\nquad_grid = 256\n"
        );
        let cfg = parse_config(&text).unwrap();
        let again = parse_config(&cfg.serialize()).unwrap();
        prop_assert_eq!(&cfg, &again);
        prop_assert_eq!(cfg.serialize(), again.serialize());
    }

    #[test]
    fn fresnel_tail_scales_with_the_variable(p in 1.0f64..50.0, r0 in 30.0f64..200.0, s in 0.5f64..2.0) {
        // z = s·w maps ∫_{R0} e^{ipz} z^{-1/2} dz onto √s ∫_{R0/s} e^{ips w} w^{-1/2} dw
        let lhs = fresnel_tail(p, r0).unwrap();
        let rhs = s.sqrt() * fresnel_tail(p * s, r0 / s).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-9 * lhs.norm());
    }

    #[test]
    fn bessel_integral_is_real_at_zero_wavenumber(c in 1.0f64..80.0, r in 0.5f64..3.0) {
        // κ = 0 leaves ∫₀^R J₀(cr)dr, which is real
        let v = bessel_osc_integral(r, c, 0.0, 10.0).unwrap();
        prop_assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn incident_polarization_is_transverse(alpha in 0.0f64..(2.0 * PI), theta in 0.0f64..(0.5 * PI), phi in 0.0f64..(2.0 * PI)) {
        let w = IncidentWave::new(alpha, theta, phi, 2.0 * PI).unwrap();
        let q = w.q();
        let dot: f64 = (0..3).map(|i| w.p[i] * q[i]).sum();
        let pn: f64 = w.p.iter().map(|v| v * v).sum();
        let qn: f64 = q.iter().map(|v| v * v).sum();
        prop_assert!(dot.abs() < 1e-12);
        prop_assert!((pn - 1.0).abs() < 1e-12);
        prop_assert!((qn.sqrt() - 2.0 * PI).abs() < 1e-12);
        prop_assert!(w.beta >= 0.0);
    }

    #[test]
    fn incident_rhs_is_linear_in_polarization(alpha in 0.0f64..(2.0 * PI), theta in 0.0f64..1.5, phi in 0.0f64..(2.0 * PI)) {
        let sets = ModeIndexSets::new(3, 3).unwrap();
        let k = 2.0 * PI;
        let rhs = |al: f64| incident_rhs(&IncidentWave::new(al, theta, phi, k).unwrap(), &sets, 1.0, 0.8, 1e-3);
        let (t1, t2) = rhs(0.0);
        let (p1, p2) = rhs(0.5 * PI);
        let (g1, g2) = rhs(alpha);
        let (sa, ca) = alpha.sin_cos();
        let scale = t1.iter().chain(&t2).chain(&p1).chain(&p2).map(|v| v.norm()).fold(0.0, f64::max);
        for (g, (t, p)) in g1.iter().chain(&g2).zip(t1.iter().chain(&t2).zip(p1.iter().chain(&p2))) {
            prop_assert!((g - (t * ca + p * sa)).norm() <= 1e-13 * scale);
        }
    }
}
