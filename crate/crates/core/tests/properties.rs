use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use proptest::prelude::*;

use ptwalk::evolution::{init_state, run, step, WalkState};
use ptwalk::linalg::{closure_distance, multiset_distance, CMatrix, ONE, ZERO};
use ptwalk::momentum::{dispersion, scan_bz};
use ptwalk::operators::{assemble_dense, bloch_step};
use ptwalk::spectral::{eigenvalues, eigenvalues_of_matrix};
use ptwalk::symmetry::{
    apply_dense_symmetry, check_position_phs, check_position_pt_at, dense_symmetry_operator,
    pt_eigenphase, verify_dense_symmetry, PtEigenphase, SymmetryKind,
};
use ptwalk::{Frame, HomogeneousParams, ParamField, WalkConfig};

fn angle() -> impl Strategy<Value = f64> {
    -PI..PI
}

fn homogeneous() -> impl Strategy<Value = HomogeneousParams> {
    (angle(), angle(), -1.0..1.0f64, angle())
        .prop_map(|(t1, t2, g, p)| HomogeneousParams::new(t1, t2, g, p).unwrap())
}

/// Arbitrary position-dependent fields on `sites` sites.
fn config(sites: usize) -> impl Strategy<Value = WalkConfig> {
    prop::collection::vec((angle(), 0.5..2.0f64, 0.5..2.0f64, angle(), angle()), 2 * sites).prop_map(
        move |v| WalkConfig::from_fn(sites, |i, n| v[i * sites + (n + sites as i64 / 2) as usize]).unwrap(),
    )
}

fn wrap(n: i64, sites: usize) -> usize {
    (n + sites as i64 / 2).rem_euclid(sites as i64) as usize
}

/// Fields satisfying the PT reflection conditions with offset `q`; with
/// `real_phases` every phase is 0 or π so PHS holds too.
fn pt_config(sites: usize, q: i64, raw: &[(f64, f64, f64, f64, f64)], real_phases: bool) -> WalkConfig {
    let at = |n: i64| raw[wrap(n, sites)];
    let phase = |x: f64| if real_phases { if x > 0.0 { PI } else { 0.0 } } else { x };
    WalkConfig::from_fn(sites, |i, n| {
        let theta = at(n).0 + at(q - n).0 + if i == 1 { 0.3 } else { 0.0 };
        if i == 0 {
            let r = at(n);
            (theta, r.1, r.2, phase(r.3), phase(r.4))
        } else {
            let (l, r) = (at(q + 1 - n), at(q - 1 - n));
            (theta, 1.0 / l.1, 1.0 / r.2, phase(l.3), phase(r.4))
        }
    })
    .unwrap()
}

fn state(sites: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2 * sites)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn bloch_determinant_is_one(p in homogeneous(), k in angle()) {
        for frame in [Frame::Original, Frame::Symmetry] {
            prop_assert!((bloch_step(k, &p, frame).det() - ONE).norm() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_matches_dense(c in config(32), psi in state(32)) {
        let u = assemble_dense(&c, Frame::Original);
        let s = WalkState::from_amplitudes(32, psi.clone()).unwrap();
        prop_assert!(max_diff(step(&s, &c).unwrap().amplitudes(), &u.mul_vec(&psi)) < 1e-12);
    }

    #[test]
    fn step_is_linear(c in config(16), a in state(16), b in state(16), x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let (x, y) = (Complex64::new(x, 0.5), Complex64::new(-0.3, y));
        let mix: Vec<Complex64> = a.iter().zip(&b).map(|(p, q)| x * p + y * q).collect();
        let sa = step(&WalkState::from_amplitudes(16, a).unwrap(), &c).unwrap();
        let sb = step(&WalkState::from_amplitudes(16, b).unwrap(), &c).unwrap();
        let smix = step(&WalkState::from_amplitudes(16, mix).unwrap(), &c).unwrap();
        let combined: Vec<Complex64> =
            sa.amplitudes().iter().zip(sb.amplitudes()).map(|(p, q)| x * p + y * q).collect();
        prop_assert!(max_diff(smix.amplitudes(), &combined) < 1e-12);
    }

    #[test]
    fn unitary_walk_conserves_norm(t1 in angle(), t2 in angle(), phi in angle(), steps in 1usize..30) {
        let p = HomogeneousParams::new(t1, t2, 0.0, phi).unwrap();
        let c = WalkConfig::homogeneous(128, &p).unwrap();
        let rec = run(&c, &init_state(128, 0, [ONE, ONE]).unwrap(), steps).unwrap();
        prop_assert!(rec.total_probability.iter().all(|p| (p - 1.0).abs() < 1e-12));
    }

    #[test]
    fn light_cone(c in config(64), steps in 1usize..12, n0 in -4i64..4) {
        let mut s = init_state(64, n0, [ONE, ZERO]).unwrap();
        for t in 1..=steps {
            s = step(&s, &c).unwrap();
            let (first, last) = s.support().unwrap_or((32, 32));
            let origin = (n0 + 32) as usize;
            prop_assert!(first + 2 * t >= origin && last <= origin + 2 * t);
        }
    }

    #[test]
    fn pt_eigenphase_relation(eg in 1.0..1.3f64, phi in angle(), k in angle()) {
        let p = HomogeneousParams::with_exp_gamma(PI / 4.0, -PI / 7.0, eg, phi).unwrap();
        if let Ok(PtEigenphase::Unbroken { plus, minus }) = pt_eigenphase(k, &p) {
            let e = Complex64::from_polar(1.0, 2.0 * dispersion(k, &p).eta);
            prop_assert!((plus - e).norm() < 1e-9);
            prop_assert!((minus + e).norm() < 1e-9);
        }
    }

    #[test]
    fn anti_unitary_involution(c in config(12), psi in state(12), q in 0i64..12) {
        for (kind, w) in [(SymmetryKind::PT, q), (SymmetryKind::PHS, 0)] {
            let x = dense_symmetry_operator(&c, kind, w).unwrap();
            let twice = apply_dense_symmetry(&x, kind, &apply_dense_symmetry(&x, kind, &psi));
            prop_assert!(max_diff(&twice, &psi) < 1e-15);
        }
    }

    #[test]
    fn checker_agrees_with_dense(
        raw in prop::collection::vec((angle(), 0.5..2.0f64, 0.5..2.0f64, angle(), angle()), 16),
        q in 0i64..16,
    ) {
        let c = pt_config(16, q, &raw, false);
        prop_assert!(check_position_pt_at(&c, q).holds);
        prop_assert!(verify_dense_symmetry(&c, SymmetryKind::PT, q).unwrap() < 1e-9);
    }

    #[test]
    fn composition_closure(
        raw in prop::collection::vec((angle(), 0.5..2.0f64, 0.5..2.0f64, angle(), angle()), 12),
        q in 0i64..12,
    ) {
        // PT and PHS from the parameter checkers imply PCS on the dense operator
        let c = pt_config(12, q, &raw, true);
        prop_assert!(check_position_pt_at(&c, q).holds);
        prop_assert!(check_position_phs(&c).holds);
        prop_assert!(verify_dense_symmetry(&c, SymmetryKind::PCS, q).unwrap() < 1e-9);
        let s = eigenvalues(&c, Frame::Original).unwrap();
        prop_assert!(closure_distance(&s.eigenvalues, |z| z.conj()) < 1e-8);
    }

    #[test]
    fn injected_violation_is_detected(
        raw in prop::collection::vec((angle(), 0.5..2.0f64, 0.5..2.0f64, angle(), angle()), 12),
        q in 0i64..12,
        site in 0usize..12,
        which in 0usize..5,
    ) {
        let c = pt_config(12, q, &raw, false);
        let n = site as i64 - 6;
        let field = [ParamField::Theta, ParamField::GainL, ParamField::GainR, ParamField::PhaseL, ParamField::PhaseR][which];
        // a coin angle on a reflection-fixed site stays symmetric when changed
        prop_assume!(field != ParamField::Theta || wrap(q - n, 12) != site);
        let old = match field {
            ParamField::Theta => c.theta(0)[site],
            ParamField::GainL => c.gain(0, ptwalk::Chirality::Left)[site],
            ParamField::GainR => c.gain(0, ptwalk::Chirality::Right)[site],
            ParamField::PhaseL => c.phase(0, ptwalk::Chirality::Left)[site],
            ParamField::PhaseR => c.phase(0, ptwalk::Chirality::Right)[site],
        };
        let bad = c.with_entry(field, 0, site, old + 1e-3).unwrap();
        prop_assert!(!check_position_pt_at(&bad, q).holds);
        prop_assert!(verify_dense_symmetry(&bad, SymmetryKind::PT, q).unwrap() > 1e-6);
    }

    #[test]
    fn frames_share_spectrum(c in config(10)) {
        let a = eigenvalues(&c, Frame::Original).unwrap();
        let b = eigenvalues(&c, Frame::Symmetry).unwrap();
        prop_assert!(multiset_distance(&a.eigenvalues, &b.eigenvalues) < 1e-8);
    }

    #[test]
    fn eigenvalues_match_schur_oracle(entries in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 100)) {
        let a = CMatrix::from_fn(10, 10, |r, c| {
            let (x, y) = entries[10 * r + c];
            Complex64::new(x, y)
        });
        let ours = eigenvalues_of_matrix(&a).unwrap();
        let m = DMatrix::from_fn(10, 10, |r, c| a[(r, c)]);
        let oracle: Vec<Complex64> = Schur::new(m).eigenvalues().unwrap().iter().copied().collect();
        prop_assert!(multiset_distance(&ours, &oracle) < 1e-9);
        let prod = ours.iter().fold(ONE, |acc, l| acc * l);
        prop_assert!((prod - a.determinant()).norm() < 1e-9 * a.determinant().norm().max(1.0));
    }

    #[test]
    fn dense_determinant_has_unit_modulus(c in config(8)) {
        // every elemental factor has |det| = 1 only when gains pair up, so use PT configs
        let raw: Vec<(f64, f64, f64, f64, f64)> =
            (0..8).map(|j| (c.theta(0)[j], c.gain(0, ptwalk::Chirality::Left)[j], c.gain(0, ptwalk::Chirality::Right)[j], 0.1, -0.2)).collect();
        let pt = pt_config(8, 3, &raw, false);
        let s = eigenvalues(&pt, Frame::Original).unwrap();
        let prod = s.eigenvalues.iter().fold(ONE, |acc, l| acc * l);
        prop_assert!((prod.norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn band_spectrum_symmetric_under_shifted_reflection(p in homogeneous()) {
        let scan = scan_bz(&p, 64).unwrap();
        for pt in &scan.points {
            let partner = dispersion(-pt.k - 2.0 * p.phi, &p);
            let d = (pt.eps_plus - partner.eps_plus).norm().min((pt.eps_plus + partner.eps_plus).norm());
            prop_assert!(d < 1e-9);
        }
    }
}
