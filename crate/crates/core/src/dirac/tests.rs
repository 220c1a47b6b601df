use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::critical::{classify_map, hexagonal, square, triangular, EmbeddedMap, Verdict};
use crate::mesh::{build_double, grid_disc, square_torus, DoubleMap, TripleGraph};

fn lattice(n: usize, torus: bool) -> EmbeddedMap<f64> {
    square::<f64>(PI / 2.0, n, n, torus, 1.0).unwrap()
}

fn dirac(lam: &DoubleMap<f64>) -> (SpinStructure, Spinor<f64>, DiracReport) {
    match dirac_exists(lam).unwrap() {
        DiracOutcome::Spinor { spin, spinor, report } => (spin, spinor, report),
        DiracOutcome::Witness(w) => panic!("no spinor: {w:?}"),
    }
}

// ----------------------------------------------------------- spin structures

#[test]
fn torus_has_four_spin_structures() {
    let g = square_torus(3, 3);
    let lam = build_double(&g, &vec![1.0f64; g.n_edges()]).unwrap();
    let triple = TripleGraph::build(&lam);
    let all = SpinStructure::enumerate(&triple).unwrap();
    assert_eq!(all.len(), 4);
    for (a, s) in all.iter().enumerate() {
        assert!(s.trivial_faces().is_empty());
        for t in &all[a + 1..] {
            assert!(!s.isomorphic(t));
        }
        assert!(s.isomorphic(s));
    }
}

#[test]
fn disc_has_one_spin_structure() {
    let g = grid_disc(4, 4);
    let lam = build_double(&g, &vec![1.0f64; g.n_edges()]).unwrap();
    let all = SpinStructure::enumerate(&TripleGraph::build(&lam)).unwrap();
    assert_eq!(all.len(), 1);
    assert!(all[0].trivial_faces().is_empty());
}

#[test]
fn parity_of_a_boundary_counts_enclosed_faces() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = square_torus(3, 4);
    let lam = build_double(&g, &vec![1.0f64; g.n_edges()]).unwrap();
    let triple = TripleGraph::build(&lam);
    for s in SpinStructure::enumerate(&triple).unwrap() {
        for _ in 0..20 {
            let chosen: Vec<usize> = (0..triple.n_faces()).filter(|_| rng.random_bool(0.3)).collect();
            let mut odd = vec![false; triple.n_edges()];
            for &f in &chosen {
                for d in &triple.complex.faces[f] {
                    odd[d.edge] ^= true;
                }
            }
            let parity = (0..triple.n_edges()).filter(|&e| odd[e]).fold(false, |acc, e| acc ^ s.lift[e]);
            assert_eq!(parity, chosen.len() % 2 == 1);
        }
    }
}

#[test]
fn wrong_number_of_parities_is_rejected() {
    let g = square_torus(3, 3);
    let lam = build_double(&g, &vec![1.0f64; g.n_edges()]).unwrap();
    assert!(SpinStructure::build(&TripleGraph::build(&lam), &[true]).is_err());
}

// -------------------------------------------------------------- Dirac spinor

#[test]
fn square_lattice_spinor_solves_both_equations() {
    let em = lattice(5, false);
    let (spin, z, report) = dirac(&em.map);
    assert!(report.residual.is_dirac(1e-12), "{report:?}");
    assert!(report.modulus_defect <= 1e-12);
    assert_eq!(z.at(0, false), Complex64::new(1.0, 0.0));
    assert!(z.equivariance_violation().is_none());
    for w in &z.values {
        assert!((w.powi(8) - 1.0).norm() < 1e-12, "{w} is not an eighth root of unity");
    }
    let step = Complex64::from_polar(1.0, FRAC_PI_4);
    for (e, &[a, b]) in spin.triple.complex.edges.iter().enumerate() {
        assert!((z.at(b, spin.lift[e]) - step * z.at(a, false)).norm() < 1e-12);
    }
}

#[test]
fn spinor_is_unique_up_to_a_constant() {
    let em = triangular::<f64>(1.0, 1.2, 4, 4, false, 1.0).unwrap();
    let (spin, z, _) = dirac(&em.map);
    let (_, z2) = construct_dirac_spinor(&em.map, 17, Some(&spin)).unwrap();
    let ratio = z2.values[0] / z.values[0];
    for (a, b) in z2.values.iter().zip(&z.values) {
        assert!((a / b - ratio).norm() <= 1e-12);
    }
    let (other, z3) = construct_dirac_spinor(&em.map, 17, None).unwrap();
    let gauge = other.gauge_to(&spin).unwrap();
    let z3 = z3.regauge(&gauge);
    let ratio = z3.values[0] / z.values[0];
    for (a, b) in z3.values.iter().zip(&z.values) {
        assert!((a / b - ratio).norm() <= 1e-12);
    }
}

#[test]
fn triangular_and_hexagonal_lattices_carry_spinors() {
    for em in [
        triangular::<f64>(PI / 3.0, PI / 3.0, 4, 4, false, 1.0).unwrap(),
        hexagonal::<f64>(PI / 3.0, PI / 3.0, 4, 4, false, 1.0).unwrap(),
        triangular::<f64>(1.1, 0.9, 3, 3, true, 1.0).unwrap(),
    ] {
        let (_, _, report) = dirac(&em.map);
        assert!(report.residual.is_dirac(1e-12));
        assert!(report.rhombus_defect <= 1e-12);
    }
}

#[test]
fn torus_spinor_lives_on_exactly_one_structure() {
    let em = lattice(4, true);
    let (spin, _, report) = dirac(&em.map);
    assert!(report.residual.is_dirac(1e-12));
    let all = SpinStructure::enumerate(&spin.triple).unwrap();
    let carrying: Vec<bool> = all.iter().map(|s| construct_dirac_spinor(&em.map, 0, Some(s)).is_ok()).collect();
    assert_eq!(carrying.iter().filter(|&&b| b).count(), 1);
    let k = carrying.iter().position(|&b| b).unwrap();
    assert!(all[k].isomorphic(&spin));
}

#[test]
fn perturbed_edge_gives_a_vertex_witness() {
    let em = lattice(5, false);
    let mut rho = em.map.rho().to_vec();
    let i = 17;
    rho[i] *= 1.1;
    let lam = em.map.with_rho(rho).unwrap();
    match dirac_exists(&lam).unwrap() {
        DiracOutcome::Witness(DiracWitness::Vertex { vertex, phase }) => {
            assert!(em.map.diamond().corners[i].contains(&vertex));
            assert!((phase + 1.0).norm() > 1e-3);
        }
        other => panic!("expected a vertex witness, got {other:?}"),
    }
    assert!(construct_dirac_spinor(&lam, 0, None).is_err());
}

#[test]
fn non_equivariant_input_is_rejected() {
    let em = lattice(3, false);
    let (spin, z, _) = dirac(&em.map);
    let ones = Spinor { values: vec![Complex64::new(1.0, 0.0); z.values.len()] };
    assert!(dirac_residual(&em.map, &spin, &ones).is_err());
    assert!(spinor_form(&em.map, &spin, &z, &ones).is_err());
}

#[test]
fn dotsenko_turn_changes_sign() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let rho: f64 = rng.random_range(0.1..10.0);
        let (z1, z2) = (
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        );
        let mut seq = vec![z1, z2];
        for k in 0..4 {
            let r = if k % 2 == 0 { rho } else { 1.0 / rho };
            let n = seq.len();
            seq.push(dotsenko_step(r, seq[n - 2], seq[n - 1]));
        }
        assert!((seq[4] + z1).norm() < 1e-10 * (1.0 + rho * rho));
        assert!((seq[5] + z2).norm() < 1e-10 * (1.0 + rho * rho));
    }
}

#[test]
fn transfer_matrices_preserve_the_closing_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let l = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        for eps in [1.0, -1.0] {
            let root = (1.0 + l * l).sqrt();
            assert!(closing_defect(transfer_matrix(l, eps, root)) < 1e-12);
            assert!(closing_defect(transfer_matrix(l, eps, -root)) < 1e-12);
        }
    }
    let sym = transfer_matrix(Complex64::new(0.0, -1.0), 1.0, Complex64::new(0.0, 0.0));
    assert!(closing_defect(sym) < 1e-15);
    let wrong = [[Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]];
    assert!(closing_defect(wrong) > 1.0);
}

// ---------------------------------------------------------- spinor 1-forms

#[test]
fn square_of_the_dirac_spinor_follows_the_reflected_coordinate() {
    for em in [lattice(5, false), square::<f64>(1.0, 4, 5, false, 0.8).unwrap(), lattice(4, true)] {
        let (spin, z, _) = dirac(&em.map);
        let f = classify_spinor_form(&em.map, &spin, &z, &z, 1e-12).unwrap();
        assert!(f.predicted_holomorphic);
        assert!(f.closed_residual <= 1e-12 && f.type_residual <= 1e-12);
        let (l, spread) = dz_ratio(&em.map, &em.embedding, &f.form, true);
        assert!(l.norm() > 0.1);
        assert!(spread <= 1e-10, "spread {spread}");
        let (_, direct) = dz_ratio(&em.map, &em.embedding, &f.form, false);
        assert!(direct > 0.5);
    }
}

#[test]
fn pairing_with_the_conjugate_vanishes() {
    let em = triangular::<f64>(1.0, 1.2, 4, 4, false, 1.0).unwrap();
    let (spin, z, _) = dirac(&em.map);
    let f = spinor_form(&em.map, &spin, &z, &z.conj()).unwrap();
    assert!(f.max_abs() < 1e-12);
}

#[test]
fn dirac_times_dotsenko_is_holomorphic() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let em = square::<f64>(1.2, 5, 5, false, 1.0).unwrap();
    let (spin, z, _) = dirac(&em.map);
    let basis = dotsenko_solutions(&em.map, &spin).unwrap();
    assert!(basis.len() > 2);
    let mut zp = Spinor { values: vec![Complex64::new(0.0, 0.0); z.values.len()] };
    for b in &basis {
        let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        for (v, w) in zp.values.iter_mut().zip(&b.values) {
            *v += c * w;
        }
    }
    let f = classify_spinor_form(&em.map, &spin, &z, &zp, 1e-10).unwrap();
    assert!(f.residuals[1].dotsenko <= 1e-10);
    assert!(f.residuals[1].symmetry > 1e-3);
    assert!(f.predicted_closed && f.predicted_holomorphic);
    assert!(f.closed_residual <= 1e-10 && f.type_residual <= 1e-10, "{} {}", f.closed_residual, f.type_residual);
    let anti = classify_spinor_form(&em.map, &spin, &z.conj(), &zp, 1e-10).unwrap();
    assert!(anti.closed_residual <= 1e-10);
    assert!(!anti.predicted_holomorphic && anti.type_residual > 1e-6);
}

// ------------------------------------------------------------ equivalence

/// Critical with every cone congruent to `2π` modulo `4π`.
fn critical_with_even_cones(em: &EmbeddedMap<f64>, lam: &DoubleMap<f64>) -> bool {
    let c = classify_map(lam, &em.embedding, 1e-9);
    c.verdict == Verdict::Critical
        && c.cones.iter().all(|k| ((k.angle - 2.0 * PI).rem_euclid(4.0 * PI)).min(4.0 * PI - (k.angle - 2.0 * PI).rem_euclid(4.0 * PI)) < 1e-9)
}

#[test]
fn existence_matches_criticality() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases: Vec<(EmbeddedMap<f64>, DoubleMap<f64>)> = Vec::new();
    for _ in 0..4 {
        let em = square::<f64>(rng.random_range(0.3..2.8), 4, 4, rng.random_bool(0.5), 1.0).unwrap();
        let lam = em.map.clone();
        cases.push((em, lam));
        let (a, b) = (rng.random_range(0.4..1.2), rng.random_range(0.4..1.2));
        let em = triangular::<f64>(a, b, 4, 4, false, 1.0).unwrap();
        let mut rho = em.map.rho().to_vec();
        let i = rng.random_range(0..rho.len());
        rho[i] *= rng.random_range(0.8..1.25);
        let lam = em.map.with_rho(rho).unwrap();
        cases.push((em, lam));
    }
    for (em, lam) in &cases {
        let exists = matches!(dirac_exists(lam).unwrap(), DiracOutcome::Spinor { .. });
        assert_eq!(exists, critical_with_even_cones(em, lam));
    }
}

// ------------------------------------------------------------ massive layer

#[test]
fn conformal_modulus_is_exact() {
    for phi in [0.1, 1.0, 2.5, PI] {
        assert_eq!(elliptic_half_angle(phi, 1.0).unwrap(), phi / 2.0);
    }
    assert_eq!(complete_i(0.0).unwrap(), PI / 2.0);
    assert_eq!(MassiveParams::new(1.0).unwrap().square_angle, PI / 2.0);
}

#[test]
fn gudermannian_spot_value() {
    let u = elliptic_half_angle(PI / 2.0, 0.0).unwrap();
    assert!((u - (3.0 * PI / 8.0).tan().ln()).abs() <= 1e-10, "{u}");
    assert!(elliptic_half_angle(PI, 0.0).is_err());
}

#[test]
fn quadrature_agrees_with_the_mean_iteration() {
    for k in [0.05, 0.3, 0.7, 0.95, 1.0] {
        for phi in [0.01, 0.5, 1.5, 2.9, PI] {
            let q = elliptic_half_angle(phi, k).unwrap();
            let a = elliptic_half_angle_agm(phi, k).unwrap();
            assert!((q - a).abs() <= 1e-11, "k = {k}, φ = {phi}: {q} vs {a}");
        }
        let kp = (1.0f64 - k * k).sqrt();
        assert!((complete_i(kp).unwrap() - complete_i_agm(kp).unwrap()).abs() <= 1e-11);
    }
}

#[test]
fn half_angle_increases_with_the_angle() {
    for k in [0.2, 0.6] {
        let u: Vec<f64> = (1..40).map(|j| elliptic_half_angle(j as f64 * PI / 40.0, k).unwrap()).collect();
        assert!(u.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn modulus_violation_is_reported() {
    let em = lattice(4, false);
    let k = 0.6;
    let mut rho = massive_ratios(&em.map, k);
    let ok = massive_flatness(&em.map, &rho, k, 1e-9).unwrap();
    assert!(ok.modulus_ok());
    assert!(ok.modulus_defect <= 1e-9);
    rho[5] *= 1.0 + 1e-6;
    let bad = massive_flatness(&em.map, &rho, k, 1e-9).unwrap();
    assert_eq!(bad.offending.map(|o| o.0), Some(5));
    assert!(!bad.flat);
}

#[test]
fn uniform_massive_square_lattice_is_homogeneous() {
    let em = lattice(4, true);
    let k = 0.5;
    let rep = massive_flatness(&em.map, &massive_ratios(&em.map, k), k, 1e-9).unwrap();
    assert!(rep.modulus_ok());
    let f0 = rep.face_residuals[0];
    assert!(rep.face_residuals.iter().all(|r| (r - f0).abs() < 1e-12));
    let v0 = rep.vertex_residuals[0];
    assert!(rep.vertex_residuals.iter().all(|r| (r - v0).abs() < 1e-12));
}

#[test]
fn conformal_flatness_is_reported_verbatim() {
    let em = lattice(4, true);
    let rep = massive_flatness(&em.map, &massive_ratios(&em.map, 1.0), 1.0, 1e-9).unwrap();
    for r in rep.face_residuals.iter().chain(&rep.vertex_residuals) {
        assert!((r - PI / 2.0).abs() < 1e-12);
    }
    assert!(!rep.flat);
}
