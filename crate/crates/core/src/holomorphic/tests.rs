use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::critical::{square, EmbeddedMap};
use crate::forms::{d, laplacian};
use crate::harmonic::{boundary_vertices, solve_dirichlet};
use crate::mesh::{build_double, grid, grid_disc, GridEdge, Part};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_disc(n: usize, rng: &mut ChaCha8Rng) -> DoubleMap<f64> {
    let g = grid_disc(n, n);
    let rho: Vec<f64> = (0..g.n_edges()).map(|_| rng.random_range(0.3..3.0)).collect();
    build_double(&g, &rho).unwrap()
}

fn random_torus(n: usize, rng: &mut ChaCha8Rng) -> (DoubleMap<f64>, crate::mesh::Grid) {
    let g = grid(n, n, true, false);
    let rho: Vec<f64> = (0..g.complex.n_edges()).map(|_| rng.random_range(0.3..3.0)).collect();
    (build_double(&g.complex, &rho).unwrap(), g)
}

fn edge_index(g: &crate::mesh::Grid, k: GridEdge, i: usize, j: usize) -> usize {
    g.edge_kind.iter().position(|&e| e == (k, i, j)).unwrap()
}

fn random_function(lam: &DoubleMap<f64>, rng: &mut ChaCha8Rng) -> Cochain<f64> {
    Cochain::function((0..lam.n_vertices()).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
}

fn square_lattice(n: usize) -> EmbeddedMap<f64> {
    square::<f64>(PI / 2.0, n, n, false, 1.0).unwrap()
}

/// Primal vertex closest to the centroid of the embedding.
fn central_vertex(em: &EmbeddedMap<f64>) -> usize {
    let np = em.map.n_primal_vertices();
    let centre: Complex64 = em.embedding.positions[..np].iter().sum::<Complex64>() / np as f64;
    (0..np).min_by(|&a, &b| {
        (em.embedding.positions[a] - centre).norm().total_cmp(&(em.embedding.positions[b] - centre).norm())
    })
    .unwrap()
}

// ---------------------------------------------------------------- CR checks

#[test]
fn constants_and_coordinate_are_holomorphic() {
    let em = square_lattice(5);
    let k = Cochain::function(vec![c(2.0, -1.0); em.map.n_vertices()]);
    assert_eq!(check_holomorphic(&em.map, &k).unwrap().max_residual, 0.0);
    let z = em.embedding.z();
    assert!(check_holomorphic(&em.map, &z).unwrap().holomorphic(1e-12));
    let rep = check_holomorphic(&em.map, &z.conj()).unwrap();
    assert!(rep.max_residual > 0.5);
    assert!(rep.worst_quad.is_some());
}

#[test]
fn coordinate_is_holomorphic_on_rhombic_lattices() {
    for alpha in [PI / 3.0, 0.9, 2.2] {
        let em = square::<f64>(alpha, 4, 5, false, 0.7).unwrap();
        assert!(check_holomorphic(&em.map, &em.embedding.z()).unwrap().holomorphic(1e-12));
    }
}

#[test]
fn holomorphic_functions_are_harmonic() {
    let em = square_lattice(6);
    let powers = z_powers(&em.map, &em.embedding, 4, central_vertex(&em), PowerNormalization::Paper).unwrap();
    for f in &powers {
        assert!(check_holomorphic(&em.map, f).unwrap().holomorphic(1e-10));
        let lap = laplacian(&em.map, f).unwrap();
        for v in 0..em.map.n_vertices() {
            if em.map.is_interior(v) {
                assert!(lap.values[v].norm() < 1e-9, "Δf = {} at {v}", lap.values[v]);
            }
        }
    }
}

#[test]
fn cr_check_rejects_forms() {
    let em = square_lattice(3);
    let a = Cochain::zeros(&em.map, 1, Carrier::Lambda);
    assert!(check_holomorphic(&em.map, &a).is_err());
}

// ----------------------------------------------------------------- residues

#[test]
fn exact_forms_have_no_residues() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (lam, _) = random_torus(4, &mut rng);
    let a = d(&lam, &random_function(&lam, &mut rng)).unwrap();
    for v in 0..lam.n_vertices() {
        assert!(residue(&lam, &a, v).unwrap().norm() < 1e-14);
    }
}

#[test]
fn residues_are_linear_and_sum_to_zero_on_closed_surfaces() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (lam, _) = random_torus(4, &mut rng);
    let vals = |rng: &mut ChaCha8Rng| {
        Cochain::lambda(1, (0..lam.n_edges()).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
    };
    let (a, b) = (vals(&mut rng), vals(&mut rng));
    let s = c(0.3, -2.0);
    let mut total = c(0.0, 0.0);
    for v in 0..lam.n_vertices() {
        let lhs = residue(&lam, &(&a + &b.scale(s)), v).unwrap();
        let rhs = residue(&lam, &a, v).unwrap() + s * residue(&lam, &b, v).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
        total += residue(&lam, &a, v).unwrap();
    }
    assert!(total.norm() < 1e-12);
}

#[test]
fn residue_needs_an_interior_vertex() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let lam = random_disc(4, &mut rng);
    let a = Cochain::zeros(&lam, 1, Carrier::Lambda);
    assert!(residue(&lam, &a, 0).is_err());
    assert!(residue(&lam, &Cochain::zeros(&lam, 0, Carrier::Lambda), 5).is_err());
}

// -------------------------------------------------------- meromorphic forms

#[test]
fn single_pole_on_a_disc() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let n = 6;
    let lam = random_disc(n, &mut rng);
    let x = 3 + n * 3;
    let cut: Vec<usize> = (0..=3).rev().map(|i| i + n * 3).collect();
    let mf = meromorphic_form(&lam, Poles::Single(x), &cut, HolonomyKind::Imaginary).unwrap();
    assert!((mf.residues[0].1 - c(1.0, 0.0)).norm() <= 1e-10);
    let rep = check_holomorphic_form(&lam, &mf.form, &[x]).unwrap();
    assert!(rep.type_residual <= 1e-12, "type residual {}", rep.type_residual);
    assert!(rep.closed_residual <= 1e-10, "closed residual {}", rep.closed_residual);
    assert!(mf.probes.is_empty());
    let real = meromorphic_form(&lam, Poles::Single(x), &cut, HolonomyKind::Real).unwrap();
    assert!(real.form.max_diff(&mf.form) < 1e-14);
    // Every other interior vertex is regular.
    for v in 0..lam.n_vertices() {
        if v != x && lam.is_interior(v) {
            assert!(residue(&lam, &mf.form, v).unwrap().norm() < 1e-10);
        }
    }
}

#[test]
fn meromorphic_inputs_are_validated() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 5;
    let lam = random_disc(n, &mut rng);
    let x = 2 + n * 2;
    assert!(meromorphic_form(&lam, Poles::Single(x), &[x, x + 1], HolonomyKind::Imaginary).is_err());
    assert!(meromorphic_form(&lam, Poles::Single(x), &[x + 1, x + 2, x + 3], HolonomyKind::Imaginary).is_err());
    assert!(meromorphic_form(&lam, Poles::Single(x), &[x, x + 2, x + 4], HolonomyKind::Imaginary).is_err());
    assert!(meromorphic_form(&lam, Poles::Single(0), &[0], HolonomyKind::Imaginary).is_err());
}

#[test]
fn pole_pair_on_a_torus() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let (lam, g) = random_torus(5, &mut rng);
    let (x, xp) = (g.vertex(0, 0), g.vertex(2, 0));
    let cut = [x, g.vertex(1, 0), xp];
    for kind in [HolonomyKind::Imaginary, HolonomyKind::Real] {
        let mf = meromorphic_form(&lam, Poles::Pair(x, xp), &cut, kind).unwrap();
        assert!((mf.residues[0].1 - c(1.0, 0.0)).norm() <= 1e-10);
        assert!((mf.residues[1].1 + c(1.0, 0.0)).norm() <= 1e-10);
        assert_eq!(mf.probes.len(), 4);
        assert!(mf.holonomy_defect <= 1e-9, "{kind:?} defect {}", mf.holonomy_defect);
        let rep = check_holomorphic_form(&lam, &mf.form, &[x, xp]).unwrap();
        assert!(rep.type_residual <= 1e-10 && rep.closed_residual <= 1e-10);
        let rev: Vec<usize> = cut.iter().rev().copied().collect();
        let back = meromorphic_form(&lam, Poles::Pair(xp, x), &rev, kind).unwrap();
        assert!(back.form.max_diff(&mf.form.scale(c(-1.0, 0.0))) < 1e-9);
    }
    assert!(meromorphic_form(&lam, Poles::Single(x), &cut, HolonomyKind::Imaginary).is_err());
}

#[test]
fn homology_loops_close_up() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (lam, _) = random_torus(4, &mut rng);
    for half in [Part::Primal, Part::Dual] {
        let loops = homology_loops(&lam, half, &[]).unwrap();
        assert_eq!(loops.len(), 4);
        for l in &loops {
            for k in 0..l.len() {
                assert_eq!(lam.dart_head(l[k]), lam.dart_tail(l[(k + 1) % l.len()]));
            }
        }
    }
}

#[test]
fn phi_ab_on_a_torus() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let n = 4;
    let (lam, g) = random_torus(n, &mut rng);
    let m = lam.m();
    let a: Vec<Dart> = (0..n).map(|i| Dart::fwd(edge_index(&g, GridEdge::E1, i, 0))).collect();
    let b: Vec<Dart> = (0..n).map(|j| Dart::fwd(m + edge_index(&g, GridEdge::E1, 0, j))).collect();
    let phi = phi_ab(&lam, &a, &b).unwrap();
    assert!((phi.re_b - 1.0).abs() <= 1e-9);
    assert!(phi.probe_defect <= 1e-9);
    let rep = check_holomorphic_form(&lam, &phi.form, &[]).unwrap();
    assert!(rep.type_residual <= 1e-10 && rep.closed_residual <= 1e-10);
    assert!(phi_ab(&lam, &a, &a).is_err());
}

// ------------------------------------------------------------- Cauchy kernel

/// A `◇` edge at the central primal vertex.
fn central_edge(lam: &DoubleMap<f64>, x: usize) -> usize {
    lam.diamond().complex.edges.iter().position(|e| e[0] == x).unwrap()
}

#[test]
fn cauchy_kernel_on_a_square_patch() {
    let em = square_lattice(7);
    let lam = &em.map;
    let region: Vec<usize> = (0..lam.m()).collect();
    let k = cauchy_kernel(lam, &region, central_edge(lam, central_vertex(&em))).unwrap();
    assert!(k.average_residual <= 1e-9 && k.closed_residual <= 1e-9);
    assert!((k.boundary_holonomy - c(0.0, 2.0 * PI)).norm() <= 1e-9, "∮ν = {}", k.boundary_holonomy);
    let powers = z_powers(lam, &em.embedding, 2, k.x, PowerNormalization::Paper).unwrap();
    for f in &powers {
        let ci = cauchy_integral(lam, &k, f).unwrap();
        assert!(ci.area.norm() <= 1e-9);
        assert!((ci.reproduced_average() - ci.edge_average).norm() <= 1e-9);
    }
}

#[test]
fn cauchy_formula_holds_for_arbitrary_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let n = 6;
    let lam = random_disc(n, &mut rng);
    let region: Vec<usize> = (0..lam.m()).collect();
    let k = cauchy_kernel(&lam, &region, central_edge(&lam, 3 + 3 * n)).unwrap();
    assert!((k.boundary_holonomy - c(0.0, 2.0 * PI)).norm() <= 1e-9);
    for _ in 0..20 {
        let f = random_function(&lam, &mut rng);
        let ci = cauchy_integral(&lam, &k, &f).unwrap();
        assert!(ci.residual.norm() <= 1e-9, "residual {}", ci.residual);
    }
}

#[test]
fn cauchy_kernel_rejects_bad_regions() {
    let em = square_lattice(5);
    let lam = &em.map;
    let x = central_vertex(&em);
    let e = central_edge(lam, x);
    let all: Vec<usize> = (0..lam.m()).collect();
    let holed: Vec<usize> = all.iter().copied().filter(|&q| !lam.diamond().corners[q].contains(&x)).collect();
    assert!(cauchy_kernel(lam, &holed, e).is_err());
    assert!(cauchy_kernel(lam, &[], e).is_err());
    assert!(cauchy_kernel(lam, &all, lam.diamond().n_edges()).is_err());
}

// ---------------------------------------------------------------- calculus

#[test]
fn dagger_is_an_antilinear_involution() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let lam = random_disc(4, &mut rng);
    let f = random_function(&lam, &mut rng);
    let g = random_function(&lam, &mut rng);
    assert!(dagger(&lam, &dagger(&lam, &f)).max_diff(&f) == 0.0);
    let s = c(0.5, 1.5);
    let lhs = dagger(&lam, &(&f + &g.scale(s)));
    let rhs = &dagger(&lam, &f) + &dagger(&lam, &g).scale(s.conj());
    assert!(lhs.max_diff(&rhs) < 1e-15);
}

#[test]
fn derivative_of_the_coordinate_is_one_modulo_epsilon() {
    let em = square::<f64>(PI / 3.0, 5, 5, false, 1.0).unwrap();
    let lam = &em.map;
    let z0 = central_vertex(&em);
    let dz = derivative(lam, &em.embedding, &em.embedding.z(), z0).unwrap();
    assert!(dz.values[z0].norm() < 1e-12);
    let k = (dz.values[z0] - 1.0) * lam.epsilon(z0) as f64;
    for v in 0..lam.n_vertices() {
        assert!(((dz.values[v] - 1.0) * lam.epsilon(v) as f64 - k).norm() < 1e-12);
    }
}

#[test]
fn derivative_integrates_back_along_diamond_edges() {
    let em = square::<f64>(1.1, 5, 4, false, 1.0).unwrap();
    let lam = &em.map;
    let z0 = central_vertex(&em);
    let powers = z_powers(lam, &em.embedding, 3, z0, PowerNormalization::Paper).unwrap();
    let dz = em.embedding.diamond_vectors(lam);
    for f in &powers[1..] {
        let fp = derivative(lam, &em.embedding, f, z0).unwrap();
        for (s, &[a, b]) in lam.diamond().complex.edges.iter().enumerate() {
            let lhs = (fp.values[a] + fp.values[b]) * 0.5 * dz[s];
            assert!((lhs - (f.values[b] - f.values[a])).norm() < 1e-10);
        }
    }
}

#[test]
fn low_powers_are_explicit() {
    let em = square_lattice(4);
    let lam = &em.map;
    let z0 = central_vertex(&em);
    let p = z_powers(lam, &em.embedding, 1, z0, PowerNormalization::Paper).unwrap();
    assert!(p[0].values.iter().all(|&v| v == c(1.0, 0.0)));
    let z = em.embedding.z();
    for v in 0..lam.n_vertices() {
        assert!((p[1].values[v] - (z.values[v] - z.values[z0])).norm() < 1e-12);
    }
    let q = z_powers(lam, &em.embedding, 3, z0, PowerNormalization::Continuum).unwrap();
    let p3 = z_powers(lam, &em.embedding, 3, z0, PowerNormalization::Paper).unwrap();
    assert!(q[3].max_diff(&p3[3].scale(c(36.0, 0.0))) < 1e-10);
}

#[test]
fn calculus_needs_a_critical_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let em = square_lattice(4);
    let lam = em.map.with_rho((0..em.map.m()).map(|_| rng.random_range(0.5..2.0)).collect()).unwrap();
    assert!(z_powers(&lam, &em.embedding, 2, 0, PowerNormalization::Paper).is_err());
}

#[test]
fn single_quad_powers_have_degree_at_most_four() {
    let em = square_lattice(5);
    let lam = &em.map;
    let powers = z_powers(lam, &em.embedding, 6, central_vertex(&em), PowerNormalization::Paper).unwrap();
    let corners = lam.diamond().corners[0].to_vec();
    let mp = minimal_polynomial(&powers, &corners);
    let deg = mp.degree.unwrap();
    assert!(deg <= 4);
    let p = evaluate(&powers, &mp.coefficients);
    for &v in &corners {
        assert!(p.values[v].norm() <= 1e-8 * (1.0 + powers[deg].values[v].norm()));
    }
}

#[test]
fn minimal_degree_grows_with_the_vertex_set() {
    let em = square_lattice(6);
    let lam = &em.map;
    let z0 = central_vertex(&em);
    let powers = z_powers(lam, &em.embedding, 10, z0, PowerNormalization::Paper).unwrap();
    let centre = em.embedding.positions[z0];
    let mut last = 0;
    for r in [0.8, 1.5, 2.2] {
        let set: Vec<usize> =
            (0..lam.n_vertices()).filter(|&v| (em.embedding.positions[v] - centre).norm() <= r).collect();
        let deg = minimal_polynomial(&powers, &set).degree.unwrap_or(powers.len());
        assert!(deg >= last);
        last = deg;
    }
    assert!(last > 1);
}

#[test]
fn powers_converge_to_monomials() {
    let base = square_lattice(4);
    let z0 = central_vertex(&base);
    let z2 = z_power_convergence(&base, 2, 3, z0, false).unwrap();
    assert!(z2.converges(0.5, 1e-9), "{z2:?}");
    let z3 = z_power_convergence(&base, 3, 3, z0, false).unwrap();
    assert!(z3.converges(0.5, 1e-9), "{z3:?}");
    assert!(z3.ratios.iter().all(|r| (r - 0.25).abs() < 0.1), "{z3:?}");
    let control = z_power_convergence(&base, 2, 3, z0, true).unwrap();
    assert!(!control.converges(0.5, 1e-9), "{control:?}");
}

#[test]
fn derivative_rejects_non_holomorphic_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let em = square_lattice(5);
    let lam = &em.map;
    let fixed: Vec<_> = boundary_vertices(lam).into_iter().map(|v| (v, c(rng.random_range(-1.0..1.0), 0.0))).collect();
    let h = solve_dirichlet(lam, &fixed, None).unwrap().0;
    assert!(!check_holomorphic(lam, &h).unwrap().holomorphic(1e-6));
    assert!(derivative(lam, &em.embedding, &h, central_vertex(&em)).is_err());
}
