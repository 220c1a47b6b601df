use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::{holonomy, residue};
use crate::error::{invalid, precondition, Error, Result};
use crate::forms::{self, Cochain};
use crate::harmonic::{holomorphic_basis, solve_dirichlet, solve_poisson};
use crate::mesh::{Dart, DoubleMap, Part, Topology, TreeCotree};
use crate::real::from_c64;
use crate::{Real, C};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Poles {
    /// One pole of residue `+1`, on a surface with boundary.
    Single(usize),
    /// Residue `+1` at the first vertex and `−1` at the second.
    Pair(usize, usize),
}

/// Which part of the holonomies vanishes along loops that do not cross the
/// cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HolonomyKind {
    Imaginary,
    Real,
}

#[derive(Clone, Debug)]
pub struct MeromorphicForm<T> {
    pub form: Cochain<T>,
    /// Residue at each pole.
    pub residues: Vec<(usize, Complex64)>,
    /// The cut as `Λ` darts from the first pole.
    pub cut: Vec<Dart>,
    pub kind: HolonomyKind,
    /// Largest `|Re ∮|/(1 + |Im ∮|)` (imaginary kind) or
    /// `|Im ∮|/(1 + |Re ∮|)` (real kind) over the probe loops.
    pub holonomy_defect: f64,
    /// Probe loops: a homology basis avoiding the duals of the cut (empty
    /// on a disc).
    pub probes: Vec<Vec<Dart>>,
}

/// Darts joining consecutive vertices of a simple `Λ` path.
fn path_darts<T: Real>(lam: &DoubleMap<T>, path: &[usize]) -> Result<Vec<Dart>> {
    let mut seen = std::collections::HashSet::new();
    for &v in path {
        if v >= lam.n_vertices() {
            return invalid(format!("vertex {v} does not exist"));
        }
        if !seen.insert(v) {
            return invalid(format!("the cut is not simple: vertex {v} repeats"));
        }
    }
    let darts = lam.vertex_darts();
    path.windows(2)
        .map(|w| {
            darts[w[0]]
                .iter()
                .copied()
                .find(|&d| lam.dart_head(d) == w[1])
                .ok_or_else(|| Error::InvalidInput(format!("vertices {} and {} are not adjacent", w[0], w[1])))
        })
        .collect()
}

/// A homology basis of a closed `Λ` as `Λ` dart loops: tree loops of the
/// half `half` (with the edges `forced` in its tree), then loops of the
/// other half through the cotree. None of them crosses a forced edge.
pub fn homology_loops<T: Real>(lam: &DoubleMap<T>, half: Part, forced: &[usize]) -> Result<Vec<Vec<Dart>>> {
    let m = lam.m();
    let (cx, offset) = match half {
        Part::Primal => (lam.primal(), 0),
        Part::Dual => (lam.dual(), m),
    };
    let local: Vec<usize> = forced
        .iter()
        .map(|&e| {
            if lam.edge_part(e) != half {
                return invalid(format!("edge {e} is not in the cut half"));
            }
            Ok(e - offset)
        })
        .collect::<Result<_>>()?;
    let tc = TreeCotree::new(cx, &local)?;
    let mut loops = Vec::new();
    for &e in &tc.generators {
        loops.push(tc.tree_loop(cx, e).into_iter().map(|d| Dart::new(d.edge + offset, d.forward)).collect());
    }
    for &e in &tc.generators {
        let crossing = tc.cotree_loop(cx, e);
        loops.push(
            crossing
                .into_iter()
                .map(|d| match half {
                    Part::Primal => Dart::new(d.edge + m, d.forward),
                    Part::Dual => Dart::new(d.edge, !d.forward),
                })
                .collect(),
        );
    }
    Ok(loops)
}

fn defect(h: Complex64, kind: HolonomyKind) -> f64 {
    match kind {
        HolonomyKind::Imaginary => h.re.abs() / (1.0 + h.im.abs()),
        HolonomyKind::Real => h.im.abs() / (1.0 + h.re.abs()),
    }
}

/// Real coefficients `(a_j, b_j)` of `Σ (a_j + i b_j) h_j` solving
/// `Re/Im Σ … H_j(γ_i) = rhs_i`, with `imag[i]` selecting the imaginary
/// part. Fails unless the system has a unique solution.
fn solve_holonomies(hol: &[Vec<Complex64>], imag: &[bool], rhs: &[f64]) -> Result<Vec<Complex64>> {
    let n = hol.first().map_or(0, Vec::len);
    let rows = hol.len();
    let mut a = DMatrix::<f64>::zeros(rows, 2 * n);
    for (i, h) in hol.iter().enumerate() {
        for (j, z) in h.iter().enumerate() {
            // Re(c z) = a Re z − b Im z; Im(c z) = a Im z + b Re z.
            let (p, q) = if imag[i] { (z.im, z.re) } else { (z.re, -z.im) };
            a[(i, 2 * j)] = p;
            a[(i, 2 * j + 1)] = q;
        }
    }
    if 2 * n != rows {
        return Err(Error::Numerical(format!("{rows} holonomy conditions for {} unknowns", 2 * n)));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let svd = a.clone().svd(true, true);
    let (lo, hi) = svd.singular_values.iter().fold((f64::MAX, 0.0f64), |(l, h), &s| (l.min(s), h.max(s)));
    if lo <= 1e-9 * hi {
        return Err(Error::Numerical("holonomy conditions are degenerate".into()));
    }
    let x = svd
        .solve(&DVector::from_column_slice(rhs), 0.0)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    Ok((0..n).map(|j| Complex64::new(x[2 * j], x[2 * j + 1])).collect())
}

/// Builds `(Id + i*) df` for a Green function `f` with poles at the given
/// vertices, normalized to residue `+1` at the first pole, then corrected by
/// a holomorphic form when real holonomies are requested.
pub fn meromorphic_form<T: Real>(
    lam: &DoubleMap<T>,
    poles: Poles,
    cut: &[usize],
    kind: HolonomyKind,
) -> Result<MeromorphicForm<T>> {
    let (x, xp) = match poles {
        Poles::Single(x) => (x, None),
        Poles::Pair(x, xp) => (x, Some(xp)),
    };
    for p in std::iter::once(x).chain(xp) {
        if p >= lam.n_vertices() {
            return invalid(format!("vertex {p} does not exist"));
        }
        if !lam.is_interior(p) {
            return precondition(format!("pole {p} lies on the boundary"));
        }
    }
    if cut.first() != Some(&x) {
        return invalid("the cut must start at the first pole");
    }
    match xp {
        None if lam.is_interior(*cut.last().unwrap()) => return invalid("the cut must end on the boundary"),
        Some(xp) if xp == x => return invalid("the two poles coincide"),
        Some(xp) if cut.last() != Some(&xp) => return invalid("the cut must end at the second pole"),
        _ => {}
    }
    let cut_darts = path_darts(lam, cut)?;
    let closed = lam.topology() != Topology::Planar;
    let mut source = Cochain::zeros(lam, 0, forms::Carrier::Lambda);
    source.values[x] = T::c(1.0, 0.0);
    if let Some(xp) = xp {
        source.values[xp] = T::c(-1.0, 0.0);
    }
    let f = if closed {
        if xp.is_none() {
            return precondition("a single pole needs a surface with boundary");
        }
        if lam.vertex_part(x) != lam.vertex_part(xp.unwrap()) {
            return precondition("on a closed surface both poles lie in the same half of Λ");
        }
        solve_poisson(lam, &source)?.0
    } else {
        let fixed: Vec<(usize, C<T>)> =
            (0..lam.n_vertices()).filter(|&v| !lam.is_interior(v)).map(|v| (v, T::zero_c())).collect();
        solve_dirichlet(lam, &fixed, Some(&source))?.0
    };
    let df = forms::d(lam, &f)?;
    let mut form = &df + &forms::star(lam, &df)?.scale(T::i_c());
    let r = residue(lam, &form, x)?;
    form = form.scale(from_c64(Complex64::new(1.0, 0.0) / r));

    let probes = if closed {
        let forced: Vec<usize> = cut_darts.iter().map(|d| d.edge).collect();
        homology_loops(lam, lam.vertex_part(x), &forced)?
    } else {
        if kind == HolonomyKind::Real && (lam.primal().euler_characteristic() != 1 || lam.primal().boundary_components() != 1)
        {
            return precondition("real holonomies are constructed on discs and closed surfaces");
        }
        Vec::new()
    };
    if kind == HolonomyKind::Real && !probes.is_empty() {
        let basis = holomorphic_basis(lam)?.forms;
        let hol: Vec<Vec<Complex64>> =
            probes.iter().map(|l| basis.iter().map(|h| holonomy(h, l)).collect()).collect();
        let rhs: Vec<f64> = probes.iter().map(|l| -holonomy(&form, l).im).collect();
        let c = solve_holonomies(&hol, &vec![true; probes.len()], &rhs)?;
        for (cj, h) in c.iter().zip(&basis) {
            form = &form + &h.scale(from_c64(*cj));
        }
    }
    let holonomy_defect = probes.iter().map(|l| defect(holonomy(&form, l), kind)).fold(0.0, f64::max);
    let mut residues = vec![(x, residue(lam, &form, x)?)];
    if let Some(xp) = xp {
        residues.push((xp, residue(lam, &form, xp)?));
    }
    Ok(MeromorphicForm { form, residues, cut: cut_darts, kind, holonomy_defect, probes })
}

/// The holomorphic form with `Re ∮_B Φ = 1` and imaginary holonomy along
/// every loop that does not cross `A`.
#[derive(Clone, Debug)]
pub struct PhiAb<T> {
    pub form: Cochain<T>,
    pub re_b: f64,
    /// Largest `|Re ∮ Φ|` over the probe loops.
    pub probe_defect: f64,
    pub probes: Vec<Vec<Dart>>,
}

/// Checks that `darts` is a simple loop in one half of `Λ`.
fn loop_half<T: Real>(lam: &DoubleMap<T>, darts: &[Dart], name: &str) -> Result<Part> {
    let Some(first) = darts.first() else {
        return invalid(format!("loop {name} is empty"));
    };
    let half = lam.edge_part(first.edge);
    let mut seen = std::collections::HashSet::new();
    for (k, &d) in darts.iter().enumerate() {
        if d.edge >= lam.n_edges() || lam.edge_part(d.edge) != half {
            return invalid(format!("loop {name} leaves its half of Λ"));
        }
        if lam.dart_head(d) != lam.dart_tail(darts[(k + 1) % darts.len()]) {
            return invalid(format!("loop {name} is not closed at step {k}"));
        }
        if !seen.insert(lam.dart_tail(d)) {
            return invalid(format!("loop {name} is not simple"));
        }
    }
    Ok(half)
}

/// Solves for the holomorphic form `Φ_AB` of a pair of dual loops, `A` and
/// `B` lying in opposite halves and crossing once.
pub fn phi_ab<T: Real>(lam: &DoubleMap<T>, a: &[Dart], b: &[Dart]) -> Result<PhiAb<T>> {
    let ha = loop_half(lam, a, "A")?;
    let hb = loop_half(lam, b, "B")?;
    if ha == hb {
        return precondition("A and B must lie in opposite halves of Λ");
    }
    let crossing: Vec<usize> =
        a.iter().map(|d| d.edge).filter(|&e| b.iter().any(|d| d.edge == lam.dual_edge(e).0)).collect();
    if crossing.len() != 1 {
        return precondition(format!("A and B share {} dual edge pairs instead of one", crossing.len()));
    }
    let ea = crossing[0];
    let ea_dual = lam.dual_edge(ea).0;
    let forced: Vec<usize> = a.iter().map(|d| d.edge).filter(|&e| e != ea).collect();
    let loops = homology_loops(lam, ha, &forced)?;
    let count = |l: &[Dart]| -> f64 {
        l.iter().filter(|d| d.edge == ea_dual).map(|d| if d.forward { 1.0 } else { -1.0 }).sum()
    };
    let basis = holomorphic_basis(lam)?.forms;
    let hol = |l: &[Dart]| -> Vec<Complex64> { basis.iter().map(|h| holonomy(h, l)).collect() };
    // Probe chains: loops with zero intersection with A, obtained by
    // cancelling the crossing count against a pivot loop.
    let pivot = loops.iter().position(|l| count(l) != 0.0);
    let mut rows = Vec::new();
    let mut probes = Vec::new();
    for (k, l) in loops.iter().enumerate() {
        let n = count(l);
        if n == 0.0 {
            rows.push(hol(l));
            probes.push(l.clone());
        } else if Some(k) != pivot {
            let p = pivot.unwrap();
            let s = n / count(&loops[p]);
            let hp = hol(&loops[p]);
            rows.push(hol(l).iter().zip(&hp).map(|(x, y)| x - y * s).collect());
        }
    }
    rows.push(hol(b));
    let mut rhs = vec![0.0; rows.len()];
    *rhs.last_mut().unwrap() = 1.0;
    let c = solve_holonomies(&rows, &vec![false; rows.len()], &rhs)?;
    let mut form = Cochain::zeros(lam, 1, forms::Carrier::Lambda);
    for (cj, h) in c.iter().zip(&basis) {
        form = &form + &h.scale(from_c64(*cj));
    }
    let re_b = holonomy(&form, b).re;
    let probe_defect = probes.iter().map(|l| holonomy(&form, l).re.abs()).fold(0.0, f64::max);
    Ok(PhiAb { form, re_b, probe_defect, probes })
}
