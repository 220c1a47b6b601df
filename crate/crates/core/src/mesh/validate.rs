use serde::Serialize;

use super::{CellComplex, DoubleMap, Part};
use crate::Real;

/// Topological summary of a decomposition. Validation never fails; problems
/// are collected in `violations`.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct TopologyReport {
    pub n_vertices: usize,
    pub n_edges: usize,
    pub n_faces: usize,
    pub euler_characteristic: i64,
    pub components: usize,
    pub boundary_components: usize,
    /// `(2 − χ − b) / 2` per component, when that is an integer.
    pub genus: Option<i64>,
    /// Half the rank of the first homology from the cycle space of `Γ`,
    /// for closed surfaces.
    pub genus_from_cycles: Option<i64>,
    pub manifold: bool,
    pub oriented: bool,
    /// Only filled when the double could be built.
    pub diamond_bipartite: Option<bool>,
    pub violations: Vec<String>,
}

impl TopologyReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_cells(g: &CellComplex) -> TopologyReport {
    let violations = g.violations();
    let oriented = !violations.iter().any(|v| v.contains("same orientation"));
    let manifold = violations.iter().all(|v| v.contains("same orientation"));
    let chi = g.euler_characteristic();
    let (components, boundary_components, rank2) = if manifold {
        (g.components(), g.boundary_components(), Some(g.face_boundary_rank_mod2()))
    } else {
        (0, 0, None)
    };
    let genus = if manifold && components == 1 {
        let twice = 2 - chi - boundary_components as i64;
        (twice >= 0 && twice % 2 == 0).then_some(twice / 2)
    } else {
        None
    };
    let genus_from_cycles = match rank2 {
        Some(r) if boundary_components == 0 && components == 1 => {
            let h1 = g.n_edges() as i64 - g.n_vertices as i64 + components as i64 - r as i64;
            (h1 % 2 == 0).then_some(h1 / 2)
        }
        _ => None,
    };
    let mut violations = violations;
    if let (Some(a), Some(b)) = (genus, genus_from_cycles) {
        if a != b {
            violations.push(format!("genus {a} from χ disagrees with {b} from cycles"));
        }
    }
    TopologyReport {
        n_vertices: g.n_vertices,
        n_edges: g.n_edges(),
        n_faces: g.n_faces(),
        euler_characteristic: chi,
        components,
        boundary_components,
        genus,
        genus_from_cycles,
        manifold,
        oriented,
        diamond_bipartite: None,
        violations,
    }
}

/// Validates `Γ` and checks the incidence structure of the double.
pub fn validate<T: Real>(lam: &DoubleMap<T>) -> TopologyReport {
    let mut r = validate_cells(lam.primal());
    let dia = lam.diamond();
    let bipartite = dia
        .complex
        .edges
        .iter()
        .all(|&[a, b]| lam.vertex_part(a) == Part::Primal && lam.vertex_part(b) == Part::Dual);
    r.diamond_bipartite = Some(bipartite);
    if !bipartite {
        r.violations.push("diamond has an odd cycle".into());
    }
    for v in lam.dual().violations() {
        r.violations.push(format!("dual: {v}"));
    }
    for v in dia.complex.violations() {
        r.violations.push(format!("diamond: {v}"));
    }
    r
}
