//! JSON interchange for maps, embeddings, cochains and spinors.
//!
//! A mesh document lists the primal vertices (with optional positions), the
//! primal edges with their ratio `ρ`, the faces as cycles of signed edge
//! references and the topology tag. Torus documents carry the two period
//! vectors of the fundamental domain. The dual is rebuilt from `Γ` unless the
//! document spells it out, which it does whenever the stored map uses a dual
//! numbering other than the one [`build_dual`] produces.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::critical::PlanarEmbedding;
use crate::dirac::Spinor;
use crate::error::{Error, Result};
use crate::forms::{cell_count, Carrier, Cochain};
use crate::mesh::{build_double, build_dual, CellComplex, Dart, DoubleMap, Topology};
use crate::{Real, C};

/// Version written into every document.
pub const FORMAT_VERSION: u32 = 1;

fn schema<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Schema(msg.into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
    #[serde(default)]
    pub rho: Option<f64>,
    /// `[ℓ(e), ℓ(e*)]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<[f64; 2]>,
}

/// A face as a cycle of `[edge id, ±1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceRecord {
    pub id: usize,
    pub edges: Vec<(usize, i8)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualRecord {
    pub n_vertices: usize,
    pub edges: Vec<[usize; 2]>,
    pub faces: Vec<Vec<(usize, i8)>>,
    /// Dual vertex at the center of each primal face.
    pub face_vertex: Vec<usize>,
    /// Primal vertex at the center of each dual face.
    pub dual_face_vertex: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingRecord {
    pub dual_positions: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edge_shift: Vec<[i32; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub corner_shift: Vec<[i32; 2]>,
}

/// Cochain as `(cell id, re, im)` triples with its degree and carrier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CochainRecord {
    pub degree: usize,
    pub carrier: Carrier,
    pub values: Vec<(usize, f64, f64)>,
}

/// Sheet-0 values of a spinor on the vertices of `Υ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinorRecord {
    pub values: Vec<(usize, f64, f64)>,
}

/// The raw mesh document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshFile {
    #[serde(default = "default_version")]
    pub version: u32,
    pub topology: Topology,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    pub faces: Vec<FaceRecord>,
    /// Primal edges lying on a single face.
    #[serde(default)]
    pub boundary: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<[[f64; 2]; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<EmbeddingRecord>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub cochains: BTreeMap<String, CochainRecord>,
}

fn default_version() -> u32 {
    FORMAT_VERSION
}

/// A parsed mesh: the double, its embedding when positions are present, the
/// periods of a torus and any attached cochains.
#[derive(Clone, Debug)]
pub struct MeshDocument<T> {
    pub map: DoubleMap<T>,
    pub embedding: Option<PlanarEmbedding<T>>,
    pub periods: Option<[C<T>; 2]>,
    pub cochains: BTreeMap<String, Cochain<T>>,
}

impl<T: Real> MeshDocument<T> {
    pub fn new(map: DoubleMap<T>, embedding: Option<PlanarEmbedding<T>>) -> Self {
        let periods = embedding.as_ref().and_then(|e| e.periods);
        MeshDocument { map, embedding, periods, cochains: BTreeMap::new() }
    }
}

fn point<T: Real>(p: [f64; 2]) -> C<T> {
    T::c(p[0], p[1])
}

fn pair<T: Real>(z: C<T>) -> [f64; 2] {
    [z.re.to_f64_(), z.im.to_f64_()]
}

fn darts_in(cycle: &[(usize, i8)], n_edges: usize, what: &str) -> Result<Vec<Dart>> {
    cycle
        .iter()
        .map(|&(e, s)| {
            if e >= n_edges {
                return schema(format!("{what}: dangling reference to edge {e}"));
            }
            match s {
                1 => Ok(Dart::fwd(e)),
                -1 => Ok(Dart::rev(e)),
                _ => schema(format!("{what}: orientation of edge {e} must be 1 or -1, got {s}")),
            }
        })
        .collect()
}

fn darts_out(cycle: &[Dart]) -> Vec<(usize, i8)> {
    cycle.iter().map(|d| (d.edge, if d.forward { 1 } else { -1 })).collect()
}

fn dense<I: Iterator<Item = usize>>(ids: I, what: &str) -> Result<()> {
    for (k, id) in ids.enumerate() {
        if id != k {
            return schema(format!("{what} record {k} has id {id}; ids must run 0, 1, 2, … in order"));
        }
    }
    Ok(())
}

/// Parses a mesh document. Errors name the offending field and cell.
pub fn parse_mesh<T: Real>(text: &str) -> Result<MeshDocument<T>> {
    let file: MeshFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    mesh_from_file(&file)
}

pub fn mesh_from_file<T: Real>(file: &MeshFile) -> Result<MeshDocument<T>> {
    if file.version != FORMAT_VERSION {
        return schema(format!("unsupported version {}", file.version));
    }
    dense(file.vertices.iter().map(|v| v.id), "vertex")?;
    dense(file.edges.iter().map(|e| e.id), "edge")?;
    dense(file.faces.iter().map(|f| f.id), "face")?;
    let nv = file.vertices.len();
    let m = file.edges.len();
    let mut edges = Vec::with_capacity(m);
    let mut rho = Vec::with_capacity(m);
    let mut lengths = Vec::new();
    for e in &file.edges {
        for v in [e.tail, e.head] {
            if v >= nv {
                return schema(format!("edge {}: dangling reference to vertex {v}", e.id));
            }
        }
        let Some(r) = e.rho else {
            return schema(format!("edge {} is missing \"rho\"", e.id));
        };
        if !(r > 0.0) || !r.is_finite() {
            return schema(format!("edge {}: rho must be positive and finite, got {r}", e.id));
        }
        edges.push([e.tail, e.head]);
        rho.push(T::lit(r));
        if let Some([a, b]) = e.length {
            if !(a > 0.0 && b > 0.0) {
                return schema(format!("edge {}: lengths must be positive", e.id));
            }
            lengths.push([T::lit(a), T::lit(b)]);
        }
    }
    if !lengths.is_empty() && lengths.len() != m {
        return schema("\"length\" must be given on every edge or on none");
    }
    let faces = file
        .faces
        .iter()
        .map(|f| darts_in(&f.edges, m, &format!("face {}", f.id)))
        .collect::<Result<Vec<_>>>()?;
    if file.topology == Topology::Torus && file.periods.is_none() {
        return schema("topology torus requires periods");
    }
    let gamma = CellComplex::new(nv, edges, faces);
    let mut map = match &file.dual {
        None => build_double(&gamma, &rho)?,
        Some(d) => {
            let faces = d
                .faces
                .iter()
                .enumerate()
                .map(|(k, f)| darts_in(f, d.edges.len(), &format!("dual face {k}")))
                .collect::<Result<Vec<_>>>()?;
            let dual = CellComplex::new(d.n_vertices, d.edges.clone(), faces);
            DoubleMap::from_parts(gamma, dual, d.face_vertex.clone(), d.dual_face_vertex.clone(), rho, None)?
        }
    };
    if !lengths.is_empty() {
        map = map.with_lengths(lengths)?;
    }
    if map.topology() != file.topology {
        return schema(format!(
            "declared topology {:?} but the complex is a {:?}",
            file.topology,
            map.topology()
        ));
    }
    if !file.boundary.is_empty() {
        let mut given = file.boundary.clone();
        given.sort_unstable();
        if given != map.boundary_primal_edges() {
            return schema("\"boundary\" does not list the edges lying on a single face");
        }
    }
    let periods = file.periods.map(|p| p.map(point::<T>));
    let with_position = file.vertices.iter().filter(|v| v.position.is_some()).count();
    let embedding = match (&file.embedding, with_position) {
        (None, 0) => None,
        (None, _) => return schema("vertex positions need the \"embedding\" block with the dual positions"),
        (Some(_), k) if k < nv => {
            let v = file.vertices.iter().find(|v| v.position.is_none()).map_or(0, |v| v.id);
            return schema(format!("vertex {v} has no position"));
        }
        (Some(rec), _) => {
            if rec.dual_positions.len() != map.n_dual_vertices() {
                return schema(format!(
                    "{} dual positions for {} dual vertices",
                    rec.dual_positions.len(),
                    map.n_dual_vertices()
                ));
            }
            let positions: Vec<C<T>> = file
                .vertices
                .iter()
                .map(|v| point(v.position.expect("checked")))
                .chain(rec.dual_positions.iter().map(|&p| point(p)))
                .collect();
            let mut emb = PlanarEmbedding::planar(&map, positions)?;
            if periods.is_some() {
                if rec.edge_shift.len() != map.n_edges() || rec.corner_shift.len() != map.m() {
                    return schema("a periodic embedding needs \"edge_shift\" on every Λ edge and \"corner_shift\" on every quad");
                }
                emb.edge_shift = rec.edge_shift.clone();
                emb.corner_shift = rec.corner_shift.clone();
                emb.periods = periods;
            }
            Some(emb)
        }
    };
    let mut cochains = BTreeMap::new();
    for (name, rec) in &file.cochains {
        let c = cochain_from_record(rec, Some(&map)).map_err(|e| Error::Schema(format!("cochain {name:?}: {e}")))?;
        cochains.insert(name.clone(), c);
    }
    Ok(MeshDocument { map, embedding, periods, cochains })
}

/// Builds the document record of a mesh.
pub fn mesh_to_file<T: Real>(doc: &MeshDocument<T>) -> Result<MeshFile> {
    let lam = &doc.map;
    let periods = doc.embedding.as_ref().and_then(|e| e.periods).or(doc.periods);
    if lam.topology() == Topology::Torus && periods.is_none() {
        return schema("topology torus requires periods");
    }
    let primal = lam.primal();
    let pos = |v: usize| doc.embedding.as_ref().map(|e| pair(e.positions[v]));
    let lengths = lam.lengths();
    let vertices = (0..primal.n_vertices).map(|v| VertexRecord { id: v, position: pos(v) }).collect();
    let edges = primal
        .edges
        .iter()
        .enumerate()
        .map(|(e, &[tail, head])| EdgeRecord {
            id: e,
            tail,
            head,
            rho: Some(lam.rho()[e].to_f64_()),
            length: lengths.map(|l| [l[e][0].to_f64_(), l[e][1].to_f64_()]),
        })
        .collect();
    let faces = primal.faces.iter().enumerate().map(|(f, c)| FaceRecord { id: f, edges: darts_out(c) }).collect();
    let rebuilt = build_dual(primal).ok();
    let canonical = rebuilt.is_some_and(|d| {
        &d.dual == lam.dual() && d.face_vertex == lam.face_vertex() && d.dual_face_vertex == lam.dual_face_vertex()
    });
    let dual = (!canonical).then(|| DualRecord {
        n_vertices: lam.dual().n_vertices,
        edges: lam.dual().edges.clone(),
        faces: lam.dual().faces.iter().map(|f| darts_out(f)).collect(),
        face_vertex: lam.face_vertex().to_vec(),
        dual_face_vertex: lam.dual_face_vertex().to_vec(),
    });
    let embedding = doc.embedding.as_ref().map(|e| {
        let periodic = e.periods.is_some();
        EmbeddingRecord {
            dual_positions: e.positions[primal.n_vertices..].iter().map(|&z| pair(z)).collect(),
            edge_shift: if periodic { e.edge_shift.clone() } else { Vec::new() },
            corner_shift: if periodic { e.corner_shift.clone() } else { Vec::new() },
        }
    });
    Ok(MeshFile {
        version: FORMAT_VERSION,
        topology: lam.topology(),
        vertices,
        edges,
        faces,
        boundary: lam.boundary_primal_edges(),
        periods: periods.map(|p| p.map(pair)),
        dual,
        embedding,
        cochains: doc.cochains.iter().map(|(k, c)| (k.clone(), cochain_to_record(c))).collect(),
    })
}

/// Pretty-printed mesh JSON.
pub fn write_mesh<T: Real>(doc: &MeshDocument<T>) -> Result<String> {
    let file = mesh_to_file(doc)?;
    serde_json::to_string_pretty(&file).map_err(|e| Error::Schema(e.to_string()))
}

pub fn cochain_to_record<T: Real>(c: &Cochain<T>) -> CochainRecord {
    CochainRecord {
        degree: c.degree,
        carrier: c.carrier,
        values: c.values.iter().enumerate().map(|(k, z)| (k, z.re.to_f64_(), z.im.to_f64_())).collect(),
    }
}

fn triples<T: Real>(values: &[(usize, f64, f64)], n: Option<usize>, what: &str) -> Result<Vec<C<T>>> {
    let n = n.unwrap_or(values.len());
    let mut out: Vec<Option<C<T>>> = vec![None; n];
    for &(id, re, im) in values {
        if id >= n {
            return schema(format!("{what}: cell {id} does not exist ({n} cells)"));
        }
        if !re.is_finite() || !im.is_finite() {
            return schema(format!("{what}: value on cell {id} is not finite"));
        }
        if out[id].replace(T::c(re, im)).is_some() {
            return schema(format!("{what}: cell {id} is listed twice"));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(k, z)| z.ok_or_else(|| Error::Schema(format!("{what}: no value on cell {k}"))))
        .collect()
}

/// Reads a cochain, checking its cells against `lam` when given.
pub fn cochain_from_record<T: Real>(rec: &CochainRecord, lam: Option<&DoubleMap<T>>) -> Result<Cochain<T>> {
    if rec.degree > 2 {
        return schema(format!("degree {} is not 0, 1 or 2", rec.degree));
    }
    let n = lam.map(|l| cell_count(l, rec.degree, rec.carrier));
    let values = triples(&rec.values, n, "cochain")?;
    Ok(Cochain::new(rec.degree, rec.carrier, values))
}

pub fn parse_cochain<T: Real>(text: &str, lam: Option<&DoubleMap<T>>) -> Result<Cochain<T>> {
    let rec: CochainRecord = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    cochain_from_record(&rec, lam)
}

pub fn write_cochain<T: Real>(c: &Cochain<T>) -> String {
    serde_json::to_string_pretty(&cochain_to_record(c)).expect("cochain records serialize")
}

pub fn spinor_to_record<T: Real>(z: &Spinor<T>) -> SpinorRecord {
    SpinorRecord {
        values: (0..z.n_base())
            .map(|x| {
                let w = z.at(x, false);
                (x, w.re.to_f64_(), w.im.to_f64_())
            })
            .collect(),
    }
}

/// Reads sheet-0 values, optionally checking the number of `Υ` vertices.
pub fn spinor_from_record<T: Real>(rec: &SpinorRecord, n_base: Option<usize>) -> Result<Spinor<T>> {
    Ok(Spinor::from_sheet(&triples(&rec.values, n_base, "spinor")?))
}

pub fn parse_spinor<T: Real>(text: &str, n_base: Option<usize>) -> Result<Spinor<T>> {
    let rec: SpinorRecord = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    spinor_from_record(&rec, n_base)
}

pub fn write_spinor<T: Real>(z: &Spinor<T>) -> String {
    serde_json::to_string_pretty(&spinor_to_record(z)).expect("spinor records serialize")
}
