use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use discra::critical::{self, classify_map, ising_coupling, ising_criticality, EmbeddedMap, Verdict};
use discra::dirac::{self, DiracOutcome, SpinStructure};
use discra::forms::Cochain;
use discra::harmonic;
use discra::holomorphic::{cauchy_integral, cauchy_kernel, z_power_convergence, z_powers, PowerNormalization};
use discra::io::{self, MeshDocument};
use discra::mesh::{self, DoubleMap, Topology, TripleGraph};
use discra::svg::{render_svg, SvgOptions};
use discra::DEFAULT_TOLERANCE;

use crate::Command;

pub const EXIT_INPUT: u8 = 2;

/// Result of a subcommand: the verdict, the JSON body of the report and a
/// one-line summary for stderr.
pub struct Outcome {
    pub pass: bool,
    pub report: Value,
    pub summary: String,
}

#[derive(Args, Debug)]
pub struct MeshArg {
    /// Mesh file (JSON).
    pub mesh: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LatticeArg {
    Square,
    Triangular,
    Hexagonal,
    Period2,
    Voronoi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TopologyArg {
    Planar,
    Torus,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub lattice: LatticeArg,
    /// Square lattice: ratio on horizontal edges (default 1).
    #[arg(long, conflicts_with = "alpha")]
    pub rho: Option<f64>,
    /// Rhombus angle (square) or first triangle angle (triangular, hexagonal).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Second triangle angle (triangular, hexagonal).
    #[arg(long)]
    pub beta: Option<f64>,
    /// The four ratios around a vertex of the period-two lattice.
    #[arg(long, value_delimiter = ',')]
    pub rhos: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    pub nx: usize,
    #[arg(long, default_value_t = 4)]
    pub ny: usize,
    #[arg(long, value_enum, default_value = "planar")]
    pub topology: TopologyArg,
    /// Rhombus side length.
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Number of random sites for the Voronoi map.
    #[arg(long, default_value_t = 30)]
    pub points: usize,
    /// Multiplies ρ of a Λ edge: `EDGE:FACTOR`. Repeatable.
    #[arg(long, value_parser = parse_perturb)]
    pub perturb: Vec<(usize, f64)>,
    #[arg(long, short)]
    pub output: PathBuf,
}

fn parse_perturb(s: &str) -> std::result::Result<(usize, f64), String> {
    let (e, f) = s.split_once(':').ok_or_else(|| format!("expected EDGE:FACTOR, got {s:?}"))?;
    let e = e.trim().parse().map_err(|_| format!("bad edge id {e:?}"))?;
    let f = f.trim().parse().map_err(|_| format!("bad factor {f:?}"))?;
    Ok((e, f))
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RequireArg {
    Critical,
    SemiCritical,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    pub mesh: PathBuf,
    /// Weakest class that passes.
    #[arg(long, value_enum, default_value = "critical")]
    pub require: RequireArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ProblemArg {
    Dirichlet,
    Neumann,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    pub mesh: PathBuf,
    #[arg(long, value_enum)]
    pub problem: ProblemArg,
    /// Boundary data as a cochain file: a function for Dirichlet, a 1-form
    /// for Neumann. Random seeded data when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Writes the solution as a cochain file.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BasisArgs {
    pub mesh: PathBuf,
    /// Harmonic instead of holomorphic forms.
    #[arg(long)]
    pub harmonic: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CauchyArgs {
    pub mesh: PathBuf,
    /// Diamond edge of the kernel; defaults to an edge at the most central
    /// inner primal vertex.
    #[arg(long)]
    pub edge: Option<usize>,
    /// Random functions tested against the integral formula.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
}

#[derive(Args, Debug)]
pub struct IsingArgs {
    pub mesh: PathBuf,
    /// Fails unless the couplings are critical.
    #[arg(long)]
    pub check: bool,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("mode").required(true))]
pub struct DiracArgs {
    pub mesh: PathBuf,
    #[arg(long, group = "mode")]
    pub exists: bool,
    #[arg(long, group = "mode")]
    pub construct: bool,
    /// Residuals of the spinor stored in this file.
    #[arg(long, group = "mode", value_name = "SPINOR")]
    pub residuals: Option<PathBuf>,
    /// With `--construct`, writes the spinor here.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MassiveArgs {
    pub mesh: PathBuf,
    /// Elliptic modulus in (0, 1].
    #[arg(long)]
    pub k: f64,
    /// Uses the ratios of the file instead of deriving them from the angles.
    #[arg(long)]
    pub as_given: bool,
}

#[derive(Args, Debug)]
pub struct RefineArgs {
    pub mesh: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct ConvergeArgs {
    pub mesh: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub power: usize,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Compares with the anti-holomorphic target instead.
    #[arg(long)]
    pub control: bool,
    /// Base vertex `z₀`; defaults to the most central inner primal vertex.
    #[arg(long)]
    pub base: Option<usize>,
    /// Largest accepted error ratio per refinement step.
    #[arg(long, default_value_t = 0.6)]
    pub max_ratio: f64,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    pub mesh: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Overlays the Dirac spinor.
    #[arg(long)]
    pub spinor: bool,
}

pub fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Generate(_) => "generate",
        Command::Validate(_) => "validate",
        Command::Classify(_) => "classify",
        Command::Solve(_) => "solve",
        Command::Basis(_) => "basis",
        Command::Cauchy(_) => "cauchy",
        Command::Ising(_) => "ising",
        Command::Dirac(_) => "dirac",
        Command::Massive(_) => "massive",
        Command::Refine(_) => "refine",
        Command::Converge(_) => "converge",
        Command::Render(_) => "render",
    }
}

/// The `--tolerance` flag, else `DISCRA_TOLERANCE`, else the library default.
pub fn tolerance(flag: Option<f64>) -> Result<f64> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var("DISCRA_TOLERANCE") {
            Ok(s) => s.trim().parse().map_err(|_| anyhow!("DISCRA_TOLERANCE={s:?} is not a number"))?,
            Err(_) => DEFAULT_TOLERANCE,
        },
    };
    if !(tol > 0.0 && tol.is_finite()) {
        bail!("tolerance must be positive and finite, got {tol}");
    }
    Ok(tol)
}

pub fn run(cmd: &Command, tol: f64, seed: u64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match cmd {
        Command::Generate(a) => generate(a, tol, &mut rng),
        Command::Validate(a) => validate(a),
        Command::Classify(a) => classify(a, tol),
        Command::Solve(a) => solve(a, tol, &mut rng),
        Command::Basis(a) => basis(a),
        Command::Cauchy(a) => cauchy(a, tol, &mut rng),
        Command::Ising(a) => ising(a, tol),
        Command::Dirac(a) => dirac_cmd(a, tol),
        Command::Massive(a) => massive(a, tol),
        Command::Refine(a) => refine(a, tol),
        Command::Converge(a) => converge(a, tol),
        Command::Render(a) => render(a, tol),
    }
}

fn load(path: &Path) -> Result<MeshDocument<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    io::parse_mesh(&text).with_context(|| format!("parsing {}", path.display()))
}

fn embedded(doc: MeshDocument<f64>, what: &str) -> Result<EmbeddedMap<f64>> {
    match doc.embedding {
        Some(embedding) => Ok(EmbeddedMap { map: doc.map, embedding }),
        None => bail!("{what} needs vertex positions"),
    }
}

fn save(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Critical => "critical",
        Verdict::SemiCritical => "semi-critical",
        Verdict::None => "none",
    }
}

/// Inner primal vertex closest to the centroid of the primal vertices, or
/// the first inner one without positions.
fn central_vertex(lam: &DoubleMap<f64>, positions: Option<&[Complex64]>) -> Result<usize> {
    let np = lam.n_primal_vertices();
    let inner: Vec<usize> = (0..np).filter(|&v| lam.is_interior(v)).collect();
    let first = *inner.first().ok_or_else(|| anyhow!("the map has no inner primal vertex"))?;
    let Some(p) = positions else { return Ok(first) };
    let c = p[..np].iter().sum::<Complex64>() / np as f64;
    Ok(inner
        .into_iter()
        .min_by(|&a, &b| (p[a] - c).norm().total_cmp(&(p[b] - c).norm()))
        .unwrap_or(first))
}

fn random_c(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn generate(a: &GenerateArgs, tol: f64, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let torus = a.topology == TopologyArg::Torus;
    let (em, extra) = match a.lattice {
        LatticeArg::Square => {
            let alpha = a.alpha.unwrap_or_else(|| 2.0 * a.rho.unwrap_or(1.0).atan());
            (critical::square(alpha, a.nx, a.ny, torus, a.delta)?, json!({ "alpha": alpha }))
        }
        LatticeArg::Triangular | LatticeArg::Hexagonal => {
            let alpha = a.alpha.unwrap_or(PI / 3.0);
            let beta = a.beta.unwrap_or(PI / 3.0);
            let em = if matches!(a.lattice, LatticeArg::Triangular) {
                critical::triangular(alpha, beta, a.nx, a.ny, torus, a.delta)?
            } else {
                critical::hexagonal(alpha, beta, a.nx, a.ny, torus, a.delta)?
            };
            (em, json!({ "alpha": alpha, "beta": beta }))
        }
        LatticeArg::Period2 => {
            let rho: [f64; 4] = a
                .rhos
                .as_slice()
                .try_into()
                .map_err(|_| anyhow!("--rhos needs exactly four values, got {}", a.rhos.len()))?;
            (critical::period2(rho, a.nx, torus, a.delta)?, json!({ "rhos": rho }))
        }
        LatticeArg::Voronoi => {
            if torus {
                bail!("Voronoi maps are planar");
            }
            let points: Vec<Complex64> = (0..a.points)
                .map(|_| Complex64::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
                .collect();
            let (em, rep) = critical::voronoi_delaunay(&points)?;
            (em, json!({ "voronoi": rep }))
        }
    };
    let EmbeddedMap { map, embedding } = em;
    let mut rho = map.rho().to_vec();
    for &(e, f) in &a.perturb {
        let r = rho.get_mut(e).ok_or_else(|| anyhow!("cannot perturb edge {e}: the map has {} edges", map.m()))?;
        *r *= f;
    }
    let map = if a.perturb.is_empty() { map } else { map.with_rho(rho)? };
    let class = classify_map(&map, &embedding, tol);
    save(&a.output, &io::write_mesh(&MeshDocument::new(map.clone(), Some(embedding)))?)?;
    let summary = format!(
        "wrote {} ({} Λ vertices, {} quads): {}",
        a.output.display(),
        map.n_vertices(),
        map.m(),
        verdict_name(class.verdict)
    );
    Ok(Outcome {
        pass: true,
        report: json!({
            "output": a.output,
            "parameters": extra,
            "perturbed": a.perturb,
            "primal_vertices": map.n_primal_vertices(),
            "dual_vertices": map.n_dual_vertices(),
            "edges": map.m(),
            "classification": class,
        }),
        summary,
    })
}

fn validate(a: &MeshArg) -> Result<Outcome> {
    let doc = load(&a.mesh)?;
    let rep = mesh::validate(&doc.map);
    let pass = rep.is_valid();
    let summary = if pass {
        format!("valid: χ = {}, genus {:?}", rep.euler_characteristic, rep.genus)
    } else {
        format!("invalid: {}", rep.violations.join("; "))
    };
    Ok(Outcome { pass, report: json!({ "topology": rep }), summary })
}

fn classify(a: &ClassifyArgs, tol: f64) -> Result<Outcome> {
    let em = embedded(load(&a.mesh)?, "classification")?;
    let class = classify_map(&em.map, &em.embedding, tol);
    let pass = match a.require {
        RequireArg::Critical => class.verdict == Verdict::Critical,
        RequireArg::SemiCritical => class.verdict != Verdict::None,
    };
    let summary = format!("verdict: {}", verdict_name(class.verdict));
    Ok(Outcome { pass, report: json!({ "classification": class }), summary })
}

fn read_cochain(path: &Path, lam: &DoubleMap<f64>) -> Result<Cochain<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    io::parse_cochain(&text, Some(lam)).with_context(|| format!("parsing {}", path.display()))
}

fn solve(a: &SolveArgs, tol: f64, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let lam = load(&a.mesh)?.map;
    let (f, report, pass) = match a.problem {
        ProblemArg::Dirichlet => {
            let boundary = harmonic::boundary_vertices(&lam);
            if boundary.is_empty() {
                bail!("the Dirichlet problem needs boundary vertices");
            }
            let data: Vec<Complex64> = match &a.data {
                Some(p) => {
                    let c = read_cochain(p, &lam)?;
                    if c.degree != 0 {
                        bail!("Dirichlet data must be a function, got a {}-form", c.degree);
                    }
                    boundary.iter().map(|&v| c.values[v]).collect()
                }
                None => boundary.iter().map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0)).collect(),
            };
            let fixed: Vec<(usize, Complex64)> = boundary.iter().copied().zip(data.iter().copied()).collect();
            let (f, rep) = harmonic::solve_dirichlet(&lam, &fixed, None)?;
            let mut report = json!({ "problem": "dirichlet", "boundary_vertices": boundary.len(), "solve": rep });
            let mut pass = rep.residual <= tol;
            if data.iter().all(|z| z.im == 0.0) {
                let lo = data.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
                let hi = data.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
                let slack = tol * hi.abs().max(lo.abs()).max(1.0);
                let holds = f.values.iter().all(|z| z.re >= lo - slack && z.re <= hi + slack);
                report["maximum_principle"] = json!({ "min": lo, "max": hi, "holds": holds });
                pass &= holds;
            }
            (f, report, pass)
        }
        ProblemArg::Neumann => {
            let np = lam.n_primal_vertices();
            let y0 = (np..lam.n_vertices())
                .find(|&y| !lam.is_interior(y))
                .ok_or_else(|| anyhow!("the Neumann problem needs a boundary dual vertex"))?;
            let edges = lam.boundary_primal_edges();
            let m = lam.m();
            let (alpha, f0, reference) = match &a.data {
                Some(p) => {
                    let c = read_cochain(p, &lam)?;
                    if c.degree != 1 {
                        bail!("Neumann data must be a 1-form, got a {}-form", c.degree);
                    }
                    let alpha: Vec<(usize, Complex64)> = edges.iter().map(|&e| (e, c.values[e + m])).collect();
                    (alpha, Complex64::new(0.0, 0.0), None)
                }
                None => {
                    let boundary = harmonic::boundary_vertices(&lam);
                    let fixed: Vec<(usize, Complex64)> = boundary.iter().map(|&v| (v, random_c(rng))).collect();
                    let (g, _) = harmonic::solve_dirichlet(&lam, &fixed, None)?;
                    let alpha = edges
                        .iter()
                        .map(|&e| {
                            let [t, h] = lam.edge_ends(e + m);
                            (e, g.values[h] - g.values[t])
                        })
                        .collect();
                    (alpha, g.values[y0], Some(g))
                }
            };
            let sol = harmonic::solve_neumann(&lam, y0, f0, &alpha)?;
            let mut report = json!({
                "problem": "neumann",
                "y0": y0,
                "boundary_edges": edges.len(),
                "implied_at_y0": sol.implied_at_y0,
                "compatibility_residual": sol.compatibility_residual,
            });
            let mut pass = sol.compatibility_residual <= tol;
            if let Some(g) = reference {
                let err = (np..lam.n_vertices()).map(|y| (sol.f.values[y] - g.values[y]).norm()).fold(0.0, f64::max);
                report["recovery_error"] = json!(err);
                pass &= err <= tol;
            }
            (sol.f, report, pass)
        }
    };
    if let Some(out) = &a.output {
        save(out, &io::write_cochain(&f))?;
    }
    let summary = format!("{} solve: {}", report["problem"].as_str().unwrap_or(""), if pass { "ok" } else { "failed" });
    Ok(Outcome { pass, report, summary })
}

fn basis(a: &BasisArgs) -> Result<Outcome> {
    let lam = load(&a.mesh)?.map;
    let genus = mesh::validate(&lam).genus.ok_or_else(|| anyhow!("the genus of the map is undefined"))?;
    let (fb, expected) = if a.harmonic {
        (harmonic::harmonic_basis(&lam)?, 4 * genus)
    } else {
        (harmonic::holomorphic_basis(&lam)?, 2 * genus)
    };
    let dim = fb.forms.len();
    let pass = dim as i64 == expected && !fb.ambiguous();
    if let Some(out) = &a.output {
        let forms: Vec<_> = fb.forms.iter().map(io::cochain_to_record).collect();
        save(out, &serde_json::to_string_pretty(&json!({ "forms": forms }))?)?;
    }
    let kind = if a.harmonic { "harmonic" } else { "holomorphic" };
    let summary = format!("{kind} 1-forms: dimension {dim}, expected {expected}, gap {:.3e}", fb.report.gap);
    Ok(Outcome {
        pass,
        report: json!({
            "kind": kind,
            "genus": genus,
            "dimension": dim,
            "expected": expected,
            "null_space": fb.report,
            "ambiguous": fb.ambiguous(),
        }),
        summary,
    })
}

fn cauchy(a: &CauchyArgs, tol: f64, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let doc = load(&a.mesh)?;
    let lam = &doc.map;
    let dia = lam.diamond();
    let edge = match a.edge {
        Some(e) => e,
        None => {
            let x = central_vertex(lam, doc.embedding.as_ref().map(|e| e.positions.as_slice()))?;
            (0..dia.complex.n_edges())
                .find(|&e| dia.complex.edges[e][0] == x)
                .ok_or_else(|| anyhow!("vertex {x} has no diamond edge"))?
        }
    };
    let region: Vec<usize> = (0..lam.m()).collect();
    let k = cauchy_kernel(lam, &region, edge)?;
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let holonomy_defect = (k.boundary_holonomy - two_pi_i).norm();
    let n = lam.n_vertices();
    let mut integral_residual = 0.0f64;
    for _ in 0..a.samples {
        let f = Cochain::function((0..n).map(|_| random_c(rng)).collect());
        integral_residual = integral_residual.max(cauchy_integral(lam, &k, &f)?.residual.norm());
    }
    let mut report = json!({
        "edge": edge,
        "x": k.x,
        "y": k.y,
        "boundary_holonomy": k.boundary_holonomy,
        "holonomy_defect": holonomy_defect,
        "average_residual": k.average_residual,
        "closed_residual": k.closed_residual,
        "samples": a.samples,
        "integral_residual": integral_residual,
    });
    let mut pass = holonomy_defect <= tol && integral_residual <= tol;
    if let Some(emb) = &doc.embedding {
        if lam.topology() == Topology::Planar && classify_map(lam, emb, tol).verdict == Verdict::Critical {
            let powers = z_powers(lam, emb, 2, k.x, PowerNormalization::Paper)?;
            let defects: Vec<f64> = powers[1..]
                .iter()
                .map(|f| cauchy_integral(lam, &k, f).map(|c| (c.reproduced_average() - c.edge_average).norm()))
                .collect::<discra::Result<_>>()?;
            pass &= defects.iter().all(|&d| d <= tol);
            report["power_average_defects"] = json!(defects);
        }
    }
    let summary = format!("Cauchy kernel at ◇ edge {edge}: ∮ν − 2iπ = {holonomy_defect:.2e}, formula residual {integral_residual:.2e}");
    Ok(Outcome { pass, report, summary })
}

fn ising(a: &IsingArgs, tol: f64) -> Result<Outcome> {
    let lam = load(&a.mesh)?.map;
    let couplings: Vec<f64> = lam.rho()[..lam.m()].iter().map(|&r| ising_coupling(r)).collect();
    let mut distinct: Vec<f64> = Vec::new();
    for &k in &couplings {
        if !distinct.iter().any(|&d| (d - k).abs() <= 1e-12 * k.abs().max(1.0)) {
            distinct.push(k);
        }
    }
    distinct.sort_by(f64::total_cmp);
    let rep = ising_criticality(&lam, tol);
    let pass = !a.check || rep.critical;
    let summary = format!("critical: {}, couplings {:?}", rep.critical, distinct);
    Ok(Outcome {
        pass,
        report: json!({
            "critical": rep.critical,
            "ising": rep,
            "distinct_couplings": distinct,
            "couplings": couplings,
        }),
        summary,
    })
}

fn dirac_cmd(a: &DiracArgs, tol: f64) -> Result<Outcome> {
    let lam = load(&a.mesh)?.map;
    if let Some(path) = &a.residuals {
        let triple = TripleGraph::build(&lam);
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let z = io::parse_spinor::<f64>(&text, Some(triple.n_vertices()))
            .with_context(|| format!("parsing {}", path.display()))?;
        let mut rows = Vec::new();
        let mut pass = false;
        for (i, spin) in SpinStructure::enumerate(&triple)?.iter().enumerate() {
            let r = dirac::dirac_residual(&lam, spin, &z)?;
            pass |= r.is_dirac(tol);
            rows.push(json!({ "structure": i, "mu": spin.mu, "residual": r }));
        }
        let summary = format!("spinor {} the Dirac equation", if pass { "satisfies" } else { "violates" });
        return Ok(Outcome { pass, report: json!({ "mode": "residuals", "structures": rows }), summary });
    }
    let mode = if a.construct { "construct" } else { "exists" };
    match dirac::dirac_exists(&lam)? {
        DiracOutcome::Spinor { spin, spinor, report } => {
            let pass = report.residual.is_dirac(tol) && report.modulus_defect <= tol;
            let mut out = json!({ "mode": mode, "exists": true, "spin": spin.summary(), "report": report });
            if a.construct {
                match &a.output {
                    Some(p) => save(p, &io::write_spinor(&spinor))?,
                    None => out["spinor"] = serde_json::to_value(io::spinor_to_record(&spinor))?,
                }
            }
            Ok(Outcome { pass, report: out, summary: "a Dirac spinor exists".into() })
        }
        DiracOutcome::Witness(w) => {
            let summary = format!("no Dirac spinor: {}", serde_json::to_string(&w)?);
            Ok(Outcome { pass: false, report: json!({ "mode": mode, "exists": false, "witness": w }), summary })
        }
    }
}

fn massive(a: &MassiveArgs, tol: f64) -> Result<Outcome> {
    let lam = load(&a.mesh)?.map;
    let rho: Vec<f64> = if a.as_given {
        (0..lam.n_edges()).map(|e| lam.edge_rho(e)).collect()
    } else {
        dirac::massive_ratios(&lam, a.k)
    };
    let rep = dirac::massive_flatness(&lam, &rho, a.k, tol)?;
    let pass = rep.flat && rep.modulus_ok();
    let summary = match rep.offending {
        Some((e, p)) => format!("modulus violated at edge {e}: ρρ* = {p}, expected {}", 1.0 / a.k),
        None => format!("flat: {}, max residual {:.2e}", rep.flat, rep.max_residual),
    };
    Ok(Outcome { pass, report: json!({ "massive": rep }), summary })
}

fn refine(a: &RefineArgs, tol: f64) -> Result<Outcome> {
    let em = embedded(load(&a.mesh)?, "refinement")?;
    let fine = critical::refine(&em)?;
    let before = classify_map(&em.map, &em.embedding, tol);
    let after = classify_map(&fine.map, &fine.embedding, tol);
    let pass = before.verdict == after.verdict;
    save(&a.output, &io::write_mesh(&MeshDocument::new(fine.map.clone(), Some(fine.embedding.clone())))?)?;
    let summary = format!(
        "{} → {} quads, {} → {}",
        em.map.m(),
        fine.map.m(),
        verdict_name(before.verdict),
        verdict_name(after.verdict)
    );
    Ok(Outcome {
        pass,
        report: json!({ "output": a.output, "quads": [em.map.m(), fine.map.m()], "before": before, "after": after }),
        summary,
    })
}

fn converge(a: &ConvergeArgs, tol: f64) -> Result<Outcome> {
    let em = embedded(load(&a.mesh)?, "convergence")?;
    let z0 = match a.base {
        Some(v) => v,
        None => central_vertex(&em.map, Some(&em.embedding.positions))?,
    };
    let rep = z_power_convergence(&em, a.power, a.levels, z0, a.control)?;
    let pass = rep.converges(a.max_ratio, tol);
    let summary = format!("Z^{} errors {:?}: {}", a.power, rep.errors, if pass { "converges" } else { "does not converge" });
    Ok(Outcome {
        pass,
        report: json!({ "power": a.power, "base": z0, "control": a.control, "convergence": rep }),
        summary,
    })
}

fn render(a: &RenderArgs, tol: f64) -> Result<Outcome> {
    let em = embedded(load(&a.mesh)?, "rendering")?;
    let spinor = if a.spinor {
        match dirac::dirac_exists(&em.map)? {
            DiracOutcome::Spinor { spinor, .. } => Some(spinor),
            DiracOutcome::Witness(w) => bail!("no Dirac spinor to draw: {}", serde_json::to_string(&w)?),
        }
    } else {
        None
    };
    let svg = render_svg(&em.map, &em.embedding, &SvgOptions { spinor: spinor.as_ref(), tolerance: tol })?;
    save(&a.output, &svg)?;
    Ok(Outcome {
        pass: true,
        report: json!({ "output": a.output, "bytes": svg.len(), "spinor": a.spinor }),
        summary: format!("wrote {}", a.output.display()),
    })
}
