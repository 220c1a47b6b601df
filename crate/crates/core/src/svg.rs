//! Deterministic SVG drawings of embedded doubles.
//!
//! `Γ` edges are solid, `Γ*` edges dashed, and each `◇` face is shaded by
//! its rhombus residual. An optional spinor overlay draws `arg ζ` on sheet 0
//! as a tick at the midpoint of every `◇` edge. Coordinates are printed with
//! a fixed number of decimals so identical inputs give identical bytes.

use num_complex::Complex64;
use xmlwriter::{Options, XmlWriter};

use crate::critical::PlanarEmbedding;
use crate::dirac::Spinor;
use crate::error::{invalid, Result};
use crate::mesh::DoubleMap;
use crate::real::to_c64;
use crate::Real;

/// Drawing width in user units; the height follows the aspect ratio.
const WIDTH: f64 = 800.0;
const MARGIN: f64 = 20.0;

#[derive(Clone, Debug)]
pub struct SvgOptions<'a, T> {
    pub spinor: Option<&'a Spinor<T>>,
    /// Residual below which a `◇` face counts as a rhombus.
    pub tolerance: f64,
}

impl<T> Default for SvgOptions<'_, T> {
    fn default() -> Self {
        SvgOptions { spinor: None, tolerance: crate::DEFAULT_TOLERANCE }
    }
}

/// Largest of the orthogonality defect of the diagonals, the relative error
/// of `|D₂|/|D₁|` against `ρ` and the relative spread of the side lengths.
pub fn rhombus_residuals<T: Real>(lam: &DoubleMap<T>, emb: &PlanarEmbedding<T>) -> Vec<f64> {
    (0..lam.m())
        .map(|i| {
            let c = emb.quad_corners(lam, i).map(to_c64);
            let (d1, d2) = (c[2] - c[0], c[3] - c[1]);
            let ortho = (d2 * d1.conj()).re.abs() / (d1.norm() * d2.norm());
            let rho = lam.rho()[i].to_f64_();
            let ratio = (d2.norm() / d1.norm() - rho).abs() / rho;
            let sides: Vec<f64> = (0..4).map(|k| (c[(k + 1) % 4] - c[k]).norm()).collect();
            let mean = sides.iter().sum::<f64>() / 4.0;
            let spread = sides.iter().fold(0.0f64, |a, s| a.max((s - mean).abs())) / mean;
            ortho.max(ratio).max(spread)
        })
        .collect()
}

/// Pale green for rhombi, through orange to red as the residual grows to 1.
fn shade(r: f64, tol: f64) -> String {
    if r <= tol {
        return "#dff0d8".into();
    }
    let t = ((r / tol).log10() / (1.0 / tol).log10().max(1.0)).clamp(0.0, 1.0);
    let g = (200.0 - 170.0 * t).round() as u8;
    format!("#f0{g:02x}60")
}

struct Frame {
    origin: Complex64,
    scale: f64,
    height: f64,
}

impl Frame {
    fn map(&self, z: Complex64) -> (f64, f64) {
        let w = (z - self.origin) * self.scale;
        (MARGIN + w.re, self.height - MARGIN - w.im)
    }
}

fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

pub fn render_svg<T: Real>(lam: &DoubleMap<T>, emb: &PlanarEmbedding<T>, opts: &SvgOptions<'_, T>) -> Result<String> {
    if emb.positions.len() != lam.n_vertices() {
        return invalid(format!("{} positions for {} vertices", emb.positions.len(), lam.n_vertices()));
    }
    if let Some(z) = opts.spinor {
        if z.n_base() != lam.diamond().n_edges() {
            return invalid(format!("spinor has {} base values for {} ◇ edges", z.n_base(), lam.diamond().n_edges()));
        }
    }
    let quads: Vec<[Complex64; 4]> = (0..lam.m()).map(|i| emb.quad_corners(lam, i).map(to_c64)).collect();
    let points = quads.iter().flatten().copied().chain(emb.positions.iter().map(|&z| to_c64(z)));
    let (mut lo, mut hi) = (Complex64::new(f64::INFINITY, f64::INFINITY), Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for z in points {
        lo = Complex64::new(lo.re.min(z.re), lo.im.min(z.im));
        hi = Complex64::new(hi.re.max(z.re), hi.im.max(z.im));
    }
    let span = (hi - lo).re.max(1e-12);
    let scale = (WIDTH - 2.0 * MARGIN) / span;
    let height = (hi - lo).im * scale + 2.0 * MARGIN;
    let frame = Frame { origin: lo, scale, height };
    let residuals = rhombus_residuals(lam, emb);

    let mut w = XmlWriter::new(Options::default());
    w.start_element("svg");
    w.write_attribute("xmlns", "http://www.w3.org/2000/svg");
    w.write_attribute("version", "1.1");
    w.write_attribute("width", &num(WIDTH));
    w.write_attribute("height", &num(height));
    w.write_attribute_fmt("viewBox", format_args!("0 0 {} {}", num(WIDTH), num(height)));

    w.start_element("g");
    w.write_attribute("id", "diamond");
    w.write_attribute("stroke", "none");
    for (i, q) in quads.iter().enumerate() {
        let pts: Vec<String> = q.iter().map(|&z| {
            let (x, y) = frame.map(z);
            format!("{},{}", num(x), num(y))
        }).collect();
        w.start_element("polygon");
        w.write_attribute("class", "diamond-face");
        w.write_attribute("data-quad", &i);
        w.write_attribute("data-residual", &format!("{:.3e}", residuals[i]));
        w.write_attribute("fill", &shade(residuals[i], opts.tolerance));
        w.write_attribute("points", &pts.join(" "));
        w.end_element();
    }
    w.end_element();

    let m = lam.m();
    for (id, class, range, dash) in [
        ("dual", "dual-edge", m..2 * m, Some("4 3")),
        ("primal", "primal-edge", 0..m, None),
    ] {
        w.start_element("g");
        w.write_attribute("id", id);
        w.write_attribute("stroke", if dash.is_some() { "#3a6ea5" } else { "#222222" });
        w.write_attribute("stroke-width", if dash.is_some() { "1" } else { "1.5" });
        if let Some(d) = dash {
            w.write_attribute("stroke-dasharray", d);
        }
        for a in range {
            let [t, _] = lam.edge_ends(a);
            let p = to_c64(emb.positions[t]);
            let (x1, y1) = frame.map(p);
            let (x2, y2) = frame.map(p + to_c64(emb.edge_vector(lam, a)));
            w.start_element("line");
            w.write_attribute("class", class);
            w.write_attribute("data-edge", &a);
            w.write_attribute("x1", &num(x1));
            w.write_attribute("y1", &num(y1));
            w.write_attribute("x2", &num(x2));
            w.write_attribute("y2", &num(y2));
            w.end_element();
        }
        w.end_element();
    }

    let np = lam.n_primal_vertices();
    w.start_element("g");
    w.write_attribute("id", "vertices");
    for v in 0..lam.n_vertices() {
        let (x, y) = frame.map(to_c64(emb.positions[v]));
        let primal = v < np;
        w.start_element("circle");
        w.write_attribute("class", if primal { "primal-vertex" } else { "dual-vertex" });
        w.write_attribute("data-vertex", &v);
        w.write_attribute("cx", &num(x));
        w.write_attribute("cy", &num(y));
        w.write_attribute("r", if primal { "3" } else { "2" });
        w.write_attribute("fill", if primal { "#222222" } else { "#ffffff" });
        w.write_attribute("stroke", if primal { "none" } else { "#3a6ea5" });
        w.end_element();
    }
    w.end_element();

    if let Some(z) = opts.spinor {
        let dia = lam.diamond();
        let mut midpoint = vec![None; dia.n_edges()];
        let mut size = 0.0f64;
        for (i, q) in quads.iter().enumerate() {
            for k in 0..4 {
                let (a, b) = (q[k], q[(k + 1) % 4]);
                size = size.max((b - a).norm());
                midpoint[dia.sides[i][k]].get_or_insert((a + b) * 0.5);
            }
        }
        let len = 0.3 * size * scale;
        w.start_element("g");
        w.write_attribute("id", "spinor");
        w.write_attribute("stroke", "#b03060");
        w.write_attribute("stroke-width", "1.5");
        for (xi, mid) in midpoint.iter().enumerate() {
            let Some(mid) = *mid else { continue };
            let arg = to_c64(z.at(xi, false)).arg();
            let (x, y) = frame.map(mid);
            let (x2, y2) = (x + len * arg.cos(), y - len * arg.sin());
            w.start_element("line");
            w.write_attribute("class", "spinor-tick");
            w.write_attribute("data-xi", &xi);
            w.write_attribute("data-arg", &format!("{arg:.9}"));
            w.write_attribute("x1", &num(x));
            w.write_attribute("y1", &num(y));
            w.write_attribute("x2", &num(x2));
            w.write_attribute("y2", &num(y2));
            w.end_element();
            w.start_element("circle");
            w.write_attribute("class", "spinor-foot");
            w.write_attribute("cx", &num(x));
            w.write_attribute("cy", &num(y));
            w.write_attribute("r", "1.5");
            w.write_attribute("fill", "#b03060");
            w.end_element();
        }
        w.end_element();
    }
    Ok(w.end_document())
}
