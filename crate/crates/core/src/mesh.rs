//! Conforming triangle meshes of the rough domain and the limit cylinder.
//!
//! Rough meshes are built column by column: every column carries the same
//! logical level structure (bulk block down to y = -1, an oscillation block,
//! and the strip layers), so y = 0 and the strip bounds are mesh lines by
//! construction and the characteristic function of the strip is elementwise
//! constant. Columns are inserted where the strip bottom crosses y = 0 so
//! that no element straddles the interface.

use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::geometry::{eval_profile, strip_thickness};
use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

/// Boundary classification tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    /// Oscillating top boundary of the rough domain.
    TopRough,
    /// Flat top boundary Gamma of the limit cylinder.
    Gamma,
    /// Vertical sides x = 0 and x = 1.
    Lateral,
    /// Bottom y = -1.
    Bottom,
}

#[derive(Debug, Clone, Copy)]
pub struct BoundaryEdge {
    pub vertices: (usize, usize),
    pub tag: BoundaryTag,
}

/// Conforming 2-D triangulation with tagged boundary edges and tagged
/// strip elements.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 2]>,
    /// Vertex-index triples, counterclockwise.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Indices of triangles inside the closure of the strip; empty for
    /// cylinder meshes.
    pub strip_elements: Vec<usize>,
    /// Relative perturbation of the strip measure introduced by the
    /// degenerate-thickness floor (zero unless h vanishes somewhere).
    pub strip_measure_perturbation: f64,
}

impl TriangleMesh {
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        let pc = self.vertices[c];
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        let pc = self.vertices[c];
        [
            (pa[0] + pb[0] + pc[0]) / 3.0,
            (pa[1] + pb[1] + pc[1]) / 3.0,
        ]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    pub fn gamma_edges(&self) -> impl Iterator<Item = &BoundaryEdge> {
        self.boundary_edges
            .iter()
            .filter(|e| e.tag == BoundaryTag::Gamma)
    }
}

/// Collapse tolerance for coincident column levels.
const LEVEL_TOL: f64 = 1e-13;

fn floored_thickness(x: f64, cfg: &ProblemConfig) -> f64 {
    let raw = strip_thickness(x, cfg);
    let floor = 1e-3 * cfg.epsilon.powf(cfg.gamma + 1.0) * cfg.functions.h.upper_bound();
    raw.max(floor)
}

/// Strip bottom relative to the interface: s(x) = G_eps(x) - thickness(x).
fn strip_bottom(x: f64, cfg: &ProblemConfig) -> f64 {
    eval_profile(x, cfg) - floored_thickness(x, cfg)
}

/// Builds the column abscissas: a uniform grid of spacing <= target plus the
/// roots of `strip_bottom` so each interval has a uniform sign.
fn build_columns(cfg: &ProblemConfig) -> Vec<f64> {
    let nx = (1.0 / cfg.mesh.target_edge).ceil() as usize;
    let mut xs: Vec<f64> = (0..=nx).map(|i| i as f64 / nx as f64).collect();
    let mut roots = Vec::new();
    for w in xs.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (slo, shi) = (strip_bottom(lo, cfg), strip_bottom(hi, cfg));
        if slo == 0.0 || shi == 0.0 || slo.signum() == shi.signum() {
            continue;
        }
        let mut flo = slo;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let fm = strip_bottom(mid, cfg);
            if fm == 0.0 {
                lo = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        // roots hugging a grid column would create sliver-width quads; the
        // interface snap below absorbs the crossing there instead
        let guard = 0.01 * (w[1] - w[0]);
        if (r - w[0]).abs() > guard && (r - w[1]).abs() > guard {
            roots.push(r);
        }
    }
    xs.extend(roots);
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    xs
}

/// Builds a conforming mesh of the rough domain with the strip resolved by
/// element layers and y = 0 as a mesh line.
pub fn build_rough_mesh(cfg: &ProblemConfig) -> Result<TriangleMesh> {
    cfg.validate()?;
    if cfg.mesh.target_edge > cfg.epsilon / 8.0 {
        return Err(Error::MeshResolution(format!(
            "target edge {} cannot resolve the oscillation; need <= eps/8 = {}",
            cfg.mesh.target_edge,
            cfg.epsilon / 8.0
        )));
    }

    let xs = build_columns(cfg);
    let ncol = xs.len();

    // Per-column geometry.
    let mut tops = Vec::with_capacity(ncol); // G_eps
    let mut lows = Vec::with_capacity(ncol); // strip bottom (with floor)
    let mut raw_t = Vec::with_capacity(ncol);
    let mut flo_t = Vec::with_capacity(ncol);
    for &x in &xs {
        let g = eval_profile(x, cfg);
        let t = floored_thickness(x, cfg);
        if g - t < -1.0 {
            return Err(Error::Config(format!(
                "strip exits the domain at x = {x}; epsilon too large for given h, gamma"
            )));
        }
        tops.push(g);
        lows.push(g - t);
        raw_t.push(strip_thickness(x, cfg));
        flo_t.push(t);
    }

    let nb = (1.0 / cfg.mesh.bulk_edge).round().max(4.0) as usize;
    let ns = cfg.mesh.strip_layers;
    let dy_osc = cfg.epsilon / 8.0;
    let max_span = lows.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let nm = ((max_span / dy_osc).ceil() as usize).max(1);
    let nlev = nb + nm + ns + 1;

    // Column level coordinates and vertex ids (levels collapsing to the same
    // y share a vertex).
    let mut vertices: Vec<[f64; 2]> = Vec::new();
    let mut vid: Vec<Vec<usize>> = Vec::with_capacity(ncol);
    // The y = 0 interface is an artificial mesh line; where it nearly
    // coincides with the strip bottom or with the top boundary it is
    // collapsed onto that line, since keeping both would create sliver
    // cells whose stiffness entries dominate roundoff. The strip boundaries
    // themselves never move, so strip measures stay exact.
    let interface_snap = 0.2 * dy_osc;
    let cs: Vec<f64> = (0..ncol)
        .map(|ci| {
            if lows[ci].abs() < interface_snap {
                lows[ci]
            } else if tops[ci] < interface_snap {
                tops[ci]
            } else {
                0.0
            }
        })
        .collect();
    for (ci, &x) in xs.iter().enumerate() {
        let a = lows[ci].min(cs[ci]);
        let b = lows[ci].max(cs[ci]);
        let g = tops[ci];
        let mut levels = Vec::with_capacity(nlev);
        for j in 0..=nb {
            if j == nb {
                levels.push(a);
            } else {
                levels.push(-1.0 + (j as f64 / nb as f64) * (1.0 + a));
            }
        }
        for k in 1..=nm {
            if k == nm {
                levels.push(b);
            } else {
                levels.push(a + (k as f64 / nm as f64) * (b - a));
            }
        }
        for l in 1..=ns {
            if l == ns {
                levels.push(g);
            } else {
                levels.push(b + (l as f64 / ns as f64) * (g - b));
            }
        }
        let mut ids: Vec<usize> = Vec::with_capacity(nlev);
        for (li, &y) in levels.iter().enumerate() {
            // levels are monotone; coincident ones share a vertex
            if li > 0 && y - vertices[ids[li - 1]][1] < LEVEL_TOL {
                ids.push(ids[li - 1]);
            } else {
                ids.push(vertices.len());
                vertices.push([x, y]);
            }
        }
        vid.push(ids);
    }

    // Triangulate logical quads, skipping collapsed ones.
    let mut triangles = Vec::new();
    let mut strip_elements = Vec::new();
    for ci in 0..ncol - 1 {
        let mid_is_strip = (lows[ci] - cs[ci]) + (lows[ci + 1] - cs[ci + 1]) < 0.0;
        for lev in 0..nlev - 1 {
            let v00 = vid[ci][lev];
            let v01 = vid[ci][lev + 1];
            let v10 = vid[ci + 1][lev];
            let v11 = vid[ci + 1][lev + 1];
            let in_strip = if lev < nb {
                false
            } else if lev < nb + nm {
                mid_is_strip
            } else {
                true
            };
            for tri in [[v00, v10, v11], [v00, v11, v01]] {
                if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                    continue;
                }
                let pa = vertices[tri[0]];
                let pb = vertices[tri[1]];
                let pc = vertices[tri[2]];
                let area =
                    0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]));
                if area <= 0.0 {
                    continue;
                }
                if in_strip {
                    strip_elements.push(triangles.len());
                }
                triangles.push(tri);
            }
        }
    }

    // Relative strip measure perturbation from the thickness floor.
    let mut num = 0.0;
    let mut den = 0.0;
    for ci in 0..ncol - 1 {
        let dx = xs[ci + 1] - xs[ci];
        num += 0.5 * dx * ((flo_t[ci] - raw_t[ci]) + (flo_t[ci + 1] - raw_t[ci + 1]));
        den += 0.5 * dx * (flo_t[ci] + flo_t[ci + 1]);
    }
    let perturbation = if den > 0.0 { num / den } else { 0.0 };

    let boundary_edges = extract_boundary(&vertices, &triangles, BoundaryTag::TopRough);
    Ok(TriangleMesh {
        vertices,
        triangles,
        boundary_edges,
        strip_elements,
        strip_measure_perturbation: perturbation,
    })
}

/// Structured triangulation of the cylinder (0,1) x (-1,0) with `nx` by `ny`
/// quads; edges on y = 0 are tagged Gamma.
pub fn build_cylinder_mesh(nx: usize, ny: usize) -> Result<TriangleMesh> {
    if nx < 4 || ny < 4 {
        return Err(Error::Config(format!(
            "cylinder resolution must be at least 4 per side, got {nx} x {ny}"
        )));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for i in 0..=nx {
        for j in 0..=ny {
            vertices.push([i as f64 / nx as f64, -1.0 + j as f64 / ny as f64]);
        }
    }
    let vid = |i: usize, j: usize| i * (ny + 1) + j;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let boundary_edges = extract_boundary(&vertices, &triangles, BoundaryTag::Gamma);
    Ok(TriangleMesh {
        vertices,
        triangles,
        boundary_edges,
        strip_elements: Vec::new(),
        strip_measure_perturbation: 0.0,
    })
}

/// Edges used by exactly one triangle, tagged by position. `top_tag` tells
/// rough tops apart from the cylinder's Gamma.
fn extract_boundary(
    vertices: &[[f64; 2]],
    triangles: &[[usize; 3]],
    top_tag: BoundaryTag,
) -> Vec<BoundaryEdge> {
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    let xmax = vertices.iter().map(|v| v[0]).fold(f64::MIN, f64::max);
    let mut edges: Vec<BoundaryEdge> = counts
        .into_iter()
        .filter(|&(_, c)| c == 1)
        .map(|((a, b), _)| {
            let pa = vertices[a];
            let pb = vertices[b];
            let tag = if (pa[1] + 1.0).abs() < 1e-9 && (pb[1] + 1.0).abs() < 1e-9 {
                BoundaryTag::Bottom
            } else if (pa[0] < 1e-12 && pb[0] < 1e-12)
                || (pa[0] > xmax - 1e-12 && pb[0] > xmax - 1e-12)
            {
                BoundaryTag::Lateral
            } else {
                top_tag
            };
            BoundaryEdge { vertices: (a, b), tag }
        })
        .collect();
    edges.sort_by_key(|e| e.vertices);
    edges
}

/// Barycentric coordinates of (x, y) in triangle `t`, not clamped.
fn barycentric(mesh: &TriangleMesh, t: usize, x: f64, y: f64) -> [f64; 3] {
    let [a, b, c] = mesh.triangles[t];
    let pa = mesh.vertices[a];
    let pb = mesh.vertices[b];
    let pc = mesh.vertices[c];
    let det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
    let l1 = ((x - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (y - pa[1])) / det;
    let l2 = ((pb[0] - pa[0]) * (y - pa[1]) - (x - pa[0]) * (pb[1] - pa[1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

const BARY_TOL: f64 = 1e-9;

/// Grid-bucketed point locator for repeated queries on one mesh.
pub struct PointLocator<'m> {
    mesh: &'m TriangleMesh,
    nx: usize,
    ny: usize,
    min: [f64; 2],
    max: [f64; 2],
    bins: Vec<Vec<u32>>,
}

impl<'m> PointLocator<'m> {
    pub fn new(mesh: &'m TriangleMesh) -> Self {
        let mut min = [f64::MAX; 2];
        let mut max = [f64::MIN; 2];
        for v in &mesh.vertices {
            for d in 0..2 {
                min[d] = min[d].min(v[d]);
                max[d] = max[d].max(v[d]);
            }
        }
        let n = ((mesh.triangles.len() as f64 / 2.0).sqrt().ceil() as usize).max(1);
        let (nx, ny) = (n, n);
        let mut bins = vec![Vec::new(); nx * ny];
        let span = |d: usize| (max[d] - min[d]).max(1e-300);
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let xs: Vec<f64> = tri.iter().map(|&v| mesh.vertices[v][0]).collect();
            let ys: Vec<f64> = tri.iter().map(|&v| mesh.vertices[v][1]).collect();
            let bx0 = (((xs.iter().cloned().fold(f64::MAX, f64::min) - min[0]) / span(0)
                * nx as f64) as usize)
                .min(nx - 1);
            let bx1 = (((xs.iter().cloned().fold(f64::MIN, f64::max) - min[0]) / span(0)
                * nx as f64) as usize)
                .min(nx - 1);
            let by0 = (((ys.iter().cloned().fold(f64::MAX, f64::min) - min[1]) / span(1)
                * ny as f64) as usize)
                .min(ny - 1);
            let by1 = (((ys.iter().cloned().fold(f64::MIN, f64::max) - min[1]) / span(1)
                * ny as f64) as usize)
                .min(ny - 1);
            for bx in bx0..=bx1 {
                for by in by0..=by1 {
                    bins[bx * ny + by].push(t as u32);
                }
            }
        }
        PointLocator { mesh, nx, ny, min, max, bins }
    }

    /// Finds the triangle containing (x, y) and its barycentric coordinates,
    /// snapped to [0, 1] within tolerance.
    pub fn locate(&self, x: f64, y: f64) -> Result<(usize, [f64; 3])> {
        let span = |d: usize| (self.max[d] - self.min[d]).max(1e-300);
        let cx = (((x - self.min[0]) / span(0) * self.nx as f64) as isize)
            .clamp(0, self.nx as isize - 1) as usize;
        let cy = (((y - self.min[1]) / span(1) * self.ny as f64) as isize)
            .clamp(0, self.ny as isize - 1) as usize;
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        // search the containing bin first, then its ring of neighbors
        for ring in 0..2isize {
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    let bx = cx as isize + dx;
                    let by = cy as isize + dy;
                    if bx < 0 || by < 0 || bx >= self.nx as isize || by >= self.ny as isize {
                        continue;
                    }
                    for &t in &self.bins[bx as usize * self.ny + by as usize] {
                        let lam = barycentric(self.mesh, t as usize, x, y);
                        let m = lam.iter().cloned().fold(f64::MAX, f64::min);
                        if best.map_or(true, |(_, _, bm)| m > bm) {
                            best = Some((t as usize, lam, m));
                        }
                    }
                }
            }
            if let Some((_, _, m)) = best {
                if m >= -BARY_TOL {
                    break;
                }
            }
        }
        match best {
            Some((t, lam, m)) if m >= -BARY_TOL => Ok((t, snap(lam))),
            _ => Err(Error::PointNotFound(x, y)),
        }
    }
}

fn snap(lam: [f64; 3]) -> [f64; 3] {
    let mut s = lam.map(|l| l.clamp(0.0, 1.0));
    let sum: f64 = s.iter().sum();
    for l in &mut s {
        *l /= sum;
    }
    s
}

/// One-shot point location by linear scan; use `PointLocator` in hot paths.
pub fn locate_point(mesh: &TriangleMesh, x: f64, y: f64) -> Result<(usize, [f64; 3])> {
    let mut best: Option<(usize, [f64; 3], f64)> = None;
    for t in 0..mesh.triangles.len() {
        let lam = barycentric(mesh, t, x, y);
        let m = lam.iter().cloned().fold(f64::MAX, f64::min);
        if best.map_or(true, |(_, _, bm)| m > bm) {
            best = Some((t, lam, m));
        }
    }
    match best {
        Some((t, lam, m)) if m >= -BARY_TOL => Ok((t, snap(lam))),
        _ => Err(Error::PointNotFound(x, y)),
    }
}

/// Writes the mesh (and optional nodal scalar fields) in legacy VTK ASCII.
pub fn write_vtk(mesh: &TriangleMesh, point_data: &[(&str, &[f64])], path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\nplaplab mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    out.push_str(&format!("POINTS {} double\n", mesh.vertices.len()));
    for v in &mesh.vertices {
        out.push_str(&format!("{:.12e} {:.12e} 0.0\n", v[0], v[1]));
    }
    out.push_str(&format!(
        "CELLS {} {}\n",
        mesh.triangles.len(),
        4 * mesh.triangles.len()
    ));
    for t in &mesh.triangles {
        out.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
    }
    out.push_str(&format!("CELL_TYPES {}\n", mesh.triangles.len()));
    for _ in &mesh.triangles {
        out.push_str("5\n");
    }
    if !point_data.is_empty() {
        out.push_str(&format!("POINT_DATA {}\n", mesh.vertices.len()));
        for (name, data) in point_data {
            out.push_str(&format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"));
            for v in *data {
                out.push_str(&format!("{v:.12e}\n"));
            }
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}
