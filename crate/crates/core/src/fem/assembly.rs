//! Element-wise assembly of the quasilinear weak form
//! `u -> |grad u|^(p-2) grad u . grad phi + |u|^(p-2) u phi` and of the
//! u-dependent load functionals (concentrated strip reaction, nonlinear
//! Neumann boundary term).
//!
//! Gradient terms are exact for P1 (constant gradients); mass-type and
//! reaction terms use the second-order 3-point mid-edge rule.

use super::FemField;
use crate::error::Result;
use crate::exec::{map_indexed, ExecMode};
use crate::geometry::Reaction;
use crate::linalg::SparseOperator;
use crate::mesh::TriangleMesh;
use crate::quad::GAUSS2;

/// Mid-edge quadrature bookkeeping: the three midpoints touch vertex pairs
/// (0,1), (1,2), (2,0), where each P1 basis function equals 1/2.
const MID_PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

/// Precomputed per-element geometry: areas and constant basis gradients.
#[derive(Debug, Clone)]
pub struct ElementCache {
    pub areas: Vec<f64>,
    pub grads: Vec<[[f64; 2]; 3]>,
}

impl ElementCache {
    pub fn new(mesh: &TriangleMesh) -> Self {
        let n = mesh.triangles.len();
        let mut areas = Vec::with_capacity(n);
        let mut grads = Vec::with_capacity(n);
        for t in 0..n {
            let [a, b, c] = mesh.triangles[t];
            let pa = mesh.vertices[a];
            let pb = mesh.vertices[b];
            let pc = mesh.vertices[c];
            let two_a = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
            areas.push(0.5 * two_a);
            grads.push([
                [(pb[1] - pc[1]) / two_a, (pc[0] - pb[0]) / two_a],
                [(pc[1] - pa[1]) / two_a, (pa[0] - pc[0]) / two_a],
                [(pa[1] - pb[1]) / two_a, (pb[0] - pa[0]) / two_a],
            ]);
        }
        ElementCache { areas, grads }
    }

    /// Constant gradient of `u` on element `t`.
    pub fn gradient(&self, mesh: &TriangleMesh, u: &FemField, t: usize) -> [f64; 2] {
        let tri = mesh.triangles[t];
        let mut g = [0.0, 0.0];
        for k in 0..3 {
            let c = u.coeffs[tri[k]];
            g[0] += c * self.grads[t][k][0];
            g[1] += c * self.grads[t][k][1];
        }
        g
    }

    /// Root-mean-square gradient magnitude of `u` (area weighted).
    pub fn rms_gradient(&self, mesh: &TriangleMesh, u: &FemField) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for t in 0..mesh.triangles.len() {
            let g = self.gradient(mesh, u, t);
            num += self.areas[t] * (g[0] * g[0] + g[1] * g[1]);
            den += self.areas[t];
        }
        if den > 0.0 {
            (num / den).sqrt()
        } else {
            0.0
        }
    }
}

/// Quadrature data for one Gamma edge of the limit problem.
#[derive(Debug, Clone)]
pub struct EdgeQuad {
    pub vertices: (usize, usize),
    pub length: f64,
    /// mu sampled at the two Gauss points of the edge.
    pub mu_q: [f64; 2],
    /// Gauss point positions in the edge parameter [0, 1].
    pub xi_q: [f64; 2],
}

/// Nonlinear Neumann load on the tagged Gamma edges.
#[derive(Debug, Clone)]
pub struct BoundaryLoad {
    pub reaction: Reaction,
    pub edges: Vec<EdgeQuad>,
}

/// Gauss point parameters on [0, 1] for edge quadrature.
pub fn edge_gauss_xi() -> [f64; 2] {
    [0.5 * (1.0 + GAUSS2[0].0), 0.5 * (1.0 + GAUSS2[1].0)]
}

/// A load functional on the right-hand side of the weak form; may depend on
/// the current iterate.
#[derive(Debug, Clone)]
pub enum LoadTerm {
    /// A fixed vector of nodal duals (u-independent).
    Fixed(Vec<f64>),
    /// `scale * integral over strip elements of f(u) phi`, with
    /// `scale = 1/eps^(gamma+1)`.
    Concentrated { scale: f64, reaction: Reaction },
    /// `integral over Gamma of mu(x) f(u) phi`.
    Boundary(BoundaryLoad),
}

/// The discrete weak form on one mesh at one exponent p, with its loads.
pub struct WeakForm<'m> {
    pub mesh: &'m TriangleMesh,
    pub cache: &'m ElementCache,
    pub p: f64,
    pub loads: Vec<LoadTerm>,
    pub mode: ExecMode,
}

impl<'m> WeakForm<'m> {
    pub fn new(
        mesh: &'m TriangleMesh,
        cache: &'m ElementCache,
        p: f64,
        loads: Vec<LoadTerm>,
    ) -> Self {
        WeakForm {
            mesh,
            cache,
            p,
            loads,
            mode: ExecMode::default(),
        }
    }

    pub fn n(&self) -> usize {
        self.mesh.vertices.len()
    }

    /// Monotone-operator part of the residual with regularized gradient
    /// weight `(|grad u|^2 + delta^2)^((p-2)/2)`.
    pub fn operator_apply(&self, u: &FemField, delta: f64) -> Vec<f64> {
        let p = self.p;
        let d2 = delta * delta;
        let contribs = map_indexed(self.mode, self.mesh.triangles.len(), |t| {
            let tri = self.mesh.triangles[t];
            let area = self.cache.areas[t];
            let grads = &self.cache.grads[t];
            let g = self.cache.gradient(self.mesh, u, t);
            let q = g[0] * g[0] + g[1] * g[1] + d2;
            let wg = if p == 2.0 { 1.0 } else { q.powf(0.5 * p - 1.0) };
            let mut r = [0.0; 3];
            for k in 0..3 {
                r[k] = area * wg * (g[0] * grads[k][0] + g[1] * grads[k][1]);
            }
            // |u|^(p-2) u term, 3-point mid-edge rule
            let w = area / 3.0;
            for (a, b) in MID_PAIRS {
                let um = 0.5 * (u.coeffs[tri[a]] + u.coeffs[tri[b]]);
                let s = super::pflux(um, p);
                r[a] += w * s * 0.5;
                r[b] += w * s * 0.5;
            }
            (tri, r)
        });
        let mut out = vec![0.0; self.n()];
        for (tri, r) in contribs {
            for k in 0..3 {
                out[tri[k]] += r[k];
            }
        }
        out
    }

    /// Evaluates all load terms at the iterate `u`.
    pub fn load_vector(&self, u: &FemField) -> Vec<f64> {
        let mut l = vec![0.0; self.n()];
        for term in &self.loads {
            match term {
                LoadTerm::Fixed(v) => {
                    for (li, vi) in l.iter_mut().zip(v) {
                        *li += vi;
                    }
                }
                LoadTerm::Concentrated { scale, reaction } => {
                    for &t in &self.mesh.strip_elements {
                        let tri = self.mesh.triangles[t];
                        let w = scale * self.cache.areas[t] / 3.0;
                        for (a, b) in MID_PAIRS {
                            let um = 0.5 * (u.coeffs[tri[a]] + u.coeffs[tri[b]]);
                            let fv = reaction.eval(um);
                            l[tri[a]] += w * fv * 0.5;
                            l[tri[b]] += w * fv * 0.5;
                        }
                    }
                }
                LoadTerm::Boundary(bl) => {
                    for e in &bl.edges {
                        let (v0, v1) = e.vertices;
                        for q in 0..2 {
                            let xi = e.xi_q[q];
                            let uq = (1.0 - xi) * u.coeffs[v0] + xi * u.coeffs[v1];
                            let w = 0.5 * e.length * e.mu_q[q] * bl.reaction.eval(uq);
                            l[v0] += w * (1.0 - xi);
                            l[v1] += w * xi;
                        }
                    }
                }
            }
        }
        l
    }

    /// Operator part and load part of the residual, separately; the residual
    /// is their difference.
    pub fn residual_split(&self, u: &FemField) -> (Vec<f64>, Vec<f64>) {
        (self.operator_apply(u, 0.0), self.load_vector(u))
    }

    /// Unregularized residual `A_p(u) - load(u)`.
    pub fn residual(&self, u: &FemField) -> Vec<f64> {
        self.residual_regularized(u, 0.0)
    }

    /// Residual with the gradient weight regularized by `delta`; the exact
    /// Frechet derivative of this map is `jacobian(u, delta)`.
    pub fn residual_regularized(&self, u: &FemField, delta: f64) -> Vec<f64> {
        let a = self.operator_apply(u, delta);
        let l = self.load_vector(u);
        a.iter().zip(&l).map(|(ai, li)| ai - li).collect()
    }

    /// Derivative of the regularized residual: per-element gradient block
    /// `(p-2) q^((p-4)/2) (grad u x grad u) + q^((p-2)/2) I` with
    /// `q = |grad u|^2 + delta^2`, the mass derivative `(p-1)|u|^(p-2)`, and
    /// the (negated) derivatives of the u-dependent loads.
    pub fn jacobian(&self, u: &FemField, delta: f64) -> SparseOperator {
        let p = self.p;
        let d2 = delta * delta;
        let blocks = map_indexed(self.mode, self.mesh.triangles.len(), |t| {
            let tri = self.mesh.triangles[t];
            let area = self.cache.areas[t];
            let grads = &self.cache.grads[t];
            let g = self.cache.gradient(self.mesh, u, t);
            let q = g[0] * g[0] + g[1] * g[1] + d2;
            let (c1, c2) = if p == 2.0 {
                (0.0, 1.0)
            } else if q == 0.0 {
                (0.0, 0.0)
            } else {
                ((p - 2.0) * q.powf(0.5 * p - 2.0), q.powf(0.5 * p - 1.0))
            };
            let mut k = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    let gg = grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1];
                    let gu_i = g[0] * grads[i][0] + g[1] * grads[i][1];
                    let gu_j = g[0] * grads[j][0] + g[1] * grads[j][1];
                    k[i][j] = area * (c1 * gu_i * gu_j + c2 * gg);
                }
            }
            let w = area / 3.0;
            for (a, b) in MID_PAIRS {
                let um = 0.5 * (u.coeffs[tri[a]] + u.coeffs[tri[b]]);
                let sp = if p == 2.0 {
                    1.0
                } else {
                    (p - 1.0) * (um * um).powf(0.5 * p - 1.0)
                };
                for i in [a, b] {
                    for j in [a, b] {
                        k[i][j] += w * sp * 0.25;
                    }
                }
            }
            (tri, k)
        });

        let mut op = SparseOperator::new(self.n());
        for (tri, k) in blocks {
            for i in 0..3 {
                for j in 0..3 {
                    op.push(tri[i], tri[j], k[i][j]);
                }
            }
        }

        // minus the derivative of the u-dependent loads
        for term in &self.loads {
            match term {
                LoadTerm::Fixed(_) => {}
                LoadTerm::Concentrated { scale, reaction } => {
                    for &t in &self.mesh.strip_elements {
                        let tri = self.mesh.triangles[t];
                        let w = scale * self.cache.areas[t] / 3.0;
                        for (a, b) in MID_PAIRS {
                            let um = 0.5 * (u.coeffs[tri[a]] + u.coeffs[tri[b]]);
                            let fp = reaction.derivative(um);
                            for i in [tri[a], tri[b]] {
                                for j in [tri[a], tri[b]] {
                                    op.push(i, j, -w * fp * 0.25);
                                }
                            }
                        }
                    }
                }
                LoadTerm::Boundary(bl) => {
                    for e in &bl.edges {
                        let (v0, v1) = e.vertices;
                        for q in 0..2 {
                            let xi = e.xi_q[q];
                            let uq = (1.0 - xi) * u.coeffs[v0] + xi * u.coeffs[v1];
                            let w = 0.5 * e.length * e.mu_q[q] * bl.reaction.derivative(uq);
                            let phi = [1.0 - xi, xi];
                            let vs = [v0, v1];
                            for i in 0..2 {
                                for j in 0..2 {
                                    op.push(vs[i], vs[j], -w * phi[i] * phi[j]);
                                }
                            }
                        }
                    }
                }
            }
        }
        op
    }

    /// True if any load term depends on the iterate.
    pub fn has_nonlinear_load(&self) -> bool {
        self.loads.iter().any(|t| match t {
            LoadTerm::Fixed(_) => false,
            LoadTerm::Concentrated { reaction, .. } | LoadTerm::Boundary(BoundaryLoad { reaction, .. }) => {
                reaction.sup_derivative() > 0.0
            }
        })
    }

    /// Same form with all u-dependent loads frozen at `u` (Picard step).
    pub fn frozen_at(&self, u: &FemField) -> WeakForm<'m> {
        let l = self.load_vector(u);
        WeakForm {
            mesh: self.mesh,
            cache: self.cache,
            p: self.p,
            loads: vec![LoadTerm::Fixed(l)],
            mode: self.mode,
        }
    }

    pub fn check_field(&self, u: &FemField) -> Result<()> {
        u.check_compatible(self.mesh)
    }
}
