use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::basis::{beam_root, Basis};
use super::quadrature::{composite_gauss, gauss_legendre, periodic_trapezoid};
use crate::error::{Result, VeldtError};
use crate::lagrangian::{enumerate_multi_indices, MultiIndexSet};
use crate::linalg;

/// Boundary conditions selecting the closed subspace `V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    /// `W^{m,2}_0`: all derivatives of order `< m` vanish on the boundary.
    #[serde(rename = "dirichlet_m")]
    Dirichlet,
    #[serde(rename = "periodic")]
    Periodic,
    /// The whole of `W^{m,2}`.
    #[serde(rename = "full")]
    Full,
}

/// Axis-aligned box `Π (lower_i, upper_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Self {
        Self {
            lower: vec![a],
            upper: vec![b],
        }
    }

    pub fn rectangle(lower: [f64; 2], upper: [f64; 2]) -> Self {
        Self {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }
}

/// Everything needed to build a [`Discretization`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub domain: Domain,
    pub m: usize,
    pub bc: BoundaryCondition,
    /// Basis functions per component (per axis in two dimensions).
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    #[serde(default = "default_components", rename = "N")]
    pub components: usize,
}

fn default_quad_order() -> usize {
    16
}

fn default_components() -> usize {
    1
}

impl SpaceSpec {
    pub fn new(domain: Domain, m: usize, bc: BoundaryCondition, k: usize) -> Self {
        Self {
            domain,
            m,
            bc,
            k,
            quad_order: default_quad_order(),
            components: 1,
        }
    }

    pub fn with_quad_order(mut self, q: usize) -> Self {
        self.quad_order = q;
        self
    }

    pub fn with_components(mut self, n: usize) -> Self {
        self.components = n;
        self
    }
}

/// A Galerkin subspace with quadrature, derivative tables and Gram matrices.
///
/// Coefficient vectors have length `N·K` with component-major layout `i·K + k`.
#[derive(Debug, Clone)]
pub struct Discretization {
    spec: SpaceSpec,
    n: usize,
    m: usize,
    components: usize,
    basis: Basis,
    indices: MultiIndexSet,
    orders: Vec<Vec<usize>>,
    points: Vec<f64>,
    weights: Vec<f64>,
    /// Column `q·M + a` holds `D^{α_a} e_k` at node `q` for all `k`.
    table: DMatrix<f64>,
    /// Entry `(k, q)` of matrix `a` holds `D^{α_a} e_k` at node `q`.
    index_tables: Vec<DMatrix<f64>>,
    gram: DMatrix<f64>,
    gram_low: DMatrix<f64>,
    top: DMatrix<f64>,
    mass: DMatrix<f64>,
    gram_chol: Cholesky<f64, Dyn>,
    fingerprint: String,
}

fn block_diag(block: &DMatrix<f64>, copies: usize) -> DMatrix<f64> {
    let k = block.nrows();
    let mut out = DMatrix::zeros(k * copies, k * copies);
    for c in 0..copies {
        out.view_mut((c * k, c * k), (k, k)).copy_from(block);
    }
    out
}

/// Builds the Galerkin space for the given domain, order, boundary condition and size.
pub fn build_space(spec: &SpaceSpec) -> Result<Discretization> {
    let n = spec.domain.dim();
    let m = spec.m;
    let k = spec.k;
    if spec.domain.upper.len() != n || n == 0 {
        return Err(VeldtError::Configuration(
            "domain bounds must have equal length".into(),
        ));
    }
    if spec
        .domain
        .lower
        .iter()
        .zip(&spec.domain.upper)
        .any(|(a, b)| !(b > a))
    {
        return Err(VeldtError::Configuration(
            "domain must have positive extent".into(),
        ));
    }
    if k == 0 || m == 0 || spec.components == 0 || spec.quad_order == 0 {
        return Err(VeldtError::Configuration(
            "K, m, N and quad_order must be positive".into(),
        ));
    }
    let lo = &spec.domain.lower;
    let hi = &spec.domain.upper;
    let q = spec.quad_order;
    let (basis, points, weights) = match (n, m, spec.bc) {
        (1, 1, BoundaryCondition::Dirichlet) => {
            let (x, w) = composite_gauss(lo[0], hi[0], k, q);
            (
                Basis::Sine {
                    a: lo[0],
                    len: hi[0] - lo[0],
                    count: k,
                },
                x,
                w,
            )
        }
        (1, 2, BoundaryCondition::Dirichlet) => {
            let roots = (1..=k).map(beam_root).collect();
            let (x, w) = composite_gauss(lo[0], hi[0], k, q);
            (
                Basis::Beam {
                    a: lo[0],
                    len: hi[0] - lo[0],
                    roots,
                },
                x,
                w,
            )
        }
        (1, _, BoundaryCondition::Periodic) => {
            let nodes = (q * k).max(64);
            let (x, w) = periodic_trapezoid(lo[0], hi[0], nodes);
            (
                Basis::Fourier {
                    a: lo[0],
                    len: hi[0] - lo[0],
                    count: k,
                },
                x,
                w,
            )
        }
        (1, _, BoundaryCondition::Full) => {
            let nodes = q.max(2 * (k - 1) + 4);
            let (x, w) = gauss_legendre(nodes);
            let len = hi[0] - lo[0];
            let x = x.iter().map(|t| lo[0] + 0.5 * len * (t + 1.0)).collect();
            let w = w.iter().map(|w| 0.5 * len * w).collect();
            (
                Basis::Legendre {
                    a: lo[0],
                    len,
                    count: k,
                },
                x,
                w,
            )
        }
        (2, 1, BoundaryCondition::Dirichlet) => {
            let (x0, w0) = composite_gauss(lo[0], hi[0], k, q);
            let (x1, w1) = composite_gauss(lo[1], hi[1], k, q);
            let mut pts = Vec::with_capacity(2 * x0.len() * x1.len());
            let mut wts = Vec::with_capacity(x0.len() * x1.len());
            for (a, wa) in x0.iter().zip(&w0) {
                for (b, wb) in x1.iter().zip(&w1) {
                    pts.push(*a);
                    pts.push(*b);
                    wts.push(wa * wb);
                }
            }
            let basis = Basis::Sine2 {
                a: [lo[0], lo[1]],
                len: [hi[0] - lo[0], hi[1] - lo[1]],
                per_axis: k,
            };
            (basis, pts, wts)
        }
        (n, m, bc) => {
            return Err(VeldtError::Capability(format!(
            "no basis for n = {n}, m = {m}, bc = {bc:?}; supported: 1-D dirichlet_m with m ≤ 2, \
                 1-D periodic, 1-D full, 2-D dirichlet_m with m = 1"
        )))
        }
    };

    let indices = enumerate_multi_indices(n, m);
    let orders: Vec<Vec<usize>> = indices
        .indices()
        .iter()
        .map(|a| a.entries().to_vec())
        .collect();
    let big_m = orders.len();
    let nb = basis.count();
    let nq = weights.len();
    let mut table = DMatrix::zeros(nb, nq * big_m);
    let mut buf = vec![0.0; big_m * nb];
    for qi in 0..nq {
        basis.eval(&points[qi * n..(qi + 1) * n], &orders, &mut buf);
        for a in 0..big_m {
            table
                .column_mut(qi * big_m + a)
                .copy_from_slice(&buf[a * nb..(a + 1) * nb]);
        }
    }

    let index_tables: Vec<DMatrix<f64>> = (0..big_m)
        .map(|a| DMatrix::from_fn(nb, nq, |k, qi| table[(k, qi * big_m + a)]))
        .collect();

    let order_block = |pick: &dyn Fn(usize) -> bool| -> DMatrix<f64> {
        let mut g = DMatrix::zeros(nb, nb);
        for (a, alpha) in orders.iter().enumerate() {
            if !pick(alpha.iter().sum()) {
                continue;
            }
            for qi in 0..nq {
                let col = table.column(qi * big_m + a);
                g.ger(weights[qi], &col, &col, 1.0);
            }
        }
        linalg::symmetrize(&g)
    };
    let top_block = order_block(&|o| o == m);
    let low_block = order_block(&|o| o < m);
    let mass_block = order_block(&|o| o == 0);
    let gram_block = &top_block + &low_block;

    let c = spec.components;
    let gram = block_diag(&gram_block, c);
    let gram_chol = linalg::cholesky(&gram, "Gram matrix")?;

    let mut hasher = Sha256::new();
    hasher.update(
        format!(
            "{:?}|{:?}|{:?}|K={}|m={}|N={}|q={}",
            spec.domain.lower, spec.domain.upper, spec.bc, k, m, c, q
        )
        .as_bytes(),
    );
    let fingerprint = hex::encode(hasher.finalize())[..16].to_string();

    Ok(Discretization {
        spec: spec.clone(),
        n,
        m,
        components: c,
        basis,
        indices,
        orders,
        points,
        weights,
        table,
        index_tables,
        gram,
        gram_low: block_diag(&low_block, c),
        top: block_diag(&top_block, c),
        mass: block_diag(&mass_block, c),
        gram_chol,
        fingerprint,
    })
}

impl Discretization {
    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn indices(&self) -> &MultiIndexSet {
        &self.indices
    }

    /// Basis functions per component.
    pub fn basis_count(&self) -> usize {
        self.basis.count()
    }

    /// Total number of coefficients `N·K`.
    pub fn dim(&self) -> usize {
        self.components * self.basis.count()
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    pub fn node(&self, q: usize) -> &[f64] {
        &self.points[q * self.n..(q + 1) * self.n]
    }

    pub fn weight(&self, q: usize) -> f64 {
        self.weights[q]
    }

    /// `D^{α_a} e_k` at node `q` for all `k`.
    pub fn table_column(&self, q: usize, a: usize) -> nalgebra::DVectorView<'_, f64> {
        self.table.column(q * self.orders.len() + a)
    }

    /// `D^{α_a} e_k` at every node, as a `K × nodes` matrix.
    pub fn index_table(&self, a: usize) -> &DMatrix<f64> {
        &self.index_tables[a]
    }

    /// Jets at all nodes: entry `(q, i·M + a)` is `D^{α_a} u^i` at node `q`.
    pub fn node_jets(&self, coeffs: &DVector<f64>) -> DMatrix<f64> {
        let nb = self.basis_count();
        let big_m = self.orders.len();
        let mut out = DMatrix::zeros(self.node_count(), self.components * big_m);
        for i in 0..self.components {
            let c = coeffs.rows(i * nb, nb);
            for a in 0..big_m {
                out.column_mut(i * big_m + a)
                    .gemv_tr(1.0, &self.index_tables[a], &c, 0.0);
            }
        }
        out
    }

    /// Gram matrix of `(·,·)_{m,2}`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn gram_cholesky(&self) -> &Cholesky<f64, Dyn> {
        &self.gram_chol
    }

    /// `Σ_{|α|≤m−1} ∫ D^α e_j D^α e_k`.
    pub fn gram_low(&self) -> &DMatrix<f64> {
        &self.gram_low
    }

    /// `Σ_{|α|=m} ∫ D^α e_j D^α e_k`.
    pub fn top_stiffness(&self) -> &DMatrix<f64> {
        &self.top
    }

    /// `∫ e_j e_k`.
    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    /// Hash of domain, boundary condition, sizes and quadrature order.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn zero(&self) -> DVector<f64> {
        DVector::zeros(self.dim())
    }

    /// Coefficient vector with a single entry `value` at basis function `k` of component `i`.
    pub fn mode(&self, component: usize, k: usize, value: f64) -> DVector<f64> {
        let mut v = self.zero();
        v[component * self.basis_count() + k] = value;
        v
    }

    /// Jet of the field at node `q`, written component-major into `out`.
    pub fn node_jet(&self, coeffs: &DVector<f64>, q: usize, out: &mut [f64]) {
        let nb = self.basis_count();
        let big_m = self.orders.len();
        for i in 0..self.components {
            let c = coeffs.rows(i * nb, nb);
            for a in 0..big_m {
                out[i * big_m + a] = self.table_column(q, a).dot(&c);
            }
        }
    }

    /// `D^{α} u^i(x)` at an arbitrary point; `alpha` indexes [`Self::indices`].
    pub fn eval_at(&self, coeffs: &DVector<f64>, component: usize, alpha: usize, x: &[f64]) -> f64 {
        let nb = self.basis_count();
        let mut buf = vec![0.0; nb];
        self.basis
            .eval(x, std::slice::from_ref(&self.orders[alpha]), &mut buf);
        buf.iter()
            .zip(coeffs.rows(component * nb, nb).iter())
            .map(|(b, c)| b * c)
            .sum()
    }

    /// Uniform grid of `per_axis` points per direction including the endpoints.
    pub fn uniform_points(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let per_axis = per_axis.max(2);
        let lo = &self.spec.domain.lower;
        let hi = &self.spec.domain.upper;
        let axis = |d: usize| -> Vec<f64> {
            (0..per_axis)
                .map(|i| lo[d] + (hi[d] - lo[d]) * i as f64 / (per_axis - 1) as f64)
                .collect()
        };
        match self.n {
            1 => axis(0).into_iter().map(|x| vec![x]).collect(),
            _ => {
                let (ax, ay) = (axis(0), axis(1));
                ax.iter()
                    .flat_map(|x| ay.iter().map(move |y| vec![*x, *y]))
                    .collect()
            }
        }
    }

    /// `max |u^i(x)|` over a uniform grid with `per_axis` points per direction.
    pub fn sup_norm(&self, coeffs: &DVector<f64>, per_axis: usize) -> f64 {
        let nb = self.basis_count();
        let mut buf = vec![0.0; nb];
        let zero = std::slice::from_ref(&self.orders[0]);
        let mut best = 0.0f64;
        for x in self.uniform_points(per_axis) {
            self.basis.eval(&x, zero, &mut buf);
            for i in 0..self.components {
                let v: f64 = buf
                    .iter()
                    .zip(coeffs.rows(i * nb, nb).iter())
                    .map(|(b, c)| b * c)
                    .sum();
                best = best.max(v.abs());
            }
        }
        best
    }

    /// `‖v‖_{m,2}`.
    pub fn norm(&self, v: &DVector<f64>) -> f64 {
        linalg::gram_norm(&self.gram, v)
    }

    /// `(u, v)_{m,2}`.
    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        linalg::gram_dot(&self.gram, u, v)
    }

    /// Solves `G x = b`.
    pub fn riesz(&self, dual: &DVector<f64>) -> DVector<f64> {
        self.gram_chol.solve(dual)
    }

    /// `sqrt(ℓᵀ G⁻¹ ℓ)`: the `(·,·)_{m,2}` norm of the Riesz representative of `ℓ`.
    pub fn dual_norm(&self, dual: &DVector<f64>) -> f64 {
        dual.dot(&self.riesz(dual)).max(0.0).sqrt()
    }

    /// Samples a random coefficient vector with `‖v‖_{m,2} = radius`.
    pub fn random_field(&self, rng: &mut impl rand::Rng, radius: f64) -> DVector<f64> {
        // Decaying spectrum keeps the fields smooth.
        let nb = self.basis_count();
        let v = DVector::from_fn(self.dim(), |r, _| {
            let k = (r % nb) as f64;
            rng.gen_range(-1.0..1.0) / (1.0 + k).powi(2)
        });
        let nrm = self.norm(&v);
        if nrm == 0.0 {
            v
        } else {
            v * (radius / nrm)
        }
    }
}
