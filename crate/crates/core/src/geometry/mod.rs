//! Chart-based Riemannian manifolds: metric, Levi-Civita connection data,
//! curvature in the sign convention R(X,Y) = -∇_X∇_Y + ∇_Y∇_X + ∇_{[X,Y]},
//! orthonormal frames, and scalar curvature.
//!
//! Every manifold is a single chart with an analytic metric coefficient
//! function. Identities are tensorial, so they are checked pointwise; only
//! the flat torus carries a quadrature rule.

mod builtins;

pub use builtins::{builtin, builtin_names, flat_torus, perturbed_sphere, round_sphere, BuiltinParams};

use std::fmt;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};
use ndarray::{Array3, Array4};

use crate::error::{Error, Result};

/// A point in chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub coords: DVector<f64>,
}

impl ChartPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords: DVector::from_vec(coords) }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// The point shifted by `delta` along coordinate axis `axis`.
    pub fn shifted(&self, axis: usize, delta: f64) -> Self {
        let mut coords = self.coords.clone();
        coords[axis] += delta;
        Self { coords }
    }
}

impl fmt::Display for ChartPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c:.6}")?;
        }
        write!(f, ")")
    }
}

/// Where sample points for pointwise checks are drawn from.
#[derive(Debug, Clone, Copy)]
pub enum SampleRegion {
    /// Uniform over the periodic box [0, len)^n.
    PeriodicBox { len: f64 },
    /// Uniform over the ball |x| <= radius.
    Ball { radius: f64 },
}

/// Chart domain predicate.
#[derive(Clone)]
pub enum ChartDomain {
    All,
    Ball { radius: f64 },
    Predicate(Arc<dyn Fn(&ChartPoint) -> bool + Send + Sync>),
}

impl ChartDomain {
    pub fn contains(&self, x: &ChartPoint) -> bool {
        match self {
            ChartDomain::All => true,
            ChartDomain::Ball { radius } => x.coords.norm() <= *radius,
            ChartDomain::Predicate(p) => p(x),
        }
    }
}

/// Uniform-grid quadrature over a periodic box (flat torus only).
#[derive(Debug, Clone, Copy)]
pub struct GridQuadrature {
    pub period: f64,
}

pub type MetricFn = Arc<dyn Fn(&ChartPoint) -> DMatrix<f64> + Send + Sync>;
/// Closed-form Christoffel symbols, indexed gamma[[k, i, j]] = Γ^k_ij.
pub type ChristoffelFn = Arc<dyn Fn(&ChartPoint) -> Array3<f64> + Send + Sync>;
/// Closed-form curvature, indexed riem[[m, i, j, k]] = R^m_ijk, i.e.
/// R(∂_i, ∂_j)∂_k = R^m_ijk ∂_m in the paper sign convention.
pub type RiemannFn = Arc<dyn Fn(&ChartPoint) -> Array4<f64> + Send + Sync>;

struct ChartData {
    dim: usize,
    name: String,
    metric: MetricFn,
    exact_christoffel: Option<ChristoffelFn>,
    exact_riemann: Option<RiemannFn>,
    domain: ChartDomain,
    quadrature: Option<GridQuadrature>,
    sample_region: SampleRegion,
    fd_step: f64,
}

/// A chart-based Riemannian manifold. Cheap to clone (shared interior).
#[derive(Clone)]
pub struct ManifoldChart {
    data: Arc<ChartData>,
}

/// Default finite-difference step for metric and coefficient derivatives.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

impl ManifoldChart {
    pub fn new(
        dim: usize,
        name: impl Into<String>,
        metric: MetricFn,
        domain: ChartDomain,
        sample_region: SampleRegion,
    ) -> Self {
        Self {
            data: Arc::new(ChartData {
                dim,
                name: name.into(),
                metric,
                exact_christoffel: None,
                exact_riemann: None,
                domain,
                quadrature: None,
                sample_region,
                fd_step: DEFAULT_FD_STEP,
            }),
        }
    }

    fn data_clone(&self) -> ChartData {
        let d = &self.data;
        ChartData {
            dim: d.dim,
            name: d.name.clone(),
            metric: d.metric.clone(),
            exact_christoffel: d.exact_christoffel.clone(),
            exact_riemann: d.exact_riemann.clone(),
            domain: d.domain.clone(),
            quadrature: d.quadrature,
            sample_region: d.sample_region,
            fd_step: d.fd_step,
        }
    }

    pub fn with_exact_christoffel(&self, f: ChristoffelFn) -> Self {
        let mut d = self.data_clone();
        d.exact_christoffel = Some(f);
        Self { data: Arc::new(d) }
    }

    pub fn with_exact_riemann(&self, f: RiemannFn) -> Self {
        let mut d = self.data_clone();
        d.exact_riemann = Some(f);
        Self { data: Arc::new(d) }
    }

    pub fn with_quadrature(&self, q: GridQuadrature) -> Self {
        let mut d = self.data_clone();
        d.quadrature = Some(q);
        Self { data: Arc::new(d) }
    }

    pub fn with_fd_step(&self, h: f64) -> Self {
        let mut d = self.data_clone();
        d.fd_step = h;
        Self { data: Arc::new(d) }
    }

    /// Copy of the chart with exact connection/curvature data stripped, so
    /// every derived quantity falls back to finite differences.
    pub fn without_exact(&self) -> Self {
        let mut d = self.data_clone();
        d.exact_christoffel = None;
        d.exact_riemann = None;
        Self { data: Arc::new(d) }
    }

    pub fn dim(&self) -> usize {
        self.data.dim
    }

    pub fn name(&self) -> &str {
        &self.data.name
    }

    pub fn fd_step(&self) -> f64 {
        self.data.fd_step
    }

    pub fn has_exact_connection(&self) -> bool {
        self.data.exact_christoffel.is_some()
    }

    pub fn quadrature(&self) -> Option<GridQuadrature> {
        self.data.quadrature
    }

    pub fn sample_region(&self) -> SampleRegion {
        self.data.sample_region
    }

    pub fn contains(&self, x: &ChartPoint) -> bool {
        self.data.domain.contains(x)
    }

    fn check_point(&self, x: &ChartPoint) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.dim() });
        }
        if !self.contains(x) {
            return Err(Error::OutsideDomain {
                manifold: self.name().to_string(),
                point: x.coords.iter().copied().collect(),
            });
        }
        Ok(())
    }

    /// Metric coefficients g_ij at `x` (no domain check; used by FD stencils
    /// that may step slightly past the sampling region).
    pub fn metric(&self, x: &ChartPoint) -> DMatrix<f64> {
        (self.data.metric)(x)
    }

    /// Metric and its inverse at `x`, validating symmetry and positivity.
    pub fn metric_inverse(&self, x: &ChartPoint) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let g = self.metric(x);
        let scale = g.amax().max(1.0);
        if (&g - g.transpose()).amax() > 1e-9 * scale {
            return Err(Error::DegenerateMetric { point: x.coords.iter().copied().collect() });
        }
        let chol = Cholesky::new(g.clone())
            .ok_or_else(|| Error::DegenerateMetric { point: x.coords.iter().copied().collect() })?;
        Ok((g, chol.inverse()))
    }

    /// Christoffel symbols Γ^k_ij at `x`, indexed [[k, i, j]].
    ///
    /// Uses the closed form when the chart carries one; otherwise
    /// Γ^k_ij = ½ g^km (∂_i g_jm + ∂_j g_im − ∂_m g_ij) with central
    /// differences of step `h` for the metric derivatives.
    pub fn christoffel(&self, x: &ChartPoint, h: f64) -> Result<Array3<f64>> {
        self.check_point(x)?;
        self.christoffel_unchecked(x, h)
    }

    pub(crate) fn christoffel_unchecked(&self, x: &ChartPoint, h: f64) -> Result<Array3<f64>> {
        if let Some(f) = &self.data.exact_christoffel {
            return Ok(f(x));
        }
        if h <= 0.0 {
            return Err(Error::InvalidParameter("FD step h must be positive".into()));
        }
        let n = self.dim();
        let (_, g_inv) = self.metric_inverse(x)?;
        // dg[i] = ∂_i g
        let dg: Vec<DMatrix<f64>> = (0..n)
            .map(|i| {
                let gp = self.metric(&x.shifted(i, h));
                let gm = self.metric(&x.shifted(i, -h));
                (gp - gm) / (2.0 * h)
            })
            .collect();
        let mut gamma = Array3::<f64>::zeros((n, n, n));
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut sum = 0.0;
                    for m in 0..n {
                        sum += g_inv[(k, m)] * (dg[i][(j, m)] + dg[j][(i, m)] - dg[m][(i, j)]);
                    }
                    gamma[[k, i, j]] = 0.5 * sum;
                }
            }
        }
        Ok(gamma)
    }

    /// Curvature tensor R^m_ijk at `x`, indexed [[m, i, j, k]], in the sign
    /// convention R(X,Y) = -∇_X∇_Y + ∇_Y∇_X + ∇_{[X,Y]}:
    ///
    ///   R^m_ijk = -∂_i Γ^m_jk + ∂_j Γ^m_ik - Γ^l_jk Γ^m_il + Γ^l_ik Γ^m_jl.
    ///
    /// Derivatives of Γ by central differences of step `h` unless the chart
    /// carries a closed-form curvature.
    pub fn riemann(&self, x: &ChartPoint, h: f64) -> Result<Array4<f64>> {
        self.check_point(x)?;
        self.riemann_unchecked(x, h)
    }

    pub(crate) fn riemann_unchecked(&self, x: &ChartPoint, h: f64) -> Result<Array4<f64>> {
        if let Some(f) = &self.data.exact_riemann {
            return Ok(f(x));
        }
        if h <= 0.0 {
            return Err(Error::InvalidParameter("FD step h must be positive".into()));
        }
        let n = self.dim();
        let gamma = self.christoffel_unchecked(x, h)?;
        // dgamma[i] = ∂_i Γ, each indexed [[k, a, b]]
        let mut dgamma = Vec::with_capacity(n);
        for i in 0..n {
            let gp = self.christoffel_unchecked(&x.shifted(i, h), h)?;
            let gm = self.christoffel_unchecked(&x.shifted(i, -h), h)?;
            dgamma.push((gp - gm) / (2.0 * h));
        }
        let mut riem = Array4::<f64>::zeros((n, n, n, n));
        for m in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut v = -dgamma[i][[m, j, k]] + dgamma[j][[m, i, k]];
                        for l in 0..n {
                            v += -gamma[[l, j, k]] * gamma[[m, i, l]]
                                + gamma[[l, i, k]] * gamma[[m, j, l]];
                        }
                        riem[[m, i, j, k]] = v;
                    }
                }
            }
        }
        Ok(riem)
    }

    /// Fully lowered curvature ⟨R(∂_i,∂_j)∂_k, ∂_m⟩, indexed [[i, j, k, m]].
    pub fn riemann_lowered(&self, x: &ChartPoint, h: f64) -> Result<Array4<f64>> {
        let n = self.dim();
        let riem = self.riemann(x, h)?;
        let g = self.metric(x);
        let mut low = Array4::<f64>::zeros((n, n, n, n));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for m in 0..n {
                        let mut v = 0.0;
                        for l in 0..n {
                            v += g[(m, l)] * riem[[l, i, j, k]];
                        }
                        low[[i, j, k, m]] = v;
                    }
                }
            }
        }
        Ok(low)
    }

    /// Orthonormal frame at `x`: Gram–Schmidt of the coordinate basis in
    /// index order, or of a seeded random basis when `seed` is given.
    pub fn orthonormal_frame(&self, x: &ChartPoint, seed: Option<u64>) -> Result<FrameAt> {
        let n = self.dim();
        let (g, _) = self.metric_inverse(x)?;
        let basis = match seed {
            None => DMatrix::<f64>::identity(n, n),
            Some(s) => {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(s);
                loop {
                    let b: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
                    if b.clone().lu().determinant().abs() > 1e-3 {
                        break b;
                    }
                }
            }
        };
        let mut frame = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut v: DVector<f64> = basis.column(j).into();
            for i in 0..j {
                let e_i: DVector<f64> = frame.column(i).into();
                let proj = (e_i.transpose() * &g * &v)[(0, 0)];
                v -= proj * &e_i;
            }
            let norm_sq = (v.transpose() * &g * &v)[(0, 0)];
            if !(norm_sq > 1e-12) {
                return Err(Error::DegenerateMetric { point: x.coords.iter().copied().collect() });
            }
            v /= norm_sq.sqrt();
            frame.set_column(j, &v);
        }
        Ok(FrameAt { vectors: frame })
    }

    /// Scalar curvature Σ_{i,j} ⟨R(e_i,e_j)e_i, e_j⟩ over any orthonormal
    /// frame, evaluated frame-free as g^pr g^qs R_pqrs.
    pub fn scalar_curvature(&self, x: &ChartPoint) -> Result<f64> {
        let n = self.dim();
        let h = self.fd_step();
        let low = self.riemann_lowered(x, h)?;
        let (_, g_inv) = self.metric_inverse(x)?;
        let mut scal = 0.0;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        scal += g_inv[(p, r)] * g_inv[(q, s)] * low[[p, q, r, s]];
                    }
                }
            }
        }
        Ok(scal)
    }

    /// Scalar curvature by a literal frame sum (cross-check route).
    pub fn scalar_curvature_frame(&self, x: &ChartPoint, seed: Option<u64>) -> Result<f64> {
        let n = self.dim();
        let low = self.riemann_lowered(x, self.fd_step())?;
        let frame = self.orthonormal_frame(x, seed)?;
        let e = &frame.vectors;
        let mut scal = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                for p in 0..n {
                    for q in 0..n {
                        for r in 0..n {
                            for s in 0..n {
                                v += e[(p, i)] * e[(q, j)] * e[(r, i)] * e[(s, j)] * low[[p, q, r, s]];
                            }
                        }
                    }
                }
                scal += v;
            }
        }
        Ok(scal)
    }

    /// Integrate a scalar function over the chart with the uniform periodic
    /// grid rule (flat torus only), `nodes` per axis.
    pub fn integrate(&self, nodes: usize, f: &mut dyn FnMut(&ChartPoint) -> f64) -> Result<f64> {
        let quad = self.data.quadrature.ok_or_else(|| Error::Unsupported {
            op: "integrate".into(),
            manifold: self.name().to_string(),
        })?;
        let n = self.dim();
        let step = quad.period / nodes as f64;
        let cell = step.powi(n as i32);
        let mut idx = vec![0usize; n];
        let mut total = 0.0;
        loop {
            let coords: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
            let x = ChartPoint::new(coords);
            let g = self.metric(&x);
            let dv = g.determinant().sqrt() * cell;
            total += f(&x) * dv;
            // advance the multi-index
            let mut axis = 0;
            loop {
                if axis == n {
                    return Ok(total);
                }
                idx[axis] += 1;
                if idx[axis] < nodes {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
        }
    }
}

impl fmt::Debug for ManifoldChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManifoldChart")
            .field("dim", &self.dim())
            .field("name", &self.name())
            .field("fd_step", &self.fd_step())
            .finish()
    }
}

/// An orthonormal frame at a fixed point; column j holds the coordinate
/// components of e_j.
#[derive(Debug, Clone)]
pub struct FrameAt {
    pub vectors: DMatrix<f64>,
}

impl FrameAt {
    /// Max deviation of e_iᵀ g e_j from δ_ij.
    pub fn orthonormality_defect(&self, g: &DMatrix<f64>) -> f64 {
        let gram = self.vectors.transpose() * g * &self.vectors;
        let n = gram.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }
}
