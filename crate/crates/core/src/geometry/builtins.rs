//! Built-in manifold registry: flat torus, round sphere in a stereographic
//! chart, and a conformally perturbed sphere for robustness scans.

use std::sync::Arc;

use nalgebra::DMatrix;
use ndarray::{Array3, Array4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ChartDomain, ChartPoint, GridQuadrature, ManifoldChart, SampleRegion};
use crate::error::{Error, Result};

/// Sampling radius for stereographic charts; keeps the conformal factor
/// well away from underflow.
pub const SPHERE_SAMPLE_RADIUS: f64 = 3.0;

/// Flat torus (R/LZ)^n with the identity metric and grid quadrature.
pub fn flat_torus(n: usize, period: f64) -> Result<ManifoldChart> {
    if n == 0 {
        return Err(Error::InvalidParameter("flat_torus needs n >= 1".into()));
    }
    if !(period > 0.0) {
        return Err(Error::InvalidParameter("flat_torus needs period L > 0".into()));
    }
    let dim = n;
    let chart = ManifoldChart::new(
        dim,
        format!("flat_torus(n={n},L={period:.6})"),
        Arc::new(move |_: &ChartPoint| DMatrix::identity(dim, dim)),
        ChartDomain::All,
        SampleRegion::PeriodicBox { len: period },
    )
    .with_exact_christoffel(Arc::new(move |_: &ChartPoint| Array3::zeros((dim, dim, dim))))
    .with_exact_riemann(Arc::new(move |_: &ChartPoint| Array4::zeros((dim, dim, dim, dim))))
    .with_quadrature(GridQuadrature { period });
    Ok(chart)
}

/// Conformal factor of the stereographic chart: g = φ² δ with
/// φ(x) = 2/(1+|x|²).
fn conformal_log_gradient(x: &ChartPoint) -> Vec<f64> {
    // u = ln φ, ∂_i u = −2 x_i / (1+|x|²)
    let r2 = x.coords.norm_squared();
    x.coords.iter().map(|&xi| -2.0 * xi / (1.0 + r2)).collect()
}

fn sphere_metric(n: usize) -> super::MetricFn {
    Arc::new(move |x: &ChartPoint| {
        let r2 = x.coords.norm_squared();
        let phi = 2.0 / (1.0 + r2);
        DMatrix::identity(n, n) * (phi * phi)
    })
}

/// Γ^k_ij of a conformally flat metric e^{2u} δ:
/// Γ^k_ij = δ_ki u_j + δ_kj u_i − δ_ij u_k.
fn conformal_christoffel(n: usize, u_grad: &[f64]) -> Array3<f64> {
    let mut gamma = Array3::zeros((n, n, n));
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                if k == i {
                    v += u_grad[j];
                }
                if k == j {
                    v += u_grad[i];
                }
                if i == j {
                    v -= u_grad[k];
                }
                gamma[[k, i, j]] = v;
            }
        }
    }
    gamma
}

/// Unit round sphere S^n minus a point, in stereographic coordinates:
/// g_ij = 4 δ_ij / (1+|x|²)², with exact Christoffel and curvature.
pub fn round_sphere(n: usize) -> Result<ManifoldChart> {
    if n == 0 {
        return Err(Error::InvalidParameter("round_sphere needs n >= 1".into()));
    }
    let dim = n;
    let chart = ManifoldChart::new(
        dim,
        format!("round_sphere(n={n})"),
        sphere_metric(dim),
        ChartDomain::All,
        SampleRegion::Ball { radius: SPHERE_SAMPLE_RADIUS },
    )
    .with_exact_christoffel(Arc::new(move |x: &ChartPoint| {
        conformal_christoffel(dim, &conformal_log_gradient(x))
    }))
    .with_exact_riemann(Arc::new(move |x: &ChartPoint| {
        // unit sphere, paper convention: R(X,Y)Z = ⟨X,Z⟩Y − ⟨Y,Z⟩X,
        // so R^m_ijk = g_ik δ^m_j − g_jk δ^m_i
        let r2 = x.coords.norm_squared();
        let phi2 = (2.0 / (1.0 + r2)).powi(2);
        let mut riem = Array4::zeros((dim, dim, dim, dim));
        for m in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    for k in 0..dim {
                        let mut v = 0.0;
                        if i == k && j == m {
                            v += phi2;
                        }
                        if j == k && i == m {
                            v -= phi2;
                        }
                        riem[[m, i, j, k]] = v;
                    }
                }
            }
        }
        riem
    }));
    Ok(chart)
}

/// Smooth deterministic bump with |b| <= 1: a short trigonometric
/// polynomial with seeded wave vectors, amplitudes, and phases.
#[derive(Clone)]
struct Bump {
    waves: Vec<(Vec<f64>, f64, f64)>, // (wave vector, amplitude, phase)
}

impl Bump {
    fn new(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5eed_b0b0));
        let terms = 4;
        let mut waves = Vec::with_capacity(terms);
        let mut total = 0.0f64;
        for _ in 0..terms {
            let k: Vec<f64> = (0..n).map(|_| rng.gen_range(-2i32..=2) as f64).collect();
            let k = if k.iter().all(|v| *v == 0.0) {
                let mut k = k;
                k[0] = 1.0;
                k
            } else {
                k
            };
            let a: f64 = rng.gen_range(0.2..1.0);
            let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            total += a;
            waves.push((k, a, phase));
        }
        for w in &mut waves {
            w.1 /= total; // Σ|a| = 1 so |b| <= 1
        }
        Self { waves }
    }

    fn eval(&self, x: &ChartPoint) -> f64 {
        self.waves
            .iter()
            .map(|(k, a, phase)| {
                let arg: f64 = k.iter().zip(x.coords.iter()).map(|(ki, xi)| ki * xi).sum();
                a * (arg + phase).cos()
            })
            .sum()
    }

    fn grad(&self, x: &ChartPoint) -> Vec<f64> {
        let n = x.dim();
        let mut g = vec![0.0; n];
        for (k, a, phase) in &self.waves {
            let arg: f64 = k.iter().zip(x.coords.iter()).map(|(ki, xi)| ki * xi).sum();
            let s = -a * (arg + phase).sin();
            for i in 0..n {
                g[i] += s * k[i];
            }
        }
        g
    }
}

/// Round sphere metric scaled by (1 + ε·b(x)) for a fixed seeded bump b
/// with |b| <= 1. Carries exact Christoffel (conformal change of the round
/// connection); curvature falls back to finite differences.
pub fn perturbed_sphere(n: usize, epsilon: f64, seed: u64) -> Result<ManifoldChart> {
    if n == 0 {
        return Err(Error::InvalidParameter("perturbed_sphere needs n >= 1".into()));
    }
    if !(0.0..=0.2).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "perturbed_sphere needs epsilon in [0, 0.2], got {epsilon}"
        )));
    }
    let dim = n;
    let bump = Bump::new(n, seed);
    let metric_bump = bump.clone();
    let chart = ManifoldChart::new(
        dim,
        format!("perturbed_sphere(n={n},eps={epsilon:.3},seed={seed})"),
        Arc::new(move |x: &ChartPoint| {
            let r2 = x.coords.norm_squared();
            let phi = 2.0 / (1.0 + r2);
            let scale = (1.0 + epsilon * metric_bump.eval(x)) * phi * phi;
            DMatrix::identity(dim, dim) * scale
        }),
        ChartDomain::All,
        SampleRegion::Ball { radius: SPHERE_SAMPLE_RADIUS },
    )
    .with_exact_christoffel(Arc::new(move |x: &ChartPoint| {
        // g = e^{2w} ĝ with ĝ the round metric (itself conformal to δ), so
        // in total g = e^{2(u+w)} δ with e^{2w} = 1 + ε b.
        let mut u = conformal_log_gradient(x);
        let b = bump.eval(x);
        let db = bump.grad(x);
        let denom = 2.0 * (1.0 + epsilon * b);
        for i in 0..dim {
            u[i] += epsilon * db[i] / denom;
        }
        conformal_christoffel(dim, &u)
    }));
    Ok(chart)
}

/// Parameters for the named registry.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinParams {
    pub n: Option<usize>,
    pub period: Option<f64>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
}

/// Names accepted by [`builtin`].
pub fn builtin_names() -> &'static [&'static str] {
    &["flat_torus", "round_sphere", "perturbed_sphere"]
}

/// Construct a registry manifold by name.
pub fn builtin(name: &str, params: &BuiltinParams) -> Result<ManifoldChart> {
    let n = params
        .n
        .ok_or_else(|| Error::InvalidParameter(format!("{name} needs a dimension n")))?;
    match name {
        "flat_torus" => flat_torus(n, params.period.unwrap_or(std::f64::consts::TAU)),
        "round_sphere" => round_sphere(n),
        "perturbed_sphere" => {
            perturbed_sphere(n, params.epsilon.unwrap_or(0.0), params.seed.unwrap_or(0))
        }
        _ => Err(Error::UnknownManifold(name.to_string())),
    }
}
