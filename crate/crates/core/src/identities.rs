//! Residual-based verification of the numbered identities: the Weitzenböck
//! formula, the Bochner formula and its harmonic specialization, the
//! scalar-curvature bound, the integral harmonicity criterion on flat tori,
//! the S⁶ curvature-contraction obstruction, and the trace identities.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::forms::{
    self, hodge_laplace, rough_laplacian, weitzenboeck_term, BundleForm, TangentTensorField,
};
use crate::geometry::{ChartPoint, ManifoldChart};
use crate::jstructure::{standard_block_matrix, AlmostComplexField};
use crate::sampling;

/// Outcome of one named residual check over a sample set.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub name: String,
    pub manifold: String,
    pub samples: usize,
    pub h: f64,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: u64,
}

impl ResidualReport {
    pub fn from_residuals(
        name: impl Into<String>,
        chart: &ManifoldChart,
        residuals: &[f64],
        tolerance: f64,
        seed: u64,
    ) -> Self {
        let max_residual = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let max_residual = if residuals.is_empty() { 0.0 } else { max_residual };
        let mean_residual = if residuals.is_empty() {
            0.0
        } else {
            residuals.iter().sum::<f64>() / residuals.len() as f64
        };
        Self {
            name: name.into(),
            manifold: chart.name().to_string(),
            samples: residuals.len(),
            h: chart.fd_step(),
            max_residual,
            mean_residual,
            tolerance,
            pass: max_residual <= tolerance,
            seed,
        }
    }
}

/// The four scalars of the Bochner formula at a point.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureTerms {
    /// Σ ⟨R(e_i,e_j)Je_i, Je_j⟩
    pub term2: f64,
    /// Σ ⟨J R(e_i,e_j)e_i, Je_j⟩
    pub term3: f64,
    /// |∇J|²
    pub grad_norm_sq: f64,
    /// Δe(J), the function Laplacian (metric trace of the Hessian)
    pub energy_laplacian: f64,
}

/// Function Laplacian Δf = g^ij (∂_i ∂_j f − Γ^k_ij ∂_k f) by finite
/// differences on the scalar field. This is the analyst's sign (trace of
/// the Hessian), the one the Bochner and trace identities use; it is never
/// mixed with the Hodge Δ on forms.
pub fn function_laplacian(
    chart: &ManifoldChart,
    f: &dyn Fn(&ChartPoint) -> f64,
    x: &ChartPoint,
    h: f64,
) -> Result<f64> {
    let n = chart.dim();
    let (_, g_inv) = chart.metric_inverse(x)?;
    let gamma = chart.christoffel_unchecked(x, h)?;
    let f0 = f(x);
    let mut grad = vec![0.0; n];
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    for i in 0..n {
        plus[i] = f(&x.shifted(i, h));
        minus[i] = f(&x.shifted(i, -h));
        grad[i] = (plus[i] - minus[i]) / (2.0 * h);
    }
    let mut lap = 0.0;
    for i in 0..n {
        for j in 0..n {
            let ginv = g_inv[(i, j)];
            if ginv == 0.0 {
                continue;
            }
            let hess = if i == j {
                (plus[i] - 2.0 * f0 + minus[i]) / (h * h)
            } else {
                let pp = f(&x.shifted(i, h).shifted(j, h));
                let pm = f(&x.shifted(i, h).shifted(j, -h));
                let mp = f(&x.shifted(i, -h).shifted(j, h));
                let mm = f(&x.shifted(i, -h).shifted(j, -h));
                (pp - pm - mp + mm) / (4.0 * h * h)
            };
            let mut v = hess;
            for k in 0..n {
                v -= gamma[[k, i, j]] * grad[k];
            }
            lap += ginv * v;
        }
    }
    Ok(lap)
}

/// term2 and term3 for a pointwise endomorphism matrix at x:
/// term2 = g^pc g^rd J^a_c J^b_d R_prab,
/// term3 = g^pc g^rd J^a_l R^l_prc J^b_d g_ab.
pub fn pointwise_curvature_terms(
    chart: &ManifoldChart,
    x: &ChartPoint,
    j: &DMatrix<f64>,
) -> Result<(f64, f64)> {
    let n = chart.dim();
    let h = chart.fd_step();
    let (g, g_inv) = chart.metric_inverse(x)?;
    let riem = chart.riemann_unchecked(x, h)?;
    let low = {
        let mut low = ndarray::Array4::<f64>::zeros((n, n, n, n));
        for i in 0..n {
            for jj in 0..n {
                for k in 0..n {
                    for m in 0..n {
                        let mut v = 0.0;
                        for l in 0..n {
                            v += g[(m, l)] * riem[[l, i, jj, k]];
                        }
                        low[[i, jj, k, m]] = v;
                    }
                }
            }
        }
        low
    };

    let mut term2 = 0.0;
    let mut term3 = 0.0;
    for p in 0..n {
        for c in 0..n {
            let gpc = g_inv[(p, c)];
            if gpc == 0.0 {
                continue;
            }
            for r in 0..n {
                for d in 0..n {
                    let grd = g_inv[(r, d)];
                    if grd == 0.0 {
                        continue;
                    }
                    let w = gpc * grd;
                    for a in 0..n {
                        for b in 0..n {
                            term2 += w * j[(a, c)] * j[(b, d)] * low[[p, r, a, b]];
                        }
                    }
                    // J(R(∂_p,∂_r)∂_c) inner J∂_d
                    for l in 0..n {
                        let rl = riem[[l, p, r, c]];
                        if rl == 0.0 {
                            continue;
                        }
                        for a in 0..n {
                            for b in 0..n {
                                term3 += w * j[(a, l)] * rl * j[(b, d)] * g[(a, b)];
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((term2, term3))
}

/// All four Bochner scalars for an almost complex field at x.
pub fn curvature_terms(j: &AlmostComplexField, x: &ChartPoint) -> Result<CurvatureTerms> {
    let chart = j.chart().clone();
    let jm = j.matrix_at(x);
    let (term2, term3) = pointwise_curvature_terms(&chart, x, &jm)?;
    let nabla = forms::nabla_value(j.field(), x)?;
    let (g, g_inv) = chart.metric_inverse(x)?;
    let grad_norm_sq = forms::inner_value(&g, &g_inv, &nabla, &nabla);
    let j_clone = j.clone();
    let energy = move |y: &ChartPoint| {
        crate::jstructure::energy_density(&j_clone, y).expect("energy density evaluation failed")
    };
    let energy_laplacian = function_laplacian(&chart, &energy, x, chart.fd_step())?;
    Ok(CurvatureTerms { term2, term3, grad_norm_sq, energy_laplacian })
}

/// Weitzenböck residual ‖Δω + ∇²ω − S‖ over the sample points.
pub fn check_weitzenboeck(
    omega: &BundleForm,
    points: &[ChartPoint],
    tolerance: f64,
    seed: u64,
) -> Result<ResidualReport> {
    let chart = omega.chart().clone();
    let p = omega.degree();
    let n = chart.dim();
    if p == 0 || p >= n {
        return Err(Error::ValenceError { valence: p, dim: n });
    }
    let hodge = hodge_laplace(omega)?;
    let rough = rough_laplacian(omega.field());
    let wterm = weitzenboeck_term(omega)?;
    let mut residuals = Vec::with_capacity(points.len());
    for x in points {
        let (g, g_inv) = chart.metric_inverse(x)?;
        let mut resid = hodge.evaluate(x) + rough.evaluate(x);
        resid = resid - wterm.evaluate(x);
        residuals.push(forms::g_norm_value(&g, &g_inv, &resid));
    }
    Ok(ResidualReport::from_residuals("weitzenboeck", &chart, &residuals, tolerance, seed))
}

/// Bochner residual reports: the general identity
/// Δe + ⟨ΔJ,J⟩ = |∇J|² − term2 + term3 always, plus the harmonic
/// specialization (⟨ΔJ,J⟩ dropped) when ‖ΔJ‖ ≤ tolerance at all points.
pub fn check_bochner(
    j: &AlmostComplexField,
    points: &[ChartPoint],
    tolerance: f64,
    seed: u64,
) -> Result<Vec<ResidualReport>> {
    let chart = j.chart().clone();
    let laplace = hodge_laplace(&j.form())?;
    let mut general = Vec::with_capacity(points.len());
    let mut specialized = Vec::with_capacity(points.len());
    let mut max_harmonic_defect: f64 = 0.0;
    for x in points {
        let ct = curvature_terms(j, x)?;
        let (g, g_inv) = chart.metric_inverse(x)?;
        let lap = laplace.evaluate(x);
        let lap_inner = forms::inner_value(&g, &g_inv, &lap, &j.field().evaluate(x));
        let rhs = ct.grad_norm_sq - ct.term2 + ct.term3;
        general.push((ct.energy_laplacian + lap_inner - rhs).abs());
        specialized.push((ct.energy_laplacian - rhs).abs());
        max_harmonic_defect = max_harmonic_defect.max(forms::g_norm_value(&g, &g_inv, &lap));
    }
    let mut reports =
        vec![ResidualReport::from_residuals("bochner", &chart, &general, tolerance, seed)];
    if max_harmonic_defect <= tolerance {
        reports.push(ResidualReport::from_residuals(
            "bochner.harmonic",
            &chart,
            &specialized,
            tolerance,
            seed,
        ));
    }
    Ok(reports)
}

/// Scalar-curvature bound for hermitian harmonic structures:
/// residual of scal + |∇J|² − term2 plus the inequality scal ≤ term2.
/// When the hypotheses (hermitian, harmonic) fail at a sampled point, a
/// vacuous `.hypothesis_not_met` report is returned instead of a failure.
pub fn check_scal_bound(
    j: &AlmostComplexField,
    points: &[ChartPoint],
    tolerance: f64,
    seed: u64,
) -> Result<ResidualReport> {
    let chart = j.chart().clone();
    let laplace = hodge_laplace(&j.form())?;
    let hypothesis_tol = tolerance.max(1e-6);
    let mut residuals = Vec::with_capacity(points.len());
    for x in points {
        let (g, g_inv) = chart.metric_inverse(x)?;
        let jm = j.matrix_at(x);
        let herm = (jm.transpose() * &g * &jm - &g).norm();
        let harm = forms::g_norm_value(&g, &g_inv, &laplace.evaluate(x));
        if herm > hypothesis_tol || harm > hypothesis_tol {
            return Ok(ResidualReport::from_residuals(
                "scal_bound.hypothesis_not_met",
                &chart,
                &[],
                tolerance,
                seed,
            ));
        }
        let ct = curvature_terms(j, x)?;
        let scal = chart.scalar_curvature(x)?;
        let mechanism = (scal + ct.grad_norm_sq - ct.term2).abs();
        let inequality_excess = (scal - ct.term2).max(0.0);
        residuals.push(mechanism.max(inequality_excess));
    }
    Ok(ResidualReport::from_residuals("scal_bound", &chart, &residuals, tolerance, seed))
}

/// Result of the integral harmonicity criterion on a flat torus.
#[derive(Debug, Clone)]
pub struct IntegralCriterion {
    /// ∫ (|∇J|² − term2 + term3) dv by periodic grid quadrature
    pub integral: f64,
    /// max ‖ΔJ‖ over the sample points
    pub harmonic_defect: f64,
    pub integral_tolerance: f64,
    pub defect_tolerance: f64,
    pub grid: usize,
}

impl IntegralCriterion {
    pub fn integral_small(&self) -> bool {
        self.integral.abs() <= self.integral_tolerance
    }

    pub fn defect_small(&self) -> bool {
        self.harmonic_defect <= self.defect_tolerance
    }

    /// The criterion is the biconditional: integral ≈ 0 ⇔ harmonic defect ≈ 0.
    pub fn consistent(&self) -> bool {
        self.integral_small() == self.defect_small()
    }

    /// One report row: residual 0 when the biconditional holds, 1 otherwise.
    pub fn to_report(&self, chart: &ManifoldChart, seed: u64) -> ResidualReport {
        let r = if self.consistent() { 0.0 } else { 1.0 };
        ResidualReport {
            name: "integral_criterion".into(),
            manifold: chart.name().to_string(),
            samples: self.grid * self.grid,
            h: chart.fd_step(),
            max_residual: r,
            mean_residual: r,
            tolerance: 0.5,
            pass: r <= 0.5,
            seed,
        }
    }
}

/// Integral criterion: J is harmonic iff ∫(|∇J|² − term2 + term3) dv = 0.
/// Flat torus only (the one chart with an honest quadrature rule).
pub fn check_integral_criterion(
    j: &AlmostComplexField,
    grid: usize,
    integral_tolerance: f64,
    defect_tolerance: f64,
    defect_points: &[ChartPoint],
) -> Result<IntegralCriterion> {
    let chart = j.chart().clone();
    if chart.quadrature().is_none() {
        return Err(Error::Unsupported {
            op: "check_integral_criterion".into(),
            manifold: chart.name().to_string(),
        });
    }
    let mut integrand = |x: &ChartPoint| -> f64 {
        let ct = curvature_terms(j, x).expect("curvature terms failed");
        ct.grad_norm_sq - ct.term2 + ct.term3
    };
    let integral = chart.integrate(grid, &mut integrand)?;
    let laplace = hodge_laplace(&j.form())?;
    let mut harmonic_defect: f64 = 0.0;
    for x in defect_points {
        let (g, g_inv) = chart.metric_inverse(x)?;
        harmonic_defect = harmonic_defect.max(forms::g_norm_value(&g, &g_inv, &laplace.evaluate(x)));
    }
    Ok(IntegralCriterion {
        integral,
        harmonic_defect,
        integral_tolerance,
        defect_tolerance,
        grid,
    })
}

/// Result of the S⁶ obstruction scan.
#[derive(Debug, Clone)]
pub struct ObstructionScan {
    /// min over (point, J) of term3 − term2
    pub min_gap: f64,
    /// mean of term3 − term2 over all samples
    pub mean_gap: f64,
    /// gap range over the g-orthogonal J samples (index oracle target 24)
    pub orthogonal_gap_min: f64,
    pub orthogonal_gap_max: f64,
    /// lower bound for the Bochner integrand |∇J|² − term2 + term3 (≥ gap
    /// since |∇J|² ≥ 0)
    pub min_integrand_bound: f64,
    pub points: usize,
    pub j_samples: usize,
    pub margin: f64,
}

impl ObstructionScan {
    pub fn pass(&self) -> bool {
        self.min_gap >= self.margin
    }

    /// Report row with max_residual = margin − min_gap (negative when the
    /// obstruction holds with room), tolerance 0.
    pub fn to_report(&self, chart: &ManifoldChart, seed: u64) -> ResidualReport {
        ResidualReport {
            name: "s6_obstruction".into(),
            manifold: chart.name().to_string(),
            samples: self.points * self.j_samples,
            h: chart.fd_step(),
            max_residual: self.margin - self.min_gap,
            mean_residual: self.margin - self.mean_gap,
            tolerance: 0.0,
            pass: self.pass(),
            seed,
        }
    }
}

/// Scan term3 − term2 over sampled points and sampled pointwise J with
/// J² = −I; the first J sample at each point is the g-orthogonal one.
/// Strict positivity of the minimum is the numerical content of the
/// obstruction (no harmonic complex structure under this curvature).
pub fn s6_obstruction_scan(
    chart: &ManifoldChart,
    seed: u64,
    n_points: usize,
    j_samples: usize,
    margin: f64,
) -> Result<ObstructionScan> {
    let n = chart.dim();
    if n % 2 != 0 {
        return Err(Error::OddDimension(n));
    }
    let j0 = standard_block_matrix(n);
    let mut rng = sampling::rng_from(sampling::split_seed(seed, 0x5ca0));
    let points = sampling::sample_points(chart, n_points, &mut rng);
    let mut min_gap = f64::INFINITY;
    let mut sum_gap = 0.0;
    let mut ortho_min = f64::INFINITY;
    let mut ortho_max = f64::NEG_INFINITY;
    let mut count = 0usize;
    for x in &points {
        let frame = chart.orthonormal_frame(x, None)?;
        for sample in 0..j_samples.max(1) {
            let jm = if sample == 0 {
                // g-orthogonal sample: E J₀ E⁻¹
                let e = &frame.vectors;
                let e_inv = e.clone().try_inverse().ok_or_else(|| Error::DegenerateMetric {
                    point: x.coords.iter().copied().collect(),
                })?;
                e * &j0 * e_inv
            } else {
                let p = sampling::random_conjugator(n, 0.25, &mut rng);
                let p_inv = p.clone().try_inverse().expect("conjugator guarded invertible");
                &p * &j0 * p_inv
            };
            let (term2, term3) = pointwise_curvature_terms(chart, x, &jm)?;
            let gap = term3 - term2;
            min_gap = min_gap.min(gap);
            sum_gap += gap;
            count += 1;
            if sample == 0 {
                ortho_min = ortho_min.min(gap);
                ortho_max = ortho_max.max(gap);
            }
        }
    }
    Ok(ObstructionScan {
        min_gap,
        mean_gap: sum_gap / count.max(1) as f64,
        orthogonal_gap_min: ortho_min,
        orthogonal_gap_max: ortho_max,
        min_integrand_bound: min_gap,
        points: points.len(),
        j_samples: j_samples.max(1),
        margin,
    })
}

/// Trace identity: Trace ΔA + Δ_fn(Trace A) = 0 for any endomorphism field.
pub fn check_trace_theorem(
    a: &TangentTensorField,
    points: &[ChartPoint],
    tolerance: f64,
    seed: u64,
) -> Result<ResidualReport> {
    if a.valence() != 1 {
        return Err(Error::ValenceError { valence: a.valence(), dim: a.chart().dim() });
    }
    let chart = a.chart().clone();
    let n = chart.dim();
    let laplace = hodge_laplace(&BundleForm::new(a.clone()))?;
    let a_inner = a.clone();
    let trace_fn = move |y: &ChartPoint| {
        let v = a_inner.evaluate(y);
        (0..n).map(|k| v[[k, k]]).sum::<f64>()
    };
    let mut residuals = Vec::with_capacity(points.len());
    for x in points {
        let lap = laplace.evaluate(x);
        let trace_lap: f64 = (0..n).map(|k| lap[[k, k]]).sum();
        let lap_trace = function_laplacian(&chart, &trace_fn, x, chart.fd_step())?;
        residuals.push((trace_lap + lap_trace).abs());
    }
    Ok(ResidualReport::from_residuals("trace_theorem", &chart, &residuals, tolerance, seed))
}

/// ∫ Trace ΔA over the flat torus by grid quadrature.
pub fn check_integral_trace(
    a: &TangentTensorField,
    grid: usize,
    tolerance: f64,
    seed: u64,
) -> Result<ResidualReport> {
    if a.valence() != 1 {
        return Err(Error::ValenceError { valence: a.valence(), dim: a.chart().dim() });
    }
    let chart = a.chart().clone();
    if chart.quadrature().is_none() {
        return Err(Error::Unsupported {
            op: "check_integral_trace".into(),
            manifold: chart.name().to_string(),
        });
    }
    let n = chart.dim();
    let laplace = hodge_laplace(&BundleForm::new(a.clone()))?;
    let mut integrand = |x: &ChartPoint| -> f64 {
        let lap = laplace.evaluate(x);
        (0..n).map(|k| lap[[k, k]]).sum::<f64>()
    };
    let integral = chart.integrate(grid, &mut integrand)?;
    let mut report = ResidualReport::from_residuals(
        "integral_trace",
        &chart,
        &[integral.abs()],
        tolerance,
        seed,
    );
    report.samples = grid.pow(n as u32);
    Ok(report)
}

/// Pointwise |Trace ΔJ| residuals (zero for any almost complex structure
/// since trace J ≡ 0).
pub fn check_trace_of_j(
    j: &AlmostComplexField,
    points: &[ChartPoint],
    tolerance: f64,
    seed: u64,
) -> Result<ResidualReport> {
    let chart = j.chart().clone();
    let n = chart.dim();
    let laplace = hodge_laplace(&j.form())?;
    let mut residuals = Vec::with_capacity(points.len());
    for x in points {
        let lap = laplace.evaluate(x);
        let trace_lap: f64 = (0..n).map(|k| lap[[k, k]]).sum();
        residuals.push(trace_lap.abs());
    }
    Ok(ResidualReport::from_residuals("trace_of_j", &chart, &residuals, tolerance, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{flat_torus, round_sphere};
    use crate::jstructure::{make_conjugated, make_standard};
    use crate::sampling::{random_form, rng_from, sample_points, TrigProfile};
    use approx::assert_abs_diff_eq;
    use ndarray::IxDyn;

    fn torus2() -> ManifoldChart {
        flat_torus(2, std::f64::consts::TAU).unwrap()
    }

    #[test]
    fn report_invariants() {
        let chart = torus2();
        let r = ResidualReport::from_residuals("demo", &chart, &[1.0, 3.0, 2.0], 5.0, 7);
        assert!(r.pass);
        assert_abs_diff_eq!(r.max_residual, 3.0);
        assert_abs_diff_eq!(r.mean_residual, 2.0);
        assert!(r.mean_residual <= r.max_residual);
        let f = ResidualReport::from_residuals("demo", &chart, &[1.0, 3.0], 2.0, 7);
        assert!(!f.pass);
    }

    #[test]
    fn weitzenboeck_flat_torus_random_form() {
        let chart = torus2();
        let omega = random_form(&chart, 1, 5, TrigProfile::default());
        let mut rng = rng_from(2);
        let points = sample_points(&chart, 20, &mut rng);
        let report = check_weitzenboeck(&omega, &points, 1e-5, 5).unwrap();
        assert!(report.pass, "flat-torus Weitzenböck residual {}", report.max_residual);
    }

    #[test]
    fn weitzenboeck_sphere_endomorphism_field() {
        let chart = round_sphere(2).unwrap();
        let omega = random_form(&chart, 1, 8, TrigProfile::default());
        let mut rng = rng_from(3);
        let points = sample_points(&chart, 15, &mut rng);
        let report = check_weitzenboeck(&omega, &points, 1e-5, 8).unwrap();
        assert!(report.pass, "sphere Weitzenböck residual {}", report.max_residual);
    }

    #[test]
    fn weitzenboeck_s6_standard_j() {
        let chart = round_sphere(6).unwrap();
        let j = make_standard(&chart).unwrap();
        let mut rng = rng_from(4);
        let points = sample_points(&chart, 5, &mut rng);
        let report = check_weitzenboeck(&j.form(), &points, 1e-5, 4).unwrap();
        assert!(report.pass, "S6 Weitzenböck residual {}", report.max_residual);
    }

    #[test]
    fn weitzenboeck_degree_two_form() {
        let chart = round_sphere(3).unwrap();
        let omega = random_form(&chart, 2, 13, TrigProfile::default());
        let mut rng = rng_from(6);
        let points = sample_points(&chart, 5, &mut rng);
        let report = check_weitzenboeck(&omega, &points, 1e-5, 13).unwrap();
        assert!(report.pass, "p=2 Weitzenböck residual {}", report.max_residual);
    }

    #[test]
    fn curvature_terms_flat_torus_vanish() {
        let chart = torus2();
        let j = make_conjugated(&chart, 21).unwrap();
        let x = ChartPoint::new(vec![0.7, 2.1]);
        let ct = curvature_terms(&j, &x).unwrap();
        assert_abs_diff_eq!(ct.term2, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ct.term3, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn curvature_terms_sphere_match_index_oracle() {
        // brute-force oracle in an explicit orthonormal frame with
        // R_ijkm = δ_ik δ_jm − δ_jk δ_im on the unit sphere
        let chart = round_sphere(6).unwrap();
        let j = make_standard(&chart).unwrap();
        let x = ChartPoint::new(vec![0.4, -0.2, 0.7, 0.1, -0.5, 0.3]);
        let ct = curvature_terms(&j, &x).unwrap();
        // term2 = (trace J)² + n = n for any pointwise J² = −I
        assert_abs_diff_eq!(ct.term2, 6.0, epsilon = 1e-8);
        // orthogonal J: term3 = (n−1)·|J|² = 5·6 = 30 (not the paper's 36)
        assert_abs_diff_eq!(ct.term3, 30.0, epsilon = 1e-8);
    }

    #[test]
    fn bochner_kaehler_sphere_terms() {
        let chart = round_sphere(2).unwrap();
        let j = make_standard(&chart).unwrap();
        let x = ChartPoint::new(vec![0.3, -0.6]);
        let ct = curvature_terms(&j, &x).unwrap();
        // Kähler: Δe = 0, |∇J|² = 0, and term2 = term3 = 2 on the unit 2-sphere
        assert!(ct.energy_laplacian.abs() < 1e-6);
        assert!(ct.grad_norm_sq < 1e-10);
        assert_abs_diff_eq!(ct.term2, 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(ct.term3, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn bochner_flat_torus_conjugated() {
        let chart = torus2();
        let j = make_conjugated(&chart, 33).unwrap();
        let mut rng = rng_from(9);
        let points = sample_points(&chart, 15, &mut rng);
        let reports = check_bochner(&j, &points, 1e-4, 33).unwrap();
        assert!(reports[0].pass, "Bochner residual {}", reports[0].max_residual);
    }

    #[test]
    fn scal_bound_kaehler_equality() {
        let chart = round_sphere(2).unwrap();
        let j = make_standard(&chart).unwrap();
        let mut rng = rng_from(10);
        let points = sample_points(&chart, 10, &mut rng);
        let report = check_scal_bound(&j, &points, 1e-5, 10).unwrap();
        assert_eq!(report.name, "scal_bound");
        assert!(report.pass, "scal bound residual {}", report.max_residual);
    }

    #[test]
    fn scal_bound_hypothesis_gating() {
        let chart = torus2();
        let j = make_conjugated(&chart, 11).unwrap(); // not harmonic
        let mut rng = rng_from(11);
        let points = sample_points(&chart, 5, &mut rng);
        let report = check_scal_bound(&j, &points, 1e-5, 11).unwrap();
        assert_eq!(report.name, "scal_bound.hypothesis_not_met");
        assert!(report.pass);
    }

    #[test]
    fn integral_criterion_kaehler_and_conjugated() {
        let chart = torus2();
        let mut rng = rng_from(12);
        let points = sample_points(&chart, 20, &mut rng);

        let j0 = make_standard(&chart).unwrap();
        let ic = check_integral_criterion(&j0, 16, 1e-8, 1e-8, &points).unwrap();
        assert!(ic.integral.abs() <= 1e-8, "integral {}", ic.integral);
        assert!(ic.harmonic_defect <= 1e-8, "defect {}", ic.harmonic_defect);
        assert!(ic.consistent());

        let jc = make_conjugated(&chart, 13).unwrap();
        let ic = check_integral_criterion(&jc, 16, 1e-8, 1e-8, &points).unwrap();
        assert!(ic.integral > 1e-3, "integral {}", ic.integral);
        assert!(ic.harmonic_defect > 1e-2, "defect {}", ic.harmonic_defect);
        assert!(ic.consistent());
    }

    #[test]
    fn integral_criterion_rejects_spheres() {
        let chart = round_sphere(2).unwrap();
        let j = make_standard(&chart).unwrap();
        assert!(matches!(
            check_integral_criterion(&j, 8, 1e-8, 1e-8, &[]),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn obstruction_scan_round_sphere() {
        let chart = round_sphere(6).unwrap();
        let scan = s6_obstruction_scan(&chart, 42, 20, 8, 20.0).unwrap();
        assert!(scan.pass(), "min gap {}", scan.min_gap);
        // orthogonal samples sit exactly at the index-oracle value 24
        assert!((scan.orthogonal_gap_min - 24.0).abs() < 1e-7, "{}", scan.orthogonal_gap_min);
        assert!((scan.orthogonal_gap_max - 24.0).abs() < 1e-7, "{}", scan.orthogonal_gap_max);
        // non-orthogonal samples only increase the gap
        assert!(scan.min_gap >= 24.0 - 1e-7);
    }

    #[test]
    fn trace_theorem_on_torus_and_sphere() {
        for chart in [torus2(), round_sphere(2).unwrap()] {
            let a = crate::sampling::random_tensor_field(&chart, 1, 19, TrigProfile::default());
            let mut rng = rng_from(19);
            let points = sample_points(&chart, 10, &mut rng);
            let report = check_trace_theorem(&a, &points, 1e-4, 19).unwrap();
            assert!(report.pass, "{}: trace residual {}", chart.name(), report.max_residual);
        }
    }

    #[test]
    fn integral_trace_small_on_torus() {
        let chart = torus2();
        let a = crate::sampling::random_tensor_field(&chart, 1, 23, TrigProfile::default());
        let report = check_integral_trace(&a, 32, 1e-6, 23).unwrap();
        assert!(report.pass, "integral trace {}", report.max_residual);
    }

    #[test]
    fn integral_trace_constant_field_is_zero() {
        let chart = torus2();
        let mut v = ndarray::ArrayD::zeros(IxDyn(&[2, 2]));
        v[[0, 1]] = 3.0;
        v[[1, 0]] = -1.0;
        let a = TangentTensorField::constant(chart.clone(), v);
        let report = check_integral_trace(&a, 8, 1e-12, 0).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn trace_of_j_vanishes() {
        let chart = torus2();
        let j = make_conjugated(&chart, 29).unwrap();
        let mut rng = rng_from(29);
        let points = sample_points(&chart, 10, &mut rng);
        let report = check_trace_of_j(&j, &points, 1e-5, 29).unwrap();
        assert!(report.pass, "trace ΔJ residual {}", report.max_residual);
    }

    #[test]
    fn function_laplacian_matches_closed_form() {
        // flat metric: Δf = Σ ∂²f; f = sin(x)cos(y) ⇒ Δf = −2f
        let chart = torus2();
        let f = |x: &ChartPoint| x.coords[0].sin() * x.coords[1].cos();
        let x = ChartPoint::new(vec![0.7, 1.3]);
        let lap = function_laplacian(&chart, &f, &x, 1e-4).unwrap();
        assert_abs_diff_eq!(lap, -2.0 * f(&x), epsilon = 1e-6);
    }
}
