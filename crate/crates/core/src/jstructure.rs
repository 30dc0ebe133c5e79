//! Almost complex structures as endomorphism fields: construction with
//! exact J² = −I, Nijenhuis tensor, the integrability identity, harmonicity
//! residuals, structure defect measures, and energy density.

use nalgebra::DMatrix;
use ndarray::{Array3, ArrayD, IxDyn};

use crate::error::{Error, Result};
use crate::forms::{
    self, hodge_laplace, inner, BundleForm, TangentTensorField, TensorValue,
};
use crate::geometry::{ChartPoint, ManifoldChart};
use crate::sampling::{self, TrigProfile};

/// An endomorphism field J with pointwise J² = −I.
#[derive(Clone)]
pub struct AlmostComplexField {
    field: TangentTensorField,
}

/// Pointwise defect measures of the §2 structure conditions, maximised
/// over a sample set.
#[derive(Debug, Clone)]
pub struct DefectSummary {
    /// max ‖g(J·, J·) − g‖
    pub hermitian: f64,
    /// max ‖(∇_i J)_j + (∇_j J)_i‖ (polarized nearly-Kähler condition)
    pub nearly_kaehler: f64,
    /// max ‖∇J‖
    pub kaehler: f64,
    /// max ‖N(J)‖
    pub integrable: f64,
    /// max ‖ΔJ‖
    pub harmonic: f64,
    pub samples: usize,
}

/// Pointwise harmonicity residuals of Δ J = 0 ⇔ (∇J symmetric, trace-free).
#[derive(Debug, Clone, Copy)]
pub struct HarmonicResiduals {
    /// ‖antisymmetric part of (X,Y) ↦ (∇_X J)Y‖
    pub sym_defect: f64,
    /// ‖Σ_i (∇_{e_i} J)(e_i)‖ = ‖δJ‖
    pub trace_defect: f64,
    /// ‖ΔJ(x)‖
    pub laplace_norm: f64,
}

/// The standard block matrix J₀ with 2×2 blocks [[0,−1],[1,0]].
pub fn standard_block_matrix(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(n, n);
    for b in 0..n / 2 {
        j[(2 * b, 2 * b + 1)] = -1.0;
        j[(2 * b + 1, 2 * b)] = 1.0;
    }
    j
}

fn matrix_to_value(m: &DMatrix<f64>) -> TensorValue {
    let n = m.nrows();
    let mut out = ArrayD::zeros(IxDyn(&[n, n]));
    for k in 0..n {
        for i in 0..n {
            out[[k, i]] = m[(k, i)];
        }
    }
    out
}

fn value_to_matrix(v: &TensorValue) -> DMatrix<f64> {
    let n = v.shape()[0];
    DMatrix::from_fn(n, n, |k, i| v[[k, i]])
}

impl AlmostComplexField {
    /// Wrap an endomorphism field, verifying J² = −I at seeded probe points.
    pub fn new(field: TangentTensorField) -> Result<Self> {
        if field.valence() != 1 {
            return Err(Error::ValenceError { valence: field.valence(), dim: field.chart().dim() });
        }
        let acs = Self { field };
        let mut rng = sampling::rng_from(0x0ac5_0ac5);
        let probes = sampling::sample_points(acs.chart(), 32, &mut rng);
        for x in &probes {
            let defect = acs.square_defect(x);
            if defect > 1e-8 {
                return Err(Error::InvalidParameter(format!(
                    "J^2 + I deviates by {defect:.3e} at {x}"
                )));
            }
        }
        Ok(acs)
    }

    pub fn chart(&self) -> &ManifoldChart {
        self.field.chart()
    }

    pub fn field(&self) -> &TangentTensorField {
        &self.field
    }

    /// The field viewed as a tangent-valued 1-form.
    pub fn form(&self) -> BundleForm {
        BundleForm::new(self.field.clone())
    }

    pub fn matrix_at(&self, x: &ChartPoint) -> DMatrix<f64> {
        value_to_matrix(&self.field.evaluate(x))
    }

    /// Frobenius norm of J(x)² + I.
    pub fn square_defect(&self, x: &ChartPoint) -> f64 {
        let j = self.matrix_at(x);
        let n = j.nrows();
        ((&j * &j) + DMatrix::<f64>::identity(n, n)).norm()
    }

    pub fn trace_at(&self, x: &ChartPoint) -> f64 {
        self.matrix_at(x).trace()
    }
}

/// Chart-constant block-diagonal J₀. Kähler on flat tori, the round Kähler
/// structure on the 2-sphere chart, hermitian but non-harmonic on S⁶.
pub fn make_standard(chart: &ManifoldChart) -> Result<AlmostComplexField> {
    let n = chart.dim();
    if n % 2 != 0 {
        return Err(Error::OddDimension(n));
    }
    let value = matrix_to_value(&standard_block_matrix(n));
    AlmostComplexField::new(TangentTensorField::constant(chart.clone(), value))
}

/// Conjugation parameters for [`make_conjugated_with`].
#[derive(Debug, Clone, Copy)]
pub struct ConjugationProfile {
    pub epsilon: f64,
    pub trig: TrigProfile,
}

impl Default for ConjugationProfile {
    fn default() -> Self {
        Self { epsilon: 0.1, trig: TrigProfile { terms: 3, max_freq: 2, amplitude: 0.5 } }
    }
}

/// J(x) = P(x) J₀ P(x)⁻¹ with P = I + ε·Q(x) for a seeded trigonometric
/// matrix field Q; J² = −I holds exactly by construction. If P turns
/// singular at a probe point the construction retries with ε halved, up
/// to three times.
pub fn make_conjugated(chart: &ManifoldChart, seed: u64) -> Result<AlmostComplexField> {
    make_conjugated_with(chart, seed, ConjugationProfile::default())
}

pub fn make_conjugated_with(
    chart: &ManifoldChart,
    seed: u64,
    profile: ConjugationProfile,
) -> Result<AlmostComplexField> {
    let n = chart.dim();
    if n % 2 != 0 {
        return Err(Error::OddDimension(n));
    }
    let j0 = standard_block_matrix(n);
    let retries = 3;
    for attempt in 0..=retries {
        let epsilon = profile.epsilon / (1 << attempt) as f64;
        let q = sampling::random_tensor_field(chart, 1, seed, profile.trig);
        let mut rng = sampling::rng_from(sampling::split_seed(seed, 0x00b5));
        let probes = sampling::sample_points(chart, 64, &mut rng);
        let singular = probes.iter().any(|x| {
            let p = DMatrix::identity(n, n) + epsilon * value_to_matrix(&q.evaluate(x));
            p.lu().determinant().abs() < 0.05
        });
        if singular {
            continue;
        }
        let j0 = j0.clone();
        let field = TangentTensorField::from_fn(chart.clone(), 1, move |x: &ChartPoint| {
            let p = DMatrix::identity(n, n) + epsilon * value_to_matrix(&q.evaluate(x));
            let p_inv = p.clone().try_inverse().expect("conjugator singular at evaluation");
            matrix_to_value(&(&p * &j0 * p_inv))
        });
        return AlmostComplexField::new(field);
    }
    Err(Error::SingularConjugation(retries))
}

/// J(x) = P(x) J₀ P(x)⁻¹ with P block-diagonal, diag(e^{u_b}, e^{−u_b})
/// per 2×2 block for seeded trigonometric scalars u_b. Always invertible,
/// so the amplitude is unconstrained; useful where a strongly varying J
/// with exact J² = −I is needed (e.g. finite-difference convergence
/// studies).
pub fn make_exp_conjugated(
    chart: &ManifoldChart,
    seed: u64,
    amplitude: f64,
    max_freq: u32,
) -> Result<AlmostComplexField> {
    use rand::Rng;
    let n = chart.dim();
    if n % 2 != 0 {
        return Err(Error::OddDimension(n));
    }
    let mut rng = sampling::rng_from(seed);
    let base = match chart.sample_region() {
        crate::geometry::SampleRegion::PeriodicBox { len } => std::f64::consts::TAU / len,
        crate::geometry::SampleRegion::Ball { .. } => 1.0,
    };
    let lattice = matches!(chart.sample_region(), crate::geometry::SampleRegion::PeriodicBox { .. });
    let f = max_freq as f64;
    // per-block scalars u_b(x) = Σ_t a_t cos(⟨k_t,x⟩+φ_t), wave-vector norm
    // forced into [0.7·max_freq, max_freq] so the spectral content is
    // guaranteed regardless of seed
    let mut blocks = Vec::with_capacity(n / 2);
    for _ in 0..n / 2 {
        let mut waves = Vec::with_capacity(2);
        for _ in 0..2 {
            let k: Vec<f64> = loop {
                let k: Vec<f64> = if lattice {
                    (0..n).map(|_| rng.gen_range(-(f as i64)..=f as i64) as f64 * base).collect()
                } else {
                    (0..n).map(|_| rng.gen_range(-f..=f)).collect()
                };
                let norm: f64 = k.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm >= 0.7 * f * base && norm <= f * base * (n as f64).sqrt() {
                    break k;
                }
            };
            let a = rng.gen_range(0.5..1.0) * amplitude;
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            waves.push((k, a, phase));
        }
        blocks.push(waves);
    }
    let j0 = standard_block_matrix(n);
    let field = TangentTensorField::from_fn(chart.clone(), 1, move |x: &ChartPoint| {
        let mut p = DMatrix::<f64>::zeros(n, n);
        for (b, waves) in blocks.iter().enumerate() {
            let ub: f64 = waves
                .iter()
                .map(|(k, a, phase)| {
                    let arg: f64 = k.iter().zip(x.coords.iter()).map(|(ki, xi)| ki * xi).sum();
                    a * (arg + phase).cos()
                })
                .sum();
            p[(2 * b, 2 * b)] = ub.exp();
            p[(2 * b + 1, 2 * b + 1)] = (-ub).exp();
        }
        let p_inv = p.clone().try_inverse().expect("diagonal exponential is invertible");
        matrix_to_value(&(&p * &j0 * p_inv))
    });
    AlmostComplexField::new(field)
}

/// Nijenhuis tensor components N^k_ij of
/// N(X,Y) = [JX,Y] + [X,JY] + J[JX,JY] − J[X,Y] on coordinate fields:
/// N^k_ij = ∂_i J^k_j − ∂_j J^k_i + J^k_b (J^a_i ∂_a J^b_j − J^a_j ∂_a J^b_i).
pub fn nijenhuis(j: &AlmostComplexField, x: &ChartPoint) -> Result<Array3<f64>> {
    let chart = j.chart();
    let n = chart.dim();
    let h = chart.fd_step();
    let jv = j.field().evaluate(x);
    let dj: Vec<TensorValue> = (0..n)
        .map(|a| {
            let plus = j.field().evaluate(&x.shifted(a, h));
            let minus = j.field().evaluate(&x.shifted(a, -h));
            (plus - minus) / (2.0 * h)
        })
        .collect();
    let mut nij = Array3::<f64>::zeros((n, n, n));
    for k in 0..n {
        for i in 0..n {
            for jj in 0..n {
                let mut v = dj[i][[k, jj]] - dj[jj][[k, i]];
                for b in 0..n {
                    let mut bracket = 0.0;
                    for a in 0..n {
                        bracket += jv[[a, i]] * dj[a][[b, jj]] - jv[[a, jj]] * dj[a][[b, i]];
                    }
                    v += jv[[k, b]] * bracket;
                }
                nij[[k, i, jj]] = v;
            }
        }
    }
    Ok(nij)
}

/// Max over coordinate pairs (X,Y) of ‖dJ(X,Y) − dJ(JX,JY) − N(J)(X,Y)‖;
/// vanishes for every J by the integrability identity.
pub fn integrability_defect(j: &AlmostComplexField, x: &ChartPoint) -> Result<f64> {
    let chart = j.chart();
    let n = chart.dim();
    let dj = forms::exterior_d(&j.form())?.evaluate(x);
    let nij = nijenhuis(j, x)?;
    let jm = j.matrix_at(x);
    let (g, _) = chart.metric_inverse(x)?;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for jj in 0..n {
            // residual vector: dJ(∂_i,∂_j) − dJ(J∂_i, J∂_j) − N(∂_i,∂_j)
            let mut res = vec![0.0; n];
            for k in 0..n {
                let mut v = dj[[k, i, jj]] - nij[[k, i, jj]];
                for a in 0..n {
                    for b in 0..n {
                        v -= jm[(a, i)] * jm[(b, jj)] * dj[[k, a, b]];
                    }
                }
                res[k] = v;
            }
            let mut norm2 = 0.0;
            for k in 0..n {
                for l in 0..n {
                    norm2 += g[(k, l)] * res[k] * res[l];
                }
            }
            worst = worst.max(norm2.max(0.0).sqrt());
        }
    }
    Ok(worst)
}

/// The three residuals of the harmonicity characterization at x.
pub fn harmonic_residuals(j: &AlmostComplexField, x: &ChartPoint) -> Result<HarmonicResiduals> {
    let chart = j.chart();
    let n = chart.dim();
    let (g, g_inv) = chart.metric_inverse(x)?;
    let u = forms::nabla_value(j.field(), x)?;

    // antisymmetric part of (X,Y) ↦ (∇_X J)Y, as a valence-2 tensor
    let mut anti = ArrayD::zeros(IxDyn(&[n, n, n]));
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                anti[[k, a, b]] = 0.5 * (u[[k, a, b]] - u[[k, b, a]]);
            }
        }
    }
    let sym_defect = forms::g_norm_value(&g, &g_inv, &anti);

    // δJ = −g^{ab} (∇J)_{a;b}
    let mut delta = ArrayD::zeros(IxDyn(&[n]));
    for k in 0..n {
        let mut v = 0.0;
        for a in 0..n {
            for b in 0..n {
                v -= g_inv[(a, b)] * u[[k, a, b]];
            }
        }
        delta[[k]] = v;
    }
    let trace_defect = forms::g_norm_value(&g, &g_inv, &delta);

    let lap = hodge_laplace(&j.form())?.evaluate(x);
    let laplace_norm = forms::g_norm_value(&g, &g_inv, &lap);

    Ok(HarmonicResiduals { sym_defect, trace_defect, laplace_norm })
}

/// Structure defect measures maximised over a sample set.
pub fn structure_defects(j: &AlmostComplexField, points: &[ChartPoint]) -> Result<DefectSummary> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("structure_defects needs a nonempty sample set".into()));
    }
    let chart = j.chart();
    let n = chart.dim();
    let laplace = hodge_laplace(&j.form())?;
    let mut summary = DefectSummary {
        hermitian: 0.0,
        nearly_kaehler: 0.0,
        kaehler: 0.0,
        integrable: 0.0,
        harmonic: 0.0,
        samples: points.len(),
    };
    for x in points {
        let (g, g_inv) = chart.metric_inverse(x)?;
        let jm = j.matrix_at(x);

        // hermitian defect: ‖g(J·,J·) − g‖ as a (0,2) tensor
        let d = jm.transpose() * &g * &jm - &g;
        let mut herm2 = 0.0;
        for i in 0..n {
            for jj in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        herm2 += d[(i, jj)] * d[(k, l)] * g_inv[(i, k)] * g_inv[(jj, l)];
                    }
                }
            }
        }
        summary.hermitian = summary.hermitian.max(herm2.max(0.0).sqrt());

        let u = forms::nabla_value(j.field(), x)?;
        let mut sym = ArrayD::zeros(IxDyn(&[n, n, n]));
        for k in 0..n {
            for a in 0..n {
                for b in 0..n {
                    sym[[k, a, b]] = u[[k, a, b]] + u[[k, b, a]];
                }
            }
        }
        summary.nearly_kaehler = summary.nearly_kaehler.max(forms::g_norm_value(&g, &g_inv, &sym));
        summary.kaehler = summary.kaehler.max(forms::g_norm_value(&g, &g_inv, &u));

        let nij = nijenhuis(j, x)?;
        let mut nij_dyn = ArrayD::zeros(IxDyn(&[n, n, n]));
        for k in 0..n {
            for a in 0..n {
                for b in 0..n {
                    nij_dyn[[k, a, b]] = nij[[k, a, b]];
                }
            }
        }
        summary.integrable = summary.integrable.max(forms::g_norm_value(&g, &g_inv, &nij_dyn));

        let lap = laplace.evaluate(x);
        summary.harmonic = summary.harmonic.max(forms::g_norm_value(&g, &g_inv, &lap));
    }
    Ok(summary)
}

/// Energy density e(J) = ½⟨J, J⟩; frame-independent, ≥ n/2 with equality
/// exactly where J is a g-isometry.
pub fn energy_density(j: &AlmostComplexField, x: &ChartPoint) -> Result<f64> {
    Ok(0.5 * inner(j.field(), j.field(), x)?)
}
