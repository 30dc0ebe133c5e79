//! Seeded sampling: chart points, smooth random coefficient fields, and
//! deterministic seed splitting for independent per-check streams.

use nalgebra::DMatrix;
use ndarray::{ArrayD, IxDyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forms::{BundleForm, TangentTensorField, TensorValue};
use crate::geometry::{ChartPoint, ManifoldChart, SampleRegion};

/// Derive an independent sub-seed from a root seed and a fixed tag
/// (splitmix64 finalizer).
pub fn split_seed(root: u64, tag: u64) -> u64 {
    let mut z = root ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draw `count` points from the chart's sample region.
pub fn sample_points(chart: &ManifoldChart, count: usize, rng: &mut ChaCha8Rng) -> Vec<ChartPoint> {
    let n = chart.dim();
    (0..count)
        .map(|_| match chart.sample_region() {
            SampleRegion::PeriodicBox { len } => {
                ChartPoint::new((0..n).map(|_| rng.gen_range(0.0..len)).collect())
            }
            SampleRegion::Ball { radius } => loop {
                let coords: Vec<f64> = (0..n).map(|_| rng.gen_range(-radius..radius)).collect();
                let norm2: f64 = coords.iter().map(|c| c * c).sum();
                if norm2 <= radius * radius {
                    break ChartPoint::new(coords);
                }
            },
        })
        .collect()
}

/// Spectral profile of a random trigonometric-polynomial field.
#[derive(Debug, Clone, Copy)]
pub struct TrigProfile {
    /// number of wave vectors shared by all components
    pub terms: usize,
    /// max frequency per axis (integer multiples of 2π/L on tori)
    pub max_freq: u32,
    /// amplitude scale per term
    pub amplitude: f64,
}

impl Default for TrigProfile {
    fn default() -> Self {
        Self { terms: 3, max_freq: 2, amplitude: 0.5 }
    }
}

#[derive(Clone)]
struct TrigComponent {
    amps: Vec<f64>,
    phases: Vec<f64>,
}

/// Smooth random tangent-valued covariant q-tensor field. All components
/// share `terms` seeded wave vectors; amplitudes and phases vary per
/// component. On periodic charts the wave vectors are lattice frequencies
/// so the field is exactly periodic.
pub fn random_tensor_field(
    chart: &ManifoldChart,
    valence: usize,
    seed: u64,
    profile: TrigProfile,
) -> TangentTensorField {
    let n = chart.dim();
    let mut rng = rng_from(seed);
    let base_freq = match chart.sample_region() {
        SampleRegion::PeriodicBox { len } => std::f64::consts::TAU / len,
        SampleRegion::Ball { .. } => 1.0,
    };
    let lattice = matches!(chart.sample_region(), SampleRegion::PeriodicBox { .. });
    let mf = profile.max_freq as i64;
    let waves: Vec<Vec<f64>> = (0..profile.terms)
        .map(|_| loop {
            let k: Vec<f64> = if lattice {
                (0..n).map(|_| rng.gen_range(-mf..=mf) as f64 * base_freq).collect()
            } else {
                (0..n).map(|_| rng.gen_range(-(mf as f64)..=(mf as f64))).collect()
            };
            if k.iter().any(|v| *v != 0.0) {
                break k;
            }
        })
        .collect();
    let count = n.pow(valence as u32 + 1);
    let components: Vec<TrigComponent> = (0..count)
        .map(|_| TrigComponent {
            amps: (0..profile.terms)
                .map(|t| rng.gen_range(-profile.amplitude..profile.amplitude) / (t + 1) as f64)
                .collect(),
            phases: (0..profile.terms).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect(),
        })
        .collect();
    let shape: Vec<usize> = vec![n; valence + 1];
    TangentTensorField::from_fn(chart.clone(), valence, move |x: &ChartPoint| {
        let args: Vec<f64> = waves
            .iter()
            .map(|k| k.iter().zip(x.coords.iter()).map(|(ki, xi)| ki * xi).sum())
            .collect();
        let mut out = ArrayD::zeros(IxDyn(&shape));
        for (flat, val) in out.iter_mut().enumerate() {
            let comp = &components[flat];
            let mut v = 0.0;
            for t in 0..args.len() {
                v += comp.amps[t] * (args[t] + comp.phases[t]).cos();
            }
            *val = v;
        }
        out
    })
}

/// Random smooth bundle p-form: antisymmetrized random tensor field.
pub fn random_form(chart: &ManifoldChart, degree: usize, seed: u64, profile: TrigProfile) -> BundleForm {
    let raw = random_tensor_field(chart, degree, seed, profile);
    if degree < 2 {
        return BundleForm::new(raw);
    }
    let n = chart.dim();
    let field = TangentTensorField::from_fn(chart.clone(), degree, move |x: &ChartPoint| {
        antisymmetrize(&raw.evaluate(x), n, degree)
    });
    BundleForm::new(field)
}

/// Antisymmetrize the covariant slots (axis 0 is the contravariant index).
pub fn antisymmetrize(value: &TensorValue, n: usize, degree: usize) -> TensorValue {
    let mut out = ArrayD::zeros(value.raw_dim());
    let mut perm = Vec::new();
    permutations(degree, &mut vec![], &mut (0..degree).collect::<Vec<_>>(), &mut perm);
    let norm = 1.0 / perm.len() as f64;
    for k in 0..n {
        for idx in crate::forms::multi_indices(n, degree) {
            let mut acc = 0.0;
            for (p, sign) in &perm {
                let mut src = Vec::with_capacity(degree + 1);
                src.push(k);
                for &slot in p {
                    src.push(idx[slot]);
                }
                acc += sign * value[src.as_slice()];
            }
            let mut out_idx = Vec::with_capacity(degree + 1);
            out_idx.push(k);
            out_idx.extend_from_slice(&idx);
            out[out_idx.as_slice()] = acc * norm;
        }
    }
    out
}

fn permutations(degree: usize, acc: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, f64)>) {
    if rest.is_empty() {
        out.push((acc.clone(), permutation_sign(acc)));
        return;
    }
    for i in 0..rest.len() {
        let v = rest.remove(i);
        acc.push(v);
        permutations(degree, acc, rest, out);
        acc.pop();
        rest.insert(i, v);
    }
}

fn permutation_sign(p: &[usize]) -> f64 {
    let mut sign = 1.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Random invertible conjugator P = I + scale·G with a retry guard.
pub fn random_conjugator(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    loop {
        let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let p = DMatrix::identity(n, n) + scale * g;
        if p.clone().lu().determinant().abs() > 0.05 {
            return p;
        }
    }
}
