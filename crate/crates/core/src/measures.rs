//! Weighted empirical measures, samplers for the experiment targets, and the
//! energy distance used as a distribution-level quality score.

use crate::error::{Error, Result};
use crate::net::ResidualMaxoutNet;
use crate::rng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::path::Path;

/// A finitely supported measure: `n` points in `R^d` with non-negative
/// weights summing to one, plus the per-axis bounding box of its support.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    data: Vec<f64>, // row-major n x d
    n: usize,
    d: usize,
    weights: Vec<f64>,
    support: Vec<(f64, f64)>,
}

impl EmpiricalMeasure {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidConfig("empirical measure needs at least one point".into()));
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::InvalidConfig("zero-dimensional points".into()));
        }
        let mut data = Vec::with_capacity(n * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidConfig(format!(
                    "row {i} has {} coordinates, expected {d}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self::from_flat(data, n, d, vec![1.0 / n as f64; n]))
    }

    pub fn with_weights(rows: &[Vec<f64>], weights: &[f64]) -> Result<Self> {
        let mut m = Self::from_rows(rows)?;
        if weights.len() != m.n {
            return Err(Error::DimensionMismatch {
                expected: m.n,
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidConfig("negative or non-finite weight".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidConfig(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        m.weights = weights.iter().map(|w| w / sum).collect();
        Ok(m)
    }

    /// 1-D helper: atoms with weights.
    pub fn from_atoms(atoms: &[f64], weights: &[f64]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = atoms.iter().map(|a| vec![*a]).collect();
        Self::with_weights(&rows, weights)
    }

    pub fn from_samples_1d(samples: &[f64]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = samples.iter().map(|a| vec![*a]).collect();
        Self::from_rows(&rows)
    }

    fn from_flat(data: Vec<f64>, n: usize, d: usize, weights: Vec<f64>) -> Self {
        let mut support = vec![(f64::INFINITY, f64::NEG_INFINITY); d];
        for i in 0..n {
            for c in 0..d {
                let v = data[i * d + c];
                support[c].0 = support[c].0.min(v);
                support[c].1 = support[c].1.max(v);
            }
        }
        EmpiricalMeasure {
            data,
            n,
            d,
            weights,
            support,
        }
    }

    /// Parse a point cloud: one point per row, comma-separated, `.` decimal,
    /// optional single header row. Lines are 1-indexed in errors.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut width: Option<usize> = None;
        let mut header_allowed = true;
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> =
                cells.iter().map(|c| c.parse::<f64>()).collect();
            match parsed {
                Ok(row) => {
                    if let Some(w) = width {
                        if row.len() != w {
                            return Err(Error::Csv {
                                line: line_no,
                                message: format!("expected {w} columns, found {}", row.len()),
                            });
                        }
                    } else {
                        width = Some(row.len());
                    }
                    rows.push(row);
                    header_allowed = false;
                }
                Err(e) => {
                    if header_allowed {
                        // A single leading non-numeric row is a header.
                        header_allowed = false;
                        continue;
                    }
                    return Err(Error::Csv {
                        line: line_no,
                        message: format!("non-numeric cell: {e}"),
                    });
                }
            }
        }
        if rows.is_empty() {
            return Err(Error::Csv {
                line: 0,
                message: "no data rows".into(),
            });
        }
        Self::from_rows(&rows)
    }

    pub fn to_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        for i in 0..self.n {
            let row: Vec<String> = self.point(i).iter().map(|v| format!("{v}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Per-axis (min, max) of the support.
    pub fn support(&self) -> &[(f64, f64)] {
        &self.support
    }

    /// Weighted mean vector and weighted second moment `E ||x||^2`.
    pub fn moments(&self) -> (Vec<f64>, f64) {
        let mut mean = vec![0.0; self.d];
        let mut m2 = 0.0;
        for i in 0..self.n {
            let w = self.weights[i];
            let p = self.point(i);
            let mut sq = 0.0;
            for c in 0..self.d {
                mean[c] += w * p[c];
                sq += p[c] * p[c];
            }
            m2 += w * sq;
        }
        (mean, m2)
    }

    pub fn mean(&self) -> Vec<f64> {
        self.moments().0
    }

    pub fn second_moment(&self) -> f64 {
        self.moments().1
    }

    /// Draw `count` indices with replacement according to the weights.
    pub fn sample_indices(&self, r: &mut ChaCha8Rng, count: usize) -> Vec<usize> {
        let uniform = self
            .weights
            .iter()
            .all(|w| (w - 1.0 / self.n as f64).abs() < 1e-15);
        if uniform {
            return (0..count).map(|_| r.random_range(0..self.n)).collect();
        }
        let mut cum = Vec::with_capacity(self.n);
        let mut acc = 0.0;
        for w in &self.weights {
            acc += w;
            cum.push(acc);
        }
        (0..count)
            .map(|_| {
                let u: f64 = r.random_range(0.0..acc);
                cum.partition_point(|c| *c <= u).min(self.n - 1)
            })
            .collect()
    }

    /// Uniformly weighted sub-measure on the given point indices.
    pub fn select(&self, indices: &[usize]) -> EmpiricalMeasure {
        assert!(!indices.is_empty(), "empty selection");
        let mut data = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            data.extend_from_slice(self.point(i));
        }
        let n = indices.len();
        Self::from_flat(data, n, self.d, vec![1.0 / n as f64; n])
    }
}

/// Energy distance `2 E||X-Y|| - E||X-X'|| - E||Y-Y'||` between two weighted
/// empirical measures; non-negative, zero iff the measures coincide.
pub fn energy_distance(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> f64 {
    assert_eq!(
        a.dim(),
        b.dim(),
        "dimension mismatch: expected {}, got {}",
        a.dim(),
        b.dim()
    );
    let cross = pair_mean(a, b);
    let within_a = pair_mean(a, a);
    let within_b = pair_mean(b, b);
    2.0 * cross - within_a - within_b
}

fn pair_mean(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        let pi = a.point(i);
        let wi = a.weights()[i];
        for j in 0..b.len() {
            let pj = b.point(j);
            let mut sq = 0.0;
            for c in 0..a.dim() {
                let dlt = pi[c] - pj[c];
                sq += dlt * dlt;
            }
            acc += wi * b.weights()[j] * sq.sqrt();
        }
    }
    acc
}

/// Benchmark return: the 20-step staircase `xi -> floor(xi / 0.05) / 20` on
/// `[0, 1)` with `1 -> 1`.
pub fn benchmark_staircase(xi: f64) -> f64 {
    assert!((0.0..=1.0).contains(&xi), "staircase input {xi} outside [0,1]");
    if xi >= 1.0 {
        return 1.0;
    }
    let i = ((xi / 0.05).floor() as usize).min(19);
    i as f64 / 20.0
}

#[derive(Debug, Clone)]
enum SamplerKind {
    UniformBox(Vec<(f64, f64)>),
    GaussianMixture { means: Vec<Vec<f64>>, sigma: f64 },
    SwissRoll { noise: f64 },
    PointCloud(EmpiricalMeasure),
    Pushforward { generator: Box<ResidualMaxoutNet>, base: Box<Sampler> },
}

/// A seeded source of batches. Samplers own their RNG: two samplers built
/// with the same parameters and seed produce identical batch sequences.
#[derive(Debug, Clone)]
pub struct Sampler {
    kind: SamplerKind,
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn uniform_box(bounds: Vec<(f64, f64)>, seed: u64) -> Self {
        assert!(!bounds.is_empty() && bounds.iter().all(|(lo, hi)| lo <= hi));
        Sampler {
            kind: SamplerKind::UniformBox(bounds),
            rng: rng::stream(seed, rng::streams::DATA),
        }
    }

    pub fn gaussian_mixture(means: Vec<Vec<f64>>, sigma: f64, seed: u64) -> Self {
        assert!(!means.is_empty() && sigma >= 0.0);
        let d = means[0].len();
        assert!(means.iter().all(|m| m.len() == d));
        Sampler {
            kind: SamplerKind::GaussianMixture { means, sigma },
            rng: rng::stream(seed, rng::streams::DATA),
        }
    }

    /// Eight equally weighted Gaussians with means on the circle of radius 2
    /// and standard deviation 0.02.
    pub fn eight_gaussians(seed: u64) -> Self {
        let means = (0..8)
            .map(|j| {
                let ang = 2.0 * std::f64::consts::PI * j as f64 / 8.0;
                vec![2.0 * ang.cos(), 2.0 * ang.sin()]
            })
            .collect();
        Self::gaussian_mixture(means, 0.02, seed)
    }

    /// 2-D spiral (`t cos t, t sin t` for `t` in `[1.5 pi, 4.5 pi]`) rescaled
    /// into `[-2, 2]^2`, plus isotropic Gaussian noise of the given sigma.
    pub fn swiss_roll(noise: f64, seed: u64) -> Self {
        assert!(noise >= 0.0);
        Sampler {
            kind: SamplerKind::SwissRoll { noise },
            rng: rng::stream(seed, rng::streams::DATA),
        }
    }

    /// Bootstrap resampling of a stored point cloud.
    pub fn point_cloud(cloud: EmpiricalMeasure, seed: u64) -> Self {
        Sampler {
            kind: SamplerKind::PointCloud(cloud),
            rng: rng::stream(seed, rng::streams::DATA),
        }
    }

    pub fn point_cloud_from_csv(path: impl AsRef<Path>, seed: u64) -> Result<Self> {
        Ok(Self::point_cloud(EmpiricalMeasure::from_csv(path)?, seed))
    }

    /// The image of `base` under the generator.
    pub fn pushforward(generator: ResidualMaxoutNet, base: Sampler) -> Self {
        assert_eq!(
            generator.shape().latent,
            base.dim(),
            "generator latent dimension mismatch"
        );
        let rng = base.rng.clone();
        Sampler {
            kind: SamplerKind::Pushforward {
                generator: Box::new(generator),
                base: Box::new(base),
            },
            rng,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SamplerKind::UniformBox(b) => b.len(),
            SamplerKind::GaussianMixture { means, .. } => means[0].len(),
            SamplerKind::SwissRoll { .. } => 2,
            SamplerKind::PointCloud(m) => m.dim(),
            SamplerKind::Pushforward { generator, .. } => generator.shape().output,
        }
    }

    pub fn sample_batch(&mut self, n: usize) -> EmpiricalMeasure {
        assert!(n > 0, "empty batch");
        let d = self.dim();
        let mut data = Vec::with_capacity(n * d);
        match &mut self.kind {
            SamplerKind::UniformBox(bounds) => {
                for _ in 0..n {
                    for (lo, hi) in bounds.iter() {
                        let v = if lo == hi {
                            *lo
                        } else {
                            self.rng.random_range(*lo..*hi)
                        };
                        data.push(v);
                    }
                }
            }
            SamplerKind::GaussianMixture { means, sigma } => {
                for _ in 0..n {
                    let m = &means[self.rng.random_range(0..means.len())];
                    for c in 0..d {
                        let z: f64 = StandardNormal.sample(&mut self.rng);
                        data.push(m[c] + *sigma * z);
                    }
                }
            }
            SamplerKind::SwissRoll { noise } => {
                let t_lo = 1.5 * std::f64::consts::PI;
                let t_hi = 4.5 * std::f64::consts::PI;
                let scale = 2.0 / t_hi;
                for _ in 0..n {
                    let t = self.rng.random_range(t_lo..t_hi);
                    let (x, y) = (t * t.cos() * scale, t * t.sin() * scale);
                    let nx: f64 = StandardNormal.sample(&mut self.rng);
                    let ny: f64 = StandardNormal.sample(&mut self.rng);
                    data.push(x + *noise * nx);
                    data.push(y + *noise * ny);
                }
            }
            SamplerKind::PointCloud(cloud) => {
                let idx = cloud.sample_indices(&mut self.rng, n);
                for i in idx {
                    data.extend_from_slice(cloud.point(i));
                }
            }
            SamplerKind::Pushforward { generator, base } => {
                let latent = base.sample_batch(n);
                for i in 0..n {
                    data.extend(generator.apply(latent.point(i)));
                }
            }
        }
        EmpiricalMeasure::from_flat(data, n, d, vec![1.0 / n as f64; n])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::GeneratorShape;

    #[test]
    fn staircase_values() {
        assert_eq!(benchmark_staircase(0.07), 0.05);
        assert_eq!(benchmark_staircase(0.0), 0.0);
        assert_eq!(benchmark_staircase(1.0), 1.0);
        assert_eq!(benchmark_staircase(0.9999), 0.95);
        // Mean over the exact cell midpoints: sum i/20 over 20 cells / 20.
        let mean: f64 = (0..20)
            .map(|i| benchmark_staircase((i as f64 + 0.5) * 0.05))
            .sum::<f64>()
            / 20.0;
        assert!((mean - 0.475).abs() < 1e-12);
    }

    #[test]
    #[should_panic(expected = "outside")]
    fn staircase_rejects_out_of_range() {
        benchmark_staircase(1.5);
    }

    #[test]
    fn moments_hand_cases() {
        let m = EmpiricalMeasure::from_atoms(&[-1.0, 1.0], &[0.5, 0.5]).unwrap();
        let (mean, m2) = m.moments();
        assert_eq!(mean, vec![0.0]);
        assert_eq!(m2, 1.0);
        let m = EmpiricalMeasure::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let (mean, m2) = m.moments();
        assert_eq!(mean, vec![0.5, 0.5]);
        assert_eq!(m2, 1.0);
    }

    #[test]
    fn energy_distance_examples() {
        let a = EmpiricalMeasure::from_atoms(&[0.0], &[1.0]).unwrap();
        let b = EmpiricalMeasure::from_atoms(&[1.0], &[1.0]).unwrap();
        assert_eq!(energy_distance(&a, &a), 0.0);
        assert_eq!(energy_distance(&a, &b), 2.0);
        let c = EmpiricalMeasure::from_atoms(&[0.3, -0.4, 1.1], &[0.2, 0.5, 0.3]).unwrap();
        assert!((energy_distance(&b, &c) - energy_distance(&c, &b)).abs() < 1e-15);
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn energy_distance_rejects_mixed_dims() {
        let a = EmpiricalMeasure::from_atoms(&[0.0], &[1.0]).unwrap();
        let b = EmpiricalMeasure::from_rows(&[vec![0.0, 0.0]]).unwrap();
        energy_distance(&a, &b);
    }

    #[test]
    fn support_is_tight() {
        let m =
            EmpiricalMeasure::from_rows(&[vec![0.0, -2.0], vec![3.0, 1.0], vec![-1.0, 0.5]])
                .unwrap();
        assert_eq!(m.support(), &[(-1.0, 3.0), (-2.0, 1.0)]);
    }

    #[test]
    fn csv_roundtrip_and_errors() {
        let m = EmpiricalMeasure::from_csv_str("x,y\n1.0,2.0\n3.5,-0.25\n").unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.point(1), &[3.5, -0.25]);
        assert_eq!(m.weights(), &[0.5, 0.5]);

        let no_header = EmpiricalMeasure::from_csv_str("1,2\n3,4\n5,6\n").unwrap();
        assert_eq!(no_header.len(), 3);

        match EmpiricalMeasure::from_csv_str("") {
            Err(Error::Csv { .. }) => {}
            other => panic!("expected csv error, got {other:?}"),
        }
        match EmpiricalMeasure::from_csv_str("1,2\n3,oops\n") {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected csv error, got {other:?}"),
        }
        match EmpiricalMeasure::from_csv_str("1,2\n3\n") {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected csv error, got {other:?}"),
        }
    }

    #[test]
    fn weights_validation() {
        let rows = vec![vec![0.0], vec![1.0]];
        assert!(EmpiricalMeasure::with_weights(&rows, &[0.7, 0.3]).is_ok());
        assert!(EmpiricalMeasure::with_weights(&rows, &[0.7, 0.7]).is_err());
        assert!(EmpiricalMeasure::with_weights(&rows, &[-0.5, 1.5]).is_err());
        assert!(EmpiricalMeasure::with_weights(&rows, &[1.0]).is_err());
    }

    #[test]
    fn samplers_are_deterministic() {
        let mut a = Sampler::eight_gaussians(5);
        let mut b = Sampler::eight_gaussians(5);
        assert_eq!(a.sample_batch(64), b.sample_batch(64));
        let mut c = Sampler::eight_gaussians(6);
        assert_ne!(a.sample_batch(64), c.sample_batch(64));
    }

    #[test]
    fn uniform_box_respects_bounds() {
        let mut s = Sampler::uniform_box(vec![(-1.0, 1.0), (0.0, 3.0)], 11);
        let batch = s.sample_batch(500);
        for i in 0..batch.len() {
            let p = batch.point(i);
            assert!(p[0] >= -1.0 && p[0] < 1.0);
            assert!(p[1] >= 0.0 && p[1] < 3.0);
        }
    }

    #[test]
    fn eight_gaussians_cluster_tightly() {
        let mut s = Sampler::eight_gaussians(17);
        let batch = s.sample_batch(1000);
        let means: Vec<(f64, f64)> = (0..8)
            .map(|j| {
                let ang = 2.0 * std::f64::consts::PI * j as f64 / 8.0;
                (2.0 * ang.cos(), 2.0 * ang.sin())
            })
            .collect();
        for i in 0..batch.len() {
            let p = batch.point(i);
            let close = means.iter().any(|(mx, my)| {
                ((p[0] - mx).powi(2) + (p[1] - my).powi(2)).sqrt() <= 5.0 * 0.02
            });
            assert!(close, "sample {p:?} not within 5 sigma of any mean");
        }
    }

    #[test]
    fn swiss_roll_lands_in_box() {
        let mut s = Sampler::swiss_roll(0.1, 3);
        let batch = s.sample_batch(1000);
        for i in 0..batch.len() {
            let p = batch.point(i);
            assert!(p[0].abs() <= 2.6 && p[1].abs() <= 2.6, "outlier {p:?}");
        }
    }

    #[test]
    fn point_cloud_resamples_rows() {
        let cloud = EmpiricalMeasure::from_rows(&[vec![1.0, 2.0], vec![-1.0, 0.0]]).unwrap();
        let mut s = Sampler::point_cloud(cloud.clone(), 9);
        let batch = s.sample_batch(100);
        for i in 0..batch.len() {
            let p = batch.point(i);
            assert!(p == cloud.point(0) || p == cloud.point(1));
        }
    }

    #[test]
    fn pushforward_applies_generator() {
        let shape = GeneratorShape {
            latent: 2,
            hidden: 3,
            output: 2,
            layers: 3,
            kernel: 2,
        };
        let g = ResidualMaxoutNet::init(shape, 4);
        let base = Sampler::uniform_box(vec![(-1.0, 1.0); 2], 8);
        let mut base_copy = base.clone();
        let mut s = Sampler::pushforward(g.clone(), base);
        let batch = s.sample_batch(16);
        let latents = base_copy.sample_batch(16);
        for i in 0..16 {
            assert_eq!(batch.point(i), g.apply(latents.point(i)).as_slice());
        }
    }

    #[test]
    fn weighted_sampling_respects_weights() {
        let m = EmpiricalMeasure::from_atoms(&[0.0, 1.0], &[0.9, 0.1]).unwrap();
        let mut r = crate::rng::stream(1, 0);
        let idx = m.sample_indices(&mut r, 5000);
        let ones = idx.iter().filter(|i| **i == 1).count() as f64 / 5000.0;
        assert!((ones - 0.1).abs() < 0.02, "frequency {ones}");
    }

    proptest::proptest! {
        #[test]
        fn energy_distance_symmetric_nonnegative(
            xs in proptest::collection::vec(-3.0f64..3.0, 1..8),
            ys in proptest::collection::vec(-3.0f64..3.0, 1..8),
        ) {
            let a = EmpiricalMeasure::from_samples_1d(&xs).unwrap();
            let b = EmpiricalMeasure::from_samples_1d(&ys).unwrap();
            let ab = energy_distance(&a, &b);
            let ba = energy_distance(&b, &a);
            proptest::prop_assert!((ab - ba).abs() < 1e-12);
            proptest::prop_assert!(ab >= -1e-12);
        }

        #[test]
        fn staircase_stays_in_unit_interval(xi in 0.0f64..=1.0) {
            let v = benchmark_staircase(xi);
            proptest::prop_assert!((0.0..=1.0).contains(&v));
            proptest::prop_assert!(v <= xi + 1e-12);
        }
    }
}
