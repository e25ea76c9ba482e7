//! Closed-form dominance values for pairs of measures built from a symmetric
//! bump density `eta` on [-1, 1].
//!
//! Two families are supported, both with gradient set K = [-C, C]:
//!
//! * same variance, different mean: the pair has densities `eta(x - a)` and
//!   `eta(x + a)`. With `F(x) = integral of (eta(y+a) - eta(y-a)) up to x`
//!   and `G(x) = integral of F from 0 to x`, both directed discrepancies
//!   equal the VDC, which is `2 C G(inf)`; the symmetric distance is
//!   `4 C G(inf)`.
//! * same mean, different variance: densities `eta(x/a)/a` and `eta(x)`.
//!   With `F(x) = integral of (eta - eta(./a)/a) up to x` and `G(x) =
//!   integral of F from -inf to x`, the narrow-vs-wide direction has VDC
//!   `2 C max(G(0), 0)`, the other `2 C max(-G(0), 0)`; directed
//!   discrepancies add the second-moment gap `(a^2 - 1)/2 * Var(eta)`.
//!
//! `F` and `G` are evaluated by trapezoid quadrature on a dense grid, so the
//! "analytic" values here carry an O(h^2) error of about 1e-9 at the default
//! resolution.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Symmetric unit-mass densities supported on [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BumpDensity {
    /// 3/4 (1 - x^2); variance 1/5.
    Epanechnikov,
    /// 1 - |x|; variance 1/6.
    Triangular,
}

impl BumpDensity {
    pub fn pdf(&self, x: f64) -> f64 {
        if x.abs() >= 1.0 {
            return 0.0;
        }
        match self {
            BumpDensity::Epanechnikov => 0.75 * (1.0 - x * x),
            BumpDensity::Triangular => 1.0 - x.abs(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            BumpDensity::Epanechnikov => 0.2,
            BumpDensity::Triangular => 1.0 / 6.0,
        }
    }

    /// E[max(-X, 0)] = E|X|/2: the exact value of G(0) in the same-mean
    /// family is (1 - a) times this.
    pub fn negative_part_mean(&self) -> f64 {
        match self {
            BumpDensity::Epanechnikov => 3.0 / 16.0,
            BumpDensity::Triangular => 1.0 / 6.0,
        }
    }

    /// Exact draw: the median of three uniforms on [-1,1] has the
    /// Epanechnikov density; the mean of two has the triangular one.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            BumpDensity::Epanechnikov => {
                let mut u = [
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ];
                u.sort_by(|a: &f64, b: &f64| a.partial_cmp(b).unwrap());
                u[1]
            }
            BumpDensity::Triangular => {
                let u1: f64 = rng.random_range(0.0..1.0);
                let u2: f64 = rng.random_range(0.0..1.0);
                u1 + u2 - 1.0
            }
        }
    }
}

/// How the pair is built from the base density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BumpMode {
    /// Densities eta(x - a) (plus) and eta(x + a) (minus); a >= 0.
    Shift(f64),
    /// Densities eta(x/a)/a (plus) and eta(x) (minus); a > 0.
    Scale(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSpec {
    pub density: BumpDensity,
    pub mode: BumpMode,
    /// Quadrature grid size (number of points); odd so that 0 is a node.
    pub grid_points: usize,
}

pub const DEFAULT_GRID: usize = (1 << 16) + 1;

impl BumpSpec {
    pub fn new(density: BumpDensity, mode: BumpMode) -> crate::Result<Self> {
        match mode {
            BumpMode::Shift(a) if a < 0.0 => Err(crate::Error::InvalidConfig(format!(
                "shift offset must be non-negative, got {a}"
            ))),
            BumpMode::Scale(a) if a <= 0.0 => Err(crate::Error::InvalidConfig(format!(
                "scale factor must be positive, got {a}"
            ))),
            _ => Ok(BumpSpec {
                density,
                mode,
                grid_points: DEFAULT_GRID,
            }),
        }
    }

    /// Symmetric interval containing both supports.
    pub fn support_hull(&self) -> (f64, f64) {
        match self.mode {
            BumpMode::Shift(a) => (-(1.0 + a), 1.0 + a),
            BumpMode::Scale(a) => (-a.max(1.0), a.max(1.0)),
        }
    }

    pub fn pdf_plus(&self, x: f64) -> f64 {
        match self.mode {
            BumpMode::Shift(a) => self.density.pdf(x - a),
            BumpMode::Scale(a) => self.density.pdf(x / a) / a,
        }
    }

    pub fn pdf_minus(&self, x: f64) -> f64 {
        match self.mode {
            BumpMode::Shift(a) => self.density.pdf(x + a),
            BumpMode::Scale(_) => self.density.pdf(x),
        }
    }

    pub fn sample_plus(&self, rng: &mut ChaCha8Rng) -> f64 {
        let x = self.density.sample(rng);
        match self.mode {
            BumpMode::Shift(a) => x + a,
            BumpMode::Scale(a) => a * x,
        }
    }

    pub fn sample_minus(&self, rng: &mut ChaCha8Rng) -> f64 {
        let x = self.density.sample(rng);
        match self.mode {
            BumpMode::Shift(a) => x - a,
            BumpMode::Scale(_) => x,
        }
    }

    pub fn second_moment_plus(&self) -> f64 {
        match self.mode {
            BumpMode::Shift(a) => a * a + self.density.variance(),
            BumpMode::Scale(a) => a * a * self.density.variance(),
        }
    }

    pub fn second_moment_minus(&self) -> f64 {
        match self.mode {
            BumpMode::Shift(a) => a * a + self.density.variance(),
            BumpMode::Scale(_) => self.density.variance(),
        }
    }
}

/// Grid evaluation of F (CDF difference) and G (its antiderivative, anchored
/// at 0 in shift mode and at the left end in scale mode).
#[derive(Debug, Clone, PartialEq)]
pub struct FgTable {
    pub xs: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

pub fn bump_f_g(spec: &BumpSpec) -> FgTable {
    let n = spec.grid_points.max(3) | 1; // odd, so 0 is the middle node
    let (lo, hi) = spec.support_hull();
    let h = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
    let diff: Vec<f64> = xs
        .iter()
        .map(|&x| spec.pdf_minus(x) - spec.pdf_plus(x))
        .collect();
    let f = cumulative_trapezoid(&diff, h);
    let mut g = cumulative_trapezoid(&f, h);
    if let BumpMode::Shift(_) = spec.mode {
        let anchor = g[(n - 1) / 2];
        for v in &mut g {
            *v -= anchor;
        }
    }
    FgTable { xs, f, g }
}

fn cumulative_trapezoid(y: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(y.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..y.len() {
        acc += 0.5 * h * (y[i - 1] + y[i]);
        out.push(acc);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SameVarianceValues {
    /// VDC in either direction (the pair is symmetric).
    pub vdc: f64,
    /// Directed discrepancy; the second-moment terms cancel, so it equals
    /// the VDC.
    pub dct_directed: f64,
    /// Symmetric distance: twice the VDC.
    pub d_ct: f64,
}

pub fn analytic_same_variance(
    density: BumpDensity,
    a: f64,
    c: f64,
) -> crate::Result<SameVarianceValues> {
    if c <= 0.0 {
        return Err(crate::Error::InvalidConfig(format!(
            "gradient bound must be positive, got {c}"
        )));
    }
    let spec = BumpSpec::new(density, BumpMode::Shift(a))?;
    if a == 0.0 {
        return Ok(SameVarianceValues {
            vdc: 0.0,
            dct_directed: 0.0,
            d_ct: 0.0,
        });
    }
    let table = bump_f_g(&spec);
    let g_inf = *table.g.last().unwrap();
    let vdc = 2.0 * c * g_inf;
    Ok(SameVarianceValues {
        vdc,
        dct_directed: vdc,
        d_ct: 2.0 * vdc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SameMeanValues {
    /// VDC(plus || minus): zero when the wide measure is `plus` (a > 1).
    pub vdc_plus_minus: f64,
    /// VDC(minus || plus): zero when a < 1.
    pub vdc_minus_plus: f64,
    /// Directed discrepancy plus -> minus (VDC plus the moment gap).
    pub dct_plus_minus: f64,
    /// Directed discrepancy minus -> plus.
    pub dct_minus_plus: f64,
    /// Symmetric distance: 2 C |G(0)|.
    pub d_ct: f64,
    /// a = 1: the two measures coincide and every value is zero.
    pub degenerate: bool,
}

pub fn analytic_same_mean(density: BumpDensity, a: f64, c: f64) -> crate::Result<SameMeanValues> {
    if c <= 0.0 {
        return Err(crate::Error::InvalidConfig(format!(
            "gradient bound must be positive, got {c}"
        )));
    }
    let spec = BumpSpec::new(density, BumpMode::Scale(a))?;
    if (a - 1.0).abs() < 1e-12 {
        return Ok(SameMeanValues {
            vdc_plus_minus: 0.0,
            vdc_minus_plus: 0.0,
            dct_plus_minus: 0.0,
            dct_minus_plus: 0.0,
            d_ct: 0.0,
            degenerate: true,
        });
    }
    let table = bump_f_g(&spec);
    let g0 = table.g[(table.g.len() - 1) / 2];
    let moment_gap = 0.5 * (a * a - 1.0) * density.variance();
    let vdc_plus_minus = 2.0 * c * g0.max(0.0);
    let vdc_minus_plus = 2.0 * c * (-g0).max(0.0);
    Ok(SameMeanValues {
        vdc_plus_minus,
        vdc_minus_plus,
        dct_plus_minus: moment_gap + vdc_plus_minus,
        dct_minus_plus: -moment_gap + vdc_minus_plus,
        d_ct: vdc_plus_minus + vdc_minus_plus,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn trapz(xs: &[f64], ys: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 1..xs.len() {
            acc += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
        }
        acc
    }

    #[test]
    fn densities_integrate_to_one() {
        for density in [BumpDensity::Epanechnikov, BumpDensity::Triangular] {
            let spec = BumpSpec::new(density, BumpMode::Shift(0.4)).unwrap();
            let table = bump_f_g(&spec);
            let plus: Vec<f64> = table.xs.iter().map(|&x| spec.pdf_plus(x)).collect();
            let minus: Vec<f64> = table.xs.iter().map(|&x| spec.pdf_minus(x)).collect();
            assert!((trapz(&table.xs, &plus) - 1.0).abs() < 1e-9);
            assert!((trapz(&table.xs, &minus) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn variance_matches_quadrature() {
        for density in [BumpDensity::Epanechnikov, BumpDensity::Triangular] {
            let spec = BumpSpec::new(density, BumpMode::Scale(1.0)).unwrap();
            let table = bump_f_g(&spec);
            let x2: Vec<f64> = table
                .xs
                .iter()
                .map(|&x| x * x * density.pdf(x))
                .collect();
            assert!((trapz(&table.xs, &x2) - density.variance()).abs() < 1e-8);
        }
    }

    // In shift mode G(inf) telescopes to the mean gap: G(inf) = a for any
    // symmetric base density. Strong independent check of the quadrature.
    #[test]
    fn shift_g_at_infinity_equals_offset() {
        for density in [BumpDensity::Epanechnikov, BumpDensity::Triangular] {
            for a in [0.25, 0.3, 0.7] {
                let spec = BumpSpec::new(density, BumpMode::Shift(a)).unwrap();
                let table = bump_f_g(&spec);
                let g_inf = *table.g.last().unwrap();
                assert!(
                    (g_inf - a).abs() < 1e-7,
                    "{density:?} a={a}: G(inf)={g_inf}"
                );
            }
        }
    }

    // In scale mode G(0) = (1 - a) E[(X)_-], with E[(X)_-] = 3/16
    // (Epanechnikov) or 1/6 (triangular).
    #[test]
    fn scale_g_at_zero_matches_exact_form() {
        for density in [BumpDensity::Epanechnikov, BumpDensity::Triangular] {
            for a in [0.3, 0.5, 2.0] {
                let spec = BumpSpec::new(density, BumpMode::Scale(a)).unwrap();
                let table = bump_f_g(&spec);
                let g0 = table.g[(table.g.len() - 1) / 2];
                let exact = (1.0 - a) * density.negative_part_mean();
                assert!(
                    (g0 - exact).abs() < 1e-7,
                    "{density:?} a={a}: G(0)={g0}, exact {exact}"
                );
            }
        }
    }

    #[test]
    fn same_variance_frozen_values() {
        let v = analytic_same_variance(BumpDensity::Epanechnikov, 0.3, 1.0).unwrap();
        assert!((v.vdc - 0.6).abs() < 1e-6);
        assert!((v.dct_directed - 0.6).abs() < 1e-6);
        assert!((v.d_ct - 1.2).abs() < 1e-6);

        let z = analytic_same_variance(BumpDensity::Triangular, 0.0, 2.0).unwrap();
        assert_eq!(z.vdc, 0.0);
        assert_eq!(z.d_ct, 0.0);
    }

    #[test]
    fn same_mean_frozen_values() {
        // Narrow plus (a = 1/2): VDC = 2 C G(0) = 3(1-a)/8 = 0.1875;
        // directed discrepancy subtracts (1-a^2)/2 * 1/5 = 0.075.
        let v = analytic_same_mean(BumpDensity::Epanechnikov, 0.5, 1.0).unwrap();
        assert!((v.vdc_plus_minus - 0.1875).abs() < 1e-6);
        assert!(v.vdc_minus_plus.abs() < 1e-6);
        assert!((v.dct_plus_minus - 0.1125).abs() < 1e-6);
        assert!((v.dct_minus_plus - 0.075).abs() < 1e-6);
        assert!((v.d_ct - 0.1875).abs() < 1e-6);
        assert!(!v.degenerate);

        // Wide plus (a = 2): the dominance branch.
        let w = analytic_same_mean(BumpDensity::Epanechnikov, 2.0, 1.0).unwrap();
        assert!(w.vdc_plus_minus.abs() < 1e-6);
        assert!((w.vdc_minus_plus - 0.375).abs() < 1e-6);
        assert!((w.dct_plus_minus - 0.3).abs() < 1e-6);
        assert!((w.d_ct - 0.375).abs() < 1e-6);

        // Triangular, a = 1/2: VDC = 2 C (1-a)/6 = 1/6; directed value
        // 1/6 - (3/4)(1/12) = 5/48.
        let t = analytic_same_mean(BumpDensity::Triangular, 0.5, 1.0).unwrap();
        assert!((t.vdc_plus_minus - 1.0 / 6.0).abs() < 1e-6);
        assert!((t.dct_plus_minus - 5.0 / 48.0).abs() < 1e-6);
    }

    #[test]
    fn same_mean_degenerate_at_unit_scale() {
        let v = analytic_same_mean(BumpDensity::Epanechnikov, 1.0, 1.0).unwrap();
        assert!(v.degenerate);
        assert_eq!(v.d_ct, 0.0);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(BumpSpec::new(BumpDensity::Epanechnikov, BumpMode::Shift(-0.1)).is_err());
        assert!(BumpSpec::new(BumpDensity::Epanechnikov, BumpMode::Scale(0.0)).is_err());
        assert!(analytic_same_variance(BumpDensity::Epanechnikov, 0.3, 0.0).is_err());
        assert!(analytic_same_mean(BumpDensity::Epanechnikov, 0.5, -1.0).is_err());
    }

    #[test]
    fn samplers_match_moments() {
        let mut r = rng::stream(42, 0);
        for density in [BumpDensity::Epanechnikov, BumpDensity::Triangular] {
            let n = 40_000;
            let xs: Vec<f64> = (0..n).map(|_| density.sample(&mut r)).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| x * x).sum::<f64>() / n as f64 - mean * mean;
            assert!(mean.abs() < 0.01, "{density:?} mean {mean}");
            assert!(
                (var - density.variance()).abs() < 0.01,
                "{density:?} var {var}"
            );
            assert!(xs.iter().all(|x| x.abs() <= 1.0));
        }
    }

    #[test]
    fn pair_samplers_transform_correctly() {
        let mut r = rng::stream(7, 0);
        let shift = BumpSpec::new(BumpDensity::Epanechnikov, BumpMode::Shift(0.3)).unwrap();
        let n = 20_000;
        let plus_mean: f64 =
            (0..n).map(|_| shift.sample_plus(&mut r)).sum::<f64>() / n as f64;
        let minus_mean: f64 =
            (0..n).map(|_| shift.sample_minus(&mut r)).sum::<f64>() / n as f64;
        assert!((plus_mean - 0.3).abs() < 0.02);
        assert!((minus_mean + 0.3).abs() < 0.02);

        let scale = BumpSpec::new(BumpDensity::Epanechnikov, BumpMode::Scale(2.0)).unwrap();
        let m2: f64 = (0..n)
            .map(|_| scale.sample_plus(&mut r).powi(2))
            .sum::<f64>()
            / n as f64;
        assert!((m2 - scale.second_moment_plus()).abs() < 0.05);
        assert!((scale.second_moment_plus() - 0.8).abs() < 1e-12);
    }
}
