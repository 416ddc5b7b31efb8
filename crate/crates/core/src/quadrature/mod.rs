//! Deterministic product quadrature over torus factors, radial factors and
//! vector spaces.
//!
//! Every grid is a tensor product of one-dimensional rules. Node values may be
//! computed in parallel, but the reduction always runs over the flat node
//! index in a fixed pairwise order, so a given grid produces the same bits no
//! matter how the evaluation was scheduled.

mod test_function;

pub use test_function::{bump_profile, DecayClass, KModulation, Memo, SmoothTestFunction};

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("torus rule needs at least 4 points, got {0}")]
    TooFewTorusPoints(usize),
    #[error("radial rule needs at least 2 points, got {0}")]
    TooFewRadialPoints(usize),
    #[error("radial extent must be positive and finite, got {0}")]
    BadExtent(f64),
    #[error("integrand is not finite at node {index} (point {point:?})")]
    NonFinite { index: usize, point: Vec<f64> },
    #[error("{0}")]
    Integrand(String),
}

/// Kind of a one-dimensional rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    /// Uniform nodes on the circle.
    PeriodicUniform,
    /// Gauss–Legendre nodes mapped to `[0, R]`.
    GaussLegendreHalfLine,
    /// Gauss–Legendre nodes on `[-R, R]`, used for truncated integrals over ℝ.
    GaussLegendreTruncated,
}

/// Normalization of a periodic rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorusMeasure {
    /// Weights sum to 2π (plain `dθ`).
    Angle,
    /// Weights sum to 1 (Haar probability measure).
    UnitVolume,
}

/// Summation strategy used by [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    #[default]
    Pairwise,
    /// Neumaier-compensated sum, in index order.
    Compensated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule1D {
    pub kind: RuleKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Only meaningful for periodic rules.
    pub measure: TorusMeasure,
}

impl Rule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum of `weights[i] * f(nodes[i])`, pairwise in index order.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .collect();
        pairwise_sum_real(&terms)
    }

    /// Rescale a periodic rule to the Haar probability measure.
    pub fn unit_volume(mut self) -> Self {
        if self.kind == RuleKind::PeriodicUniform && self.measure == TorusMeasure::Angle {
            for w in &mut self.weights {
                *w /= 2.0 * PI;
            }
            self.measure = TorusMeasure::UnitVolume;
        }
        self
    }

    fn signature(&self) -> String {
        match self.kind {
            RuleKind::PeriodicUniform => format!("T{}", self.len()),
            RuleKind::GaussLegendreHalfLine => {
                let r = self.extent();
                format!("R{}[0,{}]", self.len(), fmt_short(r))
            }
            RuleKind::GaussLegendreTruncated => {
                let r = self.extent();
                format!("L{}[-{},{}]", self.len(), fmt_short(r), fmt_short(r))
            }
        }
    }

    fn extent(&self) -> f64 {
        match self.kind {
            RuleKind::PeriodicUniform => 2.0 * PI,
            RuleKind::GaussLegendreHalfLine => self.weights.iter().sum(),
            RuleKind::GaussLegendreTruncated => 0.5 * self.weights.iter().sum::<f64>(),
        }
    }
}

fn fmt_short(x: f64) -> String {
    format!("{:.6}", x)
        .trim_end_matches('0')
        .trim_end_matches('.')
        .to_string()
}

/// Uniform rule on the circle: `θ_j = 2πj/n`, weights `2π/n`.
///
/// Exact for trigonometric polynomials of degree `< n`.
pub fn torus_rule(n_points: usize) -> Result<Rule1D, QuadratureError> {
    if n_points < 4 {
        return Err(QuadratureError::TooFewTorusPoints(n_points));
    }
    let h = 2.0 * PI / n_points as f64;
    Ok(Rule1D {
        kind: RuleKind::PeriodicUniform,
        nodes: (0..n_points).map(|j| h * j as f64).collect(),
        weights: vec![h; n_points],
        measure: TorusMeasure::Angle,
    })
}

/// Gauss–Legendre rule on `[0, R]` or `[-R, R]`.
pub fn radial_rule(kind: RuleKind, extent: f64, n_points: usize) -> Result<Rule1D, QuadratureError> {
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(QuadratureError::BadExtent(extent));
    }
    if n_points < 2 {
        return Err(QuadratureError::TooFewRadialPoints(n_points));
    }
    let (x, w) = gauss_legendre(n_points);
    let (nodes, weights) = match kind {
        RuleKind::GaussLegendreHalfLine => {
            let h = 0.5 * extent;
            (
                x.iter().map(|&xi| h * (xi + 1.0)).collect(),
                w.iter().map(|&wi| h * wi).collect(),
            )
        }
        RuleKind::GaussLegendreTruncated => (
            x.iter().map(|&xi| extent * xi).collect(),
            w.iter().map(|&wi| extent * wi).collect(),
        ),
        RuleKind::PeriodicUniform => return torus_rule(n_points),
    };
    Ok(Rule1D {
        kind,
        nodes,
        weights,
        measure: TorusMeasure::Angle,
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
///
/// Newton iteration on the three-term recurrence, started from the
/// Tricomi approximation of the roots.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Tensor-product grid with a fixed reduction order.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub factors: Vec<Rule1D>,
    pub reduction: Reduction,
}

impl QuadratureGrid {
    pub fn new(factors: Vec<Rule1D>) -> Self {
        Self {
            factors,
            reduction: Reduction::Pairwise,
        }
    }

    pub fn with_reduction(mut self, reduction: Reduction) -> Self {
        self.reduction = reduction;
        self
    }

    pub fn len(&self) -> usize {
        self.factors.iter().map(Rule1D::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    /// Writes the coordinates of flat node `index` into `point` and returns
    /// its weight. The last factor varies fastest.
    pub fn node(&self, mut index: usize, point: &mut [f64]) -> f64 {
        let mut weight = 1.0;
        for (d, rule) in self.factors.iter().enumerate().rev() {
            let i = index % rule.len();
            index /= rule.len();
            point[d] = rule.nodes[i];
            weight *= rule.weights[i];
        }
        weight
    }

    /// Short human-readable description, embedded in reports.
    pub fn signature(&self) -> String {
        let parts: Vec<String> = self.factors.iter().map(Rule1D::signature).collect();
        parts.join("x")
    }
}

impl fmt::Display for QuadratureGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.signature())
    }
}

/// `Σ w_i f(x_i)` over the grid.
///
/// Values are computed in parallel (rayon) and then reduced in node order.
pub fn integrate<F>(grid: &QuadratureGrid, integrand: F) -> Result<Complex64, QuadratureError>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    try_integrate(grid, |p| Ok(integrand(p)))
}

/// Like [`integrate`], for integrands that can fail at a node.
pub fn try_integrate<F>(grid: &QuadratureGrid, integrand: F) -> Result<Complex64, QuadratureError>
where
    F: Fn(&[f64]) -> Result<Complex64, String> + Sync,
{
    let dim = grid.dim();
    let terms: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .with_min_len(256)
        .map_init(
            || vec![0.0; dim],
            |point, index| -> Result<Complex64, QuadratureError> {
                let w = grid.node(index, point);
                let value = integrand(point).map_err(QuadratureError::Integrand)?;
                if !(value.re.is_finite() && value.im.is_finite()) {
                    return Err(QuadratureError::NonFinite {
                        index,
                        point: point.clone(),
                    });
                }
                Ok(value * w)
            },
        )
        .collect::<Result<_, _>>()?;
    Ok(match grid.reduction {
        Reduction::Pairwise => pairwise_sum(&terms),
        Reduction::Compensated => compensated_sum(&terms),
    })
}

/// Largest vector-space dimension the chart helpers handle.
pub const MAX_CHART_DIM: usize = 8;

/// `∫ f(v) dv` over `ℝ^dim` through a chart, Jacobian included.
pub fn integrate_vector<F>(chart: &VectorChart, dim: usize, integrand: F) -> Result<Complex64, QuadratureError>
where
    F: Fn(&[f64]) -> Result<Complex64, String> + Sync,
{
    assert!(dim <= MAX_CHART_DIM, "vector dimension {dim} exceeds {MAX_CHART_DIM}");
    let grid = QuadratureGrid::new(chart.rules(dim)?);
    try_integrate(&grid, |coords| {
        let mut v = [0.0; MAX_CHART_DIM];
        let jac = chart.map(coords, &mut v[..dim]);
        Ok(integrand(&v[..dim])? * jac)
    })
}

const PAIRWISE_BLOCK: usize = 32;

pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().fold(Complex64::new(0.0, 0.0), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn pairwise_sum_real(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_real(&values[..mid]) + pairwise_sum_real(&values[mid..])
}

fn neumaier(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn compensated_sum(values: &[Complex64]) -> Complex64 {
    Complex64::new(
        neumaier(values.iter().map(|v| v.re)),
        neumaier(values.iter().map(|v| v.im)),
    )
}

/// Coordinates used to integrate over a real vector space of even dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VectorChart {
    /// One `(r, φ)` pair per consecutive coordinate plane; Jacobian `Π r`.
    Polar {
        radius: f64,
        radial: usize,
        angular: usize,
    },
    /// Truncated Gauss–Legendre in every coordinate.
    Cartesian { half_width: f64, points: usize },
}

impl VectorChart {
    /// The one-dimensional rules for a space of dimension `dim`.
    pub fn rules(&self, dim: usize) -> Result<Vec<Rule1D>, QuadratureError> {
        match *self {
            VectorChart::Polar {
                radius,
                radial,
                angular,
            } => {
                let r = radial_rule(RuleKind::GaussLegendreHalfLine, radius, radial)?;
                let a = torus_rule(angular)?;
                let mut out = Vec::with_capacity(dim);
                for _ in 0..dim / 2 {
                    out.push(r.clone());
                    out.push(a.clone());
                }
                Ok(out)
            }
            VectorChart::Cartesian { half_width, points } => {
                let r = radial_rule(RuleKind::GaussLegendreTruncated, half_width, points)?;
                Ok(vec![r; dim])
            }
        }
    }

    /// Maps chart coordinates to the vector `v` and returns the Jacobian.
    pub fn map(&self, coords: &[f64], v: &mut [f64]) -> f64 {
        match self {
            VectorChart::Polar { .. } => {
                let mut jac = 1.0;
                for (pair, out) in coords.chunks_exact(2).zip(v.chunks_exact_mut(2)) {
                    let (r, phi) = (pair[0], pair[1]);
                    let (s, c) = phi.sin_cos();
                    out[0] = r * c;
                    out[1] = r * s;
                    jac *= r;
                }
                jac
            }
            VectorChart::Cartesian { .. } => {
                v.copy_from_slice(coords);
                1.0
            }
        }
    }

    pub fn with_extent(self, extent: f64) -> Self {
        match self {
            VectorChart::Polar { radial, angular, .. } => VectorChart::Polar {
                radius: extent,
                radial,
                angular,
            },
            VectorChart::Cartesian { points, .. } => VectorChart::Cartesian {
                half_width: extent,
                points,
            },
        }
    }

    pub fn extent(&self) -> f64 {
        match *self {
            VectorChart::Polar { radius, .. } => radius,
            VectorChart::Cartesian { half_width, .. } => half_width,
        }
    }
}

/// Which chart the vector factors of a [`Resolution`] use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChartKind {
    #[default]
    Polar,
    Cartesian,
}

/// Per-factor node counts; truncation radii are chosen per integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    /// Points per circle factor of a torus.
    pub torus: usize,
    /// Gauss–Legendre points on radial and chamber factors.
    pub radial: usize,
    /// Points per angular factor of a polar chart.
    pub angular: usize,
    /// Points per coordinate of a Cartesian chart.
    pub cartesian: usize,
    pub chart: ChartKind,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            torus: 64,
            radial: 96,
            angular: 64,
            cartesian: 64,
            chart: ChartKind::Polar,
        }
    }
}

impl Resolution {
    /// Every factor's node count doubled.
    pub fn refined(&self) -> Self {
        Self {
            torus: 2 * self.torus,
            radial: 2 * self.radial,
            angular: 2 * self.angular,
            cartesian: 2 * self.cartesian,
            chart: self.chart,
        }
    }

    pub fn vector_chart(&self, extent: f64) -> VectorChart {
        match self.chart {
            ChartKind::Polar => VectorChart::Polar {
                radius: extent,
                radial: self.radial,
                angular: self.angular,
            },
            ChartKind::Cartesian => VectorChart::Cartesian {
                half_width: extent,
                points: self.cartesian,
            },
        }
    }

    /// `rank` unit-volume circle rules.
    pub fn torus_rules(&self, rank: usize) -> Result<Vec<Rule1D>, QuadratureError> {
        let rule = torus_rule(self.torus)?.unit_volume();
        Ok(vec![rule; rank])
    }
}

/// Truncation radius for an integrand bounded by `C e^{-c|v|²}`.
pub fn gaussian_truncation(c: f64) -> f64 {
    8.0 / c.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(factors: Vec<Rule1D>) -> QuadratureGrid {
        QuadratureGrid::new(factors)
    }

    #[test]
    fn torus_constant() {
        let r = torus_rule(8).unwrap();
        assert_eq!(r.integrate(|_| 1.0), 2.0 * PI);
        assert!((r.weights.iter().sum::<f64>() - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn torus_kills_low_modes() {
        let g = grid(vec![torus_rule(8).unwrap()]);
        let v = integrate(&g, |p| Complex64::from_polar(1.0, 3.0 * p[0])).unwrap();
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn torus_cos_squared() {
        let r = torus_rule(16).unwrap();
        assert!((r.integrate(|t| t.cos().powi(2)) - PI).abs() < 1e-14);
    }

    #[test]
    fn torus_rejects_small() {
        assert_eq!(torus_rule(3), Err(QuadratureError::TooFewTorusPoints(3)));
    }

    #[test]
    fn unit_volume_sums_to_one() {
        let r = torus_rule(64).unwrap().unit_volume();
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn radial_linear() {
        let r = radial_rule(RuleKind::GaussLegendreHalfLine, 1.0, 4).unwrap();
        assert!((r.integrate(|x| x) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn radial_gaussian_moment() {
        let r = radial_rule(RuleKind::GaussLegendreHalfLine, 8.0, 64).unwrap();
        let exact = 0.5 * (1.0 - (-64.0_f64).exp());
        assert!((r.integrate(|x| (-x * x).exp() * x) - exact).abs() < 1e-12);
    }

    /// Richardson oracle: composite Simpson on 2^k panels, extrapolated.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut s = f(a) + f(b);
        for i in 1..panels {
            let x = a + h * i as f64;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn radial_sinh_density_matches_richardson() {
        let f = |r: f64| (2.0 * r).sinh() * (-r * r).exp();
        let s1 = simpson(&f, 0.0, 8.0, 1 << 14);
        let s2 = simpson(&f, 0.0, 8.0, 1 << 15);
        let oracle = s2 + (s2 - s1) / 15.0;
        let r = radial_rule(RuleKind::GaussLegendreHalfLine, 8.0, 96).unwrap();
        assert!((r.integrate(f) - oracle).abs() < 1e-10, "{} vs {}", r.integrate(f), oracle);
    }

    #[test]
    fn radial_errors() {
        assert_eq!(
            radial_rule(RuleKind::GaussLegendreHalfLine, 1.0, 1),
            Err(QuadratureError::TooFewRadialPoints(1))
        );
        assert!(radial_rule(RuleKind::GaussLegendreHalfLine, 0.0, 4).is_err());
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(10);
        // ∫_{-1}^{1} x^18 dx = 2/19
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((v - 2.0 / 19.0).abs() < 1e-15);
        assert!(w.iter().all(|&wi| wi > 0.0));
    }

    #[test]
    fn zero_integrand() {
        let g = grid(vec![torus_rule(8).unwrap(), torus_rule(8).unwrap()]);
        assert_eq!(integrate(&g, |_| Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn torus_orthogonality() {
        let g = grid(vec![torus_rule(16).unwrap(), torus_rule(16).unwrap()]);
        let v = integrate(&g, |p| Complex64::from_polar(1.0, p[0] - p[1])).unwrap();
        assert!(v.norm() < 1e-13);
    }

    #[test]
    fn non_finite_names_node() {
        let g = grid(vec![torus_rule(8).unwrap()]);
        let err = integrate(&g, |p| {
            if p[0] > 3.0 {
                Complex64::new(f64::NAN, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .unwrap_err();
        match err {
            QuadratureError::NonFinite { index, .. } => assert_eq!(index, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn gaussian_3d(res: usize) -> Complex64 {
        let factors = vec![
            torus_rule(res).unwrap(),
            radial_rule(RuleKind::GaussLegendreHalfLine, 8.0, 2 * res).unwrap(),
            radial_rule(RuleKind::GaussLegendreTruncated, 8.0, 2 * res).unwrap(),
        ];
        integrate(&grid(factors), |p| {
            let amp = (1.0 + 0.3 * p[0].cos()) * (-p[1] * p[1] - (p[2] - 0.4).powi(2)).exp() * p[1];
            Complex64::new(amp, 0.0)
        })
        .unwrap()
    }

    #[test]
    fn three_factor_self_convergence() {
        let coarse = gaussian_3d(24);
        let fine = gaussian_3d(48);
        assert!((coarse - fine).norm() < 1e-8);
        // 2π · 1/2 · √π
        assert!((fine.re - PI * PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn compensated_matches_pairwise() {
        let g = grid(vec![torus_rule(32).unwrap(), torus_rule(32).unwrap()]);
        let f = |p: &[f64]| Complex64::new(1.0 + p[0].sin() * p[1].cos(), p[1]);
        let a = integrate(&g, f).unwrap();
        let b = integrate(&g.clone().with_reduction(Reduction::Compensated), f).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn polar_chart_area() {
        let chart = VectorChart::Polar {
            radius: 1.0,
            radial: 8,
            angular: 8,
        };
        let g = grid(chart.rules(2).unwrap());
        let area = integrate(&g, |p| {
            let mut v = [0.0; 2];
            let j = chart.map(p, &mut v);
            Complex64::new(j, 0.0)
        })
        .unwrap();
        assert!((area.re - PI).abs() < 1e-13);
    }

    #[test]
    fn signature_is_stable() {
        let g = grid(vec![
            torus_rule(8).unwrap(),
            radial_rule(RuleKind::GaussLegendreHalfLine, 8.0, 16).unwrap(),
        ]);
        assert_eq!(g.signature(), "T8xR16[0,8]");
    }
}
