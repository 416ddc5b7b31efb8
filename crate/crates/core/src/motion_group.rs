//! The Cartan motion group `K ⋉ 𝔭` with law
//! `(k₁, v₁)(k₂, v₂) = (k₁k₂, Ad_{k₂}⁻¹ v₁ + v₂)`.
//!
//! `K` is the torus of the shipped models, so `K`-elements are carried as
//! angle vectors and composed by adding angles. The `𝔭` measure is Lebesgue
//! in orthonormal coordinates and `dk` has unit volume. The dual measure `dz`
//! carries `(2π)^{−dim 𝔭}`, which makes `∫ S(v) dv = g(0)` for the inverse
//! transform `S` of a profile `g`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::lie_model::{reduce_angle, LieError, Mat, ReductivePairModel};
use crate::quadrature::{
    gaussian_truncation, integrate_vector, pairwise_sum, torus_rule, DecayClass, Memo,
    QuadratureError, QuadratureGrid, Resolution, SmoothTestFunction, VectorChart,
};
use crate::root_character::{
    is_regular, CharacterError, FormalCharacter, HalfWeight, RootDatum, TorusElement,
    REGULARITY_EPS,
};

/// Largest admissible fraction of kernel energy outside the kept modes.
pub const TAIL_MASS_LIMIT: f64 = 1e-8;
pub const DEFAULT_MODE_CUTOFF: usize = 32;
/// Tolerance for `g(Ad_k z) = g(z)` on sample points.
pub const INVARIANCE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotionError {
    #[error("x = {0:?} is not regular")]
    Singular(Vec<f64>),
    #[error("mode cutoff {cutoff} leaves tail mass {tail:.3e} (limit {limit:.0e})")]
    CutoffTooSmall { cutoff: usize, tail: f64, limit: f64 },
    #[error("mode cutoff {cutoff} must be even and at most the {points} torus points")]
    BadCutoff { cutoff: usize, points: usize },
    #[error("scalar profile is not K-invariant (defect {0:.3e})")]
    NotInvariant(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Character(#[from] CharacterError),
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// A point `(k, v)` of `K ⋉ 𝔭`, `k` given by torus angles.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionElement {
    pub k: Vec<f64>,
    pub v: Vec<f64>,
}

impl MotionElement {
    pub fn new(k: &[f64], v: &[f64]) -> Self {
        Self {
            k: k.iter().map(|&a| reduce_angle(a)).collect(),
            v: v.to_vec(),
        }
    }

    pub fn identity(rank: usize, d_p: usize) -> Self {
        Self {
            k: vec![0.0; rank],
            v: vec![0.0; d_p],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.k.iter().chain(&self.v).all(|x| x.is_finite())
    }
}

/// A node of a torus rule with the matrix of `Ad_k` on `𝔭`.
#[derive(Debug, Clone)]
struct KNode {
    angles: Vec<f64>,
    weight: f64,
    ad: Mat,
}

fn mat_vec(m: &Mat, v: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..v.len()).map(|j| m[(i, j)] * v[j]).sum();
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Multi-index digits of a flat index, last factor fastest.
fn digits(mut index: usize, points: usize, rank: usize) -> Vec<usize> {
    let mut out = vec![0; rank];
    for d in out.iter_mut().rev() {
        *d = index % points;
        index /= points;
    }
    out
}

fn flat(digits: &[usize], points: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * points + d)
}

#[derive(Debug, Clone)]
pub struct MotionGroup {
    model: ReductivePairModel,
    datum: RootDatum,
}

impl MotionGroup {
    pub fn new(model: ReductivePairModel) -> Result<Self, MotionError> {
        let datum = RootDatum::for_model(&model)?;
        Ok(Self { model, datum })
    }

    pub fn model(&self) -> &ReductivePairModel {
        &self.model
    }

    pub fn datum(&self) -> &RootDatum {
        &self.datum
    }

    pub fn rank(&self) -> usize {
        self.model.torus_rank()
    }

    pub fn d_p(&self) -> usize {
        self.model.d_p()
    }

    /// Matrix of `Ad_k` on `𝔭` in `basis_p` coordinates.
    pub fn ad(&self, angles: &[f64]) -> Mat {
        self.model
            .ad_matrix(&self.model.torus_element(angles))
            .expect("torus elements act on 𝔭")
    }

    pub fn ad_apply(&self, angles: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        mat_vec(&self.ad(angles), v, &mut out);
        out
    }

    pub fn product(&self, a: &MotionElement, b: &MotionElement) -> MotionElement {
        let k: Vec<f64> = a.k.iter().zip(&b.k).map(|(x, y)| x + y).collect();
        let neg: Vec<f64> = b.k.iter().map(|x| -x).collect();
        let mut v = self.ad_apply(&neg, &a.v);
        for (x, y) in v.iter_mut().zip(&b.v) {
            *x += y;
        }
        MotionElement::new(&k, &v)
    }

    pub fn inverse(&self, a: &MotionElement) -> MotionElement {
        let k: Vec<f64> = a.k.iter().map(|x| -x).collect();
        let v: Vec<f64> = self.ad_apply(&a.k, &a.v).iter().map(|x| -x).collect();
        MotionElement::new(&k, &v)
    }

    /// `(k, v)(x, 0)(k, v)⁻¹ = (k x k⁻¹, Ad_k Ad_x⁻¹ v − Ad_k v)`.
    pub fn motion_conjugate(&self, x: &TorusElement, g: &MotionElement) -> MotionElement {
        let k = self.model.torus_element(&g.k);
        let kx = k.mul(&self.model.torus_element(x.angles()));
        let conj = self.model.torus_angles(&kx.mul(&k.inverse()));
        let x_inv: Vec<f64> = x.angles().iter().map(|a| -a).collect();
        let shifted = self.ad_apply(&x_inv, &g.v);
        let diff: Vec<f64> = shifted.iter().zip(&g.v).map(|(a, b)| a - b).collect();
        MotionElement {
            k: conj,
            v: self.ad_apply(&g.k, &diff),
        }
    }

    fn k_nodes(&self, points: usize) -> Result<Vec<KNode>, MotionError> {
        let rule = torus_rule(points)?.unit_volume();
        let grid = QuadratureGrid::new(vec![rule; self.rank()]);
        let mut angles = vec![0.0; self.rank()];
        Ok((0..grid.len())
            .map(|i| {
                let weight = grid.node(i, &mut angles);
                KNode {
                    angles: angles.clone(),
                    weight,
                    ad: self.ad(&angles),
                }
            })
            .collect())
    }

    /// `det_𝔭(id − Ad_x)`, or an error when `x` is singular.
    pub fn regular_det(&self, x: &TorusElement) -> Result<f64, MotionError> {
        if !is_regular(&self.model, &self.datum, x, REGULARITY_EPS)? {
            return Err(MotionError::Singular(x.angles().to_vec()));
        }
        Ok(crate::root_character::det_p_id_minus(&self.model, &self.datum, x)?.direct)
    }

    /// `τ_x(f) = det_𝔭(id − x)⁻¹ ∫_K ∫_𝔭 f(k x k⁻¹, v) dk dv`.
    pub fn orbital_integral_motion(
        &self,
        f: &SmoothTestFunction,
        x: &TorusElement,
        res: &Resolution,
    ) -> Result<Complex64, MotionError> {
        let det = self.regular_det(x)?;
        let chart = res.vector_chart(f.truncation_radius());
        let mut terms = Vec::new();
        for node in self.k_nodes(res.torus)? {
            let k = self.model.torus_element(&node.angles);
            let y = self.model.torus_angles(
                &k.mul(&self.model.torus_element(x.angles())).mul(&k.inverse()),
            );
            let inner = integrate_vector(&chart, self.d_p(), |v| Ok(f.eval(&y, v, 0.0)))?;
            terms.push(inner * node.weight);
        }
        Ok(pairwise_sum(&terms) / det)
    }

    /// Integrates `f` over the conjugacy class of `(x, 0)` through
    /// `(k, u) ↦ (k, u)(x, 0)(k, u)⁻¹`, dividing out the Jacobian
    /// `|det(Ad_k (Ad_x⁻¹ − id))| = |det_𝔭(id − x)|` explicitly.
    pub fn orbital_integral_motion_orbit(
        &self,
        f: &SmoothTestFunction,
        x: &TorusElement,
        res: &Resolution,
    ) -> Result<Complex64, MotionError> {
        let det = self.regular_det(x)?;
        let d = self.d_p();
        let id_minus = Mat::identity(d, d) - self.ad(x.angles());
        let sigma_min = id_minus.clone().svd(false, false).singular_values.min();
        let jac = id_minus.determinant().abs();
        let chart = res.vector_chart(f.truncation_radius() / sigma_min);
        let mut terms = Vec::new();
        for node in self.k_nodes(res.torus)? {
            let inner = integrate_vector(&chart, d, |u| {
                let g = self.motion_conjugate(x, &MotionElement::new(&node.angles, u));
                Ok(f.eval(&g.k, &g.v, 0.0))
            })?;
            terms.push(inner * node.weight);
        }
        Ok(pairwise_sum(&terms) * jac / det)
    }

    /// `(k, v) ↦ f(k₀ k k₀⁻¹, Ad_{k₀} v)`.
    pub fn conjugate_function(&self, f: &SmoothTestFunction, k0: &[f64]) -> SmoothTestFunction {
        let ad = self.ad(k0);
        let model = self.model.clone();
        let k0_el = model.torus_element(k0);
        let inner = f.clone();
        SmoothTestFunction::new(f.decay, format!("{} conjugated", f.note), move |k, v, t| {
            let conj = model.torus_angles(
                &k0_el.mul(&model.torus_element(k)).mul(&k0_el.inverse()),
            );
            let mut w = [0.0; crate::quadrature::MAX_CHART_DIM];
            mat_vec(&ad, v, &mut w[..v.len()]);
            inner.eval(&conj, &w[..v.len()], t)
        })
    }

    /// `(f ⋆ g)(h) = ∫ f(h m⁻¹) g(m) dm` by quadrature over `m`; the
    /// result is memoized.
    pub fn convolution(
        &self,
        f: &SmoothTestFunction,
        g: &SmoothTestFunction,
        res: &Resolution,
    ) -> Result<SmoothTestFunction, MotionError> {
        let d = self.d_p();
        let chart = res.vector_chart(g.truncation_radius());
        let vgrid = QuadratureGrid::new(chart.rules(d)?);
        let mut coords = vec![0.0; vgrid.dim()];
        let mut v_nodes = Vec::with_capacity(vgrid.len());
        for i in 0..vgrid.len() {
            let w = vgrid.node(i, &mut coords);
            let mut v = vec![0.0; d];
            let jac = chart.map(&coords, &mut v);
            v_nodes.push((v, w * jac));
        }
        struct Node {
            angles: Vec<f64>,
            ad: Mat,
            v: Vec<f64>,
            weighted_g: Complex64,
        }
        let mut nodes = Vec::new();
        for k in self.k_nodes(res.torus)? {
            for (v, w) in &v_nodes {
                let value = g.eval(&k.angles, v, 0.0) * (w * k.weight);
                if value != Complex64::new(0.0, 0.0) {
                    nodes.push(Node {
                        angles: k.angles.clone(),
                        ad: k.ad.clone(),
                        v: v.clone(),
                        weighted_g: value,
                    });
                }
            }
        }
        let decay = convolution_decay(&f.decay, &g.decay);
        let f = f.clone();
        let conv = SmoothTestFunction::new(decay, format!("({}) ⋆ ({})", f.note, g.note), move |k, v, _| {
            let mut diff = [0.0; crate::quadrature::MAX_CHART_DIM];
            let mut w = [0.0; crate::quadrature::MAX_CHART_DIM];
            let mut km = [0.0; crate::quadrature::MAX_CHART_DIM];
            let terms: Vec<Complex64> = nodes
                .iter()
                .map(|n| {
                    for i in 0..d {
                        diff[i] = v[i] - n.v[i];
                    }
                    mat_vec(&n.ad, &diff[..d], &mut w[..d]);
                    for (i, (a, b)) in k.iter().zip(&n.angles).enumerate() {
                        km[i] = reduce_angle(a - b);
                    }
                    f.eval(&km[..k.len()], &w[..d], 0.0) * n.weighted_g
                })
                .collect();
            pairwise_sum(&terms)
        });
        Ok(conv.memoized())
    }

    /// The kernel `f̂(z)(k₁, k₂) = ∫_𝔭 f(k₁k₂⁻¹, v) e^{i⟨z, Ad_{k₂}⁻¹ v⟩} dv`
    /// sampled on a `res.torus`-point grid per circle factor, together with
    /// its matrix in the Fourier modes `|m_j| ≤ cutoff/2`, `m_j ≠ cutoff/2`.
    pub fn fourier_transform(
        &self,
        f: &SmoothTestFunction,
        z: &[f64],
        cutoff: usize,
        res: &Resolution,
    ) -> Result<FourierKernel, MotionError> {
        let points = res.torus;
        if cutoff == 0 || cutoff % 2 != 0 || cutoff > points {
            return Err(MotionError::BadCutoff { cutoff, points });
        }
        let rank = self.rank();
        let d = self.d_p();
        let nodes = self.k_nodes(points)?;
        let n = nodes.len();
        let chart = res.vector_chart(f.truncation_radius());
        let zetas: Vec<Vec<f64>> = nodes
            .iter()
            .map(|node| {
                let mut zeta = vec![0.0; d];
                mat_vec(&node.ad, z, &mut zeta);
                zeta
            })
            .collect();
        let mut kernel = DMatrix::<Complex64>::zeros(n, n);
        for j in 0..n {
            let dj = digits(j, points, rank);
            for l in 0..n {
                let dl = digits(l, points, rank);
                let diff: Vec<usize> = dj.iter().zip(&dl).map(|(a, b)| (a + points - b) % points).collect();
                let angles = &nodes[flat(&diff, points)].angles;
                let zeta = &zetas[l];
                kernel[(j, l)] = integrate_vector(&chart, d, |v| {
                    Ok(f.eval(angles, v, 0.0) * Complex64::from_polar(1.0, dot(zeta, v)))
                })?;
            }
        }
        FourierKernel::from_samples(kernel, points, rank, cutoff, &nodes)
    }

    /// `∫_K e^{i⟨Ad_u z, v⟩} du` integrated against `g(z) dz`, without the
    /// block character: `S(v) = (2π)^{−dim 𝔭} ∫∫ g(z) e^{i⟨Ad_u z, v⟩} du dz`.
    pub fn inverse_fourier_scalar(
        &self,
        scalar: &ScalarProfile,
        v: &[f64],
        grid: &InverseFourierGrid,
    ) -> Result<Complex64, MotionError> {
        let table = InverseFourierTable::new(self, scalar, grid)?;
        Ok(table.eval(v))
    }

    /// `χ_E(k) · S(v)` with `E` the (graded) block of the profile.
    pub fn inverse_fourier_of_profile(
        &self,
        p: &OperatorProfile,
        k: &[f64],
        v: &[f64],
        grid: &InverseFourierGrid,
    ) -> Result<Complex64, MotionError> {
        let chi = p.block_character(&self.datum)?.evaluate(k);
        Ok(chi * self.inverse_fourier_scalar(&p.scalar, v, grid)?)
    }

    /// The test function `(k, v) ↦ χ_E(k) S(v)`, with `S` memoized.
    pub fn profile_function(
        &self,
        p: &OperatorProfile,
        grid: &InverseFourierGrid,
    ) -> Result<SmoothTestFunction, MotionError> {
        let table = Arc::new(InverseFourierTable::new(self, &p.scalar, grid)?);
        self.profile_function_with(p, table)
    }

    /// Like [`MotionGroup::profile_function`], sharing a precomputed table.
    pub fn profile_function_with(
        &self,
        p: &OperatorProfile,
        table: Arc<InverseFourierTable>,
    ) -> Result<SmoothTestFunction, MotionError> {
        let chi = p.block_character(&self.datum)?;
        let dim = chi.evaluate(&vec![0.0; self.rank()]).norm();
        let s0 = table.eval(&vec![0.0; self.d_p()]).norm();
        let decay = DecayClass::Gaussian {
            constant: dim * s0,
            rate: 1.0 / (4.0 * p.scalar.rate),
            offset: 0.0,
        };
        Ok(SmoothTestFunction::new(
            decay,
            format!("inverse transform of {}", p.scalar.note),
            move |k, v, _| chi.evaluate(k) * table.eval(v),
        ))
    }

    /// `(−1)^{dim 𝔭/2} χ_E(x) g(0) / (χ_{S⁺} − χ_{S⁻})(x)²`.
    pub fn prop_tau_closed_form(&self, p: &OperatorProfile, x: &TorusElement) -> Result<Complex64, MotionError> {
        self.regular_det(x)?;
        let chi = p.block_character(&self.datum)?.evaluate(x.angles());
        let s = self.datum.spinor_difference().evaluate(x.angles());
        let sign = if (self.d_p() / 2) % 2 == 0 { 1.0 } else { -1.0 };
        Ok(sign * chi * p.scalar.at_origin(self.d_p()) / (s * s))
    }
}

fn convolution_decay(a: &DecayClass, b: &DecayClass) -> DecayClass {
    use DecayClass::*;
    match (*a, *b) {
        (CompactBump { radius: r1 }, CompactBump { radius: r2 }) => CompactBump { radius: r1 + r2 },
        (
            Gaussian {
                constant: c1,
                rate: a1,
                offset: o1,
            },
            Gaussian {
                constant: c2,
                rate: a2,
                offset: o2,
            },
        ) => Gaussian {
            constant: c1 * c2 * PI / (a1 + a2),
            rate: a1 * a2 / (a1 + a2),
            offset: o1 + o2,
        },
        (Gaussian { constant, rate, offset }, CompactBump { radius })
        | (CompactBump { radius }, Gaussian { constant, rate, offset }) => Gaussian {
            constant: constant * PI * radius * radius,
            rate,
            offset: offset + radius,
        },
    }
}

/// A convolution kernel on `K × K` sampled on a torus grid and expanded in
/// Fourier modes of `K` (unit-volume `dk`).
#[derive(Debug, Clone)]
pub struct FourierKernel {
    pub points: usize,
    pub rank: usize,
    pub cutoff: usize,
    pub kernel: DMatrix<Complex64>,
    pub modes: Vec<Vec<i32>>,
    /// `T_{mn} = ∫∫ e^{−i⟨m,k₁⟩} A(k₁, k₂) e^{i⟨n,k₂⟩} dk₁ dk₂` on the kept modes.
    pub matrix: DMatrix<Complex64>,
    /// Fraction of `Σ |T_{mn}|²` in modes with some `|m_j| ≥ cutoff/2`.
    pub tail_mass: f64,
}

impl FourierKernel {
    fn from_samples(
        kernel: DMatrix<Complex64>,
        points: usize,
        rank: usize,
        cutoff: usize,
        nodes: &[KNode],
    ) -> Result<Self, MotionError> {
        let n = nodes.len();
        let half = (points / 2) as i32;
        let all_modes: Vec<Vec<i32>> = (0..n)
            .map(|i| digits(i, points, rank).iter().map(|&d| d as i32 - half).collect())
            .collect();
        let mut dft = DMatrix::<Complex64>::zeros(n, n);
        for (m, mode) in all_modes.iter().enumerate() {
            for (j, node) in nodes.iter().enumerate() {
                dft[(m, j)] = Complex64::from_polar(1.0 / n as f64, -dot_i(mode, &node.angles));
            }
        }
        let full = &dft * &kernel * dft.adjoint();
        let c = (cutoff / 2) as i32;
        let kept: Vec<usize> = (0..n)
            .filter(|&i| all_modes[i].iter().all(|&m| -c <= m && m < c))
            .collect();
        let inner: Vec<bool> = all_modes.iter().map(|m| m.iter().all(|&x| x.abs() < c)).collect();
        let mut total = 0.0;
        let mut tail = 0.0;
        for a in 0..n {
            for b in 0..n {
                let e = full[(a, b)].norm_sqr();
                total += e;
                if !(inner[a] && inner[b]) {
                    tail += e;
                }
            }
        }
        let tail_mass = if total > 0.0 { tail / total } else { 0.0 };
        if tail_mass > TAIL_MASS_LIMIT {
            return Err(MotionError::CutoffTooSmall {
                cutoff,
                tail: tail_mass,
                limit: TAIL_MASS_LIMIT,
            });
        }
        let matrix = DMatrix::from_fn(kept.len(), kept.len(), |a, b| full[(kept[a], kept[b])]);
        Ok(Self {
            points,
            rank,
            cutoff,
            kernel,
            modes: kept.iter().map(|&i| all_modes[i].clone()).collect(),
            matrix,
            tail_mass,
        })
    }

    /// Mode matrix of the composition `∫ A(k₁, k) B(k, k₂) dk`.
    pub fn compose(&self, other: &FourierKernel) -> DMatrix<Complex64> {
        &self.matrix * &other.matrix
    }
}

fn dot_i(m: &[i32], angles: &[f64]) -> f64 {
    m.iter().zip(angles).map(|(&a, &b)| a as f64 * b).sum()
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// A scalar profile `g` on `𝔭̂` with `|g(z)| ≲ e^{−rate |z|²}`.
#[derive(Clone)]
pub struct ScalarProfile {
    eval: Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>,
    pub rate: f64,
    pub note: String,
}

impl fmt::Debug for ScalarProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarProfile")
            .field("rate", &self.rate)
            .field("note", &self.note)
            .finish()
    }
}

impl ScalarProfile {
    pub fn new<F>(rate: f64, note: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            rate,
            note: note.into(),
        }
    }

    /// `amplitude · e^{−rate |z|²}`.
    pub fn gaussian(rate: f64, amplitude: f64) -> Self {
        Self::new(rate, format!("{amplitude}·exp(-{rate}|z|²)"), move |z| {
            Complex64::new(amplitude * (-rate * dot(z, z)).exp(), 0.0)
        })
    }

    /// `|z|² e^{−rate |z|²}`, which vanishes at the origin.
    pub fn quadratic_gaussian(rate: f64) -> Self {
        Self::new(rate, format!("|z|²·exp(-{rate}|z|²)"), move |z| {
            let r2 = dot(z, z);
            Complex64::new(r2 * (-rate * r2).exp(), 0.0)
        })
    }

    pub fn zero() -> Self {
        Self::new(1.0, "0", |_| Complex64::new(0.0, 0.0))
    }

    pub fn eval(&self, z: &[f64]) -> Complex64 {
        (self.eval)(z)
    }

    pub fn at_origin(&self, d_p: usize) -> Complex64 {
        self.eval(&vec![0.0; d_p])
    }
}

/// How the block `E` of a profile is tensored with the spinors of `𝔭`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grading {
    Plain,
    SpinPlus,
    SpinMinus,
}

/// `g(z) · id_B` where `B` is `E`, `S⁺ ⊗ E` or `S⁻ ⊗ E` and `E` is the
/// irreducible `K`-module of the given highest weight.
#[derive(Debug, Clone)]
pub struct OperatorProfile {
    pub scalar: ScalarProfile,
    pub highest_weight: HalfWeight,
    pub grading: Grading,
}

impl OperatorProfile {
    pub fn new(scalar: ScalarProfile, highest_weight: HalfWeight, grading: Grading) -> Self {
        Self {
            scalar,
            highest_weight,
            grading,
        }
    }

    /// Formal character of the block `B`.
    pub fn block_character(&self, datum: &RootDatum) -> Result<FormalCharacter, MotionError> {
        let e = datum.irreducible_character(&self.highest_weight)?;
        let (plus, minus) = datum.spinor_weights();
        Ok(match self.grading {
            Grading::Plain => e,
            Grading::SpinPlus => &FormalCharacter::from_weights(&plus) * &e,
            Grading::SpinMinus => &FormalCharacter::from_weights(&minus) * &e,
        })
    }

    /// Largest `|g(Ad_k z) − g(z)|` over sample points; an error beyond
    /// [`INVARIANCE_TOL`].
    pub fn check_invariance(&self, group: &MotionGroup) -> Result<f64, MotionError> {
        let d = group.d_p();
        let mut defect: f64 = 0.0;
        for s in 0..7 {
            let z: Vec<f64> = (0..d).map(|i| 0.3 * (s as f64 + 1.0) * ((i + s) as f64).cos()).collect();
            for j in 0..8 {
                let angles: Vec<f64> = (0..group.rank()).map(|r| 0.37 * (j + 1 + r) as f64).collect();
                let rotated = group.ad_apply(&angles, &z);
                defect = defect.max((self.scalar.eval(&rotated) - self.scalar.eval(&z)).norm());
            }
        }
        if defect > INVARIANCE_TOL {
            return Err(MotionError::NotInvariant(defect));
        }
        Ok(defect)
    }
}

/// Quadrature for the inverse transform of a scalar profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseFourierGrid {
    pub radial: usize,
    pub angular: usize,
    /// Points per circle factor for the `du` average.
    pub u_points: usize,
}

impl Default for InverseFourierGrid {
    fn default() -> Self {
        Self {
            radial: 96,
            angular: 96,
            u_points: 4,
        }
    }
}

/// Precomputed `z`-nodes for `S(v)`, with a memo over `v`.
pub struct InverseFourierTable {
    /// `(Ad_u⁻¹-free node z, weight · g(z))`, flattened over `u` and `z`.
    nodes: Vec<(Vec<f64>, Complex64)>,
    memo: Memo,
}

impl InverseFourierTable {
    pub fn new(group: &MotionGroup, scalar: &ScalarProfile, grid: &InverseFourierGrid) -> Result<Self, MotionError> {
        let d = group.d_p();
        let chart = VectorChart::Polar {
            radius: gaussian_truncation(scalar.rate),
            radial: grid.radial,
            angular: grid.angular,
        };
        let zgrid = QuadratureGrid::new(chart.rules(d)?);
        let norm = (2.0 * PI).powi(d as i32);
        let mut coords = vec![0.0; zgrid.dim()];
        let mut nodes = Vec::new();
        for u in group.k_nodes(grid.u_points)? {
            for i in 0..zgrid.len() {
                let w = zgrid.node(i, &mut coords);
                let mut z = vec![0.0; d];
                let jac = chart.map(&coords, &mut z);
                let gz = scalar.eval(&z) * (w * jac * u.weight / norm);
                if gz != Complex64::new(0.0, 0.0) {
                    let mut uz = vec![0.0; d];
                    mat_vec(&u.ad, &z, &mut uz);
                    nodes.push((uz, gz));
                }
            }
        }
        Ok(Self {
            nodes,
            memo: Memo::default(),
        })
    }

    pub fn eval(&self, v: &[f64]) -> Complex64 {
        let key = Memo::key(&[v]);
        self.memo.get_or_insert(key, || {
            let terms: Vec<Complex64> = self
                .nodes
                .iter()
                .map(|(z, gz)| gz * Complex64::from_polar(1.0, dot(z, v)))
                .collect();
            pairwise_sum(&terms)
        })
    }

    pub fn cached(&self) -> usize {
        self.memo.len()
    }
}
