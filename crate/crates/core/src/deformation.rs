//! Orbital integrals on the deformed groups `G_t` and their limit as
//! `t → 0`.
//!
//! `G_t` is integrated in `KAK` coordinates `g = k' exp(t a) k` with `a` in
//! the chamber `𝔞⁺`. The density `Π (sinh(α(t a)) / t)^{n_α}` times the
//! model's chamber measure tends to the Jacobian of `K × 𝔞⁺ → 𝔭`, so the
//! `t → 0` limit is an integral against Lebesgue measure on `𝔭`.

use num_complex::Complex64;
use thiserror::Error;

use crate::lie_model::{GroupElement, LieError, Mat};
use crate::motion_group::{MotionError, MotionGroup};
use crate::quadrature::{
    integrate_vector, pairwise_sum, radial_rule, try_integrate, QuadratureError, QuadratureGrid,
    Resolution, RuleKind, SmoothTestFunction,
};
use crate::root_character::{RestrictedRoot, TorusElement};

/// Number of trailing schedule entries whose gaps must decrease.
pub const MONOTONE_TAIL: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeformationError {
    #[error("t must be positive, got {0}")]
    NonPositiveT(f64),
    #[error("bad t schedule: {0}")]
    BadSchedule(String),
    #[error("chamber extent not found: |v| stays below {radius} along 𝔞 direction {axis}")]
    ChamberExtent { axis: usize, radius: f64 },
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// `Π_α (sinh(α(t s)) / t)^{n_α}` over the restricted roots.
#[derive(Debug, Clone)]
pub struct DeformedHaar {
    pub roots: Vec<RestrictedRoot>,
    pub chamber_measure: f64,
}

impl DeformedHaar {
    pub fn new(group: &MotionGroup) -> Self {
        Self {
            roots: group.datum().restricted_roots.clone(),
            chamber_measure: group.model().chamber_measure,
        }
    }

    pub fn density(&self, s: &[f64], t: f64) -> Result<f64, DeformationError> {
        if t <= 0.0 || t.is_nan() {
            return Err(DeformationError::NonPositiveT(t));
        }
        Ok(self
            .roots
            .iter()
            .map(|r| {
                let a = r.eval(s);
                let x = t * a;
                // sinh(x)/t = a · sinh(x)/x, kept accurate for small x
                let ratio = if x.abs() < 1e-4 {
                    1.0 + x * x / 6.0 + x.powi(4) / 120.0
                } else {
                    x.sinh() / x
                };
                (a * ratio).powi(r.multiplicity as i32)
            })
            .product())
    }

    /// The `t → 0` limit `Π α(s)^{n_α}`.
    pub fn limit_density(&self, s: &[f64]) -> f64 {
        self.roots
            .iter()
            .map(|r| r.eval(s).powi(r.multiplicity as i32))
            .product()
    }
}

pub fn haar_density_t(group: &MotionGroup, s: &[f64], t: f64) -> Result<f64, DeformationError> {
    DeformedHaar::new(group).density(s, t)
}

/// `g x g⁻¹` for `g = k' exp(t Σ s_i A_i) k`, in `(k, v)` coordinates on `G_t`.
fn conjugate_kak(
    group: &MotionGroup,
    x: &Mat,
    k_outer: &[f64],
    s: &[f64],
    k_inner: &[f64],
    t: f64,
) -> Result<(Vec<f64>, Vec<f64>), LieError> {
    let model = group.model();
    let n = model.matrix_size;
    let mut a = Mat::zeros(n, n);
    for (c, b) in s.iter().zip(&model.a_basis) {
        a += b * (*c * t);
    }
    let g = model.torus_element(k_outer).0 * a.exp() * model.torus_element(k_inner).0;
    let g_inv = g.clone().try_inverse().ok_or(LieError::NotInGroup(f64::INFINITY))?;
    let h = GroupElement(&g * x * g_inv);
    let (k, v) = model.polar_factor(&h, t)?;
    Ok((model.torus_angles(&k), v))
}

/// Chamber box `Π [0, s_i]` outside of which `|v|` of the conjugate exceeds
/// `radius`, found by bisection along each `𝔞` axis at `k = k' = e`.
fn chamber_extent(group: &MotionGroup, x: &Mat, radius: f64, t: f64) -> Result<Vec<f64>, DeformationError> {
    let d_a = group.model().d_a();
    let rank = group.rank();
    let zeros = vec![0.0; rank];
    let norm_at = |axis: usize, s: f64| -> Result<f64, DeformationError> {
        let mut point = vec![0.0; d_a];
        point[axis] = s;
        let (_, v) = conjugate_kak(group, x, &zeros, &point, &zeros, t)?;
        Ok(v.iter().map(|c| c * c).sum::<f64>().sqrt())
    };
    let mut out = Vec::with_capacity(d_a);
    for axis in 0..d_a {
        let mut hi = radius;
        let mut tries = 0;
        while norm_at(axis, hi)? < radius {
            hi *= 2.0;
            tries += 1;
            if tries > 20 {
                return Err(DeformationError::ChamberExtent { axis, radius });
            }
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if norm_at(axis, mid)? < radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(hi);
    }
    Ok(out)
}

/// `I(t) = ∫_{G_t} f(g x g⁻¹, t) d_t g`.
pub fn orbital_integral_t(
    group: &MotionGroup,
    f: &SmoothTestFunction,
    x: &TorusElement,
    t: f64,
    res: &Resolution,
) -> Result<Complex64, DeformationError> {
    if t <= 0.0 || t.is_nan() {
        return Err(DeformationError::NonPositiveT(t));
    }
    group.regular_det(x)?;
    let model = group.model();
    let rank = group.rank();
    let d_a = model.d_a();
    let xm = model.torus_element(x.angles()).0;
    let extent = chamber_extent(group, &xm, f.truncation_radius(), t)?;
    let mut factors = res.torus_rules(rank)?;
    for &e in &extent {
        factors.push(radial_rule(RuleKind::GaussLegendreHalfLine, e, res.radial)?);
    }
    factors.extend(res.torus_rules(rank)?);
    let grid = QuadratureGrid::new(factors);
    let haar = DeformedHaar::new(group);
    let value = try_integrate(&grid, |p| {
        let (k_outer, rest) = p.split_at(rank);
        let (s, k_inner) = rest.split_at(d_a);
        let density = haar.density(s, t).map_err(|e| e.to_string())?;
        let (k, v) = conjugate_kak(group, &xm, k_outer, s, k_inner, t)
            .map_err(|e| format!("polar factorization failed at {p:?}: {e}"))?;
        Ok(f.eval(&k, &v, t) * density)
    })?;
    Ok(value * haar.chamber_measure)
}

/// `∫_K ∫_𝔭 f(k x k⁻¹, w − Ad_{kxk⁻¹} w, 0) dk dw`.
pub fn limit_rhs(
    group: &MotionGroup,
    f: &SmoothTestFunction,
    x: &TorusElement,
    res: &Resolution,
) -> Result<Complex64, DeformationError> {
    group.regular_det(x)?;
    let model = group.model();
    let d = group.d_p();
    let id_minus = Mat::identity(d, d) - group.ad(x.angles());
    let sigma_min = id_minus.svd(false, false).singular_values.min();
    let chart = res.vector_chart(f.truncation_radius() / sigma_min);
    let torus = QuadratureGrid::new(res.torus_rules(group.rank())?);
    let xm = model.torus_element(x.angles());
    let mut angles = vec![0.0; group.rank()];
    let mut terms = Vec::with_capacity(torus.len());
    for i in 0..torus.len() {
        let weight = torus.node(i, &mut angles);
        let k = model.torus_element(&angles);
        let y = model.torus_angles(&k.mul(&xm).mul(&k.inverse()));
        let m = Mat::identity(d, d) - group.ad(&y);
        let inner = integrate_vector(&chart, d, |w| {
            let v: Vec<f64> = (0..d).map(|r| (0..d).map(|c| m[(r, c)] * w[c]).sum()).collect();
            Ok(f.eval(&y, &v, 0.0))
        })?;
        terms.push(inner * weight);
    }
    Ok(pairwise_sum(&terms))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub t: f64,
    pub value: Complex64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub limit: Complex64,
    /// `None` when the schedule is too short to judge.
    pub tail_monotone: Option<bool>,
    pub grid_signature: String,
}

impl ConvergenceTable {
    pub fn final_gap(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.gap)
    }

    /// Least-squares slope of `log gap` against `log t` over the tail.
    pub fn empirical_rate(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .rev()
            .take(MONOTONE_TAIL)
            .filter(|r| r.gap > 0.0)
            .map(|r| (r.t.ln(), r.gap.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    }

    /// Monotone tail and final gap below `tolerance`.
    pub fn passes(&self, tolerance: f64) -> bool {
        self.tail_monotone != Some(false) && self.final_gap() < tolerance
    }
}

pub fn validate_schedule(schedule: &[f64]) -> Result<(), DeformationError> {
    if schedule.is_empty() {
        return Err(DeformationError::BadSchedule("empty".into()));
    }
    if let Some(t) = schedule.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
        return Err(DeformationError::BadSchedule(format!("{t} is outside (0, 1]")));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(DeformationError::BadSchedule("not strictly decreasing".into()));
    }
    Ok(())
}

/// `I(t)` over the schedule against `I(0)` from [`limit_rhs`].
pub fn convergence_study(
    group: &MotionGroup,
    f: &SmoothTestFunction,
    x: &TorusElement,
    schedule: &[f64],
    res: &Resolution,
) -> Result<ConvergenceTable, DeformationError> {
    validate_schedule(schedule)?;
    let limit = limit_rhs(group, f, x, res)?;
    let mut rows = Vec::with_capacity(schedule.len());
    for &t in schedule {
        let value = orbital_integral_t(group, f, x, t, res)?;
        rows.push(ConvergenceRow {
            t,
            value,
            gap: (value - limit).norm(),
        });
    }
    let tail_monotone = if rows.len() < 2 {
        None
    } else {
        let start = rows.len().saturating_sub(MONOTONE_TAIL);
        Some(rows[start..].windows(2).all(|w| w[1].gap < w[0].gap))
    };
    let grid_signature = format!(
        "T{}^{}xA{}^{}xT{}^{}",
        res.torus,
        group.rank(),
        res.radial,
        group.model().d_a(),
        res.torus,
        group.rank()
    );
    Ok(ConvergenceTable {
        rows,
        limit,
        tail_monotone,
        grid_signature,
    })
}
