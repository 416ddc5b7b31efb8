//! Trace pairings with discrete-series classes.
//!
//! At `t = 0` the pairing `τ_x` is computed by quadrature from the smoothing
//! kernels `f±` whose Fourier transforms are `g(z) · id_{S±⊗E}`, and compared
//! with the closed-form character value. The `L²`-trace side is the formal
//! degree `(Λⁿ β_μ)([𝔭]) / (n 2ⁿ)`, `β_μ(X, Y) = μ([X, Y])`, whose bracket
//! scales by `t²` on `G_t`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::lie_model::{LieError, Mat, ReductivePairModel};
use crate::motion_group::{
    Grading, InverseFourierGrid, InverseFourierTable, MotionError, MotionGroup, OperatorProfile,
    ScalarProfile,
};
use crate::quadrature::Resolution;
use crate::root_character::{
    discrete_series_character_value, CharacterError, HalfWeight, TorusElement,
};

/// How weights pair with the torus: `μ(T_j) = μ_j` on the generator of the
/// `j`-th circle, with real values (the compact convention).
pub const WEIGHT_CONVENTION: &str = "compact: mu(T_j) = mu_j on the j-th torus generator, real-valued";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PairingError {
    #[error("t = {0} is outside [0, 1]")]
    TOutOfRange(f64),
    #[error("t must be positive, got {0}")]
    NonPositiveT(f64),
    #[error("formal degree of {0} vanishes, so the ratio is undefined")]
    ZeroDegree(String),
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Character(#[from] CharacterError),
    #[error(transparent)]
    Lie(#[from] LieError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    CmFormula,
}

/// Pairing values for one weight and element across a list of `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingReport {
    pub model: String,
    pub mu: Vec<f64>,
    /// `None` for the identity (the `L²`-trace).
    pub x_angles: Option<Vec<f64>>,
    pub t_list: Vec<f64>,
    pub method: Method,
    /// `[re, im]` per entry of `t_list`.
    pub values: Vec<[f64; 2]>,
    pub tolerance: f64,
}

impl PairingReport {
    pub fn is_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }
}

pub fn complex_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// `τ_x(f⁺ − f⁻)` at `t = 0`, sharing one inverse-transform table across
/// weights and elements.
pub struct T0Pairing<'a> {
    group: &'a MotionGroup,
    scalar: ScalarProfile,
    table: Arc<InverseFourierTable>,
    res: Resolution,
}

impl<'a> T0Pairing<'a> {
    pub fn new(
        group: &'a MotionGroup,
        scalar: ScalarProfile,
        grid: &InverseFourierGrid,
        res: Resolution,
    ) -> Result<Self, PairingError> {
        let table = Arc::new(InverseFourierTable::new(group, &scalar, grid)?);
        Ok(Self {
            group,
            scalar,
            table,
            res,
        })
    }

    /// `τ_x(f)` for the single profile `g · id_B`.
    pub fn orbital_value(&self, mu: &HalfWeight, grading: Grading, x: &TorusElement) -> Result<Complex64, PairingError> {
        let p = OperatorProfile::new(self.scalar.clone(), mu.clone(), grading);
        let f = self.group.profile_function_with(&p, self.table.clone())?;
        Ok(self.group.orbital_integral_motion(&f, x, &self.res)?)
    }

    pub fn value(&self, mu: &HalfWeight, x: &TorusElement) -> Result<Complex64, PairingError> {
        let plus = self.orbital_value(mu, Grading::SpinPlus, x)?;
        let minus = self.orbital_value(mu, Grading::SpinMinus, x)?;
        Ok(plus - minus)
    }
}

/// `τ_x(f⁺ − f⁻)` with `f̂±(z) = g(z) · id_{S±⊗E}`.
pub fn pairing_t0_numeric(
    group: &MotionGroup,
    mu: &HalfWeight,
    x: &TorusElement,
    scalar: &ScalarProfile,
    grid: &InverseFourierGrid,
    res: &Resolution,
) -> Result<Complex64, PairingError> {
    group.regular_det(x)?;
    T0Pairing::new(group, scalar.clone(), grid, *res)?.value(mu, x)
}

/// `τ_x([P^E_t])`, which does not depend on `t`.
pub fn pairing_value(group: &MotionGroup, mu: &HalfWeight, x: &TorusElement, t: f64) -> Result<Complex64, PairingError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(PairingError::TOutOfRange(t));
    }
    Ok(discrete_series_character_value(group.datum(), mu, x)?)
}

/// `β_μ(X_i, X_j) = μ([s X_i, s X_j])` on `basis_p`, with `μ` read off the
/// torus components of the bracket.
pub fn beta_matrix(model: &ReductivePairModel, mu: &HalfWeight, scale: f64) -> Result<Mat, PairingError> {
    let rank = model.torus_rank();
    if mu.rank() != rank {
        return Err(PairingError::Character(CharacterError::Rank {
            expected: rank,
            got: mu.rank(),
        }));
    }
    let weights = mu.as_f64();
    let d = model.d_p();
    let mut beta = Mat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let x = &model.basis_p[i] * scale;
            let y = &model.basis_p[j] * scale;
            let bracket = &x * &y - &y * &x;
            beta[(i, j)] = model
                .torus_basis
                .iter()
                .zip(&weights)
                .map(|(tb, w)| w * model.bilinear_form(tb, &bracket) / model.bilinear_form(tb, tb))
                .sum();
        }
    }
    Ok(beta)
}

/// Pfaffian of an antisymmetric matrix by expansion along the first row.
pub fn pfaffian(m: &Mat) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 1.0;
    }
    if n % 2 == 1 {
        return 0.0;
    }
    let mut total = 0.0;
    for j in 1..n {
        if m[(0, j)] == 0.0 {
            continue;
        }
        let keep: Vec<usize> = (1..n).filter(|&k| k != j).collect();
        let minor = Mat::from_fn(n - 2, n - 2, |a, b| m[(keep[a], keep[b])]);
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * m[(0, j)] * pfaffian(&minor);
    }
    total
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `|(Λⁿ β_μ)(e_1, …, e_{2n})| / (n 2ⁿ)` with the bracket scaled by `s²`.
fn formal_degree_scaled(model: &ReductivePairModel, mu: &HalfWeight, scale: f64) -> Result<f64, PairingError> {
    let beta = beta_matrix(model, mu, scale)?;
    let n = model.d_p() / 2;
    let top = factorial(n) * pfaffian(&beta);
    Ok(top.abs() / (n as f64 * 2f64.powi(n as i32)))
}

/// Formal degree of the discrete series attached to `μ`, as a magnitude;
/// see [`WEIGHT_CONVENTION`].
pub fn formal_degree(model: &ReductivePairModel, mu: &HalfWeight) -> Result<f64, PairingError> {
    formal_degree_scaled(model, mu, 1.0)
}

/// Formal degree on `G_t` divided by the one on `G`, from the bracket
/// `[X, Y]_t = t² [X, Y]` on `𝔭`.
pub fn l2_scaling(model: &ReductivePairModel, mu: &HalfWeight, t: f64) -> Result<f64, PairingError> {
    if !(t > 0.0) {
        return Err(PairingError::NonPositiveT(t));
    }
    if t > 1.0 {
        return Err(PairingError::TOutOfRange(t));
    }
    let base = formal_degree(model, mu)?;
    if base == 0.0 {
        return Err(PairingError::ZeroDegree(mu.to_string()));
    }
    Ok(formal_degree_scaled(model, mu, t)? / base)
}
