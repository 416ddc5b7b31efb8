//! Root data, formal characters on the weight lattice, and the character
//! identities used by the orbital-integral and pairing computations.
//!
//! Weights are stored with doubled integer coordinates so that the
//! half-roots `α/2` appearing in Weyl denominators and spinor characters are
//! exact. A weight `w` pairs with a torus element `x = exp(Σ θ_j T_j)` as
//! `e^{w}(x) = exp(i Σ w_j θ_j)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

use crate::lie_model::{reduce_angle, LieError, Mat, ReductivePairModel};

/// Default regularity threshold on `|det_𝔭(id − x)|`.
pub const REGULARITY_EPS: f64 = 1e-8;
/// Agreement required between the two determinant routes.
pub const DET_AGREEMENT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CharacterError {
    #[error("weight {0} is not dominant")]
    NotDominant(HalfWeight),
    #[error("torus element {0:?} is singular")]
    Singular(Vec<f64>),
    #[error("root datum inconsistent with model: {0}")]
    Inconsistent(String),
    #[error("Laurent polynomial division is not exact")]
    NotDivisible,
    #[error("expected rank {expected}, got {got}")]
    Rank { expected: usize, got: usize },
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// A weight with half-integer coordinates, stored doubled.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfWeight(Vec<i32>);

impl HalfWeight {
    /// From integer coordinates.
    pub fn integral(coords: &[i32]) -> Self {
        Self(coords.iter().map(|c| 2 * c).collect())
    }

    /// From doubled coordinates (`[1]` is the weight `1/2`).
    pub fn from_doubled(doubled: Vec<i32>) -> Self {
        Self(doubled)
    }

    pub fn zero(rank: usize) -> Self {
        Self(vec![0; rank])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn doubled(&self) -> &[i32] {
        &self.0
    }

    pub fn half(&self) -> Option<HalfWeight> {
        if self.0.iter().all(|c| c % 2 == 0) {
            Some(Self(self.0.iter().map(|c| c / 2).collect()))
        } else {
            None
        }
    }

    /// Exact halving, valid for roots (which are integral).
    fn halved(&self) -> HalfWeight {
        Self(self.0.iter().map(|c| c / 2).collect())
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&c| 0.5 * c as f64).collect()
    }

    /// `⟨w, θ⟩`.
    pub fn pair(&self, angles: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(angles)
            .map(|(&c, &a)| 0.5 * c as f64 * a)
            .sum()
    }

    /// Euclidean inner product of doubled coordinates.
    fn dot_doubled(&self, other: &HalfWeight) -> i64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a as i64 * b as i64)
            .sum()
    }
}

impl Add for &HalfWeight {
    type Output = HalfWeight;
    fn add(self, rhs: &HalfWeight) -> HalfWeight {
        HalfWeight(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &HalfWeight {
    type Output = HalfWeight;
    fn sub(self, rhs: &HalfWeight) -> HalfWeight {
        HalfWeight(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &HalfWeight {
    type Output = HalfWeight;
    fn neg(self) -> HalfWeight {
        HalfWeight(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for HalfWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            if c % 2 == 0 {
                write!(f, "{}", c / 2)?;
            } else {
                write!(f, "{c}/2")?;
            }
        }
        f.write_str(")")
    }
}

/// Finitely supported integer combination of exponentials `e^{w}`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FormalCharacter {
    terms: BTreeMap<HalfWeight, i64>,
}

impl FormalCharacter {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(weight: HalfWeight, coeff: i64) -> Self {
        let mut terms = BTreeMap::new();
        if coeff != 0 {
            terms.insert(weight, coeff);
        }
        Self { terms }
    }

    pub fn one(rank: usize) -> Self {
        Self::monomial(HalfWeight::zero(rank), 1)
    }

    /// `e^{w} − e^{−w}`.
    pub fn binomial(weight: &HalfWeight) -> Self {
        &Self::monomial(weight.clone(), 1) - &Self::monomial(-weight, 1)
    }

    /// Character of a representation given by its weight list.
    pub fn from_weights<'a>(weights: impl IntoIterator<Item = &'a HalfWeight>) -> Self {
        let mut out = Self::zero();
        for w in weights {
            out.add_term(w.clone(), 1);
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&HalfWeight, i64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, w: HalfWeight, c: i64) {
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(w.clone()).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.terms.remove(&w);
        }
    }

    /// `Σ c_w e^{i⟨w, θ⟩}`.
    pub fn evaluate(&self, angles: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(w, &c)| Complex64::from_polar(c as f64, w.pair(angles)))
            .sum()
    }

    /// Image under a lattice automorphism (doubled coordinates transform
    /// linearly, so the same integer matrix applies).
    pub fn transform(&self, w: &WeylElement) -> Self {
        let mut out = Self::zero();
        for (weight, &c) in &self.terms {
            out.add_term(w.apply(weight), c);
        }
        out
    }

    /// Exact quotient `self / divisor` in the ring of Laurent polynomials
    /// with integer coefficients.
    pub fn exact_div(&self, divisor: &FormalCharacter) -> Result<Self, CharacterError> {
        if divisor.is_zero() {
            return Err(CharacterError::NotDivisible);
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let (lead_w, lead_c) = divisor.terms.iter().next_back().expect("non-empty");
        let (tail_w, _) = divisor.terms.iter().next().expect("non-empty");
        let floor = self.terms.keys().next().expect("non-empty").clone();
        let mut rest = self.clone();
        let mut quotient = Self::zero();
        while let Some((w, &c)) = rest.terms.iter().next_back() {
            let q_w = w - lead_w;
            if &(&q_w + tail_w) < &floor {
                return Err(CharacterError::NotDivisible);
            }
            if c % lead_c != 0 {
                return Err(CharacterError::NotDivisible);
            }
            let q_c = c / lead_c;
            let step = Self::monomial(q_w.clone(), q_c);
            quotient.add_term(q_w, q_c);
            rest = &rest - &(&step * divisor);
        }
        Ok(quotient)
    }
}

impl Add for &FormalCharacter {
    type Output = FormalCharacter;
    fn add(self, rhs: &FormalCharacter) -> FormalCharacter {
        let mut out = self.clone();
        for (w, &c) in &rhs.terms {
            out.add_term(w.clone(), c);
        }
        out
    }
}

impl Sub for &FormalCharacter {
    type Output = FormalCharacter;
    fn sub(self, rhs: &FormalCharacter) -> FormalCharacter {
        let mut out = self.clone();
        for (w, &c) in &rhs.terms {
            out.add_term(w.clone(), -c);
        }
        out
    }
}

impl Mul for &FormalCharacter {
    type Output = FormalCharacter;
    fn mul(self, rhs: &FormalCharacter) -> FormalCharacter {
        let mut out = FormalCharacter::zero();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &rhs.terms {
                out.add_term(a + b, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for FormalCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(if *c < 0 { " - " } else { " + " })?;
            } else if *c < 0 {
                f.write_str("-")?;
            }
            write!(f, "{}·e^{}", c.abs(), w)?;
        }
        Ok(())
    }
}

/// A Weyl group element as an integer matrix on weight coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeylElement {
    /// Row-major `rank × rank`.
    pub matrix: Vec<Vec<i32>>,
    /// `(−1)^{ℓ(w)}`.
    pub sign: i32,
}

impl WeylElement {
    pub fn identity(rank: usize) -> Self {
        let matrix = (0..rank)
            .map(|i| (0..rank).map(|j| i32::from(i == j)).collect())
            .collect();
        Self { matrix, sign: 1 }
    }

    pub fn apply(&self, w: &HalfWeight) -> HalfWeight {
        HalfWeight(
            self.matrix
                .iter()
                .map(|row| row.iter().zip(&w.0).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    /// Action on torus angles: the transpose-inverse, which for the
    /// orthogonal integer matrices used here is the inverse.
    pub fn act_on_angles(&self, angles: &[f64]) -> Vec<f64> {
        let rank = angles.len();
        (0..rank)
            .map(|j| {
                let s: f64 = (0..rank).map(|i| self.matrix[i][j] as f64 * angles[i]).sum();
                reduce_angle(s)
            })
            .collect()
    }

    fn block_sum(&self, other: &WeylElement) -> WeylElement {
        let (a, b) = (self.matrix.len(), other.matrix.len());
        let mut matrix = vec![vec![0; a + b]; a + b];
        for i in 0..a {
            matrix[i][..a].copy_from_slice(&self.matrix[i]);
        }
        for i in 0..b {
            matrix[a + i][a..].copy_from_slice(&other.matrix[i]);
        }
        WeylElement {
            matrix,
            sign: self.sign * other.sign,
        }
    }
}

/// Element of the maximal torus, angles reduced to `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusElement {
    angles: Vec<f64>,
}

impl TorusElement {
    pub fn new(angles: &[f64]) -> Self {
        Self {
            angles: angles.iter().map(|&a| reduce_angle(a)).collect(),
        }
    }

    pub fn identity(rank: usize) -> Self {
        Self { angles: vec![0.0; rank] }
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn rank(&self) -> usize {
        self.angles.len()
    }

    pub fn inverse(&self) -> Self {
        Self::new(&self.angles.iter().map(|a| -a).collect::<Vec<_>>())
    }
}

/// Restricted root `α ∈ 𝔞*`, given by its values on `a_basis`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedRoot {
    pub coefficients: Vec<f64>,
    pub multiplicity: u32,
}

impl RestrictedRoot {
    pub fn eval(&self, a: &[f64]) -> f64 {
        self.coefficients.iter().zip(a).map(|(c, x)| c * x).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootDatum {
    pub rank: usize,
    pub delta_g_t_pos: Vec<HalfWeight>,
    pub delta_p_t_pos: Vec<HalfWeight>,
    pub delta_k_t_pos: Vec<HalfWeight>,
    /// Positive restricted roots `Δ⁺(𝔭, 𝔞)` with multiplicities.
    pub restricted_roots: Vec<RestrictedRoot>,
    pub weyl_group_k: Vec<WeylElement>,
    pub rho_k: HalfWeight,
}

impl RootDatum {
    /// `SL(2, ℝ)`: `K = SO(2)` is abelian, `𝔭 ⊗ ℂ` has weights `±2`, the single
    /// restricted root is `α(s X₁) = 2s`.
    pub fn sl2r() -> Self {
        let two = HalfWeight::integral(&[2]);
        Self {
            rank: 1,
            delta_g_t_pos: vec![two.clone()],
            delta_p_t_pos: vec![two],
            delta_k_t_pos: vec![],
            restricted_roots: vec![RestrictedRoot {
                coefficients: vec![2.0],
                multiplicity: 1,
            }],
            weyl_group_k: vec![WeylElement::identity(1)],
            rho_k: HalfWeight::zero(1),
        }
    }

    /// Direct sum of two data.
    pub fn product(a: &RootDatum, b: &RootDatum) -> Self {
        let lift_a = |w: &HalfWeight| {
            let mut c = w.0.clone();
            c.extend(std::iter::repeat(0).take(b.rank));
            HalfWeight(c)
        };
        let lift_b = |w: &HalfWeight| {
            let mut c = vec![0; a.rank];
            c.extend_from_slice(&w.0);
            HalfWeight(c)
        };
        let join = |xs: &[HalfWeight], ys: &[HalfWeight]| -> Vec<HalfWeight> {
            xs.iter().map(lift_a).chain(ys.iter().map(lift_b)).collect()
        };
        let da = a.restricted_roots.first().map_or(0, |r| r.coefficients.len());
        let db = b.restricted_roots.first().map_or(0, |r| r.coefficients.len());
        let restricted_roots = a
            .restricted_roots
            .iter()
            .map(|r| {
                let mut c = r.coefficients.clone();
                c.extend(std::iter::repeat(0.0).take(db));
                RestrictedRoot { coefficients: c, multiplicity: r.multiplicity }
            })
            .chain(b.restricted_roots.iter().map(|r| {
                let mut c = vec![0.0; da];
                c.extend_from_slice(&r.coefficients);
                RestrictedRoot { coefficients: c, multiplicity: r.multiplicity }
            }))
            .collect();
        let weyl_group_k = a
            .weyl_group_k
            .iter()
            .flat_map(|wa| b.weyl_group_k.iter().map(move |wb| wa.block_sum(wb)))
            .collect();
        Self {
            rank: a.rank + b.rank,
            delta_g_t_pos: join(&a.delta_g_t_pos, &b.delta_g_t_pos),
            delta_p_t_pos: join(&a.delta_p_t_pos, &b.delta_p_t_pos),
            delta_k_t_pos: join(&a.delta_k_t_pos, &b.delta_k_t_pos),
            restricted_roots,
            weyl_group_k,
            rho_k: &lift_a(&a.rho_k) + &lift_b(&b.rho_k),
        }
    }

    pub fn for_model(model: &ReductivePairModel) -> Result<Self, CharacterError> {
        match model.name.as_str() {
            "sl2r" => Ok(Self::sl2r()),
            "sl2r_x_sl2r" => Ok(Self::product(&Self::sl2r(), &Self::sl2r())),
            other => Err(LieError::UnknownModel(other.to_string()).into()),
        }
    }

    /// Structural checks: root counts, `ρ_K`, `W_K` permuting `Δ(𝔨, 𝔱)`.
    pub fn check(&self, d_p: usize) -> Result<(), CharacterError> {
        if self.delta_p_t_pos.len() * 2 != d_p {
            return Err(CharacterError::Inconsistent(format!(
                "|Δ⁺(𝔭,𝔱)| = {} but dim 𝔭 = {d_p}",
                self.delta_p_t_pos.len()
            )));
        }
        let mut sum = HalfWeight::zero(self.rank);
        for a in &self.delta_k_t_pos {
            sum = &sum + a;
        }
        // Doubled coordinates: 2·ρ_K must equal the root sum.
        if self.rho_k.0.iter().zip(&sum.0).any(|(r, s)| 2 * r != *s) {
            return Err(CharacterError::Inconsistent("ρ_K is not half the positive 𝔨-roots".into()));
        }
        let all_k: Vec<HalfWeight> = self
            .delta_k_t_pos
            .iter()
            .cloned()
            .chain(self.delta_k_t_pos.iter().map(|a| -a))
            .collect();
        for w in &self.weyl_group_k {
            for a in &all_k {
                if !all_k.contains(&w.apply(a)) {
                    return Err(CharacterError::Inconsistent(format!(
                        "W_K element does not permute Δ(𝔨,𝔱): {a} ↦ {}",
                        w.apply(a)
                    )));
                }
            }
        }
        let mut positive: Vec<HalfWeight> = self.delta_k_t_pos.clone();
        positive.extend(self.delta_p_t_pos.iter().cloned());
        let mut g = self.delta_g_t_pos.clone();
        positive.sort();
        g.sort();
        if positive != g {
            return Err(CharacterError::Inconsistent(
                "Δ⁺(𝔤,𝔱) ≠ Δ⁺(𝔨,𝔱) ∪ Δ⁺(𝔭,𝔱)".into(),
            ));
        }
        Ok(())
    }

    fn check_rank(&self, rank: usize) -> Result<(), CharacterError> {
        if rank != self.rank {
            return Err(CharacterError::Rank { expected: self.rank, got: rank });
        }
        Ok(())
    }

    pub fn is_dominant(&self, weight: &HalfWeight) -> bool {
        self.delta_k_t_pos.iter().all(|a| weight.dot_doubled(a) >= 0)
    }

    /// `Σ_{w ∈ W_K} (−1)^w e^{w(λ + ρ_K)}`.
    pub fn weyl_numerator(&self, highest_weight: &HalfWeight) -> FormalCharacter {
        let shifted = highest_weight + &self.rho_k;
        let mut out = FormalCharacter::zero();
        for w in &self.weyl_group_k {
            out.add_term(w.apply(&shifted), w.sign as i64);
        }
        out
    }

    /// `Π_{α ∈ roots} (e^{α/2} − e^{−α/2})`, in storage order.
    pub fn denominator(&self, roots: &[HalfWeight]) -> FormalCharacter {
        roots
            .iter()
            .fold(FormalCharacter::one(self.rank), |acc, a| {
                &acc * &FormalCharacter::binomial(&a.halved())
            })
    }

    /// Exact formal character of the irreducible `K`-module with the given
    /// highest weight.
    pub fn irreducible_character(&self, highest_weight: &HalfWeight) -> Result<FormalCharacter, CharacterError> {
        self.check_rank(highest_weight.rank())?;
        if !self.is_dominant(highest_weight) {
            return Err(CharacterError::NotDominant(highest_weight.clone()));
        }
        self.weyl_numerator(highest_weight)
            .exact_div(&self.denominator(&self.delta_k_t_pos))
    }

    /// `χ_{S⁺} − χ_{S⁻} = Π_{α ∈ Δ⁺(𝔭,𝔱)} (e^{α/2} − e^{−α/2})`.
    pub fn spinor_difference(&self) -> FormalCharacter {
        self.denominator(&self.delta_p_t_pos)
    }

    /// Weights of `S⁺` and `S⁻`: one choice of `±α/2` per positive 𝔭-root,
    /// graded by the parity of the number of minus signs.
    pub fn spinor_weights(&self) -> (Vec<HalfWeight>, Vec<HalfWeight>) {
        let roots = &self.delta_p_t_pos;
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for mask in 0u32..(1 << roots.len()) {
            let mut w = HalfWeight::zero(self.rank);
            for (i, a) in roots.iter().enumerate() {
                let h = a.halved();
                w = if mask & (1 << i) == 0 { &w + &h } else { &w - &h };
            }
            if mask.count_ones() % 2 == 0 {
                plus.push(w);
            } else {
                minus.push(w);
            }
        }
        (plus, minus)
    }
}

/// Weyl character formula for `K`, evaluated at `x`.
pub fn weyl_character(datum: &RootDatum, highest_weight: &HalfWeight, x: &TorusElement) -> Result<Complex64, CharacterError> {
    datum.check_rank(x.rank())?;
    Ok(datum.irreducible_character(highest_weight)?.evaluate(x.angles()))
}

/// `χ_{S⁺}(x) − χ_{S⁻}(x)`, product over `Δ⁺(𝔭,𝔱)` in storage order.
pub fn spinor_character_difference(datum: &RootDatum, x: &TorusElement) -> Result<Complex64, CharacterError> {
    datum.check_rank(x.rank())?;
    Ok(datum
        .delta_p_t_pos
        .iter()
        .map(|a| {
            let phase = 0.5 * a.pair(x.angles());
            Complex64::new(0.0, 2.0 * phase.sin())
        })
        .product())
}

/// Both routes to `det_𝔭(id − Ad_x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetPair {
    /// Numeric determinant of `(id − Ad_x)|_𝔭`.
    pub direct: f64,
    /// `(−1)^{dim 𝔭 / 2} (χ_{S⁺} − χ_{S⁻})(x)²`.
    pub character: f64,
}

impl DetPair {
    pub fn abs_diff(&self) -> f64 {
        (self.direct - self.character).abs()
    }
}

/// `det_𝔭(id − x)` computed from the matrix model and from the spinor
/// characters, without comparing the two.
pub fn det_p_both_ways(model: &ReductivePairModel, datum: &RootDatum, x: &TorusElement) -> Result<DetPair, CharacterError> {
    datum.check_rank(x.rank())?;
    let k = model.torus_element(x.angles());
    let ad = model.ad_matrix(&k)?;
    let d = model.d_p();
    let direct = (Mat::identity(d, d) - ad).determinant();
    let s = spinor_character_difference(datum, x)?;
    let sign = if (d / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let sq = s * s;
    if sq.im.abs() > DET_AGREEMENT_TOL {
        return Err(CharacterError::Inconsistent(format!(
            "squared spinor difference is not real ({sq})"
        )));
    }
    Ok(DetPair {
        direct,
        character: sign * sq.re,
    })
}

/// Like [`det_p_both_ways`]; disagreement beyond [`DET_AGREEMENT_TOL`] is an
/// error.
pub fn det_p_id_minus(model: &ReductivePairModel, datum: &RootDatum, x: &TorusElement) -> Result<DetPair, CharacterError> {
    let pair = det_p_both_ways(model, datum, x)?;
    if pair.abs_diff() >= DET_AGREEMENT_TOL {
        return Err(CharacterError::Inconsistent(format!(
            "det_𝔭(id − x): direct {} vs character {}",
            pair.direct, pair.character
        )));
    }
    Ok(pair)
}

pub fn is_regular(model: &ReductivePairModel, datum: &RootDatum, x: &TorusElement, eps: f64) -> Result<bool, CharacterError> {
    Ok(det_p_id_minus(model, datum, x)?.direct.abs() > eps)
}

/// Regularity from the root datum alone: no root of `𝔤` is trivial at `x`.
pub fn is_regular_by_roots(datum: &RootDatum, x: &TorusElement, eps: f64) -> bool {
    let den = datum.denominator(&datum.delta_g_t_pos).evaluate(x.angles());
    den.norm_sqr() > eps
}

/// `(−1)^{dim 𝔭/2} Σ_w (−1)^w e^{w(μ+ρ_K)}(x) / Π_{Δ⁺(𝔤,𝔱)} (e^{α/2} − e^{−α/2})(x)`.
pub fn discrete_series_character_value(datum: &RootDatum, mu: &HalfWeight, x: &TorusElement) -> Result<Complex64, CharacterError> {
    datum.check_rank(x.rank())?;
    datum.check_rank(mu.rank())?;
    if !datum.is_dominant(mu) {
        return Err(CharacterError::NotDominant(mu.clone()));
    }
    if !is_regular_by_roots(datum, x, REGULARITY_EPS) {
        return Err(CharacterError::Singular(x.angles().to_vec()));
    }
    let numerator = datum.weyl_numerator(mu).evaluate(x.angles());
    let denominator = datum.denominator(&datum.delta_g_t_pos).evaluate(x.angles());
    let n = datum.delta_p_t_pos.len();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * numerator / denominator)
}

/// Angle `θ` as a rank-1 torus element.
pub fn circle(theta: f64) -> TorusElement {
    TorusElement::new(&[theta])
}

/// Convenience: `π` multiples for tests and configs.
pub fn angle_fraction(num: f64, den: f64) -> f64 {
    PI * num / den
}
