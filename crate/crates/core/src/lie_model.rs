//! Matrix realizations of reductive pairs `(G, K)` with their Cartan
//! decomposition `𝔤 = 𝔨 ⊕ 𝔭`.
//!
//! The group is realized by real `n × n` matrices, `𝔨` by skew-symmetric and
//! `𝔭` by symmetric traceless matrices, so the Cartan involution is
//! `X ↦ -Xᵀ`. Elements of `𝔭` are carried around as coordinate vectors in
//! `basis_p`, which is orthonormal for `B(X, Y) = tr(XᵀY) / 2`.
//!
//! Shipped models have `K = T` a torus with one circle per `SL(2, ℝ)` block;
//! the torus angle `θ` maps to the rotation `exp(θ J)` in that block and
//! `Ad` of it rotates the matching plane of `𝔭` by `2θ`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::quadrature::torus_rule;

pub type Mat = DMatrix<f64>;

/// Tolerance for the group defining relations.
pub const MEMBERSHIP_TOL: f64 = 1e-10;
/// Tolerance for bracket closure of the Cartan decomposition.
pub const BRACKET_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("unknown model {0:?} (expected \"sl2r\" or \"sl2r_x_sl2r\")")]
    UnknownModel(String),
    #[error("polar factorization needs t > 0, got {0}")]
    NonPositiveT(f64),
    #[error("matrix is not in the model group (defect {0:.3e})")]
    NotInGroup(f64),
    #[error("deformation points live over different t ({0} vs {1})")]
    MismatchedT(f64, f64),
    #[error("t = {0} is outside [0, 1]")]
    TOutOfRange(f64),
    #[error("model inconsistency: {0}")]
    Inconsistent(String),
    #[error("expected {expected} coordinates, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// A matrix in the model group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement(pub Mat);

impl GroupElement {
    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn identity(n: usize) -> Self {
        Self(Mat::identity(n, n))
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement(&self.0 * &other.0)
    }

    /// Inverse, valid for the models shipped here whose `K` is orthogonal
    /// and whose group is closed under general inversion.
    pub fn inverse(&self) -> GroupElement {
        GroupElement(
            self.0
                .clone()
                .try_inverse()
                .expect("group elements are invertible"),
        )
    }
}

/// Coordinates `(k, v, t)` on the deformation family.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationPoint {
    pub k: GroupElement,
    pub v: Vec<f64>,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct ReductivePairModel {
    pub name: String,
    pub matrix_size: usize,
    pub basis_k: Vec<Mat>,
    pub basis_p: Vec<Mat>,
    /// Basis of `𝔱 ⊆ 𝔨`; one generator per circle factor of the torus.
    pub torus_basis: Vec<Mat>,
    /// Basis of a maximal abelian `𝔞 ⊆ 𝔭`.
    pub a_basis: Vec<Mat>,
    /// Diagonal `(offset, size)` blocks, each constrained to `det = 1`.
    pub blocks: Vec<(usize, usize)>,
    /// Constant `c` such that `∫_K ∫_{𝔞⁺} F(Ad_k a) Π α(a)^{n_α} · c da dk`
    /// equals `∫_𝔭 F dv` with Lebesgue `dv` in `basis_p` coordinates.
    ///
    /// The measure on `𝔭` is Lebesgue in orthonormal coordinates throughout;
    /// this constant is where the `𝔞⁺` normalization absorbs the difference.
    pub chamber_measure: f64,
}

impl ReductivePairModel {
    pub fn d_g(&self) -> usize {
        self.basis_k.len() + self.basis_p.len()
    }

    pub fn d_k(&self) -> usize {
        self.basis_k.len()
    }

    pub fn d_p(&self) -> usize {
        self.basis_p.len()
    }

    pub fn d_a(&self) -> usize {
        self.a_basis.len()
    }

    pub fn torus_rank(&self) -> usize {
        self.torus_basis.len()
    }

    /// `B(X, Y) = tr(XᵀY) / 2`.
    pub fn bilinear_form(&self, x: &Mat, y: &Mat) -> f64 {
        0.5 * x.dot(y)
    }

    /// `Σ v_i X_i`.
    pub fn p_matrix(&self, v: &[f64]) -> Mat {
        let n = self.matrix_size;
        let mut out = Mat::zeros(n, n);
        for (c, b) in v.iter().zip(&self.basis_p) {
            out += b * *c;
        }
        out
    }

    /// Coordinates of `m` in `basis_p`, or an error if `m ∉ 𝔭`.
    pub fn p_coordinates(&self, m: &Mat) -> Result<Vec<f64>, LieError> {
        let coords: Vec<f64> = self
            .basis_p
            .iter()
            .map(|b| self.bilinear_form(b, m))
            .collect();
        let residual = (m - self.p_matrix(&coords)).norm();
        let scale = 1.0 + m.norm();
        if residual > MEMBERSHIP_TOL * scale {
            return Err(LieError::Inconsistent(format!(
                "matrix leaves span(basis_p) by {residual:.3e}"
            )));
        }
        Ok(coords)
    }

    fn check_dim(&self, v: &[f64]) -> Result<(), LieError> {
        if v.len() != self.d_p() {
            return Err(LieError::Dimension {
                expected: self.d_p(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Largest violation of the defining relations (off-block zeros, block
    /// determinants equal to one).
    pub fn membership_defect(&self, m: &Mat) -> f64 {
        let mut defect: f64 = 0.0;
        for i in 0..self.matrix_size {
            for j in 0..self.matrix_size {
                let same = self
                    .blocks
                    .iter()
                    .any(|&(o, s)| (o..o + s).contains(&i) && (o..o + s).contains(&j));
                if !same {
                    defect = defect.max(m[(i, j)].abs());
                }
            }
        }
        for &(o, s) in &self.blocks {
            let det = m.view((o, o), (s, s)).determinant();
            defect = defect.max((det - 1.0).abs());
        }
        if !m.iter().all(|x| x.is_finite()) {
            return f64::INFINITY;
        }
        defect
    }

    pub fn group_element(&self, m: Mat) -> Result<GroupElement, LieError> {
        let defect = self.membership_defect(&m);
        if defect > MEMBERSHIP_TOL {
            return Err(LieError::NotInGroup(defect));
        }
        Ok(GroupElement(m))
    }

    /// `exp_G(t·v)` by scaling and squaring.
    pub fn exp_p(&self, v: &[f64], t: f64) -> Result<GroupElement, LieError> {
        self.check_dim(v)?;
        let x = self.p_matrix(v) * t;
        Ok(GroupElement(x.exp()))
    }

    /// The element `exp(Σ θ_j T_j)` of the torus.
    pub fn torus_element(&self, angles: &[f64]) -> GroupElement {
        let n = self.matrix_size;
        let mut out = Mat::identity(n, n);
        for (j, &theta) in angles.iter().enumerate() {
            let (o, _) = self.blocks[j];
            let (s, c) = theta.sin_cos();
            out[(o, o)] = c;
            out[(o, o + 1)] = -s;
            out[(o + 1, o)] = s;
            out[(o + 1, o + 1)] = c;
        }
        out.into()
    }

    /// Torus angles of an element of `K` (here `K = T`), each in `[0, 2π)`.
    pub fn torus_angles(&self, k: &GroupElement) -> Vec<f64> {
        self.blocks
            .iter()
            .take(self.torus_rank())
            .map(|&(o, _)| {
                let m = k.matrix();
                reduce_angle(m[(o + 1, o)].atan2(m[(o, o)]))
            })
            .collect()
    }

    /// `φ_t(k, v) = k·exp(t v)`.
    pub fn assemble(&self, k: &GroupElement, v: &[f64], t: f64) -> Result<GroupElement, LieError> {
        Ok(k.mul(&self.exp_p(v, t)?))
    }

    /// Inverse of `φ_t`: writes `g = k·exp(t v)` with `k ∈ K`, `v ∈ 𝔭`.
    ///
    /// From the SVD `g = U Σ Vᵀ`: `k = U Vᵀ` and `t v = V log Σ Vᵀ`. Small
    /// singular values keep their relative accuracy this way, which the
    /// eigendecomposition of `gᵀg` loses once `|t v|` is large.
    pub fn polar_factor(&self, g: &GroupElement, t: f64) -> Result<(GroupElement, Vec<f64>), LieError> {
        if t <= 0.0 || !t.is_finite() {
            return Err(LieError::NonPositiveT(t));
        }
        let m = g.matrix();
        let defect = self.membership_defect(m);
        if defect > MEMBERSHIP_TOL * (1.0 + m.norm_squared()) {
            return Err(LieError::NotInGroup(defect));
        }
        let svd = m.clone().svd(true, true);
        let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
            return Err(LieError::Inconsistent("singular value decomposition failed".into()));
        };
        if svd.singular_values.iter().any(|&s| !(s > 0.0)) {
            return Err(LieError::Inconsistent(
                "positive factor is not positive definite".into(),
            ));
        }
        let log_diag = Mat::from_diagonal(&svd.singular_values.map(|s| s.ln() / t));
        let vt = v_t.transpose() * log_diag * &v_t;
        let v = self.p_coordinates(&vt)?;
        Ok((GroupElement(u * v_t), v))
    }

    /// `Ad_k(v)` for `k ∈ K`, re-expressed in `basis_p`.
    pub fn ad_action(&self, k: &GroupElement, v: &[f64]) -> Result<Vec<f64>, LieError> {
        self.check_dim(v)?;
        let km = k.matrix();
        let w = km * self.p_matrix(v) * km.transpose();
        self.p_coordinates(&w)
    }

    /// Matrix of `Ad_k` on `𝔭` in `basis_p` coordinates.
    pub fn ad_matrix(&self, k: &GroupElement) -> Result<Mat, LieError> {
        let d = self.d_p();
        let mut out = Mat::zeros(d, d);
        let mut e = vec![0.0; d];
        for j in 0..d {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            let col = self.ad_action(k, &e)?;
            for i in 0..d {
                out[(i, j)] = col[i];
            }
        }
        Ok(out)
    }

    /// Group law of the deformation family.
    ///
    /// At `t = 0` this is the Cartan motion group law
    /// `(k₁, v₁)(k₂, v₂) = (k₁k₂, Ad_{k₂⁻¹} v₁ + v₂)`; for `t > 0` it is the
    /// matrix product pulled back through `φ_t`.
    pub fn product_t(&self, p1: &DeformationPoint, p2: &DeformationPoint) -> Result<DeformationPoint, LieError> {
        if p1.t != p2.t {
            return Err(LieError::MismatchedT(p1.t, p2.t));
        }
        let t = p1.t;
        if !(0.0..=1.0).contains(&t) {
            return Err(LieError::TOutOfRange(t));
        }
        if t == 0.0 {
            let k = p1.k.mul(&p2.k);
            let k2_inv = GroupElement(p2.k.matrix().transpose());
            let moved = self.ad_action(&k2_inv, &p1.v)?;
            let v = moved.iter().zip(&p2.v).map(|(a, b)| a + b).collect();
            return Ok(DeformationPoint { k, v, t });
        }
        let g = self
            .assemble(&p1.k, &p1.v, t)?
            .mul(&self.assemble(&p2.k, &p2.v, t)?);
        let (k, v) = self.polar_factor(&g, t)?;
        Ok(DeformationPoint { k, v, t })
    }

    /// Checks bracket closure, evenness of `𝔭`, triviality of `𝔭^K`, and
    /// `Ad`-invariance of the form.
    pub fn check_invariants(&self) -> Result<(), LieError> {
        if self.d_p() % 2 != 0 {
            return Err(LieError::Inconsistent(format!("dim 𝔭 = {} is odd", self.d_p())));
        }
        let in_span = |m: &Mat, basis: &[Mat]| -> f64 {
            let mut rest = m.clone();
            for b in basis {
                rest -= b * self.bilinear_form(b, m);
            }
            rest.norm()
        };
        let pairs: [(&[Mat], &[Mat], &[Mat], &str); 3] = [
            (&self.basis_k, &self.basis_k, &self.basis_k, "[k,k] ⊄ k"),
            (&self.basis_k, &self.basis_p, &self.basis_p, "[k,p] ⊄ p"),
            (&self.basis_p, &self.basis_p, &self.basis_k, "[p,p] ⊄ k"),
        ];
        for (left, right, target, what) in pairs {
            for x in left {
                for y in right {
                    let br = x * y - y * x;
                    let r = in_span(&br, target);
                    if r > BRACKET_TOL {
                        return Err(LieError::Inconsistent(format!("{what} (residual {r:.3e})")));
                    }
                }
            }
        }
        // 𝔭^K = 0: the K-average of Ad vanishes.
        let rank = self.torus_rank();
        let rule = torus_rule(16).expect("16 ≥ 4").unit_volume();
        let count = rule.len().pow(rank as u32);
        let d = self.d_p();
        let mut avg = Mat::zeros(d, d);
        let mut angles = vec![0.0; rank];
        for idx in 0..count {
            let mut rest = idx;
            let mut w = 1.0;
            for a in angles.iter_mut() {
                let i = rest % rule.len();
                rest /= rule.len();
                *a = rule.nodes[i];
                w *= rule.weights[i];
            }
            let k = self.torus_element(&angles);
            let ad = self.ad_matrix(&k)?;
            let orth = (&ad.transpose() * &ad - Mat::identity(d, d)).norm();
            if orth > 1e-12 {
                return Err(LieError::Inconsistent(format!(
                    "Ad_k does not preserve the form (defect {orth:.3e})"
                )));
            }
            avg += ad * w;
        }
        let norm = avg.clone().svd(false, false).singular_values.max();
        if norm >= 1e-8 {
            return Err(LieError::Inconsistent(format!(
                "𝔭 has K-fixed vectors (averaged Ad norm {norm:.3e})"
            )));
        }
        Ok(())
    }

    /// Block-diagonal product of two models.
    pub fn product(a: &ReductivePairModel, b: &ReductivePairModel) -> ReductivePairModel {
        let n = a.matrix_size + b.matrix_size;
        let embed_a = |m: &Mat| {
            let mut out = Mat::zeros(n, n);
            out.view_mut((0, 0), (a.matrix_size, a.matrix_size)).copy_from(m);
            out
        };
        let embed_b = |m: &Mat| {
            let mut out = Mat::zeros(n, n);
            out.view_mut((a.matrix_size, a.matrix_size), (b.matrix_size, b.matrix_size))
                .copy_from(m);
            out
        };
        let join = |xs: &[Mat], ys: &[Mat]| -> Vec<Mat> {
            xs.iter().map(embed_a).chain(ys.iter().map(embed_b)).collect()
        };
        ReductivePairModel {
            name: format!("{}_x_{}", a.name, b.name),
            matrix_size: n,
            basis_k: join(&a.basis_k, &b.basis_k),
            basis_p: join(&a.basis_p, &b.basis_p),
            torus_basis: join(&a.torus_basis, &b.torus_basis),
            a_basis: join(&a.a_basis, &b.a_basis),
            blocks: a
                .blocks
                .iter()
                .copied()
                .chain(b.blocks.iter().map(|&(o, s)| (o + a.matrix_size, s)))
                .collect(),
            chamber_measure: a.chamber_measure * b.chamber_measure,
        }
    }
}

impl From<Mat> for GroupElement {
    fn from(m: Mat) -> Self {
        GroupElement(m)
    }
}

/// `SL(2, ℝ) / SO(2)`.
///
/// `𝔨 = span{J}`, `J = [[0,-1],[1,0]]`; `𝔭 = span{X₁, X₂}` with
/// `X₁ = diag(1, -1)`, `X₂ = [[0,1],[1,0]]`; `𝔞 = span{X₁}`.
pub fn sl2r() -> ReductivePairModel {
    let j = Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let x1 = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let x2 = Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    ReductivePairModel {
        name: "sl2r".into(),
        matrix_size: 2,
        basis_k: vec![j.clone()],
        basis_p: vec![x1.clone(), x2],
        torus_basis: vec![j],
        a_basis: vec![x1],
        blocks: vec![(0, 2)],
        // (s, φ) ↦ s·(cos 2φ, sin 2φ) with dk = dφ/2π covers 𝔭 twice and
        // carries the Jacobian 2s = α(s); the total is (1/π)·Lebesgue.
        chamber_measure: PI,
    }
}

pub fn sl2r_x_sl2r() -> ReductivePairModel {
    ReductivePairModel::product(&sl2r(), &sl2r())
}

/// Looks up a compiled-in model by identifier.
pub fn model_by_name(name: &str) -> Result<ReductivePairModel, LieError> {
    match name {
        "sl2r" => Ok(sl2r()),
        "sl2r_x_sl2r" => Ok(sl2r_x_sl2r()),
        other => Err(LieError::UnknownModel(other.to_string())),
    }
}

pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(2.0 * PI);
    if r >= 2.0 * PI {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Mat, b: &Mat, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn shipped_models_satisfy_invariants() {
        sl2r().check_invariants().unwrap();
        sl2r_x_sl2r().check_invariants().unwrap();
        assert_eq!(sl2r_x_sl2r().d_p(), 4);
        assert_eq!(sl2r_x_sl2r().d_g(), 6);
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let m = sl2r();
        let g = m.exp_p(&[0.0, 0.0], 1.0).unwrap();
        assert!(close(g.matrix(), &Mat::identity(2, 2), 1e-15));
        let g = m.exp_p(&[0.7, -1.3], 0.0).unwrap();
        assert!(close(g.matrix(), &Mat::identity(2, 2), 1e-15));
    }

    #[test]
    fn exp_of_diagonal_generator() {
        let m = sl2r();
        let g = m.exp_p(&[1.0, 0.0], 1.0).unwrap();
        let e = std::f64::consts::E;
        let expected = Mat::from_row_slice(2, 2, &[e, 0.0, 0.0, 1.0 / e]);
        assert!(close(g.matrix(), &expected, 1e-14));
        assert!(m.membership_defect(g.matrix()) < 1e-12);
    }

    #[test]
    fn polar_of_identity_and_positive() {
        let m = sl2r();
        let (k, v) = m.polar_factor(&GroupElement::identity(2), 1.0).unwrap();
        assert!(close(k.matrix(), &Mat::identity(2, 2), 1e-14));
        assert!(v.iter().all(|x| x.abs() < 1e-14));
        let g = m.exp_p(&[1.0, 0.0], 1.0).unwrap();
        let (k, v) = m.polar_factor(&g, 1.0).unwrap();
        assert!(close(k.matrix(), &Mat::identity(2, 2), 1e-13));
        assert!((v[0] - 1.0).abs() < 1e-13 && v[1].abs() < 1e-13);
    }

    #[test]
    fn polar_rejects_bad_input() {
        let m = sl2r();
        assert_eq!(
            m.polar_factor(&GroupElement::identity(2), 0.0),
            Err(LieError::NonPositiveT(0.0))
        );
        let bad = GroupElement(Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]));
        assert!(matches!(m.polar_factor(&bad, 1.0), Err(LieError::NotInGroup(_))));
    }

    #[test]
    fn polar_is_well_conditioned_at_small_t() {
        let m = sl2r_x_sl2r();
        let k = m.torus_element(&[0.4, 2.2]);
        let v = [0.3, -0.8, 1.1, 0.25];
        for t in [1.0 / 64.0, 1.0 / 256.0, 1.0 / 1024.0] {
            let g = m.assemble(&k, &v, t).unwrap();
            let (k2, v2) = m.polar_factor(&g, t).unwrap();
            assert!(close(k.matrix(), k2.matrix(), 1e-12));
            for (a, b) in v.iter().zip(&v2) {
                assert!((a - b).abs() < 1e-10, "t = {t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn ad_rotates_p_by_twice_the_angle() {
        let m = sl2r();
        let theta = 0.37;
        let k = m.torus_element(&[theta]);
        let v = [0.6, -0.2];
        let w = m.ad_action(&k, &v).unwrap();
        let (s, c) = (2.0 * theta).sin_cos();
        assert!((w[0] - (c * v[0] - s * v[1])).abs() < 1e-14);
        assert!((w[1] - (s * v[0] + c * v[1])).abs() < 1e-14);
        let id = m.ad_action(&GroupElement::identity(2), &v).unwrap();
        assert_eq!(id, v.to_vec());
    }

    #[test]
    fn ad_rejects_non_compact_conjugation() {
        let m = sl2r();
        // A shear conjugation moves 𝔭 off the symmetric matrices.
        let g = GroupElement(Mat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]));
        assert!(matches!(m.ad_action(&g, &[1.0, 0.0]), Err(LieError::Inconsistent(_))));
    }

    #[test]
    fn motion_law_at_t_zero() {
        let m = sl2r();
        let e = GroupElement::identity(2);
        let p = DeformationPoint { k: e.clone(), v: vec![0.5, -0.25], t: 0.0 };
        let q = DeformationPoint { k: e.clone(), v: vec![-0.5, 0.25], t: 0.0 };
        let r = m.product_t(&p, &q).unwrap();
        assert!(close(r.k.matrix(), e.matrix(), 1e-15));
        assert_eq!(r.v, vec![0.0, 0.0]);

        let k1 = m.torus_element(&[0.3]);
        let k2 = m.torus_element(&[1.1]);
        let p = DeformationPoint { k: k1.clone(), v: vec![1.0, 0.0], t: 0.0 };
        let q = DeformationPoint { k: k2.clone(), v: vec![0.0, 2.0], t: 0.0 };
        let r = m.product_t(&p, &q).unwrap();
        // Ad_{k₂⁻¹} rotates by -2.2.
        let (s, c) = (-2.2_f64).sin_cos();
        assert!((r.v[0] - c).abs() < 1e-14);
        assert!((r.v[1] - (s + 2.0)).abs() < 1e-14);
        assert!(close(r.k.matrix(), k1.mul(&k2).matrix(), 1e-15));
    }

    #[test]
    fn product_t_rejects_mismatch() {
        let m = sl2r();
        let e = GroupElement::identity(2);
        let p = DeformationPoint { k: e.clone(), v: vec![0.0, 0.0], t: 0.5 };
        let q = DeformationPoint { k: e, v: vec![0.0, 0.0], t: 0.25 };
        assert_eq!(m.product_t(&p, &q), Err(LieError::MismatchedT(0.5, 0.25)));
    }

    #[test]
    fn product_t_is_continuous_at_zero() {
        let m = sl2r();
        let p = DeformationPoint { k: m.torus_element(&[0.8]), v: vec![0.6, 0.8], t: 0.0 };
        let q = DeformationPoint { k: m.torus_element(&[2.0]), v: vec![-1.0, 0.0], t: 0.0 };
        let r0 = m.product_t(&p, &q).unwrap();
        let t = 1e-3;
        let pt = DeformationPoint { t, ..p.clone() };
        let qt = DeformationPoint { t, ..q.clone() };
        let rt = m.product_t(&pt, &qt).unwrap();
        assert!(close(r0.k.matrix(), rt.k.matrix(), 1e-2));
        for (a, b) in r0.v.iter().zip(&rt.v) {
            assert!((a - b).abs() < 1e-2);
        }
    }

    #[test]
    fn torus_angles_round_trip() {
        let m = sl2r_x_sl2r();
        let k = m.torus_element(&[5.9, 0.1]);
        let a = m.torus_angles(&k);
        assert!((a[0] - 5.9).abs() < 1e-14 && (a[1] - 0.1).abs() < 1e-14);
    }

    #[test]
    fn unknown_model() {
        assert!(matches!(model_by_name("su2"), Err(LieError::UnknownModel(_))));
    }

    #[test]
    fn chamber_measure_reproduces_lebesgue() {
        // ∫_𝔭 e^{-|v|²} dv = π against the KAK side.
        let m = sl2r();
        let k_rule = torus_rule(32).unwrap().unit_volume();
        let s_rule = crate::quadrature::radial_rule(
            crate::quadrature::RuleKind::GaussLegendreHalfLine,
            8.0,
            64,
        )
        .unwrap();
        let mut total = 0.0;
        for (&phi, &wk) in k_rule.nodes.iter().zip(&k_rule.weights) {
            let k = m.torus_element(&[phi]);
            total += wk
                * s_rule.integrate(|s| {
                    let v = m.ad_action(&k, &[s, 0.0]).unwrap();
                    (-(v[0] * v[0] + v[1] * v[1])).exp() * 2.0 * s
                });
        }
        assert!((total * m.chamber_measure - PI).abs() < 1e-12);
    }
}
