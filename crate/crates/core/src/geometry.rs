//! Gauge group action, its Lie algebra, the connection one-form and the
//! split of the tangent space into gauge and identifiable directions.

use crate::error::{Error, Result};
use crate::lan::offdiag_generator;
use crate::lindblad::{DynamicalParams, ErgodicPoint};
use crate::opspace::{
    self, c, commutator, hermitian_defect, identity, im_part, matrix_unit, CMatrix, C64, I, ONE,
};

/// A tangent vector `Ḋ = (Ḣ, L̇¹, …, L̇ᵏ)`; `Ḣ` is Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    dh: CMatrix,
    dl: Vec<CMatrix>,
}

impl TangentVector {
    pub fn new(dh: CMatrix, dl: Vec<CMatrix>) -> Result<Self> {
        let d = dh.nrows();
        if dh.ncols() != d {
            return Err(Error::DimensionMismatch {
                context: "tangent Ḣ must be square",
                expected: d,
                found: dh.ncols(),
            });
        }
        for m in &dl {
            if m.shape() != (d, d) {
                return Err(Error::DimensionMismatch {
                    context: "tangent L̇",
                    expected: d,
                    found: m.nrows(),
                });
            }
        }
        if !opspace::is_finite(&dh) || !dl.iter().all(opspace::is_finite) {
            return Err(Error::NonFinite { what: "tangent" });
        }
        let defect = hermitian_defect(&dh);
        if defect > 1e-12 * (1.0 + dh.norm()) {
            return Err(Error::NotHermitian {
                what: "tangent Ḣ",
                norm: defect,
            });
        }
        Ok(Self { dh, dl })
    }

    /// Symmetrizes `Ḣ` instead of checking it.
    pub(crate) fn from_parts(dh: CMatrix, dl: Vec<CMatrix>) -> Self {
        Self {
            dh: opspace::re_part(&dh),
            dl,
        }
    }

    pub fn zero(d: usize, k: usize) -> Self {
        Self {
            dh: CMatrix::zeros(d, d),
            dl: vec![CMatrix::zeros(d, d); k],
        }
    }

    pub fn dh(&self) -> &CMatrix {
        &self.dh
    }

    pub fn dl(&self) -> &[CMatrix] {
        &self.dl
    }

    pub fn dim(&self) -> usize {
        self.dh.nrows()
    }

    pub fn channels(&self) -> usize {
        self.dl.len()
    }

    pub fn add(&self, other: &TangentVector) -> TangentVector {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &TangentVector) -> TangentVector {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &TangentVector, s: f64) -> TangentVector {
        assert_eq!(self.dim(), other.dim(), "tangent dimension mismatch");
        assert_eq!(self.channels(), other.channels(), "tangent channel mismatch");
        TangentVector {
            dh: &self.dh + other.dh.scale(s),
            dl: self
                .dl
                .iter()
                .zip(&other.dl)
                .map(|(a, b)| a + b.scale(s))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> TangentVector {
        TangentVector {
            dh: self.dh.scale(s),
            dl: self.dl.iter().map(|m| m.scale(s)).collect(),
        }
    }

    /// Euclidean norm of all real coordinates.
    pub fn norm(&self) -> f64 {
        (self.dh.norm_squared() + self.dl.iter().map(|m| m.norm_squared()).sum::<f64>()).sqrt()
    }

    /// Real coordinates `(Re, Im)` of every entry, `Ḣ` first.
    pub fn to_real(&self) -> Vec<f64> {
        std::iter::once(&self.dh)
            .chain(self.dl.iter())
            .flat_map(|m| m.iter().flat_map(|z| [z.re, z.im]))
            .collect()
    }

    pub(crate) fn check_against(&self, d: &DynamicalParams) -> Result<()> {
        if self.dim() != d.dim() {
            return Err(Error::DimensionMismatch {
                context: "tangent dimension",
                expected: d.dim(),
                found: self.dim(),
            });
        }
        if self.channels() != d.channels() {
            return Err(Error::DimensionMismatch {
                context: "tangent channels",
                expected: d.channels(),
                found: self.channels(),
            });
        }
        Ok(())
    }
}

/// An element `g = (W, a)` of `PU(d) × ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeElement {
    w: CMatrix,
    a: f64,
}

impl GaugeElement {
    pub fn new(w: CMatrix, a: f64) -> Result<Self> {
        let d = w.nrows();
        if w.ncols() != d {
            return Err(Error::DimensionMismatch {
                context: "gauge unitary must be square",
                expected: d,
                found: w.ncols(),
            });
        }
        let defect = (w.adjoint() * &w - identity(d)).norm();
        if !(defect < 1e-10) {
            return Err(Error::NotUnitary { norm: defect });
        }
        if !a.is_finite() {
            return Err(Error::NonFinite { what: "gauge shift" });
        }
        Ok(Self { w, a })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            w: identity(d),
            a: 0.0,
        }
    }

    pub fn w(&self) -> &CMatrix {
        &self.w
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// `self ∘ other`, acting as `other` first: `(W₁,a₁)∘(W₂,a₂) = (W₂W₁, a₁+a₂)`.
    pub fn compose(&self, other: &GaugeElement) -> GaugeElement {
        GaugeElement {
            w: &other.w * &self.w,
            a: self.a + other.a,
        }
    }

    pub fn inverse(&self) -> GaugeElement {
        GaugeElement {
            w: self.w.adjoint(),
            a: -self.a,
        }
    }

    /// Tangent map `g_*(Ḋ) = (W*ḢW, W*L̇ⁱW)`.
    pub fn push_tangent(&self, t: &TangentVector) -> TangentVector {
        let conj = |m: &CMatrix| self.w.adjoint() * m * &self.w;
        TangentVector::from_parts(conj(&t.dh), t.dl.iter().map(conj).collect())
    }
}

/// `gD = (W*HW + a·id, W*LⁱW)`.
pub fn gauge_apply(g: &GaugeElement, d: &DynamicalParams) -> Result<DynamicalParams> {
    if g.w.nrows() != d.dim() {
        return Err(Error::DimensionMismatch {
            context: "gauge element",
            expected: d.dim(),
            found: g.w.nrows(),
        });
    }
    let conj = |m: &CMatrix| g.w.adjoint() * m * &g.w;
    let h = conj(d.h()) + identity(d.dim()).scale(g.a);
    Ok(DynamicalParams::from_parts(h, d.l().iter().map(conj).collect()))
}

/// Lie algebra element `(−iK, r)`, stored through `K` with `tr[ρ_ss K] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraElement {
    k: CMatrix,
    r: f64,
}

impl LieAlgebraElement {
    /// Centers `K` against the stationary state of `point`.
    pub fn new(point: &ErgodicPoint, k: CMatrix, r: f64) -> Result<Self> {
        Self::with_state(point.rho(), k, r)
    }

    /// Centers `K` against an explicitly supplied state.
    pub fn with_state(rho: &CMatrix, k: CMatrix, r: f64) -> Result<Self> {
        if k.shape() != rho.shape() {
            return Err(Error::DimensionMismatch {
                context: "Lie algebra K",
                expected: rho.nrows(),
                found: k.nrows(),
            });
        }
        let defect = hermitian_defect(&k);
        if defect > 1e-10 * (1.0 + k.norm()) {
            return Err(Error::NotHermitian {
                what: "Lie algebra K",
                norm: defect,
            });
        }
        let k = opspace::re_part(&k);
        let mean = opspace::trace(&(rho * &k)).re;
        let k = k - identity(rho.nrows()).scale(mean);
        Ok(Self { k, r })
    }

    pub fn k(&self) -> &CMatrix {
        &self.k
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Adjoint action of `g⁻¹`: `(W*KW, r)`.
    pub fn conjugate(&self, g: &GaugeElement) -> LieAlgebraElement {
        LieAlgebraElement {
            k: g.w.adjoint() * &self.k * &g.w,
            r: self.r,
        }
    }
}

/// `𝖣_*(−iK, r) = (i[H,K] + r·id, i[L¹,K], …, i[Lᵏ,K])`.
pub fn lie_pushforward(d: &DynamicalParams, x: &LieAlgebraElement) -> Result<TangentVector> {
    if x.k.nrows() != d.dim() {
        return Err(Error::DimensionMismatch {
            context: "Lie algebra element",
            expected: d.dim(),
            found: x.k.nrows(),
        });
    }
    let dh = commutator(d.h(), &x.k) * I + identity(d.dim()).scale(x.r);
    let dl = d.l().iter().map(|li| commutator(li, &x.k) * I).collect();
    Ok(TangentVector::from_parts(dh, dl))
}

/// `E_D(Ḋ) = Ḣ + Im Σ L̇ⁱ* Lⁱ`.
pub fn e_map(d: &DynamicalParams, t: &TangentVector) -> Result<CMatrix> {
    t.check_against(d)?;
    let mut acc = t.dh.clone();
    for (dl, l) in t.dl.iter().zip(d.l()) {
        acc += im_part(&(dl.adjoint() * l));
    }
    Ok(acc)
}

/// `E⁰_D(Ḋ) = E_D(Ḋ) − tr[ρ_ss E_D(Ḋ)]·id`.
pub fn e0_map(point: &ErgodicPoint, t: &TangentVector) -> Result<CMatrix> {
    Ok(point.center(&e_map(point.params(), t)?))
}

/// `ω_D(Ḋ) = (𝕎⁻¹ E⁰_D(Ḋ), tr[ρ_ss E_D(Ḋ)])`.
pub fn connection_form(point: &ErgodicPoint, t: &TangentVector) -> Result<LieAlgebraElement> {
    let e = e_map(point.params(), t)?;
    let r = point.mean(&e).re;
    let k = point.inverse_centered(&e);
    LieAlgebraElement::new(point, opspace::re_part(&k), r)
}

/// `P_D = Id − 𝖣_* ∘ ω_D`.
pub fn horizontal_projection(point: &ErgodicPoint, t: &TangentVector) -> Result<TangentVector> {
    let omega = connection_form(point, t)?;
    Ok(t.sub(&lie_pushforward(point.params(), &omega)?))
}

/// Orthonormal Hermitian traceless basis of `su(d)`: symmetric and
/// antisymmetric off-diagonal pairs, then diagonal generators.
pub fn gell_mann_basis(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in j + 1..d {
            out.push(matrix_unit(d, j, k) + matrix_unit(d, k, j));
            out.push((matrix_unit(d, j, k) - matrix_unit(d, k, j)) * (-I));
        }
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = ONE;
        }
        m[(l, l)] = c(-(l as f64), 0.0);
        out.push(m.scale(norm));
    }
    out
}

/// `𝖣_*` images of the Gell-Mann generators followed by the phase direction
/// `(id, 0, …, 0)`; `d²` vectors spanning the gauge directions.
pub fn vertical_basis(point: &ErgodicPoint) -> Vec<TangentVector> {
    let d = point.dim();
    let mut out: Vec<TangentVector> = gell_mann_basis(d)
        .into_iter()
        .map(|g| {
            let x = LieAlgebraElement::new(point, g, 0.0).expect("Gell-Mann matrices are Hermitian");
            lie_pushforward(point.params(), &x).expect("dimensions match")
        })
        .collect();
    let phase = LieAlgebraElement::new(point, CMatrix::zeros(d, d), 1.0).expect("zero K");
    out.push(lie_pushforward(point.params(), &phase).expect("dimensions match"));
    out
}

/// Result of the constructive gauge equivalence search.
#[derive(Debug, Clone)]
pub struct EquivalenceWitness {
    pub found: bool,
    /// Unitary with `L'ⁱ = W*LⁱW` and `H' = W*HW − r·id` when found.
    pub w: Option<CMatrix>,
    pub r: Option<f64>,
    /// Largest real part in the spectrum of the cross generator; zero up to
    /// round-off exactly when the two parameters are equivalent.
    pub eigen_real_part: f64,
    /// Threshold used for "purely imaginary".
    pub tolerance: f64,
}

/// Fixes the projective phase of a unitary: the largest-modulus diagonal
/// entry (or overall entry, if the diagonal vanishes) becomes real positive.
pub fn normalize_phase(w: &CMatrix) -> CMatrix {
    let pick = |it: &mut dyn Iterator<Item = C64>| {
        it.fold(opspace::ZERO, |best, z| if z.norm() > best.norm() { z } else { best })
    };
    let diag = pick(&mut w.diagonal().iter().copied());
    let all = pick(&mut w.iter().copied());
    let anchor = if diag.norm() > 1e-8 * all.norm() { diag } else { all };
    if anchor.norm() == 0.0 {
        return w.clone();
    }
    w * (anchor.conj() / anchor.norm())
}

/// `min_φ ‖A − e^{iφ}B‖_F`, attained at `φ = arg tr[B*A]`.
pub fn projective_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap = opspace::trace(&(b.adjoint() * a));
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    (a - b * phase).norm()
}

/// Searches the spectrum of the cross generator `𝕎₁₂` for a purely
/// imaginary eigenvalue and extracts the intertwining unitary from its
/// eigenmatrix.
pub fn find_gauge_equivalence(p1: &ErgodicPoint, p2: &ErgodicPoint) -> Result<EquivalenceWitness> {
    let cross = offdiag_generator(p1.params(), p2.params())?;
    let tolerance = 1e-8 * (1.0 + cross.norm());
    let pairs = opspace::eig(&cross)?;
    let best = pairs
        .iter()
        .max_by(|a, b| a.value.re.total_cmp(&b.value.re))
        .ok_or(Error::ConvergenceFailure)?;
    let eigen_real_part = best.value.re;
    let not_found = EquivalenceWitness {
        found: false,
        w: None,
        r: None,
        eigen_real_part,
        tolerance,
    };
    if eigen_real_part.abs() >= tolerance {
        return Ok(not_found);
    }
    let f = &best.vector;
    let ff = f.adjoint() * f;
    let scale = opspace::trace(&ff).re / p1.dim() as f64;
    if !(scale > 0.0) || (&ff - identity(p1.dim()).scale(scale)).norm() > 1e-6 * scale {
        return Ok(not_found);
    }
    let u = normalize_phase(&(f / c(scale.sqrt(), 0.0)));
    Ok(EquivalenceWitness {
        found: true,
        w: Some(u),
        r: Some(best.value.im),
        eigen_real_part,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{self, TwoLevelParams};
    use crate::opspace::{sigma_x, sigma_y, sigma_z};
    use crate::random;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn two_level() -> (TwoLevelParams, ErgodicPoint) {
        let p = TwoLevelParams::new(1.0, 0.0, 1.0, 0.0);
        let pt = ErgodicPoint::new(models::two_level(&p).unwrap()).unwrap();
        (p, pt)
    }

    #[test]
    fn identity_gauge_is_trivial() {
        let mut rng = StdRng::seed_from_u64(1);
        let d = random::dynamical_params(&mut rng, 3, 2);
        let g = GaugeElement::identity(3);
        assert_eq!(gauge_apply(&g, &d).unwrap(), d);
        let g = GaugeElement::new(identity(3), 0.7).unwrap();
        let gd = gauge_apply(&g, &d).unwrap();
        assert!((gd.h() - d.h() - identity(3).scale(0.7)).norm() < 1e-14);
        assert_eq!(gd.l(), d.l());
    }

    #[test]
    fn non_unitary_rejected() {
        assert!(matches!(
            GaugeElement::new(sigma_x().scale(2.0), 0.0),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn stationary_state_covariance() {
        let (_, pt) = two_level();
        let mut rng = StdRng::seed_from_u64(2);
        let g = GaugeElement::new(random::unitary(&mut rng, 2), 0.3).unwrap();
        let gp = ErgodicPoint::new(gauge_apply(&g, pt.params()).unwrap()).unwrap();
        let expected = g.w().adjoint() * pt.rho() * g.w();
        assert!((gp.rho() - expected).norm() < 1e-9);
    }

    #[test]
    fn pushforward_trivial_cases() {
        let (_, pt) = two_level();
        let x = LieAlgebraElement::new(&pt, CMatrix::zeros(2, 2), 0.4).unwrap();
        let t = lie_pushforward(pt.params(), &x).unwrap();
        assert!((t.dh() - identity(2).scale(0.4)).norm() < 1e-15);
        assert!(t.dl()[0].norm() < 1e-15);
        let x = LieAlgebraElement::new(&pt, identity(2).scale(3.0), 0.0).unwrap();
        assert!(lie_pushforward(pt.params(), &x).unwrap().norm() < 1e-14);
    }

    #[test]
    fn e_map_of_conditional_expectation() {
        let mut rng = StdRng::seed_from_u64(3);
        let pt = random::ergodic_point(&mut rng, 3, 2);
        let x = LieAlgebraElement::new(&pt, random::hermitian(&mut rng, 3), 0.8).unwrap();
        let e = e_map(pt.params(), &lie_pushforward(pt.params(), &x).unwrap()).unwrap();
        let expected = identity(3).scale(0.8) + pt.generator().apply(x.k());
        assert!((e - expected).norm() < 1e-10);
    }

    #[test]
    fn e_map_one_parameter_examples() {
        let mut rng = StdRng::seed_from_u64(4);
        let pt = random::ergodic_point(&mut rng, 2, 1);
        let l = pt.params().l()[0].clone();
        let dh = random::hermitian(&mut rng, 2);
        let t = TangentVector::new(dh.clone(), vec![CMatrix::zeros(2, 2)]).unwrap();
        assert!((e_map(pt.params(), &t).unwrap() - dh).norm() < 1e-15);
        let coupling = TangentVector::new(CMatrix::zeros(2, 2), vec![l.clone()]).unwrap();
        assert!(e_map(pt.params(), &coupling).unwrap().norm() < 1e-14);
        let phase = TangentVector::new(CMatrix::zeros(2, 2), vec![&l * I]).unwrap();
        let ltl = l.adjoint() * &l;
        assert!((e_map(pt.params(), &phase).unwrap() + &ltl).norm() < 1e-14);
        let e0 = e0_map(&pt, &phase).unwrap();
        assert!((&e0 + &ltl - identity(2) * pt.mean(&ltl)).norm() < 1e-14);
        assert!(pt.mean(&e0).norm() < 1e-12);
    }

    #[test]
    fn connection_recovers_lie_element() {
        let mut rng = StdRng::seed_from_u64(5);
        let pt = random::ergodic_point(&mut rng, 3, 1);
        let x = LieAlgebraElement::new(&pt, random::hermitian(&mut rng, 3), -0.6).unwrap();
        let t = lie_pushforward(pt.params(), &x).unwrap();
        let back = connection_form(&pt, &t).unwrap();
        assert!((back.k() - x.k()).norm() < 1e-9);
        assert!((back.r() - x.r()).abs() < 1e-9);
        assert!(horizontal_projection(&pt, &t).unwrap().norm() < 1e-9);
    }

    #[test]
    fn two_level_connection_examples() {
        let (p, pt) = two_level();
        let tangents = models::two_level_tangents(&p);
        let [d_delta, _, d_alpha, _] = &tangents.physical;
        let w_alpha = connection_form(&pt, d_alpha).unwrap();
        assert!(w_alpha.k().norm() < 1e-12 && w_alpha.r().abs() < 1e-12);
        assert!(horizontal_projection(&pt, d_alpha).unwrap().sub(d_alpha).norm() < 1e-12);

        // K = −(2σ_y + σ_z)/6 centered, r = 1/6
        let w = connection_form(&pt, d_delta).unwrap();
        let k = (sigma_y().scale(-2.0) - sigma_z()).scale(1.0 / 6.0);
        let expected = LieAlgebraElement::new(&pt, k, 1.0 / 6.0).unwrap();
        assert!((w.k() - expected.k()).norm() < 1e-9);
        assert!((w.r() - expected.r()).abs() < 1e-9);
    }

    #[test]
    fn vertical_basis_two_level() {
        let (p, pt) = two_level();
        let basis = vertical_basis(&pt);
        assert_eq!(basis.len(), 4);
        // first Gell-Mann generator is σ_x
        let expected = &models::two_level_tangents(&p).vertical[0];
        assert!(basis[0].sub(expected).norm() < 1e-12);
        assert!(basis[3].sub(&TangentVector::new(identity(2), vec![CMatrix::zeros(2, 2)]).unwrap()).norm() < 1e-15);
        for b in &basis {
            assert!(horizontal_projection(&pt, b).unwrap().norm() < 1e-9);
        }
        let grams = gell_mann_basis(3);
        assert_eq!(grams.len(), 8);
        for (i, a) in grams.iter().enumerate() {
            for (j, b) in grams.iter().enumerate() {
                let ip = opspace::hs_inner(a, b).unwrap();
                let expected = if i == j { 2.0 } else { 0.0 };
                assert!((ip - c(expected, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn projection_idempotent() {
        let mut rng = StdRng::seed_from_u64(6);
        let pt = random::ergodic_point(&mut rng, 2, 2);
        let t = random::tangent(&mut rng, 2, 2);
        let p1 = horizontal_projection(&pt, &t).unwrap();
        let p2 = horizontal_projection(&pt, &p1).unwrap();
        assert!(p1.sub(&p2).norm() < 1e-10);
        assert!(e_map(pt.params(), &p1).unwrap().norm() < 1e-10);
    }

    #[test]
    fn equivalence_of_gauge_orbit() {
        let mut rng = StdRng::seed_from_u64(7);
        let pt = random::ergodic_point(&mut rng, 3, 1);
        let w = normalize_phase(&random::unitary(&mut rng, 3));
        let g = GaugeElement::new(w.clone(), 0.45).unwrap();
        let p2 = ErgodicPoint::new(gauge_apply(&g, pt.params()).unwrap()).unwrap();
        let wit = find_gauge_equivalence(&pt, &p2).unwrap();
        assert!(wit.found);
        let u = wit.w.unwrap();
        assert!(projective_distance(&u, &w) < 1e-7);
        assert!((wit.r.unwrap() + 0.45).abs() < 1e-8);
        let r = wit.r.unwrap();
        let h2 = u.adjoint() * pt.params().h() * &u - identity(3).scale(r);
        assert!((h2 - p2.params().h()).norm() < 1e-8);

        let same = find_gauge_equivalence(&pt, &pt).unwrap();
        assert!(same.found);
        assert!(projective_distance(&same.w.unwrap(), &identity(3)) < 1e-7);
        assert!(same.r.unwrap().abs() < 1e-8);
    }

    #[test]
    fn perturbed_rabi_frequency_is_inequivalent() {
        let (_, pt) = two_level();
        let q = TwoLevelParams::new(1.0, 0.0, 1.1, 0.0);
        let p2 = ErgodicPoint::new(models::two_level(&q).unwrap()).unwrap();
        let wit = find_gauge_equivalence(&pt, &p2).unwrap();
        assert!(!wit.found);
        assert!(wit.eigen_real_part < -wit.tolerance);
        let back = find_gauge_equivalence(&p2, &pt).unwrap();
        assert!(!back.found);
    }

    #[test]
    fn group_action_composes() {
        let mut rng = StdRng::seed_from_u64(8);
        let d = random::dynamical_params(&mut rng, 3, 2);
        let g1 = GaugeElement::new(random::unitary(&mut rng, 3), 0.2).unwrap();
        let g2 = GaugeElement::new(random::unitary(&mut rng, 3), -1.1).unwrap();
        let lhs = gauge_apply(&g1, &gauge_apply(&g2, &d).unwrap()).unwrap();
        let rhs = gauge_apply(&g1.compose(&g2), &d).unwrap();
        assert!((lhs.h() - rhs.h()).norm() < 1e-12);
        for (a, b) in lhs.l().iter().zip(rhs.l()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    mod props {
        use super::super::*;
        use crate::random;
        use proptest::prelude::*;
        use rand::rngs::StdRng;
        use rand::{Rng as _, SeedableRng};

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn split_is_complete(seed in any::<u64>(), dim in 2usize..=3, k in 1usize..=2) {
                let mut rng = StdRng::seed_from_u64(seed);
                let pt = random::ergodic_point(&mut rng, dim, k);
                let t = random::tangent(&mut rng, dim, k);
                let horiz = horizontal_projection(&pt, &t).unwrap();
                let vert = lie_pushforward(pt.params(), &connection_form(&pt, &t).unwrap()).unwrap();
                prop_assert!(horiz.add(&vert).sub(&t).norm() < 1e-10 * (1.0 + t.norm()));
            }

            #[test]
            fn connection_is_gauge_covariant(seed in any::<u64>()) {
                let mut rng = StdRng::seed_from_u64(seed);
                let pt = random::ergodic_point(&mut rng, 3, 2);
                let g = GaugeElement::new(random::unitary(&mut rng, 3), rng.random_range(-2.0..2.0)).unwrap();
                let gp = ErgodicPoint::new(gauge_apply(&g, pt.params()).unwrap()).unwrap();
                let t = random::tangent(&mut rng, 3, 2);
                let lhs = connection_form(&gp, &g.push_tangent(&t)).unwrap();
                let rhs = connection_form(&pt, &t).unwrap().conjugate(&g);
                prop_assert!((lhs.k() - rhs.k()).norm() < 1e-9 * (1.0 + rhs.k().norm()));
                prop_assert!((lhs.r() - rhs.r()).abs() < 1e-9 * (1.0 + rhs.r().abs()));
            }

            #[test]
            fn equivalence_search_is_symmetric(seed in any::<u64>()) {
                let mut rng = StdRng::seed_from_u64(seed);
                let p1 = random::ergodic_point(&mut rng, 2, 1);
                let p2 = if rng.random_bool(0.5) {
                    let g = GaugeElement::new(random::unitary(&mut rng, 2), 0.3).unwrap();
                    ErgodicPoint::new(gauge_apply(&g, p1.params()).unwrap()).unwrap()
                } else {
                    random::ergodic_point(&mut rng, 2, 1)
                };
                let a = find_gauge_equivalence(&p1, &p2).unwrap().found;
                let b = find_gauge_equivalence(&p2, &p1).unwrap().found;
                prop_assert_eq!(a, b);
            }
        }
    }
}
