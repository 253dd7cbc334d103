//! Off-diagonal semigroups, system-output overlaps and the local asymptotic
//! normality (LAN) limit along a horizontal chart.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian::phase_matrix;
use crate::geometry::{e_map, horizontal_projection, TangentVector};
use crate::lindblad::{hermitian_spectrum, DynamicalParams, ErgodicPoint};
use crate::opspace::{self, c, identity, left_right_superop, CMatrix, CVector, Superoperator, C64, I};

/// `𝕎_{D,D'}(X) = i(HX − XH') + Σ[Lⁱ*XL'ⁱ − ½(Lⁱ*Lⁱ X + X L'ⁱ*L'ⁱ)]`.
pub fn offdiag_generator(d1: &DynamicalParams, d2: &DynamicalParams) -> Result<Superoperator> {
    d1.check_same_shape(d2)?;
    let id = identity(d1.dim());
    // i H₁ X − ½ΣL₁*L₁ X = i H₁,eff* X ; −i X H₂ − ½ X ΣL₂*L₂ = −i X H₂,eff
    let left = d1.h_eff().adjoint() * I;
    let right = d2.h_eff() * (-I);
    let mut s = left_right_superop(&left, &id)?.add(&left_right_superop(&id, &right)?);
    for (l1, l2) in d1.l().iter().zip(d2.l()) {
        s = s.add(&left_right_superop(&l1.adjoint(), l2)?);
    }
    Ok(s)
}

/// A chart `u ↦ D(u) = D₀ + Σ u_a Ḋ_a + ½ Σ u_a u_b D̈_ab` through an ergodic
/// point with identifiable first-order directions.
#[derive(Debug, Clone)]
pub struct LocalChart {
    base: ErgodicPoint,
    directions: Vec<TangentVector>,
    second: Option<Vec<Vec<TangentVector>>>,
}

/// Horizontality threshold on `‖E_D(Ḋ_a)‖` at chart construction.
pub const CHART_TOL: f64 = 1e-8;

impl LocalChart {
    pub fn new(
        base: ErgodicPoint,
        directions: Vec<TangentVector>,
        second: Option<Vec<Vec<TangentVector>>>,
    ) -> Result<Self> {
        for t in &directions {
            let norm = e_map(base.params(), t)?.norm();
            if norm > CHART_TOL {
                return Err(Error::NotIdentifiable { norm });
            }
        }
        if let Some(table) = &second {
            let m = directions.len();
            if table.len() != m || table.iter().any(|r| r.len() != m) {
                return Err(Error::DimensionMismatch {
                    context: "second derivative table",
                    expected: m,
                    found: table.len(),
                });
            }
            for t in table.iter().flatten() {
                t.check_against(base.params())?;
            }
        }
        Ok(Self {
            base,
            directions,
            second,
        })
    }

    /// Linear chart along the horizontal projections of `tangents`.
    pub fn linear_horizontal(base: ErgodicPoint, tangents: &[TangentVector]) -> Result<Self> {
        let directions = tangents
            .iter()
            .map(|t| horizontal_projection(&base, t))
            .collect::<Result<Vec<_>>>()?;
        Self::new(base, directions, None)
    }

    pub fn base(&self) -> &ErgodicPoint {
        &self.base
    }

    pub fn directions(&self) -> &[TangentVector] {
        &self.directions
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "chart coordinate length",
                expected: self.dim(),
                found: u.len(),
            });
        }
        Ok(())
    }

    fn first_order(&self, u: &[f64]) -> TangentVector {
        let b = self.base.params();
        self.directions
            .iter()
            .zip(u)
            .fold(TangentVector::zero(b.dim(), b.channels()), |acc, (t, &x)| acc.add(&t.scale(x)))
    }

    fn second_order(&self, u: &[f64]) -> Option<TangentVector> {
        let b = self.base.params();
        self.second.as_ref().map(|table| {
            let mut acc = TangentVector::zero(b.dim(), b.channels());
            for (a, row) in table.iter().enumerate() {
                for (bb, t) in row.iter().enumerate() {
                    acc = acc.add(&t.scale(u[a] * u[bb]));
                }
            }
            acc
        })
    }

    pub fn params_at(&self, u: &[f64]) -> Result<DynamicalParams> {
        self.check_len(u)?;
        let mut shift = self.first_order(u);
        if let Some(s) = self.second_order(u) {
            shift = shift.add(&s.scale(0.5));
        }
        let b = self.base.params();
        Ok(DynamicalParams::from_parts(
            b.h() + shift.dh(),
            b.l().iter().zip(shift.dl()).map(|(l, dl)| l + dl).collect(),
        ))
    }

    /// Phase matrix of the chart; zero for linear charts.
    pub fn phase_matrix(&self) -> Result<DMatrix<f64>> {
        match &self.second {
            Some(table) => phase_matrix(&self.base, table),
            None => Ok(DMatrix::zeros(self.dim(), self.dim())),
        }
    }
}

fn scaled(u: &[f64], t: f64) -> Vec<f64> {
    u.iter().map(|x| x / t.sqrt()).collect()
}

fn ergodic_at(chart: &LocalChart, u: &[f64], t: f64) -> Result<DynamicalParams> {
    let p = chart.params_at(&scaled(u, t))?;
    let rep = crate::lindblad::stationary_state(&p)?;
    if !rep.ergodic {
        return Err(Error::ChartOutOfRange { u: u.to_vec(), t });
    }
    Ok(p)
}

fn unit(phi: Option<&CVector>, point: &ErgodicPoint) -> Result<CVector> {
    match phi {
        Some(v) if v.len() == point.dim() && v.norm() > 0.0 => Ok(v / c(v.norm(), 0.0)),
        Some(_) => Err(Error::InvalidArgument("phi must be a nonzero d-vector".into())),
        None => Ok(point.leading_vector()),
    }
}

/// `⟨φ| e^{t𝕎_{D,D'}}(id) |φ⟩` with `D = D(u/√t)`, `D' = D(u'/√t)`.
pub fn finite_overlap(
    chart: &LocalChart,
    u: &[f64],
    u2: &[f64],
    t: f64,
    phi: Option<&CVector>,
) -> Result<C64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
    }
    chart.check_len(u)?;
    chart.check_len(u2)?;
    let phi = unit(phi, &chart.base)?;
    let d1 = ergodic_at(chart, u, t)?;
    let d2 = ergodic_at(chart, u2, t)?;
    let gen = offdiag_generator(&d1, &d2)?;
    let evolved = opspace::expm(&gen, t)?.apply(&identity(chart.base.dim()));
    Ok((phi.adjoint() * evolved * &phi)[(0, 0)])
}

/// First- and second-order terms `𝕃₁`, `𝕃₂` of `s ↦ 𝕎_{D(su), D(su')}`.
fn expansion_terms(chart: &LocalChart, u: &[f64], u2: &[f64]) -> (Superoperator, Superoperator) {
    let b = chart.base.params();
    let id = identity(b.dim());
    let lr = |a: &CMatrix, bm: &CMatrix| left_right_superop(a, bm).expect("square");
    let first = |x: &TangentVector, y: &TangentVector| {
        // i(ḣX − Xḣ') + Σ[l*XL + L*Xl' − ½(l*L + L*l)X − ½X(l'*L + L*l')]
        let mut s = lr(&(x.dh() * I), &id).add(&lr(&id, &(y.dh() * (-I))));
        for ((lx, ly), l) in x.dl().iter().zip(y.dl()).zip(b.l()) {
            let ax = lx.adjoint() * l + l.adjoint() * lx;
            let ay = ly.adjoint() * l + l.adjoint() * ly;
            s = s
                .add(&lr(&lx.adjoint(), l))
                .add(&lr(&l.adjoint(), ly))
                .add(&lr(&(ax * c(-0.5, 0.0)), &id))
                .add(&lr(&id, &(ay * c(-0.5, 0.0))));
        }
        s
    };
    let x = chart.first_order(u);
    let y = chart.first_order(u2);
    let l1 = first(&x, &y);
    // 2Σ[l*Xl' − ½(l*l X + X l'*l')] plus the first-order form of the Hessian terms
    let mut l2 = Superoperator::zero(b.dim());
    for (lx, ly) in x.dl().iter().zip(y.dl()) {
        l2 = l2
            .add(&lr(&lx.adjoint(), ly))
            .add(&lr(&(lx.adjoint() * lx * c(-0.5, 0.0)), &id))
            .add(&lr(&id, &(ly.adjoint() * ly * c(-0.5, 0.0))));
    }
    let mut l2 = l2.scale(c(2.0, 0.0));
    if let (Some(sx), Some(sy)) = (chart.second_order(u), chart.second_order(u2)) {
        l2 = l2.add(&first(&sx, &sy));
    }
    (l1, l2)
}

/// `exp f(u,u')` with `f = tr[ρ_ss(½𝕃₂(id) − 𝕃₁ 𝕎⁻¹ C 𝕃₁(id))]`.
///
/// For horizontal directions this equals `exp(−⅛Δuᵀf₄Δu + i uᵀσu' + i(uᵀSu − u'ᵀSu'))`
/// with `f₄ = 4 Re M` and `S` the chart phase matrix.
pub fn limit_overlap(chart: &LocalChart, u: &[f64], u2: &[f64]) -> Result<C64> {
    chart.check_len(u)?;
    chart.check_len(u2)?;
    let base = &chart.base;
    let id = identity(base.dim());
    let (l1, l2) = expansion_terms(chart, u, u2);
    let l1_id = l1.apply(&id);
    let correction = l1.apply(&base.inverse_centered(&l1_id));
    let f = base.mean(&(l2.apply(&id) * c(0.5, 0.0) - correction));
    Ok(f.exp())
}

/// Convergence of finite-time overlaps toward the limit.
#[derive(Debug, Clone)]
pub struct LanReport {
    pub t_values: Vec<f64>,
    pub finite_overlaps: Vec<C64>,
    pub errors: Vec<f64>,
    pub limit_value: C64,
    pub phase_matrix_used: DMatrix<f64>,
    /// Error at the largest `t`.
    pub max_abs_error: f64,
    /// Sign convention of the chart phase in `limit_value`.
    pub phase_convention: &'static str,
}

pub const PHASE_CONVENTION: &str = "exp(+i(u^T S u - u'^T S u'))";

pub fn lan_convergence(
    chart: &LocalChart,
    u: &[f64],
    u2: &[f64],
    t_list: &[f64],
    phi: Option<&CVector>,
) -> Result<LanReport> {
    if t_list.is_empty() {
        return Err(Error::InvalidArgument("t_list is empty".into()));
    }
    let limit_value = limit_overlap(chart, u, u2)?;
    let finite_overlaps = t_list
        .iter()
        .map(|&t| finite_overlap(chart, u, u2, t, phi))
        .collect::<Result<Vec<_>>>()?;
    let errors: Vec<f64> = finite_overlaps.iter().map(|z| (z - limit_value).norm()).collect();
    let (imax, _) = t_list
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    Ok(LanReport {
        t_values: t_list.to_vec(),
        max_abs_error: errors[imax],
        finite_overlaps,
        errors,
        limit_value,
        phase_matrix_used: chart.phase_matrix()?,
        phase_convention: PHASE_CONVENTION,
    })
}

/// `tr[ρ₁^out(t) ρ₂^out(t)] = Σ Λ₁ₘΛ₂ₙ |⟨e₁ₘ| T₁₂,t(|e₁ₘ'⟩⟨e₂ₙ'|) |e₂ₙ⟩|²`
/// with `T₁₂,t = e^{t𝕎₁₂}` and `(Λ, e)` the spectra of the stationary states.
pub fn output_overlap_trace(p1: &ErgodicPoint, p2: &ErgodicPoint, t: f64) -> Result<f64> {
    let cross = offdiag_generator(p1.params(), p2.params())?;
    let semigroup = opspace::expm(&cross, t)?;
    let (lam1, e1) = hermitian_spectrum(p1.rho());
    let (lam2, e2) = hermitian_spectrum(p2.rho());
    let d = p1.dim();
    let mut acc = 0.0;
    for mp in 0..d {
        for np in 0..d {
            let x = e1.column(mp) * e2.column(np).adjoint();
            let y = e1.adjoint() * semigroup.apply(&x) * &e2;
            for m in 0..d {
                for n in 0..d {
                    acc += lam1[m] * lam2[n] * y[(m, n)].norm_sqr();
                }
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::QfiConvention;
    use crate::gaussian::{coherent_overlap, GaussianLimitModel};
    use crate::geometry::{gauge_apply, GaugeElement};
    use crate::lindblad::heisenberg_generator;
    use crate::models::{self, TwoLevelParams};
    use crate::opspace::{matrix_unit, sigma_z};
    use crate::random;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn two_level_chart() -> LocalChart {
        let p = TwoLevelParams::new(1.0, 0.0, 1.0, 0.0);
        models::two_level_chart(&p).unwrap()
    }

    #[test]
    fn offdiag_on_diagonal_is_lindblad() {
        let mut rng = StdRng::seed_from_u64(1);
        let d = random::dynamical_params(&mut rng, 3, 2);
        let s = offdiag_generator(&d, &d).unwrap();
        assert!((s.matrix() - heisenberg_generator(&d).matrix()).camax() < 1e-12);
    }

    #[test]
    fn offdiag_hamiltonian_shift_is_phase() {
        let mut rng = StdRng::seed_from_u64(2);
        let d = random::dynamical_params(&mut rng, 2, 1);
        let g = GaugeElement::new(identity(2), 0.7).unwrap();
        let d2 = gauge_apply(&g, &d).unwrap();
        let s = offdiag_generator(&d, &d2).unwrap();
        assert!((s.apply(&identity(2)) - identity(2) * c(0.0, -0.7)).norm() < 1e-12);
    }

    #[test]
    fn offdiag_inequivalent_is_contractive() {
        let mut rng = StdRng::seed_from_u64(3);
        let p1 = random::ergodic_point(&mut rng, 2, 1);
        let p2 = random::ergodic_point(&mut rng, 2, 1);
        let eigs = opspace::eigenvalues(offdiag_generator(p1.params(), p2.params()).unwrap().matrix()).unwrap();
        assert!(eigs.iter().all(|z| z.re < 0.0));
    }

    #[test]
    fn chart_rejects_vertical_direction() {
        let chart = two_level_chart();
        let base = chart.base().clone();
        let vertical = TangentVector::new(identity(2), vec![CMatrix::zeros(2, 2)]).unwrap();
        assert!(matches!(
            LocalChart::new(base, vec![vertical], None),
            Err(Error::NotIdentifiable { .. })
        ));
    }

    #[test]
    fn coincident_overlap_is_one() {
        let chart = two_level_chart();
        let u = [0.4, -0.2, 0.1, 0.3];
        for t in [1.0, 10.0, 100.0] {
            let v = finite_overlap(&chart, &u, &u, t, None).unwrap();
            assert!((v - c(1.0, 0.0)).norm() < 1e-10);
        }
        assert!((limit_overlap(&chart, &u, &u).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn linear_chart_limit_is_coherent_overlap() {
        let chart = two_level_chart();
        let model = GaussianLimitModel::from_basis(chart.base(), chart.directions().to_vec(), QfiConvention::FourX).unwrap();
        let u = [0.5, -0.3, 0.8, 0.2];
        let u2 = [-0.1, 0.4, 0.0, 0.6];
        let a = limit_overlap(&chart, &u, &u2).unwrap();
        let b = coherent_overlap(&model, &u, &u2).unwrap();
        assert!((a - b).norm() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn alpha_direction_modulus() {
        let p = TwoLevelParams::new(1.0, 0.0, 1.0, 0.0);
        let pt = ErgodicPoint::new(models::two_level(&p).unwrap()).unwrap();
        let d_alpha = models::two_level_tangents(&p).physical[2].clone();
        let chart = LocalChart::linear_horizontal(pt, &[d_alpha]).unwrap();
        let f_alpha = 1.0 / 3.0;
        let v = limit_overlap(&chart, &[1.2], &[0.2]).unwrap();
        assert!((v.norm() - (-(4.0 * f_alpha) / 8.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn gauge_phase_of_overlap() {
        let mut rng = StdRng::seed_from_u64(4);
        let p1 = random::ergodic_point(&mut rng, 2, 1);
        let a = 0.37;
        let d2 = gauge_apply(&GaugeElement::new(identity(2), a).unwrap(), p1.params()).unwrap();
        let phi = random::unit_vector(&mut rng, 2);
        let t = 5.0;
        let s = offdiag_generator(p1.params(), &d2).unwrap();
        let v = (phi.adjoint() * opspace::expm(&s, t).unwrap().apply(&identity(2)) * &phi)[(0, 0)];
        assert!((v.norm() - 1.0).abs() < 1e-9);
        assert!((v - c(0.0, -a * t).exp()).norm() < 1e-9);
    }

    #[test]
    fn quadratic_chart_phase() {
        let p = TwoLevelParams::new(1.0, 0.0, 1.0, 0.0);
        let pt = ErgodicPoint::new(models::two_level(&p).unwrap()).unwrap();
        let dir = models::two_level_tangents(&p).physical[2].clone();
        let hess = TangentVector::new(sigma_z(), vec![matrix_unit(2, 1, 0)]).unwrap();
        let chart = LocalChart::new(pt.clone(), vec![dir], Some(vec![vec![hess.clone()]])).unwrap();
        let s = chart.phase_matrix().unwrap()[(0, 0)];
        assert!((s - 0.5 * pt.mean(&e_map(pt.params(), &hess).unwrap()).re).abs() < 1e-14);
        let (u, u2) = (0.9, -0.4);
        let lin = LocalChart::new(pt, chart.directions().to_vec(), None).unwrap();
        let expected = limit_overlap(&lin, &[u], &[u2]).unwrap() * c(0.0, s * (u * u - u2 * u2)).exp();
        assert!((limit_overlap(&chart, &[u], &[u2]).unwrap() - expected).norm() < 1e-12);
    }

    #[test]
    fn output_overlap_endpoints() {
        let p = TwoLevelParams::new(1.0, 0.0, 1.0, 0.0);
        let pt = ErgodicPoint::new(models::two_level(&p).unwrap()).unwrap();
        assert!((output_overlap_trace(&pt, &pt, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let s5 = 5.0f64.sqrt() / 3.0;
        let (l1, l2) = ((1.0 + s5) / 2.0, (1.0 - s5) / 2.0);
        let limit = (l1 * l1 + l2 * l2).powi(2);
        let v = output_overlap_trace(&pt, &pt, 200.0 / pt.spectral_gap()).unwrap();
        assert!((v - limit).abs() < 1e-3 * limit);
    }
}
