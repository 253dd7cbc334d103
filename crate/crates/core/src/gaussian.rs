//! Complex structure and symplectic form on the identifiable subspace, and
//! the Gaussian (coherent state) limit model built from them.

use nalgebra::DMatrix;

use crate::covariance::{markov_covariance, x_map, QfiConvention};
use crate::error::{Error, Result};
use crate::geometry::{e_map, TangentVector};
use crate::lindblad::{DynamicalParams, ErgodicPoint};
use crate::opspace::{self, c, re_part, CMatrix, C64, I};

/// Identifiability threshold on `‖E_D(Ḋ)‖`.
pub const IDENTIFIABLE_TOL: f64 = 1e-8;

fn require_identifiable(d: &DynamicalParams, t: &TangentVector) -> Result<()> {
    let norm = e_map(d, t)?.norm();
    if norm > IDENTIFIABLE_TOL * (1.0 + t.norm()) {
        return Err(Error::NotIdentifiable { norm });
    }
    Ok(())
}

fn complex_structure_unchecked(d: &DynamicalParams, t: &TangentVector) -> TangentVector {
    let dim = d.dim();
    let mut dh = CMatrix::zeros(dim, dim);
    for (dl, l) in t.dl().iter().zip(d.l()) {
        dh += re_part(&(dl.adjoint() * l));
    }
    TangentVector::from_parts(dh, t.dl().iter().map(|m| m * I).collect())
}

/// `J_D(Ḣ, L̇ⁱ) = (Σ Re L̇ⁱ*Lⁱ, iL̇ⁱ)` on identifiable tangents.
pub fn complex_structure(d: &DynamicalParams, t: &TangentVector) -> Result<TangentVector> {
    require_identifiable(d, t)?;
    Ok(complex_structure_unchecked(d, t))
}

/// `(Ḋ, Ḋ')_D`, the Markov covariance of the fluctuation tuples.
pub fn complex_inner(point: &ErgodicPoint, a: &TangentVector, b: &TangentVector) -> Result<C64> {
    markov_covariance(point, &x_map(point.params(), a)?, &x_map(point.params(), b)?)
}

/// `σ(Ḋ, Ḋ') = Im(Ḋ, Ḋ')_D`.
pub fn symplectic_form(point: &ErgodicPoint, a: &TangentVector, b: &TangentVector) -> Result<f64> {
    require_identifiable(point.params(), a)?;
    require_identifiable(point.params(), b)?;
    Ok(complex_inner(point, a, b)?.im)
}

/// Limit model of a point in a chosen basis of identifiable tangents.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLimitModel {
    pub basis: Vec<TangentVector>,
    /// `c·Re M`, `c` fixed by `convention`.
    pub f: DMatrix<f64>,
    /// `Im M`.
    pub sigma: DMatrix<f64>,
    /// LAN phase matrix; zero unless set explicitly.
    pub s: DMatrix<f64>,
    pub convention: QfiConvention,
    /// Ratio of extreme singular values of the coefficient map from the
    /// input span to the returned basis; 1 when the basis is given directly.
    pub condition_number: f64,
}

impl GaussianLimitModel {
    /// Evaluates `M_ab = (Ḋ_a, Ḋ_b)_D` on the given basis as is.
    pub fn from_basis(
        point: &ErgodicPoint,
        basis: Vec<TangentVector>,
        convention: QfiConvention,
    ) -> Result<Self> {
        for t in &basis {
            require_identifiable(point.params(), t)?;
        }
        let m = gram(point, &basis)?;
        let n = basis.len();
        Ok(Self {
            basis,
            f: m.map(|z| z.re * convention.factor()),
            sigma: m.map(|z| z.im),
            s: DMatrix::zeros(n, n),
            convention,
            condition_number: 1.0,
        })
    }

    pub fn dim_id(&self) -> usize {
        self.basis.len()
    }

    pub fn with_phase_matrix(mut self, s: DMatrix<f64>) -> Result<Self> {
        if s.shape() != self.f.shape() {
            return Err(Error::DimensionMismatch {
                context: "phase matrix",
                expected: self.f.nrows(),
                found: s.nrows(),
            });
        }
        self.s = s;
        Ok(self)
    }
}

fn gram(point: &ErgodicPoint, basis: &[TangentVector]) -> Result<DMatrix<C64>> {
    let xs = basis
        .iter()
        .map(|t| x_map(point.params(), t))
        .collect::<Result<Vec<_>>>()?;
    let n = basis.len();
    let mut m = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            m[(a, b)] = markov_covariance(point, &xs[a], &xs[b])?;
            m[(b, a)] = m[(a, b)].conj();
        }
    }
    Ok(m)
}

/// Complex coordinates `z = (vec(L̇ⁱ ρ^{1/2}))ᵢ`, so that `(Ḋ, Ḋ')_D = z*z'`
/// on identifiable tangents.
fn complex_coordinates(point: &ErgodicPoint, t: &TangentVector) -> Vec<C64> {
    let (vals, vecs) = crate::lindblad::hermitian_spectrum(point.rho());
    let sqrt_rho = &vecs
        * CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            vals.len(),
            vals.iter().map(|v| c(v.max(0.0).sqrt(), 0.0)),
        ))
        * vecs.adjoint();
    t.dl()
        .iter()
        .flat_map(|m| (m * &sqrt_rho).iter().copied().collect::<Vec<_>>())
        .collect()
}

/// Canonical symplectic basis of the real span of `spanning`.
///
/// The span must be closed under `J`; with `complete_with_j` the `J`-images
/// are added first. The result is `{q₁, p₁, …}` with `(q_j, q_k) = δ_jk`
/// and `p_j = −J q_j`, so `Σ = ⊕[[0,−1],[1,0]]` and `F = c·id`.
pub fn symplectic_basis(
    point: &ErgodicPoint,
    spanning: &[TangentVector],
    convention: QfiConvention,
    complete_with_j: bool,
) -> Result<GaussianLimitModel> {
    let d = point.params();
    for t in spanning {
        require_identifiable(d, t)?;
    }
    let real_rank = |vs: &[TangentVector]| {
        let cols: Vec<Vec<f64>> = vs
            .iter()
            .map(|t| {
                complex_coordinates(point, t)
                    .iter()
                    .flat_map(|z| [z.re, z.im])
                    .collect()
            })
            .collect();
        let rows = cols.first().map_or(0, Vec::len);
        opspace::real_rank(&DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i]), 1e-9)
    };
    let rank = real_rank(spanning);
    if rank < spanning.len() || spanning.is_empty() {
        return Err(Error::DegenerateSpan {
            rank,
            expected: spanning.len(),
        });
    }

    let mut vectors = spanning.to_vec();
    if complete_with_j {
        vectors.extend(spanning.iter().map(|t| complex_structure_unchecked(d, t)));
    }
    let z_cols: Vec<Vec<C64>> = vectors.iter().map(|t| complex_coordinates(point, t)).collect();
    let rows = z_cols[0].len();
    let z = DMatrix::from_fn(rows, z_cols.len(), |i, j| z_cols[j][i]);
    let complex_rank = opspace::complex_rank(&z, 1e-9);
    let total_real = if complete_with_j { real_rank(&vectors) } else { rank };
    if total_real != 2 * complex_rank {
        return Err(Error::NotComplexClosed {
            real_rank: total_real,
            complex_rank,
        });
    }

    // Z = U S V*, so q_j = Σ_l (V S⁻¹)_{lj} · v_l is complex orthonormal
    let (sv, _, v_mat) = opspace::svd(&z)?;
    let smax = sv[0];
    let smin = sv[complex_rank - 1];

    let mut basis = Vec::with_capacity(2 * complex_rank);
    for (k, &s) in sv.iter().enumerate().take(complex_rank) {
        let mut q = TangentVector::zero(d.dim(), d.channels());
        for (l, v) in vectors.iter().enumerate() {
            let coeff = v_mat[(l, k)] / s;
            q = q.add(&v.scale(coeff.re));
            q = q.add(&complex_structure_unchecked(d, v).scale(coeff.im));
        }
        let p = complex_structure_unchecked(d, &q).scale(-1.0);
        basis.push(q);
        basis.push(p);
    }
    let mut model = GaussianLimitModel::from_basis(point, basis, convention)?;
    model.condition_number = smax / smin;
    Ok(model)
}

/// `⟨u|u'⟩ = exp(−⅛ Δuᵀ f Δu + i uᵀ σ u')` with `f`, `σ` from the model.
pub fn coherent_overlap(model: &GaussianLimitModel, u: &[f64], u2: &[f64]) -> Result<C64> {
    let n = model.dim_id();
    if u.len() != n || u2.len() != n {
        return Err(Error::DimensionMismatch {
            context: "coherent_overlap vector length",
            expected: n,
            found: if u.len() != n { u.len() } else { u2.len() },
        });
    }
    let a = nalgebra::DVector::from_column_slice(u);
    let b = nalgebra::DVector::from_column_slice(u2);
    let du = &a - &b;
    let quad = du.dot(&(&model.f * &du));
    let phase = a.dot(&(&model.sigma * &b));
    Ok((c(-quad / 8.0, phase)).exp())
}

/// `S_aa' = ½ tr[ρ_ss (Ḧ_aa' + Im Σ L̈ⁱ*_aa' Lⁱ)] = ½ tr[ρ_ss E_D(D̈_aa')]`.
pub fn phase_matrix(point: &ErgodicPoint, second: &[Vec<TangentVector>]) -> Result<DMatrix<f64>> {
    let m = second.len();
    let mut s = DMatrix::zeros(m, m);
    for (a, row) in second.iter().enumerate() {
        if row.len() != m {
            return Err(Error::DimensionMismatch {
                context: "second derivative table",
                expected: m,
                found: row.len(),
            });
        }
        for (b, t) in row.iter().enumerate() {
            s[(a, b)] = 0.5 * point.mean(&e_map(point.params(), t)?).re;
        }
    }
    Ok(s)
}

/// Phase matrix from central differences of a chart `u ↦ D(u)` with step `h`.
pub fn phase_matrix_fd<F>(point: &ErgodicPoint, chart: F, m: usize, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<DynamicalParams>,
{
    let diff = |a: &DynamicalParams, b: &DynamicalParams| {
        TangentVector::from_parts(
            a.h() - b.h(),
            a.l().iter().zip(b.l()).map(|(x, y)| x - y).collect(),
        )
    };
    let eval = |a: usize, sa: f64, b: usize, sb: f64| {
        let mut u = vec![0.0; m];
        u[a] += sa * h;
        u[b] += sb * h;
        chart(&u)
    };
    let mut table = Vec::with_capacity(m);
    for a in 0..m {
        let mut row = Vec::with_capacity(m);
        for b in 0..m {
            let pp = eval(a, 1.0, b, 1.0)?;
            let pm = eval(a, 1.0, b, -1.0)?;
            let mp = eval(a, -1.0, b, 1.0)?;
            let mm = eval(a, -1.0, b, -1.0)?;
            let num = diff(&pp, &pm).sub(&diff(&mp, &mm));
            row.push(num.scale(1.0 / (4.0 * h * h)));
        }
        table.push(row);
    }
    phase_matrix(point, &table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::horizontal_projection;
    use crate::models::{self, TwoLevelParams};
    use crate::opspace::{matrix_unit, sigma_z};
    use crate::random;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn canonical(n: usize) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            s[(2 * j, 2 * j + 1)] = -1.0;
            s[(2 * j + 1, 2 * j)] = 1.0;
        }
        s
    }

    fn identifiable(rng: &mut StdRng, pt: &ErgodicPoint) -> TangentVector {
        let t = random::tangent(rng, pt.dim(), pt.channels());
        horizontal_projection(pt, &t).unwrap()
    }

    #[test]
    fn j_on_coupling_direction() {
        let mut rng = StdRng::seed_from_u64(1);
        let pt = random::ergodic_point(&mut rng, 2, 1);
        let l = pt.params().l()[0].clone();
        let t = TangentVector::new(CMatrix::zeros(2, 2), vec![l.clone()]).unwrap();
        let jt = complex_structure(pt.params(), &t).unwrap();
        assert!((jt.dh() - re_part(&(l.adjoint() * &l))).norm() < 1e-14);
        assert!(e_map(pt.params(), &jt).unwrap().norm() < 1e-13);
    }

    #[test]
    fn j_squares_to_minus_one() {
        let mut rng = StdRng::seed_from_u64(2);
        let pt = random::ergodic_point(&mut rng, 3, 2);
        let t = identifiable(&mut rng, &pt);
        let jjt = complex_structure(pt.params(), &complex_structure(pt.params(), &t).unwrap()).unwrap();
        assert!(jjt.add(&t).norm() < 1e-10);
        let xj = x_map(pt.params(), &complex_structure(pt.params(), &t).unwrap()).unwrap();
        let ix = x_map(pt.params(), &t).unwrap().scale(I);
        assert!(xj.sub(&ix).norm() < 1e-12 * (1.0 + ix.norm()));
    }

    #[test]
    fn j_rejects_vertical() {
        let mut rng = StdRng::seed_from_u64(3);
        let pt = random::ergodic_point(&mut rng, 2, 1);
        let t = random::tangent(&mut rng, 2, 1);
        assert!(matches!(
            complex_structure(pt.params(), &t),
            Err(Error::NotIdentifiable { .. })
        ));
    }

    #[test]
    fn symplectic_form_antisymmetric() {
        let mut rng = StdRng::seed_from_u64(4);
        let pt = random::ergodic_point(&mut rng, 3, 1);
        let a = identifiable(&mut rng, &pt);
        let b = identifiable(&mut rng, &pt);
        assert!(symplectic_form(&pt, &a, &a).unwrap().abs() < 1e-12);
        let ab = symplectic_form(&pt, &a, &b).unwrap();
        let ba = symplectic_form(&pt, &b, &a).unwrap();
        assert!((ab + ba).abs() < 1e-12);
    }

    #[test]
    fn paper_basis_first_pair() {
        let p = TwoLevelParams::new(1.3, 0.4, 0.8, 0.6);
        let pt = ErgodicPoint::new(models::two_level(&p).unwrap()).unwrap();
        let b = models::two_level_symplectic_basis(&p);
        assert!((symplectic_form(&pt, &b[0], &b[1]).unwrap() + 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_mode_from_pair() {
        let mut rng = StdRng::seed_from_u64(5);
        let pt = random::ergodic_point(&mut rng, 2, 1);
        let t = identifiable(&mut rng, &pt);
        let jt = complex_structure(pt.params(), &t).unwrap();
        let model = symplectic_basis(&pt, &[t.clone(), jt], QfiConvention::Metric, false).unwrap();
        assert_eq!(model.dim_id(), 2);
        assert!((&model.sigma - canonical(1)).amax() < 1e-8);
        assert!((&model.f - DMatrix::<f64>::identity(2, 2)).amax() < 1e-8);

        let completed = symplectic_basis(&pt, &[t.clone()], QfiConvention::FourX, true).unwrap();
        assert!((&completed.sigma - canonical(1)).amax() < 1e-8);
        assert!((&completed.f - DMatrix::<f64>::identity(2, 2).scale(4.0)).amax() < 1e-8);
        assert!(matches!(
            symplectic_basis(&pt, &[t.clone()], QfiConvention::Metric, false),
            Err(Error::NotComplexClosed { .. })
        ));
        assert!(matches!(
            symplectic_basis(&pt, &[t.clone(), t.scale(2.0)], QfiConvention::Metric, false),
            Err(Error::DegenerateSpan { rank: 1, .. })
        ));
    }

    #[test]
    fn coherent_overlap_examples() {
        let mut rng = StdRng::seed_from_u64(6);
        let pt = random::ergodic_point(&mut rng, 2, 1);
        let t = identifiable(&mut rng, &pt);
        let mut model = symplectic_basis(&pt, &[t], QfiConvention::Metric, true).unwrap();
        model.f = DMatrix::identity(2, 2).scale(2.0);
        model.sigma = canonical(1);
        let v = coherent_overlap(&model, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        let expected = (c(-0.5, -1.0)).exp();
        assert!((v - expected).norm() < 1e-15);
        assert!((coherent_overlap(&model, &[0.3, -2.0], &[0.3, -2.0]).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        let u = [0.7, 1.1];
        let m = coherent_overlap(&model, &u, &[0.0, 0.0]).unwrap().norm();
        assert!((m - (-(2.0 * (0.49 + 1.21)) / 8.0f64).exp()).abs() < 1e-15);
        assert!(coherent_overlap(&model, &[1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn phase_matrix_cases() {
        let p = TwoLevelParams::new(1.0, 0.0, 1.0, 0.0);
        let pt = ErgodicPoint::new(models::two_level(&p).unwrap()).unwrap();
        let zero = TangentVector::zero(2, 1);
        assert_eq!(phase_matrix(&pt, &[vec![zero.clone()]]).unwrap()[(0, 0)], 0.0);
        let sz = TangentVector::new(sigma_z(), vec![CMatrix::zeros(2, 2)]).unwrap();
        let s = phase_matrix(&pt, &[vec![sz]]).unwrap();
        assert!((s[(0, 0)] - 0.5 * pt.mean(&sigma_z()).re).abs() < 1e-14);
    }

    #[test]
    fn phase_matrix_finite_difference() {
        let p = TwoLevelParams::new(1.0, 0.3, 1.0, 0.0);
        let pt = ErgodicPoint::new(models::two_level(&p).unwrap()).unwrap();
        let base = pt.params().clone();
        // D(u) = D₀ + u₀u₁·(σ_z/2, 0) + u₁²·(0, E₁₀)
        let hess = [
            [TangentVector::zero(2, 1), TangentVector::new(sigma_z().scale(0.5), vec![CMatrix::zeros(2, 2)]).unwrap()],
            [
                TangentVector::new(sigma_z().scale(0.5), vec![CMatrix::zeros(2, 2)]).unwrap(),
                TangentVector::new(CMatrix::zeros(2, 2), vec![matrix_unit(2, 1, 0).scale(2.0)]).unwrap(),
            ],
        ];
        let chart = |u: &[f64]| {
            Ok(DynamicalParams::new(
                base.h() + sigma_z().scale(0.5 * u[0] * u[1]),
                vec![&base.l()[0] + matrix_unit(2, 1, 0).scale(u[1] * u[1])],
            )?)
        };
        let analytic = phase_matrix(&pt, &hess.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
        let fd = phase_matrix_fd(&pt, chart, 2, 1e-4).unwrap();
        assert!((analytic - fd).amax() < 1e-6);
    }

    mod props {
        use super::super::*;
        use crate::geometry::horizontal_projection;
        use crate::random;
        use proptest::prelude::*;
        use rand::rngs::StdRng;
        use rand::SeedableRng;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn j_preserves_metric(seed in any::<u64>()) {
                let mut rng = StdRng::seed_from_u64(seed);
                let pt = random::ergodic_point(&mut rng, 3, 2);
                let a = horizontal_projection(&pt, &random::tangent(&mut rng, 3, 2)).unwrap();
                let b = horizontal_projection(&pt, &random::tangent(&mut rng, 3, 2)).unwrap();
                let ja = complex_structure(pt.params(), &a).unwrap();
                let jb = complex_structure(pt.params(), &b).unwrap();
                let lhs = complex_inner(&pt, &ja, &jb).unwrap().re;
                let rhs = complex_inner(&pt, &a, &b).unwrap().re;
                prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()));
            }

            #[test]
            fn basis_is_canonical(seed in any::<u64>(), n in 1usize..=3) {
                let mut rng = StdRng::seed_from_u64(seed);
                let pt = random::ergodic_point(&mut rng, 3, 2);
                let span: Vec<_> = (0..n)
                    .map(|_| horizontal_projection(&pt, &random::tangent(&mut rng, 3, 2)).unwrap())
                    .collect();
                let model = symplectic_basis(&pt, &span, QfiConvention::Metric, true).unwrap();
                let mut can = DMatrix::zeros(2 * n, 2 * n);
                for j in 0..n {
                    can[(2 * j, 2 * j + 1)] = -1.0;
                    can[(2 * j + 1, 2 * j)] = 1.0;
                }
                prop_assert!((&model.sigma - can).amax() < 1e-8);
                prop_assert!((&model.f - DMatrix::<f64>::identity(2 * n, 2 * n)).amax() < 1e-8);
                prop_assert!(model.condition_number.is_finite());
            }

            #[test]
            fn coherent_gram_positive(seed in any::<u64>()) {
                let mut rng = StdRng::seed_from_u64(seed);
                let pt = random::ergodic_point(&mut rng, 2, 1);
                let t = horizontal_projection(&pt, &random::tangent(&mut rng, 2, 1)).unwrap();
                let model = symplectic_basis(&pt, &[t], QfiConvention::FourX, true).unwrap();
                let pts: Vec<Vec<f64>> = (0..5).map(|_| random::real_vector(&mut rng, 2)).collect();
                let g = DMatrix::from_fn(5, 5, |i, j| coherent_overlap(&model, &pts[i], &pts[j]).unwrap());
                let min = g.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
                prop_assert!(min > 0.0);
            }
        }
    }
}
