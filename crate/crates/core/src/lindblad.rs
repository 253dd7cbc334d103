//! Lindblad generators, the reduced semigroup, stationary states and the
//! inverse of the generator on zero-mean operators.

use crate::error::{Error, Result};
use crate::opspace::{
    self, c, hermitian_defect, identity, is_finite, left_right_superop, trace, vectorize, CMatrix,
    Superoperator, C64, I, ONE,
};

/// A dynamical parameter `D = (H, L¹, …, Lᵏ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalParams {
    h: CMatrix,
    l: Vec<CMatrix>,
}

impl DynamicalParams {
    pub fn new(h: CMatrix, l: Vec<CMatrix>) -> Result<Self> {
        let d = h.nrows();
        if d == 0 || h.ncols() != d {
            return Err(Error::DimensionMismatch {
                context: "H must be square and nonempty",
                expected: d,
                found: h.ncols(),
            });
        }
        for li in &l {
            if li.nrows() != d || li.ncols() != d {
                return Err(Error::DimensionMismatch {
                    context: "jump operator",
                    expected: d,
                    found: li.nrows(),
                });
            }
        }
        if !is_finite(&h) || !l.iter().all(is_finite) {
            return Err(Error::NonFinite {
                what: "dynamical parameter",
            });
        }
        let defect = hermitian_defect(&h);
        if defect > 1e-12 * (1.0 + h.norm()) {
            return Err(Error::NotHermitian {
                what: "Hamiltonian",
                norm: defect,
            });
        }
        Ok(Self { h, l })
    }

    /// Skips the Hermiticity check and symmetrizes `H` instead. For values
    /// produced by arithmetic on already valid parameters.
    pub(crate) fn from_parts(h: CMatrix, l: Vec<CMatrix>) -> Self {
        Self {
            h: opspace::re_part(&h),
            l,
        }
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn channels(&self) -> usize {
        self.l.len()
    }

    pub fn h(&self) -> &CMatrix {
        &self.h
    }

    pub fn l(&self) -> &[CMatrix] {
        &self.l
    }

    /// `Σ Lⁱ* Lⁱ`.
    pub fn jump_sum(&self) -> CMatrix {
        let d = self.dim();
        self.l
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, li| acc + li.adjoint() * li)
    }

    /// `H_eff = H − (i/2) Σ Lⁱ* Lⁱ`.
    pub fn h_eff(&self) -> CMatrix {
        &self.h - self.jump_sum() * c(0.0, 0.5)
    }

    pub(crate) fn check_same_shape(&self, other: &DynamicalParams) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                context: "system dimension",
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if self.channels() != other.channels() {
            return Err(Error::DimensionMismatch {
                context: "number of channels",
                expected: self.channels(),
                found: other.channels(),
            });
        }
        Ok(())
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let defect = hermitian_defect(&m);
        if defect > 1e-10 {
            return Err(Error::NotHermitian {
                what: "density matrix",
                norm: defect,
            });
        }
        let tr = trace(&m);
        if (tr - ONE).norm() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        let min = min_hermitian_eigenvalue(&m);
        if min < -1e-10 {
            return Err(Error::InvalidArgument(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(&self.0)
    }

    /// Eigenvalues in ascending order with matching eigenvector columns.
    pub fn spectrum(&self) -> (Vec<f64>, CMatrix) {
        hermitian_spectrum(&self.0)
    }
}

pub(crate) fn hermitian_spectrum(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = opspace::re_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(m.nrows(), m.ncols(), |r, j| eig.eigenvectors[(r, order[j])]);
    (vals, vecs)
}

pub(crate) fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    opspace::re_part(m)
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Outcome of the ergodicity test.
#[derive(Debug, Clone)]
pub struct ErgodicityReport {
    pub ergodic: bool,
    /// Present only when `ergodic` holds.
    pub stationary: Option<DensityMatrix>,
    pub zero_eigen_count: usize,
    pub min_stationary_eigenvalue: f64,
    /// `−max Re λ` over the eigenvalues of `𝕎` outside the zero cluster.
    pub spectral_gap: f64,
}

/// `𝕎(X) = −i X H_eff + i H_eff* X + Σ Lⁱ* X Lⁱ`.
pub fn heisenberg_generator(d: &DynamicalParams) -> Superoperator {
    let id = identity(d.dim());
    let h_eff = d.h_eff();
    let mut s = left_right_superop(&(h_eff.adjoint() * I), &id)
        .expect("square")
        .add(&left_right_superop(&id, &(h_eff * (-I))).expect("square"));
    for li in d.l() {
        s = s.add(&left_right_superop(&li.adjoint(), li).expect("square"));
    }
    s
}

/// `𝕎_*(ρ) = −i H_eff ρ + i ρ H_eff* + Σ Lⁱ ρ Lⁱ*`, the trace dual of `𝕎`.
pub fn schrodinger_generator(d: &DynamicalParams) -> Superoperator {
    let id = identity(d.dim());
    let h_eff = d.h_eff();
    let mut s = left_right_superop(&(&h_eff * (-I)), &id)
        .expect("square")
        .add(&left_right_superop(&id, &(h_eff.adjoint() * I)).expect("square"));
    for li in d.l() {
        s = s.add(&left_right_superop(li, &li.adjoint()).expect("square"));
    }
    s
}

/// Relative threshold separating the zero eigenvalue cluster of `𝕎`.
pub fn rank_tolerance(generator: &Superoperator) -> f64 {
    1e-9 * (1.0 + generator.norm())
}

/// Smallest eigenvalue a stationary state must exceed to count as full rank.
pub const FULL_RANK_TOL: f64 = 1e-10;

/// Spectral ergodicity test; the stationary state candidate is the null
/// vector of `𝕎_*` taken from its smallest singular value.
pub fn stationary_state(d: &DynamicalParams) -> Result<ErgodicityReport> {
    let gen = heisenberg_generator(d);
    let dual = schrodinger_generator(d);
    analyse(d.dim(), &gen, &dual)
}

fn analyse(dim: usize, gen: &Superoperator, dual: &Superoperator) -> Result<ErgodicityReport> {
    let eigs = opspace::eigenvalues(gen.matrix())?;
    let tol = rank_tolerance(gen);
    let zero_eigen_count = eigs.iter().filter(|z| z.norm() < tol).count();
    let spectral_gap = eigs
        .iter()
        .filter(|z| z.norm() >= tol)
        .map(|z| -z.re)
        .fold(f64::INFINITY, f64::min);
    let spectral_gap = if spectral_gap.is_finite() {
        spectral_gap
    } else {
        0.0
    };

    let (_, _, v) = opspace::svd(dual.matrix())?;
    let null = v.column(v.ncols() - 1).into_owned();
    let mut rho = opspace::devectorize(&null, dim);
    let tr = trace(&rho);
    if tr.norm() < 1e-14 {
        // traceless null vector: no normalizable stationary state
        return Ok(ErgodicityReport {
            ergodic: false,
            stationary: None,
            zero_eigen_count,
            min_stationary_eigenvalue: f64::NAN,
            spectral_gap,
        });
    }
    rho /= tr;
    let rho = opspace::re_part(&rho);
    let min_stationary_eigenvalue = min_hermitian_eigenvalue(&rho);
    let ergodic = zero_eigen_count == 1 && min_stationary_eigenvalue > FULL_RANK_TOL;
    let stationary = if ergodic {
        Some(DensityMatrix::new(rho)?)
    } else {
        None
    };
    Ok(ErgodicityReport {
        ergodic,
        stationary,
        zero_eigen_count,
        min_stationary_eigenvalue,
        spectral_gap,
    })
}

/// An ergodic dynamical parameter together with the derived data every
/// downstream computation needs: generator, stationary state, spectral gap
/// and a factorized inverse on zero-mean operators.
#[derive(Debug, Clone)]
pub struct ErgodicPoint {
    params: DynamicalParams,
    generator: Superoperator,
    rho: CMatrix,
    report: ErgodicityReport,
    // pseudo-inverse of [𝕎; vec(ρᵀ)ᵀ], restricted to its first d² columns
    inverse: CMatrix,
}

impl ErgodicPoint {
    pub fn new(params: DynamicalParams) -> Result<Self> {
        let generator = heisenberg_generator(&params);
        let dual = schrodinger_generator(&params);
        let report = analyse(params.dim(), &generator, &dual)?;
        let rho = match &report.stationary {
            Some(s) if report.ergodic => s.matrix().clone(),
            _ => {
                return Err(Error::NotErgodic {
                    zero_eigen_count: report.zero_eigen_count,
                    min_stationary_eigenvalue: report.min_stationary_eigenvalue,
                })
            }
        };
        let n = params.dim() * params.dim();
        let mut stacked = CMatrix::zeros(n + 1, n);
        stacked.view_mut((0, 0), (n, n)).copy_from(generator.matrix());
        let mean_row = vectorize(&rho.transpose());
        for j in 0..n {
            stacked[(n, j)] = mean_row[j];
        }
        let pinv = opspace::pseudo_inverse(&stacked, 1e-13)?;
        let inverse = pinv.columns(0, n).into_owned();
        Ok(Self {
            params,
            generator,
            rho,
            report,
            inverse,
        })
    }

    pub fn params(&self) -> &DynamicalParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    pub fn channels(&self) -> usize {
        self.params.channels()
    }

    pub fn generator(&self) -> &Superoperator {
        &self.generator
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn report(&self) -> &ErgodicityReport {
        &self.report
    }

    pub fn spectral_gap(&self) -> f64 {
        self.report.spectral_gap
    }

    /// `tr[ρ_ss X]`.
    pub fn mean(&self, x: &CMatrix) -> C64 {
        trace(&(&self.rho * x))
    }

    /// `C(X) = X − tr[ρ_ss X]·id`.
    pub fn center(&self, x: &CMatrix) -> CMatrix {
        x - identity(self.dim()) * self.mean(x)
    }

    /// `𝕎⁻¹ X` for `tr[ρ_ss X] = 0`; the result is again zero-mean.
    pub fn restricted_inverse(&self, x: &CMatrix) -> Result<CMatrix> {
        self.check_operand(x)?;
        let m = self.mean(x).norm();
        if m > 1e-10 * x.norm().max(1.0) {
            return Err(Error::NotCentered { value: m });
        }
        Ok(self.inverse_unchecked(x))
    }

    /// `𝕎⁻¹ C(X)`, centering first.
    pub fn inverse_centered(&self, x: &CMatrix) -> CMatrix {
        self.inverse_unchecked(&self.center(x))
    }

    pub(crate) fn inverse_unchecked(&self, x: &CMatrix) -> CMatrix {
        opspace::devectorize(&(&self.inverse * vectorize(x)), self.dim())
    }

    pub fn semigroup(&self, t: f64) -> Result<Superoperator> {
        opspace::expm(&self.generator, t)
    }

    /// `T_t(X) = e^{t𝕎}(X)`.
    pub fn semigroup_apply(&self, t: f64, x: &CMatrix) -> Result<CMatrix> {
        self.check_operand(x)?;
        Ok(self.semigroup(t)?.apply(x))
    }

    /// Leading eigenvector of `ρ_ss`, the default initial system vector.
    pub fn leading_vector(&self) -> opspace::CVector {
        let (_, vecs) = hermitian_spectrum(&self.rho);
        vecs.column(self.dim() - 1).into_owned()
    }

    fn check_operand(&self, x: &CMatrix) -> Result<()> {
        if x.nrows() != self.dim() || x.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "operator",
                expected: self.dim(),
                found: x.nrows(),
            });
        }
        Ok(())
    }
}

/// Free-function form of [`ErgodicPoint::restricted_inverse`].
pub fn restricted_inverse(d: &DynamicalParams, x: &CMatrix) -> Result<CMatrix> {
    ErgodicPoint::new(d.clone())?.restricted_inverse(x)
}

/// `T_t(X)`; valid for any parameter, ergodic or not.
pub fn semigroup_apply(d: &DynamicalParams, t: f64, x: &CMatrix) -> Result<CMatrix> {
    Ok(opspace::expm(&heisenberg_generator(d), t)?.apply(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opspace::{matrix_unit, sigma_x, ZERO};
    use crate::random;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn two_level_point() -> DynamicalParams {
        DynamicalParams::new(sigma_x().scale(0.5), vec![matrix_unit(2, 0, 1)]).unwrap()
    }

    #[test]
    fn zero_generator() {
        let d = DynamicalParams::new(CMatrix::zeros(2, 2), vec![CMatrix::zeros(2, 2)]).unwrap();
        assert_eq!(heisenberg_generator(&d).norm(), 0.0);
        assert_eq!(schrodinger_generator(&d).norm(), 0.0);
    }

    #[test]
    fn hamiltonian_only_is_commutator() {
        let mut rng = StdRng::seed_from_u64(1);
        let h = random::hermitian(&mut rng, 3);
        let x = random::ginibre(&mut rng, 3);
        let d = DynamicalParams::new(h.clone(), vec![]).unwrap();
        let w = heisenberg_generator(&d).apply(&x);
        assert!((w - opspace::commutator(&h, &x) * I).norm() < 1e-12);
        let rep = stationary_state(&d).unwrap();
        assert!(!rep.ergodic);
        assert!(rep.zero_eigen_count >= 3);
    }

    #[test]
    fn pure_decay_not_ergodic() {
        let d = DynamicalParams::new(CMatrix::zeros(2, 2), vec![matrix_unit(2, 0, 1)]).unwrap();
        let rep = stationary_state(&d).unwrap();
        assert!(!rep.ergodic);
        assert!(rep.min_stationary_eigenvalue.abs() < 1e-10);
        assert!(ErgodicPoint::new(d).is_err());
    }

    #[test]
    fn two_level_stationary_state() {
        let d = two_level_point();
        let rep = stationary_state(&d).unwrap();
        assert!(rep.ergodic);
        assert_eq!(rep.zero_eigen_count, 1);
        let rho = rep.stationary.unwrap().into_matrix();
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[c(2.0 / 3.0, 0.0), c(0.0, 1.0 / 3.0), c(0.0, -1.0 / 3.0), c(1.0 / 3.0, 0.0)],
        );
        assert!((&rho - &expected).camax() < 1e-10);
        let residual = schrodinger_generator(&d).apply(&expected);
        assert!(residual.camax() < 1e-14);
    }

    #[test]
    fn unitality_and_duality() {
        let mut rng = StdRng::seed_from_u64(2);
        for (dim, k) in [(2, 1), (3, 2), (4, 1)] {
            let d = random::dynamical_params(&mut rng, dim, k);
            let w = heisenberg_generator(&d);
            let ws = schrodinger_generator(&d);
            assert!(w.apply(&identity(dim)).norm() < 1e-12);
            let rho = random::density(&mut rng, dim);
            let x = random::ginibre(&mut rng, dim);
            let lhs = opspace::hs_inner(&ws.apply(&rho).adjoint(), &x).unwrap();
            let rhs = opspace::hs_inner(&rho.adjoint(), &w.apply(&x)).unwrap();
            assert!((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));
            assert!(trace(&ws.apply(&rho)).norm() < 1e-12);
            assert!((ws.matrix() - w.trace_dual().matrix()).norm() < 1e-12);
        }
    }

    #[test]
    fn hermiticity_preserved() {
        let mut rng = StdRng::seed_from_u64(3);
        let d = random::dynamical_params(&mut rng, 3, 2);
        let x = random::hermitian(&mut rng, 3);
        let y = heisenberg_generator(&d).apply(&x);
        assert!(hermitian_defect(&y) < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian_hamiltonian() {
        let h = matrix_unit(2, 0, 1);
        assert!(matches!(
            DynamicalParams::new(h, vec![]),
            Err(Error::NotHermitian { .. })
        ));
        assert!(DynamicalParams::new(CMatrix::zeros(2, 2), vec![CMatrix::zeros(3, 3)]).is_err());
    }

    #[test]
    fn restricted_inverse_recovers_preimage() {
        let mut rng = StdRng::seed_from_u64(4);
        let p = random::ergodic_point(&mut rng, 3, 2);
        let k0 = p.center(&random::ginibre(&mut rng, 3));
        let x = p.generator().apply(&k0);
        let k = p.restricted_inverse(&x).unwrap();
        assert!((&k - &k0).norm() < 1e-9);
        assert!(p.mean(&k).norm() < 1e-12);
        assert_eq!(
            p.restricted_inverse(&CMatrix::zeros(3, 3)).unwrap(),
            CMatrix::zeros(3, 3)
        );
        assert!(matches!(
            p.restricted_inverse(&identity(3)),
            Err(Error::NotCentered { .. })
        ));
    }

    #[test]
    fn restricted_inverse_matches_time_integral() {
        // −𝕎⁻¹ X = ∫₀^∞ T_s(X) ds on zero-mean X; composite Simpson on [0, T]
        let p = ErgodicPoint::new(two_level_point()).unwrap();
        let x = p.center(&matrix_unit(2, 1, 1));
        let horizon = 50.0 / p.spectral_gap();
        let n = 4000;
        let h = horizon / n as f64;
        let step = p.semigroup(h).unwrap();
        let mut acc = CMatrix::zeros(2, 2);
        let mut cur = x.clone();
        for j in 0..=n {
            let w = if j == 0 || j == n {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += &cur * c(w * h / 3.0, 0.0);
            cur = step.apply(&cur);
        }
        let inv = p.restricted_inverse(&x).unwrap();
        assert!((acc + inv).norm() < 1e-6);
    }

    #[test]
    fn semigroup_limits() {
        let p = ErgodicPoint::new(two_level_point()).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        let x = random::ginibre(&mut rng, 2);
        assert_eq!(p.semigroup_apply(0.0, &x).unwrap(), x);
        let id = identity(2);
        assert!((p.semigroup_apply(3.0, &id).unwrap() - &id).norm() < 1e-12);
        let t = 100.0 / p.spectral_gap();
        let y = p.semigroup_apply(t, &x).unwrap();
        assert!((y - id * p.mean(&x)).norm() < 1e-8);
        let y = p.semigroup_apply(0.7, &x).unwrap();
        assert!((p.mean(&y) - p.mean(&x)).norm() < 1e-12);
    }

    #[test]
    fn spectrum_of_ergodic_generator() {
        let p = ErgodicPoint::new(two_level_point()).unwrap();
        let eigs = opspace::eigenvalues(p.generator().matrix()).unwrap();
        let tol = rank_tolerance(p.generator());
        assert_eq!(eigs.iter().filter(|z| z.norm() < tol).count(), 1);
        assert!(eigs.iter().filter(|z| z.norm() >= tol).all(|z| z.re < 0.0));
        assert!(p.spectral_gap() > 0.0);
        assert_ne!(p.rho()[(0, 1)], ZERO);
    }

    mod props {
        use super::super::*;
        use crate::random;
        use proptest::prelude::*;
        use rand::rngs::StdRng;
        use rand::SeedableRng;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn unitality(seed in any::<u64>(), dim in 1usize..=5, k in 0usize..=3) {
                let mut rng = StdRng::seed_from_u64(seed);
                let d = random::dynamical_params(&mut rng, dim, k);
                prop_assert!(heisenberg_generator(&d).apply(&identity(dim)).norm() < 1e-12 * (1.0 + heisenberg_generator(&d).norm()));
            }

            #[test]
            fn inverse_on_zero_mean(seed in any::<u64>(), dim in 2usize..=4, k in 1usize..=2) {
                let mut rng = StdRng::seed_from_u64(seed);
                let p = random::ergodic_point(&mut rng, dim, k);
                let k0 = p.center(&random::ginibre(&mut rng, dim));
                let back = p.restricted_inverse(&p.generator().apply(&k0)).unwrap();
                prop_assert!((back - k0).norm() < 1e-9);
            }

            #[test]
            fn semigroup_positivity(seed in any::<u64>(), t in 0.0f64..10.0) {
                let mut rng = StdRng::seed_from_u64(seed);
                let d = random::dynamical_params(&mut rng, 3, 2);
                let rho = random::density(&mut rng, 3);
                let evolved = opspace::expm(&schrodinger_generator(&d), t).unwrap().apply(&rho);
                prop_assert!(min_hermitian_eigenvalue(&evolved) >= -1e-9);
            }
        }
    }
}
