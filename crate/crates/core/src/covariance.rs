//! Markov covariance of fluctuation operators, the projection `R_D`, the
//! quantum Fisher information rate and a finite-time quadrature oracle.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{e_map, TangentVector};
use crate::lindblad::{DynamicalParams, ErgodicPoint};
use crate::opspace::{self, c, commutator, trace, CMatrix, CVector, C64, I, ZERO};

/// `X = (X⁰, X¹, …, Xᵏ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTuple {
    pub x0: CMatrix,
    pub xi: Vec<CMatrix>,
}

impl OperatorTuple {
    pub fn new(x0: CMatrix, xi: Vec<CMatrix>) -> Result<Self> {
        let d = x0.nrows();
        if x0.ncols() != d || xi.iter().any(|m| m.shape() != (d, d)) {
            return Err(Error::DimensionMismatch {
                context: "operator tuple",
                expected: d,
                found: xi.iter().map(|m| m.nrows()).find(|&n| n != d).unwrap_or(x0.ncols()),
            });
        }
        if !opspace::is_finite(&x0) || !xi.iter().all(opspace::is_finite) {
            return Err(Error::NonFinite {
                what: "operator tuple",
            });
        }
        Ok(Self { x0, xi })
    }

    pub fn zero(d: usize, k: usize) -> Self {
        Self {
            x0: CMatrix::zeros(d, d),
            xi: vec![CMatrix::zeros(d, d); k],
        }
    }

    pub fn dim(&self) -> usize {
        self.x0.nrows()
    }

    pub fn channels(&self) -> usize {
        self.xi.len()
    }

    pub fn sub(&self, other: &OperatorTuple) -> OperatorTuple {
        OperatorTuple {
            x0: &self.x0 - &other.x0,
            xi: self.xi.iter().zip(&other.xi).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> OperatorTuple {
        OperatorTuple {
            x0: &self.x0 * s,
            xi: self.xi.iter().map(|m| m * s).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        (self.x0.norm_squared() + self.xi.iter().map(|m| m.norm_squared()).sum::<f64>()).sqrt()
    }

    fn check_against(&self, d: &DynamicalParams) -> Result<()> {
        if self.dim() != d.dim() || self.channels() != d.channels() {
            return Err(Error::DimensionMismatch {
                context: "operator tuple shape",
                expected: d.dim(),
                found: self.dim(),
            });
        }
        Ok(())
    }
}

/// Normalization of the Fisher information rate: `four_x` is `4 Re(·,·)_D`,
/// `metric` is `Re(·,·)_D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QfiConvention {
    FourX,
    Metric,
}

impl QfiConvention {
    pub fn factor(self) -> f64 {
        match self {
            QfiConvention::FourX => 4.0,
            QfiConvention::Metric => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QfiConvention::FourX => "four_x",
            QfiConvention::Metric => "metric",
        }
    }
}

impl fmt::Display for QfiConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QfiConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "four_x" => Ok(QfiConvention::FourX),
            "metric" => Ok(QfiConvention::Metric),
            other => Err(Error::InvalidArgument(format!(
                "unknown convention {other:?}, expected four_x or metric"
            ))),
        }
    }
}

/// Real symmetric QFI rate matrix stamped with its convention.
#[derive(Debug, Clone, PartialEq)]
pub struct QfiMatrix {
    pub matrix: DMatrix<f64>,
    pub convention: QfiConvention,
}

impl QfiMatrix {
    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

/// `C_D(X) = X − tr[ρ_ss X]·id`.
pub fn centering(point: &ErgodicPoint, x0: &CMatrix) -> CMatrix {
    point.center(x0)
}

/// `𝐗_D(Ḋ) = (E_D(Ḋ), L̇¹, …, L̇ᵏ)`.
pub fn x_map(d: &DynamicalParams, t: &TangentVector) -> Result<OperatorTuple> {
    Ok(OperatorTuple {
        x0: e_map(d, t)?,
        xi: t.dl().to_vec(),
    })
}

/// `ℒ_D(K) = (𝕎(K), i[L¹,K], …, i[Lᵏ,K])`.
pub fn l_map(point: &ErgodicPoint, k: &CMatrix) -> Result<OperatorTuple> {
    if k.shape() != (point.dim(), point.dim()) {
        return Err(Error::DimensionMismatch {
            context: "l_map operand",
            expected: point.dim(),
            found: k.nrows(),
        });
    }
    Ok(OperatorTuple {
        x0: point.generator().apply(k),
        xi: point
            .params()
            .l()
            .iter()
            .map(|li| commutator(li, k) * I)
            .collect(),
    })
}

/// `R_D(X) = (C(X⁰), X¹, …, Xᵏ) − ℒ_D ∘ 𝕎⁻¹ ∘ C(X⁰)`.
pub fn r_projection(point: &ErgodicPoint, x: &OperatorTuple) -> Result<OperatorTuple> {
    x.check_against(point.params())?;
    let k = point.inverse_centered(&x.x0);
    let lk = l_map(point, &k)?;
    let d = point.dim();
    Ok(OperatorTuple {
        // C(X⁰) − 𝕎𝕎⁻¹C(X⁰) vanishes identically
        x0: CMatrix::zeros(d, d),
        xi: x.xi.iter().zip(&lk.xi).map(|(a, b)| a - b).collect(),
    })
}

/// `(X, Y)_D = Σ tr[ρ_ss R(X)ⁱ* R(Y)ⁱ]`.
pub fn markov_covariance(point: &ErgodicPoint, x: &OperatorTuple, y: &OperatorTuple) -> Result<C64> {
    let rx = r_projection(point, x)?;
    let ry = r_projection(point, y)?;
    Ok(rx
        .xi
        .iter()
        .zip(&ry.xi)
        .map(|(a, b)| trace(&(point.rho() * a.adjoint() * b)))
        .sum())
}

/// The same covariance written out with commutators, without forming `R_D`:
/// with `a = 𝕎⁻¹C(X⁰)`, `b = 𝕎⁻¹C(Y⁰)`,
/// `Σ⟨Xⁱ*Yⁱ⟩ − ⟨X⁰*b⟩ − ⟨a*Y⁰⟩ − iΣ⟨Xⁱ*[Lⁱ,b]⟩ + iΣ⟨[Lⁱ,a]*Yⁱ⟩`.
pub fn markov_covariance_expanded(
    point: &ErgodicPoint,
    x: &OperatorTuple,
    y: &OperatorTuple,
) -> Result<C64> {
    x.check_against(point.params())?;
    y.check_against(point.params())?;
    let mean = |m: CMatrix| trace(&(point.rho() * m));
    let x0 = point.center(&x.x0);
    let y0 = point.center(&y.x0);
    let a = point.inverse_unchecked(&x0);
    let b = point.inverse_unchecked(&y0);
    let mut acc = -mean(x0.adjoint() * &b) - mean(a.adjoint() * &y0);
    for ((xi, yi), li) in x.xi.iter().zip(&y.xi).zip(point.params().l()) {
        acc += mean(xi.adjoint() * yi);
        acc -= I * mean(xi.adjoint() * commutator(li, &b));
        acc += I * mean(commutator(li, &a).adjoint() * yi);
    }
    Ok(acc)
}

/// Finite-time covariance `⟨𝔽_t(X)* 𝔽_t(Y)⟩` in the state `φ ⊗ vacuum`,
/// reduced to system-space semigroup integrals:
///
/// `(1/t)[⟨A_t(ΣXⁱ*Yⁱ)⟩ + ∫₀ᵗ⟨A_{t−q} Φ_X T_q(Y⁰)⟩dq + conj(X ↔ Y)]`
///
/// with `A_τ = ∫₀^τ T_r dr`, `Φ_X(B) = X⁰*B − iΣXⁱ*[B, Lⁱ]` and `⟨·⟩ = ⟨φ|·|φ⟩`.
/// The outer integral uses composite Simpson on `quad_steps` intervals
/// (rounded up to even). `X⁰`, `Y⁰` are centered first. `phi` defaults to
/// the leading eigenvector of `ρ_ss`.
pub fn finite_time_covariance(
    point: &ErgodicPoint,
    x: &OperatorTuple,
    y: &OperatorTuple,
    t: f64,
    quad_steps: usize,
    phi: Option<&CVector>,
) -> Result<C64> {
    if quad_steps < 4 {
        return Err(Error::InvalidArgument(format!(
            "quad_steps must be at least 4, got {quad_steps}"
        )));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
    }
    x.check_against(point.params())?;
    y.check_against(point.params())?;
    let d = point.dim();
    let phi = match phi {
        Some(v) => {
            if v.len() != d || v.norm() == 0.0 {
                return Err(Error::InvalidArgument("phi must be a nonzero d-vector".into()));
            }
            v / c(v.norm(), 0.0)
        }
        None => point.leading_vector(),
    };
    let n = quad_steps + quad_steps % 2;
    let h = t / n as f64;

    // exp(h[[𝕎, I], [0, 0]]) = [[T_h, A_h], [0, I]]
    let gen = point.generator().matrix();
    let m = d * d;
    let mut block = CMatrix::zeros(2 * m, 2 * m);
    block.view_mut((0, 0), (m, m)).copy_from(&(gen * c(h, 0.0)));
    for i in 0..m {
        block[(i, m + i)] = c(h, 0.0);
    }
    let expd = block.exp();
    let step = expd.view((0, 0), (m, m)).into_owned();
    let a_step = expd.view((0, m), (m, m)).into_owned();
    // Schrödinger-picture duals act on the projector P_φ
    let step_dual = opspace::Superoperator::new(d, step.clone())?.trace_dual();
    let a_dual = opspace::Superoperator::new(d, a_step)?.trace_dual();

    // sigma[j] = A_{jh,*}(P_φ), so ⟨φ|A_{jh}(Z)|φ⟩ = tr[sigma[j] Z]
    let proj = &phi * phi.adjoint();
    let mut sigma = Vec::with_capacity(n + 1);
    sigma.push(CMatrix::zeros(d, d));
    let mut evolved = proj;
    for j in 1..=n {
        let next = &sigma[j - 1] + a_dual.apply(&evolved);
        sigma.push(next);
        evolved = step_dual.apply(&evolved);
    }

    let step_op = opspace::Superoperator::new(d, step)?;
    let ls = point.params().l();
    let phi_map = |z: &OperatorTuple, b: &CMatrix| -> CMatrix {
        let mut out = z.x0.adjoint() * b;
        for (zi, li) in z.xi.iter().zip(ls) {
            out -= zi.adjoint() * commutator(b, li) * I;
        }
        out
    };
    let cross = |left: &OperatorTuple, right: &OperatorTuple| -> C64 {
        let mut cur = right.x0.clone();
        let mut acc = ZERO;
        for j in 0..=n {
            let w = if j == 0 || j == n {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += trace(&(&sigma[n - j] * phi_map(left, &cur))) * w;
            cur = step_op.apply(&cur);
        }
        acc * (h / 3.0)
    };

    let xc = OperatorTuple {
        x0: point.center(&x.x0),
        xi: x.xi.clone(),
    };
    let yc = OperatorTuple {
        x0: point.center(&y.x0),
        xi: y.xi.clone(),
    };
    let mut ito = CMatrix::zeros(d, d);
    for (xi, yi) in xc.xi.iter().zip(&yc.xi) {
        ito += xi.adjoint() * yi;
    }
    let total = trace(&(&sigma[n] * ito)) + cross(&xc, &yc) + cross(&yc, &xc).conj();
    Ok(total / t)
}

/// `f_ab = c·Re(𝐗[Ḋ_a], 𝐗[Ḋ_b])_D` with `c = 4` (`four_x`) or `1` (`metric`).
pub fn qfi_rate(
    point: &ErgodicPoint,
    tangents: &[TangentVector],
    convention: QfiConvention,
) -> Result<QfiMatrix> {
    let rs = tangents
        .iter()
        .map(|t| r_projection(point, &x_map(point.params(), t)?))
        .collect::<Result<Vec<_>>>()?;
    let m = tangents.len();
    let mut f = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            let v: f64 = rs[a]
                .xi
                .iter()
                .zip(&rs[b].xi)
                .map(|(p, q)| trace(&(point.rho() * p.adjoint() * q)).re)
                .sum();
            f[(a, b)] = convention.factor() * v;
            f[(b, a)] = f[(a, b)];
        }
    }
    Ok(QfiMatrix {
        matrix: f,
        convention,
    })
}
