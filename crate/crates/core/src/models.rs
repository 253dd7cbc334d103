//! Preset model families with closed-form reference values: the driven,
//! damped two-level system and three one-parameter families.

use crate::covariance::QfiConvention;
use crate::error::{Error, Result};
use crate::geometry::{LieAlgebraElement, TangentVector};
use crate::lan::LocalChart;
use crate::lindblad::{DynamicalParams, ErgodicPoint};
use crate::opspace::{
    c, commutator, identity, matrix_unit, sigma_x, sigma_y, sigma_z, CMatrix, C64, I, ZERO,
};

/// Parameters `(α, Δ, Ω, θ)` and auxiliary `v = (v₀, v₁, v₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelParams {
    /// Square root of the emission rate, `α > 0`.
    pub alpha: f64,
    /// Detuning.
    pub delta: f64,
    /// Rabi frequency.
    pub omega: f64,
    /// Phase of the emitted field.
    pub theta: f64,
    pub v: [f64; 3],
}

impl TwoLevelParams {
    pub fn new(alpha: f64, delta: f64, omega: f64, theta: f64) -> Self {
        Self {
            alpha,
            delta,
            omega,
            theta,
            v: [0.0; 3],
        }
    }

    pub fn with_aux(mut self, v: [f64; 3]) -> Self {
        self.v = v;
        self
    }

    pub fn gamma(&self) -> f64 {
        let (a, dl, om) = (self.alpha, self.delta, self.omega);
        a.powi(4) + 4.0 * dl * dl + 2.0 * om * om
    }

    pub fn xi(&self) -> C64 {
        c(2.0 * self.delta, self.alpha * self.alpha)
    }

    fn phase(&self) -> C64 {
        c(0.0, self.theta).exp()
    }
}

/// `H = ½[[Δ, Ω+v₁−iv₂], [Ω+v₁+iv₂, −Δ+2v₀]]`,
/// `L = αe^{iθ}[[(iv₁−v₂)/α², 1+iv₀/α²], [0, (−iv₁+v₂)/α²]]`.
pub fn two_level(p: &TwoLevelParams) -> Result<DynamicalParams> {
    if !(p.alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be positive, got {}",
            p.alpha
        )));
    }
    let [v0, v1, v2] = p.v;
    let a2 = p.alpha * p.alpha;
    let h = CMatrix::from_row_slice(
        2,
        2,
        &[
            c(p.delta, 0.0),
            c(p.omega + v1, -v2),
            c(p.omega + v1, v2),
            c(-p.delta + 2.0 * v0, 0.0),
        ],
    )
    .scale(0.5);
    let diag = c(-v2, v1) / a2;
    let l = CMatrix::from_row_slice(2, 2, &[diag, c(1.0, v0 / a2), ZERO, -diag])
        * (p.phase() * p.alpha);
    DynamicalParams::new(h, vec![l])
}

/// Closed-form values at a physical point (`v = 0`).
#[derive(Debug, Clone)]
pub struct TwoLevelReference {
    pub gamma: f64,
    pub xi: C64,
    pub rho_ss: CMatrix,
    /// `(f_Δ, f_Ω, f_α, f_θ)`, metric convention.
    pub fisher: [f64; 4],
    /// `ω(Ḋ_Δ), ω(Ḋ_Ω), ω(Ḋ_α), ω(Ḋ_θ)`.
    pub connection_components: [LieAlgebraElement; 4],
    /// Diagonal of the metric in the canonical basis, metric convention.
    pub symplectic_f: [f64; 4],
}

/// `(K, r)` with `K = f·id + ½w·σ` centered against `rho`.
fn lie_element(rho: &CMatrix, w: [f64; 3], r: f64) -> LieAlgebraElement {
    let k = (sigma_x().scale(w[0]) + sigma_y().scale(w[1]) + sigma_z().scale(w[2])).scale(0.5);
    LieAlgebraElement::with_state(rho, k, r).expect("Pauli combination is Hermitian")
}

pub fn two_level_reference(p: &TwoLevelParams) -> TwoLevelReference {
    let (a, dl, om) = (p.alpha, p.delta, p.omega);
    let a2 = a * a;
    let a4 = a2 * a2;
    let g = p.gamma();
    let xi = p.xi();
    let xi2 = xi.norm_sqr();
    let rho_ss = CMatrix::from_row_slice(2, 2, &[c(g / om - om, 0.0), xi, xi.conj(), c(om, 0.0)])
        * c(om / g, 0.0);

    let g3 = g.powi(3);
    let om2 = om * om;
    let f_delta = 2.0 * om2 * xi2 * (2.0 * a4 + om2) / (a2 * g3);
    let f_omega = (a4.powi(3)
        + a4 * a4 * (8.0 * dl * dl + 6.0 * om2)
        + 4.0 * a4 * (4.0 * dl.powi(4) - 2.0 * dl * dl * om2 + 3.0 * om2 * om2)
        + 8.0 * om2.powi(3))
        / (a2 * g3);
    let f_alpha = om2 / g;
    let f_theta = a2 * om2 * (-2.0 * om2 * (a4 - 12.0 * dl * dl) + xi2 * xi2 + 4.0 * om2 * om2) / g3;

    let w_delta = [-4.0 * dl * om / (g * a2), -2.0 * om / g, -xi2 / (g * a2)];
    let w_omega = [
        -2.0 * (a4 + 2.0 * om2) / (g * a2),
        4.0 * dl / g,
        -4.0 * dl * om / (g * a2),
    ];
    let w_theta = [-4.0 * dl * om / g, -2.0 * a2 * om / g, -xi2 / g];
    let connection_components = [
        lie_element(&rho_ss, w_delta, xi2 / (2.0 * g)),
        lie_element(&rho_ss, w_omega, 2.0 * dl * om / g),
        lie_element(&rho_ss, [0.0; 3], 0.0),
        lie_element(&rho_ss, w_theta, -a2 * om2 / g),
    ];

    TwoLevelReference {
        gamma: g,
        xi,
        rho_ss,
        fisher: [f_delta, f_omega, f_alpha, f_theta],
        connection_components,
        symplectic_f: [
            om2 / (a2 * g),
            a2 * g / om2,
            2.0 * om2 * om2 / (a2 * g),
            a2 * g / (2.0 * om2 * om2),
        ],
    }
}

/// Tangent vectors of the two-level family at a physical point.
#[derive(Debug, Clone)]
pub struct TwoLevelTangents {
    /// `Ḋ_Δ, Ḋ_Ω, Ḋ_α, Ḋ_θ`.
    pub physical: [TangentVector; 4],
    /// Gauge directions generated by `σ_x`, `σ_y`, `σ_z` and the phase.
    pub vertical: [TangentVector; 4],
    /// `∂/∂v₀, ∂/∂v₁, ∂/∂v₂` followed by `(0, e^{iθ}E₀₁/α)`.
    pub auxiliary: [TangentVector; 4],
}

fn tv(dh: CMatrix, dl: CMatrix) -> TangentVector {
    TangentVector::new(dh, vec![dl]).expect("two-level tangent is valid")
}

pub fn two_level_tangents(p: &TwoLevelParams) -> TwoLevelTangents {
    let (a, dl, om) = (p.alpha, p.delta, p.omega);
    let e = p.phase();
    let e01 = matrix_unit(2, 0, 1);
    let zero = CMatrix::zeros(2, 2);
    let physical = [
        tv(sigma_z().scale(0.5), zero.clone()),
        tv(sigma_x().scale(0.5), zero.clone()),
        tv(zero.clone(), &e01 * e),
        tv(zero.clone(), &e01 * (I * e * a)),
    ];
    let vertical = [
        tv(sigma_y().scale(-dl), sigma_z() * (I * e * a)),
        tv(sigma_x().scale(dl) - sigma_z().scale(om), sigma_z() * (-e * a)),
        tv(sigma_y().scale(om), &e01 * (I * e * (-2.0 * a))),
        tv(identity(2), zero.clone()),
    ];
    let auxiliary = [
        tv(matrix_unit(2, 1, 1), &e01 * (I * e / a)),
        tv(sigma_x().scale(0.5), sigma_z() * (I * e / a)),
        tv(sigma_y().scale(0.5), sigma_z() * (-e / a)),
        tv(zero, &e01 * (e / a)),
    ];
    TwoLevelTangents {
        physical,
        vertical,
        auxiliary,
    }
}

/// Canonical basis `(q₁, p₁, q₂, p₂)` of the four-dimensional identifiable
/// block containing the horizontal projections of the physical tangents.
pub fn two_level_symplectic_basis(p: &TwoLevelParams) -> [TangentVector; 4] {
    let (a, dl, om) = (p.alpha, p.delta, p.omega);
    let a2 = a * a;
    let g = p.gamma();
    let xi = p.xi();
    let e = p.phase();
    let e01 = matrix_unit(2, 0, 1);
    let block = CMatrix::from_row_slice(2, 2, &[c(-om, 0.0), xi, ZERO, c(om, 0.0)]);
    let over_ia = e / (I * a);

    let q1 = tv(CMatrix::zeros(2, 2), &e01 * (e / a));
    let s1 = a2 * g / (om * om);
    let p1 = tv(matrix_unit(2, 1, 1).scale(-s1), &e01 * (over_ia * s1));
    let q2 = tv(
        CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -om / 2.0), c(0.0, om / 2.0), c(a2, 0.0)]),
        &block * (e / a),
    );
    let s2 = a2 * g / (2.0 * om.powi(4));
    let p2 = tv(
        CMatrix::from_row_slice(2, 2, &[ZERO, c(om / 2.0, 0.0), c(om / 2.0, 0.0), c(-2.0 * dl, 0.0)])
            .scale(s2),
        &block * (over_ia * s2),
    );
    [q1, p1, q2, p2]
}

/// Coordinates of `P(Ḋ_Δ), P(Ḋ_Ω), P(Ḋ_α), P(Ḋ_θ)` in the canonical basis.
pub fn two_level_projection_coordinates(p: &TwoLevelParams) -> [[f64; 4]; 4] {
    let (a, dl, om) = (p.alpha, p.delta, p.omega);
    let a4 = a.powi(4);
    let g = p.gamma();
    let om2 = om * om;
    let om4 = om2 * om2;
    let ga2 = (g * a).powi(2);
    [
        [
            -4.0 * a4 * g * dl / ga2,
            2.0 * a4 * om2 / ga2,
            a4 * g / ga2,
            4.0 * dl * om4 / ga2,
        ],
        [
            -a4 * g * (g - 8.0 * dl * dl) / (ga2 * om),
            -4.0 * a4 * dl * om2 / (ga2 * om),
            -2.0 * a4 * dl * g / (ga2 * om),
            2.0 * om4 * (a4 + 2.0 * om2) / (ga2 * om),
        ],
        [a, 0.0, 0.0, 0.0],
        [
            -4.0 * g * a4 * dl / (g * g),
            om2 * (2.0 * a4 - g) / (g * g),
            a4 * g / (g * g),
            4.0 * dl * om4 / (g * g),
        ],
    ]
}

/// Linear-horizontal chart along `P(Ḋ_Δ), P(Ḋ_Ω), P(Ḋ_α), P(Ḋ_θ)`.
pub fn two_level_chart(p: &TwoLevelParams) -> Result<LocalChart> {
    let point = ErgodicPoint::new(two_level(p)?)?;
    LocalChart::linear_horizontal(point, &two_level_tangents(p).physical)
}

/// The three one-parameter families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OneParamKind {
    /// `D_θ = (H, e^{−iθ}Lⁱ)`, nominal `θ = 0`, tangent `(0, iLⁱ)`.
    Phase,
    /// `D_θ = (H, θLⁱ)`, nominal `θ = 1`, tangent `(0, Lⁱ)`.
    Coupling,
    /// `D_θ = (θH, Lⁱ)`, nominal `θ = 1`, tangent `(H, 0)`.
    Hamiltonian,
}

impl OneParamKind {
    pub fn name(self) -> &'static str {
        match self {
            OneParamKind::Phase => "phase",
            OneParamKind::Coupling => "coupling",
            OneParamKind::Hamiltonian => "hamiltonian",
        }
    }
}

/// A one-parameter family through a base parameter with its closed-form QFI rate.
#[derive(Debug, Clone)]
pub struct OneParamModel {
    pub kind: OneParamKind,
    pub base: DynamicalParams,
}

impl OneParamModel {
    pub fn new(kind: OneParamKind, base: DynamicalParams) -> Self {
        Self { kind, base }
    }

    pub fn nominal(&self) -> f64 {
        match self.kind {
            OneParamKind::Phase => 0.0,
            OneParamKind::Coupling | OneParamKind::Hamiltonian => 1.0,
        }
    }

    pub fn params_at(&self, theta: f64) -> DynamicalParams {
        let b = &self.base;
        match self.kind {
            OneParamKind::Phase => {
                let ph = c(0.0, -theta).exp();
                DynamicalParams::from_parts(b.h().clone(), b.l().iter().map(|l| l * ph).collect())
            }
            OneParamKind::Coupling => DynamicalParams::from_parts(
                b.h().clone(),
                b.l().iter().map(|l| l.scale(theta)).collect(),
            ),
            OneParamKind::Hamiltonian => {
                DynamicalParams::from_parts(b.h().scale(theta), b.l().to_vec())
            }
        }
    }

    pub fn tangent(&self) -> TangentVector {
        let b = &self.base;
        let d = b.dim();
        match self.kind {
            OneParamKind::Phase => TangentVector::from_parts(
                CMatrix::zeros(d, d),
                b.l().iter().map(|l| l * I).collect(),
            ),
            OneParamKind::Coupling => TangentVector::from_parts(CMatrix::zeros(d, d), b.l().to_vec()),
            OneParamKind::Hamiltonian => {
                TangentVector::from_parts(b.h().clone(), vec![CMatrix::zeros(d, d); b.channels()])
            }
        }
    }

    /// Closed-form QFI rate at the base point, metric convention.
    ///
    /// Phase: `Σ tr[ρ Aⁱ*Aⁱ]`, `Aⁱ = Lⁱ + [Lⁱ, 𝕎⁻¹(ΣL*L − ⟨ΣL*L⟩)]`.
    /// Coupling: `tr[ρ ΣL*L]`.
    /// Hamiltonian: `Σ tr[ρ |[Lⁱ, 𝕎⁻¹(H − ⟨H⟩)]|²]`.
    pub fn closed_form_qfi(&self, point: &ErgodicPoint) -> f64 {
        let ls = point.params().l();
        let sq = |a: &CMatrix| point.mean(&(a.adjoint() * a)).re;
        match self.kind {
            OneParamKind::Phase => {
                let k = point.inverse_centered(&point.params().jump_sum());
                ls.iter().map(|l| sq(&(l + commutator(l, &k)))).sum()
            }
            OneParamKind::Coupling => point.mean(&point.params().jump_sum()).re,
            OneParamKind::Hamiltonian => {
                let k = point.inverse_centered(point.params().h());
                ls.iter().map(|l| sq(&commutator(l, &k))).sum()
            }
        }
    }

    /// Convention under which [`Self::closed_form_qfi`] is stated.
    pub fn convention(&self) -> QfiConvention {
        QfiConvention::Metric
    }
}

/// Phase, coupling and Hamiltonian-multiplier families through `base`.
pub fn one_param_presets(base: &DynamicalParams) -> [OneParamModel; 3] {
    [
        OneParamModel::new(OneParamKind::Phase, base.clone()),
        OneParamModel::new(OneParamKind::Coupling, base.clone()),
        OneParamModel::new(OneParamKind::Hamiltonian, base.clone()),
    ]
}
