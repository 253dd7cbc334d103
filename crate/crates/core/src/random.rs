//! Seeded random instances for tests, property checks and benchmarks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::TangentVector;
use crate::lindblad::{DynamicalParams, ErgodicPoint};
use crate::opspace::{c, CMatrix, CVector, ONE};

/// Square matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = ginibre(rng, d);
    (&g + g.adjoint()).scale(0.5)
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let qr = ginibre(rng, d).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { ONE };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Full-rank density matrix `G G* / tr[G G*]`.
pub fn density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = ginibre(rng, d);
    let m = &g * g.adjoint();
    let tr = m.trace();
    m / tr
}

/// Unit vector with complex Gaussian amplitudes.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CVector {
    let v = CVector::from_fn(d, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let n = v.norm();
    v / c(n, 0.0)
}

pub fn dynamical_params<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> DynamicalParams {
    let h = hermitian(rng, d);
    let l = (0..k).map(|_| ginibre(rng, d).scale(0.7)).collect();
    DynamicalParams::new(h, l).expect("random parameters are valid")
}

/// Draws random parameters until the result is ergodic with spectral gap above 0.05.
pub fn ergodic_point<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> ErgodicPoint {
    loop {
        if let Ok(p) = ErgodicPoint::new(dynamical_params(rng, d, k)) {
            if p.spectral_gap() > 0.05 {
                return p;
            }
        }
    }
}

pub fn tangent<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> TangentVector {
    let dh = hermitian(rng, d);
    let dl = (0..k).map(|_| ginibre(rng, d)).collect();
    TangentVector::new(dh, dl).expect("random tangent is valid")
}

pub fn real_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}
