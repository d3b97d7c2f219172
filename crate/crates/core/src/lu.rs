//! Local unitaries `U ⊗ V`, the explicit ρ* ↔ σ witness, and an
//! LU-invariant fingerprint.

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix2, CMatrix4};
use crate::qstate::{make_named, to_bloch, DensityMatrix, NamedState};
use crate::separability::t_singular_values;

pub const UNITARY_TOL: f64 = 1e-10;
pub const EQUIVALENCE_TOL: f64 = 1e-10;
/// Residual below which the angle search reports two states as equivalent.
pub const SEARCH_TOL: f64 = 1e-6;
const DET_ZERO_TOL: f64 = 1e-12;

/// Quantities preserved by every `U ⊗ V`. Necessary, not sufficient, for
/// LU equivalence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LUFingerprint {
    pub x_norm: f64,
    pub y_norm: f64,
    pub t_singulars: [f64; 3],
    pub t_det_sign: i8,
}

impl LUFingerprint {
    /// Componentwise comparison; the determinant sign must match exactly.
    pub fn approx_eq(&self, other: &LUFingerprint, tol: f64) -> bool {
        self.t_det_sign == other.t_det_sign
            && (self.x_norm - other.x_norm).abs() <= tol
            && (self.y_norm - other.y_norm).abs() <= tol
            && self
                .t_singulars
                .iter()
                .zip(other.t_singulars.iter())
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

pub fn apply_local_unitary(
    rho: &DensityMatrix,
    u: &CMatrix2,
    v: &CMatrix2,
) -> Result<DensityMatrix> {
    for (which, m) in [("U", u), ("V", v)] {
        let defect = linalg::unitarity_defect(m);
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary { which, defect });
        }
    }
    let w = linalg::kron2(u, v);
    Ok(DensityMatrix::from_matrix_unchecked(
        w * rho.matrix() * w.adjoint(),
    ))
}

fn real2(a: f64, b: f64, c: f64, d: f64) -> CMatrix2 {
    Matrix2::new(a.into(), b.into(), c.into(), d.into())
}

/// The local unitaries exactly as printed alongside the σ ↔ ρ* claim.
///
/// These do not map ρ* onto σ; see [`corrected_witness`].
pub fn printed_witness() -> (CMatrix2, CMatrix2) {
    let s2 = std::f64::consts::SQRT_2;
    let np = (4.0 + 2.0 * s2).sqrt();
    let nm = (4.0 - 2.0 * s2).sqrt();
    let u = real2((1.0 + s2) / np, (1.0 - s2) / nm, 1.0 / np, 1.0 / nm);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v = real2(h, h, h, -h);
    (u, v)
}

/// The printed `U` with `V` replaced by `σ_x V`. The printed pair lands on
/// `(I ⊗ σ_x) σ (I ⊗ σ_x)`, so one extra bit flip on qubit B is needed.
pub fn corrected_witness() -> (CMatrix2, CMatrix2) {
    let (u, v) = printed_witness();
    let sx = linalg::paulis()[0];
    (u, sx * v)
}

/// `‖(U⊗V) ρ (U⊗V)† − target‖_F`.
pub fn equivalence_residual(
    rho: &DensityMatrix,
    target: &DensityMatrix,
    u: &CMatrix2,
    v: &CMatrix2,
) -> Result<f64> {
    Ok(apply_local_unitary(rho, u, v)?.distance(target))
}

fn rho_sigma_with(u: &CMatrix2, v: &CMatrix2) -> (bool, f64) {
    let rho = make_named(&NamedState::RhoStar).expect("fixed state");
    let sigma = make_named(&NamedState::SigmaStar).expect("fixed state");
    let residual = equivalence_residual(&rho, &sigma, u, v).expect("fixed unitaries");
    (residual <= EQUIVALENCE_TOL, residual)
}

/// Checks `σ = (U⊗V) ρ* (U⊗V)†` with the printed `U`, `V`.
pub fn verify_rho_sigma_equivalence() -> (bool, f64) {
    let (u, v) = printed_witness();
    rho_sigma_with(&u, &v)
}

/// Same check with [`corrected_witness`].
pub fn verify_rho_sigma_equivalence_corrected() -> (bool, f64) {
    let (u, v) = corrected_witness();
    rho_sigma_with(&u, &v)
}

pub fn lu_fingerprint(rho: &DensityMatrix) -> LUFingerprint {
    let bf = to_bloch(rho);
    let det = bf.t.determinant();
    let t_det_sign = if det.abs() <= DET_ZERO_TOL {
        0
    } else if det > 0.0 {
        1
    } else {
        -1
    };
    LUFingerprint {
        x_norm: bf.x.norm(),
        y_norm: bf.y.norm(),
        t_singulars: t_singular_values(&bf),
        t_det_sign,
    }
}

/// Haar-random 2×2 unitary: Gram–Schmidt on complex Gaussian columns.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R) -> CMatrix2 {
    let mut g = || Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let c0 = [g(), g()];
    let c1 = [g(), g()];
    let n0 = (c0[0].norm_sqr() + c0[1].norm_sqr()).sqrt();
    let e0 = [c0[0] / n0, c0[1] / n0];
    let overlap = e0[0].conj() * c1[0] + e0[1].conj() * c1[1];
    let r1 = [c1[0] - overlap * e0[0], c1[1] - overlap * e0[1]];
    let n1 = (r1[0].norm_sqr() + r1[1].norm_sqr()).sqrt();
    Matrix2::new(e0[0], r1[0] / n1, e0[1], r1[1] / n1)
}

/// `R_z(α) R_y(β) R_z(γ)`, covering SU(2) up to global phase.
pub fn su2_from_euler(alpha: f64, beta: f64, gamma: f64) -> CMatrix2 {
    let rz = |t: f64| {
        Matrix2::new(
            Complex64::from_polar(1.0, -t / 2.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::from_polar(1.0, t / 2.0),
        )
    };
    let (s, c) = (beta / 2.0).sin_cos();
    let ry = real2(c, -s, s, c);
    rz(alpha) * ry * rz(gamma)
}

#[derive(Clone, Debug)]
pub struct LuSearchOutcome {
    pub residual: f64,
    pub u: CMatrix2,
    pub v: CMatrix2,
    /// `residual ≤ SEARCH_TOL`. Heuristic: a failed search does not prove
    /// inequivalence.
    pub equivalent: bool,
}

fn euler_pair(angles: &[f64; 6]) -> (CMatrix2, CMatrix2) {
    (
        su2_from_euler(angles[0], angles[1], angles[2]),
        su2_from_euler(angles[3], angles[4], angles[5]),
    )
}

fn residual_at(from: &CMatrix4, to: &CMatrix4, angles: &[f64; 6]) -> f64 {
    let (u, v) = euler_pair(angles);
    let w = linalg::kron2(&u, &v);
    linalg::frobenius(&(w * from * w.adjoint() - to))
}

/// Bounded numerical search for `U ⊗ V` with `(U⊗V) from (U⊗V)† = to`.
///
/// A coarse grid over the six Euler angles (`grid` points each) seeds a
/// cyclic coordinate descent with step halving.
pub fn lu_search(from: &DensityMatrix, to: &DensityMatrix, grid: usize) -> LuSearchOutcome {
    use std::f64::consts::PI;
    let (f, t) = (from.matrix(), to.matrix());
    let spans = [2.0 * PI, PI, 2.0 * PI, 2.0 * PI, PI, 2.0 * PI];
    let grid = grid.max(1);

    let mut best = [0.0; 6];
    let mut best_r = residual_at(f, t, &best);
    let total = grid.pow(6);
    for idx in 0..total {
        let mut rem = idx;
        let mut angles = [0.0; 6];
        for (k, a) in angles.iter_mut().enumerate() {
            *a = spans[k] * (rem % grid) as f64 / grid as f64;
            rem /= grid;
        }
        let r = residual_at(f, t, &angles);
        if r < best_r {
            best_r = r;
            best = angles;
        }
    }

    let mut step = PI / grid as f64;
    while step > 1e-10 && best_r > 1e-14 {
        let mut improved = false;
        for k in 0..6 {
            for dir in [1.0, -1.0] {
                let mut trial = best;
                trial[k] += dir * step;
                let r = residual_at(f, t, &trial);
                if r < best_r {
                    best_r = r;
                    best = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }

    let (u, v) = euler_pair(&best);
    LuSearchOutcome {
        residual: best_r,
        u,
        v,
        equivalent: best_r <= SEARCH_TOL,
    }
}

/// Bloch-vector rotation induced by a qubit unitary: `U (n·σ) U† = (Rn)·σ`.
pub fn bloch_rotation(u: &CMatrix2) -> nalgebra::Matrix3<f64> {
    let s = linalg::paulis();
    nalgebra::Matrix3::from_fn(|i, j| 0.5 * (s[i] * u * s[j] * u.adjoint()).trace().re)
}

pub fn rotate_bloch(u: &CMatrix2, v: &Vector3<f64>) -> Vector3<f64> {
    bloch_rotation(u) * v
}
