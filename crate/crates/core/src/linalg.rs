//! Small dense linear algebra: cyclic Jacobi for real symmetric matrices,
//! Hermitian spectra through the real symmetric embedding, and the Pauli
//! basis used by every other module.

use nalgebra::{Matrix2, Matrix3, Matrix4, SMatrix, SVector, Vector3};
use num_complex::Complex64;

pub type CMatrix2 = Matrix2<Complex64>;
pub type CMatrix4 = Matrix4<Complex64>;

/// Off-diagonal threshold for the 8×8 embedding of a 4×4 Hermitian matrix.
pub const HERMITIAN_OFFDIAG_TOL: f64 = 1e-14;
pub const HERMITIAN_MAX_SWEEPS: usize = 100;
/// Off-diagonal threshold for 3×3 real symmetric problems.
pub const SYM3_OFFDIAG_TOL: f64 = 1e-15;
pub const SYM3_MAX_SWEEPS: usize = 30;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Result of a symmetric eigensolve. Eigenvalues ascending, eigenvectors
/// stored as the matching columns.
#[derive(Clone, Debug)]
pub struct SymEigen<const N: usize> {
    pub values: SVector<f64, N>,
    pub vectors: SMatrix<f64, N, N>,
    pub sweeps: usize,
}

/// Cyclic Jacobi eigensolver.
///
/// Sweeps over all (p, q) pairs in row order, annihilating each
/// off-diagonal entry with a Givens rotation, until the largest remaining
/// off-diagonal magnitude drops below `tol` or `max_sweeps` is reached.
/// The input is symmetrized as `(a + aᵗ)/2` before rotating.
pub fn jacobi_eigh<const N: usize>(
    a: &SMatrix<f64, N, N>,
    tol: f64,
    max_sweeps: usize,
) -> SymEigen<N> {
    let mut m = (a + a.transpose()) * 0.5;
    let mut v = SMatrix::<f64, N, N>::identity();
    let mut sweeps = 0;

    while sweeps < max_sweeps {
        let mut off = 0.0f64;
        for p in 0..N {
            for q in (p + 1)..N {
                off = off.max(m[(p, q)].abs());
            }
        }
        if off < tol {
            break;
        }
        sweeps += 1;
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..N {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..N {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;

                for k in 0..N {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = SVector::<f64, N>::from_fn(|i, _| m[(order[i], order[i])]);
    let vectors = SMatrix::<f64, N, N>::from_fn(|r, c| v[(r, order[c])]);
    SymEigen {
        values,
        vectors,
        sweeps,
    }
}

/// Symmetric 3×3 eigensolve at the module's fixed tolerance.
pub fn eigh3(a: &Matrix3<f64>) -> SymEigen<3> {
    jacobi_eigh(a, SYM3_OFFDIAG_TOL, SYM3_MAX_SWEEPS)
}

/// Eigenvalues (ascending) of a 4×4 Hermitian matrix.
///
/// `H = A + iB` is embedded as the real symmetric `[[A, -B], [B, A]]`,
/// whose spectrum is that of `H` with every eigenvalue doubled.
pub fn hermitian_eigenvalues(h: &CMatrix4) -> [f64; 4] {
    let emb = SMatrix::<f64, 8, 8>::from_fn(|r, c| {
        let (i, j) = (r % 4, c % 4);
        let z = h[(i, j)];
        match (r < 4, c < 4) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let eig = jacobi_eigh(&emb, HERMITIAN_OFFDIAG_TOL, HERMITIAN_MAX_SWEEPS);
    // Pairs are degenerate; the average of each pair absorbs rotation noise.
    let v = eig.values;
    [
        0.5 * (v[0] + v[1]),
        0.5 * (v[2] + v[3]),
        0.5 * (v[4] + v[5]),
        0.5 * (v[6] + v[7]),
    ]
}

/// σ_x, σ_y, σ_z in that order.
pub fn paulis() -> [CMatrix2; 3] {
    [
        Matrix2::new(ZERO, ONE, ONE, ZERO),
        Matrix2::new(ZERO, -I, I, ZERO),
        Matrix2::new(ONE, ZERO, ZERO, -ONE),
    ]
}

pub fn identity2() -> CMatrix2 {
    CMatrix2::identity()
}

/// `A ⊗ B` with the first factor on the most significant qubit.
pub fn kron2(a: &CMatrix2, b: &CMatrix2) -> CMatrix4 {
    CMatrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// Frobenius norm of a complex 4×4 matrix.
pub fn frobenius(m: &CMatrix4) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entrywise modulus of `m - m†`.
pub fn hermiticity_defect(m: &CMatrix4) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..4 {
        for c in 0..4 {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// `‖U†U − I‖_F` for a 2×2 complex matrix.
pub fn unitarity_defect(u: &CMatrix2) -> f64 {
    (u.adjoint() * u - CMatrix2::identity())
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Outer product `a bᵗ`.
pub fn outer(a: &Vector3<f64>, b: &Vector3<f64>) -> Matrix3<f64> {
    a * b.transpose()
}
