//! Two-qubit states in matrix, Bloch `(x, y, T)` and X-parameter form.
//!
//! Basis order is |00⟩, |01⟩, |10⟩, |11⟩ with qubit A the most significant
//! factor. Pauli order is (σ_x, σ_y, σ_z).

use std::sync::OnceLock;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix2, CMatrix4};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const RANK_TOL: f64 = 1e-10;

/// `σ_i ⊗ σ_j` for i, j in 0..4, index 0 being the identity.
fn pauli_products() -> &'static [[CMatrix4; 4]; 4] {
    static PRODUCTS: OnceLock<[[CMatrix4; 4]; 4]> = OnceLock::new();
    PRODUCTS.get_or_init(|| {
        let [sx, sy, sz] = linalg::paulis();
        let basis = [linalg::identity2(), sx, sy, sz];
        std::array::from_fn(|i| std::array::from_fn(|j| linalg::kron2(&basis[i], &basis[j])))
    })
}

/// Re Tr(ρ P) without forming the product.
fn expectation(rho: &CMatrix4, p: &CMatrix4) -> f64 {
    let mut acc = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            acc += (rho[(r, c)] * p[(c, r)]).re;
        }
    }
    acc
}

/// A validated two-qubit density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix4,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity, in that order.
    pub fn from_matrix(m: CMatrix4) -> Result<Self> {
        let deviation = linalg::hermiticity_defect(&m);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = m.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::NotUnitTrace { trace: tr.re });
        }
        let min_eigenvalue = linalg::hermitian_eigenvalues(&m)[0];
        if min_eigenvalue < -PSD_TOL {
            return Err(Error::NotPsd { min_eigenvalue });
        }
        Ok(Self { m })
    }

    /// Wraps a matrix the caller already knows to be a state.
    pub(crate) fn from_matrix_unchecked(m: CMatrix4) -> Self {
        Self { m }
    }

    /// Builds from a row-major array of complex entries.
    pub fn from_rows(rows: [[Complex64; 4]; 4]) -> Result<Self> {
        Self::from_matrix(CMatrix4::from_fn(|r, c| rows[r][c]))
    }

    pub fn matrix(&self) -> &CMatrix4 {
        &self.m
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.m[(r, c)]
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        linalg::hermitian_eigenvalues(&self.m)
    }

    pub fn maximally_mixed() -> Self {
        Self::from_matrix_unchecked(CMatrix4::identity() * Complex64::new(0.25, 0.0))
    }

    /// Pure state from an (unnormalized) amplitude vector.
    pub fn pure(amplitudes: [Complex64; 4]) -> Self {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        let m = CMatrix4::from_fn(|r, c| amplitudes[r] * amplitudes[c].conj() / norm);
        Self::from_matrix_unchecked(m)
    }

    /// Frobenius distance `‖self − other‖`.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        linalg::frobenius(&(self.m - other.m))
    }

    /// Row-major `[re, im]` pairs, the JSON matrix encoding.
    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        (0..4)
            .map(|r| {
                (0..4)
                    .map(|c| [self.m[(r, c)].re, self.m[(r, c)].im])
                    .collect()
            })
            .collect()
    }
}

/// Bloch decomposition `ρ = ¼[I⊗I + xᵗσ⊗I + I⊗yᵗσ + Σ T_ij σ_i⊗σ_j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochForm {
    pub x: Vector3<f64>,
    pub y: Vector3<f64>,
    pub t: Matrix3<f64>,
}

impl BlochForm {
    pub fn new(x: Vector3<f64>, y: Vector3<f64>, t: Matrix3<f64>) -> Self {
        Self { x, y, t }
    }

    pub fn zero() -> Self {
        Self::new(Vector3::zeros(), Vector3::zeros(), Matrix3::zeros())
    }

    /// Matrix realization without positivity validation.
    pub fn to_matrix(&self) -> CMatrix4 {
        let pp = pauli_products();
        let mut m = pp[0][0];
        for i in 0..3 {
            m += pp[i + 1][0] * Complex64::new(self.x[i], 0.0);
            m += pp[0][i + 1] * Complex64::new(self.y[i], 0.0);
            for j in 0..3 {
                m += pp[i + 1][j + 1] * Complex64::new(self.t[(i, j)], 0.0);
            }
        }
        m * Complex64::new(0.25, 0.0)
    }
}

/// `x_i = Tr(ρ σ_i⊗I)`, `y_j = Tr(ρ I⊗σ_j)`, `T_ij = Tr(ρ σ_i⊗σ_j)`.
pub fn to_bloch(rho: &DensityMatrix) -> BlochForm {
    matrix_to_bloch(rho.matrix())
}

pub(crate) fn matrix_to_bloch(m: &CMatrix4) -> BlochForm {
    let pp = pauli_products();
    let x = Vector3::from_fn(|i, _| expectation(m, &pp[i + 1][0]));
    let y = Vector3::from_fn(|j, _| expectation(m, &pp[0][j + 1]));
    let t = Matrix3::from_fn(|i, j| expectation(m, &pp[i + 1][j + 1]));
    BlochForm { x, y, t }
}

pub fn from_bloch(bf: &BlochForm) -> Result<DensityMatrix> {
    DensityMatrix::from_matrix(bf.to_matrix())
}

/// Nonnegative X-state parameters
///
/// ```text
/// | a 0 0 p |
/// | 0 b q 0 |
/// | 0 q c 0 |
/// | p 0 0 d |
/// ```
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XStateParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub p: f64,
    pub q: f64,
}

impl XStateParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64, p: f64, q: f64) -> Self {
        Self { a, b, c, d, p, q }
    }

    pub fn validate(&self) -> Result<()> {
        let Self { a, b, c, d, p, q } = *self;
        for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d), ("p", p), ("q", q)] {
            if !(v >= 0.0) {
                return Err(Error::InvalidParams(format!("{name} = {v} is negative")));
            }
        }
        let sum = a + b + c + d;
        if (sum - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidParams(format!("a+b+c+d = {sum}, expected 1")));
        }
        if p * p > a * d + 1e-12 {
            return Err(Error::InvalidParams(format!(
                "p² = {} exceeds ad = {}",
                p * p,
                a * d
            )));
        }
        if q * q > b * c + 1e-12 {
            return Err(Error::InvalidParams(format!(
                "q² = {} exceeds bc = {}",
                q * q,
                b * c
            )));
        }
        Ok(())
    }

    /// Matrix of the X state; no validation.
    pub fn to_matrix(&self) -> CMatrix4 {
        x_matrix(self.a, self.b, self.c, self.d, self.p.into(), self.q.into())
    }
}

fn x_matrix(a: f64, b: f64, c: f64, d: f64, p: Complex64, q: Complex64) -> CMatrix4 {
    let mut m = CMatrix4::zeros();
    m[(0, 0)] = a.into();
    m[(1, 1)] = b.into();
    m[(2, 2)] = c.into();
    m[(3, 3)] = d.into();
    m[(0, 3)] = p;
    m[(3, 0)] = p.conj();
    m[(1, 2)] = q;
    m[(2, 1)] = q.conj();
    m
}

pub fn x_state(params: &XStateParams) -> Result<DensityMatrix> {
    params.validate()?;
    Ok(DensityMatrix::from_matrix_unchecked(params.to_matrix()))
}

/// X state with complex coherences, validated as a general matrix.
pub fn x_state_complex(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    p: Complex64,
    q: Complex64,
) -> Result<DensityMatrix> {
    DensityMatrix::from_matrix(x_matrix(a, b, c, d, p, q))
}

/// Local phase unitaries `(U_A, U_B)` that make both coherences real and
/// nonnegative: `|0⟩_k → exp(i(−θ_p + (−1)^k θ_q)/2)|0⟩_k` for k = 1, 2.
pub fn gauge_unitaries(p: Complex64, q: Complex64) -> (CMatrix2, CMatrix2) {
    let (tp, tq) = (p.arg(), q.arg());
    let phase = |k: i32| {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut u = CMatrix2::identity();
        u[(0, 0)] = Complex64::from_polar(1.0, (-tp + sign * tq) / 2.0);
        u
    };
    (phase(1), phase(2))
}

/// Strips the coherence phases, keeping the populations.
pub fn phase_gauge(a: f64, b: f64, c: f64, d: f64, p: Complex64, q: Complex64) -> XStateParams {
    XStateParams::new(a, b, c, d, p.norm(), q.norm())
}

/// Entangled pure component of the rank-two `rho_epsilon` family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntangledComponent {
    /// (|01⟩ + |10⟩)/√2
    #[default]
    PsiPlus,
    /// (|00⟩ + |11⟩)/√2
    PhiPlus,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NamedState {
    BellPhiPlus,
    BellPsiMinus,
    Werner(f64),
    RhoEpsilon(f64, EntangledComponent),
    RhoStar,
    SigmaStar,
    /// Product of two pure qubits given by Bloch vectors (norm ≤ 1).
    Product(Vector3<f64>, Vector3<f64>),
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Populations and coherence of the extremal separable X state.
pub fn rho_star_params() -> XStateParams {
    let s2 = std::f64::consts::SQRT_2;
    let hi = (2.0 + s2) / 8.0;
    let lo = (2.0 - s2) / 8.0;
    let coh = 1.0 / (4.0 * s2);
    XStateParams::new(hi, hi, lo, lo, coh, coh)
}

fn qubit(v: &Vector3<f64>) -> CMatrix2 {
    let [sx, sy, sz] = linalg::paulis();
    (linalg::identity2() + sx * c(v[0]) + sy * c(v[1]) + sz * c(v[2])) * c(0.5)
}

pub fn make_named(name: &NamedState) -> Result<DensityMatrix> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let z = c(0.0);
    match name {
        NamedState::BellPhiPlus => Ok(DensityMatrix::pure([c(r), z, z, c(r)])),
        NamedState::BellPsiMinus => Ok(DensityMatrix::pure([z, c(r), c(-r), z])),
        NamedState::Werner(p) => {
            check_range("p", *p, 0.0, 1.0)?;
            let singlet = make_named(&NamedState::BellPsiMinus)?;
            let m = singlet.matrix() * c(*p) + CMatrix4::identity() * c((1.0 - p) / 4.0);
            Ok(DensityMatrix::from_matrix_unchecked(m))
        }
        NamedState::RhoEpsilon(eps, component) => {
            check_range("epsilon", *eps, 0.0, 0.75)?;
            let w = 0.5 + (0.25 - eps / 3.0).max(0.0).sqrt();
            let ent = match component {
                EntangledComponent::PsiPlus => DensityMatrix::pure([z, c(r), c(r), z]),
                EntangledComponent::PhiPlus => DensityMatrix::pure([c(r), z, z, c(r)]),
            };
            let mut m = ent.matrix() * c(w);
            m[(0, 0)] += c(1.0 - w);
            Ok(DensityMatrix::from_matrix_unchecked(m))
        }
        NamedState::RhoStar => x_state(&rho_star_params()),
        NamedState::SigmaStar => {
            let mut m = CMatrix4::zeros();
            m[(0, 0)] = c(0.5);
            for (i, j) in [(1, 1), (1, 3), (3, 1), (3, 3)] {
                m[(i, j)] = c(0.25);
            }
            Ok(DensityMatrix::from_matrix_unchecked(m))
        }
        NamedState::Product(av, bv) => {
            for (nm, v) in [("|a|", av.norm()), ("|b|", bv.norm())] {
                if v > 1.0 + 1e-12 {
                    return Err(Error::ParamOutOfRange {
                        name: nm,
                        value: v,
                        lo: 0.0,
                        hi: 1.0,
                    });
                }
            }
            Ok(DensityMatrix::from_matrix_unchecked(linalg::kron2(
                &qubit(av),
                &qubit(bv),
            )))
        }
    }
}

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange {
            name,
            value,
            lo,
            hi,
        })
    }
}

/// Number of eigenvalues above `tol`.
pub fn numerical_rank(rho: &DensityMatrix, tol: f64) -> usize {
    rho.eigenvalues().iter().filter(|&&l| l > tol).count()
}
