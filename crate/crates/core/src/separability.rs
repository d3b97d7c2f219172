//! Separability tests for two qubits.
//!
//! PPT is necessary and sufficient in 2⊗2. The trace norm of `T` and the
//! CHSH quantity `M(ρ)` are reported alongside as diagnostics.

use serde::Serialize;

use crate::linalg::{self, CMatrix4};
use crate::qstate::{to_bloch, BlochForm, DensityMatrix, XStateParams};

pub const PPT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparabilityReport {
    pub is_ppt: bool,
    pub min_pt_eigenvalue: f64,
    pub t_trace_norm: f64,
    pub chsh_m: f64,
    /// Closed-form X-state verdict, present only when the input was given
    /// as X-state parameters.
    pub x_condition: Option<bool>,
}

/// Transpose on qubit B: `⟨i j|ρ^Γ|k l⟩ = ⟨i l|ρ|k j⟩`.
pub fn partial_transpose_matrix(m: &CMatrix4) -> CMatrix4 {
    CMatrix4::from_fn(|r, c| {
        let (i, j) = (r / 2, r % 2);
        let (k, l) = (c / 2, c % 2);
        m[(2 * i + l, 2 * k + j)]
    })
}

pub fn partial_transpose(rho: &DensityMatrix) -> CMatrix4 {
    partial_transpose_matrix(rho.matrix())
}

pub fn min_pt_eigenvalue(rho: &DensityMatrix) -> f64 {
    linalg::hermitian_eigenvalues(&partial_transpose(rho))[0]
}

pub fn is_separable(rho: &DensityMatrix, tol: f64) -> bool {
    min_pt_eigenvalue(rho) >= -tol
}

/// `max{p, q} ≤ min{√(bc), √(ad)}`.
pub fn x_state_separable(params: &XStateParams) -> bool {
    let bound = (params.b * params.c)
        .sqrt()
        .min((params.a * params.d).sqrt());
    params.p.max(params.q) <= bound
}

/// Singular values of `T`, non-increasing.
///
/// Computed by SVD of `T` itself rather than from `TTᵗ`, so zero singular
/// values come out at the `1e-16` level instead of their square roots.
pub fn t_singular_values(bf: &BlochForm) -> [f64; 3] {
    let sv = bf.t.singular_values();
    let mut out = [sv[0], sv[1], sv[2]];
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// `‖T‖₁`, the sum of singular values of `T`.
pub fn t_trace_norm(bf: &BlochForm) -> f64 {
    t_singular_values(bf).iter().sum()
}

/// Sum of the two largest eigenvalues of `TTᵗ`.
pub fn chsh_m(bf: &BlochForm) -> f64 {
    let s = t_singular_values(bf);
    s[0] * s[0] + s[1] * s[1]
}

pub fn report(rho: &DensityMatrix, tol: f64) -> SeparabilityReport {
    let bf = to_bloch(rho);
    let min_pt = min_pt_eigenvalue(rho);
    SeparabilityReport {
        is_ppt: min_pt >= -tol,
        min_pt_eigenvalue: min_pt,
        t_trace_norm: t_trace_norm(&bf),
        chsh_m: chsh_m(&bf),
        x_condition: None,
    }
}

pub fn report_x_state(params: &XStateParams, tol: f64) -> SeparabilityReport {
    let rho = DensityMatrix::from_matrix_unchecked(params.to_matrix());
    SeparabilityReport {
        x_condition: Some(x_state_separable(params)),
        ..report(&rho, tol)
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::qstate::{x_state, XStateParams};
    use crate::search::random_product_ensemble;
    use proptest::prelude::*;

    fn feasible_x() -> impl Strategy<Value = XStateParams> {
        (
            0.01..1.0f64,
            0.01..1.0f64,
            0.01..1.0f64,
            0.01..1.0f64,
            0.0..1.0f64,
            0.0..1.0f64,
        )
            .prop_map(|(a, b, c, d, up, uq)| {
                let s = a + b + c + d;
                let (a, b, c, d) = (a / s, b / s, c / s, d / s);
                XStateParams::new(a, b, c, d, up * (a * d).sqrt(), uq * (b * c).sqrt())
            })
    }

    proptest! {
        #[test]
        fn x_condition_matches_ppt(params in feasible_x()) {
            let rho = x_state(&params).unwrap();
            prop_assert_eq!(x_state_separable(&params), is_separable(&rho, PPT_TOL));
        }

        #[test]
        fn product_mixtures_pass_every_test(seed in any::<u64>(), k in 1usize..8) {
            let e = random_product_ensemble(seed, k);
            let r = report(&e.density_matrix(), PPT_TOL);
            prop_assert!(r.is_ppt);
            prop_assert!(r.t_trace_norm <= 1.0 + 1e-10);
            prop_assert!(r.chsh_m <= 1.0 + 1e-10);
        }
    }
}
