//! Closed-form geometric discord (measurement on qubit A).
//!
//! With `G = xxᵗ + TTᵗ`, the normalized discord is
//! `D = ½[‖x‖² + ‖T‖² − λ_max(G)]`, i.e. half the sum of the two smallest
//! eigenvalues of `G`. The minimizing classical-quantum state is
//! `χ = (eᵗx e, y, eeᵗT)` with `e` a top eigenvector of `G`.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::linalg::{self, frobenius};
use crate::qstate::{to_bloch, BlochForm, DensityMatrix};

/// Relative spread under which two eigenvalues of `G` count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;
const AXIS_NORM_TOL: f64 = 1e-12;
const SIGN_TOL: f64 = 1e-12;

/// `G = xxᵗ + TTᵗ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GMatrix(pub Matrix3<f64>);

/// Spectrum of `G`, eigenvalues non-increasing.
///
/// Each eigenvector has its first nonzero component positive. When the top
/// eigenvalue is degenerate the candidates are reordered so that
/// `vectors[0]` is the one with lexicographically largest absolute
/// components; the closest CQ state is then not unique and every vector of
/// the top eigenspace is an optimal axis.
#[derive(Clone, Debug, PartialEq)]
pub struct GSpectrum {
    pub lambdas: [f64; 3],
    pub vectors: [Vector3<f64>; 3],
}

impl GSpectrum {
    pub fn max_axis(&self) -> Vector3<f64> {
        self.vectors[0]
    }

    /// Multiplicity of the top eigenvalue.
    pub fn top_multiplicity(&self) -> usize {
        let scale = self.lambdas[0].abs().max(1.0);
        1 + self.lambdas[1..]
            .iter()
            .filter(|&&l| self.lambdas[0] - l <= DEGENERACY_TOL * scale)
            .count()
    }

    /// Orthonormal basis of the top eigenspace.
    pub fn top_eigenspace(&self) -> &[Vector3<f64>] {
        &self.vectors[..self.top_multiplicity()]
    }

    /// λ₂↓ + λ₃↓, equivalently λ₁↑ + λ₂↑.
    pub fn tail_sum(&self) -> f64 {
        self.lambdas[1] + self.lambdas[2]
    }
}

/// A zero-discord state obtained by dephasing qubit A along `axis`.
#[derive(Clone, Debug, PartialEq)]
pub struct CQState {
    axis: Vector3<f64>,
    state: DensityMatrix,
}

impl CQState {
    pub fn axis(&self) -> Vector3<f64> {
        self.axis
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }
}

pub fn g_matrix(bf: &BlochForm) -> GMatrix {
    GMatrix(bf.x * bf.x.transpose() + bf.t * bf.t.transpose())
}

fn sign_normalize(mut v: Vector3<f64>) -> Vector3<f64> {
    if let Some(first) = v.iter().copied().find(|c| c.abs() > SIGN_TOL) {
        if first < 0.0 {
            v = -v;
        }
    }
    v
}

fn lex_abs_cmp(a: &Vector3<f64>, b: &Vector3<f64>) -> std::cmp::Ordering {
    for i in 0..3 {
        match a[i].abs().total_cmp(&b[i].abs()) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

pub fn eig3_sym(g: &GMatrix) -> GSpectrum {
    let eig = linalg::eigh3(&g.0);
    // ascending from Jacobi; flip to non-increasing
    let lambdas = [eig.values[2], eig.values[1], eig.values[0]];
    let mut vectors = [2, 1, 0].map(|i| sign_normalize(eig.vectors.column(i).into_owned()));
    let mut spec = GSpectrum { lambdas, vectors };
    let m = spec.top_multiplicity();
    if m > 1 {
        vectors[..m].sort_by(|a, b| lex_abs_cmp(b, a));
        spec.vectors = vectors;
    }
    spec
}

pub fn spectrum(rho: &DensityMatrix) -> GSpectrum {
    eig3_sym(&g_matrix(&to_bloch(rho)))
}

/// `½[‖x‖² + ‖T‖² − λ_max(G)]` straight from a Bloch form.
pub fn discord_from_bloch(bf: &BlochForm) -> f64 {
    let spec = eig3_sym(&g_matrix(bf));
    (0.5 * (bf.x.norm_squared() + bf.t.norm_squared() - spec.lambdas[0])).max(0.0)
}

pub fn geometric_discord(rho: &DensityMatrix) -> f64 {
    discord_from_bloch(&to_bloch(rho))
}

/// `χ = (eᵗx e, y, eeᵗT)` for a unit axis `e`.
fn dephased(bf: &BlochForm, axis: &Vector3<f64>) -> BlochForm {
    let proj = axis * axis.transpose();
    BlochForm::new(axis * axis.dot(&bf.x), bf.y, proj * bf.t)
}

/// Closest zero-discord state and the squared Hilbert–Schmidt distance.
pub fn closest_cq(rho: &DensityMatrix) -> (CQState, f64) {
    let bf = to_bloch(rho);
    let axis = eig3_sym(&g_matrix(&bf)).max_axis();
    let chi = DensityMatrix::from_matrix_unchecked(dephased(&bf, &axis).to_matrix());
    let dist = frobenius(&(rho.matrix() - chi.matrix()));
    (CQState { axis, state: chi }, dist * dist)
}

/// `2‖ρ − χ_e‖²` for a fixed measurement axis, computed on the matrices.
pub fn measured_discord(rho: &DensityMatrix, axis: &Vector3<f64>) -> Result<f64> {
    let norm = axis.norm();
    if (norm - 1.0).abs() > AXIS_NORM_TOL {
        return Err(Error::BadAxis { norm });
    }
    let bf = to_bloch(rho);
    let chi = dephased(&bf, axis).to_matrix();
    let dist = frobenius(&(rho.matrix() - chi));
    Ok(2.0 * dist * dist)
}

/// `½ − (λ₂↓ + λ₃↓)(G)`; negative values would contradict the conjectured
/// bound if the state is separable.
pub fn conjecture_gap(rho: &DensityMatrix) -> f64 {
    0.5 - spectrum(rho).tail_sum()
}

pub fn conjecture_gap_from_bloch(bf: &BlochForm) -> f64 {
    0.5 - eig3_sym(&g_matrix(bf)).tail_sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{make_named, EntangledComponent, NamedState};

    fn named(n: NamedState) -> DensityMatrix {
        make_named(&n).unwrap()
    }

    fn diag(a: f64, b: f64, c: f64) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::new(a, b, c))
    }

    #[test]
    fn g_matrix_examples() {
        let p: f64 = 0.7;
        let g = g_matrix(&to_bloch(&named(NamedState::Werner(p))));
        assert!((g.0 - Matrix3::identity() * p * p).norm() < 1e-15);

        let zero = DensityMatrix::pure([1.0.into(), 0.0.into(), 0.0.into(), 0.0.into()]);
        assert_eq!(g_matrix(&to_bloch(&zero)).0, diag(0.0, 0.0, 2.0));

        let g = g_matrix(&to_bloch(&named(NamedState::RhoStar)));
        assert!((g.0 - diag(0.5, 0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn eig3_examples() {
        let s = eig3_sym(&GMatrix(diag(3.0, 1.0, 2.0)));
        assert_eq!(s.lambdas, [3.0, 2.0, 1.0]);
        assert_eq!(s.vectors[0], Vector3::x());

        let s = eig3_sym(&GMatrix(Matrix3::identity() * 0.09));
        assert_eq!(s.top_multiplicity(), 3);
        for (i, u) in s.vectors.iter().enumerate() {
            for (j, v) in s.vectors.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((u.dot(v) - want).abs() < 1e-12);
            }
        }

        let s = eig3_sym(&GMatrix(diag(0.5, 0.0, 0.5)));
        assert_eq!(s.lambdas, [0.5, 0.5, 0.0]);
        assert_eq!(s.max_axis(), Vector3::x());
    }

    #[test]
    fn spectrum_reconstructs_dense_g() {
        let g = GMatrix(Matrix3::new(0.9, 0.2, -0.1, 0.2, 0.4, 0.3, -0.1, 0.3, 0.6));
        let s = eig3_sym(&g);
        let recon: Matrix3<f64> = (0..3)
            .map(|i| s.vectors[i] * s.vectors[i].transpose() * s.lambdas[i])
            .sum();
        assert!((recon - g.0).norm() <= 1e-12);
        assert!(s.lambdas[0] >= s.lambdas[1] && s.lambdas[1] >= s.lambdas[2]);
        assert_eq!(eig3_sym(&g), s);
    }

    #[test]
    fn discord_of_named_states() {
        assert!((geometric_discord(&named(NamedState::BellPhiPlus)) - 1.0).abs() < 1e-14);
        for p in [0.0, 0.2, 1.0 / 3.0, 0.5, 0.9, 1.0] {
            let d = geometric_discord(&named(NamedState::Werner(p)));
            assert!((d - p * p).abs() < 1e-14, "p = {p}");
        }
        assert!((geometric_discord(&named(NamedState::RhoStar)) - 0.25).abs() < 1e-14);
        let prod = named(NamedState::Product(
            Vector3::new(0.0, 0.6, 0.8),
            Vector3::x(),
        ));
        assert!(geometric_discord(&prod).abs() < 1e-14);
        for i in 0..=75 {
            let eps = i as f64 / 100.0;
            let r = named(NamedState::RhoEpsilon(eps, EntangledComponent::PsiPlus));
            assert!(
                (geometric_discord(&r) - (1.0 - eps)).abs() < 1e-12,
                "eps = {eps}"
            );
        }
    }

    // With |Φ⁺⟩ as the entangled component the family has D = w² instead,
    // w = ½ + √(¼ − ε/3).
    #[test]
    fn phi_plus_component_breaks_one_minus_epsilon() {
        let eps = 0.3;
        let r = named(NamedState::RhoEpsilon(eps, EntangledComponent::PhiPlus));
        let w = 0.5 + (0.25f64 - eps / 3.0).sqrt();
        let d = geometric_discord(&r);
        assert!((d - w * w).abs() < 1e-12);
        assert!((d - (1.0 - eps)).abs() > 0.05);
    }

    #[test]
    fn closest_cq_examples() {
        let cq = named(NamedState::Product(Vector3::z(), Vector3::x()));
        let (chi, d2) = closest_cq(&cq);
        assert!(d2 < 1e-28);
        assert!(chi.state().distance(&cq) < 1e-14);

        let p: f64 = 0.6;
        let (chi, d2) = closest_cq(&named(NamedState::Werner(p)));
        assert!((d2 - p * p / 2.0).abs() < 1e-14);
        assert!(geometric_discord(chi.state()) < 1e-12);

        for eps in [0.1, 0.4, 0.7] {
            let (chi, d2) = closest_cq(&named(NamedState::RhoEpsilon(
                eps,
                EntangledComponent::PsiPlus,
            )));
            assert_eq!(chi.axis(), Vector3::x());
            assert!((2.0 * d2 - (1.0 - eps)).abs() < 1e-12);
        }
    }

    #[test]
    fn measured_discord_examples() {
        let rs = named(NamedState::RhoStar);
        let axis = spectrum(&rs).max_axis();
        assert!((measured_discord(&rs, &axis).unwrap() - geometric_discord(&rs)).abs() < 1e-14);

        assert!(matches!(
            measured_discord(&rs, &Vector3::new(1.0, 1.0, 0.0)),
            Err(Error::BadAxis { .. })
        ));

        for eps in [0.05, 0.3, 0.6, 0.74] {
            let r = named(NamedState::RhoEpsilon(eps, EntangledComponent::PsiPlus));
            let along_x = measured_discord(&r, &Vector3::x()).unwrap();
            assert!((along_x - (1.0 - eps)).abs() < 1e-12);
            let along_z = measured_discord(&r, &Vector3::z()).unwrap();
            assert!(along_z > 1.0 - eps + 1e-6, "eps = {eps}");
        }
    }

    #[test]
    fn conjecture_gap_examples() {
        let zero = DensityMatrix::pure([1.0.into(), 0.0.into(), 0.0.into(), 0.0.into()]);
        assert!((conjecture_gap(&zero) - 0.5).abs() < 1e-15);
        assert!(conjecture_gap(&named(NamedState::RhoStar)).abs() < 1e-14);
        assert!((conjecture_gap(&named(NamedState::BellPhiPlus)) + 1.5).abs() < 1e-14);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::lu::{apply_local_unitary, random_unitary};
    use crate::search::random_hs_state;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #[test]
        fn discord_is_bounded_and_matches_tail(seed in any::<u64>()) {
            let rho = random_hs_state(&mut ChaCha8Rng::seed_from_u64(seed));
            let d = geometric_discord(&rho);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
            prop_assert!((d - 0.5 * spectrum(&rho).tail_sum()).abs() < 1e-12);
            prop_assert!((conjecture_gap(&rho) - (0.5 - 2.0 * d)).abs() < 1e-12);
        }

        #[test]
        fn discord_is_lu_invariant(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_hs_state(&mut rng);
            let (u, v) = (random_unitary(&mut rng), random_unitary(&mut rng));
            let out = apply_local_unitary(&rho, &u, &v).unwrap();
            prop_assert!((geometric_discord(&out) - geometric_discord(&rho)).abs() < 1e-12);
        }

        #[test]
        fn no_axis_beats_the_optimum(seed in any::<u64>(), theta in 0.0..std::f64::consts::PI, phi in -3.2..3.2f64) {
            let rho = random_hs_state(&mut ChaCha8Rng::seed_from_u64(seed));
            let e = Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
            prop_assert!(measured_discord(&rho, &e).unwrap() >= geometric_discord(&rho) - 1e-12);
        }
    }
}
