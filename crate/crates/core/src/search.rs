//! Randomized exploration of separable two-qubit states.
//!
//! Candidates are convex mixtures of pure product states, so every point
//! the search visits is separable by construction. All randomness comes
//! from `ChaCha8Rng::seed_from_u64(seed)`, which is portable across
//! platforms and releases of `rand_chacha`.

use std::ops::Range;

use nalgebra::{DVector, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discord::{discord_from_bloch, eig3_sym, g_matrix};
use crate::error::{Error, Result};
use crate::linalg::CMatrix4;
use crate::qstate::{numerical_rank, to_bloch, BlochForm, DensityMatrix, RANK_TOL};
use crate::separability::{is_separable, PPT_TOL};

pub const DEFAULT_TERMS: usize = 6;
pub const DEFAULT_STEP: f64 = 0.5;
pub const MIN_STEP: f64 = 1e-9;
/// A separable record with `gap` below this is a counterexample candidate.
pub const GAP_ALARM: f64 = -1e-6;
pub const MAX_PPT_ATTEMPTS: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductTerm {
    pub weight: f64,
    pub a: [f64; 3],
    pub b: [f64; 3],
}

/// `ρ = Σ w_k (I + a_k·σ)/2 ⊗ (I + b_k·σ)/2` with unit Bloch vectors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductEnsemble {
    terms: Vec<ProductTerm>,
}

impl ProductEnsemble {
    pub fn new(terms: Vec<ProductTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidEnsemble("no terms".into()));
        }
        let total: f64 = terms.iter().map(|t| t.weight).sum();
        if (total - 1.0).abs() > 1e-12 || terms.iter().any(|t| !(t.weight >= 0.0)) {
            return Err(Error::InvalidEnsemble(format!(
                "weights must be nonnegative and sum to 1, got {total}"
            )));
        }
        for (i, t) in terms.iter().enumerate() {
            for v in [t.a, t.b] {
                let n = Vector3::from(v).norm();
                if (n - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidEnsemble(format!(
                        "term {i}: Bloch vector norm {n}"
                    )));
                }
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    pub fn bloch(&self) -> BlochForm {
        let mut bf = BlochForm::zero();
        for t in &self.terms {
            let (a, b) = (Vector3::from(t.a), Vector3::from(t.b));
            bf.x += a * t.weight;
            bf.y += b * t.weight;
            bf.t += a * b.transpose() * t.weight;
        }
        bf
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(self.bloch().to_matrix())
    }

    pub fn discord(&self) -> f64 {
        discord_from_bloch(&self.bloch())
    }
}

fn unit_gaussian<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: Vector3<f64> = Vector3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let n = v.norm();
        if n > 1e-12 {
            return (v / n).into();
        }
    }
}

/// `k` product terms with flat-Dirichlet weights and uniform Bloch vectors.
pub fn random_product_ensemble(seed: u64, k: usize) -> ProductEnsemble {
    let k = k.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    let terms = raw
        .iter()
        .map(|w| ProductTerm {
            weight: w / total,
            a: unit_gaussian(&mut rng),
            b: unit_gaussian(&mut rng),
        })
        .collect();
    ProductEnsemble { terms }
}

/// The extremal X state as an equal mixture of two product states:
/// `a = (±1/√2, 0, 1/√2)`, `b = ±x̂`.
pub fn rho_star_decomposition() -> ProductEnsemble {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ProductEnsemble {
        terms: vec![
            ProductTerm {
                weight: 0.5,
                a: [h, 0.0, h],
                b: [1.0, 0.0, 0.0],
            },
            ProductTerm {
                weight: 0.5,
                a: [-h, 0.0, h],
                b: [-1.0, 0.0, 0.0],
            },
        ],
    }
}

/// Splits every term into `(a, b)` and `(−a, −b)` at half weight, which
/// zeroes both local vectors and keeps `T`.
pub fn antipodal_symmetrize(e: &ProductEnsemble) -> ProductEnsemble {
    let neg = |v: [f64; 3]| [-v[0], -v[1], -v[2]];
    let terms = e
        .terms
        .iter()
        .flat_map(|t| {
            [
                ProductTerm {
                    weight: t.weight / 2.0,
                    a: t.a,
                    b: t.b,
                },
                ProductTerm {
                    weight: t.weight / 2.0,
                    a: neg(t.a),
                    b: neg(t.b),
                },
            ]
        })
        .collect();
    ProductEnsemble { terms }
}

/// Hilbert–Schmidt random state: `GG†/Tr(GG†)` with complex Gaussian `G`.
pub fn random_hs_state<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let g = CMatrix4::from_fn(|_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let w = g * g.adjoint();
    let tr = w.trace();
    DensityMatrix::from_matrix_unchecked(w / tr)
}

/// Rejection-samples Hilbert–Schmidt states until one is PPT. Returns the
/// state and the number of draws used.
pub fn random_ppt_state_counted(seed: u64) -> Result<(DensityMatrix, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=MAX_PPT_ATTEMPTS {
        let rho = random_hs_state(&mut rng);
        if is_separable(&rho, PPT_TOL) {
            return Ok((rho, attempt));
        }
    }
    Err(Error::SamplerExhausted {
        attempts: MAX_PPT_ATTEMPTS,
    })
}

pub fn random_ppt_state(seed: u64) -> Result<DensityMatrix> {
    random_ppt_state_counted(seed).map(|(rho, _)| rho)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Random,
    Refined,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::Refined => "refined",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchRecord {
    pub state: DensityMatrix,
    pub ensemble: ProductEnsemble,
    pub discord: f64,
    pub gap: f64,
    pub seed: u64,
    pub method: Method,
    pub iterations: usize,
    pub separable: bool,
    pub rank: usize,
    /// Discord after each accepted step, starting with the initial value.
    pub trace: Vec<f64>,
}

impl SearchRecord {
    fn from_ensemble(
        ensemble: ProductEnsemble,
        seed: u64,
        method: Method,
        iterations: usize,
        trace: Vec<f64>,
    ) -> Self {
        let bf = ensemble.bloch();
        let spec = eig3_sym(&g_matrix(&bf));
        let state = ensemble.density_matrix();
        SearchRecord {
            discord: discord_from_bloch(&bf),
            gap: 0.5 - spec.tail_sum(),
            separable: is_separable(&state, PPT_TOL),
            rank: numerical_rank(&state, RANK_TOL),
            state,
            ensemble,
            seed,
            method,
            iterations,
            trace,
        }
    }

    pub fn is_counterexample_candidate(&self) -> bool {
        self.separable && self.gap < GAP_ALARM
    }
}

/// Unconstrained coordinates of an ensemble: per term the weight root
/// `u` (weight `u²/Σu²`) and polar/azimuthal angles of both vectors.
fn encode(e: &ProductEnsemble) -> Vec<f64> {
    let angles = |v: [f64; 3]| {
        let theta = v[2].clamp(-1.0, 1.0).acos();
        let phi = v[1].atan2(v[0]);
        [theta, phi]
    };
    e.terms
        .iter()
        .flat_map(|t| {
            let [ta, pa] = angles(t.a);
            let [tb, pb] = angles(t.b);
            [t.weight.sqrt(), ta, pa, tb, pb]
        })
        .collect()
}

fn decode(x: &[f64]) -> ProductEnsemble {
    let unit = |theta: f64, phi: f64| {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        [st * cp, st * sp, ct]
    };
    let norm: f64 = x.chunks(5).map(|c| c[0] * c[0]).sum();
    let terms = x
        .chunks(5)
        .map(|c| ProductTerm {
            weight: c[0] * c[0] / norm,
            a: unit(c[1], c[2]),
            b: unit(c[3], c[4]),
        })
        .collect();
    ProductEnsemble { terms }
}

fn objective(x: &[f64]) -> f64 {
    let norm: f64 = x.chunks(5).map(|c| c[0] * c[0]).sum();
    if norm <= 0.0 {
        return f64::NEG_INFINITY;
    }
    decode(x).discord()
}

/// Random directions polled per iteration when no coordinate move helps.
pub const RANDOM_POLLS: usize = 64;

/// Derivative-free ascent on the discord of a product ensemble.
///
/// Each iteration tries `±step` on every coordinate in turn and keeps a
/// move only if it strictly increases the discord. If no coordinate move
/// helps, up to [`RANDOM_POLLS`] random unit directions are tried at the
/// same step; the optimum sits on a ridge where `G` is degenerate and
/// axis moves alone stall there. An iteration with no accepted move
/// halves the step. Stops after `max_iters` iterations or once the step
/// falls below [`MIN_STEP`]. The random directions come from `seed`.
pub fn refine_seeded(
    start: &ProductEnsemble,
    max_iters: usize,
    step0: f64,
    seed: u64,
) -> SearchRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut x = encode(start);
    let mut best = objective(&x);
    let mut trace = vec![best];
    let mut step = step0;
    let mut iterations = 0;

    while iterations < max_iters && step >= MIN_STEP {
        iterations += 1;
        let mut improved = false;
        for i in 0..x.len() {
            let base = x[i];
            let mut pick = None;
            for cand in [base + step, base - step] {
                x[i] = cand;
                let v = objective(&x);
                if v > best && pick.is_none_or(|(_, pv)| v > pv) {
                    pick = Some((cand, v));
                }
            }
            match pick {
                Some((cand, v)) => {
                    x[i] = cand;
                    best = v;
                    trace.push(v);
                    improved = true;
                }
                None => x[i] = base,
            }
        }
        if !improved {
            for _ in 0..RANDOM_POLLS {
                let dir: Vec<f64> = (0..x.len())
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
                let cand: Vec<f64> = x
                    .iter()
                    .zip(&dir)
                    .map(|(xi, d)| xi + step * d / norm)
                    .collect();
                let v = objective(&cand);
                if v > best {
                    x = cand;
                    best = v;
                    trace.push(v);
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }

    let method = if iterations == 0 {
        Method::Random
    } else {
        Method::Refined
    };
    SearchRecord::from_ensemble(decode(&x), seed, method, iterations, trace)
}

/// [`refine_seeded`] with seed 0.
pub fn refine(start: &ProductEnsemble, max_iters: usize, step0: f64) -> SearchRecord {
    refine_seeded(start, max_iters, step0, 0)
}

/// Adds Gaussian noise of scale `sigma` to every angle and weight root.
pub fn perturb(e: &ProductEnsemble, seed: u64, sigma: f64) -> ProductEnsemble {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = encode(e)
        .into_iter()
        .map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    decode(&x)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationarityResidual {
    /// `‖x − (eᵗx)e‖`
    pub r_x: f64,
    /// `‖T − eeᵗT‖_F`
    pub r_t: f64,
    /// The top eigenvector of `G` at which both are evaluated.
    pub axis: [f64; 3],
}

impl StationarityResidual {
    pub fn total(&self) -> f64 {
        self.r_x.hypot(self.r_t)
    }
}

/// Residuals of `x = (eᵗx)e` and `T = eeᵗT` at a top eigenvector `e` of `G`.
///
/// On the top eigenspace `r_x² + r_T² = Tr G − λ_max = 2D` is constant, so
/// when that space is degenerate the reported `e` is the one minimizing
/// `max(r_x, r_T)`; this point is found in closed form from the overlap of
/// `x` with the eigenspace. Both residuals vanish together only on
/// zero-discord states, and a small residual is not evidence of a maximum.
pub fn stationarity_residual(rho: &DensityMatrix) -> StationarityResidual {
    let bf = to_bloch(rho);
    let spec = eig3_sym(&g_matrix(&bf));
    let basis = spec.top_eigenspace();
    let lmax = spec.lambdas[0];
    let xx = bf.x.norm_squared();
    let tt = bf.t.norm_squared();

    let w = DVector::from_iterator(basis.len(), basis.iter().map(|v| v.dot(&bf.x)));
    let ww = w.norm_squared();
    // s = (eᵗx)², achievable range [s_lo, ww]
    let s_lo = if basis.len() == 1 { ww } else { 0.0 };
    let s = (0.5 * (xx - tt + lmax)).clamp(s_lo, ww);

    let coeffs = if ww <= 1e-30 {
        let mut u = DVector::zeros(basis.len());
        u[0] = 1.0;
        u
    } else {
        let wh = &w / ww.sqrt();
        let alpha = (s / ww).clamp(0.0, 1.0).sqrt();
        let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
        if basis.len() == 1 || beta == 0.0 {
            wh
        } else {
            // any unit vector of the eigenspace coordinates orthogonal to ŵ
            let mut perp = DVector::zeros(basis.len());
            let pivot = (0..basis.len())
                .min_by(|&i, &j| wh[i].abs().total_cmp(&wh[j].abs()))
                .unwrap();
            perp[pivot] = 1.0;
            perp -= &wh * wh[pivot];
            perp /= perp.norm();
            &wh * alpha + perp * beta
        }
    };
    let e: Vector3<f64> = basis.iter().zip(coeffs.iter()).map(|(v, c)| v * *c).sum();
    let e = e / e.norm();

    let r_x = (bf.x - e * e.dot(&bf.x)).norm();
    let r_t = (bf.t - e * e.transpose() * bf.t).norm();
    StationarityResidual {
        r_x,
        r_t,
        axis: e.into(),
    }
}

/// `a² + b² + c² − max{a², b², c²}`.
pub fn simplex_objective(a: f64, b: f64, c: f64) -> f64 {
    let (a2, b2, c2) = (a * a, b * b, c * c);
    a2 + b2 + c2 - a2.max(b2).max(c2)
}

/// Grid maximum of [`simplex_objective`] over `a, b, c ≥ 0`, `a + b + c ≤ 1`
/// with step `1/n`.
pub fn prop2_simplex_oracle(n: usize) -> f64 {
    assert!(n >= 100, "prop2_simplex_oracle needs n >= 100, got {n}");
    let nf = n as f64;
    (0..=n)
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            for j in 0..=(n - i) {
                for l in 0..=(n - i - j) {
                    best = best.max(simplex_objective(
                        i as f64 / nf,
                        j as f64 / nf,
                        l as f64 / nf,
                    ));
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// One random product ensemble per seed, each refined, sorted by discord
/// (descending, ties by seed). Output does not depend on thread count.
pub fn campaign(seeds: Range<u64>, k: usize, refine_iters: usize) -> Vec<SearchRecord> {
    campaign_from(seeds, refine_iters, |seed| random_product_ensemble(seed, k))
}

/// Like [`campaign`] but with a caller-provided starting ensemble per seed.
pub fn campaign_from<F>(seeds: Range<u64>, refine_iters: usize, start: F) -> Vec<SearchRecord>
where
    F: Fn(u64) -> ProductEnsemble + Sync,
{
    let mut records: Vec<SearchRecord> = seeds
        .into_par_iter()
        .map(|seed| refine_seeded(&start(seed), refine_iters, DEFAULT_STEP, seed))
        .collect();
    records.sort_by(|a, b| b.discord.total_cmp(&a.discord).then(a.seed.cmp(&b.seed)));
    records
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub records: usize,
    pub best_discord: f64,
    pub worst_gap: f64,
    pub counterexample_seeds: Vec<u64>,
}

pub fn summarize(records: &[SearchRecord]) -> CampaignSummary {
    CampaignSummary {
        records: records.len(),
        best_discord: records
            .iter()
            .map(|r| r.discord)
            .fold(f64::NEG_INFINITY, f64::max),
        worst_gap: records.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min),
        counterexample_seeds: records
            .iter()
            .filter(|r| r.is_counterexample_candidate())
            .map(|r| r.seed)
            .collect(),
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn refinement_never_decreases(seed in any::<u64>(), k in 1usize..7) {
            let start = random_product_ensemble(seed, k);
            let r = refine_seeded(&start, 40, DEFAULT_STEP, seed);
            prop_assert!(r.discord >= start.discord());
            prop_assert!(r.trace.windows(2).all(|w| w[1] >= w[0]));
            prop_assert!(r.separable);
        }

        #[test]
        fn separable_samples_respect_the_conjectured_gap(seed in any::<u64>()) {
            let r = refine_seeded(&random_product_ensemble(seed, 6), 40, DEFAULT_STEP, seed);
            prop_assert!(!r.is_counterexample_candidate(), "seed {} gap {}", seed, r.gap);
        }
    }
}
