//! Maximum geometric discord over separable X states.
//!
//! At the maximum the populations satisfy `ad = bc = ⅛[(a−c)² + (b−d)²]`
//! with `p = q = √(ad)`. Writing `a = bk`, `c = dk` reduces this to
//! `b + d = 1/(k+1)` and `4bd = (k²+1)/(k+1)⁴`, and the discord of the
//! resulting state is `2 f(k)` with `f(k) = k(k²+1)/(k+1)⁴`.
//!
//! [`grid_certify`] is an independent brute-force check over the full
//! five-parameter separable X family.

use rayon::prelude::*;
use serde::Serialize;

use crate::discord::{discord_from_bloch, geometric_discord};
use crate::error::{Error, Result};
use crate::linalg::CMatrix4;
use crate::qstate::{matrix_to_bloch, x_state, BlochForm, XStateParams};

pub const K_MAX: f64 = 1e3;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// `k(k²+1)/(k+1)⁴`.
pub fn f_appendix(k: f64) -> Result<f64> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::DomainError(k));
    }
    Ok(k * (k * k + 1.0) / (k + 1.0).powi(4))
}

/// `1/8 − f(k) = ((k−1)/(k+1))⁴ / 8`.
///
/// Near the optimum `f` is flat to fourth order, so its values stop
/// separating long before `k` does; the deficit keeps full relative
/// precision and is what the maximizers compare.
pub fn f_deficit(k: f64) -> Result<f64> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::DomainError(k));
    }
    Ok(((k - 1.0) / (k + 1.0)).powi(4) / 8.0)
}

fn deficit(k: f64) -> f64 {
    ((k - 1.0) / (k + 1.0)).powi(4) / 8.0
}

/// Five-point central estimate of `f''''(k)`, Richardson-extrapolated
/// from steps `h` and `h/2`.
pub fn fourth_derivative_fd(k: f64, h: f64) -> Result<f64> {
    if k - 2.0 * h <= 0.0 {
        return Err(Error::DomainError(k - 2.0 * h));
    }
    let stencil = |h: f64| -> Result<f64> {
        let f = |t| f_appendix(k + t * h);
        Ok((f(-2.0)? - 4.0 * f(-1.0)? + 6.0 * f(0.0)? - 4.0 * f(1.0)? + f(2.0)?) / h.powi(4))
    };
    let coarse = stencil(h)?;
    let fine = stencil(h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Golden-section maximization of `f` over `(0, K_MAX]`.
pub fn maximize_f(tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::MIN_POSITIVE, K_MAX);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut d1, mut d2) = (deficit(x1), deficit(x2));
    while hi - lo > tol {
        if d1 <= d2 {
            hi = x2;
            x2 = x1;
            d2 = d1;
            x1 = hi - INV_PHI * (hi - lo);
            d1 = deficit(x1);
        } else {
            lo = x1;
            x1 = x2;
            d1 = d2;
            x2 = lo + INV_PHI * (hi - lo);
            d2 = deficit(x2);
        }
    }
    let k = 0.5 * (lo + hi);
    (k, f_appendix(k).expect("k > 0"))
}

/// Zooming log-grid maximization; an independent route to [`maximize_f`].
pub fn maximize_f_grid(tol: f64) -> (f64, f64) {
    const POINTS: usize = 201;
    let (mut lo, mut hi) = (1e-6f64.ln(), K_MAX.ln());
    loop {
        let step = (hi - lo) / (POINTS - 1) as f64;
        let mut best_i = 0;
        let mut best_d = f64::INFINITY;
        for i in 0..POINTS {
            let d = deficit((lo + step * i as f64).exp());
            if d < best_d {
                best_d = d;
                best_i = i;
            }
        }
        let centre = lo + step * best_i as f64;
        let best = centre.exp();
        if step * best < tol {
            return (best, f_appendix(best).expect("k > 0"));
        }
        lo = centre - step;
        hi = centre + step;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `a ≥ c`
    Plus,
    Minus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AppendixSolution {
    pub k: f64,
    pub branch: Branch,
    pub params: XStateParams,
    pub discord: f64,
}

impl AppendixSolution {
    /// Residuals of `ad = bc`, `ad = ⅛[(a−c)²+(b−d)²]`, `a+b+c+d = 1` and
    /// `p = q = √(ad)`, in that order.
    pub fn residuals(&self) -> [f64; 4] {
        let XStateParams { a, b, c, d, p, q } = self.params;
        [
            (a * d - b * c).abs(),
            (a * d - ((a - c).powi(2) + (b - d).powi(2)) / 8.0).abs(),
            (a + b + c + d - 1.0).abs(),
            (p - (a * d).sqrt()).abs().max((q - (b * c).sqrt()).abs()),
        ]
    }
}

/// Populations for a given `k` from `b + d = 1/(k+1)`, `4bd = (k²+1)/(k+1)⁴`.
pub fn solve_constraints(k: f64, branch: Branch) -> Result<AppendixSolution> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::DomainError(k));
    }
    let sum = 1.0 / (k + 1.0);
    let prod = (k * k + 1.0) / (4.0 * (k + 1.0).powi(4));
    let disc = sum * sum - 4.0 * prod;
    if disc < 0.0 {
        return Err(Error::NoRealSolution { k });
    }
    let big = 0.5 * (sum + disc.sqrt());
    let small = prod / big;
    let (b, d) = match branch {
        Branch::Plus => (big, small),
        Branch::Minus => (small, big),
    };
    let (a, c) = (b * k, d * k);
    let coh = (a * d).sqrt();
    let params = XStateParams::new(a, b, c, d, coh, coh);
    let discord = geometric_discord(&x_state(&params)?);
    Ok(AppendixSolution {
        k,
        branch,
        params,
        discord,
    })
}

/// Maximum discord over separable X states and the maximizing states.
pub fn max_separable_x_discord() -> (f64, Vec<AppendixSolution>) {
    let (k, f) = maximize_f(1e-13);
    let states = [Branch::Plus, Branch::Minus]
        .into_iter()
        .map(|b| solve_constraints(k, b).expect("feasible at the optimum"))
        .collect();
    (2.0 * f, states)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridMode {
    /// All of `(a, b, c)` on the simplex and `p, q ∈ [0, min{√(ad), √(bc)}]`.
    Full,
    /// Only `p = q = min{√(ad), √(bc)}`, the coherences of the maximal
    /// state. A lower bound on `Full` at the same `n`: off the optimum,
    /// unequal coherences can do slightly better.
    Reduced,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridCertificate {
    pub n: usize,
    pub max_found: f64,
    pub argmax: XStateParams,
    pub evaluated: u64,
}

/// Bloch form of an X state written as `pop + p·P + q·Q`, each term from
/// the generic Pauli expansion. The expansion is linear, so the three
/// pieces are expanded once and combined per grid point.
struct XBasis {
    p: BlochForm,
    q: BlochForm,
}

impl XBasis {
    fn new() -> Self {
        let unit = |r: usize, c: usize| {
            let mut m = CMatrix4::zeros();
            m[(r, c)] = 1.0.into();
            m[(c, r)] = 1.0.into();
            matrix_to_bloch(&m)
        };
        Self {
            p: unit(0, 3),
            q: unit(1, 2),
        }
    }

    fn combine(&self, pop: &BlochForm, p: f64, q: f64) -> BlochForm {
        BlochForm::new(
            pop.x + self.p.x * p + self.q.x * q,
            pop.y + self.p.y * p + self.q.y * q,
            pop.t + self.p.t * p + self.q.t * q,
        )
    }
}

#[derive(Clone, Copy)]
struct Best {
    value: f64,
    key: [usize; 5],
    params: XStateParams,
}

impl Best {
    fn none() -> Self {
        Best {
            value: f64::NEG_INFINITY,
            key: [usize::MAX; 5],
            params: XStateParams::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
        }
    }

    /// Larger value wins, ties go to the smaller grid index, so the
    /// reduction is commutative.
    fn merge(self, other: Best) -> Best {
        match self.value.total_cmp(&other.value) {
            std::cmp::Ordering::Greater => self,
            std::cmp::Ordering::Less => other,
            std::cmp::Ordering::Equal => {
                if self.key <= other.key {
                    self
                } else {
                    other
                }
            }
        }
    }
}

/// Grid search over separable X states with step `1/n` in each of
/// `a, b, c` (`d = 1 − a − b − c`) and `n + 1` points for each of `p, q`.
pub fn grid_certify(n: usize, mode: GridMode) -> GridCertificate {
    assert!(n >= 10, "grid_certify needs n >= 10, got {n}");
    let basis = XBasis::new();
    let nf = n as f64;

    let per_a = |i: usize| -> (Best, u64) {
        let mut best = Best::none();
        let mut count = 0u64;
        for j in 0..=(n - i) {
            for l in 0..=(n - i - j) {
                let a = i as f64 / nf;
                let b = j as f64 / nf;
                let c = l as f64 / nf;
                let d = (n - i - j - l) as f64 / nf;
                let bound = (a * d).sqrt().min((b * c).sqrt());
                let pop = matrix_to_bloch(&XStateParams::new(a, b, c, d, 0.0, 0.0).to_matrix());
                let mut visit = |sp: usize, sq: usize, p: f64, q: f64| {
                    let value = discord_from_bloch(&basis.combine(&pop, p, q));
                    count += 1;
                    best = best.merge(Best {
                        value,
                        key: [i, j, l, sp, sq],
                        params: XStateParams::new(a, b, c, d, p, q),
                    });
                };
                match mode {
                    GridMode::Full => {
                        for sp in 0..=n {
                            for sq in 0..=n {
                                let p = bound * sp as f64 / nf;
                                let q = bound * sq as f64 / nf;
                                visit(sp, sq, p, q);
                            }
                        }
                    }
                    GridMode::Reduced => visit(n, n, bound, bound),
                }
            }
        }
        (best, count)
    };

    let (best, evaluated) = (0..=n)
        .into_par_iter()
        .map(per_a)
        .reduce(|| (Best::none(), 0), |x, y| (x.0.merge(y.0), x.1 + y.1));

    GridCertificate {
        n,
        max_found: best.value,
        argmax: best.params,
        evaluated,
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn f_is_symmetric_and_bounded(lk in -6.0..6.0f64) {
            let k = lk.exp();
            let (f, g) = (f_appendix(k).unwrap(), f_appendix(1.0 / k).unwrap());
            prop_assert!((f - g).abs() < 1e-15);
            prop_assert!(f <= 0.125);
        }

        #[test]
        fn branch_states_satisfy_the_constraints(lk in -4.0..4.0f64, minus in any::<bool>()) {
            let k = lk.exp();
            let branch = if minus { Branch::Minus } else { Branch::Plus };
            let sol = solve_constraints(k, branch).unwrap();
            prop_assert!(sol.residuals().iter().all(|r| r.abs() < 1e-12));
            prop_assert!((sol.discord - 2.0 * f_appendix(k).unwrap()).abs() < 1e-12);
            prop_assert!(sol.discord <= 0.25 + 1e-12);
        }
    }
}
