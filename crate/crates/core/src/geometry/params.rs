use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Parameters of the near/far split of dyadic cubes around a Whitney band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplittingParams {
    /// Threshold of the split `dist(R,Ω) ≤ α·diam R`.
    pub alpha: f64,
    /// Enlargement `μ = 2(r₂+1)/(α−1) + 1`; far cubes meeting `Q` lie in `μQ`.
    pub mu: f64,
    /// Enlargement `γ = 2(α+1)/(r₁−1) + 1`; `Q ⊂ γR` for near cubes `R`.
    pub gamma_split: f64,
}

impl SplittingParams {
    /// Checks `μ < min(3/2, r₁)` and `r₁ < α` for the given band.
    pub fn satisfies(&self, r1: f64) -> bool {
        self.mu < 1.5f64.min(r1) && r1 < self.alpha
    }
}

/// Deterministic choice `α = 2·max(r₁, 1 + 2(r₂+1)/(m−1))` with `m = min(3/2, r₁)`.
pub fn solve_splitting_params(r1: f64, r2: f64) -> Result<SplittingParams> {
    if !(r1 > 1.0) {
        return Err(Error::SplittingNeedsLargeR1);
    }
    if !(r2 > r1 && r2.is_finite()) {
        return Err(invalid(format!("need r1 < r2 < inf, got r1={r1}, r2={r2}")));
    }
    let m = 1.5f64.min(r1);
    let alpha = 2.0 * r1.max(1.0 + 2.0 * (r2 + 1.0) / (m - 1.0));
    let mu = 2.0 * (r2 + 1.0) / (alpha - 1.0) + 1.0;
    let gamma_split = 2.0 * (alpha + 1.0) / (r1 - 1.0) + 1.0;
    Ok(SplittingParams { alpha, mu, gamma_split })
}

/// Pair `(ε, N)` tying the lacunary constant ν to Whitney radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquaParams {
    pub epsilon: f64,
    pub big_n: u64,
}

/// `2√n(1+εN) / (N(1−ε√n))`, which the solver makes equal to `1/ν`.
pub fn equa_lhs(params: &EquaParams, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let big_n = params.big_n as f64;
    2.0 * sn * (1.0 + params.epsilon * big_n) / (big_n * (1.0 - params.epsilon * sn))
}

/// `N = ⌈4√n·ν⌉`, `ε = (N − 2√n·ν)/(√n(2ν+1)N)`.
pub fn solve_epsilon_n(nu: f64, n: usize) -> Result<EquaParams> {
    if !(nu > 1.0 && nu.is_finite()) {
        return Err(invalid(format!("nu must exceed 1, got {nu}")));
    }
    if n == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let sn = (n as f64).sqrt();
    let big_n = (4.0 * sn * nu).ceil();
    let epsilon = (big_n - 2.0 * sn * nu) / (sn * (2.0 * nu + 1.0) * big_n);
    Ok(EquaParams { epsilon, big_n: big_n as u64 })
}
