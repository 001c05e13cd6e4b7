//! Homotopy update rules for μ, τ and the endgame bound relaxation.

use crate::options::LoqoMode;

/// Fiacco–McCormick: `max(μ_min, min(α μ, μ^β))` once the barrier
/// subproblem is solved, otherwise `μ`.
pub fn update_mu_monotone(mu: f64, solved: bool, alpha: f64, beta: f64, mu_min: f64) -> f64 {
    if solved {
        mu_min.max((alpha * mu).min(mu.powf(beta)))
    } else {
        mu
    }
}

/// `τ = max(σ_min, α μ^β)`.
pub fn update_tau_proportional(mu: f64, alpha: f64, beta: f64, sigma_min: f64) -> f64 {
    sigma_min.max(alpha * mu.powf(beta))
}

/// `τ = max(σ_min, c μ^a / (μ^a + b))`.
pub fn update_tau_rolloff(mu: f64, a: f64, b: f64, c: f64, sigma_min: f64) -> f64 {
    let ma = mu.powf(a);
    sigma_min.max(c * ma / (ma + b))
}

/// `ξ = k min(p) / Σ p` over nonnegative products; 1 when all vanish.
pub fn loqo_xi(products: &[f64]) -> f64 {
    let sum: f64 = products.iter().sum();
    if products.is_empty() || !(sum > 0.0) {
        return 1.0;
    }
    let min = products.iter().cloned().fold(f64::INFINITY, f64::min);
    (products.len() as f64 * min / sum).clamp(0.0, 1.0)
}

/// `σ = γ min((1 − r)(1 − ξ)/ξ, 2)³`.
pub fn loqo_sigma(xi: f64, gamma: f64, r: f64) -> f64 {
    let t = if xi > 0.0 { (1.0 - r) * (1.0 - xi) / xi } else { f64::INFINITY };
    gamma * t.min(2.0).powi(3)
}

/// LOQO-style τ from the upper-level products `x1_i x2_i`.
pub fn update_tau_loqo(x1: &[f64], x2: &[f64], gamma: f64, r: f64, sigma_min: f64) -> f64 {
    let prods: Vec<f64> = x1.iter().zip(x2).map(|(a, b)| (a * b).abs()).collect();
    if prods.is_empty() {
        return sigma_min;
    }
    let xi = loqo_xi(&prods);
    let avg = prods.iter().sum::<f64>() / prods.len() as f64;
    sigma_min.max(loqo_sigma(xi, gamma, r) * avg)
}

/// LOQO μ: in `Mpcc` mode ξ and the average run over the bound products
/// `xz` and the upper-level products `x1x2`; `Classic` uses `xz` only.
pub fn update_mu_loqo(xz: &[f64], x1x2: &[f64], mode: LoqoMode, gamma: f64, r: f64, mu_min: f64) -> f64 {
    let prods: Vec<f64> = match mode {
        LoqoMode::Mpcc => xz.iter().chain(x1x2).map(|v| v.abs()).collect(),
        LoqoMode::Classic => xz.iter().map(|v| v.abs()).collect(),
    };
    if prods.is_empty() {
        return mu_min;
    }
    let xi = loqo_xi(&prods);
    let avg = prods.iter().sum::<f64>() / prods.len() as f64;
    mu_min.max(loqo_sigma(xi, gamma, r) * avg)
}

/// Bound relaxation Ψ: `τμ / (μ x₂ + τζ)` when `ζ >= 0` and the denominator
/// is positive, else `δ_max`.
pub fn psi(zeta: f64, x2: f64, tau: f64, mu: f64, delta_max: f64) -> f64 {
    let den = mu * x2 + tau * zeta;
    if zeta >= 0.0 && den > 0.0 {
        tau * mu / den
    } else {
        delta_max
    }
}

/// Per-pair data for one endgame pass.
#[derive(Debug, Clone, Copy)]
pub struct EndgamePair {
    pub x1: f64,
    pub x2: f64,
    pub z1: f64,
    pub z2: f64,
    pub z_s: f64,
    pub tau: f64,
}

/// One endgame pass. Estimates `ζ̂1 = z1 − z_s x2`, `ζ̂2 = z2 − z_s x1`; a
/// pair whose estimate is at most `−resid^ξ` gets its bound relaxed (first
/// side checked first). δ never decreases. Returns true if any δ changed.
pub fn endgame_step(
    pairs: &[EndgamePair],
    residual_norm: f64,
    xi: f64,
    mu: f64,
    delta_max: f64,
    delta1: &mut [f64],
    delta2: &mut [f64],
) -> bool {
    let thresh = residual_norm.powf(xi);
    let mut changed = false;
    for (i, p) in pairs.iter().enumerate() {
        let zeta1 = p.z1 - p.z_s * p.x2;
        let zeta2 = p.z2 - p.z_s * p.x1;
        if zeta1 <= -thresh {
            let d = psi(zeta1, p.x2, p.tau, mu, delta_max).min(delta_max);
            if d > delta1[i] {
                delta1[i] = d;
                changed = true;
            }
        } else if zeta2 <= -thresh {
            let d = psi(zeta2, p.x1, p.tau, mu, delta_max).min(delta_max);
            if d > delta2[i] {
                delta2[i] = d;
                changed = true;
            }
        }
    }
    changed
}
