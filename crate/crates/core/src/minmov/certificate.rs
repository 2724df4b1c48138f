use serde::{Deserialize, Serialize};

use crate::core::GridSignal;
use crate::error::{Result, TvError};

/// Dual edge field reconstructed from a claimed prox output, with the three
/// optimality residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxCertificate {
    /// Normalised dual field per edge; |zₑ| ≤ 1 for a valid output.
    pub z: Vec<f64>,
    /// max(|zₑ| − 1, 0).
    pub bound_violation: f64,
    /// Mass balance left over by (w − f)/λ = div z, in units of z.
    pub divergence_residual: f64,
    /// |Σₑ ωₑ zₑ Δwₑ − TV(w)|.
    pub pairing_gap: f64,
}

impl ProxCertificate {
    pub fn max_residual(&self) -> f64 {
        self.bound_violation.max(self.divergence_residual).max(self.pairing_gap)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

/// Checks w = argmin λ TV(w) + ½‖w − f‖² through its dual field.
///
/// Stationarity at node i reads λωᵢzᵢ − λω_{i−1}z_{i−1} = mᵢ(wᵢ − fᵢ), so the
/// fluxes are partial sums of mᵢ(wᵢ − fᵢ). On a cycle the free constant is
/// fitted to the jump edges (or centred in its feasible range if w is flat).
pub fn verify_subdifferential(w: &GridSignal, f: &GridSignal, lambda: f64) -> Result<ProxCertificate> {
    if w.len() != f.len() || w.geometry() != f.geometry() || w.spacing() != f.spacing() {
        return Err(TvError::InvalidInput("w and f live on different grids".into()));
    }
    if !(lambda > 0.0) {
        return Err(TvError::InvalidInput("lambda must be positive".into()));
    }
    let masses = w.masses();
    let weights = w.edge_weights();
    let (ws, fs) = (w.samples(), f.samples());
    let ne = w.edge_count();
    let mut partial = Vec::with_capacity(w.len());
    let mut acc = 0.0;
    for i in 0..w.len() {
        acc += masses[i] * (ws[i] - fs[i]);
        partial.push(acc);
    }
    let wmax = weights.iter().fold(0.0f64, |a, b| a.max(*b));
    let divergence_residual = partial.last().unwrap().abs() / (lambda * wmax);
    let diff = w.differences();
    let scale = fs.iter().chain(ws).fold(1.0f64, |a, b| a.max(b.abs()));
    let jump_tol = 1e-9 * scale;
    let offset = if w.is_periodic() {
        let jumps: Vec<f64> = (0..ne)
            .filter(|e| diff[*e].abs() > jump_tol)
            .map(|e| lambda * weights[e] * diff[e].signum() - partial[e])
            .collect();
        if jumps.is_empty() {
            let lo = (0..ne).map(|e| -lambda * weights[e] - partial[e]).fold(f64::NEG_INFINITY, f64::max);
            let hi = (0..ne).map(|e| lambda * weights[e] - partial[e]).fold(f64::INFINITY, f64::min);
            0.5 * (lo + hi)
        } else {
            jumps.iter().sum::<f64>() / jumps.len() as f64
        }
    } else {
        0.0
    };
    let z: Vec<f64> = (0..ne).map(|e| (partial[e] + offset) / (lambda * weights[e])).collect();
    let bound_violation = z.iter().fold(0.0f64, |a, v| a.max(v.abs() - 1.0));
    let pairing: f64 = (0..ne).map(|e| weights[e] * z[e] * diff[e]).sum();
    let pairing_gap = (pairing - w.total_variation()).abs();
    Ok(ProxCertificate { z, bound_violation, divergence_residual, pairing_gap })
}
