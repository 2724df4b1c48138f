use std::collections::{BTreeMap, HashSet};

use nalgebra::{DMatrix, DVector};

use super::SpectralOperator;
use crate::error::{Result, TvError};

/// Relative duality gap required of [`prox_tv_hs`](super::prox_tv_hs).
pub const PROX_GAP_TOL: f64 = 1e-9;

const DUAL_SLACK: f64 = 1e-12;

/// Jump edges of the prox output with the sign of w_{e+1} − w_e.
pub type ActiveSet = BTreeMap<usize, i8>;

#[derive(Debug, Clone, PartialEq)]
pub struct HsProx {
    pub w: Vec<f64>,
    /// Dual edge field; z_e = sgn(Δw_e) on jumps and |z| ≤ 1.
    pub z: Vec<f64>,
    pub gap: f64,
    pub iterations: usize,
    pub active: ActiveSet,
}

fn forward_diff(w: &[f64]) -> Vec<f64> {
    let m = w.len();
    (0..m).map(|e| w[(e + 1) % m] - w[e]).collect()
}

/// Dᵀz with (Dᵀz)_i = z_{i−1} − z_i.
fn adjoint_diff(z: &[f64]) -> Vec<f64> {
    let m = z.len();
    (0..m).map(|i| z[(i + m - 1) % m] - z[i]).collect()
}

/// Primal objective and duality gap for the pair (w, clamp(z)).
fn duality_gap(op: &SpectralOperator, f: &[f64], w: &[f64], z: &[f64], h: f64, lambda: f64) -> (f64, f64) {
    let tv: f64 = forward_diff(w).iter().map(|d| d.abs()).sum();
    let r: Vec<f64> = w.iter().zip(f).map(|(a, b)| a - b).collect();
    let kr = op.metric(&r);
    let primal = lambda * tv + 0.5 * h * r.iter().zip(&kr).map(|(a, b)| a * b).sum::<f64>();
    let zc: Vec<f64> = z.iter().map(|v| v.clamp(-1.0, 1.0)).collect();
    let q: Vec<f64> = adjoint_diff(&zc).iter().map(|v| lambda * v).collect();
    let aq = op.metric_inverse(&q);
    let dual = q.iter().zip(f).map(|(a, b)| a * b).sum::<f64>()
        - 0.5 / h * q.iter().zip(&aq).map(|(a, b)| a * b).sum::<f64>();
    (primal, (primal - dual).max(0.0))
}

/// Primal-dual active-set solver for
/// min_w λ Σ|Δw| + ½ h (w − f)ᵀ K (w − f), K = |m|^{−2s} (mean mode 1).
///
/// For a guessed set of jump edges with signs, w is constant between jumps
/// and the segment values solve a small SPD system. The dual field is then
/// rebuilt from hK(f − w) = λDᵀz; jumps with the wrong sign are dropped and
/// edges with |z| > 1 are added until both sets are stable.
pub fn prox_active_set(
    op: &SpectralOperator,
    f: &[f64],
    h: f64,
    lambda: f64,
    warm: Option<&ActiveSet>,
) -> Result<HsProx> {
    let m = f.len();
    let max_iter = 100 + 2 * m;
    let mut active: ActiveSet = match warm {
        Some(a) => a.clone(),
        None => forward_diff(f)
            .iter()
            .enumerate()
            .filter(|(_, d)| d.abs() > 1e-14)
            .map(|(e, d)| (e, if *d > 0.0 { 1 } else { -1 }))
            .collect(),
    };
    let mut seen: HashSet<Vec<(usize, i8)>> = HashSet::new();
    let mean = f.iter().sum::<f64>() / m as f64;
    let mut last_gap = f64::NAN;
    for it in 0..max_iter {
        if !seen.insert(active.iter().map(|(e, s)| (*e, *s)).collect()) {
            return Err(TvError::Convergence { iterations: it, achieved: last_gap });
        }
        let flat = active.len() < 2;
        let (w, z) = if flat {
            flat_candidate(op, f, h, lambda, mean)
        } else {
            segment_candidate(op, f, h, lambda, &active)?
        };
        let mut next = ActiveSet::new();
        if flat {
            let (imax, zmax) = argext(&z, |a, b| a > b);
            let (imin, zmin) = argext(&z, |a, b| a < b);
            if zmax > 1.0 + DUAL_SLACK || zmin < -1.0 - DUAL_SLACK {
                next.insert(imax, 1);
                next.insert(imin, -1);
            }
        } else {
            let dw = forward_diff(&w);
            next = active.clone();
            next.retain(|e, s| dw[*e] * (*s as f64) > 0.0);
            for (e, ze) in z.iter().enumerate() {
                if !active.contains_key(&e) && ze.abs() > 1.0 + DUAL_SLACK {
                    next.insert(e, if *ze > 0.0 { 1 } else { -1 });
                }
            }
        }
        let (primal, gap) = duality_gap(op, f, &w, &z, h, lambda);
        last_gap = gap;
        if next == active || (flat && next.is_empty()) {
            if gap <= PROX_GAP_TOL * primal.max(1.0) {
                return Ok(HsProx { w, z, gap, iterations: it + 1, active: next });
            }
            return Err(TvError::Convergence { iterations: it + 1, achieved: gap });
        }
        active = next;
    }
    Err(TvError::Convergence { iterations: max_iter, achieved: last_gap })
}

fn argext(z: &[f64], better: impl Fn(f64, f64) -> bool) -> (usize, f64) {
    let mut best = (0, z[0]);
    for (i, v) in z.iter().enumerate().skip(1) {
        if better(*v, best.1) {
            best = (i, *v);
        }
    }
    best
}

/// Constant candidate w ≡ mean(f) with the centred dual field.
fn flat_candidate(op: &SpectralOperator, f: &[f64], h: f64, lambda: f64, mean: f64) -> (Vec<f64>, Vec<f64>) {
    let w = vec![mean; f.len()];
    let r: Vec<f64> = f.iter().map(|v| v - mean).collect();
    let g = op.metric(&r);
    let mut z = Vec::with_capacity(f.len());
    let mut cur = 0.0;
    for gi in &g {
        cur -= h / lambda * gi;
        z.push(cur);
    }
    let hi = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = z.iter().cloned().fold(f64::INFINITY, f64::min);
    let mid = 0.5 * (hi + lo);
    (w, z.iter().map(|v| v - mid).collect())
}

fn segment_candidate(
    op: &SpectralOperator,
    f: &[f64],
    h: f64,
    lambda: f64,
    active: &ActiveSet,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = f.len();
    let edges: Vec<usize> = active.keys().copied().collect();
    let k = edges.len();
    // Segment j runs from node edges[j]+1 through node edges[j+1] (cyclic).
    let mut seg = vec![0usize; m];
    for j in 0..k {
        let (a, b) = ((edges[j] + 1) % m, edges[(j + 1) % k]);
        let mut i = a;
        loop {
            seg[i] = j;
            if i == b {
                break;
            }
            i = (i + 1) % m;
        }
    }
    let mut signs = vec![0.0; m];
    for (e, s) in active {
        signs[*e] = *s as f64;
    }
    let dts = adjoint_diff(&signs);
    let kf = op.metric(f);
    let mut gram = DMatrix::<f64>::zeros(k, k);
    let mut rhs = DVector::<f64>::zeros(k);
    for j in 0..k {
        let ind: Vec<f64> = seg.iter().map(|s| if *s == j { 1.0 } else { 0.0 }).collect();
        let col = op.metric(&ind);
        for (i, c) in col.iter().enumerate() {
            gram[(seg[i], j)] += h * c;
        }
    }
    for i in 0..m {
        rhs[seg[i]] += h * kf[i] - lambda * dts[i];
    }
    let v = gram
        .clone()
        .cholesky()
        .map(|c| c.solve(&rhs))
        .or_else(|| gram.lu().solve(&rhs))
        .ok_or_else(|| TvError::Degenerate("singular segment system".into()))?;
    let w: Vec<f64> = seg.iter().map(|j| v[*j]).collect();
    let r: Vec<f64> = f.iter().zip(&w).map(|(a, b)| a - b).collect();
    let g = op.metric(&r);
    let mut z = vec![0.0; m];
    for j in 0..k {
        let (a, b) = ((edges[j] + 1) % m, edges[(j + 1) % k]);
        let mut cur = signs[edges[j]];
        let mut i = a;
        while i != b {
            cur -= h / lambda * g[i];
            z[i] = cur;
            i = (i + 1) % m;
        }
        z[b] = signs[b];
    }
    Ok((w, z))
}
