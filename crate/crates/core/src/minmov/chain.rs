//! Exact prox of weighted total variation on chains and cycles.
//!
//! Chain: minimise λ Σₑ ωₑ |w_{e+1} − wₑ| + ½ Σᵢ mᵢ (wᵢ − fᵢ)² by the
//! dynamic program over piecewise-linear derivatives of the cost-to-go
//! (forward pass clamps at ±λωₑ, backward pass clamps the argmin).

use std::collections::VecDeque;

#[derive(Clone, Copy)]
struct Knot {
    x: f64,
    da: f64,
    db: f64,
}

/// Exact minimiser on a free-ended chain. `weights` has one entry per edge.
pub fn prox_chain(f: &[f64], masses: &[f64], weights: &[f64], lambda: f64) -> Vec<f64> {
    let m = f.len();
    debug_assert_eq!(masses.len(), m);
    debug_assert_eq!(weights.len() + 1, m);
    if m == 1 {
        return f.to_vec();
    }
    let mut knots: VecDeque<Knot> = VecDeque::with_capacity(2 * m);
    let (mut al, mut bl) = (masses[0], -masses[0] * f[0]);
    let (mut ar, mut br) = (al, bl);
    let mut lo = vec![0.0; m - 1];
    let mut hi = vec![0.0; m - 1];
    for k in 0..m - 1 {
        let l = lambda * weights[k];
        let (mut a, mut b) = (al, bl);
        while let Some(kn) = knots.front() {
            if a * kn.x + b > -l {
                break;
            }
            a += kn.da;
            b += kn.db;
            knots.pop_front();
        }
        lo[k] = (-l - b) / a;
        knots.push_front(Knot { x: lo[k], da: a, db: b + l });
        al = 0.0;
        bl = -l;

        let (mut a, mut b) = (ar, br);
        while let Some(kn) = knots.back() {
            if a * kn.x + b < l {
                break;
            }
            a -= kn.da;
            b -= kn.db;
            knots.pop_back();
        }
        hi[k] = (l - b) / a;
        knots.push_back(Knot { x: hi[k], da: -a, db: l - b });
        ar = 0.0;
        br = l;

        let (mk, fk) = (masses[k + 1], f[k + 1]);
        al += mk;
        bl -= mk * fk;
        ar += mk;
        br -= mk * fk;
    }
    let (mut a, mut b) = (al, bl);
    while let Some(kn) = knots.front() {
        if a * kn.x + b >= 0.0 {
            break;
        }
        a += kn.da;
        b += kn.db;
        knots.pop_front();
    }
    let mut w = vec![0.0; m];
    w[m - 1] = -b / a;
    for k in (0..m - 1).rev() {
        w[k] = w[k + 1].clamp(lo[k], hi[k]);
    }
    w
}

/// Exact minimiser on a cycle; `weights[M−1]` is the wrap edge (M−1, 0).
///
/// The wrap-edge dual c ∈ [−1, 1] is fixed, the remaining chain is solved
/// exactly, and c is adjusted until it is a subgradient of |w₀ − w_{M−1}|.
/// The mismatch w₀ − w_{M−1} is piecewise linear and non-increasing in c, so
/// a bracketing secant (Illinois) iteration terminates on an exact root.
pub fn prox_cycle(f: &[f64], masses: &[f64], weights: &[f64], lambda: f64) -> Vec<f64> {
    let m = f.len();
    debug_assert_eq!(weights.len(), m);
    let q = lambda * weights[m - 1];
    let mut g_buf = f.to_vec();
    let mut solve = |c: f64| -> (Vec<f64>, f64) {
        g_buf.copy_from_slice(f);
        g_buf[0] -= q * c / masses[0];
        g_buf[m - 1] += q * c / masses[m - 1];
        let w = prox_chain(&g_buf, masses, &weights[..m - 1], lambda);
        let gap = w[0] - w[m - 1];
        (w, gap)
    };
    let (w_hi, g_hi) = solve(1.0);
    if g_hi >= 0.0 {
        return w_hi;
    }
    let (w_lo, g_lo) = solve(-1.0);
    if g_lo <= 0.0 {
        return w_lo;
    }
    let scale = f.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    let (mut a, mut ga, mut b, mut gb) = (-1.0f64, g_lo, 1.0f64, g_hi);
    let (mut best, mut best_g) = (w_lo, g_lo);
    let mut side = 0i8;
    for _ in 0..200 {
        let c = if gb != ga { (a * gb - b * ga) / (gb - ga) } else { 0.5 * (a + b) };
        let c = if c > a && c < b { c } else { 0.5 * (a + b) };
        let (w, g) = solve(c);
        if g.abs() < best_g.abs() {
            best = w;
            best_g = g;
        }
        if g.abs() <= 1e-15 * scale || b - a <= 1e-16 {
            break;
        }
        if g > 0.0 {
            a = c;
            ga = g;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        } else {
            b = c;
            gb = g;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        }
    }
    best
}
