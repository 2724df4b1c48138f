use serde::{Deserialize, Serialize};

use crate::core::Signature;
use crate::error::{Result, TvError};

/// Default number of cells for [`lambda_saint_venant`] (even, for Simpson).
pub const SV_CELLS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SvGeometry {
    Ball { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl SvGeometry {
    fn bounds(&self) -> Result<(f64, f64)> {
        let (a, b) = match *self {
            SvGeometry::Ball { radius } => (0.0, radius),
            SvGeometry::Annulus { inner, outer } => {
                if !(inner > 0.0) {
                    return Err(TvError::Geometry("annulus inner radius must be positive".into()));
                }
                (inner, outer)
            }
        };
        if !(b > a && b.is_finite()) {
            return Err(TvError::Geometry(format!("invalid radii ({a}, {b})")));
        }
        Ok((a, b))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaintVenantSolution {
    pub n: u32,
    pub geometry: SvGeometry,
    pub r: Vec<f64>,
    pub w: Vec<f64>,
}

/// Solves −w″ − (n−1)w′/r = 1, w = 0 on the boundary, with a vertex-centred
/// finite-volume scheme on `cells` equal cells (exact for the ball).
pub fn saint_venant_radial(n: u32, geometry: SvGeometry, cells: usize) -> Result<SaintVenantSolution> {
    if n < 1 {
        return Err(TvError::Domain("dimension must be at least 1".into()));
    }
    if cells < 2 {
        return Err(TvError::InvalidInput("need at least 2 cells".into()));
    }
    let (a, b) = geometry.bounds()?;
    let h = (b - a) / cells as f64;
    let r: Vec<f64> = (0..=cells).map(|i| a + i as f64 * h).collect();
    let nf = n as f64;
    let flux = |x: f64| x.powi(n as i32 - 1) / h;
    let volume = |lo: f64, hi: f64| (hi.powi(n as i32) - lo.powi(n as i32)) / nf;
    let ball = matches!(geometry, SvGeometry::Ball { .. });
    // Unknowns: nodes first..cells−1 (node `cells` is the outer boundary).
    let first = if ball { 0 } else { 1 };
    let (mut sub, mut diag, mut sup, mut rhs) = (vec![], vec![], vec![], vec![]);
    for i in first..cells {
        let hi = r[i] + 0.5 * h;
        if i == 0 {
            sub.push(0.0);
            diag.push(flux(hi));
            sup.push(-flux(hi));
            rhs.push(volume(0.0, hi));
        } else {
            let lo = r[i] - 0.5 * h;
            sub.push(-flux(lo));
            diag.push(flux(lo) + flux(hi));
            sup.push(-flux(hi));
            rhs.push(volume(lo, hi));
        }
    }
    let inner = thomas(&sub, &diag, &sup, &rhs);
    let mut w = vec![0.0; cells + 1];
    w[first..cells].copy_from_slice(&inner);
    Ok(SaintVenantSolution { n, geometry, r, w })
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..m {
        let den = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / den;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// λ = (∫_∂U χκ ν·∇w + ∫_∂U χ) / ∫_U w for the Saint-Venant function w of a
/// ball (signature of length 1) or annulus (inner, outer).
pub fn lambda_saint_venant(n: u32, geometry: SvGeometry, chi: &Signature) -> Result<f64> {
    let want = match geometry {
        SvGeometry::Ball { .. } => 1,
        SvGeometry::Annulus { .. } => 2,
    };
    if chi.len() != want {
        return Err(TvError::InvalidInput(format!("signature needs {want} entries, got {}", chi.len())));
    }
    let sol = saint_venant_radial(n, geometry, SV_CELLS)?;
    let (r, w) = (&sol.r, &sol.w);
    let nf = n as f64;
    let m = w.len() - 1;
    let h = r[1] - r[0];
    let area = |x: f64| x.powi(n as i32 - 1);
    // The common factor nωₙ is dropped from every integral.
    let mut num = 0.0;
    let outer = r[m];
    let dw_out = (3.0 * w[m] - 4.0 * w[m - 1] + w[m - 2]) / (2.0 * h);
    let chi_out = chi.get(want - 1);
    num += chi_out * area(outer) * ((nf - 1.0) / outer * dw_out + 1.0);
    if want == 2 {
        let inner = r[0];
        let dw_in = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h);
        // ν = −e_r, κ = −(n−1)/R₀, ν·∇w = −w′(R₀).
        num += chi.get(0) * area(inner) * ((nf - 1.0) / inner * dw_in + 1.0);
    }
    let f: Vec<f64> = w.iter().zip(r).map(|(w, r)| w * area(*r)).collect();
    let den = simpson(&f, h);
    if !(den > 0.0) {
        return Err(TvError::Degenerate("Saint-Venant function has no mass".into()));
    }
    Ok(num / den)
}

fn simpson(f: &[f64], h: f64) -> f64 {
    let m = f.len() - 1;
    let mut s = f[0] + f[m];
    for (i, v) in f.iter().enumerate().take(m).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}
