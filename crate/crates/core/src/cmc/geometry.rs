//! Pointwise geometry of a radial graph `r = R(x)` over a 2-dimensional link.
//!
//! With `F = r − R(x)` the tangent frame is `e_i = R_i ∂_r + ∂_i`, the
//! induced metric `γ_ij = A R_i R_j + B ĝ_ij`, the unit normal
//! `ν^a = g^{aa} dF_a / |dF|` (pointing toward larger r), and
//!
//! ```text
//! h_ij = −|dF|⁻¹ dF_a (∂_i e_j^a + Γ^a_bc e_i^b e_j^c),   ∂_i e_j^r = R_ij,
//! ```
//!
//! which makes slices of g_C have `h = γ / r > 0`.

use crate::cone::{christoffel, MetricJet};
use crate::dual::Scalar;
use crate::link::LinkSample;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) struct GraphPoint<S> {
    pub mean: S,
    pub h_sq: S,
    /// √det γ against the unit round measure.
    pub area_density: S,
    pub gamma_inv: [[S; 2]; 2],
    /// Contravariant unit normal in the chart `(r, θ, φ)`.
    pub normal: [S; 3],
}

pub(crate) fn graph_point<S: Scalar>(
    jet: &MetricJet<S>,
    link: &LinkSample,
    rd: [S; 2],
    rdd: [[S; 2]; 2],
) -> Result<GraphPoint<S>> {
    let (g, dg) = jet.components(link);
    let gam = christoffel(&g, &dg);
    let zero = S::cst(0.0);

    let mut gamma = [[zero; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            gamma[i][j] = jet.a * rd[i] * rd[j];
        }
        gamma[i][i] = gamma[i][i] + jet.b * link.ghat[i];
    }
    let det = gamma[0][0] * gamma[1][1] - gamma[0][1] * gamma[1][0];
    if det.re() <= 0.0 || !det.re().is_finite() {
        return Err(Error::GraphRegularity(format!(
            "induced metric is not positive definite (det = {:.3e})",
            det.re()
        )));
    }
    let inv_det = det.recip();
    let gamma_inv = [
        [gamma[1][1] * inv_det, -gamma[0][1] * inv_det],
        [-gamma[1][0] * inv_det, gamma[0][0] * inv_det],
    ];

    let df = [S::cst(1.0), -rd[0], -rd[1]];
    let mut df_norm2 = zero;
    for a in 0..3 {
        df_norm2 = df_norm2 + df[a] * df[a] / g[a];
    }
    let df_norm = df_norm2.sqrt();
    let inv_norm = df_norm.recip();

    // Frame components: e_i^0 = R_i, e_i^{k+1} = δ_ik.
    let frame = |i: usize, a: usize| -> S {
        if a == 0 {
            rd[i]
        } else if a == i + 1 {
            S::cst(1.0)
        } else {
            zero
        }
    };
    let mut h = [[zero; 2]; 2];
    for i in 0..2 {
        for j in i..2 {
            let mut acc = df[0] * rdd[i][j];
            for (a, dfa) in df.iter().enumerate() {
                let mut conn = zero;
                for b in 0..3 {
                    let eb = frame(i, b);
                    if eb.re() == 0.0 && b != 0 {
                        continue;
                    }
                    for c in 0..3 {
                        let ec = frame(j, c);
                        if ec.re() == 0.0 && c != 0 {
                            continue;
                        }
                        conn = conn + gam[a][b][c] * eb * ec;
                    }
                }
                acc = acc + *dfa * conn;
            }
            h[i][j] = -acc * inv_norm;
            h[j][i] = h[i][j];
        }
    }

    let mut mean = zero;
    for i in 0..2 {
        for j in 0..2 {
            mean = mean + gamma_inv[i][j] * h[i][j];
        }
    }
    // |h|² = tr((γ⁻¹ h)²)
    let mut s = [[zero; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            s[i][j] = gamma_inv[i][0] * h[0][j] + gamma_inv[i][1] * h[1][j];
        }
    }
    let h_sq = s[0][0] * s[0][0] + s[0][1] * s[1][0] * 2.0 + s[1][1] * s[1][1];

    let round_det = (link.ghat[0] * link.ghat[1]).sqrt();
    let normal = [
        df[0] / g[0] * inv_norm,
        df[1] / g[1] * inv_norm,
        df[2] / g[2] * inv_norm,
    ];
    Ok(GraphPoint {
        mean,
        h_sq,
        area_density: det.sqrt() / round_det,
        gamma_inv,
        normal,
    })
}
