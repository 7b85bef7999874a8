//! Levi-Civita connection and curvature of a jet-valued metric.
//!
//! Christoffel symbols are formed as jets, so one further differentiation
//! gives the Riemann tensor at the base point. The metric therefore needs
//! jet order at least 2.

use nalgebra::DMatrix;

use crate::epsnum::Jet;
use crate::error::{Error, Result};

use super::tensor::JMat;

/// Dense rank-4 array indexed `[a][b][c][d]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Array4 {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Array4 {
    pub fn zeros(dim: usize) -> Array4 {
        Array4 {
            dim,
            data: vec![0.0; dim * dim * dim * dim],
        }
    }

    #[inline]
    pub fn at(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.dim;
        self.data[((a * n + b) * n + c) * n + d]
    }

    #[inline]
    pub fn at_mut(&mut self, a: usize, b: usize, c: usize, d: usize) -> &mut f64 {
        let n = self.dim;
        &mut self.data[((a * n + b) * n + c) * n + d]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn sub(&self, o: &Array4) -> Array4 {
        Array4 {
            dim: self.dim,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Array4 {
        Array4 {
            dim: self.dim,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Contraction `Ric_bd = R^a_bad` of a `(1,3)` tensor.
    pub fn ricci(&self) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |b, d| (0..n).map(|a| self.at(a, b, a, d)).sum())
    }

    /// Lowers the first index: `R_abcd = g_ae R^e_bcd`.
    pub fn lower_first(&self, g: &DMatrix<f64>) -> Array4 {
        let n = self.dim;
        let mut out = Array4::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        *out.at_mut(a, b, c, d) =
                            (0..n).map(|e| g[(a, e)] * self.at(e, b, c, d)).sum();
                    }
                }
            }
        }
        out
    }

    /// The endomorphism `R(∂_c, ∂_d)` as a matrix `[a][b]`.
    pub fn endomorphism(&self, c: usize, d: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |a, b| self.at(a, b, c, d))
    }
}

/// Connection and curvature at a point.
///
/// `christoffel[a][b][c] = Γ^a_bc` and `riemann^a_bcd` is the component of
/// `R(∂_c, ∂_d)∂_b` along `∂_a`.
#[derive(Clone, Debug)]
pub struct CurvatureData {
    pub dim: usize,
    pub christoffel: Vec<f64>,
    pub riemann: Array4,
    pub ricci: DMatrix<f64>,
    pub scal: f64,
    /// `scal / (4n(n+2))` when `dim = 4n`.
    pub nu: Option<f64>,
}

impl CurvatureData {
    pub fn gamma(&self, a: usize, b: usize, c: usize) -> f64 {
        let n = self.dim;
        self.christoffel[(a * n + b) * n + c]
    }
}

/// Christoffel symbols `Γ^a_bc = ½ g^{ad}(∂_b g_dc + ∂_c g_db − ∂_d g_bc)` as
/// jets of one order less than `g`, indexed `[a][b][c]`.
pub fn christoffel(g: &JMat) -> Result<Vec<Jet>> {
    check_metric(g)?;
    let n = g.rows();
    let ginv = g.inverse("metric")?;
    let dg: Vec<JMat> = (0..n).map(|k| g.d(k)).collect();
    // first kind Γ_dbc
    let mut first = Vec::with_capacity(n * n * n);
    for d in 0..n {
        for b in 0..n {
            for c in 0..n {
                let v = (dg[b].get(d, c) + dg[c].get(d, b) - dg[d].get(b, c)).scale(0.5);
                first.push(v);
            }
        }
    }
    let mut out = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut acc = ginv.get(a, 0) * &first[b * n + c];
                for d in 1..n {
                    acc += ginv.get(a, d) * &first[(d * n + b) * n + c];
                }
                out.push(acc);
            }
        }
    }
    Ok(out)
}

fn check_metric(g: &JMat) -> Result<()> {
    let n = g.rows();
    if n != g.cols() || n == 0 {
        return Err(Error::usage("metric components must be a nonempty square matrix"));
    }
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (g.get(i, j).value(), g.get(j, i).value());
            if (a - b).abs() > 1e-9 * (1.0 + a.abs().max(b.abs())) {
                return Err(Error::usage(format!("metric is not symmetric at ({i},{j})")));
            }
        }
    }
    if g.get(0, 0).order() < 2 {
        return Err(Error::usage("curvature needs metric jets of order at least 2"));
    }
    Ok(())
}

/// Riemann tensor from Christoffel jets (order ≥ 1).
pub fn riemann_from_christoffel(gamma: &[Jet], n: usize) -> Array4 {
    let gv: Vec<f64> = gamma.iter().map(|x| x.value()).collect();
    let gi = |a: usize, b: usize, c: usize| gv[(a * n + b) * n + c];
    // dgam[k][(a,b,c)] = ∂_k Γ^a_bc
    let dgam: Vec<Vec<f64>> = (0..n)
        .map(|k| gamma.iter().map(|x| x.d(k).value()).collect())
        .collect();
    let mut r = Array4::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = dgam[c][(a * n + d) * n + b] - dgam[d][(a * n + c) * n + b];
                    for e in 0..n {
                        v += gi(a, c, e) * gi(e, d, b) - gi(a, d, e) * gi(e, c, b);
                    }
                    *r.at_mut(a, b, c, d) = v;
                }
            }
        }
    }
    r
}

/// Full curvature data of a metric with jet order ≥ 2.
pub fn curvature(g: &JMat) -> Result<CurvatureData> {
    let n = g.rows();
    let gamma = christoffel(g)?;
    let riemann = riemann_from_christoffel(&gamma, n);
    let ricci = riemann.ricci();
    let gval = g.value();
    let ginv = gval.clone().try_inverse().ok_or(Error::Degenerate {
        what: "metric".into(),
        step: n,
        pivot: 0.0,
    })?;
    let scal = ginv.component_mul(&ricci).sum();
    let nu = if n % 4 == 0 {
        let m = (n / 4) as f64;
        Some(scal / (4.0 * m * (m + 2.0)))
    } else {
        None
    };
    Ok(CurvatureData {
        dim: n,
        christoffel: gamma.iter().map(|x| x.value()).collect(),
        riemann,
        ricci,
        scal,
        nu,
    })
}

/// Largest `|∇_c g_ab|` with `∇_c g_ab = ∂_c g_ab − Γ^d_ca g_db − Γ^d_cb g_ad`.
pub fn metric_compatibility_residual(g: &JMat) -> Result<f64> {
    let n = g.rows();
    let gamma = christoffel(g)?;
    let gv = g.value();
    let gam = |a: usize, b: usize, c: usize| gamma[(a * n + b) * n + c].value();
    let mut worst = 0.0_f64;
    for c in 0..n {
        let dg = g.d(c).value();
        for a in 0..n {
            for b in 0..n {
                let mut v = dg[(a, b)];
                for d in 0..n {
                    v -= gam(d, c, a) * gv[(d, b)] + gam(d, c, b) * gv[(a, d)];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

/// Relative residual of the algebraic symmetries of `R_abcd` (lowered) and
/// the first Bianchi identity.
pub fn riemann_symmetry_residual(r: &Array4, g: &DMatrix<f64>) -> f64 {
    let n = r.dim;
    let low = r.lower_first(g);
    let scale = low.max_abs().max(1.0);
    let mut worst = 0.0_f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let v = low.at(a, b, c, d);
                    worst = worst
                        .max((v + low.at(a, b, d, c)).abs())
                        .max((v + low.at(b, a, c, d)).abs())
                        .max((v - low.at(c, d, a, b)).abs())
                        .max((v + low.at(a, c, d, b) + low.at(a, d, b, c)).abs());
                }
            }
        }
    }
    worst / scale
}

/// Covariant derivative `(∇_c J)^a_b` of an endomorphism, indexed `[c][(a,b)]`.
pub fn covariant_derivative_endomorphism(g: &JMat, j: &JMat) -> Result<Vec<DMatrix<f64>>> {
    let n = g.rows();
    let gamma = christoffel(g)?;
    let gam = |a: usize, b: usize, c: usize| gamma[(a * n + b) * n + c].value();
    let jv = j.value();
    Ok((0..n)
        .map(|c| {
            let dj = j.d(c).value();
            DMatrix::from_fn(n, n, |a, b| {
                let mut v = dj[(a, b)];
                for e in 0..n {
                    v += gam(a, c, e) * jv[(e, b)] - gam(e, c, b) * jv[(a, e)];
                }
                v
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epsnum::{seed, JetSpace};

    fn sin(x: &Jet) -> Jet {
        let v = x.value();
        x.compose_series(&[v.sin(), v.cos(), -v.sin() / 2.0, -v.cos() / 6.0, v.sin() / 24.0])
    }

    #[test]
    fn flat_metric_has_no_curvature() {
        let sp = JetSpace::get(3, 2).unwrap();
        let g = JMat::from_f64(&sp, &DMatrix::from_diagonal(&nalgebra::dvector![1.0, -1.0, 2.0]));
        let c = curvature(&g).unwrap();
        assert_eq!(c.riemann.max_abs(), 0.0);
        assert_eq!(c.scal, 0.0);
    }

    #[test]
    fn round_sphere_scalar_curvature() {
        let sp = JetSpace::get(2, 2).unwrap();
        let x = seed(&sp, &[0.9, 0.3]);
        let s = sin(&x[0]);
        let g = JMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => x[0].constant_like(1.0),
            (1, 1) => &s * &s,
            _ => x[0].zero_like(),
        });
        let c = curvature(&g).unwrap();
        assert!((c.scal - 2.0).abs() < 1e-12, "scal = {}", c.scal);
        assert!(c.nu.is_none());
        assert!(riemann_symmetry_residual(&c.riemann, &g.value()) < 1e-12);
        assert!(metric_compatibility_residual(&g).unwrap() < 1e-14);
    }

    #[test]
    fn low_order_metric_is_rejected() {
        let sp = JetSpace::get(2, 1).unwrap();
        let g = JMat::identity(&sp, 2);
        assert!(matches!(curvature(&g), Err(Error::Usage(_))));
    }

    #[test]
    fn singular_metric_reports_degeneracy() {
        let sp = JetSpace::get(2, 2).unwrap();
        let g = JMat::from_f64(&sp, &DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]));
        assert!(matches!(curvature(&g), Err(Error::Degenerate { .. })));
    }
}
