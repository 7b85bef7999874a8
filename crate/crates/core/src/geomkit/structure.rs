//! ε-quaternionic structures: algebra residuals, Nijenhuis tensor and the
//! model curvature tensor of the flat projective model.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::epsnum::Sign;
use crate::error::{Error, Result};

use super::curvature::Array4;
use super::tensor::JMat;

/// The signs `(ε₁, ε₂)`; `ε₃ = −ε₁ε₂` is derived, never stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signs {
    pub eps1: Sign,
    pub eps2: Sign,
}

impl Signs {
    pub fn new(eps1: Sign, eps2: Sign) -> Signs {
        Signs { eps1, eps2 }
    }

    pub fn eps3(&self) -> Sign {
        -(self.eps1 * self.eps2)
    }

    /// `ε_α` for `α ∈ {1, 2, 3}`; `ε₀ = −1` for the extra index 0.
    pub fn eps(&self, alpha: usize) -> Sign {
        match alpha {
            0 => Sign::MINUS,
            1 => self.eps1,
            2 => self.eps2,
            3 => self.eps3(),
            _ => panic!("structure index {alpha} out of range"),
        }
    }

    /// All four sign combinations, quaternionic first.
    pub fn all() -> [Signs; 4] {
        [
            Signs::new(Sign::MINUS, Sign::MINUS),
            Signs::new(Sign::MINUS, Sign::PLUS),
            Signs::new(Sign::PLUS, Sign::MINUS),
            Signs::new(Sign::PLUS, Sign::PLUS),
        ]
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// Fundamental 2-form matrix `ω = −ε Jᵀ g`, so that `J = ε g⁻¹ ω`.
pub fn kahler_form(g: &DMatrix<f64>, j: &DMatrix<f64>, eps: Sign) -> DMatrix<f64> {
    -(j.transpose() * g) * eps.f()
}

pub fn kahler_form_jet(g: &JMat, j: &JMat, eps: Sign) -> JMat {
    j.transpose().mul(g).scale(-eps.f())
}

/// Largest relative violation of the ε-quaternion algebra and of the
/// skew-symmetry of each `J_α` with respect to `g`.
pub fn quaternion_algebra_residual(g: &DMatrix<f64>, j: &[DMatrix<f64>; 3], s: Signs) -> f64 {
    let n = g.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let rel = |m: DMatrix<f64>, scale: f64| max_abs(&m) / scale.max(1.0);
    let mut worst = 0.0_f64;
    for a in 0..3 {
        let ja = &j[a];
        let sa = max_abs(ja);
        worst = worst.max(rel(ja * ja - &id * s.eps(a + 1).f(), sa * sa));
        worst = worst.max(rel(
            ja.transpose() * g + g * ja,
            sa * max_abs(g),
        ));
        for b in (a + 1)..3 {
            let jb = &j[b];
            worst = worst.max(rel(ja * jb + jb * ja, sa * max_abs(jb)));
        }
    }
    worst = worst.max(rel(&j[0] * &j[1] - &j[2], max_abs(&j[0]) * max_abs(&j[1])));
    worst
}

/// Nijenhuis tensor on coordinate frames:
/// `N^a_bc = J^e_b ∂_e J^a_c − J^e_c ∂_e J^a_b + J^a_e ∂_c J^e_b − J^a_e ∂_b J^e_c`,
/// indexed `[a][b][c]`. Requires `J² = ±Id` and jets of order ≥ 1.
pub fn nijenhuis(j: &JMat, tol: f64) -> Result<Vec<f64>> {
    let n = j.rows();
    let jv = j.value();
    let sq = &jv * &jv;
    let id = DMatrix::<f64>::identity(n, n);
    let scale = max_abs(&jv).powi(2).max(1.0);
    if max_abs(&(&sq - &id)) > tol * scale && max_abs(&(&sq + &id)) > tol * scale {
        return Err(Error::usage("Nijenhuis tensor needs J^2 = +Id or -Id"));
    }
    if j.get(0, 0).order() < 1 {
        return Err(Error::usage("Nijenhuis tensor needs jets of order at least 1"));
    }
    let dj: Vec<DMatrix<f64>> = (0..n).map(|k| j.d(k).value()).collect();
    let mut out = vec![0.0; n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut v = 0.0;
                for e in 0..n {
                    v += jv[(e, b)] * dj[e][(a, c)] - jv[(e, c)] * dj[e][(a, b)]
                        + jv[(a, e)] * dj[c][(e, b)]
                        - jv[(a, e)] * dj[b][(e, c)];
                }
                out[(a * n + b) * n + c] = v;
            }
        }
    }
    Ok(out)
}

/// Curvature tensor of the flat ε-quaternionic projective model,
/// `R₀(X,Y)Z = ¼[g(Y,Z)X − g(X,Z)Y + Σ_α(ω_α(Y,Z)J_αX − ω_α(X,Z)J_αY − 2ω_α(X,Y)J_αZ)]`
/// with `ω_α = −ε_α J_αᵀ g`. Its Ricci contraction is `(n+2)g` in dimension `4n`.
pub fn model_curvature_r0(
    g: &DMatrix<f64>,
    j: &[DMatrix<f64>; 3],
    s: Signs,
    tol: f64,
) -> Result<Array4> {
    let res = quaternion_algebra_residual(g, j, s);
    if res > tol {
        return Err(Error::usage(format!(
            "model curvature needs an eps-quaternionic structure (algebra residual {res:e})"
        )));
    }
    let n = g.nrows();
    let w: Vec<DMatrix<f64>> = (0..3).map(|a| kahler_form(g, &j[a], s.eps(a + 1))).collect();
    let mut r = Array4::zeros(n);
    // R^a_bcd: X = ∂_c, Y = ∂_d, Z = ∂_b
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = 0.0;
                    if a == c {
                        v += g[(d, b)];
                    }
                    if a == d {
                        v -= g[(c, b)];
                    }
                    for al in 0..3 {
                        v += w[al][(d, b)] * j[al][(a, c)] - w[al][(c, b)] * j[al][(a, d)]
                            - 2.0 * w[al][(c, d)] * j[al][(a, b)];
                    }
                    *r.at_mut(a, b, c, d) = 0.25 * v;
                }
            }
        }
    }
    Ok(r)
}

/// Largest relative commutator `[W(∂_c, ∂_d), J_α]` over all index pairs.
pub fn q_invariance_residual(w: &Array4, j: &[DMatrix<f64>; 3]) -> f64 {
    let n = w.dim;
    let scale = (w.max_abs() * j.iter().map(max_abs).fold(0.0, f64::max)).max(1.0);
    let mut worst = 0.0_f64;
    for c in 0..n {
        for d in (c + 1)..n {
            let e = w.endomorphism(c, d);
            for ja in j {
                worst = worst.max(max_abs(&(&e * ja - ja * &e)));
            }
        }
    }
    worst / scale
}

/// Matrices of `J₁, J₂, J₃` on a frame `(Z, J₁Z, J₂Z, J₃Z)` implied by the
/// algebra. Column `k` is the image of the `k`-th frame vector.
pub fn expected_frame_matrices(s: Signs) -> [DMatrix<f64>; 3] {
    let (e1, e2) = (s.eps1.f(), s.eps2.f());
    [
        DMatrix::from_row_slice(
            4,
            4,
            &[0.0, e1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, e1, 0.0, 0.0, 1.0, 0.0],
        ),
        DMatrix::from_row_slice(
            4,
            4,
            &[0.0, 0.0, e2, 0.0, 0.0, 0.0, 0.0, -e2, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0],
        ),
        DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0,
                0.0,
                0.0,
                -e1 * e2,
                0.0,
                0.0,
                e2,
                0.0,
                0.0,
                -e1,
                0.0,
                0.0,
                1.0,
                0.0,
                0.0,
                0.0,
            ],
        ),
    ]
}

/// Matrices of the `J_α` restricted to `span(Z, J₁Z, J₂Z, J₃Z)`, found by
/// least squares on that frame.
pub fn frame_matrices(j: &[DMatrix<f64>; 3], z: &DVector<f64>) -> Result<[DMatrix<f64>; 3]> {
    let n = z.len();
    let mut f = DMatrix::<f64>::zeros(n, 4);
    f.set_column(0, z);
    for a in 0..3 {
        f.set_column(a + 1, &(&j[a] * z));
    }
    let svd = f.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-12 * smax.max(1e-300) {
        return Err(Error::Degenerate {
            what: "vertical frame (Z, J1 Z, J2 Z, J3 Z)".into(),
            step: 4,
            pivot: smin,
        });
    }
    let pinv = svd
        .pseudo_inverse(1e-300)
        .map_err(|e| Error::Geometry(e.to_string()))?;
    Ok([
        &pinv * &j[0] * &f,
        &pinv * &j[1] * &f,
        &pinv * &j[2] * &f,
    ])
}

/// `max |J_α F − F W_α| / (|J_α| |F|)` for the frame `F = (Z, J₁Z, J₂Z, J₃Z)`
/// and the [`expected_frame_matrices`] `W_α`. Equivalent to comparing
/// [`frame_matrices`] with `W_α` while `F` has full rank, without inverting it.
pub fn frame_matrix_residual(j: &[DMatrix<f64>; 3], z: &DVector<f64>, s: Signs) -> Result<f64> {
    frame_matrices(j, z)?;
    let mut f = DMatrix::<f64>::zeros(z.len(), 4);
    f.set_column(0, z);
    for a in 0..3 {
        f.set_column(a + 1, &(&j[a] * z));
    }
    let want = expected_frame_matrices(s);
    let fs = max_abs(&f);
    Ok((0..3)
        .map(|a| max_abs(&(&j[a] * &f - &f * &want[a])) / (max_abs(&j[a]) * fs).max(1e-300))
        .fold(0.0, f64::max))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::epsnum::{seed, Jet, JetSpace};

    /// Constant ε-quaternionic structure on `ℝ⁴` with coordinates `(x, y, u, v)`.
    pub fn flat_structure(s: Signs) -> (DMatrix<f64>, [DMatrix<f64>; 3]) {
        let (e1, e2) = (s.eps1.f(), s.eps2.f());
        let g = DMatrix::from_diagonal(&nalgebra::dvector![1.0, -e1, -e2, e1 * e2]);
        let mut j1 = DMatrix::zeros(4, 4);
        j1[(1, 0)] = 1.0;
        j1[(0, 1)] = e1;
        j1[(3, 2)] = -1.0;
        j1[(2, 3)] = -e1;
        let mut w2 = DMatrix::zeros(4, 4);
        w2[(0, 2)] = 1.0;
        w2[(2, 0)] = -1.0;
        w2[(1, 3)] = -e1;
        w2[(3, 1)] = e1;
        let mut w3 = DMatrix::zeros(4, 4);
        w3[(1, 2)] = 1.0;
        w3[(2, 1)] = -1.0;
        w3[(0, 3)] = -1.0;
        w3[(3, 0)] = 1.0;
        let gi = g.clone().try_inverse().unwrap();
        let j2 = &gi * &w2 * e2;
        let j3 = &gi * &w3 * s.eps3().f();
        (g, [j1, j2, j3])
    }

    fn direct_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        let (n, m) = (a.nrows(), b.nrows());
        let mut out = DMatrix::zeros(n + m, n + m);
        out.view_mut((0, 0), (n, n)).copy_from(a);
        out.view_mut((n, n), (m, m)).copy_from(b);
        out
    }

    #[test]
    fn flat_structure_satisfies_algebra() {
        for s in Signs::all() {
            let (g, j) = flat_structure(s);
            assert!(quaternion_algebra_residual(&g, &j, s) < 1e-15, "{s:?}");
        }
    }

    #[test]
    fn identity_endomorphisms_fail_the_algebra() {
        let s = Signs::new(Sign::MINUS, Sign::MINUS);
        let id = DMatrix::<f64>::identity(4, 4);
        let r = quaternion_algebra_residual(&id, &[id.clone(), id.clone(), id.clone()], s);
        assert_eq!(r, 2.0);
    }

    #[test]
    fn model_curvature_ricci_is_n_plus_two() {
        for s in Signs::all() {
            let (g1, j1) = flat_structure(s);
            let g = direct_sum(&g1, &g1);
            let j = [
                direct_sum(&j1[0], &j1[0]),
                direct_sum(&j1[1], &j1[1]),
                direct_sum(&j1[2], &j1[2]),
            ];
            let r = model_curvature_r0(&g, &j, s, 1e-12).unwrap();
            let ric = r.ricci();
            assert!(max_abs(&(ric - &g * 4.0)) < 1e-13, "{s:?}");
            assert!(super::super::curvature::riemann_symmetry_residual(&r, &g) < 1e-14);
        }
    }

    #[test]
    fn frame_matrices_follow_from_the_algebra() {
        for s in Signs::all() {
            let (_, j) = flat_structure(s);
            let z = nalgebra::dvector![0.3, -1.2, 0.7, 0.4];
            assert!(frame_matrix_residual(&j, &z, s).unwrap() < 1e-13, "{s:?}");
        }
    }

    #[test]
    fn constant_structure_is_integrable() {
        let s = Signs::new(Sign::MINUS, Sign::PLUS);
        let (_, j) = flat_structure(s);
        let sp = JetSpace::get(4, 1).unwrap();
        let nj = nijenhuis(&JMat::from_f64(&sp, &j[0]), 1e-12).unwrap();
        assert!(nj.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn twisted_structure_is_not_integrable() {
        // conjugate a constant complex structure by a non-holomorphic
        // diffeomorphism-like pointwise twist
        let sp = JetSpace::get(4, 1).unwrap();
        let x = seed(&sp, &[0.2, 0.5, -0.3, 0.9]);
        let s = Signs::new(Sign::MINUS, Sign::MINUS);
        let (_, j) = flat_structure(s);
        let t = &x[2] * &x[1];
        let one = Jet::constant(&sp, 1.0);
        let zero = Jet::zero(&sp);
        let a = JMat::from_fn(4, 4, |r, c| match (r, c) {
            (r, c) if r == c => one.clone(),
            (0, 2) => t.scale(0.5),
            (3, 1) => x[0].scale(0.4),
            _ => zero.clone(),
        });
        let ai = a.inverse("twist").unwrap();
        let jt = a.mul(&JMat::from_f64(&sp, &j[0])).mul(&ai);
        let nj = nijenhuis(&jt, 1e-10).unwrap();
        let m = nj.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        assert!(m > 1e-3, "max Nijenhuis component {m}");
    }

    #[test]
    fn nijenhuis_rejects_non_structures() {
        let sp = JetSpace::get(2, 1).unwrap();
        let m = JMat::from_f64(&sp, &DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]));
        assert!(matches!(nijenhuis(&m, 1e-10), Err(Error::Usage(_))));
    }
}
