//! Projective special ε₁-Kähler data in the inhomogeneous coordinates
//! `z^μ = X^μ / X⁰`.

use nalgebra::{DMatrix, DVector};

use crate::epsnum::{EpsComplex, Jet, JetSpace, Sign};
use crate::error::{Error, Result};
use crate::geomkit::JMat;

use super::cask::levi_form;
use super::prepotential::{hermitian_form, Prepotential};

/// `𝒩_IJ = F̄_IJ − ε₁ i (NX)_I (NX)_J / (X N X)` split into real matrices
/// `(ℛ, ℐ)`, evaluated on jets.
pub fn period_matrix(f: &Prepotential, x: &[EpsComplex<Jet>]) -> Result<(JMat, JMat)> {
    let k = x.len();
    let e = f.eps1();
    let e1 = e.f();
    let h = f.hessian(x)?;
    let nm = JMat::from_fn(k, k, |i, j| h[i][j].im.scale(-2.0 * e1));
    let nx: Vec<EpsComplex<Jet>> = (0..k)
        .map(|i| {
            let mut acc = EpsComplex::real(x[0].re.zero_like(), e);
            for j in 0..k {
                acc = acc + x[j].scale_real(nm.get(i, j));
            }
            acc
        })
        .collect();
    let mut xnx = EpsComplex::real(x[0].re.zero_like(), e);
    for i in 0..k {
        xnx = xnx + x[i].try_mul(&nx[i])?;
    }
    let inv = xnx.inv()?;
    let unit = EpsComplex::unit(&x[0].re, e).scale(-e1);
    let mut re = Vec::with_capacity(k * k);
    let mut im = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let t = unit.try_mul(&nx[i].try_mul(&nx[j])?.try_mul(&inv)?)?;
            let v = h[i][j].conj() + t;
            re.push(v.re);
            im.push(v.im);
        }
    }
    let mk = |d: Vec<Jet>| {
        let mut it = d.into_iter();
        JMat::from_fn(k, k, |_, _| it.next().expect("k*k entries"))
    };
    Ok((mk(re), mk(im)))
}

/// `Ĥ^{ab} = [[ℐ⁻¹, ℐ⁻¹ℛ], [ℛℐ⁻¹, −ε₁ℐ + ℛℐ⁻¹ℛ]]`.
pub fn h_hat(rr: &JMat, ii: &JMat, eps1: Sign) -> Result<JMat> {
    let k = rr.rows();
    let iinv = ii.inverse("Im N (period matrix)")?;
    let ir = iinv.mul(rr);
    let ri = rr.mul(&iinv);
    let br = ri.mul(rr).sub(&ii.scale(eps1.f()));
    Ok(JMat::from_fn(2 * k, 2 * k, |a, b| match (a < k, b < k) {
        (true, true) => iinv.get(a, b).clone(),
        (true, false) => ir.get(a, b - k).clone(),
        (false, true) => ri.get(a - k, b).clone(),
        (false, false) => br.get(a - k, b - k).clone(),
    }))
}

/// Jet-valued PSK data. `z_vars[μ] = (index of Re z^μ, index of Im z^μ)`
/// in the jet space, so that derivatives in `z` are plain jet derivatives.
#[derive(Clone, Debug)]
pub struct PskFields {
    pub eps1: Sign,
    /// `X = (1, z)`.
    pub x: Vec<EpsComplex<Jet>>,
    /// `𝒦 = −log(z N z̄)`.
    pub kahler: Jet,
    pub rr: JMat,
    pub ii: JMat,
    pub h_hat: JMat,
}

impl PskFields {
    pub fn new(f: &Prepotential, z: &[EpsComplex<Jet>], like: &Jet) -> Result<PskFields> {
        let e = f.eps1();
        let mut x = vec![EpsComplex::real(like.constant_like(1.0), e)];
        x.extend_from_slice(z);
        let k = x.len();
        let h = f.hessian(&x)?;
        let e1 = e.f();
        let mut r2 = like.zero_like();
        for i in 0..k {
            for j in 0..k {
                let xx = &x[i].re * &x[j].re - (&x[i].im * &x[j].im).scale(e1);
                r2 += &h[i][j].im.scale(-2.0 * e1) * &xx;
            }
        }
        if r2.value() <= 0.0 {
            return Err(Error::domain("z N conj(z) > 0 violated"));
        }
        let kahler = -r2.ln();
        let (rr, ii) = period_matrix(f, &x)?;
        let h_hat = h_hat(&rr, &ii, e)?;
        Ok(PskFields {
            eps1: e,
            x,
            kahler,
            rr,
            ii,
            h_hat,
        })
    }

    /// `g_M̄` as a real `2n × 2n` matrix on `(Re z, Im z)`; needs `𝒦` of
    /// jet order ≥ 2.
    pub fn metric(&self, z_vars: &[(usize, usize)]) -> DMatrix<f64> {
        let n = z_vars.len();
        let idx: Vec<usize> = z_vars.iter().map(|p| p.0).chain(z_vars.iter().map(|p| p.1)).collect();
        let hess = DMatrix::from_fn(2 * n, 2 * n, |a, b| {
            self.kahler.d(idx[a]).d(idx[b]).value()
        });
        levi_form(&hess, self.eps1)
    }

    /// Jet-valued `g_M̄`, losing two orders.
    pub fn metric_jet(&self, z_vars: &[(usize, usize)]) -> JMat {
        let n = z_vars.len();
        let e = self.eps1.f();
        let idx: Vec<usize> = z_vars.iter().map(|p| p.0).chain(z_vars.iter().map(|p| p.1)).collect();
        let hess = JMat::from_fn(2 * n, 2 * n, |a, b| self.kahler.d(idx[a]).d(idx[b]));
        let g = JMat::from_fn(2 * n, 2 * n, |a, b| {
            let (ia, ib) = (a % n.max(1), b % n.max(1));
            let xa = a < n;
            let xb = b < n;
            // A = ¼(K_xx − εK_uu), B = ¼ε(K_ux − K_xu)
            let aij = (hess.get(ia, ib) - &hess.get(n + ia, n + ib).scale(e)).scale(0.25);
            let bij = |i: usize, j: usize| {
                (hess.get(n + i, j) - hess.get(i, n + j)).scale(0.25 * e)
            };
            match (xa, xb) {
                (true, true) => aij,
                (false, false) => aij.scale(-e),
                // sym of ε B_IJ du^I dx^J − ε B_IJ dx^I du^J
                (false, true) => (bij(ia, ib).scale(e) - bij(ib, ia).scale(e)).scale(0.5),
                (true, false) => (bij(ib, ia).scale(e) - bij(ia, ib).scale(e)).scale(0.5),
            }
        });
        g
    }

    /// `d^c𝒦 = i(∂̄ − ∂)𝒦 = −∂_y𝒦 dx − ε₁ ∂_x𝒦 dy` per `z^μ = x^μ + i y^μ`,
    /// returned as `(coefficients of dx^μ, coefficients of dy^μ)`.
    pub fn dc_kahler(&self, z_vars: &[(usize, usize)]) -> (Vec<Jet>, Vec<Jet>) {
        let e = self.eps1.f();
        let dx = z_vars.iter().map(|p| -self.kahler.d(p.1)).collect();
        let dy = z_vars.iter().map(|p| self.kahler.d(p.0).scale(-e)).collect();
        (dx, dy)
    }
}

/// Pointwise PSK data.
#[derive(Clone, Debug)]
pub struct PskPoint {
    pub z: Vec<EpsComplex<f64>>,
    pub kahler: f64,
    pub metric: DMatrix<f64>,
    /// `d^c𝒦` on `(Re z, Im z)`.
    pub dc_kahler: DVector<f64>,
    pub rr: DMatrix<f64>,
    pub ii: DMatrix<f64>,
    pub h_hat: DMatrix<f64>,
}

pub fn psk_data(f: &Prepotential, z: &[EpsComplex<f64>]) -> Result<PskPoint> {
    let n = f.n();
    if z.len() != n {
        return Err(Error::usage(format!("expected {n} coordinates z, got {}", z.len())));
    }
    let sp = JetSpace::get((2 * n).max(1), 2)?;
    let like = Jet::zero(&sp);
    let zj: Vec<EpsComplex<Jet>> = (0..n)
        .map(|m| {
            EpsComplex::new(
                Jet::variable(&sp, m, z[m].re),
                Jet::variable(&sp, n + m, z[m].im),
                z[m].eps,
            )
        })
        .collect();
    let vars: Vec<(usize, usize)> = (0..n).map(|m| (m, n + m)).collect();
    let p = PskFields::new(f, &zj, &like)?;
    let (dcx, dcy) = p.dc_kahler(&vars);
    Ok(PskPoint {
        z: z.to_vec(),
        kahler: p.kahler.value(),
        metric: p.metric(&vars),
        dc_kahler: DVector::from_iterator(
            2 * n,
            dcx.iter().chain(&dcy).map(|j| j.value()),
        ),
        rr: p.rr.value(),
        ii: p.ii.value(),
        h_hat: p.h_hat.value(),
    })
}

/// Relative residual of
/// `−A N⁻¹ Ā + (2/r²)|X^I A_I|² = −(ε₁/2) Ĥ^{ab} dp_a dp_b` with
/// `A_I = dζ̃_I + F_IJ dζ^J`, tested on the given covectors `dp = (dζ̃, dζ)`.
pub fn h_hat_identity_residual(
    f: &Prepotential,
    x: &[EpsComplex<f64>],
    probes: &[DVector<f64>],
) -> Result<f64> {
    f.admissible(x)?;
    let k = x.len();
    let e = f.eps1();
    let e1 = e.f();
    let h = f.hessian(x)?;
    let (nm, _) = f.n_and_r(x)?;
    let ninv = nm
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate {
            what: "N_IJ".into(),
            step: k,
            pivot: 0.0,
        })?;
    let r2 = hermitian_form(&nm, x);
    let sp = JetSpace::get(1, 0)?;
    let xj: Vec<EpsComplex<Jet>> = x
        .iter()
        .map(|z| EpsComplex::new(Jet::constant(&sp, z.re), Jet::constant(&sp, z.im), e))
        .collect();
    let (rr, ii) = period_matrix(f, &xj)?;
    let hh = h_hat(&rr, &ii, e)?.value();
    let mut worst = 0.0_f64;
    for v in probes {
        let a: Vec<EpsComplex<f64>> = (0..k)
            .map(|i| {
                let mut acc = EpsComplex::new(v[i], 0.0, e);
                for j in 0..k {
                    acc = acc + h[i][j].scale(v[k + j]);
                }
                acc
            })
            .collect();
        let mut lhs = 0.0;
        for i in 0..k {
            for j in 0..k {
                // Re(A_I conj A_J)
                let p = a[i].clone() * a[j].conj();
                lhs -= ninv[(i, j)] * p.re;
            }
        }
        let mut xa = EpsComplex::new(0.0, 0.0, e);
        for i in 0..k {
            xa = xa + x[i].clone() * a[i].clone();
        }
        lhs += 2.0 / r2 * xa.norm_sqr();
        let rhs = -0.5 * e1 * v.dot(&(&hh * v));
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn c(re: f64, im: f64, e: Sign) -> EpsComplex {
        EpsComplex::new(re, im, e)
    }

    #[test]
    fn h_hat_identity_on_probes() {
        for e in [Sign::MINUS, Sign::PLUS] {
            let f = Prepotential::quadratic_standard(1, e);
            let x = [c(1.2, 0.4, e), c(0.3, -0.2, e)];
            let probes = [
                dvector![1.0, 0.0, 0.0, 0.0],
                dvector![0.3, -1.1, 0.7, 0.2],
                dvector![-0.5, 0.4, 1.3, -0.8],
            ];
            let r = h_hat_identity_residual(&f, &x, &probes).unwrap();
            assert!(r < 1e-12, "{e:?}: {r}");
        }
    }

    #[test]
    fn complex_quadratic_psk_metric_is_positive() {
        let e = Sign::MINUS;
        let f = Prepotential::quadratic_standard(2, e);
        let p = psk_data(&f, &[c(0.2, 0.1, e), c(-0.3, 0.25, e)]).unwrap();
        let eig = p.metric.clone().symmetric_eigen().eigenvalues;
        assert!(eig.min() > 0.0, "{eig}");
        assert!((&p.rr - p.rr.transpose()).amax() == 0.0 || (&p.rr - p.rr.transpose()).amax() < 1e-15);
    }

    #[test]
    fn jet_metric_matches_value_metric() {
        let e = Sign::PLUS;
        let f = Prepotential::quadratic_standard(2, e);
        let sp = JetSpace::get(4, 3).unwrap();
        let z = [c(0.2, 0.1, e), c(-0.3, 0.25, e)];
        let zj: Vec<EpsComplex<Jet>> = (0..2)
            .map(|m| {
                EpsComplex::new(
                    Jet::variable(&sp, m, z[m].re),
                    Jet::variable(&sp, 2 + m, z[m].im),
                    e,
                )
            })
            .collect();
        let vars = [(0, 2), (1, 3)];
        let p = PskFields::new(&f, &zj, &Jet::zero(&sp)).unwrap();
        let d = (p.metric_jet(&vars).value() - p.metric(&vars)).amax();
        assert!(d < 1e-14, "{d}");
    }
}
