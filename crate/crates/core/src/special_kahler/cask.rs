//! Conical affine special ε₁-Kähler data in the real chart `(x^I, u^I)`,
//! `X^I = x^I + i u^I`, and in the affine coordinates `q = (x^I, Re F_I)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::epsnum::{seed, EpsComplex, Jet, JetSpace, Sign};
use crate::error::{Error, Result};
use crate::geomkit::JMat;

use super::prepotential::Prepotential;

/// `Ω = [[0, 1], [−1, 0]]` in `(n+1)`-blocks; `Ω^{ab} = −Ω_ab`.
pub fn omega_matrix(k: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        m[(i, k + i)] = 1.0;
        m[(k + i, i)] = -1.0;
    }
    m
}

/// Block formula for the Hessian `H_ab` of the Hesse potential.
pub fn hab_block(nm: &JMat, r: &JMat, eps1: Sign) -> Result<(JMat, JMat)> {
    let e1 = eps1.f();
    let ninv = nm.inverse("N_IJ")?;
    let rn = r.mul(&ninv);
    let nr = ninv.mul(r);
    let k = nm.rows();
    let tl = nm.sub(&rn.mul(r).scale(e1));
    let tr = rn.scale(2.0 * e1);
    let bl = nr.scale(2.0 * e1);
    let br = ninv.scale(-4.0 * e1);
    let hab = JMat::from_fn(2 * k, 2 * k, |i, j| match (i < k, j < k) {
        (true, true) => tl.get(i, j).clone(),
        (true, false) => tr.get(i, j - k).clone(),
        (false, true) => bl.get(i - k, j).clone(),
        (false, false) => br.get(i - k, j - k).clone(),
    });
    Ok((hab, ninv))
}

/// Displayed inverse `H^{ab}`.
pub fn hab_inverse_block(nm: &JMat, ninv: &JMat, r: &JMat, eps1: Sign) -> JMat {
    let k = nm.rows();
    let tr = ninv.mul(r).scale(0.5);
    let bl = r.mul(ninv).scale(0.5);
    let br = r.mul(ninv).mul(r).sub(&nm.scale(eps1.f())).scale(0.25);
    JMat::from_fn(2 * k, 2 * k, |i, j| match (i < k, j < k) {
        (true, true) => ninv.get(i, j).clone(),
        (true, false) => tr.get(i, j - k).clone(),
        (false, true) => bl.get(i - k, j).clone(),
        (false, false) => br.get(i - k, j - k).clone(),
    })
}

/// CASK quantities as jets of whatever variables `X` depends on.
#[derive(Clone, Debug)]
pub struct CaskFields {
    pub eps1: Sign,
    pub x: Vec<EpsComplex<Jet>>,
    pub f_i: Vec<EpsComplex<Jet>>,
    pub n: JMat,
    pub n_inv: JMat,
    pub r: JMat,
    /// `H = ½ X^I N_IJ X̄^J`.
    pub h: Jet,
    /// `q = (Re X^I, Re F_I)`.
    pub q: Vec<Jet>,
    pub hab: JMat,
    pub hab_inv: JMat,
    /// `∂q/∂(x, u) = [[1, 0], [R/2, −N/2]]`.
    pub jq: JMat,
    pub jq_inv: JMat,
    /// `H_a = H_ab q^b` (Euler relation for the degree-2 function `H`).
    pub h_grad: Vec<Jet>,
}

impl CaskFields {
    pub fn new(f: &Prepotential, x: Vec<EpsComplex<Jet>>) -> Result<CaskFields> {
        let k = f.n() + 1;
        let e1 = f.eps1().f();
        let f_i = f.grad(&x)?;
        let f_ij = f.hessian(&x)?;
        let nm = JMat::from_fn(k, k, |i, j| f_ij[i][j].im.scale(-2.0 * e1));
        let r = JMat::from_fn(k, k, |i, j| f_ij[i][j].re.scale(2.0));
        let (hab, n_inv) = hab_block(&nm, &r, f.eps1())?;
        let hab_inv = hab_inverse_block(&nm, &n_inv, &r, f.eps1());
        let mut h = x[0].re.zero_like();
        for i in 0..k {
            for j in 0..k {
                let xx = &x[i].re * &x[j].re - (&x[i].im * &x[j].im).scale(e1);
                h += nm.get(i, j) * &xx;
            }
        }
        let h = h.scale(0.5);
        let q: Vec<Jet> = x
            .iter()
            .map(|z| z.re.clone())
            .chain(f_i.iter().map(|z| z.re.clone()))
            .collect();
        let zero = x[0].re.zero_like();
        let one = x[0].re.constant_like(1.0);
        let jq = JMat::from_fn(2 * k, 2 * k, |a, b| match (a < k, b < k) {
            (true, true) => {
                if a == b {
                    one.clone()
                } else {
                    zero.clone()
                }
            }
            (true, false) => zero.clone(),
            (false, true) => r.get(a - k, b).scale(0.5),
            (false, false) => nm.get(a - k, b - k).scale(-0.5),
        });
        let jq_inv = JMat::from_fn(2 * k, 2 * k, |a, b| match (a < k, b < k) {
            (true, true) => {
                if a == b {
                    one.clone()
                } else {
                    zero.clone()
                }
            }
            (true, false) => zero.clone(),
            (false, true) => n_inv.mul(&r).get(a - k, b).clone(),
            (false, false) => n_inv.get(a - k, b - k).scale(-2.0),
        });
        let h_grad = hab.mul_vec(&q);
        Ok(CaskFields {
            eps1: f.eps1(),
            x,
            f_i,
            n: nm,
            n_inv,
            r,
            h,
            q,
            hab,
            hab_inv,
            jq,
            jq_inv,
            h_grad,
        })
    }

    pub fn k(&self) -> usize {
        self.x.len()
    }

    /// `r² = 2H`.
    pub fn r2(&self) -> Jet {
        self.h.scale(2.0)
    }

    /// `ε₁ Im(X^I F̄_I)`, an independent expression for `H`.
    pub fn h_from_f(&self) -> Jet {
        // Im(X conj F_I) = u Re F_I − x Im F_I
        let mut acc = self.x[0].re.zero_like();
        for (xi, fi) in self.x.iter().zip(&self.f_i) {
            acc += &xi.im * &fi.re - &xi.re * &fi.im;
        }
        acc.scale(self.eps1.f())
    }

    /// The CASK metric in the `(x, u)` chart, `Jqᵀ H_ab Jq`.
    pub fn metric_xu(&self) -> JMat {
        self.jq.transpose().mul(&self.hab).mul(&self.jq)
    }
}

/// Seeds `X^I = x^I + i u^I` at the given point, with the real and
/// imaginary parts as the first `2(n+1)` variables of `space`.
pub fn seed_x(space: &Arc<JetSpace>, x: &[EpsComplex<f64>]) -> Vec<EpsComplex<Jet>> {
    let k = x.len();
    (0..k)
        .map(|i| {
            EpsComplex::new(
                Jet::variable(space, i, x[i].re),
                Jet::variable(space, k + i, x[i].im),
                x[i].eps,
            )
        })
        .collect()
}

/// Result of [`cask_metric`].
#[derive(Clone, Debug)]
pub struct CaskMetric {
    /// Block formula.
    pub block: DMatrix<f64>,
    /// Hessian of `H(q)` through the numerically inverted chart.
    pub direct: DMatrix<f64>,
    /// `max |H_ab H^{bc} − δ|` with the displayed inverse.
    pub inverse_residual: f64,
}

impl CaskMetric {
    pub fn relative_difference(&self) -> f64 {
        let scale = self.block.amax().max(1.0);
        (&self.block - &self.direct).amax() / scale
    }
}

/// `q(X) = (Re X, Re F_I(X))`.
pub fn forward_q(f: &Prepotential, x: &[EpsComplex<f64>]) -> Result<DVector<f64>> {
    let k = x.len();
    let g = f.grad(x)?;
    Ok(DVector::from_fn(2 * k, |a, _| {
        if a < k {
            x[a].re
        } else {
            g[a - k].re
        }
    }))
}

/// Inverts `q ↦ X` by damped Newton iteration on `Im X` (the real parts
/// are the first half of `q`), starting from `start`.
pub fn invert_q(
    f: &Prepotential,
    q: &DVector<f64>,
    start: &[EpsComplex<f64>],
) -> Result<Vec<EpsComplex<f64>>> {
    let k = f.n() + 1;
    let e = f.eps1();
    let mut u: Vec<f64> = start.iter().map(|z| z.im).collect();
    let build = |u: &[f64]| -> Vec<EpsComplex<f64>> {
        (0..k).map(|i| EpsComplex::new(q[i], u[i], e)).collect()
    };
    let resid = |x: &[EpsComplex<f64>]| -> Result<DVector<f64>> {
        let g = f.grad(x)?;
        Ok(DVector::from_fn(k, |i, _| g[i].re - q[k + i]))
    };
    let mut x = build(&u);
    let mut r = resid(&x)?;
    for _ in 0..50 {
        let scale = q.amax().max(1.0);
        if r.amax() <= 1e-12 * scale {
            return Ok(x);
        }
        // ∂ Re F_I / ∂u^J = −N_IJ / 2
        let (nm, _) = f.n_and_r(&x)?;
        let jac = nm * -0.5;
        let step = jac
            .lu()
            .solve(&r)
            .ok_or_else(|| Error::Degenerate {
                what: "Newton Jacobian -N/2".into(),
                step: 0,
                pivot: 0.0,
            })?;
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, b)| a - t * b).collect();
            let xt = build(&trial);
            if let Ok(rt) = resid(&xt) {
                if rt.amax() < r.amax() || t < 1e-4 {
                    u = trial;
                    x = xt;
                    r = rt;
                    break;
                }
            }
            t *= 0.5;
        }
    }
    Err(Error::Geometry(format!(
        "Newton inversion of q -> X did not converge (residual {:e})",
        r.amax()
    )))
}

/// `H_ab` from the block formula and, independently, as the Hessian of
/// `H` composed with the inverse chart `q ↦ X` (jet Newton iteration).
pub fn cask_metric(f: &Prepotential, x: &[EpsComplex<f64>]) -> Result<CaskMetric> {
    f.admissible(x)?;
    let k = f.n() + 1;
    let sp0 = JetSpace::get(1, 0)?;
    let x0: Vec<EpsComplex<Jet>> = x
        .iter()
        .map(|z| EpsComplex::new(Jet::constant(&sp0, z.re), Jet::constant(&sp0, z.im), z.eps))
        .collect();
    let base = CaskFields::new(f, x0)?;
    let block = base.hab.value();
    let inv = base.hab_inv.value();
    let inverse_residual = (&block * &inv - DMatrix::<f64>::identity(2 * k, 2 * k)).amax();

    // direct route: start Newton from a perturbed point so the inversion is exercised
    let q0 = forward_q(f, x)?;
    let start: Vec<EpsComplex<f64>> = x
        .iter()
        .map(|z| EpsComplex::new(z.re, z.im * 0.97 + 0.01, z.eps))
        .collect();
    let xs = invert_q(f, &q0, &start)?;
    let sp = JetSpace::get(2 * k, 2)?;
    let qj = seed(&sp, q0.as_slice());
    let mut u: Vec<Jet> = xs.iter().map(|z| Jet::constant(&sp, z.im)).collect();
    let e = f.eps1();
    for _ in 0..4 {
        let xj: Vec<EpsComplex<Jet>> = (0..k)
            .map(|i| EpsComplex::new(qj[i].clone(), u[i].clone(), e))
            .collect();
        let g = f.grad(&xj)?;
        let fields = CaskFields::new(f, xj)?;
        let resid: Vec<Jet> = (0..k).map(|i| &g[i].re - &qj[k + i]).collect();
        // u ← u − (−N/2)⁻¹ resid = u + 2 N⁻¹ resid
        let corr = fields.n_inv.mul_vec(&resid);
        for i in 0..k {
            u[i] = &u[i] + &corr[i].scale(2.0);
        }
    }
    let xj: Vec<EpsComplex<Jet>> = (0..k)
        .map(|i| EpsComplex::new(qj[i].clone(), u[i].clone(), e))
        .collect();
    let h = CaskFields::new(f, xj)?.h;
    let direct = DMatrix::from_fn(2 * k, 2 * k, |a, b| {
        let mut alpha = vec![0u8; 2 * k];
        alpha[a] += 1;
        alpha[b] += 1;
        h.derivative(&alpha)
    });
    Ok(CaskMetric {
        block,
        direct,
        inverse_residual,
    })
}

/// Residuals of the conical decomposition `g = dr² − ε₁r²η̃² − r²π̄*g_M̄`.
#[derive(Clone, Debug)]
pub struct ConicalResiduals {
    pub decomposition: f64,
    /// `η̃(Jξ) + ε₁`.
    pub eta_jxi: f64,
    /// `η̃(ξ)`.
    pub eta_xi: f64,
    /// `g(ξ, ξ) − 2H`.
    pub norm_xi: f64,
}

/// `J` on the `(x, u)` chart: multiplication by `i_ε`.
pub fn complex_structure_xu(k: usize, eps1: Sign) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        j[(k + i, i)] = 1.0;
        j[(i, k + i)] = eps1.f();
    }
    j
}

/// Real symmetric matrix of `Re Σ K_{IJ̄} dX^I dX̄^J` in a chart
/// `(x^I, u^I)`, where `hess` is the real Hessian of `K` in that chart.
pub fn levi_form(hess: &DMatrix<f64>, eps: Sign) -> DMatrix<f64> {
    let k = hess.nrows() / 2;
    let e = eps.f();
    let kxx = hess.view((0, 0), (k, k));
    let kuu = hess.view((k, k), (k, k));
    let kxu = hess.view((0, k), (k, k));
    let kux = hess.view((k, 0), (k, k));
    // ∂_X ∂_X̄ K = A + i B with ∂_X = ½(∂_x + ε i ∂_u)
    let a = (kxx - kuu * e) * 0.25;
    let b = (kux - kxu) * (0.25 * e);
    let mut g = DMatrix::zeros(2 * k, 2 * k);
    g.view_mut((0, 0), (k, k)).copy_from(&a);
    g.view_mut((k, k), (k, k)).copy_from(&(&a * -e));
    g.view_mut((k, 0), (k, k)).copy_from(&(&b * e));
    g.view_mut((0, k), (k, k)).copy_from(&(&b * -e));
    (&g + g.transpose()) * 0.5
}

pub fn conical_decomposition_check(
    f: &Prepotential,
    x: &[EpsComplex<f64>],
) -> Result<ConicalResiduals> {
    f.admissible(x)?;
    let k = f.n() + 1;
    let e1 = f.eps1();
    let sp = JetSpace::get(2 * k, 2)?;
    let cf = CaskFields::new(f, seed_x(&sp, x))?;
    let r2 = cf.r2();
    if r2.value() <= 0.0 {
        return Err(Error::Geometry("r^2 <= 0: signature assumption violated".into()));
    }
    let g = cf.metric_xu().value();
    let xi = DVector::from_fn(2 * k, |a, _| if a < k { x[a].re } else { x[a - k].im });
    let jm = complex_structure_xu(k, e1);
    let jxi = &jm * &xi;
    let r2v = r2.value();
    let eta = (&g * &jxi) / r2v;
    let dr = DVector::from_vec(r2.sqrt().gradient());
    let kpot = -r2.ln() + x_norm(&cf.x[0]).ln();
    let hess = DMatrix::from_fn(2 * k, 2 * k, |a, b| {
        let mut alpha = vec![0u8; 2 * k];
        alpha[a] += 1;
        alpha[b] += 1;
        kpot.derivative(&alpha)
    });
    let gbar = levi_form(&hess, e1);
    let dec = &dr * dr.transpose() - (&eta * eta.transpose()) * (e1.f() * r2v) - gbar * r2v;
    let scale = g.amax().max(1.0);
    Ok(ConicalResiduals {
        decomposition: (&g - dec).amax() / scale,
        eta_jxi: (eta.dot(&jxi) + e1.f()).abs(),
        eta_xi: eta.dot(&xi).abs(),
        norm_xi: (xi.dot(&(&g * &xi)) - r2v).abs() / r2v.max(1.0),
    })
}

fn x_norm(z: &EpsComplex<Jet>) -> Jet {
    z.norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64, e: Sign) -> EpsComplex {
        EpsComplex::new(re, im, e)
    }

    #[test]
    fn block_and_direct_hessians_agree() {
        for e in [Sign::MINUS, Sign::PLUS] {
            let f = Prepotential::quadratic_standard(1, e);
            let x = [c(1.1, 0.3, e), c(0.2, -0.15, e)];
            let m = cask_metric(&f, &x).unwrap();
            assert!(m.relative_difference() < 1e-10, "{}", m.relative_difference());
            assert!(m.inverse_residual < 1e-12);
        }
    }

    #[test]
    fn cubic_block_and_direct_hessians_agree() {
        let e = Sign::MINUS;
        let f = Prepotential::cubic(e);
        let x = [c(1.0, 0.05, e), c(0.3, -1.2, e), c(-0.2, -0.9, e), c(0.4, -1.1, e)];
        if f.admissible(&x).is_ok() {
            let m = cask_metric(&f, &x).unwrap();
            assert!(m.relative_difference() < 1e-9, "{}", m.relative_difference());
        }
    }

    #[test]
    fn hesse_potential_two_ways() {
        let e = Sign::PLUS;
        let f = Prepotential::quadratic_standard(2, e);
        let sp = JetSpace::get(6, 1).unwrap();
        let x = [c(1.4, 0.3, e), c(0.2, -0.1, e), c(0.3, 0.25, e)];
        let cf = CaskFields::new(&f, seed_x(&sp, &x)).unwrap();
        assert!((cf.h.value() - cf.h_from_f().value()).abs() < 1e-14);
        // H_a from the Euler relation against dH pulled back through Jq
        let dh = cf.h.gradient();
        let via = cf.jq.transpose().mul_vec(&cf.h_grad);
        for a in 0..6 {
            assert!((dh[a] - via[a].value()).abs() < 1e-13);
        }
    }

    #[test]
    fn conical_decomposition_holds() {
        for e in [Sign::MINUS, Sign::PLUS] {
            let f = Prepotential::quadratic_standard(1, e);
            let x = [c(1.0, 0.3, e), c(0.2, -0.1, e)];
            let r = conical_decomposition_check(&f, &x).unwrap();
            assert!(r.decomposition < 1e-12, "{r:?}");
            assert!(r.eta_jxi < 1e-12 && r.eta_xi < 1e-12 && r.norm_xi < 1e-12);
        }
    }
}
