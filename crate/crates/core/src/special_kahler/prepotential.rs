//! Degree-2 homogeneous ε₁-holomorphic prepotentials.
//!
//! Every built-in is a finite sum of Laurent monomials `c · Π (X^I)^{a_I}`
//! with `Σ a_I = 2`, so first and second derivatives are available in closed
//! form on any scalar type, jets included.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::epsnum::{EpsComplex, Real, Sign, ZERO_DIVISOR_TOL};
use crate::error::{Error, Result};

/// `coeff · Π (X^I)^{exps[I]}` with an ε-complex coefficient `re + i im`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub re: f64,
    pub im: f64,
    pub exps: Vec<i32>,
}

/// How a prepotential is specified in a configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrepotentialKind {
    /// `F = (i/2) η_IJ X^I X^J`.
    Quadratic { eta: Vec<Vec<f64>> },
    /// `F = X¹X²X³ / X⁰`.
    Cubic,
    /// Sum of Laurent monomials of total degree 2.
    Rational { terms: Vec<Monomial> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prepotential {
    n: usize,
    eps1: Sign,
    kind: PrepotentialKind,
    terms: Vec<Monomial>,
}

fn one_like<T: Real>(like: &T, eps: Sign) -> EpsComplex<T> {
    EpsComplex::real(like.lift(1.0), eps)
}

fn powi<T: Real>(z: &EpsComplex<T>, k: i32) -> Result<EpsComplex<T>> {
    let base = if k < 0 { z.inv()? } else { z.clone() };
    let mut acc = one_like(&z.re, z.eps);
    for _ in 0..k.unsigned_abs() {
        acc = acc.try_mul(&base)?;
    }
    Ok(acc)
}

impl Prepotential {
    pub fn new(n: usize, eps1: Sign, kind: PrepotentialKind) -> Result<Prepotential> {
        let terms = match &kind {
            PrepotentialKind::Quadratic { eta } => {
                if eta.len() != n + 1 || eta.iter().any(|r| r.len() != n + 1) {
                    return Err(Error::Config(format!(
                        "quadratic prepotential needs a {}x{} matrix eta",
                        n + 1,
                        n + 1
                    )));
                }
                let mut terms = Vec::new();
                for i in 0..=n {
                    for j in 0..=n {
                        if (eta[i][j] - eta[j][i]).abs() > 0.0 {
                            return Err(Error::Config("eta must be symmetric".into()));
                        }
                        if eta[i][j] != 0.0 {
                            let mut exps = vec![0; n + 1];
                            exps[i] += 1;
                            exps[j] += 1;
                            terms.push(Monomial {
                                re: 0.0,
                                im: 0.5 * eta[i][j],
                                exps,
                            });
                        }
                    }
                }
                terms
            }
            PrepotentialKind::Cubic => {
                if n != 3 {
                    return Err(Error::Config("the cubic prepotential has n = 3".into()));
                }
                vec![Monomial {
                    re: 1.0,
                    im: 0.0,
                    exps: vec![-1, 1, 1, 1],
                }]
            }
            PrepotentialKind::Rational { terms } => {
                if terms.is_empty() {
                    return Err(Error::Config("rational prepotential without terms".into()));
                }
                for t in terms {
                    if t.exps.len() != n + 1 {
                        return Err(Error::Config(format!(
                            "monomial exponent list must have length {}",
                            n + 1
                        )));
                    }
                    if t.exps.iter().sum::<i32>() != 2 {
                        return Err(Error::Config(
                            "every monomial must be homogeneous of degree 2".into(),
                        ));
                    }
                }
                terms.clone()
            }
        };
        Ok(Prepotential {
            n,
            eps1,
            kind,
            terms,
        })
    }

    /// `F = (i/2) η X X` with `η = −ε₁ diag(1, −1, …, −1)`, for which
    /// `N = diag(2, −2, …, −2)` in both signatures.
    pub fn quadratic_standard(n: usize, eps1: Sign) -> Prepotential {
        let eta = (0..=n)
            .map(|i| {
                (0..=n)
                    .map(|j| match (i, j) {
                        (0, 0) => -eps1.f(),
                        (i, j) if i == j => eps1.f(),
                        _ => 0.0,
                    })
                    .collect()
            })
            .collect();
        Prepotential::new(n, eps1, PrepotentialKind::Quadratic { eta }).expect("valid fixture")
    }

    pub fn cubic(eps1: Sign) -> Prepotential {
        Prepotential::new(3, eps1, PrepotentialKind::Cubic).expect("valid fixture")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps1(&self) -> Sign {
        self.eps1
    }

    pub fn kind(&self) -> &PrepotentialKind {
        &self.kind
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            PrepotentialKind::Quadratic { .. } => "quadratic",
            PrepotentialKind::Cubic => "cubic",
            PrepotentialKind::Rational { .. } => "rational",
        }
    }

    fn check_len<T>(&self, x: &[EpsComplex<T>]) -> Result<()> {
        if x.len() != self.n + 1 {
            return Err(Error::usage(format!(
                "prepotential expects {} variables, got {}",
                self.n + 1,
                x.len()
            )));
        }
        if x.iter().any(|z| z.eps != self.eps1) {
            return Err(Error::usage("prepotential evaluated with the wrong eps"));
        }
        Ok(())
    }

    fn coeff<T: Real>(&self, t: &Monomial, like: &T, scale: f64) -> EpsComplex<T> {
        EpsComplex::new(like.lift(t.re * scale), like.lift(t.im * scale), self.eps1)
    }

    // Σ_t coeff · shift-adjusted monomial, where `exps` may be lowered.
    fn sum_terms<T: Real>(
        &self,
        x: &[EpsComplex<T>],
        lowered: &[usize],
    ) -> Result<EpsComplex<T>> {
        let like = &x[0].re;
        let mut acc = EpsComplex::real(like.lift(0.0), self.eps1);
        for t in &self.terms {
            let mut exps = t.exps.clone();
            let mut factor = 1.0;
            for &i in lowered {
                factor *= exps[i] as f64;
                exps[i] -= 1;
            }
            if factor == 0.0 {
                continue;
            }
            let mut m = self.coeff(t, like, factor);
            for (i, &e) in exps.iter().enumerate() {
                if e != 0 {
                    m = m.try_mul(&powi(&x[i], e)?)?;
                }
            }
            acc = acc + m;
        }
        Ok(acc)
    }

    pub fn eval<T: Real>(&self, x: &[EpsComplex<T>]) -> Result<EpsComplex<T>> {
        self.check_len(x)?;
        self.sum_terms(x, &[])
    }

    /// `F_I = ∂F/∂X^I`.
    pub fn grad<T: Real>(&self, x: &[EpsComplex<T>]) -> Result<Vec<EpsComplex<T>>> {
        self.check_len(x)?;
        (0..=self.n).map(|i| self.sum_terms(x, &[i])).collect()
    }

    /// `F_IJ`, row-major.
    pub fn hessian<T: Real>(&self, x: &[EpsComplex<T>]) -> Result<Vec<Vec<EpsComplex<T>>>> {
        self.check_len(x)?;
        let n = self.n + 1;
        let mut out: Vec<Vec<EpsComplex<T>>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                if j < i {
                    row.push(out[j][i].clone());
                } else {
                    row.push(self.sum_terms(x, &[i, j])?);
                }
            }
            out.push(row);
        }
        Ok(out)
    }

    /// Real matrices `N_IJ = −2ε₁ Im F_IJ` and `R_IJ = 2 Re F_IJ`.
    pub fn n_and_r(&self, x: &[EpsComplex<f64>]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let h = self.hessian(x)?;
        let k = self.n + 1;
        let e1 = self.eps1.f();
        Ok((
            DMatrix::from_fn(k, k, |i, j| -2.0 * e1 * h[i][j].im),
            DMatrix::from_fn(k, k, |i, j| 2.0 * h[i][j].re),
        ))
    }

    /// Pointwise admissibility: `X⁰X̄⁰ > 0`, `Re X⁰ > 0`, `r² = XNX̄ > 0`
    /// and `N` invertible. The error names the failed condition.
    pub fn admissible(&self, x: &[EpsComplex<f64>]) -> Result<()> {
        self.check_len(x)?;
        let x0 = &x[0];
        if x0.norm_sqr() <= ZERO_DIVISOR_TOL {
            return Err(Error::domain("X0 conj(X0) > 0 violated"));
        }
        if x0.re <= 0.0 {
            return Err(Error::domain("Re X0 > 0 violated"));
        }
        for (i, t) in self.terms.iter().enumerate() {
            for (k, &e) in t.exps.iter().enumerate() {
                if e < 0 && x[k].norm_sqr().abs() <= 1e-8 {
                    return Err(Error::domain(format!(
                        "term {i} has a pole at X{k} conj(X{k}) = 0"
                    )));
                }
            }
        }
        let (nm, _) = self.n_and_r(x)?;
        let r2 = hermitian_form(&nm, x);
        if r2 <= 1e-8 {
            return Err(Error::domain(format!("r^2 = X N conj(X) > 0 violated ({r2:e})")));
        }
        let sv = nm.clone().svd(false, false).singular_values;
        if sv.min() <= 1e-8 * sv.max() {
            return Err(Error::domain("N_IJ is singular"));
        }
        Ok(())
    }
}

/// `Re Σ N_IJ X^I X̄^J` for a real symmetric `N`.
pub fn hermitian_form(nm: &DMatrix<f64>, x: &[EpsComplex<f64>]) -> f64 {
    let e = x[0].eps.f();
    let mut acc = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            // Re(X^I conj X^J) = x_i x_j − ε u_i u_j
            acc += nm[(i, j)] * (x[i].re * x[j].re - e * x[i].im * x[j].im);
        }
    }
    acc
}

/// `|F(λX) − λ²F(X)|` and `|X^I F_I − 2F|`, both relative to `max(1, |F|)`.
pub fn homogeneity_check(
    f: &Prepotential,
    x: &[EpsComplex<f64>],
    lambda: f64,
) -> Result<(f64, f64)> {
    f.admissible(x)?;
    let fx = f.eval(x)?;
    let scaled: Vec<_> = x.iter().map(|z| z.scale(lambda)).collect();
    let fl = f.eval(&scaled)?;
    let scale = fx.re.abs().max(fx.im.abs()).max(1.0);
    let hom = (fl.re - lambda * lambda * fx.re)
        .abs()
        .max((fl.im - lambda * lambda * fx.im).abs())
        / (scale * lambda * lambda);
    let grad = f.grad(x)?;
    let mut euler = EpsComplex::new(0.0, 0.0, f.eps1());
    for (xi, fi) in x.iter().zip(&grad) {
        euler = euler + xi.clone() * fi.clone();
    }
    let eul = (euler.re - 2.0 * fx.re).abs().max((euler.im - 2.0 * fx.im).abs()) / scale;
    Ok((hom, eul))
}

/// Relative residual of `X^J F_IJ = F_I`.
pub fn euler_hessian_residual(f: &Prepotential, x: &[EpsComplex<f64>]) -> Result<f64> {
    let g = f.grad(x)?;
    let h = f.hessian(x)?;
    let mut worst = 0.0_f64;
    for i in 0..x.len() {
        let mut acc = EpsComplex::new(0.0, 0.0, f.eps1());
        for j in 0..x.len() {
            acc = acc + x[j].clone() * h[i][j].clone();
        }
        let scale = g[i].re.abs().max(g[i].im.abs()).max(1.0);
        worst = worst.max((acc.re - g[i].re).abs().max((acc.im - g[i].im).abs()) / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64, e: Sign) -> EpsComplex {
        EpsComplex::new(re, im, e)
    }

    #[test]
    fn single_variable_quadratic_by_hand() {
        // F = (i/2)(X⁰)², complex case
        let f = Prepotential::new(
            0,
            Sign::MINUS,
            PrepotentialKind::Quadratic {
                eta: vec![vec![1.0]],
            },
        )
        .unwrap();
        let x = [c(0.7, -0.4, Sign::MINUS)];
        let (nm, r) = f.n_and_r(&x).unwrap();
        assert_eq!(nm[(0, 0)], 2.0);
        assert_eq!(r[(0, 0)], 0.0);
        let r2 = hermitian_form(&nm, &x);
        assert!((r2 - 2.0 * (0.49 + 0.16)).abs() < 1e-15);
    }

    #[test]
    fn quadratic_homogeneity_is_exact() {
        for e in [Sign::MINUS, Sign::PLUS] {
            let f = Prepotential::quadratic_standard(2, e);
            let x = [c(1.3, 0.2, e), c(0.1, -0.3, e), c(0.25, 0.05, e)];
            let (hom, eul) = homogeneity_check(&f, &x, 2.0).unwrap();
            assert!(hom < 1e-15 && eul < 1e-15, "{hom} {eul}");
        }
    }

    #[test]
    fn cubic_homogeneity() {
        let e = Sign::MINUS;
        let f = Prepotential::cubic(e);
        let x = [c(1.0, 0.1, e), c(0.3, 1.2, e), c(-0.2, 0.9, e), c(0.4, 1.1, e)];
        let fx = f.eval(&x).unwrap();
        let fl = f.eval(&x.iter().map(|z| z.scale(3.0)).collect::<Vec<_>>()).unwrap();
        assert!((fl.re - 9.0 * fx.re).abs() < 1e-10 * (1.0 + fx.re.abs()));
        assert!((fl.im - 9.0 * fx.im).abs() < 1e-10 * (1.0 + fx.im.abs()));
        assert!(euler_hessian_residual(&f, &x).unwrap() < 1e-12);
    }

    #[test]
    fn inhomogeneous_terms_are_rejected() {
        let bad = PrepotentialKind::Rational {
            terms: vec![Monomial {
                re: 1.0,
                im: 0.0,
                exps: vec![3, 0],
            }],
        };
        assert!(matches!(Prepotential::new(1, Sign::MINUS, bad), Err(Error::Config(_))));
    }

    #[test]
    fn inadmissible_points_name_the_condition() {
        let f = Prepotential::quadratic_standard(1, Sign::MINUS);
        let e = Sign::MINUS;
        let err = f.admissible(&[c(-1.0, 0.0, e), c(0.1, 0.0, e)]).unwrap_err();
        assert!(err.to_string().contains("Re X0"));
        let err = f.admissible(&[c(0.1, 0.0, e), c(1.0, 0.0, e)]).unwrap_err();
        assert!(err.to_string().contains("r^2"));
    }
}
