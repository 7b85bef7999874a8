//! Exterior calculus on coordinate frames: d, ∧, ι and Lie derivatives.
//!
//! All inputs are jets over a space whose variables are the chart
//! coordinates, so `Jet::d(i)` is the coordinate derivative `∂_i`. Every
//! derivative lowers the jet order by one.

use crate::epsnum::Jet;
use crate::error::{Error, Result};

use super::tensor::{sort_with_sign, Form, JMat};

/// Checks that a matrix of 2-form components is antisymmetric.
pub fn check_antisymmetric(m: &JMat, what: &str) -> Result<()> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::usage(format!("{what}: form components must be square")));
    }
    for i in 0..n {
        for j in i..n {
            let a = m.get(i, j).value();
            let b = m.get(j, i).value();
            if (a + b).abs() > 1e-9 * (1.0 + a.abs().max(b.abs())) {
                return Err(Error::usage(format!(
                    "{what}: components are not antisymmetric at ({i},{j})"
                )));
            }
        }
    }
    Ok(())
}

/// `(dω)_{i0..ip} = Σ_k (−1)^k ∂_{ik} ω_{i0..îk..ip}`.
pub fn exterior_derivative(w: &Form) -> Form {
    let n = w.dim();
    let p = w.degree();
    Form::from_fn(n, p + 1, |t| {
        let mut acc: Option<Jet> = None;
        for k in 0..=p {
            let rest: Vec<usize> = t
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, &i)| i)
                .collect();
            let term = w.get(&rest).expect("increasing tuple").d(t[k]);
            let term = if k % 2 == 1 { -term } else { term };
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        acc.expect("nonempty tuple")
    })
}

/// Exterior derivative of a 1-form given by its components.
pub fn d_one_form(theta: &[Jet]) -> Form {
    exterior_derivative(&Form::one_form(theta))
}

/// Exterior derivative of a 2-form given as an antisymmetric matrix.
pub fn d_two_form(m: &JMat) -> Result<Form> {
    check_antisymmetric(m, "exterior derivative")?;
    Ok(exterior_derivative(&Form::from_matrix(m)?))
}

/// Differential of a function.
pub fn differential(f: &Jet) -> Vec<Jet> {
    (0..f.space().nvars()).map(|i| f.d(i)).collect()
}

/// `α ∧ β` with `(α∧β)(e_i, e_j) = α_i β_j − α_j β_i` on 1-forms.
pub fn wedge(a: &Form, b: &Form) -> Form {
    assert_eq!(a.dim(), b.dim(), "wedge of forms on different charts");
    let n = a.dim();
    let (p, q) = (a.degree(), b.degree());
    let shuffles = shuffles(p + q, p);
    Form::from_fn(n, p + q, |t| {
        let mut acc: Option<Jet> = None;
        for (left, right, sign) in &shuffles {
            let l: Vec<usize> = left.iter().map(|&i| t[i]).collect();
            let r: Vec<usize> = right.iter().map(|&i| t[i]).collect();
            let term = a.get(&l).expect("increasing") * b.get(&r).expect("increasing");
            let term = if *sign < 0.0 { -term } else { term };
            acc = Some(match acc {
                None => term,
                Some(x) => x + term,
            });
        }
        acc.expect("nonempty")
    })
}

/// Wedge of two 1-forms as an antisymmetric matrix.
pub fn wedge11(a: &[Jet], b: &[Jet]) -> JMat {
    let n = a.len();
    JMat::from_fn(n, n, |i, j| &a[i] * &b[j] - &a[j] * &b[i])
}

// (p, q)-shuffles of 0..m with their signs.
fn shuffles(m: usize, p: usize) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    let mut out = Vec::new();
    let left_sets = super::tensor::TupleIndex::new(m, p);
    for k in 0..left_sets.len() {
        let left = left_sets.tuple(k).to_vec();
        let right: Vec<usize> = (0..m).filter(|i| !left.contains(i)).collect();
        let mut perm: Vec<usize> = left.iter().chain(&right).copied().collect();
        let sign = sort_with_sign(&mut perm).expect("permutation");
        out.push((left, right, sign));
    }
    out
}

/// `(ι_V ω)_{i2..ip} = V^i ω_{i i2..ip}`.
pub fn interior(v: &[Jet], w: &Form) -> Result<Form> {
    if w.degree() == 0 {
        return Err(Error::usage("interior product of a 0-form"));
    }
    if v.len() != w.dim() {
        return Err(Error::usage("vector and form live on different charts"));
    }
    let n = w.dim();
    Ok(Form::from_fn(n, w.degree() - 1, |t| {
        let mut acc = v[0].zero_like();
        for (i, vi) in v.iter().enumerate() {
            let mut idx = vec![i];
            idx.extend_from_slice(t);
            if let Some(c) = w.get(&idx) {
                acc += vi * &c;
            }
        }
        acc
    }))
}

/// `ι_V ω` for a 2-form given as a matrix: `(ι_V ω)_j = V^i ω_ij`.
pub fn interior_matrix(v: &[Jet], w: &JMat) -> Vec<Jet> {
    w.vec_mul(v)
}

/// Tensor valence `(contravariant, covariant)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Valence(pub usize, pub usize);

/// A tensor given by its components on the coordinate frame.
#[derive(Clone, Debug)]
pub enum Tensor {
    Function(Jet),
    Covector(Vec<Jet>),
    /// Arbitrary covariant 2-tensor, `m[(a, b)] = T(∂_a, ∂_b)`.
    Covariant2(JMat),
    Form(Form),
    /// `(1,1)` tensor, `m[(a, b)] = J^a_b`.
    Endomorphism(JMat),
    Vector(Vec<Jet>),
    /// Contravariant 2-tensor such as an inverse metric.
    Contravariant2(JMat),
}

impl Tensor {
    pub fn valence(&self) -> Valence {
        match self {
            Tensor::Function(_) => Valence(0, 0),
            Tensor::Covector(_) => Valence(0, 1),
            Tensor::Covariant2(_) => Valence(0, 2),
            Tensor::Form(f) => Valence(0, f.degree()),
            Tensor::Endomorphism(_) => Valence(1, 1),
            Tensor::Vector(_) => Valence(1, 0),
            Tensor::Contravariant2(_) => Valence(2, 0),
        }
    }
}

/// Lie derivative along `v` for tensors of valence `(0, q)` or `(1, 1)`.
pub fn lie_derivative(t: &Tensor, v: &[Jet]) -> Result<Tensor> {
    Ok(match t {
        Tensor::Function(f) => Tensor::Function(directional(f, v)),
        Tensor::Covector(c) => Tensor::Covector(lie_covector(c, v)),
        Tensor::Covariant2(m) => Tensor::Covariant2(lie_covariant2(m, v)),
        Tensor::Form(w) => Tensor::Form(lie_form(w, v)),
        Tensor::Endomorphism(j) => Tensor::Endomorphism(lie_endomorphism(j, v)),
        other => {
            return Err(Error::usage(format!(
                "Lie derivative of a tensor of valence {:?} is not supported",
                other.valence()
            )))
        }
    })
}

/// `V(f) = V^c ∂_c f`.
pub fn directional(f: &Jet, v: &[Jet]) -> Jet {
    let mut acc = &v[0] * &f.d(0);
    for (c, vc) in v.iter().enumerate().skip(1) {
        acc += vc * &f.d(c);
    }
    acc
}

fn jacobian(v: &[Jet]) -> JMat {
    // dv[(c, b)] = ∂_b V^c
    JMat::from_fn(v.len(), v.len(), |c, b| v[c].d(b))
}

pub fn lie_covector(t: &[Jet], v: &[Jet]) -> Vec<Jet> {
    let dv = jacobian(v);
    (0..t.len())
        .map(|a| {
            let mut acc = directional(&t[a], v);
            for c in 0..t.len() {
                acc += &t[c] * dv.get(c, a);
            }
            acc
        })
        .collect()
}

pub fn lie_covariant2(t: &JMat, v: &[Jet]) -> JMat {
    let n = t.rows();
    let dv = jacobian(v);
    JMat::from_fn(n, n, |a, b| {
        let mut acc = directional(t.get(a, b), v);
        for c in 0..n {
            acc += t.get(c, b) * dv.get(c, a);
            acc += t.get(a, c) * dv.get(c, b);
        }
        acc
    })
}

pub fn lie_form(w: &Form, v: &[Jet]) -> Form {
    let n = w.dim();
    let dv = jacobian(v);
    Form::from_fn(n, w.degree(), |t| {
        let mut acc = directional(&w.get(t).expect("increasing"), v);
        for k in 0..t.len() {
            let mut idx = t.to_vec();
            for c in 0..n {
                idx[k] = c;
                if let Some(comp) = w.get(&idx) {
                    acc += &comp * dv.get(c, t[k]);
                }
            }
        }
        acc
    })
}

/// `(ℒ_V J)^a_b = V^c ∂_c J^a_b − J^c_b ∂_c V^a + J^a_c ∂_b V^c`.
pub fn lie_endomorphism(j: &JMat, v: &[Jet]) -> JMat {
    let n = j.rows();
    let dv = jacobian(v);
    JMat::from_fn(n, n, |a, b| {
        let mut acc = directional(j.get(a, b), v);
        for c in 0..n {
            acc -= j.get(c, b) * dv.get(a, c);
            acc += j.get(a, c) * dv.get(c, b);
        }
        acc
    })
}

/// Lie bracket `[U, V]^a = U^c ∂_c V^a − V^c ∂_c U^a`.
pub fn bracket(u: &[Jet], v: &[Jet]) -> Vec<Jet> {
    (0..u.len())
        .map(|a| directional(&v[a], u) - directional(&u[a], v))
        .collect()
}

/// Residual of Cartan's formula `ℒ_V ω − (ι_V dω + d ι_V ω)` at the base
/// point, as the largest absolute component.
pub fn cartan_residual(w: &Form, v: &[Jet]) -> Result<f64> {
    let lhs = lie_form(w, v);
    let dw = exterior_derivative(w);
    let mut rhs = interior(v, &dw)?;
    if w.degree() > 0 {
        let iw = interior(v, w)?;
        let d_iw = if iw.degree() == 0 {
            Form::one_form(&differential(&iw.components()[0]))
        } else {
            exterior_derivative(&iw)
        };
        rhs = rhs.add(&d_iw);
    }
    Ok(lhs.sub(&rhs).max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epsnum::{seed, JetSpace};

    #[test]
    fn d_of_x_dy() {
        let sp = JetSpace::get(2, 2).unwrap();
        let x = seed(&sp, &[0.3, -0.7]);
        let theta = vec![x[0].zero_like(), x[0].clone()];
        let dw = d_one_form(&theta);
        assert_eq!(dw.values(), vec![1.0]);
    }

    #[test]
    fn non_antisymmetric_input_is_rejected() {
        let sp = JetSpace::get(2, 1).unwrap();
        let x = seed(&sp, &[0.3, -0.7]);
        let m = JMat::from_fn(2, 2, |_, _| x[0].clone());
        assert!(matches!(d_two_form(&m), Err(Error::Usage(_))));
    }

    #[test]
    fn wedge_matches_determinant_convention() {
        let sp = JetSpace::get(3, 0).unwrap();
        let c = |v: f64| Jet::constant(&sp, v);
        let a = Form::one_form(&[c(1.0), c(2.0), c(3.0)]);
        let b = Form::one_form(&[c(-1.0), c(0.5), c(4.0)]);
        let w = wedge(&a, &b);
        assert_eq!(w.get(&[0, 1]).unwrap().value(), 1.0 * 0.5 - 2.0 * -1.0);
        let m = wedge11(a.components(), b.components());
        assert_eq!(m.get(2, 1).value(), 3.0 * 0.5 - 2.0 * 4.0);
        let vol = wedge(&w, &Form::one_form(&[c(0.0), c(0.0), c(1.0)]));
        assert_eq!(vol.values(), vec![2.5]);
    }

    #[test]
    fn rotation_is_killing_for_flat_metric() {
        let sp = JetSpace::get(2, 2).unwrap();
        let x = seed(&sp, &[0.8, 1.1]);
        let v = vec![-x[1].clone(), x[0].clone()];
        let g = JMat::identity(&sp, 2);
        let l = lie_covariant2(&g, &v);
        assert!(l.value().iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn endomorphism_lie_derivative_matches_commutator() {
        // ℒ_V (J W) = (ℒ_V J) W + J [V, W]
        let sp = JetSpace::get(2, 2).unwrap();
        let x = seed(&sp, &[0.4, -0.2]);
        let v = vec![&x[0] * &x[1], x[1].exp()];
        let w = vec![x[1].clone(), &x[0] * &x[0]];
        let j = JMat::from_fn(2, 2, |a, b| (&x[a] + 2.0 * b as f64).sin_like());
        let jw = j.mul_vec(&w);
        let lhs = bracket(&v, &jw);
        let lj = lie_endomorphism(&j, &v).mul_vec(&w);
        let jb = j.mul_vec(&bracket(&v, &w));
        for a in 0..2 {
            assert!((lhs[a].value() - lj[a].value() - jb[a].value()).abs() < 1e-12);
        }
    }

    trait SinLike {
        fn sin_like(&self) -> Jet;
    }
    impl SinLike for Jet {
        fn sin_like(&self) -> Jet {
            let v = self.value();
            self.compose_series(&[v.sin(), v.cos(), -v.sin() / 2.0, -v.cos() / 6.0])
        }
    }
}
