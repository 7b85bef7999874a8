//! The flat four-dimensional ε-hyper-Kähler model with the rotating field
//! of the phase of `w`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::epsnum::Jet;
use crate::error::{Error, Result};
use crate::geomkit::{Chart, JMat, Signs};

use super::base::{BaseFields, CorrespondenceInput, HkBase, Level};

/// `ℝ⁴ ∋ (x, y, u, v)` with `z = x + i y`, `w = u − i v`,
/// `g₀ = dz dz̄ − ε₂ dw dw̄`, `ω₂ + i ω₃ = dz ∧ dw` and
/// `f = ε₁ε₂ w w̄ + shift`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatModel {
    pub signs: Signs,
    pub shift: f64,
}

impl FlatModel {
    pub fn new(signs: Signs) -> FlatModel {
        FlatModel { signs, shift: 0.0 }
    }

    pub fn with_shift(signs: Signs, shift: f64) -> FlatModel {
        FlatModel { signs, shift }
    }

    pub fn metric(&self) -> DMatrix<f64> {
        let (e1, e2) = (self.signs.eps1.f(), self.signs.eps2.f());
        DMatrix::from_diagonal(&nalgebra::dvector![1.0, -e1, -e2, e1 * e2])
    }

    /// `ω₁, ω₂, ω₃` as constant matrices.
    pub fn forms(&self) -> [DMatrix<f64>; 3] {
        let e1 = self.signs.eps1.f();
        let g = self.metric();
        #[rustfmt::skip]
        let j1 = DMatrix::from_row_slice(4, 4, &[
            0.0, e1, 0.0, 0.0,
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, -e1,
            0.0, 0.0, -1.0, 0.0,
        ]);
        let w1 = crate::geomkit::kahler_form(&g, &j1, self.signs.eps1);
        let mut w2 = DMatrix::zeros(4, 4);
        let mut w3 = DMatrix::zeros(4, 4);
        let put = |m: &mut DMatrix<f64>, i: usize, j: usize, v: f64| {
            m[(i, j)] = v;
            m[(j, i)] = -v;
        };
        put(&mut w2, 0, 2, 1.0);
        put(&mut w2, 1, 3, -e1);
        put(&mut w3, 1, 2, 1.0);
        put(&mut w3, 0, 3, -1.0);
        [w1, w2, w3]
    }

    /// `J_α = ε_α g⁻¹ ω_α`.
    pub fn structures(&self) -> [DMatrix<f64>; 3] {
        let ginv = self.metric().try_inverse().expect("diagonal signs");
        let w = self.forms();
        [1, 2, 3].map(|a| &ginv * &w[a - 1] * self.signs.eps(a).f())
    }

    /// `w w̄ = u² − ε₁ v²`.
    pub fn w_norm(&self, y: &[f64]) -> f64 {
        y[2] * y[2] - self.signs.eps1.f() * y[3] * y[3]
    }

    /// The level set `{v = v₀}`; `{s = 0}` is never transversal here since
    /// the `s`-component of `Z₁ᴾ` vanishes identically.
    pub fn level(v0: f64) -> Level {
        Level::coordinate(3, v0)
    }
}

impl HkBase for FlatModel {
    fn name(&self) -> String {
        format!(
            "flat model (eps1 = {}, eps2 = {}, shift = {})",
            self.signs.eps1.f(),
            self.signs.eps2.f(),
            self.shift
        )
    }

    fn chart(&self) -> Chart {
        Chart::new("flat", ["x", "y", "u", "v"].map(String::from).to_vec()).expect("labels")
    }

    fn signs(&self) -> Signs {
        self.signs
    }

    fn order_loss(&self) -> usize {
        0
    }

    fn admissible(&self, y: &[f64]) -> Result<()> {
        if y.len() != 4 {
            return Err(Error::usage("flat model points have four coordinates"));
        }
        let ww = self.w_norm(y);
        if ww.abs() < 1e-9 {
            return Err(Error::Assumption(
                "w conj(w) vanishes: sigma and sigma1 undefined".into(),
            ));
        }
        let f = self.signs.eps1.f() * self.signs.eps2.f() * ww + self.shift;
        if f.abs() < 1e-9 {
            return Err(Error::Assumption("f vanishes: sigma undefined".into()));
        }
        Ok(())
    }

    fn fields(&self, y: &[Jet]) -> Result<BaseFields> {
        let sp = Arc::clone(y[0].space());
        let (e1, e2) = (self.signs.eps1.f(), self.signs.eps2.f());
        let g = self.metric();
        let w = self.forms();
        let j = self.structures();
        let (x, yy, u, v) = (&y[0], &y[1], &y[2], &y[3]);
        let zero = x.zero_like();
        let f = (u * u - &(v * v).scale(e1)).scale(e1 * e2) + self.shift;
        let df = vec![
            zero.clone(),
            zero.clone(),
            u.scale(2.0 * e1 * e2),
            v.scale(-2.0 * e2),
        ];
        // ω₁(Z, ·) = −df
        let m = w[0]
            .transpose()
            .try_inverse()
            .ok_or_else(|| Error::Geometry("omega1 is degenerate".into()))?;
        let z = JMat::from_f64(&sp, &(-m)).mul_vec(&df);
        let eta0 = vec![
            yy.scale(-0.5),
            x.scale(0.5),
            v.scale(0.5 * e2),
            u.scale(-0.5 * e2),
        ];
        let c = |m: &DMatrix<f64>| JMat::from_f64(&sp, m);
        Ok(BaseFields {
            g: c(&g),
            j: [c(&j[0]), c(&j[1]), c(&j[2])],
            omega: [c(&w[0]), c(&w[1]), c(&w[2])],
            f,
            df,
            z,
            eta0,
        })
    }
}

/// The flat model packaged with `M′ = {v = v₀}` through the given point.
pub fn flat_model(signs: Signs, pt: &[f64; 4]) -> Result<CorrespondenceInput> {
    flat_model_shifted(signs, 0.0, pt)
}

pub fn flat_model_shifted(signs: Signs, shift: f64, pt: &[f64; 4]) -> Result<CorrespondenceInput> {
    let model = FlatModel::with_shift(signs, shift);
    model.admissible(pt)?;
    CorrespondenceInput::new(Arc::new(model), FlatModel::level(pt[3]))
}

/// `f₁⁰ + f⁰` for the unshifted model, which vanishes identically.
pub fn flat_f1_plus_f(signs: Signs, pt: &[f64; 4]) -> Result<f64> {
    let input = flat_model(signs, pt)?;
    let mut p = pt.to_vec();
    p.push(0.0);
    let bd = super::bundle::bundle_data(&input, &p, 0)?;
    Ok(bd.f1.value() + bd.f().value())
}
