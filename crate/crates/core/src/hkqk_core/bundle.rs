//! Bundle data on `P = M × ℝ_s` and the induced structure on `M′`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::epsnum::{seed, Jet, JetSpace, Sign};
use crate::error::{Error, Result};
use crate::geomkit::{
    d_one_form, drop_component, pad, restrict_vec, values, wedge11, Form, JMat, Signs,
};

use super::base::{BaseFields, CorrespondenceInput, Level};

/// Smallest `|f|`, `|f₁|` accepted, relative to the size of `f`.
pub const SIGN_TOL: f64 = 1e-9;

/// Smallest transversal component of `Z₁ᴾ` accepted.
pub const TRANSVERSAL_TOL: f64 = 1e-10;

fn sign_of(v: f64) -> Sign {
    if v < 0.0 {
        Sign::MINUS
    } else {
        Sign::PLUS
    }
}

/// Data on `P` at one point. All jets live in the bundle chart
/// (base coordinates, then `s`).
#[derive(Clone, Debug)]
pub struct BundleData {
    pub signs: Signs,
    pub base: BaseFields,
    /// `η = ds + π*η₀`.
    pub eta: Vec<Jet>,
    /// `β = g(Z, ·)` on the base.
    pub beta: Vec<Jet>,
    pub f1: Jet,
    /// `θ₀ᴾ … θ₃ᴾ`.
    pub theta: [Vec<Jet>; 4],
    pub g_p: JMat,
    /// The degenerate tensor whose restriction to `M′` is `g′`.
    pub gtilde: JMat,
    pub z1: Vec<Jet>,
    /// `A = ∂y/∂w` from the adapted chart `w` to the product chart `y`.
    /// Every bundle tensor above has components in the adapted chart.
    pub chart_map: DMatrix<f64>,
}

impl BundleData {
    pub fn dim(&self) -> usize {
        self.eta.len()
    }

    pub fn f(&self) -> &Jet {
        &self.base.f
    }

    pub fn sigma(&self) -> Sign {
        sign_of(self.base.f.value())
    }

    pub fn sigma1(&self) -> Sign {
        sign_of(self.f1.value())
    }

    /// Horizontal lift `Ỹ = Y − η₀(Y) ∂_s` of a base vector, in the adapted chart.
    pub fn horizontal_lift(&self, y: &[f64]) -> DVector<f64> {
        let m = y.len();
        let eta0 = values(&self.base.eta0);
        let mut v = DVector::zeros(m + 1);
        for i in 0..m {
            v[i] = y[i];
        }
        v[m] = -eta0.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        self.chart_inverse() * v
    }

    pub fn chart_inverse(&self) -> DMatrix<f64> {
        self.chart_map
            .clone()
            .try_inverse()
            .expect("shear is unimodular")
    }

    /// `π*` of a base 2-tensor, in the adapted chart.
    pub fn pullback2(&self, b: &JMat) -> JMat {
        let a = JMat::from_f64(self.f().space(), &self.chart_map);
        a.transpose().mul(&b.embed(self.dim(), 0)).mul(&a)
    }

    /// `π*` of a base covector, in the adapted chart.
    pub fn pullback1(&self, c: &[Jet]) -> Vec<Jet> {
        let a = JMat::from_f64(self.f().space(), &self.chart_map);
        a.transpose().mul_vec(&pad(c, self.dim()))
    }

    /// `X_P = ∂_s|_y` in the adapted chart.
    pub fn fundamental_field(&self) -> DVector<f64> {
        self.chart_inverse().column(self.dim() - 1).into_owned()
    }

    fn into_chart(mut self, a: DMatrix<f64>) -> BundleData {
        let aj = JMat::from_f64(self.f().space(), &a);
        let ainv = JMat::from_f64(self.f().space(), &a.clone().try_inverse().expect("shear"));
        let at = aj.transpose();
        self.eta = at.mul_vec(&self.eta);
        self.theta = self.theta.map(|t| at.mul_vec(&t));
        self.g_p = at.mul(&self.g_p).mul(&aj);
        self.gtilde = at.mul(&self.gtilde).mul(&aj);
        self.z1 = ainv.mul_vec(&self.z1);
        self.chart_map = a;
        self
    }
}

/// `θ_aᴾ`, `g_P`, `Z₁ᴾ` and `g̃` at a bundle point given in the chart
/// adapted to `input.level`, with jets of order `order`.
pub fn bundle_data(input: &CorrespondenceInput, p: &[f64], order: usize) -> Result<BundleData> {
    let m = input.base.dim();
    if p.len() != m + 1 {
        return Err(Error::usage(format!(
            "bundle point has {} coordinates, expected {}",
            p.len(),
            m + 1
        )));
    }
    let level = input.level;
    let yv = level.to_bundle(p);
    input.base.admissible(&yv[..m])?;
    let sp = JetSpace::get(m + 1, order)?;
    let mut y = seed(&sp, p);
    if level.var < m {
        y[level.var] = &y[level.var] + &y[m].scale(level.tilt);
    }
    let base = input.base.fields(&y[..m])?;
    Ok(bundle_from_fields(input.base.signs(), base)?.into_chart(level.chart_map(m + 1)))
}

/// Bundle data from base fields already expressed in the bundle chart.
pub fn bundle_from_fields(signs: Signs, base: BaseFields) -> Result<BundleData> {
    let m = base.dim();
    let f = base.f.clone();
    let beta = base.g.mul_vec(&base.z);
    let gzz = crate::geomkit::dot(&base.z, &beta);
    let f1 = &f - &gzz.scale(0.5);
    let fv = f.value();
    let f1v = f1.value();
    if fv.abs() < SIGN_TOL {
        return Err(Error::Assumption(format!(
            "f = {fv:e} vanishes: sigma = sign f undefined"
        )));
    }
    if f1v.abs() < SIGN_TOL * fv.abs().max(1.0) {
        return Err(Error::Assumption(format!(
            "f1 = {f1v:e} vanishes: sigma1 = sign f1 undefined"
        )));
    }
    let e2 = signs.eps2.f();
    let one = f.constant_like(1.0);
    let zero = f.zero_like();
    let lift = |c: Vec<Jet>, ds: &Jet| {
        let mut v = c;
        v.push(ds.clone());
        v
    };
    let eta = lift(base.eta0.clone(), &one);
    let theta0 = lift(base.df.iter().map(|x| x.scale(0.5)).collect(), &zero);
    let theta1: Vec<Jet> = eta
        .iter()
        .zip(pad(&beta, m + 1))
        .map(|(a, b)| a + &b.scale(0.5))
        .collect();
    let theta2 = lift(
        base.omega[2].vec_mul(&base.z).iter().map(|x| x.scale(-0.5 * e2)).collect(),
        &zero,
    );
    let theta3 = lift(
        base.omega[1].vec_mul(&base.z).iter().map(|x| x.scale(0.5 * e2)).collect(),
        &zero,
    );
    let theta = [theta0, theta1, theta2, theta3];
    let g_p = JMat::square(&eta)
        .scale_jet(&f1.recip().scale(2.0))
        .add(&base.g.embed(m + 1, 0));
    let sigma = sign_of(fv).f();
    let mut quad = JMat::zeros(f.space(), m + 1, m + 1);
    for (a, th) in theta.iter().enumerate() {
        quad = quad.add(&JMat::square(th).scale(signs.eps(a).f()));
    }
    let finv = f.recip();
    let gtilde = g_p
        .sub(&quad.scale_jet(&finv.scale(2.0 * signs.eps1.f())))
        .scale_jet(&finv.scale(0.5 * sigma));
    let eta_z = crate::geomkit::dot(&base.eta0, &base.z);
    let z1 = lift(base.z.clone(), &(&f1 - &eta_z));
    Ok(BundleData {
        signs,
        base,
        eta,
        beta,
        f1,
        theta,
        g_p,
        gtilde,
        z1,
        chart_map: DMatrix::identity(m + 1, m + 1),
    })
}

/// The induced ε-quaternionic Kähler data at a point of `M′`.
#[derive(Clone, Debug)]
pub struct QkPoint {
    pub level: Level,
    /// Coordinates on `M′`.
    pub point: Vec<f64>,
    pub bundle: BundleData,
    /// Jet space of the `M′` chart.
    pub space: Arc<JetSpace>,
    pub g: JMat,
    pub j: [JMat; 3],
    pub omega: [JMat; 3],
    /// `θ̄_α = θ_αᴾ / f` pulled back to `M′`, `α = 0..3`.
    pub theta_bar: [Vec<Jet>; 4],
    pub dtheta_bar: [Form; 4],
    /// `f′ = f|_{M′}`.
    pub f: Jet,
    /// `a′`, from `X_P = X + a Z₁ᴾ`.
    pub a: Jet,
    /// Projection of `X_P` to `TM′`.
    pub x: Vec<Jet>,
}

impl QkPoint {
    pub fn signs(&self) -> Signs {
        self.bundle.signs
    }

    pub fn sigma(&self) -> Sign {
        self.bundle.sigma()
    }

    pub fn dim(&self) -> usize {
        self.g.rows()
    }

    pub fn g_value(&self) -> DMatrix<f64> {
        self.g.value()
    }

    pub fn j_values(&self) -> [DMatrix<f64>; 3] {
        [self.j[0].value(), self.j[1].value(), self.j[2].value()]
    }

    pub fn omega_values(&self) -> [DMatrix<f64>; 3] {
        [
            self.omega[0].value(),
            self.omega[1].value(),
            self.omega[2].value(),
        ]
    }

    /// Condition number of `g′` (ratio of extreme singular values).
    pub fn condition_number(&self) -> f64 {
        let sv = self.g_value().singular_values();
        sv.max() / sv.min()
    }

    /// Decomposition scalar `a′` and `f′` values.
    pub fn scalars(&self) -> (f64, f64) {
        (self.a.value(), self.f.value())
    }

    /// `Ψ: T_{π(p)}M → T_pM′`, `Y ↦ pr(Ỹ)` with `pr` the projection along `Z₁ᴾ`.
    pub fn lift_projector(&self) -> Result<DMatrix<f64>> {
        let m = self.dim();
        let k = self.level.var;
        let z1 = values(&self.bundle.z1);
        let mut psi = DMatrix::zeros(m, m);
        for i in 0..m {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            let yt = self.bundle.horizontal_lift(&e);
            let coef = yt[k] / z1[k];
            let mut col = Vec::with_capacity(m);
            for (r, z) in z1.iter().enumerate() {
                if r != k {
                    col.push(yt[r] - coef * z);
                }
            }
            psi.set_column(i, &DVector::from_vec(col));
        }
        Ok(psi)
    }

    /// `Ψ J_α Ψ⁻¹`, the transport of the base structure along horizontal lifts.
    pub fn projected_structures(&self) -> Result<[DMatrix<f64>; 3]> {
        let psi = self.lift_projector()?;
        let inv = psi.clone().try_inverse().ok_or_else(|| Error::Degenerate {
            what: "horizontal-lift projector".into(),
            step: self.dim(),
            pivot: 0.0,
        })?;
        let j = &self.bundle.base.j;
        Ok([
            &psi * j[0].value() * &inv,
            &psi * j[1].value() * &inv,
            &psi * j[2].value() * &inv,
        ])
    }

    /// `Z′ = pr(Z̃)`.
    pub fn z_prime(&self) -> Result<DVector<f64>> {
        let psi = self.lift_projector()?;
        Ok(psi * DVector::from_vec(values(&self.bundle.base.z)))
    }
}

/// Runs the correspondence at a point of `M′` (coordinates of the
/// submanifold chart).
pub fn qk_point(input: &CorrespondenceInput, pt: &[f64]) -> Result<QkPoint> {
    qk_point_with_order(input, pt, input.jet_order())
}

pub fn qk_point_with_order(
    input: &CorrespondenceInput,
    pt: &[f64],
    order: usize,
) -> Result<QkPoint> {
    let m = input.base.dim();
    if pt.len() != m {
        return Err(Error::usage(format!(
            "point of M' has {} coordinates, expected {m}",
            pt.len()
        )));
    }
    let p = input.embed(pt);
    let bundle = bundle_data(input, &p, order)?;
    induced(input.level, pt.to_vec(), bundle)
}

/// `g′`, `θ̄`, `ω′_α`, `J′_α`, `X` and `a′` from bundle data.
pub fn induced(level: Level, point: Vec<f64>, bundle: BundleData) -> Result<QkPoint> {
    let k = level.var;
    let n1 = bundle.dim();
    let m = n1 - 1;
    let s = bundle.signs;
    let order = bundle.f().order();
    let space = JetSpace::get(m, order)?;
    let z1k = bundle.z1[k].value();
    let z1_scale = values(&bundle.z1).iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if z1k.abs() <= TRANSVERSAL_TOL * z1_scale.max(1.0) {
        return Err(Error::Geometry(format!(
            "M' is not transversal to Z1^P: component {k} is {z1k:e}"
        )));
    }
    let g = bundle.gtilde.drop_index(k).restrict(k, &space);
    let finv = bundle.f().recip();
    let sigma = bundle.sigma().f();
    let tb_p: Vec<Vec<Jet>> = bundle
        .theta
        .iter()
        .map(|t| t.iter().map(|c| c * &finv).collect())
        .collect();
    let dtb: Vec<Form> = tb_p
        .iter()
        .map(|t| d_one_form(t).restrict_hyperplane(k, &space))
        .collect();
    let theta_bar: Vec<Vec<Jet>> = tb_p
        .iter()
        .map(|t| restrict_vec(&drop_component(t, k), k, &space))
        .collect();
    let mut omega = Vec::with_capacity(3);
    let mut j = Vec::with_capacity(3);
    let ginv = g.inverse("g'")?;
    for al in 1..=3 {
        let (be, ga) = (al % 3 + 1, (al + 1) % 3 + 1);
        let ea = s.eps(al).f();
        let w = dtb[al]
            .to_matrix()
            .scale(0.5 * sigma * s.eps1.f() * ea)
            .add(&wedge11(&theta_bar[be], &theta_bar[ga]).scale(sigma * s.eps2.f()));
        j.push(ginv.mul(&w).scale(ea));
        omega.push(w);
    }
    let f = bundle.f().restrict(k, &space);
    // X_P = ∂_s, split as X + a Z₁ᴾ with X tangent to M′
    let xp = bundle.fundamental_field();
    let a_p = bundle.z1[k].recip().scale(xp[k]);
    let x_p: Vec<Jet> = (0..n1)
        .map(|i| (&bundle.z1[i] * &a_p).scale(-1.0) + xp[i])
        .collect();
    let x = restrict_vec(&drop_component(&x_p, k), k, &space);
    let a = a_p.restrict(k, &space);
    let into3 = |v: Vec<JMat>| -> [JMat; 3] { v.try_into().expect("three structures") };
    Ok(QkPoint {
        level,
        point,
        space,
        g,
        j: into3(j),
        omega: into3(omega),
        theta_bar: theta_bar.try_into().expect("four one-forms"),
        dtheta_bar: dtb.try_into().expect("four two-forms"),
        f,
        a,
        x,
        bundle,
    })
}

/// `g′` at a point of `M′`.
pub fn qk_metric(input: &CorrespondenceInput, pt: &[f64]) -> Result<DMatrix<f64>> {
    let q = qk_point_with_order(input, pt, 1 + input.base.order_loss())?;
    Ok(q.g_value())
}

/// `J′_α`, `ω′_α` and `θ̄_α` at a point of `M′`.
#[derive(Clone, Debug)]
pub struct InducedStructures {
    pub j: [DMatrix<f64>; 3],
    pub omega: [DMatrix<f64>; 3],
    pub theta_bar: [DVector<f64>; 4],
}

pub fn induced_structures(input: &CorrespondenceInput, pt: &[f64]) -> Result<InducedStructures> {
    let q = qk_point_with_order(input, pt, 1 + input.base.order_loss())?;
    let tb = |a: usize| DVector::from_vec(values(&q.theta_bar[a]));
    Ok(InducedStructures {
        j: q.j_values(),
        omega: q.omega_values(),
        theta_bar: [tb(0), tb(1), tb(2), tb(3)],
    })
}
