//! Residuals of the identities satisfied by the input and by the output of
//! the correspondence. Every residual is relative to `max(1, scale)`.

use nalgebra::DMatrix;

use crate::epsnum::{seed, Jet, JetSpace};
use crate::error::Result;
use crate::geomkit::{
    covariant_derivative_endomorphism, curvature, d_one_form, d_two_form, exterior_derivative,
    frame_matrix_residual, lie_covariant2, lie_endomorphism, model_curvature_r0, nijenhuis,
    q_invariance_residual, quaternion_algebra_residual, values, wedge, Form, JMat,
};

use super::base::HkBase;
use super::bundle::{BundleData, QkPoint};

fn amax(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

fn rel(diff: f64, scale: f64) -> f64 {
    diff / scale.max(1.0)
}

fn jmat_rel(a: &JMat, b: &JMat) -> f64 {
    let (av, bv) = (a.value(), b.value());
    rel(amax(&(&av - &bv)), amax(&av).max(amax(&bv)))
}

fn vec_rel(a: &[f64], b: &[f64]) -> f64 {
    let d = a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    let s = a.iter().chain(b).fold(0.0_f64, |m, x| m.max(x.abs()));
    rel(d, s)
}

fn form_rel(a: &Form, b: &Form) -> f64 {
    rel(a.sub(b).max_abs(), a.max_abs().max(b.max_abs()))
}

/// Residuals of the hypotheses on the input at a base point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BaseResiduals {
    pub algebra: f64,
    /// `max_α |dω_α|`.
    pub closed: f64,
    /// `ω_α + ε_α J_αᵀ g`.
    pub omega_consistency: f64,
    pub killing: f64,
    pub holomorphic: f64,
    /// `ℒ_Z J₂ − 2ε₁ J₃`.
    pub rotating: f64,
    /// `df + ω₁(Z, ·)`.
    pub moment: f64,
    /// `dη₀ − (ω₁ − ½ dβ)`.
    pub curvature_eta: f64,
}

impl BaseResiduals {
    pub fn max(&self) -> f64 {
        [
            self.algebra,
            self.closed,
            self.omega_consistency,
            self.killing,
            self.holomorphic,
            self.rotating,
            self.moment,
            self.curvature_eta,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn base_residuals(base: &dyn HkBase, y: &[f64]) -> Result<BaseResiduals> {
    base.admissible(y)?;
    let s = base.signs();
    let sp = JetSpace::get(y.len(), 1 + base.order_loss())?;
    let b = base.fields(&seed(&sp, y))?;
    let gv = b.g.value();
    let jv = [b.j[0].value(), b.j[1].value(), b.j[2].value()];
    let mut closed = 0.0_f64;
    let mut consistency = 0.0_f64;
    for a in 0..3 {
        let w = &b.omega[a];
        closed = closed.max(rel(d_two_form(w)?.max_abs(), amax(&w.value())));
        let expect = crate::geomkit::kahler_form(&gv, &jv[a], s.eps(a + 1));
        consistency = consistency.max(rel(amax(&(&expect - w.value())), amax(&expect)));
    }
    let killing = rel(amax(&lie_covariant2(&b.g, &b.z).value()), amax(&gv));
    let holomorphic = rel(amax(&lie_endomorphism(&b.j[0], &b.z).value()), amax(&jv[0]));
    let rot = lie_endomorphism(&b.j[1], &b.z).sub(&b.j[2].scale(2.0 * s.eps1.f()));
    let rotating = rel(amax(&rot.value()), amax(&jv[2]));
    let w1z: Vec<f64> = values(&b.omega[0].vec_mul(&b.z));
    let df = values(&b.df);
    let sum: Vec<f64> = df.iter().zip(&w1z).map(|(a, c)| a + c).collect();
    let moment = rel(
        sum.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
        df.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
    );
    let beta = b.g.mul_vec(&b.z);
    let d_eta = d_one_form(&b.eta0);
    let rhs = Form::from_matrix(&b.omega[0])?.sub(&d_one_form(&beta).scale(0.5));
    Ok(BaseResiduals {
        algebra: quaternion_algebra_residual(&gv, &jv, s),
        closed,
        omega_consistency: consistency,
        killing,
        holomorphic,
        rotating,
        moment,
        curvature_eta: form_rel(&d_eta, &rhs),
    })
}

/// Residuals of the bundle data on `P`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BundleResiduals {
    /// `θ₀ᴾ, θ₂ᴾ, θ₃ᴾ` and `θ₁ᴾ − (f/f₁)η` on `Z₁ᴾ`.
    pub theta_kernel: f64,
    /// `dθ_αᴾ − ε₁ε_α π*ω_α`.
    pub lemma: f64,
    /// `dη − π*(ω₁ − ½dβ)`.
    pub connection: f64,
    /// `η(X_P) − 1`.
    pub normalisation: f64,
}

pub fn bundle_residuals(bd: &BundleData) -> Result<BundleResiduals> {
    let s = bd.signs;
    let z1 = values(&bd.z1);
    let ratio = bd.f().value() / bd.f1.value();
    let eval = |c: &[f64]| c.iter().zip(&z1).map(|(a, b)| a * b).sum::<f64>();
    let th: Vec<Vec<f64>> = bd.theta.iter().map(|t| values(t)).collect();
    let eta = values(&bd.eta);
    let xp = bd.fundamental_field();
    let shifted: Vec<f64> = th[1].iter().zip(&eta).map(|(a, e)| a - ratio * e).collect();
    let scale = th
        .iter()
        .flatten()
        .chain(&z1)
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    let kernel = [eval(&th[0]), eval(&th[2]), eval(&th[3]), eval(&shifted)]
        .into_iter()
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut lemma = 0.0_f64;
    for a in 1..=3 {
        let dth = d_one_form(&bd.theta[a]);
        let w = Form::from_matrix(&bd.pullback2(&bd.base.omega[a - 1]))?
            .scale(s.eps1.f() * s.eps(a).f());
        lemma = lemma.max(form_rel(&dth, &w));
    }
    let beta = bd.pullback1(&bd.beta);
    let rhs = Form::from_matrix(&bd.pullback2(&bd.base.omega[0]))?
        .sub(&d_one_form(&beta).scale(0.5));
    Ok(BundleResiduals {
        theta_kernel: rel(kernel, scale * scale),
        lemma,
        connection: form_rel(&d_one_form(&bd.eta), &rhs),
        normalisation: (eta.iter().zip(xp.iter()).map(|(a, b)| a * b).sum::<f64>() - 1.0).abs(),
    })
}

/// Residuals certifying the ε-quaternionic Kähler structure on `M′`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QkResiduals {
    pub algebra: f64,
    pub symmetry: f64,
    pub condition_number: f64,
    /// `ℒ_X g′`.
    pub killing: f64,
    pub nu: f64,
    pub nu_expected: f64,
    /// Ricci contraction of `W = R − νR₀`, relative to `|Ric|`.
    pub weyl_trace: f64,
    pub weyl_q_invariance: f64,
    pub nijenhuis: f64,
    /// `dω′_α − 2ε₃(ε_γ θ̄_β∧ω′_γ − ε_β θ̄_γ∧ω′_β)`.
    pub domega: f64,
    /// `dΩ₄`.
    pub four_form: f64,
    /// `∇μ − Σ ω′_α(X,·) J′_α`.
    pub moment_map: f64,
    /// `ℒ_X ω′₁`.
    pub lie_omega1: f64,
    /// `ℒ_X ω′₂ − 2a′ω′₃` and `ℒ_X ω′₃ − 2ε₁a′ω′₂`, the rotation forced by
    /// `μ = −J′₁/(2|f′|)` and `ν = −4ε₁σ`.
    pub lie_omega23: f64,
    /// `θ̄₂ − ε₂|f′|ι_Xω′₃` and `θ̄₃ + ε₂|f′|ι_Xω′₂`.
    pub theta_bar: f64,
    /// `J′_α` against the horizontal-lift transport of `J_α`.
    pub projector: f64,
    /// Matrices of `J′_α` on `(Z′, J′₁Z′, J′₂Z′, J′₃Z′)`.
    pub frame: f64,
}

pub fn algebra_residual(q: &QkPoint) -> f64 {
    quaternion_algebra_residual(&q.g_value(), &q.j_values(), q.signs())
}

/// Killing residual `ℒ_X g′`.
pub fn killing_residual(q: &QkPoint) -> f64 {
    rel(amax(&lie_covariant2(&q.g, &q.x).value()), amax(&q.g_value()))
}

pub fn nijenhuis_residual(j: &JMat) -> Result<f64> {
    let n = nijenhuis(j, 1e-8)?;
    let scale = amax(&j.value()).powi(2);
    Ok(rel(n.iter().fold(0.0_f64, |m, x| m.max(x.abs())), scale))
}

/// `∇μ − Σ_α ω′_α(X, ·) J′_α` with `μ = −J′₁/(2|f′|)`.
pub fn moment_map_residual(q: &QkPoint) -> Result<f64> {
    let fabs = q.f.scale(q.sigma().f());
    let mu = q.j[0].scale_jet(&fabs.recip().scale(-0.5));
    let nabla = covariant_derivative_endomorphism(&q.g, &mu)?;
    let jv = q.j_values();
    let iw: Vec<Vec<f64>> = q.omega.iter().map(|w| values(&w.vec_mul(&q.x))).collect();
    let mut worst = 0.0_f64;
    let mut scale = 0.0_f64;
    for (c, nc) in nabla.iter().enumerate() {
        let mut rhs = DMatrix::zeros(q.dim(), q.dim());
        for a in 0..3 {
            rhs += &jv[a] * iw[a][c];
        }
        worst = worst.max(amax(&(nc - &rhs)));
        scale = scale.max(amax(nc)).max(amax(&rhs));
    }
    Ok(rel(worst, scale))
}

pub fn qk_residuals(q: &QkPoint) -> Result<QkResiduals> {
    let s = q.signs();
    let e = |a: usize| s.eps(a).f();
    let gv = q.g_value();
    let jv = q.j_values();
    let sigma = q.sigma().f();
    let symmetry = rel(amax(&(&gv - gv.transpose())), amax(&gv));
    let cd = curvature(&q.g)?;
    let nu = cd.nu.expect("dimension is a multiple of four");
    let r0 = model_curvature_r0(&gv, &jv, s, 1e-6)?;
    let w = cd.riemann.sub(&r0.scale(nu));
    let weyl_trace = rel(amax(&w.ricci()), amax(&cd.ricci));
    let weyl_q_invariance = q_invariance_residual(&w, &jv);
    let nij = nijenhuis_residual(&q.j[0])?;

    let w_forms: Vec<Form> = q
        .omega
        .iter()
        .map(Form::from_matrix)
        .collect::<Result<_>>()?;
    let tb: Vec<Form> = q.theta_bar.iter().map(|t| Form::one_form(t)).collect();
    let mut domega = 0.0_f64;
    let mut four = Form::from_fn(q.dim(), 4, |_| q.f.zero_like());
    for al in 1..=3 {
        let (be, ga) = (al % 3 + 1, (al + 1) % 3 + 1);
        let lhs = exterior_derivative(&w_forms[al - 1]);
        let rhs = wedge(&tb[be], &w_forms[ga - 1])
            .scale(e(ga))
            .sub(&wedge(&tb[ga], &w_forms[be - 1]).scale(e(be)))
            .scale(2.0 * e(3));
        domega = domega.max(form_rel(&lhs, &rhs));
        four = four.add(&wedge(&w_forms[al - 1], &w_forms[al - 1]).scale(e(al)));
    }
    let d_four = exterior_derivative(&four);
    let four_form = rel(d_four.max_abs(), four.max_abs());

    let a = &q.a;
    let lie: Vec<JMat> = q.omega.iter().map(|w| lie_covariant2(w, &q.x)).collect();
    let zero = JMat::zeros(&q.space, q.dim(), q.dim());
    let lie_omega1 = jmat_rel(&lie[0], &zero);
    let want2 = q.omega[2].scale_jet(&a.scale(2.0));
    let want3 = q.omega[1].scale_jet(&a.scale(2.0 * e(1)));
    let lie_omega23 = jmat_rel(&lie[1], &want2).max(jmat_rel(&lie[2], &want3));

    let fabs = q.f.value().abs();
    let ix3 = values(&q.omega[2].vec_mul(&q.x));
    let ix2 = values(&q.omega[1].vec_mul(&q.x));
    let t2: Vec<f64> = ix3.iter().map(|v| e(2) * fabs * v).collect();
    let t3: Vec<f64> = ix2.iter().map(|v| -e(2) * fabs * v).collect();
    let theta_bar = vec_rel(&values(&q.theta_bar[2]), &t2).max(vec_rel(&values(&q.theta_bar[3]), &t3));

    let proj = q.projected_structures()?;
    let projector = (0..3)
        .map(|a| rel(amax(&(&proj[a] - &jv[a])), amax(&jv[a])))
        .fold(0.0, f64::max);
    let frame = frame_matrix_residual(&jv, &q.z_prime()?, s)?;

    Ok(QkResiduals {
        algebra: quaternion_algebra_residual(&gv, &jv, s),
        symmetry,
        condition_number: q.condition_number(),
        killing: killing_residual(q),
        nu,
        nu_expected: -4.0 * s.eps1.f() * sigma,
        weyl_trace,
        weyl_q_invariance,
        nijenhuis: nij,
        domega,
        four_form,
        moment_map: moment_map_residual(q)?,
        lie_omega1,
        lie_omega23,
        theta_bar,
        projector,
        frame,
    })
}

/// Nijenhuis residual of the deliberately non-integrable perturbations
/// `J′₁ + t (xⁱ − xⁱ(p)) J′₁J′₂`, largest over the chart directions `i`.
pub fn perturbed_nijenhuis(q: &QkPoint, t: f64) -> Result<f64> {
    let j = &q.j[0];
    let k = JMat::from_f64(&q.space, &(j.value() * q.j[1].value()));
    let mut worst = 0.0_f64;
    for (i, p) in q.point.iter().enumerate() {
        let phi = Jet::variable(&q.space, i, *p) - *p;
        worst = worst.max(nijenhuis_residual(&j.add(&k.scale_jet(&phi.scale(t))))?);
    }
    Ok(worst)
}
