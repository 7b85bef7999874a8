//! The rigid c-map: the ε-hyper-Kähler structure on `TM` of a conical
//! affine special ε₁-Kähler manifold, with its rotating Killing field.
//!
//! The displayed formulas live in the affine chart `(q^a, q̂^a)`. The chart
//! actually seeded with jets is `y = (x^I, u^I, q̂^a)` with `X = x + i u`,
//! related to `(q, q̂)` by `L = blockdiag(∂q/∂(x,u), 1)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::epsnum::{seed, EpsComplex, Jet, JetSpace, Sign};
use crate::error::{Error, Result};
use crate::geomkit::{Chart, JMat, Signs};
use crate::hkqk_core::{BaseFields, HkBase};
use crate::special_kahler::{omega_matrix, CaskFields, Prepotential};

/// A point of `TM`: `X^I` and the fibre coordinates `q̂^a`.
#[derive(Clone, Debug, PartialEq)]
pub struct CmapPoint {
    pub x: Vec<EpsComplex<f64>>,
    pub qhat: Vec<f64>,
}

impl CmapPoint {
    /// Chart coordinates `(Re X, Im X, q̂)`.
    pub fn to_y(&self) -> Vec<f64> {
        self.x
            .iter()
            .map(|z| z.re)
            .chain(self.x.iter().map(|z| z.im))
            .chain(self.qhat.iter().copied())
            .collect()
    }

    pub fn from_y(y: &[f64], eps1: Sign) -> CmapPoint {
        let k = y.len() / 4;
        CmapPoint {
            x: (0..k).map(|i| EpsComplex::new(y[i], y[k + i], eps1)).collect(),
            qhat: y[2 * k..].to_vec(),
        }
    }
}

/// `p_a = 2 Ω_ab q̂^b`.
pub fn p_from_qhat(qhat: &[f64]) -> Vec<f64> {
    let om = omega_matrix(qhat.len() / 2);
    (om * DVector::from_column_slice(qhat) * 2.0).as_slice().to_vec()
}

/// `q̂^a = ½ Ω^{ab} p_b` with `Ω^{ab} = −Ω_ab`.
pub fn qhat_from_p(p: &[f64]) -> Vec<f64> {
    let om = omega_matrix(p.len() / 2);
    (om * DVector::from_column_slice(p) * -0.5).as_slice().to_vec()
}

fn block2(a: &JMat, b: &JMat, c: &JMat, d: &JMat) -> JMat {
    let k = a.rows();
    JMat::from_fn(2 * k, 2 * k, |i, j| match (i < k, j < k) {
        (true, true) => a.get(i, j).clone(),
        (true, false) => b.get(i, j - k).clone(),
        (false, true) => c.get(i - k, j).clone(),
        (false, false) => d.get(i - k, j - k).clone(),
    })
}

/// Rigid c-map fields at one point, in both charts.
#[derive(Clone, Debug)]
pub struct CmapFields {
    pub signs: Signs,
    pub c: f64,
    pub cask: CaskFields,
    pub qhat: Vec<Jet>,
    pub omega: JMat,
    /// `(q, q̂)` as functions of `y`.
    pub l: JMat,
    pub l_inv: JMat,
    /// `J^a_b = −½ Ω^{ac} H_cb`.
    pub j_small: JMat,
    pub g_q: JMat,
    pub j_q: [JMat; 3],
    pub omega_q: [JMat; 3],
    pub z_q: Vec<Jet>,
    pub eta0_q: Vec<Jet>,
    pub df_q: Vec<Jet>,
    pub f: Jet,
    pub f1: Jet,
}

impl CmapFields {
    pub fn new(f: &Prepotential, eps2: Sign, c: f64, y: &[Jet]) -> Result<CmapFields> {
        let k = f.n() + 1;
        if y.len() != 4 * k {
            return Err(Error::usage(format!(
                "rigid c-map chart has dimension {}, got {}",
                4 * k,
                y.len()
            )));
        }
        let e1 = f.eps1();
        let signs = Signs::new(e1, eps2);
        let x: Vec<EpsComplex<Jet>> = (0..k)
            .map(|i| EpsComplex::new(y[i].clone(), y[k + i].clone(), e1))
            .collect();
        let cask = CaskFields::new(f, x)?;
        let sp = Arc::clone(y[0].space());
        let qhat = y[2 * k..].to_vec();
        let two_k = 2 * k;
        let om = JMat::from_f64(&sp, &omega_matrix(k));
        let id = JMat::identity(&sp, two_k);
        let zero = JMat::zeros(&sp, two_k, two_k);
        let l = block2(&cask.jq, &zero, &zero, &id);
        let l_inv = block2(&cask.jq_inv, &zero, &zero, &id);
        let hab = &cask.hab;
        let (e1f, e2f) = (e1.f(), eps2.f());
        // Ω^{ab} = −Ω_ab, so J = −½ Ω^{up} H = ½ Ω H
        let j_small = om.mul(hab).scale(0.5);
        let g_q = block2(hab, &zero, &zero, &hab.scale(-e2f));
        let j1 = block2(&j_small, &zero, &zero, &j_small.scale(-1.0));
        let j2 = block2(&zero, &id.scale(e2f), &id, &zero);
        let j3 = block2(&zero, &j_small.scale(e2f), &j_small.scale(-1.0), &zero);
        let w1 = block2(&om.scale(-2.0), &zero, &zero, &om.scale(-2.0 * e2f));
        let w2 = block2(&zero, hab, &hab.scale(-1.0), &zero);
        let w3 = block2(&zero, &om.scale(2.0), &om.scale(2.0), &zero);
        // Z^b = −ε₁ H_a Ω^{ab} = ε₁ (Ωᵀh)^b
        let omt = om.transpose();
        let zq_small = omt.mul_vec(&cask.h_grad).iter().map(|v| v.scale(e1f)).collect::<Vec<_>>();
        let zjet = Jet::zero(&sp);
        let mut z_q = zq_small;
        z_q.extend((0..two_k).map(|_| zjet.clone()));
        // η₀ = q^a Ω_ab dq^b − ε₂ q̂^a Ω_ab dq̂^b
        let mut eta0_q = om.vec_mul(&cask.q);
        eta0_q.extend(om.vec_mul(&qhat).into_iter().map(|v| v.scale(-e2f)));
        let mut df_q: Vec<Jet> = cask.h_grad.iter().map(|v| v.scale(-2.0 * e1f)).collect();
        df_q.extend((0..two_k).map(|_| zjet.clone()));
        let h2 = cask.h.scale(2.0);
        let fj = (&h2 + (-c)).scale(-e1f);
        let f1 = (&h2 + c).scale(e1f);
        Ok(CmapFields {
            signs,
            c,
            cask,
            qhat,
            omega: om,
            l,
            l_inv,
            j_small,
            g_q,
            j_q: [j1, j2, j3],
            omega_q: [w1, w2, w3],
            z_q,
            eta0_q,
            df_q,
            f: fj,
            f1,
        })
    }

    pub fn k(&self) -> usize {
        self.cask.k()
    }

    pub fn q(&self) -> &[Jet] {
        &self.cask.q
    }

    pub fn covector_to_y(&self, c: &[Jet]) -> Vec<Jet> {
        self.l.transpose().mul_vec(c)
    }

    pub fn vector_to_y(&self, v: &[Jet]) -> Vec<Jet> {
        self.l_inv.mul_vec(v)
    }

    pub fn bilinear_to_y(&self, b: &JMat) -> JMat {
        self.l.transpose().mul(b).mul(&self.l)
    }

    pub fn endomorphism_to_y(&self, e: &JMat) -> JMat {
        self.l_inv.mul(e).mul(&self.l)
    }

    /// The structure in the seeded chart.
    pub fn base_fields(&self) -> BaseFields {
        let [j1, j2, j3] = &self.j_q;
        let [w1, w2, w3] = &self.omega_q;
        BaseFields {
            g: self.bilinear_to_y(&self.g_q),
            j: [
                self.endomorphism_to_y(j1),
                self.endomorphism_to_y(j2),
                self.endomorphism_to_y(j3),
            ],
            omega: [
                self.bilinear_to_y(w1),
                self.bilinear_to_y(w2),
                self.bilinear_to_y(w3),
            ],
            f: self.f.clone(),
            df: self.covector_to_y(&self.df_q),
            z: self.vector_to_y(&self.z_q),
            eta0: self.covector_to_y(&self.eta0_q),
        }
    }

    /// `β = g(Z, ·) = −4 q^a Ω_ab dq^b` in the `(q, q̂)` chart.
    pub fn beta_q(&self) -> Vec<Jet> {
        let mut b: Vec<Jet> = self
            .omega
            .vec_mul(self.q())
            .into_iter()
            .map(|v| v.scale(-4.0))
            .collect();
        let z = self.f.zero_like();
        b.extend((0..2 * self.k()).map(|_| z.clone()));
        b
    }

    /// Bundle-chart covectors of the displayed `θ_a^P` (`(q, q̂, s)` chart
    /// converted to `(y, s)`).
    pub fn explicit_theta(&self) -> [Vec<Jet>; 4] {
        let k2 = 2 * self.k();
        let (e1, e2) = (self.signs.eps1.f(), self.signs.eps2.f());
        let zero = self.f.zero_like();
        let zeros = |n: usize| vec![zero.clone(); n];
        let h = &self.cask.h_grad;
        let q_om = self.omega.vec_mul(self.q());
        let qh_om = self.omega.vec_mul(&self.qhat);
        let mut t0: Vec<Jet> = h.iter().map(|v| v.scale(-e1)).collect();
        t0.extend(zeros(k2));
        let mut t1: Vec<Jet> = q_om.iter().map(|v| v.scale(-1.0)).collect();
        t1.extend(qh_om.iter().map(|v| v.scale(-e2)));
        let mut t2 = zeros(k2);
        t2.extend(h.iter().map(|v| v.scale(e1 * e2)));
        let mut t3 = zeros(k2);
        t3.extend(q_om.iter().map(|v| v.scale(-2.0 * e2)));
        let lift = |c: Vec<Jet>, ds: f64| {
            let mut y = self.covector_to_y(&c);
            y.push(self.f.constant_like(ds));
            y
        };
        // −ε₂ ½ dφ̃ = ds
        [lift(t0, 0.0), lift(t1, 1.0), lift(t2, 0.0), lift(t3, 0.0)]
    }

    /// Displayed `Z₁ᴾ = −ε₁H_aΩ^{ab}∂_b − 2ε₁ε₂c ∂_φ̃` in the `(y, s)` chart,
    /// using `∂_φ̃ = −(ε₂/2)∂_s`.
    pub fn explicit_z1p(&self) -> Vec<Jet> {
        let mut v = self.vector_to_y(&self.z_q);
        v.push(self.f.constant_like(self.signs.eps1.f() * self.c));
        v
    }

    /// Right-hand side of the displayed degenerate tensor on `P`, which
    /// equals `2ε₁σ g̃`, in the `(y, s)` chart.
    pub fn gtilde_rhs(&self) -> JMat {
        let k2 = 2 * self.k();
        let (e1, e2) = (self.signs.eps1.f(), self.signs.eps2.f());
        let c = self.c;
        let hv = &self.cask.h;
        let rho = hv.scale(2.0) + (-c);
        let rho_inv = rho.recip();
        let rho_inv2 = &rho_inv * &rho_inv;
        let h = &self.cask.h_grad;
        let hab = &self.cask.hab;
        // H̃_ab = −H_ab/(2H−c) + 2 H_a H_b/(2H−c)²
        let ht = hab
            .scale_jet(&(-&rho_inv))
            .add(&JMat::outer(h, h).scale_jet(&rho_inv2.scale(2.0)));
        let sp = Arc::clone(self.f.space());
        let zero = JMat::zeros(&sp, k2, k2);
        let t1 = block2(&ht, &zero, &zero, &ht.scale(-e2));
        let q_om = self.omega.vec_mul(self.q());
        let qh_om = self.omega.vec_mul(&self.qhat);
        let z = self.f.zero_like();
        let a2: Vec<Jet> = (0..k2).map(|_| z.clone()).chain(q_om.iter().cloned()).collect();
        let a3: Vec<Jet> = q_om.iter().cloned().chain((0..k2).map(|_| z.clone())).collect();
        let mut t = t1.add(&JMat::square(&a2).scale_jet(&rho_inv2.scale(8.0 * e1 * e2)));
        t = t.sub(&JMat::square(&a3).scale_jet(&(hv.scale(2.0) * &rho).recip().scale(4.0 * e1)));
        let full = |m: &JMat| {
            let y = self.bilinear_to_y(m);
            JMat::from_fn(2 * k2 + 1, 2 * k2 + 1, |i, j| {
                if i < 2 * k2 && j < 2 * k2 {
                    y.get(i, j).clone()
                } else {
                    z.clone()
                }
            })
        };
        let t = full(&t);
        // bracket ½dφ̃ + q̂Ωdq̂ + ε₂ c/(2H) qΩdq, with ½dφ̃ = −ε₂ ds
        let ratio = hv.recip().scale(0.5 * e2 * c);
        let br_q: Vec<Jet> = q_om
            .iter()
            .map(|v| v * &ratio)
            .chain(qh_om.iter().cloned())
            .collect();
        let mut br = self.covector_to_y(&br_q);
        br.push(self.f.constant_like(-e2));
        let h2p = hv.scale(2.0) + c;
        let coeff = (&(&rho * &rho) * &h2p).recip() * hv;
        t.sub(&JMat::square(&br).scale_jet(&coeff.scale(8.0 * e1)))
    }
}

/// The rigid c-map of a prepotential as an input of the correspondence,
/// with moment map `f = −ε₁(2H − c)`.
#[derive(Clone, Debug)]
pub struct RigidCmap {
    pub prepotential: Prepotential,
    pub eps2: Sign,
    pub c: f64,
}

impl RigidCmap {
    pub fn new(prepotential: Prepotential, eps2: Sign, c: f64) -> RigidCmap {
        RigidCmap {
            prepotential,
            eps2,
            c,
        }
    }

    pub fn fields_at(&self, y: &[Jet]) -> Result<CmapFields> {
        CmapFields::new(&self.prepotential, self.eps2, self.c, y)
    }

    /// Index of `u⁰ = Im X⁰` in the base chart; `{u⁰ = 0}` is `{arg X⁰ = 0}`
    /// on the admissible domain.
    pub fn phase_variable(&self) -> usize {
        self.prepotential.n() + 1
    }
}

impl HkBase for RigidCmap {
    fn name(&self) -> String {
        format!(
            "rigid c-map ({} prepotential, n = {})",
            self.prepotential.name(),
            self.prepotential.n()
        )
    }

    fn chart(&self) -> Chart {
        let k = self.prepotential.n() + 1;
        let labels = (0..k)
            .map(|i| format!("x{i}"))
            .chain((0..k).map(|i| format!("u{i}")))
            .chain((1..=2 * k).map(|a| format!("qhat{a}")))
            .collect();
        Chart::new("rigid c-map", labels).expect("distinct labels")
    }

    fn signs(&self) -> Signs {
        Signs::new(self.prepotential.eps1(), self.eps2)
    }

    fn order_loss(&self) -> usize {
        0
    }

    fn admissible(&self, y: &[f64]) -> Result<()> {
        let p = CmapPoint::from_y(y, self.prepotential.eps1());
        self.prepotential.admissible(&p.x)?;
        let (nm, _) = self.prepotential.n_and_r(&p.x)?;
        let h = 0.5 * crate::special_kahler::hermitian_form(&nm, &p.x);
        let scale = h.abs().max(1.0);
        if (2.0 * h - self.c).abs() < 1e-6 * scale {
            return Err(Error::Assumption(
                "f = -eps1 (2H - c) vanishes: sigma undefined".into(),
            ));
        }
        if (2.0 * h + self.c).abs() < 1e-6 * scale {
            return Err(Error::Assumption(
                "f1 = eps1 (2H + c) vanishes: sigma1 undefined".into(),
            ));
        }
        Ok(())
    }

    fn fields(&self, y: &[Jet]) -> Result<BaseFields> {
        Ok(self.fields_at(y)?.base_fields())
    }
}

/// Components of the structure in the `(q, q̂)` chart at a point.
#[derive(Clone, Debug)]
pub struct HkStructure {
    pub g: DMatrix<f64>,
    pub j: [DMatrix<f64>; 3],
    pub omega: [DMatrix<f64>; 3],
}

impl HkStructure {
    /// `max |ω_α + ε_α J_αᵀ g|`, relative.
    pub fn omega_consistency(&self, s: Signs) -> f64 {
        (0..3)
            .map(|a| {
                let w = crate::geomkit::kahler_form(&self.g, &self.j[a], s.eps(a + 1));
                (&w - &self.omega[a]).amax() / self.omega[a].amax().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

fn constant_fields(
    f: &Prepotential,
    eps2: Sign,
    c: f64,
    pt: &CmapPoint,
    order: usize,
) -> Result<CmapFields> {
    let y = pt.to_y();
    let sp = JetSpace::get(y.len(), order)?;
    CmapFields::new(f, eps2, c, &seed(&sp, &y))
}

/// The displayed structure at a point.
pub fn hk_structure(f: &Prepotential, eps2: Sign, pt: &CmapPoint) -> Result<HkStructure> {
    f.admissible(&pt.x)?;
    let cf = constant_fields(f, eps2, 0.0, pt, 0)?;
    Ok(HkStructure {
        g: cf.g_q.value(),
        j: [cf.j_q[0].value(), cf.j_q[1].value(), cf.j_q[2].value()],
        omega: [
            cf.omega_q[0].value(),
            cf.omega_q[1].value(),
            cf.omega_q[2].value(),
        ],
    })
}

/// Rotating field data at a point, in the `(q, q̂)` chart.
#[derive(Clone, Debug)]
pub struct RotatingField {
    pub z: DVector<f64>,
    pub f: f64,
    pub f1: f64,
    pub beta: DVector<f64>,
    pub beta_z: f64,
    pub h: f64,
    /// `max |df + ω₁(Z, ·)|`.
    pub moment_residual: f64,
    /// `|β(Z) + 8ε₁H|`.
    pub beta_z_residual: f64,
    /// `max |g(Z, ·) − β|`.
    pub beta_residual: f64,
    /// `|f₁ − f + g(Z, Z)/2|`.
    pub f1_residual: f64,
}

pub fn rotating_field(
    f: &Prepotential,
    eps2: Sign,
    c: f64,
    pt: &CmapPoint,
) -> Result<RotatingField> {
    let cmap = RigidCmap::new(f.clone(), eps2, c);
    cmap.admissible(&pt.to_y())?;
    let cf = constant_fields(f, eps2, c, pt, 0)?;
    let e1 = f.eps1().f();
    let g = cf.g_q.value();
    let z = DVector::from_iterator(cf.z_q.len(), cf.z_q.iter().map(|v| v.value()));
    let df = DVector::from_iterator(cf.df_q.len(), cf.df_q.iter().map(|v| v.value()));
    let w1 = cf.omega_q[0].value();
    let beta = DVector::from_iterator(4 * cf.k(), cf.beta_q().iter().map(|v| v.value()));
    let gz = &g * &z;
    let h = cf.cask.h.value();
    let beta_z = beta.dot(&z);
    let scale = df.amax().max(1.0);
    let fv = cf.f.value();
    let f1v = cf.f1.value();
    Ok(RotatingField {
        moment_residual: (&df + w1.transpose() * &z).amax() / scale,
        beta_z_residual: (beta_z + 8.0 * e1 * h).abs() / h.abs().max(1.0),
        beta_residual: (&gz - &beta).amax() / beta.amax().max(1.0),
        f1_residual: (f1v - fv + 0.5 * z.dot(&gz)).abs() / fv.abs().max(1.0),
        z,
        f: fv,
        f1: f1v,
        beta,
        beta_z,
        h,
    })
}

/// Residuals comparing the tangent-bundle structure with the cotangent
/// presentation pulled back along `p = 2Ωq̂`.
#[derive(Clone, Debug, PartialEq)]
pub struct CotangentResiduals {
    /// `Ω^{ab}H_bcΩ^{cd} − 4ε₁H^{ad}`.
    pub omega_h_omega: f64,
    pub metric: f64,
    pub forms: [f64; 3],
}

impl CotangentResiduals {
    pub fn max(&self) -> f64 {
        self.forms
            .iter()
            .fold(self.omega_h_omega.max(self.metric), |a, &b| a.max(b))
    }
}

fn dblock(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let k = a.nrows();
    let mut m = DMatrix::zeros(2 * k, 2 * k);
    m.view_mut((0, 0), (k, k)).copy_from(a);
    m.view_mut((0, k), (k, k)).copy_from(b);
    m.view_mut((k, 0), (k, k)).copy_from(c);
    m.view_mut((k, k), (k, k)).copy_from(d);
    m
}

pub fn cotangent_crosscheck(
    f: &Prepotential,
    eps2: Sign,
    pt: &CmapPoint,
) -> Result<CotangentResiduals> {
    let hk = hk_structure(f, eps2, pt)?;
    let cf = constant_fields(f, eps2, 0.0, pt, 0)?;
    let hab = cf.cask.hab.value();
    let hinv = cf.cask.hab_inv.value();
    let k2 = hab.nrows();
    let om = omega_matrix(k2 / 2);
    let om_up = -&om;
    let (e1, e2) = (f.eps1().f(), eps2.f());
    let id = DMatrix::<f64>::identity(k2, k2);
    let zero = DMatrix::<f64>::zeros(k2, k2);
    let lhs = &om_up * &hab * &om_up;
    let omega_h_omega = (&lhs - &hinv * (4.0 * e1)).amax() / lhs.amax().max(1.0);
    // (q, p) components; a sum c_ab dq^a ∧ dq^b has matrix c − cᵀ
    let g = dblock(&hab, &zero, &zero, &(&hinv * (e1 * e2)));
    let w1 = dblock(&(&om * -2.0), &zero, &zero, &(&om_up * (0.5 * e2)));
    let m2 = &om * &hinv * (2.0 * e1);
    let w2 = dblock(&zero, &m2, &(-m2.transpose()), &zero);
    let w3 = dblock(&zero, &id, &(-&id), &zero);
    let t = dblock(&id, &zero, &zero, &(&om * 2.0));
    let pull = |m: &DMatrix<f64>| t.transpose() * m * &t;
    let rel = |a: &DMatrix<f64>, b: &DMatrix<f64>| (a - b).amax() / b.amax().max(1.0);
    Ok(CotangentResiduals {
        omega_h_omega,
        metric: rel(&pull(&g), &hk.g),
        forms: [
            rel(&pull(&w1), &hk.omega[0]),
            rel(&pull(&w2), &hk.omega[1]),
            rel(&pull(&w3), &hk.omega[2]),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomkit::quaternion_algebra_residual;

    fn point(e1: Sign) -> CmapPoint {
        CmapPoint {
            x: vec![EpsComplex::new(1.1, 0.25, e1), EpsComplex::new(0.2, -0.15, e1)],
            qhat: vec![0.3, -0.4, 0.1, 0.25],
        }
    }

    #[test]
    fn structure_satisfies_the_algebra() {
        for s in Signs::all() {
            let f = Prepotential::quadratic_standard(1, s.eps1);
            let hk = hk_structure(&f, s.eps2, &point(s.eps1)).unwrap();
            assert!(quaternion_algebra_residual(&hk.g, &hk.j, s) < 1e-13, "{s:?}");
            assert!(hk.omega_consistency(s) < 1e-13, "{s:?}");
        }
    }

    #[test]
    fn rotating_field_identities() {
        for s in Signs::all() {
            let f = Prepotential::quadratic_standard(1, s.eps1);
            let r = rotating_field(&f, s.eps2, 0.3, &point(s.eps1)).unwrap();
            assert!(r.moment_residual < 1e-13, "{s:?} {r:?}");
            assert!(r.beta_z_residual < 1e-13, "{s:?} {r:?}");
            assert!(r.beta_residual < 1e-13, "{s:?} {r:?}");
            assert!(r.f1_residual < 1e-13, "{s:?} {r:?}");
        }
    }

    #[test]
    fn momentum_round_trip() {
        let qh = [0.3, -0.4, 0.1, 0.25, 1.5, -2.0];
        let back = qhat_from_p(&p_from_qhat(&qh));
        assert_eq!(back, qh.to_vec());
    }

    #[test]
    fn cotangent_presentation_agrees() {
        for s in Signs::all() {
            let f = Prepotential::quadratic_standard(1, s.eps1);
            let r = cotangent_crosscheck(&f, s.eps2, &point(s.eps1)).unwrap();
            assert!(r.max() < 1e-13, "{s:?} {r:?}");
        }
    }

    #[test]
    fn degenerate_moment_map_is_an_assumption_violation() {
        let e = Sign::MINUS;
        let f = Prepotential::quadratic_standard(1, e);
        let pt = point(e);
        let (nm, _) = f.n_and_r(&pt.x).unwrap();
        let two_h = crate::special_kahler::hermitian_form(&nm, &pt.x);
        let err = rotating_field(&f, e, two_h, &pt).unwrap_err();
        assert!(matches!(err, Error::Assumption(ref m) if m.contains("sigma")));
    }
}
