//! The deformed Ferrara-Sabharwal metric in the chart
//! `(ρ, φ̃, Re z^μ, Im z^μ, ζ̃_I, ζ^I)` and its relation to the output of the
//! correspondence applied to the rigid c-map.
//!
//! Points of `M′ = {u⁰ = 0}` are given in the submanifold chart
//! `(x^I, u^μ, q̂^a, s)` of the c-map bundle.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::epsnum::{richardson, seed, EpsComplex, Jet, JetSpace, Sign};
use crate::error::{Error, Result};
use crate::geomkit::{curvature, Chart, JMat, Signs};
use crate::hkqk_core::{qk_metric, CorrespondenceInput, Level};
use crate::rigid_cmap::{qhat_from_p, RigidCmap};
use crate::special_kahler::{omega_matrix, psk_data, CaskFields, Prepotential, PskFields};

#[cfg(test)]
mod tests;

/// A point in the Ferrara-Sabharwal chart together with the deformation
/// parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct FsPoint {
    pub rho: f64,
    pub phi_t: f64,
    pub z: Vec<EpsComplex<f64>>,
    pub zeta_t: Vec<f64>,
    pub zeta: Vec<f64>,
    pub c: f64,
}

impl FsPoint {
    /// Chart coordinates `(ρ, φ̃, Re z, Im z, ζ̃, ζ)`.
    pub fn to_chart(&self) -> Vec<f64> {
        let mut v = vec![self.rho, self.phi_t];
        v.extend(self.z.iter().map(|z| z.re));
        v.extend(self.z.iter().map(|z| z.im));
        v.extend_from_slice(&self.zeta_t);
        v.extend_from_slice(&self.zeta);
        v
    }

    pub fn from_chart(v: &[f64], c: f64, eps1: Sign) -> Result<FsPoint> {
        if v.len() < 4 || v.len() % 4 != 0 {
            return Err(Error::usage(format!("chart dimension {} is not 4(n+1)", v.len())));
        }
        let k = v.len() / 4;
        let n = k - 1;
        Ok(FsPoint {
            rho: v[0],
            phi_t: v[1],
            z: (0..n).map(|m| EpsComplex::new(v[2 + m], v[2 + n + m], eps1)).collect(),
            zeta_t: v[2 + 2 * n..2 + 2 * n + k].to_vec(),
            zeta: v[2 + 2 * n + k..].to_vec(),
            c,
        })
    }

    /// `p = (ζ̃, ζ)`.
    pub fn p(&self) -> Vec<f64> {
        self.zeta_t.iter().chain(&self.zeta).copied().collect()
    }

    pub fn check_domain(&self) -> Result<()> {
        check_domain(self.rho, self.c)
    }
}

fn check_domain(rho: f64, c: f64) -> Result<()> {
    let tol = 1e-12 * (1.0 + c.abs());
    if rho + c <= tol {
        return Err(Error::domain(format!("rho + c > 0 violated (rho = {rho}, c = {c})")));
    }
    if rho.abs() <= tol {
        return Err(Error::domain("rho != 0 violated"));
    }
    if (rho + 2.0 * c).abs() <= tol {
        return Err(Error::domain(format!("rho + 2c != 0 violated (rho = {rho}, c = {c})")));
    }
    Ok(())
}

pub fn fs_chart(n: usize) -> Chart {
    let k = n + 1;
    let mut labels = vec!["rho".to_string(), "phi~".to_string()];
    labels.extend((1..=n).map(|m| format!("Re z{m}")));
    labels.extend((1..=n).map(|m| format!("Im z{m}")));
    labels.extend((0..k).map(|i| format!("zeta~{i}")));
    labels.extend((0..k).map(|i| format!("zeta{i}")));
    Chart::new("Ferrara-Sabharwal", labels).expect("distinct labels")
}

/// The five summands, in display order.
#[derive(Clone, Debug)]
pub struct FsTerms {
    pub levi: JMat,
    pub radial: JMat,
    pub phase: JMat,
    pub fibre: JMat,
    pub deformation: JMat,
}

impl FsTerms {
    pub fn total(&self) -> JMat {
        self.levi
            .add(&self.radial)
            .add(&self.phase)
            .add(&self.fibre)
            .add(&self.deformation)
    }

    pub fn all(&self) -> [&JMat; 5] {
        [&self.levi, &self.radial, &self.phase, &self.fibre, &self.deformation]
    }
}

/// Assembles the summands from jets. The first `4(n+1)` variables of the
/// jet space must be the chart coordinates; `c` may be a constant or a
/// further variable. Metric jets lose two orders.
pub fn fs_terms(f: &Prepotential, eps2: Sign, y: &[Jet], c: &Jet) -> Result<FsTerms> {
    let n = f.n();
    let k = n + 1;
    let dim = 4 * k;
    if y.len() != dim {
        return Err(Error::usage(format!("expected {dim} chart coordinates, got {}", y.len())));
    }
    check_domain(y[0].value(), c.value())?;
    let e = f.eps1();
    let (e1, e2) = (e.f(), eps2.f());
    let sp = Arc::clone(y[0].space());
    let (iz, ip) = (2, 2 + 2 * n);
    let zv: Vec<(usize, usize)> = (0..n).map(|m| (iz + m, iz + n + m)).collect();
    let z: Vec<EpsComplex<Jet>> = (0..n)
        .map(|m| EpsComplex::new(y[iz + m].clone(), y[iz + n + m].clone(), e))
        .collect();
    let psk = PskFields::new(f, &z, &y[0])?;
    let rho = &y[0];
    let rc = rho + c;
    let r2c = rho + &c.scale(2.0);
    let rho_inv = rho.recip();
    let quarter_rho2 = (&rho_inv * &rho_inv).scale(0.25);
    let zero = rho.zero_like();

    let levi = if n == 0 {
        JMat::zeros(&sp, dim, dim)
    } else {
        psk.metric_jet(&zv).embed(dim, iz).scale_jet(&(&rc * &rho_inv))
    };

    let mut radial = JMat::zeros(&sp, dim, dim);
    radial.set(0, 0, &(&quarter_rho2 * &r2c) * &rc.recip());

    // dφ̃ + ζ dζ̃ − ζ̃ dζ + ε₁ε₂ c d^c𝒦
    let (dcx, dcy) = psk.dc_kahler(&zv);
    let mut b = vec![zero.clone(); dim];
    b[1] = rho.constant_like(1.0);
    let ce = c.scale(e1 * e2);
    for m in 0..n {
        b[iz + m] = &ce * &dcx[m];
        b[iz + n + m] = &ce * &dcy[m];
    }
    for i in 0..k {
        b[ip + i] = y[ip + k + i].clone();
        b[ip + k + i] = -&y[ip + i];
    }
    let phase = JMat::square(&b).scale_jet(&(&(&quarter_rho2 * &rc) * &r2c.recip()).scale(-e1));

    let fibre = psk.h_hat.embed(dim, ip).scale_jet(&rho_inv.scale(-0.5 * e2));

    // z^I dζ̃_I + F_I(z) dζ^I with z⁰ = 1
    let grad = f.grad(&psk.x)?;
    let mut u = vec![zero.clone(); dim];
    let mut v = vec![zero.clone(); dim];
    for i in 0..k {
        u[ip + i] = psk.x[i].re.clone();
        v[ip + i] = psk.x[i].im.clone();
        u[ip + k + i] = grad[i].re.clone();
        v[ip + k + i] = grad[i].im.clone();
    }
    let modulus = JMat::square(&u).sub(&JMat::square(&v).scale(e1));
    let coeff = &(&(&rho_inv * &rho_inv) * c) * &psk.kahler.exp();
    let deformation = modulus.scale_jet(&coeff.scale(2.0 * e1 * e2));

    Ok(FsTerms {
        levi,
        radial,
        phase,
        fibre,
        deformation,
    })
}

/// The metric as a jet matrix of order `order` at `pt`.
pub fn fs_metric_jet(f: &Prepotential, eps2: Sign, pt: &FsPoint, order: usize) -> Result<JMat> {
    pt.check_domain()?;
    let y0 = pt.to_chart();
    let sp = JetSpace::get(y0.len(), order + 2)?;
    let y = seed(&sp, &y0);
    Ok(fs_terms(f, eps2, &y, &Jet::constant(&sp, pt.c))?.total())
}

/// Metric components at `pt`.
pub fn fs_eval(f: &Prepotential, eps2: Sign, pt: &FsPoint) -> Result<DMatrix<f64>> {
    Ok(fs_metric_jet(f, eps2, pt, 0)?.value())
}

/// The undeformed form written out separately:
/// `g_M̄ + dρ²/4ρ² − ε₁(dφ̃ + ζdζ̃ − ζ̃dζ)²/4ρ² − (ε₂/2ρ) dp Ĥ dp`.
pub fn undeformed_fs(f: &Prepotential, eps2: Sign, pt: &FsPoint) -> Result<DMatrix<f64>> {
    pt.check_domain()?;
    let n = f.n();
    let k = n + 1;
    let dim = 4 * k;
    let e1 = f.eps1().f();
    let psk = psk_data(f, &pt.z)?;
    let (iz, ip) = (2, 2 + 2 * n);
    let mut g = DMatrix::zeros(dim, dim);
    g.view_mut((iz, iz), (2 * n, 2 * n)).copy_from(&psk.metric);
    g[(0, 0)] = 0.25 / (pt.rho * pt.rho);
    let mut b = DVector::zeros(dim);
    b[1] = 1.0;
    for i in 0..k {
        b[ip + i] = pt.zeta[i];
        b[ip + k + i] = -pt.zeta_t[i];
    }
    g -= &b * b.transpose() * (0.25 * e1 / (pt.rho * pt.rho));
    let mut fib = g.view_mut((ip, ip), (2 * k, 2 * k));
    fib -= &psk.h_hat * (0.5 * eps2.f() / pt.rho);
    Ok(g)
}

/// The rigid c-map with `M′ = {u⁰ = 0}`, the input whose output is compared
/// with the closed form.
pub fn cmap_input(f: &Prepotential, eps2: Sign, c: f64) -> Result<CorrespondenceInput> {
    let base = RigidCmap::new(f.clone(), eps2, c);
    let k = base.phase_variable();
    CorrespondenceInput::new(Arc::new(base), Level::coordinate(k, 0.0))
}

/// Chart map on jets: `ρ = 2H − c`, `φ̃ = 4ε₂ s`, `z^μ = X^μ/X⁰`,
/// `(ζ̃, ζ) = 2Ωq̂`.
pub fn coordinate_map_jets(f: &Prepotential, eps2: Sign, c: f64, w: &[Jet]) -> Result<Vec<Jet>> {
    let n = f.n();
    let k = n + 1;
    if w.len() != 4 * k {
        return Err(Error::usage(format!("expected {} coordinates on M', got {}", 4 * k, w.len())));
    }
    if w[0].value() <= 0.0 {
        return Err(Error::domain("Re X0 > 0 violated"));
    }
    let e = f.eps1();
    let zero = w[0].zero_like();
    let x: Vec<EpsComplex<Jet>> = (0..k)
        .map(|i| {
            let im = if i == 0 { zero.clone() } else { w[k + i - 1].clone() };
            EpsComplex::new(w[i].clone(), im, e)
        })
        .collect();
    let cask = CaskFields::new(f, x)?;
    let x0_inv = w[0].recip();
    let mut out = vec![&cask.r2() + (-c), w[4 * k - 1].scale(4.0 * eps2.f())];
    out.extend((1..k).map(|m| &w[m] * &x0_inv));
    out.extend((1..k).map(|m| &w[k + m - 1] * &x0_inv));
    let om = JMat::from_f64(w[0].space(), &omega_matrix(k));
    let qhat = &w[2 * k - 1..4 * k - 1];
    out.extend(om.mul_vec(qhat).into_iter().map(|v| v.scale(2.0)));
    Ok(out)
}

pub fn coordinate_map(f: &Prepotential, eps2: Sign, c: f64, pt: &[f64]) -> Result<FsPoint> {
    let sp = JetSpace::get(pt.len(), 0)?;
    let v: Vec<f64> = coordinate_map_jets(f, eps2, c, &seed(&sp, pt))?
        .iter()
        .map(Jet::value)
        .collect();
    if v[0] + c <= 0.0 {
        return Err(Error::domain("rho + c > 0 violated"));
    }
    FsPoint::from_chart(&v, c, f.eps1())
}

/// `X^I = r e^{𝒦/2} z^I` at `φ = 0` with `r² = ρ + c`, `q̂ = −½Ωp`,
/// `s = ε₂φ̃/4`.
pub fn inverse_coordinate_map(f: &Prepotential, eps2: Sign, pt: &FsPoint) -> Result<Vec<f64>> {
    let r2 = pt.rho + pt.c;
    if r2 <= 0.0 {
        return Err(Error::domain(format!("rho + c > 0 violated (rho + c = {r2})")));
    }
    let psk = psk_data(f, &pt.z)?;
    let x0 = r2.sqrt() * (0.5 * psk.kahler).exp();
    let mut out = vec![x0];
    out.extend(pt.z.iter().map(|z| x0 * z.re));
    out.extend(pt.z.iter().map(|z| x0 * z.im));
    out.extend(qhat_from_p(&pt.p()));
    out.push(0.25 * eps2.f() * pt.phi_t);
    Ok(out)
}

/// Jacobian `∂(FS chart)/∂(M′ chart)` and the image point.
pub fn coordinate_jacobian(
    f: &Prepotential,
    eps2: Sign,
    c: f64,
    pt: &[f64],
) -> Result<(DMatrix<f64>, FsPoint)> {
    let sp = JetSpace::get(pt.len(), 1)?;
    let y = coordinate_map_jets(f, eps2, c, &seed(&sp, pt))?;
    let jac = DMatrix::from_fn(y.len(), pt.len(), |i, j| y[i].d(j).value());
    let v: Vec<f64> = y.iter().map(Jet::value).collect();
    Ok((jac, FsPoint::from_chart(&v, c, f.eps1())?))
}

/// Comparison of the pulled-back closed form with `g′` at one point of `M′`.
#[derive(Clone, Debug)]
pub struct FsEquivalence {
    pub signs: Signs,
    pub sigma: Sign,
    /// `ε₁σ/2`, with `g′ = factor · (pulled-back closed form)`.
    pub factor: f64,
    pub fs_pullback: DMatrix<f64>,
    pub g_prime: DMatrix<f64>,
    /// `|g′ − factor · pullback|`, relative.
    pub residual: f64,
    /// Against the displayed degenerate tensor on `P` restricted to `M′`.
    pub display_residual: f64,
    pub symmetry: f64,
}

pub fn fs_pullback(f: &Prepotential, eps2: Sign, c: f64, pt: &[f64]) -> Result<DMatrix<f64>> {
    let (jac, fs) = coordinate_jacobian(f, eps2, c, pt)?;
    let g = fs_eval(f, eps2, &fs)?;
    Ok(jac.transpose() * g * jac)
}

fn rel(d: &DMatrix<f64>, scale: f64) -> f64 {
    d.amax() / scale.max(1.0)
}

pub fn fs_equivalence(f: &Prepotential, eps2: Sign, c: f64, pt: &[f64]) -> Result<FsEquivalence> {
    let signs = Signs::new(f.eps1(), eps2);
    let (jac, fs) = coordinate_jacobian(f, eps2, c, pt)?;
    let g_fs = fs_eval(f, eps2, &fs)?;
    let pull = jac.transpose() * &g_fs * &jac;
    // f = −ε₁ρ
    let sigma = Sign::of(-signs.eps1.f() * fs.rho);
    let factor = 0.5 * signs.eps1.f() * sigma.f();
    let input = cmap_input(f, eps2, c)?;
    let g_prime = qk_metric(&input, pt)?;
    let scale = g_prime.amax().max(pull.amax() * factor.abs());
    let residual = rel(&(&g_prime - &pull * factor), scale);

    let k = f.n() + 1;
    let sp = JetSpace::get(4 * k + 1, 0)?;
    let p = input.embed(pt);
    let y = seed(&sp, &p);
    let display = RigidCmap::new(f.clone(), eps2, c)
        .fields_at(&y[..4 * k])?
        .gtilde_rhs()
        .drop_index(k)
        .value();
    let display_residual = rel(&(&display - &pull), display.amax().max(pull.amax()));
    let symmetry = rel(&(&g_fs - g_fs.transpose()), g_fs.amax());
    Ok(FsEquivalence {
        signs,
        sigma,
        factor,
        fs_pullback: pull,
        g_prime,
        residual,
        display_residual,
        symmetry,
    })
}

/// Relative residual of the pulled-back `d^c𝒦` against
/// `−(2ε₁/H) q^a Ω_ab dq^b` on `M′`.
pub fn dc_kahler_residual(f: &Prepotential, eps2: Sign, c: f64, pt: &[f64]) -> Result<f64> {
    let (jac, fs) = coordinate_jacobian(f, eps2, c, pt)?;
    let n = f.n();
    let k = n + 1;
    let psk = psk_data(f, &fs.z)?;
    let mut dc = DVector::zeros(4 * k);
    dc.rows_mut(2, 2 * n).copy_from(&psk.dc_kahler);
    let lhs = jac.transpose() * dc;

    let sp = JetSpace::get(pt.len(), 1)?;
    let w = seed(&sp, pt);
    let zero = w[0].zero_like();
    let x: Vec<EpsComplex<Jet>> = (0..k)
        .map(|i| {
            let im = if i == 0 { zero.clone() } else { w[k + i - 1].clone() };
            EpsComplex::new(w[i].clone(), im, f.eps1())
        })
        .collect();
    let cask = CaskFields::new(f, x)?;
    let om = omega_matrix(k);
    let q: Vec<f64> = cask.q.iter().map(Jet::value).collect();
    let h = cask.h.value();
    let rhs = DVector::from_fn(pt.len(), |j, _| {
        let mut acc = 0.0;
        for a in 0..2 * k {
            for b in 0..2 * k {
                acc += q[a] * om[(a, b)] * cask.q[b].d(j).value();
            }
        }
        -2.0 * f.eps1().f() / h * acc
    });
    Ok((&lhs - &rhs).amax() / lhs.amax().max(rhs.amax()).max(1.0))
}

/// `ρ + c − 2H` at a point of `M′`.
pub fn rho_identity_residual(f: &Prepotential, eps2: Sign, c: f64, pt: &[f64]) -> Result<f64> {
    let fs = coordinate_map(f, eps2, c, pt)?;
    let k = f.n() + 1;
    let x: Vec<EpsComplex<f64>> = (0..k)
        .map(|i| EpsComplex::new(pt[i], if i == 0 { 0.0 } else { pt[k + i - 1] }, f.eps1()))
        .collect();
    let (nm, _) = f.n_and_r(&x)?;
    let two_h = crate::special_kahler::hermitian_form(&nm, &x);
    Ok((fs.rho + c - two_h).abs() / two_h.abs().max(1.0))
}

/// Round trip `M′ → FS → M′`, max abs difference.
pub fn round_trip_residual(f: &Prepotential, eps2: Sign, c: f64, pt: &[f64]) -> Result<f64> {
    let fs = coordinate_map(f, eps2, c, pt)?;
    let back = inverse_coordinate_map(f, eps2, &fs)?;
    Ok(back.iter().zip(pt).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
}

/// Reduced scalar curvature of the closed form.
pub fn fs_nu(f: &Prepotential, eps2: Sign, pt: &FsPoint) -> Result<f64> {
    let g = fs_metric_jet(f, eps2, pt, 2)?;
    let cd = curvature(&g)?;
    Ok(cd.nu.expect("dimension 4(n+1)"))
}

/// `∂g/∂c` from jets against a central difference with step `h`; returns
/// the relative discrepancy.
pub fn c_derivative_residual(f: &Prepotential, eps2: Sign, pt: &FsPoint, h: f64) -> Result<f64> {
    pt.check_domain()?;
    let y0 = pt.to_chart();
    let dim = y0.len();
    let mut at = y0.clone();
    at.push(pt.c);
    let sp = JetSpace::get(dim + 1, 3)?;
    let vars = seed(&sp, &at);
    let g = fs_terms(f, eps2, &vars[..dim], &vars[dim])?.total();
    let jet = g.d(dim).value();
    let shifted = |dc: f64| -> Result<Vec<f64>> {
        let mut p = pt.clone();
        p.c += dc;
        Ok(fs_eval(f, eps2, &p)?.as_slice().to_vec())
    };
    let fd = DMatrix::from_column_slice(dim, dim, &richardson(&shifted, h)?);
    Ok((&jet - &fd).amax() / jet.amax().max(1.0))
}
