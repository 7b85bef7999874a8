//! Check registry and per-point evaluation.

use crate::epsnum::{
    compare_jets, compare_with_fd, default_step, derivative_tuples, EpsComplex, Jet,
};
use crate::error::Result;
use crate::fs_metric::{
    c_derivative_residual, coordinate_map, dc_kahler_residual, fs_equivalence, fs_eval, fs_nu,
    fs_terms, rho_identity_residual, round_trip_residual, undeformed_fs,
};
use crate::hkqk_core::{
    base_residuals, bundle_residuals, induced_structures, perturbed_nijenhuis, qk_metric,
    qk_point, qk_residuals, BaseFields,
};

use super::config::Suite;
use super::sampler::{Case, Model, Sample};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Passes when the worst value is below the tolerance.
    Below,
    /// Passes when the smallest value exceeds the tolerance.
    Above,
}

#[derive(Clone, Copy, Debug)]
pub struct CheckSpec {
    pub id: &'static str,
    pub anchor: &'static str,
    pub suite: Suite,
    pub tolerance: f64,
    pub mode: Mode,
}

const fn spec(id: &'static str, anchor: &'static str, suite: Suite, tolerance: f64) -> CheckSpec {
    CheckSpec {
        id,
        anchor,
        suite,
        tolerance,
        mode: Mode::Below,
    }
}

pub const PLUMBING: &str = "plumbing";

use Suite::{Base, Curvature, Derivatives, Fs, Qk};

pub const CHECKS: &[CheckSpec] = &[
    spec("base.algebra", "para-quaternionic algebra of the rigid c-map structure", Base, 1e-10),
    spec("base.omega_consistency", "fundamental 2-forms from g and J", Base, 1e-10),
    spec("base.closed", "closed fundamental 2-forms of the hyper-Kaehler input", Base, 1e-7),
    spec("base.killing", "rotating Killing field: Killing equation", Base, 1e-8),
    spec("base.holomorphic", "rotating Killing field: preserves J1", Base, 1e-8),
    spec("base.rotating", "rotating Killing field: L_Z J2 = 2 eps1 J3", Base, 1e-8),
    spec("base.moment", "Kaehler moment map df = -omega1(Z, .)", Base, 1e-10),
    spec("base.connection", "connection with curvature omega1 - d(beta)/2", Base, 1e-8),
    spec("base.lemma", "d theta_alpha^P = eps1 eps_alpha pi^* omega_alpha", Base, 1e-8),
    spec("base.theta_kernel", "theta^P annihilate the lifted field Z1^P", Base, 1e-8),
    spec("qk.algebra", "para-quaternionic algebra of the induced structures", Qk, 1e-8),
    spec("qk.symmetry", PLUMBING, Qk, 1e-12),
    spec("qk.condition", "g' nondegenerate (condition number)", Qk, 1e8),
    spec("qk.killing", "X_P projects to a Killing field of g'", Qk, 1e-8),
    spec("qk.domega", "exterior derivatives of the induced 2-forms", Qk, 1e-8),
    spec("qk.four_form", "closed fundamental 4-form", Qk, 1e-7),
    spec("qk.nijenhuis", "integrability of J'_1", Qk, 1e-8),
    CheckSpec {
        mode: Mode::Above,
        ..spec("qk.nijenhuis_control", "non-integrable control structure", Qk, 1e-3)
    },
    spec("qk.moment_map", "quaternionic moment map of X", Qk, 1e-6),
    spec("qk.lie_omega1", "L_X omega'_1 = 0", Qk, 1e-7),
    spec("qk.lie_omega23", "L_X rotates omega'_2 and omega'_3", Qk, 1e-7),
    spec("qk.theta_bar", "theta-bar_2, theta-bar_3 as contractions with X", Qk, 1e-8),
    spec("qk.projector", "induced structures via the horizontal lift", Qk, 1e-8),
    spec("qk.frame", "action of J'_alpha on the frame generated by Z'", Qk, 1e-8),
    spec("curvature.nu", "reduced scalar curvature nu = -4 eps1 sigma", Curvature, 1e-6),
    spec("curvature.weyl_trace", "curvature decomposition: W trace-free", Curvature, 1e-6),
    spec("curvature.weyl_q", "curvature decomposition: W Q-invariant", Curvature, 1e-6),
    spec("fs.equivalence", "deformed Ferrara-Sabharwal metric equals g' on M'", Fs, 1e-9),
    spec("fs.display", "restriction of the degenerate tensor on P to M'", Fs, 1e-9),
    spec("fs.round_trip", PLUMBING, Fs, 1e-10),
    spec("fs.rho", "rho = r^2 - c = 2H - c", Fs, 1e-12),
    spec("fs.dc_kahler", "d^c K = -(2 eps1 / H) q Omega dq on M'", Fs, 1e-8),
    spec("fs.undeformed", "c = 0 reproduces the undeformed metric", Fs, 1e-12),
    spec("fs.symmetry", "the five summands are symmetric", Fs, 1e-14),
    spec("fs.c_smooth", "smooth dependence on c", Fs, 1e-6),
    spec("fs.nu", "reduced scalar curvature of the closed form (-2)", Fs, 1e-6),
    spec("derivatives.prepotential", PLUMBING, Derivatives, 1e-6),
    spec("derivatives.base_fields", PLUMBING, Derivatives, 1e-6),
    spec("derivatives.metric", PLUMBING, Derivatives, 1e-6),
    spec("derivatives.structures", PLUMBING, Derivatives, 1e-6),
    spec("derivatives.fs_metric", PLUMBING, Derivatives, 1e-6),
];

pub fn find(id: &str) -> Option<&'static CheckSpec> {
    CHECKS.iter().find(|c| c.id == id)
}

/// One evaluated residual; errors are kept as messages.
pub type Entry = (&'static str, std::result::Result<f64, String>);

fn push_all(out: &mut Vec<Entry>, ids: &[&'static str], r: std::result::Result<Vec<f64>, String>) {
    match r {
        Ok(v) => out.extend(ids.iter().copied().zip(v.into_iter().map(Ok))),
        Err(e) => out.extend(ids.iter().map(|id| (*id, Err(e.clone())))),
    }
}

fn err(e: crate::Error) -> String {
    e.to_string()
}

/// Residuals of the base, output and curvature suites at one sample.
pub fn evaluate_point(
    case: &Case,
    sample: &Sample,
    tilts: &[f64],
    suites: &[Suite],
) -> Vec<Entry> {
    let mut out = Vec::new();
    let runs = |s: Suite| suites.contains(&s);
    let ids = |s: Suite| -> Vec<&'static str> {
        CHECKS.iter().filter(|c| c.suite == s).map(|c| c.id).collect()
    };
    if runs(Base) || runs(Qk) || runs(Curvature) {
        for &tilt in tilts {
            let r = (|| -> Result<_> {
                let input = case.input(sample, tilt)?;
                let q = qk_point(&input, &sample.pt)?;
                let m = input.base.dim();
                let y = input.level.to_bundle(&input.embed(&sample.pt));
                let b = base_residuals(input.base.as_ref(), &y[..m])?;
                let bd = bundle_residuals(&q.bundle)?;
                let r = qk_residuals(&q)?;
                let control = perturbed_nijenhuis(&q, 0.5)?;
                Ok((b, bd, r, control))
            })();
            match r {
                Ok((b, bd, r, control)) => {
                    if runs(Base) {
                        push_all(
                            &mut out,
                            &ids(Base),
                            Ok(vec![
                                b.algebra,
                                b.omega_consistency,
                                b.closed,
                                b.killing,
                                b.holomorphic,
                                b.rotating,
                                b.moment,
                                b.curvature_eta.max(bd.connection),
                                bd.lemma,
                                bd.theta_kernel,
                            ]),
                        );
                    }
                    if runs(Qk) {
                        push_all(
                            &mut out,
                            &ids(Qk),
                            Ok(vec![
                                r.algebra,
                                r.symmetry,
                                r.condition_number,
                                r.killing,
                                r.domega,
                                r.four_form,
                                r.nijenhuis,
                                control,
                                r.moment_map,
                                r.lie_omega1,
                                r.lie_omega23,
                                r.theta_bar,
                                r.projector,
                                r.frame,
                            ]),
                        );
                    }
                    if runs(Curvature) {
                        push_all(
                            &mut out,
                            &ids(Curvature),
                            Ok(vec![
                                (r.nu - r.nu_expected).abs(),
                                r.weyl_trace,
                                r.weyl_q_invariance,
                            ]),
                        );
                    }
                }
                Err(e) => {
                    for s in [Base, Qk, Curvature] {
                        if runs(s) {
                            push_all(&mut out, &ids(s), Err(err(e.clone())));
                        }
                    }
                }
            }
        }
    }
    if runs(Fs) {
        if let Model::Cmap(f, e2, c) = &case.model {
            let (f, e2, c, pt) = (f, *e2, *c, &sample.pt);
            let r = (|| -> Result<Vec<f64>> {
                let eq = fs_equivalence(f, e2, c, pt)?;
                let fs = coordinate_map(f, e2, c, pt)?;
                Ok(vec![
                    eq.residual,
                    eq.display_residual,
                    round_trip_residual(f, e2, c, pt)?,
                    rho_identity_residual(f, e2, c, pt)?,
                    dc_kahler_residual(f, e2, c, pt)?,
                    eq.symmetry,
                    c_derivative_residual(f, e2, &fs, 1e-3)?,
                    (fs_nu(f, e2, &fs)? + 2.0).abs(),
                ])
            })()
            .map_err(err);
            push_all(
                &mut out,
                &[
                    "fs.equivalence",
                    "fs.display",
                    "fs.round_trip",
                    "fs.rho",
                    "fs.dc_kahler",
                    "fs.symmetry",
                    "fs.c_smooth",
                    "fs.nu",
                ],
                r,
            );
            if c == 0.0 {
                let r = (|| -> Result<f64> {
                    let fs = coordinate_map(f, e2, c, pt)?;
                    let d = fs_eval(f, e2, &fs)? - undeformed_fs(f, e2, &fs)?;
                    Ok(d.amax())
                })()
                .map_err(err);
                out.push(("fs.undeformed", r));
            }
        }
    }
    out
}

fn flatten(b: &BaseFields) -> Vec<Jet> {
    let mut v: Vec<Jet> = b.g.entries().to_vec();
    for m in b.j.iter().chain(&b.omega) {
        v.extend_from_slice(m.entries());
    }
    v.push(b.f.clone());
    v.extend(b.df.iter().cloned());
    v.extend(b.z.iter().cloned());
    v.extend(b.eta0.iter().cloned());
    v
}

/// Keeps at most `max` tuples, evenly spaced, so large charts stay cheap.
fn thin(t: Vec<Vec<usize>>, max: usize) -> Vec<Vec<usize>> {
    if t.len() <= max {
        return t;
    }
    let stride = t.len().div_ceil(max);
    t.into_iter().step_by(stride).collect()
}

fn tuples_of_order(n: usize, order: usize, max: usize) -> Vec<Vec<usize>> {
    thin(
        derivative_tuples(n, order)
            .into_iter()
            .filter(|t| t.len() == order)
            .collect(),
        max,
    )
}

const MAX_TUPLES: usize = 48;

fn fd_orders<F>(mut one: F, top: usize) -> Result<f64>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut worst = 0.0_f64;
    for order in 1..=top {
        worst = worst.max(one(order)?);
    }
    Ok(worst)
}

/// Jets against Richardson differences for every field feeding the other
/// suites, at one sample.
pub fn evaluate_derivatives(case: &Case, sample: &Sample, tilt: f64, fd_order: usize) -> Vec<Entry> {
    let mut out = Vec::new();
    if let Some(f) = case.prepotential() {
        let k = f.n() + 1;
        let x: Vec<f64> = {
            let mut v = sample.pt[..k].to_vec();
            v.push(0.0);
            v.extend_from_slice(&sample.pt[k..2 * k - 1]);
            v
        };
        let field = |y: &[Jet]| -> Result<Vec<Jet>> {
            let xs: Vec<EpsComplex<Jet>> = (0..k)
                .map(|i| EpsComplex::new(y[i].clone(), y[k + i].clone(), f.eps1()))
                .collect();
            let v = f.eval(&xs)?;
            Ok(vec![v.re, v.im])
        };
        let r = fd_orders(
            |o| {
                let t = tuples_of_order(2 * k, o, MAX_TUPLES);
                Ok(compare_with_fd(&field, &x, o, &t, default_step(o))?.max_rel)
            },
            4,
        );
        out.push(("derivatives.prepotential", r.map_err(err)));
    }

    let r = (|| -> Result<(f64, f64, f64)> {
        let input = case.input(sample, tilt)?;
        let m = input.base.dim();
        let y = input.level.to_bundle(&input.embed(&sample.pt));
        let base = input.base.clone();
        let loss = base.order_loss();
        let field = |v: &[Jet]| -> Result<Vec<Jet>> { Ok(flatten(&base.fields(v)?)) };
        let base_r = fd_orders(
            |o| {
                let t = tuples_of_order(m, o, MAX_TUPLES);
                Ok(compare_with_fd(&field, &y[..m], o + loss, &t, default_step(o))?.max_rel)
            },
            2,
        )?;

        let q = qk_point(&input, &sample.pt)?;
        let dim = q.dim();
        let g_jets = q.g.entries().to_vec();
        let g_vals = |p: &[f64]| -> Result<Vec<f64>> { Ok(qk_metric(&input, p)?.as_slice().to_vec()) };
        let metric_r = fd_orders(
            |o| {
                let t = tuples_of_order(dim, o, MAX_TUPLES / 2);
                Ok(compare_jets(&g_jets, &g_vals, &sample.pt, &t, default_step(o))?.max_rel)
            },
            fd_order,
        )?;

        let mut s_jets: Vec<Jet> = Vec::new();
        for a in 0..3 {
            s_jets.extend(q.j[a].entries().iter().cloned());
        }
        for a in 0..3 {
            s_jets.extend(q.omega[a].entries().iter().cloned());
        }
        for a in 0..4 {
            s_jets.extend(q.theta_bar[a].iter().cloned());
        }
        let s_vals = |p: &[f64]| -> Result<Vec<f64>> {
            let ind = induced_structures(&input, p)?;
            let mut v: Vec<f64> = Vec::new();
            // JMat stores entries row-major; DMatrix iterates column-major
            for m in ind.j.iter().chain(&ind.omega) {
                v.extend(m.transpose().iter().copied());
            }
            for t in &ind.theta_bar {
                v.extend(t.iter().copied());
            }
            Ok(v)
        };
        let t = tuples_of_order(dim, 1, MAX_TUPLES);
        let struct_r = compare_jets(&s_jets, &s_vals, &sample.pt, &t, default_step(1))?.max_rel;
        Ok((base_r, metric_r, struct_r))
    })();
    match r {
        Ok((a, b, c)) => {
            out.push(("derivatives.base_fields", Ok(a)));
            out.push(("derivatives.metric", Ok(b)));
            out.push(("derivatives.structures", Ok(c)));
        }
        Err(e) => {
            let e = err(e);
            for id in ["derivatives.base_fields", "derivatives.metric", "derivatives.structures"] {
                out.push((id, Err(e.clone())));
            }
        }
    }

    if let Model::Cmap(f, e2, c) = &case.model {
        let r = (|| -> Result<f64> {
            let fs = coordinate_map(f, *e2, *c, &sample.pt)?;
            let y0 = fs.to_chart();
            let field = |y: &[Jet]| -> Result<Vec<Jet>> {
                let cj = y[0].constant_like(*c);
                Ok(fs_terms(f, *e2, y, &cj)?.total().entries().to_vec())
            };
            fd_orders(
                |o| {
                    let t = tuples_of_order(y0.len(), o, MAX_TUPLES / 2);
                    Ok(compare_with_fd(&field, &y0, o + 2, &t, default_step(o))?.max_rel)
                },
                fd_order,
            )
        })();
        out.push(("derivatives.fs_metric", r.map_err(err)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn ids_are_unique_and_anchored() {
        let ids: BTreeSet<_> = CHECKS.iter().map(|c| c.id).collect();
        assert_eq!(ids.len(), CHECKS.len());
        for c in CHECKS {
            assert!(!c.anchor.is_empty(), "{}", c.id);
            assert!(c.id.starts_with(c.suite.name()), "{}", c.id);
            assert_eq!(find(c.id).map(|x| x.id), Some(c.id));
        }
    }
}
