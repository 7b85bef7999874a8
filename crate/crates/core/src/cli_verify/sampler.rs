//! Seeded rejection sampling of admissible points of `M′`.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::epsnum::{EpsComplex, Sign};
use crate::error::{Error, Result};
use crate::geomkit::{values, Signs};
use crate::hkqk_core::{bundle_data, qk_metric, CorrespondenceInput, FlatModel, HkBase, Level};
use crate::rigid_cmap::RigidCmap;
use crate::special_kahler::{hermitian_form, Prepotential};

use super::config::{FixtureConfig, SamplingBox};

/// Points whose `g′` is worse conditioned than this are rejected.
pub const MAX_CONDITION: f64 = 1e8;

/// One `(ε₁, ε₂, c)` case of a fixture.
#[derive(Clone, Debug)]
pub enum Model {
    Cmap(Prepotential, Sign, f64),
    Flat(FlatModel),
}

#[derive(Clone, Debug)]
pub struct Case {
    pub signs: Signs,
    pub c: f64,
    pub model: Model,
}

/// A sampled point of `M′` and the level value of the level set through it.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub pt: Vec<f64>,
    pub level_value: f64,
}

impl Case {
    pub fn new(fixture: &FixtureConfig, signs: Signs, c: f64) -> Case {
        let model = match fixture.prepotential(signs.eps1) {
            Some(f) => Model::Cmap(f, signs.eps2, c),
            None => Model::Flat(FlatModel::with_shift(signs, c)),
        };
        Case { signs, c, model }
    }

    pub fn label(&self) -> String {
        format!(
            "eps1 = {}, eps2 = {}, c = {}",
            self.signs.eps1.i(),
            self.signs.eps2.i(),
            self.c
        )
    }

    pub fn prepotential(&self) -> Option<&Prepotential> {
        match &self.model {
            Model::Cmap(f, _, _) => Some(f),
            Model::Flat(_) => None,
        }
    }

    pub fn base(&self) -> Arc<dyn HkBase> {
        match &self.model {
            Model::Cmap(f, e2, c) => Arc::new(RigidCmap::new(f.clone(), *e2, *c)),
            Model::Flat(m) => Arc::new(m.clone()),
        }
    }

    /// `M′` through the sample, sheared by `tilt`.
    pub fn input(&self, sample: &Sample, tilt: f64) -> Result<CorrespondenceInput> {
        let level = match &self.model {
            Model::Cmap(f, _, _) => Level::sheared(f.n() + 1, sample.level_value, tilt),
            Model::Flat(_) => Level::sheared(3, sample.level_value, tilt),
        };
        CorrespondenceInput::new(self.base(), level)
    }

    fn draw(&self, rng: &mut ChaCha8Rng, b: &SamplingBox) -> Sample {
        let mut u = |r: [f64; 2]| rng.gen_range(r[0]..=r[1]);
        match &self.model {
            Model::Cmap(f, _, _) => {
                let k = f.n() + 1;
                let mut pt = vec![u(b.x0)];
                pt.extend((1..k).map(|_| u(b.x)));
                pt.extend((1..k).map(|_| u(b.u)));
                pt.extend((0..2 * k).map(|_| u(b.qhat)));
                pt.push(u(b.s));
                Sample { pt, level_value: 0.0 }
            }
            Model::Flat(_) => {
                let (x, y, wu, wv) = (u(b.x), u(b.x), u(b.w), u(b.w));
                Sample {
                    pt: vec![x, y, wu, u(b.s)],
                    level_value: wv,
                }
            }
        }
    }

    /// Rejects points near the degeneracy loci (`f`, `f₁` and the model's
    /// own), points with `|f₁| ≪ |f|`, points where `M′` is nearly tangent to `Z₁ᴾ` or `g′` is badly
    /// conditioned, for every tilt.
    pub fn admissible(&self, sample: &Sample, tilts: &[f64], b: &SamplingBox) -> Result<()> {
        for &tilt in tilts {
            let input = self.input(sample, tilt)?;
            let p = input.level.to_bundle(&input.embed(&sample.pt));
            let m = input.base.dim();
            let y = &p[..m];
            input.base.admissible(y)?;
            self.margins(y, b.margin)?;
            let bundle = bundle_data(&input, &input.embed(&sample.pt), 1)?;
            for (v, what) in [(bundle.f().value(), "f"), (bundle.f1.value(), "f1")] {
                if v.abs() < b.margin {
                    return Err(Error::domain(format!("{what} within the sampling margin")));
                }
            }
            if !(bundle.f1.value().abs() >= b.min_f1_ratio * bundle.f().value().abs()) {
                return Err(Error::domain("f1 too small relative to f"));
            }
            let z = values(&bundle.z1);
            let ratio = z[input.level.var].abs() / z.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if !(ratio >= b.min_transversality) {
                return Err(Error::domain("M' too close to tangent to Z1^P"));
            }
            let g = qk_metric(&input, &sample.pt)?;
            let sv = g.singular_values();
            if sv.max() > MAX_CONDITION * sv.min() {
                return Err(Error::domain("g' is too badly conditioned"));
            }
        }
        Ok(())
    }

    fn margins(&self, y: &[f64], margin: f64) -> Result<()> {
        let near = |v: f64, what: &str| {
            if v.abs() < margin {
                Err(Error::domain(format!("{what} within the sampling margin")))
            } else {
                Ok(())
            }
        };
        match &self.model {
            Model::Cmap(f, _, c) => {
                let k = f.n() + 1;
                let x: Vec<EpsComplex<f64>> =
                    (0..k).map(|i| EpsComplex::new(y[i], y[k + i], f.eps1())).collect();
                let (nm, _) = f.n_and_r(&x)?;
                let r2 = hermitian_form(&nm, &x);
                near(r2, "r^2")?;
                near(r2 - c, "rho = 2H - c")?;
                near(r2 + c, "2H + c")
            }
            Model::Flat(m) => {
                let ww = m.w_norm(y);
                near(ww, "w conj(w)")
            }
        }
    }

    /// `count` admissible samples drawn by rejection from the box.
    pub fn sample(
        &self,
        rng: &mut ChaCha8Rng,
        b: &SamplingBox,
        tilts: &[f64],
        count: usize,
    ) -> Result<Vec<Sample>> {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let mut last = String::new();
            let mut found = None;
            for _ in 0..b.retry_budget {
                let s = self.draw(rng, b);
                match self.admissible(&s, tilts, b) {
                    Ok(()) => {
                        found = Some(s);
                        break;
                    }
                    Err(e) => last = e.to_string(),
                }
            }
            match found {
                Some(s) => out.push(s),
                None => {
                    return Err(Error::Starvation(format!(
                        "no admissible point after {} draws ({}); last rejection: {last}",
                        b.retry_budget,
                        self.label()
                    )))
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli_verify::config::FixtureKind;
    use rand::SeedableRng;

    #[test]
    fn impossible_box_starves() {
        let fixture = FixtureConfig {
            name: FixtureKind::Quadratic,
            n: 1,
        };
        let case = Case::new(&fixture, Signs::all()[0], 0.0);
        let b = SamplingBox {
            x0: [1.0, 1.0],
            x: [2.0, 2.0],
            u: [0.0, 0.0],
            retry_budget: 50,
            ..SamplingBox::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = case.sample(&mut rng, &b, &[0.0], 1).unwrap_err();
        assert!(matches!(e, Error::Starvation(ref m) if m.contains("r^2")), "{e}");
    }

    #[test]
    fn samples_are_reproducible() {
        let fixture = FixtureConfig {
            name: FixtureKind::Flat,
            n: 1,
        };
        let case = Case::new(&fixture, Signs::all()[2], 0.2);
        let b = SamplingBox::default();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            case.sample(&mut rng, &b, &[0.0, 0.3], 3).unwrap()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }
}
