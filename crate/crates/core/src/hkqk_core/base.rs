//! The input of the correspondence: an ε-hyper-Kähler manifold with a
//! rotating Killing field, a Kähler moment map and a connection on the
//! trivial line bundle over it.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::epsnum::{seed, Jet, JetSpace};
use crate::error::{Error, Result};
use crate::geomkit::{Chart, JMat, Signs};

/// Base fields as jets. The jets may live in a space with more variables
/// than the base dimension (e.g. the bundle chart); base fields never
/// depend on the extra variables.
#[derive(Clone, Debug)]
pub struct BaseFields {
    pub g: JMat,
    /// `J_α`, with `J^a_b` stored at `(a, b)`.
    pub j: [JMat; 3],
    /// `ω_α(∂_a, ∂_b)`.
    pub omega: [JMat; 3],
    /// Kähler moment map with `df = −ω₁(Z, ·)`.
    pub f: Jet,
    pub df: Vec<Jet>,
    pub z: Vec<Jet>,
    /// Base part of the connection, `η = ds + η₀`.
    pub eta0: Vec<Jet>,
}

impl BaseFields {
    pub fn dim(&self) -> usize {
        self.g.rows()
    }
}

/// An ε-hyper-Kähler manifold with the extra data the correspondence needs.
pub trait HkBase: Send + Sync {
    fn name(&self) -> String;

    /// Base chart, of dimension `4k`.
    fn chart(&self) -> Chart;

    fn signs(&self) -> Signs;

    /// Jet orders lost between the coordinates and the returned fields.
    fn order_loss(&self) -> usize {
        1
    }

    /// Pointwise admissibility of a base point.
    fn admissible(&self, y: &[f64]) -> Result<()>;

    /// Fields at the base coordinates `y` (jets of the chart coordinates).
    fn fields(&self, y: &[Jet]) -> Result<BaseFields>;

    fn dim(&self) -> usize {
        self.chart().dim()
    }
}

/// A codimension-one submanifold `{y_var = value + tilt·s}` of the bundle.
///
/// The bundle is charted adapted to it: `w_var = y_var − tilt·s` and
/// `w_i = y_i` otherwise, so that `M′ = {w_var = value}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Level {
    /// Index in the bundle chart (base coordinates first, fibre coordinate `s` last).
    pub var: usize,
    pub value: f64,
    pub tilt: f64,
}

impl Level {
    pub fn coordinate(var: usize, value: f64) -> Level {
        Level {
            var,
            value,
            tilt: 0.0,
        }
    }

    pub fn sheared(var: usize, value: f64, tilt: f64) -> Level {
        Level { var, value, tilt }
    }

    /// `A = ∂y/∂w` on a bundle chart of dimension `n`.
    pub fn chart_map(&self, n: usize) -> DMatrix<f64> {
        let mut a = DMatrix::identity(n, n);
        if self.var + 1 < n {
            a[(self.var, n - 1)] = self.tilt;
        }
        a
    }

    /// Original bundle coordinates `y` of adapted coordinates `w`.
    pub fn to_bundle(&self, w: &[f64]) -> Vec<f64> {
        let mut y = w.to_vec();
        if self.var + 1 < w.len() {
            y[self.var] += self.tilt * w[w.len() - 1];
        }
        y
    }
}

/// A base together with the submanifold `M′` of the bundle `P`.
#[derive(Clone)]
pub struct CorrespondenceInput {
    pub base: Arc<dyn HkBase>,
    pub level: Level,
}

impl CorrespondenceInput {
    pub fn new(base: Arc<dyn HkBase>, level: Level) -> Result<CorrespondenceInput> {
        let m = base.dim();
        if level.var > m {
            return Err(Error::usage(format!(
                "level variable {} outside the bundle chart of dimension {}",
                level.var,
                m + 1
            )));
        }
        if level.var == m && level.tilt != 0.0 {
            return Err(Error::usage("a level set of s cannot be sheared along s"));
        }
        if m % 4 != 0 {
            return Err(Error::usage(format!("base dimension {m} is not a multiple of 4")));
        }
        Ok(CorrespondenceInput { base, level })
    }

    /// Bundle chart: base chart plus the fibre coordinate `s`.
    pub fn bundle_chart(&self) -> Result<Chart> {
        let mut labels = self.base.chart().labels().to_vec();
        labels.push("s".into());
        Chart::new(format!("{} bundle", self.base.name()), labels)
    }

    pub fn submanifold_chart(&self) -> Result<Chart> {
        self.bundle_chart()?
            .without(self.level.var, format!("{} level set", self.base.name()))
    }

    /// Adapted bundle coordinates of a point of `M′`.
    pub fn embed(&self, pt: &[f64]) -> Vec<f64> {
        let mut out = pt.to_vec();
        out.insert(self.level.var, self.level.value);
        out
    }

    /// Jet order needed so that `g′` carries second derivatives.
    pub fn jet_order(&self) -> usize {
        2 + self.base.order_loss()
    }

    /// Base fields seeded at a base point, in a space of `dim` variables.
    pub fn base_fields_at(&self, y: &[f64], order: usize) -> Result<BaseFields> {
        let sp = JetSpace::get(y.len(), order)?;
        self.base.fields(&seed(&sp, y))
    }
}
