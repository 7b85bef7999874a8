//! Richardson-extrapolated central differences, the independent oracle for
//! jet derivatives.

use std::sync::Arc;

use crate::error::{Error, Result};

use super::jet::{seed, Jet, JetSpace};

/// `g′(0)` for a vector-valued `g` from central differences at `h, h/2, h/4`
/// with two Richardson steps (error `O(h⁶)`).
pub fn richardson<G>(g: &G, h: f64) -> Result<Vec<f64>>
where
    G: Fn(f64) -> Result<Vec<f64>>,
{
    let central = |t: f64| -> Result<Vec<f64>> {
        let (p, m) = (g(t)?, g(-t)?);
        if p.len() != m.len() {
            return Err(Error::usage("finite-difference samples differ in length"));
        }
        Ok(p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * t)).collect())
    };
    let d1 = central(h)?;
    let d2 = central(h / 2.0)?;
    let d3 = central(h / 4.0)?;
    Ok((0..d1.len())
        .map(|i| {
            let r1 = (4.0 * d2[i] - d1[i]) / 3.0;
            let r2 = (4.0 * d3[i] - d2[i]) / 3.0;
            (16.0 * r2 - r1) / 15.0
        })
        .collect())
}

/// Mixed partial `∂_{v₁}⋯∂_{v_m} f(x)` by nested Richardson differences.
pub fn fd_partial<F>(f: &F, x: &[f64], vars: &[usize], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    match vars.split_first() {
        None => f(x),
        Some((&v, rest)) => {
            if v >= x.len() {
                return Err(Error::usage(format!("variable {v} out of range")));
            }
            let g = |t: f64| {
                let mut y = x.to_vec();
                y[v] += t;
                fd_partial(f, &y, rest, h)
            };
            richardson(&g, h)
        }
    }
}

/// Sorted variable tuples of length `1..=order`, each a distinct multi-index.
pub fn derivative_tuples(nvars: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut level: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..order {
        let mut next = Vec::new();
        for t in &level {
            let start = t.last().copied().unwrap_or(0);
            for v in start..nvars {
                let mut u = t.clone();
                u.push(v);
                next.push(u);
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

/// Outcome of comparing jet derivatives with finite differences.
#[derive(Clone, Debug, PartialEq)]
pub struct FdComparison {
    /// Largest `|jet − fd| / max(1, |fd|)` over components and tuples.
    pub max_rel: f64,
    pub compared: usize,
    pub worst_tuple: Vec<usize>,
}

/// Compares the jet derivatives of `field` along each tuple with nested
/// Richardson differences of its values. Jets are seeded at `seed_order`;
/// the value route seeds at `seed_order − max tuple length`, so fields that
/// lose orders internally are handled consistently.
pub fn compare_with_fd<F>(
    field: &F,
    x: &[f64],
    seed_order: usize,
    tuples: &[Vec<usize>],
    h: f64,
) -> Result<FdComparison>
where
    F: Fn(&[Jet]) -> Result<Vec<Jet>>,
{
    let top = tuples.iter().map(Vec::len).max().unwrap_or(0);
    if top > seed_order {
        return Err(Error::usage("tuple longer than the seeded jet order"));
    }
    let n = x.len();
    let sp = JetSpace::get(n, seed_order)?;
    let jets = field(&seed(&sp, x))?;
    let value_space: Arc<JetSpace> = JetSpace::get(n, seed_order - top)?;
    let values = |p: &[f64]| -> Result<Vec<f64>> {
        Ok(field(&seed(&value_space, p))?.iter().map(Jet::value).collect())
    };
    compare_jets(&jets, &values, x, tuples, h)
}

/// Compares given jets (in the variables of `x`) with nested Richardson
/// differences of `values`.
pub fn compare_jets<F>(
    jets: &[Jet],
    values: &F,
    x: &[f64],
    tuples: &[Vec<usize>],
    h: f64,
) -> Result<FdComparison>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let mut out = FdComparison {
        max_rel: 0.0,
        compared: 0,
        worst_tuple: Vec::new(),
    };
    for t in tuples {
        let mut alpha = vec![0u8; n];
        for &v in t {
            alpha[v] += 1;
        }
        let fd = fd_partial(values, x, t, h)?;
        if fd.len() != jets.len() {
            return Err(Error::usage("jet and value routes differ in length"));
        }
        for (j, d) in jets.iter().zip(&fd) {
            let r = (j.derivative(&alpha) - d).abs() / d.abs().max(1.0);
            out.compared += 1;
            if r > out.max_rel || r.is_nan() {
                out.max_rel = if r.is_nan() { f64::INFINITY } else { r };
                out.worst_tuple = t.clone();
            }
        }
    }
    Ok(out)
}

/// Step used per derivative order; larger steps for higher orders keep the
/// nested differences above round-off.
pub fn default_step(order: usize) -> f64 {
    match order {
        0 | 1 => 1e-3,
        2 => 1e-2,
        3 => 2e-2,
        _ => 4e-2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_is_exact_for_quintics() {
        let g = |t: f64| Ok(vec![(1.0 + t).powi(5), t.sin()]);
        let d = richardson(&g, 0.1).unwrap();
        assert!((d[0] - 5.0).abs() < 1e-12 && (d[1] - 1.0).abs() < 1e-9, "{d:?}");
    }

    #[test]
    fn tuples_are_multi_indices() {
        assert_eq!(derivative_tuples(3, 2).len(), 3 + 6);
        assert_eq!(derivative_tuples(2, 4).len(), 2 + 3 + 4 + 5);
    }

    #[test]
    fn exp_log_field_matches() {
        let field = |y: &[Jet]| Ok(vec![(&y[0] * &y[1]).exp(), (&y[0] + &y[1].scale(2.0)).ln()]);
        let x = [0.3, 0.7];
        for order in 1..=4 {
            let tuples: Vec<_> = derivative_tuples(2, order)
                .into_iter()
                .filter(|t| t.len() == order)
                .collect();
            let r = compare_with_fd(&field, &x, order, &tuples, default_step(order)).unwrap();
            assert!(r.max_rel < 1e-7, "order {order}: {r:?}");
        }
    }
}
