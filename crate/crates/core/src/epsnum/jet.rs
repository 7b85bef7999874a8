//! Truncated multivariate Taylor series ("jets") for forward-mode
//! differentiation up to order [`MAX_ORDER`].
//!
//! A [`Jet`] stores the Taylor coefficients `c_α = ∂^α f(x₀) / α!` of a
//! function around a base point, densely over all multi-indices `α` of
//! total degree at most its order. Coefficients are laid out in graded
//! order, so truncating to a lower order is a prefix of the coefficient
//! vector. Differentiating a jet lowers its order by one; products and sums
//! carry the smaller of the operand orders.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Highest supported truncation order.
pub const MAX_ORDER: usize = 5;

/// Monomial bookkeeping shared by all jets with the same variable count and
/// maximal order.
pub struct JetSpace {
    nvars: usize,
    order: usize,
    exps: Vec<u8>,
    degree: Vec<u8>,
    offsets: Vec<usize>,
    // prod[i][j] = index of monomial(i) * monomial(j), for deg(j) <= order - deg(i)
    prod: Vec<Vec<u32>>,
    // raise[k * nvars + v] = index of monomial(k) * x_v, or NONE
    raise: Vec<u32>,
    factorial: Vec<f64>,
    index: HashMap<Vec<u8>, u32>,
    restrict_maps: Mutex<HashMap<usize, Arc<Vec<u32>>>>,
}

const NONE: u32 = u32::MAX;

fn space_cache() -> &'static Mutex<HashMap<(usize, usize), Arc<JetSpace>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn monomials_of_degree(nvars: usize, d: usize, out: &mut Vec<Vec<u8>>) {
    fn rec(prefix: &mut Vec<u8>, left: usize, nvars: usize, out: &mut Vec<Vec<u8>>) {
        if prefix.len() + 1 == nvars {
            prefix.push(left as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k as u8);
            rec(prefix, left - k, nvars, out);
            prefix.pop();
        }
    }
    if nvars == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return;
    }
    rec(&mut Vec::with_capacity(nvars), d, nvars, out);
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetSpace(nvars = {}, order = {})", self.nvars(), self.order())
    }
}

impl JetSpace {
    /// Returns the shared space for `nvars` variables truncated at `order`.
    pub fn get(nvars: usize, order: usize) -> Result<Arc<JetSpace>> {
        if order > MAX_ORDER {
            return Err(Error::Config(format!(
                "jet order {order} exceeds the supported maximum {MAX_ORDER}"
            )));
        }
        let mut cache = space_cache().lock().expect("jet space cache poisoned");
        if let Some(s) = cache.get(&(nvars, order)) {
            return Ok(Arc::clone(s));
        }
        let space = Arc::new(JetSpace::build(nvars, order));
        cache.insert((nvars, order), Arc::clone(&space));
        Ok(space)
    }

    fn build(nvars: usize, order: usize) -> JetSpace {
        let mut monos = Vec::new();
        let mut offsets = Vec::with_capacity(order + 2);
        for d in 0..=order {
            offsets.push(monos.len());
            monomials_of_degree(nvars, d, &mut monos);
        }
        offsets.push(monos.len());
        let len = monos.len();
        let index: HashMap<Vec<u8>, u32> = monos
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i as u32))
            .collect();
        let degree: Vec<u8> = monos
            .iter()
            .map(|m| m.iter().map(|&e| e as usize).sum::<usize>() as u8)
            .collect();
        let mut prod = Vec::with_capacity(len);
        let mut buf = vec![0u8; nvars];
        for i in 0..len {
            let lim = offsets[order - degree[i] as usize + 1];
            let mut row = Vec::with_capacity(lim);
            for j in 0..lim {
                for v in 0..nvars {
                    buf[v] = monos[i][v] + monos[j][v];
                }
                row.push(index[&buf]);
            }
            prod.push(row);
        }
        let mut raise = vec![NONE; len * nvars];
        for k in 0..len {
            if (degree[k] as usize) < order {
                for v in 0..nvars {
                    buf.copy_from_slice(&monos[k]);
                    buf[v] += 1;
                    raise[k * nvars + v] = index[&buf];
                }
            }
        }
        let factorial = monos
            .iter()
            .map(|m| m.iter().map(|&e| factorial(e as usize)).product())
            .collect();
        JetSpace {
            nvars,
            order,
            exps: monos.concat(),
            degree,
            offsets,
            prod,
            raise,
            factorial,
            index,
            restrict_maps: Mutex::new(HashMap::new()),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of coefficients of a full-order jet.
    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }

    fn len_for(&self, order: usize) -> usize {
        self.offsets[order + 1]
    }

    pub fn exponents(&self, k: usize) -> &[u8] {
        &self.exps[k * self.nvars..(k + 1) * self.nvars]
    }

    /// Index of a multi-index, if it lies inside the space.
    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        if alpha.len() != self.nvars {
            return None;
        }
        self.index.get(alpha).map(|&k| k as usize)
    }

    // Source indices in this space of the monomials of a space with
    // variable `var` removed.
    fn restriction_map(&self, var: usize) -> Arc<Vec<u32>> {
        let mut maps = self.restrict_maps.lock().expect("restriction cache poisoned");
        if let Some(m) = maps.get(&var) {
            return Arc::clone(m);
        }
        let map: Vec<u32> = (0..self.len())
            .filter(|&k| self.exps[k * self.nvars + var] == 0)
            .map(|k| k as u32)
            .collect();
        let map = Arc::new(map);
        maps.insert(var, Arc::clone(&map));
        map
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Seeds the coordinate jets `x_i + δ_i` at `point`.
pub fn seed(space: &Arc<JetSpace>, point: &[f64]) -> Vec<Jet> {
    assert_eq!(point.len(), space.nvars, "seed point has wrong dimension");
    point
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet::variable(space, i, v))
        .collect()
}

/// Jet of a scalar function at `x`, truncated at order `k`.
///
/// The returned coefficient for a multi-index `α` is `∂^α f(x) / α!`; use
/// [`Jet::derivative`] to recover plain partial derivatives.
pub fn jet_lift<Fun>(f: Fun, x: &[f64], k: usize) -> Result<Jet>
where
    Fun: Fn(&[Jet]) -> Result<Jet>,
{
    let space = JetSpace::get(x.len(), k)?;
    f(&seed(&space, x))
}

/// A truncated Taylor expansion around an (implicit) base point.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    order: usize,
    c: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Jet(value={:e}, order={}, nvars={})",
            self.value(),
            self.order,
            self.space.nvars
        )
    }
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, v: f64) -> Jet {
        let len = space.len();
        let mut c = vec![0.0; len];
        c[0] = v;
        Jet {
            space: Arc::clone(space),
            order: space.order,
            c,
        }
    }

    pub fn zero(space: &Arc<JetSpace>) -> Jet {
        Jet::constant(space, 0.0)
    }

    /// The coordinate function `x_var` with value `v` at the base point.
    pub fn variable(space: &Arc<JetSpace>, var: usize, v: f64) -> Jet {
        let mut j = Jet::constant(space, v);
        if space.order >= 1 {
            j.c[1 + var] = 1.0;
        }
        j
    }

    /// Builds a jet from raw Taylor coefficients in graded order.
    pub fn from_coeffs(space: &Arc<JetSpace>, order: usize, c: Vec<f64>) -> Result<Jet> {
        if order > space.order || c.len() != space.len_for(order) {
            return Err(Error::usage("coefficient vector does not match jet space"));
        }
        Ok(Jet {
            space: Arc::clone(space),
            order,
            c,
        })
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// Value at the base point.
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn constant_like(&self, v: f64) -> Jet {
        let mut c = vec![0.0; self.c.len()];
        c[0] = v;
        Jet {
            space: Arc::clone(&self.space),
            order: self.order,
            c,
        }
    }

    pub fn zero_like(&self) -> Jet {
        self.constant_like(0.0)
    }

    /// Taylor coefficient of the multi-index `alpha` (zero above the order).
    pub fn coeff(&self, alpha: &[u8]) -> f64 {
        match self.space.index_of(alpha) {
            Some(k) if k < self.c.len() => self.c[k],
            _ => 0.0,
        }
    }

    /// Partial derivative `∂^α f` at the base point.
    pub fn derivative(&self, alpha: &[u8]) -> f64 {
        match self.space.index_of(alpha) {
            Some(k) if k < self.c.len() => self.c[k] * self.space.factorial[k],
            _ => 0.0,
        }
    }

    /// First partial derivatives at the base point.
    pub fn gradient(&self) -> Vec<f64> {
        let n = self.space.nvars;
        (0..n)
            .map(|v| if self.order >= 1 { self.c[1 + v] } else { 0.0 })
            .collect()
    }

    /// Keeps only the terms of degree `<= order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order {
            return self.clone();
        }
        Jet {
            space: Arc::clone(&self.space),
            order,
            c: self.c[..self.space.len_for(order)].to_vec(),
        }
    }

    /// Partial derivative with respect to variable `var`, as a jet one
    /// order lower.
    ///
    /// Panics on an order-0 jet: the requesting code asked for fewer
    /// derivative orders than it uses.
    pub fn d(&self, var: usize) -> Jet {
        assert!(self.order >= 1, "jet order exhausted while differentiating");
        let sp = &self.space;
        let n = sp.nvars;
        let new_order = self.order - 1;
        let len = sp.len_for(new_order);
        let mut out = vec![0.0; len];
        for (k, o) in out.iter_mut().enumerate() {
            let r = sp.raise[k * n + var];
            let e = sp.exps[k * n + var] as f64 + 1.0;
            *o = e * self.c[r as usize];
        }
        Jet {
            space: Arc::clone(sp),
            order: new_order,
            c: out,
        }
    }

    /// Restriction to the hyperplane through the base point on which
    /// variable `var` is constant, as a jet over the remaining variables.
    pub fn restrict(&self, var: usize, target: &Arc<JetSpace>) -> Jet {
        let sp = &self.space;
        assert_eq!(target.nvars + 1, sp.nvars, "restriction target has wrong size");
        assert_eq!(target.order, sp.order, "restriction target has wrong order");
        let len = target.len_for(self.order);
        let map = sp.restriction_map(var);
        let out: Vec<f64> = map[..len].iter().map(|&src| self.c[src as usize]).collect();
        Jet {
            space: Arc::clone(target),
            order: self.order,
            c: out,
        }
    }

    fn same_space(&self, other: &Jet) {
        debug_assert!(
            Arc::ptr_eq(&self.space, &other.space),
            "jets from different spaces combined"
        );
    }

    fn mul_ref(&self, b: &Jet) -> Jet {
        self.same_space(b);
        let sp = &self.space;
        let order = self.order.min(b.order);
        let len = sp.len_for(order);
        let mut out = vec![0.0; len];
        for i in 0..len {
            let ai = self.c[i];
            if ai == 0.0 {
                continue;
            }
            let lim = sp.offsets[order - sp.degree[i] as usize + 1];
            let row = &sp.prod[i];
            for j in 0..lim {
                let bj = b.c[j];
                if bj != 0.0 {
                    out[row[j] as usize] += ai * bj;
                }
            }
        }
        Jet {
            space: Arc::clone(sp),
            order,
            c: out,
        }
    }

    fn zip_with(&self, b: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        self.same_space(b);
        let order = self.order.min(b.order);
        let len = self.space.len_for(order);
        let c = (0..len).map(|k| f(self.c[k], b.c[k])).collect();
        Jet {
            space: Arc::clone(&self.space),
            order,
            c,
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            space: Arc::clone(&self.space),
            order: self.order,
            c: self.c.iter().map(|x| x * s).collect(),
        }
    }

    /// Evaluates `Σ_k series[k] · h^k` with `h = self − value`, i.e. the
    /// composition of a univariate function (given by its Taylor
    /// coefficients at `value`) with this jet.
    pub fn compose_series(&self, series: &[f64]) -> Jet {
        let mut h = self.clone();
        h.c[0] = 0.0;
        let k = self.order.min(series.len() - 1);
        let mut acc = self.constant_like(series[k]);
        for s in series[..k].iter().rev() {
            acc = acc.mul_ref(&h);
            acc.c[0] += s;
        }
        acc
    }

    pub fn recip(&self) -> Jet {
        let a = self.value();
        let series: Vec<f64> = (0..=self.order)
            .map(|k| {
                let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
                sgn / a.powi(k as i32 + 1)
            })
            .collect();
        self.compose_series(&series)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let series: Vec<f64> = (0..=self.order).map(|k| e / factorial(k)).collect();
        self.compose_series(&series)
    }

    /// Natural logarithm; the value must be positive.
    pub fn ln(&self) -> Jet {
        let a = self.value();
        let mut series = vec![a.ln()];
        for k in 1..=self.order {
            let sgn = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(sgn / (k as f64 * a.powi(k as i32)));
        }
        self.compose_series(&series)
    }

    /// Square root; the value must be positive.
    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    /// Real power `self^p` for a positive value.
    pub fn powf(&self, p: f64) -> Jet {
        let a = self.value();
        let mut series = Vec::with_capacity(self.order + 1);
        let mut binom = 1.0;
        for k in 0..=self.order {
            series.push(binom * a.powf(p - k as f64));
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.compose_series(&series)
    }

    pub fn powi(&self, n: i32) -> Jet {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut acc = self.constant_like(1.0);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// `|self|`, using the sign of the value at the base point.
    pub fn abs(&self) -> Jet {
        if self.value() < 0.0 {
            -self
        } else {
            self.clone()
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.c.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a, b| a.zip_with(b, |x, y| x + y));
jet_binop!(Sub, sub, |a, b| a.zip_with(b, |x, y| x - y));
jet_binop!(Mul, mul, |a, b| a.mul_ref(b));
jet_binop!(Div, div, |a, b| a.mul_ref(&b.recip()));

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut out = self.clone();
        out.c[0] += rhs;
        out
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self.clone() - rhs
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        *self = &*self + rhs;
    }
}

impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = &*self + &rhs;
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        *self = &*self - rhs;
    }
}

impl SubAssign<Jet> for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = &*self - &rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn cube_derivatives() {
        let j = jet_lift(|x| Ok(&(&x[0] * &x[0]) * &x[0]), &[2.0], 3).unwrap();
        let d: Vec<f64> = (0..=3u8).map(|k| j.derivative(&[k])).collect();
        assert_eq!(d, vec![8.0, 12.0, 12.0, 6.0]);
    }

    #[test]
    fn exp_derivatives_at_zero() {
        let j = jet_lift(|x| Ok(x[0].exp()), &[0.0], 4).unwrap();
        for k in 0..=4u8 {
            assert!(close(j.derivative(&[k]), 1.0, 1e-15));
        }
    }

    #[test]
    fn order_above_cap_is_config_error() {
        let e = jet_lift(|x| Ok(x[0].clone()), &[1.0], 6).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }

    #[test]
    fn mixed_partials_of_product() {
        // f = x^2 y^3 at (1.5, -0.7)
        let (x0, y0) = (1.5, -0.7);
        let j = jet_lift(|v| Ok(v[0].powi(2) * v[1].powi(3)), &[x0, y0], 5).unwrap();
        assert!(close(j.derivative(&[1, 0]), 2.0 * x0 * y0.powi(3), 1e-14));
        assert!(close(j.derivative(&[1, 2]), 2.0 * x0 * 6.0 * y0, 1e-14));
        assert!(close(j.derivative(&[2, 3]), 12.0, 1e-14));
        assert_eq!(j.derivative(&[3, 0]), 0.0);
    }

    #[test]
    fn derivative_operator_lowers_order() {
        let j = jet_lift(|v| Ok(v[0].powi(3) * &v[1]), &[0.3, 2.0], 4).unwrap();
        let dx = j.d(0);
        assert_eq!(dx.order(), 3);
        assert!(close(dx.value(), 3.0 * 0.09 * 2.0, 1e-14));
        assert!(close(dx.derivative(&[1, 1]), 6.0 * 0.3, 1e-14));
    }

    #[test]
    fn transcendental_chain() {
        // f = ln(sqrt(1 + x^2)) ; f' = x/(1+x^2) ; f'' = (1-x^2)/(1+x^2)^2
        let x0 = 0.8;
        let j = jet_lift(|v| Ok((v[0].powi(2) + 1.0).sqrt().ln()), &[x0], 3).unwrap();
        let s = 1.0 + x0 * x0;
        assert!(close(j.derivative(&[1]), x0 / s, 1e-14));
        assert!(close(j.derivative(&[2]), (1.0 - x0 * x0) / (s * s), 1e-13));
    }

    #[test]
    fn division_matches_quotient_rule() {
        let j = jet_lift(|v| Ok(&v[0] / &v[1]), &[3.0, 2.0], 2).unwrap();
        assert!(close(j.derivative(&[0, 1]), -3.0 / 4.0, 1e-15));
        assert!(close(j.derivative(&[1, 1]), -1.0 / 4.0, 1e-15));
        assert!(close(j.derivative(&[0, 2]), 2.0 * 3.0 / 8.0, 1e-15));
    }

    #[test]
    fn restriction_drops_variable() {
        let big = JetSpace::get(3, 2).unwrap();
        let small = JetSpace::get(2, 2).unwrap();
        let x = seed(&big, &[1.0, 2.0, 3.0]);
        let f = &(&x[0] * &x[1]) * &x[2];
        let r = f.restrict(1, &small);
        // f restricted to y = 2 is 2 x z
        assert!(close(r.derivative(&[1, 1]), 2.0, 1e-15));
        assert!(close(r.derivative(&[1, 0]), 6.0, 1e-15));
    }
}
