use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::{PhysicalParams, WaveFunction};
use crate::error::{ensure, Error, Result};
use crate::exec::Exec;
use crate::numerics::Domain;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Highest total derivative order `apply_operator` will realize.
pub const MAX_DERIVATIVE_ORDER: usize = 8;

type FieldFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

/// A real function of the coordinates, used as a multiplication operator.
#[derive(Clone)]
pub enum ScalarField {
    /// The coordinate along one axis.
    Coordinate(usize),
    /// `sum_k coeffs[k] * q^k` in the coordinate `q` along `axis`.
    Polynomial { axis: usize, coeffs: Vec<f64> },
    /// Any smooth function; its partial derivatives are taken numerically.
    Custom { name: String, f: FieldFn },
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Coordinate(a) => write!(f, "{}", axis_name(*a)),
            ScalarField::Polynomial { axis, coeffs } => {
                let parts: Vec<String> = coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(k, c)| match k {
                        0 => format!("{c}"),
                        1 => format!("{c}*{}", axis_name(*axis)),
                        _ => format!("{c}*{}^{k}", axis_name(*axis)),
                    })
                    .collect();
                if parts.is_empty() {
                    write!(f, "0")
                } else {
                    write!(f, "({})", parts.join(" + "))
                }
            }
            ScalarField::Custom { name, .. } => write!(f, "{name}"),
        }
    }
}

fn axis_name(axis: usize) -> &'static str {
    match axis {
        0 => "x",
        1 => "y",
        _ => "?",
    }
}

impl ScalarField {
    pub fn custom(name: impl Into<String>, f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// Largest axis index the field depends on, if known.
    fn max_axis(&self) -> usize {
        match self {
            ScalarField::Coordinate(a) | ScalarField::Polynomial { axis: a, .. } => *a,
            ScalarField::Custom { .. } => 0,
        }
    }

    /// True when the partial derivative `alpha` is identically zero.
    pub fn partial_vanishes(&self, alpha: [u8; 2]) -> bool {
        match self {
            ScalarField::Coordinate(a) => {
                let total = alpha[0] + alpha[1];
                total > 1 || (total == 1 && alpha[*a] != 1)
            }
            ScalarField::Polynomial { axis, coeffs } => {
                let other = if *axis == 0 { 1 } else { 0 };
                let k = alpha[*axis] as usize;
                alpha[other] > 0 || coeffs.iter().skip(k).all(|c| *c == 0.0)
            }
            ScalarField::Custom { .. } => false,
        }
    }

    pub fn value(&self, p: [f64; 2]) -> f64 {
        self.partial(p, [0, 0])
    }

    /// Mixed partial derivative of orders `alpha` at point `p`.
    pub fn partial(&self, p: [f64; 2], alpha: [u8; 2]) -> f64 {
        match self {
            ScalarField::Coordinate(a) => match alpha {
                [0, 0] => p[*a],
                _ if self.partial_vanishes(alpha) => 0.0,
                _ => 1.0,
            },
            ScalarField::Polynomial { axis, coeffs } => {
                if self.partial_vanishes(alpha) {
                    return 0.0;
                }
                let k = alpha[*axis] as usize;
                let q = p[*axis];
                coeffs
                    .iter()
                    .enumerate()
                    .skip(k)
                    .rev()
                    .fold(0.0, |acc, (j, c)| acc * q + c * falling(j, k))
            }
            ScalarField::Custom { f, .. } => numeric_partial(f.as_ref(), p, alpha),
        }
    }
}

fn falling(j: usize, k: usize) -> f64 {
    ((j - k + 1)..=j).map(|v| v as f64).product()
}

fn numeric_partial(f: &(dyn Fn([f64; 2]) -> f64 + Send + Sync), p: [f64; 2], alpha: [u8; 2]) -> f64 {
    let axis = match alpha {
        [0, 0] => return f(p),
        [a, _] if a > 0 => 0,
        _ => 1,
    };
    let mut lower = alpha;
    lower[axis] -= 1;
    let h = 1e-3 * p[axis].abs().max(1.0);
    let at = |s: f64| {
        let mut q = p;
        q[axis] += s * h;
        numeric_partial(f, q, lower)
    };
    (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h)
}

/// Expression tree of a linear operator acting on wave functions.
///
/// `Compose` applies its factors right to left, as in operator notation.
#[derive(Clone, Debug)]
pub enum OperatorSpec {
    Identity,
    Multiply(ScalarField),
    Derivative { axis: usize, scale: Complex64 },
    Scale(Complex64, Box<OperatorSpec>),
    Sum(Vec<OperatorSpec>),
    Compose(Vec<OperatorSpec>),
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorSpec::Identity => write!(f, "1"),
            OperatorSpec::Multiply(field) => write!(f, "{field}"),
            OperatorSpec::Derivative { axis, scale } => write!(f, "({scale})d/d{}", axis_name(*axis)),
            OperatorSpec::Scale(c, op) => write!(f, "({c})[{op}]"),
            OperatorSpec::Sum(ops) => {
                let parts: Vec<String> = ops.iter().map(|o| o.to_string()).collect();
                write!(f, "[{}]", parts.join(" + "))
            }
            OperatorSpec::Compose(ops) => {
                let parts: Vec<String> = ops.iter().map(|o| o.to_string()).collect();
                write!(f, "{}", parts.join(" . "))
            }
        }
    }
}

impl OperatorSpec {
    pub fn multiply(field: ScalarField) -> Self {
        OperatorSpec::Multiply(field)
    }

    pub fn derivative(axis: usize, scale: Complex64) -> Self {
        OperatorSpec::Derivative { axis, scale }
    }

    /// Multiplication by the coordinate along `axis`.
    pub fn position(axis: usize) -> Self {
        OperatorSpec::Multiply(ScalarField::Coordinate(axis))
    }

    /// `-i hbar d/dq` along `axis`.
    pub fn momentum(axis: usize, params: &PhysicalParams) -> Self {
        Self::derivative(axis, -I * params.hbar)
    }

    /// `-(hbar^2 / 2m) d^2/dq^2` summed over the first `dim` axes.
    pub fn kinetic(dim: usize, params: &PhysicalParams) -> Self {
        let c = -params.hbar * params.hbar / (2.0 * params.mass);
        let terms = (0..dim)
            .map(|a| {
                OperatorSpec::Scale(
                    Complex64::new(c, 0.0),
                    Box::new(OperatorSpec::Compose(vec![
                        Self::derivative(a, ONE),
                        Self::derivative(a, ONE),
                    ])),
                )
            })
            .collect();
        OperatorSpec::Sum(terms)
    }

    /// Harmonic oscillator Hamiltonian `p^2/2m + m omega^2 x^2 / 2`.
    pub fn oscillator_hamiltonian(params: &PhysicalParams) -> Result<Self> {
        let w = params.require_omega()?;
        let potential = ScalarField::Polynomial {
            axis: 0,
            coeffs: vec![0.0, 0.0, 0.5 * params.mass * w * w],
        };
        Ok(Self::kinetic(1, params).plus(OperatorSpec::Multiply(potential)))
    }

    /// Number operator `i d/dphi` on the phase representation.
    pub fn number_phase() -> Self {
        Self::derivative(0, I)
    }

    /// Multiplication by the phase angle.
    pub fn phase() -> Self {
        Self::position(0)
    }

    /// Energy operator `i hbar d/dt` on the time representation.
    pub fn energy_time(params: &PhysicalParams) -> Self {
        Self::derivative(0, I * params.hbar)
    }

    /// Multiplication by time.
    pub fn time() -> Self {
        Self::position(0)
    }

    pub fn plus(self, other: OperatorSpec) -> Self {
        match self {
            OperatorSpec::Sum(mut v) => {
                v.push(other);
                OperatorSpec::Sum(v)
            }
            s => OperatorSpec::Sum(vec![s, other]),
        }
    }

    pub fn scaled(self, c: impl Into<Complex64>) -> Self {
        OperatorSpec::Scale(c.into(), Box::new(self))
    }

    /// `self . other`: apply `other` first.
    pub fn compose(self, other: OperatorSpec) -> Self {
        OperatorSpec::Compose(vec![self, other])
    }

    /// `self - c`.
    pub fn shifted(self, c: Complex64) -> Self {
        self.plus(OperatorSpec::Identity.scaled(-c))
    }

    pub fn power(self, n: usize) -> Self {
        match n {
            0 => OperatorSpec::Identity,
            1 => self,
            _ => OperatorSpec::Compose(vec![self; n]),
        }
    }

    /// `[a, b] = ab - ba`.
    pub fn commutator(a: &OperatorSpec, b: &OperatorSpec) -> Self {
        a.clone()
            .compose(b.clone())
            .plus(b.clone().compose(a.clone()).scaled(-1.0))
    }

    /// Largest axis index referenced anywhere in the tree.
    pub fn max_axis(&self) -> usize {
        match self {
            OperatorSpec::Identity => 0,
            OperatorSpec::Multiply(f) => f.max_axis(),
            OperatorSpec::Derivative { axis, .. } => *axis,
            OperatorSpec::Scale(_, op) => op.max_axis(),
            OperatorSpec::Sum(ops) | OperatorSpec::Compose(ops) => ops.iter().map(|o| o.max_axis()).max().unwrap_or(0),
        }
    }

    pub fn normal_form(&self) -> Result<NormalForm> {
        NormalForm::from_spec(self)
    }
}

/// One term `coeff * prod_k d^{alpha_k} f_k * d^{deriv}` of a normal form.
#[derive(Clone, Debug)]
pub struct Term {
    pub coeff: Complex64,
    pub factors: Vec<(ScalarField, [u8; 2])>,
    pub deriv: [u8; 2],
}

impl Term {
    fn unit() -> Self {
        Term {
            coeff: ONE,
            factors: Vec::new(),
            deriv: [0, 0],
        }
    }

    /// Value of the coefficient function at `p`.
    pub fn coefficient_at(&self, p: [f64; 2]) -> Complex64 {
        self.factors
            .iter()
            .fold(self.coeff, |acc, (f, alpha)| acc * f.partial(p, *alpha))
    }

    pub fn order(&self) -> usize {
        (self.deriv[0] + self.deriv[1]) as usize
    }
}

/// An operator rewritten as `sum coeff(q) * d^alpha`, with every derivative
/// acting directly on the wave function.
///
/// Derivatives of the coefficient functions are carried out exactly (or by
/// fine numerical differencing for custom fields); only derivatives of the
/// state itself go through the grid stencils. On a periodic grid this keeps
/// the boundary term that a product like `d/dphi (phi Psi)` picks up from the
/// jump of `phi`.
#[derive(Clone, Debug)]
pub struct NormalForm {
    terms: Vec<Term>,
}

impl NormalForm {
    pub fn from_spec(op: &OperatorSpec) -> Result<Self> {
        let terms = match op {
            OperatorSpec::Identity => vec![Term::unit()],
            OperatorSpec::Multiply(f) => {
                if let ScalarField::Polynomial { axis, .. } = f {
                    ensure!(*axis < 2, "axis {axis} is out of range");
                }
                vec![Term {
                    factors: vec![(f.clone(), [0, 0])],
                    ..Term::unit()
                }]
            }
            OperatorSpec::Derivative { axis, scale } => {
                ensure!(*axis < 2, "axis {axis} is out of range");
                let mut deriv = [0, 0];
                deriv[*axis] = 1;
                vec![Term {
                    coeff: *scale,
                    factors: Vec::new(),
                    deriv,
                }]
            }
            OperatorSpec::Scale(c, inner) => {
                let mut nf = Self::from_spec(inner)?;
                nf.terms.iter_mut().for_each(|t| t.coeff *= c);
                nf.terms
            }
            OperatorSpec::Sum(ops) => {
                let mut terms = Vec::new();
                for o in ops {
                    terms.extend(Self::from_spec(o)?.terms);
                }
                terms
            }
            OperatorSpec::Compose(ops) => {
                let mut acc = vec![Term::unit()];
                for o in ops.iter().rev() {
                    acc = compose_terms(&Self::from_spec(o)?.terms, &acc);
                }
                acc
            }
        };
        Ok(NormalForm {
            terms: terms.into_iter().filter(|t| t.coeff != Complex64::new(0.0, 0.0)).collect(),
        })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn max_order(&self) -> usize {
        self.terms.iter().map(Term::order).max().unwrap_or(0)
    }

    fn uses_axis(&self, axis: usize) -> bool {
        self.terms.iter().any(|t| {
            t.deriv[axis] > 0
                || t.factors.iter().any(|(f, a)| {
                    a[axis] > 0
                        || matches!(f, ScalarField::Coordinate(x) | ScalarField::Polynomial { axis: x, .. } if *x == axis)
                })
        })
    }

    pub fn apply(&self, domain: &Domain, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        self.apply_with(Exec::default(), domain, samples)
    }

    pub fn apply_with(&self, exec: Exec, domain: &Domain, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        ensure!(
            samples.len() == domain.len(),
            "operator input has {} samples for {} nodes",
            samples.len(),
            domain.len()
        );
        for axis in domain.dim()..2 {
            ensure!(
                !self.uses_axis(axis),
                "operator acts along axis {axis} but the domain is {}D",
                domain.dim()
            );
        }
        let order = self.max_order();
        if order > MAX_DERIVATIVE_ORDER {
            return Err(Error::UnsupportedOrder {
                order,
                max: MAX_DERIVATIVE_ORDER,
            });
        }
        let mut cache: HashMap<[u8; 2], Vec<Complex64>> = HashMap::new();
        for t in &self.terms {
            if !cache.contains_key(&t.deriv) {
                cache.insert(t.deriv, derive(domain, samples, t.deriv)?);
            }
        }
        let n = samples.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for t in &self.terms {
            let d = &cache[&t.deriv];
            if t.factors.is_empty() {
                out.iter_mut().zip(d).for_each(|(o, v)| *o += t.coeff * v);
            } else {
                let c = exec.map_range(n, |i| t.coefficient_at(domain.node(i)));
                out.iter_mut().zip(d.iter().zip(c)).for_each(|(o, (v, c))| *o += c * v);
            }
        }
        Ok(out)
    }
}

fn derive(domain: &Domain, samples: &[Complex64], alpha: [u8; 2]) -> Result<Vec<Complex64>> {
    let mut cur = samples.to_vec();
    for (axis, &k) in alpha.iter().enumerate() {
        let mut k = k;
        while k >= 2 {
            cur = domain.derivative(&cur, axis, 2)?;
            k -= 2;
        }
        if k == 1 {
            cur = domain.derivative(&cur, axis, 1)?;
        }
    }
    Ok(cur)
}

/// Normal form of `left . right`.
fn compose_terms(left: &[Term], right: &[Term]) -> Vec<Term> {
    let mut out = Vec::new();
    for l in left {
        let mut acc: Vec<Term> = right.to_vec();
        for axis in 0..2 {
            for _ in 0..l.deriv[axis] {
                acc = left_derivative(axis, acc);
            }
        }
        for mut t in acc {
            t.coeff *= l.coeff;
            let mut factors = l.factors.clone();
            factors.extend(t.factors);
            t.factors = factors;
            out.push(t);
        }
    }
    out
}

/// Product rule: `d_axis . sum coeff * prod f_k * d^alpha`.
fn left_derivative(axis: usize, terms: Vec<Term>) -> Vec<Term> {
    let mut out = Vec::with_capacity(terms.len() * 2);
    for t in terms {
        for k in 0..t.factors.len() {
            let (f, mut alpha) = t.factors[k].clone();
            alpha[axis] += 1;
            if f.partial_vanishes(alpha) {
                continue;
            }
            let mut nt = t.clone();
            nt.factors[k] = (f, alpha);
            out.push(nt);
        }
        let mut nt = t;
        nt.deriv[axis] += 1;
        out.push(nt);
    }
    out
}

/// `op Psi` sampled on the wave function's grid.
pub fn apply_operator(op: &OperatorSpec, wf: &WaveFunction) -> Result<Vec<Complex64>> {
    op.normal_form()?.apply(wf.domain(), wf.samples())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Grid, Grid2D, StencilAccuracy};
    use crate::qstate::Representation;
    use std::f64::consts::PI;

    fn gaussian_wf(n: usize) -> WaveFunction {
        let g = Grid::centered(0.0, 10.0, n).unwrap();
        WaveFunction::from_fn(g, PhysicalParams::default(), Representation::Coordinate, |p| {
            Complex64::new((-p[0] * p[0] / 4.0).exp(), 0.0) * Complex64::from_polar(1.0, 0.7 * p[0])
        })
        .unwrap()
    }

    #[test]
    fn position_is_pointwise() {
        let wf = gaussian_wf(201);
        let out = apply_operator(&OperatorSpec::position(0), &wf).unwrap();
        for (i, v) in out.iter().enumerate() {
            let x = wf.domain().node(i)[0];
            assert!((v - wf.samples()[i] * x).norm() < 1e-15);
        }
    }

    #[test]
    fn number_operator_eigenstate() {
        let g = Grid::periodic(0.0, 2.0 * PI, 512).unwrap();
        let n = 3.0;
        let wf = WaveFunction::from_fn(g, PhysicalParams::default(), Representation::Phase, |p| {
            Complex64::from_polar(1.0, -n * p[0])
        })
        .unwrap();
        let out = apply_operator(&OperatorSpec::number_phase(), &wf).unwrap();
        let err = out
            .iter()
            .zip(wf.samples())
            .map(|(a, b)| (a - b * n).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn product_rule_expansion() {
        // d/dx . x = x d/dx + 1
        let op = OperatorSpec::derivative(0, ONE).compose(OperatorSpec::position(0));
        let nf = op.normal_form().unwrap();
        assert_eq!(nf.terms().len(), 2);
        let wf = gaussian_wf(401);
        let direct = apply_operator(&op, &wf).unwrap();
        let d = wf.domain().derivative(wf.samples(), 0, 1).unwrap();
        for i in 0..direct.len() {
            let x = wf.domain().node(i)[0];
            let want = x * d[i] + wf.samples()[i];
            assert!((direct[i] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn commutator_of_x_and_p() {
        let p = PhysicalParams::default();
        let c = OperatorSpec::commutator(&OperatorSpec::position(0), &OperatorSpec::momentum(0, &p));
        let wf = gaussian_wf(401);
        let out = apply_operator(&c, &wf).unwrap();
        for (o, s) in out.iter().zip(wf.samples()) {
            assert!((o - I * s).norm() < 1e-10);
        }
    }

    #[test]
    fn polynomial_partials() {
        let f = ScalarField::Polynomial {
            axis: 0,
            coeffs: vec![1.0, 2.0, 3.0],
        };
        assert_eq!(f.partial([2.0, 0.0], [0, 0]), 17.0);
        assert_eq!(f.partial([2.0, 0.0], [1, 0]), 14.0);
        assert_eq!(f.partial([2.0, 0.0], [2, 0]), 6.0);
        assert!(f.partial_vanishes([3, 0]));
        assert!(f.partial_vanishes([0, 1]));
        let c = ScalarField::custom("sin", |p| p[0].sin());
        assert!((c.partial([0.3, 0.0], [1, 0]) - 0.3f64.cos()).abs() < 1e-9);
        assert!((c.partial([0.3, 0.0], [2, 0]) + 0.3f64.sin()).abs() < 1e-6);
    }

    #[test]
    fn axis_mismatch_is_a_contract_violation() {
        let wf = gaussian_wf(101);
        let r = apply_operator(&OperatorSpec::derivative(1, ONE), &wf);
        assert!(matches!(r, Err(Error::Contract(_))));
        let r = apply_operator(&OperatorSpec::position(1), &wf);
        assert!(matches!(r, Err(Error::Contract(_))));
    }

    #[test]
    fn two_dimensional_momentum() {
        let axis = Grid::centered(0.0, 8.0, 321).unwrap().with_stencil(StencilAccuracy::Sixth);
        let g = Grid2D::new(axis.clone(), axis).unwrap();
        let p = PhysicalParams::default();
        let wf = WaveFunction::from_fn(g, p, Representation::Coordinate, |q| {
            Complex64::new((-(q[0] * q[0] + q[1] * q[1]) / 4.0).exp(), 0.0) * Complex64::from_polar(1.0, 2.0 * q[1])
        })
        .unwrap();
        let out = apply_operator(&OperatorSpec::momentum(1, &p), &wf).unwrap();
        let mean = wf.domain().inner(wf.samples(), &out).unwrap();
        assert!((mean - Complex64::new(2.0, 0.0)).norm() < 1e-7, "{mean}");
    }
}
