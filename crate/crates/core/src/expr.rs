//! Closed-form scalar expressions over chart coordinates.
//!
//! Expressions are immutable trees shared through [`Arc`], so cloning is
//! cheap and values can cross threads freely. Constructors perform light
//! constant folding (`0 * x = 0`, `x + 0 = x`, ...) so that repeated
//! symbolic differentiation does not drown in trivial nodes.
//!
//! The guarded bump primitive `bump(u, p)` evaluates to `exp(-1/u) / u^p`
//! for `u > 0` and to `0` otherwise. With `p = 0` it is the classical
//! C∞ function that is flat at the origin; the extra power lets the
//! derivative stay inside the same family:
//! `d/du bump(u, p) = bump(u, p + 2) - p * bump(u, p + 1)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, PartialEq)]
enum Node {
    Const(f64),
    Var(Arc<str>),
    Add(ScalarExpr, ScalarExpr),
    Mul(ScalarExpr, ScalarExpr),
    Div(ScalarExpr, ScalarExpr),
    Neg(ScalarExpr),
    Pow(ScalarExpr, i32),
    Sqrt(ScalarExpr),
    Sin(ScalarExpr),
    Cos(ScalarExpr),
    Exp(ScalarExpr),
    Bump(ScalarExpr, u32),
}

/// A scalar expression tree.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarExpr(Arc<Node>);

/// Guarded evaluation of `exp(-1/u) / u^p`.
pub fn bump_value(u: f64, p: u32) -> f64 {
    if u > 0.0 {
        (-1.0 / u - f64::from(p) * u.ln()).exp()
    } else {
        0.0
    }
}

impl ScalarExpr {
    fn node(n: Node) -> Self {
        ScalarExpr(Arc::new(n))
    }

    pub fn constant(c: f64) -> Self {
        Self::node(Node::Const(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn var(name: &str) -> Self {
        Self::node(Node::Var(Arc::from(name)))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match &*self.0 {
            Node::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn powi(&self, k: i32) -> Self {
        match (k, self.as_const()) {
            (0, _) => Self::one(),
            (1, _) => self.clone(),
            (_, Some(c)) => Self::constant(c.powi(k)),
            _ => match &*self.0 {
                Node::Pow(base, j) => base.powi(j * k),
                _ => Self::node(Node::Pow(self.clone(), k)),
            },
        }
    }

    pub fn sqrt(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(c.sqrt()),
            None => Self::node(Node::Sqrt(self.clone())),
        }
    }

    pub fn sin(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(c.sin()),
            None => Self::node(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(c.cos()),
            None => Self::node(Node::Cos(self.clone())),
        }
    }

    pub fn exp(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(c.exp()),
            None => Self::node(Node::Exp(self.clone())),
        }
    }

    /// `bump(u, p)`; see the module docs.
    pub fn bump_pow(&self, p: u32) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(bump_value(c, p)),
            None => Self::node(Node::Bump(self.clone(), p)),
        }
    }

    pub fn bump(&self) -> Self {
        self.bump_pow(0)
    }

    /// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`, strictly monotone between.
    pub fn step(&self) -> Self {
        let a = self.bump();
        let b = (Self::one() - self.clone()).bump();
        a.clone() / (a + b)
    }

    /// Exact partial derivative with respect to the variable `name`.
    pub fn diff(&self, name: &str) -> Self {
        match &*self.0 {
            Node::Const(_) => Self::zero(),
            Node::Var(v) => {
                if &**v == name {
                    Self::one()
                } else {
                    Self::zero()
                }
            }
            Node::Add(a, b) => a.diff(name) + b.diff(name),
            Node::Mul(a, b) => a.diff(name) * b.clone() + a.clone() * b.diff(name),
            Node::Div(a, b) => {
                let da = a.diff(name);
                let db = b.diff(name);
                if db.is_zero() {
                    da / b.clone()
                } else {
                    (da * b.clone() - a.clone() * db) / b.powi(2)
                }
            }
            Node::Neg(a) => -a.diff(name),
            Node::Pow(a, k) => {
                let da = a.diff(name);
                if da.is_zero() {
                    return Self::zero();
                }
                Self::constant(f64::from(*k)) * a.powi(k - 1) * da
            }
            Node::Sqrt(a) => {
                let da = a.diff(name);
                if da.is_zero() {
                    return Self::zero();
                }
                da / (Self::constant(2.0) * self.clone())
            }
            Node::Sin(a) => a.diff(name) * a.cos(),
            Node::Cos(a) => -(a.diff(name) * a.sin()),
            Node::Exp(a) => a.diff(name) * self.clone(),
            Node::Bump(a, p) => {
                let da = a.diff(name);
                if da.is_zero() {
                    return Self::zero();
                }
                let lead = a.bump_pow(p + 2);
                let inner = if *p == 0 {
                    lead
                } else {
                    lead - Self::constant(f64::from(*p)) * a.bump_pow(p + 1)
                };
                inner * da
            }
        }
    }

    /// Simultaneous substitution of variables by expressions.
    pub fn substitute(&self, map: &HashMap<String, ScalarExpr>) -> Self {
        if map.is_empty() {
            return self.clone();
        }
        match &*self.0 {
            Node::Const(_) => self.clone(),
            Node::Var(v) => map.get(&**v).cloned().unwrap_or_else(|| self.clone()),
            Node::Add(a, b) => a.substitute(map) + b.substitute(map),
            Node::Mul(a, b) => a.substitute(map) * b.substitute(map),
            Node::Div(a, b) => a.substitute(map) / b.substitute(map),
            Node::Neg(a) => -a.substitute(map),
            Node::Pow(a, k) => a.substitute(map).powi(*k),
            Node::Sqrt(a) => a.substitute(map).sqrt(),
            Node::Sin(a) => a.substitute(map).sin(),
            Node::Cos(a) => a.substitute(map).cos(),
            Node::Exp(a) => a.substitute(map).exp(),
            Node::Bump(a, p) => a.substitute(map).bump_pow(*p),
        }
    }

    pub fn substitute_one(&self, name: &str, value: ScalarExpr) -> Self {
        let mut map = HashMap::new();
        map.insert(name.to_string(), value);
        self.substitute(&map)
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match &*self.0 {
            Node::Const(_) => {}
            Node::Var(v) => {
                out.insert(v.to_string());
            }
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Node::Neg(a)
            | Node::Pow(a, _)
            | Node::Sqrt(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Exp(a)
            | Node::Bump(a, _) => a.collect_vars(out),
        }
    }

    pub fn depends_on(&self, name: &str) -> bool {
        match &*self.0 {
            Node::Const(_) => false,
            Node::Var(v) => &**v == name,
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.depends_on(name) || b.depends_on(name)
            }
            Node::Neg(a)
            | Node::Pow(a, _)
            | Node::Sqrt(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Exp(a)
            | Node::Bump(a, _) => a.depends_on(name),
        }
    }

    /// Tree evaluation with a variable lookup. Slow path; grid scans use
    /// [`CompiledExpr`].
    pub fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64> {
        Ok(match &*self.0 {
            Node::Const(c) => *c,
            Node::Var(v) => lookup(v).ok_or_else(|| Error::UnknownCoordinate(v.to_string()))?,
            Node::Add(a, b) => a.eval_with(lookup)? + b.eval_with(lookup)?,
            Node::Mul(a, b) => a.eval_with(lookup)? * b.eval_with(lookup)?,
            Node::Div(a, b) => a.eval_with(lookup)? / b.eval_with(lookup)?,
            Node::Neg(a) => -a.eval_with(lookup)?,
            Node::Pow(a, k) => a.eval_with(lookup)?.powi(*k),
            Node::Sqrt(a) => a.eval_with(lookup)?.sqrt(),
            Node::Sin(a) => a.eval_with(lookup)?.sin(),
            Node::Cos(a) => a.eval_with(lookup)?.cos(),
            Node::Exp(a) => a.eval_with(lookup)?.exp(),
            Node::Bump(a, p) => bump_value(a.eval_with(lookup)?, *p),
        })
    }

    /// Evaluates with named coordinates `names[i] = values[i]`.
    pub fn eval_at(&self, names: &[String], values: &[f64]) -> Result<f64> {
        self.eval_with(&|v| names.iter().position(|n| n == v).map(|i| values[i]))
    }

    pub fn compile(&self, names: &[String]) -> Result<CompiledExpr> {
        let mut ops = Vec::new();
        let mut depth = 0;
        let mut max_depth = 0;
        self.emit(names, &mut ops, &mut depth, &mut max_depth)?;
        Ok(CompiledExpr {
            ops,
            stack: max_depth.max(1),
        })
    }

    fn emit(
        &self,
        names: &[String],
        ops: &mut Vec<Op>,
        depth: &mut usize,
        max_depth: &mut usize,
    ) -> Result<()> {
        let mut push = |ops: &mut Vec<Op>, op: Op, depth: &mut usize| {
            ops.push(op);
            *depth += 1;
            *max_depth = (*max_depth).max(*depth);
        };
        match &*self.0 {
            Node::Const(c) => push(ops, Op::Const(*c), depth),
            Node::Var(v) => {
                let i = names
                    .iter()
                    .position(|n| **n == **v)
                    .ok_or_else(|| Error::UnknownCoordinate(v.to_string()))?;
                push(ops, Op::Var(i), depth)
            }
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.emit(names, ops, depth, max_depth)?;
                b.emit(names, ops, depth, max_depth)?;
                ops.push(match &*self.0 {
                    Node::Add(..) => Op::Add,
                    Node::Mul(..) => Op::Mul,
                    _ => Op::Div,
                });
                *depth -= 1;
            }
            Node::Neg(a) => {
                a.emit(names, ops, depth, max_depth)?;
                ops.push(Op::Neg);
            }
            Node::Pow(a, k) => {
                a.emit(names, ops, depth, max_depth)?;
                ops.push(Op::Pow(*k));
            }
            Node::Sqrt(a) => {
                a.emit(names, ops, depth, max_depth)?;
                ops.push(Op::Sqrt);
            }
            Node::Sin(a) => {
                a.emit(names, ops, depth, max_depth)?;
                ops.push(Op::Sin);
            }
            Node::Cos(a) => {
                a.emit(names, ops, depth, max_depth)?;
                ops.push(Op::Cos);
            }
            Node::Exp(a) => {
                a.emit(names, ops, depth, max_depth)?;
                ops.push(Op::Exp);
            }
            Node::Bump(a, p) => {
                a.emit(names, ops, depth, max_depth)?;
                ops.push(Op::Bump(*p));
            }
        }
        Ok(())
    }

    /// Number of nodes in the tree (shared subtrees counted once per use).
    pub fn size(&self) -> usize {
        match &*self.0 {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => 1 + a.size() + b.size(),
            Node::Neg(a)
            | Node::Pow(a, _)
            | Node::Sqrt(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Exp(a)
            | Node::Bump(a, _) => 1 + a.size(),
        }
    }

    /// Expands into a polynomial over atoms: variables, plus any
    /// non-polynomial subexpression (with simplified children) treated as
    /// an opaque atom keyed by its printed form.
    pub fn to_polynomial(&self) -> Polynomial {
        match &*self.0 {
            Node::Const(c) => Polynomial::constant(*c),
            Node::Var(_) => Polynomial::atom(self.clone()),
            Node::Add(a, b) => a.to_polynomial().add(&b.to_polynomial()),
            Node::Mul(a, b) => a.to_polynomial().mul(&b.to_polynomial()),
            Node::Neg(a) => a.to_polynomial().scale(-1.0),
            Node::Div(a, b) => {
                let den = b.to_polynomial();
                match den.as_constant() {
                    Some(c) if c != 0.0 => a.to_polynomial().scale(1.0 / c),
                    _ => Polynomial::atom(a.to_polynomial().to_expr() / den.to_expr()),
                }
            }
            Node::Pow(a, k) if *k >= 0 => {
                let base = a.to_polynomial();
                let mut acc = Polynomial::constant(1.0);
                for _ in 0..*k {
                    acc = acc.mul(&base);
                }
                acc
            }
            Node::Pow(a, k) => Polynomial::atom(a.simplify().powi(*k)),
            Node::Sqrt(a) => Polynomial::atom(a.simplify().sqrt()),
            Node::Sin(a) => Polynomial::atom(a.simplify().sin()),
            Node::Cos(a) => Polynomial::atom(a.simplify().cos()),
            Node::Exp(a) => Polynomial::atom(a.simplify().exp()),
            Node::Bump(a, p) => Polynomial::atom(a.simplify().bump_pow(*p)),
        }
    }

    /// Canonical form: expanded sum of monomials over atoms.
    pub fn simplify(&self) -> Self {
        self.to_polynomial().to_expr()
    }

    /// Symbolic equality after polynomial canonicalization.
    pub fn symbolically_equal(&self, other: &ScalarExpr) -> bool {
        (self.clone() - other.clone()).simplify().is_zero()
    }

    fn precedence(&self) -> u8 {
        match &*self.0 {
            Node::Add(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Const(c) if *c < 0.0 => 3,
            Node::Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) => {
                if *c < 0.0 {
                    write!(f, "-{:?}", -c)
                } else {
                    write!(f, "{c:?}")
                }
            }
            Node::Var(v) => write!(f, "{v}"),
            Node::Add(a, b) => {
                a.fmt_child(f, 1)?;
                match &*b.0 {
                    Node::Neg(inner) => {
                        write!(f, " - ")?;
                        inner.fmt_child(f, 2)
                    }
                    Node::Const(c) if *c < 0.0 => write!(f, " - {:?}", -c),
                    _ => {
                        write!(f, " + ")?;
                        b.fmt_child(f, 2)
                    }
                }
            }
            Node::Mul(a, b) => {
                a.fmt_child(f, 2)?;
                write!(f, "*")?;
                b.fmt_child(f, 4)
            }
            Node::Div(a, b) => {
                a.fmt_child(f, 2)?;
                write!(f, "/")?;
                b.fmt_child(f, 4)
            }
            Node::Neg(a) => {
                write!(f, "-")?;
                a.fmt_child(f, 4)
            }
            Node::Pow(a, k) => {
                a.fmt_child(f, 5)?;
                if *k < 0 {
                    write!(f, "^({k})")
                } else {
                    write!(f, "^{k}")
                }
            }
            Node::Sqrt(a) => write!(f, "sqrt({a})"),
            Node::Sin(a) => write!(f, "sin({a})"),
            Node::Cos(a) => write!(f, "cos({a})"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Bump(a, 0) => write!(f, "bump({a})"),
            Node::Bump(a, p) => write!(f, "bump({a}, {p})"),
        }
    }
}

impl From<f64> for ScalarExpr {
    fn from(c: f64) -> Self {
        ScalarExpr::constant(c)
    }
}

impl Add for ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, rhs: ScalarExpr) -> ScalarExpr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => ScalarExpr::constant(a + b),
            (Some(a), _) if a == 0.0 => rhs,
            (_, Some(b)) if b == 0.0 => self,
            _ => ScalarExpr::node(Node::Add(self, rhs)),
        }
    }
}

impl Sub for ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, rhs: ScalarExpr) -> ScalarExpr {
        self + (-rhs)
    }
}

impl Mul for ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, rhs: ScalarExpr) -> ScalarExpr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => ScalarExpr::constant(a * b),
            (Some(a), _) | (_, Some(a)) if a == 0.0 => ScalarExpr::zero(),
            (Some(a), _) if a == 1.0 => rhs,
            (_, Some(b)) if b == 1.0 => self,
            (Some(a), _) if a == -1.0 => -rhs,
            (_, Some(b)) if b == -1.0 => -self,
            (None, Some(_)) => rhs * self,
            (Some(a), None) => match &*rhs.0 {
                // fold nested constant factors: a * (b * x) = (ab) * x
                Node::Mul(inner, x) if inner.as_const().is_some() => {
                    ScalarExpr::constant(a * inner.as_const().unwrap_or(1.0)) * x.clone()
                }
                Node::Neg(x) => ScalarExpr::constant(-a) * x.clone(),
                _ => ScalarExpr::node(Node::Mul(self, rhs)),
            },
            _ => ScalarExpr::node(Node::Mul(self, rhs)),
        }
    }
}

impl Div for ScalarExpr {
    type Output = ScalarExpr;
    fn div(self, rhs: ScalarExpr) -> ScalarExpr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), _) if a == 0.0 => ScalarExpr::zero(),
            (_, Some(b)) if b == 1.0 => self,
            (Some(a), Some(b)) if b != 0.0 => ScalarExpr::constant(a / b),
            (None, Some(b)) if b != 0.0 => ScalarExpr::constant(1.0 / b) * self,
            _ => ScalarExpr::node(Node::Div(self, rhs)),
        }
    }
}

impl Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        match &*self.0 {
            Node::Const(c) => ScalarExpr::constant(-c),
            Node::Neg(a) => a.clone(),
            Node::Mul(a, b) if a.as_const().is_some() => {
                ScalarExpr::constant(-a.as_const().unwrap_or(1.0)) * b.clone()
            }
            _ => ScalarExpr::node(Node::Neg(self)),
        }
    }
}

macro_rules! scalar_mixed_ops {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr<f64> for ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: f64) -> ScalarExpr {
                $tr::$method(self, ScalarExpr::constant(rhs))
            }
        }
        impl $tr<ScalarExpr> for f64 {
            type Output = ScalarExpr;
            fn $method(self, rhs: ScalarExpr) -> ScalarExpr {
                $tr::$method(ScalarExpr::constant(self), rhs)
            }
        }
        impl $tr<&ScalarExpr> for ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: &ScalarExpr) -> ScalarExpr {
                $tr::$method(self, rhs.clone())
            }
        }
        impl $tr<ScalarExpr> for &ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: ScalarExpr) -> ScalarExpr {
                $tr::$method(self.clone(), rhs)
            }
        }
        impl $tr<&ScalarExpr> for &ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: &ScalarExpr) -> ScalarExpr {
                $tr::$method(self.clone(), rhs.clone())
            }
        }
    )*};
}
scalar_mixed_ops!(Add add, Sub sub, Mul mul, Div div);

#[derive(Clone, Copy, Debug)]
enum Op {
    Const(f64),
    Var(usize),
    Add,
    Mul,
    Div,
    Neg,
    Pow(i32),
    Sqrt,
    Sin,
    Cos,
    Exp,
    Bump(u32),
}

/// Postfix program bound to a fixed coordinate ordering.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    ops: Vec<Op>,
    stack: usize,
}

impl CompiledExpr {
    pub fn eval(&self, point: &[f64]) -> f64 {
        if let [Op::Const(c)] = self.ops[..] {
            return c;
        }
        let mut stack: Vec<f64> = Vec::with_capacity(self.stack);
        for op in &self.ops {
            match *op {
                Op::Const(c) => stack.push(c),
                Op::Var(i) => stack.push(point[i]),
                Op::Add | Op::Mul | Op::Div => {
                    let b = stack.pop().unwrap_or(f64::NAN);
                    let a = stack.last_mut().expect("compiled stack underflow");
                    match op {
                        Op::Add => *a += b,
                        Op::Mul => *a *= b,
                        _ => *a /= b,
                    }
                }
                _ => {
                    let a = stack.last_mut().expect("compiled stack underflow");
                    *a = match *op {
                        Op::Neg => -*a,
                        Op::Pow(k) => a.powi(k),
                        Op::Sqrt => a.sqrt(),
                        Op::Sin => a.sin(),
                        Op::Cos => a.cos(),
                        Op::Exp => a.exp(),
                        Op::Bump(p) => bump_value(*a, p),
                        _ => unreachable!(),
                    };
                }
            }
        }
        stack.pop().unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug)]
struct Atom {
    key: Arc<str>,
    expr: ScalarExpr,
}

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl Eq for Atom {}
impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Atom {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key.cmp(&other.key)
    }
}

type Monomial = Vec<(Atom, u32)>;

/// Sparse polynomial with `f64` coefficients over variables and opaque
/// atoms, used to canonicalize expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn constant(c: f64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert(Vec::new(), c);
        }
        Polynomial { terms }
    }

    fn atom(expr: ScalarExpr) -> Self {
        if let Some(c) = expr.as_const() {
            return Self::constant(c);
        }
        let mut terms = BTreeMap::new();
        let key: Arc<str> = Arc::from(expr.to_string());
        terms.insert(vec![(Atom { key, expr }, 1)], 1.0);
        Polynomial { terms }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => self.terms.get(&Vec::new()).copied(),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every atom is a plain variable.
    pub fn is_polynomial(&self) -> bool {
        self.terms
            .keys()
            .all(|m| m.iter().all(|(a, _)| a.expr.as_var().is_some()))
    }

    fn insert(&mut self, m: Monomial, c: f64) {
        let entry = self.terms.entry(m).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.retain(|_, v| *v != 0.0);
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), *c);
        }
        out
    }

    pub fn scale(&self, k: f64) -> Polynomial {
        if k == 0.0 {
            return Polynomial::constant(0.0);
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::constant(0.0);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert(merge_monomials(ma, mb), ca * cb);
            }
        }
        out
    }

    pub fn to_expr(&self) -> ScalarExpr {
        let mut acc = ScalarExpr::zero();
        for (m, c) in &self.terms {
            let mut term = ScalarExpr::constant(*c);
            for (a, e) in m {
                term = term * a.expr.powi(*e as i32);
            }
            acc = acc + term;
        }
        acc
    }
}

fn merge_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    let mut map: BTreeMap<Atom, u32> = BTreeMap::new();
    for (v, e) in a.iter().chain(b) {
        *map.entry(v.clone()).or_insert(0) += e;
    }
    map.into_iter().collect()
}
