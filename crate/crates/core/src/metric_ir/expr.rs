//! Immutable expression trees over chart coordinates.
//!
//! Constructors fold constants and apply only the trivial identities
//! (`0·x`, `1·x`, `x⁰`, `x¹`, `x + 0`). Negation is a `−1` factor and
//! division is multiplication by an `Inv` node, so differentiation needs one
//! rule per node kind.

use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Hard cap on the tree size produced by symbolic differentiation.
pub const NODE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryOp {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Sqrt,
    Inv,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Cosh => "cosh",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Inv => "inv",
        }
    }

    pub fn from_name(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "sinh" => UnaryOp::Sinh,
            "cosh" => UnaryOp::Cosh,
            "sqrt" => UnaryOp::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(BigRational),
    Var(usize),
    Unary(UnaryOp, Expr),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, i32),
}

#[derive(Debug, PartialEq)]
struct Inner {
    node: Node,
    /// Bit `i` set when the subtree mentions coordinate `i` (indices ≥ 64 saturate to bit 63).
    vars: u64,
    /// Tree size with shared subtrees counted once per occurrence (saturating).
    size: usize,
}

/// A reference-counted, immutable expression.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Inner>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.node)
    }
}

fn var_bit(i: usize) -> u64 {
    1u64 << i.min(63)
}

impl Expr {
    fn wrap(node: Node) -> Expr {
        let (vars, size) = match &node {
            Node::Const(_) => (0, 1),
            Node::Var(i) => (var_bit(*i), 1),
            Node::Unary(_, a) => (a.0.vars, a.0.size.saturating_add(1)),
            Node::Pow(a, _) => (a.0.vars, a.0.size.saturating_add(1)),
            Node::Add(xs) | Node::Mul(xs) => xs.iter().fold((0, 1usize), |(v, s), x| {
                (v | x.0.vars, s.saturating_add(x.0.size))
            }),
        };
        Expr(Arc::new(Inner { node, vars, size }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.0.vars & var_bit(var) != 0
    }

    pub fn max_var(&self) -> Option<usize> {
        match &self.0.node {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Unary(_, a) | Node::Pow(a, _) => a.max_var(),
            Node::Add(xs) | Node::Mul(xs) => xs.iter().filter_map(Expr::max_var).max(),
        }
    }

    pub fn constant(q: BigRational) -> Expr {
        Expr::wrap(Node::Const(q))
    }

    pub fn int(i: i64) -> Expr {
        Expr::constant(BigRational::from_integer(BigInt::from(i)))
    }

    pub fn ratio(p: i64, q: i64) -> Expr {
        Expr::constant(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(i: usize) -> Expr {
        Expr::wrap(Node::Var(i))
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match &self.0.node {
            Node::Const(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(|q| q.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(|q| q.is_one())
    }

    pub fn add(terms: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(terms.len());
        let mut c = BigRational::zero();
        for t in terms {
            match &t.0.node {
                Node::Const(q) => c += q,
                Node::Add(inner) => {
                    for x in inner {
                        match &x.0.node {
                            Node::Const(q) => c += q,
                            _ => flat.push(x.clone()),
                        }
                    }
                }
                _ => flat.push(t),
            }
        }
        if !c.is_zero() {
            flat.push(Expr::constant(c));
        }
        match flat.len() {
            0 => Expr::zero(),
            1 => flat.pop().unwrap(),
            _ => Expr::wrap(Node::Add(flat)),
        }
    }

    pub fn mul(factors: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(factors.len());
        let mut c = BigRational::one();
        for f in factors {
            match &f.0.node {
                Node::Const(q) => c *= q,
                Node::Mul(inner) => {
                    for x in inner {
                        match &x.0.node {
                            Node::Const(q) => c *= q,
                            _ => flat.push(x.clone()),
                        }
                    }
                }
                _ => flat.push(f),
            }
        }
        if c.is_zero() {
            return Expr::zero();
        }
        if flat.is_empty() {
            return Expr::constant(c);
        }
        if c.is_one() && flat.len() == 1 {
            return flat.pop().unwrap();
        }
        if !c.is_one() {
            flat.insert(0, Expr::constant(c));
        }
        Expr::wrap(Node::Mul(flat))
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::mul(vec![Expr::int(-1), a])
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::add(vec![a, Expr::neg(b)])
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::mul(vec![a, Expr::unary(UnaryOp::Inv, b)])
    }

    pub fn pow(base: Expr, k: i32) -> Expr {
        if k == 0 {
            return Expr::one();
        }
        if k == 1 {
            return base;
        }
        if let Some(q) = base.as_const() {
            if !(q.is_zero() && k < 0) {
                return Expr::constant(rational_powi(q, k));
            }
        }
        Expr::wrap(Node::Pow(base, k))
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        if let Some(q) = a.as_const() {
            let folded = match op {
                UnaryOp::Inv if !q.is_zero() => Some(q.recip()),
                UnaryOp::Exp | UnaryOp::Cos | UnaryOp::Cosh if q.is_zero() => Some(BigRational::one()),
                UnaryOp::Sin | UnaryOp::Sinh | UnaryOp::Sqrt if q.is_zero() => Some(BigRational::zero()),
                UnaryOp::Log | UnaryOp::Sqrt if q.is_one() => Some(q.clone()),
                _ => None,
            };
            if let Some(v) = folded {
                return Expr::constant(v);
            }
        }
        Expr::wrap(Node::Unary(op, a))
    }

    /// Rebuilds the tree through the folding constructors.
    pub fn fold(&self) -> Expr {
        match &self.0.node {
            Node::Const(_) | Node::Var(_) => self.clone(),
            Node::Unary(op, a) => Expr::unary(*op, a.fold()),
            Node::Add(xs) => Expr::add(xs.iter().map(Expr::fold).collect()),
            Node::Mul(xs) => Expr::mul(xs.iter().map(Expr::fold).collect()),
            Node::Pow(a, k) => Expr::pow(a.fold(), *k),
        }
    }

    /// Exact partial derivative with respect to coordinate `var`.
    pub fn diff(&self, var: usize) -> Expr {
        if !self.depends_on(var) {
            return Expr::zero();
        }
        match &self.0.node {
            Node::Const(_) => Expr::zero(),
            Node::Var(i) => {
                if *i == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(xs) => Expr::add(xs.iter().map(|x| x.diff(var)).collect()),
            Node::Mul(xs) => {
                let mut terms = Vec::new();
                for (k, x) in xs.iter().enumerate() {
                    let dx = x.diff(var);
                    if dx.is_zero() {
                        continue;
                    }
                    let mut fs: Vec<Expr> = xs.clone();
                    fs[k] = dx;
                    terms.push(Expr::mul(fs));
                }
                Expr::add(terms)
            }
            Node::Pow(a, k) => Expr::mul(vec![
                Expr::int(i64::from(*k)),
                Expr::pow(a.clone(), k - 1),
                a.diff(var),
            ]),
            Node::Unary(op, a) => {
                let da = a.diff(var);
                let outer = match op {
                    UnaryOp::Exp => self.clone(),
                    UnaryOp::Log => Expr::unary(UnaryOp::Inv, a.clone()),
                    UnaryOp::Sin => Expr::unary(UnaryOp::Cos, a.clone()),
                    UnaryOp::Cos => Expr::neg(Expr::unary(UnaryOp::Sin, a.clone())),
                    UnaryOp::Sinh => Expr::unary(UnaryOp::Cosh, a.clone()),
                    UnaryOp::Cosh => Expr::unary(UnaryOp::Sinh, a.clone()),
                    UnaryOp::Sqrt => Expr::mul(vec![
                        Expr::ratio(1, 2),
                        Expr::unary(UnaryOp::Inv, self.clone()),
                    ]),
                    UnaryOp::Inv => Expr::neg(Expr::pow(self.clone(), 2)),
                };
                Expr::mul(vec![outer, da])
            }
        }
    }

    /// Derivative with the node cap enforced on the result.
    pub fn diff_checked(&self, var: usize) -> Result<Expr> {
        let d = self.diff(var);
        if d.size() > NODE_CAP {
            return Err(Error::NodeCap {
                nodes: d.size(),
                cap: NODE_CAP,
            });
        }
        Ok(d)
    }

    /// Double-precision evaluation.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        let v = match &self.0.node {
            Node::Const(q) => q.to_f64().unwrap_or(f64::NAN),
            Node::Var(i) => *point.get(*i).ok_or(Error::DimensionMismatch {
                expected: i + 1,
                found: point.len(),
            })?,
            Node::Add(xs) => {
                let mut s = 0.0;
                for x in xs {
                    s += x.eval(point)?;
                }
                s
            }
            Node::Mul(xs) => {
                let mut p = 1.0;
                for x in xs {
                    p *= x.eval(point)?;
                }
                p
            }
            Node::Pow(a, k) => {
                let b = a.eval(point)?;
                if b == 0.0 && *k < 0 {
                    return Err(self.domain("pole: zero base with negative exponent"));
                }
                b.powi(*k)
            }
            Node::Unary(op, a) => {
                let x = a.eval(point)?;
                match op {
                    UnaryOp::Exp => x.exp(),
                    UnaryOp::Log => {
                        if x <= 0.0 {
                            return Err(self.domain(&format!("log of non-positive value {x}")));
                        }
                        x.ln()
                    }
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                    UnaryOp::Sinh => x.sinh(),
                    UnaryOp::Cosh => x.cosh(),
                    UnaryOp::Sqrt => {
                        if x < 0.0 {
                            return Err(self.domain(&format!("sqrt of negative value {x}")));
                        }
                        x.sqrt()
                    }
                    UnaryOp::Inv => {
                        if x == 0.0 {
                            return Err(self.domain("pole: division by zero"));
                        }
                        1.0 / x
                    }
                }
            }
        };
        if !v.is_finite() {
            return Err(self.domain("non-finite value"));
        }
        Ok(v)
    }

    /// Exact evaluation; `Ok(None)` when the tree contains transcendental nodes.
    pub fn eval_exact(&self, point: &[BigRational]) -> Result<Option<BigRational>> {
        Ok(Some(match &self.0.node {
            Node::Const(q) => q.clone(),
            Node::Var(i) => point
                .get(*i)
                .ok_or(Error::DimensionMismatch {
                    expected: i + 1,
                    found: point.len(),
                })?
                .clone(),
            Node::Add(xs) => {
                let mut s = BigRational::zero();
                for x in xs {
                    match x.eval_exact(point)? {
                        Some(v) => s += v,
                        None => return Ok(None),
                    }
                }
                s
            }
            Node::Mul(xs) => {
                let mut p = BigRational::one();
                for x in xs {
                    match x.eval_exact(point)? {
                        Some(v) => p *= v,
                        None => return Ok(None),
                    }
                }
                p
            }
            Node::Pow(a, k) => match a.eval_exact(point)? {
                Some(b) => {
                    if b.is_zero() && *k < 0 {
                        return Err(self.domain("pole: zero base with negative exponent"));
                    }
                    rational_powi(&b, *k)
                }
                None => return Ok(None),
            },
            Node::Unary(UnaryOp::Inv, a) => match a.eval_exact(point)? {
                Some(b) => {
                    if b.is_zero() {
                        return Err(self.domain("pole: division by zero"));
                    }
                    b.recip()
                }
                None => return Ok(None),
            },
            Node::Unary(..) => return Ok(None),
        }))
    }

    /// Evaluates the expression on jets of the coordinate functions.
    pub fn eval_jet(&self, vars: &[Jet]) -> Result<Jet> {
        let v = match &self.0.node {
            Node::Const(q) => {
                let space = vars.first().ok_or(Error::DimensionMismatch { expected: 1, found: 0 })?;
                Jet::constant(space.space(), q.to_f64().unwrap_or(f64::NAN), space.order())
            }
            Node::Var(i) => vars
                .get(*i)
                .ok_or(Error::DimensionMismatch {
                    expected: i + 1,
                    found: vars.len(),
                })?
                .clone(),
            Node::Add(xs) => {
                let mut s = xs[0].eval_jet(vars)?;
                for x in &xs[1..] {
                    s = &s + &x.eval_jet(vars)?;
                }
                s
            }
            Node::Mul(xs) => {
                let mut p = xs[0].eval_jet(vars)?;
                for x in &xs[1..] {
                    p = &p * &x.eval_jet(vars)?;
                }
                p
            }
            Node::Pow(a, k) => {
                let b = a.eval_jet(vars)?;
                if b.value() == 0.0 && *k < 0 {
                    return Err(self.domain("pole: zero base with negative exponent"));
                }
                b.powi(*k)
            }
            Node::Unary(op, a) => {
                let x = a.eval_jet(vars)?;
                let x0 = x.value();
                match op {
                    UnaryOp::Exp => x.exp(),
                    UnaryOp::Log => {
                        if x0 <= 0.0 {
                            return Err(self.domain(&format!("log of non-positive value {x0}")));
                        }
                        x.ln()
                    }
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                    UnaryOp::Sinh => x.sinh(),
                    UnaryOp::Cosh => x.cosh(),
                    UnaryOp::Sqrt => {
                        if x0 <= 0.0 {
                            return Err(self.domain(&format!("sqrt not smooth at value {x0}")));
                        }
                        x.sqrt()
                    }
                    UnaryOp::Inv => {
                        if x0 == 0.0 {
                            return Err(self.domain("pole: division by zero"));
                        }
                        x.recip()
                    }
                }
            }
        };
        if !v.value().is_finite() {
            return Err(self.domain("non-finite value"));
        }
        Ok(v)
    }

    fn domain(&self, reason: &str) -> Error {
        let mut text = self.to_string();
        if text.len() > 200 {
            text.truncate(200);
            text.push('…');
        }
        Error::Domain {
            expr: text,
            reason: reason.to_string(),
        }
    }

    /// Printer using the given coordinate names; output re-parses to an
    /// evaluation-identical tree.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names: Some(names) }
    }
}

fn rational_powi(q: &BigRational, k: i32) -> BigRational {
    let mut base = if k < 0 { q.recip() } else { q.clone() };
    let mut e = k.unsigned_abs();
    let mut acc = BigRational::one();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: Option<&'a [String]>,
}

impl ExprDisplay<'_> {
    fn write(&self, e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &e.0.node {
            Node::Const(q) => {
                if q.is_integer() && !q.is_negative() {
                    write!(f, "{}", q.numer())
                } else if q.is_integer() {
                    write!(f, "(-{})", q.numer().abs())
                } else if q.is_negative() {
                    write!(f, "(-{}/{})", q.numer().abs(), q.denom())
                } else {
                    write!(f, "({}/{})", q.numer(), q.denom())
                }
            }
            Node::Var(i) => match self.names.and_then(|n| n.get(*i)) {
                Some(name) => write!(f, "{name}"),
                None => write!(f, "x{i}"),
            },
            Node::Unary(UnaryOp::Inv, a) => {
                write!(f, "(1/")?;
                self.write(a, f)?;
                write!(f, ")")
            }
            Node::Unary(op, a) => {
                write!(f, "{}(", op.name())?;
                self.write(a, f)?;
                write!(f, ")")
            }
            Node::Add(xs) | Node::Mul(xs) => {
                let sep = if matches!(e.0.node, Node::Add(_)) { " + " } else { "*" };
                write!(f, "(")?;
                for (k, x) in xs.iter().enumerate() {
                    if k > 0 {
                        write!(f, "{sep}")?;
                    }
                    self.write(x, f)?;
                }
                write!(f, ")")
            }
            Node::Pow(a, k) => {
                match &a.0.node {
                    Node::Var(_) | Node::Add(_) | Node::Mul(_) => self.write(a, f)?,
                    _ => {
                        write!(f, "(")?;
                        self.write(a, f)?;
                        write!(f, ")")?;
                    }
                }
                write!(f, "^{k}")
            }
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, f)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        ExprDisplay { expr: self, names: None }.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding_trivial_identities() {
        let x = Expr::var(0);
        assert!(Expr::mul(vec![Expr::zero(), x.clone()]).is_zero());
        assert_eq!(Expr::mul(vec![Expr::one(), x.clone()]), x);
        assert!(Expr::pow(x.clone(), 0).is_one());
        assert_eq!(Expr::add(vec![x.clone(), Expr::zero()]), x);
    }

    #[test]
    fn diff_of_square_is_two_x() {
        let x = Expr::var(0);
        let d = Expr::pow(x.clone(), 2).diff(0);
        assert_eq!(d, Expr::mul(vec![Expr::int(2), x]));
    }

    #[test]
    fn fifth_derivative_of_u5() {
        let mut e = Expr::pow(Expr::var(0), 5);
        for _ in 0..5 {
            e = e.diff_checked(0).unwrap();
        }
        assert_eq!(e.as_const().unwrap(), &BigRational::from_integer(120.into()));
    }

    #[test]
    fn inverse_pole_is_domain_error() {
        let e = Expr::unary(UnaryOp::Inv, Expr::var(0));
        assert!(matches!(e.eval(&[0.0]), Err(Error::Domain { .. })));
        assert!(matches!(
            e.eval_exact(&[BigRational::zero()]),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn log_of_negative_names_subtree() {
        let e = Expr::unary(UnaryOp::Log, Expr::var(0));
        match e.eval(&[-1.0]) {
            Err(Error::Domain { expr, .. }) => assert!(expr.contains("log")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn exact_path_skips_transcendentals() {
        let e = Expr::unary(UnaryOp::Sin, Expr::var(0));
        assert_eq!(e.eval_exact(&[BigRational::one()]).unwrap(), None);
    }
}
