//! Expression trees over constants, input variables and a small operator
//! set, with the complexity measure used to rank candidate formulas.

mod parse;

use std::fmt;

pub use parse::{parse, Parser};

use crate::error::{Error, Result};

/// Denominators smaller than this in magnitude are a domain fault.
pub const DIVISION_GUARD: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 4] = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div];

    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::Div => 2,
        }
    }

    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => {
                if b.abs() < DIVISION_GUARD {
                    f64::NAN
                } else {
                    a / b
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryOp {
    Cos,
    Sin,
    Tan,
}

impl UnaryOp {
    pub const ALL: [UnaryOp; 3] = [UnaryOp::Cos, UnaryOp::Sin, UnaryOp::Tan];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Cos => "cos",
            UnaryOp::Sin => "sin",
            UnaryOp::Tan => "tan",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|op| op.name() == name)
    }

    #[inline]
    pub fn apply(self, a: f64) -> f64 {
        match self {
            UnaryOp::Cos => a.cos(),
            UnaryOp::Sin => a.sin(),
            UnaryOp::Tan => a.tan(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

/// Result of evaluating at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaluation {
    Value(f64),
    /// A division by (almost) zero somewhere in the tree.
    DomainFault,
}

impl Evaluation {
    /// The value, or NaN for a domain fault.
    pub fn value(self) -> f64 {
        match self {
            Evaluation::Value(v) => v,
            Evaluation::DomainFault => f64::NAN,
        }
    }

    pub fn is_fault(self) -> bool {
        matches!(self, Evaluation::DomainFault)
    }
}

/// Complexity cost per node kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeRule {
    pub constant: usize,
    pub variable: usize,
    pub add: usize,
    pub sub: usize,
    pub mul: usize,
    pub div: usize,
    pub function: usize,
}

impl Default for SizeRule {
    fn default() -> Self {
        Self {
            constant: 1,
            variable: 1,
            add: 1,
            sub: 1,
            mul: 1,
            div: 2,
            function: 4,
        }
    }
}

impl SizeRule {
    fn binary(&self, op: BinaryOp) -> usize {
        match op {
            BinaryOp::Add => self.add,
            BinaryOp::Sub => self.sub,
            BinaryOp::Mul => self.mul,
            BinaryOp::Div => self.div,
        }
    }
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn var(index: usize) -> Self {
        Expr::Var(index)
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Self {
        Expr::Unary(op, Box::new(a))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Self {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        Self::binary(BinaryOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Self {
        Self::binary(BinaryOp::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Self {
        Self::binary(BinaryOp::Mul, a, b)
    }

    pub fn div(a: Expr, b: Expr) -> Self {
        Self::binary(BinaryOp::Div, a, b)
    }

    pub fn cos(a: Expr) -> Self {
        Self::unary(UnaryOp::Cos, a)
    }

    /// Evaluates with one binding per variable index.
    pub fn evaluate(&self, bindings: &[f64]) -> Result<Evaluation> {
        if let Some(max) = self.max_variable() {
            if max >= bindings.len() {
                return Err(Error::UnboundVariable {
                    index: max,
                    arity: bindings.len(),
                });
            }
        }
        Ok(match self.eval_raw(bindings) {
            Some(v) => Evaluation::Value(v),
            None => Evaluation::DomainFault,
        })
    }

    /// Unchecked evaluation: `None` on a domain fault. Panics on an unbound
    /// variable.
    pub(crate) fn eval_raw(&self, b: &[f64]) -> Option<f64> {
        Some(match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => b[*i],
            Expr::Unary(op, a) => op.apply(a.eval_raw(b)?),
            Expr::Binary(op, l, r) => {
                let lv = l.eval_raw(b)?;
                let rv = r.eval_raw(b)?;
                if *op == BinaryOp::Div && rv.abs() < DIVISION_GUARD {
                    return None;
                }
                op.apply(lv, rv)
            }
        })
    }

    /// Column-wise evaluation over a dataset: `columns[k][i]` is variable
    /// `k` at row `i`. Returns `None` if any row hits a domain fault.
    pub fn eval_columns(&self, columns: &[Vec<f64>], rows: usize) -> Option<Vec<f64>> {
        match self {
            Expr::Const(c) => Some(vec![*c; rows]),
            Expr::Var(i) => Some(columns[*i][..rows].to_vec()),
            Expr::Unary(op, a) => {
                let mut v = a.eval_columns(columns, rows)?;
                match op {
                    UnaryOp::Cos => v.iter_mut().for_each(|x| *x = x.cos()),
                    UnaryOp::Sin => v.iter_mut().for_each(|x| *x = x.sin()),
                    UnaryOp::Tan => v.iter_mut().for_each(|x| *x = x.tan()),
                }
                Some(v)
            }
            Expr::Binary(op, l, r) => {
                // Fold constant operands in without materialising a column.
                if let Expr::Const(c) = **r {
                    let mut v = l.eval_columns(columns, rows)?;
                    match op {
                        BinaryOp::Add => v.iter_mut().for_each(|x| *x += c),
                        BinaryOp::Sub => v.iter_mut().for_each(|x| *x -= c),
                        BinaryOp::Mul => v.iter_mut().for_each(|x| *x *= c),
                        BinaryOp::Div => {
                            if c.abs() < DIVISION_GUARD {
                                return None;
                            }
                            v.iter_mut().for_each(|x| *x /= c)
                        }
                    }
                    return Some(v);
                }
                let mut v = l.eval_columns(columns, rows)?;
                let w = r.eval_columns(columns, rows)?;
                match op {
                    BinaryOp::Add => v.iter_mut().zip(&w).for_each(|(x, y)| *x += y),
                    BinaryOp::Sub => v.iter_mut().zip(&w).for_each(|(x, y)| *x -= y),
                    BinaryOp::Mul => v.iter_mut().zip(&w).for_each(|(x, y)| *x *= y),
                    BinaryOp::Div => {
                        if w.iter().any(|y| y.abs() < DIVISION_GUARD) {
                            return None;
                        }
                        v.iter_mut().zip(&w).for_each(|(x, y)| *x /= y)
                    }
                }
                Some(v)
            }
        }
    }

    pub fn size(&self) -> usize {
        self.size_with(&SizeRule::default())
    }

    pub fn size_with(&self, rule: &SizeRule) -> usize {
        match self {
            Expr::Const(_) => rule.constant,
            Expr::Var(_) => rule.variable,
            Expr::Unary(_, a) => rule.function + a.size_with(rule),
            Expr::Binary(op, l, r) => rule.binary(*op) + l.size_with(rule) + r.size_with(rule),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.node_count(),
            Expr::Binary(_, l, r) => 1 + l.node_count() + r.node_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 0,
            Expr::Unary(_, a) => 1 + a.depth(),
            Expr::Binary(_, l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    pub fn max_variable(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Unary(_, a) => a.max_variable(),
            Expr::Binary(_, l, r) => l.max_variable().max(r.max_variable()),
        }
    }

    pub fn has_variable(&self) -> bool {
        self.max_variable().is_some()
    }

    /// Constants in pre-order.
    pub fn constants(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Const(c) = e {
                out.push(*c);
            }
        });
        out
    }

    /// Overwrites constants in pre-order; `values` must have one entry per
    /// constant.
    pub fn set_constants(&mut self, values: &[f64]) {
        let mut it = values.iter();
        self.visit_mut(&mut |e| {
            if let Expr::Const(c) = e {
                *c = *it.next().expect("one value per constant");
            }
        });
    }

    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Unary(_, a) => a.visit(f),
            Expr::Binary(_, l, r) => {
                l.visit(f);
                r.visit(f);
            }
        }
    }

    pub fn visit_mut(&mut self, f: &mut impl FnMut(&mut Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Unary(_, a) => a.visit_mut(f),
            Expr::Binary(_, l, r) => {
                l.visit_mut(f);
                r.visit_mut(f);
            }
        }
    }

    /// The `index`-th node in pre-order.
    pub fn node_mut(&mut self, index: usize) -> Option<&mut Expr> {
        fn go<'a>(e: &'a mut Expr, k: &mut usize) -> Option<&'a mut Expr> {
            if *k == 0 {
                return Some(e);
            }
            *k -= 1;
            match e {
                Expr::Const(_) | Expr::Var(_) => None,
                Expr::Unary(_, a) => go(a, k),
                Expr::Binary(_, l, r) => {
                    let left = l.node_count();
                    if *k < left {
                        go(l, k)
                    } else {
                        *k -= left;
                        go(r, k)
                    }
                }
            }
        }
        let mut k = index;
        go(self, &mut k)
    }

    pub fn node(&self, index: usize) -> Option<&Expr> {
        fn go<'a>(e: &'a Expr, k: &mut usize) -> Option<&'a Expr> {
            if *k == 0 {
                return Some(e);
            }
            *k -= 1;
            match e {
                Expr::Const(_) | Expr::Var(_) => None,
                Expr::Unary(_, a) => go(a, k),
                Expr::Binary(_, l, r) => {
                    let left = l.node_count();
                    if *k < left {
                        go(l, k)
                    } else {
                        *k -= left;
                        go(r, k)
                    }
                }
            }
        }
        let mut k = index;
        go(self, &mut k)
    }

    /// Replaces every variable-free subtree by its value. Subtrees whose
    /// value is not finite are left alone.
    pub fn fold_constants(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(op, a) => {
                let a = a.fold_constants();
                if let Expr::Const(c) = a {
                    let v = op.apply(c);
                    if v.is_finite() {
                        return Expr::Const(v);
                    }
                }
                Expr::unary(*op, a)
            }
            Expr::Binary(op, l, r) => {
                let l = l.fold_constants();
                let r = r.fold_constants();
                if let (Expr::Const(a), Expr::Const(b)) = (&l, &r) {
                    let v = op.apply(*a, *b);
                    if v.is_finite() {
                        return Expr::Const(v);
                    }
                }
                Expr::binary(*op, l, r)
            }
        }
    }

    /// Infix rendering with caller-supplied variable names.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> Named<'a> {
        Named { expr: self, names }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            _ => 3,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, names: &[String]) -> fmt::Result {
        match self {
            Expr::Const(c) => f.write_str(&format_constant(*c)),
            Expr::Var(i) => match names.get(*i) {
                Some(n) => f.write_str(n),
                None => write!(f, "x{i}"),
            },
            Expr::Unary(op, a) => {
                write!(f, "{}(", op.name())?;
                a.write(f, names)?;
                f.write_str(")")
            }
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                let lp = l.precedence() < p;
                // The parser is left-associative, so an equal-precedence
                // right operand needs parentheses to keep its shape.
                let rp = r.precedence() <= p;
                wrap(f, lp, |f| l.write(f, names))?;
                write!(f, " {} ", op.symbol())?;
                wrap(f, rp, |f| r.write(f, names))
            }
        }
    }
}

fn wrap(
    f: &mut fmt::Formatter<'_>,
    parens: bool,
    inner: impl FnOnce(&mut fmt::Formatter<'_>) -> fmt::Result,
) -> fmt::Result {
    if parens {
        f.write_str("(")?;
        inner(f)?;
        f.write_str(")")
    } else {
        inner(f)
    }
}

/// Shortest decimal text that parses back to exactly `c`.
pub fn format_constant(c: f64) -> String {
    let a = c.abs();
    if c == 0.0 || (1e-4..1e16).contains(&a) || !c.is_finite() {
        format!("{c}")
    } else {
        format!("{c:e}")
    }
}

/// Canonical form: variables print as `x0`, `x1`, ...
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, &[])
    }
}

pub struct Named<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl fmt::Display for Named<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.write(f, self.names)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::var(0)
    }

    #[test]
    fn evaluates_first_law_at_perihelion() {
        let e = parse("1.51977/(1.00625 + 0.0932972*cos(x + 0.544536))").unwrap();
        let r = e.evaluate(&[-0.544536]).unwrap().value();
        assert!((r - 1.51977 / 1.0995472).abs() < 1e-12);
        assert!((r - 1.38218).abs() < 1e-5);
    }

    #[test]
    fn constants_and_faults() {
        assert_eq!(Expr::constant(2.5).evaluate(&[7.0]).unwrap(), Evaluation::Value(2.5));
        assert_eq!(Expr::constant(2.5).evaluate(&[]).unwrap(), Evaluation::Value(2.5));
        let div = Expr::div(Expr::constant(1.0), Expr::constant(0.0));
        assert!(div.evaluate(&[]).unwrap().is_fault());
        assert!(div.evaluate(&[]).unwrap().value().is_nan());
        assert!(matches!(
            Expr::var(2).evaluate(&[1.0]),
            Err(Error::UnboundVariable { index: 2, arity: 1 })
        ));
    }

    #[test]
    fn column_evaluation_matches_pointwise() {
        let e = parse("1.5/(1 + 0.09*cos(x0 + 0.5)) - x1*2 + (x0 - 3)").unwrap();
        let cols = vec![vec![0.1, 1.0, 2.0, -4.0], vec![3.0, 0.5, -1.0, 2.0]];
        let batch = e.eval_columns(&cols, 4).unwrap();
        for i in 0..4 {
            let p = e.evaluate(&[cols[0][i], cols[1][i]]).unwrap().value();
            assert_eq!(batch[i].to_bits(), p.to_bits());
        }
        let fault = parse("1/(x0 - 1)").unwrap();
        assert!(fault.eval_columns(&cols, 4).is_none());
    }

    #[test]
    fn sizes() {
        assert_eq!(parse("1.54329+0.0130577*x").unwrap().size(), 5);
        assert_eq!(parse("1.45537+0.021878*x*x").unwrap().size(), 7);
        assert_eq!(x().size(), 1);
        assert_eq!(parse("cos(x)").unwrap().size(), 5);
        assert_eq!(Expr::constant(3.0).size(), 1);
        assert_eq!(parse("1/x").unwrap().size(), 4);
    }

    #[test]
    fn folding() {
        let e = Expr::add(Expr::constant(1.0), Expr::constant(2.0));
        assert_eq!(e.fold_constants(), Expr::constant(3.0));
        let e = Expr::mul(x(), Expr::constant(1.0));
        assert_eq!(e.fold_constants(), e);
        assert_eq!(Expr::cos(Expr::constant(0.0)).fold_constants(), Expr::constant(1.0));
        let fault = Expr::div(Expr::constant(1.0), Expr::constant(0.0));
        assert_eq!(fault.fold_constants(), fault);
        let nested = parse("x*(2*3 + cos(0)) - (4/2)").unwrap();
        let folded = nested.fold_constants();
        assert_eq!(folded, parse("x*7 - 2").unwrap());
        assert!(folded.size() < nested.size());
    }

    #[test]
    fn node_access_in_preorder() {
        let mut e = parse("(x0 + 2) * cos(x1)").unwrap();
        assert_eq!(e.node_count(), 6);
        assert_eq!(e.node(1), Some(&parse("x0 + 2").unwrap()));
        assert_eq!(e.node(3), Some(&Expr::constant(2.0)));
        assert_eq!(e.node(5), Some(&Expr::var(1)));
        assert_eq!(e.node(6), None);
        *e.node_mut(3).unwrap() = Expr::constant(5.0);
        assert_eq!(e, parse("(x0 + 5) * cos(x1)").unwrap());
        assert_eq!(e.constants(), vec![5.0]);
        e.set_constants(&[-1.5]);
        assert_eq!(e.to_string(), "(x0 + -1.5) * cos(x1)");
    }

    #[test]
    fn printing() {
        let e = Parser::with_variables(&["a", "b", "c", "d", "e", "f"])
            .parse("a - (b - c) - d/(e*f)")
            .unwrap();
        assert_eq!(e.to_string(), "x0 - (x1 - x2) - x3 / (x4 * x5)");
        assert_eq!(format_constant(2.98491e-4), "0.000298491");
        assert_eq!(format_constant(-2.65592e-5), "-2.65592e-5");
        assert_eq!(format_constant(-2147483648.0), "-2147483648");
    }
}
