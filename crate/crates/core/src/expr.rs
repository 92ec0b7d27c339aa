//! Closed-form scalar expressions over spacetime coordinates.
//!
//! Every [`Expr`] is kept in a canonical sum-of-products shape by its smart
//! constructors: sums and products are flattened and sorted, like terms and
//! like factors are merged, constants are folded and products are expanded
//! over sums while the expansion stays small. The normal form is best-effort;
//! two expressions that print differently may still be equal as functions.
//! Equality of fields is therefore decided numerically at sample points
//! (see [`Expr::agrees_with`]), never by comparing trees.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Upper bound on the number of terms produced by distributing a product
/// over sums. Larger products are kept factored.
const EXPANSION_CAP: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Sqrt => v.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of negative value {0}")]
    NegativeSqrt(f64),
    #[error("variable index {index} out of range for a point of dimension {dim}")]
    MissingVariable { index: usize, dim: usize },
    #[error("non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone)]
pub enum Expr {
    Const(f64),
    Var(usize),
    /// At least two operands; at most one constant, which comes first.
    Sum(Arc<[Expr]>),
    /// At least two operands; at most one constant, which comes first.
    Product(Arc<[Expr]>),
    /// Exponent is never 0 or 1.
    Pow(Arc<Expr>, i32),
    Func(Func, Arc<Expr>),
}

impl Default for Expr {
    fn default() -> Self {
        Expr::Const(0.0)
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::Const(v)
    }
}

fn rank(e: &Expr) -> u8 {
    match e {
        Expr::Const(_) => 0,
        Expr::Var(_) => 1,
        Expr::Func(..) => 2,
        Expr::Pow(..) => 3,
        Expr::Product(_) => 4,
        Expr::Sum(_) => 5,
    }
}

fn cmp_slices(a: &[Expr], b: &[Expr]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.structural_cmp(y);
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

/// Splits a term into its numeric coefficient and the remaining factor.
fn split_coef(e: &Expr) -> (f64, Option<Expr>) {
    match e {
        Expr::Const(c) => (*c, None),
        Expr::Product(fs) => match &fs[0] {
            Expr::Const(c) => {
                let rest = &fs[1..];
                let rest = if rest.len() == 1 {
                    rest[0].clone()
                } else {
                    Expr::Product(rest.to_vec().into())
                };
                (*c, Some(rest))
            }
            _ => (1.0, Some(e.clone())),
        },
        _ => (1.0, Some(e.clone())),
    }
}

fn split_pow(e: &Expr) -> (Expr, i32) {
    match e {
        Expr::Pow(b, n) => ((**b).clone(), *n),
        _ => (e.clone(), 1),
    }
}

fn pow_raw(base: Expr, n: i32) -> Expr {
    match n {
        0 => Expr::Const(1.0),
        1 => base,
        _ => Expr::Pow(Arc::new(base), n),
    }
}

fn scale_raw(c: f64, rest: Expr) -> Expr {
    if c == 1.0 {
        return rest;
    }
    match rest {
        Expr::Product(fs) => {
            let mut v = Vec::with_capacity(fs.len() + 1);
            v.push(Expr::Const(c));
            v.extend(fs.iter().cloned());
            Expr::Product(v.into())
        }
        other => Expr::Product(vec![Expr::Const(c), other].into()),
    }
}

fn sum_len(e: &Expr) -> usize {
    match e {
        Expr::Sum(ts) => ts.len(),
        _ => 1,
    }
}

fn sum_terms(e: &Expr) -> Vec<Expr> {
    match e {
        Expr::Sum(ts) => ts.to_vec(),
        other => vec![other.clone()],
    }
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(index: usize) -> Expr {
        Expr::Var(index)
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Total order on trees, used only to canonicalize operand order.
    pub fn structural_cmp(&self, other: &Expr) -> Ordering {
        let r = rank(self).cmp(&rank(other));
        if r != Ordering::Equal {
            return r;
        }
        match (self, other) {
            (Expr::Const(a), Expr::Const(b)) => a.total_cmp(b),
            (Expr::Var(a), Expr::Var(b)) => a.cmp(b),
            (Expr::Func(f, a), Expr::Func(g, b)) => f.cmp(g).then_with(|| a.structural_cmp(b)),
            (Expr::Pow(a, n), Expr::Pow(b, m)) => a.structural_cmp(b).then_with(|| n.cmp(m)),
            (Expr::Product(a), Expr::Product(b)) | (Expr::Sum(a), Expr::Sum(b)) => cmp_slices(a, b),
            _ => unreachable!("ranks are equal"),
        }
    }

    pub fn structurally_equal(&self, other: &Expr) -> bool {
        self.structural_cmp(other) == Ordering::Equal
    }

    pub fn add(&self, other: &Expr) -> Expr {
        Expr::sum_of([self.clone(), other.clone()])
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Expr {
        self.scale(-1.0)
    }

    pub fn scale(&self, c: f64) -> Expr {
        Expr::Const(c).mul(self)
    }

    pub fn div(&self, other: &Expr) -> Expr {
        self.mul(&other.powi(-1))
    }

    /// Canonical n-ary sum.
    pub fn sum_of<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        let mut constant = 0.0;
        let mut terms: Vec<(Expr, f64)> = Vec::new();
        for item in items {
            for t in sum_terms(&item) {
                match split_coef(&t) {
                    (c, None) => constant += c,
                    (c, Some(rest)) => terms.push((rest, c)),
                }
            }
        }
        terms.sort_by(|a, b| a.0.structural_cmp(&b.0));
        let mut merged: Vec<(Expr, f64)> = Vec::with_capacity(terms.len());
        for (rest, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0.structurally_equal(&rest) => last.1 += c,
                _ => merged.push((rest, c)),
            }
        }
        let mut out: Vec<Expr> = Vec::with_capacity(merged.len() + 1);
        if constant != 0.0 {
            out.push(Expr::Const(constant));
        }
        out.extend(
            merged
                .into_iter()
                .filter(|(_, c)| *c != 0.0)
                .map(|(rest, c)| scale_raw(c, rest)),
        );
        match out.len() {
            0 => Expr::Const(0.0),
            1 => out.pop().unwrap(),
            _ => Expr::Sum(out.into()),
        }
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        Expr::product_of([self.clone(), other.clone()])
    }

    /// Canonical n-ary product; distributes over sums while the result stays
    /// below the expansion cap.
    pub fn product_of<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        let items: Vec<Expr> = items.into_iter().collect();
        if items.iter().any(Expr::is_zero) {
            return Expr::Const(0.0);
        }
        let expanded_len = items
            .iter()
            .map(sum_len)
            .fold(1usize, |a, b| a.saturating_mul(b));
        if items.iter().any(|e| matches!(e, Expr::Sum(_))) && expanded_len <= EXPANSION_CAP {
            let mut acc: Vec<Expr> = vec![Expr::Const(1.0)];
            for item in &items {
                let terms = sum_terms(item);
                let mut next = Vec::with_capacity(acc.len() * terms.len());
                for a in &acc {
                    for t in &terms {
                        next.push(Expr::product_flat(&[a.clone(), t.clone()]));
                    }
                }
                acc = next;
            }
            return Expr::sum_of(acc);
        }
        Expr::product_flat(&items)
    }

    /// Product without distribution over sums.
    fn product_flat(items: &[Expr]) -> Expr {
        let mut coef = 1.0;
        let mut factors: Vec<(Expr, i32)> = Vec::new();
        let push = |e: &Expr, coef: &mut f64, factors: &mut Vec<(Expr, i32)>| match e {
            Expr::Const(c) => *coef *= c,
            other => factors.push(split_pow(other)),
        };
        for item in items {
            match item {
                Expr::Product(fs) => {
                    for f in fs.iter() {
                        push(f, &mut coef, &mut factors);
                    }
                }
                other => push(other, &mut coef, &mut factors),
            }
        }
        if coef == 0.0 {
            return Expr::Const(0.0);
        }
        factors.sort_by(|a, b| a.0.structural_cmp(&b.0));
        let mut merged: Vec<(Expr, i32)> = Vec::with_capacity(factors.len());
        for (base, n) in factors {
            match merged.last_mut() {
                Some(last) if last.0.structurally_equal(&base) => last.1 += n,
                _ => merged.push((base, n)),
            }
        }
        let mut out: Vec<Expr> = Vec::with_capacity(merged.len() + 1);
        let mut rest: Vec<Expr> = Vec::new();
        for (base, n) in merged {
            match n {
                0 => {}
                1 => out.push(base),
                _ => match base.powi(n) {
                    Expr::Const(c) => coef *= c,
                    p @ Expr::Pow(..) => out.push(p),
                    // an expanded power of a sum
                    other => rest.push(other),
                },
            }
        }
        if !rest.is_empty() {
            rest.extend(out);
            rest.push(Expr::Const(coef));
            return Expr::product_of(rest);
        }
        if coef == 0.0 {
            return Expr::Const(0.0);
        }
        out.sort_by(|a, b| split_pow(a).0.structural_cmp(&split_pow(b).0));
        match (out.len(), coef == 1.0) {
            (0, _) => Expr::Const(coef),
            (1, true) => out.pop().unwrap(),
            (_, true) => Expr::Product(out.into()),
            (_, false) => {
                out.insert(0, Expr::Const(coef));
                Expr::Product(out.into())
            }
        }
    }

    pub fn powi(&self, n: i32) -> Expr {
        match (self, n) {
            (_, 0) => Expr::Const(1.0),
            (_, 1) => self.clone(),
            (Expr::Const(c), _) => {
                let v = c.powi(n);
                if v.is_finite() {
                    Expr::Const(v)
                } else {
                    pow_raw(self.clone(), n)
                }
            }
            (Expr::Pow(b, m), _) => b.powi(m.saturating_mul(n)),
            (Expr::Product(fs), _) => {
                Expr::product_flat(&fs.iter().map(|f| f.powi(n)).collect::<Vec<_>>())
            }
            (Expr::Sum(ts), _) if n > 1 && ts.len().saturating_pow(n as u32) <= EXPANSION_CAP => {
                Expr::product_of(std::iter::repeat_n(self.clone(), n as usize))
            }
            _ => pow_raw(self.clone(), n),
        }
    }

    pub fn apply(f: Func, arg: &Expr) -> Expr {
        if let Expr::Const(c) = arg {
            let v = f.apply(*c);
            if v.is_finite() {
                return Expr::Const(v);
            }
        }
        Expr::Func(f, Arc::new(arg.clone()))
    }

    pub fn sin(&self) -> Expr {
        Expr::apply(Func::Sin, self)
    }

    pub fn cos(&self) -> Expr {
        Expr::apply(Func::Cos, self)
    }

    pub fn exp(&self) -> Expr {
        Expr::apply(Func::Exp, self)
    }

    pub fn sqrt(&self) -> Expr {
        Expr::apply(Func::Sqrt, self)
    }

    /// Exact partial derivative with respect to variable `v`.
    pub fn diff(&self, v: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(i) => Expr::Const(if *i == v { 1.0 } else { 0.0 }),
            Expr::Sum(ts) => Expr::sum_of(ts.iter().map(|t| t.diff(v))),
            Expr::Product(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for k in 0..fs.len() {
                    let dk = fs[k].diff(v);
                    if dk.is_zero() {
                        continue;
                    }
                    let mut factors: Vec<Expr> = fs
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != k)
                        .map(|(_, f)| f.clone())
                        .collect();
                    factors.push(dk);
                    terms.push(Expr::product_of(factors));
                }
                Expr::sum_of(terms)
            }
            Expr::Pow(b, n) => {
                let db = b.diff(v);
                if db.is_zero() {
                    return Expr::zero();
                }
                Expr::product_of([Expr::Const(*n as f64), b.powi(n - 1), db])
            }
            Expr::Func(f, a) => {
                let da = a.diff(v);
                if da.is_zero() {
                    return Expr::zero();
                }
                let outer = match f {
                    Func::Sin => a.cos(),
                    Func::Cos => a.sin().neg(),
                    Func::Exp => self.clone(),
                    Func::Sqrt => self.powi(-1).scale(0.5),
                };
                outer.mul(&da)
            }
        }
    }

    /// Symbolic gradient over the first `dim` variables.
    pub fn gradient(&self, dim: usize) -> Vec<Expr> {
        (0..dim).map(|i| self.diff(i)).collect()
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => *point.get(*i).ok_or(EvalError::MissingVariable {
                index: *i,
                dim: point.len(),
            })?,
            Expr::Sum(ts) => {
                let mut acc = 0.0;
                for t in ts.iter() {
                    acc += t.eval(point)?;
                }
                acc
            }
            Expr::Product(fs) => {
                let mut acc = 1.0;
                for f in fs.iter() {
                    acc *= f.eval(point)?;
                }
                acc
            }
            Expr::Pow(b, n) => {
                let base = b.eval(point)?;
                if *n < 0 && base == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                base.powi(*n)
            }
            Expr::Func(f, a) => {
                let arg = a.eval(point)?;
                if *f == Func::Sqrt && arg < 0.0 {
                    return Err(EvalError::NegativeSqrt(arg));
                }
                f.apply(arg)
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Replaces `Var(i)` by `values[i]`; variables beyond `values` are kept.
    pub fn substitute(&self, values: &[Expr]) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(i) => values.get(*i).cloned().unwrap_or_else(|| self.clone()),
            Expr::Sum(ts) => Expr::sum_of(ts.iter().map(|t| t.substitute(values))),
            Expr::Product(fs) => Expr::product_of(fs.iter().map(|f| f.substitute(values))),
            Expr::Pow(b, n) => b.substitute(values).powi(*n),
            Expr::Func(f, a) => Expr::apply(*f, &a.substitute(values)),
        }
    }

    pub fn depends_on(&self, v: usize) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(i) => *i == v,
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().any(|x| x.depends_on(v)),
            Expr::Pow(b, _) => b.depends_on(v),
            Expr::Func(_, a) => a.depends_on(v),
        }
    }

    /// One past the highest variable index used.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().map(Expr::arity).max().unwrap_or(0),
            Expr::Pow(b, _) => b.arity(),
            Expr::Func(_, a) => a.arity(),
        }
    }

    /// Numeric agreement at the given sample points. Points where either side
    /// fails to evaluate count as disagreement.
    pub fn agrees_with(&self, other: &Expr, points: &[[f64; 4]], tol: f64) -> bool {
        points.iter().all(|p| match (self.eval(p), other.eval(p)) {
            (Ok(a), Ok(b)) => (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs())),
            _ => false,
        })
    }
}

pub fn var_name(i: usize) -> String {
    match i {
        0 => "t".into(),
        1 => "x".into(),
        2 => "y".into(),
        3 => "z".into(),
        _ => format!("x{i}"),
    }
}

fn fmt_const(c: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c < 0.0 {
        write!(f, "({c:?})")
    } else {
        write!(f, "{c:?}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => fmt_const(*c, f),
            Expr::Var(i) => write!(f, "{}", var_name(*i)),
            Expr::Sum(ts) => {
                write!(f, "(")?;
                for (k, t) in ts.iter().enumerate() {
                    if k > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            Expr::Product(fs) => {
                for (k, x) in fs.iter().enumerate() {
                    if k > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            Expr::Pow(b, n) => match **b {
                Expr::Var(_) | Expr::Sum(_) | Expr::Func(..) => write!(f, "{b}^({n})"),
                _ => write!(f, "({b})^({n})"),
            },
            Expr::Func(func, a) => match **a {
                Expr::Sum(_) => write!(f, "{}{a}", func.name()),
                _ => write!(f, "{}({a})", func.name()),
            },
        }
    }
}
