use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::interval::{Interval, Time};

/// Comparison operator of a linear constraint atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cmp {
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
}

impl Cmp {
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Lt => lhs < rhs,
            Cmp::Eq => lhs == rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
            Cmp::Le => "<=",
            Cmp::Lt => "<",
            Cmp::Eq => "==",
        }
    }
}

/// One `coef * sum(key:name)` term. The aggregate reads state variable `key_name`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SumTerm {
    pub coef: i64,
    pub key: String,
    pub name: String,
}

impl SumTerm {
    pub fn variable(&self) -> String {
        format!("{}_{}", self.key, self.name)
    }
}

/// `terms + constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinExpr {
    pub terms: Vec<SumTerm>,
    pub constant: i64,
}

impl LinExpr {
    pub fn sum(key: &str, name: &str) -> Self {
        LinExpr {
            terms: vec![SumTerm { coef: 1, key: key.into(), name: name.into() }],
            constant: 0,
        }
    }

    pub fn plus(mut self, k: i64) -> Self {
        self.constant += k;
        self
    }
}

/// `lhs cmp rhs` over integer state variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearConstraint {
    pub lhs: LinExpr,
    pub cmp: Cmp,
    pub rhs: LinExpr,
}

impl LinearConstraint {
    pub fn variables(&self) -> BTreeSet<String> {
        self.lhs.terms.iter().chain(&self.rhs.terms).map(SumTerm::variable).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Prop(String),
    Linear(LinearConstraint),
}

/// MTL abstract syntax tree. Children are shared so residual formulas produced by
/// progression reuse the subtrees of their input.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Implies(Arc<Formula>, Arc<Formula>),
    Until(Arc<Formula>, Interval, Arc<Formula>),
    Eventually(Interval, Arc<Formula>),
    Globally(Interval, Arc<Formula>),
}

/// Two-valued verdict of finite MTL.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    Top,
    Bottom,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Top
        } else {
            Verdict::Bottom
        }
    }

    pub fn holds(self) -> bool {
        self == Verdict::Top
    }

    pub fn negate(self) -> Self {
        Self::from_bool(!self.holds())
    }

    pub fn as_formula(self) -> Formula {
        match self {
            Verdict::Top => Formula::True,
            Verdict::Bottom => Formula::False,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.holds() { "true" } else { "false" })
    }
}

impl Formula {
    // Plain constructors, no folding.

    pub fn prop(name: impl Into<String>) -> Self {
        Formula::Atom(Atom::Prop(name.into()))
    }

    pub fn linear(c: LinearConstraint) -> Self {
        Formula::Atom(Atom::Linear(c))
    }

    pub fn not_(f: Formula) -> Self {
        Formula::Not(Arc::new(f))
    }

    pub fn or_(a: Formula, b: Formula) -> Self {
        Formula::Or(Arc::new(a), Arc::new(b))
    }

    pub fn and_(a: Formula, b: Formula) -> Self {
        Formula::And(Arc::new(a), Arc::new(b))
    }

    pub fn implies_(a: Formula, b: Formula) -> Self {
        Formula::Implies(Arc::new(a), Arc::new(b))
    }

    pub fn until_(a: Formula, i: Interval, b: Formula) -> Self {
        Formula::Until(Arc::new(a), i, Arc::new(b))
    }

    pub fn eventually_(i: Interval, f: Formula) -> Self {
        Formula::Eventually(i, Arc::new(f))
    }

    pub fn globally_(i: Interval, f: Formula) -> Self {
        Formula::Globally(i, Arc::new(f))
    }

    pub fn constant(b: bool) -> Self {
        if b {
            Formula::True
        } else {
            Formula::False
        }
    }

    pub fn as_constant(&self) -> Option<bool> {
        match self {
            Formula::True => Some(true),
            Formula::False => Some(false),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    // Folding constructors; every result is in simplified form when the inputs are.

    pub fn not(f: Formula) -> Self {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(inner) => Arc::unwrap_or_clone(inner),
            other => Formula::not_(other),
        }
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        match (a.as_constant(), b.as_constant()) {
            (Some(true), _) | (_, Some(true)) => Formula::True,
            (Some(false), _) => b,
            (_, Some(false)) => a,
            _ if a == b => a,
            _ => Formula::or_(a, b),
        }
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        match (a.as_constant(), b.as_constant()) {
            (Some(false), _) | (_, Some(false)) => Formula::False,
            (Some(true), _) => b,
            (_, Some(true)) => a,
            _ if a == b => a,
            _ => Formula::and_(a, b),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        match (a.as_constant(), b.as_constant()) {
            (Some(false), _) | (_, Some(true)) => Formula::True,
            (Some(true), _) => b,
            (_, Some(false)) => Formula::not(a),
            _ => Formula::implies_(a, b),
        }
    }

    pub fn until(a: Formula, i: Interval, b: Formula) -> Self {
        if i.is_empty() || b == Formula::False {
            Formula::False
        } else {
            Formula::until_(a, i, b)
        }
    }

    pub fn eventually(i: Interval, f: Formula) -> Self {
        if i.is_empty() || f == Formula::False {
            Formula::False
        } else {
            Formula::eventually_(i, f)
        }
    }

    pub fn globally(i: Interval, f: Formula) -> Self {
        if i.is_empty() || f == Formula::True {
            Formula::True
        } else {
            Formula::globally_(i, f)
        }
    }

    pub fn conjunction(items: impl IntoIterator<Item = Formula>) -> Self {
        let mut acc = Formula::True;
        for f in items {
            acc = Formula::and(acc, f);
            if acc == Formula::False {
                break;
            }
        }
        acc
    }

    pub fn disjunction(items: impl IntoIterator<Item = Formula>) -> Self {
        let mut acc = Formula::False;
        for f in items {
            acc = Formula::or(acc, f);
            if acc == Formula::True {
                break;
            }
        }
        acc
    }

    /// Proposition names mentioned by the formula.
    pub fn propositions(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom(Atom::Prop(p)) = f {
                out.insert(p.clone());
            }
        });
        out
    }

    /// State variables referenced by linear-constraint atoms.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom(Atom::Linear(c)) = f {
                out.extend(c.variables());
            }
        });
        out
    }

    /// Distinct atoms, in a stable order.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom(a) = f {
                out.insert(a.clone());
            }
        });
        out
    }

    /// Largest finite constant appearing in any temporal interval.
    pub fn max_time_constant(&self) -> Time {
        let mut m = 0;
        self.visit(&mut |f| match f {
            Formula::Until(_, i, _) | Formula::Eventually(i, _) | Formula::Globally(i, _) => {
                m = m.max(i.max_constant())
            }
            _ => {}
        });
        m
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(a) | Formula::Eventually(_, a) | Formula::Globally(_, a) => 1 + a.depth(),
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) | Formula::Until(a, _, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Pre-order traversal.
    pub fn visit(&self, visitor: &mut impl FnMut(&Formula)) {
        visitor(self);
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => {}
            Formula::Not(a) | Formula::Eventually(_, a) | Formula::Globally(_, a) => a.visit(visitor),
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) | Formula::Until(a, _, b) => {
                a.visit(visitor);
                b.visit(visitor);
            }
        }
    }

    /// Rewrites into the core grammar `p | true | !f | f | f | f U_I f`.
    pub fn desugar(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => self.clone(),
            Formula::Not(a) => Formula::not_(a.desugar()),
            Formula::Or(a, b) => Formula::or_(a.desugar(), b.desugar()),
            Formula::And(a, b) => {
                Formula::not_(Formula::or_(Formula::not_(a.desugar()), Formula::not_(b.desugar())))
            }
            Formula::Implies(a, b) => Formula::or_(Formula::not_(a.desugar()), b.desugar()),
            Formula::Until(a, i, b) => Formula::until_(a.desugar(), *i, b.desugar()),
            Formula::Eventually(i, a) => Formula::until_(Formula::True, *i, a.desugar()),
            Formula::Globally(i, a) => Formula::not_(Formula::until_(
                Formula::True,
                *i,
                Formula::not_(a.desugar()),
            )),
        }
    }
}

/// Boolean constant folding plus EMPTY-interval folding, bottom-up. Idempotent.
pub fn simplify(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
        Formula::Not(a) => Formula::not(simplify(a)),
        Formula::Or(a, b) => Formula::or(simplify(a), simplify(b)),
        Formula::And(a, b) => Formula::and(simplify(a), simplify(b)),
        Formula::Implies(a, b) => Formula::implies(simplify(a), simplify(b)),
        Formula::Until(a, i, b) => Formula::until(simplify(a), *i, simplify(b)),
        Formula::Eventually(i, a) => Formula::eventually(*i, simplify(a)),
        Formula::Globally(i, a) => Formula::globally(*i, simplify(a)),
    }
}

/// Verdict of a residual formula on the empty continuation: pending eventualities and
/// untils fail, pending invariants hold.
pub fn finalize(f: &Formula) -> Verdict {
    Verdict::from_bool(finalize_bool(f))
}

fn finalize_bool(f: &Formula) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        // No state is left to satisfy an atom.
        Formula::Atom(_) => false,
        Formula::Not(a) => !finalize_bool(a),
        Formula::Or(a, b) => finalize_bool(a) || finalize_bool(b),
        Formula::And(a, b) => finalize_bool(a) && finalize_bool(b),
        Formula::Implies(a, b) => !finalize_bool(a) || finalize_bool(b),
        Formula::Until(..) | Formula::Eventually(..) => false,
        Formula::Globally(..) => true,
    }
}

/// Moves the anchor of a residual formula `gap` time units forward: every temporal
/// operator not nested under another temporal operator has its interval shifted.
pub fn shift_residual(f: &Formula, gap: Time) -> Formula {
    if gap == 0 {
        return f.clone();
    }
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
        Formula::Not(a) => Formula::not(shift_residual(a, gap)),
        Formula::Or(a, b) => Formula::or(shift_residual(a, gap), shift_residual(b, gap)),
        Formula::And(a, b) => Formula::and(shift_residual(a, gap), shift_residual(b, gap)),
        Formula::Implies(a, b) => Formula::implies(shift_residual(a, gap), shift_residual(b, gap)),
        Formula::Until(a, i, b) => Formula::until((**a).clone(), i.shift(gap), (**b).clone()),
        Formula::Eventually(i, a) => Formula::eventually(i.shift(gap), (**a).clone()),
        Formula::Globally(i, a) => Formula::globally(i.shift(gap), (**a).clone()),
    }
}

// Printing. Binary operands that are themselves binary are always parenthesised, so the
// output does not depend on precedence or associativity.

fn is_binary(f: &Formula) -> bool {
    matches!(
        f,
        Formula::Or(..) | Formula::And(..) | Formula::Implies(..) | Formula::Until(..)
    )
}

fn write_operand(f: &Formula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if is_binary(f) {
        write!(out, "({f})")
    } else {
        write!(out, "{f}")
    }
}

fn write_interval(i: &Interval, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(out, "{i}")
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for t in &self.terms {
            let (sign, mag) = if t.coef < 0 { ("-", -t.coef) } else { ("+", t.coef) };
            if first {
                if sign == "-" {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mag != 1 {
                write!(f, "{mag}*")?;
            }
            write!(f, "sum({}:{})", t.key, t.name)?;
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)?;
        } else if self.constant > 0 {
            write!(f, " + {}", self.constant)?;
        } else if self.constant < 0 {
            write!(f, " - {}", -self.constant)?;
        }
        Ok(())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Prop(p) => f.write_str(p),
            Atom::Linear(c) => write!(f, "{} {} {}", c.lhs, c.cmp.symbol(), c.rhs),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => out.write_str("true"),
            Formula::False => out.write_str("false"),
            Formula::Atom(a @ Atom::Prop(_)) => write!(out, "{a}"),
            Formula::Atom(a @ Atom::Linear(_)) => write!(out, "({a})"),
            Formula::Not(a) => {
                out.write_str("!")?;
                write_operand(a, out)
            }
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) => {
                let op = match self {
                    Formula::Or(..) => "|",
                    Formula::And(..) => "&",
                    _ => "->",
                };
                write_operand(a, out)?;
                write!(out, " {op} ")?;
                write_operand(b, out)
            }
            Formula::Until(a, i, b) => {
                write_operand(a, out)?;
                out.write_str(" U")?;
                write_interval(i, out)?;
                out.write_str(" ")?;
                write_operand(b, out)
            }
            Formula::Eventually(i, a) | Formula::Globally(i, a) => {
                out.write_str(if matches!(self, Formula::Eventually(..)) { "F" } else { "G" })?;
                write_interval(i, out)?;
                out.write_str(" ")?;
                write_operand(a, out)
            }
        }
    }
}
