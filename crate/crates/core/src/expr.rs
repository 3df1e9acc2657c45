//! Small arithmetic expression trees for SDE integrands.

use std::fmt;

use crate::scalar::Real;

/// What a variable reference resolves to once a model is validated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRef {
    /// State of an endogenous process, by process index.
    Process(usize),
    /// The current time.
    Time,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Sin(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Var(v) = e {
                out.push(v.as_str());
            }
        });
        out
    }

    pub fn contains_div_or_exp(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if matches!(e, Expr::Div(..) | Expr::Exp(..)) {
                found = true;
            }
        });
        found
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Neg(a) | Expr::Exp(a) | Expr::Sin(a) => a.walk(f),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b) => {
                a.walk(f);
                b.walk(f);
            }
        }
    }

    /// Resolve variable names to state slots, producing an evaluable form.
    pub fn compile(&self, resolve: &impl Fn(&str) -> Option<VarRef>) -> Option<Compiled> {
        Some(match self {
            Expr::Const(c) => Compiled::Const(*c),
            Expr::Var(v) => Compiled::Var(resolve(v)?),
            Expr::Neg(a) => Compiled::Neg(Box::new(a.compile(resolve)?)),
            Expr::Add(a, b) => Compiled::Add(
                Box::new(a.compile(resolve)?),
                Box::new(b.compile(resolve)?),
            ),
            Expr::Sub(a, b) => Compiled::Sub(
                Box::new(a.compile(resolve)?),
                Box::new(b.compile(resolve)?),
            ),
            Expr::Mul(a, b) => Compiled::Mul(
                Box::new(a.compile(resolve)?),
                Box::new(b.compile(resolve)?),
            ),
            Expr::Div(a, b) => Compiled::Div(
                Box::new(a.compile(resolve)?),
                Box::new(b.compile(resolve)?),
            ),
            Expr::Exp(a) => Compiled::Exp(Box::new(a.compile(resolve)?)),
            Expr::Sin(a) => Compiled::Sin(Box::new(a.compile(resolve)?)),
            Expr::Min(a, b) => Compiled::Min(
                Box::new(a.compile(resolve)?),
                Box::new(b.compile(resolve)?),
            ),
            Expr::Max(a, b) => Compiled::Max(
                Box::new(a.compile(resolve)?),
                Box::new(b.compile(resolve)?),
            ),
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Min(a, b) => write!(f, "min({a}, {b})"),
            Expr::Max(a, b) => write!(f, "max({a}, {b})"),
        }
    }
}

/// Index-resolved expression, evaluated against a state slice and a time.
#[derive(Debug, Clone)]
pub enum Compiled {
    Const(f64),
    Var(VarRef),
    Neg(Box<Compiled>),
    Add(Box<Compiled>, Box<Compiled>),
    Sub(Box<Compiled>, Box<Compiled>),
    Mul(Box<Compiled>, Box<Compiled>),
    Div(Box<Compiled>, Box<Compiled>),
    Exp(Box<Compiled>),
    Sin(Box<Compiled>),
    Min(Box<Compiled>, Box<Compiled>),
    Max(Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    pub fn eval<F: Real>(&self, state: &[F], t: F) -> F {
        match self {
            Compiled::Const(c) => F::from_f64_lossy(*c),
            Compiled::Var(VarRef::Process(i)) => state[*i],
            Compiled::Var(VarRef::Time) => t,
            Compiled::Neg(a) => -a.eval(state, t),
            Compiled::Add(a, b) => a.eval(state, t) + b.eval(state, t),
            Compiled::Sub(a, b) => a.eval(state, t) - b.eval(state, t),
            Compiled::Mul(a, b) => a.eval(state, t) * b.eval(state, t),
            Compiled::Div(a, b) => {
                // Division guarded at evaluation: a zero denominator yields
                // an infinity that the simulator reports as overflow.
                a.eval(state, t) / b.eval(state, t)
            }
            Compiled::Exp(a) => a.eval(state, t).exp(),
            Compiled::Sin(a) => a.eval(state, t).sin(),
            Compiled::Min(a, b) => a.eval(state, t).min(b.eval(state, t)),
            Compiled::Max(a, b) => a.eval(state, t).max(b.eval(state, t)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(name: &str) -> Option<VarRef> {
        match name {
            "x" => Some(VarRef::Process(0)),
            "y" => Some(VarRef::Process(1)),
            "t" => Some(VarRef::Time),
            _ => None,
        }
    }

    #[test]
    fn evaluates_arithmetic() {
        let e = Expr::Add(
            Box::new(Expr::Mul(
                Box::new(Expr::Const(2.0)),
                Box::new(Expr::Var("x".into())),
            )),
            Box::new(Expr::Neg(Box::new(Expr::Var("y".into())))),
        );
        let c = e.compile(&resolve).unwrap();
        assert_eq!(c.eval::<f64>(&[3.0, 1.0], 0.0), 5.0);
        assert_eq!(c.eval::<f32>(&[3.0, 1.0], 0.0), 5.0);
    }

    #[test]
    fn unresolved_variable_fails_compile() {
        let e = Expr::Var("z".into());
        assert!(e.compile(&resolve).is_none());
    }

    #[test]
    fn detects_lipschitz_risky_operators() {
        let e = Expr::Exp(Box::new(Expr::Var("x".into())));
        assert!(e.contains_div_or_exp());
        let e = Expr::Add(Box::new(Expr::Const(1.0)), Box::new(Expr::Var("x".into())));
        assert!(!e.contains_div_or_exp());
    }
}
