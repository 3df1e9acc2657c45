//! Hand-rolled lexer and recursive-descent parser for the model DSL.
//!
//! ```text
//! system  := "system" "{" (driver | process | label)* "horizon" NUMBER ";" "}"
//! driver  := "exogenous" NAME ":" ("brownian" | "poisson" "(" NUMBER ")"
//!            | "time" | "constant" "(" NUMBER ")") ";"
//! process := "process" NAME "{" "init" "=" dist ";" "alpha" "=" nameset ";"
//!            "beta" "=" nameset ";" "g" "=" "[" (expr ("," expr)*)? "]" ";"
//!            ("markov" "=" BOOL ";")? "}"
//! dist    := "constant" "(" NUMBER ")" | "normal" "(" NUMBER "," NUMBER ")"
//! nameset := "{" (NAME ("," NAME)*)? "}"
//! label   := "label" NAME "=" NUMBER ";"
//! ```
//!
//! Expressions use `+ - * /`, unary `-`, `exp`, `sin`, `min`, `max`,
//! parentheses, decimal numbers with optional exponent, names, and the time
//! symbol `t`. Comments run from `#` to end of line.

use std::fmt;

use crate::expr::Expr;

use super::{DriverKind, DriverSpec, InitDist, ProcessSpec, SdeSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A positioned message produced while parsing or validating a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {tag}: {}", self.line, self.col, self.message)
    }
}

#[derive(Debug)]
pub struct ParsedModel {
    pub system: SdeSystem,
    pub warnings: Vec<Diagnostic>,
}

/// Parse and validate a model. On failure every collected error is returned.
pub fn parse_model(text: &str) -> Result<ParsedModel, Vec<Diagnostic>> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let system = p.system()?;
    let warnings = validate(&system)?;
    Ok(ParsedModel { system, warnings })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Number(f64),
    Sym(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> char {
        let ch = self.chars[self.pos];
        self.pos += 1;
        if ch == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        ch
    }
}

fn lex(text: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let mut lx = Lexer {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    while let Some(ch) = lx.peek() {
        let (l, c) = (lx.line, lx.col);
        if ch == '#' {
            while let Some(c2) = lx.peek() {
                lx.bump();
                if c2 == '\n' {
                    break;
                }
            }
        } else if ch.is_whitespace() {
            lx.bump();
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let mut name = String::new();
            while let Some(c2) = lx.peek() {
                if c2.is_ascii_alphanumeric() || c2 == '_' {
                    name.push(lx.bump());
                } else {
                    break;
                }
            }
            out.push(Token {
                tok: Tok::Name(name),
                line: l,
                col: c,
            });
        } else if ch.is_ascii_digit() || ch == '.' {
            let mut num = String::new();
            while let Some(c2) = lx.peek() {
                if c2.is_ascii_digit() || c2 == '.' {
                    num.push(lx.bump());
                } else if c2 == 'e' || c2 == 'E' {
                    num.push(lx.bump());
                    if let Some(c3) = lx.peek() {
                        if c3 == '+' || c3 == '-' {
                            num.push(lx.bump());
                        }
                    }
                } else {
                    break;
                }
            }
            match num.parse::<f64>() {
                Ok(v) => out.push(Token {
                    tok: Tok::Number(v),
                    line: l,
                    col: c,
                }),
                Err(_) => {
                    return Err(vec![err(l, c, format!("malformed number `{num}`"))]);
                }
            }
        } else if "{}()[];:=,+-*/".contains(ch) {
            lx.bump();
            out.push(Token {
                tok: Tok::Sym(ch),
                line: l,
                col: c,
            });
        } else {
            return Err(vec![err(l, c, format!("unexpected character `{ch}`"))]);
        }
    }
    Ok(out)
}

fn err(line: usize, col: usize, message: String) -> Diagnostic {
    Diagnostic {
        line,
        col,
        severity: Severity::Error,
        message,
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek()
            .map(|t| (t.line, t.col))
            .or_else(|| self.tokens.last().map(|t| (t.line, t.col + 1)))
            .unwrap_or((1, 1))
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, Vec<Diagnostic>> {
        let (l, c) = self.here();
        Err(vec![err(l, c, message.into())])
    }

    fn take_sym(&mut self, sym: char) -> Result<(), Vec<Diagnostic>> {
        match self.peek() {
            Some(Token { tok: Tok::Sym(s), .. }) if *s == sym => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail(format!("expected `{sym}`")),
        }
    }

    fn take_keyword(&mut self, kw: &str) -> Result<(), Vec<Diagnostic>> {
        match self.peek() {
            Some(Token { tok: Tok::Name(n), .. }) if n == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail(format!("expected `{kw}`")),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Name(n), .. }) if n == kw)
    }

    fn take_name(&mut self) -> Result<String, Vec<Diagnostic>> {
        match self.peek() {
            Some(Token { tok: Tok::Name(n), .. }) => {
                let n = n.clone();
                self.pos += 1;
                Ok(n)
            }
            _ => self.fail("expected a name"),
        }
    }

    fn take_number(&mut self) -> Result<f64, Vec<Diagnostic>> {
        // Allow a leading sign.
        let mut sign = 1.0;
        if let Some(Token { tok: Tok::Sym('-'), .. }) = self.peek() {
            self.pos += 1;
            sign = -1.0;
        }
        match self.peek() {
            Some(Token { tok: Tok::Number(v), .. }) => {
                let v = *v;
                self.pos += 1;
                Ok(sign * v)
            }
            _ => self.fail("expected a number"),
        }
    }

    fn system(&mut self) -> Result<SdeSystem, Vec<Diagnostic>> {
        self.take_keyword("system")?;
        self.take_sym('{')?;
        let mut drivers = Vec::new();
        let mut processes = Vec::new();
        let mut labels = Vec::new();
        loop {
            if self.at_keyword("exogenous") {
                drivers.push(self.driver()?);
            } else if self.at_keyword("process") {
                processes.push(self.process()?);
            } else if self.at_keyword("label") {
                self.pos += 1;
                let name = self.take_name()?;
                self.take_sym('=')?;
                let value = self.take_number()?;
                self.take_sym(';')?;
                labels.push((name, value));
            } else {
                break;
            }
        }
        self.take_keyword("horizon")?;
        let horizon = self.take_number()?;
        self.take_sym(';')?;
        self.take_sym('}')?;
        if self.peek().is_some() {
            return self.fail("trailing input after closing `}`");
        }
        Ok(SdeSystem {
            processes,
            drivers,
            labels,
            horizon,
        })
    }

    fn driver(&mut self) -> Result<DriverSpec, Vec<Diagnostic>> {
        self.take_keyword("exogenous")?;
        let name = self.take_name()?;
        self.take_sym(':')?;
        let kind_name = self.take_name()?;
        let kind = match kind_name.as_str() {
            "brownian" => DriverKind::Brownian,
            "time" => DriverKind::Time,
            "poisson" => {
                self.take_sym('(')?;
                let rate = self.take_number()?;
                self.take_sym(')')?;
                DriverKind::Poisson(rate)
            }
            "constant" => {
                self.take_sym('(')?;
                let value = self.take_number()?;
                self.take_sym(')')?;
                DriverKind::Constant(value)
            }
            other => return self.fail(format!("unknown driver kind `{other}`")),
        };
        self.take_sym(';')?;
        Ok(DriverSpec { name, kind })
    }

    fn process(&mut self) -> Result<ProcessSpec, Vec<Diagnostic>> {
        self.take_keyword("process")?;
        let name = self.take_name()?;
        self.take_sym('{')?;
        self.take_keyword("init")?;
        self.take_sym('=')?;
        let init = self.dist()?;
        self.take_sym(';')?;
        self.take_keyword("alpha")?;
        self.take_sym('=')?;
        let alpha = self.nameset()?;
        self.take_sym(';')?;
        self.take_keyword("beta")?;
        self.take_sym('=')?;
        let beta = self.nameset()?;
        self.take_sym(';')?;
        self.take_keyword("g")?;
        self.take_sym('=')?;
        self.take_sym('[')?;
        let mut integrands = Vec::new();
        if !matches!(self.peek(), Some(Token { tok: Tok::Sym(']'), .. })) {
            loop {
                integrands.push(self.expr()?);
                if matches!(self.peek(), Some(Token { tok: Tok::Sym(','), .. })) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.take_sym(']')?;
        self.take_sym(';')?;
        let mut markov = false;
        if self.at_keyword("markov") {
            self.pos += 1;
            self.take_sym('=')?;
            let b = self.take_name()?;
            markov = match b.as_str() {
                "true" => true,
                "false" => false,
                _ => return self.fail("expected `true` or `false`"),
            };
            self.take_sym(';')?;
        }
        self.take_sym('}')?;
        Ok(ProcessSpec {
            name,
            init,
            alpha,
            beta,
            integrands,
            markov,
        })
    }

    fn dist(&mut self) -> Result<InitDist, Vec<Diagnostic>> {
        let kind = self.take_name()?;
        match kind.as_str() {
            "constant" => {
                self.take_sym('(')?;
                let v = self.take_number()?;
                self.take_sym(')')?;
                Ok(InitDist::Constant(v))
            }
            "normal" => {
                self.take_sym('(')?;
                let mean = self.take_number()?;
                self.take_sym(',')?;
                let var = self.take_number()?;
                self.take_sym(')')?;
                Ok(InitDist::Normal { mean, var })
            }
            other => self.fail(format!("unknown distribution `{other}`")),
        }
    }

    fn nameset(&mut self) -> Result<Vec<String>, Vec<Diagnostic>> {
        self.take_sym('{')?;
        let mut names = Vec::new();
        if !matches!(self.peek(), Some(Token { tok: Tok::Sym('}'), .. })) {
            loop {
                names.push(self.take_name()?);
                if matches!(self.peek(), Some(Token { tok: Tok::Sym(','), .. })) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.take_sym('}')?;
        Ok(names)
    }

    fn expr(&mut self) -> Result<Expr, Vec<Diagnostic>> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token { tok: Tok::Sym('+'), .. }) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Token { tok: Tok::Sym('-'), .. }) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, Vec<Diagnostic>> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Token { tok: Tok::Sym('*'), .. }) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Token { tok: Tok::Sym('/'), .. }) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, Vec<Diagnostic>> {
        match self.peek().cloned() {
            Some(Token { tok: Tok::Sym('-'), .. }) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Some(Token { tok: Tok::Sym('('), .. }) => {
                self.pos += 1;
                let e = self.expr()?;
                self.take_sym(')')?;
                Ok(e)
            }
            Some(Token { tok: Tok::Number(v), .. }) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Token { tok: Tok::Name(n), .. }) => {
                self.pos += 1;
                match n.as_str() {
                    "exp" | "sin" => {
                        self.take_sym('(')?;
                        let a = self.expr()?;
                        self.take_sym(')')?;
                        Ok(match n.as_str() {
                            "exp" => Expr::Exp(Box::new(a)),
                            _ => Expr::Sin(Box::new(a)),
                        })
                    }
                    "min" | "max" => {
                        self.take_sym('(')?;
                        let a = self.expr()?;
                        self.take_sym(',')?;
                        let b = self.expr()?;
                        self.take_sym(')')?;
                        Ok(match n.as_str() {
                            "min" => Expr::Min(Box::new(a), Box::new(b)),
                            _ => Expr::Max(Box::new(a), Box::new(b)),
                        })
                    }
                    _ => Ok(Expr::Var(n)),
                }
            }
            _ => self.fail("expected an expression"),
        }
    }
}

/// Static checks over a parsed system; errors abort, warnings are returned.
fn validate(sys: &SdeSystem) -> Result<Vec<Diagnostic>, Vec<Diagnostic>> {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    let d = |msg: String| err(0, 0, msg);

    if sys.processes.is_empty() {
        errors.push(d("system declares no processes".into()));
    }
    if sys.horizon <= 0.0 {
        errors.push(d(format!("horizon must be positive, got {}", sys.horizon)));
    }

    let mut seen = std::collections::BTreeSet::new();
    for name in sys
        .processes
        .iter()
        .map(|p| &p.name)
        .chain(sys.drivers.iter().map(|dr| &dr.name))
    {
        if !seen.insert(name.clone()) {
            errors.push(d(format!("duplicate name `{name}`")));
        }
    }
    if seen.contains("t") {
        errors.push(d("`t` is reserved for the time symbol".into()));
    }

    for dr in &sys.drivers {
        if let DriverKind::Poisson(rate) = dr.kind {
            if rate <= 0.0 {
                errors.push(d(format!(
                    "poisson driver `{}` needs a positive rate",
                    dr.name
                )));
            }
        }
    }

    for p in &sys.processes {
        if let InitDist::Normal { var, .. } = p.init {
            if var < 0.0 {
                errors.push(d(format!(
                    "process `{}` has negative initial variance",
                    p.name
                )));
            }
        }
        for set in [&p.alpha, &p.beta] {
            for r in set {
                if !seen.contains(r) {
                    errors.push(d(format!(
                        "process `{}` references undeclared name `{r}`",
                        p.name
                    )));
                }
            }
        }
        if p.beta.contains(&p.name) {
            errors.push(d(format!(
                "process `{}` may not be its own integrator",
                p.name
            )));
        }
        if p.integrands.len() != p.beta.len() {
            errors.push(d(format!(
                "process `{}` declares {} integrator(s) but {} integrand expression(s)",
                p.name,
                p.beta.len(),
                p.integrands.len()
            )));
        }
        for g in &p.integrands {
            for v in g.variables() {
                let allowed = v == "t" || v == p.name || p.alpha.iter().any(|a| a == v);
                if !allowed {
                    errors.push(d(format!(
                        "process `{}`: integrand references `{v}`, which is not in alpha or the time symbol",
                        p.name
                    )));
                }
            }
            if g.contains_div_or_exp() {
                warnings.push(Diagnostic {
                    line: 0,
                    col: 0,
                    severity: Severity::Warning,
                    message: format!(
                        "process `{}`: integrand uses `/` or `exp`, which may violate the growth/Lipschitz conditions",
                        p.name
                    ),
                });
            }
        }
    }

    if errors.is_empty() {
        Ok(warnings)
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::fixtures;

    #[test]
    fn demo_model_parses_with_expected_structure() {
        let parsed = parse_model(fixtures::CYCLIC4_MODEL).unwrap();
        let sys = parsed.system;
        assert_eq!(sys.processes.len(), 4);
        assert_eq!(sys.drivers.len(), 2);
        let x4 = sys.process("X4").unwrap();
        assert_eq!(x4.beta, vec!["X2".to_string()]);
    }

    #[test]
    fn empty_system_is_an_error() {
        let errs = parse_model("system { horizon 1; }").unwrap_err();
        assert!(errs.iter().any(|e| e.message.contains("no processes")));
    }

    #[test]
    fn undeclared_reference_is_reported() {
        let text = "system {
            exogenous W: brownian;
            process X { init = normal(0,1); alpha = {Z}; beta = {W}; g = [1]; }
            horizon 1;
        }";
        let errs = parse_model(text).unwrap_err();
        assert!(errs.iter().any(|e| e.message.contains("undeclared name `Z`")));
    }

    #[test]
    fn syntax_error_carries_position() {
        let errs = parse_model("system {\n  process ;\n}").unwrap_err();
        assert_eq!(errs[0].line, 2);
        assert!(errs[0].col > 0);
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let text = "system {
            exogenous W: brownian;
            exogenous T: time;
            process X { init = normal(0,1); alpha = {X}; beta = {W, T}; g = [1]; }
            horizon 1;
        }";
        let errs = parse_model(text).unwrap_err();
        assert!(errs.iter().any(|e| e.message.contains("integrand expression")));
    }

    #[test]
    fn duplicate_names_are_reported() {
        let text = "system {
            exogenous X: brownian;
            process X { init = normal(0,1); alpha = {X}; beta = {}; g = []; }
            horizon 1;
        }";
        let errs = parse_model(text).unwrap_err();
        assert!(errs.iter().any(|e| e.message.contains("duplicate name")));
    }

    #[test]
    fn lipschitz_warning_for_exp() {
        let text = "system {
            exogenous T: time;
            process X { init = constant(1); alpha = {X}; beta = {T}; g = [exp(X)]; }
            horizon 1;
        }";
        let parsed = parse_model(text).unwrap();
        assert_eq!(parsed.warnings.len(), 1);
        assert_eq!(parsed.warnings[0].severity, Severity::Warning);
    }

    #[test]
    fn self_integration_is_rejected() {
        let text = "system {
            process X { init = constant(1); alpha = {X}; beta = {X}; g = [1]; }
            horizon 1;
        }";
        let errs = parse_model(text).unwrap_err();
        assert!(errs.iter().any(|e| e.message.contains("own integrator")));
    }

    #[test]
    fn expression_precedence() {
        let text = "system {
            exogenous T: time;
            process X { init = constant(0); alpha = {X}; beta = {T}; g = [1 + 2 * X - -3]; }
            horizon 1;
        }";
        let sys = parse_model(text).unwrap().system;
        let shown = sys.processes[0].integrands[0].to_string();
        assert_eq!(shown, "((1 + (2 * X)) - (-3))");
    }
}
