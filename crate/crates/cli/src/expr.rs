//! Inline mappings: comma-separated component expressions over `x1..x9`.
//!
//! Grammar (usual precedence, `^` binds tightest and associates right):
//!
//! ```text
//! list  := expr ("," expr)*
//! expr  := term (("+" | "-") term)*
//! term  := unary (("*" | "/") unary)*
//! unary := ("-" | "+") unary | power
//! power := atom ("^" unary)?
//! atom  := number | x1..x9 | s | func "(" expr ")" | "(" expr ")"
//! func  := sqrt | exp | ln | sin | cos | abs
//! ```
//!
//! The parameter `s` is only accepted where [`Scope::allows_param`] says so.

use covkit_core::dual::Dual;
use covkit_core::mapping::{EvalError, Mapping};
use thiserror::Error;

/// Highest variable index the grammar accepts.
pub const MAX_VARIABLE: usize = 9;

const FUNCTIONS: [&str; 6] = ["sqrt", "exp", "ln", "sin", "cos", "abs"];

/// Parse failure, positioned by character offset into the source.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    /// Malformed input.
    #[error("parse error at position {position}: {message}")]
    Syntax {
        /// Character offset.
        position: usize,
        /// What was expected or found.
        message: String,
    },
    /// A name followed by `(` that is not a supported function.
    #[error("unsupported function `{name}` at position {position}; expected one of sqrt, exp, ln, sin, cos, abs")]
    UnknownFunction {
        /// The offending name.
        name: String,
        /// Character offset.
        position: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Func {
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
    Abs,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Param,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, x: &[Dual], s: f64) -> Result<Dual, EvalError> {
        Ok(match self {
            Node::Num(v) => Dual::constant(*v),
            Node::Var(i) => x[*i],
            Node::Param => Dual::constant(s),
            Node::Neg(a) => -a.eval(x, s)?,
            Node::Add(a, b) => a.eval(x, s)? + b.eval(x, s)?,
            Node::Sub(a, b) => a.eval(x, s)? - b.eval(x, s)?,
            Node::Mul(a, b) => a.eval(x, s)? * b.eval(x, s)?,
            Node::Div(a, b) => a.eval(x, s)? / b.eval(x, s)?,
            Node::Pow(a, b) => {
                let base = a.eval(x, s)?;
                match small_integer(b) {
                    Some(k) => base.powi(k),
                    None => base.powd(b.eval(x, s)?)?,
                }
            }
            Node::Call(f, a) => {
                let v = a.eval(x, s)?;
                match f {
                    Func::Sqrt => v.sqrt()?,
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln()?,
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Abs => v.abs()?,
                }
            }
        })
    }

    fn has_param(&self) -> bool {
        match self {
            Node::Param => true,
            Node::Num(_) | Node::Var(_) => false,
            Node::Neg(a) | Node::Call(_, a) => a.has_param(),
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Pow(a, b) => a.has_param() || b.has_param(),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Var(i) => Some(*i),
            Node::Num(_) | Node::Param => None,
            Node::Neg(a) | Node::Call(_, a) => a.max_var(),
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Pow(a, b) => a.max_var().max(b.max_var()),
        }
    }
}

fn constant(n: &Node) -> Option<f64> {
    match n {
        Node::Var(_) | Node::Param => None,
        _ if n.max_var().is_some() || n.has_param() => None,
        _ => n.eval(&[], 0.0).ok().map(|d| d.value),
    }
}

fn small_integer(n: &Node) -> Option<i32> {
    let v = constant(n)?;
    (v.fract() == 0.0 && v.abs() <= 64.0).then_some(v as i32)
}

/// A sub-expression whose vanishing marks a point where the inline map is
/// not differentiable.
#[derive(Clone, Debug, PartialEq)]
struct Guard {
    what: &'static str,
    text: String,
    node: Node,
}

/// Which symbols an expression may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scope {
    /// Accept `x1..x9`.
    pub allows_vars: bool,
    /// Accept the parameter `s`.
    pub allows_param: bool,
}

impl Scope {
    /// `x1..x9` only.
    pub const MAPPING: Scope = Scope {
        allows_vars: true,
        allows_param: false,
    };
    /// `x1..x9` and `s`.
    pub const PERTURBATION: Scope = Scope {
        allows_vars: true,
        allows_param: true,
    };
    /// `s` only.
    pub const SHIFT: Scope = Scope {
        allows_vars: false,
        allows_param: true,
    };
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    scope: Scope,
    guards: Vec<Guard>,
    src: &'a str,
}

impl Parser<'_> {
    fn err<T>(&self, position: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            position,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn is_minus(c: char) -> bool {
        c == '-' || c == '\u{2212}'
    }

    fn text(&self, from: usize, to: usize) -> String {
        self.chars[from..to]
            .iter()
            .collect::<String>()
            .trim()
            .to_string()
    }

    fn list(&mut self) -> Result<Vec<Node>, ParseError> {
        let mut out = vec![self.expr()?];
        while self.eat(',') {
            out.push(self.expr()?);
        }
        if let Some(c) = self.peek() {
            return self.err(self.pos, format!("unexpected `{c}`"));
        }
        Ok(out)
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(c) if Self::is_minus(c) => {
                    self.pos += 1;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.peek() == Some('/') {
                self.pos += 1;
                let start = self.pos;
                let rhs = self.unary()?;
                self.guard("denominator", start, &rhs);
                lhs = Node::Div(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Some(c) if Self::is_minus(c) => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let end = self.pos - 1;
        let exp = self.unary()?;
        if small_integer(&exp).is_none_or(|k| k < 0) {
            self.guard_text("power base", self.text(start, end), &base);
        }
        Ok(Node::Pow(Box::new(base), Box::new(exp)))
    }

    fn guard(&mut self, what: &'static str, start: usize, node: &Node) {
        let text = self.text(start, self.pos);
        self.guard_text(what, text, node);
    }

    fn guard_text(&mut self, what: &'static str, text: String, node: &Node) {
        if matches!(node, Node::Num(_)) {
            return;
        }
        self.guards.push(Guard {
            what,
            text,
            node: node.clone(),
        });
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let Some(c) = self.peek() else {
            return self.err(self.pos, "unexpected end of input");
        };
        let start = self.pos;
        if c == '(' {
            self.pos += 1;
            let inner = self.expr()?;
            if !self.eat(')') {
                return self.err(self.pos, "expected `)`");
            }
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            while self
                .chars
                .get(self.pos)
                .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_')
            {
                self.pos += 1;
            }
            let name = self.text(start, self.pos);
            if self.peek() == Some('(') {
                let func = match name.as_str() {
                    "sqrt" => Func::Sqrt,
                    "exp" => Func::Exp,
                    "ln" => Func::Ln,
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "abs" => Func::Abs,
                    _ => {
                        return Err(ParseError::UnknownFunction {
                            name,
                            position: start,
                        })
                    }
                };
                self.pos += 1;
                let arg_start = self.pos;
                let arg = self.expr()?;
                let arg_end = self.pos;
                if !self.eat(')') {
                    return self.err(self.pos, "expected `)`");
                }
                let what = match func {
                    Func::Sqrt => Some("sqrt argument"),
                    Func::Ln => Some("ln argument"),
                    Func::Abs => Some("abs argument"),
                    _ => None,
                };
                if let Some(what) = what {
                    self.guard_text(what, self.text(arg_start, arg_end), &arg);
                }
                return Ok(Node::Call(func, Box::new(arg)));
            }
            return self.symbol(&name, start);
        }
        self.err(start, format!("unexpected `{c}`"))
    }

    fn symbol(&self, name: &str, start: usize) -> Result<Node, ParseError> {
        if name == "s" {
            return if self.scope.allows_param {
                Ok(Node::Param)
            } else {
                self.err(start, "the parameter `s` is not allowed here")
            };
        }
        if let Some(idx) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
            if !(1..=MAX_VARIABLE).contains(&idx) || name.len() != 2 {
                return self.err(
                    start,
                    format!("variables run from x1 to x{MAX_VARIABLE}, got `{name}`"),
                );
            }
            return if self.scope.allows_vars {
                Ok(Node::Var(idx - 1))
            } else {
                self.err(start, format!("variable `{name}` is not allowed here"))
            };
        }
        if FUNCTIONS.contains(&name) {
            return self.err(self.pos, format!("expected `(` after `{name}`"));
        }
        self.err(start, format!("unknown symbol `{name}`"))
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.chars.get(p.pos).is_some_and(|c| c.is_ascii_digit()) {
                p.pos += 1;
            }
        };
        digits(self);
        if self.chars.get(self.pos) == Some(&'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.chars.get(self.pos), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.chars.get(self.pos), Some('+' | '-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if self.pos == exp_start {
                self.pos = save;
            }
        }
        let text = self.text(start, self.pos);
        match text.parse::<f64>() {
            Ok(v) => Ok(Node::Num(v)),
            Err(_) => self.err(start, format!("malformed number `{text}`")),
        }
    }
}

/// A parsed component list with its syntactic singular locus.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprList {
    source: String,
    components: Vec<Node>,
    guards: Vec<Guard>,
}

impl ExprList {
    /// Parses `source` in the given scope.
    pub fn parse(source: &str, scope: Scope) -> Result<Self, ParseError> {
        let mut p = Parser {
            chars: source.chars().collect(),
            pos: 0,
            scope,
            guards: Vec::new(),
            src: source,
        };
        let components = p.list()?;
        let source = p.src.trim().to_string();
        Ok(ExprList {
            source,
            components,
            guards: p.guards,
        })
    }

    /// Original text.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Number of components.
    pub fn len(&self) -> usize {
        self.components.len()
    }

    /// Always false: the grammar needs at least one component.
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Highest variable index used (1-based), 0 when no variable occurs.
    pub fn arity(&self) -> usize {
        self.components
            .iter()
            .filter_map(Node::max_var)
            .max()
            .map_or(0, |i| i + 1)
    }

    /// Evaluates on dual numbers with parameter value `s`.
    pub fn eval_dual(&self, x: &[Dual], s: f64) -> Result<Vec<Dual>, EvalError> {
        if x.len() < self.arity() {
            return Err(EvalError::Dimension {
                expected: self.arity(),
                found: x.len(),
            });
        }
        self.components.iter().map(|c| c.eval(x, s)).collect()
    }

    /// Evaluates at a real point.
    pub fn eval(&self, x: &[f64], s: f64) -> Result<Vec<f64>, EvalError> {
        let xs: Vec<Dual> = x.iter().map(|&v| Dual::constant(v)).collect();
        let out: Vec<f64> = self
            .eval_dual(&xs, s)?
            .into_iter()
            .map(|d| d.value)
            .collect();
        if let Some(component) = out.iter().position(|v| !v.is_finite()) {
            return Err(EvalError::NonFinite { component });
        }
        Ok(out)
    }

    /// The first guarded sub-expression that vanishes at `z`.
    pub fn singular_reason(&self, z: &[f64], s: f64) -> Option<String> {
        let xs: Vec<Dual> = z.iter().map(|&v| Dual::constant(v)).collect();
        self.guards.iter().find_map(|g| match g.node.eval(&xs, s) {
            Ok(v) if v.value == 0.0 => Some(format!("{} `{}` vanishes", g.what, g.text)),
            _ => None,
        })
    }
}

/// An inline mapping `R^n -> R^m`; `n` is the highest variable index.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprMapping {
    list: ExprList,
    n: usize,
}

impl ExprMapping {
    /// Parses a mapping over `x1..x9`.
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        let list = ExprList::parse(source, Scope::MAPPING)?;
        let n = list.arity().max(1);
        Ok(ExprMapping { list, n })
    }

    /// Original text.
    pub fn source(&self) -> &str {
        self.list.source()
    }
}

impl Mapping for ExprMapping {
    fn name(&self) -> &str {
        self.list.source()
    }

    fn input_dim(&self) -> usize {
        self.n
    }

    fn output_dim(&self) -> usize {
        self.list.len()
    }

    fn eval_dual(&self, x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
        self.list.eval_dual(x, 0.0)
    }

    fn singular_reason(&self, z: &[f64]) -> Option<String> {
        self.list.singular_reason(z, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_unicode_minus() {
        let e = ExprList::parse("-x1^2 + 2*x2 \u{2212} 8/4/2, 2^3^2", Scope::MAPPING).unwrap();
        assert_eq!(
            e.eval(&[3.0, 1.0], 0.0).unwrap(),
            vec![-9.0 + 2.0 - 1.0, 512.0]
        );
    }

    #[test]
    fn numbers() {
        let e = ExprList::parse("1e-3, .5, 2.5E2, 3", Scope::MAPPING).unwrap();
        assert_eq!(e.eval(&[], 0.0).unwrap(), vec![1e-3, 0.5, 250.0, 3.0]);
        assert_eq!(e.arity(), 0);
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            ExprList::parse("x1 + * x2", Scope::MAPPING).unwrap_err(),
            ParseError::Syntax {
                position: 5,
                message: "unexpected `*`".into()
            }
        );
        assert_eq!(
            ExprList::parse("x1, tan(x2)", Scope::MAPPING).unwrap_err(),
            ParseError::UnknownFunction {
                name: "tan".into(),
                position: 4
            }
        );
        assert!(ExprList::parse("(x1", Scope::MAPPING).is_err());
        assert!(ExprList::parse("x0", Scope::MAPPING).is_err());
        assert!(ExprList::parse("x10", Scope::MAPPING).is_err());
        assert!(ExprList::parse("s*x1", Scope::MAPPING).is_err());
        assert!(ExprList::parse("x1", Scope::SHIFT).is_err());
        assert!(ExprList::parse("", Scope::MAPPING).is_err());
        assert!(ExprList::parse("sqrt", Scope::MAPPING).is_err());
    }

    #[test]
    fn guards_name_the_vanishing_subexpression() {
        let e = ExprMapping::parse("x1/sqrt(x1^2+x2^2), ln(x2)").unwrap();
        assert_eq!(
            e.singular_reason(&[0.0, 0.0]).unwrap(),
            "sqrt argument `x1^2+x2^2` vanishes"
        );
        let d = ExprMapping::parse("1/(x1-x2)").unwrap();
        assert_eq!(
            d.singular_reason(&[2.0, 2.0]).unwrap(),
            "denominator `(x1-x2)` vanishes"
        );
        assert_eq!(
            e.singular_reason(&[1.0, 0.0]).unwrap(),
            "ln argument `x2` vanishes"
        );
        assert_eq!(e.singular_reason(&[1.0, 1.0]), None);
        let e = ExprMapping::parse("x1^0.5").unwrap();
        assert!(e
            .singular_reason(&[0.0])
            .unwrap()
            .contains("power base `x1`"));
        assert!(ExprMapping::parse("x1^2")
            .unwrap()
            .singular_reason(&[0.0])
            .is_none());
    }

    #[test]
    fn parameter_scope() {
        let e = ExprList::parse("0.05*x1 + s", Scope::PERTURBATION).unwrap();
        assert_eq!(e.eval(&[2.0], 0.5).unwrap(), vec![0.6]);
        let w = ExprList::parse("1 + s, 0", Scope::SHIFT).unwrap();
        assert_eq!(w.eval(&[], 2.0).unwrap(), vec![3.0, 0.0]);
    }
}
