//! Closed-form expression trees used for time-dependent coefficients.
//!
//! The grammar is deliberately small: constants, named variables, the four
//! arithmetic operators, powers with constant exponents, and the function
//! catalog sin, cos, sinh, cosh, tanh, exp. Keeping the set closed makes
//! symbolic differentiation total and easy to test.

use crate::error::{Error, Result};

/// Function catalog. Every entry has a closed-form derivative within the
/// same grammar, which keeps [`Expr::differentiate`] closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
    Exp,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "sinh" => Some(Func::Sinh),
            "cosh" => Some(Func::Cosh),
            "tanh" => Some(Func::Tanh),
            "exp" => Some(Func::Exp),
            _ => None,
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Tanh => v.tanh(),
            Func::Exp => v.exp(),
        }
    }
}

/// Expression tree over a fixed list of variables.
///
/// `Var(i)` refers to the i-th name passed to [`parse`]; coefficient
/// expressions use the single variable `t`, source expressions use `s, x`.
/// Exponents of `^` are constants by construction (enforced at parse time).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Evaluates the tree with `vals[i]` bound to `Var(i)`.
    ///
    /// Errors on division by zero and non-real powers; other IEEE behavior
    /// (overflow to infinity) is left to the caller to police.
    pub fn eval(&self, vals: &[f64]) -> Result<f64> {
        let domain_err = || Error::EvalDomain {
            what: "expression".to_string(),
            t: vals.first().copied().unwrap_or(f64::NAN),
        };
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => vals[*i],
            Expr::Add(a, b) => a.eval(vals)? + b.eval(vals)?,
            Expr::Sub(a, b) => a.eval(vals)? - b.eval(vals)?,
            Expr::Mul(a, b) => a.eval(vals)? * b.eval(vals)?,
            Expr::Div(a, b) => {
                let den = b.eval(vals)?;
                if den == 0.0 {
                    return Err(domain_err());
                }
                a.eval(vals)? / den
            }
            Expr::Pow(base, p) => {
                let b = base.eval(vals)?;
                if b < 0.0 && p.fract() != 0.0 {
                    return Err(domain_err());
                }
                if b == 0.0 && *p < 0.0 {
                    return Err(domain_err());
                }
                b.powf(*p)
            }
            Expr::Call(f, a) => f.apply(a.eval(vals)?),
        })
    }

    /// Symbolic derivative with respect to `Var(var)`, lightly simplified.
    pub fn differentiate(&self, var: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(i) => Expr::Const(if *i == var { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => add(a.differentiate(var), b.differentiate(var)),
            Expr::Sub(a, b) => sub(a.differentiate(var), b.differentiate(var)),
            Expr::Mul(a, b) => add(
                mul(a.differentiate(var), (**b).clone()),
                mul((**a).clone(), b.differentiate(var)),
            ),
            Expr::Div(a, b) => div(
                sub(
                    mul(a.differentiate(var), (**b).clone()),
                    mul((**a).clone(), b.differentiate(var)),
                ),
                pow((**b).clone(), 2.0),
            ),
            Expr::Pow(base, p) => mul(
                mul(Expr::Const(*p), pow((**base).clone(), p - 1.0)),
                base.differentiate(var),
            ),
            Expr::Call(f, a) => {
                let inner = a.differentiate(var);
                let outer = match f {
                    Func::Sin => Expr::Call(Func::Cos, a.clone()),
                    Func::Cos => mul(Expr::Const(-1.0), Expr::Call(Func::Sin, a.clone())),
                    Func::Sinh => Expr::Call(Func::Cosh, a.clone()),
                    Func::Cosh => Expr::Call(Func::Sinh, a.clone()),
                    Func::Tanh => sub(
                        Expr::Const(1.0),
                        pow(Expr::Call(Func::Tanh, a.clone()), 2.0),
                    ),
                    Func::Exp => Expr::Call(Func::Exp, a.clone()),
                };
                mul(outer, inner)
            }
        }
    }

    /// True when the tree contains no variables at all.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var(_) => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
            Expr::Pow(a, _) => a.is_constant(),
            Expr::Call(_, a) => a.is_constant(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Pow(..) => 3,
            Expr::Const(c) if *c < 0.0 => 1,
            _ => 4,
        }
    }

    /// Renders the tree with the given variable names (index-matched to the
    /// list passed to [`parse`]); the output reparses to an equivalent tree.
    pub fn display_with(&self, names: &[&str]) -> String {
        let mut s = String::new();
        self.fmt_prec(&mut s, 0, names);
        s
    }

    fn fmt_prec(&self, out: &mut String, min_prec: u8, names: &[&str]) {
        let prec = self.precedence();
        let parens = prec < min_prec;
        if parens {
            out.push('(');
        }
        match self {
            Expr::Const(c) => out.push_str(&format!("{c}")),
            Expr::Var(i) => match names.get(*i) {
                Some(n) => out.push_str(n),
                None => out.push_str(&format!("v{i}")),
            },
            Expr::Add(a, b) => {
                a.fmt_prec(out, 1, names);
                out.push_str(" + ");
                b.fmt_prec(out, 2, names);
            }
            Expr::Sub(a, b) => {
                a.fmt_prec(out, 1, names);
                out.push_str(" - ");
                b.fmt_prec(out, 2, names);
            }
            Expr::Mul(a, b) => {
                // Render (-1)*e as a unary minus.
                if matches!(**a, Expr::Const(c) if c == -1.0) {
                    out.push('-');
                    b.fmt_prec(out, 3, names);
                } else {
                    a.fmt_prec(out, 2, names);
                    out.push('*');
                    b.fmt_prec(out, 3, names);
                }
            }
            Expr::Div(a, b) => {
                a.fmt_prec(out, 2, names);
                out.push('/');
                b.fmt_prec(out, 3, names);
            }
            Expr::Pow(base, p) => {
                base.fmt_prec(out, 4, names);
                if *p < 0.0 {
                    out.push_str(&format!("^({p})"));
                } else {
                    out.push_str(&format!("^{p}"));
                }
            }
            Expr::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.fmt_prec(out, 0, names);
                out.push(')');
            }
        }
        if parens {
            out.push(')');
        }
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.display_with(&["t"]))
    }
}

// Smart constructors with identity/constant folding, used when building
// derivative trees so they stay readable and cheap to evaluate.

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        (Expr::Const(z), _) if *z == 0.0 => b,
        (_, Expr::Const(z)) if *z == 0.0 => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        (_, Expr::Const(z)) if *z == 0.0 => a,
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        (Expr::Const(z), _) | (_, Expr::Const(z)) if *z == 0.0 => Expr::Const(0.0),
        (Expr::Const(o), _) if *o == 1.0 => b,
        (_, Expr::Const(o)) if *o == 1.0 => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(z), _) if *z == 0.0 => Expr::Const(0.0),
        (_, Expr::Const(o)) if *o == 1.0 => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, p: f64) -> Expr {
    if p == 0.0 {
        Expr::Const(1.0)
    } else if p == 1.0 {
        a
    } else {
        Expr::Pow(Box::new(a), p)
    }
}

// ---------------------------------------------------------------------------
// Tokenizer and recursive-descent parser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                toks.push((Tok::Plus, start));
                i += 1;
            }
            '-' => {
                toks.push((Tok::Minus, start));
                i += 1;
            }
            '*' => {
                toks.push((Tok::Star, start));
                i += 1;
            }
            '/' => {
                toks.push((Tok::Slash, start));
                i += 1;
            }
            '^' => {
                toks.push((Tok::Caret, start));
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, start));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, start));
                i += 1;
            }
            '0'..='9' | '.' => {
                let mut j = i;
                let mut seen_digit = false;
                while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                    seen_digit |= bytes[j].is_ascii_digit();
                    j += 1;
                }
                // Optional exponent part: e or E, optional sign, digits.
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                if !seen_digit {
                    return Err(Error::ParseSyntax {
                        pos: start,
                        msg: "number must contain a digit".to_string(),
                    });
                }
                let text = &src[i..j];
                let v: f64 = text.parse().map_err(|_| Error::ParseSyntax {
                    pos: start,
                    msg: format!("malformed number '{text}'"),
                })?;
                toks.push((Tok::Num(v), start));
                i = j;
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                toks.push((Tok::Ident(src[i..j].to_string()), start));
                i = j;
            }
            _ => {
                return Err(Error::ParseSyntax {
                    pos: start,
                    msg: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [&'a str],
    consts: &'a [(&'a str, f64)],
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(_, p)| *p)
            .unwrap_or(self.src_len)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let pos = self.here();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(Error::ParseSyntax {
                pos,
                msg: format!("expected {what}"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    e = Expr::Add(Box::new(e), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    e = Expr::Sub(Box::new(e), Box::new(self.term()?));
                }
                _ => return Ok(e),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    e = Expr::Div(Box::new(e), Box::new(self.unary()?));
                }
                _ => return Ok(e),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            let inner = self.unary()?;
            return Ok(mul(Expr::Const(-1.0), inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let exp_pos = self.here();
            let exp = self.unary()?;
            if !exp.is_constant() {
                return Err(Error::NonConstantExponent { pos: exp_pos });
            }
            let p = exp.eval(&[])?;
            return Ok(Expr::Pow(Box::new(base), p));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.here();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Const(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "closing ')'")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Expr::Var(i));
                }
                if name == "pi" {
                    return Ok(Expr::Const(std::f64::consts::PI));
                }
                if let Some((_, v)) = self.consts.iter().find(|(n, _)| *n == name) {
                    return Ok(Expr::Const(*v));
                }
                if let Some(f) = Func::from_name(&name) {
                    self.expect(Tok::LParen, "'(' after function name")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "closing ')'")?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                Err(Error::UnknownName { pos, name })
            }
            _ => Err(Error::ParseSyntax {
                pos,
                msg: "expected a number, name, or '('".to_string(),
            }),
        }
    }
}

/// Parses `src` over the given variable names, with extra named constants
/// (`pi` is always available). Variables shadow constants, constants shadow
/// function names.
pub fn parse(src: &str, vars: &[&str], consts: &[(&str, f64)]) -> Result<Expr> {
    let toks = tokenize(src)?;
    if toks.is_empty() {
        return Err(Error::ParseSyntax {
            pos: 0,
            msg: "empty expression".to_string(),
        });
    }
    let mut p = Parser {
        toks,
        pos: 0,
        vars,
        consts,
        src_len: src.len(),
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::ParseSyntax {
            pos: p.here(),
            msg: "unexpected trailing input".to_string(),
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(src: &str) -> Expr {
        parse(src, &["t"], &[]).unwrap()
    }

    fn ev(e: &Expr, t: f64) -> f64 {
        e.eval(&[t]).unwrap()
    }

    #[test]
    fn constant_literal() {
        assert_eq!(p("1"), Expr::Const(1.0));
        assert_eq!(ev(&p("1"), 5.0), 1.0);
    }

    #[test]
    fn cosh_squared_structure_and_value() {
        let e = p("cosh(t)^2");
        match &e {
            Expr::Pow(base, exp) => {
                assert_eq!(*exp, 2.0);
                assert!(matches!(**base, Expr::Call(Func::Cosh, _)));
            }
            other => panic!("expected power node, got {other:?}"),
        }
        assert_eq!(ev(&e, 0.0), 1.0);
    }

    #[test]
    fn half_sinh_two_t_value() {
        // 0.5*sinh(2) evaluated with an independent scalar calculator.
        let e = p("0.5*sinh(2*t)");
        assert_relative_eq!(ev(&e, 1.0), 1.813_430_203_923_509_5, max_relative = 1e-15);
    }

    #[test]
    fn precedence_and_unary_minus() {
        assert_eq!(ev(&p("1 + 2*3"), 0.0), 7.0);
        assert_eq!(ev(&p("(1 + 2)*3"), 0.0), 9.0);
        assert_eq!(ev(&p("-t^2"), 3.0), -9.0); // -(t^2), not (-t)^2
        assert_eq!(ev(&p("2 - -3"), 0.0), 5.0);
        assert_eq!(ev(&p("6/2/3"), 0.0), 1.0); // left associative
        assert_eq!(ev(&p("2*t^3"), 2.0), 16.0);
    }

    #[test]
    fn scientific_notation_and_pi() {
        assert_eq!(ev(&p("2.5e-1"), 0.0), 0.25);
        assert_eq!(ev(&p("1E2"), 0.0), 100.0);
        assert_relative_eq!(ev(&p("sin(pi/2)"), 0.0), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn named_constants_bind() {
        let e = parse(
            "omega*cosh((2*a - 1)*t)",
            &["t"],
            &[("omega", 0.5), ("a", 1.0)],
        )
        .unwrap();
        assert_relative_eq!(
            e.eval(&[0.7]).unwrap(),
            0.5 * (0.7f64).cosh(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn syntax_error_reports_position() {
        match parse("1 + * 2", &["t"], &[]) {
            Err(Error::ParseSyntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse("", &["t"], &[]) {
            Err(Error::ParseSyntax { pos, .. }) => assert_eq!(pos, 0),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse("2*(1+t", &["t"], &[]) {
            Err(Error::ParseSyntax { .. }) => {}
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_function_name() {
        match parse("floor(t)", &["t"], &[]) {
            Err(Error::UnknownName { name, pos }) => {
                assert_eq!(name, "floor");
                assert_eq!(pos, 0);
            }
            other => panic!("expected unknown-name error, got {other:?}"),
        }
    }

    #[test]
    fn non_constant_exponent_rejected() {
        match parse("2^t", &["t"], &[]) {
            Err(Error::NonConstantExponent { pos }) => assert_eq!(pos, 2),
            other => panic!("expected non-constant exponent error, got {other:?}"),
        }
        // Constant arithmetic in the exponent is fine.
        let e = p("t^(1+1)");
        assert_eq!(ev(&e, 3.0), 9.0);
    }

    #[test]
    fn division_by_zero_is_domain_error() {
        let e = p("1/t");
        assert!(matches!(e.eval(&[0.0]), Err(Error::EvalDomain { .. })));
        assert_eq!(e.eval(&[2.0]).unwrap(), 0.5);
    }

    #[test]
    fn non_real_power_is_domain_error() {
        let e = p("t^0.5");
        assert!(matches!(e.eval(&[-1.0]), Err(Error::EvalDomain { .. })));
        assert_eq!(e.eval(&[4.0]).unwrap(), 2.0);
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        assert_eq!(p("3").differentiate(0), Expr::Const(0.0));
    }

    #[test]
    fn derivative_of_sinh_2t() {
        // d/dt sinh(2t) = 2 cosh(2t)
        let d = p("sinh(2*t)").differentiate(0);
        for t in [0.0, 0.3, -1.2, 2.0] {
            assert_relative_eq!(ev(&d, t), 2.0 * (2.0 * t).cosh(), max_relative = 1e-14);
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let cases = [
            "cosh(t)^2",
            "sinh(2*t)",
            "tanh(t) + t^3/(1 + t^2)",
            "exp(-t^2)*sin(3*t)",
            "1/(2 + cos(t))",
        ];
        let h = 1e-4;
        for src in cases {
            let e = p(src);
            let d = e.differentiate(0);
            for t in [0.5, 1.0, -0.7, 2.3] {
                let fd = (ev(&e, t + h) - ev(&e, t - h)) / (2.0 * h);
                let sym = ev(&d, t);
                let scale = sym.abs().max(1.0);
                assert!(
                    (sym - fd).abs() <= 10.0 * h * h * scale,
                    "{src} at t={t}: sym={sym} fd={fd}"
                );
            }
        }
    }

    #[test]
    fn print_parse_round_trip_value_equality() {
        let cases = [
            "cosh(t)^2",
            "-t^2 + 3*t - 1",
            "0.5*sinh(2*t)",
            "(1 + t)^(-2)",
            "exp(-t^2)*sin(3*t) - tanh(t/2)",
            "1/(2 + cos(t))/t",
            "t^0.5",
        ];
        for src in cases {
            let e = parse(src, &["t"], &[]).unwrap();
            let printed = e.to_string();
            let e2 = parse(&printed, &["t"], &[])
                .unwrap_or_else(|err| panic!("reparse of '{printed}' failed: {err}"));
            for i in 0..20 {
                let t = 0.31 * i as f64 + 0.13;
                let (v1, v2) = (e.eval(&[t]), e2.eval(&[t]));
                match (v1, v2) {
                    (Ok(a), Ok(b)) => assert_relative_eq!(a, b, max_relative = 1e-14),
                    (Err(_), Err(_)) => {}
                    other => panic!("round-trip mismatch for '{src}': {other:?}"),
                }
            }
        }
    }

    #[test]
    fn two_variable_expressions() {
        let e = parse("x^2 - 2*s", &["s", "x"], &[]).unwrap();
        assert_eq!(e.eval(&[0.5, 3.0]).unwrap(), 8.0);
        let printed = e.display_with(&["s", "x"]);
        let e2 = parse(&printed, &["s", "x"], &[]).unwrap();
        assert_eq!(e2.eval(&[0.5, 3.0]).unwrap(), 8.0);
    }
}
