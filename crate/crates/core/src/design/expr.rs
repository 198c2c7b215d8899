//! Arithmetic expressions over named parameters.
//!
//! Identifiers are `[A-Za-z_][A-Za-z0-9_]*`, optionally qualified as
//! `component.param`, where the component part may be a hierarchical path
//! `a/b/leg.w`. A `/` between two identifiers is read as a path separator
//! only when the chain ends in a `.param` qualifier; `l/w` is a division.
//! The canonical printer surrounds binary operators with spaces, so printed
//! expressions never depend on that rule.

use std::collections::BTreeSet;
use std::fmt;

use super::DesignError;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Returns the constant value if the expression has no variables.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn eval(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, DesignError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(name) => lookup(name).ok_or_else(|| DesignError::UnknownSymbol(name.clone()))?,
            Expr::Neg(e) => -e.eval(lookup)?,
            Expr::Add(a, b) => a.eval(lookup)? + b.eval(lookup)?,
            Expr::Sub(a, b) => a.eval(lookup)? - b.eval(lookup)?,
            Expr::Mul(a, b) => a.eval(lookup)? * b.eval(lookup)?,
            Expr::Div(a, b) => {
                let d = b.eval(lookup)?;
                if d == 0.0 {
                    return Err(DesignError::Eval(format!("division by zero in `{self}`")));
                }
                a.eval(lookup)? / d
            }
        };
        if !v.is_finite() {
            return Err(DesignError::Eval(format!("non-finite result in `{self}`")));
        }
        Ok(v)
    }

    /// Rewrites every variable name.
    pub fn rename(&self, f: &dyn Fn(&str) -> String) -> Expr {
        match self {
            Expr::Num(v) => Expr::Num(*v),
            Expr::Var(v) => Expr::Var(f(v)),
            Expr::Neg(e) => Expr::Neg(Box::new(e.rename(f))),
            Expr::Add(a, b) => Expr::Add(Box::new(a.rename(f)), Box::new(b.rename(f))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.rename(f)), Box::new(b.rename(f))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.rename(f)), Box::new(b.rename(f))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.rename(f)), Box::new(b.rename(f))),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => 3,
            Expr::Num(_) | Expr::Var(_) => 4,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => f.write_str(v),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_operand(f, e, e.precedence() < 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let (op, p) = match self {
                    Expr::Add(..) => ("+", 1),
                    Expr::Sub(..) => ("-", 1),
                    Expr::Mul(..) => ("*", 2),
                    _ => ("/", 2),
                };
                write_operand(f, a, a.precedence() < p)?;
                write!(f, " {op} ")?;
                write_operand(f, b, b.precedence() <= p)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

/// Length of a `[seg/]*seg.param` chain starting at `i`, if there is one.
fn qualified_len(s: &[u8], i: usize) -> Option<usize> {
    let mut j = i;
    loop {
        if j >= s.len() || !is_ident_start(s[j]) {
            return None;
        }
        while j < s.len() && is_ident_char(s[j]) {
            j += 1;
        }
        match s.get(j) {
            Some(b'/') => j += 1,
            Some(b'.') => {
                j += 1;
                if j >= s.len() || !is_ident_start(s[j]) {
                    return None;
                }
                while j < s.len() && is_ident_char(s[j]) {
                    j += 1;
                }
                return Some(j - i);
            }
            _ => return None,
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, DesignError> {
    let s = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let c = s[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
                i += 1;
            }
            if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
                let mut j = i + 1;
                if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                    j += 1;
                }
                if j < s.len() && s[j].is_ascii_digit() {
                    while j < s.len() && s[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let v: f64 = text[start..i].parse().map_err(|_| DesignError::Parse {
                offset: start,
                message: format!("malformed number `{}`", &text[start..i]),
            })?;
            out.push((start, Tok::Num(v)));
        } else if is_ident_start(c) {
            let start = i;
            if let Some(n) = qualified_len(s, i) {
                i += n;
            } else {
                while i < s.len() && is_ident_char(s[i]) {
                    i += 1;
                }
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if matches!(c, b'+' | b'-' | b'*' | b'/') {
            out.push((i, Tok::Op(c as char)));
            i += 1;
        } else if c == b'(' {
            out.push((i, Tok::LParen));
            i += 1;
        } else if c == b')' {
            out.push((i, Tok::RParen));
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(DesignError::Parse {
                offset: i,
                message: format!("unexpected character `{ch}`"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, DesignError> {
        Err(DesignError::Parse {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn sum(&mut self) -> Result<Expr, DesignError> {
        let mut lhs = self.product()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.product()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, DesignError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, DesignError> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Expr, DesignError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(Expr::Var(name))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.sum()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(_) => self.err("expected a number, name or `(`"),
            None => self.err("unexpected end of expression"),
        }
    }
}

pub fn parse_expression(text: &str) -> Result<Expr, DesignError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let e = p.sum()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty(_: &str) -> Option<f64> {
        None
    }

    #[test]
    fn division_of_variable() {
        assert_eq!(
            parse_expression("l/2").unwrap(),
            Expr::Div(Box::new(Expr::var("l")), Box::new(Expr::num(2.0)))
        );
    }

    #[test]
    fn precedence() {
        assert_eq!(parse_expression("2+3*4").unwrap().eval(&empty).unwrap(), 14.0);
        assert_eq!(parse_expression("10-4-3").unwrap().eval(&empty).unwrap(), 3.0);
        assert_eq!(parse_expression("16/4/2").unwrap().eval(&empty).unwrap(), 2.0);
    }

    #[test]
    fn unclosed_paren_offset() {
        match parse_expression("(w+") {
            Err(DesignError::Parse { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_character() {
        assert!(matches!(parse_expression("a $ b"), Err(DesignError::Parse { offset: 2, .. })));
    }

    #[test]
    fn qualified_names() {
        assert_eq!(parse_expression("a/top.l").unwrap(), Expr::var("a/top.l"));
        assert_eq!(parse_expression("top.l/2").unwrap().to_string(), "top.l / 2");
        assert_eq!(parse_expression("l/w").unwrap().to_string(), "l / w");
        assert_eq!(parse_expression("x/y/leg.w*2").unwrap().to_string(), "x/y/leg.w * 2");
    }

    #[test]
    fn printer_round_trip() {
        for s in [
            "(l + w) / 2 - 1",
            "a - (b - c)",
            "a / (b * c)",
            "-(a + b) * 3",
            "--a",
            "1.5e3 + 0.25",
            "a - -2",
        ] {
            let e = parse_expression(s).unwrap();
            let printed = e.to_string();
            let again = parse_expression(&printed).unwrap();
            assert_eq!(e, again, "{s} -> {printed}");
            assert_eq!(printed, again.to_string());
        }
    }

    #[test]
    fn negative_literal_prints_reparsably() {
        let e = Expr::Sub(Box::new(Expr::var("a")), Box::new(Expr::num(-2.0)));
        let p = e.to_string();
        assert_eq!(parse_expression(&p).unwrap().to_string(), p);
    }

    #[test]
    fn division_by_zero() {
        assert!(matches!(
            parse_expression("1/(2-2)").unwrap().eval(&empty),
            Err(DesignError::Eval(_))
        ));
    }
}
