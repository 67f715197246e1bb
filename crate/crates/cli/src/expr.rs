//! Tiny arithmetic expression language for boundary data and right-hand
//! sides: `+ - * / ^`, the variables `x` and `y`, and the functions `abs`,
//! `sqrt`, `sin`, `cos`, `exp`, `log`, `min`, `max`. Parsed by recursive
//! descent into an owned tree.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func1 {
    Abs,
    Sqrt,
    Sin,
    Cos,
    Exp,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func2 {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Y,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call1(Func1, Box<Expr>),
    Call2(Func2, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Y => y,
            Expr::Neg(e) => -e.eval(x, y),
            Expr::Bin(op, a, b) => {
                let a = a.eval(x, y);
                let b = b.eval(x, y);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call1(f, e) => {
                let v = e.eval(x, y);
                match f {
                    Func1::Abs => v.abs(),
                    Func1::Sqrt => v.sqrt(),
                    Func1::Sin => v.sin(),
                    Func1::Cos => v.cos(),
                    Func1::Exp => v.exp(),
                    Func1::Log => v.ln(),
                }
            }
            Expr::Call2(f, a, b) => {
                let a = a.eval(x, y);
                let b = b.eval(x, y);
                match f {
                    Func2::Min => a.min(b),
                    Func2::Max => a.max(b),
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.position, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((i, Token::Plus));
                i += 1;
            }
            '-' => {
                out.push((i, Token::Minus));
                i += 1;
            }
            '*' => {
                out.push((i, Token::Star));
                i += 1;
            }
            '/' => {
                out.push((i, Token::Slash));
                i += 1;
            }
            '^' => {
                out.push((i, Token::Caret));
                i += 1;
            }
            '(' => {
                out.push((i, Token::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Token::RParen));
                i += 1;
            }
            ',' => {
                out.push((i, Token::Comma));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // Optional exponent.
                if i < bytes.len() && matches!(bytes[i] as char, 'e' | 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && matches!(bytes[j] as char, '+' | '-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    position: start,
                    message: format!("bad number literal `{text}`"),
                })?;
                out.push((start, Token::Num(value)));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                out.push((start, Token::Ident(src[start..i].to_string())));
            }
            other => {
                return Err(ParseError {
                    position: i,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn next(&mut self) -> Option<(usize, Token)> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(p, _)| *p)
            .unwrap_or(self.len)
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            position: self.here(),
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), ParseError> {
        match self.next() {
            Some((_, t)) if t == want => Ok(()),
            _ => Err(ParseError {
                position: self.here(),
                message: format!("expected {what}"),
            }),
        }
    }

    fn expression(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.next();
                    lhs = Expr::Bin(BinOp::Add, Box::new(lhs), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.next();
                    lhs = Expr::Bin(BinOp::Sub, Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.next();
                    lhs = Expr::Bin(BinOp::Mul, Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Token::Slash) => {
                    self.next();
                    lhs = Expr::Bin(BinOp::Div, Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.next();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.next();
            // Right associative; unary minus binds inside the exponent.
            let exponent = self.factor()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.next() {
            Some((_, Token::Num(v))) => Ok(Expr::Num(v)),
            Some((_, Token::LParen)) => {
                let inner = self.expression()?;
                self.expect(Token::RParen, "closing `)`")?;
                Ok(inner)
            }
            Some((pos, Token::Ident(name))) => match name.as_str() {
                "x" => Ok(Expr::X),
                "y" => Ok(Expr::Y),
                "abs" | "sqrt" | "sin" | "cos" | "exp" | "log" => {
                    let f = match name.as_str() {
                        "abs" => Func1::Abs,
                        "sqrt" => Func1::Sqrt,
                        "sin" => Func1::Sin,
                        "cos" => Func1::Cos,
                        "exp" => Func1::Exp,
                        _ => Func1::Log,
                    };
                    self.expect(Token::LParen, "`(` after function name")?;
                    let arg = self.expression()?;
                    self.expect(Token::RParen, "closing `)`")?;
                    Ok(Expr::Call1(f, Box::new(arg)))
                }
                "min" | "max" => {
                    let f = if name == "min" { Func2::Min } else { Func2::Max };
                    self.expect(Token::LParen, "`(` after function name")?;
                    let a = self.expression()?;
                    self.expect(Token::Comma, "`,` between arguments")?;
                    let b = self.expression()?;
                    self.expect(Token::RParen, "closing `)`")?;
                    Ok(Expr::Call2(f, Box::new(a), Box::new(b)))
                }
                _ => Err(ParseError {
                    position: pos,
                    message: format!("unknown identifier `{name}`"),
                }),
            },
            _ => Err(self.err("expected a number, variable, function or `(`")),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(src)?;
    if tokens.is_empty() {
        return Err(ParseError {
            position: 0,
            message: "empty expression".into(),
        });
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        len: src.len(),
    };
    let expr = parser.expression()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.err("trailing input"));
    }
    Ok(expr)
}
