//! Arithmetic expression evaluator for radial material profiles.
//!
//! Grammar (whitespace-free tokens, standard precedence):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'r' | 'j' | 'pi' | func '(' expr ')' | '(' expr ')'
//! func   := tan | sin | cos | exp | ln | sqrt
//! ```
//!
//! `r` is the radius in meters, `j` the imaginary unit. Errors carry the
//! 1-based column where parsing or evaluation failed.

use num_complex::Complex64;

/// A parse or evaluation failure with its 1-based column.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprError {
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for ExprError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

impl std::error::Error for ExprError {}

/// A parsed expression, reusable across radii.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Radius,
    J,
    Pi,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, usize),
    Neg(Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Func(Func, Box<Expr>, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Tan,
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn column(&self) -> usize {
        self.pos + 1
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn error(&self, message: impl Into<String>) -> ExprError {
        ExprError { column: self.column(), message: message.into() }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(op) = self.peek() {
            match op {
                b'+' => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                b'-' => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.peek() {
            match op {
                b'*' => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                b'/' => {
                    let col = self.column();
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?), col);
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            None => Err(self.error("unexpected end of expression")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.word(),
            Some(c) => Err(self.error(format!("unexpected character `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E')
                && self
                    .src
                    .get(self.pos + 1)
                    .is_some_and(|&d| d.is_ascii_digit() || d == b'+' || d == b'-')
            {
                self.pos += 2;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse::<f64>()
            .map(Expr::Number)
            .map_err(|_| ExprError { column: start + 1, message: format!("bad number `{text}`") })
    }

    fn word(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii letters");
        let func = match name {
            "r" => return Ok(Expr::Radius),
            "j" => return Ok(Expr::J),
            "pi" => return Ok(Expr::Pi),
            "tan" => Func::Tan,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            other => {
                return Err(ExprError {
                    column: start + 1,
                    message: format!("unknown name `{other}`"),
                });
            }
        };
        if self.peek() != Some(b'(') {
            return Err(self.error(format!("`{name}` needs a parenthesized argument")));
        }
        self.pos += 1;
        let arg = self.expr()?;
        if self.peek() != Some(b')') {
            return Err(self.error("expected `)`"));
        }
        self.pos += 1;
        Ok(Expr::Func(func, Box::new(arg), start + 1))
    }
}

/// Parse an expression string (whitespace is ignored before parsing; column
/// numbers refer to the stripped string for simplicity of the grammar, so
/// expressions are conventionally written without spaces).
pub fn parse(src: &str) -> Result<Expr, ExprError> {
    if !src.is_ascii() {
        return Err(ExprError { column: 1, message: "expression must be ASCII".into() });
    }
    let mut parser = Parser { src: src.as_bytes(), pos: 0 };
    let expr = parser.expr()?;
    if parser.pos != parser.src.len() {
        return Err(parser.error("trailing input"));
    }
    Ok(expr)
}

impl Expr {
    /// Evaluate at radius `r` (meters).
    pub fn eval(&self, r: f64) -> Result<Complex64, ExprError> {
        let z = match self {
            Expr::Number(x) => Complex64::new(*x, 0.0),
            Expr::Radius => Complex64::new(r, 0.0),
            Expr::J => Complex64::new(0.0, 1.0),
            Expr::Pi => Complex64::new(std::f64::consts::PI, 0.0),
            Expr::Add(a, b) => a.eval(r)? + b.eval(r)?,
            Expr::Sub(a, b) => a.eval(r)? - b.eval(r)?,
            Expr::Mul(a, b) => a.eval(r)? * b.eval(r)?,
            Expr::Div(a, b, col) => {
                let den = b.eval(r)?;
                if den.norm() == 0.0 {
                    return Err(ExprError {
                        column: *col,
                        message: format!("division by zero at r = {r}"),
                    });
                }
                a.eval(r)? / den
            }
            Expr::Neg(a) => -a.eval(r)?,
            Expr::Pow(a, b) => a.eval(r)?.powc(b.eval(r)?),
            Expr::Func(f, a, col) => {
                let x = a.eval(r)?;
                match f {
                    Func::Tan => x.tan(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => {
                        // Pin the branch with Im <= 0, matching the passive
                        // e^{+j omega t} convention of the material models.
                        let s = x.sqrt();
                        if s.im > 0.0 { -s } else { s }
                    }
                    Func::Ln => {
                        if x.norm() == 0.0 || (x.im == 0.0 && x.re < 0.0) {
                            return Err(ExprError {
                                column: *col,
                                message: format!("ln of non-positive value {x} at r = {r}"),
                            });
                        }
                        x.ln()
                    }
                }
            }
        };
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(ExprError {
                column: 1,
                message: format!("expression is not finite at r = {r}"),
            });
        }
        Ok(z)
    }

    /// Whether the expression references the radius variable.
    pub fn depends_on_radius(&self) -> bool {
        match self {
            Expr::Radius => true,
            Expr::Number(_) | Expr::J | Expr::Pi => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Pow(a, b) => {
                a.depends_on_radius() || b.depends_on_radius()
            }
            Expr::Div(a, b, _) => a.depends_on_radius() || b.depends_on_radius(),
            Expr::Neg(a) => a.depends_on_radius(),
            Expr::Func(_, a, _) => a.depends_on_radius(),
        }
    }
}

/// Parse and evaluate in one step.
#[cfg(test)]
pub fn eval(src: &str, r: f64) -> Result<Complex64, ExprError> {
    parse(src)?.eval(r)
}
