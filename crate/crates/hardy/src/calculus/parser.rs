//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := number | ident | ident "(" args ")" | "(" expr ")" | "-" factor
//! ```
//!
//! Builtins: `pow, exp, log, sqrt, sinh, cosh, tanh, coth, abs, sin, cos, norm`.
//! Unary minus on a numeric literal folds into the constant so that printing
//! and re-parsing an AST is the identity.

use super::expr::{Expr, UnaryFn};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("`{name}` expects {expected} argument(s), got {got} (byte {offset})")]
    ArityMismatch { offset: usize, name: String, expected: String, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next_tok(&mut self) -> Result<Option<(usize, Tok)>, ParseError> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_digit() || self.src[end] == b'.')
                {
                    end += 1;
                }
                // exponent part
                if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
                    let mut e = end + 1;
                    if e < self.src.len() && (self.src[e] == b'+' || self.src[e] == b'-') {
                        e += 1;
                    }
                    if e < self.src.len() && self.src[e].is_ascii_digit() {
                        while e < self.src.len() && self.src[e].is_ascii_digit() {
                            e += 1;
                        }
                        end = e;
                    }
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("invalid number `{}`", text),
                })?;
                self.pos = end;
                Tok::Num(v)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap().to_string();
                self.pos = end;
                Tok::Ident(text)
            }
            other => {
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{}`", other as char),
                })
            }
        };
        Ok(Some((start, tok)))
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.idx)
    }

    fn bump(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        match self.bump() {
            Some((_, t)) if t == want => Ok(()),
            Some((o, t)) => Err(ParseError::Syntax {
                offset: o,
                message: format!("expected {}, found {:?}", what, t),
            }),
            None => Err(ParseError::Syntax {
                offset: self.end,
                message: format!("expected {}, found end of input", what),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some((_, Tok::Plus)) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Add(lhs.into(), rhs.into());
                }
                Some((_, Tok::Minus)) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Sub(lhs.into(), rhs.into());
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some((_, Tok::Star)) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Expr::Mul(lhs.into(), rhs.into());
                }
                Some((_, Tok::Slash)) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Expr::Div(lhs.into(), rhs.into());
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        match self.bump() {
            Some((_, Tok::Num(v))) => Ok(Expr::Const(v)),
            Some((_, Tok::Minus)) => {
                let inner = self.factor()?;
                // fold unary minus on literals so print/parse round-trips
                Ok(match inner {
                    Expr::Const(c) => Expr::Const(-c),
                    other => Expr::Neg(other.into()),
                })
            }
            Some((_, Tok::LParen)) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some((offset, Tok::Ident(name))) => {
                if matches!(self.peek(), Some((_, Tok::LParen))) {
                    self.bump();
                    let mut args = Vec::new();
                    if !matches!(self.peek(), Some((_, Tok::RParen))) {
                        loop {
                            args.push(self.expr()?);
                            match self.peek() {
                                Some((_, Tok::Comma)) => {
                                    self.bump();
                                }
                                _ => break,
                            }
                        }
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    self.call(offset, name, args)
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Some((o, t)) => Err(ParseError::Syntax {
                offset: o,
                message: format!("expected a factor, found {:?}", t),
            }),
            None => Err(ParseError::Syntax {
                offset: self.end,
                message: "expected a factor, found end of input".into(),
            }),
        }
    }

    fn call(&mut self, offset: usize, name: String, args: Vec<Expr>) -> Result<Expr, ParseError> {
        if name == "pow" {
            if args.len() != 2 {
                return Err(ParseError::ArityMismatch {
                    offset,
                    name,
                    expected: "2".into(),
                    got: args.len(),
                });
            }
            let mut it = args.into_iter();
            let base = it.next().unwrap();
            let expo = it.next().unwrap();
            return Ok(Expr::Pow(base.into(), expo.into()));
        }
        if name == "norm" {
            if args.is_empty() {
                return Err(ParseError::ArityMismatch {
                    offset,
                    name,
                    expected: "at least 1".into(),
                    got: 0,
                });
            }
            return Ok(Expr::Norm(args));
        }
        if let Some(f) = UnaryFn::from_name(&name) {
            if args.len() != 1 {
                return Err(ParseError::ArityMismatch {
                    offset,
                    name,
                    expected: "1".into(),
                    got: args.len(),
                });
            }
            return Ok(Expr::Unary(f, args.into_iter().next().unwrap().into()));
        }
        Err(ParseError::UnknownIdentifier { offset, name })
    }
}

/// Parse a source string into an [`Expr`].
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut lex = Lexer::new(src);
    let mut toks = Vec::new();
    while let Some(t) = lex.next_tok()? {
        toks.push(t);
    }
    let end = src.len();
    let mut p = Parser { toks, idx: 0, end };
    let e = p.expr()?;
    if let Some((o, t)) = p.peek() {
        return Err(ParseError::Syntax {
            offset: *o,
            message: format!("unexpected trailing {:?}", t),
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::expr::ScalarFieldExpr;
    use crate::Params;

    #[test]
    fn grammar_instances() {
        assert!(parse("pow(norm(x1,x2,x3), -0.5)").is_ok());
        assert_eq!(parse("1").unwrap(), Expr::Const(1.0));
        let err = parse("pow(t,0.5) * pow(e(),-1)").unwrap_err();
        match err {
            ParseError::UnknownIdentifier { name, .. } => assert_eq!(name, "e"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_carries_offset() {
        match parse("1 + ^2").unwrap_err() {
            ParseError::Syntax { offset, .. } => assert_eq!(offset, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn arity_mismatch() {
        match parse("pow(x1)").unwrap_err() {
            ParseError::ArityMismatch { got, .. } => assert_eq!(got, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn evaluates_standard_semantics() {
        let f = ScalarFieldExpr::parse("pow(norm(x1, x2, x3), -0.5)").unwrap();
        let coords = crate::calculus::expr::default_coords(3);
        let jet = f.eval_jet(&[2.0, 0.0, 0.0], &coords, &Params::new()).unwrap();
        let expected = 2.0f64.powf(-0.5);
        assert!((jet.value - expected).abs() < 1e-15);
        // d/dx1 |x|^{-1/2} = -(1/2)|x|^{-3/2}·(x1/|x|) = -2^{-5/2} at (2,0,0)
        assert!((jet.grad[0] + 2.0f64.powf(-2.5)).abs() < 1e-15);
        assert_eq!(jet.grad[1], 0.0);
    }

    #[test]
    fn precedence_and_associativity() {
        let a = parse("1 - 2 - 3").unwrap();
        assert_eq!(
            a,
            Expr::Sub(
                Expr::Sub(Expr::Const(1.0).into(), Expr::Const(2.0).into()).into(),
                Expr::Const(3.0).into()
            )
        );
        let b = parse("2 * x1 + 1").unwrap();
        assert!(matches!(b, Expr::Add(..)));
    }

    #[test]
    fn pretty_parse_round_trip() {
        for src in [
            "pow(norm(x1, x2), -1.5) * exp(-x1) + 3 / (x2 - 1)",
            "-x1 * 2 - -3",
            "coth(x1) / sinh(x2) - abs(x1 - x2)",
            "1e-3 + x1 * 1e6",
        ] {
            let ast = parse(src).unwrap();
            let printed = format!("{}", ast);
            let reparsed = parse(&printed).unwrap();
            assert_eq!(ast, reparsed, "round trip failed for `{src}` -> `{printed}`");
        }
    }

    mod prop {
        use super::super::*;
        use crate::calculus::expr::UnaryFn;
        use proptest::prelude::*;

        // normalized ASTs: finite constants, no negation of a bare literal
        // (the parser folds those into the constant)
        fn arb_expr() -> impl Strategy<Value = Expr> {
            let leaf = prop_oneof![
                (-1e6f64..1e6).prop_map(Expr::Const),
                prop_oneof![Just("x1"), Just("x2"), Just("alpha"), Just("t")]
                    .prop_map(|n| Expr::Var(n.to_string())),
            ];
            leaf.prop_recursive(4, 64, 4, |inner| {
                prop_oneof![
                    (inner.clone(), inner.clone())
                        .prop_map(|(a, b)| Expr::Add(a.into(), b.into())),
                    (inner.clone(), inner.clone())
                        .prop_map(|(a, b)| Expr::Sub(a.into(), b.into())),
                    (inner.clone(), inner.clone())
                        .prop_map(|(a, b)| Expr::Mul(a.into(), b.into())),
                    (inner.clone(), inner.clone())
                        .prop_map(|(a, b)| Expr::Div(a.into(), b.into())),
                    (inner.clone(), -4f64..4.0)
                        .prop_map(|(a, e)| Expr::Pow(a.into(), Expr::Const(e).into())),
                    inner.clone().prop_map(|a| match a {
                        // keep normalization: -(const) folds
                        Expr::Const(c) => Expr::Const(-c),
                        other => Expr::Neg(other.into()),
                    }),
                    (
                        prop_oneof![
                            Just(UnaryFn::Exp),
                            Just(UnaryFn::Log),
                            Just(UnaryFn::Sqrt),
                            Just(UnaryFn::Sinh),
                            Just(UnaryFn::Cosh),
                            Just(UnaryFn::Tanh),
                            Just(UnaryFn::Coth),
                            Just(UnaryFn::Abs),
                            Just(UnaryFn::Sin),
                            Just(UnaryFn::Cos)
                        ],
                        inner.clone()
                    )
                        .prop_map(|(f, a)| Expr::Unary(f, a.into())),
                    proptest::collection::vec(inner, 1..4).prop_map(Expr::Norm),
                ]
            })
        }

        proptest! {
            #[test]
            fn pretty_print_then_parse_is_identity(ast in arb_expr()) {
                let printed = format!("{}", ast);
                let reparsed = parse(&printed).unwrap();
                prop_assert_eq!(ast, reparsed);
            }
        }
    }
}
