//! Parser for the canonical text form of Laurent polynomials and rational
//! functions, as produced by their `Display` impls.
//!
//! ```text
//! ratfunc := laurent | "(" laurent ")" "/" "(" laurent ")"
//! laurent := ["-"] term (("+" | "-") term)*
//! term    := INT ["*" mono] | mono
//! mono    := "v" ["^" ["-"] INT]
//! ```
//! Whitespace between tokens is ignored. Exponents are limited to
//! `|e| ≤ MAX_EXPONENT` so that dense storage stays bounded.

use num_bigint::BigInt;
use thiserror::Error;

use super::{LaurentPoly, RatFunc};

pub const MAX_EXPONENT: i64 = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {message}")]
pub struct ParseError {
    /// 1-based character column.
    pub column: usize,
    pub message: String,
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { chars: src.chars().collect(), pos: 0, _src: src }
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

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { column: self.pos + 1, message: message.into() }
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer"));
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        Ok(digits.parse().expect("ascii digits"))
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat('-');
        let at = self.pos;
        let n = self.integer()?;
        let e = i64::try_from(n).ok().filter(|e| *e <= MAX_EXPONENT).ok_or_else(|| ParseError {
            column: at + 1,
            message: format!("exponent out of range (|e| ≤ {MAX_EXPONENT})"),
        })?;
        Ok(if neg { -e } else { e })
    }

    fn mono(&mut self) -> Result<i64, ParseError> {
        self.expect('v')?;
        if self.eat('^') {
            self.exponent()
        } else {
            Ok(1)
        }
    }

    fn term(&mut self) -> Result<(i64, BigInt), ParseError> {
        match self.peek() {
            Some('v') => Ok((self.mono()?, BigInt::from(1))),
            Some(c) if c.is_ascii_digit() => {
                let c = self.integer()?;
                if self.eat('*') {
                    Ok((self.mono()?, c))
                } else {
                    Ok((0, c))
                }
            }
            _ => Err(self.error("expected a term")),
        }
    }

    fn laurent(&mut self) -> Result<LaurentPoly, ParseError> {
        let mut terms = Vec::new();
        let mut neg = self.eat('-');
        loop {
            let (e, c) = self.term()?;
            terms.push((e, if neg { -c } else { c }));
            if self.eat('+') {
                neg = false;
            } else if self.eat('-') {
                neg = true;
            } else {
                break;
            }
        }
        Ok(LaurentPoly::from_terms(terms))
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(self.error(format!("unexpected '{c}'"))),
        }
    }
}

pub fn parse_laurent(src: &str) -> Result<LaurentPoly, ParseError> {
    let mut cur = Cursor::new(src);
    let p = cur.laurent()?;
    cur.finish()?;
    Ok(p)
}

pub fn parse_ratfunc(src: &str) -> Result<RatFunc, ParseError> {
    let mut cur = Cursor::new(src);
    if cur.eat('(') {
        let num = cur.laurent()?;
        cur.expect(')')?;
        cur.expect('/')?;
        cur.expect('(')?;
        let at = cur.pos;
        let den = cur.laurent()?;
        cur.expect(')')?;
        cur.finish()?;
        if den.is_zero() {
            return Err(ParseError { column: at + 1, message: "zero denominator".into() });
        }
        Ok(RatFunc::new(num, den))
    } else {
        let p = cur.laurent()?;
        cur.finish()?;
        Ok(RatFunc::from(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_display_output() {
        let p = LaurentPoly::from_terms([(2, 1), (0, -3), (-1, 2)]);
        assert_eq!(p.to_string(), "v^2 - 3 + 2*v^-1");
        assert_eq!(parse_laurent(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn reports_error_column() {
        let err = parse_laurent("v^2 + * 3").unwrap_err();
        assert_eq!(err.column, 7);
        assert!(parse_ratfunc("(1)/(0)").is_err());
        let err = parse_laurent("1 + v^-4096").unwrap_err();
        assert_eq!(err.column, 8);
        assert!(parse_laurent("v^1024 - v^-1024").is_ok());
    }

    fn arb_laurent() -> impl Strategy<Value = LaurentPoly> {
        prop::collection::vec((-6i64..6, -5i64..5), 0..5).prop_map(LaurentPoly::from_terms)
    }

    proptest! {
        #[test]
        fn ratfunc_text_round_trip(n in arb_laurent(), d in arb_laurent()) {
            prop_assume!(!d.is_zero());
            let f = RatFunc::new(n, d);
            prop_assert_eq!(parse_ratfunc(&f.to_string()).unwrap(), f);
        }
    }
}
