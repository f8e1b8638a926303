//! Parser for the plain-text formula syntax used in vocabulary recipes.
//!
//! Tokens: `b<i>` (bit atoms), `!`, `&`, `|`, `=`, parentheses.
//! Precedence, tightest first: `!`, `&`, `|`, `=`. Formulas evaluate
//! directly to truth vectors over a state space.

use crate::error::{Error, Result};
use crate::lang::{StateSet, StateSpace};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token {
    Bit(u32),
    Not,
    And,
    Or,
    Eq,
    Open,
    Close,
}

fn tokenize(input: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' => {
                chars.next();
            }
            '!' => {
                chars.next();
                tokens.push(Token::Not);
            }
            '&' => {
                chars.next();
                tokens.push(Token::And);
            }
            '|' => {
                chars.next();
                tokens.push(Token::Or);
            }
            '=' => {
                chars.next();
                tokens.push(Token::Eq);
            }
            '(' => {
                chars.next();
                tokens.push(Token::Open);
            }
            ')' => {
                chars.next();
                tokens.push(Token::Close);
            }
            'b' => {
                chars.next();
                let mut digits = String::new();
                while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    digits.push(*d);
                    chars.next();
                }
                if digits.is_empty() {
                    return Err(Error::Parse(format!("`b` without bit index in `{input}`")));
                }
                let index: u32 = digits
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad bit index `b{digits}`")))?;
                tokens.push(Token::Bit(index));
            }
            other => {
                return Err(Error::Parse(format!(
                    "unexpected character `{other}` in `{input}`"
                )));
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    space: StateSpace,
}

impl Parser<'_> {
    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    // expr := or ('=' or)*
    fn expr(&mut self) -> Result<StateSet> {
        let mut left = self.or()?;
        while self.peek() == Some(Token::Eq) {
            self.bump();
            let right = self.or()?;
            left = zip(&left, &right, |a, b| a == b);
        }
        Ok(left)
    }

    fn or(&mut self) -> Result<StateSet> {
        let mut left = self.and()?;
        while self.peek() == Some(Token::Or) {
            self.bump();
            let right = self.and()?;
            left = zip(&left, &right, |a, b| a | b);
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<StateSet> {
        let mut left = self.unary()?;
        while self.peek() == Some(Token::And) {
            self.bump();
            let right = self.unary()?;
            left = zip(&left, &right, |a, b| a & b);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<StateSet> {
        match self.bump() {
            Some(Token::Not) => {
                let inner = self.unary()?;
                Ok(complement(&inner))
            }
            Some(Token::Bit(index)) => {
                if index >= self.space.bit_count() {
                    return Err(Error::BitIndexOutOfRange {
                        index,
                        bit_count: self.space.bit_count(),
                    });
                }
                let mut set = StateSet::empty(self.space.state_count());
                for state in 0..self.space.state_count() {
                    if self.space.bit(state, index) {
                        set.insert(state);
                    }
                }
                Ok(set)
            }
            Some(Token::Open) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Token::Close) => Ok(inner),
                    _ => Err(Error::Parse("unbalanced parenthesis".into())),
                }
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

fn zip(a: &StateSet, b: &StateSet, f: impl Fn(bool, bool) -> bool) -> StateSet {
    let mut out = StateSet::empty(a.len());
    for i in 0..a.len() {
        if f(a.contains(i), b.contains(i)) {
            out.insert(i);
        }
    }
    out
}

fn complement(a: &StateSet) -> StateSet {
    let mut out = StateSet::empty(a.len());
    for i in 0..a.len() {
        if !a.contains(i) {
            out.insert(i);
        }
    }
    out
}

/// Evaluate `formula` to its truth vector over `space`.
pub fn parse_formula(formula: &str, space: StateSpace) -> Result<StateSet> {
    let tokens = tokenize(formula)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        space,
    };
    let result = parser.expr()?;
    if parser.pos != tokens.len() {
        return Err(Error::Parse(format!("trailing tokens in `{formula}`")));
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> StateSpace {
        StateSpace::new(4).unwrap()
    }

    #[test]
    fn atom_and_negation() {
        let b0 = parse_formula("b0", space()).unwrap();
        assert_eq!(b0.count(), 8);
        let n = parse_formula("!b0", space()).unwrap();
        for i in 0..16 {
            assert_ne!(b0.contains(i), n.contains(i));
        }
    }

    #[test]
    fn precedence_and_parens() {
        // `=` binds loosest: b0=b1|b2 reads as b0=(b1|b2)
        let a = parse_formula("b0=b1|b2", space()).unwrap();
        let b = parse_formula("b0=(b1|b2)", space()).unwrap();
        assert_eq!(a, b);
        let c = parse_formula("!b0&b1", space()).unwrap();
        let d = parse_formula("(!b0)&b1", space()).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn equality_formula() {
        let eq = parse_formula("b0=b2", space()).unwrap();
        let sp = space();
        for state in 0..16 {
            assert_eq!(eq.contains(state), sp.bit(state, 0) == sp.bit(state, 2));
        }
    }

    #[test]
    fn out_of_range_bit_rejected() {
        assert!(matches!(
            parse_formula("b7", space()),
            Err(Error::BitIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn garbage_rejected() {
        assert!(parse_formula("b0 &", space()).is_err());
        assert!(parse_formula("(b0", space()).is_err());
        assert!(parse_formula("x", space()).is_err());
    }
}
