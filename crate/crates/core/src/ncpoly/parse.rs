use super::{Letter, NCPoly, Symbol, Word};
use crate::error::{Error, Result};
use crate::linalg::{c, C64, ONE};

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, ch: u8) -> bool {
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn real(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.src.get(self.pos), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        while let Some(&ch) = self.src.get(self.pos) {
            let exp_sign = matches!(ch, b'-' | b'+') && matches!(self.src[self.pos - 1], b'e' | b'E');
            if ch.is_ascii_digit() || ch == b'.' || ch == b'e' || ch == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                self.err(format!("expected a number, found {text:?}"))
            }
        }
    }

    fn coeff(&mut self) -> Result<C64> {
        if self.eat(b'(') {
            let re = self.real()?;
            if !self.eat(b',') {
                return self.err("expected ',' in complex coefficient");
            }
            let im = self.real()?;
            if !self.eat(b')') {
                return self.err("expected ')' after complex coefficient");
            }
            Ok(c(re, im))
        } else {
            Ok(c(self.real()?, 0.0))
        }
    }

    fn letter(&mut self) -> Result<Letter> {
        self.skip_ws();
        let start = self.pos;
        match self.src.get(self.pos) {
            Some(ch) if ch.is_ascii_lowercase() => self.pos += 1,
            _ => return self.err("expected a generator symbol"),
        }
        while self.src.get(self.pos).is_some_and(|ch| ch.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start + 1 {
            return self.err("generator symbol needs an index");
        }
        let sym: Symbol = std::str::from_utf8(&self.src[start..self.pos]).unwrap().parse()?;
        let star = self.src.get(self.pos) == Some(&b'\'');
        if star {
            self.pos += 1;
        }
        Ok(Letter::new(sym, star))
    }

    fn monomial(&mut self) -> Result<Word> {
        let mut letters = vec![self.letter()?];
        while self.eat(b'.') {
            letters.push(self.letter()?);
        }
        Ok(Word(letters))
    }

    fn term(&mut self) -> Result<(C64, Word)> {
        match self.peek() {
            Some(ch) if ch.is_ascii_lowercase() => Ok((ONE, self.monomial()?)),
            Some(_) => {
                let k = self.coeff()?;
                if self.eat(b'*') {
                    Ok((k, self.monomial()?))
                } else {
                    Ok((k, Word::empty()))
                }
            }
            None => self.err("unexpected end of input"),
        }
    }
}

pub(super) fn parse_poly(s: &str) -> Result<NCPoly> {
    let mut cur = Cursor { src: s.as_bytes(), pos: 0 };
    let mut out = NCPoly::zero();
    let mut sign = if cur.eat(b'-') { -1.0 } else { 1.0 };
    loop {
        let (k, w) = cur.term()?;
        out.add_term(k * sign, w);
        match cur.peek() {
            None => break,
            Some(b'+') => {
                cur.pos += 1;
                sign = 1.0;
            }
            Some(b'-') => {
                cur.pos += 1;
                sign = -1.0;
            }
            Some(ch) => return cur.err(format!("unexpected character {:?}", ch as char)),
        }
    }
    Ok(out)
}
