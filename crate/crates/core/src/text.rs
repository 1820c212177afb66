//! A small cursor for the textual formats of data.

use crate::base::{CuspidalLabel, HalfInt};
use crate::error::{Error, Result};

pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    pub fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    pub fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    pub fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(&format!("expected {token:?}")))
        }
    }

    pub fn error(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at byte {} of {:?}", self.pos, self.src))
    }

    pub fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .find(|(_, c)| !(c.is_alphanumeric() || *c == '_'))
            .map_or(rest.len(), |(i, _)| i);
        if len == 0 {
            return Err(self.error("expected identifier"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn number_text(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let mut len = 0;
        for (i, c) in rest.char_indices() {
            let ok = c.is_ascii_digit() || c == '/' || c == '.' || ((c == '-' || c == '+') && i == 0);
            if !ok {
                break;
            }
            len = i + c.len_utf8();
        }
        if len == 0 {
            return Err(self.error("expected number"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    pub fn half_int(&mut self) -> Result<HalfInt> {
        let text = self.number_text()?;
        text.trim_start_matches('+').parse().map_err(|_| self.error("bad half-integer"))
    }

    pub fn unsigned(&mut self) -> Result<u32> {
        let text = self.number_text()?;
        text.parse().map_err(|_| self.error("bad count"))
    }

    pub fn sign(&mut self) -> Result<i8> {
        if self.eat("+1") || self.eat("+") {
            Ok(1)
        } else if self.eat("-1") || self.eat("-") {
            Ok(-1)
        } else if self.eat("1") {
            Ok(1)
        } else {
            Err(self.error("expected sign"))
        }
    }

    /// Optional `@id` suffix choosing a cuspidal label.
    pub fn label_suffix(&mut self, labels: &[CuspidalLabel]) -> Result<CuspidalLabel> {
        if self.eat("@") {
            let id = self.ident()?;
            labels
                .iter()
                .find(|l| l.id == id)
                .cloned()
                .ok_or_else(|| self.error(&format!("unknown cuspidal label {id:?}")))
        } else {
            Ok(labels.iter().find(|l| l.id == "rho").or(labels.first()).cloned().unwrap_or_default())
        }
    }

    pub fn finish(&mut self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("trailing input"))
        }
    }
}

pub(crate) fn label_suffix_text(rho: &CuspidalLabel) -> String {
    if rho.id == "rho" {
        String::new()
    } else {
        format!("@{}", rho.id)
    }
}
