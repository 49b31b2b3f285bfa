use alloc::format;
use alloc::string::String;

use super::ast::Pos;
use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    /// Identifier or keyword.
    Ident(String),
    PrivateName(String),
    Punct(&'static str),
    Num,
    Str(String),
    /// Template chunk ending either at a closing backtick (`tail`) or at `${`.
    Template {
        cooked: String,
        tail: bool,
    },
    Regex,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub start: usize,
    pub end: usize,
    pub pos: Pos,
    /// A line terminator occurred between the previous token and this one.
    pub nl_before: bool,
}

const PUNCTS: &[&str] = &[
    ">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "&&=", "||=", "??=", "=>", "==", "!=", "<=", ">=", "&&",
    "||", "??", "?.", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "**", "<<", ">>", "{", "}", "(", ")",
    "[", "]", ";", ",", "<", ">", "+", "-", "*", "/", "%", "&", "|", "^", "!", "~", "?", ":", "=", ".", "@",
];

#[derive(Clone)]
pub(crate) struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    line_start: usize,
}

fn is_line_terminator(c: char) -> bool {
    matches!(c, '\n' | '\r' | '\u{2028}' | '\u{2029}')
}

fn is_space(c: char) -> bool {
    matches!(
        c,
        ' ' | '\t' | '\u{000B}' | '\u{000C}' | '\u{00A0}' | '\u{FEFF}' | '\u{1680}' | '\u{2000}'
            ..='\u{200A}' | '\u{202F}' | '\u{205F}' | '\u{3000}'
    )
}

pub(crate) fn is_id_start(c: char) -> bool {
    c == '$' || c == '_' || c.is_alphabetic()
}

pub(crate) fn is_id_continue(c: char) -> bool {
    c == '$' || c == '_' || c == '\u{200C}' || c == '\u{200D}' || c.is_alphanumeric()
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        let mut lexer = Lexer { src, pos: 0, line: 1, line_start: 0 };
        if src.starts_with("#!") {
            while let Some(c) = lexer.peek_char() {
                if is_line_terminator(c) {
                    break;
                }
                lexer.pos += c.len_utf8();
            }
        }
        lexer
    }

    pub fn slice(&self, start: usize, end: usize) -> &'a str {
        &self.src[start..end]
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_char_at(&self, offset: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(offset)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek_char()?;
        self.pos += c.len_utf8();
        if is_line_terminator(c) {
            if c == '\r' && self.peek_char() == Some('\n') {
                self.pos += 1;
            }
            self.line += 1;
            self.line_start = self.pos;
        }
        Some(c)
    }

    fn here(&self) -> Pos {
        Pos { line: self.line, column: (self.pos - self.line_start + 1) as u32 }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let pos = self.here();
        ParseError { line: pos.line, column: pos.column, message: message.into() }
    }

    /// Skips whitespace and comments; reports whether a line break was crossed.
    fn skip_trivia(&mut self) -> Result<bool, ParseError> {
        let mut nl = false;
        loop {
            match self.peek_char() {
                Some(c) if is_space(c) => {
                    self.bump();
                }
                Some(c) if is_line_terminator(c) => {
                    nl = true;
                    self.bump();
                }
                Some('/') if self.peek_char_at(1) == Some('/') => {
                    while let Some(c) = self.peek_char() {
                        if is_line_terminator(c) {
                            break;
                        }
                        self.bump();
                    }
                }
                Some('/') if self.peek_char_at(1) == Some('*') => {
                    self.bump();
                    self.bump();
                    loop {
                        match self.bump() {
                            Some('*') if self.peek_char() == Some('/') => {
                                self.bump();
                                break;
                            }
                            Some(c) if is_line_terminator(c) => nl = true,
                            Some(_) => {}
                            None => return Err(self.error("unterminated comment")),
                        }
                    }
                }
                _ => return Ok(nl),
            }
        }
    }

    pub fn next_token(&mut self) -> Result<Token, ParseError> {
        let nl_before = self.skip_trivia()?;
        let start = self.pos;
        let pos = self.here();
        let tok = match self.peek_char() {
            None => Tok::Eof,
            Some(c) if is_id_start(c) || c == '\\' => Tok::Ident(self.read_ident()?),
            Some('#') => {
                self.bump();
                match self.peek_char() {
                    Some(c) if is_id_start(c) => Tok::PrivateName(self.read_ident()?),
                    _ => return Err(self.error("unexpected character '#'")),
                }
            }
            Some(c) if c.is_ascii_digit() => self.read_number()?,
            Some('.') if self.peek_char_at(1).is_some_and(|c| c.is_ascii_digit()) => self.read_number()?,
            Some(q @ ('"' | '\'')) => {
                self.bump();
                Tok::Str(self.read_string(q)?)
            }
            Some('`') => {
                self.bump();
                self.read_template_chunk()?
            }
            Some(_) => self.read_punct()?,
        };
        Ok(Token { tok, start, end: self.pos, pos, nl_before })
    }

    fn read_ident(&mut self) -> Result<String, ParseError> {
        let mut name = String::new();
        while let Some(c) = self.peek_char() {
            if c == '\\' {
                self.bump();
                if self.bump() != Some('u') {
                    return Err(self.error("invalid identifier escape"));
                }
                name.push(self.read_unicode_escape()?);
            } else if is_id_continue(c) {
                name.push(c);
                self.bump();
            } else {
                break;
            }
        }
        Ok(name)
    }

    fn read_number(&mut self) -> Result<Tok, ParseError> {
        let radix_prefix =
            self.peek_char() == Some('0') && matches!(self.peek_char_at(1), Some('x' | 'X' | 'o' | 'O' | 'b' | 'B'));
        if radix_prefix {
            self.bump();
            self.bump();
            while let Some(c) = self.peek_char() {
                if c.is_ascii_hexdigit() || c == '_' {
                    self.bump();
                } else {
                    break;
                }
            }
        } else {
            let mut seen_dot = false;
            let mut seen_exp = false;
            while let Some(c) = self.peek_char() {
                if c.is_ascii_digit() || c == '_' {
                    self.bump();
                } else if c == '.' && !seen_dot && !seen_exp {
                    seen_dot = true;
                    self.bump();
                } else if (c == 'e' || c == 'E') && !seen_exp {
                    seen_exp = true;
                    self.bump();
                    if matches!(self.peek_char(), Some('+' | '-')) {
                        self.bump();
                    }
                } else {
                    break;
                }
            }
        }
        if self.peek_char() == Some('n') {
            self.bump();
        }
        if self.peek_char().is_some_and(is_id_start) {
            return Err(self.error("identifier directly after number"));
        }
        Ok(Tok::Num)
    }

    fn read_hex(&mut self, digits: usize) -> Result<u32, ParseError> {
        let mut value = 0u32;
        for _ in 0..digits {
            let d = self.bump().and_then(|c| c.to_digit(16)).ok_or_else(|| self.error("invalid hexadecimal escape"))?;
            value = value * 16 + d;
        }
        Ok(value)
    }

    fn read_unicode_escape(&mut self) -> Result<char, ParseError> {
        let code = if self.peek_char() == Some('{') {
            self.bump();
            let mut value = 0u32;
            loop {
                match self.bump() {
                    Some('}') => break,
                    Some(c) if c.is_ascii_hexdigit() && value <= 0x10FFFF => {
                        value = value * 16 + c.to_digit(16).unwrap_or(0);
                    }
                    _ => return Err(self.error("invalid unicode escape")),
                }
            }
            value
        } else {
            self.read_hex(4)?
        };
        // Lone surrogates cannot be represented; keep the replacement character.
        Ok(char::from_u32(code).unwrap_or('\u{FFFD}'))
    }

    /// Handles the character after a backslash inside a string or template.
    fn read_escape(&mut self, out: &mut String) -> Result<(), ParseError> {
        match self.bump() {
            None => return Err(self.error("unterminated escape")),
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some('b') => out.push('\u{8}'),
            Some('f') => out.push('\u{C}'),
            Some('v') => out.push('\u{B}'),
            Some('0') if !self.peek_char().is_some_and(|c| c.is_ascii_digit()) => out.push('\0'),
            Some('x') => {
                let v = self.read_hex(2)?;
                out.push(char::from_u32(v).unwrap_or('\u{FFFD}'));
            }
            Some('u') => out.push(self.read_unicode_escape()?),
            Some(c) if is_line_terminator(c) => {}
            Some(c) => out.push(c),
        }
        Ok(())
    }

    fn read_string(&mut self, quote: char) -> Result<String, ParseError> {
        let mut out = String::new();
        loop {
            match self.peek_char() {
                None => return Err(self.error("unterminated string literal")),
                Some(c) if c == quote => {
                    self.bump();
                    return Ok(out);
                }
                Some('\\') => {
                    self.bump();
                    self.read_escape(&mut out)?;
                }
                Some('\n' | '\r') => return Err(self.error("unterminated string literal")),
                Some(c) => {
                    out.push(c);
                    self.bump();
                }
            }
        }
    }

    fn read_template_chunk(&mut self) -> Result<Tok, ParseError> {
        let mut cooked = String::new();
        loop {
            match self.peek_char() {
                None => return Err(self.error("unterminated template literal")),
                Some('`') => {
                    self.bump();
                    return Ok(Tok::Template { cooked, tail: true });
                }
                Some('$') if self.peek_char_at(1) == Some('{') => {
                    self.bump();
                    self.bump();
                    return Ok(Tok::Template { cooked, tail: false });
                }
                Some('\\') => {
                    self.bump();
                    self.read_escape(&mut cooked)?;
                }
                Some(c) => {
                    cooked.push(c);
                    self.bump();
                }
            }
        }
    }

    /// Continues a template literal after the `}` closing a substitution.
    /// The lexer must be positioned directly after that `}`.
    pub fn continue_template(&mut self, closing: &Token) -> Result<Token, ParseError> {
        let tok = self.read_template_chunk()?;
        Ok(Token { tok, start: closing.start, end: self.pos, pos: closing.pos, nl_before: false })
    }

    /// Re-reads a `/` or `/=` token as a regular expression literal.
    pub fn rescan_regex(&mut self, slash: &Token) -> Result<Token, ParseError> {
        self.pos = slash.start + 1;
        self.line = slash.pos.line;
        self.line_start = slash.start + 1 - slash.pos.column as usize;
        let mut in_class = false;
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated regular expression")),
                Some(c) if is_line_terminator(c) => return Err(self.error("unterminated regular expression")),
                Some('\\') => {
                    self.bump();
                }
                Some('[') => in_class = true,
                Some(']') => in_class = false,
                Some('/') if !in_class => break,
                Some(_) => {}
            }
        }
        while self.peek_char().is_some_and(is_id_continue) {
            self.bump();
        }
        Ok(Token { tok: Tok::Regex, start: slash.start, end: self.pos, pos: slash.pos, nl_before: slash.nl_before })
    }

    fn read_punct(&mut self) -> Result<Tok, ParseError> {
        let rest = &self.src[self.pos..];
        for p in PUNCTS {
            if rest.starts_with(p) {
                // `a?.5:b` is a conditional, not optional chaining.
                if *p == "?." && rest[2..].chars().next().is_some_and(|c| c.is_ascii_digit()) {
                    continue;
                }
                self.pos += p.len();
                return Ok(Tok::Punct(p));
            }
        }
        let c = self.peek_char().unwrap_or('\0');
        Err(self.error(format!("unexpected character {c:?}")))
    }
}
