//! Recursive-descent parser for the supported JavaScript subset.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::*;
use super::lexer::{Lexer, Tok, Token};
use super::ParseError;

const RESERVED: &[&str] = &[
    "break",
    "case",
    "catch",
    "class",
    "const",
    "continue",
    "debugger",
    "default",
    "delete",
    "do",
    "else",
    "export",
    "extends",
    "finally",
    "for",
    "function",
    "if",
    "import",
    "in",
    "instanceof",
    "new",
    "return",
    "super",
    "switch",
    "this",
    "throw",
    "try",
    "typeof",
    "var",
    "void",
    "while",
    "with",
    "null",
    "true",
    "false",
    "enum",
];

fn is_reserved(name: &str) -> bool {
    RESERVED.contains(&name)
}

fn binary_precedence(tok: &Tok, no_in: bool) -> Option<(u8, &'static str)> {
    let op = match tok {
        Tok::Punct(p) => *p,
        Tok::Ident(name) if name == "instanceof" => "instanceof",
        Tok::Ident(name) if name == "in" && !no_in => "in",
        _ => return None,
    };
    let prec = match op {
        "??" => 1,
        "||" => 2,
        "&&" => 3,
        "|" => 4,
        "^" => 5,
        "&" => 6,
        "==" | "!=" | "===" | "!==" => 7,
        "<" | ">" | "<=" | ">=" | "instanceof" | "in" => 8,
        "<<" | ">>" | ">>>" => 9,
        "+" | "-" => 10,
        "*" | "/" | "%" => 11,
        "**" => 12,
        _ => return None,
    };
    Some((prec, op))
}

fn is_assign_op(tok: &Tok) -> Option<&'static str> {
    match tok {
        Tok::Punct(
            p @ ("=" | "+=" | "-=" | "*=" | "/=" | "%=" | "**=" | "<<=" | ">>=" | ">>>=" | "&=" | "|=" | "^=" | "&&="
            | "||=" | "??="),
        ) => Some(p),
        _ => None,
    }
}

#[derive(Clone, Copy, Default)]
struct FnContext {
    is_async: bool,
    is_generator: bool,
    in_function: bool,
}

struct Checkpoint<'a> {
    lexer: Lexer<'a>,
    cur: Token,
    exprs: usize,
    funcs: usize,
    classes: usize,
}

pub(crate) struct Parser<'a> {
    lexer: Lexer<'a>,
    cur: Token,
    tree: SyntaxTree,
    ctx: FnContext,
    no_in: bool,
    depth: u32,
}

/// Recursion budget for nested statements and expressions.
const MAX_DEPTH: u32 = 256;

impl<'a> Parser<'a> {
    pub fn new(src: &'a str, file: &str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let cur = lexer.next_token()?;
        let tree = SyntaxTree { file: file.to_string(), ..SyntaxTree::default() };
        Ok(Parser { lexer, cur, tree, ctx: FnContext::default(), no_in: false, depth: 0 })
    }

    pub fn parse_program(mut self) -> Result<SyntaxTree, ParseError> {
        let mut body = Vec::new();
        while self.cur.tok != Tok::Eof {
            body.push(self.statement()?);
        }
        self.tree.body = body;
        Ok(self.tree)
    }

    // ---- token helpers ----

    fn advance(&mut self) -> Result<Token, ParseError> {
        let next = self.lexer.next_token()?;
        Ok(core::mem::replace(&mut self.cur, next))
    }

    fn peek(&self) -> Result<Token, ParseError> {
        self.lexer.clone().next_token()
    }

    fn peek2(&self) -> Result<(Token, Token), ParseError> {
        let mut lexer = self.lexer.clone();
        let first = lexer.next_token()?;
        let second = lexer.next_token()?;
        Ok((first, second))
    }

    fn error_at(&self, tok: &Token, message: impl Into<String>) -> ParseError {
        ParseError { line: tok.pos.line, column: tok.pos.column, message: message.into() }
    }

    fn descend(&mut self) -> Result<(), ParseError> {
        if self.depth >= MAX_DEPTH {
            return Err(self.error_at(&self.cur, "nesting too deep"));
        }
        self.depth += 1;
        Ok(())
    }

    fn unexpected(&self) -> ParseError {
        let what = match &self.cur.tok {
            Tok::Eof => "end of input".to_string(),
            Tok::Ident(name) => format!("'{name}'"),
            Tok::Punct(p) => format!("'{p}'"),
            Tok::Str(_) => "string".to_string(),
            Tok::Num => "number".to_string(),
            Tok::Template { .. } => "template".to_string(),
            Tok::Regex => "regular expression".to_string(),
            Tok::PrivateName(name) => format!("'#{name}'"),
        };
        self.error_at(&self.cur, format!("unexpected {what}"))
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.cur.tok, Tok::Punct(q) if q == p)
    }

    fn is_word(&self, word: &str) -> bool {
        matches!(&self.cur.tok, Tok::Ident(name) if name == word)
    }

    fn eat_punct(&mut self, p: &str) -> Result<bool, ParseError> {
        if self.is_punct(p) {
            self.advance()?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<Token, ParseError> {
        if self.is_punct(p) {
            self.advance()
        } else {
            Err(self.error_at(&self.cur, format!("expected '{p}', found {}", self.describe())))
        }
    }

    fn expect_word(&mut self, word: &str) -> Result<(), ParseError> {
        if self.is_word(word) {
            self.advance()?;
            Ok(())
        } else {
            Err(self.error_at(&self.cur, format!("expected '{word}', found {}", self.describe())))
        }
    }

    fn describe(&self) -> String {
        match &self.cur.tok {
            Tok::Punct(p) => format!("'{p}'"),
            Tok::Ident(name) => format!("'{name}'"),
            Tok::Eof => "end of input".to_string(),
            _ => "literal".to_string(),
        }
    }

    fn consume_semicolon(&mut self) -> Result<(), ParseError> {
        if self.eat_punct(";")? {
            return Ok(());
        }
        if self.is_punct("}") || self.cur.tok == Tok::Eof || self.cur.nl_before {
            return Ok(());
        }
        Err(self.unexpected())
    }

    fn checkpoint(&self) -> Checkpoint<'a> {
        Checkpoint {
            lexer: self.lexer.clone(),
            cur: self.cur.clone(),
            exprs: self.tree.exprs.len(),
            funcs: self.tree.funcs.len(),
            classes: self.tree.classes.len(),
        }
    }

    fn restore(&mut self, cp: Checkpoint<'a>) {
        self.lexer = cp.lexer;
        self.cur = cp.cur;
        self.tree.exprs.truncate(cp.exprs);
        self.tree.funcs.truncate(cp.funcs);
        self.tree.classes.truncate(cp.classes);
    }

    fn alloc(&mut self, kind: ExprKind, pos: Pos) -> ExprId {
        self.tree.exprs.push(Expr { kind, pos });
        ExprId(self.tree.exprs.len() as u32 - 1)
    }

    fn binding_ident(&mut self) -> Result<Ident, ParseError> {
        match &self.cur.tok {
            Tok::Ident(name) if !is_reserved(name) => {
                let ident = Ident { name: name.clone(), pos: self.cur.pos };
                self.advance()?;
                Ok(ident)
            }
            _ => Err(self.unexpected()),
        }
    }

    /// Property name after `.`: any identifier name, keywords included.
    fn property_name(&mut self) -> Result<(String, Pos), ParseError> {
        match &self.cur.tok {
            Tok::Ident(name) => {
                let out = (name.clone(), self.cur.pos);
                self.advance()?;
                Ok(out)
            }
            _ => Err(self.unexpected()),
        }
    }

    fn with_no_in<T>(
        &mut self,
        no_in: bool,
        f: impl FnOnce(&mut Self) -> Result<T, ParseError>,
    ) -> Result<T, ParseError> {
        let saved = core::mem::replace(&mut self.no_in, no_in);
        let out = f(self);
        self.no_in = saved;
        out
    }

    // ---- statements ----

    fn statement(&mut self) -> Result<Stmt, ParseError> {
        self.descend()?;
        let out = self.statement_inner();
        self.depth -= 1;
        out
    }

    // A thin dispatcher for the same reason as `primary`.
    fn statement_inner(&mut self) -> Result<Stmt, ParseError> {
        const KEYWORDS: &[&str] = &[
            "var", "const", "function", "class", "if", "for", "while", "do", "return", "throw", "try", "switch",
            "break", "continue", "debugger", "with", "export",
        ];
        let keyword = match &self.cur.tok {
            Tok::Punct("{") => return Ok(Stmt::Block(self.block()?)),
            Tok::Punct(";") => {
                self.advance()?;
                return Ok(Stmt::Empty);
            }
            Tok::Ident(word) => KEYWORDS.iter().copied().find(|k| k == word),
            _ => return self.expression_statement(),
        };
        match keyword {
            Some("var") => self.var_statement(VarKind::Var),
            Some("const") => self.var_statement(VarKind::Const),
            Some("function") => self.function_declaration(false),
            Some("class") => Ok(Stmt::ClassDecl(self.class(true)?)),
            Some("if") => self.if_statement(),
            Some("for") => self.for_statement(),
            Some("try") => self.try_statement(),
            Some("switch") => self.switch_statement(),
            Some("export") => self.export_declaration(),
            Some("while" | "do" | "with") => self.loop_or_with_statement(),
            Some(_) => self.jump_statement(),
            None => self.contextual_statement(),
        }
    }

    #[inline(never)]
    fn loop_or_with_statement(&mut self) -> Result<Stmt, ParseError> {
        if self.is_word("do") {
            self.advance()?;
            let body = Box::new(self.statement()?);
            self.expect_word("while")?;
            self.expect_punct("(")?;
            let test = self.expression()?;
            self.expect_punct(")")?;
            // `do ... while (x)` may be followed by a statement on the same line.
            self.eat_punct(";")?;
            return Ok(Stmt::DoWhile { body, test });
        }
        let is_while = self.is_word("while");
        self.advance()?;
        self.expect_punct("(")?;
        let test = self.expression()?;
        self.expect_punct(")")?;
        let body = Box::new(self.statement()?);
        Ok(if is_while { Stmt::While { test, body } } else { Stmt::With { object: test, body } })
    }

    #[inline(never)]
    fn jump_statement(&mut self) -> Result<Stmt, ParseError> {
        let Tok::Ident(word) = &self.cur.tok else { return Err(self.unexpected()) };
        let word = word.clone();
        self.advance()?;
        let stmt = match word.as_str() {
            "return" => {
                let arg = if self.is_punct(";") || self.is_punct("}") || self.cur.tok == Tok::Eof || self.cur.nl_before
                {
                    None
                } else {
                    Some(self.expression()?)
                };
                Stmt::Return(arg)
            }
            "throw" => {
                if self.cur.nl_before {
                    return Err(self.error_at(&self.cur, "line break after throw"));
                }
                Stmt::Throw(self.expression()?)
            }
            "break" | "continue" => {
                if let Tok::Ident(_) = self.cur.tok {
                    if !self.cur.nl_before {
                        self.advance()?;
                    }
                }
                if word == "break" {
                    Stmt::Break
                } else {
                    Stmt::Continue
                }
            }
            _ => Stmt::Debugger,
        };
        self.consume_semicolon()?;
        Ok(stmt)
    }

    /// Statements introduced by a word that is not always a keyword:
    /// `let`, `async`, `import`, labels, or plain expressions.
    #[inline(never)]
    fn contextual_statement(&mut self) -> Result<Stmt, ParseError> {
        let Tok::Ident(word) = &self.cur.tok else { return self.expression_statement() };
        match word.as_str() {
            "let" if self.let_starts_declaration()? => self.var_statement(VarKind::Let),
            "async" if self.async_function_ahead()? => {
                self.advance()?;
                self.function_declaration(true)
            }
            "import" if !matches!(self.peek()?.tok, Tok::Punct("(" | ".")) => self.import_declaration(),
            w if !is_reserved(w) && matches!(self.peek()?.tok, Tok::Punct(":")) => {
                self.advance()?;
                self.advance()?;
                Ok(Stmt::Labeled(Box::new(self.statement()?)))
            }
            _ => self.expression_statement(),
        }
    }

    fn expression_statement(&mut self) -> Result<Stmt, ParseError> {
        let expr = self.expression()?;
        self.consume_semicolon()?;
        Ok(Stmt::Expr(expr))
    }

    fn let_starts_declaration(&self) -> Result<bool, ParseError> {
        let next = self.peek()?;
        Ok(match &next.tok {
            Tok::Punct("[" | "{") => true,
            Tok::Ident(name) => !matches!(name.as_str(), "in" | "instanceof" | "of"),
            _ => false,
        })
    }

    fn async_function_ahead(&self) -> Result<bool, ParseError> {
        let next = self.peek()?;
        Ok(!next.nl_before && matches!(&next.tok, Tok::Ident(w) if w == "function"))
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect_punct("{")?;
        let mut body = Vec::new();
        while !self.is_punct("}") {
            if self.cur.tok == Tok::Eof {
                return Err(self.unexpected());
            }
            body.push(self.statement()?);
        }
        self.advance()?;
        Ok(body)
    }

    fn var_statement(&mut self, kind: VarKind) -> Result<Stmt, ParseError> {
        self.advance()?;
        let decls = self.declarators()?;
        self.consume_semicolon()?;
        Ok(Stmt::Var(kind, decls))
    }

    fn declarators(&mut self) -> Result<Vec<Declarator>, ParseError> {
        let mut decls = Vec::new();
        loop {
            let target = self.binding_target()?;
            let init = if self.eat_punct("=")? { Some(self.assignment()?) } else { None };
            decls.push(Declarator { target, init });
            if !self.eat_punct(",")? {
                return Ok(decls);
            }
        }
    }

    fn function_declaration(&mut self, is_async: bool) -> Result<Stmt, ParseError> {
        let func = self.function(is_async, true)?;
        Ok(Stmt::FunctionDecl(func))
    }

    fn if_statement(&mut self) -> Result<Stmt, ParseError> {
        self.advance()?;
        self.expect_punct("(")?;
        let test = self.expression()?;
        self.expect_punct(")")?;
        let consequent = Box::new(self.statement()?);
        let alternate = if self.is_word("else") {
            self.advance()?;
            Some(Box::new(self.statement()?))
        } else {
            None
        };
        Ok(Stmt::If { test, consequent, alternate })
    }

    fn for_statement(&mut self) -> Result<Stmt, ParseError> {
        self.advance()?;
        if self.is_word("await") {
            self.advance()?;
        }
        self.expect_punct("(")?;
        let var_kind = match &self.cur.tok {
            Tok::Ident(w) if w == "var" => Some(VarKind::Var),
            Tok::Ident(w) if w == "const" => Some(VarKind::Const),
            Tok::Ident(w) if w == "let" && self.let_starts_declaration()? => Some(VarKind::Let),
            _ => None,
        };
        let init = if self.is_punct(";") {
            None
        } else if let Some(kind) = var_kind {
            self.advance()?;
            let decls = self.with_no_in(true, |p| p.declarators())?;
            if decls.len() == 1 && (self.is_word("of") || self.is_word("in")) {
                let is_of = self.is_word("of");
                self.advance()?;
                let right = if is_of { self.assignment()? } else { self.expression()? };
                self.expect_punct(")")?;
                let body = Box::new(self.statement()?);
                let decl = decls.into_iter().next().expect("one declarator");
                let head = ForHead::Var(kind, decl.target);
                return Ok(if is_of { Stmt::ForOf { head, right, body } } else { Stmt::ForIn { head, right, body } });
            }
            Some(ForInit::Var(kind, decls))
        } else {
            let expr = self.with_no_in(true, |p| p.expression())?;
            if self.is_word("of") || self.is_word("in") {
                let is_of = self.is_word("of");
                self.advance()?;
                let target = self.reinterpret_as_pattern(expr)?;
                let right = if is_of { self.assignment()? } else { self.expression()? };
                self.expect_punct(")")?;
                let body = Box::new(self.statement()?);
                let head = ForHead::Target(target);
                return Ok(if is_of { Stmt::ForOf { head, right, body } } else { Stmt::ForIn { head, right, body } });
            }
            Some(ForInit::Expr(expr))
        };
        self.expect_punct(";")?;
        let test = if self.is_punct(";") { None } else { Some(self.expression()?) };
        self.expect_punct(";")?;
        let update = if self.is_punct(")") { None } else { Some(self.expression()?) };
        self.expect_punct(")")?;
        let body = Box::new(self.statement()?);
        Ok(Stmt::For { init, test, update, body })
    }

    fn try_statement(&mut self) -> Result<Stmt, ParseError> {
        self.advance()?;
        let block = self.block()?;
        let mut param = None;
        let mut handler = None;
        let mut finalizer = None;
        if self.is_word("catch") {
            self.advance()?;
            if self.eat_punct("(")? {
                param = Some(self.binding_target()?);
                self.expect_punct(")")?;
            }
            handler = Some(self.block()?);
        }
        if self.is_word("finally") {
            self.advance()?;
            finalizer = Some(self.block()?);
        }
        if handler.is_none() && finalizer.is_none() {
            return Err(self.error_at(&self.cur, "try without catch or finally"));
        }
        Ok(Stmt::Try { block, param, handler, finalizer })
    }

    fn switch_statement(&mut self) -> Result<Stmt, ParseError> {
        self.advance()?;
        self.expect_punct("(")?;
        let discriminant = self.expression()?;
        self.expect_punct(")")?;
        self.expect_punct("{")?;
        let mut cases = Vec::new();
        while !self.eat_punct("}")? {
            let test = if self.is_word("case") {
                self.advance()?;
                Some(self.expression()?)
            } else {
                self.expect_word("default")?;
                None
            };
            self.expect_punct(":")?;
            let mut body = Vec::new();
            while !(self.is_word("case") || self.is_word("default") || self.is_punct("}")) {
                if self.cur.tok == Tok::Eof {
                    return Err(self.unexpected());
                }
                body.push(self.statement()?);
            }
            cases.push(SwitchCase { test, body });
        }
        Ok(Stmt::Switch { discriminant, cases })
    }

    fn module_specifier(&mut self) -> Result<String, ParseError> {
        match &self.cur.tok {
            Tok::Str(s) => {
                let s = s.clone();
                self.advance()?;
                // Import attributes: `with { type: 'json' }`.
                if (self.is_word("with") || self.is_word("assert")) && !self.cur.nl_before {
                    self.advance()?;
                    self.object_literal()?;
                }
                Ok(s)
            }
            _ => Err(self.unexpected()),
        }
    }

    /// Identifier or string used as an imported/exported name.
    fn module_export_name(&mut self) -> Result<String, ParseError> {
        match &self.cur.tok {
            Tok::Ident(name) | Tok::Str(name) => {
                let name = name.clone();
                self.advance()?;
                Ok(name)
            }
            _ => Err(self.unexpected()),
        }
    }

    fn import_declaration(&mut self) -> Result<Stmt, ParseError> {
        let pos = self.cur.pos;
        self.advance()?;
        let mut specs = Vec::new();
        if let Tok::Str(_) = self.cur.tok {
            let source = self.module_specifier()?;
            self.consume_semicolon()?;
            return Ok(Stmt::Import { source, specs, pos });
        }
        if let Tok::Ident(name) = &self.cur.tok {
            if !is_reserved(name) {
                specs.push(ImportSpec::Default(self.binding_ident()?));
                if !self.eat_punct(",")? {
                    self.expect_word("from")?;
                    let source = self.module_specifier()?;
                    self.consume_semicolon()?;
                    return Ok(Stmt::Import { source, specs, pos });
                }
            }
        }
        if self.eat_punct("*")? {
            self.expect_word("as")?;
            specs.push(ImportSpec::Namespace(self.binding_ident()?));
        } else {
            self.expect_punct("{")?;
            while !self.eat_punct("}")? {
                let imported = self.module_export_name()?;
                let local = if self.is_word("as") {
                    self.advance()?;
                    self.binding_ident()?
                } else {
                    Ident { name: imported.clone(), pos: self.cur.pos }
                };
                specs.push(ImportSpec::Named { imported, local });
                if !self.eat_punct(",")? {
                    self.expect_punct("}")?;
                    break;
                }
            }
        }
        self.expect_word("from")?;
        let source = self.module_specifier()?;
        self.consume_semicolon()?;
        Ok(Stmt::Import { source, specs, pos })
    }

    fn export_declaration(&mut self) -> Result<Stmt, ParseError> {
        self.advance()?;
        if self.is_word("default") {
            self.advance()?;
            if self.is_word("function") || (self.is_word("async") && self.async_function_ahead()?) {
                let is_async = self.is_word("async");
                if is_async {
                    self.advance()?;
                }
                let named = match self.peek()?.tok {
                    Tok::Ident(_) => true,
                    Tok::Punct("*") => matches!(self.peek2()?.1.tok, Tok::Ident(_)),
                    _ => false,
                };
                if named {
                    return Ok(Stmt::Export(Box::new(self.function_declaration(is_async)?)));
                }
                let pos = self.cur.pos;
                let func = self.function(is_async, false)?;
                let expr = self.alloc(ExprKind::Function(func), pos);
                self.eat_punct(";")?;
                return Ok(Stmt::ExportDefault(expr));
            }
            if self.is_word("class") && matches!(self.peek()?.tok, Tok::Ident(ref w) if w != "extends") {
                let class = self.class(true)?;
                return Ok(Stmt::Export(Box::new(Stmt::ClassDecl(class))));
            }
            let expr = self.assignment()?;
            self.consume_semicolon()?;
            return Ok(Stmt::ExportDefault(expr));
        }
        if self.eat_punct("*")? {
            if self.is_word("as") {
                self.advance()?;
                self.module_export_name()?;
            }
            self.expect_word("from")?;
            self.module_specifier()?;
            self.consume_semicolon()?;
            return Ok(Stmt::ExportNames);
        }
        if self.eat_punct("{")? {
            while !self.eat_punct("}")? {
                self.module_export_name()?;
                if self.is_word("as") {
                    self.advance()?;
                    self.module_export_name()?;
                }
                if !self.eat_punct(",")? {
                    self.expect_punct("}")?;
                    break;
                }
            }
            if self.is_word("from") {
                self.advance()?;
                self.module_specifier()?;
            }
            self.consume_semicolon()?;
            return Ok(Stmt::ExportNames);
        }
        let decl = self.statement()?;
        match decl {
            Stmt::Var(..) | Stmt::FunctionDecl(_) | Stmt::ClassDecl(_) => Ok(Stmt::Export(Box::new(decl))),
            _ => Err(self.error_at(&self.cur, "expected declaration after export")),
        }
    }

    // ---- functions and classes ----

    /// Parses `function [*] [name] (params) { body }` starting at `function`.
    fn function(&mut self, is_async: bool, require_name: bool) -> Result<FuncId, ParseError> {
        let pos = self.cur.pos;
        self.expect_word("function")?;
        let is_generator = self.eat_punct("*")?;
        let name = match &self.cur.tok {
            Tok::Ident(n) if !is_reserved(n) => Some(self.binding_ident()?),
            _ if require_name => return Err(self.unexpected()),
            _ => None,
        };
        let ctx = FnContext { is_async, is_generator, in_function: true };
        self.function_rest(name, ctx, pos)
    }

    /// Parameter list and block body.
    fn function_rest(&mut self, name: Option<Ident>, ctx: FnContext, pos: Pos) -> Result<FuncId, ParseError> {
        let saved = core::mem::replace(&mut self.ctx, ctx);
        let result = (|| {
            let params = self.params()?;
            let body = self.with_no_in(false, |p| p.block())?;
            Ok((params, body))
        })();
        self.ctx = saved;
        let (params, body) = result?;
        self.tree.funcs.push(Function { name, params, body: FuncBody::Block(body), is_arrow: false, pos });
        Ok(FuncId(self.tree.funcs.len() as u32 - 1))
    }

    fn params(&mut self) -> Result<Vec<Param>, ParseError> {
        self.expect_punct("(")?;
        let mut params = Vec::new();
        while !self.eat_punct(")")? {
            if self.eat_punct("...")? {
                params.push(Param::Rest(self.binding_target()?));
                self.eat_punct(",")?;
                self.expect_punct(")")?;
                break;
            }
            params.push(Param::Pattern(self.binding_element()?));
            if !self.eat_punct(",")? {
                self.expect_punct(")")?;
                break;
            }
        }
        Ok(params)
    }

    fn class(&mut self, is_declaration: bool) -> Result<ClassId, ParseError> {
        let pos = self.cur.pos;
        self.expect_word("class")?;
        let name = match &self.cur.tok {
            Tok::Ident(n) if n != "extends" && !is_reserved(n) => Some(self.binding_ident()?),
            _ if is_declaration => return Err(self.unexpected()),
            _ => None,
        };
        let superclass = if self.is_word("extends") {
            self.advance()?;
            Some(self.lhs_expression()?)
        } else {
            None
        };
        self.expect_punct("{")?;
        let mut members = Vec::new();
        while !self.eat_punct("}")? {
            if self.eat_punct(";")? {
                continue;
            }
            members.push(self.class_member()?);
        }
        self.tree.classes.push(Class { name, superclass, members, pos });
        Ok(ClassId(self.tree.classes.len() as u32 - 1))
    }

    fn class_member(&mut self) -> Result<ClassMember, ParseError> {
        let mut is_static = false;
        if self.is_word("static") {
            let next = self.peek()?;
            if matches!(next.tok, Tok::Punct("{")) {
                self.advance()?;
                let saved = core::mem::replace(
                    &mut self.ctx,
                    FnContext { is_async: false, is_generator: false, in_function: true },
                );
                let body = self.block();
                self.ctx = saved;
                return Ok(ClassMember::StaticBlock(body?));
            }
            if !matches!(next.tok, Tok::Punct("(" | "=" | ";" | "}")) {
                self.advance()?;
                is_static = true;
            }
        }
        let (is_async, is_generator) = self.method_modifiers()?;
        let accessor = self.accessor_modifier()?;
        let key_pos = self.cur.pos;
        let key = self.property_key()?;
        if self.is_punct("(") {
            let ctx = FnContext { is_async, is_generator, in_function: true };
            let func = self.function_rest(None, ctx, key_pos)?;
            return Ok(ClassMember::Method { key, func, is_static });
        }
        if is_async || is_generator || accessor {
            return Err(self.unexpected());
        }
        let value = if self.eat_punct("=")? {
            let saved = core::mem::replace(
                &mut self.ctx,
                FnContext { is_async: false, is_generator: false, in_function: true },
            );
            let value = self.assignment();
            self.ctx = saved;
            Some(value?)
        } else {
            None
        };
        self.consume_semicolon()?;
        Ok(ClassMember::Field { key, value, is_static })
    }

    /// `async` and `*` prefixes of object and class methods.
    fn method_modifiers(&mut self) -> Result<(bool, bool), ParseError> {
        let mut is_async = false;
        if self.is_word("async") {
            let next = self.peek()?;
            if !next.nl_before && !matches!(next.tok, Tok::Punct("(" | "=" | ";" | "}" | ":" | ",")) {
                self.advance()?;
                is_async = true;
            }
        }
        let is_generator = self.eat_punct("*")?;
        Ok((is_async, is_generator))
    }

    /// `get` / `set` prefixes.
    fn accessor_modifier(&mut self) -> Result<bool, ParseError> {
        if self.is_word("get") || self.is_word("set") {
            let next = self.peek()?;
            if !matches!(next.tok, Tok::Punct("(" | "=" | ";" | "}" | ":" | ",")) {
                self.advance()?;
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn property_key(&mut self) -> Result<PropKey, ParseError> {
        let tok = self.cur.clone();
        match &tok.tok {
            Tok::Ident(name) | Tok::Str(name) => {
                self.advance()?;
                Ok(PropKey::Named(name.clone()))
            }
            Tok::Num => {
                self.advance()?;
                Ok(PropKey::Named(self.lexer.slice(tok.start, tok.end).to_string()))
            }
            Tok::PrivateName(name) => {
                self.advance()?;
                Ok(PropKey::Private(name.clone()))
            }
            Tok::Punct("[") => {
                self.advance()?;
                let expr = self.with_no_in(false, |p| p.assignment())?;
                self.expect_punct("]")?;
                Ok(PropKey::Computed(expr))
            }
            _ => Err(self.unexpected()),
        }
    }

    // ---- patterns ----

    fn binding_target(&mut self) -> Result<Pattern, ParseError> {
        match self.cur.tok {
            Tok::Punct("{") => self.object_pattern(),
            Tok::Punct("[") => self.array_pattern(),
            _ => Ok(Pattern::Ident(self.binding_ident()?)),
        }
    }

    /// Binding target with optional default value.
    fn binding_element(&mut self) -> Result<Pattern, ParseError> {
        let target = self.binding_target()?;
        if self.eat_punct("=")? {
            let value = self.with_no_in(false, |p| p.assignment())?;
            return Ok(Pattern::Default { target: Box::new(target), value });
        }
        Ok(target)
    }

    fn object_pattern(&mut self) -> Result<Pattern, ParseError> {
        self.expect_punct("{")?;
        let mut props = Vec::new();
        let mut rest = None;
        while !self.eat_punct("}")? {
            if self.eat_punct("...")? {
                rest = Some(Box::new(self.binding_target()?));
                self.eat_punct(",")?;
                self.expect_punct("}")?;
                break;
            }
            let key_tok = self.cur.clone();
            let key = self.property_key()?;
            let value = if self.eat_punct(":")? {
                self.binding_element()?
            } else {
                let name = match (&key, &key_tok.tok) {
                    (PropKey::Named(name), Tok::Ident(_)) if !is_reserved(name) => name.clone(),
                    _ => return Err(self.error_at(&key_tok, "invalid shorthand property pattern")),
                };
                let target = Pattern::Ident(Ident { name, pos: key_tok.pos });
                if self.eat_punct("=")? {
                    let value = self.with_no_in(false, |p| p.assignment())?;
                    Pattern::Default { target: Box::new(target), value }
                } else {
                    target
                }
            };
            props.push(PatternProp { key, value });
            if !self.eat_punct(",")? {
                self.expect_punct("}")?;
                break;
            }
        }
        Ok(Pattern::Object { props, rest })
    }

    fn array_pattern(&mut self) -> Result<Pattern, ParseError> {
        self.expect_punct("[")?;
        let mut elems = Vec::new();
        let mut rest = None;
        loop {
            if self.eat_punct("]")? {
                break;
            }
            if self.eat_punct(",")? {
                elems.push(None);
                continue;
            }
            if self.eat_punct("...")? {
                rest = Some(Box::new(self.binding_target()?));
                self.eat_punct(",")?;
                self.expect_punct("]")?;
                break;
            }
            elems.push(Some(self.binding_element()?));
            if !self.eat_punct(",")? {
                self.expect_punct("]")?;
                break;
            }
        }
        Ok(Pattern::Array { elems, rest })
    }

    /// Reinterprets an already parsed expression as an assignment target.
    fn reinterpret_as_pattern(&mut self, expr: ExprId) -> Result<Pattern, ParseError> {
        let e = self.tree.expr(expr).clone();
        match e.kind {
            ExprKind::Ident(name) => Ok(Pattern::Ident(Ident { name, pos: e.pos })),
            ExprKind::Member { .. } | ExprKind::Index { .. } | ExprKind::PrivateMember { .. } => {
                Ok(Pattern::Expr(expr))
            }
            ExprKind::Assign { op: "=", target, value } => Ok(Pattern::Default { target, value }),
            ExprKind::Array(items) => {
                let mut elems = Vec::new();
                let mut rest = None;
                let count = items.len();
                for (i, item) in items.into_iter().enumerate() {
                    match item {
                        None => elems.push(None),
                        Some(Arg::Expr(e)) => elems.push(Some(self.reinterpret_as_pattern(e)?)),
                        Some(Arg::Spread(e)) if i + 1 == count => {
                            rest = Some(Box::new(self.reinterpret_as_pattern(e)?));
                        }
                        Some(Arg::Spread(_)) => return Err(ParseError::at(e.pos, "rest element must be last")),
                    }
                }
                Ok(Pattern::Array { elems, rest })
            }
            ExprKind::Object(items) => {
                let mut props = Vec::new();
                let mut rest = None;
                for item in items {
                    match item {
                        Prop::KeyValue { key, value } => {
                            props.push(PatternProp { key, value: self.reinterpret_as_pattern(value)? });
                        }
                        Prop::Shorthand { name, value } => {
                            let pos = self.tree.expr(value).pos;
                            props.push(PatternProp {
                                key: PropKey::Named(name.clone()),
                                value: Pattern::Ident(Ident { name, pos }),
                            });
                        }
                        Prop::Spread(e) => rest = Some(Box::new(self.reinterpret_as_pattern(e)?)),
                        Prop::Method { .. } => return Err(ParseError::at(e.pos, "invalid destructuring target")),
                    }
                }
                Ok(Pattern::Object { props, rest })
            }
            _ => Err(ParseError::at(e.pos, "invalid assignment target")),
        }
    }

    // ---- expressions ----

    pub(crate) fn expression(&mut self) -> Result<ExprId, ParseError> {
        let pos = self.cur.pos;
        let first = self.assignment()?;
        if !self.is_punct(",") {
            return Ok(first);
        }
        let mut items = alloc::vec![first];
        while self.eat_punct(",")? {
            items.push(self.assignment()?);
        }
        Ok(self.alloc(ExprKind::Sequence(items), pos))
    }

    fn starts_expression(tok: &Token) -> bool {
        match &tok.tok {
            Tok::Ident(name) => !matches!(name.as_str(), "in" | "instanceof" | "of"),
            Tok::Num | Tok::Str(_) | Tok::Template { .. } | Tok::Regex | Tok::PrivateName(_) => true,
            Tok::Punct(p) => matches!(*p, "(" | "[" | "{" | "!" | "~" | "+" | "-" | "++" | "--" | "/" | "/="),
            Tok::Eof => false,
        }
    }

    fn assignment(&mut self) -> Result<ExprId, ParseError> {
        self.descend()?;
        let out = self.assignment_inner();
        self.depth -= 1;
        out
    }

    fn assignment_inner(&mut self) -> Result<ExprId, ParseError> {
        if let Some(arrow) = self.try_arrow()? {
            return Ok(arrow);
        }
        if self.is_word("yield") && self.ctx.is_generator {
            let pos = self.cur.pos;
            self.advance()?;
            let delegate = !self.cur.nl_before && self.eat_punct("*")?;
            let arg = if delegate || (!self.cur.nl_before && Self::starts_expression(&self.cur)) {
                Some(self.assignment()?)
            } else {
                None
            };
            return Ok(self.alloc(ExprKind::Yield(arg), pos));
        }
        let pos = self.cur.pos;
        let left = self.conditional()?;
        if let Some(op) = is_assign_op(&self.cur.tok) {
            let target = if op == "=" {
                self.reinterpret_as_pattern(left)?
            } else {
                match self.tree.expr(left).kind {
                    ExprKind::Ident(_)
                    | ExprKind::Member { .. }
                    | ExprKind::Index { .. }
                    | ExprKind::PrivateMember { .. } => self.reinterpret_as_pattern(left)?,
                    _ => return Err(self.error_at(&self.cur, "invalid assignment target")),
                }
            };
            self.advance()?;
            let value = self.assignment()?;
            return Ok(self.alloc(ExprKind::Assign { op, target: Box::new(target), value }, pos));
        }
        Ok(left)
    }

    /// Recognizes arrow functions; restores the parser when the lookahead fails.
    fn try_arrow(&mut self) -> Result<Option<ExprId>, ParseError> {
        let mut is_async = false;
        match &self.cur.tok {
            Tok::Ident(name) if name == "async" => {
                let (next, after) = self.peek2()?;
                if next.nl_before {
                    return Ok(None);
                }
                match &next.tok {
                    Tok::Ident(n) if !is_reserved(n) && matches!(after.tok, Tok::Punct("=>")) => {
                        is_async = true;
                    }
                    Tok::Punct("(") => is_async = true,
                    _ => {}
                }
                if !is_async {
                    if matches!(next.tok, Tok::Punct("=>")) {
                        return self.single_param_arrow(false).map(Some);
                    }
                    return Ok(None);
                }
            }
            Tok::Ident(name) if !is_reserved(name) => {
                let next = self.peek()?;
                if matches!(next.tok, Tok::Punct("=>")) && !next.nl_before {
                    return self.single_param_arrow(false).map(Some);
                }
                return Ok(None);
            }
            Tok::Punct("(") => {}
            _ => return Ok(None),
        }
        let pos = self.cur.pos;
        let cp = self.checkpoint();
        if is_async {
            self.advance()?;
            if let Tok::Ident(_) = self.cur.tok {
                return self.single_param_arrow(true).map(Some);
            }
        }
        let params = match self.params() {
            Ok(params) if self.is_punct("=>") && !self.cur.nl_before => params,
            _ => {
                self.restore(cp);
                return Ok(None);
            }
        };
        self.advance()?;
        self.arrow_body(params, is_async, pos).map(Some)
    }

    fn single_param_arrow(&mut self, is_async: bool) -> Result<ExprId, ParseError> {
        let pos = self.cur.pos;
        let ident = self.binding_ident()?;
        self.expect_punct("=>")?;
        self.arrow_body(alloc::vec![Param::Pattern(Pattern::Ident(ident))], is_async, pos)
    }

    fn arrow_body(&mut self, params: Vec<Param>, is_async: bool, pos: Pos) -> Result<ExprId, ParseError> {
        let ctx = FnContext { is_async, is_generator: false, in_function: true };
        let saved = core::mem::replace(&mut self.ctx, ctx);
        let body = if self.is_punct("{") {
            self.with_no_in(false, |p| p.block()).map(FuncBody::Block)
        } else {
            self.assignment().map(FuncBody::Expr)
        };
        self.ctx = saved;
        self.tree.funcs.push(Function { name: None, params, body: body?, is_arrow: true, pos });
        let func = FuncId(self.tree.funcs.len() as u32 - 1);
        Ok(self.alloc(ExprKind::Function(func), pos))
    }

    fn conditional(&mut self) -> Result<ExprId, ParseError> {
        let pos = self.cur.pos;
        let test = self.binary(0)?;
        if !self.eat_punct("?")? {
            return Ok(test);
        }
        let consequent = self.with_no_in(false, |p| p.assignment())?;
        self.expect_punct(":")?;
        let alternate = self.assignment()?;
        Ok(self.alloc(ExprKind::Conditional { test, consequent, alternate }, pos))
    }

    fn binary(&mut self, min_prec: u8) -> Result<ExprId, ParseError> {
        let pos = self.cur.pos;
        let mut left = self.unary()?;
        while let Some((prec, op)) = binary_precedence(&self.cur.tok, self.no_in) {
            if prec <= min_prec {
                break;
            }
            self.advance()?;
            let right = if op == "**" { self.binary(prec - 1)? } else { self.binary(prec)? };
            let kind = if matches!(op, "&&" | "||" | "??") {
                ExprKind::Logical { op, left, right }
            } else {
                ExprKind::Binary { op, left, right }
            };
            left = self.alloc(kind, pos);
        }
        Ok(left)
    }

    fn await_is_operator(&self) -> Result<bool, ParseError> {
        if self.ctx.is_async {
            return Ok(true);
        }
        if self.ctx.in_function {
            return Ok(false);
        }
        // Top-level await in modules.
        let next = self.peek()?;
        Ok(!next.nl_before
            && Self::starts_expression(&next)
            && !matches!(next.tok, Tok::Punct("(" | "[" | "+" | "-" | "/" | "/=")))
    }

    fn unary(&mut self) -> Result<ExprId, ParseError> {
        self.descend()?;
        let out = self.unary_inner();
        self.depth -= 1;
        out
    }

    fn unary_inner(&mut self) -> Result<ExprId, ParseError> {
        let pos = self.cur.pos;
        let op = match &self.cur.tok {
            Tok::Punct(p @ ("!" | "~" | "+" | "-")) => Some(*p),
            Tok::Ident(w) if w == "typeof" => Some("typeof"),
            Tok::Ident(w) if w == "void" => Some("void"),
            Tok::Ident(w) if w == "delete" => Some("delete"),
            _ => None,
        };
        if let Some(op) = op {
            self.advance()?;
            let arg = self.unary()?;
            return Ok(self.alloc(ExprKind::Unary { op, arg }, pos));
        }
        if self.is_punct("++") || self.is_punct("--") {
            self.advance()?;
            let arg = self.unary()?;
            return Ok(self.alloc(ExprKind::Update { arg }, pos));
        }
        if self.is_word("await") && self.await_is_operator()? {
            self.advance()?;
            let arg = self.unary()?;
            return Ok(self.alloc(ExprKind::Await(arg), pos));
        }
        let expr = self.lhs_expression_with_calls()?;
        if (self.is_punct("++") || self.is_punct("--")) && !self.cur.nl_before {
            self.advance()?;
            return Ok(self.alloc(ExprKind::Update { arg: expr }, pos));
        }
        Ok(expr)
    }

    fn arguments(&mut self) -> Result<Vec<Arg>, ParseError> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        self.with_no_in(false, |p| {
            while !p.eat_punct(")")? {
                if p.eat_punct("...")? {
                    args.push(Arg::Spread(p.assignment()?));
                } else {
                    args.push(Arg::Expr(p.assignment()?));
                }
                if !p.eat_punct(",")? {
                    p.expect_punct(")")?;
                    break;
                }
            }
            Ok(())
        })?;
        Ok(args)
    }

    /// Member expression without call suffixes (used for `new` callees and `extends`).
    fn lhs_expression(&mut self) -> Result<ExprId, ParseError> {
        let base = if self.is_word("new") { self.new_expression()? } else { self.primary()? };
        self.suffixes(base, false)
    }

    fn lhs_expression_with_calls(&mut self) -> Result<ExprId, ParseError> {
        let base = if self.is_word("new") { self.new_expression()? } else { self.primary()? };
        self.suffixes(base, true)
    }

    fn new_expression(&mut self) -> Result<ExprId, ParseError> {
        let pos = self.cur.pos;
        self.expect_word("new")?;
        if self.eat_punct(".")? {
            self.property_name()?;
            return Ok(self.alloc(ExprKind::MetaProperty, pos));
        }
        let callee = self.lhs_expression()?;
        let args = if self.is_punct("(") { self.arguments()? } else { Vec::new() };
        Ok(self.alloc(ExprKind::New { callee, args }, pos))
    }

    fn suffixes(&mut self, mut expr: ExprId, allow_call: bool) -> Result<ExprId, ParseError> {
        let pos = self.tree.expr(expr).pos;
        loop {
            match &self.cur.tok {
                Tok::Punct(".") => {
                    self.advance()?;
                    expr = self.member_name(expr, false, pos)?;
                }
                Tok::Punct("?.") => {
                    self.advance()?;
                    if self.is_punct("(") {
                        let args = self.arguments()?;
                        expr = self.alloc(ExprKind::Call { callee: expr, args, optional: true }, pos);
                    } else if self.eat_punct("[")? {
                        let index = self.with_no_in(false, |p| p.expression())?;
                        self.expect_punct("]")?;
                        expr = self.alloc(ExprKind::Index { object: expr, index, optional: true }, pos);
                    } else {
                        expr = self.member_name(expr, true, pos)?;
                    }
                }
                Tok::Punct("[") => {
                    self.advance()?;
                    let index = self.with_no_in(false, |p| p.expression())?;
                    self.expect_punct("]")?;
                    expr = self.alloc(ExprKind::Index { object: expr, index, optional: false }, pos);
                }
                Tok::Punct("(") if allow_call => {
                    let args = self.arguments()?;
                    expr = self.alloc(ExprKind::Call { callee: expr, args, optional: false }, pos);
                }
                Tok::Template { .. } => {
                    let (_, exprs) = self.template()?;
                    expr = self.alloc(ExprKind::TaggedTemplate { tag: expr, exprs }, pos);
                }
                _ => return Ok(expr),
            }
        }
    }

    fn member_name(&mut self, object: ExprId, optional: bool, pos: Pos) -> Result<ExprId, ParseError> {
        if let Tok::PrivateName(name) = &self.cur.tok {
            let name = name.clone();
            self.advance()?;
            return Ok(self.alloc(ExprKind::PrivateMember { object, name }, pos));
        }
        let (property, property_pos) = self.property_name()?;
        Ok(self.alloc(ExprKind::Member { object, property, property_pos, optional }, pos))
    }

    /// Parses a template literal starting at the current template token.
    fn template(&mut self) -> Result<(Option<String>, Vec<ExprId>), ParseError> {
        let first = self.advance()?;
        let (cooked, mut tail) = match first.tok {
            Tok::Template { cooked, tail } => (cooked, tail),
            _ => return Err(self.error_at(&first, "expected template literal")),
        };
        let mut exprs = Vec::new();
        if tail {
            return Ok((Some(cooked), exprs));
        }
        while !tail {
            exprs.push(self.with_no_in(false, |p| p.expression())?);
            if !self.is_punct("}") {
                return Err(self.unexpected());
            }
            let closing = self.cur.clone();
            let chunk = self.lexer.continue_template(&closing)?;
            tail = matches!(chunk.tok, Tok::Template { tail: true, .. });
            self.cur = chunk;
            self.advance()?;
        }
        Ok((None, exprs))
    }

    // Kept as a thin dispatcher: it sits on the stack once per nesting
    // level, so the bulky arms live in their own frames.
    fn primary(&mut self) -> Result<ExprId, ParseError> {
        match &self.cur.tok {
            Tok::Punct("(") => self.parenthesized(),
            Tok::Punct("[") => self.array_literal(),
            Tok::Punct("{") => self.object_literal(),
            Tok::Ident(word) => match word.as_str() {
                "function" | "async" | "class" => self.function_or_class_expression(),
                "new" => self.new_expression(),
                "import" => self.import_expression(),
                _ => self.word_primary(),
            },
            Tok::Template { .. } => self.template_literal(),
            _ => self.literal_primary(),
        }
    }

    #[inline(never)]
    fn parenthesized(&mut self) -> Result<ExprId, ParseError> {
        self.advance()?;
        let expr = self.with_no_in(false, |p| p.expression())?;
        self.expect_punct(")")?;
        Ok(expr)
    }

    #[inline(never)]
    fn function_or_class_expression(&mut self) -> Result<ExprId, ParseError> {
        let pos = self.cur.pos;
        if self.is_word("function") {
            let func = self.function(false, false)?;
            Ok(self.alloc(ExprKind::Function(func), pos))
        } else if self.is_word("class") {
            let class = self.class(false)?;
            Ok(self.alloc(ExprKind::Class(class), pos))
        } else if self.async_function_ahead()? {
            self.advance()?;
            let func = self.function(true, false)?;
            Ok(self.alloc(ExprKind::Function(func), pos))
        } else {
            self.word_primary()
        }
    }

    #[inline(never)]
    fn import_expression(&mut self) -> Result<ExprId, ParseError> {
        let pos = self.cur.pos;
        self.advance()?;
        if self.eat_punct(".")? {
            self.property_name()?;
            return Ok(self.alloc(ExprKind::MetaProperty, pos));
        }
        self.expect_punct("(")?;
        let arg = self.with_no_in(false, |p| p.assignment())?;
        // Optional import attributes, then an optional trailing comma.
        if self.eat_punct(",")? && !self.is_punct(")") {
            self.with_no_in(false, |p| p.assignment())?;
            self.eat_punct(",")?;
        }
        self.expect_punct(")")?;
        Ok(self.alloc(ExprKind::DynamicImport(arg), pos))
    }

    #[inline(never)]
    fn template_literal(&mut self) -> Result<ExprId, ParseError> {
        let pos = self.cur.pos;
        let (cooked, exprs) = self.template()?;
        Ok(self.alloc(ExprKind::Template { cooked, exprs }, pos))
    }

    #[inline(never)]
    fn word_primary(&mut self) -> Result<ExprId, ParseError> {
        let pos = self.cur.pos;
        let Tok::Ident(word) = &self.cur.tok else { return Err(self.unexpected()) };
        let kind = match word.as_str() {
            "this" => ExprKind::This,
            "super" => ExprKind::Super,
            "null" => ExprKind::Null,
            "true" | "false" => ExprKind::Bool,
            w if is_reserved(w) => return Err(self.unexpected()),
            w => ExprKind::Ident(w.to_string()),
        };
        self.advance()?;
        Ok(self.alloc(kind, pos))
    }

    #[inline(never)]
    fn literal_primary(&mut self) -> Result<ExprId, ParseError> {
        let tok = self.cur.clone();
        let pos = tok.pos;
        let kind = match &tok.tok {
            Tok::Num => ExprKind::Number,
            Tok::Str(s) => ExprKind::Str(s.clone()),
            Tok::Punct("/" | "/=") => {
                self.cur = self.lexer.rescan_regex(&tok)?;
                ExprKind::Regex
            }
            Tok::Regex => ExprKind::Regex,
            // `#x in obj`
            Tok::PrivateName(_) => ExprKind::MetaProperty,
            _ => return Err(self.unexpected()),
        };
        self.advance()?;
        Ok(self.alloc(kind, pos))
    }

    fn array_literal(&mut self) -> Result<ExprId, ParseError> {
        let pos = self.cur.pos;
        self.expect_punct("[")?;
        let mut items = Vec::new();
        self.with_no_in(false, |p| {
            loop {
                if p.eat_punct("]")? {
                    break;
                }
                if p.eat_punct(",")? {
                    items.push(None);
                    continue;
                }
                if p.eat_punct("...")? {
                    items.push(Some(Arg::Spread(p.assignment()?)));
                } else {
                    items.push(Some(Arg::Expr(p.assignment()?)));
                }
                if !p.eat_punct(",")? {
                    p.expect_punct("]")?;
                    break;
                }
            }
            Ok(())
        })?;
        Ok(self.alloc(ExprKind::Array(items), pos))
    }

    fn object_literal(&mut self) -> Result<ExprId, ParseError> {
        let pos = self.cur.pos;
        self.expect_punct("{")?;
        let mut props = Vec::new();
        self.with_no_in(false, |p| {
            while !p.eat_punct("}")? {
                props.push(p.object_property()?);
                if !p.eat_punct(",")? {
                    p.expect_punct("}")?;
                    break;
                }
            }
            Ok(())
        })?;
        Ok(self.alloc(ExprKind::Object(props), pos))
    }

    fn object_property(&mut self) -> Result<Prop, ParseError> {
        if self.eat_punct("...")? {
            return Ok(Prop::Spread(self.assignment()?));
        }
        let (is_async, is_generator) = self.method_modifiers()?;
        let accessor = self.accessor_modifier()?;
        let key_tok = self.cur.clone();
        let key = self.property_key()?;
        if self.is_punct("(") {
            let ctx = FnContext { is_async, is_generator, in_function: true };
            let func = self.function_rest(None, ctx, key_tok.pos)?;
            return Ok(Prop::Method { key, func });
        }
        if is_async || is_generator || accessor {
            return Err(self.unexpected());
        }
        if self.eat_punct(":")? {
            let value = self.assignment()?;
            return Ok(Prop::KeyValue { key, value });
        }
        let name = match (&key, &key_tok.tok) {
            (PropKey::Named(name), Tok::Ident(_)) if !is_reserved(name) => name.clone(),
            _ => return Err(self.error_at(&key_tok, "expected ':' after property key")),
        };
        let ident = self.alloc(ExprKind::Ident(name.clone()), key_tok.pos);
        if self.is_punct("=") {
            // Cover initializer `{ a = 1 }`, only valid once reinterpreted as a pattern.
            self.advance()?;
            let default = self.assignment()?;
            let target = Box::new(Pattern::Ident(Ident { name: name.clone(), pos: key_tok.pos }));
            let value = self.alloc(ExprKind::Assign { op: "=", target, value: default }, key_tok.pos);
            return Ok(Prop::KeyValue { key, value });
        }
        Ok(Prop::Shorthand { name, value: ident })
    }
}
