//! Arena-allocated syntax tree for the supported JavaScript subset.
//!
//! Expressions, functions and classes live in flat arenas owned by
//! [`SyntaxTree`] and are referred to by index, which lets the def-use
//! analysis key side tables by node identity.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

/// 1-based line and column of a node's first character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExprId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FuncId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(pub u32);

/// An identifier occurrence that introduces or references a binding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Var,
    Let,
    Const,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Ident(String),
    This,
    Super,
    Str(String),
    /// Template literal; `cooked` is set when there are no substitutions.
    Template {
        cooked: Option<String>,
        exprs: Vec<ExprId>,
    },
    TaggedTemplate {
        tag: ExprId,
        exprs: Vec<ExprId>,
    },
    Number,
    Bool,
    Null,
    Regex,
    Array(Vec<Option<Arg>>),
    Object(Vec<Prop>),
    Function(FuncId),
    Class(ClassId),
    Member {
        object: ExprId,
        property: String,
        property_pos: Pos,
        optional: bool,
    },
    /// `object.#name`
    PrivateMember {
        object: ExprId,
        name: String,
    },
    Index {
        object: ExprId,
        index: ExprId,
        optional: bool,
    },
    Call {
        callee: ExprId,
        args: Vec<Arg>,
        optional: bool,
    },
    New {
        callee: ExprId,
        args: Vec<Arg>,
    },
    /// `import(specifier)`
    DynamicImport(ExprId),
    /// `new.target` / `import.meta`
    MetaProperty,
    Unary {
        op: &'static str,
        arg: ExprId,
    },
    Update {
        arg: ExprId,
    },
    Binary {
        op: &'static str,
        left: ExprId,
        right: ExprId,
    },
    Logical {
        op: &'static str,
        left: ExprId,
        right: ExprId,
    },
    Conditional {
        test: ExprId,
        consequent: ExprId,
        alternate: ExprId,
    },
    Assign {
        op: &'static str,
        target: Box<Pattern>,
        value: ExprId,
    },
    Sequence(Vec<ExprId>),
    Await(ExprId),
    Yield(Option<ExprId>),
}

/// Call argument or array element.
#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Expr(ExprId),
    Spread(ExprId),
}

impl Arg {
    pub fn expr(&self) -> ExprId {
        match *self {
            Arg::Expr(e) | Arg::Spread(e) => e,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PropKey {
    /// Identifier, string or numeric key with its static name.
    Named(String),
    Computed(ExprId),
    Private(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prop {
    KeyValue {
        key: PropKey,
        value: ExprId,
    },
    /// `{ x }`: the value is an identifier expression.
    Shorthand {
        name: String,
        value: ExprId,
    },
    Method {
        key: PropKey,
        func: FuncId,
    },
    Spread(ExprId),
}

/// Binding and assignment targets.
#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    Ident(Ident),
    Object {
        props: Vec<PatternProp>,
        rest: Option<Box<Pattern>>,
    },
    Array {
        elems: Vec<Option<Pattern>>,
        rest: Option<Box<Pattern>>,
    },
    Default {
        target: Box<Pattern>,
        value: ExprId,
    },
    /// Member expression target (only valid in assignments).
    Expr(ExprId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternProp {
    pub key: PropKey,
    pub value: Pattern,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FuncBody {
    Block(Vec<Stmt>),
    Expr(ExprId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Function {
    pub name: Option<Ident>,
    pub params: Vec<Param>,
    pub body: FuncBody,
    pub is_arrow: bool,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Pattern(Pattern),
    Rest(Pattern),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Class {
    pub name: Option<Ident>,
    pub superclass: Option<ExprId>,
    pub members: Vec<ClassMember>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassMember {
    Method { key: PropKey, func: FuncId, is_static: bool },
    Field { key: PropKey, value: Option<ExprId>, is_static: bool },
    StaticBlock(Vec<Stmt>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Declarator {
    pub target: Pattern,
    pub init: Option<ExprId>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForInit {
    Var(VarKind, Vec<Declarator>),
    Expr(ExprId),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForHead {
    Var(VarKind, Pattern),
    Target(Pattern),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ImportSpec {
    /// `import x from 'm'`
    Default(Ident),
    /// `import * as x from 'm'`
    Namespace(Ident),
    /// `import { imported as local } from 'm'`
    Named { imported: String, local: Ident },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchCase {
    pub test: Option<ExprId>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Var(VarKind, Vec<Declarator>),
    FunctionDecl(FuncId),
    ClassDecl(ClassId),
    Expr(ExprId),
    Block(Vec<Stmt>),
    If {
        test: ExprId,
        consequent: Box<Stmt>,
        alternate: Option<Box<Stmt>>,
    },
    For {
        init: Option<ForInit>,
        test: Option<ExprId>,
        update: Option<ExprId>,
        body: Box<Stmt>,
    },
    ForIn {
        head: ForHead,
        right: ExprId,
        body: Box<Stmt>,
    },
    ForOf {
        head: ForHead,
        right: ExprId,
        body: Box<Stmt>,
    },
    While {
        test: ExprId,
        body: Box<Stmt>,
    },
    DoWhile {
        body: Box<Stmt>,
        test: ExprId,
    },
    Return(Option<ExprId>),
    Throw(ExprId),
    Try {
        block: Vec<Stmt>,
        param: Option<Pattern>,
        handler: Option<Vec<Stmt>>,
        finalizer: Option<Vec<Stmt>>,
    },
    Switch {
        discriminant: ExprId,
        cases: Vec<SwitchCase>,
    },
    Labeled(Box<Stmt>),
    With {
        object: ExprId,
        body: Box<Stmt>,
    },
    Import {
        source: String,
        specs: Vec<ImportSpec>,
        pos: Pos,
    },
    /// `export default <expr>`; declarations are exported via `Export(Box<Stmt>)`.
    ExportDefault(ExprId),
    Export(Box<Stmt>),
    /// `export { a as b }`, `export * from 'm'` and friends; no bindings introduced.
    ExportNames,
    Break,
    Continue,
    Debugger,
    Empty,
}

/// Coarse classification of expression nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    ImportCall,
    Identifier,
    MemberAccess,
    Call,
    Instantiation,
    FunctionLiteral,
    StringLiteral,
    Assignment,
    Other,
}

/// A parsed source file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SyntaxTree {
    pub file: String,
    pub body: Vec<Stmt>,
    pub exprs: Vec<Expr>,
    pub funcs: Vec<Function>,
    pub classes: Vec<Class>,
}

impl SyntaxTree {
    pub fn expr(&self, id: ExprId) -> &Expr {
        &self.exprs[id.0 as usize]
    }

    pub fn func(&self, id: FuncId) -> &Function {
        &self.funcs[id.0 as usize]
    }

    pub fn class(&self, id: ClassId) -> &Class {
        &self.classes[id.0 as usize]
    }

    pub fn expr_ids(&self) -> impl Iterator<Item = ExprId> + '_ {
        (0..self.exprs.len() as u32).map(ExprId)
    }

    /// Static string value of a string literal or substitution-free template.
    pub fn constant_string(&self, id: ExprId) -> Option<&str> {
        match &self.expr(id).kind {
            ExprKind::Str(s) => Some(s),
            ExprKind::Template { cooked: Some(s), .. } => Some(s),
            _ => None,
        }
    }

    /// `require('m')` with a constant specifier; returns the specifier.
    pub fn require_specifier(&self, id: ExprId) -> Option<&str> {
        match &self.expr(id).kind {
            ExprKind::Call { callee, args, .. } if args.len() == 1 => match (&self.expr(*callee).kind, &args[0]) {
                (ExprKind::Ident(name), Arg::Expr(arg)) if name == "require" => self.constant_string(*arg),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn node_kind(&self, id: ExprId) -> NodeKind {
        match &self.expr(id).kind {
            ExprKind::Call { .. } if self.require_specifier(id).is_some() => NodeKind::ImportCall,
            ExprKind::DynamicImport(_) => NodeKind::ImportCall,
            ExprKind::Ident(_) => NodeKind::Identifier,
            ExprKind::Member { .. } | ExprKind::Index { .. } | ExprKind::PrivateMember { .. } => NodeKind::MemberAccess,
            ExprKind::Call { .. } => NodeKind::Call,
            ExprKind::New { .. } => NodeKind::Instantiation,
            ExprKind::Function(_) => NodeKind::FunctionLiteral,
            ExprKind::Str(_) => NodeKind::StringLiteral,
            ExprKind::Assign { .. } => NodeKind::Assignment,
            _ => NodeKind::Other,
        }
    }

    /// Name of the called method when the callee is a (non-computed) member access.
    pub fn called_method(&self, id: ExprId) -> Option<&str> {
        match &self.expr(id).kind {
            ExprKind::Call { callee, .. } => match &self.expr(*callee).kind {
                ExprKind::Member { property, .. } => Some(property),
                _ => None,
            },
            _ => None,
        }
    }
}
