//! Lexical scopes and the flow-insensitive def-use map.
//!
//! One walk over the tree records declarations per scope and every
//! identifier reference together with its scope; references are resolved
//! after the walk so hoisting needs no special treatment. Undeclared names
//! become implicit globals.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::syntax::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BindingId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ScopeId(u32);

/// One way a binding may receive its value.
#[derive(Debug, Clone, PartialEq)]
pub enum Def {
    /// Direct initializer or assignment.
    Value(ExprId),
    /// Object destructuring of `source` along the property names.
    Destructured { source: ExprId, props: Vec<String> },
    /// ES import: `require(pkg)` or `require(pkg).property`.
    Import { pkg: String, property: Option<String> },
    /// The `index`-th parameter of `func`, followed by destructured properties.
    Param { func: FuncId, index: u32, props: Vec<String> },
    /// Function declaration.
    Function(FuncId),
    /// Value the analysis does not track (catch parameters, loop variables,
    /// array destructuring, rest elements, classes).
    Opaque,
}

#[derive(Debug, Clone)]
pub struct Binding {
    pub name: String,
    pub defs: Vec<Def>,
    /// False for implicit globals such as `require` or `module`.
    pub declared: bool,
}

struct Scope {
    parent: Option<ScopeId>,
    function_scope: bool,
    names: BTreeMap<String, BindingId>,
}

pub struct ScopeInfo {
    pub bindings: Vec<Binding>,
    /// Binding referenced by each identifier expression.
    ident_binding: Vec<Option<BindingId>>,
    /// Return expressions of each function, nested functions excluded.
    pub returns: Vec<Vec<ExprId>>,
}

impl ScopeInfo {
    pub fn build(tree: &SyntaxTree) -> Self {
        let mut builder = Builder {
            tree,
            scopes: vec![Scope { parent: None, function_scope: true, names: BTreeMap::new() }],
            bindings: Vec::new(),
            globals: BTreeMap::new(),
            refs: Vec::new(),
            assigns: Vec::new(),
            returns: vec![Vec::new(); tree.funcs.len()],
            current_function: None,
        };
        builder.walk_body(&tree.body, ScopeId(0));
        builder.finish()
    }

    pub fn binding_of(&self, ident: ExprId) -> Option<BindingId> {
        self.ident_binding.get(ident.0 as usize).copied().flatten()
    }

    pub fn binding(&self, id: BindingId) -> &Binding {
        &self.bindings[id.0 as usize]
    }

    pub fn bindings_named<'s>(&'s self, name: &'s str) -> impl Iterator<Item = BindingId> + 's {
        self.bindings.iter().enumerate().filter(move |(_, b)| b.name == name).map(|(i, _)| BindingId(i as u32))
    }
}

struct Builder<'t> {
    tree: &'t SyntaxTree,
    scopes: Vec<Scope>,
    bindings: Vec<Binding>,
    globals: BTreeMap<String, BindingId>,
    refs: Vec<(ExprId, ScopeId)>,
    /// Assignments to plain identifiers, resolved like references.
    assigns: Vec<(String, ScopeId, Def)>,
    returns: Vec<Vec<ExprId>>,
    current_function: Option<FuncId>,
}

impl<'t> Builder<'t> {
    fn new_scope(&mut self, parent: ScopeId, function_scope: bool) -> ScopeId {
        self.scopes.push(Scope { parent: Some(parent), function_scope, names: BTreeMap::new() });
        ScopeId(self.scopes.len() as u32 - 1)
    }

    fn function_scope_of(&self, mut scope: ScopeId) -> ScopeId {
        loop {
            let s = &self.scopes[scope.0 as usize];
            match s.parent {
                Some(parent) if !s.function_scope => scope = parent,
                _ => return scope,
            }
        }
    }

    fn declare(&mut self, scope: ScopeId, name: &str, def: Def) {
        let existing = self.scopes[scope.0 as usize].names.get(name).copied();
        let id = match existing {
            Some(id) => id,
            None => {
                self.bindings.push(Binding { name: name.to_string(), defs: Vec::new(), declared: true });
                let id = BindingId(self.bindings.len() as u32 - 1);
                self.scopes[scope.0 as usize].names.insert(name.to_string(), id);
                id
            }
        };
        if def != Def::Opaque || self.bindings[id.0 as usize].defs.is_empty() {
            self.bindings[id.0 as usize].defs.push(def);
        }
    }

    /// Declares the identifiers of a binding pattern whose value is `source`.
    fn declare_pattern(&mut self, scope: ScopeId, pattern: &Pattern, source: Source) {
        match pattern {
            Pattern::Ident(ident) => self.declare(scope, &ident.name, source.into_def()),
            Pattern::Default { target, value } => {
                self.walk_expr(*value, scope);
                self.declare_pattern(scope, target, source.clone());
                // The default is an alternative value for the same targets.
                self.declare_pattern(scope, target, Source::Value(*value));
            }
            Pattern::Object { props, rest } => {
                for prop in props {
                    if let PropKey::Computed(e) = &prop.key {
                        self.walk_expr(*e, scope);
                    }
                    let inner = match &prop.key {
                        PropKey::Named(name) => source.property(name),
                        _ => Source::Opaque,
                    };
                    self.declare_pattern(scope, &prop.value, inner);
                }
                if let Some(rest) = rest {
                    self.declare_pattern(scope, rest, Source::Opaque);
                }
            }
            Pattern::Array { elems, rest } => {
                for elem in elems.iter().flatten() {
                    self.declare_pattern(scope, elem, Source::Opaque);
                }
                if let Some(rest) = rest {
                    self.declare_pattern(scope, rest, Source::Opaque);
                }
            }
            Pattern::Expr(e) => self.walk_expr(*e, scope),
        }
    }

    /// Records the identifiers of an assignment target.
    fn assign_pattern(&mut self, scope: ScopeId, pattern: &Pattern, source: Source) {
        match pattern {
            Pattern::Ident(ident) => self.assigns.push((ident.name.clone(), scope, source.into_def())),
            Pattern::Default { target, value } => {
                self.walk_expr(*value, scope);
                self.assign_pattern(scope, target, source.clone());
                self.assign_pattern(scope, target, Source::Value(*value));
            }
            Pattern::Object { props, rest } => {
                for prop in props {
                    if let PropKey::Computed(e) = &prop.key {
                        self.walk_expr(*e, scope);
                    }
                    let inner = match &prop.key {
                        PropKey::Named(name) => source.property(name),
                        _ => Source::Opaque,
                    };
                    self.assign_pattern(scope, &prop.value, inner);
                }
                if let Some(rest) = rest {
                    self.assign_pattern(scope, rest, Source::Opaque);
                }
            }
            Pattern::Array { elems, rest } => {
                for elem in elems.iter().flatten() {
                    self.assign_pattern(scope, elem, Source::Opaque);
                }
                if let Some(rest) = rest {
                    self.assign_pattern(scope, rest, Source::Opaque);
                }
            }
            Pattern::Expr(e) => self.walk_expr(*e, scope),
        }
    }

    fn walk_body(&mut self, body: &[Stmt], scope: ScopeId) {
        for stmt in body {
            self.walk_stmt(stmt, scope);
        }
    }

    fn walk_block(&mut self, body: &[Stmt], parent: ScopeId) {
        let scope = self.new_scope(parent, false);
        self.walk_body(body, scope);
    }

    fn var_scope(&self, kind: VarKind, scope: ScopeId) -> ScopeId {
        match kind {
            VarKind::Var => self.function_scope_of(scope),
            VarKind::Let | VarKind::Const => scope,
        }
    }

    fn walk_declarators(&mut self, kind: VarKind, decls: &[Declarator], scope: ScopeId) {
        let target_scope = self.var_scope(kind, scope);
        for decl in decls {
            if let Some(init) = decl.init {
                self.walk_expr(init, scope);
            }
            let source = match decl.init {
                Some(init) => Source::Value(init),
                None => Source::None,
            };
            self.declare_pattern(target_scope, &decl.target, source);
        }
    }

    fn walk_stmt(&mut self, stmt: &Stmt, scope: ScopeId) {
        match stmt {
            Stmt::Var(kind, decls) => self.walk_declarators(*kind, decls, scope),
            Stmt::FunctionDecl(func) => {
                if let Some(name) = &self.tree.func(*func).name {
                    let target = self.function_scope_of(scope);
                    self.declare(target, &name.name, Def::Function(*func));
                }
                self.walk_function(*func, scope);
            }
            Stmt::ClassDecl(class) => {
                if let Some(name) = &self.tree.class(*class).name {
                    self.declare(scope, &name.name, Def::Opaque);
                }
                self.walk_class(*class, scope);
            }
            Stmt::Expr(e) | Stmt::Throw(e) | Stmt::ExportDefault(e) => self.walk_expr(*e, scope),
            Stmt::Block(body) => self.walk_block(body, scope),
            Stmt::If { test, consequent, alternate } => {
                self.walk_expr(*test, scope);
                self.walk_stmt(consequent, scope);
                if let Some(alt) = alternate {
                    self.walk_stmt(alt, scope);
                }
            }
            Stmt::For { init, test, update, body } => {
                let inner = self.new_scope(scope, false);
                match init {
                    Some(ForInit::Var(kind, decls)) => self.walk_declarators(*kind, decls, inner),
                    Some(ForInit::Expr(e)) => self.walk_expr(*e, inner),
                    None => {}
                }
                for e in test.iter().chain(update.iter()) {
                    self.walk_expr(*e, inner);
                }
                self.walk_stmt(body, inner);
            }
            Stmt::ForIn { head, right, body } | Stmt::ForOf { head, right, body } => {
                let inner = self.new_scope(scope, false);
                self.walk_expr(*right, scope);
                match head {
                    ForHead::Var(kind, pattern) => {
                        let target = self.var_scope(*kind, inner);
                        self.declare_pattern(target, pattern, Source::Opaque);
                    }
                    ForHead::Target(pattern) => self.assign_pattern(inner, pattern, Source::Opaque),
                }
                self.walk_stmt(body, inner);
            }
            Stmt::While { test, body } | Stmt::DoWhile { body, test } => {
                self.walk_expr(*test, scope);
                self.walk_stmt(body, scope);
            }
            Stmt::Return(arg) => {
                if let Some(e) = arg {
                    self.walk_expr(*e, scope);
                    if let Some(func) = self.current_function {
                        self.returns[func.0 as usize].push(*e);
                    }
                }
            }
            Stmt::Try { block, param, handler, finalizer } => {
                self.walk_block(block, scope);
                if let Some(handler) = handler {
                    let inner = self.new_scope(scope, false);
                    if let Some(param) = param {
                        self.declare_pattern(inner, param, Source::Opaque);
                    }
                    self.walk_body(handler, inner);
                }
                if let Some(finalizer) = finalizer {
                    self.walk_block(finalizer, scope);
                }
            }
            Stmt::Switch { discriminant, cases } => {
                self.walk_expr(*discriminant, scope);
                let inner = self.new_scope(scope, false);
                for case in cases {
                    if let Some(test) = case.test {
                        self.walk_expr(test, inner);
                    }
                    self.walk_body(&case.body, inner);
                }
            }
            Stmt::Labeled(body) => self.walk_stmt(body, scope),
            Stmt::With { object, body } => {
                self.walk_expr(*object, scope);
                self.walk_stmt(body, scope);
            }
            Stmt::Import { source, specs, .. } => {
                for spec in specs {
                    let (local, property) = match spec {
                        ImportSpec::Default(local) | ImportSpec::Namespace(local) => (local, None),
                        ImportSpec::Named { imported, local } if imported == "default" => (local, None),
                        ImportSpec::Named { imported, local } => (local, Some(imported.clone())),
                    };
                    let def = Def::Import { pkg: source.clone(), property };
                    self.declare(scope, &local.name, def);
                }
            }
            Stmt::Export(decl) => self.walk_stmt(decl, scope),
            Stmt::ExportNames | Stmt::Break | Stmt::Continue | Stmt::Debugger | Stmt::Empty => {}
        }
    }

    fn walk_function(&mut self, func_id: FuncId, scope: ScopeId) {
        let func = self.tree.func(func_id);
        let inner = self.new_scope(scope, true);
        if !func.is_arrow {
            // A named function expression can refer to itself.
            if let Some(name) = &func.name {
                if !self.scopes[scope.0 as usize].names.contains_key(&name.name) {
                    self.declare(inner, &name.name, Def::Function(func_id));
                }
            }
        }
        for (index, param) in func.params.iter().enumerate() {
            match param {
                Param::Pattern(pattern) => {
                    let source = Source::Param { func: func_id, index: index as u32, props: Vec::new() };
                    self.declare_pattern(inner, pattern, source);
                }
                Param::Rest(pattern) => self.declare_pattern(inner, pattern, Source::Opaque),
            }
        }
        let saved = self.current_function.replace(func_id);
        match &func.body {
            FuncBody::Block(body) => self.walk_body(body, inner),
            FuncBody::Expr(e) => {
                self.walk_expr(*e, inner);
                self.returns[func_id.0 as usize].push(*e);
            }
        }
        self.current_function = saved;
    }

    fn walk_class(&mut self, class_id: ClassId, scope: ScopeId) {
        let class = self.tree.class(class_id);
        if let Some(sup) = class.superclass {
            self.walk_expr(sup, scope);
        }
        let inner = self.new_scope(scope, false);
        if let Some(name) = &class.name {
            self.declare(inner, &name.name, Def::Opaque);
        }
        for member in &class.members {
            match member {
                ClassMember::Method { key, func, .. } => {
                    if let PropKey::Computed(e) = key {
                        self.walk_expr(*e, inner);
                    }
                    self.walk_function(*func, inner);
                }
                ClassMember::Field { key, value, .. } => {
                    if let PropKey::Computed(e) = key {
                        self.walk_expr(*e, inner);
                    }
                    if let Some(v) = value {
                        let saved = self.current_function.take();
                        self.walk_expr(*v, inner);
                        self.current_function = saved;
                    }
                }
                ClassMember::StaticBlock(body) => {
                    let saved = self.current_function.take();
                    let block = self.new_scope(inner, true);
                    self.walk_body(body, block);
                    self.current_function = saved;
                }
            }
        }
    }

    fn walk_args(&mut self, args: &[Arg], scope: ScopeId) {
        for arg in args {
            self.walk_expr(arg.expr(), scope);
        }
    }

    fn walk_expr(&mut self, id: ExprId, scope: ScopeId) {
        let tree = self.tree;
        match &tree.expr(id).kind {
            ExprKind::Ident(_) => self.refs.push((id, scope)),
            ExprKind::Template { exprs, .. } => {
                for e in exprs {
                    self.walk_expr(*e, scope);
                }
            }
            ExprKind::TaggedTemplate { tag, exprs } => {
                self.walk_expr(*tag, scope);
                for e in exprs {
                    self.walk_expr(*e, scope);
                }
            }
            ExprKind::Array(items) => {
                for item in items.iter().flatten() {
                    self.walk_expr(item.expr(), scope);
                }
            }
            ExprKind::Object(props) => {
                for prop in props {
                    match prop {
                        Prop::KeyValue { key, value } => {
                            if let PropKey::Computed(e) = key {
                                self.walk_expr(*e, scope);
                            }
                            self.walk_expr(*value, scope);
                        }
                        Prop::Shorthand { value, .. } | Prop::Spread(value) => self.walk_expr(*value, scope),
                        Prop::Method { key, func } => {
                            if let PropKey::Computed(e) = key {
                                self.walk_expr(*e, scope);
                            }
                            self.walk_function(*func, scope);
                        }
                    }
                }
            }
            ExprKind::Function(func) => self.walk_function(*func, scope),
            ExprKind::Class(class) => self.walk_class(*class, scope),
            ExprKind::Member { object, .. } | ExprKind::PrivateMember { object, .. } => self.walk_expr(*object, scope),
            ExprKind::Index { object, index, .. } => {
                self.walk_expr(*object, scope);
                self.walk_expr(*index, scope);
            }
            ExprKind::Call { callee, args, .. } | ExprKind::New { callee, args } => {
                self.walk_expr(*callee, scope);
                self.walk_args(args, scope);
            }
            ExprKind::DynamicImport(e)
            | ExprKind::Unary { arg: e, .. }
            | ExprKind::Update { arg: e }
            | ExprKind::Await(e)
            | ExprKind::Yield(Some(e)) => self.walk_expr(*e, scope),
            ExprKind::Binary { left, right, .. } | ExprKind::Logical { left, right, .. } => {
                self.walk_expr(*left, scope);
                self.walk_expr(*right, scope);
            }
            ExprKind::Conditional { test, consequent, alternate } => {
                self.walk_expr(*test, scope);
                self.walk_expr(*consequent, scope);
                self.walk_expr(*alternate, scope);
            }
            ExprKind::Assign { op, target, value } => {
                self.walk_expr(*value, scope);
                if *op == "=" {
                    self.assign_pattern(scope, target, Source::Value(*value));
                } else if let Pattern::Expr(e) = **target {
                    self.walk_expr(e, scope);
                }
            }
            ExprKind::Sequence(items) => {
                for e in items {
                    self.walk_expr(*e, scope);
                }
            }
            ExprKind::This
            | ExprKind::Super
            | ExprKind::Str(_)
            | ExprKind::Number
            | ExprKind::Bool
            | ExprKind::Null
            | ExprKind::Regex
            | ExprKind::MetaProperty
            | ExprKind::Yield(None) => {}
        }
    }

    fn lookup(&self, name: &str, mut scope: ScopeId) -> Option<BindingId> {
        loop {
            let s = &self.scopes[scope.0 as usize];
            if let Some(id) = s.names.get(name) {
                return Some(*id);
            }
            scope = s.parent?;
        }
    }

    fn global(&mut self, name: &str) -> BindingId {
        if let Some(id) = self.globals.get(name) {
            return *id;
        }
        self.bindings.push(Binding { name: name.to_string(), defs: Vec::new(), declared: false });
        let id = BindingId(self.bindings.len() as u32 - 1);
        self.globals.insert(name.to_string(), id);
        id
    }

    fn resolve(&mut self, name: &str, scope: ScopeId) -> BindingId {
        match self.lookup(name, scope) {
            Some(id) => id,
            None => self.global(name),
        }
    }

    fn finish(mut self) -> ScopeInfo {
        let assigns = core::mem::take(&mut self.assigns);
        for (name, scope, def) in assigns {
            let id = self.resolve(&name, scope);
            if def != Def::Opaque {
                self.bindings[id.0 as usize].defs.push(def);
            }
        }
        let mut ident_binding = vec![None; self.tree.exprs.len()];
        let refs = core::mem::take(&mut self.refs);
        for (expr, scope) in refs {
            if let ExprKind::Ident(name) = &self.tree.expr(expr).kind {
                ident_binding[expr.0 as usize] = Some(self.resolve(name, scope));
            }
        }
        ScopeInfo { bindings: self.bindings, ident_binding, returns: self.returns }
    }
}

/// Where the value of a pattern element comes from.
#[derive(Debug, Clone)]
enum Source {
    None,
    Opaque,
    Value(ExprId),
    Destructured { source: ExprId, props: Vec<String> },
    Param { func: FuncId, index: u32, props: Vec<String> },
}

impl Source {
    fn property(&self, name: &str) -> Source {
        match self {
            Source::None | Source::Opaque => Source::Opaque,
            Source::Value(e) => Source::Destructured { source: *e, props: vec![name.to_string()] },
            Source::Destructured { source, props } => {
                let mut props = props.clone();
                props.push(name.to_string());
                Source::Destructured { source: *source, props }
            }
            Source::Param { func, index, props } => {
                let mut props = props.clone();
                props.push(name.to_string());
                Source::Param { func: *func, index: *index, props }
            }
        }
    }

    fn into_def(self) -> Def {
        match self {
            Source::None | Source::Opaque => Def::Opaque,
            Source::Value(e) => Def::Value(e),
            Source::Destructured { source, props } => Def::Destructured { source, props },
            Source::Param { func, index, props } => Def::Param { func, index, props },
        }
    }
}
