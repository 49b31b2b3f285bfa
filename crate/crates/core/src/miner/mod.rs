//! Extraction of listener registrations and resolution of their receivers
//! to access paths.
//!
//! Resolution is a def-use walk over a single file. It is flow-insensitive
//! and context-insensitive: every definition of a binding contributes, and
//! a callback parameter receives whatever reaches it at any call site. An
//! expression can therefore resolve to several candidate paths.

mod scope;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::path::{AccessPath, MAX_PATH_LEN};
use crate::syntax::{parse_source, Arg, ExprId, ExprKind, FuncId, ParseError, Pos, SyntaxTree};
use scope::{Def, ScopeInfo};

pub use scope::BindingId;

/// Upper bound on the number of candidate paths kept per expression.
pub const MAX_CANDIDATES: usize = 64;

/// Round limit for the per-file fixpoint.
const MAX_ROUNDS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegistrationMethod {
    On,
    Once,
    AddListener,
    PrependListener,
    PrependOnceListener,
}

impl RegistrationMethod {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "on" => Self::On,
            "once" => Self::Once,
            "addListener" => Self::AddListener,
            "prependListener" => Self::PrependListener,
            "prependOnceListener" => Self::PrependOnceListener,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::On => "on",
            Self::Once => "once",
            Self::AddListener => "addListener",
            Self::PrependListener => "prependListener",
            Self::PrependOnceListener => "prependOnceListener",
        }
    }
}

impl fmt::Display for RegistrationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A syntactic listener registration `receiver.method('event', callback)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRegistration {
    pub call: ExprId,
    pub receiver: ExprId,
    pub method: RegistrationMethod,
    pub event: String,
    pub callback: ExprId,
    /// Position of the method name.
    pub pos: Pos,
}

/// One resolved registration: the receiver path, the event and where it was seen.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairOccurrence {
    pub path: AccessPath,
    pub event: String,
    pub project: String,
    pub file: String,
    pub line: u32,
    pub column: u32,
}

impl PairOccurrence {
    pub fn package(&self) -> &str {
        self.path.package()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MiningStats {
    pub registrations: usize,
    /// Registrations whose receiver resolved to no access path.
    pub unresolved: usize,
    /// Candidate paths discarded for exceeding [`MAX_PATH_LEN`].
    pub dropped_long_paths: usize,
    /// Candidate sets cut to [`MAX_CANDIDATES`], plus files whose fixpoint hit the round limit.
    pub truncated: usize,
}

impl MiningStats {
    pub fn add(&mut self, other: &MiningStats) {
        self.registrations += other.registrations;
        self.unresolved += other.unresolved;
        self.dropped_long_paths += other.dropped_long_paths;
        self.truncated += other.truncated;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FileMining {
    pub occurrences: Vec<PairOccurrence>,
    pub stats: MiningStats,
}

/// Parses and mines one file.
pub fn mine_source(text: &str, file: &str, project: &str) -> Result<FileMining, ParseError> {
    let tree = parse_source(text, file)?;
    Ok(mine_tree(&tree, project))
}

pub fn mine_tree(tree: &SyntaxTree, project: &str) -> FileMining {
    let mut analysis = Analysis::new(tree);
    let mut out = FileMining::default();
    for reg in analysis.registrations() {
        out.stats.registrations += 1;
        let candidates: BTreeSet<AccessPath> =
            analysis.resolve(reg.receiver).iter().map(AccessPath::rewrite_chained_aliases).collect();
        if candidates.is_empty() {
            out.stats.unresolved += 1;
        }
        for path in candidates {
            out.occurrences.push(PairOccurrence {
                path,
                event: reg.event.clone(),
                project: project.into(),
                file: tree.file.clone(),
                line: reg.pos.line,
                column: reg.pos.column,
            });
        }
    }
    out.stats.dropped_long_paths = analysis.dropped_long_paths;
    out.stats.truncated = analysis.truncated;
    out
}

/// Registrations in source order.
pub fn extract_registrations(tree: &SyntaxTree) -> Vec<RawRegistration> {
    Analysis::new(tree).registrations()
}

/// Candidate paths for `expr`, after the chained-alias rewrite.
pub fn resolve_access_path(tree: &SyntaxTree, expr: ExprId) -> Vec<AccessPath> {
    let mut analysis = Analysis::new(tree);
    let set: BTreeSet<AccessPath> = analysis.resolve(expr).iter().map(AccessPath::rewrite_chained_aliases).collect();
    set.into_iter().collect()
}

/// Def-use analysis of one syntax tree.
pub struct Analysis<'t> {
    tree: &'t SyntaxTree,
    scopes: ScopeInfo,
    /// Per function: the calls that receive it as an argument, with the argument index.
    flow_sites: Vec<Vec<(ExprId, u32)>>,
    /// Per function: the calls that invoke it directly.
    direct_calls: Vec<Vec<ExprId>>,
    /// Fixpoint values of every binding and every function's return set.
    binding_paths: Vec<BTreeSet<AccessPath>>,
    return_paths: Vec<BTreeSet<AccessPath>>,
    /// Whether drops and truncations are being counted (final pass only).
    counting: bool,
    dropped_long_paths: usize,
    truncated: usize,
}

fn is_relative(spec: &str) -> bool {
    spec.starts_with('.') || spec.starts_with('/')
}

impl<'t> Analysis<'t> {
    pub fn new(tree: &'t SyntaxTree) -> Self {
        let scopes = ScopeInfo::build(tree);
        let mut analysis = Analysis {
            tree,
            scopes,
            flow_sites: vec![Vec::new(); tree.funcs.len()],
            direct_calls: vec![Vec::new(); tree.funcs.len()],
            binding_paths: Vec::new(),
            return_paths: Vec::new(),
            counting: false,
            dropped_long_paths: 0,
            truncated: 0,
        };
        analysis.index_calls();
        analysis.solve();
        analysis
    }

    /// Chaotic iteration to the least fixpoint. Sets only grow (up to the
    /// candidate cap, which keeps the smallest paths), and path length is
    /// bounded, so this terminates; the round limit is a safety net.
    fn solve(&mut self) {
        let bindings = self.scopes.bindings.len();
        let funcs = self.tree.funcs.len();
        self.binding_paths = vec![BTreeSet::new(); bindings];
        self.return_paths = vec![BTreeSet::new(); funcs];
        let mut converged = false;
        for _ in 0..MAX_ROUNDS {
            if !self.round() {
                converged = true;
                break;
            }
        }
        self.counting = true;
        if !converged {
            self.truncated += 1;
        }
        self.round();
    }

    /// One pass over all bindings and return sets; reports whether anything grew.
    fn round(&mut self) -> bool {
        let mut changed = false;
        for b in 0..self.binding_paths.len() {
            let defs = core::mem::take(&mut self.scopes.bindings[b].defs);
            let mut next = self.binding_paths[b].clone();
            for def in &defs {
                next.extend(self.def_paths(def));
            }
            self.scopes.bindings[b].defs = defs;
            let next = self.limit(next);
            if next != self.binding_paths[b] {
                self.binding_paths[b] = next;
                changed = true;
            }
        }
        for f in 0..self.return_paths.len() {
            let mut next = self.return_paths[f].clone();
            for i in 0..self.scopes.returns[f].len() {
                let e = self.scopes.returns[f][i];
                next.extend(self.paths(e));
            }
            let next = self.limit(next);
            if next != self.return_paths[f] {
                self.return_paths[f] = next;
                changed = true;
            }
        }
        changed
    }

    fn index_calls(&mut self) {
        for id in self.tree.expr_ids() {
            let (callee, args) = match &self.tree.expr(id).kind {
                ExprKind::Call { callee, args, .. } | ExprKind::New { callee, args } => (*callee, args),
                _ => continue,
            };
            for (j, arg) in args.iter().enumerate() {
                let Arg::Expr(arg) = arg else { break };
                for f in self.function_values(*arg) {
                    self.flow_sites[f.0 as usize].push((id, j as u32));
                }
            }
            if matches!(self.tree.expr(id).kind, ExprKind::Call { .. }) {
                for f in self.function_values(callee) {
                    self.direct_calls[f.0 as usize].push(id);
                }
            }
        }
    }

    /// Function literals `expr` may evaluate to.
    pub fn function_values(&self, expr: ExprId) -> BTreeSet<FuncId> {
        let mut out = BTreeSet::new();
        let mut seen = BTreeSet::new();
        self.collect_functions(expr, &mut seen, &mut out);
        out
    }

    fn collect_functions(&self, expr: ExprId, seen: &mut BTreeSet<BindingId>, out: &mut BTreeSet<FuncId>) {
        match &self.tree.expr(expr).kind {
            ExprKind::Function(f) => {
                out.insert(*f);
            }
            ExprKind::Ident(_) => {
                let Some(b) = self.scopes.binding_of(expr) else { return };
                if !seen.insert(b) {
                    return;
                }
                for def in &self.scopes.binding(b).defs {
                    match def {
                        Def::Function(f) => {
                            out.insert(*f);
                        }
                        Def::Value(e) => self.collect_functions(*e, seen, out),
                        _ => {}
                    }
                }
            }
            ExprKind::Assign { op: "=", value, .. } => self.collect_functions(*value, seen, out),
            ExprKind::Sequence(items) => {
                if let Some(last) = items.last() {
                    self.collect_functions(*last, seen, out);
                }
            }
            ExprKind::Conditional { consequent, alternate, .. } => {
                self.collect_functions(*consequent, seen, out);
                self.collect_functions(*alternate, seen, out);
            }
            ExprKind::Logical { left, right, .. } => {
                self.collect_functions(*left, seen, out);
                self.collect_functions(*right, seen, out);
            }
            _ => {}
        }
    }

    pub fn registrations(&self) -> Vec<RawRegistration> {
        let mut out = Vec::new();
        for id in self.tree.expr_ids() {
            let ExprKind::Call { callee, args, .. } = &self.tree.expr(id).kind else { continue };
            let ExprKind::Member { object, property, property_pos, .. } = &self.tree.expr(*callee).kind else {
                continue;
            };
            let Some(method) = RegistrationMethod::from_name(property) else { continue };
            let (Some(Arg::Expr(event)), Some(Arg::Expr(callback))) = (args.first(), args.get(1)) else {
                continue;
            };
            let Some(event) = self.tree.constant_string(*event) else { continue };
            if self.function_values(*callback).is_empty() {
                continue;
            }
            out.push(RawRegistration {
                call: id,
                receiver: *object,
                method,
                event: event.into(),
                callback: *callback,
                pos: *property_pos,
            });
        }
        out.sort_by_key(|r| (r.pos, r.call));
        out
    }

    /// Candidate paths of an expression (before the chained-alias rewrite).
    pub fn resolve(&mut self, expr: ExprId) -> BTreeSet<AccessPath> {
        self.paths(expr)
    }

    /// Union of the paths of every binding called `name`.
    pub fn resolve_binding_named(&mut self, name: &str) -> BTreeSet<AccessPath> {
        let ids: Vec<BindingId> = self.scopes.bindings_named(name).collect();
        let mut out = BTreeSet::new();
        for id in ids {
            out.extend(self.binding_paths[id.0 as usize].iter().cloned());
        }
        out
    }

    fn limit(&mut self, mut set: BTreeSet<AccessPath>) -> BTreeSet<AccessPath> {
        if set.len() > MAX_CANDIDATES {
            if self.counting {
                self.truncated += 1;
            }
            while set.len() > MAX_CANDIDATES {
                set.pop_last();
            }
        }
        set
    }

    fn map_paths(
        &mut self,
        set: BTreeSet<AccessPath>,
        step: impl Fn(AccessPath) -> Option<AccessPath>,
    ) -> BTreeSet<AccessPath> {
        let mut out = BTreeSet::new();
        for path in set {
            let Some(next) = step(path) else { continue };
            if next.len() > MAX_PATH_LEN {
                if self.counting {
                    self.dropped_long_paths += 1;
                }
            } else {
                out.insert(next);
            }
        }
        out
    }

    fn root(&self, spec: &str, property: Option<&str>) -> BTreeSet<AccessPath> {
        if is_relative(spec) {
            return BTreeSet::new();
        }
        let path = AccessPath::root(spec).ok().and_then(|p| match property {
            Some(name) => p.property(name).ok(),
            None => Some(p),
        });
        path.into_iter().collect()
    }

    fn is_global_require(&self, callee: ExprId) -> bool {
        match &self.tree.expr(callee).kind {
            ExprKind::Ident(name) if name == "require" => {
                self.scopes.binding_of(callee).is_none_or(|b| !self.scopes.binding(b).declared)
            }
            _ => false,
        }
    }

    fn paths(&mut self, expr: ExprId) -> BTreeSet<AccessPath> {
        let tree = self.tree;
        let out = match &tree.expr(expr).kind {
            ExprKind::Ident(_) => match self.scopes.binding_of(expr) {
                Some(b) => self.binding_paths[b.0 as usize].clone(),
                None => BTreeSet::new(),
            },
            ExprKind::Call { callee, .. } => {
                if let Some(spec) = tree.require_specifier(expr) {
                    if self.is_global_require(*callee) {
                        return self.root(spec, None);
                    }
                }
                let mut out = match &tree.expr(*callee).kind {
                    ExprKind::Member { property, .. } if matches!(property.as_str(), "apply" | "call" | "bind") => {
                        BTreeSet::new()
                    }
                    _ => {
                        let callee_paths = self.paths(*callee);
                        self.map_paths(callee_paths, |p| Some(p.call_return()))
                    }
                };
                for f in self.function_values(*callee) {
                    out.extend(self.return_paths[f.0 as usize].iter().cloned());
                }
                out
            }
            ExprKind::DynamicImport(spec) => match tree.constant_string(*spec) {
                Some(spec) => self.root(spec, None),
                None => BTreeSet::new(),
            },
            ExprKind::New { callee, .. } => {
                let callee_paths = self.paths(*callee);
                self.map_paths(callee_paths, |p| Some(p.instance()))
            }
            ExprKind::Member { object, property, .. } => {
                let object_paths = self.paths(*object);
                self.map_paths(object_paths, |p| p.property(property).ok())
            }
            ExprKind::Index { object, index, .. } => match tree.constant_string(*index) {
                Some(name) => {
                    let object_paths = self.paths(*object);
                    self.map_paths(object_paths, |p| p.property(name).ok())
                }
                None => BTreeSet::new(),
            },
            ExprKind::Conditional { consequent, alternate, .. } => {
                let mut out = self.paths(*consequent);
                out.extend(self.paths(*alternate));
                out
            }
            ExprKind::Logical { left, right, .. } => {
                let mut out = self.paths(*left);
                out.extend(self.paths(*right));
                out
            }
            ExprKind::Sequence(items) => match items.last() {
                Some(last) => self.paths(*last),
                None => BTreeSet::new(),
            },
            ExprKind::Assign { op: "=", value, .. } => self.paths(*value),
            ExprKind::Await(inner) => self.paths(*inner),
            _ => BTreeSet::new(),
        };
        self.limit(out)
    }

    fn with_props(&mut self, set: BTreeSet<AccessPath>, props: &[String]) -> BTreeSet<AccessPath> {
        let mut set = set;
        for name in props {
            set = self.map_paths(set, |p| p.property(name).ok());
        }
        set
    }

    fn def_paths(&mut self, def: &Def) -> BTreeSet<AccessPath> {
        match def {
            Def::Value(e) => self.paths(*e),
            Def::Destructured { source, props } => {
                let base = self.paths(*source);
                self.with_props(base, props)
            }
            Def::Import { pkg, property } => self.root(pkg, property.as_deref()),
            Def::Param { func, index, props } => {
                let mut base = BTreeSet::new();
                let sites = self.flow_sites[func.0 as usize].clone();
                for (call, j) in sites {
                    let callee = match &self.tree.expr(call).kind {
                        ExprKind::Call { callee, .. } | ExprKind::New { callee, .. } => *callee,
                        _ => continue,
                    };
                    let callee_paths = self.paths(callee);
                    let callee_paths = self.map_paths(callee_paths, |p| Some(p.argument(j)));
                    base.extend(self.map_paths(callee_paths, |p| Some(p.argument(*index))));
                }
                let calls = self.direct_calls[func.0 as usize].clone();
                for call in calls {
                    let ExprKind::Call { args, .. } = &self.tree.expr(call).kind else { continue };
                    let actual =
                        args.iter().take(*index as usize + 1).enumerate().try_fold(None, |_, (i, a)| match a {
                            Arg::Spread(_) => Err(()),
                            Arg::Expr(e) if i == *index as usize => Ok(Some(*e)),
                            Arg::Expr(_) => Ok(None),
                        });
                    if let Ok(Some(actual)) = actual {
                        base.extend(self.paths(actual));
                    }
                }
                self.with_props(base, props)
            }
            Def::Function(_) | Def::Opaque => BTreeSet::new(),
        }
    }
}
