//! Access paths: symbolic names for API values rooted at a package import.
//!
//! Canonical text form:
//!
//! ```text
//! path := "require(" pkg ")" step*
//! step := "." ident | "()" | "(" digits ")" | "[new]()"
//! ```

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::syntax::{is_id_continue, is_id_start};

/// Paths with more steps than this are dropped by the miner.
pub const MAX_PATH_LEN: usize = 16;

/// Method names that register an event listener and return their receiver.
pub const REGISTRATION_METHODS: [&str; 5] = ["on", "once", "addListener", "prependOnceListener", "prependListener"];

pub fn is_registration_method(name: &str) -> bool {
    REGISTRATION_METHODS.contains(&name)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathStep {
    /// `.f`
    PropertyRead(String),
    /// `()`
    CallReturn,
    /// `(i)`: the i-th (0-based) argument of a function.
    Argument(u32),
    /// `[new]()`
    Instance,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AccessPath {
    root: String,
    steps: Vec<PathStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathError {
    #[error("invalid package specifier {0:?}")]
    InvalidPackage(String),
    #[error("invalid property name {0:?}")]
    InvalidProperty(String),
    #[error("malformed access path {text:?} at byte {offset}")]
    Syntax { text: String, offset: usize },
}

/// Whether `name` can appear after `.` in the canonical form.
pub fn is_identifier_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if is_id_start(c) => chars.all(is_id_continue),
        _ => false,
    }
}

/// Package specifiers usable as roots: non-empty, single-line, no `)`.
pub fn is_valid_package(pkg: &str) -> bool {
    !pkg.is_empty() && !pkg.contains(|c: char| c == ')' || c.is_control())
}

impl AccessPath {
    pub fn root(pkg: &str) -> Result<Self, PathError> {
        if !is_valid_package(pkg) {
            return Err(PathError::InvalidPackage(pkg.to_string()));
        }
        Ok(AccessPath { root: pkg.to_string(), steps: Vec::new() })
    }

    pub fn from_steps(pkg: &str, steps: Vec<PathStep>) -> Result<Self, PathError> {
        let mut path = Self::root(pkg)?;
        for step in steps {
            if let PathStep::PropertyRead(name) = &step {
                if !is_identifier_name(name) {
                    return Err(PathError::InvalidProperty(name.clone()));
                }
            }
            path.steps.push(step);
        }
        Ok(path)
    }

    pub fn package(&self) -> &str {
        &self.root
    }

    pub fn steps(&self) -> &[PathStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Appends `.name`; `name` must be an identifier name.
    pub fn property(mut self, name: &str) -> Result<Self, PathError> {
        if !is_identifier_name(name) {
            return Err(PathError::InvalidProperty(name.to_string()));
        }
        self.steps.push(PathStep::PropertyRead(name.to_string()));
        Ok(self)
    }

    /// Appends `()`. A call to a registration method collapses to its receiver.
    pub fn call_return(mut self) -> Self {
        match self.steps.last() {
            Some(PathStep::PropertyRead(m)) if is_registration_method(m) => {
                self.steps.pop();
            }
            _ => self.steps.push(PathStep::CallReturn),
        }
        self
    }

    pub fn argument(mut self, index: u32) -> Self {
        self.steps.push(PathStep::Argument(index));
        self
    }

    pub fn instance(mut self) -> Self {
        self.steps.push(PathStep::Instance);
        self
    }

    pub fn push(self, step: PathStep) -> Result<Self, PathError> {
        Ok(match step {
            PathStep::PropertyRead(name) => return self.property(&name),
            PathStep::CallReturn => self.call_return(),
            PathStep::Argument(i) => self.argument(i),
            PathStep::Instance => self.instance(),
        })
    }

    /// Removes every `.m()` where `m` is a registration method, so the path
    /// names the emitter rather than the value returned by registering on it.
    pub fn rewrite_chained_aliases(&self) -> AccessPath {
        let mut steps: Vec<PathStep> = Vec::with_capacity(self.steps.len());
        for step in &self.steps {
            match (step, steps.last()) {
                (PathStep::CallReturn, Some(PathStep::PropertyRead(m))) if is_registration_method(m) => {
                    steps.pop();
                }
                _ => steps.push(step.clone()),
            }
        }
        AccessPath { root: self.root.clone(), steps }
    }

    /// Parses the canonical serialization.
    pub fn parse(text: &str) -> Result<Self, PathError> {
        let err = |offset: usize| PathError::Syntax { text: text.to_string(), offset };
        let rest = text.strip_prefix("require(").ok_or_else(|| err(0))?;
        let close = rest.find(')').ok_or_else(|| err(text.len()))?;
        let pkg = &rest[..close];
        let mut path = Self::root(pkg).map_err(|_| err(8))?;
        let mut i = 8 + close + 1;
        let bytes = text.as_bytes();
        while i < text.len() {
            let tail = &text[i..];
            if let Some(after) = tail.strip_prefix("[new]()") {
                path.steps.push(PathStep::Instance);
                i = text.len() - after.len();
            } else if let Some(after) = tail.strip_prefix("()") {
                path.steps.push(PathStep::CallReturn);
                i = text.len() - after.len();
            } else if bytes[i] == b'(' {
                let digits_end = tail[1..].find(')').ok_or_else(|| err(i))? + 1;
                let digits = &tail[1..digits_end];
                // Canonical form has no sign and no leading zeros.
                let canonical = !digits.is_empty()
                    && digits.bytes().all(|b| b.is_ascii_digit())
                    && (digits == "0" || !digits.starts_with('0'));
                if !canonical {
                    return Err(err(i + 1));
                }
                let index = digits.parse::<u32>().map_err(|_| err(i + 1))?;
                path.steps.push(PathStep::Argument(index));
                i += digits_end + 1;
            } else if bytes[i] == b'.' {
                let name_len = tail[1..]
                    .char_indices()
                    .find(|&(j, c)| if j == 0 { !is_id_start(c) } else { !is_id_continue(c) })
                    .map_or(tail.len() - 1, |(j, _)| j);
                if name_len == 0 {
                    return Err(err(i + 1));
                }
                path.steps.push(PathStep::PropertyRead(tail[1..1 + name_len].to_string()));
                i += 1 + name_len;
            } else {
                return Err(err(i));
            }
        }
        Ok(path)
    }
}

impl fmt::Display for PathStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathStep::PropertyRead(name) => write!(f, ".{name}"),
            PathStep::CallReturn => f.write_str("()"),
            PathStep::Argument(i) => write!(f, "({i})"),
            PathStep::Instance => f.write_str("[new]()"),
        }
    }
}

impl fmt::Display for AccessPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "require({})", self.root)?;
        self.steps.iter().try_for_each(|s| s.fmt(f))
    }
}

impl FromStr for AccessPath {
    type Err = PathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AccessPath::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn res_path() -> AccessPath {
        AccessPath::root("http").unwrap().property("request").unwrap().argument(1).argument(0)
    }

    #[test]
    fn serializes_the_response_path() {
        assert_eq!(res_path().to_string(), "require(http).request(1)(0)");
    }

    #[test]
    fn parses_instance_steps() {
        let p: AccessPath = "require(events).EventEmitter[new]()".parse().unwrap();
        assert_eq!(p.package(), "events");
        assert_eq!(p.steps(), &[PathStep::PropertyRead("EventEmitter".into()), PathStep::Instance]);
    }

    #[test]
    fn scoped_packages_round_trip() {
        let text = "require(@scope/pkg-name.js).a.b()(12)[new]()";
        assert_eq!(AccessPath::parse(text).unwrap().to_string(), text);
    }

    #[test]
    fn rejects_malformed_text() {
        for bad in [
            "",
            "require()",
            "require(http",
            "require(http).",
            "require(http)x",
            "require(http).request(01)",
            "require(http).request(-1)",
            "require(http).request(1",
            "require(http)[new]",
            "http.request()",
            "require(http).1abc",
        ] {
            assert!(AccessPath::parse(bad).is_err(), "{bad:?} should be rejected");
        }
    }

    #[test]
    fn rewrite_drops_registration_results() {
        let chained = res_path().push(PathStep::PropertyRead("on".into())).unwrap();
        let mut raw = chained.clone();
        raw.steps.push(PathStep::CallReturn);
        raw.steps.push(PathStep::PropertyRead("on".into()));
        raw.steps.push(PathStep::CallReturn);
        assert_eq!(raw.to_string(), "require(http).request(1)(0).on().on()");
        assert_eq!(raw.rewrite_chained_aliases(), res_path());
        assert_eq!(chained.rewrite_chained_aliases(), chained);
    }

    #[test]
    fn registration_callback_parameters_are_not_rewritten() {
        let p = AccessPath::parse("require(http).request().on(1)(0)").unwrap();
        assert_eq!(p.rewrite_chained_aliases(), p);
    }

    #[test]
    fn non_registration_calls_are_kept() {
        let p = AccessPath::parse("require(http).request()").unwrap();
        assert_eq!(p.rewrite_chained_aliases(), p);
        let p = AccessPath::from_steps("x", vec![PathStep::PropertyRead("emit".into()), PathStep::CallReturn]).unwrap();
        assert_eq!(p.rewrite_chained_aliases(), p);
    }

    #[test]
    fn builder_collapses_registration_calls() {
        let p = res_path().property("once").unwrap().call_return();
        assert_eq!(p, res_path());
    }

    #[test]
    fn property_names_must_be_identifiers() {
        assert!(AccessPath::root("x").unwrap().property("foo-bar").is_err());
        assert!(AccessPath::root("a)b").is_err());
    }
}
