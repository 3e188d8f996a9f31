//! Usage traces: the evidence collected about one parameter while a proxy
//! wraps its argument.
//!
//! The proxy itself is a runtime value of the host interpreter
//! ([`crate::host::ProxyObj`]); it records into a shared [`UsageTrace`]
//! before forwarding every operation. This module holds the trace type and
//! the helpers to create proxies and pull their traces out again.

use std::cell::RefCell;
use std::rc::Rc;

use indexmap::{IndexMap, IndexSet};

use crate::host::{ProxyObj, Value};
use crate::types::{ClassId, GradualType};

/// Special methods every object supports; invoking them says nothing about
/// the argument's type.
pub const NO_EVIDENCE_METHODS: [&str; 5] = ["__bool__", "__str__", "__repr__", "__hash__", "__format__"];

/// Evidence about how a routine used one of its arguments.
///
/// Equality ignores insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UsageTrace {
    pub attribute_accesses: IndexSet<String>,
    /// Special method name to the set of observed operand types.
    pub method_invocations: IndexMap<String, IndexSet<GradualType>>,
    pub typecheck_targets: IndexSet<ClassId>,
    /// Evidence about the elements of a collection argument.
    pub element: Option<Box<UsageTrace>>,
}

impl UsageTrace {
    pub fn is_empty(&self) -> bool {
        self.attribute_accesses.is_empty()
            && self.method_invocations.is_empty()
            && self.typecheck_targets.is_empty()
            && self.element.as_ref().is_none_or(|e| e.is_empty())
    }

    pub fn record_attribute(&mut self, name: &str) {
        if !self.attribute_accesses.contains(name) {
            self.attribute_accesses.insert(name.to_string());
        }
    }

    /// Records a special-method call; `operand` is the type of the other
    /// operand for binary methods.
    pub fn record_method(&mut self, name: &str, operand: Option<GradualType>) {
        let entry = match self.method_invocations.get_mut(name) {
            Some(e) => e,
            None => self.method_invocations.entry(name.to_string()).or_default(),
        };
        if let Some(t) = operand {
            entry.insert(t);
        }
    }

    pub fn record_typecheck(&mut self, target: ClassId) {
        self.typecheck_targets.insert(target);
    }

    /// Component-wise union. Returns whether anything was added.
    pub fn merge(&mut self, other: &UsageTrace) -> bool {
        let mut changed = false;
        for a in &other.attribute_accesses {
            changed |= self.attribute_accesses.insert(a.clone());
        }
        for (name, operands) in &other.method_invocations {
            let entry = match self.method_invocations.get_mut(name) {
                Some(e) => e,
                None => {
                    changed = true;
                    self.method_invocations.entry(name.clone()).or_default()
                }
            };
            for t in operands {
                changed |= entry.insert(t.clone());
            }
        }
        for t in &other.typecheck_targets {
            changed |= self.typecheck_targets.insert(*t);
        }
        if let Some(e) = &other.element {
            if !e.is_empty() || self.element.is_none() {
                let mine = self.element.get_or_insert_with(Default::default);
                changed |= mine.merge(e);
            }
        }
        changed
    }

    /// Names of invoked special methods that carry type evidence.
    pub fn evidential_methods(&self) -> impl Iterator<Item = &str> {
        self.method_invocations
            .keys()
            .map(String::as_str)
            .filter(|m| !NO_EVIDENCE_METHODS.contains(m))
    }
}

/// Handle on the trace of one wrapped argument.
#[derive(Debug, Clone, Default)]
pub struct TraceCell(Rc<RefCell<UsageTrace>>);

impl TraceCell {
    pub fn new() -> Self {
        Self::default()
    }

    /// Wraps `value` in a fresh root proxy recording into this cell.
    pub fn wrap(&self, value: Value) -> Value {
        Value::Proxy(Rc::new(ProxyObj {
            wrapped: value,
            trace: self.0.clone(),
            depth: 0,
        }))
    }

    /// Takes the accumulated trace, leaving an empty one behind.
    pub fn extract_and_reset(&self) -> UsageTrace {
        std::mem::take(&mut *self.0.borrow_mut())
    }

    pub fn snapshot(&self) -> UsageTrace {
        self.0.borrow().clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_trace() -> impl Strategy<Value = UsageTrace> {
        let leaf = (
            proptest::collection::vec("[a-d]", 0..4),
            proptest::collection::vec(("__(eq|lt|add)__", 0u32..4), 0..4),
            proptest::collection::vec(0u32..6, 0..3),
        )
            .prop_map(|(attrs, methods, checks)| {
                let mut t = UsageTrace::default();
                for a in attrs {
                    t.record_attribute(&a);
                }
                for (m, c) in methods {
                    t.record_method(&m, Some(GradualType::Instance(ClassId(c))));
                }
                for c in checks {
                    t.record_typecheck(ClassId(c));
                }
                t
            });
        (leaf.clone(), proptest::option::of(leaf)).prop_map(|(mut t, e)| {
            t.element = e.map(Box::new);
            t
        })
    }

    fn merged(a: &UsageTrace, b: &UsageTrace) -> UsageTrace {
        let mut out = a.clone();
        out.merge(b);
        out
    }

    proptest! {
        #[test]
        fn merge_is_commutative(a in arb_trace(), b in arb_trace()) {
            prop_assert_eq!(merged(&a, &b), merged(&b, &a));
        }

        #[test]
        fn merge_is_associative(a in arb_trace(), b in arb_trace(), c in arb_trace()) {
            prop_assert_eq!(merged(&merged(&a, &b), &c), merged(&a, &merged(&b, &c)));
        }

        #[test]
        fn merge_is_idempotent(a in arb_trace()) {
            let mut m = a.clone();
            prop_assert!(!m.merge(&a));
            prop_assert_eq!(m, a);
        }
    }

    #[test]
    fn empty_trace_is_empty() {
        assert!(UsageTrace::default().is_empty());
        let cell = TraceCell::new();
        assert!(cell.extract_and_reset().is_empty());
    }

    #[test]
    fn no_evidence_methods_are_filtered() {
        let mut t = UsageTrace::default();
        t.record_method("__bool__", None);
        t.record_method("__len__", None);
        assert_eq!(t.evidential_methods().collect::<Vec<_>>(), vec!["__len__"]);
    }
}
