//! Test cases: statement sequences over numbered variable slots.

use crate::analysis::TestCluster;
use crate::types::{ClassId, GradualType};

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    None,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<usize>),
    Set(Vec<usize>),
    Tuple(Vec<usize>),
    /// Key and value slots; keys are string statements.
    Dict(Vec<(usize, usize)>),
    /// No-argument instantiation of a builtin class.
    Object(ClassId),
    Construct { callable: usize, args: Vec<usize> },
    Call { callable: usize, args: Vec<usize> },
    Method { callable: usize, receiver: usize, args: Vec<usize> },
}

impl Statement {
    /// Slots this statement reads.
    pub fn references(&self) -> Vec<usize> {
        match self {
            Statement::List(v) | Statement::Set(v) | Statement::Tuple(v) => v.clone(),
            Statement::Dict(pairs) => pairs.iter().flat_map(|(k, v)| [*k, *v]).collect(),
            Statement::Construct { args, .. } | Statement::Call { args, .. } => args.clone(),
            Statement::Method { receiver, args, .. } => {
                let mut out = vec![*receiver];
                out.extend(args);
                out
            }
            _ => Vec::new(),
        }
    }

    pub fn references_mut(&mut self) -> Vec<&mut usize> {
        match self {
            Statement::List(v) | Statement::Set(v) | Statement::Tuple(v) => v.iter_mut().collect(),
            Statement::Dict(pairs) => pairs.iter_mut().flat_map(|(k, v)| [k, v]).collect(),
            Statement::Construct { args, .. } | Statement::Call { args, .. } => args.iter_mut().collect(),
            Statement::Method { receiver, args, .. } => {
                let mut out = vec![receiver];
                out.extend(args.iter_mut());
                out
            }
            _ => Vec::new(),
        }
    }

    pub fn callable(&self) -> Option<usize> {
        match self {
            Statement::Construct { callable, .. }
            | Statement::Call { callable, .. }
            | Statement::Method { callable, .. } => Some(*callable),
            _ => None,
        }
    }

    pub fn is_primitive(&self) -> bool {
        matches!(
            self,
            Statement::None | Statement::Bool(_) | Statement::Int(_) | Statement::Float(_) | Statement::Str(_)
        )
    }
}

/// A statement plus the type its slot was created for.
#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub stmt: Statement,
    pub ty: GradualType,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TestCase {
    pub statements: Vec<Slot>,
}

impl TestCase {
    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn push(&mut self, stmt: Statement, ty: GradualType) -> usize {
        self.statements.push(Slot { stmt, ty });
        self.statements.len() - 1
    }

    /// Def-use validity and callable bounds.
    pub fn is_valid(&self, cluster: &TestCluster, max_len: usize) -> bool {
        if self.len() > max_len {
            return false;
        }
        self.statements.iter().enumerate().all(|(i, s)| {
            let refs_ok = s.stmt.references().iter().all(|r| *r < i);
            let callable_ok = match &s.stmt {
                Statement::Construct { callable, args } | Statement::Call { callable, args } => cluster
                    .callables
                    .get(*callable)
                    .is_some_and(|c| c.params.len() == args.len()),
                Statement::Method { callable, args, .. } => cluster
                    .callables
                    .get(*callable)
                    .is_some_and(|c| c.params.len() == args.len()),
                Statement::Object(c) => c.index() < cluster.hierarchy.len(),
                _ => true,
            };
            refs_ok && callable_ok
        })
    }

    /// Number of statements calling into the cluster.
    pub fn call_count(&self) -> usize {
        self.statements.iter().filter(|s| s.stmt.callable().is_some()).count()
    }

    /// Removes statement `i`. Later references to it are rewired to the
    /// nearest earlier slot of a consistent type; statements that cannot be
    /// rewired are removed as well.
    pub fn remove_with_repair(&mut self, i: usize, cluster: &TestCluster) {
        let n = self.len();
        let mut removed = vec![false; n];
        removed[i] = true;
        for j in i + 1..n {
            let mut refs = self.statements[j].stmt.references();
            for r in refs.iter_mut() {
                if removed[*r] {
                    let want = &self.statements[*r].ty;
                    let replacement = (0..j).rev().find(|k| {
                        let t = &self.statements[*k].ty;
                        !removed[*k] && !t.is_any() && cluster.hierarchy.is_consistent(t, want)
                    });
                    match replacement {
                        Some(k) => *r = k,
                        None => {
                            removed[j] = true;
                            break;
                        }
                    }
                }
            }
            if !removed[j] {
                for (slot, new) in self.statements[j].stmt.references_mut().into_iter().zip(refs) {
                    *slot = new;
                }
            }
        }
        let mut remap = vec![usize::MAX; n];
        let mut next = 0;
        for k in 0..n {
            if !removed[k] {
                remap[k] = next;
                next += 1;
            }
        }
        let old = std::mem::take(&mut self.statements);
        for (k, mut slot) in old.into_iter().enumerate() {
            if removed[k] {
                continue;
            }
            for r in slot.stmt.references_mut() {
                *r = remap[*r];
            }
            self.statements.push(slot);
        }
    }

    /// Drops statements whose slots are never read and which do not call
    /// into the cluster.
    pub fn prune_unused(&mut self, cluster: &TestCluster) {
        loop {
            let used: Vec<bool> = {
                let mut used = vec![false; self.len()];
                for s in &self.statements {
                    for r in s.stmt.references() {
                        used[r] = true;
                    }
                }
                used
            };
            let victim = (0..self.len())
                .rev()
                .find(|i| !used[*i] && self.statements[*i].stmt.callable().is_none());
            match victim {
                Some(i) => self.remove_with_repair(i, cluster),
                None => break,
            }
        }
    }

    /// A canonical key for duplicate detection.
    pub fn key(&self) -> String {
        format!("{:?}", self.statements.iter().map(|s| &s.stmt).collect::<Vec<_>>())
    }
}
