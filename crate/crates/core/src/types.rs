//! Internal gradual type system.
//!
//! Types are plain values ([`GradualType`]) that reference classes by
//! [`ClassId`]. All relational questions (consistency, subclassing,
//! rendering) go through a [`ClassHierarchy`], which owns the nominal
//! inheritance graph of one test cluster.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a class inside a [`ClassHierarchy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassId(pub u32);

impl ClassId {
    pub const OBJECT: ClassId = ClassId(0);
    pub const INT: ClassId = ClassId(1);
    pub const BOOL: ClassId = ClassId(2);
    pub const FLOAT: ClassId = ClassId(3);
    pub const STR: ClassId = ClassId(4);
    pub const LIST: ClassId = ClassId(5);
    pub const SET: ClassId = ClassId(6);
    pub const DICT: ClassId = ClassId(7);
    pub const TUPLE: ClassId = ClassId(8);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Builtin classes registered in every hierarchy, in `ClassId` order.
pub const CORE_BUILTINS: [(&str, Option<ClassId>); 9] = [
    ("object", None),
    ("int", Some(ClassId::OBJECT)),
    ("bool", Some(ClassId::INT)),
    ("float", Some(ClassId::OBJECT)),
    ("str", Some(ClassId::OBJECT)),
    ("list", Some(ClassId::OBJECT)),
    ("set", Some(ClassId::OBJECT)),
    ("dict", Some(ClassId::OBJECT)),
    ("tuple", Some(ClassId::OBJECT)),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CollectionKind {
    List,
    Set,
    Dict,
    /// `tuple[T, ...]`
    TupleVariadic,
}

impl CollectionKind {
    pub fn class(self) -> ClassId {
        match self {
            CollectionKind::List => ClassId::LIST,
            CollectionKind::Set => ClassId::SET,
            CollectionKind::Dict => ClassId::DICT,
            CollectionKind::TupleVariadic => ClassId::TUPLE,
        }
    }

    pub fn from_class(id: ClassId) -> Option<CollectionKind> {
        match id {
            ClassId::LIST => Some(CollectionKind::List),
            ClassId::SET => Some(CollectionKind::Set),
            ClassId::DICT => Some(CollectionKind::Dict),
            ClassId::TUPLE => Some(CollectionKind::TupleVariadic),
            _ => None,
        }
    }

    /// Number of element slots carried by the collection type.
    pub fn arity(self) -> usize {
        match self {
            CollectionKind::Dict => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CollectionKind::List => "list",
            CollectionKind::Set => "set",
            CollectionKind::Dict => "dict",
            CollectionKind::TupleVariadic => "tuple",
        }
    }
}

/// A possibly partial type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GradualType {
    Any,
    None,
    Instance(ClassId),
    /// Ordered, flattened, duplicate-free, at least two members once unified.
    Union(Vec<GradualType>),
    /// Fixed-arity tuple with one type per slot.
    Tuple(Vec<GradualType>),
    /// Builtin generic collection. `Dict` carries `[key, value]`, the others
    /// a single element slot.
    Collection(CollectionKind, Vec<GradualType>),
    /// A parametrised class as written in an annotation. Never survives
    /// [`ClassHierarchy::unify`].
    Generic(ClassId, Vec<GradualType>),
}

impl GradualType {
    pub fn list(element: GradualType) -> Self {
        GradualType::Collection(CollectionKind::List, vec![element])
    }

    pub fn set(element: GradualType) -> Self {
        GradualType::Collection(CollectionKind::Set, vec![element])
    }

    pub fn dict(key: GradualType, value: GradualType) -> Self {
        GradualType::Collection(CollectionKind::Dict, vec![key, value])
    }

    pub fn tuple_of(element: GradualType) -> Self {
        GradualType::Collection(CollectionKind::TupleVariadic, vec![element])
    }

    pub fn bare(kind: CollectionKind) -> Self {
        GradualType::Collection(kind, vec![GradualType::Any; kind.arity()])
    }

    pub fn is_any(&self) -> bool {
        matches!(self, GradualType::Any)
    }

    /// Members of a union, or the type itself.
    pub fn members(&self) -> &[GradualType] {
        match self {
            GradualType::Union(members) => members,
            other => std::slice::from_ref(other),
        }
    }
}

/// Nominal information about one class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassRef {
    pub id: ClassId,
    pub qualified_name: String,
    pub superclasses: Vec<ClassId>,
    pub declared_attributes: BTreeSet<String>,
    pub builtin: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HierarchyError {
    #[error("class `{0}` is already registered")]
    Duplicate(String),
    #[error("unknown superclass id {0:?}")]
    UnknownBase(ClassId),
}

/// The class universe of one test cluster plus its inheritance graph.
///
/// Classes can only name already-registered superclasses, so the graph is
/// acyclic by construction.
#[derive(Debug, Clone)]
pub struct ClassHierarchy {
    classes: Vec<ClassRef>,
    by_name: HashMap<String, ClassId>,
    // strict ancestors, sorted
    ancestors: Vec<Vec<ClassId>>,
}

impl Default for ClassHierarchy {
    fn default() -> Self {
        Self::new()
    }
}

impl ClassHierarchy {
    /// A hierarchy holding only the core builtins.
    pub fn new() -> Self {
        let mut hierarchy = ClassHierarchy {
            classes: Vec::new(),
            by_name: HashMap::new(),
            ancestors: Vec::new(),
        };
        for (name, base) in CORE_BUILTINS {
            hierarchy
                .add_class(name, base.into_iter().collect(), BTreeSet::new(), true)
                .expect("core builtins are unique");
        }
        hierarchy
    }

    pub fn add_class(
        &mut self,
        name: &str,
        superclasses: Vec<ClassId>,
        declared_attributes: BTreeSet<String>,
        builtin: bool,
    ) -> Result<ClassId, HierarchyError> {
        if self.by_name.contains_key(name) {
            return Err(HierarchyError::Duplicate(name.to_string()));
        }
        let mut ancestors = BTreeSet::new();
        for base in &superclasses {
            let list = self
                .ancestors
                .get(base.index())
                .ok_or(HierarchyError::UnknownBase(*base))?;
            ancestors.insert(*base);
            ancestors.extend(list.iter().copied());
        }
        let id = ClassId(self.classes.len() as u32);
        self.classes.push(ClassRef {
            id,
            qualified_name: name.to_string(),
            superclasses,
            declared_attributes,
            builtin,
        });
        self.ancestors.push(ancestors.into_iter().collect());
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn set_attributes(&mut self, id: ClassId, attributes: BTreeSet<String>) {
        self.classes[id.index()].declared_attributes = attributes;
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class(&self, id: ClassId) -> &ClassRef {
        &self.classes[id.index()]
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassRef> {
        self.classes.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = ClassId> {
        (0..self.classes.len() as u32).map(ClassId)
    }

    pub fn lookup(&self, qualified_name: &str) -> Option<ClassId> {
        self.by_name.get(qualified_name).copied()
    }

    pub fn ancestors(&self, id: ClassId) -> &[ClassId] {
        &self.ancestors[id.index()]
    }

    /// Reflexive nominal subclass check.
    pub fn is_subclass(&self, sub: ClassId, sup: ClassId) -> bool {
        sub == sup || self.ancestors[sub.index()].binary_search(&sup).is_ok()
    }

    /// All classes that are `id` or inherit from it.
    pub fn descendants_or_self(&self, id: ClassId) -> Vec<ClassId> {
        self.ids().filter(|c| self.is_subclass(*c, id)).collect()
    }

    /// Attribute names available on instances: own declarations plus every
    /// ancestor's.
    pub fn attribute_closure(&self, id: ClassId) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self.classes[id.index()]
            .declared_attributes
            .iter()
            .map(String::as_str)
            .collect();
        for ancestor in &self.ancestors[id.index()] {
            out.extend(
                self.classes[ancestor.index()]
                    .declared_attributes
                    .iter()
                    .map(String::as_str),
            );
        }
        out
    }

    /// Whether a value of type `s` may be used where `t` is expected.
    pub fn is_consistent(&self, s: &GradualType, t: &GradualType) -> bool {
        use GradualType::*;
        match (s, t) {
            (Any, _) | (_, Any) => true,
            (Union(members), _) => members.iter().all(|m| self.is_consistent(m, t)),
            (_, Union(members)) => members.iter().any(|m| self.is_consistent(s, m)),
            (Generic(..), _) | (_, Generic(..)) => {
                self.is_consistent(&self.unify(s), &self.unify(t))
            }
            (None, None) => true,
            (None, Instance(c)) => *c == ClassId::OBJECT,
            (None, _) | (_, None) => false,
            (Instance(a), Instance(b)) => self.is_subclass(*a, *b),
            (Instance(a), Collection(kind, _)) => self.is_subclass(*a, kind.class()),
            (Instance(a), Tuple(_)) => self.is_subclass(*a, ClassId::TUPLE),
            (Collection(kind, _), Instance(b)) => self.is_subclass(kind.class(), *b),
            (Tuple(_), Instance(b)) => self.is_subclass(ClassId::TUPLE, *b),
            (Collection(k1, e1), Collection(k2, e2)) => {
                k1 == k2
                    && e1.len() == e2.len()
                    && e1.iter().zip(e2).all(|(a, b)| self.is_consistent(a, b))
            }
            (Tuple(a), Tuple(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| self.is_consistent(x, y))
            }
            (Tuple(a), Collection(CollectionKind::TupleVariadic, e)) => {
                a.iter().all(|x| self.is_consistent(x, &e[0]))
            }
            (Collection(CollectionKind::TupleVariadic, e), Tuple(_)) => e[0].is_any(),
            _ => false,
        }
    }

    /// Canonical form of a type.
    pub fn unify(&self, t: &GradualType) -> GradualType {
        use GradualType::*;
        match t {
            Any => Any,
            None => None,
            Instance(c) => match CollectionKind::from_class(*c) {
                Some(kind) => GradualType::bare(kind),
                _ => Instance(*c),
            },
            Generic(c, args) => match CollectionKind::from_class(*c) {
                Some(CollectionKind::TupleVariadic) if !args.is_empty() => {
                    Tuple(args.iter().map(|a| self.unify(a)).collect())
                }
                Some(kind) => {
                    let mut slots: Vec<GradualType> =
                        args.iter().take(kind.arity()).map(|a| self.unify(a)).collect();
                    slots.resize(kind.arity(), Any);
                    Collection(kind, slots)
                }
                _ => Instance(*c),
            },
            Union(members) => {
                let mut flat = Vec::new();
                for member in members {
                    for m in self.unify(member).members() {
                        if !flat.contains(m) {
                            flat.push(m.clone());
                        }
                    }
                }
                match flat.len() {
                    0 => Any,
                    1 => flat.pop().expect("one member"),
                    _ => Union(flat),
                }
            }
            Tuple(elements) => Tuple(elements.iter().map(|e| self.unify(e)).collect()),
            Collection(kind, elements) => {
                let mut slots: Vec<GradualType> = elements
                    .iter()
                    .take(kind.arity())
                    .map(|e| self.unify(e))
                    .collect();
                slots.resize(kind.arity(), Any);
                Collection(*kind, slots)
            }
        }
    }

    /// Adds `new` to `existing`, keeping at most `cap` union members in
    /// insertion order. Subtype-related members are both kept.
    pub fn union_with_cap(&self, existing: &GradualType, new: &GradualType, cap: usize) -> GradualType {
        let cap = cap.max(1);
        let members_of = |t: &GradualType| match t {
            GradualType::Any => Vec::new(),
            t => self.unify(t).members().to_vec(),
        };
        let mut members: Vec<GradualType> = Vec::new();
        for m in members_of(existing).iter().chain(&members_of(new)) {
            if members.len() == cap {
                break;
            }
            if !members.contains(m) {
                members.push(m.clone());
            }
        }
        self.unify(&GradualType::Union(members))
    }

    /// Human-readable rendering: lowercase builtins, qualified class names,
    /// unions as the sorted member list.
    pub fn render(&self, t: &GradualType) -> String {
        match t {
            GradualType::Any => "Any".to_string(),
            GradualType::None => "none".to_string(),
            GradualType::Instance(c) => self.class(*c).qualified_name.clone(),
            GradualType::Union(members) => {
                let mut names: Vec<String> = members.iter().map(|m| self.render(m)).collect();
                names.sort();
                names.join(" | ")
            }
            GradualType::Tuple(elements) => {
                let inner: Vec<String> = elements.iter().map(|e| self.render(e)).collect();
                format!("tuple[{}]", inner.join(", "))
            }
            GradualType::Collection(kind, elements) => {
                if elements.iter().all(GradualType::is_any) {
                    return kind.name().to_string();
                }
                let inner: Vec<String> = elements.iter().map(|e| self.render(e)).collect();
                match kind {
                    CollectionKind::TupleVariadic => format!("tuple[{}, ...]", inner[0]),
                    _ => format!("{}[{}]", kind.name(), inner.join(", ")),
                }
            }
            GradualType::Generic(..) => self.render(&self.unify(t)),
        }
    }

    /// Name of the outermost type constructor, as consumed by type-inference
    /// benchmarks that ignore generic parameters.
    pub fn render_outer(&self, t: &GradualType) -> String {
        match self.unify(t) {
            GradualType::Tuple(_) => "tuple".to_string(),
            GradualType::Collection(kind, _) => kind.name().to_string(),
            other => self.render(&other),
        }
    }

    /// Parses the output of [`render`](Self::render) (plus a few common
    /// spellings such as `None` and `Optional[..]`). Unknown names yield `None`.
    pub fn parse_type(&self, text: &str) -> Option<GradualType> {
        let text = text.trim();
        let parts = split_top_level(text, '|');
        if parts.len() > 1 {
            let members = parts
                .iter()
                .map(|p| self.parse_type(p))
                .collect::<Option<Vec<_>>>()?;
            return Some(self.unify(&GradualType::Union(members)));
        }
        if let Some(open) = text.find('[') {
            let close = text.rfind(']')?;
            let head = &text[..open];
            let args: Vec<&str> = split_top_level(&text[open + 1..close], ',');
            if head == "Optional" && args.len() == 1 {
                let inner = self.parse_type(args[0])?;
                return Some(self.unify(&GradualType::Union(vec![inner, GradualType::None])));
            }
            if head == "Union" {
                let members = args
                    .iter()
                    .map(|a| self.parse_type(a))
                    .collect::<Option<Vec<_>>>()?;
                return Some(self.unify(&GradualType::Union(members)));
            }
            let class = self.lookup(&head.to_lowercase()).or_else(|| self.lookup(head))?;
            if class == ClassId::TUPLE && args.len() == 2 && args[1].trim() == "..." {
                return Some(GradualType::tuple_of(self.parse_type(args[0])?));
            }
            let args = args
                .iter()
                .map(|a| self.parse_type(a))
                .collect::<Option<Vec<_>>>()?;
            return Some(self.unify(&GradualType::Generic(class, args)));
        }
        match text {
            "Any" | "typing.Any" => Some(GradualType::Any),
            "None" | "none" | "NoneType" => Some(GradualType::None),
            "List" => Some(GradualType::bare(CollectionKind::List)),
            "Dict" => Some(GradualType::bare(CollectionKind::Dict)),
            "Set" => Some(GradualType::bare(CollectionKind::Set)),
            "Tuple" => Some(GradualType::bare(CollectionKind::TupleVariadic)),
            name => self.lookup(name).map(|c| self.unify(&GradualType::Instance(c))),
        }
    }
}

fn split_top_level(text: &str, sep: char) -> Vec<&str> {
    let mut depth = 0i32;
    let mut start = 0;
    let mut parts = Vec::new();
    for (i, ch) in text.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(text[start..i].trim());
                start = i + ch.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(text[start..].trim());
    parts
}

impl fmt::Display for CollectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use GradualType::*;

    fn with_user_classes() -> (ClassHierarchy, ClassId, ClassId) {
        let mut h = ClassHierarchy::new();
        let base = h.add_class("m.Base", vec![ClassId::OBJECT], BTreeSet::new(), false).unwrap();
        let derived = h.add_class("m.Derived", vec![base], BTreeSet::new(), false).unwrap();
        (h, base, derived)
    }

    #[test]
    fn any_is_consistent_both_ways() {
        let h = ClassHierarchy::new();
        assert!(h.is_consistent(&Instance(ClassId::INT), &Any));
        assert!(h.is_consistent(&Any, &Instance(ClassId::STR)));
    }

    #[test]
    fn consistency_is_not_transitive() {
        let h = ClassHierarchy::new();
        let int = Instance(ClassId::INT);
        let str_ = Instance(ClassId::STR);
        assert!(h.is_consistent(&int, &Any));
        assert!(h.is_consistent(&Any, &str_));
        assert!(!h.is_consistent(&int, &str_));
    }

    #[test]
    fn collections_are_covariant() {
        let h = ClassHierarchy::new();
        let bools = GradualType::list(Instance(ClassId::BOOL));
        let ints = GradualType::list(Instance(ClassId::INT));
        assert!(h.is_consistent(&bools, &ints));
        assert!(!h.is_consistent(&ints, &bools));
        assert!(!h.is_consistent(&GradualType::set(Instance(ClassId::INT)), &ints));
    }

    #[test]
    fn none_only_with_none_any_and_object() {
        let h = ClassHierarchy::new();
        assert!(h.is_consistent(&None, &None));
        assert!(h.is_consistent(&None, &Any));
        assert!(h.is_consistent(&None, &Instance(ClassId::OBJECT)));
        assert!(!h.is_consistent(&None, &Instance(ClassId::INT)));
    }

    #[test]
    fn unions_on_either_side() {
        let (h, base, derived) = with_user_classes();
        let u = Union(vec![Instance(ClassId::INT), Instance(derived)]);
        assert!(!h.is_consistent(&u, &Instance(base)));
        assert!(h.is_consistent(&Instance(derived), &u));
        assert!(h.is_consistent(&Instance(ClassId::BOOL), &u));
        let both = Union(vec![Instance(derived), Instance(base)]);
        assert!(h.is_consistent(&both, &Instance(base)));
    }

    #[test]
    fn bare_and_any_parametrised_collections_unify() {
        let h = ClassHierarchy::new();
        let bare = h.unify(&Instance(ClassId::LIST));
        let explicit = h.unify(&Generic(ClassId::LIST, vec![Any]));
        assert_eq!(bare, explicit);
        assert_eq!(bare, GradualType::list(Any));
        assert_eq!(h.unify(&Instance(ClassId::DICT)), GradualType::dict(Any, Any));
    }

    #[test]
    fn user_generics_collapse_to_instance() {
        let (h, base, _) = with_user_classes();
        assert_eq!(h.unify(&Generic(base, vec![Instance(ClassId::INT)])), Instance(base));
    }

    #[test]
    fn unify_flattens_nested_unions() {
        let h = ClassHierarchy::new();
        let t = Union(vec![
            Instance(ClassId::INT),
            Union(vec![Instance(ClassId::INT), Instance(ClassId::STR)]),
        ]);
        assert_eq!(h.unify(&t), Union(vec![Instance(ClassId::INT), Instance(ClassId::STR)]));
        assert_eq!(h.unify(&Union(vec![None, None])), None);
    }

    #[test]
    fn union_with_cap_rules() {
        let h = ClassHierarchy::new();
        assert_eq!(h.union_with_cap(&Any, &Instance(ClassId::INT), 5), Instance(ClassId::INT));
        assert_eq!(
            h.union_with_cap(&Instance(ClassId::INT), &Instance(ClassId::BOOL), 5),
            Union(vec![Instance(ClassId::INT), Instance(ClassId::BOOL)])
        );
        let five = Union(vec![
            Instance(ClassId::INT),
            Instance(ClassId::STR),
            Instance(ClassId::FLOAT),
            Instance(ClassId::BOOL),
            None,
        ]);
        let six = h.union_with_cap(&five, &GradualType::list(Any), 5);
        assert_eq!(six, five);
        assert_eq!(h.union_with_cap(&five, &None, 5), five);
    }

    #[test]
    fn union_with_cap_one_keeps_first() {
        let h = ClassHierarchy::new();
        let t = h.union_with_cap(&Instance(ClassId::STR), &None, 1);
        assert_eq!(t, Instance(ClassId::STR));
    }

    #[test]
    fn rendering() {
        let (h, base, _) = with_user_classes();
        assert_eq!(h.render(&Instance(ClassId::INT)), "int");
        assert_eq!(h.render(&None), "none");
        assert_eq!(h.render(&Instance(base)), "m.Base");
        assert_eq!(h.render(&Union(vec![Instance(ClassId::STR), None])), "none | str");
        assert_eq!(h.render(&GradualType::list(Any)), "list");
        assert_eq!(h.render(&GradualType::dict(Instance(ClassId::STR), Instance(ClassId::INT))), "dict[str, int]");
        assert_eq!(h.render(&Tuple(vec![Instance(ClassId::STR), Instance(ClassId::INT)])), "tuple[str, int]");
        assert_eq!(h.render_outer(&GradualType::list(Instance(ClassId::INT))), "list");
    }

    #[test]
    fn parse_round_trips_render() {
        let (h, base, _) = with_user_classes();
        for t in [
            Instance(ClassId::INT),
            None,
            Instance(base),
            GradualType::list(Instance(ClassId::STR)),
            GradualType::dict(Instance(ClassId::STR), Instance(base)),
            Tuple(vec![Instance(ClassId::STR), Instance(ClassId::INT)]),
            GradualType::tuple_of(Instance(ClassId::INT)),
        ] {
            assert_eq!(h.parse_type(&h.render(&t)), Some(t.clone()), "{}", h.render(&t));
        }
        assert_eq!(
            h.parse_type("Optional[str]"),
            Some(Union(vec![Instance(ClassId::STR), None]))
        );
        assert_eq!(h.parse_type("m.Missing"), Option::None);
    }

    #[test]
    fn duplicate_and_unknown_base_rejected() {
        let mut h = ClassHierarchy::new();
        assert_eq!(
            h.add_class("int", vec![], BTreeSet::new(), true),
            Err(HierarchyError::Duplicate("int".into()))
        );
        assert_eq!(
            h.add_class("x", vec![ClassId(99)], BTreeSet::new(), false),
            Err(HierarchyError::UnknownBase(ClassId(99)))
        );
    }
}
