//! Turning usage traces into parameter types, and return-type recording.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::analysis::TestCluster;
use crate::trace::UsageTrace;
use crate::types::{ClassId, CollectionKind, GradualType};

/// Special methods whose recorded operand type is proposed as the
/// parameter's own type.
pub const OPERAND_METHODS: [&str; 24] = [
    "__eq__", "__ne__", "__lt__", "__le__", "__gt__", "__ge__", "__add__", "__radd__", "__sub__",
    "__rsub__", "__mul__", "__rmul__", "__truediv__", "__rtruediv__", "__floordiv__", "__rfloordiv__",
    "__mod__", "__rmod__", "__pow__", "__rpow__", "__and__", "__rand__", "__or__", "__ror__",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionWeights {
    pub dev: f64,
    pub none: f64,
    pub any: f64,
    pub union: f64,
}

impl Default for SelectionWeights {
    fn default() -> Self {
        SelectionWeights {
            dev: 10.0,
            none: 1.0,
            any: 5.0,
            union: 10.0,
        }
    }
}

impl fmt::Display for SelectionWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.dev, self.none, self.any, self.union)
    }
}

impl FromStr for SelectionWeights {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad weight `{p}`: {e}")))
            .collect::<Result<_, _>>()?;
        let [dev, none, any, union] = parts[..] else {
            return Err(format!("expected four weights, got {}", parts.len()));
        };
        if parts.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err("weights must be finite and non-negative".into());
        }
        if any <= 0.0 && none <= 0.0 && dev <= 0.0 && union <= 0.0 {
            return Err("at least one weight must be positive".into());
        }
        Ok(SelectionWeights { dev, none, any, union })
    }
}

/// Which of the four selection options was drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Choice {
    Dev,
    None,
    Any,
    Union,
}

/// Candidate types suggested by `trace`, in strategy order, without
/// duplicates.
pub fn infer_candidates(trace: &UsageTrace, cluster: &TestCluster) -> Vec<GradualType> {
    let h = &cluster.hierarchy;
    let mut out: Vec<GradualType> = Vec::new();
    let add = |t: GradualType, out: &mut Vec<GradualType>| {
        let t = h.unify(&t);
        if !out.contains(&t) {
            out.push(t);
        }
    };

    // isinstance targets
    for c in &trace.typecheck_targets {
        if c.index() < h.len() {
            add(GradualType::Instance(*c), &mut out);
        }
    }

    // operand types of comparisons and arithmetic
    for name in OPERAND_METHODS {
        if let Some(operands) = trace.method_invocations.get(name) {
            for t in operands {
                if !t.is_any() && *t != GradualType::None {
                    add(t.clone(), &mut out);
                }
            }
        }
    }

    // classes providing every accessed attribute and invoked method
    for c in attribute_candidates(trace, cluster) {
        add(GradualType::Instance(c), &mut out);
    }

    // refine collection candidates by their element evidence
    if let Some(element) = trace.element.as_deref() {
        if !element.is_empty() {
            let elements = infer_candidates(element, cluster);
            let collections: Vec<CollectionKind> = out
                .iter()
                .filter_map(|t| match t {
                    GradualType::Collection(kind, _) => Some(*kind),
                    _ => None,
                })
                .collect();
            for kind in collections {
                for e in &elements {
                    let refined = match kind {
                        CollectionKind::Dict => GradualType::dict(GradualType::Instance(ClassId::STR), e.clone()),
                        _ => GradualType::Collection(kind, vec![e.clone()]),
                    };
                    add(refined, &mut out);
                }
            }
        }
    }
    out
}

/// Strategy 3 alone: classes whose attribute closure covers the traced
/// attributes and evidential methods, ignoring names every object has.
pub fn attribute_candidates(trace: &UsageTrace, cluster: &TestCluster) -> BTreeSet<ClassId> {
    let h = &cluster.hierarchy;
    let universal = h.attribute_closure(ClassId::OBJECT);
    let required: BTreeSet<String> = trace
        .attribute_accesses
        .iter()
        .map(String::as_str)
        .chain(trace.evidential_methods())
        .filter(|a| !universal.contains(a))
        .map(str::to_string)
        .collect();
    if required.is_empty() {
        return BTreeSet::new();
    }
    cluster.classes_with_attributes(&required)
}

/// Weighted draw among the available options; `None` availability is
/// implied, `Any` always available.
pub fn draw_choice(has_dev: bool, has_union: bool, w: &SelectionWeights, rng: &mut impl Rng) -> Choice {
    let options = [
        (Choice::Dev, if has_dev { w.dev } else { 0.0 }),
        (Choice::None, w.none),
        (Choice::Any, w.any),
        (Choice::Union, if has_union { w.union } else { 0.0 }),
    ];
    let total: f64 = options.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return Choice::Any;
    }
    let mut x = rng.gen::<f64>() * total;
    for (c, w) in options {
        if w > 0.0 {
            if x < w {
                return c;
            }
            x -= w;
        }
    }
    // rounding fell off the end: last positive option
    options.iter().rev().find(|(_, w)| *w > 0.0).map(|(c, _)| *c).unwrap_or(Choice::Any)
}

/// The type to generate for parameter `param` of `callable`.
pub fn select_parameter_type(
    callable: usize,
    param: usize,
    cluster: &TestCluster,
    weights: &SelectionWeights,
    rng: &mut impl Rng,
) -> GradualType {
    let declared = &cluster.callables[callable].params[param].declared;
    let candidates = match cluster.traces.get(&(callable, param)) {
        Some(t) => infer_candidates(t, cluster),
        None => Vec::new(),
    };
    match draw_choice(!declared.is_any(), !candidates.is_empty(), weights, rng) {
        Choice::Dev => declared.clone(),
        Choice::None => GradualType::None,
        Choice::Any => GradualType::Any,
        Choice::Union => candidates[rng.gen_range(0..candidates.len())].clone(),
    }
}

/// Adds an observed return type to the callable's recorded union.
pub fn record_return(cluster: &mut TestCluster, callable: usize, observed: &GradualType, cap: usize) {
    let previous = cluster.recorded_returns.get(&callable).cloned().unwrap_or(GradualType::Any);
    let next = cluster.hierarchy.union_with_cap(&previous, observed, cap);
    cluster.recorded_returns.insert(callable, next);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{CallableInfo, CallableKind, ParamInfo};
    use crate::types::ClassHierarchy;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn universe() -> TestCluster {
        let mut h = ClassHierarchy::new();
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        h.set_attributes(ClassId::OBJECT, set(&["__eq__", "__init__", "__str__"]));
        h.set_attributes(ClassId::STR, set(&["endswith", "__len__", "__iter__", "__add__"]));
        h.set_attributes(ClassId::LIST, set(&["append", "__len__", "__iter__"]));
        h.set_attributes(ClassId::INT, set(&["bit_length", "__add__"]));
        let node = h.add_class("p.Node", vec![ClassId::OBJECT], set(&["name", "children"]), false).unwrap();
        h.add_class("p.ClassDef", vec![node], set(&["bases"]), false).unwrap();
        h.add_class("p.Import", vec![node], set(&["names"]), false).unwrap();
        let mut c = TestCluster::from_hierarchy(h);
        c.callables.push(CallableInfo {
            kind: CallableKind::Function,
            qualified_name: "p.f".into(),
            local_name: "f".into(),
            module: "p".into(),
            name: "f".into(),
            owner: None,
            params: vec![ParamInfo {
                name: "x".into(),
                declared: GradualType::Instance(ClassId::INT),
            }],
            declared_return: GradualType::Any,
            line: 1,
            col: 0,
            in_subject: true,
        });
        c
    }

    #[test]
    fn attribute_evidence_picks_the_single_provider() {
        let c = universe();
        let mut t = UsageTrace::default();
        t.record_attribute("bases");
        let class_def = c.hierarchy.lookup("p.ClassDef").unwrap();
        assert_eq!(infer_candidates(&t, &c), vec![GradualType::Instance(class_def)]);
        let mut t = UsageTrace::default();
        t.record_attribute("endswith");
        assert_eq!(infer_candidates(&t, &c), vec![GradualType::Instance(ClassId::STR)]);
    }

    #[test]
    fn typecheck_and_operand_evidence() {
        let c = universe();
        let mut t = UsageTrace::default();
        t.record_typecheck(ClassId::INT);
        t.record_typecheck(ClassId::FLOAT);
        let got = infer_candidates(&t, &c);
        assert_eq!(got, vec![GradualType::Instance(ClassId::INT), GradualType::Instance(ClassId::FLOAT)]);
        let mut t = UsageTrace::default();
        t.record_method("__eq__", Some(GradualType::Instance(ClassId::INT)));
        assert_eq!(infer_candidates(&t, &c), vec![GradualType::Instance(ClassId::INT)]);
        assert!(infer_candidates(&UsageTrace::default(), &c).is_empty());
    }

    #[test]
    fn element_evidence_refines_collections() {
        let c = universe();
        let mut t = UsageTrace::default();
        t.record_method("__iter__", None);
        let mut e = UsageTrace::default();
        e.record_attribute("names");
        t.element = Some(Box::new(e));
        let import = c.hierarchy.lookup("p.Import").unwrap();
        let got = infer_candidates(&t, &c);
        assert!(got.contains(&GradualType::list(GradualType::Instance(import))), "{got:?}");
        assert!(got.contains(&GradualType::Instance(ClassId::STR)));
    }

    #[test]
    fn selection_renormalizes_over_available_options() {
        let w = SelectionWeights::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 4];
        let n = 60_000;
        for _ in 0..n {
            let i = match draw_choice(false, false, &w, &mut rng) {
                Choice::Dev => 0,
                Choice::None => 1,
                Choice::Any => 2,
                Choice::Union => 3,
            };
            counts[i] += 1;
        }
        assert_eq!(counts[0] + counts[3], 0);
        let p_any = counts[2] as f64 / n as f64;
        assert!((p_any - 5.0 / 6.0).abs() < 0.01, "{p_any}");
    }

    #[test]
    fn select_uses_annotation_none_any_and_union() {
        let mut c = universe();
        let mut t = UsageTrace::default();
        t.record_attribute("bases");
        c.traces.insert((0, 0), t);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..500 {
            seen.insert(select_parameter_type(0, 0, &c, &SelectionWeights::default(), &mut rng));
        }
        let class_def = c.hierarchy.lookup("p.ClassDef").unwrap();
        let expected = [
            GradualType::Instance(ClassId::INT),
            GradualType::None,
            GradualType::Any,
            GradualType::Instance(class_def),
        ];
        assert_eq!(seen, expected.into_iter().collect());
    }

    #[test]
    fn record_return_builds_capped_unions() {
        let mut c = universe();
        let s = GradualType::Instance(ClassId::STR);
        record_return(&mut c, 0, &s, 5);
        assert_eq!(c.recorded_returns[&0], s);
        record_return(&mut c, 0, &s, 5);
        assert_eq!(c.recorded_returns[&0], s);
        record_return(&mut c, 0, &GradualType::None, 5);
        assert_eq!(c.recorded_returns[&0], GradualType::Union(vec![s.clone(), GradualType::None]));
    }

    #[test]
    fn weights_parse() {
        assert_eq!("10,1,5,10".parse::<SelectionWeights>().unwrap(), SelectionWeights::default());
        assert!("1,2,3".parse::<SelectionWeights>().is_err());
        assert!("0,0,0,0".parse::<SelectionWeights>().is_err());
        assert!("1,-1,1,1".parse::<SelectionWeights>().is_err());
    }

    fn arb_trace() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec(
            prop::sample::select(vec!["bases", "names", "name", "children", "endswith", "append", "bit_length"]),
            0..4,
        )
        .prop_map(|v| v.into_iter().map(str::to_string).collect())
    }

    proptest! {
        #[test]
        fn attribute_candidates_provide_every_traced_attribute(attrs in arb_trace(), more in arb_trace()) {
            let c = universe();
            let mut t = UsageTrace::default();
            attrs.iter().for_each(|a| t.record_attribute(a));
            let small = attribute_candidates(&t, &c);
            for id in &small {
                let closure = c.hierarchy.attribute_closure(*id);
                for a in &attrs {
                    prop_assert!(closure.contains(a.as_str()));
                }
            }
            // more evidence never adds attribute-based candidates
            let mut t2 = t.clone();
            more.iter().for_each(|a| t2.record_attribute(a));
            if !attrs.is_empty() {
                prop_assert!(attribute_candidates(&t2, &c).is_subset(&small));
            }
        }

        #[test]
        fn selection_depends_only_on_the_seed(seed in any::<u64>()) {
            let c = universe();
            let a = select_parameter_type(0, 0, &c, &SelectionWeights::default(), &mut ChaCha8Rng::seed_from_u64(seed));
            let b = select_parameter_type(0, 0, &c, &SelectionWeights::default(), &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(a, b);
        }
    }
}
