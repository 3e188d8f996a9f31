//! Building statements that produce values of a requested type.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::analysis::{CallableKind, TestCluster};
use crate::host::ast::Const;
use crate::inference::{select_parameter_type, SelectionWeights};
use crate::search::testcase::{Statement, TestCase};
use crate::types::{ClassId, CollectionKind, GradualType};

/// Deepest nesting of constructor arguments and collection elements.
pub const MAX_DEPTH: usize = 3;

const DEFAULT_STRS: [&str; 6] = ["", "a", "abc", "x.y", "/", "foo"];
const DEFAULT_INTS: [i64; 6] = [0, 1, -1, 2, 10, 100];
const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789._/ ";

/// Seeded defaults plus literals harvested from the subject.
#[derive(Debug, Clone)]
pub struct ConstantPool {
    pub ints: Vec<i64>,
    pub floats: Vec<f64>,
    pub strs: Vec<String>,
}

impl ConstantPool {
    pub fn new(literals: &[Const]) -> Self {
        let mut pool = ConstantPool {
            ints: DEFAULT_INTS.to_vec(),
            floats: vec![0.0, 1.5, -2.25],
            strs: DEFAULT_STRS.iter().map(|s| s.to_string()).collect(),
        };
        for lit in literals {
            match lit {
                Const::Int(i) if !pool.ints.contains(i) => pool.ints.push(*i),
                Const::Float(f) if !pool.floats.contains(f) => pool.floats.push(*f),
                Const::Str(s) if !pool.strs.iter().any(|x| x == &**s) => pool.strs.push(s.to_string()),
                _ => {}
            }
        }
        pool
    }

    pub fn int(&self, rng: &mut impl Rng) -> i64 {
        if rng.gen_bool(0.5) {
            *self.ints.choose(rng).expect("non-empty pool")
        } else {
            rng.gen_range(-100..=100)
        }
    }

    pub fn float(&self, rng: &mut impl Rng) -> f64 {
        if rng.gen_bool(0.5) {
            *self.floats.choose(rng).expect("non-empty pool")
        } else {
            (rng.gen_range(-1000.0..1000.0f64) * 100.0).round() / 100.0
        }
    }

    pub fn str(&self, rng: &mut impl Rng) -> String {
        if rng.gen_bool(0.5) {
            self.strs.choose(rng).expect("non-empty pool").clone()
        } else {
            random_str(rng)
        }
    }
}

pub fn random_str(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(0..=8);
    (0..n).map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char).collect()
}

/// Everything the generators need besides the test being built.
pub struct GenContext<'a> {
    pub cluster: &'a TestCluster,
    pub weights: SelectionWeights,
    pub pool: &'a ConstantPool,
    /// Probability of reusing an existing slot of a consistent type.
    pub reuse: f64,
}

impl GenContext<'_> {
    /// Types `Any` may stand for: builtin scalars and collections plus
    /// every class with a constructor.
    pub fn concrete_types(&self) -> Vec<GradualType> {
        let mut out = vec![
            GradualType::Instance(ClassId::INT),
            GradualType::Instance(ClassId::BOOL),
            GradualType::Instance(ClassId::FLOAT),
            GradualType::Instance(ClassId::STR),
            GradualType::bare(CollectionKind::List),
            GradualType::bare(CollectionKind::Set),
            GradualType::bare(CollectionKind::Dict),
            GradualType::bare(CollectionKind::TupleVariadic),
        ];
        let mut classes: Vec<ClassId> = self.cluster.constructors.keys().copied().collect();
        classes.sort();
        out.extend(classes.into_iter().map(GradualType::Instance));
        out
    }

    /// Type recorded for the result slot of a call.
    pub fn result_type(&self, callable: usize) -> GradualType {
        let info = &self.cluster.callables[callable];
        match info.kind {
            CallableKind::Constructor => GradualType::Instance(info.owner.expect("owner")),
            _ => match self.cluster.recorded_returns.get(&callable) {
                Some(t) => t.clone(),
                None => info.declared_return.clone(),
            },
        }
    }

    /// Appends statements producing a value of `t`; `None` when the depth
    /// cap was hit.
    pub fn synthesize(&self, test: &mut TestCase, t: &GradualType, depth: usize, rng: &mut impl Rng) -> Option<usize> {
        if depth > MAX_DEPTH {
            return None;
        }
        let t = self.cluster.hierarchy.unify(t);
        if !t.is_any() && rng.gen_bool(self.reuse) {
            let reusable: Vec<usize> = (0..test.len())
                .filter(|i| {
                    let ty = &test.statements[*i].ty;
                    !ty.is_any() && self.cluster.hierarchy.is_consistent(ty, &t)
                })
                .collect();
            if let Some(i) = reusable.choose(rng) {
                return Some(*i);
            }
        }
        match &t {
            GradualType::Any => {
                let options = self.concrete_types();
                let pick = options.choose(rng).expect("builtins always available").clone();
                self.synthesize(test, &pick, depth, rng)
            }
            GradualType::None => Some(test.push(Statement::None, GradualType::None)),
            GradualType::Union(members) => {
                let pick = members.choose(rng).expect("unions are non-empty").clone();
                self.synthesize(test, &pick, depth, rng)
            }
            GradualType::Instance(c) => self.instance(test, *c, depth, rng),
            GradualType::Tuple(slots) => {
                let mut items = Vec::new();
                for s in slots {
                    items.push(self.synthesize(test, s, depth + 1, rng)?);
                }
                Some(test.push(Statement::Tuple(items), t.clone()))
            }
            GradualType::Collection(kind, slots) => {
                let n = rng.gen_range(0..=3);
                let mut stmt = match kind {
                    CollectionKind::List => Statement::List(Vec::new()),
                    CollectionKind::Set => Statement::Set(Vec::new()),
                    CollectionKind::TupleVariadic => Statement::Tuple(Vec::new()),
                    CollectionKind::Dict => Statement::Dict(Vec::new()),
                };
                // an element that cannot be built ends the collection early
                for _ in 0..n {
                    let mark = test.len();
                    let built = match &mut stmt {
                        Statement::Dict(pairs) => {
                            let k = test.push(Statement::Str(self.pool.str(rng)), GradualType::Instance(ClassId::STR));
                            self.synthesize(test, &slots[1], depth + 1, rng).map(|v| pairs.push((k, v)))
                        }
                        Statement::List(items) | Statement::Set(items) | Statement::Tuple(items) => {
                            self.synthesize(test, &slots[0], depth + 1, rng).map(|v| items.push(v))
                        }
                        _ => unreachable!("collection statements only"),
                    };
                    if built.is_none() {
                        test.statements.truncate(mark);
                        break;
                    }
                }
                Some(test.push(stmt, t.clone()))
            }
            GradualType::Generic(..) => unreachable!("unify removes generics"),
        }
    }

    fn instance(&self, test: &mut TestCase, c: ClassId, depth: usize, rng: &mut impl Rng) -> Option<usize> {
        let ty = GradualType::Instance(c);
        let stmt = match c {
            ClassId::INT => Statement::Int(self.pool.int(rng)),
            ClassId::BOOL => Statement::Bool(rng.gen()),
            ClassId::FLOAT => Statement::Float(self.pool.float(rng)),
            ClassId::STR => Statement::Str(self.pool.str(rng)),
            ClassId::OBJECT => Statement::Object(ClassId::OBJECT),
            _ => {
                let h = &self.cluster.hierarchy;
                let options: Vec<ClassId> = h
                    .descendants_or_self(c)
                    .into_iter()
                    .filter(|d| self.cluster.constructors.contains_key(d))
                    .collect();
                return match options.choose(rng) {
                    Some(pick) => {
                        let ctor = self.cluster.constructors[pick];
                        self.call(test, ctor, None, depth, rng)
                    }
                    None if h.class(c).builtin => Some(test.push(Statement::Object(c), ty)),
                    None => None,
                };
            }
        };
        Some(test.push(stmt, ty))
    }

    /// Appends a call of `callable`, building its receiver and arguments.
    /// A receiver slot may be supplied for methods.
    pub fn call(
        &self,
        test: &mut TestCase,
        callable: usize,
        receiver: Option<usize>,
        depth: usize,
        rng: &mut impl Rng,
    ) -> Option<usize> {
        let info = &self.cluster.callables[callable];
        let receiver = match (info.kind, receiver) {
            (CallableKind::Method, Some(r)) => Some(r),
            (CallableKind::Method, None) => {
                let owner = GradualType::Instance(info.owner.expect("methods have owners"));
                Some(self.synthesize(test, &owner, depth + 1, rng)?)
            }
            _ => None,
        };
        let mut args = Vec::with_capacity(info.params.len());
        for p in 0..info.params.len() {
            args.push(self.argument(test, callable, p, depth + 1, rng));
        }
        let stmt = match (info.kind, receiver) {
            (CallableKind::Constructor, _) => Statement::Construct { callable, args },
            (CallableKind::Function, _) => Statement::Call { callable, args },
            (CallableKind::Method, Some(receiver)) => Statement::Method { callable, receiver, args },
            (CallableKind::Method, None) => unreachable!("receiver built above"),
        };
        Some(test.push(stmt, self.result_type(callable)))
    }

    /// A value for parameter `p` of `callable`; construction failures fall
    /// back to `None`.
    pub fn argument(&self, test: &mut TestCase, callable: usize, p: usize, depth: usize, rng: &mut impl Rng) -> usize {
        let t = select_parameter_type(callable, p, self.cluster, &self.weights, rng);
        let mark = test.len();
        match self.synthesize(test, &t, depth, rng) {
            Some(slot) => slot,
            None => {
                test.statements.truncate(mark);
                test.push(Statement::None, GradualType::None)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::build_cluster;
    use crate::host::{parse_module, Loader};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::rc::Rc;

    fn cluster(src: &str) -> TestCluster {
        let loader = Rc::new(Loader::new("/nonexistent", false));
        loader.insert(parse_module("m", src).unwrap());
        build_cluster(&loader, "m", 1).unwrap()
    }

    fn ctx<'a>(c: &'a TestCluster, pool: &'a ConstantPool) -> GenContext<'a> {
        GenContext {
            cluster: c,
            weights: SelectionWeights::default(),
            pool,
            reuse: 0.0,
        }
    }

    #[test]
    fn dict_keys_are_strings() {
        let c = cluster("def f(x):\n    return x\n");
        let pool = ConstantPool::new(&[]);
        let g = ctx(&c, &pool);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let mut t = TestCase::default();
            let want = GradualType::dict(GradualType::Instance(ClassId::STR), GradualType::Instance(ClassId::INT));
            let slot = g.synthesize(&mut t, &want, 0, &mut rng).unwrap();
            let Statement::Dict(pairs) = &t.statements[slot].stmt else { panic!("dict expected") };
            assert!(pairs.len() <= 3);
            for (k, v) in pairs {
                assert!(matches!(t.statements[*k].stmt, Statement::Str(_)));
                assert!(matches!(t.statements[*v].stmt, Statement::Int(_)));
            }
        }
        let mut t = TestCase::default();
        g.synthesize(&mut t, &GradualType::None, 0, &mut rng).unwrap();
        assert_eq!(t.statements[0].stmt, Statement::None);
    }

    /// Minimum constructor-chain depth per class, by fixed-point iteration
    /// over the constructor graph with annotation-only parameter types.
    fn min_depths(c: &TestCluster) -> std::collections::HashMap<ClassId, usize> {
        let mut depth = std::collections::HashMap::new();
        loop {
            let mut changed = false;
            for (class, ctor) in &c.constructors {
                let need = c.callables[*ctor]
                    .params
                    .iter()
                    .map(|p| match &p.declared {
                        GradualType::Instance(d) if c.constructors.contains_key(d) => depth.get(d).map(|x| x + 1),
                        _ => Some(0),
                    })
                    .try_fold(0usize, |acc, d| d.map(|d| acc.max(d)));
                if let Some(d) = need {
                    if depth.get(class).is_none_or(|old| *old > d) {
                        depth.insert(*class, d);
                        changed = true;
                    }
                }
            }
            if !changed {
                return depth;
            }
        }
    }

    #[test]
    fn constructor_chains_respect_the_depth_cap() {
        let src = "\
class Alias:
    def __init__(self, name: str):
        self.name = name
class Import:
    def __init__(self, names: Alias):
        self.names = names
class Wrap:
    def __init__(self, i: Import):
        self.i = i
class Deep:
    def __init__(self, w: Wrap):
        self.w = w
class Deeper:
    def __init__(self, d: Deep):
        self.d = d
";
        let c = cluster(src);
        let depths = min_depths(&c);
        let pool = ConstantPool::new(&[]);
        let mut g = ctx(&c, &pool);
        // annotations only, so the chain is forced
        g.weights = SelectionWeights { dev: 1.0, none: 0.0, any: 0.0, union: 0.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for name in ["Alias", "Import", "Wrap", "Deep", "Deeper"] {
            let id = c.hierarchy.lookup(&format!("m.{name}")).unwrap();
            let mut t = TestCase::default();
            let r = g.synthesize(&mut t, &GradualType::Instance(id), 0, &mut rng);
            let reachable = depths[&id] < MAX_DEPTH;
            assert_eq!(r.is_some() && !t.statements.iter().any(|s| s.stmt == Statement::None), reachable, "{name}");
            assert!(t.is_valid(&c, usize::MAX));
        }
    }

    #[test]
    fn any_picks_concrete_types() {
        let c = cluster("class A:\n    pass\n");
        let pool = ConstantPool::new(&[]);
        let g = ctx(&c, &pool);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut saw_instance = false;
        for _ in 0..100 {
            let mut t = TestCase::default();
            let s = g.synthesize(&mut t, &GradualType::Any, 0, &mut rng).unwrap();
            saw_instance |= matches!(t.statements[s].stmt, Statement::Construct { .. });
            assert!(!t.statements[s].ty.is_any());
        }
        assert!(saw_instance);
    }

    #[test]
    fn literals_enter_the_pool() {
        let pool = ConstantPool::new(&[Const::Str(".com".into()), Const::Int(42)]);
        assert!(pool.strs.contains(&".com".to_string()));
        assert!(pool.ints.contains(&42));
    }
}
