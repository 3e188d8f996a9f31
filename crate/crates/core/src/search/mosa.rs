//! The generational loop: MOSA-style preference sorting over all uncovered
//! goals, with an archive of the shortest covering tests.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::analysis::TestCluster;
use crate::executor::{ExecutionResult, Executor};
use crate::inference::{record_return, SelectionWeights};
use crate::instrument::{BranchRegistry, Goal};
use crate::search::mutate::{crossover, mutate};
use crate::search::synth::{ConstantPool, GenContext};
use crate::search::testcase::TestCase;

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub population: usize,
    pub tournament: usize,
    pub crossover: f64,
    pub max_len: usize,
    pub budget: Duration,
    /// Stops after this many generations regardless of the budget.
    pub max_generations: Option<u64>,
    pub proxy_probability: f64,
    pub weights: SelectionWeights,
    pub union_cap: usize,
    pub reuse: f64,
    /// Calls per test of the initial population, drawn from 1..=this.
    pub initial_calls: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            population: 50,
            tournament: 5,
            crossover: 0.75,
            max_len: 40,
            budget: Duration::from_secs(600),
            max_generations: None,
            proxy_probability: 0.05,
            weights: SelectionWeights::default(),
            union_cap: 5,
            reuse: 0.3,
            initial_calls: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ArchiveEntry {
    pub test: TestCase,
    pub result: ExecutionResult,
}

/// Goal index to the shortest test covering it.
#[derive(Debug, Clone, Default)]
pub struct Archive {
    pub entries: BTreeMap<usize, ArchiveEntry>,
}

impl Archive {
    /// Final suite: archived tests without duplicates, ordered by the first
    /// goal each covers.
    pub fn suite(&self) -> Vec<&ArchiveEntry> {
        let mut seen = std::collections::HashSet::new();
        self.entries.values().filter(|e| seen.insert(e.test.key())).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub archive: Archive,
    /// (elapsed seconds, covered fraction) after every generation.
    pub timeline: Vec<(f64, f64)>,
    pub generations: u64,
    pub evaluations: u64,
    pub covered: usize,
    pub total_goals: usize,
}

impl SearchOutcome {
    pub fn coverage(&self) -> f64 {
        if self.total_goals == 0 {
            1.0
        } else {
            self.covered as f64 / self.total_goals as f64
        }
    }
}

struct Individual {
    test: TestCase,
    fitness: Vec<f64>,
    rank: usize,
    crowding: f64,
}

/// Runs the search until every goal is covered, the budget is spent or the
/// generation limit is reached.
pub fn generate(
    cluster: &mut TestCluster,
    registry: &BranchRegistry,
    executor: &mut Executor,
    config: &SearchConfig,
    rng: &mut impl Rng,
) -> SearchOutcome {
    let start = Instant::now();
    let goals = &registry.goals;
    let pool = ConstantPool::new(&cluster.literals);
    let mut search = Search {
        archive: Archive::default(),
        covered: vec![false; goals.len()],
        evaluations: 0,
        start,
        config,
        registry,
    };
    let mut timeline = Vec::new();

    let mut population: Vec<Individual> = Vec::new();
    for _ in 0..config.population {
        if search.out_of_time() {
            break;
        }
        let test = {
            let ctx = context(cluster, &pool, config);
            let subject: Vec<usize> = cluster.subject_callables().collect();
            let mut t = TestCase::default();
            if !subject.is_empty() {
                for _ in 0..rng.gen_range(1..=config.initial_calls.max(1)) {
                    let c = *subject.choose(rng).expect("non-empty");
                    let mark = t.len();
                    if ctx.call(&mut t, c, None, 0, rng).is_none() || t.len() > config.max_len {
                        t.statements.truncate(mark);
                    }
                }
            }
            t
        };
        population.push(search.evaluate(test, cluster, executor, rng));
    }
    timeline.push((start.elapsed().as_secs_f64(), search.coverage()));

    let mut generations = 0u64;
    while !search.done() && config.max_generations.is_none_or(|m| generations < m) {
        preference_sort(&mut population, &search.covered);
        let preferred = uncovered_callables(cluster, registry, &search.covered);
        let mut offspring: Vec<Individual> = Vec::new();
        while offspring.len() < config.population && !search.out_of_time() {
            let p1 = tournament(&population, config.tournament, rng);
            let p2 = tournament(&population, config.tournament, rng);
            let (mut c1, mut c2) = (population[p1].test.clone(), population[p2].test.clone());
            {
                let ctx = context(cluster, &pool, config);
                if rng.gen_bool(config.crossover) {
                    (c1, c2) = crossover(&ctx, &c1, &c2, config.max_len, rng);
                }
                c1 = mutate(&ctx, &c1, &preferred, config.max_len, rng);
                c2 = mutate(&ctx, &c2, &preferred, config.max_len, rng);
            }
            for child in [c1, c2] {
                if offspring.len() < config.population && !search.out_of_time() {
                    offspring.push(search.evaluate(child, cluster, executor, rng));
                }
            }
        }
        population.extend(offspring);
        population = select_survivors(population, &search.covered, config.population);
        generations += 1;
        timeline.push((start.elapsed().as_secs_f64(), search.coverage()));
    }

    SearchOutcome {
        covered: search.covered.iter().filter(|c| **c).count(),
        total_goals: goals.len(),
        archive: search.archive,
        timeline,
        generations,
        evaluations: search.evaluations,
    }
}

fn context<'a>(cluster: &'a TestCluster, pool: &'a ConstantPool, config: &SearchConfig) -> GenContext<'a> {
    GenContext {
        cluster,
        weights: config.weights,
        pool,
        reuse: config.reuse,
    }
}

struct Search<'a> {
    archive: Archive,
    covered: Vec<bool>,
    evaluations: u64,
    start: Instant,
    config: &'a SearchConfig,
    registry: &'a BranchRegistry,
}

impl Search<'_> {
    fn out_of_time(&self) -> bool {
        self.start.elapsed() >= self.config.budget
    }

    fn done(&self) -> bool {
        self.covered.iter().all(|c| *c) || self.out_of_time()
    }

    fn coverage(&self) -> f64 {
        if self.covered.is_empty() {
            1.0
        } else {
            self.covered.iter().filter(|c| **c).count() as f64 / self.covered.len() as f64
        }
    }

    fn evaluate(
        &mut self,
        mut test: TestCase,
        cluster: &mut TestCluster,
        executor: &mut Executor,
        rng: &mut impl Rng,
    ) -> Individual {
        self.evaluations += 1;
        let p = self.config.proxy_probability;
        let result = executor.execute_with_policy(&test, cluster, p, rng);
        // statements after the first failure never run
        test.statements.truncate(result.outcomes.len());
        if p > 0.0 {
            for (i, t) in &result.returns {
                if let Some(c) = test.statements[*i].stmt.callable() {
                    record_return(cluster, c, t, self.config.union_cap);
                }
            }
        }
        let fitness: Vec<f64> = self
            .registry
            .goals
            .iter()
            .map(|g| self.registry.fitness(*g, &result.coverage))
            .collect();
        let mut minimized: Option<TestCase> = None;
        for (i, f) in fitness.iter().enumerate() {
            if *f != 0.0 {
                continue;
            }
            self.covered[i] = true;
            let better = match self.archive.entries.get(&i) {
                None => true,
                Some(e) => test.len() < e.test.len(),
            };
            if better {
                let t = minimized.get_or_insert_with(|| {
                    let mut t = test.clone();
                    t.prune_unused(cluster);
                    t
                });
                self.archive.entries.insert(
                    i,
                    ArchiveEntry {
                        test: t.clone(),
                        result: result.clone(),
                    },
                );
            }
        }
        Individual {
            test,
            fitness,
            rank: 0,
            crowding: 0.0,
        }
    }
}

/// Subject callables whose code still has uncovered goals.
fn uncovered_callables(cluster: &TestCluster, registry: &BranchRegistry, covered: &[bool]) -> Vec<usize> {
    let mut open_codes = std::collections::BTreeSet::new();
    for (i, g) in registry.goals.iter().enumerate() {
        if !covered[i] {
            open_codes.insert(g.code());
        }
    }
    cluster
        .subject_callables()
        .filter(|c| {
            let name = &cluster.callables[*c].local_name;
            registry
                .codes
                .iter()
                .any(|code| open_codes.contains(&code.id) && code.name == *name)
        })
        .collect()
}

fn tournament(population: &[Individual], size: usize, rng: &mut impl Rng) -> usize {
    let mut best = rng.gen_range(0..population.len());
    for _ in 1..size.max(1) {
        let other = rng.gen_range(0..population.len());
        let (a, b) = (&population[other], &population[best]);
        if a.rank < b.rank || (a.rank == b.rank && a.crowding > b.crowding) {
            best = other;
        }
    }
    best
}

/// Assigns ranks (front 0 = best per uncovered goal) and crowding distances.
fn preference_sort(population: &mut [Individual], covered: &[bool]) {
    let open: Vec<usize> = (0..covered.len()).filter(|i| !covered[*i]).collect();
    for ind in population.iter_mut() {
        ind.rank = usize::MAX;
        ind.crowding = 0.0;
    }
    if population.is_empty() {
        return;
    }
    // preference front: the best individual for every uncovered goal
    let mut front0 = Vec::new();
    for g in &open {
        let best = (0..population.len())
            .min_by(|a, b| {
                let (x, y) = (&population[*a], &population[*b]);
                x.fitness[*g]
                    .total_cmp(&y.fitness[*g])
                    .then(x.test.len().cmp(&y.test.len()))
            })
            .expect("non-empty population");
        if !front0.contains(&best) {
            front0.push(best);
        }
    }
    for i in &front0 {
        population[*i].rank = 0;
    }
    let rest: Vec<usize> = (0..population.len()).filter(|i| population[*i].rank != 0).collect();
    let fronts = non_dominated_fronts(population, &rest, &open);
    for (r, front) in fronts.iter().enumerate() {
        for i in front {
            population[*i].rank = r + 1;
        }
    }
    let mut all_fronts = vec![front0];
    all_fronts.extend(fronts);
    for front in &all_fronts {
        crowding(population, front, &open);
    }
}

fn dominates(a: &[f64], b: &[f64], goals: &[usize]) -> bool {
    let mut strictly = false;
    for g in goals {
        if a[*g] > b[*g] {
            return false;
        }
        if a[*g] < b[*g] {
            strictly = true;
        }
    }
    strictly
}

fn non_dominated_fronts(population: &[Individual], members: &[usize], goals: &[usize]) -> Vec<Vec<usize>> {
    let n = members.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&population[members[i]].fitness, &population[members[j]].fitness);
            if dominates(a, b, goals) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(b, a, goals) {
                dominates_list[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|i| dominated_by[*i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for i in &current {
            for j in &dominates_list[*i] {
                dominated_by[*j] -= 1;
                if dominated_by[*j] == 0 {
                    next.push(*j);
                }
            }
        }
        fronts.push(current.iter().map(|i| members[*i]).collect());
        current = next;
    }
    fronts
}

fn crowding(population: &mut [Individual], front: &[usize], goals: &[usize]) {
    if front.len() <= 2 {
        for i in front {
            population[*i].crowding = f64::INFINITY;
        }
        return;
    }
    for g in goals {
        let mut order = front.to_vec();
        order.sort_by(|a, b| population[*a].fitness[*g].total_cmp(&population[*b].fitness[*g]));
        let lo = population[order[0]].fitness[*g];
        let hi = population[*order.last().expect("non-empty")].fitness[*g];
        population[order[0]].crowding = f64::INFINITY;
        population[*order.last().expect("non-empty")].crowding = f64::INFINITY;
        if hi > lo {
            for k in 1..order.len() - 1 {
                let d = (population[order[k + 1]].fitness[*g] - population[order[k - 1]].fitness[*g]) / (hi - lo);
                population[order[k]].crowding += d;
            }
        }
    }
}

fn select_survivors(mut population: Vec<Individual>, covered: &[bool], size: usize) -> Vec<Individual> {
    preference_sort(&mut population, covered);
    population.sort_by(|a, b| {
        a.rank
            .cmp(&b.rank)
            .then(b.crowding.total_cmp(&a.crowding))
            .then(a.test.len().cmp(&b.test.len()))
    });
    population.truncate(size);
    population
}

/// Covered goals of an archive, for checks and reports.
pub fn archived_goals(outcome: &SearchOutcome, registry: &BranchRegistry) -> Vec<Goal> {
    outcome.archive.entries.keys().map(|i| registry.goals[*i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::build_cluster;
    use crate::host::{parse_module, Loader};
    use crate::instrument::instrument;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::rc::Rc;

    fn setup(src: &str) -> (TestCluster, BranchRegistry, Executor) {
        let mut m = parse_module("m", src).unwrap();
        let reg = instrument(&mut m);
        let loader = Rc::new(Loader::new("/nonexistent", false));
        loader.insert(m);
        let cluster = build_cluster(&loader, "m", 1).unwrap();
        let ex = Executor::new(loader, &cluster, Duration::from_secs(3));
        (cluster, reg, ex)
    }

    const SRC: &str = "\
def classify(n):
    if n > 50:
        if n % 2 == 0:
            return 'big even'
        return 'big odd'
    if n == 7:
        return 'seven'
    return 'small'
def label(s):
    if s.endswith('.com'):
        return 1
    return 0
";

    fn config(gens: u64) -> SearchConfig {
        SearchConfig {
            budget: Duration::from_secs(30),
            max_generations: Some(gens),
            ..SearchConfig::default()
        }
    }

    #[test]
    fn trivial_function_is_covered_in_generation_zero() {
        let (mut c, reg, mut ex) = setup("def f():\n    return 1\n");
        let out = generate(&mut c, &reg, &mut ex, &config(10), &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(out.generations, 0);
        assert_eq!(out.coverage(), 1.0);
    }

    #[test]
    fn search_covers_numeric_and_string_guards() {
        let (mut c, reg, mut ex) = setup(SRC);
        let mut cfg = config(200);
        cfg.proxy_probability = 0.05;
        let out = generate(&mut c, &reg, &mut ex, &cfg, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(out.coverage(), 1.0, "{:?}", archived_goals(&out, &reg));
        // timeline is monotone
        for w in out.timeline.windows(2) {
            assert!(w[0].1 <= w[1].1);
        }
    }

    #[test]
    fn archived_tests_reproduce_their_goals() {
        let (mut c, reg, mut ex) = setup(SRC);
        let out = generate(&mut c, &reg, &mut ex, &config(20), &mut ChaCha8Rng::seed_from_u64(5));
        for (g, entry) in &out.archive.entries {
            let r = ex.execute_regular(&entry.test, &c);
            assert!(reg.is_covered(reg.goals[*g], &r.coverage), "goal {g}");
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let run = || {
            let (mut c, reg, mut ex) = setup(SRC);
            let out = generate(&mut c, &reg, &mut ex, &config(5), &mut ChaCha8Rng::seed_from_u64(9));
            out.archive.suite().iter().map(|e| e.test.key()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn budget_is_respected() {
        let (mut c, reg, mut ex) = setup("def f(n):\n    while n != 123456789:\n        n = n + 0\n");
        ex.timeout = Duration::from_millis(100);
        let cfg = SearchConfig {
            budget: Duration::from_millis(500),
            ..SearchConfig::default()
        };
        let start = Instant::now();
        let out = generate(&mut c, &reg, &mut ex, &cfg, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(start.elapsed() <= Duration::from_millis(500 + 100 + 200));
        assert!(out.coverage() < 1.0);
    }

    #[test]
    fn dominance_and_fronts() {
        let mk = |f: Vec<f64>| Individual {
            test: TestCase::default(),
            fitness: f,
            rank: 0,
            crowding: 0.0,
        };
        let pop = vec![mk(vec![0.1, 0.5]), mk(vec![0.2, 0.6]), mk(vec![0.3, 0.1])];
        let fronts = non_dominated_fronts(&pop, &[0, 1, 2], &[0, 1]);
        assert_eq!(fronts, vec![vec![0, 2], vec![1]]);
    }
}
