//! Evaluation arithmetic.

use thiserror::Error;

use crate::types::{ClassHierarchy, GradualType};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("coverage {cov} outside [{min}, {max}]")]
    Domain { cov: f64, min: f64, max: f64 },
    #[error("effect size needs two non-empty samples")]
    EmptySample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatchClass {
    Match,
    Mismatch,
    Missing,
    Any,
}

impl std::fmt::Display for MatchClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MatchClass::Match => "MATCH",
            MatchClass::Mismatch => "MISMATCH",
            MatchClass::Missing => "MISSING",
            MatchClass::Any => "ANY",
        })
    }
}

/// Min-max normalised coverage in percent; 100 when `min == max`.
pub fn relative_coverage(cov: f64, min: f64, max: f64) -> Result<f64, MetricsError> {
    if !(min <= cov && cov <= max) {
        return Err(MetricsError::Domain { cov, min, max });
    }
    if max == min {
        return Ok(100.0);
    }
    Ok(100.0 * (cov - min) / (max - min))
}

/// Partial-match classification. Any member of a union truth found among
/// the inferred members counts; members are compared on their unified form
/// or, failing that, on the outer type constructor name.
pub fn classify(h: &ClassHierarchy, inferred: Option<&GradualType>, truth: &GradualType) -> MatchClass {
    let Some(inferred) = inferred else {
        return MatchClass::Missing;
    };
    let inferred = h.unify(inferred);
    if inferred.is_any() {
        return MatchClass::Any;
    }
    let truth = h.unify(truth);
    let outer: Vec<String> = inferred.members().iter().map(|m| h.render_outer(m)).collect();
    let hit = truth
        .members()
        .iter()
        .any(|t| inferred.members().contains(t) || outer.contains(&h.render_outer(t)));
    if hit {
        MatchClass::Match
    } else {
        MatchClass::Mismatch
    }
}

/// The same classification over rendered outer names, as found in the
/// exported JSON. `Any` inferred alone counts as ANY.
pub fn classify_names(inferred: &[String], truth: &[String]) -> MatchClass {
    if inferred.is_empty() {
        return MatchClass::Missing;
    }
    if inferred.iter().all(|n| n == "Any") {
        return MatchClass::Any;
    }
    if truth.iter().any(|t| inferred.contains(t)) {
        MatchClass::Match
    } else {
        MatchClass::Mismatch
    }
}

/// Precision, recall and F1; zero denominators give zero.
pub fn prf(matches: u64, inferred_total: u64, truth_total: u64) -> (f64, f64, f64) {
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let p = ratio(matches, inferred_total);
    let r = ratio(matches, truth_total);
    let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f1)
}

/// Vargha-Delaney effect size: probability that a value drawn from `a` is
/// larger than one from `b`, ties counting half.
pub fn a12(a: &[f64], b: &[f64]) -> Result<f64, MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    // rank-sum form, O((m+n) log(m+n))
    let mut all: Vec<(f64, bool)> = a.iter().map(|x| (*x, true)).chain(b.iter().map(|x| (*x, false))).collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += all[i..=j].iter().filter(|e| e.1).count() as f64 * avg;
        i = j + 1;
    }
    let (m, n) = (a.len() as f64, b.len() as f64);
    Ok((rank_sum / m - (m + 1.0) / 2.0) / n)
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::ClassId;
    use proptest::prelude::*;

    fn builtins() -> (ClassHierarchy, ClassId, ClassId, ClassId, ClassId) {
        let h = ClassHierarchy::new();
        let find = |h: &ClassHierarchy, n: &str| h.lookup(n).unwrap();
        let int = find(&h, "int");
        let float = find(&h, "float");
        let boolean = find(&h, "bool");
        let s = find(&h, "str");
        (h, int, float, boolean, s)
    }

    fn pairs_oracle(a: &[f64], b: &[f64]) -> f64 {
        let mut score = 0.0;
        for x in a {
            for y in b {
                if x > y {
                    score += 1.0;
                } else if x == y {
                    score += 0.5;
                }
            }
        }
        score / (a.len() * b.len()) as f64
    }

    #[test]
    fn relative_coverage_cases() {
        assert!((relative_coverage(0.5, 0.2, 0.8).unwrap() - 50.0).abs() < 1e-9);
        assert_eq!(relative_coverage(0.7, 0.7, 0.7).unwrap(), 100.0);
        assert_eq!(relative_coverage(0.2, 0.2, 0.8).unwrap(), 0.0);
        assert!(relative_coverage(0.9, 0.2, 0.8).is_err());
    }

    #[test]
    fn classify_cases() {
        let (h, int, float, boolean, s) = builtins();
        let i = GradualType::Instance(int);
        let union = |a, b| GradualType::Union(vec![GradualType::Instance(a), GradualType::Instance(b)]);
        assert_eq!(classify(&h, Some(&union(int, float)), &i), MatchClass::Match);
        assert_eq!(classify(&h, Some(&union(boolean, float)), &i), MatchClass::Mismatch);
        assert_eq!(classify(&h, Some(&GradualType::Any), &GradualType::Instance(s)), MatchClass::Any);
        assert_eq!(classify(&h, None, &GradualType::Instance(s)), MatchClass::Missing);
        // generic truths compare on the outer constructor
        let list = h.lookup("list").unwrap();
        assert_eq!(
            classify(&h, Some(&GradualType::list(i.clone())), &GradualType::Instance(list)),
            MatchClass::Match
        );
        assert_eq!(
            classify(&h, Some(&GradualType::Instance(list)), &GradualType::list(GradualType::Instance(s))),
            MatchClass::Match
        );
    }

    #[test]
    fn classify_names_cases() {
        let v = |x: &[&str]| x.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(classify_names(&v(&["str", "none"]), &v(&["str"])), MatchClass::Match);
        assert_eq!(classify_names(&v(&[]), &v(&["str"])), MatchClass::Missing);
        assert_eq!(classify_names(&v(&["Any"]), &v(&["str"])), MatchClass::Any);
        assert_eq!(classify_names(&v(&["int"]), &v(&["str"])), MatchClass::Mismatch);
    }

    #[test]
    fn prf_cases() {
        // raw counts behind the published row: 720 / 3442 and 720 / 3257
        let (p, r, f) = prf(720, 3442, 3257);
        assert!((p - 0.2092).abs() < 1e-4 && (r - 0.2211).abs() < 1e-4 && (f - 0.2150).abs() < 1e-4);
        assert_eq!(prf(0, 10, 10), (0.0, 0.0, 0.0));
        let (p, r, f) = prf(5, 5, 10);
        assert_eq!((p, r), (1.0, 0.5));
        assert!((f - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(prf(0, 0, 0), (0.0, 0.0, 0.0));
    }

    #[test]
    fn a12_cases() {
        assert_eq!(a12(&[1.0; 4], &[1.0; 3]).unwrap(), 0.5);
        assert_eq!(a12(&[5.0, 6.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert!((a12(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(a12(&[], &[1.0]), Err(MetricsError::EmptySample));
    }

    #[test]
    fn median_and_mean() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(mean(&[]), None);
    }

    proptest! {
        #[test]
        fn a12_matches_pair_enumeration(
            a in prop::collection::vec(0u8..6, 1..15),
            b in prop::collection::vec(0u8..6, 1..15),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let x = a12(&a, &b).unwrap();
            prop_assert!((x - pairs_oracle(&a, &b)).abs() < 1e-9);
            prop_assert!((x + a12(&b, &a).unwrap() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn relative_coverage_bounded_and_monotone(min in 0.0f64..1.0, w in 0.0f64..1.0, s in 0.0f64..1.0, t in 0.0f64..1.0) {
            let max = min + w * (1.0 - min);
            let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
            let c1 = min + lo * (max - min);
            let c2 = min + hi * (max - min);
            let r1 = relative_coverage(c1, min, max).unwrap();
            let r2 = relative_coverage(c2, min, max).unwrap();
            prop_assert!((0.0..=100.0).contains(&r1) && r1 <= r2 + 1e-9);
        }

        #[test]
        fn prf_bounds(matches in 0u64..100, extra_i in 0u64..100, extra_t in 0u64..100) {
            let (p, r, f) = prf(matches, matches + extra_i, matches + extra_t);
            prop_assert!(p <= 1.0 && r <= 1.0 && f <= 1.0);
            prop_assert_eq!(f == 0.0, matches == 0);
        }
    }
}
