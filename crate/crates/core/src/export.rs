//! Inferred types as JSON records, one per parameter and one per return.

use serde::{Deserialize, Serialize};

use crate::analysis::TestCluster;
use crate::inference::infer_candidates;
use crate::types::GradualType;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeRecord {
    pub file: String,
    pub line_number: u32,
    pub col_offset: u32,
    pub function: String,
    /// Absent for the return record.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub parameter: Option<String>,
    #[serde(rename = "type")]
    pub types: Vec<String>,
}

pub fn module_file(module: &str) -> String {
    format!("{}.py", module.replace('.', "/"))
}

/// Outer names of the members of `types`, first occurrence first.
fn names(cluster: &TestCluster, types: &[GradualType]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for t in types {
        for m in cluster.hierarchy.unify(t).members() {
            let n = cluster.hierarchy.render_outer(m);
            if !out.contains(&n) {
                out.push(n);
            }
        }
    }
    out
}

/// One record per parameter and one per return, for every callable.
pub fn export_types(cluster: &TestCluster) -> Vec<TypeRecord> {
    let mut records = Vec::new();
    for (ci, info) in cluster.callables.iter().enumerate() {
        let record = |parameter: Option<String>, types: Vec<String>| TypeRecord {
            file: module_file(&info.module),
            line_number: info.line,
            col_offset: info.col,
            function: info.local_name.clone(),
            parameter,
            types,
        };
        for (pi, p) in info.params.iter().enumerate() {
            let types = match cluster.traces.get(&(ci, pi)) {
                Some(trace) => names(cluster, &infer_candidates(trace, cluster)),
                None => Vec::new(),
            };
            records.push(record(Some(p.name.clone()), types));
        }
        let ret = match cluster.recorded_returns.get(&ci) {
            Some(t) => names(cluster, std::slice::from_ref(t)),
            None => Vec::new(),
        };
        records.push(record(None, ret));
    }
    records
}

pub fn to_json(records: &[TypeRecord]) -> String {
    serde_json::to_string_pretty(records).expect("records serialize")
}

pub fn from_json(text: &str) -> serde_json::Result<Vec<TypeRecord>> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::build_cluster;
    use crate::host::{parse_module, Loader};
    use crate::inference::record_return;
    use crate::trace::UsageTrace;
    use std::rc::Rc;

    fn cluster() -> TestCluster {
        let src = "\
def get_domain(url):
    if url.startswith('http'):
        return 'x'
    return None
class C:
    def __init__(self, a, b):
        self.a = a
";
        let loader = Rc::new(Loader::new("/nonexistent", false));
        loader.insert(parse_module("pkg.m", src).unwrap());
        build_cluster(&loader, "pkg.m", 1).unwrap()
    }

    #[test]
    fn one_record_per_parameter_and_return() {
        let c = cluster();
        let records = export_types(&c);
        let expected: usize = c.callables.iter().map(|i| i.params.len() + 1).sum();
        assert_eq!(records.len(), expected);
        let url = records
            .iter()
            .find(|r| r.function == "get_domain" && r.parameter.as_deref() == Some("url"))
            .unwrap();
        assert!(url.types.is_empty());
        assert_eq!(url.file, "pkg/m.py");
        assert_eq!(url.line_number, 1);
    }

    #[test]
    fn returns_keep_observation_order() {
        let mut c = cluster();
        let f = c.callables.iter().position(|i| i.local_name == "get_domain").unwrap();
        let s = GradualType::Instance(c.hierarchy.lookup("str").unwrap());
        record_return(&mut c, f, &s, 5);
        record_return(&mut c, f, &GradualType::None, 5);
        let mut trace = UsageTrace::default();
        trace.attribute_accesses.insert("startswith".into());
        c.traces.insert((f, 0), trace);
        let records = export_types(&c);
        let ret = records
            .iter()
            .find(|r| r.function == "get_domain" && r.parameter.is_none())
            .unwrap();
        assert_eq!(ret.types, vec!["str", "none"]);
        let url = records.iter().find(|r| r.parameter.as_deref() == Some("url")).unwrap();
        assert!(url.types.contains(&"str".to_string()), "{:?}", url.types);
    }

    #[test]
    fn json_round_trip() {
        let mut c = cluster();
        let f = c.callables.iter().position(|i| i.local_name == "get_domain").unwrap();
        record_return(&mut c, f, &GradualType::None, 5);
        let records = export_types(&c);
        let text = to_json(&records);
        assert!(text.contains("\"type\""));
        assert!(!text.contains("\"parameter\": null"));
        assert_eq!(from_json(&text).unwrap(), records);
    }
}
