use serde::{Deserialize, Serialize};

use crate::io::IoError;
use crate::learning::{NodeStats, SufficientStats};
use crate::model::{ConditionalIntensityMatrix, CtbnModel, CtbnStructure, InitialDistribution, NodeSpec};
use crate::Scalar;

const MODEL_FORMAT: &str = "ctbn-model";
const STATS_FORMAT: &str = "ctbn-stats";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    format: String,
    nodes: Vec<NodeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<InitialDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    name: String,
    states: Vec<String>,
    parents: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    components: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cims: Option<Vec<CimDoc>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CimDoc {
    instantiation: usize,
    rates: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum InitialDoc {
    Factored(Vec<Vec<f64>>),
    Joint(Vec<JointEntry>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointEntry {
    state: Vec<usize>,
    p: f64,
}

fn node_docs(structure: &CtbnStructure) -> Vec<NodeDoc> {
    structure
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| NodeDoc {
            name: n.name().to_string(),
            states: n.state_labels().to_vec(),
            parents: structure.parents(i).to_vec(),
            components: n.components().map(<[String]>::to_vec),
            cims: None,
        })
        .collect()
}

fn check_format(found: &str, want: &str) -> Result<(), IoError> {
    if found != want {
        return Err(IoError::Invalid(format!("format is `{found}`, expected `{want}`")));
    }
    Ok(())
}

fn structure_of(nodes: &[NodeDoc]) -> Result<CtbnStructure, IoError> {
    let mut specs = Vec::with_capacity(nodes.len());
    for n in nodes {
        let mut spec = NodeSpec::new(n.name.clone(), n.states.clone())?;
        if let Some(c) = &n.components {
            spec = spec.with_components(c.clone())?;
        }
        specs.push(spec);
    }
    Ok(CtbnStructure::new(specs, nodes.iter().map(|n| n.parents.clone()).collect())?)
}

/// Structure-only document: node specs and parent lists, no CIMs.
pub fn structure_to_json(structure: &CtbnStructure) -> String {
    let doc = ModelDoc { format: MODEL_FORMAT.into(), nodes: node_docs(structure), initial: None };
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

/// Reads the structure part of a model or structure document; CIMs, if present, are ignored.
pub fn structure_from_json(text: &str) -> Result<CtbnStructure, IoError> {
    let doc: ModelDoc = serde_json::from_str(text)?;
    check_format(&doc.format, MODEL_FORMAT)?;
    structure_of(&doc.nodes)
}

pub fn model_to_json<T: Scalar>(model: &CtbnModel<T>) -> String {
    let structure = model.structure();
    let mut nodes = node_docs(structure);
    for (i, n) in nodes.iter_mut().enumerate() {
        n.cims = Some(
            model
                .cims(i)
                .iter()
                .enumerate()
                .map(|(v, c)| CimDoc {
                    instantiation: v,
                    rates: c.to_rows().into_iter().map(|r| r.into_iter().map(|x| x.to_f64_lossy()).collect()).collect(),
                })
                .collect(),
        );
    }
    let initial = match model.initial() {
        InitialDistribution::Factored(m) => {
            InitialDoc::Factored(m.iter().map(|r| r.iter().map(|x| x.to_f64_lossy()).collect()).collect())
        }
        InitialDistribution::Joint(support) => InitialDoc::Joint(
            support.iter().map(|(s, p)| JointEntry { state: s.clone(), p: p.to_f64_lossy() }).collect(),
        ),
    };
    let doc = ModelDoc { format: MODEL_FORMAT.into(), nodes, initial: Some(initial) };
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

/// Reads a full model. A missing `initial` field means uniform.
pub fn model_from_json<T: Scalar>(text: &str) -> Result<CtbnModel<T>, IoError> {
    let doc: ModelDoc = serde_json::from_str(text)?;
    check_format(&doc.format, MODEL_FORMAT)?;
    let structure = structure_of(&doc.nodes)?;
    let mut cims = Vec::with_capacity(doc.nodes.len());
    for (i, n) in doc.nodes.iter().enumerate() {
        let Some(list) = &n.cims else {
            return Err(IoError::Invalid(format!("node `{}` has no `cims`", n.name)));
        };
        let want = structure.n_parent_instantiations(i);
        let mut table: Vec<Option<ConditionalIntensityMatrix<T>>> = vec![None; want];
        for c in list {
            if c.instantiation >= want {
                return Err(IoError::Invalid(format!(
                    "node `{}`: instantiation {} out of range (0..{want})",
                    n.name, c.instantiation
                )));
            }
            if table[c.instantiation].is_some() {
                return Err(IoError::Invalid(format!("node `{}`: instantiation {} repeated", n.name, c.instantiation)));
            }
            let rows: Vec<Vec<T>> = c.rates.iter().map(|r| r.iter().map(|&x| T::of(x)).collect()).collect();
            table[c.instantiation] = Some(ConditionalIntensityMatrix::new(&rows)?);
        }
        let table: Option<Vec<_>> = table.into_iter().collect();
        let Some(table) = table else {
            return Err(IoError::Invalid(format!("node `{}` is missing CIMs ({want} expected)", n.name)));
        };
        cims.push(table);
    }
    let initial = match doc.initial {
        None => InitialDistribution::uniform(&structure),
        Some(InitialDoc::Factored(m)) => {
            InitialDistribution::Factored(m.into_iter().map(|r| r.into_iter().map(T::of).collect()).collect())
        }
        Some(InitialDoc::Joint(entries)) => {
            let mut support = std::collections::BTreeMap::new();
            for e in entries {
                if support.insert(e.state.clone(), T::of(e.p)).is_some() {
                    return Err(IoError::Invalid(format!("initial state {:?} repeated", e.state)));
                }
            }
            InitialDistribution::Joint(support)
        }
    };
    Ok(CtbnModel::new(structure, cims, initial)?)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StatsDoc {
    format: String,
    nodes: Vec<NodeStatsDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeStatsDoc {
    name: String,
    instantiations: Vec<ContextDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContextDoc {
    instantiation: usize,
    dwell: Vec<f64>,
    counts: Vec<Vec<u64>>,
}

pub fn stats_to_json<T: Scalar>(structure: &CtbnStructure, stats: &SufficientStats<T>) -> String {
    let nodes = stats
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, ns)| {
            let m = ns.cardinality();
            NodeStatsDoc {
                name: structure.node(i).name().to_string(),
                instantiations: (0..ns.n_instantiations())
                    .map(|v| ContextDoc {
                        instantiation: v,
                        dwell: ns.dwell_table()[v].iter().map(|x| x.to_f64_lossy()).collect(),
                        counts: ns.count_table()[v].chunks(m).map(<[u64]>::to_vec).collect(),
                    })
                    .collect(),
            }
        })
        .collect();
    let doc = StatsDoc { format: STATS_FORMAT.into(), nodes };
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

pub fn stats_from_json<T: Scalar>(structure: &CtbnStructure, text: &str) -> Result<SufficientStats<T>, IoError> {
    let doc: StatsDoc = serde_json::from_str(text)?;
    check_format(&doc.format, STATS_FORMAT)?;
    if doc.nodes.len() != structure.len() {
        return Err(IoError::Invalid(format!("{} nodes for a structure of {}", doc.nodes.len(), structure.len())));
    }
    let mut nodes = Vec::with_capacity(doc.nodes.len());
    for (i, n) in doc.nodes.into_iter().enumerate() {
        if n.name != structure.node(i).name() {
            return Err(IoError::Invalid(format!("node {i} is `{}`, expected `{}`", n.name, structure.node(i).name())));
        }
        let m = structure.cardinality(i);
        let mut dwell = Vec::with_capacity(n.instantiations.len());
        let mut counts = Vec::with_capacity(n.instantiations.len());
        for (v, c) in n.instantiations.into_iter().enumerate() {
            if c.instantiation != v {
                return Err(IoError::Invalid(format!("node `{}`: instantiations out of order at {v}", n.name)));
            }
            if c.counts.iter().any(|r| r.len() != m) {
                return Err(IoError::Invalid(format!("node `{}`: count rows must have {m} entries", n.name)));
            }
            dwell.push(c.dwell.into_iter().map(T::of).collect());
            counts.push(c.counts.into_iter().flatten().collect());
        }
        nodes.push(
            NodeStats::from_parts(m, dwell, counts).map_err(|e| IoError::Invalid(format!("node `{}`: {e}", n.name)))?,
        );
    }
    let stats = SufficientStats::from_nodes(nodes);
    stats.check_shape(structure).map_err(|e| IoError::Invalid(e.to_string()))?;
    Ok(stats)
}
