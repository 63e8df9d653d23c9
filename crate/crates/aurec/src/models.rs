use ctbn::model::{CtbnStructure, NodeSpec};

use crate::{AuCodec, AurecError, PhonemeAlphabet};

pub const PHONE_NODE: &str = "Phone";
pub const AU_NODE: &str = "AU";
pub const OBSERVATION_NODE: &str = "O_p";

/// How AU dynamics are represented in a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelForm {
    /// One node over every AU combination.
    Joint,
    /// One binary node per AU.
    Factorized,
}

impl ModelForm {
    /// Detect the form of a structure built by this crate.
    pub fn of(structure: &CtbnStructure, codec: &AuCodec) -> Result<Self, AurecError> {
        for name in [PHONE_NODE, OBSERVATION_NODE] {
            if structure.node_index(name).is_none() {
                return Err(AurecError::ModelShape(format!("no `{name}` node")));
            }
        }
        if let Some(i) = structure.node_index(AU_NODE) {
            if structure.cardinality(i) != codec.n_states() {
                return Err(AurecError::ModelShape(format!(
                    "`{AU_NODE}` has {} states, the codec {}",
                    structure.cardinality(i),
                    codec.n_states()
                )));
            }
            return Ok(ModelForm::Joint);
        }
        for name in codec.names() {
            match structure.node_index(&name) {
                Some(i) if structure.cardinality(i) == 2 => {}
                _ => return Err(AurecError::ModelShape(format!("no binary `{name}` node"))),
            }
        }
        Ok(ModelForm::Factorized)
    }
}

/// A model's AU representation, codec and phoneme alphabet, recovered from
/// its node names and state labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineShape {
    pub form: ModelForm,
    pub codec: AuCodec,
    pub alphabet: PhonemeAlphabet,
}

fn au_number(name: &str) -> Option<u32> {
    name.strip_prefix("AU").and_then(|n| n.parse().ok())
}

/// Reads the pipeline shape back from a structure built by [`build_joint_model`]
/// or [`build_factorized_model`].
pub fn describe_model(structure: &CtbnStructure, silence: &str) -> Result<PipelineShape, AurecError> {
    let obs = structure
        .node_index(OBSERVATION_NODE)
        .ok_or_else(|| AurecError::ModelShape(format!("no `{OBSERVATION_NODE}` node")))?;
    let alphabet = PhonemeAlphabet::new(structure.node(obs).state_labels().to_vec(), silence)?;
    let aus: Vec<u32> = match structure.node_index(AU_NODE) {
        Some(i) => {
            let comps = structure
                .node(i)
                .components()
                .ok_or_else(|| AurecError::ModelShape(format!("`{AU_NODE}` lists no AU components")))?;
            comps
                .iter()
                .map(|c| au_number(c).ok_or_else(|| AurecError::UnknownAuName(c.clone())))
                .collect::<Result<_, _>>()?
        }
        None => structure.nodes().iter().filter_map(|n| au_number(n.name())).collect(),
    };
    let codec = AuCodec::new(aus)?;
    let form = ModelForm::of(structure, &codec)?;
    if let Some(p) = structure.node_index(PHONE_NODE) {
        if structure.node(p).state_labels() != alphabet.labels() {
            return Err(AurecError::ModelShape(format!("`{PHONE_NODE}` and `{OBSERVATION_NODE}` state labels differ")));
        }
    }
    Ok(PipelineShape { form, codec, alphabet })
}

fn phone_node(name: &str, alphabet: &PhonemeAlphabet) -> Result<NodeSpec, AurecError> {
    Ok(NodeSpec::new(name, alphabet.labels().to_vec())?)
}

/// Phone, AU and O_p with Phone and AU as mutual parents and Phone driving O_p.
pub fn build_joint_model(alphabet: &PhonemeAlphabet, codec: &AuCodec) -> Result<CtbnStructure, AurecError> {
    let au = NodeSpec::with_cardinality(AU_NODE, codec.n_states())?.with_components(codec.names())?;
    let nodes = vec![phone_node(PHONE_NODE, alphabet)?, au, phone_node(OBSERVATION_NODE, alphabet)?];
    Ok(CtbnStructure::new(nodes, vec![vec![1], vec![0], vec![0]])?)
}

/// Phone, one binary node per AU driven by Phone plus `au_links`, and O_p.
///
/// Links are `(from, to)` AU names such as `("AU24", "AU25")`; cycles are allowed.
pub fn build_factorized_model(
    alphabet: &PhonemeAlphabet,
    codec: &AuCodec,
    au_links: &[(String, String)],
) -> Result<CtbnStructure, AurecError> {
    let mut nodes = vec![phone_node(PHONE_NODE, alphabet)?];
    let mut parents = vec![vec![]];
    for name in codec.names() {
        nodes.push(NodeSpec::new(name, vec!["0".into(), "1".into()])?);
        parents.push(vec![0]);
    }
    for (from, to) in au_links {
        let (f, t) = (codec.position(from)? + 1, codec.position(to)? + 1);
        if f != t && !parents[t].contains(&f) {
            parents[t].push(f);
        }
    }
    nodes.push(phone_node(OBSERVATION_NODE, alphabet)?);
    parents.push(vec![0]);
    Ok(CtbnStructure::new(nodes, parents)?)
}
