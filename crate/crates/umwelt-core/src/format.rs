//! JSON file formats: single-agent models, two-agent models, partitions, and
//! synthesized (modified) models.
//!
//! A model document carries `spaces` (name to ordered label list), `kernels`
//! (`alpha`, `beta`, `phi`, `pi`, each with explicit source/target space
//! names and rows of probability strings), an optional `initial`
//! distribution over `W x S x C x A`, the `memoryless` flag, and the
//! `arithmetic` mode: `"rational"` or `{"float": epsilon}`. Probability
//! entries are strings — `"1/2"`, `"3"`, `"0.25"` — parsed exactly in
//! rational mode. Rows follow the lexicographic order of source-state
//! tuples, first declared space varying slowest.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ModelError;
use crate::kernel::Kernel;
use crate::model::LoopModel;
use crate::multiagent::{AgentSpec, TwoAgentModel};
use crate::partition::Partition;
use crate::scalar::{Rational, Scalar};
use crate::space::{FiniteSpace, SpaceRef};
use crate::synthesis::{EquivalenceCertificate, MinimalityReport, ModifiedModel, Selector};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("json error at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("model file must declare space {0:?}")]
    MissingSpace(String),

    #[error("model file must declare kernel {0:?}")]
    MissingKernel(String),

    #[error("kernel {kernel:?} references unknown space {space:?}")]
    UnknownSpace { kernel: String, space: String },

    #[error("two-agent file must declare exactly 2 agents, found {0}")]
    AgentCount(usize),

    #[error("partition file: {0}")]
    Partition(String),

    #[error("{context}: arithmetic modes differ ({left} vs {right})")]
    ArithmeticMismatch {
        context: String,
        left: String,
        right: String,
    },

    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// `"rational"` or `{"float": epsilon}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArithmeticDoc {
    Named(String),
    Float { float: f64 },
}

impl Default for ArithmeticDoc {
    fn default() -> Self {
        ArithmeticDoc::Named("rational".to_owned())
    }
}

impl ArithmeticDoc {
    pub fn describe(&self) -> String {
        match self {
            ArithmeticDoc::Named(s) => s.clone(),
            ArithmeticDoc::Float { float } => format!("float(eps={float})"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelDoc {
    pub source: Vec<String>,
    pub target: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDoc {
    pub spaces: BTreeMap<String, Vec<String>>,
    pub kernels: BTreeMap<String, KernelDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<String>>,
    #[serde(default)]
    pub memoryless: bool,
    #[serde(default)]
    pub arithmetic: ArithmeticDoc,
}

/// A parsed model in whichever arithmetic the file declared.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Rational(LoopModel<Rational>),
    Float(LoopModel<f64>),
}

impl AnyModel {
    pub fn arithmetic(&self) -> ArithmeticDoc {
        match self {
            AnyModel::Rational(_) => ArithmeticDoc::Named("rational".to_owned()),
            AnyModel::Float(m) => ArithmeticDoc::Float {
                float: m.tolerance().to_f64(),
            },
        }
    }
}

pub fn parse_model(text: &str) -> Result<AnyModel, FormatError> {
    let doc: ModelDoc = serde_json::from_str(text)?;
    model_from_doc(&doc)
}

pub fn model_from_doc(doc: &ModelDoc) -> Result<AnyModel, FormatError> {
    match &doc.arithmetic {
        ArithmeticDoc::Named(name) if name == "rational" => {
            Ok(AnyModel::Rational(build_model::<Rational>(doc, Rational::zero())?))
        }
        ArithmeticDoc::Named(other) => Err(FormatError::Partition(format!(
            "unknown arithmetic mode {other:?} (expected \"rational\" or {{\"float\": eps}})"
        ))),
        ArithmeticDoc::Float { float } => Ok(AnyModel::Float(build_model::<f64>(doc, *float)?)),
    }
}

fn space_from_doc(doc: &ModelDoc, name: &str) -> Result<SpaceRef, FormatError> {
    let labels = doc
        .spaces
        .get(name)
        .ok_or_else(|| FormatError::MissingSpace(name.to_owned()))?;
    Ok(FiniteSpace::new(name, labels.iter().cloned())?)
}

fn kernel_from_doc<T: Scalar>(
    name: &str,
    doc: &KernelDoc,
    spaces: &BTreeMap<String, SpaceRef>,
) -> Result<Kernel<T>, FormatError> {
    let resolve = |names: &[String]| -> Result<Vec<SpaceRef>, FormatError> {
        names
            .iter()
            .map(|n| {
                spaces.get(n).cloned().ok_or_else(|| FormatError::UnknownSpace {
                    kernel: name.to_owned(),
                    space: n.clone(),
                })
            })
            .collect()
    };
    let source = resolve(&doc.source)?;
    let target = resolve(&doc.target)?;
    let rows = doc
        .rows
        .iter()
        .map(|row| row.iter().map(|e| T::parse(e)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(ModelError::from)?;
    Ok(Kernel::new(name, source, target, rows)?)
}

fn build_model<T: Scalar>(doc: &ModelDoc, tol: T) -> Result<LoopModel<T>, FormatError> {
    let mut spaces = BTreeMap::new();
    for name in ["W", "S", "C", "A"] {
        spaces.insert(name.to_owned(), space_from_doc(doc, name)?);
    }
    let kernel = |name: &str| -> Result<Kernel<T>, FormatError> {
        let kd = doc
            .kernels
            .get(name)
            .ok_or_else(|| FormatError::MissingKernel(name.to_owned()))?;
        kernel_from_doc(name, kd, &spaces)
    };
    let alpha = kernel("alpha")?;
    let beta = kernel("beta")?;
    let phi = kernel("phi")?;
    let pi = kernel("pi")?;
    let initial = doc
        .initial
        .as_ref()
        .map(|entries| {
            entries
                .iter()
                .map(|e| T::parse(e))
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()
        .map_err(ModelError::from)?;
    Ok(LoopModel::new(
        spaces["W"].clone(),
        spaces["S"].clone(),
        spaces["C"].clone(),
        spaces["A"].clone(),
        alpha,
        beta,
        phi,
        pi,
        initial,
        doc.memoryless,
        tol,
    )?)
}

fn kernel_to_doc<T: Scalar>(kernel: &Kernel<T>) -> KernelDoc {
    KernelDoc {
        source: kernel.source().iter().map(|s| s.name().to_owned()).collect(),
        target: kernel.target().iter().map(|s| s.name().to_owned()).collect(),
        rows: kernel
            .rows()
            .iter()
            .map(|row| row.iter().map(Scalar::render).collect())
            .collect(),
    }
}

pub fn model_to_doc<T: Scalar>(model: &LoopModel<T>) -> ModelDoc {
    let mut spaces = BTreeMap::new();
    for space in [model.world(), model.sensors(), model.agent(), model.actuators()] {
        spaces.insert(space.name().to_owned(), space.labels().to_vec());
    }
    let mut kernels = BTreeMap::new();
    kernels.insert("alpha".to_owned(), kernel_to_doc(model.alpha()));
    kernels.insert("beta".to_owned(), kernel_to_doc(model.beta()));
    kernels.insert("phi".to_owned(), kernel_to_doc(model.phi()));
    kernels.insert("pi".to_owned(), kernel_to_doc(model.pi()));
    let arithmetic = if T::EXACT {
        ArithmeticDoc::Named("rational".to_owned())
    } else {
        ArithmeticDoc::Float {
            float: model.tolerance().to_f64(),
        }
    };
    ModelDoc {
        spaces,
        kernels,
        initial: Some(model.initial().iter().map(Scalar::render).collect()),
        memoryless: model.memoryless(),
        arithmetic,
    }
}

pub fn render_model<T: Scalar>(model: &LoopModel<T>) -> String {
    let doc = model_to_doc(model);
    serde_json::to_string_pretty(&doc).expect("model docs serialize")
}

// ---------------------------------------------------------------------------
// partitions

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionDoc {
    pub space: String,
    pub blocks: Vec<Vec<String>>,
}

pub fn partition_to_doc(p: &Partition) -> PartitionDoc {
    PartitionDoc {
        space: p.space().name().to_owned(),
        blocks: p.block_labels(),
    }
}

/// Reads a partition document against a known space.
pub fn partition_from_doc(doc: &PartitionDoc, space: &SpaceRef) -> Result<Partition, FormatError> {
    let blocks = doc
        .blocks
        .iter()
        .map(|block| {
            block
                .iter()
                .map(|label| space.index_of(label))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Partition::from_blocks(space.clone(), blocks)?)
}

/// Reads a standalone partition document; the state universe is the set of
/// labels mentioned in the blocks, ordered lexicographically.
pub fn partition_from_standalone(doc: &PartitionDoc) -> Result<Partition, FormatError> {
    let mut labels: Vec<String> = doc.blocks.iter().flatten().cloned().collect();
    labels.sort();
    labels.dedup();
    if labels.is_empty() {
        return Err(FormatError::Partition("no states in any block".to_owned()));
    }
    let space = FiniteSpace::new(doc.space.clone(), labels)?;
    partition_from_doc(doc, &space)
}

pub fn parse_partition(text: &str) -> Result<Partition, FormatError> {
    let doc: PartitionDoc = serde_json::from_str(text)?;
    partition_from_standalone(&doc)
}

// ---------------------------------------------------------------------------
// two-agent models

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentDoc {
    pub sensors: KernelDoc,
    pub memory: KernelDoc,
    pub policy: KernelDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoAgentDoc {
    pub spaces: BTreeMap<String, Vec<String>>,
    pub agents: Vec<AgentDoc>,
    pub alpha: KernelDoc,
    #[serde(default)]
    pub arithmetic: ArithmeticDoc,
}

#[derive(Debug, Clone)]
pub enum AnyTwoAgent {
    Rational(TwoAgentModel<Rational>),
    Float(TwoAgentModel<f64>),
}

pub fn parse_two_agent(text: &str) -> Result<AnyTwoAgent, FormatError> {
    let doc: TwoAgentDoc = serde_json::from_str(text)?;
    match &doc.arithmetic {
        ArithmeticDoc::Named(name) if name == "rational" => Ok(AnyTwoAgent::Rational(
            build_two_agent::<Rational>(&doc, Rational::zero())?,
        )),
        ArithmeticDoc::Named(other) => Err(FormatError::Partition(format!(
            "unknown arithmetic mode {other:?}"
        ))),
        ArithmeticDoc::Float { float } => {
            Ok(AnyTwoAgent::Float(build_two_agent::<f64>(&doc, *float)?))
        }
    }
}

fn build_two_agent<T: Scalar>(doc: &TwoAgentDoc, tol: T) -> Result<TwoAgentModel<T>, FormatError> {
    if doc.agents.len() != 2 {
        return Err(FormatError::AgentCount(doc.agents.len()));
    }
    let mut spaces: BTreeMap<String, SpaceRef> = BTreeMap::new();
    for (name, labels) in &doc.spaces {
        spaces.insert(name.clone(), FiniteSpace::new(name.clone(), labels.iter().cloned())?);
    }
    let need = |name: &str| -> Result<SpaceRef, FormatError> {
        spaces
            .get(name)
            .cloned()
            .ok_or_else(|| FormatError::MissingSpace(name.to_owned()))
    };
    let world = need("W")?;
    let mut agents = Vec::with_capacity(2);
    for (i, agent_doc) in doc.agents.iter().enumerate() {
        let n = i + 1;
        let sensors = need(&format!("S{n}"))?;
        let agent = need(&format!("C{n}"))?;
        let actuators = need(&format!("A{n}"))?;
        agents.push(AgentSpec {
            sensors,
            agent,
            actuators,
            beta: kernel_from_doc(&format!("beta{n}"), &agent_doc.sensors, &spaces)?,
            phi: kernel_from_doc(&format!("phi{n}"), &agent_doc.memory, &spaces)?,
            pi: kernel_from_doc(&format!("pi{n}"), &agent_doc.policy, &spaces)?,
        });
    }
    let alpha = kernel_from_doc("alpha", &doc.alpha, &spaces)?;
    let agents: [AgentSpec<T>; 2] = match <[AgentSpec<T>; 2]>::try_from(agents) {
        Ok(a) => a,
        Err(_) => unreachable!("length checked above"),
    };
    Ok(TwoAgentModel::new(world, agents, alpha, tol)?)
}

// ---------------------------------------------------------------------------
// synthesized models

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McDoc {
    pub horizon: usize,
    pub samples: u64,
    pub seed: u64,
    pub max_word_deviation: f64,
    pub max_tv_distance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterexampleDoc {
    pub state: String,
    pub action_word: Vec<String>,
    pub sensor_word: Vec<String>,
    pub original_prob: String,
    pub modified_prob: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceCertDoc {
    pub certified: bool,
    pub failing_states: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<McDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimalityCertDoc {
    pub holds: bool,
    pub w_sep_modified: PartitionDoc,
    pub intrinsic_original: PartitionDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificatesDoc {
    pub equivalence: EquivalenceCertDoc,
    pub minimality: MinimalityCertDoc,
}

/// A synthesized model file: the full modified model (with `alpha` replaced
/// by the synthesized update), the selector, and the verification verdicts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModifiedModelDoc {
    pub model: ModelDoc,
    pub selector: BTreeMap<String, String>,
    pub certificates: CertificatesDoc,
}

pub fn equivalence_cert_to_doc<T: Scalar>(
    model: &LoopModel<T>,
    cert: &EquivalenceCertificate<T>,
) -> EquivalenceCertDoc {
    EquivalenceCertDoc {
        certified: cert.certified,
        failing_states: cert
            .failing_states
            .iter()
            .map(|&w| model.world().label(w).to_owned())
            .collect(),
        counterexample: cert.counterexample.as_ref().map(|ce| CounterexampleDoc {
            state: model.world().label(ce.state).to_owned(),
            action_word: ce.action_word.labels(model.actuators()),
            sensor_word: ce.sensor_word.labels(model.sensors()),
            original_prob: ce.original_prob.render(),
            modified_prob: ce.modified_prob.render(),
        }),
        monte_carlo: cert.monte_carlo.as_ref().map(|mc| McDoc {
            horizon: mc.horizon,
            samples: mc.samples,
            seed: mc.seed,
            max_word_deviation: mc.max_word_deviation,
            max_tv_distance: mc.max_tv_distance,
            passed: mc.passed,
        }),
    }
}

pub fn modified_model_to_doc<T: Scalar>(
    modified: &ModifiedModel<T>,
    equivalence: EquivalenceCertDoc,
    minimality: &MinimalityReport,
) -> ModifiedModelDoc {
    let world = modified.base.world();
    let selector = (0..world.len())
        .map(|w| {
            (
                world.label(w).to_owned(),
                world.label(modified.selector.representative(w)).to_owned(),
            )
        })
        .collect();
    ModifiedModelDoc {
        model: model_to_doc(&modified.modified_loop()),
        selector,
        certificates: CertificatesDoc {
            equivalence,
            minimality: MinimalityCertDoc {
                holds: minimality.holds,
                w_sep_modified: partition_to_doc(&minimality.w_sep_modified),
                intrinsic_original: partition_to_doc(&minimality.intrinsic_original),
            },
        },
    }
}

/// Reconstructs a [`ModifiedModel`] from a synthesized file and its base
/// model, re-deriving nothing: the stored selector and update are taken as
/// claimed so they can be re-verified.
pub fn modified_model_from_doc<T: Scalar>(
    doc: &ModifiedModelDoc,
    base: &LoopModel<T>,
) -> Result<ModifiedModel<T>, FormatError> {
    let stored = build_model::<T>(&doc.model, base.tolerance().clone())?;
    if stored.world() != base.world() {
        return Err(FormatError::Partition(
            "synthesized file's world space differs from the base model".to_owned(),
        ));
    }
    let mut map = Vec::with_capacity(base.world().len());
    for w in 0..base.world().len() {
        let label = base.world().label(w);
        let rep_label = doc
            .selector
            .get(label)
            .ok_or_else(|| FormatError::Partition(format!("selector misses state {label:?}")))?;
        map.push(base.world().index_of(rep_label)?);
    }
    Ok(ModifiedModel {
        base: base.clone(),
        selector: Selector::new(map)?,
        alpha_prime: stored.alpha().clone(),
    })
}

pub fn parse_modified_model(text: &str) -> Result<ModifiedModelDoc, FormatError> {
    Ok(serde_json::from_str(text)?)
}
