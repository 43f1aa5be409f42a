use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::netmodel::codes::{ConstantCode, FeedbackRepeat, UncodedRelay};
use crate::netmodel::{
    validate_spec, ChannelSpec, CodeParameters, CodingPolicy, Demand, Diagnostic, Edge,
    NetworkSpec, NodeId, SourceModel,
};
use crate::probkit::{DistortionMeasure, Kernel, ProbVector};

use super::experiments::Experiment;
use super::ExpError;

pub const DEFAULT_TRIALS: u64 = 1000;

/// A parsed and validated scenario file.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub net: Option<NetworkSpec>,
    pub code: Option<CodeRecipe>,
    pub experiment: Experiment,
    pub trials: u64,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

/// A named code from the built-in table with its block parameters.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeRecipe {
    pub name: String,
    pub params: CodeParams,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeParams {
    pub block_len: usize,
    pub channel_uses: usize,
    /// Reconstruction symbol of the `constant` code.
    #[serde(default)]
    pub value: usize,
}

pub const CODE_NAMES: [&str; 3] = ["uncoded", "constant", "feedback-repeat"];

impl CodeRecipe {
    pub fn params(&self) -> CodeParameters {
        CodeParameters::new(self.params.block_len, self.params.channel_uses)
    }

    pub fn build(&self) -> Result<Arc<dyn CodingPolicy>, ExpError> {
        Ok(match self.name.as_str() {
            "uncoded" => Arc::new(UncodedRelay),
            "constant" => Arc::new(ConstantCode { value: self.params.value }),
            "feedback-repeat" => Arc::new(FeedbackRepeat),
            other => {
                return Err(ExpError::Scenario(format!(
                    "unknown code '{other}', expected one of {}",
                    CODE_NAMES.join(", ")
                )))
            }
        })
    }
}

/// File layout: the network fields sit at the top level next to `code`,
/// `experiment`, `trials`, `seed` and `output`. Experiments that need no
/// network omit `nodes`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    nodes: Option<usize>,
    #[serde(default)]
    edges: Vec<RawEdge>,
    #[serde(default)]
    sources: Option<RawSource>,
    #[serde(default)]
    demands: Vec<RawDemand>,
    #[serde(default)]
    code: Option<CodeRecipe>,
    #[serde(default)]
    experiment: Option<Experiment>,
    #[serde(default)]
    trials: Option<u64>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    output: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    from: NodeId,
    to: NodeId,
    channel: RawChannel,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RawChannel {
    Dmc { kernel: Vec<Vec<f64>> },
    Pipe { rate: f64 },
}

/// `iid` takes either `node` + `law` (one source, other nodes constant) or
/// `alphabets` + `joint`; `markov` takes either `node` + `flip` (binary flip
/// chain) or `alphabets` + `initial` + `transition`.
#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RawSource {
    Iid {
        node: Option<NodeId>,
        law: Option<Vec<f64>>,
        alphabets: Option<Vec<usize>>,
        joint: Option<Vec<f64>>,
    },
    Markov {
        node: Option<NodeId>,
        flip: Option<f64>,
        alphabets: Option<Vec<usize>>,
        initial: Option<Vec<f64>>,
        transition: Option<Vec<Vec<f64>>>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDemand {
    a: NodeId,
    b: NodeId,
    /// Hamming on the source alphabet when omitted.
    #[serde(default)]
    distortion_matrix: Option<Vec<Vec<f64>>>,
}

fn build_source(nodes: usize, raw: RawSource) -> Result<SourceModel, String> {
    let at = |node: NodeId| {
        if node.0 < nodes {
            Ok(node)
        } else {
            Err(format!("source node {node} does not exist"))
        }
    };
    let err = |e: crate::probkit::ProbError| e.to_string();
    match raw {
        RawSource::Iid {
            node: Some(node),
            law: Some(law),
            alphabets: None,
            joint: None,
        } => Ok(SourceModel::single(nodes, at(node)?, ProbVector::new(law).map_err(err)?)),
        RawSource::Iid {
            node: None,
            law: None,
            alphabets: Some(alphabets),
            joint: Some(joint),
        } => SourceModel::iid(alphabets, ProbVector::new(joint).map_err(err)?).map_err(err),
        RawSource::Markov {
            node: Some(node),
            flip: Some(flip),
            alphabets: None,
            initial: None,
            transition: None,
        } => SourceModel::binary_markov(nodes, at(node)?, flip).map_err(err),
        RawSource::Markov {
            node: None,
            flip: None,
            alphabets: Some(alphabets),
            initial: Some(initial),
            transition: Some(transition),
        } => {
            // the transition is checked by validation, which also tests mixing
            let transition = Kernel::new_unchecked(transition).map_err(err)?;
            SourceModel::markov(alphabets, ProbVector::new(initial).map_err(err)?, transition).map_err(err)
        }
        RawSource::Iid { .. } => Err("iid source takes either node + law or alphabets + joint".into()),
        RawSource::Markov { .. } => {
            Err("markov source takes either node + flip or alphabets + initial + transition".into())
        }
    }
}

fn build_network(nodes: usize, edges: Vec<RawEdge>, sources: RawSource, raw_demands: Vec<RawDemand>) -> Result<NetworkSpec, ExpError> {
    let mut diags = Vec::new();
    let mut built = Vec::with_capacity(edges.len());
    for (e, edge) in edges.into_iter().enumerate() {
        let channel = match edge.channel {
            RawChannel::Pipe { rate } => ChannelSpec::BitPipe { rate },
            RawChannel::Dmc { kernel } => match Kernel::new_unchecked(kernel) {
                Ok(k) => ChannelSpec::Dmc(k),
                Err(err) => {
                    diags.push(Diagnostic::InvalidKernel {
                        edge: e,
                        reason: err.to_string(),
                    });
                    continue;
                }
            },
        };
        built.push(Edge {
            from: edge.from,
            to: edge.to,
            channel,
        });
    }
    let sources = match build_source(nodes, sources) {
        Ok(s) => Some(s),
        Err(reason) => {
            diags.push(Diagnostic::InvalidSource { reason });
            None
        }
    };
    let mut demands = Vec::with_capacity(raw_demands.len());
    for (d, demand) in raw_demands.into_iter().enumerate() {
        let distortion = match demand.distortion_matrix {
            Some(rows) => DistortionMeasure::new_unchecked(rows),
            None => {
                let a = sources
                    .as_ref()
                    .and_then(|s| s.alphabets().get(demand.a.0).copied())
                    .unwrap_or(1);
                Ok(DistortionMeasure::hamming(a))
            }
        };
        match distortion {
            Ok(distortion) => demands.push(Demand {
                source: demand.a,
                sink: demand.b,
                distortion,
            }),
            Err(err) => diags.push(Diagnostic::InvalidDistortion {
                demand: d,
                reason: err.to_string(),
            }),
        }
    }
    let Some(sources) = sources.filter(|_| diags.is_empty()) else {
        return Err(ExpError::Invalid(diags));
    };
    let net = NetworkSpec {
        nodes,
        edges: built,
        sources,
        demands,
    };
    let diags = validate_spec(&net);
    if diags.is_empty() {
        Ok(net)
    } else {
        Err(ExpError::Invalid(diags))
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ExpError> {
    let raw: RawScenario = serde_json::from_str(text)?;
    let net = match (raw.nodes, raw.sources) {
        (Some(nodes), Some(sources)) => Some(build_network(nodes, raw.edges, sources, raw.demands)?),
        (None, None) if raw.edges.is_empty() && raw.demands.is_empty() => None,
        (Some(_), None) => return Err(ExpError::Scenario("network has no sources".into())),
        _ => return Err(ExpError::Scenario("network fields given without nodes".into())),
    };
    if let Some(code) = &raw.code {
        code.build()?;
        if code.params.block_len == 0 || code.params.channel_uses == 0 {
            return Err(ExpError::Scenario("code needs block_len and channel_uses ≥ 1".into()));
        }
    }
    Ok(Scenario {
        net,
        code: raw.code,
        experiment: raw.experiment.unwrap_or(Experiment::Simulate),
        trials: raw.trials.unwrap_or(DEFAULT_TRIALS),
        seed: raw.seed,
        output: raw.output,
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ExpError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ExpError::Scenario(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text)
}

impl Scenario {
    pub fn network(&self) -> Result<&NetworkSpec, ExpError> {
        self.net
            .as_ref()
            .ok_or_else(|| ExpError::Scenario("scenario has no network".into()))
    }

    pub fn code_recipe(&self) -> Result<&CodeRecipe, ExpError> {
        self.code
            .as_ref()
            .ok_or_else(|| ExpError::Scenario("scenario has no code".into()))
    }
}
