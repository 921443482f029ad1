//! Problem sources: `maxcut:<path>`, `matcomp:<path>` and
//! `synthetic:<kind>[:key=value,...]`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use sdp_core::{build_matrix_completion, build_maxcut, instances, io, SdpProblem, WeightedGraph};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    MaxCut(PathBuf),
    MatComp(PathBuf),
    Synthetic { kind: String, params: BTreeMap<String, String> },
}

const SYNTHETIC_KINDS: &[&str] = &[
    "maxcut",
    "sparse-maxcut",
    "matcomp",
    "planted",
    "degenerate",
    "trace-toy",
    "two-node",
];

impl Source {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let (head, rest) = s
            .split_once(':')
            .ok_or_else(|| CliError::Input(format!("problem source '{s}' has no ':'")))?;
        match head {
            "maxcut" => Ok(Source::MaxCut(PathBuf::from(rest))),
            "matcomp" => Ok(Source::MatComp(PathBuf::from(rest))),
            "synthetic" => {
                let (kind, params) = rest.split_once(':').unwrap_or((rest, ""));
                if !SYNTHETIC_KINDS.contains(&kind) {
                    return Err(CliError::Input(format!(
                        "unknown synthetic kind '{kind}', expected one of {}",
                        SYNTHETIC_KINDS.join(", ")
                    )));
                }
                let mut map = BTreeMap::new();
                for kv in params.split(',').filter(|p| !p.is_empty()) {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| CliError::Input(format!("synthetic parameter '{kv}' is not key=value")))?;
                    map.insert(k.trim().to_string(), v.trim().to_string());
                }
                Ok(Source::Synthetic {
                    kind: kind.to_string(),
                    params: map,
                })
            }
            _ => Err(CliError::Input(format!("unknown problem source '{head}'"))),
        }
    }

    /// Fails if a referenced file is missing, before anything is written.
    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            Source::MaxCut(p) | Source::MatComp(p) if !p.is_file() => {
                Err(CliError::Input(format!("input file {} does not exist", p.display())))
            }
            _ => Ok(()),
        }
    }

    pub fn load(&self, seed: u64) -> Result<SdpProblem, CliError> {
        match self {
            Source::MaxCut(p) => Ok(build_maxcut(&io::read_graph(p)?)?),
            Source::MatComp(p) => {
                let o = io::read_observations(p)?;
                Ok(build_matrix_completion(o.n1, o.n2, &o.entries)?)
            }
            Source::Synthetic { kind, params } => synthetic(kind, params, seed),
        }
    }
}

fn param<T: std::str::FromStr>(params: &BTreeMap<String, String>, key: &str, default: T) -> Result<T, CliError> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| CliError::Input(format!("synthetic parameter {key}='{v}' does not parse"))),
    }
}

fn synthetic(kind: &str, params: &BTreeMap<String, String>, seed: u64) -> Result<SdpProblem, CliError> {
    let seed = param(params, "seed", seed)?;
    let p = match kind {
        "maxcut" => {
            let n = param(params, "n", 100usize)?;
            let prob = param(params, "p", 0.1f64)?;
            build_maxcut(&instances::random_graph(n, prob, seed))?
        }
        "sparse-maxcut" => {
            let n = param(params, "n", 1000usize)?;
            let degree = param(params, "degree", 8usize)?;
            build_maxcut(&instances::random_sparse_graph(n, degree, seed))?
        }
        "matcomp" => {
            if params.contains_key("n1") || params.contains_key("n2") {
                let n1 = param(params, "n1", 75usize)?;
                let n2 = param(params, "n2", 50usize)?;
                let rank = param(params, "rank", 5usize)?;
                let count = params
                    .get("count")
                    .map(|_| param(params, "count", 0usize))
                    .transpose()?;
                instances::low_rank_completion(n1, n2, rank, count, seed).problem()?
            } else {
                let c = param(params, "c", 1usize)?;
                instances::synthetic_matrix_completion(c, seed).problem()?
            }
        }
        "planted" => {
            let n = param(params, "n", 20usize)?;
            let r = param(params, "r", 2usize)?;
            let m = param(params, "m", r * (r + 1) / 2 + n)?;
            instances::planted_sdp(n, r, m, seed)?.problem
        }
        "degenerate" => instances::degenerate_instance(),
        "trace-toy" => instances::trace_normalization(param(params, "n", 4usize)?),
        "two-node" => build_maxcut(&WeightedGraph {
            n: 2,
            edges: vec![(0, 1, 1.0)],
        })?,
        _ => unreachable!("kind was validated at parse time"),
    };
    Ok(p)
}
