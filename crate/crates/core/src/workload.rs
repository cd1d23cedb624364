//! DNN model and device catalogs, jobs and scenario generation.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{generate_random_geometric, NodeId, PhysicalNetwork};

/// 1 KB = 1024 bytes.
pub const BITS_PER_KB: f64 = 8192.0;
/// 1 MB = 1000 KB, so 524.288 MB is exactly 2^19 KB.
pub const KB_PER_MB: f64 = 1000.0;
pub const BPS_PER_MBPS: f64 = 1e6;
/// Peak WiFi 4 data rate.
pub const MAX_LINK_MBPS: f64 = 72.2;
pub const DEFAULT_SIDE_M: f64 = 30.0;
pub const DEFAULT_RANGE_M: f64 = 7.5;

pub fn kb_to_bits(kb: f64) -> f64 {
    kb * BITS_PER_KB
}

/// Seconds to compute `c_mm` at a node running at `mu_mm_s`.
pub fn compute_time(c_mm: f64, mu_mm_s: f64, node: NodeId) -> Result<f64> {
    if mu_mm_s <= 0.0 {
        return Err(Error::ZeroRate { node });
    }
    Ok(c_mm / mu_mm_s)
}

/// Seconds to push `bits` through a link of `mu_bps`.
pub fn transmission_time(bits: f64, mu_bps: f64) -> f64 {
    if bits == 0.0 {
        0.0
    } else {
        bits / mu_bps
    }
}

/// Per-layer requirements of a feed-forward model with `L` layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DnnModel {
    pub name: String,
    /// `data_kb[l]` is the output size of layer `l`; `data_kb[0]` is the input.
    pub data_kb: Vec<f64>,
    /// `compute_mm[l-1]` is the load of layer `l`.
    pub compute_mm: Vec<f64>,
    /// `memory_kb[l-1]` is the memory need of layer `l`.
    pub memory_kb: Vec<f64>,
}

impl DnnModel {
    pub fn new(name: impl Into<String>, data_kb: Vec<f64>, compute_mm: Vec<f64>, memory_kb: Vec<f64>) -> Result<Self> {
        let model = DnnModel { name: name.into(), data_kb, compute_mm, memory_kb };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.compute_mm.len();
        if l == 0 || self.data_kb.len() != l + 1 || self.memory_kb.len() != l {
            return Err(Error::InvalidModel(format!("{}: inconsistent layer counts", self.name)));
        }
        let all = self.data_kb.iter().chain(&self.compute_mm).chain(&self.memory_kb);
        if all.into_iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidModel(format!("{}: entries must be positive", self.name)));
        }
        Ok(())
    }

    pub fn layers(&self) -> usize {
        self.compute_mm.len()
    }

    /// Output of layer `l` in bits.
    pub fn data_bits(&self, l: usize) -> f64 {
        kb_to_bits(self.data_kb[l])
    }

    /// Compute load of layer `l` (1-based).
    pub fn compute(&self, l: usize) -> f64 {
        self.compute_mm[l - 1]
    }

    /// Memory need of layer `l` (1-based).
    pub fn memory(&self, l: usize) -> f64 {
        self.memory_kb[l - 1]
    }

    pub fn total_compute(&self) -> f64 {
        self.compute_mm.iter().sum()
    }

    /// Contiguous slice of layers `first..=last` as a model of its own, fed
    /// with the output of layer `first - 1`.
    pub fn window(&self, first: usize, last: usize) -> Result<DnnModel> {
        if first == 0 || first > last || last > self.layers() {
            return Err(Error::InvalidModel(format!("{}: bad window {first}..{last}", self.name)));
        }
        DnnModel::new(
            format!("{}[{first}..{last}]", self.name),
            self.data_kb[first - 1..=last].to_vec(),
            self.compute_mm[first - 1..last].to_vec(),
            self.memory_kb[first - 1..last].to_vec(),
        )
    }
}

/// The three benchmark CNNs: SLN, AN and RN.
pub fn builtin_models() -> Vec<DnnModel> {
    let m = |name: &str, d: &[f64], c: &[f64], mem: &[f64]| DnnModel {
        name: name.to_string(),
        data_kb: d.to_vec(),
        compute_mm: c.to_vec(),
        memory_kb: mem.to_vec(),
    };
    vec![
        m(
            "SLN",
            &[9.41, 50.18, 12.54, 1.54, 0.77, 0.04],
            &[3.81, 20.08, 1.20, 0.07, 0.002],
            &[19.20, 409.60, 4816.90, 294.91, 7.68],
        ),
        m(
            "AN",
            &[618.35, 279.94, 173.06, 259.58, 259.58, 36.86, 16.38, 16.38, 4.00],
            &[105.73, 224.34, 149.52, 112.14, 74.84, 37.75, 16.78, 4.10],
            &[139.78, 1229.82, 3540.48, 2655.74, 1770.50, 151011.39, 67125.25, 16388.00],
        ),
        m(
            "RN",
            &[602.12, 802.82, 802.82, 200.71, 50.18, 50.18, 50.18, 50.18, 12.54, 4.00],
            &[118.01, 616.56, 757.86, 950.53, 1156.06, 1156.06, 1156.06, 565.18, 2.20],
            &[37.63, 786.43, 2228.22, 21757.95, 26738.69, 26738.69, 26738.69, 51380.22, 8388.61],
        ),
    ]
}

/// Looks up a built-in model by name, accepting window names like `AN[2..4]`.
pub fn builtin_model(name: &str) -> Result<DnnModel> {
    let (base, window) = match name.split_once('[') {
        Some((base, rest)) => (base, Some(rest.strip_suffix(']').ok_or_else(|| Error::UnknownModel(name.into()))?)),
        None => (name, None),
    };
    let model = builtin_models()
        .into_iter()
        .find(|m| m.name == base)
        .ok_or_else(|| Error::UnknownModel(name.into()))?;
    match window {
        None => Ok(model),
        Some(range) => {
            let (a, b) = range.split_once("..").ok_or_else(|| Error::UnknownModel(name.into()))?;
            let parse = |s: &str| s.parse::<usize>().map_err(|_| Error::UnknownModel(name.into()));
            model.window(parse(a)?, parse(b)?)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeType {
    pub name: String,
    pub cbar_mm: f64,
    pub mem_mb: f64,
    pub mu_mm_s: f64,
}

/// Orange Pi Zero, Banana Pi M2 Zero-class and Raspberry Pi 3 devices.
pub fn builtin_node_types() -> Vec<NodeType> {
    let t = |name: &str, cbar_mm, mem_mb, mu_mm_s| NodeType { name: name.to_string(), cbar_mm, mem_mb, mu_mm_s };
    vec![t("OPZ", 100000.0, 524.288, 360.0), t("BAI", 100000.0, 131.072, 480.0), t("RP3", 100000.0, 524.288, 560.0)]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub id: usize,
    pub model: DnnModel,
    pub src: NodeId,
    pub dst: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub n: usize,
    pub jobs: usize,
    pub gamma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioFile", into = "ScenarioFile")]
pub struct Scenario {
    pub params: ScenarioParams,
    pub network: PhysicalNetwork,
    pub jobs: Vec<Job>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct JobEntry {
    id: usize,
    model: String,
    src: NodeId,
    dst: NodeId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ScenarioFile {
    params: ScenarioParams,
    network: PhysicalNetwork,
    jobs: Vec<JobEntry>,
    /// Models referenced by name that are not in the built-in catalog.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    models: Vec<DnnModel>,
}

impl TryFrom<ScenarioFile> for Scenario {
    type Error = Error;
    fn try_from(f: ScenarioFile) -> Result<Self> {
        let custom: BTreeMap<&str, &DnnModel> = f.models.iter().map(|m| (m.name.as_str(), m)).collect();
        let jobs = f
            .jobs
            .iter()
            .map(|j| {
                let model = match custom.get(j.model.as_str()) {
                    Some(m) => (*m).clone(),
                    None => builtin_model(&j.model)?,
                };
                Ok(Job { id: j.id, model, src: j.src, dst: j.dst })
            })
            .collect::<Result<Vec<_>>>()?;
        Scenario::new(f.params, f.network, jobs)
    }
}

impl From<Scenario> for ScenarioFile {
    fn from(s: Scenario) -> Self {
        let builtin = builtin_models();
        let mut models: Vec<DnnModel> = Vec::new();
        for job in &s.jobs {
            let known = builtin.contains(&job.model) || models.iter().any(|m| m.name == job.model.name);
            if !known {
                models.push(job.model.clone());
            }
        }
        ScenarioFile {
            params: s.params,
            jobs: s
                .jobs
                .iter()
                .map(|j| JobEntry { id: j.id, model: j.model.name.clone(), src: j.src, dst: j.dst })
                .collect(),
            network: s.network,
            models,
        }
    }
}

impl Scenario {
    pub fn new(params: ScenarioParams, network: PhysicalNetwork, jobs: Vec<Job>) -> Result<Self> {
        for (i, job) in jobs.iter().enumerate() {
            if job.id != i {
                return Err(Error::InvalidScenario(format!("job at position {i} has id {}", job.id)));
            }
            if job.src >= network.num_nodes() || job.dst >= network.num_nodes() {
                return Err(Error::InvalidScenario(format!("job {i} references a missing node")));
            }
            job.model.validate()?;
        }
        if network.compute_nodes().next().is_none() {
            return Err(Error::InvalidScenario("no node can compute".into()));
        }
        Ok(Scenario { params, network, jobs })
    }

    /// Largest layer count over all jobs.
    pub fn max_layers(&self) -> usize {
        self.jobs.iter().map(|j| j.model.layers()).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Knobs for scenario generation. [`ScenarioConfig::new`] gives the
/// benchmark setup; the other fields exist for tests and small instances.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n: usize,
    pub jobs: usize,
    pub gamma: f64,
    pub seed: u64,
    pub side_m: f64,
    pub range_m: f64,
    /// Use one sampled rate for both directions of a neighbour pair.
    pub symmetric_rates: bool,
    pub node_types: Vec<NodeType>,
    pub models: Vec<DnnModel>,
    pub distinct_endpoints: bool,
}

impl ScenarioConfig {
    pub fn new(n: usize, jobs: usize, gamma: f64, seed: u64) -> Self {
        ScenarioConfig {
            n,
            jobs,
            gamma,
            seed,
            side_m: DEFAULT_SIDE_M,
            range_m: DEFAULT_RANGE_M,
            symmetric_rates: false,
            node_types: builtin_node_types(),
            models: builtin_models(),
            distinct_endpoints: false,
        }
    }

    pub fn generate(&self) -> Result<Scenario> {
        if self.n < 2 || self.jobs == 0 || !(self.gamma > 0.0) {
            return Err(Error::InvalidScenario("need n >= 2, at least one job and gamma > 0".into()));
        }
        if self.node_types.is_empty() || self.models.is_empty() {
            return Err(Error::InvalidScenario("empty node-type or model catalog".into()));
        }
        let mut net = generate_random_geometric(self.n, self.side_m, self.range_m, self.seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(u64::MAX);

        for u in 0..net.num_nodes() {
            let t = self.node_types.choose(&mut rng).expect("non-empty");
            net.set_node_params(u, t.mu_mm_s, t.mem_mb * KB_PER_MB, t.cbar_mm);
        }
        let step = self.gamma * MAX_LINK_MBPS * BPS_PER_MBPS / 5.0;
        for e in 0..net.num_links() {
            let link = net.link(e).clone();
            let reverse = net.find_link(link.to, link.from);
            let rate = match reverse {
                Some(r) if self.symmetric_rates && r < e => net.link(r).mu_bps,
                _ => rng.gen_range(1..=5) as f64 * step,
            };
            net.set_link_rate(e, rate);
        }
        let jobs = (0..self.jobs)
            .map(|id| {
                let model = self.models.choose(&mut rng).expect("non-empty").clone();
                let src = rng.gen_range(0..self.n);
                let mut dst = rng.gen_range(0..self.n);
                while self.distinct_endpoints && dst == src {
                    dst = rng.gen_range(0..self.n);
                }
                Job { id, model, src, dst }
            })
            .collect();
        let params = ScenarioParams { n: self.n, jobs: self.jobs, gamma: self.gamma, seed: self.seed };
        Scenario::new(params, net, jobs)
    }
}

/// Benchmark scenario: 30 m square, 7.5 m range, Table-style devices and models.
pub fn generate_scenario(n: usize, jobs: usize, gamma: f64, seed: u64) -> Result<Scenario> {
    ScenarioConfig::new(n, jobs, gamma, seed).generate()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_names_resolve() {
        let w = builtin_model("AN[2..4]").unwrap();
        assert_eq!(w.layers(), 3);
        assert_eq!(w.data_kb, vec![279.94, 173.06, 259.58, 259.58]);
        assert_eq!(w.compute_mm, vec![224.34, 149.52, 112.14]);
        assert!(builtin_model("XX").is_err());
        assert!(builtin_model("AN[0..2]").is_err());
    }

    #[test]
    fn unit_conversions() {
        assert!((compute_time(360.0, 560.0, 0).unwrap() - 0.642_857_142_857_142_8).abs() < 1e-15);
        assert!(compute_time(1.0, 0.0, 3).is_err());
        assert_eq!(transmission_time(0.0, 5.0), 0.0);
    }

    #[test]
    fn rates_are_on_the_grid() {
        let s = generate_scenario(12, 3, 0.2, 4).unwrap();
        let step = 0.2 * 72.2e6 / 5.0;
        for l in s.network.links() {
            let k = l.mu_bps / step;
            assert!((k - k.round()).abs() < 1e-9 && (1.0..=5.0).contains(&k.round()));
        }
    }

    #[test]
    fn symmetric_mode_mirrors_rates() {
        let mut cfg = ScenarioConfig::new(10, 1, 1.0, 8);
        cfg.symmetric_rates = true;
        let s = cfg.generate().unwrap();
        for l in s.network.links() {
            let r = s.network.find_link(l.to, l.from).unwrap();
            assert_eq!(l.mu_bps, s.network.link(r).mu_bps);
        }
    }
}
