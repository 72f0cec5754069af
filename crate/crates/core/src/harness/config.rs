//! Experiment configuration: a plain-text file of `key = value` lines under
//! `[section]` headers.
//!
//! ```text
//! [experiment]
//! delta = 0.5
//! sweep = 0.1, 0.2, 0.3
//! repetitions = 30
//! master_seed = 7
//!
//! [output]
//! dir = out
//!
//! [network core_periphery]
//! kind = preset
//! preset = core_periphery
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::{Ini, Properties};

use crate::characteristics::{Characteristic, SeedLabeling};
use crate::error::{Error, Result};
use crate::generators::{
    BackwardBurn, BurnCount, ForestFireParams, KroneckerParams, NetworkParams, Preset,
};
use crate::sampling::{Approach, Technique, DEFAULT_RW_RESTART};

/// Where an underlying network comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum NetworkSource {
    Generated(NetworkParams),
    File { path: PathBuf, directed: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec {
    pub name: String,
    pub source: NetworkSource,
    pub beta: f64,
    /// Fixed generator seed; derived from the master seed when `None`.
    pub generator_seed: Option<u64>,
}

impl NetworkSpec {
    pub fn preset(preset: Preset) -> Self {
        NetworkSpec {
            name: preset.name().to_owned(),
            source: NetworkSource::Generated(preset.network()),
            beta: preset.beta(),
            generator_seed: None,
        }
    }

    /// Preset family at `2^iterations` nodes.
    pub fn scaled_preset(preset: Preset, iterations: u32) -> Self {
        NetworkSpec {
            source: NetworkSource::Generated(preset.scaled(iterations)),
            ..NetworkSpec::preset(preset)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputPaths {
    pub dir: PathBuf,
    pub csv: String,
    pub plot: String,
    pub summary: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        OutputPaths {
            dir: PathBuf::from("out"),
            csv: "accuracy.csv".into(),
            plot: "plot_data.tsv".into(),
            summary: "range_summary.txt".into(),
        }
    }
}

impl OutputPaths {
    pub fn csv_path(&self) -> PathBuf {
        self.dir.join(&self.csv)
    }

    pub fn plot_path(&self) -> PathBuf {
        self.dir.join(&self.plot)
    }

    pub fn summary_path(&self) -> PathBuf {
        self.dir.join(&self.summary)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub networks: Vec<NetworkSpec>,
    pub delta: f64,
    pub max_cascades: Option<usize>,
    pub sweep: Vec<f64>,
    pub approaches: Vec<Approach>,
    pub techniques: Vec<Technique>,
    pub characteristics: Vec<Characteristic>,
    pub repetitions: usize,
    pub master_seed: u64,
    pub workers: Option<usize>,
    /// Build a fresh diffusion network for every repetition.
    pub resample_diffusion: bool,
    /// Keep going (with flagged rows) when coverage falls short of delta.
    pub allow_partial_coverage: bool,
    pub keep_crawled_nodes: bool,
    pub seed_labeling: SeedLabeling,
    pub rw_restart: f64,
    pub output: OutputPaths,
}

/// `0.1, 0.2, ..., 1.0`.
pub fn default_sweep() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            networks: Vec::new(),
            delta: 0.5,
            max_cascades: None,
            sweep: default_sweep(),
            approaches: Approach::ALL.to_vec(),
            techniques: Technique::ALL.to_vec(),
            characteristics: Characteristic::ALL.to_vec(),
            repetitions: 30,
            master_seed: 0,
            workers: None,
            resample_diffusion: true,
            allow_partial_coverage: false,
            keep_crawled_nodes: false,
            seed_labeling: SeedLabeling::GroundTruth,
            rw_restart: DEFAULT_RW_RESTART,
            output: OutputPaths::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.sweep.is_empty() {
            return Err(Error::Config("sweep must list at least one rate".into()));
        }
        if self.sweep.iter().any(|&mu| !(mu > 0.0 && mu <= 1.0)) {
            return Err(Error::Config("sweep rates must lie in (0, 1]".into()));
        }
        if self.sweep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sweep rates must be strictly increasing".into()));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::Config("delta must lie in (0, 1]".into()));
        }
        if self.networks.is_empty() {
            return Err(Error::Config("no [network ...] section".into()));
        }
        for net in &self.networks {
            if !(0.0..=1.0).contains(&net.beta) {
                return Err(Error::Config(format!("network {}: beta must lie in [0, 1]", net.name)));
            }
        }
        let mut names: Vec<&str> = self.networks.iter().map(|n| n.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("network names must be unique".into()));
        }
        if self.approaches.is_empty() || self.techniques.is_empty() || self.characteristics.is_empty() {
            return Err(Error::Config(
                "approaches, techniques and characteristics must be non-empty".into(),
            ));
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        // Relative network paths are resolved against the config's directory.
        if let Some(base) = path.parent() {
            for net in &mut cfg.networks {
                if let NetworkSource::File { path, .. } = &mut net.source {
                    if path.is_relative() {
                        *path = base.join(&*path);
                    }
                }
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = ExperimentConfig::default();
        for (section, props) in ini.iter() {
            match section.map(str::trim) {
                None => {
                    if props.iter().next().is_some() {
                        return Err(Error::Config("keys must sit under a [section]".into()));
                    }
                }
                Some("experiment") => cfg.apply_experiment(props)?,
                Some("output") => cfg.apply_output(props)?,
                Some(s) if s.starts_with("network") => {
                    let name = s["network".len()..].trim();
                    if name.is_empty() {
                        return Err(Error::Config("network section needs a name: [network <name>]".into()));
                    }
                    cfg.networks.push(parse_network(name, props)?);
                }
                Some(other) => return Err(Error::Config(format!("unknown section [{other}]"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_experiment(&mut self, props: &Properties) -> Result<()> {
        for (key, value) in props.iter() {
            let v = value.trim();
            match key {
                "delta" => self.delta = num(key, v)?,
                "max_cascades" => self.max_cascades = Some(num(key, v)?),
                "sweep" => self.sweep = list(key, v, |s| num::<f64>(key, s))?,
                "approaches" => self.approaches = list(key, v, |s| named(key, s, Approach::parse))?,
                "techniques" => self.techniques = list(key, v, |s| named(key, s, Technique::parse))?,
                "characteristics" => {
                    self.characteristics = list(key, v, |s| named(key, s, Characteristic::parse))?
                }
                "repetitions" => self.repetitions = num(key, v)?,
                "master_seed" | "seed" => self.master_seed = num(key, v)?,
                "workers" => self.workers = Some(num(key, v)?),
                "resample_diffusion" => self.resample_diffusion = boolean(key, v)?,
                "allow_partial_coverage" => self.allow_partial_coverage = boolean(key, v)?,
                "keep_crawled_nodes" => self.keep_crawled_nodes = boolean(key, v)?,
                "seed_labeling" => {
                    self.seed_labeling = match v {
                        "ground_truth" => SeedLabeling::GroundTruth,
                        "inferred_roots" => SeedLabeling::InferredRoots,
                        _ => return Err(bad(key, v)),
                    }
                }
                "rw_restart" => self.rw_restart = num(key, v)?,
                _ => return Err(Error::Config(format!("unknown key {key:?} in [experiment]"))),
            }
        }
        Ok(())
    }

    fn apply_output(&mut self, props: &Properties) -> Result<()> {
        for (key, value) in props.iter() {
            let v = value.trim().to_owned();
            match key {
                "dir" => self.output.dir = PathBuf::from(v),
                "csv" => self.output.csv = v,
                "plot" => self.output.plot = v,
                "summary" => self.output.summary = v,
                _ => return Err(Error::Config(format!("unknown key {key:?} in [output]"))),
            }
        }
        Ok(())
    }
}

fn parse_network(name: &str, props: &Properties) -> Result<NetworkSpec> {
    let get = |k: &str| props.get(k).map(str::trim);
    let kind = get("kind").unwrap_or("preset");
    let preset = match get("preset") {
        Some(p) => Some(named("preset", p, Preset::parse)?),
        None => Preset::parse(name),
    };
    let mut source = match kind {
        "preset" => {
            let preset = preset.ok_or_else(|| {
                Error::Config(format!("network {name}: preset kind needs `preset = <name>`"))
            })?;
            match get("scale") {
                Some(s) => NetworkSource::Generated(preset.scaled(num("scale", s)?)),
                None => NetworkSource::Generated(preset.network()),
            }
        }
        "kronecker" => NetworkSource::Generated(NetworkParams::Kronecker(KroneckerParams::new(
            [[0.5; 2]; 2],
            1,
            1,
        ))),
        "forest_fire" => NetworkSource::Generated(NetworkParams::ForestFire(ForestFireParams::new(
            0.0, 0.0, 1, 1,
        ))),
        "file" => NetworkSource::File {
            path: PathBuf::from(get("path").ok_or_else(|| {
                Error::Config(format!("network {name}: file kind needs `path`"))
            })?),
            directed: true,
        },
        other => return Err(Error::Config(format!("network {name}: unknown kind {other:?}"))),
    };
    let mut beta = preset.map(Preset::beta);
    let mut generator_seed = None;
    for (key, value) in props.iter() {
        let v = value.trim();
        match (&mut source, key) {
            (_, "kind" | "preset" | "path" | "scale") => {}
            (_, "beta") => beta = Some(num(key, v)?),
            (_, "generator_seed") => generator_seed = Some(num(key, v)?),
            (NetworkSource::File { directed, .. }, "directed") => *directed = boolean(key, v)?,
            (NetworkSource::Generated(NetworkParams::Kronecker(k)), _) => match key {
                "matrix" => k.seed_matrix = matrix(v)?,
                "iterations" => k.iterations = num(key, v)?,
                "edges" => k.target_edges = num(key, v)?,
                "draws_per_edge" => k.draws_per_edge = num(key, v)?,
                _ => return Err(unknown(name, key)),
            },
            (NetworkSource::Generated(NetworkParams::ForestFire(f)), _) => match key {
                "start_nodes" => f.start_nodes = num(key, v)?,
                "forward" => f.forward_prob = num(key, v)?,
                "backward" => f.backward_prob = num(key, v)?,
                "backward_mode" => {
                    f.backward_mode = match v {
                        "ratio" => BackwardBurn::Ratio,
                        "absolute" => BackwardBurn::Absolute,
                        _ => return Err(bad(key, v)),
                    }
                }
                "burn_count" => {
                    f.burn_count = match v {
                        "geometric" => BurnCount::Geometric,
                        "per_neighbor" => BurnCount::PerNeighbor,
                        _ => return Err(bad(key, v)),
                    }
                }
                "ambassadors" => f.ambassadors = num(key, v)?,
                "orphan" => f.orphan_prob = num(key, v)?,
                "nodes" => f.target_nodes = num(key, v)?,
                "edges" => f.target_edges = Some(num(key, v)?),
                _ => return Err(unknown(name, key)),
            },
            _ => return Err(unknown(name, key)),
        }
    }
    let beta = beta.ok_or_else(|| Error::Config(format!("network {name}: missing `beta`")))?;
    Ok(NetworkSpec {
        name: name.to_owned(),
        source,
        beta,
        generator_seed,
    })
}

fn unknown(network: &str, key: &str) -> Error {
    Error::Config(format!("network {network}: unknown key {key:?}"))
}

fn bad(key: &str, value: &str) -> Error {
    Error::Config(format!("bad value {value:?} for {key}"))
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| bad(key, v))
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, v)),
    }
}

fn named<T>(key: &str, v: &str, parse: impl Fn(&str) -> Option<T>) -> Result<T> {
    parse(v).ok_or_else(|| bad(key, v))
}

fn list<T>(key: &str, v: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<&str> = v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(bad(key, v));
    }
    items.into_iter().map(item).collect()
}

/// `a, b; c, d`.
fn matrix(v: &str) -> Result<[[f64; 2]; 2]> {
    let rows: Vec<Vec<f64>> = v
        .split(';')
        .map(|row| row.split(',').map(|x| num("matrix", x.trim())).collect())
        .collect::<Result<_>>()?;
    match rows.as_slice() {
        [r0, r1] if r0.len() == 2 && r1.len() == 2 => Ok([[r0[0], r0[1]], [r1[0], r1[1]]]),
        _ => Err(bad("matrix", v)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
[experiment]
delta = 0.5
sweep = 0.25, 0.5, 1.0
approaches = DBS
techniques = RW, BFS
characteristics = depth
repetitions = 3
master_seed = 99

[output]
dir = results

[network cp]
kind = kronecker
matrix = 0.9, 0.5; 0.5, 0.3
iterations = 10
edges = 1800
beta = 0.1

[network ff]
kind = forest_fire
forward = 0.12
backward = 0.1
nodes = 500
beta = 0.5

[network hierarchical]
scale = 9

[network blog]
kind = file
path = blog.txt
directed = false
beta = 0.05
";

    #[test]
    fn parses_all_sections() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.sweep, vec![0.25, 0.5, 1.0]);
        assert_eq!(cfg.approaches, vec![Approach::Dbs]);
        assert_eq!(cfg.techniques, vec![Technique::Rw, Technique::Bfs]);
        assert_eq!(cfg.characteristics, vec![Characteristic::Depth]);
        assert_eq!(cfg.repetitions, 3);
        assert_eq!(cfg.master_seed, 99);
        assert_eq!(cfg.output.csv_path(), PathBuf::from("results/accuracy.csv"));
        assert_eq!(cfg.networks.len(), 4);
        let NetworkSource::Generated(NetworkParams::Kronecker(k)) = &cfg.networks[0].source else {
            panic!()
        };
        assert_eq!(k.seed_matrix, [[0.9, 0.5], [0.5, 0.3]]);
        assert_eq!((k.iterations, k.target_edges), (10, 1800));
        assert_eq!(cfg.networks[2].beta, 0.5);
        let NetworkSource::Generated(NetworkParams::Kronecker(h)) = &cfg.networks[2].source else {
            panic!()
        };
        assert_eq!(h.iterations, 9);
        assert_eq!(
            cfg.networks[3].source,
            NetworkSource::File {
                path: "blog.txt".into(),
                directed: false
            }
        );
    }

    #[test]
    fn defaults() {
        let cfg = ExperimentConfig::parse("[network random]\n").unwrap();
        assert_eq!(cfg.repetitions, 30);
        assert_eq!(cfg.sweep.len(), 10);
        assert_eq!(cfg.delta, 0.5);
        assert_eq!(cfg.networks[0].beta, 0.5);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "[experiment]\nrepetitions = 0\n[network random]\n",
            "[experiment]\nsweep = 0.5, 0.2\n[network random]\n",
            "[experiment]\nsweep = 0.0, 0.2\n[network random]\n",
            "[experiment]\nbogus = 1\n[network random]\n",
            "[experiment]\n",
            "[network x]\nkind = kronecker\n",
            "[network random]\nmatrix = 1,2,3\n",
            "[network random]\n[network random]\n",
        ] {
            assert!(matches!(ExperimentConfig::parse(text), Err(Error::Config(_))), "{text}");
        }
    }
}
