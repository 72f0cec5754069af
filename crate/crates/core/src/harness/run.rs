use std::fs::File;
use std::io::BufReader;
use std::sync::Arc;

use rand::SeedableRng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, NetworkSource, NetworkSpec};
use crate::characteristics::{evaluate, Characteristic};
use crate::diffusion::{grow_diffusion_network, DiffusionConfig, DiffusionNetwork};
use crate::error::{Error, Result};
use crate::graph::{graph_stats, load_edge_list, Graph, GraphStats};
use crate::sampling::{sample, Approach, SampleSpec, Technique};
use crate::SimRng;

const TAG_GENERATE: u64 = 1;
const TAG_DIFFUSE: u64 = 2;
const TAG_SAMPLE: u64 = 3;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `parts` into `master`. Equal inputs give equal seeds and any change
/// in one part scrambles the result.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix(master), |acc, &p| mix(acc ^ mix(p)))
}

/// FNV-1a, so stream seeds follow a network's name rather than its position
/// in the config.
fn name_key(name: &str) -> u64 {
    name.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn approach_key(a: Approach) -> u64 {
    Approach::ALL.iter().position(|&x| x == a).unwrap() as u64
}

fn technique_key(t: Technique) -> u64 {
    Technique::ALL.iter().position(|&x| x == t).unwrap() as u64
}

/// Seed for the sampler of one cell. Depends on the network name, the
/// repetition, the approach, the technique and the exact rate, not on which
/// other cells the config asks for.
pub fn cell_seed(master: u64, network: &str, run: usize, approach: Approach, technique: Technique, mu: f64) -> u64 {
    derive_seed(
        master,
        &[
            TAG_SAMPLE,
            name_key(network),
            run as u64,
            approach_key(approach),
            technique_key(technique),
            mu.to_bits(),
        ],
    )
}

pub fn diffusion_seed(master: u64, network: &str, run: usize) -> u64 {
    derive_seed(master, &[TAG_DIFFUSE, name_key(network), run as u64])
}

pub fn generator_seed(master: u64, net: &NetworkSpec) -> u64 {
    net.generator_seed
        .unwrap_or_else(|| derive_seed(master, &[TAG_GENERATE, name_key(&net.name)]))
}

/// Generates or loads the underlying network of `net`.
pub fn obtain_network(net: &NetworkSpec, master: u64) -> Result<Graph> {
    match &net.source {
        NetworkSource::Generated(params) => {
            let mut rng = SimRng::seed_from_u64(generator_seed(master, net));
            params.generate(&mut rng)
        }
        NetworkSource::File { path, directed } => {
            let file = File::open(path)?;
            Ok(load_edge_list(BufReader::new(file), *directed)?.graph)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub network: String,
    pub approach: Approach,
    pub technique: Technique,
    pub characteristic: Characteristic,
    pub mu: f64,
    pub run: usize,
    /// `None` when the accuracy is undefined; the reason is in `flags`.
    pub lambda: Option<f64>,
    pub flags: Vec<String>,
}

impl ReportRow {
    /// Value of the `budget=` flag.
    pub fn budget(&self) -> Option<usize> {
        self.flags
            .iter()
            .find_map(|f| f.strip_prefix("budget="))
            .and_then(|b| b.parse().ok())
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }
}

/// Per-network facts gathered while running an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkRecord {
    pub name: String,
    pub beta: f64,
    pub stats: GraphStats<f64>,
    /// Achieved coverage of each diffusion network built, in run order.
    pub coverage: Vec<f64>,
    pub partial_runs: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AccuracyReport {
    /// Sorted by (network, approach, technique, characteristic, mu, run).
    pub rows: Vec<ReportRow>,
    pub networks: Vec<NetworkRecord>,
}

impl AccuracyReport {
    pub fn from_rows(mut rows: Vec<ReportRow>) -> Self {
        sort_rows(&mut rows);
        AccuracyReport {
            rows,
            networks: Vec::new(),
        }
    }

    /// Mean of the defined accuracies among rows matching `keep`.
    pub fn mean_where(&self, keep: impl Fn(&ReportRow) -> bool) -> Option<f64> {
        mean(self.rows.iter().filter(|r| keep(r)).filter_map(|r| r.lambda))
    }

    /// Mean accuracy per (approach, technique, characteristic, mu), pooled
    /// over networks and runs.
    pub fn aggregates(&self) -> Vec<Aggregate> {
        let mut keyed: Vec<(&ReportRow, (usize, usize, usize, u64))> = self
            .rows
            .iter()
            .map(|r| {
                (
                    r,
                    (
                        approach_key(r.approach) as usize,
                        technique_key(r.technique) as usize,
                        Characteristic::ALL.iter().position(|&c| c == r.characteristic).unwrap(),
                        r.mu.to_bits(),
                    ),
                )
            })
            .collect();
        keyed.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.mu.total_cmp(&b.0.mu)));
        let mut out = Vec::new();
        for group in keyed.chunk_by(|a, b| a.1 == b.1) {
            let r = group[0].0;
            let values: Vec<f64> = group.iter().filter_map(|(row, _)| row.lambda).collect();
            out.push(Aggregate {
                approach: r.approach,
                technique: r.technique,
                characteristic: r.characteristic,
                mu: r.mu,
                rows: group.len(),
                mean: mean(values.iter().copied()),
                stderr: stderr(&values),
            });
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub approach: Approach,
    pub technique: Technique,
    pub characteristic: Characteristic,
    pub mu: f64,
    pub rows: usize,
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
}

pub(crate) fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Standard error of the mean; 0 for a single value.
pub(crate) fn stderr(values: &[f64]) -> Option<f64> {
    let n = values.len();
    let m = mean(values.iter().copied())?;
    if n == 1 {
        return Some(0.0);
    }
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    Some((var / n as f64).sqrt())
}

pub(crate) fn sort_rows(rows: &mut [ReportRow]) {
    rows.sort_by(|a, b| {
        a.network
            .cmp(&b.network)
            .then(a.approach.name().cmp(b.approach.name()))
            .then(a.technique.name().cmp(b.technique.name()))
            .then(a.characteristic.name().cmp(b.characteristic.name()))
            .then(a.mu.total_cmp(&b.mu))
            .then(a.run.cmp(&b.run))
    });
}

/// Expected row count for `cfg`.
pub fn expected_rows(cfg: &ExperimentConfig) -> usize {
    cfg.networks.len()
        * cfg.sweep.len()
        * cfg.approaches.len()
        * cfg.techniques.len()
        * cfg.characteristics.len()
        * cfg.repetitions
}

/// Runs every (network, approach, technique, mu, run) cell and evaluates
/// every requested characteristic on each sample.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AccuracyReport> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| run_in_pool(cfg))
}

fn run_in_pool(cfg: &ExperimentConfig) -> Result<AccuracyReport> {
    let graphs: Vec<Arc<Graph>> = cfg
        .networks
        .par_iter()
        .map(|net| obtain_network(net, cfg.master_seed).map(Arc::new))
        .collect::<Result<_>>()?;

    let diffusion_runs = if cfg.resample_diffusion { cfg.repetitions } else { 1 };
    let blocks: Vec<(usize, usize)> = (0..cfg.networks.len())
        .flat_map(|ni| (0..diffusion_runs).map(move |r| (ni, r)))
        .collect();
    let diffusions: Vec<DiffusionNetwork> = blocks
        .par_iter()
        .map(|&(ni, r)| {
            let net = &cfg.networks[ni];
            let dcfg = DiffusionConfig {
                max_cascades: cfg.max_cascades,
                ..DiffusionConfig::new(net.beta, cfg.delta)
            };
            let mut rng = SimRng::seed_from_u64(diffusion_seed(cfg.master_seed, &net.name, r));
            let dn = grow_diffusion_network(graphs[ni].clone(), &dcfg, &mut rng)?;
            if !dn.reached_target() && !cfg.allow_partial_coverage {
                return Err(Error::PartialCoverage {
                    achieved: dn.coverage(),
                    target: cfg.delta,
                    cascades: dn.cascades_drawn(),
                });
            }
            Ok(dn)
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for ni in 0..cfg.networks.len() {
        for run in 0..cfg.repetitions {
            for &approach in &cfg.approaches {
                for &technique in &cfg.techniques {
                    for &mu in &cfg.sweep {
                        cells.push((ni, run, approach, technique, mu));
                    }
                }
            }
        }
    }
    let mut rows: Vec<ReportRow> = cells
        .par_iter()
        .flat_map_iter(|&(ni, run, approach, technique, mu)| {
            let block = ni * diffusion_runs + if cfg.resample_diffusion { run } else { 0 };
            run_cell(cfg, &cfg.networks[ni].name, &diffusions[block], run, approach, technique, mu)
        })
        .collect();
    sort_rows(&mut rows);

    let networks = cfg
        .networks
        .iter()
        .enumerate()
        .map(|(ni, net)| {
            let dns = &diffusions[ni * diffusion_runs..(ni + 1) * diffusion_runs];
            NetworkRecord {
                name: net.name.clone(),
                beta: net.beta,
                stats: graph_stats(&graphs[ni]),
                coverage: dns.iter().map(DiffusionNetwork::coverage).collect(),
                partial_runs: dns.iter().filter(|d| !d.reached_target()).count(),
            }
        })
        .collect();
    Ok(AccuracyReport { rows, networks })
}

fn run_cell(
    cfg: &ExperimentConfig,
    network: &str,
    dn: &DiffusionNetwork,
    run: usize,
    approach: Approach,
    technique: Technique,
    mu: f64,
) -> Vec<ReportRow> {
    let seed = cell_seed(cfg.master_seed, network, run, approach, technique, mu);
    let spec = SampleSpec {
        rw_restart: cfg.rw_restart,
        keep_crawled_nodes: cfg.keep_crawled_nodes,
        ..SampleSpec::new(approach, technique, mu, seed)
    };
    let mut common = Vec::new();
    let sampled = sample(dn, &spec, &mut spec.rng());
    match &sampled {
        Ok(s) => {
            common.push(format!("budget={}", s.budget));
            if s.exhausted {
                common.push("exhausted".into());
            }
        }
        Err(_) => common.push("sample_failed".into()),
    }
    if !dn.reached_target() {
        common.push("partial_coverage".into());
    }
    cfg.characteristics
        .iter()
        .map(|&characteristic| {
            let mut flags = common.clone();
            let lambda = match &sampled {
                Ok(s) => {
                    let result = evaluate::<f64>(dn, s, characteristic, cfg.seed_labeling);
                    if let Some(why) = result.undefined {
                        flags.push(format!("undefined:{}", why.name()));
                    }
                    result.accuracy
                }
                Err(_) => None,
            };
            ReportRow {
                network: network.to_owned(),
                approach,
                technique,
                characteristic,
                mu,
                run,
                lambda,
                flags,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_per_part() {
        let base = cell_seed(1, "a", 0, Approach::Sbs, Technique::Bfs, 0.5);
        assert_eq!(base, cell_seed(1, "a", 0, Approach::Sbs, Technique::Bfs, 0.5));
        for other in [
            cell_seed(2, "a", 0, Approach::Sbs, Technique::Bfs, 0.5),
            cell_seed(1, "b", 0, Approach::Sbs, Technique::Bfs, 0.5),
            cell_seed(1, "a", 1, Approach::Sbs, Technique::Bfs, 0.5),
            cell_seed(1, "a", 0, Approach::Dbs, Technique::Bfs, 0.5),
            cell_seed(1, "a", 0, Approach::Sbs, Technique::Rw, 0.5),
            cell_seed(1, "a", 0, Approach::Sbs, Technique::Bfs, 0.6),
        ] {
            assert_ne!(base, other);
        }
    }

    #[test]
    fn stderr_matches_hand_computation() {
        assert_eq!(stderr(&[0.7]), Some(0.0));
        assert_eq!(stderr(&[]), None);
        // Sample variance of {1, 2, 3} is 1.
        let se = stderr(&[1.0, 2.0, 3.0]).unwrap();
        assert!((se - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
