use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;

use diffsamp::diffusion::{grow_diffusion_network, read_cascades, write_cascades, DiffusionConfig, DiffusionNetwork};
use diffsamp::generators::{ForestFireParams, KroneckerParams, NetworkParams, Preset};
use diffsamp::graph::{load_edge_list, write_edge_list, write_edges, Graph};
use diffsamp::harness::{
    generator_seed, obtain_network, run_and_write, ExperimentConfig, NetworkSource, NetworkSpec,
};
use diffsamp::sampling::{read_sample_metadata, sample, write_sample_metadata, SampleSpec, SampledNetwork};
use diffsamp::{evaluate, Approach, Characteristic, Error, Result, SeedLabeling, SimRng, Technique};

#[derive(Parser)]
#[command(name = "diffsamp", version, about = "Sample diffusion networks and score the samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate underlying networks as edge-list files.
    Generate(GenerateArgs),
    /// Spread cascades over a graph and write the diffusion network.
    Diffuse(DiffuseArgs),
    /// Draw one sample from a diffusion network.
    Sample(SampleArgs),
    /// Score a sample against its diffusion network.
    Measure(MeasureArgs),
    /// Run a full sweep from a config file.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorKind {
    Kronecker,
    ForestFire,
}

#[derive(Args)]
struct GenerateArgs {
    /// Named network; repeatable. Defaults to every preset.
    #[arg(long = "preset", value_parser = parse_preset)]
    presets: Vec<Preset>,
    /// Custom generator instead of presets.
    #[arg(long, conflicts_with = "presets")]
    kind: Option<GeneratorKind>,
    /// Output file stem for a custom generator.
    #[arg(long, default_value = "network")]
    name: String,
    /// Presets at 2^SCALE nodes.
    #[arg(long)]
    scale: Option<u32>,
    /// Kronecker seed matrix `a,b;c,d`.
    #[arg(long, default_value = "0.9,0.5;0.5,0.3")]
    matrix: String,
    #[arg(long, default_value_t = 10)]
    iterations: u32,
    #[arg(long, default_value_t = 1800)]
    edges: usize,
    #[arg(long, default_value_t = 0.12)]
    forward: f64,
    #[arg(long, default_value_t = 0.1)]
    backward: f64,
    #[arg(long, default_value_t = 1)]
    ambassadors: usize,
    #[arg(long, default_value_t = 1000)]
    nodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct GraphInput {
    /// Edge-list file of the underlying network.
    #[arg(long)]
    graph: PathBuf,
    /// Read each line as an undirected edge.
    #[arg(long)]
    undirected: bool,
}

#[derive(Args)]
struct DiffuseArgs {
    #[command(flatten)]
    input: GraphInput,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long)]
    max_cascades: Option<usize>,
    /// Write the result even when coverage stays below delta.
    #[arg(long)]
    allow_partial_coverage: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct DiffusionInput {
    #[command(flatten)]
    input: GraphInput,
    /// Cascade file written by `diffuse`.
    #[arg(long)]
    cascades: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    diffusion: DiffusionInput,
    #[arg(long, value_parser = parse_approach)]
    approach: Approach,
    #[arg(long, value_parser = parse_technique)]
    technique: Technique,
    #[arg(long)]
    mu: f64,
    #[arg(long, default_value_t = diffsamp::sampling::DEFAULT_RW_RESTART)]
    rw_restart: f64,
    /// SBS: count crawled nodes without diffusion links as sampled nodes.
    #[arg(long)]
    keep_crawled_nodes: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct MeasureArgs {
    #[command(flatten)]
    diffusion: DiffusionInput,
    /// Sample edge list written by `sample`.
    #[arg(long)]
    sample: PathBuf,
    /// Sidecar written by `sample`; defaults to the sample path with a
    /// `.meta` extension.
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Repeatable; defaults to all three.
    #[arg(long = "characteristic", value_parser = parse_characteristic)]
    characteristics: Vec<Characteristic>,
    /// Label sample seeds by in-sample roots instead of true seeds.
    #[arg(long)]
    inferred_roots: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config; without it the four generated presets are run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    repetitions: Option<usize>,
    /// Comma-separated sampling rates.
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<f64>>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_approach)]
    approaches: Option<Vec<Approach>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_technique)]
    techniques: Option<Vec<Technique>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_characteristic)]
    characteristics: Option<Vec<Characteristic>>,
    #[arg(long)]
    allow_partial_coverage: bool,
    /// Build one diffusion network per network instead of one per run.
    #[arg(long)]
    single_diffusion: bool,
    /// Presets at 2^SCALE nodes when no config is given.
    #[arg(long)]
    scale: Option<u32>,
}

fn parse_preset(s: &str) -> std::result::Result<Preset, String> {
    Preset::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn parse_approach(s: &str) -> std::result::Result<Approach, String> {
    Approach::parse(s).ok_or_else(|| "expected SBS or DBS".into())
}

fn parse_technique(s: &str) -> std::result::Result<Technique, String> {
    Technique::parse(s).ok_or_else(|| "expected BFS or RW".into())
}

fn parse_characteristic(s: &str) -> std::result::Result<Characteristic, String> {
    Characteristic::parse(s).ok_or_else(|| "expected seed, link_attendance or depth".into())
}

fn parse_matrix(s: &str) -> Result<[[f64; 2]; 2]> {
    let bad = || Error::InvalidParameter(format!("matrix must read a,b;c,d, got {s:?}"));
    let v: Vec<f64> = s
        .split([',', ';'])
        .map(|x| x.trim().parse().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    match v[..] {
        [a, b, c, d] => Ok([[a, b], [c, d]]),
        _ => Err(bad()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn load_graph(input: &GraphInput) -> Result<Graph> {
    let file = File::open(&input.graph)?;
    let loaded = load_edge_list(BufReader::new(file), !input.undirected)?;
    if loaded.report.duplicates + loaded.report.self_loops > 0 {
        eprintln!(
            "note: dropped {} duplicate edges and {} self-loops",
            loaded.report.duplicates, loaded.report.self_loops
        );
    }
    Ok(loaded.graph)
}

fn load_diffusion(d: &DiffusionInput) -> Result<DiffusionNetwork> {
    let g = Arc::new(load_graph(&d.input)?);
    let file = read_cascades(BufReader::new(File::open(&d.cascades)?))?;
    let drawn = file.cascades_drawn.unwrap_or(file.cascades.len());
    DiffusionNetwork::from_cascades(g, file.cascades, drawn)
}

fn generate(a: GenerateArgs) -> Result<()> {
    let specs: Vec<NetworkSpec> = match a.kind {
        Some(kind) => {
            let params = match kind {
                GeneratorKind::Kronecker => NetworkParams::Kronecker(KroneckerParams::new(
                    parse_matrix(&a.matrix)?,
                    a.iterations,
                    a.edges,
                )),
                GeneratorKind::ForestFire => NetworkParams::ForestFire(ForestFireParams::new(
                    a.forward,
                    a.backward,
                    a.ambassadors,
                    a.nodes,
                )),
            };
            vec![NetworkSpec {
                name: a.name.clone(),
                source: NetworkSource::Generated(params),
                beta: 0.5,
                generator_seed: None,
            }]
        }
        None => {
            let presets = if a.presets.is_empty() { Preset::ALL.to_vec() } else { a.presets };
            presets
                .into_iter()
                .map(|p| match a.scale {
                    Some(k) => NetworkSpec::scaled_preset(p, k),
                    None => NetworkSpec::preset(p),
                })
                .collect()
        }
    };
    println!("name\tnodes\tedges\tdensification\tseed");
    for spec in specs {
        let g = obtain_network(&spec, a.seed)?;
        let path = a.out.join(format!("{}.edges", spec.name));
        write_edge_list(&g, create(&path)?)?;
        let dens = g
            .densification_exponent::<f64>()
            .map_or_else(|_| "n/a".into(), |d| format!("{d:.4}"));
        println!(
            "{}\t{}\t{}\t{}\t{}",
            spec.name,
            g.node_count(),
            g.edge_count(),
            dens,
            generator_seed(a.seed, &spec)
        );
    }
    Ok(())
}

fn diffuse(a: DiffuseArgs) -> Result<()> {
    let g = Arc::new(load_graph(&a.input)?);
    let cfg = DiffusionConfig {
        max_cascades: a.max_cascades,
        ..DiffusionConfig::new(a.beta, a.delta)
    };
    let mut rng = SimRng::seed_from_u64(a.seed);
    let dn = grow_diffusion_network(g, &cfg, &mut rng)?;
    let partial = !dn.reached_target();
    if partial && !a.allow_partial_coverage {
        return Err(Error::PartialCoverage {
            achieved: dn.coverage(),
            target: a.delta,
            cascades: dn.cascades_drawn(),
        });
    }
    // Ids in the outputs refer to this normalized copy of the input.
    write_edge_list(dn.source(), create(&a.out.join("underlying.edges"))?)?;
    write_edge_list(dn.graph(), create(&a.out.join("diffusion.edges"))?)?;
    write_cascades(&dn, create(&a.out.join("cascades.txt"))?)?;
    println!(
        "edges={} nodes={} cascades={} drawn={} coverage={:.6}{}",
        dn.edge_count(),
        dn.nodes().len(),
        dn.cascades().len(),
        dn.cascades_drawn(),
        dn.coverage(),
        if partial { " partial_coverage" } else { "" }
    );
    Ok(())
}

fn sample_cmd(a: SampleArgs) -> Result<()> {
    let dn = load_diffusion(&a.diffusion)?;
    let spec = SampleSpec {
        rw_restart: a.rw_restart,
        keep_crawled_nodes: a.keep_crawled_nodes,
        ..SampleSpec::new(a.approach, a.technique, a.mu, a.seed)
    };
    let s = sample(&dn, &spec, &mut spec.rng())?;
    write_edges(dn.source().node_count(), s.edges(), create(&a.out.join("sample.edges"))?)?;
    write_sample_metadata(&s, create(&a.out.join("sample.meta"))?)?;
    println!(
        "approach={} technique={} mu={} budget={} budget_used={} edges={} nodes={}",
        spec.approach,
        spec.technique,
        spec.mu,
        s.budget,
        s.budget_used,
        s.edges().len(),
        s.nodes().len()
    );
    Ok(())
}

fn measure(a: MeasureArgs) -> Result<()> {
    let dn = load_diffusion(&a.diffusion)?;
    let loaded = load_edge_list(BufReader::new(File::open(&a.sample)?), true)?;
    let meta_path = a.meta.clone().unwrap_or_else(|| a.sample.with_extension("meta"));
    let meta = read_sample_metadata(BufReader::new(File::open(&meta_path)?))?;
    let edges: Vec<_> = loaded.graph.edges().collect();
    if let Some(e) = edges.iter().find(|e| !dn.contains(**e)) {
        return Err(Error::Domain(format!("sample edge {} {} is not a diffusion link", e.src, e.dst)));
    }
    let s = SampledNetwork::from_edges(
        edges,
        std::iter::empty(),
        &meta.spec,
        meta.budget,
        meta.budget_used,
        meta.origin,
        meta.exhausted,
    );
    let labeling = if a.inferred_roots { SeedLabeling::InferredRoots } else { SeedLabeling::GroundTruth };
    let characteristics = if a.characteristics.is_empty() {
        Characteristic::ALL.to_vec()
    } else {
        a.characteristics
    };
    let fmt = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
    println!("characteristic,reference,sample,lambda,flags");
    for c in characteristics {
        let r = evaluate::<f64>(&dn, &s, c, labeling);
        let flag = r.undefined.map(|u| format!("undefined:{}", u.name())).unwrap_or_default();
        println!(
            "{},{},{},{},{}",
            c.name(),
            fmt(r.reference),
            fmt(r.sample),
            fmt(r.accuracy),
            flag
        );
    }
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig {
            networks: Preset::ALL
                .into_iter()
                .map(|p| match a.scale {
                    Some(k) => NetworkSpec::scaled_preset(p, k),
                    None => NetworkSpec::preset(p),
                })
                .collect(),
            ..ExperimentConfig::default()
        },
    };
    if let Some(v) = a.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = a.out {
        cfg.output.dir = v;
    }
    if let Some(v) = a.workers {
        cfg.workers = Some(v);
    }
    if let Some(v) = a.repetitions {
        cfg.repetitions = v;
    }
    if let Some(v) = a.sweep {
        cfg.sweep = v;
    }
    if let Some(v) = a.delta {
        cfg.delta = v;
    }
    if let Some(v) = a.approaches {
        cfg.approaches = v;
    }
    if let Some(v) = a.techniques {
        cfg.techniques = v;
    }
    if let Some(v) = a.characteristics {
        cfg.characteristics = v;
    }
    if a.allow_partial_coverage {
        cfg.allow_partial_coverage = true;
    }
    if a.single_diffusion {
        cfg.resample_diffusion = false;
    }
    cfg.validate()?;
    let (report, summary) = run_and_write(&cfg)?;
    for net in &report.networks {
        if net.partial_runs > 0 {
            eprintln!(
                "warning: {} reached coverage below delta in {} diffusion runs",
                net.name, net.partial_runs
            );
        }
    }
    let mut out = std::io::stdout().lock();
    writeln!(out, "{} rows -> {}", report.rows.len(), cfg.output.csv_path().display())?;
    write!(out, "{summary}")?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Diffuse(a) => diffuse(a),
        Command::Sample(a) => sample_cmd(a),
        Command::Measure(a) => measure(a),
        Command::Experiment(a) => experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
