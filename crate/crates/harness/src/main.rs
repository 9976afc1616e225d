use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rcm_core::events::EventPredicate;
use rcm_core::exact::{event_probabilities, partition_function, two_point};
use rcm_core::lattice::{parse_coord, BoundaryKind, BoundaryPartition, FiniteGraph};
use rcm_core::loops::{
    contour_integral, cr_residual, elementary_contour, full_vertices, observable_fields_at, sample_observable, vertex_sum_check,
    vertex_sum_functional, DobrushinDomain,
};
use rcm_core::mc::{BurnIn, RunConfig, Sampler};
use rcm_core::ModelParams;
use rcmlab::config::parse_config_text;
use rcmlab::{emit_report, parse_graph_spec, run_experiment, write_report, Error, Experiment, ExperimentConfig, Result};

#[derive(Parser)]
#[command(name = "rcmlab", version, about = "Random-cluster model laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    #[command(name = "decay_free", about = "Free-boundary one-arm probability across sizes")]
    DecayFree(ExperimentArgs),
    #[command(name = "crossing_free", about = "Crossing of [0, αn] x [0, n] with its own boundary condition")]
    CrossingFree(ExperimentArgs),
    #[command(name = "annulus", about = "Open circuit around Λ_n inside Λ_2n")]
    Annulus(ExperimentArgs),
    #[command(name = "crossing_uniform", about = "Crossing with the boundary at distance n")]
    CrossingUniform(ExperimentArgs),
    #[command(name = "spiral_decay", about = "Two-point function across sheets of the cover box")]
    SpiralDecay(ExperimentArgs),
    #[command(name = "susceptibility", about = "Sum of the two-point function over Λ_n")]
    Susceptibility(ExperimentArgs),
    /// Exact enumeration on small graphs.
    #[command(subcommand)]
    Exact(ExactCommand),
    /// Parafermionic observable on a rectangular Dobrushin domain.
    Observable(ObservableArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// Flat `key = value` file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// Comma-separated, increasing.
    #[arg(long)]
    sizes: Option<String>,
    /// free, wired, dobrushin or mixed.
    #[arg(long)]
    bc: Option<String>,
    /// heatbath, chayes_machta, swendsen_wang or auto.
    #[arg(long)]
    sampler: Option<String>,
    #[arg(long)]
    sweeps: Option<u64>,
    /// Sweep count or `auto`.
    #[arg(long)]
    burnin: Option<String>,
    #[arg(long)]
    batches: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    ratio: Option<u32>,
    #[arg(long)]
    ks: Option<String>,
    #[arg(long)]
    height: Option<u32>,
    /// exact or mc.
    #[arg(long)]
    mode: Option<String>,
}

impl ExperimentArgs {
    fn into_config(self, experiment: Experiment) -> Result<ExperimentConfig> {
        let mut map = match &self.config {
            Some(path) => parse_config_text(&std::fs::read_to_string(path)?)?,
            None => BTreeMap::new(),
        };
        map.insert("experiment".into(), experiment.name().into());
        let mut set = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                map.insert(k.to_string(), v);
            }
        };
        let show = |v: Option<f64>| v.map(|x| x.to_string());
        set("q", show(self.q));
        set("p", show(self.p));
        set("sizes", self.sizes);
        set("bc", self.bc);
        set("sampler", self.sampler);
        set("sweeps", self.sweeps.map(|x| x.to_string()));
        set("burnin", self.burnin);
        set("batches", self.batches.map(|x| x.to_string()));
        set("seed", self.seed.map(|x| x.to_string()));
        set("out", self.out.map(|p| p.display().to_string()));
        set("alpha", show(self.alpha));
        set("ratio", self.ratio.map(|x| x.to_string()));
        set("ks", self.ks);
        set("height", self.height.map(|x| x.to_string()));
        set("mode", self.mode);
        ExperimentConfig::from_map(&map)
    }
}

#[derive(Args)]
struct ModelArgs {
    /// box:N, rect:X0,Y0,X1,Y1, path:L, cover:N,H or a graph file.
    #[arg(long)]
    graph: String,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    /// Defaults to the self-dual point.
    #[arg(long)]
    p: Option<f64>,
    /// Defaults to the partition stored in a graph file, else free.
    #[arg(long)]
    bc: Option<String>,
}

impl ModelArgs {
    fn resolve(&self) -> Result<(FiniteGraph, BoundaryPartition, ModelParams)> {
        let (g, stored) = parse_graph_spec(&self.graph)?;
        let xi = match (&self.bc, stored) {
            (Some(bc), _) => BoundaryPartition::standard(&g, BoundaryKind::from_name(bc)?)?,
            (None, Some(xi)) => xi,
            (None, None) => BoundaryPartition::free(&g),
        };
        let params = match self.p {
            Some(p) => ModelParams::new(p, self.q)?,
            None => ModelParams::critical(self.q)?,
        };
        Ok((g, xi, params))
    }
}

#[derive(Subcommand)]
enum ExactCommand {
    /// Partition function.
    Partition(ModelArgs),
    /// Probabilities of events given by id, e.g. `Ch:0,0:2,1`.
    Events {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "event", required = true)]
        events: Vec<String>,
    },
    /// Connection probability of two vertices.
    TwoPoint {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
}

#[derive(Args)]
struct ObservableArgs {
    /// X0,Y0,X1,Y1
    #[arg(long, allow_hyphen_values = true)]
    rect: String,
    /// Wired lattice points, `x,y;x,y;...`.
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    wired: String,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long)]
    p: Option<f64>,
    /// exact or mc.
    #[arg(long, default_value = "exact")]
    mode: String,
    #[arg(long, default_value_t = 100_000)]
    sweeps: u64,
    #[arg(long, default_value = "auto")]
    burnin: String,
    #[arg(long, default_value_t = 20)]
    batches: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    sampler: Option<String>,
    /// Field CSV; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn ints(s: &str) -> Result<Vec<i32>> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| Error::Config(format!("bad integer list `{s}`"))))
        .collect()
}

fn vertex(g: &FiniteGraph, s: &str) -> Result<usize> {
    let c = parse_coord(s)?;
    g.vertex_at(c).ok_or_else(|| Error::Config(format!("no vertex at `{s}`")))
}

/// Rounding bound for an exact value: each weight is a product of at most
/// `|E| + |V|` factors, and normalising doubles that.
fn rounding_bound(g: &FiniteGraph, value: f64) -> f64 {
    (2 * (g.num_edges() + g.num_vertices()) + 4) as f64 * f64::EPSILON * value.abs()
}

fn run_exact(cmd: ExactCommand) -> Result<()> {
    let model = match &cmd {
        ExactCommand::Partition(model) | ExactCommand::Events { model, .. } | ExactCommand::TwoPoint { model, .. } => model,
    };
    let (g, xi, params) = model.resolve()?;
    let rows: Vec<(String, f64)> = match &cmd {
        ExactCommand::Partition(_) => vec![("Z".to_string(), partition_function(&g, params, &xi)?)],
        ExactCommand::Events { events, .. } => {
            let preds = events
                .iter()
                .map(|id| EventPredicate::parse(id, &g))
                .collect::<rcm_core::Result<Vec<_>>>()?;
            let probs = event_probabilities(&g, params, &xi, &preds)?;
            preds.iter().map(|ev| ev.id().to_string()).zip(probs).collect()
        }
        ExactCommand::TwoPoint { x, y, .. } => {
            let (a, b) = (vertex(&g, x)?, vertex(&g, y)?);
            vec![(format!("two_point:{x}:{y}"), two_point(&g, params, &xi, a, b)?)]
        }
    };
    let mut out = csv::Writer::from_writer(std::io::stdout().lock());
    out.write_record(["quantity", "graph", "q", "p", "bc", "value", "abs_err"])?;
    for (quantity, value) in rows {
        out.write_record([
            quantity,
            model.graph.clone(),
            format!("{:?}", params.q()),
            format!("{:?}", params.p()),
            xi.kind().name().to_string(),
            format!("{value:?}"),
            format!("{:e}", rounding_bound(&g, value)),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn run_observable(args: ObservableArgs) -> Result<()> {
    let [x0, y0, x1, y1] = ints(&args.rect)?[..] else {
        return Err(Error::Config("--rect needs four integers".into()));
    };
    let wired = args
        .wired
        .split(';')
        .map(|pt| match ints(pt)?[..] {
            [x, y] => Ok((x, y)),
            _ => Err(Error::Config(format!("bad wired point `{pt}`"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let d = DobrushinDomain::rectangle(x0, y0, x1, y1, &wired)?;
    let params = match args.p {
        Some(p) => ModelParams::new(p, args.q)?,
        None => ModelParams::critical(args.q)?,
    };
    let full = full_vertices(&d);
    let field = match args.mode.as_str() {
        "exact" => {
            let (f, f_hat) = observable_fields_at(&d, params)?;
            let mut worst = 0.0f64;
            for &m in &full {
                worst = worst.max(contour_integral(&d, &f, &elementary_contour(m))?.norm());
                worst = worst.max(cr_residual(&d, &f, m)?.norm());
                worst = worst.max(vertex_sum_check(&d, &f_hat, &[m])?.norm());
            }
            eprintln!("full vertices: {}, max residual: {worst:e}", full.len());
            f
        }
        "mc" => {
            let burn_in = if args.burnin == "auto" {
                BurnIn::Auto
            } else {
                BurnIn::Sweeps(args.burnin.parse().map_err(|_| Error::Config("bad --burnin".into()))?)
            };
            let sampler = match &args.sampler {
                Some(s) => Sampler::from_name(s)?,
                None => Sampler::HeatBath,
            };
            let cfg = RunConfig::new(sampler, args.sweeps, burn_in, args.batches);
            let functionals = full
                .iter()
                .map(|&m| vertex_sum_functional(&d, &[m]))
                .collect::<rcm_core::Result<Vec<_>>>()?;
            let sampled = sample_observable(&d, params, &cfg, args.seed, &functionals)?;
            let worst = sampled
                .functionals
                .iter()
                .flat_map(|(re, im)| [re.z_score(0.0), im.z_score(0.0)])
                .fold(0.0, f64::max);
            eprintln!("full vertices: {}, max |z| of vertex sums: {worst:.2}", full.len());
            sampled.f
        }
        other => return Err(Error::Config(format!("unknown mode `{other}`"))),
    };
    match args.out {
        Some(path) => field.write_csv(std::fs::File::create(path)?)?,
        None => field.write_csv(std::io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let (experiment, args) = match cli.command {
        Command::Exact(cmd) => return run_exact(cmd),
        Command::Observable(args) => return run_observable(args),
        Command::DecayFree(a) => (Experiment::DecayFree, a),
        Command::CrossingFree(a) => (Experiment::CrossingFree, a),
        Command::Annulus(a) => (Experiment::Annulus, a),
        Command::CrossingUniform(a) => (Experiment::CrossingUniform, a),
        Command::SpiralDecay(a) => (Experiment::SpiralDecay, a),
        Command::Susceptibility(a) => (Experiment::Susceptibility, a),
    };
    let cfg = args.into_config(experiment)?;
    let report = run_experiment(&cfg)?;
    match &cfg.out {
        Some(path) => emit_report(&report, path),
        None => write_report(&report, std::io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rcmlab: {e}");
            ExitCode::FAILURE
        }
    }
}
