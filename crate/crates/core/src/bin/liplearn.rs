use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use liplearn::amle::{solve_amle, SolveReport};
use liplearn::experiments::{
    fit_rate, fit_rate_against_resolution, read_records, run_convergence_study, star_labels, StudyConfig,
};
use liplearn::geometry::{
    build_constraint_set, estimate_resolution, resolution_grid_error, sample_uniform, ConstraintMode, DomainSpec,
    GeodesicOracle, OracleParams,
};
use liplearn::graph::build_graph;
use liplearn::io;
use liplearn::kernel::KernelProfile;
use liplearn::nonlocal::max_ball_check;
use liplearn::shortest_path::graph_distance_from;
use liplearn::{Error, Result};

#[derive(Parser)]
#[command(name = "liplearn", version, about = "Lipschitz learning on random geometric graphs")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Labels {
    None,
    /// Closest points to the four star tips, valued by the Aronsson function.
    Star,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitAxis {
    N,
    Delta,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived constants of a kernel.
    KernelInfo {
        #[arg(long, default_value = "constant")]
        kernel: KernelProfile,
    },
    /// Sample a uniform point cloud.
    Sample {
        #[arg(long)]
        domain: DomainSpec,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "none")]
        labels: Labels,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the weighted graph of a cloud; labels carried by the cloud are
    /// written to `--labels-out`.
    Graph {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long, default_value = "constant")]
        kernel: KernelProfile,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        labels_out: Option<PathBuf>,
    },
    /// Graph distance from one vertex.
    Cones {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        source: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the graph infinity-Laplace equation.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the output path with a `.json` extension.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Nonlocal sub/supersolution check of a solved graph function.
    NonlocalCheck {
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        cloud: PathBuf,
        /// Graph whose sidecar supplies the bandwidth and kernel.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        domain: DomainSpec,
        #[arg(long)]
        eps: f64,
        /// Resolution; estimated from the cloud when omitted.
        #[arg(long)]
        delta: Option<f64>,
        /// Spacing of the evaluation grid; defaults to `eps`.
        #[arg(long)]
        grid_spacing: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a convergence study from a JSON config.
    Study {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a log-log rate to study results.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "n")]
        against: FitAxis,
    },
}

#[derive(Serialize)]
struct SolveSummary {
    iterations: usize,
    residual: f64,
    converged: bool,
    wall_time: f64,
}

impl From<&SolveReport> for SolveSummary {
    fn from(r: &SolveReport) -> Self {
        Self { iterations: r.iterations, residual: r.final_residual, converged: r.converged, wall_time: r.wall_time }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::KernelInfo { kernel } => {
            println!("kernel,sigma_eta,t_zero,tau_eta");
            println!("{kernel},{},{},{}", kernel.sigma_eta(), kernel.t_zero(), kernel.tau_eta());
        }
        Command::Sample { domain, n, seed, labels, out } => {
            let cloud = sample_uniform(&domain.build()?, n, seed)?;
            let label_set = match labels {
                Labels::None => None,
                Labels::Star => {
                    Some(build_constraint_set(&cloud, &star_labels(), ConstraintMode::ClosestPoint, 0.0, None)?)
                }
            };
            io::write_cloud(&out, &cloud, label_set.as_ref())?;
        }
        Command::Graph { cloud, kernel, h, out, labels_out } => {
            let (points, labels) = io::read_cloud(&cloud)?;
            let graph = build_graph(&points, &kernel, h)?;
            let (min, mean, max) = graph.degree_stats();
            log::info!("{} vertices, {} edges, degree {min}/{mean:.1}/{max}", graph.len(), graph.edge_count());
            io::write_graph(&out, &graph, None)?;
            match (labels_out, labels) {
                (Some(path), Some(l)) => io::write_labels(&path, &l)?,
                (Some(_), None) => return Err(Error::Empty("labels in the cloud file".into())),
                _ => {}
            }
        }
        Command::Cones { graph, source, out } => {
            let (graph, _) = io::read_graph(&graph)?;
            io::write_distances(&out, &graph_distance_from(&graph, source)?)?;
        }
        Command::Solve { graph, labels, tol, max_iter, out, report } => {
            let (graph, _) = io::read_graph(&graph)?;
            let labels = io::read_labels(&labels)?;
            let (u, rep) = solve_amle(&graph, &labels, tol, max_iter)?;
            if !rep.converged {
                log::warn!("not converged after {} sweeps (residual {:.3e})", rep.iterations, rep.final_residual);
            }
            io::write_function(&out, &u)?;
            let report = report.unwrap_or_else(|| out.with_extension("json"));
            io::write_json(&report, &SolveSummary::from(&rep))?;
        }
        Command::NonlocalCheck { u, cloud, graph, domain, eps, delta, grid_spacing, out } => {
            let u = io::read_function(&u)?;
            let (points, labels) = io::read_cloud(&cloud)?;
            let (graph, _) = io::read_graph(&graph)?;
            let domain = domain.build()?;
            let labels = labels.ok_or_else(|| Error::Empty("labels in the cloud file".into()))?;
            let continuum: Vec<Vec<f64>> = labels.indices.iter().map(|&i| points.point(i).to_vec()).collect();
            let delta = match delta {
                Some(d) => d,
                None => {
                    let spacing = eps / 20.0;
                    estimate_resolution(&points, &domain, spacing, None)? + resolution_grid_error(spacing, domain.dim())
                }
            };
            let oracle = GeodesicOracle::new(&domain, OracleParams::default())?;
            let report = max_ball_check(&u, &points, &graph, &oracle, eps, delta, &continuum, grid_spacing.unwrap_or(eps))?;
            io::write_json(&out, &report)?;
        }
        Command::Study { config, out } => {
            let mut config = StudyConfig::from_json_file(&config)?;
            if out.is_some() {
                config.output = out;
            }
            let records = run_convergence_study(&config)?;
            let flagged = records.iter().filter(|r| !r.is_valid()).count();
            if flagged > 0 {
                log::warn!("{flagged} trial(s) flagged as disconnected");
            }
            if config.output.is_none() {
                let mut w = csv::Writer::from_writer(std::io::stdout());
                for r in &records {
                    w.serialize(r)?;
                }
                w.flush()?;
            }
        }
        Command::Fit { input, against } => {
            let records = read_records(&input)?;
            let fit = match against {
                FitAxis::N => fit_rate(&records)?,
                FitAxis::Delta => fit_rate_against_resolution(&records)?,
            };
            println!("slope,intercept,r2");
            println!("{},{},{}", fit.slope, fit.intercept, fit.r_squared);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
