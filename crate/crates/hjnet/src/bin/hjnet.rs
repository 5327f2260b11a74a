//! Command-line front end: solve networks, query edge maps and cycle fixed
//! points, report the distinguished vertex sets, run the vanishing-discount
//! layer, and self-test on synthetic instances.
//!
//! Exit codes: 0 success, 1 self-test failure, 2 validation error,
//! 3 numerical non-convergence. Errors go to stderr as JSON.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hjnet::aubry::{aubry_representation, detect_aubry};
use hjnet::dfe::{
    beta_cycle, check_subsolution, check_supersolution, rho_path, solve_dfe, synthetic, DfeOptions,
    DiscreteError, SweepOrder,
};
use hjnet::edge_map::EdgeMapTable;
use hjnet::eikonal::{eikonal_data, lambda_sweep, solve_eikonal_dfe, SweepConfig};
use hjnet::extension::{extend, verify_vertex_conditions};
use hjnet::graph::{GraphError, VertexId};
use hjnet::hamiltonian::HamiltonianError;
use hjnet::io::{self, fmt_sig, Network};
use hjnet::SolverError;

#[derive(Parser)]
#[command(
    name = "hjnet",
    version,
    about = "Discounted Hamilton-Jacobi equations on networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Solver tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Arc grid intervals override.
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    /// Seed for the selftest RNG.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Jacobi vertex sweeps instead of Gauss-Seidel.
    #[arg(long, global = true)]
    jacobi: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the discrete equation and extend it to every arc.
    Solve {
        network: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
        /// Output directory for U.json, arcs.csv, residuals.json.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Evaluate the edge map at alpha on one edge or along a path.
    Rho {
        network: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, conflicts_with = "path")]
        edge: Option<String>,
        /// Comma-separated oriented edge ids.
        #[arg(long, value_delimiter = ',')]
        path: Option<Vec<String>>,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Fixed point of a cycle, comma-separated oriented edge ids.
    Beta {
        network: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        cycle: Vec<String>,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Solve and report the distinguished vertex set with witnesses.
    Aubry {
        network: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Critical value, edge weights, distinguished set, and one solution of
    /// the limit equation for a trace file (JSON map vertex -> value).
    Eikonal {
        network: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Discounted solutions across a list of discount factors against the
    /// limit objects.
    Sweep {
        network: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
        #[arg(short, long)]
        output: PathBuf,
        /// Skip normalization: assert the critical value is already 0.
        #[arg(long)]
        assume_normalized: bool,
        /// Probe value for the per-edge gap diagnostics.
        #[arg(long)]
        probe: Option<f64>,
    },
    /// Random property suite on synthetic instances; needs no fixtures.
    Selftest {
        #[arg(long, default_value_t = 50)]
        cases: usize,
    },
}

enum AppError {
    Validation(String),
    Numerical(String),
}

impl AppError {
    fn emit(&self) -> ExitCode {
        let (kind, msg, code) = match self {
            AppError::Validation(m) => ("validation", m, 2),
            AppError::Numerical(m) => ("numerical", m, 3),
        };
        eprintln!("{}", serde_json::json!({ "error": msg, "kind": kind }));
        ExitCode::from(code)
    }
}

impl From<io::IoError> for AppError {
    fn from(e: io::IoError) -> Self {
        AppError::Validation(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Validation(e.to_string())
    }
}

impl From<GraphError> for AppError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::EnumerationCapExceeded(_) => AppError::Numerical(e.to_string()),
            _ => AppError::Validation(e.to_string()),
        }
    }
}

impl From<SolverError> for AppError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Hamiltonian(h) => h.into(),
            _ => AppError::Numerical(e.to_string()),
        }
    }
}

impl From<HamiltonianError> for AppError {
    fn from(e: HamiltonianError) -> Self {
        match e {
            HamiltonianError::NotCoercive(_) => AppError::Numerical(e.to_string()),
            _ => AppError::Validation(e.to_string()),
        }
    }
}

impl From<DiscreteError> for AppError {
    fn from(e: DiscreteError) -> Self {
        match e {
            DiscreteError::InvalidBackend(_) | DiscreteError::TraceIncompatible(_) => {
                AppError::Validation(e.to_string())
            }
            DiscreteError::Graph(g) => g.into(),
            DiscreteError::Solver(s) => s.into(),
            DiscreteError::Hamiltonian(h) => h.into(),
            _ => AppError::Numerical(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => e.emit(),
    }
}

fn load(path: &Path, cli_lambda: Option<f64>, cli: &Cli) -> Result<(Network, f64), AppError> {
    let bytes = fs::read(path)?;
    let file = io::parse(&bytes)?;
    let mut net = file.build()?;
    if let Some(t) = cli.tol {
        net.solver.tol = t;
    }
    if let Some(n) = cli.grid_n {
        net.solver.grid_n = n;
    }
    let lambda = cli_lambda.unwrap_or(net.solver.lambda);
    Ok((net, lambda))
}

fn require_positive_lambda(lambda: f64) -> Result<(), AppError> {
    if !(lambda > 0.0) {
        return Err(AppError::Validation(format!(
            "discounted commands need lambda > 0, got {lambda}"
        )));
    }
    Ok(())
}

fn dfe_options(net: &Network, jacobi: bool) -> DfeOptions {
    DfeOptions {
        tol: net.solver.tol,
        max_iterations: net.solver.caps.max_dfe_iterations,
        sweep: if jacobi {
            SweepOrder::Jacobi
        } else {
            SweepOrder::GaussSeidel
        },
        ..Default::default()
    }
}

fn run(cli: Cli) -> Result<ExitCode, AppError> {
    match &cli.command {
        Command::Solve {
            network,
            lambda,
            output,
        } => {
            let (net, lambda) = load(network, *lambda, &cli)?;
            require_positive_lambda(lambda)?;
            let disc = net.solver.discretization();
            let table = EdgeMapTable::numeric(&net.graph, &net.specs, lambda, &disc)?;
            let sol = solve_dfe(&table, &net.graph, &dfe_options(&net, cli.jacobi))?;
            let arcs = extend(&net.graph, &net.specs, lambda, &sol.values, &disc)?;
            let vc =
                verify_vertex_conditions(&table, &net.graph, &sol.values, 10.0 * net.solver.tol)?;
            fs::create_dir_all(output)?;
            fs::write(
                output.join("U.json"),
                serde_json::to_string_pretty(&io::solution_to_json(&net.graph, &sol, lambda))
                    .unwrap(),
            )?;
            fs::write(output.join("arcs.csv"), io::arcs_to_csv(&net.graph, &arcs))?;
            let arc_residuals: BTreeMap<String, f64> = arcs
                .iter()
                .map(|a| (net.graph.edge_name(a.edge).to_owned(), a.profile.residual))
                .collect();
            let witnesses: BTreeMap<String, Option<String>> = net
                .graph
                .vertices()
                .map(|x| {
                    (
                        net.graph.vertex_name(x).to_owned(),
                        vc.witnesses[x.0].map(|e| net.graph.edge_name(e).to_owned()),
                    )
                })
                .collect();
            fs::write(
                output.join("residuals.json"),
                serde_json::to_string_pretty(&serde_json::json!({
                    "dfe_residual": sol.residual,
                    "dfe_iterations": sol.iterations,
                    "arc_residuals": arc_residuals,
                    "all_vertices_witnessed": vc.all_witnessed(),
                    "witnesses": witnesses,
                }))
                .unwrap(),
            )?;
            println!(
                "solved: {} vertices, residual {}, outputs in {}",
                net.graph.vertex_count(),
                fmt_sig(sol.residual),
                output.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Rho {
            network,
            alpha,
            edge,
            path,
            lambda,
        } => {
            let (net, lambda) = load(network, *lambda, &cli)?;
            require_positive_lambda(lambda)?;
            let disc = net.solver.discretization();
            let table = EdgeMapTable::numeric(&net.graph, &net.specs, lambda, &disc)?;
            let value = match (edge, path) {
                (Some(id), None) => {
                    let e = net
                        .graph
                        .edge_by_name(id)
                        .ok_or_else(|| AppError::Validation(format!("unknown edge id {id:?}")))?;
                    table.rho(*alpha, e)?
                }
                (None, Some(ids)) => {
                    let names: Vec<&str> = ids.iter().map(|s| s.as_str()).collect();
                    let p = net.graph.path_by_names(&names)?;
                    rho_path(&table, &p, *alpha)?
                }
                _ => {
                    return Err(AppError::Validation(
                        "pass exactly one of --edge or --path".into(),
                    ))
                }
            };
            println!("{}", fmt_sig(value));
            Ok(ExitCode::SUCCESS)
        }
        Command::Beta {
            network,
            cycle,
            lambda,
        } => {
            let (net, lambda) = load(network, *lambda, &cli)?;
            require_positive_lambda(lambda)?;
            let disc = net.solver.discretization();
            let table = EdgeMapTable::numeric(&net.graph, &net.specs, lambda, &disc)?;
            let names: Vec<&str> = cycle.iter().map(|s| s.as_str()).collect();
            let p = net.graph.path_by_names(&names)?;
            let beta = beta_cycle(&table, &net.graph, &p, 1e-9)?;
            println!("{}", fmt_sig(beta));
            Ok(ExitCode::SUCCESS)
        }
        Command::Aubry {
            network,
            lambda,
            output,
        } => {
            let (net, lambda) = load(network, *lambda, &cli)?;
            require_positive_lambda(lambda)?;
            let disc = net.solver.discretization();
            let table = EdgeMapTable::numeric(&net.graph, &net.specs, lambda, &disc)?;
            let sol = solve_dfe(&table, &net.graph, &dfe_options(&net, cli.jacobi))?;
            let rep = detect_aubry(
                &table,
                &net.graph,
                &sol.values,
                net.solver.eps_aubry,
                1e-9,
                net.solver.caps.max_paths,
            )?;
            let json = serde_json::to_string_pretty(&io::aubry_to_json(&net.graph, &rep)).unwrap();
            match output {
                Some(p) => fs::write(p, json)?,
                None => println!("{json}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Eikonal {
            network,
            trace,
            output,
        } => {
            let (net, _) = load(network, None, &cli)?;
            let data = eikonal_data(
                &net.graph,
                &net.specs,
                net.solver.quad_nodes,
                1e-8,
                1e-7,
                net.solver.caps.max_paths,
            )?;
            // trace on the distinguished set: from a file, or weight
            // distances from its first member
            let trace_map: BTreeMap<VertexId, f64> = match trace {
                Some(p) => {
                    let raw: BTreeMap<String, f64> =
                        serde_json::from_slice(&fs::read(p)?).map_err(io::IoError::from)?;
                    raw.iter()
                        .map(|(name, v)| {
                            net.graph
                                .vertex_by_name(name)
                                .map(|x| (x, *v))
                                .ok_or_else(|| {
                                    AppError::Validation(format!(
                                        "unknown vertex {name:?} in trace"
                                    ))
                                })
                        })
                        .collect::<Result<_, _>>()?
                }
                None => {
                    let base = *data.aubry.first().expect("distinguished set is nonempty");
                    let mut dist = vec![f64::INFINITY; net.graph.vertex_count()];
                    dist[base.0] = 0.0;
                    for _ in 0..net.graph.vertex_count() {
                        for e in net.graph.edges() {
                            let d = dist[net.graph.origin(e).0] + data.sigma[e.0];
                            if d < dist[net.graph.terminal(e).0] {
                                dist[net.graph.terminal(e).0] = d;
                            }
                        }
                    }
                    data.aubry.iter().map(|&y| (y, dist[y.0])).collect()
                }
            };
            let v = solve_eikonal_dfe(&net.graph, &data.sigma, &trace_map, 1e-9)?;
            let mut json = io::eikonal_to_json(&net.graph, &data);
            let vmap: BTreeMap<String, f64> = net
                .graph
                .vertices()
                .map(|x| (net.graph.vertex_name(x).to_owned(), v[x.0]))
                .collect();
            let tmap: BTreeMap<String, f64> = trace_map
                .iter()
                .map(|(x, t)| (net.graph.vertex_name(*x).to_owned(), *t))
                .collect();
            json["solution"] = serde_json::json!(vmap);
            json["trace"] = serde_json::json!(tmap);
            let text = serde_json::to_string_pretty(&json).unwrap();
            match output {
                Some(p) => fs::write(p, text)?,
                None => println!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            network,
            lambdas,
            output,
            assume_normalized,
            probe,
        } => {
            let (net, _) = load(network, None, &cli)?;
            for l in lambdas {
                require_positive_lambda(*l)?;
            }
            let mut cfg = SweepConfig {
                disc: net.solver.discretization(),
                quad_nodes: net.solver.quad_nodes,
                eps_aubry: net.solver.eps_aubry,
                path_cap: net.solver.caps.max_paths,
                probe: *probe,
                ..Default::default()
            };
            cfg.dfe.tol = net.solver.tol;
            cfg.dfe.max_iterations = net.solver.caps.max_dfe_iterations;
            if *assume_normalized {
                cfg.critical_override = Some(0.0);
            }
            let rep = lambda_sweep(&net.graph, &net.specs, lambdas, &cfg)?;
            fs::create_dir_all(output)?;
            fs::write(
                output.join("sweep.json"),
                serde_json::to_string_pretty(&io::sweep_to_json(&net.graph, &rep)).unwrap(),
            )?;
            fs::write(output.join("sweep.csv"), io::sweep_to_csv(&net.graph, &rep))?;
            println!(
                "swept {} discount factors; critical value {}; outputs in {}",
                rep.per_lambda.len(),
                fmt_sig(rep.critical_value),
                output.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest { cases } => Ok(selftest(*cases, cli.seed)),
    }
}

fn selftest(cases: usize, seed: u64) -> ExitCode {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;

    let mut comparison_ok = true;
    let mut uniqueness_ok = true;
    let mut representation_ok = true;
    let mut witnessed_ok = true;
    let mut monotone_ok = true;
    for _ in 0..cases {
        let (g, t) = synthetic::random_instance(&mut rng, 6, 5);
        let sol = match solve_dfe(&t, &g, &DfeOptions::default()) {
            Ok(s) => s,
            Err(_) => {
                comparison_ok = false;
                continue;
            }
        };
        let w = synthetic::random_subsolution(&mut rng, &t, &g, &sol.values);
        let z = synthetic::random_supersolution(&mut rng, &sol.values);
        comparison_ok &= check_subsolution(&t, &g, &w, 1e-9).unwrap_or(false);
        comparison_ok &= check_supersolution(&t, &g, &z, 1e-9).unwrap_or(false);
        comparison_ok &= w.iter().zip(&z).all(|(a, b)| a <= &(b + 1e-9));

        let again = solve_dfe(
            &t,
            &g,
            &DfeOptions {
                init: Some(t.upper_start_all() + 100.0),
                ..Default::default()
            },
        );
        uniqueness_ok &= again
            .map(|s| {
                s.values
                    .iter()
                    .zip(&sol.values)
                    .all(|(a, b)| (a - b).abs() < 1e-9)
            })
            .unwrap_or(false);

        if let Ok(rep) = detect_aubry(&t, &g, &sol.values, 1e-6, 1e-10, 100_000) {
            for x in g.vertices() {
                if let Ok(r) = aubry_representation(&t, &g, &sol.values, &rep, x, 100_000) {
                    representation_ok &= (r.value - sol.value(x)).abs() <= 1e-5;
                } else {
                    representation_ok = false;
                }
            }
        } else {
            representation_ok = false;
        }

        witnessed_ok &= verify_vertex_conditions(&t, &g, &sol.values, 1e-8)
            .map(|r| r.all_witnessed())
            .unwrap_or(false);

        // edge-map monotonicity along a random edge
        let e = hjnet::EdgeId(rng.gen_range(0..g.edge_count()));
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..10 {
            let a = -2.0 + 0.5 * k as f64;
            let r = t.rho(a, e).unwrap();
            if let Some((pa, pr)) = prev {
                monotone_ok &= r >= pr - 1e-12;
                monotone_ok &= (r - a) < (pr - pa) - 1e-12;
            }
            prev = Some((a, r));
        }
    }
    let mut check = |name: &str, ok: bool| {
        println!("{} {name}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };
    check(
        "comparison principle (random sub/supersolutions)",
        comparison_ok,
    );
    check("uniqueness (two initializations agree)", uniqueness_ok);
    check(
        "representation from the distinguished set",
        representation_ok,
    );
    check("vertex minimum witnessed everywhere", witnessed_ok);
    check("edge map monotonicity and gap decrease", monotone_ok);

    if failures == 0 {
        println!("selftest: all properties hold on {cases} random instances");
        ExitCode::SUCCESS
    } else {
        println!("selftest: {failures} properties failed");
        ExitCode::from(1)
    }
}
