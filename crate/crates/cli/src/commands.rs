use clap::{Args, Parser, Subcommand, ValueEnum};
use metadecomp::enumerate::{count_join_trees, enumerate_join_trees, TreeCount};
use metadecomp::error::Error;
use metadecomp::io;
use metadecomp::meta::build_meta;
use metadecomp::optimizer::{optimize_meta, LocalMode, OptimizerConfig};
use metadecomp::oracle::{execute, oracle_global_dp, oracle_join_trees, true_cardinalities};
use metadecomp::plan::{cost, width};
use metadecomp::workload;
use metadecomp::{Caps, CardinalityProvider, Hypergraph};
use serde_json::{json, Value};
use std::path::PathBuf;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "metadecomp",
    version,
    about = "Width-1 query planning over meta-decompositions"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TreeFormat {
    Json,
    Dot,
    Count,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetaFormat {
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlanFormat {
    Json,
    Sql,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum LocalArg {
    Exact,
    Greedy,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Star,
    Chain,
    Random,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether the query is acyclic (exit 2 when it is not).
    Check { query: PathBuf },
    /// Build and print the meta-decomposition.
    Meta {
        query: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: MetaFormat,
    },
    /// Enumerate all join trees.
    Enumerate {
        query: PathBuf,
        #[arg(long)]
        limit: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        format: TreeFormat,
    },
    /// Find the optimal width-1 query plan.
    Optimize(OptimizeArgs),
    /// Compute the width of a plan.
    Width {
        query: PathBuf,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Brute-force references: globally optimal plan or join-tree count.
    Oracle {
        query: PathBuf,
        #[arg(long)]
        cards: Option<PathBuf>,
        /// Count valid join trees by exhaustive filtering instead.
        #[arg(long)]
        count_trees: bool,
    },
    /// Execute a plan against CSV data and report intermediate sizes.
    Exec {
        query: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Generate a query, its true cardinalities, and CSV data.
    Gen(GenArgs),
    /// Batch comparison of width-1 optima against the global DP optimum.
    Bench(BenchArgs),
}

#[derive(Args)]
struct OptimizeArgs {
    query: PathBuf,
    #[arg(long)]
    cards: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    local: LocalArg,
    #[arg(long, value_enum, default_value = "on")]
    rebranch: Toggle,
    #[arg(long, value_enum, default_value = "json")]
    emit: PlanFormat,
    /// Pin the final join to meta edges touching this relation.
    #[arg(long)]
    root: Option<String>,
    #[arg(long, default_value_t = 12)]
    exact_fanout_limit: usize,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "random")]
    preset: Preset,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    fanout_max: usize,
    #[arg(long, default_value_t = 0.5)]
    bias: f64,
    #[arg(long, default_value_t = 50)]
    rows: usize,
    #[arg(long, default_value_t = 20)]
    domain: i64,
    /// Output paths: query JSON, cardinality JSON, data directory.
    #[arg(long, num_args = 3, value_names = ["QUERY", "CARDS", "DATA"])]
    emit: Vec<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "random")]
    preset: Preset,
    #[arg(long, default_value_t = 3)]
    n_min: usize,
    #[arg(long, default_value_t = 6)]
    n_max: usize,
    /// Instances per query size.
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Log-normal misestimation noise fed to the optimizer (0 = exact).
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 30)]
    rows: usize,
    #[arg(long, default_value_t = 10)]
    domain: i64,
}

pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.to_string() }));
            e.exit_code()
        }
    }
}

fn load_query(path: &PathBuf) -> metadecomp::Result<Hypergraph> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    io::parse_query(&text)
}

fn load_cards(h: &Hypergraph, path: &PathBuf) -> metadecomp::Result<CardinalityProvider> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    io::parse_cards_json(h, &text)
}

fn gen_instance(preset: Preset, n: usize, fanout_max: usize, bias: f64, seed: u64) -> Hypergraph {
    match preset {
        Preset::Star => workload::star(n),
        Preset::Chain => workload::chain(n),
        Preset::Random => workload::gen_acyclic(n, fanout_max, bias, seed),
    }
}

fn dispatch(cli: Cli) -> metadecomp::Result<i32> {
    let caps = Caps::from_env();
    match cli.command {
        Command::Check { query } => {
            let h = load_query(&query)?;
            let acyclic = h.gyo_is_acyclic();
            println!(
                "{}",
                json!({ "acyclic": acyclic, "relations": h.num_relations() })
            );
            Ok(if acyclic { 0 } else { 2 })
        }
        Command::Meta { query, format } => {
            let h = load_query(&query)?;
            let m = build_meta(&h)?;
            if let Err(v) = m.validate(&h) {
                return Err(Error::Internal(format!(
                    "constructed meta failed validation: {v}"
                )));
            }
            match format {
                MetaFormat::Json => println!(
                    "{}",
                    json!({
                        "meta": io::meta_to_json(&h, &m),
                        "nodes": m.len(),
                        "minorNodes": m.minor_count(),
                    })
                ),
                MetaFormat::Dot => print!("{}", io::meta_to_dot(&h, &m)),
            }
            Ok(0)
        }
        Command::Enumerate {
            query,
            limit,
            format,
        } => {
            let h = load_query(&query)?;
            let m = build_meta(&h)?;
            let limit = limit.unwrap_or(caps.enum_limit);
            match format {
                TreeFormat::Count => match count_join_trees(&h, &m, limit)? {
                    TreeCount::Exact(c) => {
                        println!("{}", json!({ "count": c }));
                    }
                    TreeCount::LimitExceeded => {
                        println!("{}", json!({ "count": Value::Null, "limitExceeded": true }));
                        return Ok(3);
                    }
                },
                TreeFormat::Json => {
                    let mut trees = Vec::new();
                    let mut truncated = false;
                    for t in enumerate_join_trees(&h, &m)? {
                        let t = t?;
                        if trees.len() as u64 >= limit {
                            truncated = true;
                            break;
                        }
                        trees.push(io::tree_to_json(&h, &t));
                    }
                    println!("{}", json!({ "trees": trees, "truncated": truncated }));
                }
                TreeFormat::Dot => {
                    for (emitted, t) in enumerate_join_trees(&h, &m)?.enumerate() {
                        let t = t?;
                        if emitted as u64 >= limit {
                            break;
                        }
                        print!("{}", io::tree_to_dot(&h, &t));
                    }
                }
            }
            Ok(0)
        }
        Command::Optimize(args) => {
            let h = load_query(&args.query)?;
            let cp = load_cards(&h, &args.cards)?;
            let m = build_meta(&h)?;
            let root_rel =
                match &args.root {
                    Some(name) => Some(h.rel_by_name(name).ok_or_else(|| {
                        Error::InvalidArgument(format!("unknown relation {name:?}"))
                    })?),
                    None => None,
                };
            let cfg = OptimizerConfig {
                local: match args.local {
                    LocalArg::Exact => LocalMode::Exact,
                    LocalArg::Greedy => LocalMode::Greedy,
                },
                exact_fanout_limit: args.exact_fanout_limit,
                rebranch: matches!(args.rebranch, Toggle::On),
                root_rel,
                ..OptimizerConfig::default()
            };
            let out = optimize_meta(&h, &m, &cp, &cfg)?;
            match args.emit {
                PlanFormat::Json => println!(
                    "{}",
                    json!({
                        "plan": io::plan_to_json(&h, &out.plan),
                        "cost": out.cost,
                        "width": out.width,
                        "usedEstimates": out.used_estimates,
                        "warnings": out.warnings,
                        "counters": { "dpCells": out.dp_cells },
                        "version": VERSION,
                    })
                ),
                PlanFormat::Sql => print!("{}", io::plan_to_sql(&h, &out.plan)?),
                PlanFormat::Dot => print!("{}", io::plan_to_dot(&h, &out.plan)),
            }
            Ok(0)
        }
        Command::Width { query, plan } => {
            let h = load_query(&query)?;
            let text = std::fs::read_to_string(&plan)
                .map_err(|e| Error::Parse(format!("{}: {e}", plan.display())))?;
            let p = io::parse_plan_json(&h, &text)?;
            let w = width(&p, &h)?;
            let info = metadecomp::plan::annotate(&p, &h)?;
            let per_node: Vec<Value> = p
                .postorder()
                .into_iter()
                .map(|ix| {
                    json!({
                        "rels": info.rels[ix].iter().map(|r| h.rel_name(r)).collect::<Vec<_>>(),
                        "width": w.per_node[ix],
                    })
                })
                .collect();
            println!("{}", json!({ "width": w.width, "perNode": per_node }));
            Ok(0)
        }
        Command::Oracle {
            query,
            cards,
            count_trees,
        } => {
            let h = load_query(&query)?;
            if count_trees {
                let trees = oracle_join_trees(&h, &caps)?;
                println!("{}", json!({ "treeCount": trees.len() }));
                return Ok(0);
            }
            let cards = cards.ok_or_else(|| {
                Error::InvalidArgument("oracle needs --cards unless --count-trees".into())
            })?;
            let cp = load_cards(&h, &cards)?;
            let (plan, dp_cost) = oracle_global_dp(&h, &cp, &caps)?;
            let w = width(&plan, &h)?;
            println!(
                "{}",
                json!({
                    "globalCost": dp_cost,
                    "width": w.width,
                    "plan": io::plan_to_json(&h, &plan),
                })
            );
            Ok(0)
        }
        Command::Exec { query, plan, data } => {
            let h = load_query(&query)?;
            let text = std::fs::read_to_string(&plan)
                .map_err(|e| Error::Parse(format!("{}: {e}", plan.display())))?;
            let p = io::parse_plan_json(&h, &text)?;
            let db = io::load_csv_dir(&h, &data)?;
            let report = execute(&h, &p, &db)?;
            println!(
                "{}",
                json!({
                    "attrs": report.attrs.iter().map(|&a| h.attr_name(a)).collect::<Vec<_>>(),
                    "rowCount": report.rows.len(),
                    "rows": report.rows,
                    "maxInterfaceRows": report.max_interface_rows,
                    "perNode": report.per_node.iter().map(|n| json!({
                        "rels": n.rels.iter().map(|r| h.rel_name(r)).collect::<Vec<_>>(),
                        "outRows": n.out_rows,
                        "interfaceRows": n.interface_rows,
                    })).collect::<Vec<_>>(),
                })
            );
            Ok(0)
        }
        Command::Gen(args) => {
            if args.emit.len() != 3 {
                return Err(Error::InvalidArgument(
                    "--emit takes three paths: query cards data-dir".into(),
                ));
            }
            let h = gen_instance(args.preset, args.n, args.fanout_max, args.bias, args.seed);
            let db =
                workload::random_db(&h, args.seed, args.rows.min(caps.max_db_rows), args.domain);
            let cp = true_cardinalities(&h, &db, &caps)?;
            std::fs::write(&args.emit[0], io::query_to_json(&h).to_string())?;
            std::fs::write(&args.emit[1], io::cards_to_json(&h, &cp).to_string())?;
            io::write_csv_dir(&h, &db, &args.emit[2])?;
            println!(
                "{}",
                json!({
                    "relations": h.num_relations(),
                    "seed": args.seed,
                    "query": args.emit[0],
                    "cards": args.emit[1],
                    "data": args.emit[2],
                    "version": VERSION,
                })
            );
            Ok(0)
        }
        Command::Bench(args) => {
            println!("instance,preset,n,seed,metaOptCost,globalOptCost,ratio,width1Count,dpCells,enumOps");
            let preset_name = match args.preset {
                Preset::Star => "star",
                Preset::Chain => "chain",
                Preset::Random => "random",
            };
            let mut instance = 0usize;
            for n in args.n_min..=args.n_max {
                for rep in 0..args.count.max(1) {
                    let seed = args.seed.wrapping_add((n * 1000 + rep) as u64);
                    let h = gen_instance(args.preset, n, 3, 0.5, seed);
                    let db = workload::random_db(&h, seed, args.rows, args.domain);
                    let cp = true_cardinalities(&h, &db, &caps)?;
                    let cp_opt = workload::perturb_cards(&cp, args.sigma, seed);
                    let m = build_meta(&h)?;
                    let out = optimize_meta(&h, &m, &cp_opt, &OptimizerConfig::default())?;
                    // report true costs regardless of the noise fed to the optimizer
                    let true_cost = cost(&out.plan, &h, &cp)?.total;
                    let (_, global_cost) = oracle_global_dp(&h, &cp, &caps)?;
                    let ratio = if true_cost > 0.0 {
                        global_cost / true_cost
                    } else {
                        1.0
                    };
                    let mut iter = enumerate_join_trees(&h, &m)?;
                    let mut count = 0u64;
                    let mut exceeded = false;
                    for t in &mut iter {
                        t?;
                        count += 1;
                        if count > caps.enum_limit {
                            exceeded = true;
                            break;
                        }
                    }
                    let count_str = if exceeded {
                        format!(">{}", caps.enum_limit)
                    } else {
                        count.to_string()
                    };
                    println!(
                        "{instance},{preset_name},{n},{seed},{true_cost},{global_cost},{ratio},{count_str},{},{}",
                        out.dp_cells,
                        iter.ops()
                    );
                    instance += 1;
                }
            }
            Ok(0)
        }
    }
}
