use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use log::info;
use rayon::prelude::*;

use lanegraph::aggregation::{drive, merge_drives, DriveOutput};
use lanegraph::config::PipelineConfig;
use lanegraph::dataset::sample_crops;
use lanegraph::graph::{to_world, LaneGraph};
use lanegraph::io;
use lanegraph::pipeline::{evaluate, predict_successor};
use lanegraph::planning::{evaluate_plans, make_tasks, write_task_csv};
use lanegraph::sampling::{make_labels, sample_agent_poses, ProposalGraph, TargetLabels};
use lanegraph::scorer::{
    train, write_loss_csv, LearnedScorer, OracleScorer, Scorer, ScorerParams, TrainSample,
};
use lanegraph::worldgen::generate_world;
use lanegraph::Scalar;

use crate::{
    Cli, Command, DriveArgs, EvalArgs, InferArgs, PlanArgs, Precision, RenderArgs, SampleArgs,
    TrainArgs,
};

/// Bad command-line input detected by the CLI itself.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// 1 for invalid input, 2 for anything that failed at run time.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<Usage>() {
            return 1;
        }
        if let Some(le) = cause.downcast_ref::<lanegraph::Error>() {
            return if le.is_validation() { 1 } else { 2 };
        }
    }
    2
}

/// The error chain joined by ": ", skipping causes already spelled out by
/// the message before them.
pub fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.ends_with(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("LANEGRAPH_THREADS") {
        let n: usize = match v.trim().parse() {
            Ok(n) if n > 0 => n,
            _ => {
                return usage(format!(
                    "LANEGRAPH_THREADS must be a positive integer, got {v:?}"
                ))
            }
        };
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    let cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            PipelineConfig::from_json(&text).with_context(|| format!("config {}", p.display()))?
        }
        None => PipelineConfig::default(),
    };
    Ok(cfg)
}

pub fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    let cfg = load_config(cli.config.as_deref())?;
    if cli.dump_config {
        print!("{}", cfg.to_json());
        return Ok(());
    }
    let Some(cmd) = cli.command else {
        return usage("no subcommand given; see --help");
    };
    match cli.precision {
        Precision::F32 => dispatch::<f32>(cmd, &cfg),
        Precision::F64 => dispatch::<f64>(cmd, &cfg),
    }
}

fn dispatch<T: Scalar>(cmd: Command, cfg: &PipelineConfig) -> Result<()> {
    match cmd {
        Command::Worldgen(a) => {
            let mut spec = cfg.world.clone();
            if let Some(s) = a.seed {
                spec.seed = s;
            }
            let world = generate_world(&spec)?;
            io::write_world(&a.out, &world)?;
            info!(
                "world {}x{} with {} nodes",
                world.width(),
                world.height(),
                world.gt.node_count()
            );
            Ok(())
        }
        Command::Sample(a) => sample(a, cfg),
        Command::Train(a) => train_cmd::<T>(a, cfg),
        Command::Infer(a) => infer::<T>(a, cfg),
        Command::Drive(a) => drive_cmd::<T>(a, cfg),
        Command::Eval(a) => eval(a, cfg),
        Command::Plan(a) => plan(a, cfg),
        Command::Render(a) => render(a),
    }
}

fn ensure_empty_dir(dir: &Path) -> Result<()> {
    if dir.exists() && fs::read_dir(dir)?.next().is_some() {
        return usage(format!("{} exists and is not empty", dir.display()));
    }
    Ok(())
}

fn sample(a: SampleArgs, cfg: &PipelineConfig) -> Result<()> {
    ensure_empty_dir(&a.out)?;
    let world = io::read_world(&a.world).with_context(|| format!("world {}", a.world.display()))?;
    let noise = (!a.no_noise).then_some(&cfg.sampling);
    let mut crops = sample_crops(&world, a.n, a.seed.unwrap_or(cfg.seed), noise)?;
    // labels must match what training rebuilds from the stored 8-bit rasters
    for c in &mut crops {
        c.image.quantize_u8();
        c.lane_mask.quantize_u8();
        c.ego_mask.quantize_u8();
    }
    let labels: Vec<TargetLabels<f64>> = crops
        .par_iter()
        .map(|c| {
            Ok(make_labels(
                &ProposalGraph::<f64>::build(c, &cfg.sampling)?,
                c,
                &cfg.sampling,
            ))
        })
        .collect::<lanegraph::Result<_>>()?;
    io::write_dataset(&a.out, &crops, Some(&labels))?;
    info!("wrote {} samples to {}", crops.len(), a.out.display());
    Ok(())
}

fn read_graph(path: &Path) -> Result<LaneGraph<f64>> {
    io::read_graph(path).with_context(|| format!("graph {}", path.display()))
}

fn read_params<T: Scalar>(path: &Path) -> Result<ScorerParams<T>> {
    let f =
        fs::File::open(path).with_context(|| format!("opening checkpoint {}", path.display()))?;
    Ok(ScorerParams::read_checkpoint(std::io::BufReader::new(f))?)
}

fn write_params<T: Scalar>(path: &Path, p: &ScorerParams<T>) -> Result<()> {
    let mut buf = Vec::new();
    p.write_checkpoint(&mut buf)?;
    Ok(io::write_atomic(path, &buf)?)
}

fn train_cmd<T: Scalar>(a: TrainArgs, cfg: &PipelineConfig) -> Result<()> {
    let mut tc = cfg.train.clone();
    if let Some(e) = a.epochs {
        tc.epochs = e;
    }
    if let Some(s) = a.seed {
        tc.seed = s;
    }
    tc.validate()?;
    let samples =
        io::read_dataset(&a.data).with_context(|| format!("dataset {}", a.data.display()))?;
    let data: Vec<TrainSample<T>> = samples
        .par_iter()
        .map(|(crop, labels)| {
            let graph = ProposalGraph::<T>::build(crop, &cfg.sampling)?;
            let labels = match labels {
                Some(l) => l.cast::<T>(),
                None => make_labels(&graph, crop, &cfg.sampling),
            };
            labels.check_aligned(&graph)?;
            Ok(TrainSample { graph, labels })
        })
        .collect::<lanegraph::Result<_>>()?;
    let init = match &a.init {
        Some(p) => read_params::<T>(p)?,
        None => ScorerParams::init(tc.steps, tc.seed),
    };
    let (params, trace) = train(&data, &tc, init, |_, _| {})?;
    write_params(&a.out, &params)?;
    if let Some(p) = &a.loss_csv {
        let mut buf = Vec::new();
        write_loss_csv(&mut buf, &trace)?;
        io::write_atomic(p, &buf)?;
    }
    Ok(())
}

fn load_scorer<T: Scalar>(spec: &str, cfg: &PipelineConfig) -> Result<Box<dyn Scorer<T>>> {
    if spec == "oracle" {
        return Ok(Box::new(OracleScorer {
            sampling: cfg.sampling.clone(),
        }));
    }
    Ok(Box::new(LearnedScorer {
        params: read_params::<T>(Path::new(spec))?,
    }))
}

fn infer<T: Scalar>(a: InferArgs, cfg: &PipelineConfig) -> Result<()> {
    let (crop, _) = io::read_crop(&a.crop).with_context(|| format!("crop {}", a.crop.display()))?;
    let scorer = load_scorer::<T>(&a.scorer, cfg)?;
    let pred = predict_successor::<T, _>(&crop, scorer.as_ref(), &cfg.successor())?;
    let g = if a.world_frame {
        to_world(&pred.graph, &crop.crop_pose().cast())?
    } else {
        pred.graph
    };
    io::write_graph(&a.out, &g)?;
    Ok(())
}

fn drive_cmd<T: Scalar>(a: DriveArgs, cfg: &PipelineConfig) -> Result<()> {
    if a.agents == 0 {
        return usage("--agents must be positive");
    }
    let world = io::read_world(&a.world).with_context(|| format!("world {}", a.world.display()))?;
    let scorer = load_scorer::<T>(&a.scorer, cfg)?;
    let agg = cfg.aggregation();
    let poses = sample_agent_poses(&world, a.agents, a.seed.unwrap_or(cfg.seed))?;
    let outputs: Vec<DriveOutput<T>> = poses
        .par_iter()
        .map(|p| drive::<T, _, _>(*p, &world, scorer.as_ref(), &agg))
        .collect::<lanegraph::Result<_>>()?;
    let graphs: Vec<LaneGraph<T>> = outputs.iter().map(|o| o.graph.clone()).collect();
    let merged = merge_drives(&graphs, &agg)?;
    io::write_graph(&a.out, &merged)?;
    if let Some(path) = &a.trace {
        let mut buf = Vec::new();
        for (k, o) in outputs.iter().enumerate() {
            for ev in &o.trace {
                let mut v = serde_json::to_value(ev)?;
                v["agent"] = k.into();
                serde_json::to_writer(&mut buf, &v)?;
                buf.push(b'\n');
            }
        }
        io::write_atomic(path, &buf)?;
    }
    info!(
        "merged graph: {} nodes, {} edges",
        merged.node_count(),
        merged.edge_count()
    );
    Ok(())
}

fn eval(a: EvalArgs, cfg: &PipelineConfig) -> Result<()> {
    let pred: LaneGraph<f64> = read_graph(&a.pred)?;
    let gt: LaneGraph<f64> = read_graph(&a.gt)?;
    let b = evaluate(&pred, &gt, &cfg.metrics)?;
    println!("{}", serde_json::to_string_pretty(&b.report)?);
    eprintln!("{}", b.report.table());
    if let Some(dir) = &a.bundle {
        io::write_graph(&dir.join("pred.json"), &b.pred)?;
        io::write_graph(&dir.join("gt.json"), &b.gt)?;
        io::write_json(&dir.join("report.json"), &b.report)?;
        io::write_json(&dir.join("config.json"), &b.config)?;
    }
    Ok(())
}

fn plan(a: PlanArgs, cfg: &PipelineConfig) -> Result<()> {
    if !(a.max_len_m > 0.0) {
        return usage("--max-len-m must be positive");
    }
    let pred: LaneGraph<f64> = read_graph(&a.graph)?;
    let gt: LaneGraph<f64> = read_graph(&a.gt)?;
    let max_px = a.max_len_m / cfg.planning.resolution_m_per_px;
    let tasks = make_tasks(&gt, a.n, max_px, a.seed.unwrap_or(cfg.seed))?;
    let (report, outcomes) = evaluate_plans(&pred, &gt, &tasks, &cfg.planning)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(p) = &a.csv {
        let mut buf = Vec::new();
        write_task_csv(&mut buf, &tasks, &outcomes)?;
        io::write_atomic(p, &buf)?;
    }
    Ok(())
}

fn render(a: RenderArgs) -> Result<()> {
    let base =
        io::read_raster(&a.raster).with_context(|| format!("raster {}", a.raster.display()))?;
    let graphs = a
        .graph
        .iter()
        .map(|p| read_graph(p))
        .collect::<Result<Vec<_>>>()?;
    if a.out.extension().is_some_and(|e| e == "pgm") {
        bail!(Usage("render output must be PNG".into()));
    }
    io::write_raster(&a.out, &crate::render::overlay(&base, &graphs))?;
    Ok(())
}
