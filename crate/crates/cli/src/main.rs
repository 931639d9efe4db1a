mod args;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use stackpack::export::export_scene;
use stackpack::geometry::save_obj;
use stackpack::items::{generate_test_items, procedural_order, ItemParams};
use stackpack::request::{
    run_pack, ItemEntry, ItemSource, PackRequest, RunOutcome, EXIT_INPUT_ERROR, EXIT_OK,
};
use stackpack::validate::validate_plan;
use stackpack::{Container, PackingPlan, SearchConfig};

use args::{Cli, Command, ExportArgs, GenArgs, Inputs, PackArgs, ValidateArgs};

/// `validate` exit status when the plan breaks a constraint.
const EXIT_PLAN_INVALID: i32 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_INPUT_ERROR as u8);
    }
    let code = match cli.command {
        Command::Pack(a) => pack(a),
        Command::Validate(a) => validate(a),
        Command::GenItems(a) => gen_items(a).map(|()| EXIT_OK),
        Command::Export(a) => export(a).map(|()| EXIT_OK),
    };
    match code {
        Ok(c) => ExitCode::from(c as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT_ERROR as u8)
        }
    }
}

/// Caps the worker pool at `STACKPACK_THREADS` when set.
fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("STACKPACK_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().with_context(|| format!("STACKPACK_THREADS={v:?} is not a number"))?;
    if n == 0 {
        bail!("STACKPACK_THREADS must be at least 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

/// Builds the request from a request file or a list of mesh files, with
/// command-line overrides. Also returns the directory mesh paths are
/// relative to. The container list may be empty.
fn load_request(inputs: &Inputs) -> Result<(PackRequest, PathBuf)> {
    let is_json = |p: &Path| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let (mut req, base) = match inputs.inputs.as_slice() {
        [p] if is_json(p) => {
            let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
            (PackRequest::read(p)?, base)
        }
        paths => {
            if let Some(p) = paths.iter().find(|p| is_json(p)) {
                bail!("{}: a request file must be the only input", p.display());
            }
            let items = paths
                .iter()
                .map(|p| ItemEntry {
                    source: ItemSource::Mesh { path: p.clone() },
                    mass: None,
                    count: 1,
                })
                .collect();
            let req = PackRequest {
                items,
                containers: Vec::new(),
                config: SearchConfig::default(),
                seed: 0,
                sequence: None,
            };
            (req, PathBuf::new())
        }
    };
    if let Some(c) = &inputs.containers {
        req.containers = parse_containers(c)?;
    }
    if let Some(s) = inputs.seed {
        req.seed = s;
    }
    Ok((req, base))
}

/// Inline JSON or a path to a JSON file holding `[[L, W, H], ...]` or a
/// list of container objects.
fn parse_containers(arg: &str) -> Result<Vec<Container>> {
    let text = if arg.trim_start().starts_with('[') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("{arg}: cannot read containers"))?
    };
    if let Ok(dims) = serde_json::from_str::<Vec<[f64; 3]>>(&text) {
        return dims
            .into_iter()
            .map(|[l, w, h]| Container::new(l, w, h).map_err(Into::into))
            .collect();
    }
    serde_json::from_str::<Vec<Container>>(&text).context("containers must be a JSON list of [L, W, H] or container objects")
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("{}: cannot write", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pack(a: PackArgs) -> Result<i32> {
    let (mut req, base) = load_request(&a.inputs)?;
    if req.containers.is_empty() {
        bail!("no containers given; pass --containers");
    }
    a.search.apply(&mut req.config);
    let run = run_pack(&req, &base)?;
    match &run.outcome {
        RunOutcome::Packed(plan) => {
            write_output(a.out.as_deref(), &plan.to_json())?;
            eprintln!(
                "packed {} items into container {}",
                plan.steps.len(),
                plan.container_index.unwrap_or(0)
            );
        }
        RunOutcome::NoSolution(attempts) => {
            eprintln!("no container fits all {} items", run.items.len());
            for t in attempts {
                match t.failed_item {
                    Some(i) => eprintln!(
                        "  container {}: item {i} ({}) did not fit after {} placements",
                        t.container_index, run.items[i].name, t.placed
                    ),
                    None => eprintln!("  container {}: smaller than the items' total volume", t.container_index),
                }
            }
        }
    }
    Ok(run.exit_code())
}

fn load_plan_items(plan: &Path, inputs: &Inputs) -> Result<(PackingPlan, Vec<stackpack::PackItem>)> {
    let plan = PackingPlan::read(plan)?;
    let (req, base) = load_request(inputs)?;
    Ok((plan, req.load_items(&base)?))
}

fn validate(a: ValidateArgs) -> Result<i32> {
    let (plan, items) = load_plan_items(&a.plan, &a.inputs)?;
    let report = validate_plan(&plan, &items, &plan.container, &plan.config)?;
    write_output(a.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    match report.first_failure {
        None => {
            eprintln!("plan valid: {} steps", report.steps.len());
            Ok(EXIT_OK)
        }
        Some((step, v)) => {
            eprintln!("plan invalid: {v:?} at step {step}");
            Ok(EXIT_PLAN_INVALID)
        }
    }
}

fn gen_items(a: GenArgs) -> Result<()> {
    if let Some(n) = a.order {
        return gen_order(&a, n);
    }
    let Some(kind) = a.kind else {
        bail!("give an item kind, or --order N for a random mix");
    };
    let mut params = ItemParams::default();
    if let Some(s) = &a.size {
        params.size = [s[0], s[1], s[2]];
    }
    params.wall = a.wall.or(params.wall);
    params.jitter = a.jitter.unwrap_or(params.jitter);
    let mesh = generate_test_items(kind, &params, a.seed)?;
    save_obj(&a.out, &mesh)?;
    Ok(())
}

/// Random items as OBJ files plus `request.json` packing them into three
/// box sizes.
fn gen_order(a: &GenArgs, n: usize) -> Result<()> {
    std::fs::create_dir_all(&a.out).with_context(|| format!("{}: cannot create", a.out.display()))?;
    let mut items = Vec::new();
    for (k, (kind, mut params)) in procedural_order(n, a.seed, a.size_range[0], a.size_range[1]).into_iter().enumerate() {
        params.jitter = a.jitter.unwrap_or(params.jitter);
        let mesh = generate_test_items(kind, &params, a.seed.wrapping_add(k as u64))?;
        let name = PathBuf::from(format!("item_{k:02}_{kind}.obj"));
        save_obj(a.out.join(&name), &mesh)?;
        items.push(ItemEntry {
            source: ItemSource::Mesh { path: name },
            mass: None,
            count: 1,
        });
    }
    let containers = [(0.2, 0.2, 0.15), (0.26, 0.26, 0.2), (0.32, 0.32, 0.3)]
        .into_iter()
        .map(|(l, w, h)| Container::new(l, w, h))
        .collect::<stackpack::Result<Vec<_>>>()?;
    let req = PackRequest {
        items,
        containers,
        config: SearchConfig::default(),
        seed: a.seed,
        sequence: None,
    };
    let path = a.out.join("request.json");
    std::fs::write(&path, serde_json::to_string_pretty(&req)? + "\n").with_context(|| format!("{}: cannot write", path.display()))?;
    Ok(())
}

fn export(a: ExportArgs) -> Result<()> {
    let (plan, items) = load_plan_items(&a.plan, &a.inputs)?;
    for f in export_scene(&plan, &items, &plan.container, &a.out)? {
        println!("{}", f.display());
    }
    Ok(())
}
