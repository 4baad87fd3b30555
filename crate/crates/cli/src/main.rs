use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use layout_rectifier::render::{render_diff, render_svg, RenderStyle};
use layout_rectifier::{
    evaluate, extract_alignments, parse_criteria, parse_layout, rectify, CriteriaSet, Error, GridIndex, Layout,
    MetricBundle, RectifyConfig, Result, SaliencyMap,
};

#[derive(Parser)]
#[command(
    name = "layout-rectifier",
    version,
    about = "Grid-guided repair of graphic design layouts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the grid index from a directory of clean layouts.
    BuildGrids {
        /// Directory of layout JSON files; file stems become source ids.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        gutter: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repair one layout against the grid index.
    Rectify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        criteria: PathBuf,
        #[arg(long)]
        grids: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Grayscale saliency map (PGM or PNG).
        #[arg(long)]
        saliency: Option<PathBuf>,
        #[arg(long)]
        exemplars: Option<usize>,
        #[arg(long)]
        outer_iters: Option<usize>,
        #[arg(long)]
        adam_iters: Option<usize>,
        /// Use the negative containment cost exactly as printed.
        #[arg(long)]
        eq3_literal: bool,
        /// Blank-space reduction (not implemented).
        #[arg(long)]
        reduce_blank: bool,
        /// Write every exemplar branch with its score to this file.
        #[arg(long)]
        emit_all: Option<PathBuf>,
        /// Directory for the per-stage energy trace.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        dump_relations: Option<PathBuf>,
    },
    /// Print the quality metrics of a layout, or of every layout in a directory.
    Evaluate {
        #[arg(long, required_unless_present = "batch")]
        input: Option<PathBuf>,
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        criteria: PathBuf,
        #[arg(long)]
        saliency: Option<PathBuf>,
        #[arg(long, conflicts_with = "input")]
        batch: Option<PathBuf>,
    },
    /// Draw a layout as SVG.
    Render {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long, requires = "grid_id")]
        grid: Option<PathBuf>,
        #[arg(long, requires = "grid")]
        grid_id: Option<String>,
        /// Overlay the alignment relations extracted from the layout.
        #[arg(long)]
        relations: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw two versions of a layout side by side with movement arrows.
    RenderDiff {
        #[arg(long)]
        before: PathBuf,
        #[arg(long)]
        after: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn load_layout(path: &Path) -> Result<Layout> {
    parse_layout(&read(path)?)
}

fn load_criteria(path: &Path) -> Result<CriteriaSet> {
    parse_criteria(&read(path)?)
}

fn load_saliency(path: Option<&PathBuf>) -> Result<Option<SaliencyMap>> {
    path.map(SaliencyMap::load).transpose()
}

fn json_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|x| x == "json"));
    files.sort();
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn layout_value(l: &Layout) -> Value {
    serde_json::from_str(&l.to_json()).expect("canonical layout JSON parses")
}

fn build_grids(corpus: &Path, gutter: f64, out: &Path) -> Result<()> {
    let files = json_files(corpus)?;
    if files.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let named = files
        .iter()
        .map(|p| {
            let l = load_layout(p)?;
            l.validate(None)
                .map_err(|e| Error::InvalidLayout(format!("{}: {e}", p.display())))?;
            Ok((stem(p), l))
        })
        .collect::<Result<Vec<_>>>()?;
    let index = GridIndex::build(&named, gutter)?;
    write(out, &index.to_json())?;
    log::info!("wrote {} grids to {}", index.len(), out.display());
    Ok(())
}

struct RectifyArgs {
    input: PathBuf,
    criteria: PathBuf,
    grids: PathBuf,
    out: PathBuf,
    config: Option<PathBuf>,
    saliency: Option<PathBuf>,
    exemplars: Option<usize>,
    outer_iters: Option<usize>,
    adam_iters: Option<usize>,
    eq3_literal: bool,
    reduce_blank: bool,
    emit_all: Option<PathBuf>,
    trace: Option<PathBuf>,
    dump_relations: Option<PathBuf>,
}

fn run_rectify(a: RectifyArgs) -> Result<()> {
    if a.reduce_blank {
        return Err(Error::NotImplemented("--reduce-blank (blank-space term)"));
    }
    let mut config = match &a.config {
        Some(p) => RectifyConfig::from_json(&read(p)?)?,
        None => RectifyConfig::default(),
    };
    if let Some(m) = a.exemplars {
        config.num_exemplars = m;
    }
    if let Some(t) = a.outer_iters {
        config.outer_iters = t;
    }
    if let Some(n) = a.adam_iters {
        config.adam_iters = n;
    }
    config.eq3_literal |= a.eq3_literal;

    let input = load_layout(&a.input)?;
    let criteria = load_criteria(&a.criteria)?;
    let index = GridIndex::from_json(&read(&a.grids)?)?;
    let saliency = load_saliency(a.saliency.as_ref())?;
    let result = rectify(&input, &criteria, &index, &config, saliency.as_ref())?;

    write(&a.out, &result.layout.to_json())?;
    if let Some(p) = &a.dump_relations {
        write(p, &result.relations.to_json())?;
    }
    if let Some(p) = &a.emit_all {
        let candidates: Vec<Value> = result
            .branches
            .iter()
            .map(|b| {
                json!({
                    "source_id": b.source_id,
                    "flaw_score": b.flaw_score,
                    "similarity": b.similarity,
                    "layout": layout_value(&b.layout),
                })
            })
            .collect();
        let doc = json!({"selected": result.exemplar_source, "candidates": candidates});
        write(p, &serde_json::to_string_pretty(&doc)?)?;
    }
    if let Some(dir) = &a.trace {
        fs::create_dir_all(dir)?;
        let all: Vec<_> = result.branches.iter().flat_map(|b| &b.trace).collect();
        write(&dir.join("trace.json"), &serde_json::to_string_pretty(&all)?)?;
    }
    let summary = json!({
        "exemplar": result.exemplar_source,
        "flaw_score": result.flaw_score,
        "before": result.metrics_before,
        "after": result.metrics_after,
    });
    println!("{summary}");
    Ok(())
}

fn mean_bundle(bundles: &[MetricBundle]) -> Value {
    let mean = |vals: Vec<f64>| (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64);
    json!({
        "file": "mean",
        "align": mean(bundles.iter().map(|b| b.align).collect()),
        "ove": mean(bundles.iter().map(|b| b.ove).collect()),
        "cont": mean(bundles.iter().filter_map(|b| b.cont).collect()),
        "occ": mean(bundles.iter().filter_map(|b| b.occ).collect()),
    })
}

fn run_evaluate(
    input: Option<PathBuf>,
    reference: Option<PathBuf>,
    criteria: &Path,
    saliency: Option<PathBuf>,
    batch: Option<PathBuf>,
) -> Result<()> {
    let criteria = load_criteria(criteria)?;
    let saliency = load_saliency(saliency.as_ref())?;
    let reference = reference.as_deref().map(load_layout).transpose()?;
    if let Some(dir) = batch {
        let mut bundles = Vec::new();
        for p in json_files(&dir)? {
            let m = evaluate(&load_layout(&p)?, &criteria, reference.as_ref(), saliency.as_ref())?;
            let mut row = serde_json::to_value(m)?;
            row["file"] = json!(p.file_name().map(|f| f.to_string_lossy()));
            println!("{row}");
            bundles.push(m);
        }
        println!("{}", mean_bundle(&bundles));
        return Ok(());
    }
    let layout = load_layout(input.as_deref().expect("clap enforces --input"))?;
    let m = evaluate(&layout, &criteria, reference.as_ref(), saliency.as_ref())?;
    println!("{}", serde_json::to_string(&m)?);
    Ok(())
}

fn run_render(
    layout: &Path,
    grid: Option<PathBuf>,
    grid_id: Option<String>,
    relations: bool,
    out: &Path,
) -> Result<()> {
    let layout = load_layout(layout)?;
    let index = grid
        .as_deref()
        .map(|p| read(p).and_then(|b| GridIndex::from_json(&b)))
        .transpose()?;
    let grid = match (&index, &grid_id) {
        (Some(ix), Some(id)) => Some(
            &ix.get(id)
                .ok_or_else(|| Error::InvalidGridIndex(format!("no grid with source id `{id}`")))?
                .grid,
        ),
        _ => None,
    };
    let rel = relations.then(|| extract_alignments(&layout, RectifyConfig::default().align_angle_deg));
    write(out, &render_svg(&layout, &RenderStyle::default(), grid, rel.as_ref()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BuildGrids { corpus, gutter, out } => build_grids(&corpus, gutter, &out),
        Command::Rectify {
            input,
            criteria,
            grids,
            out,
            config,
            saliency,
            exemplars,
            outer_iters,
            adam_iters,
            eq3_literal,
            reduce_blank,
            emit_all,
            trace,
            dump_relations,
        } => run_rectify(RectifyArgs {
            input,
            criteria,
            grids,
            out,
            config,
            saliency,
            exemplars,
            outer_iters,
            adam_iters,
            eq3_literal,
            reduce_blank,
            emit_all,
            trace,
            dump_relations,
        }),
        Command::Evaluate {
            input,
            reference,
            criteria,
            saliency,
            batch,
        } => run_evaluate(input, reference, &criteria, saliency, batch),
        Command::Render {
            layout,
            grid,
            grid_id,
            relations,
            out,
        } => run_render(&layout, grid, grid_id, relations, &out),
        Command::RenderDiff { before, after, out } => {
            let svg = render_diff(&load_layout(&before)?, &load_layout(&after)?, &RenderStyle::default())?;
            write(&out, &svg)
        }
    }
}

/// 2 for bad inputs, 3 for numeric failures, 1 otherwise.
fn exit_code(e: &Error) -> u8 {
    match e {
        e if e.is_numeric() => 3,
        Error::NotImplemented(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
