//! `benchmake` command-line tool: split | evaluate | compare.
//!
//! Exit codes: 0 success, 1 data/file errors, 2 argument errors.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use benchmake::assign::PartitionOptions;
use benchmake::encode::{DatasetSource, EncodeOptions, LabelSource, Modality};
use benchmake::error::{Error, Result};
use benchmake::io::{self, TensorFile};
use benchmake::{evaluate_split, harness};

use report::{ConfigEcho, ReportFile};

#[derive(Parser)]
#[command(
    name = "benchmake",
    version,
    about = "Deterministic archetypal train/test partitioning and split evaluation"
)]
struct Cli {
    /// Worker threads (default: machine parallelism). Never changes
    /// numeric outputs.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition a dataset into archetypal test and remaining train sets
    Split(SplitArgs),
    /// Score an existing train/test split with seven divergence metrics
    Evaluate(EvaluateArgs),
    /// Compare the archetypal split against seeded random baselines
    Compare(CompareArgs),
}

#[derive(Args)]
struct EncodeFlags {
    /// Input modality: tabular | image | signal | sequence | graph
    #[arg(long, value_parser = parse_modality)]
    modality: Modality,

    /// First CSV row is a header (tabular, graph mode a)
    #[arg(long)]
    has_header: bool,
}

#[derive(Args)]
struct NmfFlags {
    /// Maximum factorisation iterations
    #[arg(long, default_value_t = 300)]
    max_iter: usize,

    /// Relative error-change stop threshold
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,

    /// Factor initialisation seed
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Distance batch size override (default: derived from worker count)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    batch_size: Option<u64>,
}

impl NmfFlags {
    fn options(&self) -> PartitionOptions {
        PartitionOptions {
            max_iterations: self.max_iter,
            tolerance: self.tol,
            seed: self.seed,
            batch_size: self.batch_size.map(|b| b as usize),
            ..PartitionOptions::default()
        }
    }
}

#[derive(Args)]
struct SplitArgs {
    #[command(flatten)]
    encode: EncodeFlags,

    /// Dataset file (CSV, line-delimited text, or tensor, per modality)
    #[arg(long)]
    input: PathBuf,

    /// Fraction of instances to place in the test set
    #[arg(long, value_parser = parse_fraction)]
    fraction: f64,

    /// Label file, one label per line
    #[arg(long)]
    labels: Option<PathBuf>,

    /// Zero-based CSV column holding labels (excluded from features)
    #[arg(long, conflicts_with = "labels")]
    label_column: Option<usize>,

    /// Per-graph node counts file (selects graph mode b)
    #[arg(long)]
    graph_sizes: Option<PathBuf>,

    /// Write only the index files, not the partitioned data
    #[arg(long)]
    indices_only: bool,

    /// Output directory (created if missing)
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,

    /// Also write a JSON report with the index lists
    #[arg(long)]
    report: Option<PathBuf>,

    #[command(flatten)]
    nmf: NmfFlags,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    encode: EncodeFlags,

    /// Training-set file
    #[arg(long)]
    train: PathBuf,

    /// Test-set file
    #[arg(long)]
    test: PathBuf,

    /// Zero-based CSV column holding labels in both files
    #[arg(long)]
    label_column: Option<usize>,

    /// Per-graph node counts for the train file (graph mode b)
    #[arg(long)]
    train_graph_sizes: Option<PathBuf>,

    /// Per-graph node counts for the test file (graph mode b)
    #[arg(long)]
    test_graph_sizes: Option<PathBuf>,

    /// Report output path (JSON)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    encode: EncodeFlags,

    /// Dataset file
    #[arg(long)]
    input: PathBuf,

    /// Test fractions, comma separated (e.g. 0.1,0.2,0.3)
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_fraction)]
    fractions: Vec<f64>,

    /// Random-baseline seed count (seeds 0..N-1)
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(2..))]
    seeds: u64,

    /// Zero-based CSV column holding labels (excluded from features)
    #[arg(long)]
    label_column: Option<usize>,

    /// Per-graph node counts file (selects graph mode b)
    #[arg(long)]
    graph_sizes: Option<PathBuf>,

    /// Report output path (JSON)
    #[arg(long)]
    out: PathBuf,

    #[command(flatten)]
    nmf: NmfFlags,
}

fn parse_modality(s: &str) -> Result<Modality> {
    s.parse()
}

fn parse_fraction(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s
        .parse()
        .map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!(
            "{v} is outside the open interval (0, 1)"
        ))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = benchmake::set_worker_threads(threads as usize) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Split(args) => cmd_split(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2u8 } else { 1u8 })
        }
    }
}

fn build_source(
    modality: Modality,
    input: &Path,
    has_header: bool,
    labels: Option<&Path>,
    label_column: Option<usize>,
    graph_sizes: Option<&Path>,
) -> Result<DatasetSource> {
    if graph_sizes.is_some() && modality != Modality::Graph {
        return Err(Error::Config(format!(
            "--graph-sizes only applies to the graph modality, not {modality}"
        )));
    }
    let labels = match (labels, label_column) {
        (Some(path), _) => Some(LabelSource::File(path.to_path_buf())),
        (None, Some(col)) => Some(LabelSource::Column(col)),
        (None, None) => None,
    };
    Ok(DatasetSource {
        modality,
        data_path: input.to_path_buf(),
        labels,
        options: EncodeOptions {
            has_header,
            graph_sizes: graph_sizes.map(|p| p.to_path_buf()),
        },
    })
}

fn cmd_split(args: SplitArgs) -> Result<()> {
    let source = build_source(
        args.encode.modality,
        &args.input,
        args.encode.has_header,
        args.labels.as_deref(),
        args.label_column,
        args.graph_sizes.as_deref(),
    )?;
    let dataset = benchmake::encode(&source)?;
    let opts = args.nmf.options();
    let partition =
        benchmake::partition_matrix(&dataset.matrix.values, args.fraction, &opts)?;

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::io(&args.out_dir, e))?;
    let mut test_sorted = partition.test_indices.clone();
    test_sorted.sort_unstable();
    io::write_lines(&args.out_dir.join("train_indices.csv"), &partition.train_indices)?;
    io::write_lines(&args.out_dir.join("test_indices.csv"), &test_sorted)?;

    if !args.indices_only {
        write_data_subsets(
            &source,
            &partition.train_indices,
            &test_sorted,
            &args.out_dir,
        )?;
        if let Some(labels) = &dataset.labels {
            let select = |idx: &[usize]| -> Vec<String> {
                idx.iter().map(|&i| labels[i].clone()).collect()
            };
            io::write_lines(
                &args.out_dir.join("train_labels.csv"),
                &select(&partition.train_indices),
            )?;
            io::write_lines(&args.out_dir.join("test_labels.csv"), &select(&test_sorted))?;
        }
    }

    if let Some(report_path) = &args.report {
        let mut report = ReportFile::new("split", source.modality);
        report.fraction = Some(args.fraction);
        report.k = Some(partition.k);
        report.config = Some(ConfigEcho::from(&opts));
        report.train_indices = Some(partition.train_indices.clone());
        report.test_indices = Some(test_sorted);
        report.write(report_path)?;
    }

    println!(
        "n={} d={} k={}",
        dataset.matrix.n_instances(),
        dataset.matrix.n_features(),
        partition.k
    );
    Ok(())
}

/// Rewrite the selected instances of the input in its own format.
fn write_data_subsets(
    source: &DatasetSource,
    train: &[usize],
    test: &[usize],
    out_dir: &Path,
) -> Result<()> {
    let ext = source
        .data_path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("dat")
        .to_string();
    let train_path = out_dir.join(format!("train_data.{ext}"));
    let test_path = out_dir.join(format!("test_data.{ext}"));

    let graph_b = source.modality == Modality::Graph && source.options.graph_sizes.is_some();
    let line_based = matches!(
        source.modality,
        Modality::Tabular | Modality::Sequence
    ) || (source.modality == Modality::Graph && !graph_b);

    if line_based {
        let lines = io::read_lines(&source.data_path)?;
        let (header, data): (Option<&String>, &[String]) = if source.options.has_header {
            (lines.first(), &lines[1..])
        } else {
            (None, &lines[..])
        };
        let write_subset = |path: &Path, idx: &[usize]| -> Result<()> {
            let mut out: Vec<String> = Vec::with_capacity(idx.len() + 1);
            if let Some(h) = header {
                out.push(h.clone());
            }
            for &i in idx {
                out.push(data[i].clone());
            }
            io::write_lines(path, &out)
        };
        write_subset(&train_path, train)?;
        write_subset(&test_path, test)?;
        return Ok(());
    }

    let tensor = TensorFile::read(&source.data_path)?;
    if graph_b {
        let sizes = io::read_graph_sizes(source.options.graph_sizes.as_ref().unwrap())?;
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        offsets.push(0usize);
        for &s in &sizes {
            offsets.push(offsets.last().unwrap() + s);
        }
        let f = tensor.instance_len();
        let write_subset = |data_path: &Path, sizes_path: &Path, idx: &[usize]| -> Result<()> {
            let mut payload = Vec::new();
            let mut subset_sizes = Vec::with_capacity(idx.len());
            for &g in idx {
                payload
                    .extend_from_slice(&tensor.payload[offsets[g] * f..offsets[g + 1] * f]);
                subset_sizes.push(sizes[g]);
            }
            let nodes: usize = subset_sizes.iter().sum();
            TensorFile::new(vec![nodes as u64, f as u64], payload)?.write(data_path)?;
            io::write_lines(sizes_path, &subset_sizes)
        };
        write_subset(
            &train_path,
            &out_dir.join("train_graph_sizes.csv"),
            train,
        )?;
        write_subset(&test_path, &out_dir.join("test_graph_sizes.csv"), test)?;
        return Ok(());
    }

    // image / signal: slice whole instance blocks
    let block = tensor.instance_len();
    let write_subset = |path: &Path, idx: &[usize]| -> Result<()> {
        let mut payload = Vec::with_capacity(idx.len() * block);
        for &i in idx {
            payload.extend_from_slice(&tensor.payload[i * block..(i + 1) * block]);
        }
        let mut dims = tensor.dims.clone();
        dims[0] = idx.len() as u64;
        TensorFile::new(dims, payload)?.write(path)
    };
    write_subset(&train_path, train)?;
    write_subset(&test_path, test)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let train_source = build_source(
        args.encode.modality,
        &args.train,
        args.encode.has_header,
        None,
        args.label_column,
        args.train_graph_sizes.as_deref(),
    )?;
    let test_source = build_source(
        args.encode.modality,
        &args.test,
        args.encode.has_header,
        None,
        args.label_column,
        args.test_graph_sizes.as_deref(),
    )?;
    let (train, test) = benchmake::encode::encode_pair(&train_source, &test_source)?;
    let metrics = evaluate_split(&train.matrix.values, &test.matrix.values)?;

    let mut report = ReportFile::new("evaluate", args.encode.modality);
    report.metrics = Some(metrics);
    report.write(&args.out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let source = build_source(
        args.encode.modality,
        &args.input,
        args.encode.has_header,
        None,
        args.label_column,
        args.graph_sizes.as_deref(),
    )?;
    let opts = args.nmf.options();
    let comparisons = harness::sweep(&source, &args.fractions, args.seeds as usize, &opts)?;

    let mut report = ReportFile::new("compare", args.encode.modality);
    if args.fractions.len() == 1 {
        report.fraction = Some(args.fractions[0]);
    }
    report.config = Some(ConfigEcho::from(&opts));
    report.comparisons = Some(comparisons);
    report.write(&args.out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}
