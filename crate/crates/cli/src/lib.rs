//! The `segfilter` command line: segment inspection, page filtering, corpus
//! evaluation and profile validation.
//!
//! Exit codes: 0 on success, 1 for bad input or arguments, 2 when fetching a
//! page over the network fails.

pub mod fetch;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use segfilter::dom::{parse_html, serialize_html, PageDocument};
use segfilter::eval::{
    aggregate, page_result, render_table, session_metrics, LabelSet, MetricsRow, PageResult,
    SegmentLabel, Summary,
};
use segfilter::export::{report_json, segments_json, to_json};
use segfilter::filter::{
    filter_page, Counting, Disposition, FilterConfig, FilterMode, DEFAULT_DUMMY_MESSAGE,
};
use segfilter::profile::{load_profile, ProfileBag};
use segfilter::segment::{segment_page, SegmenterConfig};

use crate::fetch::{fetch_url, FetchConfig, FetchError};

#[derive(Debug, Parser)]
#[command(
    name = "segfilter",
    version,
    about = "Split web pages into segments and filter them against a keyword profile"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List a page's segments as JSON.
    Segment(SegmentArgs),
    /// Replace segments the profile rejects with placeholders.
    Filter(FilterArgs),
    /// Compare filter decisions with labelled pages and report session metrics.
    Eval(EvalArgs),
    /// Check that a profile file is valid.
    ProfileCheck {
        /// Profile JSON file.
        path: PathBuf,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// HTML file to read.
    file: Option<PathBuf>,
    /// Fetch the page from this http(s) URL instead.
    #[arg(long)]
    url: Option<String>,
}

#[derive(Debug, Args)]
struct SegmenterOpts {
    /// Characters per line when measuring text density.
    #[arg(long, default_value_t = 80)]
    wrap_width: usize,
    /// Largest density difference at which neighbouring blocks merge.
    #[arg(long, default_value_t = 2.0)]
    merge_threshold: f64,
    /// Keep segments with no text, links or images.
    #[arg(long)]
    keep_empty: bool,
}

impl SegmenterOpts {
    fn config(&self) -> Result<SegmenterConfig> {
        let cfg = SegmenterConfig {
            wrap_width: self.wrap_width,
            merge_threshold: self.merge_threshold,
            drop_empty: !self.keep_empty,
            ..SegmenterConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Block,
    Linkhide,
}

impl From<Mode> for FilterMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Block => FilterMode::Block,
            Mode::Linkhide => FilterMode::LinkHide,
        }
    }
}

#[derive(Debug, Args)]
struct SegmentArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    segmenter: SegmenterOpts,
    /// Write the listing here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FilterArgs {
    #[command(flatten)]
    source: Source,
    /// Profile JSON file.
    #[arg(long)]
    profile: PathBuf,
    /// Use this threshold instead of the profile's.
    #[arg(long, allow_negative_numbers = true)]
    threshold: Option<i64>,
    #[arg(long, value_enum, default_value = "block")]
    mode: Mode,
    /// Count each keyword once per segment component, not once per occurrence.
    #[arg(long)]
    unique_terms: bool,
    /// Text shown in place of a blocked segment.
    #[arg(long, default_value = DEFAULT_DUMMY_MESSAGE)]
    dummy_message: String,
    /// Also write the per-segment score report (JSON) here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the filtered page here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    segmenter: SegmenterOpts,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Corpus manifest JSON.
    #[arg(long)]
    manifest: PathBuf,
    /// Profile JSON file.
    #[arg(long)]
    profile: PathBuf,
    /// Use this threshold instead of the profile's.
    #[arg(long, allow_negative_numbers = true)]
    threshold: Option<i64>,
    #[arg(long, value_enum, default_value = "block")]
    mode: Mode,
    /// Count each keyword once per segment component, not once per occurrence.
    #[arg(long)]
    unique_terms: bool,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
    /// Write the result here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    segmenter: SegmenterOpts,
}

/// Runs the command line with the process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the command line; `argv` includes the program name.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version arrive here too, on stdout with status 0.
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "segfilter: {e:#}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<FetchError>() {
        None | Some(FetchError::UnsupportedUrl(_)) => 1,
        Some(_) => 2,
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Segment(args) => {
            let scfg = args.segmenter.config()?;
            let doc = read_page(&args.source)?;
            let listing = segments_json(&segment_page(&doc, &scfg));
            emit(out, args.output.as_deref(), listing.as_bytes())
        }
        Command::Filter(args) => {
            let scfg = args.segmenter.config()?;
            let bag = read_profile(&args.profile)?;
            let doc = read_page(&args.source)?;
            let fcfg = FilterConfig {
                mode: args.mode.into(),
                dummy_message: args.dummy_message,
                threshold_override: args.threshold,
                counting: counting(args.unique_terms),
            };
            let page = filter_page(&doc, &bag, &scfg, &fcfg);
            emit(out, args.output.as_deref(), &serialize_html(&page.document))?;
            if let Some(path) = &args.report {
                write_atomic(path, report_json(&page).as_bytes())?;
            }
            Ok(())
        }
        Command::Eval(args) => {
            let scfg = args.segmenter.config()?;
            let bag = read_profile(&args.profile)?;
            let fcfg = FilterConfig {
                mode: args.mode.into(),
                threshold_override: args.threshold,
                counting: counting(args.unique_terms),
                ..FilterConfig::default()
            };
            let report = evaluate(&args.manifest, &bag, &scfg, &fcfg)?;
            let text = if args.json {
                to_json(&report)
            } else {
                render_table(&report.sessions, Some(&report.summary))
            };
            emit(out, args.output.as_deref(), text.as_bytes())
        }
        Command::ProfileCheck { path } => {
            let bag = read_profile(&path)?;
            writeln!(
                out,
                "{}: ok ({} liked, {} unliked, threshold {})",
                path.display(),
                bag.like().len(),
                bag.unlike().len(),
                bag.threshold()
            )?;
            Ok(())
        }
    }
}

fn counting(unique_terms: bool) -> Counting {
    if unique_terms {
        Counting::UniqueTerms
    } else {
        Counting::Occurrences
    }
}

fn read_profile(path: &Path) -> Result<ProfileBag> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            bail!("profile not found: {}", path.display())
        }
        Err(e) => return Err(e).with_context(|| format!("reading {}", path.display())),
    };
    load_profile(&bytes).with_context(|| format!("in {}", path.display()))
}

fn read_page(source: &Source) -> Result<PageDocument> {
    match (&source.file, &source.url) {
        (Some(path), _) => read_page_file(path),
        (None, Some(url)) => {
            let bytes = fetch_url(url, &FetchConfig::from_env())
                .with_context(|| format!("fetching {url}"))?;
            Ok(parse_html(&bytes, Some(url))?)
        }
        (None, None) => bail!("no page given"),
    }
}

fn read_page_file(path: &Path) -> Result<PageDocument> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_html(&bytes, None).with_context(|| format!("in {}", path.display()))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Writes through a temporary file in the target directory, then renames it
/// into place, so readers never see a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| e.error)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    sessions: Vec<SessionEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SessionEntry {
    id: String,
    pages: Vec<PageEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PageEntry {
    file: PathBuf,
    labels: PathBuf,
}

#[derive(Debug, Serialize)]
pub struct EvalReport {
    pub sessions: Vec<MetricsRow>,
    pub pages: Vec<PageResult>,
    pub summary: Summary,
}

/// Filters every page listed in `manifest` and scores the decisions against
/// its labels. Paths in the manifest are relative to the manifest itself.
/// Pages are processed in parallel; rows come out in manifest order.
pub fn evaluate(
    manifest: &Path,
    bag: &ProfileBag,
    scfg: &SegmenterConfig,
    fcfg: &FilterConfig,
) -> Result<EvalReport> {
    let bytes = fs::read(manifest).with_context(|| format!("reading {}", manifest.display()))?;
    let parsed: Manifest = serde_json::from_slice(&bytes)
        .with_context(|| format!("malformed manifest {}", manifest.display()))?;
    let base = manifest.parent().unwrap_or(Path::new("."));

    let mut sessions = Vec::new();
    let mut pages = Vec::new();
    for session in &parsed.sessions {
        let results = session
            .pages
            .par_iter()
            .map(|entry| evaluate_page(base, entry, bag, scfg, fcfg))
            .collect::<Result<Vec<_>>>()
            .with_context(|| format!("session {:?}", session.id))?;
        sessions.push(session_metrics(&session.id, &results)?);
        pages.extend(results);
    }
    let summary = aggregate(&sessions)?;
    Ok(EvalReport {
        sessions,
        pages,
        summary,
    })
}

fn evaluate_page(
    base: &Path,
    entry: &PageEntry,
    bag: &ProfileBag,
    scfg: &SegmenterConfig,
    fcfg: &FilterConfig,
) -> Result<PageResult> {
    let path = base.join(&entry.file);
    let page_id = page_id(&entry.file);
    let doc = read_page_file(&path)?;
    let dispositions: Vec<Disposition> = filter_page(&doc, bag, scfg, fcfg)
        .segments
        .into_iter()
        .map(|s| s.disposition)
        .collect();

    let label_path = base.join(&entry.labels);
    let raw = fs::read(&label_path).with_context(|| format!("reading {}", label_path.display()))?;
    let labels: Vec<SegmentLabel> = serde_json::from_slice(&raw)
        .with_context(|| format!("malformed labels {}", label_path.display()))?;
    let labels = LabelSet::new(labels).with_context(|| format!("in {}", label_path.display()))?;
    Ok(page_result(&page_id, &dispositions, &labels)?)
}

/// A page's id is its file name without the extension.
pub fn page_id(file: &Path) -> String {
    file.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}
