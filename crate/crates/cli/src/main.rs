//! `fixgraph` command-line tool.
//!
//! Exit status: 0 on success, 1 when the input is rejected (the reason code
//! is printed on stderr as `rejected: CODE: detail`), 2 on I/O or parse
//! errors.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use fixgraph::catalog::{generators, CatalogError, Params};
use fixgraph::census::{run_census, workers_from_env, CensusBounds};
use fixgraph::fpdata::{chi_y, chi_y_at, index_counts, invariant_report, FixedPointData};
use fixgraph::operations::{replay, OperationTrace};
use fixgraph::plumbing::{
    derived_graph, realize, t2_weights, verify_conditions, verify_property_a, PlumbingError,
    PlumbingSequence, T2Weights,
};
use fixgraph::reduction::{realizability_check, Realizability};
use fixgraph::Multigraph;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(name = "fixgraph", version, about = "Fixed point multigraphs of circle actions on 4-manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the predicate table of a graph file.
    Validate {
        file: PathBuf,
        /// Read a plumbing file (or `realize` output) and check the sequences.
        #[arg(long)]
        derived: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Invariant report of a graph file or a fixed point text file.
    Invariants { file: PathBuf },
    /// Reduce to semi-free bases; traces on stdout, log on stderr.
    Reduce {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plumbing sequence, derived graph and torus weights per component.
    Realize {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a catalog graph, e.g. `generate cp2 --a 1 --b 1`. Use `list` to
    /// see the generators.
    Generate {
        name: String,
        /// Generator parameters as `--key value` or `key=value`; `--out FILE`
        /// and `--format dot` are accepted here too.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        params: Vec<String>,
    },
    /// chi_y sums at the sample points and whether they agree.
    CheckChiy { file: PathBuf },
    /// Enumerate every small cycle and push candidates through realization.
    Census {
        #[arg(long, default_value_t = 6)]
        max_vertices: usize,
        #[arg(long, default_value_t = 4)]
        max_label: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a trace file (one trace or an array) and print the graph.
    Replay {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

/// Input rejected on mathematical grounds (exit status 1).
#[derive(Debug)]
struct Rejected {
    reason: String,
    detail: String,
}

impl fmt::Display for Rejected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.reason, self.detail)
    }
}

impl std::error::Error for Rejected {}

fn reject(reason: impl Into<String>, detail: impl Into<String>) -> anyhow::Error {
    Rejected {
        reason: reason.into(),
        detail: detail.into(),
    }
    .into()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_graph(path: &Path) -> Result<Multigraph> {
    let text = read(path)?;
    Multigraph::from_json(&text).with_context(|| format!("{} is not a graph file", path.display()))
}

/// Graph files are JSON objects; anything else is read as fixed point text.
fn load_data(path: &Path) -> Result<FixedPointData> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        let g = Multigraph::from_json(&text)
            .with_context(|| format!("{} is not a graph file", path.display()))?;
        g.fixed_point_data()
            .map_err(|e| reject(plain_code(&e.to_string()), e.to_string()))
    } else {
        text.parse::<FixedPointData>()
            .with_context(|| format!("{} is not a fixed point file", path.display()))
    }
}

fn plain_code(s: &str) -> &'static str {
    if s.contains("two-regular") || s.contains("2-regular") {
        "two-regular"
    } else {
        "validation"
    }
}

fn plumbing_code(e: &PlumbingError) -> String {
    match e {
        PlumbingError::TooShort(_) => "too-short".into(),
        PlumbingError::NotBasis(_) => "not-basis".into(),
        PlumbingError::Orientation(_) => "orientation".into(),
        PlumbingError::RecurrenceFail(_) => "recurrence".into(),
        PlumbingError::ZeroFirstComponent(_) => "zero-first-component".into(),
        PlumbingError::NotCoprime(_) => "not-coprime".into(),
        PlumbingError::PatternVectorFail(..) => "pattern-vector".into(),
        PlumbingError::SiteMismatch(_) => "site-mismatch".into(),
        PlumbingError::PropertyAViolated(_) => "property-a".into(),
        PlumbingError::NoIntegerSolution(_) => "no-integer-solution".into(),
        PlumbingError::DuplicateVertex(_) => "duplicate-vertex".into(),
        PlumbingError::Overflow => "overflow".into(),
        PlumbingError::Rejected { reason, .. } => reason.code().into(),
        PlumbingError::DerivedMismatch(_) => "derived-mismatch".into(),
        PlumbingError::Graph(_) => "validation".into(),
    }
}

fn plumbing_reject(e: PlumbingError) -> anyhow::Error {
    let detail = match &e {
        PlumbingError::Rejected { detail, .. } => detail.clone(),
        other => other.to_string(),
    };
    reject(plumbing_code(&e), detail)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn validate(file: &Path, format: Format) -> Result<()> {
    let g = load_graph(file)?;
    let table = g.predicate_table();
    match format {
        Format::Dot => print!("{}", g.to_dot()),
        Format::Json => print!("{}", to_json(&table)),
        Format::Text => {
            for (name, ok) in [
                ("two-regular", table.two_regular),
                ("loop-free", table.loop_free),
                ("effective", table.effective),
                ("symmetric", table.symmetric),
                ("minimal", table.minimal),
                ("equal-modulo", table.equal_modulo),
            ] {
                println!("{name:<13} {}", yes_no(ok));
            }
        }
    }
    match table.first_failure() {
        None => {
            if format == Format::Text {
                println!("candidate     yes");
            }
            Ok(())
        }
        Some(code) => Err(reject(code, format!("{code} condition fails"))),
    }
}

/// One element of `realize` output.
#[derive(Serialize, Deserialize)]
struct Realized {
    plumbing: PlumbingSequence,
    graph: Multigraph,
    #[serde(skip_deserializing, default)]
    t2_weights: Vec<T2Weights>,
}

/// Sequences from a plumbing file, with the graphs they claim to describe
/// when the file is `realize` output.
fn load_sequences(text: &str) -> Result<Vec<(PlumbingSequence, Option<Multigraph>)>> {
    let value: Value = serde_json::from_str(text).context("plumbing file is not JSON")?;
    let items = match &value {
        Value::Array(items) => items,
        _ => bail!("plumbing file must be a JSON array"),
    };
    let looks_like = |key: &str| items.first().and_then(|v| v.get(key)).is_some();
    if looks_like("plumbing") {
        let rs: Vec<Realized> = serde_json::from_value(value).context("bad realize output")?;
        Ok(rs.into_iter().map(|r| (r.plumbing, Some(r.graph))).collect())
    } else if items.first().is_some_and(Value::is_array) {
        let ss: Vec<PlumbingSequence> = serde_json::from_value(value).context("bad plumbing file")?;
        Ok(ss.into_iter().map(|s| (s, None)).collect())
    } else {
        let s: PlumbingSequence = serde_json::from_value(value).context("bad plumbing file")?;
        Ok(vec![(s, None)])
    }
}

#[derive(Serialize)]
struct DerivedReport {
    sequences: usize,
    graph: Multigraph,
    fixed_points: Vec<Vec<i64>>,
}

fn validate_derived(file: &Path, format: Format) -> Result<()> {
    let seqs = load_sequences(&read(file)?)?;
    let mut union = Multigraph::empty();
    for (i, (s, claimed)) in seqs.iter().enumerate() {
        verify_conditions(s).map_err(plumbing_reject)?;
        verify_property_a(s).map_err(plumbing_reject)?;
        let g = derived_graph(s);
        if let Some(c) = claimed {
            if *c != g {
                return Err(reject(
                    "derived-mismatch",
                    format!("sequence {i} does not describe its listed graph"),
                ));
            }
        }
        union = union.disjoint_union(&g);
    }
    let data = union.fixed_point_data().map_err(|e| anyhow!(e))?;
    match format {
        Format::Dot => print!("{}", union.to_dot()),
        Format::Text => print!("{}", data.to_text()),
        Format::Json => print!(
            "{}",
            to_json(&DerivedReport {
                sequences: seqs.len(),
                fixed_points: data.points().iter().map(|p| p.weights().to_vec()).collect(),
                graph: union,
            })
        ),
    }
    Ok(())
}

fn invariants(file: &Path) -> Result<()> {
    let data = load_data(file)?;
    let report = invariant_report(&data).map_err(|e| reject("chi-y", e.to_string()))?;
    print!("{}", to_json(&report));
    Ok(())
}

fn accepted(g: &Multigraph) -> Result<fixgraph::reduction::ReductionResult> {
    match realizability_check(g) {
        Realizability::Accepted(r) => Ok(r),
        Realizability::Rejected(r) => Err(reject(r.reason.code(), r.detail)),
    }
}

fn reduce(file: &Path, out: Option<&Path>) -> Result<()> {
    let g = load_graph(file)?;
    let result = accepted(&g)?;
    for (i, c) in result.components.iter().enumerate() {
        eprintln!("component {}: {} steps", i + 1, c.log.len());
        for entry in &c.log {
            eprintln!("  {entry}");
        }
    }
    eprintln!("todd {}", result.todd);
    let traces: Vec<&OperationTrace> = result.traces();
    emit(out, &to_json(&traces))
}

fn realize_cmd(file: &Path, out: Option<&Path>) -> Result<()> {
    let g = load_graph(file)?;
    let seqs = realize(&g).map_err(plumbing_reject)?;
    let rows: Vec<Realized> = seqs
        .into_iter()
        .map(|s| Realized {
            graph: derived_graph(&s),
            t2_weights: t2_weights(&s),
            plumbing: s,
        })
        .collect();
    emit(out, &to_json(&rows))
}

struct GenerateArgs {
    params: Params,
    out: Option<PathBuf>,
    format: Format,
}

fn parse_generate_args(raw: &[String]) -> Result<GenerateArgs> {
    let mut args = GenerateArgs {
        params: Params::new(),
        out: None,
        format: Format::Json,
    };
    let mut it = raw.iter();
    while let Some(tok) = it.next() {
        let (key, value) = if let Some(rest) = tok.strip_prefix("--") {
            match rest.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = it.next().ok_or_else(|| anyhow!("--{rest} needs a value"))?;
                    (rest.to_string(), v.clone())
                }
            }
        } else if let Some((k, v)) = tok.split_once('=') {
            (k.to_string(), v.to_string())
        } else {
            bail!("unexpected argument {tok}; use --key value");
        };
        match key.as_str() {
            "out" => args.out = Some(PathBuf::from(value)),
            "format" => {
                args.format = Format::from_str(&value, true).map_err(|e| anyhow!("bad format: {e}"))?
            }
            _ => {
                let v: i64 = value
                    .parse()
                    .with_context(|| format!("parameter {key} must be an integer"))?;
                args.params.insert(key, v);
            }
        }
    }
    Ok(args)
}

#[derive(Serialize)]
struct Sidecar<'a> {
    name: &'a str,
    params: &'a Params,
    expected: &'a fixgraph::InvariantReport,
}

fn generate(name: &str, raw: &[String]) -> Result<()> {
    let reg = generators();
    if name == "list" {
        for g in reg.iter() {
            println!("{:<18} {:<12} {}", g.name(), g.params().join(","), g.summary());
        }
        return Ok(());
    }
    let args = parse_generate_args(raw)?;
    let entry = reg.entry(name, args.params).map_err(|e| match e {
        CatalogError::UnknownGenerator(_) | CatalogError::MissingParameter(_) => anyhow!(e),
        CatalogError::NotCoprime(..) => reject("not-coprime", e.to_string()),
        CatalogError::DegenerateWeight => reject("degenerate-weight", e.to_string()),
        other => reject("bad-parameter", other.to_string()),
    })?;
    let text = match args.format {
        Format::Dot => entry.graph.to_dot(),
        _ => {
            let mut s = entry.graph.to_json();
            s.push('\n');
            s
        }
    };
    if let Some(out) = &args.out {
        write(out, &text)?;
        let mut side = out.as_os_str().to_owned();
        side.push(".invariants.json");
        write(
            Path::new(&side),
            &to_json(&Sidecar {
                name: &entry.name,
                params: &entry.params,
                expected: &entry.expected,
            }),
        )?;
    } else {
        print!("{text}");
    }
    Ok(())
}

#[derive(Serialize)]
struct ChiyReport {
    samples: Vec<ChiySample>,
    expected: Vec<i64>,
    constant: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    chi: Option<Vec<i64>>,
}

#[derive(Serialize)]
struct ChiySample {
    t: String,
    values: Vec<String>,
}

fn check_chiy(file: &Path) -> Result<()> {
    let data = load_data(file)?;
    if data.is_empty() {
        return Err(reject("chi-y", "no fixed points"));
    }
    let samples: Vec<ChiySample> = [(2, 1), (3, 1), (5, 2)]
        .iter()
        .filter_map(|&(p, q)| {
            let t = BigRational::new(p.into(), q.into());
            chi_y_at(&data, &t).ok().map(|v| ChiySample {
                t: t.to_string(),
                values: v.iter().map(|x| x.to_string()).collect(),
            })
        })
        .collect();
    let expected: Vec<i64> = index_counts(&data)
        .iter()
        .enumerate()
        .map(|(i, &n)| if i % 2 == 0 { n as i64 } else { -(n as i64) })
        .collect();
    let verdict = chi_y(&data);
    let report = ChiyReport {
        samples,
        expected,
        constant: verdict.is_ok(),
        chi: verdict.as_ref().ok().cloned(),
    };
    print!("{}", to_json(&report));
    verdict.map(|_| ()).map_err(|e| reject("chi-y", e.to_string()))
}

fn census(max_vertices: usize, max_label: i64, out: Option<&Path>) -> Result<()> {
    let bounds = CensusBounds {
        max_vertices,
        max_label,
    };
    let report = run_census(bounds, workers_from_env());
    emit(out, &to_json(&report))?;
    if report.is_clean() {
        Ok(())
    } else {
        Err(reject(
            "census",
            format!(
                "{} of {} candidates failed",
                report.failures.len(),
                report.candidates
            ),
        ))
    }
}

fn replay_cmd(file: &Path, format: Format) -> Result<()> {
    let text = read(file)?;
    let value: Value = serde_json::from_str(&text).context("trace file is not JSON")?;
    let traces: Vec<OperationTrace> = if value.is_array() {
        serde_json::from_value(value).context("bad trace file")?
    } else {
        vec![serde_json::from_value(value).context("bad trace file")?]
    };
    let mut g = Multigraph::empty();
    for t in &traces {
        let out = replay(t).map_err(|e| reject("replay", e.to_string()))?;
        g = g.disjoint_union(&out);
    }
    match format {
        Format::Dot => print!("{}", g.to_dot()),
        _ => println!("{}", g.to_json()),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate {
            file,
            derived,
            format,
        } => {
            if derived {
                validate_derived(&file, format)
            } else {
                validate(&file, format)
            }
        }
        Command::Invariants { file } => invariants(&file),
        Command::Reduce { file, out } => reduce(&file, out.as_deref()),
        Command::Realize { file, out } => realize_cmd(&file, out.as_deref()),
        Command::Generate { name, params } => generate(&name, &params),
        Command::CheckChiy { file } => check_chiy(&file),
        Command::Census {
            max_vertices,
            max_label,
            out,
        } => census(max_vertices, max_label, out.as_deref()),
        Command::Replay { file, format } => replay_cmd(&file, format),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => match e.downcast_ref::<Rejected>() {
            Some(r) => {
                eprintln!("rejected: {r}");
                ExitCode::from(1)
            }
            None => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
    }
}
