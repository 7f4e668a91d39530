use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Value};
use sheaf_sampling::sampling::{self, SamplingError};
use sheaf_sampling::zoo::{self, SplineParams};
use sheaf_sampling::{CellularSheaf, Complex64, NumericOptions, Scalar, Tolerance, Vertex};
use thiserror::Error;

use crate::document::{AnyMorphism, AnySheaf, Document, DocumentError, FORMAT_VERSION};
use crate::{Cli, Command, Family, Field, NumericArgs};

pub const DEFAULT_VALIDATE_TOL: f64 = 1e-9;

/// `--json` output carries the document format version it was produced for.
pub const SCHEMA_VERSION: &str = FORMAT_VERSION;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

impl From<DocumentError> for CliError {
    fn from(e: DocumentError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }
}

fn domain(e: impl Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn sampling_error(e: SamplingError) -> CliError {
    match e {
        SamplingError::UnsupportedSupport(_) => CliError::Usage(e.to_string()),
        e => domain(e),
    }
}

macro_rules! with_sheaf {
    ($sheaf:expr, $f:ident => $body:expr) => {
        match $sheaf {
            AnySheaf::Real($f) => $body,
            AnySheaf::Complex($f) => $body,
        }
    };
}

macro_rules! with_morphism {
    ($m:expr, $v:ident => $body:expr) => {
        match $m {
            AnyMorphism::Real($v) => $body,
            AnyMorphism::Complex($v) => $body,
        }
    };
}

pub fn load(path: &Path) -> Result<Document, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    Document::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn describe(t: Tolerance) -> String {
    match t {
        Tolerance::Auto => "auto".into(),
        Tolerance::Absolute(t) => format!("{t:e}"),
    }
}

fn options(numeric: NumericArgs) -> NumericOptions {
    NumericOptions {
        tolerance: numeric.tolerance.0,
        ..NumericOptions::default()
    }
}

fn support_of(flag: Option<Vec<Vertex>>, doc: &Document) -> Result<Vec<Vertex>, CliError> {
    flag.or_else(|| doc.sample_support.clone()).ok_or_else(|| {
        CliError::Usage("no --support given and the document has no sample_support".into())
    })
}

fn entry<S: Scalar>(x: S) -> String {
    let [re, im] = x.to_parts();
    match S::FIELD {
        sheaf_sampling::ScalarField::Real => format!("{re:+.6}"),
        sheaf_sampling::ScalarField::Complex => format!("{re:+.6}{im:+.6}i"),
    }
}

fn print_json(out: &mut dyn Write, v: &Value) -> Result<(), CliError> {
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(v).expect("json values serialize")
    )?;
    Ok(())
}

/// Runs one command. `Ok` carries the exit code of a command that ran to
/// completion; `Err` is reported on standard error.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Validate {
            file,
            tolerance,
            json,
        } => validate(&load(&file)?, tolerance, json, out),
        Command::Cohomology {
            file,
            max_degree,
            numeric,
            basis,
            force,
            json,
        } => cohomology(
            &load(&file)?,
            max_degree,
            numeric,
            basis,
            force,
            json,
            out,
            err,
        ),
        Command::Nyquist {
            file,
            support,
            morphism,
            full_stalk,
            numeric,
            json,
        } => {
            let doc = load(&file)?;
            let mdoc = morphism.as_deref().map(load).transpose()?;
            nyquist(&doc, support, mdoc.as_ref(), full_stalk, numeric, json, out)
        }
        Command::Obstruction {
            file,
            support,
            numeric,
            json,
        } => obstruction(&load(&file)?, support, numeric, json, out),
        Command::Zoo {
            family,
            out: path,
            support,
        } => {
            let mut doc = zoo_document(family)?;
            doc.sample_support = support;
            match path {
                Some(p) => {
                    fs::write(&p, doc.emit())?;
                    writeln!(out, "wrote {}", p.display())?;
                }
                None => out.write_all(doc.emit().as_bytes())?,
            }
            Ok(0)
        }
    }
}

pub fn validate(
    doc: &Document,
    tol: f64,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let x = doc.complex()?;
    let mut violations = Vec::new();
    let mut summary = Vec::new();
    if doc.sheaf.is_some() {
        let s = doc.sheaf()?;
        violations.extend(with_sheaf!(&s, f => f.validate(tol)));
        let (field, dims, d2) = with_sheaf!(&s, f => (
            f.field(),
            (0..=x.dimension().unwrap_or(0)).map(|k| f.cochain_dim(k)).collect::<Vec<_>>(),
            f.d_squared_check(),
        ));
        summary.push(format!(
            "sheaf: {field}, cochain dimensions {dims:?}, d^2 deviation {d2:.3e}"
        ));
    }
    if doc.morphism.is_some() {
        let m = doc.morphism(None)?;
        violations.extend(with_morphism!(&m, m => sampling::validate_morphism(m, tol)));
        summary.push("morphism: present".into());
    }
    if doc.edge_lengths.is_some() || doc.edge_directions.is_some() {
        doc.metric_graph()?;
        summary.push("metric: edge lengths valid".into());
    }
    if let Some(y) = &doc.sample_support {
        if let Some(v) = y
            .iter()
            .find(|&&v| !x.contains(&sheaf_sampling::Face::vertex(v)))
        {
            return Err(CliError::Usage(format!(
                "sample_support contains {v}, which is not a vertex"
            )));
        }
    }
    let code = i32::from(!violations.is_empty());
    if json {
        print_json(
            out,
            &json!({
                "schema": SCHEMA_VERSION,
                "tolerance": tol,
                "valid": violations.is_empty(),
                "violations": violations,
            }),
        )?;
        return Ok(code);
    }
    writeln!(out, "tolerance: {tol:e}")?;
    let counts: Vec<usize> = (0..=x.dimension().unwrap_or(0))
        .map(|k| x.num_faces(k))
        .collect();
    writeln!(out, "complex: faces per dimension {counts:?}")?;
    for line in summary {
        writeln!(out, "{line}")?;
    }
    for v in &violations {
        writeln!(out, "violation: {v}")?;
    }
    if violations.is_empty() {
        writeln!(out, "valid")?;
    } else {
        writeln!(out, "{} violation(s)", violations.len())?;
    }
    Ok(code)
}

#[allow(clippy::too_many_arguments)]
pub fn cohomology(
    doc: &Document,
    max_degree: Option<usize>,
    numeric: NumericArgs,
    basis: bool,
    force: bool,
    json: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let s = doc.sheaf()?;
    let opts = options(numeric);
    let top = max_degree.unwrap_or_else(|| with_sheaf!(&s, f => f.base().dimension().unwrap_or(0)));
    let degrees = with_sheaf!(&s, f => cohomology_report(f, top, opts, basis)?);
    let warnings: Vec<String> = degrees
        .iter()
        .filter(|d| !d.well_conditioned)
        .map(|d| {
            format!(
                "H{}: rank decision is ill-conditioned (gap ratio {:.3e} below {:.1e})",
                d.degree,
                d.gap_ratio,
                opts.min_gap_ratio.unwrap_or(0.0)
            )
        })
        .collect();
    for w in &warnings {
        writeln!(err, "warning: {w}")?;
    }
    let code = i32::from(!warnings.is_empty() && !force);
    if json {
        let degrees: Vec<Value> = degrees
            .iter()
            .map(|d| {
                json!({
                    "degree": d.degree,
                    "dim": d.dim,
                    "tolerance_used": d.tolerance_used,
                    "gap_ratio": d.gap_ratio,
                    "well_conditioned": d.well_conditioned,
                    "basis": d.basis_json,
                })
            })
            .collect();
        print_json(
            out,
            &json!({
                "schema": SCHEMA_VERSION,
                "tolerance": describe(opts.tolerance),
                "degrees": degrees,
                "warnings": warnings,
            }),
        )?;
        return Ok(code);
    }
    writeln!(out, "tolerance: {}", describe(opts.tolerance))?;
    for d in &degrees {
        writeln!(out, "H{}: {}", d.degree, d.dim)?;
        writeln!(
            out,
            "  threshold {:.3e}, gap ratio {:.3e}",
            d.tolerance_used, d.gap_ratio
        )?;
        for line in &d.basis_text {
            writeln!(out, "  {line}")?;
        }
    }
    Ok(code)
}

struct DegreeReport {
    degree: usize,
    dim: usize,
    tolerance_used: f64,
    gap_ratio: f64,
    well_conditioned: bool,
    basis_text: Vec<String>,
    basis_json: Vec<Value>,
}

fn cohomology_report<S: Scalar>(
    f: &CellularSheaf<S>,
    top: usize,
    opts: NumericOptions,
    basis: bool,
) -> Result<Vec<DegreeReport>, CliError> {
    let mut reports = Vec::new();
    for k in 0..=top {
        let h = f.cohomology(k, opts.unchecked()).map_err(domain)?;
        let mut basis_text = Vec::new();
        let mut basis_json = Vec::new();
        if basis {
            let space = f.cochain_space(k);
            for (j, v) in h.basis_vectors().iter().enumerate() {
                basis_text.push(format!("basis {j}:"));
                let mut by_face = serde_json::Map::new();
                for b in &space.blocks {
                    let vals: Vec<S> = (b.offset..b.offset + b.dim).map(|i| v[i]).collect();
                    let shown: Vec<String> = vals.iter().map(|&x| entry(x)).collect();
                    basis_text.push(format!("  {}: [{}]", b.face, shown.join(", ")));
                    by_face.insert(
                        b.face.to_string(),
                        json!(vals.iter().map(|x| x.to_parts()).collect::<Vec<_>>()),
                    );
                }
                basis_json.push(Value::Object(by_face));
            }
        }
        reports.push(DegreeReport {
            degree: k,
            dim: h.dim,
            tolerance_used: h.tolerance_used,
            gap_ratio: h.gap_ratio(),
            well_conditioned: h.is_well_conditioned(opts.min_gap_ratio),
            basis_text,
            basis_json,
        });
    }
    Ok(reports)
}

fn sampling_for(
    sheaf: AnySheaf,
    doc: &Document,
    support: Option<Vec<Vertex>>,
    mdoc: Option<&Document>,
    full_stalk: bool,
) -> Result<AnyMorphism, CliError> {
    if full_stalk {
        let y = support_of(support, doc)?;
        return Ok(match sheaf {
            AnySheaf::Real(f) => {
                AnyMorphism::Real(sampling::full_stalk_sampling(&f, &y).map_err(sampling_error)?)
            }
            AnySheaf::Complex(f) => {
                AnyMorphism::Complex(sampling::full_stalk_sampling(&f, &y).map_err(sampling_error)?)
            }
        });
    }
    match mdoc {
        Some(m) => Ok(m.morphism(Some(sheaf))?),
        None if doc.morphism.is_some() => Ok(doc.morphism(Some(sheaf))?),
        None => Err(CliError::Usage(
            "nyquist needs --full-stalk, --morphism or a morphism in the document".into(),
        )),
    }
}

pub fn nyquist(
    doc: &Document,
    support: Option<Vec<Vertex>>,
    mdoc: Option<&Document>,
    full_stalk: bool,
    numeric: NumericArgs,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let opts = options(numeric);
    let m = sampling_for(doc.sheaf()?, doc, support, mdoc, full_stalk)?;
    let violations = with_morphism!(&m, m => sampling::validate_morphism(m, DEFAULT_VALIDATE_TOL));
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(domain(format!(
            "not a sheaf morphism:\n{}",
            lines.join("\n")
        )));
    }
    let report =
        with_morphism!(&m, m => sampling::nyquist_check(m, opts)).map_err(sampling_error)?;
    let code = i32::from(!report.perfect);
    if json {
        let mut v = serde_json::to_value(&report).expect("reports serialize");
        v["schema"] = json!(SCHEMA_VERSION);
        v["tolerance"] = json!(describe(opts.tolerance));
        print_json(out, &v)?;
        return Ok(code);
    }
    writeln!(
        out,
        "tolerance: {} (used {:.3e})",
        describe(opts.tolerance),
        report.tolerance_used
    )?;
    writeln!(out, "gap ratio: {:.3e}", report.gap_ratio)?;
    writeln!(out, "ambiguity: {}", report.ambiguity_dim)?;
    writeln!(out, "redundancy: {}", report.redundancy_dim)?;
    writeln!(out, "verdict: {}", report.verdict)?;
    Ok(code)
}

pub fn obstruction(
    doc: &Document,
    support: Option<Vec<Vertex>>,
    numeric: NumericArgs,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let opts = options(numeric);
    let y = support_of(support, doc)?;
    let s = doc.sheaf()?;
    let report =
        with_sheaf!(&s, f => sampling::obstruction_check(f, &y, opts)).map_err(sampling_error)?;
    let verdict = if report.obstructed {
        "OBSTRUCTED"
    } else {
        "CLEAR"
    };
    let code = i32::from(report.obstructed);
    if json {
        let mut v = serde_json::to_value(&report).expect("reports serialize");
        v["schema"] = json!(SCHEMA_VERSION);
        v["tolerance"] = json!(describe(opts.tolerance));
        v["verdict"] = json!(verdict);
        print_json(out, &v)?;
        return Ok(code);
    }
    writeln!(
        out,
        "tolerance: {} (used {:.3e})",
        describe(opts.tolerance),
        report.tolerance_used
    )?;
    writeln!(out, "gap ratio: {:.3e}", report.gap_ratio)?;
    writeln!(out, "H0(F_Y): {}", report.dim)?;
    writeln!(out, "verdict: {verdict}")?;
    Ok(code)
}

fn usage(e: impl Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn with_field(
    field: Field,
    real: impl FnOnce() -> Result<CellularSheaf<f64>, zoo::ZooError>,
    complex: impl FnOnce() -> Result<CellularSheaf<Complex64>, zoo::ZooError>,
) -> Result<Document, CliError> {
    Ok(match field {
        Field::Real => Document::with_sheaf(&real().map_err(usage)?),
        Field::Complex => Document::with_sheaf(&complex().map_err(usage)?),
    })
}

pub fn zoo_document(family: Family) -> Result<Document, CliError> {
    match family {
        Family::Grouping {
            n,
            window,
            dim,
            field,
        } => with_field(
            field,
            || zoo::grouping_sheaf(n, window, dim),
            || zoo::grouping_sheaf(n, window, dim),
        ),
        Family::Pl { graph, field } => {
            let g = load(&graph)?.complex()?;
            with_field(
                field,
                || zoo::pl_sheaf(g.clone()),
                || zoo::pl_sheaf(g.clone()),
            )
        }
        Family::Transmission { graph, wavenumber } => {
            let mg = load(&graph)?.metric_graph()?;
            let k = Complex64::new(wavenumber.0, wavenumber.1);
            let f = zoo::transmission_line_sheaf(&mg, k).map_err(usage)?;
            let mut doc = Document::with_sheaf(&f);
            doc.set_metric(&mg);
            Ok(doc)
        }
        Family::Spline {
            n,
            degree,
            spacing,
            field,
        } => {
            let p = SplineParams { degree, spacing };
            with_field(
                field,
                || zoo::spline_sheaf(n, p),
                || zoo::spline_sheaf(n, p),
            )
        }
    }
}
