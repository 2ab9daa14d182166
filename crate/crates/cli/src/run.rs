//! Dispatch from parsed arguments to library operations, and the report envelope.

use std::fs;
use std::path::Path;

use milnorkit::compactify::{sample_good, Template};
use milnorkit::determinacy::{newton_coordinate_change, verify_equisingular};
use milnorkit::error::Error;
use milnorkit::koszul::{dualize, kos_minus, kos_wedge, QuotientRing};
use milnorkit::local::LocalIdeal;
use milnorkit::milnor::{milnor_number, milnor_report, milnor_via_koszul, Germ, MilnorConfig};
use milnorkit::newton::verify_deligne_milnor_n0;
use serde_json::{json, Map, Value};

use crate::{CompactifyArgs, DeterminacyArgs, GermArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Input { path: String, source: Error },
    #[error(transparent)]
    Core(#[from] Error),
}

pub struct Outcome {
    pub result: Value,
    pub verified: bool,
    pub summary: String,
    pub precision: Option<Value>,
    /// Report field → library operation that produced it.
    pub provenance: Value,
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Shape(_) => "Shape",
        Error::IndexOutOfRange { .. } => "IndexOutOfRange",
        Error::Domain(_) => "Domain",
        Error::InvalidInput(_) => "InvalidInput",
        Error::NotFiniteLength { .. } => "NotFiniteLength",
        Error::PrecisionInsufficient { .. } => "PrecisionInsufficient",
        Error::SmoothGerm => "SmoothGerm",
        Error::JetBoundViolated { .. } => "JetBoundViolated",
        Error::LinearSolveFailed { .. } => "LinearSolveFailed",
        Error::SizeCap(_) => "SizeCap",
        Error::AllSamplesFailed { .. } => "AllSamplesFailed",
    }
}

/// Wraps a result with version, config and status; returns the exit code.
pub fn envelope(command: &str, config: Value, outcome: Result<Outcome, CliError>) -> (Value, u8) {
    let mut report = Map::new();
    report.insert("tool".into(), json!("milnorkit"));
    report.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    report.insert("command".into(), json!(command));
    report.insert("config".into(), config);
    let code = match outcome {
        Ok(o) => {
            if let Value::Object(fields) = o.result {
                report.extend(fields);
            }
            if let Some(p) = o.precision {
                report.insert("precision".into(), p);
            }
            report.insert("provenance".into(), o.provenance);
            let status = if o.verified { "verified" } else { "failed" };
            report.insert("status".into(), json!(status));
            eprintln!("milnorkit {command}: {} [{status}]", o.summary);
            if o.verified { 0 } else { 2 }
        }
        Err(e) => {
            let (k, code) = match &e {
                CliError::Io { .. } => ("Io", 1),
                CliError::Input { source, .. } | CliError::Core(source) => {
                    (kind(source), if matches!(source, Error::AllSamplesFailed { .. }) { 2 } else { 1 })
                }
            };
            report.insert("error".into(), json!({"kind": k, "message": e.to_string()}));
            report.insert("status".into(), json!(if code == 2 { "failed" } else { "error" }));
            eprintln!("milnorkit {command}: error: {e}");
            code
        }
    };
    (Value::Object(report), code)
}

fn load(path: &Path, args_d: Option<u32>, args_n: Option<u32>) -> Result<Germ, CliError> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: name.clone(), source })?;
    let g = Germ::from_json(&text).map_err(|source| CliError::Input { path: name.clone(), source })?;
    if args_d.is_none() && args_n.is_none() {
        return Ok(g);
    }
    let d = args_d.unwrap_or(g.degree_bound);
    let n = args_n.unwrap_or(g.base.precision());
    g.with_precision(d, n).map_err(|source| CliError::Input { path: name, source })
}

fn load_germ(a: &GermArgs) -> Result<Germ, CliError> {
    load(&a.input, a.degree_bound, a.pi_precision)
}

fn precision(g: &Germ) -> Value {
    json!({
        "model": g.base.model(),
        "p": g.base.p(),
        "pi_precision": g.base.precision(),
        "degree_bound": g.degree_bound,
    })
}

pub fn milnor(a: &GermArgs) -> Result<Outcome, CliError> {
    let g = load_germ(a)?;
    let rep = milnor_report(&g, MilnorConfig::default())?;
    let summary = format!(
        "mu = {}, t1 = {}, koszul = {}",
        rep.mu,
        rep.t1_length.map_or("-".to_string(), |v| v.to_string()),
        rep.mu_via_koszul.map_or("-".to_string(), |v| v.to_string()),
    );
    Ok(Outcome {
        verified: rep.agreement,
        result: serde_json::to_value(&rep).expect("report serializes"),
        summary,
        precision: Some(precision(&g)),
        provenance: json!({
            "mu": "milnor::milnor_number",
            "basis": "milnor::milnor_number",
            "t1_length": "milnor::t1_length",
            "mu_via_koszul": "milnor::milnor_via_koszul",
            "diagnostics": "milnor::validate",
        }),
    })
}

pub fn koszul_check(a: &GermArgs) -> Result<Outcome, CliError> {
    let g = load_germ(a)?;
    let ring = QuotientRing::new(LocalIdeal::new(g.base, g.num_vars(), g.degree_bound, g.f.clone())?);
    let u: Vec<_> = g.jacobian_matrix().into_iter().flatten().collect();
    let km = kos_minus(&ring, &u)?;
    let kw = kos_wedge(&ring, &u)?;
    let duality = dualize(&km) == kw && dualize(&kw) == km;
    let d_squared = km.check_d_squared()? && kw.check_d_squared()?;
    let mu = milnor_number(&g)?.mu;
    let koszul = if g.r == 1 { Some(milnor_via_koszul(&g)?) } else { None };
    let agreement = koszul.is_none_or(|k| k == mu as i64);
    Ok(Outcome {
        verified: duality && d_squared && agreement,
        result: json!({
            "duality_exact": duality,
            "d_squared_zero": d_squared,
            "ranks": km.degrees().map(|d| km.rank(d)).collect::<Vec<_>>(),
            "mu": mu,
            "mu_via_koszul": koszul,
            "agreement": agreement,
        }),
        summary: format!("duality {duality}, d² = 0 {d_squared}, mu = {mu}"),
        precision: Some(precision(&g)),
        provenance: json!({
            "duality_exact": "koszul::dualize, koszul::kos_minus, koszul::kos_wedge",
            "d_squared_zero": "koszul::FreeComplex::check_d_squared",
            "mu": "milnor::milnor_number",
            "mu_via_koszul": "milnor::milnor_via_koszul",
        }),
    })
}

pub fn determinacy(a: &DeterminacyArgs) -> Result<Outcome, CliError> {
    let f = load(&a.input[0], a.degree_bound, a.pi_precision)?;
    let g = load(&a.input[1], a.degree_bound, a.pi_precision)?;
    if g.base != f.base || g.n != f.n || g.r != f.r {
        return Err(Error::InvalidInput("f and g must share base ring, n and r".into()).into());
    }
    let g_eqs: Vec<_> = g.f.iter().map(|s| s.with_degree_bound(f.degree_bound)).collect();
    let run = newton_coordinate_change(&f, &g_eqs, a.target_order, a.force)?;
    let check = verify_equisingular(&f, &g_eqs, &run)?;
    let epsilon: Vec<_> = run.epsilon.iter().map(|e| e.to_literal()).collect();
    let mut result = serde_json::to_value(&run).expect("run serializes");
    result["epsilon"] = serde_json::to_value(epsilon).expect("series serialize");
    result["check"] = serde_json::to_value(&check).expect("check serializes");
    Ok(Outcome {
        verified: check.equisingular,
        summary: format!(
            "mu = {}, {} steps, verified to order {}{}",
            run.mu,
            run.steps.len(),
            run.verified_to,
            if run.forced { " (forced)" } else { "" }
        ),
        result,
        precision: Some(precision(&f)),
        provenance: json!({
            "steps": "determinacy::newton_coordinate_change",
            "epsilon": "determinacy::newton_coordinate_change",
            "check": "determinacy::verify_equisingular",
        }),
    })
}

pub fn dm0(a: &GermArgs) -> Result<Outcome, CliError> {
    let g = load_germ(a)?;
    let rep = verify_deligne_milnor_n0(&g)?;
    let summary = match &rep.skipped {
        Some(why) => format!("dim Phi0 = {}, skipped: {why}", rep.dim_phi0),
        None => format!("mu = {:?}, dim Phi0 = {}", rep.mu, rep.dim_phi0),
    };
    Ok(Outcome {
        verified: rep.verified != Some(false),
        result: serde_json::to_value(&rep).expect("report serializes"),
        summary,
        precision: Some(precision(&g)),
        provenance: json!({
            "mu": "milnor::milnor_number",
            "dim_phi0": "newton::dim_phi0",
            "polygon": "newton::newton_polygon",
            "tameness": "newton::tameness",
            "verified": "newton::verify_deligne_milnor_n0",
        }),
    })
}

pub fn compactify(a: &CompactifyArgs) -> Result<Outcome, CliError> {
    let g = load_germ(&a.germ)?;
    let lambda = match a.lambda.as_str() {
        "auto" => None,
        s => Some(s.parse::<u32>().map_err(|_| Error::InvalidInput(format!("--lambda {s}: expected auto or an integer")))?),
    };
    let q = a.q.unwrap_or(g.base.p());
    let template = Template::from_germ(&g, q, lambda)?;
    let rep = sample_good(&template, a.seed, a.samples, a.ext_degree)?;
    Ok(Outcome {
        verified: rep.good_found && rep.mu_preserved != Some(false),
        summary: format!(
            "first good sample {} of {}, {} failures, mu preserved {:?}",
            rep.first_good_sample, rep.samples, rep.failures, rep.mu_preserved
        ),
        result: serde_json::to_value(&rep).expect("report serializes"),
        precision: Some(precision(&g)),
        provenance: json!({
            "lambda": "compactify::Template::from_germ",
            "good_found": "compactify::sample_good",
            "bad_points": "compactify::Scanner::scan",
            "mu_preserved": "milnor::milnor_number",
        }),
    })
}
