//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::audibility::{classify_isospectral_partners, polysign_region_check, Candidate};
use crate::error::{GeomError, Result};
use crate::invariants::{
    b_invariants, closed_form_invariants, detect_regime, elementary_symmetric, heat_invariants,
    PiMultiple, RegimeTag,
};
use crate::milnor::{group_from_ricci, lambda_from_ricci, MilnorData, RicciEigenvalues, RicciInversion};
use crate::rational::{self, frac, int, parse_rational, parse_triple, Rational};
use crate::spectra::{
    convergence_slope, distinctness_report, eigenvalue_set, fundamental_tone, heat_trace_sample,
    quotient_volume, truncated_heat_trace, QuotientSpec, TranslationLength,
};
use crate::tensor::{oracle_derivative_invariants, oracle_scalar_invariants};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SUITE_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN_ERROR: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "geomspec", version, about = "Curvature, heat invariants and spectra of locally homogeneous three-manifolds")]
pub struct CommandRequest {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct Metric {
    /// Milnor structure constants, e.g. `2,0,0` or `1/2,-1,3`.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Ricci eigenvalues, e.g. `2,-2,-2`.
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Quotient {
    #[arg(long)]
    pub family: u8,
    #[arg(long)]
    pub k: String,
    /// Translation length: `3/2`, `pi`, `2*pi`, `pi*sqrt(2)`, `pi/sqrt(6)`.
    #[arg(long)]
    pub v: String,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Group and sign data for structure constants or Ricci eigenvalues.
    Classify {
        #[command(flatten)]
        metric: Metric,
    },
    /// Curvature, heat and b-invariants.
    Invariants {
        #[command(flatten)]
        metric: Metric,
        /// Volume as a multiple of a power of π: `1`, `4*pi`, `2*pi^2`.
        #[arg(long, default_value = "1")]
        vol: String,
        #[arg(long)]
        regime: Option<String>,
    },
    /// Local geometries sharing the first four heat invariants.
    Partners {
        #[command(flatten)]
        metric: Metric,
        #[arg(long, default_value = "1")]
        vol: String,
        #[arg(long)]
        regime: Option<String>,
    },
    /// Eigenvalues of `M_family(k, v)` up to a cutoff.
    Spectrum {
        #[command(flatten)]
        quotient: Quotient,
        #[arg(long)]
        cutoff: String,
    },
    /// Distinguishing eigenvalues for the four equal-volume quotients.
    Distinctness {
        #[arg(long)]
        k: String,
        #[arg(long)]
        v: String,
    },
    /// Truncated heat trace against the four-term expansion.
    Heattrace {
        #[command(flatten)]
        quotient: Quotient,
        #[arg(long)]
        t: f64,
        /// Eigenvalue cutoff; defaults to 60/t.
        #[arg(long)]
        cutoff: Option<f64>,
        /// Also fit the deviation slope on `t_min,t_max,points`.
        #[arg(long)]
        fit: Option<String>,
    },
    /// Seeded property suites: oracle equivalence, derivative identities,
    /// partner soundness, Ricci inversion and the polynomial sign scan.
    Verify {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "1/100")]
        polysign_step: String,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub result: Value,
    /// Set only by `verify`; false makes the process exit with status 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ok: Option<bool>,
    #[serde(skip)]
    pub wall_time_secs: f64,
    #[serde(skip)]
    pub csv: Option<String>,
}

/// Parses argv (including the program name). Errors carry clap's
/// formatting and map to exit status 2.
pub fn parse_request<I, T>(argv: I) -> std::result::Result<CommandRequest, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    CommandRequest::try_parse_from(argv)
}

enum Source {
    Lambda(MilnorData),
    Nu(RicciEigenvalues),
}

impl Source {
    fn nu(&self) -> RicciEigenvalues {
        match self {
            Source::Lambda(m) => m.ricci(),
            Source::Nu(n) => n.clone(),
        }
    }
}

fn metric_source(m: &Metric) -> Result<Source> {
    match (&m.lambda, &m.nu) {
        (Some(l), None) => Ok(Source::Lambda(MilnorData::new(parse_triple(l)?))),
        (None, Some(n)) => Ok(Source::Nu(RicciEigenvalues::new(parse_triple(n)?))),
        _ => Err(GeomError::InvalidArgument("give exactly one of --lambda, --nu".into())),
    }
}

fn parse_positive(s: &str, name: &str) -> Result<Rational> {
    let q = parse_rational(s)?;
    if q <= Rational::zero() {
        return Err(GeomError::InvalidArgument(format!("--{name} must be positive, got {s}")));
    }
    Ok(q)
}

fn quotient_spec(q: &Quotient) -> Result<QuotientSpec> {
    QuotientSpec::new(q.family, parse_positive(&q.k, "k")?, q.v.parse()?)
}

fn parse_regime(r: &Option<String>) -> Result<Option<RegimeTag>> {
    r.as_deref().map(str::parse).transpose()
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable result")
}

#[derive(Debug, Clone, Serialize)]
struct ClassifyReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<MilnorData>,
    nu: RicciEigenvalues,
    signature: String,
    admissible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    group: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    recovered_lambda: Option<Value>,
}

fn classify(source: Source) -> Result<Value> {
    let nu = source.nu();
    let admissibility = crate::audibility::admissible_nu(&nu);
    let (lambda, group, recovered) = match &source {
        Source::Lambda(m) => (Some(m.clone()), Some(to_value(&m.group())), None),
        Source::Nu(n) if admissibility.admissible => {
            let group = to_value(&group_from_ricci(n)?);
            let recovered = match lambda_from_ricci(n)? {
                RicciInversion::Isolated { plus, .. } => match plus.lambda_exact() {
                    Some(m) => serde_json::json!({ "kind": "isolated", "exact": to_value(&m.lambda.map(|q| rational::format_rational(&q))) }),
                    None => serde_json::json!({ "kind": "isolated", "approx": plus.lambda_approx() }),
                },
                RicciInversion::Degenerate { vanishing_mu, mu_product } => serde_json::json!({
                    "kind": "degenerate",
                    "vanishing_mu": vanishing_mu + 1,
                    "mu_product": rational::format_rational(&mu_product),
                }),
                RicciInversion::Flat => serde_json::json!({ "kind": "flat" }),
            };
            (None, Some(group), Some(recovered))
        }
        Source::Nu(_) => (None, None, None),
    };
    Ok(to_value(&ClassifyReport {
        lambda,
        signature: admissibility.signature.clone(),
        admissible: admissibility.admissible,
        nu,
        group,
        recovered_lambda: recovered,
    }))
}

fn invariants(source: Source, vol: &str, regime: &Option<String>) -> Result<Value> {
    let nu = source.nu();
    let vol: PiMultiple = vol.parse()?;
    let regime = parse_regime(regime)?.unwrap_or_else(|| detect_regime(&nu));
    let mut out = BTreeMap::new();
    out.insert("nu", to_value(&nu));
    out.insert("elementary", to_value(&elementary_symmetric(&nu)));
    out.insert("curvature", to_value(&closed_form_invariants(&nu)));
    out.insert("heat", to_value(&heat_invariants(&nu, &vol, regime)?));
    out.insert("b", to_value(&b_invariants(&nu, &vol)));
    if let Source::Lambda(m) = &source {
        out.insert("lambda", to_value(m));
        out.insert("oracle_derivatives", to_value(&oracle_derivative_invariants(m)));
    }
    Ok(to_value(&out))
}

fn heattrace(q: &Quotient, t: f64, cutoff: Option<f64>, fit: &Option<String>) -> Result<Value> {
    let spec = quotient_spec(q)?;
    let cutoff = cutoff.unwrap_or(60.0 / t);
    let trace = truncated_heat_trace(&spec, t, cutoff)?;
    let sample = heat_trace_sample(&spec, t)?;
    let mut out = serde_json::json!({
        "spec": to_value(&spec),
        "t": t,
        "cutoff": cutoff,
        "trace": trace,
        "expansion": sample.expansion,
        "relative_deviation": ((trace - sample.expansion) / trace).abs(),
    });
    if let Some(f) = fit {
        let parts: Vec<&str> = f.split(',').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(GeomError::InvalidArgument(format!("--fit expects t_min,t_max,points, got {f}")));
        };
        let bad = |_| GeomError::InvalidArgument(format!("bad --fit {f}"));
        let fit = convergence_slope(
            &spec,
            lo.trim().parse().map_err(bad)?,
            hi.trim().parse().map_err(bad)?,
            n.trim().parse().map_err(|_| GeomError::InvalidArgument(format!("bad --fit {f}")))?,
        )?;
        out["fit"] = to_value(&fit);
    }
    Ok(out)
}

/// Structure constants `p/q` with `q ∈ 1..=8`, `p ∈ [-3q, 3q]`, all Ricci
/// eigenvalues non-zero.
pub fn sample_structure_constants(seed: u64, samples: usize) -> Vec<MilnorData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    while out.len() < samples {
        let lambda = std::array::from_fn(|_| {
            let q: i64 = rng.random_range(1..=8);
            let p: i64 = rng.random_range(-3 * q..=3 * q);
            frac(p, q)
        });
        let m = MilnorData::new(lambda);
        if m.ricci().nu.iter().all(|x| !x.is_zero()) {
            out.push(m);
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub checked: usize,
    pub failed: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub ok: bool,
}

const SUITES: [&str; 4] = ["oracle-equivalence", "derivative-identities", "partner-soundness", "ricci-inversion"];

/// Outcomes in the order of [`SUITES`].
fn check_metric(m: &MilnorData) -> [bool; 4] {
    let nu = m.ricci();
    let mut closed = closed_form_invariants(&nu);
    let d = oracle_derivative_invariants(m);
    let oracle_ok = {
        let derivs = (closed.norm_nabla_r2.take(), closed.dbar.take());
        closed == oracle_scalar_invariants(m)
            && derivs == (Some(d.norm_nabla_r2.clone()), Some(d.dbar.clone()))
    };
    let identities_ok = -frac(14, 3) * &d.dbar == int(4) * &d.norm_nabla_ric2
        && int(4) * &d.norm_nabla_ric2 == d.norm_nabla_r2
        && d.gamma_form == d.norm_nabla_r2;
    let vol = PiMultiple::rational(int(1));
    let source_b = b_invariants(&nu, &vol);
    let soundness_ok = classify_isospectral_partners(&nu, &vol, Some(RegimeTag::UnimodularNonDegenerate))
        .map(|r| {
            r.candidates.iter().filter(|c| c.is_confirmed()).all(|c: &Candidate| {
                let cand = match c.nu.as_ref().and_then(|n| n.as_ricci()) {
                    Some(n) => b_invariants(&n, &vol),
                    None => {
                        let e = crate::invariants::ElementarySymmetric::new(source_b.b1.clone(), source_b.b2.clone(), c.p3.clone());
                        crate::invariants::BInvariants {
                            b0: vol.clone(),
                            b1: e.p1.clone(),
                            b2: e.p2.clone(),
                            b3: Some(int(30) * &e.p3 + e.q_term() / &e.p3),
                        }
                    }
                };
                cand == source_b
            })
        })
        .unwrap_or(false);
    let inversion_ok = match lambda_from_ricci(&nu) {
        Ok(RicciInversion::Isolated { plus, minus }) => {
            let mut want = m.lambda.clone();
            want.sort();
            [plus, minus].iter().any(|r| match r.lambda_exact() {
                Some(l) => {
                    let mut got = l.lambda.clone();
                    got.sort();
                    got == want
                }
                None => {
                    let mut got = r.lambda_approx();
                    got.sort_by(f64::total_cmp);
                    got.iter()
                        .zip(&want)
                        .all(|(g, w)| (g - rational::to_f64(w)).abs() < 1e-9 * (1.0 + g.abs()))
                }
            })
        }
        _ => false,
    };
    [oracle_ok, identities_ok, soundness_ok, inversion_ok]
}

/// Runs every property suite; `ok` is false if any check failed.
pub fn verify(seed: u64, samples: usize, polysign_step: &Rational) -> Result<VerifyReport> {
    let metrics = sample_structure_constants(seed, samples);
    let outcomes: Vec<[bool; 4]> = metrics.par_iter().map(check_metric).collect();
    let mut checks: Vec<CheckResult> = SUITES
        .iter()
        .map(|name| CheckResult { name: name.to_string(), checked: 0, failed: 0, first_failure: None })
        .collect();
    for (m, o) in metrics.iter().zip(&outcomes) {
        for (c, passed) in checks.iter_mut().zip(o) {
            c.checked += 1;
            if !passed {
                c.failed += 1;
                c.first_failure.get_or_insert_with(|| {
                    format!("lambda = ({})", m.lambda.iter().map(rational::format_rational).collect::<Vec<_>>().join(", "))
                });
            }
        }
    }
    let scan = polysign_region_check(polysign_step)?;
    checks.push(CheckResult {
        name: "polysign-region".into(),
        checked: scan.points,
        failed: scan.violations.len(),
        first_failure: scan.violations.first().map(|v| {
            format!("{} at ({}, {})", v.kind, rational::format_rational(&v.point.x), rational::format_rational(&v.point.y))
        }),
    });
    let ok = checks.iter().all(|c| c.failed == 0);
    Ok(VerifyReport { checks, ok })
}

/// Executes a validated request.
pub fn run(req: &CommandRequest) -> Result<RunManifest> {
    let start = Instant::now();
    let input = to_value(&req.command);
    let name = input["command"].as_str().unwrap_or_default().to_string();
    let mut seed = None;
    let mut ok = None;
    let mut csv = None;
    if req.format == Format::Csv && !matches!(req.command, Command::Spectrum { .. }) {
        return Err(GeomError::InvalidArgument("csv output is only available for spectrum".into()));
    }
    let result = match &req.command {
        Command::Classify { metric } => classify(metric_source(metric)?)?,
        Command::Invariants { metric, vol, regime } => invariants(metric_source(metric)?, vol, regime)?,
        Command::Partners { metric, vol, regime } => {
            let nu = metric_source(metric)?.nu();
            to_value(&classify_isospectral_partners(&nu, &vol.parse()?, parse_regime(regime)?)?)
        }
        Command::Spectrum { quotient, cutoff } => {
            let spec = quotient_spec(quotient)?;
            let cutoff = parse_rational(cutoff)?;
            let set = eigenvalue_set(&spec, &cutoff)?;
            csv = Some(set.to_csv());
            serde_json::json!({
                "spectrum": to_value(&set),
                "volume": to_value(&quotient_volume(&spec)),
                "fundamental_tone": to_value(&fundamental_tone(&spec)?),
            })
        }
        Command::Distinctness { k, v } => {
            let v: TranslationLength = v.parse()?;
            to_value(&distinctness_report(&parse_positive(k, "k")?, &v)?)
        }
        Command::Heattrace { quotient, t, cutoff, fit } => heattrace(quotient, *t, *cutoff, fit)?,
        Command::Verify { samples, seed: s, polysign_step } => {
            seed = Some(*s);
            let report = verify(*s, *samples, &parse_rational(polysign_step)?)?;
            ok = Some(report.ok);
            to_value(&report)
        }
    };
    Ok(RunManifest {
        tool: "geomspec".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: name,
        input,
        seed,
        result,
        ok,
        wall_time_secs: start.elapsed().as_secs_f64(),
        csv,
    })
}

fn render_text(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                render_text(&p, x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                render_text(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::String(s) => out.push_str(&format!("{prefix}: {s}\n")),
        other => out.push_str(&format!("{prefix}: {other}\n")),
    }
}

/// Canonical bytes: JSON with sorted keys, the spectrum CSV, or a flat
/// `path: value` listing.
pub fn emit(manifest: &RunManifest, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            // Value maps are ordered by key
            let v = to_value(manifest);
            Ok(serde_json::to_string_pretty(&v).expect("json") + "\n")
        }
        Format::Csv => manifest
            .csv
            .clone()
            .ok_or_else(|| GeomError::InvalidArgument("csv output is only available for spectrum".into())),
        Format::Text => {
            let mut out = format!("geomspec {} {}\n", manifest.version, manifest.command);
            render_text("", &manifest.result, &mut out);
            out.push_str(&format!("wall time: {:.3}s\n", manifest.wall_time_secs));
            Ok(out)
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("GEOMSPEC_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn error_json(e: &GeomError) -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "error": { "code": e.code(), "message": e.to_string() }
    }))
    .expect("json")
        + "\n"
}

/// Full CLI behavior; returns `(exit status, stdout, stderr)`.
pub fn run_cli<I, T>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    configure_threads();
    let req = match parse_request(argv) {
        Ok(r) => r,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            return if code == EXIT_OK { (code, rendered, String::new()) } else { (code, String::new(), rendered) };
        }
    };
    let result = run(&req).and_then(|m| emit(&m, req.format).map(|s| (m.ok, s)));
    match result {
        Ok((ok, out)) => (if ok == Some(false) { EXIT_SUITE_FAILURE } else { EXIT_OK }, out, String::new()),
        Err(e) => {
            let code = if matches!(e, GeomError::InvalidArgument(_)) { EXIT_USAGE } else { EXIT_DOMAIN_ERROR };
            (code, error_json(&e), format!("error [{}]: {e}\n", e.code()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn argv(s: &str) -> Vec<String> {
        std::iter::once("geomspec".to_string()).chain(s.split_whitespace().map(String::from)).collect()
    }

    #[test]
    fn parses_examples() {
        let r = parse_request(argv("invariants --lambda 2,0,0 --vol 1")).unwrap();
        assert!(matches!(r.command, Command::Invariants { .. }));
        let r = parse_request(argv("spectrum --family 3 --k 1 --v 1 --cutoff 50")).unwrap();
        assert!(matches!(r.command, Command::Spectrum { .. }));
        assert!(parse_request(argv("frobnicate")).is_err());
        assert!(parse_request(argv("classify --nu 1,2,3 --bogus 1")).is_err());
        assert!(parse_request(argv("classify --nu 1,2,3 --lambda 1,1,1")).is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_cli(argv("spectrum --family 5 --k 1 --v 1 --cutoff 5")).0, EXIT_USAGE);
        assert_eq!(run_cli(argv("spectrum --family 1 --k -1 --v 1 --cutoff 5")).0, EXIT_USAGE);
        assert_eq!(run_cli(argv("spectrum --family 1 --k 1 --v 0 --cutoff 5")).0, EXIT_USAGE);
        assert_eq!(run_cli(argv("classify --nu 1,2")).0, EXIT_USAGE);
        assert_eq!(run_cli(argv("nonsense")).0, EXIT_USAGE);
    }

    #[test]
    fn domain_errors_carry_codes() {
        let (code, out, _) = run_cli(argv("heattrace --family 2 --k 1 --v 1 --t 0.1"));
        assert_eq!(code, EXIT_DOMAIN_ERROR);
        assert!(out.contains("unsupported-multiplicity"));
        let (code, out, _) = run_cli(argv("invariants --nu 1,1,0 --regime unimodular"));
        assert_eq!(code, EXIT_DOMAIN_ERROR);
        assert!(out.contains("regime-error"));
    }

    #[test]
    fn spectrum_csv_header() {
        let (code, out, _) = run_cli(argv("spectrum --family 1 --k 1 --v 2*pi --cutoff 3 --format csv"));
        assert_eq!(code, 0);
        assert!(out.starts_with("m,n,eigenvalue,multiplicity\n0,0,0,1\n0,2,1,2\n"));
    }

    #[test]
    fn small_verify_passes() {
        let (code, out, _) = run_cli(argv("verify --samples 20 --seed 3 --polysign-step 1/10"));
        assert_eq!(code, 0, "{out}");
    }

    #[test]
    fn sampler_range_and_determinism() {
        let a = sample_structure_constants(7, 50);
        assert_eq!(a, sample_structure_constants(7, 50));
        for m in &a {
            assert!(m.lambda.iter().all(|l| l.abs() <= int(3) && *l.denom() <= 8.into()));
        }
    }
}
