//! Subcommand implementations. Each returns the process exit code or a
//! [`Failure`] carrying the code and a one-line diagnostic.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use curvlab::acceptance::{run_all, AcceptanceConfig};
use curvlab::invariants::model_profile;
use curvlab::io::{LinearMapWire, ModelWire, PolyWire, SymFormWire};
use curvlab::mf::{mf_alpha_batch, mf_scalar_curvature, MfManifold, PolyFunction};
use curvlab::structure::{classify_canonical_member, extract_permutation, is_member};
use curvlab::{build_canonical, kernel, BlockModelSpace, Error, LinearMap, SymForm};

use crate::{CliConfig, Format};

pub const EXIT_NON_MEMBER: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;
pub const EXIT_SINGULAR: u8 = 4;
pub const EXIT_INCONSISTENT: u8 = 5;
pub const EXIT_DEGENERATE_BLOCK: u8 = 6;
pub const EXIT_DEGENERATE_HESSIAN: u8 = 7;

/// α_f spreads above this are reported as nonconstant.
const NONCONSTANT_SPREAD: f64 = 1e-6;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

type Outcome = Result<u8, Failure>;

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SingularMap { .. } => EXIT_SINGULAR,
            Error::InconsistentPermutation(_) => EXIT_INCONSISTENT,
            Error::DegenerateForm { .. } => EXIT_DEGENERATE_BLOCK,
            Error::DegenerateHessian { .. } => EXIT_DEGENERATE_HESSIAN,
            _ => EXIT_VALIDATION,
        };
        fail(code, e.to_string())
    }
}

/// Reads and deserializes `path`; any I/O or JSON failure is a parse error.
fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn emit(cfg: &CliConfig, body: &str) -> Result<(), Failure> {
    match &cfg.out {
        Some(p) => fs::write(p, body).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("serializable output");
    s.push('\n');
    s
}

/// Status lines go to stdout when the main output is in a file, otherwise to
/// stderr so stdout stays machine-readable.
fn status(cfg: &CliConfig, line: &str) {
    if cfg.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

pub fn build_rphi(cfg: &CliConfig, form_path: &Path) -> Outcome {
    let wire: SymFormWire = read_json(form_path)?;
    let form = SymForm::try_from(wire)?;
    let t = build_canonical(&form);
    let report = t.validate(cfg.tol_construction);
    if !report.pass {
        return Err(fail(
            EXIT_VALIDATION,
            format!(
                "built tensor fails the curvature identities (residual {:e})",
                report.max_residual()
            ),
        ));
    }
    let sig = form.signature(cfg.tol_kernel);
    let kdim = kernel(&t, cfg.tol_kernel).ncols();
    let body = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&t),
        Format::Csv => {
            let n = t.dim();
            let mut s = String::from("i,j,k,l,value\n");
            for (q, v) in t.components().iter().enumerate() {
                let (i, j, k, l) = (q / (n * n * n), (q / (n * n)) % n, (q / n) % n, q % n);
                let _ = writeln!(s, "{},{},{},{},{v}", i + 1, j + 1, k + 1, l + 1);
            }
            s
        }
    };
    emit(cfg, &body)?;
    status(cfg, &format!("signature: ({}, {}, {})", sig.plus, sig.minus, sig.zero));
    status(cfg, &format!("kernel_dim: {kdim}"));
    Ok(0)
}

#[derive(Serialize)]
struct MembershipOutput {
    member: bool,
    residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    classification: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma_images: Option<Vec<usize>>,
}

pub fn check_membership(cfg: &CliConfig, model_path: &Path, matrix_path: &Path) -> Outcome {
    let model = BlockModelSpace::try_from(read_json::<ModelWire>(model_path)?)?;
    let a = LinearMap::try_from(read_json::<LinearMapWire>(matrix_path)?)?;
    if a.dim() != model.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.total_dim(),
            found: a.dim(),
        }
        .into());
    }
    a.ensure_invertible()?;
    let m = is_member(&a, &model.tensor(), cfg.tol_membership)?;
    let classification = if model.num_blocks() == 1 {
        let v = classify_canonical_member(&a, &model.block(0).canonical_form(), cfg.tol_membership)?;
        Some(
            serde_json::to_value(v.verdict)
                .expect("verdict serializes")
                .as_str()
                .unwrap_or("")
                .to_string(),
        )
    } else {
        None
    };
    let sigma = if m.member && model.num_blocks() > 1 {
        Some(extract_permutation(&a, &model, cfg.tol_membership)?)
    } else {
        None
    };
    let out = MembershipOutput {
        member: m.member,
        residual: m.residual,
        classification,
        sigma: sigma.as_ref().map(ToString::to_string),
        sigma_images: sigma.as_ref().map(|s| s.to_one_based()),
    };
    let body = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&out),
        Format::Csv => format!(
            "member,residual,classification,sigma\n{},{:e},{},\"{}\"\n",
            out.member,
            out.residual,
            out.classification.as_deref().unwrap_or(""),
            out.sigma.as_deref().unwrap_or("")
        ),
    };
    emit(cfg, &body)?;
    if cfg.verbose > 0 {
        eprintln!("blocks: {}, residual {:e}", model.num_blocks(), m.residual);
    }
    Ok(if m.member { 0 } else { EXIT_NON_MEMBER })
}

pub fn invariants(cfg: &CliConfig, model_path: &Path) -> Outcome {
    let model = BlockModelSpace::try_from(read_json::<ModelWire>(model_path)?)?;
    let profile = model_profile(&model)?;
    let body = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&profile),
        Format::Csv => {
            let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
            format!(
                "scalar_curvature,ricci_eigenvalues,per_block,elementary,power_sums\n{},{},{},{},{}\n",
                profile.scalar_curvature,
                join(&profile.ricci_eigenvalues),
                join(&profile.kappa.per_block),
                join(&profile.kappa.elementary),
                join(&profile.kappa.power_sums)
            )
        }
    };
    emit(cfg, &body)?;
    Ok(0)
}

#[derive(Serialize)]
struct AlphaOutput {
    points: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    tau_ambient: Vec<f64>,
    nonconstant: bool,
}

pub fn mf_alpha(cfg: &CliConfig, poly_path: &Path, points_path: &Path) -> Outcome {
    let f = PolyFunction::try_from(read_json::<PolyWire>(poly_path)?)?;
    let m = MfManifold::new(f)?;
    let points: Vec<Vec<f64>> = read_json(points_path)?;
    if let Some((i, p)) = points.iter().enumerate().find(|(_, p)| p.len() != m.p()) {
        return Err(fail(
            EXIT_VALIDATION,
            format!("point {} has {} coordinates, expected {}", i + 1, p.len(), m.p()),
        ));
    }
    let mut alpha = Vec::with_capacity(points.len());
    for (i, r) in mf_alpha_batch(&m, &points, curvlab::Exec::default())
        .into_iter()
        .enumerate()
    {
        alpha.push(r.map_err(|e| {
            let mut f = Failure::from(e);
            f.message = format!("point {}: {}", i + 1, f.message);
            f
        })?);
    }
    let tau_ambient = points
        .iter()
        .map(|x| mf_scalar_curvature(&m, x))
        .collect::<curvlab::Result<Vec<_>>>()?;
    let lo = alpha.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let nonconstant = !alpha.is_empty() && hi - lo > NONCONSTANT_SPREAD;
    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s: String = (1..=m.p()).map(|i| format!("x{i},")).collect();
            s.push_str("alpha,tau_ambient\n");
            for ((x, a), t) in points.iter().zip(&alpha).zip(&tau_ambient) {
                for v in x {
                    let _ = write!(s, "{v},");
                }
                let _ = writeln!(s, "{a},{t}");
            }
            s
        }
        Format::Json => to_json(&AlphaOutput {
            points: points.clone(),
            alpha: alpha.clone(),
            tau_ambient,
            nonconstant,
        }),
    };
    emit(cfg, &body)?;
    if !alpha.is_empty() {
        status(cfg, &format!("nonconstant: {nonconstant} (alpha range {lo} .. {hi})"));
    }
    Ok(0)
}

pub fn selftest(cfg: &CliConfig, full: bool) -> Outcome {
    let mut acfg = if full {
        AcceptanceConfig {
            seed: cfg.seed,
            ..AcceptanceConfig::default()
        }
    } else {
        AcceptanceConfig::quick(cfg.seed)
    };
    acfg.membership_tol = cfg.tol_membership;
    acfg.kernel_tol = cfg.tol_kernel;
    let outcomes = run_all(&acfg);
    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&outcomes),
        Format::Csv => {
            let mut s = String::new();
            for o in &outcomes {
                if cfg.verbose > 0 {
                    let _ = writeln!(s, "{o}");
                } else {
                    let _ = writeln!(
                        s,
                        "criterion {:>2} {} {}",
                        o.id,
                        if o.pass { "PASS" } else { "FAIL" },
                        o.name
                    );
                }
            }
            s
        }
    };
    emit(cfg, &body)?;
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    if failed > 0 {
        return Err(fail(1, format!("{failed} of {} criteria failed", outcomes.len())));
    }
    Ok(0)
}
