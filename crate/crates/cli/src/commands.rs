use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tomokit::fock::{fidelity, make_state, DensityJson, DensityMatrix, PreparedState, StateKind};
use tomokit::formats::{Axis, Convention, PhaseGrid, Table};
use tomokit::gaussian::{gaussian_tomogram, to_fock, wigner_eval, GaussianState};
use tomokit::photon_number::{
    pn_reconstruct, truncation_warning, AlphaGrid, PhotonTomogram, ReconstructionConfig,
};
use tomokit::symplectic::{
    inverse_radon, validate_tomogram, wigner_grid_from_fock, FnSource, SymplecticTomogram,
};
use tomokit::verify::{self, Suite};
use tomokit::PhasePoint;

use crate::config::{CliError, CliResult};

const NEGATIVITY_TOL: f64 = 1e-12;
const SLICE_NORMALIZATION_TOL: f64 = 1e-6;

#[derive(Args, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TomogramArgs {
    /// symplectic or photon
    #[arg(long)]
    pub scheme: Option<String>,
    /// vacuum, fock:N, coherent:RE[,IM], thermal:NBAR or squeezed:R
    #[arg(long)]
    pub state: Option<String>,
    /// Gaussian state JSON file {mean_q, mean_p, sigma_qq, sigma_pp, sigma_pq} (instead of --state)
    #[arg(long)]
    pub gaussian: Option<PathBuf>,
    /// Fock truncation N [default: 64]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Number of optical angles phi_j = j pi / K [default: 64]
    #[arg(long)]
    pub angles: Option<usize>,
    /// X samples as lo:hi:count [default: -6:6:241]
    #[arg(long, allow_hyphen_values = true)]
    pub xrange: Option<String>,
    /// Largest photon number [default: 20]
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Points per side of the square alpha grid [default: 21]
    #[arg(long)]
    pub alpha_grid: Option<usize>,
    /// Half-width of the alpha grid [default: 3]
    #[arg(long)]
    pub alpha_radius: Option<f64>,
    /// Photon-number route for Gaussian input: analytic or matrix [default: analytic]
    #[arg(long)]
    pub route: Option<String>,
    /// Output CSV [default: tomogram.csv]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct WignerArgs {
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long)]
    pub gaussian: Option<PathBuf>,
    /// [default: 64]
    #[arg(long)]
    pub dim: Option<usize>,
    /// q samples as lo:hi:count [default: -6:6:121]
    #[arg(long, allow_hyphen_values = true)]
    pub qrange: Option<String>,
    /// p samples as lo:hi:count [default: -6:6:121]
    #[arg(long, allow_hyphen_values = true)]
    pub prange: Option<String>,
    /// two-pi or unit-integral [default: two-pi]
    #[arg(long)]
    pub convention: Option<String>,
    /// Output payload CSV; the header goes to <stem>.header.json [default: wigner.csv]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ReconstructArgs {
    /// Tomogram CSV written by `tomogram`
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// symplectic or photon [default: from the CSV columns]
    #[arg(long)]
    pub scheme: Option<String>,
    /// Reference state spec for the fidelity/error report [default: from the input's sidecar]
    #[arg(long)]
    pub reference: Option<String>,
    /// Ordering parameter, 0 <= s < 1 [default: 0]
    #[arg(long)]
    pub s: Option<f64>,
    /// Largest photon number used [default: min(tomogram n_max, dim - 1)]
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Truncation of the reconstructed matrix [default: 24]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Output grid for the symplectic inverse, lo:hi:count on both axes [default: -8:8:256]
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Output file [default: reconstruction.json (photon) or reconstruction.csv (symplectic)]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct VerifyArgs {
    /// kernels, homogeneity, gaussian-branch, roundtrips or all
    pub suite: Option<String>,
    /// Seed of every random sweep [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the JSON report here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn write_json(path: &Path, v: &impl Serialize) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| config_err(e.to_string()))?;
    s.push('\n');
    std::fs::write(path, s).map_err(|e| config_err(format!("cannot write {}: {e}", path.display())))
}

fn write_table(path: &Path, t: &Table) -> CliResult<()> {
    let f = File::create(path).map_err(|e| config_err(format!("cannot write {}: {e}", path.display())))?;
    t.write(BufWriter::new(f))?;
    Ok(())
}

fn read_table(path: &Path) -> CliResult<Table> {
    let f = File::open(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    Ok(Table::read(f)?)
}

fn read_gaussian(path: &Path) -> CliResult<GaussianState> {
    let text =
        std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    Ok(GaussianState::from_json_str(&text)?)
}

fn parse_state(spec: &str) -> CliResult<StateKind> {
    Ok(spec.parse::<StateKind>()?)
}

fn check_dim(dim: usize) -> CliResult<usize> {
    if dim < 2 {
        return Err(config_err(format!("--dim must be at least 2, got {dim}")));
    }
    Ok(dim)
}

/// A state given either as a fixture spec or as a Gaussian parameter file.
enum Source {
    Fixture(StateKind),
    Gaussian(GaussianState),
}

impl Source {
    fn from_args(state: &Option<String>, gaussian: &Option<PathBuf>) -> CliResult<Self> {
        match (state, gaussian) {
            (Some(s), None) => Ok(Source::Fixture(parse_state(s)?)),
            (None, Some(p)) => Ok(Source::Gaussian(read_gaussian(p)?)),
            (Some(_), Some(_)) => Err(config_err("give either --state or --gaussian, not both")),
            (None, None) => Err(config_err("missing --state (or --gaussian)")),
        }
    }

    fn describe(&self) -> Value {
        match self {
            Source::Fixture(k) => json!({ "state": k.to_string() }),
            Source::Gaussian(g) => json!({ "gaussian": g }),
        }
    }

    fn prepare(&self, dim: usize) -> CliResult<(DensityMatrix, Value)> {
        match self {
            Source::Fixture(k) => {
                let PreparedState { state, truncated_weight, renormalization, leakage, warning } = make_state(k, dim)?;
                let m = json!({
                    "truncated_weight": truncated_weight,
                    "renormalization": renormalization,
                    "leakage": leakage,
                    "warning": warning,
                });
                Ok((state, m))
            }
            Source::Gaussian(g) => {
                let f = to_fock(g, dim)?;
                let m = json!({
                    "renormalization": f.renormalization,
                    "leakage": f.leakage,
                    "warning": f.warning,
                });
                Ok((f.state, m))
            }
        }
    }
}

pub fn tomogram(a: TomogramArgs) -> CliResult<()> {
    let scheme = a.scheme.as_deref().ok_or_else(|| config_err("missing --scheme (symplectic or photon)"))?;
    let source = Source::from_args(&a.state, &a.gaussian)?;
    let dim = check_dim(a.dim.unwrap_or(64))?;
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from("tomogram.csv"));
    let meta_path = sibling(&out, "meta.json");
    let mut meta = json!({
        "command": "tomogram",
        "scheme": scheme,
        "parameters": &a,
        "source": source.describe(),
        "dim": dim,
    });
    match scheme {
        "symplectic" => {
            let angles = a.angles.unwrap_or(64);
            if angles == 0 {
                return Err(config_err("--angles must be positive"));
            }
            let x = Axis::parse_range(a.xrange.as_deref().unwrap_or("-6:6:241"))?;
            let (tomo, truncation) = match &source {
                Source::Gaussian(g) if a.route.as_deref() != Some("matrix") => {
                    let g = *g;
                    let src = FnSource(move |x, mu, nu| gaussian_tomogram(&g, x, mu, nu).unwrap_or(f64::NAN));
                    (SymplecticTomogram::sample_optical(&src, angles, x)?, Value::Null)
                }
                _ => {
                    let (rho, m) = source.prepare(dim)?;
                    (SymplecticTomogram::sample_optical(&rho, angles, x)?, m)
                }
            };
            write_table(&out, &tomo.to_table())?;
            let rep = validate_tomogram(&tomo, None);
            meta["truncation"] = truncation;
            meta["rows"] = json!(tomo.len());
            meta["checks"] = json!({
                "min_w": rep.max_negativity,
                "negative_samples": rep.negative_samples,
                "max_slice_normalization_error": rep.max_normalization_error(),
            });
            meta["tolerances"] = json!({ "negativity": NEGATIVITY_TOL, "slice_normalization": SLICE_NORMALIZATION_TOL });
            write_json(&meta_path, &meta)?;
            if rep.max_negativity < -NEGATIVITY_TOL {
                return Err(CliError::Contract(format!("tomogram has negative samples (min {:e})", rep.max_negativity)));
            }
            if rep.max_normalization_error() > SLICE_NORMALIZATION_TOL {
                return Err(CliError::Contract(format!(
                    "slice normalization off by {:e}; widen --xrange or refine it",
                    rep.max_normalization_error()
                )));
            }
        }
        "photon" => {
            let n_max = a.nmax.unwrap_or(20);
            let count = a.alpha_grid.unwrap_or(21);
            let radius = a.alpha_radius.unwrap_or(3.0);
            let axis = AlphaGrid { radius, count }.axis()?;
            let mut diagnostics: Vec<String> = Vec::new();
            let route = a.route.as_deref().unwrap_or("analytic");
            if !matches!(route, "analytic" | "matrix") {
                return Err(config_err(format!("--route must be analytic or matrix, got '{route}'")));
            }
            let (tomo, truncation) = match &source {
                Source::Gaussian(g) if route == "analytic" => {
                    let (t, notes) = PhotonTomogram::sample_gaussian(g, n_max, axis, axis)?;
                    diagnostics = notes;
                    (t, Value::Null)
                }
                _ => {
                    if n_max >= dim {
                        return Err(config_err(format!("--nmax must be below --dim = {dim}, got {n_max}")));
                    }
                    let (rho, m) = source.prepare(dim)?;
                    (PhotonTomogram::sample(&rho, n_max, axis, axis)?, m)
                }
            };
            write_table(&out, &tomo.to_table())?;
            // the grid corner carries the largest |alpha|
            let corner = tomokit::C64::new(radius, radius);
            meta["truncation"] = truncation;
            meta["rows"] = json!(tomo.values.len());
            meta["truncation_warning"] = json!(truncation_warning(corner, dim));
            meta["diagnostics"] = json!(diagnostics);
            meta["checks"] = json!({
                "min_omega": tomo.min_value(),
                "max_normalization_error": tomo.max_normalization_error(),
            });
            meta["tolerances"] = json!({ "negativity": NEGATIVITY_TOL });
            write_json(&meta_path, &meta)?;
            if tomo.min_value() < -NEGATIVITY_TOL {
                return Err(CliError::Contract(format!("tomogram has negative values (min {:e})", tomo.min_value())));
            }
        }
        other => return Err(config_err(format!("--scheme must be symplectic or photon, got '{other}'"))),
    }
    Ok(())
}

fn parse_convention(s: Option<&str>) -> CliResult<Convention> {
    match s.unwrap_or("two-pi") {
        "two-pi" => Ok(Convention::TwoPi),
        "unit-integral" => Ok(Convention::UnitIntegral),
        other => Err(config_err(format!("--convention must be two-pi or unit-integral, got '{other}'"))),
    }
}

pub fn wigner(a: WignerArgs) -> CliResult<()> {
    let source = Source::from_args(&a.state, &a.gaussian)?;
    let dim = check_dim(a.dim.unwrap_or(64))?;
    let q = Axis::parse_range(a.qrange.as_deref().unwrap_or("-6:6:121"))?;
    let p = Axis::parse_range(a.prange.as_deref().unwrap_or("-6:6:121"))?;
    let convention = parse_convention(a.convention.as_deref())?;
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from("wigner.csv"));
    let (grid, truncation) = match &source {
        Source::Gaussian(g) => {
            let g = *g;
            let grid = PhaseGrid::from_fn(q, p, Convention::TwoPi, |x, y| {
                wigner_eval(&g, PhasePoint::new(x, y)).unwrap_or(f64::NAN)
            });
            (grid, Value::Null)
        }
        Source::Fixture(_) => {
            let (rho, m) = source.prepare(dim)?;
            (wigner_grid_from_fock(&rho, q, p)?, m)
        }
    };
    let grid = grid.with_convention(convention);
    std::fs::write(&out, grid.payload_csv()).map_err(|e| config_err(format!("cannot write {}: {e}", out.display())))?;
    write_json(&sibling(&out, "header.json"), &grid.header())?;
    let meta = json!({
        "command": "wigner",
        "parameters": &a,
        "source": source.describe(),
        "dim": dim,
        "truncation": truncation,
        "integral": grid.integral(),
    });
    write_json(&sibling(&out, "meta.json"), &meta)
}

/// Reference named on the command line, else the source recorded next to the input.
fn reference_source(flag: &Option<String>, input: &Path) -> CliResult<Option<Source>> {
    if let Some(s) = flag {
        return Ok(Some(Source::Fixture(parse_state(s)?)));
    }
    let meta_path = sibling(input, "meta.json");
    let Ok(text) = std::fs::read_to_string(&meta_path) else { return Ok(None) };
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| config_err(format!("{} is not valid JSON: {e}", meta_path.display())))?;
    if let Some(s) = v["source"]["state"].as_str() {
        return Ok(Some(Source::Fixture(parse_state(s)?)));
    }
    if v["source"]["gaussian"].is_object() {
        let g: GaussianState = serde_json::from_value(v["source"]["gaussian"].clone())
            .map_err(|e| config_err(format!("{}: {e}", meta_path.display())))?;
        return Ok(Some(Source::Gaussian(g)));
    }
    Ok(None)
}

pub fn reconstruct(a: ReconstructArgs) -> CliResult<()> {
    let input = a.input.clone().ok_or_else(|| config_err("missing --input"))?;
    let table = read_table(&input)?;
    let scheme = match a.scheme.as_deref() {
        Some(s) => s.to_string(),
        None if table.has_column("omega") => "photon".into(),
        None if table.has_column("w") => "symplectic".into(),
        None => {
            return Err(config_err(format!(
                "{}: cannot tell the scheme; expected an 'omega' or 'w' column",
                input.display()
            )))
        }
    };
    let reference = reference_source(&a.reference, &input)?;
    let mut report = json!({
        "command": "reconstruct",
        "scheme": scheme,
        "parameters": &a,
        "reference": reference.as_ref().map(Source::describe),
    });
    match scheme.as_str() {
        "photon" => {
            let tomo = PhotonTomogram::from_table(&table)?;
            let dim = check_dim(a.dim.unwrap_or(24))?;
            let n_max = a.nmax.unwrap_or(tomo.n_max.min(dim - 1));
            let radius = -tomo.re.start;
            if (tomo.re.end() - radius).abs() > 1e-9 || tomo.im != tomo.re {
                return Err(config_err("photon tomogram must sit on a square grid symmetric about 0"));
            }
            let cfg = ReconstructionConfig {
                s: a.s.unwrap_or(0.0),
                n_max,
                grid: AlphaGrid { radius, count: tomo.re.count },
                dim,
            };
            let rec = pn_reconstruct(&tomo, &cfg)?;
            let out = a.out.clone().unwrap_or_else(|| PathBuf::from("reconstruction.json"));
            write_json(&out, &DensityJson::from_operator(&rec.operator))?;
            report["config"] = json!(cfg);
            report["trace"] = json!(rec.operator.trace().re);
            report["hermiticity_error"] = json!(rec.operator.hermiticity_error());
            report["n_tail"] = json!(rec.n_tail);
            report["disk_tail"] = json!(rec.disk_tail);
            report["nodes"] = json!(rec.nodes);
            if let Some(src) = &reference {
                let (rho, _) = src.prepare(dim)?;
                report["fidelity"] = json!(fidelity(&rho, &rec.operator)?);
            }
            finish_report(&out, &report)
        }
        "symplectic" => {
            let tomo = SymplecticTomogram::from_table(&table)?;
            let axis = Axis::parse_range(a.grid.as_deref().unwrap_or("-8:8:256"))?;
            let inv = inverse_radon(&tomo, axis, axis, Convention::TwoPi)?;
            let out = a.out.clone().unwrap_or_else(|| PathBuf::from("reconstruction.csv"));
            std::fs::write(&out, inv.grid.payload_csv())
                .map_err(|e| config_err(format!("cannot write {}: {e}", out.display())))?;
            write_json(&sibling(&out, "header.json"), &inv.grid.header())?;
            report["bandwidth"] = json!(inv.bandwidth);
            report["aliasing_warning"] = json!(inv.aliasing_warning);
            if let Some(src) = &reference {
                let exact = match src {
                    Source::Gaussian(g) => {
                        let g = *g;
                        PhaseGrid::from_fn(axis, axis, Convention::TwoPi, |x, y| {
                            wigner_eval(&g, PhasePoint::new(x, y)).unwrap_or(f64::NAN)
                        })
                    }
                    Source::Fixture(_) => {
                        let (rho, _) = src.prepare(a.dim.unwrap_or(64))?;
                        wigner_grid_from_fock(&rho, axis, axis)?
                    }
                };
                report["max_abs_error"] = json!(inv.grid.max_abs_diff(&exact)?);
            }
            finish_report(&out, &report)
        }
        other => Err(config_err(format!("--scheme must be symplectic or photon, got '{other}'"))),
    }
}

fn finish_report(out: &Path, report: &Value) -> CliResult<()> {
    write_json(&sibling(out, "report.json"), report)?;
    println!("{}", serde_json::to_string_pretty(report).map_err(|e| config_err(e.to_string()))?);
    Ok(())
}

pub fn verify(a: VerifyArgs) -> CliResult<()> {
    let suite: Suite = a.suite.as_deref().unwrap_or("all").parse()?;
    let report = verify::run(suite, a.seed.unwrap_or(0))?;
    if let Some(path) = &a.out {
        write_json(path, &report)?;
    }
    println!("{}", serde_json::to_string_pretty(&report).map_err(|e| config_err(e.to_string()))?);
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(CliError::Invariant(format!("failed: {}", failed.join("; "))))
    }
}
