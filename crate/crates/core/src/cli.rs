//! File formats and commands behind the `rdx` binary.
//!
//! Models and distortion targets are JSON files with schema version
//! [`SCHEMA_VERSION`] and row-major nested arrays. Every command except
//! `gen` prints a result record:
//!
//! ```text
//! { "schema_version", "command", "inputs_digest", "unit", "headline",
//!   "outputs", "diagnostics" }
//! ```
//!
//! Rates appear as `{"nats": …, "bits": …}` objects; `--unit` only picks the
//! unit of `headline`. `sweep --csv PATH` also writes
//! `t,lower_nats,upper_nats,exact_nats`.
//!
//! Exit codes: 0 ok, 1 parse or input error, 2 infeasible target or regime
//! violation, 3 numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{self, PD_TOL, RATE_ATOL, RTOL};
use crate::model::{self, ConditionalStats, JointModel, SpdMatrix};
use crate::simdiag::Pairing;
use crate::{nats_to_bits, rdf, sim, special};

pub const SCHEMA_VERSION: &str = "rdx-gauss/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub n_x: usize,
    pub n_y: usize,
    pub n_z: usize,
}

/// The six covariance blocks, each row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Blocks {
    pub sigma_x: Vec<Vec<f64>>,
    pub sigma_y: Vec<Vec<f64>>,
    pub sigma_z: Vec<Vec<f64>>,
    pub sigma_xy: Vec<Vec<f64>>,
    pub sigma_xz: Vec<Vec<f64>>,
    pub sigma_yz: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Joint covariance `A Aᵀ + 0.1 I` with `A` standard normal.
    Random,
    /// `y = H x + n₁`, `z = K x + n₂`.
    NoisyObservation,
}

/// Matrices for [`GeneratorKind::NoisyObservation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoisyObservationParams {
    pub sigma_x: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
    pub sigma_n1: Vec<Vec<f64>>,
    pub k: Vec<Vec<f64>>,
    pub sigma_n2: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    #[serde(rename = "type")]
    pub kind: GeneratorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<NoisyObservationParams>,
    #[serde(default)]
    pub seed: u64,
}

/// A model given either explicitly by its blocks or by a generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: String,
    pub dims: Dims,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Blocks>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistortionFile {
    pub schema_version: String,
    pub distortion: Vec<Vec<f64>>,
}

fn check_schema(found: &str) -> Result<()> {
    if found != SCHEMA_VERSION {
        return Err(Error::Parse(format!(
            "unsupported schema_version `{found}`, expected `{SCHEMA_VERSION}`"
        )));
    }
    Ok(())
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn matrix(rows: &[Vec<f64>], name: &str) -> Result<DMatrix<f64>> {
    linalg::from_rows(rows).map_err(|_| Error::DimensionMismatch(format!("`{name}` has ragged rows")))
}

impl ModelFile {
    pub fn from_model(m: &JointModel) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            dims: Dims {
                n_x: m.n_x(),
                n_y: m.n_y(),
                n_z: m.n_z(),
            },
            blocks: Some(Blocks {
                sigma_x: linalg::to_rows(m.sigma_x()),
                sigma_y: linalg::to_rows(m.sigma_y()),
                sigma_z: linalg::to_rows(m.sigma_z()),
                sigma_xy: linalg::to_rows(m.sigma_xy()),
                sigma_xz: linalg::to_rows(m.sigma_xz()),
                sigma_yz: linalg::to_rows(m.sigma_yz()),
            }),
            generator: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: Self = parse_json(text, "model file")?;
        check_schema(&f.schema_version)?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model file serializes");
        s.push('\n');
        s
    }

    /// Build the model, checking that the declared dimensions match.
    pub fn to_model(&self) -> Result<JointModel> {
        let m = match (&self.blocks, &self.generator) {
            (Some(b), None) => JointModel::new(
                matrix(&b.sigma_x, "sigma_x")?,
                matrix(&b.sigma_y, "sigma_y")?,
                matrix(&b.sigma_z, "sigma_z")?,
                matrix(&b.sigma_xy, "sigma_xy")?,
                matrix(&b.sigma_xz, "sigma_xz")?,
                matrix(&b.sigma_yz, "sigma_yz")?,
            )?,
            (None, Some(g)) => match (g.kind, &g.parameters) {
                (GeneratorKind::Random, None) => {
                    let d = self.dims;
                    if d.n_x == 0 || d.n_y == 0 || d.n_z == 0 {
                        return Err(Error::InvalidArgument("dimensions must be positive".into()));
                    }
                    model::random_instance(d.n_x, d.n_y, d.n_z, g.seed)
                }
                (GeneratorKind::NoisyObservation, Some(p)) => model::noisy_observation_instance(
                    &SpdMatrix::new(matrix(&p.sigma_x, "sigma_x")?, "sigma_x")?,
                    &matrix(&p.h, "h")?,
                    &SpdMatrix::new(matrix(&p.sigma_n1, "sigma_n1")?, "sigma_n1")?,
                    &matrix(&p.k, "k")?,
                    &SpdMatrix::new(matrix(&p.sigma_n2, "sigma_n2")?, "sigma_n2")?,
                )?,
                (GeneratorKind::Random, Some(_)) => {
                    return Err(Error::Parse("random generator takes no parameters".into()))
                }
                (GeneratorKind::NoisyObservation, None) => {
                    return Err(Error::Parse("noisy_observation generator needs parameters".into()))
                }
            },
            _ => {
                return Err(Error::Parse(
                    "model file needs exactly one of `blocks` and `generator`".into(),
                ))
            }
        };
        let found = (m.n_x(), m.n_y(), m.n_z());
        let want = (self.dims.n_x, self.dims.n_y, self.dims.n_z);
        if found != want {
            return Err(Error::DimensionMismatch(format!(
                "dims declare {want:?} but the model is {found:?}"
            )));
        }
        Ok(m)
    }
}

impl DistortionFile {
    pub fn new(d: &DMatrix<f64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            distortion: linalg::to_rows(d),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: Self = parse_json(text, "distortion file")?;
        check_schema(&f.schema_version)?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("distortion file serializes");
        s.push('\n');
        s
    }

    pub fn to_matrix(&self) -> Result<SpdMatrix> {
        SpdMatrix::new(matrix(&self.distortion, "distortion")?, "distortion")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Nats,
    Bits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingArg {
    Auto,
    Descending,
    Reversed,
    Aligned,
}

impl From<PairingArg> for Pairing {
    fn from(p: PairingArg) -> Self {
        match p {
            PairingArg::Auto => Pairing::Auto,
            PairingArg::Descending => Pairing::Descending,
            PairingArg::Reversed => Pairing::Reversed,
            PairingArg::Aligned => Pairing::Aligned,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rdx", version, about = "Rate-distortion bounds for remote Gaussian sources with decoder side information")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Unit of the headline rate; records always carry both.
    #[arg(long, value_enum, global = true, default_value = "nats")]
    pub unit: Unit,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArg {
    /// Model file (JSON).
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct TargetArg {
    /// Distortion file (JSON).
    #[arg(long)]
    pub distortion: Option<PathBuf>,
    /// Use `D = Σ_{x|yz} + t (Σ_{x|z} − Σ_{x|yz})`.
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Write a model file.
    Gen {
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: usize,
        #[arg(long)]
        nz: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// With --var-n2: `y = x + n₁`, `z = x + n₂` with white noise and a random source covariance.
        #[arg(long, requires = "var_n2")]
        var_n1: Option<f64>,
        #[arg(long, requires = "var_n1")]
        var_n2: Option<f64>,
    },
    /// Lower and upper rate bounds.
    Bounds {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArg,
        #[command(flatten)]
        #[serde(flatten)]
        target: TargetArg,
        #[arg(long, value_enum, default_value = "auto")]
        pairing: PairingArg,
    },
    /// Exact rate for `Σ_{x|yz} ≺ D ⪯ Σ_{x|z}`.
    Exact {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArg,
        #[command(flatten)]
        #[serde(flatten)]
        target: TargetArg,
    },
    /// Test channel achieving the upper bound.
    Channel {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArg,
        #[command(flatten)]
        #[serde(flatten)]
        target: TargetArg,
    },
    /// Rate under a trace constraint `tr E ≤ n_x · D`.
    Mse {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArg,
        #[arg(long = "mse-d", allow_negative_numbers = true)]
        mse_d: f64,
    },
    /// Rate needed to deliver `R_I` nats about the source.
    Raterate {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArg,
        #[arg(long, allow_negative_numbers = true)]
        ri: f64,
    },
    /// Monte Carlo check of the test channel.
    Simulate {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArg,
        #[command(flatten)]
        #[serde(flatten)]
        target: TargetArg,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = sim::DEFAULT_CHUNK)]
        chunk: usize,
    },
    /// Rate bounds along `D(t)` on a log-spaced grid.
    Sweep {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long = "t-max", default_value_t = rdf::SWEEP_T_MAX)]
        t_max: f64,
        /// Also write the curve as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// What a command produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub json: String,
    pub csv: Option<String>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Loaded inputs plus the digest of their bytes.
struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    fn new() -> Self {
        Self { hasher: Sha256::new() }
    }

    fn absorb(&mut self, text: &str) {
        self.hasher.update((text.len() as u64).to_le_bytes());
        self.hasher.update(text.as_bytes());
    }

    fn model(&mut self, arg: &ModelArg) -> Result<(JointModel, ConditionalStats)> {
        let text = read(&arg.model)?;
        self.absorb(&text);
        let m = ModelFile::parse(&text)?.to_model()?;
        let stats = model::derive_stats(&m)?;
        Ok((m, stats))
    }

    fn target(&mut self, arg: &TargetArg, stats: &ConditionalStats) -> Result<SpdMatrix> {
        match (&arg.distortion, arg.t) {
            (Some(p), None) => {
                let text = read(p)?;
                self.absorb(&text);
                DistortionFile::parse(&text)?.to_matrix()
            }
            (None, Some(t)) => rdf::distortion_on_path(stats, t),
            _ => Err(Error::InvalidArgument("give exactly one of --distortion and --t".into())),
        }
    }

    fn digest(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

fn rate(nats: f64) -> Value {
    if nats.is_finite() {
        json!({ "nats": nats, "bits": nats_to_bits(nats) })
    } else {
        json!({ "nats": Value::Null, "bits": Value::Null, "infinite": true })
    }
}

fn rows(m: &DMatrix<f64>) -> Value {
    json!(linalg::to_rows(m))
}

fn vector(v: impl IntoIterator<Item = f64>) -> Value {
    json!(v.into_iter().collect::<Vec<f64>>())
}

fn tolerances() -> Value {
    json!({ "rtol": RTOL, "pd_tol": PD_TOL, "rate_atol": RATE_ATOL })
}

fn record(cli: &Cli, digest: String, headline: (&str, f64), outputs: Value, diagnostics: Value) -> String {
    let value = match cli.unit {
        _ if !headline.1.is_finite() => Value::Null,
        Unit::Nats => json!(headline.1),
        Unit::Bits => json!(nats_to_bits(headline.1)),
    };
    let r = json!({
        "schema_version": SCHEMA_VERSION,
        "command": &cli.command,
        "inputs_digest": digest,
        "unit": cli.unit,
        "headline": { "quantity": headline.0, "value": value },
        "outputs": outputs,
        "diagnostics": diagnostics,
    });
    let mut s = serde_json::to_string_pretty(&r).expect("record serializes");
    s.push('\n');
    s
}

/// Regime flags for a target `D`.
fn regime(stats: &ConditionalStats, d: &SpdMatrix) -> Value {
    let above = linalg::min_eigenvalue(&(d.matrix() - stats.sigma_x_given_yz.matrix()));
    let below = linalg::min_eigenvalue(&(stats.sigma_x_given_z.matrix() - d.matrix()));
    let scale = linalg::spectral_norm(d);
    json!({
        "min_eig_d_minus_sigma_x_given_yz": above,
        "min_eig_sigma_x_given_z_minus_d": below,
        "tight_regime": above > PD_TOL * scale && below >= -PD_TOL * scale,
    })
}

/// Run a parsed command and return its output without writing anything.
pub fn run(cli: &Cli) -> Result<Emitted> {
    let mut inputs = Inputs::new();
    let json = match &cli.command {
        Command::Gen {
            nx,
            ny,
            nz,
            seed,
            var_n1,
            var_n2,
        } => {
            if *nx == 0 || *ny == 0 || *nz == 0 {
                return Err(Error::InvalidArgument("dimensions must be positive".into()));
            }
            let m = match (var_n1, var_n2) {
                (Some(v1), Some(v2)) => {
                    if ny != nx || nz != nx {
                        return Err(Error::InvalidArgument(
                            "white-noise models need --nx = --ny = --nz".into(),
                        ));
                    }
                    let source = model::random_instance(*nx, 1, 1, *seed);
                    model::white_noise_instance(source.sigma_x(), *v1, *v2)?
                }
                _ => model::random_instance(*nx, *ny, *nz, *seed),
            };
            return Ok(Emitted {
                json: ModelFile::from_model(&m).to_json(),
                csv: None,
            });
        }
        Command::Bounds {
            model,
            target,
            pairing,
        } => {
            let (_, stats) = inputs.model(model)?;
            let d = inputs.target(target, &stats)?;
            let b = rdf::rate_bounds_paired(&stats, &d, (*pairing).into())?;
            let jd = &b.diagonalization;
            let outputs = json!({
                "lower": rate(b.lower),
                "upper": rate(b.upper),
                "gap_nats": b.gap(),
                "coincide": b.coincide,
                "per_mode_lower_nats": b.per_mode_lower,
                "per_mode_upper_nats": b.per_mode_upper,
                "lambda": vector(jd.lambda.iter().copied()),
                "lambda_prime": vector(jd.lambda_prime.iter().copied()),
                "gamma": vector(jd.gamma.iter().copied()),
                "distortion": rows(&d),
            });
            let diag = json!({ "regime": regime(&stats, &d), "tolerances": tolerances() });
            record(cli, inputs.digest(), ("upper", b.upper), outputs, diag)
        }
        Command::Exact { model, target } => {
            let (_, stats) = inputs.model(model)?;
            let d = inputs.target(target, &stats)?;
            let r = rdf::exact_rdf(&stats, &d)?;
            let outputs = json!({ "rate": rate(r), "distortion": rows(&d) });
            let diag = json!({ "regime": regime(&stats, &d), "tolerances": tolerances() });
            record(cli, inputs.digest(), ("rate", r), outputs, diag)
        }
        Command::Channel { model, target } => {
            let (_, stats) = inputs.model(model)?;
            let d = inputs.target(target, &stats)?;
            let ch = rdf::build_test_channel(&stats, &d)?;
            let r = rdf::channel_rate(&ch, &stats)?;
            let achieved = rdf::achieved_distortion(&ch, &stats)?;
            let canonical = ch.canonical_form(&stats).map(|(enc, noise)| {
                json!({ "encoder": rows(&enc), "noise_cov": rows(&noise) })
            });
            let outputs = json!({
                "rate": rate(r),
                "encoder": rows(&ch.encoder),
                "noise_cov": rows(&ch.noise_cov),
                "basis_v": rows(&ch.basis.v),
                "achieved_distortion": rows(achieved.matrix()),
                "canonical": canonical,
                "distortion": rows(&d),
            });
            let diag = json!({
                "active": ch.active,
                "n_active": ch.n_active(),
                "regime": regime(&stats, &d),
                "tolerances": tolerances(),
            });
            record(cli, inputs.digest(), ("rate", r), outputs, diag)
        }
        Command::Mse { model, mse_d } => {
            let (_, stats) = inputs.model(model)?;
            let w = special::mse_rdf(&stats, *mse_d)?;
            let outputs = json!({
                "rate": rate(w.rate),
                "level": w.level,
                "allocations": w.allocations,
                "budget": w.budget,
                "lambda": w.lambda,
                "mse_d": mse_d,
            });
            let diag = json!({
                "bisection_tol": special::BISECTION_TOL,
                "all_modes_filled": w.level >= w.lambda[0],
            });
            record(cli, inputs.digest(), ("rate", w.rate), outputs, diag)
        }
        Command::Raterate { model, ri } => {
            let (_, stats) = inputs.model(model)?;
            let r = special::rate_rate(&stats, *ri)?;
            let outputs = json!({
                "rate": rate(r.rate),
                "gamma": r.gamma,
                "mu": r.mu,
                "r_i": rate(r.r_i),
            });
            let diag = json!({
                "bisection_tol": special::BISECTION_TOL,
                "r_i_max": rate(special::delivered_information(&r.mu, 0.0)),
            });
            record(cli, inputs.digest(), ("rate", r.rate), outputs, diag)
        }
        Command::Simulate {
            model,
            target,
            samples,
            seed,
            chunk,
        } => {
            let (m, stats) = inputs.model(model)?;
            let d = inputs.target(target, &stats)?;
            let cfg = sim::SimConfig::new(*samples, *seed)?.with_chunk(*chunk)?;
            let ch = rdf::build_test_channel(&stats, &d)?;
            let r = rdf::channel_rate(&ch, &stats)?;
            let rep = sim::run_test_channel(&m, &ch, &cfg)?;
            let outputs = json!({
                "rate": rate(r),
                "empirical_error_cov": rows(rep.empirical_error_cov.matrix()),
                "analytic_error_cov": rows(rep.analytic_error_cov.matrix()),
                "max_entry_dev": rep.max_entry_dev,
                "loewner_margin": rep.loewner_margin,
                "orthogonality_dev": rep.orthogonality_dev,
                "n_samples": rep.n_samples,
                "distortion": rows(&d),
            });
            let diag = json!({
                "entry_tolerance": rep.entry_tolerance,
                "loewner_tolerance": rep.loewner_tolerance,
                "orthogonality_tolerance": rep.orthogonality_tolerance,
                "within_tolerance": rep.max_entry_dev <= rep.entry_tolerance
                    && rep.loewner_margin >= -rep.loewner_tolerance
                    && rep.orthogonality_dev <= rep.orthogonality_tolerance,
                "active": ch.active,
                "clt_multiplier": sim::CLT_MULTIPLIER,
            });
            record(cli, inputs.digest(), ("rate", r), outputs, diag)
        }
        Command::Sweep {
            model,
            points,
            t_max,
            csv,
        } => {
            let (_, stats) = inputs.model(model)?;
            if *points < 2 {
                return Err(Error::InvalidArgument(format!("sweep needs at least 2 points, got {points}")));
            }
            if !(*t_max > rdf::SWEEP_T_MIN) || !t_max.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "--t-max must exceed {}, got {t_max}",
                    rdf::SWEEP_T_MIN
                )));
            }
            let curve = rdf::sweep_at(&stats, &rdf::sweep_grid(*points, *t_max))?;
            let pts: Vec<Value> = curve
                .iter()
                .map(|p| {
                    json!({
                        "t": p.t,
                        "lower": rate(p.lower),
                        "upper": rate(p.upper),
                        "exact": p.exact.map(rate),
                    })
                })
                .collect();
            let mut text = String::from("t,lower_nats,upper_nats,exact_nats\n");
            for p in &curve {
                let exact = p.exact.map(|e| format!("{e:?}")).unwrap_or_default();
                writeln!(text, "{:?},{:?},{:?},{exact}", p.t, p.lower, p.upper).expect("string write");
            }
            let first = curve.first().map_or(0.0, |p| p.upper);
            let outputs = json!({ "points": pts });
            let diag = json!({ "t_min_exclusive": rdf::SWEEP_T_MIN, "t_max": t_max, "tolerances": tolerances() });
            let json = record(cli, inputs.digest(), ("upper_at_smallest_t", first), outputs, diag);
            return Ok(Emitted {
                json,
                csv: csv.as_ref().map(|_| text),
            });
        }
    };
    Ok(Emitted { json, csv: None })
}

/// Run a command and write its outputs to `--out`/`--csv` or stdout.
pub fn execute(cli: &Cli) -> Result<()> {
    let emitted = run(cli)?;
    if let (Some(text), Command::Sweep { csv: Some(path), .. }) = (&emitted.csv, &cli.command) {
        write(path, text)?;
    }
    match &cli.out {
        Some(path) => write(path, &emitted.json),
        None => {
            print!("{}", emitted.json);
            Ok(())
        }
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("rdx: {e}");
            e.exit_code()
        }
    }
}
