use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use splitconv::algebra::{Field, Gf};
use splitconv::base::{search_points, EvaluationPoints};
use splitconv::bounds::{
    self, construction_betas, curve, curve_csv, to_decimal, BetaAssignment, BoundInputs, Rational,
};
use splitconv::convertible::{
    build_final_code, build_initial_code, verify_mds_vector, ConversionParams, VectorCode,
};
use splitconv::engine::{
    convert, convert_default, decode, encode, message_slice, BandwidthReport, CodewordFile,
};
use splitconv::flow::{check_feasibility, lemma_cut_value};

#[derive(Parser)]
#[command(
    name = "splitconv",
    version,
    about = "Split conversion of MDS codes with low read bandwidth"
)]
struct Cli {
    /// Reducing polynomial of GF(2^8), decimal or 0x-hex.
    #[arg(long, global = true, default_value = "0x11d", value_parser = parse_poly)]
    field_poly: u16,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive alpha, betas and the case from (nI, kI; nF, kF).
    Params(ParamFlags),
    /// Search evaluation points shared by the initial and final codes.
    Points {
        #[command(flatten)]
        params: ParamSource,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode a message file (zero-padded) or a seeded random message.
    Encode {
        #[command(flatten)]
        params: ParamSource,
        #[arg(long)]
        points_file: Option<PathBuf>,
        /// Raw message bytes; random if omitted.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split an initial codeword into final codewords.
    Convert {
        #[command(flatten)]
        params: ParamSource,
        #[arg(long)]
        points_file: Option<PathBuf>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Where to write the JSON bandwidth report (also printed).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Read all data and re-encode instead.
        #[arg(long)]
        default: bool,
    },
    /// Recover the message from a codeword file.
    Decode {
        #[command(flatten)]
        params: ParamSource,
        #[arg(long)]
        points_file: Option<PathBuf>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = CodeKind::Initial)]
        code: CodeKind,
        /// Symbols treated as lost (0-based, comma separated).
        #[arg(long, value_delimiter = ',')]
        erase: Vec<usize>,
        /// Truncate the output to this many bytes.
        #[arg(long)]
        len: Option<usize>,
    },
    /// MDS checks, conversion round trips, bandwidth accounting and flow feasibility.
    Verify {
        #[command(flatten)]
        params: ParamSource,
        #[arg(long)]
        points_file: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Relative read-bandwidth curve.
    Bounds {
        #[arg(long = "lf")]
        lambda_f: usize,
        /// rI/kI as a fraction or decimal, e.g. 3/8 or 0.375.
        #[arg(long, value_parser = parse_rational)]
        ri_over_ki: Rational,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// kF used to mark points the construction reaches.
        #[arg(long, default_value_t = 8)]
        example_kf: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read bandwidth of the default, access-optimal and piggyback approaches.
    BoundsTable {
        #[command(flatten)]
        params: ParamSource,
    },
    /// Max-flow feasibility of per-symbol download sizes.
    FlowCheck {
        #[command(flatten)]
        params: ParamSource,
        /// Subsymbols read per unchanged symbol; construction value if omitted.
        #[arg(long, value_parser = parse_rational)]
        beta1: Option<Rational>,
        /// Subsymbols read per retired symbol; construction value if omitted.
        #[arg(long, value_parser = parse_rational)]
        beta2: Option<Rational>,
    },
}

#[derive(Args, Clone, Copy)]
struct ParamFlags {
    #[arg(long)]
    ni: usize,
    #[arg(long)]
    ki: usize,
    #[arg(long)]
    nf: usize,
    #[arg(long)]
    kf: usize,
}

#[derive(Args)]
struct ParamSource {
    /// JSON with ni, ki, nf, kf (the output of `params` works).
    #[arg(long, conflicts_with_all = ["ni", "ki", "nf", "kf"])]
    params_file: Option<PathBuf>,
    #[arg(long, requires_all = ["ki", "nf", "kf"])]
    ni: Option<usize>,
    #[arg(long)]
    ki: Option<usize>,
    #[arg(long)]
    nf: Option<usize>,
    #[arg(long)]
    kf: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CodeKind {
    Initial,
    Final,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Deserialize)]
struct ParamsFile {
    ni: usize,
    ki: usize,
    nf: usize,
    kf: usize,
}

/// Failure classes, each with its exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reason {
    VerificationFailed,
    NotSplitRegime,
    NoSavingsRegion,
    IoFormat,
}

impl Reason {
    fn code(self) -> u8 {
        match self {
            Reason::VerificationFailed => 1,
            Reason::NotSplitRegime => 2,
            Reason::NoSavingsRegion => 3,
            Reason::IoFormat => 4,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Reason::VerificationFailed => "VERIFICATION_FAILED",
            Reason::NotSplitRegime => "NOT_SPLIT_REGIME",
            Reason::NoSavingsRegion => "NO_SAVINGS_REGION",
            Reason::IoFormat => "IO_FORMAT_ERROR",
        }
    }
}

#[derive(Debug)]
struct Failed(Reason, String);

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Failed {}

fn classify(err: &anyhow::Error) -> Reason {
    if let Some(Failed(r, _)) = err.downcast_ref::<Failed>() {
        return *r;
    }
    match err
        .chain()
        .find_map(|e| e.downcast_ref::<splitconv::Error>())
    {
        Some(splitconv::Error::NotSplitRegime { .. }) => Reason::NotSplitRegime,
        Some(splitconv::Error::NoSavings { .. }) => Reason::NoSavingsRegion,
        _ => Reason::IoFormat,
    }
}

fn parse_poly(s: &str) -> Result<u16, String> {
    let s = s.trim();
    let v = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u16::from_str_radix(hex, 16),
        None => s.parse(),
    };
    v.map_err(|e| format!("bad polynomial {s:?}: {e}"))
}

/// `a/b`, an integer, or a finite decimal, exactly.
fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    if s.contains('/') {
        return s
            .parse::<Rational>()
            .map_err(|_| format!("bad fraction {s:?}"));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(format!("bad number {s:?}"));
    }
    let digits = format!("{int}{frac}");
    let numer: i64 = digits.parse().map_err(|_| format!("bad number {s:?}"))?;
    Ok(Ratio::new(numer, 10i64.pow(frac.len() as u32)))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| {
        Failed(
            Reason::IoFormat,
            format!("cannot read {}: {e}", path.display()),
        )
        .into()
    })
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| {
        Failed(
            Reason::IoFormat,
            format!("cannot write {}: {e}", path.display()),
        )
        .into()
    })
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

impl ParamSource {
    fn load(&self) -> Result<ConversionParams> {
        let flags = match (&self.params_file, self.ni, self.ki, self.nf, self.kf) {
            (Some(path), ..) => {
                let f: ParamsFile = serde_json::from_slice(&read_file(path)?)
                    .with_context(|| format!("parsing {}", path.display()))?;
                ParamFlags {
                    ni: f.ni,
                    ki: f.ki,
                    nf: f.nf,
                    kf: f.kf,
                }
            }
            (None, Some(ni), Some(ki), Some(nf), Some(kf)) => ParamFlags { ni, ki, nf, kf },
            _ => bail!(Failed(
                Reason::IoFormat,
                "give --params-file or all of --ni --ki --nf --kf".into()
            )),
        };
        Ok(ConversionParams::derive(
            flags.ni, flags.ki, flags.nf, flags.kf,
        )?)
    }
}

struct Setup {
    field: &'static Field,
    params: ConversionParams,
    points: EvaluationPoints,
}

impl Setup {
    /// Points from the file are taken as given so that `verify` can catch bad ones.
    fn load(
        field: &'static Field,
        params: &ParamSource,
        points_file: Option<&Path>,
    ) -> Result<Self> {
        let params = params.load()?;
        let points = match points_file {
            Some(path) => {
                let raw: Vec<u8> = serde_json::from_slice(&read_file(path)?)
                    .with_context(|| format!("parsing {}", path.display()))?;
                let points = EvaluationPoints::new_unchecked(raw.into_iter().map(Gf).collect());
                if points.len() < params.max_r() {
                    bail!(Failed(
                        Reason::IoFormat,
                        format!(
                            "{} needs {} points, has {}",
                            path.display(),
                            params.max_r(),
                            points.len()
                        )
                    ));
                }
                points
            }
            None => search_points(
                field,
                params.k_i + params.max_r(),
                params.k_i,
                params.max_r(),
            )?,
        };
        Ok(Setup {
            field,
            params,
            points,
        })
    }

    fn initial(&self) -> Result<VectorCode> {
        Ok(build_initial_code(self.field, &self.params, &self.points)?)
    }

    fn final_code(&self) -> Result<VectorCode> {
        Ok(build_final_code(self.field, &self.params, &self.points)?)
    }

    fn read_codeword(&self, path: &Path, n: usize, k: usize) -> Result<CodewordFile> {
        let file = CodewordFile::from_bytes(&read_file(path)?)
            .with_context(|| format!("reading {}", path.display()))?;
        let (got_n, got_alpha) = (file.codeword.n(), file.codeword.alpha());
        if file.poly != self.field.poly() {
            bail!(Failed(
                Reason::IoFormat,
                format!(
                    "{} uses polynomial {:#05x}, expected {:#05x}",
                    path.display(),
                    file.poly,
                    self.field.poly()
                )
            ));
        }
        if (got_n, file.k, got_alpha) != (n, k, self.params.alpha) {
            bail!(Failed(
                Reason::IoFormat,
                format!(
                    "{} holds an [{got_n}, {}, {got_alpha}] codeword, expected [{n}, {k}, {}]",
                    path.display(),
                    file.k,
                    self.params.alpha
                )
            ));
        }
        Ok(file)
    }
}

#[derive(Serialize)]
struct EncodeSummary {
    n: usize,
    k: usize,
    alpha: usize,
    message_len: usize,
    padded_len: usize,
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct VerifyReport {
    passed: bool,
    checks: Vec<Check>,
}

fn run(cli: Cli) -> Result<String> {
    let field = Field::get(cli.field_poly)
        .map_err(|e| Failed(Reason::IoFormat, format!("--field-poly: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    match cli.command {
        Command::Params(f) => to_json(&ConversionParams::derive(f.ni, f.ki, f.nf, f.kf)?),

        Command::Points { params, out } => {
            let s = Setup::load(field, &params, None)?;
            let json = to_json(&s.points)?;
            if let Some(out) = out {
                write_file(&out, &json)?;
            }
            Ok(json)
        }

        Command::Encode {
            params,
            points_file,
            input,
            out,
        } => {
            let s = Setup::load(field, &params, points_file.as_deref())?;
            let code = s.initial()?;
            let len = code.message_len();
            let bytes = match input {
                Some(path) => read_file(&path)?,
                None => (0..len).map(|_| rng.gen()).collect(),
            };
            if bytes.len() > len {
                bail!(Failed(
                    Reason::IoFormat,
                    format!("message has {} bytes, code holds {len}", bytes.len())
                ));
            }
            let mut message: Vec<Gf> = bytes.iter().map(|&b| Gf(b)).collect();
            message.resize(len, Gf::ZERO);
            let codeword = encode(&code, &message)?;
            let file = CodewordFile {
                poly: field.poly(),
                k: code.k,
                codeword,
            };
            write_file(&out, file.to_bytes()?)?;
            to_json(&EncodeSummary {
                n: code.n,
                k: code.k,
                alpha: code.alpha,
                message_len: bytes.len(),
                padded_len: len,
            })
        }

        Command::Convert {
            params,
            points_file,
            input,
            out_dir,
            report,
            default,
        } => {
            let s = Setup::load(field, &params, points_file.as_deref())?;
            let file = s.read_codeword(&input, s.params.n_i, s.params.k_i)?;
            let (finals, rep): (_, BandwidthReport) = if default {
                convert_default(file.codeword, &s.params, &s.final_code()?)?
            } else {
                convert(field, file.codeword, &s.params, &s.points)?
            };
            fs::create_dir_all(&out_dir).map_err(|e| {
                Failed(
                    Reason::IoFormat,
                    format!("cannot create {}: {e}", out_dir.display()),
                )
            })?;
            for (i, codeword) in finals.into_iter().enumerate() {
                let f = CodewordFile {
                    poly: field.poly(),
                    k: s.params.k_f,
                    codeword,
                };
                write_file(
                    &out_dir.join(format!("final_{}.cvtc", i + 1)),
                    f.to_bytes()?,
                )?;
            }
            let json = to_json(&rep)?;
            if let Some(path) = report {
                write_file(&path, &json)?;
            }
            Ok(json)
        }

        Command::Decode {
            params,
            points_file,
            input,
            out,
            code,
            erase,
            len,
        } => {
            let s = Setup::load(field, &params, points_file.as_deref())?;
            let code = match code {
                CodeKind::Initial => s.initial()?,
                CodeKind::Final => s.final_code()?,
            };
            let file = s.read_codeword(&input, code.n, code.k)?;
            let available: Vec<(usize, Vec<Gf>)> = file
                .codeword
                .symbols
                .into_iter()
                .enumerate()
                .filter(|(i, _)| !erase.contains(i))
                .take(code.k)
                .collect();
            let message = decode(&code, &available)?;
            let mut bytes: Vec<u8> = message.iter().map(|g| g.0).collect();
            if let Some(len) = len {
                bytes.truncate(len);
            }
            write_file(&out, &bytes)?;
            to_json(&serde_json::json!({ "message_len": bytes.len() }))
        }

        Command::Verify {
            params,
            points_file,
            trials,
        } => {
            let s = Setup::load(field, &params, points_file.as_deref())?;
            let report = verify(&s, trials, &mut rng)?;
            let json = to_json(&report)?;
            if !report.passed {
                print!("{json}");
                bail!(Failed(
                    Reason::VerificationFailed,
                    "one or more checks failed".into()
                ));
            }
            Ok(json)
        }

        Command::Bounds {
            lambda_f,
            ri_over_ki,
            samples,
            example_kf,
            format,
            out,
        } => {
            let pts = curve(lambda_f, ri_over_ki, samples, example_kf)?;
            let text = match format {
                Format::Csv => curve_csv(&pts),
                Format::Json => to_json(&pts)?,
            };
            if let Some(out) = out {
                write_file(&out, &text)?;
            }
            Ok(text)
        }

        Command::BoundsTable { params } => Ok(bounds_table(&params.load()?)),

        Command::FlowCheck {
            params,
            beta1,
            beta2,
        } => {
            let p = params.load()?;
            let b = BoundInputs::from_params(&p);
            let alpha = Rational::from_integer(p.alpha as i64);
            let base = construction_betas(&p);
            let betas = BetaAssignment::new(
                beta1.map_or(base.beta1, |v| v / alpha),
                beta2.map_or(base.beta2, |v| v / alpha),
            )?;
            let rep = check_feasibility(&b, &betas)?;
            let scaled = |q: Rational| serde_json::to_value(ScaledRational(q * alpha)).unwrap();
            let value = serde_json::json!({
                "feasible": rep.feasible,
                "worst_flow": scaled(rep.worst_flow),
                "worst_collectors": rep.worst_collectors,
                "lemma_cut_value": scaled(lemma_cut_value(&b, &betas)),
                "required_flow": scaled(rep.required_flow),
                "beta1": scaled(betas.beta1),
                "beta2": scaled(betas.beta2),
                "alpha": p.alpha,
            });
            to_json(&value)
        }
    }
}

#[derive(Serialize)]
struct ScaledRational(#[serde(with = "bounds::serde_rational")] Rational);

fn bounds_table(p: &ConversionParams) -> String {
    let b = BoundInputs::from_params(p);
    let alpha = Rational::from_integer(p.alpha as i64);
    let piggyback = bounds::read_bandwidth(&b, &construction_betas(p));
    let mut rows = vec![
        ("Default", bounds::gamma_read_default(&b)),
        ("Access optimal", bounds::gamma_read_access_optimal(&b)),
        ("Piggyback construction", piggyback),
        ("Lower bound (loose)", bounds::bound_loose(&b)),
    ];
    if let Ok(t) = bounds::bound_tight(&b) {
        rows.push(("Lower bound (tight)", t));
    }
    let mut out = format!(
        "({}, {}; {}, {})  alpha = {}\n{:<24}{:>14}{:>14}\n",
        p.n_i, p.k_i, p.n_f, p.k_f, p.alpha, "approach", "x alpha", "subsymbols"
    );
    for (name, v) in rows {
        let count = v * alpha;
        let shown = if count.is_integer() {
            count.to_string()
        } else {
            to_decimal(&count, 3)
        };
        out.push_str(&format!("{name:<24}{:>14}{shown:>14}\n", v.to_string()));
    }
    out
}

fn verify(s: &Setup, trials: usize, rng: &mut ChaCha8Rng) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let initial = s.initial()?;
    let final_code = match s.final_code() {
        Ok(c) => Some(c),
        Err(e) => {
            checks.push(Check {
                name: "final_code_shared",
                passed: false,
                detail: e.to_string(),
            });
            None
        }
    };
    let ok = verify_mds_vector(&initial);
    checks.push(Check {
        name: "initial_mds",
        passed: ok,
        detail: format!(
            "[{}, {}, {}] over all {}-subsets",
            initial.n, initial.k, initial.alpha, initial.k
        ),
    });
    if let Some(fc) = &final_code {
        let ok = verify_mds_vector(fc);
        checks.push(Check {
            name: "final_mds",
            passed: ok,
            detail: format!(
                "[{}, {}, {}] over all {}-subsets",
                fc.n, fc.k, fc.alpha, fc.k
            ),
        });
        let p = &s.params;
        let expected_read = p.gamma_read();
        let mut mismatches = 0;
        let mut bad_reports = 0;
        let mut last: Option<BandwidthReport> = None;
        for _ in 0..trials {
            let m: Vec<Gf> = (0..initial.message_len()).map(|_| Gf(rng.gen())).collect();
            let cw = encode(&initial, &m)?;
            let (finals, rep) = convert(s.field, cw, p, &s.points)?;
            for (i, f) in finals.iter().enumerate() {
                if *f != encode(fc, message_slice(&m, p, i + 1))? {
                    mismatches += 1;
                }
            }
            if rep.gamma_r != expected_read || rep.gamma_w != p.gamma_write() {
                bad_reports += 1;
            }
            last = Some(rep);
        }
        checks.push(Check {
            name: "conversion_round_trip",
            passed: mismatches == 0,
            detail: format!("{trials} messages, {mismatches} mismatched final codewords"),
        });
        let detail = match &last {
            Some(r) => format!(
                "gamma_r = {} (expected {expected_read}), gamma_w = {}, bound_loose = {}, bound_tight = {}",
                r.gamma_r,
                r.gamma_w,
                r.bound_loose,
                r.bound_tight.map_or("n/a".to_string(), |t| t.to_string())
            ),
            None => "no trials run".into(),
        };
        checks.push(Check {
            name: "bandwidth_accounting",
            passed: bad_reports == 0,
            detail,
        });
    }
    let b = BoundInputs::from_params(&s.params);
    let betas = construction_betas(&s.params);
    let flow = check_feasibility(&b, &betas)?;
    checks.push(Check {
        name: "flow_feasible",
        passed: flow.feasible,
        detail: format!(
            "worst flow {} of required {} (x alpha)",
            flow.worst_flow, flow.required_flow
        ),
    });
    let optimal = bounds::construction_is_optimal(&s.params);
    checks.push(Check {
        name: "meets_lower_bound",
        passed: optimal,
        detail: format!(
            "gamma_r = {} subsymbols",
            bounds::construction_gamma_read(&s.params)
        ),
    });
    Ok(VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            let reason = classify(&err);
            eprintln!("{}: {err:#}", reason.tag());
            ExitCode::from(reason.code())
        }
    }
}
