//! `mrlocal` command-line front end.
//!
//! Exit codes: 0 success, 1 property or decoding failure, 2 usage or
//! parameter error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::artifact::{self, ArtifactError};
use crate::codec::{pack_symbols, read_stripe, unpack_symbols, write_stripe, Codec, CodecError};
use crate::constructions::{
    build, check_preconditions, normalize_params, CodeInstance, Construction, Layout,
    LocalCodeParams,
};
use crate::selftest;
use crate::verifier::{verify, Family, Mode, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable holding the worker count for verification.
pub const THREADS_ENV: &str = "MRLOCAL_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "mrlocal",
    version,
    about = "Build, verify and use maximally recoverable local codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Construct a code and write its artifact.
    Build {
        #[arg(long)]
        construction: Construction,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        h: usize,
        /// Round parameters up to the nearest ones the construction accepts.
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the MR or SD property of an artifact.
    Verify {
        file: PathBuf,
        #[arg(long, value_enum)]
        property: PropertyArg,
        /// `exhaustive`, or `sample N`.
        #[arg(long, num_args = 1..=2, value_names = ["MODE", "N"], default_values = ["exhaustive"])]
        mode: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the number of failing patterns.
        #[arg(long)]
        census: bool,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Encode a file of k packed symbols into a stripe file.
    Encode {
        file: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover the data symbols of a stripe file, honoring its erasure mask.
    Decode {
        file: PathBuf,
        #[arg(long)]
        stripe: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the desk-scale acceptance checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum PropertyArg {
    Mr,
    Sd,
}

impl From<PropertyArg> for Family {
    fn from(p: PropertyArg) -> Self {
        match p {
            PropertyArg::Mr => Family::Mr,
            PropertyArg::Sd => Family::Sd,
        }
    }
}

/// Error carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn failed(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_FAILURE,
        message: message.into(),
    }
}

impl From<ArtifactError> for Failure {
    fn from(e: ArtifactError) -> Self {
        usage(e.to_string())
    }
}

impl From<CodecError> for Failure {
    fn from(e: CodecError) -> Self {
        match e {
            CodecError::WrongDataLength { .. } => usage(e.to_string()),
            _ => failed(e.to_string()),
        }
    }
}

type Outcome = Result<i32, Failure>;

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn thread_count() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = thread_count().and_then(|threads| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            builder = builder.num_threads(n);
        }
        let pool = builder
            .build()
            .map_err(|e| usage(format!("cannot start worker pool: {e}")))?;
        let mut buffer = Vec::new();
        let result = pool.install(|| dispatch(cli.command, &mut buffer));
        out.write_all(&buffer)
            .map_err(|e| usage(format!("write failed: {e}")))?;
        result
    });
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Build {
            construction,
            k,
            r,
            h,
            normalize,
            out: path,
        } => cmd_build(construction, k, r, h, normalize, &path, out),
        Command::Verify {
            file,
            property,
            mode,
            seed,
            census,
            json,
        } => {
            let mode = parse_mode(&mode, seed)?;
            cmd_verify(&file, property.into(), mode, census, json, out)
        }
        Command::Encode {
            file,
            data,
            out: path,
        } => cmd_encode(&file, &data, &path, out),
        Command::Decode {
            file,
            stripe,
            out: path,
        } => cmd_decode(&file, &stripe, &path, out),
        Command::Selftest => cmd_selftest(out),
    }
}

fn parse_mode(words: &[String], seed: u64) -> Result<Mode, Failure> {
    match words {
        [m] if m == "exhaustive" => Ok(Mode::Exhaustive),
        [m, n] if m == "sample" => {
            n.parse()
                .map(|count| Mode::Sample { seed, count })
                .map_err(|_| {
                    usage(format!(
                        "sample count must be a non-negative integer, got {n:?}"
                    ))
                })
        }
        [m] if m == "sample" => Err(usage("--mode sample needs a count: --mode sample N")),
        _ => Err(usage(format!(
            "--mode must be `exhaustive` or `sample N`, got {:?}",
            words.join(" ")
        ))),
    }
}

fn layout_t(instance: &CodeInstance) -> String {
    match instance.layout() {
        Layout::Vandermonde(l) => l.t.to_string(),
        Layout::SdH3(l) => l.t.to_string(),
        Layout::Linearized(_) => "-".to_string(),
    }
}

fn emit(out: &mut dyn Write, text: std::fmt::Arguments) -> Result<(), Failure> {
    out.write_fmt(text)
        .and_then(|_| out.write_all(b"\n"))
        .map_err(|e| usage(format!("write failed: {e}")))
}

fn cmd_build(
    construction: Construction,
    k: usize,
    r: usize,
    h: usize,
    normalize: bool,
    path: &Path,
    out: &mut dyn Write,
) -> Outcome {
    let params = if normalize {
        let normalized =
            normalize_params(k, r, h, construction).map_err(|e| usage(e.to_string()))?;
        for a in &normalized.adjustments {
            emit(out, format_args!("normalized {a}"))?;
        }
        normalized.params
    } else {
        let params = LocalCodeParams::new(k, r, h).map_err(|e| usage(e.to_string()))?;
        check_preconditions(&params, construction)
            .map_err(|e| usage(format!("{e} (use --normalize to round parameters up)")))?;
        params
    };
    let instance = build(&params, construction).map_err(|e| usage(e.to_string()))?;
    let file = artifact::save(&instance, path)?;
    let predicted = instance
        .predicted_field_order()
        .map_or("overflow".to_string(), |v| v.to_string());
    emit(out, format_args!("construction {construction}"))?;
    emit(out, format_args!("params {params}"))?;
    emit(
        out,
        format_args!(
            "q = {} (formula {predicted}), t = {}, n = {}, g = {}",
            instance.field_order(),
            layout_t(&instance),
            params.n,
            params.g
        ),
    )?;
    emit(out, format_args!("guarantee {}", instance.guarantee()))?;
    // Heavy parities need not depend on every data symbol; report, don't reject.
    match Codec::new(&instance) {
        Ok(codec) => emit(
            out,
            format_args!(
                "heavy parity zero coefficients on {} data symbols: {:?}",
                params.k,
                codec.heavy_zero_coefficients()
            ),
        )?,
        Err(e) => emit(out, format_args!("encoding unavailable: {e}"))?,
    }
    emit(
        out,
        format_args!(
            "wrote {} (content hash {})",
            path.display(),
            file.content_hash
        ),
    )?;
    Ok(EXIT_OK)
}

fn cmd_verify(
    path: &Path,
    family: Family,
    mode: Mode,
    census: bool,
    json: bool,
    out: &mut dyn Write,
) -> Outcome {
    let (_, instance) = artifact::load(path)?;
    let report = verify(
        &instance,
        family,
        &VerifyOptions {
            mode,
            ..VerifyOptions::exhaustive()
        },
    );
    if json {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        emit(out, format_args!("{text}"))?;
    } else {
        emit(out, format_args!("{report}"))?;
        if census {
            emit(
                out,
                format_args!(
                    "census: {} of {} patterns failing",
                    report.failing, report.patterns_checked
                ),
            )?;
        }
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_encode(path: &Path, data: &Path, stripe_path: &Path, out: &mut dyn Write) -> Outcome {
    let (file, instance) = artifact::load(path)?;
    let symbols =
        unpack_symbols(instance.field(), &read_file(data)?).map_err(|e| usage(e.to_string()))?;
    let codec = Codec::new(&instance)?;
    let stripe = codec.encode(&symbols)?;
    write_file(stripe_path, &write_stripe(&stripe, &file.hash_bytes()))?;
    emit(
        out,
        format_args!(
            "encoded {} data symbols into {} symbols",
            symbols.len(),
            stripe.len()
        ),
    )?;
    Ok(EXIT_OK)
}

fn cmd_decode(path: &Path, stripe_path: &Path, data: &Path, out: &mut dyn Write) -> Outcome {
    let (file, instance) = artifact::load(path)?;
    let stripe = read_stripe(
        &read_file(stripe_path)?,
        instance.field(),
        &file.hash_bytes(),
    )?;
    let codec = Codec::new(&instance)?;
    let erased = stripe.erasures();
    let decoded = codec.decode(&stripe)?;
    write_file(data, &pack_symbols(&codec.extract_data(&decoded)))?;
    emit(
        out,
        format_args!("recovered {} erased symbols {:?}", erased.len(), erased),
    )?;
    Ok(EXIT_OK)
}

fn cmd_selftest(out: &mut dyn Write) -> Outcome {
    let outcomes = selftest::run_all();
    out.write_all(selftest::render(&outcomes).as_bytes())
        .map_err(|e| usage(format!("write failed: {e}")))?;
    Ok(if outcomes.iter().all(|o| o.ok()) {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}
