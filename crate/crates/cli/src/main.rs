use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use smallqg::cyclo::{make_context, CycloContext};
use smallqg::greenring::{default_etas, GreenElem, GreenRing};
use smallqg::homalg::{claim_to_string, decompose, decompose_semisimple, Engine};
use smallqg::repcore::{block_index, regular_submodule, tensor, BlockIndex, IndecompLabel, Representation, Sign};
use smallqg::verify::{run_suite, Fault, Suite, SuiteConfig};

/// Exit code for malformed input, files or configuration.
const EXIT_INPUT: u8 = 4;

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("bad seed `{}`: {}", s, e))
}

#[derive(Parser)]
#[command(name = "smallqg", version, about = "Modules, tensor products and Green rings of the small quasi-quantum group at odd n")]
struct Cli {
    /// Root order: q is a primitive n-th root of unity (odd, > 2)
    #[arg(long, global = true, default_value_t = 3)]
    n: u32,
    #[arg(long, global = true, value_parser = parse_seed, default_value = "0xC0FFEE")]
    seed: u64,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Simple,
    BlockSimple,
    Proj,
    Syzygy,
    Regular,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    CorruptSimple,
}

#[derive(Subcommand)]
enum Cmd {
    /// Construct a module and write its JSON form
    BuildModule {
        #[arg(long, value_enum)]
        kind: Kind,
        /// simple: l; block-simple: t,r; proj: l; syzygy: sign,s,l; regular: i,j
        #[arg(long)]
        params: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tensor two modules given as JSON files
    Tensor {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the indecomposable summands of a module
    Decompose { module: PathBuf },
    /// Run verification suites and write a line-delimited JSON report
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 4)]
        s_max: u32,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Include per-check wall times (makes reports nondeterministic)
        #[arg(long)]
        timings: bool,
        #[arg(long, value_enum, hide = true)]
        fault: Option<FaultArg>,
    },
    /// Green ring arithmetic
    Green {
        #[command(subcommand)]
        cmd: GreenCmd,
    },
    /// Write a module label or a Green ring expression as JSON
    Export {
        #[arg(long, conflicts_with = "green", required_unless_present = "green")]
        module: Option<String>,
        #[arg(long)]
        green: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read and validate a JSON module or Green ring element
    Import { file: PathBuf },
}

#[derive(Subcommand)]
enum GreenCmd {
    Mul { a: String, b: String },
    Reduce {
        expr: String,
        /// Reduce in the stable Green ring
        #[arg(long)]
        stable: bool,
    },
    CheckPresentations {
        #[arg(long, default_value_t = 3)]
        s_max: u32,
    },
}

/// Error tagged with the exit code it should produce.
struct Failure(u8, anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_INPUT, e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, e)) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(code)
        }
    }
}

fn context(n: u32) -> Result<Arc<CycloContext>> {
    if n < 3 || n % 2 == 0 {
        bail!("n = {} must be odd and greater than 2", n);
    }
    make_context(n).map_err(|e| anyhow!("{}", e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| anyhow!("{}: line {}, column {}: {}", path.display(), e.line(), e.column(), e))
}

fn read_module(ctx: &Arc<CycloContext>, path: &Path) -> Result<Representation> {
    Representation::from_json(ctx, &read_json(path)?).map_err(|e| anyhow!("{}: {}", path.display(), e))
}

fn parse_kind(kind: Kind, params: &str) -> Result<IndecompLabel> {
    let parts: Vec<&str> = params.split(',').map(str::trim).collect();
    let num = |k: usize| -> Result<u32> {
        parts
            .get(k)
            .ok_or_else(|| anyhow!("--params `{}`: missing argument {}", params, k + 1))?
            .parse()
            .map_err(|e| anyhow!("--params `{}`: argument {}: {}", params, k + 1, e))
    };
    let want = |k: usize| -> Result<()> {
        if parts.len() != k {
            bail!("--params `{}`: expected {} comma-separated values", params, k);
        }
        Ok(())
    };
    Ok(match kind {
        Kind::Simple => {
            want(1)?;
            IndecompLabel::Simple(num(0)?)
        }
        Kind::BlockSimple => {
            want(2)?;
            IndecompLabel::BlockSimple(num(0)?, num(1)?)
        }
        Kind::Proj => {
            want(1)?;
            IndecompLabel::Proj(num(0)?)
        }
        Kind::Syzygy => {
            want(3)?;
            let sign = match parts[0] {
                "+" => Sign::Plus,
                "-" => Sign::Minus,
                other => bail!("--params `{}`: sign must be + or -, got `{}`", params, other),
            };
            IndecompLabel::Syzygy(sign, num(1)?, num(2)?)
        }
        Kind::Regular => unreachable!(),
    })
}

fn build_label(engine: &Engine, label: &IndecompLabel) -> Result<Representation> {
    let label = label.normalized(engine.n()).map_err(|e| anyhow!("{}", e))?;
    let rep = engine.build(&label).map_err(|e| anyhow!("{}", e))?;
    Ok((*rep).clone())
}

fn pretty_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<u8, Failure> {
    if let Some(t) = cli.threads {
        rayon_threads(t);
    }
    match cli.cmd {
        Cmd::BuildModule { kind, params, out } => {
            let ctx = context(cli.n)?;
            let rep = match kind {
                Kind::Regular => {
                    let ij: Vec<u32> = params
                        .split(',')
                        .map(|x| x.trim().parse())
                        .collect::<Result<_, _>>()
                        .map_err(|e| anyhow!("--params `{}`: {}", params, e))?;
                    if ij.len() != 2 {
                        return Err(anyhow!("--params `{}`: expected i,j", params).into());
                    }
                    let engine = Engine::new(&ctx, cli.seed);
                    regular_submodule(engine.algebra(), ij[0], ij[1]).map_err(|e| anyhow!("{}", e))?
                }
                _ => build_label(&Engine::new(&ctx, cli.seed), &parse_kind(kind, &params)?)?,
            };
            emit(out.as_deref(), &pretty_json(&rep.to_json()))?;
            Ok(0)
        }
        Cmd::Tensor { a, b, out } => {
            let ctx = context(cli.n)?;
            let (ma, mb) = (read_module(&ctx, &a)?, read_module(&ctx, &b)?);
            let t = tensor(&ma, &mb).map_err(|e| anyhow!("{}", e))?;
            emit(out.as_deref(), &pretty_json(&t.to_json()))?;
            Ok(0)
        }
        Cmd::Decompose { module } => {
            let ctx = context(cli.n)?;
            let m = read_module(&ctx, &module)?;
            let engine = Engine::new(&ctx, cli.seed);
            let semisimple_block = matches!(block_index(&m), Ok(BlockIndex::Block(i)) if i > 0);
            if semisimple_block {
                let claim = decompose_semisimple(&m).map_err(|e| Failure(3, anyhow!("{}", e)))?;
                println!("{}", claim_to_string(&claim));
                return Ok(0);
            }
            let d = decompose(&engine, &m).map_err(|e| Failure(3, anyhow!("{}", e)))?;
            println!("{}", claim_to_string(&d.summands));
            match d.unidentified {
                Some(rest) => {
                    println!("unidentified remainder of dimension {}", rest.dim());
                    Ok(2)
                }
                None => Ok(0),
            }
        }
        Cmd::Verify { suite, s_max, samples, report, timings, fault } => {
            let mut cfg = SuiteConfig::new(cli.n)?;
            cfg.seed = cli.seed;
            cfg.s_max = s_max;
            cfg.samples = samples;
            cfg.suites = Suite::parse_list(&suite)?;
            cfg.threads = cli.threads;
            cfg.timings = timings;
            cfg.fault = fault.map(|_| Fault::CorruptSimple);
            let rep = run_suite(&cfg)?;
            emit(report.as_deref(), &rep.to_jsonl())?;
            if report.is_some() {
                eprintln!("{}", rep.summary());
            }
            Ok(rep.exit_code() as u8)
        }
        Cmd::Green { cmd } => {
            let ring = GreenRing::new(cli.n)?;
            match cmd {
                GreenCmd::Mul { a, b } => {
                    let x = ring.parse(&a).map_err(|e| anyhow!("first operand: {}", e))?;
                    let y = ring.parse(&b).map_err(|e| anyhow!("second operand: {}", e))?;
                    println!("{}", ring.mul(&x, &y).map_err(|e| Failure(3, e.into()))?);
                }
                GreenCmd::Reduce { expr, stable } => {
                    let x = ring.parse(&expr)?;
                    let r = if stable { ring.reduce_stable(&x) } else { ring.reduce(&x) };
                    println!("{}", r.map_err(|e| Failure(3, e.into()))?);
                }
                GreenCmd::CheckPresentations { s_max } => {
                    let etas = default_etas();
                    let lines = ring.check_presentations(s_max, &etas, cli.seed);
                    let mut failed = 0;
                    for l in &lines {
                        println!("{} {} {} {}", if l.passed { "ok  " } else { "FAIL" }, l.id, l.params, l.detail);
                        failed += (!l.passed) as usize;
                    }
                    println!("{} checks, {} failed", lines.len(), failed);
                    return Ok((failed > 0) as u8);
                }
            }
            Ok(0)
        }
        Cmd::Export { module, green, out } => {
            let v = match (module, green) {
                (Some(label), _) => {
                    let ctx = context(cli.n)?;
                    let l: IndecompLabel = label.parse().map_err(|e| anyhow!("{}", e))?;
                    build_label(&Engine::new(&ctx, cli.seed), &l)?.to_json()
                }
                (None, Some(expr)) => GreenRing::new(cli.n)?.parse(&expr)?.to_json(),
                (None, None) => unreachable!(),
            };
            emit(out.as_deref(), &pretty_json(&v))?;
            Ok(0)
        }
        Cmd::Import { file } => {
            let v = read_json(&file)?;
            if v.is_array() {
                let ring = GreenRing::new(cli.n)?;
                let e = GreenElem::from_json(&ring, &v).map_err(|e| anyhow!("{}: {}", file.display(), e))?;
                println!("{}", ring.reduce(&e).map_err(|e| Failure(3, e.into()))?);
            } else {
                let ctx = context(cli.n)?;
                let m = read_module(&ctx, &file)?;
                let label = m.label().map(|l| l.to_string()).unwrap_or_else(|| "unlabelled".into());
                println!("valid module: dim {}, {}", m.dim(), label);
            }
            Ok(0)
        }
    }
}

fn rayon_threads(t: usize) {
    let _ = smallqg::verify::set_global_threads(t);
}
