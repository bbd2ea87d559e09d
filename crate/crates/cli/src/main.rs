//! `braidtrack`: braid group generators of plane curves, line arrangements
//! and hypersurfaces restricted to a line.

mod text;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use braidtrack_core::branchlocus::{branch_points, ArrangementJson, LineArrangement};
use braidtrack_core::braid::{render, BraidWord, RenderFormat};
use braidtrack_core::engine::{
    arrangement_braid_generators, braid_generators, restrict_to_line, verify_report, EngineError,
    EngineOptions, GroupReport, InputKind, ReportJson,
};
use braidtrack_core::poly::{parse_multivariate, parse_poly, BivariatePoly, Complex, PolyJson};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "braidtrack", version, about = "Braid monodromy by fiber tracking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    cfg: Config,
}

#[derive(Subcommand)]
enum Command {
    /// Braid group generators of a curve f(z, t) = 0.
    Braid {
        /// Polynomial expression, or a file holding one (text or JSON).
        input: String,
    },
    /// Branch points of a curve.
    Branch { input: String },
    /// Braid group generators of a line arrangement.
    Arrangement {
        /// JSON file with a 3×d `matrix` of linear forms or affine `lines`.
        input: PathBuf,
    },
    /// Restricts F(z, u1, ..., um) to a line in u-space and runs `braid`.
    Hypersurface {
        input: String,
        /// Variable names, z-variable first.
        #[arg(long, value_delimiter = ',', default_value = "z,u,v")]
        vars: Vec<String>,
        /// Point on the line, one complex number per u-variable.
        #[arg(long, value_delimiter = ';')]
        u0: Option<Vec<String>>,
        /// Direction of the line.
        #[arg(long, value_delimiter = ';')]
        dir: Option<Vec<String>>,
    },
    /// Draws a braid word.
    Render {
        /// Letters such as "s2 s1^-1 s2"; empty for the identity.
        word: String,
        #[arg(long, short = 'n')]
        strands: usize,
    },
    /// Rechecks a report against its input.
    Verify {
        report: PathBuf,
        /// The curve or arrangement the report was computed from.
        input: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct Config {
    #[arg(long, global = true, env = "BRAIDTRACK_SEED", default_value_t = 0)]
    seed: u64,
    /// Fixed direction λ, e.g. "0.6+0.8i"; disables retries.
    #[arg(long, global = true)]
    lambda: Option<String>,
    #[arg(long, global = true)]
    polygon_sides: Option<usize>,
    #[arg(long, global = true)]
    radius_factor: Option<f64>,
    /// Newton tolerance of the path tracker.
    #[arg(long, global = true)]
    track_tol: Option<f64>,
    /// Real-part gap under which two strands count as crossing.
    #[arg(long, global = true)]
    cross_tol: Option<f64>,
    /// Real-part gap under which three strands make a crossing improper.
    #[arg(long, global = true)]
    proper_tol: Option<f64>,
    #[arg(long, global = true)]
    lambda_retries: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Diagram formats: ascii, svg, tikz. With `render` this picks the
    /// output; otherwise one file per generator is written next to --out.
    #[arg(long, global = true, value_delimiter = ',')]
    render: Vec<String>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<String> for Failure {
    fn from(msg: String) -> Self {
        Self { code: 1, msg }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Self {
            code: if e.is_lambda_exhaustion() { 2 } else { 1 },
            msg: e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn parse_complex(s: &str) -> Result<Complex, String> {
    let p = parse_multivariate(s, &[]).map_err(|e| format!("bad complex number '{s}': {e}"))?;
    p.as_constant().ok_or_else(|| format!("bad complex number '{s}'"))
}

impl Config {
    fn engine(&self) -> Result<EngineOptions, String> {
        let mut o = EngineOptions::seeded(self.seed);
        o.lambda = self.lambda.as_deref().map(parse_complex).transpose()?;
        if let Some(m) = self.polygon_sides {
            o.looping.polygon_sides = m;
        }
        if let Some(r) = self.radius_factor {
            o.looping.radius_factor = r;
        }
        if let Some(t) = self.track_tol {
            o.track.newton_tol = t;
        }
        if let Some(t) = self.cross_tol {
            o.cross.cross_tol = t;
        }
        if let Some(t) = self.proper_tol {
            o.cross.proper_tol = t;
        }
        if let Some(k) = self.lambda_retries {
            o.cross.lambda_retries = k;
        }
        Ok(o)
    }

    fn renders(&self) -> Result<Vec<RenderFormat>, String> {
        self.render.iter().map(|s| s.parse()).collect()
    }

    fn emit(&self, json: String, text: String) -> Result<(), String> {
        let body = match self.format {
            Format::Json => json + "\n",
            Format::Text => text,
        };
        match &self.out {
            Some(path) => fs::write(path, body).map_err(|e| format!("{}: {e}", path.display())),
            None => {
                print!("{body}");
                Ok(())
            }
        }
    }
}

fn read_source(input: &str) -> Result<String, String> {
    let path = Path::new(input);
    if path.is_file() {
        fs::read_to_string(path).map_err(|e| format!("{input}: {e}"))
    } else {
        Ok(input.to_string())
    }
}

fn read_curve(input: &str) -> Result<BivariatePoly, String> {
    let src = read_source(input)?;
    if src.trim_start().starts_with('{') {
        let json: PolyJson = serde_json::from_str(&src).map_err(|e| format!("polynomial JSON: {e}"))?;
        BivariatePoly::from_json(&json).map_err(|e| e.to_string())
    } else {
        parse_poly(src.trim()).map_err(|e| e.to_string())
    }
}

fn read_arrangement(path: &Path, seed: u64) -> Result<LineArrangement, String> {
    let src = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let json: ArrangementJson =
        serde_json::from_str(&src).map_err(|e| format!("arrangement JSON: {e}"))?;
    json.into_arrangement(seed).map_err(|e| e.to_string())
}

fn extension(f: RenderFormat) -> &'static str {
    match f {
        RenderFormat::Ascii => "txt",
        RenderFormat::Svg => "svg",
        RenderFormat::Tikz => "tex",
    }
}

fn write_diagrams(cfg: &Config, report: &GroupReport) -> Result<(), String> {
    let formats = cfg.renders()?;
    let stem = cfg.out.clone().unwrap_or_else(|| PathBuf::from("braid"));
    for (k, g) in report.generators.iter().enumerate() {
        for &f in &formats {
            let mut name = stem.clone().into_os_string();
            name.push(format!(".g{}.{}", k + 1, extension(f)));
            fs::write(&name, render(&g.word, f)).map_err(|e| format!("{}: {e}", Path::new(&name).display()))?;
        }
    }
    Ok(())
}

fn finish(cfg: &Config, report: GroupReport) -> Outcome {
    cfg.emit(report.to_json_string(), text::report(&report))?;
    write_diagrams(cfg, &report)?;
    Ok(())
}

fn cmd_braid(cfg: &Config, input: &str) -> Outcome {
    let f = read_curve(input)?;
    let report = braid_generators(&f, &cfg.engine()?)?;
    finish(cfg, report)
}

fn cmd_branch(cfg: &Config, input: &str) -> Outcome {
    let f = read_curve(input)?;
    let set = branch_points(&f, EngineOptions::default().branch_tol).map_err(|e| e.to_string())?;
    let json = json!({
        "branch_points": set.points.iter().zip(&set.multiplicities).map(|(p, m)| json!({
            "point": [p.re, p.im],
            "multiplicity": m,
        })).collect::<Vec<_>>(),
    });
    let pretty = serde_json::to_string_pretty(&json).expect("serializable");
    cfg.emit(pretty, text::branch(&set))?;
    Ok(())
}

fn cmd_arrangement(cfg: &Config, input: &Path) -> Outcome {
    let arr = read_arrangement(input, cfg.seed)?;
    let report = arrangement_braid_generators(&arr, &cfg.engine()?)?;
    finish(cfg, report)
}

fn cmd_hypersurface(
    cfg: &Config,
    input: &str,
    vars: &[String],
    u0: Option<&[String]>,
    dir: Option<&[String]>,
) -> Outcome {
    let names: Vec<&str> = vars.iter().map(String::as_str).collect();
    let big = parse_multivariate(read_source(input)?.trim(), &names).map_err(|e| e.to_string())?;
    let point = |v: Option<&[String]>| -> Result<Option<Vec<Complex>>, String> {
        v.map(|xs| xs.iter().map(|s| parse_complex(s)).collect()).transpose()
    };
    let (u0, dir) = (point(u0)?, point(dir)?);
    let (f, _, _) = restrict_to_line(&big, u0.as_deref(), dir.as_deref(), cfg.seed)?;
    let report = braid_generators(&f, &cfg.engine()?)?;
    finish(cfg, report)
}

fn cmd_render(cfg: &Config, word: &str, strands: usize) -> Outcome {
    let w = BraidWord::parse(strands, word).map_err(|e| e.to_string())?;
    let formats = cfg.renders()?;
    let format = match formats.as_slice() {
        [] => RenderFormat::Ascii,
        [f] => *f,
        _ => return Err("render takes one --render format".to_string().into()),
    };
    let body = render(&w, format);
    match &cfg.out {
        Some(path) => fs::write(path, body).map_err(|e| format!("{}: {e}", path.display()))?,
        None => print!("{body}"),
    }
    Ok(())
}

fn cmd_verify(cfg: &Config, report: &Path, input: &str) -> Outcome {
    let src = fs::read_to_string(report).map_err(|e| format!("{}: {e}", report.display()))?;
    let json: ReportJson = serde_json::from_str(&src).map_err(|e| format!("malformed report: {e}"))?;
    let f = match json.kind {
        InputKind::Curve => read_curve(input)?,
        InputKind::Arrangement => read_arrangement(Path::new(input), json.seed)?.to_poly(),
    };
    let fails = verify_report(&f, &json, &cfg.engine()?.track);
    let crossings: usize = json.generators.iter().map(|g| g.crossings.len()).sum();
    let out = json!({ "pass": fails.is_empty(), "crossings": crossings, "failures": fails });
    let mut txt = String::new();
    for m in &fails {
        txt.push_str(&format!("FAIL {m}\n"));
    }
    txt.push_str(if fails.is_empty() { "pass\n" } else { "fail\n" });
    cfg.emit(serde_json::to_string_pretty(&out).expect("serializable"), txt)?;
    if fails.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: 1,
            msg: format!("{} check(s) failed", fails.len()),
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = &cli.cfg;
    let outcome = match &cli.command {
        Command::Braid { input } => cmd_braid(cfg, input),
        Command::Branch { input } => cmd_branch(cfg, input),
        Command::Arrangement { input } => cmd_arrangement(cfg, input),
        Command::Hypersurface { input, vars, u0, dir } => {
            cmd_hypersurface(cfg, input, vars, u0.as_deref(), dir.as_deref())
        }
        Command::Render { word, strands } => cmd_render(cfg, word, *strands),
        Command::Verify { report, input } => cmd_verify(cfg, report, input),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
