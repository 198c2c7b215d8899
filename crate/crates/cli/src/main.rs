use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flatpack_core::design::{load_spec, ComponentTemplate, DesignError, FabricationSpec, Loader};
use flatpack_core::pipeline::{compile_file, load_flat, validate_design, CompileError, Diagnostic, Formats};

#[derive(Parser)]
#[command(name = "flatpack", version, about = "Compile flat-pack furniture designs into laser-cut files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a design to SVG/DXF cut sheets, an STL preview and a report.
    Compile(CompileArgs),
    /// Check a design without running any geometry pass.
    Validate { design: PathBuf },
    /// List or describe component templates.
    Library {
        #[arg(long, conflicts_with = "show")]
        list: bool,
        #[arg(long, value_name = "TEMPLATE")]
        show: Option<String>,
    },
    /// Count free and total parameters of a design.
    Params { design: PathBuf },
}

#[derive(Args)]
struct CompileArgs {
    design: PathBuf,
    /// YAML fabrication spec; flags below override its values.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_name = "MM")]
    thickness: Option<f64>,
    #[arg(long, value_name = "MM")]
    kerf: Option<f64>,
    #[arg(long, value_name = "MM")]
    fit: Option<f64>,
    /// Sheet size as WxH in mm.
    #[arg(long, value_name = "WxH", value_parser = parse_sheet)]
    sheet: Option<(f64, f64)>,
    #[arg(long, value_name = "MM")]
    spacing: Option<f64>,
    #[arg(short = 'o', long = "out", default_value = ".")]
    out: PathBuf,
    /// Comma-separated subset of svg, dxf, stl.
    #[arg(long, default_value = "svg,dxf,stl", value_parser = parse_formats)]
    formats: Formats,
}

fn parse_sheet(s: &str) -> Result<(f64, f64), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WxH, for example 1220x2440")?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok((p(w)?, p(h)?))
}

fn parse_formats(s: &str) -> Result<Formats, String> {
    let mut f = Formats { svg: false, dxf: false, stl: false };
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "svg" => f.svg = true,
            "dxf" => f.dxf = true,
            "stl" => f.stl = true,
            other => return Err(format!("unknown format `{other}`")),
        }
    }
    Ok(f)
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn user(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<DesignError> for Failure {
    fn from(e: DesignError) -> Self {
        Failure::user(format!("error[design]: {e}"))
    }
}

impl From<CompileError> for Failure {
    fn from(e: CompileError) -> Self {
        let message = format!("error[{}]: {e}", e.stage());
        if e.is_user_error() {
            Failure::user(message)
        } else {
            Failure::internal(message)
        }
    }
}

fn loader() -> Result<Loader, Failure> {
    Loader::from_env().map_err(Failure::from)
}

fn build_spec(args: &CompileArgs) -> Result<FabricationSpec, Failure> {
    let mut spec = match &args.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::user(format!("{}: {e}", p.display())))?;
            load_spec(&text)?
        }
        None => FabricationSpec::default(),
    };
    if let Some(v) = args.thickness {
        spec.thickness = v;
    }
    if let Some(v) = args.kerf {
        spec.kerf = v;
    }
    if let Some(v) = args.fit {
        spec.fit = v;
    }
    if let Some((w, h)) = args.sheet {
        spec.sheet_width = w;
        spec.sheet_height = h;
    }
    if let Some(v) = args.spacing {
        spec.spacing = v;
    }
    spec.validate()?;
    Ok(spec)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::internal(format!("cannot write {}: {e}", path.display())))
}

fn compile(args: &CompileArgs) -> Result<(), Failure> {
    let spec = build_spec(args)?;
    let c = compile_file(&args.design, &loader()?, &spec, args.formats)?;
    let stem = args.design.file_stem().and_then(|s| s.to_str()).unwrap_or("design");
    std::fs::create_dir_all(&args.out)
        .map_err(|e| Failure::user(format!("cannot create {}: {e}", args.out.display())))?;
    for (n, doc) in c.svg.iter().enumerate() {
        write_file(&args.out.join(format!("{stem}-sheet{}.svg", n + 1)), doc.as_bytes())?;
    }
    for (n, doc) in c.dxf.iter().enumerate() {
        write_file(&args.out.join(format!("{stem}-sheet{}.dxf", n + 1)), doc.as_bytes())?;
    }
    if let Some(stl) = &c.stl {
        write_file(&args.out.join(format!("{stem}.stl")), stl)?;
    }
    let report = serde_json::to_string_pretty(&c.report).expect("report serializes");
    write_file(&args.out.join(format!("{stem}-report.json")), format!("{report}\n").as_bytes())?;

    let r = &c.report;
    let kinds: Vec<String> = r.joints_by_kind.iter().map(|(k, n)| format!("{n} {k}")).collect();
    println!(
        "{}: {} parts ({} before merging), {} user + {} auto connections, {} joints ({}), {} sheet(s)",
        args.design.display(),
        r.parts_after_merge,
        r.parts_before_merge,
        r.connections.user,
        r.connections.auto,
        r.joints_total,
        if kinds.is_empty() { "none".to_string() } else { kinds.join(", ") },
        r.sheets
    );
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn validate(path: &Path) -> Result<(), Failure> {
    let diags = match std::fs::read_to_string(path) {
        Ok(text) => validate_design(&text, path.parent(), &loader()?),
        Err(e) => vec![Diagnostic::from_design_error(&DesignError::Io(format!("{}: {e}", path.display())))],
    };
    for d in &diags {
        println!("{}", serde_json::to_string(d).expect("diagnostic serializes"));
    }
    if diags.is_empty() {
        Ok(())
    } else {
        Err(Failure { code: 2, message: String::new() })
    }
}

fn describe(t: &ComponentTemplate) -> String {
    let params: Vec<String> = t.params.iter().map(|p| format!("{} [{}, {}]", p.name, p.min, p.max)).collect();
    format!(
        "{}{}\n  params: {}\n  interfaces: {}",
        t.name,
        if t.is_builtin() { "" } else { " (custom)" },
        params.join(", "),
        t.interface_summary().join(", ")
    )
}

/// Describes one template, or lists all of them.
fn library(show: Option<&str>) -> Result<(), Failure> {
    let all = loader()?.all_templates();
    match show {
        Some(name) => {
            let t = all
                .iter()
                .find(|t| t.name == name)
                .ok_or_else(|| Failure::user(format!("error: unknown template `{name}`")))?;
            println!("{}", describe(t));
        }
        None => {
            for t in &all {
                println!("{}", describe(t));
            }
        }
    }
    Ok(())
}

fn params(path: &Path) -> Result<(), Failure> {
    let (_, flat) = load_flat(path, &loader()?)?;
    println!("{} free / {} total", flat.params.free.len(), flat.params.total);
    for name in &flat.params.free {
        println!("  {name}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compile(args) => compile(&args),
        Command::Validate { design } => validate(&design),
        Command::Library { show, .. } => library(show.as_deref()),
        Command::Params { design } => params(&design),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            if !f.message.is_empty() {
                eprintln!("{}", f.message);
            }
            ExitCode::from(f.code)
        }
        Err(_) => {
            eprintln!("error: internal compiler failure");
            ExitCode::from(1)
        }
    }
}
