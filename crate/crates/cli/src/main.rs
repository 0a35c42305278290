//! `nimrep`: command-line front end for nimrep-core.
//!
//! Every run writes its fully resolved configuration to stderr before any
//! result. Results go to stdout, or to `--out`. Exit codes: 0 success,
//! 1 invalid input, 2 a check ran and failed (including truncation tails
//! above the tolerance).

mod render;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use nimrep_core::bcft::{
    annulus_from_characters, full_report, heat_kernel_all_pairs, heat_kernel_check, index_report, model_summary,
    parse_theta, AnnulusSummary, Check, ChannelSummary, IndexSummary, PairCheck, Quantity, ReportOptions, SeriesSummary,
};
use nimrep_core::characters::{characters, s_transform_residual_with, DEFAULT_TOLERANCE};
use nimrep_core::fusion::{verify_axioms, verlinde};
use nimrep_core::graphs::graph_by_name;
use nimrep_core::invariants::enumerate_physical;
use nimrep_core::modular_data::{build_minimal, build_su2, load_model_str};
use nimrep_core::nimreps::{
    enumerate_su2_nimreps, generate_from_generator, regular_nimrep_named, spectrum_match, verify, REALIZABILITY,
};
use nimrep_core::persistence::{
    cache_key, export_characters, export_fusion, export_invariants, export_nimrep, export_report, import_characters,
    import_report, to_canonical, Cache, InvariantDocument, NimrepDocument,
};
use nimrep_core::{Error, IntMatrix, ModularData, ModularInvariant, Nimrep, Precision, QSeries};

#[derive(Parser, Debug)]
#[command(name = "nimrep", version, about = "Modular data, modular invariants, nimreps and boundary spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Show the selected model, or list the built-in families.
    Models,
    /// Verlinde fusion rules and their axiom check.
    Fusion,
    /// Physical modular invariants.
    Invariants,
    /// Nimrep enumeration, verification and generation.
    Nimreps {
        #[command(subcommand)]
        action: NimrepAction,
    },
    /// q-expansions of the characters.
    Characters,
    /// Annulus spectrum between two boundary labels (`--pair a,b`).
    Annulus,
    /// Numerical channel-duality checks.
    Check {
        #[command(subcommand)]
        which: CheckKind,
    },
    /// Index data of a chiral extension (`--theta`).
    Indices,
    /// Full report for a (model, invariant, nimrep) triple.
    Report,
}

#[derive(Subcommand, Debug)]
enum NimrepAction {
    /// All SU(2)_k nimreps on the given number of labels, default every tr Z.
    Enumerate {
        #[arg(long)]
        size: Option<usize>,
    },
    /// Exact check of the nimrep selected by `--nimrep` or `--nimrep-file`.
    Verify,
    /// Build a nimrep from a generator graph: `--nimrep NAME` (A5, D4, E6, T3, ...)
    /// or `--generator-file` with a JSON matrix.
    Generate {
        #[arg(long)]
        generator_file: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum CheckKind {
    /// Open against closed channel of the annulus, for `--pair` or all pairs.
    HeatKernel,
    /// Modular S-transformation of the characters.
    STransform,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Su2,
    Minimal,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Args, Debug)]
struct Options {
    #[arg(long, global = true, value_enum)]
    model: Option<ModelKind>,
    #[arg(long, global = true)]
    level: Option<u32>,
    #[arg(long, global = true)]
    p: Option<u32>,
    #[arg(long, global = true)]
    pp: Option<u32>,
    /// JSON model document; overrides --model.
    #[arg(long, global = true)]
    model_file: Option<PathBuf>,
    /// Decimal digits of working precision.
    #[arg(long, global = true, default_value_t = 50)]
    precision: u32,
    /// Truncation order of q-series.
    #[arg(long, global = true, default_value_t = 400)]
    order: usize,
    /// Open-channel temperature, q = exp(-beta).
    #[arg(long, global = true, default_value_t = 2.0 * PI)]
    beta: f64,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// `regular`, a graph name such as `E6`.
    #[arg(long, global = true, default_value = "regular")]
    nimrep: String,
    /// JSON nimrep document; overrides --nimrep.
    #[arg(long, global = true)]
    nimrep_file: Option<PathBuf>,
    /// Invariant tag (A11, D7, E6, diagonal) or index into the invariant list.
    #[arg(long, global = true)]
    invariant: Option<String>,
    /// Boundary labels `a,b`.
    #[arg(long, global = true)]
    pair: Option<String>,
    /// Sector multiplicities `label:m,label:m,...`.
    #[arg(long, global = true)]
    theta: Option<String>,
}

/// A check ran to completion and failed.
#[derive(Debug)]
struct CheckFailed(String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "check failed: {}", self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let truncated = matches!(e.downcast_ref::<Error>(), Some(Error::ConvergenceWarning { .. }));
            if e.downcast_ref::<CheckFailed>().is_some() || truncated {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn command_name(c: &Command) -> String {
    match c {
        Command::Models => "models".into(),
        Command::Fusion => "fusion".into(),
        Command::Invariants => "invariants".into(),
        Command::Nimreps { action } => match action {
            NimrepAction::Enumerate { .. } => "nimreps enumerate".into(),
            NimrepAction::Verify => "nimreps verify".into(),
            NimrepAction::Generate { .. } => "nimreps generate".into(),
        },
        Command::Characters => "characters".into(),
        Command::Annulus => "annulus".into(),
        Command::Check { which } => match which {
            CheckKind::HeatKernel => "check heat-kernel".into(),
            CheckKind::STransform => "check s-transform".into(),
        },
        Command::Indices => "indices".into(),
        Command::Report => "report".into(),
    }
}

fn print_config(cli: &Cli) {
    let o = &cli.opts;
    let show = |x: &Option<String>| x.clone().unwrap_or_else(|| "-".into());
    let path = |x: &Option<PathBuf>| x.as_ref().map_or("-".into(), |p| p.display().to_string());
    let model = match (&o.model_file, o.model) {
        (Some(f), _) => format!("file {}", f.display()),
        (None, Some(ModelKind::Su2)) => format!("su2 level={}", o.level.map_or("-".into(), |k| k.to_string())),
        (None, Some(ModelKind::Minimal)) => format!(
            "minimal p={} pp={}",
            o.p.map_or("-".into(), |p| p.to_string()),
            o.pp.map_or("-".into(), |p| p.to_string())
        ),
        (None, None) => "-".into(),
    };
    let threads = o.threads.map_or_else(|| format!("{} (all cores)", rayon::current_num_threads()), |t| t.to_string());
    let mut s = String::new();
    let _ = writeln!(s, "# command     {}", command_name(&cli.command));
    let _ = writeln!(s, "# model       {model}");
    let _ = writeln!(s, "# precision   {}", o.precision);
    let _ = writeln!(s, "# order       {}", o.order);
    let _ = writeln!(s, "# beta        {}", o.beta);
    let _ = writeln!(s, "# format      {}", if o.format == Format::Text { "text" } else { "structured" });
    let _ = writeln!(s, "# out         {}", path(&o.out));
    let _ = writeln!(s, "# cache       {}", path(&o.cache));
    let _ = writeln!(s, "# threads     {threads}");
    let _ = writeln!(s, "# nimrep      {}", o.nimrep_file.as_ref().map_or(o.nimrep.clone(), |p| format!("file {}", p.display())));
    let _ = writeln!(s, "# invariant   {}", o.invariant.clone().unwrap_or_else(|| "auto".into()));
    let _ = writeln!(s, "# pair        {}", show(&o.pair));
    let _ = write!(s, "# theta       {}", show(&o.theta));
    eprintln!("{s}");
}

/// Everything derived from the model flags.
struct Ctx<'a> {
    opts: &'a Options,
    md: ModularData,
    /// Canonical description of the model for cache keys.
    model_key: serde_json::Value,
    cache: Option<Cache>,
}

impl<'a> Ctx<'a> {
    fn new(opts: &'a Options) -> anyhow::Result<Self> {
        if opts.precision < 30 {
            bail!("--precision must be at least 30 digits (got {})", opts.precision);
        }
        let precision = Precision::new(opts.precision);
        let (md, model_key) = match (&opts.model_file, opts.model) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let md = load_model_str(&text).with_context(|| format!("loading {}", path.display()))?;
                (md, json!({"document": text}))
            }
            (None, Some(ModelKind::Su2)) => {
                let k = opts.level.ok_or_else(|| anyhow!("--model su2 needs --level K"))?;
                (build_su2(k, precision)?, json!({"family": "su2", "level": k}))
            }
            (None, Some(ModelKind::Minimal)) => {
                let (p, pp) = match (opts.p, opts.pp) {
                    (Some(p), Some(pp)) => (p, pp),
                    _ => bail!("--model minimal needs --p P --pp P' (for example --p 4 --pp 3 for Ising)"),
                };
                (build_minimal(p, pp, precision)?, json!({"family": "minimal", "p": p, "pp": pp}))
            }
            (None, None) => bail!("select a model with --model su2 --level K, --model minimal --p P --pp P', or --model-file PATH"),
        };
        Ok(Ctx {
            opts,
            md,
            model_key,
            cache: opts.cache.as_ref().map(Cache::new),
        })
    }

    fn cached(&self, op: &str, extra: serde_json::Value, order: Option<usize>, compute: impl FnOnce() -> anyhow::Result<String>) -> anyhow::Result<String> {
        let Some(cache) = &self.cache else {
            return compute();
        };
        let inputs = json!({"model": self.model_key, "args": extra});
        let key = cache_key(op, &inputs, self.opts.precision, order)?;
        if let Some(hit) = cache.load(&key)? {
            return Ok(hit);
        }
        let payload = compute()?;
        cache.store(&key, &payload)?;
        Ok(payload)
    }

    fn invariants(&self) -> anyhow::Result<Vec<ModularInvariant>> {
        let payload = self.cached("invariants", json!({}), None, || Ok(export_invariants(&enumerate_physical(&self.md)?)?))?;
        let docs: Vec<InvariantDocument> = serde_json::from_str(&payload)?;
        Ok(docs.iter().map(|d| d.load(&self.md)).collect::<Result<_, _>>()?)
    }

    fn characters(&self) -> anyhow::Result<Vec<QSeries>> {
        let order = self.opts.order;
        let payload = self.cached("characters", json!({}), Some(order), || {
            Ok(export_characters(&self.md, order, &characters(&self.md, order)?)?)
        })?;
        Ok(import_characters(&payload)?)
    }

    fn nimrep(&self) -> anyhow::Result<Nimrep> {
        if let Some(path) = &self.opts.nimrep_file {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return Ok(nimrep_core::persistence::import_nimrep(&text)?);
        }
        let name = self.opts.nimrep.as_str();
        if name == "regular" {
            return Ok(regular_nimrep_named(&self.md, &verlinde(&self.md)?).with_name("regular"));
        }
        let g = graph_by_name(name)
            .ok_or_else(|| anyhow!("unknown nimrep {name:?}: use `regular`, a graph name (A5, D4, E6, T3), or --nimrep-file"))?;
        Ok(generate_from_generator(&g, &self.md)?)
    }

    /// `--invariant`, or the invariant matched by the nimrep's spectrum
    /// (the diagonal one for the regular nimrep).
    fn invariant(&self, nr: Option<&Nimrep>) -> anyhow::Result<ModularInvariant> {
        let diagonal = || ModularInvariant::new(&self.md, IntMatrix::identity(self.md.len()));
        match self.opts.invariant.as_deref() {
            Some("diagonal") => return Ok(diagonal()?),
            Some(sel) => {
                let zs = self.invariants()?;
                if let Some(z) = zs.iter().find(|z| z.tag() == sel) {
                    return Ok(z.clone());
                }
                let tags: Vec<&str> = zs.iter().map(ModularInvariant::tag).collect();
                return match sel.parse::<usize>() {
                    Ok(i) if i < zs.len() => Ok(zs[i].clone()),
                    _ => bail!("unknown invariant {sel:?}; available: {tags:?}, diagonal, or an index"),
                };
            }
            None => {}
        }
        let Some(nr) = nr else { return Ok(diagonal()?) };
        if nr.name() == Some("regular") {
            return Ok(diagonal()?);
        }
        for z in self.invariants()? {
            if matches!(spectrum_match(nr, &z, &self.md), Ok(r) if r.passed()) {
                return Ok(z);
            }
        }
        bail!("no physical invariant matches the spectrum of this nimrep; pass --invariant")
    }

    fn pair(&self, nr: &Nimrep) -> anyhow::Result<Option<(usize, usize)>> {
        let Some(text) = &self.opts.pair else { return Ok(None) };
        let (a, b) = split_pair(text).ok_or_else(|| anyhow!("--pair must look like a,b (got {text:?})"))?;
        Ok(Some((nr.resolve_label(a)?, nr.resolve_label(b)?)))
    }

    fn emit(&self, text: String, structured: impl FnOnce() -> anyhow::Result<String>) -> anyhow::Result<()> {
        let body = match self.opts.format {
            Format::Text => text,
            Format::Structured => structured()?,
        };
        emit(self.opts, &body)
    }
}

/// Split `a,b` at the top-level comma, so `(1,1),(2,1)` works.
fn split_pair(text: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return Some((text[..i].trim(), text[i + 1..].trim())),
            _ => {}
        }
    }
    None
}

fn emit(opts: &Options, body: &str) -> anyhow::Result<()> {
    match &opts.out {
        Some(path) => {
            std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    print_config(cli);
    let o = &cli.opts;
    if let Some(t) = o.threads {
        if t == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    if !(o.beta.is_finite() && o.beta > 0.0) {
        bail!("--beta must be a positive finite number (got {})", o.beta);
    }
    if let (Command::Models, None, None) = (&cli.command, &o.model, &o.model_file) {
        return emit(o, &render::families());
    }
    let ctx = Ctx::new(o)?;
    let md = &ctx.md;
    match &cli.command {
        Command::Models => {
            let summary = model_summary(md);
            ctx.emit(render::model(&summary), || Ok(to_canonical(&summary)?))
        }
        Command::Fusion => {
            let fr = verlinde(md)?;
            let axioms = verify_axioms(&fr);
            ctx.emit(render::fusion(md, &fr, &axioms), || Ok(export_fusion(&fr)?))?;
            if !axioms.passed() {
                return Err(CheckFailed(format!("fusion axioms: {:?}", axioms.violations)).into());
            }
            Ok(())
        }
        Command::Invariants => {
            let zs = ctx.invariants()?;
            ctx.emit(render::invariants(md, &zs), || Ok(export_invariants(&zs)?))
        }
        Command::Nimreps { action } => nimreps(&ctx, action),
        Command::Characters => {
            let chars = ctx.characters()?;
            ctx.emit(render::characters(md, &chars), || Ok(export_characters(md, o.order, &chars)?))
        }
        Command::Annulus => {
            let nr = ctx.nimrep()?;
            let (a, b) = ctx.pair(&nr)?.ok_or_else(|| anyhow!("annulus needs --pair a,b"))?;
            let chars = ctx.characters()?;
            let sp = annulus_from_characters(&nr, &chars, a, b)?;
            let summary = AnnulusSummary {
                a: nr.labels()[a].clone(),
                b: nr.labels()[b].clone(),
                multiplicities: Quantity::list(&sp.multiplicities),
                vacuum_present: sp.vacuum_present,
                series: Some(SeriesSummary::new(&sp.z_ab)),
            };
            ctx.emit(render::annulus(md, &nr, &sp), || Ok(to_canonical(&summary)?))
        }
        Command::Check { which } => check(&ctx, which),
        Command::Indices => {
            let text = o.theta.as_deref().ok_or_else(|| anyhow!("indices needs --theta, e.g. \"0:1,1:1\""))?;
            let theta = parse_theta(md, text)?;
            let r = index_report(md, &theta)?;
            let summary = IndexSummary::new(text, &r, md.precision());
            ctx.emit(render::indices(md, &summary), || Ok(to_canonical(&summary)?))
        }
        Command::Report => {
            let nr = ctx.nimrep()?;
            let z = ctx.invariant(Some(&nr))?;
            let options = ReportOptions { order: o.order, beta: o.beta };
            let extra = json!({"nimrep": NimrepDocument::new(&nr), "z": z.z().rows(), "beta": o.beta});
            let payload = ctx.cached("report", extra, Some(o.order), || Ok(export_report(&full_report(md, &z, &nr, options)?)?))?;
            let report = import_report(&payload)?;
            ctx.emit(render::report(&report), || Ok(payload.clone()))?;
            if !report.all_passed {
                return Err(CheckFailed("at least one check in the report failed".into()).into());
            }
            Ok(())
        }
    }
}

fn nimreps(ctx: &Ctx, action: &NimrepAction) -> anyhow::Result<()> {
    let md = &ctx.md;
    match action {
        NimrepAction::Enumerate { size } => {
            if md.su2_level().is_none() {
                bail!("nimrep enumeration is implemented for --model su2 only");
            }
            let sizes: Vec<usize> = match size {
                Some(m) => vec![*m],
                None => {
                    let mut s: Vec<usize> = ctx.invariants()?.iter().map(ModularInvariant::trace).collect();
                    s.sort_unstable();
                    s.dedup();
                    s
                }
            };
            let payload = ctx.cached("nimreps-enumerate", json!({"sizes": sizes}), None, || {
                let mut all = Vec::new();
                for &m in &sizes {
                    all.extend(enumerate_su2_nimreps(md, m)?.iter().map(NimrepDocument::new));
                }
                Ok(to_canonical(&all)?)
            })?;
            let docs: Vec<NimrepDocument> = serde_json::from_str(&payload)?;
            let nrs: Vec<Nimrep> = docs.iter().map(NimrepDocument::load).collect::<Result<_, _>>()?;
            let zs = ctx.invariants()?;
            ctx.emit(render::nimrep_list(md, &nrs, &zs), || Ok(payload.clone()))
        }
        NimrepAction::Verify => {
            let nr = ctx.nimrep()?;
            let fr = verlinde(md)?;
            let report = verify(&nr, &fr);
            let doc = json!({
                "format_version": nimrep_core::modular_data::FORMAT_VERSION,
                "nimrep": NimrepDocument::new(&nr),
                "passed": report.passed(),
                "violations": report.violations.iter().zip(&report.counts)
                    .map(|(v, c)| json!({"first": format!("{v:?}"), "count": c})).collect::<Vec<_>>(),
                "realizability": REALIZABILITY,
            });
            ctx.emit(render::verification(&nr, &report), || Ok(to_canonical(&doc)?))?;
            if !report.passed() {
                return Err(CheckFailed(format!("{} nimrep condition(s) violated", report.violations.len())).into());
            }
            Ok(())
        }
        NimrepAction::Generate { generator_file } => {
            let nr = match generator_file {
                Some(path) => {
                    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    let rows: Vec<Vec<i64>> = serde_json::from_str(&text).context("generator file must be a JSON array of rows")?;
                    let g = IntMatrix::from_rows(&rows).ok_or_else(|| anyhow!("generator must be square"))?;
                    generate_from_generator(&g, md)?
                }
                None => ctx.nimrep()?,
            };
            ctx.emit(render::nimrep(&nr), || Ok(export_nimrep(&nr)?))
        }
    }
}

fn check(ctx: &Ctx, which: &CheckKind) -> anyhow::Result<()> {
    let (md, o) = (&ctx.md, ctx.opts);
    match which {
        CheckKind::STransform => {
            let r = s_transform_residual_with(md, o.order, o.beta, DEFAULT_TOLERANCE)?;
            let summary = ChannelSummary::Computed {
                check: Check {
                    passed: r.passed(),
                    residual: Quantity::double(r.residual()),
                    tolerance: Quantity::double(r.tolerance),
                },
                tail_bound: Quantity::double(r.tail_bound),
            };
            ctx.emit(render::channel("S-transform", &r), || Ok(to_canonical(&summary)?))?;
            if !r.passed() {
                return Err(CheckFailed(format!("S-transform residual {:e}", r.residual())).into());
            }
            Ok(())
        }
        CheckKind::HeatKernel => {
            let nr = ctx.nimrep()?;
            let z = ctx.invariant(Some(&nr))?;
            let results = match ctx.pair(&nr)? {
                Some((a, b)) => vec![((a, b), heat_kernel_check(&nr, &z, md, a, b, o.beta, o.order)?)],
                None => heat_kernel_all_pairs(&nr, &z, md, o.beta, o.order)?,
            };
            let pairs: Vec<PairCheck> = results
                .iter()
                .map(|((a, b), r)| PairCheck {
                    a: nr.labels()[*a].clone(),
                    b: nr.labels()[*b].clone(),
                    check: Check {
                        passed: r.passed(),
                        residual: Quantity::double(r.residual()),
                        tolerance: Quantity::double(r.tolerance),
                    },
                    tail_bound: Quantity::double(r.tail_bound),
                })
                .collect();
            ctx.emit(render::heat_kernel(&z, &pairs), || Ok(to_canonical(&pairs)?))?;
            let failed = pairs.iter().filter(|p| !p.check.passed).count();
            if failed > 0 {
                return Err(CheckFailed(format!("{failed} boundary pair(s) above tolerance")).into());
            }
            Ok(())
        }
    }
}
