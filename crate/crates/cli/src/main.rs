use clap::{Parser, Subcommand};
use num_complex::Complex64 as C64;
use quadspec::contour::{level_lines, superlevel_components};
use quadspec::fock;
use quadspec::io::parse_symbol_json;
use quadspec::report::analyze;
use quadspec::resolvent::{fit_sc_index, halfline_profile, pseudospectrum_grid, Region, ResolventEngine};
use quadspec::spectrum::spectrum_lattice;
use quadspec::witness::{bichar_witness, DEFAULT_HORIZON, DEFAULT_SAMPLES};
use quadspec::{linalg, reduction, sector, Error};
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Spectral and pseudospectral analysis of elliptic quadratic differential operators.
#[derive(Parser, Debug)]
#[command(name = "quadspec", version)]
struct Cli {
    /// Seed for all random sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Ellipticity, numerical range, normality, spectrum, boundary orders, 1D normal form.
    Analyze {
        symbol: PathBuf,
        /// Spectrum enumeration radius.
        #[arg(long, default_value_t = 15.0)]
        radius: f64,
    },
    /// Resolvent-norm grid as CSV (`re,im,log10_norm,converged,cutoff`).
    Grid {
        symbol: PathBuf,
        /// `re_min,re_max,im_min,im_max`
        #[arg(long, allow_hyphen_values = true)]
        region: String,
        /// `nx,ny`
        #[arg(long, default_value = "100,100")]
        res: String,
        /// Comma-separated ε values for level lines.
        #[arg(long)]
        eps_levels: Option<String>,
        /// Where to write the level lines (JSON); defaults to `<out>.levels.json`.
        #[arg(long)]
        levels_out: Option<PathBuf>,
    },
    /// Resolvent norms along a half-line `η·z0`.
    Profile {
        symbol: PathBuf,
        /// `re,im` of the direction (normalized internally).
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
        /// Comma-separated increasing positive values.
        #[arg(long)]
        etas: String,
    },
    /// Semiclassical index fit of `||(q(x,hξ)^w - z)^{-1}||` against `h`.
    Scindex {
        symbol: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// Comma-separated values of `h` (fractions like `1/5` accepted).
        #[arg(long)]
        hs: String,
    },
    /// One-dimensional normal form.
    Reduce1d { symbol: PathBuf },
    /// Sign change of `Im q - Im z` along a bicharacteristic of `Re q` through `q^{-1}(z)`.
    Witness {
        symbol: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: f64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Dense binary dump of the truncated matrix plus a JSON sidecar (`<out>.json`).
    Dump {
        symbol: PathBuf,
        #[arg(long)]
        cutoff: usize,
    },
}

enum Failure {
    Parse(String),
    NotElliptic(String),
    Budget(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 1,
            Failure::NotElliptic(_) => 2,
            Failure::Budget(_) => 3,
            Failure::Other(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Parse(m) | Failure::NotElliptic(m) | Failure::Budget(m) | Failure::Other(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Parse(_) | Error::InvalidTerm(_) | Error::NotSymmetric { .. } | Error::DimensionMismatch { .. } => {
                Failure::Parse(msg)
            }
            Error::NotElliptic => Failure::NotElliptic(msg),
            Error::BudgetExceeded { .. } => Failure::Budget(msg),
            Error::FitAborted { h, partial } => {
                let detail = serde_json::json!({ "aborted_at_h": h, "partial": partial });
                Failure::Other(format!("{msg}\n{detail}"))
            }
            _ => Failure::Other(msg),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn load(path: &Path) -> Outcome<quadspec::io::LoadedSymbol> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    Ok(parse_symbol_json(&text)?)
}

/// Diagnostics for a non-elliptic symbol, printed before exiting with code 2.
fn require_elliptic(q: &quadspec::symbol::QuadraticSymbol) -> Outcome<()> {
    let e = sector::is_elliptic(q);
    if e.elliptic {
        return Ok(());
    }
    let cert = serde_json::to_string(&e.certificate).unwrap_or_default();
    Err(Failure::NotElliptic(format!("symbol is not elliptic: {cert}")))
}

fn numbers(s: &str, what: &str) -> Outcome<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            let v = match t.split_once('/') {
                Some((a, b)) => a.trim().parse::<f64>().ok().zip(b.trim().parse::<f64>().ok()).map(|(a, b)| a / b),
                None => t.parse::<f64>().ok(),
            };
            v.filter(|v| v.is_finite()).ok_or_else(|| Failure::Parse(format!("{what}: cannot parse '{t}'")))
        })
        .collect()
}

fn complex(s: &str, what: &str) -> Outcome<C64> {
    match numbers(s, what)?.as_slice() {
        [re, im] => Ok(C64::new(*re, *im)),
        [re] => Ok(C64::new(*re, 0.0)),
        _ => Err(Failure::Parse(format!("{what}: expected 're,im'"))),
    }
}

fn emit_bytes(out: Option<&Path>, bytes: &[u8]) -> Outcome<()> {
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| Failure::Other(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(bytes).map_err(|e| Failure::Other(e.to_string())),
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Outcome<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Other(e.to_string()))?;
    s.push('\n');
    emit_bytes(out, s.as_bytes())
}

#[derive(Serialize)]
struct LevelFile<'a> {
    region: Region,
    nx: usize,
    ny: usize,
    validation: &'a quadspec::resolvent::Validation,
    levels: Vec<LevelEntry>,
}

#[derive(Serialize)]
struct LevelEntry {
    #[serde(flatten)]
    lines: quadspec::contour::LevelLines,
    components: usize,
    open_components: usize,
    /// Whether each component touches the edge of the window.
    component_open: Vec<bool>,
    /// Lattice eigenvalues in the region and the component holding each.
    lattice: Vec<[f64; 2]>,
    lattice_component: Vec<Option<usize>>,
}

fn run(cli: Cli) -> Outcome<()> {
    let out = cli.out.as_deref();
    match cli.cmd {
        Cmd::Analyze { symbol, radius } => {
            let s = load(&symbol)?;
            require_elliptic(&s.symbol)?;
            let report = analyze(&s.symbol, s.name, radius, cli.seed)?;
            emit_json(out, &report)
        }
        Cmd::Grid { symbol, region, res, eps_levels, levels_out } => {
            let s = load(&symbol)?;
            require_elliptic(&s.symbol)?;
            let r = numbers(&region, "--region")?;
            let [re_min, re_max, im_min, im_max] = r[..] else {
                return Err(Failure::Parse("--region: expected four numbers".into()));
            };
            let region = Region::new(re_min, re_max, im_min, im_max).map_err(|e| Failure::Parse(e.to_string()))?;
            let res = numbers(&res, "--res")?;
            let [nx, ny] = res[..] else {
                return Err(Failure::Parse("--res: expected 'nx,ny'".into()));
            };
            if nx.fract() != 0.0 || ny.fract() != 0.0 || nx < 2.0 || ny < 2.0 {
                return Err(Failure::Parse("--res: expected integers >= 2".into()));
            }
            let engine = ResolventEngine::new(s.symbol.clone());
            let grid = pseudospectrum_grid(&engine, region, nx as usize, ny as usize, cli.seed)?;
            let mut csv = Vec::new();
            grid.write_csv(&mut csv).map_err(|e| Failure::Other(e.to_string()))?;
            emit_bytes(out, &csv)?;
            if let Some(eps) = eps_levels {
                let eps = numbers(&eps, "--eps-levels")?;
                if eps.iter().any(|e| *e <= 0.0) {
                    return Err(Failure::Parse("--eps-levels: values must be positive".into()));
                }
                let lattice: Vec<C64> = match sector::numerical_range(&s.symbol)?.kind {
                    sector::SectorKind::FullPlane => Vec::new(),
                    _ => {
                        let radius = [region.re_min, region.re_max]
                            .iter()
                            .flat_map(|&a| [a.hypot(region.im_min), a.hypot(region.im_max)])
                            .fold(0.0, f64::max);
                        spectrum_lattice(&s.symbol, radius + 1.0)?
                            .eigenvalues
                            .into_iter()
                            .filter(|z| z.re >= re_min && z.re <= re_max && z.im >= im_min && z.im <= im_max)
                            .collect()
                    }
                };
                let levels = level_lines(&grid, &eps)
                    .into_iter()
                    .map(|lines| {
                        let c = superlevel_components(&grid, lines.level, &lattice);
                        LevelEntry {
                            components: c.components.len(),
                            open_components: c.components.iter().filter(|c| c.open).count(),
                            component_open: c.components.iter().map(|c| c.open).collect(),
                            lattice: lattice.iter().map(|z| [z.re, z.im]).collect(),
                            lattice_component: c.marker_component,
                            lines,
                        }
                    })
                    .collect();
                let file = LevelFile { region, nx: grid.nx, ny: grid.ny, validation: &grid.validation, levels };
                let path = match (levels_out, out) {
                    (Some(p), _) => Some(p),
                    (None, Some(o)) => Some(PathBuf::from(format!("{}.levels.json", o.display()))),
                    (None, None) => None,
                };
                match path {
                    Some(p) => emit_json(Some(&p), &file)?,
                    None => return Err(Failure::Parse("level lines need --out or --levels-out".into())),
                }
            }
            Ok(())
        }
        Cmd::Profile { symbol, direction, etas } => {
            let s = load(&symbol)?;
            require_elliptic(&s.symbol)?;
            let z0 = complex(&direction, "--direction")?;
            let etas = numbers(&etas, "--etas")?;
            let engine = ResolventEngine::new(s.symbol);
            emit_json(out, &halfline_profile(&engine, z0, &etas)?)
        }
        Cmd::Scindex { symbol, z, hs } => {
            let s = load(&symbol)?;
            require_elliptic(&s.symbol)?;
            let z = complex(&z, "--z")?;
            let hs = numbers(&hs, "--hs")?;
            let engine = ResolventEngine::new(s.symbol);
            emit_json(out, &fit_sc_index(&engine, z, &hs)?)
        }
        Cmd::Reduce1d { symbol } => {
            let s = load(&symbol)?;
            require_elliptic(&s.symbol)?;
            emit_json(out, &reduction::reduce_1d(&s.symbol)?)
        }
        Cmd::Witness { symbol, z, horizon, samples } => {
            let s = load(&symbol)?;
            require_elliptic(&s.symbol)?;
            let z = complex(&z, "--z")?;
            let mut rng = linalg::rng(cli.seed);
            emit_json(out, &bichar_witness(&s.symbol, z, horizon, samples, &mut rng)?)
        }
        Cmd::Dump { symbol, cutoff } => {
            let s = load(&symbol)?;
            let Some(path) = out else {
                return Err(Failure::Parse("dump needs --out".into()));
            };
            let op = fock::assemble_weyl_matrix(&s.symbol, cutoff, fock::budget_from_env())?;
            let mut bytes = Vec::with_capacity(12 + 16 * op.rows() * op.rows());
            op.write_dump(&mut bytes).map_err(|e| Failure::Other(e.to_string()))?;
            emit_bytes(Some(path), &bytes)?;
            let sidecar = PathBuf::from(format!("{}.json", path.display()));
            emit_json(Some(&sidecar), &op.sidecar())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
