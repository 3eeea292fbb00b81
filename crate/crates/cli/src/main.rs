//! Batch command-line front end: sector census, spectrum and statistics
//! pipelines, classical ensemble runs, and effective-representation
//! queries. Emits plot-ready CSV (with `#`-prefixed headers) and JSON
//! summaries.
//!
//! Exit codes: 0 success, 2 invalid input, 3 resource budget exceeded,
//! 4 numerical failure.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use su3atoms::classical::{
    automatic_window, ensemble_divergence, lyapunov_fit, CoherentParams,
};
use su3atoms::hamiltonian::{
    build_fock_sector_hamiltonian, build_su3_sector_hamiltonian, effective_rep, CartanVector,
    HamiltonianParams,
};
use su3atoms::sectors::{
    antisymmetric_sector_basis, enumerate_fock_tables, fock_sector_basis, fragmentation_report,
    symmetric_sector_basis,
};
use su3atoms::spectral::{
    mean_r_ratio, spacing_statistics, unfold, UnfoldMethod,
};
use su3atoms::Error;

use config::ConfigFile;
use output::{csv_writer, json_value_to_file, OutputHeader};

#[derive(Parser)]
#[command(
    name = "su3atoms",
    version,
    about = "Symmetry-resolved spectra and classical dynamics of all-to-all 3-level atoms"
)]
struct Cli {
    /// Plain-text `key = value` config file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Cap on parallel workers (default: machine parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// RNG seed for reproducible runs.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Output directory for generated files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fragmentation census: one row per permutation sector and
    /// magnetization block, as CSV.
    Census(CensusArgs),
    /// Assemble one sector, diagonalize, and analyze its level spacings.
    Spectrum(SpectrumArgs),
    /// Classical coherent-state ensemble: trajectory divergence and
    /// Lyapunov fit.
    Classical(ClassicalArgs),
    /// Effective SU(3) representation of a permutation sector with n
    /// particles per site.
    EffectiveRep(EffectiveRepArgs),
    /// Enumerate the Fock tables of a broken-permutation sector.
    FockEnum(FockEnumArgs),
}

#[derive(Args)]
struct CensusArgs {
    #[arg(long, short = 'L')]
    sites: usize,
    /// Particles per site.
    #[arg(long, default_value_t = 1)]
    n: u32,
    /// Cap on per-sector state enumeration.
    #[arg(long, default_value_t = 10_000_000)]
    budget: usize,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Irrep sector: p q (optionally with --full-columns r).
    #[arg(long, num_args = 2, value_names = ["P", "Q"])]
    irrep: Option<Vec<usize>>,
    /// Number of stripped full columns for the irrep pathway.
    #[arg(long, default_value_t = 0)]
    full_columns: usize,
    /// Totally symmetric sector (requires --sites and --n).
    #[arg(long)]
    symmetric: bool,
    /// Totally antisymmetric sector (requires --sites and --n).
    #[arg(long)]
    antisymmetric: bool,
    /// Broken-permutation sector: comma-separated per-site occupations.
    #[arg(long, value_delimiter = ',')]
    fock: Option<Vec<u32>>,
    #[arg(long, short = 'L')]
    sites: Option<usize>,
    #[arg(long)]
    n: Option<u32>,
    /// Magnetization block; omit for the whole irrep.
    #[arg(long, short = 'M', allow_hyphen_values = true)]
    magnetization: Option<i64>,
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    #[arg(long, default_value_t = 1.7)]
    g1: f64,
    #[arg(long, default_value_t = 1.0)]
    g2: f64,
    /// Staircase-fit polynomial degree for unfolding.
    #[arg(long, default_value_t = 7)]
    unfold_degree: usize,
    /// Unfold by a local mean-gap window of this many gaps instead of the
    /// polynomial staircase fit.
    #[arg(long, conflicts_with = "unfold_degree")]
    local_window: Option<usize>,
    /// Fraction of levels trimmed at each spectral edge.
    #[arg(long, default_value_t = 0.05)]
    trim: f64,
    /// Dense-matrix dimension budget.
    #[arg(long, default_value_t = 6000)]
    budget: usize,
    /// Also dump the sector matrix in the documented text format.
    #[arg(long)]
    dump_matrix: bool,
    /// Also dump the irrep basis states (irrep pathway only).
    #[arg(long)]
    dump_basis: bool,
}

#[derive(Args)]
struct ClassicalArgs {
    /// Representation scaling p/L.
    #[arg(long)]
    alpha: f64,
    /// Representation scaling q/L.
    #[arg(long)]
    beta: f64,
    /// Particles per site.
    #[arg(long, default_value_t = 1.0)]
    n: f64,
    /// Coherent-state parameters as re,im pairs.
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], default_values_t = [0.0, 0.0], allow_hyphen_values = true)]
    gamma1: Vec<f64>,
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], default_values_t = [0.0, 0.0], allow_hyphen_values = true)]
    gamma2: Vec<f64>,
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], default_values_t = [0.0, 0.0], allow_hyphen_values = true)]
    gamma3: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    #[arg(long, default_value_t = 2.0)]
    g1: f64,
    #[arg(long, default_value_t = 0.4)]
    g2: f64,
    /// Ensemble size.
    #[arg(long, short = 'R', default_value_t = 20)]
    ensemble: usize,
    /// Perturbation scale on the coherent-state parameters.
    #[arg(long, default_value_t = 1e-7)]
    eps: f64,
    #[arg(long, default_value_t = 100.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Conservation-monitor tolerance (monitors stay below 100x this).
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Explicit fit window `t1 t2`; defaults to the automatic window.
    #[arg(long, num_args = 2, value_names = ["T1", "T2"])]
    window: Option<Vec<f64>>,
}

#[derive(Args)]
struct EffectiveRepArgs {
    /// Cartan eigenvalues h_1,...,h_amax (comma-separated).
    #[arg(long, value_delimiter = ',')]
    cartan: Vec<u64>,
    #[arg(long)]
    n: u32,
    #[arg(long, short = 'L')]
    sites: usize,
}

#[derive(Args)]
struct FockEnumArgs {
    /// Per-site occupations, comma-separated.
    #[arg(long, value_delimiter = ',')]
    n: Vec<u32>,
    #[arg(long, short = 'M', allow_hyphen_values = true)]
    magnetization: i64,
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidInput(_)) | Some(Error::TooFewLevels { .. }) => 2,
        Some(Error::BudgetExceeded { .. }) | Some(Error::DimensionOverflow(_)) => 3,
        Some(Error::Numerical(_)) => 4,
        None => 2,
    }
}

fn main() -> ExitCode {
    let mut argv: Vec<String> = std::env::args().collect();
    // Apply config-file defaults before clap parses: flags win because
    // the config entries are inserted right after the subcommand.
    if let Some(pos) = argv.iter().position(|a| a == "--config") {
        if let Some(path) = argv.get(pos + 1).cloned() {
            match ConfigFile::load(std::path::Path::new(&path)) {
                Ok(cfg) => cfg.splice_into(&mut argv),
                Err(e) => {
                    eprintln!("error: cannot read config {path}: {e}");
                    return ExitCode::from(2);
                }
            }
        }
    }
    let cli = Cli::parse_from(argv);
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("warning: thread pool already initialized: {e}");
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    std::fs::create_dir_all(&cli.out_dir)?;
    match &cli.command {
        Command::Census(args) => census(cli, args),
        Command::Spectrum(args) => spectrum(cli, args),
        Command::Classical(args) => classical(cli, args),
        Command::EffectiveRep(args) => effective_rep_cmd(args),
        Command::FockEnum(args) => fock_enum(args),
    }
}

fn census(cli: &Cli, args: &CensusArgs) -> anyhow::Result<()> {
    let report = fragmentation_report(args.sites, args.n, args.budget)?;
    let header = OutputHeader::new(cli.seed)
        .kv("command", "census")
        .kv("L", args.sites)
        .kv("n", args.n);
    let path = cli.out_dir.join(format!("census_L{}_n{}.csv", args.sites, args.n));
    let mut w = csv_writer(&path, &header)?;
    use std::io::Write;
    writeln!(w, "lambda,p,q,r,specht_dim,weyl_dim,M,subsector_dim")?;
    for row in &report.rows {
        let (p, q, r) = row
            .su3
            .map(|s| {
                (
                    s.p.to_string(),
                    s.q.to_string(),
                    s.r.to_string(),
                )
            })
            .unwrap_or_default();
        for &(m, dim) in &row.m_splits {
            writeln!(
                w,
                "\"{}\",{},{},{},{},{},{},{}",
                row.diagram, p, q, r, row.specht_dim, row.weyl_dim, m, dim
            )?;
        }
    }
    println!(
        "census: {} sectors, largest dimension {}, total {} = {}^{}",
        report.rows.len(),
        report.largest_sector,
        report.total_dim,
        report.local_dim,
        report.sites
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn spectrum(cli: &Cli, args: &SpectrumArgs) -> anyhow::Result<()> {
    let params = HamiltonianParams::new(args.h, args.g1, args.g2);
    let (sector, tag) = if let Some(irrep) = &args.irrep {
        let [p, q] = irrep.as_slice() else {
            return Err(Error::InvalidInput("--irrep needs exactly p q".into()).into());
        };
        if args.dump_basis {
            let basis = su3atoms::su3::IrrepBasis::build(*p, *q, args.budget * 100)?;
            let path = cli.out_dir.join(format!("basis_D{p}_{q}.txt"));
            basis.dump_states(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
            println!("wrote {}", path.display());
        }
        (
            build_su3_sector_hamiltonian(
                *p,
                *q,
                args.full_columns,
                args.magnetization,
                &params,
                args.budget,
            )?,
            format!("D{p}_{q}_M{}", magtag(args.magnetization)),
        )
    } else if args.symmetric {
        let (sites, n) = sites_and_n(args)?;
        let m = args
            .magnetization
            .ok_or_else(|| Error::InvalidInput("--symmetric requires -M".into()))?;
        let basis = symmetric_sector_basis(sites, n, m, args.budget)?;
        (
            build_fock_sector_hamiltonian(&basis, &params)?,
            format!("sym_L{sites}_n{n}_M{m}"),
        )
    } else if args.antisymmetric {
        let (sites, n) = sites_and_n(args)?;
        let m = args
            .magnetization
            .ok_or_else(|| Error::InvalidInput("--antisymmetric requires -M".into()))?;
        let basis = antisymmetric_sector_basis(&vec![n; sites], m)?;
        (
            build_fock_sector_hamiltonian(&basis, &params)?,
            format!("antisym_L{sites}_n{n}_M{m}"),
        )
    } else if let Some(occ) = &args.fock {
        let m = args
            .magnetization
            .ok_or_else(|| Error::InvalidInput("--fock requires -M".into()))?;
        let basis = fock_sector_basis(occ, m)?;
        if basis.dim() > args.budget {
            return Err(Error::BudgetExceeded {
                what: "fock sector".into(),
                dim: basis.dim(),
                budget: args.budget,
            }
            .into());
        }
        let occ_tag: Vec<String> = occ.iter().map(|x| x.to_string()).collect();
        (
            build_fock_sector_hamiltonian(&basis, &params)?,
            format!("fock_{}_M{m}", occ_tag.join("-")),
        )
    } else {
        return Err(Error::InvalidInput(
            "select a sector: --irrep, --symmetric, --antisymmetric, or --fock".into(),
        )
        .into());
    };

    let header = OutputHeader::new(cli.seed)
        .kv("command", "spectrum")
        .kv("sector", &sector.label)
        .kv("basis", &sector.basis)
        .kv("h", args.h)
        .kv("g1", args.g1)
        .kv("g2", args.g2)
        .kv(
            "unfold",
            match args.local_window {
                Some(w) => format!("local_window {w}"),
                None => format!("polynomial {}", args.unfold_degree),
            },
        )
        .kv("trim", args.trim);

    if args.dump_matrix {
        let path = cli.out_dir.join(format!("matrix_{tag}.txt"));
        sector.write_text(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
        println!("wrote {}", path.display());
    }

    let dim = sector.dim();
    let eigenvalues = su3atoms::spectral::diagonalize(&sector)?;

    let path = cli.out_dir.join(format!("eigenvalues_{tag}.csv"));
    let mut w = csv_writer(&path, &header)?;
    use std::io::Write;
    writeln!(w, "index,energy")?;
    for (i, e) in eigenvalues.iter().enumerate() {
        writeln!(w, "{i},{e:.17e}")?;
    }
    drop(w);
    println!("wrote {}", path.display());

    // Each statistic degrades independently: the unfolded-spacing analysis
    // needs 50 levels after trimming, the r-ratio 100 levels. Sectors too
    // small for either report their dimension only.
    let method = match args.local_window {
        Some(window) => UnfoldMethod::LocalWindow { window },
        None => UnfoldMethod::Polynomial {
            degree: args.unfold_degree,
        },
    };
    let spacing_stats = match unfold(&eigenvalues, method, args.trim) {
        Ok(spacings) => {
            let (histogram, ks_wigner, ks_poisson) = spacing_statistics(&spacings);
            Some((spacings, histogram, ks_wigner, ks_poisson))
        }
        Err(Error::TooFewLevels { have, need }) => {
            println!("too few levels for unfolded spacings ({have}, need {need})");
            None
        }
        Err(e) => return Err(e.into()),
    };
    let r_stats = match mean_r_ratio(&eigenvalues) {
        Ok(r) => Some(r),
        Err(Error::TooFewLevels { have, need }) => {
            println!("too few levels for r-ratios ({have}, need {need})");
            None
        }
        Err(e) => return Err(e.into()),
    };

    if let Some((_, histogram, _, _)) = &spacing_stats {
        let path = cli.out_dir.join(format!("histogram_{tag}.csv"));
        let mut w = csv_writer(&path, &header)?;
        writeln!(w, "s,density")?;
        for &(s, d) in histogram {
            writeln!(w, "{s},{d}")?;
        }
        drop(w);
        println!("wrote {}", path.display());
    }

    // Spectral-stiffness indicator: a large fraction of unfolded spacings
    // near 1 while staying far from the Wigner surmise marks the
    // harmonic-oscillator-like rigidity of the planar sectors.
    let near_unit_fraction = spacing_stats.as_ref().map(|(spacings, _, _, _)| {
        spacings.iter().filter(|&&s| (s - 1.0).abs() <= 0.25).count() as f64
            / spacings.len() as f64
    });
    let near_uniform = spacing_stats
        .as_ref()
        .zip(near_unit_fraction)
        .map(|((_, _, ks_wd, _), f)| f >= 0.60 && *ks_wd > 0.2);
    let summary = serde_json::json!({
        "config": header.as_json(),
        "sector": sector.label.to_string(),
        "dim": dim,
        "mean_r": r_stats.as_ref().map(|r| r.mean_r),
        "ks_wd": spacing_stats.as_ref().map(|(_, _, ks_wd, _)| *ks_wd),
        "ks_poisson": spacing_stats.as_ref().map(|(_, _, _, ks_p)| *ks_p),
        "discarded_gaps": r_stats.as_ref().map(|r| r.discarded_gaps),
        "spacings": spacing_stats.as_ref().map(|(s, _, _, _)| s.len()),
        "near_unit_spacing_fraction": near_unit_fraction,
        "near_uniform_spacings": near_uniform,
    });
    let path = cli.out_dir.join(format!("summary_{tag}.json"));
    json_value_to_file(&summary, &path)?;
    println!("wrote {}", path.display());
    if spacing_stats.is_some() || r_stats.is_some() {
        let mut line = format!("dim {dim}:");
        if let Some(r) = &r_stats {
            line.push_str(&format!(
                " mean_r = {:.4} ({} degenerate gaps discarded),",
                r.mean_r, r.discarded_gaps
            ));
        }
        if let Some((_, _, ks_wd, ks_p)) = &spacing_stats {
            line.push_str(&format!(" ks_wd = {ks_wd:.4}, ks_poisson = {ks_p:.4}"));
        }
        if near_uniform == Some(true) {
            line.push_str(" [near-uniform spacings]");
        }
        println!("{line}");
    }
    Ok(())
}

fn sites_and_n(args: &SpectrumArgs) -> Result<(usize, u32), Error> {
    match (args.sites, args.n) {
        (Some(sites), Some(n)) => Ok((sites, n)),
        _ => Err(Error::InvalidInput(
            "this sector type requires --sites and --n".into(),
        )),
    }
}

fn magtag(m: Option<i64>) -> String {
    m.map(|v| v.to_string()).unwrap_or_else(|| "all".into())
}

fn classical(cli: &Cli, args: &ClassicalArgs) -> anyhow::Result<()> {
    let params = HamiltonianParams::new(args.h, args.g1, args.g2);
    let cp = CoherentParams::new(
        Complex64::new(args.gamma1[0], args.gamma1[1]),
        Complex64::new(args.gamma2[0], args.gamma2[1]),
        Complex64::new(args.gamma3[0], args.gamma3[1]),
        args.alpha,
        args.beta,
        args.n,
    )?;
    let series = ensemble_divergence(
        &cp,
        params,
        args.ensemble,
        args.eps,
        args.t_end,
        args.tol,
        args.samples,
        cli.seed,
    )?;

    let header = OutputHeader::new(cli.seed)
        .kv("command", "classical")
        .kv("alpha", args.alpha)
        .kv("beta", args.beta)
        .kv("n", args.n)
        .kv("h", args.h)
        .kv("g1", args.g1)
        .kv("g2", args.g2)
        .kv("ensemble", args.ensemble)
        .kv("eps", args.eps)
        .kv("t_end", args.t_end)
        .kv("tol", args.tol);

    let tag = format!("a{}_b{}_n{}", args.alpha, args.beta, args.n);
    let path = cli.out_dir.join(format!("divergence_{tag}.csv"));
    let mut w = csv_writer(&path, &header)?;
    use std::io::Write;
    writeln!(w, "t,delta_r,H,C2,C3,trace,magnetization")?;
    for (k, &t) in series.times.iter().enumerate() {
        let m = &series.rep_monitors[k];
        writeln!(
            w,
            "{t},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            series.delta_r[k], m.energy, m.c2, m.c3, m.trace, m.magnetization
        )?;
    }
    drop(w);
    println!("wrote {}", path.display());

    // The fit needs a nonzero initial separation; eps = 0 runs only dump
    // the (identically zero) divergence series.
    let fit_json = if series.delta_r[0] > 0.0 {
        let window = match &args.window {
            Some(w) => (w[0], w[1]),
            None => automatic_window(&series)?,
        };
        let fit = lyapunov_fit(&series, window)?;
        println!(
            "lambda = {:.6e} +- {:.3e} (R^2 = {:.4}, window [{:.2}, {:.2}], {} points)",
            fit.lambda, fit.stderr, fit.r_squared, fit.window.0, fit.window.1, fit.points
        );
        serde_json::json!({
            "lambda": fit.lambda,
            "stderr": fit.stderr,
            "r_squared": fit.r_squared,
            "window": [fit.window.0, fit.window.1],
            "points": fit.points,
        })
    } else {
        println!("eps = 0: divergence identically zero, no Lyapunov fit");
        serde_json::Value::Null
    };

    let summary = serde_json::json!({
        "config": header.as_json(),
        "alpha": args.alpha,
        "beta": args.beta,
        "n": args.n,
        "fit": fit_json,
        "saturation": series.delta_r.iter().cloned().fold(0.0f64, f64::max),
    });
    let path = cli.out_dir.join(format!("fit_{tag}.json"));
    json_value_to_file(&summary, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn effective_rep_cmd(args: &EffectiveRepArgs) -> anyhow::Result<()> {
    let cartan = CartanVector::new(args.cartan.clone(), args.n, args.sites)?;
    let (p, q, r) = effective_rep(&cartan, args.n, args.sites)?;
    let total = p + 2 * q + 3 * r;
    println!("effective representation: (p*, q*, r*) = ({p}, {q}, {r})");
    println!(
        "constraint: p* + 2q* + 3r* = {total} = n*L = {}",
        args.n as u64 * args.sites as u64
    );
    Ok(())
}

fn fock_enum(args: &FockEnumArgs) -> anyhow::Result<()> {
    if args.n.is_empty() {
        return Err(Error::InvalidInput("--n must list at least one site".into()).into());
    }
    let tables = enumerate_fock_tables(&args.n, args.magnetization);
    println!(
        "{} Fock tables for n = {:?}, M = {}",
        tables.len(),
        args.n,
        args.magnetization
    );
    for t in &tables {
        println!("{t}");
    }
    Ok(())
}
