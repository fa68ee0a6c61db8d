use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use oslab::atoms::{atomic_decompose, hardy_norm_default, validate_atom};
use oslab::cz::{apply_cz, CzKernel, Realization};
use oslab::grid::{read_csv_1d, read_gridfn, write_gridfn, GridFunction, Region};
use oslab::harness::{calibrate, run_suite, Brackets, Config, Context, Mode, SUITES};
use oslab::lpaley::{poisson_maximal, LittlewoodPaley, LpConfig};
use oslab::maximal::{
    default_peetre_b, default_radii, dyadic_scales, grand_maximal, hl_centered, hl_uncentered, nontangential_maximal,
    peetre_maximal, radial_maximal, Extension, MaximalConfig, TestFunction,
};
use oslab::norms::{amalgam_norm, lebesgue_norm, luxemburg_norm, slice_norm, NormRow, SliceParams};
use oslab::orlicz::OrliczFunction;

#[derive(Parser)]
#[command(name = "oslab", version, about = "Orlicz-slice function spaces on sampled grids")]
struct Cli {
    /// TOML configuration for the verification harness.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; results go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Clone)]
struct Input {
    /// GRIDFN1 file, or a 1-D CSV when the name ends in `.csv`.
    #[arg(long)]
    input: PathBuf,
    /// Half-width for value-only CSV input.
    #[arg(long)]
    half_width: Option<f64>,
}

#[derive(Args, Clone)]
struct Space {
    /// Orlicz function: `power:<r>`, `powerlog:<p>` or `logquotient`.
    #[arg(long, default_value = "power:2")]
    phi: String,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
}

impl Space {
    fn params(&self) -> Result<SliceParams> {
        Ok(SliceParams::new(self.t, self.q, OrliczFunction::parse_spec(&self.phi)?))
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum NormKind {
    Slice,
    Amalgam,
    Luxemburg,
    Lebesgue,
}

#[derive(Copy, Clone, ValueEnum)]
enum MaximalOp {
    Centered,
    Uncentered,
    Radial,
    Nontan,
    Peetre,
    Grand,
}

#[derive(Copy, Clone, ValueEnum)]
enum LpOp {
    G,
    #[value(name = "S")]
    S,
    Gstar,
    Poisson,
}

#[derive(Copy, Clone, ValueEnum)]
enum KernelArg {
    Hilbert,
    Riesz1,
    Riesz2,
}

#[derive(Copy, Clone, ValueEnum)]
enum RealizationArg {
    Mult,
    Direct,
}

#[derive(Subcommand)]
enum Command {
    /// Print a norm report row.
    Norm {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        space: Space,
        #[arg(long, value_enum, default_value = "slice")]
        kind: NormKind,
    },
    /// Maximal function of the input.
    Maximal {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        space: Space,
        #[arg(long, value_enum)]
        op: MaximalOp,
        /// Aperture of the non-tangential cone.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// Peetre decay exponent; defaults to n/min(p, q) + 1/2.
        #[arg(long)]
        b: Option<f64>,
        /// Derivative order of the grand maximal dictionary.
        #[arg(long = "N")]
        order: Option<usize>,
    },
    /// Littlewood-Paley square functions and the Poisson maximal function.
    Lpaley {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        op: LpOp,
        #[arg(long, default_value_t = 4.0)]
        lambda: f64,
        #[arg(long, default_value_t = 4)]
        per_octave: usize,
    },
    /// Radial maximal function, or the Hardy quasi-norm with `--norm`.
    Hardy {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        space: Space,
        #[arg(long)]
        norm: bool,
    },
    /// Level-set atomic decomposition: manifest CSV plus one GRIDFN1 per atom.
    Decompose {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        space: Space,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        d: usize,
    },
    /// Calderón-Zygmund transform of the input.
    Czop {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        kernel: KernelArg,
        #[arg(long, value_enum, default_value = "mult")]
        realization: RealizationArg,
        /// Truncation radius; defaults to two grid steps.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Run verification suites and print one summary line per suite.
    Verify {
        /// Suites to run; all when omitted.
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Freeze brackets from the calibration corpora into `<out>/brackets.toml`.
        #[arg(long)]
        calibrate: bool,
        /// Frozen brackets to check against; the shipped ones by default.
        #[arg(long)]
        brackets: Option<PathBuf>,
    },
}

fn read_input(input: &Input) -> Result<GridFunction> {
    let file = File::open(&input.input).with_context(|| format!("opening {}", input.input.display()))?;
    let mut r = BufReader::new(file);
    let f = if input.input.extension().is_some_and(|e| e == "csv") {
        read_csv_1d(r, input.half_width)?
    } else {
        read_gridfn(&mut r)?
    };
    Ok(f)
}

fn emit(f: &GridFunction, out: Option<&Path>, name: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join(format!("{name}.gridfn"));
            let mut w = BufWriter::new(File::create(&path)?);
            write_gridfn(&mut w, f)?;
            w.flush()?;
            println!("{}", path.display());
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            write_gridfn(&mut w, f)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn write_text(out: Option<&Path>, name: &str, text: &str) -> Result<()> {
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(name), text)?;
    }
    Ok(())
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::from_toml(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
        cfg.calibration_seed = s;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool> {
    let out = cli.out.as_deref();
    match &cli.cmd {
        Command::Norm { input, space, kind } => {
            let f = read_input(input)?;
            let p = space.params()?;
            let (name, value) = match kind {
                NormKind::Slice => ("slice", slice_norm(&f, &p)?),
                NormKind::Amalgam => ("amalgam", amalgam_norm(&f, p.t, p.q, &p.phi)?),
                NormKind::Luxemburg => ("luxemburg", luxemburg_norm(&f, &p.phi, Region::All)),
                NormKind::Lebesgue => ("lebesgue", lebesgue_norm(&f, p.q)),
            };
            let row = NormRow {
                function_id: input.input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
                space: name.to_string(),
                t: p.t,
                q: p.q,
                phi_kind: p.phi.label(),
                value,
                tolerance: 0.0,
            };
            let text = format!("{}\n{}\n", NormRow::HEADER, row.to_csv());
            print!("{text}");
            write_text(out, "norm.csv", &text)?;
        }
        Command::Maximal {
            input,
            space,
            op,
            a,
            b,
            order,
        } => {
            let f = read_input(input)?;
            let p = space.params()?;
            let dim = f.spec.dim;
            let phi0 = TestFunction::unit_gaussian(dim);
            let scales = dyadic_scales(&f.spec);
            let radii = default_radii(&f.spec);
            let g = match op {
                MaximalOp::Centered => hl_centered(&f, &radii),
                MaximalOp::Uncentered => hl_uncentered(&f, &radii),
                MaximalOp::Radial => radial_maximal(&f, &phi0, &scales, Extension::Zero)?,
                MaximalOp::Nontan => nontangential_maximal(&f, &phi0, *a, &scales, Extension::Zero),
                MaximalOp::Peetre => {
                    let b = b.unwrap_or_else(|| default_peetre_b(dim, p.min_exponent()));
                    peetre_maximal(&f, &phi0, b, &scales, Extension::Zero)
                }
                MaximalOp::Grand => {
                    let mut cfg = MaximalConfig::for_space(&f.spec, &p);
                    if let Some(n) = order {
                        cfg.order = *n;
                        cfg.dictionary = oslab::maximal::default_dictionary(dim, *n);
                    }
                    grand_maximal(&f, &cfg)
                }
            };
            emit(&g, out, "maximal")?;
        }
        Command::Lpaley {
            input,
            op,
            lambda,
            per_octave,
        } => {
            let f = read_input(input)?;
            let g = match op {
                LpOp::Poisson => poisson_maximal(&f, &dyadic_scales(&f.spec)),
                _ => {
                    let lp = LittlewoodPaley::new(&f.spec, LpConfig::new(&f.spec, *lambda, *per_octave)?)?;
                    let sq = lp.all(&f);
                    match op {
                        LpOp::G => sq.g,
                        LpOp::S => sq.s,
                        _ => sq.gstar,
                    }
                }
            };
            emit(&g, out, "lpaley")?;
        }
        Command::Hardy { input, space, norm } => {
            let f = read_input(input)?;
            let p = space.params()?.truncated();
            if *norm {
                let v = hardy_norm_default(&f, &p)?;
                println!("{v:.12e}");
                write_text(out, "hardy.txt", &format!("{v:.12e}\n"))?;
            } else {
                let m = radial_maximal(&f, &TestFunction::unit_gaussian(f.spec.dim), &dyadic_scales(&f.spec), Extension::Zero)?;
                emit(&m, out, "hardy")?;
            }
        }
        Command::Decompose { input, space, s, d } => {
            let Some(dir) = out else {
                bail!("decompose writes a manifest and payload files; pass --out <dir>");
            };
            let f = read_input(input)?;
            let p = space.params()?;
            let cfg = MaximalConfig::for_space(&f.spec, &p);
            let dec = atomic_decompose(&f, &p, &cfg, *s, *d)?;
            fs::create_dir_all(dir)?;
            let mut manifest =
                String::from("atom,level,center_x,center_y,side,lambda,size_slack,moment_max,moment_tol,file\n");
            for (k, term) in dec.terms.iter().enumerate() {
                let v = validate_atom(&term.atom, &p);
                let name = format!("atom_{k:05}");
                manifest.push_str(&format!(
                    "{k},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.3e},{:.3e},{:.3e},{name}.gridfn\n",
                    term.level,
                    term.atom.cube.center[0],
                    term.atom.cube.center[1],
                    term.atom.cube.side,
                    term.lambda,
                    v.size_slack,
                    v.moment_max,
                    v.moment_tol
                ));
                let mut w = BufWriter::new(File::create(dir.join(format!("{name}.gridfn")))?);
                write_gridfn(&mut w, &term.atom.payload.to_dense())?;
                w.flush()?;
            }
            let mut w = BufWriter::new(File::create(dir.join("residual.gridfn"))?);
            write_gridfn(&mut w, &dec.residual)?;
            w.flush()?;
            fs::write(dir.join("manifest.csv"), manifest)?;
            println!("atoms={} levels={}..{}", dec.terms.len(), dec.levels.0, dec.levels.1);
        }
        Command::Czop {
            input,
            kernel,
            realization,
            eps,
        } => {
            let f = read_input(input)?;
            let mut k = match kernel {
                KernelArg::Hilbert => CzKernel::hilbert(&f.spec),
                KernelArg::Riesz1 => CzKernel::riesz(0, &f.spec),
                KernelArg::Riesz2 => CzKernel::riesz(1, &f.spec),
            };
            k = k.with_realization(match realization {
                RealizationArg::Mult => Realization::Multiplier,
                RealizationArg::Direct => Realization::Direct,
            });
            if let Some(e) = eps {
                k = k.with_eps(*e);
            }
            emit(&apply_cz(&k, &f)?, out, "czop")?;
        }
        Command::Verify {
            suites,
            calibrate: cal,
            brackets,
        } => {
            let cfg = load_config(cli)?;
            for s in suites {
                if !SUITES.contains(&s.as_str()) {
                    bail!(oslab::Error::UnknownSuite(s.clone()));
                }
            }
            let names: Vec<&str> = if suites.is_empty() {
                SUITES.to_vec()
            } else {
                suites.iter().map(String::as_str).collect()
            };
            if *cal {
                let (frozen, reports) = calibrate(&cfg)?;
                for r in &reports {
                    println!("{} seed={}", r.summary(), r.environment.seed);
                    write_text(out, &format!("{}-{}.csv", r.suite, r.environment.seed), &r.to_csv())?;
                }
                let dir = out.unwrap_or(Path::new("."));
                fs::create_dir_all(dir)?;
                fs::write(dir.join("brackets.toml"), frozen.to_toml())?;
                return Ok(reports.iter().all(|r| r.passed()));
            }
            let frozen = match brackets {
                Some(p) => Brackets::from_toml(&fs::read_to_string(p)?)?,
                None => Brackets::golden(),
            };
            let ctx = Context::new(cfg, frozen, Mode::Check)?;
            let mut all = true;
            for name in names {
                let r = run_suite(name, &ctx)?;
                println!("{}", r.summary());
                write_text(out, &format!("{name}.csv"), &r.to_csv())?;
                all &= r.passed();
            }
            return Ok(all);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
