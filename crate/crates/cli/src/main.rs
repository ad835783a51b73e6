mod tables;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use rsbox::circulant::{affine_size, count_invertible_circulant, count_shift_invariant_bijections, gl_size};
use rsbox::constructions::{
    chi, is_valid_landscape, k_plus_2_generator, landscape_to_rule, patt, standard_landscape, Landscape,
};
use rsbox::equivalence::{cyclic_equivalent, essential_equivalent, strong_affine_equivalent};
use rsbox::metrics::{component_profile, differential_uniformity, metrics_record};
use rsbox::sbox::{inv_set_with, InvSetOptions};
use rsbox::search::{classify_essential, enumerate_liftings_from, ResumeToken, SearchConstraints, Shape};
use rsbox::{induce, parse_function, BooleanFunction, Error, MetricsRecord};

#[derive(Parser)]
#[command(name = "rsbox", version, about = "Shift-invariant S-boxes induced by local Boolean rules")]
struct Cli {
    /// Worker threads for the parallel passes.
    #[arg(long, global = true, env = "RSBOX_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountWhat {
    Circulant,
    Bijections,
    Gl,
    Affine,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Chi,
    Patt,
    Kplus2,
    Landscape,
}

#[derive(Clone, Copy, ValueEnum)]
enum EquivMode {
    Cyclic,
    StrongAffine,
    Essential,
}

#[derive(Subcommand)]
enum Command {
    /// Bijectivity and (nl, p, DU, BU) of the map induced on n bits.
    Analyze {
        #[arg(long = "f")]
        anf: String,
        #[arg(long)]
        n: usize,
        /// Arity of the rule; defaults to the highest variable index.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value = "tsv")]
        format: Format,
    },
    /// Exhaustive search for liftings.
    Search {
        #[arg(long)]
        k: usize,
        /// Dimensions, e.g. `7` or `4,5,6` or `4..15`.
        #[arg(long)]
        n: String,
        /// Keep only rules with f(0) = 0 (the default); `--no-fix-zero` lifts the restriction.
        #[arg(long, default_value_t = false)]
        fix_zero: bool,
        #[arg(long, conflicts_with = "fix_zero")]
        no_fix_zero: bool,
        #[arg(long)]
        max_degree: Option<usize>,
        #[arg(long)]
        quadratic_only: bool,
        #[arg(long, conflicts_with = "quadratic_only")]
        one_cubic_term: bool,
        #[arg(long)]
        nonlinear: bool,
        /// Permit candidate spaces above 2^24.
        #[arg(long)]
        allow_large: bool,
        /// Candidates to process before stopping with a resume token.
        #[arg(long)]
        budget: Option<u64>,
        /// Continue from a saved resume token.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Where to save the resume token when the budget runs out.
        #[arg(long)]
        resume_out: Option<PathBuf>,
        /// Group results into essential-equivalence classes.
        #[arg(long)]
        classify: bool,
        /// Compute (nl, p, DU, BU) on every dimension found.
        #[arg(long)]
        metrics: bool,
        #[arg(long, value_enum, default_value = "tsv")]
        format: Format,
    },
    /// Closed-form counts.
    Count {
        #[arg(long, value_enum)]
        what: CountWhat,
        #[arg(long)]
        n: u64,
    },
    /// Builds a named family and checks bijectivity.
    Construct {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        pattern: Option<String>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Searches an equivalence witness between two induced maps.
    Equiv {
        #[arg(long, value_enum, default_value = "cyclic")]
        mode: EquivMode,
        #[arg(long = "f")]
        f: String,
        #[arg(long = "g")]
        g: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Regenerates a table; `--check` compares it with the built-in golden copy.
    Table {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(tables::NAMES))]
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        check: bool,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Dimensions n in [k, m] on which the rule induces a bijection.
    InvSet {
        #[arg(long = "f")]
        anf: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: Option<usize>,
        /// Largest dimension tested exhaustively.
        #[arg(long, default_value_t = rsbox::sbox::DEFAULT_INV_SET_CAP)]
        max_dim: usize,
    },
}

/// Prints a progress line to stderr every few seconds while `work` runs.
fn with_heartbeat<T>(label: &str, work: impl FnOnce() -> T) -> T {
    let done = Arc::new(AtomicBool::new(false));
    let flag = done.clone();
    let label = label.to_string();
    let started = Instant::now();
    let ticker = std::thread::spawn(move || {
        let mut last = Instant::now();
        while !flag.load(Ordering::Relaxed) {
            std::thread::sleep(Duration::from_millis(100));
            if last.elapsed() >= Duration::from_secs(5) {
                eprintln!("[{label}] still running, {:.0?} elapsed", started.elapsed());
                last = Instant::now();
            }
        }
    });
    let out = work();
    done.store(true, Ordering::Relaxed);
    let _ = ticker.join();
    out
}

fn parse_dims(text: &str) -> Result<Vec<usize>, Error> {
    let bad = || Error::Parse { pos: 0, msg: format!("bad dimension list {text:?}") };
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn rule(text: &str, k: Option<usize>) -> Result<BooleanFunction, Error> {
    parse_function(text, k)
}

fn record_json(r: &MetricsRecord) -> serde_json::Value {
    serde_json::json!({ "nl": r.nl, "p": u8::from(r.plateaued), "du": r.du, "bu": r.bu })
}

fn analyze(anf: &str, n: usize, k: Option<usize>, format: Format) -> Result<String, Error> {
    let f = rule(anf, k)?;
    let sbox = induce(&f, n)?;
    let bijective = sbox.is_bijection()?;
    let (nl, p, du, bu) = if bijective {
        let r = metrics_record(&sbox)?;
        (r.nl, r.plateaued, r.du, Some(r.bu))
    } else {
        eprintln!("warning: the induced map is not a bijection; BU is undefined");
        let table = sbox.lookup_table()?;
        let (nl, p) = component_profile(table)?;
        (nl, p, differential_uniformity(table)?, None)
    };
    let bu_text = bu.map_or_else(|| "-".to_string(), |b| b.to_string());
    Ok(match format {
        Format::Tsv => format!(
            "k\tn\tanf\tbijective\tnl\tp\tdu\tbu\n{}\t{n}\t{}\t{}\t{nl}\t{}\t{du}\t{bu_text}\n",
            f.arity(),
            f.anf(),
            u8::from(bijective),
            u8::from(p)
        ),
        Format::Json => {
            let v = serde_json::json!({
                "k": f.arity(), "n": n, "anf": f.anf().to_string(), "bijective": bijective,
                "nl": nl, "p": u8::from(p), "du": du, "bu": bu,
            });
            format!("{v}\n")
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn search(
    k: usize,
    n: &str,
    no_fix_zero: bool,
    max_degree: Option<usize>,
    shape: Shape,
    nonlinear: bool,
    allow_large: bool,
    budget: Option<u64>,
    resume: Option<PathBuf>,
    resume_out: Option<PathBuf>,
    classify: bool,
    metrics: bool,
    format: Format,
) -> Result<(String, bool), Error> {
    let mut c = SearchConstraints::new(k, parse_dims(n)?);
    c.fix_zero = !no_fix_zero;
    c.max_degree = max_degree;
    c.shape = shape;
    c.nonlinear_only = nonlinear;
    c.allow_large = allow_large;
    c.budget = budget;
    let token = match resume {
        Some(path) => Some(std::fs::read_to_string(path)?.parse::<ResumeToken>()?),
        None => None,
    };
    let outcome = with_heartbeat("search", || enumerate_liftings_from(&c, token.as_ref()));
    let (mut reports, complete) = match outcome {
        Ok(r) => (r, true),
        Err(Error::BudgetExceeded { partial, resume, .. }) => {
            match &resume_out {
                Some(path) => std::fs::write(path, resume.to_string())?,
                None => eprint!("resume token:\n{resume}"),
            }
            eprintln!("budget exhausted; results are partial");
            (partial, false)
        }
        Err(e) => return Err(e),
    };
    if classify {
        classify_essential(&mut reports);
    }
    if metrics {
        for r in &mut reports {
            for &n in &r.dims {
                if n <= rsbox::metrics::MAX_BOOMERANG_DIM {
                    r.metrics.insert(n, metrics_record(&induce(&r.generator, n)?)?);
                }
            }
        }
    }
    let dims_text = |d: &[usize]| d.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    let text = match format {
        Format::Tsv => {
            let mut out = String::from("anf\tdims");
            if classify {
                out.push_str("\tclass");
            }
            if metrics {
                out.push_str("\tmetrics");
            }
            out.push('\n');
            for r in &reports {
                out.push_str(&format!("{}\t{}", r.anf(), dims_text(&r.dims)));
                if let Some(id) = r.class_id {
                    out.push_str(&format!("\t{id}"));
                }
                if metrics {
                    let m: Vec<String> = r.metrics.iter().map(|(n, m)| format!("{n}:{m}")).collect();
                    out.push_str(&format!("\t{}", m.join(" ")));
                }
                out.push('\n');
            }
            if !complete {
                out.push_str("# partial: search budget exceeded\n");
            }
            out
        }
        Format::Json => {
            let items: Vec<_> = reports
                .iter()
                .map(|r| {
                    let metrics: serde_json::Map<String, serde_json::Value> =
                        r.metrics.iter().map(|(n, m)| (n.to_string(), record_json(m))).collect();
                    serde_json::json!({ "anf": r.anf(), "dims": r.dims, "class": r.class_id, "metrics": metrics })
                })
                .collect();
            format!("{}\n", serde_json::json!({ "complete": complete, "liftings": items }))
        }
    };
    Ok((text, complete))
}

fn construct(family: Family, k: Option<usize>, pattern: Option<String>, n: Option<usize>) -> Result<String, Error> {
    let (f, default_n, note) = match family {
        Family::Chi => (chi(), 5, String::new()),
        Family::Patt => (patt(), 7, String::new()),
        Family::Kplus2 => {
            let k = k.ok_or_else(|| Error::Domain("--k is required for kplus2".into()))?;
            (k_plus_2_generator(k)?, k + 2, String::new())
        }
        Family::Landscape => {
            let l: Landscape = match (pattern, k) {
                (Some(p), _) => p.parse()?,
                (None, Some(k)) => standard_landscape(k)?,
                (None, None) => return Err(Error::Domain("--pattern or --k is required for landscape".into())),
            };
            let note = if l.has_dash() {
                "overlap\tn/a (dash cells)\n".to_string()
            } else {
                format!("overlap\t{}\n", is_valid_landscape(&l)?)
            };
            (landscape_to_rule(&l), l.k(), format!("pattern\t{l}\n{note}"))
        }
    };
    let n = n.unwrap_or(default_n);
    let bijective = induce(&f, n)?.is_bijection()?;
    Ok(format!("{note}k\t{}\nanf\t{}\nn\t{n}\nbijective\t{bijective}\n", f.arity(), f.anf()))
}

fn equiv(mode: EquivMode, f: &str, g: &str, n: usize, k: Option<usize>) -> Result<String, Error> {
    let (f, g) = (rule(f, k)?, rule(g, k)?);
    let arity = f.arity().max(g.arity());
    let (f, g) = (f.extend_arity(arity)?, g.extend_arity(arity)?);
    let (fs, gs) = (induce(&f, n)?, induce(&g, n)?);
    let witness = with_heartbeat("equiv", || match mode {
        EquivMode::Cyclic => cyclic_equivalent(&fs, &gs),
        EquivMode::StrongAffine => strong_affine_equivalent(&fs, &gs),
        EquivMode::Essential => essential_equivalent(&fs, &gs),
    })?;
    Ok(match witness {
        Some(w) => format!("{}\n", serde_json::to_string(&w).expect("witness serializes")),
        None => "none\n".to_string(),
    })
}

fn count(what: CountWhat, n: u64) -> Result<String, Error> {
    let value = match what {
        CountWhat::Circulant => count_invertible_circulant(n)?,
        CountWhat::Bijections => count_shift_invariant_bijections(n)?,
        CountWhat::Gl => gl_size(n),
        CountWhat::Affine => affine_size(n),
    };
    Ok(format!("{value}\n"))
}

fn table(name: &str, out: Option<PathBuf>, check: bool, budget: Option<u64>) -> Result<(String, bool), Error> {
    let rendered = with_heartbeat(name, || tables::render(name, budget))?;
    let mut ok = rendered.complete;
    if check {
        let expected = tables::golden(name).ok_or_else(|| Error::Domain(format!("no golden copy for {name}")))?;
        if expected != rendered.text {
            eprintln!("{name}: output differs from the golden copy");
            for (i, (a, b)) in expected.lines().zip(rendered.text.lines()).enumerate() {
                if a != b {
                    eprintln!("line {}: expected {a:?}, got {b:?}", i + 1);
                }
            }
            if expected.lines().count() != rendered.text.lines().count() {
                eprintln!("line counts differ: {} vs {}", expected.lines().count(), rendered.text.lines().count());
            }
            ok = false;
        } else {
            eprintln!("{name}: matches the golden copy");
        }
    }
    match out {
        Some(path) => {
            std::fs::write(path, &rendered.text)?;
            Ok((String::new(), ok))
        }
        None => Ok((rendered.text, ok)),
    }
}

fn inv(anf: &str, m: usize, k: Option<usize>, max_dim: usize) -> Result<String, Error> {
    let f = rule(anf, k)?;
    let set = inv_set_with(&f, m, InvSetOptions { max_dim })?;
    Ok(format!("{}\n", set.iter().map(usize::to_string).collect::<Vec<_>>().join(",")))
}

fn run(cli: Cli) -> Result<(String, bool), Error> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    }
    let done = |s: String| Ok((s, true));
    match cli.command {
        Command::Analyze { anf, n, k, format } => done(analyze(&anf, n, k, format)?),
        Command::Search {
            k,
            n,
            fix_zero: _,
            no_fix_zero,
            max_degree,
            quadratic_only,
            one_cubic_term,
            nonlinear,
            allow_large,
            budget,
            resume,
            resume_out,
            classify,
            metrics,
            format,
        } => {
            let shape = if quadratic_only {
                Shape::QuadraticOnly
            } else if one_cubic_term {
                Shape::OneCubicTerm
            } else {
                Shape::Any
            };
            search(
                k,
                &n,
                no_fix_zero,
                max_degree,
                shape,
                nonlinear,
                allow_large,
                budget,
                resume,
                resume_out,
                classify,
                metrics,
                format,
            )
        }
        Command::Count { what, n } => done(count(what, n)?),
        Command::Construct { family, k, pattern, n } => done(construct(family, k, pattern, n)?),
        Command::Equiv { mode, f, g, n, k } => done(equiv(mode, &f, &g, n, k)?),
        Command::Table { name, out, check, budget } => table(&name, out, check, budget),
        Command::InvSet { anf, m, k, max_dim } => done(inv(&anf, m, k, max_dim)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((text, ok)) => {
            print!("{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
