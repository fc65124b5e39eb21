use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use weil_lab::brauer::{cyclic_vs_tate, endomorphism_invariants, reciprocity_check, tate_invariants};
use weil_lab::category;
use weil_lab::cyclotomic::{describe_field, split_prime, FIELD_TABLE_ENV};
use weil_lab::experiments::{enumerate_m, power_obstruction, wieferich_search, AbelianField, MTask};
use weil_lab::lsearch::{build_task, hits, probe_question, search, ProbeSpec, SearchMode};
use weil_lab::modmath::format_rational;
use weil_lab::report::Report;
use weil_lab::weil::{center_degree, construct_weil, enumerate_box, kernel_basis, SlopeVector, WeilContext};
use weil_lab::WeilError;

const EXIT_USAGE: u8 = 2;
const EXIT_EMPTY: u8 = 3;
const EXIT_UNSUPPORTED: u8 = 4;

#[derive(Parser, Debug, Serialize)]
#[command(name = "weil-lab", version, about = "Weil numbers, Brauer invariants and cyclic-extension searches")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct GlobalOpts {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads for range scans.
    #[arg(long, default_value_t = 1, global = true)]
    parallel: usize,
    /// Class-number table overrides (same as WEIL_LAB_FIELD_TABLE).
    #[arg(long, global = true)]
    field_table: Option<PathBuf>,
    /// Coefficient bound when searching for prime generators.
    #[arg(long, default_value_t = 4, global = true)]
    coeff_bound: u64,
    /// Add wall-clock timing to JSON (makes output non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Describe Q(zeta_N) and optionally the splitting of p.
    Field {
        #[arg(long)]
        conductor: u64,
        #[arg(long)]
        p: Option<u64>,
    },
    /// Weil numbers of weight 0.
    #[command(subcommand)]
    Weil(WeilCommand),
    /// Local invariants of End(X(pi)) by Tate's formula.
    Invariants {
        #[arg(long)]
        conductor: u64,
        #[arg(long)]
        p: u64,
        /// Level n (defaults to f h).
        #[arg(long)]
        n: Option<u64>,
        /// Slope vector, comma separated; defaults to the first kernel basis vector.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        slope: Option<Vec<i64>>,
        /// q = p^q_exp.
        #[arg(long, default_value_t = 1)]
        q_exp: u64,
    },
    /// Search for primes l giving a cyclic L of degree mn.
    SearchL {
        #[arg(long)]
        conductor: u64,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        bound: u64,
        /// cd: sufficient conditions (c),(d); ab: conditions (a),(b).
        #[arg(long, default_value = "cd", value_parser = ["cd", "ab"])]
        mode: String,
        /// List every scanned prime, not only the hits.
        #[arg(long)]
        all: bool,
    },
    /// Generalized Artin set: primes p <= bound in M(a, n, F).
    Artin {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long)]
        n: u64,
        /// Conductor of F (1 for Q).
        #[arg(long, default_value_t = 1)]
        conductor: u64,
        /// Use the maximal real subfield of Q(zeta_C).
        #[arg(long)]
        real: bool,
        #[arg(long)]
        bound: u64,
        /// Index filter: index of <a> divides k.
        #[arg(long, default_value_t = 1, conflicts_with = "no_index_filter")]
        k: u64,
        /// Keep only the order-n quotient condition.
        #[arg(long)]
        no_index_filter: bool,
    },
    /// Primes l with p^(l-1) = 1 mod l^2.
    Wieferich {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        bound: u64,
    },
    /// Motive category computations.
    #[command(subcommand)]
    Category(CategoryCommand),
    /// Hit statistics for the cyclic-extension question over a grid.
    Probe {
        /// Entries conductor:p:n:bound, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<String>,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum WeilCommand {
    /// Construct every kernel lattice point with |a_w| <= bound.
    Enumerate {
        #[arg(long)]
        conductor: u64,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, default_value_t = 1)]
        bound: i64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CategoryCommand {
    /// Decomposition table for a default object set.
    Demo {
        #[arg(long)]
        conductor: u64,
        #[arg(long)]
        p: u64,
    },
}

struct Outcome {
    command: &'static str,
    results: Value,
    text: String,
    empty: bool,
}

fn usage(msg: String) -> WeilError {
    WeilError::InvalidInput(msg)
}

fn run(cli: &Cli) -> weil_lab::Result<Outcome> {
    let g = &cli.global;
    let threads = g.parallel.max(1);
    match &cli.command {
        Command::Field { conductor, p } => {
            let field = describe_field(*conductor)?;
            let splitting = p.map(|p| split_prime(&field, p)).transpose()?;
            let mut text = format!(
                "Q(zeta_{}): degree {}, m = {}, h = {}, [K+:Q] = {}\n",
                field.conductor, field.degree, field.torsion_order, field.class_number, field.real_subfield_degree
            );
            if let Some(s) = &splitting {
                text += &format!("p = {}: e = {}, f = {}, g = {}\nprimes {:?}\n", s.p, s.e, s.f, s.g, s.primes);
                text += &format!("conjugation {:?}\nreal primes {:?}\n", s.conjugation, s.real_primes);
            }
            Ok(Outcome {
                command: "field",
                results: json!({ "field": field, "splitting": splitting }),
                text,
                empty: false,
            })
        }
        Command::Weil(WeilCommand::Enumerate { conductor, p, n, bound }) => {
            let ctx = WeilContext::from_conductor(*conductor, *p)?;
            let n = n.unwrap_or(ctx.level_unit());
            let elems = enumerate_box(&ctx, n, *bound, g.coeff_bound)?;
            let mut text = format!("level {n}, mn = {}, {} elements\n", ctx.m() * n, elems.len());
            let mut rows = Vec::new();
            for w in &elems {
                let c = center_degree(&ctx, w);
                let x = w.explicit.as_ref().map(|x| x.to_string()).unwrap_or_default();
                text += &format!("{:?}  [Q(pi^mn):Q] = {c}  pi^n = {x}\n", w.slope.entries);
                rows.push(json!({ "element": w, "center_degree": c }));
            }
            Ok(Outcome {
                command: "weil enumerate",
                results: json!({ "level": n, "elements": rows }),
                text,
                empty: false,
            })
        }
        Command::Invariants { conductor, p, n, slope, q_exp } => {
            let ctx = WeilContext::from_conductor(*conductor, *p)?;
            let n = n.unwrap_or(ctx.level_unit());
            let s = match slope {
                Some(v) => SlopeVector::new(&ctx.splitting, v.clone())?,
                None => kernel_basis(&ctx.splitting).into_iter().next().unwrap_or(SlopeVector::zero(&ctx.splitting)),
            };
            let pi = construct_weil(&ctx, &s, n, g.coeff_bound)?;
            let tate = tate_invariants(&ctx, &pi, *q_exp)?;
            let end = endomorphism_invariants(&ctx, &pi, *q_exp)?;
            let cyclic = if *q_exp == 1 { Some(cyclic_vs_tate(&ctx, &pi)?) } else { None };
            let mut text = format!("slope {:?}, level {n}, q = {}^{q_exp}\n", s.entries, p);
            for (name, prof) in [("Q[pi^mn]", &tate), ("Q[pi]", &end)] {
                text += &format!("center {name} of degree {}:", prof.center.degree);
                for pl in &prof.places {
                    text += &format!(" w{}:{}", pl.label, format_rational(&pl.invariant));
                }
                text += &format!("  reciprocity {}\n", reciprocity_check(prof));
            }
            Ok(Outcome {
                command: "invariants",
                results: json!({
                    "slope": s,
                    "explicit": pi.explicit,
                    "tate": tate,
                    "endomorphism": end,
                    "reciprocity": reciprocity_check(&tate) && reciprocity_check(&end),
                    "cyclic_vs_tate": cyclic,
                }),
                text,
                empty: false,
            })
        }
        Command::SearchL { conductor, p, n, bound, mode, all } => {
            let mode: SearchMode = mode.parse()?;
            let ctx = WeilContext::from_conductor(*conductor, *p)?;
            let task = build_task(ctx, *n, *bound, mode, g.coeff_bound)?;
            let cands = search(&task, threads)?;
            let hit_list = hits(&cands);
            let mut text = format!("mn = {}, {} candidates scanned, hits {:?}\n", task.mn, cands.len(), hit_list);
            for c in cands.iter().filter(|c| c.hit) {
                text += &format!("l = {}: {}\n", c.l, c.l_description);
                for line in &c.certificate {
                    text += &format!("  {line}\n");
                }
            }
            let shown: Vec<_> = cands.iter().filter(|c| *all || c.hit).collect();
            Ok(Outcome {
                command: "search-l",
                results: json!({
                    "mn": task.mn,
                    "scanned": cands.len(),
                    "hits": hit_list,
                    "first_hit": hit_list.first(),
                    "candidates": shown,
                }),
                text,
                empty: hit_list.is_empty(),
            })
        }
        Command::Artin { a, n, conductor, real, bound, k, no_index_filter } => {
            let field =
                if *real { AbelianField::real_cyclotomic(*conductor)? } else { AbelianField::cyclotomic(*conductor)? };
            let k = if *no_index_filter { None } else { Some(*k) };
            let task = MTask::with_index_divisor(*a, *n, field.clone(), *bound, k)?;
            let primes = enumerate_m(&task, threads);
            let obstruction = power_obstruction(*a, &field)?;
            let text = format!(
                "F = {} (degree {}), {} primes: {:?}\npower obstruction N = {} (conservative)\n",
                field.name,
                field.degree,
                primes.len(),
                primes,
                obstruction.bound
            );
            Ok(Outcome {
                command: "artin",
                results: json!({ "field": field, "primes": primes, "count": primes.len(), "power_obstruction": obstruction }),
                text,
                empty: primes.is_empty(),
            })
        }
        Command::Wieferich { p, bound } => {
            let r = wieferich_search(*p, *bound, threads)?;
            let text = format!(
                "base {}: {:?} among {} primes (heuristic sum 1/l = {}), recheck {}\n",
                r.p, r.primes, r.primes_scanned, r.heuristic_expected, r.rechecked
            );
            let empty = r.primes.is_empty();
            Ok(Outcome { command: "wieferich", results: serde_json::to_value(r).expect("serializes"), text, empty })
        }
        Command::Category(CategoryCommand::Demo { conductor, p }) => {
            let ctx = WeilContext::from_conductor(*conductor, *p)?;
            let rows = category::demo(&ctx, g.coeff_bound)?;
            let mut text = String::new();
            for r in &rows {
                let rank = match r.rank {
                    Some(k) => k.to_string(),
                    None => format!("[{}, {}]", r.rank_bounds.lower, r.rank_bounds.upper),
                };
                text += &format!("{:<24} rank {:<10} {}\n", r.expression, rank, r.decomposition);
            }
            Ok(Outcome { command: "category demo", results: json!({ "rows": rows }), text, empty: false })
        }
        Command::Probe { grid } => {
            let specs = grid.iter().map(|s| parse_probe(s)).collect::<weil_lab::Result<Vec<_>>>()?;
            let rows = probe_question(&specs, g.coeff_bound, threads);
            let mut text = String::new();
            for r in &rows {
                text += &format!(
                    "N={} p={} n={} bound={}: first cd {:?}, first ab {:?}, hits {}/{} eligible {}\n",
                    r.spec.conductor,
                    r.spec.p,
                    r.spec.n,
                    r.spec.bound,
                    r.first_hit_cd,
                    r.first_hit_ab,
                    r.hits_cd,
                    r.hits_ab,
                    r.eligible
                );
                if let Some(e) = &r.error {
                    text += &format!("  error: {e}\n");
                }
            }
            Ok(Outcome { command: "probe", results: json!({ "rows": rows }), text, empty: false })
        }
    }
}

fn parse_probe(s: &str) -> weil_lab::Result<ProbeSpec> {
    let parts: Vec<u64> = s
        .split(':')
        .map(|t| t.trim().parse::<u64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| usage(format!("bad grid entry {s:?}")))?;
    match parts.as_slice() {
        &[conductor, p, n, bound] => Ok(ProbeSpec { conductor, p, n, bound }),
        _ => Err(usage(format!("grid entry {s:?} must be conductor:p:n:bound"))),
    }
}

fn emit(cli: &Cli, body: &str) -> std::io::Result<()> {
    match &cli.global.output {
        Some(path) => std::fs::write(path, body),
        None => std::io::stdout().write_all(body.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(path) = &cli.global.field_table {
        std::env::set_var(FIELD_TABLE_ENV, path);
    }
    let start = Instant::now();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                WeilError::InvalidInput(_) | WeilError::BadModulus(_) | WeilError::NotCoprime { .. } => EXIT_USAGE,
                e if e.is_unsupported() => EXIT_UNSUPPORTED,
                _ => 1,
            });
        }
    };
    let body = match cli.global.format {
        Format::Text => outcome.text.clone(),
        Format::Json => {
            let ms = cli.global.timing.then(|| start.elapsed().as_millis() as u64);
            let config = json!({ "global": cli.global, "command": cli.command });
            Report::new(outcome.command, config, &outcome.results).with_timing(ms).to_json()
        }
    };
    if let Err(e) = emit(&cli, &body) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if outcome.empty {
        ExitCode::from(EXIT_EMPTY)
    } else {
        ExitCode::SUCCESS
    }
}
