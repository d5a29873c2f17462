//! Command-line front end. Exit codes: 0 success, 1 not contained or
//! invalid, 2 usage or input error, 3 budget or size limit reached.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::cert::{verify_certificate, Certificate, Payload};
use crate::coloring::{
    coloring_number, coloring_number_exact, ordering_from_decomposition, wcol_inf, ColoringError, Radius,
    ReachMode, DEFAULT_CAP,
};
use crate::cycle_rank::{cycle_rank, CycleRankError};
use crate::decomposition::{cycle_member, erdos_posa, pattern_member, DirectedTreeDecomposition, PackingOrCover};
use crate::extract::{extract_from_grid, tc_from_relaxed_tree_chain, GridTarget};
use crate::families::{
    cycle_chain, cylindrical_grid, gen_m, ladder, relaxed_tree_chain, tree_chain, TreeChainRecipe,
};
use crate::graph::Digraph;
use crate::io::{parse_digraph, serialize_digraph, to_dot};
use crate::search::{find_model, SearchOutcome, DEFAULT_BUDGET};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;

/// Environment variable that overrides the default seed.
pub const SEED_ENV: &str = "TOOLKIT_SEED";

#[derive(Parser, Debug)]
#[command(name = "crank", version, about = "Cycle rank, butterfly minors and obstruction families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cycle rank of a digraph.
    Rank {
        graph: PathBuf,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Weak or strong coloring numbers.
    Wcol {
        graph: PathBuf,
        #[arg(long)]
        k: String,
        #[arg(long, value_enum, default_value_t = Mode::Weak)]
        mode: Mode,
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Generate a member of a family.
    Gen {
        #[arg(value_enum)]
        family: Family,
        order: usize,
        #[arg(long)]
        recipe: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Edgelist)]
        format: Format,
        /// Chain decomposition certificate, for the `m` family.
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Search for a butterfly minor model of PATTERN in HOST.
    Minor {
        pattern: PathBuf,
        host: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Run a constructive extraction and write the bundle to a directory.
    Extract {
        #[arg(value_enum)]
        kind: ExtractKind,
        k: usize,
        #[arg(long)]
        recipe: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a certificate against a digraph.
    Verify {
        #[arg(value_enum)]
        kind: VerifyKind,
        graph: PathBuf,
        cert: PathBuf,
    },
    /// Packing of disjoint family members or a small cover.
    Ep {
        graph: PathBuf,
        #[arg(long)]
        dtd: PathBuf,
        #[arg(long)]
        family: String,
        #[arg(short = 'k')]
        k: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mode {
    Weak,
    Strong,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Family {
    Ladder,
    Cyclechain,
    Treechain,
    Grid,
    Rtc,
    M,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Edgelist,
    Dot,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ExtractKind {
    GridChain,
    GridLadder,
    Tc,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum VerifyKind {
    Cr,
    Model,
    Dtd,
    Chain,
}

impl VerifyKind {
    fn accepts(self, p: &Payload) -> bool {
        matches!(
            (self, p),
            (VerifyKind::Cr, Payload::CrDecomposition { .. })
                | (VerifyKind::Model, Payload::BfModel { .. })
                | (VerifyKind::Dtd, Payload::Dtd(_))
                | (VerifyKind::Chain, Payload::ChainDecomposition(_))
        )
    }
}

/// Failure carrying its exit code.
struct Fail(i32, String);

type Outcome = Result<i32, Fail>;

fn usage(msg: impl std::fmt::Display) -> Fail {
    Fail(EXIT_USAGE, msg.to_string())
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn say(&mut self, s: impl std::fmt::Display) {
        let _ = writeln!(self.out, "{s}");
    }

    fn warn(&mut self, s: impl std::fmt::Display) {
        let _ = writeln!(self.err, "{s}");
    }

    fn read_graph(&mut self, p: &FsPath) -> Result<Digraph, Fail> {
        let text = fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
        let parsed = parse_digraph(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?;
        for w in parsed.warnings {
            self.warn(format!("{}: {w}", p.display()));
        }
        Ok(parsed.graph)
    }

    fn seed(&mut self, given: Option<u64>) -> Result<u64, Fail> {
        let seed = match given {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(s) => s.trim().parse().map_err(|_| usage(format!("{SEED_ENV} is not an integer: {s}")))?,
                Err(_) => 0,
            },
        };
        self.warn(format!("seed: {seed}"));
        Ok(seed)
    }
}

fn write_file(p: &FsPath, text: &str) -> Result<(), Fail> {
    fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(p: &FsPath) -> Result<T, Fail> {
    let text = fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn limit(e: impl std::fmt::Display) -> Fail {
    Fail(EXIT_INDETERMINATE, e.to_string())
}

fn coloring_fail(e: ColoringError) -> Fail {
    match e {
        ColoringError::TooLarge { .. } | ColoringError::CycleRank(CycleRankError::TooLarge(_)) => limit(e),
        other => usage(other),
    }
}

/// Runs the tool on `args` (without the program name) and returns the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("crank")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    let mut io = Io { out, err };
    match dispatch(cli.command, &mut io) {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            io.warn(format!("error: {msg}"));
            code
        }
    }
}

fn dispatch(cmd: Command, io: &mut Io) -> Outcome {
    match cmd {
        Command::Rank { graph, cert } => {
            let g = io.read_graph(&graph)?;
            let cr = cycle_rank(&g).map_err(limit)?;
            io.say(cr.rank);
            if let Some(p) = cert {
                let c = Certificate::new(&g, Payload::CrDecomposition { rank: cr.rank, decomposition: cr.decomposition });
                write_file(&p, &c.to_json())?;
            }
            Ok(EXIT_OK)
        }
        Command::Wcol { graph, k, mode, exact, cap } => {
            let g = io.read_graph(&graph)?;
            let radius = match k.as_str() {
                "inf" | "infinity" => Radius::Infinite,
                s => Radius::Finite(s.parse().map_err(|_| usage(format!("--k expects a number or inf, got {s}")))?),
            };
            let mode = match mode {
                Mode::Weak => ReachMode::Weak,
                Mode::Strong => ReachMode::Strong,
            };
            if exact {
                let (v, order) = coloring_number_exact(&g, radius, mode, cap).map_err(coloring_fail)?;
                io.say(v);
                io.warn(format!("ordering: {}", order.0.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(" ")));
            } else if radius == Radius::Infinite && mode == ReachMode::Weak {
                io.say(wcol_inf(&g).map_err(coloring_fail)?);
            } else if g.n() <= cap {
                io.say(coloring_number_exact(&g, radius, mode, cap).map_err(coloring_fail)?.0);
            } else {
                let cr = cycle_rank(&g).map_err(limit)?;
                let order = ordering_from_decomposition(&g, &cr.decomposition).map_err(coloring_fail)?;
                io.say(coloring_number(&g, &order, radius, mode).map_err(coloring_fail)?);
                io.warn("upper bound from the cycle rank ordering; use --exact with a larger --cap for the exact value");
            }
            Ok(EXIT_OK)
        }
        Command::Gen { family, order, recipe, seed, format, cert } => {
            let bad = |e: crate::families::FamilyError| usage(e);
            let g = match family {
                Family::Ladder => ladder(order).map_err(bad)?,
                Family::Cyclechain => cycle_chain(order).map_err(bad)?.graph,
                Family::Treechain => tree_chain(order).map_err(bad)?.graph,
                Family::Grid => cylindrical_grid(order).map_err(bad)?,
                Family::Rtc => {
                    let r = match recipe {
                        Some(p) => read_json::<TreeChainRecipe>(&p)?,
                        None => {
                            let s = io.seed(seed)?;
                            TreeChainRecipe::random(order, 3, &mut ChaCha8Rng::seed_from_u64(s))
                        }
                    };
                    relaxed_tree_chain(&r).map_err(bad)?.0.graph
                }
                Family::M => {
                    let s = io.seed(seed)?;
                    let (g, cd) = gen_m(order, s, 1 << 20).map_err(|e| limit(e))?;
                    if let Some(p) = cert {
                        write_file(&p, &Certificate::new(&g, Payload::ChainDecomposition(cd)).to_json())?;
                    }
                    g
                }
            };
            match format {
                Format::Edgelist => io.say(serialize_digraph(&g).trim_end()),
                Format::Dot => io.say(to_dot(&g, &format!("{family:?}{order}").to_lowercase()).trim_end()),
            }
            Ok(EXIT_OK)
        }
        Command::Minor { pattern, host, budget, model } => {
            let h = io.read_graph(&pattern)?;
            let g = io.read_graph(&host)?;
            let res = find_model(&h, &g, budget);
            io.say(res.label());
            match res {
                SearchOutcome::Found(mu) => {
                    if let Some(p) = model {
                        write_file(&p, &Certificate::new(&g, Payload::BfModel { pattern: h, model: mu }).to_json())?;
                    }
                    Ok(EXIT_OK)
                }
                SearchOutcome::NotContained => Ok(EXIT_NEGATIVE),
                SearchOutcome::Indeterminate => Ok(EXIT_INDETERMINATE),
            }
        }
        Command::Extract { kind, k, recipe, seed, out } => {
            fs::create_dir_all(&out).map_err(|e| usage(format!("{}: {e}", out.display())))?;
            let (host, pattern, model, bundle) = match kind {
                ExtractKind::GridChain | ExtractKind::GridLadder => {
                    let target = if matches!(kind, ExtractKind::GridChain) { GridTarget::Chain } else { GridTarget::Ladder };
                    let e = extract_from_grid(k, target).map_err(usage)?;
                    let bundle = json!({ "host": e.host, "pattern": e.pattern, "model": e.model, "script": e.script });
                    (e.host, e.pattern, e.model, bundle)
                }
                ExtractKind::Tc => {
                    let r = match recipe {
                        Some(p) => read_json::<TreeChainRecipe>(&p)?,
                        None => {
                            let s = io.seed(seed)?;
                            TreeChainRecipe::random(2 * k.max(1) - 1, 3, &mut ChaCha8Rng::seed_from_u64(s))
                        }
                    };
                    let e = tc_from_relaxed_tree_chain(&r, k).map_err(usage)?;
                    let bundle = json!({ "recipe": r, "host": e.host, "pattern": e.pattern, "model": e.model });
                    (e.host.graph, e.pattern.graph, e.model, bundle)
                }
            };
            write_file(&out.join("host.el"), &serialize_digraph(&host))?;
            write_file(&out.join("pattern.el"), &serialize_digraph(&pattern))?;
            write_file(&out.join("bundle.json"), &(serde_json::to_string_pretty(&bundle).expect("json") + "\n"))?;
            let cert = Certificate::new(&host, Payload::BfModel { pattern: pattern.clone(), model });
            write_file(&out.join("model.cert.json"), &cert.to_json())?;
            io.say(format!("pattern {} vertices, host {} vertices, written to {}", pattern.n(), host.n(), out.display()));
            Ok(EXIT_OK)
        }
        Command::Verify { kind, graph, cert } => {
            let g = io.read_graph(&graph)?;
            let text = fs::read_to_string(&cert).map_err(|e| usage(format!("{}: {e}", cert.display())))?;
            let c = Certificate::from_json(&text).map_err(usage)?;
            if !kind.accepts(&c.payload) {
                return Err(usage(format!("certificate holds a {}, not a {kind:?} certificate", c.payload.kind())));
            }
            let v = verify_certificate(&g, &c);
            io.say(if v.valid { "valid" } else { "invalid" });
            io.say(v.detail);
            Ok(if v.valid { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Ep { graph, dtd, family, k } => {
            let g = io.read_graph(&graph)?;
            let text = fs::read_to_string(&dtd).map_err(|e| usage(format!("{}: {e}", dtd.display())))?;
            let d: DirectedTreeDecomposition = match Certificate::from_json(&text) {
                Ok(Certificate { payload: Payload::Dtd(d), .. }) => d,
                _ => serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", dtd.display())))?,
            };
            let pattern = match family.as_str() {
                "cycles" => None,
                f => match f.strip_prefix("pattern:") {
                    Some(p) => Some(io.read_graph(FsPath::new(p))?),
                    None => return Err(usage(format!("unknown family {f}; use cycles or pattern:FILE"))),
                },
            };
            let check = |h: &Digraph| match &pattern {
                None => cycle_member(h),
                Some(p) => pattern_member(p, h),
            };
            let res = erdos_posa(&g, &d, &check, k).map_err(usage)?;
            let names = |s: &BTreeSet<crate::VertexId>| s.iter().map(|v| v.as_str().to_string()).collect::<Vec<_>>();
            let doc = match res {
                PackingOrCover::Packing(ws) => json!({ "packing": ws }),
                PackingOrCover::Cover(c) => json!({ "cover": names(&c) }),
            };
            io.say(serde_json::to_string_pretty(&doc).expect("json"));
            Ok(EXIT_OK)
        }
    }
}
