use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use ccslm::coherence::check_lts;
use ccslm::lts::{explore, explore_from, ExploreOptions};
use ccslm::session::Session;
use ccslm::wire::{coherence_doc, lts_doc, outgoing_docs};
use ccslm::{CongruenceConfig, Program, ProcessTerm, Semantics, Tristate, Verdict};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::{confluence_doc, exit, reduce_doc, BisimDoc};

#[derive(Debug, Parser)]
#[command(name = "ccslm", version, about = "Explore and check single-clock CCS with priority guards")]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Dot,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Cong {
    Strong,
    Weak,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Labels {
    Action,
    Full,
}

#[derive(Debug, clap::Args)]
pub struct Bound {
    /// Maximum number of states to explore.
    #[arg(long, env = "CCSLM_BOUND", default_value_t = ccslm::DEFAULT_BOUND)]
    pub bound: usize,
}

#[derive(Debug, clap::Args)]
pub struct CongArgs {
    #[arg(long, value_enum, default_value = "strong")]
    pub cong: Cong,
    #[arg(long, value_enum, default_value = "action")]
    pub labels: Labels,
}

impl CongArgs {
    fn config(&self) -> Result<CongruenceConfig, String> {
        let cong = match self.cong {
            Cong::Strong => "strong",
            Cong::Weak => "weak",
        };
        let labels = match self.labels {
            Labels::Action => "action",
            Labels::Full => "full",
        };
        crate::congruence(Some(cong), Some(labels))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and check well-formedness.
    Check {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Export the reachable state space.
    Lts {
        file: PathBuf,
        #[command(flatten)]
        bound: Bound,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
    },
    /// Step through transitions interactively (`u` undoes, `q` quits).
    Step {
        file: PathBuf,
        /// List transitions as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Check observability and the Diamond Property on every reachable state.
    Coherence {
        file: PathBuf,
        #[command(flatten)]
        bound: Bound,
        #[command(flatten)]
        cong: CongArgs,
        #[arg(long)]
        json: bool,
    },
    /// Milner determinacy and confluence.
    Confluence {
        file: PathBuf,
        #[command(flatten)]
        bound: Bound,
        #[command(flatten)]
        cong: CongArgs,
        #[arg(long)]
        json: bool,
    },
    /// Normal forms reachable by silent steps, and whether they agree.
    Reduce {
        file: PathBuf,
        #[command(flatten)]
        bound: Bound,
        #[command(flatten)]
        cong: CongArgs,
        #[arg(long)]
        json: bool,
    },
    /// Compare two defined processes.
    Bisim {
        file: PathBuf,
        name1: String,
        name2: String,
        #[command(flatten)]
        bound: Bound,
        #[command(flatten)]
        cong: CongArgs,
        #[arg(long)]
        json: bool,
    },
    /// Serve the HTTP/JSON API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Program to preload.
        file: Option<PathBuf>,
    },
}

/// Where the output of one invocation goes.
pub struct Io<'a> {
    pub input: &'a mut dyn BufRead,
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

fn load(path: &Path, err: &mut dyn Write) -> Result<Program, i32> {
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", path.display());
            return Err(exit::USAGE);
        }
    };
    ccslm::load(&src).map_err(|e| {
        if e.diagnostics().is_empty() {
            let _ = writeln!(err, "{}: {e}", path.display());
        }
        for d in e.diagnostics() {
            let _ = writeln!(err, "{}:{d}", path.display());
        }
        exit::USAGE
    })
}

fn print_json(out: &mut dyn Write, v: &impl Serialize) {
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(v).expect("documents serialize"));
}

fn tristate_code(t: Tristate) -> i32 {
    match t {
        Tristate::Yes => exit::OK,
        Tristate::No => exit::FAILS,
        Tristate::Inconclusive => exit::INCONCLUSIVE,
    }
}

/// Runs one parsed command; returns the exit code.
pub fn run(args: Args, io: Io<'_>) -> i32 {
    match execute(args.command, io.input, io.out, io.err) {
        Ok(code) | Err(code) => code,
    }
}

fn usage(err: &mut dyn Write, msg: impl std::fmt::Display) -> i32 {
    let _ = writeln!(err, "error: {msg}");
    exit::USAGE
}

fn execute(cmd: Command, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, i32> {
    match cmd {
        Command::Check { file, json } => {
            let prog = load(&file, err)?;
            if json {
                print_json(out, &serde_json::json!({ "ok": true, "definitions": prog.defs.len() }));
            } else {
                let _ = writeln!(out, "{}: ok ({} definitions)", file.display(), prog.defs.len());
            }
            Ok(exit::OK)
        }
        Command::Lts { file, bound, format } => {
            let prog = load(&file, err)?;
            let lts = explore(&prog, bound.bound).map_err(|e| usage(err, e))?;
            match format {
                Format::Dot => {
                    let _ = write!(out, "{}", lts.to_dot());
                }
                Format::Json => print_json(out, &lts_doc(&lts)),
            }
            if lts.complete {
                Ok(exit::OK)
            } else {
                let _ = writeln!(err, "warning: state bound {} reached; the LTS is partial", bound.bound);
                Ok(exit::INCONCLUSIVE)
            }
        }
        Command::Step { file, json } => {
            let prog = load(&file, err)?;
            let session = Session::new(&prog).map_err(|e| usage(err, e))?;
            stepper(session, json, input, out).map_err(|e| usage(err, e))?;
            Ok(exit::OK)
        }
        Command::Coherence { file, bound, cong, json } => {
            let cfg = cong.config().map_err(|e| usage(err, e))?;
            let prog = load(&file, err)?;
            let lts = explore(&prog, bound.bound).map_err(|e| usage(err, e))?;
            let report = check_lts(&lts, cfg).map_err(|e| usage(err, e))?;
            if json {
                print_json(out, &coherence_doc(&report));
            } else {
                let _ = writeln!(out, "{:?} ({} states checked)", report.verdict, report.states_checked);
                for v in &report.violations {
                    let _ = writeln!(out, "  state {} [{:?}]: {}", v.state, v.kind, v.detail);
                    let _ = writeln!(out, "    at {}", lts.states[v.state]);
                }
            }
            Ok(match report.verdict {
                Verdict::Coherent => exit::OK,
                Verdict::Incoherent => exit::FAILS,
                Verdict::Inconclusive => exit::INCONCLUSIVE,
            })
        }
        Command::Confluence { file, bound, cong, json } => {
            let cfg = cong.config().map_err(|e| usage(err, e))?;
            let prog = load(&file, err)?;
            let lts = explore(&prog, bound.bound).map_err(|e| usage(err, e))?;
            let doc = confluence_doc(&lts, cfg).map_err(|e| usage(err, e))?;
            if json {
                print_json(out, &doc);
            } else {
                let _ = writeln!(out, "determinate: {:?}\nconfluent: {:?}", doc.determinate, doc.confluent);
            }
            Ok(tristate_code(doc.confluent))
        }
        Command::Reduce { file, bound, cong, json } => {
            let cfg = cong.config().map_err(|e| usage(err, e))?;
            let prog = load(&file, err)?;
            let lts = explore(&prog, bound.bound).map_err(|e| usage(err, e))?;
            let doc = reduce_doc(&lts, cfg).map_err(|e| usage(err, e))?;
            if json {
                print_json(out, &doc);
            } else {
                for nf in &doc.normal_forms {
                    let _ = writeln!(out, "{}: {}", nf.id, nf.term);
                }
                let _ = writeln!(out, "unique: {:?}", doc.unique_modulo_cong);
            }
            Ok(tristate_code(doc.unique_modulo_cong))
        }
        Command::Bisim {
            file,
            name1,
            name2,
            bound,
            cong,
            json,
        } => {
            let cfg = cong.config().map_err(|e| usage(err, e))?;
            let prog = load(&file, err)?;
            for n in [&name1, &name2] {
                if prog.def(n).is_none() {
                    return Err(usage(err, format!("process `{n}` is not defined")));
                }
            }
            let sem = Semantics::new(&prog).map_err(|e| usage(err, e))?;
            let roots = [ProcessTerm::name(&name1), ProcessTerm::name(&name2)];
            let lts = explore_from(&sem, &roots, ExploreOptions { bound: bound.bound, workers: None })
                .map_err(|e| usage(err, e))?;
            let (Some(a), Some(b)) = (lts.state_of(&roots[0]), lts.state_of(&roots[1])) else {
                return Err(usage(err, "bound too small to hold both processes"));
            };
            let verdict = ccslm::equivalence::congruent(&lts, a, b, cfg).map_err(|e| usage(err, e))?;
            let doc = BisimDoc {
                left: name1,
                right: name2,
                config: cfg,
                congruent: verdict,
            };
            if json {
                print_json(out, &doc);
            } else {
                let _ = writeln!(out, "{} ~ {}: {:?}", doc.left, doc.right, doc.congruent);
            }
            Ok(tristate_code(verdict))
        }
        Command::Serve { port, file } => {
            let preload = match file {
                Some(f) => Some(std::fs::read_to_string(&f).map_err(|e| usage(err, format!("{}: {e}", f.display())))?),
                None => None,
            };
            let rt = tokio::runtime::Runtime::new().map_err(|e| usage(err, e))?;
            rt.block_on(crate::server::serve(port, preload)).map_err(|e| usage(err, e))?;
            Ok(exit::OK)
        }
    }
}

fn stepper(mut session: Session, json: bool, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), ccslm::Error> {
    let mut line = String::new();
    loop {
        let s = session.cursor();
        session.transitions(s)?;
        let lts = session.graph_so_far();
        if json {
            let _ = writeln!(out, "{}", serde_json::to_string(&outgoing_docs(&lts, s)).expect("documents serialize"));
        } else {
            let _ = writeln!(out, "state {s}: {}", lts.states[s]);
            let docs = outgoing_docs(&lts, s);
            if docs.is_empty() {
                let _ = writeln!(out, "  (no transitions)");
            }
            for (i, t) in lts.outgoing(s).enumerate() {
                let _ = writeln!(out, "  [{i}] {} -> {}: {}", t.label, t.target, lts.states[t.target]);
            }
            let _ = write!(out, "> ");
        }
        let _ = out.flush();
        line.clear();
        if input.read_line(&mut line).unwrap_or(0) == 0 {
            return Ok(());
        }
        match line.trim() {
            "q" | "quit" => return Ok(()),
            "u" | "undo" => {
                if session.undo().is_none() {
                    let _ = writeln!(out, "nothing to undo");
                }
            }
            "" => {}
            choice => match choice.parse::<usize>() {
                Ok(i) => {
                    if let Err(e) = session.step(s, i) {
                        let _ = writeln!(out, "{e}");
                    }
                }
                Err(_) => {
                    let _ = writeln!(out, "enter a transition number, `u` or `q`");
                }
            },
        }
    }
}
