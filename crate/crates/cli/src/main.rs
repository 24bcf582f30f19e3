//! `termcheck`: termination by simulation, star reductions, embeddings,
//! barrier scans and Hydra battles from the command line.
//!
//! Exit codes: 0 for a positive answer, 2 for a negative or inconclusive
//! one (MAYBE, not found, NO), 1 for errors.

mod battle;
mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "termcheck",
    version,
    about = "Star games, path orders, embeddings and Hydra battles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prove termination of a rewrite system by the path order, with star certificates.
    #[command(alias = "termcheck")]
    Check {
        /// Rules, one `lhs -> rhs` per line.
        #[arg(long)]
        trs: PathBuf,
        /// Precedence, one `f > g` per line.
        #[arg(long)]
        prec: PathBuf,
        /// Also print the certificates as JSON.
        #[arg(long)]
        emit_cert: bool,
    },
    /// Search for a star reduction from S to T.
    Reduce {
        /// Start term.
        s: String,
        /// Target term, reached up to sibling order.
        t: String,
        /// Precedence, one `f > g` per line; empty by default.
        #[arg(long)]
        prec: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Also print the reduction as JSON.
        #[arg(long)]
        emit_cert: bool,
    },
    /// Decide whether S embeds homeomorphically into T.
    Embed {
        /// The smaller tree.
        s: String,
        /// The tree it should embed into.
        t: String,
        /// Label order, one `f > g` per line; defaults to the natural order on numeric labels.
        #[arg(long)]
        order: Option<PathBuf>,
        /// Also print the star reduction from T to S.
        #[arg(long)]
        compile: bool,
    },
    /// Find the first pair i < j with term i embedded in term j in a file of terms.
    Barrier {
        /// One term per line; blank lines and `#` comments are skipped.
        file: PathBuf,
        /// Label order, one `f > g` per line.
        #[arg(long)]
        order: Option<PathBuf>,
    },
    /// Run a Hydra battle.
    Battle(battle::BattleArgs),
    /// Replay and check a battle log.
    Replay {
        /// A JSON-lines log written by `battle --log` or the service.
        log: PathBuf,
        /// Also compile and check a certificate for every move.
        #[arg(long)]
        certify: bool,
    },
    /// Run the battle service.
    Serve {
        /// TCP port; must be nonzero.
        #[arg(long, default_value_t = starpath_service::DEFAULT_PORT.to_string())]
        port: String,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Session table file, restored at start and written on shutdown.
        #[arg(long)]
        snapshot: Option<PathBuf>,
        /// Seconds between snapshot writes.
        #[arg(long, default_value_t = 30)]
        snapshot_interval: u64,
    },
}

#[derive(Args, Clone, Copy)]
struct BudgetArgs {
    /// Longest reduction considered.
    #[arg(long, default_value_t = 64)]
    max_depth: usize,
    /// Largest copy count tried per copy or down step.
    #[arg(long, default_value_t = 3)]
    max_copies: usize,
    /// Size cap on intermediate trees; defaults to |S| + |T| + 8.
    #[arg(long)]
    max_size: Option<usize>,
    /// Trees visited before giving up.
    #[arg(long, default_value_t = 200_000)]
    max_states: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Check {
            trs,
            prec,
            emit_cert,
        } => commands::check(&trs, &prec, emit_cert),
        Command::Reduce {
            s,
            t,
            prec,
            budget,
            emit_cert,
        } => commands::reduce(&s, &t, prec.as_deref(), budget.into(), emit_cert),
        Command::Embed {
            s,
            t,
            order,
            compile,
        } => commands::embed(&s, &t, order.as_deref(), compile),
        Command::Barrier { file, order } => commands::barrier(&file, order.as_deref()),
        Command::Battle(args) => battle::run(&args),
        Command::Replay { log, certify } => battle::replay(&log, certify),
        Command::Serve {
            port,
            host,
            snapshot,
            snapshot_interval,
        } => commands::serve(&host, &port, snapshot, snapshot_interval),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

impl From<BudgetArgs> for starpath::star::Budget {
    fn from(b: BudgetArgs) -> Self {
        starpath::star::Budget {
            max_depth: b.max_depth,
            max_copies: b.max_copies,
            max_size: b.max_size,
            max_states: b.max_states,
        }
    }
}
