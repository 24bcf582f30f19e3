//! The `battle` and `replay` commands.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use starpath::hydra::{
    apply_move, available_heads, choose_params, compile_move, record, records_to_json_lines,
    replay_log, sh_precedence, HeadRule, HerculesPolicy, HydraParams, HydraPolicy, HydraState,
    Limits, MoveRecord, PhaseLog, Variant,
};
use starpath::{parse_term, tree_equal, validate_trace, Mode, Position, Precedence};

#[derive(Args)]
pub struct BattleArgs {
    /// kp, bh or sh.
    #[arg(long = "type")]
    variant: Variant,
    /// Initial tree, e.g. `dagger(0(0,0))`.
    #[arg(long)]
    initial: String,
    /// leftmost, rightmost or random.
    #[arg(long, default_value = "leftmost")]
    hercules: String,
    /// fixed:K, random:MAX or greedy:MAX.
    #[arg(long, default_value = "fixed:2")]
    hydra: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = Limits::default().max_steps)]
    max_steps: u64,
    #[arg(long, default_value_t = Limits::default().max_nodes)]
    max_nodes: usize,
    /// Write the battle log as JSON lines.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Compile and check a star certificate for every move.
    #[arg(long)]
    certify: bool,
    /// Pick heads from standard input.
    #[arg(long)]
    interactive: bool,
}

pub fn run(args: &BattleArgs) -> Result<u8> {
    let initial =
        parse_term(&args.initial).with_context(|| format!("cannot parse `{}`", args.initial))?;
    let mut state = HydraState::new(args.variant, initial)?;
    let hercules = HerculesPolicy::parse(&args.hercules, args.seed).map_err(anyhow::Error::msg)?;
    let hydra = HydraPolicy::parse(&args.hydra, args.seed).map_err(anyhow::Error::msg)?;
    let stdin = std::io::stdin();
    let mut input = stdin.lock();
    let mut records = Vec::new();
    println!("start: {}", state.tree);
    let verdict = loop {
        if state.slain {
            break format!("SLAIN after {} steps", state.steps);
        }
        if state.steps >= args.max_steps {
            break format!("TRUNCATED at max-steps after {} steps", state.steps);
        }
        if state.tree.size() > args.max_nodes {
            break format!("TRUNCATED at max-nodes after {} steps", state.steps);
        }
        let head = if args.interactive {
            match prompt(&state, &mut input)? {
                Some(h) => h,
                None => break format!("STOPPED after {} steps", state.steps),
            }
        } else {
            hercules
                .choose(&state)
                .context("a living hydra has a head")?
                .position
        };
        let params = choose_params(&state, &head, &hydra)?;
        let (next, log) = apply_move(&state, &head, &params)?;
        let rec = record(&state, &next, &head, params, log);
        print_move(&state, &next, &rec)?;
        if args.certify {
            certify(&state, &next, &rec)?;
        }
        records.push(rec);
        state = next;
    };
    println!("{verdict}");
    if let Some(path) = &args.log {
        std::fs::write(path, records_to_json_lines(&records))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(0)
}

/// Lists the heads and reads a choice; `None` on `q` or end of input.
fn prompt(state: &HydraState, input: &mut impl BufRead) -> Result<Option<Position>> {
    let heads = available_heads(state);
    loop {
        println!("tree: {}", state.tree);
        for (i, h) in heads.iter().enumerate() {
            println!("  [{}] {} ({:?})", i + 1, h.position, h.rule);
        }
        print!("head (1-{}, q to stop)> ", heads.len());
        std::io::stdout().flush()?;
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 || line.trim() == "q" {
            return Ok(None);
        }
        match line.trim().parse::<usize>() {
            Ok(i) if (1..=heads.len()).contains(&i) => {
                return Ok(Some(heads[i - 1].position.clone()))
            }
            _ => println!("not a head: `{}`", line.trim()),
        }
    }
}

fn describe(params: &HydraParams) -> String {
    let mut parts = Vec::new();
    if let Some(k) = params.k {
        parts.push(format!("k={k}"));
    }
    if let Some(b) = &params.betas {
        let b: Vec<String> = b.iter().map(|s| s.to_string()).collect();
        parts.push(format!("betas=[{}]", b.join(",")));
    }
    if let Some(r) = &params.response {
        parts.push(format!("response={}", r.len()));
    }
    if parts.is_empty() {
        String::new()
    } else {
        format!(" ({})", parts.join(", "))
    }
}

fn print_move(pre: &HydraState, next: &HydraState, rec: &MoveRecord) -> Result<()> {
    let m = &rec.player_move;
    let rule = serde_json::to_value(m.rule)?;
    println!(
        "step {}: {} at {}{} -> {}  [{} nodes]",
        rec.step,
        rule.as_str().unwrap_or("?"),
        m.head,
        describe(&rec.hydra_params),
        next.tree,
        rec.node_count
    );
    if m.rule == HeadRule::Bh2 {
        println!("  regrown: {}", next.tree.subterm_at(&m.head)?);
    }
    if let Some(log) = &rec.phase_log {
        for (phase, t) in log.phases(&pre.tree)? {
            println!("  {phase:<10} {t}");
        }
    }
    Ok(())
}

fn certify(pre: &HydraState, next: &HydraState, rec: &MoveRecord) -> Result<()> {
    let Some(cert) = compile_move(
        pre,
        &rec.player_move.head,
        &rec.hydra_params,
        rec.phase_log.as_ref(),
    ) else {
        println!("  no certificate: Buchholz moves have no star simulation");
        return Ok(());
    };
    let cert = cert?;
    let prec = precedence_for(pre, rec.phase_log.as_ref());
    validate_trace(&cert, &prec, Mode::Star).context("certificate failed its self-check")?;
    if !tree_equal(&cert.end, &next.tree) {
        bail!("certificate ends at {} instead of {}", cert.end, next.tree);
    }
    println!("  certificate: {} star steps, valid", cert.len());
    Ok(())
}

fn precedence_for(pre: &HydraState, log: Option<&PhaseLog>) -> Precedence {
    match log {
        Some(l) => sh_precedence(&pre.tree, l),
        None => Precedence::empty(),
    }
}

pub fn replay(path: &Path, certify_moves: bool) -> Result<u8> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let records: Vec<MoveRecord> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("line {}", i + 1)))
        .collect::<Result<_>>()?;
    let last = replay_log(&records)?;
    if certify_moves {
        let first = records.first().expect("replay checked nonempty");
        let tree = parse_term(first.initial.as_deref().expect("replay checked"))?;
        let mut state = HydraState::new(first.variant, tree)?;
        for r in &records {
            let (next, log) = apply_move(&state, &r.player_move.head, &r.hydra_params)?;
            let r = MoveRecord {
                phase_log: log,
                ..r.clone()
            };
            certify(&state, &next, &r)?;
            state = next;
        }
    }
    println!("replayed {} moves", records.len());
    println!("final: {}", last.tree);
    println!("{}", if last.slain { "SLAIN" } else { "ALIVE" });
    Ok(0)
}
