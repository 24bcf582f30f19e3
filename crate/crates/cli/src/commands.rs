use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use starpath::embedding::{
    compile_embedding_to_star, embeds, find_embedded_pair, validate_witness,
};
use starpath::star::{certificate_from_mpo, mpo_greater, search_reduction, Budget};
use starpath::{
    parse_precedence, parse_term, parse_trs, tree_equal, validate_trace, Mode, Precedence, Term,
};

use crate::render;

pub const YES: u8 = 0;
pub const NO: u8 = 2;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn precedence(path: Option<&Path>) -> Result<Option<Precedence>> {
    path.map(|p| parse_precedence(&read(p)?).with_context(|| format!("in {}", p.display())))
        .transpose()
}

fn term(text: &str) -> Result<Term> {
    parse_term(text).with_context(|| format!("cannot parse `{text}`"))
}

pub fn check(trs: &Path, prec: &Path, emit_cert: bool) -> Result<u8> {
    let rules = parse_trs(&read(trs)?).with_context(|| format!("in {}", trs.display()))?;
    let prec = precedence(Some(prec))?.expect("path given");
    let mut certs = Vec::new();
    for (i, r) in rules.iter().enumerate() {
        let n = i + 1;
        if !mpo_greater(&r.lhs, &r.rhs, &prec) {
            println!("rule {n}: {} -> {}  not oriented", r.lhs, r.rhs);
            println!("MAYBE");
            return Ok(NO);
        }
        let cert = certificate_from_mpo(&r.lhs, &r.rhs, &prec)?;
        validate_trace(&cert, &prec, Mode::Star).context("certificate failed its self-check")?;
        println!(
            "rule {n}: {} -> {}  certificate of {} steps",
            r.lhs,
            r.rhs,
            cert.len()
        );
        print!("{}", render::trace(&cert, &prec, Mode::Star));
        certs.push(serde_json::json!({ "lhs": r.lhs.to_string(), "rhs": r.rhs.to_string(), "certificate": cert }));
    }
    println!("TERMINATING");
    if emit_cert {
        println!("{}", serde_json::to_string_pretty(&certs)?);
    }
    Ok(YES)
}

pub fn reduce(
    s: &str,
    t: &str,
    prec: Option<&Path>,
    budget: Budget,
    emit_cert: bool,
) -> Result<u8> {
    let (s, t) = (term(s)?, term(t)?);
    if !s.is_unmarked() || !t.is_unmarked() {
        bail!("both terms must be unmarked");
    }
    let prec = precedence(prec)?.unwrap_or_else(Precedence::empty);
    match search_reduction(&s, &t, &prec, budget) {
        Ok(tr) => {
            validate_trace(&tr, &prec, Mode::Star).context("trace failed its self-check")?;
            println!("FOUND: {} steps", tr.len());
            print!("{}", render::trace(&tr, &prec, Mode::Star));
            if emit_cert {
                println!("{}", serde_json::to_string_pretty(&tr)?);
            }
            Ok(YES)
        }
        Err(e) => {
            println!("NOT FOUND: {e}");
            Ok(NO)
        }
    }
}

/// The order from `path`, or the natural order on the numeric labels of `ts`.
fn label_order(path: Option<&Path>, ts: &[&Term]) -> Result<Precedence> {
    Ok(match precedence(path)? {
        Some(p) => p,
        None => Precedence::numeric(&ts.iter().flat_map(|t| t.symbols()).collect::<Vec<_>>()),
    })
}

pub fn embed(s: &str, t: &str, order: Option<&Path>, compile: bool) -> Result<u8> {
    let (s, t) = (term(s)?, term(t)?);
    let order = label_order(order, &[&s, &t])?;
    let Some(w) = embeds(&s, &t, &order) else {
        println!("NO");
        return Ok(NO);
    };
    validate_witness(&s, &t, &w, &order).map_err(anyhow::Error::msg)?;
    println!("YES");
    print!("{}", render::mapping(&w));
    if compile {
        let tr = compile_embedding_to_star(&s, &t, &w, &order)?;
        if !tree_equal(&tr.end, &s) {
            bail!("compiled reduction ends at {} instead of {s}", tr.end);
        }
        println!("star reduction of {} steps", tr.len());
        print!("{}", render::trace(&tr, &order, Mode::Star));
    }
    Ok(YES)
}

pub fn barrier(file: &Path, order: Option<&Path>) -> Result<u8> {
    let text = read(file)?;
    let seq: Vec<Term> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(term)
        .collect::<Result<_>>()?;
    let refs: Vec<&Term> = seq.iter().collect();
    let order = label_order(order, &refs)?;
    match find_embedded_pair(&seq, &order) {
        Some((i, j)) => {
            println!(
                "embedded pair: term {} = {} embeds into term {} = {}",
                i + 1,
                seq[i],
                j + 1,
                seq[j]
            );
            Ok(YES)
        }
        None => {
            println!("no embedded pair among {} terms", seq.len());
            Ok(NO)
        }
    }
}

pub fn serve(host: &str, port: &str, snapshot: Option<PathBuf>, interval: u64) -> Result<u8> {
    let port: u16 = port
        .parse()
        .ok()
        .filter(|&p| p != 0)
        .with_context(|| format!("invalid port `{port}`"))?;
    let addr = format!("{host}:{port}")
        .parse()
        .with_context(|| format!("invalid address {host}:{port}"))?;
    let cfg = starpath_service::ServeConfig {
        addr,
        snapshot,
        snapshot_interval: Duration::from_secs(interval.max(1)),
    };
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(starpath_service::serve(cfg))?;
    Ok(YES)
}
