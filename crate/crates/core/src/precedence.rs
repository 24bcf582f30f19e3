use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::error::PrecedenceError;
use crate::term::Symbol;

/// A finite strict order on symbols, given by generator pairs `f > g` and
/// closed transitively on construction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Precedence {
    generators: Vec<(Symbol, Symbol)>,
    closure: HashSet<(Symbol, Symbol)>,
    below: BTreeMap<Symbol, Vec<Symbol>>,
}

impl Precedence {
    pub fn empty() -> Precedence {
        Precedence::default()
    }

    pub fn new(
        generators: impl IntoIterator<Item = (Symbol, Symbol)>,
    ) -> Result<Precedence, PrecedenceError> {
        let generators: Vec<_> = generators.into_iter().collect();
        let mut succ: BTreeMap<Symbol, BTreeSet<Symbol>> = BTreeMap::new();
        for (f, g) in &generators {
            succ.entry(f.clone()).or_default().insert(g.clone());
        }
        let mut closure = HashSet::new();
        let mut below = BTreeMap::new();
        for start in succ.keys() {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<Symbol> = succ[start].iter().cloned().collect();
            while let Some(s) = stack.pop() {
                if &s == start {
                    return Err(PrecedenceError::Cyclic(start.clone()));
                }
                if seen.insert(s.clone()) {
                    if let Some(next) = succ.get(&s) {
                        stack.extend(next.iter().cloned());
                    }
                }
            }
            for s in &seen {
                closure.insert((start.clone(), s.clone()));
            }
            below.insert(start.clone(), seen.into_iter().collect());
        }
        Ok(Precedence {
            generators,
            closure,
            below,
        })
    }

    /// A chain `f1 > f2 > ... > fn`.
    pub fn chain<S: Into<Symbol>>(symbols: impl IntoIterator<Item = S>) -> Precedence {
        let syms: Vec<Symbol> = symbols.into_iter().map(Into::into).collect();
        let pairs = syms.windows(2).map(|w| (w[0].clone(), w[1].clone()));
        Precedence::new(pairs).expect("a chain of distinct symbols is acyclic")
    }

    /// The natural order on the numeric symbols among `symbols`, with `omega`
    /// above every natural and `bot` below every other symbol.
    pub fn numeric<'a>(symbols: impl IntoIterator<Item = &'a Symbol>) -> Precedence {
        let mut nats: Vec<u64> = Vec::new();
        let (mut omega, mut bot) = (false, false);
        let mut others = Vec::new();
        for s in symbols {
            if let Some(n) = s.as_natural() {
                nats.push(n);
            } else if s == &Symbol::omega() {
                omega = true;
            } else if s == &Symbol::bot() {
                bot = true;
            } else {
                others.push(s.clone());
            }
        }
        nats.sort_unstable();
        nats.dedup();
        let mut chain: Vec<Symbol> = Vec::new();
        if omega {
            chain.push(Symbol::omega());
        }
        chain.extend(nats.iter().rev().map(|&n| Symbol::natural(n)));
        let mut pairs: Vec<(Symbol, Symbol)> = chain
            .windows(2)
            .map(|w| (w[0].clone(), w[1].clone()))
            .collect();
        if bot {
            for s in chain.iter().chain(&others) {
                pairs.push((s.clone(), Symbol::bot()));
            }
        }
        Precedence::new(pairs).expect("numeric chain is acyclic")
    }

    /// Adds `bot` below every symbol in `symbols` (and every symbol already ordered).
    pub fn with_bottom<'a>(&self, symbols: impl IntoIterator<Item = &'a Symbol>) -> Precedence {
        let bot = Symbol::bot();
        let mut all: BTreeSet<Symbol> = symbols.into_iter().cloned().collect();
        for (f, g) in &self.generators {
            all.insert(f.clone());
            all.insert(g.clone());
        }
        all.remove(&bot);
        let mut pairs = self.generators.clone();
        pairs.extend(all.into_iter().map(|s| (s, bot.clone())));
        Precedence::new(pairs).expect("adding a fresh bottom keeps the order acyclic")
    }

    pub fn generators(&self) -> &[(Symbol, Symbol)] {
        &self.generators
    }

    /// `f > g` in the transitive closure.
    pub fn greater(&self, f: &Symbol, g: &Symbol) -> bool {
        self.closure.contains(&(f.clone(), g.clone()))
    }

    /// Reflexive closure: `f = g` or `f > g`.
    pub fn greater_eq(&self, f: &Symbol, g: &Symbol) -> bool {
        f == g || self.greater(f, g)
    }

    /// Every `g` with `f > g`, in symbol order.
    pub fn smaller_than(&self, f: &Symbol) -> &[Symbol] {
        self.below.get(f).map_or(&[], Vec::as_slice)
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.generators
            .iter()
            .flat_map(|(f, g)| [f.clone(), g.clone()])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Symbol {
        Symbol::new(x)
    }

    #[test]
    fn closure_is_transitive_and_irreflexive() {
        let p = Precedence::new([(s("f"), s("g")), (s("g"), s("h"))]).unwrap();
        assert!(p.greater(&s("f"), &s("h")));
        assert!(!p.greater(&s("h"), &s("f")));
        assert!(!p.greater(&s("f"), &s("f")));
        assert!(p.greater_eq(&s("f"), &s("f")));
        assert_eq!(p.smaller_than(&s("f")), &[s("g"), s("h")]);
    }

    #[test]
    fn cycles_are_rejected() {
        assert_eq!(
            Precedence::new([(s("a"), s("b")), (s("b"), s("a"))]),
            Err(PrecedenceError::Cyclic(s("a")))
        );
        assert!(Precedence::new([(s("a"), s("a"))]).is_err());
    }

    #[test]
    fn numeric_order_with_omega_and_bot() {
        let syms = [s("3"), s("10"), s("omega"), s("bot"), s("0")];
        let p = Precedence::numeric(syms.iter());
        assert!(p.greater(&s("10"), &s("3")));
        assert!(p.greater(&s("omega"), &s("10")));
        assert!(p.greater(&s("0"), &s("bot")));
        assert!(!p.greater(&s("3"), &s("10")));
    }

    #[test]
    fn bottom_goes_below_everything() {
        let p = Precedence::chain(["2", "1"]).with_bottom([s("7")].iter());
        assert!(p.greater(&s("1"), &s("bot")));
        assert!(p.greater(&s("7"), &s("bot")));
        assert!(!p.greater(&s("7"), &s("1")));
    }
}
