//! Reproducible choices for both players.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sh::{apply_sh_move, underlined, ShChop, ShMove};
use super::{available_heads, HeadDescriptor, HydraState};
use crate::term::{Position, Symbol, Term};

/// How the Hydra picks its numeric parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PolicyKind {
    FixedK { k: usize },
    UniformRandom { max: usize, seed: u64 },
    AdversarialGreedy { max: usize },
}

/// How regrown labels below a chopped `α` are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaRule {
    /// Every label is `α - 1`.
    #[default]
    Predecessor,
    /// Each label uniform in `0..α`.
    Uniform,
}

/// Bounds on the Star Hydra's response after a chop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShResponsePolicy {
    pub max_widen: usize,
    pub max_lengthen: usize,
    pub betas: BetaRule,
}

impl Default for ShResponsePolicy {
    fn default() -> Self {
        ShResponsePolicy {
            max_widen: 1,
            max_lengthen: 1,
            betas: BetaRule::Predecessor,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HydraPolicy {
    pub kind: PolicyKind,
    #[serde(default)]
    pub sh: ShResponsePolicy,
}

impl HydraPolicy {
    pub fn fixed(k: usize) -> HydraPolicy {
        HydraPolicy {
            kind: PolicyKind::FixedK { k },
            sh: ShResponsePolicy::default(),
        }
    }

    /// Parses `fixed:K`, `random:MAX` or `greedy:MAX`.
    pub fn parse(text: &str, seed: u64) -> Result<HydraPolicy, String> {
        let (name, arg) = text
            .split_once(':')
            .ok_or_else(|| format!("policy `{text}` needs the form name:N"))?;
        let n: usize = arg
            .parse()
            .map_err(|_| format!("policy argument `{arg}` is not a natural"))?;
        let kind = match name {
            "fixed" => PolicyKind::FixedK { k: n },
            "random" => PolicyKind::UniformRandom { max: n, seed },
            "greedy" => PolicyKind::AdversarialGreedy { max: n },
            other => {
                return Err(format!(
                    "unknown hydra policy `{other}` (fixed, random, greedy)"
                ))
            }
        };
        Ok(HydraPolicy {
            kind,
            sh: ShResponsePolicy::default(),
        })
    }

    fn seed(&self) -> u64 {
        match self.kind {
            PolicyKind::UniformRandom { seed, .. } => seed,
            _ => 0,
        }
    }

    /// The generator used for the move at `step`; independent of history
    /// so that undo and replay reproduce the same choices.
    pub fn rng_for(&self, step: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed() ^ step.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    /// A replication count or relabelling.
    pub fn choose_k(&self, rng: &mut ChaCha8Rng) -> usize {
        match self.kind {
            PolicyKind::FixedK { k } => k,
            PolicyKind::UniformRandom { max, .. } => rng.gen_range(0..=max),
            PolicyKind::AdversarialGreedy { max } => max,
        }
    }

    /// Regrown labels for a chopped leaf labelled `alpha`.
    pub fn choose_betas(&self, alpha: &Symbol, rng: &mut ChaCha8Rng) -> Vec<Symbol> {
        let Some(a) = alpha.as_natural().filter(|&a| a > 0) else {
            return Vec::new();
        };
        let k = self.choose_k(rng);
        (0..k)
            .map(|_| match self.sh.betas {
                BetaRule::Predecessor => Symbol::natural(a - 1),
                BetaRule::Uniform => Symbol::natural(rng.gen_range(0..a)),
            })
            .collect()
    }

    /// A widen/lengthen program for the underlined tree `t`, within the
    /// bounds of `self.sh`.
    pub fn choose_response(&self, t: &Term, rng: &mut ChaCha8Rng) -> Vec<ShMove> {
        let (widens, lengthens) = match self.kind {
            PolicyKind::UniformRandom { .. } => (
                rng.gen_range(0..=self.sh.max_widen),
                rng.gen_range(0..=self.sh.max_lengthen),
            ),
            _ => (self.sh.max_widen, self.sh.max_lengthen),
        };
        let mut plan: Vec<bool> = std::iter::repeat_n(true, lengthens)
            .chain(std::iter::repeat_n(false, widens))
            .collect();
        if matches!(self.kind, PolicyKind::UniformRandom { .. }) {
            plan.shuffle(rng);
        }
        let mut cur = t.clone();
        let mut out = Vec::new();
        for lengthen in plan {
            let m = if lengthen {
                self.lengthen_move(&cur, rng)
            } else {
                self.widen_move(&cur, rng)
            };
            let Some(m) = m else { continue };
            cur = apply_sh_move(&cur, &m).expect("policy moves respect the side conditions");
            out.push(m);
        }
        out
    }

    fn lengthen_move(&self, t: &Term, rng: &mut ChaCha8Rng) -> Option<ShMove> {
        let sites: Vec<(Position, u64)> = underlined(t)
            .into_iter()
            .filter_map(|p| {
                let n = t.subterm_at(&p).ok()?.symbol()?.as_natural()?;
                (n > 0).then_some((p, n))
            })
            .collect();
        let (p, n) = match self.kind {
            PolicyKind::UniformRandom { .. } => sites.choose(rng)?.clone(),
            _ => sites.first()?.clone(),
        };
        let label = match (self.kind, self.sh.betas) {
            (PolicyKind::UniformRandom { .. }, _) | (_, BetaRule::Uniform) => rng.gen_range(0..n),
            _ => n - 1,
        };
        Some(ShMove::Lengthen {
            position: p,
            label: Symbol::natural(label),
        })
    }

    fn widen_move(&self, t: &Term, rng: &mut ChaCha8Rng) -> Option<ShMove> {
        let sites: Vec<(Position, usize)> = underlined(t)
            .into_iter()
            .filter_map(|p| {
                let s = t.subterm_at(&p).ok()?;
                let c = s
                    .children()
                    .iter()
                    .position(|c| c.marker() == crate::term::Marker::Underline)?;
                Some((p, c + 1))
            })
            .collect();
        let (position, child) = match self.kind {
            PolicyKind::UniformRandom { .. } => sites.choose(rng)?.clone(),
            // The deepest site widens the most recently regrown part.
            _ => sites.last()?.clone(),
        };
        Some(ShMove::Widen {
            position,
            child,
            count: self.choose_k(rng),
        })
    }

    /// The full Star Hydra choice for chopping the leaf at `leaf`.
    pub(crate) fn choose_chop(
        &self,
        tree: &Term,
        leaf: &Position,
        rng: &mut ChaCha8Rng,
    ) -> Option<ShChop> {
        let alpha = tree.subterm_at(leaf).ok()?.symbol()?.clone();
        ShChop::at_leaf(leaf, self.choose_betas(&alpha, rng))
    }
}

/// How Hercules picks the next head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HerculesPolicy {
    /// The head reached by always descending into the first child.
    Leftmost,
    /// The head reached by always descending into the last child.
    Rightmost,
    Random {
        seed: u64,
    },
}

impl HerculesPolicy {
    pub fn parse(text: &str, seed: u64) -> Result<HerculesPolicy, String> {
        match text {
            "leftmost" => Ok(HerculesPolicy::Leftmost),
            "rightmost" => Ok(HerculesPolicy::Rightmost),
            "random" => Ok(HerculesPolicy::Random { seed }),
            other => Err(format!(
                "unknown hercules policy `{other}` (leftmost, rightmost, random)"
            )),
        }
    }

    pub fn choose(&self, state: &HydraState) -> Option<HeadDescriptor> {
        let heads = available_heads(state);
        match self {
            HerculesPolicy::Leftmost => heads.into_iter().next(),
            HerculesPolicy::Rightmost => {
                let mut p = Position::root();
                let mut t = &state.tree;
                while !t.children().is_empty() {
                    p = p.child(t.children().len());
                    t = t.children().last().expect("nonempty");
                }
                heads.into_iter().find(|h| h.position == p)
            }
            HerculesPolicy::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    seed ^ state.steps.wrapping_mul(0xA24B_AED4_963E_E407),
                );
                heads.choose(&mut rng).cloned()
            }
        }
    }
}
