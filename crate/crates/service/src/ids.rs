//! Node ids that survive a move for nodes the move leaves in place.

use serde::{Deserialize, Serialize};
use starpath::{Marker, Position, Term};
use std::collections::HashMap;

/// Ids of a tree's nodes in preorder.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeIds {
    pub ids: Vec<u64>,
    /// The next unused id.
    pub next: u64,
}

impl NodeIds {
    pub fn fresh(t: &Term) -> NodeIds {
        let n = t.size() as u64;
        NodeIds {
            ids: (0..n).collect(),
            next: n,
        }
    }

    /// Ids for `post`, reusing the id of the node at the same position of
    /// `pre` when it carries the same label.
    pub fn diff(&self, pre: &Term, post: &Term) -> NodeIds {
        let old: HashMap<Position, (u64, Option<&starpath::Symbol>)> = pre
            .positions()
            .into_iter()
            .zip(&self.ids)
            .map(|(p, &id)| {
                let label = pre.subterm_at(&p).expect("own position").symbol();
                (p, (id, label))
            })
            .collect();
        let mut next = self.next;
        let ids = post
            .positions()
            .into_iter()
            .map(|p| match old.get(&p) {
                Some(&(id, label))
                    if label == post.subterm_at(&p).expect("own position").symbol() =>
                {
                    id
                }
                _ => {
                    next += 1;
                    next - 1
                }
            })
            .collect();
        NodeIds { ids, next }
    }

    pub fn position_of(&self, t: &Term, id: u64) -> Option<Position> {
        let i = self.ids.iter().position(|&x| x == id)?;
        t.positions().into_iter().nth(i)
    }

    pub fn id_of(&self, t: &Term, p: &Position) -> Option<u64> {
        let i = t.positions().iter().position(|q| q == p)?;
        self.ids.get(i).copied()
    }
}

/// A tree with node ids, as served to clients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeView {
    pub id: u64,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marker: Option<String>,
    pub children: Vec<NodeView>,
}

impl NodeView {
    pub fn build(t: &Term, ids: &NodeIds) -> NodeView {
        let mut it = ids.ids.iter().copied();
        build(t, &mut it)
    }
}

fn build(t: &Term, ids: &mut impl Iterator<Item = u64>) -> NodeView {
    let id = ids.next().expect("one id per node");
    let marker = match t.marker() {
        Marker::None => None,
        Marker::Star => Some("star".to_string()),
        Marker::Energy(n) => Some(format!("energy:{n}")),
        Marker::Underline => Some("underline".to_string()),
    };
    NodeView {
        id,
        label: t
            .symbol()
            .map(|s| s.to_string())
            .unwrap_or_else(|| t.to_string()),
        marker,
        children: t.children().iter().map(|c| build(c, ids)).collect(),
    }
}
