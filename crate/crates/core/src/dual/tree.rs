use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::process::{drive, Dynamics};
use super::{DualMarkSource, DualStats, FlagEvent, FlagSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_bool(v: bool) -> Sign {
        if v {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn is_plus(self) -> bool {
        self == Sign::Plus
    }

    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeLabel {
    /// Flag label (determination trees).
    Flag(u32),
    /// Unlabeled internal vertex (sampled trees).
    Star,
    Leaf(Sign),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub label: NodeLabel,
    pub children: Vec<usize>,
}

/// Rooted labeled tree stored as an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterminationTree {
    pub nodes: Vec<Node>,
}

impl DeterminationTree {
    pub fn with_root(label: NodeLabel) -> Self {
        DeterminationTree {
            nodes: vec![Node {
                label,
                children: Vec::new(),
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn add_child(&mut self, parent: usize, label: NodeLabel) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            label,
            children: Vec::new(),
        });
        self.nodes[parent].children.push(id);
        id
    }

    /// Vertices with two children.
    pub fn branch_count(&self) -> usize {
        self.nodes.iter().filter(|v| v.children.len() == 2).count()
    }

    /// Check the three structural properties: leaves carry exactly the `±`
    /// labels, every vertex has at most two children, and leaves are exactly
    /// the only children.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::MalformedTree(msg));
        if self.nodes.is_empty() {
            return bad("empty tree".into());
        }
        if self.nodes[0].children.is_empty() {
            return bad("root has no children".into());
        }
        let mut parent = vec![usize::MAX; self.nodes.len()];
        for (i, v) in self.nodes.iter().enumerate() {
            if v.children.len() > 2 {
                return bad(format!("vertex {i} has {} children", v.children.len()));
            }
            let is_leaf = v.children.is_empty();
            if is_leaf != matches!(v.label, NodeLabel::Leaf(_)) {
                return bad(format!("vertex {i}: leaf status and ± label disagree"));
            }
            for &c in &v.children {
                if c >= self.nodes.len() || c == 0 || parent[c] != usize::MAX {
                    return bad(format!("vertex {c} is not a proper child of {i}"));
                }
                parent[c] = i;
            }
        }
        for (i, v) in self.nodes.iter().enumerate().skip(1) {
            if parent[i] == usize::MAX {
                return bad(format!("vertex {i} is unreachable"));
            }
            let only_child = self.nodes[parent[i]].children.len() == 1;
            if v.children.is_empty() != only_child {
                return bad(format!("vertex {i}: leaves must be exactly the only children"));
            }
        }
        Ok(())
    }

    /// The root's value after solving: an only child passes its sign up, and
    /// a vertex with children `(v1, v2)` gets `+` if `v2` is `+`, else the
    /// sign of `v1`.
    pub fn solve(&self) -> Result<Sign> {
        self.validate()?;
        Ok(self.solve_unchecked())
    }

    fn solve_unchecked(&self) -> Sign {
        let mut value: Vec<Option<Sign>> = vec![None; self.nodes.len()];
        let mut stack = vec![0usize];
        while let Some(&v) = stack.last() {
            let node = &self.nodes[v];
            if let NodeLabel::Leaf(s) = node.label {
                value[v] = Some(s);
                stack.pop();
                continue;
            }
            let pending: Vec<usize> = node.children.iter().copied().filter(|&c| value[c].is_none()).collect();
            if pending.is_empty() {
                value[v] = Some(match node.children[..] {
                    [c] => value[c].unwrap(),
                    [c1, c2] => {
                        if value[c2].unwrap().is_plus() {
                            Sign::Plus
                        } else {
                            value[c1].unwrap()
                        }
                    }
                    _ => unreachable!("validated"),
                });
                stack.pop();
            } else {
                stack.extend(pending);
            }
        }
        value[0].unwrap()
    }

    /// Nested-parenthesis form keeping shape, child order and leaf signs:
    /// a leaf is `+` or `-`, any other vertex `(` children `)`.
    pub fn canonical(&self) -> String {
        fn rec(t: &DeterminationTree, v: usize, out: &mut String) {
            match t.nodes[v].label {
                NodeLabel::Leaf(s) => out.push(s.symbol()),
                _ => {
                    out.push('(');
                    for &c in &t.nodes[v].children {
                        rec(t, c, out);
                    }
                    out.push(')');
                }
            }
        }
        let mut s = String::new();
        rec(self, 0, &mut s);
        s
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph tree {\n");
        for (i, v) in self.nodes.iter().enumerate() {
            let label = match v.label {
                NodeLabel::Flag(k) => k.to_string(),
                NodeLabel::Star => "*".into(),
                NodeLabel::Leaf(sg) => sg.symbol().to_string(),
            };
            let _ = writeln!(s, "  n{i} [label=\"{label}\"];");
        }
        for (i, v) in self.nodes.iter().enumerate() {
            for &c in &v.children {
                let _ = writeln!(s, "  n{i} -> n{c};");
            }
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeOutcome {
    Tree(DeterminationTree),
    /// A copy mark fired with both boundary sites of one side flagged.
    Failed,
    /// The node budget was exhausted.
    Overflow,
}

#[derive(Debug, Clone)]
pub struct TreeRun {
    pub outcome: TreeOutcome,
    pub stats: DualStats,
}

/// Run the branching flag process from `{x}` up to `t_horizon` and record
/// its determination tree. Flags alive at the horizon are closed with the
/// sign `initial(site)` of their position.
pub fn build_determination_tree(
    x: usize,
    n: usize,
    source: &mut impl DualMarkSource,
    t_horizon: f64,
    max_nodes: usize,
    mut initial: impl FnMut(usize) -> bool,
) -> TreeRun {
    let mut flags = FlagSet::singleton(n, x);
    let mut tree = DeterminationTree::with_root(NodeLabel::Flag(1));
    // leaves[k] = current leaves carrying label k
    let mut leaves: Vec<Vec<usize>> = vec![Vec::new(), vec![0]];
    let mut overflow = false;
    let mut failed = false;
    let stats = drive(&mut flags, source, t_horizon, Dynamics::Branching, |_, ev, _| {
        match *ev {
            FlagEvent::Death { label, plus, .. } => {
                let sign = Sign::from_bool(plus);
                for leaf in std::mem::take(&mut leaves[label as usize]) {
                    tree.add_child(leaf, NodeLabel::Leaf(sign));
                }
            }
            FlagEvent::Branch { label, partner, .. } => {
                let (k, j) = (label as usize, partner as usize);
                if leaves.len() <= j {
                    leaves.resize(j + 1, Vec::new());
                }
                let old = std::mem::take(&mut leaves[k]);
                if tree.len() + 2 * old.len() > max_nodes {
                    overflow = true;
                    return false;
                }
                for leaf in old {
                    let a = tree.add_child(leaf, NodeLabel::Flag(label));
                    let b = tree.add_child(leaf, NodeLabel::Flag(partner));
                    leaves[k].push(a);
                    leaves[j].push(b);
                }
            }
            FlagEvent::CopyMerge { .. } => {
                failed = true;
                return false;
            }
            _ => {}
        }
        true
    });
    let outcome = if failed {
        TreeOutcome::Failed
    } else if overflow {
        TreeOutcome::Overflow
    } else {
        for (label, site) in flags.iter() {
            let sign = Sign::from_bool(initial(site));
            for leaf in std::mem::take(&mut leaves[label as usize]) {
                tree.add_child(leaf, NodeLabel::Leaf(sign));
            }
        }
        TreeOutcome::Tree(tree)
    };
    TreeRun { outcome, stats }
}
