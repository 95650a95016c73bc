use super::{NodeId, PathTree};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Position of a node relative to a stopping region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    /// No marked node on the root path yet.
    Before,
    /// The node is marked.
    Stop,
    /// A strict ancestor is marked.
    After,
}

/// A discrete stopping time: a set of nodes met exactly once by every
/// root-to-leaf path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoppingRegion {
    depth: usize,
    marks: Vec<bool>,
    phases: Vec<Phase>,
}

impl StoppingRegion {
    pub fn from_marks(depth: usize, marks: Vec<bool>) -> Result<Self> {
        let count = (1usize << (depth + 1)) - 1;
        if marks.len() != count {
            return Err(Error::LengthMismatch { expected: count, got: marks.len() });
        }
        let mut phases = Vec::with_capacity(count);
        for i in 0..count {
            let node = NodeId(i);
            let inherited = node.parent().map_or(Phase::Before, |p| phases[p.0]);
            let phase = match (inherited, marks[i]) {
                (Phase::Before, false) => {
                    if node.level() == depth {
                        return Err(Error::InvalidRegion(format!("path to leaf {node} is never stopped")));
                    }
                    Phase::Before
                }
                (Phase::Before, true) => Phase::Stop,
                (_, false) => Phase::After,
                (_, true) => {
                    return Err(Error::InvalidRegion(format!("node {node} is marked below another marked node")));
                }
            };
            phases.push(phase);
        }
        Ok(StoppingRegion { depth, marks, phases })
    }

    pub fn from_nodes(depth: usize, nodes: impl IntoIterator<Item = NodeId>) -> Result<Self> {
        let count = (1usize << (depth + 1)) - 1;
        let mut marks = vec![false; count];
        for n in nodes {
            if n.0 >= count {
                return Err(Error::NodeOutOfRange(n.address()));
            }
            marks[n.0] = true;
        }
        Self::from_marks(depth, marks)
    }

    /// Stop at the first node satisfying `pred`; leaves always stop.
    pub fn first_hit(depth: usize, mut pred: impl FnMut(NodeId) -> bool) -> Self {
        let count = (1usize << (depth + 1)) - 1;
        let mut marks = vec![false; count];
        let mut stopped = vec![false; count];
        for i in 0..count {
            let node = NodeId(i);
            if node.parent().is_some_and(|p| stopped[p.0]) {
                stopped[i] = true;
            } else if node.level() == depth || pred(node) {
                marks[i] = true;
                stopped[i] = true;
            }
        }
        Self::from_marks(depth, marks).expect("first-hit regions are valid by construction")
    }

    /// The deterministic time `k dt`.
    pub fn level(depth: usize, k: usize) -> Result<Self> {
        if k > depth {
            return Err(Error::InvalidRegion(format!("level {k} beyond depth {depth}")));
        }
        Ok(Self::first_hit(depth, |n| n.level() == k))
    }

    /// Terminal time `T`.
    pub fn leaves(depth: usize) -> Self {
        Self::first_hit(depth, |_| false)
    }

    /// Immediate stopping.
    pub fn root(depth: usize) -> Self {
        Self::first_hit(depth, |_| true)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_marked(&self, node: NodeId) -> bool {
        self.marks[node.0]
    }

    pub fn phase(&self, node: NodeId) -> Phase {
        self.phases[node.0]
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn marked_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.marks.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| NodeId(i))
    }

    /// True when the root is not marked, i.e. the stopping time is in `(0, T]`.
    pub fn is_positive(&self) -> bool {
        !self.marks[0]
    }

    pub fn is_leaves(&self) -> bool {
        self.marks.iter().enumerate().all(|(i, &m)| m == (NodeId(i).level() == self.depth))
    }

    /// The marked ancestor-or-self of a node at or after the region.
    pub fn stop_of(&self, node: NodeId) -> Option<NodeId> {
        let mut cur = node;
        loop {
            match self.phases[cur.0] {
                Phase::Before => return None,
                Phase::Stop => return Some(cur),
                Phase::After => cur = cur.parent().expect("root is never After"),
            }
        }
    }

    /// The same stopping rule seen from `at`, on the subtree of depth
    /// `N - level(at)`. Fails if `at` lies strictly after the region.
    pub fn restrict(&self, at: NodeId) -> Result<StoppingRegion> {
        if at.0 >= self.marks.len() {
            return Err(Error::NodeOutOfRange(at.address()));
        }
        if self.phases[at.0] == Phase::After {
            return Err(Error::NotDominated(at.address()));
        }
        let depth = self.depth - at.level();
        let count = (1usize << (depth + 1)) - 1;
        let marks = (0..count)
            .map(|i| {
                let n = NodeId(i);
                self.marks[at.descendant(n.level(), n.bits()).0]
            })
            .collect();
        Self::from_marks(depth, marks)
    }

    /// Inverse of [`restrict`](Self::restrict): a region on the subtree at
    /// `at` extended to the full tree by stopping every other path at its
    /// first node off the subtree's root path.
    pub fn embed(depth: usize, at: NodeId, local: &StoppingRegion) -> Result<StoppingRegion> {
        if at.level() + local.depth != depth {
            return Err(Error::Inconsistent(format!(
                "subtree of depth {} does not hang off {at} in a tree of depth {depth}",
                local.depth
            )));
        }
        let k = at.level();
        Ok(Self::first_hit(depth, |n| {
            let l = n.level();
            if l < k {
                return !n.is_ancestor_or_self(at);
            }
            if at.is_ancestor_or_self(n) {
                let local_node = NodeId::from_path(l - k, n.bits() & ((1usize << (l - k)) - 1));
                local.is_marked(local_node)
            } else {
                true
            }
        }))
    }
}

/// Open interval `(lo, hi)` for the path value; `None` means unbounded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpenBox<S> {
    pub lo: Option<S>,
    pub hi: Option<S>,
}

impl<S: Scalar> OpenBox<S> {
    pub fn unbounded() -> Self {
        OpenBox { lo: None, hi: None }
    }

    pub fn symmetric(radius: S) -> Self {
        OpenBox { lo: Some(-radius), hi: Some(radius) }
    }

    pub fn contains(&self, x: S) -> bool {
        self.lo.is_none_or(|lo| x > lo) && self.hi.is_none_or(|hi| x < hi)
    }
}

/// `H^{s,O}`: first time `t ≥ s` or `ω_t ∉ O`, on levels `≥ 1`.
pub fn hitting_time<S: Scalar>(tree: &PathTree<S>, s: S, boxed: OpenBox<S>) -> Result<StoppingRegion> {
    let horizon = tree.horizon();
    let slack = tree.dt() / S::lit(1e9);
    if !(s > S::zero()) || s > horizon + slack {
        return Err(Error::HorizonOutOfRange { s: s.as_f64(), horizon: horizon.as_f64() });
    }
    if !boxed.contains(S::zero()) {
        return Err(Error::OriginOutsideBox {
            lo: boxed.lo.map_or(f64::NEG_INFINITY, S::as_f64),
            hi: boxed.hi.map_or(f64::INFINITY, S::as_f64),
        });
    }
    Ok(StoppingRegion::first_hit(tree.depth(), |n| {
        n.level() >= 1 && (tree.time(n) + slack >= s || !boxed.contains(tree.value(n)))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_regions() {
        // leaf never stopped
        assert!(StoppingRegion::from_nodes(2, [NodeId::parse("1:0").unwrap()]).is_err());
        // two marks on one path
        let bad = [NodeId::parse("1:0").unwrap(), NodeId::parse("2:00").unwrap(), NodeId::parse("1:1").unwrap()];
        assert!(StoppingRegion::from_nodes(2, bad).is_err());
        let ok = [NodeId::parse("1:0").unwrap(), NodeId::parse("2:10").unwrap(), NodeId::parse("2:11").unwrap()];
        let r = StoppingRegion::from_nodes(2, ok).unwrap();
        assert_eq!(r.phase(NodeId::parse("2:01").unwrap()), Phase::After);
        assert_eq!(r.stop_of(NodeId::parse("2:01").unwrap()), Some(NodeId::parse("1:0").unwrap()));
        assert_eq!(r.stop_of(NodeId::ROOT), None);
        assert!(r.is_positive());
    }

    #[test]
    fn hitting_examples() {
        let t = PathTree::new(3, 1.0).unwrap();
        let all = hitting_time(&t, 3.0, OpenBox::unbounded()).unwrap();
        assert!(all.is_leaves());
        let first = hitting_time(&t, 3.0, OpenBox::symmetric(0.5)).unwrap();
        assert_eq!(first, StoppingRegion::level(3, 1).unwrap());

        let t2 = PathTree::new(2, 1.0).unwrap();
        let r = hitting_time(&t2, 2.0, OpenBox::symmetric(1.5)).unwrap();
        assert!(r.is_leaves());

        assert!(matches!(
            hitting_time(&t, 1.0, OpenBox { lo: Some(0.0), hi: None }),
            Err(Error::OriginOutsideBox { .. })
        ));
        assert!(matches!(hitting_time(&t, 0.0, OpenBox::unbounded()), Err(Error::HorizonOutOfRange { .. })));
        assert!(matches!(hitting_time(&t, 4.0, OpenBox::unbounded()), Err(Error::HorizonOutOfRange { .. })));
    }

    #[test]
    fn hitting_box_exit_before_time() {
        let t = PathTree::new(4, 1.0).unwrap();
        let r = hitting_time(&t, 4.0, OpenBox::symmetric(1.5)).unwrap();
        // up-up exits at level 2, up-down returns to 0 and continues
        assert!(r.is_marked(NodeId::parse("2:11").unwrap()));
        assert!(r.is_marked(NodeId::parse("2:00").unwrap()));
        assert_eq!(r.phase(NodeId::parse("2:10").unwrap()), Phase::Before);
        assert!(r.is_marked(NodeId::parse("4:1010").unwrap()));
    }

    #[test]
    fn restrict_and_embed() {
        let t = PathTree::new(4, 1.0).unwrap();
        let r = hitting_time(&t, 4.0, OpenBox::symmetric(1.5)).unwrap();
        let at = NodeId::parse("2:10").unwrap();
        let local = r.restrict(at).unwrap();
        assert_eq!(local.depth(), 2);
        assert!(local.is_leaves());
        let back = StoppingRegion::embed(4, at, &local).unwrap();
        assert_eq!(back.restrict(at).unwrap(), local);
        assert!(matches!(r.restrict(NodeId::parse("3:110").unwrap()), Err(Error::NotDominated(_))));
    }
}
