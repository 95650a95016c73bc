//! Discrete path space.
//!
//! A [`PathTree`] of depth `N` enumerates every path of a symmetric random
//! walk with increments `±h`, `h = sqrt(dt)`, started at the origin. The tree
//! does not recombine: two nodes at the same level with the same current value
//! but different histories are different points of the path space.
//!
//! Nodes are addressed in heap order. For a node at level `k` whose increment
//! bitstring is `b` (first step is the most significant bit, `1` = up),
//! `NodeId = (2^k | b) - 1`. The textual address is `"k:b"`, e.g. `"3:101"`,
//! and the root is `"0:"`.

mod distance;
mod process;
mod region;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

pub use distance::{
    backward_distance, concat, dupire_distance, modulus, modulus_steps, PathPoint,
};
pub(crate) use distance::backward_distance_raw as distance_raw;
pub use process::{shift_process, TreeProcess};
pub(crate) use process::shift_window;
pub use region::{hitting_time, OpenBox, Phase, StoppingRegion};

/// Largest supported tree depth; `2^14` leaf paths.
pub const MAX_DEPTH: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    pub fn from_path(level: usize, bits: usize) -> NodeId {
        debug_assert!(bits < (1usize << level));
        NodeId(((1usize << level) | bits) - 1)
    }

    pub fn level(self) -> usize {
        (usize::BITS - 1 - (self.0 + 1).leading_zeros()) as usize
    }

    /// Increment bitstring, first step in the most significant position.
    pub fn bits(self) -> usize {
        (self.0 + 1) ^ (1usize << self.level())
    }

    pub fn parent(self) -> Option<NodeId> {
        (self.0 > 0).then(|| NodeId((self.0 - 1) / 2))
    }

    pub fn down(self) -> NodeId {
        NodeId(2 * self.0 + 1)
    }

    pub fn up(self) -> NodeId {
        NodeId(2 * self.0 + 2)
    }

    /// Whether the last step into this node was an up move.
    pub fn is_up(self) -> bool {
        self.0 > 0 && self.0 % 2 == 0
    }

    /// The node reached from `self` by `steps` further moves encoded in
    /// `local_bits`.
    pub fn descendant(self, steps: usize, local_bits: usize) -> NodeId {
        NodeId((((self.0 + 1) << steps) | local_bits) - 1)
    }

    pub fn is_ancestor_or_self(self, other: NodeId) -> bool {
        let (ls, lo) = (self.level(), other.level());
        lo >= ls && ((other.0 + 1) >> (lo - ls)) == self.0 + 1
    }

    pub fn address(self) -> String {
        let k = self.level();
        if k == 0 {
            return "0:".to_string();
        }
        format!("{k}:{:0width$b}", self.bits(), width = k)
    }

    pub fn parse(s: &str) -> Result<NodeId> {
        let bad = || Error::InvalidAddress(s.to_string());
        let (level, bits) = s.split_once(':').ok_or_else(bad)?;
        let level: usize = level.trim().parse().map_err(|_| bad())?;
        let bits = bits.trim();
        if bits.len() != level || level >= usize::BITS as usize - 1 {
            return Err(bad());
        }
        if level == 0 {
            return Ok(NodeId::ROOT);
        }
        let b = usize::from_str_radix(bits, 2).map_err(|_| bad())?;
        Ok(NodeId::from_path(level, b))
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.address())
    }
}

/// Complete binary scenario tree of depth `N` with time step `dt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathTree<S> {
    depth: usize,
    dt: S,
    h: S,
}

impl<S: Real> PathTree<S> {
    pub fn new(depth: usize, dt: S) -> Result<Self> {
        if !(dt > S::zero()) || !dt.is_finite() {
            return Err(Error::InvalidStep(dt.as_f64()));
        }
        Self::check_depth(depth)?;
        Ok(PathTree { depth, dt, h: dt.sqrt() })
    }
}

impl<S: Scalar> PathTree<S> {
    /// Builds a tree from its spatial increment; `dt = h^2`. This is the
    /// constructor to use with exact scalars.
    pub fn with_step(depth: usize, h: S) -> Result<Self> {
        if !(h > S::zero()) || !h.is_finite_value() {
            return Err(Error::InvalidStep(h.as_f64()));
        }
        Self::check_depth(depth)?;
        Ok(PathTree { depth, dt: h * h, h })
    }

    fn check_depth(depth: usize) -> Result<()> {
        if depth == 0 || depth > MAX_DEPTH {
            return Err(Error::DepthOutOfRange { depth, max: MAX_DEPTH });
        }
        Ok(())
    }

    /// Tree of the same grid with a different depth; depth 0 is allowed and
    /// represents the single-point tree hanging off a leaf.
    pub(crate) fn subtree(&self, depth: usize) -> PathTree<S> {
        PathTree { depth, dt: self.dt, h: self.h }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dt(&self) -> S {
        self.dt
    }

    pub fn h(&self) -> S {
        self.h
    }

    pub fn horizon(&self) -> S {
        self.dt * S::from_count(self.depth)
    }

    pub fn node_count(&self) -> usize {
        (1usize << (self.depth + 1)) - 1
    }

    pub fn leaf_count(&self) -> usize {
        1usize << self.depth
    }

    /// Number of non-leaf nodes; these carry drift choices.
    pub fn interior_count(&self) -> usize {
        (1usize << self.depth) - 1
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.0 < self.node_count()
    }

    pub fn is_leaf(&self, node: NodeId) -> bool {
        node.level() == self.depth
    }

    pub fn nodes(&self) -> impl DoubleEndedIterator<Item = NodeId> + ExactSizeIterator {
        (0..self.node_count()).map(NodeId)
    }

    pub fn interior_nodes(&self) -> impl DoubleEndedIterator<Item = NodeId> + ExactSizeIterator {
        (0..self.interior_count()).map(NodeId)
    }

    pub fn level_nodes(&self, level: usize) -> impl DoubleEndedIterator<Item = NodeId> {
        ((1usize << level) - 1..(1usize << (level + 1)) - 1).map(NodeId)
    }

    pub fn leaves(&self) -> impl DoubleEndedIterator<Item = NodeId> {
        self.level_nodes(self.depth)
    }

    pub fn time(&self, node: NodeId) -> S {
        self.dt * S::from_count(node.level())
    }

    /// Time left until the horizon.
    pub fn remaining(&self, node: NodeId) -> S {
        self.dt * S::from_count(self.depth - node.level())
    }

    /// Path value `ω_t` at the node: `h` times the signed increment count.
    pub fn value(&self, node: NodeId) -> S {
        let k = node.level();
        let ups = node.bits().count_ones() as i64;
        self.h * Self::signed(2 * ups - k as i64)
    }

    /// The increment `ΔB` taken on the step into `node` (zero at the root).
    pub fn increment(&self, node: NodeId) -> S {
        match node.parent() {
            None => S::zero(),
            Some(_) if node.is_up() => self.h,
            Some(_) => -self.h,
        }
    }

    /// Stopped path `(ω_0, ..., ω_k)`.
    pub fn path_values(&self, node: NodeId) -> Vec<S> {
        let k = node.level();
        let bits = node.bits();
        let mut out = Vec::with_capacity(k + 1);
        let mut net = 0i64;
        out.push(S::zero());
        for j in 1..=k {
            net += if (bits >> (k - j)) & 1 == 1 { 1 } else { -1 };
            out.push(self.h * Self::signed(net));
        }
        out
    }

    pub fn point(&self, node: NodeId) -> PathPoint<S> {
        PathPoint::from_parts(self.dt, self.path_values(node))
    }

    pub fn running_max(&self, node: NodeId) -> S {
        let k = node.level();
        let bits = node.bits();
        let (mut net, mut best) = (0i64, 0i64);
        for j in 1..=k {
            net += if (bits >> (k - j)) & 1 == 1 { 1 } else { -1 };
            best = best.max(net);
        }
        self.h * Self::signed(best)
    }

    pub fn view(&self, node: NodeId) -> NodeView<'_, S> {
        NodeView { tree: self, node }
    }

    pub(crate) fn check_node(&self, node: NodeId) -> Result<()> {
        if self.contains(node) {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange(node.address()))
        }
    }

    fn signed(n: i64) -> S {
        S::from_i64(n).expect("small integers are representable")
    }
}

/// A node together with its tree; what generators see as `θ = (t, ω)`.
#[derive(Clone, Copy, Debug)]
pub struct NodeView<'a, S> {
    tree: &'a PathTree<S>,
    node: NodeId,
}

impl<'a, S: Scalar> NodeView<'a, S> {
    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn tree(&self) -> &'a PathTree<S> {
        self.tree
    }

    pub fn time(&self) -> S {
        self.tree.time(self.node)
    }

    pub fn value(&self) -> S {
        self.tree.value(self.node)
    }

    pub fn running_max(&self) -> S {
        self.tree.running_max(self.node)
    }

    pub fn point(&self) -> PathPoint<S> {
        self.tree.point(self.node)
    }
}

/// Serialized tree description, `{depth, dt, dim}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub depth: usize,
    pub dt: f64,
    #[serde(default = "default_dim")]
    pub dim: usize,
}

fn default_dim() -> usize {
    1
}

impl TreeSpec {
    pub fn build(&self) -> Result<PathTree<f64>> {
        if self.dim != 1 {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        PathTree::new(self.depth, self.dt)
    }
}

impl<S: Scalar> From<&PathTree<S>> for TreeSpec {
    fn from(t: &PathTree<S>) -> Self {
        TreeSpec { depth: t.depth, dt: t.dt.as_f64(), dim: 1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_count_and_levels() {
        let t = PathTree::new(3, 0.25).unwrap();
        assert_eq!(t.node_count(), 15);
        assert_eq!(t.leaves().count(), 8);
        for n in t.nodes().skip(1) {
            let p = n.parent().unwrap();
            assert!(p.down() == n || p.up() == n);
            assert_eq!(p.level() + 1, n.level());
        }
    }

    #[test]
    fn addresses_round_trip() {
        let t = PathTree::new(4, 1.0).unwrap();
        for n in t.nodes() {
            assert_eq!(NodeId::parse(&n.address()).unwrap(), n);
        }
        let n = NodeId::parse("3:101").unwrap();
        assert_eq!(n.level(), 3);
        assert_eq!(t.path_values(n), vec![0.0, 1.0, 0.0, 1.0]);
        assert!(NodeId::parse("3:10").is_err());
        assert!(NodeId::parse("x").is_err());
        assert_eq!(NodeId::ROOT.address(), "0:");
    }

    #[test]
    fn path_value_is_signed_increment_sum() {
        let t = PathTree::new(5, 0.04).unwrap();
        assert_eq!(t.value(NodeId::ROOT), 0.0);
        for n in t.nodes() {
            let path = t.path_values(n);
            assert_eq!(path.len(), n.level() + 1);
            assert_eq!(*path.last().unwrap(), t.value(n));
            let mut acc = 0.0f64;
            let mut cur = n;
            while let Some(p) = cur.parent() {
                acc += t.increment(cur);
                cur = p;
            }
            assert!((acc - t.value(n)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_trees() {
        assert!(PathTree::new(0, 1.0).is_err());
        assert!(PathTree::new(MAX_DEPTH + 1, 1.0).is_err());
        assert!(PathTree::new(3, -1.0).is_err());
        let spec = TreeSpec { depth: 3, dt: 0.1, dim: 2 };
        assert_eq!(spec.build().unwrap_err(), Error::UnsupportedDimension(2));
    }

    #[test]
    fn ancestry() {
        let a = NodeId::parse("2:10").unwrap();
        assert!(a.is_ancestor_or_self(NodeId::parse("4:1011").unwrap()));
        assert!(!a.is_ancestor_or_self(NodeId::parse("4:1111").unwrap()));
        assert!(NodeId::ROOT.is_ancestor_or_self(a));
        assert_eq!(a.descendant(2, 0b11), NodeId::parse("4:1011").unwrap());
    }
}
