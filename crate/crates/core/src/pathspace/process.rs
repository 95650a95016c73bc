use std::ops::Index;

use super::{NodeId, NodeView, PathTree};
use crate::error::{Error, Result};
use crate::scalar::{sup_norm, Scalar};

/// One value per node of a [`PathTree`]: a discrete adapted process.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeProcess<S> {
    tree: PathTree<S>,
    values: Vec<S>,
}

impl<S: Scalar> TreeProcess<S> {
    pub fn new(tree: PathTree<S>, values: Vec<S>) -> Result<Self> {
        if values.len() != tree.node_count() {
            return Err(Error::LengthMismatch { expected: tree.node_count(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite_value()) {
            return Err(Error::NonFinite(NodeId(i).address()));
        }
        Ok(TreeProcess { tree, values })
    }

    pub(crate) fn from_vec_unchecked(tree: PathTree<S>, values: Vec<S>) -> Self {
        debug_assert_eq!(values.len(), tree.node_count());
        TreeProcess { tree, values }
    }

    pub fn from_fn(tree: &PathTree<S>, mut f: impl FnMut(NodeView<'_, S>) -> S) -> Self {
        let values = tree.nodes().map(|n| f(tree.view(n))).collect();
        TreeProcess { tree: *tree, values }
    }

    pub fn constant(tree: &PathTree<S>, c: S) -> Self {
        TreeProcess { tree: *tree, values: vec![c; tree.node_count()] }
    }

    /// `θ ↦ t`.
    pub fn time(tree: &PathTree<S>) -> Self {
        Self::from_fn(tree, |v| v.time())
    }

    /// The canonical process `θ ↦ ω_t`.
    pub fn brownian(tree: &PathTree<S>) -> Self {
        Self::from_fn(tree, |v| v.value())
    }

    /// `θ ↦ max_{s ≤ t} ω_s`.
    pub fn running_max(tree: &PathTree<S>) -> Self {
        Self::from_fn(tree, |v| v.running_max())
    }

    /// Process equal to `leaves` on the last level and zero elsewhere.
    pub fn from_leaves(tree: &PathTree<S>, leaves: &[S]) -> Result<Self> {
        if leaves.len() != tree.leaf_count() {
            return Err(Error::LengthMismatch { expected: tree.leaf_count(), got: leaves.len() });
        }
        let mut values = vec![S::zero(); tree.node_count()];
        values[tree.interior_count()..].copy_from_slice(leaves);
        Self::new(*tree, values)
    }

    pub fn tree(&self) -> &PathTree<S> {
        &self.tree
    }

    pub fn get(&self, node: NodeId) -> S {
        self.values[node.0]
    }

    pub fn set(&mut self, node: NodeId, value: S) {
        self.values[node.0] = value;
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn root(&self) -> S {
        self.values[0]
    }

    /// Values on the last level, in leaf order.
    pub fn leaf_values(&self) -> &[S] {
        &self.values[self.tree.interior_count()..]
    }

    pub fn sup_norm(&self) -> S {
        sup_norm(&self.values)
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        TreeProcess { tree: self.tree, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn map_nodes(&self, mut f: impl FnMut(NodeView<'_, S>, S) -> S) -> Self {
        let tree = self.tree;
        let values = tree.nodes().map(|n| f(tree.view(n), self.values[n.0])).collect();
        TreeProcess { tree, values }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(S, S) -> S) -> Result<Self> {
        self.same_tree(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(TreeProcess { tree: self.tree, values })
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v)
    }

    pub fn same_tree(&self, other: &Self) -> Result<()> {
        if self.tree.depth() != other.tree.depth() {
            return Err(Error::LengthMismatch {
                expected: self.tree.node_count(),
                got: other.tree.node_count(),
            });
        }
        if self.tree.dt() != other.tree.dt() {
            return Err(Error::GridMismatch { left: self.tree.dt().as_f64(), right: other.tree.dt().as_f64() });
        }
        Ok(())
    }

    /// Largest `|self - other|` over all nodes.
    pub fn max_abs_diff(&self, other: &Self) -> S {
        self.values.iter().zip(&other.values).map(|(&a, &b)| (a - b).abs()).fold(S::zero(), S::max_of)
    }
}

impl<S> Index<NodeId> for TreeProcess<S> {
    type Output = S;

    fn index(&self, node: NodeId) -> &S {
        &self.values[node.0]
    }
}

/// `X^{t,ω}`: the process on the subtree hanging off `at`, with
/// `X^{t,ω}_s(ω') = X(t + s, ω ⊗_t ω')`.
///
/// The returned tree has depth `N - k` and its own canonical process is the
/// tail `ω'`, started at the origin.
pub fn shift_process<S: Scalar>(x: &TreeProcess<S>, at: NodeId) -> Result<TreeProcess<S>> {
    x.tree.check_node(at)?;
    let sub = x.tree.subtree(x.tree.depth() - at.level());
    let values = sub.nodes().map(|n| x.values[at.descendant(n.level(), n.bits()).0]).collect();
    Ok(TreeProcess { tree: sub, values })
}

/// [`shift_process`] truncated to the first `depth` levels of the subtree.
pub(crate) fn shift_window<S: Scalar>(x: &TreeProcess<S>, at: NodeId, depth: usize) -> Result<TreeProcess<S>> {
    x.tree.check_node(at)?;
    let local = x.tree.depth() - at.level();
    if depth > local {
        return Err(Error::DepthOutOfRange { depth, max: local });
    }
    let sub = x.tree.subtree(depth);
    let values = sub.nodes().map(|n| x.values[at.descendant(n.level(), n.bits()).0]).collect();
    Ok(TreeProcess { tree: sub, values })
}
