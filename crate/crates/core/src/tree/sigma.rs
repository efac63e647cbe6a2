use num_rational::BigRational;
use num_traits::{One, Zero};

use super::TreeError;

/// A rooted, ordered, full binary tree with labeled nodes. Nodes are stored
/// in post-order, so children precede parents and the root is last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaTree {
    labels: Vec<String>,
    children: Vec<Option<(usize, usize)>>,
    default: String,
}

impl SigmaTree {
    pub fn new(default: impl Into<String>) -> Self {
        SigmaTree { labels: Vec::new(), children: Vec::new(), default: default.into() }
    }

    pub fn add_leaf(&mut self, label: impl Into<String>) -> usize {
        self.labels.push(label.into());
        self.children.push(None);
        self.labels.len() - 1
    }

    /// Children must be earlier, parentless nodes.
    pub fn add_internal(&mut self, label: impl Into<String>, left: usize, right: usize) -> usize {
        assert!(left < self.len() && right < self.len() && left != right, "children exist");
        self.labels.push(label.into());
        self.children.push(Some((left, right)));
        self.labels.len() - 1
    }

    /// A complete tree of the given depth with every node labeled `label`.
    pub fn complete(depth: usize, label: &str, default: &str) -> SigmaTree {
        fn go(t: &mut SigmaTree, d: usize, label: &str) -> usize {
            if d == 0 {
                return t.add_leaf(label);
            }
            let l = go(t, d - 1, label);
            let r = go(t, d - 1, label);
            t.add_internal(label, l, r)
        }
        let mut t = SigmaTree::new(default);
        go(&mut t, depth, label);
        t
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn root(&self) -> usize {
        self.len() - 1
    }

    pub fn label(&self, n: usize) -> &str {
        &self.labels[n]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn set_label(&mut self, n: usize, label: impl Into<String>) {
        self.labels[n] = label.into();
    }

    pub fn children(&self, n: usize) -> Option<(usize, usize)> {
        self.children[n]
    }

    pub fn default_label(&self) -> &str {
        &self.default
    }

    /// The tree where nodes outside `keep` take the default label.
    pub fn world(&self, keep: impl Fn(usize) -> bool) -> SigmaTree {
        let mut t = self.clone();
        for n in 0..t.len() {
            if !keep(n) {
                t.labels[n] = self.default.clone();
            }
        }
        t
    }
}

/// A tree whose nodes keep their label independently with a probability,
/// and otherwise take the default label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbTree {
    pub tree: SigmaTree,
    prob: Vec<BigRational>,
}

impl ProbTree {
    pub fn new(tree: SigmaTree, prob: Vec<BigRational>) -> Result<ProbTree, TreeError> {
        if prob.len() != tree.len() {
            return Err(TreeError::MissingProbability(prob.len().min(tree.len())));
        }
        if let Some(p) = prob.iter().find(|p| **p < BigRational::zero() || **p > BigRational::one()) {
            return Err(TreeError::InvalidProbability(p.to_string()));
        }
        Ok(ProbTree { tree, prob })
    }

    pub fn uniform(tree: SigmaTree, p: BigRational) -> Result<ProbTree, TreeError> {
        let n = tree.len();
        ProbTree::new(tree, vec![p; n])
    }

    pub fn prob(&self, n: usize) -> &BigRational {
        &self.prob[n]
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.prob
    }
}
