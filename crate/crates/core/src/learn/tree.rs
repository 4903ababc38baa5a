//! Binary decision tree shared by the forest and boosted-ensemble learners.
//!
//! Leaves carry a single value whose meaning depends on the learner (class
//! probability for forests, additive raw score for boosting). Rows with
//! `x[feature] < threshold` descend left, otherwise right.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Tree {
    /// Index 0 is the root; children always follow their parent, so the
    /// vector order is a preorder walk.
    pub(crate) nodes: Vec<Node>,
}

impl Tree {
    #[cfg(test)]
    pub(crate) fn leaf(value: f64) -> Tree {
        Tree {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub(crate) fn eval(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] < *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    /// Largest feature index referenced by any split, if the tree splits.
    pub(crate) fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .max()
    }

    /// Serialize as a preorder token list: `S <feature> <threshold>` for
    /// splits, `L <value>` for leaves. Floats use the shortest exact
    /// round-trip form.
    pub(crate) fn to_tokens(&self) -> String {
        let mut out = String::new();
        self.write_preorder(0, &mut out);
        out
    }

    fn write_preorder(&self, at: usize, out: &mut String) {
        if !out.is_empty() {
            out.push(' ');
        }
        match &self.nodes[at] {
            Node::Leaf { value } => {
                out.push_str(&format!("L {value}"));
            }
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                out.push_str(&format!("S {feature} {threshold}"));
                self.write_preorder(*left, out);
                self.write_preorder(*right, out);
            }
        }
    }

    /// Parse the [`to_tokens`](Tree::to_tokens) form. `line` is used for
    /// error reporting only.
    pub(crate) fn from_tokens(text: &str, line: usize) -> Result<Tree> {
        let mut tokens = text.split_whitespace();
        let mut nodes = Vec::new();
        parse_node(&mut tokens, &mut nodes, line)?;
        if tokens.next().is_some() {
            return Err(Error::ModelParse {
                line,
                message: "trailing tokens after tree definition".to_string(),
            });
        }
        Ok(Tree { nodes })
    }
}

fn parse_node<'a>(
    tokens: &mut impl Iterator<Item = &'a str>,
    nodes: &mut Vec<Node>,
    line: usize,
) -> Result<usize> {
    let bail = |message: String| Error::ModelParse { line, message };
    let tag = tokens
        .next()
        .ok_or_else(|| bail("unexpected end of tree tokens".to_string()))?;
    match tag {
        "L" => {
            let raw = tokens
                .next()
                .ok_or_else(|| bail("leaf is missing its value".to_string()))?;
            let value: f64 = raw
                .parse()
                .map_err(|_| bail(format!("invalid leaf value {raw:?}")))?;
            if !value.is_finite() {
                return Err(bail(format!("non-finite leaf value {raw:?}")));
            }
            let index = nodes.len();
            nodes.push(Node::Leaf { value });
            Ok(index)
        }
        "S" => {
            let raw_feature = tokens
                .next()
                .ok_or_else(|| bail("split is missing its feature index".to_string()))?;
            let feature: usize = raw_feature
                .parse()
                .map_err(|_| bail(format!("invalid split feature {raw_feature:?}")))?;
            let raw_threshold = tokens
                .next()
                .ok_or_else(|| bail("split is missing its threshold".to_string()))?;
            let threshold: f64 = raw_threshold
                .parse()
                .map_err(|_| bail(format!("invalid split threshold {raw_threshold:?}")))?;
            if !threshold.is_finite() {
                return Err(bail(format!("non-finite split threshold {raw_threshold:?}")));
            }
            let index = nodes.len();
            // Placeholder until the children are parsed; preorder keeps the
            // parent ahead of its subtrees.
            nodes.push(Node::Split {
                feature,
                threshold,
                left: 0,
                right: 0,
            });
            let left = parse_node(tokens, nodes, line)?;
            let right = parse_node(tokens, nodes, line)?;
            if let Node::Split {
                left: l, right: r, ..
            } = &mut nodes[index]
            {
                *l = left;
                *r = right;
            }
            Ok(index)
        }
        other => Err(bail(format!("unknown tree node tag {other:?}"))),
    }
}
