use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};
use std::cmp::Reverse;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::BayesError;

/// Tolerance applied when checking that a CPT row sums to one.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Ordered, case-sensitive set of state labels for one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueDomain {
    labels: Vec<String>,
}

impl ValueDomain {
    /// Build a domain from labels. Distinctness and size are checked when the
    /// owning network is built.
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            labels: labels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    fn check(&self, node: &str) -> Result<(), BayesError> {
        if self.labels.len() < 2 {
            return Err(BayesError::InvalidDomain {
                node: node.to_string(),
                reason: format!("needs at least 2 labels, found {}", self.labels.len()),
            });
        }
        let mut seen = HashSet::new();
        for label in &self.labels {
            if !seen.insert(label.as_str()) {
                return Err(BayesError::InvalidDomain {
                    node: node.to_string(),
                    reason: format!("label `{label}` is repeated"),
                });
            }
        }
        Ok(())
    }
}

/// Conditional probability table.
///
/// Rows enumerate parent-label combinations in row-major order over the
/// node's parent list: the last parent varies fastest. A root node has a
/// single row. Entries are stored exactly as given; the owning [`Network`]
/// keeps a renormalized copy for arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    rows: Vec<Vec<f64>>,
}

impl Cpt {
    pub fn new(rows: Vec<Vec<f64>>) -> Self {
        Self { rows }
    }

    /// Single-row table for a node without parents.
    pub fn prior(probabilities: Vec<f64>) -> Self {
        Self {
            rows: vec![probabilities],
        }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub name: String,
    pub domain: ValueDomain,
    pub parents: Vec<String>,
    pub cpt: Cpt,
}

impl Node {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        domain: ValueDomain,
        parents: impl IntoIterator<Item = S>,
        cpt: Cpt,
    ) -> Self {
        Self {
            name: name.into(),
            domain,
            parents: parents.into_iter().map(Into::into).collect(),
            cpt,
        }
    }
}

/// Mapping from node name to domain label. Total when used for joint
/// evaluation, partial when used as evidence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(BTreeMap<String, String>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, node: impl Into<String>, label: impl Into<String>) -> Option<String> {
        self.0.insert(node.into(), label.into())
    }

    pub fn get(&self, node: &str) -> Option<&str> {
        self.0.get(node).map(String::as_str)
    }

    pub fn remove(&mut self, node: &str) -> Option<String> {
        self.0.remove(node)
    }

    pub fn contains(&self, node: &str) -> bool {
        self.0.contains_key(node)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Copy every entry of `other` into `self`, overwriting on collision.
    pub fn extend_from(&mut self, other: &Assignment) {
        for (k, v) in other.iter() {
            self.insert(k, v);
        }
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Posterior or prior distribution over one node's labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub node: String,
    pub labels: Vec<String>,
    pub probabilities: Vec<f64>,
}

impl Distribution {
    pub fn probability(&self, label: &str) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.probabilities[i])
    }
}

/// Immutable, validated discrete Bayesian network.
#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    parent_ids: Vec<Vec<usize>>,
    order: Vec<usize>,
    // Flat renormalized tables, row-major over (parents..., node).
    tables: Vec<Vec<f64>>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
    }
}

impl Network {
    /// Validate `nodes` and build a network.
    pub fn build(nodes: Vec<Node>) -> Result<Self, BayesError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            node.domain.check(&node.name)?;
            if index.insert(node.name.clone(), i).is_some() {
                return Err(BayesError::DuplicateNode(node.name.clone()));
            }
        }

        let mut parent_ids = Vec::with_capacity(nodes.len());
        for node in &nodes {
            let mut ids = Vec::with_capacity(node.parents.len());
            for parent in &node.parents {
                if parent == &node.name {
                    return Err(BayesError::InvalidParent {
                        node: node.name.clone(),
                        parent: parent.clone(),
                        reason: "a node cannot be its own parent".into(),
                    });
                }
                let id = *index.get(parent).ok_or_else(|| BayesError::UnknownParent {
                    node: node.name.clone(),
                    parent: parent.clone(),
                })?;
                if ids.contains(&id) {
                    return Err(BayesError::InvalidParent {
                        node: node.name.clone(),
                        parent: parent.clone(),
                        reason: "parent is listed twice".into(),
                    });
                }
                ids.push(id);
            }
            parent_ids.push(ids);
        }

        let order = topological_order(&nodes, &parent_ids)?;

        let mut tables = Vec::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            tables.push(normalized_table(node, &parent_ids[i], &nodes)?);
        }

        Ok(Self {
            nodes,
            index,
            parent_ids,
            order,
            tables,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, name: &str) -> Option<&Node> {
        self.index.get(name).map(|&i| &self.nodes[i])
    }

    pub fn node_id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Node names in topological order.
    pub fn topological_order(&self) -> Vec<&str> {
        self.order.iter().map(|&i| self.nodes[i].name.as_str()).collect()
    }

    /// Total number of CPT rows across all nodes.
    pub fn cpt_row_count(&self) -> usize {
        self.nodes.iter().map(|n| n.cpt.rows().len()).sum()
    }

    pub(crate) fn order_ids(&self) -> &[usize] {
        &self.order
    }

    pub(crate) fn parents_of(&self, id: usize) -> &[usize] {
        &self.parent_ids[id]
    }

    pub(crate) fn card(&self, id: usize) -> usize {
        self.nodes[id].domain.len()
    }

    pub(crate) fn table(&self, id: usize) -> &[f64] {
        &self.tables[id]
    }

    pub(crate) fn name(&self, id: usize) -> &str {
        &self.nodes[id].name
    }

    /// P(node = value | parents = values) taken from the renormalized table.
    pub(crate) fn conditional(&self, id: usize, states: &[usize]) -> f64 {
        let mut row = 0;
        for &p in &self.parent_ids[id] {
            row = row * self.card(p) + states[p];
        }
        self.tables[id][row * self.card(id) + states[id]]
    }

    /// Translate a (possibly partial) assignment into per-node state indices.
    pub(crate) fn encode(&self, assignment: &Assignment) -> Result<Vec<Option<usize>>, BayesError> {
        let mut states = vec![None; self.nodes.len()];
        for (name, label) in assignment.iter() {
            let id = self
                .node_id(name)
                .ok_or_else(|| BayesError::UnknownNode(name.to_string()))?;
            let state = self.nodes[id].domain.index_of(label).ok_or_else(|| {
                BayesError::UnknownLabel {
                    node: name.to_string(),
                    label: label.to_string(),
                }
            })?;
            states[id] = Some(state);
        }
        Ok(states)
    }

    pub(crate) fn decode(&self, states: &[usize]) -> Assignment {
        self.nodes
            .iter()
            .zip(states)
            .map(|(n, &s)| (n.name.clone(), n.domain.label(s).to_string()))
            .collect()
    }

    /// Human-readable description of a CPT row: the parent labels it conditions on.
    pub fn describe_row(&self, name: &str, row: usize) -> Option<String> {
        let node = self.node(name)?;
        Some(describe_row(node, &self.nodes, &self.index, row))
    }
}

/// Validate and build a network. Free-function form of [`Network::build`].
pub fn build_network(nodes: Vec<Node>) -> Result<Network, BayesError> {
    Network::build(nodes)
}

// Kahn's algorithm, ties broken by declaration order.
fn topological_order(nodes: &[Node], parent_ids: &[Vec<usize>]) -> Result<Vec<usize>, BayesError> {
    let n = nodes.len();
    let mut indegree: Vec<usize> = parent_ids.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (child, parents) in parent_ids.iter().enumerate() {
        for &p in parents {
            children[p].push(child);
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }

    // Every unplaced node has at least one unplaced parent, so walking parent
    // links from any of them must revisit a node.
    let placed: HashSet<usize> = order.into_iter().collect();
    let start = (0..n).find(|i| !placed.contains(i)).unwrap_or_default();
    let mut path = vec![start];
    let mut position = HashMap::from([(start, 0usize)]);
    let mut current = start;
    loop {
        let next = parent_ids[current]
            .iter()
            .copied()
            .find(|p| !placed.contains(p))
            .unwrap_or(current);
        if let Some(&at) = position.get(&next) {
            let mut cycle: Vec<String> = path[at..].iter().map(|&i| nodes[i].name.clone()).collect();
            // The walk follows parent links; report edges in causal direction.
            cycle.reverse();
            cycle.push(cycle[0].clone());
            return Err(BayesError::Cycle { nodes: cycle });
        }
        position.insert(next, path.len());
        path.push(next);
        current = next;
    }
}

fn describe_row(node: &Node, nodes: &[Node], index: &HashMap<String, usize>, row: usize) -> String {
    if node.parents.is_empty() {
        return "[]".to_string();
    }
    let mut rem = row;
    let mut labels = vec![String::new(); node.parents.len()];
    for (k, parent) in node.parents.iter().enumerate().rev() {
        let domain = &nodes[index[parent]].domain;
        labels[k] = domain.label(rem % domain.len()).to_string();
        rem /= domain.len();
    }
    format!("[{}]", labels.join(", "))
}

fn normalized_table(node: &Node, parent_ids: &[usize], nodes: &[Node]) -> Result<Vec<f64>, BayesError> {
    let card = node.domain.len();
    let expected_rows: usize = parent_ids.iter().map(|&p| nodes[p].domain.len()).product();
    let rows = node.cpt.rows();
    if rows.len() != expected_rows {
        return Err(BayesError::CptShape {
            node: node.name.clone(),
            reason: format!("expected {expected_rows} rows, found {}", rows.len()),
        });
    }
    let index: HashMap<String, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.clone(), i))
        .collect();
    let mut table = Vec::with_capacity(expected_rows * card);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != card {
            return Err(BayesError::CptShape {
                node: node.name.clone(),
                reason: format!(
                    "row {} has {} entries, domain has {card} labels",
                    describe_row(node, nodes, &index, r),
                    row.len()
                ),
            });
        }
        if let Some(&bad) = row.iter().find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0) {
            return Err(BayesError::InvalidProbability {
                node: node.name.clone(),
                row: describe_row(node, nodes, &index, r),
                value: bad,
            });
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(BayesError::Normalization {
                node: node.name.clone(),
                row: describe_row(node, nodes, &index, r),
                sum,
            });
        }
        table.extend(row.iter().map(|p| p / sum));
    }
    Ok(table)
}
