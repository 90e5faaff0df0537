use std::collections::HashSet;

use super::factor::Factor;
use super::{Assignment, BayesError, Distribution, Network};

/// Default cap on the number of joint states [`brute_force_marginal`] will enumerate.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 20;

/// Chain-rule probability of a total assignment.
pub fn joint_probability(net: &Network, assignment: &Assignment) -> Result<f64, BayesError> {
    let encoded = net.encode(assignment)?;
    let mut states = Vec::with_capacity(net.len());
    for (id, s) in encoded.into_iter().enumerate() {
        states.push(s.ok_or_else(|| BayesError::IncompleteAssignment(net.name(id).to_string()))?);
    }
    Ok(joint_of_states(net, &states))
}

fn joint_of_states(net: &Network, states: &[usize]) -> f64 {
    (0..net.len()).map(|id| net.conditional(id, states)).product()
}

/// Exact posterior `P(query | evidence)` by variable elimination.
pub fn exact_marginal(net: &Network, query: &str, evidence: &Assignment) -> Result<Distribution, BayesError> {
    let q = net
        .node_id(query)
        .ok_or_else(|| BayesError::UnknownNode(query.to_string()))?;
    let ev = net.encode(evidence)?;
    let probabilities = posterior(net, q, &ev)?;
    Ok(distribution(net, q, probabilities))
}

/// Exact posterior by enumerating every completion of the evidence, capped at
/// [`DEFAULT_ENUMERATION_CAP`] joint states. Intended as a reference oracle.
pub fn brute_force_marginal(net: &Network, query: &str, evidence: &Assignment) -> Result<Distribution, BayesError> {
    brute_force_marginal_capped(net, query, evidence, DEFAULT_ENUMERATION_CAP)
}

pub fn brute_force_marginal_capped(
    net: &Network,
    query: &str,
    evidence: &Assignment,
    cap: u128,
) -> Result<Distribution, BayesError> {
    let q = net
        .node_id(query)
        .ok_or_else(|| BayesError::UnknownNode(query.to_string()))?;
    let ev = net.encode(evidence)?;
    let size: u128 = (0..net.len()).map(|i| net.card(i) as u128).product();
    if size > cap {
        return Err(BayesError::TooLarge { size, cap });
    }

    let free: Vec<usize> = (0..net.len()).filter(|&i| ev[i].is_none()).collect();
    let mut states: Vec<usize> = ev.iter().map(|s| s.unwrap_or(0)).collect();
    let mut acc = vec![0.0; net.card(q)];
    loop {
        acc[states[q]] += joint_of_states(net, &states);
        // odometer over the free variables
        let mut k = free.len();
        loop {
            if k == 0 {
                return finish(net, q, acc);
            }
            k -= 1;
            let v = free[k];
            states[v] += 1;
            if states[v] < net.card(v) {
                break;
            }
            states[v] = 0;
        }
    }
}

fn finish(net: &Network, q: usize, acc: Vec<f64>) -> Result<Distribution, BayesError> {
    let z: f64 = acc.iter().sum();
    if z <= 0.0 {
        return Err(BayesError::ZeroEvidence);
    }
    Ok(distribution(net, q, acc.into_iter().map(|p| p / z).collect()))
}

fn distribution(net: &Network, q: usize, probabilities: Vec<f64>) -> Distribution {
    Distribution {
        node: net.name(q).to_string(),
        labels: net.nodes()[q].domain.labels().to_vec(),
        probabilities,
    }
}

/// Posterior over `query` given per-node evidence states.
///
/// Only ancestors of the query and evidence contribute; other nodes sum to
/// one and are dropped before elimination.
pub(crate) fn posterior(net: &Network, query: usize, evidence: &[Option<usize>]) -> Result<Vec<f64>, BayesError> {
    let n = net.len();
    let mut relevant = vec![false; n];
    let mut stack: Vec<usize> = std::iter::once(query)
        .chain((0..n).filter(|&i| evidence[i].is_some()))
        .collect();
    while let Some(i) = stack.pop() {
        if !relevant[i] {
            relevant[i] = true;
            stack.extend_from_slice(net.parents_of(i));
        }
    }

    let mut factors: Vec<Factor> = Vec::new();
    for id in (0..n).filter(|&i| relevant[i]) {
        let mut vars = net.parents_of(id).to_vec();
        vars.push(id);
        let cards = vars.iter().map(|&v| net.card(v)).collect();
        let mut factor = Factor {
            vars,
            cards,
            values: net.table(id).to_vec(),
        };
        for v in factor.vars.clone() {
            if let Some(state) = evidence[v] {
                factor = factor.restrict(v, state);
            }
        }
        factors.push(factor);
    }

    let mut pending: Vec<usize> = (0..n)
        .filter(|&i| relevant[i] && i != query && evidence[i].is_none())
        .collect();
    while !pending.is_empty() {
        let pick = min_fill_choice(net, &factors, &pending);
        let var = pending.swap_remove(pick);
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.vars.contains(&var));
        factors = rest;
        if let Some(joined) = touching.into_iter().reduce(|a, b| a.product(&b)) {
            factors.push(joined.sum_out(var));
        }
    }

    let result = factors
        .into_iter()
        .reduce(|a, b| a.product(&b))
        .unwrap_or_else(|| Factor::scalar(1.0));

    if let Some(state) = evidence[query] {
        let z: f64 = result.values.iter().sum();
        if z <= 0.0 {
            return Err(BayesError::ZeroEvidence);
        }
        let mut out = vec![0.0; net.card(query)];
        out[state] = 1.0;
        return Ok(out);
    }

    // Remaining scope is exactly [query].
    let z: f64 = result.values.iter().sum();
    if z <= 0.0 || !z.is_finite() {
        return Err(BayesError::ZeroEvidence);
    }
    Ok(result.values.iter().map(|v| v / z).collect())
}

// Greedy min-fill over the current factor scopes; ties go to the
// lexicographically smallest node name.
fn min_fill_choice(net: &Network, factors: &[Factor], pending: &[usize]) -> usize {
    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    for f in factors {
        for (i, &a) in f.vars.iter().enumerate() {
            for &b in &f.vars[i + 1..] {
                edges.insert((a.min(b), a.max(b)));
            }
        }
    }
    let mut best: Option<(usize, usize)> = None;
    for (k, &v) in pending.iter().enumerate() {
        let mut neighbours: Vec<usize> = factors
            .iter()
            .filter(|f| f.vars.contains(&v))
            .flat_map(|f| f.vars.iter().copied())
            .filter(|&u| u != v)
            .collect();
        neighbours.sort_unstable();
        neighbours.dedup();
        let mut fill = 0;
        for (i, &a) in neighbours.iter().enumerate() {
            for &b in &neighbours[i + 1..] {
                if !edges.contains(&(a, b)) {
                    fill += 1;
                }
            }
        }
        let better = match best {
            None => true,
            Some((best_fill, best_k)) => {
                fill < best_fill || (fill == best_fill && net.name(v) < net.name(pending[best_k]))
            }
        };
        if better {
            best = Some((fill, k));
        }
    }
    best.map_or(0, |(_, k)| k)
}
