use std::collections::HashMap;

use rand::Rng;

use super::inference::posterior;
use super::{Assignment, BayesError, Network};

/// Draw one total assignment from `P(all nodes | evidence)`.
///
/// Unobserved nodes are visited in topological order and each is drawn from
/// its exact conditional given the evidence and the nodes drawn before it.
/// Exactly one uniform variate is consumed per unobserved node.
pub fn sample_posterior<R: Rng + ?Sized>(
    net: &Network,
    evidence: &Assignment,
    rng: &mut R,
) -> Result<Assignment, BayesError> {
    PosteriorSampler::new(net, evidence)?.sample(rng)
}

/// Repeated exact posterior sampling under fixed evidence.
///
/// Conditionals are memoized per sampled prefix, so drawing many samples
/// from a small network costs a handful of eliminations in total. Draws are
/// identical to [`sample_posterior`] for the same random stream.
pub struct PosteriorSampler<'a> {
    net: &'a Network,
    evidence: Vec<Option<usize>>,
    free: Vec<usize>,
    cache: Option<HashMap<(usize, u64), Vec<f64>>>,
}

impl<'a> PosteriorSampler<'a> {
    pub fn new(net: &'a Network, evidence: &Assignment) -> Result<Self, BayesError> {
        let evidence = net.encode(evidence)?;
        let free: Vec<usize> = net
            .order_ids()
            .iter()
            .copied()
            .filter(|&id| evidence[id].is_none())
            .collect();

        // Prefix codes are mixed-radix integers; skip memoization if they
        // could overflow.
        let fits = free
            .iter()
            .try_fold(1u64, |acc, &id| acc.checked_mul(net.card(id) as u64))
            .is_some();

        // Reject impossible evidence up front so `sample` never meets it.
        match free.first() {
            Some(&first) => {
                posterior(net, first, &evidence)?;
            }
            None => {
                if evidence.iter().any(Option::is_none) {
                    unreachable!("no free nodes implies total evidence");
                }
                let states: Vec<usize> = evidence.iter().map(|s| s.unwrap_or(0)).collect();
                let p: f64 = (0..net.len()).map(|id| net.conditional(id, &states)).product();
                if p <= 0.0 {
                    return Err(BayesError::ZeroEvidence);
                }
            }
        }

        Ok(Self {
            net,
            evidence,
            free,
            cache: fits.then(HashMap::new),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Assignment, BayesError> {
        let mut states = self.evidence.clone();
        let mut code = 0u64;
        for (step, &id) in self.free.iter().enumerate() {
            let probabilities = match self.cache.as_mut() {
                Some(cache) => match cache.get(&(step, code)) {
                    Some(p) => p.clone(),
                    None => {
                        let p = posterior(self.net, id, &states)?;
                        cache.insert((step, code), p.clone());
                        p
                    }
                },
                None => posterior(self.net, id, &states)?,
            };
            let state = draw(&probabilities, rng);
            states[id] = Some(state);
            code = code * self.net.card(id) as u64 + state as u64;
        }
        let total: Vec<usize> = states.into_iter().map(|s| s.unwrap_or(0)).collect();
        Ok(self.net.decode(&total))
    }
}

/// Inverse-CDF draw from a categorical distribution. Never returns a
/// zero-probability index.
pub(crate) fn draw<R: Rng + ?Sized>(probabilities: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probabilities.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last_positive = i;
        cumulative += p;
        if u < cumulative {
            return i;
        }
    }
    last_positive
}
