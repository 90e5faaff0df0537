//! Dense factors over discrete variables, the working representation of
//! variable elimination.

#[derive(Debug, Clone)]
pub(crate) struct Factor {
    pub vars: Vec<usize>,
    pub cards: Vec<usize>,
    // Row-major: the last variable varies fastest.
    pub values: Vec<f64>,
}

impl Factor {
    pub fn scalar(value: f64) -> Self {
        Self {
            vars: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.vars.len()];
        for k in (0..self.vars.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.cards[k + 1];
        }
        strides
    }

    fn stride_of(&self, strides: &[usize], var: usize) -> usize {
        self.vars
            .iter()
            .position(|&v| v == var)
            .map_or(0, |k| strides[k])
    }

    pub fn product(&self, other: &Factor) -> Factor {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (k, &v) in other.vars.iter().enumerate() {
            if !vars.contains(&v) {
                vars.push(v);
                cards.push(other.cards[k]);
            }
        }
        let (own, theirs) = (self.strides(), other.strides());
        let sa: Vec<usize> = vars.iter().map(|&v| self.stride_of(&own, v)).collect();
        let sb: Vec<usize> = vars.iter().map(|&v| other.stride_of(&theirs, v)).collect();
        let total: usize = cards.iter().product();

        let mut values = Vec::with_capacity(total);
        let mut idx = vec![0usize; vars.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..total {
            values.push(self.values[ia] * other.values[ib]);
            for k in (0..vars.len()).rev() {
                idx[k] += 1;
                ia += sa[k];
                ib += sb[k];
                if idx[k] < cards[k] {
                    break;
                }
                ia -= sa[k] * cards[k];
                ib -= sb[k] * cards[k];
                idx[k] = 0;
            }
        }
        Factor { vars, cards, values }
    }

    pub fn sum_out(&self, var: usize) -> Factor {
        let Some(pos) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        let out = Factor {
            values: vec![0.0; cards.iter().product()],
            vars,
            cards,
        };
        let out_strides = out.strides();
        let so: Vec<usize> = self.vars.iter().map(|&v| out.stride_of(&out_strides, v)).collect();
        self.scatter(out, &so)
    }

    /// Fix `var` to `state`, dropping it from the scope.
    pub fn restrict(&self, var: usize, state: usize) -> Factor {
        let Some(pos) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let strides = self.strides();
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        let keep: Vec<usize> = (0..self.vars.len()).filter(|&k| k != pos).collect();
        let total: usize = cards.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut idx = vec![0usize; vars.len()];
        let base = state * strides[pos];
        for _ in 0..total {
            let offset: usize = idx.iter().zip(&keep).map(|(&i, &k)| i * strides[k]).sum();
            values.push(self.values[base + offset]);
            for k in (0..vars.len()).rev() {
                idx[k] += 1;
                if idx[k] < cards[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Factor { vars, cards, values }
    }

    // Accumulate every entry of `self` into `out`, whose index is derived with
    // per-variable strides `so` (zero for variables absent from `out`).
    fn scatter(&self, mut out: Factor, so: &[usize]) -> Factor {
        let mut idx = vec![0usize; self.vars.len()];
        let mut io = 0usize;
        for &v in &self.values {
            out.values[io] += v;
            for k in (0..self.vars.len()).rev() {
                idx[k] += 1;
                io += so[k];
                if idx[k] < self.cards[k] {
                    break;
                }
                io -= so[k] * self.cards[k];
                idx[k] = 0;
            }
        }
        out
    }
}
