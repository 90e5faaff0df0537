use super::{BayesError, Cpt};

/// Fit a CPT from observed counts with additive smoothing.
///
/// `counts` holds one count vector per parent combination, in the same row
/// order as [`Cpt`]. A row that is all zero with zero smoothing carries no
/// information and becomes uniform.
pub fn fit_cpt_from_counts(counts: &[Vec<f64>], smoothing: f64) -> Result<Cpt, BayesError> {
    if !smoothing.is_finite() || smoothing < 0.0 {
        return Err(BayesError::NegativeCount { row: 0 });
    }
    let mut rows = Vec::with_capacity(counts.len());
    for (r, row) in counts.iter().enumerate() {
        if row.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(BayesError::NegativeCount { row: r });
        }
        let smoothed: Vec<f64> = row.iter().map(|c| c + smoothing).collect();
        let total: f64 = smoothed.iter().sum();
        if total > 0.0 {
            rows.push(smoothed.iter().map(|c| c / total).collect());
        } else {
            rows.push(vec![1.0 / row.len() as f64; row.len()]);
        }
    }
    Ok(Cpt::new(rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_counts() {
        let cpt = fit_cpt_from_counts(&[vec![10.0, 0.0]], 0.0).unwrap();
        assert_eq!(cpt.rows()[0], vec![1.0, 0.0]);
    }

    #[test]
    fn pure_prior() {
        let cpt = fit_cpt_from_counts(&[vec![0.0, 0.0]], 1.0).unwrap();
        assert_eq!(cpt.rows()[0], vec![0.5, 0.5]);
    }

    #[test]
    fn laplace_arithmetic() {
        let cpt = fit_cpt_from_counts(&[vec![3.0, 1.0]], 1.0).unwrap();
        assert!((cpt.rows()[0][0] - 4.0 / 6.0).abs() < 1e-15);
        assert!((cpt.rows()[0][1] - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn smoothing_removes_zeros() {
        let cpt = fit_cpt_from_counts(&[vec![5.0, 0.0, 0.0], vec![0.0, 0.0, 2.0]], 0.5).unwrap();
        assert!(cpt.rows().iter().flatten().all(|&p| p > 0.0));
    }

    #[test]
    fn empty_row_without_smoothing_is_uniform() {
        let cpt = fit_cpt_from_counts(&[vec![0.0, 0.0, 0.0, 0.0]], 0.0).unwrap();
        assert_eq!(cpt.rows()[0], vec![0.25; 4]);
    }

    #[test]
    fn negative_counts_rejected() {
        assert_eq!(
            fit_cpt_from_counts(&[vec![1.0, 1.0], vec![-1.0, 2.0]], 0.0).unwrap_err(),
            BayesError::NegativeCount { row: 1 }
        );
        assert!(fit_cpt_from_counts(&[vec![1.0, 1.0]], -0.5).is_err());
    }
}
