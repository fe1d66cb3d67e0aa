use super::{PredictorError, Result};

fn check(scored: &[(f64, bool)]) -> Result<(usize, usize)> {
    if let Some(&(s, _)) = scored.iter().find(|(s, _)| !s.is_finite()) {
        return Err(PredictorError::NonFiniteScore(s));
    }
    let positives = scored.iter().filter(|(_, l)| *l).count();
    let negatives = scored.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(PredictorError::SingleClass { positives, negatives });
    }
    Ok((positives, negatives))
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half (Mann-Whitney U with midranks).
pub fn evaluate_auc(scored: &[(f64, bool)]) -> Result<f64> {
    let (pos, neg) = check(scored)?;
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[a].0.total_cmp(&scored[b].0));
    // Twice the positive rank sum keeps midranks integral.
    let mut rank_sum2 = 0u128;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scored[order[j + 1]].0 == scored[order[i]].0 {
            j += 1;
        }
        let midrank2 = (i + 1 + j + 1) as u128;
        let tied_pos = order[i..=j].iter().filter(|&&k| scored[k].1).count() as u128;
        rank_sum2 += midrank2 * tied_pos;
        i = j + 1;
    }
    let (p, n) = (pos as u128, neg as u128);
    let u2 = rank_sum2 - p * (p + 1);
    Ok(u2 as f64 / (2 * p * n) as f64)
}

/// Area under the ROC curve by the trapezoid rule, sweeping thresholds
/// from the highest score down.
pub fn roc_auc_trapezoid(scored: &[(f64, bool)]) -> Result<f64> {
    let (pos, neg) = check(scored)?;
    let mut sorted = scored.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut tp, mut fp) = (0usize, 0usize);
    let (mut prev_tpr, mut prev_fpr) = (0.0f64, 0.0f64);
    let mut area = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let s = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == s {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let tpr = tp as f64 / pos as f64;
        let fpr = fp as f64 / neg as f64;
        area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        (prev_tpr, prev_fpr) = (tpr, fpr);
    }
    Ok(area)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cases() {
        let perfect = [(0.9, true), (0.8, true), (0.2, false), (0.1, false)];
        assert_eq!(evaluate_auc(&perfect).unwrap(), 1.0);
        let ties = [(0.5, true), (0.5, false), (0.5, true), (0.5, false)];
        assert_eq!(evaluate_auc(&ties).unwrap(), 0.5);
        let mixed = [(0.9, true), (0.4, true), (0.5, false), (0.1, false)];
        assert_eq!(evaluate_auc(&mixed).unwrap(), 0.75);
        assert_eq!(roc_auc_trapezoid(&mixed).unwrap(), 0.75);
        assert_eq!(roc_auc_trapezoid(&ties).unwrap(), 0.5);
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(matches!(
            evaluate_auc(&[(0.3, true), (0.4, true)]),
            Err(PredictorError::SingleClass { positives: 2, negatives: 0 })
        ));
        assert!(matches!(evaluate_auc(&[(f64::NAN, true), (0.4, false)]), Err(PredictorError::NonFiniteScore(_))));
    }
}
