use super::LearnerError;
use crate::order::Label;

/// Area under the ROC curve: the probability that a random positive scores
/// above a random negative, counting ties as one half.
pub fn auc(scores: &[f64], labels: &[Label]) -> Result<f64, LearnerError> {
    if scores.len() != labels.len() {
        return Err(LearnerError::LengthMismatch {
            features: scores.len(),
            labels: labels.len(),
        });
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(LearnerError::NonFiniteScore(i));
    }
    let n_pos = labels.iter().filter(|l| l.is_positive()).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(LearnerError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Sum of 1-based mid-ranks of the positives.
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let mid_rank = (start + 1 + end) as f64 / 2.0;
        let pos_in_group = order[start..end].iter().filter(|&&i| labels[i].is_positive()).count();
        rank_sum += mid_rank * pos_in_group as f64;
        start = end;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Negative as N, Positive as P};

    #[test]
    fn hand_cases() {
        assert_eq!(auc(&[0.9, 0.6, 0.4], &[P, N, P]).unwrap(), 0.5);
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[N, N, P, P]).unwrap(), 1.0);
        assert_eq!(auc(&[0.3; 5], &[N, P, N, P, P]).unwrap(), 0.5);
        assert_eq!(auc(&[0.9, 0.1], &[N, P]).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert_eq!(auc(&[0.1, 0.2], &[P, P]), Err(LearnerError::SingleClass));
        assert!(matches!(auc(&[0.1], &[P, N]), Err(LearnerError::LengthMismatch { .. })));
        assert_eq!(auc(&[f64::NAN, 0.2], &[P, N]), Err(LearnerError::NonFiniteScore(0)));
    }
}
