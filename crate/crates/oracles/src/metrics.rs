//! ROC area by explicit curve construction and trapezoid integration.

/// Sweeps thresholds from high to low, one step per distinct score.
pub fn trapezoid_auc(y_true: &[bool], scores: &[f64]) -> f64 {
    let mut pairs: Vec<(f64, bool)> = scores.iter().copied().zip(y_true.iter().copied()).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let pos = y_true.iter().filter(|&&y| y).count() as f64;
    let neg = y_true.len() as f64 - pos;
    let (mut tp, mut fp) = (0.0, 0.0);
    let mut area = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let (prev_tpr, prev_fpr) = (tp / pos, fp / neg);
        let s = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == s {
            if pairs[i].1 {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        area += (fp / neg - prev_fpr) * (tp / pos + prev_tpr) / 2.0;
    }
    area
}
