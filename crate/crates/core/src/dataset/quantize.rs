//! Equal-frequency binning of numeric columns into 2 or 3 categories.

use super::DatasetError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bins {
    Two = 2,
    Three = 3,
}

impl Bins {
    pub fn count(self) -> usize {
        self as usize
    }
}

impl TryFrom<usize> for Bins {
    type Error = DatasetError;

    fn try_from(value: usize) -> Result<Self, Self::Error> {
        match value {
            2 => Ok(Bins::Two),
            3 => Ok(Bins::Three),
            other => Err(DatasetError::Invalid(format!(
                "numeric columns take 2 or 3 bins, got {other}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Quantized {
    pub indices: Vec<u32>,
    /// `bins - 1` cut points in ascending order.
    pub edges: Vec<f64>,
}

impl Quantized {
    /// Category labels `<=e1`, `(e1,e2]`, `>e2`.
    pub fn labels(&self) -> Vec<String> {
        bin_labels(&self.edges)
    }
}

pub(crate) fn bin_labels(edges: &[f64]) -> Vec<String> {
    let mut labels = Vec::with_capacity(edges.len() + 1);
    labels.push(format!("<={}", edges[0]));
    for pair in edges.windows(2) {
        labels.push(format!("({},{}]", pair[0], pair[1]));
    }
    labels.push(format!(">{}", edges[edges.len() - 1]));
    labels
}

/// Number of edges strictly below `value`; a value equal to an edge lands in
/// the lower bin.
pub fn bin_index(value: f64, edges: &[f64]) -> usize {
    edges.iter().filter(|&&e| value > e).count()
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Cuts `values` at their `1/bins` quantiles.
pub fn quantize_numeric(values: &[f64], bins: Bins) -> Result<Quantized, DatasetError> {
    let mut sorted = values.to_vec();
    if sorted.iter().any(|v| v.is_nan()) {
        return Err(DatasetError::Invalid("NaN in numeric column".into()));
    }
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    let k = bins.count();
    if distinct.len() < k {
        return Err(DatasetError::TooFewDistinct {
            column: String::new(),
            distinct: distinct.len(),
            needed: k,
        });
    }
    let edges: Vec<f64> = (1..k)
        .map(|i| quantile(&sorted, i as f64 / k as f64))
        .collect();
    let indices = values
        .iter()
        .map(|&v| bin_index(v, &edges) as u32)
        .collect();
    Ok(Quantized { indices, edges })
}
