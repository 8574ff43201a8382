//! Correspondence analysis of the indicator matrix by a cyclic Jacobi
//! eigen-decomposition of `SᵀS`.

use rulelist::dataset::CategoricalDataset;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Owner {
    Attribute { attribute: usize, category: usize },
    Label(usize),
}

#[derive(Clone, Debug)]
pub struct CaOracle {
    /// Indicator columns with a nonzero count, attributes first.
    pub columns: Vec<Owner>,
    pub column_masses: Vec<f64>,
    /// Descending, only those above `tol`.
    pub singular_values: Vec<f64>,
    /// `columns.len() × singular_values.len()` principal coordinates.
    pub coords: Vec<Vec<f64>>,
}

impl CaOracle {
    pub fn column(&self, owner: Owner) -> Option<usize> {
        self.columns.iter().position(|&o| o == owner)
    }

    pub fn cosine(&self, a: Owner, b: Owner) -> Option<f64> {
        let (i, j) = (self.column(a)?, self.column(b)?);
        let dot: f64 = self.coords[i]
            .iter()
            .zip(&self.coords[j])
            .map(|(x, y)| x * y)
            .sum();
        let ni = self.coords[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        let nj = self.coords[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        if ni <= 1e-12 || nj <= 1e-12 {
            None
        } else {
            Some(dot / (ni * nj))
        }
    }
}

/// Eigenvalues and column eigenvectors of a symmetric matrix.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    let scale: f64 = a
        .iter()
        .flatten()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// Standardized residual matrix `S` (rows × kept columns) of the indicator
/// matrix of attributes and label, plus the column owners and masses.
pub fn residuals(dataset: &CategoricalDataset) -> (Vec<Vec<f64>>, Vec<Owner>, Vec<f64>) {
    let n = dataset.n_rows();
    let mut columns = Vec::new();
    let mut hot: Vec<Vec<bool>> = Vec::new();
    for (a, schema) in dataset.schemas().iter().enumerate() {
        for c in 0..schema.categories.len() {
            let col: Vec<bool> = (0..n).map(|i| dataset.row(i)[a] as usize == c).collect();
            if col.iter().any(|&h| h) {
                columns.push(Owner::Attribute {
                    attribute: a,
                    category: c,
                });
                hot.push(col);
            }
        }
    }
    for k in 0..dataset.label_names().len() {
        let col: Vec<bool> = dataset.labels().iter().map(|&y| y as usize == k).collect();
        if col.iter().any(|&h| h) {
            columns.push(Owner::Label(k));
            hot.push(col);
        }
    }
    let total: f64 = hot.iter().flatten().filter(|&&h| h).count() as f64;
    let masses: Vec<f64> = hot
        .iter()
        .map(|c| c.iter().filter(|&&h| h).count() as f64 / total)
        .collect();
    let row_mass = 1.0 / n as f64;
    let s = (0..n)
        .map(|i| {
            hot.iter()
                .zip(&masses)
                .map(|(col, &cm)| {
                    let p = if col[i] { 1.0 / total } else { 0.0 };
                    (p - row_mass * cm) / (row_mass * cm).sqrt()
                })
                .collect()
        })
        .collect();
    (s, columns, masses)
}

/// Full oracle fit keeping singular values above `tol`.
pub fn correspondence_analysis(dataset: &CategoricalDataset, tol: f64) -> CaOracle {
    let (s, columns, masses) = residuals(dataset);
    let j = columns.len();
    let sts: Vec<Vec<f64>> = (0..j)
        .map(|a| {
            (0..j)
                .map(|b| s.iter().map(|row| row[a] * row[b]).sum())
                .collect()
        })
        .collect();
    let (values, vectors) = jacobi_eigen(&sts);
    let mut order: Vec<usize> = (0..j).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&i| values[i].max(0.0).sqrt() > tol)
        .collect();
    let singular_values: Vec<f64> = kept.iter().map(|&i| values[i].sqrt()).collect();
    let coords = (0..j)
        .map(|row| {
            kept.iter()
                .zip(&singular_values)
                .map(|(&i, &sv)| vectors[row][i] * sv / masses[row].sqrt())
                .collect()
        })
        .collect();
    CaOracle {
        columns,
        column_masses: masses,
        singular_values,
        coords,
    }
}
