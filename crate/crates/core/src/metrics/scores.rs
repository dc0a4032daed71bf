use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;

use crate::error::{Error, Result};

/// Counts `table[t][p]` of samples with true class `t` and predicted cluster
/// `p`. Rows cover `0..=max(true)`, columns `0..=max(pred)`.
pub fn contingency(truth: &[usize], pred: &[usize]) -> Result<Vec<Vec<usize>>> {
    if truth.len() != pred.len() {
        return Err(Error::Dimension(format!(
            "{} true labels but {} predictions",
            truth.len(),
            pred.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Dimension("cannot score an empty labelling".into()));
    }
    let rows = truth.iter().max().map_or(0, |m| m + 1);
    let cols = pred.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0usize; cols]; rows];
    for (&t, &p) in truth.iter().zip(pred) {
        table[t][p] += 1;
    }
    Ok(table)
}

/// Fraction of samples correct under the best one-to-one map from clusters to
/// classes (Hungarian method on the contingency table).
pub fn accuracy(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let table = contingency(truth, pred)?;
    let size = table.len().max(table[0].len());
    let weights = Matrix::from_fn(size, size, |(t, p)| {
        table
            .get(t)
            .and_then(|row| row.get(p))
            .copied()
            .unwrap_or(0) as i64
    });
    let (matched, _) = kuhn_munkres(&weights);
    Ok(matched as f64 / truth.len() as f64)
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.ln();
        }
    }
    h
}

/// Mutual information over the geometric mean of the two entropies, natural
/// logs. Two single-cluster partitions score 1; a single-cluster partition
/// against a non-trivial one scores 0.
pub fn nmi(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let table = contingency(truth, pred)?;
    let n = truth.len() as f64;
    let row_sums: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<usize> = (0..table[0].len())
        .map(|p| table.iter().map(|r| r[p]).sum())
        .collect();
    let ht = entropy(&row_sums, n);
    let hp = entropy(&col_sums, n);
    if ht == 0.0 && hp == 0.0 {
        return Ok(1.0);
    }
    if ht == 0.0 || hp == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (t, row) in table.iter().enumerate() {
        for (p, &c) in row.iter().enumerate() {
            if c > 0 {
                let joint = c as f64 / n;
                mi += joint * (c as f64 * n / (row_sums[t] as f64 * col_sums[p] as f64)).ln();
            }
        }
    }
    Ok((mi / (ht * hp).sqrt()).clamp(0.0, 1.0))
}

/// Mean over predicted clusters of their majority-class count.
pub fn purity(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let table = contingency(truth, pred)?;
    let majority: usize = (0..table[0].len())
        .map(|p| table.iter().map(|r| r[p]).max().unwrap_or(0))
        .sum();
    Ok(majority as f64 / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap(), 0.5);
        assert_eq!(accuracy(&[2, 0, 1, 1], &[2, 0, 1, 1]).unwrap(), 1.0);
        // more clusters than classes
        assert_eq!(accuracy(&[0, 0, 0, 1], &[0, 1, 2, 3]).unwrap(), 0.5);
    }

    #[test]
    fn nmi_examples() {
        assert!((nmi(&[0, 0, 1, 1, 2, 2], &[1, 1, 2, 2, 0, 0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(nmi(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap(), 0.0);
        assert_eq!(nmi(&[0, 0, 0], &[1, 1, 1]).unwrap(), 1.0);
        assert_eq!(nmi(&[0, 0, 1], &[0, 0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn nmi_merged_classes_by_hand() {
        // classes {0,1},{2,3},{4,5}; clusters merge the first two classes
        let truth = [0, 0, 1, 1, 2, 2];
        let pred = [0, 0, 0, 0, 1, 1];
        let ln = f64::ln;
        let ht = ln(3.0);
        let hp = -(2.0 / 3.0) * ln(2.0 / 3.0) - (1.0 / 3.0) * ln(1.0 / 3.0);
        // I = H(P) since P is a function of T
        let expect = hp / (ht * hp).sqrt();
        assert!((nmi(&truth, &pred).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn purity_examples() {
        assert_eq!(purity(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
        assert_eq!(purity(&[0, 0, 1, 1, 2, 2], &[0; 6]).unwrap(), 1.0 / 3.0);
        assert_eq!(purity(&[0, 0, 1, 1], &[0, 0, 0, 1]).unwrap(), 0.75);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(matches!(accuracy(&[0, 1], &[0]), Err(Error::Dimension(_))));
        assert!(matches!(nmi(&[0], &[0, 1]), Err(Error::Dimension(_))));
        assert!(matches!(purity(&[], &[]), Err(Error::Dimension(_))));
    }
}
