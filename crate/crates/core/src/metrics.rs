//! Evaluation metrics: MSE, MAE and RMSE over every entry, and accuracy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

fn check(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::invalid(format!(
            "prediction has {} values, truth has {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Empty("metric"));
    }
    Ok(())
}

pub fn mse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    Ok(pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / pred.len() as f64)
}

pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    Ok(pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len() as f64)
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    mse(pred, truth).map(f64::sqrt)
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::invalid(format!(
            "{} predicted labels, {} true labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Empty("accuracy"));
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// The space regression metrics were computed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSpace {
    /// Targets z-scored with the training segment's parameters.
    Zscore,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mse: Option<f64>,
    pub mae: Option<f64>,
    pub rmse: Option<f64>,
    pub accuracy: Option<f64>,
    pub n: usize,
    pub space: MetricSpace,
}

impl MetricReport {
    /// Regression metrics over matrices of equal shape.
    pub fn regression(pred: &Matrix, truth: &Matrix, space: MetricSpace) -> Result<Self> {
        if pred.shape() != truth.shape() {
            return Err(Error::DimensionMismatch {
                op: "metrics",
                left_rows: pred.rows(),
                left_cols: pred.cols(),
                right_rows: truth.rows(),
                right_cols: truth.cols(),
            });
        }
        let mse = mse(pred.data(), truth.data())?;
        Ok(MetricReport {
            mse: Some(mse),
            mae: Some(mae(pred.data(), truth.data())?),
            rmse: Some(mse.sqrt()),
            accuracy: None,
            n: pred.rows(),
            space,
        })
    }

    pub fn classification(pred: &[usize], truth: &[usize]) -> Result<Self> {
        Ok(MetricReport {
            mse: None,
            mae: None,
            rmse: None,
            accuracy: Some(accuracy(pred, truth)?),
            n: pred.len(),
            space: MetricSpace::Raw,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn regression_examples() {
        let x = [0.3, -1.0, 2.0];
        assert_eq!((mse(&x, &x).unwrap(), mae(&x, &x).unwrap(), rmse(&x, &x).unwrap()), (0.0, 0.0, 0.0));
        let (p, t) = ([0.0, 0.0], [1.0, 1.0]);
        assert_eq!((mse(&p, &t).unwrap(), mae(&p, &t).unwrap(), rmse(&p, &t).unwrap()), (1.0, 1.0, 1.0));
        let (p, t) = ([0.0, 2.0], [0.0, 0.0]);
        assert_eq!(mse(&p, &t).unwrap(), 2.0);
        assert_eq!(mae(&p, &t).unwrap(), 1.0);
        assert_eq!(rmse(&p, &t).unwrap(), 2f64.sqrt());
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mae(&[], &[]).is_err());
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 1, 1, 0], &[0, 1, 0, 1]).unwrap(), 0.5);
        assert_eq!(accuracy(&[0, 0], &[1, 1]).unwrap(), 0.0);
        assert!(accuracy(&[], &[]).is_err());
        assert!(accuracy(&[1], &[1, 0]).is_err());
    }

    #[test]
    fn report_shapes() {
        let a = Matrix::zeros(2, 3);
        assert!(MetricReport::regression(&a, &Matrix::zeros(3, 2), MetricSpace::Raw).is_err());
        let r = MetricReport::regression(&a, &a.map(|_| 2.0), MetricSpace::Zscore).unwrap();
        assert_eq!(r.rmse, Some(2.0));
        assert_eq!(r.n, 2);
    }

    proptest! {
        #[test]
        fn mae_bounded_by_rmse_and_order_free(pairs in prop::collection::vec((-50f64..50.0, -50f64..50.0), 1..100)) {
            let (p, t): (Vec<f64>, Vec<f64>) = pairs.iter().cloned().unzip();
            let r = rmse(&p, &t).unwrap();
            let a = mae(&p, &t).unwrap();
            prop_assert!(a <= r * (1.0 + 1e-12) + 1e-15);
            prop_assert!((r - mse(&p, &t).unwrap().sqrt()).abs() <= 1e-12);

            let (mut rp, mut rt) = (p.clone(), t.clone());
            rp.reverse();
            rt.reverse();
            prop_assert!((mse(&rp, &rt).unwrap() - mse(&p, &t).unwrap()).abs() <= 1e-9);
            prop_assert!((mae(&rp, &rt).unwrap() - a).abs() <= 1e-9);
        }
    }
}
