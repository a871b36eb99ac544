use super::{check_dimension, gaussian_kernel, positive, Learner, GAUSSIAN_PEAK};
use crate::dataset::{Dataset, LabelKind};
use crate::error::{Error, Result};
use crate::mechanism::{Smoothness, TargetFunction};

/// Public parameters of the Priestley–Chao estimator: kernel bandwidth `b`,
/// label bound `B` and gap constant `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcRegressionConfig {
    pub bandwidth: f64,
    pub label_bound: f64,
    pub gap_constant: f64,
}

/// One-dimensional kernel regression
/// `F(y) = (1/b) sum_{i>=2} (d_i - d_{i-1}) K((y - d_i)/b) l_i`
/// with a Gaussian `K`.
#[derive(Debug, Clone)]
pub struct PcRegression {
    config: PcRegressionConfig,
}

impl PcRegression {
    pub fn new(config: PcRegressionConfig) -> Result<Self> {
        positive("bandwidth", config.bandwidth)?;
        positive("label bound", config.label_bound)?;
        positive("gap constant", config.gap_constant)?;
        Ok(Self { config })
    }

    /// Checks sortedness, label range and that consecutive abscissae are at
    /// most `c/n` apart.
    pub fn validate(&self, data: &Dataset) -> Result<()> {
        check_dimension(data, 1)?;
        if data.label_kind() != LabelKind::Real {
            return Err(Error::Precondition("Priestley-Chao regression needs real labels".into()));
        }
        let n = data.len();
        let max_gap = self.config.gap_constant / n as f64;
        let records = data.records();
        for (i, r) in records.iter().enumerate() {
            let l = r.label_or_zero();
            if l.abs() > self.config.label_bound {
                return Err(Error::Precondition(format!(
                    "record {i}: label {l} outside [-{b}, {b}]",
                    b = self.config.label_bound
                )));
            }
            if i == 0 {
                continue;
            }
            let gap = r.features[0] - records[i - 1].features[0];
            if gap < 0.0 {
                return Err(Error::Precondition(format!("record {i}: abscissae are not sorted")));
            }
            if gap > max_gap {
                return Err(Error::Precondition(format!(
                    "record {i}: gap {gap} to previous abscissa exceeds c/n = {max_gap}"
                )));
            }
        }
        Ok(())
    }
}

impl Learner for PcRegression {
    fn ell(&self) -> usize {
        1
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Smooth
    }

    fn sensitivity(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Precondition("empty dataset".into()));
        }
        let c = &self.config;
        Ok(4.0 * c.label_bound * c.gap_constant / (n as f64 * c.bandwidth) * GAUSSIAN_PEAK)
    }

    fn fit(&self, data: &Dataset) -> Result<TargetFunction> {
        self.validate(data)?;
        let b = self.config.bandwidth;
        let terms: Vec<(f64, f64)> = data
            .records()
            .windows(2)
            .map(|w| {
                let gap = w[1].features[0] - w[0].features[0];
                (w[1].features[0], gap * w[1].label_or_zero() / b)
            })
            .collect();
        TargetFunction::new(1, self.sensitivity(data.len())?, Smoothness::Smooth, move |y| {
            terms.iter().map(|&(d, w)| w * gaussian_kernel((y[0] - d) / b)).sum()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Record;
    use approx::assert_abs_diff_eq;

    fn data(points: &[(f64, f64)]) -> Dataset {
        Dataset::new(
            1,
            LabelKind::Real,
            points.iter().map(|&(d, l)| Record::labeled(vec![d], l)).collect(),
        )
        .unwrap()
    }

    fn learner(c: f64) -> PcRegression {
        PcRegression::new(PcRegressionConfig {
            bandwidth: 0.1,
            label_bound: 1.0,
            gap_constant: c,
        })
        .unwrap()
    }

    #[test]
    fn zero_labels_give_zero() {
        let f = learner(2.0).fit(&data(&[(0.1, 0.0), (0.4, 0.0), (0.7, 0.0)])).unwrap();
        for y in [0.0, 0.3, 1.0] {
            assert_eq!(f.evaluate(&[y]), 0.0);
        }
    }

    #[test]
    fn sensitivity_formula() {
        assert_abs_diff_eq!(learner(2.0).sensitivity(100).unwrap(), 0.8 / (2.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(learner(2.0).sensitivity(100).unwrap(), 0.319_15, epsilon = 5e-6);
    }

    #[test]
    fn single_term_sum() {
        let f = learner(2.0).fit(&data(&[(0.4, 0.3), (0.6, 1.0)])).unwrap();
        assert_abs_diff_eq!(f.evaluate(&[0.6]), 0.797_884_560_8, epsilon = 1e-9);
    }

    #[test]
    fn precondition_violations_name_the_index() {
        let err = learner(2.0).fit(&data(&[(0.1, 0.0), (0.5, 0.0), (0.3, 0.0)])).unwrap_err();
        assert!(err.to_string().contains("record 2"), "{err}");
        let err = learner(1.0).fit(&data(&[(0.1, 0.0), (0.2, 0.0), (0.9, 0.0)])).unwrap_err();
        assert!(err.to_string().contains("record 2"), "{err}");
        let err = learner(2.0).fit(&data(&[(0.1, 0.0), (0.2, 3.0)])).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }
}
