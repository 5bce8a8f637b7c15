use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sketchy_core::{Dataset, DesignMatrix, Real};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preprocessing {
    /// Scale every nonzero row to unit Euclidean norm.
    UnitRowNorm,
    /// Center and scale each feature; non-binary labels too. Densifies sparse input.
    Standardize,
    #[default]
    None,
}

pub fn preprocess<T: Real>(ds: &Dataset<T>, mode: Preprocessing) -> Result<Dataset<T>> {
    match mode {
        Preprocessing::None => Ok(ds.clone()),
        Preprocessing::UnitRowNorm => unit_row_norm(ds),
        Preprocessing::Standardize => standardize(ds),
    }
}

fn unit_row_norm<T: Real>(ds: &Dataset<T>) -> Result<Dataset<T>> {
    let mut a = ds.design().clone();
    let scales: Vec<T> = (0..ds.n())
        .map(|i| {
            let s = a.row_norm_sq(i).sqrt();
            if s > T::zero() {
                T::one() / s
            } else {
                T::one()
            }
        })
        .collect();
    a.scale_rows_mut(&scales)?;
    Ok(Dataset::new(a, ds.labels().clone())?)
}

/// Population mean and standard deviation.
fn moments<T: Real>(v: &[T]) -> (T, T) {
    let nf = T::from_usize_lossy(v.len());
    let mean = v.iter().fold(T::zero(), |a, &x| a + x) / nf;
    let var = v.iter().fold(T::zero(), |a, &x| a + (x - mean) * (x - mean)) / nf;
    (mean, var.sqrt())
}

fn is_binary<T: Real>(labels: &DVector<T>) -> bool {
    let first = labels[0];
    let other = labels.iter().find(|&&v| v != first);
    match other {
        None => true,
        Some(&o) => labels.iter().all(|&v| v == first || v == o),
    }
}

fn standardize<T: Real>(ds: &Dataset<T>) -> Result<Dataset<T>> {
    let mut a: DMatrix<T> = ds.design().to_dense();
    // a feature is constant when its spread is at roundoff level of its magnitude
    for mut col in a.column_iter_mut() {
        let (mean, std) = moments(col.as_slice());
        let scale = col.amax();
        col.add_scalar_mut(-mean);
        if std > scale * T::default_epsilon() * T::lit(16.0) {
            col /= std;
        } else {
            col.fill(T::zero());
        }
    }
    let mut b = ds.labels().clone();
    if !is_binary(&b) {
        let (mean, std) = moments(b.as_slice());
        b.add_scalar_mut(-mean);
        if std > T::zero() {
            b /= std;
        }
    }
    Ok(Dataset::new(DesignMatrix::from_dense(&a), b)?)
}

/// Maps a two-valued label vector to ±1, smaller value to −1. Other label
/// vectors are returned unchanged.
pub fn sign_labels<T: Real>(labels: &DVector<T>) -> DVector<T> {
    let lo = labels.min();
    let hi = labels.max();
    if lo == hi || !labels.iter().all(|&v| v == lo || v == hi) {
        return labels.clone();
    }
    labels.map(|v| if v == lo { -T::one() } else { T::one() })
}
