//! Average precision and its mean over queries.

use alloc::collections::BTreeSet;

use crate::error::{Error, Result};

/// `(1/G) * sum over ranks n of (TP@n / n) * [n-th result is ground truth]`.
///
/// `ranking` lists every stored id in rank order. Every truth id must appear
/// in it.
pub fn average_precision<S: AsRef<str>, T: AsRef<str>>(ranking: &[S], truth: &[T]) -> Result<f64> {
    let truth: BTreeSet<&str> = truth.iter().map(|t| t.as_ref()).collect();
    if truth.is_empty() {
        return Err(Error::EmptyTruthSet);
    }
    let mut seen = BTreeSet::new();
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, id) in ranking.iter().enumerate() {
        let id = id.as_ref();
        if truth.contains(id) && seen.insert(id) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    if hits != truth.len() {
        let missing = truth.iter().find(|t| !seen.contains(*t)).unwrap();
        return Err(Error::TruthNotRanked((*missing).into()));
    }
    Ok(sum / truth.len() as f64)
}

pub fn mean_average_precision(aps: &[f64]) -> Result<f64> {
    if aps.is_empty() {
        return Err(Error::NoQueries);
    }
    Ok(aps.iter().sum::<f64>() / aps.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::String;
    use alloc::vec::Vec;

    fn ids(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("r{i}")).collect()
    }

    #[test]
    fn hand_derived_case() {
        let ranking = ids(10);
        let ap = average_precision(&ranking, &["r1", "r2", "r5", "r7"]).unwrap();
        assert!((ap - 0.7928571428571429).abs() < 1e-12);
    }

    #[test]
    fn perfect_and_last() {
        let ranking = ids(10);
        assert_eq!(
            average_precision(&ranking, &["r1", "r2", "r3"]).unwrap(),
            1.0
        );
        assert_eq!(average_precision(&ranking, &["r10"]).unwrap(), 0.1);
    }

    #[test]
    fn errors() {
        let ranking = ids(3);
        let none: [&str; 0] = [];
        assert_eq!(
            average_precision(&ranking, &none),
            Err(Error::EmptyTruthSet)
        );
        assert_eq!(
            average_precision(&ranking, &["zz"]),
            Err(Error::TruthNotRanked("zz".into()))
        );
        assert_eq!(mean_average_precision(&[]), Err(Error::NoQueries));
    }

    #[test]
    fn means() {
        assert_eq!(mean_average_precision(&[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(mean_average_precision(&[1.0, 0.0]).unwrap(), 0.5);
    }
}
