use serde::Serialize;
use smallvec::SmallVec;

use super::SymfunError;
use crate::scalar::Real;

/// Principal curvatures in the positive cone, stored ascending.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lambda<T> {
    values: SmallVec<[T; 6]>,
}

impl<T: Real> Lambda<T> {
    /// Validates positivity and sorts into canonical order.
    pub fn new(values: &[T]) -> Result<Self, SymfunError> {
        if values.is_empty() {
            return Err(SymfunError::Empty);
        }
        if let Some((index, &v)) = values
            .iter()
            .enumerate()
            .find(|(_, &v)| !(v > T::zero()) || !v.is_finite())
        {
            return Err(SymfunError::Domain {
                index,
                value: v.to_f64_lossy(),
            });
        }
        let mut values: SmallVec<[T; 6]> = values.iter().copied().collect();
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite entries"));
        Ok(Self { values })
    }

    /// The umbilic point `(c, …, c)`.
    pub fn umbilic(n: usize, c: T) -> Result<Self, SymfunError> {
        Self::new(&vec![c; n])
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn min(&self) -> T {
        self.values[0]
    }

    #[inline]
    pub fn max(&self) -> T {
        self.values[self.values.len() - 1]
    }

    /// Entrywise reciprocal, i.e. the principal radii.
    pub fn reciprocal(&self) -> Self {
        let mut values: SmallVec<[T; 6]> = self.values.iter().map(|&x| x.recip()).collect();
        values.reverse();
        Self { values }
    }

    pub fn scaled(&self, k: T) -> Result<Self, SymfunError> {
        let v: SmallVec<[T; 6]> = self.values.iter().map(|&x| x * k).collect();
        Self::new(&v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_on_construction() {
        let l = Lambda::new(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(l.as_slice(), &[1.0, 2.0, 3.0]);
        assert_eq!(l.min(), 1.0);
        assert_eq!(l.max(), 3.0);
    }

    #[test]
    fn rejects_boundary_of_cone() {
        assert!(matches!(
            Lambda::new(&[1.0, 0.0]),
            Err(SymfunError::Domain { index: 1, .. })
        ));
        assert!(Lambda::new(&[1.0, -2.0]).is_err());
        assert!(Lambda::new(&[f64::NAN]).is_err());
        assert!(Lambda::<f64>::new(&[]).is_err());
    }

    #[test]
    fn reciprocal_stays_sorted() {
        let l = Lambda::new(&[1.0, 2.0, 4.0]).unwrap().reciprocal();
        assert_eq!(l.as_slice(), &[0.25, 0.5, 1.0]);
    }
}
