//! Evaluation points and the dual generalized Reed-Solomon coefficients
//! `v_{m,n} = (prod_{n' in R_m, n' != n} (beta_n - beta_n'))^-1`.
//!
//! For distinct points these weights annihilate every monomial of degree at
//! most `rho_m - 2`: `sum_n v_{m,n} beta_n^j = 0`. That identity is what
//! cancels all interference terms at the decoder.

use itertools::Itertools;
use thiserror::Error;

use crate::ff::{next_prime_above, FieldElement, FieldError, PrimeField};
use crate::model::StoragePattern;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrsError {
    #[error("q = {q} must exceed N + L = {n} + {l}")]
    FieldTooSmall { q: u64, n: usize, l: usize },
    #[error("block length L must be at least 1")]
    InvalidBlockLength,
    #[error("F_{q} has too few admissible evaluation points for N = {n}, L = {l}")]
    InsufficientPoints { q: u64, n: usize, l: usize },
    #[error("invalid evaluation points: {0}")]
    InvalidPoints(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Upper bound on candidate point sets examined by [`choose_points_where`].
pub const POINT_SEARCH_LIMIT: usize = 100_000;

/// Distinct nonzero `beta_1..beta_N` with `beta_n + l != 0` for `l in 1..=L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationPoints {
    field: PrimeField,
    beta: Vec<FieldElement>,
    block_length: usize,
}

impl EvaluationPoints {
    pub fn new(field: PrimeField, beta: Vec<FieldElement>, block_length: usize) -> Result<Self, GrsError> {
        if block_length == 0 {
            return Err(GrsError::InvalidBlockLength);
        }
        for (i, b) in beta.iter().enumerate() {
            if b.field() != field {
                return Err(GrsError::InvalidPoints(format!("beta_{} is not in {field}", i + 1)));
            }
            if b.is_zero() {
                return Err(GrsError::InvalidPoints(format!("beta_{} is zero", i + 1)));
            }
            if (1..=block_length).any(|l| (*b + field.elem(l as u64)).is_zero()) {
                return Err(GrsError::InvalidPoints(format!("beta_{} + l = 0 for some l <= L", i + 1)));
            }
        }
        if !beta.iter().all_unique() {
            return Err(GrsError::InvalidPoints("points are not distinct".into()));
        }
        Ok(Self {
            field,
            beta,
            block_length,
        })
    }

    /// Skips validation. Only for fault-injection in verifier tests.
    #[doc(hidden)]
    pub fn new_unchecked(field: PrimeField, beta: Vec<FieldElement>, block_length: usize) -> Self {
        Self {
            field,
            beta,
            block_length,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// `beta_n` for the 1-based server id `n`.
    pub fn beta(&self, n: usize) -> FieldElement {
        self.beta[n - 1]
    }

    pub fn betas(&self) -> &[FieldElement] {
        &self.beta
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }
}

/// Smallest prime above `N + L`, or the caller's prime if it is large enough.
pub fn choose_field(n: usize, l: usize, user_q: Option<u64>) -> Result<PrimeField, GrsError> {
    if l == 0 {
        return Err(GrsError::InvalidBlockLength);
    }
    let bound = (n + l) as u64;
    match user_q {
        Some(q) if q <= bound => Err(GrsError::FieldTooSmall { q, n, l }),
        Some(q) => Ok(PrimeField::new(q)?),
        None => Ok(PrimeField::new(next_prime_above(bound))?),
    }
}

fn admissible(field: PrimeField, l: usize) -> Vec<FieldElement> {
    field
        .elements()
        .skip(1)
        .filter(|b| (1..=l).all(|j| !(*b + field.elem(j as u64)).is_zero()))
        .collect()
}

/// Deterministic point choice: the first `N` admissible elements in
/// ascending order.
pub fn choose_points(field: PrimeField, n: usize, l: usize) -> Result<EvaluationPoints, GrsError> {
    choose_points_where(field, n, l, |_| true)
}

/// First admissible `N`-subset, in lexicographic order of the ascending
/// element scan, that satisfies `accept`.
pub fn choose_points_where<F>(field: PrimeField, n: usize, l: usize, accept: F) -> Result<EvaluationPoints, GrsError>
where
    F: Fn(&EvaluationPoints) -> bool,
{
    if l == 0 {
        return Err(GrsError::InvalidBlockLength);
    }
    let pool = admissible(field, l);
    let insufficient = GrsError::InsufficientPoints {
        q: field.modulus(),
        n,
        l,
    };
    if pool.len() < n {
        return Err(insufficient);
    }
    pool.into_iter()
        .combinations(n)
        .take(POINT_SEARCH_LIMIT)
        .map(|beta| EvaluationPoints {
            field,
            beta,
            block_length: l,
        })
        .find(|p| accept(p))
        .ok_or(insufficient)
}

/// Dual-GRS weights for an arbitrary list of distinct points.
pub fn lagrange_weights(points: &[FieldElement]) -> Result<Vec<FieldElement>, FieldError> {
    points
        .iter()
        .enumerate()
        .map(|(i, bi)| {
            points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .fold(bi.field().one(), |acc, (_, bj)| acc * (*bi - *bj))
                .inv()
        })
        .collect()
}

/// `sum_i v_i beta_i^j == 0` for every `j in 0..=len-2`.
pub fn annihilates(points: &[FieldElement], weights: &[FieldElement]) -> bool {
    let Some(first) = points.first() else {
        return true;
    };
    let zero = first.field().zero();
    (0..points.len().saturating_sub(1)).all(|j| {
        points
            .iter()
            .zip(weights)
            .fold(zero, |acc, (b, v)| acc + *v * b.pow(j as u64))
            .is_zero()
    })
}

/// `v_{m,n}` for every message set `m` and every `n in R_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrsCoefficients {
    per_set: Vec<Vec<(usize, FieldElement)>>,
}

impl GrsCoefficients {
    /// Wraps raw coefficients, `(server, v)` per set in server order.
    pub fn from_raw(per_set: Vec<Vec<(usize, FieldElement)>>) -> Self {
        Self { per_set }
    }

    pub fn set(&self, m: usize) -> &[(usize, FieldElement)] {
        &self.per_set[m]
    }

    pub fn get(&self, m: usize, n: usize) -> Option<FieldElement> {
        self.per_set[m].iter().find(|(s, _)| *s == n).map(|(_, v)| *v)
    }

    pub fn n_sets(&self) -> usize {
        self.per_set.len()
    }

    pub fn set_mut(&mut self, m: usize) -> &mut Vec<(usize, FieldElement)> {
        &mut self.per_set[m]
    }
}

pub fn dual_grs_coeffs(points: &EvaluationPoints, pattern: &StoragePattern) -> GrsCoefficients {
    let per_set = pattern
        .sets()
        .iter()
        .map(|s| {
            let betas: Vec<FieldElement> = s.servers.iter().map(|&n| points.beta(n)).collect();
            let v = lagrange_weights(&betas).expect("distinct points have nonzero differences");
            s.servers.iter().copied().zip(v).collect()
        })
        .collect();
    GrsCoefficients { per_set }
}

/// Checks the annihilation identity for message set `m` over its own
/// servers, for `j in 0..=rho_m-2`.
pub fn annihilator_check(points: &EvaluationPoints, coeffs: &GrsCoefficients, m: usize) -> bool {
    let (betas, v): (Vec<FieldElement>, Vec<FieldElement>) =
        coeffs.set(m).iter().map(|(n, v)| (points.beta(*n), *v)).unzip();
    annihilates(&betas, &v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    #[test]
    fn choose_field_examples() {
        assert_eq!(choose_field(5, 2, None).unwrap().modulus(), 11);
        assert_eq!(
            choose_field(4, 1, Some(5)),
            Err(GrsError::FieldTooSmall { q: 5, n: 4, l: 1 })
        );
        assert_eq!(choose_field(3, 1, Some(7)).unwrap().modulus(), 7);
        assert_eq!(choose_field(3, 1, Some(9)), Err(GrsError::Field(FieldError::NotPrime(9))));
        assert_eq!(choose_field(3, 0, None), Err(GrsError::InvalidBlockLength));
    }

    #[test]
    fn choose_points_examples() {
        let vals = |p: &EvaluationPoints| p.betas().iter().map(|b| b.value()).collect::<Vec<_>>();
        assert_eq!(vals(&choose_points(f(7), 3, 1).unwrap()), vec![1, 2, 3]);
        assert_eq!(vals(&choose_points(f(11), 5, 2).unwrap()), vec![1, 2, 3, 4, 5]);
        // F_7, L = 1: admissible elements are 1..=5 (6 = -1 is excluded)
        assert_eq!(vals(&choose_points(f(7), 5, 1).unwrap()), vec![1, 2, 3, 4, 5]);
        assert!(matches!(
            choose_points(f(7), 6, 1),
            Err(GrsError::InsufficientPoints { .. })
        ));
        assert_eq!(choose_points(f(7), 3, 0), Err(GrsError::InvalidBlockLength));
        assert_eq!(choose_points(f(13), 4, 3), choose_points(f(13), 4, 3));
    }

    #[test]
    fn choose_points_where_skips_rejected_sets() {
        let p = choose_points_where(f(11), 2, 1, |p| p.beta(1).value() != 1).unwrap();
        assert_eq!(p.betas().iter().map(|b| b.value()).collect::<Vec<_>>(), vec![2, 3]);
    }

    #[test]
    fn coefficients_f7() {
        let f7 = f(7);
        let points = choose_points(f7, 3, 1).unwrap();
        let pattern = StoragePattern::uniform(3, 1, &[&[1, 2, 3]]).unwrap();
        let c = dual_grs_coeffs(&points, &pattern);
        let v: Vec<u64> = c.set(0).iter().map(|(_, v)| v.value()).collect();
        assert_eq!(v, vec![4, 6, 4]);
        assert!(annihilator_check(&points, &c, 0));
    }

    #[test]
    fn single_replica_has_unit_coefficient() {
        let points = choose_points(f(7), 3, 1).unwrap();
        let pattern = StoragePattern::uniform(3, 1, &[&[2]]).unwrap();
        let c = dual_grs_coeffs(&points, &pattern);
        assert_eq!(c.get(0, 2), Some(f(7).one()));
        assert!(annihilator_check(&points, &c, 0));
    }

    #[test]
    fn perturbed_coefficient_breaks_annihilation() {
        let f11 = f(11);
        let points = choose_points(f11, 5, 2).unwrap();
        let pattern = StoragePattern::uniform(5, 1, &[&[1, 3, 4], &[2, 3, 5]]).unwrap();
        let mut c = dual_grs_coeffs(&points, &pattern);
        assert!(annihilator_check(&points, &c, 1));
        c.set_mut(1)[0].1 = c.set(1)[0].1 + f11.one();
        assert!(!annihilator_check(&points, &c, 1));
        assert!(annihilator_check(&points, &c, 0));
    }

    #[test]
    fn matches_displayed_five_server_entries() {
        // columns (1,3,4), (2,3,5), (1,2,4), (1,3,5) of the five-server layout
        let f11 = f(11);
        let points = choose_points(f11, 5, 2).unwrap();
        let pattern = StoragePattern::uniform(5, 1, &[&[1, 3, 4], &[2, 3, 5], &[1, 2, 4], &[1, 3, 5]]).unwrap();
        let c = dual_grs_coeffs(&points, &pattern);
        let b = |n: usize| points.beta(n);
        let entry = |n: usize, a: usize, d: usize| ((b(n) - b(a)) * (b(n) - b(d))).inv().unwrap();
        assert_eq!(c.get(0, 1), Some(entry(1, 3, 4)));
        assert_eq!(c.get(0, 3), Some(entry(3, 1, 4)));
        assert_eq!(c.get(0, 4), Some(entry(4, 1, 3)));
        assert_eq!(c.get(1, 2), Some(entry(2, 3, 5)));
        assert_eq!(c.get(1, 5), Some(entry(5, 2, 3)));
        assert_eq!(c.get(2, 1), Some(entry(1, 2, 4)));
        assert_eq!(c.get(2, 2), Some(entry(2, 1, 4)));
        assert_eq!(c.get(3, 5), Some(entry(5, 1, 3)));
        for m in 0..4 {
            // v1 + v2 + v3 = 0 and beta-weighted sum = 0
            let s: FieldElement = c.set(m).iter().map(|(_, v)| *v).sum();
            assert!(s.is_zero());
            let s: FieldElement = c.set(m).iter().map(|(n, v)| *v * b(*n)).sum();
            assert!(s.is_zero());
        }
    }

    #[test]
    fn point_validation() {
        let f7 = f(7);
        assert!(EvaluationPoints::new(f7, vec![f7.elem(1), f7.elem(1)], 1).is_err());
        assert!(EvaluationPoints::new(f7, vec![f7.elem(0)], 1).is_err());
        assert!(EvaluationPoints::new(f7, vec![f7.elem(6)], 1).is_err());
        assert!(EvaluationPoints::new(f7, vec![f7.elem(5)], 2).is_err());
        assert!(EvaluationPoints::new(f7, vec![f7.elem(5)], 1).is_ok());
    }
}
