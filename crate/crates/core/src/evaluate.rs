//! `Q · min_{0<n<=Q} Π ‖n x_i‖` for rational points and over enclosure boxes.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{min_product, MinHit};
use crate::ratcore::{nearest_dist, rat_int, RatInterval};
use crate::stepfn::StepFunctionSpec;

pub const MAX_COMPONENTS: usize = 4;

fn check_components(k: usize) -> Result<()> {
    if k == 0 || k > MAX_COMPONENTS {
        return Err(Error::InvalidConfig(format!("need 1..={MAX_COMPONENTS} components, got {k}")));
    }
    Ok(())
}

fn product_at(xs: &[BigRational], n: u64) -> BigRational {
    let nn = rat_int(n);
    let mut acc = BigRational::one();
    for x in xs {
        acc *= nearest_dist(&(x * &nn));
        if acc.is_zero() {
            break;
        }
    }
    acc
}

/// `(min, argmin)` of `Π ‖n x_i‖` over `1 <= n <= q` by direct scan.
pub fn inner_min(xs: &[BigRational], q: u64) -> Result<(BigRational, u64)> {
    check_components(xs.len())?;
    if q == 0 {
        return Err(Error::Domain("Q must be positive".into()));
    }
    let best = (1..=q).into_par_iter().map(|n| (product_at(xs, n), n)).reduce_with(|a, b| if b < a { b } else { a }).unwrap();
    Ok(best)
}

/// Exact `Q · min_{1<=n<=Q} Π_i ‖n x_i‖`.
pub fn dmin(xs: &[BigRational], q: u64) -> Result<BigRational> {
    let (m, _) = inner_min(xs, q)?;
    Ok(rat_int(q) * m)
}

/// As [`dmin`] for large `Q`, by exact lattice search.
pub fn dmin_big(xs: &[BigRational], q: &BigInt) -> Result<BigRational> {
    let boxes: Vec<RatInterval> = xs.iter().cloned().map(RatInterval::point).collect();
    dmin_lower(&boxes, q)
}

/// Lower bound for `dmin` valid at every point of the box.
pub fn dmin_lower(boxes: &[RatInterval], q: &BigInt) -> Result<BigRational> {
    Ok(rat_int(q.clone()) * inner_min_lower(boxes, q)?.value)
}

pub fn inner_min_lower(boxes: &[RatInterval], q: &BigInt) -> Result<MinHit> {
    check_components(boxes.len())?;
    if !q.is_positive() {
        return Err(Error::Domain("Q must be positive".into()));
    }
    Ok(min_product(boxes, q, |_| true)?.expect("nonempty range"))
}

/// `(Q/Ψ(Q)) · min_{1<=n<=Q} Π ‖n x_i‖`.
pub fn weighted_min(xs: &[BigRational], q: u64, psi: &StepFunctionSpec) -> Result<BigRational> {
    let w = psi.eval_u64(q);
    if !w.is_positive() {
        return Err(Error::Domain("psi(Q) must be positive".into()));
    }
    let (m, _) = inner_min(xs, q)?;
    Ok(rat_int(q) / w * m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ProfileRow {
    #[serde(with = "crate::json::bigint_str")]
    pub Q: BigInt,
    #[serde(with = "crate::json::rational")]
    pub value: BigRational,
    #[serde(with = "crate::json::rational")]
    pub inner_min: BigRational,
    #[serde(with = "crate::json::bigint_str")]
    pub argmin: BigInt,
    /// Decimal rendering of `value`, approximate.
    pub approx: f64,
}

/// Evaluates each `Q` of an ascending list; exact at points, a lower bound on boxes.
pub fn profile(boxes: &[RatInterval], q_list: &[BigInt]) -> Result<Vec<ProfileRow>> {
    if q_list.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig("Q list must be ascending".into()));
    }
    q_list
        .iter()
        .map(|q| {
            let hit = inner_min_lower(boxes, q)?;
            let value = rat_int(q.clone()) * &hit.value;
            Ok(ProfileRow { Q: q.clone(), approx: crate::ratcore::to_f64(&value), value, inner_min: hit.value, argmin: hit.n })
        })
        .collect()
}

pub fn profile_points(xs: &[BigRational], q_list: &[BigInt]) -> Result<Vec<ProfileRow>> {
    let boxes: Vec<RatInterval> = xs.iter().cloned().map(RatInterval::point).collect();
    profile(&boxes, q_list)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratcore::rat;

    #[test]
    fn examples() {
        assert_eq!(dmin(&[rat(1, 2), rat(3, 7)], 2).unwrap(), rat(0, 1));
        assert_eq!(dmin(&[rat(2, 7), rat(3, 5)], 4).unwrap(), rat(4, 35));
        assert_eq!(inner_min(&[rat(2, 7), rat(3, 5)], 4).unwrap().1, 3);
        assert_eq!(dmin(&[rat(5, 13)], 1).unwrap(), rat(5, 13));
        assert!(dmin(&[], 3).is_err());
    }

    #[test]
    fn weighted() {
        let xs = [rat(2, 7), rat(3, 5)];
        assert_eq!(weighted_min(&xs, 4, &StepFunctionSpec::one()).unwrap(), rat(4, 35));
        assert_eq!(weighted_min(&xs, 4, &StepFunctionSpec::identity()).unwrap(), rat(1, 35));
        assert_eq!(weighted_min(&xs, 4, &StepFunctionSpec::ReciprocalLog).unwrap(), rat(8, 35));
    }

    #[test]
    fn lower_on_boxes() {
        let e = rat(1, 2_000_000);
        let boxes = [RatInterval::ball(&rat(2, 7), &e), RatInterval::ball(&rat(3, 5), &e)];
        let v = dmin_lower(&boxes, &BigInt::from(4)).unwrap();
        assert!(v <= rat(4, 35) && v >= rat(4, 35) - rat(1, 1000));
        let pts = [RatInterval::point(rat(2, 7)), RatInterval::point(rat(3, 5))];
        assert_eq!(dmin_lower(&pts, &BigInt::from(4)).unwrap(), rat(4, 35));
    }
}
