//! Brute-force maximization over all subsets, for ground sets up to 22
//! elements.
//!
//! The search space is split by the high bits of the bitmask. Each chunk
//! walks its low bits in Gray-code order so functions with an incremental
//! evaluator (graph cuts) pay O(degree) per subset. Chunk winners are merged
//! in chunk order, so the result does not depend on scheduling.

use crate::error::{Error, Result};
use crate::par;
use crate::polytope::Polytope;
use crate::setfn::Oracle;
use crate::subset::Subset;

pub const BRUTE_LIMIT: usize = 22;

/// Values within this distance count as tied; ties go to the smaller mask.
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CardinalityMode {
    /// `|S| = k`
    Eq,
    /// `|S| <= k`
    Le,
}

#[derive(Debug, Clone, Copy)]
struct Best {
    value: f64,
    mask: u64,
}

impl Best {
    fn offer(&mut self, value: f64, mask: u64) {
        let better = value > self.value + TIE_TOL || (value >= self.value - TIE_TOL && mask < self.mask);
        if self.mask == u64::MAX || better {
            *self = Best { value, mask };
        }
    }
}

fn search<A>(f: &Oracle, admit: A) -> Result<Option<(Subset, f64)>>
where
    A: Fn(u64) -> bool + Sync + Send,
{
    let n = f.n();
    if n > BRUTE_LIMIT {
        return Err(Error::TooLarge {
            what: "brute-force search",
            n,
            limit: BRUTE_LIMIT,
        });
    }
    let high = n.min(6);
    let low = n - high;
    let chunks = par::map_range(1usize << high, |c| {
        let prefix = (c as u64) << low;
        let mut best = Best {
            value: f64::NEG_INFINITY,
            mask: u64::MAX,
        };
        let func = f.function();
        let mut walker = func.incremental();
        let mut mask = prefix;
        let mut value = match walker.as_mut() {
            Some(w) => w.reset(&Subset::from_mask(n, mask)),
            None => func.value(&Subset::from_mask(n, mask)),
        };
        if admit(mask) {
            best.offer(value, mask);
        }
        for i in 1u64..(1u64 << low) {
            let bit = i.trailing_zeros() as usize;
            mask ^= 1 << bit;
            if let Some(w) = walker.as_mut() {
                value = w.toggle(bit);
                if admit(mask) {
                    best.offer(value, mask);
                }
            } else if admit(mask) {
                best.offer(func.value(&Subset::from_mask(n, mask)), mask);
            }
        }
        best
    });
    f.charge(1u64 << n);
    let mut best = Best {
        value: f64::NEG_INFINITY,
        mask: u64::MAX,
    };
    for c in chunks {
        if c.mask != u64::MAX {
            best.offer(c.value, c.mask);
        }
    }
    if best.mask == u64::MAX {
        return Ok(None);
    }
    let s = Subset::from_mask(n, best.mask);
    let v = f.eval(&s);
    Ok(Some((s, v)))
}

/// `argmax_S f(S)`.
pub fn brute_unconstrained(f: &Oracle) -> Result<(Subset, f64)> {
    Ok(search(f, |_| true)?.expect("the empty set is admissible"))
}

/// `argmax f(S)` over `|S| = k` or `|S| <= k`.
pub fn brute_cardinality(f: &Oracle, k: usize, mode: CardinalityMode) -> Result<(Subset, f64)> {
    let n = f.n();
    if k > n && mode == CardinalityMode::Eq {
        return Err(Error::InvalidArgument(format!(
            "no subset of size {k} in a ground set of {n}"
        )));
    }
    let found = match mode {
        CardinalityMode::Eq => search(f, |m| m.count_ones() as usize == k)?,
        CardinalityMode::Le => search(f, |m| m.count_ones() as usize <= k)?,
    };
    Ok(found.expect("some subset has the requested size"))
}

/// `argmax f(S)` over `{S : 1_S ∈ P}`.
pub fn brute_polytope_integral(f: &Oracle, p: &Polytope) -> Result<(Subset, f64)> {
    if p.n() != f.n() {
        return Err(Error::InvalidArgument("polytope and function disagree on n".into()));
    }
    Ok(search(f, |m| p.admits_mask(m))?.expect("the empty set is in every down-monotone polytope"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfn::{hardness_instance, Coverage, FromFn, GraphCut};

    fn triangle() -> Oracle {
        Oracle::new(GraphCut::new(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap())
    }

    /// Independent oracle: plain loop over masks with `Oracle::eval`.
    fn naive(f: &Oracle, admit: impl Fn(u64) -> bool) -> f64 {
        (0..1u64 << f.n())
            .filter(|&m| admit(m))
            .map(|m| f.eval(&Subset::from_mask(f.n(), m)))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn unconstrained_examples() {
        assert_eq!(brute_unconstrained(&triangle()).unwrap().1, 2.0);
        let zero = Oracle::new(FromFn::new(4, true, |_| 0.0));
        let (s, v) = brute_unconstrained(&zero).unwrap();
        assert!(s.is_empty());
        assert_eq!(v, 0.0);
        let edge = Oracle::new(GraphCut::new(2, vec![(0, 1, 1.0)]).unwrap());
        let (s, v) = brute_unconstrained(&edge).unwrap();
        assert_eq!((s.to_vec(), v), (vec![0], 1.0));
    }

    #[test]
    fn cardinality_examples() {
        assert_eq!(brute_cardinality(&triangle(), 1, CardinalityMode::Eq).unwrap().1, 2.0);
        let (s, v) = brute_cardinality(&triangle(), 0, CardinalityMode::Eq).unwrap();
        assert!(s.is_empty() && v == 0.0);
        let h = hardness_instance(1, 2).unwrap();
        assert_eq!(brute_cardinality(&h, 2, CardinalityMode::Eq).unwrap().1, 1.0);
    }

    #[test]
    fn polytope_examples() {
        let t = triangle();
        let ks = Polytope::knapsack(vec![1.0, 1.0, 3.0], 2.0).unwrap();
        assert_eq!(brute_polytope_integral(&t, &ks).unwrap().1, 2.0);
        let card = Polytope::cardinality(3, 2).unwrap();
        assert_eq!(
            brute_polytope_integral(&t, &card).unwrap(),
            brute_cardinality(&t, 2, CardinalityMode::Le).unwrap()
        );
        let all = Polytope::cardinality(3, 3).unwrap();
        assert_eq!(
            brute_polytope_integral(&t, &all).unwrap(),
            brute_unconstrained(&t).unwrap()
        );
    }

    #[test]
    fn rejects_large_n() {
        let f = Oracle::new(GraphCut::new(23, vec![(0, 1, 1.0)]).unwrap());
        assert!(matches!(brute_unconstrained(&f), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn agrees_with_naive_enumeration_and_orders() {
        let g = Oracle::new(
            GraphCut::new(
                9,
                vec![
                    (0, 1, 1.5),
                    (1, 2, 0.5),
                    (2, 3, 2.0),
                    (3, 4, 1.0),
                    (4, 5, 0.7),
                    (5, 6, 1.2),
                    (6, 7, 0.3),
                    (7, 8, 2.2),
                    (8, 0, 0.9),
                    (2, 6, 1.1),
                ],
            )
            .unwrap(),
        );
        let cov = Oracle::new(
            Coverage::new(
                8,
                vec![1.0, 2.0, 0.5, 3.0],
                vec![
                    vec![0, 1],
                    vec![1],
                    vec![2, 3],
                    vec![0],
                    vec![3],
                    vec![2],
                    vec![1, 3],
                    vec![0, 2],
                ],
            )
            .unwrap(),
        );
        for f in [&g, &cov] {
            let n = f.n();
            let u = brute_unconstrained(f).unwrap().1;
            assert!((u - naive(f, |_| true)).abs() < 1e-12);
            for k in 0..=n {
                let eq = brute_cardinality(f, k, CardinalityMode::Eq).unwrap().1;
                let le = brute_cardinality(f, k, CardinalityMode::Le).unwrap().1;
                assert!((eq - naive(f, |m| m.count_ones() as usize == k)).abs() < 1e-12);
                assert!(eq <= le + 1e-12 && le <= u + 1e-12);
            }
        }
    }

    #[test]
    fn ties_go_to_smallest_mask() {
        let edge = Oracle::new(GraphCut::new(2, vec![(0, 1, 1.0)]).unwrap());
        // {0} (mask 1) and {1} (mask 2) tie
        assert_eq!(brute_unconstrained(&edge).unwrap().0.mask(), 1);
    }
}
