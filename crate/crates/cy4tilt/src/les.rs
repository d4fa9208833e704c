//! Interval dimensions and long exact sequences.
//!
//! A long exact sequence `… → V_{t-1} → V_t → V_{t+1} → …` is encoded by the
//! ranks of its maps: `dim V_t = r_t + r_{t+1}` where `r_t` is the rank of the
//! map into `V_t`. Dimensions and ranks are intervals, narrowed to a fixed point.

use std::fmt;

use serde::ser::SerializeTuple;
use serde::{Serialize, Serializer};

/// Closed interval of natural numbers; `hi = None` means unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DimInterval {
    pub lo: u64,
    pub hi: Option<u64>,
}

impl Serialize for DimInterval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&self.lo)?;
        t.serialize_element(&self.hi)?;
        t.end()
    }
}

impl fmt::Display for DimInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(h) if h == self.lo => write!(f, "{h}"),
            Some(h) => write!(f, "[{},{}]", self.lo, h),
            None => write!(f, "[{},∞)", self.lo),
        }
    }
}

impl DimInterval {
    pub const UNKNOWN: DimInterval = DimInterval { lo: 0, hi: None };
    pub const ZERO: DimInterval = DimInterval { lo: 0, hi: Some(0) };

    pub fn exact(n: u64) -> Self {
        DimInterval { lo: n, hi: Some(n) }
    }

    pub fn new(lo: u64, hi: Option<u64>) -> Self {
        DimInterval { lo, hi }
    }

    pub fn at_least(lo: u64) -> Self {
        DimInterval { lo, hi: None }
    }

    pub fn is_exact(&self) -> bool {
        self.hi == Some(self.lo)
    }

    pub fn value(&self) -> Option<u64> {
        if self.is_exact() {
            Some(self.lo)
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.hi == Some(0)
    }

    pub fn contains(&self, n: u64) -> bool {
        n >= self.lo && self.hi.is_none_or(|h| n <= h)
    }

    /// `self ⊆ other`.
    pub fn within(&self, other: &DimInterval) -> bool {
        self.lo >= other.lo
            && match (self.hi, other.hi) {
                (_, None) => true,
                (Some(a), Some(b)) => a <= b,
                (None, Some(_)) => false,
            }
    }

    /// Intersection, or `None` when empty.
    pub fn meet(&self, other: &DimInterval) -> Option<DimInterval> {
        let lo = self.lo.max(other.lo);
        let hi = match (self.hi, other.hi) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, None) => a,
            (None, b) => b,
        };
        if hi.is_some_and(|h| h < lo) {
            None
        } else {
            Some(DimInterval { lo, hi })
        }
    }

    pub fn add(&self, o: &DimInterval) -> DimInterval {
        DimInterval {
            lo: self.lo + o.lo,
            hi: match (self.hi, o.hi) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            },
        }
    }

    pub fn scale(&self, m: u64) -> DimInterval {
        if m == 0 {
            return DimInterval::ZERO;
        }
        DimInterval { lo: self.lo * m, hi: self.hi.map(|h| h * m) }
    }
}

/// Signed bounds used while narrowing: `lo` may go negative, `hi = None` is infinite.
#[derive(Clone, Copy, Debug)]
struct Span {
    lo: i128,
    hi: Option<i128>,
}

impl Span {
    fn of(d: &DimInterval) -> Span {
        Span { lo: d.lo as i128, hi: d.hi.map(|h| h as i128) }
    }
}

fn sub_hi(a: Option<i128>, b: i128) -> Option<i128> {
    a.map(|x| x - b)
}

/// Narrows `target` to `[lo, hi]` (clamped at zero). Returns `Err` if empty.
fn narrow(target: &mut DimInterval, lo: i128, hi: Option<i128>) -> Result<bool, ()> {
    let lo = lo.max(0) as u64;
    let hi = match hi {
        Some(h) if h < 0 => return Err(()),
        Some(h) => Some(h as u64),
        None => None,
    };
    match target.meet(&DimInterval { lo, hi }) {
        None => Err(()),
        Some(m) => {
            let changed = m != *target;
            *target = m;
            Ok(changed)
        }
    }
}

/// A summand `mult · entry` of a node in a sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Part {
    pub entry: usize,
    pub mult: u64,
}

/// A long exact sequence over entries of an external store.
#[derive(Clone, Debug)]
pub struct Chain {
    pub label: String,
    /// Each node is a direct sum of entries with multiplicities; empty means zero.
    pub nodes: Vec<Vec<Part>>,
    /// `ranks[t]` is the rank of the map into node `t`; `ranks[len]` leaves the last node.
    pub ranks: Vec<DimInterval>,
}

impl Chain {
    /// Sequence bounded by zeros on both sides.
    pub fn new(label: impl Into<String>, nodes: Vec<Vec<Part>>) -> Chain {
        let n = nodes.len();
        let mut ranks = vec![DimInterval::UNKNOWN; n + 1];
        ranks[0] = DimInterval::ZERO;
        ranks[n] = DimInterval::ZERO;
        Chain { label: label.into(), nodes, ranks }
    }

    /// Declares the map out of node `t` to be zero, i.e. the map into `t` is onto.
    pub fn set_onto(&mut self, t: usize) {
        self.ranks[t + 1] = DimInterval::ZERO;
    }

    fn node_value(&self, t: usize, store: &[DimInterval]) -> DimInterval {
        self.nodes[t]
            .iter()
            .fold(DimInterval::ZERO, |acc, p| acc.add(&store[p.entry].scale(p.mult)))
    }

    /// Pushes node bounds `[lo, hi]` back onto its entries.
    fn push_node(&self, t: usize, lo: i128, hi: Option<i128>, store: &mut [DimInterval]) -> Result<bool, ()> {
        let parts = &self.nodes[t];
        if parts.is_empty() {
            if lo > 0 {
                return Err(());
            }
            return Ok(false);
        }
        let mut changed = false;
        for (k, p) in parts.iter().enumerate() {
            if p.mult == 0 {
                continue;
            }
            let mut others_lo: i128 = 0;
            let mut others_hi: Option<i128> = Some(0);
            for (j, q) in parts.iter().enumerate() {
                if j == k {
                    continue;
                }
                let v = Span::of(&store[q.entry].scale(q.mult));
                others_lo += v.lo;
                others_hi = match (others_hi, v.hi) {
                    (Some(a), Some(b)) => Some(a + b),
                    _ => None,
                };
            }
            let m = p.mult as i128;
            // m·x ∈ [lo - others_hi, hi - others_lo]
            let x_lo = match others_hi {
                Some(oh) => div_ceil(lo - oh, m),
                None => 0,
            };
            let x_hi = sub_hi(hi, others_lo).map(|h| h.div_euclid(m));
            changed |= narrow(&mut store[p.entry], x_lo, x_hi)?;
        }
        Ok(changed)
    }

    /// One narrowing pass. `Ok(true)` if anything changed, `Err` on contradiction.
    pub fn propagate(&mut self, store: &mut [DimInterval]) -> Result<bool, String> {
        let n = self.nodes.len();
        let mut changed = false;
        let label = self.label.clone();
        let fail = |what: &str, t: usize| format!("{label}: empty interval at {what} {t}");
        for t in 0..n {
            let v = Span::of(&self.node_value(t, store));
            let b = Span::of(&self.ranks[t + 1]);
            // r_t ∈ [v.lo - b.hi, v.hi - b.lo], r_{t+1} likewise
            let ra_lo = b.hi.map_or(0, |bh| v.lo - bh);
            let ra_hi = sub_hi(v.hi, b.lo);
            let mut r = self.ranks[t];
            changed |= narrow(&mut r, ra_lo, ra_hi).map_err(|_| fail("rank", t))?;
            self.ranks[t] = r;
            let a = Span::of(&self.ranks[t]);
            let rb_lo = a.hi.map_or(0, |ah| v.lo - ah);
            let rb_hi = sub_hi(v.hi, a.lo);
            let mut r = self.ranks[t + 1];
            changed |= narrow(&mut r, rb_lo, rb_hi).map_err(|_| fail("rank", t + 1))?;
            self.ranks[t + 1] = r;
            let a = Span::of(&self.ranks[t]);
            let b = Span::of(&self.ranks[t + 1]);
            let n_lo = a.lo + b.lo;
            let n_hi = match (a.hi, b.hi) {
                (Some(x), Some(y)) => Some(x + y),
                _ => None,
            };
            changed |= self.push_node(t, n_lo, n_hi, store).map_err(|_| fail("node", t))?;
        }
        Ok(changed)
    }

    /// Whether every entry and rank is a single value.
    pub fn is_settled(&self, store: &[DimInterval]) -> bool {
        self.ranks.iter().all(|r| r.is_exact())
            && self.nodes.iter().flatten().all(|p| store[p.entry].is_exact())
    }
}

fn div_ceil(a: i128, m: i128) -> i128 {
    -((-a).div_euclid(m))
}

/// Linear constraint `Σ sign_k · entry_k = value` over natural-number entries.
#[derive(Clone, Debug)]
pub struct Alternating {
    pub label: String,
    pub terms: Vec<(usize, i64)>,
    pub value: i64,
}

impl Alternating {
    pub fn propagate(&self, store: &mut [DimInterval]) -> Result<bool, String> {
        let mut changed = false;
        for (k, &(e, c)) in self.terms.iter().enumerate() {
            // c·x_e = value - Σ_{j≠k} c_j x_j
            let mut rest_lo: i128 = 0;
            let mut rest_hi: Option<i128> = Some(0);
            for (j, &(f, d)) in self.terms.iter().enumerate() {
                if j == k {
                    continue;
                }
                let v = Span::of(&store[f]);
                let d = d as i128;
                let (lo, hi) = if d >= 0 {
                    (d * v.lo, v.hi.map(|h| d * h))
                } else {
                    (match v.hi {
                        Some(h) => d * h,
                        None => i128::MIN / 4,
                    }, Some(d * v.lo))
                };
                if lo == i128::MIN / 4 || rest_lo == i128::MIN / 4 {
                    rest_lo = i128::MIN / 4;
                } else {
                    rest_lo += lo;
                }
                rest_hi = match (rest_hi, hi) {
                    (Some(a), Some(b)) => Some(a + b),
                    _ => None,
                };
            }
            let val = self.value as i128;
            let c = c as i128;
            // c·x ∈ [val - rest_hi, val - rest_lo]
            let num_lo = rest_hi.map(|h| val - h);
            let num_hi = if rest_lo == i128::MIN / 4 { None } else { Some(val - rest_lo) };
            let (x_lo, x_hi) = if c > 0 {
                (num_lo.map_or(0, |l| div_ceil(l, c)), num_hi.map(|h| h.div_euclid(c)))
            } else {
                let c = -c;
                // -c·x ∈ [num_lo, num_hi]  ⇒  x ∈ [-num_hi/c, -num_lo/c]
                (num_hi.map_or(0, |h| div_ceil(-h, c)), num_lo.map(|l| (-l).div_euclid(c)))
            };
            changed |= narrow(&mut store[e], x_lo, x_hi)
                .map_err(|_| format!("{}: no solution for term {}", self.label, k))?;
        }
        Ok(changed)
    }
}

/// Equality of two entries.
pub fn propagate_equal(store: &mut [DimInterval], a: usize, b: usize) -> Result<bool, ()> {
    if a == b {
        return Ok(false);
    }
    let m = store[a].meet(&store[b]).ok_or(())?;
    let changed = m != store[a] || m != store[b];
    store[a] = m;
    store[b] = m;
    Ok(changed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(entry: usize) -> Vec<Part> {
        vec![Part { entry, mult: 1 }]
    }

    #[test]
    fn interval_basics() {
        let a = DimInterval::new(2, Some(5));
        assert!(a.contains(3));
        assert!(!a.contains(6));
        assert_eq!(a.meet(&DimInterval::new(4, None)), Some(DimInterval::new(4, Some(5))));
        assert_eq!(a.meet(&DimInterval::exact(9)), None);
        assert_eq!(DimInterval::at_least(1).to_string(), "[1,∞)");
        assert_eq!(DimInterval::exact(3).to_string(), "3");
    }

    // 0 → A → B → C → 0 with A = 1, B = 3 forces C = 2.
    #[test]
    fn short_exact_sequence_pins_cokernel() {
        let mut store = vec![DimInterval::exact(1), DimInterval::exact(3), DimInterval::UNKNOWN];
        let mut ch = Chain::new("ses", vec![p(0), p(1), p(2)]);
        while ch.propagate(&mut store).unwrap() {}
        assert_eq!(store[2], DimInterval::exact(2));
    }

    #[test]
    fn onto_map_kills_next() {
        // 0 → X → Y → Z with X → Y onto: Z then only receives from Y via rank 0.
        let mut store = vec![DimInterval::exact(2), DimInterval::UNKNOWN, DimInterval::exact(5)];
        let mut ch = Chain::new("onto", vec![p(0), p(1), p(2)]);
        ch.set_onto(1);
        let r = (|| {
            while ch.propagate(&mut store)? {}
            Ok::<_, String>(())
        })();
        // Z = 5 needs an incoming rank of 5 but the map into Z is zero.
        assert!(r.is_err());
    }

    #[test]
    fn multiplicity_division() {
        // 0 → 3·X → 6 → 0
        let mut store = vec![DimInterval::UNKNOWN, DimInterval::exact(6)];
        let mut ch = Chain::new("mult", vec![vec![Part { entry: 0, mult: 3 }], p(1)]);
        while ch.propagate(&mut store).unwrap() {}
        assert_eq!(store[0], DimInterval::exact(2));
    }

    #[test]
    fn alternating_sum() {
        let mut store = vec![DimInterval::exact(0), DimInterval::UNKNOWN, DimInterval::exact(0)];
        let c = Alternating { label: "chi".into(), terms: vec![(0, 1), (1, -1), (2, 1)], value: -3 };
        c.propagate(&mut store).unwrap();
        assert_eq!(store[1], DimInterval::exact(3));
        let bad = Alternating { label: "chi".into(), terms: vec![(0, 1), (1, -1), (2, 1)], value: 4 };
        assert!(bad.propagate(&mut store).is_err());
    }

    proptest! {
        // Sound: a genuine exact sequence stays feasible, and every interval keeps the true value.
        #[test]
        fn true_values_survive(ranks in proptest::collection::vec(0u64..5, 3..8), hide in proptest::collection::vec(any::<bool>(), 8)) {
            let n = ranks.len() - 1;
            let mut r = ranks.clone();
            r[0] = 0;
            r[n] = 0;
            let truth: Vec<u64> = (0..n).map(|t| r[t] + r[t + 1]).collect();
            let mut store: Vec<DimInterval> = truth
                .iter()
                .enumerate()
                .map(|(i, &v)| if hide[i] { DimInterval::UNKNOWN } else { DimInterval::exact(v) })
                .collect();
            let mut ch = Chain::new("rand", (0..n).map(p).collect());
            let mut before = store.clone();
            loop {
                let changed = ch.propagate(&mut store).unwrap();
                for (a, b) in store.iter().zip(&before) {
                    prop_assert!(a.within(b));
                }
                before = store.clone();
                if !changed { break; }
            }
            for (i, v) in truth.iter().enumerate() {
                prop_assert!(store[i].contains(*v));
            }
        }
    }
}
