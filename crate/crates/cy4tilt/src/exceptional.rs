//! Exceptional objects and collections on P², mutations, helices and threads.

use std::collections::{BTreeSet, VecDeque};

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::kclass::{self, euler_p2, euler_p2_int, ChernP2, Rational};
use crate::{Error, Result};

/// An exceptional sheaf class placed in cohomological degree `-shift`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcObject {
    pub label: String,
    #[serde(rename = "class")]
    pub cls: ChernP2,
    #[serde(default)]
    pub shift: i64,
}

impl ExcObject {
    /// Sheaf with a generated label.
    pub fn sheaf(cls: ChernP2) -> Self {
        ExcObject { label: name_of(&cls), cls, shift: 0 }
    }

    pub fn named(label: &str, cls: ChernP2) -> Self {
        ExcObject { label: label.to_string(), cls, shift: 0 }
    }

    pub fn line(k: i64) -> Self {
        ExcObject::sheaf(ChernP2::line(k))
    }

    pub fn omega(k: i64) -> Self {
        ExcObject::sheaf(ChernP2::omega(k))
    }

    /// Class in K-theory: `(-1)^shift · cls`.
    pub fn k_class(&self) -> ChernP2 {
        self.cls.scale(kclass::shift_sign(self.shift))
    }

    pub fn slope(&self) -> Rational {
        self.cls.slope().expect("exceptional classes have positive rank")
    }

    pub fn twisted(&self, k: i64) -> Self {
        let cls = kclass::twist(&self.cls, k);
        let label = match kclass::standard_name(&cls) {
            Some(n) => n,
            None if k == 0 => self.label.clone(),
            None => twist_label(&self.label, k),
        };
        ExcObject { label, cls, shift: self.shift }
    }

    /// Display form including the shift.
    pub fn display(&self) -> String {
        if self.shift == 0 {
            self.label.clone()
        } else {
            format!("{}[{}]", self.label, self.shift)
        }
    }
}

fn twist_label(label: &str, k: i64) -> String {
    // fold an existing trailing twist "(n)"
    if let Some(open) = label.rfind('(') {
        if label.ends_with(')') {
            if let Ok(n) = label[open + 1..label.len() - 1].parse::<i64>() {
                let total = n + k;
                return if total == 0 { label[..open].to_string() } else { format!("{}({total})", &label[..open]) };
            }
        }
    }
    format!("{label}({k})")
}

/// Standard name, or `E[r,d]` (an exceptional bundle is determined by rank and degree).
pub fn name_of(cls: &ChernP2) -> String {
    kclass::standard_name(cls).unwrap_or_else(|| format!("E[{},{}]", cls.r, cls.d))
}

/// Ordered exceptional collection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExcCollection(pub Vec<ExcObject>);

impl ExcCollection {
    pub fn new(objs: Vec<ExcObject>) -> Self {
        ExcCollection(objs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn classes(&self) -> Vec<ChernP2> {
        self.0.iter().map(|e| e.cls).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.0.iter().map(|e| e.display()).collect()
    }

    pub fn slopes(&self) -> Vec<Rational> {
        self.0.iter().map(|e| e.slope()).collect()
    }
}

fn normalize_result(k: ChernP2) -> Result<ExcObject> {
    if k.r == 0 {
        return Err(Error::Degenerate(format!("mutation produced rank-zero class {k}")));
    }
    let (cls, shift) = if k.r > 0 { (k, 0) } else { (-k, 1) };
    if !kclass::is_exceptional_class(&cls) {
        return Err(Error::NotExceptional(format!("mutation produced {cls} with χ ≠ 1")));
    }
    Ok(ExcObject { label: name_of(&cls), cls, shift })
}

fn check_exceptional(e: &ExcObject) -> Result<()> {
    if !kclass::is_exceptional_class(&e.cls) {
        return Err(Error::NotExceptional(format!("{} has χ(E,E) ≠ 1", e.display())));
    }
    Ok(())
}

/// `L_E X`, with K-class `χ(E, X)[E] - [X]`; the shift makes the rank positive.
pub fn left_mutation(e: &ExcObject, x: &ExcObject) -> Result<ExcObject> {
    check_exceptional(e)?;
    check_exceptional(x)?;
    let chi = euler_p2_int(&e.k_class(), &x.k_class())?;
    normalize_result(e.k_class().scale(chi) - x.k_class())
}

/// `R_E X`, with K-class `χ(X, E)[E] - [X]`.
pub fn right_mutation(e: &ExcObject, x: &ExcObject) -> Result<ExcObject> {
    check_exceptional(e)?;
    check_exceptional(x)?;
    let chi = euler_p2_int(&x.k_class(), &e.k_class())?;
    normalize_result(e.k_class().scale(chi) - x.k_class())
}

fn check_index(c: &ExcCollection, i: usize) -> Result<()> {
    if i == 0 || i >= c.len() {
        return Err(Error::InvalidClass(format!("mutation index {i} outside 1..{}", c.len() - 1)));
    }
    Ok(())
}

/// `σ_i`: `(…, E_{i-1}, E_i, …) ↦ (…, L_{E_{i-1}} E_i, E_{i-1}, …)`, `i ≥ 1`.
pub fn mutate_collection(c: &ExcCollection, i: usize) -> Result<ExcCollection> {
    check_index(c, i)?;
    let mut out = c.0.clone();
    let l = left_mutation(&c.0[i - 1], &c.0[i])?;
    out[i - 1] = l;
    out[i] = c.0[i - 1].clone();
    Ok(ExcCollection(out))
}

/// `σ_i⁻¹`: `(…, E_{i-1}, E_i, …) ↦ (…, E_i, R_{E_i} E_{i-1}, …)`.
pub fn unmutate_collection(c: &ExcCollection, i: usize) -> Result<ExcCollection> {
    check_index(c, i)?;
    let mut out = c.0.clone();
    let r = right_mutation(&c.0[i], &c.0[i - 1])?;
    out[i - 1] = c.0[i].clone();
    out[i] = r;
    Ok(ExcCollection(out))
}

/// Applies `σ_{i_1}`, then `σ_{i_2}`, …
pub fn mutate_word(c: &ExcCollection, word: &[usize]) -> Result<ExcCollection> {
    word.iter().try_fold(c.clone(), |acc, &i| mutate_collection(&acc, i))
}

/// `χ(E_i, E_i) = 1`, `χ(E_j, E_i) = 0` for `j > i`, and strictly increasing slopes.
pub fn is_exceptional_collection(c: &ExcCollection) -> bool {
    let n = c.len();
    for i in 0..n {
        if !kclass::is_exceptional_class(&c.0[i].cls) {
            return false;
        }
        for j in i + 1..n {
            if !euler_p2(&c.0[j].k_class(), &c.0[i].k_class()).is_zero() {
                return false;
            }
            if c.0[j].slope() <= c.0[i].slope() {
                return false;
            }
        }
    }
    true
}

/// `(a, b, c) = (χ(E_0,E_1), χ(E_1,E_2), χ(E_0,E_2))` for a triple of sheaves.
pub fn hom_dims(c: &ExcCollection) -> Result<(i64, i64, i64)> {
    if c.len() != 3 {
        return Err(Error::InvalidClass("hom_dims needs three objects".into()));
    }
    let e = c.classes();
    let a = euler_p2_int(&e[0], &e[1])?;
    let b = euler_p2_int(&e[1], &e[2])?;
    let cc = euler_p2_int(&e[0], &e[2])?;
    if a < 0 || b < 0 || cc < 0 {
        return Err(Error::NegativePairing(format!("({a}, {b}, {cc})")));
    }
    Ok((a, b, cc))
}

/// `a² + b² + c² = abc`.
pub fn is_markov(t: (i64, i64, i64)) -> bool {
    let (a, b, c) = t;
    a * a + b * b + c * c == a * b * c
}

/// `F_j = L_{E_0} ⋯ L_{E_{j-1}}(E_j)[j]`; satisfies `χ(E_i, F_j) = δ_ij` on K-classes.
pub fn dual_collection(c: &ExcCollection) -> Result<ExcCollection> {
    let mut out = vec![];
    for j in 0..c.len() {
        let mut k = c.0[j].k_class();
        for i in (0..j).rev() {
            let e = c.0[i].k_class();
            k = e.scale(euler_p2_int(&e, &k)?) - k;
        }
        // K(F_j) = (-1)^j k
        let (cls, shift) = if k.r > 0 { (k, j as i64) } else { (-k, j as i64 + 1) };
        if cls.r <= 0 || !kclass::is_exceptional_class(&cls) {
            return Err(Error::NotExceptional(format!("dual object {j} has class {cls}")));
        }
        out.push(ExcObject { label: name_of(&cls), cls, shift });
    }
    Ok(ExcCollection(out))
}

/// Periodic extension `E_{i+3} = E_i ⊗ O(3)` of a triple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Helix {
    pub base: ExcCollection,
}

impl Helix {
    pub fn new(base: ExcCollection) -> Self {
        Helix { base }
    }

    /// `E_i` for any integer `i`.
    pub fn object(&self, i: i64) -> ExcObject {
        let n = self.base.len() as i64;
        let (q, r) = (i.div_euclid(n), i.rem_euclid(n));
        self.base.0[r as usize].twisted(3 * q)
    }
}

/// `(E_i, E_{i+1}, E_{i+2})`.
pub fn helix_thread(h: &Helix, i: i64) -> ExcCollection {
    ExcCollection((0..h.base.len() as i64).map(|k| h.object(i + k)).collect())
}

/// `μ(E_last) - μ(E_first)`.
pub fn thread_gap(c: &ExcCollection) -> Rational {
    c.0.last().expect("non-empty").slope() - c.0[0].slope()
}

/// A strong exceptional triple of sheaves with gap at most 2 pulls back to a tilting bundle.
pub fn is_tilting(c: &ExcCollection) -> bool {
    is_exceptional_collection(c) && hom_dims(c).is_ok() && thread_gap(c) <= Rational::from_integer(2)
}

/// Smallest `|i| ≤ 2` (non-negative first on ties) whose thread is tilting.
pub fn find_tilting_thread(c: &ExcCollection) -> Option<i64> {
    let h = Helix::new(c.clone());
    [0, 1, -1, 2, -2].into_iter().find(|&i| is_tilting(&helix_thread(&h, i)))
}

/// All collections reachable by words in `σ_1, σ_2` of length at most `depth`.
pub fn mutation_orbit(c: &ExcCollection, depth: usize) -> Result<Vec<ExcCollection>> {
    let key = |c: &ExcCollection| c.classes();
    let mut seen: BTreeSet<Vec<ChernP2>> = BTreeSet::new();
    let mut out = vec![];
    let mut queue = VecDeque::from([(c.clone(), 0usize)]);
    seen.insert(key(c));
    out.push(c.clone());
    while let Some((cur, d)) = queue.pop_front() {
        if d == depth {
            continue;
        }
        for i in 1..cur.len() {
            let next = mutate_collection(&cur, i)?;
            if seen.insert(key(&next)) {
                out.push(next.clone());
                queue.push_back((next, d + 1));
            }
        }
    }
    Ok(out)
}

/// `(O, O(1), O(2))`.
pub fn line_bundles() -> ExcCollection {
    ExcCollection(vec![ExcObject::line(0), ExcObject::line(1), ExcObject::line(2)])
}

/// `(Ω(1), O, O(2))`.
pub fn omega_example() -> ExcCollection {
    ExcCollection(vec![ExcObject::omega(1), ExcObject::line(0), ExcObject::line(2)])
}

/// `(O(-2), O(-1), O)`, whose heart is the reference heart `A`.
pub fn heart_a_collection() -> ExcCollection {
    ExcCollection(vec![ExcObject::line(-2), ExcObject::line(-1), ExcObject::line(0)])
}

/// `(O(-3), P, Ω(-1))` with `P = L_{Ω(-1)} O(-2)`.
pub fn p_collection() -> ExcCollection {
    ExcCollection(vec![
        ExcObject::line(-3),
        ExcObject::named("P", ChernP2::omega(-1).scale(3) - ChernP2::line(-2)),
        ExcObject::omega(-1),
    ])
}

/// Exceptional check on a single class, exposed for the CLI.
pub fn is_exceptional(e: &ExcObject) -> bool {
    kclass::is_exceptional_class(&e.cls) && euler_p2(&e.cls, &e.cls).is_one()
}
