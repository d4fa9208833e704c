//! Ext groups on `X = Tot(Ω_P²)`.
//!
//! Objects supported on the zero section are pushforwards `s_*A[p]`; their
//! Ext groups reduce to P² cohomology through the Koszul formula
//! `s^*s_*A = ⊕_k A ⊗ ∧^k T[k]`. Pullbacks `π^*E` have Ext groups
//! `⊕_n H^*(E^∨ ⊗ F ⊗ SⁿT)`. [`ExtProblem`] narrows unknown Ext dimensions
//! between objects built from such atoms by exact triangles.

use std::collections::BTreeMap;
use std::fmt;

use num::integer::Integer;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::cohomology::{FactStore, GradedDims, Monomial};
use crate::exceptional::ExcObject;
use crate::kclass::{self, q, ChernP2, Rational};
use crate::les::{propagate_equal, Alternating, Chain, DimInterval, Part};
use crate::{Error, Result};

/// `s_*A[p]` for a bundle `A` on P² given by its class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PushforwardAtom {
    pub label: String,
    #[serde(rename = "class")]
    pub base: ChernP2,
    pub shift: i64,
}

impl PushforwardAtom {
    pub fn new(label: &str, base: ChernP2, shift: i64) -> Self {
        PushforwardAtom { label: label.to_string(), base, shift }
    }

    /// `s_*E[shift]` for an exceptional object on P².
    pub fn of(e: &ExcObject) -> Self {
        PushforwardAtom { label: e.label.clone(), base: e.cls, shift: e.shift }
    }

    /// Class in `K_0(P²) ≅ K_0(D^b_0(X))`.
    pub fn k_class(&self) -> ChernP2 {
        self.base.scale(kclass::shift_sign(self.shift))
    }

    pub fn shifted(&self, n: i64) -> Self {
        PushforwardAtom { shift: self.shift + n, ..self.clone() }
    }

    pub fn display(&self) -> String {
        if self.shift == 0 {
            format!("s_*{}", self.label)
        } else {
            format!("s_*{}[{}]", self.label, self.shift)
        }
    }
}

/// `dim Ext^i` for `i = 0..4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GradedExtX {
    pub dims: [DimInterval; 5],
}

impl Serialize for GradedExtX {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("GradedExtX", 2)?;
        st.serialize_field("dims", &self.dims)?;
        st.serialize_field("exact", &self.dims.map(|d| d.is_exact()))?;
        st.end()
    }
}

impl fmt::Display for GradedExtX {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl GradedExtX {
    pub fn exact(v: [u64; 5]) -> Self {
        GradedExtX { dims: v.map(DimInterval::exact) }
    }

    pub fn zero() -> Self {
        GradedExtX { dims: [DimInterval::ZERO; 5] }
    }

    pub fn is_exact(&self) -> bool {
        self.dims.iter().all(|d| d.is_exact())
    }

    pub fn values(&self) -> Option<[u64; 5]> {
        let mut out = [0; 5];
        for (o, d) in out.iter_mut().zip(&self.dims) {
            *o = d.value()?;
        }
        Some(out)
    }

    /// `Σ (-1)^i dim Ext^i` when exact.
    pub fn euler(&self) -> Option<i64> {
        let v = self.values()?;
        Some(v.iter().enumerate().map(|(i, &x)| if i % 2 == 0 { x as i64 } else { -(x as i64) }).sum())
    }
}

/// Serre duality on a Calabi-Yau fourfold: `Ext^i(a, b) ≅ Ext^{4-i}(b, a)^*`.
pub fn serre_dual_x(g: &GradedExtX) -> GradedExtX {
    let mut dims = g.dims;
    dims.reverse();
    GradedExtX { dims }
}

/// `χ_X(s_*a, s_*b) = Σ_k (-1)^k χ_P²(a ⊗ ∧^k T, b)` on K-classes.
pub fn euler_x0(a: &ChernP2, b: &ChernP2) -> i64 {
    let koszul = ChernP2::line(0) - ChernP2::omega(0) + ChernP2::line(-3);
    let x = kclass::euler_p2(a, &kclass::tensor(b, &koszul));
    debug_assert!(x.is_integer());
    x.to_integer()
}

/// The Mukai flop involution on simple labels of the reference heart.
pub fn mukai_involution(j: usize) -> usize {
    2 - j
}

/// Coordinates of `x` in a basis of three K-classes, if integral.
pub fn coordinates(basis: &[ChernP2], x: &ChernP2) -> Option<Vec<i64>> {
    if basis.len() != 3 {
        return None;
    }
    let col = |c: &ChernP2| [Rational::from_integer(c.r), Rational::from_integer(c.d), c.s];
    let m: Vec<[Rational; 3]> = basis.iter().map(col).collect();
    let det3 = |a: [Rational; 3], b: [Rational; 3], c: [Rational; 3]| {
        a[0] * (b[1] * c[2] - b[2] * c[1]) - b[0] * (a[1] * c[2] - a[2] * c[1]) + c[0] * (a[1] * b[2] - a[2] * b[1])
    };
    let d = det3(m[0], m[1], m[2]);
    if d == Rational::from_integer(0) {
        return None;
    }
    let v = col(x);
    let sol = [det3(v, m[1], m[2]) / d, det3(m[0], v, m[2]) / d, det3(m[0], m[1], v) / d];
    sol.iter().map(|t| t.is_integer().then(|| t.to_integer())).collect()
}

/// Integer matrix expressing `new` in terms of `old`; `None` if not integral.
pub fn base_change(old: &[ChernP2], new: &[ChernP2]) -> Option<Vec<Vec<i64>>> {
    new.iter().map(|c| coordinates(old, c)).collect()
}

pub fn det3(m: &[Vec<i64>]) -> i64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn monomial(store: &mut FactStore, label: &str, c: &ChernP2) -> Result<Monomial> {
    store.register_generator(label, c)
}

/// `H^*(A^∨ ⊗ B ⊗ ∧^k Ω)` for `k = 0, 1, 2`.
pub fn koszul_components(store: &mut FactStore, a: &PushforwardAtom, b: &PushforwardAtom) -> Result<[GradedDims; 3]> {
    let ma = monomial(store, &a.label, &a.base)?;
    let mb = monomial(store, &b.label, &b.base)?;
    let g = ma.dual().expect("exceptional bundles have duals").tensor(&mb);
    let c0 = store.compute(&g)?;
    let c1 = store.compute(&g.tensor(&Monomial::omega_twist(0)))?;
    let c2 = store.compute(&g.twisted(-3))?;
    Ok([c0, c1, c2])
}

/// `Ext^i_X(s_*A[p], s_*B[q]) = ⊕_k H^{i+q-p-k}(A^∨ ⊗ B ⊗ ∧^k Ω)`, for every `i`
/// in the support `[p-q, p-q+4]`.
pub fn koszul_series(store: &mut FactStore, a: &PushforwardAtom, b: &PushforwardAtom) -> Result<BTreeMap<i64, DimInterval>> {
    let comps = koszul_components(store, a, b)?;
    let base = a.shift - b.shift;
    let mut out: BTreeMap<i64, DimInterval> = (base..=base + 4).map(|i| (i, DimInterval::ZERO)).collect();
    for (k, c) in comps.iter().enumerate() {
        for (p, d) in c.0.iter().enumerate() {
            let i = base + (p + k) as i64;
            let e = out.get_mut(&i).expect("in support");
            *e = e.add(d);
        }
    }
    Ok(out)
}

/// Degrees `0..4` of [`koszul_series`]; fails if the series may leave that window.
pub fn koszul_ext(store: &mut FactStore, a: &PushforwardAtom, b: &PushforwardAtom) -> Result<GradedExtX> {
    let s = koszul_series(store, a, b)?;
    let mut g = GradedExtX::zero();
    for (i, d) in s {
        if (0..5).contains(&i) {
            g.dims[i as usize] = d;
        } else if !d.is_zero() {
            return Err(Error::NotApplicable(format!(
                "Ext^{i}({}, {}) ∈ {d} lies outside degrees 0..4",
                a.display(),
                b.display()
            )));
        }
    }
    Ok(g)
}

/// Pullback Ext with its truncation certificate.
#[derive(Clone, Debug, Serialize)]
pub struct PullbackExt {
    pub ext: GradedExtX,
    /// Summands `n < truncation` are computed; the rest vanish in degrees ≥ 1.
    pub truncation: u32,
    /// Degree 0 is summed over `n ≤ n_max` and reported as a lower bound.
    pub n_max: u32,
    pub certificate: Vec<String>,
}

/// `Ext^k_X(π^*E, π^*F) = ⊕_{n≥0} H^k(E^∨ ⊗ F ⊗ SⁿT)`.
///
/// `E` and `F` must be sheaves in one full exceptional collection (or in its
/// helix). With `gap = μ(E) - μ(F)`:
/// * `gap ≤ 2`: `H^{>0}(E^∨ ⊗ F(m)) = 0` for every `m ≥ 0`, so degrees ≥ 1 vanish;
/// * `2 < gap < 3`: `F(3)` follows `E` in the helix with slope difference
///   `gap - 3 < 0`, so `H^{>0}(E^∨ ⊗ F(m)) = 0` for `m ≥ 3`; for `m < gap` the
///   slopes kill `h⁰` and `h²`. Summands `n ≥ 4` vanish in degrees ≥ 1.
/// * `gap ≥ 3` cannot occur inside a collection and is refused.
pub fn pullback_ext(store: &mut FactStore, e: &ExcObject, f: &ExcObject, n_max: u32) -> Result<PullbackExt> {
    if e.shift != 0 || f.shift != 0 {
        return Err(Error::NotApplicable("pullback Ext needs sheaves".into()));
    }
    let me = monomial(store, &e.label, &e.cls)?;
    let mf = monomial(store, &f.label, &f.cls)?;
    let g = me.dual().expect("exceptional bundles have duals").tensor(&mf);
    let gap = e.slope() - f.slope();
    let mut cert = vec![];
    let three = Rational::from_integer(3);
    if gap >= three {
        return Err(Error::TailNotCertified(format!(
            "μ({}) - μ({}) = {gap} ≥ 3: no vanishing certificate",
            e.label, f.label
        )));
    }
    // smallest n with gap - 3n/2 < -3, at least 3
    let formula = ((gap + three) / q(3, 2)).floor().to_integer() + 1;
    let n0 = formula.max(3) as u32;
    let first_vanishing = if gap <= Rational::from_integer(2) {
        cert.push(format!(
            "μ({}) - μ({}) = {gap} ≤ 2: H^{{>0}}({}^∨⊗{}(m)) = 0 for m ≥ 0",
            e.label, f.label, e.label, f.label
        ));
        0
    } else {
        cert.push(format!(
            "μ({}) - μ({}) = {gap} ∈ (2, 3): helix pair gives H^{{>0}}({}^∨⊗{}(m)) = 0 for m ≥ 3",
            e.label, f.label, e.label, f.label
        ));
        3
    };
    let top = n_max.max(n0) as i64;
    for m in first_vanishing..=top {
        store.register_fact(
            &g.twisted(m),
            GradedDims([DimInterval::UNKNOWN, DimInterval::ZERO, DimInterval::ZERO]),
            "vanishing for pairs in an exceptional collection",
        )?;
    }
    let summand = |n: u32| -> Monomial {
        match n {
            0 => g.clone(),
            1 => g.tensor(&Monomial::omega_twist(3)),
            _ => {
                let mut s = g.clone();
                s.sym.push(n);
                s.sym.sort_unstable();
                s
            }
        }
    };
    let mut ext = GradedExtX::zero();
    let mut deg0 = DimInterval::ZERO;
    for n in 0..=n_max.max(n0) {
        let h = store.compute(&summand(n))?;
        if n <= n_max {
            deg0 = deg0.add(&h.0[0]);
        }
        if n < n0 {
            for k in 1..3 {
                ext.dims[k] = ext.dims[k].add(&h.0[k]);
            }
        } else if !(h.0[1].is_zero() && h.0[2].is_zero()) {
            return Err(Error::Inconsistent(format!("summand n = {n} does not vanish: {h}")));
        }
    }
    cert.push(format!("summands n ≥ {n0} vanish in degrees ≥ 1; degrees 3, 4 vanish since π is affine"));
    cert.push(format!("degree 0 summed over n ≤ {n_max}: lower bound"));
    ext.dims[0] = DimInterval::at_least(deg0.lo);
    for k in 1..3 {
        if !ext.dims[k].is_exact() {
            return Err(Error::TailNotCertified(format!(
                "Ext^{k}(π^*{}, π^*{}) ∈ {} is not pinned by the summands n < {n0}",
                e.label, f.label, ext.dims[k]
            )));
        }
    }
    Ok(PullbackExt { ext, truncation: n0, n_max, certificate: cert })
}

/// Like [`pullback_ext`] but keeps unpinned degrees as intervals instead of failing.
pub fn pullback_ext_bounds(store: &mut FactStore, e: &ExcObject, f: &ExcObject, n_max: u32) -> Result<GradedExtX> {
    match pullback_ext(store, e, f, n_max) {
        Ok(p) => Ok(p.ext),
        Err(Error::TailNotCertified(msg)) if msg.contains("not pinned") => {
            let me = monomial(store, &e.label, &e.cls)?;
            let mf = monomial(store, &f.label, &f.cls)?;
            let g = me.dual().expect("dual").tensor(&mf);
            let mut ext = GradedExtX::zero();
            ext.dims[0] = DimInterval::UNKNOWN;
            for n in 0..4u32 {
                let m = match n {
                    0 => g.clone(),
                    1 => g.tensor(&Monomial::omega_twist(3)),
                    _ => {
                        let mut s = g.clone();
                        s.sym.push(n);
                        s
                    }
                };
                let h = store.compute(&m)?;
                for k in 1..3 {
                    ext.dims[k] = ext.dims[k].add(&h.0[k]);
                }
            }
            Ok(ext)
        }
        Err(other) => Err(other),
    }
}

// ---------------------------------------------------------------------------
// Interval Ext solver

/// An object `obj[shift]` of an [`ExtProblem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjRef {
    pub obj: usize,
    pub shift: i64,
}

impl ObjRef {
    pub fn new(obj: usize, shift: i64) -> Self {
        ObjRef { obj, shift }
    }
}

/// An unshifted object with its K-class and cohomological amplitude
/// `[lo, hi]` relative to a reference heart.
#[derive(Clone, Debug)]
pub struct ObjInfo {
    pub name: String,
    pub class: ChernP2,
    pub amp: (i64, i64),
}

/// Universal property of the connecting map of a triangle `a → b → c → a[1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Universality {
    None,
    /// `Ext⁰(s, c) → Ext¹(s, a)` is onto.
    Eval(ObjRef),
    /// `Ext⁰(a, s) → Ext¹(c, s)` is onto.
    Coeval(ObjRef),
}

/// Exact triangle `a → b → c → a[1]` with direct-sum vertices.
#[derive(Clone, Debug)]
pub struct Triangle {
    pub label: String,
    pub a: Vec<(ObjRef, u64)>,
    pub b: Vec<(ObjRef, u64)>,
    pub c: Vec<(ObjRef, u64)>,
    pub universal: Universality,
}

/// Unknown Ext dimensions between objects plus the rules relating them.
#[derive(Clone, Debug)]
pub struct ExtProblem {
    pub objects: Vec<ObjInfo>,
    /// Ext vanishes above this degree between objects of amplitude `[0, 0]`.
    pub dim: i64,
    /// Calabi-Yau Serre duality `Ext^i(x, y) = Ext^{dim-i}(y, x)`.
    pub serre: bool,
    /// `Σ (-1)^i ext^i(x, y) = euler_x0([x], [y])`.
    pub euler: bool,
    pub explain: bool,
    facts: Vec<(ObjRef, ObjRef, i64, DimInterval, String)>,
    triangles: Vec<Triangle>,
    equal_pairs: Vec<((usize, usize), (usize, usize), String)>,
    schur: Vec<(String, Vec<ObjRef>)>,
}

impl ExtProblem {
    pub fn new(dim: i64) -> Self {
        ExtProblem {
            objects: vec![],
            dim,
            serre: false,
            euler: false,
            explain: false,
            facts: vec![],
            triangles: vec![],
            equal_pairs: vec![],
            schur: vec![],
        }
    }

    pub fn add_object(&mut self, name: &str, class: ChernP2, amp: (i64, i64)) -> usize {
        self.objects.push(ObjInfo { name: name.to_string(), class, amp });
        self.objects.len() - 1
    }

    /// `Ext^i(x, y) ∈ d`.
    pub fn add_fact(&mut self, x: ObjRef, y: ObjRef, i: i64, d: DimInterval, why: &str) {
        self.facts.push((x, y, i, d, why.to_string()));
    }

    pub fn add_triangle(&mut self, t: Triangle) {
        self.triangles.push(t);
    }

    /// `Ext^•(x, y) = Ext^•(x', y')`.
    pub fn add_equal_pair(&mut self, xy: (usize, usize), xy2: (usize, usize), why: &str) {
        self.equal_pairs.push((xy, xy2, why.to_string()));
    }

    /// Simples of one heart: no negative Ext, and `Hom(S_a, S_b) = δ_ab`.
    pub fn add_schur_group(&mut self, label: &str, simples: Vec<ObjRef>) {
        self.schur.push((label.to_string(), simples));
    }

    /// Degrees in which `Ext(x, y)` may be nonzero.
    pub fn range(&self, x: usize, y: usize) -> (i64, i64) {
        let (ax, ay) = (self.objects[x].amp, self.objects[y].amp);
        (ay.0 - ax.1, ay.1 - ax.0 + self.dim)
    }

    pub fn name(&self, r: &ObjRef) -> String {
        let n = &self.objects[r.obj].name;
        if r.shift == 0 {
            n.clone()
        } else {
            format!("{n}[{}]", r.shift)
        }
    }

    /// Narrows all unknowns to a fixed point.
    pub fn solve(&self) -> Result<ExtSolution> {
        let n = self.objects.len();
        let mut offsets = vec![vec![0usize; n]; n];
        // entry 0 is the constant zero
        let mut store = vec![DimInterval::ZERO];
        let mut names = vec!["0".to_string()];
        for x in 0..n {
            for y in 0..n {
                let (lo, hi) = self.range(x, y);
                offsets[x][y] = store.len();
                for i in lo..=hi {
                    store.push(DimInterval::UNKNOWN);
                    names.push(format!("Ext^{i}({}, {})", self.objects[x].name, self.objects[y].name));
                }
            }
        }
        let sol = ExtSolution { ranges: (0..n).map(|x| (0..n).map(|y| self.range(x, y)).collect()).collect(), offsets, store, names, trace: vec![], objects: self.objects.clone() };
        self.run(sol)
    }

    fn run(&self, mut sol: ExtSolution) -> Result<ExtSolution> {
        let n = self.objects.len();
        let incons = |why: String| Error::Inconsistent(why);
        // facts
        for (x, y, i, d, why) in &self.facts {
            let e = sol.entry(*x, *y, *i);
            let cur = sol.store[e];
            let m = cur.meet(d).ok_or_else(|| {
                incons(format!("{why}: Ext^{i}({}, {}) ∈ {d} contradicts {cur}", self.name(x), self.name(y)))
            })?;
            if e != 0 {
                sol.store[e] = m;
            }
            if self.explain && m != cur {
                sol.trace.push(format!("{why}: Ext^{i}({}, {}) ∈ {m}", self.name(x), self.name(y)));
            }
        }
        // Schur and range rules
        for (label, simples) in &self.schur {
            for (ia, a) in simples.iter().enumerate() {
                for (ib, b) in simples.iter().enumerate() {
                    let (lo, hi) = sol.ranges[a.obj][b.obj];
                    for j in lo..=hi {
                        let i = j - b.shift + a.shift;
                        let want = if i < 0 || i > self.dim {
                            Some(DimInterval::ZERO)
                        } else if i == 0 {
                            Some(DimInterval::exact(u64::from(ia == ib)))
                        } else {
                            None
                        };
                        if let Some(w) = want {
                            let e = sol.entry(*a, *b, i);
                            let cur = sol.store[e];
                            let m = cur.meet(&w).ok_or_else(|| {
                                incons(format!(
                                    "Schur rule in {label}: Ext^{i}({}, {}) ∈ {cur}",
                                    self.name(a),
                                    self.name(b)
                                ))
                            })?;
                            sol.store[e] = m;
                        }
                    }
                }
            }
        }
        // Serre
        let mut equal: Vec<(usize, usize)> = vec![];
        if self.serre {
            for x in 0..n {
                for y in 0..n {
                    let (lo, hi) = sol.ranges[x][y];
                    for i in lo..=hi {
                        equal.push((sol.entry(ObjRef::new(x, 0), ObjRef::new(y, 0), i), sol.entry(ObjRef::new(y, 0), ObjRef::new(x, 0), self.dim - i)));
                    }
                }
            }
        }
        for ((x, y), (x2, y2), _) in &self.equal_pairs {
            let (lo, hi) = sol.ranges[*x][*y];
            let (lo2, hi2) = sol.ranges[*x2][*y2];
            for i in lo.min(lo2)..=hi.max(hi2) {
                equal.push((sol.entry(ObjRef::new(*x, 0), ObjRef::new(*y, 0), i), sol.entry(ObjRef::new(*x2, 0), ObjRef::new(*y2, 0), i)));
            }
        }
        // Euler
        let mut alts = vec![];
        if self.euler {
            for x in 0..n {
                for y in 0..n {
                    let (lo, hi) = sol.ranges[x][y];
                    let terms = (lo..=hi)
                        .map(|i| (sol.entry(ObjRef::new(x, 0), ObjRef::new(y, 0), i), if i.is_even() { 1 } else { -1 }))
                        .collect();
                    alts.push(Alternating {
                        label: format!("χ({}, {})", self.objects[x].name, self.objects[y].name),
                        terms,
                        value: euler_x0(&self.objects[x].class, &self.objects[y].class),
                    });
                }
            }
        }
        // long exact sequences
        let mut chains = vec![];
        for t in &self.triangles {
            for z in 0..n {
                chains.push(self.covariant_chain(&sol, t, z));
                chains.push(self.contravariant_chain(&sol, t, z));
            }
        }
        loop {
            let mut changed = false;
            let before = if self.explain { Some(sol.store.clone()) } else { None };
            for c in chains.iter_mut() {
                let snap = if self.explain { Some(sol.store.clone()) } else { None };
                changed |= c.propagate(&mut sol.store).map_err(incons)?;
                if let Some(snap) = snap {
                    sol.log_changes(&snap, &c.label);
                }
            }
            for a in &alts {
                let snap = if self.explain { Some(sol.store.clone()) } else { None };
                changed |= a.propagate(&mut sol.store).map_err(incons)?;
                if let Some(snap) = snap {
                    sol.log_changes(&snap, &a.label);
                }
            }
            for &(a, b) in &equal {
                let snap = if self.explain { Some(sol.store.clone()) } else { None };
                changed |= propagate_equal(&mut sol.store, a, b).map_err(|_| {
                    incons(format!("{} and {} cannot be equal", sol.names[a], sol.names[b]))
                })?;
                if let Some(snap) = snap {
                    sol.log_changes(&snap, "duality");
                }
            }
            if !sol.store[0].is_zero() {
                return Err(incons("a vanishing Ext group was forced to be nonzero".into()));
            }
            let _ = before;
            if !changed {
                break;
            }
        }
        Ok(sol)
    }

    fn parts(&self, sol: &ExtSolution, z: ObjRef, v: &[(ObjRef, u64)], i: i64, cov: bool) -> Vec<Part> {
        v.iter()
            .filter_map(|(r, m)| {
                let e = if cov { sol.entry(z, *r, i) } else { sol.entry(*r, z, i) };
                (e != 0).then_some(Part { entry: e, mult: *m })
            })
            .collect()
    }

    fn degree_span(&self, sol: &ExtSolution, z: usize, t: &Triangle, cov: bool) -> (i64, i64) {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for (r, _) in t.a.iter().chain(&t.b).chain(&t.c) {
            let (l, h) = if cov { sol.ranges[z][r.obj] } else { sol.ranges[r.obj][z] };
            // Ext^i(z, r[s]) = Ext^{i+s}(z, r); Ext^i(r[s], z) = Ext^{i-s}(r, z)
            let (l, h) = if cov { (l - r.shift, h - r.shift) } else { (l + r.shift, h + r.shift) };
            lo = lo.min(l);
            hi = hi.max(h);
        }
        (lo - 1, hi + 1)
    }

    /// `Hom(z, -)`: `… → Ext^i(z,a) → Ext^i(z,b) → Ext^i(z,c) → Ext^{i+1}(z,a) → …`
    fn covariant_chain(&self, sol: &ExtSolution, t: &Triangle, z: usize) -> Chain {
        let zr = ObjRef::new(z, 0);
        let (lo, hi) = self.degree_span(sol, z, t, true);
        let mut nodes = vec![];
        for i in lo..=hi {
            nodes.push(self.parts(sol, zr, &t.a, i, true));
            nodes.push(self.parts(sol, zr, &t.b, i, true));
            nodes.push(self.parts(sol, zr, &t.c, i, true));
        }
        let mut ch = Chain::new(format!("Hom({}, -) on {}", self.objects[z].name, t.label), nodes);
        if let Universality::Eval(s) = t.universal {
            if s.obj == z {
                // Ext¹(s, a) = Ext^{1-k}(z, a) for s = z[k]
                let i = 1 - s.shift;
                if (lo..=hi).contains(&i) {
                    ch.set_onto(3 * (i - lo) as usize);
                }
            }
        }
        ch
    }

    /// `Hom(-, z)`: `… → Ext^i(c,z) → Ext^i(b,z) → Ext^i(a,z) → Ext^{i+1}(c,z) → …`
    fn contravariant_chain(&self, sol: &ExtSolution, t: &Triangle, z: usize) -> Chain {
        let zr = ObjRef::new(z, 0);
        let (lo, hi) = self.degree_span(sol, z, t, false);
        let mut nodes = vec![];
        for i in lo..=hi {
            nodes.push(self.parts(sol, zr, &t.c, i, false));
            nodes.push(self.parts(sol, zr, &t.b, i, false));
            nodes.push(self.parts(sol, zr, &t.a, i, false));
        }
        let mut ch = Chain::new(format!("Hom(-, {}) on {}", self.objects[z].name, t.label), nodes);
        if let Universality::Coeval(s) = t.universal {
            if s.obj == z {
                // Ext¹(c, s) = Ext^{1+k}(c, z) for s = z[k]
                let i = 1 + s.shift;
                if (lo..=hi).contains(&i) {
                    ch.set_onto(3 * (i - lo) as usize);
                }
            }
        }
        ch
    }
}

/// Narrowed Ext dimensions.
#[derive(Clone, Debug)]
pub struct ExtSolution {
    ranges: Vec<Vec<(i64, i64)>>,
    offsets: Vec<Vec<usize>>,
    store: Vec<DimInterval>,
    names: Vec<String>,
    objects: Vec<ObjInfo>,
    pub trace: Vec<String>,
}

impl ExtSolution {
    fn entry(&self, x: ObjRef, y: ObjRef, i: i64) -> usize {
        let j = i + y.shift - x.shift;
        let (lo, hi) = self.ranges[x.obj][y.obj];
        if j < lo || j > hi {
            0
        } else {
            self.offsets[x.obj][y.obj] + (j - lo) as usize
        }
    }

    fn log_changes(&mut self, before: &[DimInterval], why: &str) {
        for (k, (a, b)) in before.iter().zip(&self.store).enumerate() {
            if a != b {
                let line = format!("{why}: {} ∈ {b}", self.names[k]);
                self.trace.push(line);
            }
        }
    }

    /// `dim Ext^i(x, y)`.
    pub fn ext(&self, x: ObjRef, y: ObjRef, i: i64) -> DimInterval {
        self.store[self.entry(x, y, i)]
    }

    /// Degrees `0..4`.
    pub fn graded(&self, x: ObjRef, y: ObjRef) -> GradedExtX {
        let mut g = GradedExtX::zero();
        for i in 0..5 {
            g.dims[i] = self.ext(x, y, i as i64);
        }
        g
    }

    /// Every degree that may be nonzero.
    pub fn series(&self, x: ObjRef, y: ObjRef) -> BTreeMap<i64, DimInterval> {
        let (lo, hi) = self.ranges[x.obj][y.obj];
        (lo..=hi)
            .map(|j| j - y.shift + x.shift)
            .map(|i| (i, self.ext(x, y, i)))
            .filter(|(_, d)| !d.is_zero())
            .collect()
    }

    /// Whether every unknown is a single value.
    pub fn all_exact(&self) -> bool {
        self.store.iter().all(|d| d.is_exact())
    }

    pub fn object_names(&self) -> Vec<String> {
        self.objects.iter().map(|o| o.name.clone()).collect()
    }

    /// Snapshot of every entry, for determinism and monotonicity checks.
    pub fn entries(&self) -> Vec<(String, DimInterval)> {
        self.names.iter().cloned().zip(self.store.iter().copied()).collect()
    }
}
