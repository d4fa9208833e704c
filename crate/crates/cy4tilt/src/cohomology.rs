//! Sheaf cohomology on P² with interval answers.
//!
//! Bundles are products of generators: `O(k)`, `Ω`, `SⁿT` and exceptional
//! bundles, optionally equipped with a defining short exact sequence. Facts
//! about `h⁰, h¹, h²` of every product that appears are narrowed by Bott's
//! formula, slope vanishing for semistable bundles, Serre duality, the Euler
//! characteristic, registered vanishing and the long exact sequences of the
//! Euler, dual Euler, symmetric power and defining sequences.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num::Zero;
use serde::Serialize;

use crate::kclass::{self, q, ChernP2, Rational};
use crate::les::{propagate_equal, Alternating, Chain, Part};
use crate::{Error, Result};

pub use crate::les::DimInterval;

/// `(h⁰, h¹, h²)` as intervals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GradedDims(pub [DimInterval; 3]);

impl GradedDims {
    pub fn exact(v: [u64; 3]) -> Self {
        GradedDims(v.map(DimInterval::exact))
    }

    pub fn unknown() -> Self {
        GradedDims([DimInterval::UNKNOWN; 3])
    }

    pub fn is_exact(&self) -> bool {
        self.0.iter().all(|d| d.is_exact())
    }

    pub fn values(&self) -> Option<[u64; 3]> {
        Some([self.0[0].value()?, self.0[1].value()?, self.0[2].value()?])
    }
}

impl fmt::Display for GradedDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

/// Binomial coefficient with `binom(n, k) = 0` for `n < k` or `k < 0`.
pub fn binom(n: i64, k: i64) -> u64 {
    if k < 0 || n < k {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// `h^p(P², O(k))`.
pub fn line_cohomology(k: i64) -> [u64; 3] {
    [binom(k + 2, 2), 0, binom(-k - 1, 2)]
}

/// `h^p(P², Ω^q(k))` by Bott's formula, `0 ≤ q ≤ 2`.
pub fn bott(qd: u32, k: i64) -> [u64; 3] {
    let qd = qd as i64;
    let n = 2;
    let mut h = [0u64; 3];
    h[0] = if k > qd {
        binom(k + n - qd, k) * binom(k - 1, qd)
    } else if k == 0 && qd == 0 {
        1
    } else {
        0
    };
    h[2] = if k < qd - n {
        binom(-k + qd, -k) * binom(-k - 1, n - qd)
    } else if k == 0 && qd == n {
        1
    } else {
        0
    };
    if k == 0 && qd == 1 {
        h[1] = 1;
    }
    h
}

/// Class of `SⁿT`, from `0 → O(n-1)^{C(n+1,2)} → O(n)^{C(n+2,2)} → SⁿT → 0`.
pub fn sym_tangent_class(n: u32) -> ChernP2 {
    let n = n as i64;
    ChernP2::line(n).scale(binom(n + 2, 2) as i64) - ChernP2::line(n - 1).scale(binom(n + 1, 2) as i64)
}

/// Symbolic bundle on P². Every constructor yields a semistable bundle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BundleExpr {
    O(i64),
    Omega,
    Tangent,
    /// Exceptional bundle determined by its class.
    Exc { label: String, class: ChernP2 },
    Twist(Box<BundleExpr>, i64),
    Dual(Box<BundleExpr>),
    Tensor(Box<BundleExpr>, Box<BundleExpr>),
    Wedge(u32, Box<BundleExpr>),
    Sym(u32, Box<BundleExpr>),
}

impl BundleExpr {
    pub fn twist(self, k: i64) -> Self {
        BundleExpr::Twist(Box::new(self), k)
    }
    pub fn dual(self) -> Self {
        BundleExpr::Dual(Box::new(self))
    }
    pub fn tensor(self, o: BundleExpr) -> Self {
        BundleExpr::Tensor(Box::new(self), Box::new(o))
    }
    pub fn wedge(self, k: u32) -> Self {
        BundleExpr::Wedge(k, Box::new(self))
    }
    pub fn sym(self, n: u32) -> Self {
        BundleExpr::Sym(n, Box::new(self))
    }
    pub fn exc(label: &str, class: ChernP2) -> Self {
        BundleExpr::Exc { label: label.to_string(), class }
    }
    /// All constructors build semistable bundles.
    pub fn is_semistable(&self) -> bool {
        true
    }
}

/// Normal form: `O(twist) ⊗ Ω^{⊗omega} ⊗ ⨂ S^{n}T ⊗ ⨂ E^{⊗m}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub twist: i64,
    pub omega: u32,
    /// Symmetric powers of `T`, each `n ≥ 2`, sorted.
    pub sym: Vec<u32>,
    /// Exceptional generators (normalized class with slope in `[0, 1)`) and multiplicities.
    pub exc: Vec<(ChernP2, u32)>,
}

impl Monomial {
    pub fn line(k: i64) -> Self {
        Monomial { twist: k, omega: 0, sym: vec![], exc: vec![] }
    }

    pub fn omega_twist(k: i64) -> Self {
        Monomial { twist: k, omega: 1, sym: vec![], exc: vec![] }
    }

    pub fn twisted(&self, k: i64) -> Self {
        let mut m = self.clone();
        m.twist += k;
        m
    }

    pub fn tensor(&self, o: &Monomial) -> Monomial {
        let mut sym = self.sym.clone();
        sym.extend(&o.sym);
        sym.sort_unstable();
        let mut exc: BTreeMap<ChernP2, u32> = BTreeMap::new();
        for (c, m) in self.exc.iter().chain(&o.exc) {
            *exc.entry(*c).or_default() += m;
        }
        Monomial {
            twist: self.twist + o.twist,
            omega: self.omega + o.omega,
            sym,
            exc: exc.into_iter().collect(),
        }
    }

    pub fn class(&self) -> ChernP2 {
        let mut c = ChernP2::line(self.twist);
        for _ in 0..self.omega {
            c = c * ChernP2::omega(0);
        }
        for &n in &self.sym {
            c = c * sym_tangent_class(n);
        }
        for (e, m) in &self.exc {
            for _ in 0..*m {
                c = c * *e;
            }
        }
        c
    }

    pub fn rank(&self) -> i64 {
        self.class().r
    }

    pub fn slope(&self) -> Rational {
        let c = self.class();
        q(c.d, c.r)
    }

    /// Dual bundle; `None` when a symmetric power is present.
    pub fn dual(&self) -> Option<Monomial> {
        if !self.sym.is_empty() {
            return None;
        }
        let mut out = Monomial::line(-self.twist + 3 * self.omega as i64);
        out.omega = self.omega;
        for (c, m) in &self.exc {
            let (k, key) = normalize_exc(&kclass::dual(c));
            out.twist += k * *m as i64;
            out = out.tensor(&Monomial { twist: 0, omega: 0, sym: vec![], exc: vec![(key, *m)] });
        }
        Some(out)
    }

    /// `E^∨ ⊗ O(-3)`, the Serre partner.
    pub fn serre_partner(&self) -> Option<Monomial> {
        self.dual().map(|d| d.twisted(-3))
    }

    fn without_omega(&self) -> Monomial {
        let mut m = self.clone();
        m.omega -= 1;
        m
    }

    fn without_exc(&self, key: &ChernP2) -> Monomial {
        let mut m = self.clone();
        for e in m.exc.iter_mut() {
            if e.0 == *key {
                e.1 -= 1;
            }
        }
        m.exc.retain(|e| e.1 > 0);
        m
    }

    /// Complexity used to order reductions.
    pub fn complexity(&self) -> (u32, u32, u32) {
        (self.exc.iter().map(|e| e.1).sum(), self.sym.iter().sum(), self.omega)
    }
}

/// Writes an exceptional class as `key ⊗ O(k)` with `0 ≤ μ(key) < 1`.
pub fn normalize_exc(c: &ChernP2) -> (i64, ChernP2) {
    let k = c.d.div_euclid(c.r);
    (k, kclass::twist(c, -k))
}

/// Monomial of an exceptional bundle given by its class.
pub fn monomial_of_class(c: &ChernP2) -> Result<Monomial> {
    if !kclass::is_exceptional_class(c) {
        return Err(Error::NotExceptional(format!("{c} has χ(E,E) ≠ 1")));
    }
    if c.r == 1 {
        return Ok(Monomial::line(c.d));
    }
    if c.r == 2 {
        let k = (c.d + 3) / 2;
        return Ok(Monomial::omega_twist(k));
    }
    let (k, key) = normalize_exc(c);
    Ok(Monomial { twist: k, omega: 0, sym: vec![], exc: vec![(key, 1)] })
}

/// Normal form of an expression.
pub fn normalize(e: &BundleExpr) -> Result<Monomial> {
    use BundleExpr::*;
    Ok(match e {
        O(k) => Monomial::line(*k),
        Omega => Monomial::omega_twist(0),
        Tangent => Monomial::omega_twist(3),
        Exc { class, label } => monomial_of_class(class)
            .map_err(|_| Error::UnknownBundle(format!("{label}: class {class} is not exceptional")))?,
        Twist(b, k) => normalize(b)?.twisted(*k),
        Dual(b) => normalize(b)?
            .dual()
            .ok_or_else(|| Error::UnknownBundle("dual of a symmetric power".into()))?,
        Tensor(a, b) => normalize(a)?.tensor(&normalize(b)?),
        Wedge(k, b) => {
            let m = normalize(b)?;
            let c = m.class();
            match *k as i64 {
                0 => Monomial::line(0),
                1 => m,
                kk if kk == c.r => Monomial::line(c.d),
                kk if kk > c.r => return Err(Error::UnknownBundle(format!("∧^{kk} of rank {}", c.r))),
                kk => return Err(Error::UnknownBundle(format!("∧^{kk} of a rank-{} bundle", c.r))),
            }
        }
        Sym(n, b) => {
            let m = normalize(b)?;
            if *n == 0 {
                return Ok(Monomial::line(0));
            }
            if *n == 1 {
                return Ok(m);
            }
            // only twists of T = Ω(3)
            if m.omega == 1 && m.sym.is_empty() && m.exc.is_empty() {
                let k = m.twist - 3;
                Monomial { twist: *n as i64 * k, omega: 0, sym: vec![*n], exc: vec![] }
            } else {
                return Err(Error::UnknownBundle("symmetric powers are supported for T only".into()));
            }
        }
    })
}

/// Short exact sequence `0 → A → B → C → 0` defining an exceptional generator.
/// `slots[pos]` is `(1, generator ⊗ O(t))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenSes {
    pub slots: [(u64, Monomial); 3],
    pub pos: usize,
}

/// Exceptional generator with optional defining sequences.
#[derive(Clone, Debug)]
pub struct ExcGen {
    pub label: String,
    pub ses: Vec<GenSes>,
}

#[derive(Clone, Debug)]
struct NodeData {
    mono: Monomial,
    chi: i64,
    expanded: bool,
}

/// Narrowed cohomology facts for every monomial seen so far.
///
/// `propagate` consumes the store and returns the narrowed one; it never widens.
#[derive(Clone, Debug, Default)]
pub struct FactStore {
    nodes: Vec<NodeData>,
    index: HashMap<Monomial, usize>,
    entries: Vec<DimInterval>,
    chains: Vec<Chain>,
    alts: Vec<Alternating>,
    equal: Vec<(usize, usize)>,
    gens: BTreeMap<ChernP2, ExcGen>,
    registered: BTreeMap<Monomial, (GradedDims, String)>,
    pub explain: bool,
    pub trace: Vec<String>,
}

const MAX_NODES: usize = 20_000;

impl FactStore {
    pub fn new() -> Self {
        FactStore::default()
    }

    /// Human-readable name of a monomial.
    pub fn describe(&self, m: &Monomial) -> String {
        let mut parts: Vec<String> = vec![];
        for _ in 0..m.omega {
            parts.push("Ω".into());
        }
        for n in &m.sym {
            parts.push(format!("S^{n}T"));
        }
        for (c, k) in &m.exc {
            let name = self.gens.get(c).map(|g| g.label.clone()).unwrap_or_else(|| format!("E{c}"));
            for _ in 0..*k {
                parts.push(name.clone());
            }
        }
        let base = if parts.is_empty() { "O".to_string() } else { parts.join("⊗") };
        if m.twist == 0 {
            base
        } else if parts.len() <= 1 {
            format!("{base}({})", m.twist)
        } else {
            format!("({base})({})", m.twist)
        }
    }

    fn note(&mut self, line: impl FnOnce() -> String) {
        if self.explain {
            self.trace.push(line());
        }
    }

    /// Registers an exceptional generator for `class` and for its dual.
    /// Returns the monomial of the bundle itself.
    pub fn register_generator(&mut self, label: &str, class: &ChernP2) -> Result<Monomial> {
        let m = monomial_of_class(class)?;
        if m.exc.is_empty() {
            return Ok(m);
        }
        let key = m.exc[0].0;
        let (shift, _) = normalize_exc(class);
        let name = if shift == 0 { label.to_string() } else { format!("{label}({})", -shift) };
        self.gens.entry(key).or_insert(ExcGen { label: name, ses: vec![] });
        let (dk, dkey) = normalize_exc(&kclass::dual(class));
        let dname = if dk == 0 { format!("{label}^∨") } else { format!("{label}^∨({})", -dk) };
        self.gens.entry(dkey).or_insert(ExcGen { label: dname, ses: vec![] });
        Ok(m)
    }

    /// Registers `0 → A → B^{mult} → C → 0` where one of `A`, `C` is the exceptional
    /// bundle `e` (given as a monomial with a single generator). The dual sequence is
    /// registered for the dual generator.
    pub fn register_sequence(&mut self, a: &Monomial, b: (u64, &Monomial), c: &Monomial) -> Result<()> {
        let (ca, cb, cc) = (a.class(), b.1.class().scale(b.0 as i64), c.class());
        if ca + cc != cb {
            return Err(Error::InvalidClass(format!("sequence classes do not add up: {ca} + {cc} ≠ {cb}")));
        }
        let slots = [(1, a.clone()), (b.0, b.1.clone()), (1, c.clone())];
        for pos in [0, 2] {
            let s = &slots[pos].1;
            if s.exc.len() == 1 && s.exc[0].1 == 1 && s.omega == 0 && s.sym.is_empty() {
                let key = s.exc[0].0;
                let ses = GenSes { slots: slots.clone(), pos };
                let g = self.gens.entry(key).or_insert(ExcGen { label: format!("E{key}"), ses: vec![] });
                if !g.ses.contains(&ses) {
                    g.ses.push(ses);
                }
                // dual: 0 → C^∨ → B^∨ → A^∨ → 0
                let dual = |m: &Monomial| {
                    m.dual().ok_or_else(|| Error::UnknownBundle("dual of a symmetric power".into()))
                };
                let dslots = [(1, dual(c)?), (b.0, dual(b.1)?), (1, dual(a)?)];
                let dpos = 2 - pos;
                let dkey = dslots[dpos].1.exc[0].0;
                let dses = GenSes { slots: dslots, pos: dpos };
                let g = self.gens.entry(dkey).or_insert(ExcGen { label: format!("E{dkey}"), ses: vec![] });
                if !g.ses.contains(&dses) {
                    g.ses.push(dses);
                }
            }
        }
        Ok(())
    }

    /// Records known dimensions of `H^*(m)`.
    pub fn register_fact(&mut self, m: &Monomial, dims: GradedDims, why: &str) -> Result<()> {
        let entry = self.registered.entry(m.clone()).or_insert((GradedDims::unknown(), why.to_string()));
        for p in 0..3 {
            entry.0 .0[p] = entry.0 .0[p]
                .meet(&dims.0[p])
                .ok_or_else(|| Error::Inconsistent(format!("registered facts for {m:?} disagree")))?;
        }
        if let Some(&i) = self.index.get(m) {
            for p in 0..3 {
                let cur = self.entries[3 * i + p];
                self.entries[3 * i + p] = cur
                    .meet(&dims.0[p])
                    .ok_or_else(|| Error::Inconsistent(format!("fact for {} contradicts h^{p}", self.describe(m))))?;
            }
        }
        Ok(())
    }

    /// For a strong full exceptional collection of bundles `(E_0, …, E_n)`:
    /// `H^{>0}(E_i^∨ ⊗ E_j) = 0` for `i ≤ j`, `H^*(E_i^∨ ⊗ E_j) = 0` for `i > j`
    /// and `End E_i = C`.
    pub fn register_strong_collection_vanishing(&mut self, coll: &[(String, ChernP2)]) -> Result<()> {
        let ms: Vec<Monomial> =
            coll.iter().map(|(l, c)| self.register_generator(l, c)).collect::<Result<_>>()?;
        for (i, a) in ms.iter().enumerate() {
            let ad = a.dual().expect("exceptional bundles have duals");
            for (j, b) in ms.iter().enumerate() {
                let m = ad.tensor(b);
                let dims = if i == j {
                    GradedDims::exact([1, 0, 0])
                } else if i < j {
                    GradedDims([DimInterval::UNKNOWN, DimInterval::ZERO, DimInterval::ZERO])
                } else {
                    GradedDims::exact([0, 0, 0])
                };
                self.register_fact(&m, dims, "strong exceptional collection")?;
            }
        }
        Ok(())
    }

    fn entry(&self, node: usize, p: usize) -> DimInterval {
        self.entries[3 * node + p]
    }

    fn set(&mut self, node: usize, p: usize, d: DimInterval, why: &str) -> Result<()> {
        let cur = self.entries[3 * node + p];
        let m = cur.meet(&d).ok_or_else(|| {
            Error::Inconsistent(format!("{}: h^{p} ∈ {cur} contradicts {d} ({why})", self.describe(&self.nodes[node].mono)))
        })?;
        if m != cur {
            self.entries[3 * node + p] = m;
            let name = self.describe(&self.nodes[node].mono);
            self.note(|| format!("{why}: h^{p}({name}) ∈ {m}"));
        }
        Ok(())
    }

    /// Index of the node for `m`, creating it with its local rules.
    fn node(&mut self, m: &Monomial) -> Result<usize> {
        if let Some(&i) = self.index.get(m) {
            return Ok(i);
        }
        let c = m.class();
        let chi = kclass::euler_char(&c);
        if !chi.is_integer() {
            return Err(Error::InvalidClass(format!("non-integral χ for {}", self.describe(m))));
        }
        let i = self.nodes.len();
        self.nodes.push(NodeData { mono: m.clone(), chi: chi.to_integer(), expanded: false });
        self.index.insert(m.clone(), i);
        self.entries.extend([DimInterval::UNKNOWN; 3]);
        // leaves
        let bare = m.sym.is_empty() && m.exc.is_empty();
        if bare && m.omega == 0 {
            let h = line_cohomology(m.twist);
            for p in 0..3 {
                self.set(i, p, DimInterval::exact(h[p]), "line bundle")?;
            }
        } else if bare && m.omega == 1 {
            let h = bott(1, m.twist);
            for p in 0..3 {
                self.set(i, p, DimInterval::exact(h[p]), "Bott")?;
            }
        }
        // slopes (all monomials are semistable)
        let mu = q(c.d, c.r);
        if mu < Rational::zero() {
            self.set(i, 0, DimInterval::ZERO, "slope μ < 0")?;
        }
        if mu > q(-3, 1) {
            self.set(i, 2, DimInterval::ZERO, "slope μ > -3")?;
        }
        if let Some((dims, why)) = self.registered.get(m).cloned() {
            for p in 0..3 {
                self.set(i, p, dims.0[p], &why)?;
            }
        }
        self.alts.push(Alternating {
            label: format!("χ({})", self.describe(m)),
            terms: vec![(3 * i, 1), (3 * i + 1, -1), (3 * i + 2, 1)],
            value: self.nodes[i].chi,
        });
        if let Some(partner) = m.serre_partner() {
            if partner != *m {
                let j = self.node(&partner)?;
                for p in 0..3 {
                    self.equal.push((3 * i + p, 3 * j + (2 - p)));
                }
            }
        }
        Ok(i)
    }

    fn add_ses(&mut self, label: String, a: (u64, &Monomial), b: (u64, &Monomial), c: (u64, &Monomial)) -> Result<()> {
        let ia = self.node(a.1)?;
        let ib = self.node(b.1)?;
        let ic = self.node(c.1)?;
        let mut nodes = vec![];
        for p in 0..3 {
            nodes.push(vec![Part { entry: 3 * ia + p, mult: a.0 }]);
            nodes.push(vec![Part { entry: 3 * ib + p, mult: b.0 }]);
            nodes.push(vec![Part { entry: 3 * ic + p, mult: c.0 }]);
        }
        self.note(|| format!("sequence {label}"));
        self.chains.push(Chain::new(label, nodes));
        Ok(())
    }

    fn expand(&mut self, i: usize) -> Result<()> {
        self.nodes[i].expanded = true;
        let m = self.nodes[i].mono.clone();
        let name = self.describe(&m);
        if let Some(&n) = m.sym.iter().max() {
            let mut rest = m.clone();
            let pos = rest.sym.iter().position(|&x| x == n).expect("present");
            rest.sym.remove(pos);
            let n = n as i64;
            let a = rest.twisted(n - 1);
            let b = rest.twisted(n);
            self.add_ses(
                format!("symmetric power sequence for {name}"),
                (binom(n + 1, 2), &a),
                (binom(n + 2, 2), &b),
                (1, &m),
            )?;
        }
        if m.omega > 0 {
            let rest = m.without_omega();
            let b = rest.twisted(-1);
            self.add_ses(format!("Euler sequence for {name}"), (1, &m), (3, &b), (1, &rest))?;
            let a = rest.twisted(-3);
            let b = rest.twisted(-2);
            self.add_ses(format!("dual Euler sequence for {name}"), (1, &a), (3, &b), (1, &m))?;
        }
        let keys: Vec<ChernP2> = m.exc.iter().map(|e| e.0).collect();
        for key in keys {
            let seqs = self.gens.get(&key).map(|g| g.ses.clone()).unwrap_or_default();
            let rest = m.without_exc(&key);
            for s in seqs {
                let t = s.slots[s.pos].1.twist;
                let sl: Vec<(u64, Monomial)> =
                    s.slots.iter().map(|(k, x)| (*k, x.tensor(&rest).twisted(-t))).collect();
                let gl = self.gens.get(&key).map(|g| g.label.clone()).unwrap_or_default();
                self.add_ses(
                    format!("defining sequence of {gl} for {name}"),
                    (sl[0].0, &sl[0].1),
                    (sl[1].0, &sl[1].1),
                    (sl[2].0, &sl[2].1),
                )?;
            }
        }
        Ok(())
    }

    /// Narrows every fact to a fixed point.
    pub fn propagate(mut self) -> Result<Self> {
        self.propagate_in_place()?;
        Ok(self)
    }

    fn propagate_in_place(&mut self) -> Result<()> {
        loop {
            let mut changed = false;
            let before = if self.explain { Some(self.entries.clone()) } else { None };
            for c in self.chains.iter_mut() {
                changed |= c.propagate(&mut self.entries).map_err(Error::Inconsistent)?;
            }
            for a in &self.alts {
                changed |= a.propagate(&mut self.entries).map_err(Error::Inconsistent)?;
            }
            for &(a, b) in &self.equal {
                changed |= propagate_equal(&mut self.entries, a, b)
                    .map_err(|_| Error::Inconsistent("Serre duality violated".into()))?;
            }
            if let Some(before) = before {
                for (k, (x, y)) in before.iter().zip(&self.entries).enumerate() {
                    if x != y {
                        let name = self.describe(&self.nodes[k / 3].mono);
                        let line = format!("propagation: h^{}({name}) ∈ {y}", k % 3);
                        self.trace.push(line);
                    }
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    /// Dimensions of `H^p(P², m)`, expanding sequences until the answer is exact
    /// or nothing more can be derived.
    pub fn compute(&mut self, m: &Monomial) -> Result<GradedDims> {
        let g = self.node(m)?;
        loop {
            self.propagate_in_place()?;
            if (0..3).all(|p| self.entry(g, p).is_exact()) {
                break;
            }
            let todo: Vec<usize> = (0..self.nodes.len())
                .filter(|&i| !self.nodes[i].expanded && !(0..3).all(|p| self.entry(i, p).is_exact()))
                .collect();
            if todo.is_empty() || self.nodes.len() > MAX_NODES {
                break;
            }
            for i in todo {
                self.expand(i)?;
            }
        }
        Ok(GradedDims([self.entry(g, 0), self.entry(g, 1), self.entry(g, 2)]))
    }

    /// Dimensions for a symbolic expression.
    pub fn compute_h(&mut self, e: &BundleExpr) -> Result<GradedDims> {
        let m = normalize(e)?;
        for (c, _) in &m.exc {
            if !self.gens.contains_key(c) {
                let label = format!("E{c}");
                self.gens.insert(*c, ExcGen { label, ses: vec![] });
            }
        }
        self.compute(&m)
    }

    /// Current facts for `m` without further expansion.
    pub fn peek(&self, m: &Monomial) -> Option<GradedDims> {
        self.index.get(m).map(|&g| GradedDims([self.entry(g, 0), self.entry(g, 1), self.entry(g, 2)]))
    }

    /// All currently known facts, in creation order.
    pub fn snapshot(&self) -> Vec<(String, GradedDims)> {
        (0..self.nodes.len())
            .map(|i| (self.describe(&self.nodes[i].mono), GradedDims([self.entry(i, 0), self.entry(i, 1), self.entry(i, 2)])))
            .collect()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// A fresh store with the generator `P` of class `(5, -13, 29/2)` and both of
/// its defining sequences `0 → P → Ω(-1)³ → O(-2) → 0` and
/// `0 → O(-5) → O(-3)⁶ → P → 0`.
pub fn store_with_p() -> FactStore {
    let mut s = FactStore::new();
    let p = s.register_generator("P", &p_class()).expect("P is exceptional");
    s.register_sequence(&p, (3, &Monomial::omega_twist(-1)), &Monomial::line(-2))
        .expect("class check");
    s.register_sequence(&Monomial::line(-5), (6, &Monomial::line(-3)), &p)
        .expect("class check");
    s
}

/// `ch(P) = 3·ch(Ω(-1)) - ch(O(-2))`.
pub fn p_class() -> ChernP2 {
    ChernP2::omega(-1).scale(3) - ChernP2::line(-2)
}

/// `Hom(E, F) = 0` for semistable `E`, `F` with `μ(E) > μ(F)`.
pub fn hom_vanishes_by_slopes(e: &BundleExpr, f: &BundleExpr) -> Result<bool> {
    if !(e.is_semistable() && f.is_semistable()) {
        return Ok(false);
    }
    let (a, b) = (normalize(e)?.class(), normalize(f)?.class());
    Ok(a.slope()? > b.slope()?)
}

/// `h^p(E) = h^{2-p}(E^∨ ⊗ O(-3))`.
pub fn serre_dual_p2(e: &BundleExpr, p: u32) -> Result<(BundleExpr, u32)> {
    if p > 2 {
        return Err(Error::InvalidClass(format!("degree {p} on P²")));
    }
    Ok((e.clone().dual().twist(-3), 2 - p))
}

/// Euler characteristic of a monomial.
pub fn euler_of(m: &Monomial) -> Rational {
    kclass::euler_char(&m.class())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn omega() -> BundleExpr {
        BundleExpr::Omega
    }

    fn h(e: &BundleExpr) -> [u64; 3] {
        let mut s = store_with_p();
        let d = s.compute_h(e).unwrap();
        d.values().unwrap_or_else(|| panic!("not exact: {d}"))
    }

    /// Rank of the multiplication map `V ⊗ S_{k-1} → S_k` on polynomials in three
    /// variables, by exact Gaussian elimination over the rationals.
    fn mult_map_rank(k: i64) -> usize {
        if k < 1 {
            return 0;
        }
        let monos = |deg: i64| -> Vec<[i64; 3]> {
            let mut v = vec![];
            for a in 0..=deg {
                for b in 0..=deg - a {
                    v.push([a, b, deg - a - b]);
                }
            }
            v
        };
        let src = monos(k - 1);
        let dst = monos(k);
        let mut rows: Vec<Vec<Rational>> = vec![];
        for var in 0..3 {
            for m in &src {
                let mut t = *m;
                t[var] += 1;
                let mut row = vec![Rational::zero(); dst.len()];
                let j = dst.iter().position(|x| *x == t).unwrap();
                row[j] = q(1, 1);
                rows.push(row);
            }
        }
        rank(rows)
    }

    fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
        let mut r = 0;
        let cols = rows.first().map_or(0, |x| x.len());
        for c in 0..cols {
            let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
            rows.swap(r, p);
            for i in 0..rows.len() {
                if i != r && !rows[i][c].is_zero() {
                    let f = rows[i][c] / rows[r][c];
                    for j in 0..cols {
                        let v = rows[r][j];
                        rows[i][j] -= f * v;
                    }
                }
            }
            r += 1;
        }
        r
    }

    // Oracle for line bundles: count monomials of degree k (H⁰) and Laurent
    // monomials with all exponents negative (Čech H²).
    #[test]
    fn line_cohomology_matches_monomial_count() {
        for k in -10..=10i64 {
            let mut h0 = 0;
            let mut h2 = 0;
            for a in -20..=20i64 {
                for b in -20..=20i64 {
                    let c = k - a - b;
                    if a >= 0 && b >= 0 && c >= 0 {
                        h0 += 1;
                    }
                    if a < 0 && b < 0 && c < 0 {
                        h2 += 1;
                    }
                }
            }
            assert_eq!(line_cohomology(k), [h0, 0, h2], "k = {k}");
        }
    }

    // Oracle for Ω(k): H⁰(Ω(k)) is the kernel of V ⊗ S_{k-1} → S_k, and
    // h²(Ω(k)) = h⁰(Ω(-k)) by Serre duality with T = Ω(3).
    #[test]
    fn bott_matches_kernel_dimension() {
        let h0 = |k: i64| -> u64 {
            if k < 1 {
                return 0;
            }
            (3 * binom(k + 1, 2) as usize - mult_map_rank(k)) as u64
        };
        for k in -8..=8i64 {
            let b = bott(1, k);
            assert_eq!(b[0], h0(k), "h0 Ω({k})");
            assert_eq!(b[2], h0(-k), "h2 Ω({k})");
            let chi = kclass::euler_char(&ChernP2::omega(k)).to_integer();
            assert_eq!(b[0] as i64 - b[1] as i64 + b[2] as i64, chi);
        }
        assert_eq!(bott(1, 0), [0, 1, 0]);
        assert_eq!(bott(0, 0), [1, 0, 0]);
        assert_eq!(bott(2, 0), [0, 0, 1]);
        assert_eq!(bott(2, 3), line_cohomology(0));
    }

    #[test]
    fn small_values() {
        assert_eq!(line_cohomology(-3), [0, 0, 1]);
        assert_eq!(line_cohomology(2), [6, 0, 0]);
        assert_eq!(bott(1, 2), [3, 0, 0]);
        assert_eq!(bott(1, -2), [0, 0, 3]);
    }

    #[test]
    fn sym_square_class() {
        assert_eq!(sym_tangent_class(2), ChernP2::new(3, 9, q(21, 2)));
        assert_eq!(sym_tangent_class(1), ChernP2::tangent(0));
        let e = BundleExpr::Tangent.sym(2);
        assert_eq!(normalize(&e).unwrap().class(), ChernP2::new(3, 9, q(21, 2)));
    }

    #[test]
    fn endomorphisms_of_omega() {
        assert_eq!(h(&BundleExpr::Tangent.tensor(omega())), [1, 0, 0]);
    }

    // χ(Ω(1) ⊗ Ω) = -3 with h⁰ = h² = 0 by slopes.
    #[test]
    fn omega_one_tensor_omega() {
        assert_eq!(h(&omega().twist(1).tensor(omega())), [0, 3, 0]);
        assert_eq!(h(&omega().twist(1).tensor(omega().wedge(2))), [0, 0, 3]);
        assert_eq!(h(&omega().twist(1).tensor(omega().wedge(0))), [0, 0, 0]);
    }

    #[test]
    fn triple_products() {
        assert_eq!(h(&BundleExpr::Tangent.tensor(omega()).tensor(omega())), [0, 10, 0]);
    }

    fn p() -> BundleExpr {
        BundleExpr::exc("P", p_class())
    }

    #[test]
    fn cohomology_involving_p() {
        assert_eq!(h(&p().twist(3)), [6, 0, 0]);
        assert_eq!(h(&p().tensor(BundleExpr::Tangent)), [0, 9, 0]);
        assert_eq!(h(&p().dual().tensor(p())), [1, 0, 0]);
        assert_eq!(h(&p().dual().tensor(omega().twist(-1))), [3, 0, 0]);
        assert_eq!(h(&p().dual().twist(-2)), [8, 0, 0]);
        assert_eq!(h(&p()), [0, 0, 0]);
        assert_eq!(h(&p().twist(2)), [0, 1, 0]);
        assert_eq!(h(&BundleExpr::Tangent.twist(1).tensor(p())), [0, 0, 0]);
    }

    #[test]
    fn slope_of_p_tensor_t() {
        let m = normalize(&p().tensor(BundleExpr::Tangent)).unwrap();
        assert_eq!(m.slope(), q(-11, 10));
    }

    #[test]
    fn sym_powers_twisted() {
        // Ω(-1) ⊗ S²T: h⁰ = 3, h¹ = 0 from 0 → Ω^3 → Ω(1)^6 → Ω(-1)⊗S²T → 0.
        assert_eq!(h(&omega().twist(-1).tensor(BundleExpr::Tangent.sym(2))), [3, 0, 0]);
        assert_eq!(h(&BundleExpr::Tangent.sym(2)), [27, 0, 0]);
    }

    #[test]
    fn wedge_and_sym_errors() {
        assert!(normalize(&p().wedge(2)).is_err());
        assert!(normalize(&p().sym(2)).is_err());
        assert!(normalize(&BundleExpr::exc("bad", ChernP2::new(2, 0, q(0, 1)))).is_err());
    }

    #[test]
    fn slopes_and_serre() {
        assert!(hom_vanishes_by_slopes(&BundleExpr::O(1), &BundleExpr::Omega).unwrap());
        assert!(!hom_vanishes_by_slopes(&BundleExpr::Omega, &BundleExpr::O(0)).unwrap());
        let (d, p) = serre_dual_p2(&BundleExpr::O(-4), 2).unwrap();
        assert_eq!(p, 0);
        assert_eq!(normalize(&d).unwrap(), Monomial::line(1));
    }

    #[test]
    fn registered_vanishing() {
        let mut s = FactStore::new();
        let coll = vec![
            ("O(-3)".to_string(), ChernP2::line(-3)),
            ("P".to_string(), p_class()),
            ("Ω(-1)".to_string(), ChernP2::omega(-1)),
        ];
        s.register_strong_collection_vanishing(&coll).unwrap();
        let hom = s.compute_h(&p().dual().tensor(omega().twist(-1))).unwrap();
        assert_eq!(hom.values().unwrap(), [3, 0, 0]);
        let back = s.compute_h(&omega().twist(-1).dual().tensor(p())).unwrap();
        assert_eq!(back.values().unwrap(), [0, 0, 0]);
    }

    #[test]
    fn contradictory_fact_is_reported() {
        let mut s = FactStore::new();
        s.register_fact(&Monomial::line(0), GradedDims::exact([2, 0, 0]), "wrong").unwrap();
        assert!(matches!(s.compute(&Monomial::line(0)), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn explain_trace_names_rules() {
        let mut s = FactStore::new();
        s.explain = true;
        s.compute_h(&BundleExpr::Tangent.tensor(omega())).unwrap();
        assert!(s.trace.iter().any(|l| l.contains("dual Euler sequence")));
    }

    fn arb_mono() -> impl Strategy<Value = BundleExpr> {
        (-4i64..=4, 0u32..=2, 0u32..=1, 0u32..=1).prop_map(|(k, a, b, c)| {
            let mut e = BundleExpr::O(k);
            for _ in 0..a {
                e = e.tensor(BundleExpr::Omega);
            }
            if b == 1 {
                e = e.tensor(p());
            }
            if c == 1 {
                e = e.tensor(p().dual());
            }
            e
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        // Alternating sum of any answer interval admits χ, and Serre duality holds on the answers.
        #[test]
        fn answers_respect_euler_and_serre(e in arb_mono()) {
            let mut s = store_with_p();
            let d = s.compute_h(&e).unwrap();
            let chi = euler_of(&normalize(&e).unwrap()).to_integer();
            if let Some(v) = d.values() {
                prop_assert_eq!(v[0] as i64 - v[1] as i64 + v[2] as i64, chi);
            }
            let (sd, _) = serre_dual_p2(&e, 0).unwrap();
            let dd = s.compute_h(&sd).unwrap();
            for p in 0..3 {
                prop_assert_eq!(d.0[p], dd.0[2 - p]);
            }
        }

        // Recomputing never widens and gives identical results.
        #[test]
        fn deterministic_and_monotone(e in arb_mono()) {
            let mut s = store_with_p();
            let first = s.compute_h(&e).unwrap();
            let again = s.clone().propagate().unwrap();
            let mut s2 = again;
            let second = s2.compute_h(&e).unwrap();
            for p in 0..3 {
                prop_assert!(second.0[p].within(&first.0[p]));
            }
            let mut t = store_with_p();
            prop_assert_eq!(t.compute_h(&e).unwrap(), first);
        }
    }
}
