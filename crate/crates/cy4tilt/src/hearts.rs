//! Hearts of bounded t-structures on `D^b_0(X)` and their simple tilts.
//!
//! A heart is described by its three simple objects, written as [`Term`]s over
//! the simples `S_0, S_1, S_2` of a root heart `B(E_0, E_1, E_2)`. The graded
//! Ext-quiver of a heart is computed by an [`ExtProblem`] whose facts come from
//! the Koszul formula on pushforward atoms, the tilt triangles, Calabi-Yau
//! Serre duality, the Schur rule in every heart along the way, Euler
//! characteristics and, for hearts reached from `A = B(O(-2), O(-1), O)`, the
//! Mukai flop involution.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::cohomology::{FactStore, GradedDims};
use crate::exceptional::{self, dual_collection, ExcCollection, ExcObject};
use crate::kclass::{self, ChernP2};
use crate::les::DimInterval;
use crate::localcy4::{self, koszul_series, ExtProblem, ExtSolution, GradedExtX, ObjRef, PushforwardAtom, Triangle, Universality};
use crate::{Error, Result};

/// An object of `D^b_0(X)` built from root simples by shifts and simple tilts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Simple(usize),
    Shift(Box<Term>, i64),
    /// `φ_s(x) = cone(s[-1]^n → x)`.
    Left { s: Box<Term>, x: Box<Term>, n: u64 },
    /// `ψ_s(x) = cone(x → s[1]^n)[-1]`.
    Right { s: Box<Term>, x: Box<Term>, n: u64 },
}

impl Term {
    pub fn shift(t: &Term, n: i64) -> Term {
        match (t, n) {
            (_, 0) => t.clone(),
            (Term::Shift(c, k), _) if k + n == 0 => (**c).clone(),
            (Term::Shift(c, k), _) => Term::Shift(c.clone(), k + n),
            _ => Term::Shift(Box::new(t.clone()), n),
        }
    }

    /// Normalized left tilt: `n = 0` gives `x`, and `φ_{s[1]}(ψ_s(y))` gives `y`.
    pub fn left(s: &Term, x: &Term, n: u64) -> Term {
        if n == 0 {
            return x.clone();
        }
        if let Term::Right { s: s0, x: y, n: m } = x {
            if *m == n && Term::shift(s0, 1) == *s {
                return (**y).clone();
            }
        }
        Term::Left { s: Box::new(s.clone()), x: Box::new(x.clone()), n }
    }

    /// Normalized right tilt: `n = 0` gives `x`, and `ψ_{s[-1]}(φ_s(y))` gives `y`.
    pub fn right(s: &Term, x: &Term, n: u64) -> Term {
        if n == 0 {
            return x.clone();
        }
        if let Term::Left { s: s0, x: y, n: m } = x {
            if *m == n && Term::shift(s0, -1) == *s {
                return (**y).clone();
            }
        }
        Term::Right { s: Box::new(s.clone()), x: Box::new(x.clone()), n }
    }

    /// `(core, shift)` with a core that is not a shift.
    pub fn split(&self) -> (&Term, i64) {
        match self {
            Term::Shift(c, k) => (c, *k),
            t => (t, 0),
        }
    }

    /// K-class given the classes of the root simples.
    pub fn class(&self, roots: &[ChernP2]) -> ChernP2 {
        match self {
            Term::Simple(j) => roots[*j],
            Term::Shift(c, k) => c.class(roots).scale(kclass::shift_sign(*k)),
            Term::Left { s, x, n } | Term::Right { s, x, n } => x.class(roots) + s.class(roots).scale(*n as i64),
        }
    }

    /// Mukai flop image: `S_j ↦ S_{2-j}`.
    pub fn psi(&self) -> Term {
        match self {
            Term::Simple(j) => Term::Simple(localcy4::mukai_involution(*j)),
            Term::Shift(c, k) => Term::Shift(Box::new(c.psi()), *k),
            Term::Left { s, x, n } => Term::Left { s: Box::new(s.psi()), x: Box::new(x.psi()), n: *n },
            Term::Right { s, x, n } => Term::Right { s: Box::new(s.psi()), x: Box::new(x.psi()), n: *n },
        }
    }

    /// Cohomological amplitude with respect to the root heart.
    pub fn amplitude(&self) -> (i64, i64) {
        match self {
            Term::Simple(_) => (0, 0),
            Term::Shift(c, k) => {
                let (lo, hi) = c.amplitude();
                (lo - k, hi - k)
            }
            Term::Left { s, x, .. } | Term::Right { s, x, .. } => {
                let (a, b) = (s.amplitude(), x.amplitude());
                (a.0.min(b.0), a.1.max(b.1))
            }
        }
    }

    fn collect(&self, out: &mut Vec<Term>) {
        if !out.contains(self) {
            out.push(self.clone());
        }
        match self {
            Term::Simple(_) => {}
            Term::Shift(c, _) => c.collect(out),
            Term::Left { s, x, .. } | Term::Right { s, x, .. } => {
                s.collect(out);
                x.collect(out);
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Simple(j) => write!(f, "S{j}"),
            Term::Shift(c, k) => write!(f, "{c}[{k}]"),
            Term::Left { s, x, n } => write!(f, "φ_{{{s}}}({x})^{n}"),
            Term::Right { s, x, n } => write!(f, "ψ_{{{s}}}({x})^{n}"),
        }
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TiltDir {
    Left,
    Right,
}

/// One simple tilt, written `L<i>` or `R<i>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tilt {
    pub dir: TiltDir,
    pub index: usize,
}

impl fmt::Display for Tilt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = if self.dir == TiltDir::Left { 'L' } else { 'R' };
        write!(f, "{c}{}", self.index)
    }
}

impl Serialize for Tilt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Parses a whitespace-separated word such as `"L1 R2"`.
pub fn parse_word(w: &str) -> std::result::Result<Vec<Tilt>, String> {
    w.split_whitespace()
        .map(|tok| {
            let (d, rest) = tok.split_at(1.min(tok.len()));
            let dir = match d {
                "L" => TiltDir::Left,
                "R" => TiltDir::Right,
                _ => return Err(format!("bad tilt token {tok:?}: expected L<i> or R<i>")),
            };
            let index: usize = rest.parse().map_err(|_| format!("bad tilt index in {tok:?}"))?;
            if index > 2 {
                return Err(format!("tilt index {index} outside 0..2"));
            }
            Ok(Tilt { dir, index })
        })
        .collect()
}

/// A heart with three simples, reached from a root heart by simple tilts.
#[derive(Clone, Debug)]
pub struct Heart {
    pub root: ExcCollection,
    pub root_atoms: Vec<PushforwardAtom>,
    pub simples: Vec<Term>,
    pub provenance: Vec<Tilt>,
    /// Simples of every heart from the root to this one.
    pub history: Vec<Vec<Term>>,
    /// User-supplied presentations `term = s_*E[p]`.
    pub presentations: Vec<(Term, PushforwardAtom)>,
}

/// `B(E_0, E_1, E_2)` with simples `s_*F_j` from the dual collection.
pub fn heart_from_collection(coll: &ExcCollection) -> Result<Heart> {
    if !exceptional::is_tilting(coll) {
        return Err(Error::NotTilting(format!(
            "μ({}) - μ({}) = {} > 2",
            coll.0[coll.len() - 1].label,
            coll.0[0].label,
            exceptional::thread_gap(coll)
        )));
    }
    let dual = dual_collection(coll)?;
    let simples: Vec<Term> = (0..coll.len()).map(Term::Simple).collect();
    Ok(Heart {
        root: coll.clone(),
        root_atoms: dual.0.iter().map(PushforwardAtom::of).collect(),
        simples: simples.clone(),
        provenance: vec![],
        history: vec![simples],
        presentations: vec![],
    })
}

/// The reference heart `A = B(O(-2), O(-1), O)`.
pub fn heart_a() -> Heart {
    heart_from_collection(&exceptional::heart_a_collection()).expect("reference collection is tilting")
}

impl Heart {
    pub fn root_classes(&self) -> Vec<ChernP2> {
        self.root_atoms.iter().map(|a| a.k_class()).collect()
    }

    pub fn classes(&self) -> Vec<ChernP2> {
        let r = self.root_classes();
        self.simples.iter().map(|t| t.class(&r)).collect()
    }

    /// Coordinates of the simple classes in the basis of root simples.
    pub fn coordinates(&self) -> Vec<Vec<i64>> {
        let r = self.root_classes();
        self.classes()
            .iter()
            .map(|c| localcy4::coordinates(&r, c).expect("simple classes are integral combinations"))
            .collect()
    }

    /// Whether the root is `A`, where the Mukai flop acts.
    pub fn is_a_rooted(&self) -> bool {
        self.root.classes() == exceptional::heart_a_collection().classes()
    }

    pub fn name(&self) -> String {
        if self.provenance.is_empty() {
            "root".into()
        } else {
            self.provenance.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
        }
    }

    /// Adds `term = atom` after checking classes.
    pub fn register_alternate_presentation(&mut self, term: &Term, atom: PushforwardAtom) -> Result<()> {
        let c = term.class(&self.root_classes());
        if c != atom.k_class() {
            return Err(Error::ClassMismatch(format!("{term} has class {c}, {} has {}", atom.display(), atom.k_class())));
        }
        self.presentations.push((term.clone(), atom));
        Ok(())
    }

    /// Solves the Ext problem on every object needed for this heart.
    pub fn solve(&self, explain: bool) -> Result<HeartSolution> {
        build_solution(self, explain)
    }
}

/// Registrations that seed the P² fact store.
#[derive(Clone, Debug)]
enum Registration {
    Strong(Vec<(String, ChernP2)>),
    Sequence { a: (String, ChernP2), b: (u64, String, ChernP2), c: (String, ChernP2) },
}

fn build_store(regs: &[Registration]) -> Result<FactStore> {
    let mut st = FactStore::new();
    for r in regs {
        match r {
            Registration::Strong(c) => st.register_strong_collection_vanishing(c)?,
            Registration::Sequence { a, b, c } => {
                let ma = st.register_generator(&a.0, &a.1)?;
                let mb = st.register_generator(&b.1, &b.2)?;
                let mc = st.register_generator(&c.0, &c.1)?;
                st.register_sequence(&ma, (b.0, &mb), &mc)?;
            }
        }
    }
    Ok(st)
}

/// The sheaves underlying the root atoms, ordered as an exceptional collection.
fn root_atom_collection(h: &Heart) -> Option<Vec<(String, ChernP2)>> {
    let mut v: Vec<ExcObject> = h.root_atoms.iter().map(|a| ExcObject::named(&a.label, a.base)).collect();
    v.sort_by_key(|e| e.slope());
    let c = ExcCollection(v);
    exceptional::is_exceptional_collection(&c).then(|| c.0.iter().map(|e| (e.label.clone(), e.cls)).collect())
}

struct Materializer {
    regs: Vec<Registration>,
    collections: Vec<Vec<(String, ChernP2)>>,
    store: FactStore,
}

impl Materializer {
    fn exact(&mut self, a: &ChernP2, b: &ChernP2, la: &str, lb: &str) -> Result<Option<[u64; 3]>> {
        let ma = self.store.register_generator(la, a)?;
        let mb = self.store.register_generator(lb, b)?;
        let g = ma.dual().expect("dual").tensor(&mb);
        Ok(self.store.compute(&g)?.values())
    }

    /// Replaces an adjacent pair `(first, second)` of some known collection.
    fn mutate_collection(&mut self, first: &ChernP2, second: &ChernP2, new: [(String, ChernP2); 2]) -> Result<()> {
        let found = self.collections.iter().find_map(|c| {
            c.windows(2).position(|w| w[0].1 == *first && w[1].1 == *second).map(|p| (c.clone(), p))
        });
        if let Some((mut c, p)) = found {
            c[p] = new[0].clone();
            c[p + 1] = new[1].clone();
            if !self.collections.contains(&c) {
                self.regs.push(Registration::Strong(c.clone()));
                self.store.register_strong_collection_vanishing(&c)?;
                self.collections.push(c);
            }
        }
        Ok(())
    }

    /// A pushforward presentation of `φ_s(x)` or `ψ_s(x)` when the universal map is
    /// the pushforward of the evaluation map of an exceptional pair on P².
    fn materialize(&mut self, dir: TiltDir, s: &PushforwardAtom, x: &PushforwardAtom, n: u64) -> Result<Option<PushforwardAtom>> {
        let (a, p, b, q) = (s.base, s.shift, x.base, x.shift);
        let (la, lb) = (s.label.clone(), x.label.clone());
        let (src, dst, lsrc, ldst) = match dir {
            TiltDir::Left if q == p - 1 => (a, b, &la, &lb),
            TiltDir::Right if q == p + 1 => (b, a, &lb, &la),
            _ => return Ok(None),
        };
        if self.exact(&src, &dst, lsrc, ldst)? != Some([n, 0, 0]) || self.exact(&dst, &src, ldst, lsrc)? != Some([0, 0, 0]) {
            return Ok(None);
        }
        // Left: evaluation A^n → B. Right: coevaluation B → A^n.
        let m = a.scale(n as i64) - b;
        let (cls, shift, label) = match dir {
            TiltDir::Left if m.r > 0 => (m, q + 1, format!("ker(L {la}, {lb})")),
            TiltDir::Left if m.r < 0 => (-m, q, format!("coker(L {la}, {lb})")),
            TiltDir::Right if m.r > 0 => (m, q - 1, format!("coker(R {la}, {lb})")),
            TiltDir::Right if m.r < 0 => (-m, q, format!("ker(R {la}, {lb})")),
            _ => return Ok(None),
        };
        if !kclass::is_exceptional_class(&cls) {
            return Ok(None);
        }
        let label = kclass::standard_name(&cls).unwrap_or(label);
        self.store.register_generator(&label, &cls)?;
        match dir {
            TiltDir::Left if m.r > 0 => {
                let reg = Registration::Sequence { a: (label.clone(), cls), b: (n, la.clone(), a), c: (lb.clone(), b) };
                self.push_sequence(reg)?;
            }
            TiltDir::Right if m.r > 0 => {
                let reg = Registration::Sequence { a: (lb.clone(), b), b: (n, la.clone(), a), c: (label.clone(), cls) };
                self.push_sequence(reg)?;
            }
            _ => {}
        }
        let new = (label.clone(), cls);
        match dir {
            TiltDir::Left => self.mutate_collection(&a, &b, [new, (la, a)])?,
            TiltDir::Right => self.mutate_collection(&b, &a, [(la, a), new])?,
        }
        Ok(Some(PushforwardAtom::new(&label, cls, shift)))
    }

    fn push_sequence(&mut self, r: Registration) -> Result<()> {
        if let Registration::Sequence { a, b, c } = &r {
            let ma = self.store.register_generator(&a.0, &a.1)?;
            let mb = self.store.register_generator(&b.1, &b.2)?;
            let mc = self.store.register_generator(&c.0, &c.1)?;
            self.store.register_sequence(&ma, (b.0, &mb), &mc)?;
        }
        self.regs.push(r);
        Ok(())
    }
}

/// Ext dimensions between every object reachable from a heart's simples.
#[derive(Clone, Debug)]
pub struct HeartSolution {
    pub cores: Vec<Term>,
    pub atoms: BTreeMap<usize, PushforwardAtom>,
    pub solution: ExtSolution,
    pub simples: Vec<Term>,
    pub labels: Vec<String>,
}

impl HeartSolution {
    fn obj(&self, t: &Term) -> Option<ObjRef> {
        let (c, k) = t.split();
        self.cores.iter().position(|x| x == c).map(|i| ObjRef::new(i, k))
    }

    /// `Ext^•(x, y)` in degrees `0..4`, if both objects were part of the problem.
    pub fn ext(&self, x: &Term, y: &Term) -> Option<GradedExtX> {
        Some(self.solution.graded(self.obj(x)?, self.obj(y)?))
    }

    /// `Ext^•(x, y)` in every degree that may be nonzero.
    pub fn series(&self, x: &Term, y: &Term) -> Option<BTreeMap<i64, DimInterval>> {
        Some(self.solution.series(self.obj(x)?, self.obj(y)?))
    }

    pub fn quiver(&self) -> ExtQuiver {
        let n = self.simples.len();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| self.ext(&self.simples[i], &self.simples[j]).expect("simples are in the problem")).collect())
            .collect();
        ExtQuiver { labels: self.labels.clone(), entries }
    }

    /// The pushforward presentation used for a term, if any.
    pub fn atom_of(&self, t: &Term) -> Option<PushforwardAtom> {
        let (c, k) = t.split();
        let i = self.cores.iter().position(|x| x == c)?;
        self.atoms.get(&i).map(|a| a.shifted(k))
    }
}

/// The Ext problem behind a heart, with its cores and their pushforward presentations.
pub struct HeartProblem {
    pub problem: ExtProblem,
    pub cores: Vec<Term>,
    pub atoms: BTreeMap<usize, PushforwardAtom>,
}

fn build_solution(h: &Heart, explain: bool) -> Result<HeartSolution> {
    let HeartProblem { problem, cores, atoms } = heart_problem(h, explain)?;
    let solution = problem.solve()?;
    let labels = simple_labels(h);
    Ok(HeartSolution { cores, atoms, solution, simples: h.simples.clone(), labels })
}

pub fn heart_problem(h: &Heart, explain: bool) -> Result<HeartProblem> {
    // universe of cores
    let mut all: Vec<Term> = vec![];
    for hs in &h.history {
        for t in hs {
            t.collect(&mut all);
        }
    }
    if h.is_a_rooted() {
        let mirrored: Vec<Term> = all.iter().map(|t| t.psi()).collect();
        for t in mirrored {
            t.collect(&mut all);
        }
    }
    let mut cores: Vec<Term> = vec![];
    for t in &all {
        let (c, _) = t.split();
        if !cores.contains(c) {
            cores.push(c.clone());
        }
    }
    // children before parents so that atoms of parts are known first
    cores.sort_by_key(depth);
    let roots = h.root_classes();

    let mut regs = vec![];
    let mut collections = vec![];
    if let Some(c) = root_atom_collection(h) {
        regs.push(Registration::Strong(c.clone()));
        collections.push(c);
    }
    let store = build_store(&regs)?;
    let mut mat = Materializer { regs, collections, store };

    let mut atoms: BTreeMap<usize, PushforwardAtom> = BTreeMap::new();
    let atom_of = |atoms: &BTreeMap<usize, PushforwardAtom>, cores: &[Term], t: &Term| -> Option<PushforwardAtom> {
        let (c, k) = t.split();
        let i = cores.iter().position(|x| x == c)?;
        atoms.get(&i).map(|a| a.shifted(k))
    };
    for (i, c) in cores.iter().enumerate() {
        if let Term::Simple(j) = c {
            atoms.insert(i, h.root_atoms[*j].clone());
            continue;
        }
        if let Some((_, a)) = h.presentations.iter().find(|(t, _)| t == c) {
            atoms.insert(i, a.clone());
            continue;
        }
        let (dir, s, x, n) = match c {
            Term::Left { s, x, n } => (TiltDir::Left, s, x, *n),
            Term::Right { s, x, n } => (TiltDir::Right, s, x, *n),
            _ => unreachable!("cores are not shifts"),
        };
        if let (Some(sa), Some(xa)) = (atom_of(&atoms, &cores, s), atom_of(&atoms, &cores, x)) {
            if let Some(a) = mat.materialize(dir, &sa, &xa, n)? {
                atoms.insert(i, a);
            }
        }
    }

    let mut prob = ExtProblem::new(4);
    prob.serre = true;
    prob.euler = true;
    prob.explain = explain;
    for c in &cores {
        prob.add_object(&c.to_string(), c.class(&roots), c.amplitude());
    }
    let refer = |t: &Term| -> ObjRef {
        let (c, k) = t.split();
        ObjRef::new(cores.iter().position(|x| x == c).expect("in universe"), k)
    };
    // Koszul facts between atoms
    let mut store = mat.store;
    for (&i, a) in &atoms {
        for (&j, b) in &atoms {
            let series = koszul_series(&mut store, a, b)?;
            let (lo, hi) = prob.range(i, j);
            let (slo, shi) = (*series.keys().next().expect("nonempty"), *series.keys().last().expect("nonempty"));
            for d in lo.min(slo)..=hi.max(shi) {
                let v = series.get(&d).copied().unwrap_or(DimInterval::ZERO);
                prob.add_fact(ObjRef::new(i, 0), ObjRef::new(j, 0), d, v, "Koszul");
            }
        }
    }
    // tilt triangles
    for (i, c) in cores.iter().enumerate() {
        let me = ObjRef::new(i, 0);
        match c {
            Term::Left { s, x, n } => prob.add_triangle(Triangle {
                label: c.to_string(),
                a: vec![(refer(x), 1)],
                b: vec![(me, 1)],
                c: vec![(refer(s), *n)],
                universal: Universality::Eval(refer(s)),
            }),
            Term::Right { s, x, n } => prob.add_triangle(Triangle {
                label: c.to_string(),
                a: vec![(refer(s), *n)],
                b: vec![(me, 1)],
                c: vec![(refer(x), 1)],
                universal: Universality::Coeval(refer(s)),
            }),
            _ => {}
        }
    }
    if h.is_a_rooted() {
        for (i, x) in cores.iter().enumerate() {
            for (j, y) in cores.iter().enumerate() {
                let (px, py) = (refer(&x.psi()), refer(&y.psi()));
                if (px.obj, py.obj) > (i, j) {
                    prob.add_equal_pair((i, j), (px.obj, py.obj), "Mukai flop");
                }
            }
        }
    }
    for (k, hs) in h.history.iter().enumerate() {
        prob.add_schur_group(&format!("heart {k}"), hs.iter().map(refer).collect());
    }
    Ok(HeartProblem { problem: prob, cores, atoms })
}

fn depth(t: &Term) -> usize {
    match t {
        Term::Simple(_) => 0,
        Term::Shift(c, _) => depth(c),
        Term::Left { s, x, .. } | Term::Right { s, x, .. } => 1 + depth(s).max(depth(x)),
    }
}

fn simple_labels(h: &Heart) -> Vec<String> {
    h.simples.iter().map(|t| t.to_string()).collect()
}

/// Graded Ext-quiver: `entries[i][j] = Ext^•(S_i, S_j)`. Arrows `i → j` of degree
/// `k` count `Ext^k(S_j, S_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtQuiver {
    pub labels: Vec<String>,
    pub entries: Vec<Vec<GradedExtX>>,
}

impl ExtQuiver {
    pub fn ext(&self, i: usize, j: usize) -> GradedExtX {
        self.entries[i][j]
    }

    pub fn is_exact(&self) -> bool {
        self.entries.iter().flatten().all(|g| g.is_exact())
    }

    /// Relabels vertices: new vertex `perm[i]` is old vertex `i`.
    pub fn permuted(&self, perm: &[usize]) -> ExtQuiver {
        let n = self.labels.len();
        let mut labels = vec![String::new(); n];
        let mut entries = vec![vec![GradedExtX::zero(); n]; n];
        for i in 0..n {
            labels[perm[i]] = self.labels[i].clone();
            for j in 0..n {
                entries[perm[i]][perm[j]] = self.entries[i][j];
            }
        }
        ExtQuiver { labels, entries }
    }

    /// Degree-1 arrows in black and degree-2 arrows in red, one edge per arrow.
    /// Degrees 3 and 4 follow by Serre duality and are omitted.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph ext_quiver {\n");
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(&format!("  {i} [label=\"{}\"];\n", l.replace('"', "\\\"")));
        }
        for (k, color) in [(1usize, "black"), (2, "red")] {
            for i in 0..self.labels.len() {
                for j in 0..self.labels.len() {
                    if k == 2 && j < i {
                        // degree 2 is symmetric; draw each unordered pair once
                        continue;
                    }
                    let d = self.entries[j][i].dims[k];
                    let count = d.value().unwrap_or(d.lo);
                    let note = if d.is_exact() { String::new() } else { format!(", comment=\"{d}\"") };
                    for _ in 0..count {
                        out.push_str(&format!("  {i} -> {j} [deg={k}, color={color}{note}];\n"));
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.labels.len() {
            for j in 0..self.labels.len() {
                out.push_str(&format!("Ext({}, {}) = {}\n", self.labels[i], self.labels[j], self.entries[i][j]));
            }
        }
        out
    }
}

/// The Ext-quiver of a heart.
pub fn ext_quiver(h: &Heart) -> Result<ExtQuiver> {
    Ok(h.solve(false)?.quiver())
}

/// `L_{S_i} H` or `R_{S_i} H`.
pub fn simple_tilt(h: &Heart, i: usize, dir: TiltDir) -> Result<Heart> {
    if i >= h.simples.len() {
        return Err(Error::InvalidClass(format!("no simple with index {i}")));
    }
    let q = ext_quiver(h)?;
    let self_ext = q.ext(i, i).dims[1];
    if self_ext.lo > 0 {
        return Err(Error::SelfExtObstruction(format!("Ext¹(S{i}, S{i}) = {self_ext}")));
    }
    if !self_ext.is_exact() {
        return Err(Error::Uncertified(format!("Ext¹(S{i}, S{i}) ∈ {self_ext}")));
    }
    let s = &h.simples[i];
    let mut simples = vec![];
    for (j, x) in h.simples.iter().enumerate() {
        if j == i {
            let k = if dir == TiltDir::Left { -1 } else { 1 };
            simples.push(Term::shift(s, k));
            continue;
        }
        let d = match dir {
            TiltDir::Left => q.ext(i, j).dims[1],
            TiltDir::Right => q.ext(j, i).dims[1],
        };
        let n = d.value().ok_or_else(|| Error::Uncertified(format!("Ext¹ between S{i} and S{j} is only known to lie in {d}")))?;
        simples.push(match dir {
            TiltDir::Left => Term::left(s, x, n),
            TiltDir::Right => Term::right(s, x, n),
        });
    }
    let mut out = h.clone();
    out.simples = simples.clone();
    out.provenance.push(Tilt { dir, index: i });
    // a tilt followed by its inverse returns to an earlier heart
    if out.history.len() >= 2 && out.history[out.history.len() - 2] == simples {
        out.history.pop();
        out.provenance.truncate(out.provenance.len() - 2);
    } else {
        out.history.push(simples);
    }
    Ok(out)
}

/// Applies a word of tilts from left to right.
pub fn tilt_word(h: &Heart, word: &[Tilt]) -> Result<Heart> {
    word.iter().try_fold(h.clone(), |acc, t| simple_tilt(&acc, t.index, t.dir))
}

/// The image of a heart under the Mukai flop: replays the mirrored tilt word
/// `i ↦ 2 - i` from `A`. Vertex `i` of the result is `Ψ` of vertex `2 - i`.
pub fn psi_transport(h: &Heart) -> Result<Heart> {
    if !h.is_a_rooted() {
        return Err(Error::NotApplicable("the Mukai flop is only tracked for hearts reached from A".into()));
    }
    let word: Vec<Tilt> =
        h.provenance.iter().map(|t| Tilt { dir: t.dir, index: localcy4::mukai_involution(t.index) }).collect();
    let out = tilt_word(&heart_a(), &word)?;
    for (k, t) in out.simples.iter().enumerate() {
        if *t != h.simples[localcy4::mukai_involution(k)].psi() {
            return Err(Error::Inconsistent(format!("Ψ-image of vertex {k} does not match")));
        }
    }
    Ok(out)
}

/// Simple classes together with the Ext¹ counts that a tilt consumes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassHeart {
    pub classes: Vec<ChernP2>,
    /// `ext1[i][j] = dim Ext¹(S_i, S_j)` where known.
    pub ext1: Vec<Vec<Option<u64>>>,
}

impl ClassHeart {
    pub fn from_quiver(classes: Vec<ChernP2>, q: &ExtQuiver) -> Self {
        let ext1 = q.entries.iter().map(|row| row.iter().map(|g| g.dims[1].value()).collect()).collect();
        ClassHeart { classes, ext1 }
    }
}

/// Class-level tilt: `[φ_S X] = [X] + n[S]`, `[S[∓1]] = -[S]`, and the only
/// Ext¹ counts of the new heart that are recorded are those against `S[∓1]`.
pub fn class_tilt(h: &ClassHeart, i: usize, dir: TiltDir) -> Result<ClassHeart> {
    let k = h.classes.len();
    if h.ext1[i][i] != Some(0) {
        return Err(Error::SelfExtObstruction(format!("Ext¹(S{i}, S{i}) = {:?}", h.ext1[i][i])));
    }
    let mut classes = h.classes.clone();
    let mut ext1 = vec![vec![None; k]; k];
    ext1[i][i] = Some(0);
    classes[i] = -h.classes[i];
    for j in 0..k {
        if j == i {
            continue;
        }
        let n = match dir {
            TiltDir::Left => h.ext1[i][j],
            TiltDir::Right => h.ext1[j][i],
        }
        .ok_or_else(|| Error::Uncertified(format!("Ext¹ between S{i} and S{j} unknown")))?;
        classes[j] = h.classes[j] + h.classes[i].scale(n as i64);
        match dir {
            TiltDir::Left => ext1[j][i] = Some(n),
            TiltDir::Right => ext1[i][j] = Some(n),
        }
    }
    Ok(ClassHeart { classes, ext1 })
}

/// JSON view of a heart.
#[derive(Clone, Debug, Serialize)]
pub struct HeartReport {
    pub provenance: Vec<Tilt>,
    pub root: ExcCollection,
    pub simples: Vec<SimpleReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimpleReport {
    pub term: Term,
    #[serde(rename = "class")]
    pub cls: ChernP2,
    pub coordinates: Vec<i64>,
    pub presentation: Option<String>,
}

impl HeartReport {
    pub fn new(h: &Heart, sol: &HeartSolution) -> Self {
        let classes = h.classes();
        let coords = h.coordinates();
        let simples = h
            .simples
            .iter()
            .enumerate()
            .map(|(k, t)| SimpleReport {
                term: t.clone(),
                cls: classes[k],
                coordinates: coords[k].clone(),
                presentation: sol.atom_of(t).map(|a| a.display()),
            })
            .collect();
        HeartReport { provenance: h.provenance.clone(), root: h.root.clone(), simples }
    }
}

/// `H^*` dims of the Koszul components of a pair of atoms, exposed for reports.
pub fn atom_components(h: &Heart, a: &PushforwardAtom, b: &PushforwardAtom) -> Result<[GradedDims; 3]> {
    let mut regs = vec![];
    if let Some(c) = root_atom_collection(h) {
        regs.push(Registration::Strong(c));
    }
    let mut st = build_store(&regs)?;
    localcy4::koszul_components(&mut st, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exceptional::{line_bundles, omega_example};

    fn s(j: usize) -> Term {
        Term::Simple(j)
    }

    #[test]
    fn heart_a_quiver() {
        let q = ext_quiver(&heart_a()).unwrap();
        let v = |i, j| q.ext(i, j).values().unwrap();
        assert_eq!(v(0, 1), [0, 3, 0, 3, 0]);
        assert_eq!(v(1, 2), [0, 3, 0, 3, 0]);
        assert_eq!(v(0, 2), [0, 0, 3, 0, 0]);
        assert_eq!(v(0, 0), [1, 0, 1, 0, 1]);
        assert_eq!(v(2, 2), [1, 0, 1, 0, 1]);
        assert_eq!(v(1, 1), [1, 0, 10, 0, 1]);
    }

    #[test]
    fn roots_of_other_collections() {
        let h = heart_from_collection(&line_bundles()).unwrap();
        let names: Vec<String> = h.root_atoms.iter().map(|a| a.display()).collect();
        assert_eq!(names, vec!["s_*O", "s_*Ω(1)[1]", "s_*O(-1)[2]"]);
        assert!(matches!(heart_from_collection(&omega_example()), Err(Error::NotTilting(_))));
    }

    #[test]
    fn tilt_at_s1() {
        let c = simple_tilt(&heart_a(), 1, TiltDir::Left).unwrap();
        assert_eq!(c.simples[1], Term::shift(&s(1), -1));
        assert_eq!(c.simples[0], Term::left(&s(1), &s(0), 3));
        assert_eq!(c.coordinates(), vec![vec![1, 3, 0], vec![0, -1, 0], vec![0, 3, 1]]);
        let sol = c.solve(false).unwrap();
        assert_eq!(sol.atom_of(&c.simples[0]).unwrap().k_class(), -crate::cohomology::p_class());
        let q = sol.quiver();
        let v = |i, j| q.ext(i, j).values().unwrap();
        assert_eq!(v(1, 0), [0, 27, 0, 3, 0]);
        assert_eq!(v(2, 0), [0, 0, 75, 0, 0]);
        assert_eq!(v(0, 0), [1, 0, 73, 0, 1]);
        assert_eq!(v(2, 2), [1, 0, 73, 0, 1]);
        assert_eq!(v(1, 1), [1, 0, 10, 0, 1]);
        assert_eq!(v(1, 2), [0, 27, 0, 3, 0]);
        assert_eq!(sol.ext(&s(2), &c.simples[0]).unwrap().values(), Some([0, 6, 0, 9, 0]));
    }

    #[test]
    fn tilt_at_s2() {
        let g = simple_tilt(&heart_a(), 2, TiltDir::Left).unwrap();
        assert_eq!(g.simples[0], s(0));
        let sol = g.solve(false).unwrap();
        let w = sol.atom_of(&g.simples[1]).unwrap();
        assert_eq!((w.base, w.shift), (ChernP2::line(-4), 2));
        let q = sol.quiver();
        let v = |i, j| q.ext(i, j).values().unwrap();
        assert_eq!(v(2, 0), [0, 3, 0, 0, 0]);
        assert_eq!(v(1, 0), [0, 0, 6, 3, 0]);
        assert_eq!(v(1, 2), [0, 3, 0, 0, 0]);
        assert_eq!(v(0, 1), [0, 3, 6, 0, 0]);
        assert_eq!(v(0, 0), [1, 0, 1, 0, 1]);
        assert_eq!(v(1, 1), [1, 0, 1, 0, 1]);
    }

    #[test]
    fn left_then_right_is_identity() {
        let a = heart_a();
        for i in 0..3 {
            let l = simple_tilt(&a, i, TiltDir::Left).unwrap();
            let back = simple_tilt(&l, i, TiltDir::Right).unwrap();
            assert_eq!(back.simples, a.simples);
            assert!(back.provenance.is_empty());
            assert_eq!(ext_quiver(&back).unwrap(), ext_quiver(&a).unwrap());
        }
    }

    #[test]
    fn psi_transport_mirrors() {
        let l0 = simple_tilt(&heart_a(), 0, TiltDir::Left).unwrap();
        let p = psi_transport(&l0).unwrap();
        assert_eq!(p.provenance, vec![Tilt { dir: TiltDir::Left, index: 2 }]);
        let q0 = ext_quiver(&l0).unwrap();
        let qp = ext_quiver(&p).unwrap();
        assert_eq!(q0.permuted(&[2, 1, 0]).entries, qp.entries);
        let c = simple_tilt(&heart_a(), 1, TiltDir::Left).unwrap();
        assert_eq!(psi_transport(&c).unwrap().simples, c.simples.iter().rev().map(|t| t.psi()).collect::<Vec<_>>());
        let h = heart_from_collection(&line_bundles()).unwrap();
        assert!(matches!(psi_transport(&h), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn alternate_presentation_checks_class() {
        let mut c = simple_tilt(&heart_a(), 1, TiltDir::Left).unwrap();
        let u0 = c.simples[0].clone();
        let p = PushforwardAtom::new("P", crate::cohomology::p_class(), 1);
        c.register_alternate_presentation(&u0, p.clone()).unwrap();
        let bad = PushforwardAtom::new("P", crate::cohomology::p_class(), 0);
        assert!(matches!(c.register_alternate_presentation(&u0, bad), Err(Error::ClassMismatch(_))));
    }

    #[test]
    fn word_parsing() {
        assert_eq!(parse_word("L1 R2").unwrap().len(), 2);
        assert!(parse_word("").unwrap().is_empty());
        assert!(parse_word("X1").is_err());
        assert!(parse_word("L3").is_err());
    }

    #[test]
    fn dot_output() {
        let q = ext_quiver(&heart_a()).unwrap();
        let d = q.to_dot();
        assert_eq!(d.matches("deg=1").count(), 12);
        // loops 1 + 10 + 1 and 3 between S0 and S2
        assert_eq!(d.matches("deg=2").count(), 15);
    }
}
