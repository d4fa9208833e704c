//! Secondary quivers of pullback collections and universal-extension tilting objects.
//!
//! For a full strong collection `(E_0, E_1, E_2)` of sheaves on P², put
//! `T_i = π^*E_i`. The secondary quiver has `dim Ext¹_X(T_j, T_i)` arrows from
//! `i` to `j`. When it has arrows, `T = ⊕ T_i` is not tilting, and the universal
//! extensions of the targets by the sources repair it.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cohomology::FactStore;
use crate::exceptional::{ExcCollection, ExcObject};
use crate::kclass::ChernP2;
use crate::les::DimInterval;
use crate::localcy4::{pullback_ext, pullback_ext_bounds, ExtProblem, GradedExtX, ObjRef, Triangle, Universality};
use crate::{Error, Result};

/// Default number of `SⁿT` summands summed for Hom lower bounds.
pub const DEFAULT_N_MAX: u32 = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SecondaryQuiver {
    pub labels: Vec<String>,
    pub classes: Vec<ChernP2>,
    /// `(i, j) ↦ dim Ext¹_X(T_j, T_i)`; zero counts are omitted.
    #[serde(serialize_with = "ser_counts")]
    pub counts: BTreeMap<(usize, usize), u64>,
}

fn ser_counts<S: serde::Serializer>(m: &BTreeMap<(usize, usize), u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Arrow {
        from: usize,
        to: usize,
        count: u64,
    }
    let v: Vec<Arrow> = m.iter().map(|(&(from, to), &count)| Arrow { from, to, count }).collect();
    v.serialize(s)
}

impl SecondaryQuiver {
    /// A quiver with the given counts and placeholder vertices.
    pub fn from_counts(classes: Vec<ChernP2>, counts: &[((usize, usize), u64)]) -> Self {
        let labels = (0..classes.len()).map(|i| format!("T{i}")).collect();
        let counts = counts.iter().filter(|(_, c)| *c > 0).copied().collect();
        SecondaryQuiver { labels, classes, counts }
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn arrow_total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph secondary {\n");
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(&format!("  {i} [label=\"{}\"];\n", l.replace('"', "\\\"")));
        }
        for (&(i, j), &c) in &self.counts {
            for _ in 0..c {
                out.push_str(&format!("  {i} -> {j} [deg=1];\n"));
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(&format!("T{i} = π^*{l}\n"));
        }
        if self.counts.is_empty() {
            out.push_str("no arrows\n");
        }
        for (&(i, j), &c) in &self.counts {
            out.push_str(&format!("{i} -> {j}: {c}\n"));
        }
        out
    }
}

fn sheaves(coll: &ExcCollection) -> Vec<ExcObject> {
    coll.0.iter().map(|e| ExcObject { shift: 0, ..e.clone() }).collect()
}

fn seeded_store(objs: &[ExcObject]) -> Result<FactStore> {
    let mut st = FactStore::new();
    let c: Vec<(String, ChernP2)> = objs.iter().map(|e| (e.label.clone(), e.cls)).collect();
    st.register_strong_collection_vanishing(&c)?;
    Ok(st)
}

/// Pullback Ext between every pair of summands, as bounds.
pub fn pullback_table(coll: &ExcCollection, n_max: u32) -> Result<Vec<Vec<GradedExtX>>> {
    let objs = sheaves(coll);
    let mut st = seeded_store(&objs)?;
    objs.iter().map(|e| objs.iter().map(|f| pullback_ext_bounds(&mut st, e, f, n_max)).collect()).collect()
}

/// Secondary quiver of `π^*` of a collection. Shifts are dropped first.
pub fn build_secondary(coll: &ExcCollection) -> Result<SecondaryQuiver> {
    let objs = sheaves(coll);
    let mut st = seeded_store(&objs)?;
    let mut counts = BTreeMap::new();
    for (i, ei) in objs.iter().enumerate() {
        for (j, ej) in objs.iter().enumerate() {
            let p = pullback_ext(&mut st, ej, ei, DEFAULT_N_MAX)?;
            let c = p.ext.dims[1].value().expect("pullback_ext pins degree 1");
            if c > 0 {
                counts.insert((i, j), c);
            }
        }
    }
    let q = SecondaryQuiver { labels: objs.iter().map(|e| e.label.clone()).collect(), classes: objs.iter().map(|e| e.cls).collect(), counts };
    classify(&q)?;
    Ok(q)
}

/// Arrow-count intervals for collections whose counts are not all pinned.
pub fn secondary_bounds(coll: &ExcCollection) -> Result<BTreeMap<(usize, usize), DimInterval>> {
    let t = pullback_table(coll, 3)?;
    let n = t.len();
    let mut out = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            out.insert((i, j), t[j][i].dims[1]);
        }
    }
    Ok(out)
}

/// Whether the bounds rule out arrows `0 → 1` and `1 → 2` occurring together.
pub fn bounds_exclude_linear(b: &BTreeMap<(usize, usize), DimInterval>) -> bool {
    let zero = |k| b.get(&k).is_none_or(DimInterval::is_zero);
    zero((0, 1)) || zero((1, 2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SecondaryCase {
    NoArrows,
    /// Arrows only out of vertex 0.
    Case1,
    /// Arrows only into vertex 2.
    Case2,
}

pub fn classify(q: &SecondaryQuiver) -> Result<SecondaryCase> {
    for &(i, j) in q.counts.keys() {
        if i >= j {
            return Err(Error::ClassificationViolation(format!("arrow {i} -> {j} into a smaller or equal index")));
        }
        if j > 2 {
            return Err(Error::ClassificationViolation(format!("vertex {j} outside 0..2")));
        }
    }
    let (a01, a02, a12) = (q.count(0, 1), q.count(0, 2), q.count(1, 2));
    Ok(match (a01 > 0, a02 > 0, a12 > 0) {
        (false, false, false) => SecondaryCase::NoArrows,
        (true, _, true) => {
            return Err(Error::ClassificationViolation(format!("linear pattern 0 -> 1 ({a01}) and 1 -> 2 ({a12})")))
        }
        (true, _, false) => SecondaryCase::Case1,
        (false, _, _) => SecondaryCase::Case2,
    })
}

/// One summand of `T̃` and the extension producing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtendedSummand {
    pub index: usize,
    pub label: String,
    #[serde(rename = "class")]
    pub cls: ChernP2,
    /// `0 → ⊕ T_k^{a_k} → T̃_m → T_m → 0` as `(k, a_k)`.
    pub kernel: Vec<(usize, u64)>,
}

impl ExtendedSummand {
    pub fn is_trivial(&self) -> bool {
        self.kernel.is_empty()
    }
}

/// `[T̃_m] = [T_m] + Σ_k a_{km}[T_k]`.
pub fn universal_extension_classes(q: &SecondaryQuiver) -> Result<Vec<ExtendedSummand>> {
    let case = classify(q)?;
    let n = q.classes.len();
    Ok((0..n)
        .map(|m| {
            let kernel: Vec<(usize, u64)> = match case {
                SecondaryCase::NoArrows => vec![],
                SecondaryCase::Case1 => vec![(0, q.count(0, m))],
                SecondaryCase::Case2 if m == 2 => vec![(0, q.count(0, 2)), (1, q.count(1, 2))],
                SecondaryCase::Case2 => vec![],
            }
            .into_iter()
            .filter(|&(k, a)| a > 0 && k != m)
            .collect();
            let cls = kernel.iter().fold(q.classes[m], |acc, &(k, a)| acc + q.classes[k].scale(a as i64));
            let label = if kernel.is_empty() { format!("T{m}") } else { format!("T̃{m}") };
            ExtendedSummand { index: m, label, cls, kernel }
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub source: String,
    pub target: String,
    pub ext: GradedExtX,
    pub certified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TiltingReport {
    pub case: SecondaryCase,
    pub summands: Vec<ExtendedSummand>,
    pub pairs: Vec<PairCheck>,
    pub notes: Vec<String>,
    pub certified: bool,
    pub trace: Vec<String>,
}

/// Certifies `Ext^{≥1}(T̃_a, T̃_b) = 0` for all summands by chasing the long exact
/// sequences of the extension triangles over the pullback Ext facts.
///
/// An extension triangle is treated as universal only when its multiplicities
/// equal the pullback Ext¹ counts, so a wrong quiver leaves pairs uncertified.
pub fn verify_universal_tilting(coll: &ExcCollection, q: &SecondaryQuiver, explain: bool) -> Result<TiltingReport> {
    let summands = universal_extension_classes(q)?;
    let case = classify(q)?;
    let objs = sheaves(coll);
    let table = pullback_table(coll, DEFAULT_N_MAX)?;
    let mut prob = ExtProblem::new(4);
    prob.explain = explain;
    for e in &objs {
        prob.add_object(&format!("π^*{}", e.label), e.cls, (0, 0));
    }
    for (i, row) in table.iter().enumerate() {
        for (j, g) in row.iter().enumerate() {
            for k in 0..5 {
                prob.add_fact(ObjRef::new(i, 0), ObjRef::new(j, 0), k as i64, g.dims[k], "pullback Ext");
            }
        }
    }
    let mut notes = vec![];
    let mut tilde = vec![];
    for s in &summands {
        if s.is_trivial() {
            tilde.push(s.index);
            continue;
        }
        let id = prob.add_object(&s.label, s.cls, (0, 0));
        tilde.push(id);
        let a: Vec<(ObjRef, u64)> = s.kernel.iter().map(|&(k, m)| (ObjRef::new(k, 0), m)).collect();
        for &(k, m) in &s.kernel {
            let actual = table[s.index][k].dims[1];
            let universal = if actual.value() == Some(m) {
                Universality::Coeval(ObjRef::new(k, 0))
            } else {
                notes.push(format!("{}: multiplicity {m} of T{k} differs from dim Ext¹(T{}, T{k}) ∈ {actual}", s.label, s.index));
                Universality::None
            };
            prob.add_triangle(Triangle {
                label: format!("{} extension by T{k}", s.label),
                a: a.clone(),
                b: vec![(ObjRef::new(id, 0), 1)],
                c: vec![(ObjRef::new(s.index, 0), 1)],
                universal,
            });
        }
    }
    let sol = prob.solve()?;
    let mut pairs = vec![];
    for &x in &tilde {
        for &y in &tilde {
            let ext = sol.graded(ObjRef::new(x, 0), ObjRef::new(y, 0));
            let certified = ext.dims[1..].iter().all(DimInterval::is_zero);
            pairs.push(PairCheck { source: prob.objects[x].name.clone(), target: prob.objects[y].name.clone(), ext, certified });
        }
    }
    let certified = pairs.iter().all(|p| p.certified);
    Ok(TiltingReport { case, summands, pairs, notes, certified, trace: sol.trace })
}

/// `⟨d, e⟩ = Σ d_i e_i - Σ_{i→j} d_i e_j`.
pub fn quiver_euler_form(q: &SecondaryQuiver, d: &[i64], e: &[i64]) -> i64 {
    let diag: i64 = d.iter().zip(e).map(|(a, b)| a * b).sum();
    diag - q.counts.iter().map(|(&(i, j), &c)| c as i64 * d[i] * e[j]).sum::<i64>()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ModuleTag {
    Simple(usize),
    Projective(usize),
    Extension,
}

/// Dimension vector of a representation of the secondary quiver.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuiverModuleClass {
    pub dims: Vec<u64>,
    pub tag: Option<ModuleTag>,
}

impl QuiverModuleClass {
    pub fn new(dims: Vec<u64>) -> Self {
        QuiverModuleClass { dims, tag: None }
    }

    pub fn simple(n: usize, i: usize) -> Self {
        let mut dims = vec![0; n];
        dims[i] = 1;
        QuiverModuleClass { dims, tag: Some(ModuleTag::Simple(i)) }
    }

    /// `P_m`: its dimension at `i` counts paths from `i` to `m`.
    pub fn projective(q: &SecondaryQuiver, m: usize) -> Self {
        let n = q.classes.len();
        let mut paths = vec![0u64; n];
        paths[m] = 1;
        // arrows go from smaller to larger index
        for i in (0..m).rev() {
            paths[i] = (i + 1..=m).map(|k| q.count(i, k) * paths[k]).sum();
        }
        QuiverModuleClass { dims: paths, tag: Some(ModuleTag::Projective(m)) }
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }
}

/// `F_Q` on classes: `m ↦ Σ m_i [T_i]`.
pub fn fq_class(q: &SecondaryQuiver, m: &QuiverModuleClass) -> ChernP2 {
    m.dims.iter().zip(&q.classes).fold(ChernP2::zero(), |acc, (&d, c)| acc + c.scale(d as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exceptional::{heart_a_collection, line_bundles, mutation_orbit, omega_example};

    #[test]
    fn examples() {
        let q = build_secondary(&line_bundles()).unwrap();
        assert_eq!(q.arrow_total(), 0);
        assert_eq!(classify(&q).unwrap(), SecondaryCase::NoArrows);
        let q = build_secondary(&omega_example()).unwrap();
        assert_eq!(q.counts, BTreeMap::from([((0, 2), 3)]));
        assert_eq!(classify(&q).unwrap(), SecondaryCase::Case2);
    }

    #[test]
    fn classify_patterns() {
        let c = vec![ChernP2::zero(); 3];
        let q = |v: &[((usize, usize), u64)]| SecondaryQuiver::from_counts(c.clone(), v);
        assert_eq!(classify(&q(&[((0, 1), 2), ((0, 2), 5)])).unwrap(), SecondaryCase::Case1);
        assert_eq!(classify(&q(&[((1, 2), 4)])).unwrap(), SecondaryCase::Case2);
        assert!(matches!(classify(&q(&[((0, 1), 1), ((1, 2), 1)])), Err(Error::ClassificationViolation(_))));
        assert!(matches!(classify(&q(&[((2, 0), 1)])), Err(Error::ClassificationViolation(_))));
    }

    #[test]
    fn universal_extension() {
        let q = build_secondary(&omega_example()).unwrap();
        let s = universal_extension_classes(&q).unwrap();
        assert!(s[0].is_trivial() && s[1].is_trivial());
        assert_eq!(s[2].cls, ChernP2::line(2) + ChernP2::omega(1).scale(3));
        assert_eq!(s[2].cls.r, 7);
        let r = verify_universal_tilting(&omega_example(), &q, false).unwrap();
        assert!(r.certified, "{:#?}", r.pairs);
        assert_eq!(r.pairs.len(), 9);
    }

    #[test]
    fn corrupted_count_is_not_certified() {
        let mut q = build_secondary(&omega_example()).unwrap();
        q.counts.insert((0, 2), 2);
        let r = verify_universal_tilting(&omega_example(), &q, false).unwrap();
        assert!(!r.certified);
        assert!(!r.notes.is_empty());
    }

    #[test]
    fn tilting_input_is_trivially_certified() {
        let q = build_secondary(&heart_a_collection()).unwrap();
        let r = verify_universal_tilting(&heart_a_collection(), &q, false).unwrap();
        assert!(r.certified);
    }

    #[test]
    fn euler_form() {
        let q = build_secondary(&omega_example()).unwrap();
        let e = |i: usize| {
            let mut v = vec![0; 3];
            v[i] = 1;
            v
        };
        assert_eq!(quiver_euler_form(&q, &e(0), &e(2)), -3);
        for i in 0..3 {
            assert_eq!(quiver_euler_form(&q, &e(i), &e(i)), 1);
        }
    }

    #[test]
    fn projectives_map_to_extensions() {
        let q = build_secondary(&omega_example()).unwrap();
        let s = universal_extension_classes(&q).unwrap();
        for m in 0..3 {
            assert_eq!(fq_class(&q, &QuiverModuleClass::projective(&q, m)), s[m].cls);
            assert_eq!(fq_class(&q, &QuiverModuleClass::simple(3, m)), q.classes[m]);
        }
    }

    #[test]
    fn orbit_never_linear() {
        for c in mutation_orbit(&line_bundles(), 5).unwrap() {
            let b = secondary_bounds(&c).unwrap();
            assert!(bounds_exclude_linear(&b), "{:?}", c.labels());
        }
    }
}
