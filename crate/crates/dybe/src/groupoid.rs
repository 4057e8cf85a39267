//! Finite groupoids, connecting sets and connecting systems.
//!
//! A [`Groupoid`] materializes identity arrows and generating arrows;
//! general arrows are represented as reduced words of generators (see
//! [`Degree`]). Graph groupoids reduce words freely (adjacent inverse
//! cancellation, which on trees yields geodesics); small groupoids with
//! relations, such as the one-object Klein groupoid of the eight-vertex
//! model, carry an explicit composition table instead.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

pub type ObjIx = u32;
pub type ArrIx = u32;

#[derive(Debug, Error)]
pub enum GroupoidError {
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown arrow `{0}`")]
    UnknownArrow(String),
    #[error("arrows `{0}` and `{1}` are not composable")]
    NotComposable(String, String),
    #[error("window radius must be at least 1, got {0}")]
    WindowTooSmall(i64),
    #[error("incidence matrix shape {rows}x{cols} does not match object counts {left}x{right}")]
    IncidenceShape { rows: usize, cols: usize, left: usize, right: usize },
    #[error("incidence violation: {0}")]
    IncidenceViolation(String),
    #[error("connecting-system assignment is malformed: {0}")]
    MalformedAssignment(String),
    #[error("invalid serialized groupoid: {0}")]
    BadSerialization(String),
}

#[derive(Debug, Clone)]
pub struct Arrow {
    pub id: String,
    pub src: ObjIx,
    pub tgt: ObjIx,
    pub inv: ArrIx,
}

#[derive(Debug, Clone)]
enum Reduction {
    /// Free reduction: cancel adjacent mutually inverse generators.
    Free,
    /// Total composition table on the materialized arrows.
    Table(HashMap<(ArrIx, ArrIx), ArrIx>),
}

/// A finite groupoid with materialized identities and generators.
#[derive(Debug, Clone)]
pub struct Groupoid {
    pub name: String,
    objects: Vec<String>,
    /// Numeric value of each object (dynamical parameter), when meaningful.
    values: Vec<Option<num_complex::Complex64>>,
    arrows: Vec<Arrow>,
    obj_ix: HashMap<String, ObjIx>,
    arr_ix: HashMap<String, ArrIx>,
    /// Identity arrow per object.
    identities: Vec<ArrIx>,
    reduction: Reduction,
}

/// A reduced word of generating arrows; the grading key for composites.
///
/// `steps` is empty for identity degrees, in which case `src == tgt`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Degree {
    pub src: ObjIx,
    pub tgt: ObjIx,
    pub steps: Vec<ArrIx>,
}

impl Groupoid {
    fn new_raw(name: &str, objects: Vec<(String, Option<num_complex::Complex64>)>) -> Self {
        let mut g = Groupoid {
            name: name.to_string(),
            objects: Vec::new(),
            values: Vec::new(),
            arrows: Vec::new(),
            obj_ix: HashMap::new(),
            arr_ix: HashMap::new(),
            identities: Vec::new(),
            reduction: Reduction::Free,
        };
        for (id, v) in objects {
            let ix = g.objects.len() as ObjIx;
            g.obj_ix.insert(id.clone(), ix);
            g.objects.push(id);
            g.values.push(v);
        }
        for ix in 0..g.objects.len() as ObjIx {
            let id = format!("1@{}", g.objects[ix as usize]);
            let a = g.arrows.len() as ArrIx;
            g.arr_ix.insert(id.clone(), a);
            g.arrows.push(Arrow { id, src: ix, tgt: ix, inv: a });
            g.identities.push(a);
        }
        g
    }

    /// Add a mutually inverse generator pair `u -> v`, `v -> u`.
    fn add_edge_pair(&mut self, id_fwd: String, id_bwd: String, u: ObjIx, v: ObjIx) {
        let a = self.arrows.len() as ArrIx;
        let b = a + 1;
        self.arr_ix.insert(id_fwd.clone(), a);
        self.arrows.push(Arrow { id: id_fwd, src: u, tgt: v, inv: b });
        self.arr_ix.insert(id_bwd.clone(), b);
        self.arrows.push(Arrow { id: id_bwd, src: v, tgt: u, inv: a });
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn object_name(&self, ix: ObjIx) -> &str {
        &self.objects[ix as usize]
    }

    pub fn object_ix(&self, name: &str) -> Result<ObjIx, GroupoidError> {
        self.obj_ix
            .get(name)
            .copied()
            .ok_or_else(|| GroupoidError::UnknownObject(name.to_string()))
    }

    pub fn object_value(&self, ix: ObjIx) -> Option<num_complex::Complex64> {
        self.values[ix as usize]
    }

    pub fn arrow(&self, ix: ArrIx) -> &Arrow {
        &self.arrows[ix as usize]
    }

    pub fn arrow_ix(&self, id: &str) -> Result<ArrIx, GroupoidError> {
        self.arr_ix
            .get(id)
            .copied()
            .ok_or_else(|| GroupoidError::UnknownArrow(id.to_string()))
    }

    pub fn arrows(&self) -> impl Iterator<Item = (ArrIx, &Arrow)> {
        self.arrows.iter().enumerate().map(|(i, a)| (i as ArrIx, a))
    }

    pub fn identity_of(&self, obj: ObjIx) -> ArrIx {
        self.identities[obj as usize]
    }

    pub fn is_identity(&self, a: ArrIx) -> bool {
        let ar = self.arrow(a);
        ar.src == ar.tgt && self.identities[ar.src as usize] == a
    }

    pub fn inverse(&self, a: ArrIx) -> ArrIx {
        self.arrows[a as usize].inv
    }

    /// Source fiber: materialized arrows with the given source.
    pub fn source_fiber(&self, obj: ObjIx) -> Vec<ArrIx> {
        self.arrows()
            .filter(|(_, a)| a.src == obj)
            .map(|(i, _)| i)
            .collect()
    }

    /// Target fiber: materialized arrows with the given target.
    pub fn target_fiber(&self, obj: ObjIx) -> Vec<ArrIx> {
        self.arrows()
            .filter(|(_, a)| a.tgt == obj)
            .map(|(i, _)| i)
            .collect()
    }

    /// Compose `first` then `second`; defined iff `t(first) = s(second)`.
    pub fn compose(&self, first: ArrIx, second: ArrIx) -> Result<Degree, GroupoidError> {
        if self.arrow(first).tgt != self.arrow(second).src {
            return Err(GroupoidError::NotComposable(
                self.arrow(first).id.clone(),
                self.arrow(second).id.clone(),
            ));
        }
        Ok(self.degree_of_path(self.arrow(first).src, &[first, second]))
    }

    /// Reduce a composable word of materialized arrows to its degree.
    ///
    /// The word is applied left to right: `steps[0]` first.
    pub fn degree_of_path(&self, src: ObjIx, steps: &[ArrIx]) -> Degree {
        match &self.reduction {
            Reduction::Free => {
                let mut word: Vec<ArrIx> = Vec::with_capacity(steps.len());
                for &s in steps {
                    if self.is_identity(s) {
                        continue;
                    }
                    if let Some(&top) = word.last() {
                        if self.inverse(top) == s {
                            word.pop();
                            continue;
                        }
                    }
                    word.push(s);
                }
                let tgt = word.last().map_or(src, |&a| self.arrow(a).tgt);
                Degree { src, tgt, steps: word }
            }
            Reduction::Table(table) => {
                let mut acc = self.identity_of(src);
                for &s in steps {
                    acc = *table.get(&(acc, s)).expect("composition table is total");
                }
                let steps = if self.is_identity(acc) { vec![] } else { vec![acc] };
                Degree { src, tgt: self.arrow(acc).tgt, steps }
            }
        }
    }

    /// Groupoid of an unoriented graph: two opposite arrows per edge.
    ///
    /// Free composition is not materialized; composites are reduced words.
    pub fn from_graph(
        name: &str,
        objects: &[(&str, Option<num_complex::Complex64>)],
        edges: &[(&str, &str)],
    ) -> Result<Arc<Self>, GroupoidError> {
        let mut g = Self::new_raw(
            name,
            objects.iter().map(|(o, v)| (o.to_string(), *v)).collect(),
        );
        for (u, v) in edges {
            let ui = g.object_ix(u)?;
            let vi = g.object_ix(v)?;
            let fwd = format!("{u}>{v}");
            let bwd = format!("{v}>{u}");
            if g.arr_ix.contains_key(&fwd) {
                return Err(GroupoidError::DuplicateId(fwd));
            }
            g.add_edge_pair(fwd, bwd, ui, vi);
        }
        Ok(Arc::new(g))
    }

    /// Windowed action groupoid `(Z + b) ⋊ Z`: objects `k + b` for
    /// `|k| <= n`, generating arrows the ±1 steps inside the window.
    pub fn action_window(b: num_complex::Complex64, n: i64) -> Result<Arc<Self>, GroupoidError> {
        if n < 1 {
            return Err(GroupoidError::WindowTooSmall(n));
        }
        let width = (2 * n + 1) as usize;
        let objects: Vec<(String, Option<num_complex::Complex64>)> = (0..width)
            .map(|i| {
                let k = i as i64 - n;
                (format!("w{i:02}"), Some(b + k as f64))
            })
            .collect();
        let mut g = Self::new_raw(&format!("window(b={b},n={n})"), objects);
        for i in 0..width - 1 {
            let fwd = format!("+@w{i:02}");
            let bwd = format!("-@w{:02}", i + 1);
            g.add_edge_pair(fwd, bwd, i as ObjIx, (i + 1) as ObjIx);
        }
        Ok(Arc::new(g))
    }

    /// Chain groupoid on integer labels `lo..=hi` with the label as the
    /// dynamical value; the A-type Dynkin diagram when `b = 0`.
    pub fn chain(name: &str, lo: i64, hi: i64, b: num_complex::Complex64) -> Arc<Self> {
        let objects: Vec<(String, Option<num_complex::Complex64>)> = (lo..=hi)
            .map(|k| (format!("n{k:02}"), Some(b + k as f64)))
            .collect();
        let mut g = Self::new_raw(name, objects);
        for (i, k) in (lo..hi).enumerate() {
            let fwd = format!("+@n{k:02}");
            let bwd = format!("-@n{:02}", k + 1);
            g.add_edge_pair(fwd, bwd, i as ObjIx, (i + 1) as ObjIx);
        }
        Arc::new(g)
    }

    /// D-type Dynkin diagram: chain `1..=L-2` with fork nodes `L-1`, `L`
    /// both attached to `L-2`.
    pub fn dynkin_d(l: i64) -> Arc<Self> {
        assert!(l >= 4, "D_L needs L >= 4");
        let mut objects: Vec<(String, Option<num_complex::Complex64>)> = Vec::new();
        for k in 1..=l {
            objects.push((format!("n{k:02}"), Some(num_complex::Complex64::new(k as f64, 0.0))));
        }
        let mut g = Self::new_raw(&format!("D{l}"), objects);
        for k in 1..=(l - 3) {
            let u = (k - 1) as ObjIx;
            let v = k as ObjIx;
            g.add_edge_pair(format!("n{k:02}>n{:02}", k + 1), format!("n{:02}>n{k:02}", k + 1), u, v);
        }
        for fork in [l - 1, l] {
            let u = (l - 3) as ObjIx;
            let v = (fork - 1) as ObjIx;
            g.add_edge_pair(
                format!("n{:02}>n{fork:02}", l - 2),
                format!("n{fork:02}>n{:02}", l - 2),
                u,
                v,
            );
        }
        Arc::new(g)
    }

    /// E6 Dynkin diagram: chain `1..=5` with node `6` attached to `3`.
    pub fn dynkin_e6() -> Arc<Self> {
        let objects: Vec<(String, Option<num_complex::Complex64>)> = (1..=6)
            .map(|k| (format!("n{k:02}"), Some(num_complex::Complex64::new(k as f64, 0.0))))
            .collect();
        let mut g = Self::new_raw("E6", objects);
        for (u, v) in [(1, 2), (2, 3), (3, 4), (4, 5), (3, 6)] {
            g.add_edge_pair(
                format!("n{u:02}>n{v:02}"),
                format!("n{v:02}>n{u:02}"),
                (u - 1) as ObjIx,
                (v - 1) as ObjIx,
            );
        }
        Arc::new(g)
    }

    /// One-object groupoid with two self-inverse commuting generators
    /// `+`, `-`; the arrow set is the Klein four-group.
    ///
    /// This is the grading of the zero-field eight-vertex model: the
    /// composites `+∘+ = -∘- = 1` make the corner blocks of the R-matrix
    /// grading-compatible.
    pub fn klein_one_object() -> Arc<Self> {
        let mut g = Self::new_raw("8v", vec![("v".to_string(), None)]);
        // arrows: 0 = identity, 1 = "+", 2 = "-", 3 = "w" (= +∘-)
        for (id, inv) in [("+", 1u32), ("-", 2u32), ("w", 3u32)] {
            let ix = g.arrows.len() as ArrIx;
            g.arr_ix.insert(id.to_string(), ix);
            g.arrows.push(Arrow { id: id.to_string(), src: 0, tgt: 0, inv });
        }
        let mut table = HashMap::new();
        // Klein four-group multiplication, arrows indexed 0,1,2,3.
        let mul = |a: u32, b: u32| -> u32 {
            if a == 0 {
                b
            } else if b == 0 {
                a
            } else if a == b {
                0
            } else {
                6 - a - b // {1,2}->3, {1,3}->2, {2,3}->1
            }
        };
        for a in 0..4u32 {
            for b in 0..4u32 {
                table.insert((a, b), mul(a, b));
            }
        }
        g.reduction = Reduction::Table(table);
        Arc::new(g)
    }

    /// Exhaustively verify involution, identity and associativity laws on
    /// the materialized arrows. Intended for small instances.
    pub fn verify_axioms(&self) -> Result<(), GroupoidError> {
        for (i, a) in self.arrows() {
            let inv = self.inverse(i);
            if self.inverse(inv) != i {
                return Err(GroupoidError::MalformedAssignment(format!(
                    "inverse of `{}` is not an involution",
                    a.id
                )));
            }
            if self.arrow(inv).src != a.tgt || self.arrow(inv).tgt != a.src {
                return Err(GroupoidError::MalformedAssignment(format!(
                    "inverse of `{}` has wrong endpoints",
                    a.id
                )));
            }
            let d = self.degree_of_path(a.src, &[i, inv]);
            if !d.steps.is_empty() {
                return Err(GroupoidError::MalformedAssignment(format!(
                    "`{}` composed with its inverse is not an identity",
                    a.id
                )));
            }
        }
        // Associativity on composable triples of generators.
        for (i, a) in self.arrows() {
            for (j, b) in self.arrows() {
                if a.tgt != b.src {
                    continue;
                }
                for (k, c) in self.arrows() {
                    if b.tgt != c.src {
                        continue;
                    }
                    let left = self.degree_of_path(a.src, &[i, j, k]);
                    let ij = self.degree_of_path(a.src, &[i, j]);
                    let mut steps = ij.steps.clone();
                    steps.push(k);
                    let right = self.degree_of_path(a.src, &steps);
                    if left != right {
                        return Err(GroupoidError::MalformedAssignment(format!(
                            "associativity fails on ({}, {}, {})",
                            a.id, b.id, c.id
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ArrowJson {
    id: String,
    src: String,
    tgt: String,
    inv: String,
}

#[derive(Serialize, Deserialize)]
struct GroupoidJson {
    objects: Vec<String>,
    arrows: Vec<ArrowJson>,
}

impl Groupoid {
    pub fn to_json(&self) -> serde_json::Value {
        let doc = GroupoidJson {
            objects: self.objects.clone(),
            arrows: self
                .arrows
                .iter()
                .map(|a| ArrowJson {
                    id: a.id.clone(),
                    src: self.objects[a.src as usize].clone(),
                    tgt: self.objects[a.tgt as usize].clone(),
                    inv: self.arrows[a.inv as usize].id.clone(),
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("groupoid serialization")
    }

    /// Load a groupoid from the JSON schema. Identity arrows are the
    /// listed arrows with `src == tgt` and `inv == id`; the composition
    /// is free reduction on the remaining generators.
    pub fn from_json(name: &str, value: &serde_json::Value) -> Result<Arc<Self>, GroupoidError> {
        let doc: GroupoidJson = serde_json::from_value(value.clone())
            .map_err(|e| GroupoidError::BadSerialization(e.to_string()))?;
        let mut g = Self::new_raw(
            name,
            doc.objects.iter().map(|o| (o.clone(), None)).collect(),
        );
        // First pass: place non-identity arrows.
        let mut pending: Vec<(String, String, ObjIx, ObjIx)> = Vec::new();
        let mut seen: HashMap<String, ()> = HashMap::new();
        for a in &doc.arrows {
            if a.id == a.inv && a.src == a.tgt {
                continue; // identity, already materialized
            }
            if seen.insert(a.id.clone(), ()).is_some() {
                return Err(GroupoidError::DuplicateId(a.id.clone()));
            }
            if a.id < a.inv || a.id == a.inv {
                let u = g.object_ix(&a.src)?;
                let v = g.object_ix(&a.tgt)?;
                pending.push((a.id.clone(), a.inv.clone(), u, v));
            }
        }
        for (fwd, bwd, u, v) in pending {
            if g.arr_ix.contains_key(&fwd) {
                return Err(GroupoidError::DuplicateId(fwd));
            }
            g.add_edge_pair(fwd, bwd, u, v);
        }
        Ok(Arc::new(g))
    }
}

// ---------------------------------------------------------------------------
// Connecting sets and systems
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ConnArrow {
    pub id: String,
    pub src: ObjIx,
    pub tgt: ObjIx,
}

/// A set of arrows from the objects of a left groupoid to the objects of
/// a right groupoid, with both endpoint maps surjective.
#[derive(Debug, Clone)]
pub struct ConnectingSet {
    pub name: String,
    pub left: Arc<Groupoid>,
    pub right: Arc<Groupoid>,
    arrows: Vec<ConnArrow>,
    arr_ix: HashMap<String, ArrIx>,
}

impl ConnectingSet {
    pub fn new(
        name: &str,
        left: Arc<Groupoid>,
        right: Arc<Groupoid>,
        arrows: Vec<(String, ObjIx, ObjIx)>,
    ) -> Result<Arc<Self>, GroupoidError> {
        let mut set = ConnectingSet {
            name: name.to_string(),
            left,
            right,
            arrows: Vec::new(),
            arr_ix: HashMap::new(),
        };
        for (id, src, tgt) in arrows {
            if set.arr_ix.contains_key(&id) {
                return Err(GroupoidError::DuplicateId(id));
            }
            set.arr_ix.insert(id.clone(), set.arrows.len() as ArrIx);
            set.arrows.push(ConnArrow { id, src, tgt });
        }
        for o in 0..set.left.object_count() as ObjIx {
            if !set.arrows.iter().any(|a| a.src == o) {
                return Err(GroupoidError::IncidenceViolation(format!(
                    "source map misses object `{}`",
                    set.left.object_name(o)
                )));
            }
        }
        for o in 0..set.right.object_count() as ObjIx {
            if !set.arrows.iter().any(|a| a.tgt == o) {
                return Err(GroupoidError::IncidenceViolation(format!(
                    "target map misses object `{}`",
                    set.right.object_name(o)
                )));
            }
        }
        Ok(Arc::new(set))
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn arrow(&self, ix: ArrIx) -> &ConnArrow {
        &self.arrows[ix as usize]
    }

    pub fn arrow_ix(&self, id: &str) -> Result<ArrIx, GroupoidError> {
        self.arr_ix
            .get(id)
            .copied()
            .ok_or_else(|| GroupoidError::UnknownArrow(id.to_string()))
    }

    pub fn arrows(&self) -> impl Iterator<Item = (ArrIx, &ConnArrow)> {
        self.arrows.iter().enumerate().map(|(i, a)| (i as ArrIx, a))
    }

    pub fn arrows_from(&self, src: ObjIx) -> Vec<ArrIx> {
        self.arrows()
            .filter(|(_, a)| a.src == src)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn arrows_to(&self, tgt: ObjIx) -> Vec<ArrIx> {
        self.arrows()
            .filter(|(_, a)| a.tgt == tgt)
            .map(|(i, _)| i)
            .collect()
    }

    fn adjacency(g: &Groupoid) -> Vec<Vec<u64>> {
        let n = g.object_count();
        let mut m = vec![vec![0u64; n]; n];
        for (i, a) in g.arrows() {
            if !g.is_identity(i) && i < g.inverse(i) {
                m[a.src as usize][a.tgt as usize] += 1;
                m[a.tgt as usize][a.src as usize] += 1;
            }
        }
        m
    }

    /// Build a connecting set from a nonnegative integer incidence matrix
    /// `C` (`C[i][j]` arrows from left object `i` to right object `j`),
    /// validating `M1 C = C M2`, the star condition
    /// `C[*1][j] = 1 <=> j = *2`, and that every row is nonzero.
    pub fn from_incidence(
        name: &str,
        c: &[Vec<u64>],
        left: Arc<Groupoid>,
        right: Arc<Groupoid>,
        star_left: ObjIx,
        star_right: ObjIx,
    ) -> Result<Arc<Self>, GroupoidError> {
        let (nl, nr) = (left.object_count(), right.object_count());
        if c.len() != nl || c.iter().any(|row| row.len() != nr) {
            return Err(GroupoidError::IncidenceShape {
                rows: c.len(),
                cols: c.first().map_or(0, |r| r.len()),
                left: nl,
                right: nr,
            });
        }
        let m1 = Self::adjacency(&left);
        let m2 = Self::adjacency(&right);
        for i in 0..nl {
            for j in 0..nr {
                let lhs: u64 = (0..nl).map(|k| m1[i][k] * c[k][j]).sum();
                let rhs: u64 = (0..nr).map(|k| c[i][k] * m2[k][j]).sum();
                if lhs != rhs {
                    return Err(GroupoidError::IncidenceViolation(format!(
                        "M1*C != C*M2 at ({}, {}): {lhs} vs {rhs}",
                        left.object_name(i as ObjIx),
                        right.object_name(j as ObjIx)
                    )));
                }
            }
        }
        for j in 0..nr {
            let v = c[star_left as usize][j];
            let want = if j == star_right as usize { 1 } else { 0 };
            if v != want {
                return Err(GroupoidError::IncidenceViolation(format!(
                    "star condition fails at column `{}`: C[*1][j] = {v}",
                    right.object_name(j as ObjIx)
                )));
            }
        }
        for i in 0..nl {
            if c[i].iter().all(|&v| v == 0) {
                return Err(GroupoidError::IncidenceViolation(format!(
                    "row `{}` of the incidence matrix is zero",
                    left.object_name(i as ObjIx)
                )));
            }
        }
        let mut arrows = Vec::new();
        for i in 0..nl {
            for j in 0..nr {
                for copy in 0..c[i][j] {
                    let id = if c[i][j] == 1 {
                        format!("{}~{}", left.object_name(i as ObjIx), right.object_name(j as ObjIx))
                    } else {
                        format!(
                            "{}~{}#{copy}",
                            left.object_name(i as ObjIx),
                            right.object_name(j as ObjIx)
                        )
                    };
                    arrows.push((id, i as ObjIx, j as ObjIx));
                }
            }
        }
        Self::new(name, left, right, arrows)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "src_groupoid": self.left.name,
            "tgt_groupoid": self.right.name,
            "arrows": self.arrows.iter().map(|a| serde_json::json!({
                "id": a.id,
                "src": self.left.object_name(a.src),
                "tgt": self.right.object_name(a.tgt),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Classification of a connecting system per the uniqueness conditions on
/// the source fibers of the connecting set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Flavor {
    Unique,
    QuasiUnique,
    General,
}

/// A compatible choice of connecting arrow per object of the right
/// groupoid (path-source assignment).
#[derive(Debug, Clone)]
pub struct ConnectingSystem {
    pub conn: Arc<ConnectingSet>,
    /// Chosen arrow for each object of the right groupoid.
    pub assignment: Vec<ArrIx>,
}

impl ConnectingSystem {
    pub fn new(conn: Arc<ConnectingSet>, assignment: Vec<ArrIx>) -> Result<Self, GroupoidError> {
        if assignment.len() != conn.right.object_count() {
            return Err(GroupoidError::MalformedAssignment(format!(
                "expected {} assignments, got {}",
                conn.right.object_count(),
                assignment.len()
            )));
        }
        for (o, &b) in assignment.iter().enumerate() {
            if conn.arrow(b).tgt != o as ObjIx {
                return Err(GroupoidError::MalformedAssignment(format!(
                    "assigned arrow `{}` does not target object `{}`",
                    conn.arrow(b).id,
                    conn.right.object_name(o as ObjIx)
                )));
            }
        }
        Ok(ConnectingSystem { conn, assignment })
    }

    pub fn chosen(&self, obj: ObjIx) -> ArrIx {
        self.assignment[obj as usize]
    }

    /// Classify as unique / quasi-unique / general.
    ///
    /// Unique: every assigned arrow is alone in its source fiber.
    /// Quasi-unique: at least one assigned arrow is alone in its source
    /// fiber (the anchored witness required by the path condition).
    pub fn classify(&self) -> Flavor {
        let anchored = |b: ArrIx| self.conn.arrows_from(self.conn.arrow(b).src).len() == 1;
        if self.assignment.iter().all(|&b| anchored(b)) {
            Flavor::Unique
        } else if self.assignment.iter().any(|&b| anchored(b)) {
            Flavor::QuasiUnique
        } else {
            Flavor::General
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn a3() -> Arc<Groupoid> {
        Groupoid::chain("A3", 1, 3, Complex64::new(0.0, 0.0))
    }

    #[test]
    fn chain_counts() {
        let g = a3();
        assert_eq!(g.object_count(), 3);
        // 3 identities + 4 generating arrows
        assert_eq!(g.arrow_count(), 7);
        g.verify_axioms().unwrap();
    }

    #[test]
    fn dynkin_counts() {
        let d4 = Groupoid::dynkin_d(4);
        assert_eq!(d4.object_count(), 4);
        assert_eq!(d4.arrow_count(), 4 + 6);
        d4.verify_axioms().unwrap();
        let e6 = Groupoid::dynkin_e6();
        assert_eq!(e6.object_count(), 6);
        assert_eq!(e6.arrow_count(), 6 + 10);
        e6.verify_axioms().unwrap();
    }

    #[test]
    fn window_counts() {
        let g = Groupoid::action_window(Complex64::new(0.39, 0.0), 10).unwrap();
        assert_eq!(g.object_count(), 21);
        let g1 = Groupoid::action_window(Complex64::new(0.0, 0.0), 1).unwrap();
        assert_eq!(g1.object_count(), 3);
        assert_eq!(g1.arrow_count(), 3 + 4);
        assert!(Groupoid::action_window(Complex64::new(0.0, 0.0), 0).is_err());
    }

    #[test]
    fn klein_axioms_and_relations() {
        let g = Groupoid::klein_one_object();
        g.verify_axioms().unwrap();
        let plus = g.arrow_ix("+").unwrap();
        let minus = g.arrow_ix("-").unwrap();
        assert_eq!(g.inverse(plus), plus);
        let d = g.degree_of_path(0, &[plus, plus]);
        assert!(d.steps.is_empty());
        let pm = g.degree_of_path(0, &[plus, minus]);
        let mp = g.degree_of_path(0, &[minus, plus]);
        assert_eq!(pm, mp);
        assert_eq!(pm.steps, vec![g.arrow_ix("w").unwrap()]);
    }

    #[test]
    fn free_reduction_is_geodesic_on_chain() {
        let g = a3();
        let up1 = g.arrow_ix("+@n01").unwrap();
        let dn2 = g.arrow_ix("-@n02").unwrap();
        let d = g.degree_of_path(0, &[up1, dn2]);
        assert!(d.steps.is_empty());
        assert_eq!(d.src, d.tgt);
        let up2 = g.arrow_ix("+@n02").unwrap();
        let d2 = g.degree_of_path(0, &[up1, up2]);
        assert_eq!(d2.steps.len(), 2);
        assert_eq!(d2.tgt, g.object_ix("n03").unwrap());
    }

    #[test]
    fn compose_and_fibers() {
        let g = a3();
        let up1 = g.arrow_ix("+@n01").unwrap();
        let dn2 = g.arrow_ix("-@n02").unwrap();
        // alpha ∘ alpha^{-1} = id
        let d = g.compose(up1, g.inverse(up1)).unwrap();
        assert!(d.steps.is_empty());
        assert!(g.compose(up1, up1).is_err());
        // middle source fiber: two step arrows + identity
        let mid = g.object_ix("n02").unwrap();
        let fiber = g.source_fiber(mid);
        assert_eq!(fiber.len(), 3);
        let _ = dn2;
    }

    #[test]
    fn action_groupoid_composition_is_translation() {
        let g = Groupoid::action_window(Complex64::new(0.0, 0.0), 3).unwrap();
        let a = g.object_ix("w03").unwrap();
        let up = g.arrow_ix("+@w03").unwrap();
        let up2 = g.arrow_ix("+@w04").unwrap();
        let d = g.degree_of_path(a, &[up, up2]);
        assert_eq!(d.tgt, g.object_ix("w05").unwrap());
    }

    #[test]
    fn json_round_trip() {
        let g = a3();
        let v = g.to_json();
        let g2 = Groupoid::from_json("A3", &v).unwrap();
        assert_eq!(g2.object_count(), g.object_count());
        assert_eq!(g2.arrow_count(), g.arrow_count());
        assert_eq!(g2.to_json(), v);
    }

    #[test]
    fn incidence_identity_on_a3() {
        let g = a3();
        let c = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        let conn = ConnectingSet::from_incidence("id", &c, g.clone(), g.clone(), 0, 0).unwrap();
        assert_eq!(conn.arrow_count(), 3);
    }

    #[test]
    fn incidence_star_violation() {
        let g = a3();
        let c = vec![vec![1, 1, 0], vec![0, 1, 0], vec![0, 0, 1]];
        let err = ConnectingSet::from_incidence("bad", &c, g.clone(), g.clone(), 0, 0);
        assert!(matches!(err, Err(GroupoidError::IncidenceViolation(_))));
    }

    #[test]
    fn ad_folding_incidence() {
        // A_{2L-3} -> D_L folding for L = 4: 5 source objects onto 4.
        let l = 4i64;
        let a = Groupoid::chain("A5", 1, 2 * l - 3, Complex64::new(0.0, 0.0));
        let d = Groupoid::dynkin_d(l);
        let mut c = vec![vec![0u64; l as usize]; (2 * l - 3) as usize];
        for node in 1..=(2 * l - 3) {
            if node <= l - 2 {
                c[(node - 1) as usize][(node - 1) as usize] = 1;
            } else if node >= l {
                c[(node - 1) as usize][(2 * l - 2 - node - 1) as usize] = 1;
            } else {
                c[(node - 1) as usize][(l - 1 - 1) as usize] = 1;
                c[(node - 1) as usize][(l - 1) as usize] = 1;
            }
        }
        let conn = ConnectingSet::from_incidence("A5~D4", &c, a, d, 0, 0).unwrap();
        assert_eq!(conn.arrow_count(), (2 * l - 3 + 1) as usize);
    }

    #[test]
    fn classification() {
        let g = a3();
        // one arrow per object: unique
        let c = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        let conn = ConnectingSet::from_incidence("id", &c, g.clone(), g.clone(), 0, 0).unwrap();
        let assign = (0..3)
            .map(|o| conn.arrows_to(o as ObjIx)[0])
            .collect::<Vec<_>>();
        let sys = ConnectingSystem::new(conn, assign).unwrap();
        assert_eq!(sys.classify(), Flavor::Unique);

        // two parallel arrows from every object, no anchored one: general
        let arrows = (0..3)
            .flat_map(|o| {
                (0..2).map(move |k| (format!("p{o}x{k}"), o as ObjIx, o as ObjIx))
            })
            .collect::<Vec<_>>();
        let conn2 = ConnectingSet::new("par", g.clone(), g.clone(), arrows).unwrap();
        let assign2 = (0..3)
            .map(|o| conn2.arrows_to(o as ObjIx)[0])
            .collect::<Vec<_>>();
        let sys2 = ConnectingSystem::new(conn2, assign2).unwrap();
        assert_eq!(sys2.classify(), Flavor::General);
    }
}
