//! Graded spaces and tensor slots.

use crate::groupoid::{ArrIx, ConnectingSet, Degree, Groupoid, ObjIx};
use std::collections::HashMap;
use std::sync::Arc;

/// Object reference that is comparable across different groupoids.
///
/// `gid` is the address of the owning groupoid (or object side of a
/// connecting set), so objects of distinct groupoids never compare equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ObjRef {
    pub gid: usize,
    pub ix: ObjIx,
}

fn gid_of(g: &Arc<Groupoid>) -> usize {
    Arc::as_ptr(g) as usize
}

/// A groupoid-graded vector space: one finite-dimensional component per
/// materialized arrow.
#[derive(Debug, Clone)]
pub struct GradedSpace {
    pub name: String,
    pub groupoid: Arc<Groupoid>,
    dims: Vec<usize>,
}

impl GradedSpace {
    pub fn new(name: &str, groupoid: Arc<Groupoid>, dims: HashMap<ArrIx, usize>) -> Arc<Self> {
        let mut v = vec![0usize; groupoid.arrow_count()];
        for (a, d) in dims {
            v[a as usize] = d;
        }
        Arc::new(GradedSpace { name: name.to_string(), groupoid, dims: v })
    }

    /// One-dimensional component on every non-identity generating arrow.
    pub fn one_dim_on_generators(name: &str, groupoid: Arc<Groupoid>) -> Arc<Self> {
        let mut dims = HashMap::new();
        for (i, _) in groupoid.arrows() {
            if !groupoid.is_identity(i) {
                dims.insert(i, 1usize);
            }
        }
        Self::new(name, groupoid, dims)
    }

    pub fn dim(&self, arrow: ArrIx) -> usize {
        self.dims[arrow as usize]
    }

    /// Arrows with nonzero component dimension.
    pub fn support(&self) -> impl Iterator<Item = ArrIx> + '_ {
        (0..self.dims.len() as ArrIx).filter(|&a| self.dims[a as usize] > 0)
    }
}

/// A one-dimensional-per-arrow space over a connecting set.
#[derive(Debug, Clone)]
pub struct ConnSpace {
    pub conn: Arc<ConnectingSet>,
    pub(crate) dims: Vec<usize>,
    /// When set, arrows are traversed target-to-source (the transposed
    /// connecting set).
    pub reversed: bool,
}

impl ConnSpace {
    pub fn all_ones(conn: Arc<ConnectingSet>) -> Arc<Self> {
        let dims = vec![1usize; conn.arrow_count()];
        Arc::new(ConnSpace { conn, dims, reversed: false })
    }

    pub fn reversed(conn: Arc<ConnectingSet>) -> Arc<Self> {
        let dims = vec![1usize; conn.arrow_count()];
        Arc::new(ConnSpace { conn, dims, reversed: true })
    }

    pub fn dim(&self, arrow: ArrIx) -> usize {
        self.dims[arrow as usize]
    }
}

/// Endpoint and dimension data of one arrow inside a slot.
#[derive(Debug, Clone)]
pub struct SlotArrow {
    pub ix: ArrIx,
    pub id: String,
    pub src: ObjRef,
    pub tgt: ObjRef,
    pub dim: usize,
}

/// One tensor factor of a block operator: either a groupoid-graded space
/// or a connecting-set space.
#[derive(Debug, Clone)]
pub enum Slot {
    Graded(Arc<GradedSpace>),
    Conn(Arc<ConnSpace>),
}

impl Slot {
    pub fn same_slot(&self, other: &Slot) -> bool {
        match (self, other) {
            (Slot::Graded(a), Slot::Graded(b)) => Arc::ptr_eq(a, b),
            (Slot::Conn(a), Slot::Conn(b)) => Arc::ptr_eq(a, b) && a.reversed == b.reversed,
            _ => false,
        }
    }

    pub fn arrow(&self, ix: ArrIx) -> SlotArrow {
        match self {
            Slot::Graded(s) => {
                let a = s.groupoid.arrow(ix);
                let gid = gid_of(&s.groupoid);
                SlotArrow {
                    ix,
                    id: a.id.clone(),
                    src: ObjRef { gid, ix: a.src },
                    tgt: ObjRef { gid, ix: a.tgt },
                    dim: s.dim(ix),
                }
            }
            Slot::Conn(s) => {
                let a = s.conn.arrow(ix);
                let lgid = gid_of(&s.conn.left);
                let rgid = gid_of(&s.conn.right);
                let (src, tgt) = if s.reversed {
                    (ObjRef { gid: rgid, ix: a.tgt }, ObjRef { gid: lgid, ix: a.src })
                } else {
                    (ObjRef { gid: lgid, ix: a.src }, ObjRef { gid: rgid, ix: a.tgt })
                };
                SlotArrow { ix, id: a.id.clone(), src, tgt, dim: s.dim(ix) }
            }
        }
    }

    pub fn dim(&self, ix: ArrIx) -> usize {
        match self {
            Slot::Graded(s) => s.dim(ix),
            Slot::Conn(s) => s.dim(ix),
        }
    }

    /// Arrows with nonzero dimension.
    pub fn support(&self) -> Vec<ArrIx> {
        match self {
            Slot::Graded(s) => s.support().collect(),
            Slot::Conn(s) => (0..s.conn.arrow_count() as ArrIx)
                .filter(|&a| s.dim(a) > 0)
                .collect(),
        }
    }

    pub fn inverse(&self, ix: ArrIx) -> Option<ArrIx> {
        match self {
            Slot::Graded(s) => Some(s.groupoid.inverse(ix)),
            Slot::Conn(_) => None,
        }
    }

    /// The underlying groupoid when the slot is graded.
    pub fn groupoid(&self) -> Option<&Arc<Groupoid>> {
        match self {
            Slot::Graded(s) => Some(&s.groupoid),
            Slot::Conn(_) => None,
        }
    }
}

/// The summand decomposition of a tensor square `(V ⊗ W)_γ`.
///
/// Maps each composite degree to the list of factor pairs realizing it.
#[derive(Debug, Clone)]
pub struct TensorSummands {
    pub degrees: HashMap<Degree, Vec<(ArrIx, ArrIx)>>,
}

/// Decompose `V ⊗ W` over a common groupoid into components indexed by
/// composite degree, with an explicit summand list per degree.
pub fn graded_tensor(
    v: &Arc<GradedSpace>,
    w: &Arc<GradedSpace>,
) -> Result<TensorSummands, super::GradedError> {
    if !Arc::ptr_eq(&v.groupoid, &w.groupoid) {
        return Err(super::GradedError::GroupoidMismatch(format!(
            "`{}` and `{}` live over different groupoids",
            v.name, w.name
        )));
    }
    let g = &v.groupoid;
    let mut degrees: HashMap<Degree, Vec<(ArrIx, ArrIx)>> = HashMap::new();
    for a in v.support() {
        for b in w.support() {
            if g.arrow(a).tgt != g.arrow(b).src {
                continue;
            }
            let d = g.degree_of_path(g.arrow(a).src, &[a, b]);
            degrees.entry(d).or_default().push((a, b));
        }
    }
    Ok(TensorSummands { degrees })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn tensor_square_one_point() {
        // one-object groupoid with a self-inverse loop of dim 2:
        // single component of dim 4 at the identity degree, one summand.
        let g = Groupoid::klein_one_object();
        let plus = g.arrow_ix("+").unwrap();
        let mut dims = HashMap::new();
        dims.insert(plus, 2usize);
        let v = GradedSpace::new("V", g.clone(), dims);
        let t = graded_tensor(&v, &v).unwrap();
        assert_eq!(t.degrees.len(), 1);
        let (d, summands) = t.degrees.iter().next().unwrap();
        assert!(d.steps.is_empty());
        assert_eq!(summands.len(), 1);
        let dim: usize = summands.iter().map(|&(a, b)| v.dim(a) * v.dim(b)).sum();
        assert_eq!(dim, 4);
    }

    #[test]
    fn tensor_square_a3_path_counting() {
        let g = Groupoid::chain("A3", 1, 3, Complex64::new(0.0, 0.0));
        let v = GradedSpace::one_dim_on_generators("V", g.clone());
        let t = graded_tensor(&v, &v).unwrap();
        // identity degree at the middle object: two summands (+- and -+)
        let mid = g.object_ix("n02").unwrap();
        let id_mid = Degree { src: mid, tgt: mid, steps: vec![] };
        assert_eq!(t.degrees[&id_mid].len(), 2);
        // the length-2 arrow through the middle: one summand
        let long = g.degree_of_path(
            g.object_ix("n01").unwrap(),
            &[g.arrow_ix("+@n01").unwrap(), g.arrow_ix("+@n02").unwrap()],
        );
        assert_eq!(t.degrees[&long].len(), 1);
    }
}
