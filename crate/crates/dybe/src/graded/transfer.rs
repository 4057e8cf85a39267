//! Transfer operators of shape square and triangle.
//!
//! A square-shaped transfer operator is graded by a pair of connecting
//! arrows. Forward operators carry blocks from the left (source-side)
//! spaces to the right (target-side) spaces; backward operators go the
//! other way. The fusion product `∗⊗` stacks squares along the connecting
//! line; the composition product `∗∘` chains a forward and a backward
//! operator into a triangle-shaped endomorphism family.

use super::block::{enumerate_paths, BlockKey, BlockOperator};
use super::space::{ObjRef, Slot};
use super::GradedError;
use crate::groupoid::{ArrIx, ConnectingSet, ConnectingSystem};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::Arc;
use crate::util::ComplexAmax;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferKind {
    /// `Γ(π×π, Hom(V^{π₁ ⊗ n}, V^{π₂ ⊗ n}))`: blocks map source-side
    /// paths `s(β₂)→s(β₁)` to target-side paths `t(β₂)→t(β₁)`.
    Forward,
    /// `Γ(π×π, Hom(V^{π₂ ⊗ n}, V^{π₁ ⊗ n}))`: blocks map target-side
    /// paths `t(β₁)→t(β₂)` to source-side paths `s(β₁)→s(β₂)`.
    Backward,
}

/// Which side a triangle-shaped operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleSide {
    /// `End_▷` of the source-side spaces; entries need `t(β₁) = t(β₂)`,
    /// block paths share their source object.
    Left,
    /// `End_▷` of the target-side spaces; entries need `s(β₁) = s(β₂)`,
    /// block paths share their target object.
    Right,
}

pub type TransferEntryKey = (ArrIx, ArrIx);
type PathPair = (Vec<ArrIx>, Vec<ArrIx>);

/// Square-shaped transfer operator.
#[derive(Debug, Clone)]
pub struct TransferOperator {
    pub kind: TransferKind,
    pub conn: Arc<ConnectingSet>,
    /// Tensor slots on the left (source) side.
    pub left: Vec<Slot>,
    /// Tensor slots on the right (target) side.
    pub right: Vec<Slot>,
    /// (β₁, β₂) -> (in-path, out-path) -> block.
    pub entries: HashMap<TransferEntryKey, HashMap<PathPair, DMatrix<Complex64>>>,
}

/// Triangle-shaped operator (`Ψ(π×π, End_▷)`).
#[derive(Debug, Clone)]
pub struct TriangleOperator {
    pub side: TriangleSide,
    pub conn: Arc<ConnectingSet>,
    pub slots: Vec<Slot>,
    pub entries: HashMap<TransferEntryKey, HashMap<PathPair, DMatrix<Complex64>>>,
}

fn left_obj(conn: &ConnectingSet, b: ArrIx) -> ObjRef {
    ObjRef { gid: Arc::as_ptr(&conn.left) as usize, ix: conn.arrow(b).src }
}

fn right_obj(conn: &ConnectingSet, b: ArrIx) -> ObjRef {
    ObjRef { gid: Arc::as_ptr(&conn.right) as usize, ix: conn.arrow(b).tgt }
}

impl TransferOperator {
    pub fn zero(
        kind: TransferKind,
        conn: Arc<ConnectingSet>,
        left: Vec<Slot>,
        right: Vec<Slot>,
    ) -> Self {
        TransferOperator { kind, conn, left, right, entries: HashMap::new() }
    }

    /// Endpoints required of the (in, out) paths at entry (β₁, β₂).
    fn path_frames(&self, b1: ArrIx, b2: ArrIx) -> ((ObjRef, ObjRef), (ObjRef, ObjRef)) {
        let c = &self.conn;
        match self.kind {
            TransferKind::Forward => (
                (left_obj(c, b2), left_obj(c, b1)),
                (right_obj(c, b2), right_obj(c, b1)),
            ),
            TransferKind::Backward => (
                (right_obj(c, b1), right_obj(c, b2)),
                (left_obj(c, b1), left_obj(c, b2)),
            ),
        }
    }

    fn in_slots(&self) -> &[Slot] {
        match self.kind {
            TransferKind::Forward => &self.left,
            TransferKind::Backward => &self.right,
        }
    }

    fn out_slots(&self) -> &[Slot] {
        match self.kind {
            TransferKind::Forward => &self.right,
            TransferKind::Backward => &self.left,
        }
    }

    pub fn insert(
        &mut self,
        b1: ArrIx,
        b2: ArrIx,
        in_path: Vec<ArrIx>,
        out_path: Vec<ArrIx>,
        mat: DMatrix<Complex64>,
    ) -> Result<(), GradedError> {
        let ((is, it), (os, ot)) = self.path_frames(b1, b2);
        let in_ep = super::block::path_endpoints(self.in_slots(), &in_path);
        let out_ep = super::block::path_endpoints(self.out_slots(), &out_path);
        let ok = in_ep == Some((is, it)) && out_ep == Some((os, ot));
        if !ok {
            return Err(GradedError::GradingViolation(format!(
                "transfer entry ({}, {})",
                self.conn.arrow(b1).id,
                self.conn.arrow(b2).id
            )));
        }
        *self
            .entries
            .entry((b1, b2))
            .or_default()
            .entry((in_path, out_path))
            .or_insert_with(|| DMatrix::zeros(mat.nrows(), mat.ncols())) += mat;
        Ok(())
    }

    /// Fusion product `∗⊗`.
    ///
    /// Forward: `(f ∗⊗ g)(β₁,β₂) = Σ_β f(β,β₂) ⊗ g(β₁,β)`.
    /// Backward: `(f ∗⊗ g)(β₁,β₂) = Σ_β f(β₁,β) ⊗ g(β,β₂)`.
    pub fn fuse(&self, other: &TransferOperator) -> Result<TransferOperator, GradedError> {
        if self.kind != other.kind {
            return Err(GradedError::KindMismatch("fuse needs equal kinds".into()));
        }
        if !Arc::ptr_eq(&self.conn, &other.conn) {
            return Err(GradedError::GroupoidMismatch("fuse over different connecting sets".into()));
        }
        let left: Vec<Slot> = self.left.iter().chain(&other.left).cloned().collect();
        let right: Vec<Slot> = self.right.iter().chain(&other.right).cloned().collect();
        let mut out = TransferOperator::zero(self.kind, self.conn.clone(), left, right);
        for (&(fb1, fb2), fblocks) in &self.entries {
            for (&(gb1, gb2), gblocks) in &other.entries {
                let (b1, b2, bmid_ok) = match self.kind {
                    // f(β, β₂) ⊗ g(β₁, β)
                    TransferKind::Forward => (gb1, fb2, fb1 == gb2),
                    // f(β₁, β) ⊗ g(β, β₂)
                    TransferKind::Backward => (fb1, gb2, fb2 == gb1),
                };
                if !bmid_ok {
                    continue;
                }
                for ((fi, fo), fm) in fblocks {
                    for ((gi, go), gm) in gblocks {
                        let (in_path, out_path, mat) = match self.kind {
                            TransferKind::Forward => {
                                // α-path: f part (from s(β₂)) then g part
                                let mut i = fi.clone();
                                i.extend_from_slice(gi);
                                let mut o = fo.clone();
                                o.extend_from_slice(go);
                                (i, o, fm.kronecker(gm))
                            }
                            TransferKind::Backward => {
                                let mut i = fi.clone();
                                i.extend_from_slice(gi);
                                let mut o = fo.clone();
                                o.extend_from_slice(go);
                                (i, o, fm.kronecker(gm))
                            }
                        };
                        out.insert(b1, b2, in_path, out_path, mat)?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Postcompose every block with an endomorphism of the output side.
    pub fn apply_endo(&self, q: &BlockOperator) -> Result<TransferOperator, GradedError> {
        let mut out = TransferOperator::zero(
            self.kind,
            self.conn.clone(),
            self.left.clone(),
            self.right.clone(),
        );
        let mut by_input: HashMap<&[ArrIx], Vec<(&BlockKey, &DMatrix<Complex64>)>> = HashMap::new();
        for (k, m) in &q.blocks {
            by_input.entry(k.input.as_slice()).or_default().push((k, m));
        }
        for (&(b1, b2), blocks) in &self.entries {
            for ((i, o), m) in blocks {
                if let Some(matches) = by_input.get(o.as_slice()) {
                    for (qk, qm) in matches {
                        out.insert(b1, b2, i.clone(), qk.output.clone(), *qm * m)?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Composition product `∗∘` of a backward operator after a forward
    /// operator: `(g ∗∘ f)(β₁,β₂) = Σ_β g(β,β₂) f(β₁,β)`, a left
    /// triangle over the source-side spaces.
    pub fn star_left(g: &TransferOperator, f: &TransferOperator) -> Result<TriangleOperator, GradedError> {
        if g.kind != TransferKind::Backward || f.kind != TransferKind::Forward {
            return Err(GradedError::KindMismatch("star_left wants backward ∗∘ forward".into()));
        }
        let mut out = TriangleOperator {
            side: TriangleSide::Left,
            conn: f.conn.clone(),
            slots: f.left.clone(),
            entries: HashMap::new(),
        };
        for (&(fb1, fb), fblocks) in &f.entries {
            for (&(gb, gb2), gblocks) in &g.entries {
                if gb != fb {
                    continue;
                }
                if right_obj(&f.conn, fb1) != right_obj(&f.conn, gb2) {
                    continue;
                }
                for ((fi, fo), fm) in fblocks {
                    for ((gi, go), gm) in gblocks {
                        if gi != fo {
                            continue;
                        }
                        let key = (fi.clone(), go.clone());
                        *out.entries
                            .entry((fb1, gb2))
                            .or_default()
                            .entry(key)
                            .or_insert_with(|| DMatrix::zeros(gm.nrows(), fm.ncols())) +=
                            gm * fm;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Composition product `∗∘` of a forward operator after a backward
    /// operator: `(f ∗∘ g)(β₁,β₂) = Σ_β f(β,β₂) g(β₁,β)`, a right
    /// triangle over the target-side spaces.
    pub fn star_right(f: &TransferOperator, g: &TransferOperator) -> Result<TriangleOperator, GradedError> {
        if g.kind != TransferKind::Backward || f.kind != TransferKind::Forward {
            return Err(GradedError::KindMismatch("star_right wants forward ∗∘ backward".into()));
        }
        let mut out = TriangleOperator {
            side: TriangleSide::Right,
            conn: f.conn.clone(),
            slots: f.right.clone(),
            entries: HashMap::new(),
        };
        for (&(gb1, gb), gblocks) in &g.entries {
            for (&(fb, fb2), fblocks) in &f.entries {
                if fb != gb {
                    continue;
                }
                if left_obj(&f.conn, gb1) != left_obj(&f.conn, fb2) {
                    continue;
                }
                for ((gi, go), gm) in gblocks {
                    for ((fi, fo), fm) in fblocks {
                        if fi != go {
                            continue;
                        }
                        let key = (gi.clone(), fo.clone());
                        *out.entries
                            .entry((gb1, fb2))
                            .or_default()
                            .entry(key)
                            .or_insert_with(|| DMatrix::zeros(fm.nrows(), gm.ncols())) +=
                            fm * gm;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Solve for a two-sided inverse `g` with `g ∗∘ f` and `f ∗∘ g` both
    /// the graded identity. Returns the inverse and the solve residual.
    ///
    /// Restricted to one-dimensional components (which is all the twist
    /// machinery needs); the solve is a global least-squares system with
    /// singular values below `1e-10` of the largest treated as zero.
    pub fn inverse(&self) -> Result<(TransferOperator, f64), GradedError> {
        for s in self.left.iter().chain(&self.right) {
            for a in s.support() {
                if s.dim(a) != 1 {
                    return Err(GradedError::NotOneDimensional(s.dim(a)));
                }
            }
        }
        if self.kind != TransferKind::Forward {
            // a backward operator inverts into a forward one over the
            // reversed connecting set and back
            let rc = Arc::new(ConnectingSet::reversed_clone(&self.conn));
            let fwd = self.flip_roles(rc);
            let (inv_b, res) = fwd.inverse()?;
            return Ok((inv_b.flip_roles(self.conn.clone()), res));
        }
        let inv_kind = TransferKind::Backward;
        let mut unknown_keys: Vec<(TransferEntryKey, PathPair)> = Vec::new();
        let template =
            TransferOperator::zero(inv_kind, self.conn.clone(), self.left.clone(), self.right.clone());
        for b1 in 0..self.conn.arrow_count() as ArrIx {
            for b2 in 0..self.conn.arrow_count() as ArrIx {
                let ((is, it), (os, ot)) = template.path_frames(b1, b2);
                let ins = anchored_paths(template.in_slots(), is, it);
                let outs = anchored_paths(template.out_slots(), os, ot);
                for i in &ins {
                    for o in &outs {
                        unknown_keys.push(((b1, b2), (i.clone(), o.clone())));
                    }
                }
            }
        }
        // dims are assumed uniform per path pair; build index maps
        let mut col_of: HashMap<(TransferEntryKey, PathPair, usize, usize), usize> = HashMap::new();
        let mut cols = 0usize;
        for (ek, pp) in &unknown_keys {
            let rdim: usize = pp.1.iter().zip(&self.left).map(|(&a, s)| s.dim(a)).product();
            let cdim: usize = pp.0.iter().zip(&self.right).map(|(&a, s)| s.dim(a)).product();
            for r in 0..rdim {
                for c in 0..cdim {
                    col_of.insert((*ek, pp.clone(), r, c), cols);
                    cols += 1;
                }
            }
        }
        if cols == 0 {
            return Err(GradedError::NotInvertible { residual: f64::INFINITY, grade: "empty".into() });
        }
        // Equations: star_left(g, f) = id_left and star_right(f, g) = id_right.
        let mut rows: Vec<(Vec<(usize, Complex64)>, Complex64)> = Vec::new();
        self.append_left_equations(&mut rows, &col_of);
        self.append_right_equations(&mut rows, &col_of);
        let nrows = rows.len();
        let mut a = DMatrix::<Complex64>::zeros(nrows, cols);
        let mut b = DMatrix::<Complex64>::zeros(nrows, 1);
        for (ri, (coeffs, rhs)) in rows.iter().enumerate() {
            for (ci, v) in coeffs {
                a[(ri, *ci)] += *v;
            }
            b[(ri, 0)] = *rhs;
        }
        let svd = a.clone().svd(true, true);
        let tol = 1e-10 * svd.singular_values.max();
        let x = svd
            .solve(&b, tol)
            .map_err(|e| GradedError::NotInvertible { residual: f64::INFINITY, grade: e.to_string() })?;
        let resid = (&a * &x - &b).camax();
        if resid > 1e-9 {
            let worst = (0..nrows)
                .max_by(|&i, &j| {
                    let ri = ((&a * &x) - &b)[(i, 0)].norm();
                    let rj = ((&a * &x) - &b)[(j, 0)].norm();
                    ri.partial_cmp(&rj).unwrap()
                })
                .unwrap_or(0);
            return Err(GradedError::NotInvertible {
                residual: resid,
                grade: format!("equation {worst}"),
            });
        }
        let mut g = template;
        for (ek, pp) in &unknown_keys {
            let rdim: usize = pp.1.iter().zip(&self.left).map(|(&a, s)| s.dim(a)).product();
            let cdim: usize = pp.0.iter().zip(&self.right).map(|(&a, s)| s.dim(a)).product();
            let mut m = DMatrix::<Complex64>::zeros(rdim, cdim);
            let mut nonzero = false;
            for r in 0..rdim {
                for c in 0..cdim {
                    let v = x[(col_of[&(*ek, pp.clone(), r, c)], 0)];
                    if v.norm() > 0.0 {
                        nonzero = true;
                    }
                    m[(r, c)] = v;
                }
            }
            if nonzero {
                g.entries.entry(*ek).or_default().insert(pp.clone(), m);
            }
        }
        Ok((g, resid))
    }

    /// Present the operator over the reversed connecting set with the
    /// opposite kind: `flipped(β₂,β₁) = self(β₁,β₂)` with the side lists
    /// exchanged. Arrow indices agree between a set and its reversal.
    fn flip_roles(&self, reversed: Arc<ConnectingSet>) -> TransferOperator {
        let kind = match self.kind {
            TransferKind::Forward => TransferKind::Backward,
            TransferKind::Backward => TransferKind::Forward,
        };
        let mut out = TransferOperator::zero(kind, reversed, self.right.clone(), self.left.clone());
        for (&(b1, b2), blocks) in &self.entries {
            out.entries.insert((b2, b1), blocks.clone());
        }
        out
    }

    fn append_left_equations(
        &self,
        rows: &mut Vec<(Vec<(usize, Complex64)>, Complex64)>,
        col_of: &HashMap<(TransferEntryKey, PathPair, usize, usize), usize>,
    ) {
        // sum_beta g(beta, b2) f(b1, beta) = delta_{b1,b2} Id on paths f transfers
        let n = self.conn.arrow_count() as ArrIx;
        for b1 in 0..n {
            for b2 in 0..n {
                if right_obj(&self.conn, b1) != right_obj(&self.conn, b2) {
                    continue;
                }
                let is = left_obj(&self.conn, b1);
                // candidate result keys: alpha_in from common source to s(b1), alpha_out to s(b2)
                let sources: Vec<ObjRef> = all_left_objects(&self.conn);
                for y in sources {
                    let ins = anchored_paths(&self.left, y, is);
                    let outs = anchored_paths(&self.left, y, left_obj(&self.conn, b2));
                    for i_path in &ins {
                        for o_path in &outs {
                            let mut coeffs: Vec<(usize, Complex64)> = Vec::new();
                            for (&(fb1, fb), fblocks) in &self.entries {
                                if fb1 != b1 {
                                    continue;
                                }
                                for ((fi, fo), fm) in fblocks {
                                    if fi != i_path {
                                        continue;
                                    }
                                    debug_assert_eq!(fm.nrows(), 1);
                                    let key = ((fb, b2), (fo.clone(), o_path.clone()), 0usize, 0usize);
                                    if let Some(&ci) = col_of.get(&key) {
                                        coeffs.push((ci, fm[(0, 0)]));
                                    }
                                }
                            }
                            let rhs = if b1 == b2
                                && i_path == o_path
                                && self.transfers_in(b1, i_path)
                            {
                                Complex64::new(1.0, 0.0)
                            } else {
                                Complex64::new(0.0, 0.0)
                            };
                            if !coeffs.is_empty() || rhs.norm() > 0.0 {
                                rows.push((coeffs, rhs));
                            }
                        }
                    }
                }
            }
        }
    }

    fn append_right_equations(
        &self,
        rows: &mut Vec<(Vec<(usize, Complex64)>, Complex64)>,
        col_of: &HashMap<(TransferEntryKey, PathPair, usize, usize), usize>,
    ) {
        // sum_beta f(beta, b2) g(b1, beta) = delta_{b1,b2} Id on paths f emits
        let n = self.conn.arrow_count() as ArrIx;
        for b1 in 0..n {
            for b2 in 0..n {
                if left_obj(&self.conn, b1) != left_obj(&self.conn, b2) {
                    continue;
                }
                let targets: Vec<ObjRef> = all_right_objects(&self.conn);
                for x in targets {
                    let ins = anchored_paths(&self.right, right_obj(&self.conn, b1), x);
                    let outs = anchored_paths(&self.right, right_obj(&self.conn, b2), x);
                    for i_path in &ins {
                        for o_path in &outs {
                            let mut coeffs: Vec<(usize, Complex64)> = Vec::new();
                            for (&(fb, fb2), fblocks) in &self.entries {
                                if fb2 != b2 {
                                    continue;
                                }
                                for ((fi, fo), fm) in fblocks {
                                    if fo != o_path {
                                        continue;
                                    }
                                    debug_assert_eq!(fm.nrows(), 1);
                                    let key = ((b1, fb), (i_path.clone(), fi.clone()), 0usize, 0usize);
                                    if let Some(&ci) = col_of.get(&key) {
                                        coeffs.push((ci, fm[(0, 0)]));
                                    }
                                }
                            }
                            let rhs = if b1 == b2
                                && i_path == o_path
                                && self.emits_out(b1, i_path)
                            {
                                Complex64::new(1.0, 0.0)
                            } else {
                                Complex64::new(0.0, 0.0)
                            };
                            if !coeffs.is_empty() || rhs.norm() > 0.0 {
                                rows.push((coeffs, rhs));
                            }
                        }
                    }
                }
            }
        }
    }

    /// Does the operator transfer the given input path along β?
    fn transfers_in(&self, b: ArrIx, path: &[ArrIx]) -> bool {
        self.entries
            .iter()
            .any(|(&(b1, _), blocks)| b1 == b && blocks.keys().any(|(i, _)| i == path))
    }

    /// Does the operator emit the given output path at β?
    fn emits_out(&self, b: ArrIx, path: &[ArrIx]) -> bool {
        self.entries
            .iter()
            .any(|(&(_, b2), blocks)| b2 == b && blocks.keys().any(|(_, o)| o == path))
    }

    pub fn is_invertible(&self) -> bool {
        self.inverse().is_ok()
    }

    pub fn max_diff(&self, other: &TransferOperator) -> f64 {
        diff_tables(&self.entries, &other.entries)
    }
}

fn diff_tables(
    a: &HashMap<TransferEntryKey, HashMap<PathPair, DMatrix<Complex64>>>,
    b: &HashMap<TransferEntryKey, HashMap<PathPair, DMatrix<Complex64>>>,
) -> f64 {
    let mut worst = 0.0f64;
    let empty = HashMap::new();
    let keys: std::collections::HashSet<_> = a.keys().chain(b.keys()).collect();
    for k in keys {
        let la = a.get(k).unwrap_or(&empty);
        let lb = b.get(k).unwrap_or(&empty);
        let pks: std::collections::HashSet<_> = la.keys().chain(lb.keys()).collect();
        for pk in pks {
            let d = match (la.get(pk), lb.get(pk)) {
                (Some(x), Some(y)) => (x - y).camax(),
                (Some(x), None) | (None, Some(x)) => x.camax(),
                (None, None) => 0.0,
            };
            worst = worst.max(d);
        }
    }
    worst
}

fn all_left_objects(conn: &ConnectingSet) -> Vec<ObjRef> {
    let gid = Arc::as_ptr(&conn.left) as usize;
    (0..conn.left.object_count() as u32)
        .map(|ix| ObjRef { gid, ix })
        .collect()
}

fn all_right_objects(conn: &ConnectingSet) -> Vec<ObjRef> {
    let gid = Arc::as_ptr(&conn.right) as usize;
    (0..conn.right.object_count() as u32)
        .map(|ix| ObjRef { gid, ix })
        .collect()
}

fn anchored_paths(slots: &[Slot], from: ObjRef, to: ObjRef) -> Vec<Vec<ArrIx>> {
    enumerate_paths(slots, Some(from))
        .into_iter()
        .filter(|p| {
            super::block::path_endpoints(slots, p)
                .map(|(_, t)| t == to)
                .unwrap_or(false)
        })
        .collect()
}

impl TriangleOperator {
    /// `∗▷` product: `(l₁ ∗▷ l₂)(β₁,β₂) = Σ_β l₁(β,β₂) l₂(β₁,β)`.
    pub fn star(&self, other: &TriangleOperator) -> Result<TriangleOperator, GradedError> {
        if self.side != other.side {
            return Err(GradedError::KindMismatch("triangle product needs equal sides".into()));
        }
        let mut out = TriangleOperator {
            side: self.side,
            conn: self.conn.clone(),
            slots: self.slots.clone(),
            entries: HashMap::new(),
        };
        for (&(b1, bmid), lblocks) in &other.entries {
            for (&(bmid2, b2), fblocks) in &self.entries {
                if bmid2 != bmid {
                    continue;
                }
                for ((li, lo), lm) in lblocks {
                    for ((fi, fo), fm) in fblocks {
                        if fi != lo {
                            continue;
                        }
                        *out.entries
                            .entry((b1, b2))
                            .or_default()
                            .entry((li.clone(), fo.clone()))
                            .or_insert_with(|| DMatrix::zeros(fm.nrows(), lm.ncols())) += fm * lm;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Read the `(β,β)` component at the system's chosen arrow for each
    /// right-groupoid object and assemble the resulting block operator.
    pub fn triangle_down(&self, sigma: &ConnectingSystem) -> Result<BlockOperator, GradedError> {
        if !Arc::ptr_eq(&sigma.conn, &self.conn) {
            return Err(GradedError::GroupoidMismatch(
                "connecting system belongs to a different connecting set".into(),
            ));
        }
        let mut out = BlockOperator::zero(self.slots.clone(), self.slots.clone());
        for o in 0..self.conn.right.object_count() as u32 {
            let b = sigma.chosen(o);
            if let Some(blocks) = self.entries.get(&(b, b)) {
                for ((i, opath), m) in blocks {
                    out.insert(BlockKey::new(i.clone(), opath.clone()), m.clone())?;
                }
            }
        }
        Ok(out)
    }

    pub fn max_diff(&self, other: &TriangleOperator) -> f64 {
        diff_tables(&self.entries, &other.entries)
    }
}

/// Lift an endomorphism-shaped block operator to a triangle operator
/// supported on the diagonal `(β,β)` of a connecting system.
pub fn triangle_up(
    op: &BlockOperator,
    sigma: &ConnectingSystem,
    side: TriangleSide,
) -> Result<TriangleOperator, GradedError> {
    let mut out = TriangleOperator {
        side,
        conn: sigma.conn.clone(),
        slots: op.domain.clone(),
        entries: HashMap::new(),
    };
    for o in 0..sigma.conn.right.object_count() as u32 {
        let b = sigma.chosen(o);
        let anchor = match side {
            TriangleSide::Left => left_obj(&sigma.conn, b),
            TriangleSide::Right => right_obj(&sigma.conn, b),
        };
        let mut blocks: HashMap<PathPair, DMatrix<Complex64>> = HashMap::new();
        for (k, m) in &op.blocks {
            let ok = match side {
                // paths ending at s(beta)
                TriangleSide::Left => super::block::path_endpoints(&op.domain, &k.input)
                    .map(|(_, t)| t == anchor)
                    .unwrap_or(false),
                // paths starting at t(beta)
                TriangleSide::Right => super::block::path_endpoints(&op.domain, &k.input)
                    .map(|(s, _)| s == anchor)
                    .unwrap_or(false),
            };
            if ok {
                blocks.insert((k.input.clone(), k.output.clone()), m.clone());
            }
        }
        if !blocks.is_empty() {
            out.entries.insert((b, b), blocks);
        }
    }
    Ok(out)
}

/// Matrix elements of a block operator along a Verma-type connecting
/// slot: `Mat(J)(β₁,β₂) = (v*_{β₂} ⊗ 1) J (1 ⊗ v_{β₁})`.
///
/// The connecting slot must be the last domain slot and the first
/// codomain slot, and carry one-dimensional components (the distinguished
/// vector is the basis vector).
pub fn matrix_element(
    op: &BlockOperator,
    conn: Arc<ConnectingSet>,
) -> Result<TransferOperator, GradedError> {
    let n = op.domain.len();
    let left: Vec<Slot> = op.domain[..n - 1].to_vec();
    let right: Vec<Slot> = op.codomain[1..].to_vec();
    match &op.domain[n - 1] {
        Slot::Conn(s) => {
            if s.dims.iter().any(|&d| d != 1) {
                return Err(GradedError::NotVermaType(s.conn.name.clone()));
            }
        }
        Slot::Graded(s) => {
            if s.support().any(|a| s.dim(a) != 1) {
                return Err(GradedError::NotVermaType(s.name.clone()));
            }
        }
    }
    let mut out = TransferOperator::zero(TransferKind::Forward, conn, left, right);
    for (k, m) in &op.blocks {
        let b1 = k.input[n - 1];
        let b2 = k.output[0];
        let in_path = k.input[..n - 1].to_vec();
        let out_path = k.output[1..].to_vec();
        out.insert(b1, b2, in_path, out_path, m.clone())?;
    }
    Ok(out)
}

impl ConnectingSet {
    /// A clone with source/target swapped (used to present backward
    /// operators as forward ones during inversion).
    pub fn reversed_clone(conn: &Arc<ConnectingSet>) -> ConnectingSet {
        let arrows: Vec<(String, u32, u32)> = conn
            .arrows()
            .map(|(_, a)| (format!("{}^T", a.id), a.tgt, a.src))
            .collect();
        ConnectingSet::new(
            &format!("{}^T", conn.name),
            conn.right.clone(),
            conn.left.clone(),
            arrows,
        )
        .map(|a| (*a).clone())
        .expect("reversed connecting set")
    }
}
