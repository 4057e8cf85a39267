//! Plaquette-indexed block operators.
//!
//! A [`BlockOperator`] stores one small dense matrix per pair of parallel
//! paths (input path through the domain slots, output path through the
//! codomain slots, equal endpoints). When every slot lives over one
//! common groupoid the grading additionally requires equal reduced
//! composites of the two paths, which is the conservation law
//! `β∘α = δ∘γ` of the plaquette decomposition.

use super::space::{ObjRef, Slot};
use super::GradedError;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::Arc;
use crate::util::ComplexAmax;

/// Key of one block: the input arrow tuple and the output arrow tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockKey {
    pub input: Vec<u32>,
    pub output: Vec<u32>,
}

impl BlockKey {
    pub fn new(input: Vec<u32>, output: Vec<u32>) -> Self {
        BlockKey { input, output }
    }
}

/// Follow a path through the slots; `None` if it does not chain.
pub fn path_endpoints(slots: &[Slot], arrows: &[u32]) -> Option<(ObjRef, ObjRef)> {
    assert_eq!(slots.len(), arrows.len());
    let mut src = None;
    let mut cur: Option<ObjRef> = None;
    for (slot, &a) in slots.iter().zip(arrows) {
        let info = slot.arrow(a);
        if let Some(c) = cur {
            if c != info.src {
                return None;
            }
        } else {
            src = Some(info.src);
        }
        cur = Some(info.tgt);
    }
    src.zip(cur)
}

fn path_dim(slots: &[Slot], arrows: &[u32]) -> usize {
    slots.iter().zip(arrows).map(|(s, &a)| s.dim(a)).product()
}

/// Common groupoid of a slot list, if all slots are graded over one.
fn common_groupoid(slots: &[Slot]) -> Option<Arc<crate::groupoid::Groupoid>> {
    let mut it = slots.iter();
    let first = it.next()?.groupoid()?.clone();
    for s in it {
        if !Arc::ptr_eq(s.groupoid()?, &first) {
            return None;
        }
    }
    Some(first)
}

/// A graded operator between tensor products of slots.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    pub domain: Vec<Slot>,
    pub codomain: Vec<Slot>,
    pub blocks: HashMap<BlockKey, DMatrix<Complex64>>,
}

impl BlockOperator {
    pub fn zero(domain: Vec<Slot>, codomain: Vec<Slot>) -> Self {
        BlockOperator { domain, codomain, blocks: HashMap::new() }
    }

    fn key_desc(&self, key: &BlockKey) -> String {
        let ins: Vec<String> = key
            .input
            .iter()
            .zip(&self.domain)
            .map(|(&a, s)| s.arrow(a).id)
            .collect();
        let outs: Vec<String> = key
            .output
            .iter()
            .zip(&self.codomain)
            .map(|(&a, s)| s.arrow(a).id)
            .collect();
        format!("[{} | {}]", ins.join(","), outs.join(","))
    }

    /// Grading validity of a key: parallel paths with equal endpoints,
    /// plus equal reduced composites in the single-groupoid case.
    pub fn key_valid(&self, key: &BlockKey) -> bool {
        let Some((is, it)) = path_endpoints(&self.domain, &key.input) else {
            return false;
        };
        let Some((os, ot)) = path_endpoints(&self.codomain, &key.output) else {
            return false;
        };
        if is != os || it != ot {
            return false;
        }
        let all: Vec<Slot> = self.domain.iter().chain(self.codomain.iter()).cloned().collect();
        if let Some(g) = common_groupoid(&all) {
            let din = g.degree_of_path(is.ix, &key.input);
            let dout = g.degree_of_path(is.ix, &key.output);
            if din != dout {
                return false;
            }
        }
        true
    }

    /// Insert a block, validating grading and shape.
    pub fn insert(
        &mut self,
        key: BlockKey,
        mat: DMatrix<Complex64>,
    ) -> Result<(), GradedError> {
        if !self.key_valid(&key) {
            return Err(GradedError::GradingViolation(self.key_desc(&key)));
        }
        let want_cols = path_dim(&self.domain, &key.input);
        let want_rows = path_dim(&self.codomain, &key.output);
        if mat.nrows() != want_rows || mat.ncols() != want_cols {
            return Err(GradedError::ShapeMismatch {
                key: self.key_desc(&key),
                rows: mat.nrows(),
                cols: mat.ncols(),
                want_rows,
                want_cols,
            });
        }
        if mat.iter().any(|e| e.norm() != 0.0) {
            match self.blocks.entry(key) {
                std::collections::hash_map::Entry::Occupied(mut e) => {
                    let m = e.get_mut();
                    *m += mat;
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(mat);
                }
            }
        }
        Ok(())
    }

    /// Identity operator on a slot list.
    pub fn identity(slots: &[Slot]) -> Self {
        let mut op = BlockOperator::zero(slots.to_vec(), slots.to_vec());
        for path in enumerate_paths(slots, None) {
            let d = path_dim(slots, &path);
            let key = BlockKey::new(path.clone(), path);
            op.blocks.insert(key, DMatrix::identity(d, d));
        }
        op
    }

    fn slots_match(a: &[Slot], b: &[Slot]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_slot(y))
    }

    /// Function composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &BlockOperator) -> Result<BlockOperator, GradedError> {
        if !Self::slots_match(&self.domain, &other.codomain) {
            return Err(GradedError::SlotMismatch(
                "compose: domain of left factor differs from codomain of right factor".into(),
            ));
        }
        let mut by_input: HashMap<&[u32], Vec<(&BlockKey, &DMatrix<Complex64>)>> = HashMap::new();
        for (k, m) in &self.blocks {
            by_input.entry(k.input.as_slice()).or_default().push((k, m));
        }
        let mut out = BlockOperator::zero(other.domain.clone(), self.codomain.clone());
        for (gk, gm) in &other.blocks {
            if let Some(matches) = by_input.get(gk.output.as_slice()) {
                for (fk, fm) in matches {
                    let key = BlockKey::new(gk.input.clone(), fk.output.clone());
                    let prod = *fm * gm;
                    match out.blocks.entry(key) {
                        std::collections::hash_map::Entry::Occupied(mut e) => {
                            *e.get_mut() += prod;
                        }
                        std::collections::hash_map::Entry::Vacant(e) => {
                            e.insert(prod);
                        }
                    }
                }
            }
        }
        out.prune();
        Ok(out)
    }

    /// Tensor product; keys that do not chain across the factor boundary
    /// are dropped (they index the zero component).
    pub fn tensor(&self, other: &BlockOperator) -> BlockOperator {
        let domain: Vec<Slot> = self.domain.iter().chain(&other.domain).cloned().collect();
        let codomain: Vec<Slot> = self.codomain.iter().chain(&other.codomain).cloned().collect();
        let mut out = BlockOperator::zero(domain, codomain);
        for (fk, fm) in &self.blocks {
            for (gk, gm) in &other.blocks {
                let mut input = fk.input.clone();
                input.extend_from_slice(&gk.input);
                let mut output = fk.output.clone();
                output.extend_from_slice(&gk.output);
                let key = BlockKey::new(input, output);
                if path_endpoints(&out.domain, &key.input).is_none()
                    || path_endpoints(&out.codomain, &key.output).is_none()
                {
                    continue;
                }
                out.blocks.insert(key, fm.kronecker(gm));
            }
        }
        out
    }

    /// Embed as `id ⊗ self ⊗ id` acting on slots `[at, at+k)` of the
    /// ambient list, where the ambient slots outside the window must be
    /// identical on the domain and codomain side.
    pub fn embed(&self, at: usize, ambient: &[Slot]) -> BlockOperator {
        let left = &ambient[..at];
        let right = &ambient[at + self.domain.len()..];
        let mut op = if left.is_empty() {
            self.clone()
        } else {
            BlockOperator::identity(left).tensor(self)
        };
        if !right.is_empty() {
            op = op.tensor(&BlockOperator::identity(right));
        }
        op
    }

    pub fn add(&mut self, other: &BlockOperator) -> Result<(), GradedError> {
        if !Self::slots_match(&self.domain, &other.domain)
            || !Self::slots_match(&self.codomain, &other.codomain)
        {
            return Err(GradedError::SlotMismatch("add: slot lists differ".into()));
        }
        for (k, m) in &other.blocks {
            match self.blocks.entry(k.clone()) {
                std::collections::hash_map::Entry::Occupied(mut e) => {
                    *e.get_mut() += m;
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(m.clone());
                }
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, c: Complex64) {
        for m in self.blocks.values_mut() {
            *m *= c;
        }
    }

    /// Max absolute entry of `self - other` over the union of keys.
    pub fn max_diff(&self, other: &BlockOperator) -> f64 {
        let mut worst = 0.0f64;
        for (k, m) in &self.blocks {
            let d = match other.blocks.get(k) {
                Some(o) => (m - o).camax(),
                None => m.camax(),
            };
            worst = worst.max(d);
        }
        for (k, o) in &other.blocks {
            if !self.blocks.contains_key(k) {
                worst = worst.max(o.camax());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.values().map(|m| m.camax()).fold(0.0, f64::max)
    }

    fn prune(&mut self) {
        self.blocks.retain(|_, m| m.iter().any(|e| e.norm() != 0.0));
    }

    /// Restrict an endomorphism-shaped operator to the source fiber at an
    /// object. Basis order: input paths sorted lexicographically by their
    /// arrow-id tuples, then row-major over component dimensions.
    pub fn restrict_source_fiber(&self, at: ObjRef) -> Result<FiberMatrix, GradedError> {
        if !Self::slots_match(&self.domain, &self.codomain) {
            return Err(GradedError::SlotMismatch(
                "source-fiber restriction needs an endomorphism-shaped operator".into(),
            ));
        }
        let mut paths = enumerate_paths(&self.domain, Some(at));
        if paths.is_empty() {
            return Err(GradedError::EmptyFiber(format!("{at:?}")));
        }
        paths.sort_by_key(|p| {
            p.iter()
                .zip(&self.domain)
                .map(|(&a, s)| s.arrow(a).id)
                .collect::<Vec<_>>()
        });
        let mut offsets = Vec::with_capacity(paths.len());
        let mut total = 0usize;
        for p in &paths {
            offsets.push(total);
            total += path_dim(&self.domain, p);
        }
        let index: HashMap<&[u32], usize> = paths
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_slice(), i))
            .collect();
        let mut mat = DMatrix::<Complex64>::zeros(total, total);
        for (k, m) in &self.blocks {
            let (Some(&ci), Some(&ri)) =
                (index.get(k.input.as_slice()), index.get(k.output.as_slice()))
            else {
                continue;
            };
            let (c0, r0) = (offsets[ci], offsets[ri]);
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    mat[(r0 + r, c0 + c)] += m[(r, c)];
                }
            }
        }
        Ok(FiberMatrix { object: at, paths, mat })
    }

    /// Graded trace pairing one domain slot with one codomain slot over
    /// the same space: insert a basis vector, project the matching basis
    /// covector, sum. The traced slots are removed.
    pub fn trace_pair(&self, dom_slot: usize, cod_slot: usize) -> Result<BlockOperator, GradedError> {
        if !self.domain[dom_slot].same_slot(&self.codomain[cod_slot]) {
            return Err(GradedError::SlotMismatch(
                "trace_pair: the paired slots are different spaces".into(),
            ));
        }
        let mut domain = self.domain.clone();
        domain.remove(dom_slot);
        let mut codomain = self.codomain.clone();
        codomain.remove(cod_slot);
        let mut out = BlockOperator::zero(domain, codomain);
        for (k, m) in &self.blocks {
            let a = k.input[dom_slot];
            if k.output[cod_slot] != a {
                continue;
            }
            let d = self.domain[dom_slot].dim(a);
            let in_dims: Vec<usize> = k
                .input
                .iter()
                .zip(&self.domain)
                .map(|(&x, s)| s.dim(x))
                .collect();
            let out_dims: Vec<usize> = k
                .output
                .iter()
                .zip(&self.codomain)
                .map(|(&x, s)| s.dim(x))
                .collect();
            let mut input = k.input.clone();
            input.remove(dom_slot);
            let mut output = k.output.clone();
            output.remove(cod_slot);
            let new_cols: usize = in_dims
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != dom_slot)
                .map(|(_, &x)| x)
                .product();
            let new_rows: usize = out_dims
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != cod_slot)
                .map(|(_, &x)| x)
                .product();
            let mut traced = DMatrix::<Complex64>::zeros(new_rows, new_cols);
            for rc in 0..new_rows {
                for cc in 0..new_cols {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for t in 0..d {
                        let full_c = insert_index(cc, &in_dims, dom_slot, t);
                        let full_r = insert_index(rc, &out_dims, cod_slot, t);
                        acc += m[(full_r, full_c)];
                    }
                    traced[(rc, cc)] = acc;
                }
            }
            let key = BlockKey::new(input, output);
            match out.blocks.entry(key) {
                std::collections::hash_map::Entry::Occupied(mut e) => {
                    *e.get_mut() += traced;
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(traced);
                }
            }
        }
        out.prune();
        Ok(out)
    }

    /// Transposed coefficient table for all-one-dimensional operators
    /// over graded slots: reverse and invert both arrow tuples and swap
    /// the input/output roles.
    pub fn transpose_table(&self) -> Result<BlockOperator, GradedError> {
        let rev_inv = |slots: &[Slot], arrows: &[u32]| -> Result<Vec<u32>, GradedError> {
            let mut v = Vec::with_capacity(arrows.len());
            for (slot, &a) in slots.iter().zip(arrows).rev() {
                let inv = slot
                    .inverse(a)
                    .ok_or_else(|| GradedError::NoInverses(slot.arrow(a).id))?;
                if slot.dim(inv) != slot.dim(a) {
                    return Err(GradedError::SlotMismatch(format!(
                        "component dims of `{}` and its inverse differ",
                        slot.arrow(a).id
                    )));
                }
                v.push(inv);
            }
            Ok(v)
        };
        let mut out = BlockOperator::zero(self.codomain.clone(), self.domain.clone());
        for (k, m) in &self.blocks {
            if m.nrows() != 1 || m.ncols() != 1 {
                return Err(GradedError::NotOneDimensional(m.nrows().max(m.ncols())));
            }
            let input = rev_inv(&self.codomain, &k.output)?;
            let output = rev_inv(&self.domain, &k.input)?;
            out.blocks.insert(BlockKey::new(input, output), m.clone());
        }
        Ok(out)
    }

    /// Exact table equality (same keys, identical entries).
    pub fn table_eq(&self, other: &BlockOperator) -> bool {
        if self.blocks.len() != other.blocks.len() {
            return false;
        }
        self.blocks.iter().all(|(k, m)| other.blocks.get(k).map_or(false, |o| m == o))
    }
}

fn insert_index(reduced: usize, dims: &[usize], at: usize, value: usize) -> usize {
    // Rebuild a row-major multi-index with `value` inserted at slot `at`.
    let mut rem = reduced;
    let mut idx = vec![0usize; dims.len()];
    for i in (0..dims.len()).rev() {
        if i == at {
            continue;
        }
        idx[i] = rem % dims[i];
        rem /= dims[i];
    }
    idx[at] = value;
    let mut flat = 0usize;
    for i in 0..dims.len() {
        flat = flat * dims[i] + idx[i];
    }
    flat
}

/// All composable nonzero-dimension paths through the slots, optionally
/// anchored at a source object.
pub fn enumerate_paths(slots: &[Slot], from: Option<ObjRef>) -> Vec<Vec<u32>> {
    let mut acc: Vec<(Vec<u32>, Option<ObjRef>)> = vec![(Vec::new(), from)];
    for slot in slots {
        let support = slot.support();
        let mut next = Vec::new();
        for (path, cur) in &acc {
            for &a in &support {
                let info = slot.arrow(a);
                if let Some(c) = cur {
                    if *c != info.src {
                        continue;
                    }
                }
                let mut p = path.clone();
                p.push(a);
                next.push((p, Some(info.tgt)));
            }
        }
        acc = next;
    }
    acc.into_iter().map(|(p, _)| p).collect()
}

/// A source-fiber restriction: the operator as a dense matrix in the
/// documented deterministic basis order.
#[derive(Debug, Clone)]
pub struct FiberMatrix {
    pub object: ObjRef,
    pub paths: Vec<Vec<u32>>,
    pub mat: DMatrix<Complex64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::space::GradedSpace;
    use crate::groupoid::Groupoid;
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn chain_space() -> (Arc<Groupoid>, Slot) {
        let g = Groupoid::chain("A3", 1, 3, c(0.0));
        let v = GradedSpace::one_dim_on_generators("V", g.clone());
        (g, Slot::Graded(v))
    }

    #[test]
    fn identity_composes_neutrally() {
        let (_, slot) = chain_space();
        let slots = vec![slot.clone(), slot.clone()];
        let id = BlockOperator::identity(&slots);
        let composed = id.compose(&id).unwrap();
        assert_eq!(composed.blocks.len(), id.blocks.len());
        assert!(composed.max_diff(&id) < 1e-15);
    }

    #[test]
    fn grading_rejects_mismatched_paths() {
        let (g, slot) = chain_space();
        let slots = vec![slot.clone(), slot.clone()];
        let mut op = BlockOperator::zero(slots.clone(), slots);
        let up1 = g.arrow_ix("+@n01").unwrap();
        let up2 = g.arrow_ix("+@n02").unwrap();
        let dn2 = g.arrow_ix("-@n02").unwrap();
        // (up, down) ends at n01; (up, up) ends at n03: endpoint mismatch
        let bad = BlockKey::new(vec![up1, dn2], vec![up1, up2]);
        assert!(op
            .insert(bad, DMatrix::from_element(1, 1, c(1.0)))
            .is_err());
        // equal endpoints and equal degree: fine
        let ok = BlockKey::new(vec![up1, dn2], vec![up1, dn2]);
        op.insert(ok, DMatrix::from_element(1, 1, c(2.0))).unwrap();
        assert_eq!(op.blocks.len(), 1);
    }

    #[test]
    fn fiber_restriction_of_identity() {
        let (g, slot) = chain_space();
        let slots = vec![slot.clone(), slot.clone()];
        let id = BlockOperator::identity(&slots);
        let mid = g.object_ix("n02").unwrap();
        let fiber = id
            .restrict_source_fiber(ObjRef { gid: Arc::as_ptr(&g) as usize, ix: mid })
            .unwrap();
        // paths from the middle object: (+,-) and (-,+)
        assert_eq!(fiber.paths.len(), 2);
        assert!((fiber.mat.clone() - DMatrix::<Complex64>::identity(2, 2)).camax() < 1e-15);
    }

    #[test]
    fn compose_matches_fiber_product() {
        // (R ⊗ id) ∘ (id ⊗ R) evaluated blockwise agrees with the dense
        // product of the fiber matrices.
        let (g, slot) = chain_space();
        let slots3 = vec![slot.clone(), slot.clone(), slot.clone()];
        // a permutation-like operator on two slots
        let slots2 = vec![slot.clone(), slot.clone()];
        let mut r = BlockOperator::zero(slots2.clone(), slots2.clone());
        for key_in in enumerate_paths(&slots2, None) {
            for key_out in enumerate_paths(&slots2, None) {
                let key = BlockKey::new(key_in.clone(), key_out.clone());
                if !r.key_valid(&key) {
                    continue;
                }
                let weight = if key_in == key_out { c(0.5) } else { c(1.0) };
                r.insert(key, DMatrix::from_element(1, 1, weight)).unwrap();
            }
        }
        let r12 = r.embed(0, &slots3);
        let r23 = r.embed(1, &slots3);
        let lhs = r12.compose(&r23).unwrap();
        let gid = Arc::as_ptr(&g) as usize;
        let at = ObjRef { gid, ix: g.object_ix("n01").unwrap() };
        let f_lhs = lhs.restrict_source_fiber(at).unwrap();
        let f_a = r12.restrict_source_fiber(at).unwrap();
        let f_b = r23.restrict_source_fiber(at).unwrap();
        assert_eq!(f_lhs.paths, f_a.paths);
        let dense = &f_a.mat * &f_b.mat;
        assert!((f_lhs.mat.clone() - dense).camax() < 1e-14);
    }

    #[test]
    fn trace_pair_of_identity_counts_dimension() {
        let (_, slot) = chain_space();
        let slots = vec![slot.clone(), slot.clone()];
        let id = BlockOperator::identity(&slots);
        let traced = id.trace_pair(1, 1).unwrap();
        // per remaining arrow: sum over matched middle arrows of identity
        for (k, m) in &traced.blocks {
            assert_eq!(k.input, k.output);
            assert!(m.nrows() == 1);
            // middle object has one continuation, ends have one
            assert!(m[(0, 0)].re >= 1.0);
        }
    }

    #[test]
    fn transpose_is_involutive() {
        let (_, slot) = chain_space();
        let slots = vec![slot.clone(), slot.clone()];
        let mut r = BlockOperator::zero(slots.clone(), slots.clone());
        let mut w = 1.0;
        for key_in in enumerate_paths(&slots, None) {
            for key_out in enumerate_paths(&slots, None) {
                let key = BlockKey::new(key_in.clone(), key_out.clone());
                if !r.key_valid(&key) {
                    continue;
                }
                w += 1.0;
                r.insert(key, DMatrix::from_element(1, 1, c(w))).unwrap();
            }
        }
        let t = r.transpose_table().unwrap();
        let tt = t.transpose_table().unwrap();
        assert!(tt.table_eq(&r));
    }
}
