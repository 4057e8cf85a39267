//! Convolution algebra elements and graded partial traces.
//!
//! An element of `Γ(π, R)` is a finitely supported map from degrees to
//! homogeneous coefficient blocks. Blocks are stored per (in-degree,
//! out-degree) pair; the coefficient algebra tag records which grading
//! discipline applies.

use super::block::BlockOperator;
use super::space::Slot;
use super::GradedError;
use crate::groupoid::{Degree, Groupoid};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::Arc;
use crate::util::ComplexAmax;

/// Coefficient algebra of a convolution element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffKind {
    /// Blocks `V_α → V_{d∘α∘d⁻¹}` (composition direction of the grading).
    EndUpper,
    /// Blocks `V_{d⁻¹∘α∘d} → V_α`.
    EndLower,
    /// Blocks between two different spaces (bimodule coefficients).
    Hom,
}

/// A finitely supported element of a convolution algebra or module.
#[derive(Debug, Clone)]
pub struct ConvolutionElement {
    pub kind: CoeffKind,
    pub groupoid: Arc<Groupoid>,
    /// degree -> (in-degree, out-degree) -> block
    pub entries: HashMap<Degree, HashMap<(Degree, Degree), DMatrix<Complex64>>>,
}

impl ConvolutionElement {
    pub fn zero(kind: CoeffKind, groupoid: Arc<Groupoid>) -> Self {
        ConvolutionElement { kind, groupoid, entries: HashMap::new() }
    }

    /// Two-sided unit: identity blocks at identity degrees.
    pub fn unit(groupoid: Arc<Groupoid>, dims: &dyn Fn(&Degree) -> usize) -> Self {
        let mut u = Self::zero(CoeffKind::EndUpper, groupoid.clone());
        for o in 0..groupoid.object_count() as u32 {
            let id_deg = Degree { src: o, tgt: o, steps: vec![] };
            let mut blocks = HashMap::new();
            for (a, arr) in groupoid.arrows() {
                if arr.src != o {
                    continue;
                }
                let d = Degree { src: arr.src, tgt: arr.tgt, steps: if groupoid.is_identity(a) { vec![] } else { vec![a] } };
                let n = dims(&d);
                if n > 0 {
                    blocks.insert((d.clone(), d), DMatrix::identity(n, n));
                }
            }
            if !blocks.is_empty() {
                u.entries.insert(id_deg, blocks);
            }
        }
        u
    }

    pub fn insert(&mut self, grade: Degree, key: (Degree, Degree), mat: DMatrix<Complex64>) {
        *self
            .entries
            .entry(grade)
            .or_default()
            .entry(key)
            .or_insert_with(|| DMatrix::zeros(mat.nrows(), mat.ncols())) += mat;
    }

    /// Convolution product `(self ∗ other)(d) = Σ_{d₂∘d₁=d} self(d₂)·other(d₁)`
    /// over factorizations into the supported degrees (`other` acts first).
    pub fn convolve(&self, other: &ConvolutionElement) -> Result<ConvolutionElement, GradedError> {
        if !Arc::ptr_eq(&self.groupoid, &other.groupoid) {
            return Err(GradedError::GroupoidMismatch("convolve over different groupoids".into()));
        }
        let g = &self.groupoid;
        let mut out = Self::zero(self.kind, self.groupoid.clone());
        for (d1, b1) in &other.entries {
            for (d2, b2) in &self.entries {
                if d1.tgt != d2.src {
                    continue;
                }
                let mut steps = d1.steps.clone();
                steps.extend_from_slice(&d2.steps);
                let total = g.degree_of_path(d1.src, &steps);
                for ((i1, o1), m1) in b1 {
                    for ((i2, o2), m2) in b2 {
                        if o1 != i2 {
                            continue;
                        }
                        out.insert(total.clone(), (i1.clone(), o2.clone()), m2 * m1);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn max_diff(&self, other: &ConvolutionElement) -> f64 {
        let mut worst = 0.0f64;
        let zero = HashMap::new();
        for (d, b) in self.entries.iter().chain(other.entries.iter()) {
            let lhs = self.entries.get(d).unwrap_or(&zero);
            let rhs = other.entries.get(d).unwrap_or(&zero);
            for (k, m) in lhs.iter().chain(rhs.iter()) {
                let a = lhs.get(k);
                let bm = rhs.get(k);
                let diff = match (a, bm) {
                    (Some(x), Some(y)) => (x - y).camax(),
                    (Some(x), None) | (None, Some(x)) => x.camax(),
                    (None, None) => 0.0,
                };
                worst = worst.max(diff);
            }
            let _ = b;
        }
        worst
    }
}

/// Graded partial trace of a two-slot block operator, pairing one domain
/// slot with one codomain slot over the same space. The remaining single
/// domain/codomain arrows become the block key; the traced arrow is the
/// grading degree.
pub fn partial_trace(
    op: &BlockOperator,
    dom_slot: usize,
    cod_slot: usize,
    groupoid: Arc<Groupoid>,
    kind: CoeffKind,
) -> Result<ConvolutionElement, GradedError> {
    if op.domain.len() != 2 || op.codomain.len() != 2 {
        return Err(GradedError::SlotMismatch(
            "partial_trace expects two-slot operators".into(),
        ));
    }
    if !op.domain[dom_slot].same_slot(&op.codomain[cod_slot]) {
        return Err(GradedError::SlotMismatch(
            "partial_trace: traced slots are different spaces".into(),
        ));
    }
    let other_dom = 1 - dom_slot;
    let other_cod = 1 - cod_slot;
    let mut out = ConvolutionElement::zero(kind, groupoid.clone());
    for (k, m) in &op.blocks {
        let b = k.input[dom_slot];
        if k.output[cod_slot] != b {
            continue;
        }
        let slot = &op.domain[dom_slot];
        let d = slot.dim(b);
        let in_dims: Vec<usize> = k.input.iter().zip(&op.domain).map(|(&x, s)| s.dim(x)).collect();
        let out_dims: Vec<usize> =
            k.output.iter().zip(&op.codomain).map(|(&x, s)| s.dim(x)).collect();
        let rows = out_dims[other_cod];
        let cols = in_dims[other_dom];
        let mut block = DMatrix::<Complex64>::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..d {
                    let (ci, ri) = match (dom_slot, cod_slot) {
                        (1, 0) => (c * in_dims[1] + t, t * out_dims[1] + r),
                        (0, 1) => (t * in_dims[1] + c, r * out_dims[1] + t),
                        (1, 1) => (c * in_dims[1] + t, r * out_dims[1] + t),
                        _ => (t * in_dims[1] + c, t * out_dims[1] + r),
                    };
                    acc += m[(ri, ci)];
                }
                block[(r, c)] = acc;
            }
        }
        let grade = degree_of_slot_arrow(slot, b);
        let in_deg = degree_of_slot_arrow(&op.domain[other_dom], k.input[other_dom]);
        let out_deg = degree_of_slot_arrow(&op.codomain[other_cod], k.output[other_cod]);
        out.insert(grade, (in_deg, out_deg), block);
    }
    Ok(out)
}

fn degree_of_slot_arrow(slot: &Slot, a: u32) -> Degree {
    match slot {
        Slot::Graded(s) => {
            let arr = s.groupoid.arrow(a);
            let steps = if s.groupoid.is_identity(a) { vec![] } else { vec![a] };
            Degree { src: arr.src, tgt: arr.tgt, steps }
        }
        Slot::Conn(s) => {
            let arr = s.conn.arrow(a);
            if s.reversed {
                Degree { src: arr.tgt, tgt: arr.src, steps: vec![a] }
            } else {
                Degree { src: arr.src, tgt: arr.tgt, steps: vec![a] }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::space::GradedSpace;
    use crate::groupoid::Groupoid;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn klein_dims() -> (Arc<Groupoid>, Arc<GradedSpace>) {
        let g = Groupoid::klein_one_object();
        let mut dims = HashMap::new();
        dims.insert(g.arrow_ix("+").unwrap(), 1usize);
        dims.insert(g.arrow_ix("-").unwrap(), 1usize);
        let v = GradedSpace::new("V", g.clone(), dims);
        (g, v)
    }

    #[test]
    fn unit_is_two_sided() {
        let (g, v) = klein_dims();
        let dims = |d: &Degree| -> usize {
            if d.steps.len() == 1 {
                v.dim(d.steps[0])
            } else {
                0
            }
        };
        let u = ConvolutionElement::unit(g.clone(), &dims);
        // a sample element supported on the generators
        let mut f = ConvolutionElement::zero(CoeffKind::EndUpper, g.clone());
        let plus = g.arrow_ix("+").unwrap();
        let minus = g.arrow_ix("-").unwrap();
        let dp = Degree { src: 0, tgt: 0, steps: vec![plus] };
        let dm = Degree { src: 0, tgt: 0, steps: vec![minus] };
        f.insert(dp.clone(), (dm.clone(), dm.clone()), DMatrix::from_element(1, 1, c(2.0)));
        f.insert(dm.clone(), (dp.clone(), dp.clone()), DMatrix::from_element(1, 1, c(3.0)));
        let left = u.convolve(&f).unwrap();
        let right = f.convolve(&u).unwrap();
        assert!(left.max_diff(&f) < 1e-15);
        assert!(right.max_diff(&f) < 1e-15);
    }

    #[test]
    fn convolution_is_associative() {
        let (g, _) = klein_dims();
        let plus = g.arrow_ix("+").unwrap();
        let minus = g.arrow_ix("-").unwrap();
        let dp = Degree { src: 0, tgt: 0, steps: vec![plus] };
        let dm = Degree { src: 0, tgt: 0, steps: vec![minus] };
        let mk = |w: f64| {
            let mut f = ConvolutionElement::zero(CoeffKind::EndUpper, g.clone());
            f.insert(dp.clone(), (dm.clone(), dm.clone()), DMatrix::from_element(1, 1, c(w)));
            f.insert(dm.clone(), (dp.clone(), dp.clone()), DMatrix::from_element(1, 1, c(w + 1.0)));
            f.insert(dp.clone(), (dp.clone(), dp.clone()), DMatrix::from_element(1, 1, c(w - 2.0)));
            f
        };
        let (f, h, k) = (mk(1.0), mk(-0.5), mk(2.5));
        let lhs = f.convolve(&h).unwrap().convolve(&k).unwrap();
        let rhs = f.convolve(&h.convolve(&k).unwrap()).unwrap();
        assert!(lhs.max_diff(&rhs) < 1e-12);
    }
}
