//! Concrete spectral operator families and the equation checkers.
//!
//! Model constructors: the zero-field eight-vertex operator on the
//! one-object Klein groupoid, the SOS and symmetric-SOS operators on a
//! shifted chain window, and the elliptic / trigonometric A-type
//! operators in Andrews-Baxter-Forrester parametrization (with a
//! restricted variant supported on the A-chain). Checkers evaluate the
//! Yang-Baxter equation, its dynamical form on source fibers, the
//! inversion relation and the symmetry (transposed-table) condition.

use crate::elliptic::{
    bracket, jacobi_h, jacobi_theta, trig_bracket, weight_h, EllipticError, EllipticParams,
    ThetaParams,
};
use crate::graded::{BlockKey, BlockOperator, GradedError, GradedSpace, ObjRef, Slot};
use crate::groupoid::{Groupoid, GroupoidError};
use crate::util::ComplexAmax;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error("spectral parameter {z} is too close to a pole ({what})")]
    PoleProximity { z: Complex64, what: String },
    #[error("sampler exhausted {0} resamples without clearing the pole guard")]
    PoleExhaustion(usize),
    #[error("unknown model identifier `{0}`")]
    UnknownModel(String),
    #[error("transpose requires one-dimensional components with inverses")]
    TransposeUnsupported,
}

/// Relative threshold of the pole guard: denominators smaller than this
/// times the reference scale reject the sample point.
pub const POLE_GUARD: f64 = 1e-8;

type Evaluator = dyn Fn(Complex64) -> Result<BlockOperator, ModelError> + Send + Sync;

/// A meromorphic family `z -> BlockOperator` on `V ⊗ V` with a pole guard.
#[derive(Clone)]
pub struct SpectralOperator {
    pub name: String,
    pub space: Arc<GradedSpace>,
    /// Objects whose source fibers are exact. Models cut out of an
    /// infinite chain by a finite window list only the objects at least
    /// three steps from the cut, where every length-3 square exists;
    /// genuinely restricted models keep all objects (boundary fibers are
    /// invariant subspaces).
    pub interior: Vec<u32>,
    eval: Arc<Evaluator>,
}

impl std::fmt::Debug for SpectralOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SpectralOperator({})", self.name)
    }
}

impl SpectralOperator {
    pub fn new(
        name: &str,
        space: Arc<GradedSpace>,
        eval: impl Fn(Complex64) -> Result<BlockOperator, ModelError> + Send + Sync + 'static,
    ) -> Self {
        SpectralOperator { name: name.to_string(), space, eval: Arc::new(eval) }
    }

    pub fn evaluate(&self, z: Complex64) -> Result<BlockOperator, ModelError> {
        (self.eval)(z)
    }

    /// Does `z` clear the pole guard?
    pub fn guard(&self, z: Complex64) -> bool {
        self.evaluate(z).is_ok()
    }

    pub fn slot(&self) -> Slot {
        Slot::Graded(self.space.clone())
    }

    /// Identity family on the given space (a trivial Yang-Baxter family).
    pub fn identity_family(space: Arc<GradedSpace>) -> Self {
        let slots = vec![Slot::Graded(space.clone()), Slot::Graded(space.clone())];
        SpectralOperator::new("id", space, move |_| Ok(BlockOperator::identity(&slots)))
    }

    /// Source-fiber objects of the underlying groupoid.
    pub fn objects(&self) -> Vec<ObjRef> {
        let gid = Arc::as_ptr(&self.space.groupoid) as usize;
        (0..self.space.groupoid.object_count() as u32)
            .map(|ix| ObjRef { gid, ix })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Model parameters
// ---------------------------------------------------------------------------

/// Which concrete family to build.
#[derive(Debug, Clone)]
pub enum ModelParams {
    /// Zero-field eight-vertex on the one-object Klein groupoid.
    EightVertex { ell: EllipticParams },
    /// SOS operator on the chain `Z + ξ`, `ξ = (s⁺+s⁻)/2 - K/λ`.
    Sos { ell: EllipticParams, s_plus: Complex64, s_minus: Complex64, window: i64 },
    /// Symmetric SOS operator on the same chain.
    SymSos { ell: EllipticParams, s_plus: Complex64, s_minus: Complex64, window: i64 },
    /// Elliptic A-type (Andrews-Baxter-Forrester brackets).
    EllipticA { theta: ThetaParams, shift: f64, restricted: bool },
    /// Trigonometric A-type with `⟨z⟩ = sin(πz/(2L-2))`.
    TrigA { level: i64, shift: f64, restricted: bool },
}

impl ModelParams {
    /// The chain offset forced by the vertex-face intertwiner.
    pub fn sos_xi(ell: &EllipticParams, s_plus: Complex64, s_minus: Complex64) -> Complex64 {
        (s_plus + s_minus) / 2.0 - ell.k_scale / ell.lambda
    }
}

pub fn build(params: &ModelParams) -> Result<SpectralOperator, ModelError> {
    match params {
        ModelParams::EightVertex { ell } => build_r8v(ell),
        ModelParams::Sos { ell, s_plus, s_minus, window } => {
            build_rsos(ell, *s_plus, *s_minus, *window)
        }
        ModelParams::SymSos { ell, s_plus, s_minus, window } => {
            build_rsym_sos(ell, *s_plus, *s_minus, *window)
        }
        ModelParams::EllipticA { theta, shift, restricted } => {
            build_elliptic_a(theta, *shift, *restricted)
        }
        ModelParams::TrigA { level, shift, restricted } => build_trig_a(*level, *shift, *restricted),
    }
}

// ---------------------------------------------------------------------------
// Eight-vertex
// ---------------------------------------------------------------------------

/// Zero-field eight-vertex weights as triple theta products:
///
/// ```text
/// a = Θ(λ)Θ(λz)H(λ(z+1))    b = Θ(λ)H(λz)Θ(λ(z+1))
/// c = H(λ)Θ(λz)Θ(λ(z+1))    d = H(λ)H(λz)H(λ(z+1))
/// ```
///
/// normalized by `Θ(0)H(λ(z+1))Θ(λ(z+1))`. With this normalization the
/// inversion relation holds exactly by the theta addition formulas
/// (`Θ(x)²Θ(y)² - H(x)²H(y)² = Θ(x+y)Θ(x-y)Θ(0)²` and its H-version),
/// with no square-root branch anywhere, and the operator is the identity
/// at `z = 0`.
fn eight_vertex_weights(
    z: Complex64,
    ell: &EllipticParams,
) -> (Complex64, Complex64, Complex64, Complex64) {
    let l = ell.lambda;
    let one = Complex64::new(1.0, 0.0);
    let h_l = jacobi_h(l, ell);
    let th_l = jacobi_theta(l, ell);
    let h_z = jacobi_h(l * z, ell);
    let th_z = jacobi_theta(l * z, ell);
    let h_z1 = jacobi_h(l * (z + one), ell);
    let th_z1 = jacobi_theta(l * (z + one), ell);
    let th_0 = jacobi_theta(Complex64::new(0.0, 0.0), ell);
    let denom = th_0 * h_z1 * th_z1;
    (
        th_l * th_z * h_z1 / denom,
        th_l * h_z * th_z1 / denom,
        h_l * th_z * th_z1 / denom,
        h_l * h_z * h_z1 / denom,
    )
}

/// Eight-vertex operator: corners carry `a` and `d`, the middle block is
/// `[[c, b], [b, c]]`.
pub fn build_r8v(ell: &EllipticParams) -> Result<SpectralOperator, ModelError> {
    let g = Groupoid::klein_one_object();
    let mut dims = HashMap::new();
    dims.insert(g.arrow_ix("+")?, 1usize);
    dims.insert(g.arrow_ix("-")?, 1usize);
    let space = GradedSpace::new("V8v", g.clone(), dims);
    let slot = Slot::Graded(space.clone());
    let slots = vec![slot.clone(), slot];
    let ell = *ell;
    let plus = g.arrow_ix("+")?;
    let minus = g.arrow_ix("-")?;
    let eval = move |z: Complex64| -> Result<BlockOperator, ModelError> {
        let h_z1 = jacobi_h(ell.lambda * (z + 1.0), &ell);
        let th_z1 = jacobi_theta(ell.lambda * (z + 1.0), &ell);
        let scale = jacobi_theta(ell.lambda, &ell).norm();
        if (h_z1 * th_z1).norm() < POLE_GUARD * scale.max(1.0) {
            return Err(ModelError::PoleProximity { z, what: "H(λ(z+1))Θ(λ(z+1))".into() });
        }
        let (a, b, c, d) = eight_vertex_weights(z, &ell);
        let mut op = BlockOperator::zero(slots.clone(), slots.clone());
        let mut put = |i: [u32; 2], o: [u32; 2], v: Complex64| -> Result<(), ModelError> {
            op.insert(BlockKey::new(i.to_vec(), o.to_vec()), DMatrix::from_element(1, 1, v))?;
            Ok(())
        };
        put([plus, plus], [plus, plus], a)?;
        put([minus, minus], [minus, minus], a)?;
        put([plus, minus], [plus, minus], c)?;
        put([minus, plus], [minus, plus], c)?;
        put([plus, minus], [minus, plus], b)?;
        put([minus, plus], [plus, minus], b)?;
        put([plus, plus], [minus, minus], d)?;
        put([minus, minus], [plus, plus], d)?;
        Ok(op)
    };
    Ok(SpectralOperator::new("8v", space, eval))
}

// ---------------------------------------------------------------------------
// Chain models (SOS and A-type share the block layout)
// ---------------------------------------------------------------------------

struct ChainSites {
    space: Arc<GradedSpace>,
    /// per-object: (value, up-arrow, down-arrow)
    sites: Vec<(Complex64, Option<u32>, Option<u32>)>,
}

fn chain_sites(groupoid: Arc<Groupoid>) -> ChainSites {
    let space = GradedSpace::one_dim_on_generators("Vchain", groupoid.clone());
    let mut sites = Vec::new();
    for o in 0..groupoid.object_count() as u32 {
        let value = groupoid.object_value(o).expect("chain objects carry values");
        let fiber = groupoid.source_fiber(o);
        let up = fiber
            .iter()
            .copied()
            .find(|&a| !groupoid.is_identity(a) && groupoid.arrow(a).id.starts_with('+'));
        let down = fiber
            .iter()
            .copied()
            .find(|&a| !groupoid.is_identity(a) && groupoid.arrow(a).id.starts_with('-'));
        sites.push((value, up, down));
    }
    ChainSites { space, sites }
}

/// Inner weights of one chain plaquette family at base value `a`:
/// `(stay_up, stay_down, cross_up, cross_down)` for the blocks
/// `(+,-)→(+,-)`, `(-,+)→(-,+)`, `(-,+)→(+,-)`, `(+,-)→(-,+)`.
/// The pure `(+,+)` and `(-,-)` blocks have unit weight.
type ChainWeights = dyn Fn(Complex64, Complex64) -> Result<(Complex64, Complex64, Complex64, Complex64), ModelError>
    + Send
    + Sync;

fn build_chain_operator(
    name: &str,
    groupoid: Arc<Groupoid>,
    weights: Arc<ChainWeights>,
) -> SpectralOperator {
    let model = chain_sites(groupoid);
    let space = model.space.clone();
    let slot = Slot::Graded(space.clone());
    let slots = vec![slot.clone(), slot];
    let sites = model.sites;
    let eval = move |z: Complex64| -> Result<BlockOperator, ModelError> {
        let mut op = BlockOperator::zero(slots.clone(), slots.clone());
        let unit = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let put = |op: &mut BlockOperator, i: Vec<u32>, o: Vec<u32>, v: Complex64| {
            op.insert(BlockKey::new(i, o), DMatrix::from_element(1, 1, v))
                .map_err(ModelError::from)
        };
        for site_ix in 0..sites.len() {
            let (a_val, up, down) = sites[site_ix];
            if let Some(u) = up {
                if let Some(u2) = sites[site_ix + 1].1 {
                    op.insert(BlockKey::new(vec![u, u2], vec![u, u2]), unit.clone())?;
                }
            }
            if let Some(d) = down {
                if let Some(d2) = sites[site_ix - 1].2 {
                    op.insert(BlockKey::new(vec![d, d2], vec![d, d2]), unit.clone())?;
                }
            }
            let up_down = up.and_then(|u| sites[site_ix + 1].2.map(|d| (u, d)));
            let down_up = down.and_then(|d| sites[site_ix - 1].1.map(|u| (d, u)));
            if up_down.is_none() && down_up.is_none() {
                continue;
            }
            let (stay_up, stay_down, cross_up, cross_down) = weights(z, a_val)?;
            if let Some((u, d)) = up_down {
                put(&mut op, vec![u, d], vec![u, d], stay_up)?;
                if let Some((d2, u2)) = down_up {
                    put(&mut op, vec![u, d], vec![d2, u2], cross_down)?;
                    put(&mut op, vec![d2, u2], vec![u, d], cross_up)?;
                }
            }
            if let Some((d, u)) = down_up {
                put(&mut op, vec![d, u], vec![d, u], stay_down)?;
            }
        }
        Ok(op)
    };
    SpectralOperator::new(name, space, eval)
}

/// SOS weights: diagonal `h(a∓z)h(1)/(h(a)h(z+1))`, crossings
/// `h(a±1)h(z)/(h(a)h(z+1))`; the symmetric variant replaces both
/// crossings by the geometric mean `√(h(a+1)h(a-1))·h(z)/(h(a)h(z+1))`.
fn sos_weights(ell: EllipticParams, symmetric: bool) -> Arc<ChainWeights> {
    Arc::new(move |z: Complex64, a: Complex64| {
        let h = |x: Complex64| weight_h(x, &ell);
        let one = Complex64::new(1.0, 0.0);
        let denom = h(a) * h(z + one);
        let scale = h(one).norm().max(h(a).norm());
        if denom.norm() < POLE_GUARD * scale.max(1.0) {
            return Err(ModelError::PoleProximity { z, what: "h(a)h(z+1)".into() });
        }
        let stay_up = h(a - z) * h(one) / denom;
        let stay_down = h(a + z) * h(one) / denom;
        let (cross_up, cross_down) = if symmetric {
            let geo = (h(a + one) * h(a - one)).sqrt() * h(z) / denom;
            (geo, geo)
        } else {
            (h(a + one) * h(z) / denom, h(a - one) * h(z) / denom)
        };
        Ok((stay_up, stay_down, cross_up, cross_down))
    })
}

pub fn build_rsos(
    ell: &EllipticParams,
    s_plus: Complex64,
    s_minus: Complex64,
    window: i64,
) -> Result<SpectralOperator, ModelError> {
    let xi = ModelParams::sos_xi(ell, s_plus, s_minus);
    let g = Groupoid::action_window(xi, window)?;
    Ok(build_chain_operator("sos", g, sos_weights(*ell, false)))
}

pub fn build_rsym_sos(
    ell: &EllipticParams,
    s_plus: Complex64,
    s_minus: Complex64,
    window: i64,
) -> Result<SpectralOperator, ModelError> {
    let xi = ModelParams::sos_xi(ell, s_plus, s_minus);
    let g = Groupoid::action_window(xi, window)?;
    Ok(build_chain_operator("sym-sos", g, sos_weights(*ell, true)))
}

// ---------------------------------------------------------------------------
// A-type family (brackets)
// ---------------------------------------------------------------------------

/// A-type weights: stays `[a±z][1]/([a][1-z])`, both crossings
/// `√([a-1][a+1])·[z]/([a][1-z])` (principal square root).
fn abf_weights(
    br: Arc<dyn Fn(Complex64) -> Result<Complex64, ModelError> + Send + Sync>,
) -> Arc<ChainWeights> {
    Arc::new(move |z: Complex64, a: Complex64| {
        let one = Complex64::new(1.0, 0.0);
        let b_a = br(a)?;
        let b_1mz = br(one - z)?;
        let denom = b_a * b_1mz;
        let scale = br(one)?.norm().max(b_a.norm());
        if denom.norm() < POLE_GUARD * scale.max(1.0) {
            return Err(ModelError::PoleProximity { z, what: "[a][1-z]".into() });
        }
        let stay_up = br(a + z)? * br(one)? / denom;
        let stay_down = br(a - z)? * br(one)? / denom;
        let cross = (br(a - one)? * br(a + one)?).sqrt() * br(z)? / denom;
        Ok((stay_up, stay_down, cross, cross))
    })
}

fn a_type_groupoid(level: i64, shift: f64, restricted: bool) -> Arc<Groupoid> {
    let hi = 2 * level - 3;
    let b = if restricted { 0.0 } else { shift };
    Groupoid::chain(
        if restricted { "A-restricted" } else { "A-unrestricted" },
        1,
        hi,
        Complex64::new(b, 0.0),
    )
}

pub fn build_elliptic_a(
    theta: &ThetaParams,
    shift: f64,
    restricted: bool,
) -> Result<SpectralOperator, ModelError> {
    let g = a_type_groupoid(theta.level, shift, restricted);
    let tp = *theta;
    let br = Arc::new(move |x: Complex64| -> Result<Complex64, ModelError> { Ok(bracket(x, &tp)?) });
    let name = if restricted { "ell-a-restricted" } else { "ell-a" };
    Ok(build_chain_operator(name, g, abf_weights(br)))
}

pub fn build_trig_a(
    level: i64,
    shift: f64,
    restricted: bool,
) -> Result<SpectralOperator, ModelError> {
    let g = a_type_groupoid(level, shift, restricted);
    let scale = 2 * level - 2;
    let br =
        Arc::new(move |x: Complex64| -> Result<Complex64, ModelError> { Ok(trig_bracket(x, scale)?) });
    let name = if restricted { "trig-a-restricted" } else { "trig-a" };
    Ok(build_chain_operator(name, g, abf_weights(br)))
}

// ---------------------------------------------------------------------------
// Checkers
// ---------------------------------------------------------------------------

/// Outcome of one residual evaluation.
#[derive(Debug, Clone)]
pub struct Residual {
    pub value: f64,
    /// Worst-fiber object name, when the check is fiberwise.
    pub worst: Option<String>,
}

fn ybe_sides(
    r: &SpectralOperator,
    z: Complex64,
    w: Complex64,
) -> Result<(BlockOperator, BlockOperator), ModelError> {
    let slot = r.slot();
    let slots3 = vec![slot.clone(), slot.clone(), slot];
    let r_zw = r.evaluate(z - w)?;
    let r_z = r.evaluate(z)?;
    let r_w = r.evaluate(w)?;
    let lhs = r_zw
        .embed(1, &slots3)
        .compose(&r_z.embed(0, &slots3))?
        .compose(&r_w.embed(1, &slots3))?;
    let rhs = r_w
        .embed(0, &slots3)
        .compose(&r_z.embed(1, &slots3))?
        .compose(&r_zw.embed(0, &slots3))?;
    Ok((lhs, rhs))
}

/// Yang-Baxter residual
/// `‖Ř(z-w)⁽²³⁾Ř(z)⁽¹²⁾Ř(w)⁽²³⁾ - Ř(w)⁽¹²⁾Ř(z)⁽²³⁾Ř(z-w)⁽¹²⁾‖∞`
/// over the graded blocks of the triple tensor power.
pub fn check_ybe(r: &SpectralOperator, z: Complex64, w: Complex64) -> Result<Residual, ModelError> {
    let (lhs, rhs) = ybe_sides(r, z, w)?;
    Ok(Residual { value: lhs.max_diff(&rhs), worst: None })
}

/// Dynamical Yang-Baxter residual: the same graded composition compared
/// fiberwise. The base-object shift `a·h⁽¹⁾` is automatic because the
/// blocks of `id ⊗ Ř` act at the target of the first leg.
pub fn check_dybe(r: &SpectralOperator, z: Complex64, w: Complex64) -> Result<Residual, ModelError> {
    let (lhs, rhs) = ybe_sides(r, z, w)?;
    let mut worst = (0.0f64, None);
    for obj in r.objects() {
        let (Ok(fl), Ok(fr)) = (lhs.restrict_source_fiber(obj), rhs.restrict_source_fiber(obj))
        else {
            continue;
        };
        let d = (fl.mat - fr.mat).camax();
        if d > worst.0 {
            worst = (d, Some(r.space.groupoid.object_name(obj.ix).to_string()));
        }
    }
    Ok(Residual { value: worst.0, worst: worst.1 })
}

/// Inversion residual `‖Ř(z)Ř(-z) - id‖∞` on the graded blocks.
pub fn check_inversion(r: &SpectralOperator, z: Complex64) -> Result<Residual, ModelError> {
    let prod = r.evaluate(z)?.compose(&r.evaluate(-z)?)?;
    let slot = r.slot();
    let id = BlockOperator::identity(&[slot.clone(), slot]);
    Ok(Residual { value: prod.max_diff(&id), worst: None })
}

/// Transposed operator family: reverse and invert the coefficient table.
pub fn transpose_op(r: &SpectralOperator) -> SpectralOperator {
    let inner = r.clone();
    SpectralOperator::new(&format!("{}^T", r.name), r.space.clone(), move |z| {
        inner.evaluate(z)?.transpose_table().map_err(|_| ModelError::TransposeUnsupported)
    })
}

/// Exact symmetry check: the transposed coefficient table equals the
/// original table (float-identical entries).
pub fn check_symmetric(r: &SpectralOperator, z: Complex64) -> Result<bool, ModelError> {
    let op = r.evaluate(z)?;
    let t = op.transpose_table().map_err(|_| ModelError::TransposeUnsupported)?;
    Ok(t.table_eq(&op))
}

#[cfg(test)]
pub(crate) mod test_params {
    use super::*;
    use crate::c64;

    pub fn ell() -> EllipticParams {
        EllipticParams::new(c64(0.05, 0.0), 1.0, c64(0.37, 0.0)).unwrap()
    }

    pub fn s_pm() -> (Complex64, Complex64) {
        (c64(0.31, 0.0), c64(-0.12, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::test_params::{ell as test_ell, s_pm};
    use super::*;
    use crate::c64;

    #[test]
    fn identity_family_passes_everything() {
        let g = Groupoid::chain("A3", 1, 3, c64(0.0, 0.0));
        let v = GradedSpace::one_dim_on_generators("V", g);
        let id = SpectralOperator::identity_family(v);
        let z = c64(0.3, 0.05);
        let w = c64(0.7, -0.02);
        assert!(check_ybe(&id, z, w).unwrap().value < 1e-15);
        assert!(check_dybe(&id, z, w).unwrap().value < 1e-15);
        assert!(check_inversion(&id, z).unwrap().value < 1e-15);
    }

    #[test]
    fn constant_permutation_satisfies_ybe() {
        // braid relation of a transposition on the one-point groupoid
        let g = Groupoid::klein_one_object();
        let mut dims = HashMap::new();
        dims.insert(g.arrow_ix("+").unwrap(), 1usize);
        dims.insert(g.arrow_ix("-").unwrap(), 1usize);
        let v = GradedSpace::new("V", g.clone(), dims);
        let slot = Slot::Graded(v.clone());
        let slots = vec![slot.clone(), slot];
        let plus = g.arrow_ix("+").unwrap();
        let minus = g.arrow_ix("-").unwrap();
        let perm = SpectralOperator::new("perm", v, move |_z| {
            let mut op = BlockOperator::zero(slots.clone(), slots.clone());
            let one = DMatrix::from_element(1, 1, c64(1.0, 0.0));
            for (i, o) in [
                ([plus, plus], [plus, plus]),
                ([minus, minus], [minus, minus]),
                ([plus, minus], [minus, plus]),
                ([minus, plus], [plus, minus]),
            ] {
                op.insert(BlockKey::new(i.to_vec(), o.to_vec()), one.clone()).unwrap();
            }
            Ok(op)
        });
        let z = c64(0.4, 0.0);
        let w = c64(0.9, 0.0);
        assert!(check_ybe(&perm, z, w).unwrap().value < 1e-15);
        assert!(check_inversion(&perm, z).unwrap().value < 1e-15);
    }

    #[test]
    fn sos_is_identity_at_zero() {
        let (sp, sm) = s_pm();
        let r = build_rsos(&test_ell(), sp, sm, 6).unwrap();
        let op = r.evaluate(c64(0.0, 0.0)).unwrap();
        let slot = r.slot();
        let id = BlockOperator::identity(&[slot.clone(), slot]);
        assert!(op.max_diff(&id) < 1e-13, "diff {}", op.max_diff(&id));
    }

    #[test]
    fn sos_dybe_and_inversion() {
        let (sp, sm) = s_pm();
        let r = build_rsos(&test_ell(), sp, sm, 6).unwrap();
        let z = c64(0.31, 0.08);
        let w = c64(0.53, -0.11);
        let res = check_dybe(&r, z, w).unwrap();
        assert!(res.value < 1e-9, "dYBE residual {} at {:?}", res.value, res.worst);
        let inv = check_inversion(&r, z).unwrap();
        assert!(inv.value < 1e-9, "inversion residual {}", inv.value);
    }

    #[test]
    fn sym_sos_symmetric_sos_not() {
        let (sp, sm) = s_pm();
        let z = c64(0.27, 0.0);
        let rs = build_rsos(&test_ell(), sp, sm, 6).unwrap();
        let ry = build_rsym_sos(&test_ell(), sp, sm, 6).unwrap();
        assert!(!check_symmetric(&rs, z).unwrap());
        assert!(check_symmetric(&ry, z).unwrap());
    }

    #[test]
    fn elliptic_a_identity_at_zero_and_dybe() {
        let tp = ThetaParams::new(c64(0.0, 1.2), 6).unwrap();
        let r = build_elliptic_a(&tp, 0.39, false).unwrap();
        let op = r.evaluate(c64(0.0, 0.0)).unwrap();
        let slot = r.slot();
        let id = BlockOperator::identity(&[slot.clone(), slot]);
        assert!(op.max_diff(&id) < 1e-12);
        let res = check_dybe(&r, c64(0.41, 0.05), c64(0.13, -0.03)).unwrap();
        assert!(res.value < 1e-9, "dYBE residual {} at {:?}", res.value, res.worst);
    }

    #[test]
    fn trig_a_dybe_and_inversion() {
        let r = build_trig_a(7, 0.0, true).unwrap();
        let res = check_dybe(&r, c64(0.41, 0.05), c64(0.13, -0.03)).unwrap();
        assert!(res.value < 1e-9, "dYBE residual {} at {:?}", res.value, res.worst);
        let inv = check_inversion(&r, c64(0.77, 0.1)).unwrap();
        assert!(inv.value < 1e-9, "inversion residual {}", inv.value);
    }

    #[test]
    fn restricted_boundary_fiber_shrinks() {
        let tp = ThetaParams::new(c64(0.0, 1.2), 4).unwrap();
        let r = build_elliptic_a(&tp, 0.0, true).unwrap();
        let op = r.evaluate(c64(0.31, 0.0)).unwrap();
        let gid = Arc::as_ptr(&r.space.groupoid) as usize;
        let boundary = ObjRef { gid, ix: r.space.groupoid.object_ix("n01").unwrap() };
        let fiber = op.restrict_source_fiber(boundary).unwrap();
        // from object 1 the square fiber holds (+,+) and (+,-) only
        assert_eq!(fiber.paths.len(), 2);
        let interior = ObjRef { gid, ix: r.space.groupoid.object_ix("n03").unwrap() };
        assert_eq!(op.restrict_source_fiber(interior).unwrap().paths.len(), 4);
    }

    #[test]
    fn eight_vertex_identity_at_zero() {
        let r = build_r8v(&test_ell()).unwrap();
        let op = r.evaluate(c64(0.0, 0.0)).unwrap();
        let slot = r.slot();
        let id = BlockOperator::identity(&[slot.clone(), slot]);
        assert!(op.max_diff(&id) < 1e-13, "diff {}", op.max_diff(&id));
    }

    #[test]
    fn eight_vertex_inversion_ybe_symmetry() {
        let r = build_r8v(&test_ell()).unwrap();
        let z = c64(0.31, 0.04);
        let w = c64(0.67, -0.09);
        let inv = check_inversion(&r, z).unwrap();
        assert!(inv.value < 1e-9, "inversion residual {}", inv.value);
        let res = check_ybe(&r, z, w).unwrap();
        assert!(res.value < 1e-9, "YBE residual {}", res.value);
        assert!(check_symmetric(&r, z).unwrap());
    }

    #[test]
    fn elliptic_degenerates_to_trig() {
        let level = 7;
        let z = c64(0.41, 0.0);
        let mut prev: Option<f64> = None;
        for im in [8.0, 12.0] {
            let tp = ThetaParams::new(c64(0.0, im), level).unwrap();
            let re = build_elliptic_a(&tp, 0.0, true).unwrap();
            let rt = build_trig_a(level, 0.0, true).unwrap();
            let diff = re.evaluate(z).unwrap().max_diff(&rt.evaluate(z).unwrap());
            if let Some(p) = prev {
                assert!(diff < p);
            }
            if im >= 12.0 {
                assert!(diff < 1e-6, "elliptic/trig gap {diff}");
            }
            prev = Some(diff);
        }
    }
}
