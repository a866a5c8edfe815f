//! Flowgraph factorizations of DCT-II/III for lengths `q * 2^m`.
//!
//! Even lengths split into a half-length DCT-II on the butterfly sums and a
//! half-length DCT-IV on the differences. The unscaled recursion rewrites
//! that DCT-IV as `R C2 D`, so every level costs `N/2` general
//! multiplications (the `D` diagonal), `3N/2 - 1` additions and one shift
//! (the leading `1/2` of `R`). The scaled recursion uses the transposed form
//! `D C3 R^T` instead and pushes the `D` multiplications out of the plan
//! into the output scale factors.
//!
//! Recursion stops at the lengths stored in a [`BaseLibrary`]. The standard
//! library holds hand-built modules for 2 and 3 and direct inner-product
//! plans for 5 and 15.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::flowgraph::io::{PlanFile, TransformKind};
use crate::flowgraph::{
    fold_with_outputs, transpose, ExactConstant, NodeId, OpCount, PlanBuilder, PlanGraph, Sign,
};
use crate::oracle::{self, cos_pi_ratio, DenseMatrix};

/// Tolerance for accepting a base module against its oracle.
pub const BASE_TOLERANCE: f64 = 1e-10;

/// `C2 = Pi * diag(delta) * plan`: `plan` computes the scaled transform,
/// scaled output `i` is natural coefficient `pi[i]` after multiplying by
/// `delta[i]`.
#[derive(Debug, Clone)]
pub struct ScaledFactorization {
    pub plan: PlanGraph,
    pub pi: Vec<usize>,
    pub delta: Vec<f64>,
}

impl ScaledFactorization {
    pub fn new(plan: PlanGraph, pi: Vec<usize>, delta: Vec<f64>) -> Result<Self> {
        let n = plan.n_inputs();
        if !plan.is_square() {
            return Err(Error::InvalidPlan("scaled plan must be square".into()));
        }
        if pi.len() != n || delta.len() != n {
            return Err(Error::InvalidPlan(format!(
                "plan has {n} outputs but pi has {} and delta {} entries",
                pi.len(),
                delta.len()
            )));
        }
        let mut seen = vec![false; n];
        for &p in &pi {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidPlan("pi is not a permutation".into()));
            }
        }
        if let Some(d) = delta.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(Error::InvalidPlan(format!(
                "scale factor {d} is not positive"
            )));
        }
        Ok(Self { plan, pi, delta })
    }

    /// Treats an unscaled plan as a scaled one with unit factors.
    pub fn from_unscaled(plan: PlanGraph) -> Result<Self> {
        let n = plan.n_outputs();
        Self::new(plan, (0..n).collect(), vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    pub fn count_ops(&self) -> OpCount {
        self.plan.count_ops()
    }

    /// `Pi * diag(delta) * to_matrix(plan)`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let scaled = self.plan.to_matrix();
        let n = self.len();
        let mut out = DenseMatrix::zeros(n, scaled.cols());
        for (i, (&target, &d)) in self.pi.iter().zip(&self.delta).enumerate() {
            for j in 0..scaled.cols() {
                out.set(target, j, d * scaled[(i, j)]);
            }
        }
        out
    }

    /// Full DCT-II of `x` through the scaled plan.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let scaled = self.plan.evaluate(x)?;
        let mut out = vec![0.0; self.len()];
        for (i, v) in scaled.into_iter().enumerate() {
            out[self.pi[i]] = self.delta[i] * v;
        }
        Ok(out)
    }

    /// Folds constants and moves the factors left on the outputs into
    /// `delta`.
    pub fn fold(&self) -> ScaledFactorization {
        let outcome = fold_with_outputs(&self.plan);
        let delta = self
            .delta
            .iter()
            .zip(&outcome.output_factors)
            .map(|(d, f)| d * f.value())
            .collect();
        ScaledFactorization {
            plan: outcome.plan,
            pi: self.pi.clone(),
            delta,
        }
    }

    /// A plan computing the full transform: the scaled plan followed by the
    /// `delta` multiplications and the `pi` reordering.
    pub fn to_unscaled_plan(&self) -> Result<PlanGraph> {
        let n = self.len();
        let mut b = PlanBuilder::new(n, n);
        let inputs = b.inputs();
        let outs = b.embed(&self.plan, &inputs);
        for ((&y, &d), &target) in outs.iter().zip(&self.delta).zip(&self.pi) {
            let scaled = b.scale_by(y, d);
            b.output(target, scaled);
        }
        b.finish()
    }
}

/// Unscaled and scaled modules for one base length.
#[derive(Debug, Clone)]
pub struct BaseEntry {
    pub plan: PlanGraph,
    pub scaled: ScaledFactorization,
}

/// Base-length modules where the recursion stops. Every stored module
/// matches its oracle.
#[derive(Debug, Clone)]
pub struct BaseLibrary {
    entries: BTreeMap<usize, BaseEntry>,
}

static STANDARD: OnceLock<BaseLibrary> = OnceLock::new();

/// The standard library, built once.
pub fn standard_library() -> &'static BaseLibrary {
    STANDARD.get_or_init(BaseLibrary::standard)
}

impl BaseLibrary {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// Modules for 1, 2, 3, 5 and 15.
    pub fn standard() -> Self {
        let mut lib = Self::empty();
        let identity = PlanGraph::identity(1).expect("identity plan");
        let scaled_identity =
            ScaledFactorization::from_unscaled(identity.clone()).expect("identity");
        let entries = [
            (1, identity, scaled_identity),
            (2, base_plan_2(), base_scaled_2().fold()),
            (3, base_plan_3(), base_scaled_3().fold()),
            (
                5,
                dense_plan(5),
                ScaledFactorization::from_unscaled(dense_plan(5)).expect("dense"),
            ),
            (
                15,
                dense_plan(15),
                ScaledFactorization::from_unscaled(dense_plan(15)).expect("dense"),
            ),
        ];
        for (n, plan, scaled) in entries {
            lib.insert(n, BaseEntry { plan, scaled })
                .expect("standard modules match their oracles");
        }
        lib
    }

    /// Adds or replaces a module after checking both plans against the
    /// DCT-II oracle.
    pub fn insert(&mut self, n: usize, entry: BaseEntry) -> Result<()> {
        let name = format!("base {n}");
        check_against(
            &name,
            &entry.plan.to_matrix(),
            &oracle::dct2_matrix(n)?,
            BASE_TOLERANCE,
        )?;
        if entry.scaled.len() != n {
            return Err(Error::InvalidPlan(format!(
                "{name}: scaled module has wrong size"
            )));
        }
        check_against(
            &format!("scaled {name}"),
            &entry.scaled.reconstruct(),
            &oracle::dct2_matrix(n)?,
            BASE_TOLERANCE,
        )?;
        self.entries.insert(n, entry);
        Ok(())
    }

    /// Loads a hand-constructed module from a plan file labelled `dct2` or
    /// `scaled-dct2`. A module missing its counterpart gets one derived from
    /// the loaded plan. Returns the module length.
    pub fn load_file(&mut self, path: &Path) -> Result<usize> {
        let file = PlanFile::read(path)?;
        let plan = file.to_plan()?;
        let n = plan.n_inputs();
        let name = path.display().to_string();
        let entry = match file.transform {
            Some(TransformKind::Dct2) => {
                check_against(
                    &name,
                    &plan.to_matrix(),
                    &oracle::dct2_matrix(n)?,
                    BASE_TOLERANCE,
                )?;
                let scaled = match self.entries.get(&n) {
                    Some(e) => e.scaled.clone(),
                    None => ScaledFactorization::from_unscaled(plan.clone())?,
                };
                BaseEntry { plan, scaled }
            }
            Some(TransformKind::ScaledDct2) => {
                let (pi, delta) = match (file.pi, file.delta) {
                    (Some(pi), Some(delta)) => (pi, delta),
                    _ => {
                        return Err(Error::InvalidPlan(format!(
                            "{name}: scaled plan needs pi and delta"
                        )))
                    }
                };
                let scaled = ScaledFactorization::new(plan, pi, delta)?;
                check_against(
                    &name,
                    &scaled.reconstruct(),
                    &oracle::dct2_matrix(n)?,
                    BASE_TOLERANCE,
                )?;
                let plan = match self.entries.get(&n) {
                    Some(e) => e.plan.clone(),
                    None => scaled.to_unscaled_plan()?,
                };
                BaseEntry { plan, scaled }
            }
            other => {
                return Err(Error::InvalidPlan(format!(
                    "{name}: base modules must be dct2 or scaled-dct2, got {other:?}"
                )))
            }
        };
        self.insert(n, entry)?;
        Ok(n)
    }

    pub fn get(&self, n: usize) -> Option<&BaseEntry> {
        self.entries.get(&n)
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.entries.keys().copied().collect()
    }

    /// Odd stored lengths; the library supports `q * 2^m` for these `q`.
    pub fn odd_bases(&self) -> Vec<usize> {
        self.entries
            .keys()
            .copied()
            .filter(|q| q % 2 == 1)
            .collect()
    }

    /// Splits `n` into the stored base length and the number of recursion
    /// levels above it.
    pub fn decompose(&self, n: usize) -> Result<(usize, u32)> {
        if n == 0 {
            return Err(Error::ZeroLength);
        }
        let mut len = n;
        let mut levels = 0;
        loop {
            if self.entries.contains_key(&len) {
                return Ok((len, levels));
            }
            if len % 2 == 1 {
                return Err(Error::UnsupportedLength {
                    n,
                    supported: self.odd_bases(),
                });
            }
            len /= 2;
            levels += 1;
        }
    }

    pub fn supports(&self, n: usize) -> bool {
        self.decompose(n).is_ok()
    }

    /// DCT-II by the unscaled recursion. Base lengths return the stored
    /// module.
    pub fn kok_plan(&self, n: usize) -> Result<PlanGraph> {
        self.decompose(n)?;
        let mut b = PlanBuilder::new(n, n);
        let inputs = b.inputs();
        let outs = self.build_dct2(&mut b, &inputs);
        for (k, y) in outs.into_iter().enumerate() {
            b.output(k, y);
        }
        b.finish()
    }

    /// Scaled DCT-II by the transposed recursion, before any folding.
    pub fn scaled_plan(&self, n: usize) -> Result<ScaledFactorization> {
        self.decompose(n)?;
        let mut b = PlanBuilder::new(n, n);
        let inputs = b.inputs();
        let (outs, pi, delta) = self.build_scaled(&mut b, &inputs)?;
        for (i, y) in outs.into_iter().enumerate() {
            b.output(i, y);
        }
        ScaledFactorization::new(b.finish()?, pi, delta)
    }

    /// DCT-III as the transpose of the unscaled DCT-II plan.
    pub fn dct3_plan(&self, n: usize) -> Result<PlanGraph> {
        Ok(transpose(&self.kok_plan(n)?))
    }

    /// DCT-III from the scaled factorization: reorder by `pi^T`, scale by
    /// `delta`, then run the transposed scaled plan.
    pub fn dct3_plan_via_scaled(&self, n: usize) -> Result<PlanGraph> {
        let scaled = self.scaled_plan(n)?;
        let tail = transpose(&scaled.plan);
        let mut b = PlanBuilder::new(n, n);
        let staged: Vec<NodeId> = (0..n)
            .map(|i| {
                let x = b.input(scaled.pi[i]);
                b.scale_by(x, scaled.delta[i])
            })
            .collect();
        let outs = b.embed(&tail, &staged);
        for (k, y) in outs.into_iter().enumerate() {
            b.output(k, y);
        }
        b.finish()
    }

    /// DCT-IV as `R C2 D`.
    pub fn dct4_plan(&self, n: usize) -> Result<PlanGraph> {
        self.decompose(n)?;
        let mut b = PlanBuilder::new(n, n);
        let scaled: Vec<NodeId> = oracle::d_entries(n)?
            .into_iter()
            .enumerate()
            .map(|(i, d)| b.scale_by(i, d))
            .collect();
        let z = self.build_dct2(&mut b, &scaled);
        let r = recursive_subtract(&mut b, &z);
        for (k, y) in r.into_iter().enumerate() {
            b.output(k, y);
        }
        b.finish()
    }

    fn build_dct2(&self, b: &mut PlanBuilder, x: &[NodeId]) -> Vec<NodeId> {
        let n = x.len();
        if let Some(base) = self.entries.get(&n) {
            return b.embed(&base.plan, x);
        }
        let h = n / 2;
        let (sums, diffs) = butterfly(b, x);
        let upper = self.build_dct2(b, &sums);
        let d = oracle::d_entries(h).expect("half length is positive");
        let scaled: Vec<NodeId> = diffs
            .iter()
            .zip(d)
            .map(|(&w, d)| b.scale_by(w, d))
            .collect();
        let z = self.build_dct2(b, &scaled);
        let lower = recursive_subtract(b, &z);
        interleave(&upper, &lower)
    }

    #[allow(clippy::type_complexity)]
    fn build_scaled(
        &self,
        b: &mut PlanBuilder,
        x: &[NodeId],
    ) -> Result<(Vec<NodeId>, Vec<usize>, Vec<f64>)> {
        let n = x.len();
        if let Some(base) = self.entries.get(&n) {
            let outs = b.embed(&base.scaled.plan, x);
            return Ok((outs, base.scaled.pi.clone(), base.scaled.delta.clone()));
        }
        let h = n / 2;
        let (sums, diffs) = butterfly(b, x);
        let (mut outs, upper_pi, mut delta) = self.build_scaled(b, &sums)?;
        let staged = transposed_subtract(b, &diffs);
        let dct3 = self.dct3_plan(h)?;
        outs.extend(b.embed(&dct3, &staged));
        let mut pi: Vec<usize> = upper_pi.into_iter().map(|p| 2 * p).collect();
        pi.extend((0..h).map(|j| 2 * j + 1));
        delta.extend(oracle::d_entries(h)?);
        Ok((outs, pi, delta))
    }
}

/// Butterfly sums `x_i + x_{N-1-i}` and the order-reversed differences
/// `x_i - x_{N-1-i}`.
fn butterfly(b: &mut PlanBuilder, x: &[NodeId]) -> (Vec<NodeId>, Vec<NodeId>) {
    let n = x.len();
    let h = n / 2;
    let sums = (0..h).map(|i| b.add(x[i], x[n - 1 - i])).collect();
    let diffs = (0..h).map(|i| b.sub(x[i], x[n - 1 - i])).collect();
    (sums, diffs)
}

/// `R z`: `r_0 = z_0 / 2`, `r_k = z_k - r_{k-1}`.
fn recursive_subtract(b: &mut PlanBuilder, z: &[NodeId]) -> Vec<NodeId> {
    let mut r = Vec::with_capacity(z.len());
    r.push(b.scale(z[0], ExactConstant::HALF));
    for k in 1..z.len() {
        let prev = r[k - 1];
        r.push(b.sub(z[k], prev));
    }
    r
}

/// `R^T w`: `y_{M-1} = w_{M-1}`, `y_j = w_j - y_{j+1}`, and
/// `y_0 = (w_0 - y_1) / 2`.
fn transposed_subtract(b: &mut PlanBuilder, w: &[NodeId]) -> Vec<NodeId> {
    let m = w.len();
    let mut y = w.to_vec();
    for j in (0..m.saturating_sub(1)).rev() {
        y[j] = b.sub(w[j], y[j + 1]);
    }
    y[0] = b.scale(y[0], ExactConstant::HALF);
    y
}

fn interleave(even: &[NodeId], odd: &[NodeId]) -> Vec<NodeId> {
    even.iter().zip(odd).flat_map(|(&e, &o)| [e, o]).collect()
}

/// Max entrywise error of `actual` against `expected`, or an
/// [`Error::OracleMismatch`] naming `name`.
pub fn check_against(
    name: &str,
    actual: &DenseMatrix,
    expected: &DenseMatrix,
    tolerance: f64,
) -> Result<f64> {
    if (actual.rows(), actual.cols()) != (expected.rows(), expected.cols()) {
        return Err(Error::InvalidPlan(format!(
            "{name}: shape {}x{} does not match {}x{}",
            actual.rows(),
            actual.cols(),
            expected.rows(),
            expected.cols()
        )));
    }
    let error = actual.max_abs_diff(expected);
    if error < tolerance {
        Ok(error)
    } else {
        Err(Error::OracleMismatch {
            name: name.to_string(),
            error,
            tolerance,
        })
    }
}

/// Checks a plan file against the oracle for its labelled transform and
/// returns the max error.
pub fn check_plan_file(file: &PlanFile, name: &str, tolerance: f64) -> Result<f64> {
    let plan = file.to_plan()?;
    let n = plan.n_inputs();
    if !plan.is_square() {
        return Err(Error::InvalidPlan(format!(
            "{name}: transform plans are square"
        )));
    }
    match file.transform {
        Some(TransformKind::Dct2) => {
            check_against(name, &plan.to_matrix(), &oracle::dct2_matrix(n)?, tolerance)
        }
        Some(TransformKind::Dct3) => {
            check_against(name, &plan.to_matrix(), &oracle::dct3_matrix(n)?, tolerance)
        }
        Some(TransformKind::Dct4) => {
            check_against(name, &plan.to_matrix(), &oracle::dct4_matrix(n)?, tolerance)
        }
        Some(TransformKind::ScaledDct2) => {
            let (Some(pi), Some(delta)) = (file.pi.clone(), file.delta.clone()) else {
                return Err(Error::InvalidPlan(format!(
                    "{name}: scaled plan needs pi and delta"
                )));
            };
            let scaled = ScaledFactorization::new(plan, pi, delta)?;
            check_against(
                name,
                &scaled.reconstruct(),
                &oracle::dct2_matrix(n)?,
                tolerance,
            )
        }
        None => Err(Error::InvalidPlan(format!("{name}: no transform label"))),
    }
}

/// 2-point DCT-II: one sum, one difference, one multiplication by
/// `cos(pi/4)`.
pub fn base_plan_2() -> PlanGraph {
    let mut b = PlanBuilder::new(2, 2);
    let s = b.add(0, 1);
    let d = b.sub(0, 1);
    let y1 = b.scale_by(d, FRAC_1_SQRT_2);
    b.output(0, s);
    b.output(1, y1);
    b.finish().expect("2-point plan")
}

/// 2-point scaled DCT-II `[[sqrt2, sqrt2], [1, -1]]` with factors
/// `1/sqrt2`. The `sqrt2` sits on the DC output where folding moves it into
/// the scale factors.
pub fn base_scaled_2() -> ScaledFactorization {
    let mut b = PlanBuilder::new(2, 2);
    let s = b.add(0, 1);
    let y0 = b.scale_by(s, SQRT_2);
    let d = b.sub(0, 1);
    b.output(0, y0);
    b.output(1, d);
    let plan = b.finish().expect("2-point scaled plan");
    ScaledFactorization::new(plan, vec![0, 1], vec![FRAC_1_SQRT_2; 2]).expect("valid factors")
}

/// 3-point DCT-II with one multiplication by `cos(pi/6)` and one halving.
pub fn base_plan_3() -> PlanGraph {
    let mut b = PlanBuilder::new(3, 3);
    let s = b.add(0, 2);
    let d = b.sub(0, 2);
    let y0 = b.add(s, 1);
    let y1 = b.scale_by(d, cos_pi_ratio(1, 6));
    let half = b.scale(s, ExactConstant::HALF);
    let y2 = b.sub(half, 1);
    b.output(0, y0);
    b.output(1, y1);
    b.output(2, y2);
    b.finish().expect("3-point plan")
}

/// 3-point scaled DCT-II `[[2, 2, 2], [2c, 0, -2c], [1, -2, 1]]` with
/// `c = cos(pi/6)` and factors `1/2`, putting a factor 2 on the DC path.
pub fn base_scaled_3() -> ScaledFactorization {
    let mut b = PlanBuilder::new(3, 3);
    let s = b.add(0, 2);
    let d = b.sub(0, 2);
    let t = b.add(s, 1);
    let y0 = b.scale(t, ExactConstant::TWO);
    let y1 = b.scale_by(d, 2.0 * cos_pi_ratio(1, 6));
    let x1 = b.scale(1, ExactConstant::TWO);
    let y2 = b.add_signed(s, x1, Sign::Minus);
    b.output(0, y0);
    b.output(1, y1);
    b.output(2, y2);
    let plan = b.finish().expect("3-point scaled plan");
    ScaledFactorization::new(plan, vec![0, 1, 2], vec![0.5; 3]).expect("valid factors")
}

/// Direct inner products against the DCT-II matrix for odd `q`. Zero
/// entries are skipped; `±1` entries cost nothing and dyadic entries are
/// shifts.
pub fn dense_base_plan(q: usize) -> Result<PlanGraph> {
    if q == 0 {
        return Err(Error::ZeroLength);
    }
    if q.is_multiple_of(2) {
        return Err(Error::EvenLength(q));
    }
    Ok(dense_plan(q))
}

fn dense_plan(q: usize) -> PlanGraph {
    let m = oracle::dct2_matrix(q).expect("positive length");
    let mut b = PlanBuilder::new(q, q);
    for k in 0..q {
        let mut acc: Option<NodeId> = None;
        for (n, &v) in m.row(k).iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let c = ExactConstant::new(v).expect("nonzero entry");
            acc = Some(match acc {
                None if c.is_one() => n,
                None => b.scale(n, c),
                Some(a) => {
                    let mag = c.abs();
                    let term = if mag.is_one() { n } else { b.scale(n, mag) };
                    let sign = if c.is_negative() {
                        Sign::Minus
                    } else {
                        Sign::Plus
                    };
                    b.add_signed(a, term, sign)
                }
            });
        }
        b.output(k, acc.expect("DCT rows are nonzero"));
    }
    b.finish().expect("dense plan")
}

/// Convenience wrappers over [`standard_library`].
pub fn kok_plan(n: usize) -> Result<PlanGraph> {
    standard_library().kok_plan(n)
}

pub fn scaled_plan(n: usize) -> Result<ScaledFactorization> {
    standard_library().scaled_plan(n)
}

pub fn dct3_plan(n: usize) -> Result<PlanGraph> {
    standard_library().dct3_plan(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowgraph::fold;

    fn err(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        a.max_abs_diff(b)
    }

    #[test]
    fn two_point_modules() {
        let p = base_plan_2();
        assert_eq!(p.count_ops(), OpCount::new(1, 2, 0));
        assert_eq!(p.evaluate(&[1.0, 1.0]).unwrap(), vec![2.0, 0.0]);
        let s = base_scaled_2();
        assert!(err(&s.reconstruct(), &oracle::dct2_matrix(2).unwrap()) < 1e-12);
        assert_eq!(s.fold().count_ops(), OpCount::new(0, 2, 0));
        assert!(err(&s.fold().reconstruct(), &oracle::dct2_matrix(2).unwrap()) < 1e-12);
    }

    #[test]
    fn three_point_modules() {
        let p = base_plan_3();
        assert_eq!(p.count_ops(), OpCount::new(1, 4, 1));
        let y = p.evaluate(&[1.0, 0.0, 0.0]).unwrap();
        let want = [1.0, cos_pi_ratio(1, 6), 0.5];
        for (a, b) in y.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let s = base_scaled_3();
        assert!(err(&s.reconstruct(), &oracle::dct2_matrix(3).unwrap()) < 1e-12);
        let f = s.fold();
        assert_eq!(f.count_ops(), OpCount::new(0, 4, 1));
        assert!(err(&f.reconstruct(), &oracle::dct2_matrix(3).unwrap()) < 1e-12);
    }

    #[test]
    fn dense_modules() {
        assert!(matches!(dense_base_plan(4), Err(Error::EvenLength(4))));
        assert!(matches!(dense_base_plan(0), Err(Error::ZeroLength)));
        let one = dense_base_plan(1).unwrap();
        assert_eq!(one.to_matrix(), DenseMatrix::identity(1));
        let five = dense_base_plan(5).unwrap();
        assert!(err(&five.to_matrix(), &oracle::dct2_matrix(5).unwrap()) < 1e-12);
        // entries outside {0, ±1, ±2^k}, counted by scanning the matrix
        let m = oracle::dct2_matrix(5).unwrap();
        let general = m
            .entries()
            .iter()
            .filter(|v| {
                **v != 0.0 && {
                    let l = v.abs().log2();
                    (l - l.round()).abs() > 1e-12
                }
            })
            .count();
        assert_eq!(general, 16);
        assert_eq!(five.count_ops().mu, 16);
    }

    #[test]
    fn decomposition() {
        let lib = standard_library();
        assert_eq!(lib.decompose(1).unwrap(), (1, 0));
        assert_eq!(lib.decompose(8).unwrap(), (2, 2));
        assert_eq!(lib.decompose(48).unwrap(), (3, 4));
        assert_eq!(lib.decompose(240).unwrap(), (15, 4));
        assert!(matches!(lib.decompose(0), Err(Error::ZeroLength)));
        assert!(matches!(
            lib.decompose(14),
            Err(Error::UnsupportedLength { n: 14, .. })
        ));
        assert_eq!(lib.odd_bases(), vec![1, 3, 5, 15]);
    }

    #[test]
    fn unscaled_small() {
        let p = kok_plan(2).unwrap();
        assert!(err(&p.to_matrix(), &oracle::dct2_matrix(2).unwrap()) < 1e-12);
        let p4 = kok_plan(4).unwrap();
        assert!(err(&p4.to_matrix(), &oracle::dct2_matrix(4).unwrap()) < 1e-12);
        let p6 = kok_plan(6).unwrap();
        assert_eq!(p6.count_ops(), OpCount::new(5, 16, 3));
        let col0 = p6.evaluate(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let want = oracle::dct2_matrix(6).unwrap().column(0);
        assert!(col0.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-12));
        assert_eq!(kok_plan(8).unwrap().count_ops().mu, 12);
        let p12 = kok_plan(12).unwrap();
        assert!(err(&p12.to_matrix(), &oracle::dct2_matrix(12).unwrap()) < 1e-10);
    }

    #[test]
    fn scaled_small() {
        let s8 = scaled_plan(8).unwrap();
        assert!(err(&s8.reconstruct(), &oracle::dct2_matrix(8).unwrap()) < 1e-12);
        let f8 = s8.fold();
        assert_eq!(f8.count_ops(), OpCount::new(5, 29, 0));
        assert!(err(&f8.reconstruct(), &oracle::dct2_matrix(8).unwrap()) < 1e-12);
        let f6 = scaled_plan(6).unwrap().fold();
        assert_eq!(f6.count_ops(), OpCount::new(1, 16, 2));
        assert!(err(&f6.reconstruct(), &oracle::dct2_matrix(6).unwrap()) < 1e-12);
    }

    #[test]
    fn scaled_plan_matrix_is_scaled_dct() {
        // to_matrix(plan) = diag(delta)^-1 Pi^-1 C2
        let s = scaled_plan(8).unwrap();
        let c = oracle::dct2_matrix(8).unwrap();
        let m = s.plan.to_matrix();
        for i in 0..8 {
            for j in 0..8 {
                assert!((m[(i, j)] - c[(s.pi[i], j)] / s.delta[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn delta_collects_half_length_diagonals() {
        let lib = standard_library();
        let s = lib.scaled_plan(24).unwrap();
        let mut want = lib.get(3).unwrap().scaled.delta.clone();
        for h in [3, 6, 12] {
            want.extend(oracle::d_entries(h).unwrap());
        }
        let (mut got, mut want) = (s.delta.clone(), want);
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        assert_eq!(got, want);
    }

    #[test]
    fn dct3_variants() {
        let p2 = dct3_plan(2).unwrap();
        assert!(err(&p2.to_matrix(), &base_plan_2().to_matrix().transpose()) < 1e-15);
        let p4 = dct3_plan(4).unwrap();
        assert!(err(&p4.to_matrix(), &oracle::dct3_matrix(4).unwrap()) < 1e-12);
        assert_eq!(p4.count_ops(), kok_plan(4).unwrap().count_ops());
        let alt = standard_library().dct3_plan_via_scaled(12).unwrap();
        assert!(err(&alt.to_matrix(), &dct3_plan(12).unwrap().to_matrix()) < 1e-10);
    }

    #[test]
    fn dct4_plan_matches() {
        for n in [1, 2, 3, 4, 6, 8, 10] {
            let p = standard_library().dct4_plan(n).unwrap();
            assert!(
                err(&p.to_matrix(), &oracle::dct4_matrix(n).unwrap()) < 1e-12,
                "n = {n}"
            );
        }
    }

    #[test]
    fn folding_unscaled_never_hurts() {
        for n in [4, 6, 8, 12, 16] {
            let p = kok_plan(n).unwrap();
            let f = fold(&p);
            assert!(f.count_ops().dominated_by(&p.count_ops()));
            assert!(err(&f.to_matrix(), &p.to_matrix()) < 1e-12);
        }
    }

    #[test]
    fn library_rejects_wrong_module() {
        let mut lib = BaseLibrary::empty();
        let wrong = base_plan_2();
        let entry = BaseEntry {
            plan: wrong.clone(),
            scaled: ScaledFactorization::from_unscaled(wrong).unwrap(),
        };
        assert!(lib.insert(3, entry).is_err());
    }

    #[test]
    fn scaled_factorization_validation() {
        let p = PlanGraph::identity(2).unwrap();
        assert!(ScaledFactorization::new(p.clone(), vec![0, 0], vec![1.0, 1.0]).is_err());
        assert!(ScaledFactorization::new(p.clone(), vec![0, 1], vec![1.0, -1.0]).is_err());
        assert!(ScaledFactorization::new(p, vec![0], vec![1.0]).is_err());
    }
}
