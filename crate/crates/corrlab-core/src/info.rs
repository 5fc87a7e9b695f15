//! Shannon entropy, mutual information, KL divergence, total correlation
//! (TC) and dual total correlation (DTC), their conditional versions, and
//! the identities relating them.
//!
//! All quantities are computed in nats on dense tables with compensated
//! summation, using the conventions `0 log 0 = 0` and `0 log(0/0) = 0`;
//! a positive mass against a zero reference yields `f64::INFINITY`.
//!
//! Wherever a quantity has more than one closed form (definition, chain
//! form, divergence form), every form is evaluated and the results are
//! asserted to agree within [`CROSS_CHECK_TOL`].  The redundancy is
//! deliberate: the identities are exactly what this crate exists to
//! check, so every call re-verifies them.

use crate::numeric::NeumaierSum;
use crate::space::{JointDist, Mixture};
use crate::{CoordSet, Error, Result};

/// Tolerance for agreement between independent formulas of one measure.
pub const CROSS_CHECK_TOL: f64 = 1e-9;

/// Logarithm base for presentation.  Internally everything is in nats;
/// conversion is an exact division by `ln(base)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    /// Natural logarithm (nats).
    #[default]
    E,
    /// Base 2 (bits).
    Two,
    /// Base 10 (bans).
    Ten,
}

impl LogBase {
    /// `ln(base)`: divide a nat value by this to convert.
    pub fn ln_base(self) -> f64 {
        match self {
            LogBase::E => 1.0,
            LogBase::Two => std::f64::consts::LN_2,
            LogBase::Ten => std::f64::consts::LN_10,
        }
    }

    pub fn convert(self, nats: f64) -> f64 {
        nats / self.ln_base()
    }
}

/// `-sum p ln p` over a table, with `0 ln 0 = 0`.
pub(crate) fn entropy_of_table(pmf: &[f64]) -> f64 {
    let mut acc = NeumaierSum::new();
    for &p in pmf {
        if p > 0.0 {
            acc.add(-p * p.ln());
        }
    }
    acc.value()
}

/// `sum p ln(p/q)` over two tables; `INFINITY` where `p > 0, q = 0`.
pub(crate) fn kl_of_tables(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let mut acc = NeumaierSum::new();
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return f64::INFINITY;
            }
            acc.add(pi * (pi / qi).ln());
        }
    }
    acc.value()
}

/// Dense marginal table over a coordinate subset (row-major in ascending
/// coordinate order).  The empty subset gives the one-cell table `[1.0]`.
pub(crate) fn subset_table(dist: &JointDist, subset: CoordSet) -> Vec<f64> {
    if subset.is_empty() {
        return vec![1.0];
    }
    let cells: usize = subset.iter().map(|i| dist.space().size(i)).product();
    let mut table = vec![0.0; cells];
    dist.space().for_each_cell_subindex(subset, |idx, sub| {
        table[sub] += dist.pmf()[idx];
    });
    table
}

/// Entropy of the marginal on `subset`; `H(X_emptyset) = 0`.
pub fn subset_entropy(dist: &JointDist, subset: CoordSet) -> f64 {
    if subset.is_empty() {
        0.0
    } else {
        entropy_of_table(&subset_table(dist, subset))
    }
}

/// Entropies of every coordinate subset, indexed by bitmask.
pub(crate) fn all_subset_entropies(dist: &JointDist) -> Vec<f64> {
    let n = dist.n();
    (0u32..1 << n)
        .map(|bits| subset_entropy(dist, CoordSet::from_bits(bits)))
        .collect()
}

/// Shannon entropy `H(mu)` in nats.
pub fn entropy(dist: &JointDist) -> f64 {
    entropy_of_table(dist.pmf())
}

/// Conditional entropy `H(X_A | X_B) = H(X_{A u B}) - H(X_B)`.
/// `B` may be empty, giving the unconditional entropy of the marginal.
pub fn cond_entropy(dist: &JointDist, a: CoordSet, b: CoordSet) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptySubset);
    }
    if !a.is_disjoint(b) {
        return Err(Error::OverlappingSubsets);
    }
    check_range(dist, a.union(b))?;
    Ok(subset_entropy(dist, a.union(b)) - subset_entropy(dist, b))
}

fn check_range(dist: &JointDist, s: CoordSet) -> Result<()> {
    if s.is_subset_of(CoordSet::full(dist.n())) {
        Ok(())
    } else {
        Err(Error::BadParameter(
            "subset exceeds coordinate count".into(),
        ))
    }
}

/// Mutual information `I(X_A ; X_B)`.
///
/// Computed both as `H(A) + H(B) - H(A u B)` and as the divergence
/// `D(lambda || mu_A x mu_B)`; the two routes are asserted to agree.
pub fn mutual_info(dist: &JointDist, a: CoordSet, b: CoordSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySubset);
    }
    if !a.is_disjoint(b) {
        return Err(Error::OverlappingSubsets);
    }
    check_range(dist, a.union(b))?;
    let by_entropy =
        subset_entropy(dist, a) + subset_entropy(dist, b) - subset_entropy(dist, a.union(b));

    // Divergence route on the joint marginal of A u B.
    let joint = dist.marginal(a.union(b))?;
    let ab = a.union(b).indices();
    let local = |s: CoordSet| {
        let mut bits = 0u32;
        for (pos, &orig) in ab.iter().enumerate() {
            if s.contains(orig) {
                bits |= 1 << pos;
            }
        }
        CoordSet::from_bits(bits)
    };
    let ta = subset_table(&joint, local(a));
    let tb = subset_table(&joint, local(b));
    let mut sub_a = vec![0usize; joint.space().cells()];
    let mut sub_b = vec![0usize; joint.space().cells()];
    joint
        .space()
        .for_each_cell_subindex(local(a), |idx, sub| sub_a[idx] = sub);
    joint
        .space()
        .for_each_cell_subindex(local(b), |idx, sub| sub_b[idx] = sub);
    let product: Vec<f64> = (0..joint.space().cells())
        .map(|idx| ta[sub_a[idx]] * tb[sub_b[idx]])
        .collect();
    let by_divergence = kl_of_tables(joint.pmf(), &product);

    assert!(
        (by_entropy - by_divergence).abs() <= CROSS_CHECK_TOL,
        "mutual information routes disagree: {by_entropy} vs {by_divergence}"
    );
    Ok(by_entropy)
}

/// Conditional mutual information `I(X_A ; X_B | X_C)`, computed as
/// `H(A|C) - H(A | B u C)`.  `C` may be empty.
pub fn cond_mutual_info(dist: &JointDist, a: CoordSet, b: CoordSet, c: CoordSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySubset);
    }
    if !a.is_disjoint(b) || !a.is_disjoint(c) || !b.is_disjoint(c) {
        return Err(Error::OverlappingSubsets);
    }
    check_range(dist, a.union(b).union(c))?;
    let value = subset_entropy(dist, a.union(c)) + subset_entropy(dist, b.union(c))
        - subset_entropy(dist, c)
        - subset_entropy(dist, a.union(b).union(c));
    assert!(
        value >= -1e-10,
        "conditional mutual information {value} below numerical slack"
    );
    Ok(value)
}

/// KL divergence `D(p || q)` on a shared space; `INFINITY` when `p` has
/// mass where `q` has none.
pub fn kl_divergence(p: &JointDist, q: &JointDist) -> Result<f64> {
    if !p.same_space(q) {
        return Err(Error::SpaceMismatch);
    }
    Ok(kl_of_tables(p.pmf(), q.pmf()))
}

/// Total correlation: `sum_i H(X_i) - H(X_1..X_n)`.
///
/// Also evaluated as `D(mu || mu_1 x .. x mu_n)` and as the chain sum
/// `sum_i I(X_i ; X_{[i-1]})`; all three routes must agree.
pub fn tc(dist: &JointDist) -> f64 {
    let n = dist.n();
    let h_full = entropy(dist);
    let singles: Vec<f64> = (0..n)
        .map(|i| subset_entropy(dist, CoordSet::singleton(i)))
        .collect();
    let mut sum_singles = NeumaierSum::new();
    for &h in &singles {
        sum_singles.add(h);
    }
    let by_def = sum_singles.value() - h_full;

    let by_divergence = kl_of_tables(dist.pmf(), dist.product_of_marginals().pmf());

    // Chain form over prefixes: I(X_i ; X_{[i-1]}) = H(X_i) + H([i-1]) - H([i]).
    let mut chain = NeumaierSum::new();
    let mut prefix = CoordSet::empty();
    let mut h_prefix = 0.0;
    for i in 0..n {
        let next = prefix.insert(i);
        let h_next = subset_entropy(dist, next);
        chain.add(singles[i] + h_prefix - h_next);
        prefix = next;
        h_prefix = h_next;
    }
    let by_chain = chain.value();

    assert!(
        (by_def - by_divergence).abs() <= CROSS_CHECK_TOL
            && (by_def - by_chain).abs() <= CROSS_CHECK_TOL,
        "TC routes disagree: def {by_def}, divergence {by_divergence}, chain {by_chain}"
    );
    by_def
}

/// `sum_z mu_rest(z) D(mu_{i,z} || lambda_i)`: the average divergence of
/// the conditional distribution of coordinate `i` given the remaining
/// coordinates, against a reference measure on `K_i`.
pub(crate) fn avg_conditional_divergence(dist: &JointDist, i: usize, reference: &[f64]) -> f64 {
    let n = dist.n();
    let rest = CoordSet::singleton(i).complement(n);
    let weights = subset_table(dist, rest);
    let size_i = dist.space().size(i);
    debug_assert_eq!(reference.len(), size_i);
    let mut digit = vec![0usize; dist.space().cells()];
    dist.space()
        .for_each_cell_subindex(CoordSet::singleton(i), |idx, sub| digit[idx] = sub);
    let mut acc = NeumaierSum::new();
    let mut infinite = false;
    dist.space().for_each_cell_subindex(rest, |idx, z| {
        let p = dist.pmf()[idx];
        if p > 0.0 {
            let cond = p / weights[z];
            let q = reference[digit[idx]];
            if q <= 0.0 {
                infinite = true;
            } else {
                // weight w_z times cond * ln(cond/q) collapses to p * ln(cond/q)
                acc.add(p * (cond / q).ln());
            }
        }
    });
    if infinite {
        f64::INFINITY
    } else {
        acc.value()
    }
}

/// Dual total correlation: `H(X_1..X_n) - sum_i H(X_i | X_{[n] - i})`.
///
/// Also evaluated through the divergence form against the marginals as
/// references, and through the conditional chain sum; all routes must
/// agree.
pub fn dtc(dist: &JointDist) -> f64 {
    let n = dist.n();
    let h_full = entropy(dist);
    let rests: Vec<f64> = (0..n)
        .map(|i| subset_entropy(dist, CoordSet::singleton(i).complement(n)))
        .collect();
    let mut cond_sum = NeumaierSum::new();
    for &h_rest in &rests {
        cond_sum.add(h_full - h_rest);
    }
    let by_def = h_full - cond_sum.value();

    // Divergence form with the marginals as reference measures:
    // sum_i avg-D(mu_{i,z} || mu_i) - D(mu || prod of marginals).
    let mut div_sum = NeumaierSum::new();
    for i in 0..n {
        div_sum.add(avg_conditional_divergence(
            dist,
            i,
            &dist.coordinate_marginal(i),
        ));
    }
    let by_divergence =
        div_sum.value() - kl_of_tables(dist.pmf(), dist.product_of_marginals().pmf());

    // Chain form: sum_i I(X_i ; X_{[n]-i} | X_{[i-1]})
    //           = sum_i [ H([i]) - H([i-1]) + H([n]-i) - H([n]) ].
    let mut chain = NeumaierSum::new();
    let mut prefix = CoordSet::empty();
    let mut h_prefix = 0.0;
    for i in 0..n {
        let next = prefix.insert(i);
        let h_next = subset_entropy(dist, next);
        chain.add(h_next - h_prefix + rests[i] - h_full);
        prefix = next;
        h_prefix = h_next;
    }
    let by_chain = chain.value();

    assert!(
        (by_def - by_divergence).abs() <= CROSS_CHECK_TOL
            && (by_def - by_chain).abs() <= CROSS_CHECK_TOL,
        "DTC routes disagree: def {by_def}, divergence {by_divergence}, chain {by_chain}"
    );
    by_def
}

/// Conditional TC given `X_S`: both the entropy formula and the
/// disintegration average are computed and must agree.  `S` empty gives
/// the unconditional value; `S` equal to all coordinates is rejected.
pub fn cond_tc(dist: &JointDist, s: CoordSet) -> Result<f64> {
    Ok(cond_tc_dtc(dist, s)?.0)
}

/// Conditional DTC given `X_S`; see [`cond_tc`].
pub fn cond_dtc(dist: &JointDist, s: CoordSet) -> Result<f64> {
    Ok(cond_tc_dtc(dist, s)?.1)
}

/// Conditional TC and DTC given `X_S` in one pass (one disintegration
/// serves both cross-checks).
pub fn cond_tc_dtc(dist: &JointDist, s: CoordSet) -> Result<(f64, f64)> {
    let n = dist.n();
    check_range(dist, s)?;
    if s.len() >= n {
        return Err(Error::FullSubset);
    }
    if s.is_empty() {
        return Ok((tc(dist), dtc(dist)));
    }

    // Entropy formulas with Y = X_S.  Coordinates inside S are determined
    // by Y, so their terms vanish: explicitly for DTC, automatically
    // (H(S u {i}) = H(S)) for TC.
    let h_s = subset_entropy(dist, s);
    let h_full = entropy(dist);
    let tc_entropy = {
        let mut acc = NeumaierSum::new();
        for i in 0..n {
            acc.add(subset_entropy(dist, s.insert(i)) - h_s);
        }
        acc.value() - (h_full - h_s)
    };
    let dtc_entropy = {
        let mut acc = NeumaierSum::new();
        for i in 0..n {
            if !s.contains(i) {
                let rest = CoordSet::singleton(i).complement(n);
                acc.add(h_full - subset_entropy(dist, rest));
            }
        }
        (h_full - h_s) - acc.value()
    };

    // Disintegration averages.
    let kernel = dist.disintegrate(s)?;
    let mut tc_acc = NeumaierSum::new();
    let mut dtc_acc = NeumaierSum::new();
    for (y, cond) in kernel.conditionals() {
        let w = kernel.base_marginal().prob(*y);
        tc_acc.add(w * tc(cond));
        dtc_acc.add(w * dtc(cond));
    }

    assert!(
        (tc_entropy - tc_acc.value()).abs() <= CROSS_CHECK_TOL,
        "conditional TC routes disagree: {tc_entropy} vs {}",
        tc_acc.value()
    );
    assert!(
        (dtc_entropy - dtc_acc.value()).abs() <= CROSS_CHECK_TOL,
        "conditional DTC routes disagree: {dtc_entropy} vs {}",
        dtc_acc.value()
    );
    Ok((tc_entropy, dtc_entropy))
}

fn validate_references(dist: &JointDist, refs: &[Vec<f64>]) -> Result<()> {
    let n = dist.n();
    if refs.len() != n {
        return Err(Error::BadShape {
            expected: n,
            got: refs.len(),
        });
    }
    for (i, r) in refs.iter().enumerate() {
        if r.len() != dist.space().size(i) {
            return Err(Error::BadShape {
                expected: dist.space().size(i),
                got: r.len(),
            });
        }
        let mut sum = NeumaierSum::new();
        for (j, &v) in r.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::NegativeMass { index: j, value: v });
            }
            sum.add(v);
        }
        if (sum.value() - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { sum: sum.value() });
        }
        let marg = dist.coordinate_marginal(i);
        if marg.iter().zip(r).any(|(&m, &q)| m > 0.0 && q <= 0.0) {
            return Err(Error::InfiniteDivergence { coordinate: i });
        }
    }
    Ok(())
}

pub(crate) fn reference_product_table(dist: &JointDist, refs: &[Vec<f64>]) -> Vec<f64> {
    let n = dist.n();
    let space = dist.space();
    let mut digit_subs: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut d = vec![0usize; space.cells()];
        space.for_each_cell_subindex(CoordSet::singleton(i), |idx, sub| d[idx] = sub);
        digit_subs.push(d);
    }
    (0..space.cells())
        .map(|idx| (0..n).map(|i| refs[i][digit_subs[i][idx]]).product())
        .collect()
}

/// TC through reference measures: `D(mu || prod lambda_i) - sum_i
/// D(mu_i || lambda_i)`.  The value is independent of the references and
/// is asserted equal to [`tc`]; Csiszar's identity is verified on the way.
pub fn tc_ref(dist: &JointDist, refs: &[Vec<f64>]) -> Result<f64> {
    validate_references(dist, refs)?;
    let d_joint = kl_of_tables(dist.pmf(), &reference_product_table(dist, refs));
    let mut d_margs = NeumaierSum::new();
    for i in 0..dist.n() {
        d_margs.add(kl_of_tables(&dist.coordinate_marginal(i), &refs[i]));
    }
    let value = d_joint - d_margs.value();

    let d_self = kl_of_tables(dist.pmf(), dist.product_of_marginals().pmf());
    assert!(
        (d_joint - (d_self + d_margs.value())).abs() <= CROSS_CHECK_TOL,
        "Csiszar identity violated: {d_joint} vs {}",
        d_self + d_margs.value()
    );
    let tc_value = tc(dist);
    assert!(
        (value - tc_value).abs() <= CROSS_CHECK_TOL,
        "reference-measure TC {value} disagrees with TC {tc_value}"
    );
    Ok(value)
}

/// DTC through reference measures: `sum_i avg-D(mu_{i,z} || lambda_i) -
/// D(mu || prod lambda_i)`.  Asserted equal to [`dtc`]; the tensorization
/// inequality (the divergence sum dominating the joint divergence) is
/// verified on the way.
pub fn dtc_ref(dist: &JointDist, refs: &[Vec<f64>]) -> Result<f64> {
    validate_references(dist, refs)?;
    let mut div_sum = NeumaierSum::new();
    for i in 0..dist.n() {
        div_sum.add(avg_conditional_divergence(dist, i, &refs[i]));
    }
    let d_joint = kl_of_tables(dist.pmf(), &reference_product_table(dist, refs));
    assert!(
        d_joint <= div_sum.value() + CROSS_CHECK_TOL,
        "tensorization inequality violated: {d_joint} > {}",
        div_sum.value()
    );
    let value = div_sum.value() - d_joint;
    let dtc_value = dtc(dist);
    assert!(
        (value - dtc_value).abs() <= CROSS_CHECK_TOL,
        "reference-measure DTC {value} disagrees with DTC {dtc_value}"
    );
    Ok(value)
}

/// Mutual information of a mixture: `sum_j w_j D(mu_j || mix)`.
/// Bounded above by the entropy of the weight vector.
pub fn mixture_mutual_info(mixture: &Mixture) -> f64 {
    let mixed = mixture.mix();
    let mut acc = NeumaierSum::new();
    for (w, comp) in mixture.weights().iter().zip(mixture.components()) {
        if *w > 0.0 {
            acc.add(w * kl_of_tables(comp.pmf(), mixed.pmf()));
        }
    }
    let value = acc.value();
    let h_weights = entropy_of_table(mixture.weights());
    assert!(
        value <= h_weights + CROSS_CHECK_TOL,
        "mixture mutual information {value} exceeds weight entropy {h_weights}"
    );
    value
}

/// The gap in Shearer's inequality for a cover in which every coordinate
/// appears at least `k` times: `(1/k) sum_S H(X_S) - H(X_{[n]})`.
pub fn shearer_gap(dist: &JointDist, cover: &[CoordSet], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::BadParameter("cover multiplicity k must be >= 1".into()));
    }
    let n = dist.n();
    for s in cover {
        if s.is_empty() {
            return Err(Error::EmptySubset);
        }
        check_range(dist, *s)?;
    }
    for i in 0..n {
        let have = cover.iter().filter(|s| s.contains(i)).count();
        if have < k {
            return Err(Error::CoverDeficient {
                coordinate: i,
                have,
                need: k,
            });
        }
    }
    let mut acc = NeumaierSum::new();
    for s in cover {
        acc.add(subset_entropy(dist, *s));
    }
    let gap = acc.value() / k as f64 - entropy(dist);
    assert!(gap >= -1e-10, "Shearer gap {gap} below numerical slack");
    Ok(gap)
}

/// Summary of the information measures of a distribution, expressed in a
/// chosen base.
#[derive(Debug, Clone)]
pub struct InfoReport {
    pub base: LogBase,
    /// Joint entropy `H(mu)`.
    pub entropy: f64,
    /// Per-coordinate entropies `H(X_i)`.
    pub coordinate_entropies: Vec<f64>,
    /// Per-coordinate conditional entropies `H(X_i | X_{[n] - i})`.
    pub conditional_entropies: Vec<f64>,
    /// Per-coordinate full mutual informations `I(X_i ; X_{[n] - i})`.
    pub mutual_informations: Vec<f64>,
    pub tc: f64,
    pub dtc: f64,
}

impl InfoReport {
    /// Computes every field and verifies the two structural invariants:
    /// `TC + DTC = sum_i I(X_i ; rest)` and the basic sandwich
    /// `max_i I <= TC, DTC <= (n-1) max_i I`.
    pub fn new(dist: &JointDist, base: LogBase) -> Self {
        let n = dist.n();
        let h_full = entropy(dist);
        let coordinate_entropies: Vec<f64> = (0..n)
            .map(|i| subset_entropy(dist, CoordSet::singleton(i)))
            .collect();
        let conditional_entropies: Vec<f64> = (0..n)
            .map(|i| h_full - subset_entropy(dist, CoordSet::singleton(i).complement(n)))
            .collect();
        let mutual_informations: Vec<f64> = coordinate_entropies
            .iter()
            .zip(&conditional_entropies)
            .map(|(h, hc)| h - hc)
            .collect();
        let tc_value = tc(dist);
        let dtc_value = dtc(dist);

        let mut mi_sum = NeumaierSum::new();
        for &v in &mutual_informations {
            mi_sum.add(v);
        }
        assert!(
            (tc_value + dtc_value - mi_sum.value()).abs() <= CROSS_CHECK_TOL,
            "TC + DTC must equal the sum of coordinate mutual informations"
        );
        let max_mi = mutual_informations.iter().cloned().fold(0.0, f64::max);
        let upper = (n.saturating_sub(1)) as f64 * max_mi;
        assert!(
            max_mi <= tc_value + CROSS_CHECK_TOL
                && max_mi <= dtc_value + CROSS_CHECK_TOL
                && tc_value <= upper + CROSS_CHECK_TOL
                && dtc_value <= upper + CROSS_CHECK_TOL,
            "basic sandwich violated: max I {max_mi}, TC {tc_value}, DTC {dtc_value}"
        );

        let c = |v: f64| base.convert(v);
        InfoReport {
            base,
            entropy: c(h_full),
            coordinate_entropies: coordinate_entropies.into_iter().map(c).collect(),
            conditional_entropies: conditional_entropies.into_iter().map(c).collect(),
            mutual_informations: mutual_informations.into_iter().map(c).collect(),
            tc: c(tc_value),
            dtc: c(dtc_value),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Alphabet, ProductSpace};
    use std::f64::consts::LN_2;
    use std::sync::Arc;

    fn binary_space(n: usize) -> Arc<ProductSpace> {
        Arc::new(ProductSpace::power(Alphabet::range(2).unwrap(), n).unwrap())
    }

    fn even_parity3() -> JointDist {
        let space = binary_space(3);
        let mut pmf = vec![0.0; 8];
        for idx in 0..8 {
            let p = space.point_of(idx);
            if (p[0] + p[1] + p[2]) % 2 == 0 {
                pmf[idx] = 0.25;
            }
        }
        JointDist::from_pmf(space, pmf).unwrap()
    }

    fn diagonal2() -> JointDist {
        JointDist::from_pmf(binary_space(2), vec![0.5, 0.0, 0.0, 0.5]).unwrap()
    }

    fn random_dist(rng: &mut impl rand::Rng, sizes: &[usize]) -> JointDist {
        let space = Arc::new(
            ProductSpace::new(sizes.iter().map(|&k| Alphabet::range(k).unwrap()).collect())
                .unwrap(),
        );
        let mut pmf: Vec<f64> = (0..space.cells()).map(|_| rng.gen::<f64>()).collect();
        let s: f64 = pmf.iter().sum();
        pmf.iter_mut().for_each(|p| *p /= s);
        JointDist::from_pmf(space, pmf).unwrap()
    }

    #[test]
    fn entropy_basics() {
        let space = binary_space(2);
        let point = JointDist::point_mass(space.clone(), &[0, 1]).unwrap();
        assert_eq!(entropy(&point), 0.0);

        let uniform = JointDist::uniform(space);
        assert!((entropy(&uniform) - (4f64).ln()).abs() < 1e-15);

        let three = Arc::new(ProductSpace::new(vec![Alphabet::range(3).unwrap()]).unwrap());
        let d = JointDist::from_pmf(three, vec![0.5, 0.25, 0.25]).unwrap();
        assert!((entropy(&d) - 1.5 * LN_2).abs() < 1e-12);
    }

    #[test]
    fn conditional_entropy_cases() {
        let d = diagonal2();
        let h = cond_entropy(&d, CoordSet::singleton(0), CoordSet::singleton(1)).unwrap();
        assert!(h.abs() < 1e-12);

        let ep = even_parity3();
        let h = cond_entropy(
            &ep,
            CoordSet::singleton(2),
            CoordSet::from_indices(&[0, 1], 3).unwrap(),
        )
        .unwrap();
        assert!(h.abs() < 1e-12, "last coordinate is determined");

        // Empty B reduces to the marginal entropy.
        let h = cond_entropy(&ep, CoordSet::singleton(0), CoordSet::empty()).unwrap();
        assert!((h - LN_2).abs() < 1e-12);

        assert!(matches!(
            cond_entropy(&ep, CoordSet::empty(), CoordSet::singleton(0)),
            Err(Error::EmptySubset)
        ));
        assert!(matches!(
            cond_entropy(&ep, CoordSet::singleton(0), CoordSet::singleton(0)),
            Err(Error::OverlappingSubsets)
        ));
    }

    #[test]
    fn mutual_info_cases() {
        let space = binary_space(2);
        let prod =
            JointDist::from_pmf(space, vec![0.2 * 0.6, 0.2 * 0.4, 0.8 * 0.6, 0.8 * 0.4]).unwrap();
        let mi = mutual_info(&prod, CoordSet::singleton(0), CoordSet::singleton(1)).unwrap();
        assert!(mi.abs() < 1e-12);

        let mi = mutual_info(&diagonal2(), CoordSet::singleton(0), CoordSet::singleton(1)).unwrap();
        assert!((mi - LN_2).abs() < 1e-12);

        let ep = even_parity3();
        let mi = mutual_info(
            &ep,
            CoordSet::from_indices(&[0, 1], 3).unwrap(),
            CoordSet::singleton(2),
        )
        .unwrap();
        assert!((mi - LN_2).abs() < 1e-12);
    }

    #[test]
    fn cond_mutual_info_cases() {
        let ep = even_parity3();
        let v = cond_mutual_info(
            &ep,
            CoordSet::singleton(0),
            CoordSet::singleton(1),
            CoordSet::singleton(2),
        )
        .unwrap();
        assert!((v - LN_2).abs() < 1e-12);

        // C empty reduces to plain mutual information.
        let a = CoordSet::singleton(0);
        let b = CoordSet::singleton(1);
        let v = cond_mutual_info(&ep, a, b, CoordSet::empty()).unwrap();
        let mi = mutual_info(&ep, a, b).unwrap();
        assert!((v - mi).abs() < 1e-12);
    }

    #[test]
    fn kl_divergence_cases() {
        let space = binary_space(1);
        let uniform = JointDist::uniform(space.clone());
        let point = JointDist::point_mass(space.clone(), &[0]).unwrap();
        assert_eq!(kl_divergence(&uniform, &uniform).unwrap(), 0.0);
        let d = kl_divergence(&point, &uniform).unwrap();
        assert!((d - LN_2).abs() < 1e-15);
        assert!(kl_divergence(&uniform, &point).unwrap().is_infinite());

        let other = JointDist::uniform(binary_space(2));
        assert!(matches!(
            kl_divergence(&uniform, &other),
            Err(Error::SpaceMismatch)
        ));
    }

    #[test]
    fn tc_and_dtc_on_fixtures() {
        let space = binary_space(2);
        let prod =
            JointDist::from_pmf(space, vec![0.2 * 0.6, 0.2 * 0.4, 0.8 * 0.6, 0.8 * 0.4]).unwrap();
        assert!(tc(&prod).abs() < 1e-12);
        assert!(dtc(&prod).abs() < 1e-12);

        let ep = even_parity3();
        assert!((tc(&ep) - LN_2).abs() < 1e-12);
        assert!((dtc(&ep) - 2.0 * LN_2).abs() < 1e-12);
    }

    #[test]
    fn conditional_tc_dtc_cases() {
        let ep = even_parity3();
        assert!((cond_tc(&ep, CoordSet::empty()).unwrap() - tc(&ep)).abs() < 1e-12);
        assert!((cond_dtc(&ep, CoordSet::empty()).unwrap() - dtc(&ep)).abs() < 1e-12);

        // Conditioning the parity measure on one coordinate leaves a
        // perfectly correlated pair: conditional TC is ln 2.
        let v = cond_tc(&ep, CoordSet::singleton(0)).unwrap();
        assert!((v - LN_2).abs() < 1e-12);

        let space = binary_space(2);
        let prod =
            JointDist::from_pmf(space, vec![0.2 * 0.6, 0.2 * 0.4, 0.8 * 0.6, 0.8 * 0.4]).unwrap();
        assert!(cond_tc(&prod, CoordSet::singleton(0)).unwrap().abs() < 1e-12);
        assert!(cond_dtc(&prod, CoordSet::singleton(0)).unwrap().abs() < 1e-12);

        assert!(matches!(
            cond_tc(&ep, CoordSet::full(3)),
            Err(Error::FullSubset)
        ));
    }

    #[test]
    fn reference_measure_forms() {
        let mut rng = <rand_chacha::ChaCha20Rng as rand::SeedableRng>::seed_from_u64(5);
        for _ in 0..10 {
            let d = random_dist(&mut rng, &[2, 3, 2]);
            // Marginals as references reproduce TC and DTC directly.
            let margs: Vec<Vec<f64>> = (0..3).map(|i| d.coordinate_marginal(i)).collect();
            let t = tc_ref(&d, &margs).unwrap();
            assert!((t - tc(&d)).abs() <= 1e-9);
            let dt = dtc_ref(&d, &margs).unwrap();
            assert!((dt - dtc(&d)).abs() <= 1e-9);

            // Uniform references leave the values unchanged.
            let uniforms: Vec<Vec<f64>> = [2usize, 3, 2]
                .iter()
                .map(|&k| vec![1.0 / k as f64; k])
                .collect();
            let t = tc_ref(&d, &uniforms).unwrap();
            assert!((t - tc(&d)).abs() <= 1e-9);
        }
    }

    #[test]
    fn reference_absolute_continuity_enforced() {
        let d = diagonal2();
        let refs = vec![vec![1.0, 0.0], vec![0.5, 0.5]];
        assert!(matches!(
            tc_ref(&d, &refs),
            Err(Error::InfiniteDivergence { coordinate: 0 })
        ));
    }

    #[test]
    fn mixture_mutual_info_cases() {
        use rand::Rng;
        let space = binary_space(2);
        let d = JointDist::uniform(space.clone());
        let m = Mixture::new(vec![0.5, 0.5], vec![d.clone(), d], None).unwrap();
        assert!(mixture_mutual_info(&m).abs() < 1e-12);

        // Disjoint point masses realize the full weight entropy.
        let d0 = JointDist::point_mass(space.clone(), &[0, 0]).unwrap();
        let d1 = JointDist::point_mass(space, &[1, 1]).unwrap();
        let mut rng = <rand_chacha::ChaCha20Rng as rand::SeedableRng>::seed_from_u64(3);
        let w: f64 = rng.gen_range(0.1..0.9);
        let m = Mixture::new(vec![w, 1.0 - w], vec![d0, d1], None).unwrap();
        let expect = -(w * w.ln() + (1.0 - w) * (1.0 - w).ln());
        assert!((mixture_mutual_info(&m) - expect).abs() < 1e-12);
    }

    #[test]
    fn shearer_gap_cases() {
        let ep = even_parity3();
        let singletons: Vec<CoordSet> = (0..3).map(CoordSet::singleton).collect();
        let gap = shearer_gap(&ep, &singletons, 1).unwrap();
        assert!((gap - tc(&ep)).abs() <= 1e-12);

        let pairs: Vec<CoordSet> = CoordSet::subsets_of_cardinality(3, 2);
        let gap = shearer_gap(&ep, &pairs, 2).unwrap();
        assert!((gap * 2.0 - dtc(&ep)).abs() <= 1e-12);

        let space = binary_space(2);
        let prod =
            JointDist::from_pmf(space, vec![0.2 * 0.6, 0.2 * 0.4, 0.8 * 0.6, 0.8 * 0.4]).unwrap();
        let gap = shearer_gap(
            &prod,
            &[CoordSet::singleton(0), CoordSet::singleton(1)],
            1,
        )
        .unwrap();
        assert!(gap.abs() < 1e-12);

        assert!(matches!(
            shearer_gap(&ep, &[CoordSet::singleton(0)], 1),
            Err(Error::CoverDeficient { .. })
        ));
    }

    #[test]
    fn info_report_invariants_and_base_change() {
        let ep = even_parity3();
        let nats = InfoReport::new(&ep, LogBase::E);
        let bits = InfoReport::new(&ep, LogBase::Two);
        assert_eq!(bits.tc, nats.tc / LN_2);
        assert_eq!(bits.dtc, nats.dtc / LN_2);
        assert!((bits.tc - 1.0).abs() < 1e-12);
        assert!((bits.dtc - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cross_checked_routes_on_random_tables() {
        let mut rng = <rand_chacha::ChaCha20Rng as rand::SeedableRng>::seed_from_u64(7);
        for _ in 0..25 {
            let d = random_dist(&mut rng, &[3, 2, 4]);
            // tc/dtc assert their internal routes; a call is the test.
            let t = tc(&d);
            let dt = dtc(&d);
            assert!(t >= 0.0 && dt >= 0.0);
            for s in 0..3 {
                cond_tc(&d, CoordSet::singleton(s)).unwrap();
                cond_dtc(&d, CoordSet::singleton(s)).unwrap();
            }
        }
    }
}
