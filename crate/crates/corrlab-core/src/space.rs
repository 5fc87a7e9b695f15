//! Finite product spaces, dense probability tables, and the structural
//! operations every other module consumes: marginals, disintegrations,
//! products of marginals, mixtures, quantizations and clumpings.
//!
//! Tables are row-major in coordinate order (the last coordinate varies
//! fastest).  The total number of cells of any space is capped (see
//! [`crate::cell_capacity`]); all masses are validated non-negative and
//! renormalized exactly on construction.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::capacity::ensure_cells;
use crate::numeric::NeumaierSum;
use crate::{CoordSet, Error, Result};

/// Tolerance for accepting an input pmf as normalized.
pub const INPUT_NORMALIZATION_TOL: f64 = 1e-9;
/// Tolerance for internal reconstitution identities.
pub const RECONSTITUTION_TOL: f64 = 1e-10;

/// A finite alphabet: an ordered list of distinct symbol labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: Vec<S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::BadParameter("alphabet must be nonempty".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for s in &symbols {
            if !seen.insert(s.as_str()) {
                return Err(Error::BadParameter(format!("duplicate symbol {s:?}")));
            }
        }
        Ok(Self { symbols })
    }

    /// The alphabet `{"0", "1", .., "k-1"}`.
    pub fn range(k: usize) -> Result<Self> {
        Self::new((0..k).map(|i| i.to_string()).collect())
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }
}

/// An ordered product of finite alphabets with per-coordinate metrics of
/// diameter at most 1.  The default metric is discrete.
#[derive(Debug, Clone)]
pub struct ProductSpace {
    alphabets: Vec<Alphabet>,
    /// Per coordinate, a `size x size` row-major cost table.
    metrics: Vec<Vec<f64>>,
    strides: Vec<usize>,
    cells: usize,
}

impl PartialEq for ProductSpace {
    fn eq(&self, other: &Self) -> bool {
        self.alphabets == other.alphabets && self.metrics == other.metrics
    }
}

impl ProductSpace {
    /// Product space with discrete metrics on every coordinate.
    pub fn new(alphabets: Vec<Alphabet>) -> Result<Self> {
        let metrics = alphabets
            .iter()
            .map(|a| {
                let k = a.size();
                let mut m = vec![1.0; k * k];
                for i in 0..k {
                    m[i * k + i] = 0.0;
                }
                m
            })
            .collect();
        Self::with_metrics(alphabets, metrics)
    }

    /// Product space with explicit per-coordinate cost tables; each must
    /// be symmetric, zero on the diagonal, with entries in `[0, 1]`.
    pub fn with_metrics(alphabets: Vec<Alphabet>, metrics: Vec<Vec<f64>>) -> Result<Self> {
        if alphabets.is_empty() {
            return Err(Error::BadParameter("need at least one coordinate".into()));
        }
        if alphabets.len() > CoordSet::MAX_COORDS {
            return Err(Error::BadParameter(format!(
                "at most {} coordinates supported",
                CoordSet::MAX_COORDS
            )));
        }
        if metrics.len() != alphabets.len() {
            return Err(Error::BadParameter(
                "one metric table per coordinate required".into(),
            ));
        }
        for (c, (a, m)) in alphabets.iter().zip(&metrics).enumerate() {
            let k = a.size();
            if m.len() != k * k {
                return Err(Error::BadParameter(format!(
                    "metric table for coordinate {c} has wrong shape"
                )));
            }
            for i in 0..k {
                if m[i * k + i] != 0.0 {
                    return Err(Error::BadParameter(format!(
                        "metric for coordinate {c} is nonzero on the diagonal"
                    )));
                }
                for j in 0..k {
                    let v = m[i * k + j];
                    if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                        return Err(Error::BadParameter(format!(
                            "metric entry out of [0,1] at coordinate {c}"
                        )));
                    }
                    if (v - m[j * k + i]).abs() != 0.0 {
                        return Err(Error::BadParameter(format!(
                            "metric for coordinate {c} is not symmetric"
                        )));
                    }
                }
            }
        }
        let mut cells: usize = 1;
        for a in &alphabets {
            cells = cells
                .checked_mul(a.size())
                .ok_or(Error::CapacityExceeded {
                    needed: usize::MAX,
                    cap: crate::cell_capacity(),
                })?;
        }
        ensure_cells(cells)?;
        let n = alphabets.len();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * alphabets[i + 1].size();
        }
        Ok(Self {
            alphabets,
            metrics,
            strides,
            cells,
        })
    }

    /// Product of `n` copies of one alphabet, discrete metric.
    pub fn power(alphabet: Alphabet, n: usize) -> Result<Self> {
        Self::new(vec![alphabet; n])
    }

    pub fn n(&self) -> usize {
        self.alphabets.len()
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn alphabet(&self, i: usize) -> &Alphabet {
        &self.alphabets[i]
    }

    pub fn alphabets(&self) -> &[Alphabet] {
        &self.alphabets
    }

    pub fn size(&self, i: usize) -> usize {
        self.alphabets[i].size()
    }

    pub fn metric(&self, i: usize) -> &[f64] {
        &self.metrics[i]
    }

    pub fn metric_entry(&self, i: usize, a: usize, b: usize) -> f64 {
        self.metrics[i][a * self.alphabets[i].size() + b]
    }

    /// True if every coordinate carries the discrete metric.
    pub fn is_discrete(&self) -> bool {
        self.alphabets.iter().zip(&self.metrics).all(|(a, m)| {
            let k = a.size();
            (0..k).all(|i| (0..k).all(|j| m[i * k + j] == if i == j { 0.0 } else { 1.0 }))
        })
    }

    pub fn index_of(&self, point: &[usize]) -> Result<usize> {
        if point.len() != self.n() {
            return Err(Error::BadPoint);
        }
        let mut idx = 0;
        for (i, &x) in point.iter().enumerate() {
            if x >= self.size(i) {
                return Err(Error::BadPoint);
            }
            idx += x * self.strides[i];
        }
        Ok(idx)
    }

    pub fn point_of(&self, mut index: usize) -> Vec<usize> {
        let mut point = vec![0usize; self.n()];
        for i in 0..self.n() {
            point[i] = index / self.strides[i];
            index %= self.strides[i];
        }
        point
    }

    /// Renders a cell as a tuple of symbols, e.g. `(0,1,1)`.
    pub fn label_of(&self, index: usize) -> String {
        let point = self.point_of(index);
        let mut s = String::from("(");
        for (i, &x) in point.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{}", self.alphabets[i].symbols()[x]);
        }
        s.push(')');
        s
    }

    /// Normalized Hamming average of the per-coordinate metrics.
    pub fn distance(&self, x: &[usize], y: &[usize]) -> Result<f64> {
        if x.len() != self.n() || y.len() != self.n() {
            return Err(Error::BadPoint);
        }
        let mut sum = 0.0;
        for i in 0..self.n() {
            if x[i] >= self.size(i) || y[i] >= self.size(i) {
                return Err(Error::BadPoint);
            }
            sum += self.metric_entry(i, x[i], y[i]);
        }
        Ok(sum / self.n() as f64)
    }

    /// The product space over a coordinate subset, keeping the original
    /// alphabets and metrics of the retained coordinates.
    pub fn sub_space(&self, subset: CoordSet) -> Result<ProductSpace> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        let idx = subset.indices();
        if *idx.last().unwrap() >= self.n() {
            return Err(Error::BadParameter(
                "subset exceeds coordinate count".into(),
            ));
        }
        ProductSpace::with_metrics(
            idx.iter().map(|&i| self.alphabets[i].clone()).collect(),
            idx.iter().map(|&i| self.metrics[i].clone()).collect(),
        )
    }

    /// Iterates over all cells, passing `(cell_index, sub_index)` where
    /// `sub_index` indexes the projection of the cell to `subset` inside
    /// the corresponding sub-space.  Runs in one odometer sweep.
    pub(crate) fn for_each_cell_subindex(&self, subset: CoordSet, mut f: impl FnMut(usize, usize)) {
        let n = self.n();
        // Strides of the sub-space, spread over the full coordinate list
        // (zero for dropped coordinates).
        let mut substrides = vec![0usize; n];
        {
            let mut stride = 1usize;
            for i in (0..n).rev() {
                if subset.contains(i) {
                    substrides[i] = stride;
                    stride *= self.size(i);
                }
            }
        }
        let mut digits = vec![0usize; n];
        let mut sub = 0usize;
        for idx in 0..self.cells {
            f(idx, sub);
            for i in (0..n).rev() {
                digits[i] += 1;
                sub += substrides[i];
                if digits[i] == self.size(i) {
                    sub -= substrides[i] * self.size(i);
                    digits[i] = 0;
                } else {
                    break;
                }
            }
        }
    }
}

/// A probability distribution given by a dense table over a product space.
#[derive(Debug, Clone)]
pub struct JointDist {
    space: Arc<ProductSpace>,
    pmf: Vec<f64>,
}

impl JointDist {
    /// Validates and exactly renormalizes a dense table.
    ///
    /// Rejects negative entries, shape mismatches, and mass whose total
    /// deviates from 1 by more than `1e-9`; within that tolerance the
    /// table is divided by its exact (compensated) sum.
    pub fn from_pmf(space: Arc<ProductSpace>, pmf: Vec<f64>) -> Result<Self> {
        if pmf.len() != space.cells() {
            return Err(Error::BadShape {
                expected: space.cells(),
                got: pmf.len(),
            });
        }
        let mut sum = NeumaierSum::new();
        for (i, &p) in pmf.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::NegativeMass { index: i, value: p });
            }
            sum.add(p);
        }
        let total = sum.value();
        if (total - 1.0).abs() > INPUT_NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum: total });
        }
        let mut pmf = pmf;
        if total != 1.0 {
            for p in &mut pmf {
                *p /= total;
            }
        }
        Ok(Self { space, pmf })
    }

    /// Internal constructor for tables that are normalized by
    /// construction; still renormalizes to absorb rounding.
    pub(crate) fn from_raw(space: Arc<ProductSpace>, mut pmf: Vec<f64>) -> Self {
        debug_assert_eq!(pmf.len(), space.cells());
        let mut sum = NeumaierSum::new();
        for &p in &pmf {
            debug_assert!(p >= -1e-15, "raw pmf entry {p}");
            sum.add(p.max(0.0));
        }
        let total = sum.value();
        debug_assert!((total - 1.0).abs() < 1e-6, "raw pmf sum {total}");
        for p in &mut pmf {
            *p = p.max(0.0) / total;
        }
        Self { space, pmf }
    }

    pub fn uniform(space: Arc<ProductSpace>) -> Self {
        let cells = space.cells();
        Self {
            pmf: vec![1.0 / cells as f64; cells],
            space,
        }
    }

    pub fn point_mass(space: Arc<ProductSpace>, point: &[usize]) -> Result<Self> {
        let idx = space.index_of(point)?;
        let mut pmf = vec![0.0; space.cells()];
        pmf[idx] = 1.0;
        Ok(Self { space, pmf })
    }

    pub fn space(&self) -> &Arc<ProductSpace> {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.pmf[index]
    }

    pub fn same_space(&self, other: &JointDist) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space
    }

    /// Indices of cells with positive mass.
    pub fn support(&self) -> Vec<usize> {
        (0..self.pmf.len()).filter(|&i| self.pmf[i] > 0.0).collect()
    }

    pub fn max_abs_diff(&self, other: &JointDist) -> f64 {
        debug_assert!(self.same_space(other));
        self.pmf
            .iter()
            .zip(&other.pmf)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Marginal distribution on a nonempty coordinate subset.
    pub fn marginal(&self, subset: CoordSet) -> Result<JointDist> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        let sub_space = Arc::new(self.space.sub_space(subset)?);
        let mut table = vec![0.0; sub_space.cells()];
        self.space.for_each_cell_subindex(subset, |idx, sub| {
            table[sub] += self.pmf[idx];
        });
        Ok(JointDist::from_raw(sub_space, table))
    }

    /// Marginal pmf of a single coordinate, without building a sub-space.
    pub fn coordinate_marginal(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.space.size(i)];
        self.space
            .for_each_cell_subindex(CoordSet::singleton(i), |idx, sub| {
                out[sub] += self.pmf[idx];
            });
        out
    }

    /// Disintegrates over the coordinates in `subset`: the kernel maps
    /// each value `y` of positive marginal mass to the conditional
    /// distribution on the full space (with the `subset` coordinates
    /// pinned to `y`).  Zero-mass conditioning events are omitted.
    pub fn disintegrate(&self, subset: CoordSet) -> Result<Kernel> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        if subset.len() >= self.n() {
            return Err(Error::FullSubset);
        }
        let base_marginal = self.marginal(subset)?;
        let support: Vec<usize> = base_marginal.support();
        ensure_cells(
            support
                .len()
                .checked_mul(self.space.cells())
                .ok_or(Error::CapacityExceeded {
                    needed: usize::MAX,
                    cap: crate::cell_capacity(),
                })?,
        )?;
        let mut slot = vec![usize::MAX; base_marginal.space().cells()];
        for (k, &y) in support.iter().enumerate() {
            slot[y] = k;
        }
        let mut tables: Vec<Vec<f64>> = support
            .iter()
            .map(|_| vec![0.0; self.space.cells()])
            .collect();
        self.space.for_each_cell_subindex(subset, |idx, sub| {
            if slot[sub] != usize::MAX && self.pmf[idx] > 0.0 {
                tables[slot[sub]][idx] = self.pmf[idx] / base_marginal.prob(sub);
            }
        });
        let conditionals = support
            .iter()
            .zip(tables)
            .map(|(&y, t)| (y, JointDist::from_raw(self.space.clone(), t)))
            .collect();
        let kernel = Kernel {
            base_subset: subset,
            base_marginal,
            conditionals,
        };
        let recon = kernel.mix_back();
        let dev = recon.max_abs_diff(self);
        assert!(
            dev <= RECONSTITUTION_TOL,
            "disintegration reconstitution off by {dev}"
        );
        Ok(kernel)
    }

    /// The product of the per-coordinate marginals.
    pub fn product_of_marginals(&self) -> JointDist {
        let n = self.n();
        let margs: Vec<Vec<f64>> = (0..n).map(|i| self.coordinate_marginal(i)).collect();
        let mut table = vec![0.0; self.space.cells()];
        let mut digits = vec![0usize; n];
        for (idx, t) in table.iter_mut().enumerate() {
            let mut p = 1.0;
            for i in 0..n {
                p *= margs[i][digits[i]];
            }
            *t = p;
            if idx + 1 < self.space.cells() {
                for i in (0..n).rev() {
                    digits[i] += 1;
                    if digits[i] == self.space.size(i) {
                        digits[i] = 0;
                    } else {
                        break;
                    }
                }
            }
        }
        JointDist::from_raw(self.space.clone(), table)
    }

    /// Whether this distribution equals the product of its own marginals
    /// within `tol` entrywise.
    pub fn is_product(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.product_of_marginals()) <= tol
    }

    /// Quantizes each coordinate by a partition of its alphabet.  The
    /// result lives on the product of cell alphabets; the pmf of a cell
    /// tuple is the sum over its preimage.
    pub fn quantize(&self, partitions: &[Vec<Vec<usize>>]) -> Result<JointDist> {
        let n = self.n();
        if partitions.len() != n {
            return Err(Error::BadPartition(format!(
                "need one partition per coordinate, got {}",
                partitions.len()
            )));
        }
        let mut cell_maps: Vec<Vec<usize>> = Vec::with_capacity(n);
        let mut alphabets = Vec::with_capacity(n);
        for (i, cells) in partitions.iter().enumerate() {
            let k = self.space.size(i);
            let mut map = vec![usize::MAX; k];
            let mut labels = Vec::with_capacity(cells.len());
            for (c, cell) in cells.iter().enumerate() {
                if cell.is_empty() {
                    return Err(Error::BadPartition(format!(
                        "empty cell in partition of coordinate {i}"
                    )));
                }
                let mut names = Vec::with_capacity(cell.len());
                for &s in cell {
                    if s >= k {
                        return Err(Error::BadPartition(format!(
                            "symbol index {s} out of range on coordinate {i}"
                        )));
                    }
                    if map[s] != usize::MAX {
                        return Err(Error::BadPartition(format!(
                            "symbol {s} appears in two cells on coordinate {i}"
                        )));
                    }
                    map[s] = c;
                    names.push(self.space.alphabet(i).symbols()[s].clone());
                }
                labels.push(names.join("|"));
            }
            if map.iter().any(|&c| c == usize::MAX) {
                return Err(Error::BadPartition(format!(
                    "partition of coordinate {i} misses a symbol"
                )));
            }
            cell_maps.push(map);
            alphabets.push(Alphabet::new(labels)?);
        }
        let qspace = Arc::new(ProductSpace::new(alphabets)?);
        let mut table = vec![0.0; qspace.cells()];
        let mut point = vec![0usize; n];
        for idx in 0..self.space.cells() {
            if self.pmf[idx] == 0.0 {
                continue;
            }
            let mut rem = idx;
            for i in 0..n {
                point[i] = cell_maps[i][rem / self.space.strides[i]];
                rem %= self.space.strides[i];
            }
            let q = qspace.index_of(&point).expect("mapped point in range");
            table[q] += self.pmf[idx];
        }
        Ok(JointDist::from_raw(qspace, table))
    }

    /// Clumps coordinates into blocks: the result is a distribution over
    /// the product of block alphabets (full Cartesian products), with the
    /// same underlying mass re-indexed.  Blocks are sorted internally in
    /// ascending coordinate order.
    pub fn clump(&self, blocks: &[Vec<usize>]) -> Result<JointDist> {
        let n = self.n();
        let mut seen = vec![false; n];
        for block in blocks {
            if block.is_empty() {
                return Err(Error::BadPartition("empty block".into()));
            }
            for &i in block {
                if i >= n {
                    return Err(Error::BadPartition(format!(
                        "coordinate {i} out of range"
                    )));
                }
                if seen[i] {
                    return Err(Error::BadPartition(format!(
                        "coordinate {i} appears in two blocks"
                    )));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::BadPartition(
                "blocks must cover every coordinate".into(),
            ));
        }
        let mut blocks: Vec<Vec<usize>> = blocks.to_vec();
        for b in &mut blocks {
            b.sort_unstable();
        }
        let mut alphabets = Vec::with_capacity(blocks.len());
        for block in &blocks {
            let mut labels: Vec<String> = vec![String::new()];
            for &i in block {
                let mut next = Vec::with_capacity(labels.len() * self.space.size(i));
                for prefix in &labels {
                    for s in self.space.alphabet(i).symbols() {
                        if prefix.is_empty() {
                            next.push(s.clone());
                        } else {
                            next.push(format!("{prefix},{s}"));
                        }
                    }
                }
                labels = next;
            }
            alphabets.push(Alphabet::new(labels)?);
        }
        let cspace = Arc::new(ProductSpace::new(alphabets)?);
        let mut table = vec![0.0; cspace.cells()];
        let mut digits = vec![0usize; n];
        for idx in 0..self.space.cells() {
            let mut rem = idx;
            for i in 0..n {
                digits[i] = rem / self.space.strides[i];
                rem %= self.space.strides[i];
            }
            let mut cidx = 0usize;
            for (j, block) in blocks.iter().enumerate() {
                let mut within = 0usize;
                for &i in block {
                    within = within * self.space.size(i) + digits[i];
                }
                cidx += within * cspace.strides[j];
            }
            table[cidx] = self.pmf[idx];
        }
        Ok(JointDist::from_raw(cspace, table))
    }
}

/// A disintegration of a distribution over a coordinate subset: the
/// subset's marginal together with the conditional distribution at each
/// value of positive mass.
#[derive(Debug, Clone)]
pub struct Kernel {
    base_subset: CoordSet,
    base_marginal: JointDist,
    /// `(y, conditional)` pairs, `y` indexing the base sub-space.
    conditionals: Vec<(usize, JointDist)>,
}

impl Kernel {
    pub fn base_subset(&self) -> CoordSet {
        self.base_subset
    }

    pub fn base_marginal(&self) -> &JointDist {
        &self.base_marginal
    }

    pub fn conditionals(&self) -> &[(usize, JointDist)] {
        &self.conditionals
    }

    pub fn conditional_at(&self, y: usize) -> Option<&JointDist> {
        self.conditionals
            .iter()
            .find(|(idx, _)| *idx == y)
            .map(|(_, d)| d)
    }

    /// Mixes the conditionals by the base marginal, recovering the
    /// distribution that was disintegrated.
    pub fn mix_back(&self) -> JointDist {
        let space = self.conditionals[0].1.space().clone();
        let mut table = vec![0.0; space.cells()];
        for (y, cond) in &self.conditionals {
            let w = self.base_marginal.prob(*y);
            for (t, p) in table.iter_mut().zip(cond.pmf()) {
                *t += w * p;
            }
        }
        JointDist::from_raw(space, table)
    }

    /// Views the kernel as a finite mixture with the marginal weights.
    pub fn as_mixture(&self) -> Mixture {
        Mixture::new(
            self.conditionals
                .iter()
                .map(|(y, _)| self.base_marginal.prob(*y))
                .collect(),
            self.conditionals.iter().map(|(_, d)| d.clone()).collect(),
            Some(
                self.conditionals
                    .iter()
                    .map(|(y, _)| self.base_marginal.space().label_of(*y))
                    .collect(),
            ),
        )
        .expect("kernel weights are a probability vector on a shared space")
    }
}

/// A finite mixture: weights plus component distributions on one shared
/// product space.
#[derive(Debug, Clone)]
pub struct Mixture {
    weights: Vec<f64>,
    components: Vec<JointDist>,
    labels: Option<Vec<String>>,
}

impl Mixture {
    pub fn new(
        weights: Vec<f64>,
        components: Vec<JointDist>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if components.is_empty() || weights.len() != components.len() {
            return Err(Error::BadShape {
                expected: components.len(),
                got: weights.len(),
            });
        }
        if let Some(ls) = &labels {
            if ls.len() != components.len() {
                return Err(Error::BadShape {
                    expected: components.len(),
                    got: ls.len(),
                });
            }
        }
        let mut sum = NeumaierSum::new();
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::NegativeMass { index: i, value: w });
            }
            sum.add(w);
        }
        let total = sum.value();
        if (total - 1.0).abs() > INPUT_NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum: total });
        }
        for c in &components[1..] {
            if !components[0].same_space(c) {
                return Err(Error::SpaceMismatch);
            }
        }
        let mut weights = weights;
        if total != 1.0 {
            for w in &mut weights {
                *w /= total;
            }
        }
        Ok(Self {
            weights,
            components,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[JointDist] {
        &self.components
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn space(&self) -> &Arc<ProductSpace> {
        self.components[0].space()
    }

    /// The weighted entrywise sum of the component tables.
    pub fn mix(&self) -> JointDist {
        let space = self.space().clone();
        let mut table = vec![0.0; space.cells()];
        for (w, comp) in self.weights.iter().zip(&self.components) {
            for (t, p) in table.iter_mut().zip(comp.pmf()) {
                *t += w * p;
            }
        }
        JointDist::from_raw(space, table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_space(n: usize) -> Arc<ProductSpace> {
        Arc::new(ProductSpace::power(Alphabet::range(2).unwrap(), n).unwrap())
    }

    /// Uniform distribution on the even-parity triples of {0,1}^3.
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

    #[test]
    fn make_joint_accepts_uniform_and_diagonal() {
        let space = binary_space(2);
        let u = JointDist::from_pmf(space.clone(), vec![0.25; 4]).unwrap();
        assert_eq!(u.pmf(), &[0.25, 0.25, 0.25, 0.25]);
        let d = JointDist::from_pmf(space, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(d.prob(0), 0.5);
        assert_eq!(d.prob(3), 0.5);
    }

    #[test]
    fn make_joint_rejects_bad_input() {
        let space = binary_space(2);
        assert!(matches!(
            JointDist::from_pmf(space.clone(), vec![0.3; 4]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            JointDist::from_pmf(space.clone(), vec![0.5, 0.6, -0.1, 0.0]),
            Err(Error::NegativeMass { .. })
        ));
        assert!(matches!(
            JointDist::from_pmf(space, vec![0.5, 0.5]),
            Err(Error::BadShape { .. })
        ));
    }

    #[test]
    fn marginal_of_even_parity_is_uniform() {
        let d = even_parity3();
        // Independent oracle: sum the four support atoms by hand.
        let mut by_first = [0.0f64; 2];
        for idx in 0..8 {
            let p = d.space().point_of(idx);
            if (p[0] + p[1] + p[2]) % 2 == 0 {
                by_first[p[0]] += 0.25;
            }
        }
        assert_eq!(by_first, [0.5, 0.5]);
        let m = d.marginal(CoordSet::singleton(0)).unwrap();
        assert!((m.prob(0) - 0.5).abs() < 1e-15);
        assert!((m.prob(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn marginal_projects_products_and_keeps_identity() {
        let space = binary_space(2);
        let prod =
            JointDist::from_pmf(space.clone(), vec![0.1 * 0.7, 0.1 * 0.3, 0.9 * 0.7, 0.9 * 0.3])
                .unwrap();
        let m2 = prod.marginal(CoordSet::singleton(1)).unwrap();
        assert!((m2.prob(0) - 0.7).abs() < 1e-15);
        let full = prod.marginal(CoordSet::full(2)).unwrap();
        assert!(full.max_abs_diff(&prod) < 1e-15);
        assert!(matches!(
            prod.marginal(CoordSet::empty()),
            Err(Error::EmptySubset)
        ));
    }

    #[test]
    fn disintegration_of_even_parity() {
        let d = even_parity3();
        let kernel = d.disintegrate(CoordSet::singleton(0)).unwrap();
        // At y = 0 the conditional is uniform on {(0,0,0),(0,1,1)}.
        let cond = kernel.conditional_at(0).unwrap();
        let space = d.space();
        assert!((cond.prob(space.index_of(&[0, 0, 0]).unwrap()) - 0.5).abs() < 1e-15);
        assert!((cond.prob(space.index_of(&[0, 1, 1]).unwrap()) - 0.5).abs() < 1e-15);
        assert_eq!(cond.prob(space.index_of(&[0, 1, 0]).unwrap()), 0.0);
        assert_eq!(cond.prob(space.index_of(&[1, 0, 0]).unwrap()), 0.0);
    }

    #[test]
    fn disintegration_of_product_pins_and_factors() {
        let space = binary_space(2);
        let prod =
            JointDist::from_pmf(space.clone(), vec![0.2 * 0.6, 0.2 * 0.4, 0.8 * 0.6, 0.8 * 0.4])
                .unwrap();
        let kernel = prod.disintegrate(CoordSet::singleton(0)).unwrap();
        for (y, cond) in kernel.conditionals() {
            let mut expected = vec![0.0; 4];
            expected[space.index_of(&[*y, 0]).unwrap()] = 0.6;
            expected[space.index_of(&[*y, 1]).unwrap()] = 0.4;
            let expected = JointDist::from_pmf(space.clone(), expected).unwrap();
            assert!(cond.max_abs_diff(&expected) < 1e-12);
        }
    }

    #[test]
    fn disintegration_rejects_degenerate_subsets() {
        let d = even_parity3();
        assert!(matches!(
            d.disintegrate(CoordSet::empty()),
            Err(Error::EmptySubset)
        ));
        assert!(matches!(
            d.disintegrate(CoordSet::full(3)),
            Err(Error::FullSubset)
        ));
    }

    #[test]
    fn product_of_marginals_cases() {
        let space = binary_space(2);
        let prod =
            JointDist::from_pmf(space.clone(), vec![0.2 * 0.6, 0.2 * 0.4, 0.8 * 0.6, 0.8 * 0.4])
                .unwrap();
        assert!(prod.product_of_marginals().max_abs_diff(&prod) < 1e-12);

        // Even parity: every marginal is uniform, so the product is uniform.
        let d = even_parity3();
        let u = JointDist::uniform(d.space().clone());
        assert!(d.product_of_marginals().max_abs_diff(&u) < 1e-15);

        let diag = JointDist::from_pmf(space.clone(), vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let u2 = JointDist::uniform(space);
        assert!(diag.product_of_marginals().max_abs_diff(&u2) < 1e-15);
    }

    #[test]
    fn mixing_point_masses_gives_diagonal() {
        let space = binary_space(2);
        let d0 = JointDist::point_mass(space.clone(), &[0, 0]).unwrap();
        let d1 = JointDist::point_mass(space.clone(), &[1, 1]).unwrap();
        let m = Mixture::new(vec![0.5, 0.5], vec![d0.clone(), d1], None).unwrap();
        let mixed = m.mix();
        assert_eq!(mixed.prob(0), 0.5);
        assert_eq!(mixed.prob(3), 0.5);

        let single = Mixture::new(vec![1.0], vec![d0.clone()], None).unwrap();
        assert!(single.mix().max_abs_diff(&d0) < 1e-15);
    }

    #[test]
    fn mixture_rejects_space_mismatch() {
        let a = JointDist::uniform(binary_space(2));
        let b = JointDist::uniform(binary_space(3));
        assert!(matches!(
            Mixture::new(vec![0.5, 0.5], vec![a, b], None),
            Err(Error::SpaceMismatch)
        ));
    }

    #[test]
    fn reconstitution_of_random_distributions() {
        // Seeded random tables; every nonempty proper subset.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
        for _ in 0..20 {
            let space = Arc::new(
                ProductSpace::new(vec![
                    Alphabet::range(rng.gen_range(2..=3)).unwrap(),
                    Alphabet::range(rng.gen_range(2..=3)).unwrap(),
                    Alphabet::range(rng.gen_range(2..=3)).unwrap(),
                ])
                .unwrap(),
            );
            let mut pmf: Vec<f64> = (0..space.cells()).map(|_| rng.gen::<f64>()).collect();
            let s: f64 = pmf.iter().sum();
            pmf.iter_mut().for_each(|p| *p /= s);
            let d = JointDist::from_pmf(space, pmf).unwrap();
            for bits in 1..(1 << 3) - 1u32 {
                let subset = CoordSet::from_bits(bits);
                let kernel = d.disintegrate(subset).unwrap();
                assert!(kernel.mix_back().max_abs_diff(&d) <= 1e-10);
            }
        }
    }

    #[test]
    fn quantize_identity_and_collapse() {
        let d = even_parity3();
        let singletons: Vec<Vec<Vec<usize>>> = vec![vec![vec![0], vec![1]]; 3];
        let q = d.quantize(&singletons).unwrap();
        assert_eq!(q.pmf(), d.pmf());

        // Collapse the third coordinate: even parity becomes uniform on
        // {0,1}^2 x {cell}.
        let collapse = vec![
            vec![vec![0], vec![1]],
            vec![vec![0], vec![1]],
            vec![vec![0, 1]],
        ];
        let q = d.quantize(&collapse).unwrap();
        assert_eq!(q.space().cells(), 4);
        for idx in 0..4 {
            assert!((q.prob(idx) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn quantize_rejects_bad_partitions() {
        let d = even_parity3();
        let overlapping = vec![
            vec![vec![0, 1], vec![1]],
            vec![vec![0], vec![1]],
            vec![vec![0], vec![1]],
        ];
        assert!(matches!(
            d.quantize(&overlapping),
            Err(Error::BadPartition(_))
        ));
        let missing = vec![
            vec![vec![0]],
            vec![vec![0], vec![1]],
            vec![vec![0], vec![1]],
        ];
        assert!(matches!(d.quantize(&missing), Err(Error::BadPartition(_))));
    }

    #[test]
    fn clump_identity_and_blocks() {
        let d = even_parity3();
        let same = d.clump(&[vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(same.pmf(), d.pmf());

        let one = d.clump(&[vec![0, 1, 2]]).unwrap();
        assert_eq!(one.n(), 1);
        assert_eq!(one.space().cells(), 8);

        let two = d.clump(&[vec![0, 1], vec![2]]).unwrap();
        assert_eq!(two.n(), 2);
        assert_eq!(two.space().cells(), 8);
        // Mass is preserved cell for cell.
        let total: f64 = two.pmf().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clump_rejects_bad_blocks() {
        let d = even_parity3();
        assert!(matches!(
            d.clump(&[vec![0, 1]]),
            Err(Error::BadPartition(_))
        ));
        assert!(matches!(
            d.clump(&[vec![0, 1], vec![1, 2]]),
            Err(Error::BadPartition(_))
        ));
    }

    #[test]
    fn metric_validation() {
        let a = Alphabet::range(2).unwrap();
        let bad_diag = vec![vec![0.5, 1.0, 1.0, 0.0]];
        assert!(ProductSpace::with_metrics(vec![a.clone()], bad_diag).is_err());
        let asym = vec![vec![0.0, 0.5, 0.7, 0.0]];
        assert!(ProductSpace::with_metrics(vec![a.clone()], asym).is_err());
        let too_big = vec![vec![0.0, 1.5, 1.5, 0.0]];
        assert!(ProductSpace::with_metrics(vec![a], too_big).is_err());
    }

    #[test]
    fn alphabet_rejects_duplicates() {
        assert!(Alphabet::new(vec!["a", "a"]).is_err());
        assert!(Alphabet::new(Vec::<String>::new()).is_err());
    }
}
