//! Construction of the similarity masks that decide which links may exchange
//! information in the graph convolution.
//!
//! * geographic k-hop similarity: `min((A + I)^k, 1)`
//! * long-term temporal similarity: each link keeps its `gamma` nearest links
//!   by Euclidean distance between pooled average-day speed profiles
//! * GLT similarity: the sum of the two (entries in {0, 1, 2})
//! * free-flow reachability: pairs a vehicle at free-flow speed covers in `m · Δt`
//! * ultimate similarity: support of GLT intersected with free-flow reachability

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array2, Axis};

use crate::data::{write_matrix_csv, RoadNetworkSpec, SpeedSeries};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskKind {
    Geographic,
    LongTerm,
    Glt,
    FreeFlow,
    Ultimate,
}

impl fmt::Display for MaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaskKind::Geographic => "geographic",
            MaskKind::LongTerm => "long_term",
            MaskKind::Glt => "glt",
            MaskKind::FreeFlow => "free_flow",
            MaskKind::Ultimate => "ultimate",
        })
    }
}

/// An N×N link mask. Entries are 0/1 except for [`MaskKind::Glt`], which may hold 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    values: Array2<u8>,
    kind: MaskKind,
    hop: Option<usize>,
}

impl BinaryMask {
    pub fn new(values: Array2<u8>, kind: MaskKind, hop: Option<usize>) -> Result<Self> {
        let (r, c) = values.dim();
        if r != c {
            return Err(Error::ShapeMismatch(format!("mask must be square, got {r}x{c}")));
        }
        let max = if kind == MaskKind::Glt { 2 } else { 1 };
        if let Some(((i, j), v)) = values.indexed_iter().find(|(_, &v)| v > max) {
            return Err(Error::BadParams(format!("{kind} mask entry ({i},{j}) = {v}")));
        }
        Ok(Self { values, kind, hop })
    }

    pub fn values(&self) -> &Array2<u8> {
        &self.values
    }

    pub fn kind(&self) -> MaskKind {
        self.kind
    }

    pub fn hop(&self) -> Option<usize> {
        self.hop
    }

    pub fn size(&self) -> usize {
        self.values.nrows()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.values[[i, j]] != 0
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0).count()
    }

    /// 0/1 support as floating point, ready for Hadamard products with weights.
    pub fn support(&self) -> Array2<f64> {
        self.values.mapv(|v| if v != 0 { 1.0 } else { 0.0 })
    }

    fn same_size(&self, other: &BinaryMask) -> Result<()> {
        if self.values.dim() != other.values.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} mask {:?} vs {} mask {:?}",
                self.kind,
                self.values.dim(),
                other.kind,
                other.values.dim()
            )));
        }
        Ok(())
    }

    fn expect_kind(&self, kind: MaskKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::BadParams(format!("expected a {kind} mask, got {}", self.kind)));
        }
        Ok(())
    }
}

fn check_adjacency(adjacency: &Array2<u8>) -> Result<()> {
    let n = adjacency.nrows();
    if adjacency.ncols() != n {
        return Err(Error::ShapeMismatch(format!("adjacency is {:?}", adjacency.dim())));
    }
    for i in 0..n {
        if adjacency[[i, i]] != 0 {
            return Err(Error::NonSymmetric(format!("diagonal entry {i} is nonzero")));
        }
        for j in (i + 1)..n {
            if adjacency[[i, j]] != adjacency[[j, i]] {
                return Err(Error::NonSymmetric(format!("entry ({i},{j}) differs from ({j},{i})")));
            }
            if adjacency[[i, j]] > 1 {
                return Err(Error::BadParams(format!("adjacency entry ({i},{j}) is not binary")));
            }
        }
    }
    Ok(())
}

/// `min((A + I)^k, 1)`, computed as k boolean products so entries never overflow.
pub fn k_hop_similarity(adjacency: &Array2<u8>, k: usize) -> Result<BinaryMask> {
    if k < 1 {
        return Err(Error::BadK(k));
    }
    check_adjacency(adjacency)?;
    let n = adjacency.nrows();
    let mut step = adjacency.mapv(|v| v != 0);
    step.diag_mut().fill(true);

    let mut reach = step.clone();
    for _ in 1..k {
        let mut next = Array2::from_elem((n, n), false);
        for i in 0..n {
            for m in (0..n).filter(|&m| reach[[i, m]]) {
                for j in 0..n {
                    next[[i, j]] |= step[[m, j]];
                }
            }
        }
        reach = next;
    }
    BinaryMask::new(reach.mapv(u8::from), MaskKind::Geographic, Some(k))
}

/// One pooled average-day profile per link (rows are links).
#[derive(Debug, Clone, PartialEq)]
pub struct DailyProfileSet {
    profiles: Array2<f64>,
}

impl DailyProfileSet {
    pub fn new(profiles: Array2<f64>) -> Result<Self> {
        if profiles.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::BadParams("profiles must be finite and non-negative".into()));
        }
        Ok(Self { profiles })
    }

    pub fn profiles(&self) -> &Array2<f64> {
        &self.profiles
    }

    pub fn bins(&self) -> usize {
        self.profiles.ncols()
    }
}

/// Number of consecutive time-of-day slots averaged into one profile bin.
pub const POOL_WIDTH: usize = 3;

/// Averages each link's speed per time-of-day slot over the training series,
/// then mean-pools consecutive triples of slots (288 slots become 96 bins).
pub fn daily_profiles(train: &SpeedSeries) -> Result<DailyProfileSet> {
    let steps_per_day = train.steps_per_day();
    if !steps_per_day.is_multiple_of(POOL_WIDTH) {
        return Err(Error::NotDivisibleByThree(steps_per_day));
    }
    train.require_full_day()?;
    let n = train.num_links();
    let mut sums = Array2::<f64>::zeros((n, steps_per_day));
    let mut counts = vec![0usize; steps_per_day];
    for (t, row) in train.values().axis_iter(Axis(0)).enumerate() {
        let slot = train.time_of_day(t);
        counts[slot] += 1;
        sums.column_mut(slot).zip_mut_with(&row, |s, &v| *s += v);
    }
    let bins = steps_per_day / POOL_WIDTH;
    let profiles = Array2::from_shape_fn((n, bins), |(link, bin)| {
        let slots = bin * POOL_WIDTH..(bin + 1) * POOL_WIDTH;
        slots.map(|s| sums[[link, s]] / counts[s] as f64).sum::<f64>() / POOL_WIDTH as f64
    });
    DailyProfileSet::new(profiles)
}

/// Pairwise Euclidean distances between link profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalDifference {
    values: Array2<f64>,
    profile_bins: usize,
}

impl TemporalDifference {
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn profile_bins(&self) -> usize {
        self.profile_bins
    }

    pub fn size(&self) -> usize {
        self.values.nrows()
    }

    /// Wraps an externally computed distance matrix; must be symmetric,
    /// non-negative, with zero diagonal.
    pub fn from_matrix(values: Array2<f64>, profile_bins: usize) -> Result<Self> {
        let n = values.nrows();
        if values.ncols() != n {
            return Err(Error::ShapeMismatch(format!("difference matrix is {:?}", values.dim())));
        }
        for i in 0..n {
            if values[[i, i]] != 0.0 {
                return Err(Error::BadParams(format!("diagonal entry {i} is nonzero")));
            }
            for j in 0..n {
                let q = values[[i, j]];
                if !(q.is_finite() && q >= 0.0) || q != values[[j, i]] {
                    return Err(Error::NonSymmetric(format!("entry ({i},{j}) = {q}")));
                }
            }
        }
        Ok(Self { values, profile_bins })
    }
}

pub fn temporal_difference(profiles: &DailyProfileSet) -> TemporalDifference {
    let p = profiles.profiles();
    let n = p.nrows();
    let mut values = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let d = p
                .row(i)
                .iter()
                .zip(p.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            values[[i, j]] = d;
            values[[j, i]] = d;
        }
    }
    TemporalDifference {
        values,
        profile_bins: profiles.bins(),
    }
}

/// Long-term temporal masks: the raw per-row top-gamma selection and its
/// OR-symmetrization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LongTermMasks {
    pub row_wise: BinaryMask,
    pub symmetric: BinaryMask,
}

impl LongTermMasks {
    pub fn select(&self, symmetrize: bool) -> &BinaryMask {
        if symmetrize {
            &self.symmetric
        } else {
            &self.row_wise
        }
    }
}

/// Row i marks the `gamma` links with the smallest `Q[i][j]`, `j != i`.
/// Ties go to the smaller link index.
pub fn long_term_similarity(q: &TemporalDifference, gamma: usize) -> Result<LongTermMasks> {
    let n = q.size();
    if gamma < 1 || gamma + 1 > n {
        return Err(Error::BadGamma {
            gamma,
            max: n.saturating_sub(1),
        });
    }
    let qv = q.values();
    let mut row_wise = Array2::<u8>::zeros((n, n));
    for i in 0..n {
        let mut candidates: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        candidates.sort_by(|&a, &b| qv[[i, a]].total_cmp(&qv[[i, b]]).then(a.cmp(&b)));
        for &j in &candidates[..gamma] {
            row_wise[[i, j]] = 1;
        }
    }
    let symmetric = Array2::from_shape_fn((n, n), |(i, j)| row_wise[[i, j]] | row_wise[[j, i]]);
    Ok(LongTermMasks {
        row_wise: BinaryMask::new(row_wise, MaskKind::LongTerm, None)?,
        symmetric: BinaryMask::new(symmetric, MaskKind::LongTerm, None)?,
    })
}

/// Element-wise sum of a geographic mask and a long-term mask.
pub fn glt_similarity(geographic: &BinaryMask, long_term: &BinaryMask) -> Result<BinaryMask> {
    geographic.expect_kind(MaskKind::Geographic)?;
    long_term.expect_kind(MaskKind::LongTerm)?;
    geographic.same_size(long_term)?;
    BinaryMask::new(&geographic.values + &long_term.values, MaskKind::Glt, geographic.hop)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeFlowParams {
    pub free_flow_mph: f64,
    pub delta_t_minutes: f64,
    /// Number of `delta_t` intervals considered.
    pub intervals: u32,
}

impl Default for FreeFlowParams {
    fn default() -> Self {
        Self {
            free_flow_mph: 60.0,
            delta_t_minutes: 20.0,
            intervals: 1,
        }
    }
}

impl FreeFlowParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.free_flow_mph.is_finite()
            && self.free_flow_mph > 0.0
            && self.delta_t_minutes.is_finite()
            && self.delta_t_minutes > 0.0
            && self.intervals >= 1;
        if !ok {
            return Err(Error::BadParams(format!("free-flow parameters {self:?}")));
        }
        Ok(())
    }

    /// Miles covered at free-flow speed in `intervals · delta_t`.
    pub fn reach_miles(&self) -> f64 {
        self.free_flow_mph * self.intervals as f64 * self.delta_t_minutes / 60.0
    }
}

/// All-pairs roadway distances. Off-diagonal zeros are unknown distances and
/// are filled with the shortest path over adjacency edges; unreachable pairs
/// become infinite. Known positive entries are kept as given.
pub fn complete_distances(network: &RoadNetworkSpec) -> Array2<f64> {
    let given = network.distance();
    let n = network.num_links();
    let sparse = (0..n).any(|i| (0..n).any(|j| i != j && given[[i, j]] == 0.0));
    if !sparse {
        return given.clone();
    }
    let adj = network.adjacency();
    let mut dist = Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            0.0
        } else if adj[[i, j]] == 1 {
            given[[i, j]]
        } else {
            f64::INFINITY
        }
    });
    for m in 0..n {
        for i in 0..n {
            let dim = dist[[i, m]];
            if dim.is_infinite() {
                continue;
            }
            for j in 0..n {
                let through = dim + dist[[m, j]];
                if through < dist[[i, j]] {
                    dist[[i, j]] = through;
                }
            }
        }
    }
    Array2::from_shape_fn((n, n), |(i, j)| if given[[i, j]] > 0.0 { given[[i, j]] } else { dist[[i, j]] })
}

/// 1 where `free_flow_mph · intervals · delta_t ≥ distance`.
pub fn free_flow_reachable(distance: &Array2<f64>, params: &FreeFlowParams) -> Result<BinaryMask> {
    params.validate()?;
    let (r, c) = distance.dim();
    if r != c {
        return Err(Error::ShapeMismatch(format!("distance matrix is {r}x{c}")));
    }
    if distance.iter().any(|d| d.is_nan() || *d < 0.0) {
        return Err(Error::BadParams("distances must be non-negative".into()));
    }
    let reach = params.reach_miles();
    BinaryMask::new(distance.mapv(|d| u8::from(reach >= d)), MaskKind::FreeFlow, None)
}

/// Hadamard product of the GLT mask and the free-flow mask, clipped to {0, 1}.
pub fn ultimate_similarity(glt: &BinaryMask, free_flow: &BinaryMask) -> Result<BinaryMask> {
    glt.expect_kind(MaskKind::Glt)?;
    free_flow.expect_kind(MaskKind::FreeFlow)?;
    glt.same_size(free_flow)?;
    let mut values = &glt.values * &free_flow.values;
    values.mapv_inplace(|v| v.min(1));
    BinaryMask::new(values, MaskKind::Ultimate, glt.hop)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphConfig {
    pub hops: usize,
    pub gamma: usize,
    pub free_flow: FreeFlowParams,
    pub symmetrize: bool,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            hops: 3,
            gamma: 3,
            free_flow: FreeFlowParams::default(),
            symmetrize: true,
        }
    }
}

/// Every intermediate and final mask for one network and training series.
#[derive(Debug, Clone)]
pub struct GltGraph {
    pub config: GraphConfig,
    pub geographic: Vec<BinaryMask>,
    pub profiles: DailyProfileSet,
    pub difference: TemporalDifference,
    pub long_term: LongTermMasks,
    pub glt: Vec<BinaryMask>,
    pub free_flow: BinaryMask,
    pub ultimate: Vec<BinaryMask>,
}

pub fn build_graph(network: &RoadNetworkSpec, train: &SpeedSeries, config: &GraphConfig) -> Result<GltGraph> {
    if config.hops < 1 {
        return Err(Error::BadK(config.hops));
    }
    if network.num_links() != train.num_links() {
        return Err(Error::ShapeMismatch(format!(
            "network has {} links, series has {}",
            network.num_links(),
            train.num_links()
        )));
    }
    let geographic = (1..=config.hops)
        .map(|k| k_hop_similarity(network.adjacency(), k))
        .collect::<Result<Vec<_>>>()?;
    let profiles = daily_profiles(train)?;
    let difference = temporal_difference(&profiles);
    let long_term = long_term_similarity(&difference, config.gamma)?;
    let glt = geographic
        .iter()
        .map(|g| glt_similarity(g, long_term.select(config.symmetrize)))
        .collect::<Result<Vec<_>>>()?;
    let free_flow = free_flow_reachable(&complete_distances(network), &config.free_flow)?;
    let ultimate = glt
        .iter()
        .map(|m| ultimate_similarity(m, &free_flow))
        .collect::<Result<Vec<_>>>()?;
    Ok(GltGraph {
        config: *config,
        geographic,
        profiles,
        difference,
        long_term,
        glt,
        free_flow,
        ultimate,
    })
}

impl GltGraph {
    /// Writes every mask as an N×N CSV plus `manifest.txt`, one line per mask.
    /// Returns the mask file paths in manifest order.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let lt = self.long_term.select(self.config.symmetrize);
        let mut entries: Vec<(String, &BinaryMask)> = Vec::new();
        for (k, m) in self.geographic.iter().enumerate() {
            entries.push((format!("s_g_{}.csv", k + 1), m));
        }
        entries.push(("s_lt.csv".into(), lt));
        for (k, m) in self.glt.iter().enumerate() {
            entries.push((format!("s_glt_{}.csv", k + 1), m));
        }
        entries.push(("s_f.csv".into(), &self.free_flow));
        for (k, m) in self.ultimate.iter().enumerate() {
            entries.push((format!("s_u_{}.csv", k + 1), m));
        }

        let ff = &self.config.free_flow;
        let mut manifest = String::new();
        let mut paths = Vec::with_capacity(entries.len());
        for (name, mask) in entries {
            let path = dir.join(&name);
            write_matrix_csv(mask.values(), &path)?;
            let k = mask.hop.map_or_else(|| "-".to_string(), |k| k.to_string());
            manifest.push_str(&format!(
                "file={name} kind={} k={k} gamma={} delta_t={} m={} v={} symmetrize={} nonzero={}\n",
                mask.kind,
                self.config.gamma,
                ff.delta_t_minutes,
                ff.intervals,
                ff.free_flow_mph,
                self.config.symmetrize,
                mask.nonzero_count()
            ));
            paths.push(path);
        }
        let path = dir.join("manifest.txt");
        fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
        Ok(paths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn chain3() -> Array2<u8> {
        array![[0, 1, 0], [1, 0, 1], [0, 1, 0]]
    }

    #[test]
    fn one_hop_chain() {
        let m = k_hop_similarity(&chain3(), 1).unwrap();
        assert_eq!(m.values(), &array![[1, 1, 0], [1, 1, 1], [0, 1, 1]]);
        assert_eq!(m.hop(), Some(1));
    }

    #[test]
    fn two_hop_chain_is_complete() {
        let m = k_hop_similarity(&chain3(), 2).unwrap();
        assert_eq!(m.values(), &Array2::<u8>::ones((3, 3)));
    }

    #[test]
    fn k_hop_errors() {
        assert!(matches!(k_hop_similarity(&chain3(), 0), Err(Error::BadK(0))));
        let asym = array![[0u8, 1], [0, 0]];
        assert!(matches!(k_hop_similarity(&asym, 1), Err(Error::NonSymmetric(_))));
    }

    #[test]
    fn constant_profiles() {
        let s = SpeedSeries::new(Array2::from_elem((288 * 2, 3), 60.0), 5, 0).unwrap();
        let p = daily_profiles(&s).unwrap();
        assert_eq!(p.bins(), 96);
        assert!(p.profiles().iter().all(|&v| v == 60.0));
    }

    #[test]
    fn profile_bin_is_triple_mean() {
        let mut v = Array2::from_elem((288, 2), 50.0);
        v[[0, 1]] = 30.0;
        v[[1, 1]] = 60.0;
        v[[2, 1]] = 90.0;
        let s = SpeedSeries::new(v.clone(), 5, 0).unwrap();
        let p = daily_profiles(&s).unwrap();
        assert_eq!(p.profiles()[[1, 0]], 60.0);

        let two_days = ndarray::concatenate(Axis(0), &[v.view(), v.view()]).unwrap();
        let p2 = daily_profiles(&SpeedSeries::new(two_days, 5, 0).unwrap()).unwrap();
        assert_eq!(p2, p);
    }

    #[test]
    fn profiles_respect_start_offset() {
        // Same day, rotated by 5 slots and tagged with start index 5.
        let day = Array2::from_shape_fn((288, 2), |(t, j)| (t + j) as f64);
        let rotated = Array2::from_shape_fn((288, 2), |(t, j)| day[[(t + 5) % 288, j]]);
        let a = daily_profiles(&SpeedSeries::new(day, 5, 0).unwrap()).unwrap();
        let b = daily_profiles(&SpeedSeries::new(rotated, 5, 5).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn profile_errors() {
        let s = SpeedSeries::new(Array2::ones((10, 2)), 5, 0).unwrap();
        assert!(matches!(daily_profiles(&s), Err(Error::TooShort(_))));
        // 1440 / 360 = 4 slots per day, not divisible by three.
        let s = SpeedSeries::new(Array2::ones((8, 2)), 360, 0).unwrap();
        assert!(matches!(daily_profiles(&s), Err(Error::NotDivisibleByThree(4))));
    }

    #[test]
    fn unit_offset_distance() {
        let base = Array2::from_shape_fn((2, 96), |(i, b)| 40.0 + b as f64 * 0.1 + i as f64);
        let q = temporal_difference(&DailyProfileSet::new(base).unwrap());
        assert!((q.values()[[0, 1]] - 96f64.sqrt()).abs() < 1e-12);
        assert_eq!(q.values()[[0, 1]], q.values()[[1, 0]]);
        assert_eq!(q.values()[[0, 0]], 0.0);
    }

    fn q3() -> TemporalDifference {
        TemporalDifference::from_matrix(array![[0.0, 1.0, 5.0], [1.0, 0.0, 2.0], [5.0, 2.0, 0.0]], 96).unwrap()
    }

    #[test]
    fn top_gamma_small_case() {
        let lt = long_term_similarity(&q3(), 1).unwrap();
        assert_eq!(lt.row_wise.values(), &array![[0, 1, 0], [1, 0, 0], [0, 1, 0]]);
        assert_eq!(lt.symmetric.values(), &array![[0, 1, 0], [1, 0, 1], [0, 1, 0]]);
    }

    #[test]
    fn gamma_bounds() {
        let full = long_term_similarity(&q3(), 2).unwrap();
        assert_eq!(full.symmetric.values(), &array![[0, 1, 1], [1, 0, 1], [1, 1, 0]]);
        assert!(matches!(long_term_similarity(&q3(), 0), Err(Error::BadGamma { .. })));
        assert!(matches!(long_term_similarity(&q3(), 3), Err(Error::BadGamma { .. })));
    }

    #[test]
    fn ties_break_by_index() {
        // Links 0 and 1 are equidistant from everyone else.
        let q = TemporalDifference::from_matrix(
            array![
                [0.0, 0.0, 3.0, 3.0],
                [0.0, 0.0, 3.0, 3.0],
                [3.0, 3.0, 0.0, 1.0],
                [3.0, 3.0, 1.0, 0.0]
            ],
            96,
        )
        .unwrap();
        let lt = long_term_similarity(&q, 2).unwrap();
        assert_eq!(lt.row_wise.values().row(0).to_vec(), vec![0, 1, 1, 0]);
        assert_eq!(lt.row_wise.values().row(1).to_vec(), vec![1, 0, 1, 0]);
        assert_eq!(lt.row_wise.values().row(2).to_vec(), vec![1, 0, 0, 1]);
    }

    #[test]
    fn glt_sum() {
        let g = k_hop_similarity(&chain3(), 1).unwrap();
        let zero = BinaryMask::new(Array2::zeros((3, 3)), MaskKind::LongTerm, None).unwrap();
        assert_eq!(glt_similarity(&g, &zero).unwrap().values(), g.values());
        let lt = long_term_similarity(&q3(), 1).unwrap().symmetric;
        let glt = glt_similarity(&g, &lt).unwrap();
        assert_eq!(glt.values()[[0, 1]], 2);
        assert_eq!(glt.values()[[0, 2]], 0);
        let big = BinaryMask::new(Array2::zeros((4, 4)), MaskKind::LongTerm, None).unwrap();
        assert!(matches!(glt_similarity(&g, &big), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn free_flow_goldens() {
        let params = FreeFlowParams::default();
        assert_eq!(params.reach_miles(), 20.0);
        let d = array![[0.0, 15.0, 25.0], [15.0, 0.0, 10.0], [25.0, 10.0, 0.0]];
        let m = free_flow_reachable(&d, &params).unwrap();
        assert_eq!(m.values(), &array![[1, 1, 0], [1, 1, 1], [0, 1, 1]]);
        let bad = FreeFlowParams {
            intervals: 0,
            ..params
        };
        assert!(matches!(free_flow_reachable(&d, &bad), Err(Error::BadParams(_))));
    }

    #[test]
    fn sparse_distances_completed() {
        let net = RoadNetworkSpec::new(
            array![[0u8, 1, 0, 0], [1, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 0]],
            array![[0.0, 2.0, 0.0, 0.0], [2.0, 0.0, 3.5, 0.0], [0.0, 3.5, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]],
        )
        .unwrap();
        let d = complete_distances(&net);
        assert_eq!(d[[0, 2]], 5.5);
        assert!(d[[0, 3]].is_infinite());
        let m = free_flow_reachable(&d, &FreeFlowParams::default()).unwrap();
        assert!(!m.contains(0, 3));
        assert!(m.contains(3, 3));
    }

    #[test]
    fn ultimate_masks() {
        let glt = BinaryMask::new(array![[2, 1, 0], [1, 1, 2], [0, 2, 1]], MaskKind::Glt, Some(1)).unwrap();
        let ones = BinaryMask::new(Array2::ones((3, 3)), MaskKind::FreeFlow, None).unwrap();
        let u = ultimate_similarity(&glt, &ones).unwrap();
        assert_eq!(u.values(), &array![[1, 1, 0], [1, 1, 1], [0, 1, 1]]);
        let eye = BinaryMask::new(Array2::eye(3), MaskKind::FreeFlow, None).unwrap();
        assert_eq!(ultimate_similarity(&glt, &eye).unwrap().values(), &Array2::<u8>::eye(3));
        assert!(ultimate_similarity(&ones, &glt).is_err());
    }

    #[test]
    fn writes_eleven_masks_for_three_hops() {
        let (series, net) =
            crate::data::generate_synthetic(&crate::data::SynthConfig::new(8, 2, 4, crate::data::Topology::Ring)).unwrap();
        let graph = build_graph(&net, &series, &GraphConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = graph.write(dir.path()).unwrap();
        assert_eq!(files.len(), 11);
        let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
        assert_eq!(manifest.lines().count(), 11);
        assert!(manifest.lines().next().unwrap().starts_with("file=s_g_1.csv kind=geographic k=1 gamma=3"));
    }
}
