//! Seeded generation of cross-and-bouquet problem instances.
//!
//! An instance is `y = A x0 + e0`: the columns of `A` are iid Gaussian
//! `N(mu, (nu^2/m) I)` draws around a unit mean `mu` with `|mu|_inf <=
//! c_mu / sqrt(m)`, `x0 >= 0` is sparse with support `I`, and `e0` has
//! support `J` with signs `sigma`. Defaults follow the simulation
//! conventions: `x0` entries are 1.0 and `e0` entries are +-1.0, with an
//! opt-in magnitude randomization used by sign-support invariance tests.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, DenseMatrix, DenseVector};
use crate::rng::{domain, sub_seed, CabRng};

/// How the bouquet mean is constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MeanKind {
    /// The flat vector `1/sqrt(m) * ones`; satisfies the constraints with
    /// `c_mu = 1` and is the default.
    #[default]
    Flat,
    /// A seeded random unit vector, resampled until `|mu|_inf <= c_mu /
    /// sqrt(m)`. Needs `c_mu` around `sqrt(2 ln m)` or larger to terminate.
    PerturbedFlat,
}

/// Generative knobs for one problem family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Ambient dimension (rows of `A`).
    pub m: usize,
    /// Bouquet size (columns of `A`).
    pub n: usize,
    /// Bouquet tightness: per-entry standard deviation is `nu / sqrt(m)`.
    pub nu: f64,
    /// Mean flatness bound: `|mu|_inf <= c_mu / sqrt(m)`.
    pub c_mu: f64,
    /// Signal support size.
    pub k1: usize,
    /// Error density in `[0, 1]`; the realized support size is `floor(rho*m)`.
    pub rho: f64,
    /// Reproducibility seed.
    pub seed: u64,
    #[serde(default)]
    pub mean_kind: MeanKind,
    /// Replace the unit magnitudes of `x0` and `e0` by seeded draws from
    /// `[0.5, 2.0]` (signs of `e0` preserved).
    #[serde(default)]
    pub randomize_magnitudes: bool,
}

impl ModelParams {
    pub fn new(m: usize, n: usize, nu: f64, k1: usize, rho: f64, seed: u64) -> Self {
        ModelParams {
            m,
            n,
            nu,
            c_mu: 1.0,
            k1,
            rho,
            seed,
            mean_kind: MeanKind::Flat,
            randomize_magnitudes: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 || self.n < 1 {
            return Err(Error::InvalidParameter(format!(
                "m and n must be >= 1, got m={} n={}",
                self.m, self.n
            )));
        }
        if self.k1 < 1 || self.k1 > self.n {
            return Err(Error::InvalidParameter(format!(
                "k1 must satisfy 1 <= k1 <= n, got k1={} n={}",
                self.k1, self.n
            )));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter(format!("rho must be in [0,1], got {}", self.rho)));
        }
        if !(self.nu > 0.0) {
            return Err(Error::InvalidParameter(format!("nu must be > 0, got {}", self.nu)));
        }
        if !(self.c_mu >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "c_mu must be >= 1 (a unit vector has an entry >= 1/sqrt(m)), got {}",
                self.c_mu
            )));
        }
        Ok(())
    }

    /// Error support size `floor(rho * m)`, with a small tolerance so grid
    /// values like `0.7 * 10` land on the intended integer.
    pub fn k2(&self) -> usize {
        ((self.rho * self.m as f64) + 1e-9).floor() as usize
    }

    /// Aspect ratio `n / m`.
    pub fn delta(&self) -> f64 {
        self.n as f64 / self.m as f64
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Weak-proportional-growth dimensions: `n = round(delta * m)` and
/// `k1 = round(c0 * m^(1 - eta0))`, both at least 1 and `k1` capped at `n`.
pub fn wpg_dimensions(delta: f64, c0: f64, eta0: f64, m: usize) -> (usize, usize) {
    let n = ((delta * m as f64).round() as usize).max(1);
    let k1 = ((c0 * (m as f64).powf(1.0 - eta0)).round() as usize).clamp(1, n);
    (n, k1)
}

/// Sign-and-support data of one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportPattern {
    /// Signal support, sorted, subset of `[n]` (0-based).
    pub i: Vec<usize>,
    /// Error support, sorted, subset of `[m]` (0-based).
    pub j: Vec<usize>,
    /// Error signs, one per element of `j`, each +-1.
    pub sigma: Vec<i8>,
}

impl SupportPattern {
    pub fn validate(&self, m: usize, n: usize, k1: usize, k2: usize) -> Result<()> {
        let sorted_in = |v: &[usize], bound: usize| {
            v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|&x| x < bound)
        };
        if self.i.len() != k1 || !sorted_in(&self.i, n) {
            return Err(Error::InvalidParameter("bad signal support I".to_string()));
        }
        if self.j.len() != k2 || !sorted_in(&self.j, m) {
            return Err(Error::InvalidParameter("bad error support J".to_string()));
        }
        if self.sigma.len() != k2 || !self.sigma.iter().all(|&s| s == 1 || s == -1) {
            return Err(Error::InvalidParameter("bad sign vector sigma".to_string()));
        }
        Ok(())
    }
}

/// One realized problem.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub params: ModelParams,
    pub mu: DenseVector,
    pub a: DenseMatrix,
    pub x0: DenseVector,
    pub e0: DenseVector,
    pub y: DenseVector,
    pub pattern: SupportPattern,
}

const MAX_MEAN_RESAMPLES: usize = 10_000;

/// Bouquet mean: unit l2 norm and `|mu|_inf <= c_mu / sqrt(m)`.
pub fn make_mean(m: usize, c_mu: f64, kind: MeanKind, seed: u64) -> Result<DenseVector> {
    if m < 1 {
        return Err(Error::InvalidParameter("m must be >= 1".to_string()));
    }
    if !(c_mu >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "c_mu must be >= 1 (a unit vector has an entry >= 1/sqrt(m)), got {c_mu}"
        )));
    }
    match kind {
        MeanKind::Flat => {
            let raw = 1.0 / (m as f64).sqrt();
            let norm = (raw * raw * m as f64).sqrt();
            DenseVector::from_entries(vec![raw / norm; m])
        }
        MeanKind::PerturbedFlat => {
            let mut rng = CabRng::new(seed);
            let bound = c_mu / (m as f64).sqrt();
            for _ in 0..MAX_MEAN_RESAMPLES {
                let mut entries: Vec<f64> = (0..m).map(|_| rng.standard_normal()).collect();
                let norm = entries.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm == 0.0 {
                    continue;
                }
                for x in &mut entries {
                    *x /= norm;
                }
                if entries.iter().all(|x| x.abs() <= bound) {
                    return DenseVector::from_entries(entries);
                }
            }
            Err(Error::InvalidParameter(format!(
                "no unit vector with |mu|_inf <= {c_mu}/sqrt({m}) found in {MAX_MEAN_RESAMPLES} resamples; increase c_mu"
            )))
        }
    }
}

/// Samples the bouquet: column `i` is `mu + z_i` with `z_i` iid Gaussian of
/// per-entry variance `nu^2 / m`.
pub fn sample_bouquet(mu: &DenseVector, nu: f64, n: usize, seed: u64) -> Result<DenseMatrix> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("nu must be > 0, got {nu}")));
    }
    if (mu.norm_l2() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "mean must be unit norm, got |mu|_2 = {}",
            mu.norm_l2()
        )));
    }
    let m = mu.dim();
    let sigma = nu / (m as f64).sqrt();
    let mut rng = CabRng::new(seed);
    let mut entries = Vec::with_capacity(m * n);
    for _ in 0..n {
        for r in 0..m {
            entries.push(mu.get(r) + sigma * rng.standard_normal());
        }
    }
    DenseMatrix::from_column_major(m, n, entries)
}

/// Uniform sign-and-support pattern: `I` uniform over size-`k1` subsets of
/// `[n]`, `J` uniform over size-`k2` subsets of `[m]`, signs iid +-1.
pub fn sample_pattern(params: &ModelParams, seed: u64) -> Result<SupportPattern> {
    params.validate()?;
    let k2 = params.k2();
    let mut rng = CabRng::new(seed);
    let i = rng.subset(params.n, params.k1);
    let j = rng.subset(params.m, k2);
    let sigma: Vec<i8> = (0..k2).map(|_| if rng.sign() > 0.0 { 1 } else { -1 }).collect();
    Ok(SupportPattern { i, j, sigma })
}

/// Builds the signal and error vectors for a pattern.
///
/// Unit magnitudes by default; with `randomize_magnitudes` the values are
/// seeded draws from `[0.5, 2.0]` (error signs preserved).
pub fn realize_signals(
    pattern: &SupportPattern,
    m: usize,
    n: usize,
    randomize: bool,
    seed: u64,
) -> (DenseVector, DenseVector) {
    let mut rng = CabRng::new(seed);
    let mut x0 = vec![0.0; n];
    for &idx in &pattern.i {
        x0[idx] = if randomize { rng.uniform_in(0.5, 2.0) } else { 1.0 };
    }
    let mut e0 = vec![0.0; m];
    for (&idx, &s) in pattern.j.iter().zip(&pattern.sigma) {
        let magnitude = if randomize { rng.uniform_in(0.5, 2.0) } else { 1.0 };
        e0[idx] = s as f64 * magnitude;
    }
    (
        DenseVector::from_entries(x0).expect("finite by construction"),
        DenseVector::from_entries(e0).expect("finite by construction"),
    )
}

/// Generates a full instance from the parameters; deterministic in
/// `(params, seed)`. Invariants are checked before returning.
pub fn synthesize(params: &ModelParams) -> Result<ProblemInstance> {
    params.validate()?;
    let mu = make_mean(
        params.m,
        params.c_mu,
        params.mean_kind,
        sub_seed(params.seed, &[domain::MEAN]),
    )?;
    let a = sample_bouquet(&mu, params.nu, params.n, sub_seed(params.seed, &[domain::BOUQUET]))?;
    let pattern = sample_pattern(params, sub_seed(params.seed, &[domain::PATTERN]))?;
    let instance = instantiate(params.clone(), mu, a, pattern)?;
    Ok(instance)
}

/// Assembles an instance from pre-sampled pieces and validates it. Useful
/// for re-realizing magnitudes over a fixed `(A, I, J, sigma)`.
pub fn instantiate(
    params: ModelParams,
    mu: DenseVector,
    a: DenseMatrix,
    pattern: SupportPattern,
) -> Result<ProblemInstance> {
    let (x0, e0) = realize_signals(
        &pattern,
        params.m,
        params.n,
        params.randomize_magnitudes,
        sub_seed(params.seed, &[domain::MAGNITUDE]),
    );
    let y = DenseVector::from_na_unchecked(a.inner() * x0.inner() + e0.inner());
    let instance = ProblemInstance {
        params,
        mu,
        a,
        x0,
        e0,
        y,
        pattern,
    };
    instance.check_invariants()?;
    Ok(instance)
}

impl ProblemInstance {
    pub fn check_invariants(&self) -> Result<()> {
        let p = &self.params;
        p.validate()?;
        let k2 = p.k2();
        self.pattern.validate(p.m, p.n, p.k1, k2)?;
        if self.mu.dim() != p.m
            || self.a.rows() != p.m
            || self.a.cols() != p.n
            || self.x0.dim() != p.n
            || self.e0.dim() != p.m
            || self.y.dim() != p.m
        {
            return Err(Error::DimensionMismatch("instance field dimensions".to_string()));
        }
        if (self.mu.norm_l2() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "|mu|_2 = {} is not 1",
                self.mu.norm_l2()
            )));
        }
        let inf_bound = p.c_mu / (p.m as f64).sqrt() * (1.0 + 1e-12);
        if self.mu.norm_inf() > inf_bound {
            return Err(Error::InvalidParameter(format!(
                "|mu|_inf = {} exceeds c_mu m^(-1/2) = {inf_bound}",
                self.mu.norm_inf()
            )));
        }
        if self.x0.iter().any(|&x| x < 0.0) {
            return Err(Error::InvalidParameter("x0 has negative entries".to_string()));
        }
        if self.x0.support() != self.pattern.i {
            return Err(Error::InvalidParameter("supp(x0) != I".to_string()));
        }
        if self.e0.support() != self.pattern.j {
            return Err(Error::InvalidParameter("supp(e0) != J".to_string()));
        }
        for (&idx, &s) in self.pattern.j.iter().zip(&self.pattern.sigma) {
            if (self.e0.get(idx) > 0.0) != (s > 0) {
                return Err(Error::InvalidParameter("sgn(e0 on J) != sigma".to_string()));
            }
        }
        let recomputed = self.a.inner() * self.x0.inner() + self.e0.inner();
        if recomputed != *self.y.inner() {
            return Err(Error::InvalidParameter("y != A x0 + e0".to_string()));
        }
        Ok(())
    }
}

/// `params.json` payload: all model parameters plus the derived quantities.
#[derive(Debug, Serialize, Deserialize)]
struct ParamsFile {
    #[serde(flatten)]
    params: ModelParams,
    k2: usize,
    delta: f64,
}

/// Writes an instance as a directory: `params.json`, `pattern.json` and the
/// matrices/vectors in the shared text format.
pub fn save_instance(dir: &Path, instance: &ProblemInstance) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let params_file = ParamsFile {
        params: instance.params.clone(),
        k2: instance.params.k2(),
        delta: instance.params.delta(),
    };
    let params_json = serde_json::to_string_pretty(&params_file)
        .map_err(|e| Error::Parse { path: "params.json".to_string(), message: e.to_string() })?;
    let write_text = |name: &str, body: &str| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(path.display().to_string(), e))
    };
    write_text("params.json", &params_json)?;
    let pattern_json = serde_json::to_string_pretty(&instance.pattern)
        .map_err(|e| Error::Parse { path: "pattern.json".to_string(), message: e.to_string() })?;
    write_text("pattern.json", &pattern_json)?;
    numerics::write_matrix(&dir.join("A.mat"), &instance.a)?;
    numerics::write_vector(&dir.join("mu.mat"), &instance.mu)?;
    numerics::write_vector(&dir.join("x0.mat"), &instance.x0)?;
    numerics::write_vector(&dir.join("e0.mat"), &instance.e0)?;
    numerics::write_vector(&dir.join("y.mat"), &instance.y)?;
    Ok(())
}

/// Reads an instance directory written by [`save_instance`], re-checking
/// all invariants.
pub fn load_instance(dir: &Path) -> Result<ProblemInstance> {
    let read_json = |name: &str| -> Result<String> {
        let path = dir.join(name);
        std::fs::read_to_string(&path).map_err(|e| Error::io(path.display().to_string(), e))
    };
    let params_file: ParamsFile = serde_json::from_str(&read_json("params.json")?)
        .map_err(|e| Error::parse(dir.join("params.json").display().to_string(), e.to_string()))?;
    let pattern: SupportPattern = serde_json::from_str(&read_json("pattern.json")?)
        .map_err(|e| Error::parse(dir.join("pattern.json").display().to_string(), e.to_string()))?;
    let instance = ProblemInstance {
        params: params_file.params,
        a: numerics::read_matrix(&dir.join("A.mat"))?,
        mu: numerics::read_vector(&dir.join("mu.mat"))?,
        x0: numerics::read_vector(&dir.join("x0.mat"))?,
        e0: numerics::read_vector(&dir.join("e0.mat"))?,
        y: numerics::read_vector(&dir.join("y.mat"))?,
        pattern,
    };
    instance.check_invariants()?;
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_mean_is_the_c1_solution() {
        let mu = make_mean(4, 1.0, MeanKind::Flat, 0).unwrap();
        for i in 0..4 {
            assert!((mu.get(i) - 0.5).abs() <= 1e-15);
        }
        let mu1 = make_mean(1, 1.0, MeanKind::Flat, 0).unwrap();
        assert!((mu1.get(0) - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn mean_rejects_infeasible_c_mu() {
        assert!(make_mean(4, 0.9, MeanKind::Flat, 0).is_err());
    }

    #[test]
    fn perturbed_mean_satisfies_constraints() {
        let mu = make_mean(100, 2.0, MeanKind::PerturbedFlat, 7).unwrap();
        assert!((mu.norm_l2() - 1.0).abs() <= 1e-12);
        assert!(mu.norm_inf() <= 0.2 + 1e-15);
    }

    #[test]
    fn bouquet_degenerate_variance_matches_mean() {
        let mu = make_mean(30, 1.0, MeanKind::Flat, 0).unwrap();
        let a = sample_bouquet(&mu, 1e-12, 5, 3).unwrap();
        for j in 0..5 {
            for r in 0..30 {
                assert!((a.get(r, j) - mu.get(r)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn bouquet_is_deterministic() {
        let mu = make_mean(20, 1.0, MeanKind::Flat, 0).unwrap();
        let a1 = sample_bouquet(&mu, 0.3, 8, 42).unwrap();
        let a2 = sample_bouquet(&mu, 0.3, 8, 42).unwrap();
        assert_eq!(a1.as_slice(), a2.as_slice());
    }

    #[test]
    fn bouquet_moments_match_model() {
        // moment oracle by direct averaging over 50 seeds
        let (m, n, nu) = (400, 200, 0.3);
        let mu = make_mean(m, 1.0, MeanKind::Flat, 0).unwrap();
        let sigma_sq = nu * nu / m as f64;
        let mut count = 0usize;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for seed in 0..50u64 {
            let a = sample_bouquet(&mu, nu, n, seed).unwrap();
            for j in 0..n {
                for r in 0..m {
                    let z = a.get(r, j) - mu.get(r);
                    count += 1;
                    sum += z;
                    sum_sq += z * z;
                }
            }
        }
        let mean = sum / count as f64;
        let se = (sigma_sq / count as f64).sqrt();
        assert!(mean.abs() <= 4.0 * se, "mean {mean} vs 4se {}", 4.0 * se);
        let var = sum_sq / count as f64 - mean * mean;
        assert!((var - sigma_sq).abs() <= 0.1 * sigma_sq, "var {var} vs {sigma_sq}");
    }

    #[test]
    fn pattern_extremes() {
        let params = ModelParams::new(10, 5, 0.1, 2, 0.0, 1);
        let pat = sample_pattern(&params, 1).unwrap();
        assert!(pat.j.is_empty());
        assert!(pat.sigma.is_empty());

        let params = ModelParams::new(10, 5, 0.1, 2, 1.0, 1);
        let pat = sample_pattern(&params, 1).unwrap();
        assert_eq!(pat.j, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn pattern_support_is_uniform() {
        // counting oracle: with m=10, k2=3 every index lands in J with
        // probability 0.3
        let params = ModelParams::new(10, 5, 0.1, 2, 0.3, 1);
        let mut counts = [0usize; 10];
        let trials = 60_000u64;
        for seed in 0..trials {
            let pat = sample_pattern(&params, seed).unwrap();
            assert_eq!(pat.j.len(), 3);
            for &j in &pat.j {
                counts[j] += 1;
            }
        }
        for (idx, &c) in counts.iter().enumerate() {
            let freq = c as f64 / trials as f64;
            assert!((freq - 0.3).abs() <= 0.01, "index {idx} frequency {freq}");
        }
    }

    #[test]
    fn synthesize_single_atom_instances() {
        // k1 = 1, rho = 0: y equals one column of A
        let params = ModelParams::new(12, 4, 0.2, 1, 0.0, 9);
        let inst = synthesize(&params).unwrap();
        let col = inst.a.column(inst.pattern.i[0]);
        assert_eq!(inst.y.as_slice(), col.as_slice());

        // k1 = 1, rho = 1: fully corrupted observation a_i + sigma
        let params = ModelParams::new(12, 4, 0.2, 1, 1.0, 9);
        let inst = synthesize(&params).unwrap();
        let col = inst.a.column(inst.pattern.i[0]);
        for r in 0..12 {
            let expected = col.get(r) + inst.e0.get(r);
            assert_eq!(inst.y.get(r), expected);
        }
    }

    #[test]
    fn synthesize_fig5_regime_invariants() {
        let params = ModelParams::new(500, 125, 0.05, 15, 0.5, 2024);
        let inst = synthesize(&params).unwrap();
        assert_eq!(inst.a.rows(), 500);
        assert_eq!(inst.a.cols(), 125);
        assert_eq!(inst.params.k2(), 250);
        inst.check_invariants().unwrap();
    }

    #[test]
    fn magnitude_randomization_preserves_pattern() {
        let mut params = ModelParams::new(40, 10, 0.1, 3, 0.4, 5);
        params.randomize_magnitudes = true;
        let inst = synthesize(&params).unwrap();
        inst.check_invariants().unwrap();
        for &i in &inst.pattern.i {
            let v = inst.x0.get(i);
            assert!((0.5..=2.0).contains(&v));
        }
    }

    #[test]
    fn wpg_dimensions_round() {
        let (n, k1) = wpg_dimensions(0.25, 1.0, 0.5, 400);
        assert_eq!(n, 100);
        assert_eq!(k1, 20); // 400^(1/2)
    }

    #[test]
    fn k2_grid_values_are_exact() {
        for (rho, m, expected) in [(0.3, 10, 3), (0.7, 10, 7), (0.05, 500, 25), (1.0, 17, 17)] {
            let params = ModelParams::new(m, 4, 0.1, 1, rho, 0);
            assert_eq!(params.k2(), expected, "rho={rho} m={m}");
        }
    }

    #[test]
    fn serialization_roundtrip_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let params = ModelParams::new(25, 8, 0.2, 2, 0.4, 77);
        let inst = synthesize(&params).unwrap();

        let d1 = dir.path().join("a");
        let d2 = dir.path().join("b");
        save_instance(&d1, &inst).unwrap();
        let again = synthesize(&params).unwrap();
        save_instance(&d2, &again).unwrap();
        for name in ["params.json", "pattern.json", "A.mat", "mu.mat", "x0.mat", "e0.mat", "y.mat"] {
            let b1 = std::fs::read(d1.join(name)).unwrap();
            let b2 = std::fs::read(d2.join(name)).unwrap();
            assert_eq!(b1, b2, "file {name} differs between identical runs");
        }

        let loaded = load_instance(&d1).unwrap();
        assert_eq!(loaded.y.as_slice(), inst.y.as_slice());
        assert_eq!(loaded.pattern, inst.pattern);
    }

    #[test]
    fn support_recomputation_matches_pattern() {
        let params = ModelParams::new(30, 9, 0.15, 3, 0.5, 13);
        let inst = synthesize(&params).unwrap();
        assert_eq!(inst.x0.support(), inst.pattern.i);
        assert_eq!(inst.e0.support(), inst.pattern.j);
        let signs: Vec<i8> = inst
            .pattern
            .j
            .iter()
            .map(|&j| if inst.e0.get(j) > 0.0 { 1 } else { -1 })
            .collect();
        assert_eq!(signs, inst.pattern.sigma);
    }
}
