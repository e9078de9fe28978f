//! Seeded finite-sample studies drawn from ground truths.
//!
//! Each group gets its own ChaCha20 streams derived from `(seed, group
//! index)`, so results do not depend on worker count and adding a group
//! leaves earlier groups' draws untouched.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ArmCounts, BenefitVector, CellCounts, ExperimentalData, GroupData, ObservationalData, Study};
use crate::oracle::{ground_truth_to_experimental, ground_truth_to_observational, GroundTruth};

/// Recorded in simulated study files so outputs can be traced to a generator.
pub const RNG_ALGORITHM: &str = "chacha20-stream-per-group/rand_chacha-0.9/binomial-rand_distr-0.5";

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub n_per_arm: u64,
    pub n_observational: u64,
    pub seed: u64,
    /// Emit rounded expected counts instead of sampling.
    pub exact: bool,
    pub groups: Vec<(String, GroundTruth<f64>)>,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_arm == 0 {
            return Err(Error::InvalidConfig("n_per_arm must be at least 1".into()));
        }
        if self.groups.is_empty() {
            return Err(Error::InvalidConfig("no groups configured".into()));
        }
        let mut ids: Vec<&str> = self.groups.iter().map(|(id, _)| id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(format!("duplicate group id `{}`", w[0])));
        }
        if ids.first().is_some_and(|id| id.is_empty()) {
            return Err(Error::InvalidConfig("group id must not be empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substream {
    Experiment,
    Observational,
}

/// Generator for one group's substream.
pub fn group_rng(seed: u64, group_index: usize, substream: Substream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let offset = match substream {
        Substream::Experiment => 0,
        Substream::Observational => 1,
    };
    rng.set_stream(2 * group_index as u64 + offset);
    rng
}

fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    let p = p.clamp(0.0, 1.0);
    if n == 0 || p == 0.0 {
        return 0;
    }
    if p == 1.0 {
        return n;
    }
    Binomial::new(n, p)
        .expect("p is in (0, 1)")
        .sample(rng)
}

/// Draws both RCT arms of size `n_per_arm`.
pub fn sample_experiment<R: Rng + ?Sized>(g: &GroundTruth<f64>, n_per_arm: u64, rng: &mut R) -> ArmCounts {
    let exp = ground_truth_to_experimental(g);
    let treated_y = binomial(n_per_arm, exp.p_y_do_x(), rng);
    let control_y = binomial(n_per_arm, exp.p_y_do_xp(), rng);
    ArmCounts {
        treated_n: n_per_arm,
        treated_y,
        control_n: n_per_arm,
        control_y,
    }
}

/// Draws `n` units from the observational joint, cell by cell as
/// conditional binomials.
pub fn sample_observational<R: Rng + ?Sized>(g: &GroundTruth<f64>, n: u64, rng: &mut R) -> CellCounts {
    let cells = ground_truth_to_observational(g).cells();
    let mut counts = [0u64; 4];
    let mut remaining_n = n;
    let mut remaining_mass = 1.0;
    for (slot, &p) in counts.iter_mut().zip(&cells).take(3) {
        let q = if remaining_mass > 0.0 { p / remaining_mass } else { 0.0 };
        *slot = binomial(remaining_n, q, rng);
        remaining_n -= *slot;
        remaining_mass -= p;
    }
    counts[3] = remaining_n;
    CellCounts {
        xy: counts[0],
        xyp: counts[1],
        xpy: counts[2],
        xpyp: counts[3],
    }
}

/// Expected arm counts rounded to the nearest integer.
pub fn expected_experiment(g: &GroundTruth<f64>, n_per_arm: u64) -> ArmCounts {
    let exp = ground_truth_to_experimental(g);
    let n = n_per_arm as f64;
    ArmCounts {
        treated_n: n_per_arm,
        treated_y: (exp.p_y_do_x() * n).round() as u64,
        control_n: n_per_arm,
        control_y: (exp.p_y_do_xp() * n).round() as u64,
    }
}

/// Expected observational counts, apportioned by largest remainder so they
/// sum to `n`.
pub fn expected_observational(g: &GroundTruth<f64>, n: u64) -> CellCounts {
    let cells = ground_truth_to_observational(g).cells();
    let raw: Vec<f64> = cells.iter().map(|p| p * n as f64).collect();
    let mut counts: Vec<u64> = raw.iter().map(|r| r.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (raw[a] - raw[a].floor(), raw[b] - raw[b].floor());
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(n.saturating_sub(assigned) as usize) {
        counts[i] += 1;
    }
    CellCounts {
        xy: counts[0],
        xyp: counts[1],
        xpy: counts[2],
        xpyp: counts[3],
    }
}

/// A group whose finite-sample data fail the compatibility check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlaggedGroup {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedStudy {
    pub study: Study<f64>,
    pub flagged: Vec<FlaggedGroup>,
}

fn simulate_group(cfg: &SimulationConfig, index: usize) -> Result<(GroupData<f64>, Option<FlaggedGroup>)> {
    let (id, truth) = &cfg.groups[index];
    let arms = if cfg.exact {
        expected_experiment(truth, cfg.n_per_arm)
    } else {
        sample_experiment(truth, cfg.n_per_arm, &mut group_rng(cfg.seed, index, Substream::Experiment))
    };
    let experimental = ExperimentalData::from_counts(arms)?;
    let observational = if cfg.n_observational > 0 {
        let cells = if cfg.exact {
            expected_observational(truth, cfg.n_observational)
        } else {
            sample_observational(
                truth,
                cfg.n_observational,
                &mut group_rng(cfg.seed, index, Substream::Observational),
            )
        };
        Some(ObservationalData::from_counts(cells)?)
    } else {
        None
    };
    let group = GroupData::new(id.clone(), experimental, observational)?;
    let report = group.compatibility();
    let flag = (!report.is_compatible()).then(|| FlaggedGroup {
        id: id.clone(),
        reason: report.describe(),
    });
    Ok((group, flag))
}

/// Generates a study sequentially.
pub fn generate_study(cfg: &SimulationConfig, bv: &BenefitVector<f64>) -> Result<SimulatedStudy> {
    cfg.validate()?;
    let results = (0..cfg.groups.len())
        .map(|i| simulate_group(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    assemble(results, bv)
}

/// Generates a study on a pool of `workers` threads; identical to
/// [`generate_study`] for any worker count.
pub fn generate_study_with_workers(
    cfg: &SimulationConfig,
    bv: &BenefitVector<f64>,
    workers: usize,
) -> Result<SimulatedStudy> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let results = pool.install(|| {
        (0..cfg.groups.len())
            .into_par_iter()
            .map(|i| simulate_group(cfg, i))
            .collect::<Result<Vec<_>>>()
    })?;
    assemble(results, bv)
}

fn assemble(
    results: Vec<(GroupData<f64>, Option<FlaggedGroup>)>,
    bv: &BenefitVector<f64>,
) -> Result<SimulatedStudy> {
    let (groups, flags): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok(SimulatedStudy {
        study: Study::new(*bv, groups)?,
        flagged: flags.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ResponseTypeDistribution;

    fn truth(c: f64, a: f64, n: f64, d: f64) -> GroundTruth {
        let rt = ResponseTypeDistribution::new(c, a, n, d).unwrap();
        GroundTruth::from_response_types(&rt, [0.5; 4]).unwrap()
    }

    fn table1() -> Vec<(String, GroundTruth)> {
        vec![
            ("c1".into(), truth(0.35, 0.25, 0.35, 0.05)),
            ("c2".into(), truth(0.65, 0.05, 0.05, 0.25)),
        ]
    }

    fn ab() -> BenefitVector {
        BenefitVector::new(1.0, 0.0, 0.0, -1.0).unwrap()
    }

    #[test]
    fn experiment_counts_stay_near_expectation() {
        let g = truth(0.35, 0.25, 0.35, 0.05);
        let mut inside = 0;
        for seed in 0..200 {
            let c = sample_experiment(&g, 750, &mut group_rng(seed, 0, Substream::Experiment));
            let ok_t = (c.treated_y as f64 - 450.0).abs() <= 3.0 * (750.0f64 * 0.6 * 0.4).sqrt();
            let ok_c = (c.control_y as f64 - 225.0).abs() <= 3.0 * (750.0f64 * 0.3 * 0.7).sqrt();
            inside += usize::from(ok_t && ok_c);
        }
        assert!(inside >= 198, "only {inside}/200 seeds within 3 sd");
    }

    #[test]
    fn degenerate_truth_is_deterministic() {
        let g = truth(1.0, 0.0, 0.0, 0.0);
        for seed in 0..20 {
            let c = sample_experiment(&g, 100, &mut group_rng(seed, 3, Substream::Experiment));
            assert_eq!((c.treated_y, c.control_y), (100, 0));
        }
    }

    #[test]
    fn seeded_draws_repeat() {
        let g = truth(0.35, 0.25, 0.35, 0.05);
        let a = sample_experiment(&g, 750, &mut group_rng(42, 0, Substream::Experiment));
        let b = sample_experiment(&g, 750, &mut group_rng(42, 0, Substream::Experiment));
        assert_eq!(a, b);
        let a = sample_observational(&g, 999, &mut group_rng(42, 0, Substream::Observational));
        let b = sample_observational(&g, 999, &mut group_rng(42, 0, Substream::Observational));
        assert_eq!(a, b);
        assert_eq!(a.total(), Some(999));
    }

    #[test]
    fn observational_sampling_edges() {
        let g = GroundTruth::new([[0.125; 2]; 4]).unwrap();
        let mut rng = group_rng(1, 0, Substream::Observational);
        assert_eq!(sample_observational(&g, 0, &mut rng), CellCounts::default());
        let n = 1_000_000;
        let c = sample_observational(&g, n, &mut rng);
        for cell in [c.xy, c.xyp, c.xpy, c.xpyp] {
            assert!((cell as f64 / n as f64 - 0.25).abs() < 0.005);
        }
    }

    #[test]
    fn large_samples_converge() {
        let g = truth(0.65, 0.05, 0.05, 0.25);
        let c = sample_experiment(&g, 1_000_000, &mut group_rng(9, 0, Substream::Experiment));
        let e = ExperimentalData::<f64>::from_counts(c).unwrap();
        assert!((e.p_y_do_x() - 0.7).abs() < 0.005 && (e.p_y_do_xp() - 0.3).abs() < 0.005);
    }

    #[test]
    fn exact_mode_reproduces_table_counts() {
        let cfg = SimulationConfig {
            n_per_arm: 750,
            n_observational: 0,
            seed: 0,
            exact: true,
            groups: table1(),
        };
        let s = generate_study(&cfg, &ab()).unwrap();
        let counts: Vec<_> = s
            .study
            .groups()
            .iter()
            .map(|g| g.experimental.counts().unwrap())
            .map(|c| (c.treated_y, c.control_y))
            .collect();
        assert_eq!(counts, [(450, 225), (525, 225)]);
        assert!(s.study.groups().iter().all(|g| g.observational.is_none()));
    }

    #[test]
    fn expected_observational_sums_to_n() {
        let g = truth(0.35, 0.25, 0.35, 0.05);
        for n in [1, 7, 100, 12345] {
            assert_eq!(expected_observational(&g, n).total(), Some(n));
        }
    }

    #[test]
    fn adding_a_group_keeps_earlier_draws() {
        let mut cfg = SimulationConfig {
            n_per_arm: 500,
            n_observational: 300,
            seed: 11,
            exact: false,
            groups: table1()[..1].to_vec(),
        };
        let one = generate_study(&cfg, &ab()).unwrap();
        cfg.groups = table1();
        let two = generate_study(&cfg, &ab()).unwrap();
        assert_eq!(one.study.groups()[0], two.study.groups()[0]);
    }

    #[test]
    fn workers_do_not_change_output() {
        let mut groups = table1();
        for i in 0..6 {
            groups.push((format!("g{i}"), truth(0.1 * i as f64, 0.2, 0.4 - 0.05 * i as f64, 0.4 - 0.05 * i as f64)));
        }
        let cfg = SimulationConfig {
            n_per_arm: 750,
            n_observational: 1000,
            seed: 7,
            exact: false,
            groups,
        };
        let seq = generate_study(&cfg, &ab()).unwrap();
        for w in [1, 2, 5] {
            assert_eq!(generate_study_with_workers(&cfg, &ab(), w).unwrap(), seq);
        }
    }

    #[test]
    fn single_tiny_arm() {
        let cfg = SimulationConfig {
            n_per_arm: 1,
            n_observational: 0,
            seed: 3,
            exact: false,
            groups: table1()[..1].to_vec(),
        };
        let s = generate_study(&cfg, &ab()).unwrap();
        let e = s.study.groups()[0].experimental;
        assert!([0.0, 1.0].contains(&e.p_y_do_x()) && [0.0, 1.0].contains(&e.p_y_do_xp()));
    }

    #[test]
    fn small_samples_can_be_flagged() {
        // Everyone would naturally take treatment and respond, so observational
        // P(x,y) = 0.9; a small RCT arm often undershoots it.
        let mut joint = [[0.0; 2]; 4];
        joint[0][0] = 0.45;
        joint[1][0] = 0.45;
        joint[2][0] = 0.10;
        let g = GroundTruth::new(joint).unwrap();
        let flagged = (0..50)
            .filter(|&seed| {
                let cfg = SimulationConfig {
                    n_per_arm: 20,
                    n_observational: 2000,
                    seed,
                    exact: false,
                    groups: vec![("c".into(), g)],
                };
                !generate_study(&cfg, &ab()).unwrap().flagged.is_empty()
            })
            .count();
        assert!(flagged > 0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SimulationConfig {
            n_per_arm: 0,
            n_observational: 0,
            seed: 0,
            exact: false,
            groups: table1(),
        };
        assert!(generate_study(&cfg, &ab()).is_err());
        cfg.n_per_arm = 5;
        cfg.groups.push(("c1".into(), truth(0.25, 0.25, 0.25, 0.25)));
        assert!(matches!(generate_study(&cfg, &ab()), Err(Error::InvalidConfig(_))));
        cfg.groups.clear();
        assert!(cfg.validate().is_err());
    }
}
