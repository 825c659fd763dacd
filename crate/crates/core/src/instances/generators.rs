use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::model::{GroundStructure, Instance, ScenarioSet};

/// Seed of the `index`-th instance of a study seeded with `base`
/// (SplitMix64 output at counter `index`, so nearby base seeds give
/// unrelated studies).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn uniform_instance(structure: GroundStructure, k: usize, seed: u64) -> Result<Instance> {
    structure.validate()?;
    if k == 0 {
        return invalid("scenario count must be >= 1");
    }
    let n = structure.ground_size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..n).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let mut inst = Instance::new(structure, ScenarioSet::from_rows(rows)?)?;
    inst.seed = Some(seed);
    Ok(inst)
}

/// Complete layered DAG with i.i.d. uniform `[0, 1)` costs per edge and
/// scenario, drawn from ChaCha8 seeded with `seed` (scenario-major order).
pub fn gen_layered(layers: usize, width: usize, k: usize, seed: u64) -> Result<Instance> {
    let mut inst = uniform_instance(GroundStructure::LayeredPath { layers, width }, k, seed)?;
    inst.name = Some(format!("layered-{layers}x{width}-k{k}-s{seed}"));
    inst.generator = Some(format!("layered layers={layers} width={width} k={k} rng=chacha8"));
    Ok(inst)
}

/// `p`-of-`n` selection with i.i.d. uniform `[0, 1)` costs.
pub fn gen_selection(n: usize, p: usize, k: usize, seed: u64) -> Result<Instance> {
    let mut inst = uniform_instance(GroundStructure::Selection { n, p }, k, seed)?;
    inst.name = Some(format!("selection-{p}of{n}-k{k}-s{seed}"));
    inst.generator = Some(format!("selection n={n} p={p} k={k} rng=chacha8"));
    Ok(inst)
}

/// Two disjoint s-t paths of `K = 2^k` edges each, on which consecutive
/// aggregation to level `ell` loses exactly a factor `2^(k-ell)`.
///
/// The top path (elements `0..K`) is cut into `2^ell` blocks of
/// `r = 2^(k-ell)` edges; every edge of block `b` costs 1 in scenario `b·r`.
/// Bottom edge `i` (element `K + i`) costs 1 in scenario `i`. All other
/// costs are 0.
pub fn gen_tight(k: u32, ell: u32) -> Result<Instance> {
    if ell > k {
        return invalid(format!("level {ell} exceeds k = {k}"));
    }
    if k > 20 {
        return invalid("k above 20 is not supported");
    }
    let scenarios = 1usize << k;
    let r = 1usize << (k - ell);
    let mut rows = vec![vec![0.0; 2 * scenarios]; scenarios];
    for e in 0..scenarios {
        rows[(e / r) * r][e] = 1.0;
        rows[e][scenarios + e] = 1.0;
    }
    let structure = GroundStructure::ParallelPaths { lengths: vec![scenarios, scenarios] };
    let mut inst = Instance::new(structure, ScenarioSet::from_rows(rows)?)?;
    inst.name = Some(format!("tight-k{k}-l{ell}"));
    inst.generator = Some(format!("tight k={k} ell={ell}"));
    Ok(inst)
}

/// Three parallel s-t edges (top, middle, bottom) under four scenarios:
/// top `(4,0,0,0)`, middle `(1,1,1,1)`, bottom `(0,4,0,0)`.
pub fn gen_example1() -> Instance {
    let rows = vec![
        vec![4.0, 1.0, 0.0],
        vec![0.0, 1.0, 4.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 1.0, 0.0],
    ];
    let structure = GroundStructure::ParallelPaths { lengths: vec![1, 1, 1] };
    let mut inst = Instance::new(structure, ScenarioSet::from_rows(rows).expect("valid rows"))
        .expect("valid instance");
    inst.name = Some("example1".into());
    inst.generator = Some("example1".into());
    inst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Solution;

    #[test]
    fn layered_geometry() {
        let inst = gen_layered(10, 4, 16, 1).unwrap();
        assert_eq!(inst.ground_size(), 152);
        assert_eq!(inst.k(), 16);
        let tiny = gen_layered(1, 1, 1, 7).unwrap();
        assert_eq!(tiny.ground_size(), 2);
        assert_eq!(tiny.k(), 1);
        assert!(gen_layered(0, 4, 16, 1).is_err());
        assert!(gen_layered(2, 4, 0, 1).is_err());
    }

    #[test]
    fn seeds_are_deterministic() {
        assert_eq!(gen_layered(3, 3, 4, 9).unwrap(), gen_layered(3, 3, 4, 9).unwrap());
        assert_ne!(gen_layered(3, 3, 4, 9).unwrap(), gen_layered(3, 3, 4, 10).unwrap());
    }

    #[test]
    fn uniform_mean() {
        let mut sum = 0.0;
        let mut count = 0usize;
        for seed in 0..100 {
            let inst = gen_layered(10, 4, 16, seed).unwrap();
            for c in inst.scenarios.iter() {
                sum += c.entries().iter().sum::<f64>();
                count += c.len();
            }
        }
        assert!(count >= 15_000);
        let mean = sum / count as f64;
        assert!((0.48..=0.52).contains(&mean), "mean {mean}");
    }

    #[test]
    fn tight_structure() {
        let inst = gen_tight(4, 2).unwrap();
        assert_eq!(inst.ground_size(), 32);
        assert_eq!(inst.k(), 16);
        let top = Solution::from_elements(32, 0..16);
        let bottom = Solution::from_elements(32, 16..32);
        assert_eq!(inst.evaluate_max(&top).unwrap().0, 4.0);
        assert_eq!(inst.evaluate_max(&bottom).unwrap().0, 1.0);
        // every edge has exactly one unit entry across scenarios
        for e in 0..32 {
            let col: f64 = inst.scenarios.iter().map(|c| c.entries()[e]).sum();
            assert_eq!(col, 1.0);
        }
        let flat = gen_tight(0, 0).unwrap();
        assert_eq!(flat.k(), 1);
        assert_eq!(flat.evaluate_max(&Solution::from_elements(2, [0])).unwrap().0, 1.0);
        assert_eq!(flat.evaluate_max(&Solution::from_elements(2, [1])).unwrap().0, 1.0);
        assert!(gen_tight(2, 3).is_err());
    }

    #[test]
    fn example1_costs() {
        let inst = gen_example1();
        let top: Vec<f64> = inst.scenarios.iter().map(|c| c.entries()[0]).collect();
        assert_eq!(top, vec![4.0, 0.0, 0.0, 0.0]);
    }
}
