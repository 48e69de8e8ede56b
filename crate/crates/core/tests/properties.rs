//! Cross-module properties, each checked against an independent oracle.

use etc_cbir_core::codebook::TrainMeta;
use etc_cbir_core::crypto::derive_plan;
use etc_cbir_core::descriptor::group_orbit;
use etc_cbir_core::esimple::{histogram, l2_normalize, weight};
use etc_cbir_core::kmeans::squared_distance;
use etc_cbir_core::prng::fisher_yates;
use etc_cbir_core::raster::BLOCK_SAMPLES;
use etc_cbir_core::*;
use proptest::prelude::*;

fn raster_from(seed: u64, cols: usize, rows: usize) -> Raster {
    let mut rng = SplitMix64::new(seed);
    let data = (0..cols * rows * 256 * 3)
        .map(|_| rng.next_u64() as u8)
        .collect();
    Raster::new(cols * 16, rows * 16, data).unwrap()
}

/// Lexicographically smallest member of a block's 16-element orbit.
fn canonical(block: &Block) -> Vec<u8> {
    group_orbit(block).iter().map(|b| b.to_vec()).min().unwrap()
}

/// Encryption written out step by step, without the plan-driven loop of the
/// library: shuffle, then rotate/flip, then negate.
fn reference_encrypt(img: &Raster, keys: KeySet) -> Raster {
    let grid = img.grid().unwrap();
    let n = grid.len();
    let mut perm: Vec<usize> = (0..n).collect();
    fisher_yates(&mut perm, &mut SplitMix64::new(keys.k1));
    let blocks = img.blocks().unwrap();

    let mut moved = vec![[0u8; BLOCK_SAMPLES]; n];
    for j in 0..n {
        moved[perm[j]] = blocks[j];
    }
    let mut rot = SplitMix64::new(keys.k2);
    let mut turned = vec![[0u8; BLOCK_SAMPLES]; n];
    for j in 0..n {
        let t = DihedralTransform::from_code((rot.next_u64() % 8) as u8).unwrap();
        turned[perm[j]] = t.apply(&moved[perm[j]]);
    }
    let mut neg = SplitMix64::new(keys.k3);
    for j in 0..n {
        if neg.next_u64() % 2 == 1 {
            for v in turned[perm[j]].iter_mut() {
                *v = 255 - *v;
            }
        }
    }
    Raster::from_blocks(grid, &turned).unwrap()
}

#[test]
fn encrypt_matches_step_by_step_reference() {
    let img = raster_from(3, 2, 2);
    let keys = keygen(0);
    assert_eq!(encrypt(&img, keys).unwrap(), reference_encrypt(&img, keys));
    let img = raster_from(4, 5, 3);
    let keys = keygen(12345);
    assert_eq!(encrypt(&img, keys).unwrap(), reference_encrypt(&img, keys));
}

fn brute_force_best_inertia(points: &[Vec<f64>], k: usize) -> f64 {
    let n = points.len();
    let mut best = f64::INFINITY;
    let mut labels = vec![0usize; n];
    loop {
        let mut cost = 0.0;
        for c in 0..k {
            let members: Vec<&Vec<f64>> = points
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == c)
                .map(|(p, _)| p)
                .collect();
            if members.is_empty() {
                continue;
            }
            let dim = members[0].len();
            let mean: Vec<f64> = (0..dim)
                .map(|d| members.iter().map(|m| m[d]).sum::<f64>() / members.len() as f64)
                .collect();
            cost += members
                .iter()
                .map(|m| squared_distance(m, &mean))
                .sum::<f64>();
        }
        best = best.min(cost);
        // next assignment in base k
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

#[test]
fn toy_kmeans_matches_enumeration() {
    let pts = vec![
        vec![0.0, 0.0],
        vec![0.0, 1.0],
        vec![10.0, 0.0],
        vec![10.0, 1.0],
    ];
    assert_eq!(brute_force_best_inertia(&pts, 2), 1.0);
    let out = kmeans(&pts, &KMeansConfig::new(2, 0)).unwrap();
    assert_eq!(out.inertia(), 1.0);
}

#[test]
fn well_separated_clusters_are_recovered() {
    let mut rng = SplitMix64::new(5);
    let centers = [[0.0, 0.0], [50.0, 0.0], [0.0, 50.0]];
    let mut pts = Vec::new();
    for c in &centers {
        for _ in 0..4 {
            pts.push(vec![c[0] + rng.next_f64(), c[1] + rng.next_f64()]);
        }
    }
    let out = kmeans(&pts, &KMeansConfig::new(3, 1)).unwrap();
    let best = brute_force_best_inertia(&pts, 3);
    assert!((out.inertia() - best).abs() < 1e-9);
    for chunk in pts.chunks(4) {
        let mean = [
            chunk.iter().map(|p| p[0]).sum::<f64>() / 4.0,
            chunk.iter().map(|p| p[1]).sum::<f64>() / 4.0,
        ];
        assert!(out
            .centroids
            .iter()
            .any(|c| (c[0] - mean[0]).abs() < 1e-9 && (c[1] - mean[1]).abs() < 1e-9));
    }
}

#[test]
fn mean_of_250_aps_matches_pairwise_sum() {
    let mut rng = SplitMix64::new(250);
    let aps: Vec<f64> = (0..250).map(|_| rng.next_f64()).collect();
    // pairwise summation as an independent accumulation order
    fn pairwise(v: &[f64]) -> f64 {
        if v.len() <= 2 {
            return v.iter().sum();
        }
        let (a, b) = v.split_at(v.len() / 2);
        pairwise(a) + pairwise(b)
    }
    let expected = pairwise(&aps) / 250.0;
    assert!((mean_average_precision(&aps).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn single_patch_image_is_one_hot() {
    let p = DescriptorParams::default();
    let words: Vec<Vec<f64>> = [[200u8, 10, 10], [10, 200, 10], [10, 10, 200]]
        .iter()
        .map(|&c| mcedd(&Raster::filled(16, 16, c).blocks().unwrap()[0], &p).into_vec())
        .collect();
    let cb = Codebook::new(words, p, TrainMeta::default()).unwrap();
    let v = esimple(&Raster::filled(16, 16, [12, 198, 9]), &cb).unwrap();
    assert_eq!(v.values, vec![0.0, 1.0, 0.0]);
}

fn small_codebook() -> Codebook {
    let p = DescriptorParams::default();
    let images: Vec<Raster> = (0..4).map(|s| raster_from(100 + s, 2, 2)).collect();
    let mut words: Vec<Vec<f64>> = images
        .iter()
        .flat_map(|img| img.blocks().unwrap())
        .map(|b| mcedd(&b, &p).into_vec())
        .collect();
    words.truncate(8);
    words.push(mcedd(&[128; BLOCK_SAMPLES], &p).into_vec());
    Codebook::new(words, p, TrainMeta::default())
        .unwrap()
        .with_id(CodebookId(99))
}

/// Overwrites some blocks with flat colours so images share words.
fn structured_raster(seed: u64, cols: usize, rows: usize) -> Raster {
    let mut img = raster_from(seed, cols, rows);
    let grid = img.grid().unwrap();
    for j in (0..grid.len()).step_by(2) {
        img.put_block(grid, j, &[(seed as u8).wrapping_mul(37); BLOCK_SAMPLES]);
    }
    img
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip(seed in any::<u64>(), cols in 1usize..6, rows in 1usize..6, key in any::<u64>()) {
        let img = raster_from(seed, cols, rows);
        let keys = keygen(key);
        prop_assert_eq!(decrypt(&encrypt(&img, keys).unwrap(), keys).unwrap(), img);
    }

    #[test]
    fn permutation_is_valid(key in any::<u64>(), rows in 1usize..20, cols in 1usize..20) {
        let plan = derive_plan(keygen(key), rows, cols).unwrap();
        let mut sorted = plan.permutation.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..rows * cols).collect::<Vec<_>>());
    }

    #[test]
    fn block_multiset_preserved_up_to_group(seed in any::<u64>(), key in any::<u64>()) {
        let img = raster_from(seed, 3, 2);
        let enc = encrypt(&img, keygen(key)).unwrap();
        let mut a: Vec<Vec<u8>> = img.blocks().unwrap().iter().map(canonical).collect();
        let mut b: Vec<Vec<u8>> = enc.blocks().unwrap().iter().map(canonical).collect();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn mcedd_group_invariant(seed in any::<u64>()) {
        let p = DescriptorParams::default();
        let patch = raster_from(seed, 1, 1).blocks().unwrap()[0];
        let base = mcedd(&patch, &p);
        prop_assert!((base.0.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(base.0.iter().all(|&v| v >= 0.0));
        for g in group_orbit(&patch).iter() {
            let other = mcedd(g, &p);
            for (x, y) in base.0.iter().zip(&other.0) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn esimple_encryption_and_shuffle_invariant(seed in any::<u64>(), key in any::<u64>()) {
        let cb = small_codebook();
        let img = structured_raster(seed, 3, 3);
        let plain = esimple(&img, &cb).unwrap();
        let enc = esimple(&encrypt(&img, keygen(key)).unwrap(), &cb).unwrap();
        for (x, y) in plain.values.iter().zip(&enc.values) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        let norm: f64 = plain.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-9);

        // any bijection of the blocks, no rotation or negation
        let grid = img.grid().unwrap();
        let mut blocks = img.blocks().unwrap();
        fisher_yates(&mut blocks, &mut SplitMix64::new(key));
        let shuffled = Raster::from_blocks(grid, &blocks).unwrap();
        prop_assert_eq!(histogram(&shuffled, &cb).unwrap(), histogram(&img, &cb).unwrap());
    }

    #[test]
    fn weighting_is_monotone(a in 1u32..10_000, b in 1u32..10_000) {
        let w = weight(&[a, b, 0]);
        prop_assert_eq!(w[2], 0.0);
        if a > b {
            prop_assert!(w[0] > w[1]);
        }
        let n = l2_normalize(&w);
        prop_assert!((n.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn index_query_equals_full_scan(seed in any::<u64>(), n in 1usize..300, k in 1usize..50) {
        let mut rng = SplitMix64::new(seed);
        let m = 6;
        let mut ix = RetrievalIndex::new(m, CodebookId(1));
        let mut raw = Vec::new();
        for i in 0..n {
            // coarse values so distance ties actually happen
            let values: Vec<f64> = (0..m).map(|_| rng.next_below(3) as f64).collect();
            let id = format!("{:04}", rng.next_below(100_000) * 1000 + i as u64);
            raw.push((id.clone(), values.clone()));
            ix.add(IndexEntry {
                image_id: id,
                vector: ESimpleVector { values, codebook_id: CodebookId(1) },
                owner_info: String::new(),
                stored_path: String::new(),
            }).unwrap();
        }
        let q: Vec<f64> = (0..m).map(|_| rng.next_below(3) as f64).collect();
        let got = ix.query(&ESimpleVector { values: q.clone(), codebook_id: CodebookId(1) }, k).unwrap();

        let mut expected: Vec<(f64, String)> = raw
            .iter()
            .map(|(id, v)| (v.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt(), id.clone()))
            .collect();
        expected.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        expected.truncate(k);
        prop_assert_eq!(got.len(), expected.len());
        for (i, (r, (d, id))) in got.iter().zip(&expected).enumerate() {
            prop_assert_eq!(&r.image_id, id);
            prop_assert_eq!(r.distance, *d);
            prop_assert_eq!(r.rank, i + 1);
        }
    }

    #[test]
    fn self_retrieval(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let mut ix = RetrievalIndex::new(4, CodebookId(3));
        let vectors: Vec<Vec<f64>> = (0..20).map(|_| l2_normalize(&(0..4).map(|_| rng.next_f64()).collect::<Vec<_>>())).collect();
        for (i, v) in vectors.iter().enumerate() {
            ix.add(IndexEntry {
                image_id: format!("e{i:02}"),
                vector: ESimpleVector { values: v.clone(), codebook_id: CodebookId(3) },
                owner_info: String::new(),
                stored_path: String::new(),
            }).unwrap();
        }
        let probe = (rng.next_below(20)) as usize;
        let q = ESimpleVector { values: vectors[probe].clone(), codebook_id: CodebookId(3) };
        let top = ix.query(&q, 1).unwrap();
        prop_assert!(top[0].distance < 1e-9);
        prop_assert_eq!(ix.query(&q, 20).unwrap(), ix.query(&q, 20).unwrap());
    }

    #[test]
    fn ap_equals_mean_precision_at_hits(seed in any::<u64>(), n in 2usize..60, g in 1usize..8) {
        let g = g.min(n);
        let mut ids: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        fisher_yates(&mut ids, &mut SplitMix64::new(seed));
        let truth: Vec<String> = (0..g).map(|i| format!("x{i}")).collect();
        let ap = average_precision(&ids, &truth).unwrap();
        // precision@rank averaged over the ranks of the ground-truth items
        let mut ranks: Vec<usize> = truth.iter().map(|t| ids.iter().position(|x| x == t).unwrap() + 1).collect();
        ranks.sort_unstable();
        let textbook: f64 = ranks.iter().enumerate().map(|(i, &r)| (i + 1) as f64 / r as f64).sum::<f64>() / g as f64;
        prop_assert!((ap - textbook).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ap));
    }

    #[test]
    fn lloyd_never_worsens_its_init(seed in any::<u64>(), n in 3usize..10, k in 1usize..4) {
        let k = k.min(n);
        let mut rng = SplitMix64::new(seed);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.next_f64() * 5.0, rng.next_f64() * 5.0]).collect();
        let out = kmeans(&pts, &KMeansConfig::new(k, seed)).unwrap();
        prop_assert!(out.inertia() <= out.inertia_history[0]);
        prop_assert!(out.inertia() >= brute_force_best_inertia(&pts, k) - 1e-9);
        for w in out.inertia_history.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        prop_assert_eq!(out.centroids.len(), k);
        prop_assert!(out.centroids.iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn converged_assignments_are_stable(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let pts: Vec<Vec<f64>> = (0..80).map(|_| vec![rng.next_f64(), rng.next_f64(), rng.next_f64()]).collect();
        let mut cfg = KMeansConfig::new(5, seed);
        cfg.max_iters = 500;
        cfg.tol = 1e-300;
        let out = kmeans(&pts, &cfg).unwrap();
        if out.iterations < cfg.max_iters {
            for (p, &l) in pts.iter().zip(&out.assignments) {
                prop_assert_eq!(etc_cbir_core::kmeans::nearest(&out.centroids, p).0, l);
            }
        }
    }
}

#[test]
fn group_counts_by_histogram() {
    // patches map to words [0, 0, 2, 1]
    let p = DescriptorParams::default();
    let colors = [[200u8, 0, 0], [0, 200, 0], [0, 0, 200], [128, 128, 128]];
    let words: Vec<Vec<f64>> = colors
        .iter()
        .map(|&c| mcedd(&Raster::filled(16, 16, c).blocks().unwrap()[0], &p).into_vec())
        .collect();
    let cb = Codebook::new(words, p, TrainMeta::default()).unwrap();
    let layout = [colors[0], colors[0], colors[2], colors[1]];
    let mut img = Raster::filled(32, 32, [0; 3]);
    let grid = img.grid().unwrap();
    for (j, c) in layout.iter().enumerate() {
        let b = Raster::filled(16, 16, *c).blocks().unwrap()[0];
        img.put_block(grid, j, &b);
    }
    assert_eq!(histogram(&img, &cb).unwrap(), vec![2, 1, 1, 0]);
}
