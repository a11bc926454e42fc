mod common;

use std::collections::{BTreeSet, HashMap};

use omage::atlas::{
    extract_islands, merge_coincident_vertices, merge_default, select_top_k, validate_atlas,
    UvIsland,
};
use omage::mesh_io::{Corner, IndexedMesh};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plain quick-find, kept separate from the crate's union-find.
struct Components(Vec<usize>);

impl Components {
    fn new(n: usize) -> Self {
        Components((0..n).collect())
    }

    fn join(&mut self, a: usize, b: usize) {
        let (from, to) = (self.0[a], self.0[b]);
        if from != to {
            for x in &mut self.0 {
                if *x == from {
                    *x = to;
                }
            }
        }
    }

    fn count(&self) -> usize {
        self.0.iter().collect::<BTreeSet<_>>().len()
    }
}

fn unique_corners(m: &IndexedMesh) -> BTreeSet<Corner> {
    m.triangles.iter().flatten().copied().collect()
}

/// Mesh whose corners come in near-duplicate groups (noise far below the
/// merge tolerance) plus seam copies with a different UV.
fn noisy_duplicates(seed: u64) -> IndexedMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mesh = IndexedMesh::default();
    let mut candidates: Vec<Vec<Corner>> = Vec::new();
    for _ in 0..30 {
        let p: [f64; 3] = [rng.random(), rng.random(), rng.random()];
        let t: [f64; 2] = [rng.random(), rng.random()];
        let mut group = Vec::new();
        for _ in 0..rng.random_range(1..4) {
            let jitter = |rng: &mut ChaCha8Rng| rng.random_range(-1e-9..1e-9);
            mesh.positions.push(p.map(|x| x + jitter(&mut rng)));
            mesh.uvs.push(t.map(|x| x + jitter(&mut rng)));
            let k = mesh.positions.len() as u32 - 1;
            group.push(Corner::new(k, k));
        }
        // a seam twin: same position, different uv
        mesh.uvs.push([t[0] + 0.3, t[1]]);
        group.push(Corner::new(group[0].position, mesh.uvs.len() as u32 - 1));
        candidates.push(group);
    }
    for _ in 0..60 {
        let mut picked = BTreeSet::new();
        while picked.len() < 3 {
            picked.insert(rng.random_range(0..candidates.len()));
        }
        let tri: Vec<Corner> = picked
            .into_iter()
            .map(|g| candidates[g][rng.random_range(0..candidates[g].len())])
            .collect();
        mesh.triangles.push([tri[0], tri[1], tri[2]]);
    }
    mesh
}

#[test]
fn merge_matches_all_pairs_clustering() {
    for seed in 0..20 {
        let mesh = noisy_duplicates(seed);
        let (e3, euv) = (1e-6, 1e-6);
        let corners: Vec<Corner> = unique_corners(&mesh).into_iter().collect();
        let mut oracle = Components::new(corners.len());
        for a in 0..corners.len() {
            for b in a + 1..corners.len() {
                let (pa, pb) = (
                    mesh.positions[corners[a].position as usize],
                    mesh.positions[corners[b].position as usize],
                );
                let (ta, tb) = (
                    mesh.uvs[corners[a].uv as usize],
                    mesh.uvs[corners[b].uv as usize],
                );
                let close3 = (0..3).all(|k| (pa[k] - pb[k]).abs() <= e3);
                let close2 = (0..2).all(|k| (ta[k] - tb[k]).abs() <= euv);
                if close3 && close2 {
                    oracle.join(a, b);
                }
            }
        }
        let merged = merge_coincident_vertices(&mesh, e3, euv);
        assert_eq!(merged.triangle_count(), mesh.triangle_count());
        assert_eq!(unique_corners(&merged).len(), oracle.count(), "seed {seed}");
    }
}

#[test]
fn seam_twins_survive_the_merge() {
    let mesh = noisy_duplicates(7);
    let merged = merge_default(&mesh);
    let distinct_uv_at = |m: &IndexedMesh| {
        let mut by_pos: HashMap<u32, BTreeSet<u32>> = HashMap::new();
        for c in unique_corners(m) {
            by_pos.entry(c.position).or_default().insert(c.uv);
        }
        by_pos.values().filter(|s| s.len() > 1).count()
    };
    assert!(distinct_uv_at(&merged) > 0);
}

/// Triangles over a pool of shared corners, so components form at random.
fn random_connectivity(seed: u64, triangles: usize, corners: usize) -> IndexedMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mesh = IndexedMesh::default();
    for _ in 0..corners {
        mesh.positions
            .push([rng.random(), rng.random(), rng.random()]);
        mesh.uvs.push([rng.random(), rng.random()]);
    }
    for _ in 0..triangles {
        let mut picked = BTreeSet::new();
        while picked.len() < 3 {
            picked.insert(rng.random_range(0..corners as u32));
        }
        let v: Vec<u32> = picked.into_iter().collect();
        mesh.triangles
            .push([v[0], v[1], v[2]].map(|k| Corner::new(k, k)));
    }
    mesh
}

#[test]
fn islands_match_union_find_oracle() {
    for seed in 0..50 {
        let mesh = random_connectivity(seed, 50, 90);
        let mut oracle = Components::new(mesh.triangle_count());
        for a in 0..mesh.triangle_count() {
            for b in a + 1..mesh.triangle_count() {
                if mesh.triangles[a]
                    .iter()
                    .any(|c| mesh.triangles[b].contains(c))
                {
                    oracle.join(a, b);
                }
            }
        }
        let islands = extract_islands(&mesh);
        assert_eq!(islands.len(), oracle.count(), "seed {seed}");
        for isl in &islands {
            let label = oracle.0[isl.triangle_ids[0]];
            assert!(isl.triangle_ids.iter().all(|&t| oracle.0[t] == label));
            let expected: f64 = isl
                .triangle_ids
                .iter()
                .map(|&t| mesh.triangle_area(t))
                .sum();
            assert!((isl.area3d - expected).abs() <= 1e-12 * expected.max(1.0));
        }
        for w in islands.windows(2) {
            let ordered = w[0].area3d > w[1].area3d
                || (w[0].area3d == w[1].area3d && w[0].triangle_ids[0] < w[1].triangle_ids[0]);
            assert!(ordered);
        }
    }
}

#[test]
fn top_k_matches_sort_then_prefix() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let islands: Vec<UvIsland> = (0..100)
        .map(|id| UvIsland {
            island_id: id,
            triangle_ids: vec![id],
            uv_bbox: [0.0, 0.0, 1.0, 1.0],
            // coarse areas so ties occur
            area3d: rng.random_range(0..40) as f64 * 0.25,
        })
        .collect();
    let mut oracle = islands.clone();
    oracle.sort_by(|a, b| {
        b.area3d
            .partial_cmp(&a.area3d)
            .unwrap()
            .then(a.island_id.cmp(&b.island_id))
    });
    let (kept, report) = select_top_k(&islands, 25);
    assert_eq!(
        kept.iter().map(|i| i.island_id).collect::<Vec<_>>(),
        oracle[..25].iter().map(|i| i.island_id).collect::<Vec<_>>()
    );
    let total: f64 = islands.iter().map(|i| i.area3d).sum();
    let dropped: f64 = oracle[25..].iter().map(|i| i.area3d).sum();
    assert!((report.dropped_area_fraction - dropped / total).abs() < 1e-15);
    assert_eq!(report.dropped_island_ids.len(), 75);
    let min_kept = kept.iter().map(|i| i.area3d).fold(f64::INFINITY, f64::min);
    assert!(oracle[25..].iter().all(|i| i.area3d <= min_kept));
}

fn shoelace(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|k| {
            let (a, b) = (poly[k], poly[(k + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        / 2.0
}

fn ccw(t: [[f64; 2]; 3]) -> [[f64; 2]; 3] {
    if shoelace(&t) < 0.0 {
        [t[0], t[2], t[1]]
    } else {
        t
    }
}

/// Area of the intersection of two triangles by Sutherland-Hodgman clipping.
fn intersection_area(a: [[f64; 2]; 3], b: [[f64; 2]; 3]) -> f64 {
    let (a, b) = (ccw(a), ccw(b));
    let mut poly: Vec<[f64; 2]> = a.to_vec();
    for k in 0..3 {
        let (p, q) = (b[k], b[(k + 1) % 3]);
        let side = |x: [f64; 2]| (q[0] - p[0]) * (x[1] - p[1]) - (q[1] - p[1]) * (x[0] - p[0]);
        let mut next = Vec::new();
        for m in 0..poly.len() {
            let (s, e) = (poly[m], poly[(m + 1) % poly.len()]);
            let (ds, de) = (side(s), side(e));
            if ds >= 0.0 {
                next.push(s);
            }
            if (ds >= 0.0) != (de >= 0.0) {
                let t = ds / (ds - de);
                next.push([s[0] + t * (e[0] - s[0]), s[1] + t * (e[1] - s[1])]);
            }
        }
        poly = next;
        if poly.len() < 3 {
            return 0.0;
        }
    }
    shoelace(&poly).abs()
}

/// One island of wedges around a shared apex corner, so the island stays
/// connected whatever the wedges do.
fn wedge_island(wedges: &[(f64, f64)]) -> (IndexedMesh, Vec<[[f64; 2]; 3]>) {
    let mut mesh = IndexedMesh::default();
    let apex = [0.5, 0.5];
    mesh.positions.push([apex[0], apex[1], 0.0]);
    mesh.uvs.push(apex);
    let mut uv_tris = Vec::new();
    for &(a, b) in wedges {
        let rim = |t: f64| [0.5 + 0.4 * t.cos(), 0.5 + 0.4 * t.sin()];
        let base = mesh.positions.len() as u32;
        for p in [rim(a), rim(b)] {
            mesh.positions.push([p[0], p[1], 0.0]);
            mesh.uvs.push(p);
        }
        mesh.triangles
            .push([0, base, base + 1].map(|k| Corner::new(k, k)));
        uv_tris.push([apex, rim(a), rim(b)]);
    }
    (mesh, uv_tris)
}

#[test]
fn non_overlapping_fan_is_not_flagged() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cuts: Vec<f64> = (0..20)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    cuts.sort_by(f64::total_cmp);
    let wedges: Vec<(f64, f64)> = (0..20)
        .map(|k| {
            let next = if k + 1 < 20 {
                cuts[k + 1]
            } else {
                cuts[0] + std::f64::consts::TAU
            };
            (cuts[k], cuts[k] + 0.9 * (next - cuts[k]))
        })
        .collect();
    let (mesh, tris) = wedge_island(&wedges);
    assert_eq!(extract_islands(&mesh).len(), 1);
    for a in 0..tris.len() {
        for b in a + 1..tris.len() {
            assert!(intersection_area(tris[a], tris[b]) < 1e-12);
        }
    }
    assert!(!validate_atlas(&mesh).self_overlap_detected);
}

#[test]
fn overlap_flag_matches_clipping_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut checked, mut positives) = (0, 0);
    while checked < 200 {
        let wedges: Vec<(f64, f64)> = (0..5)
            .map(|_| {
                let a = rng.random_range(0.0..std::f64::consts::TAU);
                (a, a + rng.random_range(0.1..0.9))
            })
            .collect();
        let (mesh, tris) = wedge_island(&wedges);
        let mut max_area = 0.0f64;
        for a in 0..tris.len() {
            for b in a + 1..tris.len() {
                max_area = max_area.max(intersection_area(tris[a], tris[b]));
            }
        }
        // slivers below a few pixels of the 256² grid are not decidable by
        // a pixel-center test
        if max_area > 0.0 && max_area < 2e-3 {
            continue;
        }
        checked += 1;
        positives += (max_area > 0.0) as usize;
        assert_eq!(validate_atlas(&mesh).self_overlap_detected, max_area > 0.0);
    }
    assert!(positives > 20 && positives < 180);
}

fn rotate(mesh: &IndexedMesh, q: [f64; 4], shift: [f64; 3]) -> IndexedMesh {
    let n = (q.iter().map(|x| x * x).sum::<f64>()).sqrt();
    let [w, x, y, z] = q.map(|c| c / n);
    let m = [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ];
    let mut out = mesh.clone();
    for p in &mut out.positions {
        let r: [f64; 3] =
            std::array::from_fn(|k| m[k][0] * p[0] + m[k][1] * p[1] + m[k][2] * p[2] + shift[k]);
        *p = r;
    }
    out
}

proptest! {
    #[test]
    fn merge_is_idempotent(seed in any::<u64>()) {
        let mesh = noisy_duplicates(seed);
        let once = merge_default(&mesh);
        prop_assert_eq!(merge_default(&once), once);
    }

    #[test]
    fn islands_partition_triangles(seed in any::<u64>(), tris in 1usize..80) {
        let mesh = random_connectivity(seed, tris, 120);
        let islands = extract_islands(&mesh);
        let mut all: Vec<usize> = islands.iter().flat_map(|i| i.triangle_ids.iter().copied()).collect();
        prop_assert_eq!(all.len(), tris);
        all.sort_unstable();
        all.dedup();
        prop_assert_eq!(all.len(), tris);
        for isl in &islands {
            prop_assert!(!isl.triangle_ids.is_empty());
            let corners = isl.triangle_ids.iter().flat_map(|&t| mesh.corner_uvs(t));
            let lo_u = corners.clone().map(|c| c[0]).fold(f64::INFINITY, f64::min);
            let hi_v = corners.map(|c| c[1]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(isl.uv_bbox[0], lo_u);
            prop_assert_eq!(isl.uv_bbox[3], hi_v);
        }
    }

    #[test]
    fn area_is_rigid_invariant(
        q in prop::array::uniform4(-1.0f64..1.0),
        shift in prop::array::uniform3(-5.0f64..5.0),
    ) {
        prop_assume!(q.iter().map(|x| x * x).sum::<f64>() > 1e-3);
        let mesh = common::cushion_on_seat();
        let before = extract_islands(&mesh);
        let after = extract_islands(&rotate(&mesh, q, shift));
        prop_assert_eq!(before.len(), after.len());
        let total = |v: &[UvIsland]| v.iter().map(|i| i.area3d).sum::<f64>();
        prop_assert!(((total(&after) - total(&before)) / total(&before)).abs() < 1e-9);
    }

    #[test]
    fn kept_islands_dominate_dropped(areas in prop::collection::vec(0.0f64..10.0, 1..40), k in 1usize..50) {
        let islands: Vec<UvIsland> = areas
            .iter()
            .enumerate()
            .map(|(id, &a)| UvIsland { island_id: id, triangle_ids: vec![id], uv_bbox: [0.0, 0.0, 1.0, 1.0], area3d: a })
            .collect();
        let (kept, report) = select_top_k(&islands, k);
        prop_assert_eq!(kept.len(), k.min(areas.len()));
        let min_kept = kept.iter().map(|i| i.area3d).fold(f64::INFINITY, f64::min);
        for &d in &report.dropped_island_ids {
            prop_assert!(areas[d] <= min_kept);
        }
        prop_assert!((0.0..=1.0).contains(&report.dropped_area_fraction));
    }
}
