use super::*;
use crate::model::StatePair;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn field_from(grid: GridSpec, f: impl Fn(&[f64]) -> (f64, f64)) -> FieldState {
    let mut s = FieldState::uniform(grid.clone(), StatePair::default());
    for i in 0..grid.node_count() {
        let (u, v) = f(&grid.position(&grid.unravel(i).unwrap()));
        s.u[i] = u;
        s.v[i] = v;
    }
    s
}

/// A few random plane waves, enough to produce many crossings.
fn wavy(grid: GridSpec, seed: u64) -> FieldState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.ndim();
    let waves: Vec<(Vec<f64>, f64, f64)> = (0..6)
        .map(|_| {
            let k: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.8..0.8)).collect();
            (k, rng.gen_range(0.0..6.3), rng.gen_range(0.5..1.0))
        })
        .collect();
    field_from(grid, |x| {
        let w = |i: usize| {
            let (k, ph, a) = &waves[i];
            a * (k.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() + ph).sin()
        };
        (w(0) + w(1) + w(2), w(3) + w(4) + w(5))
    })
}

fn sole_slice(grid: &GridSpec) -> SliceSpec {
    SliceSpec::new(grid, 0, 1, vec![]).unwrap()
}

#[test]
fn crossing_lines_give_one_point() {
    let grid = GridSpec::new(vec![9, 9], 0.5, vec![0.0, 0.0]).unwrap();
    let s = field_from(grid.clone(), |x| (x[0] - 1.3, x[1] - 2.1));
    let all = ConductionMask::all_active(grid.clone());
    let d = detect_in_slice(&s, &all, &sole_slice(&grid), Thresholds::default());
    assert_eq!(d.points.len(), 1);
    let p = &d.points[0];
    assert!((p.position[0] - 1.3).abs() < 1e-12);
    assert!((p.position[1] - 2.1).abs() < 1e-12);
    assert_eq!(p.chirality, 1);
    assert_eq!(p.cell, (2, 4));
}

#[test]
fn same_sign_fields_give_nothing() {
    let grid = GridSpec::cube(2, 8, 1.0).unwrap();
    let s = field_from(grid.clone(), |x| (1.0 + x[0], -2.0 - x[1] * x[1]));
    let all = ConductionMask::all_active(grid.clone());
    assert!(
        detect_in_slice(&s, &all, &sole_slice(&grid), Thresholds::default())
            .points
            .is_empty()
    );
}

#[test]
fn thresholds_shift_the_level_sets() {
    let grid = GridSpec::cube(2, 8, 1.0).unwrap();
    let s = field_from(grid.clone(), |x| (x[0], x[1]));
    let all = ConductionMask::all_active(grid.clone());
    let th = Thresholds { u0: 2.25, v0: 4.5 };
    let d = detect_in_slice(&s, &all, &sole_slice(&grid), th);
    assert_eq!(d.points.len(), 1);
    assert!((d.points[0].position[0] - 2.25).abs() < 1e-12);
    assert!((d.points[0].position[1] - 4.5).abs() < 1e-12);
}

#[test]
fn oblique_lines_meet_at_hand_solution() {
    // u = x - 0.3h, v = x + y - 0.9h: x = 0.3h, y = 0.6h
    for h in [1.0, 0.5, 0.25] {
        let grid = GridSpec::new(vec![3, 3], h, vec![0.0, 0.0]).unwrap();
        let s = field_from(grid.clone(), |x| (x[0] - 0.3 * h, x[0] + x[1] - 0.9 * h));
        let all = ConductionMask::all_active(grid.clone());
        let d = detect_in_slice(&s, &all, &sole_slice(&grid), Thresholds::default());
        assert_eq!(d.points.len(), 1);
        let p = &d.points[0];
        assert_eq!(p.cell, (0, 0));
        assert!((p.position[0] - 0.3 * h).abs() < 1e-12);
        assert!((p.position[1] - 0.6 * h).abs() < 1e-12);
        // du/dx = 1, du/dy = 0, dv/dx = 1, dv/dy = 1: det = 1
        assert_eq!(p.chirality, 1);
    }
}

#[test]
fn cell_crossing_matches_brute_force_linear_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..2000 {
        let u: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        // least-squares plane a + b s + c t through the four corners
        let corners = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
        let fit = |f: &[f64; 4]| {
            let a = nalgebra::Matrix4x3::from_fn(|r, c| match c {
                0 => 1.0,
                1 => corners[r].0,
                _ => corners[r].1,
            });
            let b = nalgebra::Vector4::from_column_slice(f);
            (a.transpose() * a)
                .lu()
                .solve(&(a.transpose() * b))
                .unwrap()
        };
        let (pu, pv) = (fit(&u), fit(&v));
        let m = nalgebra::Matrix2::new(pu[1], pu[2], pv[1], pv[2]);
        let st = m.lu().solve(&nalgebra::Vector2::new(-pu[0], -pv[0]));
        let got = cell_crossing(u, v);
        let spans = |c: &[f64; 4]| c.iter().any(|&x| x <= 0.0) && c.iter().any(|&x| x >= 0.0);
        match (got, st) {
            (Some((s, t, chi)), Some(st)) => {
                assert!((s - st[0]).abs() < 1e-9 && (t - st[1]).abs() < 1e-9);
                assert_eq!(chi as f64, m.determinant().signum());
                assert!((0.0..1.0).contains(&s) && (0.0..1.0).contains(&t));
            }
            (None, Some(st)) => {
                let inside = (0.0..1.0).contains(&st[0]) && (0.0..1.0).contains(&st[1]);
                assert!(!inside || !spans(&u) || !spans(&v));
            }
            (Some(_), None) => panic!("crossing reported for singular system"),
            (None, None) => {}
        }
    }
}

#[test]
fn sign_symmetries() {
    let grid = GridSpec::cube(2, 40, 0.5).unwrap();
    let s = wavy(grid.clone(), 3);
    let all = ConductionMask::all_active(grid.clone());
    let slice = sole_slice(&grid);
    let base = detect_in_slice(&s, &all, &slice, Thresholds::default()).points;
    assert!(base.len() >= 3, "test field too flat: {}", base.len());

    let mut both = s.clone();
    both.u.iter_mut().for_each(|x| *x = -*x);
    both.v.iter_mut().for_each(|x| *x = -*x);
    let neg = detect_in_slice(&both, &all, &slice, Thresholds::default()).points;
    assert_eq!(neg.len(), base.len());
    for (a, b) in base.iter().zip(&neg) {
        assert_eq!(a.position, b.position);
        assert_eq!(a.chirality, b.chirality);
    }

    let mut only_u = s.clone();
    only_u.u.iter_mut().for_each(|x| *x = -*x);
    let flipped = detect_in_slice(&only_u, &all, &slice, Thresholds::default()).points;
    assert_eq!(flipped.len(), base.len());
    for (a, b) in base.iter().zip(&flipped) {
        assert_eq!(a.position, b.position);
        assert_eq!(a.chirality, -b.chirality);
    }
}

#[test]
fn points_lie_in_their_cells() {
    let grid = GridSpec::cube(3, 14, 0.5).unwrap();
    let s = wavy(grid.clone(), 5);
    let all = ConductionMask::all_active(grid.clone());
    let mut total = 0;
    for slice in all_slices(&grid) {
        for p in detect_in_slice(&s, &all, &slice, Thresholds::default()).points {
            let (a, b) = slice.axes();
            let lo_a = p.cell.0 as f64 * 0.5;
            let lo_b = p.cell.1 as f64 * 0.5;
            assert!(p.position[a] >= lo_a && p.position[a] < lo_a + 0.5);
            assert!(p.position[b] >= lo_b && p.position[b] < lo_b + 0.5);
            for (ax, f) in slice.fixed_axes(3).into_iter().zip(slice.fixed()) {
                assert_eq!(p.position[ax], *f as f64 * 0.5);
            }
            total += 1;
        }
    }
    assert!(total > 10);
}

#[test]
fn masked_cells_are_skipped_and_counted() {
    let grid = GridSpec::cube(2, 9, 1.0).unwrap();
    let s = field_from(grid.clone(), |x| (x[0] - 4.5, x[1] - 4.5));
    let mut active = vec![true; grid.node_count()];
    active[grid.flat_index(&[4, 4]).unwrap()] = false;
    let mask = ConductionMask::new(grid.clone(), active).unwrap();
    let d = detect_in_slice(&s, &mask, &sole_slice(&grid), Thresholds::default());
    assert!(d.points.is_empty());
    assert_eq!(d.skipped_cells, 4);
    let r = track_superfilament(&s, &mask, Thresholds::default()).unwrap();
    assert_eq!(r.skipped_cells, 4);
}

#[test]
fn two_dimensional_tracking_is_the_single_slice() {
    let grid = GridSpec::cube(2, 30, 0.5).unwrap();
    let s = wavy(grid.clone(), 8);
    let all = ConductionMask::all_active(grid.clone());
    assert_eq!(all_slices(&grid).len(), 1);
    let direct = detect_in_slice(&s, &all, &sole_slice(&grid), Thresholds::default()).points;
    let tracked = track_superfilament(&s, &all, Thresholds::default()).unwrap();
    assert_eq!(tracked.raw_count, direct.len());
    assert_eq!(tracked.cloud.points, dedup(direct, 0.25));
}

#[test]
fn slice_enumeration_counts() {
    let grid = GridSpec::new(vec![3, 4, 5, 6], 1.0, vec![0.0; 4]).unwrap();
    let slices = all_slices(&grid);
    let expected: usize = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        .iter()
        .map(|&(p, q)| {
            let s = grid.shape();
            (0..4)
                .filter(|&k| k != p && k != q)
                .map(|k| s[k])
                .product::<usize>()
        })
        .sum();
    assert_eq!(slices.len(), expected);
    assert_eq!(slices[0].axes(), (0, 1));
    assert_eq!(slices[0].fixed(), &[0, 0]);
    assert_eq!(slices[1].fixed(), &[0, 1]);
    assert_eq!(slices.last().unwrap().axes(), (2, 3));
    assert_eq!(slices.last().unwrap().fixed(), &[2, 3]);
}

#[test]
fn slice_spec_validation() {
    let grid = GridSpec::cube(4, 5, 1.0).unwrap();
    let s = SliceSpec::new(&grid, 3, 1, vec![2, 4]).unwrap();
    assert_eq!(s.axes(), (1, 3));
    assert_eq!(s.fixed_axes(4), vec![0, 2]);
    assert!(SliceSpec::new(&grid, 1, 1, vec![0, 0]).is_err());
    assert!(SliceSpec::new(&grid, 0, 4, vec![0, 0]).is_err());
    assert!(SliceSpec::new(&grid, 0, 1, vec![0]).is_err());
    assert!(matches!(
        SliceSpec::new(&grid, 0, 1, vec![0, 5]),
        Err(Error::Index { axis: 3, .. })
    ));
}

#[test]
fn tilted_scroll_line_is_collinear_and_deduplicated() {
    let grid = GridSpec::cube(3, 16, 1.0).unwrap();
    let s = field_from(grid.clone(), |x| {
        (x[0] - 6.3 - 0.3 * x[2], x[1] - 5.7 - 0.2 * x[2])
    });
    let all = ConductionMask::all_active(grid.clone());
    let r = track_superfilament(&s, &all, Thresholds::default()).unwrap();
    assert!(
        r.raw_count > r.cloud.len(),
        "expected duplicates across plane families"
    );
    assert!(r.cloud.len() >= 16);
    let fit = fit_affine_subspace(&r.cloud.positions(), 1).unwrap();
    assert!(fit.max_residual() < 1e-9);
    let dir = &fit.basis[0];
    let norm = (1.0f64 + 0.09 + 0.04).sqrt();
    let cos = (dir[0] * 0.3 + dir[1] * 0.2 + dir[2]) / norm;
    assert!((cos.abs() - 1.0).abs() < 1e-9);
    // no two kept points closer than h/2
    let pts = r.cloud.positions();
    for i in 0..pts.len() {
        for j in 0..i {
            let d: f64 = pts[i]
                .iter()
                .zip(&pts[j])
                .map(|(a, b)| (a - b).powi(2))
                .sum();
            assert!(d.sqrt() >= 0.5);
        }
    }
}

#[test]
fn tracking_is_idempotent_and_deterministic() {
    let grid = GridSpec::cube(3, 12, 1.0).unwrap();
    let s = wavy(grid.clone(), 21);
    let all = ConductionMask::all_active(grid.clone());
    let a = track_superfilament(&s, &all, Thresholds::default()).unwrap();
    let b = track_superfilament(&s, &all, Thresholds::default()).unwrap();
    assert_eq!(a.cloud, b.cloud);
    let again = dedup(a.cloud.points.clone(), 0.5);
    assert_eq!(again, a.cloud.points);
}

#[test]
fn dedup_matches_quadratic_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let grid = GridSpec::cube(4, 3, 1.0).unwrap();
    let slice = SliceSpec::new(&grid, 0, 1, vec![0, 0]).unwrap();
    let pts: Vec<FilamentPoint> = (0..400)
        .map(|_| FilamentPoint {
            position: (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            slice: slice.clone(),
            cell: (0, 0),
            time: 0.0,
            chirality: 1,
        })
        .collect();
    let mut oracle: Vec<FilamentPoint> = Vec::new();
    for p in &pts {
        let near = oracle.iter().any(|q| {
            q.position
                .iter()
                .zip(&p.position)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                < 0.25
        });
        if !near {
            oracle.push(p.clone());
        }
    }
    assert_eq!(dedup(pts, 0.5), oracle);
}

#[test]
fn axis_permutation_permutes_points() {
    let grid = GridSpec::new(vec![10, 12, 9], 0.5, vec![0.0; 3]).unwrap();
    let s = wavy(grid.clone(), 17);
    let perm = [2usize, 0, 1]; // new axis k is old axis perm[k]
    let shape: Vec<usize> = perm.iter().map(|&k| grid.shape()[k]).collect();
    let g2 = GridSpec::new(shape, 0.5, vec![0.0; 3]).unwrap();
    let mut s2 = FieldState::uniform(g2.clone(), StatePair::default());
    for i in 0..g2.node_count() {
        let c = g2.unravel(i).unwrap();
        let mut old = [0; 3];
        for k in 0..3 {
            old[perm[k]] = c[k];
        }
        let j = grid.flat_index(&old).unwrap();
        s2.u[i] = s.u[j];
        s2.v[i] = s.v[j];
    }
    let raw = |st: &FieldState| {
        let m = ConductionMask::all_active(st.grid.clone());
        let mut v: Vec<Vec<f64>> = all_slices(&st.grid)
            .iter()
            .flat_map(|sl| detect_in_slice(st, &m, sl, Thresholds::default()).points)
            .map(|p| p.position)
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    };
    let a: Vec<Vec<f64>> = {
        let mut v: Vec<Vec<f64>> = raw(&s)
            .into_iter()
            .map(|p| perm.iter().map(|&k| p[k]).collect())
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    };
    let b = raw(&s2);
    assert!(!a.is_empty());
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        for (p, q) in x.iter().zip(y) {
            assert!((p - q).abs() < 1e-12);
        }
    }
}

fn random_orthonormal(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    while out.len() < k {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for b in &out {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-3 {
            out.push(v.into_iter().map(|x| x / nv).collect());
        }
    }
    out
}

#[test]
fn exact_plane_fits_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let basis = random_orthonormal(&mut rng, 4, 2);
    let base = [3.0, -1.0, 7.0, 2.0];
    let pts: Vec<Vec<f64>> = (0..50)
        .map(|_| {
            let (a, b) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            (0..4)
                .map(|k| base[k] + a * basis[0][k] + b * basis[1][k])
                .collect()
        })
        .collect();
    let fit = fit_affine_subspace(&pts, 2).unwrap();
    assert!(fit.max_residual() <= 1e-9);
    assert_eq!(fit.rank, 2);
    for nb in &fit.normal_basis {
        for b in &basis {
            let d: f64 = nb.iter().zip(b).map(|(x, y)| x * y).sum();
            assert!(d.abs() < 1e-9);
        }
    }
}

#[test]
fn three_points_span_a_plane() {
    let pts = vec![
        vec![0.0, 0.0, 1.0, 2.0],
        vec![1.0, 0.5, 0.0, 0.0],
        vec![-2.0, 3.0, 1.0, 1.0],
    ];
    let fit = fit_affine_subspace(&pts, 2).unwrap();
    assert!(fit.max_residual() < 1e-12);
}

#[test]
fn circle_against_a_line_has_radius_residual() {
    let pts: Vec<Vec<f64>> = (0..64)
        .map(|k| {
            let th = k as f64 * std::f64::consts::TAU / 64.0;
            vec![th.cos(), th.sin(), 0.0]
        })
        .collect();
    let fit = fit_affine_subspace(&pts, 1).unwrap();
    assert!((fit.max_residual() - 1.0).abs() < 1e-9);
}

#[test]
fn degenerate_fits_are_reported() {
    let line: Vec<Vec<f64>> = (0..5)
        .map(|k| vec![k as f64, 2.0 * k as f64, 0.0])
        .collect();
    assert!(matches!(
        fit_affine_subspace(&line, 2),
        Err(Error::RankDeficient {
            rank: 1,
            requested: 2
        })
    ));
    assert!(matches!(
        fit_affine_subspace(&line[..2], 2),
        Err(Error::InsufficientSampling { have: 2, need: 3 })
    ));
}

fn ring_points(
    rng: &mut ChaCha8Rng,
    n: usize,
    r: f64,
    noise: f64,
) -> (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>) {
    let basis = random_orthonormal(rng, 4, 2);
    let c = vec![10.0, 5.0, -3.0, 4.0];
    let pts = (0..n)
        .map(|k| {
            let th = k as f64 * std::f64::consts::TAU / n as f64;
            let rr = r + if noise > 0.0 {
                rng.gen_range(-noise..noise)
            } else {
                0.0
            };
            (0..4)
                .map(|i| c[i] + rr * (th.cos() * basis[0][i] + th.sin() * basis[1][i]))
                .collect()
        })
        .collect();
    (pts, c, basis)
}

#[test]
fn ring_radius_of_exact_circle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (pts, c, _) = ring_points(&mut rng, 40, 6.5, 0.0);
    let fit = fit_affine_subspace(&pts, 2).unwrap();
    let ring = ring_radius(&pts, &fit).unwrap();
    assert!((ring.radius - 6.5).abs() < 1e-12);
    assert!(ring.spread < 1e-12);
    for k in 0..4 {
        assert!((ring.center[k] - c[k]).abs() < 1e-12);
    }
}

#[test]
fn ring_radius_with_noise_stays_within_amplitude() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for trial in 0..200 {
        let delta = 0.05 + 0.01 * (trial % 20) as f64;
        let n = 8 + trial % 50;
        let (pts, _, _) = ring_points(&mut rng, n, 5.0, delta);
        let fit = fit_affine_subspace(&pts, 2).unwrap();
        let ring = ring_radius(&pts, &fit).unwrap();
        assert!(
            (ring.radius - 5.0).abs() <= delta,
            "trial {trial}: {}",
            ring.radius
        );
    }
}

#[test]
fn ring_radius_needs_eight_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (pts, _, _) = ring_points(&mut rng, 7, 2.0, 0.0);
    let fit = fit_affine_subspace(&pts, 2).unwrap();
    assert!(matches!(
        ring_radius(&pts, &fit),
        Err(Error::InsufficientSampling { have: 7, need: 8 })
    ));
}

#[test]
fn csv_layout() {
    assert_eq!(
        csv_header(4),
        "t_ms,axis_p,axis_q,fixed_0,fixed_1,x0_mm,x1_mm,x2_mm,x3_mm,chirality"
    );
    let grid = GridSpec::cube(4, 5, 1.0).unwrap();
    let rest = FieldState::uniform(grid.clone(), StatePair::new(-1.0, -0.6));
    let r = track_superfilament(
        &rest,
        &ConductionMask::all_active(grid.clone()),
        Thresholds::default(),
    )
    .unwrap();
    let mut buf = Vec::new();
    write_csv(&mut buf, 4, &r.cloud, true).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        format!("{}\n", csv_header(4))
    );

    let cloud = FilamentPointCloud {
        time: 2.5,
        points: vec![FilamentPoint {
            position: vec![1.0, 2.5, 3.0, 4.0],
            slice: SliceSpec::new(&grid, 0, 1, vec![3, 4]).unwrap(),
            cell: (1, 2),
            time: 2.5,
            chirality: -1,
        }],
    };
    let mut buf = Vec::new();
    write_csv(&mut buf, 4, &cloud, false).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "2.5,0,1,3,4,1,2.5,3,4,-1\n"
    );
}

fn column_points(grid: &GridSpec, empty: &[(usize, usize)]) -> Vec<FilamentPoint> {
    let mut out = Vec::new();
    for i in 0..grid.shape()[2] {
        for j in 0..grid.shape()[3] {
            if empty.contains(&(i, j)) {
                continue;
            }
            out.push(FilamentPoint {
                position: vec![0.5, 0.5, i as f64, j as f64],
                slice: SliceSpec::new(grid, 0, 1, vec![i, j]).unwrap(),
                cell: (0, 0),
                time: 0.0,
                chirality: 1,
            });
        }
    }
    out
}

#[test]
fn hole_of_one_and_two_columns() {
    let g = GridSpec::new(vec![3, 3, 5, 5], 1.0, vec![0.0; 4]).unwrap();
    let one = hole_stats(&column_points(&g, &[(2, 2)]), &g, (0, 1), [2.0, 2.0], 1.5).unwrap();
    assert_eq!(one.columns, 1);
    assert_eq!(one.area, 1.0);
    assert_eq!(one.perimeter, 4.0);
    assert_eq!(one.coverage, 1.0);
    assert!((one.equivalent_radius - (1.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
    let two = hole_stats(
        &column_points(&g, &[(2, 2), (2, 3)]),
        &g,
        (0, 1),
        [2.0, 2.0],
        1.5,
    )
    .unwrap();
    assert_eq!(two.columns, 2);
    assert_eq!(two.perimeter, 6.0);
}

#[test]
fn hole_search_is_limited_to_the_window() {
    let g = GridSpec::new(vec![3, 3, 5, 5], 0.5, vec![0.0; 4]).unwrap();
    // a far column is missing: it lowers coverage but is not part of the hole
    let pts = column_points(&g, &[(0, 0), (2, 2)]);
    let s = hole_stats(&pts, &g, (0, 1), [1.0, 1.0], 0.6).unwrap();
    assert_eq!(s.columns, 1);
    assert_eq!(s.area, 0.25);
    assert_eq!(s.perimeter, 2.0);
    assert!((s.coverage - 19.0 / 20.0).abs() < 1e-15);
    // points of another family do not fill columns
    let mut other = pts.clone();
    for p in &mut other {
        p.slice = SliceSpec::new(&g, 0, 2, vec![0, 0]).unwrap();
    }
    assert_eq!(
        hole_stats(&other, &g, (0, 1), [1.0, 1.0], 0.6)
            .unwrap()
            .columns,
        5
    );
    let g3 = GridSpec::cube(3, 4, 1.0).unwrap();
    assert!(hole_stats(&[], &g3, (0, 1), [0.0, 0.0], 1.0).is_err());
}
