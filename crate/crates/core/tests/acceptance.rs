use std::io::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use polymap::baseline::build_occupancy_grid;
use polymap::coloring::{Color, Coloring, VertexKind};
use polymap::diagnostics::{prior_statistics, PriorRun};
use polymap::geometry::{
    ray_segment_hit, visibility_sweep, Cone, FeatureKind, GridSpec, Point2, Rect, SweepEdge,
};
use polymap::io::RunConfig;
use polymap::pipeline::{estimate_map, sample_posterior};
use polymap::prior::{unnormalized_log_density, ArakParams};
use polymap::raster::Raster;
use polymap::sampler::{build, draw_choice, inverse_choice, Chain, MoveKind, NoData, SamplerConfig, StepOutcome};
use polymap::sensors::{LikelihoodState, Observation, PointColorObs, SensorParams};
use polymap::sim::{classification_accuracy, make_world, simulate_trajectory, Layout, LaserRig, SonarRig, WorldSpec};

/// Print one verdict line past the test harness's output capture.
fn report(criterion: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "{verdict} criterion {criterion}: {detail}").unwrap();
    out.flush().unwrap();
}

fn unit_square() -> Rect {
    Rect::from_size(1.0, 1.0).unwrap()
}

/// Prior states taken along one chain, `gap` steps apart.
fn prior_states(p: f64, window: Rect, n: usize, gap: usize, seed: u64) -> Vec<Coloring> {
    let mut cfg = SamplerConfig::new(ArakParams::new(p, window).unwrap());
    cfg.seed = seed;
    let init = Coloring::with_index_cell(window, Color::White, 0.25).unwrap();
    let mut chain = Chain::new(&cfg, init, NoData, 0);
    (0..n)
        .map(|_| {
            for _ in 0..gap {
                chain.step(1.0);
            }
            chain.coloring.clone()
        })
        .collect()
}

#[test]
fn c1_prior_edge_count() {
    let p = 0.5;
    let stats = prior_statistics(&PriorRun::unit_square(p, 500_000, 2_000_000)).unwrap();
    let expected = 4.0 * p + 4.0 * std::f64::consts::PI * p * p;
    let rel = (stats.mean_edges - expected).abs() / expected;
    let pass = rel <= 0.05;
    report(
        1,
        pass,
        &format!(
            "mean edges {:.4} (+/- {:.4}) vs {expected:.4}, relative error {rel:.4}",
            stats.mean_edges, stats.mean_edges_stderr
        ),
    );
    assert!(pass);
}

#[test]
fn c2_two_point_correlation() {
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for p in [0.25, 0.5] {
        let stats = prior_statistics(&PriorRun::unit_square(p, 500_000, 2_000_000)).unwrap();
        for pair in &stats.pairs {
            let expected = 0.5 * (1.0 + (-4.0 * p * pair.distance).exp());
            let err = (pair.fraction() - expected).abs();
            worst = worst.max(err);
            lines.push(format!("p={p} d={}: {:.4} vs {expected:.4}", pair.distance, pair.fraction()));
        }
    }
    let pass = worst <= 0.02 && lines.len() == 8;
    report(2, pass, &format!("largest deviation {worst:.4}; {}", lines.join(", ")));
    assert!(pass);
}

#[test]
fn c3_reversibility() {
    let mut cfg = SamplerConfig::new(ArakParams::new(2.0, unit_square()).unwrap());
    cfg.seed = 31;
    let mp = cfg.move_params();
    let mut rng = cfg.rng(7);
    let states = prior_states(2.0, unit_square(), 200, 300, 31);
    let target = 100_000;
    let mut proposals = 0usize;
    let mut applied_per_kind = [0usize; 13];
    let mut worst_density: f64 = 0.0;
    let mut mismatches = 0usize;
    'outer: loop {
        for state in &states {
            for kind in MoveKind::ALL {
                if proposals == target {
                    break 'outer;
                }
                let Ok(choice) = draw_choice(kind, state, &mp, &mut rng) else { continue };
                let Ok(prop) = build(state, &mp, &choice) else { continue };
                let mut c = state.clone();
                let Ok(Ok(applied)) = c.apply_checked(&prop.edit) else { continue };
                proposals += 1;
                applied_per_kind[kind as usize] += 1;
                let inv = inverse_choice(&choice, state, &applied);
                let Ok(back) = build(&c, &mp, &inv) else {
                    mismatches += 1;
                    continue;
                };
                let round_trip = (prop.log_reverse - prop.log_forward) + (back.log_reverse - back.log_forward);
                worst_density = worst_density.max(round_trip.abs());
                match c.apply_checked(&back.edit) {
                    Ok(Ok(_)) if c.canonical_form() == state.canonical_form() => {}
                    _ => mismatches += 1,
                }
            }
        }
    }
    let all_kinds = applied_per_kind.iter().all(|&n| n > 0);
    let pass = proposals == target && mismatches == 0 && worst_density <= 1e-9 && all_kinds;
    report(
        3,
        pass,
        &format!(
            "{proposals} proposals, {mismatches} failed inverses, largest log density mismatch {worst_density:.2e}, per kind {applied_per_kind:?}"
        ),
    );
    assert!(pass);
}

#[test]
fn c4_incremental_consistency() {
    let world = make_world(&WorldSpec::new(Layout::Corridor)).unwrap();
    let laser = LaserRig {
        beams: 45,
        ..Default::default()
    };
    let traj = world.trajectory(1.0, Some(laser), Some(SonarRig::default()));
    let params = SensorParams::default();
    let obs: Vec<Observation> =
        simulate_trajectory(&world.truth, &traj, &params, 2).unwrap().into_iter().map(|r| r.obs).collect();
    let lasers = obs.iter().filter(|o| matches!(o, Observation::Laser(_))).count();
    let sonars = obs.iter().filter(|o| matches!(o, Observation::Sonar(_))).count();
    let window = *world.truth.window();
    let arak = ArakParams::new(0.1, window).unwrap();
    let mut cfg = SamplerConfig::new(arak);
    cfg.seed = 12;
    let init = Coloring::with_index_cell(window, Color::White, 0.5).unwrap();
    let lik = LikelihoodState::new(&init, obs, params).unwrap();
    let mut chain = Chain::new(&cfg, init, lik, 0);
    let mut accepted = 0;
    let mut steps = 0u64;
    while accepted < 10_000 && steps < 20_000_000 {
        steps += 1;
        if let StepOutcome::Accepted(..) = chain.step(1.0) {
            accepted += 1;
        }
    }
    let cached = chain.log_posterior();
    let fresh = unnormalized_log_density(&chain.coloring, &arak) + chain.likelihood.recompute_total(&chain.coloring);
    let rel = (cached - fresh).abs() / fresh.abs().max(1.0);
    let pass = accepted == 10_000 && fresh.is_finite() && rel <= 1e-6;
    report(
        4,
        pass,
        &format!(
            "{accepted} accepts in {steps} steps on {lasers} laser + {sonars} sonar readings; cached {cached:.6} vs fresh {fresh:.6}, relative {rel:.2e}"
        ),
    );
    assert!(pass);
}

fn sweep_edges(c: &Coloring) -> Vec<SweepEdge> {
    c.edges()
        .map(|(id, e)| SweepEdge {
            id,
            seg: c.segment(id),
            corner: e.v.map(|v| c.vertex(v).is_some_and(|vx| vx.kind == VertexKind::Interior)),
        })
        .collect()
}

/// Compare the sweep with the nearest hit along `rays` evenly spaced rays.
/// Returns the number of disagreeing rays and of faces wide enough to be
/// hit that no ray found.
fn dense_ray_disagreements(edges: &[SweepEdge], cone: &Cone, rays: usize) -> (usize, usize) {
    let feats = visibility_sweep(edges, cone);
    let faces: Vec<_> = feats.iter().filter(|f| f.kind == FeatureKind::Face).collect();
    let step = 2.0 * cone.half_angle / rays as f64;
    let mut hit = vec![false; faces.len()];
    let mut wrong = 0;
    for k in 0..rays {
        let rel = -cone.half_angle + (k as f64 + 0.5) * step;
        let u = Point2::from_polar(1.0, cone.heading + rel);
        let nearest = edges
            .iter()
            .filter_map(|e| ray_segment_hit(cone.apex, u, cone.max_range, &e.seg).map(|t| (t, e.id)))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        let face = faces.iter().position(|f| f.angles.0 <= rel && rel <= f.angles.1);
        match (nearest, face) {
            (None, None) => {}
            (Some((t, id)), Some(i)) if faces[i].edge == id && faces[i].depth <= t + 1e-9 => hit[i] = true,
            _ => wrong += 1,
        }
    }
    let missed = faces.iter().zip(&hit).filter(|(f, h)| !**h && f.subtended_angle >= 2.0 * step).count();
    (wrong, missed)
}

#[test]
fn c5_geometry_oracles() {
    let window = Rect::from_size(3.0, 3.0).unwrap();
    let states = prior_states(1.5, window, 100, 500, 55);
    let mut rng = ChaCha8Rng::seed_from_u64(56);
    let mut ray_mismatches = 0;
    let mut ray_hits = 0;
    for k in 0..10_000 {
        let c = &states[k % states.len()];
        let origin = Point2::new(rng.random_range(0.0..3.0), rng.random_range(0.0..3.0));
        let dir = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let range = rng.random_range(0.1..5.0);
        let fast = c.index().ray_cast(origin, dir, range);
        let u = Point2::from_polar(1.0, dir);
        let brute = c
            .edges()
            .filter_map(|(id, _)| ray_segment_hit(origin, u, range, &c.segment(id)).map(|t| (t, id)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        match (fast, brute) {
            (None, None) => {}
            (Some(h), Some((t, id))) if h.edge == id && (h.distance - t).abs() <= 1e-9 => ray_hits += 1,
            _ => ray_mismatches += 1,
        }
    }

    let mut wrong_rays = 0;
    let mut missed_faces = 0;
    let mut scenes = 0;
    for c in &states {
        let edges = sweep_edges(c);
        let apex = loop {
            let q = Point2::new(rng.random_range(0.2..2.8), rng.random_range(0.2..2.8));
            if edges.iter().all(|e| e.seg.distance_to_point(q) > 1e-3) {
                break q;
            }
        };
        let cone = Cone::new(
            apex,
            rng.random_range(-3.1..3.1),
            rng.random_range(0.05..1.2),
            rng.random_range(0.5..3.5),
        )
        .unwrap();
        let (w, m) = dense_ray_disagreements(&edges, &cone, 10_000);
        wrong_rays += w;
        missed_faces += m;
        scenes += 1;
    }
    let pass = ray_mismatches == 0 && ray_hits > 1000 && wrong_rays == 0 && missed_faces == 0 && scenes == 100;
    report(
        5,
        pass,
        &format!(
            "ray cast: {ray_mismatches} mismatches in 10000 queries ({ray_hits} hits); sweep: {wrong_rays} disagreeing rays, {missed_faces} unseen faces over {scenes} scenes"
        ),
    );
    assert!(pass);
}

fn accuracy(r: &Raster, truth: &Coloring) -> f64 {
    classification_accuracy(r, truth, 0.5).unwrap()
}

fn baseline_accuracy(cfg: &RunConfig, truth: &Coloring, obs: &[Observation]) -> f64 {
    let grid = cfg.grid(*truth.window()).unwrap();
    let r = Raster::new(grid, build_occupancy_grid(grid, cfg.baseline, obs).probabilities()).unwrap();
    accuracy(&r, truth)
}

#[test]
fn c6_laser_mapping_and_c9_throughput() {
    let world = make_world(&WorldSpec::new(Layout::Corridor)).unwrap();
    let traj = world.trajectory(0.75, Some(LaserRig::default()), None);
    let obs: Vec<Observation> = simulate_trajectory(&world.truth, &traj, &SensorParams::default(), 1)
        .unwrap()
        .into_iter()
        .map(|r| r.obs)
        .collect();
    let window = *world.truth.window();
    let cfg = RunConfig {
        p: 0.1,
        cell_size: 0.05,
        anneal_steps: 200_000,
        burn_in: 40_000,
        steps: 200_000,
        ..Default::default()
    };
    let started = Instant::now();
    let map = estimate_map(&cfg, window, &obs).unwrap();
    let map_acc = accuracy(&Raster::from_coloring(&map.report.best, cfg.grid(window).unwrap()), &world.truth);
    let post = sample_posterior(&cfg, window, &obs).unwrap();
    let post_acc = accuracy(&post.p_black, &world.truth);
    let base_acc = baseline_accuracy(&cfg, &world.truth, &obs);
    let minutes = started.elapsed().as_secs_f64() / 60.0;
    let pass = obs.len() >= 4500 && map_acc >= 0.95 && post_acc >= base_acc && minutes < 60.0;
    report(
        6,
        pass,
        &format!(
            "{} laser readings: MAP accuracy {map_acc:.4} ({} edges), posterior {post_acc:.4}, baseline {base_acc:.4}, {minutes:.2} min",
            obs.len(),
            map.report.best.edge_count()
        ),
    );

    let map_rate = map.proposals_per_second();
    let post_rate = post.proposals as f64 / post.seconds.max(1e-9);
    report(
        9,
        map_rate.min(post_rate) >= 1000.0,
        &format!("{map_rate:.0} proposals/s annealing, {post_rate:.0} proposals/s sampling (reported, not gating)"),
    );
    assert!(pass);
}

#[test]
fn c7_sonar_mapping() {
    let world = make_world(&WorldSpec::new(Layout::RoomsOffHallway)).unwrap();
    let traj = world.trajectory(0.25, None, Some(SonarRig::default()));
    let obs: Vec<Observation> = simulate_trajectory(&world.truth, &traj, &SensorParams::default(), 1)
        .unwrap()
        .into_iter()
        .map(|r| r.obs)
        .collect();
    let window = *world.truth.window();
    let cfg = RunConfig {
        p: 0.1,
        cell_size: 0.05,
        warmup_steps: 200_000,
        burn_in: 50_000,
        steps: 200_000,
        ..Default::default()
    };
    let post = sample_posterior(&cfg, window, &obs).unwrap();
    let post_acc = accuracy(&post.p_black, &world.truth);
    let base_acc = baseline_accuracy(&cfg, &world.truth, &obs);
    let gain = 100.0 * (post_acc - base_acc);
    let pass = obs.len() >= 2000 && gain >= 5.0;
    report(
        7,
        pass,
        &format!(
            "{} sonar readings: posterior accuracy {post_acc:.4}, baseline {base_acc:.4}, gain {gain:.2} points",
            obs.len()
        ),
    );
    assert!(pass);
}

#[test]
fn c8_point_observations() {
    let window = Rect::from_size(3.0, 3.0).unwrap();
    let black = Rect::new(Point2::new(1.0, 1.0), Point2::new(2.0, 2.0)).unwrap();
    let (mu_black, mu_white, sigma) = (1.0, 0.0, 0.4);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut obs = Vec::new();
    for i in 0..30 {
        for j in 0..30 {
            let q = Point2::new(0.05 + 0.1 * i as f64, 0.05 + 0.1 * j as f64);
            let mean = if black.contains(q) { mu_black } else { mu_white };
            let value = Normal::new(mean, sigma).unwrap().sample(&mut rng);
            obs.push(Observation::Point(PointColorObs::new(q, value, mu_black, mu_white, sigma).unwrap()));
        }
    }
    let cfg = RunConfig {
        p: 0.1,
        cell_size: 0.1,
        burn_in: 50_000,
        steps: 200_000,
        seed: 8,
        ..Default::default()
    };
    let post = sample_posterior(&cfg, window, &obs).unwrap();
    let grid: GridSpec = post.p_black.grid;
    let (mut inside_min, mut outside_max) = (1.0f64, 0.0f64);
    for (k, &v) in post.p_black.values.iter().enumerate() {
        let q = grid.cell_center(grid.coord(k));
        let margin = 0.15;
        let deep_inside = q.x > 1.0 + margin && q.x < 2.0 - margin && q.y > 1.0 + margin && q.y < 2.0 - margin;
        let far_outside = q.x < 1.0 - margin || q.x > 2.0 + margin || q.y < 1.0 - margin || q.y > 2.0 + margin;
        if deep_inside {
            inside_min = inside_min.min(v);
        } else if far_outside {
            outside_max = outside_max.max(v);
        }
    }
    let pass = inside_min > 0.9 && outside_max < 0.1;
    report(
        8,
        pass,
        &format!(
            "{} point readings: smallest P(black) inside {inside_min:.4}, largest outside {outside_max:.4}",
            obs.len()
        ),
    );
    assert!(pass);
}

#[test]
fn oracle_formulas_match_library() {
    let w = unit_square();
    for p in [0.1, 0.25, 0.5] {
        let a = ArakParams::new(p, w).unwrap();
        let lib = polymap::prior::expected_edge_count(&a).unwrap();
        assert!((lib - (4.0 * p + 4.0 * std::f64::consts::PI * p * p)).abs() < 1e-12);
        for d in [0.05, 0.1, 0.2, 0.4, 1.0] {
            let lib = polymap::prior::same_color_probability(p, d);
            assert!((lib - 0.5 * (1.0 + (-4.0 * p * d).exp())).abs() < 1e-12);
        }
    }
}
