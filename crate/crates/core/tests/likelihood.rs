use polymap::coloring::{Color, Coloring, Edit, NewVertex, VRef, VertexKind};
use polymap::geometry::{Point2, Pose, Rect};
use polymap::prior::ArakParams;
use polymap::sampler::{Chain, Likelihood, SamplerConfig, StepOutcome};
use polymap::sensors::{
    laser_log_likelihood, point_log_likelihood, sonar_log_likelihood, LaserObs, LikelihoodState, Observation,
    PointColorObs, SensorParams, SonarObs, DEFAULT_SONAR_HALF_ANGLE,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_observations(window: &Rect, n: usize, seed: u64) -> Vec<Observation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for k in 0..n {
        let pose = Pose::new(
            rng.random_range(window.min.x + 0.2..window.max.x - 0.2),
            rng.random_range(window.min.y + 0.2..window.max.y - 0.2),
            rng.random_range(-3.1..3.1),
        );
        let flag = rng.random_bool(0.2);
        out.push(match k % 3 {
            0 => {
                let max = 3.0;
                let r = if flag { max } else { rng.random_range(0.05..max) };
                Observation::Laser(LaserObs::new(pose, rng.random_range(-1.5..1.5), r, max, flag).unwrap())
            }
            1 => {
                let max = 2.5;
                let r = if flag { max } else { rng.random_range(0.05..max) };
                Observation::Sonar(SonarObs::new(pose, 0.0, DEFAULT_SONAR_HALF_ANGLE, r, max, flag).unwrap())
            }
            _ => Observation::Point(PointColorObs::new(pose.pos, rng.random_range(-0.5..1.5), 1.0, 0.0, 0.5).unwrap()),
        });
    }
    out
}

fn direct_total(c: &Coloring, obs: &[Observation], p: &SensorParams) -> f64 {
    obs.iter()
        .map(|o| match o {
            Observation::Laser(l) => laser_log_likelihood(l, c, &p.laser),
            Observation::Sonar(s) => sonar_log_likelihood(s, c, &p.sonar),
            Observation::Point(q) => point_log_likelihood(q, c.color_at(q.location)),
        })
        .sum()
}

#[test]
fn cached_likelihood_tracks_recomputation() {
    let window = Rect::from_size(3.0, 3.0).unwrap();
    let params = SensorParams::default();
    let obs = random_observations(&window, 300, 11);
    let init = Coloring::with_index_cell(window, Color::White, 0.25).unwrap();
    let lik = LikelihoodState::new(&init, obs.clone(), params).unwrap();
    assert!((lik.total() - direct_total(&init, &obs, &params)).abs() < 1e-9);
    let mut cfg = SamplerConfig::new(ArakParams::new(1.5, window).unwrap());
    cfg.seed = 8;
    let mut chain = Chain::new(&cfg, init, lik, 0);
    let mut accepted = 0;
    let mut steps = 0;
    while accepted < 3000 {
        steps += 1;
        // Warm enough to keep moving despite the noisy data.
        if let StepOutcome::Accepted(..) = chain.step(4.0) {
            accepted += 1;
            if accepted <= 500 || accepted % 250 == 0 {
                let stale = chain.likelihood.stale_observations(&chain.coloring);
                assert!(stale.is_empty(), "stale after {accepted} accepts: {stale:?}");
            }
        }
        assert!(steps < 2_000_000, "chain stopped accepting");
    }
    let cached = chain.likelihood.total();
    let fresh = direct_total(&chain.coloring, &obs, &params);
    assert!(fresh.is_finite());
    assert!((cached - fresh).abs() <= 1e-6 * fresh.abs().max(1.0), "{cached} vs {fresh}");
    assert!(chain.coloring.edge_count() > 0);
}

#[test]
fn edits_outside_every_extent_touch_nothing() {
    let window = Rect::from_size(4.0, 4.0).unwrap();
    let pose = Pose::new(0.5, 0.5, 0.0);
    let obs = vec![Observation::Laser(LaserObs::new(pose, 0.0, 1.0, 1.0, true).unwrap())];
    let mut c = Coloring::with_index_cell(window, Color::White, 0.5).unwrap();
    let mut lik = LikelihoodState::new(&c, obs, SensorParams::default()).unwrap();
    let far = Coloring::from_polygons(
        window,
        Color::White,
        0.5,
        &[vec![Point2::new(3.0, 3.0), Point2::new(3.5, 3.0), Point2::new(3.2, 3.5)]],
    )
    .unwrap();
    let edit = Edit {
        add_vertices: far
            .vertices()
            .map(|(_, v)| NewVertex { pos: v.pos, kind: v.kind })
            .collect(),
        add_edges: vec![
            [VRef::New(0), VRef::New(1)],
            [VRef::New(1), VRef::New(2)],
            [VRef::New(2), VRef::New(0)],
        ],
        region: far.vertices().map(|(_, v)| v.pos).collect(),
        ..Default::default()
    };
    let applied = c.apply_checked(&edit).unwrap().unwrap();
    assert!(lik.index().affected_observations(&applied).is_empty());
    assert_eq!(lik.propose(&c, &applied), 0.0);

    // A wall across the beam is picked up.
    let mut c2 = Coloring::with_index_cell(window, Color::White, 0.5).unwrap();
    let mut lik2 = LikelihoodState::new(&c2, lik.observations().to_vec(), SensorParams::default()).unwrap();
    let tri = vec![Point2::new(1.0, 0.3), Point2::new(1.2, 0.3), Point2::new(1.1, 0.8)];
    let edit = Edit {
        add_vertices: tri
            .iter()
            .map(|&pos| NewVertex {
                pos,
                kind: VertexKind::Interior,
            })
            .collect(),
        add_edges: edit.add_edges.clone(),
        region: tri,
        ..Default::default()
    };
    let applied = c2.apply_checked(&edit).unwrap().unwrap();
    assert_eq!(lik2.index().affected_observations(&applied), vec![0]);
    assert!(lik2.propose(&c2, &applied) < 0.0);
    lik2.accept(&c2, &applied);
    assert!(lik2.stale_observations(&c2).is_empty());
}
