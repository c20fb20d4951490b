use polymap::coloring::{Color, Coloring};
use polymap::geometry::Point2;
use polymap::sampler::Likelihood;
use polymap::sensors::{LikelihoodState, Observation, SensorParams};
use polymap::sim::{make_world, simulate_trajectory, Layout, LaserRig, SonarRig, WorldSpec};

fn mean_log_likelihood(world: &Coloring, obs: &[Observation]) -> f64 {
    let lik = LikelihoodState::new(world, obs.to_vec(), SensorParams::default()).unwrap();
    lik.total() / obs.len() as f64
}

#[test]
fn true_world_explains_its_readings_best() {
    let world = make_world(&WorldSpec::new(Layout::Corridor)).unwrap();
    let w = *world.truth.window();
    let t = world.spec.wall_thickness;
    // Same corridor with the far wall moved 0.5 m closer.
    let shifted = Coloring::from_polygons(
        w,
        Color::White,
        0.5,
        &[vec![
            Point2::new(t, t),
            Point2::new(w.max.x - t, t),
            Point2::new(w.max.x - t, w.max.y - t - 0.5),
            Point2::new(t, w.max.y - t - 0.5),
        ]],
    )
    .unwrap();
    assert!(shifted.validate().is_empty());
    for (laser, sonar) in [(Some(LaserRig::default()), None), (None, Some(SonarRig::default()))] {
        let traj = world.trajectory(0.75, laser, sonar);
        let obs: Vec<Observation> = simulate_trajectory(&world.truth, &traj, &SensorParams::default(), 5)
            .unwrap()
            .into_iter()
            .map(|r| r.obs)
            .collect();
        let truth_ll = mean_log_likelihood(&world.truth, &obs);
        let shifted_ll = mean_log_likelihood(&shifted, &obs);
        assert!(truth_ll.is_finite() && shifted_ll.is_finite());
        assert!(
            truth_ll > shifted_ll,
            "laser={} truth {truth_ll} shifted {shifted_ll}",
            laser.is_some()
        );
    }
}

#[test]
fn surveys_stay_in_free_space() {
    for layout in Layout::ALL {
        let world = make_world(&WorldSpec::new(layout)).unwrap();
        let traj = world.trajectory(0.5, Some(LaserRig::default()), Some(SonarRig::default()));
        let recs = simulate_trajectory(&world.truth, &traj, &SensorParams::default(), 1).unwrap();
        assert!(!recs.is_empty());
        for r in &recs {
            assert!(world.is_free(r.obs.origin()));
        }
        assert!(recs.windows(2).all(|w| w[0].t <= w[1].t));
    }
}
