use polymap::coloring::{Color, Coloring};
use polymap::geometry::Rect;
use polymap::prior::ArakParams;
use polymap::sampler::{build, draw_choice, inverse_choice, Chain, MoveKind, NoData, SamplerConfig};

fn config(p: f64) -> SamplerConfig {
    let mut cfg = SamplerConfig::new(ArakParams::new(p, Rect::from_size(1.0, 1.0).unwrap()).unwrap());
    cfg.seed = 17;
    cfg
}

/// Prior states with a fair number of edges, taken along one chain.
fn sample_states(cfg: &SamplerConfig, n: usize, gap: usize) -> Vec<Coloring> {
    let init = Coloring::with_index_cell(cfg.arak.window, Color::White, 0.25).unwrap();
    let mut chain = Chain::new(cfg, init, NoData, 0);
    let mut out = Vec::new();
    for _ in 0..n {
        for _ in 0..gap {
            chain.step(1.0);
        }
        out.push(chain.coloring.clone());
    }
    out
}

#[test]
fn every_accepted_move_has_an_exact_inverse() {
    let cfg = config(2.0);
    let mp = cfg.move_params();
    let mut rng = cfg.rng(99);
    let mut applied_per_kind = [0usize; 13];
    for state in sample_states(&cfg, 60, 400) {
        for kind in MoveKind::ALL {
            for _ in 0..5 {
                let Ok(choice) = draw_choice(kind, &state, &mp, &mut rng) else { continue };
                let Ok(prop) = build(&state, &mp, &choice) else { continue };
                let mut c = state.clone();
                let Ok(Ok(applied)) = c.apply_checked(&prop.edit) else { continue };
                applied_per_kind[kind as usize] += 1;
                assert!(c.validate().is_empty(), "{kind:?} produced {:?}", c.validate());
                let inv = inverse_choice(&choice, &state, &applied);
                assert_eq!(inv.kind(), kind.inverse());
                let back = build(&c, &mp, &inv).unwrap_or_else(|r| panic!("{kind:?} inverse rejected: {r:?}"));
                assert!((back.log_forward - prop.log_reverse).abs() < 1e-9, "{kind:?}");
                assert!((back.log_reverse - prop.log_forward).abs() < 1e-9, "{kind:?}");
                let undo = c.apply_checked(&back.edit).unwrap().unwrap_or_else(|v| panic!("{kind:?} inverse invalid: {v:?}"));
                assert_eq!(c.canonical_form(), state.canonical_form(), "{kind:?}");
                assert_eq!(undo.anchor_flipped, applied.anchor_flipped);
            }
        }
    }
    for kind in MoveKind::ALL {
        assert!(applied_per_kind[kind as usize] > 0, "{kind:?} never produced a valid move");
    }
}

#[test]
fn rejected_edits_leave_state_untouched() {
    let cfg = config(2.0);
    let mp = cfg.move_params();
    let mut rng = cfg.rng(5);
    for state in sample_states(&cfg, 20, 300) {
        for kind in MoveKind::ALL {
            let Ok(choice) = draw_choice(kind, &state, &mp, &mut rng) else { continue };
            let Ok(prop) = build(&state, &mp, &choice) else { continue };
            let mut c = state.clone();
            match c.apply_checked(&prop.edit).unwrap() {
                Ok(applied) => {
                    c.revert(applied.token);
                    assert_eq!(c, state);
                }
                Err(_) => assert_eq!(c, state),
            }
        }
    }
}

#[test]
fn cached_stats_track_recomputation() {
    let cfg = config(1.0);
    let init = Coloring::new(cfg.arak.window, Color::White);
    let mut chain = Chain::new(&cfg, init, NoData, 3);
    for i in 0..20_000 {
        chain.step(1.0);
        if i % 1000 == 0 {
            let fresh = chain.coloring.recompute_stats();
            assert!(chain.coloring.stats().approx_eq(&fresh, 1e-9));
        }
    }
    assert!(chain.coloring.validate().is_empty());
}

#[test]
fn identical_seeds_give_identical_chains() {
    let cfg = config(0.8);
    let run = || {
        let mut ch = Chain::new(&cfg, Coloring::new(cfg.arak.window, Color::White), NoData, 2);
        for _ in 0..5000 {
            ch.step(1.0);
        }
        ch.coloring
    };
    assert_eq!(run(), run());
}
