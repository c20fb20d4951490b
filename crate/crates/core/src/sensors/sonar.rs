use super::{normal_log_pdf, normal_upper_tail, SonarObs, SonarParams};
use crate::coloring::{Coloring, VertexKind};
use crate::geometry::{visibility_sweep_detailed, FeatureKind, SweepEdge, VisibleFeature};

/// A visible feature with its return probabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SonarFeature {
    pub feature: VisibleFeature,
    /// Probability the feature would return the pulse on its own.
    pub q: f64,
    /// Probability the feature returns the pulse given the features in
    /// front of it.
    pub r: f64,
}

/// Everything a sonar reading depends on.
#[derive(Clone, Debug, PartialEq)]
pub struct SonarScene {
    /// Features ordered by depth.
    pub features: Vec<SonarFeature>,
    /// Probability that no feature returns the pulse.
    pub none: f64,
    /// Range beyond which edits cannot change the scene.
    pub extent: f64,
}

// Logistic function evaluated as the pair (s(x), s(-x)) so neither side
// rounds to exactly zero or one for moderate `x`.
fn logistic_pair(x: f64) -> (f64, f64) {
    if x >= 0.0 {
        let e = (-x).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = x.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    }
}

fn independent_return(f: &VisibleFeature, p: &SonarParams) -> (f64, f64) {
    let x = match f.kind {
        FeatureKind::Corner => p.corner_intercept + p.corner_distance * f.depth,
        FeatureKind::Face => {
            p.face_intercept
                + p.face_distance * f.depth
                + p.face_projection * f.projection_angle
                + p.face_subtended * f.subtended_angle
        }
    };
    logistic_pair(x)
}

/// Return probabilities for depth-ordered independent probabilities `q`:
/// a feature returns the pulse if it would on its own and no closer feature
/// did, so `r_f = q_f * prod_{g<f} (1 - q_g)`.
pub fn return_probabilities(q: &[f64]) -> Vec<f64> {
    let mut none = 1.0;
    q.iter()
        .map(|&qf| {
            let r = qf * none;
            none *= 1.0 - qf;
            r
        })
        .collect()
}

/// Visible features and return probabilities for a sonar reading.
pub fn sonar_scene(o: &SonarObs, c: &Coloring, p: &SonarParams) -> SonarScene {
    let cone = o.cone().expect("sonar observations carry a valid cone");
    let edges: Vec<SweepEdge> = c
        .index()
        .edges_in_cone(&cone)
        .into_iter()
        .map(|id| {
            let e = c.edge(id).expect("indexed edge exists");
            let corner = e.v.map(|v| c.vertex(v).is_some_and(|vx| vx.kind == VertexKind::Interior));
            SweepEdge {
                id,
                seg: c.segment(id),
                corner,
            }
        })
        .collect();
    let vis = visibility_sweep_detailed(&edges, &cone);
    let mut none = 1.0;
    let features = vis
        .features
        .iter()
        .map(|f| {
            let (q, q_bar) = independent_return(f, p);
            let r = q * none;
            none *= q_bar;
            SonarFeature { feature: *f, q, r }
        })
        .collect();
    SonarScene {
        features,
        none,
        extent: vis.extent(o.max_range),
    }
}

/// Features visible to a sonar reading, with `q_f` and `r_f`.
pub fn sonar_features(o: &SonarObs, c: &Coloring, p: &SonarParams) -> Vec<SonarFeature> {
    sonar_scene(o, c, p).features
}

/// Outlier density (unflagged) or mass (flagged) of a reading.
fn outlier(o: &SonarObs, p: &SonarParams) -> f64 {
    if o.max_flag {
        p.w_maxrange
    } else {
        let exp_norm = -(-p.beta * o.max_range).exp_m1();
        p.w_uniform / o.max_range + p.w_exponential * p.beta * (-p.beta * o.range).exp() / exp_norm
    }
}

/// Log-likelihood of a reading in a given scene, with the sensor in free
/// space. Unflagged readings get a density over `(0, max_range)`; flagged
/// readings get the probability of no return within range.
pub fn sonar_log_likelihood_given(o: &SonarObs, scene: &SonarScene, p: &SonarParams) -> f64 {
    let mut l = scene.none * outlier(o, p);
    for f in &scene.features {
        let d = f.feature.depth;
        l += f.r
            * if o.max_flag {
                normal_upper_tail(o.max_range, d, p.sigma)
            } else {
                normal_log_pdf(o.range, d, p.sigma).exp()
            };
    }
    l.ln()
}

/// Log-likelihood of one sonar reading; `-inf` when the sensor would sit in
/// occupied space.
pub fn sonar_log_likelihood(o: &SonarObs, c: &Coloring, p: &SonarParams) -> f64 {
    if c.color_at(o.origin()).is_black() {
        return f64::NEG_INFINITY;
    }
    sonar_log_likelihood_given(o, &sonar_scene(o, c, p), p)
}
