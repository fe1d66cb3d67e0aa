use nalgebra::Vector2;

pub type Vec2 = Vector2<f64>;

/// Attraction/repulsion of a grant topic node toward impact anchors.
///
/// For each `(anchor, rii)`: `(rii - 1) * d * u` when `rii >= 1`, else
/// `(rii - 1) / d * u`, with `d` the distance and `u` the unit vector from
/// the node to the anchor. Undefined RII and coincident anchors contribute
/// nothing. With `normalize = Some(d_ref)` distances are measured in
/// units of `d_ref`.
pub fn impact_force<'a, I>(node: Vec2, anchors: I, normalize: Option<f64>) -> Vec2
where
    I: IntoIterator<Item = (&'a Vec2, Option<f64>)>,
{
    let mut f = Vec2::zeros();
    for (anchor, rii) in anchors {
        let Some(rii) = rii else { continue };
        let delta = anchor - node;
        let d = delta.norm();
        if d == 0.0 || !d.is_finite() {
            continue;
        }
        let u = delta / d;
        let scaled = normalize.map_or(d, |r| d / r);
        let magnitude = if rii >= 1.0 { (rii - 1.0) * scaled } else { (rii - 1.0) / scaled };
        f += u * magnitude;
    }
    f
}

/// Pull back toward `center` once a node is farther than `d_max`.
pub fn containment_force(node: Vec2, center: Vec2, d_max: f64, k_contain: f64) -> Vec2 {
    let delta = node - center;
    let d = delta.norm();
    if d <= d_max || d == 0.0 {
        return Vec2::zeros();
    }
    -(delta / d) * (k_contain * (d - d_max))
}

/// Force on `a` from overlapping `b` (the force on `b` is its negation).
/// `fallback` is the unit direction used when the centers coincide.
pub fn collision_force(a: Vec2, ra: f64, b: Vec2, rb: f64, padding: f64, k_collide: f64, fallback: Vec2) -> Vec2 {
    let delta = a - b;
    let d = delta.norm();
    let overlap = ra + rb + padding - d;
    if overlap <= 0.0 {
        return Vec2::zeros();
    }
    let dir = if d > 0.0 { delta / d } else { fallback };
    dir * (k_collide * overlap)
}
