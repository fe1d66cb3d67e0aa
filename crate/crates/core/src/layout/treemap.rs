use serde::{Deserialize, Serialize};

use super::forces::Vec2;

/// Topic hierarchy of one impact cluster.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PackNode {
    Leaf { id: String, count: u64 },
    Group { id: String, children: Vec<PackNode> },
}

impl PackNode {
    pub fn id(&self) -> &str {
        match self {
            PackNode::Leaf { id, .. } | PackNode::Group { id, .. } => id,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreemapConfig {
    /// Leaf radius per square root of its count.
    pub leaf_scale: f64,
    /// Gap between siblings and between children and their enclosure.
    pub padding: f64,
}

impl Default for TreemapConfig {
    fn default() -> Self {
        TreemapConfig {
            leaf_scale: 4.0,
            padding: 2.0,
        }
    }
}

/// A packed circle; `parent` indexes into the same output list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackedCircle {
    pub id: String,
    pub depth: usize,
    pub parent: Option<usize>,
    pub leaf: bool,
    pub count: u64,
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

impl PackedCircle {
    pub fn center(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

struct Local {
    id: String,
    leaf: bool,
    count: u64,
    r: f64,
    children: Vec<(Vec2, Local)>,
}

/// Positions for circles of `radii` so that no two are closer than `gap`,
/// placed largest first, each at the tangent position nearest the origin.
pub fn pack_siblings(radii: &[f64], gap: f64) -> Vec<Vec2> {
    let n = radii.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| radii[b].total_cmp(&radii[a]).then(a.cmp(&b)));
    let mut pos = vec![Vec2::zeros(); n];
    let mut placed: Vec<usize> = Vec::with_capacity(n);
    let fits = |p: Vec2, r: f64, placed: &[usize], pos: &[Vec2]| {
        placed.iter().all(|&j| (p - pos[j]).norm() >= radii[j] + r + gap - 1e-9)
    };
    for &c in &order {
        let rc = radii[c];
        if placed.is_empty() {
            pos[c] = Vec2::zeros();
            placed.push(c);
            continue;
        }
        let mut candidates: Vec<Vec2> = Vec::new();
        for &a in &placed {
            let da = radii[a] + rc + gap;
            candidates.push(pos[a] + Vec2::x() * da);
            candidates.push(pos[a] - Vec2::x() * da);
            for &b in &placed {
                if b <= a {
                    continue;
                }
                let db = radii[b] + rc + gap;
                let ab = pos[b] - pos[a];
                let d = ab.norm();
                if d == 0.0 || d > da + db || d < (da - db).abs() {
                    continue;
                }
                let along = (da * da - db * db + d * d) / (2.0 * d);
                let h = (da * da - along * along).max(0.0).sqrt();
                let base = pos[a] + ab * (along / d);
                let perp = Vec2::new(-ab.y, ab.x) / d;
                candidates.push(base + perp * h);
                candidates.push(base - perp * h);
            }
        }
        candidates.sort_by(|p, q| p.norm().total_cmp(&q.norm()).then(p.x.total_cmp(&q.x)).then(p.y.total_cmp(&q.y)));
        let best = candidates
            .into_iter()
            .find(|p| fits(*p, rc, &placed, &pos))
            .expect("an outward tangent position always fits");
        pos[c] = best;
        placed.push(c);
    }
    pos
}

type Disk = (Vec2, f64);

fn encloses_not(a: Disk, b: Disk) -> bool {
    let dr = a.1 - b.1;
    dr < 0.0 || dr * dr < (b.0 - a.0).norm_squared()
}

fn encloses_weak(a: Disk, b: Disk) -> bool {
    let dr = a.1 - b.1 + a.1.max(b.1).max(1.0) * 1e-9;
    dr > 0.0 && dr * dr > (b.0 - a.0).norm_squared()
}

fn encloses_weak_all(a: Disk, basis: &[Disk]) -> bool {
    basis.iter().all(|&b| encloses_weak(a, b))
}

fn enclose_two(a: Disk, b: Disk) -> Disk {
    let d = b.0 - a.0;
    let l = d.norm();
    if l == 0.0 {
        return if a.1 >= b.1 { a } else { b };
    }
    let dr = b.1 - a.1;
    ((a.0 + b.0 + d / l * dr) / 2.0, (l + a.1 + b.1) / 2.0)
}

fn enclose_three(a: Disk, b: Disk, c: Disk) -> Disk {
    let ((x1, y1), r1) = ((a.0.x, a.0.y), a.1);
    let ((x2, y2), r2) = ((b.0.x, b.0.y), b.1);
    let ((x3, y3), r3) = ((c.0.x, c.0.y), c.1);
    let (a2, b2, c2) = (x1 - x2, y1 - y2, r2 - r1);
    let (a3, b3, c3) = (x1 - x3, y1 - y3, r3 - r1);
    let d1 = x1 * x1 + y1 * y1 - r1 * r1;
    let d2 = d1 - x2 * x2 - y2 * y2 + r2 * r2;
    let d3 = d1 - x3 * x3 - y3 * y3 + r3 * r3;
    let ab = a3 * b2 - a2 * b3;
    let xa = (b2 * d3 - b3 * d2) / (ab * 2.0) - x1;
    let xb = (b3 * c2 - b2 * c3) / ab;
    let ya = (a3 * d2 - a2 * d3) / (ab * 2.0) - y1;
    let yb = (a2 * c3 - a3 * c2) / ab;
    let qa = xb * xb + yb * yb - 1.0;
    let qb = 2.0 * (r1 + xa * xb + ya * yb);
    let qc = xa * xa + ya * ya - r1 * r1;
    let r = -(if qa.abs() > 1e-6 { (qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa) } else { qc / qb });
    (Vec2::new(x1 + xa + xb * r, y1 + ya + yb * r), r)
}

fn enclose_basis(basis: &[Disk]) -> Disk {
    match basis {
        [a] => *a,
        [a, b] => enclose_two(*a, *b),
        [a, b, c] => enclose_three(*a, *b, *c),
        _ => unreachable!("basis holds one to three disks"),
    }
}

fn extend_basis(basis: &[Disk], p: Disk) -> Option<Vec<Disk>> {
    if encloses_weak_all(p, basis) {
        return Some(vec![p]);
    }
    for &b in basis {
        if encloses_not(p, b) && encloses_weak_all(enclose_two(b, p), basis) {
            return Some(vec![b, p]);
        }
    }
    for (i, &a) in basis.iter().enumerate() {
        for &b in &basis[i + 1..] {
            if encloses_not(enclose_two(a, b), p)
                && encloses_not(enclose_two(a, p), b)
                && encloses_not(enclose_two(b, p), a)
                && encloses_weak_all(enclose_three(a, b, p), basis)
            {
                return Some(vec![a, b, p]);
            }
        }
    }
    None
}

/// Smallest circle containing every `(center, radius)` (move-to-front
/// incremental construction). The returned radius always reaches the
/// farthest edge exactly, so containment holds despite rounding.
pub fn enclose(circles: &[(Vec2, f64)]) -> (Vec2, f64) {
    let radius_at = |c: Vec2| circles.iter().map(|(p, r)| (p - c).norm() + r).fold(0.0, f64::max);
    if circles.is_empty() {
        return (Vec2::zeros(), 0.0);
    }
    let mut basis: Vec<Disk> = Vec::new();
    let mut e: Option<Disk> = None;
    let mut i = 0;
    let mut steps = 0;
    while i < circles.len() && steps < 100 * circles.len() * circles.len() {
        steps += 1;
        let p = circles[i];
        if e.is_some_and(|e| encloses_weak(e, p)) {
            i += 1;
            continue;
        }
        match extend_basis(&basis, p) {
            Some(b) => {
                e = Some(enclose_basis(&b));
                basis = b;
                i = 0;
            }
            None => break,
        }
    }
    let center = e.map(|e| e.0).filter(|c| c.x.is_finite() && c.y.is_finite()).unwrap_or_else(|| {
        circles.iter().map(|(p, _)| *p).sum::<Vec2>() / circles.len() as f64
    });
    (center, radius_at(center))
}

fn pack(node: &PackNode, config: &TreemapConfig) -> Local {
    match node {
        PackNode::Leaf { id, count } => Local {
            id: id.clone(),
            leaf: true,
            count: *count,
            r: config.leaf_scale * ((*count).max(1) as f64).sqrt(),
            children: vec![],
        },
        PackNode::Group { id, children } => {
            let packed: Vec<Local> = children.iter().map(|c| pack(c, config)).collect();
            let count = packed.iter().map(|c| c.count).sum();
            if packed.is_empty() {
                return Local {
                    id: id.clone(),
                    leaf: false,
                    count,
                    r: config.leaf_scale,
                    children: vec![],
                };
            }
            let radii: Vec<f64> = packed.iter().map(|c| c.r).collect();
            let pos = pack_siblings(&radii, config.padding);
            let (center, r) = enclose(&pos.iter().copied().zip(radii.iter().copied()).collect::<Vec<_>>());
            Local {
                id: id.clone(),
                leaf: false,
                count,
                r: r + config.padding,
                children: pos.into_iter().map(|p| p - center).zip(packed).collect(),
            }
        }
    }
}

fn flatten(local: Local, at: Vec2, depth: usize, parent: Option<usize>, out: &mut Vec<PackedCircle>) {
    let index = out.len();
    out.push(PackedCircle {
        id: local.id,
        depth,
        parent,
        leaf: local.leaf,
        count: local.count,
        x: at.x,
        y: at.y,
        r: local.r,
    });
    for (offset, child) in local.children {
        flatten(child, at + offset, depth + 1, Some(index), out);
    }
}

/// Packs a hierarchy around `center`; the root comes first, children
/// follow their parent in depth-first order.
pub fn bubble_treemap_pack(root: &PackNode, center: Vec2, config: &TreemapConfig) -> Vec<PackedCircle> {
    let mut out = Vec::new();
    flatten(pack(root, config), center, 0, None, &mut out);
    out
}
