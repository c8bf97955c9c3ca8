//! Binary bounding volume hierarchy over one object's world triangles.

use super::triangle::{ray_triangle, triangles_overlap};
use super::Aabb;
use crate::math::Vec3;

const LEAF_SIZE: usize = 4;

#[derive(Clone, Debug)]
struct Node {
    aabb: Aabb,
    /// Leaf: first slot in `order`. Interior: index of the left child; the
    /// right child follows it.
    first: u32,
    /// Triangle count for leaves, zero for interior nodes.
    count: u32,
}

#[derive(Clone, Debug)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
}

fn padded(mut b: Aabb) -> Aabb {
    let pad = 1e-9 * (1.0 + b.min.abs().max().max(b.max.abs().max()));
    b.min -= Vec3::repeat(pad);
    b.max += Vec3::repeat(pad);
    b
}

impl Bvh {
    pub fn build(tris: &[[Vec3; 3]]) -> Bvh {
        let centroids: Vec<Vec3> = tris.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut bvh = Bvh {
            nodes: Vec::with_capacity(2 * tris.len() / LEAF_SIZE + 1),
            order: (0..tris.len() as u32).collect(),
        };
        bvh.nodes.push(Node {
            aabb: Aabb::empty(),
            first: 0,
            count: 0,
        });
        if !tris.is_empty() {
            bvh.split(0, 0, tris.len(), tris, &centroids);
        }
        bvh
    }

    fn split(&mut self, node: usize, start: usize, end: usize, tris: &[[Vec3; 3]], centroids: &[Vec3]) {
        let slice = &mut self.order[start..end];
        let bounds = Aabb::from_points(slice.iter().flat_map(|&i| tris[i as usize].iter()));
        self.nodes[node].aabb = padded(bounds);
        if slice.len() <= LEAF_SIZE {
            self.nodes[node].first = start as u32;
            self.nodes[node].count = slice.len() as u32;
            return;
        }
        let cb = Aabb::from_points(slice.iter().map(|&i| &centroids[i as usize]));
        let axis = cb.extent().imax();
        slice.sort_unstable_by(|&a, &b| {
            centroids[a as usize][axis]
                .total_cmp(&centroids[b as usize][axis])
                .then(a.cmp(&b))
        });
        let mid = start + slice.len() / 2;
        let left = self.nodes.len();
        let blank = Node {
            aabb: Aabb::empty(),
            first: 0,
            count: 0,
        };
        self.nodes.push(blank.clone());
        self.nodes.push(blank);
        self.nodes[node].first = left as u32;
        self.nodes[node].count = 0;
        self.split(left, start, mid, tris, centroids);
        self.split(left + 1, mid, end, tris, centroids);
    }

    /// The same hierarchy over triangles shifted by `offset`.
    pub fn translated(&self, offset: &Vec3) -> Bvh {
        Bvh {
            nodes: self
                .nodes
                .iter()
                .map(|n| Node {
                    aabb: Aabb {
                        min: n.aabb.min + offset,
                        max: n.aabb.max + offset,
                    },
                    ..n.clone()
                })
                .collect(),
            order: self.order.clone(),
        }
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes[0].aabb
    }

    /// Nearest hit `(t, triangle)` with `t <= t_max`; ties go to the lower
    /// triangle index.
    pub fn closest_hit(
        &self,
        tris: &[[Vec3; 3]],
        origin: &Vec3,
        dir: &Vec3,
        inv_dir: &Vec3,
        t_max: f64,
    ) -> Option<(f64, u32)> {
        if self.order.is_empty() {
            return None;
        }
        let mut best: Option<(f64, u32)> = None;
        let mut limit = t_max;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.aabb.ray_interval(origin, inv_dir, limit).is_none() {
                continue;
            }
            if node.count > 0 {
                for &i in &self.order[node.first as usize..(node.first + node.count) as usize] {
                    if let Some(t) = ray_triangle(origin, dir, &tris[i as usize]) {
                        let better = match best {
                            None => t <= limit,
                            Some((bt, bi)) => t < bt || (t == bt && i < bi),
                        };
                        if better {
                            best = Some((t, i));
                            limit = t;
                        }
                    }
                }
            } else {
                stack.push(node.first as usize + 1);
                stack.push(node.first as usize);
            }
        }
        best
    }

    /// Calls `f` with the parameter of every hit along the ray.
    pub fn for_each_hit(&self, tris: &[[Vec3; 3]], origin: &Vec3, dir: &Vec3, inv_dir: &Vec3, mut f: impl FnMut(f64)) {
        if self.order.is_empty() {
            return;
        }
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.aabb.ray_interval(origin, inv_dir, f64::INFINITY).is_none() {
                continue;
            }
            if node.count > 0 {
                for &i in &self.order[node.first as usize..(node.first + node.count) as usize] {
                    if let Some(t) = ray_triangle(origin, dir, &tris[i as usize]) {
                        f(t);
                    }
                }
            } else {
                stack.push(node.first as usize + 1);
                stack.push(node.first as usize);
            }
        }
    }

    /// Visits triangle pairs `(i, j)` whose triangles overlap within `eps`.
    /// Stops early when `f` returns `false`.
    pub fn overlapping_pairs(
        &self,
        tris: &[[Vec3; 3]],
        other: &Bvh,
        other_tris: &[[Vec3; 3]],
        eps: f64,
        mut f: impl FnMut(u32, u32) -> bool,
    ) {
        if self.order.is_empty() || other.order.is_empty() {
            return;
        }
        let mut stack = vec![(0usize, 0usize)];
        while let Some((a, b)) = stack.pop() {
            let na = &self.nodes[a];
            let nb = &other.nodes[b];
            if !na.aabb.overlaps(&nb.aabb, eps) {
                continue;
            }
            match (na.count > 0, nb.count > 0) {
                (true, true) => {
                    for &i in &self.order[na.first as usize..(na.first + na.count) as usize] {
                        for &j in &other.order[nb.first as usize..(nb.first + nb.count) as usize] {
                            if triangles_overlap(&tris[i as usize], &other_tris[j as usize], eps) && !f(i, j) {
                                return;
                            }
                        }
                    }
                }
                (true, false) => {
                    stack.push((a, nb.first as usize + 1));
                    stack.push((a, nb.first as usize));
                }
                (false, true) => {
                    stack.push((na.first as usize + 1, b));
                    stack.push((na.first as usize, b));
                }
                (false, false) => {
                    // Descend the larger box first.
                    if na.aabb.extent().norm_squared() >= nb.aabb.extent().norm_squared() {
                        stack.push((na.first as usize + 1, b));
                        stack.push((na.first as usize, b));
                    } else {
                        stack.push((a, nb.first as usize + 1));
                        stack.push((a, nb.first as usize));
                    }
                }
            }
        }
    }
}
