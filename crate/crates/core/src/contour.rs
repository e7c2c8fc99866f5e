//! Level lines (marching squares) and superlevel-set components of resolvent grids.

use crate::resolvent::ResolventGrid;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Infinite grid values are clipped to this before interpolation.
pub const CLIP: f64 = 300.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelLines {
    pub epsilon: f64,
    /// `log10(1/ε)`.
    pub level: f64,
    /// Each polyline is a list of `[re, im]`; closed ones repeat their first point.
    pub polylines: Vec<Vec<[f64; 2]>>,
}

/// Edge of the grid: horizontal `(ix, iy)-(ix+1, iy)` or vertical `(ix, iy)-(ix, iy+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

fn clipped(v: f64) -> f64 {
    if v.is_nan() {
        v
    } else {
        v.min(CLIP)
    }
}

fn crossing(grid: &ResolventGrid, e: Edge, level: f64) -> [f64; 2] {
    let (a, b) = match e {
        Edge::H(x, y) => ((x, y), (x + 1, y)),
        Edge::V(x, y) => ((x, y), (x, y + 1)),
    };
    let (va, vb) = (clipped(grid.value(a.0, a.1)), clipped(grid.value(b.0, b.1)));
    let t = if va == vb { 0.5 } else { ((level - va) / (vb - va)).clamp(0.0, 1.0) };
    let (pa, pb) = (grid.point(a.0, a.1), grid.point(b.0, b.1));
    let p = pa + (pb - pa) * t;
    [p.re, p.im]
}

/// Segments of the `level` contour, as pairs of grid edges. Corners are numbered
/// bottom-left, bottom-right, top-right, top-left; saddles are resolved by the cell mean.
fn segments(grid: &ResolventGrid, level: f64) -> Vec<(Edge, Edge)> {
    let mut out = Vec::new();
    for iy in 0..grid.ny - 1 {
        for ix in 0..grid.nx - 1 {
            let v = [
                clipped(grid.value(ix, iy)),
                clipped(grid.value(ix + 1, iy)),
                clipped(grid.value(ix + 1, iy + 1)),
                clipped(grid.value(ix, iy + 1)),
            ];
            if v.iter().any(|x| x.is_nan()) {
                continue;
            }
            let case = v.iter().enumerate().fold(0u8, |c, (k, &x)| c | (((x >= level) as u8) << k));
            let bottom = Edge::H(ix, iy);
            let right = Edge::V(ix + 1, iy);
            let top = Edge::H(ix, iy + 1);
            let left = Edge::V(ix, iy);
            let center_high = v.iter().sum::<f64>() / 4.0 >= level;
            let segs: &[(Edge, Edge)] = match case {
                0 | 15 => &[],
                1 | 14 => &[(left, bottom)],
                2 | 13 => &[(bottom, right)],
                3 | 12 => &[(left, right)],
                4 | 11 => &[(right, top)],
                6 | 9 => &[(bottom, top)],
                7 | 8 => &[(left, top)],
                5 if center_high => &[(left, top), (bottom, right)],
                5 => &[(left, bottom), (right, top)],
                10 if center_high => &[(left, bottom), (right, top)],
                10 => &[(left, top), (bottom, right)],
                _ => unreachable!(),
            };
            out.extend_from_slice(segs);
        }
    }
    out
}

/// Contour of the grid at `log10 ||R|| = level`, joined into polylines.
pub fn marching_squares(grid: &ResolventGrid, level: f64) -> Vec<Vec<[f64; 2]>> {
    let segs = segments(grid, level);
    let mut at: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segs.iter().enumerate() {
        at.entry(*a).or_default().push(k);
        at.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segs.len()];
    let mut lines = Vec::new();
    let other = |k: usize, e: Edge| if segs[k].0 == e { segs[k].1 } else { segs[k].0 };
    let next = |e: Edge, used: &[bool]| at[&e].iter().copied().find(|&k| !used[k]);
    for start in 0..segs.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut chain = vec![segs[start].0, segs[start].1];
        // extend forward, then backward
        while let Some(k) = next(*chain.last().unwrap(), &used) {
            used[k] = true;
            let e = other(k, *chain.last().unwrap());
            chain.push(e);
        }
        let mut back = Vec::new();
        let mut head = chain[0];
        while let Some(k) = next(head, &used) {
            used[k] = true;
            head = other(k, head);
            back.push(head);
        }
        back.reverse();
        back.extend(chain);
        lines.push(back.into_iter().map(|e| crossing(grid, e, level)).collect());
    }
    lines
}

pub fn level_lines(grid: &ResolventGrid, epsilons: &[f64]) -> Vec<LevelLines> {
    epsilons
        .iter()
        .map(|&epsilon| {
            let level = -epsilon.log10();
            LevelLines { epsilon, level, polylines: marching_squares(grid, level) }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub nodes: usize,
    /// The component reaches the edge of the grid.
    pub open: bool,
    /// Indices into the marker list passed to [`superlevel_components`].
    pub markers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub level: f64,
    pub components: Vec<Component>,
    /// Component of each marker.
    pub marker_component: Vec<Option<usize>>,
}

fn find(p: &mut [usize], mut i: usize) -> usize {
    while p[i] != i {
        p[i] = p[p[i]];
        i = p[i];
    }
    i
}

fn union(p: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(p, a), find(p, b));
    if ra != rb {
        p[ra.max(rb)] = ra.min(rb);
    }
}

/// Connected components of `{log10 ||R|| >= level}` on the grid, with the same saddle rule
/// as [`marching_squares`]. Each marker (e.g. a lattice eigenvalue, where the norm is
/// infinite) is an extra node joined to the high corners of the cell containing it;
/// markers outside the grid get `None`.
pub fn superlevel_components(grid: &ResolventGrid, level: f64, markers: &[C64]) -> Components {
    let (nx, ny) = (grid.nx, grid.ny);
    let nodes = nx * ny;
    let high: Vec<bool> = grid.values.iter().map(|&v| !v.is_nan() && clipped(v) >= level).collect();
    let mut parent: Vec<usize> = (0..nodes + markers.len()).collect();
    for iy in 0..ny {
        for ix in 0..nx {
            let k = iy * nx + ix;
            if !high[k] {
                continue;
            }
            if ix + 1 < nx && high[k + 1] {
                union(&mut parent, k, k + 1);
            }
            if iy + 1 < ny && high[k + nx] {
                union(&mut parent, k, k + nx);
            }
        }
    }
    for iy in 0..ny - 1 {
        for ix in 0..nx - 1 {
            let c = [iy * nx + ix, iy * nx + ix + 1, (iy + 1) * nx + ix + 1, (iy + 1) * nx + ix];
            let v: Vec<f64> = c.iter().map(|&k| clipped(grid.values[k])).collect();
            if v.iter().any(|x| x.is_nan()) || v.iter().sum::<f64>() / 4.0 < level {
                continue;
            }
            if high[c[0]] && high[c[2]] && !high[c[1]] && !high[c[3]] {
                union(&mut parent, c[0], c[2]);
            }
            if high[c[1]] && high[c[3]] && !high[c[0]] && !high[c[2]] {
                union(&mut parent, c[1], c[3]);
            }
        }
    }
    let r = &grid.region;
    let (dx, dy) = ((r.re_max - r.re_min) / (nx - 1) as f64, (r.im_max - r.im_min) / (ny - 1) as f64);
    let mut inside = vec![false; markers.len()];
    for (m, z) in markers.iter().enumerate() {
        if z.re < r.re_min || z.re > r.re_max || z.im < r.im_min || z.im > r.im_max {
            continue;
        }
        inside[m] = true;
        let ix = (((z.re - r.re_min) / dx).floor() as usize).min(nx - 2);
        let iy = (((z.im - r.im_min) / dy).floor() as usize).min(ny - 2);
        for k in [iy * nx + ix, iy * nx + ix + 1, (iy + 1) * nx + ix + 1, (iy + 1) * nx + ix] {
            if high[k] {
                union(&mut parent, nodes + m, k);
            }
        }
    }
    let mut label: HashMap<usize, usize> = HashMap::new();
    let mut components: Vec<Component> = Vec::new();
    let mut slot = |root: usize, comps: &mut Vec<Component>| -> usize {
        *label.entry(root).or_insert_with(|| {
            comps.push(Component { nodes: 0, open: false, markers: Vec::new() });
            comps.len() - 1
        })
    };
    for k in 0..nodes {
        if !high[k] {
            continue;
        }
        let root = find(&mut parent, k);
        let c = slot(root, &mut components);
        components[c].nodes += 1;
        let (ix, iy) = (k % nx, k / nx);
        if ix == 0 || iy == 0 || ix == nx - 1 || iy == ny - 1 {
            components[c].open = true;
        }
    }
    let mut marker_component = vec![None; markers.len()];
    for m in 0..markers.len() {
        if !inside[m] {
            continue;
        }
        let root = find(&mut parent, nodes + m);
        let c = slot(root, &mut components);
        components[c].markers.push(m);
        marker_component[m] = Some(c);
    }
    Components { level, components, marker_component }
}
