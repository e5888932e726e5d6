//! Marching squares over a masked rectangular grid, with linear edge
//! interpolation and deterministic chaining of segments into polylines.

use std::collections::BTreeMap;

use ndarray::Array2;

/// A node-edge of the grid: `orient = 0` runs from node `(i, j)` to
/// `(i + 1, j)`, `orient = 1` to `(i, j + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct EdgeId {
    i: usize,
    j: usize,
    orient: u8,
}

/// Extracts the `level` contour of `values` on the grid spanned by `xs` and
/// `ys`. Only cells whose four corner nodes are all flagged in `node_ok`
/// participate, so every emitted vertex stays inside the admissible region.
pub fn contour_lines(
    values: &Array2<f64>,
    node_ok: &Array2<bool>,
    xs: &[f64],
    ys: &[f64],
    level: f64,
) -> Vec<Vec<[f64; 2]>> {
    let (nx, ny) = values.dim();
    assert_eq!(xs.len(), nx);
    assert_eq!(ys.len(), ny);

    let mut points: BTreeMap<EdgeId, [f64; 2]> = BTreeMap::new();
    let mut segments: Vec<(EdgeId, EdgeId)> = Vec::new();

    let mut cross = |a: (usize, usize), b: (usize, usize), orient: u8| -> EdgeId {
        let id = EdgeId {
            i: a.0,
            j: a.1,
            orient,
        };
        points.entry(id).or_insert_with(|| {
            let va = values[a];
            let vb = values[b];
            let t = ((level - va) / (vb - va)).clamp(0.0, 1.0);
            let pa = [xs[a.0], ys[a.1]];
            let pb = [xs[b.0], ys[b.1]];
            [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]
        });
        id
    };

    for i in 0..nx.saturating_sub(1) {
        for j in 0..ny.saturating_sub(1) {
            if !(node_ok[(i, j)]
                && node_ok[(i + 1, j)]
                && node_ok[(i, j + 1)]
                && node_ok[(i + 1, j + 1)])
            {
                continue;
            }
            let v00 = values[(i, j)];
            let v10 = values[(i + 1, j)];
            let v11 = values[(i + 1, j + 1)];
            let v01 = values[(i, j + 1)];
            // Ties sit on the "below" side, so a vertex exactly at the level
            // never creates a degenerate crossing.
            let mut case = 0u8;
            if v00 > level {
                case |= 1;
            }
            if v10 > level {
                case |= 2;
            }
            if v11 > level {
                case |= 4;
            }
            if v01 > level {
                case |= 8;
            }
            if case == 0 || case == 15 {
                continue;
            }

            let bottom = || ((i, j), (i + 1, j), 0u8);
            let top = || ((i, j + 1), (i + 1, j + 1), 0u8);
            let left = || ((i, j), (i, j + 1), 1u8);
            let right = || ((i + 1, j), (i + 1, j + 1), 1u8);

            let mut emit = |ea: ((usize, usize), (usize, usize), u8),
                            eb: ((usize, usize), (usize, usize), u8),
                            segments: &mut Vec<(EdgeId, EdgeId)>| {
                let ida = cross(ea.0, ea.1, ea.2);
                let idb = cross(eb.0, eb.1, eb.2);
                segments.push((ida, idb));
            };

            match case {
                1 => emit(left(), bottom(), &mut segments),
                2 => emit(bottom(), right(), &mut segments),
                3 => emit(left(), right(), &mut segments),
                4 => emit(top(), right(), &mut segments),
                5 => {
                    // Saddle cell: resolve with the center average.
                    let center = 0.25 * (v00 + v10 + v11 + v01);
                    if center > level {
                        emit(left(), top(), &mut segments);
                        emit(bottom(), right(), &mut segments);
                    } else {
                        emit(left(), bottom(), &mut segments);
                        emit(top(), right(), &mut segments);
                    }
                }
                6 => emit(bottom(), top(), &mut segments),
                7 => emit(left(), top(), &mut segments),
                8 => emit(left(), top(), &mut segments),
                9 => emit(bottom(), top(), &mut segments),
                10 => {
                    let center = 0.25 * (v00 + v10 + v11 + v01);
                    if center > level {
                        emit(left(), bottom(), &mut segments);
                        emit(top(), right(), &mut segments);
                    } else {
                        emit(left(), top(), &mut segments);
                        emit(bottom(), right(), &mut segments);
                    }
                }
                11 => emit(top(), right(), &mut segments),
                12 => emit(left(), right(), &mut segments),
                13 => emit(bottom(), right(), &mut segments),
                14 => emit(left(), bottom(), &mut segments),
                _ => unreachable!(),
            }
        }
    }

    chain_segments(&segments, &points)
}

/// Joins segments sharing grid edges into polylines. Open chains are walked
/// from their endpoints, remaining cycles from their smallest segment index.
fn chain_segments(
    segments: &[(EdgeId, EdgeId)],
    points: &BTreeMap<EdgeId, [f64; 2]>,
) -> Vec<Vec<[f64; 2]>> {
    let mut adjacency: BTreeMap<EdgeId, Vec<usize>> = BTreeMap::new();
    for (idx, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(*a).or_default().push(idx);
        adjacency.entry(*b).or_default().push(idx);
    }

    let mut used = vec![false; segments.len()];
    let mut polylines = Vec::new();

    let walk = |start_edge: EdgeId, used: &mut Vec<bool>| -> Vec<[f64; 2]> {
        let mut line = vec![points[&start_edge]];
        let mut at = start_edge;
        loop {
            let next_seg = adjacency[&at].iter().find(|&&s| !used[s]).copied();
            let Some(s) = next_seg else { break };
            used[s] = true;
            let (a, b) = segments[s];
            let other = if a == at { b } else { a };
            line.push(points[&other]);
            at = other;
        }
        line
    };

    // Endpoints (degree one) first: open chains.
    let endpoint_edges: Vec<EdgeId> = adjacency
        .iter()
        .filter(|(_, segs)| segs.len() == 1)
        .map(|(e, _)| *e)
        .collect();
    for e in endpoint_edges {
        if adjacency[&e].iter().all(|&s| used[s]) {
            continue;
        }
        polylines.push(walk(e, &mut used));
    }
    // Anything left is a closed loop.
    for idx in 0..segments.len() {
        if !used[idx] {
            let start = segments[idx].0;
            let mut line = walk(start, &mut used);
            if line.len() > 2 {
                line.push(line[0]);
            }
            polylines.push(line);
        }
    }
    polylines
}
