//! Marching squares over a `(gain, d/w0)` PSNR grid.

use std::collections::HashMap;

use ndarray::Array2;

use crate::error::{Error, Result};

/// PSNR sampled on `gain_axis × d_axis` (rows are gains).
#[derive(Debug, Clone, PartialEq)]
pub struct PsnrGrid {
    pub d_axis: Vec<f64>,
    pub gain_axis: Vec<f64>,
    pub values: Array2<f64>,
}

impl PsnrGrid {
    pub fn new(d_axis: Vec<f64>, gain_axis: Vec<f64>, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (gain_axis.len(), d_axis.len()) {
            return Err(Error::DimensionMismatch {
                expected: (gain_axis.len(), d_axis.len()),
                actual: values.dim(),
            });
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidArgument("PSNR grid has holes".into()));
        }
        Ok(Self {
            d_axis,
            gain_axis,
            values,
        })
    }
}

/// Polylines of one level, vertices as `(d/w0, gain_db)`. Closed loops
/// repeat their first vertex at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub level: f64,
    pub polylines: Vec<Vec<(f64, f64)>>,
}

/// Crossing location: `H(i, j)` lies between `(i, j)` and `(i, j+1)`,
/// `V(i, j)` between `(i, j)` and `(i+1, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

fn crossing(grid: &PsnrGrid, level: f64, e: Edge) -> (f64, f64) {
    let v = &grid.values;
    match e {
        Edge::H(i, j) => {
            let t = (level - v[[i, j]]) / (v[[i, j + 1]] - v[[i, j]]);
            let d = grid.d_axis[j] + t * (grid.d_axis[j + 1] - grid.d_axis[j]);
            (d, grid.gain_axis[i])
        }
        Edge::V(i, j) => {
            let t = (level - v[[i, j]]) / (v[[i + 1, j]] - v[[i, j]]);
            let g = grid.gain_axis[i] + t * (grid.gain_axis[i + 1] - grid.gain_axis[i]);
            (grid.d_axis[j], g)
        }
    }
}

fn segments(grid: &PsnrGrid, level: f64) -> Vec<(Edge, Edge)> {
    let v = &grid.values;
    let (rows, cols) = v.dim();
    let mut out = Vec::new();
    for i in 0..rows.saturating_sub(1) {
        for j in 0..cols.saturating_sub(1) {
            // corners counter-clockwise: a=(i,j) b=(i,j+1) c=(i+1,j+1) d=(i+1,j)
            let corners = [v[[i, j]], v[[i, j + 1]], v[[i + 1, j + 1]], v[[i + 1, j]]];
            let inside = corners.map(|x| x >= level);
            // edge k joins corner k and corner k+1
            let edges = [Edge::H(i, j), Edge::V(i, j + 1), Edge::H(i + 1, j), Edge::V(i, j)];
            let cut: Vec<usize> = (0..4).filter(|&k| inside[k] != inside[(k + 1) % 4]).collect();
            match cut.len() {
                2 => out.push((edges[cut[0]], edges[cut[1]])),
                4 => {
                    let center = corners.iter().sum::<f64>() / 4.0 >= level;
                    // isolate the corners whose state differs from the centre
                    for k in 0..4 {
                        if inside[k] != center {
                            out.push((edges[(k + 3) % 4], edges[k]));
                        }
                    }
                }
                _ => {}
            }
        }
    }
    out
}

fn chain(segs: &[(Edge, Edge)]) -> Vec<Vec<Edge>> {
    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segs.iter().enumerate() {
        by_edge.entry(*a).or_default().push(k);
        by_edge.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segs.len()];
    let mut lines = Vec::new();

    let walk = |start: usize, from: Edge, used: &mut Vec<bool>| {
        let mut line = vec![from];
        let mut seg = start;
        let mut at = from;
        loop {
            used[seg] = true;
            let (a, b) = segs[seg];
            let next = if a == at { b } else { a };
            line.push(next);
            at = next;
            match by_edge[&at].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => break,
            }
        }
        line
    };

    // open polylines start at boundary crossings shared by one segment
    for k in 0..segs.len() {
        if used[k] {
            continue;
        }
        for end in [segs[k].0, segs[k].1] {
            if by_edge[&end].len() == 1 && !used[k] {
                lines.push(walk(k, end, &mut used));
            }
        }
    }
    for k in 0..segs.len() {
        if !used[k] {
            lines.push(walk(k, segs[k].0, &mut used));
        }
    }
    lines
}

/// One [`Contour`] per level. Levels outside the grid range give no
/// polylines.
pub fn psnr_contours(grid: &PsnrGrid, levels: &[f64]) -> Vec<Contour> {
    levels
        .iter()
        .map(|&level| {
            let segs = segments(grid, level);
            let polylines = chain(&segs)
                .into_iter()
                .map(|edges| edges.into_iter().map(|e| crossing(grid, level, e)).collect())
                .collect();
            Contour { level, polylines }
        })
        .collect()
}

/// `level_db,vertex_index,d_over_w0,gain_db`; `vertex_index` restarts at 0
/// for each polyline.
pub fn contours_to_csv(contours: &[Contour]) -> String {
    let mut out = String::from("level_db,vertex_index,d_over_w0,gain_db\n");
    for c in contours {
        for line in &c.polylines {
            for (k, (d, g)) in line.iter().enumerate() {
                out.push_str(&format!("{},{k},{d},{g}\n", c.level));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(d: &[f64], g: &[f64], f: impl Fn(f64, f64) -> f64) -> PsnrGrid {
        let values = Array2::from_shape_fn((g.len(), d.len()), |(i, j)| f(d[j], g[i]));
        PsnrGrid::new(d.to_vec(), g.to_vec(), values).unwrap()
    }

    #[test]
    fn constant_grid_has_no_contour() {
        let g = grid(&[1.0, 2.0, 3.0], &[0.0, 4.0], |_, _| 13.0);
        let c = psnr_contours(&g, &[12.0, 40.0, -5.0]);
        assert!(c.iter().all(|c| c.polylines.is_empty()));
    }

    #[test]
    fn monotone_grid_matches_column_scan() {
        let d = [10.0, 20.0, 40.0, 80.0, 160.0];
        let gains = [0.0, 4.0, 8.0, 12.0, 16.0, 20.0];
        let g = grid(&d, &gains, |d, g| 4.0 * d.log10() + 0.3 * g + 0.01 * d);
        for level in [12.0, 14.0] {
            let c = &psnr_contours(&g, &[level])[0];
            assert_eq!(c.polylines.len(), 1);
            let line = &c.polylines[0];
            // brute force: every upward crossing along each column
            let mut expected = Vec::new();
            for (j, &dj) in d.iter().enumerate() {
                for i in 0..gains.len() - 1 {
                    let (a, b) = (g.values[[i, j]], g.values[[i + 1, j]]);
                    if (a >= level) != (b >= level) {
                        let t = (level - a) / (b - a);
                        expected.push((dj, gains[i] + t * (gains[i + 1] - gains[i])));
                    }
                }
            }
            let on_columns: Vec<(f64, f64)> = line
                .iter()
                .copied()
                .filter(|p| d.contains(&p.0))
                .collect();
            assert_eq!(on_columns.len(), expected.len());
            for e in &expected {
                assert!(on_columns
                    .iter()
                    .any(|p| p.0 == e.0 && (p.1 - e.1).abs() < 1e-12));
            }
            // single crossing per column
            for &dj in &d {
                assert!(on_columns.iter().filter(|p| p.0 == dj).count() <= 1);
            }
        }
    }

    #[test]
    fn level_12_lies_below_level_14() {
        let d = [10.0, 30.0, 100.0, 300.0];
        let gains = [0.0, 5.0, 10.0, 15.0, 20.0];
        let g = grid(&d, &gains, |d, g| 6.0 + 3.0 * d.log10() + 0.25 * g);
        let c = psnr_contours(&g, &[12.0, 14.0]);
        for &dj in &d {
            let at = |c: &Contour| {
                c.polylines[0]
                    .iter()
                    .find(|p| p.0 == dj)
                    .map(|p| p.1)
            };
            if let (Some(lo), Some(hi)) = (at(&c[0]), at(&c[1])) {
                assert!(lo < hi);
            }
        }
    }

    #[test]
    fn saddle_grid_hand_count() {
        // 0 1 0 / 1 0 1 / 0 1 0 at level 0.4: all 12 edges cross; every cell
        // is a saddle whose centre (0.5) is inside, so the four corner zeros
        // are cut off by open arcs and the middle zero by a closed loop.
        let values = ndarray::arr2(&[[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]);
        let g = PsnrGrid::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0], values).unwrap();
        let c = &psnr_contours(&g, &[0.4])[0];
        assert_eq!(c.polylines.len(), 5);
        let open = c.polylines.iter().filter(|l| l.len() == 2).count();
        let closed: Vec<_> = c.polylines.iter().filter(|l| l.len() == 5).collect();
        assert_eq!(open, 4);
        assert_eq!(closed.len(), 1);
        assert_eq!(closed[0].first(), closed[0].last());
        let mut vertices: Vec<(f64, f64)> = c.polylines.iter().flatten().copied().collect();
        vertices.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vertices.dedup();
        assert_eq!(vertices.len(), 12);
    }

    #[test]
    fn csv_layout() {
        let g = grid(&[1.0, 2.0], &[0.0, 10.0], |d, g| d + g);
        let csv = contours_to_csv(&psnr_contours(&g, &[5.0]));
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("level_db,vertex_index,d_over_w0,gain_db"));
        assert_eq!(lines.next(), Some("5,0,2,3"));
        assert_eq!(lines.next(), Some("5,1,1,4"));
    }
}
