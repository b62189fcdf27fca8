//! Naive reference implementations for testing.
//!
//! Everything here works on plain slices so it shares no code with the
//! library it checks. Speed is not a goal.

/// Median of every clamped 5×5 window, found by sorting the window.
pub fn median_5x5(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(pixels.len());
    for y in 0..height as i64 {
        for x in 0..width as i64 {
            let mut window = Vec::with_capacity(25);
            for dy in -2..=2 {
                for dx in -2..=2 {
                    let sx = (x + dx).clamp(0, width as i64 - 1) as usize;
                    let sy = (y + dy).clamp(0, height as i64 - 1) as usize;
                    window.push(pixels[sy * width + sx]);
                }
            }
            window.sort_unstable();
            out.push(window[12]);
        }
    }
    out
}

/// Row runs found by counting pixels between a background→foreground
/// transition and the following foreground→background transition. Rows with
/// no runs are omitted.
pub fn row_runs(width: usize, height: usize, mask: &[bool]) -> Vec<(usize, Vec<usize>)> {
    let mut rows = Vec::new();
    for y in 0..height {
        let mut runs = Vec::new();
        let mut open: Option<usize> = None;
        // Pad both ends with background so every run has two transitions.
        for x in 0..=width {
            let here = x < width && mask[y * width + x];
            let prev = x > 0 && mask[y * width + x - 1];
            if here && !prev {
                open = Some(x);
            }
            if !here && prev {
                runs.push(x - open.take().unwrap());
            }
        }
        if !runs.is_empty() {
            rows.push((y, runs));
        }
    }
    rows
}

/// First pixel that is foreground and unvisited, trying every (x, y) and
/// keeping the smallest (y, x).
pub fn first_unvisited(
    width: usize,
    height: usize,
    fg: &[bool],
    visited: &[bool],
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for x in 0..width {
        for y in 0..height {
            let i = y * width + x;
            if fg[i] && !visited[i] && best.is_none_or(|(by, bx)| (y, x) < (by, bx)) {
                best = Some((y, x));
            }
        }
    }
    best.map(|(y, x)| (x, y))
}

fn euclid(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Minimum cost over every monotone alignment path, enumerated recursively.
/// Exponential; keep inputs to a handful of points.
pub fn dtw_exhaustive(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    fn walk(a: &[(f64, f64)], b: &[(f64, f64)], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + euclid(a[i], b[j]);
        if i + 1 == a.len() && j + 1 == b.len() {
            *best = best.min(acc);
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

/// Cost of one explicit alignment path given as index pairs.
pub fn alignment_cost(a: &[(f64, f64)], b: &[(f64, f64)], path: &[(usize, usize)]) -> f64 {
    path.iter().map(|&(i, j)| euclid(a[i], b[j])).sum()
}

/// Distance from `p` to segment `ab`, via the projection's sign tests and the
/// cross product instead of a clamped parameter.
pub fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let ab = (b.0 - a.0, b.1 - a.1);
    let ap = (p.0 - a.0, p.1 - a.1);
    let bp = (p.0 - b.0, p.1 - b.1);
    if ab.0 == 0.0 && ab.1 == 0.0 {
        return euclid(p, a);
    }
    if ap.0 * ab.0 + ap.1 * ab.1 <= 0.0 {
        return euclid(p, a);
    }
    if bp.0 * ab.0 + bp.1 * ab.1 >= 0.0 {
        return euclid(p, b);
    }
    (ab.0 * ap.1 - ab.1 * ap.0).abs() / euclid(a, b)
}

/// Pixels whose centers lie within `radius` of any polyline segment. A
/// one-point polyline is a disk.
pub fn polyline_ink(
    width: usize,
    height: usize,
    lines: &[Vec<(f64, f64)>],
    radius: f64,
) -> Vec<bool> {
    let mut mask = vec![false; width * height];
    for y in 0..height {
        for x in 0..width {
            let p = (x as f64, y as f64);
            mask[y * width + x] = lines.iter().any(|line| {
                if line.len() == 1 {
                    return euclid(p, line[0]) <= radius;
                }
                line.windows(2)
                    .any(|s| segment_distance(p, s[0], s[1]) <= radius)
            });
        }
    }
    mask
}

/// True when `v` is at least as close to the dark peak as to the light one.
pub fn nearer_dark_peak(v: u8, dark: u8, light: u8) -> bool {
    (v as i32 - dark as i32).abs() <= (light as i32 - v as i32).abs()
}

/// Minimum-total-cost set of (row, col) pairs among all partial matchings
/// that use only entries with cost ≤ `threshold` and are maximal in size.
pub fn best_assignment(costs: &[Vec<f64>], threshold: f64) -> Vec<(usize, usize)> {
    fn search(
        costs: &[Vec<f64>],
        threshold: f64,
        row: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<(usize, usize)>,
        best: &mut (usize, f64, Vec<(usize, usize)>),
    ) {
        if row == costs.len() {
            let total: f64 = cur.iter().map(|&(i, j)| costs[i][j]).sum();
            if cur.len() > best.0 || (cur.len() == best.0 && total < best.1) {
                *best = (cur.len(), total, cur.clone());
            }
            return;
        }
        search(costs, threshold, row + 1, used, cur, best);
        for j in 0..costs[row].len() {
            if !used[j] && costs[row][j] <= threshold {
                used[j] = true;
                cur.push((row, j));
                search(costs, threshold, row + 1, used, cur, best);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let cols = costs.first().map_or(0, Vec::len);
    let mut best = (0, f64::INFINITY, Vec::new());
    search(
        costs,
        threshold,
        0,
        &mut vec![false; cols],
        &mut Vec::new(),
        &mut best,
    );
    let mut pairs = best.2;
    pairs.sort_unstable();
    pairs
}
