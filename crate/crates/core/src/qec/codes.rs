use super::{BinaryMatrix, Check, CheckKind, CodeFamily, Layout, QecGraph};
use crate::error::{Error, Result};

/// Steane [[7,1,3]] parity sets, 0-based ({4,5,6,7}, {2,3,6,7}, {1,3,5,7} 1-based).
pub const STEANE_SUPPORTS: [[usize; 4]; 3] = [[3, 4, 5, 6], [1, 2, 5, 6], [0, 2, 4, 6]];

/// Rotated planar surface-code patch of odd distance `d`.
///
/// Lattice coordinates run over `[0, 2d]²`: data qubits sit at odd/odd points
/// (index `row·d + col`), check ancillas at even/even points. Bulk plaquettes
/// alternate X/Z; weight-2 boundary checks are X on the top and bottom edges and
/// Z on the left and right edges.
pub fn surface_code_graph(distance: usize) -> Result<QecGraph> {
    if distance < 3 || distance.is_multiple_of(2) {
        return Err(Error::Code(format!(
            "surface code distance must be odd and >= 3, got {distance}"
        )));
    }
    let d = distance as i64;
    let span = 2 * d;
    let data_index = |x: i64, y: i64| -> Option<usize> {
        let inside = (1..span).contains(&x) && (1..span).contains(&y);
        (inside && x % 2 == 1 && y % 2 == 1).then(|| ((y / 2) * d + x / 2) as usize)
    };
    let data_coords: Vec<(i64, i64)> = (0..d * d).map(|i| (2 * (i % d) + 1, 2 * (i / d) + 1)).collect();

    let mut checks = Vec::new();
    let mut check_coords = Vec::new();
    for y in (0..=span).step_by(2) {
        for x in (0..=span).step_by(2) {
            let data: Vec<usize> = [(-1, -1), (1, -1), (-1, 1), (1, 1)]
                .iter()
                .filter_map(|(dx, dy)| data_index(x + dx, y + dy))
                .collect();
            let kind = if (x / 2 + y / 2) % 2 == 0 {
                CheckKind::X
            } else {
                CheckKind::Z
            };
            let keep = match data.len() {
                4 => true,
                2 if y == 0 || y == span => kind == CheckKind::X,
                2 => kind == CheckKind::Z,
                _ => false,
            };
            if keep {
                checks.push(Check { kind, data });
                check_coords.push((x, y));
            }
        }
    }
    let mut g = QecGraph::new(CodeFamily::Surface { distance }, distance * distance, checks)?;
    g.layout = Some(Layout {
        data: data_coords,
        checks: check_coords,
    });
    g.logical_qubits = Some(g.compute_logical_qubits());
    g.threshold = Some(0.01);
    Ok(g)
}

/// Concatenated Steane code with `levels` levels (7^L data). Level-L checks are
/// the level-(L−1) checks of each of the seven blocks plus the six Steane
/// checks lifted to act on whole blocks, so the top-level weight is 4·7^(L−1).
pub fn steane_concat_graph(levels: u32) -> Result<QecGraph> {
    if levels < 1 {
        return Err(Error::Code("Steane concatenation needs at least one level".into()));
    }
    let n = 7usize
        .checked_pow(levels)
        .ok_or_else(|| Error::Code(format!("7^{levels} overflows")))?;
    let mut checks = steane_checks(levels);
    // top level first reads better in exports
    checks.sort_by_key(|c| std::cmp::Reverse(c.weight()));
    let mut g = QecGraph::new(CodeFamily::SteaneConcatenated { levels }, n, checks)?;
    g.logical_qubits = Some(g.compute_logical_qubits());
    Ok(g)
}

fn steane_checks(levels: u32) -> Vec<Check> {
    let block = 7usize.pow(levels - 1);
    let mut checks = Vec::new();
    if levels > 1 {
        let inner = steane_checks(levels - 1);
        for b in 0..7 {
            checks.extend(inner.iter().map(|c| Check {
                kind: c.kind,
                data: c.data.iter().map(|d| d + b * block).collect(),
            }));
        }
    }
    for kind in [CheckKind::X, CheckKind::Z] {
        for support in STEANE_SUPPORTS {
            let data = support.iter().flat_map(|&b| b * block..(b + 1) * block).collect();
            checks.push(Check { kind, data });
        }
    }
    checks
}

/// Hypergraph product of classical check matrices `h1` (m1×n1) and `h2` (m2×n2).
///
/// Data: n1·n2 "left" qubits `(i, j)` then m1·m2 "right" qubits `(a, b)`.
/// X check `(a, j)` = {(i, j) : h1[a][i]} ∪ {(a, b) : h2[b][j]};
/// Z check `(i, b)` = {(i, j) : h2[b][j]} ∪ {(a, b) : h1[a][i]}.
/// X check weight is row weight of h1 plus column weight of h2, and symmetrically for Z.
pub fn hypergraph_product_graph(h1: &BinaryMatrix, h2: &BinaryMatrix) -> Result<QecGraph> {
    if h1.is_zero() || h2.is_zero() {
        return Err(Error::Code("hypergraph product of a zero matrix".into()));
    }
    let (m1, n1) = (h1.rows(), h1.cols());
    let (m2, n2) = (h2.rows(), h2.cols());
    let left = |i: usize, j: usize| i * n2 + j;
    let right = |a: usize, b: usize| n1 * n2 + a * m2 + b;
    let mut checks = Vec::with_capacity(m1 * n2 + n1 * m2);
    for a in 0..m1 {
        for j in 0..n2 {
            let mut data: Vec<usize> = h1.row_support(a).into_iter().map(|i| left(i, j)).collect();
            data.extend(h2.col_support(j).into_iter().map(|b| right(a, b)));
            checks.push(Check {
                kind: CheckKind::X,
                data,
            });
        }
    }
    for i in 0..n1 {
        for b in 0..m2 {
            let mut data: Vec<usize> = h2.row_support(b).into_iter().map(|j| left(i, j)).collect();
            data.extend(h1.col_support(i).into_iter().map(|a| right(a, b)));
            checks.push(Check {
                kind: CheckKind::Z,
                data,
            });
        }
    }
    let family = CodeFamily::HypergraphProduct { m1, n1, m2, n2 };
    let mut g = QecGraph::new(family, n1 * n2 + m1 * m2, checks)?;
    g.logical_qubits = Some(g.compute_logical_qubits());
    Ok(g)
}
